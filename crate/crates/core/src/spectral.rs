//! Finite-difference Schrödinger eigensolver.
//!
//! `−ħ² ψ'' + V ψ = E ψ` on a uniform grid with Dirichlet ends becomes a
//! symmetric tridiagonal matrix over the interior nodes. Eigenvalues come
//! from Sturm-sequence bisection, eigenvectors from inverse iteration.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::catalog::{energy_at, CatalogError, Superpotential};
use crate::expr::{evaluate_real, Bindings, Expr, ExprError};
use crate::grid::{Grid, GridError, GridFunction};
use crate::susy::{log_ground_state, partner_potentials, partners_of};

pub const EIGEN_TOL: f64 = 1e-10;
pub const MAX_BISECTIONS: usize = 200;
pub const DEFAULT_POINTS: usize = 4000;
pub const DEFAULT_INSET: f64 = 1e-3;
/// |ψ₀| at an infinite-side wall relative to its maximum.
pub const BOX_DECAY: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum SpectralError {
    #[error("potential has a pole at grid node x = {x}")]
    Pole { x: f64 },
    #[error("potential not evaluable at x = {x}: {source}")]
    Eval { x: f64, source: ExprError },
    #[error("asked for {k} eigenvalues but a {n}-point grid supports at most {max}")]
    TooManyLevels { k: usize, n: usize, max: usize },
    #[error("bisection for eigenvalue {index} did not converge in {MAX_BISECTIONS} steps")]
    NoConvergence { index: usize },
    #[error("no box with a decayed ground state found for `{entry}`")]
    BoxNotFound { entry: String },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Susy(#[from] crate::susy::SusyError),
}

/// Symmetric tridiagonal matrix on the interior nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    /// Grid points including the two Dirichlet ends.
    pub nodes: usize,
}

impl TridiagonalOperator {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn transpose(&self) -> TridiagonalOperator {
        self.clone()
    }

    /// Number of eigenvalues strictly below `lambda`.
    pub fn count_below(&self, lambda: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE * self.off.iter().fold(1.0f64, |m, e| m.max(e * e));
        let mut q = self.diag[0] - lambda;
        let mut count = usize::from(q < 0.0);
        for i in 1..self.dim() {
            if q.abs() < pivmin {
                q = -pivmin;
            }
            q = self.diag[i] - lambda - self.off[i - 1] * self.off[i - 1] / q;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing every eigenvalue.
    pub fn gershgorin(&self) -> (f64, f64) {
        let m = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..m {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < m { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Solve (T − σ I) x = b by Gaussian elimination with partial pivoting.
    fn shifted_solve(&self, sigma: f64, rhs: &[f64]) -> Vec<f64> {
        let m = self.dim();
        let tiny = f64::EPSILON * self.gershgorin().1.abs().max(1.0);
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - sigma).collect();
        let mut du = self.off.clone();
        let mut dl = self.off.clone();
        let mut du2 = vec![0.0; m.saturating_sub(2)];
        let mut b = rhs.to_vec();
        for i in 0..m - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                d[i + 1] -= fact * du[i];
                b[i + 1] -= fact * b[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                let temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                if i + 2 < m {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du2[i];
                }
                du[i] = temp;
                let tb = b[i];
                b[i] = b[i + 1];
                b[i + 1] = tb - fact * b[i + 1];
            }
            dl[i] = 0.0;
        }
        if d[m - 1] == 0.0 {
            d[m - 1] = tiny;
        }
        let mut x = vec![0.0; m];
        x[m - 1] = b[m - 1] / d[m - 1];
        if m > 1 {
            x[m - 2] = (b[m - 2] - du[m - 2] * x[m - 1]) / d[m - 2];
        }
        for i in (0..m.saturating_sub(2)).rev() {
            x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
        }
        x
    }

    /// Unit eigenvector (Euclidean) for an eigenvalue approximation.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let m = self.dim();
        // a fixed, asymmetric start vector so no parity class is missed
        let mut v: Vec<f64> = (0..m).map(|i| 1.0 + ((i * 7919) % 104_729) as f64 / 104_729.0).collect();
        let sigma = lambda + EIGEN_TOL * lambda.abs().max(1.0) * 1e-2;
        for _ in 0..4 {
            v = self.shifted_solve(sigma, &v);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
        }
        let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-3 * peak) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        v
    }
}

/// Central-difference hamiltonian `−ħ² d²/dx² + V` with Dirichlet ends.
pub fn discretize(
    v: &Expr,
    var: &str,
    params: &Bindings,
    grid: &Grid,
    hbar: f64,
) -> Result<TridiagonalOperator, SpectralError> {
    let h = grid.h();
    let kinetic = hbar * hbar / (h * h);
    let mut b = params.clone();
    let mut diag = Vec::with_capacity(grid.n - 2);
    for i in 1..grid.n - 1 {
        let x = grid.node(i);
        b.set(var, x);
        let value = evaluate_real(v, &b).map_err(|e| match e {
            ExprError::Pole => SpectralError::Pole { x },
            ExprError::UnboundSymbol(_) => SpectralError::Expr(e),
            other => SpectralError::Eval { x, source: other },
        })?;
        diag.push(2.0 * kinetic + value);
    }
    Ok(TridiagonalOperator { off: vec![-kinetic; diag.len() - 1], diag, nodes: grid.n })
}

/// The `k` lowest eigenvalues, ascending, each bracketed to [`EIGEN_TOL`].
pub fn eigen_lowest(op: &TridiagonalOperator, k: usize) -> Result<Vec<f64>, SpectralError> {
    let max = op.nodes / 4;
    if k > max {
        return Err(SpectralError::TooManyLevels { k, n: op.nodes, max });
    }
    let (g_lo, g_hi) = op.gershgorin();
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let (mut lo, mut hi) = (out.last().copied().unwrap_or(g_lo) - EIGEN_TOL, g_hi + EIGEN_TOL);
        let mut steps = 0;
        while hi - lo > EIGEN_TOL {
            if steps == MAX_BISECTIONS {
                return Err(SpectralError::NoConvergence { index: j });
            }
            let mid = 0.5 * (lo + hi);
            if op.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
            steps += 1;
        }
        out.push(0.5 * (lo + hi));
    }
    Ok(out)
}

/// Eigenvectors as grid functions (zero at the Dirichlet ends), normalized
/// so that Σψ²h = 1.
pub fn eigenvectors(op: &TridiagonalOperator, grid: &Grid, values: &[f64]) -> Vec<GridFunction> {
    values
        .iter()
        .map(|&lambda| {
            let mut full = vec![0.0];
            full.extend(op.eigenvector(lambda));
            full.push(0.0);
            GridFunction::on(grid, full).normalized()
        })
        .collect()
}

/// Lowest `k` eigenvalues of `−ħ²d² + v` on `grid`.
pub fn solve(v: &Expr, var: &str, params: &Bindings, grid: &Grid, k: usize) -> Result<Vec<f64>, SpectralError> {
    let hbar = params.get_real("hbar").unwrap_or(1.0);
    eigen_lowest(&discretize(v, var, params, grid, hbar)?, k)
}

/// |E(N) − exact| / |E(2N − 1) − exact| for level `level`.
pub fn richardson_ratio(
    v: &Expr,
    var: &str,
    params: &Bindings,
    grid: &Grid,
    level: usize,
    exact: f64,
) -> Result<f64, SpectralError> {
    let coarse = solve(v, var, params, grid, level + 1)?[level];
    let fine = solve(v, var, params, &grid.refined(), level + 1)?[level];
    Ok((coarse - exact).abs() / (fine - exact).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxOptions {
    pub n: usize,
    pub eps: f64,
}

impl Default for BoxOptions {
    fn default() -> BoxOptions {
        BoxOptions { n: DEFAULT_POINTS, eps: DEFAULT_INSET }
    }
}

/// Parameters after `j` steps `a → a + ħ`.
fn shifted_params(s: &Superpotential, b: &Bindings, j: u32) -> Bindings {
    let a = b.get_real("a").unwrap_or(f64::NAN) + f64::from(j) * b.get_real("hbar").unwrap_or(1.0);
    b.clone().with(&s.shift.param, s.shift.param_of(a)).with("a", a)
}

/// A Dirichlet box for the lowest `levels` states.
///
/// Singular ends are inset by `eps`. Each infinite side is pushed out from
/// the anchor until the ground state of every hamiltonian in the ladder
/// H(a₀), …, H(a_{levels−1}) (bound ones only) has decayed to [`BOX_DECAY`]
/// of its maximum at the wall; the ground state of H(a_j) has the same
/// asymptotics as the j-th excited state of H(a₀).
pub fn auto_box(s: &Superpotential, params: &Bindings, levels: u32, opts: BoxOptions) -> Result<Grid, SpectralError> {
    let b = s.complete_bindings(params)?;
    let d = &s.domain;
    let anchor = d.anchor();
    let inset = |singular: bool| if singular { opts.eps } else { 0.0 };
    let (mut lo, mut hi) = (d.lo() + inset(d.lo.is_singular()), d.hi() - inset(d.hi.is_singular()));
    let (mut reach_lo, mut reach_hi) = (4.0, 4.0);
    for _ in 0..60 {
        if d.lo.is_infinite() {
            lo = anchor - reach_lo;
        }
        if d.hi.is_infinite() {
            hi = anchor + reach_hi;
        }
        let probe = Grid::new(lo, hi, 2001)?;
        let (mut ok_lo, mut ok_hi) = (true, true);
        for j in 0..levels.max(1) {
            if j > 0 && !s.level_is_bound(j, &b)? {
                break;
            }
            let bj = shifted_params(s, &b, j);
            let log_psi = log_ground_state(&s.w, &s.variable, &bj, &probe, anchor.clamp(lo, hi))?;
            let peak = log_psi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let cut = BOX_DECAY.ln();
            ok_lo &= !d.lo.is_infinite() || log_psi[0] - peak < cut;
            ok_hi &= !d.hi.is_infinite() || log_psi[probe.n - 1] - peak < cut;
        }
        if ok_lo && ok_hi {
            let lo_inset = if d.lo.is_singular() { opts.eps } else { 0.0 };
            let hi_inset = if d.hi.is_singular() { opts.eps } else { 0.0 };
            return Ok(Grid::new(lo, hi, opts.n)?.with_insets(lo_inset, hi_inset));
        }
        if !ok_lo {
            reach_lo *= 1.5;
        }
        if !ok_hi {
            reach_hi *= 1.5;
        }
    }
    Err(SpectralError::BoxNotFound { entry: s.id.clone() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectrumReport {
    pub entry: String,
    pub params: BTreeMap<String, f64>,
    pub grid: Grid,
    pub eigenvalues: Vec<f64>,
    /// Analytic E_n for bound levels, `None` past the last bound level.
    pub analytic: Vec<Option<f64>>,
    pub max_err: f64,
    /// Largest eigenvalue change when singular-end insets are halved.
    pub eps_drift: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    pub grid: BoxOptions,
    /// Fixed box; `None` picks one with [`auto_box`].
    pub interval: Option<(f64, f64)>,
    pub tolerance: f64,
}

impl Default for SpectrumOptions {
    fn default() -> SpectrumOptions {
        SpectrumOptions { grid: BoxOptions::default(), interval: None, tolerance: 1e-3 }
    }
}

fn box_grid(
    s: &Superpotential,
    b: &Bindings,
    k: usize,
    opts: &SpectrumOptions,
    eps: f64,
) -> Result<Grid, SpectralError> {
    let grid_opts = BoxOptions { eps, ..opts.grid };
    match opts.interval {
        Some((lo, hi)) => {
            let lo_inset = if s.domain.lo.is_singular() { lo - s.domain.lo() } else { 0.0 };
            let hi_inset = if s.domain.hi.is_singular() { s.domain.hi() - hi } else { 0.0 };
            let scale = eps / opts.grid.eps;
            Ok(Grid::new(
                if s.domain.lo.is_singular() { s.domain.lo() + lo_inset * scale } else { lo },
                if s.domain.hi.is_singular() { s.domain.hi() - hi_inset * scale } else { hi },
                opts.grid.n,
            )?
            .with_insets(lo_inset * scale, hi_inset * scale))
        }
        None => auto_box(s, b, k as u32, grid_opts),
    }
}

/// Numerical spectrum of H₋ compared with the analytic formula.
pub fn spectrum(
    s: &Superpotential,
    params: &Bindings,
    k: usize,
    opts: &SpectrumOptions,
) -> Result<SpectrumReport, SpectralError> {
    let b = s.complete_bindings(params)?;
    s.check_constraints(&b)?;
    let v = partner_potentials(s).v_minus;
    let grid = box_grid(s, &b, k, opts, opts.grid.eps)?;
    let eigenvalues = solve(&v, &s.variable, &b, &grid, k)?;

    let mut analytic = Vec::with_capacity(k);
    let mut max_err = 0.0f64;
    for (n, e) in eigenvalues.iter().enumerate() {
        let n = n as u32;
        if s.level_is_bound(n, &b)? {
            let exact = energy_at(s, n, &b)?;
            max_err = max_err.max((e - exact).abs());
            analytic.push(Some(exact));
        } else {
            analytic.push(None);
        }
    }

    let singular = s.domain.lo.is_singular() || s.domain.hi.is_singular();
    let eps_drift = if singular {
        let half = box_grid(s, &b, k, opts, 0.5 * opts.grid.eps)?;
        let again = solve(&v, &s.variable, &b, &half, k)?;
        Some(eigenvalues.iter().zip(&again).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
    } else {
        None
    };

    Ok(SpectrumReport {
        entry: s.id.clone(),
        params: b.to_real_map(),
        grid,
        eigenvalues,
        analytic,
        max_err,
        eps_drift,
        tolerance: opts.tolerance,
        pass: max_err <= opts.tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IsospectralityReport {
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
    /// Number of pairs E⁻_{n+1} ≈ E⁺_n compared.
    pub compared: usize,
    pub max_mismatch: f64,
    /// Largest eigenvalue change under one grid refinement.
    pub refinement_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compare E⁻_{n+1} with E⁺_n for the first `compared` pairs.
pub fn verify_isospectral_pair(
    v_minus: &Expr,
    v_plus: &Expr,
    var: &str,
    params: &Bindings,
    grid: &Grid,
    k: usize,
    compared: usize,
) -> Result<IsospectralityReport, SpectralError> {
    let minus = solve(v_minus, var, params, grid, k)?;
    let plus = solve(v_plus, var, params, grid, k)?;
    let fine = grid.refined();
    let minus_f = solve(v_minus, var, params, &fine, k)?;
    let plus_f = solve(v_plus, var, params, &fine, k)?;
    let mut refinement_error = 0.0f64;
    let mut max_mismatch = 0.0f64;
    for n in 0..compared {
        max_mismatch = max_mismatch.max((minus[n + 1] - plus[n]).abs());
        refinement_error = refinement_error.max((minus[n + 1] - minus_f[n + 1]).abs()).max((plus[n] - plus_f[n]).abs());
    }
    let tolerance = 1e-3f64.max(10.0 * refinement_error);
    Ok(IsospectralityReport {
        minus,
        plus,
        compared,
        max_mismatch,
        refinement_error,
        tolerance,
        pass: max_mismatch <= tolerance,
    })
}

/// Numerical check of E⁻_{n+1} = E⁺_n for the bound levels among the lowest `k`.
pub fn verify_isospectrality(
    s: &Superpotential,
    params: &Bindings,
    grid: &Grid,
    k: usize,
) -> Result<IsospectralityReport, SpectralError> {
    let b = s.complete_bindings(params)?;
    let mut bound = 0;
    while bound < k && s.level_is_bound(bound as u32, &b)? {
        bound += 1;
    }
    let pair = partners_of(&s.w, &s.variable);
    verify_isospectral_pair(&pair.v_minus, &pair.v_plus, &s.variable, &b, grid, k, bound.saturating_sub(1))
}
