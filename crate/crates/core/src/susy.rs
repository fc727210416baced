//! Partner potentials, the shape-invariance condition, ground states and
//! ladder operators.

use serde::Serialize;

use crate::catalog::{CatalogError, Superpotential};
use crate::expr::{evaluate_real, sample_max, Bindings, DomainSampler, Expr, ExprError};
use crate::grid::{Grid, GridError, GridFunction};

#[derive(Debug, thiserror::Error)]
pub enum SusyError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("ground state is not normalizable: norm grew by {growth:.3e} (relative) when the box was extended")]
    NotNormalizable { growth: f64 },
    #[error("grid too coarse for the ladder stencil: {0} points, need at least 16")]
    TooCoarse(usize),
}

/// V∓ = W² ∓ ħ W'.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PartnerPair {
    pub v_minus: Expr,
    pub v_plus: Expr,
}

pub fn partners_of(w: &Expr, var: &str) -> PartnerPair {
    let hbar = Expr::sym("hbar");
    let w2 = w.pow(2);
    let hw = hbar * w.differentiate(var);
    PartnerPair { v_minus: &w2 - &hw, v_plus: w2 + hw }
}

pub fn partner_potentials(s: &Superpotential) -> PartnerPair {
    partners_of(&s.w, &s.variable)
}

/// W²(a) + ħW'(a) + g(a) − [W²(a+ħ) − ħW'(a+ħ) + g(a+ħ)] for W written in `a`.
pub fn si_residual_expr(w_a: &Expr, g: &Expr, var: &str) -> Expr {
    let shifted = Expr::sym("a") + Expr::sym("hbar");
    let w_next = w_a.substitute("a", &shifted);
    let g_next = g.substitute("a", &shifted);
    si_residual_pair(w_a, &w_next, g, &g_next, var)
}

/// The shape-invariance residual with the two sides given separately.
pub fn si_residual_pair(w: &Expr, w_next: &Expr, g: &Expr, g_next: &Expr, var: &str) -> Expr {
    let here = partners_of(w, var).v_plus + g;
    let there = partners_of(w_next, var).v_minus + g_next;
    here - there
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SiReport {
    pub entry: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Shape-invariance residual accepted as zero.
pub const SI_TOLERANCE: f64 = 1e-9;

/// Largest |residual| over explicit points; a pole at any point is an error.
pub fn si_residual(s: &Superpotential, points: &[Bindings]) -> Result<f64, SusyError> {
    let r = si_residual_expr(&s.w_in_a(), &s.g, &s.variable);
    let mut worst = 0.0f64;
    for p in points {
        let b = s.complete_bindings(p)?;
        worst = worst.max(evaluate_real(&r, &b)?.abs());
    }
    Ok(worst)
}

/// Largest |residual| over sampled admissible points (poles are skipped).
pub fn si_residual_sampled(s: &Superpotential, sampler: &DomainSampler) -> Result<SiReport, SusyError> {
    si_residual_sampled_with_g(s, &s.g, sampler)
}

/// As [`si_residual_sampled`] but with a caller-supplied g(a).
pub fn si_residual_sampled_with_g(
    s: &Superpotential,
    g: &Expr,
    sampler: &DomainSampler,
) -> Result<SiReport, SusyError> {
    let r = si_residual_expr(&s.w_in_a(), g, &s.variable);
    let stats = sample_max(sampler, |b| {
        let b = s.complete_bindings(b).map_err(|_| ExprError::UnboundSymbol(s.shift.param.clone()))?;
        Ok(evaluate_real(&r, &b)?.abs())
    })?;
    Ok(SiReport {
        entry: s.id.clone(),
        samples: stats.valid,
        max_residual: stats.max,
        tolerance: SI_TOLERANCE,
        pass: stats.max < SI_TOLERANCE,
    })
}

/// −(1/ħ)∫W from the point `anchor`, on every node of `grid`.
///
/// Trapezoid rule with the Euler-Maclaurin end correction −d²/12·(W'(b) − W'(a))
/// on each panel, which makes the cumulative integral fourth order.
pub(crate) fn log_ground_state(
    w: &Expr,
    var: &str,
    b: &Bindings,
    grid: &Grid,
    anchor: f64,
) -> Result<Vec<f64>, SusyError> {
    let hbar = b.get_real("hbar").unwrap_or(1.0);
    let dw = w.differentiate(var);
    let wv = GridFunction::sample(w, var, b, grid)?.values;
    let dv = GridFunction::sample(&dw, var, b, grid)?.values;
    let panel = |d: f64, f0: f64, f1: f64, g0: f64, g1: f64| 0.5 * d * (f0 + f1) - d * d / 12.0 * (g1 - g0);
    let h = grid.h();
    let mut integral = vec![0.0; grid.n];
    for i in 1..grid.n {
        integral[i] = integral[i - 1] + panel(h, wv[i - 1], wv[i], dv[i - 1], dv[i]);
    }
    // shift so that the integral vanishes at the anchor point itself
    let k = grid.nearest(anchor);
    let at = b.clone().with(var, anchor);
    let (wa, da) = (evaluate_real(w, &at)?, evaluate_real(&dw, &at)?);
    let at_anchor = integral[k] + panel(anchor - grid.node(k), wv[k], wa, dv[k], da);
    Ok(integral.into_iter().map(|v| -(v - at_anchor) / hbar).collect())
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// ln ∫ψ² over the grid.
fn log_mass(log_psi: &[f64], h: f64) -> f64 {
    log_sum_exp(log_psi.iter().map(|l| 2.0 * l)) + h.ln()
}

/// ln ∫ψ² over the slab between `start` (where ln ψ = `log_start`) and `end`,
/// continuing the integration of W with panels no wider than `step`.
fn slab_log_mass(
    w: &Expr,
    dw: &Expr,
    var: &str,
    b: &Bindings,
    (start, log_start): (f64, f64),
    end: f64,
    step: f64,
) -> Result<f64, SusyError> {
    let hbar = b.get_real("hbar").unwrap_or(1.0);
    let m = ((end - start).abs() / step).ceil().max(1.0) as usize;
    let d = (end - start) / m as f64;
    let mut b = b.clone();
    let mut at = |x: f64| -> Result<(f64, f64), ExprError> {
        b.set(var, x);
        Ok((evaluate_real(w, &b)?, evaluate_real(dw, &b)?))
    };
    let (mut f0, mut g0) = at(start)?;
    let mut log_psi = log_start;
    let mut terms = Vec::with_capacity(m);
    for j in 1..=m {
        let (f1, g1) = at(start + j as f64 * d)?;
        log_psi -= (0.5 * d * (f0 + f1) - d * d / 12.0 * (g1 - g0)) / hbar;
        terms.push(2.0 * log_psi);
        (f0, g0) = (f1, g1);
    }
    Ok(log_sum_exp(terms.into_iter()) + d.abs().ln())
}

/// ψ₀ ∝ exp(−(1/ħ)∫W), L²-normalized on `grid`.
///
/// The mass of ψ₀² is also integrated over a slab beyond each end: half the
/// box length past an infinite end, half the inset toward a singular one.
/// If that grows the norm by more than 1% the ground state is reported as
/// non-normalizable.
pub fn ground_state(s: &Superpotential, params: &Bindings, grid: &Grid) -> Result<GridFunction, SusyError> {
    let b = s.complete_bindings(params)?;
    let var = s.variable.as_str();
    let anchor = s.domain.anchor().clamp(grid.x0, grid.x1);
    let log_psi = log_ground_state(&s.w, var, &b, grid, anchor)?;
    let h = grid.h();

    let dw = s.w.differentiate(var);
    let len = grid.x1 - grid.x0;
    let mut slabs = Vec::new();
    let last = grid.n - 1;
    for (infinite, inset, start, log_start, dir) in [
        (s.domain.lo.is_infinite(), grid.inset_lo, grid.x0, log_psi[0], -1.0),
        (s.domain.hi.is_infinite(), grid.inset_hi, grid.x1, log_psi[last], 1.0),
    ] {
        let (width, step) = if infinite { (0.5 * len, h) } else { (0.5 * inset, h.min(inset / 40.0)) };
        if width > 0.0 {
            let end = start + dir * width;
            slabs.push(slab_log_mass(&s.w, &dw, var, &b, (start, log_start), end, step)?);
        }
    }
    let base = log_mass(&log_psi, h);
    let extra = log_sum_exp(slabs.into_iter());
    let growth = (1.0 + (extra - base).exp()).sqrt() - 1.0;
    if growth.is_nan() || growth > 0.01 {
        return Err(SusyError::NotNormalizable { growth });
    }
    let m = log_psi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let values = log_psi.iter().map(|l| (l - m).exp()).collect();
    Ok(GridFunction::on(grid, values).normalized())
}

/// Fourth-order first derivative; one-sided five-point stencils at the ends.
pub fn derivative(f: &GridFunction) -> Result<GridFunction, SusyError> {
    let n = f.len();
    if n < 16 {
        return Err(SusyError::TooCoarse(n));
    }
    let v = &f.values;
    let c = 1.0 / (12.0 * f.h);
    let mut d = vec![0.0; n];
    d[0] = c * (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]);
    d[1] = c * (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]);
    for i in 2..n - 2 {
        d[i] = c * (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]);
    }
    let m = n - 1;
    d[m - 1] = -c * (-3.0 * v[m] - 10.0 * v[m - 1] + 18.0 * v[m - 2] - 6.0 * v[m - 3] + v[m - 4]);
    d[m] = -c * (-25.0 * v[m] + 48.0 * v[m - 1] - 36.0 * v[m - 2] + 16.0 * v[m - 3] - 3.0 * v[m - 4]);
    Ok(GridFunction::new(f.x0, f.h, d))
}

/// A⁺ = −ħ d/dx + W raises, A⁻ = ħ d/dx + W lowers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Raise,
    Lower,
}

pub fn apply_ladder(
    s: &Superpotential,
    params: &Bindings,
    op: Ladder,
    psi: &GridFunction,
) -> Result<GridFunction, SusyError> {
    let b = s.complete_bindings(params)?;
    let hbar = b.get_real("hbar").unwrap_or(1.0);
    let dpsi = derivative(psi)?;
    let sign = match op {
        Ladder::Raise => -hbar,
        Ladder::Lower => hbar,
    };
    let mut b = b;
    let mut out = Vec::with_capacity(psi.len());
    for (i, (p, dp)) in psi.values.iter().zip(&dpsi.values).enumerate() {
        b.set(&s.variable, psi.x(i));
        out.push(sign * dp + evaluate_real(&s.w, &b)? * p);
    }
    Ok(GridFunction::new(psi.x0, psi.h, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{get, Catalog};
    use crate::expr::{equiv, parse};

    #[test]
    fn oscillator_partners() {
        let p = partner_potentials(get("harmonic-oscillator").unwrap());
        let want = parse("1/4*omega^2*x^2 - 1/2*omega*hbar").unwrap();
        let sampler = DomainSampler::new(2).range("x", -3.0, 3.0).range("omega", 0.1, 3.0).range("hbar", 0.2, 2.0);
        assert!(equiv(&p.v_minus, &want, &sampler).unwrap());
    }

    #[test]
    fn morse_v_minus_at_origin() {
        let p = partner_potentials(get("morse").unwrap());
        let b = Bindings::from_pairs(&[("A", 5.0), ("B", 1.0), ("hbar", 1.0), ("x", 0.0)]);
        assert_eq!(evaluate_real(&p.v_minus, &b).unwrap(), 15.0);
    }

    #[test]
    fn partner_difference_is_twice_hbar_w_prime() {
        for s in Catalog::builtin().iter() {
            let p = partner_potentials(s);
            let want = Expr::int(2) * Expr::sym("hbar") * s.w.differentiate(&s.variable);
            assert!(equiv(&(&p.v_plus - &p.v_minus), &want, &s.sampler(4)).unwrap(), "{}", s.id);
        }
    }

    #[test]
    fn every_entry_is_shape_invariant() {
        for s in Catalog::builtin().iter() {
            let r = si_residual_sampled(s, &s.sampler(9).samples(100)).unwrap();
            assert!(r.max_residual < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn wrong_g_breaks_shape_invariance() {
        let s = get("morse").unwrap();
        let wrong = parse("a^2").unwrap();
        let r = si_residual_sampled_with_g(s, &wrong, &s.sampler(3)).unwrap();
        assert!(r.max_residual > 0.1);
        // the residual is exactly 2(a² − (a+ħ)²)
        let b = Bindings::from_pairs(&[("A", 5.0), ("B", 1.0), ("hbar", 1.0), ("x", 0.3)]);
        let e = si_residual_expr(&s.w_in_a(), &wrong, "x");
        let b = s.complete_bindings(&b).unwrap();
        assert!((evaluate_real(&e, &b).unwrap() - 2.0 * (25.0 - 16.0)).abs() < 1e-12);
    }

    #[test]
    fn pole_at_explicit_point_is_an_error() {
        let s = get("osc-3d").unwrap();
        let p = Bindings::from_pairs(&[("omega", 1.0), ("l", 1.0), ("r", 0.0)]);
        assert!(matches!(si_residual(s, &[p]), Err(SusyError::Expr(ExprError::Pole))));
    }

    #[test]
    fn oscillator_ground_state_is_gaussian() {
        let s = get("harmonic-oscillator").unwrap();
        let grid = Grid::new(-10.0, 10.0, 2001).unwrap();
        let psi = ground_state(s, &s.default_bindings(), &grid).unwrap();
        let (i0, i1) = (grid.nearest(0.0), grid.nearest(1.0));
        let ratio = psi.values[i1] / psi.values[i0];
        assert!((ratio - (-0.5f64).exp()).abs() < 1e-6, "{ratio}");
        assert!((psi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn radial_oscillator_ground_state() {
        let s = get("osc-3d").unwrap();
        let grid = Grid::new(1e-3, 12.0, 8000).unwrap().with_insets(1e-3, 0.0);
        let psi = ground_state(s, &s.default_bindings(), &grid).unwrap();
        let exact = |r: f64| r * (-r * r / 4.0).exp();
        let (i, j) = (grid.nearest(1.0), grid.nearest(2.0));
        let want = exact(grid.node(j)) / exact(grid.node(i));
        let got = psi.values[j] / psi.values[i];
        assert!((got / want - 1.0).abs() < 1e-6, "{got} vs {want}");
    }

    #[test]
    fn lowering_annihilates_morse_ground_state() {
        let s = get("morse").unwrap();
        let b = s.default_bindings();
        let grid = Grid::new(-8.0, 12.0, 4000).unwrap();
        let psi = ground_state(s, &b, &grid).unwrap();
        let out = apply_ladder(s, &b, Ladder::Lower, &psi).unwrap();
        assert!(out.norm() / psi.norm() < 1e-6, "{}", out.norm());
    }

    #[test]
    fn growing_solution_is_not_normalizable() {
        let mut s = get("harmonic-oscillator").unwrap().clone();
        s.w = parse("-1/2*omega*x").unwrap();
        let grid = Grid::new(-5.0, 5.0, 500).unwrap();
        assert!(matches!(ground_state(&s, &s.default_bindings(), &grid), Err(SusyError::NotNormalizable { .. })));
    }

    #[test]
    fn singular_end_divergence_is_detected() {
        // W = +l/r near 0 gives ψ ~ r^(-l)
        let mut s = get("osc-3d").unwrap().clone();
        s.w = parse("1/2*omega*r + l/r").unwrap();
        let grid = Grid::new(1e-3, 12.0, 4000).unwrap().with_insets(1e-3, 0.0);
        assert!(matches!(ground_state(&s, &s.default_bindings(), &grid), Err(SusyError::NotNormalizable { .. })));
    }

    #[test]
    fn derivative_stencil_is_fourth_order() {
        let err = |n: usize| {
            let h = 2.0 / (n - 1) as f64;
            let f = GridFunction::new(0.0, h, (0..n).map(|i| (i as f64 * h).sin()).collect());
            let d = derivative(&f).unwrap();
            (0..n).map(|i| (d.values[i] - (i as f64 * h).cos()).abs()).fold(0.0, f64::max)
        };
        let ratio = err(41) / err(81);
        assert!(ratio > 12.0, "{ratio}");
        assert!(matches!(derivative(&GridFunction::new(0.0, 0.1, vec![0.0; 10])), Err(SusyError::TooCoarse(10))));
    }
}
