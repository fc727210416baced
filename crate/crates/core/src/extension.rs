//! ħ-expansion of extended superpotentials, W = Σ ħʲ Wⱼ(x, a).
//!
//! Order by order, shape invariance becomes a hierarchy of equations for the
//! Wⱼ. For the Morse kernel W₀ = −a − e^{−x} with W_odd = 0 the even terms
//! are
//!
//! ```text
//! W_{2k} = (−Q)^{k−1} e^{−(2k−1)x} (2P + Q e^{−2x} + 2aQ e^{−x})
//! ```
//!
//! which sum (for e^{2x} > Qħ²) to the closed form
//!
//! ```text
//! W = −a − e^{−x} + ħ² (2P eˣ + 2aQ + Q e^{−x}) / (e^{2x} + Qħ²)
//! ```
//!
//! and a shift x → x + β with e^{2β} = ħ²Q turns that into Scarf II.

use serde::Serialize;

use crate::expr::{evaluate_real, max_deviation, sample_max, Bindings, DomainSampler, Expr, ExprError};
use crate::susy::si_residual_expr;

#[derive(Debug, thiserror::Error)]
pub enum ExtensionError {
    #[error("Q must be positive, got {0}")]
    QNotPositive(f64),
    #[error("hbar must be positive, got {0}")]
    HbarNotPositive(f64),
    #[error("a must be negative, got {0}")]
    ANotNegative(f64),
    #[error("x = {x} is outside the convergence region e^(2x) > Q·hbar^2 (ratio {rho})")]
    OutsideConvergence { x: f64, rho: f64 },
    #[error("order-{j} equation needs W_{missing}")]
    MissingTerm { j: usize, missing: usize },
    #[error("order must be at least 1")]
    ZeroOrder,
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Coefficient Wⱼ(x, a) of ħʲ; may also contain the constants `P`, `Q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesTerm {
    pub j: usize,
    pub w: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtensionParams {
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub hbar: f64,
    pub a: f64,
}

impl ExtensionParams {
    pub fn new(p: f64, q: f64, hbar: f64, a: f64) -> Result<ExtensionParams, ExtensionError> {
        if q.is_nan() || q <= 0.0 {
            return Err(ExtensionError::QNotPositive(q));
        }
        if hbar.is_nan() || hbar <= 0.0 {
            return Err(ExtensionError::HbarNotPositive(hbar));
        }
        if a.is_nan() || a >= 0.0 {
            return Err(ExtensionError::ANotNegative(a));
        }
        Ok(ExtensionParams { p, q, hbar, a })
    }

    pub fn bindings(&self) -> Bindings {
        Bindings::from_pairs(&[("P", self.p), ("Q", self.q), ("hbar", self.hbar), ("a", self.a)])
    }

    /// Geometric ratio Qħ²e^{−2x} of the series at `x`.
    pub fn ratio(&self, x: f64) -> f64 {
        self.q * self.hbar * self.hbar * (-2.0 * x).exp()
    }
}

pub fn morse_kernel() -> Expr {
    crate::expr::parse("-a - exp(-x)").expect("kernel")
}

pub fn morse_g() -> Expr {
    crate::expr::parse("-a^2").expect("g")
}

/// W_{2k} with symbolic `P` and `Q`.
pub fn series_term_symbolic(k: usize) -> SeriesTerm {
    assert!(k >= 1, "series terms start at k = 1");
    let text = format!("(-Q)^{}*exp(-{}*x)*(2*P + Q*exp(-2*x) + 2*a*Q*exp(-x))", k - 1, 2 * k - 1);
    SeriesTerm { j: 2 * k, w: crate::expr::parse(&text).expect("series term").simplify() }
}

/// W_{2k} at fixed `P`, `Q`.
pub fn series_term(k: usize, p: f64, q: f64) -> SeriesTerm {
    let t = series_term_symbolic(k);
    SeriesTerm { j: t.j, w: t.w.substitute_values(&[("P", p), ("Q", q)]) }
}

/// W₀, W₁, …, W_order for the Morse family (odd orders zero).
pub fn morse_series(order: usize) -> Vec<SeriesTerm> {
    (0..=order)
        .map(|j| match j {
            0 => SeriesTerm { j, w: morse_kernel() },
            j if j % 2 == 1 => SeriesTerm { j, w: Expr::int(0) },
            j => series_term_symbolic(j / 2),
        })
        .collect()
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// The order-`j` equation as an expression in x, a (and the terms' constants):
///
/// ```text
/// j = 1:  2∂ₓW₀ − ∂ₐ(W₀² + g)
/// j ≥ 2:  2∂ₓW_{j−1} − Σ_{s=1}^{j−1} Σ_{k=0}^{s} ∂ₐ^{j−s}(W_k W_{s−k})/(j−s)!
///                    + Σ_{k=2}^{j−1} ∂ₐ^{k−1}∂ₓW_{j−k}/(k−1)!
/// ```
pub fn recursion_equation(terms: &[SeriesTerm], g: &Expr, j: usize) -> Result<Expr, ExtensionError> {
    if j == 0 {
        return Err(ExtensionError::ZeroOrder);
    }
    let w = |i: usize| -> Result<&Expr, ExtensionError> {
        terms.iter().find(|t| t.j == i).map(|t| &t.w).ok_or(ExtensionError::MissingTerm { j, missing: i })
    };
    if j == 1 {
        let w0 = w(0)?;
        return Ok(Expr::int(2) * w0.differentiate("x") - (w0.pow(2) + g).differentiate("a"));
    }
    let mut eq = Expr::int(2) * w(j - 1)?.differentiate("x");
    for s in 1..j {
        for k in 0..=s {
            let product = w(k)? * w(s - k)?;
            let d = product.nth_derivative("a", j - s);
            if !d.is_zero() {
                eq = eq - Expr::rational(1, factorial(j - s)) * d;
            }
        }
    }
    for k in 2..j {
        let d = w(j - k)?.nth_derivative("a", k - 1).differentiate("x");
        if !d.is_zero() {
            eq = eq + Expr::rational(1, factorial(k - 1)) * d;
        }
    }
    Ok(eq)
}

/// Largest |order-`j` equation| over the sampled points.
pub fn recursion_residual(
    terms: &[SeriesTerm],
    g: &Expr,
    j: usize,
    sampler: &DomainSampler,
) -> Result<f64, ExtensionError> {
    let eq = recursion_equation(terms, g, j)?;
    Ok(sample_max(sampler, |b| Ok(evaluate_real(&eq, b)?.abs()))?.max)
}

/// Closed form of the summed Morse series, in x, a, P, Q, hbar.
pub fn closed_form() -> Expr {
    crate::expr::parse("-a - exp(-x) + hbar^2*(2*P*exp(x) + 2*a*Q + Q*exp(-x))/(exp(2*x) + Q*hbar^2)")
        .expect("closed form")
}

fn check_region(p: &ExtensionParams, x: f64) -> Result<f64, ExtensionError> {
    let rho = p.ratio(x);
    if rho.is_nan() || rho >= 1.0 {
        return Err(ExtensionError::OutsideConvergence { x, rho });
    }
    Ok(rho)
}

/// Σ_{j ≤ 2K} ħʲ Wⱼ at `x`.
pub fn sum_series(k_max: usize, p: &ExtensionParams, x: f64) -> Result<f64, ExtensionError> {
    check_region(p, x)?;
    let b = p.bindings().with("x", x);
    let mut sum = evaluate_real(&morse_kernel(), &b)?;
    for k in 1..=k_max {
        let t = series_term_symbolic(k);
        sum += p.hbar.powi(t.j as i32) * evaluate_real(&t.w, &b)?;
    }
    Ok(sum)
}

pub fn closed_form_at(p: &ExtensionParams, x: f64) -> Result<f64, ExtensionError> {
    Ok(evaluate_real(&closed_form(), &p.bindings().with("x", x))?)
}

/// Least-squares slope of ln|partial(K) − closed| over `ks`, with the
/// individual errors.
pub fn convergence_slope(p: &ExtensionParams, x: f64, ks: &[usize]) -> Result<(f64, Vec<f64>), ExtensionError> {
    let closed = closed_form_at(p, x)?;
    let errors =
        ks.iter().map(|&k| Ok((sum_series(k, p, x)? - closed).abs())).collect::<Result<Vec<f64>, ExtensionError>>()?;
    let pts: Vec<(f64, f64)> = ks.iter().zip(&errors).map(|(&k, e)| (k as f64, e.ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    Ok((sxy / sxx, errors))
}

/// Largest shape-invariance residual of the closed form (with g = −a²) over
/// sampled `x`.
pub fn verify_extended_si(p: &ExtensionParams, sampler: &DomainSampler) -> Result<f64, ExtensionError> {
    let r = si_residual_expr(&closed_form(), &morse_g(), "x");
    let sampler = sampler.clone().with_bindings(&p.bindings());
    Ok(sample_max(&sampler, |b| Ok(evaluate_real(&r, b)?.abs()))?.max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScarfMap {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub beta: f64,
}

/// Scarf II parameters reproducing the closed form after x → x + β:
/// P′ = ħ²P, e^{2β} = ħ²Q, B = (2P′ − 1)e^{−β}/2, A = −a.
pub fn scarf_parameters(p: &ExtensionParams) -> Result<ScarfMap, ExtensionError> {
    if p.q.is_nan() || p.q <= 0.0 {
        return Err(ExtensionError::QNotPositive(p.q));
    }
    let p_prime = p.hbar * p.hbar * p.p;
    let beta = 0.5 * (p.hbar * p.hbar * p.q).ln();
    Ok(ScarfMap { a: -p.a, b: (2.0 * p_prime - 1.0) * (-beta).exp() / 2.0, beta })
}

/// Scarf parameters and the largest deviation between the shifted closed
/// form and A·tanh x + B·sech x over sampled `x`.
pub fn map_to_scarf(p: &ExtensionParams, sampler: &DomainSampler) -> Result<(ScarfMap, f64), ExtensionError> {
    let m = scarf_parameters(p)?;
    let shifted = closed_form().substitute("x", &(Expr::sym("x") + Expr::float(m.beta))).substitute_values(&[
        ("P", p.p),
        ("Q", p.q),
        ("hbar", p.hbar),
        ("a", p.a),
    ]);
    let scarf = crate::expr::parse("A*tanh(x) + B*sech(x)")?.substitute_values(&[("A", m.a), ("B", m.b)]);
    Ok((m, max_deviation(&shifted, &scarf, sampler)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ScarfReport {
    pub params: ExtensionParams,
    pub scarf: ScarfMap,
    pub samples: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// [`map_to_scarf`] over `samples` points of x ∈ (−5, 5).
pub fn scarf_report(p: &ExtensionParams, samples: usize, seed: u64) -> Result<ScarfReport, ExtensionError> {
    let sampler = DomainSampler::new(seed).range("x", -5.0, 5.0).samples(samples);
    let (scarf, max_deviation) = map_to_scarf(p, &sampler)?;
    Ok(ScarfReport {
        params: *p,
        scarf,
        samples,
        max_deviation,
        tolerance: SCARF_TOL,
        pass: max_deviation <= SCARF_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtensionReport {
    pub params: ExtensionParams,
    pub orders_checked: usize,
    pub max_residual_per_order: Vec<f64>,
    pub convergence_slope: f64,
    pub expected_slope: f64,
    pub scarf_map: ScarfMap,
    pub max_deviation: f64,
    pub si_residual: f64,
    pub pass: bool,
}

pub const RECURSION_TOL: f64 = 1e-10;
pub const SCARF_TOL: f64 = 1e-10;

/// Full check of the Morse extension: recursion residuals through `orders`,
/// geometric convergence at x = 1 (or the nearest point inside the
/// convergence region), shape invariance and the Scarf map.
pub fn extend_morse(p: &ExtensionParams, orders: usize, seed: u64) -> Result<ExtensionReport, ExtensionError> {
    let terms = morse_series(orders);
    let g = morse_g();
    let sampler = DomainSampler::new(seed).range("x", 0.0, 3.0).fixed("a", p.a).fixed("P", p.p).fixed("Q", p.q);
    let max_residual_per_order =
        (1..=orders).map(|j| recursion_residual(&terms, &g, j, &sampler)).collect::<Result<Vec<_>, _>>()?;

    // x = 1 unless that is too close to the edge of the convergence region
    let x = 1.0f64.max(0.5 * (p.q * p.hbar * p.hbar).ln() + 1.0);
    let (slope, _) = convergence_slope(p, x, &(1..=10).collect::<Vec<_>>())?;
    let expected_slope = p.ratio(x).ln();

    let x_sampler = DomainSampler::new(seed).range("x", -3.0, 5.0).samples(100);
    let si = verify_extended_si(p, &x_sampler)?;
    let (scarf_map, max_deviation) = map_to_scarf(p, &DomainSampler::new(seed).range("x", -5.0, 5.0).samples(64))?;

    let pass = max_residual_per_order.iter().all(|r| *r <= RECURSION_TOL)
        && (slope - expected_slope).abs() <= 0.1 * expected_slope.abs()
        && si <= RECURSION_TOL
        && max_deviation <= SCARF_TOL;
    Ok(ExtensionReport {
        params: *p,
        orders_checked: orders,
        max_residual_per_order,
        convergence_slope: slope,
        expected_slope,
        scarf_map,
        max_deviation,
        si_residual: si,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{equiv, parse};

    fn params() -> ExtensionParams {
        ExtensionParams::new(1.0, 1.0, 1.0, -2.0).unwrap()
    }

    /// Coefficient of ħʲ in the shape-invariance condition, derived without
    /// dropping any terms: 2∂ₓW_{j−1} − Σ_{s=0}^{j−1} ∂ₐ^{j−s}C_s/(j−s)! +
    /// Σ_{k=2}^{j} ∂ₐ^{k−1}∂ₓW_{j−k}/(k−1)! − g^{(j)}/j!, with
    /// C_s = Σ_k W_k W_{s−k}.
    fn full_coefficient(terms: &[SeriesTerm], g: &Expr, j: usize) -> Expr {
        let w = |i: usize| terms[i].w.clone();
        let c = |s: usize| (0..=s).fold(Expr::int(0), |acc, k| acc + w(k) * w(s - k));
        let mut eq = Expr::int(2) * w(j - 1).differentiate("x");
        for s in 0..j {
            eq = eq - Expr::rational(1, factorial(j - s)) * c(s).nth_derivative("a", j - s);
        }
        for k in 2..=j {
            eq = eq + Expr::rational(1, factorial(k - 1)) * w(j - k).nth_derivative("a", k - 1).differentiate("x");
        }
        eq - Expr::rational(1, factorial(j)) * g.nth_derivative("a", j)
    }

    fn sampler() -> DomainSampler {
        DomainSampler::new(21).range("x", 0.0, 3.0).range("a", -5.0, -0.5).range("P", 0.5, 1.5).range("Q", 0.5, 1.5)
    }

    #[test]
    fn first_order_cancels_for_morse() {
        // 2e⁻ˣ − ∂ₐ(a² + 2ae⁻ˣ + e⁻²ˣ − a²) = 0 up to roundoff
        let r = recursion_residual(&morse_series(0), &morse_g(), 1, &sampler()).unwrap();
        assert!(r <= 1e-14, "{r}");
    }

    #[test]
    fn printed_and_full_equations_agree() {
        let terms = morse_series(8);
        for j in 1..=8 {
            let printed = recursion_equation(&terms, &morse_g(), j).unwrap();
            let full = full_coefficient(&terms, &morse_g(), j);
            assert!(equiv(&printed, &full, &sampler()).unwrap(), "order {j}");
        }
        // also for a kernel whose x-part depends on a
        let scarf = vec![
            SeriesTerm { j: 0, w: parse("-a*tanh(x) + B*sech(x)").unwrap() },
            SeriesTerm { j: 1, w: Expr::int(0) },
            SeriesTerm { j: 2, w: Expr::int(0) },
        ];
        let s = sampler().range("B", -1.0, 1.0);
        for j in 1..=3 {
            let printed = recursion_equation(&scarf, &morse_g(), j).unwrap();
            assert!(equiv(&printed, &full_coefficient(&scarf, &morse_g(), j), &s).unwrap(), "order {j}");
        }
    }

    #[test]
    fn low_orders_vanish() {
        let terms = morse_series(4);
        for j in [3, 5] {
            let terms = if j == 5 { morse_series(4) } else { terms[..3].to_vec() };
            assert!(recursion_residual(&terms, &morse_g(), j, &sampler()).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn missing_term() {
        let err = recursion_residual(&morse_series(2), &morse_g(), 5, &sampler()).unwrap_err();
        assert!(matches!(err, ExtensionError::MissingTerm { j: 5, missing: 4 }));
    }

    #[test]
    fn series_term_values() {
        let b = Bindings::from_pairs(&[("x", 0.0), ("a", -5.0)]);
        assert_eq!(evaluate_real(&series_term(1, 1.0, 1.0).w, &b).unwrap(), -7.0);
        assert_eq!(evaluate_real(&series_term(2, 1.0, 1.0).w, &b).unwrap(), 7.0);
        for k in 1..5 {
            let ratio = series_term_symbolic(k + 1).w / series_term_symbolic(k).w;
            let want = parse("-Q*exp(-2*x)").unwrap();
            assert!(equiv(&ratio, &want, &sampler()).unwrap());
        }
    }

    #[test]
    fn partial_sums_converge_geometrically() {
        let p = params();
        let diff = (sum_series(10, &p, 1.0).unwrap() - closed_form_at(&p, 1.0).unwrap()).abs();
        assert!(diff <= 1e-8, "{diff}");
        let (slope, _) = convergence_slope(&p, 1.0, &(1..=10).collect::<Vec<_>>()).unwrap();
        assert!((slope + 2.0).abs() <= 0.2, "{slope}");
    }

    #[test]
    fn outside_the_region_is_an_error() {
        let p = params();
        let x = 0.5 * (0.5f64).ln();
        assert!(matches!(sum_series(5, &p, x), Err(ExtensionError::OutsideConvergence { .. })));
    }

    #[test]
    fn vanishing_hbar_recovers_the_kernel() {
        let b = Bindings::from_pairs(&[("P", 1.0), ("Q", 1.0), ("a", -2.0), ("hbar", 1e-6)]);
        for x in [-1.0, 0.0, 2.0] {
            let b = b.clone().with("x", x);
            let got = evaluate_real(&closed_form(), &b).unwrap();
            let want = evaluate_real(&morse_kernel(), &b).unwrap();
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn closed_form_is_shape_invariant() {
        for hbar in [0.25, 0.5, 1.0, 2.0] {
            let p = ExtensionParams::new(1.0, 1.0, hbar, -2.0).unwrap();
            let s = DomainSampler::new(4).range("x", -3.0, 5.0).samples(100);
            assert!(verify_extended_si(&p, &s).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn perturbed_partner_breaks_shape_invariance() {
        let p = params();
        let w = closed_form();
        let next = w.substitute("a", &(Expr::sym("a") + Expr::sym("hbar"))).substitute("P", &(Expr::sym("P") + 1e-3));
        let g = morse_g();
        let g_next = g.substitute("a", &(Expr::sym("a") + Expr::sym("hbar")));
        let r = crate::susy::si_residual_pair(&w, &next, &g, &g_next, "x");
        let s = DomainSampler::new(4).range("x", -3.0, 5.0).with_bindings(&p.bindings());
        let worst = sample_max(&s, |b| Ok(evaluate_real(&r, b)?.abs())).unwrap().max;
        assert!(worst > 1e-5 && worst < 1e-1, "{worst}");
    }

    #[test]
    fn scarf_map_example() {
        let (m, dev) = map_to_scarf(&params(), &DomainSampler::new(1).range("x", -5.0, 5.0).samples(64)).unwrap();
        assert_eq!((m.a, m.b, m.beta), (2.0, 0.5, 0.0));
        assert!(dev <= 1e-10);
        assert!((closed_form_at(&params(), 0.0).unwrap() - 0.5).abs() < 1e-15);
        let far = closed_form_at(&params(), 30.0).unwrap();
        assert!((far - 2.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(ExtensionParams::new(1.0, 0.0, 1.0, -1.0), Err(ExtensionError::QNotPositive(_))));
        assert!(matches!(ExtensionParams::new(1.0, 1.0, 1.0, 1.0), Err(ExtensionError::ANotNegative(_))));
        let bad = ExtensionParams { p: 1.0, q: -1.0, hbar: 1.0, a: -1.0 };
        assert!(matches!(scarf_parameters(&bad), Err(ExtensionError::QNotPositive(_))));
    }

    #[test]
    fn report() {
        let r = extend_morse(&params(), 6, 7).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.max_residual_per_order.len(), 6);
    }
}
