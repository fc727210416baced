//! Registry of additive shape-invariant superpotentials.
//!
//! Every entry stores its superpotential in textbook parameters together with
//! an affine map `a = sign·param + offset` onto the additive parameter, so
//! the step `a → a + ħ` means the same thing for every entry.

mod entries;
mod user;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::expr::{sample_max, Bindings, DomainSampler, Expr, ExprError, Inequality};

pub use user::{load_user_catalog, parse_user_catalog};

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("unknown entry `{id}`; valid ids: {}", valid.join(", "))]
    UnknownId { id: String, valid: Vec<String> },
    #[error("{entry}: constraint `{constraint}` violated")]
    ConstraintViolated { entry: String, constraint: String },
    #[error("{entry}: missing parameter `{param}`")]
    MissingParam { entry: String, param: String },
    #[error("{entry}: `validate_conventional` needs a conventional entry")]
    NotConventional { entry: String },
    #[error("duplicate entry id `{0}`")]
    DuplicateId(String),
    #[error("invalid catalog file: {0}")]
    File(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Class {
    #[serde(rename = "type-I")]
    TypeI,
    #[serde(rename = "type-II")]
    TypeII,
    #[serde(rename = "extended")]
    Extended,
}

impl Class {
    pub fn is_conventional(self) -> bool {
        self != Class::Extended
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::TypeI => "type-I",
            Class::TypeII => "type-II",
            Class::Extended => "extended",
        })
    }
}

/// One end of a domain interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Endpoint {
    Infinite,
    Finite {
        at: Expr,
    },
    /// W diverges here; numerical work must stay an inset away.
    Singular {
        at: Expr,
    },
}

impl Endpoint {
    fn value(&self, lower: bool) -> f64 {
        match self {
            Endpoint::Infinite if lower => f64::NEG_INFINITY,
            Endpoint::Infinite => f64::INFINITY,
            Endpoint::Finite { at } | Endpoint::Singular { at } => {
                crate::expr::evaluate_real(at, &Bindings::real()).unwrap_or(f64::NAN)
            }
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, Endpoint::Singular { .. })
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Endpoint::Infinite)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub lo: Endpoint,
    pub hi: Endpoint,
}

impl Domain {
    pub fn lo(&self) -> f64 {
        self.lo.value(true)
    }

    pub fn hi(&self) -> f64 {
        self.hi.value(false)
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo() && x < self.hi()
    }

    /// Bounded interval used for random sampling of the spatial variable.
    pub fn sample_range(&self) -> (f64, f64) {
        match (self.lo.is_infinite(), self.hi.is_infinite()) {
            (true, true) => (-4.0, 4.0),
            (false, true) => (self.lo() + 0.05, self.lo() + 6.0),
            (true, false) => (self.hi() - 6.0, self.hi() - 0.05),
            (false, false) => {
                let inset = 0.02 * (self.hi() - self.lo());
                (self.lo() + inset, self.hi() - inset)
            }
        }
    }

    /// Where ∫W starts: the midpoint of a finite interval, otherwise 0 on ℝ
    /// and 1 past a finite left end.
    pub fn anchor(&self) -> f64 {
        match (self.lo.is_infinite(), self.hi.is_infinite()) {
            (true, true) => 0.0,
            (false, true) => self.lo() + 1.0,
            (true, false) => self.hi() - 1.0,
            (false, false) => 0.5 * (self.lo() + self.hi()),
        }
    }
}

/// `a = sign·param + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Shift {
    pub param: String,
    pub sign: i8,
    #[serde(default)]
    pub offset: f64,
}

impl Shift {
    pub fn a_of(&self, param: f64) -> f64 {
        f64::from(self.sign) * param + self.offset
    }

    pub fn param_of(&self, a: f64) -> f64 {
        (a - self.offset) * f64::from(self.sign)
    }

    /// The textbook parameter written in terms of the symbol `a`.
    pub fn param_expr(&self) -> Expr {
        let a = Expr::sym("a");
        let centred = if self.offset == 0.0 { a } else { a - Expr::float(self.offset) };
        if self.sign < 0 {
            -centred
        } else {
            centred
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Superpotential {
    pub id: String,
    pub name: String,
    #[serde(rename = "W")]
    pub w: Expr,
    pub variable: String,
    pub domain: Domain,
    #[serde(default)]
    pub constraints: Vec<Inequality>,
    pub shift: Shift,
    /// g(a), in the symbol `a`.
    pub g: Expr,
    /// E_n in `n`, textbook parameters and `hbar`.
    pub energy: Expr,
    pub class: Class,
    /// Parameter values used by default in examples and numerical checks.
    pub defaults: BTreeMap<String, f64>,
    /// Sampling ranges for randomized checks.
    pub ranges: BTreeMap<String, (f64, f64)>,
}

impl Superpotential {
    /// Parameters W depends on, excluding the spatial variable and ħ.
    pub fn params(&self) -> Vec<String> {
        let mut names = self.w.symbols();
        names.extend(self.energy.symbols());
        names.insert(self.shift.param.clone());
        names.remove(&self.variable);
        names.remove("hbar");
        names.remove("n");
        names.into_iter().collect()
    }

    /// W with the shift parameter replaced by its expression in `a`.
    pub fn w_in_a(&self) -> Expr {
        if self.shift.param == "a" && self.shift.sign == 1 && self.shift.offset == 0.0 {
            return self.w.clone();
        }
        self.w.substitute(&self.shift.param, &self.shift.param_expr())
    }

    /// W(x, a + ħ) in terms of `a`.
    pub fn w_shifted(&self) -> Expr {
        self.w_in_a().substitute("a", &(Expr::sym("a") + Expr::sym("hbar")))
    }

    pub fn default_bindings(&self) -> Bindings {
        let mut b = Bindings::real();
        for (k, v) in &self.defaults {
            b.set(k, *v);
        }
        if !b.contains("hbar") {
            b.set("hbar", 1.0);
        }
        b
    }

    /// Bindings with `hbar` defaulted to 1 and the additive `a` added.
    pub fn complete_bindings(&self, params: &Bindings) -> Result<Bindings, CatalogError> {
        let mut b = params.clone();
        if !b.contains("hbar") {
            b.set("hbar", 1.0);
        }
        for p in self.params() {
            if !b.contains(&p) {
                return Err(CatalogError::MissingParam { entry: self.id.clone(), param: p });
            }
        }
        if !b.contains("a") {
            let p = b.get_real(&self.shift.param).unwrap_or(f64::NAN);
            b.set("a", self.shift.a_of(p));
        }
        Ok(b)
    }

    pub fn check_constraints(&self, b: &Bindings) -> Result<(), CatalogError> {
        for c in &self.constraints {
            if !c.holds(b)? {
                return Err(CatalogError::ConstraintViolated { entry: self.id.clone(), constraint: c.to_string() });
            }
        }
        Ok(())
    }

    /// Whether level `n` is a bound state: the entry's constraints must still
    /// hold after `n` steps `a → a + ħ`.
    pub fn level_is_bound(&self, n: u32, params: &Bindings) -> Result<bool, CatalogError> {
        let b = self.complete_bindings(params)?;
        let (a, hbar) = (b.get_real("a").unwrap_or(f64::NAN), b.get_real("hbar").unwrap_or(1.0));
        let a_n = a + f64::from(n) * hbar;
        let b = b.with(&self.shift.param, self.shift.param_of(a_n)).with("a", a_n);
        for c in &self.constraints {
            if !c.holds(&b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Sampler over admissible parameters (and the spatial variable).
    pub fn sampler(&self, seed: u64) -> DomainSampler {
        let (lo, hi) = self.domain.sample_range();
        let mut s = DomainSampler::new(seed).range(&self.variable, lo, hi);
        for (k, (lo, hi)) in &self.ranges {
            s = s.range(k, *lo, *hi);
        }
        if !self.ranges.contains_key("hbar") {
            s = s.range("hbar", 0.25, 2.0);
        }
        s.constraints(&self.constraints)
    }
}

/// Analytic E_n at the given parameters (ħ defaults to 1).
pub fn energy_at(s: &Superpotential, n: u32, params: &Bindings) -> Result<f64, CatalogError> {
    let b = s.complete_bindings(params)?;
    s.check_constraints(&b)?;
    let b = b.with("n", f64::from(n));
    Ok(crate::expr::evaluate_real(&s.energy, &b)?)
}

/// g(a + nħ) − g(a) as an expression in `n`, `hbar` and the textbook
/// parameters.
pub fn energy_from_g(s: &Superpotential) -> Expr {
    let a_param = {
        let p = Expr::sym(&s.shift.param);
        let signed = if s.shift.sign < 0 { -p } else { p };
        if s.shift.offset == 0.0 {
            signed
        } else {
            signed + Expr::float(s.shift.offset)
        }
    };
    let step = Expr::sym("n") * Expr::sym("hbar");
    let g_n = s.g.substitute("a", &(a_param.clone() + step));
    let g_0 = s.g.substitute("a", &a_param);
    g_n - g_0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PdeReport {
    pub entry: String,
    pub samples: usize,
    /// max |W ∂_aW − ∂_xW + ½ g'(a)|
    pub first_order: f64,
    /// max |∂_a² ∂_x W|
    pub mixed_third: f64,
    /// max |∂_a² W(x, a) − ∂_a² W(x₀, a)|
    pub a_linearity: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub const PDE_TOLERANCE: f64 = 1e-9;

/// Check a conventional entry against the two classifying PDEs and the
/// `a·χ₁(x) + χ₂(x) + u(a)` structure.
pub fn validate_conventional(s: &Superpotential, sampler: &DomainSampler) -> Result<PdeReport, CatalogError> {
    if !s.class.is_conventional() {
        return Err(CatalogError::NotConventional { entry: s.id.clone() });
    }
    let x = s.variable.as_str();
    let w = s.w_in_a();
    let dw_da = w.differentiate("a");
    let eq4 = &w * &dw_da - w.differentiate(x) + Expr::rational(1, 2) * s.g.differentiate("a");
    let eq5 = dw_da.nth_derivative("a", 1).differentiate(x);
    let d2a = dw_da.differentiate("a");
    let anchor = Expr::float(s.domain.anchor());
    let structural = &d2a - d2a.substitute(x, &anchor);

    let mut worst = [0.0f64; 3];
    let stats = sample_max(sampler, |b| {
        let b = s.complete_bindings(b).map_err(|e| match e {
            CatalogError::MissingParam { param, .. } => ExprError::UnboundSymbol(param),
            other => ExprError::UnboundSymbol(other.to_string()),
        })?;
        let r = [
            crate::expr::evaluate_real(&eq4, &b)?.abs(),
            crate::expr::evaluate_real(&eq5, &b)?.abs(),
            crate::expr::evaluate_real(&structural, &b)?.abs(),
        ];
        for (w, r) in worst.iter_mut().zip(r) {
            *w = w.max(r);
        }
        Ok(r.into_iter().fold(0.0, f64::max))
    })?;
    let [first_order, mixed_third, a_linearity] = worst;
    Ok(PdeReport {
        entry: s.id.clone(),
        samples: stats.valid,
        first_order,
        mixed_third,
        a_linearity,
        tolerance: PDE_TOLERANCE,
        pass: stats.max < PDE_TOLERANCE,
    })
}

/// A set of entries keyed by id.
#[derive(Debug, Clone)]
pub struct Catalog {
    entries: BTreeMap<String, Superpotential>,
}

impl Catalog {
    pub fn builtin() -> &'static Catalog {
        static BUILTIN: OnceLock<Catalog> = OnceLock::new();
        BUILTIN.get_or_init(|| {
            let entries = entries::builtin().into_iter().map(|s| (s.id.clone(), s)).collect();
            Catalog { entries }
        })
    }

    /// The built-in entries plus those of a user catalog.
    pub fn with_extra(extra: Vec<Superpotential>) -> Result<Catalog, CatalogError> {
        let mut cat = Catalog::builtin().clone();
        for s in extra {
            if cat.entries.contains_key(&s.id) {
                return Err(CatalogError::DuplicateId(s.id));
            }
            cat.entries.insert(s.id.clone(), s);
        }
        Ok(cat)
    }

    pub fn get(&self, id: &str) -> Result<&Superpotential, CatalogError> {
        self.entries.get(id).ok_or_else(|| CatalogError::UnknownId { id: id.to_string(), valid: self.ids() })
    }

    pub fn ids(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Superpotential> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Look up a built-in entry.
pub fn get(id: &str) -> Result<&'static Superpotential, CatalogError> {
    Catalog::builtin().get(id)
}

/// Built-in ids of the ten ħ-independent superpotentials.
pub fn conventional_ids() -> Vec<String> {
    Catalog::builtin().iter().filter(|s| s.class.is_conventional()).map(|s| s.id.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{equiv, parse};

    #[test]
    fn lookups() {
        let morse = get("morse").unwrap();
        assert_eq!(morse.w, parse("A - B*exp(-x)").unwrap());
        assert_eq!(morse.class, Class::TypeII);
        let rm2 = get("rosen-morse-2").unwrap();
        assert_eq!(rm2.w, parse("A*tanh(x) + B/A").unwrap());
        assert_eq!(rm2.class, Class::TypeI);
        let err = get("nosuch").unwrap_err();
        let CatalogError::UnknownId { valid, .. } = &err else { panic!("{err}") };
        assert_eq!(valid.len(), 12);
        assert!(err.to_string().contains("scarf-hyp"));
    }

    #[test]
    fn type_tags() {
        let count = |c| Catalog::builtin().iter().filter(|s| s.class == c).count();
        assert_eq!((count(Class::TypeI), count(Class::TypeII), count(Class::Extended)), (6, 4, 2));
    }

    #[test]
    fn conventional_entries_are_hbar_free() {
        for s in Catalog::builtin().iter().filter(|s| s.class.is_conventional()) {
            assert!(!s.w.depends_on("hbar"), "{}", s.id);
        }
    }

    #[test]
    fn energies() {
        let b = Bindings::from_pairs(&[("A", 5.0), ("B", 1.0)]);
        assert_eq!(energy_at(get("morse").unwrap(), 2, &b).unwrap(), 16.0);
        let b = Bindings::from_pairs(&[("omega", 1.0), ("l", 1.0)]);
        assert_eq!(energy_at(get("osc-3d").unwrap(), 3, &b).unwrap(), 6.0);
        for s in Catalog::builtin().iter() {
            let e0 = energy_at(s, 0, &s.default_bindings()).unwrap();
            assert!(e0.abs() < 1e-12, "{}: E0 = {e0}", s.id);
        }
    }

    #[test]
    fn bound_levels() {
        let morse = get("morse").unwrap();
        let b = morse.default_bindings();
        let bound: Vec<bool> = (0..6).map(|n| morse.level_is_bound(n, &b).unwrap()).collect();
        assert_eq!(bound, [true, true, true, true, true, false]);
        let eckart = get("eckart").unwrap();
        // B = 10 > (A + n)^2 only for A + n in {2, 3}
        assert!(eckart.level_is_bound(1, &eckart.default_bindings()).unwrap());
        assert!(!eckart.level_is_bound(2, &eckart.default_bindings()).unwrap());
        let osc = get("osc-3d").unwrap();
        assert!(osc.level_is_bound(50, &osc.default_bindings()).unwrap());
    }

    #[test]
    fn constraint_violation_names_the_inequality() {
        let b = Bindings::from_pairs(&[("A", 2.0), ("B", 1.0)]);
        let err = energy_at(get("gen-poschl-teller").unwrap(), 1, &b).unwrap_err();
        assert!(err.to_string().contains("B > A"), "{err}");
    }

    #[test]
    fn energy_matches_generating_function() {
        for s in Catalog::builtin().iter() {
            for n in 0..=5 {
                let sampler = s.sampler(5).fixed("n", f64::from(n));
                assert!(equiv(&s.energy, &energy_from_g(s), &sampler).unwrap(), "{} n={n}", s.id);
            }
        }
    }

    #[test]
    fn conventional_entries_solve_the_pdes() {
        for id in conventional_ids() {
            let s = get(&id).unwrap();
            let report = validate_conventional(s, &s.sampler(17).samples(100)).unwrap();
            assert!(report.pass, "{report:?}");
        }
    }

    #[test]
    fn harmonic_oscillator_first_order_residual_vanishes() {
        let s = get("harmonic-oscillator").unwrap();
        let report = validate_conventional(s, &s.sampler(3)).unwrap();
        assert_eq!(report.first_order, 0.0);
    }

    #[test]
    fn extended_entries_are_rejected() {
        let s = get("quesne-3d-osc").unwrap();
        assert!(matches!(validate_conventional(s, &s.sampler(1)), Err(CatalogError::NotConventional { .. })));
    }

    #[test]
    fn wrong_structure_fails() {
        let mut s = get("morse").unwrap().clone();
        s.w = parse("A^2 - B*exp(-A*x)").unwrap();
        let report = validate_conventional(&s, &s.sampler(2)).unwrap();
        assert!(!report.pass);
    }
}
