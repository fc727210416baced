//! Probabilistic equivalence testing.
//!
//! Two expressions are declared equivalent when they agree to
//! `atol + rtol * max(|e1|, |e2|)` at every point drawn by a seeded
//! [`DomainSampler`]. This is a randomized identity test: a `true` answer is
//! evidence, not proof.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{evaluate, parse, Bindings, EvalMode, Expr, ExprError};

pub const EQUIV_ATOL: f64 = 1e-10;
pub const EQUIV_RTOL: f64 = 1e-9;
pub const MIN_SAMPLES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Less,
    LessEq,
    Greater,
    GreaterEq,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Less => "<",
            Relation::LessEq => "<=",
            Relation::Greater => ">",
            Relation::GreaterEq => ">=",
        }
    }
}

/// A parameter constraint such as `B < A^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Inequality {
    pub lhs: Expr,
    pub rel: Relation,
    pub rhs: Expr,
}

impl Inequality {
    pub fn parse(text: &str) -> Result<Inequality, ExprError> {
        let pos = text
            .find(['<', '>'])
            .ok_or_else(|| ExprError::Syntax { offset: 0, message: format!("no `<` or `>` in constraint `{text}`") })?;
        let bytes = text.as_bytes();
        let eq = bytes.get(pos + 1) == Some(&b'=');
        let rel = match (bytes[pos], eq) {
            (b'<', false) => Relation::Less,
            (b'<', true) => Relation::LessEq,
            (b'>', false) => Relation::Greater,
            _ => Relation::GreaterEq,
        };
        let rhs_start = pos + 1 + usize::from(eq);
        let shift = |e: ExprError, by: usize| match e {
            ExprError::Syntax { offset, message } => ExprError::Syntax { offset: offset + by, message },
            ExprError::UnknownFunction { name, offset } => ExprError::UnknownFunction { name, offset: offset + by },
            other => other,
        };
        let lhs = parse(&text[..pos])?;
        let rhs = parse(&text[rhs_start..]).map_err(|e| shift(e, rhs_start))?;
        Ok(Inequality { lhs, rel, rhs })
    }

    pub fn holds(&self, b: &Bindings) -> Result<bool, ExprError> {
        let l = super::evaluate_real(&self.lhs, b)?;
        let r = super::evaluate_real(&self.rhs, b)?;
        Ok(match self.rel {
            Relation::Less => l < r,
            Relation::LessEq => l <= r,
            Relation::Greater => l > r,
            Relation::GreaterEq => l >= r,
        })
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.rel.symbol(), self.rhs)
    }
}

impl serde::Serialize for Inequality {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Inequality {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Inequality, D::Error> {
        let text = String::deserialize(d)?;
        Inequality::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Seeded source of random bindings.
///
/// Each named range is drawn uniformly; fixed bindings are overlaid; draws
/// violating any constraint are rejected. Every iteration restarts from the
/// seed, so the same sampler always yields the same sequence.
#[derive(Debug, Clone)]
pub struct DomainSampler {
    seed: u64,
    ranges: Vec<(String, f64, f64)>,
    fixed: Bindings,
    constraints: Vec<Inequality>,
    samples: usize,
    max_attempts: Option<usize>,
}

impl DomainSampler {
    pub fn new(seed: u64) -> DomainSampler {
        DomainSampler {
            seed,
            ranges: Vec::new(),
            fixed: Bindings::real(),
            constraints: Vec::new(),
            samples: MIN_SAMPLES,
            max_attempts: None,
        }
    }

    pub fn range(mut self, name: &str, lo: f64, hi: f64) -> DomainSampler {
        self.ranges.retain(|(n, ..)| n != name);
        self.ranges.push((name.to_string(), lo, hi));
        self
    }

    /// Bind `name` to a fixed value (removing any random range for it).
    pub fn fixed(mut self, name: &str, value: f64) -> DomainSampler {
        self.ranges.retain(|(n, ..)| n != name);
        self.fixed.set(name, value);
        self
    }

    pub fn with_bindings(mut self, b: &Bindings) -> DomainSampler {
        for (k, _) in b.iter() {
            self.ranges.retain(|(n, ..)| n != k);
        }
        let mode = if b.mode() == EvalMode::Complex { EvalMode::Complex } else { self.fixed.mode() };
        self.fixed = self.fixed.merged(b).with_mode(mode);
        self
    }

    pub fn mode(mut self, mode: EvalMode) -> DomainSampler {
        self.fixed = self.fixed.with_mode(mode);
        self
    }

    pub fn constraint(mut self, c: Inequality) -> DomainSampler {
        self.constraints.push(c);
        self
    }

    pub fn constraints(mut self, cs: &[Inequality]) -> DomainSampler {
        self.constraints.extend(cs.iter().cloned());
        self
    }

    pub fn samples(mut self, n: usize) -> DomainSampler {
        self.samples = n;
        self
    }

    pub fn max_attempts(mut self, n: usize) -> DomainSampler {
        self.max_attempts = Some(n);
        self
    }

    pub fn sample_count(&self) -> usize {
        self.samples
    }

    pub fn attempt_cap(&self) -> usize {
        self.max_attempts.unwrap_or(50 * self.samples.max(1))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Random draws (constraint rejection included), at most the attempt cap.
    pub fn draws(&self) -> impl Iterator<Item = Bindings> + '_ {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.attempt_cap()).filter_map(move |_| {
            let mut b = self.fixed.clone();
            for (name, lo, hi) in &self.ranges {
                let v = if hi > lo { rng.random_range(*lo..*hi) } else { *lo };
                b.set(name, v);
            }
            let ok = self.constraints.iter().all(|c| c.holds(&b).unwrap_or(false));
            ok.then_some(b)
        })
    }
}

/// Outcome of evaluating a scalar over sampled points.
#[derive(Debug, Clone)]
pub struct SampleStats {
    pub max: f64,
    pub valid: usize,
    pub attempts: usize,
    pub worst: Option<Bindings>,
}

/// Evaluate `f` at sampled points until `sampler.sample_count()` succeed and
/// return the largest value. Pole/domain failures skip the point; any other
/// error propagates.
pub fn sample_max<F>(sampler: &DomainSampler, mut f: F) -> Result<SampleStats, ExprError>
where
    F: FnMut(&Bindings) -> Result<f64, ExprError>,
{
    let wanted = sampler.sample_count();
    let mut stats = SampleStats { max: 0.0, valid: 0, attempts: 0, worst: None };
    let mut draws = sampler.draws();
    while stats.valid < wanted {
        let Some(b) = draws.next() else { break };
        stats.attempts += 1;
        match f(&b) {
            Ok(v) => {
                stats.valid += 1;
                if v > stats.max || stats.worst.is_none() {
                    stats.max = stats.max.max(v);
                    stats.worst = Some(b);
                }
            }
            Err(e) if e.is_point_failure() => {}
            Err(e) => return Err(e),
        }
    }
    if stats.valid < wanted {
        return Err(ExprError::SamplerExhausted { valid: stats.valid, wanted, attempts: sampler.attempt_cap() });
    }
    Ok(stats)
}

/// Largest |e1 - e2| over the sampled points.
pub fn max_deviation(e1: &Expr, e2: &Expr, sampler: &DomainSampler) -> Result<f64, ExprError> {
    sample_max(sampler, |b| Ok((evaluate(e1, b)? - evaluate(e2, b)?).norm())).map(|s| s.max)
}

/// Randomized equivalence with `atol = 1e-10`, `rtol = 1e-9`.
pub fn equiv(e1: &Expr, e2: &Expr, sampler: &DomainSampler) -> Result<bool, ExprError> {
    let stats = sample_max(sampler, |b| {
        let (v1, v2) = (evaluate(e1, b)?, evaluate(e2, b)?);
        let scale = EQUIV_ATOL + EQUIV_RTOL * v1.norm().max(v2.norm());
        Ok((v1 - v2).norm() / scale)
    })?;
    Ok(stats.max <= 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampler() -> DomainSampler {
        DomainSampler::new(11).range("x", -5.0, 5.0)
    }

    #[test]
    fn identities() {
        let lhs = parse("tanh(x)^2 + sech(x)^2").unwrap();
        assert!(equiv(&lhs, &Expr::int(1), &sampler()).unwrap());
        assert!(!equiv(&parse("tanh(x)").unwrap(), &parse("x").unwrap(), &sampler()).unwrap());
    }

    #[test]
    fn exhausted_when_every_point_is_a_pole() {
        let e = parse("1/(x - x)").unwrap();
        let err = equiv(&e, &e, &sampler()).unwrap_err();
        assert!(matches!(err, ExprError::SamplerExhausted { valid: 0, .. }));
    }

    #[test]
    fn unbound_symbols_propagate() {
        let e = parse("x + y").unwrap();
        assert_eq!(equiv(&e, &e, &sampler()), Err(ExprError::UnboundSymbol("y".into())));
    }

    #[test]
    fn constraint_rejection() {
        let s = DomainSampler::new(1)
            .range("A", 0.0, 3.0)
            .range("B", 0.0, 3.0)
            .constraint(Inequality::parse("B > A").unwrap());
        assert!(s.draws().take(50).all(|b| b.get_real("B").unwrap() > b.get_real("A").unwrap()));
    }

    #[test]
    fn draws_are_deterministic() {
        let a: Vec<_> = sampler().draws().take(5).collect();
        let b: Vec<_> = sampler().draws().take(5).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn inequality_parsing() {
        let c = Inequality::parse("B<A^2").unwrap();
        assert_eq!(c.to_string(), "B < A^2");
        let b = Bindings::from_pairs(&[("A", 2.0), ("B", 3.0)]);
        assert!(c.holds(&b).unwrap());
        assert!(Inequality::parse("A>=0").unwrap().holds(&b).unwrap());
        assert!(Inequality::parse("A").is_err());
    }
}
