//! Numerical evaluation.
//!
//! Real mode evaluates in `f64` and fails with a domain error wherever a real
//! result does not exist. Complex mode uses principal branches throughout:
//!
//! * `ln z`: imaginary part in (-π, π].
//! * `sqrt z` and `z^w = exp(w ln z)`: derived from the principal `ln`.
//! * `arccos z = -i ln(z + i sqrt(1 - z²))`, the `num-complex` principal value.
//! * `arccoth z = atanh(1/z)`, principal `atanh`.
//!
//! Constant subtrees made only of exact rationals are folded exactly before
//! any conversion to floating point.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{BinOp, Expr, ExprError, Func, Node, Number};

const POLE_EPS: f64 = 1e-300;
/// Largest imaginary part tolerated when a complex binding is used in real mode.
const REAL_IMAG_TOL: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    #[default]
    Real,
    Complex,
}

/// Symbol values plus evaluation mode.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Bindings {
    values: BTreeMap<String, Complex64>,
    mode: EvalMode,
}

impl Bindings {
    pub fn real() -> Bindings {
        Bindings::default()
    }

    pub fn complex() -> Bindings {
        Bindings { values: BTreeMap::new(), mode: EvalMode::Complex }
    }

    pub fn from_pairs(pairs: &[(&str, f64)]) -> Bindings {
        let mut b = Bindings::real();
        for (k, v) in pairs {
            b.set(k, *v);
        }
        b
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    pub fn with_mode(mut self, mode: EvalMode) -> Bindings {
        self.mode = mode;
        self
    }

    pub fn set(&mut self, name: &str, value: f64) -> &mut Self {
        self.values.insert(name.to_string(), Complex64::new(value, 0.0));
        self
    }

    pub fn set_complex(&mut self, name: &str, value: Complex64) -> &mut Self {
        self.values.insert(name.to_string(), value);
        self
    }

    pub fn with(mut self, name: &str, value: f64) -> Bindings {
        self.set(name, value);
        self
    }

    pub fn get(&self, name: &str) -> Option<Complex64> {
        self.values.get(name).copied()
    }

    pub fn get_real(&self, name: &str) -> Option<f64> {
        self.get(name).map(|z| z.re)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn remove(&mut self, name: &str) -> Option<Complex64> {
        self.values.remove(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Complex64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Overlay `other` on top of `self`.
    pub fn merged(&self, other: &Bindings) -> Bindings {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            out.values.insert(k.to_string(), v);
        }
        out
    }

    /// Real parts as `name -> value`, for reports.
    pub fn to_real_map(&self) -> BTreeMap<String, f64> {
        self.values.iter().map(|(k, v)| (k.clone(), v.re)).collect()
    }
}

/// Evaluate under the bindings' mode. Real-mode results have zero imaginary part.
pub fn evaluate(e: &Expr, b: &Bindings) -> Result<Complex64, ExprError> {
    match b.mode {
        EvalMode::Real => evaluate_real(e, b).map(|v| Complex64::new(v, 0.0)),
        EvalMode::Complex => {
            let z = eval_complex(e, b)?;
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(ExprError::NonFinite("evaluation"));
            }
            Ok(z)
        }
    }
}

/// Evaluate in real mode regardless of the bindings' flag.
pub fn evaluate_real(e: &Expr, b: &Bindings) -> Result<f64, ExprError> {
    let v = eval_real(e, b)?;
    if !v.is_finite() {
        return Err(ExprError::NonFinite("evaluation"));
    }
    Ok(v)
}

/// Exact value of a subtree built only from rational literals.
fn exact(e: &Expr) -> Option<Number> {
    match e.node() {
        Node::Const(n @ Number::Rational(_)) => Some(*n),
        Node::Unary(Func::Neg, c) => exact(c).map(|n| -n),
        Node::Binary(op, l, r) => {
            let (a, b) = (exact(l)?, exact(r)?);
            let v = match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a.checked_div(b)?,
                BinOp::Pow => a.powi_exact(b.as_integer()?)?,
            };
            matches!(v, Number::Rational(_)).then_some(v)
        }
        _ => None,
    }
}

fn domain(func: &'static str, detail: impl Into<String>) -> ExprError {
    ExprError::Domain { func, detail: detail.into() }
}

fn recip(v: f64) -> Result<f64, ExprError> {
    if v.abs() <= POLE_EPS {
        Err(ExprError::Pole)
    } else {
        Ok(1.0 / v)
    }
}

fn eval_real(e: &Expr, b: &Bindings) -> Result<f64, ExprError> {
    if let Some(n) = exact(e) {
        return Ok(n.to_f64());
    }
    match e.node() {
        Node::Const(n) => Ok(n.to_f64()),
        Node::Pi => Ok(std::f64::consts::PI),
        Node::ImagUnit => Err(domain("i", "imaginary unit in real mode")),
        Node::Symbol(s) => {
            let z = b.get(s).ok_or_else(|| ExprError::UnboundSymbol(s.to_string()))?;
            if z.im.abs() > REAL_IMAG_TOL {
                return Err(domain("binding", format!("`{s}` is complex in real mode")));
            }
            Ok(z.re)
        }
        Node::Unary(f, c) => {
            let x = eval_real(c, b)?;
            let v = match f {
                Func::Neg => -x,
                Func::Exp => x.exp(),
                Func::Ln => {
                    if x <= 0.0 {
                        return Err(domain("ln", format!("argument {x} <= 0")));
                    }
                    x.ln()
                }
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(domain("sqrt", format!("argument {x} < 0")));
                    }
                    x.sqrt()
                }
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => x.sin() * recip(x.cos())?,
                Func::Sec => recip(x.cos())?,
                Func::Csc => recip(x.sin())?,
                Func::Cot => x.cos() * recip(x.sin())?,
                Func::Sinh => x.sinh(),
                Func::Cosh => x.cosh(),
                Func::Tanh => x.tanh(),
                Func::Sech => recip(x.cosh())?,
                Func::Csch => recip(x.sinh())?,
                Func::Coth => recip(x.tanh())?,
                Func::Arccos => {
                    if x.abs() > 1.0 {
                        return Err(domain("arccos", format!("|{x}| > 1")));
                    }
                    x.acos()
                }
                Func::Arccoth => {
                    if x.abs() <= 1.0 {
                        return Err(domain("arccoth", format!("|{x}| <= 1")));
                    }
                    0.5 * ((x + 1.0) / (x - 1.0)).ln()
                }
            };
            if v.is_finite() {
                Ok(v)
            } else {
                Err(ExprError::NonFinite(f.name()))
            }
        }
        Node::Binary(op, l, r) => {
            let x = eval_real(l, b)?;
            let y = eval_real(r, b)?;
            let v = match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x * recip(y)?,
                BinOp::Pow => real_pow(x, y, r)?,
            };
            if v.is_finite() {
                Ok(v)
            } else {
                Err(ExprError::NonFinite("arithmetic"))
            }
        }
    }
}

fn real_pow(x: f64, y: f64, exponent: &Expr) -> Result<f64, ExprError> {
    let int_exp = exact(exponent)
        .and_then(Number::as_integer)
        .or_else(|| (y.fract() == 0.0 && y.abs() < 1e9).then_some(y as i64));
    if let Some(k) = int_exp {
        if k < 0 && x.abs() <= POLE_EPS {
            return Err(ExprError::Pole);
        }
        if let Ok(k) = i32::try_from(k) {
            return Ok(x.powi(k));
        }
        return Ok(x.powf(y));
    }
    if x < 0.0 {
        return Err(domain("^", format!("negative base {x} with non-integer exponent {y}")));
    }
    if x == 0.0 && y < 0.0 {
        return Err(ExprError::Pole);
    }
    Ok(x.powf(y))
}

fn crecip(z: Complex64) -> Result<Complex64, ExprError> {
    if z.norm() <= POLE_EPS {
        Err(ExprError::Pole)
    } else {
        Ok(z.inv())
    }
}

fn eval_complex(e: &Expr, b: &Bindings) -> Result<Complex64, ExprError> {
    if let Some(n) = exact(e) {
        return Ok(Complex64::new(n.to_f64(), 0.0));
    }
    let one = Complex64::new(1.0, 0.0);
    match e.node() {
        Node::Const(n) => Ok(Complex64::new(n.to_f64(), 0.0)),
        Node::Pi => Ok(Complex64::new(std::f64::consts::PI, 0.0)),
        Node::ImagUnit => Ok(Complex64::i()),
        Node::Symbol(s) => b.get(s).ok_or_else(|| ExprError::UnboundSymbol(s.to_string())),
        Node::Unary(f, c) => {
            let z = eval_complex(c, b)?;
            let v = match f {
                Func::Neg => -z,
                Func::Exp => z.exp(),
                Func::Ln => {
                    if z.norm() == 0.0 {
                        return Err(domain("ln", "argument 0"));
                    }
                    z.ln()
                }
                Func::Sqrt => z.sqrt(),
                Func::Sin => z.sin(),
                Func::Cos => z.cos(),
                Func::Tan => z.sin() * crecip(z.cos())?,
                Func::Sec => crecip(z.cos())?,
                Func::Csc => crecip(z.sin())?,
                Func::Cot => z.cos() * crecip(z.sin())?,
                Func::Sinh => z.sinh(),
                Func::Cosh => z.cosh(),
                Func::Tanh => z.tanh(),
                Func::Sech => crecip(z.cosh())?,
                Func::Csch => crecip(z.sinh())?,
                Func::Coth => crecip(z.tanh())?,
                Func::Arccos => z.acos(),
                Func::Arccoth => {
                    let w = crecip(z)?;
                    if (w - one).norm() == 0.0 || (w + one).norm() == 0.0 {
                        return Err(ExprError::Pole);
                    }
                    w.atanh()
                }
            };
            Ok(v)
        }
        Node::Binary(op, l, r) => {
            let x = eval_complex(l, b)?;
            let y = eval_complex(r, b)?;
            Ok(match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x * crecip(y)?,
                BinOp::Pow => {
                    let int_exp = exact(r)
                        .and_then(Number::as_integer)
                        .or_else(|| (y.im == 0.0 && y.re.fract() == 0.0 && y.re.abs() < 1e9).then_some(y.re as i64));
                    match int_exp.and_then(|k| i32::try_from(k).ok()) {
                        Some(k) => {
                            if k < 0 && x.norm() <= POLE_EPS {
                                return Err(ExprError::Pole);
                            }
                            x.powi(k)
                        }
                        None => {
                            if x.norm() == 0.0 {
                                if y.re > 0.0 {
                                    Complex64::new(0.0, 0.0)
                                } else {
                                    return Err(ExprError::Pole);
                                }
                            } else {
                                (y * x.ln()).exp()
                            }
                        }
                    }
                }
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn ev(text: &str, b: &Bindings) -> Result<f64, ExprError> {
        evaluate_real(&parse(text).unwrap(), b)
    }

    #[test]
    fn elementary_values() {
        let b = Bindings::from_pairs(&[("x", 0.0), ("A", 5.0), ("B", 1.0)]);
        assert_eq!(ev("tanh(x)", &b).unwrap(), 0.0);
        assert_eq!(ev("sech(x)", &b).unwrap(), 1.0);
        assert_eq!(ev("A - B*exp(-x)", &b).unwrap(), 4.0);
    }

    #[test]
    fn errors_not_nan() {
        let b = Bindings::from_pairs(&[("x", -1.0)]);
        assert_eq!(ev("y + 1", &b), Err(ExprError::UnboundSymbol("y".into())));
        assert!(matches!(ev("ln(x)", &b), Err(ExprError::Domain { func: "ln", .. })));
        assert!(matches!(ev("sqrt(x)", &b), Err(ExprError::Domain { .. })));
        assert!(matches!(ev("x^(1/2)", &b), Err(ExprError::Domain { .. })));
        assert_eq!(ev("1/(x + 1)", &b), Err(ExprError::Pole));
        assert_eq!(ev("coth(x + 1)", &b), Err(ExprError::Pole));
        assert_eq!(ev("x^3", &b).unwrap(), -1.0);
    }

    #[test]
    fn exact_rationals_fold_first() {
        let b = Bindings::real();
        // 1/3 + 1/3 + 1/3 is exactly 1 when folded as rationals
        assert_eq!(ev("1/3 + 1/3 + 1/3", &b).unwrap(), 1.0);
        assert_eq!(ev("(1/10)*10", &b).unwrap(), 1.0);
    }

    #[test]
    fn complex_principal_branches() {
        let b = Bindings::complex().with("r", 0.7);
        let z = evaluate(&parse("tanh(r + i*pi/2)").unwrap(), &b).unwrap();
        let coth = 1.0 / 0.7f64.tanh();
        assert!((z.re - coth).abs() < 1e-12 && z.im.abs() < 1e-12);
        let w = evaluate(&parse("ln(-1)").unwrap(), &b).unwrap();
        assert!((w.im - std::f64::consts::PI).abs() < 1e-15);
        let s = evaluate(&parse("sqrt(-4)").unwrap(), &b).unwrap();
        assert!((s - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        assert!(evaluate(&parse("i").unwrap(), &Bindings::real()).is_err());
    }

    #[test]
    fn inverse_functions_agree_between_modes() {
        let b = Bindings::from_pairs(&[("x", 0.3)]);
        let bc = b.clone().with_mode(EvalMode::Complex);
        for text in ["arccos(x)", "arccoth(1/x)"] {
            let e = parse(text).unwrap();
            let r = evaluate_real(&e, &b).unwrap();
            let c = evaluate(&e, &bc).unwrap();
            assert!((c.re - r).abs() < 1e-14 && c.im.abs() < 1e-14, "{text}");
        }
    }
}
