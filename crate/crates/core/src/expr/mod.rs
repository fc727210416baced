//! Restricted computer-algebra core.
//!
//! An [`Expr`] is an immutable tree over symbols, exact rational or float
//! constants, the constants `pi` and `i`, a fixed set of elementary functions
//! and the five binary operators. Trees are reference counted, so cloning is
//! cheap and sharing between threads is safe.
//!
//! Semantic equality is not decided symbolically. Simplification is shallow
//! (constant folding, 0/1 absorption, flattening of sums and products) and
//! equality of two expressions is tested by sampling, see [`equiv`].

mod diff;
mod equiv;
mod eval;
mod number;
mod parse;
mod print;
mod simplify;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops;
use std::sync::Arc;

use thiserror::Error;

pub use equiv::{equiv, max_deviation, sample_max, DomainSampler, Inequality, Relation, SampleStats};
pub use eval::{evaluate, evaluate_real, Bindings, EvalMode};
pub use number::Number;
pub use parse::parse;

/// Errors raised while parsing or evaluating expressions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },
    #[error("pole: division by (near) zero")]
    Pole,
    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),
    #[error("sampler exhausted: {valid} valid samples of {wanted} after {attempts} attempts")]
    SamplerExhausted { valid: usize, wanted: usize, attempts: usize },
}

impl ExprError {
    /// True for errors that a sampler should treat as "this point is
    /// unusable" (poles, branch/domain failures) rather than a hard failure.
    pub fn is_point_failure(&self) -> bool {
        matches!(self, ExprError::Domain { .. } | ExprError::Pole | ExprError::NonFinite(_))
    }
}

/// Unary functions. `Neg` is arithmetic negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Tan,
    Sec,
    Csc,
    Cot,
    Sinh,
    Cosh,
    Tanh,
    Sech,
    Csch,
    Coth,
    Arccos,
    Arccoth,
    Neg,
}

impl Func {
    pub(crate) const NAMED: [Func; 17] = [
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sec,
        Func::Csc,
        Func::Cot,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Sech,
        Func::Csch,
        Func::Coth,
        Func::Arccos,
        Func::Arccoth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sec => "sec",
            Func::Csc => "csc",
            Func::Cot => "cot",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sech => "sech",
            Func::Csch => "csch",
            Func::Coth => "coth",
            Func::Arccos => "arccos",
            Func::Arccoth => "arccoth",
            Func::Neg => "neg",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "cosec" => return Some(Func::Csc),
            "cosech" => return Some(Func::Csch),
            _ => {}
        }
        Func::NAMED.iter().copied().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(Number),
    /// The constant π (`pi`).
    Pi,
    /// The imaginary unit (`i`); only evaluable in complex mode.
    ImagUnit,
    Symbol(Arc<str>),
    Unary(Func, Expr),
    Binary(BinOp, Expr, Expr),
}

/// Immutable expression tree. Equality is structural.
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn from_node(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn int(v: i64) -> Expr {
        Expr::constant(Number::int(v))
    }

    pub fn rational(num: i64, den: i64) -> Expr {
        Expr::constant(Number::rational(num, den))
    }

    pub fn float(v: f64) -> Expr {
        Expr::constant(Number::Float(v))
    }

    pub fn constant(n: Number) -> Expr {
        Expr::from_node(Node::Const(n))
    }

    pub fn pi() -> Expr {
        Expr::from_node(Node::Pi)
    }

    pub fn imag_unit() -> Expr {
        Expr::from_node(Node::ImagUnit)
    }

    pub fn sym(name: &str) -> Expr {
        Expr::from_node(Node::Symbol(Arc::from(name)))
    }

    /// Raw unary node, no simplification.
    pub fn unary_raw(f: Func, child: Expr) -> Expr {
        Expr::from_node(Node::Unary(f, child))
    }

    /// Raw binary node, no simplification.
    pub fn binary_raw(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::from_node(Node::Binary(op, lhs, rhs))
    }

    pub fn as_number(&self) -> Option<Number> {
        match self.node() {
            Node::Const(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_number().is_some_and(|n| n.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_number().is_some_and(|n| n.is_one())
    }

    /// Names of every symbol in the tree (excluding the constants `pi`, `i`).
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Symbol(s) => {
                out.insert(s.to_string());
            }
            Node::Unary(_, c) => c.collect_symbols(out),
            Node::Binary(_, l, r) => {
                l.collect_symbols(out);
                r.collect_symbols(out);
            }
            Node::Const(_) | Node::Pi | Node::ImagUnit => {}
        }
    }

    pub fn depends_on(&self, name: &str) -> bool {
        match self.node() {
            Node::Symbol(s) => &**s == name,
            Node::Unary(_, c) => c.depends_on(name),
            Node::Binary(_, l, r) => l.depends_on(name) || r.depends_on(name),
            Node::Const(_) | Node::Pi | Node::ImagUnit => false,
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Unary(_, c) => 1 + c.size(),
            Node::Binary(_, l, r) => 1 + l.size() + r.size(),
            _ => 1,
        }
    }

    /// Simultaneous substitution of symbols by expressions. Replacements are
    /// not themselves rewritten, so `x -> f(x)` is well defined.
    pub fn substitute_all(&self, map: &BTreeMap<String, Expr>) -> Expr {
        if map.is_empty() {
            return self.clone();
        }
        match self.node() {
            Node::Symbol(s) => match map.get(&**s) {
                Some(e) => e.clone(),
                None => self.clone(),
            },
            Node::Unary(f, c) => Expr::apply(*f, c.substitute_all(map)),
            Node::Binary(op, l, r) => Expr::binary(*op, l.substitute_all(map), r.substitute_all(map)),
            Node::Const(_) | Node::Pi | Node::ImagUnit => self.clone(),
        }
    }

    pub fn substitute(&self, name: &str, replacement: &Expr) -> Expr {
        let mut map = BTreeMap::new();
        map.insert(name.to_string(), replacement.clone());
        self.substitute_all(&map)
    }

    /// Substitute numeric values for symbols (as float constants).
    pub fn substitute_values(&self, values: &[(&str, f64)]) -> Expr {
        let map = values.iter().map(|(k, v)| (k.to_string(), Expr::float(*v))).collect();
        self.substitute_all(&map)
    }

    pub fn differentiate(&self, var: &str) -> Expr {
        diff::differentiate(self, var)
    }

    /// Repeated derivative with respect to `var`.
    pub fn nth_derivative(&self, var: &str, order: usize) -> Expr {
        let mut e = self.clone();
        for _ in 0..order {
            if e.is_zero() {
                break;
            }
            e = e.differentiate(var);
        }
        e
    }

    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }

    pub fn pow(&self, exponent: impl Into<Expr>) -> Expr {
        Expr::binary(BinOp::Pow, self.clone(), exponent.into())
    }

    pub fn exp(&self) -> Expr {
        Expr::apply(Func::Exp, self.clone())
    }

    pub fn ln(&self) -> Expr {
        Expr::apply(Func::Ln, self.clone())
    }

    pub fn sqrt(&self) -> Expr {
        Expr::apply(Func::Sqrt, self.clone())
    }

    pub fn tanh(&self) -> Expr {
        Expr::apply(Func::Tanh, self.clone())
    }

    pub fn sech(&self) -> Expr {
        Expr::apply(Func::Sech, self.clone())
    }

    /// Unary node with local simplification.
    pub fn apply(f: Func, child: Expr) -> Expr {
        simplify::unary(f, child)
    }

    /// Binary node with local simplification.
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        simplify::binary(op, lhs, rhs)
    }
}

impl From<i64> for Expr {
    fn from(v: i64) -> Expr {
        Expr::int(v)
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Expr {
        Expr::float(v)
    }
}

impl From<&Expr> for Expr {
    fn from(e: &Expr) -> Expr {
        e.clone()
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $op:expr) => {
        impl<R: Into<Expr>> ops::$trait<R> for Expr {
            type Output = Expr;
            fn $method(self, rhs: R) -> Expr {
                Expr::binary($op, self, rhs.into())
            }
        }
        impl<R: Into<Expr>> ops::$trait<R> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: R) -> Expr {
                Expr::binary($op, self.clone(), rhs.into())
            }
        }
    };
}

impl_binop!(Add, add, BinOp::Add);
impl_binop!(Sub, sub, BinOp::Sub);
impl_binop!(Mul, mul, BinOp::Mul);
impl_binop!(Div, div, BinOp::Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::apply(Func::Neg, self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::apply(Func::Neg, self.clone())
    }
}

impl std::str::FromStr for Expr {
    type Err = ExprError;
    fn from_str(s: &str) -> Result<Expr, ExprError> {
        parse(s)
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Expr, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}
