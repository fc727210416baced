//! Shallow simplification: constant folding, 0/1 absorption and flattening of
//! sum and product chains so their constants combine.

use super::{BinOp, Expr, Func, Node, Number};

pub(super) fn unary(f: Func, child: Expr) -> Expr {
    if f == Func::Neg {
        if let Some(n) = child.as_number() {
            return Expr::constant(-n);
        }
        if let Node::Unary(Func::Neg, inner) = child.node() {
            return inner.clone();
        }
    }
    Expr::unary_raw(f, child)
}

pub(super) fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
    let (ln, rn) = (l.as_number(), r.as_number());
    match op {
        BinOp::Add => {
            if let (Some(a), Some(b)) = (ln, rn) {
                return Expr::constant(a + b);
            }
            if l.is_zero() {
                return r;
            }
            if r.is_zero() {
                return l;
            }
        }
        BinOp::Sub => {
            if let (Some(a), Some(b)) = (ln, rn) {
                return Expr::constant(a - b);
            }
            if r.is_zero() {
                return l;
            }
            if l.is_zero() {
                return unary(Func::Neg, r);
            }
            if l == r {
                return Expr::int(0);
            }
        }
        BinOp::Mul => {
            if let (Some(a), Some(b)) = (ln, rn) {
                return Expr::constant(a * b);
            }
            if l.is_zero() || r.is_zero() {
                return Expr::int(0);
            }
            if l.is_one() {
                return r;
            }
            if r.is_one() {
                return l;
            }
            if ln.is_some_and(|n| (-n).is_one()) {
                return unary(Func::Neg, r);
            }
            if rn.is_some_and(|n| (-n).is_one()) {
                return unary(Func::Neg, l);
            }
        }
        BinOp::Div => {
            if let (Some(a), Some(b)) = (ln, rn) {
                if let Some(q) = a.checked_div(b) {
                    return Expr::constant(q);
                }
            }
            let r_nonzero = !rn.is_some_and(|n| n.is_zero());
            if l.is_zero() && r_nonzero {
                return Expr::int(0);
            }
            if r.is_one() {
                return l;
            }
            if rn.is_some_and(|n| (-n).is_one()) {
                return unary(Func::Neg, l);
            }
        }
        BinOp::Pow => {
            if r.is_zero() {
                return Expr::int(1);
            }
            if r.is_one() || l.is_one() {
                return l;
            }
            if let (Some(base), Some(exp)) = (ln, rn) {
                if let Some(k) = exp.as_integer() {
                    if let Some(v) = base.powi_exact(k) {
                        return Expr::constant(v);
                    }
                    if let Number::Float(b) = base {
                        if let Ok(k32) = i32::try_from(k) {
                            return Expr::float(b.powi(k32));
                        }
                    }
                }
            }
        }
    }
    Expr::binary_raw(op, l, r)
}

pub(super) fn simplify(e: &Expr) -> Expr {
    match e.node() {
        Node::Unary(f, c) => unary(*f, simplify(c)),
        Node::Binary(op, l, r) => {
            let built = binary(*op, simplify(l), simplify(r));
            match built.node() {
                Node::Binary(BinOp::Add | BinOp::Sub, ..) => flatten_sum(&built),
                Node::Binary(BinOp::Mul | BinOp::Div, ..) => flatten_product(&built),
                _ => built,
            }
        }
        _ => e.clone(),
    }
}

fn collect_sum(e: &Expr, positive: bool, terms: &mut Vec<(bool, Expr)>, acc: &mut Number) {
    match e.node() {
        Node::Binary(BinOp::Add, l, r) => {
            collect_sum(l, positive, terms, acc);
            collect_sum(r, positive, terms, acc);
        }
        Node::Binary(BinOp::Sub, l, r) => {
            collect_sum(l, positive, terms, acc);
            collect_sum(r, !positive, terms, acc);
        }
        Node::Unary(Func::Neg, c) => collect_sum(c, !positive, terms, acc),
        Node::Const(n) => *acc = if positive { *acc + *n } else { *acc - *n },
        _ => terms.push((positive, e.clone())),
    }
}

fn flatten_sum(e: &Expr) -> Expr {
    let mut terms = Vec::new();
    let mut acc = Number::int(0);
    collect_sum(e, true, &mut terms, &mut acc);
    let mut out: Option<Expr> = None;
    for (positive, t) in terms {
        out = Some(match (out, positive) {
            (None, true) => t,
            (None, false) => unary(Func::Neg, t),
            (Some(s), true) => binary(BinOp::Add, s, t),
            (Some(s), false) => binary(BinOp::Sub, s, t),
        });
    }
    match out {
        None => Expr::constant(acc),
        Some(s) if acc.is_zero() => s,
        Some(s) if acc.is_negative() => binary(BinOp::Sub, s, Expr::constant(-acc)),
        Some(s) => binary(BinOp::Add, s, Expr::constant(acc)),
    }
}

struct Product {
    coef: Number,
    num: Vec<Expr>,
    den: Vec<Expr>,
    degenerate: bool,
}

fn collect_product(e: &Expr, upper: bool, p: &mut Product) {
    match e.node() {
        Node::Binary(BinOp::Mul, l, r) => {
            collect_product(l, upper, p);
            collect_product(r, upper, p);
        }
        Node::Binary(BinOp::Div, l, r) => {
            collect_product(l, upper, p);
            collect_product(r, !upper, p);
        }
        Node::Unary(Func::Neg, c) => {
            p.coef = -p.coef;
            collect_product(c, upper, p);
        }
        Node::Const(n) => {
            if upper {
                p.coef = p.coef * *n;
            } else {
                match p.coef.checked_div(*n) {
                    Some(q) => p.coef = q,
                    None => p.degenerate = true,
                }
            }
        }
        _ => {
            if upper {
                p.num.push(e.clone());
            } else {
                p.den.push(e.clone());
            }
        }
    }
}

fn flatten_product(e: &Expr) -> Expr {
    let mut p = Product { coef: Number::int(1), num: Vec::new(), den: Vec::new(), degenerate: false };
    collect_product(e, true, &mut p);
    if p.degenerate {
        return e.clone();
    }
    if p.coef.is_zero() && p.den.is_empty() {
        return Expr::constant(p.coef);
    }
    let chain = |xs: Vec<Expr>| xs.into_iter().reduce(|a, b| binary(BinOp::Mul, a, b));
    let numer = chain(p.num);
    let denom = chain(p.den);
    let mut out = match numer {
        Some(n) => binary(BinOp::Mul, Expr::constant(p.coef), n),
        None => Expr::constant(p.coef),
    };
    if let Some(d) = denom {
        out = binary(BinOp::Div, out, d);
    }
    out
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    fn s(text: &str) -> String {
        parse(text).unwrap().simplify().to_string()
    }

    #[test]
    fn absorbs_identities() {
        assert_eq!(s("0 + x*1"), "x");
        assert_eq!(s("x^1 - 0"), "x");
        assert_eq!(s("0*tanh(x) + y"), "y");
        assert_eq!(s("x^0"), "1");
        assert_eq!(s("--x"), "x");
    }

    #[test]
    fn folds_constants_through_chains() {
        assert_eq!(s("2*x*3"), "6*x");
        assert_eq!(s("1/2*x*4"), "2*x");
        assert_eq!(s("1 + x + 2"), "x + 3");
        assert_eq!(s("x - 1 - 1"), "x - 2");
        assert_eq!(s("2*x/4"), "1/2*x");
        assert_eq!(s("(2/3)^2"), "4/9");
    }

    #[test]
    fn keeps_division_by_literal_zero() {
        assert_eq!(s("x/0"), "x/0");
    }
}
