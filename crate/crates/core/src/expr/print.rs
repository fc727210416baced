//! Canonical printer. Output re-parses to the same tree.

use std::fmt;

use super::{BinOp, Expr, Func, Node, Number};

const UNARY: u8 = 3;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        Node::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        Node::Unary(Func::Neg, _) => UNARY,
        Node::Const(n) if n.is_negative() => UNARY,
        Node::Binary(BinOp::Pow, ..) => 4,
        _ => ATOM,
    }
}

/// Would `left` followed by `/digit` lex as a ratio literal?
fn ends_in_ratio_numerator(left: &str) -> bool {
    let head = left.trim_end_matches(|c: char| c.is_ascii_digit());
    if head.len() == left.len() {
        return false;
    }
    match head.chars().last() {
        None => true,
        Some(c) if c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '^' => false,
        Some('-') => !head[..head.len() - 1].ends_with('^'),
        Some(_) => true,
    }
}

fn is_fraction_literal(e: &Expr) -> bool {
    e.as_number().is_some_and(|n| matches!(n, Number::Rational(r) if !r.is_integer()))
}

fn wrapped(e: &Expr, wrap: bool) -> String {
    if wrap {
        format!("({e})")
    } else {
        e.to_string()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(n) => write!(f, "{n}"),
            Node::Pi => f.write_str("pi"),
            Node::ImagUnit => f.write_str("i"),
            Node::Symbol(s) => f.write_str(s),
            Node::Unary(Func::Neg, c) => {
                // a bare literal after '-' would be folded into a negative constant
                let wrap = precedence(c) < UNARY || matches!(c.node(), Node::Const(_));
                write!(f, "-{}", wrapped(c, wrap))
            }
            Node::Unary(func, c) => write!(f, "{}({c})", func.name()),
            Node::Binary(op, l, r) => {
                let (lp, rp) = (precedence(l), precedence(r));
                match op {
                    BinOp::Add | BinOp::Sub => {
                        write!(f, "{} {} {}", wrapped(l, lp < 1), op.symbol(), wrapped(r, rp <= 1))
                    }
                    BinOp::Mul => write!(f, "{}*{}", wrapped(l, lp < 2), wrapped(r, rp <= 2)),
                    BinOp::Div => {
                        let mut left = wrapped(l, lp < 2);
                        let right = wrapped(r, rp <= 2);
                        // "2/3" would lex as a ratio literal
                        if ends_in_ratio_numerator(&left) && right.starts_with(|c: char| c.is_ascii_digit()) {
                            left = format!("({left})");
                        }
                        write!(f, "{left}/{right}")
                    }
                    BinOp::Pow => {
                        let wrap_r = rp < UNARY || is_fraction_literal(r);
                        write!(f, "{}^{}", wrapped(l, lp < ATOM), wrapped(r, wrap_r))
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    #[test]
    fn canonical_text_is_stable() {
        for text in [
            "A*tanh(x) + B*sech(x)",
            "1/2*omega*x - l/r",
            "-x^2",
            "(-x)^2",
            "(-2)^x",
            "-2^x",
            "x^-y",
            "--x",
            "(1)/2",
            "x^-1/2",
            "x^(-1/2)",
            "x^(1/2)",
            "(1/2)/3",
            "(x/2)/3",
            "x/2*3",
            "e2/4",
            "a - (b + c)",
            "a - -3",
            "-(3)",
            "e2^2/4*(1/l^2 - 1/(l + n*hbar)^2)",
            "2.0*x + 1e-10",
            "arccos(csc(x))",
        ] {
            let e = parse(text).unwrap();
            assert_eq!(e.to_string(), text);
            assert_eq!(parse(&e.to_string()).unwrap(), e);
        }
    }

    #[test]
    fn normalizes_spacing() {
        assert_eq!(parse("a+b*c").unwrap().to_string(), "a + b*c");
        assert_eq!(parse("(a*b)*c").unwrap().to_string(), "a*b*c");
        assert_eq!(parse("a*(b*c)").unwrap().to_string(), "a*(b*c)");
    }
}
