//! Recursive-descent parser.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := base ('^' unary)?
//! base  := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Unary minus binds looser than `^`, so `-a^2` is `-(a^2)`. Integers and
//! `p/q` ratios (no whitespace) are exact rationals; decimals and exponent
//! forms are floats. A `-` directly in front of a number literal that is not
//! itself raised to a power is folded into the literal. Directly after `^` no
//! ratio is formed, so `x^2/4` is `(x^2)/4`. `pi` and `i` are reserved
//! constants.

use super::{BinOp, Expr, ExprError, Func, Number};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Number),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    /// Set right after `^` or `^-`: an exponent never starts a ratio literal.
    in_exponent: bool,
}

impl<'a> Lexer<'a> {
    fn tokens(text: &'a str) -> Result<Vec<(usize, Tok)>, ExprError> {
        let mut lx = Lexer { src: text.as_bytes(), pos: 0, in_exponent: false };
        let mut out: Vec<(usize, Tok)> = Vec::new();
        while let Some(t) = lx.next_token()? {
            lx.in_exponent = match &t.1 {
                Tok::Op('^') => true,
                Tok::Op('-') => matches!(out.last(), Some((_, Tok::Op('^')))),
                _ => false,
            };
            out.push(t);
        }
        Ok(out)
    }

    fn peek_at(&self, i: usize) -> Option<u8> {
        self.src.get(i).copied()
    }

    fn digits(&mut self) {
        while self.peek_at(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
    }

    fn next_token(&mut self) -> Result<Option<(usize, Tok)>, ExprError> {
        while self.peek_at(self.pos).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(c) = self.peek_at(start) else {
            return Ok(None);
        };
        let tok = match c {
            b'0'..=b'9' => self.number(start)?,
            b'a'..=b'z' | b'A'..=b'Z' => {
                while self.peek_at(self.pos).is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                Tok::Ident(text.to_string())
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Tok::Op(c as char)
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            _ => {
                return Err(ExprError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{}`", c as char),
                })
            }
        };
        Ok(Some((start, tok)))
    }

    fn number(&mut self, start: usize) -> Result<Tok, ExprError> {
        self.digits();
        let mut is_float = false;
        if self.peek_at(self.pos) == Some(b'.') && self.peek_at(self.pos + 1).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
            self.digits();
            is_float = true;
        }
        if matches!(self.peek_at(self.pos), Some(b'e' | b'E')) {
            let sign = matches!(self.peek_at(self.pos + 1), Some(b'+' | b'-'));
            let first = self.pos + 1 + usize::from(sign);
            if self.peek_at(first).is_some_and(|c| c.is_ascii_digit()) {
                self.pos = first;
                self.digits();
                is_float = true;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if is_float {
            let v: f64 = text
                .parse()
                .map_err(|_| ExprError::Syntax { offset: start, message: format!("malformed number `{text}`") })?;
            return Ok(Tok::Num(Number::Float(v)));
        }
        let int = |s: &str, at: usize| {
            s.parse::<i64>()
                .map_err(|_| ExprError::Syntax { offset: at, message: format!("integer literal `{s}` out of range") })
        };
        let numer = int(text, start)?;
        if !self.in_exponent
            && self.peek_at(self.pos) == Some(b'/')
            && self.peek_at(self.pos + 1).is_some_and(|c| c.is_ascii_digit())
        {
            let den_start = self.pos + 1;
            self.pos = den_start;
            self.digits();
            let den_text = std::str::from_utf8(&self.src[den_start..self.pos]).expect("ascii");
            let denom = int(den_text, den_start)?;
            if denom == 0 {
                return Err(ExprError::Syntax {
                    offset: den_start,
                    message: "zero denominator in ratio literal".into(),
                });
            }
            return Ok(Tok::Num(Number::rational(numer, denom)));
        }
        Ok(Tok::Num(Number::int(numer)))
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |(o, _)| *o)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax { offset: self.offset(), message: message.into() })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(_, t)| t.clone());
        self.idx += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary_raw(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary_raw(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.bump();
            if let Some(Tok::Num(n)) = self.peek() {
                let next_is_pow = matches!(self.toks.get(self.idx + 1), Some((_, Tok::Op('^'))));
                if !next_is_pow {
                    let n = -*n;
                    self.bump();
                    return Ok(Expr::constant(n));
                }
            }
            let child = self.unary()?;
            return Ok(Expr::unary_raw(Func::Neg, child));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.base()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::binary_raw(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ExprError> {
        let at = self.offset();
        match self.bump() {
            None => {
                self.idx -= 1;
                self.error("unexpected end of input")
            }
            Some(Tok::Num(n)) => Ok(Expr::constant(n)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => {
                        self.idx -= 1;
                        self.error("expected `)`")
                    }
                }
            }
            Some(Tok::Ident(name)) => {
                let is_call = self.peek() == Some(&Tok::LParen);
                match (Func::from_name(&name), is_call) {
                    (Some(f), true) => {
                        self.bump();
                        let arg = self.expr()?;
                        match self.bump() {
                            Some(Tok::RParen) => Ok(Expr::unary_raw(f, arg)),
                            _ => {
                                self.idx -= 1;
                                self.error("expected `)`")
                            }
                        }
                    }
                    (Some(_), false) => Err(ExprError::Syntax {
                        offset: at,
                        message: format!("function `{name}` used without an argument"),
                    }),
                    (None, true) => Err(ExprError::UnknownFunction { name, offset: at }),
                    (None, false) => Ok(match name.as_str() {
                        "pi" => Expr::pi(),
                        "i" => Expr::imag_unit(),
                        _ => Expr::sym(&name),
                    }),
                }
            }
            Some(t) => {
                self.idx -= 1;
                self.error(format!("unexpected token {t:?}"))
            }
        }
    }
}

/// Parse an expression.
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, idx: 0, end: text.len() };
    let e = p.expr()?;
    if p.idx < p.toks.len() {
        return p.error("unexpected trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Node;

    fn bin(e: &Expr) -> (BinOp, Expr, Expr) {
        match e.node() {
            Node::Binary(op, l, r) => (*op, l.clone(), r.clone()),
            other => panic!("not binary: {other:?}"),
        }
    }

    #[test]
    fn sum_of_products() {
        let e = parse("A*tanh(x)+B*sech(x)").unwrap();
        let (op, l, r) = bin(&e);
        assert_eq!(op, BinOp::Add);
        assert_eq!(l, Expr::binary_raw(BinOp::Mul, Expr::sym("A"), Expr::unary_raw(Func::Tanh, Expr::sym("x"))));
        assert_eq!(r, Expr::binary_raw(BinOp::Mul, Expr::sym("B"), Expr::unary_raw(Func::Sech, Expr::sym("x"))));
    }

    #[test]
    fn left_associative_products() {
        let e = parse("1/2*omega*x").unwrap();
        let expected = Expr::binary_raw(
            BinOp::Mul,
            Expr::binary_raw(BinOp::Mul, Expr::rational(1, 2), Expr::sym("omega")),
            Expr::sym("x"),
        );
        assert_eq!(e, expected);
        // with spaces the slash is a division
        let d = parse("1 / 2").unwrap();
        assert_eq!(d, Expr::binary_raw(BinOp::Div, Expr::int(1), Expr::int(2)));
    }

    #[test]
    fn unbalanced_paren_reports_offset() {
        assert_eq!(
            parse("tanh(").unwrap_err(),
            ExprError::Syntax { offset: 5, message: "unexpected end of input".into() }
        );
        assert!(matches!(parse("(x + 1"), Err(ExprError::Syntax { offset: 6, .. })));
    }

    #[test]
    fn unknown_function() {
        assert_eq!(parse("2*foo(x)").unwrap_err(), ExprError::UnknownFunction { name: "foo".into(), offset: 2 });
    }

    #[test]
    fn power_is_right_associative_and_binds_tighter_than_minus() {
        let e = parse("x^2^3").unwrap();
        let (op, _, r) = bin(&e);
        assert_eq!(op, BinOp::Pow);
        assert_eq!(bin(&r).0, BinOp::Pow);
        let e = parse("-a^2").unwrap();
        assert_eq!(e, Expr::unary_raw(Func::Neg, Expr::binary_raw(BinOp::Pow, Expr::sym("a"), Expr::int(2))));
        let e = parse("-2^x").unwrap();
        assert_eq!(e, Expr::unary_raw(Func::Neg, Expr::binary_raw(BinOp::Pow, Expr::int(2), Expr::sym("x"))));
        let e = parse("x^-2").unwrap();
        assert_eq!(e, Expr::binary_raw(BinOp::Pow, Expr::sym("x"), Expr::int(-2)));
    }

    #[test]
    fn exponent_never_starts_a_ratio() {
        let e = parse("x^2/4").unwrap();
        assert_eq!(bin(&e).0, BinOp::Div);
        let e = parse("x^-1/2").unwrap();
        assert_eq!(bin(&e).0, BinOp::Div);
        let e = parse("x^(1/2)").unwrap();
        assert_eq!(bin(&e).2, Expr::rational(1, 2));
    }

    #[test]
    fn literals() {
        assert_eq!(parse("-3").unwrap(), Expr::int(-3));
        assert_eq!(parse("2.5e-3").unwrap(), Expr::float(2.5e-3));
        assert_eq!(parse("-(3)").unwrap(), Expr::unary_raw(Func::Neg, Expr::int(3)));
        assert_eq!(parse("pi").unwrap(), Expr::pi());
        assert_eq!(parse("cosec(x)").unwrap(), Expr::unary_raw(Func::Csc, Expr::sym("x")));
        assert!(parse("1/0").is_err());
        assert!(parse("x y").is_err());
        assert!(parse("tanh").is_err());
    }
}
