use super::{BinOp, Expr, Func, Node};

pub(super) fn differentiate(e: &Expr, var: &str) -> Expr {
    d(e, var).simplify()
}

fn d(e: &Expr, var: &str) -> Expr {
    if !e.depends_on(var) {
        return Expr::int(0);
    }
    match e.node() {
        Node::Symbol(_) => Expr::int(1),
        Node::Const(_) | Node::Pi | Node::ImagUnit => Expr::int(0),
        Node::Unary(f, u) => {
            let du = d(u, var);
            if *f == Func::Neg {
                return -du;
            }
            outer_derivative(*f, u) * du
        }
        Node::Binary(op, u, v) => {
            let (du, dv) = (d(u, var), d(v, var));
            match op {
                BinOp::Add => du + dv,
                BinOp::Sub => du - dv,
                BinOp::Mul => du * v + u * dv,
                BinOp::Div => {
                    if dv.is_zero() {
                        du / v
                    } else {
                        (du * v - u * dv) / v.pow(2)
                    }
                }
                BinOp::Pow => {
                    if dv.is_zero() {
                        v * u.pow(v - 1) * du
                    } else if du.is_zero() {
                        e * u.ln() * dv
                    } else {
                        e * (dv * u.ln() + v * du / u)
                    }
                }
            }
        }
    }
}

/// f'(u) for the named functions.
fn outer_derivative(f: Func, u: &Expr) -> Expr {
    let ap = |g: Func| Expr::apply(g, u.clone());
    match f {
        Func::Exp => ap(Func::Exp),
        Func::Ln => Expr::int(1) / u,
        Func::Sqrt => Expr::int(1) / (Expr::int(2) * ap(Func::Sqrt)),
        Func::Sin => ap(Func::Cos),
        Func::Cos => -ap(Func::Sin),
        Func::Tan => ap(Func::Sec).pow(2),
        Func::Sec => ap(Func::Sec) * ap(Func::Tan),
        Func::Csc => -(ap(Func::Csc) * ap(Func::Cot)),
        Func::Cot => -ap(Func::Csc).pow(2),
        Func::Sinh => ap(Func::Cosh),
        Func::Cosh => ap(Func::Sinh),
        Func::Tanh => ap(Func::Sech).pow(2),
        Func::Sech => -(ap(Func::Sech) * ap(Func::Tanh)),
        Func::Csch => -(ap(Func::Csch) * ap(Func::Coth)),
        Func::Coth => -ap(Func::Csch).pow(2),
        Func::Arccos => -(Expr::int(1) / (Expr::int(1) - u.pow(2)).sqrt()),
        Func::Arccoth => Expr::int(1) / (Expr::int(1) - u.pow(2)),
        Func::Neg => Expr::int(-1),
    }
}
