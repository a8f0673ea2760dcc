use num_complex::Complex64;

use super::{BinOp, Expr, Func};
use crate::error::ExprError;

fn as_num(e: &Expr) -> Option<Complex64> {
    match e {
        Expr::Num(c) => Some(*c),
        _ => None,
    }
}

fn is_value(e: &Expr, v: f64) -> bool {
    as_num(e) == Some(Complex64::new(v, 0.0))
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(c) => Expr::Num(-c),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x + y),
        (Some(x), _) if x == Complex64::new(0.0, 0.0) => b,
        (_, Some(y)) if y == Complex64::new(0.0, 0.0) => a,
        _ => Expr::Binary(BinOp::Add, Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x - y),
        (Some(x), _) if x == Complex64::new(0.0, 0.0) => neg(b),
        (_, Some(y)) if y == Complex64::new(0.0, 0.0) => a,
        _ => Expr::Binary(BinOp::Sub, Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_value(&a, 0.0) || is_value(&b, 0.0) {
        return Expr::num(0.0);
    }
    if is_value(&a, 1.0) {
        return b;
    }
    if is_value(&b, 1.0) {
        return a;
    }
    if let (Some(x), Some(y)) = (as_num(&a), as_num(&b)) {
        return Expr::Num(x * y);
    }
    Expr::Binary(BinOp::Mul, Box::new(a), Box::new(b))
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_value(&a, 0.0) {
        return Expr::num(0.0);
    }
    if is_value(&b, 1.0) {
        return a;
    }
    Expr::Binary(BinOp::Div, Box::new(a), Box::new(b))
}

fn pow(a: Expr, b: Expr) -> Expr {
    if is_value(&b, 1.0) {
        return a;
    }
    if is_value(&b, 0.0) {
        return Expr::num(1.0);
    }
    Expr::Binary(BinOp::Pow, Box::new(a), Box::new(b))
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

pub(super) fn differentiate(e: &Expr) -> Result<Expr, ExprError> {
    Ok(match e {
        Expr::Num(_) | Expr::Const(_) => Expr::num(0.0),
        Expr::Var => Expr::num(1.0),
        Expr::Neg(u) => neg(differentiate(u)?),
        Expr::Binary(op, u, v) => {
            let du = differentiate(u)?;
            let dv = differentiate(v)?;
            let (u, v) = (u.as_ref().clone(), v.as_ref().clone());
            match op {
                BinOp::Add => add(du, dv),
                BinOp::Sub => sub(du, dv),
                BinOp::Mul => add(mul(du, v), mul(u, dv)),
                BinOp::Div => div(sub(mul(du, v.clone()), mul(u, dv)), pow(v, Expr::num(2.0))),
                BinOp::Pow if !v.depends_on_y() => {
                    let reduced = sub(v.clone(), Expr::num(1.0));
                    mul(mul(v, pow(u, reduced)), du)
                }
                BinOp::Pow => {
                    // d(u^v) = u^v (v' ln u + v u'/u)
                    let base = pow(u.clone(), v.clone());
                    let log_term = mul(dv, call(Func::Log, u.clone()));
                    let ratio_term = div(mul(v, du), u);
                    mul(base, add(log_term, ratio_term))
                }
            }
        }
        Expr::Call(f, u) => {
            let du = differentiate(u)?;
            let u = u.as_ref().clone();
            let outer = match f {
                Func::Exp => call(Func::Exp, u),
                Func::Log => div(Expr::num(1.0), u),
                Func::Sin => call(Func::Cos, u),
                Func::Cos => neg(call(Func::Sin, u)),
                Func::Sqrt => div(Expr::num(1.0), mul(Expr::num(2.0), call(Func::Sqrt, u))),
                Func::Abs => return Err(ExprError::NonDifferentiable("abs")),
            };
            mul(outer, du)
        }
    })
}
