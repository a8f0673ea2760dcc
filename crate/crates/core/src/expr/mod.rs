//! A tiny expression language in one variable `y`, used to describe the
//! coefficients `p`, `q`, `r` of a Sturm-Liouville problem.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'y' | 'pi' | 'i' | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Evaluation is over complex numbers with principal branches for `sqrt`
//! and `log`.

mod deriv;
mod parser;

use std::fmt;

use num_complex::Complex64;

use crate::error::ExprError;

pub use parser::parse;

/// Elementary functions understood by the parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

/// Named constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constant {
    Pi,
    I,
}

impl Constant {
    pub fn value(self) -> Complex64 {
        match self {
            Constant::Pi => Complex64::new(std::f64::consts::PI, 0.0),
            Constant::I => Complex64::i(),
        }
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
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => " + ",
            BinOp::Sub => " - ",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

/// Expression tree. Immutable once built; cheap to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Complex64),
    Const(Constant),
    Var,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

const NEG_PRECEDENCE: u8 = 3;
const ATOM_PRECEDENCE: u8 = 5;

impl Expr {
    pub fn num(value: f64) -> Expr {
        Expr::Num(Complex64::new(value, 0.0))
    }

    /// Parses `text`; shorthand for [`parse`].
    pub fn parse(text: &str) -> Result<Expr, ExprError> {
        parse(text)
    }

    /// Symbolic derivative with respect to `y`.
    pub fn differentiate(&self) -> Result<Expr, ExprError> {
        deriv::differentiate(self)
    }

    /// True when the tree mentions the variable `y`.
    pub fn depends_on_y(&self) -> bool {
        match self {
            Expr::Var => true,
            Expr::Num(_) | Expr::Const(_) => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.depends_on_y(),
            Expr::Binary(_, l, r) => l.depends_on_y() || r.depends_on_y(),
        }
    }

    /// Evaluates at a real point.
    pub fn eval_real(&self, y: f64) -> Result<Complex64, ExprError> {
        self.eval(Complex64::new(y, 0.0))
    }

    /// Evaluates at a complex point using principal branches.
    pub fn eval(&self, y: Complex64) -> Result<Complex64, ExprError> {
        let v = self.eval_inner(y)?;
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::NonFinite)
        }
    }

    fn eval_inner(&self, y: Complex64) -> Result<Complex64, ExprError> {
        Ok(match self {
            Expr::Num(c) => *c,
            Expr::Const(c) => c.value(),
            Expr::Var => y,
            Expr::Neg(e) => -e.eval_inner(y)?,
            Expr::Binary(op, l, r) => {
                let a = l.eval_inner(y)?;
                let b = r.eval_inner(y)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == Complex64::new(0.0, 0.0) {
                            return Err(ExprError::DivisionByZero);
                        }
                        a / b
                    }
                    BinOp::Pow => power(a, b)?,
                }
            }
            Expr::Call(f, e) => {
                let a = e.eval_inner(y)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a.norm() == 0.0 {
                            return Err(ExprError::Domain { func: "log" });
                        }
                        a.ln()
                    }
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Sqrt => a.sqrt(),
                    Func::Abs => Complex64::new(a.norm(), 0.0),
                }
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Num(c) if c.im != 0.0 || c.re < 0.0 => 1,
            Expr::Neg(_) => NEG_PRECEDENCE,
            Expr::Binary(op, _, _) => op.precedence(),
            _ => ATOM_PRECEDENCE,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

fn power(base: Complex64, exponent: Complex64) -> Result<Complex64, ExprError> {
    if exponent.im == 0.0 && exponent.re.fract() == 0.0 && exponent.re.abs() <= 64.0 {
        let n = exponent.re as i32;
        if n < 0 && base == Complex64::new(0.0, 0.0) {
            return Err(ExprError::DivisionByZero);
        }
        return Ok(base.powi(n));
    }
    if base == Complex64::new(0.0, 0.0) {
        return if exponent.re > 0.0 {
            Ok(base)
        } else {
            Err(ExprError::Domain { func: "pow" })
        };
    }
    Ok(base.powc(exponent))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => {
                if c.im == 0.0 {
                    if c.re < 0.0 {
                        write!(f, "-{:?}", -c.re)
                    } else {
                        write!(f, "{:?}", c.re)
                    }
                } else {
                    write!(f, "{:?} + {:?}*i", c.re, c.im)
                }
            }
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::I) => f.write_str("i"),
            Expr::Var => f.write_str("y"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.fmt_child(f, NEG_PRECEDENCE)
            }
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                match op {
                    BinOp::Pow => {
                        l.fmt_child(f, ATOM_PRECEDENCE)?;
                        f.write_str(op.symbol())?;
                        r.fmt_child(f, NEG_PRECEDENCE)
                    }
                    _ => {
                        l.fmt_child(f, p)?;
                        f.write_str(op.symbol())?;
                        r.fmt_child(f, p + 1)
                    }
                }
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(text: &str, y: f64) -> Complex64 {
        parse(text).unwrap().eval_real(y).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn evaluates_basic_examples() {
        assert!(close(at("exp(-2*y)", 0.0), Complex64::new(1.0, 0.0), 1e-15));
        assert!(close(at("y^2+1", 2.0), Complex64::new(5.0, 0.0), 1e-15));
        assert!(close(
            at("exp(i*y)", std::f64::consts::PI),
            Complex64::new(-1.0, 0.0),
            1e-15
        ));
        assert!(close(
            at("1/(4*y) + 2*y/(y-1/2)^2", 1.0),
            Complex64::new(8.25, 0.0),
            1e-15
        ));
        assert_eq!(at("1", 17.0), Complex64::new(1.0, 0.0));
        assert_eq!(at("sqrt(y)", 4.0), Complex64::new(2.0, 0.0));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(at("-2^2", 0.0), Complex64::new(-4.0, 0.0));
        assert_eq!(at("2^3^2", 0.0), Complex64::new(512.0, 0.0));
        assert_eq!(at("8-3-2", 0.0), Complex64::new(3.0, 0.0));
        assert_eq!(at("8/4/2", 0.0), Complex64::new(1.0, 0.0));
        assert_eq!(at("2^-1", 0.0), Complex64::new(0.5, 0.0));
        assert_eq!(at("2*-y", 3.0), Complex64::new(-6.0, 0.0));
    }

    #[test]
    fn domain_errors() {
        assert_eq!(parse("1/y").unwrap().eval_real(0.0), Err(ExprError::DivisionByZero));
        assert_eq!(
            parse("log(y)").unwrap().eval_real(0.0),
            Err(ExprError::Domain { func: "log" })
        );
        let d = parse("sqrt(y)").unwrap().differentiate().unwrap();
        assert!(d.eval_real(0.0).is_err());
    }

    #[test]
    fn principal_branches() {
        let v = at("sqrt(y)", -4.0);
        assert!(close(v, Complex64::new(0.0, 2.0), 1e-15));
        let v = at("log(y)", -1.0);
        assert!(close(v, Complex64::new(0.0, std::f64::consts::PI), 1e-15));
    }

    #[test]
    fn display_reparses() {
        for text in [
            "1/(4*y) + 2*y/(y-1/2)^2",
            "-y^2",
            "(-y)^2",
            "2^3^2",
            "(2^3)^2",
            "a",
            "exp(-2*y)*(y^2+1)",
            "y - (y - 1)",
            "y/(y*y)",
            "-(-y)",
            "2^-y^2",
            "1e-7*y",
        ] {
            let Ok(ast) = parse(text) else { continue };
            let printed = ast.to_string();
            assert_eq!(parse(&printed).unwrap(), ast, "{text} -> {printed}");
        }
    }
}
