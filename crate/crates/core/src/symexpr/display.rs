use std::fmt;

use num_rational::BigRational;
use num_traits::Signed;

use super::{Exponent, Expr};

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_POWER: u8 = 3;

fn write_rational(f: &mut fmt::Formatter<'_>, r: &BigRational) -> fmt::Result {
    if r.is_integer() && !r.is_negative() {
        write!(f, "{}", r.numer())
    } else if r.is_integer() {
        write!(f, "({})", r.numer())
    } else {
        write!(f, "({}/{})", r.numer(), r.denom())
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, ctx: u8) -> fmt::Result {
    match e {
        Expr::Const(c) => write_rational(f, c),
        Expr::X => f.write_str("x"),
        Expr::Param(p) => f.write_str(p),
        Expr::Func(s) => write!(f, "{s}"),
        Expr::Call(call, arg) => {
            write!(f, "{}(", call.as_str())?;
            write_expr(f, arg, 0)?;
            f.write_str(")")
        }
        Expr::Sum(terms) => {
            if terms.is_empty() {
                return f.write_str("0");
            }
            let paren = ctx > PREC_SUM;
            if paren {
                f.write_str("(")?;
            }
            for (i, t) in terms.iter().enumerate() {
                if i > 0 {
                    f.write_str(" + ")?;
                }
                write_expr(f, t, PREC_SUM)?;
            }
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
        Expr::Product(factors) => {
            if factors.is_empty() {
                return f.write_str("1");
            }
            let paren = ctx > PREC_PRODUCT;
            if paren {
                f.write_str("(")?;
            }
            for (i, t) in factors.iter().enumerate() {
                if i > 0 {
                    f.write_str("*")?;
                }
                write_expr(f, t, PREC_PRODUCT + 1)?;
            }
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
        Expr::Pow(base, exp) => {
            let paren = ctx > PREC_POWER;
            if paren {
                f.write_str("(")?;
            }
            // bases print as atoms so that `(-2)^2` and `(a*b)^2` survive
            write_expr(f, base, PREC_POWER + 1)?;
            f.write_str("^")?;
            write_exponent(f, exp)?;
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

fn write_exponent(f: &mut fmt::Formatter<'_>, exp: &Exponent) -> fmt::Result {
    if exp.is_constant() {
        return write_rational(f, exp.constant());
    }
    f.write_str("(")?;
    write_expr(f, &exp.to_expr(), 0)?;
    f.write_str(")")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_exponent(f, self)
    }
}
