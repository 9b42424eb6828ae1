use super::{Elementary, Exponent, Expr};

/// Exact d/dx. Parameters are constants; `J^(k)` steps to `J^(k+1)`.
///
/// Results are built with the folding constructors, so `d/dx (2*x)` is `2`
/// rather than a sum of product-rule terms.
pub fn differentiate(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Param(_) => Expr::zero(),
        Expr::X => Expr::one(),
        Expr::Func(f) => Expr::Func(f.derivative()),
        Expr::Sum(terms) => Expr::add(terms.iter().map(differentiate).collect()),
        Expr::Product(factors) => {
            let mut terms = Vec::with_capacity(factors.len());
            for i in 0..factors.len() {
                let d = differentiate(&factors[i]);
                if d.is_zero() {
                    continue;
                }
                let mut fs = factors.clone();
                fs[i] = d;
                terms.push(Expr::mul(fs));
            }
            Expr::add(terms)
        }
        Expr::Pow(base, exp) => {
            let db = differentiate(base);
            if db.is_zero() || exp.is_zero() {
                return Expr::zero();
            }
            let lowered = exp.add(&Exponent::integer(-1));
            Expr::mul(vec![exp.to_expr(), Expr::pow((**base).clone(), lowered), db])
        }
        Expr::Call(call, arg) => {
            let da = differentiate(arg);
            if da.is_zero() {
                return Expr::zero();
            }
            let outer = match call {
                Elementary::Sin => Expr::call(Elementary::Cos, (**arg).clone()),
                Elementary::Cos => Expr::neg(Expr::call(Elementary::Sin, (**arg).clone())),
                Elementary::Exp => Expr::call(Elementary::Exp, (**arg).clone()),
            };
            Expr::mul(vec![outer, da])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{canonicalize, parse_expr, FuncName};

    #[test]
    fn chain_rule_on_sine() {
        let d = differentiate(&parse_expr("sin(2*x)").unwrap());
        let want = Expr::mul(vec![
            Expr::int(2),
            Expr::call(Elementary::Cos, parse_expr("2*x").unwrap()),
        ]);
        assert_eq!(d, want);
    }

    #[test]
    fn function_symbol_order_steps() {
        assert_eq!(differentiate(&Expr::func(FuncName::J, 0)), Expr::func(FuncName::J, 1));
        assert_eq!(differentiate(&Expr::func(FuncName::Psi, 2)), Expr::func(FuncName::Psi, 3));
    }

    #[test]
    fn product_rule_three_factors() {
        let d = differentiate(&parse_expr("J1*J2*J3").unwrap());
        let want = parse_expr("J1'*J2*J3 + J1*J2'*J3 + J1*J2*J3'").unwrap();
        assert_eq!(canonicalize(&d).unwrap(), canonicalize(&want).unwrap());
    }

    #[test]
    fn symbolic_power() {
        let d = differentiate(&parse_expr("J^alpha").unwrap());
        let want = parse_expr("alpha*J^(alpha-1)*J'").unwrap();
        assert_eq!(canonicalize(&d).unwrap(), canonicalize(&want).unwrap());
    }

    #[test]
    fn parameters_are_constant() {
        assert!(differentiate(&parse_expr("a^2*alpha").unwrap()).is_zero());
    }
}
