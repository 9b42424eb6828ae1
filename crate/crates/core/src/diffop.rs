//! Linear ordinary differential operators `Σ c_k(x) D^k` kept in normal form,
//! with every coefficient to the left of the derivatives.
//!
//! Coefficients in the symbolic fragment are stored canonicalized, which makes
//! [`op_equal`] a decision procedure for them. Coefficients mentioning `x` or
//! elementary calls are kept as folded trees and compared by sampling.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::symexpr::{
    canonicalize, differentiate, expr_equal, parse_expr, CanonicalPoly, Expr, ExprError, FuncName,
    FuncSym, ProfileBinding, Verdict,
};

/// One token of an operator word such as `J^alpha D J^beta D J^gamma`.
#[derive(Debug, Clone, PartialEq)]
pub enum WordToken {
    Mul(Expr),
    D,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LinDiffOp {
    coeffs: BTreeMap<u32, Expr>,
}

fn normalize_coeff(e: Expr) -> Option<Expr> {
    match canonicalize(&e) {
        Ok(c) if c.is_zero() => None,
        Ok(c) => Some(c.to_expr()),
        Err(_) if e.is_zero() => None,
        Err(_) => Some(e),
    }
}

fn binomial(n: u32, k: u32) -> Expr {
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Expr::Const(BigRational::from_integer(acc))
}

/// Successive derivatives `f, f', ..., f^(n)`.
fn derivatives(f: &Expr, n: u32) -> Vec<Expr> {
    let mut out = vec![f.clone()];
    for _ in 0..n {
        let next = differentiate(out.last().unwrap());
        out.push(next);
    }
    out
}

impl LinDiffOp {
    pub fn zero() -> Self {
        LinDiffOp::default()
    }

    pub fn identity() -> Self {
        LinDiffOp::multiplication(Expr::one())
    }

    /// `D^k`.
    pub fn derivative(k: u32) -> Self {
        LinDiffOp::from_terms([(k, Expr::one())])
    }

    /// Multiplication by `f`.
    pub fn multiplication(f: Expr) -> Self {
        LinDiffOp::from_terms([(0, f)])
    }

    /// Sums the given `(order, coefficient)` pairs into normal form.
    pub fn from_terms(terms: impl IntoIterator<Item = (u32, Expr)>) -> Self {
        let mut grouped: BTreeMap<u32, Vec<Expr>> = BTreeMap::new();
        for (k, c) in terms {
            grouped.entry(k).or_default().push(c);
        }
        let coeffs = grouped
            .into_iter()
            .filter_map(|(k, cs)| normalize_coeff(Expr::add(cs)).map(|c| (k, c)))
            .collect();
        LinDiffOp { coeffs }
    }

    /// Left-to-right composition of a word, e.g. `[D, Mul(J), D]` is `D∘J∘D`.
    pub fn from_word(word: &[WordToken]) -> Self {
        word.iter().fold(LinDiffOp::identity(), |acc, tok| {
            let factor = match tok {
                WordToken::D => LinDiffOp::derivative(1),
                WordToken::Mul(f) => LinDiffOp::multiplication(f.clone()),
            };
            acc.compose(&factor)
        })
    }

    /// Parses whitespace-separated word tokens: `D`, `D^k`, or an expression.
    pub fn parse_word(text: &str) -> Result<Vec<WordToken>, ExprError> {
        let mut out = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "D" {
                out.push(WordToken::D);
            } else if let Some(k) = tok.strip_prefix("D^").and_then(|k| k.parse::<u32>().ok()) {
                out.extend(std::iter::repeat_n(WordToken::D, k as usize));
            } else {
                out.push(WordToken::Mul(parse_expr(tok)?));
            }
        }
        Ok(out)
    }

    pub fn coefficients(&self) -> &BTreeMap<u32, Expr> {
        &self.coeffs
    }

    /// Coefficient of `D^k`, zero when absent.
    pub fn coefficient(&self, k: u32) -> Expr {
        self.coeffs.get(&k).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn order(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &LinDiffOp) -> LinDiffOp {
        LinDiffOp::from_terms(
            self.coeffs
                .iter()
                .chain(other.coeffs.iter())
                .map(|(k, c)| (*k, c.clone())),
        )
    }

    pub fn sub(&self, other: &LinDiffOp) -> LinDiffOp {
        self.add(&other.scale(&Expr::int(-1)))
    }

    /// Left multiplication by a scalar.
    pub fn scale(&self, s: &Expr) -> LinDiffOp {
        LinDiffOp::from_terms(
            self.coeffs
                .iter()
                .map(|(k, c)| (*k, Expr::mul(vec![s.clone(), c.clone()]))),
        )
    }

    /// `self ∘ other`, moving every derivative of `self` through the
    /// coefficients of `other` with the Leibniz rule
    /// `D^i ∘ f = Σ_m C(i, m) f^(m) D^(i-m)`.
    pub fn compose(&self, other: &LinDiffOp) -> LinDiffOp {
        let max_i = self.order().unwrap_or(0);
        let mut terms = Vec::new();
        for (&j, b) in &other.coeffs {
            let db = derivatives(b, max_i);
            for (&i, a) in &self.coeffs {
                for m in 0..=i {
                    let c = Expr::mul(vec![binomial(i, m), a.clone(), db[m as usize].clone()]);
                    terms.push((i - m + j, c));
                }
            }
        }
        LinDiffOp::from_terms(terms)
    }

    /// `Σ c_k · target^(k)`.
    pub fn apply(&self, target: FuncName) -> Expr {
        let terms = self
            .coeffs
            .iter()
            .map(|(k, c)| Expr::mul(vec![c.clone(), Expr::Func(FuncSym::new(target, *k))]))
            .collect();
        Expr::add(terms)
    }

    /// Action on an arbitrary expression: `Σ c_k · d^k g / dx^k`.
    pub fn act(&self, g: &Expr) -> Expr {
        let dg = derivatives(g, self.order().unwrap_or(0));
        Expr::add(
            self.coeffs
                .iter()
                .map(|(k, c)| Expr::mul(vec![c.clone(), dg[*k as usize].clone()]))
                .collect(),
        )
    }

    /// Integration-by-parts dual `Σ (-1)^k D^k ∘ c_k`.
    pub fn formal_adjoint(&self) -> LinDiffOp {
        let mut terms = Vec::new();
        for (&k, c) in &self.coeffs {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            let dc = derivatives(c, k);
            for m in 0..=k {
                let t = Expr::mul(vec![Expr::int(sign), binomial(k, m), dc[m as usize].clone()]);
                terms.push((k - m, t));
            }
        }
        LinDiffOp::from_terms(terms)
    }

    /// Replaces `name^(k)` by derivatives of `replacement` in every coefficient.
    pub fn substitute_func(&self, name: FuncName, replacement: &Expr) -> LinDiffOp {
        LinDiffOp::from_terms(
            self.coeffs
                .iter()
                .map(|(k, c)| (*k, c.substitute_func(name, replacement))),
        )
    }

    pub fn substitute_param(&self, name: &str, replacement: &Expr) -> LinDiffOp {
        LinDiffOp::from_terms(
            self.coeffs
                .iter()
                .map(|(k, c)| (*k, c.substitute_param(name, replacement))),
        )
    }
}

impl fmt::Display for LinDiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        for (n, (k, c)) in self.coeffs.iter().rev().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            match k {
                0 => write!(f, "[{c}]")?,
                1 => write!(f, "[{c}]*D")?,
                _ => write!(f, "[{c}]*D^{k}")?,
            }
        }
        Ok(())
    }
}

/// Outcome for one derivative order of an operator comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderCheck {
    pub order: u32,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpVerdict {
    pub equal: bool,
    pub orders: Vec<OrderCheck>,
}

impl OpVerdict {
    /// True when every order was decided by canonical difference.
    pub fn is_exact(&self) -> bool {
        self.orders.iter().all(|o| o.verdict.is_exact())
    }

    /// Canonical differences `A - B` for the exactly decided orders.
    pub fn differences(&self) -> Vec<(u32, &CanonicalPoly)> {
        self.orders
            .iter()
            .filter_map(|o| match &o.verdict.method {
                crate::symexpr::EqualityMethod::Exact { difference } => Some((o.order, difference)),
                _ => None,
            })
            .collect()
    }
}

/// Order-by-order equality of two operators.
pub fn op_equal(a: &LinDiffOp, b: &LinDiffOp, binding: Option<&ProfileBinding>) -> Result<OpVerdict, ExprError> {
    let mut orders: Vec<u32> = a.coeffs.keys().chain(b.coeffs.keys()).copied().collect();
    orders.sort_unstable();
    orders.dedup();
    let mut checks = Vec::with_capacity(orders.len());
    for k in orders {
        let verdict = expr_equal(&a.coefficient(k), &b.coefficient(k), binding)?;
        checks.push(OrderCheck { order: k, verdict });
    }
    Ok(OpVerdict { equal: checks.iter().all(|c| c.verdict.equal), orders: checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(t: &str) -> Expr {
        parse_expr(t).unwrap()
    }

    fn word(t: &str) -> LinDiffOp {
        LinDiffOp::from_word(&LinDiffOp::parse_word(t).unwrap())
    }

    fn terms(pairs: &[(u32, &str)]) -> LinDiffOp {
        LinDiffOp::from_terms(pairs.iter().map(|(k, t)| (*k, e(t))))
    }

    fn assert_op_eq(a: &LinDiffOp, b: &LinDiffOp) {
        let v = op_equal(a, b, None).unwrap();
        assert!(v.equal && v.is_exact(), "{a}  vs  {b}");
    }

    #[test]
    fn leibniz_rule() {
        assert_op_eq(&word("D J1"), &terms(&[(1, "J1"), (0, "J1'")]));
    }

    #[test]
    fn multiplication_then_second_derivative() {
        assert_op_eq(&word("J D D"), &terms(&[(2, "J")]));
    }

    #[test]
    fn hermitization_identity() {
        assert_op_eq(&word("D J D"), &terms(&[(2, "J"), (1, "J'")]));
    }

    #[test]
    fn composition_examples() {
        let d = LinDiffOp::derivative(1);
        assert_eq!(d.compose(&d), LinDiffOp::derivative(2));
        let j = LinDiffOp::multiplication(e("J"));
        assert_eq!(j.compose(&d), terms(&[(1, "J")]));
        assert_op_eq(&d.compose(&terms(&[(1, "J")])), &terms(&[(2, "J"), (1, "J'")]));
    }

    #[test]
    fn apply_examples() {
        assert_eq!(LinDiffOp::derivative(2).apply(FuncName::Psi), Expr::func(FuncName::Psi, 2));
        let op = terms(&[(2, "J"), (1, "J'"), (0, "(1/2)*J''")]);
        let got = canonicalize(&op.apply(FuncName::Psi)).unwrap();
        let want = canonicalize(&e("J*psi'' + J'*psi' + (1/2)*J''*psi")).unwrap();
        assert_eq!(got, want);
        assert!(LinDiffOp::zero().apply(FuncName::Psi).is_zero());
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(LinDiffOp::derivative(1).formal_adjoint(), terms(&[(1, "-1")]));
        let f = LinDiffOp::multiplication(e("J1*J2'"));
        assert_eq!(f.formal_adjoint(), f);
        // (-D)∘J∘(-D) expands back to D∘J∘D
        let djd = word("D J D");
        assert_op_eq(&djd.formal_adjoint(), &djd);
    }

    #[test]
    fn op_equal_examples() {
        let v = op_equal(&LinDiffOp::derivative(2), &LinDiffOp::derivative(1), None).unwrap();
        assert!(!v.equal);
        let a = terms(&[(2, "J"), (0, "eps")]);
        let padded = a.add(&terms(&[(3, "0*J")]));
        assert_eq!(a, padded);
        assert_op_eq(&a, &padded);
    }

    #[test]
    fn conjugation_by_function() {
        // f D f^-1 = D - f'/f
        assert_op_eq(&word("J1 D J1^-1"), &terms(&[(1, "1"), (0, "-J1'/J1")]));
    }

    #[test]
    fn parse_word_powers_of_d() {
        assert_eq!(LinDiffOp::parse_word("D^2 J").unwrap().len(), 3);
        assert!(LinDiffOp::parse_word("J^ D").is_err());
    }

    #[test]
    fn sampled_comparison_for_closed_forms() {
        let b = ProfileBinding::new();
        let a = terms(&[(1, "sin(2*x)")]);
        let c = terms(&[(1, "2*sin(x)*cos(x)")]);
        let v = op_equal(&a, &c, Some(&b)).unwrap();
        assert!(v.equal && !v.is_exact());
        assert_eq!(op_equal(&a, &c, None), Err(ExprError::Undecidable));
    }
}
