//! Expanded, collected normal form for the fragment without `x` and
//! elementary calls.
//!
//! A [`CanonicalPoly`] maps monomials over function symbols (with possibly
//! negative or parameter-affine exponents) to polynomials in the named scalar
//! parameters with exact rational coefficients. Zero coefficients are never
//! stored, so two values are equal exactly when their maps are.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{rational_pow, Exponent, Expr, ExprError, FuncSym};

/// Parameter name → positive integer power.
pub type ParamMonomial = BTreeMap<String, u32>;

/// Product of function symbols raised to nonzero exponents.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(BTreeMap<FuncSym, Exponent>);

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn symbol(s: FuncSym) -> Self {
        let mut m = BTreeMap::new();
        m.insert(s, Exponent::integer(1));
        Monomial(m)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &BTreeMap<FuncSym, Exponent> {
        &self.0
    }

    pub fn exponent_of(&self, s: FuncSym) -> Option<&Exponent> {
        self.0.get(&s)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (s, e) in &other.0 {
            let combined = match out.get(s) {
                Some(prev) => prev.add(e),
                None => e.clone(),
            };
            if combined.is_zero() {
                out.remove(s);
            } else {
                out.insert(*s, combined);
            }
        }
        Monomial(out)
    }

    fn pow(&self, e: &Exponent) -> Option<Monomial> {
        let mut out = BTreeMap::new();
        for (s, x) in &self.0 {
            let p = x.mul(e)?;
            if !p.is_zero() {
                out.insert(*s, p);
            }
        }
        Some(Monomial(out))
    }

    /// Removes one factor entirely, returning its exponent.
    pub fn without(&self, s: FuncSym) -> (Monomial, Option<Exponent>) {
        let mut m = self.0.clone();
        let e = m.remove(&s);
        (Monomial(m), e)
    }

    pub fn to_expr(&self) -> Expr {
        Expr::mul(
            self.0
                .iter()
                .map(|(s, e)| Expr::pow(Expr::Func(*s), e.clone()))
                .collect(),
        )
    }
}

/// Polynomial in named parameters with rational coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ParamPoly(BTreeMap<ParamMonomial, BigRational>);

impl ParamPoly {
    pub fn zero() -> Self {
        ParamPoly::default()
    }

    pub fn constant(r: BigRational) -> Self {
        let mut m = BTreeMap::new();
        if !r.is_zero() {
            m.insert(ParamMonomial::new(), r);
        }
        ParamPoly(m)
    }

    pub fn param(name: &str) -> Self {
        let mut pm = ParamMonomial::new();
        pm.insert(name.to_string(), 1);
        let mut m = BTreeMap::new();
        m.insert(pm, BigRational::one());
        ParamPoly(m)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<ParamMonomial, BigRational> {
        &self.0
    }

    /// The value when the polynomial is a bare constant.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.0.len() {
            0 => Some(BigRational::zero()),
            1 => self.0.get(&ParamMonomial::new()).cloned(),
            _ => None,
        }
    }

    fn add_term(&mut self, pm: ParamMonomial, c: BigRational) {
        let slot = self.0.entry(pm.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.0.remove(&pm);
        }
    }

    pub fn add(&self, other: &ParamPoly) -> ParamPoly {
        let mut out = self.clone();
        for (pm, c) in &other.0 {
            out.add_term(pm.clone(), c.clone());
        }
        out
    }

    pub fn mul(&self, other: &ParamPoly) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (pa, ca) in &self.0 {
            for (pb, cb) in &other.0 {
                let mut pm = pa.clone();
                for (name, k) in pb {
                    *pm.entry(name.clone()).or_insert(0) += k;
                }
                out.add_term(pm, ca * cb);
            }
        }
        out
    }

    pub fn to_expr(&self) -> Expr {
        Expr::add(self.0.iter().map(|(pm, c)| param_term(pm, c)).collect())
    }
}

fn param_term(pm: &ParamMonomial, c: &BigRational) -> Expr {
    let mut factors = vec![Expr::Const(c.clone())];
    for (name, k) in pm {
        factors.push(Expr::powi(Expr::Param(name.clone()), *k as i64));
    }
    Expr::mul(factors)
}

/// Canonical form of an expression in the symbolic fragment.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CanonicalPoly(BTreeMap<Monomial, ParamPoly>);

impl CanonicalPoly {
    pub fn zero() -> Self {
        CanonicalPoly::default()
    }

    pub fn constant(r: BigRational) -> Self {
        CanonicalPoly::from_term(Monomial::one(), ParamPoly::constant(r))
    }

    fn from_term(m: Monomial, c: ParamPoly) -> Self {
        let mut map = BTreeMap::new();
        if !c.is_zero() {
            map.insert(m, c);
        }
        CanonicalPoly(map)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, ParamPoly> {
        &self.0
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&ParamPoly> {
        self.0.get(m)
    }

    /// The value of a polynomial free of function symbols and parameters.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.0.len() {
            0 => Some(BigRational::zero()),
            1 => self.0.get(&Monomial::one())?.as_constant(),
            _ => None,
        }
    }

    fn add_term(&mut self, m: Monomial, c: ParamPoly) {
        let merged = match self.0.remove(&m) {
            Some(prev) => prev.add(&c),
            None => c,
        };
        if !merged.is_zero() {
            self.0.insert(m, merged);
        }
    }

    pub fn add(&self, other: &CanonicalPoly) -> CanonicalPoly {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &CanonicalPoly) -> CanonicalPoly {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, r: &BigRational) -> CanonicalPoly {
        if r.is_zero() {
            return CanonicalPoly::zero();
        }
        let k = ParamPoly::constant(r.clone());
        CanonicalPoly(self.0.iter().map(|(m, c)| (m.clone(), c.mul(&k))).collect())
    }

    pub fn mul(&self, other: &CanonicalPoly) -> CanonicalPoly {
        let mut out = CanonicalPoly::zero();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &other.0 {
                out.add_term(ma.mul(mb), ca.mul(cb));
            }
        }
        out
    }

    /// Power with an affine exponent. Nonnegative integers expand; anything
    /// else needs a single term whose parameter part is a plain constant.
    fn pow(&self, e: &Exponent, node: &Expr) -> Result<CanonicalPoly, ExprError> {
        if let Some(n) = e.as_integer() {
            if n >= 0 {
                let mut acc = CanonicalPoly::constant(BigRational::one());
                let mut sq = self.clone();
                let mut k = n as u64;
                while k > 0 {
                    if k & 1 == 1 {
                        acc = acc.mul(&sq);
                    }
                    k >>= 1;
                    if k > 0 {
                        sq = sq.mul(&sq);
                    }
                }
                return Ok(acc);
            }
        }
        let fragment = || ExprError::Fragment { node: node.to_string() };
        if self.0.len() != 1 {
            return Err(fragment());
        }
        let (m, c) = self.0.iter().next().unwrap();
        let r = c.as_constant().ok_or_else(fragment)?;
        let coeff = match e.as_integer() {
            Some(n) => rational_pow(&r, n).ok_or_else(fragment)?,
            None if r.is_one() => r,
            None => return Err(fragment()),
        };
        let mono = m.pow(e).ok_or_else(fragment)?;
        Ok(CanonicalPoly::from_term(mono, ParamPoly::constant(coeff)))
    }

    /// Keeps the terms whose total degree in `param` equals `degree`.
    pub fn degree_part(&self, param: &str, degree: u32) -> CanonicalPoly {
        let mut out = CanonicalPoly::zero();
        for (m, c) in &self.0 {
            let mut kept = ParamPoly::zero();
            for (pm, r) in c.terms() {
                if pm.get(param).copied().unwrap_or(0) == degree {
                    kept.add_term(pm.clone(), r.clone());
                }
            }
            out.add_term(m.clone(), kept);
        }
        out
    }

    /// Highest power of `param` present, 0 for the zero polynomial.
    pub fn max_degree(&self, param: &str) -> u32 {
        self.0
            .values()
            .flat_map(|c| c.terms().keys())
            .map(|pm| pm.get(param).copied().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// Splits off every term linear in `s` (exponent exactly 1), returning
    /// the cofactor of `s` and the remainder.
    pub fn split_linear(&self, s: FuncSym) -> (CanonicalPoly, CanonicalPoly) {
        let mut cofactor = CanonicalPoly::zero();
        let mut rest = CanonicalPoly::zero();
        for (m, c) in &self.0 {
            match m.without(s) {
                (reduced, Some(e)) if e.is_one() => cofactor.add_term(reduced, c.clone()),
                _ => rest.add_term(m.clone(), c.clone()),
            }
        }
        (cofactor, rest)
    }

    pub fn to_expr(&self) -> Expr {
        let mut terms = Vec::new();
        for (m, c) in &self.0 {
            for (pm, r) in c.terms() {
                terms.push(Expr::mul(vec![param_term(pm, r), m.to_expr()]));
            }
        }
        Expr::add(terms)
    }
}

impl fmt::Display for CanonicalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

/// Expands and collects `e` exactly.
///
/// Fails with [`ExprError::Fragment`] naming the offending node when `e`
/// contains `x`, an elementary call, or a power the polynomial algebra cannot
/// house (a negative power of a parameter or of a sum, say).
pub fn canonicalize(e: &Expr) -> Result<CanonicalPoly, ExprError> {
    match e {
        Expr::Const(c) => Ok(CanonicalPoly::constant(c.clone())),
        Expr::Param(p) => Ok(CanonicalPoly::from_term(Monomial::one(), ParamPoly::param(p))),
        Expr::Func(s) => Ok(CanonicalPoly::from_term(
            Monomial::symbol(*s),
            ParamPoly::constant(BigRational::one()),
        )),
        Expr::X | Expr::Call(..) => Err(ExprError::Fragment { node: e.to_string() }),
        Expr::Sum(terms) => {
            let mut acc = CanonicalPoly::zero();
            for t in terms {
                acc = acc.add(&canonicalize(t)?);
            }
            Ok(acc)
        }
        Expr::Product(factors) => {
            let mut acc = CanonicalPoly::constant(BigRational::one());
            for f in factors {
                acc = acc.mul(&canonicalize(f)?);
                if acc.is_zero() {
                    // keep scanning so fragment violations still surface
                    for rest in factors {
                        canonicalize(rest)?;
                    }
                    return Ok(acc);
                }
            }
            Ok(acc)
        }
        Expr::Pow(base, exp) => canonicalize(base)?.pow(exp, e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{parse_expr, FuncName};

    fn canon(text: &str) -> CanonicalPoly {
        canonicalize(&parse_expr(text).unwrap()).unwrap()
    }

    #[test]
    fn commutative_collection() {
        let p = canon("J'*J + J*J'");
        assert_eq!(p.len(), 1);
        let mono = Monomial::symbol(FuncSym::new(FuncName::J, 0))
            .mul(&Monomial::symbol(FuncSym::new(FuncName::J, 1)));
        assert_eq!(p.coefficient(&mono).unwrap().as_constant(), Some(BigRational::from_integer(2.into())));
    }

    #[test]
    fn cancellation_to_zero() {
        assert!(canon("alpha*J*J^(-1) - alpha").is_zero());
    }

    #[test]
    fn elementary_call_is_fragment_error() {
        match canonicalize(&parse_expr("sin(x)").unwrap()) {
            Err(ExprError::Fragment { node }) => assert_eq!(node, "sin(x)"),
            other => panic!("{other:?}"),
        }
        assert!(canonicalize(&parse_expr("2*x").unwrap()).is_err());
        assert!(canonicalize(&parse_expr("0*x").unwrap()).is_err());
    }

    #[test]
    fn negative_powers_of_parameters_are_outside() {
        assert!(canonicalize(&parse_expr("1/a").unwrap()).is_err());
        assert!(canonicalize(&parse_expr("1/(J+J')").unwrap()).is_err());
        assert!(canonicalize(&parse_expr("1/0").unwrap()).is_err());
    }

    #[test]
    fn rational_powers_of_constants() {
        assert_eq!(canon("(2/3)^(-2)"), canon("9/4"));
        assert_eq!(canon("(J^2)^(1/2)"), canon("J"));
    }

    #[test]
    fn affine_exponents_combine() {
        assert_eq!(canon("J^alpha*J^(1-alpha-gamma)*J^gamma"), canon("J"));
    }

    #[test]
    fn binomial_expansion() {
        assert_eq!(canon("(a+J)^2"), canon("a^2 + 2*a*J + J^2"));
    }

    #[test]
    fn degree_filtering() {
        let p = canon("a*J' + a^2*J'' + J + 3*a");
        assert_eq!(p.max_degree("a"), 2);
        assert_eq!(p.degree_part("a", 1), canon("a*J' + 3*a"));
        assert_eq!(p.degree_part("a", 0), canon("J"));
    }

    #[test]
    fn split_linear_isolates_cofactor() {
        let p = canon("J*psi'' + J'*psi' + 2*J*psi + psi^2");
        let (cof, rest) = p.split_linear(FuncSym::new(FuncName::Psi, 2));
        assert_eq!(cof, canon("J"));
        assert_eq!(rest, canon("J'*psi' + 2*J*psi + psi^2"));
    }

    #[test]
    fn to_expr_round_trips() {
        let p = canon("alpha*gamma*J'^2/J - (1/2)*(alpha+gamma)*J'' + 3");
        assert_eq!(canonicalize(&p.to_expr()).unwrap(), p);
    }
}
