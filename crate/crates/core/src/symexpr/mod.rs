//! Symbolic scalar expressions over the chain coordinate `x`.
//!
//! An [`Expr`] is a plain tree. Meaning is fixed by two back ends:
//! floating-point evaluation against a [`ProfileBinding`] and exact
//! canonicalization into a [`CanonicalPoly`], which decides equality on the
//! fragment without `x` and elementary calls.

mod canon;
mod diff;
mod display;
mod equal;
mod eval;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

pub use canon::{canonicalize, CanonicalPoly, Monomial, ParamMonomial, ParamPoly};
pub use diff::differentiate;
pub use equal::{expr_equal, EqualityMethod, Verdict, SAMPLE_POINTS, SAMPLE_REL_TOL};
pub use eval::{eval, Evaluator, ProfileBinding, SINGULARITY_THRESHOLD};
pub use parse::parse_expr;

/// Name of the constant that evaluates to π unless explicitly bound.
pub const PI_NAME: &str = "pi";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("evaluation singularity at x = {x}: {detail}")]
    Singularity { x: f64, detail: String },
    #[error("expression outside the canonicalizable fragment: `{node}`")]
    Fragment { node: String },
    #[error("binding for `{0}` must be a closed form in x without function symbols")]
    ImpureBinding(String),
    #[error("cannot decide equality: expressions are not canonicalizable and no binding was supplied")]
    Undecidable,
}

/// The closed set of abstract function symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FuncName {
    J,
    J1,
    J2,
    J3,
    Eps,
    Psi,
}

impl FuncName {
    pub const ALL: [FuncName; 6] = [
        FuncName::J,
        FuncName::J1,
        FuncName::J2,
        FuncName::J3,
        FuncName::Eps,
        FuncName::Psi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FuncName::J => "J",
            FuncName::J1 => "J1",
            FuncName::J2 => "J2",
            FuncName::J3 => "J3",
            FuncName::Eps => "eps",
            FuncName::Psi => "psi",
        }
    }

    pub fn from_name(name: &str) -> Option<FuncName> {
        FuncName::ALL.into_iter().find(|f| f.as_str() == name)
    }
}

impl fmt::Display for FuncName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A function symbol together with a derivative order: `J''` is `(J, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FuncSym {
    pub name: FuncName,
    pub order: u32,
}

impl FuncSym {
    pub fn new(name: FuncName, order: u32) -> Self {
        FuncSym { name, order }
    }

    pub fn derivative(self) -> Self {
        FuncSym { name: self.name, order: self.order + 1 }
    }
}

impl fmt::Display for FuncSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name.as_str())?;
        for _ in 0..self.order {
            f.write_str("'")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elementary {
    Sin,
    Cos,
    Exp,
}

impl Elementary {
    pub fn as_str(self) -> &'static str {
        match self {
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Exp => "exp",
        }
    }

    pub fn from_name(name: &str) -> Option<Elementary> {
        match name {
            "sin" => Some(Elementary::Sin),
            "cos" => Some(Elementary::Cos),
            "exp" => Some(Elementary::Exp),
            _ => None,
        }
    }

    pub fn apply(self, v: f64) -> f64 {
        match self {
            Elementary::Sin => v.sin(),
            Elementary::Cos => v.cos(),
            Elementary::Exp => v.exp(),
        }
    }
}

/// Exponent of a power node: a rational constant plus a rational linear
/// combination of named parameters, e.g. `1 - alpha - gamma`.
///
/// Integer exponents are the common case. The affine part houses the von Roos
/// powers `J^alpha`, whose exponents only ever combine additively.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Exponent {
    constant: BigRational,
    params: BTreeMap<String, BigRational>,
}

impl Exponent {
    pub fn zero() -> Self {
        Exponent { constant: BigRational::zero(), params: BTreeMap::new() }
    }

    pub fn integer(n: i64) -> Self {
        Exponent::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn rational(r: BigRational) -> Self {
        Exponent { constant: r, params: BTreeMap::new() }
    }

    pub fn param(name: &str) -> Self {
        let mut params = BTreeMap::new();
        params.insert(name.to_string(), BigRational::one());
        Exponent { constant: BigRational::zero(), params }
    }

    pub fn constant(&self) -> &BigRational {
        &self.constant
    }

    pub fn params(&self) -> &BTreeMap<String, BigRational> {
        &self.params
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.params.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.constant.is_one() && self.params.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.params.is_empty()
    }

    pub fn as_integer(&self) -> Option<i64> {
        if self.params.is_empty() && self.constant.is_integer() {
            self.constant.to_integer().to_i64()
        } else {
            None
        }
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        let mut out = self.clone();
        out.constant += &other.constant;
        for (name, c) in &other.params {
            let slot = out.params.entry(name.clone()).or_insert_with(BigRational::zero);
            *slot += c;
            if slot.is_zero() {
                out.params.remove(name);
            }
        }
        out
    }

    pub fn scale(&self, s: &BigRational) -> Exponent {
        if s.is_zero() {
            return Exponent::zero();
        }
        Exponent {
            constant: &self.constant * s,
            params: self.params.iter().map(|(k, v)| (k.clone(), v * s)).collect(),
        }
    }

    /// Product of two exponents, defined while the result stays affine.
    pub fn mul(&self, other: &Exponent) -> Option<Exponent> {
        if self.is_constant() {
            Some(other.scale(&self.constant))
        } else if other.is_constant() {
            Some(self.scale(&other.constant))
        } else {
            None
        }
    }

    pub fn neg(&self) -> Exponent {
        self.scale(&-BigRational::one())
    }

    /// Interprets an expression tree as an affine exponent, if it is one.
    pub fn from_expr(e: &Expr) -> Option<Exponent> {
        match e {
            Expr::Const(c) => Some(Exponent::rational(c.clone())),
            Expr::Param(p) => Some(Exponent::param(p)),
            Expr::Sum(terms) => {
                let mut acc = Exponent::zero();
                for t in terms {
                    acc = acc.add(&Exponent::from_expr(t)?);
                }
                Some(acc)
            }
            Expr::Product(factors) => {
                let mut acc = Exponent::integer(1);
                for f in factors {
                    acc = acc.mul(&Exponent::from_expr(f)?)?;
                }
                Some(acc)
            }
            Expr::Pow(base, exp) => {
                let b = Exponent::from_expr(base)?;
                let n = exp.as_integer()?;
                if !b.is_constant() {
                    return if n == 1 { Some(b) } else { None };
                }
                rational_pow(&b.constant, n).map(Exponent::rational)
            }
            _ => None,
        }
    }

    pub fn to_expr(&self) -> Expr {
        let mut terms = Vec::new();
        if !self.constant.is_zero() {
            terms.push(Expr::Const(self.constant.clone()));
        }
        for (name, c) in &self.params {
            terms.push(Expr::mul(vec![Expr::Const(c.clone()), Expr::Param(name.clone())]));
        }
        Expr::add(terms)
    }

    /// Numeric value with parameters looked up by `lookup`.
    pub fn value(&self, lookup: impl Fn(&str) -> Option<f64>) -> Result<f64, ExprError> {
        let mut v = rational_to_f64(&self.constant);
        for (name, c) in &self.params {
            let p = lookup(name).ok_or_else(|| ExprError::Unbound(name.clone()))?;
            v += rational_to_f64(c) * p;
        }
        Ok(v)
    }
}

/// Scalar expression tree.
///
/// Subtraction is stored as a sum with a `-1` product, division as a power
/// with exponent `-1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(BigRational),
    X,
    Param(String),
    Func(FuncSym),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, Exponent),
    Call(Elementary, Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(BigRational::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(BigRational::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Expr {
        Expr::Const(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    pub fn func(name: FuncName, order: u32) -> Expr {
        Expr::Func(FuncSym::new(name, order))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    /// Sum with flattening, constant folding and zero elimination.
    pub fn add(terms: Vec<Expr>) -> Expr {
        let mut constant = BigRational::zero();
        let mut rest = Vec::with_capacity(terms.len());
        let mut stack: Vec<Expr> = terms.into_iter().rev().collect();
        while let Some(t) = stack.pop() {
            match t {
                Expr::Const(c) => constant += c,
                Expr::Sum(inner) => stack.extend(inner.into_iter().rev()),
                other => rest.push(other),
            }
        }
        if !constant.is_zero() {
            rest.push(Expr::Const(constant));
        }
        match rest.len() {
            0 => Expr::zero(),
            1 => rest.pop().unwrap(),
            _ => Expr::Sum(rest),
        }
    }

    /// Product with flattening and constant folding; the folded constant
    /// leads.
    pub fn mul(factors: Vec<Expr>) -> Expr {
        let mut constant = BigRational::one();
        let mut rest = Vec::with_capacity(factors.len());
        let mut stack: Vec<Expr> = factors.into_iter().rev().collect();
        while let Some(f) = stack.pop() {
            match f {
                Expr::Const(c) => {
                    if c.is_zero() {
                        return Expr::zero();
                    }
                    constant *= c;
                }
                Expr::Product(inner) => stack.extend(inner.into_iter().rev()),
                other => rest.push(other),
            }
        }
        if rest.is_empty() {
            return Expr::Const(constant);
        }
        if !constant.is_one() {
            rest.insert(0, Expr::Const(constant));
        }
        if rest.len() == 1 {
            rest.pop().unwrap()
        } else {
            Expr::Product(rest)
        }
    }

    pub fn pow(base: Expr, exp: Exponent) -> Expr {
        if exp.is_zero() {
            return Expr::one();
        }
        if exp.is_one() {
            return base;
        }
        if let (Expr::Const(c), Some(n)) = (&base, exp.as_integer()) {
            if let Some(r) = rational_pow(c, n) {
                return Expr::Const(r);
            }
        }
        Expr::Pow(Box::new(base), exp)
    }

    pub fn powi(base: Expr, n: i64) -> Expr {
        Expr::pow(base, Exponent::integer(n))
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::mul(vec![Expr::int(-1), e])
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::add(vec![a, Expr::neg(b)])
    }

    pub fn call(f: Elementary, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    /// True when `x` or an elementary call occurs anywhere in the tree.
    pub fn depends_on_x(&self) -> bool {
        match self {
            Expr::X | Expr::Call(..) => true,
            Expr::Const(_) | Expr::Param(_) | Expr::Func(_) => false,
            Expr::Sum(v) | Expr::Product(v) => v.iter().any(Expr::depends_on_x),
            Expr::Pow(b, _) => b.depends_on_x(),
        }
    }

    pub fn contains_func(&self) -> bool {
        match self {
            Expr::Func(_) => true,
            Expr::Const(_) | Expr::Param(_) | Expr::X => false,
            Expr::Sum(v) | Expr::Product(v) => v.iter().any(Expr::contains_func),
            Expr::Pow(b, _) => b.contains_func(),
            Expr::Call(_, a) => a.contains_func(),
        }
    }

    /// Names of all parameters, including those inside exponents.
    pub fn param_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Param(p) => {
                out.insert(p.clone());
            }
            Expr::Const(_) | Expr::X | Expr::Func(_) => {}
            Expr::Sum(v) | Expr::Product(v) => v.iter().for_each(|t| t.collect_params(out)),
            Expr::Pow(b, e) => {
                b.collect_params(out);
                out.extend(e.params.keys().cloned());
            }
            Expr::Call(_, a) => a.collect_params(out),
        }
    }

    /// Replaces every `name^(k)` by the k-th derivative of `replacement`.
    ///
    /// The substitution is a single pass: occurrences of `name` inside
    /// `replacement` are left alone.
    pub fn substitute_func(&self, name: FuncName, replacement: &Expr) -> Expr {
        let mut derivs = vec![replacement.clone()];
        self.substitute_with(name, &mut derivs)
    }

    fn substitute_with(&self, name: FuncName, derivs: &mut Vec<Expr>) -> Expr {
        match self {
            Expr::Func(f) if f.name == name => {
                while derivs.len() <= f.order as usize {
                    let next = differentiate(derivs.last().unwrap());
                    derivs.push(next);
                }
                derivs[f.order as usize].clone()
            }
            Expr::Const(_) | Expr::X | Expr::Param(_) | Expr::Func(_) => self.clone(),
            Expr::Sum(v) => Expr::add(v.iter().map(|t| t.substitute_with(name, derivs)).collect()),
            Expr::Product(v) => {
                Expr::mul(v.iter().map(|t| t.substitute_with(name, derivs)).collect())
            }
            Expr::Pow(b, e) => Expr::pow(b.substitute_with(name, derivs), e.clone()),
            Expr::Call(f, a) => Expr::call(*f, a.substitute_with(name, derivs)),
        }
    }

    /// Replaces a named parameter by an expression.
    ///
    /// Parameters occurring inside exponents are substituted only when the
    /// replacement is itself affine in parameters; otherwise they stay.
    pub fn substitute_param(&self, name: &str, replacement: &Expr) -> Expr {
        match self {
            Expr::Param(p) if p == name => replacement.clone(),
            Expr::Const(_) | Expr::X | Expr::Param(_) | Expr::Func(_) => self.clone(),
            Expr::Sum(v) => Expr::add(v.iter().map(|t| t.substitute_param(name, replacement)).collect()),
            Expr::Product(v) => {
                Expr::mul(v.iter().map(|t| t.substitute_param(name, replacement)).collect())
            }
            Expr::Pow(b, e) => {
                let base = b.substitute_param(name, replacement);
                let exp = match (e.params.get(name), Exponent::from_expr(replacement)) {
                    (Some(c), Some(r)) => {
                        let mut rest = e.clone();
                        rest.params.remove(name);
                        rest.add(&r.scale(c))
                    }
                    _ => e.clone(),
                };
                Expr::pow(base, exp)
            }
            Expr::Call(f, a) => Expr::call(*f, a.substitute_param(name, replacement)),
        }
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<FuncSym> for Expr {
    fn from(f: FuncSym) -> Self {
        Expr::Func(f)
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Integer power of a rational; `None` for a negative power of zero.
pub(crate) fn rational_pow(base: &BigRational, n: i64) -> Option<BigRational> {
    if n < 0 && base.is_zero() {
        return None;
    }
    let mag = n.unsigned_abs();
    let mut acc = BigRational::one();
    let mut sq = base.clone();
    let mut k = mag;
    while k > 0 {
        if k & 1 == 1 {
            acc *= &sq;
        }
        sq = &sq * &sq;
        k >>= 1;
    }
    if n < 0 {
        Some(acc.recip())
    } else {
        Some(acc)
    }
}

/// Exact rational from a finite float, going through its shortest decimal
/// representation so that `0.3` becomes `3/10`.
pub fn rational_from_f64(v: f64) -> Option<BigRational> {
    if !v.is_finite() {
        return None;
    }
    match parse_expr(&format!("{v:e}")).ok()? {
        Expr::Const(c) => Some(c),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smart_constructors_fold() {
        let e = Expr::add(vec![Expr::int(1), Expr::param("a"), Expr::int(-1)]);
        assert_eq!(e, Expr::param("a"));
        let p = Expr::mul(vec![Expr::int(2), Expr::X, Expr::ratio(1, 2)]);
        assert_eq!(p, Expr::X);
        assert!(Expr::mul(vec![Expr::X, Expr::zero()]).is_zero());
    }

    #[test]
    fn exponent_arithmetic() {
        let alpha = Exponent::param("alpha");
        let gamma = Exponent::param("gamma");
        let beta = Exponent::integer(1).add(&alpha.neg()).add(&gamma.neg());
        let total = alpha.add(&beta).add(&gamma);
        assert_eq!(total.as_integer(), Some(1));
        assert!(alpha.mul(&gamma).is_none());
    }

    #[test]
    fn substitute_func_differentiates() {
        let e = Expr::func(FuncName::J, 1);
        let prod = Expr::mul(vec![Expr::func(FuncName::J1, 0), Expr::func(FuncName::J2, 0)]);
        let out = canonicalize(&e.substitute_func(FuncName::J, &prod)).unwrap();
        let want = canonicalize(&parse_expr("J1'*J2 + J1*J2'").unwrap()).unwrap();
        assert_eq!(out, want);
    }

    #[test]
    fn parameter_names() {
        let e = parse_expr("-(1+0.2*cos(2*pi*x/L)) * J^alpha").unwrap();
        let names: Vec<String> = e.param_names().into_iter().collect();
        assert_eq!(names, ["L", "alpha", "pi"]);
    }

    #[test]
    fn rational_from_decimal() {
        assert_eq!(
            rational_from_f64(0.3).unwrap(),
            BigRational::new(BigInt::from(3), BigInt::from(10))
        );
        assert_eq!(
            rational_from_f64(-0.7).unwrap(),
            BigRational::new(BigInt::from(-7), BigInt::from(10))
        );
    }
}
