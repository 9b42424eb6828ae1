//! The exact tight-binding chain as a symmetric tridiagonal matrix.
//!
//! Sites `1..=N` sit at `x_i = x1 + (i-1) a` with hard walls beyond both ends,
//! so with the default `x1 = a` the chain fills the box `(0, (N+1) a)`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::hamiltonian::SiteConvention;
use crate::symexpr::{Expr, ExprError, FuncName, ProfileBinding};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("invalid chain: {0}")]
    Invalid(String),
    #[error("hopping profile {0}")]
    HoppingSign(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self, LatticeError> {
        if diag.is_empty() {
            return Err(LatticeError::Invalid("matrix must have at least one row".into()));
        }
        if off.len() + 1 != diag.len() {
            return Err(LatticeError::Invalid(format!(
                "{} diagonal entries need {} off-diagonal entries, got {}",
                diag.len(),
                diag.len() - 1,
                off.len()
            )));
        }
        if diag.iter().chain(off.iter()).any(|v| !v.is_finite()) {
            return Err(LatticeError::Invalid("non-finite matrix entry".into()));
        }
        Ok(SymTridiag { diag, off })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Gershgorin enclosure `(lo, hi)` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Width of the Gershgorin interval, the scale for solver tolerances.
    pub fn spectral_width(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        hi - lo
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// Adds `shift[i]` to each diagonal entry.
    pub fn add_diagonal(&mut self, shift: &[f64]) {
        for (d, s) in self.diag.iter_mut().zip(shift) {
            *d += s;
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.diag[i];
            if i + 1 < n {
                m[i][i + 1] = self.off[i];
                m[i + 1][i] = self.off[i];
            }
        }
        m
    }
}

/// Description of an inhomogeneous chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub n: usize,
    pub a: f64,
    pub j_profile: Expr,
    pub eps_profile: Expr,
    pub convention: SiteConvention,
    pub x1: f64,
    /// Values for parameters appearing in the profiles (e.g. `L`).
    pub params: BTreeMap<String, f64>,
}

impl ChainSpec {
    /// Chain with the left convention and the first site at `x1 = a`.
    pub fn new(n: usize, a: f64, j_profile: Expr, eps_profile: Expr) -> Self {
        ChainSpec {
            n,
            a,
            j_profile,
            eps_profile,
            convention: SiteConvention::Left,
            x1: a,
            params: BTreeMap::new(),
        }
    }

    pub fn with_convention(mut self, c: SiteConvention) -> Self {
        self.convention = c;
        self
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn site(&self, i: usize) -> f64 {
        self.x1 + (i as f64 - 1.0) * self.a
    }

    /// Total box length `(N+1) a`.
    pub fn length(&self) -> f64 {
        (self.n as f64 + 1.0) * self.a
    }

    pub fn binding(&self) -> Result<ProfileBinding, ExprError> {
        let mut b = ProfileBinding::new()
            .bind(FuncName::J, self.j_profile.clone())?
            .bind(FuncName::Eps, self.eps_profile.clone())?
            .with_interval(self.x1 - self.a, self.x1 + self.n as f64 * self.a);
        for (k, v) in &self.params {
            b = b.with_param(k, *v);
        }
        Ok(b)
    }
}

/// Checks that every sample is nonzero and of one sign.
pub(crate) fn check_sign_definite(values: &[f64], positions: &[f64]) -> Result<(), String> {
    let Some(first) = values.first() else { return Ok(()) };
    let sign = first.signum();
    for (v, x) in values.iter().zip(positions) {
        if *v == 0.0 || v.signum() != sign {
            return Err(format!("changes sign or vanishes at x = {x} (value {v})"));
        }
    }
    Ok(())
}

/// `diag[i] = ε(x_i)`, `off[i] = J` at the convention's position between
/// sites `i` and `i+1`.
pub fn build_chain(s: &ChainSpec) -> Result<SymTridiag, LatticeError> {
    if s.n == 0 {
        return Err(LatticeError::Invalid("N must be at least 1".into()));
    }
    if !(s.a > 0.0 && s.a.is_finite()) {
        return Err(LatticeError::Invalid(format!("spacing must be positive, got {}", s.a)));
    }
    let b = s.binding()?;
    let eps = b.evaluator(&Expr::func(FuncName::Eps, 0))?;
    let hop = b.evaluator(&Expr::func(FuncName::J, 0))?;
    let diag = (1..=s.n).map(|i| eps.at(s.site(i))).collect::<Result<Vec<_>, _>>()?;
    let shift = s.convention.offset_fraction() * s.a;
    let positions: Vec<f64> = (1..s.n).map(|i| s.site(i) + shift).collect();
    let off = positions.iter().map(|x| hop.at(*x)).collect::<Result<Vec<_>, _>>()?;
    check_sign_definite(&off, &positions).map_err(LatticeError::HoppingSign)?;
    SymTridiag::new(diag, off)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::parse_expr;

    fn e(t: &str) -> Expr {
        parse_expr(t).unwrap()
    }

    #[test]
    fn uniform_three_site_chain() {
        let t = build_chain(&ChainSpec::new(3, 1.0, e("-1"), e("0"))).unwrap();
        assert_eq!(t.diag(), &[0.0, 0.0, 0.0]);
        assert_eq!(t.off(), &[-1.0, -1.0]);
    }

    #[test]
    fn single_site() {
        let t = build_chain(&ChainSpec::new(1, 0.5, e("-1"), e("3*x"))).unwrap();
        assert_eq!(t.diag(), &[1.5]);
        assert!(t.off().is_empty());
    }

    #[test]
    fn linear_profile_left_sampling() {
        let spec = ChainSpec::new(4, 0.25, e("-(1+x)"), e("0"));
        let t = build_chain(&spec).unwrap();
        let want: Vec<f64> = (1..4).map(|i| -(1.0 + spec.site(i))).collect();
        assert_eq!(t.off(), want.as_slice());
    }

    #[test]
    fn conventions_shift_sampling() {
        let base = ChainSpec::new(4, 0.25, e("-(1+x)"), e("0"));
        let right = build_chain(&base.clone().with_convention(SiteConvention::Right)).unwrap();
        let mid = build_chain(&base.clone().with_convention(SiteConvention::Midpoint)).unwrap();
        for i in 1..4 {
            assert_eq!(right.off()[i - 1], -(1.0 + base.site(i + 1)));
            assert!((mid.off()[i - 1] + (1.0 + base.site(i) + 0.125)).abs() < 1e-15);
        }
    }

    #[test]
    fn profile_parameters_bind() {
        let spec = ChainSpec::new(5, 0.2, e("-(1+0.2*cos(2*pi*x/L))"), e("0")).with_param("L", 1.2);
        let t = build_chain(&spec).unwrap();
        let want = -(1.0 + 0.2 * (2.0 * std::f64::consts::PI * 0.2 / 1.2).cos());
        assert!((t.off()[0] - want).abs() < 1e-15);
    }

    #[test]
    fn sign_change_is_rejected() {
        let err = build_chain(&ChainSpec::new(10, 0.1, e("x - 0.5"), e("0"))).unwrap_err();
        assert!(matches!(err, LatticeError::HoppingSign(_)), "{err}");
    }

    #[test]
    fn invalid_inputs() {
        assert!(build_chain(&ChainSpec::new(0, 1.0, e("-1"), e("0"))).is_err());
        assert!(build_chain(&ChainSpec::new(3, -1.0, e("-1"), e("0"))).is_err());
        assert!(matches!(
            build_chain(&ChainSpec::new(3, 1.0, e("-L"), e("0"))),
            Err(LatticeError::Expr(ExprError::Unbound(_)))
        ));
        assert!(SymTridiag::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(SymTridiag::new(vec![f64::NAN], vec![]).is_err());
    }

    #[test]
    fn gershgorin_and_dense() {
        let t = SymTridiag::new(vec![0.0, 1.0, 0.0], vec![-1.0, 2.0]).unwrap();
        assert_eq!(t.gershgorin(), (-2.0, 4.0));
        assert_eq!(t.to_dense()[1], vec![-1.0, 1.0, 2.0]);
        assert_eq!(t.matvec(&[1.0, 1.0, 1.0]), vec![-1.0, 2.0, 2.0]);
    }
}
