use std::collections::BTreeMap;

use super::SpectralError;
use crate::diffop::LinDiffOp;
use crate::hamiltonian::{effective_hamiltonian, SPACING};
use crate::lattice::{check_sign_definite, SymTridiag};
use crate::symexpr::{differentiate, expr_equal, Expr, FuncName, ProfileBinding};

/// Uniform grid with interior points `x_j = x0 + j h`, `j = 1..=m`, and
/// Dirichlet zeros at `j = 0` and `j = m + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x0: f64,
    pub h: f64,
    pub m: usize,
}

impl Grid {
    pub fn new(x0: f64, h: f64, m: usize) -> Result<Self, SpectralError> {
        if !(h > 0.0 && h.is_finite()) || !x0.is_finite() {
            return Err(SpectralError::InvalidGrid(format!("need finite x0 and h > 0, got x0 = {x0}, h = {h}")));
        }
        if m == 0 {
            return Err(SpectralError::InvalidGrid("need at least one interior point".into()));
        }
        Ok(Grid { x0, h, m })
    }

    /// Grid over the box of an `n`-site chain with spacing `a` and first site
    /// `x1`: walls at `x1 - a` and `x1 + n a`, step `a / refine`. Every chain
    /// site is a grid point.
    pub fn for_chain(x1: f64, a: f64, n: usize, refine: usize) -> Result<Self, SpectralError> {
        if refine == 0 {
            return Err(SpectralError::InvalidGrid("refine factor must be at least 1".into()));
        }
        Grid::new(x1 - a, a / refine as f64, (n + 1) * refine - 1)
    }

    pub fn point(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.h
    }

    pub fn right_wall(&self) -> f64 {
        self.point(self.m + 1)
    }

    fn interior(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.m).map(|j| self.point(j))
    }
}

/// Values of `e` at the interior grid points.
pub fn sample_on_grid(e: &Expr, b: &ProfileBinding, g: &Grid) -> Result<Vec<f64>, SpectralError> {
    let ev = b.evaluator(e)?;
    Ok(g.interior().map(|x| ev.at(x)).collect::<Result<_, _>>()?)
}

/// Three-point discretization of `c2 D² + c1 D + c0` with `c1 = c2'`, read
/// as `D∘c2∘D + c0`: row `j` is
/// `[p(x_j + h/2)(v_{j+1} - v_j) - p(x_j - h/2)(v_j - v_{j-1})] / h² + c0(x_j) v_j`
/// with `p = c2`.
pub fn discretize_operator(op: &LinDiffOp, b: &ProfileBinding, g: &Grid) -> Result<SymTridiag, SpectralError> {
    if let Some(order) = op.order().filter(|o| *o > 2) {
        return Err(SpectralError::OrderTooHigh(order));
    }
    let c2 = op.coefficient(2);
    let c1 = op.coefficient(1);
    if !expr_equal(&c1, &differentiate(&c2), Some(b))?.equal {
        return Err(SpectralError::NotDivergenceForm { c1: c1.to_string(), c2: c2.to_string() });
    }
    let mut diag = sample_on_grid(&op.coefficient(0), b, g)?;
    let h2 = g.h * g.h;
    let mids: Vec<f64> = (0..=g.m).map(|j| g.x0 + (j as f64 + 0.5) * g.h).collect();
    let p = if c2.is_zero() {
        vec![0.0; mids.len()]
    } else {
        let ev = b.evaluator(&c2)?;
        let p = mids.iter().map(|x| ev.at(*x)).collect::<Result<Vec<_>, _>>()?;
        check_sign_definite(&p, &mids).map_err(SpectralError::SignChange)?;
        p
    };
    for (j, d) in diag.iter_mut().enumerate() {
        *d -= (p[j] + p[j + 1]) / h2;
    }
    let off = p[1..g.m].iter().map(|v| v / h2).collect();
    Ok(SymTridiag::new(diag, off)?)
}

/// The hermitian effective Hamiltonian `a² D∘J∘D + V` on `g`, with
/// `V = (a²/2) J'' - a J' + 2J + ε` from symbolic derivatives of the profile.
pub fn discretize_effective(
    j_profile: &Expr,
    eps_profile: &Expr,
    a: f64,
    g: &Grid,
    params: &BTreeMap<String, f64>,
) -> Result<SymTridiag, SpectralError> {
    if !(a > 0.0 && g.h <= a) {
        return Err(SpectralError::InvalidGrid(format!("step {} must not exceed the spacing {a}", g.h)));
    }
    let mut b = ProfileBinding::new()
        .bind(FuncName::J, j_profile.clone())?
        .bind(FuncName::Eps, eps_profile.clone())?
        .with_interval(g.x0, g.right_wall());
    for (k, v) in params {
        b = b.with_param(k, *v);
    }
    let b = b.with_param(SPACING, a);
    discretize_operator(&effective_hamiltonian(&Expr::param(SPACING)), &b, g)
}
