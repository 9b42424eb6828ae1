use super::{canonicalize, CanonicalPoly, Evaluator, Expr, ExprError, ProfileBinding};

/// Number of sample points used by the probabilistic check.
pub const SAMPLE_POINTS: usize = 32;
/// Relative tolerance of the probabilistic check (unit floor on the scale).
pub const SAMPLE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum EqualityMethod {
    /// Canonical difference computed exactly; `difference` is that residual.
    Exact { difference: CanonicalPoly },
    /// Sampled at quasi-random points of the binding's interval.
    Sampled { points: usize, max_rel_dev: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub equal: bool,
    pub method: EqualityMethod,
}

impl Verdict {
    pub fn is_exact(&self) -> bool {
        matches!(self.method, EqualityMethod::Exact { .. })
    }
}

/// Deterministic low-discrepancy points in `(lo, hi)` from the golden-ratio
/// Weyl sequence.
pub(crate) fn sample_points(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    const STEP: f64 = 0.618_033_988_749_894_9;
    (1..=n).map(move |i| {
        let u = (0.5 + i as f64 * STEP).fract();
        lo + (hi - lo) * u
    })
}

pub(crate) fn relative_deviation(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Decides `e1 == e2`.
///
/// When both sides canonicalize the verdict is exact. Otherwise the binding
/// is required and the sides are compared at [`SAMPLE_POINTS`] points.
pub fn expr_equal(e1: &Expr, e2: &Expr, b: Option<&ProfileBinding>) -> Result<Verdict, ExprError> {
    if let (Ok(c1), Ok(c2)) = (canonicalize(e1), canonicalize(e2)) {
        let difference = c1.sub(&c2);
        return Ok(Verdict {
            equal: difference.is_zero(),
            method: EqualityMethod::Exact { difference },
        });
    }
    let b = b.ok_or(ExprError::Undecidable)?;
    let lhs: Evaluator<'_> = b.evaluator(e1)?;
    let rhs = b.evaluator(e2)?;
    let (lo, hi) = b.interval();
    let mut worst = 0.0f64;
    for x in sample_points(lo, hi, SAMPLE_POINTS) {
        let d = relative_deviation(lhs.at(x)?, rhs.at(x)?);
        worst = if d.is_nan() { f64::INFINITY } else { worst.max(d) };
    }
    Ok(Verdict {
        equal: worst <= SAMPLE_REL_TOL,
        method: EqualityMethod::Sampled { points: SAMPLE_POINTS, max_rel_dev: worst },
    })
}
