use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{norm2, SolverMeta, SpectralError, SpectrumResult};
use crate::lattice::SymTridiag;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_INVERSE_ITERATIONS: usize = 8;

/// Smallest pivot magnitude admitted by [`sturm_count`]:
/// `f64::MIN_POSITIVE * max(1, max off²)`.
pub fn pivot_guard(t: &SymTridiag) -> f64 {
    let m = t.off().iter().map(|e| e * e).fold(1.0f64, f64::max);
    f64::MIN_POSITIVE * m
}

fn sturm_count_guarded(t: &SymTridiag, lambda: f64, guard: f64) -> usize {
    let d = t.diag();
    let e = t.off();
    let mut count = 0;
    let mut q = d[0] - lambda;
    for i in 0..d.len() {
        if i > 0 {
            q = d[i] - lambda - e[i - 1] * e[i - 1] / q;
        }
        // a vanishing pivot is read as λ nudged downward, so eigenvalues
        // equal to λ are not counted
        if q.abs() < guard {
            q = guard;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Number of eigenvalues strictly below `lambda`, from the signs of the
/// pivots of `T - λI = LDLᵀ`.
pub fn sturm_count(t: &SymTridiag, lambda: f64) -> usize {
    sturm_count_guarded(t, lambda, pivot_guard(t))
}

fn check_tol(tol: f64) -> Result<(), SpectralError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(SpectralError::InvalidTolerance(tol))
    }
}

/// The `i`-th smallest eigenvalue (0-based) and the steps taken.
fn bisect(t: &SymTridiag, i: usize, lo: f64, hi: f64, width_goal: f64, guard: f64) -> (f64, usize) {
    let (mut lo, mut hi) = (lo, hi);
    let mut steps = 0;
    while hi - lo > width_goal {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count_guarded(t, mid, guard) > i {
            hi = mid;
        } else {
            lo = mid;
        }
        steps += 1;
    }
    (0.5 * (lo + hi), steps)
}

/// The `k` smallest eigenvalues in ascending order, each bracketed to a
/// width of at most `tol * width` (or to adjacent doubles).
pub fn lowest_eigenvalues(t: &SymTridiag, k: usize, tol: f64) -> Result<SpectrumResult, SpectralError> {
    let n = t.n();
    if k == 0 || k > n {
        return Err(SpectralError::KOutOfRange { k, n });
    }
    check_tol(tol)?;
    let (glo, ghi) = t.gershgorin();
    let width = ghi - glo;
    let pad = width.max(glo.abs()).max(ghi.abs()).max(f64::MIN_POSITIVE) * 4.0 * f64::EPSILON;
    let (lo, hi) = (glo - pad, ghi + pad);
    let guard = pivot_guard(t);
    let goal = tol * width;
    let found: Vec<(f64, usize)> = (0..k).into_par_iter().map(|i| bisect(t, i, lo, hi, goal, guard)).collect();
    let eigenvalues: Vec<f64> = found.iter().map(|p| p.0).collect();
    let unreduced = t.off().iter().all(|e| *e != 0.0);
    let strictly_separated = eigenvalues.windows(2).all(|w| w[0] < w[1]);
    Ok(SpectrumResult {
        meta: SolverMeta {
            method: "sturm-bisection",
            tol,
            width,
            pivot_guard: guard,
            max_bisection_steps: found.iter().map(|p| p.1).max().unwrap_or(0),
            inverse_iterations: Vec::new(),
            seed: None,
            unreduced,
            strictly_separated,
        },
        eigenvalues,
        eigenvectors: None,
        residuals: Vec::new(),
    })
}

/// LU factorization of a tridiagonal matrix with partial pivoting.
struct TridiagLu {
    d: Vec<f64>,
    dl: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    /// Factors `T - shift·I`; pivots smaller than `tiny` are replaced by it.
    fn new(t: &SymTridiag, shift: f64, tiny: f64) -> Self {
        let n = t.n();
        let mut d: Vec<f64> = t.diag().iter().map(|v| v - shift).collect();
        let mut dl = t.off().to_vec();
        let mut du = t.off().to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        for p in d.iter_mut() {
            if p.abs() < tiny {
                *p = if *p < 0.0 { -tiny } else { tiny };
            }
        }
        TridiagLu { d, dl, du, du2, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn residual(t: &SymTridiag, lambda: f64, v: &[f64]) -> f64 {
    let tv = t.matvec(v);
    norm2(&tv.iter().zip(v).map(|(a, b)| a - lambda * b).collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenvector {
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Inverse iteration for a converged eigenvalue `lambda`, from a random
/// start. Unit 2-norm, largest-magnitude entry positive.
pub fn eigenvector<R: Rng + ?Sized>(
    t: &SymTridiag,
    lambda: f64,
    tol: f64,
    rng: &mut R,
) -> Result<Eigenvector, SpectralError> {
    check_tol(tol)?;
    let n = t.n();
    let width = t.spectral_width();
    let target = tol * width.max(f64::MIN_POSITIVE);
    let scale = width.max(lambda.abs()).max(f64::MIN_POSITIVE);
    let lu = TridiagLu::new(t, lambda, f64::EPSILON * scale);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut r = f64::INFINITY;
    for it in 1..=MAX_INVERSE_ITERATIONS {
        lu.solve(&mut v);
        let nrm = norm2(&v);
        if !(nrm.is_finite() && nrm > 0.0) {
            break;
        }
        v.iter_mut().for_each(|x| *x /= nrm);
        r = residual(t, lambda, &v);
        if r <= target {
            let (imax, _) = v
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
            if v[imax] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            return Ok(Eigenvector { vector: v, residual: r, iterations: it });
        }
    }
    Err(SpectralError::NoConvergence { lambda, residual: r, iterations: MAX_INVERSE_ITERATIONS })
}

/// Lowest `k` eigenpairs. The vector for index `i` draws its start from
/// stream `i` of a ChaCha generator seeded with `seed`, so results do not
/// depend on scheduling.
pub fn eigenpairs(t: &SymTridiag, k: usize, tol: f64, seed: u64) -> Result<SpectrumResult, SpectralError> {
    let mut res = lowest_eigenvalues(t, k, tol)?;
    let vecs = res
        .eigenvalues
        .par_iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            eigenvector(t, lambda, tol, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    res.residuals = vecs.iter().map(|v| v.residual).collect();
    res.meta.inverse_iterations = vecs.iter().map(|v| v.iterations).collect();
    res.meta.seed = Some(seed);
    res.meta.method = "sturm-bisection+inverse-iteration";
    res.eigenvectors = Some(vecs.into_iter().map(|v| v.vector).collect());
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn uniform(n: usize, j: f64) -> SymTridiag {
        SymTridiag::new(vec![0.0; n], vec![j; n - 1]).unwrap()
    }

    #[test]
    fn sturm_count_examples() {
        let t = uniform(3, -1.0);
        assert_eq!(sturm_count(&t, -10.0), 0);
        assert_eq!(sturm_count(&t, 10.0), 3);
        assert_eq!(sturm_count(&t, 0.0), 1);
        assert_eq!(sturm_count(&t, f64::INFINITY), 3);
        assert_eq!(sturm_count(&t, f64::NEG_INFINITY), 0);
    }

    #[test]
    fn zero_pivot_is_guarded() {
        // λ = 0 hits d0 - λ = 0 exactly
        let t = SymTridiag::new(vec![0.0, 1.0], vec![1.0]).unwrap();
        let c = sturm_count(&t, 0.0);
        // eigenvalues (1 ± √5)/2
        assert_eq!(c, 1);
    }

    #[test]
    fn three_site_closed_form() {
        let r = lowest_eigenvalues(&uniform(3, -1.0), 3, 1e-14).unwrap();
        let want = [-2f64.sqrt(), 0.0, 2f64.sqrt()];
        for (a, b) in r.eigenvalues.iter().zip(want) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
        assert!(r.meta.unreduced && r.meta.strictly_separated);
    }

    #[test]
    fn uniform_hundred_site_chain() {
        let n = 100;
        let r = lowest_eigenvalues(&uniform(n, -1.0), 3, DEFAULT_TOL).unwrap();
        for (i, e) in r.eigenvalues.iter().enumerate() {
            let want = -2.0 * ((i + 1) as f64 * PI / (n + 1) as f64).cos();
            assert!((e - want).abs() <= DEFAULT_TOL * r.meta.width, "{e} vs {want}");
        }
    }

    #[test]
    fn k_out_of_range() {
        let t = uniform(4, -1.0);
        assert_eq!(lowest_eigenvalues(&t, 5, 1e-12).unwrap_err(), SpectralError::KOutOfRange { k: 5, n: 4 });
        assert!(lowest_eigenvalues(&t, 0, 1e-12).is_err());
        assert!(lowest_eigenvalues(&t, 2, 0.0).is_err());
    }

    #[test]
    fn one_by_one() {
        let t = SymTridiag::new(vec![2.5], vec![]).unwrap();
        let r = eigenpairs(&t, 1, 1e-12, 7).unwrap();
        assert_eq!(r.eigenvalues, vec![2.5]);
        assert_eq!(r.eigenvectors.unwrap()[0], vec![1.0]);
    }

    #[test]
    fn ground_state_is_a_sine() {
        let n = 50;
        let t = uniform(n, -1.0);
        let r = eigenpairs(&t, 2, 1e-12, 1).unwrap();
        let v = &r.eigenvectors.as_ref().unwrap()[0];
        let s: Vec<f64> = (1..=n).map(|i| (i as f64 * PI / (n + 1) as f64).sin()).collect();
        let ns = norm2(&s);
        for (a, b) in v.iter().zip(&s) {
            assert!((a - b / ns).abs() < 1e-10);
        }
        assert!(r.residuals.iter().all(|x| *x <= 1e-12 * r.meta.width));
        let dot: f64 = v.iter().zip(&r.eigenvectors.as_ref().unwrap()[1]).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-8);
    }

    #[test]
    fn seed_determines_vectors() {
        let t = SymTridiag::new(vec![0.3, -1.0, 2.0, 0.1], vec![0.5, -0.7, 1.1]).unwrap();
        let a = eigenpairs(&t, 4, 1e-12, 42).unwrap();
        let b = eigenpairs(&t, 4, 1e-12, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn split_matrix_reports_reducible() {
        let t = SymTridiag::new(vec![1.0, 1.0], vec![0.0]).unwrap();
        let r = lowest_eigenvalues(&t, 2, 1e-12).unwrap();
        assert!(!r.meta.unreduced && !r.meta.strictly_separated);
        assert!(r.eigenvalues.iter().all(|e| (e - 1.0).abs() < 1e-11));
    }
}
