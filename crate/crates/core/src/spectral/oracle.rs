use super::{norm2, SolverMeta, SpectralError, SpectrumResult};
use crate::lattice::SymTridiag;

pub const ORACLE_MAX_N: usize = 64;

const MAX_SWEEPS: usize = 100;

/// Full eigen-decomposition by cyclic Jacobi rotations on the dense matrix.
/// Test oracle only; independent of the Sturm machinery.
pub fn dense_eig_oracle(t: &SymTridiag) -> Result<SpectrumResult, SpectralError> {
    let n = t.n();
    if n > ORACLE_MAX_N {
        return Err(SpectralError::OracleTooLarge { n, max: ORACLE_MAX_N });
    }
    let mut a = t.to_dense();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        let off = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-3 * scale || off == 0.0 {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let tt = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (tt * tt + 1.0).sqrt();
                let s = tt * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i][i]).collect();
    let vectors: Vec<Vec<f64>> = order.iter().map(|&i| (0..n).map(|r| v[r][i]).collect()).collect();
    let residuals = eigenvalues
        .iter()
        .zip(&vectors)
        .map(|(l, x)| norm2(&t.matvec(x).iter().zip(x).map(|(p, q)| p - l * q).collect::<Vec<_>>()))
        .collect();
    Ok(SpectrumResult {
        meta: SolverMeta {
            method: "cyclic-jacobi",
            tol: f64::EPSILON,
            width: t.spectral_width(),
            pivot_guard: 0.0,
            max_bisection_steps: sweeps,
            inverse_iterations: Vec::new(),
            seed: None,
            unreduced: t.off().iter().all(|e| *e != 0.0),
            strictly_separated: eigenvalues.windows(2).all(|w| w[0] < w[1]),
        },
        eigenvalues,
        eigenvectors: Some(vectors),
        residuals,
    })
}
