//! Cyclic Jacobi eigensolver and the singular values derived from it.

use super::DenseMatrix;
use crate::error::{malformed, Error, Result};

/// σ_i counts towards the rank when σ_i > RANK_THRESHOLD · σ₁.
pub const RANK_THRESHOLD: f64 = 1e-6;

const CONVERGENCE: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix, sorted descending.
pub fn sym_eigenvalues(m: &DenseMatrix<f64>) -> Result<Vec<f64>> {
    if !m.is_square() {
        return malformed(format!("eigenvalues need a square matrix, got {}x{}", m.rows(), m.cols()));
    }
    let n = m.rows();
    let scale = m.entry_max_abs().max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (m.get(i, j) - m.get(j, i)).abs() > 1e-12 * scale {
                return malformed(format!("matrix is not symmetric at ({i},{j})"));
            }
        }
    }
    let mut a: Vec<f64> = m.entries().to_vec();
    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let target = CONVERGENCE * norm;

    let mut converged = norm == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off = off_diagonal_mass(&a, n);
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, n, p, q);
            }
        }
    }
    if !converged && off_diagonal_mass(&a, n) > target {
        return Err(Error::Numerical(format!("Jacobi did not converge within {MAX_SWEEPS} sweeps")));
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

fn off_diagonal_mass(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

fn rotate(a: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.is_infinite() { 0.0 } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
    if t == 0.0 {
        // |a_pq| is negligible next to the diagonal gap.
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        return;
    }
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    a[p * n + p] = app - t * apq;
    a[q * n + q] = aqq + t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        a[k * n + p] = new_kp;
        a[p * n + k] = new_kp;
        a[k * n + q] = new_kq;
        a[q * n + k] = new_kq;
    }
}

/// Singular values, descending, by one-sided (Hestenes) Jacobi on the
/// orientation with fewer columns. Length is `min(rows, cols)`.
///
/// Orthogonalising the columns directly keeps tiny singular values accurate,
/// which squaring into a Gram matrix would not.
pub fn singular_values(m: &DenseMatrix<f64>) -> Result<Vec<f64>> {
    let a = if m.cols() <= m.rows() { m.clone() } else { m.transpose() };
    let (rows, cols) = (a.rows(), a.cols());
    // Column-major copy so each column is contiguous.
    let mut u: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| *a.get(i, j)).collect()).collect();
    let fro_sq: f64 = u.iter().flatten().map(|v| v * v).sum();
    // Columns this small are zero up to round-off and are left alone.
    let negligible = (f64::EPSILON * f64::EPSILON) * fro_sq;
    // Dot products of length-`rows` vectors carry about rows·eps relative error.
    let ortho_tol = CONVERGENCE.max(rows as f64 * f64::EPSILON);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let (alpha, beta, gamma) =
                    u[p].iter().zip(&u[q]).fold((0.0, 0.0, 0.0), |(a, b, g), (x, y)| (a + x * x, b + y * y, g + x * y));
                if alpha <= negligible || beta <= negligible || gamma.abs() <= ortho_tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = u.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!("one-sided Jacobi did not converge within {MAX_SWEEPS} sweeps")));
    }
    let mut sv: Vec<f64> = u.iter().map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

pub fn spectral_norm(m: &DenseMatrix<f64>) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

pub fn trace_norm(m: &DenseMatrix<f64>) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}

/// Number of singular values above `RANK_THRESHOLD · σ₁`.
pub fn numerical_rank(singular: &[f64]) -> usize {
    let top = singular.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return 0;
    }
    singular.iter().filter(|&&s| s > RANK_THRESHOLD * top).count()
}
