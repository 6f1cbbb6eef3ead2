//! Small dense linear-algebra helpers.
//!
//! The symmetric eigen-solver here is a cyclic Jacobi iteration. Matrices in
//! this crate are tiny ((m+1)×(m+1) moment matrices and (mq)×(mq) covariance
//! estimates), where Jacobi is unconditionally stable and bit-reproducible.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Eigen-decomposition `A = V diag(values) Vᵀ` of a real symmetric matrix.
///
/// `values` are ascending and `vectors` holds the matching unit eigenvectors
/// as columns. Equal eigenvalues keep the order of the columns in which the
/// iteration left them.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymmetricEigen {
    /// Cyclic Jacobi decomposition. Only the upper triangle of `a` is read.
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let mut m = a.clone();
        for i in 0..n {
            for j in 0..i {
                m[(i, j)] = m[(j, i)];
            }
        }
        let mut v = DMatrix::<f64>::identity(n, n);
        let mut d: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
        let mut b = d.clone();
        let mut z = vec![0.0; n];

        let mut converged = n < 2;
        for sweep in 0..MAX_SWEEPS {
            let off: f64 = (0..n).flat_map(|p| ((p + 1)..n).map(move |q| (p, q))).map(|(p, q)| m[(p, q)].abs()).sum();
            if off == 0.0 {
                converged = true;
                break;
            }
            // small rotations are skipped during the first sweeps only
            let thresh = if sweep < 3 { 0.2 * off / (n * n) as f64 } else { 0.0 };
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    let apq = m[(p, q)];
                    let g = 100.0 * apq.abs();
                    if sweep > 3 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                        m[(p, q)] = 0.0;
                        continue;
                    }
                    if apq.abs() <= thresh {
                        continue;
                    }
                    let h = d[q] - d[p];
                    let t = if h.abs() + g == h.abs() {
                        apq / h
                    } else {
                        let theta = 0.5 * h / apq;
                        let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                        if theta < 0.0 {
                            -t
                        } else {
                            t
                        }
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let tau = s / (1.0 + c);
                    let h = t * apq;
                    z[p] -= h;
                    z[q] += h;
                    d[p] -= h;
                    d[q] += h;
                    m[(p, q)] = 0.0;
                    let rotate = |m: &mut DMatrix<f64>, i: usize, j: usize, k: usize, l: usize| {
                        let g = m[(i, j)];
                        let h = m[(k, l)];
                        m[(i, j)] = g - s * (h + g * tau);
                        m[(k, l)] = h + s * (g - h * tau);
                    };
                    for j in 0..p {
                        rotate(&mut m, j, p, j, q);
                    }
                    for j in (p + 1)..q {
                        rotate(&mut m, p, j, j, q);
                    }
                    for j in (q + 1)..n {
                        rotate(&mut m, p, j, q, j);
                    }
                    for j in 0..n {
                        rotate(&mut v, j, p, j, q);
                    }
                }
            }
            for p in 0..n {
                b[p] += z[p];
                d[p] = b[p];
                z[p] = 0.0;
            }
        }
        if !converged {
            return Err(Error::InvalidInput("Jacobi iteration did not converge".into()));
        }

        let mut order: Vec<usize> = (0..n).collect();
        // stable: ties keep the lower original column first
        order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
        let values = DVector::from_iterator(n, order.iter().map(|&i| d[i]));
        let mut vectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &v.column(src));
        }
        Ok(SymmetricEigen { values, vectors })
    }

    /// Ratio of the largest to the smallest eigenvalue; infinite when the
    /// smallest is not positive.
    pub fn condition_number(&self) -> f64 {
        let n = self.values.len();
        if n == 0 {
            return 1.0;
        }
        let lo = self.values[0];
        let hi = self.values[n - 1];
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    /// `xᵀ A⁻¹ x` evaluated through the spectral decomposition.
    pub fn inverse_quadratic_form(&self, x: &DVector<f64>) -> f64 {
        self.vectors
            .column_iter()
            .zip(self.values.iter())
            .map(|(u, &l)| {
                let c = u.dot(x);
                c * c / l
            })
            .sum()
    }
}

/// Flips `v` so that its largest-magnitude component is positive (ties go to
/// the lowest index).
pub fn canonical_sign(v: &mut DVector<f64>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Determinant of an arbitrary square matrix via LU.
pub fn det(a: &DMatrix<f64>) -> f64 {
    a.clone().lu().determinant()
}
