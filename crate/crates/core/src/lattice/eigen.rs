use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector of `values[i]`.
    pub vectors: DMatrix<f64>,
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi rotations until the off-diagonal mass is below
/// `1e-30·‖A‖²_F`.
pub fn jacobi_eigen(matrix: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(Error::validation("eigensolver needs a square matrix"));
    }
    let mut a = matrix.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let total: f64 = a.iter().map(|x| x * x).sum();
    let off = |a: &DMatrix<f64>| {
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += 2.0 * a[(i, j)] * a[(i, j)];
            }
        }
        s
    };

    let mut sweeps = 0;
    while off(&a) > 1e-30 * total {
        sweeps += 1;
        if sweeps > MAX_SWEEPS {
            return Err(Error::Singular("Jacobi iteration did not converge"));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(p, k)] = a[(k, p)];
                    a[(k, q)] = s * akp + c * akq;
                    a[(q, k)] = a[(k, q)];
                }
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymmetricEigen { values, vectors })
}
