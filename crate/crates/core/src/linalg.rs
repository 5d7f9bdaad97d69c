//! Dense symmetric-definite linear algebra used by the mode solver.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Lower Cholesky factor L with `a = L Lᵀ`.
///
/// Fails with [`Error::IllConditioned`] at the first non-positive pivot. The
/// pivot reported is the offending diagonal value before the square root.
pub fn cholesky_lower(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{:?} is not square",
            a.shape()
        )));
    }
    let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > f64::EPSILON * scale) || !d.is_finite() {
            return Err(Error::IllConditioned { index: j, pivot: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Eigenpairs of the pencil `k v = λ m v` with `m` symmetric positive
/// definite, sorted by ascending λ. Eigenvectors are m-orthonormal.
pub fn generalized_symmetric_eigen(
    k: &DMatrix<f64>,
    m: &DMatrix<f64>,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if k.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "pencil shapes {:?} and {:?}",
            k.shape(),
            m.shape()
        )));
    }
    let l = cholesky_lower(m)?;
    // A = L⁻¹ K L⁻ᵀ
    let x = l
        .solve_lower_triangular(k)
        .ok_or(Error::IllConditioned {
            index: 0,
            pivot: 0.0,
        })?;
    let mut a = l
        .solve_lower_triangular(&x.transpose())
        .ok_or(Error::IllConditioned {
            index: 0,
            pivot: 0.0,
        })?;
    a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let lt = l.transpose();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let y: DVector<f64> = eig.eigenvectors.column(i).into_owned();
        let v = lt
            .solve_upper_triangular(&y)
            .ok_or(Error::IllConditioned {
                index: 0,
                pivot: 0.0,
            })?;
        vectors.set_column(col, &v);
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_reconstructs() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 2.0, 0.4, 2.0, 5.0, 1.0, 0.4, 1.0, 3.0]);
        let l = cholesky_lower(&a).unwrap();
        let back = &l * l.transpose();
        assert!((back - &a).amax() < 1e-14);
        for i in 0..3 {
            for j in i + 1..3 {
                assert_eq!(l[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn cholesky_names_failing_pivot() {
        // second leading minor is 1·1 − 1·1 = 0
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        match cholesky_lower(&a) {
            Err(Error::IllConditioned { index, pivot }) => {
                assert_eq!(index, 1);
                assert!(pivot.abs() < 1e-15);
            }
            other => panic!("expected failure, got {other:?}"),
        }
        let neg = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            cholesky_lower(&neg),
            Err(Error::IllConditioned { index: 0, .. })
        ));
    }

    #[test]
    fn pencil_residual_and_orthonormality() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let k = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 3.0, 2.0]));
        let (vals, vecs) = generalized_symmetric_eigen(&k, &m).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        for (i, &lam) in vals.iter().enumerate() {
            let v = vecs.column(i);
            let r = &k * v - &m * v * lam;
            assert!(r.norm() < 1e-12 * (&k * v).norm());
            for j in 0..3 {
                let g = (v.transpose() * &m * vecs.column(j))[(0, 0)];
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-12);
            }
        }
    }
}
