//! Small dense matrix helpers (dimension <= 8) on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Largest dimension the estimators are designed for.
pub const MAX_DIM: usize = 8;

fn frobenius(m: &Matrix) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Checks squareness and symmetry within `1e-9` relative to the matrix norm.
pub fn check_symmetric(cov: &Matrix) -> Result<()> {
    if !cov.is_square() {
        return Err(Error::ShapeMismatch {
            expected: "square covariance".into(),
            got: format!("{}x{}", cov.nrows(), cov.ncols()),
        });
    }
    let scale = frobenius(cov).max(f64::MIN_POSITIVE);
    let asym = frobenius(&(cov - cov.transpose()));
    if asym > 1e-9 * scale {
        return Err(Error::InvalidInput(format!(
            "covariance is not symmetric (relative asymmetry {:e})",
            asym / scale
        )));
    }
    Ok(())
}

/// Returns `L` with `L Lᵀ = cov`.
///
/// Cholesky is tried first; semidefinite matrices fall back to a symmetric
/// eigendecomposition with eigenvalues above `-1e-9 · trace` clamped to zero.
pub fn psd_factor(cov: &Matrix) -> Result<Matrix> {
    check_symmetric(cov)?;
    if cov.nrows() > MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "dimension {} exceeds supported maximum {MAX_DIM}",
            cov.nrows()
        )));
    }
    if let Some(ch) = cov.clone().cholesky() {
        return Ok(ch.l());
    }
    let sym = (cov + cov.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let tol = 1e-9 * cov.trace().abs().max(f64::MIN_POSITIVE);
    let min = eig.eigenvalues.min();
    if min < -tol {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let sqrt_vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    Ok(&eig.eigenvectors * Matrix::from_diagonal(&sqrt_vals))
}

/// Inverse of a symmetric positive-definite matrix.
pub fn spd_inverse(m: &Matrix) -> Option<Matrix> {
    m.clone().cholesky().map(|c| c.inverse())
}

/// Symmetrises `m` in place, removing round-off asymmetry after updates.
pub fn symmetrize(m: &mut Matrix) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_reproduces_pd_matrix() {
        let cov = Matrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let l = psd_factor(&cov).unwrap();
        assert!((&l * l.transpose() - &cov).abs().max() < 1e-12);
    }

    #[test]
    fn factor_handles_semidefinite() {
        // rank one
        let v = Vector::from_vec(vec![1.0, 2.0, -1.0]);
        let cov = &v * v.transpose();
        let l = psd_factor(&cov).unwrap();
        assert!((&l * l.transpose() - &cov).abs().max() < 1e-10);
    }

    #[test]
    fn zero_covariance_factors_to_zero() {
        let l = psd_factor(&Matrix::zeros(2, 2)).unwrap();
        assert_eq!(l, Matrix::zeros(2, 2));
    }

    #[test]
    fn rejects_indefinite() {
        let cov = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(psd_factor(&cov), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn rejects_asymmetric() {
        let cov = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(psd_factor(&cov).is_err());
    }
}
