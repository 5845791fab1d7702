use super::gaussian::GaussianBelief;
use crate::error::{Error, Result};

/// Inverse-variance fusion of two scalar Gaussians:
/// `m = (v_a·m_b + v_b·m_a)/(v_a+v_b)`, `v = v_a·v_b/(v_a+v_b)`.
pub fn fuse_scalar(m_a: f64, v_a: f64, m_b: f64, v_b: f64) -> Result<(f64, f64)> {
    if v_a < 0.0 || v_b < 0.0 || v_a.is_nan() || v_b.is_nan() {
        return Err(Error::InvalidInput(format!(
            "variances must be non-negative, got {v_a} and {v_b}"
        )));
    }
    match (v_a == 0.0, v_b == 0.0) {
        (true, true) if m_a == m_b => Ok((m_a, 0.0)),
        (true, true) => Err(Error::Inconsistent(m_a, m_b)),
        (true, false) => Ok((m_a, 0.0)),
        (false, true) => Ok((m_b, 0.0)),
        (false, false) => {
            let s = v_a + v_b;
            Ok(((v_a * m_b + v_b * m_a) / s, v_a * v_b / s))
        }
    }
}

/// Kalman fusion of two one-dimensional beliefs.
pub fn kf_fuse(a: &GaussianBelief, b: &GaussianBelief) -> Result<GaussianBelief> {
    if a.dim() != 1 || b.dim() != 1 {
        return Err(Error::ShapeMismatch {
            expected: "1-D beliefs".into(),
            got: format!("{}-D and {}-D", a.dim(), b.dim()),
        });
    }
    let (m, v) = fuse_scalar(a.mean1(), a.var1(), b.mean1(), b.var1())?;
    GaussianBelief::scalar(m, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(m: f64, v: f64) -> GaussianBelief {
        GaussianBelief::scalar(m, v).unwrap()
    }

    #[test]
    fn unbiased_pair() {
        let z = kf_fuse(&g(0.0, 400.0), &g(0.0, 100.0)).unwrap();
        assert_eq!((z.mean1(), z.var1()), (0.0, 80.0));
    }

    #[test]
    fn biased_pair() {
        let z = kf_fuse(&g(0.0, 400.0), &g(50.0, 100.0)).unwrap();
        assert!((z.mean1() - 40.0).abs() < 1e-12);
        assert!((z.var1() - 80.0).abs() < 1e-12);
    }

    #[test]
    fn identical_pair_halves_variance() {
        let z = kf_fuse(&g(3.5, 2.0), &g(3.5, 2.0)).unwrap();
        assert_eq!((z.mean1(), z.var1()), (3.5, 1.0));
    }

    #[test]
    fn zero_variance_conflict() {
        assert!(matches!(
            kf_fuse(&g(0.0, 0.0), &g(1.0, 0.0)),
            Err(Error::Inconsistent(..))
        ));
        let z = kf_fuse(&g(2.0, 0.0), &g(1.0, 5.0)).unwrap();
        assert_eq!((z.mean1(), z.var1()), (2.0, 0.0));
    }

    proptest! {
        #[test]
        fn variance_shrinks_and_mean_between(
            ma in -1e3f64..1e3, mb in -1e3f64..1e3,
            va in 1e-6f64..1e6, vb in 1e-6f64..1e6,
        ) {
            let (m, v) = fuse_scalar(ma, va, mb, vb).unwrap();
            prop_assert!(v <= va.min(vb) * (1.0 + 1e-12));
            let tol = 1e-12 * (ma.abs() + mb.abs() + 1.0);
            prop_assert!(m >= ma.min(mb) - tol && m <= ma.max(mb) + tol);
        }

        #[test]
        fn commutative(
            ma in -1e3f64..1e3, mb in -1e3f64..1e3,
            va in 1e-6f64..1e6, vb in 1e-6f64..1e6,
        ) {
            let (m1, v1) = fuse_scalar(ma, va, mb, vb).unwrap();
            let (m2, v2) = fuse_scalar(mb, vb, ma, va).unwrap();
            prop_assert!((m1 - m2).abs() <= 1e-12 * (1.0 + m1.abs()));
            prop_assert!((v1 - v2).abs() <= 1e-12 * (1.0 + v1.abs()));
        }
    }
}
