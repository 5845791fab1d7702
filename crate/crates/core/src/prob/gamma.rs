use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};

/// Gamma distribution in shape/rate form: mean `shape/rate`, variance `shape/rate²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSpec {
    shape: f64,
    rate: f64,
}

impl GammaSpec {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "gamma parameters must be positive, got shape={shape} rate={rate}"
            )));
        }
        Ok(Self { shape, rate })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn variance(&self) -> f64 {
        self.shape / (self.rate * self.rate)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        gamma_sample(self, rng)
    }

    /// Log density; `-inf` outside the support.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.shape * self.rate.ln() - statrs::function::gamma::ln_gamma(self.shape) + (self.shape - 1.0) * x.ln()
            - self.rate * x
    }
}

pub fn gamma_sample<R: Rng + ?Sized>(spec: &GammaSpec, rng: &mut R) -> f64 {
    // rand_distr parameterises by scale = 1/rate.
    let dist = Gamma::new(spec.shape, 1.0 / spec.rate).expect("validated in GammaSpec::new");
    loop {
        let x = dist.sample(rng);
        if x > 0.0 {
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::RngStream;

    #[test]
    fn shape3_rate2_moments() {
        let spec = GammaSpec::new(3.0, 2.0).unwrap();
        assert_eq!(spec.mean(), 1.5);
        assert_eq!(spec.variance(), 0.75);
        let mut rng = RngStream::new(3, 0);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| spec.sample(&mut rng)).collect();
        assert!(xs.iter().all(|&x| x > 0.0));
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((mean - 1.5).abs() < 0.01, "mean {mean}");
        assert!((var - 0.75).abs() < 0.02, "var {var}");
    }

    #[test]
    fn exponential_tail() {
        let spec = GammaSpec::new(1.0, 1.0).unwrap();
        let mut rng = RngStream::new(4, 0);
        let n = 1_000_000;
        let above = (0..n).filter(|_| spec.sample(&mut rng) > 1.0).count();
        let p = above as f64 / n as f64;
        assert!((p - (-1.0f64).exp()).abs() < 0.005, "p {p}");
    }

    #[test]
    fn rejects_bad_params() {
        assert!(GammaSpec::new(0.0, 1.0).is_err());
        assert!(GammaSpec::new(1.0, -2.0).is_err());
        assert!(GammaSpec::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn ln_pdf_matches_closed_form() {
        // shape 3, rate 2: 4 x² e^{-2x}
        let spec = GammaSpec::new(3.0, 2.0).unwrap();
        for &x in &[0.1f64, 0.7, 1.5, 4.0] {
            let expect = (4.0 * x * x * (-2.0f64 * x).exp()).ln();
            assert!((spec.ln_pdf(x) - expect).abs() < 1e-12);
        }
        assert_eq!(spec.ln_pdf(-1.0), f64::NEG_INFINITY);
    }
}
