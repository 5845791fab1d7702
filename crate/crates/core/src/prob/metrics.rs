use crate::error::{Error, Result};

/// Error convention for scalar RMSE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RmseMode {
    /// `x − x̂`
    #[default]
    Signed,
    /// `|x| − |x̂|`, which ignores sign errors.
    Absolute,
}

/// Per-step RMSE across Monte-Carlo runs.
///
/// `truth[run][step]` and `estimates[run][step]` must have identical shapes.
pub fn rmse(truth: &[Vec<f64>], estimates: &[Vec<f64>], mode: RmseMode) -> Result<Vec<f64>> {
    if truth.is_empty() {
        return Err(Error::InvalidInput("rmse needs at least one run".into()));
    }
    if truth.len() != estimates.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} runs", truth.len()),
            got: format!("{} runs", estimates.len()),
        });
    }
    let steps = truth[0].len();
    for (i, (t, e)) in truth.iter().zip(estimates).enumerate() {
        if t.len() != steps || e.len() != steps {
            return Err(Error::ShapeMismatch {
                expected: format!("{steps} steps in run {i}"),
                got: format!("{} truth / {} estimate steps", t.len(), e.len()),
            });
        }
    }
    let m = truth.len() as f64;
    Ok((0..steps)
        .map(|k| {
            let sse: f64 = truth
                .iter()
                .zip(estimates)
                .map(|(t, e)| {
                    let d = match mode {
                        RmseMode::Signed => t[k] - e[k],
                        RmseMode::Absolute => t[k].abs() - e[k].abs(),
                    };
                    d * d
                })
                .sum();
            (sse / m).sqrt()
        })
        .collect())
}

/// Sample mean and unbiased sample variance (`0` for a single value).
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
