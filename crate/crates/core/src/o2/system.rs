use std::sync::Arc;

use crate::error::{Error, Result};
use crate::prob::{fuse_scalar, Matrix, Vector};

type ObsFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
type JacFn = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;

/// One noiseless observation equation `y = h(x)` with its Jacobian.
#[derive(Clone)]
pub struct Sensor {
    observe: ObsFn,
    jacobian: JacFn,
    noise_var: Option<Vector>,
}

impl Sensor {
    pub fn new<H, J>(observe: H, jacobian: J) -> Self
    where
        H: Fn(&Vector) -> Vector + Send + Sync + 'static,
        J: Fn(&Vector) -> Matrix + Send + Sync + 'static,
    {
        Self {
            observe: Arc::new(observe),
            jacobian: Arc::new(jacobian),
            noise_var: None,
        }
    }

    /// `y = H x`.
    pub fn linear(h: Matrix) -> Self {
        let h2 = h.clone();
        Self::new(move |x| &h * x, move |_| h2.clone())
    }

    /// Distance from `origin` in the plane spanned by the first two state
    /// components.
    pub fn range(origin: [f64; 2]) -> Self {
        Self::new(
            move |x| {
                let (dx, dy) = (x[0] - origin[0], x[1] - origin[1]);
                Vector::from_element(1, dx.hypot(dy))
            },
            move |x| {
                let (dx, dy) = (x[0] - origin[0], x[1] - origin[1]);
                let r = dx.hypot(dy).max(f64::MIN_POSITIVE);
                let mut j = Matrix::zeros(1, x.len());
                j[(0, 0)] = dx / r;
                j[(0, 1)] = dy / r;
                j
            },
        )
    }

    /// Bearing from `origin`, measured from the second axis towards the first.
    pub fn bearing(origin: [f64; 2]) -> Self {
        Self::new(
            move |x| Vector::from_element(1, (x[0] - origin[0]).atan2(x[1] - origin[1])),
            move |x| {
                let (dx, dy) = (x[0] - origin[0], x[1] - origin[1]);
                let r2 = (dx * dx + dy * dy).max(f64::MIN_POSITIVE);
                let mut j = Matrix::zeros(1, x.len());
                j[(0, 0)] = dy / r2;
                j[(0, 1)] = -dx / r2;
                j
            },
        )
    }

    /// Per-component observation noise variance, used to weight residuals.
    pub fn with_noise_var(mut self, var: Vector) -> Self {
        self.noise_var = Some(var);
        self
    }

    pub fn observe(&self, x: &Vector) -> Vector {
        (self.observe)(x)
    }
}

/// Several sensors observing one state.
#[derive(Clone)]
pub struct SensorSuite {
    pub state_dim: usize,
    pub sensors: Vec<Sensor>,
}

impl SensorSuite {
    pub fn new(state_dim: usize, sensors: Vec<Sensor>) -> Self {
        Self { state_dim, sensors }
    }

    fn weights(&self, observations: &[Vector]) -> Vector {
        let known = self.sensors.iter().all(|s| s.noise_var.is_some());
        let rows: Vec<f64> = self
            .sensors
            .iter()
            .zip(observations)
            .flat_map(|(s, y)| match (&s.noise_var, known) {
                (Some(v), true) => v.iter().map(|v| 1.0 / v).collect::<Vec<_>>(),
                _ => vec![1.0; y.len()],
            })
            .collect();
        Vector::from_vec(rows)
    }

    fn residual_and_jacobian(&self, x: &Vector, observations: &[Vector]) -> (Vector, Matrix) {
        let rows: usize = observations.iter().map(|y| y.len()).sum();
        let mut r = Vector::zeros(rows);
        let mut j = Matrix::zeros(rows, self.state_dim);
        let mut at = 0;
        for (s, y) in self.sensors.iter().zip(observations) {
            let k = y.len();
            r.rows_mut(at, k).copy_from(&(y - s.observe(x)));
            j.rows_mut(at, k).copy_from(&(s.jacobian)(x));
            at += k;
        }
        (r, j)
    }
}

/// Least-squares solution of the noiseless system `y_i = h_i(x)` by damped
/// Gauss-Newton. Residuals are inverse-variance weighted only when every
/// sensor declares its noise.
pub fn o2_solve_system(suite: &SensorSuite, observations: &[Vector], initial: &Vector) -> Result<Vector> {
    if observations.len() != suite.sensors.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} observations", suite.sensors.len()),
            got: observations.len().to_string(),
        });
    }
    let m = suite.state_dim;
    let rows: usize = observations.iter().map(|y| y.len()).sum();
    if rows < m {
        return Err(Error::UnderDetermined {
            observations: rows,
            state_dim: m,
            rank: rows,
        });
    }
    let w = suite.weights(observations);
    let cost = |r: &Vector| r.iter().zip(w.iter()).map(|(r, w)| w * r * r).sum::<f64>();

    let mut x = initial.clone();
    let (mut r, mut j) = suite.residual_and_jacobian(&x, observations);
    let mut c = cost(&r);
    let mut mu = 1e-9;
    for _ in 0..50 {
        let jw = Matrix::from_fn(rows, m, |i, k| j[(i, k)] * w[i]);
        let jtj = j.transpose() * &jw;
        let g = jw.transpose() * &r;
        let scale = jtj.diagonal().amax().max(f64::MIN_POSITIVE);
        let mut accepted = None;
        for _ in 0..30 {
            let a = &jtj + Matrix::identity(m, m) * (mu * scale);
            let Some(step) = a.lu().solve(&g) else {
                mu *= 10.0;
                continue;
            };
            let cand = &x + &step;
            let (rc, jc) = suite.residual_and_jacobian(&cand, observations);
            let cc = cost(&rc);
            if cc <= c || step.norm() < 1e-9 {
                accepted = Some((cand, rc, jc, cc, step.norm()));
                break;
            }
            mu *= 10.0;
        }
        let Some((cand, rc, jc, cc, norm)) = accepted else {
            break;
        };
        x = cand;
        r = rc;
        j = jc;
        c = cc;
        mu = (mu / 10.0).max(1e-12);
        if norm < 1e-9 {
            break;
        }
    }

    let sv = j.clone().svd(false, false).singular_values;
    let tol = 1e-10 * sv.amax().max(f64::MIN_POSITIVE);
    let rank = sv.iter().filter(|s| **s > tol).count();
    if rank < m {
        return Err(Error::UnderDetermined {
            observations: rows,
            state_dim: m,
            rank,
        });
    }
    Ok(x)
}

/// Inverse-variance fusion of independent scalar estimates `(mean, var)`.
pub fn o2_multisensor_fuse(estimates: &[(f64, f64)]) -> Result<(f64, f64)> {
    let (first, rest) = estimates
        .split_first()
        .ok_or_else(|| Error::InvalidInput("nothing to fuse".into()))?;
    rest.iter()
        .try_fold(*first, |(m, v), (m2, v2)| fuse_scalar(m, v, *m2, *v2))
}

/// Fisher information of one Gaussian sample about `(mean, variance)`.
pub fn fisher_information(var: f64) -> Result<Matrix> {
    if !(var > 0.0) {
        return Err(Error::InvalidInput(format!("variance must be positive, got {var}")));
    }
    Ok(Matrix::from_diagonal(&Vector::from_vec(vec![
        1.0 / var,
        1.0 / (2.0 * var * var),
    ])))
}

/// Cramér-Rao bound `diag(σ², 2σ⁴)`.
pub fn fisher_crb(var: f64) -> Result<Matrix> {
    if !(var > 0.0) {
        return Err(Error::InvalidInput(format!("variance must be positive, got {var}")));
    }
    Ok(Matrix::from_diagonal(&Vector::from_vec(vec![var, 2.0 * var * var])))
}
