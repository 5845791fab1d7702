use std::f64::consts::PI;

use rand::RngCore;

use crate::prob::normal;

/// `[p_x, ṗ_x, p_y, ṗ_y, ω]`.
pub type CtState = [f64; 5];

/// Planar position of a state.
pub fn position(x: &CtState) -> [f64; 2] {
    [x[0], x[2]]
}

/// Noise of the nearly-constant-turn model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtNoise {
    /// Sampling period `Δ` in seconds.
    pub dt: f64,
    /// Acceleration noise std (m/s²).
    pub sigma_w: f64,
    /// Turn-rate noise std (rad/s).
    pub sigma_u: f64,
}

impl Default for CtNoise {
    fn default() -> Self {
        Self {
            dt: 1.0,
            sigma_w: 15.0,
            sigma_u: PI / 180.0,
        }
    }
}

impl CtNoise {
    pub fn noiseless() -> Self {
        Self {
            sigma_w: 0.0,
            sigma_u: 0.0,
            ..Self::default()
        }
    }
}

/// `sin(ωΔ)/ω` and `(1 − cos(ωΔ))/ω`, with their series near `ω = 0`.
fn turn_terms(omega: f64, dt: f64) -> (f64, f64) {
    let a = omega * dt;
    if a.abs() < 1e-6 {
        (dt * (1.0 - a * a / 6.0), dt * a / 2.0 * (1.0 - a * a / 12.0))
    } else {
        ((a).sin() / omega, (1.0 - a.cos()) / omega)
    }
}

/// Deterministic part of the turn model: `F(ω) x̃`, turn rate unchanged.
pub fn ct_predict(x: &CtState, dt: f64) -> CtState {
    let [px, vx, py, vy, w] = *x;
    let (s, c1) = turn_terms(w, dt);
    let (sin, cos) = (w * dt).sin_cos();
    [
        px + s * vx - c1 * vy,
        cos * vx - sin * vy,
        py + c1 * vx + s * vy,
        sin * vx + cos * vy,
        w,
    ]
}

/// One step of the nearly-constant-turn model with white acceleration and
/// turn-rate noise.
pub fn ct_transition(x: &CtState, noise: &CtNoise, rng: &mut dyn RngCore) -> CtState {
    let mut next = ct_predict(x, noise.dt);
    let dt = noise.dt;
    if noise.sigma_w > 0.0 {
        let var = noise.sigma_w * noise.sigma_w;
        let (wx, wy) = (normal(rng, 0.0, var), normal(rng, 0.0, var));
        next[0] += dt * dt / 2.0 * wx;
        next[1] += dt * wx;
        next[2] += dt * dt / 2.0 * wy;
        next[3] += dt * wy;
    }
    if noise.sigma_u > 0.0 {
        next[4] += dt * normal(rng, 0.0, noise.sigma_u * noise.sigma_u);
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::RngStream;

    #[test]
    fn straight_line_when_not_turning() {
        let x = [0.0, 10.0, 0.0, 0.0, 0.0];
        let y = ct_transition(&x, &CtNoise::noiseless(), &mut RngStream::new(1, 0));
        assert_eq!(y, [10.0, 10.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn quarter_turn_rotates_velocity() {
        let x = [0.0, 1.0, 0.0, 0.0, PI / 2.0];
        let y = ct_predict(&x, 1.0);
        // F(π/2): sin/ω = 2/π, (1 − cos)/ω = 2/π
        let k = 2.0 / PI;
        let expect = [k, 0.0, k, 1.0, PI / 2.0];
        for (a, b) in y.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn turn_rate_kept_without_noise() {
        let x = [100.0, -3.0, 50.0, 7.0, 0.03];
        assert_eq!(
            ct_transition(&x, &CtNoise::noiseless(), &mut RngStream::new(1, 0))[4],
            0.03
        );
    }

    #[test]
    fn continuous_at_zero_turn_rate() {
        let x = [1.0, 4.0, -2.0, 3.0, 0.0];
        let cv = ct_predict(&x, 1.0);
        for w in [1e-10, -1e-10, 1e-12, 1e-300] {
            let ct = ct_predict(&[x[0], x[1], x[2], x[3], w], 1.0);
            for i in 0..4 {
                assert!((ct[i] - cv[i]).abs() < 1e-9);
            }
        }
        // both sides of the series cut-over agree
        let below = ct_predict(&[x[0], x[1], x[2], x[3], 1e-6 * (1.0 - 1e-9)], 1.0);
        let above = ct_predict(&[x[0], x[1], x[2], x[3], 1e-6 * (1.0 + 1e-9)], 1.0);
        for i in 0..4 {
            assert!((below[i] - above[i]).abs() < 1e-9);
        }
    }
}
