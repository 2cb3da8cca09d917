use super::{inner_field, separatrix_seed};
use crate::error::{invalid, Error, Result};
use crate::ode::{integrate, Direction, Event, IntegratorConfig, Termination, Trajectory};
use nalgebra::{DMatrix, DVector};

/// Planar abscissa at which the incoming linear branch is seeded.
const SEED_U: f64 = -100.0;
/// Fit windows `[Z, 2Z]` beyond the minimum, in units of `K⁻⁴`.
const WINDOWS: [f64; 3] = [1e2, 1e3, 1e4];

/// The matched solution of `φ''' = φ⁻³` with `φ ~ −Kζ` as `ζ → −∞` and
/// `φ ~ Γζ²` as `ζ → +∞`.
///
/// The translation freedom in `ζ` is fixed by requiring
/// `φ = −Kζ − ln|ζ|/(2K³) + o(1)` on the incoming side.
#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub k: f64,
    pub gamma: f64,
    /// Fit values of `Γ` for the increasing windows, before extrapolation.
    pub gamma_windows: [f64; 3],
    pub min_phi: f64,
    pub zeta_min: f64,
    /// `(ζ, φ, φ', φ'')` at the accepted steps.
    pub samples: Vec<[f64; 4]>,
    trajectory: Trajectory<3>,
}

impl InnerSolution {
    /// `(φ, φ', φ'')` at `ζ` by dense output.
    pub fn eval(&self, zeta: f64) -> Option<[f64; 3]> {
        self.trajectory.eval(zeta)
    }

    pub fn zeta_range(&self) -> (f64, f64) {
        (self.trajectory.t_start(), self.trajectory.t_end())
    }
}

/// [`solve_matching_with`] at tolerances `rtol = 1e-13`, `atol = 1e-16`.
pub fn solve_matching(k: f64) -> Result<InnerSolution> {
    solve_matching_with(k, &IntegratorConfig::new(1e-13, 1e-16))
}

/// Build the matched solution for slope `k`.
///
/// The incoming branch is seeded on the separatrix at large negative `u`;
/// the slope condition then fixes the scale `φ` of the seed, including the
/// logarithmic correction `φ' = −K + 1/(2K³|ζ|)`. Integration runs in `ζ`
/// through the minimum into the parabolic regime, where `Γ` is obtained by
/// quadratic least-squares fits on three windows and extrapolated.
pub fn solve_matching_with(k: f64, config: &IntegratorConfig) -> Result<InnerSolution> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(invalid(format!("slope K must be positive, got {k}")));
    }
    let u = SEED_U;
    let v = separatrix_seed(u);
    let k3 = k * k * k;
    let mut phi = (-u / k).powi(3);
    for _ in 0..100 {
        let next = (-u / (k - 0.5 / (k * k * phi))).powi(3);
        let done = (next - phi).abs() <= 1e-16 * phi;
        phi = next;
        if done {
            break;
        }
    }
    let c = phi.cbrt();
    let dphi = u / c;
    let d2phi = v / c.powi(5);

    // ζ of the seed from φ = −Kζ − ln|ζ|/(2K³).
    let mut zeta0 = -phi / k;
    for _ in 0..100 {
        let next = -(phi + (-zeta0).ln() / (2.0 * k3)) / k;
        let done = (next - zeta0).abs() <= 1e-16 * zeta0.abs();
        zeta0 = next;
        if done {
            break;
        }
    }

    let k4 = k3 * k;
    let reach = 2.0 * WINDOWS[2] / k4;
    let positive = |y: &[f64; 3]| y[0] > 0.0;
    let rhs = |_t: f64, y: &[f64; 3]| inner_field(y);

    let to_min = [Event::new(|_t, y: &[f64; 3]| y[1], Direction::Rising).terminal()];
    let first = integrate(rhs, [phi, dphi, d2phi], (zeta0, zeta0 + 10.0 * phi / k + 10.0), config, positive, &to_min)?;
    if first.termination != (Termination::Event { index: 0 }) {
        return Err(Error::Numerical(format!("no minimum reached: {:?}", first.termination)));
    }
    let zeta_min = first.t_end();
    let y_min = *first.last();
    let second = integrate(rhs, y_min, (zeta_min, zeta_min + reach), config, positive, &[])?;
    second.ensure_complete()?;

    let mut traj = first;
    traj.t.extend_from_slice(&second.t[1..]);
    traj.y.extend_from_slice(&second.y[1..]);
    traj.steps.extend(second.steps);
    traj.termination = second.termination;

    let mut windows = [0.0; 3];
    for (i, w) in WINDOWS.iter().enumerate() {
        let z = w / k4;
        windows[i] = quadratic_coefficient(&traj, zeta_min + z, zeta_min + 2.0 * z)?;
    }
    let gamma = richardson(&windows);
    let samples = traj.t.iter().zip(&traj.y).map(|(t, y)| [*t, y[0], y[1], y[2]]).collect();
    Ok(InnerSolution { k, gamma, gamma_windows: windows, min_phi: y_min[0], zeta_min, samples, trajectory: traj })
}

/// Leading coefficient of the least-squares quadratic through `φ` on `[a, b]`.
fn quadratic_coefficient(traj: &Trajectory<3>, a: f64, b: f64) -> Result<f64> {
    let n = 65;
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut m = DMatrix::zeros(n, 3);
    let mut rhs = DVector::zeros(n);
    for i in 0..n {
        let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
        // The window end can sit an ulp past the trajectory end.
        let t = (mid + half * x).min(traj.t_end());
        let y = traj
            .eval(t)
            .ok_or_else(|| Error::Numerical("fit window outside the trajectory".into()))?;
        m[(i, 0)] = 1.0;
        m[(i, 1)] = x;
        m[(i, 2)] = x * x;
        rhs[i] = y[0];
    }
    let coef = m
        .svd(true, true)
        .solve(&rhs, 1e-15)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(coef[2] / (half * half))
}

/// Extrapolate a sequence converging geometrically; falls back to the last
/// value when the differences are at rounding level.
fn richardson(g: &[f64; 3]) -> f64 {
    let d1 = g[1] - g[0];
    let d2 = g[2] - g[1];
    let noise = 1e-13 * g[2].abs();
    if d2.abs() <= noise || d1.abs() <= noise || d1.signum() != d2.signum() || d2.abs() >= d1.abs() {
        return g[2];
    }
    let r = d2 / d1;
    g[2] + d2 * r / (1.0 - r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_slope_solution() {
        let s = solve_matching(1.0).unwrap();
        assert!(s.min_phi > 0.0);
        let at_min = s.eval(s.zeta_min).unwrap();
        assert!(at_min[2] > 0.0);
        assert!(at_min[1].abs() < 1e-12);
        assert!(s.gamma > 0.0);
        let z = s.zeta_range().1;
        let y = s.eval(z).unwrap();
        assert!((y[0] / ((z - s.zeta_min).powi(2) * s.gamma) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn rejects_nonpositive_slope() {
        assert!(solve_matching(0.0).is_err());
        assert!(solve_matching(-1.0).is_err());
    }

    #[test]
    fn richardson_on_geometric_sequence() {
        let g = [1.0 + 1e-3, 1.0 + 1e-4, 1.0 + 1e-5];
        assert!((richardson(&g) - 1.0).abs() < 1e-15);
        assert_eq!(richardson(&[2.0, 2.0, 2.0]), 2.0);
    }
}
