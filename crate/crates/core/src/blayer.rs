//! The accumulation boundary layer `(H''' + ξ² + a) H³ = 1` with far field
//! `H ~ |ξ|^{-2/3}`.
//!
//! Forward in `ξ` the linearisation about the far-field branch has one
//! decaying and two growing oscillatory modes, so seeds on the left form a
//! two-parameter family. The module integrates members of that family and
//! reports how they leave the decaying branch; it makes no claim about the
//! exceptional connecting orbit.

use crate::error::{invalid, Error, Result};
use crate::ode::{integrate, integrate_plain, IntegratorConfig, Termination, Trajectory};
use rayon::prelude::*;

/// Relative deviation from `|ξ|^{-2/3}` that counts as leaving the branch.
pub const DEPARTURE_THRESHOLD: f64 = 0.1;
/// Departure is only assessed where `|ξ| ≥ 1`.
const DEPARTURE_MIN_ABS_XI: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryLayerProblem {
    pub a: f64,
    pub xi0: f64,
    pub xi1: f64,
    /// Coefficients along the two growing far-field modes at `xi0`.
    pub perturbation: [f64; 2],
}

impl BoundaryLayerProblem {
    /// Unperturbed problem on the default window `[−50, 50]`.
    pub fn new(a: f64) -> Self {
        Self { a, xi0: -50.0, xi1: 50.0, perturbation: [0.0; 2] }
    }

    pub fn with_perturbation(mut self, p: [f64; 2]) -> Self {
        self.perturbation = p;
        self
    }

    pub fn with_window(mut self, xi0: f64, xi1: f64) -> Self {
        self.xi0 = xi0;
        self.xi1 = xi1;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() || !self.perturbation.iter().all(|p| p.is_finite()) {
            return Err(invalid("parameter and perturbation must be finite"));
        }
        if !(self.xi0 <= -10.0 && self.xi1 > 0.0 && self.xi1.is_finite() && self.xi0.is_finite()) {
            return Err(invalid(format!("need xi0 <= -10 < 0 < xi1, got [{}, {}]", self.xi0, self.xi1)));
        }
        Ok(())
    }
}

/// `(H''' , H³)` residual `(H''' + ξ² + a)H³ − 1`.
pub fn residual(xi: f64, a: f64, h: f64, d3h: f64) -> f64 {
    (d3h + xi * xi + a) * h * h * h - 1.0
}

/// `(H, H', H'', H''')` of `|ξ|^{-2/3}(1 + c |ξ|^{-2})` at `ξ < 0`.
fn far_profile(xi: f64, c: f64) -> [f64; 4] {
    let x = -xi;
    let p = |e: f64| x.powf(e);
    // H(x) = x^{-2/3} + c x^{-8/3}; each ξ-derivative is minus an x-derivative.
    [
        p(-2.0 / 3.0) + c * p(-8.0 / 3.0),
        2.0 / 3.0 * p(-5.0 / 3.0) + 8.0 / 3.0 * c * p(-11.0 / 3.0),
        10.0 / 9.0 * p(-8.0 / 3.0) + 88.0 / 9.0 * c * p(-14.0 / 3.0),
        80.0 / 27.0 * p(-11.0 / 3.0) + 1232.0 / 27.0 * c * p(-17.0 / 3.0),
    ]
}

/// Far-field data `(H, H', H'')` at `xi0 ≤ −10`, including the correction
/// `−(a/3)|ξ|^{-2}` that removes the `a ξ^{-2}` residual.
pub fn far_field_seed(xi0: f64, a: f64) -> Result<[f64; 3]> {
    if !(xi0 <= -10.0) || !a.is_finite() {
        return Err(invalid(format!("far-field seed needs xi0 <= -10, got {xi0}")));
    }
    let f = far_profile(xi0, -a / 3.0);
    Ok([f[0], f[1], f[2]])
}

/// Residual of the seed profile at `ξ < 0`.
pub fn seed_residual(xi: f64, a: f64) -> f64 {
    let f = far_profile(xi, -a / 3.0);
    residual(xi, a, f[0], f[3])
}

/// Residual of the bare profile `|ξ|^{-2/3}` at `ξ < 0`; equals
/// `a ξ^{-2} + (80/27)|ξ|^{-17/3}`.
pub fn leading_order_residual(xi: f64, a: f64) -> f64 {
    let f = far_profile(xi, 0.0);
    residual(xi, a, f[0], f[3])
}

/// Orthonormal basis of the two-dimensional growing subspace at `xi0`.
///
/// The variational equation `δ''' = −3 H⁻⁴ δ` along the far-field profile is
/// integrated from `10·xi0` to `xi0` with a fundamental matrix that is
/// re-orthonormalised by QR after chunks of about 100 e-folds, so the leading two columns
/// converge to the growing subspace.
pub fn growing_modes(xi0: f64, a: f64) -> Result<[[f64; 3]; 2]> {
    if !(xi0 <= -10.0) {
        return Err(invalid(format!("growing modes need xi0 <= -10, got {xi0}")));
    }
    let c = -a / 3.0;
    let rhs = move |xi: f64, y: &[f64; 9]| {
        let h = far_profile(xi, c)[0];
        let coef = -3.0 / (h * h * h * h);
        let mut d = [0.0; 9];
        for col in 0..3 {
            let o = 3 * col;
            d[o] = y[o + 1];
            d[o + 1] = y[o + 2];
            d[o + 2] = coef * y[o];
        }
        d
    };
    let cfg = IntegratorConfig::new(1e-8, 1e-10);
    let mut basis = nalgebra::Matrix3::<f64>::identity();
    let mut xi = 10.0 * xi0;
    while xi < xi0 {
        let rate = 3f64.cbrt() * (-xi).powf(8.0 / 9.0);
        let next = (xi + 100.0 / rate).min(xi0);
        let mut y = [0.0; 9];
        for col in 0..3 {
            for row in 0..3 {
                y[3 * col + row] = basis[(row, col)];
            }
        }
        let tr = integrate_plain(rhs, y, (xi, next), &cfg)?;
        tr.ensure_complete()?;
        let out = tr.last();
        let m = nalgebra::Matrix3::from_fn(|row, col| out[3 * col + row]);
        basis = m.qr().q();
        xi = next;
    }
    let col = |j: usize| [basis[(0, j)], basis[(1, j)], basis[(2, j)]];
    Ok([col(0), col(1)])
}

/// How a shot leaves (or follows) the decaying branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShotOutcome {
    /// `H` reached zero at `xi`.
    TouchDown { xi: f64 },
    /// Three successive maxima of increasing height, the third at `xi`.
    GrowingOscillation { xi: f64 },
    /// Reached `xi1` within the departure threshold of `|ξ|^{-2/3}`.
    Tracking,
    /// Reached `xi1` away from the far-field profile.
    Departed,
    /// The integrator stopped for another reason.
    Stalled { xi: f64 },
}

impl ShotOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            ShotOutcome::TouchDown { .. } => "touchdown",
            ShotOutcome::GrowingOscillation { .. } => "growing-oscillation",
            ShotOutcome::Tracking => "tracking",
            ShotOutcome::Departed => "departed",
            ShotOutcome::Stalled { .. } => "stalled",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShotDiagnostics {
    pub outcome: ShotOutcome,
    /// First `ξ` (with `|ξ| ≥ 1`) where `|H |ξ|^{2/3} − 1|` exceeds the threshold.
    pub departure_xi: Option<f64>,
    /// `+1` when `H` departs above the profile, `−1` below, `0` if it never departs.
    pub departure_direction: i8,
    /// `H(ξ₁) ξ₁^{2/3} − 1` when `xi1` was reached.
    pub deviation_at_xi1: Option<f64>,
    /// `(ξ, H)` at local maxima.
    pub maxima: Vec<(f64, f64)>,
    pub end_xi: f64,
}

#[derive(Debug, Clone)]
pub struct Shot {
    pub trajectory: Trajectory<3>,
    pub diagnostics: ShotDiagnostics,
}

fn equation(a: f64) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] + Copy {
    move |xi: f64, y: &[f64; 3]| {
        let r = 1.0 / y[0];
        [y[1], y[2], r * r * r - xi * xi - a]
    }
}

/// Integrate from the seeded left far field towards `xi1` with `H > 0`.
pub fn shoot(problem: &BoundaryLayerProblem, config: &IntegratorConfig) -> Result<Shot> {
    problem.validate()?;
    let modes = if problem.perturbation != [0.0; 2] { Some(growing_modes(problem.xi0, problem.a)?) } else { None };
    shoot_with_modes(problem, modes.as_ref(), config)
}

/// As [`shoot`] with precomputed [`growing_modes`] for `(xi0, a)`.
pub fn shoot_with_modes(
    problem: &BoundaryLayerProblem,
    modes: Option<&[[f64; 3]; 2]>,
    config: &IntegratorConfig,
) -> Result<Shot> {
    problem.validate()?;
    let mut y0 = far_field_seed(problem.xi0, problem.a)?;
    if problem.perturbation != [0.0; 2] {
        let modes = modes.ok_or_else(|| invalid("perturbed shot needs growing modes"))?;
        for (m, p) in modes.iter().zip(problem.perturbation) {
            for i in 0..3 {
                y0[i] += p * m[i];
            }
        }
    }
    if !(y0[0] > 0.0) {
        return Err(invalid("perturbed seed has non-positive height"));
    }
    let tr = integrate(equation(problem.a), y0, (problem.xi0, problem.xi1), config, |y| y[0] > 0.0, &[])?;
    let diagnostics = diagnose(&tr, problem.xi1, 1.0);
    Ok(Shot { trajectory: tr, diagnostics })
}

/// Integrate the same equation backward from the right far field at `xi1`
/// towards `xi0` (the mirror image of [`shoot`]; perturbations are ignored).
pub fn shoot_backward(problem: &BoundaryLayerProblem, config: &IntegratorConfig) -> Result<Shot> {
    problem.validate()?;
    if problem.xi1 < 10.0 {
        return Err(invalid("backward shot needs xi1 >= 10"));
    }
    let [h, d1, d2] = far_field_seed(-problem.xi1, problem.a)?;
    let y0 = [h, -d1, d2];
    let tr = integrate(equation(problem.a), y0, (problem.xi1, problem.xi0), config, |y| y[0] > 0.0, &[])?;
    let diagnostics = diagnose(&tr, problem.xi0, -1.0);
    Ok(Shot { trajectory: tr, diagnostics })
}

fn diagnose(tr: &Trajectory<3>, target: f64, dir: f64) -> ShotDiagnostics {
    let mut departure_xi = None;
    let mut departure_direction = 0i8;
    let mut maxima = Vec::new();
    let mut growing_at = None;
    for (i, (xi, y)) in tr.t.iter().zip(&tr.y).enumerate() {
        if departure_xi.is_none() && xi.abs() >= DEPARTURE_MIN_ABS_XI {
            let dev = y[0] * xi.abs().powf(2.0 / 3.0) - 1.0;
            if dev.abs() > DEPARTURE_THRESHOLD {
                departure_xi = Some(*xi);
                departure_direction = if dev > 0.0 { 1 } else { -1 };
            }
        }
        if i > 0 {
            let prev = tr.y[i - 1][1] * dir;
            let cur = y[1] * dir;
            if prev > 0.0 && cur <= 0.0 {
                maxima.push((*xi, y[0]));
                let n = maxima.len();
                if growing_at.is_none() && n >= 3 && maxima[n - 1].1 > maxima[n - 2].1 && maxima[n - 2].1 > maxima[n - 3].1 {
                    growing_at = Some(*xi);
                }
            }
        }
    }
    let end_xi = tr.t_end();
    let reached = tr.termination == Termination::SpanEnd;
    let deviation_at_xi1 = reached.then(|| tr.last()[0] * target.abs().powf(2.0 / 3.0) - 1.0);
    let outcome = match tr.termination {
        Termination::Guard | Termination::StepUnderflow if tr.last()[0] < 1e-3 * tr.y[0][0] => {
            ShotOutcome::TouchDown { xi: end_xi }
        }
        _ if growing_at.is_some() => ShotOutcome::GrowingOscillation { xi: growing_at.unwrap_or(end_xi) },
        Termination::SpanEnd => match deviation_at_xi1 {
            Some(d) if d.abs() <= DEPARTURE_THRESHOLD => ShotOutcome::Tracking,
            _ => ShotOutcome::Departed,
        },
        _ => ShotOutcome::Stalled { xi: end_xi },
    };
    ShotDiagnostics { outcome, departure_xi, departure_direction, deviation_at_xi1, maxima, end_xi }
}

/// One cell of [`scan_a`]; failures are kept as messages.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub a: f64,
    pub perturbation: [f64; 2],
    pub result: std::result::Result<ShotDiagnostics, String>,
}

/// Run [`shoot`] over the product grid `a_values × perturbations`, in
/// parallel, returning rows in grid order (`a` outer).
pub fn scan_a(
    a_values: &[f64],
    perturbations: &[[f64; 2]],
    window: (f64, f64),
    config: &IntegratorConfig,
) -> Result<Vec<ScanRow>> {
    if a_values.is_empty() || perturbations.is_empty() {
        return Err(invalid("scan grids must be non-empty"));
    }
    let perturbed = perturbations.iter().any(|p| *p != [0.0; 2]);
    let modes: Vec<std::result::Result<[[f64; 3]; 2], String>> = if perturbed {
        a_values.par_iter().map(|&a| growing_modes(window.0, a).map_err(|e| e.to_string())).collect()
    } else {
        Vec::new()
    };
    let cells: Vec<(usize, [f64; 2])> =
        (0..a_values.len()).flat_map(|i| perturbations.iter().map(move |&p| (i, p))).collect();
    Ok(cells
        .par_iter()
        .map(|&(i, p)| {
            let a = a_values[i];
            let problem = BoundaryLayerProblem::new(a).with_window(window.0, window.1).with_perturbation(p);
            let result = match modes.get(i) {
                Some(Err(e)) if p != [0.0; 2] => Err(e.clone()),
                m => shoot_with_modes(&problem, m.and_then(|r| r.as_ref().ok()), config)
                    .map(|s| s.diagnostics)
                    .map_err(|e| e.to_string()),
            };
            ScanRow { a, perturbation: p, result }
        })
        .collect())
}

/// Bisect the amplitude `t` of the perturbation `t·direction` between `lo`
/// and `hi`, whose shots depart in opposite directions. Returns the final
/// bracket.
pub fn bisect_departure(
    problem: &BoundaryLayerProblem,
    direction: [f64; 2],
    lo: f64,
    hi: f64,
    iterations: usize,
    config: &IntegratorConfig,
) -> Result<(f64, f64)> {
    problem.validate()?;
    let modes = growing_modes(problem.xi0, problem.a)?;
    let sign = |t: f64| -> Result<i8> {
        let p = problem.with_perturbation([t * direction[0], t * direction[1]]);
        Ok(shoot_with_modes(&p, Some(&modes), config)?.diagnostics.departure_direction)
    };
    let (mut lo, mut hi) = (lo, hi);
    let s_lo = sign(lo)?;
    let s_hi = sign(hi)?;
    if s_lo == 0 || s_hi == 0 || s_lo == s_hi {
        return Err(Error::Numerical(format!("no sign change in departure direction on [{lo}, {hi}]")));
    }
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let s = sign(mid)?;
        if s == s_lo {
            lo = mid;
        } else if s == s_hi {
            hi = mid;
        } else {
            break;
        }
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_residual_identity() {
        for &(xi, a) in &[(-10.0, 0.0), (-37.0, 1.5), (-100.0, -2.0)] {
            let x: f64 = -xi;
            let want = a / (x * x) + 80.0 / 27.0 * x.powf(-17.0 / 3.0);
            let got = leading_order_residual(xi, a);
            assert!((got - want).abs() < 1e-12 * (1.0 + want.abs()), "{got} vs {want}");
        }
    }

    #[test]
    fn correction_cancels_quadratic_residual() {
        let a = 1.3;
        for xi in [-20.0f64, -40.0, -80.0] {
            let r = seed_residual(xi, a);
            assert!(r.abs() < 5.0 * xi.powi(-4), "xi = {xi}: {r}");
        }
        assert!(seed_residual(-100.0, 0.0).abs() < 1e-10);
    }

    #[test]
    fn modes_follow_local_growth_rates() {
        // Frozen-coefficient growing eigenvectors (1, μ, μ²) should lie close
        // to the computed subspace.
        let xi0 = -30.0;
        let m = growing_modes(xi0, 0.0).unwrap();
        let r = 3f64.cbrt() * (-xi0).powf(8.0 / 9.0);
        let (re, im) = (0.5 * r, 0.5 * 3f64.sqrt() * r);
        let mu2 = (re * re - im * im, 2.0 * re * im);
        for v in [[1.0, re, mu2.0], [0.0, im, mu2.1]] {
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            let mut rest = v.map(|x| x / n);
            for b in &m {
                let d: f64 = rest.iter().zip(b).map(|(x, y)| x * y).sum();
                for i in 0..3 {
                    rest[i] -= d * b[i];
                }
            }
            let res = rest.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(res < 0.05, "residual {res}");
        }
    }

    #[test]
    fn unperturbed_shot_departs_and_is_reproducible() {
        let cfg = IntegratorConfig::new(1e-10, 1e-12);
        let p = BoundaryLayerProblem::new(0.5);
        let s1 = shoot(&p, &cfg).unwrap();
        let s2 = shoot(&p, &cfg).unwrap();
        assert_eq!(s1.diagnostics, s2.diagnostics);
        assert!(s1.diagnostics.departure_xi.is_some());
        assert_ne!(s1.diagnostics.outcome, ShotOutcome::Tracking);
    }

    #[test]
    fn rejects_bad_window() {
        let cfg = IntegratorConfig::default();
        assert!(shoot(&BoundaryLayerProblem::new(0.0).with_window(-5.0, 5.0), &cfg).is_err());
        assert!(far_field_seed(-1.0, 0.0).is_err());
    }
}
