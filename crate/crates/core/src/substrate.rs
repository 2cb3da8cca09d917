//! Substrate geometry.
//!
//! A substrate is an arc-length parametrised curve with tangent angle `θ(s)`.
//! The driving coefficient of the film is `Q = θ''/B − sin θ`, so prescribing
//! `Q` turns the geometry problem into a forced pendulum `θ'' = B (sin θ + Q)`.

use crate::error::{invalid, Error, Result};
use crate::ode::{integrate, IntegratorConfig, Trajectory};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

/// Integrate `θ'' = B (sin θ + Q(s))` over `span` from `(θ, θ')`.
pub fn pendulum_solve<Q>(
    q: Q,
    b: f64,
    theta0: f64,
    dtheta0: f64,
    span: (f64, f64),
    config: &IntegratorConfig,
) -> Result<Trajectory<2>>
where
    Q: Fn(f64) -> f64,
{
    if !(b > 0.0 && b.is_finite()) {
        return Err(invalid(format!("Bond number must be positive, got {b}")));
    }
    let rhs = |s: f64, y: &[f64; 2]| [y[1], b * (y[0].sin() + q(s))];
    let tr = integrate(rhs, [theta0, dtheta0], span, config, |_| true, &[])?;
    tr.ensure_complete()?;
    Ok(tr)
}

/// The two constant solutions `sin θ = −Q₀` in `[−π, 0]`: the saddle
/// `θ₁ ∈ (−π/2, 0]` and the centre `θ₁* = −π − θ₁`.
pub fn inclined_plane_angles(q0: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&q0) {
        return Err(invalid(format!("need 0 <= Q0 < 1, got {q0}")));
    }
    let t1 = -q0.asin();
    Ok((t1, -PI - t1))
}

/// First integral of the pendulum with constant forcing `Q₀ = −sin θ₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumEnergy {
    pub theta0: f64,
    pub b: f64,
}

impl PendulumEnergy {
    pub fn eval(&self, theta: f64, dtheta: f64) -> f64 {
        dtheta * dtheta / (2.0 * self.b) + theta.cos() + self.theta0.sin() * theta
    }
}

/// Cumulative fourth-order quadrature of `(cos θ, sin θ)` on a uniform grid,
/// starting from the origin.
pub fn reconstruct_curve(theta: &[f64], ds: f64) -> (Vec<f64>, Vec<f64>) {
    let cx: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
    let cy: Vec<f64> = theta.iter().map(|t| t.sin()).collect();
    (cumulative(&cx, ds), cumulative(&cy, ds))
}

fn cumulative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 4 {
        for i in 1..n {
            out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
        }
        return out;
    }
    for i in 0..n - 1 {
        let piece = if i == 0 {
            (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]) * h / 24.0
        } else if i == n - 2 {
            (9.0 * f[i + 1] + 19.0 * f[i] - 5.0 * f[i - 1] + f[i - 2]) * h / 24.0
        } else {
            (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]) * h / 24.0
        };
        out[i + 1] = out[i] + piece;
    }
    out
}

/// Fourth-order second derivative on a uniform grid.
fn second_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let h2 = 12.0 * h * h;
    (0..n)
        .map(|i| {
            if i >= 2 && i + 2 < n {
                (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) / h2
            } else if i < 2 {
                let g = &f[i..i + 6];
                (45.0 * g[0] - 154.0 * g[1] + 214.0 * g[2] - 156.0 * g[3] + 61.0 * g[4] - 10.0 * g[5]) / h2
            } else {
                let g = &f[i - 5..=i];
                (45.0 * g[5] - 154.0 * g[4] + 214.0 * g[3] - 156.0 * g[2] + 61.0 * g[1] - 10.0 * g[0]) / h2
            }
        })
        .collect()
}

/// Fourth-order first derivative on a uniform grid.
fn first_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let h12 = 12.0 * h;
    (0..n)
        .map(|i| {
            if i >= 2 && i + 2 < n {
                (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / h12
            } else if i < 2 {
                let g = &f[i..i + 5];
                (-25.0 * g[0] + 48.0 * g[1] - 36.0 * g[2] + 16.0 * g[3] - 3.0 * g[4]) / h12
            } else {
                let g = &f[i - 4..=i];
                (25.0 * g[4] - 48.0 * g[3] + 36.0 * g[2] - 16.0 * g[1] + 3.0 * g[0]) / h12
            }
        })
        .collect()
}

/// Curvature `θ'` by fourth-order differences (needs at least 6 samples).
pub fn curvature_from_theta(theta: &[f64], ds: f64) -> Result<Vec<f64>> {
    check_grid(theta, ds)?;
    Ok(first_derivative(theta, ds))
}

fn check_grid(theta: &[f64], ds: f64) -> Result<()> {
    if theta.len() < 6 {
        return Err(invalid("need at least 6 samples"));
    }
    if !(ds > 0.0 && ds.is_finite()) {
        return Err(invalid(format!("grid step must be positive, got {ds}")));
    }
    Ok(())
}

/// `Q = θ''/B − sin θ` by fourth-order differences.
///
/// Fails when the grid is too coarse, judged by the gap between the fourth-
/// and second-order estimates of `θ''`.
pub fn q_from_theta(theta: &[f64], ds: f64, b: f64) -> Result<Vec<f64>> {
    check_grid(theta, ds)?;
    if !(b > 0.0 && b.is_finite()) {
        return Err(invalid(format!("Bond number must be positive, got {b}")));
    }
    let d2 = second_derivative(theta, ds);
    let scale = 1.0 + d2.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut gap = 0.0f64;
    for i in 1..theta.len() - 1 {
        let crude = (theta[i - 1] - 2.0 * theta[i] + theta[i + 1]) / (ds * ds);
        gap = gap.max((crude - d2[i]).abs());
    }
    if gap > 1e-2 * scale {
        return Err(Error::Numerical(format!("grid too coarse for differencing (gap {gap:.3e})")));
    }
    Ok(theta.iter().zip(&d2).map(|(t, d)| d / b - t.sin()).collect())
}

/// Leading-order steady film height `h = (3/Q)^{1/3}`, negative for `Q < 0`.
pub fn steady_height(q: f64) -> Result<f64> {
    if q == 0.0 || !q.is_finite() {
        return Err(Error::Singular(format!("steady height undefined for Q = {q}")));
    }
    Ok((3.0 / q).cbrt())
}

/// Curvature of the free surface at height `h(s)` above a substrate of
/// curvature `k(s)`.
pub fn free_boundary_curvature(h: f64, dh: f64, d2h: f64, k: f64, dk: f64) -> Result<f64> {
    let lever = 1.0 - k * h;
    if lever == 0.0 {
        return Err(Error::Singular("free surface at the centre of curvature".into()));
    }
    let num = k + d2h - 2.0 * k * k * h + k * k * k * h * h - k * h * d2h + 2.0 * k * dh * dh + dk * h * dh;
    Ok(num / (lever * lever + dh * dh).powf(1.5))
}

/// First-order correction coefficient of the stationary thin-film equation.
/// `d_ey_n` is the arc-length derivative of the vertical component of the
/// normal.
pub fn qtilde(k: f64, dk: f64, q: f64, b: f64, d_ey_n: f64) -> f64 {
    2.0 * k * dk - 0.875 * k * q + 0.625 * dk / b - 0.375 * d_ey_n
}

/// Scales of the accumulation boundary layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryLayerScales {
    pub s_scale: f64,
    pub h_scale: f64,
    pub a: f64,
}

/// Scales for `Q(s) = A s² + b ε^{6/17}` near a stagnation point.
pub fn boundary_layer_params(big_a: f64, b: f64, eps: f64) -> Result<BoundaryLayerScales> {
    if !(big_a > 0.0 && big_a.is_finite()) || !(eps > 0.0 && eps.is_finite()) || !b.is_finite() {
        return Err(invalid(format!("need A > 0, eps > 0 and finite b, got A = {big_a}, eps = {eps}, b = {b}")));
    }
    Ok(BoundaryLayerScales {
        s_scale: eps.powf(3.0 / 17.0) * (1.5 / big_a.powi(4)).powf(1.0 / 17.0),
        h_scale: eps.powf(-2.0 / 17.0) * (1.5 / big_a.powf(0.6)).powf(5.0 / 17.0),
        a: (2.0 / (3.0 * big_a.powf(4.5))).powf(2.0 / 17.0) * b,
    })
}

/// The bump `ξ(z) = c exp(−1/(z(1−z)))` on `(0, 1)`, normalised to unit integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    pub c: f64,
}

impl Default for BumpProfile {
    fn default() -> Self {
        Self::new()
    }
}

impl BumpProfile {
    pub fn new() -> Self {
        // The integrand is flat to all orders at both ends, so the trapezoid
        // rule converges spectrally.
        let n = 4000;
        let h = 1.0 / n as f64;
        let sum: f64 = (1..n).map(|i| raw_bump(i as f64 * h)).sum();
        Self { c: 1.0 / (sum * h) }
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.c * raw_bump(z)
    }

    pub fn deriv(&self, z: f64) -> f64 {
        if z <= 0.0 || z >= 1.0 {
            return 0.0;
        }
        let p = z * (1.0 - z);
        self.eval(z) * (1.0 - 2.0 * z) / (p * p)
    }

    pub fn deriv2(&self, z: f64) -> f64 {
        if z <= 0.0 || z >= 1.0 {
            return 0.0;
        }
        let p = z * (1.0 - z);
        let dp = 1.0 - 2.0 * z;
        let g1 = dp / (p * p);
        let g2 = (-2.0 * p - 2.0 * dp * dp) / (p * p * p);
        self.eval(z) * (g1 * g1 + g2)
    }

    pub fn peak(&self) -> f64 {
        self.eval(0.5)
    }
}

fn raw_bump(z: f64) -> f64 {
    if z <= 0.0 || z >= 1.0 {
        0.0
    } else {
        (-1.0 / (z * (1.0 - z))).exp()
    }
}

/// Sampled substrate on a uniform arc-length grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstrateCurve {
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub k: Vec<f64>,
    pub q: Vec<f64>,
    pub b: f64,
    pub q0: f64,
    pub omega: f64,
    pub theta1: f64,
}

impl SubstrateCurve {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn ds(&self) -> f64 {
        self.s[1] - self.s[0]
    }

    /// Coefficient `c` of the least-squares fit `Q = ω + c s² + d s⁴` over
    /// `0 < |s| ≤ half_width`.
    pub fn quadratic_limit(&self, half_width: f64) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self
            .s
            .iter()
            .zip(&self.q)
            .filter(|(s, _)| s.abs() <= half_width && **s != 0.0)
            .map(|(s, q)| (*s / half_width, q - self.omega))
            .collect();
        if pts.len() < 4 {
            return Err(invalid("fit window holds too few samples"));
        }
        let m = DMatrix::from_fn(pts.len(), 2, |i, j| pts[i].0.powi(2 * (j as i32 + 1)));
        let r = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
        let coef = m.svd(true, true).solve(&r, 1e-14).map_err(|e| Error::Numerical(e.to_string()))?;
        Ok(coef[0] / (half_width * half_width))
    }
}

/// Settings of [`build_q_extcurves`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtCurvesConfig {
    pub b: f64,
    /// Largest admissible `ω`.
    pub omega_cap: f64,
    /// Grid points per length `ω`.
    pub points_per_omega: usize,
    /// Length of the blend back to the inclined plane.
    pub blend_length: f64,
    /// Straight pieces added on either side.
    pub margin: f64,
    pub integrator: IntegratorConfig,
}

impl Default for ExtCurvesConfig {
    fn default() -> Self {
        Self {
            b: 1.0,
            omega_cap: 0.05,
            points_per_omega: 100,
            blend_length: 1.0,
            margin: 1.0,
            integrator: IntegratorConfig::new(1e-12, 1e-15),
        }
    }
}

/// Quintic with prescribed value, slope and second derivative at both ends of `[0, len]`.
#[derive(Debug, Clone, Copy)]
struct QuinticBlend {
    c: [f64; 6],
    len: f64,
}

impl QuinticBlend {
    fn new(start: [f64; 3], end: [f64; 3], len: f64) -> Self {
        let (p0, v0, a0) = (start[0], start[1] * len, start[2] * len * len);
        let (p1, v1, a1) = (end[0], end[1] * len, end[2] * len * len);
        let c3 = 10.0 * (p1 - p0) - 6.0 * v0 - 4.0 * v1 - 1.5 * a0 + 0.5 * a1;
        let c4 = -15.0 * (p1 - p0) + 8.0 * v0 + 7.0 * v1 + 1.5 * a0 - a1;
        let c5 = 6.0 * (p1 - p0) - 3.0 * v0 - 3.0 * v1 - 0.5 * a0 + 0.5 * a1;
        Self { c: [p0, v0, 0.5 * a0, c3, c4, c5], len }
    }

    /// Value and first two derivatives at offset `t ∈ [0, len]`.
    fn eval(&self, t: f64) -> [f64; 3] {
        let x = t / self.len;
        let c = &self.c;
        let p = c[0] + x * (c[1] + x * (c[2] + x * (c[3] + x * (c[4] + x * c[5]))));
        let d = c[1] + x * (2.0 * c[2] + x * (3.0 * c[3] + x * (4.0 * c[4] + x * 5.0 * c[5])));
        let dd = 2.0 * c[2] + x * (6.0 * c[3] + x * (12.0 * c[4] + x * 20.0 * c[5]));
        [p, d / self.len, dd / (self.len * self.len)]
    }
}

/// Build a substrate whose driving coefficient dips to `Q(0) = ω` and
/// vanishes quadratically relative to `ω` there, approaching the inclined
/// plane `θ ≡ θ₁` on both sides.
///
/// Left of `s = ω` the coefficient is prescribed,
/// `Q(s) = Q₀ − (Q₀ − ω) ξ(s/ω + 1/2)/ξ(1/2)`, and the pendulum is integrated
/// from the exact plane data at `s = −10ω`. Right of `ω` the angle is blended
/// back to `θ₁` by a quintic and `Q` is read off the pendulum equation. The
/// construction is checked a posteriori against the bounds
/// `|θ − θ₁| ≤ ω/4`, `|θ'| ≤ 2BQ₀ω`, `|θ''| ≤ 2Bω` on `s ≥ ω` and for
/// self-intersections.
pub fn build_q_extcurves(q0: f64, omega: f64, bump: &BumpProfile, cfg: &ExtCurvesConfig) -> Result<SubstrateCurve> {
    if !(q0 > 0.0 && q0 < 1.0) {
        return Err(invalid(format!("need 0 < Q0 < 1, got {q0}")));
    }
    if !(omega > 0.0 && omega <= cfg.omega_cap && omega < q0) {
        return Err(invalid(format!("need 0 < omega <= {} and omega < Q0, got {omega}", cfg.omega_cap)));
    }
    if cfg.points_per_omega < 8 {
        return Err(invalid("need at least 8 points per omega"));
    }
    if !(cfg.blend_length > 0.0 && cfg.margin >= 0.0) {
        return Err(invalid("blend length must be positive and margin non-negative"));
    }
    let b = cfg.b;
    let (theta1, _) = inclined_plane_angles(q0)?;
    // Written about ω so that Q(0) = ω holds without rounding.
    let peak = bump.peak();
    let q_of = move |s: f64| omega + (q0 - omega) * (1.0 - bump.eval(s / omega + 0.5) / peak);

    let ds = omega / cfg.points_per_omega as f64;
    let start = -10.0 * omega;
    let cfg_ode = cfg.integrator.with_h_max(omega / 20.0);
    let tr = pendulum_solve(q_of, b, theta1, 0.0, (start, omega), &cfg_ode)?;
    let end_state = *tr.last();
    let d2_end = b * (end_state[0].sin() + q_of(omega));
    let blend = QuinticBlend::new([end_state[0], end_state[1], d2_end], [theta1, 0.0, 0.0], cfg.blend_length);

    let i_lo = -((cfg.margin + 10.0 * omega) / ds).ceil() as i64;
    let i_hi = ((omega + cfg.blend_length + cfg.margin) / ds).ceil() as i64;
    let n = (i_hi - i_lo + 1) as usize;
    let mut s = Vec::with_capacity(n);
    let mut theta = Vec::with_capacity(n);
    let mut k = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    let bound_th = omega / 4.0;
    let bound_d1 = 2.0 * b * q0 * omega;
    let bound_d2 = 2.0 * b * omega;
    for i in i_lo..=i_hi {
        let si = i as f64 * ds;
        let (th, dth, qi) = if si <= start {
            (theta1, 0.0, q0)
        } else if si <= omega {
            let y = tr.eval(si.min(omega)).ok_or_else(|| Error::Numerical("pendulum sample outside span".into()))?;
            (y[0], y[1], q_of(si))
        } else if si <= omega + cfg.blend_length {
            let [p, d, dd] = blend.eval(si - omega);
            if (p - theta1).abs() > bound_th || d.abs() > bound_d1 || dd.abs() > bound_d2 {
                return Err(Error::BoundViolation(format!(
                    "extension at s = {si}: |dθ| = {:.3e}, |θ'| = {:.3e}, |θ''| = {:.3e}",
                    (p - theta1).abs(),
                    d.abs(),
                    dd.abs()
                )));
            }
            (p, d, dd / b - p.sin())
        } else {
            (theta1, 0.0, q0)
        };
        s.push(si);
        theta.push(th);
        k.push(dth);
        q.push(qi);
    }
    if let Some(i) = theta.iter().position(|t| (t - theta1).abs() > bound_th) {
        return Err(Error::BoundViolation(format!("angle deviates by more than omega/4 at s = {}", s[i])));
    }
    let (mut x, mut y) = reconstruct_curve(&theta, ds);
    // Put the origin of the plane at s = 0.
    let i0 = (-i_lo) as usize;
    let (x0, y0) = (x[i0], y[i0]);
    x.iter_mut().for_each(|v| *v -= x0);
    y.iter_mut().for_each(|v| *v -= y0);
    if let Some((first, second)) = find_self_intersection(&x, &y) {
        return Err(Error::SelfIntersection { first, second });
    }
    Ok(SubstrateCurve { s, theta, x, y, k, q, b, q0, omega, theta1 })
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], p3: [f64; 2], p4: [f64; 2]) -> bool {
    let d1 = orient(p3, p4, p1);
    let d2 = orient(p3, p4, p2);
    let d3 = orient(p1, p2, p3);
    let d4 = orient(p1, p2, p4);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(p3, p4, p1))
        || (d2 == 0.0 && on_segment(p3, p4, p2))
        || (d3 == 0.0 && on_segment(p1, p2, p3))
        || (d4 == 0.0 && on_segment(p1, p2, p4))
}

/// Sweep-line test for intersections between non-adjacent segments of the
/// polyline through `(x[i], y[i])`. Returns the first pair found.
pub fn find_self_intersection(x: &[f64], y: &[f64]) -> Option<(usize, usize)> {
    let n = x.len().min(y.len());
    if n < 4 {
        return None;
    }
    let pt = |i: usize| [x[i], y[i]];
    // Segment i joins points i and i+1; store endpoints left to right.
    let ends: Vec<([f64; 2], [f64; 2])> = (0..n - 1)
        .map(|i| {
            let (a, b) = (pt(i), pt(i + 1));
            if (a[0], a[1]) <= (b[0], b[1]) {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect();
    // (x, y, is_right_end, segment); left ends sort before right ends at ties.
    let mut events: Vec<(f64, f64, bool, usize)> = Vec::with_capacity(2 * ends.len());
    for (i, (l, r)) in ends.iter().enumerate() {
        events.push((l[0], l[1], false, i));
        events.push((r[0], r[1], true, i));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)).then(a.1.total_cmp(&b.1)).then(a.3.cmp(&b.3)));

    let y_at = |i: usize, sx: f64| -> f64 {
        let (l, r) = ends[i];
        if r[0] == l[0] {
            l[1].min(r[1])
        } else {
            let t = ((sx - l[0]) / (r[0] - l[0])).clamp(0.0, 1.0);
            l[1] + t * (r[1] - l[1])
        }
    };
    let slope = |i: usize| -> f64 {
        let (l, r) = ends[i];
        if r[0] == l[0] {
            f64::INFINITY
        } else {
            (r[1] - l[1]) / (r[0] - l[0])
        }
    };
    let test = |i: usize, j: usize| -> Option<(usize, usize)> {
        let (a, b) = (i.min(j), i.max(j));
        if b - a <= 1 {
            return None;
        }
        let (p1, p2) = ends[a];
        let (p3, p4) = ends[b];
        segments_intersect(p1, p2, p3, p4).then_some((a, b))
    };

    let mut status: Vec<usize> = Vec::new();
    for &(sx, _, is_right, seg) in &events {
        let key = |i: usize| (y_at(i, sx), slope(i), i);
        let cmp = |i: &usize, probe: &(f64, f64, usize)| {
            let k = key(*i);
            k.0.total_cmp(&probe.0).then(k.1.total_cmp(&probe.1)).then(k.2.cmp(&probe.2))
        };
        if !is_right {
            let probe = key(seg);
            let pos = status.binary_search_by(|i| cmp(i, &probe)).unwrap_or_else(|p| p);
            status.insert(pos, seg);
            if pos > 0 {
                if let Some(hit) = test(status[pos - 1], seg) {
                    return Some(hit);
                }
            }
            if pos + 1 < status.len() {
                if let Some(hit) = test(seg, status[pos + 1]) {
                    return Some(hit);
                }
            }
        } else {
            let pos = match status.iter().position(|&i| i == seg) {
                Some(p) => p,
                None => continue,
            };
            if pos > 0 && pos + 1 < status.len() {
                if let Some(hit) = test(status[pos - 1], status[pos + 1]) {
                    return Some(hit);
                }
            }
            status.remove(pos);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_is_stationary() {
        let q0 = 0.5;
        let (t1, t1s) = inclined_plane_angles(q0).unwrap();
        assert!((t1s + t1 + PI).abs() < 1e-15);
        let cfg = IntegratorConfig::new(1e-12, 1e-14);
        let tr = pendulum_solve(|_| q0, 1.0, t1, 0.0, (0.0, 50.0), &cfg).unwrap();
        assert!(tr.y.iter().all(|y| (y[0] - t1).abs() < 1e-10 && y[1].abs() < 1e-10));
    }

    #[test]
    fn steady_height_examples() {
        assert!((steady_height(3.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((steady_height(0.375).unwrap() - 2.0).abs() < 1e-15);
        assert!(steady_height(-3.0).unwrap() < 0.0);
        assert!(steady_height(0.0).is_err());
    }

    #[test]
    fn curvature_special_cases() {
        let (h, k) = (0.3, 0.7);
        let kk = free_boundary_curvature(h, 0.0, 0.0, k, 0.0).unwrap();
        assert!((kk - k / (1.0 - k * h)).abs() < 1e-14);
        let (dh, d2h) = (0.4, -1.3);
        let kk = free_boundary_curvature(h, dh, d2h, 0.0, 0.0).unwrap();
        assert!((kk - d2h / (1.0 + dh * dh).powf(1.5)).abs() < 1e-14);
        assert!(free_boundary_curvature(2.0, 0.0, 0.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn quintic_blend_hits_end_data() {
        let q = QuinticBlend::new([1.0, -0.2, 0.3], [0.5, 0.0, 0.0], 2.0);
        let a = q.eval(0.0);
        let b = q.eval(2.0);
        for (x, y) in a.iter().zip([1.0, -0.2, 0.3]) {
            assert!((x - y).abs() < 1e-14);
        }
        for (x, y) in b.iter().zip([0.5, 0.0, 0.0]) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn bump_invariants() {
        let bump = BumpProfile::new();
        let n = 20000;
        let h = 1.0 / n as f64;
        let integral: f64 = (1..n).map(|i| bump.eval(i as f64 * h)).sum::<f64>() * h;
        assert!((integral - 1.0).abs() < 1e-10);
        assert_eq!(bump.eval(-0.1), 0.0);
        assert_eq!(bump.eval(1.0), 0.0);
        assert!(bump.deriv(0.25) > 0.0 && bump.deriv(0.75) < 0.0);
        assert!(bump.deriv(0.5).abs() < 1e-12);
        assert!(bump.deriv2(0.5) < 0.0);
        let z = 0.3;
        let e = 1e-5;
        let fd = (bump.eval(z + e) - bump.eval(z - e)) / (2.0 * e);
        assert!((fd - bump.deriv(z)).abs() < 1e-7);
        let fd2 = (bump.deriv(z + e) - bump.deriv(z - e)) / (2.0 * e);
        assert!((fd2 - bump.deriv2(z)).abs() < 1e-5);
    }

    #[test]
    fn sweep_detects_crossings() {
        // A figure eight crosses itself; a circle arc short of closing does not.
        let m = 400;
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for i in 0..=m {
            let t = 2.0 * PI * i as f64 / m as f64;
            x.push(t.sin());
            y.push((2.0 * t).sin());
        }
        assert!(find_self_intersection(&x, &y).is_some());
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for i in 0..=m {
            let t = 1.9 * PI * i as f64 / m as f64;
            x.push(t.cos());
            y.push(t.sin());
        }
        assert!(find_self_intersection(&x, &y).is_none());
    }
}
