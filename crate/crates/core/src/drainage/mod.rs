//! The drainage equation `(Φ''' + 1) Φ³ = 1` written as the first-order
//! system `Φ' = W, W' = Ψ, Ψ' = Φ⁻³ − 1`.

mod cycle;
mod tracking;

pub use cycle::{cycle_map, cycle_map_with, predicted_sequences, CycleMapResult, PredictedCycle, Recursion};
pub use tracking::{track_oscillations, track_oscillations_with, OscillationRecord, OscillationRun, TrackStop, ONSET_AMPLITUDE};

use crate::error::{invalid, Result};
use nalgebra::Complex;

/// `(3/2)^{1/3}`: the limiting curvature coefficient at the maxima.
pub fn limit_curvature() -> f64 {
    1.5f64.cbrt()
}

/// `(3/2)^{5/3}`: slope of the limiting outer profile where it reaches zero.
pub fn limit_slope() -> f64 {
    1.5f64.powf(5.0 / 3.0)
}

/// Phase point of the drainage system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State3 {
    pub tau: f64,
    pub phi: f64,
    pub w: f64,
    pub psi: f64,
}

impl State3 {
    pub fn new(tau: f64, phi: f64, w: f64, psi: f64) -> Self {
        Self { tau, phi, w, psi }
    }

    pub fn vector(&self) -> [f64; 3] {
        [self.phi, self.w, self.psi]
    }

    pub fn from_vector(tau: f64, y: &[f64; 3]) -> Self {
        Self { tau, phi: y[0], w: y[1], psi: y[2] }
    }
}

/// `Φ⁻³` computed without overflowing the intermediate cube.
#[inline]
pub(crate) fn inv_cube(x: f64) -> f64 {
    let r = 1.0 / x;
    r * r * r
}

/// Vector field on raw arrays; no positivity check.
#[inline]
pub fn field(y: &[f64; 3]) -> [f64; 3] {
    [y[1], y[2], inv_cube(y[0]) - 1.0]
}

/// Derivative of the state, `(W, Ψ, Φ⁻³ − 1)`.
pub fn rhs_wilsonjones(s: &State3) -> Result<[f64; 3]> {
    if !(s.phi > 0.0) {
        return Err(invalid(format!("phi must be positive, got {}", s.phi)));
    }
    Ok(field(&s.vector()))
}

/// Lyapunov-type energy `E = ΨW + 1/(2Φ²) + Φ`, nondecreasing along solutions.
pub fn energy(s: &State3) -> Result<f64> {
    if !(s.phi > 0.0) {
        return Err(invalid(format!("phi must be positive, got {}", s.phi)));
    }
    Ok(s.psi * s.w + 0.5 / (s.phi * s.phi) + s.phi)
}

/// `dE/dτ` evaluated by the chain rule through the vector field.
pub fn energy_rate(s: &State3) -> Result<f64> {
    let d = rhs_wilsonjones(s)?;
    let de_dphi = -1.0 / (s.phi * s.phi * s.phi) + 1.0;
    Ok(de_dphi * d[0] + s.psi * d[1] + s.w * d[2])
}

/// Linearisation of the system at the critical point `(1, 0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenData {
    pub p_s: [f64; 3],
    pub lambda1: f64,
    /// The eigenvalue with positive imaginary part; its conjugate is the third.
    pub lambda23: Complex<f64>,
    pub v1: [f64; 3],
    pub v2: [f64; 3],
    pub v3: [f64; 3],
    pub jacobian: [[f64; 3]; 3],
}

/// Closed-form eigen-structure at the critical point.
///
/// `v2` and `v3` span the unstable plane, i.e. they are orthogonal to the left
/// eigenvector `(3^{2/3}, −3^{1/3}, 1)` of the stable direction.
pub fn critical_point_data() -> EigenData {
    let c = 3f64.cbrt();
    let s3 = 3f64.sqrt();
    EigenData {
        p_s: [1.0, 0.0, 0.0],
        lambda1: -c,
        lambda23: Complex::new(0.5 * c, 0.5 * c * s3),
        v1: [1.0 / (c * c), -1.0 / c, 1.0],
        v2: [-3f64.powf(1.0 / 6.0) / 6.0, 1.0 / c - s3 / 6.0, 1.0],
        v3: [3f64.powf(5.0 / 6.0) / 6.0, 3f64.powf(1.0 / 6.0) / 2.0, 0.0],
        jacobian: [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-3.0, 0.0, 0.0]],
    }
}

/// Start on the linear approximation of the unstable manifold.
pub fn seed_unstable(r: f64, alpha: f64) -> Result<State3> {
    if !(r > 0.0 && r <= 1e-4) {
        return Err(invalid(format!("offset r must lie in (0, 1e-4], got {r}")));
    }
    if !alpha.is_finite() {
        return Err(invalid("angle must be finite"));
    }
    let e = critical_point_data();
    let (ca, sa) = (alpha.cos(), alpha.sin());
    let d: [f64; 3] = std::array::from_fn(|i| r * (ca * e.v2[i] + sa * e.v3[i]));
    Ok(State3::new(0.0, 1.0 + d[0], d[1], d[2]))
}

/// Start on the linear approximation of the stable manifold.
pub fn seed_stable(delta: f64) -> Result<State3> {
    if !(delta != 0.0 && delta.abs() <= 1e-4) {
        return Err(invalid(format!("offset delta must satisfy 0 < |delta| <= 1e-4, got {delta}")));
    }
    let v1 = critical_point_data().v1;
    Ok(State3::new(0.0, 1.0 + delta * v1[0], delta * v1[1], delta * v1[2]))
}

/// The cubic `P_a(η) = −η³/6 − (a/2)η² + 1` describing the outer profile
/// between a maximum and the following inner layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyOuter {
    pub a: f64,
    /// Positive simple root.
    pub eta_a: f64,
    /// Double zero at `−2a`, present only for `a = (3/2)^{1/3}`.
    pub eta_0: Option<f64>,
}

impl PolyOuter {
    pub fn eval(&self, eta: f64) -> f64 {
        -eta * eta * eta / 6.0 - 0.5 * self.a * eta * eta + 1.0
    }

    pub fn deriv(&self, eta: f64) -> f64 {
        -0.5 * eta * eta - self.a * eta
    }

    pub fn deriv2(&self, eta: f64) -> f64 {
        -eta - self.a
    }

    /// `−P_a'(η_a)`, the slope with which the profile reaches zero.
    pub fn slope_at_root(&self) -> f64 {
        -self.deriv(self.eta_a)
    }

    /// `a η_a² + η_a³/2`: the slope in the inner variables scaled by `η_a`.
    pub fn inner_slope(&self) -> f64 {
        self.eta_a * self.slope_at_root()
    }
}

/// Build `P_a` and its positive root by safeguarded Newton iteration.
pub fn poly_outer(a: f64) -> Result<PolyOuter> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid(format!("coefficient a must be positive, got {a}")));
    }
    let p = PolyOuter { a, eta_a: f64::NAN, eta_0: None };
    let mut lo = 0.0;
    let mut hi = 1f64.max(3.0 / a);
    while p.eval(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut x = (3.0 / a).sqrt().min(6f64.cbrt());
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let fx = p.eval(x);
        if fx == 0.0 {
            break;
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / p.deriv(x);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x {
            x = next;
            break;
        }
        x = next;
    }
    let eta0 = -2.0 * a;
    let has_double = p.eval(eta0).abs() <= 1e-12 && p.deriv(eta0).abs() <= 1e-12;
    Ok(PolyOuter { a, eta_a: x, eta_0: has_double.then_some(eta0) })
}

/// State in the blow-down chart near a hypothetical vanishing time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowdownState {
    pub phi_bar: f64,
    pub w_bar: f64,
    pub psi_bar: f64,
    pub s: f64,
}

/// Exponent applied to `Ψ` by the blow-down chart as it is usually displayed.
pub const BLOWDOWN_PSI_EXPONENT: f64 = -1.25;

/// Map a state into the chart `Φ̄ = σ^{−3/4}Φ`, `W̄ = σ^{1/4}W`,
/// `Ψ̄ = σ^{−5/4}Ψ`, `s = −ln σ` with `σ = τ* − τ`.
pub fn blowdown_chart(st: &State3, tau_star: f64) -> Result<BlowdownState> {
    let sigma = tau_star - st.tau;
    if !(sigma > 0.0) {
        return Err(invalid(format!("tau {} must lie before tau* {}", st.tau, tau_star)));
    }
    Ok(BlowdownState {
        phi_bar: sigma.powf(-0.75) * st.phi,
        w_bar: sigma.powf(0.25) * st.w,
        psi_bar: sigma.powf(BLOWDOWN_PSI_EXPONENT) * st.psi,
        s: -sigma.ln(),
    })
}

/// Inverse of [`blowdown_chart`].
pub fn blowdown_inverse(b: &BlowdownState, tau_star: f64) -> State3 {
    let sigma = (-b.s).exp();
    State3 {
        tau: tau_star - sigma,
        phi: sigma.powf(0.75) * b.phi_bar,
        w: sigma.powf(-0.25) * b.w_bar,
        psi: sigma.powf(-BLOWDOWN_PSI_EXPONENT) * b.psi_bar,
    }
}

/// Vector field of the blow-down system in the chart variables.
pub fn blowdown_rhs(b: &BlowdownState) -> [f64; 3] {
    [
        b.w_bar + 0.75 * b.phi_bar,
        b.psi_bar - 0.25 * b.w_bar,
        -1.25 * b.psi_bar + inv_cube(b.phi_bar) - (-2.25 * b.s).exp(),
    ]
}
