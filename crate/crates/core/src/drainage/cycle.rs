use super::{inv_cube, limit_curvature, poly_outer};
use crate::error::{invalid, Error, Result};
use crate::inner::reference_constants;
use crate::ode::{integrate_autonomous, Direction, Event, IntegratorConfig, Termination};

/// Value of the inner-layer variable at which the charts are switched.
const SWITCH_LEVEL: f64 = 1e3;
const MAX_AMPLITUDE: f64 = 1e24;

/// Measured and predicted data for one renormalised oscillation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleMapResult {
    pub l_in: f64,
    pub a_in: f64,
    pub gamma_in: f64,
    pub l_out_measured: f64,
    pub a_out_measured: f64,
    pub dtau_measured: f64,
    /// Minimum of Φ between the two maxima.
    pub m_measured: f64,
    /// Parabolic coefficient of the inner layer, in the inner variables
    /// scaled by `η_{a_n}` (slope `K_n`).
    pub gamma_est: f64,
    pub k_n: f64,
    pub a_n_coef: f64,
    pub l_out_predicted: f64,
    pub dtau_predicted: f64,
}

impl CycleMapResult {
    pub fn amplitude_ratio(&self) -> f64 {
        self.l_out_measured / self.l_out_predicted
    }
}

/// [`cycle_map_with`] using purely relative tolerance `1e-12`.
pub fn cycle_map(l: f64, a_n: f64, gamma: f64) -> Result<CycleMapResult> {
    cycle_map_with(l, a_n, gamma, &IntegratorConfig::relative(1e-12))
}

/// Integrate one oscillation of the rescaled outer equation
/// `Φ̄''' + 1 = L⁻³ Φ̄⁻³` from a maximum `(1, 0, −a_n)`.
///
/// Three charts are used, each an exact change of variables: the outer
/// variables until Φ̄ reaches the inner scale, the inner variables
/// `Φ̄ = η³φ/L³`, `η − η_a = η⁴ζ/L³` through the minimum, and the variables of
/// the next cycle `Φ̄ = (2Γ/a)³L⁹Φ̂`, `η̂ + 2a = (a/2Γ)(η − η_a)/L³` up to the
/// next maximum. `gamma` is the parabolic coefficient of the inner solution
/// with slope `(3/2)^{5/3}`, used only to scale the last chart.
pub fn cycle_map_with(l: f64, a_n: f64, gamma: f64, config: &IntegratorConfig) -> Result<CycleMapResult> {
    if !(l > 10.0 && l <= MAX_AMPLITUDE) {
        return Err(invalid(format!("amplitude must lie in (10, {MAX_AMPLITUDE:e}], got {l}")));
    }
    if !(a_n > 0.0 && a_n.is_finite()) {
        return Err(invalid(format!("curvature coefficient must be positive, got {a_n}")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid(format!("gamma must be positive, got {gamma}")));
    }
    let a = limit_curvature();
    let poly = poly_outer(a_n)?;
    let eta = poly.eta_a;
    let l3 = l * l * l;
    let positive = |y: &[f64; 3]| y[0] > 0.0;

    // Outer chart.
    let threshold = SWITCH_LEVEL * eta.powi(3) / l3;
    if threshold >= 1.0 {
        return Err(Error::SwitchNotReached(format!("amplitude {l} too small for the inner scale")));
    }
    let inv_l = 1.0 / l;
    let outer = move |y: &[f64; 3]| [y[1], y[2], inv_cube(y[0] / inv_l) - 1.0];
    let ev_a = [Event::new(move |_t, y: &[f64; 3]| y[0] - threshold, Direction::Falling).terminal()];
    let tr_a = integrate_autonomous(outer, [1.0, 0.0, -a_n], 4.0 * eta + 4.0, config, positive, &ev_a)?;
    if tr_a.termination != (Termination::Event { index: 0 }) {
        return Err(Error::SwitchNotReached(format!("outer chart ended with {:?}", tr_a.termination)));
    }
    let d_eta_outer = tr_a.elapsed;
    let ya = tr_a.y;

    // Inner chart.
    let eta3 = eta.powi(3);
    let eta4 = eta3 * eta;
    let eta5 = eta4 * eta;
    let gravity = eta4 * eta5 / (l3 * l3);
    let y_b0 = [l3 * ya[0] / eta3, eta * ya[1], eta5 * ya[2] / l3];
    let inner = move |y: &[f64; 3]| [y[1], y[2], inv_cube(y[0]) - gravity];
    let ev_b = [
        Event::new(|_t, y: &[f64; 3]| y[1], Direction::Rising),
        Event::new(|_t, y: &[f64; 3]| y[0] - SWITCH_LEVEL, Direction::Rising).terminal(),
    ];
    let tr_b = integrate_autonomous(inner, y_b0, 1e9, config, positive, &ev_b)?;
    if tr_b.termination != (Termination::Event { index: 1 }) {
        return Err(Error::Numerical(format!("inner chart ended with {:?}", tr_b.termination)));
    }
    let min_phi = tr_b
        .events
        .iter()
        .find(|e| e.index == 0)
        .map(|e| e.y[0])
        .ok_or_else(|| Error::Numerical("no minimum in the inner chart".into()))?;
    let d_zeta = tr_b.elapsed;
    let yb = tr_b.y;
    let gamma_est = 0.5 * yb[2];

    // Next-cycle chart.
    let g1 = 2.0 * gamma / a;
    let g2 = g1 * g1;
    let g3 = g2 * g1;
    let l6 = l3 * l3;
    let l10 = l6 * l3 * l;
    let l12 = l6 * l6;
    let y_c0 = [eta3 * yb[0] / (g3 * l12), yb[1] / (eta * g2 * l6), yb[2] / (eta5 * g1)];
    let c13 = 1.0 / (g3 * l10);
    let next = move |y: &[f64; 3]| [y[1], y[2], (c13 / y[0]).powi(3) - 1.0];
    let ev_c = [Event::new(|_t, y: &[f64; 3]| y[1], Direction::Falling).terminal()];
    let tr_c = integrate_autonomous(next, y_c0, 20.0, config, positive, &ev_c)?;
    if tr_c.termination != (Termination::Event { index: 0 }) {
        return Err(Error::Numerical(format!("next-cycle chart ended with {:?}", tr_c.termination)));
    }
    let yc = tr_c.y;
    let d_hat = tr_c.elapsed;

    let ratio = yc[0];
    let d_eta = d_eta_outer + eta4 * d_zeta / l3 + g1 * l3 * d_hat;
    let k_n = poly.inner_slope();
    let k_ratio = reference_constants().k_ratio;
    let a_coef = k_ratio.powf(5.0 / 3.0) * k_n.powi(5);
    let l_pred = g3 * l10;
    Ok(CycleMapResult {
        l_in: l,
        a_in: a_n,
        gamma_in: gamma,
        l_out_measured: l_pred * ratio,
        a_out_measured: -yc[2] / ratio.cbrt(),
        dtau_measured: l.cbrt() * d_eta,
        m_measured: eta3 * min_phi / (l * l),
        gamma_est,
        k_n,
        a_n_coef: a_coef,
        l_out_predicted: l_pred,
        dtau_predicted: a * l.cbrt() + 4.0 * gamma * l.powf(10.0 / 3.0),
    })
}

/// Log-space iteration of the amplitude recursion `L ↦ (2Γ/a)³ L¹⁰`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recursion {
    pub gamma: f64,
    pub a: f64,
}

impl Recursion {
    pub fn new(gamma: f64) -> Self {
        Self { gamma, a: limit_curvature() }
    }

    fn shift(&self) -> f64 {
        3.0 * (2.0 * self.gamma / self.a).ln()
    }

    /// `Z ↦ 10 Z + 3 log(2Γ/a)` with `Z = log L`.
    pub fn next_log(&self, z: f64) -> f64 {
        10.0 * z + self.shift()
    }

    /// The amplitude mapped to itself, `(a/2Γ)^{1/3}`.
    pub fn fixed_point(&self) -> f64 {
        (self.a / (2.0 * self.gamma)).cbrt()
    }

    /// The constant `C` with `L_n = (a/2Γ)^{1/3} exp(C 10ⁿ)`, given `L_1`.
    pub fn growth_constant(&self, l1: f64) -> f64 {
        (l1.ln() + self.shift() / 9.0) / 10.0
    }
}

/// One row of [`predicted_sequences`]; all quantities are natural logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedCycle {
    pub n: usize,
    pub log_l: f64,
    /// `−∞` encodes `τ₁⁺ = 0`.
    pub log_tau_plus: f64,
    pub log_tau_minus: f64,
    pub log_m: f64,
}

fn log_add_exp(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let (hi, lo) = if x > y { (x, y) } else { (y, x) };
    hi + (lo - hi).exp().ln_1p()
}

/// Iterate the asymptotic recursions for amplitudes, times and minima,
/// starting from `L_1` with `τ₁⁺ = 0`.
pub fn predicted_sequences(l1: f64, gamma: f64, n_max: usize) -> Result<Vec<PredictedCycle>> {
    if !(l1 > 0.0 && l1.is_finite()) {
        return Err(invalid(format!("L1 must be positive, got {l1}")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid(format!("gamma must be positive, got {gamma}")));
    }
    let rec = Recursion::new(gamma);
    let a = rec.a;
    let slope = super::limit_slope();
    let log_min_phi = (reference_constants().min_phi_unit / slope.powi(3)).ln();
    let log_eta = a.ln();
    let log_four_gamma = (4.0 * gamma).ln();

    let mut out = Vec::with_capacity(n_max);
    let mut z = l1.ln();
    let mut log_tp = f64::NEG_INFINITY;
    for n in 1..=n_max {
        let log_tm = log_add_exp(log_tp, log_eta + z / 3.0);
        out.push(PredictedCycle { n, log_l: z, log_tau_plus: log_tp, log_tau_minus: log_tm, log_m: log_min_phi - 2.0 * z });
        log_tp = log_add_exp(log_tm, log_four_gamma + 10.0 * z / 3.0);
        z = rec.next_log(z);
    }
    Ok(out)
}
