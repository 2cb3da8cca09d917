use super::{inner_field, to_planar, SeparatrixTable};
use crate::error::{invalid, Error, Result};
use crate::ode::{integrate, Direction, Event, IntegratorConfig, Termination};

/// Half-width of the band around `v̄(u)` treated as the separatrix itself.
pub const SEPARATRIX_BAND: f64 = 1e-6;

/// Backward-in-ζ fate of a solution of `φ''' = φ⁻³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BackwardBehavior {
    /// `φ → 0` as `ζ → ζ*⁺`.
    FiniteTimeZero { zeta_star: f64 },
    /// `φ ~ Γ̃ ζ²` as `ζ → −∞`.
    Parabolic { gamma_tilde: f64 },
    /// Within `band` of `v̄` at the matched `u`.
    Separatrix { band: f64 },
}

/// Classify the backward behaviour of the solution through
/// `(φ, φ', φ'')` at `ζ = 0` by its position relative to the separatrix,
/// then integrate backward to quantify it.
pub fn classify_backward(
    phi0: f64,
    dphi0: f64,
    d2phi0: f64,
    table: &SeparatrixTable,
    config: &IntegratorConfig,
) -> Result<BackwardBehavior> {
    if !(phi0 > 0.0) {
        return Err(invalid(format!("phi must be positive, got {phi0}")));
    }
    let (u, v) = to_planar(phi0, dphi0, d2phi0)?;
    let offset = v - table.v_bar(u)?;
    if offset.abs() <= SEPARATRIX_BAND {
        return Ok(BackwardBehavior::Separatrix { band: SEPARATRIX_BAND });
    }
    let rhs = |_t: f64, y: &[f64; 3]| inner_field(y);
    let floor = 1e-6 * phi0;
    let ceiling = 1e8 * phi0.max(1.0);
    let events = [
        Event::new(move |_t, y: &[f64; 3]| y[0] - floor, Direction::Falling).terminal(),
        Event::new(move |_t, y: &[f64; 3]| y[0] - ceiling, Direction::Rising).terminal(),
    ];
    let tr = integrate(rhs, [phi0, dphi0, d2phi0], (0.0, -1e300), config, |y| y[0] > 0.0, &events)?;
    let y = tr.last();
    let zeta = tr.t_end();
    let reached_zero = matches!(tr.termination, Termination::Event { index: 0 } | Termination::Guard | Termination::StepUnderflow);
    let reached_parabola = tr.termination == (Termination::Event { index: 1 });
    if offset < 0.0 && reached_zero {
        // Near the zero φ ≈ c (ζ − ζ*)^{3/4}, so ζ − ζ* ≈ (4/3) φ/φ'.
        let zeta_star = if y[1] > 0.0 { zeta - 4.0 / 3.0 * y[0] / y[1] } else { zeta };
        return Ok(BackwardBehavior::FiniteTimeZero { zeta_star });
    }
    if offset > 0.0 && reached_parabola {
        return Ok(BackwardBehavior::Parabolic { gamma_tilde: 0.5 * y[2] });
    }
    Err(Error::Numerical(format!(
        "backward integration ended with {:?} although the state lies {} the separatrix",
        tr.termination,
        if offset < 0.0 { "below" } else { "above" }
    )))
}
