//! The inner equation `φ''' = φ⁻³` and its planar reduction.
//!
//! With `u = φ^{1/3} φ'`, `v = φ^{5/3} φ''` and `dz = φ^{-4/3} dζ` the
//! equation becomes the autonomous planar system
//! `u̇ = v + u²/3`, `v̇ = 1 + (5/3) u v`, `φ̇ = u φ`. The pair `(u, v)` is
//! invariant under the scaling `φ → lφ, ζ → l^{4/3}ζ`, which is why all
//! slopes share one orbit, the separatrix, and why `Γ ∝ K⁵`.

mod charts;
mod classify;
mod matching;
mod separatrix;

pub use charts::{
    chart_atlas, eigenvalues_2x2, hyp_field, hyp_jacobian, par_field, par_jacobian, planar_field, planar_jacobian,
    to_hyp, from_hyp, to_par, from_par, CriticalPoint, CriticalPointAtlas, SpiralBox,
};
pub use classify::{classify_backward, BackwardBehavior, SEPARATRIX_BAND};
pub use matching::{solve_matching, solve_matching_with, InnerSolution};
pub use separatrix::{compute_separatrix, g_h, separatrix_seed, SeparatrixTable};

use crate::error::{invalid, Result};
use crate::ode::IntegratorConfig;
use std::sync::OnceLock;

/// A point of the planar reduction together with the original variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarState {
    pub u: f64,
    pub v: f64,
    pub phi: f64,
    pub zeta: f64,
    pub z: f64,
}

/// `(du/dz, dv/dz, dφ/dz)`.
pub fn rhs_planar(u: f64, v: f64, phi: f64) -> Result<[f64; 3]> {
    if !(phi > 0.0) {
        return Err(invalid(format!("phi must be positive, got {phi}")));
    }
    Ok([v + u * u / 3.0, 1.0 + 5.0 / 3.0 * u * v, u * phi])
}

/// `(φ, φ', φ'') ↦ (u, v)`.
pub fn to_planar(phi: f64, dphi: f64, d2phi: f64) -> Result<(f64, f64)> {
    if !(phi > 0.0) {
        return Err(invalid(format!("phi must be positive, got {phi}")));
    }
    let c = phi.cbrt();
    Ok((c * dphi, c.powi(5) * d2phi))
}

/// `(u, v, φ) ↦ (φ', φ'')`.
pub fn from_planar(u: f64, v: f64, phi: f64) -> Result<(f64, f64)> {
    if !(phi > 0.0) {
        return Err(invalid(format!("phi must be positive, got {phi}")));
    }
    let c = phi.cbrt();
    Ok((u / c, v / c.powi(5)))
}

/// `φ''' = φ⁻³` as a first-order system in `ζ`.
#[inline]
pub(crate) fn inner_field(y: &[f64; 3]) -> [f64; 3] {
    let r = 1.0 / y[0];
    [y[1], y[2], r * r * r]
}

/// Constants that are expensive to compute and shared across modules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceConstants {
    /// `Γ` of the matched solution with unit slope.
    pub gamma_unit: f64,
    /// Minimum of the matched solution with unit slope.
    pub min_phi_unit: f64,
    /// `K₋/K₊` from the separatrix asymptotics of `G`.
    pub k_ratio: f64,
}

impl ReferenceConstants {
    /// `Γ(K) = Γ(1) K⁵`.
    pub fn gamma(&self, k: f64) -> f64 {
        self.gamma_unit * k.powi(5)
    }

    /// `min φ(K) = min φ(1) K⁻³`.
    pub fn min_phi(&self, k: f64) -> f64 {
        self.min_phi_unit / k.powi(3)
    }
}

/// Lazily computed reference constants (one unit-slope solve and one wide
/// separatrix table).
pub fn reference_constants() -> &'static ReferenceConstants {
    static CELL: OnceLock<ReferenceConstants> = OnceLock::new();
    CELL.get_or_init(|| {
        let sol = solve_matching(1.0).expect("unit-slope inner solution");
        let cfg = IntegratorConfig::new(1e-12, 1e-14);
        let table = compute_separatrix(-1e4, 1e4, &cfg).expect("reference separatrix");
        ReferenceConstants {
            gamma_unit: sol.gamma,
            min_phi_unit: sol.min_phi,
            k_ratio: table.k_minus / table.k_plus,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_examples() {
        let ue = (9.0f64 / 5.0).cbrt();
        let ve = -ue * ue / 3.0;
        let f = rhs_planar(ue, ve, 3.0).unwrap();
        assert!(f[0].abs() < 1e-15 && f[1].abs() < 1e-15);
        assert_eq!(rhs_planar(0.0, 0.0, 1.0).unwrap(), [0.0, 1.0, 0.0]);
        assert_eq!(rhs_planar(1.0, 0.0, 2.0).unwrap(), [1.0 / 3.0, 1.0, 2.0]);
        assert!(rhs_planar(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn planar_round_trip() {
        for &(p, d1, d2) in &[(1.0, 0.3, -0.7), (1e-3, -40.0, 2e5), (7e4, 1e-2, 3e-9)] {
            let (u, v) = to_planar(p, d1, d2).unwrap();
            let (e1, e2) = from_planar(u, v, p).unwrap();
            assert!((e1 - d1).abs() <= 1e-14 * d1.abs());
            assert!((e2 - d2).abs() <= 1e-14 * d2.abs());
        }
        assert_eq!(to_planar(1.0, 0.25, -2.0).unwrap(), (0.25, -2.0));
        assert!(to_planar(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn linear_incoming_profile_maps_to_separatrix_end() {
        // φ = −Kζ (ζ < 0): u = −K^{4/3}|ζ|^{1/3}, v = 0.
        let k: f64 = 1.7;
        for zeta in [-1e2, -1e4, -1e6] {
            let phi = -k * zeta;
            let (u, v) = to_planar(phi, -k, 0.0).unwrap();
            assert!((u + k.powf(4.0 / 3.0) * (-zeta).cbrt()).abs() < 1e-10 * u.abs());
            assert_eq!(v, 0.0);
        }
    }
}
