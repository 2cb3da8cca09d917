use crate::error::{invalid, Error, Result};
use crate::error::OdeError;
use crate::ode::{integrate_plain, IntegratorConfig, Trajectory};

/// Two-term expansion of the separatrix as `u → −∞`.
pub fn separatrix_seed(u: f64) -> f64 {
    -0.5 / u - 1.0 / (12.0 * u.powi(4))
}

/// Orbit slope `dv/du` augmented with the integrands of `log G` and `log H`.
fn field(u: f64, y: &[f64; 3]) -> [f64; 3] {
    let d = y[0] + u * u / 3.0;
    [
        (1.0 + 5.0 / 3.0 * u * y[0]) / d,
        u / d,
        (-1.0 + 5.0 * u * u * u / 9.0) / (d * d),
    ]
}

/// The separatrix `v̄(u)` with the quadratures `G`, `H` along it.
#[derive(Debug, Clone)]
pub struct SeparatrixTable {
    /// `(u, v̄(u))` at the accepted integration steps, increasing in `u`.
    pub samples: Vec<(f64, f64)>,
    pub u_min: f64,
    pub u_max: f64,
    /// `G(u) ~ K₊ u^{6/5}` as `u → +∞`.
    pub k_plus: f64,
    /// `G(u) ~ K₋ |u|³` as `u → −∞`.
    pub k_minus: f64,
    /// `H(u) ~ K̄₊ u^{4/5}` as `u → +∞`.
    pub kbar_plus: f64,
    /// `H(u) ~ K̄₋ |u|⁵` as `u → −∞`.
    pub kbar_minus: f64,
    /// Empirical exponents `p` of the corrections `1 + O(|u|^{-p})` seen by
    /// the constant fits, in the order `K₊, K₋, K̄₊, K̄₋` (NaN when the
    /// differences were at noise level).
    pub correction_exponents: [f64; 4],
    negative: Trajectory<3>,
    positive: Trajectory<3>,
}

impl SeparatrixTable {
    fn state(&self, u: f64) -> Result<[f64; 3]> {
        if !(u >= self.u_min && u <= self.u_max) {
            return Err(Error::OutOfRange { value: u, min: self.u_min, max: self.u_max });
        }
        let y = if u <= 0.0 {
            let mut y = self.negative.eval(u).expect("inside negative branch");
            let end = self.negative.last();
            y[1] -= end[1];
            y[2] -= end[2];
            y
        } else {
            self.positive.eval(u).expect("inside positive branch")
        };
        Ok(y)
    }

    /// `v̄(u)` by dense-output interpolation.
    pub fn v_bar(&self, u: f64) -> Result<f64> {
        Ok(self.state(u)?[0])
    }

    /// `(G(u), H(u))`.
    pub fn g_h(&self, u: f64) -> Result<(f64, f64)> {
        let y = self.state(u)?;
        Ok((y[1].exp(), y[2].exp()))
    }

    /// `(log G(u), log H(u))`, safe for large `|u|`.
    pub fn log_g_h(&self, u: f64) -> Result<(f64, f64)> {
        let y = self.state(u)?;
        Ok((y[1], y[2]))
    }

    /// Least-squares slopes of `log G` and `log H` against `log |u|` on
    /// `[lo, hi]` (both of the same sign).
    pub fn exponent_fit(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        if !(lo * hi > 0.0) {
            return Err(invalid("fit interval must not contain zero"));
        }
        let n = 64;
        let (a, b) = (lo.abs().ln(), hi.abs().ln());
        let mut xs = Vec::with_capacity(n);
        let mut gs = Vec::with_capacity(n);
        let mut hs = Vec::with_capacity(n);
        for i in 0..n {
            let x = a + (b - a) * i as f64 / (n - 1) as f64;
            // Pin the endpoints so round-off in exp(ln u) cannot leave the table.
            let u = match i {
                0 => lo,
                _ if i == n - 1 => hi,
                _ => x.exp() * lo.signum(),
            };
            let (lg, lh) = self.log_g_h(u)?;
            xs.push(x);
            gs.push(lg);
            hs.push(lh);
        }
        Ok((slope(&xs, &gs), slope(&xs, &hs)))
    }
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Aitken extrapolation of `k(u)` from the values at `U/4, U/2, U`, returning
/// the limit and the empirical correction exponent.
fn extrapolate(k1: f64, k2: f64, k4: f64) -> (f64, f64) {
    let d1 = k2 - k1;
    let d2 = k4 - k2;
    let noise = 1e-13 * k4.abs();
    if d1.abs() <= noise || d2.abs() <= noise || d1.signum() != d2.signum() || d2.abs() >= d1.abs() {
        return (k4, f64::NAN);
    }
    let r = d2 / d1;
    (k4 + d2 * r / (1.0 - r), -r.log2())
}

/// Integrate the separatrix from its expansion at `u_min` up to `u_max`.
pub fn compute_separatrix(u_min: f64, u_max: f64, config: &IntegratorConfig) -> Result<SeparatrixTable> {
    if !(u_min <= -20.0) || !(u_max >= 20.0) || !u_min.is_finite() || !u_max.is_finite() {
        return Err(invalid(format!("need u_min <= -20 and u_max >= 20, got [{u_min}, {u_max}]")));
    }
    let negative = integrate_plain(field, [separatrix_seed(u_min), 0.0, 0.0], (u_min, 0.0), config)?;
    check(&negative)?;
    let v0 = negative.last()[0];
    let positive = integrate_plain(field, [v0, 0.0, 0.0], (0.0, u_max), config)?;
    check(&positive)?;

    let mut samples: Vec<(f64, f64)> = negative.t.iter().zip(&negative.y).map(|(u, y)| (*u, y[0])).collect();
    samples.extend(positive.t.iter().zip(&positive.y).skip(1).map(|(u, y)| (*u, y[0])));

    let mut table = SeparatrixTable {
        samples,
        u_min,
        u_max,
        k_plus: f64::NAN,
        k_minus: f64::NAN,
        kbar_plus: f64::NAN,
        kbar_minus: f64::NAN,
        correction_exponents: [f64::NAN; 4],
        negative,
        positive,
    };

    let local = |t: &SeparatrixTable, u: f64, pg: f64, ph: f64| -> Result<(f64, f64)> {
        let (lg, lh) = t.log_g_h(u)?;
        let x = u.abs().ln();
        Ok(((lg - pg * x).exp(), (lh - ph * x).exp()))
    };
    let up = u_max;
    let (g1, h1) = local(&table, up / 4.0, 1.2, 0.8)?;
    let (g2, h2) = local(&table, up / 2.0, 1.2, 0.8)?;
    let (g4, h4) = local(&table, up, 1.2, 0.8)?;
    let um = u_min;
    let (m1, n1) = local(&table, um / 4.0, 3.0, 5.0)?;
    let (m2, n2) = local(&table, um / 2.0, 3.0, 5.0)?;
    let (m4, n4) = local(&table, um, 3.0, 5.0)?;
    let (kp, ep) = extrapolate(g1, g2, g4);
    let (km, em) = extrapolate(m1, m2, m4);
    let (kbp, ebp) = extrapolate(h1, h2, h4);
    let (kbm, ebm) = extrapolate(n1, n2, n4);
    table.k_plus = kp;
    table.k_minus = km;
    table.kbar_plus = kbp;
    table.kbar_minus = kbm;
    table.correction_exponents = [ep, em, ebp, ebm];
    Ok(table)
}

fn check(tr: &Trajectory<3>) -> Result<()> {
    tr.ensure_complete()?;
    for (u, y) in tr.t.iter().zip(&tr.y) {
        if !(y[0] + u * u / 3.0 > 0.0) {
            return Err(Error::LeftRegion { u: *u });
        }
    }
    if tr.termination != crate::ode::Termination::SpanEnd {
        return Err(Error::Ode(OdeError::StepUnderflow { t: tr.t_end() }));
    }
    Ok(())
}

/// `(G(u), H(u))` from a table.
pub fn g_h(u: f64, table: &SeparatrixTable) -> Result<(f64, f64)> {
    table.g_h(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> SeparatrixTable {
        compute_separatrix(-100.0, 100.0, &IntegratorConfig::new(1e-12, 1e-14)).unwrap()
    }

    #[test]
    fn normalisation_at_origin() {
        let t = table();
        let (g, h) = t.g_h(0.0).unwrap();
        assert_eq!((g, h), (1.0, 1.0));
        assert!(t.g_h(150.0).is_err());
    }

    #[test]
    fn stays_in_region_four() {
        let t = table();
        assert!(t.samples.iter().all(|(u, v)| v + u * u / 3.0 > 0.0));
        assert!(t.samples.windows(2).all(|w| w[1].0 > w[0].0));
    }

    #[test]
    fn seed_expansion_is_consistent() {
        // The residual of the expansion in the orbit equation is O(u^{-7}).
        for u in [-50.0f64, -100.0, -200.0] {
            let h = 1e-3;
            let dv = (separatrix_seed(u + h) - separatrix_seed(u - h)) / (2.0 * h);
            let rhs = field(u, &[separatrix_seed(u), 0.0, 0.0])[0];
            assert!((dv - rhs).abs() < 10.0 / u.abs().powi(7), "u = {u}: {}", dv - rhs);
        }
    }

    #[test]
    fn refinement_exponent_near_four_fifths() {
        // v₁ = v̄ − u²/2 obeys dv₁/du ≈ (4/5) v₁/u for large u.
        let t = table();
        let u = 50.0;
        let h = 1e-3;
        let v1 = |x: f64| t.v_bar(x).unwrap() - 0.5 * x * x;
        let d = (v1(u + h) - v1(u - h)) / (2.0 * h);
        let pred = 0.8 * v1(u) / u;
        assert!((d / pred - 1.0).abs() < 0.05, "{d} vs {pred}");
    }

    #[test]
    fn aitken_recovers_power_law_limit() {
        let k = |u: f64| 2.0 + 3.0 * u.powf(-1.2);
        let (lim, p) = extrapolate(k(25.0), k(50.0), k(100.0));
        assert!((lim - 2.0).abs() < 1e-12);
        assert!((p - 1.2).abs() < 1e-9);
    }
}
