use super::{field, State3};
use crate::error::{Error, Result};
use crate::ode::{refine_root, CompensatedSum, IntegratorConfig, StepOutcome, Stepper, Termination};

/// Maxima below this amplitude belong to the small linear oscillations around
/// the critical point and are numbered `n ≤ 0`.
pub const ONSET_AMPLITUDE: f64 = 2.0;

const PHI_CEILING: f64 = 1e250;
const PHI_FLOOR: f64 = 1e-100;

/// One maximum of Φ and the minimum that follows it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationRecord {
    /// Cycle index; `1` is the first maximum with `L ≥ ONSET_AMPLITUDE`.
    pub n: i64,
    pub tau_plus: f64,
    pub l: f64,
    pub a_n: f64,
    pub tau_minus: f64,
    pub m: f64,
}

/// Why tracking stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrackStop {
    CycleLimit,
    /// Φ left the representable window `[1e-100, 1e250]`.
    RangeExhausted { phi: f64 },
    Integrator(Termination),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillationRun {
    pub records: Vec<OscillationRecord>,
    /// A maximum whose following minimum was not reached: `(τ⁺, L, a)`.
    pub pending_maximum: Option<(f64, f64, f64)>,
    pub stop: TrackStop,
    pub steps: usize,
}

impl OscillationRun {
    /// Records with `n ≥ 1`.
    pub fn cycles(&self) -> impl Iterator<Item = &OscillationRecord> {
        self.records.iter().filter(|r| r.n >= 1)
    }

    pub fn cycle(&self, n: i64) -> Option<&OscillationRecord> {
        self.records.iter().find(|r| r.n == n)
    }
}

/// Follow the oscillations of a forward trajectory.
///
/// The system is autonomous, so the time origin is moved to the current point
/// after every accepted step; the absolute time is kept in a compensated sum.
/// This keeps inner layers resolvable even when they are many orders of
/// magnitude thinner than the elapsed time. Use a configuration with purely
/// relative error control ([`IntegratorConfig::relative`]) since Φ spans
/// hundreds of decades.
pub fn track_oscillations(seed: &State3, n_max: usize, config: &IntegratorConfig) -> Result<OscillationRun> {
    track_oscillations_with(seed, n_max, config, |_, _| {})
}

/// As [`track_oscillations`], calling `observer(τ, state)` after every accepted step.
pub fn track_oscillations_with<O>(
    seed: &State3,
    n_max: usize,
    config: &IntegratorConfig,
    mut observer: O,
) -> Result<OscillationRun>
where
    O: FnMut(f64, &[f64; 3]),
{
    if !(seed.phi > 0.0) {
        return Err(crate::error::invalid("seed must have phi > 0"));
    }
    if n_max == 0 {
        return Err(crate::error::invalid("n_max must be at least 1"));
    }
    let rhs = |_t: f64, y: &[f64; 3]| field(y);
    let guard = |y: &[f64; 3]| y[0] > 0.0;
    let mut stepper = Stepper::new(rhs, 0.0, seed.vector(), f64::MAX, *config)?;
    let mut clock = CompensatedSum::new(seed.tau);

    // (τ, L, a) of the latest unmatched maximum.
    let mut pending: Option<(f64, f64, f64)> = None;
    let mut raw: Vec<OscillationRecord> = Vec::new();
    let mut onset: Option<usize> = None;
    let mut maxima_seen = 0usize;
    let mut steps = 0usize;

    let stop = loop {
        let step = match stepper.step(&guard) {
            StepOutcome::Accepted(s) => s,
            StepOutcome::Done(reason) => break TrackStop::Integrator(reason),
        };
        steps += 1;
        let (w0, w1) = (step.y0[1], step.y1[1]);
        let crossing = (w0 > 0.0 && w1 <= 0.0) || (w0 < 0.0 && w1 >= 0.0);
        if crossing {
            let g = |t: f64| step.eval(t)[1];
            let t_loc = refine_root(&g, step.t0, step.t1, w0, w1, config.event_tol);
            let y = step.eval(t_loc);
            let tau = clock.value() + t_loc;
            if w0 > 0.0 {
                maxima_seen += 1;
                let l = y[0];
                pending = Some((tau, l, -y[2] / l.cbrt()));
            } else if let Some((tp, l, a)) = pending.take() {
                if onset.is_none() && l >= ONSET_AMPLITUDE {
                    onset = Some(raw.len());
                }
                raw.push(OscillationRecord { n: 0, tau_plus: tp, l, a_n: a, tau_minus: tau, m: y[0] });
                if let Some(first) = onset {
                    if raw.len() - first >= n_max {
                        break TrackStop::CycleLimit;
                    }
                }
            }
        }
        clock.add(step.t1 - step.t0);
        stepper.rebase_time(0.0);
        let y = step.y1;
        observer(clock.value(), &y);
        if y[0] > PHI_CEILING || y[0] < PHI_FLOOR {
            break TrackStop::RangeExhausted { phi: y[0] };
        }
    };

    // A maximum at or above the onset threshold still defines the numbering
    // even if its minimum was never reached.
    if onset.is_none() {
        if let Some((_, l, _)) = pending {
            if l >= ONSET_AMPLITUDE {
                onset = Some(raw.len());
            }
        }
    }
    let first = onset.unwrap_or(raw.len());
    for (i, r) in raw.iter_mut().enumerate() {
        r.n = i as i64 - first as i64 + 1;
    }

    if maxima_seen == 0 && matches!(stop, TrackStop::Integrator(Termination::SpanEnd | Termination::StepBudget)) {
        return Err(Error::NoOscillation);
    }
    Ok(OscillationRun { records: raw, pending_maximum: pending, stop, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drainage::seed_unstable;

    #[test]
    fn fixed_point_has_no_oscillation() {
        let cfg = IntegratorConfig::relative(1e-10);
        let err = track_oscillations(&State3::new(0.0, 1.0, 0.0, 0.0), 2, &cfg).unwrap_err();
        assert_eq!(err, Error::NoOscillation);
    }

    #[test]
    fn clock_compensates() {
        let mut c = CompensatedSum::new(1e20);
        for _ in 0..1000 {
            c.add(1.0);
        }
        assert_eq!(c.value(), 1e20 + 1000.0);
    }

    #[test]
    fn first_cycle_from_unstable_seed() {
        let cfg = IntegratorConfig::relative(1e-11);
        let run = track_oscillations(&seed_unstable(1e-6, 2.0).unwrap(), 1, &cfg).unwrap();
        assert_eq!(run.stop, TrackStop::CycleLimit);
        let first = run.cycle(1).expect("first cycle");
        assert!(first.l >= ONSET_AMPLITUDE);
        assert!(first.m < 1.0 && first.m > 0.0);
        assert!(run.records.iter().filter(|r| r.n <= 0).all(|r| r.l < ONSET_AMPLITUDE));
        for w in run.records.windows(2) {
            assert!(w[0].tau_minus < w[1].tau_plus);
        }
    }
}
