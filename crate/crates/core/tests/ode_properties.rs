use filmdyn::ode::{integrate_plain, locate_event};
use filmdyn::{integrate, Direction, Event, IntegratorConfig};
use proptest::prelude::*;

fn growth_error(tol: f64) -> f64 {
    let cfg = IntegratorConfig::new(tol, tol);
    let tr = integrate_plain(|_t, y: &[f64; 1]| [y[0]], [1.0], (0.0, 1.0), &cfg).unwrap();
    (tr.last()[0] - std::f64::consts::E).abs()
}

#[test]
fn error_scales_with_the_scheme_order() {
    // With tolerance-proportional step control the global error behaves like
    // tol^{p/(p+1)}; the step count therefore grows like tol^{-1/(p+1)}.
    let tols = [1e-6, 1e-7, 1e-8, 1e-9, 1e-10];
    let steps: Vec<f64> = tols
        .iter()
        .map(|&t| {
            let cfg = IntegratorConfig::new(t, t);
            integrate_plain(|_t, y: &[f64; 1]| [y[0]], [1.0], (0.0, 1.0), &cfg).unwrap().steps.len() as f64
        })
        .collect();
    let errs: Vec<f64> = tols.iter().map(|&t| growth_error(t)).collect();
    // Order from error against step size h ~ 1/steps.
    let lx: Vec<f64> = steps.iter().map(|s| (1.0 / s).ln()).collect();
    let ly: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let order = sxy / sxx;
    assert!((order - 5.0).abs() <= 0.5, "measured order {order}, steps {steps:?}, errors {errs:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn forward_then_backward_returns(x0 in -2.0f64..2.0, v0 in -2.0f64..2.0, t_end in 0.5f64..8.0) {
        // Damped-free Duffing oscillator: smooth and non-stiff.
        let rhs = |_t: f64, y: &[f64; 2]| [y[1], -y[0] - 0.1 * y[0] * y[0] * y[0]];
        let cfg = IntegratorConfig::new(1e-11, 1e-12);
        let fwd = integrate_plain(rhs, [x0, v0], (0.0, t_end), &cfg).unwrap();
        let back = integrate_plain(rhs, *fwd.last(), (t_end, 0.0), &cfg).unwrap();
        let y = back.last();
        let tol = 100.0 * (cfg.atol + cfg.rtol * x0.abs().max(v0.abs()));
        prop_assert!((y[0] - x0).abs() <= tol && (y[1] - v0).abs() <= tol, "{y:?} vs {:?}", [x0, v0]);
    }

    #[test]
    fn dense_output_hits_stored_states(x0 in 0.1f64..3.0, span in 1.0f64..20.0) {
        let rhs = |t: f64, y: &[f64; 2]| [y[1], -y[0] * (1.0 + 0.3 * t.sin())];
        let tr = integrate_plain(rhs, [x0, 0.0], (0.0, span), &IntegratorConfig::default()).unwrap();
        for (i, st) in tr.steps.iter().enumerate() {
            prop_assert_eq!(st.eval(st.t0), tr.y[i]);
            prop_assert_eq!(st.eval(st.t1), tr.y[i + 1]);
        }
    }

    #[test]
    fn time_is_strictly_monotone(backward in any::<bool>(), span in 0.5f64..10.0) {
        let end = if backward { -span } else { span };
        let tr = integrate_plain(|_t, y: &[f64; 1]| [-y[0]], [1.0], (0.0, end), &IntegratorConfig::default()).unwrap();
        let s = end.signum();
        prop_assert!(tr.t.windows(2).all(|w| (w[1] - w[0]) * s > 0.0));
    }

    #[test]
    fn events_are_bracketed(omega in 0.5f64..3.0, phase in 0.0f64..6.0) {
        let rhs = move |_t: f64, y: &[f64; 2]| [y[1], -omega * omega * y[0]];
        let y0 = [phase.cos(), -omega * phase.sin()];
        let g = |_t: f64, y: &[f64; 2]| y[0];
        let events = [Event::new(g, Direction::Either)];
        let cfg = IntegratorConfig::default();
        let tr = integrate(rhs, y0, (0.0, 10.0), &cfg, |_| true, &events).unwrap();
        prop_assert!(!tr.events.is_empty());
        for hit in &tr.events {
            let st = tr.steps.iter().find(|s| s.t0 <= hit.t && hit.t <= s.t1).expect("event inside a step");
            prop_assert!(st.y0[0] * st.y1[0] <= 0.0);
            // Exact roots of cos(ωt + phase).
            let k = ((omega * hit.t + phase - std::f64::consts::FRAC_PI_2) / std::f64::consts::PI).round();
            let root = ((k + 0.5) * std::f64::consts::PI - phase) / omega;
            prop_assert!((hit.t - root).abs() <= 1e-8, "{} vs {}", hit.t, root);
        }
        let after = locate_event(&tr, |_t, y: &[f64; 2]| y[0], Direction::Either, cfg.event_tol);
        prop_assert_eq!(after.len(), tr.events.len());
    }
}
