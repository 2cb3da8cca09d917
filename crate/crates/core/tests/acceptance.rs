//! Acceptance suite: one line per criterion, non-zero exit status if any fails.

use filmdyn::blayer::leading_order_residual;
use filmdyn::drainage::*;
use filmdyn::inner::*;
use filmdyn::ode::integrate_autonomous;
use filmdyn::substrate::*;
use filmdyn::{integrate, Direction, Event, IntegratorConfig, Termination};
use nalgebra::{Complex, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    let pass = parts.iter().all(|p| p.pass);
    let detail = parts
        .iter()
        .map(|p| if p.pass { p.detail.clone() } else { format!("[FAILED] {}", p.detail) })
        .collect::<Vec<_>>()
        .join("; ");
    Outcome { pass, detail }
}

fn close_c(a: Complex<f64>, b: Complex<f64>, tol: f64) -> bool {
    (a - b).norm() <= tol
}

fn sorted(mut v: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
    v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    v
}

fn eigen_structure() -> Outcome {
    let tol = 1e-12;
    let e = critical_point_data();
    let c = 3f64.cbrt();
    let j = Matrix3::from_fn(|r, col| e.jacobian[r][col]);
    let numeric = sorted(j.complex_eigenvalues().iter().copied().collect());
    let closed = sorted(vec![
        Complex::new(e.lambda1, 0.0),
        e.lambda23,
        e.lambda23.conj(),
    ]);
    let expected = sorted(vec![
        Complex::new(-c, 0.0),
        Complex::new(0.5 * c, 0.5 * c * 3f64.sqrt()),
        Complex::new(0.5 * c, -0.5 * c * 3f64.sqrt()),
    ]);
    let eig_ok = numeric.iter().zip(&closed).all(|(a, b)| close_c(*a, *b, tol))
        && closed.iter().zip(&expected).all(|(a, b)| close_c(*a, *b, tol));
    let mv = |v: [f64; 3]| -> [f64; 3] {
        std::array::from_fn(|r| (0..3).map(|k| e.jacobian[r][k] * v[k]).sum())
    };
    let jv1 = mv(e.v1);
    let v1_ok = (0..3).all(|i| (jv1[i] - e.lambda1 * e.v1[i]).abs() <= tol);
    // J v2 and J v3 must stay in the plane spanned by v2, v3 (normal = v2 × v3).
    let n = [
        e.v2[1] * e.v3[2] - e.v2[2] * e.v3[1],
        e.v2[2] * e.v3[0] - e.v2[0] * e.v3[2],
        e.v2[0] * e.v3[1] - e.v2[1] * e.v3[0],
    ];
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let plane_ok = dot(mv(e.v2), n).abs() <= tol && dot(mv(e.v3), n).abs() <= tol;

    let atlas = chart_atlas();
    let mut chart_ok = true;
    let mut worst = 0.0f64;
    let mut probe = |p: &CriticalPoint, f: fn([f64; 2]) -> [f64; 2], jac: fn([f64; 2]) -> [[f64; 2]; 2]| {
        let v = f(p.point);
        worst = worst.max(v[0].abs()).max(v[1].abs());
        let num = sorted(eigenvalues_2x2(jac(p.point)).to_vec());
        let cf = sorted(p.eigenvalues.to_vec());
        chart_ok &= v[0].abs() <= tol && v[1].abs() <= tol;
        chart_ok &= num.iter().zip(&cf).all(|(a, b)| close_c(*a, *b, tol));
    };
    probe(&atlas.p_e, planar_field, planar_jacobian);
    for p in &atlas.hyp {
        probe(p, hyp_field, hyp_jacobian);
    }
    for p in &atlas.par {
        probe(p, par_field, par_jacobian);
    }
    let ue = 1.8f64.cbrt();
    let pe_ok = (atlas.p_e.point[0] - ue).abs() <= tol
        && (atlas.p_e.point[1] + ue * ue / 3.0).abs() <= tol
        && close_c(atlas.p_e.eigenvalues[0], Complex::new(7.0 * ue / 6.0, 11f64.sqrt() * ue / 6.0), tol)
        && close_c(atlas.hyp[0].eigenvalues[1], Complex::new(-1.0, 0.0), tol)
        && close_c(atlas.hyp[0].eigenvalues[0], Complex::new(1.0 / 6.0, 0.0), tol)
        && close_c(atlas.par[0].eigenvalues[0], Complex::new(-5.0 / 6.0, 0.0), tol)
        && close_c(atlas.par[0].eigenvalues[1], Complex::new(-1.0, 0.0), tol);
    all(vec![
        check(eig_ok, "eigenvalues of the drainage linearisation"),
        check(v1_ok, "stable eigenvector"),
        check(plane_ok, "unstable plane invariant"),
        check(chart_ok && pe_ok, format!("planar and chart critical data (max |field| {worst:.1e})")),
    ])
}

fn polynomial_constants() -> Outcome {
    let a = limit_curvature();
    let p = poly_outer(a).unwrap();
    let want = 1.5f64.cbrt();
    let eta0 = p.eta_0.unwrap_or(f64::NAN);
    all(vec![
        check((p.eta_a - want).abs() <= 1e-12, format!("eta_a = {:.15}", p.eta_a)),
        check((eta0 + 2.0 * want).abs() <= 1e-12, format!("double zero at {eta0:.15}")),
        check(p.eval(eta0).abs() <= 1e-12 && p.deriv(eta0).abs() <= 1e-12, "P and P' vanish there"),
        check(
            (p.slope_at_root() - 1.5f64.powf(5.0 / 3.0)).abs() <= 1e-12,
            format!("slope {:.15}", p.slope_at_root()),
        ),
    ])
}

fn tracked_run() -> OscillationRun {
    let seed = seed_unstable(1e-6, 0.0).unwrap();
    track_oscillations(&seed, 2, &IntegratorConfig::relative(1e-12)).unwrap()
}

fn oscillation_onset(run: &OscillationRun) -> Outcome {
    let r = &run.records;
    let cycles = run.cycles().count();
    let l_inc = r.windows(2).all(|w| w[1].l > w[0].l);
    let m_dec = r.windows(2).all(|w| w[1].m < w[0].m);
    let alternate = r.iter().all(|x| x.tau_plus < x.tau_minus && x.m < x.l)
        && r.windows(2).all(|w| w[0].tau_minus < w[1].tau_plus);
    all(vec![
        check(cycles >= 2, format!("{cycles} full cycles, {} records in total", r.len())),
        check(l_inc, "maxima strictly increasing"),
        check(m_dec, "minima strictly decreasing"),
        check(alternate, "maxima and minima alternate"),
    ])
}

fn curvature_convergence(run: &OscillationRun, gamma: f64) -> Outcome {
    let a = limit_curvature();
    let a2 = run.cycle(2).map(|c| c.a_n).unwrap_or(f64::NAN);
    let mut parts = vec![check((a2 - a).abs() <= 0.1 * a, format!("a_2 = {a2:.10}"))];
    for a_in in [1.0, 1.3] {
        let r = cycle_map(1e4, a_in, gamma).unwrap();
        let oracle = cycle_map_with(1e4, a_in, gamma, &IntegratorConfig::relative(1e-13)).unwrap();
        let gap = (r.a_out_measured - oracle.a_out_measured).abs();
        parts.push(check(
            (r.a_out_measured - a).abs() < (a_in - a).abs() && gap <= 1e-8,
            format!("a_in {a_in} -> a_out {:.10} (tighter run differs by {gap:.1e})", r.a_out_measured),
        ));
    }
    all(parts)
}

fn amplitude_recursion(gamma: f64) -> Outcome {
    let a = limit_curvature();
    let r4 = cycle_map(1e4, a, gamma).unwrap().amplitude_ratio();
    let r5 = cycle_map(1e5, a, gamma).unwrap().amplitude_ratio();
    all(vec![
        check((0.5..=2.0).contains(&r4), format!("ratio at 1e4 = 1{:+.3e}", r4 - 1.0)),
        check((0.5..=2.0).contains(&r5), format!("ratio at 1e5 = 1{:+.3e}", r5 - 1.0)),
        check((r5 - 1.0).abs() <= (r4 - 1.0).abs(), "ratio moves toward 1"),
    ])
}

fn minimum_law(run: &OscillationRun) -> Outcome {
    let rc = reference_constants();
    match run.cycles().find(|c| c.l >= 1e4) {
        Some(c) => {
            let k = poly_outer(c.a_n).unwrap().slope_at_root();
            let want = rc.min_phi(k);
            let got = c.m * c.l * c.l;
            check((got / want - 1.0).abs() <= 0.1, format!("cycle {}: M L^2 = {got:.8}, predicted {want:.8}", c.n))
        }
        None => check(false, "no tracked cycle with L >= 1e4"),
    }
}

fn separatrix_asymptotics() -> Outcome {
    let cfg = IntegratorConfig::new(1e-12, 1e-14);
    let t = compute_separatrix(-1e4, 1e4, &cfg).unwrap();
    let u = -50.0;
    let left = (u * t.v_bar(u).unwrap() + 0.5).abs();
    let c = |u: f64| (t.v_bar(u).unwrap() - 0.5 * u * u).abs() / u.powf(0.8);
    let (c25, c100) = (c(25.0), c(100.0));
    let (gp, hp) = t.exponent_fit(1e3, 1e4).unwrap();
    let (gm, hm) = t.exponent_fit(-1e4, -1e3).unwrap();
    all(vec![
        check(left <= 0.05, format!("|u v + 1/2| = {left:.2e} at u = -50")),
        check((c100 / c25 - 1.0).abs() <= 0.2, format!("refinement ratio {:.4}", c100 / c25)),
        check((gp - 1.2).abs() <= 0.05, format!("G exponent at +inf {gp:.4}")),
        check((gm - 3.0).abs() <= 0.05, format!("G exponent at -inf {gm:.4}")),
        check((hp - 0.8).abs() <= 0.05, format!("H exponent at +inf {hp:.4}")),
        check((hm - 5.0).abs() <= 0.05, format!("H exponent at -inf {hm:.4}")),
    ])
}

fn gamma_scaling() -> Outcome {
    let g: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|&k| solve_matching(k).unwrap().gamma / k.powi(5)).collect();
    let spread = g.iter().map(|x| (x / g[1] - 1.0).abs()).fold(0.0, f64::max);
    check(spread <= 1e-4, format!("Gamma/K^5 = {:.12}, relative spread {spread:.1e}", g[1]))
}

fn stable_dichotomy() -> Outcome {
    let cfg = IntegratorConfig::relative(1e-12);
    let rhs = |_t: f64, y: &[f64; 3]| field(y);
    let mut kinds = Vec::new();
    for delta in [1e-6, -1e-6] {
        let s = seed_stable(delta).unwrap();
        let big = [Event::new(|_t, y: &[f64; 3]| y[0] - 1e6, Direction::Either).terminal()];
        let tr = integrate(rhs, s.vector(), (0.0, -200.0), &cfg, |y| y[0] > 0.0, &big).unwrap();
        let kind = match tr.termination {
            Termination::Event { .. } => "growth",
            Termination::Guard | Termination::StepUnderflow if tr.last()[0] < 1e-3 => "vanishing",
            _ => "other",
        };
        kinds.push((delta, kind, tr.t_end()));
    }
    let labels: Vec<&str> = kinds.iter().map(|k| k.1).collect();
    let ok = labels.contains(&"growth") && labels.contains(&"vanishing");
    check(
        ok,
        kinds.iter().map(|(d, k, t)| format!("delta {d:+e}: {k} by tau = {t:.4}")).collect::<Vec<_>>().join(", "),
    )
}

fn forward_positivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let cfg = IntegratorConfig::relative(1e-10);
    let mut failures = 0;
    let mut min_phi = f64::INFINITY;
    for _ in 0..100 {
        let y0 = [rng.gen_range(0.1..5.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let run = integrate_autonomous(field, y0, 50.0, &cfg, |y| y[0] > 0.0, &[]);
        match run {
            Ok(r) if r.termination == Termination::SpanEnd => {
                min_phi = min_phi.min(r.y[0]);
            }
            _ => failures += 1,
        }
    }
    check(failures == 0, format!("{failures} of 100 seeds failed"))
}

fn substrate_suite() -> Outcome {
    let q0 = 0.5;
    let b = 1.0;
    let cfg = IntegratorConfig::new(1e-13, 1e-15);
    let (t1, t1s) = inclined_plane_angles(q0).unwrap();
    let plane = pendulum_solve(|_| q0, b, t1, 0.0, (0.0, 100.0), &cfg).unwrap();
    let drift = plane.y.iter().map(|y| (y[0] - t1).abs().max(y[1].abs())).fold(0.0, f64::max);

    let energy = PendulumEnergy { theta0: t1, b };
    let orbit = pendulum_solve(|_| q0, b, t1s + 0.3, 0.0, (0.0, 100.0), &cfg).unwrap();
    let e0 = energy.eval(orbit.y[0][0], orbit.y[0][1]);
    let e_dev = orbit.y.iter().map(|y| (energy.eval(y[0], y[1]) - e0).abs()).fold(0.0, f64::max);

    let omega = 1e-3;
    let curve = build_q_extcurves(q0, omega, &BumpProfile::new(), &ExtCurvesConfig::default());
    let mut parts = vec![
        check(drift <= 1e-10, format!("plane drift {drift:.1e}")),
        check(e_dev <= 1e-10, format!("energy drift {e_dev:.1e}")),
    ];
    match curve {
        Ok(c) => {
            let i0 = c.s.iter().position(|s| *s == 0.0);
            let q_at_0 = i0.map(|i| c.q[i]).unwrap_or(f64::NAN);
            let positive = c.s.iter().zip(&c.q).all(|(s, q)| *s == 0.0 || *q > 0.0);
            let lim = c.quadratic_limit(omega / 4.0).unwrap_or(f64::NAN);
            parts.push(check((q_at_0 - omega).abs() <= 1e-12, format!("Q(0) - omega = {:.1e}", q_at_0 - omega)));
            parts.push(check(positive, "Q > 0 away from 0"));
            parts.push(check(lim > 0.0 && lim.is_finite(), format!("quadratic limit {lim:.6e}")));
            parts.push(check(find_self_intersection(&c.x, &c.y).is_none(), "no self-intersection"));
        }
        Err(e) => parts.push(check(false, format!("construction failed: {e}"))),
    }
    all(parts)
}

fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn far_field_residual() -> Outcome {
    let xs: Vec<f64> = (0..41).map(|i| 10f64.powf(1.0 + i as f64 / 40.0)).collect();
    let slope = |a: f64| {
        let r: Vec<f64> = xs.iter().map(|x| leading_order_residual(-x, a)).collect();
        log_log_slope(&xs, &r)
    };
    let s1 = slope(1.0);
    let sm = slope(-0.7);
    let s0 = slope(0.0);
    all(vec![
        check((s1 + 2.0).abs() <= 0.1, format!("a = 1: slope {s1:.4}")),
        check((sm + 2.0).abs() <= 0.1, format!("a = -0.7: slope {sm:.4}")),
        check((s0 + 17.0 / 3.0).abs() <= 0.1, format!("a = 0: slope {s0:.4}")),
    ])
}

fn energy_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let s = State3::new(0.0, rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let rate = energy_rate(&s).unwrap();
        worst = worst.max((rate - s.psi * s.psi).abs());
    }
    check(worst <= 1e-14, format!("max |dE/dtau - Psi^2| = {worst:.1e}"))
}

fn main() {
    let started = Instant::now();
    let mut failed = 0;
    let mut report = |k: usize, name: &str, budget: Duration, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let out = f();
        let dt = t.elapsed();
        let status = if out.pass { "PASS" } else { "FAIL" };
        if !out.pass {
            failed += 1;
        }
        let over = if dt > budget { format!(" (over the {budget:?} budget)") } else { String::new() };
        println!("criterion {k:2} {name:<28} {status}  [{:.2?}{over}]  {}", dt, out.detail);
    };
    let s = Duration::from_secs;

    report(1, "eigen-structure", s(1), &mut eigen_structure);
    report(2, "polynomial constants", s(1), &mut polynomial_constants);
    let mut run = None;
    report(3, "oscillation onset", s(30), &mut || {
        let r = tracked_run();
        let out = oscillation_onset(&r);
        run = Some(r);
        out
    });
    let run = run.expect("tracked run");
    let gamma = solve_matching(limit_slope()).unwrap().gamma;
    report(4, "curvature convergence", s(120), &mut || curvature_convergence(&run, gamma));
    report(5, "amplitude recursion", s(120), &mut || amplitude_recursion(gamma));
    report(6, "minimum law", s(120), &mut || minimum_law(&run));
    report(7, "separatrix asymptotics", s(60), &mut separatrix_asymptotics);
    report(8, "gamma scaling", s(60), &mut gamma_scaling);
    report(9, "stable-manifold dichotomy", s(30), &mut stable_dichotomy);
    report(10, "forward positivity", s(120), &mut forward_positivity);
    report(11, "substrate suite", s(60), &mut substrate_suite);
    report(12, "boundary-layer far field", s(60), &mut far_field_residual);
    report(13, "energy identity", s(1), &mut energy_identity);

    println!("{} of 13 criteria passed in {:.2?}", 13 - failed, started.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
