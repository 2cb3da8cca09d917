use crate::output::{num, opt, Cell, Report, Table};
use crate::Common;
use anyhow::Result;
use clap::Args;
use filmdyn::blayer::{self, BoundaryLayerProblem};
use filmdyn::drainage::{self, TrackStop};
use filmdyn::inner;
use filmdyn::substrate::{self, BumpProfile, ExtCurvesConfig};
use filmdyn::{Error, IntegratorConfig, OdeError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

/// A parameter rejected before any computation.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// 2 for rejected input, 3 for everything that failed while computing.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::InvalidInput(_)) | Some(Error::Ode(OdeError::InvalidConfig(_))) => 2,
        _ => match e.downcast_ref::<OdeError>() {
            Some(OdeError::InvalidConfig(_)) => 2,
            _ => 3,
        },
    }
}

fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Usage(msg()).into())
    }
}

fn finite_positive(name: &str, x: f64) -> Result<()> {
    require(x > 0.0 && x.is_finite(), || format!("{name} must be positive and finite, got {x}"))
}

// ---------------------------------------------------------------- oscillations

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct OscillationsArgs {
    /// Distance of the seed from the critical point along the unstable plane.
    #[arg(long, allow_hyphen_values = true, default_value_t = 1e-6)]
    r: f64,
    /// Phase of the seed in the unstable plane; drawn from --seed when omitted.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Number of cycles to track after the onset.
    #[arg(long, default_value_t = 2)]
    n_max: usize,
    /// Keep every k-th accepted step in the trajectory table.
    #[arg(long, default_value_t = 10)]
    stride: usize,
}

pub fn oscillations(a: &OscillationsArgs, c: &Common) -> Result<Report> {
    let tol = c.tolerances((1e-12, 1e-300))?;
    require(a.r > 0.0 && a.r <= 1e-4, || format!("r must lie in (0, 1e-4], got {}", a.r))?;
    require(a.n_max >= 1, || "n-max must be at least 1".into())?;
    require(a.stride >= 1, || "stride must be at least 1".into())?;
    let alpha = match a.alpha {
        Some(x) => {
            require(x.is_finite(), || format!("alpha must be finite, got {x}"))?;
            x
        }
        None => ChaCha8Rng::seed_from_u64(c.seed).gen_range(0.0..std::f64::consts::TAU),
    };
    let seed = drainage::seed_unstable(a.r, alpha)?;
    let cfg = IntegratorConfig::new(tol.0, tol.1);
    let mut traj = Table::new("trajectory", &["tau", "phi", "w", "psi"]);
    traj.push(vec![seed.tau.into(), seed.phi.into(), seed.w.into(), seed.psi.into()]);
    let mut count = 0usize;
    let run = drainage::track_oscillations_with(&seed, a.n_max, &cfg, |t, y| {
        count += 1;
        if count % a.stride == 0 {
            traj.push(vec![t.into(), y[0].into(), y[1].into(), y[2].into()]);
        }
    })?;
    let mut table = Table::new("oscillations", &["n", "tau_plus", "L", "a_n", "tau_minus", "M"]);
    for r in &run.records {
        table.push(vec![r.n.into(), r.tau_plus.into(), r.l.into(), r.a_n.into(), r.tau_minus.into(), r.m.into()]);
    }

    let mut rep = Report::new("oscillations", tol);
    rep.input("r", num(a.r));
    rep.input("alpha", num(alpha));
    rep.input("n_max", a.n_max.into());
    rep.input("seed", c.seed.into());
    rep.result("cycles", run.cycles().count().into());
    rep.result("records", run.records.len().into());
    rep.result("steps", run.steps.into());
    let stop = match run.stop {
        TrackStop::CycleLimit => "cycle-limit".to_string(),
        TrackStop::RangeExhausted { .. } => "range-exhausted".to_string(),
        TrackStop::Integrator(t) => format!("integrator:{t:?}"),
    };
    rep.result("stop", stop.into());
    if let Some((tau, l, an)) = run.pending_maximum {
        let mut m = serde_json::Map::new();
        m.insert("tau_plus".into(), num(tau));
        m.insert("L".into(), num(l));
        m.insert("a_n".into(), num(an));
        rep.result("pending_maximum", Value::Object(m));
    }
    rep.result("limit_a", num(drainage::limit_curvature()));
    rep.tables = vec![table, traj];
    Ok(rep)
}

// ------------------------------------------------------------------- cycle map

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct CycleMapArgs {
    /// Amplitude of the starting maximum.
    #[arg(long, allow_hyphen_values = true, default_value_t = 1e4)]
    l: f64,
    /// Curvature coefficient at the maximum (defaults to the limit value).
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
}

pub fn cycle_map(a: &CycleMapArgs, c: &Common) -> Result<Report> {
    let tol = c.tolerances((1e-12, 1e-300))?;
    require(a.l > 10.0 && a.l <= 1e24, || format!("L must lie in (10, 1e24], got {}", a.l))?;
    let an = a.a.unwrap_or_else(drainage::limit_curvature);
    finite_positive("a", an)?;
    let gamma = inner::solve_matching(drainage::limit_slope())?.gamma;
    let r = drainage::cycle_map_with(a.l, an, gamma, &IntegratorConfig::new(tol.0, tol.1))?;
    let mut t = Table::new(
        "cycle_map",
        &["L_in", "a_in", "L_out_measured", "L_out_predicted", "a_out", "dtau_measured", "dtau_predicted", "M", "gamma_est", "k_n"],
    );
    t.push(vec![
        r.l_in.into(),
        r.a_in.into(),
        r.l_out_measured.into(),
        r.l_out_predicted.into(),
        r.a_out_measured.into(),
        r.dtau_measured.into(),
        r.dtau_predicted.into(),
        r.m_measured.into(),
        r.gamma_est.into(),
        r.k_n.into(),
    ]);
    let mut rep = Report::new("cycle-map", tol);
    rep.input("L", num(a.l));
    rep.input("a", num(an));
    rep.result("gamma", num(gamma));
    rep.result("L_out_measured", num(r.l_out_measured));
    rep.result("L_out_predicted", num(r.l_out_predicted));
    rep.result("amplitude_ratio", num(r.amplitude_ratio()));
    rep.result("a_out", num(r.a_out_measured));
    rep.result("M", num(r.m_measured));
    rep.result("gamma_est", num(r.gamma_est));
    rep.tables = vec![t];
    Ok(rep)
}

// ----------------------------------------------------------------------- inner

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct InnerArgs {
    /// Slope of the incoming linear branch.
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    k: f64,
}

pub fn inner(a: &InnerArgs, c: &Common) -> Result<Report> {
    let tol = c.tolerances((1e-13, 1e-16))?;
    finite_positive("k", a.k)?;
    let s = inner::solve_matching_with(a.k, &IntegratorConfig::new(tol.0, tol.1))?;
    let mut t = Table::new("inner", &["zeta", "phi", "dphi", "d2phi"]);
    for row in &s.samples {
        t.push(row.iter().map(|&x| Cell::from(x)).collect());
    }
    let mut rep = Report::new("inner", tol);
    rep.input("K", num(a.k));
    rep.result("Gamma", num(s.gamma));
    rep.result("min_phi", num(s.min_phi));
    rep.result("zeta_min", num(s.zeta_min));
    rep.result("Gamma_over_K5", num(s.gamma / a.k.powi(5)));
    rep.result("Gamma_windows", Value::Array(s.gamma_windows.iter().map(|&g| num(g)).collect()));
    rep.tables = vec![t];
    Ok(rep)
}

// ------------------------------------------------------------------ separatrix

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct SeparatrixArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = -100.0)]
    u_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 100.0)]
    u_max: f64,
    /// Number of equally spaced output points.
    #[arg(long, default_value_t = 401)]
    points: usize,
}

pub fn separatrix(a: &SeparatrixArgs, c: &Common) -> Result<Report> {
    let tol = c.tolerances((1e-12, 1e-14))?;
    require(a.u_min.is_finite() && a.u_min <= -20.0, || format!("u-min must be at most -20, got {}", a.u_min))?;
    require(a.u_max.is_finite() && a.u_max >= 20.0, || format!("u-max must be at least 20, got {}", a.u_max))?;
    require(a.points >= 2, || "points must be at least 2".into())?;
    let table = inner::compute_separatrix(a.u_min, a.u_max, &IntegratorConfig::new(tol.0, tol.1))?;
    let mut t = Table::new("separatrix", &["u", "v", "log_G", "log_H"]);
    for i in 0..a.points {
        let u = if i + 1 == a.points { a.u_max } else { a.u_min + (a.u_max - a.u_min) * i as f64 / (a.points - 1) as f64 };
        let (lg, lh) = table.log_g_h(u)?;
        t.push(vec![u.into(), table.v_bar(u)?.into(), lg.into(), lh.into()]);
    }
    let mut rep = Report::new("separatrix", tol);
    rep.input("u_min", num(a.u_min));
    rep.input("u_max", num(a.u_max));
    rep.input("points", a.points.into());
    rep.result("v_at_0", num(table.v_bar(0.0)?));
    rep.result("K_plus", num(table.k_plus));
    rep.result("K_minus", num(table.k_minus));
    rep.result("Kbar_plus", num(table.kbar_plus));
    rep.result("Kbar_minus", num(table.kbar_minus));
    rep.result("K_ratio", num(table.k_minus / table.k_plus));
    rep.result("samples", table.samples.len().into());
    rep.tables = vec![t];
    Ok(rep)
}

// ------------------------------------------------------------------- substrate

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct SubstrateArgs {
    /// Driving coefficient far from the accumulation point.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.5)]
    q0: f64,
    /// Minimum of the driving coefficient, attained at s = 0.
    #[arg(long, allow_hyphen_values = true, default_value_t = 1e-3)]
    omega: f64,
    /// Bond number.
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 100)]
    points_per_omega: usize,
    /// Keep every k-th grid point in the curve table.
    #[arg(long, default_value_t = 10)]
    stride: usize,
}

pub fn substrate(a: &SubstrateArgs, c: &Common) -> Result<Report> {
    let tol = c.tolerances((1e-12, 1e-15))?;
    require(a.q0 > 0.0 && a.q0 < 1.0, || format!("q0 must lie in (0, 1), got {}", a.q0))?;
    finite_positive("omega", a.omega)?;
    finite_positive("b", a.b)?;
    require(a.stride >= 1, || "stride must be at least 1".into())?;
    let cfg = ExtCurvesConfig {
        b: a.b,
        points_per_omega: a.points_per_omega,
        integrator: IntegratorConfig::new(tol.0, tol.1),
        ..ExtCurvesConfig::default()
    };
    let curve = substrate::build_q_extcurves(a.q0, a.omega, &BumpProfile::new(), &cfg)?;
    let i0 = curve.s.iter().position(|s| *s == 0.0).unwrap_or(0);
    let mut t = Table::new("curve", &["s", "theta", "x", "y", "k", "Q"]);
    for i in (0..curve.len()).filter(|i| i % a.stride == i0 % a.stride) {
        t.push(vec![
            curve.s[i].into(),
            curve.theta[i].into(),
            curve.x[i].into(),
            curve.y[i].into(),
            curve.k[i].into(),
            curve.q[i].into(),
        ]);
    }
    let q_min_elsewhere = curve.q.iter().enumerate().filter(|(i, _)| *i != i0).map(|(_, q)| *q).fold(f64::INFINITY, f64::min);
    let dev = curve.theta.iter().map(|t| (t - curve.theta1).abs()).fold(0.0, f64::max);
    let mut rep = Report::new("substrate", tol);
    rep.input("q0", num(a.q0));
    rep.input("omega", num(a.omega));
    rep.input("b", num(a.b));
    rep.input("points_per_omega", a.points_per_omega.into());
    rep.result("points", curve.len().into());
    rep.result("theta1", num(curve.theta1));
    rep.result("Q_at_0", num(curve.q[i0]));
    rep.result("Q_min_elsewhere", num(q_min_elsewhere));
    rep.result("quadratic_limit", opt(curve.quadratic_limit(a.omega / 4.0).ok()));
    rep.result("max_angle_deviation", num(dev));
    rep.result("self_intersection", false.into());
    rep.tables = vec![t];
    Ok(rep)
}

// ---------------------------------------------------------------------- blayer

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct BlayerArgs {
    /// Curvature parameter of the boundary-layer equation.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    a: f64,
    /// Coefficient on the first growing mode.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    p1: f64,
    /// Coefficient on the second growing mode.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    p2: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = -50.0)]
    xi0: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 50.0)]
    xi1: f64,
}

fn check_window(xi0: f64, xi1: f64) -> Result<()> {
    require(xi0.is_finite() && xi0 <= -10.0, || format!("xi0 must be at most -10, got {xi0}"))?;
    require(xi1.is_finite() && xi1 > 0.0, || format!("xi1 must be positive, got {xi1}"))
}

fn outcome_xi(o: &blayer::ShotOutcome) -> Option<f64> {
    match o {
        blayer::ShotOutcome::TouchDown { xi } | blayer::ShotOutcome::GrowingOscillation { xi } | blayer::ShotOutcome::Stalled { xi } => Some(*xi),
        _ => None,
    }
}

pub fn blayer(a: &BlayerArgs, c: &Common) -> Result<Report> {
    let tol = c.tolerances((1e-10, 1e-12))?;
    require(a.a.is_finite() && a.p1.is_finite() && a.p2.is_finite(), || "a, p1 and p2 must be finite".into())?;
    check_window(a.xi0, a.xi1)?;
    let problem = BoundaryLayerProblem::new(a.a).with_window(a.xi0, a.xi1).with_perturbation([a.p1, a.p2]);
    let shot = blayer::shoot(&problem, &IntegratorConfig::new(tol.0, tol.1))?;
    let d = &shot.diagnostics;
    let mut t = Table::new("blayer_profile", &["xi", "H", "dH", "d2H"]);
    for (xi, y) in shot.trajectory.t.iter().zip(&shot.trajectory.y) {
        t.push(vec![(*xi).into(), y[0].into(), y[1].into(), y[2].into()]);
    }
    let mut rep = Report::new("blayer", tol);
    rep.input("a", num(a.a));
    rep.input("p1", num(a.p1));
    rep.input("p2", num(a.p2));
    rep.input("xi0", num(a.xi0));
    rep.input("xi1", num(a.xi1));
    rep.result("outcome", d.outcome.label().into());
    rep.result("outcome_xi", opt(outcome_xi(&d.outcome)));
    rep.result("departure_xi", opt(d.departure_xi));
    rep.result("departure_direction", i64::from(d.departure_direction).into());
    rep.result("deviation_at_xi1", opt(d.deviation_at_xi1));
    rep.result("maxima", d.maxima.len().into());
    rep.result("end_xi", num(d.end_xi));
    rep.tables = vec![t];
    Ok(rep)
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct BlayerScanArgs {
    /// Curvature values, comma separated.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', default_value = "-1,0,1")]
    a_values: Vec<f64>,
    /// Coefficients on the first growing mode, comma separated.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', default_value = "-0.001,0,0.001")]
    p1: Vec<f64>,
    /// Coefficients on the second growing mode, comma separated.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', default_value = "0")]
    p2: Vec<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = -50.0)]
    xi0: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 50.0)]
    xi1: f64,
}

pub fn blayer_scan(a: &BlayerScanArgs, c: &Common) -> Result<Report> {
    let tol = c.tolerances((1e-10, 1e-12))?;
    require(!a.a_values.is_empty() && !a.p1.is_empty() && !a.p2.is_empty(), || "scan grids must be non-empty".into())?;
    require(a.a_values.iter().chain(&a.p1).chain(&a.p2).all(|x| x.is_finite()), || "grid values must be finite".into())?;
    check_window(a.xi0, a.xi1)?;
    let perts: Vec<[f64; 2]> = a.p1.iter().flat_map(|&x| a.p2.iter().map(move |&y| [x, y])).collect();
    let rows = blayer::scan_a(&a.a_values, &perts, (a.xi0, a.xi1), &IntegratorConfig::new(tol.0, tol.1))?;
    let mut t = Table::new("blayer_scan", &["a", "p1", "p2", "outcome", "departure_xi", "deviation_at_xi1", "error"]);
    let mut counts = serde_json::Map::new();
    for r in &rows {
        let (outcome, dep, dev, err) = match &r.result {
            Ok(d) => (d.outcome.label().to_string(), d.departure_xi, d.deviation_at_xi1, String::new()),
            Err(e) => ("failed".to_string(), None, None, e.clone()),
        };
        let n = counts.get(&outcome).and_then(Value::as_u64).unwrap_or(0);
        counts.insert(outcome.clone(), (n + 1).into());
        t.push(vec![r.a.into(), r.perturbation[0].into(), r.perturbation[1].into(), outcome.into(), dep.into(), dev.into(), err.into()]);
    }
    let mut rep = Report::new("blayer-scan", tol);
    rep.input("a_values", Value::Array(a.a_values.iter().map(|&x| num(x)).collect()));
    rep.input("p1", Value::Array(a.p1.iter().map(|&x| num(x)).collect()));
    rep.input("p2", Value::Array(a.p2.iter().map(|&x| num(x)).collect()));
    rep.input("xi0", num(a.xi0));
    rep.input("xi1", num(a.xi1));
    rep.result("rows", rows.len().into());
    rep.result("outcomes", Value::Object(counts));
    rep.tables = vec![t];
    Ok(rep)
}
