//! Adaptive Dormand–Prince 5(4) integration with continuous output.
//!
//! The engine works on fixed-size states `[f64; N]`. Every accepted step keeps
//! its fourth-order interpolant, so trajectories can be evaluated anywhere in
//! the covered span and event functions can be refined after the fact. A
//! caller-supplied guard predicate is checked on every trial state: steps that
//! would leave the admissible set are shrunk, and if the step size collapses
//! against the boundary the integration stops with the last valid state.

use crate::error::OdeError;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Tolerances and limits for one integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    /// Budget of attempted steps (accepted and rejected).
    pub max_steps: usize,
    /// Event times are refined until the bracket is below
    /// `event_tol * max(1, |t|)`.
    pub event_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
            event_tol: 1e-14,
        }
    }
}

impl IntegratorConfig {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    /// Purely relative error control, for states spanning many decades.
    pub fn relative(rtol: f64) -> Self {
        Self::new(rtol, 1e-300)
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    pub fn with_h_init(mut self, h: f64) -> Self {
        self.h_init = Some(h);
        self
    }

    pub fn with_max_steps(mut self, n: usize) -> Self {
        self.max_steps = n;
        self
    }

    pub fn with_event_tol(mut self, tol: f64) -> Self {
        self.event_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<(), OdeError> {
        let positive = |x: f64| x > 0.0 && !x.is_nan();
        if !(positive(self.rtol) && self.rtol.is_finite()) {
            return Err(OdeError::InvalidConfig(format!("rtol must be positive, got {}", self.rtol)));
        }
        if !(positive(self.atol) && self.atol.is_finite()) {
            return Err(OdeError::InvalidConfig(format!("atol must be positive, got {}", self.atol)));
        }
        if !positive(self.h_max) {
            return Err(OdeError::InvalidConfig(format!("h_max must be positive, got {}", self.h_max)));
        }
        if self.max_steps == 0 {
            return Err(OdeError::InvalidConfig("max_steps must be positive".into()));
        }
        if !positive(self.event_tol) {
            return Err(OdeError::InvalidConfig(format!("event_tol must be positive, got {}", self.event_tol)));
        }
        if let Some(h) = self.h_init {
            if !(positive(h) && h.is_finite()) {
                return Err(OdeError::InvalidConfig(format!("h_init must be positive, got {h}")));
            }
        }
        Ok(())
    }
}

/// Which sign changes of an event function count as crossings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// From negative to non-negative.
    Rising,
    /// From positive to non-positive.
    Falling,
    Either,
}

impl Direction {
    fn crosses(self, before: f64, after: f64) -> bool {
        let rising = before < 0.0 && after >= 0.0;
        let falling = before > 0.0 && after <= 0.0;
        match self {
            Direction::Rising => rising,
            Direction::Falling => falling,
            Direction::Either => rising || falling,
        }
    }
}

type EventFn<'a, const N: usize> = Box<dyn Fn(f64, &[f64; N]) -> f64 + Send + Sync + 'a>;

/// A scalar event function with a crossing filter.
pub struct Event<'a, const N: usize> {
    func: EventFn<'a, N>,
    pub direction: Direction,
    pub terminal: bool,
}

impl<'a, const N: usize> Event<'a, N> {
    pub fn new(func: impl Fn(f64, &[f64; N]) -> f64 + Send + Sync + 'a, direction: Direction) -> Self {
        Self { func: Box::new(func), direction, terminal: false }
    }

    /// Stop the integration at the first crossing.
    pub fn terminal(mut self) -> Self {
        self.terminal = true;
        self
    }

    pub fn eval(&self, t: f64, y: &[f64; N]) -> f64 {
        (self.func)(t, y)
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    SpanEnd,
    /// A terminal event fired; `index` refers to the event list.
    Event { index: usize },
    /// The guard could not be satisfied by any representable step.
    Guard,
    StepUnderflow,
    StepBudget,
}

/// One accepted step together with its continuous extension.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    r: [[f64; N]; 4],
}

impl<const N: usize> DenseStep<N> {
    /// Interpolated state; endpoints are returned exactly as stored.
    pub fn eval(&self, t: f64) -> [f64; N] {
        if t == self.t0 {
            return self.y0;
        }
        if t == self.t1 {
            return self.y1;
        }
        let s = (t - self.t0) / (self.t1 - self.t0);
        let s1 = 1.0 - s;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = self.y0[i]
                + s * (self.r[0][i] + s1 * (self.r[1][i] + s * (self.r[2][i] + s1 * self.r[3][i])));
        }
        out
    }

    pub fn h(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.t0 <= self.t1 { (self.t0, self.t1) } else { (self.t1, self.t0) };
        t >= lo && t <= hi
    }

    /// Shift the time axis of this step (for autonomous systems).
    pub fn shifted(&self, dt: f64) -> Self {
        Self { t0: self.t0 + dt, t1: self.t1 + dt, ..self.clone() }
    }
}

/// Outcome of a single call to [`Stepper::step`].
#[derive(Debug, Clone)]
pub enum StepOutcome<const N: usize> {
    Accepted(DenseStep<N>),
    Done(Termination),
}

/// Low-level step-by-step driver.
///
/// Useful when the caller wants to process steps as they come, for example
/// to avoid storing very long trajectories or to re-origin the time axis of
/// an autonomous system.
pub struct Stepper<const N: usize, F> {
    rhs: F,
    cfg: IntegratorConfig,
    t: f64,
    y: [f64; N],
    f: [f64; N],
    h: f64,
    t_end: f64,
    dir: f64,
    err_prev: f64,
    attempts: usize,
    last_rejected: bool,
    guard_blocked: bool,
}

impl<const N: usize, F> Stepper<N, F>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(rhs: F, t0: f64, y0: [f64; N], t_end: f64, cfg: IntegratorConfig) -> Result<Self, OdeError> {
        cfg.validate()?;
        if t0 == t_end || t0.is_nan() || t_end.is_nan() {
            return Err(OdeError::EmptySpan);
        }
        if y0.iter().any(|v| !v.is_finite()) {
            return Err(OdeError::NonFiniteInitial);
        }
        let f0 = rhs(t0, &y0);
        if f0.iter().any(|v| !v.is_finite()) {
            return Err(OdeError::NonFiniteInitial);
        }
        let dir = if t_end > t0 { 1.0 } else { -1.0 };
        let mut s = Self {
            rhs,
            cfg,
            t: t0,
            y: y0,
            f: f0,
            h: 0.0,
            t_end,
            dir,
            err_prev: 1e-4,
            attempts: 0,
            last_rejected: false,
            guard_blocked: false,
        };
        s.h = match cfg.h_init {
            Some(h) => h.min(cfg.h_max),
            None => s.initial_step(),
        };
        Ok(s)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    pub fn attempts(&self) -> usize {
        self.attempts
    }

    /// Move the time origin so that the current time becomes `t_new`.
    ///
    /// Only meaningful for autonomous right-hand sides. Finite end points are
    /// shifted by the same amount.
    pub fn rebase_time(&mut self, t_new: f64) {
        let dt = t_new - self.t;
        self.t = t_new;
        if self.t_end.is_finite() {
            self.t_end += dt;
        }
    }

    /// Move the end of the span, keeping the integration direction.
    pub fn set_end(&mut self, t_end: f64) {
        self.t_end = t_end;
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.cfg.atol + self.cfg.rtol * a.abs().max(b.abs())
    }

    fn initial_step(&self) -> f64 {
        let mut d0: f64 = 0.0;
        let mut d1: f64 = 0.0;
        for i in 0..N {
            let sk = self.scale(self.y[i], self.y[i]);
            d0 = d0.max((self.y[i] / sk).abs());
            d1 = d1.max((self.f[i] / sk).abs());
        }
        let span = (self.t_end - self.t).abs();
        let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h = h.min(self.cfg.h_max).min(span);
        let y1: [f64; N] = std::array::from_fn(|i| self.y[i] + self.dir * h * self.f[i]);
        let f1 = (self.rhs)(self.t + self.dir * h, &y1);
        if f1.iter().any(|v| !v.is_finite()) {
            return h;
        }
        let mut d2: f64 = 0.0;
        for i in 0..N {
            let sk = self.scale(self.y[i], self.y[i]);
            d2 = d2.max(((f1[i] - self.f[i]) / sk).abs());
        }
        d2 /= h;
        let dmax = d1.max(d2);
        let h1 = if dmax <= 1e-15 { (1e-6f64).max(h * 1e-3) } else { (0.01 / dmax).powf(0.2) };
        (100.0 * h).min(h1).min(self.cfg.h_max).min(span)
    }

    /// Attempt steps until one is accepted or the integration has to stop.
    pub fn step<G>(&mut self, guard: &G) -> StepOutcome<N>
    where
        G: Fn(&[f64; N]) -> bool,
    {
        loop {
            if self.t == self.t_end {
                return StepOutcome::Done(Termination::SpanEnd);
            }
            if self.attempts >= self.cfg.max_steps {
                return StepOutcome::Done(Termination::StepBudget);
            }
            let remaining = self.t_end - self.t;
            let mut h = self.h.abs().min(self.cfg.h_max);
            let mut last = false;
            if h >= remaining.abs() {
                h = remaining.abs();
                last = true;
            }
            let h_min = 10.0 * f64::EPSILON * self.t.abs().max(1e-290);
            if h < h_min || h == 0.0 {
                return StepOutcome::Done(if self.guard_blocked {
                    Termination::Guard
                } else {
                    Termination::StepUnderflow
                });
            }
            let h = h * self.dir;
            self.attempts += 1;

            let (y_new, k7, err, r) = self.trial(h);
            let finite = err.is_finite() && y_new.iter().all(|v| v.is_finite());
            if !finite {
                self.h = 0.25 * h.abs();
                self.last_rejected = true;
                continue;
            }
            if !guard(&y_new) {
                self.h = 0.25 * h.abs();
                self.last_rejected = true;
                self.guard_blocked = true;
                continue;
            }
            let fac11 = err.powf(0.2 - BETA * 0.75);
            if err <= 1.0 {
                let mut fac = fac11 / self.err_prev.powf(BETA);
                fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_new = h.abs() / fac;
                if self.last_rejected {
                    h_new = h_new.min(h.abs());
                }
                self.err_prev = err.max(1e-4);
                self.last_rejected = false;
                self.guard_blocked = false;
                let t0 = self.t;
                let t1 = if last { self.t_end } else { self.t + h };
                let step = DenseStep { t0, t1, y0: self.y, y1: y_new, r };
                self.t = t1;
                self.y = y_new;
                self.f = k7;
                self.h = h_new;
                return StepOutcome::Accepted(step);
            }
            self.h = h.abs() / (1.0 / FAC_MIN).min(fac11 / SAFETY);
            self.last_rejected = true;
            // A rejection for accuracy reasons means the guard was not the obstacle.
            self.guard_blocked = false;
        }
    }

    #[allow(clippy::type_complexity)]
    fn trial(&self, h: f64) -> ([f64; N], [f64; N], f64, [[f64; N]; 4]) {
        let t = self.t;
        let y = &self.y;
        let k1 = self.f;
        let stage = |coef: &[(f64, &[f64; N])]| -> [f64; N] {
            std::array::from_fn(|i| y[i] + h * coef.iter().map(|(c, k)| c * k[i]).sum::<f64>())
        };
        let k2 = (self.rhs)(t + C2 * h, &stage(&[(A21, &k1)]));
        let k3 = (self.rhs)(t + C3 * h, &stage(&[(A31, &k1), (A32, &k2)]));
        let k4 = (self.rhs)(t + C4 * h, &stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = (self.rhs)(t + C5 * h, &stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = (self.rhs)(
            t + h,
            &stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = stage(&[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = (self.rhs)(t + h, &y_new);

        let mut err: f64 = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = self.scale(y[i], y_new[i]);
            err = err.max((e / sk).abs());
        }
        if err.is_nan() {
            err = f64::INFINITY;
        }

        let mut r = [[0.0; N]; 4];
        for i in 0..N {
            let dy = y_new[i] - y[i];
            let bspl = h * k1[i] - dy;
            r[0][i] = dy;
            r[1][i] = bspl;
            r[2][i] = dy - h * k7[i] - bspl;
            r[3][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        (y_new, k7, err, r)
    }
}

/// A located event.
#[derive(Debug, Clone, PartialEq)]
pub struct EventHit<const N: usize> {
    pub index: usize,
    pub t: f64,
    pub y: [f64; N],
}

/// Result of [`integrate`].
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub steps: Vec<DenseStep<N>>,
    pub events: Vec<EventHit<N>>,
    pub termination: Termination,
}

impl<const N: usize> Trajectory<N> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.t[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.t.last().expect("trajectory holds the initial point")
    }

    pub fn last(&self) -> &[f64; N] {
        self.y.last().expect("trajectory holds the initial point")
    }

    fn forward(&self) -> bool {
        self.t.len() < 2 || self.t[1] > self.t[0]
    }

    /// Dense-output evaluation; `None` outside the covered span.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        let n = self.t.len();
        if n == 1 {
            return (t == self.t[0]).then_some(self.y[0]);
        }
        let fwd = self.forward();
        let key = |x: f64| if fwd { x } else { -x };
        let (a, b) = (key(self.t[0]), key(self.t[n - 1]));
        let k = key(t);
        if !(k >= a && k <= b) {
            return None;
        }
        let idx = self.t.partition_point(|&s| key(s) <= k);
        if idx == n {
            return Some(self.y[n - 1]);
        }
        let seg = idx.saturating_sub(1);
        if self.t[seg] == t {
            return Some(self.y[seg]);
        }
        Some(self.steps[seg].eval(t))
    }

    /// Error out if the integration ended on a numerical failure.
    pub fn ensure_complete(&self) -> Result<(), OdeError> {
        match self.termination {
            Termination::StepUnderflow => Err(OdeError::StepUnderflow { t: self.t_end() }),
            Termination::StepBudget => Err(OdeError::BudgetExhausted { steps: self.steps.len(), t: self.t_end() }),
            _ => Ok(()),
        }
    }

    /// Crossings of `f` along the stored trajectory, refined on the dense output.
    pub fn locate_event<E>(&self, f: E, direction: Direction, tol: f64) -> Vec<(f64, [f64; N])>
    where
        E: Fn(f64, &[f64; N]) -> f64,
    {
        let mut out = Vec::new();
        if self.t.len() < 2 {
            return out;
        }
        let mut g0 = f(self.t[0], &self.y[0]);
        for (i, step) in self.steps.iter().enumerate() {
            let t1 = self.t[i + 1];
            let g1 = f(t1, &self.y[i + 1]);
            if direction.crosses(g0, g1) {
                let g = |t: f64| f(t, &step.eval(t));
                let root = refine_root(&g, self.t[i], t1, g0, g1, tol);
                out.push((root, step.eval(root)));
            }
            g0 = g1;
        }
        out
    }
}

/// Free-function form of [`Trajectory::locate_event`].
pub fn locate_event<const N: usize, E>(
    traj: &Trajectory<N>,
    f: E,
    direction: Direction,
    tol: f64,
) -> Vec<(f64, [f64; N])>
where
    E: Fn(f64, &[f64; N]) -> f64,
{
    traj.locate_event(f, direction, tol)
}

/// Bracketed root refinement (Illinois variant of regula falsi with periodic
/// bisection). `ga` and `gb` must have opposite signs or `gb` must vanish.
pub fn refine_root<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, ga: f64, gb: f64, tol: f64) -> f64 {
    if gb == 0.0 {
        return b;
    }
    if ga == 0.0 {
        return a;
    }
    let (mut a, mut b, mut fa, mut fb) = (a, b, ga, gb);
    for it in 0..200 {
        let width = (b - a).abs();
        if width <= tol * a.abs().max(b.abs()).max(1.0) {
            break;
        }
        let lo = a.min(b);
        let hi = a.max(b);
        let mut c = b - fb * (b - a) / (fb - fa);
        if it % 4 == 3 || !(c > lo && c < hi) {
            c = 0.5 * (a + b);
        }
        if c == a || c == b {
            break;
        }
        let fc = g(c);
        if fc == 0.0 {
            return c;
        }
        if fc.signum() != fb.signum() {
            a = b;
            fa = fb;
        } else {
            fa *= 0.5;
        }
        b = c;
        fb = fc;
    }
    b
}

/// Integrate `y' = rhs(t, y)` over `span` with guard and events.
///
/// Non-terminal events are recorded in [`Trajectory::events`]; the first
/// terminal crossing ends the integration at the refined event point.
pub fn integrate<const N: usize, F, G>(
    rhs: F,
    y0: [f64; N],
    span: (f64, f64),
    config: &IntegratorConfig,
    guard: G,
    events: &[Event<'_, N>],
) -> Result<Trajectory<N>, OdeError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: Fn(&[f64; N]) -> bool,
{
    if !guard(&y0) {
        return Err(OdeError::GuardViolatedAtStart);
    }
    let (t0, t1) = span;
    let mut stepper = Stepper::new(rhs, t0, y0, t1, *config)?;
    let mut traj = Trajectory { t: vec![t0], y: vec![y0], steps: Vec::new(), events: Vec::new(), termination: Termination::SpanEnd };
    let mut g_prev: Vec<f64> = events.iter().map(|e| e.eval(t0, &y0)).collect();
    loop {
        match stepper.step(&guard) {
            StepOutcome::Done(reason) => {
                traj.termination = reason;
                return Ok(traj);
            }
            StepOutcome::Accepted(step) => {
                let mut hits: Vec<EventHit<N>> = Vec::new();
                for (k, ev) in events.iter().enumerate() {
                    let g1 = ev.eval(step.t1, &step.y1);
                    if ev.direction.crosses(g_prev[k], g1) {
                        let g = |t: f64| ev.eval(t, &step.eval(t));
                        let tr = refine_root(&g, step.t0, step.t1, g_prev[k], g1, config.event_tol);
                        hits.push(EventHit { index: k, t: tr, y: step.eval(tr) });
                    }
                    g_prev[k] = g1;
                }
                let dir = if step.t1 > step.t0 { 1.0 } else { -1.0 };
                hits.sort_by(|p, q| (dir * p.t).total_cmp(&(dir * q.t)));
                let mut stop: Option<EventHit<N>> = None;
                for hit in hits {
                    let terminal = events[hit.index].terminal;
                    traj.events.push(hit.clone());
                    if terminal {
                        stop = Some(hit);
                        break;
                    }
                }
                match stop {
                    Some(hit) => {
                        if hit.t != step.t0 {
                            traj.t.push(hit.t);
                            traj.y.push(hit.y);
                            traj.steps.push(step);
                        }
                        traj.termination = Termination::Event { index: hit.index };
                        return Ok(traj);
                    }
                    None => {
                        traj.t.push(step.t1);
                        traj.y.push(step.y1);
                        traj.steps.push(step);
                    }
                }
            }
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new(start: f64) -> Self {
        Self { sum: start, comp: 0.0 }
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// End state of [`integrate_autonomous`]. Times are elapsed times from the
/// start, accumulated in a compensated sum.
#[derive(Debug, Clone, PartialEq)]
pub struct AutonomousRun<const N: usize> {
    pub elapsed: f64,
    pub y: [f64; N],
    pub events: Vec<EventHit<N>>,
    pub termination: Termination,
    pub steps: usize,
}

/// Integrate an autonomous system forward for at most `horizon`, moving the
/// time origin to the current point after every step.
///
/// Useful when thin layers occur after a long elapsed time, where an absolute
/// time coordinate would not resolve them. Event functions receive the
/// elapsed time (approximate beyond the compensated sum) and the state.
pub fn integrate_autonomous<const N: usize, F, G>(
    rhs: F,
    y0: [f64; N],
    horizon: f64,
    config: &IntegratorConfig,
    guard: G,
    events: &[Event<'_, N>],
) -> Result<AutonomousRun<N>, OdeError>
where
    F: Fn(&[f64; N]) -> [f64; N],
    G: Fn(&[f64; N]) -> bool,
{
    if !guard(&y0) {
        return Err(OdeError::GuardViolatedAtStart);
    }
    if !(horizon > 0.0) {
        return Err(OdeError::EmptySpan);
    }
    let f = |_t: f64, y: &[f64; N]| rhs(y);
    let mut stepper = Stepper::new(f, 0.0, y0, horizon, *config)?;
    let mut clock = CompensatedSum::new(0.0);
    let mut run = AutonomousRun { elapsed: 0.0, y: y0, events: Vec::new(), termination: Termination::SpanEnd, steps: 0 };
    let mut g_prev: Vec<f64> = events.iter().map(|e| e.eval(0.0, &y0)).collect();
    loop {
        let step = match stepper.step(&guard) {
            StepOutcome::Done(reason) => {
                run.termination = reason;
                run.elapsed = clock.value();
                return Ok(run);
            }
            StepOutcome::Accepted(step) => step,
        };
        run.steps += 1;
        let base = clock.value();
        let mut hits: Vec<EventHit<N>> = Vec::new();
        for (k, ev) in events.iter().enumerate() {
            let g1 = ev.eval(base + step.t1, &step.y1);
            if ev.direction.crosses(g_prev[k], g1) {
                let g = |t: f64| ev.eval(base + t, &step.eval(t));
                let tr = refine_root(&g, step.t0, step.t1, g_prev[k], g1, config.event_tol);
                hits.push(EventHit { index: k, t: tr, y: step.eval(tr) });
            }
            g_prev[k] = g1;
        }
        hits.sort_by(|p, q| p.t.total_cmp(&q.t));
        for hit in hits {
            let terminal = events[hit.index].terminal;
            let mut at = clock;
            at.add(hit.t - step.t0);
            run.events.push(EventHit { index: hit.index, t: at.value(), y: hit.y });
            if terminal {
                run.elapsed = at.value();
                run.y = hit.y;
                run.termination = Termination::Event { index: hit.index };
                return Ok(run);
            }
        }
        clock.add(step.t1 - step.t0);
        run.y = step.y1;
        let remaining = horizon - clock.value();
        if !(remaining > 0.0) {
            run.elapsed = clock.value();
            return Ok(run);
        }
        stepper.rebase_time(0.0);
        stepper.set_end(remaining);
    }
}

/// Integrate without guard or events.
pub fn integrate_plain<const N: usize, F>(
    rhs: F,
    y0: [f64; N],
    span: (f64, f64),
    config: &IntegratorConfig,
) -> Result<Trajectory<N>, OdeError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    integrate(rhs, y0, span, config, |_: &[f64; N]| true, &[])
}
