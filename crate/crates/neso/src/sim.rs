//! Deterministic fixed-step integration of the full closed loop: plant,
//! consensus estimation, and observer, with disruption windows aligned to
//! step boundaries and trajectory recording.
//!
//! A single run is strictly sequential and reproducible bit for bit on the
//! same build; distinct runs are independent and may execute concurrently.

use nalgebra::DVector;
use thiserror::Error;

use crate::environment::{EnvError, Environment};
use crate::game::{solve_nash, Game, GameError, SolveError, NASH_MAX_ITER, NASH_TOL};
use crate::graph::CommGraph;
use crate::seeker::{
    consensus_derivative, control_all, pi_observer_derivative, rise_observer_derivative,
    EstimateTensor, SeekerError, SeekerGains, SeekerState,
};

/// Abort threshold on `||x||_inf`; far above every builtin scenario's
/// dynamics (initial actions within 10, equilibria within [-2, 1]).
pub const DIVERGENCE_LIMIT: f64 = 1e8;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("divergence: ||x||_inf exceeded {DIVERGENCE_LIMIT:e} at t = {t}")]
    Divergence { t: f64 },
    #[error("window [{a}, {b}] contains no recorded samples")]
    EmptyWindow { a: f64, b: f64 },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("estimate tensor was not recorded (enable record_estimates)")]
    EstimatesNotRecorded,
    #[error("Nash oracle failed: {0}")]
    Oracle(#[from] SolveError),
    #[error(transparent)]
    Seeker(#[from] SeekerError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// A complete closed-loop experiment description.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub game: Game,
    pub environment: Environment,
    pub graph: CommGraph,
    pub gains: SeekerGains,
    pub x0: DVector<f64>,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Steps between recorded samples.
    pub record_every: usize,
    /// Whether the full N x N x n estimate tensor is logged per sample.
    pub record_estimates: bool,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SimError> {
        let n = self.game.n_players();
        let dim = self.game.dim();
        if self.environment.n_players() != n || self.environment.dim() != dim {
            return Err(SimError::Invalid(format!(
                "environment is {}x{}, game is {}x{}",
                self.environment.n_players(),
                self.environment.dim(),
                n,
                dim
            )));
        }
        if self.graph.n_players() != n {
            return Err(SimError::Invalid(format!(
                "graph has {} players, game has {}",
                self.graph.n_players(),
                n
            )));
        }
        if self.x0.len() != self.game.joint_dim() {
            return Err(SimError::Invalid(format!(
                "x0 has length {}, expected {}",
                self.x0.len(),
                self.game.joint_dim()
            )));
        }
        if !crate::strictly_positive(self.dt) {
            return Err(SimError::Invalid(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.t_end.partial_cmp(&self.t0) != Some(std::cmp::Ordering::Greater) {
            return Err(SimError::Invalid(format!(
                "t_end ({}) must exceed t0 ({})",
                self.t_end, self.t0
            )));
        }
        if self.record_every == 0 {
            return Err(SimError::Invalid("record_every must be at least 1".into()));
        }
        self.gains.validate(n)?;
        Ok(())
    }

    /// Number of fixed steps covering `[t0, t_end]`.
    pub fn n_steps(&self) -> usize {
        (((self.t_end - self.t0) / self.dt).round() as usize).max(1)
    }
}

/// The integrated state of the coupled system.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    pub x: DVector<f64>,
    pub xhat: DVector<f64>,
    pub zhat: DVector<f64>,
    pub y: EstimateTensor,
}

impl FullState {
    /// Initial state from the scenario's initialization rule.
    pub fn init(scenario: &Scenario) -> Self {
        let seeker = SeekerState::init(&scenario.x0, &scenario.graph, scenario.game.dim());
        Self {
            x: scenario.x0.clone(),
            xhat: seeker.xhat,
            zhat: seeker.zhat,
            y: seeker.y,
        }
    }

    fn pack(&self) -> DVector<f64> {
        let j = self.x.len();
        let yl = self.y.flat().len();
        let mut out = DVector::zeros(3 * j + yl);
        out.rows_mut(0, j).copy_from(&self.x);
        out.rows_mut(j, j).copy_from(&self.xhat);
        out.rows_mut(2 * j, j).copy_from(&self.zhat);
        out.rows_mut(3 * j, yl).copy_from(self.y.flat());
        out
    }

    fn unpack(flat: &DVector<f64>, n_players: usize, dim: usize) -> Self {
        let j = n_players * dim;
        Self {
            x: flat.rows(0, j).into_owned(),
            xhat: flat.rows(j, j).into_owned(),
            zhat: flat.rows(2 * j, j).into_owned(),
            y: EstimateTensor::from_flat(
                n_players,
                dim,
                flat.rows(3 * j, n_players * j).into_owned(),
            ),
        }
    }
}

/// Derivative evaluation context shared by all stages of a run.
struct LoopContext<'a> {
    game: &'a Game,
    environment: &'a Environment,
    graph: &'a CommGraph,
    gains: &'a SeekerGains,
    theta_table: nalgebra::DMatrix<f64>,
}

impl<'a> LoopContext<'a> {
    fn new(
        game: &'a Game,
        environment: &'a Environment,
        graph: &'a CommGraph,
        gains: &'a SeekerGains,
    ) -> Self {
        Self {
            game,
            environment,
            graph,
            gains,
            theta_table: gains.theta_table(),
        }
    }

    /// Coupled derivative field of (x, xhat, zhat, y) at time `t`.
    fn derivative(&self, t: f64, flat: &DVector<f64>) -> Result<DVector<f64>, SimError> {
        let n = self.game.n_players();
        let dim = self.game.dim();
        let state = FullState::unpack(flat, n, dim);
        let seeker = SeekerState {
            y: state.y,
            xhat: state.xhat,
            zhat: state.zhat,
        };
        let u = control_all(self.game, &seeker)?;
        let dx = self.environment.plant_derivative(&state.x, &u, t)?;
        let w_eff = self.graph.effective_weights(t);
        let dy = consensus_derivative(&seeker.y, &state.x, &w_eff, &self.theta_table);
        let (dxhat, dzhat) = match self.gains {
            SeekerGains::Pi(g) => pi_observer_derivative(&seeker, &state.x, &u, g),
            SeekerGains::Rise(g) => rise_observer_derivative(&seeker, &state.x, &u, g),
        };
        Ok(FullState {
            x: dx,
            xhat: dxhat,
            zhat: dzhat,
            y: dy,
        }
        .pack())
    }

    /// One integration step: classical RK4 with effective weights sampled
    /// at the sub-stage times. For the RISE strategy with exact signum the
    /// step downgrades to explicit Euler whenever any component of
    /// `zeta_1 = x - xhat` changes sign within the stage evaluations.
    fn step(&self, t: f64, flat: &DVector<f64>, dt: f64) -> Result<DVector<f64>, SimError> {
        let k1 = self.derivative(t, flat)?;
        let s2 = flat + &k1 * (dt / 2.0);
        let k2 = self.derivative(t + dt / 2.0, &s2)?;
        let s3 = flat + &k2 * (dt / 2.0);
        let k3 = self.derivative(t + dt / 2.0, &s3)?;
        let s4 = flat + &k3 * dt;
        let k4 = self.derivative(t + dt, &s4)?;

        let exact_sign_rise = matches!(self.gains, SeekerGains::Rise(g) if g.sgn_smoothing == 0.0);
        if exact_sign_rise {
            let j = self.game.joint_dim();
            let zeta1 = |s: &DVector<f64>, k: usize| s[k] - s[j + k];
            let flipped = (0..j).any(|k| {
                let base = zeta1(flat, k);
                [&s2, &s3, &s4]
                    .iter()
                    .any(|stage| base * zeta1(stage, k) < 0.0)
            });
            if flipped {
                return Ok(flat + &k1 * dt);
            }
        }
        Ok(flat + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
    }
}

/// One integration step of the coupled closed loop.
///
/// Exposed for tests and callers driving custom initial states; [`run`]
/// additionally snaps disruption windows to the step grid before stepping.
/// A non-finite result aborts with a diagnostic.
pub fn step(
    scenario: &Scenario,
    state: &FullState,
    t: f64,
    dt: f64,
) -> Result<FullState, SimError> {
    let ctx = LoopContext::new(
        &scenario.game,
        &scenario.environment,
        &scenario.graph,
        &scenario.gains,
    );
    let next = ctx.step(t, &state.pack(), dt)?;
    if next.iter().any(|v| !v.is_finite()) {
        return Err(SimError::NonFinite { t });
    }
    Ok(FullState::unpack(
        &next,
        scenario.game.n_players(),
        scenario.game.dim(),
    ))
}

/// Classical fourth-order Runge-Kutta step for a generic vector field.
pub fn rk4_step(
    f: impl Fn(f64, &DVector<f64>) -> DVector<f64>,
    t: f64,
    y: &DVector<f64>,
    dt: f64,
) -> DVector<f64> {
    let k1 = f(t, y);
    let k2 = f(t + dt / 2.0, &(y + &k1 * (dt / 2.0)));
    let k3 = f(t + dt / 2.0, &(y + &k2 * (dt / 2.0)));
    let k4 = f(t + dt, &(y + &k3 * dt));
    y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Time-indexed record of a closed-loop run with derived error signals.
///
/// Primary series are `x`, `xhat`, `zhat` (and optionally the estimate
/// tensor); the derived signals are recomputed from primaries at recording
/// time, never integrated: `xi = x - x*` against the oracle equilibrium,
/// `zeta1 = x - xhat`, `zeta2 = z(x, t) - zhat` with `z` the true extended
/// state, `eta_norm = ||[y_ij - x_j]||_2`, and for the RISE strategy
/// `gamma = -ks zeta1 + zeta2`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub x: Vec<DVector<f64>>,
    pub xhat: Vec<DVector<f64>>,
    pub zhat: Vec<DVector<f64>>,
    pub xi: Vec<DVector<f64>>,
    pub zeta1: Vec<DVector<f64>>,
    pub zeta2: Vec<DVector<f64>>,
    /// RISE runs only.
    pub gamma: Option<Vec<DVector<f64>>>,
    pub eta_norm: Vec<f64>,
    /// Estimate tensors, when `record_estimates` was set.
    pub y: Vec<EstimateTensor>,
    /// The oracle equilibrium used for `xi`.
    pub x_star: DVector<f64>,
    n_players: usize,
    dim: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Indices of recorded samples falling inside `[a, b]`.
    pub fn window_indices(&self, window: (f64, f64)) -> Result<Vec<usize>, SimError> {
        let (a, b) = window;
        let idx: Vec<usize> = self
            .times
            .iter()
            .enumerate()
            .filter(|(_, &t)| t >= a && t <= b)
            .map(|(k, _)| k)
            .collect();
        if a >= b || idx.is_empty() {
            return Err(SimError::EmptyWindow { a, b });
        }
        Ok(idx)
    }

    /// Stacked error norm `||(zeta1, zeta2, eta, xi)||_2` at sample `k`.
    ///
    /// Summation runs in component order per series (`zeta1`, `zeta2`,
    /// `eta_norm^2`, `xi`), so the value is bit-reproducible from the CSV
    /// columns.
    pub fn error_norm(&self, k: usize) -> f64 {
        let sq = |v: &DVector<f64>| v.iter().map(|e| e * e).sum::<f64>();
        (sq(&self.zeta1[k])
            + sq(&self.zeta2[k])
            + self.eta_norm[k] * self.eta_norm[k]
            + sq(&self.xi[k]))
        .sqrt()
    }

    /// Sampled sup of `||xi||_inf` over a window.
    pub fn sup_xi_inf(&self, window: (f64, f64)) -> Result<f64, SimError> {
        Ok(self
            .window_indices(window)?
            .into_iter()
            .map(|k| self.xi[k].amax())
            .fold(0.0, f64::max))
    }

    /// Sampled sup of `||zeta2||_inf` over a window.
    pub fn sup_zeta2_inf(&self, window: (f64, f64)) -> Result<f64, SimError> {
        Ok(self
            .window_indices(window)?
            .into_iter()
            .map(|k| self.zeta2[k].amax())
            .fold(0.0, f64::max))
    }

    /// `||xi||_inf` at the final sample.
    pub fn final_xi_inf(&self) -> f64 {
        self.xi.last().map(|v| v.amax()).unwrap_or(f64::NAN)
    }

    /// `||zeta2||_2` at the final sample.
    pub fn final_zeta2_norm(&self) -> f64 {
        self.zeta2.last().map(|v| v.norm()).unwrap_or(f64::NAN)
    }

    /// Largest per-pair estimate error `max_ij ||y_ij - x_j||_2` at sample
    /// `k`; requires recorded estimates.
    pub fn eta_max(&self, k: usize) -> Result<f64, SimError> {
        let y = self.y.get(k).ok_or(SimError::EstimatesNotRecorded)?;
        let x = &self.x[k];
        let mut worst: f64 = 0.0;
        for i in 0..self.n_players {
            for j in 0..self.n_players {
                let mut sq = 0.0;
                for c in 0..self.dim {
                    let e = y.get(i, j, c) - x[j * self.dim + c];
                    sq += e * e;
                }
                worst = worst.max(sq.sqrt());
            }
        }
        Ok(worst)
    }

    /// Writes the trajectory as CSV with 17-significant-digit floats.
    ///
    /// Columns: `t`, `x_{i}_{k}`, `xhat_{i}_{k}`, `zhat_{i}_{k}`,
    /// `xi_{i}_{k}`, `zeta1_{i}_{k}`, `zeta2_{i}_{k}`, `eta_norm`, and for
    /// RISE runs `gamma_{i}_{k}`; player and component indices are 1-based.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<(), SimError> {
        let mut header = vec!["t".to_string()];
        for series in ["x", "xhat", "zhat", "xi", "zeta1", "zeta2"] {
            for i in 1..=self.n_players {
                for k in 1..=self.dim {
                    header.push(format!("{series}_{i}_{k}"));
                }
            }
        }
        header.push("eta_norm".to_string());
        if self.gamma.is_some() {
            for i in 1..=self.n_players {
                for k in 1..=self.dim {
                    header.push(format!("gamma_{i}_{k}"));
                }
            }
        }
        writeln!(w, "{}", header.join(","))?;
        let mut line = String::new();
        for s in 0..self.len() {
            line.clear();
            line.push_str(&fmt_float(self.times[s]));
            for series in [
                &self.x[s],
                &self.xhat[s],
                &self.zhat[s],
                &self.xi[s],
                &self.zeta1[s],
                &self.zeta2[s],
            ] {
                for v in series.iter() {
                    line.push(',');
                    line.push_str(&fmt_float(*v));
                }
            }
            line.push(',');
            line.push_str(&fmt_float(self.eta_norm[s]));
            if let Some(gamma) = &self.gamma {
                for v in gamma[s].iter() {
                    line.push(',');
                    line.push_str(&fmt_float(*v));
                }
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Writes the recorded estimate tensors as CSV (`t`, `y_{i}_{j}_{k}`).
    pub fn write_estimates_csv<W: std::io::Write>(&self, mut w: W) -> Result<(), SimError> {
        if self.y.len() != self.len() {
            return Err(SimError::EstimatesNotRecorded);
        }
        let mut header = vec!["t".to_string()];
        for i in 1..=self.n_players {
            for j in 1..=self.n_players {
                for k in 1..=self.dim {
                    header.push(format!("y_{i}_{j}_{k}"));
                }
            }
        }
        writeln!(w, "{}", header.join(","))?;
        for s in 0..self.len() {
            let mut line = fmt_float(self.times[s]);
            for v in self.y[s].flat().iter() {
                line.push(',');
                line.push_str(&fmt_float(*v));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// 17 significant digits, enough to round-trip any f64.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Sup over the window's recorded samples of the stacked error norm
/// `||(zeta, eta, xi)||_2`.
pub fn ultimate_bound(traj: &Trajectory, window: (f64, f64)) -> Result<f64, SimError> {
    Ok(traj
        .window_indices(window)?
        .into_iter()
        .map(|k| traj.error_norm(k))
        .fold(0.0, f64::max))
}

/// Integrates the scenario from `t0` to `t_end`, recording every
/// `record_every` steps (plus the final step) and attaching derived error
/// signals computed against the Nash oracle.
pub fn run(scenario: &Scenario) -> Result<Trajectory, SimError> {
    scenario.validate()?;
    let x_star = solve_nash(
        &scenario.game,
        &DVector::zeros(scenario.game.joint_dim()),
        NASH_TOL,
        NASH_MAX_ITER,
    )?;
    let graph = scenario
        .graph
        .with_windows_snapped(scenario.t0, scenario.dt);
    let ctx = LoopContext::new(
        &scenario.game,
        &scenario.environment,
        &graph,
        &scenario.gains,
    );
    let n = scenario.game.n_players();
    let dim = scenario.game.dim();
    let n_steps = scenario.n_steps();
    let is_rise = scenario.gains.is_rise();
    let ks = match &scenario.gains {
        SeekerGains::Rise(g) => g.ks.clone(),
        SeekerGains::Pi(_) => Vec::new(),
    };

    let mut traj = Trajectory {
        times: Vec::new(),
        x: Vec::new(),
        xhat: Vec::new(),
        zhat: Vec::new(),
        xi: Vec::new(),
        zeta1: Vec::new(),
        zeta2: Vec::new(),
        gamma: is_rise.then(Vec::new),
        eta_norm: Vec::new(),
        y: Vec::new(),
        x_star: x_star.clone(),
        n_players: n,
        dim,
    };

    let record = |flat: &DVector<f64>, t: f64, traj: &mut Trajectory| {
        let state = FullState::unpack(flat, n, dim);
        let z = scenario.environment.extended_state(&state.x, t);
        let xi = &state.x - &x_star;
        let zeta1 = &state.x - &state.xhat;
        let zeta2 = &z - &state.zhat;
        let mut eta_sq = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..dim {
                    let e = state.y.get(i, j, k) - state.x[j * dim + k];
                    eta_sq += e * e;
                }
            }
        }
        if let Some(gamma) = traj.gamma.as_mut() {
            let mut g = zeta2.clone();
            for i in 0..n {
                for k in 0..dim {
                    g[i * dim + k] -= ks[i] * zeta1[i * dim + k];
                }
            }
            gamma.push(g);
        }
        traj.times.push(t);
        traj.x.push(state.x);
        traj.xhat.push(state.xhat);
        traj.zhat.push(state.zhat);
        traj.xi.push(xi);
        traj.zeta1.push(zeta1);
        traj.zeta2.push(zeta2);
        traj.eta_norm.push(eta_sq.sqrt());
        if scenario.record_estimates {
            traj.y.push(state.y);
        }
    };

    let mut flat = FullState::init(scenario).pack();
    record(&flat, scenario.t0, &mut traj);
    for k in 0..n_steps {
        let t = scenario.t0 + k as f64 * scenario.dt;
        flat = ctx.step(t, &flat, scenario.dt)?;
        let t_next = scenario.t0 + (k + 1) as f64 * scenario.dt;
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFinite { t: t_next });
        }
        if flat.rows(0, n * dim).amax() > DIVERGENCE_LIMIT {
            return Err(SimError::Divergence { t: t_next });
        }
        if (k + 1) % scenario.record_every == 0 || k + 1 == n_steps {
            record(&flat, t_next, &mut traj);
        }
    }
    Ok(traj)
}
