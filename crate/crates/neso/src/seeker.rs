//! Nash-seeking control strategies: the smooth PI-based observer strategy
//! and the RISE-based strategy, on top of a shared consensus layer that
//! lets every player maintain estimates of all actions from neighbor
//! information only.
//!
//! Both strategies apply the control `u_i = -df_i/dx_i(y_i) - zhat_i`,
//! evaluating the partial gradient at the player's own estimate row `y_i`
//! and compensating with the observed extended state. They differ in how
//! the observer pair `(xhat_i, zhat_i)` is driven: the PI observer uses
//! proportional/integral innovation gains `sigma k_1`, `sigma^2 k_2`
//! (practical convergence), the RISE observer adds a signed innovation term
//! `beta sgn(x_i - xhat_i)` (asymptotic convergence under bounded
//! disturbance derivatives).

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::environment::Environment;
use crate::game::{Game, GameError};
use crate::graph::CommGraph;

#[derive(Debug, Error)]
pub enum SeekerError {
    #[error("gain {name} must be strictly positive")]
    NonpositiveGain { name: &'static str },
    #[error("signum smoothing must be nonnegative, got {eps}")]
    NegativeSmoothing { eps: f64 },
    #[error("gain vector {name} has length {got}, expected {expected}")]
    GainCountMismatch {
        name: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("theta_bar must be {n}x{n}")]
    ThetaBarShape { n: usize },
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Gains of the PI-based strategy. Effective observer gains are
/// `sigma * k1[i]` and `sigma^2 * k2[i]`; effective consensus gains are
/// `theta * theta_bar[(i, j)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiGains {
    pub sigma: f64,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    pub theta: f64,
    pub theta_bar: DMatrix<f64>,
}

impl PiGains {
    /// Uniform per-player gains with `theta_bar = 1`.
    pub fn uniform(n_players: usize, sigma: f64, k1: f64, k2: f64, theta: f64) -> Self {
        Self {
            sigma,
            k1: vec![k1; n_players],
            k2: vec![k2; n_players],
            theta,
            theta_bar: DMatrix::from_element(n_players, n_players, 1.0),
        }
    }

    pub fn validate(&self, n_players: usize) -> Result<(), SeekerError> {
        check_scalar(self.sigma, "sigma")?;
        check_scalar(self.theta, "theta")?;
        check_vec(&self.k1, "k1", n_players)?;
        check_vec(&self.k2, "k2", n_players)?;
        check_theta_bar(&self.theta_bar, n_players)
    }

    /// Effective proportional innovation gain of player `i`.
    pub fn k1_bar(&self, i: usize) -> f64 {
        self.sigma * self.k1[i]
    }

    /// Effective integral innovation gain of player `i`.
    pub fn k2_bar(&self, i: usize) -> f64 {
        self.sigma * self.sigma * self.k2[i]
    }

    /// The effective consensus gain table `theta * theta_bar`.
    pub fn theta_table(&self) -> DMatrix<f64> {
        &self.theta_bar * self.theta
    }
}

/// Gains of the RISE-based strategy. `sgn_smoothing = 0` uses the exact
/// signum; a positive value replaces it by `tanh(arg / eps)`, a documented
/// deviation that trades exactness for integrability of the stiff loop.
#[derive(Debug, Clone, PartialEq)]
pub struct RiseGains {
    pub ks: Vec<f64>,
    pub c: Vec<f64>,
    pub beta: Vec<f64>,
    pub theta: f64,
    pub theta_bar: DMatrix<f64>,
    pub sgn_smoothing: f64,
}

impl RiseGains {
    pub fn uniform(n_players: usize, ks: f64, c: f64, beta: f64, theta: f64) -> Self {
        Self {
            ks: vec![ks; n_players],
            c: vec![c; n_players],
            beta: vec![beta; n_players],
            theta,
            theta_bar: DMatrix::from_element(n_players, n_players, 1.0),
            sgn_smoothing: 0.0,
        }
    }

    pub fn with_smoothing(mut self, eps: f64) -> Self {
        self.sgn_smoothing = eps;
        self
    }

    pub fn validate(&self, n_players: usize) -> Result<(), SeekerError> {
        check_scalar(self.theta, "theta")?;
        check_vec(&self.ks, "ks", n_players)?;
        check_vec(&self.c, "c", n_players)?;
        check_vec(&self.beta, "beta", n_players)?;
        if self.sgn_smoothing < 0.0 {
            return Err(SeekerError::NegativeSmoothing {
                eps: self.sgn_smoothing,
            });
        }
        check_theta_bar(&self.theta_bar, n_players)
    }

    pub fn theta_table(&self) -> DMatrix<f64> {
        &self.theta_bar * self.theta
    }
}

fn check_scalar(v: f64, name: &'static str) -> Result<(), SeekerError> {
    if !crate::strictly_positive(v) {
        return Err(SeekerError::NonpositiveGain { name });
    }
    Ok(())
}

fn check_vec(v: &[f64], name: &'static str, n: usize) -> Result<(), SeekerError> {
    if v.len() != n {
        return Err(SeekerError::GainCountMismatch {
            name,
            got: v.len(),
            expected: n,
        });
    }
    if v.iter().any(|&g| !crate::strictly_positive(g)) {
        return Err(SeekerError::NonpositiveGain { name });
    }
    Ok(())
}

fn check_theta_bar(tb: &DMatrix<f64>, n: usize) -> Result<(), SeekerError> {
    if tb.nrows() != n || tb.ncols() != n {
        return Err(SeekerError::ThetaBarShape { n });
    }
    if tb.iter().any(|&g| !crate::strictly_positive(g)) {
        return Err(SeekerError::NonpositiveGain { name: "theta_bar" });
    }
    Ok(())
}

/// Either strategy's gain set.
#[derive(Debug, Clone, PartialEq)]
pub enum SeekerGains {
    Pi(PiGains),
    Rise(RiseGains),
}

impl SeekerGains {
    pub fn theta_table(&self) -> DMatrix<f64> {
        match self {
            SeekerGains::Pi(g) => g.theta_table(),
            SeekerGains::Rise(g) => g.theta_table(),
        }
    }

    pub fn theta(&self) -> f64 {
        match self {
            SeekerGains::Pi(g) => g.theta,
            SeekerGains::Rise(g) => g.theta,
        }
    }

    pub fn validate(&self, n_players: usize) -> Result<(), SeekerError> {
        match self {
            SeekerGains::Pi(g) => g.validate(n_players),
            SeekerGains::Rise(g) => g.validate(n_players),
        }
    }

    pub fn is_rise(&self) -> bool {
        matches!(self, SeekerGains::Rise(_))
    }
}

/// The `N x N x n` estimate tensor: entry `(i, j)` is player `i`'s estimate
/// of player `j`'s action. Stored row-major so row `i` is exactly a joint
/// action vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateTensor {
    n_players: usize,
    dim: usize,
    data: DVector<f64>,
}

impl EstimateTensor {
    pub fn zeros(n_players: usize, dim: usize) -> Self {
        Self {
            n_players,
            dim,
            data: DVector::zeros(n_players * n_players * dim),
        }
    }

    pub fn from_flat(n_players: usize, dim: usize, data: DVector<f64>) -> Self {
        assert_eq!(data.len(), n_players * n_players * dim);
        Self {
            n_players,
            dim,
            data,
        }
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn flat(&self) -> &DVector<f64> {
        &self.data
    }

    pub fn flat_mut(&mut self) -> &mut DVector<f64> {
        &mut self.data
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n_players + j) * self.dim + k
    }

    /// Component `k` of `y_ij`.
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let idx = self.index(i, j, k);
        self.data[idx] = v;
    }

    /// Player `i`'s full estimate row `y_i` as a joint action vector.
    pub fn joint_estimate(&self, i: usize) -> DVector<f64> {
        let w = self.n_players * self.dim;
        DVector::from_column_slice(&self.data.as_slice()[i * w..(i + 1) * w])
    }
}

/// Per-player controller memory: the estimate tensor plus observer states.
#[derive(Debug, Clone, PartialEq)]
pub struct SeekerState {
    pub y: EstimateTensor,
    pub xhat: DVector<f64>,
    pub zhat: DVector<f64>,
}

impl SeekerState {
    /// Initialization rule: `xhat(0) = x(0)` (zero initial innovation),
    /// `zhat(0) = 0`, and `y_ij(0) = x_j(0)` where `j` is a nominal
    /// neighbor of `i` or `i` itself, else 0 (no non-local information).
    pub fn init(x0: &DVector<f64>, graph: &CommGraph, dim: usize) -> Self {
        let n = graph.n_players();
        let mut y = EstimateTensor::zeros(n, dim);
        for i in 0..n {
            for j in 0..n {
                if i == j || graph.is_neighbor(i, j) {
                    for k in 0..dim {
                        y.set(i, j, k, x0[j * dim + k]);
                    }
                }
            }
        }
        Self {
            y,
            xhat: x0.clone(),
            zhat: DVector::zeros(x0.len()),
        }
    }
}

/// Signum with `sgn(0) = 0`; `eps > 0` substitutes `tanh(v / eps)`.
#[inline]
pub fn signum_smoothed(v: f64, eps: f64) -> f64 {
    if eps > 0.0 {
        (v / eps).tanh()
    } else if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Control law of both strategies:
/// `u_i = -df_i/dx_i(y_i) - zhat_i`.
pub fn control(game: &Game, state: &SeekerState, i: usize) -> Result<DVector<f64>, SeekerError> {
    let yi = state.y.joint_estimate(i);
    let grad = game.partial_grad(i, &yi)?;
    let dim = game.dim();
    Ok(-grad - state.zhat.rows(i * dim, dim))
}

/// Stacked control vector over all players.
pub fn control_all(game: &Game, state: &SeekerState) -> Result<DVector<f64>, SeekerError> {
    let dim = game.dim();
    let mut u = DVector::zeros(game.joint_dim());
    for i in 0..game.n_players() {
        let ui = control(game, state, i)?;
        u.rows_mut(i * dim, dim).copy_from(&ui);
    }
    Ok(u)
}

/// Consensus estimation law, applied uniformly for all `(i, j)` including
/// `i = j`:
/// `dy_ij = -theta_ij * (sum_k a_ik (y_ij - y_kj) + a_ij (y_ij - x_j))`
/// with `a` the effective (possibly disrupted) weights. On the manifold
/// `y_ij = x_j` for all pairs the derivative vanishes identically.
pub fn consensus_derivative(
    y: &EstimateTensor,
    x: &DVector<f64>,
    w_eff: &DMatrix<f64>,
    theta_table: &DMatrix<f64>,
) -> EstimateTensor {
    let n = y.n_players();
    let dim = y.dim();
    let mut out = EstimateTensor::zeros(n, dim);
    for i in 0..n {
        for j in 0..n {
            let anchor = w_eff[(i, j)];
            let rate = theta_table[(i, j)];
            for k in 0..dim {
                let yij = y.get(i, j, k);
                let mut acc = anchor * (yij - x[j * dim + k]);
                for m in 0..n {
                    let w = w_eff[(i, m)];
                    if w != 0.0 {
                        acc += w * (yij - y.get(m, j, k));
                    }
                }
                out.set(i, j, k, -rate * acc);
            }
        }
    }
    out
}

/// PI observer update:
/// `dxhat_i = u_i + zhat_i + sigma k1_i (x_i - xhat_i)`,
/// `dzhat_i = sigma^2 k2_i (x_i - xhat_i)`.
pub fn pi_observer_derivative(
    state: &SeekerState,
    x: &DVector<f64>,
    u: &DVector<f64>,
    gains: &PiGains,
) -> (DVector<f64>, DVector<f64>) {
    let n = gains.k1.len();
    let dim = x.len() / n;
    let mut dxhat = u + &state.zhat;
    let mut dzhat = DVector::zeros(x.len());
    for i in 0..n {
        for k in 0..dim {
            let idx = i * dim + k;
            let innovation = x[idx] - state.xhat[idx];
            dxhat[idx] += gains.k1_bar(i) * innovation;
            dzhat[idx] = gains.k2_bar(i) * innovation;
        }
    }
    (dxhat, dzhat)
}

/// RISE observer update:
/// `dxhat_i = u_i + zhat_i + (ks_i + c_i)(x_i - xhat_i)`,
/// `dzhat_i = ks_i c_i (x_i - xhat_i) + beta_i sgn(x_i - xhat_i)`,
/// with the signum applied componentwise.
pub fn rise_observer_derivative(
    state: &SeekerState,
    x: &DVector<f64>,
    u: &DVector<f64>,
    gains: &RiseGains,
) -> (DVector<f64>, DVector<f64>) {
    let n = gains.ks.len();
    let dim = x.len() / n;
    let mut dxhat = u + &state.zhat;
    let mut dzhat = DVector::zeros(x.len());
    for i in 0..n {
        for k in 0..dim {
            let idx = i * dim + k;
            let innovation = x[idx] - state.xhat[idx];
            dxhat[idx] += (gains.ks[i] + gains.c[i]) * innovation;
            dzhat[idx] = gains.ks[i] * gains.c[i] * innovation
                + gains.beta[i] * signum_smoothed(innovation, gains.sgn_smoothing);
        }
    }
    (dxhat, dzhat)
}

/// Structured report on whether a gain set satisfies the conditions the
/// convergence results ask for, to the extent they are computable.
#[derive(Debug, Clone, Serialize)]
pub struct GainReport {
    pub strategy: &'static str,
    pub gains_positive: bool,
    /// Declared strong-monotonicity constant of the game.
    pub monotonicity_m: f64,
    pub m_positive: bool,
    /// RISE only: the advisor lower bound on the signum gains, when the
    /// disturbance metadata allows computing it.
    pub beta_bound: Option<f64>,
    /// RISE only: per-player check `beta_i >= beta_bound`.
    pub beta_sufficient: Option<Vec<bool>>,
    /// RISE only: nonzero signum smoothing in effect (a labeled deviation
    /// from the exact signum).
    pub sgn_smoothing: Option<f64>,
    pub notes: Vec<String>,
}

impl GainReport {
    pub fn all_satisfied(&self) -> bool {
        self.gains_positive
            && self.m_positive
            && self
                .beta_sufficient
                .as_ref()
                .map(|v| v.iter().all(|&b| b))
                .unwrap_or(true)
    }
}

/// Reports which convergence conditions a gain set meets. The
/// consensus and observer scale gains (`theta*`, `sigma*`, `ks^r`, `c^r`)
/// are existence constants without computable values, so they are reported
/// as advisory notes; the signum gain bound for RISE is computable from the
/// disturbance metadata and is checked per player.
pub fn gain_condition_report(game: &Game, env: &Environment, gains: &SeekerGains) -> GainReport {
    let m = game.monotonicity();
    let mut notes = Vec::new();
    match gains {
        SeekerGains::Pi(g) => {
            let positive = g.validate(game.n_players()).is_ok();
            notes.push(
                "theta* and sigma* are existence constants; tune empirically (the benchmark \
                 presets pass the acceptance suite with sigma=40, k1=2, k2=4, theta=20)"
                    .to_string(),
            );
            GainReport {
                strategy: "pi",
                gains_positive: positive,
                monotonicity_m: m,
                m_positive: m > 0.0,
                beta_bound: None,
                beta_sufficient: None,
                sgn_smoothing: None,
                notes,
            }
        }
        SeekerGains::Rise(g) => {
            let positive = g.validate(game.n_players()).is_ok();
            let bound = env.beta_lower_bound(&g.c).ok();
            let sufficient = bound.map(|b| g.beta.iter().map(|&bi| bi >= b).collect());
            if bound.is_none() {
                notes.push(
                    "beta bound unavailable: disturbance metadata lacks a second-derivative bound"
                        .to_string(),
                );
            }
            if env.varsigma() {
                notes.push(
                    "beta bound covers the disturbance part only; the unmodeled coupling is \
                     handled by ks and c, tuned empirically"
                        .to_string(),
                );
            }
            if g.sgn_smoothing > 0.0 {
                notes.push(format!(
                    "signum smoothed by tanh(arg/{:e}): deviation from the exact signum for \
                     stiff integration",
                    g.sgn_smoothing
                ));
            }
            notes.push(
                "ks^r and c^r are existence constants; tune empirically (the benchmark presets \
                 pass the acceptance suite with ks=40, c=40, theta=20, beta = 1.2x the bound)"
                    .to_string(),
            );
            GainReport {
                strategy: "rise",
                gains_positive: positive,
                monotonicity_m: m,
                m_positive: m > 0.0,
                beta_bound: bound,
                beta_sufficient: sufficient,
                sgn_smoothing: (g.sgn_smoothing > 0.0).then_some(g.sgn_smoothing),
                notes,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::DisturbanceSignal;
    use crate::environment::UnmodeledTerm;
    use crate::game::{build_connectivity_game, five_sensor_spec};
    use crate::graph::CommGraph;
    use approx::assert_relative_eq;

    fn ring_chord() -> CommGraph {
        CommGraph::from_edges(
            5,
            &[
                (0, 1, 1.0),
                (1, 2, 1.0),
                (2, 3, 1.0),
                (3, 4, 1.0),
                (4, 0, 1.0),
                (1, 4, 1.0),
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn control_vanishes_at_equilibrium_with_zero_observer() {
        let game = build_connectivity_game(&five_sensor_spec()).unwrap();
        let graph = ring_chord();
        let xstar = DVector::from_element(10, -0.5);
        let mut state = SeekerState::init(&xstar, &graph, 2);
        // seed every estimate at the equilibrium
        for i in 0..5 {
            for j in 0..5 {
                for k in 0..2 {
                    state.y.set(i, j, k, -0.5);
                }
            }
        }
        for i in 0..5 {
            assert!(control(&game, &state, i).unwrap().amax() < 1e-14);
        }
    }

    #[test]
    fn control_compensates_observed_extended_state() {
        // from the partial gradient example: player 5 at zero estimates with
        // zhat = (1,1) gives u = -(5,5) - (1,1)
        let game = build_connectivity_game(&five_sensor_spec()).unwrap();
        let graph = ring_chord();
        let mut state = SeekerState::init(&DVector::zeros(10), &graph, 2);
        state.zhat[8] = 1.0;
        state.zhat[9] = 1.0;
        let u = control(&game, &state, 4).unwrap();
        assert_eq!(u, DVector::from_vec(vec![-6.0, -6.0]));
    }

    #[test]
    fn perfect_observation_reduces_to_gradient_play() {
        // with y_i = x and zhat = z the closed loop is dx = -pseudo_gradient(x)
        let game = build_connectivity_game(&five_sensor_spec()).unwrap();
        let graph = ring_chord();
        let x = DVector::from_fn(10, |k, _| 0.1 * k as f64 - 0.7);
        let z = DVector::from_fn(10, |k, _| (k as f64).sin());
        let mut state = SeekerState::init(&x, &graph, 2);
        state.zhat = z.clone();
        for i in 0..5 {
            for j in 0..5 {
                for k in 0..2 {
                    state.y.set(i, j, k, x[j * 2 + k]);
                }
            }
        }
        let u = control_all(&game, &state).unwrap();
        let dx = &u + &z; // plant with true z
        assert!((dx + game.pseudo_gradient(&x).unwrap()).amax() < 1e-13);
    }

    #[test]
    fn consensus_vanishes_on_manifold() {
        let graph = ring_chord();
        let x = DVector::from_fn(10, |k, _| k as f64);
        let mut y = EstimateTensor::zeros(5, 2);
        for i in 0..5 {
            for j in 0..5 {
                for k in 0..2 {
                    y.set(i, j, k, x[j * 2 + k]);
                }
            }
        }
        let theta = DMatrix::from_element(5, 5, 20.0);
        let dy = consensus_derivative(&y, &x, graph.nominal_weights(), &theta);
        assert_eq!(dy.flat().amax(), 0.0);
    }

    #[test]
    fn consensus_frozen_under_total_disruption() {
        let x = DVector::from_fn(10, |k, _| k as f64);
        let y = EstimateTensor::from_flat(5, 2, DVector::from_fn(50, |k, _| (k as f64).cos()));
        let theta = DMatrix::from_element(5, 5, 20.0);
        let dy = consensus_derivative(&y, &x, &DMatrix::zeros(5, 5), &theta);
        assert_eq!(dy.flat().amax(), 0.0);
    }

    #[test]
    fn consensus_two_player_hand_value() {
        // 2 players, a12 = 1, unit gains, y_12 = 1, y_22 = x_2 = 0:
        // dy_12 = -(1*(1-0) + 1*(1-0)) = -2
        let graph = CommGraph::from_edges(2, &[(0, 1, 1.0)], vec![]).unwrap();
        let mut y = EstimateTensor::zeros(2, 1);
        y.set(0, 1, 0, 1.0);
        let x = DVector::zeros(2);
        let theta = DMatrix::from_element(2, 2, 1.0);
        let dy = consensus_derivative(&y, &x, graph.nominal_weights(), &theta);
        assert_relative_eq!(dy.get(0, 1, 0), -2.0);
    }

    #[test]
    fn pi_observer_zero_innovation() {
        let x = DVector::from_fn(4, |k, _| k as f64);
        let graph = CommGraph::from_edges(2, &[(0, 1, 1.0)], vec![]).unwrap();
        let mut state = SeekerState::init(&x, &graph, 2);
        state.zhat = DVector::from_element(4, 0.7);
        let u = DVector::from_element(4, 2.0);
        let gains = PiGains::uniform(2, 10.0, 2.0, 1.0, 20.0);
        let (dxhat, dzhat) = pi_observer_derivative(&state, &x, &u, &gains);
        assert_eq!(dzhat, DVector::zeros(4));
        assert_eq!(dxhat, &u + &state.zhat);
    }

    #[test]
    fn pi_observer_sigma_scaling() {
        // doubling sigma quadruples the zhat derivative for the same innovation
        let graph = CommGraph::from_edges(2, &[(0, 1, 1.0)], vec![]).unwrap();
        let x = DVector::from_element(4, 1.0);
        let state = SeekerState::init(&DVector::zeros(4), &graph, 2);
        let u = DVector::zeros(4);
        let g1 = PiGains::uniform(2, 10.0, 2.0, 1.0, 20.0);
        let g2 = PiGains::uniform(2, 20.0, 2.0, 1.0, 20.0);
        let (_, dz1) = pi_observer_derivative(&state, &x, &u, &g1);
        let (_, dz2) = pi_observer_derivative(&state, &x, &u, &g2);
        assert_eq!(dz2, dz1 * 4.0);
    }

    #[test]
    fn rise_observer_hand_values() {
        let graph = CommGraph::from_edges(2, &[(0, 1, 1.0)], vec![]).unwrap();
        // single-player-style check on player 0: ks = c = 1, beta = 2,
        // zeta_1 = 0.5 -> dzhat = 0.5 + 2
        let x = DVector::from_vec(vec![0.5, 0.0]);
        let state = SeekerState::init(&DVector::zeros(2), &graph, 1);
        let gains = RiseGains::uniform(2, 1.0, 1.0, 2.0, 20.0);
        let (_, dzhat) = rise_observer_derivative(&state, &x, &DVector::zeros(2), &gains);
        assert_relative_eq!(dzhat[0], 2.5);
        assert_relative_eq!(dzhat[1], 0.0, epsilon = 0.0); // sgn(0) = 0

        // positive innovation everywhere saturates the signum at +1
        let xp = DVector::from_vec(vec![0.25, 0.125]);
        let (_, dzp) = rise_observer_derivative(&state, &xp, &DVector::zeros(2), &gains);
        assert_relative_eq!(dzp[0], 0.25 + 2.0);
        assert_relative_eq!(dzp[1], 0.125 + 2.0);
    }

    #[test]
    fn rise_zero_innovation_keeps_zhat() {
        let graph = CommGraph::from_edges(2, &[(0, 1, 1.0)], vec![]).unwrap();
        let x = DVector::from_vec(vec![1.0, -2.0]);
        let mut state = SeekerState::init(&x, &graph, 1);
        state.zhat = DVector::from_vec(vec![0.3, 0.4]);
        let u = DVector::from_vec(vec![5.0, 6.0]);
        let gains = RiseGains::uniform(2, 1.0, 1.0, 2.0, 20.0);
        let (dxhat, dzhat) = rise_observer_derivative(&state, &x, &u, &gains);
        assert_eq!(dzhat, DVector::zeros(2));
        assert_eq!(dxhat, &u + &state.zhat);
    }

    #[test]
    fn smoothed_signum_properties() {
        assert_eq!(signum_smoothed(0.0, 0.0), 0.0);
        assert_eq!(signum_smoothed(3.0, 0.0), 1.0);
        assert_eq!(signum_smoothed(-0.1, 0.0), -1.0);
        assert!(signum_smoothed(1e-3, 1e-3) < 1.0);
        assert_relative_eq!(signum_smoothed(1e-3, 1e-3), (1.0f64).tanh());
    }

    #[test]
    fn state_init_seeds_neighbors_and_self() {
        let graph = ring_chord();
        let x0 = DVector::from_fn(10, |k, _| k as f64 + 1.0);
        let state = SeekerState::init(&x0, &graph, 2);
        assert_eq!(state.xhat, x0);
        assert_eq!(state.zhat, DVector::zeros(10));
        // player 0's neighbors are 1 and 4; players 2 and 3 start at zero
        for k in 0..2 {
            assert_eq!(state.y.get(0, 0, k), x0[k]);
            assert_eq!(state.y.get(0, 1, k), x0[2 + k]);
            assert_eq!(state.y.get(0, 4, k), x0[8 + k]);
            assert_eq!(state.y.get(0, 2, k), 0.0);
            assert_eq!(state.y.get(0, 3, k), 0.0);
        }
    }

    #[test]
    fn gain_report_flags_insufficient_beta() {
        let game = build_connectivity_game(&five_sensor_spec()).unwrap();
        let env = Environment::new(
            false,
            (1..=5)
                .map(|i| DisturbanceSignal::sinusoid(i as f64, i as f64, 2))
                .collect(),
            vec![UnmodeledTerm::Zero; 5],
        )
        .unwrap();
        // bound with uniform c = 10: 110 + 450/10 = 155
        let low = SeekerGains::Rise(RiseGains::uniform(5, 10.0, 10.0, 100.0, 20.0));
        let report = gain_condition_report(&game, &env, &low);
        assert_eq!(report.beta_bound, Some(155.0));
        assert!(!report.all_satisfied());

        let high = SeekerGains::Rise(RiseGains::uniform(5, 10.0, 10.0, 186.0, 20.0));
        assert!(gain_condition_report(&game, &env, &high).all_satisfied());
    }

    #[test]
    fn gain_report_zero_disturbance_any_beta_passes() {
        let game = build_connectivity_game(&five_sensor_spec()).unwrap();
        let env = Environment::quiet(5, 2);
        let gains = SeekerGains::Rise(RiseGains::uniform(5, 1.0, 1.0, 1e-6, 1.0));
        let report = gain_condition_report(&game, &env, &gains);
        assert_eq!(report.beta_bound, Some(0.0));
        assert!(report.all_satisfied());
    }

    #[test]
    fn gain_report_pi_is_advisory() {
        let game = build_connectivity_game(&five_sensor_spec()).unwrap();
        let env = Environment::quiet(5, 2);
        let gains = SeekerGains::Pi(PiGains::uniform(5, 10.0, 2.0, 1.0, 20.0));
        let report = gain_condition_report(&game, &env, &gains);
        assert!(report.gains_positive && report.m_positive);
        assert!(report.beta_bound.is_none());
        assert!(report.notes.iter().any(|n| n.contains("tune empirically")));
    }

    #[test]
    fn gain_validation_rejects_nonpositive() {
        assert!(PiGains::uniform(3, 0.0, 2.0, 1.0, 20.0)
            .validate(3)
            .is_err());
        assert!(PiGains::uniform(3, 1.0, 2.0, 1.0, 20.0).validate(3).is_ok());
        assert!(RiseGains::uniform(3, 1.0, -1.0, 2.0, 20.0)
            .validate(3)
            .is_err());
        let mut g = RiseGains::uniform(3, 1.0, 1.0, 2.0, 20.0);
        g.sgn_smoothing = -0.5;
        assert!(matches!(
            g.validate(3),
            Err(SeekerError::NegativeSmoothing { .. })
        ));
    }
}
