//! Distributed Nash equilibrium seeking for networked games whose player
//! dynamics carry time-varying disturbances and unmodeled coupling terms.
//!
//! The crate provides:
//!
//! - [`graph`]: weighted undirected communication topologies with
//!   time-windowed disruption;
//! - [`game`]: N-player games with analytic partial gradients, the builtin
//!   benchmark games, and an independent gradient-play Nash oracle;
//! - [`environment`]: the true plant (disturbances, unmodeled couplings,
//!   extended state) and the signum-gain advisor;
//! - [`seeker`]: the PI-based and RISE-based observer seeking strategies
//!   over a shared consensus estimation layer;
//! - [`sim`]: deterministic fixed-step closed-loop integration with
//!   trajectory recording and CSV export;
//! - [`analysis`]: pseudo-gradient structure checks, monotonicity
//!   estimation, and gain sweeps;
//! - [`preset`] / [`config`]: named benchmark scenarios and the JSON
//!   scenario schema.

pub mod analysis;
pub mod config;
pub mod environment;
pub mod game;
pub mod graph;
pub mod preset;
pub mod seeker;
pub mod sim;

pub use analysis::{
    build_r, check_diagonal_dominance, monotonicity_constant, pi_gain_sweep, PseudoGradientMatrix,
    SweepTable,
};
pub use config::ScenarioConfig;
pub use environment::{DisturbanceKind, DisturbanceSignal, Environment, UnmodeledTerm};
pub use game::{
    build_connectivity_game, build_nonquadratic_example, five_sensor_spec, solve_nash,
    ConnectivityGameSpec, Game,
};
pub use graph::{laplacian, CommGraph, Disruption};
pub use preset::{Preset, PRESET_NAMES};
pub use seeker::{
    consensus_derivative, control, gain_condition_report, pi_observer_derivative,
    rise_observer_derivative, EstimateTensor, GainReport, PiGains, RiseGains, SeekerGains,
    SeekerState,
};
pub use sim::{run, step, ultimate_bound, Scenario, SimError, Trajectory};

/// Strictly positive, finite, and comparable; the gain and step
/// validations all reject NaN and infinities through this predicate.
pub(crate) fn strictly_positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}
