//! JSON scenario schema and conversions into runnable [`Scenario`]s.
//!
//! Files use 1-based player indices; everything internal is 0-based.
//! Scalar gain fields accept either a single number (applied uniformly) or
//! a per-player array; `theta_bar` accepts a number or a full matrix.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::{DisturbanceSignal, EnvError, Environment, UnmodeledTerm};
use crate::game::{
    build_connectivity_game, build_nonquadratic_example, ConnectivityGameSpec, Game, GameError,
};
use crate::graph::{CommGraph, Disruption, GraphError};
use crate::seeker::{PiGains, RiseGains, SeekerError, SeekerGains};
use crate::sim::{Scenario, SimError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid JSON at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("override path '{0}' does not resolve")]
    BadOverride(String),
    #[error("override '{0}' must look like KEY=VALUE")]
    MalformedOverride(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Seeker(#[from] SeekerError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn parse_err(e: serde_json::Error) -> ConfigError {
    if e.is_io() || e.line() == 0 {
        ConfigError::Schema(e.to_string())
    } else {
        ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrVec {
    Scalar(f64),
    PerPlayer(Vec<f64>),
}

impl ScalarOrVec {
    fn expand(&self, n: usize, name: &str) -> Result<Vec<f64>, ConfigError> {
        match self {
            ScalarOrVec::Scalar(v) => Ok(vec![*v; n]),
            ScalarOrVec::PerPlayer(v) if v.len() == n => Ok(v.clone()),
            ScalarOrVec::PerPlayer(v) => Err(ConfigError::Schema(format!(
                "{name} has {} entries, expected {n}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrMatrix {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
}

impl ScalarOrMatrix {
    fn expand(&self, n: usize, name: &str) -> Result<DMatrix<f64>, ConfigError> {
        match self {
            ScalarOrMatrix::Scalar(v) => Ok(DMatrix::from_element(n, n, *v)),
            ScalarOrMatrix::Matrix(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(ConfigError::Schema(format!("{name} must be {n}x{n}")));
                }
                Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
            }
        }
    }
}

fn default_theta_bar() -> ScalarOrMatrix {
    ScalarOrMatrix::Scalar(1.0)
}

/// Game description: either an explicit connectivity game or a named
/// builtin (there is no general objective-expression parser).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GameConfig {
    Connectivity {
        /// Per-player n x n matrices.
        r_ii: Vec<Vec<Vec<f64>>>,
        /// Per-player n-vectors.
        r_i: Vec<Vec<f64>>,
        b_i: Vec<f64>,
        /// `[i, j, c_ij]` with 1-based player indices.
        couplings: Vec<(usize, usize, f64)>,
    },
    /// The five-sensor benchmark game.
    FiveSensor,
    /// The five-sensor game with the exponential first-player objective.
    NonquadraticExample,
}

impl GameConfig {
    pub fn build(&self) -> Result<Game, ConfigError> {
        match self {
            GameConfig::Connectivity {
                r_ii,
                r_i,
                b_i,
                couplings,
            } => {
                let n = r_ii.len();
                if n == 0 {
                    return Err(ConfigError::Schema("game needs at least one player".into()));
                }
                let dim = r_ii[0].len();
                let mut blocks = Vec::with_capacity(n);
                for rows in r_ii {
                    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                        return Err(ConfigError::Schema(format!(
                            "r_ii blocks must be {dim}x{dim}"
                        )));
                    }
                    blocks.push(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]));
                }
                let vecs = r_i
                    .iter()
                    .map(|v| DVector::from_vec(v.clone()))
                    .collect::<Vec<_>>();
                let mut coupling = DMatrix::zeros(n, n);
                for &(i, j, c) in couplings {
                    if i == 0 || j == 0 || i > n || j > n {
                        return Err(ConfigError::Schema(format!(
                            "coupling ({i},{j}) out of range for {n} players (1-based)"
                        )));
                    }
                    coupling[(i - 1, j - 1)] = c;
                }
                let spec = ConnectivityGameSpec::new(blocks, vecs, b_i.clone(), coupling)?;
                Ok(build_connectivity_game(&spec)?)
            }
            GameConfig::FiveSensor => {
                Ok(build_connectivity_game(&crate::game::five_sensor_spec())?)
            }
            GameConfig::NonquadraticExample => Ok(build_nonquadratic_example()),
        }
    }

    /// The connectivity spec, when this config describes one.
    pub fn connectivity_spec(&self) -> Result<Option<ConnectivityGameSpec>, ConfigError> {
        match self {
            GameConfig::Connectivity {
                r_ii,
                r_i,
                b_i,
                couplings,
            } => {
                let n = r_ii.len();
                let dim = r_ii.first().map(|b| b.len()).unwrap_or(0);
                let blocks = r_ii
                    .iter()
                    .map(|rows| DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
                    .collect();
                let vecs = r_i.iter().map(|v| DVector::from_vec(v.clone())).collect();
                let mut coupling = DMatrix::zeros(n, n);
                for &(i, j, c) in couplings {
                    coupling[(i - 1, j - 1)] = c;
                }
                Ok(Some(ConnectivityGameSpec::new(
                    blocks,
                    vecs,
                    b_i.clone(),
                    coupling,
                )?))
            }
            GameConfig::FiveSensor => Ok(Some(crate::game::five_sensor_spec())),
            GameConfig::NonquadraticExample => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DisturbanceConfig {
    Zero,
    Constant { level: f64 },
    Sinusoid { amplitude: f64, frequency: f64 },
}

impl DisturbanceConfig {
    fn build(&self, dim: usize) -> DisturbanceSignal {
        match *self {
            DisturbanceConfig::Zero => DisturbanceSignal::zero(dim),
            DisturbanceConfig::Constant { level } => DisturbanceSignal::constant(level, dim),
            DisturbanceConfig::Sinusoid {
                amplitude,
                frequency,
            } => DisturbanceSignal::sinusoid(amplitude, frequency, dim),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum UnmodeledConfig {
    Zero,
    /// The coupled-sensor builtin family; the player is implied by the
    /// entry's position in the per-player list.
    SensorCoupling,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    /// 0 or 1, the plant switch.
    pub varsigma: u8,
    pub disturbances: Vec<DisturbanceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unmodeled: Option<Vec<UnmodeledConfig>>,
}

impl EnvironmentConfig {
    pub fn build(&self, dim: usize) -> Result<Environment, ConfigError> {
        if self.varsigma > 1 {
            return Err(ConfigError::Schema(format!(
                "varsigma must be 0 or 1, got {}",
                self.varsigma
            )));
        }
        let n = self.disturbances.len();
        let disturbances = self.disturbances.iter().map(|d| d.build(dim)).collect();
        let unmodeled = match &self.unmodeled {
            None => vec![UnmodeledTerm::Zero; n],
            Some(list) => {
                if list.len() != n {
                    return Err(ConfigError::Schema(format!(
                        "unmodeled has {} entries, disturbances {}",
                        list.len(),
                        n
                    )));
                }
                list.iter()
                    .enumerate()
                    .map(|(i, u)| match u {
                        UnmodeledConfig::Zero => UnmodeledTerm::Zero,
                        UnmodeledConfig::SensorCoupling => {
                            UnmodeledTerm::SensorCoupling { player: i }
                        }
                    })
                    .collect()
            }
        };
        Ok(Environment::new(
            self.varsigma == 1,
            disturbances,
            unmodeled,
        )?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    pub n: usize,
    /// `[i, j, weight]` with 1-based player indices.
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub disruptions: Vec<(f64, f64, f64)>,
}

impl GraphConfig {
    pub fn build(&self) -> Result<CommGraph, ConfigError> {
        let mut edges = Vec::with_capacity(self.edges.len());
        for &(i, j, w) in &self.edges {
            if i == 0 || j == 0 {
                return Err(ConfigError::Schema(
                    "edge indices are 1-based; got index 0".into(),
                ));
            }
            edges.push((i - 1, j - 1, w));
        }
        let disruptions = self
            .disruptions
            .iter()
            .map(|&(start, end, scale)| Disruption::new(start, end, scale))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CommGraph::from_edges(self.n, &edges, disruptions)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeekerKind {
    Pi,
    Rise,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiGainsConfig {
    pub sigma: f64,
    pub k1: ScalarOrVec,
    pub k2: ScalarOrVec,
    pub theta: f64,
    #[serde(default = "default_theta_bar")]
    pub theta_bar: ScalarOrMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiseGainsConfig {
    pub ks: ScalarOrVec,
    pub c: ScalarOrVec,
    pub beta: ScalarOrVec,
    pub theta: f64,
    #[serde(default = "default_theta_bar")]
    pub theta_bar: ScalarOrMatrix,
    #[serde(default)]
    pub sgn_smoothing: f64,
}

/// Top-level scenario schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub game: GameConfig,
    pub environment: EnvironmentConfig,
    pub graph: GraphConfig,
    pub seeker: SeekerKind,
    pub gains: serde_json::Value,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub record_estimates: bool,
}

fn default_record_every() -> usize {
    1
}

impl ScenarioConfig {
    pub fn parse_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(parse_err)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_json(&text)
    }

    /// Parses the gain object according to the seeker kind.
    pub fn gains(&self, n_players: usize) -> Result<SeekerGains, ConfigError> {
        match self.seeker {
            SeekerKind::Pi => {
                let g: PiGainsConfig =
                    serde_json::from_value(self.gains.clone()).map_err(parse_err)?;
                Ok(SeekerGains::Pi(PiGains {
                    sigma: g.sigma,
                    k1: g.k1.expand(n_players, "k1")?,
                    k2: g.k2.expand(n_players, "k2")?,
                    theta: g.theta,
                    theta_bar: g.theta_bar.expand(n_players, "theta_bar")?,
                }))
            }
            SeekerKind::Rise => {
                let g: RiseGainsConfig =
                    serde_json::from_value(self.gains.clone()).map_err(parse_err)?;
                Ok(SeekerGains::Rise(RiseGains {
                    ks: g.ks.expand(n_players, "ks")?,
                    c: g.c.expand(n_players, "c")?,
                    beta: g.beta.expand(n_players, "beta")?,
                    theta: g.theta,
                    theta_bar: g.theta_bar.expand(n_players, "theta_bar")?,
                    sgn_smoothing: g.sgn_smoothing,
                }))
            }
        }
    }

    /// Builds and validates the runnable scenario.
    pub fn build(&self) -> Result<Scenario, ConfigError> {
        let game = self.game.build()?;
        let environment = self.environment.build(game.dim())?;
        let graph = self.graph.build()?;
        let gains = self.gains(game.n_players())?;
        let scenario = Scenario {
            game,
            environment,
            graph,
            gains,
            x0: DVector::from_vec(self.x0.clone()),
            t0: self.t0,
            t_end: self.t_end,
            dt: self.dt,
            record_every: self.record_every,
            record_estimates: self.record_estimates,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Applies dotted-path replacements like `gains.sigma=40` to a parsed JSON
/// document. Array elements are addressed by 0-based numeric segments. The
/// right-hand side is parsed as JSON when possible, else taken as a string.
pub fn apply_override(doc: &mut serde_json::Value, assignment: &str) -> Result<(), ConfigError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::MalformedOverride(assignment.to_string()))?;
    let value: serde_json::Value =
        serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let segments: Vec<&str> = path.split('.').collect();
    if segments.is_empty() {
        return Err(ConfigError::BadOverride(path.to_string()));
    }
    let mut cursor = doc;
    for (depth, segment) in segments.iter().enumerate() {
        let last = depth + 1 == segments.len();
        match cursor {
            serde_json::Value::Object(map) => {
                if last {
                    map.insert(segment.to_string(), value);
                    return Ok(());
                }
                cursor = map
                    .get_mut(*segment)
                    .ok_or_else(|| ConfigError::BadOverride(path.to_string()))?;
            }
            serde_json::Value::Array(items) => {
                let idx: usize = segment
                    .parse()
                    .map_err(|_| ConfigError::BadOverride(path.to_string()))?;
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| ConfigError::BadOverride(path.to_string()))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                cursor = slot;
            }
            _ => return Err(ConfigError::BadOverride(path.to_string())),
        }
    }
    Err(ConfigError::BadOverride(path.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_config() -> String {
        r#"{
            "game": {"type": "five_sensor"},
            "environment": {
                "varsigma": 0,
                "disturbances": [
                    {"type": "sinusoid", "amplitude": 1.0, "frequency": 1.0},
                    {"type": "sinusoid", "amplitude": 2.0, "frequency": 2.0},
                    {"type": "sinusoid", "amplitude": 3.0, "frequency": 3.0},
                    {"type": "sinusoid", "amplitude": 4.0, "frequency": 4.0},
                    {"type": "sinusoid", "amplitude": 5.0, "frequency": 5.0}
                ]
            },
            "graph": {
                "n": 5,
                "edges": [[1,2,1.0],[2,3,1.0],[3,4,1.0],[4,5,1.0],[5,1,1.0],[2,5,1.0]],
                "disruptions": []
            },
            "seeker": "pi",
            "gains": {"sigma": 40.0, "k1": 2.0, "k2": 4.0, "theta": 20.0},
            "x0": [-10.0, 2.0, -3.0, -8.0, -5.0, 6.0, 0.0, -8.0, -1.0, 10.0],
            "t_end": 0.01,
            "dt": 0.001
        }"#
        .to_string()
    }

    #[test]
    fn parses_and_builds_minimal_scenario() {
        let config = ScenarioConfig::parse_json(&minimal_config()).unwrap();
        let scenario = config.build().unwrap();
        assert_eq!(scenario.game.n_players(), 5);
        assert_eq!(scenario.x0.len(), 10);
        assert_eq!(scenario.record_every, 1);
        match &scenario.gains {
            SeekerGains::Pi(g) => {
                assert_eq!(g.k1, vec![2.0; 5]);
                assert_eq!(g.theta_bar[(0, 0)], 1.0);
            }
            _ => panic!("expected PI gains"),
        }
    }

    #[test]
    fn parse_error_reports_line_and_column() {
        let bad = "{\n  \"game\": [,]\n}";
        match ScenarioConfig::parse_json(bad) {
            Err(ConfigError::Parse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_schema_violations() {
        let mut doc: serde_json::Value = serde_json::from_str(&minimal_config()).unwrap();
        doc["graph"]["typo_field"] = serde_json::json!(1);
        let text = serde_json::to_string(&doc).unwrap();
        assert!(ScenarioConfig::parse_json(&text).is_err());
    }

    #[test]
    fn rise_gains_parse_with_defaults() {
        let mut doc: serde_json::Value = serde_json::from_str(&minimal_config()).unwrap();
        doc["seeker"] = serde_json::json!("rise");
        doc["gains"] = serde_json::json!({"ks": 40.0, "c": 40.0, "beta": 145.5, "theta": 20.0});
        let config: ScenarioConfig = serde_json::from_value(doc).unwrap();
        match config.build().unwrap().gains {
            SeekerGains::Rise(g) => {
                assert_eq!(g.beta, vec![145.5; 5]);
                assert_eq!(g.sgn_smoothing, 0.0);
            }
            _ => panic!("expected RISE gains"),
        }
    }

    #[test]
    fn override_paths() {
        let mut doc: serde_json::Value = serde_json::from_str(&minimal_config()).unwrap();
        apply_override(&mut doc, "gains.sigma=80").unwrap();
        apply_override(&mut doc, "x0.0=-1.5").unwrap();
        apply_override(&mut doc, "record_every=5").unwrap();
        assert_eq!(doc["gains"]["sigma"], serde_json::json!(80));
        assert_eq!(doc["x0"][0], serde_json::json!(-1.5));
        let config: ScenarioConfig = serde_json::from_value(doc).unwrap();
        let scenario = config.build().unwrap();
        assert_eq!(scenario.record_every, 5);
        assert_eq!(scenario.x0[0], -1.5);

        let mut doc2: serde_json::Value = serde_json::from_str(&minimal_config()).unwrap();
        assert!(matches!(
            apply_override(&mut doc2, "gains.nope.deep=1"),
            Err(ConfigError::BadOverride(_))
        ));
        assert!(matches!(
            apply_override(&mut doc2, "no_equals_sign"),
            Err(ConfigError::MalformedOverride(_))
        ));
    }

    #[test]
    fn explicit_connectivity_game_round_trips() {
        let text = r#"{
            "type": "connectivity",
            "r_ii": [[[2.0, 0.0], [0.0, 2.0]], [[4.0, 0.0], [0.0, 4.0]]],
            "r_i": [[1.0, 1.0], [2.0, 2.0]],
            "b_i": [1.0, 2.0],
            "couplings": [[1, 2, 1.0], [2, 1, 1.0]]
        }"#;
        let config: GameConfig = serde_json::from_str(text).unwrap();
        let game = config.build().unwrap();
        assert_eq!(game.n_players(), 2);
        assert_eq!(game.dim(), 2);
        let spec = config.connectivity_spec().unwrap().unwrap();
        assert_eq!(spec.physical_neighbors(0), vec![1]);
    }
}
