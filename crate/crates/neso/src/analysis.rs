//! Post-hoc verification utilities: structure checks on the connectivity
//! game's pseudo-gradient matrix, monotonicity-constant estimation, and
//! gain sweeps that probe how the ultimate bound responds to tuning.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::game::{ConnectivityGameSpec, Game, GameError};
use crate::seeker::SeekerGains;
use crate::sim::{run, ultimate_bound, Scenario, SimError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("sweep base scenario must use the PI strategy")]
    NotPi,
    #[error("sweep base scenario must have the unmodeled switch off")]
    UnmodeledActive,
    #[error("sweep level lists must be nonempty")]
    EmptyLevels,
    #[error("sample box must satisfy lo < hi and samples >= 1")]
    BadBox,
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// The constant Jacobian of a connectivity game's pseudo-gradient, block
/// structured with diagonal blocks `2 r_ii + 2 sum_j c_ij I` and
/// off-diagonal blocks `-2 c_ij I`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoGradientMatrix {
    matrix: DMatrix<f64>,
}

impl PseudoGradientMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Assembles the pseudo-gradient matrix of a connectivity game.
pub fn build_r(spec: &ConnectivityGameSpec) -> PseudoGradientMatrix {
    PseudoGradientMatrix {
        matrix: spec.pseudo_gradient_jacobian(),
    }
}

/// Row-wise strict diagonal dominance report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceReport {
    /// Every row satisfies `|R_kk| > sum_{l != k} |R_kl|`.
    pub dominant: bool,
    /// Smallest row slack `|R_kk| - sum_{l != k} |R_kl|`.
    pub margin: f64,
    /// All diagonal entries are positive.
    pub diagonal_positive: bool,
}

/// Checks strict diagonal dominance of the pseudo-gradient matrix, the
/// structural property that certifies it through Gershgorin discs.
pub fn check_diagonal_dominance(r: &PseudoGradientMatrix) -> DominanceReport {
    let m = &r.matrix;
    let n = m.nrows();
    let mut margin = f64::INFINITY;
    let mut diagonal_positive = true;
    for k in 0..n {
        let off: f64 = (0..n).filter(|&l| l != k).map(|l| m[(k, l)].abs()).sum();
        margin = margin.min(m[(k, k)].abs() - off);
        diagonal_positive &= m[(k, k)] > 0.0;
    }
    DominanceReport {
        dominant: margin > 0.0,
        margin,
        diagonal_positive,
    }
}

/// Result of [`monotonicity_constant`]: `exact` distinguishes the
/// eigenvalue computation (affine pseudo-gradient) from a sampled lower
/// estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityEstimate {
    pub value: f64,
    pub exact: bool,
}

/// Estimates the strong-monotonicity constant of a game's pseudo-gradient
/// on the box `[lo, hi]^{N n}`.
///
/// If three random point pairs pass a linearity test the map is treated as
/// affine and the exact `lambda_min((M + M') / 2)` is returned; otherwise
/// the minimum sampled quotient `(x - z)'(Y(x) - Y(z)) / ||x - z||^2` over
/// `samples` pairs is reported as an estimate. A nonpositive value means
/// the game fails the strong monotonicity assumption on the box.
pub fn monotonicity_constant(
    game: &Game,
    bounds: (f64, f64),
    samples: usize,
) -> Result<MonotonicityEstimate, AnalysisError> {
    let (lo, hi) = bounds;
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) || samples == 0 {
        return Err(AnalysisError::BadBox);
    }
    let dim = game.joint_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d6f6e6f);
    let draw = |rng: &mut ChaCha8Rng| DVector::from_fn(dim, |_, _| rng.gen_range(lo..hi));

    let mut affine = true;
    for _ in 0..3 {
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let mid = (&a + &b) * 0.5;
        let ga = game.pseudo_gradient(&a)?;
        let gb = game.pseudo_gradient(&b)?;
        let gm = game.pseudo_gradient(&mid)?;
        let residual = (&gm - (&ga + &gb) * 0.5).amax();
        let scale = ga.amax().max(gb.amax()).max(1.0);
        if residual > 1e-10 * scale {
            affine = false;
            break;
        }
    }

    if affine {
        // columns of the constant Jacobian from unit probes
        let g0 = game.pseudo_gradient(&DVector::zeros(dim))?;
        let mut jac = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            let mut e = DVector::zeros(dim);
            e[k] = 1.0;
            let col = game.pseudo_gradient(&e)? - &g0;
            jac.set_column(k, &col);
        }
        return Ok(MonotonicityEstimate {
            value: crate::game::affine_monotonicity(&jac),
            exact: true,
        });
    }

    let mut min_quot = f64::INFINITY;
    for _ in 0..samples {
        let x = draw(&mut rng);
        let z = draw(&mut rng);
        let dx = &x - &z;
        let norm_sq = dx.norm_squared();
        if norm_sq < 1e-12 {
            continue;
        }
        let dg = game.pseudo_gradient(&x)? - game.pseudo_gradient(&z)?;
        min_quot = min_quot.min(dx.dot(&dg) / norm_sq);
    }
    Ok(MonotonicityEstimate {
        value: min_quot,
        exact: false,
    })
}

/// One sweep entry; `ultimate_bound` is absent when the run diverged.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sigma: f64,
    pub theta: f64,
    pub ultimate_bound: Option<f64>,
    pub diverged: bool,
}

/// Sweep results ordered by input index (sigma-major).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Tail window the bounds were evaluated on.
    pub window: (f64, f64),
}

impl SweepTable {
    /// CSV export: `sigma,theta,ultimate_bound,diverged`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "sigma,theta,ultimate_bound,diverged")?;
        for row in &self.rows {
            let bound = row
                .ultimate_bound
                .map(|b| format!("{b:.16e}"))
                .unwrap_or_else(|| "nan".to_string());
            writeln!(
                w,
                "{:.16e},{:.16e},{},{}",
                row.sigma, row.theta, bound, row.diverged
            )?;
        }
        Ok(())
    }

    /// The bounds column, in row order.
    pub fn bounds(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.ultimate_bound).collect()
    }
}

/// Tail window start as a fraction of the horizon; the transient end time
/// is an existence statement, so the tail is a fixed fraction.
pub const TAIL_FRACTION: f64 = 0.75;

/// Tail window `[t0 + 0.75 (t_end - t0), t_end]` of a scenario.
pub fn tail_window(scenario: &Scenario) -> (f64, f64) {
    (
        scenario.t0 + TAIL_FRACTION * (scenario.t_end - scenario.t0),
        scenario.t_end,
    )
}

/// Runs the base PI scenario at every `(sigma, theta)` pair and reports the
/// ultimate bound over the tail window. Divergence of an entry is recorded
/// in its row rather than failing the sweep. Entries run concurrently; the
/// table order is deterministic (sigma-major input order).
pub fn pi_gain_sweep(
    base: &Scenario,
    sigma_levels: &[f64],
    theta_levels: &[f64],
) -> Result<SweepTable, AnalysisError> {
    let SeekerGains::Pi(pi) = &base.gains else {
        return Err(AnalysisError::NotPi);
    };
    if base.environment.varsigma() {
        return Err(AnalysisError::UnmodeledActive);
    }
    if sigma_levels.is_empty() || theta_levels.is_empty() {
        return Err(AnalysisError::EmptyLevels);
    }
    let window = tail_window(base);
    let combos: Vec<(f64, f64)> = sigma_levels
        .iter()
        .flat_map(|&s| theta_levels.iter().map(move |&t| (s, t)))
        .collect();
    let rows: Vec<SweepRow> = combos
        .par_iter()
        .map(|&(sigma, theta)| {
            let mut gains = pi.clone();
            gains.sigma = sigma;
            gains.theta = theta;
            let mut scenario = base.clone();
            scenario.gains = SeekerGains::Pi(gains);
            match run(&scenario).and_then(|traj| ultimate_bound(&traj, window)) {
                Ok(bound) => SweepRow {
                    sigma,
                    theta,
                    ultimate_bound: Some(bound),
                    diverged: false,
                },
                Err(SimError::Divergence { .. }) | Err(SimError::NonFinite { .. }) => SweepRow {
                    sigma,
                    theta,
                    ultimate_bound: None,
                    diverged: true,
                },
                Err(_) => SweepRow {
                    sigma,
                    theta,
                    ultimate_bound: None,
                    diverged: false,
                },
            }
        })
        .collect();
    Ok(SweepTable { rows, window })
}
