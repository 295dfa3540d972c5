//! N-player games with analytic partial gradients and a Nash oracle.
//!
//! A game holds, per player, an evaluable objective `f_i(x)` over the joint
//! action together with its analytic partial gradient with respect to the
//! player's own action block. The pseudo-gradient (the stack of those
//! partials) is assumed strongly monotone, which gives a unique Nash
//! equilibrium reachable by damped gradient play; [`solve_nash`] implements
//! that oracle independently of the closed-loop simulator so trajectories
//! can be judged against ground truth.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

/// Evaluable objective: joint action (length `N*n`) to scalar cost.
pub type ObjectiveFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
/// Evaluable partial gradient: joint action to the player's own n-vector.
pub type PartialGradFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("player index {i} out of range for {n} players")]
    PlayerOutOfRange { i: usize, n: usize },
    #[error("joint action has length {got}, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("need one objective and one partial gradient per player")]
    WrongPlayerCount,
    #[error("declared monotonicity constant must be positive, got {m}")]
    NonpositiveMonotonicity { m: f64 },
    #[error("r_{i}{i} must be symmetric")]
    AsymmetricBlock { i: usize },
    #[error("r_{i}{i} must be strictly diagonally dominant with positive diagonal")]
    NotDiagonallyDominant { i: usize },
    #[error("coupling weights must be nonnegative with zero diagonal")]
    BadCoupling,
    #[error("connectivity game spec fields disagree on player count or dimension")]
    InconsistentSpec,
}

/// Immutable game definition; evaluation is reentrant and stateless.
#[derive(Clone)]
pub struct Game {
    n_players: usize,
    dim: usize,
    objectives: Vec<ObjectiveFn>,
    partials: Vec<PartialGradFn>,
    monotonicity: f64,
}

impl std::fmt::Debug for Game {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Game")
            .field("n_players", &self.n_players)
            .field("dim", &self.dim)
            .field("monotonicity", &self.monotonicity)
            .finish()
    }
}

impl Game {
    /// Assembles a game from per-player objectives and analytic partials.
    ///
    /// `monotonicity` is the declared strong-monotonicity constant `m > 0`
    /// of the pseudo-gradient; exact for affine pseudo-gradients, a sampled
    /// lower bound otherwise.
    pub fn new(
        n_players: usize,
        dim: usize,
        objectives: Vec<ObjectiveFn>,
        partials: Vec<PartialGradFn>,
        monotonicity: f64,
    ) -> Result<Self, GameError> {
        if objectives.len() != n_players || partials.len() != n_players {
            return Err(GameError::WrongPlayerCount);
        }
        if !crate::strictly_positive(monotonicity) {
            return Err(GameError::NonpositiveMonotonicity { m: monotonicity });
        }
        Ok(Self {
            n_players,
            dim,
            objectives,
            partials,
            monotonicity,
        })
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    /// Per-player action dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Joint action length `N * n`.
    pub fn joint_dim(&self) -> usize {
        self.n_players * self.dim
    }

    /// Declared strong-monotonicity constant of the pseudo-gradient.
    pub fn monotonicity(&self) -> f64 {
        self.monotonicity
    }

    /// Objective value `f_i(v)`.
    pub fn objective(&self, i: usize, v: &DVector<f64>) -> Result<f64, GameError> {
        self.check_player(i)?;
        self.check_joint(v)?;
        Ok((self.objectives[i])(v))
    }

    /// Partial gradient of player `i`'s objective with respect to its own
    /// action block, evaluated at the joint action `v` (which may be the
    /// player's local estimate rather than the true actions).
    pub fn partial_grad(&self, i: usize, v: &DVector<f64>) -> Result<DVector<f64>, GameError> {
        self.check_player(i)?;
        self.check_joint(v)?;
        Ok((self.partials[i])(v))
    }

    /// Pseudo-gradient: the stack of all players' partial gradients.
    pub fn pseudo_gradient(&self, v: &DVector<f64>) -> Result<DVector<f64>, GameError> {
        self.check_joint(v)?;
        let mut out = DVector::zeros(self.joint_dim());
        for i in 0..self.n_players {
            let g = (self.partials[i])(v);
            out.rows_mut(i * self.dim, self.dim).copy_from(&g);
        }
        Ok(out)
    }

    fn check_player(&self, i: usize) -> Result<(), GameError> {
        if i >= self.n_players {
            return Err(GameError::PlayerOutOfRange {
                i,
                n: self.n_players,
            });
        }
        Ok(())
    }

    fn check_joint(&self, v: &DVector<f64>) -> Result<(), GameError> {
        if v.len() != self.joint_dim() {
            return Err(GameError::DimensionMismatch {
                got: v.len(),
                expected: self.joint_dim(),
            });
        }
        Ok(())
    }
}

/// Failure report of the Nash oracle.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error(
        "gradient play did not converge in {iterations} iterations, final residual {residual:e}"
    )]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("step size underflowed at residual {residual:e}; game may violate monotonicity")]
    StepUnderflow { residual: f64 },
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Independent Nash-equilibrium oracle via damped gradient play.
///
/// Iterates `x <- x - a * pseudo_gradient(x)`, halving `a` whenever the
/// residual `||pseudo_gradient||_inf` would increase, and clamping steps to
/// `||dx||_inf <= 1` so locally Lipschitz terms (such as exponentials)
/// cannot overflow. Returns the first iterate with residual at most `tol`.
pub fn solve_nash(
    game: &Game,
    x0: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<DVector<f64>, SolveError> {
    let mut x = x0.clone();
    let mut grad = game.pseudo_gradient(&x)?;
    let mut residual = grad.amax();
    let mut alpha = 1.0f64;
    for _ in 0..max_iter {
        if residual <= tol {
            return Ok(x);
        }
        let mut step = &grad * alpha;
        let step_inf = step.amax();
        if step_inf > 1.0 {
            step /= step_inf;
        }
        let candidate = &x - &step;
        let cand_grad = game.pseudo_gradient(&candidate)?;
        let cand_residual = cand_grad.amax();
        // require strict decrease: accepting equal residuals lets the
        // iteration enter a two-cycle at the oscillation boundary
        if cand_residual.partial_cmp(&residual) != Some(std::cmp::Ordering::Less) {
            alpha *= 0.5;
            if alpha < 1e-18 {
                return Err(SolveError::StepUnderflow { residual });
            }
            continue;
        }
        x = candidate;
        grad = cand_grad;
        residual = cand_residual;
    }
    if residual <= tol {
        Ok(x)
    } else {
        Err(SolveError::NonConvergence {
            iterations: max_iter,
            residual,
        })
    }
}

/// Default oracle tolerance.
pub const NASH_TOL: f64 = 1e-10;
/// Default oracle iteration budget.
pub const NASH_MAX_ITER: usize = 1_000_000;

/// Sensor connectivity game: each player trades a local quadratic cost
/// `x_i' r_ii x_i + x_i' r_i + b_i` against quadratic attraction
/// `sum_j c_ij ||x_i - x_j||^2` to the positions of its physical neighbors.
///
/// `coupling[(i, j)] > 0` exactly when `j` is a physical neighbor of `i`;
/// the physical neighbor relation is independent of the communication graph
/// and need not be symmetric.
#[derive(Debug, Clone)]
pub struct ConnectivityGameSpec {
    r_ii: Vec<DMatrix<f64>>,
    r_i: Vec<DVector<f64>>,
    b_i: Vec<f64>,
    coupling: DMatrix<f64>,
}

impl ConnectivityGameSpec {
    pub fn new(
        r_ii: Vec<DMatrix<f64>>,
        r_i: Vec<DVector<f64>>,
        b_i: Vec<f64>,
        coupling: DMatrix<f64>,
    ) -> Result<Self, GameError> {
        let n = r_ii.len();
        if n == 0 || r_i.len() != n || b_i.len() != n {
            return Err(GameError::InconsistentSpec);
        }
        if coupling.nrows() != n || coupling.ncols() != n {
            return Err(GameError::InconsistentSpec);
        }
        let dim = r_ii[0].nrows();
        for (i, r) in r_ii.iter().enumerate() {
            if r.nrows() != dim || r.ncols() != dim || r_i[i].len() != dim {
                return Err(GameError::InconsistentSpec);
            }
            if r != &r.transpose() {
                return Err(GameError::AsymmetricBlock { i });
            }
            // strictly diagonally dominant with positive diagonal, which
            // also certifies positive definiteness for a symmetric block
            for k in 0..dim {
                let off: f64 = (0..dim).filter(|&l| l != k).map(|l| r[(k, l)].abs()).sum();
                if r[(k, k)].partial_cmp(&off) != Some(std::cmp::Ordering::Greater) {
                    return Err(GameError::NotDiagonallyDominant { i });
                }
            }
        }
        for i in 0..n {
            if coupling[(i, i)] != 0.0 {
                return Err(GameError::BadCoupling);
            }
            for j in 0..n {
                if coupling[(i, j)] < 0.0 || !coupling[(i, j)].is_finite() {
                    return Err(GameError::BadCoupling);
                }
            }
        }
        Ok(Self {
            r_ii,
            r_i,
            b_i,
            coupling,
        })
    }

    pub fn n_players(&self) -> usize {
        self.r_ii.len()
    }

    pub fn dim(&self) -> usize {
        self.r_ii[0].nrows()
    }

    pub fn r_block(&self, i: usize) -> &DMatrix<f64> {
        &self.r_ii[i]
    }

    pub fn r_vec(&self, i: usize) -> &DVector<f64> {
        &self.r_i[i]
    }

    pub fn offset(&self, i: usize) -> f64 {
        self.b_i[i]
    }

    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.coupling
    }

    /// Physical neighbor set of player `i`: all `j` with `c_ij > 0`.
    pub fn physical_neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.n_players())
            .filter(|&j| self.coupling[(i, j)] > 0.0)
            .collect()
    }

    /// Constant Jacobian of the pseudo-gradient: block matrix with diagonal
    /// blocks `2 r_ii + 2 sum_j c_ij I` and off-diagonal blocks `-2 c_ij I`.
    pub fn pseudo_gradient_jacobian(&self) -> DMatrix<f64> {
        let n = self.n_players();
        let dim = self.dim();
        let mut m = DMatrix::zeros(n * dim, n * dim);
        for i in 0..n {
            let row_sum: f64 = (0..n).map(|j| self.coupling[(i, j)]).sum();
            for k in 0..dim {
                for l in 0..dim {
                    m[(i * dim + k, i * dim + l)] = 2.0 * self.r_ii[i][(k, l)];
                }
                m[(i * dim + k, i * dim + k)] += 2.0 * row_sum;
                for j in 0..n {
                    if j != i {
                        m[(i * dim + k, j * dim + k)] = -2.0 * self.coupling[(i, j)];
                    }
                }
            }
        }
        m
    }
}

/// Exact strong-monotonicity constant of an affine pseudo-gradient:
/// the smallest eigenvalue of the symmetric part of its Jacobian.
pub(crate) fn affine_monotonicity(jacobian: &DMatrix<f64>) -> f64 {
    let sym = (jacobian + jacobian.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Builds the connectivity game with partial gradients
/// `2 r_ii x_i + r_i + 2 sum_j c_ij (x_i - x_j)`.
pub fn build_connectivity_game(spec: &ConnectivityGameSpec) -> Result<Game, GameError> {
    let n = spec.n_players();
    let dim = spec.dim();
    let m = affine_monotonicity(&spec.pseudo_gradient_jacobian());
    if !crate::strictly_positive(m) {
        return Err(GameError::NonpositiveMonotonicity { m });
    }
    let mut objectives: Vec<ObjectiveFn> = Vec::with_capacity(n);
    let mut partials: Vec<PartialGradFn> = Vec::with_capacity(n);
    for i in 0..n {
        let r = spec.r_ii[i].clone();
        let rv = spec.r_i[i].clone();
        let b = spec.b_i[i];
        let c_row: Vec<f64> = (0..n).map(|j| spec.coupling[(i, j)]).collect();
        {
            let (r, rv, c_row) = (r.clone(), rv.clone(), c_row.clone());
            objectives.push(Arc::new(move |v: &DVector<f64>| {
                let xi = v.rows(i * dim, dim);
                let mut val = (xi.transpose() * &r * xi)[(0, 0)] + xi.dot(&rv) + b;
                for (j, &c) in c_row.iter().enumerate() {
                    if c > 0.0 {
                        let diff = xi - v.rows(j * dim, dim);
                        val += c * diff.norm_squared();
                    }
                }
                val
            }));
        }
        partials.push(Arc::new(move |v: &DVector<f64>| {
            let xi = v.rows(i * dim, dim);
            let mut g = &r * xi * 2.0 + &rv;
            for (j, &c) in c_row.iter().enumerate() {
                if c > 0.0 {
                    g += (xi - v.rows(j * dim, dim)) * (2.0 * c);
                }
            }
            g
        }));
    }
    Game::new(n, dim, objectives, partials, m)
}

/// The five-sensor benchmark game: `r_ii = i I_2`, `r_i = (i, i)'`,
/// `b_i = i` (1-based `i`), with unit physical couplings 1->2, 2->3, 3->2,
/// 4->2, 4->5, 5->1. Its unique Nash equilibrium puts every coordinate at
/// -1/2.
pub fn five_sensor_spec() -> ConnectivityGameSpec {
    let n = 5;
    let dim = 2;
    let r_ii = (1..=n)
        .map(|i| DMatrix::identity(dim, dim) * i as f64)
        .collect();
    let r_i = (1..=n)
        .map(|i| DVector::from_element(dim, i as f64))
        .collect();
    let b_i = (1..=n).map(|i| i as f64).collect();
    let mut coupling = DMatrix::zeros(n, n);
    for (i, j) in [(0, 1), (1, 2), (2, 1), (3, 1), (3, 4), (4, 0)] {
        coupling[(i, j)] = 1.0;
    }
    ConnectivityGameSpec::new(r_ii, r_i, b_i, coupling).expect("benchmark spec is valid")
}

/// The five-sensor game with player 1's objective replaced by the
/// non-quadratic cost
/// `x_1' x_1 + x_11 + x_12 + 1 + 10 exp(x_11) + ||x_1 - x_2||^2`.
///
/// The exponential term only adds a nonnegative rank-one contribution to the
/// symmetric part of the pseudo-gradient Jacobian, so the affine game's
/// monotonicity constant remains a valid lower bound.
pub fn build_nonquadratic_example() -> Game {
    let spec = five_sensor_spec();
    let dim = spec.dim();
    let base = build_connectivity_game(&spec).expect("benchmark game is valid");
    let mut objectives = base.objectives.clone();
    let mut partials = base.partials.clone();
    objectives[0] = Arc::new(move |v: &DVector<f64>| {
        let x1 = v.rows(0, dim);
        let x2 = v.rows(dim, dim);
        x1.norm_squared() + x1[0] + x1[1] + 1.0 + 10.0 * x1[0].exp() + (x1 - x2).norm_squared()
    });
    partials[0] = Arc::new(move |v: &DVector<f64>| {
        let x1 = v.rows(0, dim);
        let x2 = v.rows(dim, dim);
        let mut g = x1 * 2.0 + DVector::from_element(dim, 1.0) + (x1 - x2) * 2.0;
        g[0] += 10.0 * x1[0].exp();
        g
    });
    Game::new(5, dim, objectives, partials, base.monotonicity).expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Central finite difference of `f_i` with respect to coordinate `k`.
    fn fd_partial(game: &Game, i: usize, v: &DVector<f64>, k: usize, h: f64) -> f64 {
        let mut vp = v.clone();
        let mut vm = v.clone();
        vp[k] += h;
        vm[k] -= h;
        (game.objective(i, &vp).unwrap() - game.objective(i, &vm).unwrap()) / (2.0 * h)
    }

    #[test]
    fn five_sensor_gradient_vanishes_at_equilibrium() {
        let game = build_connectivity_game(&five_sensor_spec()).unwrap();
        let v = DVector::from_element(10, -0.5);
        let g = game.partial_grad(0, &v).unwrap();
        assert_relative_eq!(g[0], 0.0);
        assert_relative_eq!(g[1], 0.0);
        assert!(game.pseudo_gradient(&v).unwrap().amax() < 1e-14);
    }

    #[test]
    fn five_sensor_partial_at_origin() {
        // hand evaluation of 2 r_55 x_5 + r_5 + 2 c_51 (x_5 - x_1) at zero
        let game = build_connectivity_game(&five_sensor_spec()).unwrap();
        let g = game.partial_grad(4, &DVector::zeros(10)).unwrap();
        assert_eq!(g, DVector::from_vec(vec![5.0, 5.0]));
    }

    #[test]
    fn nonquadratic_first_component_stationary_at_reported_equilibrium() {
        let game = build_nonquadratic_example();
        let v = DVector::from_vec(vec![
            -1.2304, -0.5, -0.5, -0.5, -0.5, -0.5, -0.5203, -0.5, -0.6217, -0.5,
        ]);
        let g = game.partial_grad(0, &v).unwrap();
        assert!(g[0].abs() < 5e-4, "got {}", g[0]);
        assert!(game.pseudo_gradient(&v).unwrap().amax() < 5e-4);
    }

    #[test]
    fn nonquadratic_leaves_other_players_untouched() {
        let base = build_connectivity_game(&five_sensor_spec()).unwrap();
        let game = build_nonquadratic_example();
        let v = DVector::from_fn(10, |k, _| (k as f64) * 0.3 - 1.0);
        for i in 1..5 {
            assert_eq!(
                game.partial_grad(i, &v).unwrap(),
                base.partial_grad(i, &v).unwrap()
            );
        }
        // df1/dx11 at zero: 0 + 1 + 10 e^0 + 0 = 11
        let g = game.partial_grad(0, &DVector::zeros(10)).unwrap();
        assert_relative_eq!(g[0], 11.0);
    }

    #[test]
    fn solve_nash_five_sensor() {
        let game = build_connectivity_game(&five_sensor_spec()).unwrap();
        let x = solve_nash(&game, &DVector::zeros(10), 1e-10, NASH_MAX_ITER).unwrap();
        for k in 0..10 {
            assert!((x[k] + 0.5).abs() < 1e-9);
        }
        // a fixed point: restarting from the solution returns it unchanged
        let again = solve_nash(&game, &x, 1e-10, NASH_MAX_ITER).unwrap();
        assert_eq!(again, x);
    }

    #[test]
    fn solve_nash_nonquadratic_matches_reported_point() {
        let game = build_nonquadratic_example();
        let x = solve_nash(&game, &DVector::zeros(10), NASH_TOL, NASH_MAX_ITER).unwrap();
        let expected = [
            -1.2304, -0.5, -0.5, -0.5, -0.5, -0.5, -0.5203, -0.5, -0.6217, -0.5,
        ];
        for k in 0..10 {
            assert!(
                (x[k] - expected[k]).abs() < 1e-3,
                "component {k}: {} vs {}",
                x[k],
                expected[k]
            );
        }
    }

    #[test]
    fn solve_nash_single_player_quadratic() {
        let game = Game::new(
            1,
            1,
            vec![Arc::new(|v: &DVector<f64>| v[0] * v[0])],
            vec![Arc::new(|v: &DVector<f64>| {
                DVector::from_vec(vec![2.0 * v[0]])
            })],
            2.0,
        )
        .unwrap();
        let x = solve_nash(&game, &DVector::from_vec(vec![3.0]), 1e-12, 10_000).unwrap();
        assert!(x[0].abs() < 1e-12);
    }

    #[test]
    fn decoupled_connectivity_game_solves_blockwise() {
        // with no couplings the equilibrium solves 2 r_ii x_i + r_i = 0
        let spec = ConnectivityGameSpec::new(
            vec![DMatrix::identity(2, 2) * 2.0, DMatrix::identity(2, 2) * 4.0],
            vec![
                DVector::from_vec(vec![1.0, 2.0]),
                DVector::from_vec(vec![-4.0, 8.0]),
            ],
            vec![0.0, 0.0],
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        let game = build_connectivity_game(&spec).unwrap();
        let x = solve_nash(&game, &DVector::zeros(4), 1e-12, 100_000).unwrap();
        let expected = [-0.25, -0.5, 0.5, -1.0];
        for k in 0..4 {
            assert_relative_eq!(x[k], expected[k], max_relative = 1e-9);
        }
    }

    #[test]
    fn symmetric_two_player_game_equilibrium_at_origin() {
        let mut coupling = DMatrix::zeros(2, 2);
        coupling[(0, 1)] = 1.0;
        coupling[(1, 0)] = 1.0;
        let spec = ConnectivityGameSpec::new(
            vec![DMatrix::identity(2, 2), DMatrix::identity(2, 2)],
            vec![DVector::zeros(2), DVector::zeros(2)],
            vec![0.0, 0.0],
            coupling,
        )
        .unwrap();
        let game = build_connectivity_game(&spec).unwrap();
        let x0 = DVector::from_vec(vec![1.0, -2.0, 3.0, 0.5]);
        let x = solve_nash(&game, &x0, 1e-12, 100_000).unwrap();
        assert!(x.amax() < 1e-11);
    }

    #[test]
    fn analytic_partials_match_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let games = [
            build_connectivity_game(&five_sensor_spec()).unwrap(),
            build_nonquadratic_example(),
        ];
        // step 1e-4 for both games: the quadratic terms have zero third
        // derivative, and a smaller step would sink below the f64
        // cancellation floor set by 10 exp(x_11) ~ 2e5 at the box corner.
        // The purely quadratic game stays above that floor even at 1e-6,
        // so it is additionally checked at the smaller step.
        for (gi, game) in games.iter().enumerate() {
            let steps: &[f64] = if gi == 0 { &[1e-4, 1e-6] } else { &[1e-4] };
            for _ in 0..100 {
                let v = DVector::from_fn(game.joint_dim(), |_, _| rng.gen_range(-10.0..10.0));
                for i in 0..game.n_players() {
                    let g = game.partial_grad(i, &v).unwrap();
                    for k in 0..game.dim() {
                        for &h in steps {
                            let fd = fd_partial(game, i, &v, i * game.dim() + k, h);
                            let denom = g[k].abs().max(fd.abs()).max(1.0);
                            assert!(
                                (g[k] - fd).abs() / denom <= 1e-6,
                                "player {i} coord {k} step {h}: analytic {} vs fd {fd}",
                                g[k]
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn declared_monotonicity_holds_on_samples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let game = build_connectivity_game(&five_sensor_spec()).unwrap();
        let m = game.monotonicity();
        assert!(m > 0.0);
        for _ in 0..200 {
            let x = DVector::from_fn(10, |_, _| rng.gen_range(-10.0..10.0));
            let z = DVector::from_fn(10, |_, _| rng.gen_range(-10.0..10.0));
            let dx = &x - &z;
            let dg = game.pseudo_gradient(&x).unwrap() - game.pseudo_gradient(&z).unwrap();
            assert!(dx.dot(&dg) >= m * dx.norm_squared() - 1e-9);
        }
    }

    #[test]
    fn pseudo_gradient_stacks_per_player_partials() {
        let game = build_nonquadratic_example();
        let v = DVector::from_fn(10, |k, _| 0.2 * k as f64 - 1.0);
        let stacked = game.pseudo_gradient(&v).unwrap();
        for i in 0..5 {
            let gi = game.partial_grad(i, &v).unwrap();
            assert_eq!(stacked.rows(i * 2, 2).into_owned(), gi);
        }
    }

    #[test]
    fn solve_nash_reports_residual_on_budget_exhaustion() {
        let game = build_connectivity_game(&five_sensor_spec()).unwrap();
        match solve_nash(&game, &DVector::zeros(10), 1e-12, 2) {
            Err(SolveError::NonConvergence {
                iterations,
                residual,
            }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-12);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_invalid_specs_and_indices() {
        let game = build_connectivity_game(&five_sensor_spec()).unwrap();
        assert!(matches!(
            game.partial_grad(9, &DVector::zeros(10)),
            Err(GameError::PlayerOutOfRange { .. })
        ));
        assert!(matches!(
            game.partial_grad(0, &DVector::zeros(3)),
            Err(GameError::DimensionMismatch { .. })
        ));
        // non-dominant block rejected
        let bad = ConnectivityGameSpec::new(
            vec![DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])],
            vec![DVector::zeros(2)],
            vec![0.0],
            DMatrix::zeros(1, 1),
        );
        assert!(matches!(bad, Err(GameError::NotDiagonallyDominant { .. })));
    }
}
