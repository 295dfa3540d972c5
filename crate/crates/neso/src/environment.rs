//! The true plant: disturbances, unmodeled coupling terms, and the switch
//! that selects which of them act on the players' dynamics.
//!
//! Player `i` evolves as `dx_i = u_i + varsigma * g_i(x) + d_i(t)`. The
//! lumped unknown `z_i = varsigma * g_i(x) + d_i(t)` is the extended state
//! the seeking strategies observe. Disturbance signals carry closed-form
//! derivative metadata so gain advisories never need numerical
//! differentiation of user inputs.

use nalgebra::DVector;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("joint vector has length {got}, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("need one disturbance and one unmodeled term per player")]
    WrongPlayerCount,
    #[error(
        "player {i}: second-derivative bound missing (signal unsuitable for the RISE advisor)"
    )]
    MissingSecondDerivativeBound { i: usize },
    #[error("per-player gains must all be positive")]
    NonpositiveGain,
    #[error("gain vector has length {got}, expected {expected}")]
    GainCountMismatch { got: usize, expected: usize },
    #[error("the sensor coupling term is defined for 5 players of dimension 2")]
    CouplingShape,
}

/// Closed-form disturbance families. Every component of a player's
/// disturbance vector carries the same scalar signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisturbanceKind {
    Zero,
    Constant {
        level: f64,
    },
    /// `d(t) = amplitude * sin(frequency * t)` with radian frequency.
    Sinusoid {
        amplitude: f64,
        frequency: f64,
    },
}

/// A per-player disturbance signal `d_i(t)` with derivative metadata.
///
/// `sup_deriv_l1` bounds `sup_t ||d'_i(t)||_1` and `sup_deriv2_l1` bounds
/// `sup_t ||d''_i(t)||_1`; the latter may be absent for signals used only
/// with the PI strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceSignal {
    kind: DisturbanceKind,
    dim: usize,
    sup_deriv_l1: f64,
    sup_deriv2_l1: Option<f64>,
}

impl DisturbanceSignal {
    pub fn zero(dim: usize) -> Self {
        Self {
            kind: DisturbanceKind::Zero,
            dim,
            sup_deriv_l1: 0.0,
            sup_deriv2_l1: Some(0.0),
        }
    }

    pub fn constant(level: f64, dim: usize) -> Self {
        Self {
            kind: DisturbanceKind::Constant { level },
            dim,
            sup_deriv_l1: 0.0,
            sup_deriv2_l1: Some(0.0),
        }
    }

    pub fn sinusoid(amplitude: f64, frequency: f64, dim: usize) -> Self {
        let a = amplitude.abs();
        let w = frequency.abs();
        Self {
            kind: DisturbanceKind::Sinusoid {
                amplitude,
                frequency,
            },
            dim,
            sup_deriv_l1: dim as f64 * a * w,
            sup_deriv2_l1: Some(dim as f64 * a * w * w),
        }
    }

    /// Drops the curvature bound, marking the signal PI-only.
    pub fn without_second_derivative_bound(mut self) -> Self {
        self.sup_deriv2_l1 = None;
        self
    }

    pub fn kind(&self) -> DisturbanceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn scalar(&self, t: f64) -> f64 {
        match self.kind {
            DisturbanceKind::Zero => 0.0,
            DisturbanceKind::Constant { level } => level,
            DisturbanceKind::Sinusoid {
                amplitude,
                frequency,
            } => amplitude * (frequency * t).sin(),
        }
    }

    fn scalar_deriv(&self, t: f64) -> f64 {
        match self.kind {
            DisturbanceKind::Zero | DisturbanceKind::Constant { .. } => 0.0,
            DisturbanceKind::Sinusoid {
                amplitude,
                frequency,
            } => amplitude * frequency * (frequency * t).cos(),
        }
    }

    pub fn value(&self, t: f64) -> DVector<f64> {
        DVector::from_element(self.dim, self.scalar(t))
    }

    pub fn deriv(&self, t: f64) -> DVector<f64> {
        DVector::from_element(self.dim, self.scalar_deriv(t))
    }

    /// Bound on `sup_t ||d'_i(t)||_1`.
    pub fn sup_deriv_l1(&self) -> f64 {
        self.sup_deriv_l1
    }

    /// Bound on `sup_t ||d''_i(t)||_1`, when known.
    pub fn sup_deriv2_l1(&self) -> Option<f64> {
        self.sup_deriv2_l1
    }
}

/// Named unmodeled coupling terms `g_i(x)`. All builtins are smooth with
/// first and second partials bounded on bounded boxes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnmodeledTerm {
    Zero,
    /// The coupled-sensor family for five players of dimension two.
    ///
    /// Per player 1..5 (1-based), `g_i` maps the joint position vector to:
    /// `(x_21, x_22)`, `(x_11^2 + x_31, x_22)`, `(x_31, x_32)`,
    /// `(x_41, x_42)`, `(x_51, x_52)` -- a mix of neighbor feed-through,
    /// one quadratic coupling, and self feed-through.
    SensorCoupling {
        player: usize,
    },
}

impl UnmodeledTerm {
    /// Evaluates `g_i` at the joint action `x`, writing the player's
    /// n-vector contribution.
    fn eval(&self, x: &DVector<f64>, dim: usize) -> DVector<f64> {
        match *self {
            UnmodeledTerm::Zero => DVector::zeros(dim),
            UnmodeledTerm::SensorCoupling { player } => match player {
                0 => DVector::from_vec(vec![x[2], x[3]]),
                1 => DVector::from_vec(vec![x[0] * x[0] + x[4], x[3]]),
                2 => DVector::from_vec(vec![x[4], x[5]]),
                3 => DVector::from_vec(vec![x[6], x[7]]),
                4 => DVector::from_vec(vec![x[8], x[9]]),
                _ => unreachable!("validated at Environment construction"),
            },
        }
    }
}

/// The plant model: per-player disturbances and unmodeled terms plus the
/// switch selecting whether unmodeled terms act. Immutable and reentrant.
#[derive(Debug, Clone)]
pub struct Environment {
    varsigma: bool,
    disturbances: Vec<DisturbanceSignal>,
    unmodeled: Vec<UnmodeledTerm>,
    dim: usize,
}

impl Environment {
    /// `varsigma` is the 0/1 switch of the plant: `false` leaves only the
    /// disturbances, `true` additionally applies the unmodeled terms.
    pub fn new(
        varsigma: bool,
        disturbances: Vec<DisturbanceSignal>,
        unmodeled: Vec<UnmodeledTerm>,
    ) -> Result<Self, EnvError> {
        let n = disturbances.len();
        if n == 0 || unmodeled.len() != n {
            return Err(EnvError::WrongPlayerCount);
        }
        let dim = disturbances[0].dim();
        if disturbances.iter().any(|d| d.dim() != dim) {
            return Err(EnvError::WrongPlayerCount);
        }
        for (i, u) in unmodeled.iter().enumerate() {
            if let UnmodeledTerm::SensorCoupling { player } = u {
                if n != 5 || dim != 2 || *player != i {
                    return Err(EnvError::CouplingShape);
                }
            }
        }
        Ok(Self {
            varsigma,
            disturbances,
            unmodeled,
            dim,
        })
    }

    /// Disturbance-only environment with all-zero signals.
    pub fn quiet(n_players: usize, dim: usize) -> Self {
        Self::new(
            false,
            (0..n_players)
                .map(|_| DisturbanceSignal::zero(dim))
                .collect(),
            vec![UnmodeledTerm::Zero; n_players],
        )
        .expect("zero environment is valid")
    }

    pub fn n_players(&self) -> usize {
        self.disturbances.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn joint_dim(&self) -> usize {
        self.n_players() * self.dim
    }

    pub fn varsigma(&self) -> bool {
        self.varsigma
    }

    pub fn disturbances(&self) -> &[DisturbanceSignal] {
        &self.disturbances
    }

    /// Stacked disturbance vector `[d_i(t)]`.
    pub fn disturbance(&self, t: f64) -> DVector<f64> {
        self.stack(|i| self.disturbances[i].value(t))
    }

    /// Stacked disturbance derivative `[d'_i(t)]`.
    pub fn disturbance_deriv(&self, t: f64) -> DVector<f64> {
        self.stack(|i| self.disturbances[i].deriv(t))
    }

    /// Stacked unmodeled term `[g_i(x)]`, regardless of the switch.
    pub fn unmodeled_term(&self, x: &DVector<f64>) -> DVector<f64> {
        self.stack(|i| self.unmodeled[i].eval(x, self.dim))
    }

    fn stack(&self, f: impl Fn(usize) -> DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.joint_dim());
        for i in 0..self.n_players() {
            out.rows_mut(i * self.dim, self.dim).copy_from(&f(i));
        }
        out
    }

    /// Plant right-hand side: `dx = u + varsigma * g(x) + d(t)`.
    pub fn plant_derivative(
        &self,
        x: &DVector<f64>,
        u: &DVector<f64>,
        t: f64,
    ) -> Result<DVector<f64>, EnvError> {
        let expected = self.joint_dim();
        if x.len() != expected {
            return Err(EnvError::DimensionMismatch {
                got: x.len(),
                expected,
            });
        }
        if u.len() != expected {
            return Err(EnvError::DimensionMismatch {
                got: u.len(),
                expected,
            });
        }
        Ok(u + self.extended_state(x, t))
    }

    /// The true extended state `z = varsigma * g(x) + d(t)` whose
    /// observation error is `zeta_2 = z - zhat`.
    pub fn extended_state(&self, x: &DVector<f64>, t: f64) -> DVector<f64> {
        let mut z = self.disturbance(t);
        if self.varsigma {
            z += self.unmodeled_term(x);
        }
        z
    }

    /// Lower bound on the RISE signum gains `beta_i` that keeps the
    /// strategy's integral term nonnegative:
    /// `max{c_i} sup||[d'_i]||_1 / min{c_i} + sup||[d''_i]||_1 / min{c_i}`,
    /// using the per-player metadata bounds (the stacked sup is bounded by
    /// the sum of per-player sups).
    ///
    /// The bound covers the disturbance part only; when unmodeled terms are
    /// active their contribution is handled by the other RISE gains and must
    /// be tuned empirically.
    pub fn beta_lower_bound(&self, c: &[f64]) -> Result<f64, EnvError> {
        if c.len() != self.n_players() {
            return Err(EnvError::GainCountMismatch {
                got: c.len(),
                expected: self.n_players(),
            });
        }
        if c.iter().any(|&ci| !crate::strictly_positive(ci)) {
            return Err(EnvError::NonpositiveGain);
        }
        let mut sup1 = 0.0;
        let mut sup2 = 0.0;
        for (i, d) in self.disturbances.iter().enumerate() {
            sup1 += d.sup_deriv_l1();
            sup2 += d
                .sup_deriv2_l1()
                .ok_or(EnvError::MissingSecondDerivativeBound { i })?;
        }
        let c_max = c.iter().copied().fold(f64::MIN, f64::max);
        let c_min = c.iter().copied().fold(f64::MAX, f64::min);
        // ratio first: uniform gains give exactly sup1 + sup2 / c
        Ok((c_max / c_min) * sup1 + sup2 / c_min)
    }
}
