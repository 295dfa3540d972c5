//! Undirected weighted communication graphs with time-windowed disruption.
//!
//! Players exchange action estimates over an undirected, connected graph.
//! Link quality can degrade inside configured time windows: every weight is
//! multiplied by the window's scale factor while the window is active, with
//! scale 0 reproducing a total communication loss.

use nalgebra::DMatrix;
use thiserror::Error;

/// Errors raised when constructing or querying communication graphs.
#[derive(Debug, Error)]
pub enum GraphError {
    #[error("weight matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("weight matrix is asymmetric at ({i},{j}): {a} vs {b}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("negative weight {w} at ({i},{j})")]
    NegativeWeight { i: usize, j: usize, w: f64 },
    #[error("nonzero self-weight {w} for player {i}")]
    NonzeroDiagonal { i: usize, w: f64 },
    #[error("graph must be connected when no disruption is active")]
    Disconnected,
    #[error("disruption window must satisfy start < end, got [{start}, {end})")]
    BadWindow { start: f64, end: f64 },
    #[error("disruption scale must lie in [0, 1], got {scale}")]
    BadScale { scale: f64 },
    #[error("edge ({i},{j}) out of range for {n} players")]
    EdgeOutOfRange { i: usize, j: usize, n: usize },
}

/// A time window during which all communication weights are scaled.
///
/// The window is half-open: it is active for `start <= t < end`. Scale 0
/// silences the network completely, intermediate values model degradation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disruption {
    pub start: f64,
    pub end: f64,
    pub scale: f64,
}

impl Disruption {
    pub fn new(start: f64, end: f64, scale: f64) -> Result<Self, GraphError> {
        if start.partial_cmp(&end) != Some(std::cmp::Ordering::Less) {
            return Err(GraphError::BadWindow { start, end });
        }
        if !(0.0..=1.0).contains(&scale) {
            return Err(GraphError::BadScale { scale });
        }
        Ok(Self { start, end, scale })
    }

    /// Whether the window is active at time `t` (half-open interval).
    pub fn active_at(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }
}

/// Undirected weighted communication topology shared by all players.
///
/// Immutable after construction; cheap to clone and safe to share across
/// concurrently running scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct CommGraph {
    weights: DMatrix<f64>,
    disruptions: Vec<Disruption>,
}

impl CommGraph {
    /// Builds a graph from a symmetric nonnegative weight matrix with zero
    /// diagonal. The nominal (undisrupted) graph must be connected.
    pub fn new(weights: DMatrix<f64>, disruptions: Vec<Disruption>) -> Result<Self, GraphError> {
        if weights.nrows() != weights.ncols() {
            return Err(GraphError::NotSquare {
                rows: weights.nrows(),
                cols: weights.ncols(),
            });
        }
        let n = weights.nrows();
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(GraphError::NonzeroDiagonal {
                    i,
                    w: weights[(i, i)],
                });
            }
            for j in 0..n {
                let w = weights[(i, j)];
                if w < 0.0 || !w.is_finite() {
                    return Err(GraphError::NegativeWeight { i, j, w });
                }
                if w != weights[(j, i)] {
                    return Err(GraphError::Asymmetric {
                        i,
                        j,
                        a: w,
                        b: weights[(j, i)],
                    });
                }
            }
        }
        if !is_connected(&weights) {
            return Err(GraphError::Disconnected);
        }
        for d in &disruptions {
            Disruption::new(d.start, d.end, d.scale)?;
        }
        Ok(Self {
            weights,
            disruptions,
        })
    }

    /// Builds a graph from an undirected edge list with 0-based indices.
    pub fn from_edges(
        n: usize,
        edges: &[(usize, usize, f64)],
        disruptions: Vec<Disruption>,
    ) -> Result<Self, GraphError> {
        let mut w = DMatrix::zeros(n, n);
        for &(i, j, weight) in edges {
            if i >= n || j >= n {
                return Err(GraphError::EdgeOutOfRange { i, j, n });
            }
            w[(i, j)] = weight;
            w[(j, i)] = weight;
        }
        Self::new(w, disruptions)
    }

    pub fn n_players(&self) -> usize {
        self.weights.nrows()
    }

    /// The nominal weight matrix, ignoring disruptions.
    pub fn nominal_weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn disruptions(&self) -> &[Disruption] {
        &self.disruptions
    }

    /// Weights in effect at time `t`: nominal weights multiplied by the
    /// product of the scales of every active window. Piecewise constant in
    /// `t`, discontinuous only at window boundaries.
    pub fn effective_weights(&self, t: f64) -> DMatrix<f64> {
        &self.weights * self.effective_scale(t)
    }

    /// The combined scale factor applied to all weights at time `t`.
    pub fn effective_scale(&self, t: f64) -> f64 {
        self.disruptions
            .iter()
            .filter(|d| d.active_at(t))
            .map(|d| d.scale)
            .product()
    }

    /// Whether player `j` is a nominal neighbor of player `i`.
    pub fn is_neighbor(&self, i: usize, j: usize) -> bool {
        self.weights[(i, j)] > 0.0
    }

    /// Returns a copy whose disruption window edges are snapped to the
    /// nearest integration step time `t0 + k*dt`, so weight switches happen
    /// on step boundaries only.
    pub fn with_windows_snapped(&self, t0: f64, dt: f64) -> Self {
        let snap = |t: f64| t0 + ((t - t0) / dt).round() * dt;
        let disruptions = self
            .disruptions
            .iter()
            .map(|d| Disruption {
                start: snap(d.start),
                end: snap(d.end),
                scale: d.scale,
            })
            .filter(|d| d.start < d.end)
            .collect();
        Self {
            weights: self.weights.clone(),
            disruptions,
        }
    }
}

/// Graph Laplacian `D - A` where `D` is the diagonal of row sums.
///
/// The result is symmetric positive semidefinite with zero row sums.
pub fn laplacian(weights: &DMatrix<f64>) -> Result<DMatrix<f64>, GraphError> {
    let n = weights.nrows();
    if n != weights.ncols() {
        return Err(GraphError::NotSquare {
            rows: weights.nrows(),
            cols: weights.ncols(),
        });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if weights[(i, j)] != weights[(j, i)] {
                return Err(GraphError::Asymmetric {
                    i,
                    j,
                    a: weights[(i, j)],
                    b: weights[(j, i)],
                });
            }
        }
    }
    let mut lap = -weights.clone();
    for i in 0..n {
        lap[(i, i)] = 0.0;
        let degree: f64 = (0..n).filter(|&j| j != i).map(|j| weights[(i, j)]).sum();
        lap[(i, i)] = degree;
    }
    Ok(lap)
}

/// Whether the graph with edge set `{(i,j) : w_ij > 0}` has a single
/// connected component (breadth-first reachability from node 0).
pub fn is_connected(weights: &DMatrix<f64>) -> bool {
    let n = weights.nrows();
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if !seen[j] && weights[(i, j)] > 0.0 {
                seen[j] = true;
                count += 1;
                queue.push_back(j);
            }
        }
    }
    count == n
}
