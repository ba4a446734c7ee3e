//! Communication matrices: validation of weighted adjacency matrices and
//! their Kronecker lifts to stacked agent states.
//!
//! A communication matrix holds the weight each agent assigns to every other
//! agent's state. The dynamics in this crate require it to be row-stochastic,
//! to carry a strictly positive self-weight on every diagonal entry, and to
//! describe a strongly connected digraph.

use crate::linalg::Mat;
use crate::report::ValidationReport;
use std::fmt;
use thiserror::Error;

/// Default tolerance on row sums.
pub const DEFAULT_ROW_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix entry ({row},{col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("per-agent state dimension must be positive")]
    ZeroBlockDim,
    #[error("adjacency matrix failed validation: {0}")]
    Invalid(ValidationReport<GraphViolation>),
}

/// A single failed adjacency check.
#[derive(Clone, Debug, PartialEq)]
pub enum GraphViolation {
    NegativeEntry { row: usize, col: usize, value: f64 },
    RowSumMismatch { row: usize, sum: f64 },
    NonPositiveDiagonal { index: usize, value: f64 },
    NotStronglyConnected,
}

impl fmt::Display for GraphViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphViolation::NegativeEntry { row, col, value } => {
                write!(f, "entry ({row},{col}) = {value} is negative")
            }
            GraphViolation::RowSumMismatch { row, sum } => {
                write!(f, "row {row} sums to {sum}, expected 1")
            }
            GraphViolation::NonPositiveDiagonal { index, value } => {
                write!(
                    f,
                    "diagonal entry {index} = {value} is not strictly positive"
                )
            }
            GraphViolation::NotStronglyConnected => {
                write!(f, "support digraph is not strongly connected")
            }
        }
    }
}

/// Validated row-stochastic communication matrix with self-loops.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjacencyMatrix {
    entries: Mat,
}

impl AdjacencyMatrix {
    /// Validates `entries` and wraps it. Structural defects (non-square,
    /// non-finite) are reported as errors distinct from validation failures.
    pub fn new(entries: Mat, row_tol: f64) -> Result<Self, GraphError> {
        let report = validate_adjacency(&entries, row_tol)?;
        if !report.is_valid() {
            return Err(GraphError::Invalid(report));
        }
        Ok(AdjacencyMatrix { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>], row_tol: f64) -> Result<Self, GraphError> {
        Self::new(Mat::from_rows(rows), row_tol)
    }

    /// Wraps a matrix after structural checks only (square, finite),
    /// skipping semantic validation. Intended for degenerate or decoupled
    /// couplings, such as the identity matrix, that are useful in
    /// diagnostics and tests but fail the strong-connectivity check.
    pub fn new_unvalidated(entries: Mat) -> Result<Self, GraphError> {
        if !entries.is_square() {
            return Err(GraphError::NotSquare {
                rows: entries.rows(),
                cols: entries.cols(),
            });
        }
        for i in 0..entries.rows() {
            for j in 0..entries.cols() {
                if !entries.at(i, j).is_finite() {
                    return Err(GraphError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(AdjacencyMatrix { entries })
    }

    /// Identity coupling: every agent listens only to itself.
    pub fn identity(n: usize) -> Self {
        AdjacencyMatrix {
            entries: Mat::identity(n),
        }
    }

    pub fn agent_count(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &Mat {
        &self.entries
    }

    /// Smallest self-weight `min_i a_ii`; strictly positive by validation.
    pub fn min_self_loop(&self) -> f64 {
        min_self_loop(&self.entries)
    }

    /// Kronecker lift acting on stacked per-agent states of dimension `n`.
    pub fn lift(&self, n: usize) -> Result<LiftedMatrix, GraphError> {
        kron_lift(&self.entries, n)
    }
}

/// Checks nonnegativity, row sums within `row_tol` of one, strictly positive
/// diagonal, and strong connectivity of the support digraph. All failed
/// checks are enumerated; structural defects are errors instead.
pub fn validate_adjacency(
    entries: &Mat,
    row_tol: f64,
) -> Result<ValidationReport<GraphViolation>, GraphError> {
    if !entries.is_square() {
        return Err(GraphError::NotSquare {
            rows: entries.rows(),
            cols: entries.cols(),
        });
    }
    for i in 0..entries.rows() {
        for j in 0..entries.cols() {
            if !entries.at(i, j).is_finite() {
                return Err(GraphError::NonFinite { row: i, col: j });
            }
        }
    }

    let n = entries.rows();
    let mut report = ValidationReport::new();

    for i in 0..n {
        for j in 0..n {
            let v = entries.at(i, j);
            if v < 0.0 {
                report.push(GraphViolation::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    for i in 0..n {
        let sum: f64 = entries.row(i).iter().sum();
        if (sum - 1.0).abs() > row_tol {
            report.push(GraphViolation::RowSumMismatch { row: i, sum });
        }
    }
    // Self-loops are checked strictly: a zero diagonal entry is a violation
    // no matter how small the tolerance elsewhere.
    for i in 0..n {
        let v = entries.at(i, i);
        if v <= 0.0 {
            report.push(GraphViolation::NonPositiveDiagonal { index: i, value: v });
        }
    }
    if !strongly_connected(entries) {
        report.push(GraphViolation::NotStronglyConnected);
    }

    Ok(report)
}

/// Smallest diagonal entry of a communication matrix.
pub fn min_self_loop(entries: &Mat) -> f64 {
    entries.diag().into_iter().fold(f64::INFINITY, f64::min)
}

/// `M ⊗ I_n`, expanding an agent-level coupling matrix so it acts on stacked
/// n-dimensional agent states block by block.
pub fn kron_lift(m: &Mat, n: usize) -> Result<LiftedMatrix, GraphError> {
    if n == 0 {
        return Err(GraphError::ZeroBlockDim);
    }
    if !m.is_square() {
        return Err(GraphError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(LiftedMatrix {
        entries: m.kron_identity(n),
        base_dim: m.rows(),
        block_dim: n,
    })
}

/// `base ⊗ I_n` stored densely. Block (i, j) equals `base_ij · I_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedMatrix {
    entries: Mat,
    base_dim: usize,
    block_dim: usize,
}

impl LiftedMatrix {
    pub fn entries(&self) -> &Mat {
        &self.entries
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.entries.matvec(x)
    }
}

/// Strong connectivity of the support digraph (edge i -> j iff a_ij > 0,
/// "i listens to j"). Self-loops never affect the outcome. Uses Tarjan's
/// single-pass SCC count, iteratively to avoid recursion depth limits.
fn strongly_connected(entries: &Mat) -> bool {
    let n = entries.rows();
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }

    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && entries.at(i, j) > 0.0)
                .collect()
        })
        .collect();

    // Tarjan, iterative. One SCC containing every node means strongly connected.
    let mut index = vec![usize::MAX; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut scc_count = 0usize;

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        // (node, next child position)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        lowlink[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut ci)) = call.last_mut() {
            if *ci < adj[v].len() {
                let w = adj[v][*ci];
                *ci += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    lowlink[parent] = lowlink[parent].min(lowlink[v]);
                }
                if lowlink[v] == index[v] {
                    scc_count += 1;
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        if w == v {
                            break;
                        }
                    }
                }
            }
        }
    }

    scc_count == 1
}
