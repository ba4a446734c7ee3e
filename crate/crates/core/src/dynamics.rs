//! Time-invariant proximal dynamics: fixed-point iteration of the
//! neighborhood-average-then-prox map, the explicit projected
//! forward-backward update, and network-equilibrium residuals.
//!
//! A network equilibrium is a collective state where every agent's block
//! minimizes its own cost given the weighted average of its neighbors'
//! blocks; equivalently, a fixed point of the collective prox∘A map.

use crate::certify::WeightMatrix;
use crate::graph::{AdjacencyMatrix, LiftedMatrix};
use crate::linalg::sub_vec;
use crate::prox::{prox_collective, AgentCost, CollectiveState, ConvexSet, ProxError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("averaging parameter must lie in (0,1), got {eta}")]
    EtaOutOfRange { eta: f64 },
    #[error(
        "cost weight of agent {agent} does not match the weight matrix diagonal \
         (expected {expected}, got {got})"
    )]
    InconsistentWeights {
        agent: usize,
        expected: f64,
        got: f64,
    },
    #[error("step size must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error(transparent)]
    Prox(#[from] ProxError),
}

/// Default stopping tolerance of `iterate`, in the weighted norm.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default iteration cap of `iterate`.
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// One game: communication matrix, per-agent costs, and the weight matrix
/// certifying convergence. The per-agent cost weights must agree with the
/// weight matrix diagonal so that the collective prox and the certifying
/// norm describe the same operator.
#[derive(Clone, Debug)]
pub struct GameInstance {
    adjacency: AdjacencyMatrix,
    costs: Vec<AgentCost>,
    qtilde: WeightMatrix,
    eta: f64,
    state_dim: usize,
    lifted: LiftedMatrix,
}

impl GameInstance {
    pub fn new(
        adjacency: AdjacencyMatrix,
        costs: Vec<AgentCost>,
        qtilde: WeightMatrix,
        eta: f64,
    ) -> Result<Self, DynamicsError> {
        if !(0.0 < eta && eta < 1.0) {
            return Err(DynamicsError::EtaOutOfRange { eta });
        }
        let agents = adjacency.agent_count();
        if costs.len() != agents {
            return Err(DynamicsError::DimensionMismatch {
                expected: agents,
                got: costs.len(),
            });
        }
        if qtilde.dim() != agents {
            return Err(DynamicsError::DimensionMismatch {
                expected: agents,
                got: qtilde.dim(),
            });
        }
        let state_dim = costs[0].dim();
        for cost in &costs {
            if cost.dim() != state_dim {
                return Err(DynamicsError::DimensionMismatch {
                    expected: state_dim,
                    got: cost.dim(),
                });
            }
        }
        if qtilde.is_diagonal() {
            let diag = qtilde.diag_entries();
            for (i, cost) in costs.iter().enumerate() {
                for &w in &cost.weight {
                    if (w - diag[i]).abs() > 1e-12 * diag[i].abs().max(1.0) {
                        return Err(DynamicsError::InconsistentWeights {
                            agent: i,
                            expected: diag[i],
                            got: w,
                        });
                    }
                }
            }
        }
        let lifted = adjacency
            .lift(state_dim)
            .expect("state dimension is positive");
        Ok(GameInstance {
            adjacency,
            costs,
            qtilde,
            eta,
            state_dim,
            lifted,
        })
    }

    pub fn adjacency(&self) -> &AdjacencyMatrix {
        &self.adjacency
    }

    pub fn costs(&self) -> &[AgentCost] {
        &self.costs
    }

    pub fn weight_matrix(&self) -> &WeightMatrix {
        &self.qtilde
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn agent_count(&self) -> usize {
        self.adjacency.agent_count()
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn lifted_adjacency(&self) -> &LiftedMatrix {
        &self.lifted
    }

    /// Same game with every agent's constraint set replaced. Used by the
    /// exploration scenario, which rebuilds constraints each step.
    pub fn with_constraints(&self, constraints: Vec<ConvexSet>) -> Result<Self, DynamicsError> {
        if constraints.len() != self.costs.len() {
            return Err(DynamicsError::DimensionMismatch {
                expected: self.costs.len(),
                got: constraints.len(),
            });
        }
        let mut game = self.clone();
        for (cost, constraint) in game.costs.iter_mut().zip(constraints) {
            if constraint.dim() != self.state_dim {
                return Err(DynamicsError::DimensionMismatch {
                    expected: self.state_dim,
                    got: constraint.dim(),
                });
            }
            cost.constraint = constraint;
        }
        Ok(game)
    }

    fn check_state(&self, x: &CollectiveState) -> Result<(), DynamicsError> {
        if x.block_count() != self.agent_count() || x.block_dim() != self.state_dim {
            return Err(DynamicsError::DimensionMismatch {
                expected: self.agent_count() * self.state_dim,
                got: x.flat().len(),
            });
        }
        Ok(())
    }
}

/// Recorded run of the dynamics. `residuals[k]` is the weighted step
/// residual measured when leaving `states[k]`, so there is one residual per
/// transition; `modes[k]` is the communication mode applied at that step
/// (always 1 for time-invariant runs).
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<CollectiveState>,
    pub residuals: Vec<f64>,
    pub modes: Vec<usize>,
    pub converged: bool,
    pub iterations: usize,
    /// Whether the initial state had to be projected into the constraints.
    pub start_projected: bool,
}

impl Trajectory {
    pub fn final_state(&self) -> &CollectiveState {
        self.states
            .last()
            .expect("trajectory holds at least the initial state")
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residuals.last().copied()
    }
}

/// One step of the proximal dynamics: prox of the lifted neighborhood
/// average, blockwise.
pub fn picard_step(
    game: &GameInstance,
    x: &CollectiveState,
) -> Result<CollectiveState, DynamicsError> {
    game.check_state(x)?;
    let averaged = CollectiveState::new(game.lifted.apply(x.flat()), game.state_dim)?;
    Ok(prox_collective(&game.costs, &averaged)?)
}

/// Weighted fixed-point residual `‖T(x) − x‖` in the lifted weight norm;
/// zero exactly at a network equilibrium.
pub fn nwe_residual(game: &GameInstance, x: &CollectiveState) -> Result<f64, DynamicsError> {
    let next = picard_step(game, x)?;
    let diff = sub_vec(next.flat(), x.flat());
    Ok(game.qtilde.lifted_norm(&diff, game.state_dim))
}

/// Repeats `picard_step` until the weighted step residual drops below `tol`
/// or `max_iter` steps elapse. Every state is stored.
pub fn iterate(
    game: &GameInstance,
    x0: &CollectiveState,
    tol: f64,
    max_iter: usize,
) -> Result<Trajectory, DynamicsError> {
    iterate_strided(game, x0, tol, max_iter, 1)
}

/// `iterate` with thinned storage: every `stride`-th state (plus the final
/// one) is kept, with residual and mode samples aligned to the kept states.
pub fn iterate_strided(
    game: &GameInstance,
    x0: &CollectiveState,
    tol: f64,
    max_iter: usize,
    stride: usize,
) -> Result<Trajectory, DynamicsError> {
    game.check_state(x0)?;
    let stride = stride.max(1);

    // project the start into the constraints if needed
    let mut start = x0.clone();
    let mut start_projected = false;
    for (i, cost) in game.costs.iter().enumerate() {
        if !cost.constraint.contains(start.block(i)) {
            start_projected = true;
            break;
        }
    }
    if start_projected {
        let blocks: Vec<Vec<f64>> = game
            .costs
            .iter()
            .enumerate()
            .map(|(i, cost)| crate::prox::project(&cost.constraint, start.block(i)))
            .collect();
        start = CollectiveState::from_blocks(&blocks)?;
    }

    let mut states = vec![start.clone()];
    let mut residuals = Vec::new();
    let mut modes = Vec::new();
    let mut current = start;
    let mut converged = false;
    let mut iterations = 0;

    for k in 0..max_iter {
        let next = picard_step(game, &current)?;
        let step = sub_vec(next.flat(), current.flat());
        let residual = game.qtilde.lifted_norm(&step, game.state_dim);
        iterations = k + 1;
        let done = residual < tol;
        if done || (k + 1) % stride == 0 || k + 1 == max_iter {
            states.push(next.clone());
            residuals.push(residual);
            modes.push(1);
        }
        current = next;
        if done {
            converged = true;
            break;
        }
    }

    Ok(Trajectory {
        states,
        residuals,
        modes,
        converged,
        iterations,
        start_projected,
    })
}

/// Explicit projected forward-backward update:
/// block i moves along `−ε(γ_i Q_i (x_i − x*_i) + (1 − a_ii)(x_i − (Ax)_i))`
/// and is then projected onto its constraint set.
pub fn fb_step(
    game: &GameInstance,
    x: &CollectiveState,
    epsilon: f64,
) -> Result<CollectiveState, DynamicsError> {
    game.check_state(x)?;
    // ε = 0 degenerates to a plain projection, which is allowed
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(DynamicsError::NonPositiveStep(epsilon));
    }
    let averaged = game.lifted.apply(x.flat());
    let n = game.state_dim;
    let mut blocks = Vec::with_capacity(game.agent_count());
    for (i, cost) in game.costs.iter().enumerate() {
        let xi = x.block(i);
        let zi = &averaged[i * n..(i + 1) * n];
        let damping = 1.0 - game.adjacency.entries().at(i, i);
        let moved: Vec<f64> = (0..n)
            .map(|d| {
                let target_pull = cost.weight[d] * cost.gamma * (xi[d] - cost.target[d]);
                let coupling_pull = damping * (xi[d] - zi[d]);
                xi[d] - epsilon * (target_pull + coupling_pull)
            })
            .collect();
        blocks.push(crate::prox::project(&cost.constraint, &moved));
    }
    Ok(CollectiveState::from_blocks(&blocks)?)
}
