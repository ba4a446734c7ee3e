//! Network equilibrium seeking for multi-agent games via proximal dynamics.
//!
//! Agents coupled through a communication graph repeatedly replace their
//! state with the proximal point of a private cost evaluated at the weighted
//! average of their neighbors' states. This crate provides:
//!
//! - validation of communication matrices and their Kronecker lifts ([`graph`]),
//! - exact projections and weighted proximal operators ([`prox`]),
//! - synthesis and verification of the weight matrix certifying convergence
//!   via a linear matrix inequality ([`certify`]),
//! - time-invariant fixed-point iteration and the explicit projected
//!   forward-backward update ([`dynamics`]),
//! - dwell-time switched dynamics with persistent-equilibrium residuals and
//!   the dwell-time lower bound ([`switching`]),
//! - a planar multi-robot exploration scenario with obstacle avoidance
//!   ([`scenario`]).

pub mod certify;
pub mod dynamics;
pub mod graph;
pub mod linalg;
pub mod prox;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod switching;

pub use certify::{
    check_feasible, lmi_residual, solve_diagonal_q, symmetric_min_eig, CertifyError,
    FeasibilityCertificate, LmiSynthesis, WeightMatrix,
};
pub use dynamics::{
    fb_step, iterate, iterate_strided, nwe_residual, picard_step, DynamicsError, GameInstance,
    Trajectory,
};
pub use graph::{
    kron_lift, min_self_loop, validate_adjacency, AdjacencyMatrix, GraphError, GraphViolation,
    LiftedMatrix, DEFAULT_ROW_TOL,
};
pub use linalg::Mat;
pub use prox::{
    project, prox_agent, prox_collective, prox_numerical_oracle, prox_with_fallback, AgentCost,
    AgentProfile, BoxRegion, CollectiveState, ConvexSet, ProxError,
};
pub use report::ValidationReport;
pub use scenario::{
    build_constraint, run_exploration, ExplorationRun, ObstacleSet, RobotScenario, ScenarioError,
    DISPLACEMENT_TOL,
};
pub use switching::{
    contraction_diagnostic, dwell_lower_bound, pnwe_residual, switched_iterate, validate_signal,
    ContractionReport, SignalSegment, SignalViolation, SwitchError, SwitchMode, SwitchedSystem,
    SwitchingSignal,
};
