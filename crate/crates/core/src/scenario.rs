//! Multi-robot exploration in the plane: per-step moving constraint boxes,
//! obstacle-aware constraint carving, and end-to-end simulation runs.
//!
//! Each robot may move anywhere inside a square of edge `r` centered at its
//! current position. When that square overlaps an obstacle, the constraint
//! becomes the largest of the four axis-aligned sub-boxes lying entirely to
//! the left of, right of, below, or above the obstacle.

use crate::certify::WeightMatrix;
use crate::dynamics::{fb_step, nwe_residual, DynamicsError, GameInstance, Trajectory};
use crate::graph::AdjacencyMatrix;
use crate::linalg::{norm, sub_vec};
use crate::prox::{AgentCost, BoxRegion, CollectiveState, ConvexSet, ProxError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("robot position {pos:?} lies inside an obstacle")]
    PositionInsideObstacle { pos: Vec<f64> },
    #[error("constraint box at {pos:?} is swallowed by an obstacle")]
    DegenerateConstraint { pos: Vec<f64> },
    #[error("scenario is planar: positions must have dimension 2, got {0}")]
    NotPlanar(usize),
    #[error("obstacle half-widths must be strictly positive")]
    DegenerateObstacle,
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Prox(#[from] ProxError),
}

/// Collection of axis-aligned rectangular obstacles.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObstacleSet {
    boxes: Vec<BoxRegion>,
}

impl ObstacleSet {
    pub fn new(boxes: Vec<BoxRegion>) -> Result<Self, ScenarioError> {
        for b in &boxes {
            if b.half_width().iter().any(|&h| h <= 0.0) {
                return Err(ScenarioError::DegenerateObstacle);
            }
        }
        Ok(ObstacleSet { boxes })
    }

    pub fn empty() -> Self {
        ObstacleSet { boxes: Vec::new() }
    }

    pub fn boxes(&self) -> &[BoxRegion] {
        &self.boxes
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn contains_interior(&self, pos: &[f64]) -> bool {
        self.boxes.iter().any(|b| b.contains_interior(pos))
    }

    /// The obstacle whose interior overlaps `region`, nearest to `pos`
    /// (ties broken by listing order).
    fn nearest_intersecting(&self, region: &BoxRegion, pos: &[f64]) -> Option<&BoxRegion> {
        let mut best: Option<(&BoxRegion, f64)> = None;
        for b in &self.boxes {
            if !b.intersects_interior(region) {
                continue;
            }
            let d = norm(&sub_vec(&b.project(pos), pos));
            match best {
                Some((_, bd)) if bd <= d => {}
                _ => best = Some((b, d)),
            }
        }
        best.map(|(b, _)| b)
    }
}

/// Moving-box constraint for one robot at `pos`: the square of edge `r`
/// centered there, carved down to the largest axis-aligned sub-box clear of
/// the nearest overlapping obstacle. Ties between equally large candidates
/// go left, right, below, above, in that order.
pub fn build_constraint(
    pos: &[f64],
    edge: f64,
    obstacles: &ObstacleSet,
) -> Result<ConvexSet, ScenarioError> {
    if pos.len() != 2 {
        return Err(ScenarioError::NotPlanar(pos.len()));
    }
    if !edge.is_finite() || edge <= 0.0 {
        return Err(ScenarioError::Invalid("box edge must be positive".into()));
    }
    if obstacles.contains_interior(pos) {
        return Err(ScenarioError::PositionInsideObstacle { pos: pos.to_vec() });
    }
    let half = edge / 2.0;
    let outer = BoxRegion::new(pos.to_vec(), vec![half, half]).expect("positive half-widths");

    let Some(obstacle) = obstacles.nearest_intersecting(&outer, pos) else {
        return Ok(ConvexSet::Box(outer));
    };

    let o_min = outer.min_corner().to_vec();
    let o_max = outer.max_corner().to_vec();
    let a_min = obstacle.min_corner().to_vec();
    let a_max = obstacle.max_corner().to_vec();

    // the four sub-boxes of the outer square lying entirely beside the
    // obstacle, in tie-break order: left, right, below, above; corners are
    // taken verbatim from the outer box and the obstacle so projections
    // onto the winner cannot creep past the obstacle boundary
    let candidates = [
        (o_min[0], a_min[0].min(o_max[0]), o_min[1], o_max[1]),
        (a_max[0].max(o_min[0]), o_max[0], o_min[1], o_max[1]),
        (o_min[0], o_max[0], o_min[1], a_min[1].min(o_max[1])),
        (o_min[0], o_max[0], a_max[1].max(o_min[1]), o_max[1]),
    ];

    let mut best: Option<BoxRegion> = None;
    let mut best_area = 0.0f64;
    for (x0, x1, y0, y1) in candidates {
        let w = x1 - x0;
        let h = y1 - y0;
        if w <= 0.0 || h <= 0.0 {
            continue;
        }
        let area = w * h;
        if area > best_area {
            best_area = area;
            best = Some(
                BoxRegion::from_corners(vec![x0, y0], vec![x1, y1])
                    .expect("candidate corners are ordered"),
            );
        }
    }

    match best {
        Some(resolved) => Ok(ConvexSet::SubBox {
            outer,
            obstacle: obstacle.clone(),
            resolved,
        }),
        None => Err(ScenarioError::DegenerateConstraint { pos: pos.to_vec() }),
    }
}

/// Full description of an exploration run.
#[derive(Clone, Debug)]
pub struct RobotScenario {
    pub initial: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    pub gammas: Vec<f64>,
    /// Edge length of the per-step movement square.
    pub box_edge: f64,
    pub epsilon: f64,
    pub obstacles: ObstacleSet,
    pub adjacency: AdjacencyMatrix,
    pub qtilde: WeightMatrix,
    pub eta: f64,
    pub steps: usize,
}

/// Early-stop threshold on the collective per-step displacement.
pub const DISPLACEMENT_TOL: f64 = 1e-9;

impl RobotScenario {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        initial: Vec<Vec<f64>>,
        targets: Vec<Vec<f64>>,
        gammas: Vec<f64>,
        box_edge: f64,
        epsilon: f64,
        obstacles: ObstacleSet,
        adjacency: AdjacencyMatrix,
        qtilde: WeightMatrix,
        eta: f64,
        steps: usize,
    ) -> Result<Self, ScenarioError> {
        let n_robots = adjacency.agent_count();
        for (name, len) in [
            ("initial positions", initial.len()),
            ("targets", targets.len()),
            ("discover gains", gammas.len()),
        ] {
            if len != n_robots {
                return Err(ScenarioError::Invalid(format!(
                    "{name}: expected {n_robots} entries, got {len}"
                )));
            }
        }
        for p in initial.iter().chain(targets.iter()) {
            if p.len() != 2 {
                return Err(ScenarioError::NotPlanar(p.len()));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(ScenarioError::Invalid("positions must be finite".into()));
            }
        }
        if !box_edge.is_finite() || box_edge <= 0.0 {
            return Err(ScenarioError::Invalid("box edge must be positive".into()));
        }
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(ScenarioError::Invalid("step size must be positive".into()));
        }
        if !(0.0 < eta && eta < 1.0) {
            return Err(ScenarioError::Invalid(format!(
                "averaging parameter must lie in (0,1), got {eta}"
            )));
        }
        if !qtilde.is_diagonal() {
            return Err(ScenarioError::Invalid(
                "scenario weight matrix must be diagonal".into(),
            ));
        }
        if qtilde.dim() != n_robots {
            return Err(ScenarioError::DimensionMismatch {
                expected: n_robots,
                got: qtilde.dim(),
            });
        }
        for pos in &initial {
            if obstacles.contains_interior(pos) {
                return Err(ScenarioError::PositionInsideObstacle { pos: pos.clone() });
            }
        }
        Ok(RobotScenario {
            initial,
            targets,
            gammas,
            box_edge,
            epsilon,
            obstacles,
            adjacency,
            qtilde,
            eta,
            steps,
        })
    }

    pub fn robot_count(&self) -> usize {
        self.adjacency.agent_count()
    }

    /// Same scenario with the obstacles removed.
    pub fn without_obstacles(&self) -> RobotScenario {
        let mut scn = self.clone();
        scn.obstacles = ObstacleSet::empty();
        scn
    }
}

/// Result of `run_exploration`: the collective trajectory (residual column
/// holds the collective per-step displacement), per-robot stall flags, and
/// the equilibrium residual at the final state under its final constraints.
#[derive(Clone, Debug)]
pub struct ExplorationRun {
    pub trajectory: Trajectory,
    pub stalled: Vec<bool>,
    pub final_nwe_residual: f64,
}

impl ExplorationRun {
    /// Positions of robot `i` along the run.
    pub fn robot_path(&self, i: usize) -> Vec<Vec<f64>> {
        self.trajectory
            .states
            .iter()
            .map(|s| s.block(i).to_vec())
            .collect()
    }

    pub fn final_position(&self, i: usize) -> &[f64] {
        self.trajectory.final_state().block(i)
    }
}

/// Steps the projected forward-backward dynamics with constraints rebuilt
/// around each robot's current position every step. A robot whose movement
/// square is swallowed by an obstacle is pinned in place for that step and
/// flagged as stalled; the run continues.
pub fn run_exploration(scn: &RobotScenario) -> Result<ExplorationRun, ScenarioError> {
    let n_robots = scn.robot_count();
    let diag = scn.qtilde.diag_entries();

    // base game built once; only the constraint sets change per step
    let base_costs = (0..n_robots)
        .map(|i| {
            AgentCost::new(
                scn.gammas[i],
                scn.targets[i].clone(),
                ConvexSet::Box(BoxRegion::singleton(scn.initial[i].clone())),
                vec![diag[i]; 2],
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let base_game = GameInstance::new(
        scn.adjacency.clone(),
        base_costs,
        scn.qtilde.clone(),
        scn.eta,
    )?;

    let constraints_at =
        |positions: &CollectiveState| -> Result<(Vec<ConvexSet>, Vec<bool>), ScenarioError> {
            let mut stalled = vec![false; n_robots];
            let mut sets = Vec::with_capacity(n_robots);
            for (i, flag) in stalled.iter_mut().enumerate() {
                let pos = positions.block(i);
                match build_constraint(pos, scn.box_edge, &scn.obstacles) {
                    Ok(c) => sets.push(c),
                    Err(ScenarioError::DegenerateConstraint { .. }) => {
                        *flag = true;
                        sets.push(ConvexSet::Box(BoxRegion::singleton(pos.to_vec())));
                    }
                    Err(e) => return Err(e),
                }
            }
            Ok((sets, stalled))
        };

    let mut current = CollectiveState::from_blocks(&scn.initial)?;
    let mut states = vec![current.clone()];
    let mut residuals = Vec::new();
    let mut modes = Vec::new();
    let mut ever_stalled = vec![false; n_robots];
    let mut converged = false;
    let mut iterations = 0;

    for k in 0..scn.steps {
        let (sets, stalled) = constraints_at(&current)?;
        for (flag, s) in ever_stalled.iter_mut().zip(&stalled) {
            *flag |= s;
        }
        let game = base_game.with_constraints(sets)?;
        let next = fb_step(&game, &current, scn.epsilon)?;
        let displacement = norm(&sub_vec(next.flat(), current.flat()));
        states.push(next.clone());
        residuals.push(displacement);
        modes.push(1);
        current = next;
        iterations = k + 1;
        if displacement < DISPLACEMENT_TOL {
            converged = true;
            break;
        }
    }

    // equilibrium residual at the final state, with constraints rebuilt there
    let (sets, _) = constraints_at(&current)?;
    let final_nwe_residual = nwe_residual(&base_game.with_constraints(sets)?, &current)?;

    Ok(ExplorationRun {
        trajectory: Trajectory {
            states,
            residuals,
            modes,
            converged,
            iterations,
            start_projected: false,
        },
        stalled: ever_stalled,
        final_nwe_residual,
    })
}
