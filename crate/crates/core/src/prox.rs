//! Convex constraint sets with exact projections and weighted proximal
//! operators for quadratic-target agent costs.
//!
//! An agent cost is `γ/2‖y − x*‖²_Q + ι_X(y) + ½‖y − z‖²_Q` with diagonal
//! positive-definite `Q`: a pull toward a private target, a hard constraint,
//! and a coupling to the weighted neighborhood average `z`. Its proximal
//! evaluation has a closed form whenever the weighted projection onto the
//! constraint coincides with the Euclidean one (scalar weights for every set
//! variant, diagonal weights for boxes); everything else routes to the
//! projected-gradient fallback.

use crate::linalg::{norm, sub_vec};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProxError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid cost parameter: {0}")]
    InvalidParameter(String),
    #[error(
        "unsupported weight/constraint combination ({0}); \
         use the projected-gradient fallback `prox_numerical_oracle`"
    )]
    UnsupportedConfiguration(String),
    #[error("projected-gradient fallback did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },
}

/// Axis-aligned box `{ x : lo_d ≤ x_d ≤ hi_d }`.
///
/// Corners are the stored representation: every geometric query (membership,
/// projection, overlap) compares against the same corner values, so a point
/// clamped onto a box built from another box's corner can never drift an ulp
/// across that boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxRegion {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(center: Vec<f64>, half_width: Vec<f64>) -> Result<Self, ProxError> {
        if center.len() != half_width.len() {
            return Err(ProxError::DimensionMismatch {
                expected: center.len(),
                got: half_width.len(),
            });
        }
        if half_width.iter().any(|h| !h.is_finite() || *h < 0.0) {
            return Err(ProxError::InvalidParameter(
                "box half-widths must be finite and nonnegative".into(),
            ));
        }
        let lo = center.iter().zip(&half_width).map(|(c, h)| c - h).collect();
        let hi = center.iter().zip(&half_width).map(|(c, h)| c + h).collect();
        Ok(BoxRegion { lo, hi })
    }

    pub fn from_corners(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, ProxError> {
        if lo.len() != hi.len() {
            return Err(ProxError::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(l, h)| !l.is_finite() || !h.is_finite() || l > h)
        {
            return Err(ProxError::InvalidParameter(
                "box corners must be finite with lo ≤ hi".into(),
            ));
        }
        Ok(BoxRegion { lo, hi })
    }

    /// Zero-volume box holding a single point.
    pub fn singleton(point: Vec<f64>) -> Self {
        BoxRegion {
            lo: point.clone(),
            hi: point,
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (l + h))
            .collect()
    }

    pub fn half_width(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (h - l))
            .collect()
    }

    pub fn min_corner(&self) -> &[f64] {
        &self.lo
    }

    pub fn max_corner(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.lo)
            .zip(&self.hi)
            .all(|((xi, lo), hi)| lo <= xi && xi <= hi)
    }

    /// Strict interior membership.
    pub fn contains_interior(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.lo)
            .zip(&self.hi)
            .all(|((xi, lo), hi)| lo < xi && xi < hi)
    }

    /// Coordinatewise clamp.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.lo)
            .zip(&self.hi)
            .map(|((xi, lo), hi)| xi.clamp(*lo, *hi))
            .collect()
    }

    /// Whether the open interiors of `self` and `other` overlap.
    pub fn intersects_interior(&self, other: &BoxRegion) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(other.lo.iter().zip(&other.hi))
            .all(|((lo1, hi1), (lo2, hi2))| lo1 < hi2 && lo2 < hi1)
    }

    /// Product of edge lengths.
    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }
}

/// Projectable local constraint set.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexSet {
    Box(BoxRegion),
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// A box carved out of `outer` to avoid `obstacle`; projections use the
    /// pre-resolved convex `resolved` box.
    SubBox {
        outer: BoxRegion,
        obstacle: BoxRegion,
        resolved: BoxRegion,
    },
}

impl ConvexSet {
    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Box(b) => b.dim(),
            ConvexSet::Ball { center, .. } => center.len(),
            ConvexSet::SubBox { resolved, .. } => resolved.dim(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            ConvexSet::Box(b) => b.contains(x),
            ConvexSet::Ball { center, radius } => norm(&sub_vec(x, center)) <= *radius,
            ConvexSet::SubBox { resolved, .. } => resolved.contains(x),
        }
    }

    fn is_box_like(&self) -> bool {
        matches!(self, ConvexSet::Box(_) | ConvexSet::SubBox { .. })
    }
}

/// Euclidean projection onto `set`: clamping for boxes, radial scaling for
/// balls, clamping onto the resolved box for carved boxes.
pub fn project(set: &ConvexSet, x: &[f64]) -> Vec<f64> {
    match set {
        ConvexSet::Box(b) => b.project(x),
        ConvexSet::Ball { center, radius } => {
            let d = sub_vec(x, center);
            let dist = norm(&d);
            if dist <= *radius {
                x.to_vec()
            } else {
                center
                    .iter()
                    .zip(&d)
                    .map(|(c, di)| c + (di * radius) / dist)
                    .collect()
            }
        }
        ConvexSet::SubBox { resolved, .. } => resolved.project(x),
    }
}

/// Shared per-agent data without the coupling weight: the "discover" gain,
/// the private target, and the constraint set.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentProfile {
    pub gamma: f64,
    pub target: Vec<f64>,
    pub constraint: ConvexSet,
}

impl AgentProfile {
    pub fn new(gamma: f64, target: Vec<f64>, constraint: ConvexSet) -> Result<Self, ProxError> {
        if gamma < 0.0 || !gamma.is_finite() {
            return Err(ProxError::InvalidParameter(
                "discover gain must be finite and nonnegative".into(),
            ));
        }
        if target.len() != constraint.dim() {
            return Err(ProxError::DimensionMismatch {
                expected: constraint.dim(),
                got: target.len(),
            });
        }
        Ok(AgentProfile {
            gamma,
            target,
            constraint,
        })
    }

    /// Attaches a scalar coupling weight `q · I_n`.
    pub fn with_scalar_weight(&self, q: f64) -> Result<AgentCost, ProxError> {
        AgentCost::new(
            self.gamma,
            self.target.clone(),
            self.constraint.clone(),
            vec![q; self.target.len()],
        )
    }
}

/// Quadratic-target local cost with a diagonal positive-definite weight.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentCost {
    pub gamma: f64,
    pub target: Vec<f64>,
    pub constraint: ConvexSet,
    /// Diagonal of the n×n weight matrix.
    pub weight: Vec<f64>,
}

impl AgentCost {
    pub fn new(
        gamma: f64,
        target: Vec<f64>,
        constraint: ConvexSet,
        weight: Vec<f64>,
    ) -> Result<Self, ProxError> {
        let profile = AgentProfile::new(gamma, target, constraint)?;
        if weight.len() != profile.target.len() {
            return Err(ProxError::DimensionMismatch {
                expected: profile.target.len(),
                got: weight.len(),
            });
        }
        if weight.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(ProxError::InvalidParameter(
                "weight diagonal entries must be finite and strictly positive".into(),
            ));
        }
        Ok(AgentCost {
            gamma: profile.gamma,
            target: profile.target,
            constraint: profile.constraint,
            weight,
        })
    }

    pub fn dim(&self) -> usize {
        self.target.len()
    }

    pub fn has_scalar_weight(&self) -> bool {
        self.weight.iter().all(|&w| w == self.weight[0])
    }

    /// Weighted squared norm `‖v‖²_Q` with this cost's diagonal weight.
    pub fn weighted_sq(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.weight).map(|(vi, w)| w * vi * vi).sum()
    }

    /// Smooth part of the objective at `y` given the coupling point `z`
    /// (the constraint indicator is handled by the caller).
    pub fn objective(&self, y: &[f64], z: &[f64]) -> f64 {
        let to_target = sub_vec(y, &self.target);
        let to_coupling = sub_vec(y, z);
        0.5 * self.gamma * self.weighted_sq(&to_target) + 0.5 * self.weighted_sq(&to_coupling)
    }
}

impl fmt::Display for AgentCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AgentCost(gamma={}, dim={})", self.gamma, self.dim())
    }
}

/// Closed-form weighted proximal evaluation:
/// `argmin_y γ/2‖y−x*‖²_Q + ι_X(y) + ½‖y−z‖²_Q = proj_X((γ·x* + z)/(1+γ))`.
///
/// Exact when the Q-weighted and Euclidean projections onto the constraint
/// coincide: scalar `Q = q·I` for any supported set, or diagonal `Q` with a
/// box constraint (coordinatewise separability). Other combinations are
/// rejected so the caller can fall back to `prox_numerical_oracle`.
pub fn prox_agent(cost: &AgentCost, z: &[f64]) -> Result<Vec<f64>, ProxError> {
    if z.len() != cost.dim() {
        return Err(ProxError::DimensionMismatch {
            expected: cost.dim(),
            got: z.len(),
        });
    }
    if !cost.has_scalar_weight() && !cost.constraint.is_box_like() {
        return Err(ProxError::UnsupportedConfiguration(
            "non-scalar diagonal weight with a non-box constraint".into(),
        ));
    }
    let g = cost.gamma;
    let unconstrained: Vec<f64> = cost
        .target
        .iter()
        .zip(z)
        .map(|(t, zi)| (g * t + zi) / (1.0 + g))
        .collect();
    Ok(project(&cost.constraint, &unconstrained))
}

/// Iteration cap of the projected-gradient fallback.
pub const PROX_ORACLE_MAX_ITER: usize = 1_000_000;
/// Default stopping tolerance of the projected-gradient fallback.
pub const PROX_ORACLE_DEFAULT_TOL: f64 = 1e-10;

/// Projected gradient descent on the same objective, with step `1/L`,
/// `L = (1+γ)·max diag(Q)`, stopping once successive iterates differ by
/// less than `tol`. Serves as the general-purpose route and as the
/// independent cross-check for `prox_agent`.
pub fn prox_numerical_oracle(cost: &AgentCost, z: &[f64], tol: f64) -> Result<Vec<f64>, ProxError> {
    if z.len() != cost.dim() {
        return Err(ProxError::DimensionMismatch {
            expected: cost.dim(),
            got: z.len(),
        });
    }
    if tol <= 0.0 {
        return Err(ProxError::InvalidParameter(
            "tolerance must be positive".into(),
        ));
    }
    let g = cost.gamma;
    let max_w = cost.weight.iter().fold(0.0f64, |m, w| m.max(*w));
    let step = 1.0 / ((1.0 + g) * max_w);

    let mut y = project(&cost.constraint, z);
    for _ in 0..PROX_ORACLE_MAX_ITER {
        // ∇F(y) = γ·Q(y − x*) + Q(y − z)
        let grad: Vec<f64> = (0..y.len())
            .map(|d| cost.weight[d] * (g * (y[d] - cost.target[d]) + (y[d] - z[d])))
            .collect();
        let trial: Vec<f64> = y.iter().zip(&grad).map(|(yi, gi)| yi - step * gi).collect();
        let next = project(&cost.constraint, &trial);
        let delta = norm(&sub_vec(&next, &y));
        y = next;
        if delta < tol {
            return Ok(y);
        }
    }
    Err(ProxError::NonConvergence {
        iterations: PROX_ORACLE_MAX_ITER,
    })
}

/// Closed form when supported, projected-gradient fallback otherwise.
pub fn prox_with_fallback(cost: &AgentCost, z: &[f64]) -> Result<Vec<f64>, ProxError> {
    match prox_agent(cost, z) {
        Ok(y) => Ok(y),
        Err(ProxError::UnsupportedConfiguration(_)) => {
            prox_numerical_oracle(cost, z, PROX_ORACLE_DEFAULT_TOL)
        }
        Err(e) => Err(e),
    }
}

/// Stacked per-agent states: N blocks of dimension n, stored flat.
#[derive(Clone, Debug, PartialEq)]
pub struct CollectiveState {
    data: Vec<f64>,
    block_dim: usize,
}

impl CollectiveState {
    pub fn new(data: Vec<f64>, block_dim: usize) -> Result<Self, ProxError> {
        if block_dim == 0 || !data.len().is_multiple_of(block_dim) {
            return Err(ProxError::DimensionMismatch {
                expected: block_dim.max(1),
                got: data.len(),
            });
        }
        Ok(CollectiveState { data, block_dim })
    }

    pub fn from_blocks(blocks: &[Vec<f64>]) -> Result<Self, ProxError> {
        if blocks.is_empty() {
            return Err(ProxError::InvalidParameter("no blocks".into()));
        }
        let n = blocks[0].len();
        if blocks.iter().any(|b| b.len() != n) {
            return Err(ProxError::DimensionMismatch {
                expected: n,
                got: 0,
            });
        }
        CollectiveState::new(blocks.iter().flatten().copied().collect(), n)
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn block_count(&self) -> usize {
        self.data.len() / self.block_dim
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.data[i * self.block_dim..(i + 1) * self.block_dim]
    }

    pub fn flat(&self) -> &[f64] {
        &self.data
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.block_dim)
    }
}

/// Blockwise proximal evaluation: block i of the output is the proximal
/// point of cost i at block i of `z`. Blocks are independent.
pub fn prox_collective(
    costs: &[AgentCost],
    z: &CollectiveState,
) -> Result<CollectiveState, ProxError> {
    if costs.len() != z.block_count() {
        return Err(ProxError::DimensionMismatch {
            expected: costs.len(),
            got: z.block_count(),
        });
    }
    let mut out = Vec::with_capacity(z.flat().len());
    for (i, cost) in costs.iter().enumerate() {
        if cost.dim() != z.block_dim() {
            return Err(ProxError::DimensionMismatch {
                expected: z.block_dim(),
                got: cost.dim(),
            });
        }
        out.extend(prox_with_fallback(cost, z.block(i))?);
    }
    CollectiveState::new(out, z.block_dim())
}
