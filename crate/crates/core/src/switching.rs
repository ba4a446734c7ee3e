//! Dwell-time switched proximal dynamics, persistent-equilibrium residuals,
//! the dwell-time lower bound, and contraction-envelope diagnostics.
//!
//! A switching signal selects, at each step, one of finitely many
//! communication modes; a mode bundles a communication matrix, a diagonal
//! weight matrix certifying averagedness, the averaging parameter, and a
//! linear-regularity constant. Convergence to a persistent network
//! equilibrium (a state fixed under every mode) is guaranteed when the
//! number of steps between switches exceeds a computable dwell time.

use crate::certify::{check_feasible, CertifyError, FeasibilityCertificate, WeightMatrix};
use crate::dynamics::{picard_step, DynamicsError, GameInstance, Trajectory};
use crate::graph::AdjacencyMatrix;
use crate::linalg::sub_vec;
use crate::prox::{AgentProfile, CollectiveState};
use crate::report::ValidationReport;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SwitchError {
    #[error("averaging parameter must lie in (0,1), got {eta}")]
    EtaOutOfRange { eta: f64 },
    #[error("linear-regularity constant must be positive, got {kappa}")]
    NonPositiveKappa { kappa: f64 },
    #[error("mode weight matrix must be diagonal")]
    NonDiagonalWeight,
    #[error("mode is not certified: residual min eigenvalue {lambda_min:.3e} (tol 1e-9)")]
    Uncertified { lambda_min: f64 },
    #[error("mode contraction factor must lie in (0,1) for the dwell bound, got {phi}")]
    InvalidContractionFactor { phi: f64 },
    #[error("at least one mode is required")]
    NoModes,
    #[error("switching signal failed validation: {0}")]
    InvalidSignal(ValidationReport<SignalViolation>),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// One communication mode: everything that switches. Agent costs are shared
/// across modes; only the coupling matrix and its certificate change.
#[derive(Clone, Debug)]
pub struct SwitchMode {
    adjacency: AdjacencyMatrix,
    qtilde: WeightMatrix,
    eta: f64,
    kappa: f64,
    certificate: FeasibilityCertificate,
}

impl SwitchMode {
    /// Builds and certifies a mode. The weight matrix must be diagonal and
    /// must pass the averagedness check for this adjacency at tolerance 1e-9.
    pub fn new(
        adjacency: AdjacencyMatrix,
        qtilde: WeightMatrix,
        eta: f64,
        kappa: f64,
    ) -> Result<Self, SwitchError> {
        if !(0.0 < eta && eta < 1.0) {
            return Err(SwitchError::EtaOutOfRange { eta });
        }
        if !kappa.is_finite() || kappa <= 0.0 {
            return Err(SwitchError::NonPositiveKappa { kappa });
        }
        if !qtilde.is_diagonal() {
            return Err(SwitchError::NonDiagonalWeight);
        }
        let certificate = check_feasible(&qtilde, &adjacency, eta, 1e-9)?;
        if !certificate.feasible {
            return Err(SwitchError::Uncertified {
                lambda_min: certificate.min_eigenvalue,
            });
        }
        Ok(SwitchMode {
            adjacency,
            qtilde,
            eta,
            kappa,
            certificate,
        })
    }

    pub fn adjacency(&self) -> &AdjacencyMatrix {
        &self.adjacency
    }

    pub fn weight_matrix(&self) -> &WeightMatrix {
        &self.qtilde
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn certificate(&self) -> &FeasibilityCertificate {
        &self.certificate
    }

    /// `α = (1−η)/η`.
    pub fn alpha(&self) -> f64 {
        (1.0 - self.eta) / self.eta
    }

    /// Per-mode contraction factor `φ = sqrt(κ²/α / (1 + κ²/α)) ∈ [0, 1)`.
    pub fn phi(&self) -> f64 {
        let ratio = self.kappa * self.kappa / self.alpha();
        (ratio / (1.0 + ratio)).sqrt()
    }

    pub fn lambda_min(&self) -> f64 {
        self.qtilde.min_diag()
    }

    pub fn lambda_max(&self) -> f64 {
        self.qtilde.max_diag()
    }
}

/// `(mode, duration)` run inside a switching schedule. Modes are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignalSegment {
    pub mode: usize,
    pub duration: usize,
}

/// Dwell-time-respecting switching schedule. Past its stored horizon the
/// schedule repeats cyclically, which also makes every listed mode recur
/// forever.
#[derive(Clone, Debug, PartialEq)]
pub struct SwitchingSignal {
    pub segments: Vec<SignalSegment>,
    pub tau: usize,
    /// When set, validation additionally requires every mode index to occur.
    pub exhaustive: bool,
}

impl SwitchingSignal {
    pub fn new(segments: Vec<(usize, usize)>, tau: usize, exhaustive: bool) -> Self {
        SwitchingSignal {
            segments: segments
                .into_iter()
                .map(|(mode, duration)| SignalSegment { mode, duration })
                .collect(),
            tau,
            exhaustive,
        }
    }

    pub fn horizon(&self) -> usize {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Active mode (1-based) at step `k`, repeating cyclically.
    pub fn mode_at(&self, k: usize) -> usize {
        let total = self.horizon();
        assert!(total > 0, "signal has no segments");
        let mut r = k % total;
        for seg in &self.segments {
            if r < seg.duration {
                return seg.mode;
            }
            r -= seg.duration;
        }
        unreachable!("segment walk covers the full horizon")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SignalViolation {
    DurationTooShort {
        segment: usize,
        duration: usize,
        tau: usize,
    },
    ModeOutOfRange {
        segment: usize,
        mode: usize,
        mode_count: usize,
    },
    ModeMissing {
        mode: usize,
    },
    Empty,
}

impl fmt::Display for SignalViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalViolation::DurationTooShort {
                segment,
                duration,
                tau,
            } => write!(
                f,
                "segment {segment} lasts {duration} steps, must strictly exceed dwell time {tau}"
            ),
            SignalViolation::ModeOutOfRange {
                segment,
                mode,
                mode_count,
            } => {
                write!(
                    f,
                    "segment {segment} names mode {mode}, valid range 1..={mode_count}"
                )
            }
            SignalViolation::ModeMissing { mode } => {
                write!(f, "mode {mode} never occurs in an exhaustive signal")
            }
            SignalViolation::Empty => write!(f, "signal has no segments"),
        }
    }
}

/// Checks that every segment strictly exceeds the dwell time, that mode
/// indices are in range, and (for exhaustive signals) that every mode occurs.
pub fn validate_signal(
    signal: &SwitchingSignal,
    modes: &[SwitchMode],
) -> ValidationReport<SignalViolation> {
    let mut report = ValidationReport::new();
    if signal.segments.is_empty() {
        report.push(SignalViolation::Empty);
        return report;
    }
    for (i, seg) in signal.segments.iter().enumerate() {
        if seg.duration <= signal.tau {
            report.push(SignalViolation::DurationTooShort {
                segment: i,
                duration: seg.duration,
                tau: signal.tau,
            });
        }
        if seg.mode == 0 || seg.mode > modes.len() {
            report.push(SignalViolation::ModeOutOfRange {
                segment: i,
                mode: seg.mode,
                mode_count: modes.len(),
            });
        }
    }
    if signal.exhaustive {
        for m in 1..=modes.len() {
            if !signal.segments.iter().any(|s| s.mode == m) {
                report.push(SignalViolation::ModeMissing { mode: m });
            }
        }
    }
    report
}

/// Dwell-time lower bound
/// `τ_min = ln((1/2^M)·Π_j λ_min,j/λ_max,j) / ln(Π_j φ_j)`.
///
/// Both logarithms are of sub-unit quantities, so the bound is positive.
/// Any `φ_j = 0` makes a single mode step land on the equilibrium set, and
/// the bound degenerates to 0.
pub fn dwell_lower_bound(modes: &[SwitchMode]) -> Result<f64, SwitchError> {
    if modes.is_empty() {
        return Err(SwitchError::NoModes);
    }
    let mut log_phi_product = 0.0;
    let mut log_ratio_sum = 0.0;
    for mode in modes {
        let phi = mode.phi();
        if phi >= 1.0 {
            return Err(SwitchError::InvalidContractionFactor { phi });
        }
        if phi == 0.0 {
            return Ok(0.0);
        }
        log_phi_product += phi.ln();
        log_ratio_sum += (mode.lambda_min() / mode.lambda_max()).ln();
    }
    let numerator = log_ratio_sum - (modes.len() as f64) * 2.0f64.ln();
    Ok(numerator / log_phi_product)
}

/// Shared agents stepped under switching modes. Each mode gets its own game
/// with per-agent cost weights drawn from that mode's weight matrix diagonal.
#[derive(Clone, Debug)]
pub struct SwitchedSystem {
    modes: Vec<SwitchMode>,
    games: Vec<GameInstance>,
}

impl SwitchedSystem {
    pub fn new(profiles: Vec<AgentProfile>, modes: Vec<SwitchMode>) -> Result<Self, SwitchError> {
        if modes.is_empty() {
            return Err(SwitchError::NoModes);
        }
        let agents = modes[0].adjacency.agent_count();
        if profiles.len() != agents {
            return Err(SwitchError::DimensionMismatch {
                expected: agents,
                got: profiles.len(),
            });
        }
        for mode in &modes {
            if mode.adjacency.agent_count() != agents {
                return Err(SwitchError::DimensionMismatch {
                    expected: agents,
                    got: mode.adjacency.agent_count(),
                });
            }
        }
        let mut games = Vec::with_capacity(modes.len());
        for mode in &modes {
            let diag = mode.qtilde.diag_entries();
            let costs = profiles
                .iter()
                .zip(&diag)
                .map(|(profile, &q)| profile.with_scalar_weight(q))
                .collect::<Result<Vec<_>, _>>()
                .map_err(DynamicsError::Prox)?;
            games.push(GameInstance::new(
                mode.adjacency.clone(),
                costs,
                mode.qtilde.clone(),
                mode.eta,
            )?);
        }
        Ok(SwitchedSystem { modes, games })
    }

    pub fn modes(&self) -> &[SwitchMode] {
        &self.modes
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn game(&self, mode_index: usize) -> &GameInstance {
        &self.games[mode_index]
    }
}

/// Residual against the persistent equilibrium set: the worst, over all
/// modes, of the mode's weighted fixed-point residual. Zero exactly on
/// states fixed under every mode.
pub fn pnwe_residual(sys: &SwitchedSystem, x: &CollectiveState) -> Result<f64, SwitchError> {
    let mut worst = 0.0f64;
    for (mode, game) in sys.modes.iter().zip(&sys.games) {
        let next = picard_step(game, x)?;
        let diff = sub_vec(next.flat(), x.flat());
        worst = worst.max(mode.qtilde.lifted_norm(&diff, x.block_dim()));
    }
    Ok(worst)
}

/// Runs the switched dynamics under a validated signal, stopping once the
/// persistent-equilibrium residual of the current state drops below `tol`
/// or after `max_steps`. The applied mode is recorded per transition.
pub fn switched_iterate(
    sys: &SwitchedSystem,
    signal: &SwitchingSignal,
    x0: &CollectiveState,
    tol: f64,
    max_steps: usize,
) -> Result<Trajectory, SwitchError> {
    let report = validate_signal(signal, &sys.modes);
    if !report.is_valid() {
        return Err(SwitchError::InvalidSignal(report));
    }

    let mut states = vec![x0.clone()];
    let mut residuals = Vec::new();
    let mut modes = Vec::new();
    let mut current = x0.clone();
    let mut converged = false;
    let mut iterations = 0;

    for k in 0..max_steps {
        let mode_index = signal.mode_at(k);
        let next = picard_step(&sys.games[mode_index - 1], &current)?;
        let residual = pnwe_residual(sys, &next)?;
        states.push(next.clone());
        residuals.push(residual);
        modes.push(mode_index);
        current = next;
        iterations = k + 1;
        if residual < tol {
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
        start_projected: false,
    })
}

/// Observed-to-envelope comparison for one mode's contraction inequality
/// `d(x(k), E) ≤ 2 φ^k d(x(0), E)` along a segment generated entirely under
/// that mode, with distances measured to a supplied reference equilibrium in
/// the mode's weighted norm.
#[derive(Clone, Debug)]
pub struct ContractionReport {
    /// `(step, observed distance ratio, envelope 2·φ^step)` per step.
    pub samples: Vec<(usize, f64, f64)>,
    /// Steps where the observed ratio exceeds the envelope.
    pub violations: Vec<usize>,
    /// Whether the segment starts on (numerically at) the equilibrium set,
    /// making every ratio undefined.
    pub vacuous: bool,
    /// Smallest contraction factor making the envelope hold on this data.
    pub calibrated_phi: Option<f64>,
    /// The factor mapped back through the mode's regularity formula,
    /// `κ = sqrt(α φ² / (1 − φ²))`.
    pub calibrated_kappa: Option<f64>,
}

pub fn contraction_diagnostic(
    mode: &SwitchMode,
    segment: &[CollectiveState],
    reference: &CollectiveState,
) -> Result<ContractionReport, SwitchError> {
    if segment.is_empty() {
        return Err(SwitchError::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }
    let n = reference.block_dim();
    let dist = |x: &CollectiveState| -> f64 {
        mode.qtilde
            .lifted_norm(&sub_vec(x.flat(), reference.flat()), n)
    };

    let d0 = dist(&segment[0]);
    if d0 <= f64::EPSILON {
        return Ok(ContractionReport {
            samples: Vec::new(),
            violations: Vec::new(),
            vacuous: true,
            calibrated_phi: Some(0.0),
            calibrated_kappa: Some(0.0),
        });
    }

    let phi = mode.phi();
    let mut samples = Vec::with_capacity(segment.len());
    let mut violations = Vec::new();
    let mut phi_required = 0.0f64;
    for (k, state) in segment.iter().enumerate() {
        let ratio = dist(state) / d0;
        let envelope = 2.0 * phi.powi(k as i32);
        if ratio > envelope {
            violations.push(k);
        }
        if k > 0 {
            phi_required = phi_required.max((ratio / 2.0).powf(1.0 / k as f64));
        }
        samples.push((k, ratio, envelope));
    }

    let (calibrated_phi, calibrated_kappa) = if segment.len() < 2 {
        (None, None)
    } else if phi_required < 1.0 {
        let alpha = mode.alpha();
        let kappa =
            (alpha * phi_required * phi_required / (1.0 - phi_required * phi_required)).sqrt();
        (Some(phi_required), Some(kappa))
    } else {
        // no finite regularity constant reproduces the observed data
        (Some(phi_required), None)
    };

    Ok(ContractionReport {
        samples,
        violations,
        vacuous: false,
        calibrated_phi,
        calibrated_kappa,
    })
}
