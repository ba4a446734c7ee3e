//! Subcommand implementations. Every command reads one configuration
//! bundle, ignores the sections it does not need, prints a human-readable
//! summary to stdout, and writes machine-readable artifacts into the output
//! directory with write-then-rename semantics.

use crate::config::{parse_config_file, ConfigDocument, WeightsSection};
use crate::csv::{export_csv, fmt_sig};
use crate::error::CliError;
use crate::io::write_atomic;
use crate::svg::export_svg;
use proxnet_core::{
    dwell_lower_bound, iterate, nwe_residual, pnwe_residual, run_exploration, solve_diagonal_q,
    switched_iterate, validate_adjacency, validate_signal, LmiSynthesis, DEFAULT_ROW_TOL,
};
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    ValidateGraph,
    SolveLmi,
    Simulate,
    SwitchSim,
    DwellBound,
    Explore,
}

impl Mode {
    pub fn parse(name: &str) -> Option<Mode> {
        Some(match name {
            "validate-graph" => Mode::ValidateGraph,
            "solve-lmi" => Mode::SolveLmi,
            "simulate" => Mode::Simulate,
            "switch-sim" => Mode::SwitchSim,
            "dwell-bound" => Mode::DwellBound,
            "explore" => Mode::Explore,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub eta: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub tau: Option<usize>,
    pub use_obstacles: bool,
}

impl Overrides {
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(eta) = self.eta {
            if !(0.0 < eta && eta < 1.0) {
                return Err(CliError::Usage(format!(
                    "--eta must lie strictly between 0 and 1, got {eta}"
                )));
            }
        }
        if let Some(tol) = self.tol {
            if !tol.is_finite() || tol <= 0.0 {
                return Err(CliError::Usage(format!(
                    "--tol must be positive, got {tol}"
                )));
            }
        }
        if self.max_iter == Some(0) {
            return Err(CliError::Usage("--max-iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub overrides: Overrides,
}

const DEFAULT_TOL: f64 = 1e-9;
const DEFAULT_MAX_ITER: usize = 100_000;
const DEFAULT_SWITCH_STEPS: usize = 10_000;

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.overrides.validate()?;
    if !cfg.input.exists() {
        return Err(CliError::Usage(format!(
            "input file {} does not exist",
            cfg.input.display()
        )));
    }
    let doc = parse_config_file(&cfg.input)?;
    match cfg.mode {
        Mode::ValidateGraph => validate_graph_cmd(&doc),
        Mode::SolveLmi => solve_lmi_cmd(&doc, cfg),
        Mode::Simulate => simulate_cmd(&doc, cfg),
        Mode::SwitchSim => switch_sim_cmd(&doc, cfg),
        Mode::DwellBound => dwell_bound_cmd(&doc, cfg),
        Mode::Explore => explore_cmd(&doc, cfg),
    }
}

fn validate_graph_cmd(doc: &ConfigDocument) -> Result<(), CliError> {
    let mut first_failure = None;
    for (i, section) in doc.graphs.iter().enumerate() {
        let tol = section.row_tol.unwrap_or(DEFAULT_ROW_TOL);
        let matrix = proxnet_core::Mat::from_rows(&section.rows);
        let report = validate_adjacency(&matrix, tol).map_err(|e| CliError::Semantic {
            origin: "graph",
            message: e.to_string(),
        })?;
        if report.is_valid() {
            let adjacency = doc.adjacency(i)?;
            println!(
                "graph {}: valid (agents: {}, min self-loop: {})",
                i + 1,
                adjacency.agent_count(),
                adjacency.min_self_loop()
            );
        } else {
            println!("graph {}: {report}", i + 1);
            first_failure.get_or_insert_with(|| CliError::Semantic {
                origin: "graph",
                message: report.to_string(),
            });
        }
    }
    match first_failure {
        None => Ok(()),
        Some(e) => Err(e),
    }
}

fn solve_lmi_cmd(doc: &ConfigDocument, cfg: &RunConfig) -> Result<(), CliError> {
    let adjacency = doc.adjacency(0)?;
    let eta = doc.eta(0, cfg.overrides.eta);
    let seed = cfg
        .overrides
        .seed
        .or_else(|| doc.weights.first().and_then(|w| w.seed))
        .unwrap_or(0);

    println!(
        "solving for a diagonal weight certificate (agents: {}, eta: {eta}, seed: {seed})",
        adjacency.agent_count()
    );
    let synthesis = solve_diagonal_q(&adjacency, eta, seed).map_err(|e| CliError::Semantic {
        origin: "weights",
        message: e.to_string(),
    })?;

    match synthesis {
        LmiSynthesis::Feasible {
            weight,
            certificate,
            restart,
            iterations,
        } => {
            let diag = weight.diag_entries();
            println!(
                "feasible: diag = [{}]",
                diag.iter()
                    .map(|v| fmt_sig(*v))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            println!(
                "certificate: eta = {eta}, residual min eigenvalue = {}, restart {restart}, iteration {iterations}",
                fmt_sig(certificate.min_eigenvalue)
            );

            // emit a reusable bundle holding the graph and the found weights
            let record = ConfigDocument {
                graphs: doc.graphs.clone(),
                weights: vec![WeightsSection {
                    diag,
                    eta: Some(eta),
                    kappa: doc.weights.first().and_then(|w| w.kappa),
                    seed: Some(seed),
                }],
                agents: None,
                scenario: None,
                signal: None,
            };
            let path = cfg.out_dir.join("lmi_solution.cfg");
            write_atomic(&path, record.to_text().as_bytes())?;
            println!("wrote {}", path.display());
            Ok(())
        }
        LmiSynthesis::Infeasible {
            best_lambda_min,
            best_weight,
        } => {
            println!(
                "infeasible: best residual min eigenvalue {} at diag = [{}]",
                fmt_sig(best_lambda_min),
                best_weight
                    .diag_entries()
                    .iter()
                    .map(|v| fmt_sig(*v))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            Err(CliError::Semantic {
                origin: "weights",
                message: format!(
                    "no diagonal certificate found at eta = {eta} (best residual eigenvalue {best_lambda_min:.3e}); try a larger --eta"
                ),
            })
        }
    }
}

fn simulate_cmd(doc: &ConfigDocument, cfg: &RunConfig) -> Result<(), CliError> {
    let game = doc.game(cfg.overrides.eta)?;
    let x0 = doc.start_state(game.agent_count())?;
    let tol = cfg.overrides.tol.unwrap_or(DEFAULT_TOL);
    let max_iter = cfg.overrides.max_iter.unwrap_or(DEFAULT_MAX_ITER);

    let trajectory = iterate(&game, &x0, tol, max_iter).map_err(|e| CliError::Semantic {
        origin: "agents",
        message: e.to_string(),
    })?;
    let final_residual =
        nwe_residual(&game, trajectory.final_state()).map_err(|e| CliError::Semantic {
            origin: "agents",
            message: e.to_string(),
        })?;

    println!(
        "simulate: converged = {}, iterations = {}, start projected = {}",
        trajectory.converged, trajectory.iterations, trajectory.start_projected
    );
    println!(
        "final step residual = {}, equilibrium residual = {}",
        fmt_sig(trajectory.final_residual().unwrap_or(0.0)),
        fmt_sig(final_residual)
    );

    let csv_path = cfg.out_dir.join("simulate.csv");
    export_csv(&trajectory, &csv_path)?;
    println!("wrote {}", csv_path.display());
    if game.state_dim() == 2 {
        let targets: Vec<Vec<f64>> = game.costs().iter().map(|c| c.target.clone()).collect();
        let svg_path = cfg.out_dir.join("simulate.svg");
        export_svg(&trajectory, &targets, &[], &svg_path)?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

fn switch_sim_cmd(doc: &ConfigDocument, cfg: &RunConfig) -> Result<(), CliError> {
    let sys = doc.switched_system(cfg.overrides.eta)?;
    let signal = doc.switching_signal(cfg.overrides.tau)?;
    let report = validate_signal(&signal, sys.modes());
    if !report.is_valid() {
        println!("signal: {report}");
        return Err(CliError::Semantic {
            origin: "signal",
            message: report.to_string(),
        });
    }
    let agents = sys.modes()[0].adjacency().agent_count();
    let x0 = doc.start_state(agents)?;
    let tol = cfg.overrides.tol.unwrap_or(DEFAULT_TOL);
    let max_steps = cfg.overrides.max_iter.unwrap_or(DEFAULT_SWITCH_STEPS);

    let trajectory =
        switched_iterate(&sys, &signal, &x0, tol, max_steps).map_err(|e| CliError::Semantic {
            origin: "signal",
            message: e.to_string(),
        })?;
    let persistent =
        pnwe_residual(&sys, trajectory.final_state()).map_err(|e| CliError::Semantic {
            origin: "signal",
            message: e.to_string(),
        })?;

    println!(
        "switch-sim: modes = {}, dwell time = {}, converged = {}, steps = {}",
        sys.mode_count(),
        signal.tau,
        trajectory.converged,
        trajectory.iterations
    );
    println!("persistent equilibrium residual = {}", fmt_sig(persistent));

    let csv_path = cfg.out_dir.join("switch_sim.csv");
    export_csv(&trajectory, &csv_path)?;
    println!("wrote {}", csv_path.display());
    Ok(())
}

fn dwell_bound_cmd(doc: &ConfigDocument, cfg: &RunConfig) -> Result<(), CliError> {
    let modes = doc.modes(cfg.overrides.eta)?;
    for (i, mode) in modes.iter().enumerate() {
        println!(
            "mode {}: eta = {}, kappa = {}, phi = {}, weight eigenvalue range = [{}, {}]",
            i + 1,
            mode.eta(),
            mode.kappa(),
            fmt_sig(mode.phi()),
            fmt_sig(mode.lambda_min()),
            fmt_sig(mode.lambda_max()),
        );
    }
    let bound = dwell_lower_bound(&modes).map_err(|e| CliError::Semantic {
        origin: "weights",
        message: e.to_string(),
    })?;
    println!("dwell-time lower bound = {}", fmt_sig(bound));
    println!(
        "minimum integer dwell time = {}",
        bound.ceil().max(0.0) as u64
    );
    Ok(())
}

fn explore_cmd(doc: &ConfigDocument, cfg: &RunConfig) -> Result<(), CliError> {
    let scenario = doc.robot_scenario(cfg.overrides.use_obstacles, cfg.overrides.eta)?;
    let run = run_exploration(&scenario).map_err(|e| CliError::Semantic {
        origin: "scenario",
        message: e.to_string(),
    })?;

    println!(
        "explore: robots = {}, obstacles = {}, converged = {}, steps = {}",
        scenario.robot_count(),
        scenario.obstacles.boxes().len(),
        run.trajectory.converged,
        run.trajectory.iterations
    );
    println!(
        "final collective displacement = {}, equilibrium residual = {}",
        fmt_sig(run.trajectory.final_residual().unwrap_or(0.0)),
        fmt_sig(run.final_nwe_residual)
    );
    for i in 0..scenario.robot_count() {
        let p = run.final_position(i);
        let stalled = if run.stalled[i] { " (stalled)" } else { "" };
        println!(
            "robot {}: final position ({}, {}){stalled}",
            i + 1,
            fmt_sig(p[0]),
            fmt_sig(p[1])
        );
    }

    let csv_path = cfg.out_dir.join("explore.csv");
    export_csv(&run.trajectory, &csv_path)?;
    println!("wrote {}", csv_path.display());
    let svg_path = cfg.out_dir.join("explore.svg");
    export_svg(
        &run.trajectory,
        &scenario.targets,
        scenario.obstacles.boxes(),
        &svg_path,
    )?;
    println!("wrote {}", svg_path.display());
    Ok(())
}
