//! The configuration document: a single sectioned text file that drives
//! every subcommand. Subcommands ignore sections they do not need, so one
//! bundle can describe a graph, its weights, the agents, an exploration
//! scenario, and a switching schedule at once.
//!
//! Grammar: `[section]` headers introduce `graph`, `weights`, `agents`,
//! `scenario`, or `signal` blocks; entries are `key = values` with
//! whitespace-separated decimal numbers; `#` starts a comment. Repeating
//! the `[graph]`/`[weights]` pair defines one switching mode per pair.
//! Unknown sections and keys are rejected with their line number.

use crate::error::CliError;
use proxnet_core::{
    AdjacencyMatrix, AgentProfile, BoxRegion, CollectiveState, ConvexSet, GameInstance,
    ObstacleSet, RobotScenario, SwitchMode, SwitchedSystem, SwitchingSignal, WeightMatrix,
    DEFAULT_ROW_TOL,
};
use std::path::Path;

pub const DEFAULT_ETA: f64 = 0.5;
pub const DEFAULT_KAPPA: f64 = 1.0;
pub const DEFAULT_GAMMA: f64 = 2.5;
pub const DEFAULT_SCENARIO_STEPS: usize = 2000;

#[derive(Clone, Debug, PartialEq, Default)]
pub struct GraphSection {
    pub rows: Vec<Vec<f64>>,
    pub row_tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct WeightsSection {
    pub diag: Vec<f64>,
    pub eta: Option<f64>,
    pub kappa: Option<f64>,
    pub seed: Option<u64>,
}

/// Per-agent constraint as written in the file.
#[derive(Clone, Debug, PartialEq)]
pub enum ConstraintSpec {
    /// center then half-widths
    Box(Vec<f64>, Vec<f64>),
    /// center then radius
    Ball(Vec<f64>, f64),
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct AgentsSection {
    pub gammas: Vec<f64>,
    pub targets: Vec<Vec<f64>>,
    pub constraints: Vec<ConstraintSpec>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ScenarioSection {
    pub starts: Vec<Vec<f64>>,
    pub edge: Option<f64>,
    pub epsilon: Option<f64>,
    pub steps: Option<usize>,
    /// center then half-widths, planar
    pub obstacles: Vec<(Vec<f64>, Vec<f64>)>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SignalSection {
    pub tau: Option<usize>,
    pub segments: Vec<(usize, usize)>,
    pub exhaustive: bool,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ConfigDocument {
    pub graphs: Vec<GraphSection>,
    pub weights: Vec<WeightsSection>,
    pub agents: Option<AgentsSection>,
    pub scenario: Option<ScenarioSection>,
    pub signal: Option<SignalSection>,
}

enum Cursor {
    Graph(usize),
    Weights(usize),
    Agents,
    Scenario,
    Signal,
}

pub fn parse_config(text: &str) -> Result<ConfigDocument, CliError> {
    let mut doc = ConfigDocument::default();
    let mut cursor: Option<Cursor> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }

        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| CliError::parse(line_no, "unterminated section header"))?
                .trim();
            cursor = Some(match name {
                "graph" => {
                    doc.graphs.push(GraphSection::default());
                    Cursor::Graph(doc.graphs.len() - 1)
                }
                "weights" => {
                    doc.weights.push(WeightsSection::default());
                    Cursor::Weights(doc.weights.len() - 1)
                }
                "agents" => {
                    if doc.agents.is_none() {
                        doc.agents = Some(AgentsSection::default());
                    }
                    Cursor::Agents
                }
                "scenario" => {
                    if doc.scenario.is_none() {
                        doc.scenario = Some(ScenarioSection::default());
                    }
                    Cursor::Scenario
                }
                "signal" => {
                    if doc.signal.is_none() {
                        doc.signal = Some(SignalSection::default());
                    }
                    Cursor::Signal
                }
                other => {
                    return Err(CliError::parse(
                        line_no,
                        format!("unknown section `{other}` (expected graph, weights, agents, scenario, or signal)"),
                    ))
                }
            });
            continue;
        }

        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::parse(line_no, "expected `key = values`"))?;
        let key = key.trim();
        let value = value.trim();

        let section = cursor
            .as_ref()
            .ok_or_else(|| CliError::parse(line_no, "entry before any [section] header"))?;

        match section {
            Cursor::Graph(i) => {
                let g = &mut doc.graphs[*i];
                match key {
                    "row" => g.rows.push(parse_numbers(value, line_no)?),
                    "row_tol" => g.row_tol = Some(parse_number(value, line_no)?),
                    other => return Err(CliError::unknown_key(line_no, "graph", other)),
                }
            }
            Cursor::Weights(i) => {
                let w = &mut doc.weights[*i];
                match key {
                    "diag" => w.diag = parse_numbers(value, line_no)?,
                    "eta" => w.eta = Some(parse_number(value, line_no)?),
                    "kappa" => w.kappa = Some(parse_number(value, line_no)?),
                    "seed" => w.seed = Some(parse_integer(value, line_no)?),
                    other => return Err(CliError::unknown_key(line_no, "weights", other)),
                }
            }
            Cursor::Agents => {
                let a = doc.agents.as_mut().expect("section created above");
                match key {
                    "gamma" => a.gammas.extend(parse_numbers(value, line_no)?),
                    "target" => a.targets.push(parse_numbers(value, line_no)?),
                    "box" => {
                        let mut nums = parse_numbers(value, line_no)?;
                        if nums.len() % 2 != 0 || nums.is_empty() {
                            return Err(CliError::parse(
                                line_no,
                                "box expects center coordinates followed by half-widths",
                            ));
                        }
                        let half = nums.split_off(nums.len() / 2);
                        a.constraints.push(ConstraintSpec::Box(nums, half));
                    }
                    "ball" => {
                        let mut nums = parse_numbers(value, line_no)?;
                        if nums.len() < 2 {
                            return Err(CliError::parse(
                                line_no,
                                "ball expects center coordinates followed by a radius",
                            ));
                        }
                        let radius = nums.pop().expect("length checked");
                        a.constraints.push(ConstraintSpec::Ball(nums, radius));
                    }
                    other => return Err(CliError::unknown_key(line_no, "agents", other)),
                }
            }
            Cursor::Scenario => {
                let s = doc.scenario.as_mut().expect("section created above");
                match key {
                    "start" => s.starts.push(parse_numbers(value, line_no)?),
                    "edge" => s.edge = Some(parse_number(value, line_no)?),
                    "epsilon" => s.epsilon = Some(parse_number(value, line_no)?),
                    "steps" => s.steps = Some(parse_integer(value, line_no)? as usize),
                    "obstacle" => {
                        let nums = parse_numbers(value, line_no)?;
                        if nums.len() != 4 {
                            return Err(CliError::parse(
                                line_no,
                                "obstacle expects `cx cy half_x half_y`",
                            ));
                        }
                        s.obstacles
                            .push((vec![nums[0], nums[1]], vec![nums[2], nums[3]]));
                    }
                    other => return Err(CliError::unknown_key(line_no, "scenario", other)),
                }
            }
            Cursor::Signal => {
                let s = doc.signal.as_mut().expect("section created above");
                match key {
                    "tau" => s.tau = Some(parse_integer(value, line_no)? as usize),
                    "segment" => {
                        let nums = parse_numbers(value, line_no)?;
                        if nums.len() != 2 || nums.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
                            return Err(CliError::parse(
                                line_no,
                                "segment expects `mode duration` as nonnegative integers",
                            ));
                        }
                        s.segments.push((nums[0] as usize, nums[1] as usize));
                    }
                    "exhaustive" => {
                        s.exhaustive = match value {
                            "true" => true,
                            "false" => false,
                            other => {
                                return Err(CliError::parse(
                                    line_no,
                                    format!("exhaustive expects true or false, got `{other}`"),
                                ))
                            }
                        }
                    }
                    other => return Err(CliError::unknown_key(line_no, "signal", other)),
                }
            }
        }
    }

    if doc.graphs.is_empty() {
        return Err(CliError::MissingSection { section: "graph" });
    }
    for (idx, g) in doc.graphs.iter().enumerate() {
        if g.rows.is_empty() {
            return Err(CliError::Semantic {
                origin: "graph",
                message: format!("graph section {} has no rows", idx + 1),
            });
        }
        let cols = g.rows[0].len();
        if let Some(bad) = g.rows.iter().position(|r| r.len() != cols) {
            return Err(CliError::Semantic {
                origin: "graph",
                message: format!(
                    "graph section {}: row {} has {} entries, expected {cols}",
                    idx + 1,
                    bad + 1,
                    g.rows[bad].len()
                ),
            });
        }
    }
    for (idx, w) in doc.weights.iter().enumerate() {
        if w.diag.is_empty() {
            return Err(CliError::Semantic {
                origin: "weights",
                message: format!("weights section {} has no diag entries", idx + 1),
            });
        }
    }
    Ok(doc)
}

pub fn parse_config_file(path: &Path) -> Result<ConfigDocument, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

fn parse_numbers(value: &str, line_no: usize) -> Result<Vec<f64>, CliError> {
    if value.is_empty() {
        return Err(CliError::parse(line_no, "expected at least one number"));
    }
    value
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| CliError::parse(line_no, format!("`{tok}` is not a decimal number")))
        })
        .collect()
}

fn parse_number(value: &str, line_no: usize) -> Result<f64, CliError> {
    let nums = parse_numbers(value, line_no)?;
    if nums.len() != 1 {
        return Err(CliError::parse(line_no, "expected exactly one number"));
    }
    Ok(nums[0])
}

fn parse_integer(value: &str, line_no: usize) -> Result<u64, CliError> {
    value
        .trim()
        .parse::<u64>()
        .map_err(|_| CliError::parse(line_no, format!("`{value}` is not a nonnegative integer")))
}

impl ConfigDocument {
    /// Canonical text form. Parsing the output reproduces this document
    /// exactly (floats are printed in shortest round-trip form).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let fmt_nums = |nums: &[f64]| {
            nums.iter()
                .map(|v| format!("{v:?}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        for g in &self.graphs {
            out.push_str("[graph]\n");
            for row in &g.rows {
                out.push_str(&format!("row = {}\n", fmt_nums(row)));
            }
            if let Some(tol) = g.row_tol {
                out.push_str(&format!("row_tol = {tol:?}\n"));
            }
            out.push('\n');
        }
        for w in &self.weights {
            out.push_str("[weights]\n");
            out.push_str(&format!("diag = {}\n", fmt_nums(&w.diag)));
            if let Some(eta) = w.eta {
                out.push_str(&format!("eta = {eta:?}\n"));
            }
            if let Some(kappa) = w.kappa {
                out.push_str(&format!("kappa = {kappa:?}\n"));
            }
            if let Some(seed) = w.seed {
                out.push_str(&format!("seed = {seed}\n"));
            }
            out.push('\n');
        }
        if let Some(a) = &self.agents {
            out.push_str("[agents]\n");
            if !a.gammas.is_empty() {
                out.push_str(&format!("gamma = {}\n", fmt_nums(&a.gammas)));
            }
            for t in &a.targets {
                out.push_str(&format!("target = {}\n", fmt_nums(t)));
            }
            for c in &a.constraints {
                match c {
                    ConstraintSpec::Box(center, half) => {
                        let mut nums = center.clone();
                        nums.extend_from_slice(half);
                        out.push_str(&format!("box = {}\n", fmt_nums(&nums)));
                    }
                    ConstraintSpec::Ball(center, radius) => {
                        let mut nums = center.clone();
                        nums.push(*radius);
                        out.push_str(&format!("ball = {}\n", fmt_nums(&nums)));
                    }
                }
            }
            out.push('\n');
        }
        if let Some(s) = &self.scenario {
            out.push_str("[scenario]\n");
            for start in &s.starts {
                out.push_str(&format!("start = {}\n", fmt_nums(start)));
            }
            if let Some(edge) = s.edge {
                out.push_str(&format!("edge = {edge:?}\n"));
            }
            if let Some(eps) = s.epsilon {
                out.push_str(&format!("epsilon = {eps:?}\n"));
            }
            if let Some(steps) = s.steps {
                out.push_str(&format!("steps = {steps}\n"));
            }
            for (center, half) in &s.obstacles {
                let mut nums = center.clone();
                nums.extend_from_slice(half);
                out.push_str(&format!("obstacle = {}\n", fmt_nums(&nums)));
            }
            out.push('\n');
        }
        if let Some(s) = &self.signal {
            out.push_str("[signal]\n");
            if let Some(tau) = s.tau {
                out.push_str(&format!("tau = {tau}\n"));
            }
            for (mode, duration) in &s.segments {
                out.push_str(&format!("segment = {mode} {duration}\n"));
            }
            out.push_str(&format!("exhaustive = {}\n", s.exhaustive));
            out.push('\n');
        }
        out
    }

    // ---- domain object assembly ------------------------------------

    pub fn adjacency(&self, index: usize) -> Result<AdjacencyMatrix, CliError> {
        let g = self
            .graphs
            .get(index)
            .ok_or(CliError::MissingSection { section: "graph" })?;
        let tol = g.row_tol.unwrap_or(DEFAULT_ROW_TOL);
        AdjacencyMatrix::from_rows(&g.rows, tol).map_err(|e| CliError::Semantic {
            origin: "graph",
            message: e.to_string(),
        })
    }

    pub fn weight_matrix(&self, index: usize) -> Result<WeightMatrix, CliError> {
        let w = self
            .weights
            .get(index)
            .ok_or(CliError::MissingSection { section: "weights" })?;
        WeightMatrix::diagonal(w.diag.clone()).map_err(|e| CliError::Semantic {
            origin: "weights",
            message: e.to_string(),
        })
    }

    pub fn eta(&self, index: usize, override_eta: Option<f64>) -> f64 {
        override_eta
            .or_else(|| self.weights.get(index).and_then(|w| w.eta))
            .unwrap_or(DEFAULT_ETA)
    }

    pub fn kappa(&self, index: usize) -> f64 {
        self.weights
            .get(index)
            .and_then(|w| w.kappa)
            .unwrap_or(DEFAULT_KAPPA)
    }

    /// One switching mode per `[graph]`/`[weights]` pair, in file order.
    pub fn modes(&self, override_eta: Option<f64>) -> Result<Vec<SwitchMode>, CliError> {
        if self.graphs.len() != self.weights.len() {
            return Err(CliError::Semantic {
                origin: "weights",
                message: format!(
                    "found {} graph section(s) but {} weights section(s); switching modes pair them one-to-one",
                    self.graphs.len(),
                    self.weights.len()
                ),
            });
        }
        (0..self.graphs.len())
            .map(|i| {
                SwitchMode::new(
                    self.adjacency(i)?,
                    self.weight_matrix(i)?,
                    self.eta(i, override_eta),
                    self.kappa(i),
                )
                .map_err(|e| CliError::Semantic {
                    origin: "weights",
                    message: e.to_string(),
                })
            })
            .collect()
    }

    fn agents_section(&self) -> Result<&AgentsSection, CliError> {
        self.agents
            .as_ref()
            .ok_or(CliError::MissingSection { section: "agents" })
    }

    /// Discover gains, broadcast to the agent count when a single value is
    /// given, defaulting when omitted entirely.
    pub fn gammas(&self, count: usize) -> Result<Vec<f64>, CliError> {
        let a = self.agents_section()?;
        match a.gammas.len() {
            0 => Ok(vec![DEFAULT_GAMMA; count]),
            1 => Ok(vec![a.gammas[0]; count]),
            n if n == count => Ok(a.gammas.clone()),
            n => Err(CliError::Semantic {
                origin: "agents",
                message: format!("expected 1 or {count} gamma values, got {n}"),
            }),
        }
    }

    pub fn targets(&self, count: usize) -> Result<Vec<Vec<f64>>, CliError> {
        let a = self.agents_section()?;
        if a.targets.len() != count {
            return Err(CliError::Semantic {
                origin: "agents",
                message: format!("expected {count} target lines, got {}", a.targets.len()),
            });
        }
        Ok(a.targets.clone())
    }

    fn constraint_sets(&self, count: usize) -> Result<Vec<ConvexSet>, CliError> {
        let a = self.agents_section()?;
        if a.constraints.len() != count {
            return Err(CliError::Semantic {
                origin: "agents",
                message: format!(
                    "expected {count} constraint lines (box/ball), got {}",
                    a.constraints.len()
                ),
            });
        }
        a.constraints
            .iter()
            .map(|c| match c {
                ConstraintSpec::Box(center, half) => BoxRegion::new(center.clone(), half.clone())
                    .map(ConvexSet::Box)
                    .map_err(|e| CliError::Semantic {
                        origin: "agents",
                        message: e.to_string(),
                    }),
                ConstraintSpec::Ball(center, radius) => Ok(ConvexSet::Ball {
                    center: center.clone(),
                    radius: *radius,
                }),
            })
            .collect()
    }

    /// Agent profiles (gain, target, constraint) shared by every mode.
    pub fn agent_profiles(&self, count: usize) -> Result<Vec<AgentProfile>, CliError> {
        let gammas = self.gammas(count)?;
        let targets = self.targets(count)?;
        let constraints = self.constraint_sets(count)?;
        gammas
            .into_iter()
            .zip(targets)
            .zip(constraints)
            .map(|((gamma, target), constraint)| {
                AgentProfile::new(gamma, target, constraint).map_err(|e| CliError::Semantic {
                    origin: "agents",
                    message: e.to_string(),
                })
            })
            .collect()
    }

    /// Time-invariant game from the first graph/weights pair.
    pub fn game(&self, override_eta: Option<f64>) -> Result<GameInstance, CliError> {
        let adjacency = self.adjacency(0)?;
        let qtilde = self.weight_matrix(0)?;
        let count = adjacency.agent_count();
        let diag = qtilde.diag_entries();
        let costs = self
            .agent_profiles(count)?
            .into_iter()
            .zip(&diag)
            .map(|(profile, &q)| {
                profile
                    .with_scalar_weight(q)
                    .map_err(|e| CliError::Semantic {
                        origin: "agents",
                        message: e.to_string(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        GameInstance::new(adjacency, costs, qtilde, self.eta(0, override_eta)).map_err(|e| {
            CliError::Semantic {
                origin: "agents",
                message: e.to_string(),
            }
        })
    }

    pub fn switched_system(&self, override_eta: Option<f64>) -> Result<SwitchedSystem, CliError> {
        let modes = self.modes(override_eta)?;
        let count = modes[0].adjacency().agent_count();
        SwitchedSystem::new(self.agent_profiles(count)?, modes).map_err(|e| CliError::Semantic {
            origin: "agents",
            message: e.to_string(),
        })
    }

    pub fn start_state(&self, count: usize) -> Result<CollectiveState, CliError> {
        let s = self.scenario.as_ref().ok_or(CliError::MissingSection {
            section: "scenario",
        })?;
        if s.starts.len() != count {
            return Err(CliError::Semantic {
                origin: "scenario",
                message: format!("expected {count} start lines, got {}", s.starts.len()),
            });
        }
        CollectiveState::from_blocks(&s.starts).map_err(|e| CliError::Semantic {
            origin: "scenario",
            message: e.to_string(),
        })
    }

    pub fn obstacle_set(&self) -> Result<ObstacleSet, CliError> {
        let Some(s) = &self.scenario else {
            return Ok(ObstacleSet::empty());
        };
        let boxes = s
            .obstacles
            .iter()
            .map(|(center, half)| {
                BoxRegion::new(center.clone(), half.clone()).map_err(|e| CliError::Semantic {
                    origin: "scenario",
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        ObstacleSet::new(boxes).map_err(|e| CliError::Semantic {
            origin: "scenario",
            message: e.to_string(),
        })
    }

    pub fn robot_scenario(
        &self,
        use_obstacles: bool,
        override_eta: Option<f64>,
    ) -> Result<RobotScenario, CliError> {
        let s = self.scenario.as_ref().ok_or(CliError::MissingSection {
            section: "scenario",
        })?;
        let adjacency = self.adjacency(0)?;
        let qtilde = self.weight_matrix(0)?;
        let count = adjacency.agent_count();
        if s.starts.len() != count {
            return Err(CliError::Semantic {
                origin: "scenario",
                message: format!("expected {count} start lines, got {}", s.starts.len()),
            });
        }
        let obstacles = if use_obstacles {
            self.obstacle_set()?
        } else {
            ObstacleSet::empty()
        };
        RobotScenario::new(
            s.starts.clone(),
            self.targets(count)?,
            self.gammas(count)?,
            s.edge.unwrap_or(5.0),
            s.epsilon.unwrap_or(1.0),
            obstacles,
            adjacency,
            qtilde,
            self.eta(0, override_eta),
            s.steps.unwrap_or(DEFAULT_SCENARIO_STEPS),
        )
        .map_err(|e| CliError::Semantic {
            origin: "scenario",
            message: e.to_string(),
        })
    }

    pub fn switching_signal(
        &self,
        tau_override: Option<usize>,
    ) -> Result<SwitchingSignal, CliError> {
        let s = self
            .signal
            .as_ref()
            .ok_or(CliError::MissingSection { section: "signal" })?;
        let tau = tau_override.or(s.tau).ok_or(CliError::Semantic {
            origin: "signal",
            message: "dwell time tau not given (set `tau =` or pass --tau)".into(),
        })?;
        Ok(SwitchingSignal::new(s.segments.clone(), tau, s.exhaustive))
    }
}
