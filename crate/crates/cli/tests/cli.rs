//! End-to-end checks of the command-line front end: config round-trips,
//! deterministic exports, exit codes, and the per-subcommand artifacts.

use proxnet_cli::{parse_config, run, Mode, Overrides, RunConfig};
use std::path::{Path, PathBuf};
use std::process::Command;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("proxnet-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_config(mode: Mode, input: PathBuf, out_dir: PathBuf, overrides: Overrides) -> RunConfig {
    RunConfig {
        mode,
        input,
        out_dir,
        overrides,
    }
}

#[test]
fn shipped_bundles_parse_and_round_trip() {
    for name in [
        "four_robot.cfg",
        "switch_two_mode.cfg",
        "two_agent_line.cfg",
    ] {
        let text = std::fs::read_to_string(configs_dir().join(name)).unwrap();
        let doc = parse_config(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let reparsed = parse_config(&doc.to_text()).unwrap();
        assert_eq!(doc, reparsed, "{name} did not round-trip");
        // domain objects from the reparsed document are identical
        assert_eq!(
            doc.adjacency(0).unwrap().entries(),
            reparsed.adjacency(0).unwrap().entries()
        );
        assert_eq!(
            doc.weight_matrix(0).unwrap().diag_entries(),
            reparsed.weight_matrix(0).unwrap().diag_entries()
        );
    }
}

#[test]
fn reference_bundle_parses_to_published_values() {
    let text = std::fs::read_to_string(configs_dir().join("four_robot.cfg")).unwrap();
    let doc = parse_config(&text).unwrap();
    let p = doc.adjacency(0).unwrap();
    assert_eq!(p.agent_count(), 4);
    assert_eq!(p.min_self_loop(), 0.25);
    assert_eq!(p.entries().at(1, 0), 0.4);
    assert_eq!(
        doc.weight_matrix(0).unwrap().diag_entries(),
        vec![0.186, 0.214, 0.055, 0.03]
    );
    let scn = doc.robot_scenario(false, None).unwrap();
    assert_eq!(scn.initial[0], vec![5.0, 0.0]);
    assert_eq!(scn.targets[3], vec![100.0, 50.0]);
    assert_eq!(scn.box_edge, 5.0);
    assert_eq!(scn.epsilon, 1.0);
    assert_eq!(scn.gammas, vec![2.5; 4]);
}

#[test]
fn exports_are_byte_identical_across_runs() {
    let input = configs_dir().join("four_robot.cfg");
    let out_a = temp_dir("det-a");
    let out_b = temp_dir("det-b");
    for out in [&out_a, &out_b] {
        run(&run_config(
            Mode::Explore,
            input.clone(),
            out.clone(),
            Overrides {
                use_obstacles: true,
                ..Default::default()
            },
        ))
        .unwrap();
    }
    let csv_a = std::fs::read(out_a.join("explore.csv")).unwrap();
    let csv_b = std::fs::read(out_b.join("explore.csv")).unwrap();
    assert_eq!(csv_a, csv_b, "trajectory export differs between runs");
    let svg_a = std::fs::read(out_a.join("explore.svg")).unwrap();
    let svg_b = std::fs::read(out_b.join("explore.svg")).unwrap();
    assert_eq!(svg_a, svg_b, "plot export differs between runs");

    // four robot polylines, two dashed circles per target, one obstacle
    let svg = String::from_utf8(svg_a).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 4);
    assert_eq!(svg.matches("<circle").count(), 8);
    assert_eq!(svg.matches("<rect").count(), 1);

    // the displacement column of the final rows sits below the stop rule
    let csv = String::from_utf8(csv_a).unwrap();
    let last = csv.lines().last().unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    let final_residual: f64 = fields[fields.len() - 2].parse().unwrap();
    assert!(final_residual < 1e-9, "final displacement {final_residual}");
}

#[test]
fn switched_csv_mode_column_follows_signal() {
    let input = configs_dir().join("switch_two_mode.cfg");
    let out = temp_dir("switch");
    run(&run_config(
        Mode::SwitchSim,
        input.clone(),
        out.clone(),
        Overrides::default(),
    ))
    .unwrap();

    let text = std::fs::read_to_string(configs_dir().join("switch_two_mode.cfg")).unwrap();
    let doc = parse_config(&text).unwrap();
    let signal = doc.switching_signal(None).unwrap();

    let body = std::fs::read_to_string(out.join("switch_sim.csv")).unwrap();
    let mut lines = body.lines();
    let header = lines.next().unwrap();
    assert_eq!(header, "step,agent,dim0,dim1,residual,mode");
    let mut final_residual = f64::INFINITY;
    let mut rows = 0usize;
    let mut max_step = 0usize;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        let step: usize = fields[0].parse().unwrap();
        let mode: usize = fields[fields.len() - 1].parse().unwrap();
        max_step = max_step.max(step);
        // rows other than the final state carry the outgoing mode
        if step < max_step.max(1) {
            assert_eq!(mode, signal.mode_at(step), "step {step}");
        }
        final_residual = fields[fields.len() - 2].parse().unwrap();
        rows += 1;
    }
    assert_eq!(rows % 4, 0, "four agents per step");
    assert!(final_residual < 1e-9, "final residual {final_residual}");
}

#[test]
fn tau_override_can_invalidate_a_signal() {
    // the stored schedule respects tau = 2; forcing a larger dwell time via
    // the override must be rejected by signal validation
    let input = configs_dir().join("switch_two_mode.cfg");
    let out = temp_dir("tau");
    let err = run(&run_config(
        Mode::SwitchSim,
        input.clone(),
        out.clone(),
        Overrides {
            tau: Some(10),
            ..Default::default()
        },
    ))
    .unwrap_err();
    assert!(err.to_string().contains("exceed dwell time"), "{err}");

    // a smaller override keeps it valid
    run(&run_config(
        Mode::SwitchSim,
        input,
        out,
        Overrides {
            tau: Some(1),
            ..Default::default()
        },
    ))
    .unwrap();
}

#[test]
fn solve_lmi_records_seed_and_round_trips() {
    let input = configs_dir().join("four_robot.cfg");
    let out = temp_dir("lmi");
    run(&run_config(
        Mode::SolveLmi,
        input,
        out.clone(),
        Overrides {
            eta: Some(0.65),
            seed: Some(7),
            ..Default::default()
        },
    ))
    .unwrap();
    let text = std::fs::read_to_string(out.join("lmi_solution.cfg")).unwrap();
    let doc = parse_config(&text).unwrap();
    assert_eq!(doc.weights[0].seed, Some(7));
    assert_eq!(doc.weights[0].eta, Some(0.65));
    // the recorded weights check out against the recorded graph
    let q = doc.weight_matrix(0).unwrap();
    let p = doc.adjacency(0).unwrap();
    let cert = proxnet_core::check_feasible(&q, &p, 0.65, 1e-9).unwrap();
    assert!(cert.feasible);
}

#[test]
fn failed_run_leaves_no_output_files() {
    let bad = temp_dir("bad-cfg");
    let config = bad.join("broken.cfg");
    std::fs::write(&config, "[graph]\nrow = 0.5 0.4\nrow = 0.5 0.5\n").unwrap();
    let out = temp_dir("bad-out");
    let err = run(&run_config(
        Mode::Simulate,
        config,
        out.clone(),
        Overrides::default(),
    ))
    .unwrap_err();
    assert!(err.to_string().contains("graph"), "{err}");
    let leftovers: Vec<_> = std::fs::read_dir(&out).unwrap().collect();
    assert!(leftovers.is_empty(), "unexpected files: {leftovers:?}");
}

// ---- binary-level exit codes ---------------------------------------

fn proxnet(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_proxnet"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn binary_exit_codes() {
    let good = configs_dir().join("four_robot.cfg");
    let good = good.to_str().unwrap();

    let ok = proxnet(&["validate-graph", good]);
    assert!(
        ok.status.success(),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );

    // row-sum defect: validation failure -> exit 1, report printed
    let dir = temp_dir("bin");
    let broken = dir.join("broken.cfg");
    std::fs::write(&broken, "[graph]\nrow = 0.5 0.4\nrow = 0.5 0.5\n").unwrap();
    let fail = proxnet(&["validate-graph", broken.to_str().unwrap()]);
    assert_eq!(fail.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&fail.stdout);
    assert!(stdout.contains("sums"), "{stdout}");

    // empty config: parse failure names the missing graph section
    let empty = dir.join("empty.cfg");
    std::fs::write(&empty, "").unwrap();
    let fail = proxnet(&["validate-graph", empty.to_str().unwrap()]);
    assert!(!fail.status.success());
    let stderr = String::from_utf8_lossy(&fail.stderr);
    assert!(stderr.contains("graph"), "{stderr}");

    // usage problems -> exit 2
    let usage = proxnet(&["frobnicate", good]);
    assert_eq!(usage.status.code(), Some(2));
    let usage = proxnet(&["simulate", good, "--eta", "1.5"]);
    assert_eq!(usage.status.code(), Some(2));
    let usage = proxnet(&[]);
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn binary_explore_writes_artifacts() {
    let good = configs_dir().join("four_robot.cfg");
    let out = temp_dir("bin-explore");
    let result = proxnet(&[
        "explore",
        good.to_str().unwrap(),
        "--obstacles",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    assert!(out.join("explore.csv").exists());
    assert!(out.join("explore.svg").exists());
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("converged = true"), "{stdout}");
}
