use proxnet_cli::{run, CliError, Mode, Overrides, RunConfig};
use std::path::PathBuf;

const USAGE: &str = "\
proxnet: network equilibrium seeking via proximal dynamics

USAGE:
    proxnet <subcommand> <config> [options]

SUBCOMMANDS:
    validate-graph   check every [graph] section: row-stochasticity,
                     strictly positive self-loops, strong connectivity
    solve-lmi        synthesize a diagonal weight certificate for the first
                     [graph]; writes lmi_solution.cfg on success
    simulate         fixed-constraint proximal iteration from [scenario]
                     starts; writes simulate.csv (and .svg when planar)
    switch-sim       dwell-time switched iteration over all graph/weights
                     pairs under [signal]; writes switch_sim.csv
    dwell-bound      print per-mode contraction data and the dwell-time
                     lower bound
    explore          moving-box robot exploration from [scenario]; writes
                     explore.csv and explore.svg

OPTIONS:
    --out <dir>      output directory (default: current directory)
    --eta <x>        averaging parameter in (0,1), overrides [weights]
    --tol <x>        stopping tolerance (simulate, switch-sim)
    --max-iter <n>   iteration cap (simulate, switch-sim)
    --seed <n>       solver restart seed (solve-lmi)
    --tau <n>        dwell time, overrides [signal] (switch-sim)
    --obstacles      include [scenario] obstacles (explore)
";

fn parse_args(args: &[String]) -> Result<RunConfig, CliError> {
    if args.is_empty() || args[0] == "help" || args[0] == "--help" || args[0] == "-h" {
        return Err(CliError::Usage(USAGE.to_string()));
    }
    let mode = Mode::parse(&args[0])
        .ok_or_else(|| CliError::Usage(format!("unknown subcommand `{}`\n\n{USAGE}", args[0])))?;
    let mut input: Option<PathBuf> = None;
    let mut out_dir = PathBuf::from(".");
    let mut overrides = Overrides::default();

    let mut i = 1;
    while i < args.len() {
        let arg = &args[i];
        let mut take_value = |name: &str| -> Result<String, CliError> {
            i += 1;
            args.get(i)
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("{name} expects a value")))
        };
        match arg.as_str() {
            "--out" => out_dir = PathBuf::from(take_value("--out")?),
            "--eta" => {
                let v = take_value("--eta")?;
                overrides.eta =
                    Some(v.parse().map_err(|_| {
                        CliError::Usage(format!("--eta expects a number, got `{v}`"))
                    })?);
            }
            "--tol" => {
                let v = take_value("--tol")?;
                overrides.tol =
                    Some(v.parse().map_err(|_| {
                        CliError::Usage(format!("--tol expects a number, got `{v}`"))
                    })?);
            }
            "--max-iter" => {
                let v = take_value("--max-iter")?;
                overrides.max_iter = Some(v.parse().map_err(|_| {
                    CliError::Usage(format!("--max-iter expects an integer, got `{v}`"))
                })?);
            }
            "--seed" => {
                let v = take_value("--seed")?;
                overrides.seed = Some(v.parse().map_err(|_| {
                    CliError::Usage(format!("--seed expects an integer, got `{v}`"))
                })?);
            }
            "--tau" => {
                let v = take_value("--tau")?;
                overrides.tau = Some(v.parse().map_err(|_| {
                    CliError::Usage(format!("--tau expects an integer, got `{v}`"))
                })?);
            }
            "--obstacles" => overrides.use_obstacles = true,
            other if other.starts_with('-') => {
                return Err(CliError::Usage(format!(
                    "unknown option `{other}`\n\n{USAGE}"
                )));
            }
            other => {
                if input.is_some() {
                    return Err(CliError::Usage(format!("unexpected argument `{other}`")));
                }
                input = Some(PathBuf::from(other));
            }
        }
        i += 1;
    }

    let input = input.ok_or_else(|| CliError::Usage(format!("missing config path\n\n{USAGE}")))?;
    Ok(RunConfig {
        mode,
        input,
        out_dir,
        overrides,
    })
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cfg = match parse_args(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    };
    if let Err(e) = run(&cfg) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
