use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qpos_cli::{report, scenario};
use qpos_core::suite::{run_suite, SUITES};
use qpos_core::{Exec, Status};

#[derive(Parser)]
#[command(name = "qpos", version, about = "q-positive sets in symmetrically self-dual spaces")]
struct Cli {
    /// Tolerance for inequality decisions on q-values.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Grid pitch, overriding the scenario's grid policy.
    #[arg(long, global = true)]
    grid_pitch: Option<f64>,
    #[arg(long, global = true, hide = true)]
    mutate_q_sign: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write a JSON report.
    Run {
        scenario: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run a property suite; exits 1 if any check fails.
    Suite {
        name: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Also write the checks as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Evaluate one operation; ARGS is a JSON object with `space`, an optional
    /// `set`, and the query fields.
    Eval { op: String, args: String },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match real_main(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("qpos: {msg}");
            ExitCode::from(2)
        }
    }
}

fn real_main(cli: Cli) -> Result<u8, String> {
    if let Some(t) = cli.tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err("--tolerance must be positive".into());
        }
        qpos_core::tol::set_eps(t);
    }
    if cli.grid_pitch.is_some_and(|p| !(p.is_finite() && p > 0.0)) {
        return Err("--grid-pitch must be positive".into());
    }
    qpos_core::tol::set_q_sign_flip(cli.mutate_q_sign);
    configure_threads()?;
    match cli.command {
        Command::Run { scenario, output } => {
            let mut prepared = scenario::load(&scenario).map_err(|e| e.to_string())?;
            if let Some(p) = cli.grid_pitch {
                prepared.scenario.grid.pitch = p;
            }
            let rep = report::run(&prepared, Exec::default());
            let text = serde_json::to_string_pretty(&rep).map_err(|e| e.to_string())?;
            std::fs::write(&output, text + "\n").map_err(|e| format!("{}: {e}", output.display()))?;
            for r in rep.queries.iter().filter(|r| r.error.is_some()) {
                eprintln!("qpos: query {} ({}): {}", r.index, r.query.op, r.error.as_deref().unwrap_or(""));
            }
            Ok(rep.exit_code() as u8)
        }
        Command::Suite { name, seed, json } => {
            if !SUITES.contains(&name.as_str()) {
                return Err(format!("unknown suite '{name}' (known: {})", SUITES.join(", ")));
            }
            let checks = run_suite(&name, seed).map_err(|e| e.to_string())?;
            let count = |s: Status| checks.iter().filter(|c| c.outcome == s).count();
            for c in &checks {
                println!("{:<9} {}::{}  {}", c.outcome.to_string(), c.suite, c.name, c.detail);
            }
            let fails = count(Status::Fails);
            println!(
                "{} checks: {} holds, {} fails, {} undecided",
                checks.len(),
                count(Status::Holds),
                fails,
                count(Status::Undecided)
            );
            if let Some(path) = json {
                let text = serde_json::to_string_pretty(&checks).map_err(|e| e.to_string())?;
                std::fs::write(&path, text + "\n").map_err(|e| format!("{}: {e}", path.display()))?;
            }
            Ok(u8::from(fails > 0))
        }
        Command::Eval { op, args } => {
            let prepared = eval_scenario(&op, &args, cli.grid_pitch)?;
            let rep = report::run(&prepared, Exec::Sequential);
            let rec = &rep.queries[0];
            println!("{}", serde_json::to_string_pretty(rec).map_err(|e| e.to_string())?);
            Ok(rep.exit_code() as u8)
        }
    }
}

/// Wraps an inline `eval` request as a one-query scenario.
fn eval_scenario(op: &str, args: &str, pitch: Option<f64>) -> Result<scenario::Prepared, String> {
    let mut obj: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(args).map_err(|e| format!("eval arguments: {e}"))?;
    let space = obj.remove("space").ok_or("eval arguments: missing 'space'")?;
    let grid = obj.remove("grid");
    let mut sets = serde_json::Map::new();
    if let Some(set) = obj.remove("set") {
        sets.insert("arg".into(), set);
        obj.insert("set".into(), "arg".into());
    }
    obj.insert("op".into(), op.into());
    let mut sc = serde_json::json!({
        "schema_version": scenario::SCHEMA_VERSION,
        "space": space,
        "sets": sets,
        "queries": [obj],
    });
    if let Some(g) = grid {
        sc["grid"] = g;
    }
    let mut parsed: scenario::Scenario = serde_json::from_value(sc).map_err(|e| format!("eval arguments: {e}"))?;
    if let Some(p) = pitch {
        parsed.grid.pitch = p;
    }
    scenario::prepare(parsed, std::path::Path::new(".")).map_err(|e| e.to_string())
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("QPOS_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("QPOS_THREADS: not a count: {v:?}"))?;
    if n == 0 {
        return Err("QPOS_THREADS must be at least 1".into());
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    Ok(())
}
