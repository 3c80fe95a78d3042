use eblab_cli::experiment::{list_fixtures, run_experiment, run_trace, ExperimentConfig};
use eblab_core::reglab::Verdict;
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "usage:
  eblab run <config> [--seed N] [--out DIR]    run every estimator and claim check
  eblab trace <config> [--seed N] [--out DIR]  solver trace only
  eblab list-fixtures                          print the fixture registry

exit status: 0 when no claim FAILED (SKIPPED is not failure), nonzero otherwise.";

struct Args {
    config_path: PathBuf,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

fn parse_flags(rest: &[String]) -> Result<Args, String> {
    if rest.is_empty() {
        return Err("missing <config> argument".to_string());
    }
    let mut args = Args {
        config_path: PathBuf::from(&rest[0]),
        seed: None,
        out: None,
    };
    let mut i = 1;
    while i < rest.len() {
        match rest[i].as_str() {
            "--seed" => {
                let v = rest.get(i + 1).ok_or("--seed needs a value")?;
                args.seed = Some(v.parse().map_err(|_| format!("invalid seed `{v}`"))?);
                i += 2;
            }
            "--out" => {
                let v = rest.get(i + 1).ok_or("--out needs a value")?;
                args.out = Some(PathBuf::from(v));
                i += 2;
            }
            other => return Err(format!("unknown flag `{other}`")),
        }
    }
    Ok(args)
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    ExperimentConfig::from_text(&text).map_err(|e| e.to_string())
}

fn cmd_run(args: Args) -> ExitCode {
    let cfg = match load_config(&args.config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_experiment(&cfg, args.seed, args.out) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            let r = &outcome.report;
            println!("fixture {} (step {}):", r.fixture, r.step);
            println!(
                "  mu_ambient = {}, mu_manifold = {}, mu_proximal = {}",
                r.mu_ambient, r.mu_manifold, r.mu_proximal
            );
            println!("  eta = {}, delta = {}", r.eta_sharpness, r.delta_growth);
            for v in &r.verdicts {
                println!(
                    "  claim {:<24} {:<8} {}",
                    v.claim,
                    v.verdict.to_string(),
                    v.value
                );
            }
            println!("  note: {}", r.note);
            println!("artifacts in {}", outcome.out_dir.display());
            if outcome.failed() {
                let failed: Vec<&str> = r
                    .verdicts
                    .iter()
                    .filter(|v| v.verdict == Verdict::Fail)
                    .map(|v| v.claim)
                    .collect();
                eprintln!("error: claims FAILED: {}", failed.join(", "));
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_trace(args: Args) -> ExitCode {
    let cfg = match load_config(&args.config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_trace(&cfg, args.seed, args.out) {
        Ok((dir, trace)) => {
            println!(
                "trace: {} iterates, final residual {:e}",
                trace.len(),
                trace.residuals.last().copied().unwrap_or(f64::NAN)
            );
            println!("artifacts in {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match argv.first().map(String::as_str) {
        Some("run") => match parse_flags(&argv[1..]) {
            Ok(args) => cmd_run(args),
            Err(e) => {
                eprintln!("error: {e}\n{USAGE}");
                ExitCode::from(2)
            }
        },
        Some("trace") => match parse_flags(&argv[1..]) {
            Ok(args) => cmd_trace(args),
            Err(e) => {
                eprintln!("error: {e}\n{USAGE}");
                ExitCode::from(2)
            }
        },
        Some("list-fixtures") => {
            print!("{}", list_fixtures());
            ExitCode::SUCCESS
        }
        _ => {
            eprintln!("{USAGE}");
            ExitCode::from(2)
        }
    }
}
