//! Command-line front end.
//!
//! ```text
//! efa run <config>     run the experiment described by a config file
//! efa sweep <config>   same, sweeping every configured epsilon
//! efa check            run the acceptance suite
//! ```
//!
//! Flags: `--out <dir>` overrides the output directory, `--workers <n>` caps
//! the worker pool, `--quiet` suppresses progress lines. Exit code 0 iff all
//! invoked checks pass.

use efa::harness::{run_all, run_experiment, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

struct Cli {
    command: String,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    workers: Option<usize>,
    quiet: bool,
}

fn usage() -> String {
    "usage: efa <run|sweep|check> [config-path] [--out <dir>] [--workers <n>] [--quiet]".into()
}

fn parse_args(args: &[String]) -> Result<Cli, String> {
    let mut it = args.iter();
    let command = it.next().cloned().ok_or_else(usage)?;
    let mut cli = Cli {
        command,
        config: None,
        out: None,
        workers: None,
        quiet: false,
    };
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--out" => {
                cli.out = Some(PathBuf::from(
                    it.next().ok_or("--out needs a directory")?,
                ));
            }
            "--workers" => {
                cli.workers = Some(
                    it.next()
                        .ok_or("--workers needs a count")?
                        .parse()
                        .map_err(|_| "--workers needs an integer".to_string())?,
                );
            }
            "--quiet" => cli.quiet = true,
            other if !other.starts_with('-') && cli.config.is_none() => {
                cli.config = Some(PathBuf::from(other));
            }
            other => return Err(format!("unknown argument `{other}`\n{}", usage())),
        }
    }
    Ok(cli)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match parse_args(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("failed to size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }

    match cli.command.as_str() {
        "check" => {
            let out = cli.out.unwrap_or_else(|| PathBuf::from("out/check"));
            match run_all(&out, cli.quiet) {
                Ok(results) => {
                    let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
                    if cli.quiet {
                        for r in &results {
                            println!("{}", r.line());
                        }
                    }
                    println!(
                        "{} of {} criteria passed",
                        results.len() - failed.len(),
                        results.len()
                    );
                    if failed.is_empty() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::FAILURE
                    }
                }
                Err(e) => {
                    eprintln!("check suite failed to run: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        "run" | "sweep" => {
            let Some(path) = cli.config else {
                eprintln!("{} needs a config path\n{}", cli.command, usage());
                return ExitCode::from(2);
            };
            let mut cfg = match ExperimentConfig::from_file(&path) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("bad config {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            };
            if let Some(out) = cli.out {
                cfg.out_dir = Some(out);
            }
            if cli.command == "run" {
                // a plain run looks at the first configured scale only
                cfg.epsilons.truncate(1);
            }
            if !cli.quiet {
                println!(
                    "{} `{}` with {} scale(s), kernels {:?}",
                    cli.command, cfg.coefficient, cfg.epsilons.len(), cfg.kernel_pairs
                );
            }
            match run_experiment(&cfg) {
                Ok(summary) => {
                    print!("{summary}");
                    if let Some(dir) = &cfg.out_dir {
                        if !cli.quiet {
                            println!("outputs in {}", dir.display());
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("experiment failed: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        other => {
            eprintln!("unknown command `{other}`\n{}", usage());
            ExitCode::from(2)
        }
    }
}
