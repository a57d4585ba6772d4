use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use logres::oracle::{check_run, independence};
use logres::principalize::{DriverOptions, DEFAULT_MAX_DEPTH};
use logres::problem::{Mode, ProblemError, ProblemFile};
use logres::trace::Trace;

const EXIT_PARSE: u8 = 3;
const EXIT_INTERNAL: u8 = 5;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Emit {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Princip,
    OrderReduce,
    Desing,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Princip => Mode::Princip,
            ModeArg::OrderReduce => Mode::OrderReduce,
            ModeArg::Desing => Mode::Desing,
        }
    }
}

/// Relative logarithmic principalization and order reduction on a single chart.
///
/// Exit codes: 0 resolved, 2 failure over the given base, 3 parse error, 4 depth cap,
/// 5 internal invariant violation or failed check.
#[derive(Debug, Parser)]
#[command(name = "logres", version)]
struct Args {
    /// Problem file (`-` reads standard input).
    file: PathBuf,
    /// Overrides the mode given in the file.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    max_depth: usize,
    #[arg(long, value_enum, default_value_t = Emit::Json)]
    emit: Emit,
    /// Runs the brute-force oracles and reports on standard error.
    #[arg(long)]
    check: bool,
    /// Picks the k-th valid maximal contact wherever several exist.
    #[arg(long)]
    contact_choice: Option<usize>,
    /// Reruns under every contact choice and reports whether the centers agree.
    #[arg(long)]
    independence: bool,
}

fn read_input(path: &PathBuf) -> std::io::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path)
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match read_input(&args.file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{}: {e}", args.file.display());
            return ExitCode::from(EXIT_PARSE);
        }
    };
    let mut file = match ProblemFile::parse(&text) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{}: {e}", args.file.display());
            return ExitCode::from(EXIT_PARSE);
        }
    };
    if let Some(m) = args.mode {
        file.mode = m.into();
    }
    if let Some(k) = args.contact_choice {
        file.contact_choice = Some(k);
    }
    let opts = DriverOptions {
        max_depth: args.max_depth,
        contact_choice: file.contact_choice.unwrap_or(0),
    };
    let run = match file.solve(&opts) {
        Ok(r) => r,
        Err(e @ (ProblemError::Monoid(_) | ProblemError::Ring(_))) => {
            eprintln!("{}: {e}", args.file.display());
            return ExitCode::from(EXIT_PARSE);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INTERNAL);
        }
    };
    let trace = Trace::from_run(&run);
    match args.emit {
        Emit::Json => print!("{}", trace.to_json()),
        Emit::Text => print!("{}", trace.to_text()),
    }
    let mut checks_ok = true;
    if args.check {
        match check_run(&file, &opts, &run) {
            Ok(lines) => {
                for l in lines {
                    eprintln!(
                        "check {}: {} ({})",
                        l.name,
                        if l.pass { "pass" } else { "FAIL" },
                        l.detail
                    );
                    checks_ok &= l.pass;
                }
            }
            Err(e) => {
                eprintln!("check error: {e}");
                checks_ok = false;
            }
        }
    }
    if args.independence {
        match independence(&file, &opts) {
            Ok(rep) => {
                eprintln!(
                    "independence: {} over {} choices (most options at a chart: {})",
                    if rep.identical {
                        "identical"
                    } else {
                        "DIVERGENT"
                    },
                    rep.choices,
                    rep.max_options
                );
                checks_ok &= rep.identical;
            }
            Err(e) => {
                eprintln!("independence error: {e}");
                checks_ok = false;
            }
        }
    }
    if !checks_ok {
        return ExitCode::from(EXIT_INTERNAL);
    }
    ExitCode::from(run.status.exit_code() as u8)
}
