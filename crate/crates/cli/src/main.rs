use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use groupext::driver::{decide, verify_certificate, Extreme, Mode};
use groupext::generators::{averaged_pair_seed, diagonal_lift, gmic, horizontal_lift};
use groupext::io::{
    certificate_to_json, function_to_json, heatmap_csv, one_d_to_json, parse_certificate,
    parse_function, parse_one_d, to_json, VerdictReport,
};
use groupext::scalar::{format_rat, parse_rat, parse_rat_pair};
use groupext::Point;

const EXIT_DECIDED: u8 = 0;
const EXIT_IO: u8 = 1;
const EXIT_NOT_MINIMAL: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;
const EXIT_INVALID: u8 = 4;
const EXIT_FAILURE: u8 = 5;

#[derive(Parser)]
#[command(
    name = "groupext",
    version,
    about = "Extremality testing for two-dimensional piecewise linear group functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fast,
    Structural,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum LiftKind {
    Diagonal,
    Horizontal,
}

#[derive(Subcommand)]
enum Command {
    /// Decide minimality and extremality of a function file.
    Check {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "fast")]
        mode: ModeArg,
        /// Write the certificate JSON here.
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// Write a CSV of Δπ(u, f ⊖ u) on the 1/(4q) grid here.
        #[arg(long)]
        heatmap: Option<PathBuf>,
        /// Include stage timings in the report.
        #[arg(long)]
        timings: bool,
    },
    /// Write a one-dimensional seed.
    Gen {
        #[command(subcommand)]
        seed: Seed,
        #[arg(long, short, global = true)]
        output: Option<PathBuf>,
    },
    /// Lift a one-dimensional seed to a two-dimensional function file.
    Lift {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "diagonal")]
        kind: LiftKind,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Re-check a certificate against a function file.
    Verify {
        function: PathBuf,
        certificate: PathBuf,
    },
    /// Evaluate a function at a rational point "x1,x2".
    Eval { function: PathBuf, point: String },
}

#[derive(Subcommand)]
enum Seed {
    /// Gomory mixed-integer function on the 1/q grid.
    Gmic {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        f: String,
    },
    /// Average of two distinct minimal functions on the 1/8 grid.
    AveragedPair,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

type CliResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_err(path: &Path) -> impl Fn(groupext::Error) -> Failure + '_ {
    move |e| Failure::io(format!("{}: {e}", path.display()))
}

fn check(
    input: &Path,
    mode: ModeArg,
    certificate: Option<&Path>,
    heatmap: Option<&Path>,
    timings: bool,
) -> CliResult {
    let pi = parse_function(&read(input)?).map_err(parse_err(input))?;
    if let Some(h) = heatmap {
        let csv = heatmap_csv(&pi).map_err(|e| Failure::io(e.to_string()))?;
        write(h, &csv)?;
    }
    let mode = match mode {
        ModeArg::Fast => Mode::Fast,
        ModeArg::Structural => Mode::Structural,
        ModeArg::Both => Mode::Both,
    };
    let verdict = decide(&pi, mode).map_err(|e| Failure {
        code: EXIT_FAILURE,
        message: e.to_string(),
    })?;
    print!("{}", to_json(&VerdictReport::new(&verdict, timings)));
    if let (Some(path), Some(c)) = (certificate, &verdict.certificate) {
        write(path, &certificate_to_json(c))?;
    }
    Ok(match verdict.extreme {
        None => EXIT_NOT_MINIMAL,
        Some(Extreme::Inconclusive) => EXIT_INCONCLUSIVE,
        Some(_) => EXIT_DECIDED,
    })
}

fn gen(seed: &Seed, output: Option<&Path>) -> CliResult {
    let z = match seed {
        Seed::Gmic { q, f } => {
            let f0 = parse_rat(f).map_err(|e| Failure::io(format!("--f: {e}")))?;
            gmic(*q, f0).map_err(|e| Failure::io(e.to_string()))?
        }
        Seed::AveragedPair => averaged_pair_seed(),
    };
    emit(output, &one_d_to_json(&z))?;
    Ok(EXIT_DECIDED)
}

fn lift(input: &Path, kind: LiftKind, output: Option<&Path>) -> CliResult {
    let z = parse_one_d(&read(input)?).map_err(parse_err(input))?;
    let pi = match kind {
        LiftKind::Diagonal => diagonal_lift(&z),
        LiftKind::Horizontal => horizontal_lift(&z),
    };
    emit(output, &function_to_json(&pi))?;
    Ok(EXIT_DECIDED)
}

fn verify(function: &Path, certificate: &Path) -> CliResult {
    let pi = parse_function(&read(function)?).map_err(parse_err(function))?;
    let c = parse_certificate(&read(certificate)?).map_err(parse_err(certificate))?;
    let result = verify_certificate(&pi, &c);
    let report = match &result {
        Ok(()) => serde_json::json!({ "valid": true }),
        Err(reason) => serde_json::json!({ "valid": false, "reason": reason }),
    };
    print!("{}", to_json(&report));
    Ok(if result.is_ok() {
        EXIT_DECIDED
    } else {
        EXIT_INVALID
    })
}

fn eval(function: &Path, point: &str) -> CliResult {
    let pi = parse_function(&read(function)?).map_err(parse_err(function))?;
    let (x1, x2) = parse_rat_pair(point).map_err(|e| Failure::io(format!("point: {e}")))?;
    let v = pi.eval(&Point::new(x1, x2));
    print!("{}", to_json(&format_rat(&v)));
    Ok(EXIT_DECIDED)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("GROUPEXT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        Failure::io(format!(
            "GROUPEXT_THREADS: expected a non-negative integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::io(format!("GROUPEXT_THREADS: {e}")))
}

fn run(cli: &Cli) -> CliResult {
    configure_threads()?;
    match &cli.command {
        Command::Check {
            input,
            mode,
            certificate,
            heatmap,
            timings,
        } => check(
            input,
            *mode,
            certificate.as_deref(),
            heatmap.as_deref(),
            *timings,
        ),
        Command::Gen { seed, output } => gen(seed, output.as_deref()),
        Command::Lift {
            input,
            kind,
            output,
        } => lift(input, *kind, output.as_deref()),
        Command::Verify {
            function,
            certificate,
        } => verify(function, certificate),
        Command::Eval { function, point } => eval(function, point),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_IO
            } else {
                EXIT_DECIDED
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("groupext: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
