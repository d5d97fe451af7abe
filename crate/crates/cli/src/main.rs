//! `poscone`: distances, geodesics, projections, factorizations, closure
//! checks and randomized verification from the command line.
//!
//! Matrices are read from JSON files (`-` for standard input). Exit codes:
//! 0 on success, 1 when a mathematical check fails or an iteration does not
//! converge, 2 on usage, parse or I/O errors.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use poscone::convexity::{
    check_double_bracket, standard_subspace, Closure, ConvexSubmanifold, Subspace, SubspaceKind, DEFAULT_CLOSURE_TOL,
};
use poscone::geometry::{dist, geodesic};
use poscone::io::{self as pio, ClosureJson, FactorizationJson, ProjectionJson};
use poscone::projection::{self, DEFAULT_MAX_ITER, DEFAULT_PROJECTION_TOL};
use poscone::verify::{self, Suite, VerifyConfig};
use poscone::{Algebra, Error};

#[derive(Parser)]
#[command(name = "poscone", version, about = "Trace-metric geometry of positive matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Geodesic distance between two positive elements.
    Dist { a: PathBuf, b: PathBuf },
    /// Point at time t on the geodesic from a to b.
    Geodesic {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
    },
    /// Nearest point of e^H to a positive element.
    Project {
        r: PathBuf,
        /// `diagonal`, `full`, `blocks=1,2|3` (1-based indices) or a
        /// subspace file.
        #[arg(long)]
        subspace: String,
        /// Orthogonality tolerance, scaled by 1 + distance.
        #[arg(long, env = "POSCONE_DEFAULT_TOL")]
        tol: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Symmetric, masa or Iwasawa factorization.
    Factor {
        input: PathBuf,
        /// Required for symmetric and Iwasawa modes.
        #[arg(long)]
        subspace: Option<String>,
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// Double-bracket closure test of a subspace.
    Closure {
        h: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CLOSURE_TOL)]
        tol: f64,
    },
    /// Randomized property suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 5])]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Multiplier applied to every property tolerance.
        #[arg(long, default_value_t = 1.0)]
        tol: f64,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include the wall time in the report.
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Symmetric,
    Masa,
    Iwasawa,
}

/// Command failure with its exit code.
enum Failure {
    /// Exit 1; the payload, if any, goes to standard output.
    Math { message: String, payload: Option<String> },
    /// Exit 2.
    Usage(String),
}

type Outcome = Result<String, Failure>;

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence { .. }
            | Error::EigenNonConvergence { .. }
            | Error::NotClosed { .. }
            | Error::Conditioning { .. } => Failure::Math {
                message: e.to_string(),
                payload: None,
            },
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Usage(format!("reading standard input: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("reading {}: {e}", path.display())))
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, Failure> {
    Ok(pio::to_json(v)?)
}

/// Parses `blocks=1,2|3` into 0-based index groups.
fn parse_blocks(choice: &str) -> Result<Vec<Vec<usize>>, Failure> {
    choice
        .split('|')
        .map(|group| {
            group
                .split(',')
                .map(|i| match i.trim().parse::<usize>() {
                    Ok(k) if k >= 1 => Ok(k - 1),
                    _ => Err(Failure::Usage(format!(
                        "invalid block index {i:?} (indices start at 1)"
                    ))),
                })
                .collect()
        })
        .collect()
}

fn load_subspace(choice: &str, alg: &Algebra) -> Result<Subspace, Failure> {
    let kind = match choice {
        "diagonal" => SubspaceKind::Diagonal,
        "full" => SubspaceKind::Full,
        s if s.starts_with("blocks=") => SubspaceKind::BlockDiagonal(parse_blocks(&s["blocks=".len()..])?),
        path => {
            let h = pio::parse_subspace(&read_input(Path::new(path))?)?;
            if h.algebra() != alg {
                return Err(Error::AlgebraMismatch.into());
            }
            return Ok(h);
        }
    };
    Ok(standard_subspace(alg, &kind)?)
}

/// Certifies closure, reporting the witness on failure.
fn certify(h: Subspace) -> Result<ConvexSubmanifold, Failure> {
    let summary = match check_double_bracket(&h, DEFAULT_CLOSURE_TOL) {
        Closure::Pass { .. } => return Ok(ConvexSubmanifold::certify(h).expect("closure checked")),
        fail => ClosureJson::new(&h, DEFAULT_CLOSURE_TOL, &fail),
    };
    Err(Failure::Math {
        message: "subspace fails the double-bracket closure test".into(),
        payload: Some(json(&summary)?),
    })
}

fn cmd_dist(a: &Path, b: &Path) -> Outcome {
    let a = pio::parse_positive(&read_input(a)?)?;
    let b = pio::parse_positive(&read_input(b)?)?;
    Ok(format!("{:.16e}", dist(&a, &b)?))
}

fn cmd_geodesic(a: &Path, b: &Path, t: f64) -> Outcome {
    if !t.is_finite() {
        return Err(Failure::Usage(format!("t must be finite, got {t}")));
    }
    let a = pio::parse_positive(&read_input(a)?)?;
    let b = pio::parse_positive(&read_input(b)?)?;
    let p = geodesic(&a, &b)?.evaluate(t)?;
    Ok(pio::hermitian_to_json(p.value())?)
}

fn cmd_project(r: &Path, subspace: &str, tol: Option<f64>, max_iter: usize) -> Outcome {
    let tol = tol.unwrap_or(DEFAULT_PROJECTION_TOL);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Failure::Usage(format!("tolerance must be positive, got {tol}")));
    }
    let r = pio::parse_positive(&read_input(r)?)?;
    let m = certify(load_subspace(subspace, r.algebra())?)?;
    let res = projection::project(&m, &r, tol, max_iter)?;
    json(&ProjectionJson::from(&res))
}

fn cmd_factor(input: &Path, subspace: Option<&str>, mode: Mode) -> Outcome {
    let text = read_input(input)?;
    let need_subspace = || subspace.ok_or_else(|| Failure::Usage("--subspace is required for this mode".into()));
    let out = match mode {
        Mode::Symmetric => {
            let z = pio::parse_hermitian(&text)?;
            let m = certify(load_subspace(need_subspace()?, z.algebra())?)?;
            FactorizationJson::from(&projection::factor_symmetric(&m, &z)?)
        }
        Mode::Masa => {
            if subspace.is_some() {
                return Err(Failure::Usage("masa mode always uses the diagonal subspace".into()));
            }
            let x = pio::parse_hermitian(&text)?;
            FactorizationJson::from(&projection::factor_masa(x.algebra(), &x)?)
        }
        Mode::Iwasawa => {
            let g = pio::parse_element(&text)?;
            let m = certify(load_subspace(need_subspace()?, g.algebra())?)?;
            FactorizationJson::from(&projection::factor_iwasawa(&m, &g)?)
        }
    };
    json(&out)
}

fn cmd_closure(h: &Path, tol: f64) -> Outcome {
    if !(tol > 0.0) {
        return Err(Failure::Usage(format!("tolerance must be positive, got {tol}")));
    }
    let h = pio::parse_subspace(&read_input(h)?)?;
    let c = check_double_bracket(&h, tol);
    let text = json(&ClosureJson::new(&h, tol, &c))?;
    if c.passed() {
        Ok(text)
    } else {
        Err(Failure::Math {
            message: "subspace fails the double-bracket closure test".into(),
            payload: Some(text),
        })
    }
}

fn cmd_verify(config: VerifyConfig, out: Option<&Path>, timing: bool) -> Outcome {
    let start = Instant::now();
    let mut report = verify::run(&config)?;
    let elapsed = start.elapsed().as_secs_f64();
    eprintln!("wall time: {elapsed:.2} s");
    if timing {
        report.wall_time_seconds = Some(elapsed);
    }
    for p in report.properties.iter().filter(|p| !p.pass) {
        eprintln!(
            "FAIL {}: max violation {:e} > {:e} (seed {:?})",
            p.name, p.max_violation, p.tolerance, p.worst_seed
        );
    }
    let text = json(&report)?;
    let printed = match out {
        Some(path) => {
            fs::write(path, format!("{text}\n"))
                .map_err(|e| Failure::Usage(format!("writing {}: {e}", path.display())))?;
            format!("report written to {}", path.display())
        }
        None => text,
    };
    if report.pass {
        Ok(printed)
    } else {
        Err(Failure::Math {
            message: "verification failed".into(),
            payload: Some(printed),
        })
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Dist { a, b } => cmd_dist(&a, &b),
        Command::Geodesic { a, b, t } => cmd_geodesic(&a, &b, t),
        Command::Project {
            r,
            subspace,
            tol,
            max_iter,
        } => cmd_project(&r, &subspace, tol, max_iter),
        Command::Factor { input, subspace, mode } => cmd_factor(&input, subspace.as_deref(), mode),
        Command::Closure { h, tol } => cmd_closure(&h, tol),
        Command::Verify {
            suite,
            dims,
            trials,
            seed,
            tol,
            out,
            timing,
        } => cmd_verify(
            VerifyConfig {
                suite,
                dims,
                trials,
                seed,
                tol_scale: tol,
            },
            out.as_deref(),
            timing,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let mut stdout = io::stdout().lock();
    match run(cli) {
        Ok(text) => {
            let _ = writeln!(stdout, "{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Math { message, payload }) => {
            if let Some(p) = payload {
                let _ = writeln!(stdout, "{p}");
            }
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
