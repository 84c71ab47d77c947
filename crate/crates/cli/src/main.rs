//! `tamarkin`: exact barcode distances, Hamiltonian energy bounds and the
//! verification suites.
//!
//! Exit status: 0 success, 1 a suite failed, 2 unreadable input or bad
//! usage, 3 a distance search exceeded its size cap (the bracket is still
//! reported), 4 a flow or evaluation blew up.

mod files;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tamarkin_core::distances::{distance_capped, DistanceError, DistanceResult};
use tamarkin_core::hamexpr::{parse, ExprError};
use tamarkin_core::lab::{run_suites, Suite, SuiteSizes};
use tamarkin_core::numerics::{
    advected_extrema, bound_b, osc_norm, osc_norm_restricted, NumericsError, ScalarPath, TimeGrid, DEFAULT_STEP,
};
use tamarkin_core::relations::{RelationKind, DEFAULT_UNKNOWN_CAP};
use tamarkin_core::{Barcode, Extended};

use files::InputError;
use report::{
    BoundBody, BoundInputs, BoundValues, ChainVerdict, DistBody, DistEntry, DistInputs, Report, VerifyBody,
};

const THREADS_ENV: &str = "TAMARKIN_THREADS";

#[derive(Debug, Parser)]
#[command(name = "tamarkin", version, about = "Exact barcode distances and Hamiltonian energy bounds")]
struct Cli {
    /// Worker threads [default: $TAMARKIN_THREADS, else one per core]
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the report here instead of standard output
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Int,
    Wisom,
    Isom,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Chain,
    Promotion,
    Grid,
    Torsion,
    Stability,
    Twoparam,
    Reparam,
    All,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Distances between two barcode files
    Dist {
        /// Barcode file, one `birth death` pair per line
        f: PathBuf,
        g: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        kind: KindArg,
        /// Largest block of coupled unknowns searched exhaustively
        #[arg(long, default_value_t = DEFAULT_UNKNOWN_CAP)]
        cap: usize,
    },
    /// The energy bound B(H, f, A) and related oscillation norms
    Bound {
        /// Hamiltonian file with `dim`, `expr` and `cutoff` or `compact`
        hamiltonian: PathBuf,
        /// Sample cloud; may be omitted when dim = 0
        cloud: Option<PathBuf>,
        /// The comparison function f(s)
        #[arg(long, default_value = "0")]
        f: String,
        /// Nodes of the trapezoid grid on [0, 1]
        #[arg(long, default_value_t = 1001)]
        grid: usize,
        /// Integrator step
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: f64,
    },
    /// Run the verification suites
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        /// Seed of the random suites
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random pairs in the barcode suites
        #[arg(long)]
        pairs: Option<usize>,
        /// Sample points for the two-parameter identity
        #[arg(long)]
        samples: Option<usize>,
        /// Tolerance of the two-parameter identity [default: 1e-3]
        #[arg(long)]
        tol: Option<f64>,
    },
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure {
            code: 2,
            message: e.to_string(),
        }
    }
}

fn numerics_failure(e: NumericsError) -> Failure {
    let code = match &e {
        NumericsError::NonFinite { .. } | NumericsError::Expr(ExprError::Domain(_)) => 4,
        _ => 2,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(message) = configure_threads(cli.threads) {
        eprintln!("tamarkin: {message}");
        return ExitCode::from(2);
    }
    let outcome = match &cli.command {
        Command::Dist { f, g, kind, cap } => dist(f, g, *kind, *cap),
        Command::Bound {
            hamiltonian,
            cloud,
            f,
            grid,
            step,
        } => bound(hamiltonian, cloud.as_deref(), f, *grid, *step),
        Command::Verify {
            suite,
            seed,
            pairs,
            samples,
            tol,
        } => verify(*suite, *seed, *pairs, *samples, *tol),
    };
    let (text, code) = match outcome {
        Ok(done) => done,
        Err(failure) => {
            eprintln!("tamarkin: {}", failure.message);
            return ExitCode::from(failure.code);
        }
    };
    match &cli.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("tamarkin: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(code)
}

fn configure_threads(flag: Option<usize>) -> Result<(), String> {
    let threads = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("{THREADS_ENV} must be a number, got `{v}`"))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = threads.filter(|&n| n > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn load_barcode(path: &Path) -> Result<Barcode, InputError> {
    files::parse_barcode(&files::read(path)?, &path.display().to_string())
}

fn entry(kind: RelationKind, result: Result<DistanceResult, DistanceError>) -> Result<DistEntry, Failure> {
    match result {
        Ok(r) => {
            let (a, b) = match r.optimal_pair {
                Some((a, b)) => (Some(a), Some(b)),
                None => (None, None),
            };
            Ok(DistEntry {
                kind: kind.name(),
                value: r.value,
                exact: r.exact,
                attained: r.attained,
                lower: r.lower,
                upper: r.upper,
                a,
                b,
                error: None,
                certificate: r.certificate,
            })
        }
        Err(DistanceError::SizeExceeded { lower, upper, source }) => Ok(DistEntry {
            kind: kind.name(),
            value: upper.clone(),
            exact: false,
            attained: false,
            lower,
            upper,
            a: None,
            b: None,
            error: Some(source.to_string()),
            certificate: None,
        }),
        Err(DistanceError::Certificate(e)) => Err(Failure {
            code: 2,
            message: e.to_string(),
        }),
    }
}

fn dist(f_path: &Path, g_path: &Path, kind: KindArg, cap: usize) -> Result<(String, u8), Failure> {
    let f = load_barcode(f_path)?;
    let g = load_barcode(g_path)?;
    let kinds: Vec<RelationKind> = match kind {
        KindArg::Int => vec![RelationKind::Interleaved],
        KindArg::Wisom => vec![RelationKind::WeakIsom],
        KindArg::Isom => vec![RelationKind::Isom],
        KindArg::All => RelationKind::ALL.to_vec(),
    };
    let entries = kinds
        .iter()
        .map(|&k| entry(k, distance_capped(k, &f, &g, cap)))
        .collect::<Result<Vec<_>, _>>()?;
    let all_exact = entries.iter().all(|e| e.exact);
    let chain = (kind == KindArg::All && all_exact).then(|| {
        let [d_int, d_wisom, d_isom] = [0, 1, 2].map(|i| entries[i].value.clone());
        let twice: Extended = d_wisom.double();
        ChainVerdict::from(&tamarkin_core::distances::ChainReport {
            int_le_wisom: d_int <= d_wisom,
            wisom_le_isom: d_wisom <= d_isom,
            isom_le_twice_wisom: d_isom <= twice,
            d_int,
            d_wisom,
            d_isom,
            twice_d_wisom: twice,
        })
    });
    let body = DistBody {
        inputs: DistInputs {
            f: f_path.display().to_string(),
            g: g_path.display().to_string(),
            f_bars: f.to_string(),
            g_bars: g.to_string(),
            kind: format!("{kind:?}").to_lowercase(),
            cap,
        },
        distances: entries,
        chain,
    };
    if !all_exact {
        for e in body.distances.iter().filter(|e| !e.exact) {
            eprintln!(
                "tamarkin: d_{} only bracketed in [{}, {}]: {}",
                e.kind,
                e.lower,
                e.upper,
                e.error.as_deref().unwrap_or("size cap exceeded")
            );
        }
    }
    let code = if all_exact { 0 } else { 3 };
    Ok((Report::new("dist", body).to_toml(), code))
}

fn bound(
    ham_path: &Path,
    cloud_path: Option<&Path>,
    f_text: &str,
    nodes: usize,
    step: f64,
) -> Result<(String, u8), Failure> {
    let source = ham_path.display().to_string();
    let ham = files::parse_hamiltonian(&files::read(ham_path)?, &source)?;
    let h = ham.effective()?;
    let cloud = match cloud_path {
        Some(p) => files::parse_cloud(&files::read(p)?, &p.display().to_string(), ham.dim)?,
        None if ham.dim == 0 => files::parse_cloud("", "<point>", 0)?,
        None => {
            return Err(Failure {
                code: 2,
                message: "a sample cloud is required when dim > 0".into(),
            })
        }
    };
    let usage = |message: String| Failure { code: 2, message };
    if !(step > 0.0 && step.is_finite()) {
        return Err(usage(format!("--step must be positive, got {step}")));
    }
    let grid = TimeGrid::trapezoid(nodes).map_err(|e| usage(e.to_string()))?;
    let f_expr = parse(f_text, 0).map_err(|e| usage(format!("--f: {e}")))?;
    let f = ScalarPath::new(f_expr).map_err(|e| usage(format!("--f: {e}")))?;

    let b = bound_b(&h, &f, &cloud, &grid, step).map_err(numerics_failure)?;
    let b_zero_f = bound_b(&h, &ScalarPath::zero(), &cloud, &grid, step).map_err(numerics_failure)?;
    let osc_restricted = osc_norm_restricted(&h, &cloud, &grid).map_err(numerics_failure)?;
    let osc_padded = osc_norm(&h, &cloud, &grid, true).map_err(numerics_failure)?;
    let ext = advected_extrema(&h, &cloud, &grid, step).map_err(numerics_failure)?;
    let spread: Vec<f64> = ext.max.iter().zip(&ext.min).map(|(a, b)| a - b).collect();
    let body = BoundBody {
        inputs: BoundInputs {
            hamiltonian: source,
            cloud: cloud_path.map_or_else(|| "point".to_string(), |p| p.display().to_string()),
            dim: ham.dim,
            expr: h.to_string(),
            points: cloud.len(),
            f: f.expr().to_string(),
            grid_nodes: nodes,
            step,
        },
        bound: BoundValues {
            b,
            b_zero_f,
            osc_restricted,
            osc_padded,
            osc_advected: grid.integrate(&spread),
            c: f.integral(),
            note: "maxima over a finite sample under-approximate those over the set",
        },
    };
    Ok((Report::new("bound", body).to_toml(), 0))
}

fn verify(
    suite: SuiteArg,
    seed: u64,
    pairs: Option<usize>,
    samples: Option<usize>,
    tol: Option<f64>,
) -> Result<(String, u8), Failure> {
    let suites: Vec<Suite> = match suite {
        SuiteArg::All => Suite::ALL.to_vec(),
        SuiteArg::Chain => vec![Suite::Chain],
        SuiteArg::Promotion => vec![Suite::Promotion],
        SuiteArg::Grid => vec![Suite::Grid],
        SuiteArg::Torsion => vec![Suite::Torsion],
        SuiteArg::Stability => vec![Suite::Stability],
        SuiteArg::Twoparam => vec![Suite::TwoParam],
        SuiteArg::Reparam => vec![Suite::Reparam],
    };
    let mut sizes = SuiteSizes::default();
    if let Some(n) = pairs {
        sizes.chain_pairs = n;
        sizes.promotion_pairs = n;
        sizes.grid_pairs = n;
        sizes.torsion_pairs = n;
    }
    if let Some(n) = samples {
        sizes.identity_samples = n.max(1);
    }
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure {
                code: 2,
                message: format!("--tol must be positive, got {t}"),
            });
        }
        sizes.identity_tol = t;
    }
    let report = run_suites(seed, &sizes, &suites);
    for outcome in report.suites.iter().filter(|o| !o.passed()) {
        eprintln!(
            "tamarkin: suite {} failed {} of {} cases: {}",
            outcome.suite.name(),
            outcome.failures,
            outcome.cases,
            outcome.worst.as_deref().unwrap_or("")
        );
    }
    let passed = report.passed();
    let body = VerifyBody {
        passed,
        scope: "point-model specializations and numerical identities; no claim for general base manifolds",
        report,
    };
    Ok((Report::new("verify", body).to_toml(), if passed { 0 } else { 1 }))
}
