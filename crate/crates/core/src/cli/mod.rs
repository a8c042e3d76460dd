//! Command-line front end. Every subcommand produces a JSON [`Report`];
//! the exit code is 0 exactly when every check in it passed.

mod report;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::axioms::axiom_suite;
use crate::bell::{self, JointMeasure4};
use crate::cpm;
use crate::diagram::{export_dot, normalize, validate};
use crate::dsl::{self, Program};
use crate::entropy;
use crate::smatrix;
use crate::tensor;
use crate::DEFAULT_ATOL;

pub use report::{Check, CliError, Report};

/// Environment variable holding the default absolute tolerance.
pub const ATOL_ENV: &str = "QDIAG_ATOL";

#[derive(Debug, Parser)]
#[command(name = "qdiag", version, about = "Typed quantum string diagrams with JSON reports")]
struct Cli {
    /// Absolute tolerance; overrides QDIAG_ATOL.
    #[arg(long, global = true)]
    atol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a named diagram and dump its tensor.
    Eval { file: PathBuf, diagram: String },
    /// Run the snake, symmetry, Frobenius and dagger equations on every declared wire.
    CheckAxioms { file: PathBuf },
    /// Double a diagram into a channel and audit it.
    Cpm { file: PathBuf, diagram: String },
    /// Cluster-decompose a named S-matrix.
    Cluster {
        file: PathBuf,
        smatrix: String,
        #[arg(long, default_value_t = 32)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// CHSH bounds for hidden-variable models or quantum states.
    Bell {
        #[arg(long, value_enum)]
        mode: BellMode,
        #[arg(long, value_enum, default_value_t = BellState::Singlet)]
        state: BellState,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check entropy preservation of a named channel.
    Entropy {
        file: PathBuf,
        channel: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a diagram as a Graphviz DOT file.
    Render {
        file: PathBuf,
        diagram: String,
        #[arg(long)]
        dot: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BellMode {
    Lhv,
    Quantum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BellState {
    Singlet,
    Product,
}

/// Parses `args` (including the program name), runs the command and returns
/// the JSON text to print and the process exit code.
pub fn run<I, T>(args: I) -> (String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => (e.to_string(), 0),
                _ => (CliError::new("usage", e.to_string()).to_json(), 2),
            };
        }
    };
    let echo: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(cli, echo) {
        Ok(report) => {
            let code = if report.all_passed() { 0 } else { 1 };
            (report.to_json(), code)
        }
        Err(e) => (e.to_json(), 2),
    }
}

fn resolve_atol(flag: Option<f64>) -> Result<f64, CliError> {
    let atol = match flag {
        Some(a) => a,
        None => match std::env::var(ATOL_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::new("config", format!("{ATOL_ENV}={v:?} is not a number")))?,
            Err(_) => DEFAULT_ATOL,
        },
    };
    if !(atol.is_finite() && atol >= 0.0) {
        return Err(CliError::new("config", format!("tolerance {atol} must be finite and nonnegative")));
    }
    Ok(atol)
}

fn load(file: &PathBuf) -> Result<Program, CliError> {
    let text = fs::read_to_string(file)
        .map_err(|e| CliError::new("io", format!("{}: {e}", file.display())))?;
    dsl::parse(&text).map_err(|e| CliError::new("parse", e.to_string()))
}

fn execute(cli: Cli, echo: Vec<String>) -> Result<Report, CliError> {
    let atol = resolve_atol(cli.atol)?;
    let mut report = Report::new(echo, atol);
    match cli.command {
        Command::Eval { file, diagram } => {
            let program = load(&file)?;
            let d = program.diagram(&diagram).map_err(CliError::program)?;
            let t = tensor::evaluate(&d).map_err(CliError::eval)?;
            let nf = normalize(&d).map_err(CliError::diagram)?;
            let tn = tensor::evaluate(&nf).map_err(CliError::eval)?;
            let entries: Vec<[f64; 2]> = t.entries().iter().map(|z| [z.re, z.im]).collect();
            report.push(Check::new(
                "evaluate",
                true,
                json!({
                    "shape": t.shape(),
                    "outputs": t.out_dims().len(),
                    "entries": entries,
                }),
            ));
            let residual = max_entry_diff(&t, &tn);
            report.push(Check::new(
                "normal_form_agrees",
                residual <= atol,
                json!({ "residual": residual, "size": d.size(), "normal_size": nf.size() }),
            ));
        }
        Command::CheckAxioms { file } => {
            let program = load(&file)?;
            for (name, w) in program.wires() {
                for check in axiom_suite(w, atol) {
                    report.push(Check::new(
                        format!("{name}/{}", check.name),
                        check.passed,
                        json!({ "deviation": check.deviation, "dim": w.dim() }),
                    ));
                }
            }
            for name in program.diagram_names() {
                let d = program.diagram(name).map_err(CliError::program)?;
                let typed = validate(&d);
                report.push(Check::new(
                    format!("{name}/well_typed"),
                    typed.is_ok(),
                    json!({ "error": typed.err().map(|e| e.to_string()) }),
                ));
            }
        }
        Command::Cpm { file, diagram } => {
            let program = load(&file)?;
            let d = program.diagram(&diagram).map_err(CliError::program)?;
            let ch = cpm::double(&d).map_err(|e| CliError::new("cpm", e.to_string()))?;
            let audit = cpm::channel_audit(&ch, atol);
            report.push(Check::new(
                "completely_positive",
                audit.is_cp,
                json!({
                    "choi_min_eigenvalue": audit.choi_min_eigenvalue,
                    "choi_rank": audit.choi_rank,
                    "dim_in": ch.dim_in(),
                    "dim_out": ch.dim_out(),
                }),
            ));
            report.push(Check::new(
                "causal",
                cpm::causality_check(&ch, atol),
                json!({
                    "trace_preserving": audit.is_tp,
                    "tp_deviation": audit.tp_deviation,
                    "unital": audit.is_unital,
                    "unital_deviation": audit.unital_deviation,
                    "unitary": audit.is_unitary,
                }),
            ));
        }
        Command::Cluster {
            file,
            smatrix: name,
            samples,
            seed,
        } => {
            report.seed = Some(seed);
            let program = load(&file)?;
            let s = program.smatrix(&name).map_err(CliError::program)?;
            let dev = smatrix::unitarity_check(&s);
            report.push(Check::new("unitary", dev <= atol, json!({ "deviation": dev })));
            let terms = smatrix::connected_parts(&s).map_err(CliError::smatrix)?;
            let listed: Vec<_> = terms
                .iter()
                .map(|t| json!({ "partition": t.label(), "norm": t.operator().norm() }))
                .collect();
            let back = smatrix::recombine(&terms).map_err(CliError::smatrix)?;
            let residual = crate::linalg::max_abs_diff(back.matrix(), s.matrix());
            report.push(Check::new(
                "round_trip",
                residual <= atol,
                json!({ "residual": residual, "terms": listed }),
            ));
            let w = smatrix::quantumness_witness(&s, samples, seed, atol).map_err(CliError::smatrix)?;
            report.push(Check::new(
                "local_operators_do_not_entangle",
                !(w.structurally_local && w.entangling),
                json!({
                    "entangling": w.entangling,
                    "structurally_local": w.structurally_local,
                    "max_entropy": w.max_entropy,
                    "inputs_tested": w.inputs_tested,
                }),
            ));
        }
        Command::Bell {
            mode,
            state,
            grid,
            samples,
            seed,
        } => match mode {
            BellMode::Lhv => {
                report.seed = Some(seed);
                let r = bell::lhv_maximum();
                report.push(Check::new(
                    "lhv_maximum",
                    r.max == 2.0 && r.min == -2.0,
                    json!({ "lhv_max": r.max, "lhv_min": r.min, "maximizers": r.maximizers.len() }),
                ));
                report.push(Check::new(
                    "factorized_identity",
                    r.identity_holds,
                    json!({ "tuples": 16 }),
                ));
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut worst: f64 = 0.0;
                for _ in 0..samples {
                    let mut w = [0.0; 16];
                    for v in &mut w {
                        *v = -rng.random::<f64>().ln();
                    }
                    let total: f64 = w.iter().sum();
                    w.iter_mut().for_each(|v| *v /= total);
                    worst = worst.max(bell::chsh_of_joint(&JointMeasure4::new(w)).abs());
                }
                report.push(Check::new(
                    "random_joint_measures",
                    worst <= 2.0 + 1e-12,
                    json!({ "samples": samples, "max_abs_chsh": worst }),
                ));
            }
            BellMode::Quantum => {
                let psi = match state {
                    BellState::Singlet => bell::singlet(),
                    BellState::Product => bell::product_zero(),
                };
                let r = bell::tsirelson_scan(&psi, grid, atol)
                    .map_err(|e| CliError::new("bell", e.to_string()))?;
                let ceiling = 2.0 * 2f64.sqrt();
                report.push(Check::new(
                    "tsirelson_scan",
                    r.max_chsh <= ceiling + 1e-6,
                    json!({
                        "max_chsh": r.max_chsh,
                        "best_settings": r.best_settings,
                        "grid": r.resolution,
                        "violates_lhv_bound": r.max_chsh > 2.0 + atol,
                    }),
                ));
            }
        },
        Command::Entropy {
            file,
            channel,
            samples,
            seed,
        } => {
            report.seed = Some(seed);
            let program = load(&file)?;
            let ch = program.channel(&channel).map_err(CliError::program)?;
            let r = entropy::entropy_preservation_report(&ch, samples, seed, atol)
                .map_err(|e| CliError::new("entropy", e.to_string()))?;
            report.push(Check::new(
                "entropy_preservation",
                r.agreement,
                json!({
                    "preserved_on_all": r.preserved_on_all,
                    "unitary": r.unitary,
                    "max_delta": r.max_delta,
                    "samples": r.samples,
                    "log_base": entropy::LOG_BASE,
                }),
            ));
        }
        Command::Render { file, diagram, dot } => {
            let program = load(&file)?;
            let d = program.diagram(&diagram).map_err(CliError::program)?;
            let text = export_dot(&d).map_err(CliError::diagram)?;
            fs::write(&dot, &text).map_err(|e| CliError::new("io", format!("{}: {e}", dot.display())))?;
            report.push(Check::new(
                "render",
                true,
                json!({ "path": dot.display().to_string(), "bytes": text.len() }),
            ));
        }
    }
    Ok(report)
}

fn max_entry_diff(a: &tensor::ComplexTensor, b: &tensor::ComplexTensor) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
