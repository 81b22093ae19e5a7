use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nfg_core::algebra::CompoundNfg;
use nfg_core::contraction::{brute_force_cost, exterior, exterior_planned, plan_greedy};
use nfg_core::dsl::{self, ErrorClass, Model};
use nfg_core::linalg::{self, LinalgError, PFAFFIAN_ORACLE_MAX_DIM, REPORT_FLOAT_TOLERANCE};
use nfg_core::suites::{run_suite, Suite, SuiteOptions, DEFAULT_SEED, DEFAULT_TRIALS};
use nfg_core::{Backend, Engine, Scalar, Tensor};

#[derive(Parser)]
#[command(name = "nfg", version, about = "Build, contract and check normal factor graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exterior function of a graph or `let` expression.
    Contract {
        file: PathBuf,
        graph: String,
        #[arg(long, default_value = "planned")]
        engine: Engine,
        #[arg(long, default_value = "exact")]
        backend: Backend,
        /// Write the greedy plan used by the planned engine.
        #[arg(long)]
        plan_out: Option<PathBuf>,
    },
    /// Exit 0 iff the two exterior functions are equal.
    Equal {
        file: PathBuf,
        g1: String,
        g2: String,
        #[arg(long, default_value = "planned")]
        engine: Engine,
        #[arg(long, default_value = "exact")]
        backend: Backend,
    },
    /// Pfaffian of a skew-symmetric matrix via its diagram and via the oracle.
    Pfaffian {
        file: PathBuf,
        matrix: String,
        #[arg(long, default_value = "planned")]
        engine: Engine,
    },
    /// Determinant via its diagram and via the permutation sum.
    Det {
        file: PathBuf,
        matrix: String,
        #[arg(long, default_value = "planned")]
        engine: Engine,
    },
    /// Trace via the self-loop diagram and via the diagonal sum.
    Trace { file: PathBuf, matrix: String },
    /// Run a named identity suite.
    Verify {
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
    },
    /// Print the greedy contraction plan and its estimated cost.
    Plan { file: PathBuf, graph: String },
}

/// Failure with its exit code: 2 usage or parse, 3 validation.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn validation(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }
}

impl From<LinalgError> for Failure {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::NotSquare(_)
            | LinalgError::WrongShape { .. }
            | LinalgError::NotSkewSymmetric { .. }
            | LinalgError::OddDimension(_)
            | LinalgError::OverBound { .. } => Failure::validation(e.to_string()),
            other => Failure::usage(other.to_string()),
        }
    }
}

fn load(file: &Path) -> Result<Model, Failure> {
    let source = fs::read_to_string(file).map_err(|e| Failure::usage(format!("{}: {e}", file.display())))?;
    dsl::load(&source).map_err(|e| {
        let message = format!("{}:{e}", file.display());
        match e.class() {
            ErrorClass::Validation => Failure::validation(message),
            _ => Failure::usage(message),
        }
    })
}

fn expression(model: &Model, name: &str, backend: Backend) -> Result<CompoundNfg, Failure> {
    let c = model.expression(name).ok_or_else(|| Failure::usage(format!("no graph or expression named `{name}`")))?;
    c.to_backend(backend).map_err(|e| Failure::usage(e.to_string()))
}

fn matrix<'a>(model: &'a Model, name: &str) -> Result<&'a Tensor, Failure> {
    model.tensor(name).ok_or_else(|| Failure::usage(format!("no tensor named `{name}`")))
}

fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Contract { file, graph, engine, backend, plan_out } => {
            let model = load(&file)?;
            let c = expression(&model, &graph, backend)?;
            if let Some(path) = plan_out {
                let [(_, g)] = c.terms() else {
                    return Err(Failure::usage("--plan-out needs a single graph, not a compound expression"));
                };
                let plan = plan_greedy(g).map_err(|e| Failure::usage(e.to_string()))?;
                fs::write(&path, plan.to_string()).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
                let z = exterior_planned(g, &plan).map_err(|e| Failure::usage(e.to_string()))?;
                let z = z.scale(&c.terms()[0].0).map_err(|e| Failure::usage(e.to_string()))?;
                println!("{z}");
                return Ok(true);
            }
            let z = c.eval(engine).map_err(|e| Failure::usage(e.to_string()))?;
            println!("{z}");
            Ok(true)
        }
        Command::Equal { file, g1, g2, engine, backend } => {
            let model = load(&file)?;
            let a = expression(&model, &g1, backend)?.eval(engine).map_err(|e| Failure::usage(e.to_string()))?;
            let b = expression(&model, &g2, backend)?.eval(engine).map_err(|e| Failure::usage(e.to_string()))?;
            let tol = if backend == Backend::Float { REPORT_FLOAT_TOLERANCE } else { 0.0 };
            let equal = a.shape() == b.shape() && a.equal(&b, tol).map_err(|e| Failure::usage(e.to_string()))?;
            println!("{}", if equal { "equal" } else { "unequal" });
            Ok(equal)
        }
        Command::Pfaffian { file, matrix: name, engine } => {
            let model = load(&file)?;
            let a = matrix(&model, &name)?;
            let g = linalg::pfaffian_diagram(a)?;
            let z = exterior(&g, engine).map_err(|e| Failure::usage(e.to_string()))?;
            let z = z.scalar_value().map_err(|e| Failure::usage(e.to_string()))?;
            let n = a.axes()[0] / 2;
            let ratio = linalg::pfaffian_ratio(n, Backend::Exact);
            let via_diagram = z.try_div(&ratio).map_err(|e| Failure::usage(e.to_string()))?;
            println!("exterior {z}");
            println!("ratio {ratio}");
            println!("pfaffian_diagram {via_diagram}");
            if 2 * n > PFAFFIAN_ORACLE_MAX_DIM {
                println!("pfaffian_oracle skipped (dimension {} exceeds {PFAFFIAN_ORACLE_MAX_DIM})", 2 * n);
                return Ok(true);
            }
            let oracle = linalg::pfaffian_oracle(a)?;
            println!("pfaffian_oracle {oracle}");
            let ok = oracle == via_diagram;
            println!("{}", status(ok));
            Ok(ok)
        }
        Command::Det { file, matrix: name, engine } => {
            let model = load(&file)?;
            let a = matrix(&model, &name)?;
            let d = linalg::det_via_diagram(a, engine)?;
            let oracle = linalg::det_oracle(a)?;
            println!("det_diagram {d}");
            println!("det_oracle {oracle}");
            let ok = d == oracle;
            println!("{}", status(ok));
            Ok(ok)
        }
        Command::Trace { file, matrix: name } => {
            let model = load(&file)?;
            let a = matrix(&model, &name)?;
            let g = linalg::trace_diagram(a)?;
            let t = exterior(&g, Engine::Brute)
                .and_then(|z| Ok(z.scalar_value()?))
                .map_err(|e| Failure::usage(e.to_string()))?;
            let mut diagonal = Scalar::zero(a.backend());
            for i in 0..a.axes()[0] {
                diagonal = &diagonal + &a.get(&[i, i]).map_err(|e| Failure::usage(e.to_string()))?;
            }
            println!("trace_diagram {t}");
            println!("trace_oracle {diagonal}");
            let ok = t == diagonal;
            println!("{}", status(ok));
            Ok(ok)
        }
        Command::Verify { suite, seed, trials } => {
            let suite: Suite = suite.parse().map_err(|e: nfg_core::suites::SuiteError| Failure::usage(e.to_string()))?;
            let report = run_suite(suite, &SuiteOptions { seed, trials }).map_err(|e| Failure::usage(e.to_string()))?;
            print!("{report}");
            Ok(report.passed())
        }
        Command::Plan { file, graph } => {
            let model = load(&file)?;
            let info = model.graph(&graph).ok_or_else(|| Failure::usage(format!("no graph named `{graph}`")))?;
            let plan = plan_greedy(&info.nfg).map_err(|e| Failure::usage(e.to_string()))?;
            print!("{plan}");
            println!("# brute_force_cost {}", brute_force_cost(&info.nfg));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
