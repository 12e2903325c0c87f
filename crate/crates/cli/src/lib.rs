//! Command-line front end: read an instance, run one relabeling objective,
//! emit a JSON report.

pub mod error;
pub mod input;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use isorelabel::linear_strong::{strong_l0_ordinal, strong_l0inf_linear, strong_l0p_linear};
use isorelabel::oracle::{
    brute_best_regression, brute_min_trim_err, half_swap, random_ranks, Objective, OracleBudget,
};
use isorelabel::penalized::{penalized_linf, penalized_lp};
use isorelabel::relabel::{
    l0_regression, max_kept_set, strong_l0inf, weak_l00, weak_l01, weak_l02_approx, weak_l0inf,
};
use isorelabel::{EdgeSet, Instance, Norm, RegressionResult, ViolatorDag};

pub use error::{CliError, EXIT_INVALID, EXIT_MISMATCH, EXIT_OK};
use input::OrderArg;
use report::{BenchReport, BenchRow, DistanceReport, OracleReport, RelabelReport, Timings};

/// Environment variable capping oracle budgets, e.g.
/// `max_n=12,max_labels=5,max_distinct_values=6`.
pub const BUDGET_ENV: &str = "ISORELABEL_ORACLE_BUDGET";

#[derive(Debug, Parser)]
#[command(
    name = "isorelabel",
    version,
    about = "L0 isotonic regression (monotonic relabeling)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit one objective and write the report.
    Relabel(JobArgs),
    /// Report the L0 distance to the nearest isotonic function.
    Distance(InputArgs),
    /// Solve one objective by exhaustive search (small inputs only).
    Oracle(JobArgs),
    /// Violator-dag sizes and timings over generated chains.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Input rows (`-` for stdin).
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "linear")]
    order: OrderArg,
    /// Dag edge rows `u,v`.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Include per-phase wall-clock timings.
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Args)]
struct JobArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    objective: ObjectiveArg,
    /// Secondary norm: 1, 2 or inf.
    #[arg(long, value_parser = parse_norm)]
    p: Option<Norm>,
    /// Price of one changed label (penalized).
    #[arg(long)]
    alpha: Option<f64>,
    /// Accuracy of the approximate weak L0,2 fit.
    #[arg(long)]
    eps: Option<f64>,
    /// Kept violator set for the weak objectives, comma-separated vertex
    /// ids; defaults to a maximum one.
    #[arg(long, value_delimiter = ',')]
    kept: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "128,512,2048")]
    sizes: Vec<usize>,
    /// Label count of the random chains.
    #[arg(long, default_value_t = 10)]
    labels: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    L0,
    WeakL00,
    WeakL01,
    WeakL0inf,
    WeakL02,
    StrongL0inf,
    StrongL0p,
    StrongL0Ordinal,
    Penalized,
}

impl ObjectiveArg {
    fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }

    fn linear_only(self) -> bool {
        matches!(
            self,
            Self::WeakL02 | Self::StrongL0p | Self::StrongL0Ordinal | Self::Penalized
        )
    }
}

fn parse_norm(s: &str) -> Result<Norm, String> {
    match s {
        "1" => Ok(Norm::L1),
        "2" => Ok(Norm::L2),
        "inf" => Ok(Norm::LInf),
        _ => Err(format!("unsupported norm {s:?} (use 1, 2 or inf)")),
    }
}

fn order_name(order: OrderArg) -> &'static str {
    match order {
        OrderArg::Linear => "linear",
        OrderArg::Dag => "dag",
        OrderArg::Points => "points",
    }
}

/// Runs the tool on `argv` (program name first), printing to the standard
/// streams; returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(
        argv,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_INVALID;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match dispatch(cli.command) {
        Ok((doc, path)) => match emit(&doc, path.as_ref(), out) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(doc: &str, path: Option<&PathBuf>, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, doc).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => out
            .write_all(doc.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn to_doc<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn dispatch(command: Command) -> Result<(String, Option<PathBuf>), CliError> {
    match command {
        Command::Relabel(job) => {
            let out = job.input.output.clone();
            Ok((relabel(&job)?, out))
        }
        Command::Distance(args) => {
            let out = args.output.clone();
            Ok((distance(&args)?, out))
        }
        Command::Oracle(job) => {
            let out = job.input.output.clone();
            Ok((oracle(&job)?, out))
        }
        Command::Bench(args) => {
            let out = args.output.clone();
            Ok((bench(&args), out))
        }
    }
}

fn load(args: &InputArgs, timings: &mut Timings) -> Result<Instance, CliError> {
    let start = Instant::now();
    let text = input::read_source(&args.input)?;
    let edges = args.edges.as_deref().map(input::read_source).transpose()?;
    let inst = input::parse_instance(args.order, &text, edges.as_deref())?;
    timings.record("parse", start);
    Ok(inst)
}

fn check_job(job: &JobArgs) -> Result<(), CliError> {
    if job.objective.linear_only() && job.input.order != OrderArg::Linear {
        return Err(CliError::Mismatch(format!(
            "objective {} requires a linear order, got {}",
            job.objective.name(),
            order_name(job.input.order)
        )));
    }
    Ok(())
}

fn need<T: Copy>(value: Option<T>, flag: &str, objective: ObjectiveArg) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("objective {} needs --{flag}", objective.name())))
}

fn kept_or_maximum(inst: &Instance, job: &JobArgs) -> Vec<usize> {
    job.kept.clone().unwrap_or_else(|| max_kept_set(inst))
}

fn solve(inst: &Instance, job: &JobArgs) -> Result<RegressionResult, CliError> {
    let obj = job.objective;
    Ok(match obj {
        ObjectiveArg::L0 => l0_regression(inst)?,
        ObjectiveArg::WeakL00 => weak_l00(inst, job.kept.as_deref())?,
        ObjectiveArg::WeakL01 => weak_l01(inst, &kept_or_maximum(inst, job))?,
        ObjectiveArg::WeakL0inf => weak_l0inf(inst, &kept_or_maximum(inst, job))?,
        ObjectiveArg::WeakL02 => {
            let eps = need(job.eps, "eps", obj)?;
            weak_l02_approx(inst, &kept_or_maximum(inst, job), eps)?
        }
        ObjectiveArg::StrongL0inf => strong_l0inf(inst)?,
        ObjectiveArg::StrongL0p => match need(job.p, "p", obj)? {
            Norm::LInf => strong_l0inf_linear(inst)?,
            p => strong_l0p_linear(inst, p)?,
        },
        ObjectiveArg::StrongL0Ordinal => strong_l0_ordinal(inst)?,
        ObjectiveArg::Penalized => {
            let alpha = need(job.alpha, "alpha", obj)?;
            match need(job.p, "p", obj)? {
                Norm::LInf => penalized_linf(inst, alpha)?,
                p => penalized_lp(inst, alpha, p)?,
            }
        }
    })
}

fn relabel(job: &JobArgs) -> Result<String, CliError> {
    check_job(job)?;
    let mut timings = Timings::new(job.input.timings);
    let inst = load(&job.input, &mut timings)?;
    let start = Instant::now();
    let res = solve(&inst, job)?;
    timings.record("solve", start);
    let report = RelabelReport::new(
        &inst,
        order_name(job.input.order),
        job.objective.name(),
        &res,
        timings,
    );
    Ok(to_doc(&report))
}

fn distance(args: &InputArgs) -> Result<String, CliError> {
    let mut timings = Timings::new(args.timings);
    let inst = load(args, &mut timings)?;
    let start = Instant::now();
    let res = l0_regression(&inst)?;
    timings.record("flow", start);
    Ok(to_doc(&DistanceReport {
        command: "distance",
        order: order_name(args.order),
        n: inst.len(),
        delta0: res.l0_distance,
        timings_ms: timings.finish(),
    }))
}

/// Default budget, overridden field by field from [`BUDGET_ENV`].
pub fn budget_from_env() -> Result<OracleBudget, CliError> {
    let mut budget = OracleBudget::default();
    let Ok(spec) = std::env::var(BUDGET_ENV) else {
        return Ok(budget);
    };
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || CliError::Usage(format!("{BUDGET_ENV}: bad entry {item:?}"));
        let (key, value) = item.split_once('=').ok_or_else(bad)?;
        let value: usize = value.trim().parse().map_err(|_| bad())?;
        match key.trim() {
            "max_n" => budget.max_n = value,
            "max_labels" => budget.max_labels = value,
            "max_distinct_values" => budget.max_distinct_values = value,
            _ => return Err(bad()),
        }
    }
    Ok(budget)
}

fn oracle(job: &JobArgs) -> Result<String, CliError> {
    check_job(job)?;
    let budget = budget_from_env()?;
    let mut timings = Timings::new(job.input.timings);
    let inst = load(&job.input, &mut timings)?;
    let obj = job.objective;
    let start = Instant::now();
    let kept = || job.kept.clone().unwrap_or_else(|| max_kept_set(&inst));
    let objective = match obj {
        ObjectiveArg::L0 => Objective::L0,
        ObjectiveArg::WeakL01 => Objective::WeakL0p {
            norm: Norm::L1,
            kept: kept(),
        },
        ObjectiveArg::WeakL0inf => Objective::WeakL0p {
            norm: Norm::LInf,
            kept: kept(),
        },
        ObjectiveArg::StrongL0p => Objective::StrongL0p(need(job.p, "p", obj)?),
        ObjectiveArg::StrongL0Ordinal => Objective::StrongL0,
        ObjectiveArg::Penalized => Objective::Penalized {
            norm: need(job.p, "p", obj)?,
            alpha: need(job.alpha, "alpha", obj)?,
        },
        ObjectiveArg::StrongL0inf => {
            let threshold = brute_min_trim_err(&inst, &budget)?;
            timings.record("search", start);
            return Ok(to_doc(&OracleReport::threshold(
                &inst,
                obj.name(),
                threshold,
                timings,
            )));
        }
        ObjectiveArg::WeakL00 | ObjectiveArg::WeakL02 => {
            return Err(CliError::Usage(format!(
                "no exhaustive oracle for objective {}",
                obj.name()
            )));
        }
    };
    let outcome = brute_best_regression(&inst, &objective, &budget)?;
    timings.record("search", start);
    Ok(to_doc(&OracleReport::new(
        &inst,
        obj.name(),
        outcome,
        timings,
    )))
}

fn bench(args: &BenchArgs) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut rows = Vec::new();
    for &n in &args.sizes {
        let random = random_ranks(&mut rng, n, args.labels);
        for (family, inst) in [("random", random), ("half-swap", half_swap(n))] {
            rows.push(bench_row(family, &inst, args.timings));
        }
    }
    to_doc(&BenchReport {
        command: "bench",
        seed: args.seed,
        labels: args.labels,
        rows,
    })
}

fn bench_row(family: &'static str, inst: &Instance, timed: bool) -> BenchRow {
    let closure = ViolatorDag::build(inst, EdgeSet::Closure);
    let reduction = ViolatorDag::build(inst, EdgeSet::Reduction);
    let start = Instant::now();
    let flow = l0_regression(inst).expect("numeric chain");
    let flow_ms = start.elapsed().as_secs_f64() * 1e3;
    let start = Instant::now();
    let dp = strong_l0_ordinal(inst).expect("linear chain");
    let dp_ms = start.elapsed().as_secs_f64() * 1e3;
    assert_eq!(
        flow.l0_distance, dp.l0_distance,
        "both routines find a maximum kept set"
    );
    BenchRow {
        family,
        n: inst.len(),
        n_hat: closure.vertices().len(),
        m_hat_closure: closure.edges().len(),
        m_hat_reduction: reduction.edges().len(),
        delta0: flow.l0_distance,
        flow_ms: timed.then_some(flow_ms),
        dp_ms: timed.then_some(dp_ms),
    }
}
