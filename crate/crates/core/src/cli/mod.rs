//! The `polyseries` command line: problem generation, verification,
//! benchmark sweeps and job-graph statistics.

pub mod generate;
pub mod problem;
pub mod report;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::executor::{run_parallel, run_sequential, stage, RunReport};
use crate::jobgraph::{build_jobgraph, JobGraph, MonomialShape};
use crate::multidouble::Precision;
use crate::oracle::{direct_cost, eval_direct, max_discrepancy, DIRECT_GUARD};
use crate::pseries::{Mode, Series};

pub use generate::{gen, random_instance, random_integer_instance, BenchmarkId, RandomSpec};
pub use problem::ProblemFile;
pub use report::{launch_listing, markdown_table, write_csv, BenchRecord};

/// Default degree sweep of `bench`.
pub const DEFAULT_DEGREES: [usize; 10] = [0, 8, 15, 31, 63, 95, 127, 152, 159, 191];

/// Largest degree of the default sweep at ten limbs.
pub const DECA_DEFAULT_CAP: usize = 152;

/// Convolution count printed for p3 in the published job table.
pub const P3_PUBLISHED_CONV_JOBS: usize = 24_256;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "polyseries", version, about = "Evaluate and differentiate sparse polynomials at power series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a problem file for p1, p2, p3 or a random instance.
    Gen(GenArgs),
    /// Cross-check the executors (and the reference evaluator) on a problem file.
    Verify(VerifyArgs),
    /// Time a degree and precision sweep.
    Bench(BenchArgs),
    /// Print job and layer counts.
    GraphStats(StatsArgs),
}

#[derive(clap::Args, Debug)]
pub struct GenArgs {
    /// p1, p2, p3 or random.
    pub target: String,
    #[arg(long, default_value_t = 8)]
    pub degree: usize,
    #[arg(long, default_value = "2", value_parser = parse_precision)]
    pub precision: Precision,
    #[arg(long, default_value = "real", value_parser = parse_mode)]
    pub mode: Mode,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output path; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Random instances: maximum number of variables.
    #[arg(long, default_value_t = 6)]
    pub vars: usize,
    /// Random instances: maximum number of monomials.
    #[arg(long, default_value_t = 10)]
    pub monomials: usize,
    /// Random instances: maximum exponent.
    #[arg(long, default_value_t = 1)]
    pub max_exponent: u32,
    /// Random instances: integer coefficients in [-50, 50] at one limb
    /// (the degree becomes a maximum).
    #[arg(long)]
    pub integer: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleMode {
    Auto,
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Schedule {
    Sequential,
    Parallel,
}

#[derive(clap::Args, Debug)]
pub struct VerifyArgs {
    pub file: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub workers: usize,
    #[arg(long, value_enum, default_value_t = OracleMode::Auto)]
    pub oracle: OracleMode,
}

#[derive(clap::Args, Debug)]
pub struct BenchArgs {
    /// p1, p2, p3 or a problem file.
    pub target: String,
    /// Comma-separated degrees; the default sweep caps ten limbs at 152.
    #[arg(long, value_delimiter = ',')]
    pub degree: Vec<usize>,
    /// Comma-separated limb counts.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,8,10", value_parser = parse_precision)]
    pub precision: Vec<Precision>,
    #[arg(long, default_value = "real", value_parser = parse_mode)]
    pub mode: Mode,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Schedule::Parallel)]
    pub schedule: Schedule,
}

#[derive(clap::Args, Debug)]
pub struct StatsArgs {
    /// p1, p2, p3 or a problem file.
    pub target: String,
}

fn parse_precision(s: &str) -> std::result::Result<Precision, String> {
    let m: usize = s.trim().parse().map_err(|_| format!("not a limb count: {s:?}"))?;
    Precision::from_limbs(m).map_err(|e| e.to_string())
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses the arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let mut stdout = std::io::stdout().lock();
    match run(cli, &mut stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

/// Runs one command, writing its report to `out`.
pub fn run(cli: Cli, out: &mut dyn std::io::Write) -> Result<i32> {
    match cli.command {
        Command::Gen(args) => {
            let problem = gen_command(&args)?;
            match &args.output {
                Some(path) => problem.write(path)?,
                None => out.write_all(problem.to_text().as_bytes())?,
            }
            Ok(EXIT_OK)
        }
        Command::Verify(args) => {
            let problem = ProblemFile::read(&args.file)?;
            let report = verify(&problem, args.workers, args.oracle)?;
            out.write_all(report.to_string().as_bytes())?;
            Ok(if report.passed() { EXIT_OK } else { EXIT_MISMATCH })
        }
        Command::Bench(args) => {
            let records = bench_command(&args, out)?;
            if let Some(path) = &args.csv {
                let file = std::fs::File::create(path)?;
                write_csv(&records, file).map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
            }
            writeln!(out)?;
            out.write_all(markdown_table(&records).as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::GraphStats(args) => {
            let (name, n, shapes) = resolve_structure(&args.target)?;
            out.write_all(graph_stats(&name, n, &shapes)?.as_bytes())?;
            Ok(EXIT_OK)
        }
    }
}

fn gen_command(args: &GenArgs) -> Result<ProblemFile> {
    if args.target == "random" {
        let spec = RandomSpec {
            max_vars: args.vars.max(1),
            max_monomials: args.monomials.max(1),
            max_degree: args.degree,
            max_exponent: args.max_exponent.max(1),
        };
        return if args.integer {
            random_integer_instance(spec, 50, args.mode, args.seed)
        } else {
            random_instance(spec, args.precision, args.mode, args.seed)
        };
    }
    let id: BenchmarkId = args.target.parse()?;
    gen(id, args.degree, args.precision, args.mode, args.seed)
}

fn resolve_structure(target: &str) -> Result<(String, usize, Vec<MonomialShape>)> {
    match target.parse::<BenchmarkId>() {
        Ok(id) => Ok((id.to_string(), id.num_vars(), id.shapes())),
        Err(_) if Path::new(target).exists() => {
            let p = ProblemFile::read(Path::new(target))?;
            Ok((target.to_string(), p.header.vars, p.polynomial.shapes()))
        }
        Err(e) => Err(e),
    }
}

/// Job and layer counts of a structure; p3 also notes its published
/// convolution count.
pub fn graph_stats(name: &str, n_vars: usize, shapes: &[MonomialShape]) -> Result<String> {
    let graph = JobGraph::from_shapes(n_vars, shapes)?;
    let mut s = String::new();
    writeln!(
        s,
        "{name}: {n_vars} variables, {} monomials, {} slots",
        shapes.len(),
        graph.total_slots()
    )
    .unwrap();
    s.push_str(&launch_listing(&graph));
    if !graph.copies.is_empty() {
        writeln!(s, "copy jobs: {}", graph.copies.len()).unwrap();
    }
    if name == "p3" && graph.conv_job_count() != P3_PUBLISHED_CONV_JOBS {
        writeln!(
            s,
            "note: the published job table lists {P3_PUBLISHED_CONV_JOBS} convolution jobs for p3; \
             three per two-variable monomial gives {}",
            graph.conv_job_count()
        )
        .unwrap();
    }
    Ok(s)
}

/// Outcome of the reference-evaluator comparison.
#[derive(Clone, Debug, PartialEq)]
pub enum OracleCheck {
    Skipped(String),
    Compared { discrepancy: f64, tolerance: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub executors_agree: bool,
    /// Largest relative difference between the two executors.
    pub executor_discrepancy: f64,
    pub oracle: OracleCheck,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.executors_agree
            && match self.oracle {
                OracleCheck::Skipped(_) => true,
                OracleCheck::Compared {
                    discrepancy,
                    tolerance,
                } => discrepancy <= tolerance,
            }
    }
}

impl std::fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
        writeln!(
            f,
            "{} sequential vs parallel: {} (max discrepancy {:e})",
            verdict(self.executors_agree),
            if self.executors_agree { "bitwise equal" } else { "differ" },
            self.executor_discrepancy
        )?;
        match &self.oracle {
            OracleCheck::Skipped(why) => writeln!(f, "SKIP reference evaluator: {why}")?,
            OracleCheck::Compared {
                discrepancy,
                tolerance,
            } => writeln!(
                f,
                "{} reference evaluator: max discrepancy {discrepancy:e} (tolerance {tolerance:e})",
                verdict(discrepancy <= tolerance)
            )?,
        }
        writeln!(f, "{}", verdict(self.passed()))
    }
}

/// Allowed relative discrepancy against the reference evaluator, which
/// sums in a different order.
pub fn oracle_tolerance(problem: &ProblemFile) -> f64 {
    let m = problem.header.precision.limbs() as i32;
    let terms = (problem.header.monomials + 1) * (problem.header.degree + 1);
    2f64.powi(10 - 52 * m) * terms as f64
}

fn outputs(report: &RunReport) -> impl Iterator<Item = &Series> {
    std::iter::once(&report.value).chain(&report.gradient)
}

/// Runs both executors and, when asked or within its guard, the reference
/// evaluator.
pub fn verify(problem: &ProblemFile, workers: usize, oracle: OracleMode) -> Result<VerifyReport> {
    let poly = &problem.polynomial;
    let graph = build_jobgraph(poly)?;
    let staged = stage(poly, &problem.inputs)?;
    let mut seq_data = staged.clone();
    let mut par_data = staged;
    let seq = run_sequential(&graph, &mut seq_data)?;
    let par = run_parallel(&graph, &mut par_data, workers.max(1))?;
    let mut executors_agree = true;
    let mut executor_discrepancy: f64 = 0.0;
    for (a, b) in outputs(&seq).zip(outputs(&par)) {
        executors_agree &= a.same_values(b);
        executor_discrepancy = executor_discrepancy.max(max_discrepancy(b, a)?);
    }
    let cost = direct_cost(poly);
    let run_oracle = match oracle {
        OracleMode::Off => false,
        OracleMode::On => true,
        OracleMode::Auto => cost <= DIRECT_GUARD,
    };
    let oracle = if run_oracle {
        let (value, gradient) = eval_direct(poly, &problem.inputs)?;
        let mut discrepancy: f64 = 0.0;
        for (a, b) in outputs(&seq).zip(std::iter::once(&value).chain(&gradient)) {
            discrepancy = discrepancy.max(max_discrepancy(a, b)?);
        }
        OracleCheck::Compared {
            discrepancy,
            tolerance: oracle_tolerance(problem),
        }
    } else if oracle == OracleMode::Off {
        OracleCheck::Skipped("disabled".into())
    } else {
        OracleCheck::Skipped(format!("instance cost {cost} exceeds the guard {DIRECT_GUARD}"))
    };
    Ok(VerifyReport {
        executors_agree,
        executor_discrepancy,
        oracle,
    })
}

/// What to benchmark: a generated structure or a fixed problem file.
#[derive(Clone, Debug)]
pub enum BenchTarget {
    Generated(BenchmarkId),
    File(Box<ProblemFile>),
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub target: BenchTarget,
    pub name: String,
    /// Empty for the default sweep.
    pub degrees: Vec<usize>,
    pub precisions: Vec<Precision>,
    pub mode: Mode,
    pub seed: u64,
    pub workers: usize,
    pub repeats: usize,
    pub schedule: Schedule,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Cells of the sweep as `(degree, precision)` pairs.
pub fn sweep_cells(degrees: &[usize], precisions: &[Precision]) -> Vec<(usize, Precision)> {
    let default = degrees.is_empty();
    let degrees = if default { &DEFAULT_DEGREES[..] } else { degrees };
    let mut cells = Vec::new();
    for &p in precisions {
        for &d in degrees {
            if default && p == Precision::Deca && d > DECA_DEFAULT_CAP {
                continue;
            }
            cells.push((d, p));
        }
    }
    cells
}

fn bench_cell(config: &BenchConfig, graph: &JobGraph, problem: &ProblemFile) -> Result<BenchRecord> {
    let staged = stage(&problem.polynomial, &problem.inputs)?;
    let mut conv = Vec::new();
    let mut add = Vec::new();
    let mut wall = Vec::new();
    let mut ops = 0;
    for _ in 0..config.repeats.max(1) {
        let mut data = staged.clone();
        let r = match config.schedule {
            Schedule::Sequential => run_sequential(graph, &mut data)?,
            Schedule::Parallel => run_parallel(graph, &mut data, config.workers.max(1))?,
        };
        conv.push(ms(r.conv_time()));
        add.push(ms(r.add_time()));
        wall.push(ms(r.wall_time));
        ops = r.double_op_count;
    }
    let (conv_ms, add_ms, wall_ms) = (median(conv), median(add), median(wall));
    Ok(BenchRecord {
        polynomial: config.name.clone(),
        degree: problem.header.degree,
        limbs: problem.header.precision.limbs(),
        mode: problem.header.mode.to_string(),
        workers: match config.schedule {
            Schedule::Sequential => 1,
            Schedule::Parallel => config.workers.max(1),
        },
        conv_jobs: graph.conv_job_count(),
        add_jobs: graph.add_job_count(),
        conv_ms,
        add_ms,
        sum_ms: conv_ms + add_ms,
        wall_ms,
        double_op_count: ops,
        gflops: if wall_ms > 0.0 { ops as f64 / (wall_ms * 1e6) } else { 0.0 },
    })
}

/// Runs the sweep, calling `progress` after every cell.
pub fn bench(config: &BenchConfig, mut progress: impl FnMut(&BenchRecord)) -> Result<Vec<BenchRecord>> {
    if config.workers == 0 || config.repeats == 0 {
        return Err(Error::InvalidInput("workers and repeats must be at least 1".into()));
    }
    let mut records = Vec::new();
    match &config.target {
        BenchTarget::File(problem) => {
            let graph = build_jobgraph(&problem.polynomial)?;
            let r = bench_cell(config, &graph, problem)?;
            progress(&r);
            records.push(r);
        }
        BenchTarget::Generated(id) => {
            let graph = JobGraph::from_shapes(id.num_vars(), &id.shapes())?;
            for (d, p) in sweep_cells(&config.degrees, &config.precisions) {
                let problem = gen(*id, d, p, config.mode, config.seed)?;
                let r = bench_cell(config, &graph, &problem)?;
                progress(&r);
                records.push(r);
            }
        }
    }
    Ok(records)
}

fn bench_command(args: &BenchArgs, out: &mut dyn std::io::Write) -> Result<Vec<BenchRecord>> {
    let target = match args.target.parse::<BenchmarkId>() {
        Ok(id) => BenchTarget::Generated(id),
        Err(_) if Path::new(&args.target).exists() => {
            BenchTarget::File(Box::new(ProblemFile::read(Path::new(&args.target))?))
        }
        Err(e) => return Err(e),
    };
    let config = BenchConfig {
        target,
        name: args.target.clone(),
        degrees: args.degree.clone(),
        precisions: args.precision.clone(),
        mode: args.mode,
        seed: args.seed,
        workers: args.workers,
        repeats: args.repeats,
        schedule: args.schedule,
    };
    let graph = match &config.target {
        BenchTarget::Generated(id) => JobGraph::from_shapes(id.num_vars(), &id.shapes())?,
        BenchTarget::File(p) => build_jobgraph(&p.polynomial)?,
    };
    out.write_all(launch_listing(&graph).as_bytes())?;
    let mut failed = None;
    let records = bench(&config, |r| {
        if let Err(e) = writeln!(
            out,
            "d={:<4} m={:<3} cnv {:>10.2} ms  add {:>10.2} ms  wall {:>10.2} ms  ops {}",
            r.degree, r.limbs, r.conv_ms, r.add_ms, r.wall_ms, r.double_op_count
        ) {
            failed.get_or_insert(e);
        }
    })?;
    if let Some(e) = failed {
        return Err(e.into());
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sweep_caps_deca() {
        let cells = sweep_cells(&[], &[Precision::Double, Precision::Deca]);
        assert_eq!(cells.len(), 10 + 8);
        assert!(cells.iter().all(|&(d, p)| p != Precision::Deca || d <= 152));
        let explicit = sweep_cells(&[191], &[Precision::Deca]);
        assert_eq!(explicit, vec![(191, Precision::Deca)]);
    }

    #[test]
    fn p3_stats_flag_the_published_count() {
        let id = BenchmarkId::P3;
        let text = graph_stats("p3", id.num_vars(), &id.shapes()).unwrap();
        assert!(text.contains("convolution jobs: 24384"), "{text}");
        assert!(text.contains("24256"), "{text}");
    }

    #[test]
    fn precision_flag_rejects_seven() {
        assert!(parse_precision("7").is_err());
        assert_eq!(parse_precision("10"), Ok(Precision::Deca));
    }
}
