//! Command-line front end: parses arguments, runs the analyses from
//! `kersize_core` and writes a JSON or CSV report.
//!
//! Exit codes: 0 success, 1 internal or write failure, 2 invalid input,
//! 3 a guaranteed bound verdict failed under `--strict`.

pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kersize_core::average::{average_report, optimal_decoder_average, AveragePolicy, Candidates};
use kersize_core::decoder::{make_baseline, Baseline, SetValuedDecoder};
use kersize_core::eval::evaluate_decoder;
use kersize_core::fixtures::two_point;
use kersize_core::measure::{disintegrate, DiscreteMeasure, Order};
use kersize_core::metric::Point;
use kersize_core::problem::{MeasurementTable, Problem};
use kersize_core::rnsp::{check_rnsp_bound, rnsp_falsify, RnspCertificate, RnspNorms};
use kersize_core::spec::{
    canonical_json, parse_decoder_table, parse_model_family, parse_problem_spec, FamilyEntry,
    ForwardSpec, ProblemSpec,
};
use kersize_core::sweep::forward_model_sweep;
use kersize_core::worst_case::{optimal_decoder_worst, worst_case_report, CandidatePolicy};
use report::{DecodeResult, EvaluateResult, ProblemSummary, RnspResult, RunReport};

#[derive(Debug, Parser)]
#[command(name = "kersize", version, about = "Kernel sizes and optimal decoders for finite inverse problems")]
pub struct Cli {
    /// Problem spec (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub problem: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Exit with 3 when a guaranteed verdict fails.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Record wall-clock time. The output is then no longer reproducible.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kernel size, optimal decoder and bound verdicts.
    #[command(subcommand)]
    Analyze(Analyze),
    /// Applies the optimal decoder to one measurement.
    Decode(DecodeArgs),
    /// Scores a decoder against the kernel sizes.
    Evaluate(EvaluateArgs),
    /// Worst-case kernel size of each forward model in a family.
    Sweep(SweepArgs),
    /// Null-space property check and falsifier.
    Rnsp(RnspArgs),
    /// Built-in problems with known answers.
    #[command(subcommand)]
    Example(Example),
}

#[derive(Debug, Subcommand)]
pub enum Analyze {
    Worst {
        /// meb | feasible | grid:STEP
        #[arg(long, value_parser = parse_worst_policy)]
        policy: Option<CandidatePolicy>,
    },
    Average {
        #[arg(long)]
        p: Order,
        /// mean | median | support_chebyshev | feasible | grid:STEP
        #[arg(long, value_parser = parse_average_policy)]
        policy: Option<AveragePolicy>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Worst,
    #[value(alias = "average")]
    Avg,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Measurement coordinates, comma or space separated.
    #[arg(long, allow_hyphen_values = true)]
    pub y: String,
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Order for `--mode avg`.
    #[arg(long)]
    pub p: Option<Order>,
    /// Worst: meb | feasible | grid:STEP. Avg: mean | median |
    /// support_chebyshev | feasible | grid:STEP.
    #[arg(long)]
    pub policy: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Decoder table path, or baseline:first_feasible | full_feasible |
    /// random_feasible | constant:C1,C2,..
    #[arg(long)]
    pub decoder: String,
    /// Comma-separated orders, e.g. `1,2,inf`. May be empty.
    #[arg(long, default_value = "")]
    pub p: String,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON list of forward models.
    #[arg(long, value_name = "PATH")]
    pub models: PathBuf,
}

#[derive(Debug, Args)]
pub struct RnspArgs {
    #[arg(long)]
    pub d1: f64,
    #[arg(long)]
    pub d2: f64,
    /// Random probes for the falsifier.
    #[arg(long, default_value_t = 10_000)]
    pub probes: usize,
}

#[derive(Debug, Subcommand)]
pub enum Example {
    /// `F(x, e) = x₁` on `{(0,0), (0,1)}` with weights `α, 1 − α`.
    TwoPoint {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p: Order,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] kersize_core::Error),
    #[error("{}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write report: {0}")]
    Write(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(kersize_core::Error::NonConvergence(_)) | CliError::Write(_) => 1,
            _ => 2,
        }
    }
}

fn parse_step(s: &str) -> Result<f64, String> {
    let step: f64 = s.parse().map_err(|_| format!("bad grid step {s:?}"))?;
    if !(step.is_finite() && step > 0.0) {
        return Err(format!("grid step must be positive, got {s}"));
    }
    Ok(step)
}

pub fn parse_worst_policy(s: &str) -> Result<CandidatePolicy, String> {
    match s {
        "meb" => Ok(CandidatePolicy::EuclideanMeb),
        "feasible" => Ok(CandidatePolicy::FeasiblePoints),
        _ => match s.strip_prefix("grid:") {
            Some(step) => Ok(CandidatePolicy::FeasiblePlusGrid { step: parse_step(step)? }),
            None => Err(format!("unknown worst-case policy {s:?}")),
        },
    }
}

pub fn parse_average_policy(s: &str) -> Result<AveragePolicy, String> {
    match s {
        "mean" => Ok(AveragePolicy::Mean),
        "median" => Ok(AveragePolicy::Median),
        "support_chebyshev" => Ok(AveragePolicy::SupportChebyshev),
        "feasible" => Ok(AveragePolicy::CandidateArgmin(Candidates::Feasible)),
        _ => match s.strip_prefix("grid:") {
            Some(step) => Ok(AveragePolicy::CandidateArgmin(Candidates::FeasiblePlusGrid {
                step: parse_step(step)?,
            })),
            None => Err(format!("unknown average-case policy {s:?}")),
        },
    }
}

fn parse_coords(flag: &str, s: &str) -> Result<Point, CliError> {
    let coords = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| CliError::Usage(format!("{flag}: cannot parse {t:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Point::new(coords).map_err(|e| CliError::Usage(format!("{flag}: {e}")))
}

fn parse_orders(s: &str) -> Result<Vec<Order>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<Order>().map_err(|e| CliError::Usage(format!("--p: {e}"))))
        .collect()
}

fn parse_baseline(s: &str, seed: u64) -> Result<Baseline, CliError> {
    match s {
        "first_feasible" => Ok(Baseline::FirstFeasible),
        "full_feasible" => Ok(Baseline::FullFeasible),
        "random_feasible" => Ok(Baseline::RandomFeasible { seed }),
        _ => match s.strip_prefix("constant:") {
            Some(c) => Ok(Baseline::Constant(parse_coords("--decoder", c)?)),
            None => Err(CliError::Usage(format!("--decoder: unknown baseline {s:?}"))),
        },
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

/// The problem of a run and the canonical text that identifies it.
struct Loaded {
    problem: Problem,
    measure: DiscreteMeasure,
    table: MeasurementTable,
    canonical: String,
}

impl Loaded {
    fn from_path(path: Option<&Path>) -> Result<Self, CliError> {
        let path = path.ok_or_else(|| CliError::Usage("--problem is required".into()))?;
        let text = read(path)?;
        let loaded = parse_problem_spec(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let table = MeasurementTable::build(&loaded.problem)?;
        Ok(Loaded {
            canonical: loaded.spec.to_canonical_json(),
            problem: loaded.problem,
            measure: loaded.measure,
            table,
        })
    }

    fn from_parts(problem: Problem, measure: DiscreteMeasure) -> Result<Self, CliError> {
        let table = MeasurementTable::build(&problem)?;
        Ok(Loaded {
            canonical: ProblemSpec::from_problem(&problem, Some(&measure)).to_canonical_json(),
            problem,
            measure,
            table,
        })
    }

    fn report(&self, command: String, aux: Option<&str>) -> RunReport {
        let mut parts = vec![self.canonical.as_str(), command.as_str()];
        parts.extend(aux);
        let summary = ProblemSummary {
            model_points: self.problem.model_class().len(),
            noise_points: self.problem.noise_class().len(),
            groups: self.table.groups().len(),
            forward: self.problem.forward().kind(),
        };
        RunReport::new(command.clone(), report::config_hash(&parts), summary)
    }
}

fn decode(args: &DecodeArgs, l: &Loaded) -> Result<RunReport, CliError> {
    let y = parse_coords("--y", &args.y)?;
    if y.dim() != l.problem.y_dim() {
        return Err(CliError::Usage(format!(
            "--y: expected {} coordinates, found {}",
            l.problem.y_dim(),
            y.dim()
        )));
    }
    let key = l.problem.quantize(&y)?;
    if l.table.position(&key).is_none() {
        return Err(CliError::Usage(format!("--y: no measurement group with key {key}")));
    }
    let metric = l.problem.metric_x();
    let (decoder, command, policy): (SetValuedDecoder, String, String) = match args.mode {
        Mode::Worst => {
            if args.p.is_some() {
                return Err(CliError::Usage("--p only applies to --mode avg".into()));
            }
            let policy = match &args.policy {
                Some(s) => parse_worst_policy(s).map_err(CliError::Usage)?,
                None => CandidatePolicy::default_for(metric),
            };
            let d = optimal_decoder_worst(&l.problem, &l.table, &policy)?;
            let name = policy.name();
            (d, format!("--mode worst --policy {name}"), name)
        }
        Mode::Avg => {
            let order = args.p.ok_or_else(|| CliError::Usage("--mode avg needs --p".into()))?;
            let policy = match &args.policy {
                Some(s) => parse_average_policy(s).map_err(CliError::Usage)?,
                None => AveragePolicy::default_for(metric, order),
            };
            let dis = disintegrate(&l.measure, &l.table)?;
            let d = optimal_decoder_average(&l.problem, &l.table, &dis, order, &policy)?;
            let name = policy.name();
            (d, format!("--mode avg --p {order} --policy {name}"), name)
        }
    };
    let outputs = decoder.output(&key)?.to_vec();
    let selected = decoder.select(&key).expect("non-empty output").clone();
    let y_echo: Vec<String> = y.coords().iter().map(f64::to_string).collect();
    let mut r = l.report(format!("decode --y {} {command}", y_echo.join(",")), None);
    r.decode = Some(DecodeResult {
        y,
        key,
        mode: match args.mode {
            Mode::Worst => "worst".into(),
            Mode::Avg => "avg".into(),
        },
        policy,
        outputs,
        selected,
    });
    Ok(r)
}

/// Runs the parsed command and assembles its report.
pub fn execute(cli: &Cli) -> Result<RunReport, CliError> {
    let mut report = match &cli.command {
        Command::Analyze(Analyze::Worst { policy }) => {
            let l = Loaded::from_path(cli.problem.as_deref())?;
            let policy = policy
                .clone()
                .unwrap_or_else(|| CandidatePolicy::default_for(l.problem.metric_x()));
            let mut r = l.report(format!("analyze worst --policy {}", policy.name()), None);
            r.worst = Some(worst_case_report(&l.problem, &l.table, &policy)?);
            r
        }
        Command::Analyze(Analyze::Average { p, policy }) => {
            let l = Loaded::from_path(cli.problem.as_deref())?;
            let policy = policy
                .clone()
                .unwrap_or_else(|| AveragePolicy::default_for(l.problem.metric_x(), *p));
            let mut r = l.report(format!("analyze average --p {p} --policy {}", policy.name()), None);
            r.average = Some(average_report(&l.problem, &l.table, &l.measure, *p, &policy)?);
            r
        }
        Command::Decode(args) => {
            let l = Loaded::from_path(cli.problem.as_deref())?;
            decode(args, &l)?
        }
        Command::Evaluate(args) => {
            let l = Loaded::from_path(cli.problem.as_deref())?;
            let orders = parse_orders(&args.p)?;
            let (decoder, label, aux) = match args.decoder.strip_prefix("baseline:") {
                Some(kind) => {
                    let b = parse_baseline(kind, cli.seed)?;
                    (make_baseline(&b, &l.table)?, format!("baseline:{kind}"), None)
                }
                None => {
                    let path = Path::new(&args.decoder);
                    let d = parse_decoder_table(&read(path)?)
                        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                    let aux = canonical_json(&d.to_table());
                    (d, "file".to_string(), Some(aux))
                }
            };
            let p_echo: Vec<String> = orders.iter().map(Order::to_string).collect();
            let command = format!(
                "evaluate --decoder {label} --p {} --seed {}",
                p_echo.join(","),
                cli.seed
            );
            let mut r = l.report(command, aux.as_deref());
            let gap = evaluate_decoder(&l.problem, &l.table, &l.measure, &decoder, &orders)?;
            r.evaluate = Some(EvaluateResult { decoder: label, gap });
            r
        }
        Command::Sweep(args) => {
            let l = Loaded::from_path(cli.problem.as_deref())?;
            let family = parse_model_family(&read(&args.models)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", args.models.display())))?;
            let entries: Vec<FamilyEntry> = family
                .iter()
                .map(|(id, f)| FamilyEntry {
                    id: Some(id.clone()),
                    forward: ForwardSpec::from_forward(f),
                })
                .collect();
            let aux = canonical_json(&entries);
            let mut r = l.report("sweep --models file".into(), Some(&aux));
            r.sweep = Some(forward_model_sweep(&l.problem, &family)?);
            r
        }
        Command::Rnsp(args) => {
            let l = Loaded::from_path(cli.problem.as_deref())?;
            let cert = RnspCertificate::for_problem(&l.problem, args.d1, args.d2)?;
            let verdict = check_rnsp_bound(&l.problem, &l.table, &cert)?;
            let matrix = l.problem.forward().matrix().expect("checked linear additive");
            // the three norms follow the problem's metrics
            let norms = RnspNorms {
                lhs: l.problem.metric_x().clone(),
                dist: l.problem.metric_x().clone(),
                measurement: l.problem.metric_y().clone(),
            };
            let counterexample = rnsp_falsify(
                matrix,
                l.problem.model_class().points(),
                &cert,
                &norms,
                args.probes,
                cli.seed,
            )?;
            let command = format!(
                "rnsp --d1 {} --d2 {} --probes {} --seed {}",
                args.d1, args.d2, args.probes, cli.seed
            );
            let mut r = l.report(command, None);
            r.rnsp = Some(RnspResult {
                certificate: cert,
                verdict,
                probes: args.probes,
                counterexample,
            });
            r
        }
        Command::Example(Example::TwoPoint { alpha, p }) => {
            if cli.problem.is_some() {
                return Err(CliError::Usage("example commands take no --problem".into()));
            }
            let (problem, mu) = two_point(*alpha)?;
            let l = Loaded::from_parts(problem, mu)?;
            let mut r = l.report(format!("example two-point --alpha {alpha} --p {p}"), None);
            let worst_policy = CandidatePolicy::default_for(l.problem.metric_x());
            r.worst = Some(worst_case_report(&l.problem, &l.table, &worst_policy)?);
            let avg_policy = AveragePolicy::default_for(l.problem.metric_x(), *p);
            r.average = Some(average_report(&l.problem, &l.table, &l.measure, *p, &avg_policy)?);
            r
        }
    };
    report.settle();
    Ok(report)
}

pub fn render(report: &RunReport, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => Ok(report::to_json(report)),
        Format::Csv => report::to_csv(report).map_err(|e| CliError::Write(e.to_string())),
    }
}

fn execute_in_pool(cli: &Cli) -> Result<RunReport, CliError> {
    match cli.threads {
        None => execute(cli),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.into())
            .build()
            .map_err(|e| CliError::Write(format!("thread pool: {e}")))?
            .install(|| execute(cli)),
    }
}

/// Parses `args` (program name first), runs, and writes the report to
/// `--out` or `stdout`. Diagnostics go to `stderr`.
pub fn run_with_io<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    2
                }
            };
        }
    };
    let start = Instant::now();
    let result = execute_in_pool(&cli).and_then(|mut report| {
        if cli.timing {
            report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
        }
        let bytes = render(&report, cli.format)?;
        match &cli.out {
            Some(path) => std::fs::write(path, &bytes)
                .map_err(|e| CliError::Write(format!("{}: {e}", path.display())))?,
            None => stdout.write_all(&bytes).map_err(|e| CliError::Write(e.to_string()))?,
        }
        Ok(report.verdicts_hold)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => {
            let _ = writeln!(stderr, "warning: a guaranteed verdict failed");
            if cli.strict {
                3
            } else {
                0
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_io(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
