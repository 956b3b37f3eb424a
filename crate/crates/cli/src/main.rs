//! `lexgrowth`: vocabulary growth analysis of Google Books 1-gram data.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 data error,
//! 3 I/O error.

mod error;
mod inputs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use lexgrowth::fit::{fit_powerlaw_ls, fit_report};
use lexgrowth::growth::{
    content_share, function_word_share, growth_points, sliding_heaps, window_extract,
    DEFAULT_WINDOW_YEARS,
};
use lexgrowth::ingest::ingest_files;
use lexgrowth::model::{
    local_exponents, model_growth_curve, GeometricGrid, VocabModel, DEFAULT_POINTS_PER_DECADE,
};
use lexgrowth::oracle::mc_expected_vocab;
use lexgrowth::{FilterConfig, FrequencyTable, ModelConfig, PowerLawFit, ProbabilityVector};

use crate::error::CliError;
use crate::inputs::{parse_lrange, parse_ranks, parse_years, ProbSource};
use crate::output::{emit, json_string, num, Csv};

#[derive(Parser)]
#[command(
    name = "lexgrowth",
    version,
    about = "Vocabulary growth statistics for 1-gram corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build per-year frequency snapshots from raw 1-gram files (plain or gzip).
    Ingest(IngestArgs),
    /// Per-year tokens L and distinct words N as CSV "year,L,N".
    Growth(GrowthArgs),
    /// Function-word share and content share ζ per year as CSV.
    Fwshare(FwshareArgs),
    /// Heaps exponent fitted over sliding year windows as CSV.
    Window(WindowArgs),
    /// Fit a power law: least squares on (L, N) points or Zipf MLE on ranks.
    Fit(FitArgs),
    /// Expected vocabulary N(L) and local exponent k(L) on a grid as CSV "L,N,k".
    Model(ModelArgs),
    /// Monte Carlo estimate of the expected vocabulary, as JSON.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct FilterArgs {
    /// Accept only a-z instead of any Latin-script letter.
    #[arg(long)]
    ascii_strict: bool,
}

impl FilterArgs {
    fn config(&self) -> FilterConfig {
        let cfg = FilterConfig::default();
        if self.ascii_strict {
            cfg.ascii_strict()
        } else {
            cfg
        }
    }
}

#[derive(Args)]
struct IngestArgs {
    /// Raw 1-gram files.
    #[arg(long, num_args = 1.., required = true)]
    input: Vec<PathBuf>,
    /// Directory for `<year>.tsv` snapshots and `ingest_report.json`.
    #[arg(long)]
    output: PathBuf,
    /// Only write snapshots for years A..=B.
    #[arg(long, value_parser = parse_years)]
    years: Option<(i32, i32)>,
    /// Fail on the first malformed line instead of counting it.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    filter: FilterArgs,
}

#[derive(Args)]
struct SnapshotArgs {
    /// Snapshot files or directories of `*.tsv` snapshots.
    #[arg(long, num_args = 1.., required = true)]
    input: Vec<PathBuf>,
    /// Restrict to years A..=B.
    #[arg(long, value_parser = parse_years)]
    years: Option<(i32, i32)>,
    /// Output file (standard output when absent).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GrowthArgs {
    #[command(flatten)]
    snapshots: SnapshotArgs,
    /// Only the years within a window centred on this year.
    #[arg(long)]
    center: Option<i32>,
    /// Window width in years used with --center.
    #[arg(long, default_value_t = DEFAULT_WINDOW_YEARS)]
    window: u32,
}

#[derive(Args)]
struct FwshareArgs {
    #[command(flatten)]
    snapshots: SnapshotArgs,
    /// Function word list, one token per line.
    #[arg(long)]
    fwlist: PathBuf,
    #[command(flatten)]
    filter: FilterArgs,
}

#[derive(Args)]
struct WindowArgs {
    #[command(flatten)]
    snapshots: SnapshotArgs,
    /// Window width in years.
    #[arg(long, default_value_t = DEFAULT_WINDOW_YEARS)]
    window: u32,
    /// Years between successive window starts.
    #[arg(long, default_value_t = 1)]
    step: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Least squares in log-log coordinates on (L, N) points.
    Ls,
    /// Range-restricted multinomial maximum likelihood for the Zipf exponent.
    Mle,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, value_enum)]
    method: Method,
    /// ls: CSV with L,N columns. mle: snapshot or `rank<TAB>count` file.
    #[arg(long)]
    input: PathBuf,
    /// Rank range for mle.
    #[arg(long, value_parser = parse_ranks)]
    ranks: Option<(usize, usize)>,
    /// Restrict ls to points with L in this range.
    #[arg(long, value_parser = parse_lrange)]
    lrange: Option<(f64, f64)>,
    /// JSON fit report (standard output when absent).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write observed and fitted values as CSV "x,observed,fitted".
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Args)]
#[group(skip)]
#[command(group(ArgGroup::new("source").required(true).args(["probs", "input", "zipf_beta"])))]
struct ProbArgs {
    /// Probability vector TSV "probability<TAB>multiplicity".
    #[arg(long)]
    probs: Option<PathBuf>,
    /// Snapshot whose relative frequencies are the probabilities.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Finite Zipf distribution with this exponent (needs --zipf-w).
    #[arg(long, requires = "zipf_w")]
    zipf_beta: Option<f64>,
    /// Number of words of the Zipf distribution.
    #[arg(long, requires = "zipf_beta")]
    zipf_w: Option<u64>,
}

impl ProbArgs {
    fn source(&self) -> ProbSource<'_> {
        match (&self.probs, &self.input, self.zipf_beta, self.zipf_w) {
            (Some(path), _, _, _) => ProbSource::Tsv(path),
            (_, Some(path), _, _) => ProbSource::Snapshot(path),
            (_, _, Some(beta), Some(words)) => ProbSource::Zipf { beta, words },
            _ => unreachable!("clap enforces exactly one source"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Equation {
    /// N(L) = Σ 1 − (1 − p_i)^L
    #[value(name = "2")]
    Basic,
    /// N(L) = N_serv + Σ_{content} 1 − (1 − p_i)^{ζL}
    #[value(name = "3")]
    Split,
}

#[derive(Args)]
struct ModelArgs {
    #[command(flatten)]
    source: ProbArgs,
    #[arg(long, value_enum, default_value = "2")]
    eq: Equation,
    /// Grid range as 1eA:1eB.
    #[arg(long, value_parser = parse_lrange, default_value = "1e0:1e10")]
    lrange: (f64, f64),
    #[arg(long, default_value_t = DEFAULT_POINTS_PER_DECADE)]
    grid_per_decade: u32,
    /// Content share ζ (eq 3). With --input and --fwlist it defaults to the
    /// snapshot's measured share.
    #[arg(long)]
    zeta: Option<f64>,
    /// Number of function words always present (eq 3). With --input and
    /// --fwlist it defaults to the list words found in the snapshot.
    #[arg(long)]
    nserv: Option<u64>,
    /// Function word list; with --input, splits the snapshot into function and
    /// content words (eq 3).
    #[arg(long)]
    fwlist: Option<PathBuf>,
    #[command(flatten)]
    filter: FilterArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: ProbArgs,
    /// Tokens per simulated text.
    #[arg(long)]
    length: u64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("lexgrowth: {err}");
            ExitCode::from(err.code() as u8)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Ingest(args) => cmd_ingest(&args),
        Command::Growth(args) => cmd_growth(&args),
        Command::Fwshare(args) => cmd_fwshare(&args),
        Command::Window(args) => cmd_window(&args),
        Command::Fit(args) => cmd_fit(&args),
        Command::Model(args) => cmd_model(&args),
        Command::Simulate(args) => cmd_simulate(&args),
    }
}

fn cmd_ingest(args: &IngestArgs) -> Result<(), CliError> {
    let (tables, report) = ingest_files(&args.input, &args.filter.config(), args.strict)?;
    std::fs::create_dir_all(&args.output).map_err(|e| CliError::io(&args.output, e))?;
    for (year, table) in &tables {
        if args.years.is_some_and(|(lo, hi)| !(lo..=hi).contains(year)) {
            continue;
        }
        let path = args.output.join(format!("{year}.tsv"));
        std::fs::write(&path, table.write_snapshot()).map_err(|e| CliError::io(&path, e))?;
    }
    emit(
        Some(&args.output.join("ingest_report.json")),
        &json_string(&report)?,
    )?;
    if report.malformed > 0 {
        eprintln!("lexgrowth: skipped {} malformed line(s)", report.malformed);
    }
    Ok(())
}

fn load(args: &SnapshotArgs) -> Result<Vec<FrequencyTable>, CliError> {
    let tables = inputs::load_snapshots(&args.input, args.years)?;
    if tables.is_empty() {
        return Err(CliError::Data(
            "no snapshots in the requested year range".into(),
        ));
    }
    Ok(tables)
}

fn cmd_growth(args: &GrowthArgs) -> Result<(), CliError> {
    let tables = load(&args.snapshots)?;
    let mut curve = growth_points(&tables, None)?;
    if let Some(center) = args.center {
        curve = window_extract(&curve, center, args.window / 2)?;
    }
    let mut csv = Csv::new(&["year", "L", "N"]);
    for p in curve.points() {
        csv.row(&[p.year.to_string(), num(p.tokens), num(p.types)]);
    }
    emit(args.snapshots.output.as_deref(), &csv.into_string())
}

fn cmd_fwshare(args: &FwshareArgs) -> Result<(), CliError> {
    let tables = load(&args.snapshots)?;
    let fw = inputs::load_fwlist(&args.fwlist, &args.filter.config())?;
    let mut csv = Csv::new(&["year", "fw_share", "zeta"]);
    for table in &tables {
        let share = function_word_share(table, &fw)?;
        let zeta = content_share(table, &fw)?;
        csv.row(&[table.year().to_string(), num(share), num(zeta)]);
    }
    emit(args.snapshots.output.as_deref(), &csv.into_string())
}

fn cmd_window(args: &WindowArgs) -> Result<(), CliError> {
    if args.window == 0 || args.step == 0 {
        return Err(CliError::Usage(
            "--window and --step must be positive".into(),
        ));
    }
    let tables = load(&args.snapshots)?;
    let curve = growth_points(&tables, None)?;
    let series = sliding_heaps(&curve, args.window, args.step)?;
    if !series.skipped.is_empty() {
        eprintln!(
            "lexgrowth: skipped {} window(s) with fewer than 3 years of data",
            series.skipped.len()
        );
    }
    let mut csv = Csv::new(&["center_year", "k", "intercept", "n_points"]);
    for p in &series.points {
        csv.row(&[
            p.center_year.to_string(),
            num(p.k),
            num(p.fit.log_prefactor),
            p.fit.n_points.to_string(),
        ]);
    }
    emit(args.snapshots.output.as_deref(), &csv.into_string())
}

fn cmd_fit(args: &FitArgs) -> Result<(), CliError> {
    let (fit, observed): (PowerLawFit, Vec<(f64, f64)>) = match args.method {
        Method::Ls => {
            if args.ranks.is_some() {
                return Err(CliError::Usage("--ranks applies to --method mle".into()));
            }
            let points = inputs::load_points(&args.input)?;
            let range = args.lrange.map(|(a, b)| (10f64.powf(a), 10f64.powf(b)));
            let fit = fit_powerlaw_ls(&points, range)?;
            let kept = points
                .into_iter()
                .filter(|&(x, _)| range.is_none_or(|(a, b)| x >= a && x <= b))
                .collect();
            (fit, kept)
        }
        Method::Mle => {
            let (lo, hi) = args
                .ranks
                .ok_or_else(|| CliError::Usage("--method mle needs --ranks LO:HI".into()))?;
            if args.lrange.is_some() {
                return Err(CliError::Usage("--lrange applies to --method ls".into()));
            }
            let rf = inputs::load_ranks(&args.input)?;
            let fit = rf.fit_zipf(lo, hi)?;
            let total = rf.total_tokens() as f64;
            let observed = (lo..=hi.min(rf.max_rank()))
                .map(|r| (r as f64, rf.counts()[r - 1] as f64 / total))
                .collect();
            (fit, observed)
        }
    };
    if let Some(path) = &args.curve {
        let mut csv = Csv::new(&["x", "observed", "fitted"]);
        for &(x, y) in &observed {
            csv.row(&[num(x), num(y), num(fit.predict(x))]);
        }
        emit(Some(path), &csv.into_string())?;
    }
    emit(args.output.as_deref(), &json_string(&fit_report(&fit))?)
}

fn build_model(args: &ModelArgs) -> Result<VocabModel, CliError> {
    if args.eq == Equation::Basic {
        if args.zeta.is_some() || args.nserv.is_some() || args.fwlist.is_some() {
            return Err(CliError::Usage(
                "--zeta, --nserv and --fwlist need --eq 3".into(),
            ));
        }
        return Ok(VocabModel::Basic(inputs::load_probs(
            &args.source.source(),
        )?));
    }
    let (content, measured) = match (&args.fwlist, &args.source.input) {
        (Some(fwlist), Some(snapshot)) => {
            let table = inputs::load_snapshot(snapshot)?;
            let fw = inputs::load_fwlist(fwlist, &args.filter.config())?;
            let content = ProbabilityVector::content_from_table(&table, &fw)?;
            let n_serv = fw.iter().filter(|w| table.count(w) > 0).count() as u64;
            (content, Some((n_serv, content_share(&table, &fw)?)))
        }
        (Some(_), None) => {
            return Err(CliError::Usage(
                "--fwlist needs a snapshot via --input".into(),
            ))
        }
        (None, _) => (inputs::load_probs(&args.source.source())?, None),
    };
    let n_serv = args
        .nserv
        .or(measured.map(|m| m.0))
        .ok_or_else(|| CliError::Usage("--eq 3 needs --nserv (or --input with --fwlist)".into()))?;
    let zeta = args
        .zeta
        .or(measured.map(|m| m.1))
        .ok_or_else(|| CliError::Usage("--eq 3 needs --zeta (or --input with --fwlist)".into()))?;
    Ok(VocabModel::Split(ModelConfig::new(content, n_serv, zeta)?))
}

fn cmd_model(args: &ModelArgs) -> Result<(), CliError> {
    let model = build_model(args)?;
    let (lo, hi) = args.lrange;
    let grid = GeometricGrid::new(lo, hi, args.grid_per_decade)?.points();
    let curve = model_growth_curve(|l| model.evaluate(l), &grid)?;
    let ks: Vec<Option<f64>> = if curve.len() >= 3 && curve.iter().all(|&(l, n)| l > 0.0 && n > 0.0)
    {
        local_exponents(&curve)?
            .points
            .iter()
            .map(|p| Some(p.k))
            .collect()
    } else {
        vec![None; curve.len()]
    };
    let mut csv = Csv::new(&["L", "N", "k"]);
    for (&(l, n), k) in curve.iter().zip(ks) {
        csv.row(&[num(l), num(n), k.map(num).unwrap_or_default()]);
    }
    emit(args.output.as_deref(), &csv.into_string())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let probs = inputs::load_probs(&args.source.source())?;
    let estimate = mc_expected_vocab(&probs, args.length, args.trials, args.seed)?;
    emit(args.output.as_deref(), &json_string(&estimate)?)
}
