//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a check fails or a computation errors,
//! 2 on invalid configuration.

use crate::channels::{evolve_pipeline, GhzScenario};
use crate::localizable::localizable_concurrence;
use crate::measures::{gmc, x_state_view};
use crate::protocols::oracle_samples;
use crate::sweeps::{
    evaluate, run_sweep, strategy_table, threshold_table, Measure, PprimeGrid, StrategyRecord, SweepRecord, SweepSpec,
    ThresholdRecord,
};
use crate::twirl::{BoundaryData, TwirlError};
use crate::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Column order of scenario CSV output.
pub const CSV_HEADER: [&str; 14] = [
    "n", "m", "alpha2", "p", "pprime", "gmc", "fidelity", "branch", "chsh", "cl", "x", "y", "ztilde", "region",
];
/// Column order of `thresholds` CSV output.
pub const THRESHOLD_HEADER: [&str; 3] = ["n", "p", "boundary_alpha2"];
/// Column order of `strategy` CSV output, one row per segment.
pub const STRATEGY_HEADER: [&str; 7] = ["n", "alpha2", "p", "criterion", "m", "start", "end"];
/// Largest circuit-versus-formula deviation accepted by `circuit-check`.
pub const CIRCUIT_CHECK_TOL: f64 = 1e-8;
/// `alpha^2` grid step used by `thresholds`.
pub const THRESHOLD_GRID_STEP: f64 = 0.005;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    CheckFailed(String),
    #[error(transparent)]
    Compute(Error),
    #[error("writing output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Channel(_) | Error::Sweep(_) | Error::Twirl(TwirlError::MissingBoundaryData | TwirlError::Io(_)) => {
                CliError::Config(e.to_string())
            }
            Error::Twirl(TwirlError::MalformedBoundaryData { .. }) => CliError::Config(e.to_string()),
            other => CliError::Compute(other),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ghzadc",
    version,
    about = "GHZ-type states under two-stage amplitude damping with local NOT gates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every measure on one scenario and print a report.
    Eval(EvalArgs),
    /// Evaluate the requested measures on a scenario grid.
    Sweep(SweepArgs),
    /// Locate the alpha^2 boundary between sudden death and asymptotic decay.
    Thresholds(ThresholdArgs),
    /// Best flip count along p' under the GMC and fidelity criteria.
    Strategy(StrategyArgs),
    /// Twirl coordinates and region labels along p' trajectories.
    Classify(ClassifyArgs),
    /// Compare circuit-simulated and analytic fidelities on random scenarios.
    CircuitCheck(CircuitCheckArgs),
    /// Localizable concurrence of the end pair for one scenario.
    Localizable(ScenarioArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn qubit_count(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|_| format!("{s:?} is not an integer"))?;
    if (2..=4).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} qubits are not supported, expected 2, 3 or 4"))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    #[arg(long, value_parser = qubit_count)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long, value_parser = unit_interval)]
    pub alpha2: f64,
    #[arg(long, value_parser = unit_interval)]
    pub p: f64,
    #[arg(long, value_parser = unit_interval)]
    pub pprime: f64,
}

impl ScenarioArgs {
    fn scenario(&self) -> Result<GhzScenario, CliError> {
        if self.m > self.n {
            return Err(CliError::Config(format!("--m {} exceeds --n {}", self.m, self.n)));
        }
        Ok(GhzScenario::from_alpha2(self.n, self.m, self.alpha2, self.p, self.pprime).map_err(Error::from)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file, written atomically. Standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Region boundary file for three-qubit classification.
    #[arg(long)]
    pub boundaries: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_parser = qubit_count)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    pub m: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = unit_interval, required = true)]
    pub alpha2: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = unit_interval, default_value = "0")]
    pub p: Vec<f64>,
    /// p' grid as start:stop:step.
    #[arg(long, default_value = "0:1:0.01")]
    pub pprime_grid: String,
    #[arg(long, value_delimiter = ',', default_value = "gmc,fidelity")]
    pub measures: Vec<String>,
    #[arg(long)]
    pub boundaries: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    #[arg(long, value_parser = qubit_count)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', value_parser = unit_interval, default_value = "0")]
    pub p: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StrategyArgs {
    #[arg(long, value_parser = qubit_count)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', value_parser = unit_interval, required = true)]
    pub alpha2: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = unit_interval, default_value = "0")]
    pub p: Vec<f64>,
    #[arg(long, default_value = "0:0.99:0.005")]
    pub pprime_grid: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[arg(long, value_parser = qubit_count)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub m: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = unit_interval, required = true)]
    pub alpha2: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = unit_interval, default_value = "0")]
    pub p: Vec<f64>,
    #[arg(long, default_value = "0:1:0.01")]
    pub pprime_grid: String,
    /// Region boundary file, required for three qubits.
    #[arg(long)]
    pub boundaries: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Args)]
pub struct CircuitCheckArgs {
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

/// Parses `std::env::args` and runs the selected command.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match run(cli, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Runs a parsed command, writing reports and unredirected output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Eval(args) => cmd_eval(&args, out),
        Command::Sweep(args) => cmd_sweep(&args, out),
        Command::Thresholds(args) => cmd_thresholds(&args, out),
        Command::Strategy(args) => cmd_strategy(&args, out),
        Command::Classify(args) => cmd_classify(&args, out),
        Command::CircuitCheck(args) => cmd_circuit_check(&args, out),
        Command::Localizable(args) => cmd_localizable(&args, out),
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Output(e.to_string())
}

fn load_boundaries(path: Option<&Path>) -> Result<Option<BoundaryData>, CliError> {
    path.map(|p| BoundaryData::from_path(p).map_err(|e| CliError::from(Error::from(e))))
        .transpose()
}

fn parse_grid(flag: &str, text: &str) -> Result<PprimeGrid, CliError> {
    text.parse().map_err(|e| CliError::Config(format!("--{flag}: {e}")))
}

fn parse_measures(names: &[String]) -> Result<Vec<Measure>, CliError> {
    names
        .iter()
        .map(|s| s.parse().map_err(|e| CliError::Config(format!("--measures: {e}"))))
        .collect()
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Text form of a number at 12 significant digits.
pub fn fmt12(x: f64) -> String {
    format!("{}", round12(x))
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt12).unwrap_or_default()
}

/// CSV row of a record in [`CSV_HEADER`] order.
pub fn csv_row(r: &SweepRecord) -> Vec<String> {
    vec![
        r.n.to_string(),
        r.m.to_string(),
        fmt12(r.alpha2),
        fmt12(r.p),
        fmt12(r.pprime),
        opt(r.gmc),
        opt(r.fidelity),
        r.branch.map(|b| b.to_string()).unwrap_or_default(),
        opt(r.chsh),
        opt(r.cl),
        opt(r.x),
        opt(r.y),
        opt(r.ztilde),
        r.region.clone().unwrap_or_default(),
    ]
}

/// Inverse of [`csv_row`].
pub fn parse_csv_row(row: &csv::StringRecord) -> Result<SweepRecord, String> {
    if row.len() != CSV_HEADER.len() {
        return Err(format!("expected {} fields, got {}", CSV_HEADER.len(), row.len()));
    }
    let num = |k: usize| -> Result<Option<f64>, String> {
        let s = &row[k];
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse()
                .map(Some)
                .map_err(|_| format!("{}: {s:?} is not a number", CSV_HEADER[k]))
        }
    };
    let req = |k: usize| num(k)?.ok_or_else(|| format!("{} is empty", CSV_HEADER[k]));
    let int = |k: usize| {
        row[k]
            .parse::<usize>()
            .map_err(|_| format!("{}: {:?} is not an integer", CSV_HEADER[k], &row[k]))
    };
    Ok(SweepRecord {
        n: int(0)?,
        m: int(1)?,
        alpha2: req(2)?,
        p: req(3)?,
        pprime: req(4)?,
        gmc: num(5)?,
        fidelity: num(6)?,
        branch: if row[7].is_empty() {
            None
        } else {
            Some(row[7].parse().map_err(|_| "branch is not an integer")?)
        },
        chsh: num(8)?,
        cl: num(9)?,
        x: num(10)?,
        y: num(11)?,
        ztilde: num(12)?,
        region: if row[13].is_empty() {
            None
        } else {
            Some(row[13].to_string())
        },
    })
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Output(e.to_string()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::Output(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Output(e.to_string()))
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Serializes scenario records in the requested format.
pub fn render_records(records: &[SweepRecord], format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => csv_bytes(&CSV_HEADER, records.iter().map(csv_row)),
        Format::Json => json_bytes(&records),
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// followed by a rename, so a failed run never leaves a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn emit(output: &OutputArgs, bytes: &[u8], out: &mut dyn Write) -> Result<(), CliError> {
    match &output.out {
        Some(path) => write_atomic(path, bytes),
        None => out.write_all(bytes).map_err(io_err),
    }
}

fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let s = args.scenario.scenario()?;
    let boundaries = load_boundaries(args.boundaries.as_deref())?;
    let mut measures = vec![Measure::Gmc, Measure::Fidelity, Measure::Twirl];
    measures.push(if s.n() == 2 {
        Measure::Chsh
    } else {
        Measure::Localizable
    });
    let r = evaluate(&s, &measures, boundaries.as_ref())?;
    let mut lines = vec![
        format!("n: {}", r.n),
        format!("m: {}", r.m),
        format!("alpha2: {}", fmt12(r.alpha2)),
        format!("p: {}", fmt12(r.p)),
        format!("pprime: {}", fmt12(r.pprime)),
        format!("gmc: {}", opt(r.gmc)),
        format!("fidelity: {} (branch {})", opt(r.fidelity), r.branch.unwrap_or(0)),
    ];
    if let Some(c) = r.chsh {
        lines.push(format!("chsh: {}", fmt12(c)));
    }
    if let Some(c) = r.cl {
        lines.push(format!("localizable concurrence (1,{}): {}", r.n, fmt12(c)));
    }
    lines.push(format!("x: {}", opt(r.x)));
    lines.push(format!("y: {}", opt(r.y)));
    if let Some(z) = r.ztilde {
        lines.push(format!("ztilde: {}", fmt12(z)));
    }
    lines.push(format!("region: {}", r.region.unwrap_or_default()));
    writeln!(out, "{}", lines.join("\n")).map_err(io_err)
}

fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = SweepSpec {
        n: args.n,
        ms: args.m.clone(),
        alpha2s: args.alpha2.clone(),
        ps: args.p.clone(),
        pprime: parse_grid("pprime-grid", &args.pprime_grid)?,
        measures: parse_measures(&args.measures)?,
        boundaries: load_boundaries(args.boundaries.as_deref())?,
    };
    let records = run_sweep(&spec, args.jobs)?;
    emit(&args.output, &render_records(&records, args.output.format)?, out)
}

fn cmd_thresholds(args: &ThresholdArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let steps = (1.0 / THRESHOLD_GRID_STEP).round() as usize;
    let grid: Vec<f64> = (1..steps).map(|k| k as f64 * THRESHOLD_GRID_STEP).collect();
    let table: Vec<ThresholdRecord> = threshold_table(args.n, &args.p, &grid)?;
    let bytes = match args.output.format {
        Format::Csv => csv_bytes(
            &THRESHOLD_HEADER,
            table
                .iter()
                .map(|t| vec![t.n.to_string(), fmt12(t.p), opt(t.boundary_alpha2)]),
        )?,
        Format::Json => json_bytes(&table)?,
    };
    emit(&args.output, &bytes, out)
}

#[derive(Serialize)]
struct SegmentRow {
    n: usize,
    alpha2: f64,
    p: f64,
    criterion: crate::sweeps::Criterion,
    m: usize,
    start: f64,
    end: f64,
}

fn segment_rows(table: &[StrategyRecord]) -> Vec<SegmentRow> {
    table
        .iter()
        .flat_map(|r| {
            r.segments.iter().map(move |s| SegmentRow {
                n: r.n,
                alpha2: r.alpha2,
                p: r.p,
                criterion: r.criterion,
                m: s.m,
                start: s.start,
                end: s.end,
            })
        })
        .collect()
}

fn cmd_strategy(args: &StrategyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let grid = parse_grid("pprime-grid", &args.pprime_grid)?;
    let rows = segment_rows(&strategy_table(args.n, &args.alpha2, &args.p, &grid)?);
    let bytes = match args.output.format {
        Format::Csv => csv_bytes(
            &STRATEGY_HEADER,
            rows.iter().map(|r| {
                let criterion = match r.criterion {
                    crate::sweeps::Criterion::Gmc => "gmc",
                    crate::sweeps::Criterion::Fidelity => "fidelity",
                };
                vec![
                    r.n.to_string(),
                    fmt12(r.alpha2),
                    fmt12(r.p),
                    criterion.to_string(),
                    r.m.to_string(),
                    fmt12(r.start),
                    fmt12(r.end),
                ]
            }),
        )?,
        Format::Json => json_bytes(&rows)?,
    };
    emit(&args.output, &bytes, out)
}

fn cmd_classify(args: &ClassifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let boundaries = load_boundaries(args.boundaries.as_deref())?;
    if args.n == 3 && boundaries.is_none() {
        return Err(CliError::Config(format!(
            "--boundaries: {}",
            TwirlError::MissingBoundaryData
        )));
    }
    let spec = SweepSpec {
        n: args.n,
        ms: args.m.clone(),
        alpha2s: args.alpha2.clone(),
        ps: args.p.clone(),
        pprime: parse_grid("pprime-grid", &args.pprime_grid)?,
        measures: vec![Measure::Gmc, Measure::Twirl],
        boundaries,
    };
    let records = run_sweep(&spec, args.jobs)?;
    emit(&args.output, &render_records(&records, args.output.format)?, out)
}

fn cmd_circuit_check(args: &CircuitCheckArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.samples == 0 {
        return Err(CliError::Config("--samples must be positive".into()));
    }
    let samples = oracle_samples(args.samples, args.seed)?;
    let mut worst_per_n = [0.0f64; 3];
    for s in &samples {
        let slot = &mut worst_per_n[s.scenario.n() - 2];
        *slot = slot.max(s.deviation());
    }
    let worst = worst_per_n.iter().copied().fold(0.0, f64::max);
    for (k, w) in worst_per_n.iter().enumerate() {
        let count = samples.iter().filter(|s| s.scenario.n() == k + 2).count();
        writeln!(out, "n = {}: {count} samples, max deviation {w:.3e}", k + 2).map_err(io_err)?;
    }
    writeln!(out, "max deviation {worst:.3e} over {} samples", samples.len()).map_err(io_err)?;
    if worst > CIRCUIT_CHECK_TOL {
        return Err(CliError::CheckFailed(format!(
            "circuit and analytic fidelities differ by {worst:.3e} > {CIRCUIT_CHECK_TOL:e}"
        )));
    }
    Ok(())
}

fn cmd_localizable(args: &ScenarioArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let s = args.scenario()?;
    if s.n() < 3 {
        return Err(CliError::Config(
            "--n: localizable concurrence needs at least 3 qubits".into(),
        ));
    }
    let rho = evolve_pipeline(&s);
    let r = localizable_concurrence(&rho, (1, s.n())).map_err(Error::from)?;
    let angles: Vec<String> = r
        .optimal_basis
        .angles
        .iter()
        .map(|(t, p)| format!("({}, {})", fmt12(*t), fmt12(*p)))
        .collect();
    writeln!(out, "gmc: {}", fmt12(gmc(&x_state_view(&rho).map_err(Error::from)?))).map_err(io_err)?;
    writeln!(
        out,
        "localizable concurrence ({}, {}): {}",
        r.pair.0,
        r.pair.1,
        fmt12(r.value)
    )
    .map_err(io_err)?;
    writeln!(out, "grid value: {}", fmt12(r.grid_value)).map_err(io_err)?;
    writeln!(out, "optimal angles (theta, phi): {}", angles.join(" ")).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<String, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("ghzadc").chain(args.iter().copied()))
            .map_err(|e| CliError::Config(e.to_string()))?;
        let mut buf = Vec::new();
        run(cli, &mut buf)?;
        Ok(String::from_utf8(buf).unwrap())
    }

    #[test]
    fn twelve_digit_formatting() {
        assert_eq!(fmt12(0.5), "0.5");
        assert_eq!(fmt12(2.0 / 3.0), "0.666666666667");
        assert_eq!(round12(round12(0.1234567890123456)), round12(0.1234567890123456));
    }

    #[test]
    fn eval_bell_state() {
        let text = run_args(&[
            "eval", "--n", "2", "--m", "0", "--alpha2", "0.5", "--p", "0", "--pprime", "0",
        ])
        .unwrap();
        assert!(text.contains("gmc: 1\n"), "{text}");
        assert!(text.contains("fidelity: 1 (branch 1)"), "{text}");
    }

    #[test]
    fn out_of_range_flag_is_a_config_error() {
        let err = run_args(&[
            "eval", "--n", "2", "--m", "0", "--alpha2", "1.5", "--p", "0", "--pprime", "0",
        ])
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("--alpha2"), "{err}");
        let err = run_args(&[
            "eval", "--n", "2", "--m", "3", "--alpha2", "0.5", "--p", "0", "--pprime", "0",
        ])
        .unwrap_err();
        assert!(err.to_string().contains("--m"));
    }

    #[test]
    fn classify_three_qubits_needs_boundaries() {
        let err = run_args(&["classify", "--n", "3", "--alpha2", "0.5"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("boundar"), "{err}");
    }

    #[test]
    fn empty_grid_is_a_config_error() {
        let err = run_args(&[
            "sweep",
            "--n",
            "2",
            "--m",
            "0",
            "--alpha2",
            "0.3",
            "--pprime-grid",
            "0.5:0.1:0.1",
        ])
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("--pprime-grid"));
    }

    #[test]
    fn csv_round_trip() {
        let text = run_args(&[
            "sweep",
            "--n",
            "2",
            "--m",
            "0,1",
            "--alpha2",
            "0.3",
            "--pprime-grid",
            "0:1:0.25",
            "--measures",
            "gmc,fidelity,chsh,twirl",
        ])
        .unwrap();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(
            reader.headers().unwrap().iter().collect::<Vec<_>>(),
            CSV_HEADER.to_vec()
        );
        let parsed: Vec<SweepRecord> = reader.records().map(|r| parse_csv_row(&r.unwrap()).unwrap()).collect();
        let spec = SweepSpec {
            n: 2,
            ms: vec![0, 1],
            alpha2s: vec![0.3],
            ps: vec![0.0],
            pprime: PprimeGrid::new(0.0, 1.0, 0.25).unwrap(),
            measures: vec![Measure::Gmc, Measure::Fidelity, Measure::Chsh, Measure::Twirl],
            boundaries: None,
        };
        let r12 = |x: Option<f64>| x.map(round12);
        let expected: Vec<SweepRecord> = run_sweep(&spec, 1)
            .unwrap()
            .into_iter()
            .map(|r| SweepRecord {
                alpha2: round12(r.alpha2),
                p: round12(r.p),
                pprime: round12(r.pprime),
                gmc: r12(r.gmc),
                fidelity: r12(r.fidelity),
                chsh: r12(r.chsh),
                cl: r12(r.cl),
                x: r12(r.x),
                y: r12(r.y),
                ztilde: r12(r.ztilde),
                ..r
            })
            .collect();
        assert_eq!(parsed, expected);
    }

    #[test]
    fn atomic_write_leaves_no_partial_file_on_bad_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let p = path.to_str().unwrap();
        assert!(run_args(&[
            "sweep",
            "--n",
            "2",
            "--m",
            "0",
            "--alpha2",
            "0.3",
            "--measures",
            "bogus",
            "--out",
            p
        ])
        .is_err());
        assert!(!path.exists());
        run_args(&[
            "sweep",
            "--n",
            "2",
            "--m",
            "0",
            "--alpha2",
            "0.3",
            "--pprime-grid",
            "0:1:0.5",
            "--out",
            p,
        ])
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
