//! Command-line front end.
//!
//! Five subcommands: `run` plays one configuration, `sweep-si` / `sweep-cp`
//! sweep the two strategy parameters, `figure` reproduces a preset sweep
//! (fig3a, fig3b, fig3c, fig4a, fig4b) in one shot, and `selftest` runs the
//! built-in analytic-versus-sampled checks. Output goes to stdout or
//! `--out`, as CSV (with the fully resolved configuration in `#` comment
//! lines) or as an SVG chart. Given the same arguments and seed, every
//! command produces byte-identical output regardless of thread count.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::environment::MachinesSpec;
use crate::experiment::{
    average_normalized, monte_carlo_mean, normalize_rewards, optimal_si_curve, sweep_check_span,
    sweep_search_interval, NormalizedSweep, RunConfig, StrategyKind, SweepResult, SweepRow,
};
use crate::optics::{
    correlated_joint_distribution, entangled_joint_distribution, Angle, MachineChoice,
    WaveplateSetting,
};
use crate::output::{svg_line_chart, ChartSeries, ChartSpec, CsvBuilder};
use crate::rng::RngStream;
use crate::strategy::StrategyParams;

/// Parses `std::env::args` and runs the selected command.
pub fn main() -> Result<()> {
    execute(Cli::parse())
}

#[derive(Debug, Parser)]
#[command(
    name = "photon-bandit",
    version,
    about = "Two-player competitive bandit simulator driven by photon-pair decision sampling"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Play one configuration and report its Monte Carlo mean.
    Run(RunArgs),
    /// Sweep the search interval, all other parameters fixed.
    SweepSi(SweepSiArgs),
    /// Sweep the check span, averaging over happy-hour periods.
    SweepCp(SweepCpArgs),
    /// Reproduce a preset figure sweep.
    Figure(FigureArgs),
    /// Run the built-in analytic-versus-sampled consistency checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Mixed,
    EntangledOnly,
}

impl From<StrategyArg> for StrategyKind {
    fn from(arg: StrategyArg) -> Self {
        match arg {
            StrategyArg::Mixed => StrategyKind::Mixed,
            StrategyArg::EntangledOnly => StrategyKind::EntangledOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Svg,
}

/// Happy-hour half-period: a positive step count, or disabled.
#[derive(Debug, Clone, Copy)]
struct PeriodArg(Option<u64>);

fn parse_period(s: &str) -> Result<PeriodArg, String> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(PeriodArg(None));
    }
    let t: u64 = s
        .parse()
        .map_err(|_| format!("expected a positive integer or \"none\", got {s:?}"))?;
    if t == 0 {
        return Err("the happy-hour period must be at least 1".into());
    }
    Ok(PeriodArg(Some(t)))
}

/// Inclusive integer range written as `A:B`.
#[derive(Debug, Clone, Copy)]
struct RangeArg {
    start: u64,
    end: u64,
}

impl RangeArg {
    fn inclusive(self) -> std::ops::RangeInclusive<u64> {
        self.start..=self.end
    }
}

impl std::fmt::Display for RangeArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

fn parse_range(s: &str) -> Result<RangeArg, String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected A:B, got {s:?}"))?;
    let start: u64 = a.parse().map_err(|_| format!("bad range start {a:?}"))?;
    let end: u64 = b.parse().map_err(|_| format!("bad range end {b:?}"))?;
    if start == 0 {
        return Err("ranges start at 1".into());
    }
    if start > end {
        return Err(format!("empty range {start}:{end}"));
    }
    Ok(RangeArg { start, end })
}

fn parse_probability(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !(0.0..=1.0).contains(&p) {
        return Err(format!("probability {p} outside [0, 1]"));
    }
    Ok(p)
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Win probability of machine A.
    #[arg(long, default_value_t = 0.6, value_parser = parse_probability)]
    pa: f64,
    /// Win probability of machine B.
    #[arg(long, default_value_t = 0.4, value_parser = parse_probability)]
    pb: f64,
    /// Happy-hour half-period in steps, or "none" to disable.
    #[arg(long, default_value = "50", value_parser = parse_period)]
    t: PeriodArg,
    /// Search interval: entangled exploration steps per phase.
    #[arg(long, default_value_t = 14, value_parser = clap::value_parser!(u64).range(1..))]
    si: u64,
    /// Check span: maximum conflicted probe steps per check phase.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    cp: u64,
    /// Plays per episode.
    #[arg(long, default_value_t = 1500, value_parser = clap::value_parser!(u64).range(1..))]
    steps: u64,
    /// Monte Carlo repetitions.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
    /// Master seed; repetition i plays from its own derived child stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Decision policy.
    #[arg(long, value_enum, default_value_t = StrategyArg::Mixed)]
    strategy: StrategyArg,
    /// Write output to this path instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

impl CommonArgs {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            machines: MachinesSpec::new(self.pa, self.pb),
            happy_period: self.t.0,
            params: StrategyParams::new(self.si, self.cp),
            strategy_kind: self.strategy.into(),
            steps: self.steps,
            reps: self.reps,
            master_seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct SweepSiArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Search intervals to sweep, as an inclusive range A:B.
    #[arg(long = "si-range", default_value = "1:50", value_parser = parse_range)]
    si_range: RangeArg,
}

#[derive(Debug, Args)]
struct SweepCpArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Check spans to sweep, as an inclusive range A:B.
    #[arg(long = "cp-range", default_value = "1:10", value_parser = parse_range)]
    cp_range: RangeArg,
    /// Happy-hour periods averaged into each sweep point (replaces --t).
    #[arg(
        long = "t-values",
        value_delimiter = ',',
        default_value = "10,20,30,40,50,60,70,80,90,100",
        value_parser = clap::value_parser!(u64).range(1..)
    )]
    t_values: Vec<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FigurePreset {
    /// Total reward vs search interval, four machine pairs, T=50, CP=2.
    #[value(name = "fig3a")]
    Fig3a,
    /// Total reward vs search interval for happy-hour periods 10..100.
    #[value(name = "fig3b")]
    Fig3b,
    /// Normalized rewards of fig3b, with the period-averaged curve.
    #[value(name = "fig3c")]
    Fig3c,
    /// Optimal search interval vs difficulty 1-(pa-pb).
    #[value(name = "fig4a")]
    Fig4a,
    /// Total reward vs check span at (0.7,0.3), averaged over periods.
    #[value(name = "fig4b")]
    Fig4b,
}

#[derive(Debug, Args)]
struct FigureArgs {
    /// Which figure preset to reproduce.
    #[arg(value_enum)]
    which: FigurePreset,
    /// Plays per episode.
    #[arg(long, default_value_t = 1500, value_parser = clap::value_parser!(u64).range(1..))]
    steps: u64,
    /// Monte Carlo repetitions per sweep point.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Search interval used inside the fig4b check-span sweep.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    si: u64,
    /// Search intervals swept by fig3a/fig3b/fig3c/fig4a.
    #[arg(long = "si-range", default_value = "1:50", value_parser = parse_range)]
    si_range: RangeArg,
    /// Check spans swept by fig4b.
    #[arg(long = "cp-range", default_value = "1:10", value_parser = parse_range)]
    cp_range: RangeArg,
    /// Happy-hour period grid used by fig3b/fig3c/fig4a/fig4b.
    #[arg(
        long = "t-values",
        value_delimiter = ',',
        default_value = "10,20,30,40,50,60,70,80,90,100",
        value_parser = clap::value_parser!(u64).range(1..)
    )]
    t_values: Vec<u64>,
    /// Write output to this path instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::SweepSi(args) => cmd_sweep_si(args),
        Command::SweepCp(args) => cmd_sweep_cp(args),
        Command::Figure(args) => cmd_figure(args),
        Command::Selftest => cmd_selftest(),
    }
}

fn write_output(out: Option<&PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content)
            .with_context(|| format!("writing output to {}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn preamble(csv: &mut CsvBuilder, command: &str) {
    csv.comment(&format!(
        "photon-bandit {} — {command}",
        env!("CARGO_PKG_VERSION")
    ));
}

fn scalar_comments(csv: &mut CsvBuilder, config: &RunConfig) {
    csv.comment(&format!("strategy: {}", config.strategy_kind));
    csv.comment(&format!("steps: {}", config.steps));
    csv.comment(&format!("reps: {}", config.reps));
    csv.comment(&format!("seed: {}", config.master_seed));
}

fn machines_comment(csv: &mut CsvBuilder, machines: &MachinesSpec) {
    csv.comment(&format!("pa: {:.6}", machines.p_a));
    csv.comment(&format!("pb: {:.6}", machines.p_b));
}

fn period_comment(csv: &mut CsvBuilder, period: Option<u64>) {
    match period {
        Some(t) => csv.comment(&format!("t: {t}")),
        None => csv.comment("t: none"),
    }
}

fn t_values_comment(csv: &mut CsvBuilder, t_values: &[u64]) {
    let list = t_values
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",");
    csv.comment(&format!("t_values: {list}"));
}

const SWEEP_COLUMNS: &str = "param,mean_total_reward,stderr,reps";

fn cmd_run(args: RunArgs) -> Result<()> {
    let config = args.common.to_config();
    if matches!(args.common.format, OutputFormat::Svg) {
        bail!("run produces a single point; use sweep-si or sweep-cp for charts");
    }
    let (mean, stderr) = monte_carlo_mean(&config);
    let mut csv = CsvBuilder::new();
    preamble(&mut csv, "run");
    scalar_comments(&mut csv, &config);
    machines_comment(&mut csv, &config.machines);
    period_comment(&mut csv, config.happy_period);
    csv.comment(&format!("si: {}", config.params.si));
    csv.comment(&format!("cp: {}", config.params.cp));
    csv.comment("param: si");
    csv.columns(SWEEP_COLUMNS);
    csv.sweep_rows(&SweepResult {
        rows: vec![SweepRow {
            param: config.params.si as f64,
            mean_total_reward: mean,
            stderr,
            reps: config.reps,
        }],
    });
    write_output(args.common.out.as_ref(), &csv.into_string())
}

fn cmd_sweep_si(args: SweepSiArgs) -> Result<()> {
    let config = args.common.to_config();
    let sweep = sweep_search_interval(&config, args.si_range.inclusive());

    let content = match args.common.format {
        OutputFormat::Csv => {
            let mut csv = CsvBuilder::new();
            preamble(&mut csv, "sweep-si");
            scalar_comments(&mut csv, &config);
            machines_comment(&mut csv, &config.machines);
            period_comment(&mut csv, config.happy_period);
            csv.comment(&format!("cp: {}", config.params.cp));
            csv.comment(&format!("si: swept {}", args.si_range));
            csv.comment("param: si");
            csv.columns(SWEEP_COLUMNS);
            csv.sweep_rows(&sweep);
            csv.into_string()
        }
        OutputFormat::Svg => svg_line_chart(
            &ChartSpec {
                title: format!(
                    "Total reward vs search interval (pa={}, pb={})",
                    config.machines.p_a, config.machines.p_b
                ),
                x_label: "search interval".into(),
                y_label: "mean total reward".into(),
                baseline: None,
            },
            &[sweep_series("mean total reward", &sweep)],
        ),
    };
    write_output(args.common.out.as_ref(), &content)
}

fn cmd_sweep_cp(args: SweepCpArgs) -> Result<()> {
    let config = args.common.to_config();
    let sweep = sweep_check_span(&config, args.cp_range.inclusive(), &args.t_values);

    let content = match args.common.format {
        OutputFormat::Csv => {
            let mut csv = CsvBuilder::new();
            preamble(&mut csv, "sweep-cp");
            scalar_comments(&mut csv, &config);
            machines_comment(&mut csv, &config.machines);
            t_values_comment(&mut csv, &args.t_values);
            csv.comment(&format!("si: {}", config.params.si));
            csv.comment(&format!("cp: swept {}", args.cp_range));
            csv.comment("param: cp");
            csv.comment("reps column counts episodes summed over all periods");
            csv.columns(SWEEP_COLUMNS);
            csv.sweep_rows(&sweep);
            csv.into_string()
        }
        OutputFormat::Svg => svg_line_chart(
            &ChartSpec {
                title: format!(
                    "Total reward vs check span (pa={}, pb={})",
                    config.machines.p_a, config.machines.p_b
                ),
                x_label: "check span".into(),
                y_label: "mean total reward".into(),
                baseline: None,
            },
            &[sweep_series("period-averaged mean", &sweep)],
        ),
    };
    write_output(args.common.out.as_ref(), &content)
}

/// The machine pairs the figure presets cover, strongest separation first.
const FIGURE_PAIRS: [(f64, f64); 4] = [(0.9, 0.1), (0.8, 0.2), (0.7, 0.3), (0.6, 0.4)];

fn figure_base(args: &FigureArgs, machines: MachinesSpec, si: u64, cp: u64) -> RunConfig {
    RunConfig {
        machines,
        happy_period: None,
        params: StrategyParams::new(si, cp),
        strategy_kind: StrategyKind::Mixed,
        steps: args.steps,
        reps: args.reps,
        master_seed: args.seed,
    }
}

fn sweep_series(label: &str, sweep: &SweepResult) -> ChartSeries {
    ChartSeries {
        label: label.into(),
        points: sweep
            .rows
            .iter()
            .map(|r| (r.param, r.mean_total_reward))
            .collect(),
    }
}

fn normalized_series(label: &str, sweep: &NormalizedSweep) -> ChartSeries {
    ChartSeries {
        label: label.into(),
        points: sweep.rows.iter().map(|r| (r.param, r.normalized)).collect(),
    }
}

fn cmd_figure(args: FigureArgs) -> Result<()> {
    let content = match args.which {
        FigurePreset::Fig3a => figure_3a(&args),
        FigurePreset::Fig3b => figure_3b(&args),
        FigurePreset::Fig3c => figure_3c(&args),
        FigurePreset::Fig4a => figure_4a(&args),
        FigurePreset::Fig4b => figure_4b(&args),
    };
    write_output(args.out.as_ref(), &content)
}

/// Search-interval sweeps at T=50, CP=2 for all four machine pairs, with
/// the entangled-only mean as the reference baseline.
fn figure_3a(args: &FigureArgs) -> String {
    let mut baseline_config = figure_base(args, MachinesSpec::new(0.6, 0.4), 14, 2);
    baseline_config.strategy_kind = StrategyKind::EntangledOnly;
    let (baseline_mean, baseline_stderr) = monte_carlo_mean(&baseline_config);

    let mut sweeps = Vec::new();
    for (p_a, p_b) in FIGURE_PAIRS {
        eprintln!("fig3a: sweeping si at pa={p_a} pb={p_b}");
        let mut config = figure_base(args, MachinesSpec::new(p_a, p_b), 14, 2);
        config.happy_period = Some(50);
        let sweep = sweep_search_interval(&config, args.si_range.inclusive());
        sweeps.push(((p_a, p_b), sweep));
    }

    match args.format {
        OutputFormat::Csv => {
            let mut csv = CsvBuilder::new();
            preamble(&mut csv, "figure fig3a");
            scalar_comments(&mut csv, &figure_base(args, MachinesSpec::new(0.6, 0.4), 14, 2));
            period_comment(&mut csv, Some(50));
            csv.comment("cp: 2");
            csv.comment(&format!("si: swept {}", args.si_range));
            csv.comment(&format!(
                "baseline_entangled_only_mean: {baseline_mean:.6} (stderr {baseline_stderr:.6})"
            ));
            csv.comment("param: si");
            csv.columns(SWEEP_COLUMNS);
            for ((p_a, p_b), sweep) in &sweeps {
                csv.series(&format!("pa={p_a} pb={p_b}"));
                csv.sweep_rows(sweep);
            }
            csv.into_string()
        }
        OutputFormat::Svg => {
            let series: Vec<ChartSeries> = sweeps
                .iter()
                .map(|((p_a, p_b), sweep)| sweep_series(&format!("pa={p_a} pb={p_b}"), sweep))
                .collect();
            svg_line_chart(
                &ChartSpec {
                    title: "Total reward vs search interval (T=50, CP=2)".into(),
                    x_label: "search interval".into(),
                    y_label: "mean total reward".into(),
                    baseline: Some(baseline_mean),
                },
                &series,
            )
        }
    }
}

/// Search-interval sweeps across the happy-hour period grid, one block of
/// series per machine pair.
fn figure_3b(args: &FigureArgs) -> String {
    let sweeps = per_pair_period_sweeps(args, "fig3b");

    match args.format {
        OutputFormat::Csv => {
            let mut csv = CsvBuilder::new();
            preamble(&mut csv, "figure fig3b");
            scalar_comments(&mut csv, &figure_base(args, MachinesSpec::new(0.6, 0.4), 14, 2));
            csv.comment("cp: 2");
            csv.comment(&format!("si: swept {}", args.si_range));
            t_values_comment(&mut csv, &args.t_values);
            csv.comment("param: si");
            csv.columns(SWEEP_COLUMNS);
            for ((p_a, p_b), t, sweep) in &sweeps {
                csv.series(&format!("pa={p_a} pb={p_b} T={t}"));
                csv.sweep_rows(sweep);
            }
            csv.into_string()
        }
        OutputFormat::Svg => {
            let series: Vec<ChartSeries> = sweeps
                .iter()
                .map(|((p_a, p_b), t, sweep)| {
                    sweep_series(&format!("pa={p_a} pb={p_b} T={t}"), sweep)
                })
                .collect();
            svg_line_chart(
                &ChartSpec {
                    title: "Total reward vs search interval across periods".into(),
                    x_label: "search interval".into(),
                    y_label: "mean total reward".into(),
                    baseline: None,
                },
                &series,
            )
        }
    }
}

/// Normalized fig3b curves plus each pair's period-averaged curve.
fn figure_3c(args: &FigureArgs) -> String {
    let sweeps = per_pair_period_sweeps(args, "fig3c");

    // Blocks of (pair, per-period normalized curves, their average).
    let mut blocks: Vec<((f64, f64), Vec<(u64, NormalizedSweep)>, NormalizedSweep)> = Vec::new();
    for &(p_a, p_b) in &FIGURE_PAIRS {
        let per_period: Vec<(u64, NormalizedSweep)> = sweeps
            .iter()
            .filter(|((a, b), _, _)| (*a, *b) == (p_a, p_b))
            .map(|(_, t, sweep)| (*t, normalize_rewards(sweep)))
            .collect();
        let profiles: Vec<NormalizedSweep> =
            per_period.iter().map(|(_, n)| n.clone()).collect();
        let averaged = average_normalized(&profiles);
        blocks.push(((p_a, p_b), per_period, averaged));
    }

    match args.format {
        OutputFormat::Csv => {
            let mut csv = CsvBuilder::new();
            preamble(&mut csv, "figure fig3c");
            scalar_comments(&mut csv, &figure_base(args, MachinesSpec::new(0.6, 0.4), 14, 2));
            csv.comment("cp: 2");
            csv.comment(&format!("si: swept {}", args.si_range));
            t_values_comment(&mut csv, &args.t_values);
            csv.comment("param: si");
            csv.columns("param,normalized_reward");
            for ((p_a, p_b), per_period, averaged) in &blocks {
                for (t, normalized) in per_period {
                    csv.series(&format!("pa={p_a} pb={p_b} T={t}"));
                    csv.normalized_rows(normalized);
                }
                csv.series(&format!("pa={p_a} pb={p_b} average"));
                csv.normalized_rows(averaged);
            }
            csv.into_string()
        }
        OutputFormat::Svg => {
            let series: Vec<ChartSeries> = blocks
                .iter()
                .map(|((p_a, p_b), _, averaged)| {
                    normalized_series(&format!("pa={p_a} pb={p_b} average"), averaged)
                })
                .collect();
            svg_line_chart(
                &ChartSpec {
                    title: "Period-averaged normalized reward vs search interval".into(),
                    x_label: "search interval".into(),
                    y_label: "normalized total reward".into(),
                    baseline: None,
                },
                &series,
            )
        }
    }
}

type PairPeriodSweeps = Vec<((f64, f64), u64, SweepResult)>;

fn per_pair_period_sweeps(args: &FigureArgs, label: &str) -> PairPeriodSweeps {
    let mut sweeps = Vec::new();
    for (p_a, p_b) in FIGURE_PAIRS {
        for &t in &args.t_values {
            eprintln!("{label}: sweeping si at pa={p_a} pb={p_b} T={t}");
            let mut config = figure_base(args, MachinesSpec::new(p_a, p_b), 14, 2);
            config.happy_period = Some(t);
            let sweep = sweep_search_interval(&config, args.si_range.inclusive());
            sweeps.push(((p_a, p_b), t, sweep));
        }
    }
    sweeps
}

/// Optimal search interval against difficulty, including the degenerate
/// equal-machines pair.
fn figure_4a(args: &FigureArgs) -> String {
    let pairs: Vec<(f64, f64)> = FIGURE_PAIRS
        .iter()
        .copied()
        .chain(std::iter::once((0.5, 0.5)))
        .collect();
    let base = figure_base(args, MachinesSpec::new(0.6, 0.4), 14, 2);
    eprintln!(
        "fig4a: sweeping si over {} pairs x {} periods",
        pairs.len(),
        args.t_values.len()
    );
    let rows = optimal_si_curve(&pairs, &args.t_values, args.si_range.inclusive(), &base);

    match args.format {
        OutputFormat::Csv => {
            let mut csv = CsvBuilder::new();
            preamble(&mut csv, "figure fig4a");
            scalar_comments(&mut csv, &base);
            csv.comment("cp: 2");
            csv.comment(&format!("si: swept {}", args.si_range));
            t_values_comment(&mut csv, &args.t_values);
            let mut pair_list = String::new();
            for (p_a, p_b) in &pairs {
                let _ = write!(pair_list, " ({p_a},{p_b})");
            }
            csv.comment(&format!("pairs:{pair_list}"));
            csv.columns("difficulty,optimal_si");
            csv.optimal_si_rows(&rows);
            csv.into_string()
        }
        OutputFormat::Svg => {
            let series = ChartSeries {
                label: "optimal search interval".into(),
                points: rows
                    .iter()
                    .map(|r| (r.difficulty, r.optimal_si as f64))
                    .collect(),
            };
            svg_line_chart(
                &ChartSpec {
                    title: "Optimal search interval vs difficulty".into(),
                    x_label: "difficulty 1-(pa-pb)".into(),
                    y_label: "optimal search interval".into(),
                    baseline: None,
                },
                &[series],
            )
        }
    }
}

/// Check-span sweep at (0.7, 0.3), averaged over the period grid.
fn figure_4b(args: &FigureArgs) -> String {
    let config = figure_base(args, MachinesSpec::new(0.7, 0.3), args.si, 2);
    eprintln!(
        "fig4b: sweeping cp {} over {} periods",
        args.cp_range,
        args.t_values.len()
    );
    let sweep = sweep_check_span(&config, args.cp_range.inclusive(), &args.t_values);

    match args.format {
        OutputFormat::Csv => {
            let mut csv = CsvBuilder::new();
            preamble(&mut csv, "figure fig4b");
            scalar_comments(&mut csv, &config);
            machines_comment(&mut csv, &config.machines);
            t_values_comment(&mut csv, &args.t_values);
            csv.comment(&format!("si: {}", config.params.si));
            csv.comment(&format!("cp: swept {}", args.cp_range));
            csv.comment("param: cp");
            csv.comment("reps column counts episodes summed over all periods");
            csv.columns(SWEEP_COLUMNS);
            csv.sweep_rows(&sweep);
            csv.into_string()
        }
        OutputFormat::Svg => svg_line_chart(
            &ChartSpec {
                title: "Total reward vs check span (pa=0.7, pb=0.3)".into(),
                x_label: "check span".into(),
                y_label: "mean total reward".into(),
                baseline: None,
            },
            &[sweep_series("period-averaged mean", &sweep)],
        ),
    }
}

/// Analytic-versus-sampled consistency checks, printed one line per check.
fn cmd_selftest() -> Result<()> {
    let mut failures = Vec::new();
    let mut check = |name: &str, result: Option<String>| match result {
        None => println!("ok   {name}"),
        Some(detail) => {
            println!("FAIL {name}: {detail}");
            failures.push(name.to_string());
        }
    };

    let mut rng = RngStream::seed_from(0x5e1f_7e57);
    let angle = |rng: &mut RngStream| {
        Angle::radians((rng.uniform01() * 4.0 - 2.0) * std::f64::consts::PI)
    };

    // Four-outcome normalization for both sources.
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let theta1 = angle(&mut rng);
        let wp = WaveplateSetting::new(angle(&mut rng), angle(&mut rng));
        for dist in [
            correlated_joint_distribution(theta1, wp),
            entangled_joint_distribution(wp),
        ] {
            let sum: f64 = dist.components().iter().sum();
            worst = worst.max((sum - 1.0).abs());
        }
    }
    check(
        "four-outcome normalization (10000 settings)",
        (worst > 1e-12).then(|| format!("worst deviation {worst:.3e}")),
    );

    // Zero conflict mass at equal wave-plate angles.
    let mut bad = None;
    for _ in 0..1_000 {
        let common = angle(&mut rng);
        let dist = entangled_joint_distribution(WaveplateSetting::new(common, common));
        if dist.conflict_probability() != 0.0 {
            bad = Some(format!(
                "conflict probability {} at angle {}",
                dist.conflict_probability(),
                common.as_radians()
            ));
            break;
        }
    }
    check("zero conflict at equal angles (1000 settings)", bad);

    // Product-state identity of the correlated source.
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let dist = correlated_joint_distribution(
            angle(&mut rng),
            WaveplateSetting::new(angle(&mut rng), angle(&mut rng)),
        );
        worst = worst.max((dist.p_aa * dist.p_bb - dist.p_ab * dist.p_ba).abs());
    }
    check(
        "correlated product identity (10000 settings)",
        (worst > 1e-12).then(|| format!("worst deviation {worst:.3e}")),
    );

    // Sampled frequencies against analytic probabilities.
    let mut bad = None;
    'dists: for i in 0..20 {
        let dist = if i % 2 == 0 {
            correlated_joint_distribution(
                angle(&mut rng),
                WaveplateSetting::new(angle(&mut rng), angle(&mut rng)),
            )
        } else {
            entangled_joint_distribution(WaveplateSetting::new(angle(&mut rng), angle(&mut rng)))
        };
        let n = 100_000u64;
        let mut counts = [0u64; 4];
        for _ in 0..n {
            let idx = match dist.sample(&mut rng) {
                (MachineChoice::A, MachineChoice::A) => 0,
                (MachineChoice::A, MachineChoice::B) => 1,
                (MachineChoice::B, MachineChoice::A) => 2,
                (MachineChoice::B, MachineChoice::B) => 3,
            };
            counts[idx] += 1;
        }
        for (count, p) in counts.iter().zip(dist.components()) {
            let freq = *count as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            if (freq - p).abs() > (4.0 * sigma).max(1e-9) {
                bad = Some(format!("distribution {i}: freq {freq:.5} vs p {p:.5}"));
                break 'dists;
            }
        }
    }
    check("sampling within 4 sigma (20 distributions x 1e5 draws)", bad);

    // Entangled-only baseline pays one unit per step in expectation.
    let config = RunConfig::new(
        MachinesSpec::new(0.6, 0.4),
        None,
        StrategyParams::new(14, 2),
        StrategyKind::EntangledOnly,
    );
    let (mean, stderr) = monte_carlo_mean(&config);
    check(
        "entangled-only baseline mean within 1500 +/- 5",
        ((mean - 1500.0).abs() > 5.0)
            .then(|| format!("mean {mean:.3} (stderr {stderr:.3})")),
    );

    if failures.is_empty() {
        println!("selftest: all checks passed");
        Ok(())
    } else {
        bail!("selftest failed: {}", failures.join(", "));
    }
}
