//! Command-line front end.
//!
//! Exit codes: 0 no violation, 10 violation detected, 1 soundness failure,
//! 2 usage or input error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::downconv::{self, DownConversionParams};
use crate::error::{GmeError, Result};
use crate::local_ops::{random_rank_one_ops, LocalOperator};
use crate::optimizer;
use crate::state_file::{load_ops, read_state_file};
use crate::states::{
    random_biseparable_with, white_noise_mix, Bipartition, HilbertDims, PureState, QuantumState,
};
use crate::witness::{fmt_float, Condition, Witness, WitnessReport, CSV_HEADER, DEFAULT_TOLERANCE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 10;
pub const EXIT_SOUNDNESS_FAILURE: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "gme",
    version,
    about = "Genuine multipartite entanglement witnesses"
)]
pub struct Cli {
    /// Violation tolerance.
    #[arg(long, global = true, env = "GME_TOLERANCE", default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one witness on a state; prints the report as JSON.
    Evaluate(EvaluateArgs),
    /// Locate the white-noise threshold of a pure state.
    ScanNoise(ScanNoiseArgs),
    /// Time series of the parametric down-conversion witness as CSV.
    Downconv(DownconvArgs),
    /// Evaluate a witness on random biseparable states.
    Soundness(SoundnessArgs),
    /// Search rank-one local operators maximising the violation margin.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[arg(long)]
    pub condition: Condition,
    /// One character per subsystem, `d` marks the daggered factor (e.g. `d--`).
    #[arg(long)]
    pub dagger: Option<String>,
    /// Block holding `L` for bi1/bi2, e.g. `ab|cd` or `0|12`.
    #[arg(long)]
    pub partition: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// Operator JSON file, or inline factors separated by `;`.
    #[arg(long)]
    pub ops: String,
    #[command(flatten)]
    pub witness: WitnessArgs,
}

#[derive(Debug, Args)]
pub struct ScanNoiseArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long)]
    pub ops: String,
    #[command(flatten)]
    pub witness: WitnessArgs,
    /// Spacing of the `s` grid on [0, 1].
    #[arg(long, default_value_t = 0.01)]
    pub s_step: f64,
    /// CSV of the grid.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DownconvArgs {
    #[arg(long = "N", default_value_t = 4)]
    pub photons: usize,
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
    #[arg(long, default_value_t = 0.0)]
    pub omega1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub omega2: f64,
    #[arg(long, default_value_t = 0.0)]
    pub omega3: f64,
    #[arg(long, default_value_t = 0.0)]
    pub t_start: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_stop: f64,
    #[arg(long, default_value_t = 0.05)]
    pub t_step: f64,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SoundnessArgs {
    #[arg(long)]
    pub condition: Condition,
    /// Comma-separated subsystem dimensions; qubits by default.
    #[arg(long)]
    pub dims: Option<String>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub mixture_size: usize,
    #[arg(long)]
    pub partition: Option<String>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[command(flatten)]
    pub witness: WitnessArgs,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Parses arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT_ERROR
        }
    }
}

pub fn run(cli: &Cli, out: &mut impl Write) -> Result<i32> {
    match &cli.command {
        Command::Evaluate(a) => cmd_evaluate(a, cli.tolerance, out),
        Command::ScanNoise(a) => cmd_scan_noise(a, cli.tolerance, out),
        Command::Downconv(a) => cmd_downconv(a, cli.tolerance, out),
        Command::Soundness(a) => cmd_soundness(a, cli.tolerance, out),
        Command::Optimize(a) => cmd_optimize(a, cli.tolerance, out),
    }
}

fn io_err(e: std::io::Error) -> GmeError {
    GmeError::Parse(format!("write failed: {e}"))
}

fn print_json(out: &mut impl Write, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| GmeError::Parse(e.to_string()))?;
    writeln!(out, "{text}").map_err(io_err)
}

fn write_text(path: Option<&Path>, text: &str, out: &mut impl Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| GmeError::Parse(format!("cannot write {}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(io_err),
    }
}

/// Sites of the first block of a label such as `ab|cd` or `0|12`.
pub fn l_sites_from_label(parties: usize, label: &str) -> Result<Vec<usize>> {
    Bipartition::parse(parties, label)?;
    let first = label.split('|').next().unwrap_or_default();
    Ok(first
        .chars()
        .map(|c| {
            if c.is_ascii_digit() {
                c as usize - '0' as usize
            } else {
                c.to_ascii_lowercase() as usize - 'a' as usize
            }
        })
        .collect())
}

fn build_witness(
    condition: Condition,
    dagger: Option<&str>,
    partition: Option<&str>,
    parties: usize,
    tolerance: f64,
) -> Result<Witness> {
    let mut w = Witness::new(condition).with_tolerance(tolerance)?;
    if let Some(label) = partition {
        if !matches!(condition, Condition::Bi1 | Condition::Bi2) {
            return Err(GmeError::Validation(format!(
                "--partition only applies to bi1/bi2, not {condition}"
            )));
        }
        w = w.with_l_sites(l_sites_from_label(parties, label)?);
    }
    if let Some(pattern) = dagger {
        let mask = crate::local_ops::parse_dagger_pattern(pattern)?;
        if mask.len() != parties {
            return Err(GmeError::Shape(format!(
                "dagger pattern `{pattern}` has {} characters for {parties} subsystems",
                mask.len()
            )));
        }
        w = w.with_dagger_pattern(&mask)?;
    }
    Ok(w)
}

fn witness_for_ops(
    args: &WitnessArgs,
    ops_arg: &str,
    dims: &HilbertDims,
    tolerance: f64,
) -> Result<(Witness, Vec<LocalOperator>)> {
    let ops_file = load_ops(ops_arg)?;
    let ops = ops_file.operators(dims)?;
    let dagger = args.dagger.clone().or(ops_file.dagger);
    let w = build_witness(
        args.condition,
        dagger.as_deref(),
        args.partition.as_deref(),
        dims.parties(),
        tolerance,
    )?;
    Ok((w, ops))
}

fn cmd_evaluate(a: &EvaluateArgs, tolerance: f64, out: &mut impl Write) -> Result<i32> {
    let state = read_state_file(&a.state)?.build()?;
    let (w, ops) = witness_for_ops(&a.witness, &a.ops, state.dims(), tolerance)?;
    let report = w.evaluate(&state, &ops)?;
    print_json(out, &report)?;
    Ok(if report.violated {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisePoint {
    pub s: f64,
    pub report: WitnessReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseSummary {
    /// Smallest purity weight with a positive margin, or `None`.
    pub threshold: Option<f64>,
    pub status: String,
    /// Whether the margin was nondecreasing along the grid.
    pub monotone: bool,
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseScan {
    pub points: Vec<NoisePoint>,
    pub summary: NoiseSummary,
}

/// Width of the final bisection bracket.
pub const THRESHOLD_RESOLUTION: f64 = 1e-12;

/// Margins of `s |psi><psi| + (1 - s) I / D` on an `s` grid and bisection of the sign change.
pub fn scan_noise(
    psi: &PureState,
    witness: &Witness,
    ops: &[LocalOperator],
    s_step: f64,
) -> Result<NoiseScan> {
    if !(s_step > 0.0 && s_step <= 1.0) {
        return Err(GmeError::Validation(format!(
            "s step must be in (0, 1], got {s_step}"
        )));
    }
    let margin_at =
        |s: f64| -> Result<WitnessReport> { witness.evaluate(&white_noise_mix(psi, s)?, ops) };
    let mut grid = downconv::time_grid(0.0, 1.0, s_step)?;
    if grid.last().is_some_and(|&s| s < 1.0) {
        grid.push(1.0);
    }
    let grid: Vec<f64> = grid.into_iter().map(|s| s.min(1.0)).collect();
    let points = grid
        .par_iter()
        .map(|&s| {
            Ok(NoisePoint {
                s,
                report: margin_at(s)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = points
        .windows(2)
        .all(|w| w[1].report.margin >= w[0].report.margin - 1e-12);

    let threshold = match points.iter().position(|p| p.report.margin > 0.0) {
        None => None,
        Some(0) => Some(0.0),
        Some(k) => {
            let (mut lo, mut hi) = (points[k - 1].s, points[k].s);
            while hi - lo > THRESHOLD_RESOLUTION {
                let mid = 0.5 * (lo + hi);
                if margin_at(mid)?.margin > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Some(0.5 * (lo + hi))
        }
    };
    let status = if threshold.is_some() {
        "threshold"
    } else {
        "no threshold"
    }
    .to_string();
    let summary = NoiseSummary {
        threshold,
        status,
        monotone,
        grid_points: points.len(),
    };
    Ok(NoiseScan { points, summary })
}

pub fn noise_csv(scan: &NoiseScan) -> String {
    let mut text = format!("s,{CSV_HEADER}\n");
    for p in &scan.points {
        text.push_str(&format!("{},{}\n", fmt_float(p.s), p.report.csv_row()));
    }
    text
}

fn cmd_scan_noise(a: &ScanNoiseArgs, tolerance: f64, out: &mut impl Write) -> Result<i32> {
    let psi = read_state_file(&a.state)?.pure_part()?;
    let (w, ops) = witness_for_ops(&a.witness, &a.ops, psi.dims(), tolerance)?;
    let scan = scan_noise(&psi, &w, &ops, a.s_step)?;
    if !scan.summary.monotone {
        eprintln!("warning: margin is not monotone in s on this grid");
    }
    if let Some(path) = &a.out {
        write_text(Some(path), &noise_csv(&scan), out)?;
    }
    print_json(out, &scan.summary)?;
    Ok(EXIT_OK)
}

fn cmd_downconv(a: &DownconvArgs, tolerance: f64, out: &mut impl Write) -> Result<i32> {
    let params = DownConversionParams::new(a.photons, a.omega1, a.omega2, a.omega3, a.g)?;
    let times = downconv::time_grid(a.t_start, a.t_stop, a.t_step)?;
    let ev = crate::witness::Evaluator::new(tolerance)?;
    let rows = downconv::sweep(&ev, &params, &times)?;
    let mut text = downconv::csv_header(a.photons);
    text.push('\n');
    for row in &rows {
        text.push_str(&downconv::csv_row(row));
        text.push('\n');
    }
    write_text(a.out.as_deref(), &text, out)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoundnessSummary {
    pub condition: Condition,
    pub dims: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub max_margin: f64,
    pub violations: usize,
}

pub fn parse_dims(text: &str) -> Result<HilbertDims> {
    let dims = text
        .split(',')
        .map(|w| {
            w.trim()
                .parse::<usize>()
                .map_err(|_| GmeError::Parse(format!("bad dimension `{w}` in `{text}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    HilbertDims::new(dims)
}

/// Random biseparable states with random rank-one local operators.
///
/// Trial `k` uses stream `k` of a ChaCha8 generator seeded with `seed`.
pub fn soundness_check(
    witness: &Witness,
    dims: &HilbertDims,
    trials: usize,
    mixture_size: usize,
    seed: u64,
) -> Result<SoundnessSummary> {
    if trials == 0 {
        return Err(GmeError::Validation("trials must be at least 1".into()));
    }
    let partitions = witness.sound_against(dims.parties());
    let margins = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let rho = random_biseparable_with(dims, &partitions, mixture_size, &mut rng)?;
            let ops = random_rank_one_ops(dims, &mut rng);
            Ok(witness.evaluate(&rho, &ops)?.margin)
        })
        .collect::<Result<Vec<f64>>>()?;
    let tol = witness.evaluator.tolerance;
    Ok(SoundnessSummary {
        condition: witness.condition,
        dims: dims.as_slice().to_vec(),
        trials,
        seed,
        max_margin: margins.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        violations: margins.iter().filter(|&&m| m > tol).count(),
    })
}

fn cmd_soundness(a: &SoundnessArgs, tolerance: f64, out: &mut impl Write) -> Result<i32> {
    let dims = match &a.dims {
        Some(text) => parse_dims(text)?,
        None => HilbertDims::uniform(a.condition.parties().unwrap_or(2), 2)?,
    };
    let w = build_witness(
        a.condition,
        None,
        a.partition.as_deref(),
        dims.parties(),
        tolerance,
    )?;
    let summary = soundness_check(&w, &dims, a.trials, a.mixture_size, a.seed)?;
    print_json(out, &summary)?;
    Ok(if summary.violations > 0 {
        EXIT_SOUNDNESS_FAILURE
    } else {
        EXIT_OK
    })
}

fn cmd_optimize(a: &OptimizeArgs, tolerance: f64, out: &mut impl Write) -> Result<i32> {
    let state = read_state_file(&a.state)?.build()?;
    let w = build_witness(
        a.witness.condition,
        a.witness.dagger.as_deref(),
        a.witness.partition.as_deref(),
        state.dims().parties(),
        tolerance,
    )?;
    let result = optimizer::optimize(&state, &w, a.restarts, a.budget, a.seed)?;
    print_json(out, &result)?;
    Ok(if result.best_report.violated {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_partition_labels() {
        assert_eq!(l_sites_from_label(4, "ab|cd").unwrap(), vec![0, 1]);
        assert_eq!(l_sites_from_label(3, "c|ab").unwrap(), vec![2]);
        assert_eq!(l_sites_from_label(3, "0|12").unwrap(), vec![0]);
        assert!(l_sites_from_label(3, "abc|").is_err());
    }

    #[test]
    fn parses_dims() {
        assert_eq!(parse_dims("2, 3,2").unwrap().as_slice(), &[2, 3, 2]);
        assert!(parse_dims("2,x").is_err());
        assert!(parse_dims("2,1").is_err());
    }

    #[test]
    fn clap_surface() {
        let cli = Cli::try_parse_from([
            "gme",
            "downconv",
            "--N",
            "2",
            "--t-stop",
            "0.5",
            "--tolerance",
            "1e-9",
        ])
        .unwrap();
        assert_eq!(cli.tolerance, 1e-9);
        let Command::Downconv(a) = cli.command else {
            panic!()
        };
        assert_eq!(a.photons, 2);
        assert!(Cli::try_parse_from(["gme", "evaluate", "--condition", "nope"]).is_err());
        let cli = Cli::try_parse_from([
            "gme",
            "soundness",
            "--condition",
            "quad-dagger",
            "--trials",
            "5",
        ])
        .unwrap();
        assert!(matches!(cli.command, Command::Soundness(_)));
    }

    #[test]
    fn soundness_rejects_zero_trials() {
        let w = Witness::new(Condition::TriDagger);
        assert!(soundness_check(&w, &HilbertDims::uniform(3, 2).unwrap(), 0, 4, 0).is_err());
        let s = soundness_check(&w, &HilbertDims::uniform(3, 2).unwrap(), 20, 4, 0).unwrap();
        assert_eq!(s.violations, 0);
        assert_eq!(
            s,
            soundness_check(&w, &HilbertDims::uniform(3, 2).unwrap(), 20, 4, 0).unwrap()
        );
    }
}
