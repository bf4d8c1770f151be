//! The `upconv` command line.
//!
//! Exit codes: 0 success, 1 usage, 2 planning infeasible (including LO
//! outside a mixer's range), 3 config or file format, 4 I/O, 5 filter
//! synthesis, 6 any other computation error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::chain::{
    calibrate, iq_image_rejection, iq_phase_for_rejection, plan, sweep_dbc, CalibratedDefaults,
    CalibrationTargets, ChainConfig, Plan, PlanConstraints, Sideband, Stage,
};
use crate::error::{Error, Result};
use crate::microstrip::{
    analyze_parallel_coupled, line_parameters, manufacturability_check,
    synthesize_parallel_coupled, width_for_impedance, CoupledFilterSpec, ParallelCoupledGeometry,
    Substrate,
};
use crate::qubit::{
    fit_decaying_cosine, fit_lorentzian, fit_sinusoid, rabi_sweep, ramsey_sweep, resonant_drive,
    spectroscopy_sweep, FitResult, QubitSpec,
};
use crate::responses::{linear_grid, parse_touchstone, passband_metrics, write_touchstone, Family};
use crate::spectra::{Spectrum, Tone};
use crate::units::{format_sig, parse_frequency, Level};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PLANNING: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_SYNTHESIS: i32 = 5;
pub const EXIT_COMPUTATION: i32 = 6;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Planning(_) | Error::RangeViolation { .. } => EXIT_PLANNING,
        Error::Config(_) | Error::Parse { .. } => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        Error::Synthesis { .. } => EXIT_SYNTHESIS,
        Error::InvalidArgument(_)
        | Error::NoPassband(_)
        | Error::ToneNotFound { .. }
        | Error::InvalidChain(_) => EXIT_COMPUTATION,
    }
}

fn hz(text: &str) -> std::result::Result<f64, String> {
    parse_frequency(text).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "upconv",
    version,
    about = "Double-upconversion chain planning, spur analysis, microstrip filters and qubit drive simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Choose LO1 and LO2 for a target output frequency (JSON out).
    Plan(PlanArgs),
    /// Propagate the IF tone through a chain (spectrum CSV out).
    Simulate(SimulateArgs),
    /// LO2 suppression (dBc) across a range of targets (CSV out).
    SweepDbc(SweepArgs),
    /// Synthesize a parallel-coupled microstrip filter (geometry JSON out).
    SynthFilter(SynthArgs),
    /// Simulate a parallel-coupled geometry (passband metrics JSON out).
    AnalyzeFilter(AnalyzeFilterArgs),
    /// Passband metrics of a measured two-port Touchstone file.
    AnalyzeS2p(AnalyzeS2pArgs),
    /// Microstrip line impedance for a width, or width for an impedance.
    Line(LineArgs),
    /// Image rejection of a quadrature (IQ) upconverter.
    Iq(IqArgs),
    /// Simulated qubit experiments (x,population CSV out).
    Qubit {
        #[command(subcommand)]
        experiment: QubitCommand,
    },
    /// Refit the calibrated mixer and filter defaults (slow).
    Calibrate(CalibrateArgs),
    /// Print a built-in chain config.
    Preset {
        #[arg(value_enum)]
        name: PresetName,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetName {
    /// Unshielded board with both leakage paths.
    Benchmark,
    /// Leakage cut, extra stage-1 filtering.
    Shielded,
}

impl PresetName {
    fn config(self) -> ChainConfig {
        match self {
            PresetName::Benchmark => CalibratedDefaults::FROZEN.benchmark_config(),
            PresetName::Shielded => CalibratedDefaults::FROZEN.shielded_config(),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SidebandArg {
    Lower,
    Upper,
}

impl From<SidebandArg> for Sideband {
    fn from(s: SidebandArg) -> Self {
        match s {
            SidebandArg::Lower => Sideband::Lower,
            SidebandArg::Upper => Sideband::Upper,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Butterworth,
    Chebyshev,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Butterworth => Family::Butterworth,
            FamilyArg::Chebyshev => Family::Chebyshev,
        }
    }
}

/// A chain config from a file or a preset, with flag overrides.
#[derive(Debug, Args)]
struct ChainArgs {
    /// Chain config JSON.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<PresetName>,
    #[arg(long, value_parser = hz)]
    if_hz: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    if_dbm: Option<f64>,
    #[arg(long, value_parser = hz)]
    lo1_hz: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lo1_dbm: Option<f64>,
    #[arg(long, value_parser = hz)]
    lo2_hz: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lo2_dbm: Option<f64>,
    /// Highest |m|+|n| mixing order kept.
    #[arg(long)]
    max_order: Option<u32>,
}

impl ChainArgs {
    fn load(&self) -> Result<ChainConfig> {
        let mut cfg = match (&self.config, self.preset) {
            (Some(path), _) => ChainConfig::from_path(path)?,
            (None, Some(p)) => p.config(),
            (None, None) => return Err(Error::Config("need --config or --preset".into())),
        };
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut cfg.if_hz, self.if_hz);
        set(&mut cfg.if_dbm, self.if_dbm);
        set(&mut cfg.lo1_hz, self.lo1_hz);
        set(&mut cfg.lo1_dbm, self.lo1_dbm);
        set(&mut cfg.lo2_hz, self.lo2_hz);
        set(&mut cfg.lo2_dbm, self.lo2_dbm);
        if let Some(m) = self.max_order {
            cfg.max_order = m;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct PlanArgs {
    #[arg(long, value_parser = hz, required_unless_present = "targets_file")]
    target_hz: Option<f64>,
    /// One target per line; blank lines and `#` comments ignored. Prints a JSON array.
    #[arg(long, conflicts_with = "target_hz")]
    targets_file: Option<PathBuf>,
    /// Take constraints from this chain config instead of the benchmark preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Single IF; shorthand for equal --if-low-hz and --if-high-hz.
    #[arg(long, value_parser = hz)]
    if_hz: Option<f64>,
    #[arg(long, value_parser = hz)]
    if_low_hz: Option<f64>,
    #[arg(long, value_parser = hz)]
    if_high_hz: Option<f64>,
    #[arg(long, value_parser = hz)]
    stage1_low_hz: Option<f64>,
    #[arg(long, value_parser = hz)]
    stage1_high_hz: Option<f64>,
    #[arg(long, value_parser = hz)]
    stage2_low_hz: Option<f64>,
    #[arg(long, value_parser = hz)]
    stage2_high_hz: Option<f64>,
    #[arg(long, value_parser = hz)]
    lo1_min_hz: Option<f64>,
    #[arg(long, value_parser = hz)]
    lo1_max_hz: Option<f64>,
    #[arg(long, value_parser = hz)]
    lo2_min_hz: Option<f64>,
    #[arg(long, value_parser = hz)]
    lo2_max_hz: Option<f64>,
    #[arg(long, value_enum)]
    stage1_sideband: Option<SidebandArg>,
    #[arg(long, value_enum)]
    stage2_sideband: Option<SidebandArg>,
}

impl PlanArgs {
    fn constraints(&self) -> Result<PlanConstraints> {
        let mut c = match &self.config {
            Some(path) => ChainConfig::from_path(path)?.constraints()?,
            None => CalibratedDefaults::FROZEN
                .benchmark_config()
                .constraints()?,
        };
        if let Some(f) = self.if_hz {
            c.if_range = (f, f);
        }
        let pairs = [
            (&mut c.if_range, self.if_low_hz, self.if_high_hz),
            (
                &mut c.stage1_passband,
                self.stage1_low_hz,
                self.stage1_high_hz,
            ),
            (
                &mut c.stage2_passband,
                self.stage2_low_hz,
                self.stage2_high_hz,
            ),
            (&mut c.mixer1_lo_range, self.lo1_min_hz, self.lo1_max_hz),
            (&mut c.mixer2_lo_range, self.lo2_min_hz, self.lo2_max_hz),
        ];
        for (range, lo, hi) in pairs {
            if let Some(lo) = lo {
                range.0 = lo;
            }
            if let Some(hi) = hi {
                range.1 = hi;
            }
        }
        if let Some(s) = self.stage1_sideband {
            c.stage1_sideband = s.into();
        }
        if let Some(s) = self.stage2_sideband {
            c.stage2_sideband = s.into();
        }
        Ok(c)
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    chain: ChainArgs,
    /// Re-plan LO2 for this output frequency first.
    #[arg(long, value_parser = hz)]
    target_hz: Option<f64>,
    /// 1: after the stage-1 filter; 2: chain output (default).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    stage: Option<u8>,
    /// Write one CSV per chain element here instead of printing.
    #[arg(long, conflicts_with = "stage")]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long, value_parser = hz, default_value = "4.5GHz")]
    start_hz: f64,
    #[arg(long, value_parser = hz, default_value = "7GHz")]
    stop_hz: f64,
    #[arg(long, value_parser = hz, default_value = "50MHz")]
    step_hz: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SubstrateArgs {
    #[arg(long, default_value_t = 4.35)]
    eps_r: f64,
    #[arg(long, default_value_t = 1.6)]
    height_mm: f64,
}

impl SubstrateArgs {
    fn substrate(&self) -> Result<Substrate> {
        Substrate::new(self.eps_r, self.height_mm * 1e-3)
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Filter spec JSON; flags override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long)]
    order: Option<u32>,
    #[arg(long)]
    ripple_db: Option<f64>,
    #[arg(long, value_parser = hz)]
    f_low_hz: Option<f64>,
    #[arg(long, value_parser = hz)]
    f_high_hz: Option<f64>,
    #[arg(long)]
    z0: Option<f64>,
    #[command(flatten)]
    substrate: SubstrateArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SynthArgs {
    fn spec(&self) -> Result<CoupledFilterSpec> {
        let mut spec = match &self.spec {
            Some(path) => {
                serde_json::from_str(&read(path)?).map_err(|e| Error::Config(e.to_string()))?
            }
            None => {
                let (Some(lo), Some(hi)) = (self.f_low_hz, self.f_high_hz) else {
                    return Err(Error::Config(
                        "need --spec or both --f-low-hz and --f-high-hz".into(),
                    ));
                };
                CoupledFilterSpec::butterworth(5, lo, hi)
            }
        };
        if let Some(f) = self.family {
            spec.family = f.into();
        }
        if let Some(n) = self.order {
            spec.order = n;
        }
        if self.ripple_db.is_some() {
            spec.ripple_db = self.ripple_db;
        }
        if let Some(f) = self.f_low_hz {
            spec.f_low_hz = f;
        }
        if let Some(f) = self.f_high_hz {
            spec.f_high_hz = f;
        }
        if let Some(z) = self.z0 {
            spec.z0 = z;
        }
        Ok(spec)
    }
}

#[derive(Debug, Args)]
struct AnalyzeFilterArgs {
    /// Geometry JSON as written by `synth-filter`.
    #[arg(
        long,
        required_unless_present = "table_two",
        conflicts_with = "table_two"
    )]
    geometry: Option<PathBuf>,
    /// Use the fabricated stage-2 filter dimensions.
    #[arg(long)]
    table_two: bool,
    #[arg(long, value_parser = hz, default_value = "1GHz")]
    start_hz: f64,
    #[arg(long, value_parser = hz, default_value = "12GHz")]
    stop_hz: f64,
    #[arg(long, value_parser = hz, default_value = "10MHz")]
    step_hz: f64,
    /// Drop from the peak that defines the band edges.
    #[arg(long, default_value_t = 3.0)]
    edge_db: f64,
    /// Also write the simulated S21 as Touchstone.
    #[arg(long)]
    s2p: Option<PathBuf>,
    /// Also write `frequency_hz,s21_db` rows.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeS2pArgs {
    path: PathBuf,
    #[arg(long, default_value_t = 3.0)]
    edge_db: f64,
}

#[derive(Debug, Args)]
struct LineArgs {
    #[arg(long, required_unless_present = "z0", conflicts_with = "z0")]
    width_mm: Option<f64>,
    /// Target impedance; prints the width that realizes it.
    #[arg(long)]
    z0: Option<f64>,
    #[command(flatten)]
    substrate: SubstrateArgs,
}

#[derive(Debug, Args)]
struct IqArgs {
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    imbalance_db: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    phase_deg: f64,
    /// Also report the phase error that gives this rejection.
    #[arg(long)]
    target_db: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum QubitCommand {
    /// Population vs drive amplitude at a fixed pulse length.
    Rabi(RabiArgs),
    /// Ideal Ramsey fringe vs wait time.
    Ramsey(RamseyArgs),
    /// Population vs chain output frequency under weak continuous drive.
    Spectroscopy(SpectroscopyArgs),
}

#[derive(Debug, Args)]
struct QubitArgs {
    #[arg(long, value_parser = hz, default_value = "5.61GHz")]
    f_qubit_hz: f64,
    /// Rabi frequency in MHz for 1 V peak drive (a 10 dBm tone) at amplitude 1.
    #[arg(long, default_value_t = 10.0)]
    rabi_mhz: f64,
    /// Omit for no relaxation (spectroscopy defaults to 1 us).
    #[arg(long)]
    t1_us: Option<f64>,
    /// Omit for no dephasing (spectroscopy defaults to 1 us).
    #[arg(long)]
    t2_us: Option<f64>,
    /// Gaussian readout noise added to each population.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the fit report JSON here.
    #[arg(long)]
    fit: Option<PathBuf>,
}

impl QubitArgs {
    fn qubit(&self, default_t_us: f64) -> Result<QubitSpec> {
        let us = |v: Option<f64>| v.unwrap_or(default_t_us) * 1e-6;
        QubitSpec::new(
            self.f_qubit_hz,
            us(self.t1_us),
            us(self.t2_us),
            2.0 * std::f64::consts::PI * self.rabi_mhz * 1e6,
        )
    }
}

#[derive(Debug, Args)]
struct RabiArgs {
    #[command(flatten)]
    qubit: QubitArgs,
    #[arg(long, default_value_t = 50.0)]
    duration_ns: f64,
    #[arg(long, default_value_t = 2.0)]
    amp_max: f64,
    #[arg(long, default_value_t = 41)]
    points: usize,
    /// Add a spur this many dB below the drive.
    #[arg(long)]
    spur_dbc: Option<f64>,
    #[arg(long, value_parser = hz, default_value = "5MHz", allow_negative_numbers = true)]
    spur_offset_hz: f64,
}

#[derive(Debug, Args)]
struct RamseyArgs {
    #[command(flatten)]
    qubit: QubitArgs,
    #[arg(long, value_parser = hz, default_value = "2MHz", allow_negative_numbers = true)]
    detuning_hz: f64,
    #[arg(long, default_value_t = 2000.0)]
    max_wait_ns: f64,
    #[arg(long, default_value_t = 201)]
    points: usize,
}

#[derive(Debug, Args)]
struct SpectroscopyArgs {
    #[command(flatten)]
    qubit: QubitArgs,
    #[command(flatten)]
    chain: ChainArgs,
    /// Defaults to the qubit frequency minus 2 MHz.
    #[arg(long, value_parser = hz)]
    start_hz: Option<f64>,
    /// Defaults to the qubit frequency plus 2 MHz.
    #[arg(long, value_parser = hz)]
    stop_hz: Option<f64>,
    #[arg(long, value_parser = hz, default_value = "50kHz")]
    step_hz: f64,
    #[arg(long, default_value_t = 10.0)]
    duration_us: f64,
    /// Kept small so the line is not power broadened.
    #[arg(long, default_value_t = 0.1)]
    amplitude: f64,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Write benchmark.json and shielded.json for the fitted values here.
    #[arg(long)]
    write_configs: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match command {
        Command::Plan(a) => cmd_plan(&a, out),
        Command::Simulate(a) => cmd_simulate(&a, out, err),
        Command::SweepDbc(a) => cmd_sweep_dbc(&a, out, err),
        Command::SynthFilter(a) => cmd_synth_filter(&a, out, err),
        Command::AnalyzeFilter(a) => cmd_analyze_filter(&a, out),
        Command::AnalyzeS2p(a) => {
            let response = parse_touchstone(&read(&a.path)?)?;
            writeln!(out, "{}", passband_metrics(&response, a.edge_db)?.to_json())?;
            Ok(())
        }
        Command::Line(a) => cmd_line(&a, out),
        Command::Iq(a) => cmd_iq(&a, out),
        Command::Qubit { experiment } => match experiment {
            QubitCommand::Rabi(a) => cmd_rabi(&a, out),
            QubitCommand::Ramsey(a) => cmd_ramsey(&a, out),
            QubitCommand::Spectroscopy(a) => cmd_spectroscopy(&a, out, err),
        },
        Command::Calibrate(a) => {
            let d = calibrate(&CalibrationTargets::default())?;
            if let Some(dir) = &a.write_configs {
                std::fs::create_dir_all(dir)?;
                write_file(
                    &dir.join("benchmark.json"),
                    &(d.benchmark_config().to_json() + "\n"),
                )?;
                write_file(
                    &dir.join("shielded.json"),
                    &(d.shielded_config().to_json() + "\n"),
                )?;
            }
            writeln!(out, "{}", json(&d))?;
            Ok(())
        }
        Command::Preset { name } => {
            writeln!(out, "{}", name.config().to_json())?;
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

fn cmd_plan(a: &PlanArgs, out: &mut dyn Write) -> Result<()> {
    let c = a.constraints()?;
    match (&a.targets_file, a.target_hz) {
        (Some(path), _) => {
            let plans = read(path)?
                .lines()
                .enumerate()
                .map(|(i, line)| (i, line.split('#').next().unwrap_or("").trim().to_owned()))
                .filter(|(_, t)| !t.is_empty())
                .map(|(i, t)| {
                    let f = parse_frequency(&t).map_err(|e| Error::Parse {
                        line: i + 1,
                        message: e.to_string(),
                    })?;
                    plan(f, &c).map_err(|e| match e {
                        Error::Planning(m) => Error::Planning(format!("line {}: {m}", i + 1)),
                        other => other,
                    })
                })
                .collect::<Result<Vec<Plan>>>()?;
            writeln!(out, "{}", json(&plans))?;
        }
        (None, Some(f)) => writeln!(out, "{}", json(&plan(f, &c)?))?,
        (None, None) => return Err(Error::Config("need --target-hz or --targets-file".into())),
    }
    Ok(())
}

fn stage_names(cfg: &ChainConfig) -> Result<Vec<String>> {
    let (mut mixers, mut filters) = (0, 0);
    Ok(cfg
        .build()?
        .stages()
        .iter()
        .map(|s| match s {
            Stage::Mixer { .. } => {
                mixers += 1;
                format!("mixer{mixers}")
            }
            Stage::Filter { .. } => {
                filters += 1;
                format!("filter{filters}")
            }
            Stage::Attenuator { .. } => "attenuator".into(),
            Stage::Leakage { .. } => "leakage".into(),
        })
        .collect())
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut cfg = a.chain.load()?;
    if let Some(t) = a.target_hz {
        cfg = cfg.retarget(t)?.0;
    }
    let outputs = cfg.simulate()?;
    let names = stage_names(&cfg)?;
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir)?;
        for (i, (spectrum, name)) in outputs.iter().zip(&names).enumerate() {
            let path = dir.join(format!("{}_{name}.csv", i + 1));
            write_file(&path, &spectrum.to_csv_string())?;
            writeln!(err, "wrote {}", path.display())?;
        }
        return Ok(());
    }
    let index = match a.stage {
        Some(1) => names
            .iter()
            .position(|n| n == "filter1")
            .ok_or_else(|| Error::InvalidChain("no stage-1 filter".into()))?,
        _ => outputs.len() - 1,
    };
    outputs[index].write_csv(out)
}

fn level_text(l: Level) -> String {
    match l {
        Level::Finite(v) => format!("{v:.6}"),
        Level::Unbounded => "inf".into(),
    }
}

fn cmd_sweep_dbc(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cfg = a.chain.load()?;
    let targets = linear_grid(a.start_hz, a.stop_hz, a.step_hz);
    if targets.is_empty() {
        return Err(Error::InvalidArgument("empty target range".into()));
    }
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["target_hz", "dbc_db", "lo2_hz", "error"])?;
        for p in sweep_dbc(&cfg, &targets) {
            let row = match &p.result {
                Ok((level, lo2)) => [
                    p.target_hz.to_string(),
                    level_text(*level),
                    lo2.to_string(),
                    String::new(),
                ],
                Err(e) => {
                    writeln!(err, "warning: {} Hz: {e}", p.target_hz)?;
                    [
                        p.target_hz.to_string(),
                        String::new(),
                        String::new(),
                        e.to_string(),
                    ]
                }
            };
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    emit(a.out.as_deref(), &buf, out)
}

fn emit(path: Option<&Path>, bytes: &[u8], out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => Ok(out.write_all(bytes)?),
    }
}

fn cmd_synth_filter(a: &SynthArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let spec = a.spec()?;
    let geometry = synthesize_parallel_coupled(&spec, &a.substrate.substrate()?)?;
    for v in manufacturability_check(&geometry) {
        writeln!(err, "warning: below minimum feature size: {v}")?;
    }
    emit(
        a.out.as_deref(),
        (geometry.to_json() + "\n").as_bytes(),
        out,
    )
}

fn cmd_analyze_filter(a: &AnalyzeFilterArgs, out: &mut dyn Write) -> Result<()> {
    let geometry = match &a.geometry {
        Some(path) => serde_json::from_str::<ParallelCoupledGeometry>(&read(path)?)
            .map_err(|e| Error::Config(e.to_string()))?,
        None => ParallelCoupledGeometry::table_two(),
    };
    let grid = linear_grid(a.start_hz, a.stop_hz, a.step_hz);
    let response = analyze_parallel_coupled(&geometry, &grid)?;
    if let Some(path) = &a.s2p {
        write_file(path, &write_touchstone(&response))?;
    }
    if let Some(path) = &a.csv {
        let mut buf = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(["frequency_hz", "s21_db"])?;
            for (f, s21) in response.points() {
                w.write_record([format_sig(*f, 9), format_sig(*s21, 9)])?;
            }
            w.flush()?;
        }
        emit(Some(path), &buf, out)?;
    }
    writeln!(out, "{}", passband_metrics(&response, a.edge_db)?.to_json())?;
    Ok(())
}

#[derive(Serialize)]
struct LineReport {
    width_m: f64,
    z0_ohm: f64,
    eps_eff: f64,
}

fn cmd_line(a: &LineArgs, out: &mut dyn Write) -> Result<()> {
    let substrate = a.substrate.substrate()?;
    let width_m = match (a.width_mm, a.z0) {
        (Some(w), _) => w * 1e-3,
        (None, Some(z)) => width_for_impedance(z, &substrate)?,
        (None, None) => return Err(Error::Config("need --width-mm or --z0".into())),
    };
    if !(width_m > 0.0 && width_m.is_finite()) {
        return Err(Error::InvalidArgument("width must be positive".into()));
    }
    let p = line_parameters(width_m, &substrate);
    let report = LineReport {
        width_m,
        z0_ohm: p.z0,
        eps_eff: p.eps_eff,
    };
    writeln!(out, "{}", json(&report))?;
    Ok(())
}

#[derive(Serialize)]
struct IqReport {
    /// `null` for perfect balance.
    image_rejection_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phase_for_target_deg: Option<Option<f64>>,
}

fn cmd_iq(a: &IqArgs, out: &mut dyn Write) -> Result<()> {
    let report = IqReport {
        image_rejection_db: iq_image_rejection(a.imbalance_db, a.phase_deg).finite(),
        phase_for_target_deg: a
            .target_db
            .map(|t| iq_phase_for_rejection(t, a.imbalance_db))
            .transpose()?,
    };
    writeln!(out, "{}", json(&report))?;
    Ok(())
}

fn add_noise(values: &mut [f64], sigma: f64, seed: u64) -> Result<()> {
    if sigma == 0.0 {
        return Ok(());
    }
    let normal =
        Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(format!("noise: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in values {
        *v += normal.sample(&mut rng);
    }
    Ok(())
}

// Writes the `x,population` CSV and, if asked, the fit report.
fn report(
    q: &QubitArgs,
    x: &[f64],
    mut y: Vec<f64>,
    fit: impl Fn(&[f64], &[f64]) -> Result<FitResult>,
    out: &mut dyn Write,
) -> Result<()> {
    add_noise(&mut y, q.noise, q.seed)?;
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["x", "population"])?;
        for (xi, yi) in x.iter().zip(&y) {
            w.write_record([xi.to_string(), yi.to_string()])?;
        }
        w.flush()?;
    }
    emit(q.out.as_deref(), &buf, out)?;
    if let Some(path) = &q.fit {
        write_file(path, &(fit(x, &y)?.to_json() + "\n"))?;
    }
    Ok(())
}

fn points(start: f64, stop: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 points".into()));
    }
    Ok((0..n)
        .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
        .collect())
}

fn cmd_rabi(a: &RabiArgs, out: &mut dyn Write) -> Result<()> {
    let q = a.qubit.qubit(f64::INFINITY)?;
    let mut drive = resonant_drive(&q);
    if let Some(dbc) = a.spur_dbc {
        let spur = Tone::new(q.f_qubit_hz + a.spur_offset_hz, 10.0 - dbc, "spur")?;
        drive = drive.combine(&Spectrum::single(spur));
    }
    let amplitudes = points(0.0, a.amp_max, a.points)?;
    let y = rabi_sweep(&q, &drive, &amplitudes, a.duration_ns * 1e-9)?;
    report(&a.qubit, &amplitudes, y, fit_sinusoid, out)
}

fn cmd_ramsey(a: &RamseyArgs, out: &mut dyn Write) -> Result<()> {
    let q = a.qubit.qubit(f64::INFINITY)?;
    let waits = points(0.0, a.max_wait_ns * 1e-9, a.points)?;
    let y = ramsey_sweep(&q, a.detuning_hz, &waits)?;
    report(&a.qubit, &waits, y, fit_decaying_cosine, out)
}

fn cmd_spectroscopy(a: &SpectroscopyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let q = a.qubit.qubit(1.0)?;
    let cfg = a.chain.load()?;
    let start = a.start_hz.unwrap_or(q.f_qubit_hz - 2e6);
    let stop = a.stop_hz.unwrap_or(q.f_qubit_hz + 2e6);
    let targets = linear_grid(start, stop, a.step_hz);
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for p in spectroscopy_sweep(&q, &cfg, &targets, a.duration_us * 1e-6, a.amplitude) {
        match p.population {
            Ok(v) => {
                x.push(p.target_hz);
                y.push(v);
            }
            Err(e) => writeln!(err, "warning: skipped {} Hz: {e}", p.target_hz)?,
        }
    }
    if x.is_empty() {
        return Err(Error::Planning(
            "no target in the sweep could be planned".into(),
        ));
    }
    report(&a.qubit, &x, y, fit_lorentzian, out)
}
