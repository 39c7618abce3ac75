//! Monte Carlo experiments.
//!
//! Every iteration gets its own stream derived from
//! `(master seed, sweep kind, axis index, iteration)`, so rows do not depend on
//! how iterations are spread over worker threads.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::entanglement::{apply_noise, check_players, sample_outcome, NoisePreset, NoiseSpec};
use crate::error::{Error, Result};
use crate::numfmt::significant;
use crate::protocol::{run_protocol, ProtocolConfig};
use crate::rng::derived;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepKind {
    StateHistogram,
    NoiseSweep,
    TraitorSweep,
    SizeSweep,
    ShotsSweep,
}

impl SweepKind {
    pub const NAMES: &'static str = "histogram, noise, traitors, size, shots";

    pub fn name(self) -> &'static str {
        match self {
            Self::StateHistogram => "histogram",
            Self::NoiseSweep => "noise",
            Self::TraitorSweep => "traitors",
            Self::SizeSweep => "size",
            Self::ShotsSweep => "shots",
        }
    }

    pub fn axis_name(self) -> &'static str {
        match self {
            Self::StateHistogram => "pattern",
            Self::NoiseSweep => "p",
            Self::TraitorSweep => "m",
            Self::SizeSweep => "n",
            Self::ShotsSweep => "k",
        }
    }

    fn tag(self) -> u64 {
        match self {
            Self::StateHistogram => 1,
            Self::NoiseSweep => 2,
            Self::TraitorSweep => 3,
            Self::SizeSweep => 4,
            Self::ShotsSweep => 5,
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "histogram" => Self::StateHistogram,
            "noise" => Self::NoiseSweep,
            "traitors" => Self::TraitorSweep,
            "size" => Self::SizeSweep,
            "shots" => Self::ShotsSweep,
            _ => return Err(Error::UnknownName { name: s.to_string(), expected: Self::NAMES }),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub base: ProtocolConfig,
    pub axis: Vec<f64>,
    pub iterations: usize,
    pub master_seed: u64,
}

impl SweepSpec {
    /// Spec with the default axis for `kind`.
    pub fn new(kind: SweepKind, base: ProtocolConfig, iterations: usize, master_seed: u64) -> Self {
        let axis = default_axis(kind, &base, 101);
        Self { kind, base, axis, iterations, master_seed }
    }

    /// Configuration used at one axis value.
    pub fn point_config(&self, value: f64) -> Result<ProtocolConfig> {
        let mut config = self.base.clone();
        let as_count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::invalid(format!("axis value {v} must be a nonnegative integer")))
            }
        };
        match self.kind {
            SweepKind::NoiseSweep => config.noise = NoiseSpec::custom(value)?,
            SweepKind::TraitorSweep => config.traitors = as_count(value)?,
            SweepKind::SizeSweep => config.players = as_count(value)?,
            SweepKind::ShotsSweep => config.shots = as_count(value)?,
            SweepKind::StateHistogram => {
                return Err(Error::invalid("histograms are produced by state_histogram, not run_sweep"));
            }
        }
        config.validate()?;
        Ok(config)
    }
}

/// Default axis: `points` evenly spaced flip probabilities on `[0, 1]`,
/// `m ∈ [0, n]`, `n ∈ [3, 6]`, or `k` in decades from 100 to 10⁶.
pub fn default_axis(kind: SweepKind, base: &ProtocolConfig, points: usize) -> Vec<f64> {
    match kind {
        SweepKind::NoiseSweep => match points {
            0 => Vec::new(),
            1 => vec![0.0],
            _ => (0..points).map(|i| i as f64 / (points - 1) as f64).collect(),
        },
        SweepKind::TraitorSweep => (0..=base.players).map(|m| m as f64).collect(),
        SweepKind::SizeSweep => (3..=6).map(|n| n as f64).collect(),
        SweepKind::ShotsSweep => [1e2, 1e3, 1e4, 1e5, 1e6].to_vec(),
        SweepKind::StateHistogram => Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_kind: SweepKind,
    pub axis_value: f64,
    pub n: usize,
    pub m: usize,
    pub commander_traitor: Option<bool>,
    pub preset: NoisePreset,
    pub p: f64,
    pub k: usize,
    pub l: usize,
    pub iterations: usize,
    pub successes: usize,
    pub degenerates: usize,
    pub p_dba: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub master_seed: u64,
}

pub const SWEEP_COLUMNS: [&str; 17] = [
    "sweep_kind",
    "axis_name",
    "axis_value",
    "n",
    "m",
    "commander_traitor",
    "preset",
    "p",
    "k",
    "l",
    "iterations",
    "successes",
    "degenerates",
    "p_dba",
    "ci_low",
    "ci_high",
    "master_seed",
];

impl SweepRow {
    fn fields(&self) -> [String; 17] {
        let f = |v: f64| significant(v, 10);
        let commander = match self.commander_traitor {
            None => "random".to_string(),
            Some(b) => b.to_string(),
        };
        let axis = match self.sweep_kind {
            SweepKind::NoiseSweep | SweepKind::StateHistogram => f(self.axis_value),
            _ => format!("{}", self.axis_value as u64),
        };
        [
            self.sweep_kind.name().to_string(),
            self.sweep_kind.axis_name().to_string(),
            axis,
            self.n.to_string(),
            self.m.to_string(),
            commander,
            self.preset.name().to_string(),
            f(self.p),
            self.k.to_string(),
            self.l.to_string(),
            self.iterations.to_string(),
            self.successes.to_string(),
            self.degenerates.to_string(),
            f(self.p_dba),
            f(self.ci_low),
            f(self.ci_high),
            self.master_seed.to_string(),
        ]
    }
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let high = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (low, high)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    successes: usize,
    degenerates: usize,
}

impl Tally {
    fn merge(self, other: Tally) -> Tally {
        Tally { successes: self.successes + other.successes, degenerates: self.degenerates + other.degenerates }
    }
}

fn run_iteration(config: &ProtocolConfig, master: u64, coords: [u64; 2], iteration: usize) -> Result<Tally> {
    let mut rng = derived(master, &[coords[0], coords[1], iteration as u64]);
    let result = run_protocol(config, &mut rng)?;
    Ok(Tally { successes: usize::from(result.dba_success), degenerates: usize::from(result.degenerate) })
}

#[cfg(feature = "parallel")]
fn tally_point(config: &ProtocolConfig, iterations: usize, master: u64, coords: [u64; 2]) -> Result<Tally> {
    use rayon::prelude::*;
    (0..iterations)
        .into_par_iter()
        .map(|i| run_iteration(config, master, coords, i))
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
}

#[cfg(not(feature = "parallel"))]
fn tally_point(config: &ProtocolConfig, iterations: usize, master: u64, coords: [u64; 2]) -> Result<Tally> {
    (0..iterations).try_fold(Tally::default(), |acc, i| Ok(acc.merge(run_iteration(config, master, coords, i)?)))
}

fn make_row(kind: SweepKind, axis_value: f64, config: &ProtocolConfig, iterations: usize, tally: Tally, master: u64) -> SweepRow {
    let (ci_low, ci_high) = wilson_interval(tally.successes, iterations);
    SweepRow {
        sweep_kind: kind,
        axis_value,
        n: config.players,
        m: config.traitors,
        commander_traitor: config.pinned_commander_traitor(),
        preset: config.noise.preset_kind(),
        p: config.noise.flip_probability(),
        k: config.shots,
        l: config.game_length(),
        iterations,
        successes: tally.successes,
        degenerates: tally.degenerates,
        p_dba: tally.successes as f64 / iterations as f64,
        ci_low,
        ci_high,
        master_seed: master,
    }
}

fn point(kind: SweepKind, axis_index: usize, axis_value: f64, config: &ProtocolConfig, iterations: usize, master: u64) -> Result<SweepRow> {
    if iterations == 0 {
        return Err(Error::invalid("need at least one iteration"));
    }
    config.validate()?;
    let tally = tally_point(config, iterations, master, [kind.tag(), axis_index as u64])?;
    Ok(make_row(kind, axis_value, config, iterations, tally, master))
}

/// Estimates the agreement probability of one configuration.
///
/// Degenerate runs count in the denominator but never as successes.
pub fn estimate_p_dba(config: &ProtocolConfig, iterations: usize, master_seed: u64) -> Result<SweepRow> {
    point(SweepKind::NoiseSweep, 0, config.noise.flip_probability(), config, iterations, master_seed)
}

/// One row per axis value, in axis order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.axis.is_empty() {
        return Err(Error::invalid("sweep axis is empty"));
    }
    spec.axis
        .iter()
        .enumerate()
        .map(|(i, &v)| point(spec.kind, i, v, &spec.point_config(v)?, spec.iterations, spec.master_seed))
        .collect()
}

/// Runs `f` on a pool of `workers` threads; `None` uses every core.
#[cfg(feature = "parallel")]
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().map_err(|e| Error::invalid(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
pub fn with_workers<T: Send>(_workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    Ok(f())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    /// All bits, commander first.
    pub pattern: String,
    pub frequency: f64,
}

/// Mean per-pattern frequency over `iterations` batches of `samples` noisy draws.
pub fn state_histogram<R: Rng + ?Sized>(
    n: usize,
    noise: &NoiseSpec,
    iterations: usize,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<HistogramRow>> {
    check_players(n)?;
    if iterations == 0 || samples == 0 {
        return Err(Error::invalid("histogram needs at least one iteration and one sample"));
    }
    let mut sums: BTreeMap<String, f64> = BTreeMap::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for _ in 0..iterations {
        counts.clear();
        for _ in 0..samples {
            let pattern = apply_noise(&sample_outcome(n, rng)?, noise, rng);
            *counts.entry(pattern.bit_string()).or_insert(0) += 1;
        }
        for (pattern, &c) in &counts {
            *sums.entry(pattern.clone()).or_insert(0.0) += c as f64 / samples as f64;
        }
    }
    Ok(sums
        .into_iter()
        .map(|(pattern, sum)| HistogramRow { pattern, frequency: sum / iterations as f64 })
        .collect())
}

/// Stream used by the histogram experiment for a given master seed.
pub fn histogram_rng(master_seed: u64) -> crate::rng::SimRng {
    derived(master_seed, &[SweepKind::StateHistogram.tag()])
}

pub fn write_histogram_csv<W: Write>(rows: &[HistogramRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["pattern", "frequency"])?;
    for row in rows {
        w.write_record([row.pattern.clone(), significant(row.frequency, 10)])?;
    }
    w.flush()?;
    Ok(())
}
