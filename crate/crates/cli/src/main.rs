//! `qdba` command-line front end.
//!
//! Exit codes: 0 on success, 1 on runtime or I/O failure, 2 on usage errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use qdba_core::adversary::{CommanderStrategy, LieutenantStrategy};
use qdba_core::entanglement::{
    exact_pmf, exact_pmf_rational, exact_to_f64, games_count, games_max, games_max_bound, joint_ones_probability,
    lieutenant_marginal, traitor_detection_rate, Exact, NoisePreset, NoiseSpec,
};
use qdba_core::harness::{
    default_axis, histogram_rng, run_sweep, state_histogram, with_workers, write_histogram_csv, write_sweep_csv,
    SweepKind, SweepSpec,
};
use qdba_core::protocol::{
    run_seeded, GameLength, Order, ProtocolConfig, RunRecord, TraitorPlacement, DEFAULT_GAME_FRACTION,
};

#[derive(Debug, Parser)]
#[command(name = "qdba", version, about = "Simulate entanglement-assisted detectable Byzantine agreement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute one protocol run and print its record as a JSON line.
    Run(RunArgs),
    /// Run a Monte Carlo sweep and write a CSV dataset.
    Sweep(SweepArgs),
    /// Print the closed-form quantities for n generals.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
struct ProtocolFlags {
    /// Number of generals, commander included.
    #[arg(long = "n", default_value_t = 5)]
    n: usize,
    /// Number of traitors m.
    #[arg(long, default_value_t = 1)]
    traitors: usize,
    /// Put the commander in the traitor set.
    #[arg(long, conflicts_with = "commander_loyal")]
    commander_traitor: bool,
    /// Keep the commander loyal.
    #[arg(long)]
    commander_loyal: bool,
    /// Bit-flip probability; overrides --preset.
    #[arg(long, conflicts_with = "preset")]
    noise: Option<f64>,
    /// Noise preset: noiseless, unmitigated (0.338), dd (0.207), emdd (0.175).
    #[arg(long, default_value = "noiseless")]
    preset: String,
    /// Number of distributed copies k.
    #[arg(long, default_value_t = 1000)]
    shots: usize,
    /// Indices sent per side in each game [default: 0.4·k]
    #[arg(long)]
    game_len: Option<usize>,
    /// Fraction of copies opened for verification.
    #[arg(long, default_value_t = 0.2)]
    verify_frac: f64,
    /// Traitor commander behaviour: half-split, random-assign, all-same-false-indices.
    #[arg(long, default_value = "half-split")]
    strategy_commander: String,
    /// Traitor lieutenant behaviour: opposite-claim, honest.
    #[arg(long, default_value = "opposite-claim")]
    strategy_lieutenant: String,
    /// Order a loyal commander issues: attack, retreat, random.
    #[arg(long, default_value = "random")]
    order: String,
    /// Master seed [default: drawn from system entropy and printed]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    protocol: ProtocolFlags,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Sweep kind: noise, traitors, size, shots, histogram.
    kind: String,
    #[command(flatten)]
    protocol: ProtocolFlags,
    /// Iterations per point (histogram: batches of --samples draws).
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    /// Evenly spaced noise levels on [0, 1] for the noise sweep.
    #[arg(long, default_value_t = 101)]
    points: usize,
    /// Explicit comma-separated axis values [default: p grid, m in 0..=n, n in 3..=6, k in 1e2..1e6]
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    /// Draws per histogram batch.
    #[arg(long, default_value_t = 8192)]
    samples: usize,
    /// Worker threads [default: all cores]
    #[arg(long)]
    workers: Option<usize>,
    /// Output CSV path [default: sweep_<kind>.csv]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Number of generals.
    #[arg(long = "n", default_value_t = 5)]
    n: usize,
    /// Also write the exact outcome distribution as CSV.
    #[arg(long)]
    pmf_csv: Option<PathBuf>,
}

fn usage_error(msg: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::ValueValidation, msg).exit()
}

fn runtime_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random();
        eprintln!("seed: {s}");
        s
    })
}

impl ProtocolFlags {
    fn noise(&self) -> NoiseSpec {
        let spec = match self.noise {
            Some(p) => NoiseSpec::custom(p),
            None => self.preset.parse::<NoisePreset>().and_then(NoiseSpec::preset),
        };
        spec.unwrap_or_else(|e| usage_error(e))
    }

    fn config(&self, seed: u64) -> ProtocolConfig {
        let parse_err = |e: qdba_core::Error| -> ! { usage_error(e) };
        let placement = if self.commander_traitor {
            TraitorPlacement::CommanderTraitor
        } else if self.commander_loyal {
            TraitorPlacement::CommanderLoyal
        } else {
            TraitorPlacement::Random
        };
        let loyal_commander = match self.order.as_str() {
            "random" => CommanderStrategy::LoyalRandom,
            other => CommanderStrategy::LoyalFixed(other.parse::<Order>().unwrap_or_else(|e| parse_err(e))),
        };
        let config = ProtocolConfig {
            players: self.n,
            traitors: self.traitors,
            placement,
            shots: self.shots,
            noise: self.noise(),
            game_length: self.game_len.map_or(GameLength::ShotFraction(DEFAULT_GAME_FRACTION), GameLength::Fixed),
            verify_fraction: self.verify_frac,
            loyal_commander,
            traitor_commander: self.strategy_commander.parse().unwrap_or_else(|e| parse_err(e)),
            traitor_lieutenant: self.strategy_lieutenant.parse::<LieutenantStrategy>().unwrap_or_else(|e| parse_err(e)),
            seed,
        };
        config.validate().unwrap_or_else(|e| usage_error(e));
        config
    }
}

fn cmd_run(args: &RunArgs) -> ExitCode {
    let seed = resolve_seed(args.protocol.seed);
    let config = args.protocol.config(seed);
    match run_seeded(&config) {
        Ok(result) => {
            println!("{}", RunRecord::new(&config, &result).to_json_line());
            ExitCode::SUCCESS
        }
        Err(e) => runtime_error(e),
    }
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new)
}

fn cmd_sweep(args: &SweepArgs) -> ExitCode {
    let kind: SweepKind = args.kind.parse().unwrap_or_else(|e| usage_error(e));
    let seed = resolve_seed(args.protocol.seed);
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(format!("sweep_{}.csv", kind.name())));
    if args.iters == 0 {
        usage_error("--iters must be at least 1");
    }

    let rows = if kind == SweepKind::StateHistogram {
        if args.protocol.n < 3 {
            usage_error(format!("need at least 3 generals, got n = {}", args.protocol.n));
        }
        if args.samples == 0 {
            usage_error("--samples must be at least 1");
        }
        let noise = args.protocol.noise();
        let rows = match state_histogram(args.protocol.n, &noise, args.iters, args.samples, &mut histogram_rng(seed)) {
            Ok(r) => r,
            Err(e) => return runtime_error(e),
        };
        let written = create(&out).map_err(|e| e.to_string()).and_then(|f| {
            write_histogram_csv(&rows, f).map_err(|e| e.to_string())
        });
        if let Err(e) = written {
            return runtime_error(format!("cannot write {}: {e}", out.display()));
        }
        rows.len()
    } else {
        let base = args.protocol.config(seed);
        let axis = args.values.clone().unwrap_or_else(|| default_axis(kind, &base, args.points));
        if axis.is_empty() {
            usage_error("sweep axis is empty");
        }
        let spec = SweepSpec { kind, base, axis, iterations: args.iters, master_seed: seed };
        for &v in &spec.axis {
            if let Err(e) = spec.point_config(v) {
                usage_error(format!("axis value {v}: {e}"));
            }
        }
        // open the file first so an unwritable path fails before the long computation
        let file = match create(&out) {
            Ok(f) => f,
            Err(e) => return runtime_error(format!("cannot write {}: {e}", out.display())),
        };
        let rows = match with_workers(args.workers, || run_sweep(&spec)) {
            Ok(Ok(rows)) => rows,
            Ok(Err(e)) | Err(e) => return runtime_error(e),
        };
        if let Err(e) = write_sweep_csv(&rows, file) {
            return runtime_error(format!("cannot write {}: {e}", out.display()));
        }
        rows.len()
    };
    println!("rows: {rows}");
    println!("output: {}", out.display());
    println!("seed: {seed}");
    ExitCode::SUCCESS
}

fn show(r: Exact) -> String {
    format!("{r} ({:.10})", exact_to_f64(r))
}

fn cmd_oracle(args: &OracleArgs) -> ExitCode {
    let n = args.n;
    let pmf = exact_pmf_rational(n).unwrap_or_else(|e| usage_error(e));
    let stdout = io::stdout();
    let mut w = stdout.lock();
    let mut print = || -> io::Result<()> {
        writeln!(w, "n = {n}")?;
        writeln!(w, "R_TD = {}", show(traitor_detection_rate(n).expect("n checked")))?;
        writeln!(w, "P(T=1) = {}", show(lieutenant_marginal(n).expect("n checked")))?;
        writeln!(w, "P(L=1, T=1) = {}", show(joint_ones_probability(n).expect("n checked")))?;
        writeln!(
            w,
            "g_max = {} (bound (n-1)^2/4 = {})",
            games_max(n).expect("n checked"),
            games_max_bound(n).expect("n checked")
        )?;
        writeln!(w, "games g(n, m):")?;
        for m in 0..=n {
            writeln!(w, "  m = {m}: {}", games_count(n, m).expect("m <= n"))?;
        }
        writeln!(w, "pmf:")?;
        for (pattern, p) in &pmf {
            writeln!(w, "  {} {} {}", pattern.commander, pattern.lieutenant_string(), show(*p))?;
        }
        let total: Exact = pmf.iter().map(|(_, p)| *p).sum();
        writeln!(w, "  total {}", show(total))
    };
    if let Err(e) = print() {
        return runtime_error(e);
    }
    if let Some(path) = &args.pmf_csv {
        let pmf = exact_pmf(n).expect("n checked");
        let written = create(path).map_err(|e| e.to_string()).and_then(|f| pmf.write_csv(f).map_err(|e| e.to_string()));
        if let Err(e) = written {
            return runtime_error(format!("cannot write {}: {e}", path.display()));
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Oracle(args) => cmd_oracle(args),
    }
}
