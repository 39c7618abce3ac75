//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report reads top to
//! bottom. Exits non-zero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use qdba_core::entanglement::{
    exact_pmf, exact_pmf_rational, games_count, games_max, joint_ones_probability, lieutenant_marginal,
    sample_outcome, traitor_detection_rate, CommanderSymbol, Exact, JointPmf, NoisePreset, NoiseSpec,
};
use qdba_core::harness::estimate_p_dba;
use qdba_core::protocol::{
    distribute, issue_orders, play_game, run_seeded, verify, GameSide, GeneralId, Loyalty, Order, ProtocolConfig,
    Supply, TraitorPlacement,
};
use qdba_core::rng::seeded;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exact_distribution() -> Check {
    let start = Instant::now();
    for n in 3..=10 {
        let pmf = exact_pmf(n).map_err(|e| e.to_string())?;
        ensure((pmf.total() - 1.0).abs() < 1e-12, || format!("n={n}: total {}", pmf.total()))?;
        let third = Exact::new(1, 3);
        let small = Exact::new(1, 6 * (n as i64 - 1));
        let entries = exact_pmf_rational(n).map_err(|e| e.to_string())?;
        ensure(entries.len() == 2 * n, || format!("n={n}: {} support patterns", entries.len()))?;
        for (pattern, p) in &entries {
            let ones = pattern.lieutenants.iter().filter(|&&b| b).count();
            let want = match pattern.commander {
                CommanderSymbol::C00 if ones == n - 1 => third,
                CommanderSymbol::C11 if ones == 0 => third,
                CommanderSymbol::C01 if ones == 1 => small,
                CommanderSymbol::C10 if ones == n - 2 => small,
                _ => return Err(format!("n={n}: unexpected pattern {pattern:?}")),
            };
            ensure(*p == want, || format!("n={n}: {pattern:?} has {p}, want {want}"))?;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 1.0, || format!("took {elapsed:.3}s"))?;
    Ok(format!("n in 3..=10 exact, {elapsed:.3}s"))
}

fn sampler_fidelity() -> Check {
    let draws = 1_000_000;
    let mut rng = seeded(2024);
    let mut counts = std::collections::HashMap::new();
    for _ in 0..draws {
        *counts.entry(sample_outcome(4, &mut rng).map_err(|e| e.to_string())?).or_insert(0usize) += 1;
    }
    let empirical = JointPmf::from_entries(4, counts.into_iter().map(|(p, c)| (p, c as f64 / draws as f64)));
    let tv = empirical.total_variation(&exact_pmf(4).map_err(|e| e.to_string())?);
    ensure(tv < 0.01, || format!("TV = {tv:.5}"))?;
    Ok(format!("TV = {tv:.5} over 10^6 draws"))
}

fn closed_forms() -> Check {
    for n in 3..=10 {
        let entries = exact_pmf_rational(n).map_err(|e| e.to_string())?;
        let mass = |pred: &dyn Fn(&[bool]) -> bool| -> Exact {
            entries.iter().filter(|(p, _)| pred(&p.lieutenants)).map(|(_, v)| *v).sum()
        };
        let t1 = mass(&|l| l[0]);
        let both = mass(&|l| l[0] && l[1]);
        let rtd = Exact::from_integer(1) - both / t1;
        let nn = n as i64 - 1;
        ensure(t1 == Exact::new(1, 2), || format!("n={n}: P(T=1) = {t1}"))?;
        ensure(both == Exact::new(1, 2) - Exact::new(1, 3 * nn), || format!("n={n}: joint = {both}"))?;
        ensure(rtd == Exact::new(2, 3 * nn), || format!("n={n}: R_TD = {rtd}"))?;
        let err = |e: qdba_core::Error| e.to_string();
        ensure(lieutenant_marginal(n).map_err(err)? == t1, || format!("n={n}: marginal"))?;
        ensure(joint_ones_probability(n).map_err(err)? == both, || format!("n={n}: joint"))?;
        ensure(traitor_detection_rate(n).map_err(err)? == rtd, || format!("n={n}: detection rate"))?;
    }
    Ok("marginal, joint and detection rate exact for n in 3..=10".into())
}

fn empirical_detection_rate() -> Check {
    let n = 5;
    let length = 10_000;
    let mut rng = seeded(7);
    let mut table = distribute(n, 40_000, &NoiseSpec::noiseless(), &mut rng).map_err(|e| e.to_string())?;
    verify(&mut table, 0.2, &mut rng).map_err(|e| e.to_string())?;
    let orders = issue_orders(
        &table,
        GeneralId::commander(Loyalty::Loyal),
        qdba_core::adversary::CommanderStrategy::LoyalFixed(Order::Attack),
        &mut rng,
    )
    .map_err(|e| e.to_string())?;
    let loyal = GameSide {
        general: GeneralId::lieutenant(0, Loyalty::Loyal),
        claim: Order::Attack,
        supply: Supply::Genuine(&orders.received[0].indices),
    };
    let traitor = GameSide {
        general: GeneralId::lieutenant(1, Loyalty::Traitor),
        claim: Order::Retreat,
        supply: Supply::OwnBits,
    };
    let (seen, _) = play_game(&loyal, &traitor, &table, length, &mut rng).map_err(|e| e.to_string())?;
    ensure(seen.length() == length, || format!("only {} indices exchanged", seen.length()))?;
    let rate = seen.failure_rate().unwrap_or(0.0);
    ensure((rate - 1.0 / 6.0).abs() <= 0.01, || format!("failure rate {rate:.4}"))?;
    Ok(format!("failure rate {rate:.4} vs 1/6 over {length} indices"))
}

fn game_count_law() -> Check {
    for n in 3..=7 {
        for m in 0..n {
            let cfg = ProtocolConfig {
                players: n,
                traitors: m,
                placement: TraitorPlacement::CommanderLoyal,
                seed: (n * 10 + m) as u64,
                ..ProtocolConfig::default()
            };
            let r = run_seeded(&cfg).map_err(|e| e.to_string())?;
            let want = games_count(n, m).map_err(|e| e.to_string())?;
            ensure(r.games_played as u64 == want, || format!("n={n} m={m}: {} games, want {want}", r.games_played))?;
        }
    }
    let cfg = ProtocolConfig { placement: TraitorPlacement::CommanderTraitor, seed: 1, ..ProtocolConfig::default() };
    let r = run_seeded(&cfg).map_err(|e| e.to_string())?;
    let gmax = games_max(5).map_err(|e| e.to_string())?;
    ensure(r.games_played == 4 && gmax == 4, || format!("half-split: {} games, g_max {gmax}", r.games_played))?;
    Ok("g = m(n-1-m) for n in 3..=7; half-split n=5 plays 4 = g_max".into())
}

fn trivial_cases() -> Check {
    let start = Instant::now();
    for m in [0, 5, 6] {
        for p in [0.0, 0.1, 0.175, 0.338, 0.5, 0.75, 1.0] {
            let cfg = ProtocolConfig {
                players: 6,
                traitors: m,
                noise: NoiseSpec::custom(p).map_err(|e| e.to_string())?,
                ..ProtocolConfig::default()
            };
            let row = estimate_p_dba(&cfg, 1000, 11).map_err(|e| e.to_string())?;
            ensure(row.p_dba == 1.0, || format!("m={m} p={p}: p_dba = {}", row.p_dba))?;
        }
    }
    Ok(format!("p_dba = 1 for m in {{0, 5, 6}} at 7 noise levels, {:.1}s", start.elapsed().as_secs_f64()))
}

fn noiseless_end_to_end() -> Check {
    let mut worst = 1.0f64;
    for n in 3..=6 {
        let cfg = ProtocolConfig { players: n, ..ProtocolConfig::default() };
        let row = estimate_p_dba(&cfg, 1000, 13).map_err(|e| e.to_string())?;
        ensure(row.p_dba >= 0.99, || format!("n={n}: p_dba = {}", row.p_dba))?;
        worst = worst.min(row.p_dba);
    }
    Ok(format!("lowest p_dba {worst:.3} over n in 3..=6"))
}

fn p_dba_at(p: f64) -> Result<f64, String> {
    let cfg = ProtocolConfig { noise: NoiseSpec::custom(p).map_err(|e| e.to_string())?, ..ProtocolConfig::default() };
    estimate_p_dba(&cfg, 10_000, 4).map(|r| r.p_dba).map_err(|e| e.to_string())
}

fn noise_anchors() -> Check {
    let mut report = Vec::new();
    for (p, target) in [(0.175, 0.909), (0.207, 0.869), (0.338, 0.637)] {
        let got = p_dba_at(p)?;
        ensure((got - target).abs() <= 0.08, || format!("p={p}: {got:.4} vs {target}"))?;
        report.push(format!("{p}={got:.3}"));
    }
    let half = p_dba_at(0.5)?;
    ensure(half > 0.5, || format!("p=0.5: {half:.4}"))?;
    report.push(format!("0.5={half:.3}"));
    for p in [0.1, 0.2, 0.3] {
        let (lo, hi) = (p_dba_at(p)?, p_dba_at(1.0 - p)?);
        ensure((lo - hi).abs() <= 0.03, || format!("reflection at {p}: {lo:.4} vs {hi:.4}"))?;
        report.push(format!("|d({p})|={:.3}", (lo - hi).abs()));
    }
    Ok(report.join(" "))
}

fn shot_convergence() -> Check {
    let iterations = 100;
    let mut points = Vec::new();
    for k in [100, 1000, 10_000] {
        let cfg = ProtocolConfig {
            shots: k,
            noise: NoiseSpec::preset(NoisePreset::EmDd).map_err(|e| e.to_string())?,
            ..ProtocolConfig::default()
        };
        points.push((k, estimate_p_dba(&cfg, iterations, 21).map_err(|e| e.to_string())?.p_dba));
    }
    let top = points[2].1;
    ensure(top >= 0.99, || format!("k=10^4: p_dba = {top}"))?;
    let sd = |p: f64| (p * (1.0 - p) / iterations as f64).sqrt();
    for w in points.windows(2) {
        let ((ka, a), (kb, b)) = (w[0], w[1]);
        let slack = 3.0 * (sd(a).powi(2) + sd(b).powi(2)).sqrt();
        ensure(b >= a - slack, || format!("k={ka}: {a:.3} > k={kb}: {b:.3}"))?;
    }
    Ok(points.iter().map(|(k, p)| format!("k={k}: {p:.3}")).collect::<Vec<_>>().join(", "))
}

fn cli_determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_qdba");
    let invocations: &[&[&str]] = &[
        &["run", "--seed", "17", "--preset", "emdd"],
        &["run", "--seed", "17", "--n", "6", "--traitors", "2", "--noise", "0.3"],
        &["sweep", "noise", "--seed", "5", "--points", "6", "--iters", "50", "--shots", "300"],
        &["sweep", "traitors", "--seed", "5", "--iters", "30", "--shots", "300", "--workers", "2"],
        &["sweep", "histogram", "--seed", "5", "--iters", "3", "--samples", "500", "--preset", "dd"],
        &["oracle", "--n", "6"],
    ];
    let run_once = |dir: &Path, args: &[&str]| -> Result<Vec<u8>, String> {
        let mut cmd = Command::new(bin);
        cmd.args(args).current_dir(dir);
        if args[0] == "sweep" {
            cmd.args(["--out", "out.csv"]);
        }
        if args[0] == "oracle" {
            cmd.args(["--pmf-csv", "out.csv"]);
        }
        let out = cmd.output().map_err(|e| e.to_string())?;
        ensure(out.status.success(), || format!("{args:?} exited with {}", out.status))?;
        let mut bytes = out.stdout;
        if let Ok(file) = std::fs::read(dir.join("out.csv")) {
            bytes.extend(file);
        }
        Ok(bytes)
    };
    for args in invocations {
        let (a, b) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
        let first = run_once(a.path(), args)?;
        let second = run_once(b.path(), args)?;
        ensure(first == second, || format!("{args:?} differs between runs"))?;
    }
    Ok(format!("{} invocations byte-identical", invocations.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("exact distribution", exact_distribution),
        ("sampler fidelity", sampler_fidelity),
        ("closed-form cross-checks", closed_forms),
        ("empirical detection rate", empirical_detection_rate),
        ("game-count law", game_count_law),
        ("trivial cases", trivial_cases),
        ("noiseless end-to-end", noiseless_end_to_end),
        ("noise anchors", noise_anchors),
        ("shot convergence", shot_convergence),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
