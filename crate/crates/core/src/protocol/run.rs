use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::game::{classify, play_game, GameSide, Supply};
use super::orders::{issue_orders, OrderAssignment};
use super::table::{distribute, MIN_COPIES};
use super::verify::verify;
use super::{GeneralId, Loyalty, Order, Verdict};
use crate::adversary::{traitor_claim, CommanderStrategy, LieutenantStrategy};
use crate::entanglement::{check_players, NoiseSpec};
use crate::error::{Error, Result};
use crate::rng::{seeded, SimRng};

pub const DEFAULT_VERIFY_FRACTION: f64 = 0.2;

/// Default game length as a fraction of the copy count. Past this point a
/// traitor's pool of indices to fabricate from is usually exhausted, so longer
/// games stop improving detection.
pub const DEFAULT_GAME_FRACTION: f64 = 0.4;

/// Number of indices each side sends per game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GameLength {
    Fixed(usize),
    /// `⌊fraction · k⌋`, at least one.
    ShotFraction(f64),
}

impl GameLength {
    pub fn resolve(&self, copies: usize) -> usize {
        match *self {
            GameLength::Fixed(l) => l,
            GameLength::ShotFraction(f) => ((f * copies as f64).floor() as usize).max(1),
        }
    }
}

impl Default for GameLength {
    fn default() -> Self {
        GameLength::ShotFraction(DEFAULT_GAME_FRACTION)
    }
}

/// How the `m` traitors are placed among the generals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraitorPlacement {
    /// Uniform subset of all `n` generals.
    #[default]
    Random,
    /// Commander plus `m - 1` random lieutenants.
    CommanderTraitor,
    /// `m` random lieutenants, commander loyal.
    CommanderLoyal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub players: usize,
    pub traitors: usize,
    pub placement: TraitorPlacement,
    pub shots: usize,
    pub noise: NoiseSpec,
    pub game_length: GameLength,
    pub verify_fraction: f64,
    /// Used when the commander is loyal: `LoyalFixed` or `LoyalRandom`.
    pub loyal_commander: CommanderStrategy,
    /// Used when the commander is a traitor.
    pub traitor_commander: CommanderStrategy,
    pub traitor_lieutenant: LieutenantStrategy,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            players: 5,
            traitors: 1,
            placement: TraitorPlacement::Random,
            shots: 1000,
            noise: NoiseSpec::noiseless(),
            game_length: GameLength::default(),
            verify_fraction: DEFAULT_VERIFY_FRACTION,
            loyal_commander: CommanderStrategy::LoyalRandom,
            traitor_commander: CommanderStrategy::HalfSplit,
            traitor_lieutenant: LieutenantStrategy::OppositeClaim,
            seed: 0,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.players;
        check_players(n)?;
        if self.traitors > n {
            return Err(Error::invalid(format!("traitor count {} exceeds n = {n}", self.traitors)));
        }
        match self.placement {
            TraitorPlacement::CommanderTraitor if self.traitors == 0 => {
                return Err(Error::invalid("a traitorous commander needs at least one traitor"));
            }
            TraitorPlacement::CommanderLoyal if self.traitors > n - 1 => {
                return Err(Error::invalid("with a loyal commander at most n - 1 generals can be traitors"));
            }
            _ => {}
        }
        if self.shots < MIN_COPIES {
            return Err(Error::invalid(format!("need at least {MIN_COPIES} copies, got k = {}", self.shots)));
        }
        if !(self.verify_fraction > 0.0 && self.verify_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "verification fraction must lie in (0, 1), got {}",
                self.verify_fraction
            )));
        }
        if (self.verify_fraction * self.shots as f64).floor() < 1.0 {
            return Err(Error::invalid("verification would open no copy"));
        }
        match self.game_length {
            GameLength::Fixed(0) => return Err(Error::invalid("game length must be at least 1")),
            GameLength::ShotFraction(f) if f.is_nan() || f <= 0.0 => {
                return Err(Error::invalid(format!("game length fraction must be positive, got {f}")));
            }
            _ => {}
        }
        if self.loyal_commander.is_traitorous() {
            return Err(Error::invalid(format!("`{}` is not a loyal commander strategy", self.loyal_commander)));
        }
        if !self.traitor_commander.is_traitorous() {
            return Err(Error::invalid(format!("`{}` is not a traitor commander strategy", self.traitor_commander)));
        }
        Ok(())
    }

    pub fn game_length(&self) -> usize {
        self.game_length.resolve(self.shots)
    }

    /// Flag for the record: `Some` when the placement pins the commander's role.
    pub fn pinned_commander_traitor(&self) -> Option<bool> {
        match self.placement {
            TraitorPlacement::Random => None,
            TraitorPlacement::CommanderTraitor => Some(true),
            TraitorPlacement::CommanderLoyal => Some(false),
        }
    }
}

/// Outcome of one game, summarised from both transcripts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRecord {
    pub a: usize,
    pub b: usize,
    pub failures_seen_by_a: usize,
    pub length_seen_by_a: usize,
    pub failures_seen_by_b: usize,
    pub length_seen_by_b: usize,
    /// `None` when `a` is a traitor; its verdict is discarded.
    pub verdict_a: Option<Verdict>,
    pub verdict_b: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// Loyalty of every general, commander first.
    pub loyalty: Vec<Loyalty>,
    pub commander_order: Option<Order>,
    /// Order received per lieutenant; empty for degenerate runs.
    pub received: Vec<Order>,
    /// Final action per lieutenant, `None` for traitors.
    pub actions: Vec<Option<Order>>,
    pub games: Vec<GameRecord>,
    pub games_played: usize,
    pub dba_success: bool,
    pub degenerate: bool,
}

impl RunResult {
    pub fn commander_traitor(&self) -> bool {
        self.loyalty[0] == Loyalty::Traitor
    }

    pub fn traitor_count(&self) -> usize {
        self.loyalty.iter().filter(|&&l| l == Loyalty::Traitor).count()
    }
}

/// Single-line record of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub commander_traitor: bool,
    pub p: f64,
    pub k: usize,
    pub l: usize,
    pub g_actual: usize,
    pub dba_success: bool,
    pub degenerate: bool,
    pub actions: Vec<Option<Order>>,
}

impl RunRecord {
    pub fn new(config: &ProtocolConfig, result: &RunResult) -> Self {
        Self {
            seed: config.seed,
            n: config.players,
            m: config.traitors,
            commander_traitor: result.commander_traitor(),
            p: config.noise.flip_probability(),
            k: config.shots,
            l: config.game_length(),
            g_actual: result.games_played,
            dba_success: result.dba_success,
            degenerate: result.degenerate,
            actions: result.actions.clone(),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serialises")
    }
}

/// Unordered lieutenant pairs whose claims differ.
pub fn find_disagreements(claims: &[Order]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for a in 0..claims.len() {
        for b in a + 1..claims.len() {
            if claims[a] != claims[b] {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

/// Attack receivers switch to Retreat as soon as one game blames the commander.
pub fn finalize_actions(received: &[Order], verdicts: &[Vec<Verdict>]) -> Vec<Order> {
    received
        .iter()
        .zip(verdicts)
        .map(|(&order, v)| {
            if order == Order::Attack && v.contains(&Verdict::CommanderTraitor) {
                Order::Retreat
            } else {
                order
            }
        })
        .collect()
}

/// Detectable agreement: with a loyal commander every loyal lieutenant follows
/// its order, otherwise loyal lieutenants merely agree. Vacuously true when no
/// loyal lieutenant exists.
pub fn evaluate_dba(actions: &[Option<Order>], commander_order: Option<Order>) -> bool {
    let mut loyal = actions.iter().flatten();
    match commander_order {
        Some(order) => loyal.all(|&a| a == order),
        None => match loyal.next() {
            None => true,
            Some(&first) => loyal.all(|&a| a == first),
        },
    }
}

fn place_traitors<R: Rng + ?Sized>(config: &ProtocolConfig, rng: &mut R) -> Vec<Loyalty> {
    let n = config.players;
    let m = config.traitors;
    let mut loyalty = vec![Loyalty::Loyal; n];
    let chosen: Vec<usize> = match config.placement {
        TraitorPlacement::Random => index::sample(rng, n, m).into_vec(),
        TraitorPlacement::CommanderTraitor => std::iter::once(0)
            .chain(index::sample(rng, n - 1, m - 1).into_iter().map(|i| i + 1))
            .collect(),
        TraitorPlacement::CommanderLoyal => index::sample(rng, n - 1, m).into_iter().map(|i| i + 1).collect(),
    };
    for i in chosen {
        loyalty[i] = Loyalty::Traitor;
    }
    loyalty
}

fn degenerate(loyalty: Vec<Loyalty>, commander_order: Option<Order>) -> RunResult {
    let actions = vec![None; loyalty.len() - 1];
    RunResult {
        loyalty,
        commander_order,
        received: Vec::new(),
        actions,
        games: Vec::new(),
        games_played: 0,
        dba_success: false,
        degenerate: true,
    }
}

/// Executes one complete protocol run.
///
/// Degenerate runs (the commander cannot back an order with any copy) come
/// back as a result with `degenerate` set and `dba_success` false; only an
/// invalid configuration is an error.
pub fn run_protocol<R: Rng + ?Sized>(config: &ProtocolConfig, rng: &mut R) -> Result<RunResult> {
    config.validate()?;
    let n = config.players;
    let lts = n - 1;
    let length = config.game_length();

    let loyalty = place_traitors(config, rng);
    let mut table = distribute(n, config.shots, &config.noise, rng)?;
    let stats = verify(&mut table, config.verify_fraction, rng)?;
    let pair_error = stats.pooled_pair_error();

    let commander = GeneralId::commander(loyalty[0]);
    let strategy = if commander.is_traitor() { config.traitor_commander } else { config.loyal_commander };
    let OrderAssignment { commander_order, received } = match issue_orders(&table, commander, strategy, rng) {
        Ok(a) => a,
        Err(Error::Degenerate(_)) => return Ok(degenerate(loyalty, None)),
        Err(e) => return Err(e),
    };

    let general = |j: usize| GeneralId::lieutenant(j, loyalty[j + 1]);
    let claims: Vec<Order> = (0..lts)
        .map(|j| {
            let genuine = received[j].order;
            if general(j).is_traitor() {
                match config.traitor_lieutenant {
                    LieutenantStrategy::Honest => genuine,
                    LieutenantStrategy::OppositeClaim => traitor_claim(genuine),
                }
            } else {
                genuine
            }
        })
        .collect();
    let side = |j: usize| GameSide {
        general: general(j),
        claim: claims[j],
        supply: if claims[j] == received[j].order {
            Supply::Genuine(&received[j].indices)
        } else {
            Supply::OwnBits
        },
    };

    let pairs = find_disagreements(&claims);
    let mut verdicts: Vec<Vec<Verdict>> = vec![Vec::new(); lts];
    let mut games = Vec::with_capacity(pairs.len());
    for &(a, b) in &pairs {
        let (ta, tb) = play_game(&side(a), &side(b), &table, length, rng)?;
        let mut judge = |j: usize, t: &super::GameTranscript| -> Result<Option<Verdict>> {
            if general(j).is_traitor() {
                return Ok(None);
            }
            let v = classify(t, pair_error, n)?;
            verdicts[j].push(v);
            Ok(Some(v))
        };
        let verdict_a = judge(a, &ta)?;
        let verdict_b = judge(b, &tb)?;
        games.push(GameRecord {
            a: a + 1,
            b: b + 1,
            failures_seen_by_a: ta.failures,
            length_seen_by_a: ta.length(),
            failures_seen_by_b: tb.failures,
            length_seen_by_b: tb.length(),
            verdict_a,
            verdict_b,
        });
    }

    let received_orders: Vec<Order> = received.iter().map(|r| r.order).collect();
    let finals = finalize_actions(&received_orders, &verdicts);
    let actions: Vec<Option<Order>> =
        (0..lts).map(|j| (!general(j).is_traitor()).then_some(finals[j])).collect();
    let dba_success = evaluate_dba(&actions, commander_order);
    Ok(RunResult {
        loyalty,
        commander_order,
        received: received_orders,
        actions,
        games_played: games.len(),
        games,
        dba_success,
        degenerate: false,
    })
}

/// Runs with a fresh stream seeded from `config.seed`.
pub fn run_seeded(config: &ProtocolConfig) -> Result<RunResult> {
    let mut rng: SimRng = seeded(config.seed);
    run_protocol(config, &mut rng)
}
