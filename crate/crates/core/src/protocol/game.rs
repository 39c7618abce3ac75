use rand::Rng;
use serde::{Deserialize, Serialize};

use super::table::OutcomeTable;
use super::{GeneralId, Order, Verdict};
use crate::adversary::IndexPool;
use crate::entanglement::{exact_to_f64, traitor_detection_rate};
use crate::error::{Error, Result};

/// Where a player takes the indices it sends.
#[derive(Debug, Clone, Copy)]
pub enum Supply<'a> {
    /// The list received from the commander, sent in order.
    Genuine(&'a [usize]),
    /// Unspent copies where the player's own bit matches its claim, drawn at random.
    OwnBits,
}

#[derive(Debug, Clone, Copy)]
pub struct GameSide<'a> {
    pub general: GeneralId,
    pub claim: Order,
    pub supply: Supply<'a>,
}

/// One player's view of a finished game: everything the opponent sent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameTranscript {
    pub opponent: GeneralId,
    pub claimed_order: Order,
    pub exchanged: Vec<(usize, Order)>,
    /// Received indices where this player's bit contradicts the claim.
    pub failures: usize,
    /// Counts of this player's own bit (0, 1) over the received indices.
    pub own_bits: [usize; 2],
}

impl GameTranscript {
    fn new(opponent: GeneralId, claimed_order: Order) -> Self {
        Self { opponent, claimed_order, exchanged: Vec::new(), failures: 0, own_bits: [0, 0] }
    }

    pub fn length(&self) -> usize {
        self.exchanged.len()
    }

    pub fn failure_rate(&self) -> Option<f64> {
        (self.length() > 0).then(|| self.failures as f64 / self.length() as f64)
    }

    fn receive(&mut self, index: usize, own_bit: bool) {
        self.exchanged.push((index, self.claimed_order));
        self.own_bits[own_bit as usize] += 1;
        if own_bit != self.claimed_order.lieutenant_bit() {
            self.failures += 1;
        }
    }
}

enum Source<'a> {
    List { items: &'a [usize], next: usize },
    Pool(IndexPool),
}

impl Source<'_> {
    fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<usize> {
        match self {
            Source::List { items, next } => {
                let out = items.get(*next).copied();
                *next += 1;
                out
            }
            Source::Pool(pool) => pool.draw(rng),
        }
    }
}

fn open_source<'a>(side: &GameSide<'a>, position: usize, table: &OutcomeTable) -> Source<'a> {
    match side.supply {
        Supply::Genuine(items) => Source::List { items, next: 0 },
        Supply::OwnBits => Source::Pool(IndexPool::new(
            table.lieutenant_view(position),
            side.claim,
            table.verification_mask(),
        )),
    }
}

/// Plays one turn-based game between two lieutenants with conflicting claims.
///
/// A fair coin picks who starts. Turns alternate; each side sends up to
/// `length` distinct indices and stops early if its supply runs dry. Returns
/// the transcripts seen by `a` and by `b`, in that order.
pub fn play_game<R: Rng + ?Sized>(
    a: &GameSide<'_>,
    b: &GameSide<'_>,
    table: &OutcomeTable,
    length: usize,
    rng: &mut R,
) -> Result<(GameTranscript, GameTranscript)> {
    if length == 0 {
        return Err(Error::invalid("game length must be at least 1"));
    }
    if a.claim == b.claim {
        return Err(Error::invalid("players in a game must claim different orders"));
    }
    let pos = |g: GeneralId| {
        g.lieutenant_position()
            .filter(|&p| p < table.lieutenant_count())
            .ok_or_else(|| Error::invalid(format!("general {} is not a lieutenant", g.index)))
    };
    let positions = [pos(a.general)?, pos(b.general)?];
    let mut sources = [open_source(a, positions[0], table), open_source(b, positions[1], table)];
    // transcripts[i] is what side i received from the other side
    let mut transcripts = [GameTranscript::new(b.general, b.claim), GameTranscript::new(a.general, a.claim)];
    let mut sent = [0usize; 2];
    let mut done = [false; 2];
    let mut turn = usize::from(rng.gen_bool(0.5));
    while !(done[0] && done[1]) {
        if !done[turn] {
            let next = if sent[turn] < length { sources[turn].next(rng) } else { None };
            match next {
                Some(index) => {
                    let receiver = 1 - turn;
                    let own = table.lieutenant_view(positions[receiver])[index];
                    transcripts[receiver].receive(index, own);
                    sent[turn] += 1;
                }
                None => done[turn] = true,
            }
        }
        turn = 1 - turn;
    }
    let [ta, tb] = transcripts;
    Ok((ta, tb))
}

/// Failure-rate cutoff `e + R(1 - 2e)/2`, with `e = min(ε̂, 1 - ε̂)` and `R` the
/// noiseless detection rate for `n` generals.
///
/// `e` is the failure rate of genuine indices and `e + R(1 - 2e)` the rate of
/// indices picked by a traitor from its own bits, so the cutoff sits halfway.
pub fn detection_threshold(pair_error: f64, n: usize) -> Result<f64> {
    let rate = exact_to_f64(traitor_detection_rate(n)?);
    let e = pair_error.min(1.0 - pair_error).clamp(0.0, 0.5);
    Ok(e + rate * (1.0 - 2.0 * e) / 2.0)
}

/// Decides whether the opponent or the commander lied.
///
/// When the estimated pair error is above one half the channel anti-correlates,
/// and received bits are read complemented. An empty transcript counts against
/// the opponent, as does a failure rate sitting exactly on the threshold.
pub fn classify(transcript: &GameTranscript, pair_error: f64, n: usize) -> Result<Verdict> {
    let threshold = detection_threshold(pair_error, n)?;
    let l = transcript.length();
    if l == 0 {
        return Ok(Verdict::OpponentTraitor);
    }
    let failures = if pair_error > 0.5 { l - transcript.failures } else { transcript.failures };
    if failures as f64 / l as f64 >= threshold {
        Ok(Verdict::OpponentTraitor)
    } else {
        Ok(Verdict::CommanderTraitor)
    }
}
