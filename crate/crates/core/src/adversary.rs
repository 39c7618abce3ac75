//! Traitor behaviour.
//!
//! A traitorous commander decides which order each lieutenant gets; a
//! traitorous lieutenant decides which order it claims and, when it lies,
//! which copy indices it offers as evidence.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{Order, OutcomeTable, ReceivedOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CommanderStrategy {
    LoyalFixed(Order),
    LoyalRandom,
    /// `⌈(n-1)/2⌉` random lieutenants get Attack, the rest Retreat, each with genuine indices.
    HalfSplit,
    /// Independent fair coin per lieutenant, genuine indices.
    RandomAssign,
    /// One order for everyone, backed by copies of the opposite symbol.
    AllSameFalseIndices,
}

impl CommanderStrategy {
    pub const NAMES: &'static str =
        "loyal-attack, loyal-retreat, loyal-random, half-split, random-assign, all-same-false-indices";

    pub fn is_traitorous(self) -> bool {
        !matches!(self, Self::LoyalFixed(_) | Self::LoyalRandom)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::LoyalFixed(Order::Attack) => "loyal-attack",
            Self::LoyalFixed(Order::Retreat) => "loyal-retreat",
            Self::LoyalRandom => "loyal-random",
            Self::HalfSplit => "half-split",
            Self::RandomAssign => "random-assign",
            Self::AllSameFalseIndices => "all-same-false-indices",
        }
    }
}

impl fmt::Display for CommanderStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CommanderStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "loyal-attack" => Self::LoyalFixed(Order::Attack),
            "loyal-retreat" => Self::LoyalFixed(Order::Retreat),
            "loyal-random" => Self::LoyalRandom,
            "half-split" => Self::HalfSplit,
            "random-assign" => Self::RandomAssign,
            "all-same-false-indices" => Self::AllSameFalseIndices,
            _ => return Err(Error::UnknownName { name: s.to_string(), expected: Self::NAMES }),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum LieutenantStrategy {
    Honest,
    /// Always announce the complement of the received order.
    #[default]
    OppositeClaim,
}

impl LieutenantStrategy {
    pub const NAMES: &'static str = "honest, opposite-claim";

    pub fn name(self) -> &'static str {
        match self {
            Self::Honest => "honest",
            Self::OppositeClaim => "opposite-claim",
        }
    }
}

impl fmt::Display for LieutenantStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LieutenantStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "honest" => Ok(Self::Honest),
            "opposite-claim" => Ok(Self::OppositeClaim),
            _ => Err(Error::UnknownName { name: s.to_string(), expected: Self::NAMES }),
        }
    }
}

pub fn traitor_claim(genuine: Order) -> Order {
    genuine.opposite()
}

fn coin<R: Rng + ?Sized>(rng: &mut R) -> Order {
    if rng.gen_bool(0.5) {
        Order::Attack
    } else {
        Order::Retreat
    }
}

/// Orders handed out by a traitorous commander, one per lieutenant.
pub fn traitor_commander_assign<R: Rng + ?Sized>(
    strategy: CommanderStrategy,
    table: &OutcomeTable,
    rng: &mut R,
) -> Result<Vec<ReceivedOrder>> {
    let lts = table.lieutenant_count();
    let orders: Vec<Order> = match strategy {
        CommanderStrategy::HalfSplit => {
            let mut orders = vec![Order::Retreat; lts];
            for j in index::sample(rng, lts, lts.div_ceil(2)) {
                orders[j] = Order::Attack;
            }
            orders
        }
        CommanderStrategy::RandomAssign => (0..lts).map(|_| coin(rng)).collect(),
        CommanderStrategy::AllSameFalseIndices => vec![coin(rng); lts],
        other => return Err(Error::invalid(format!("`{other}` is not a traitor commander strategy"))),
    };
    let forged = strategy == CommanderStrategy::AllSameFalseIndices;
    let backing = |order: Order| -> Result<Vec<usize>> {
        let symbol = if forged { order.opposite().symbol() } else { order.symbol() };
        let list = table.unspent_with_symbol(symbol);
        if list.is_empty() {
            return Err(Error::Degenerate(format!("no unspent {symbol} copy for the {order} order")));
        }
        Ok(list)
    };
    let attack = if orders.contains(&Order::Attack) { backing(Order::Attack)? } else { Vec::new() };
    let retreat = if orders.contains(&Order::Retreat) { backing(Order::Retreat)? } else { Vec::new() };
    Ok(orders
        .into_iter()
        .map(|order| ReceivedOrder {
            order,
            indices: if order == Order::Attack { attack.clone() } else { retreat.clone() },
        })
        .collect())
}

/// Picks a uniformly random unspent copy where the traitor's own bit matches
/// the bit its claimed order implies. `None` once no such copy is left.
pub fn traitor_select_index<R: Rng + ?Sized>(
    own_bits: &[bool],
    claimed: Order,
    spent: &[bool],
    rng: &mut R,
) -> Option<usize> {
    let want = claimed.lieutenant_bit();
    let candidates: Vec<usize> = (0..own_bits.len()).filter(|&i| own_bits[i] == want && !spent[i]).collect();
    if candidates.is_empty() {
        None
    } else {
        Some(candidates[rng.gen_range(0..candidates.len())])
    }
}

/// Repeated [`traitor_select_index`] without replacement, using a lazy
/// Fisher-Yates shuffle of the candidate set.
#[derive(Debug, Clone)]
pub struct IndexPool {
    candidates: Vec<usize>,
    drawn: usize,
}

impl IndexPool {
    pub fn new(own_bits: &[bool], claimed: Order, excluded: &[bool]) -> Self {
        let want = claimed.lieutenant_bit();
        let candidates = (0..own_bits.len()).filter(|&i| own_bits[i] == want && !excluded[i]).collect();
        Self { candidates, drawn: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.candidates.len() - self.drawn
    }

    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<usize> {
        if self.remaining() == 0 {
            return None;
        }
        let pick = rng.gen_range(self.drawn..self.candidates.len());
        self.candidates.swap(self.drawn, pick);
        self.drawn += 1;
        Some(self.candidates[self.drawn - 1])
    }
}
