//! The agreement state machine.
//!
//! A run moves through four phases over one [`OutcomeTable`]:
//!
//! 1. [`distribute`] hands every general its measured bits for `k` copies.
//! 2. [`verify`] opens a random subset of copies and estimates how often two
//!    lieutenants disagree on copies where they should agree.
//! 3. [`issue_orders`] sends each lieutenant an order and the copy indices
//!    backing it.
//! 4. Lieutenants with conflicting claims [`play_game`] against each other,
//!    [`classify`] the opponent and [`finalize_actions`]; [`evaluate_dba`]
//!    decides whether the run reached detectable agreement.
//!
//! [`run_protocol`] chains all of the above.

mod game;
mod orders;
mod run;
mod table;
mod verify;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::entanglement::CommanderSymbol;
use crate::error::Error;

pub use game::{classify, detection_threshold, play_game, GameSide, GameTranscript, Supply};
pub use orders::{issue_orders, OrderAssignment, ReceivedOrder};
pub use run::{
    evaluate_dba, finalize_actions, find_disagreements, run_protocol, run_seeded, GameLength, GameRecord,
    ProtocolConfig, RunRecord, RunResult, TraitorPlacement, DEFAULT_GAME_FRACTION, DEFAULT_VERIFY_FRACTION,
};
pub use table::{distribute, OutcomeTable, MIN_COPIES};
pub use verify::{expected_order_copy_mismatch, pair_error_from_mismatch, verify, VerificationStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    Retreat,
    Attack,
}

impl Order {
    /// Commander symbol that backs this order.
    pub fn symbol(self) -> CommanderSymbol {
        match self {
            Order::Retreat => CommanderSymbol::C00,
            Order::Attack => CommanderSymbol::C11,
        }
    }

    /// The bit every lieutenant reads on a copy backing this order.
    pub fn lieutenant_bit(self) -> bool {
        matches!(self, Order::Retreat)
    }

    pub fn opposite(self) -> Order {
        match self {
            Order::Retreat => Order::Attack,
            Order::Attack => Order::Retreat,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Order::Retreat => "retreat",
            Order::Attack => "attack",
        })
    }
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "retreat" => Ok(Order::Retreat),
            "attack" => Ok(Order::Attack),
            _ => Err(Error::UnknownName { name: s.to_string(), expected: "retreat, attack" }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Loyalty {
    Loyal,
    Traitor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Commander,
    Lieutenant,
}

/// A general. Index 0 is the commander, lieutenant `j` has index `j + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneralId {
    pub index: usize,
    pub loyalty: Loyalty,
}

impl GeneralId {
    pub fn commander(loyalty: Loyalty) -> Self {
        Self { index: 0, loyalty }
    }

    pub fn lieutenant(position: usize, loyalty: Loyalty) -> Self {
        Self { index: position + 1, loyalty }
    }

    pub fn role(&self) -> Role {
        if self.index == 0 {
            Role::Commander
        } else {
            Role::Lieutenant
        }
    }

    /// Position among the lieutenants, `None` for the commander.
    pub fn lieutenant_position(&self) -> Option<usize> {
        self.index.checked_sub(1)
    }

    pub fn is_traitor(&self) -> bool {
        self.loyalty == Loyalty::Traitor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    OpponentTraitor,
    CommanderTraitor,
}
