use rand::Rng;

use crate::entanglement::{check_players, draw_cell, CommanderSymbol, NoiseSpec};
use crate::error::{Error, Result};

/// Smallest `k` that leaves every phase a nonempty budget.
pub const MIN_COPIES: usize = 10;

/// Measured bits of all `k` copies, stored per general.
///
/// Each general only ever sees its own column through [`commander_view`] or
/// [`lieutenant_view`]; the protocol opens other columns only at the copies
/// selected for verification.
///
/// [`commander_view`]: OutcomeTable::commander_view
/// [`lieutenant_view`]: OutcomeTable::lieutenant_view
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeTable {
    n: usize,
    commander: Vec<CommanderSymbol>,
    lieutenants: Vec<Vec<bool>>,
    verification: Vec<usize>,
    in_verification: Vec<bool>,
}

impl OutcomeTable {
    /// Builds a table from explicit columns. Mostly useful for tests.
    pub fn from_columns(commander: Vec<CommanderSymbol>, lieutenants: Vec<Vec<bool>>) -> Result<Self> {
        let n = lieutenants.len() + 1;
        check_players(n)?;
        let k = commander.len();
        if lieutenants.iter().any(|col| col.len() != k) {
            return Err(Error::invalid("every lieutenant column must hold one bit per copy"));
        }
        Ok(Self { n, commander, lieutenants, verification: Vec::new(), in_verification: vec![false; k] })
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn lieutenant_count(&self) -> usize {
        self.n - 1
    }

    pub fn copies(&self) -> usize {
        self.commander.len()
    }

    pub fn commander_view(&self) -> &[CommanderSymbol] {
        &self.commander
    }

    pub fn lieutenant_view(&self, position: usize) -> &[bool] {
        &self.lieutenants[position]
    }

    /// Copies opened during verification, ascending.
    pub fn verification_indices(&self) -> &[usize] {
        &self.verification
    }

    /// Per-copy flag, `true` for copies spent on verification.
    pub fn verification_mask(&self) -> &[bool] {
        &self.in_verification
    }

    pub fn is_verification(&self, index: usize) -> bool {
        self.in_verification[index]
    }

    /// Copies not spent on verification whose commander symbol is `symbol`.
    pub fn unspent_with_symbol(&self, symbol: CommanderSymbol) -> Vec<usize> {
        self.commander
            .iter()
            .enumerate()
            .filter(|&(i, &s)| s == symbol && !self.in_verification[i])
            .map(|(i, _)| i)
            .collect()
    }

    pub(crate) fn mark_verification(&mut self, mut indices: Vec<usize>) {
        indices.sort_unstable();
        for &i in &indices {
            self.in_verification[i] = true;
        }
        self.verification = indices;
    }
}

/// Samples `k` noisy copies of the resource state.
pub fn distribute<R: Rng + ?Sized>(n: usize, k: usize, noise: &NoiseSpec, rng: &mut R) -> Result<OutcomeTable> {
    check_players(n)?;
    if k < MIN_COPIES {
        return Err(Error::invalid(format!("need at least {MIN_COPIES} copies, got k = {k}")));
    }
    let lts = n - 1;
    let mut commander = Vec::with_capacity(k);
    let mut lieutenants = vec![Vec::with_capacity(k); lts];
    for _ in 0..k {
        let (symbol, odd) = draw_cell(lts, rng);
        let (a, b) = symbol.bits();
        let a = noise.flip(a, rng);
        let b = noise.flip(b, rng);
        commander.push(CommanderSymbol::from_bits(a, b));
        for (j, column) in lieutenants.iter_mut().enumerate() {
            column.push(noise.flip(symbol.ideal_lieutenant_bit(odd, j), rng));
        }
    }
    OutcomeTable::from_columns(commander, lieutenants)
}
