//! Resource state statistics.
//!
//! The shared state puts amplitude `1/√3` on `|00⟩|1…1⟩` and `|11⟩|0…0⟩`, and
//! spreads the remaining third evenly over `|01⟩` with exactly one lieutenant
//! reading `1` and `|10⟩` with exactly one lieutenant reading `0`. All protocol
//! steps only look at computational-basis outcomes, so this module deals in
//! outcome patterns and their probabilities rather than amplitudes.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt::significant;

/// Exact probability, used by the closed-form oracles.
pub type Exact = Ratio<i64>;

pub fn exact_to_f64(r: Exact) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub(crate) fn check_players(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::invalid(format!("need at least 3 generals, got n = {n}")));
    }
    Ok(())
}

/// The commander's two measured bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CommanderSymbol {
    C00,
    C01,
    C10,
    C11,
}

impl CommanderSymbol {
    pub const ALL: [CommanderSymbol; 4] = [Self::C00, Self::C01, Self::C10, Self::C11];

    pub fn from_bits(first: bool, second: bool) -> Self {
        match (first, second) {
            (false, false) => Self::C00,
            (false, true) => Self::C01,
            (true, false) => Self::C10,
            (true, true) => Self::C11,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Self::C00 => (false, false),
            Self::C01 => (false, true),
            Self::C10 => (true, false),
            Self::C11 => (true, true),
        }
    }

    /// `C00` and `C11`, the two symbols that carry an order.
    pub fn is_order_symbol(self) -> bool {
        matches!(self, Self::C00 | Self::C11)
    }

    pub fn complement(self) -> Self {
        let (a, b) = self.bits();
        Self::from_bits(!a, !b)
    }

    /// Lieutenant `j`'s noiseless bit given this symbol and, for `C01`/`C10`,
    /// the position of the odd lieutenant.
    pub fn ideal_lieutenant_bit(self, odd_position: usize, j: usize) -> bool {
        match self {
            Self::C00 => true,
            Self::C11 => false,
            Self::C01 => j == odd_position,
            Self::C10 => j != odd_position,
        }
    }
}

impl fmt::Display for CommanderSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::C00 => "C00",
            Self::C01 => "C01",
            Self::C10 => "C10",
            Self::C11 => "C11",
        };
        f.write_str(s)
    }
}

fn bit_char(b: bool) -> char {
    if b {
        '1'
    } else {
        '0'
    }
}

/// One joint measurement record of a single copy.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OutcomePattern {
    pub commander: CommanderSymbol,
    pub lieutenants: Vec<bool>,
}

impl OutcomePattern {
    pub fn new(commander: CommanderSymbol, lieutenants: Vec<bool>) -> Self {
        Self { commander, lieutenants }
    }

    /// Number of generals this pattern describes.
    pub fn players(&self) -> usize {
        self.lieutenants.len() + 1
    }

    pub fn lieutenant_string(&self) -> String {
        self.lieutenants.iter().copied().map(bit_char).collect()
    }

    /// All `n + 1` bits as a 0/1 string, commander bits first.
    pub fn bit_string(&self) -> String {
        let (a, b) = self.commander.bits();
        let mut s = String::with_capacity(self.lieutenants.len() + 2);
        s.push(bit_char(a));
        s.push(bit_char(b));
        s.push_str(&self.lieutenant_string());
        s
    }

    /// Whether the noiseless state can produce this pattern.
    pub fn in_support(&self) -> bool {
        let ones = self.lieutenants.iter().filter(|&&b| b).count();
        let len = self.lieutenants.len();
        match self.commander {
            CommanderSymbol::C00 => ones == len,
            CommanderSymbol::C11 => ones == 0,
            CommanderSymbol::C01 => ones == 1,
            CommanderSymbol::C10 => ones + 1 == len,
        }
    }
}

/// Enumerates the `2 + 2(n-1)` support patterns with their exact probabilities.
pub fn exact_pmf_rational(n: usize) -> Result<Vec<(OutcomePattern, Exact)>> {
    check_players(n)?;
    let lts = n - 1;
    let third = Exact::new(1, 3);
    let spread = Exact::new(1, 6 * lts as i64);
    let mut out = Vec::with_capacity(2 + 2 * lts);
    out.push((OutcomePattern::new(CommanderSymbol::C00, vec![true; lts]), third));
    out.push((OutcomePattern::new(CommanderSymbol::C11, vec![false; lts]), third));
    for pos in 0..lts {
        for symbol in [CommanderSymbol::C01, CommanderSymbol::C10] {
            let bits = (0..lts).map(|j| symbol.ideal_lieutenant_bit(pos, j)).collect();
            out.push((OutcomePattern::new(symbol, bits), spread));
        }
    }
    Ok(out)
}

/// Probability mass function over outcome patterns for `n` generals.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    n: usize,
    entries: BTreeMap<OutcomePattern, f64>,
}

impl JointPmf {
    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = (OutcomePattern, f64)>) -> Self {
        let mut map = BTreeMap::new();
        for (pattern, p) in entries {
            *map.entry(pattern).or_insert(0.0) += p;
        }
        Self { n, entries: map }
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn probability(&self, pattern: &OutcomePattern) -> f64 {
        self.entries.get(pattern).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OutcomePattern, f64)> {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Sum of the probabilities of all patterns satisfying `pred`.
    pub fn mass_where(&self, pred: impl Fn(&OutcomePattern) -> bool) -> f64 {
        self.iter().filter(|(p, _)| pred(p)).map(|(_, v)| v).sum()
    }

    /// Total variation distance to another pmf over the same pattern space.
    pub fn total_variation(&self, other: &JointPmf) -> f64 {
        let mut sum = 0.0;
        for (pattern, p) in self.iter() {
            sum += (p - other.probability(pattern)).abs();
        }
        for (pattern, q) in other.iter() {
            if !self.entries.contains_key(pattern) {
                sum += q;
            }
        }
        sum / 2.0
    }

    /// Writes `commander_symbol,lieutenant_bits,probability` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["commander_symbol", "lieutenant_bits", "probability"])?;
        for (pattern, p) in self.iter() {
            w.write_record([
                pattern.commander.to_string(),
                pattern.lieutenant_string(),
                significant(p, 17),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn exact_pmf(n: usize) -> Result<JointPmf> {
    let entries = exact_pmf_rational(n)?;
    Ok(JointPmf::from_entries(n, entries.into_iter().map(|(pat, p)| (pat, exact_to_f64(p)))))
}

/// Draws a commander symbol and, for `C01`/`C10`, the odd lieutenant position.
///
/// The draw is one uniform pick among `6(n-1)` equally likely cells: `2(n-1)`
/// cells each for `C00` and `C11`, and one cell per position for `C01`/`C10`.
pub(crate) fn draw_cell<R: Rng + ?Sized>(lieutenants: usize, rng: &mut R) -> (CommanderSymbol, usize) {
    let cell = rng.gen_range(0..6 * lieutenants);
    let block = 2 * lieutenants;
    if cell < block {
        (CommanderSymbol::C00, 0)
    } else if cell < 2 * block {
        (CommanderSymbol::C11, 0)
    } else {
        let rest = cell - 2 * block;
        if rest < lieutenants {
            (CommanderSymbol::C01, rest)
        } else {
            (CommanderSymbol::C10, rest - lieutenants)
        }
    }
}

pub fn sample_outcome<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<OutcomePattern> {
    check_players(n)?;
    let lts = n - 1;
    let (symbol, pos) = draw_cell(lts, rng);
    let bits = (0..lts).map(|j| symbol.ideal_lieutenant_bit(pos, j)).collect();
    Ok(OutcomePattern::new(symbol, bits))
}

/// Effective noise levels of the hardware mitigation settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoisePreset {
    Noiseless,
    Unmitigated,
    DdOnly,
    EmDd,
    Custom,
}

impl NoisePreset {
    pub const NAMES: &'static str = "noiseless, unmitigated, dd, emdd";

    pub fn name(self) -> &'static str {
        match self {
            Self::Noiseless => "noiseless",
            Self::Unmitigated => "unmitigated",
            Self::DdOnly => "dd",
            Self::EmDd => "emdd",
            Self::Custom => "custom",
        }
    }

    /// Flip probability of a named preset; `None` for `Custom`.
    pub fn flip_probability(self) -> Option<f64> {
        match self {
            Self::Noiseless => Some(0.0),
            Self::Unmitigated => Some(0.338),
            Self::DdOnly => Some(0.207),
            Self::EmDd => Some(0.175),
            Self::Custom => None,
        }
    }
}

impl FromStr for NoisePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "noiseless" | "none" => Ok(Self::Noiseless),
            "unmitigated" => Ok(Self::Unmitigated),
            "dd" | "dd-only" => Ok(Self::DdOnly),
            "emdd" | "em-dd" | "em+dd" => Ok(Self::EmDd),
            _ => Err(Error::UnknownName { name: s.to_string(), expected: Self::NAMES }),
        }
    }
}

impl fmt::Display for NoisePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Independent bit-flip channel applied to every measured bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    preset: NoisePreset,
    p: f64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self::preset(NoisePreset::Noiseless).expect("named preset")
    }

    pub fn preset(preset: NoisePreset) -> Result<Self> {
        let p = preset
            .flip_probability()
            .ok_or_else(|| Error::invalid("custom preset needs an explicit flip probability"))?;
        Ok(Self { preset, p })
    }

    pub fn custom(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("flip probability must lie in [0, 1], got {p}")));
        }
        Ok(Self { preset: NoisePreset::Custom, p })
    }

    pub fn flip_probability(&self) -> f64 {
        self.p
    }

    pub fn preset_kind(&self) -> NoisePreset {
        self.preset
    }

    #[inline]
    pub(crate) fn flip<R: Rng + ?Sized>(&self, bit: bool, rng: &mut R) -> bool {
        if self.p <= 0.0 {
            bit
        } else if self.p >= 1.0 {
            !bit
        } else {
            bit ^ rng.gen_bool(self.p)
        }
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self::noiseless()
    }
}

/// Flips each of the `n + 1` bits independently; the commander symbol is
/// rebuilt from its two flipped bits.
pub fn apply_noise<R: Rng + ?Sized>(pattern: &OutcomePattern, spec: &NoiseSpec, rng: &mut R) -> OutcomePattern {
    let (a, b) = pattern.commander.bits();
    let a = spec.flip(a, rng);
    let b = spec.flip(b, rng);
    let lieutenants = pattern.lieutenants.iter().map(|&bit| spec.flip(bit, rng)).collect();
    OutcomePattern::new(CommanderSymbol::from_bits(a, b), lieutenants)
}

/// Probability that a given lieutenant reads `1`. Equals 1/2 for every `n`.
pub fn lieutenant_marginal(n: usize) -> Result<Exact> {
    check_players(n)?;
    let lts = n as i64 - 1;
    // 1/3 from C00, plus the C10 patterns where this lieutenant is not the odd one
    // and the C01 pattern where it is.
    Ok(Exact::new(1, 3) + Exact::new(lts - 1, 6 * lts) + Exact::new(1, 6 * lts))
}

/// Probability that two fixed, distinct lieutenants both read `1`.
pub fn joint_ones_probability(n: usize) -> Result<Exact> {
    check_players(n)?;
    Ok(Exact::new(1, 2) - Exact::new(1, 3 * (n as i64 - 1)))
}

/// Rate at which a loyal lieutenant's bit contradicts a fabricating traitor's
/// claim on noiseless copies: `2 / (3(n-1))`.
pub fn traitor_detection_rate(n: usize) -> Result<Exact> {
    check_players(n)?;
    Ok(Exact::new(2, 3 * (n as i64 - 1)))
}

/// Number of disagreeing loyal/traitor pairs under a loyal commander with `m`
/// opposite-claiming traitors: `m(n-1-m)`, floored at zero.
pub fn games_count(n: usize, m: usize) -> Result<u64> {
    check_players(n)?;
    if m > n {
        return Err(Error::invalid(format!("traitor count {m} exceeds n = {n}")));
    }
    let lts = n as i64 - 1;
    let m = m as i64;
    Ok((m * (lts - m)).max(0) as u64)
}

/// Largest integer game count, `⌊(n-1)²/4⌋`.
pub fn games_max(n: usize) -> Result<u64> {
    check_players(n)?;
    let lts = (n - 1) as u64;
    Ok(lts * lts / 4)
}

/// The continuous bound `(n-1)²/4`; equal to [`games_max`] only for odd `n`.
pub fn games_max_bound(n: usize) -> Result<f64> {
    check_players(n)?;
    let lts = (n - 1) as f64;
    Ok(lts * lts / 4.0)
}
