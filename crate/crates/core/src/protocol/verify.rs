use rand::seq::index;
use rand::Rng;

use super::table::OutcomeTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct PairCounts {
    mismatches: usize,
    samples: usize,
}

/// Correlation estimates from the opened copies.
///
/// For every lieutenant pair the statistic is the fraction of opened copies
/// with commander symbol `C00` or `C11` on which the two lieutenants read
/// different bits. Without noise that fraction is exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationStats {
    lieutenants: usize,
    opened: usize,
    pairs: Vec<PairCounts>,
}

fn pair_slot(lieutenants: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    assert!(a != b && b < lieutenants, "pair ({a}, {b}) out of range");
    a * (2 * lieutenants - a - 1) / 2 + (b - a - 1)
}

impl VerificationStats {
    /// Number of copies opened.
    pub fn opened(&self) -> usize {
        self.opened
    }

    /// Copies that entered the statistic for pair `(a, b)`.
    pub fn samples(&self, a: usize, b: usize) -> usize {
        self.pairs[pair_slot(self.lieutenants, a, b)].samples
    }

    /// Raw mismatch rate of lieutenants `a` and `b`; zero when no copy qualified.
    pub fn mismatch_rate(&self, a: usize, b: usize) -> f64 {
        let c = self.pairs[pair_slot(self.lieutenants, a, b)];
        if c.samples == 0 {
            0.0
        } else {
            c.mismatches as f64 / c.samples as f64
        }
    }

    /// Mismatch rate pooled over all lieutenant pairs.
    pub fn pooled_mismatch_rate(&self) -> f64 {
        let (m, s) = self.pairs.iter().fold((0, 0), |(m, s), c| (m + c.mismatches, s + c.samples));
        if s == 0 {
            0.0
        } else {
            m as f64 / s as f64
        }
    }

    /// Estimated probability that noise makes `a` and `b` disagree on a copy
    /// where they would otherwise agree.
    pub fn pair_error(&self, a: usize, b: usize) -> f64 {
        pair_error_from_mismatch(self.lieutenants + 1, self.mismatch_rate(a, b))
    }

    pub fn pooled_pair_error(&self) -> f64 {
        pair_error_from_mismatch(self.lieutenants + 1, self.pooled_mismatch_rate())
    }
}

/// Expected raw mismatch rate on `C00`/`C11` copies under flip probability `p`.
///
/// With `e = 2p(1-p)` and `q = 2/(n-1)` the rate is
/// `e (2 + q - e(1 + 2q)) / (2 - e)`. It exceeds `e` because a single commander
/// flip turns `C01`/`C10` copies, on which two lieutenants disagree with
/// probability `q`, into order symbols.
pub fn expected_order_copy_mismatch(n: usize, p: f64) -> f64 {
    let e = 2.0 * p * (1.0 - p);
    let q = 2.0 / (n as f64 - 1.0);
    e * (2.0 + q - e * (1.0 + 2.0 * q)) / (2.0 - e)
}

/// Inverts [`expected_order_copy_mismatch`] in terms of `e = 2p(1-p)`.
///
/// The map is increasing on `[0, 1/2]` with fixed points at both ends. Rates
/// above one half are reflected, so the result lands above one half as well.
pub fn pair_error_from_mismatch(n: usize, rate: f64) -> f64 {
    let rate = rate.clamp(0.0, 1.0);
    if rate > 0.5 {
        return 1.0 - pair_error_from_mismatch(n, 1.0 - rate);
    }
    let q = 2.0 / (n as f64 - 1.0);
    let a = 1.0 + 2.0 * q;
    let b = 2.0 + q + rate;
    let disc = (b * b - 8.0 * rate * a).max(0.0);
    ((b - disc.sqrt()) / (2.0 * a)).clamp(0.0, 0.5)
}

/// Opens `⌊fraction·k⌋` uniformly chosen copies and records pairwise mismatches.
pub fn verify<R: Rng + ?Sized>(table: &mut OutcomeTable, fraction: f64, rng: &mut R) -> Result<VerificationStats> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!("verification fraction must lie in (0, 1), got {fraction}")));
    }
    let k = table.copies();
    let size = (fraction * k as f64).floor() as usize;
    if size == 0 {
        return Err(Error::invalid(format!("verification fraction {fraction} opens no copy out of {k}")));
    }
    let chosen = index::sample(rng, k, size).into_vec();
    table.mark_verification(chosen);

    let lts = table.lieutenant_count();
    let mut pairs = vec![PairCounts::default(); lts * (lts - 1) / 2];
    let commander = table.commander_view();
    for &i in table.verification_indices() {
        if !commander[i].is_order_symbol() {
            continue;
        }
        for a in 0..lts {
            let bit_a = table.lieutenant_view(a)[i];
            for b in a + 1..lts {
                let slot = &mut pairs[pair_slot(lts, a, b)];
                slot.samples += 1;
                if table.lieutenant_view(b)[i] != bit_a {
                    slot.mismatches += 1;
                }
            }
        }
    }
    Ok(VerificationStats { lieutenants: lts, opened: size, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::NoiseSpec;
    use crate::protocol::distribute;
    use crate::rng::seeded;

    #[test]
    fn slots_are_dense() {
        let mut seen: Vec<usize> = Vec::new();
        for a in 0..5 {
            for b in a + 1..5 {
                seen.push(pair_slot(5, a, b));
                assert_eq!(pair_slot(5, a, b), pair_slot(5, b, a));
            }
        }
        seen.sort_unstable();
        assert_eq!(seen, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn noiseless_pairs_never_mismatch() {
        let mut rng = seeded(4);
        let mut table = distribute(5, 1000, &NoiseSpec::noiseless(), &mut rng).unwrap();
        let stats = verify(&mut table, 0.2, &mut rng).unwrap();
        assert_eq!(stats.opened(), 200);
        assert_eq!(table.verification_indices().len(), 200);
        for a in 0..4 {
            for b in a + 1..4 {
                assert_eq!(stats.mismatch_rate(a, b), 0.0);
                assert_eq!(stats.pair_error(a, b), 0.0);
                assert!(stats.samples(a, b) > 0);
            }
        }
    }

    #[test]
    fn rejects_bad_fractions() {
        let mut rng = seeded(4);
        let mut table = distribute(4, 10, &NoiseSpec::noiseless(), &mut rng).unwrap();
        assert!(verify(&mut table, 0.0, &mut rng).is_err());
        assert!(verify(&mut table, 1.0, &mut rng).is_err());
        assert!(verify(&mut table, 0.05, &mut rng).is_err());
    }

    #[test]
    fn inversion_round_trips() {
        for n in 3..10 {
            for i in 0..=50 {
                let p = i as f64 / 100.0;
                let e = 2.0 * p * (1.0 - p);
                let r = expected_order_copy_mismatch(n, p);
                assert!((pair_error_from_mismatch(n, r) - e).abs() < 1e-12, "n={n} p={p}");
            }
        }
        assert_eq!(pair_error_from_mismatch(5, 0.0), 0.0);
        assert!((pair_error_from_mismatch(5, 0.5) - 0.5).abs() < 1e-12);
        assert!(pair_error_from_mismatch(5, 0.6) > 0.5);
    }
}
