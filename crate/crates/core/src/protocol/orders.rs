use rand::Rng;
use serde::{Deserialize, Serialize};

use super::table::OutcomeTable;
use super::{GeneralId, Order};
use crate::adversary::{traitor_commander_assign, CommanderStrategy};
use crate::error::{Error, Result};

/// What one lieutenant got from the commander.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceivedOrder {
    pub order: Order,
    /// Copy indices offered as evidence for `order`, ascending.
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderAssignment {
    /// The order a loyal commander issued; `None` when the commander is a traitor.
    pub commander_order: Option<Order>,
    /// One entry per lieutenant position.
    pub received: Vec<ReceivedOrder>,
}

pub fn issue_orders<R: Rng + ?Sized>(
    table: &OutcomeTable,
    commander: GeneralId,
    strategy: CommanderStrategy,
    rng: &mut R,
) -> Result<OrderAssignment> {
    if commander.is_traitor() {
        let received = traitor_commander_assign(strategy, table, rng)?;
        return Ok(OrderAssignment { commander_order: None, received });
    }
    let order = match strategy {
        CommanderStrategy::LoyalFixed(order) => order,
        CommanderStrategy::LoyalRandom => {
            if rng.gen_bool(0.5) {
                Order::Attack
            } else {
                Order::Retreat
            }
        }
        other => {
            return Err(Error::invalid(format!("strategy `{other}` is not available to a loyal commander")));
        }
    };
    let indices = table.unspent_with_symbol(order.symbol());
    if indices.is_empty() {
        return Err(Error::Degenerate(format!("no unspent copy backs the {order} order")));
    }
    let received = vec![ReceivedOrder { order, indices }; table.lieutenant_count()];
    Ok(OrderAssignment { commander_order: Some(order), received })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::{CommanderSymbol, NoiseSpec};
    use crate::protocol::{distribute, verify, Loyalty};
    use crate::rng::seeded;

    #[test]
    fn loyal_attack_shares_one_list() {
        let mut rng = seeded(9);
        let mut table = distribute(4, 300, &NoiseSpec::noiseless(), &mut rng).unwrap();
        verify(&mut table, 0.2, &mut rng).unwrap();
        let out = issue_orders(
            &table,
            GeneralId::commander(Loyalty::Loyal),
            CommanderStrategy::LoyalFixed(Order::Attack),
            &mut rng,
        )
        .unwrap();
        assert_eq!(out.commander_order, Some(Order::Attack));
        let first = &out.received[0];
        assert!(out.received.iter().all(|r| r == first));
        // 240 unspent copies, each backing Attack with probability 1/3.
        let sigma = (240.0_f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        assert!((first.indices.len() as f64 - 80.0).abs() < 3.0 * sigma);
        assert!(first.indices.iter().all(|&i| !table.is_verification(i)));
    }

    #[test]
    fn loyal_retreat_indices_read_one_everywhere() {
        let mut rng = seeded(10);
        let mut table = distribute(5, 500, &NoiseSpec::noiseless(), &mut rng).unwrap();
        verify(&mut table, 0.2, &mut rng).unwrap();
        let out = issue_orders(
            &table,
            GeneralId::commander(Loyalty::Loyal),
            CommanderStrategy::LoyalFixed(Order::Retreat),
            &mut rng,
        )
        .unwrap();
        for &i in &out.received[0].indices {
            assert!((0..4).all(|j| table.lieutenant_view(j)[i]));
        }
    }

    #[test]
    fn degenerate_when_nothing_matches() {
        let commander = vec![CommanderSymbol::C00; 10];
        let lts = vec![vec![true; 10]; 2];
        let table = OutcomeTable::from_columns(commander, lts).unwrap();
        let err = issue_orders(
            &table,
            GeneralId::commander(Loyalty::Loyal),
            CommanderStrategy::LoyalFixed(Order::Attack),
            &mut seeded(0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }

    #[test]
    fn loyal_commander_cannot_split() {
        let mut rng = seeded(1);
        let table = distribute(4, 50, &NoiseSpec::noiseless(), &mut rng).unwrap();
        let err = issue_orders(&table, GeneralId::commander(Loyalty::Loyal), CommanderStrategy::HalfSplit, &mut rng);
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
    }
}
