use rand::seq::SliceRandom;
use rand::Rng;

use crate::order::{Order, OrderBookSide, Side};

use super::InstanceBudget;

/// A bid book and an ask book.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub bids: OrderBookSide,
    pub asks: OrderBookSide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimestampPolicy {
    /// A permutation per side: competitiveness never falls back to ids.
    Distinct,
    /// Small random timestamps, so equal (price, timestamp) pairs occur.
    AllowTies,
}

/// First ask id; bids are numbered from 1.
const ASK_ID_BASE: u64 = 1001;

fn side<R: Rng + ?Sized>(
    rng: &mut R,
    budget: &InstanceBudget,
    side: Side,
    policy: TimestampPolicy,
) -> OrderBookSide {
    let n = rng.random_range(0..=budget.max_orders_per_side);
    let mut stamps: Vec<u64> = (0..n as u64).collect();
    stamps.shuffle(rng);
    let base = match side {
        Side::Bid => 1,
        Side::Ask => ASK_ID_BASE,
    };
    let orders = (0..n)
        .map(|i| {
            let ts = match policy {
                TimestampPolicy::Distinct => stamps[i],
                TimestampPolicy::AllowTies => rng.random_range(0..=1),
            };
            let q = rng.random_range(1..=budget.max_quantity);
            let p = budget.prices[rng.random_range(0..budget.prices.len())];
            Order::new(side, base + i as u64, ts, q, p).expect("quantity is positive")
        })
        .collect();
    OrderBookSide::new(side, orders).expect("ids are distinct")
}

/// A random instance inside `budget`.
pub fn random_instance<R: Rng + ?Sized>(
    rng: &mut R,
    budget: &InstanceBudget,
    policy: TimestampPolicy,
) -> Instance {
    let bids = side(rng, budget, Side::Bid, policy);
    let asks = side(rng, budget, Side::Ask, policy);
    Instance { bids, asks }
}
