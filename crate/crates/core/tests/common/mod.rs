#![allow(dead_code)]

use call_auction::oracle::{
    enumerate_matchings, random_instance, Instance, InstanceBudget, Pricing, TimestampPolicy,
};
use call_auction::{Matching, Order, OrderBookSide, Side};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn instance(seed: u64, policy: TimestampPolicy) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_instance(&mut rng, &InstanceBudget::default(), policy)
}

/// Every matching of `inst` priced at ask limits.
pub fn all_matchings(inst: &Instance) -> Vec<Matching> {
    enumerate_matchings(
        &inst.bids,
        &inst.asks,
        &InstanceBudget::default(),
        Pricing::AskLimit,
    )
    .unwrap()
    .collect()
}

/// The `pick`-th enumerated matching, wrapping around.
pub fn some_matching(inst: &Instance, pick: usize) -> Matching {
    let all = all_matchings(inst);
    all[pick % all.len()].clone()
}

pub fn book(side: Side, rows: &[(u64, u64, u64, u64)]) -> OrderBookSide {
    let orders = rows
        .iter()
        .map(|&(id, ts, q, p)| Order::new(side, id, ts, q, p).unwrap())
        .collect();
    OrderBookSide::new(side, orders).unwrap()
}

/// Quadratic fairness check straight from the definition: whenever a less
/// competitive order trades, every more competitive one is fully traded.
pub fn brute_force_fair(m: &Matching, book: &OrderBookSide) -> bool {
    let side = book.side();
    let traded = |o: &Order| -> u64 {
        m.iter()
            .filter(|t| t.order(side) == o.id())
            .map(|t| t.quantity())
            .sum()
    };
    book.iter().all(|o1| {
        book.iter().all(|o2| {
            side.rank(o1, o2) != std::cmp::Ordering::Less
                || traded(o2) == 0
                || traded(o1) == o1.quantity()
        })
    })
}
