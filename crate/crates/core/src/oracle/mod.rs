//! Brute-force references for small books.
//!
//! Everything here works by exhaustion or by an independent formulation and
//! shares no code path with the mechanisms it certifies. Budgets are hard
//! limits: an oracle refuses an instance it cannot enumerate quickly.
//!
//! Uniform optimum. At a common price `p`, every bid with limit `>= p` can
//! trade with every ask with limit `<= p`, so the qualifying orders form a
//! complete bipartite transportation problem and any volume up to
//! `min(demand(p), supply(p))` is reachable. The optimum over uniform
//! individual-rational matchings is therefore the maximum of that minimum
//! over candidate prices; [`optimal_uniform_volume_exhaustive`] confirms the
//! formula by enumeration.

mod enumerate;
mod flow;
mod generate;

use std::collections::BTreeSet;

pub use enumerate::{enumerate_matchings, MatchingEnumerator, Pricing};
pub use flow::max_flow_volume;
pub use generate::{random_instance, Instance, TimestampPolicy};

use crate::error::{CoreError, OracleError};
use crate::matching::{volume, Matching};
use crate::order::{demand_at, supply_at, OrderBookSide, Price, Quantity};
use crate::properties::{is_fair, is_ir, is_matching, is_uniform};

/// Upper bound on the number of quantity assignments an oracle may visit.
pub const ENUMERATION_CAP: u128 = 2_000_000;

/// Size limits for instances handed to the exhaustive oracles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceBudget {
    pub max_orders_per_side: usize,
    pub max_quantity: Quantity,
    /// Prices used by the instance generator and as uniform-price
    /// candidates (alongside the instance's own limits).
    pub prices: Vec<Price>,
}

impl Default for InstanceBudget {
    fn default() -> Self {
        InstanceBudget {
            max_orders_per_side: 4,
            max_quantity: 3,
            prices: (0..=5).collect(),
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of ways one order of quantity `q` can spread at most `q` units
/// over `k` counterparties: `C(q + k, k)`.
fn spreads(q: Quantity, k: usize) -> u128 {
    binomial(u128::from(q) + k as u128, k as u128)
}

impl InstanceBudget {
    /// Worst-case assignment count: every bid of maximal quantity facing
    /// every ask.
    pub fn worst_case(&self) -> u128 {
        let n = self.max_orders_per_side;
        spreads(self.max_quantity, n).saturating_pow(n as u32)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.max_quantity == 0 {
            return Err(OracleError::BudgetTooLarge(
                "max quantity must be positive".into(),
            ));
        }
        if self.prices.is_empty() || self.prices.len() > 64 {
            return Err(OracleError::BudgetTooLarge(format!(
                "price universe has {} entries, expected 1..=64",
                self.prices.len()
            )));
        }
        if self.max_orders_per_side > 8 || self.worst_case() > ENUMERATION_CAP {
            return Err(OracleError::BudgetTooLarge(format!(
                "{} orders per side with quantity up to {} may need {} assignments (cap {})",
                self.max_orders_per_side,
                self.max_quantity,
                self.worst_case(),
                ENUMERATION_CAP
            )));
        }
        Ok(())
    }

    /// Refuses instances outside the budget.
    pub fn admit(&self, bids: &OrderBookSide, asks: &OrderBookSide) -> Result<(), OracleError> {
        self.validate()?;
        for book in [bids, asks] {
            if book.len() > self.max_orders_per_side {
                return Err(OracleError::BudgetExceeded(format!(
                    "{} {}s, budget allows {}",
                    book.len(),
                    book.side(),
                    self.max_orders_per_side
                )));
            }
            if let Some(o) = book.iter().find(|o| o.quantity() > self.max_quantity) {
                return Err(OracleError::BudgetExceeded(format!(
                    "{} {} has quantity {}, budget allows {}",
                    o.side(),
                    o.id(),
                    o.quantity(),
                    self.max_quantity
                )));
            }
        }
        Ok(())
    }

    /// Uniform-price candidates: the price universe plus every limit.
    pub fn price_candidates(&self, bids: &OrderBookSide, asks: &OrderBookSide) -> Vec<Price> {
        let set: BTreeSet<Price> = self
            .prices
            .iter()
            .copied()
            .chain(bids.iter().chain(asks).map(|o| o.price()))
            .collect();
        set.into_iter().collect()
    }
}

/// Largest volume over all matchings, by exhaustion.
pub fn max_volume_oracle(
    bids: &OrderBookSide,
    asks: &OrderBookSide,
    budget: &InstanceBudget,
) -> Result<Quantity, OracleError> {
    budget.admit(bids, asks)?;
    let mut walker = enumerate::AssignmentWalker::new(bids, asks);
    let mut best = 0;
    loop {
        best = best.max(walker.volume());
        if !walker.advance() {
            return Ok(best);
        }
    }
}

/// `max_p min(demand(p), supply(p))` over every limit price in either book.
pub fn optimal_uniform_volume(
    bids: &OrderBookSide,
    asks: &OrderBookSide,
) -> Result<Quantity, CoreError> {
    let prices: BTreeSet<Price> = bids.iter().chain(asks).map(|o| o.price()).collect();
    let mut best = 0;
    for p in prices {
        best = best.max(demand_at(bids, p)?.min(supply_at(asks, p)?));
    }
    Ok(best)
}

/// Largest volume over uniform individual-rational matchings, by
/// exhaustion: an assignment admits a common IR price iff the highest ask
/// limit it uses is at most the lowest bid limit it uses.
pub fn optimal_uniform_volume_exhaustive(
    bids: &OrderBookSide,
    asks: &OrderBookSide,
    budget: &InstanceBudget,
) -> Result<Quantity, OracleError> {
    budget.admit(bids, asks)?;
    let mut walker = enumerate::AssignmentWalker::new(bids, asks);
    let mut best = 0;
    loop {
        if walker.uniform_price_range().is_some() {
            best = best.max(walker.volume());
        }
        if !walker.advance() {
            return Ok(best);
        }
    }
}

/// Every fair, optimal, uniform individual-rational matching of the
/// instance (one per assignment and admissible candidate price).
pub fn enumerate_fair_optimal(
    bids: &OrderBookSide,
    asks: &OrderBookSide,
    budget: &InstanceBudget,
) -> Result<Vec<Matching>, OracleError> {
    let optimum = optimal_uniform_volume(bids, asks)
        .map_err(|e| OracleError::BudgetExceeded(e.to_string()))?;
    let all = enumerate_matchings(bids, asks, budget, Pricing::Uniform)?;
    Ok(all
        .filter(|m| {
            volume(m).ok() == Some(optimum)
                && is_matching(m, bids, asks).holds()
                && is_ir(m, bids, asks).holds()
                && is_uniform(m).holds()
                && is_fair(m, bids, asks).holds()
        })
        .collect())
}
