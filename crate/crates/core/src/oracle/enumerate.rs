use crate::error::OracleError;
use crate::matching::{Matching, Transaction};
use crate::order::{Order, OrderBookSide, Price, Quantity};

use super::InstanceBudget;

/// How the enumerator assigns trade prices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pricing {
    /// Each transaction trades at its ask's limit (always IR).
    AskLimit,
    /// Each transaction trades at its bid's limit (always IR).
    BidLimit,
    /// One matching per candidate price that is IR for every pair used.
    Uniform,
}

/// Odometer over quantity assignments on the matchable (bid, ask) pairs,
/// in lexicographic order, visiting only assignments within capacity.
pub(crate) struct AssignmentWalker {
    bids: Vec<Order>,
    asks: Vec<Order>,
    pairs: Vec<(usize, usize)>,
    values: Vec<Quantity>,
    used_bid: Vec<Quantity>,
    used_ask: Vec<Quantity>,
    total: Quantity,
}

impl AssignmentWalker {
    pub(crate) fn new(bids: &OrderBookSide, asks: &OrderBookSide) -> Self {
        let bids = bids.orders().to_vec();
        let asks = asks.orders().to_vec();
        let mut pairs = Vec::new();
        for (bi, b) in bids.iter().enumerate() {
            for (ai, a) in asks.iter().enumerate() {
                if b.matchable_with(a) {
                    pairs.push((bi, ai));
                }
            }
        }
        AssignmentWalker {
            values: vec![0; pairs.len()],
            used_bid: vec![0; bids.len()],
            used_ask: vec![0; asks.len()],
            bids,
            asks,
            pairs,
            total: 0,
        }
    }

    /// Moves to the next assignment; `false` once every one was visited.
    pub(crate) fn advance(&mut self) -> bool {
        for i in (0..self.pairs.len()).rev() {
            let (bi, ai) = self.pairs[i];
            if self.used_bid[bi] < self.bids[bi].quantity()
                && self.used_ask[ai] < self.asks[ai].quantity()
            {
                self.values[i] += 1;
                self.used_bid[bi] += 1;
                self.used_ask[ai] += 1;
                self.total += 1;
                return true;
            }
            let v = std::mem::take(&mut self.values[i]);
            self.used_bid[bi] -= v;
            self.used_ask[ai] -= v;
            self.total -= v;
        }
        false
    }

    pub(crate) fn volume(&self) -> Quantity {
        self.total
    }

    fn used(&self) -> impl Iterator<Item = (&Order, &Order, Quantity)> + '_ {
        self.pairs
            .iter()
            .zip(&self.values)
            .filter(|(_, &v)| v > 0)
            .map(|(&(bi, ai), &v)| (&self.bids[bi], &self.asks[ai], v))
    }

    /// `[highest ask limit, lowest bid limit]` over the pairs in use, when
    /// non-empty. `None` also for the empty assignment.
    pub(crate) fn uniform_price_range(&self) -> Option<(Price, Price)> {
        let mut lo = 0;
        let mut hi = Price::MAX;
        let mut any = false;
        for (b, a, _) in self.used() {
            any = true;
            lo = lo.max(a.price());
            hi = hi.min(b.price());
        }
        (any && lo <= hi).then_some((lo, hi))
    }

    fn matching(&self, price: impl Fn(&Order, &Order) -> Price) -> Matching {
        self.used()
            .map(|(b, a, v)| Transaction::unchecked(b.id(), a.id(), v, price(b, a)))
            .collect()
    }
}

/// Iterator form of the exhaustive enumeration. See [`enumerate_matchings`].
pub struct MatchingEnumerator {
    walker: AssignmentWalker,
    pricing: Pricing,
    candidates: Vec<Price>,
    pending: Vec<Matching>,
    started: bool,
    done: bool,
}

impl MatchingEnumerator {
    fn expand(&mut self) {
        match self.pricing {
            Pricing::AskLimit => self.pending.push(self.walker.matching(|_, a| a.price())),
            Pricing::BidLimit => self.pending.push(self.walker.matching(|b, _| b.price())),
            Pricing::Uniform => {
                if self.walker.volume() == 0 {
                    self.pending.push(Matching::empty());
                } else if let Some((lo, hi)) = self.walker.uniform_price_range() {
                    // Reverse so that `pop` yields ascending prices.
                    for &p in self.candidates.iter().rev() {
                        if lo <= p && p <= hi {
                            self.pending.push(self.walker.matching(|_, _| p));
                        }
                    }
                }
            }
        }
    }
}

impl Iterator for MatchingEnumerator {
    type Item = Matching;

    fn next(&mut self) -> Option<Matching> {
        loop {
            if let Some(m) = self.pending.pop() {
                return Some(m);
            }
            if self.done {
                return None;
            }
            if self.started && !self.walker.advance() {
                self.done = true;
                return None;
            }
            self.started = true;
            self.expand();
        }
    }
}

/// Every matching of the instance: all capacity-respecting quantity
/// assignments over matchable pairs, priced per `pricing`. Transactions
/// follow book order; zero-quantity pairs are omitted.
pub fn enumerate_matchings(
    bids: &OrderBookSide,
    asks: &OrderBookSide,
    budget: &InstanceBudget,
    pricing: Pricing,
) -> Result<MatchingEnumerator, OracleError> {
    budget.admit(bids, asks)?;
    Ok(MatchingEnumerator {
        walker: AssignmentWalker::new(bids, asks),
        pricing,
        candidates: budget.price_candidates(bids, asks),
        pending: Vec::new(),
        started: false,
        done: false,
    })
}
