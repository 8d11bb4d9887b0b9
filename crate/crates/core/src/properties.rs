//! Executable predicates over matchings.
//!
//! Every predicate returns a [`PropertyReport`]; a failing report carries a
//! [`Witness`] naming the offending transaction or orders. Empty matchings
//! satisfy every predicate vacuously.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::matching::{volume, Matching, Transaction};
use crate::order::{
    demand_at, sort_by_competitiveness, supply_at, Direction, OrderBookSide, OrderId, Price,
    Quantity, Side, MAX_PRICE,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    UnknownOrder {
        side: Side,
        id: OrderId,
        transaction: Transaction,
    },
    Unmatchable {
        transaction: Transaction,
        bid_price: Price,
        ask_price: Price,
    },
    OverCapacity {
        side: Side,
        id: OrderId,
        traded: Quantity,
        quantity: Quantity,
    },
    NotIndividuallyRational {
        transaction: Transaction,
        bid_price: Price,
        ask_price: Price,
    },
    NonUniform {
        first: Transaction,
        other: Transaction,
    },
    Unfair {
        side: Side,
        more_competitive: OrderId,
        traded: Quantity,
        quantity: Quantity,
        less_competitive: OrderId,
    },
    VolumeBound {
        price: Price,
        volume: Quantity,
        demand: Quantity,
        supply: Quantity,
    },
    VolumeMismatch {
        side: Side,
        id: OrderId,
        left: Quantity,
        right: Quantity,
    },
    Overflow,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::UnknownOrder {
                side,
                id,
                transaction,
            } => write!(f, "{transaction} references unknown {side} {id}"),
            Witness::Unmatchable {
                transaction,
                bid_price,
                ask_price,
            } => write!(
                f,
                "{transaction} pairs bid limit {bid_price} with higher ask limit {ask_price}"
            ),
            Witness::OverCapacity {
                side,
                id,
                traded,
                quantity,
            } => write!(f, "{side} {id} trades {traded} but offers only {quantity}"),
            Witness::NotIndividuallyRational {
                transaction,
                bid_price,
                ask_price,
            } => write!(
                f,
                "{transaction} price outside limit interval [{ask_price}, {bid_price}]"
            ),
            Witness::NonUniform { first, other } => {
                write!(f, "{first} and {other} trade at different prices")
            }
            Witness::Unfair {
                side,
                more_competitive,
                traded,
                quantity,
                less_competitive,
            } => write!(
                f,
                "{side} {less_competitive} trades while more competitive {side} \
                 {more_competitive} has {traded} of {quantity} filled"
            ),
            Witness::VolumeBound {
                price,
                volume,
                demand,
                supply,
            } => write!(
                f,
                "volume {volume} exceeds demand {demand} + supply {supply} at price {price}"
            ),
            Witness::VolumeMismatch {
                side,
                id,
                left,
                right,
            } => write!(
                f,
                "{side} {id} trades {left} in one matching and {right} in the other"
            ),
            Witness::Overflow => f.write_str("quantity overflow"),
        }
    }
}

/// Outcome of one predicate. The property holds iff there is no witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyReport {
    pub property: &'static str,
    pub witness: Option<Witness>,
}

impl PropertyReport {
    pub fn pass(property: &'static str) -> Self {
        PropertyReport {
            property,
            witness: None,
        }
    }

    pub fn fail(property: &'static str, witness: Witness) -> Self {
        PropertyReport {
            property,
            witness: Some(witness),
        }
    }

    fn from_result(property: &'static str, r: Result<(), Witness>) -> Self {
        PropertyReport {
            property,
            witness: r.err(),
        }
    }

    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }

    /// Conjunction: the first failing report wins.
    pub fn and(self, property: &'static str, other: PropertyReport) -> PropertyReport {
        match (self.witness, other.witness) {
            (Some(w), _) | (None, Some(w)) => PropertyReport::fail(property, w),
            (None, None) => PropertyReport::pass(property),
        }
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            None => write!(f, "{}: holds", self.property),
            Some(w) => write!(f, "{}: fails ({w})", self.property),
        }
    }
}

fn limits(
    t: &Transaction,
    bids: &OrderBookSide,
    asks: &OrderBookSide,
) -> Result<(Price, Price), Witness> {
    let bid = bids.get(t.bid()).ok_or(Witness::UnknownOrder {
        side: Side::Bid,
        id: t.bid(),
        transaction: *t,
    })?;
    let ask = asks.get(t.ask()).ok_or(Witness::UnknownOrder {
        side: Side::Ask,
        id: t.ask(),
        transaction: *t,
    })?;
    Ok((bid.price(), ask.price()))
}

fn capacity(m: &Matching, book: &OrderBookSide) -> Result<(), Witness> {
    let side = book.side();
    let mut traded: HashMap<OrderId, Quantity> = HashMap::new();
    for t in m {
        let v = traded.entry(t.order(side)).or_insert(0);
        *v = v.saturating_add(t.quantity());
    }
    for o in book {
        let v = traded.get(&o.id()).copied().unwrap_or(0);
        if v > o.quantity() {
            return Err(Witness::OverCapacity {
                side,
                id: o.id(),
                traded: v,
                quantity: o.quantity(),
            });
        }
    }
    Ok(())
}

/// All five matching conditions: matchable pairs, bids and asks drawn from
/// the books, and no order traded beyond its quantity.
pub fn is_matching(m: &Matching, bids: &OrderBookSide, asks: &OrderBookSide) -> PropertyReport {
    let check = || -> Result<(), Witness> {
        for t in m {
            let (bid_price, ask_price) = limits(t, bids, asks)?;
            if ask_price > bid_price {
                return Err(Witness::Unmatchable {
                    transaction: *t,
                    bid_price,
                    ask_price,
                });
            }
        }
        capacity(m, bids)?;
        capacity(m, asks)
    };
    PropertyReport::from_result("matching", check())
}

/// Every trade price lies within `[ask limit, bid limit]`.
pub fn is_ir(m: &Matching, bids: &OrderBookSide, asks: &OrderBookSide) -> PropertyReport {
    let check = || -> Result<(), Witness> {
        for t in m {
            let (bid_price, ask_price) = limits(t, bids, asks)?;
            if t.price() < ask_price || t.price() > bid_price {
                return Err(Witness::NotIndividuallyRational {
                    transaction: *t,
                    bid_price,
                    ask_price,
                });
            }
        }
        Ok(())
    };
    PropertyReport::from_result("individual-rational", check())
}

pub fn is_uniform(m: &Matching) -> PropertyReport {
    let first = m.transactions().first();
    let bad = first.and_then(|f| m.iter().find(|t| t.price() != f.price()));
    match (first, bad) {
        (Some(first), Some(other)) => PropertyReport::fail(
            "uniform",
            Witness::NonUniform {
                first: *first,
                other: *other,
            },
        ),
        _ => PropertyReport::pass("uniform"),
    }
}

/// Fairness on one side, evaluated in one pass over the book sorted most
/// competitive first: once the least competitive participating order is
/// located, every order ahead of it must be fully traded.
fn fair_on(m: &Matching, book: &OrderBookSide) -> Result<(), Witness> {
    let side = book.side();
    let mut traded: HashMap<OrderId, Quantity> = HashMap::new();
    for t in m {
        let v = traded.entry(t.order(side)).or_insert(0);
        *v = v.saturating_add(t.quantity());
    }
    let sorted = sort_by_competitiveness(book, Direction::MostCompetitiveFirst);
    let orders = sorted.orders();
    let vol = |i: usize| traded.get(&orders[i].id()).copied().unwrap_or(0);
    let Some(last) = (0..orders.len()).rev().find(|&i| vol(i) >= 1) else {
        return Ok(());
    };
    match (0..last).find(|&i| vol(i) != orders[i].quantity()) {
        Some(i) => Err(Witness::Unfair {
            side,
            more_competitive: orders[i].id(),
            traded: vol(i),
            quantity: orders[i].quantity(),
            less_competitive: orders[last].id(),
        }),
        None => Ok(()),
    }
}

pub fn is_fair_on_bids(m: &Matching, bids: &OrderBookSide) -> PropertyReport {
    PropertyReport::from_result("fair on bids", fair_on(m, bids))
}

pub fn is_fair_on_asks(m: &Matching, asks: &OrderBookSide) -> PropertyReport {
    PropertyReport::from_result("fair on asks", fair_on(m, asks))
}

pub fn is_fair(m: &Matching, bids: &OrderBookSide, asks: &OrderBookSide) -> PropertyReport {
    is_fair_on_bids(m, bids).and("fair", is_fair_on_asks(m, asks))
}

/// `Q(M) <= Q(B>=p) + Q(A<=p)`.
pub fn check_volume_bound(
    m: &Matching,
    bids: &OrderBookSide,
    asks: &OrderBookSide,
    price: Price,
) -> PropertyReport {
    let check = || -> Result<(), Witness> {
        let vol = volume(m).map_err(|_| Witness::Overflow)?;
        let demand = demand_at(bids, price).map_err(|_| Witness::Overflow)?;
        let supply = supply_at(asks, price).map_err(|_| Witness::Overflow)?;
        if u128::from(vol) > u128::from(demand) + u128::from(supply) {
            return Err(Witness::VolumeBound {
                price,
                volume: vol,
                demand,
                supply,
            });
        }
        Ok(())
    };
    PropertyReport::from_result("volume bound", check())
}

/// Prices at which the demand+supply bound can change value: every limit
/// price in either book, plus 0 and [`MAX_PRICE`].
pub fn candidate_prices(bids: &OrderBookSide, asks: &OrderBookSide) -> Vec<Price> {
    let mut set: BTreeSet<Price> = bids.iter().chain(asks).map(|o| o.price()).collect();
    set.insert(0);
    set.insert(MAX_PRICE);
    set.into_iter().collect()
}

/// [`check_volume_bound`] at every candidate price; first failure wins.
pub fn check_volume_bound_sweep(
    m: &Matching,
    bids: &OrderBookSide,
    asks: &OrderBookSide,
) -> PropertyReport {
    candidate_prices(bids, asks)
        .into_iter()
        .map(|p| check_volume_bound(m, bids, asks, p))
        .find(|r| !r.holds())
        .unwrap_or_else(|| PropertyReport::pass("volume bound"))
}
