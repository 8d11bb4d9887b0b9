//! Fairness transformation.
//!
//! [`fob`] walks a matching and a bid list, both sorted most competitive bid
//! first, and hands the traded units of the matching to the bids from the
//! top down, keeping each transaction's ask and price. [`foa`] does the same
//! with asks. [`fair`] composes them: asks first, then bids. Volumes are
//! preserved and the result is fair on both sides.

use std::cmp::Ordering;

use crate::error::{FairnessError, OffsetOutOfRange};
use crate::matching::{Matching, Transaction};
use crate::order::{sort_by_competitiveness, Direction, Order, OrderBookSide, Quantity, Side};
use crate::properties::is_matching;

/// Loop form of the recursive reassignment `f(M, B, t)`.
///
/// `consumed` is the quantity of the head order already traded. Case order:
/// the head transaction exactly exhausts the head order, is smaller than
/// what is left of it, or is larger.
fn reassign(m: &[Transaction], book: &[Order], side: Side, consumed: Quantity) -> Matching {
    let mut out = Vec::with_capacity(m.len() + book.len());
    let mut txs = m.iter().copied();
    let mut orders = book.iter();
    let mut head_tx = txs.next();
    let mut head_order = orders.next();
    let mut t = consumed;

    while let (Some(tx), Some(order)) = (head_tx, head_order) {
        let left = order.quantity() - t;
        let qty = tx.quantity();
        match qty.cmp(&left) {
            Ordering::Equal => {
                out.push(tx.with_order(side, order.id()));
                head_tx = txs.next();
                head_order = orders.next();
                t = 0;
            }
            Ordering::Less => {
                out.push(tx.with_order(side, order.id()));
                head_tx = txs.next();
                t += qty;
            }
            Ordering::Greater => {
                out.push(
                    Transaction::unchecked(tx.bid(), tx.ask(), left, tx.price())
                        .with_order(side, order.id()),
                );
                head_tx = Some(Transaction::unchecked(
                    tx.bid(),
                    tx.ask(),
                    qty - left,
                    tx.price(),
                ));
                head_order = orders.next();
                t = 0;
            }
        }
    }
    Matching::new(out)
}

fn sorted_by_book(m: &Matching, book: &OrderBookSide) -> bool {
    let side = book.side();
    m.transactions().windows(2).all(|w| {
        match (book.get(w[0].order(side)), book.get(w[1].order(side))) {
            (Some(x), Some(y)) => side.rank(x, y) != Ordering::Greater,
            _ => false,
        }
    })
}

fn check_offset(book: &OrderBookSide, consumed: Quantity) -> Result<(), FairnessError> {
    OffsetOutOfRange::check(book.orders().first().map(Order::quantity), consumed)?;
    Ok(())
}

/// Fair-on-bids. `m` and `bids` must both be sorted most competitive bid
/// first; this is only checked in debug builds.
pub fn fob(m: &Matching, bids: &OrderBookSide) -> Matching {
    debug_assert_eq!(bids.side(), Side::Bid);
    debug_assert!(bids.is_sorted(Direction::MostCompetitiveFirst));
    debug_assert!(sorted_by_book(m, bids), "transactions not sorted by bid");
    reassign(m.transactions(), bids.orders(), Side::Bid, 0)
}

/// Fair-on-asks, the mirror of [`fob`].
pub fn foa(m: &Matching, asks: &OrderBookSide) -> Matching {
    debug_assert_eq!(asks.side(), Side::Ask);
    debug_assert!(asks.is_sorted(Direction::MostCompetitiveFirst));
    debug_assert!(sorted_by_book(m, asks), "transactions not sorted by ask");
    reassign(m.transactions(), asks.orders(), Side::Ask, 0)
}

/// The bid reassignment started with `consumed` units of the head bid
/// already traded. Requires `consumed` below the head bid's quantity.
pub fn fob_from(
    m: &Matching,
    bids: &OrderBookSide,
    consumed: Quantity,
) -> Result<Matching, FairnessError> {
    check_offset(bids, consumed)?;
    Ok(reassign(
        m.transactions(),
        bids.orders(),
        Side::Bid,
        consumed,
    ))
}

/// Ask-side counterpart of [`fob_from`].
pub fn foa_from(
    m: &Matching,
    asks: &OrderBookSide,
    consumed: Quantity,
) -> Result<Matching, FairnessError> {
    check_offset(asks, consumed)?;
    Ok(reassign(
        m.transactions(),
        asks.orders(),
        Side::Ask,
        consumed,
    ))
}

/// Stable sort of the transactions by the competitiveness of the order they
/// reference in `book`.
pub fn sort_transactions(
    m: &Matching,
    book: &OrderBookSide,
    direction: Direction,
) -> Result<Matching, FairnessError> {
    let side = book.side();
    let mut keyed = Vec::with_capacity(m.len());
    for t in m {
        let o = book
            .get(t.order(side))
            .ok_or(FairnessError::UnknownOrder(t.order(side)))?;
        keyed.push((o, *t));
    }
    keyed.sort_by(|(x, _), (y, _)| match direction {
        Direction::MostCompetitiveFirst => side.rank(x, y),
        Direction::MostCompetitiveLast => side.rank(y, x),
    });
    Ok(keyed.into_iter().map(|(_, t)| t).collect())
}

/// Turns any matching into a fair one of the same volume.
pub fn fair(
    m: &Matching,
    bids: &OrderBookSide,
    asks: &OrderBookSide,
) -> Result<Matching, FairnessError> {
    let report = is_matching(m, bids, asks);
    if !report.holds() {
        return Err(FairnessError::NotAMatching(report));
    }
    let asks = sort_by_competitiveness(asks, Direction::MostCompetitiveFirst);
    let by_ask = sort_transactions(m, &asks, Direction::MostCompetitiveFirst)?;
    let fair_asks = foa(&by_ask, &asks);

    let bids = sort_by_competitiveness(bids, Direction::MostCompetitiveFirst);
    let by_bid = sort_transactions(&fair_asks, &bids, Direction::MostCompetitiveFirst)?;
    Ok(fob(&by_bid, &bids))
}
