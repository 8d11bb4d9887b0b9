//! Uniform-price mechanism.
//!
//! Repeatedly pairs the most competitive remaining bid with the most
//! competitive remaining ask while they cross, trading the smaller remaining
//! quantity at the ask's limit. All trades are then repriced at the last
//! provisional price. The last pair has the lowest bid limit and the highest
//! ask limit of all pairs, so the common price keeps every trade
//! individual-rational.

use crate::error::OffsetOutOfRange;
use crate::matching::{Matching, Transaction};
use crate::order::{sort_by_competitiveness, Direction, Order, OrderBookSide, Price, Quantity};

/// Provisional output before repricing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UmTrace {
    pub provisional: Matching,
    /// Price of the last provisional transaction; `None` when nothing traded.
    pub uniform_price: Option<Price>,
}

/// The pairing recursion `f_u(B, A, t_b, t_a)`.
///
/// `bids` and `asks` must be sorted most competitive first. `bid_consumed`
/// and `ask_consumed` are the quantities of the head orders already traded.
pub fn f_u(
    bids: &[Order],
    asks: &[Order],
    bid_consumed: Quantity,
    ask_consumed: Quantity,
) -> Result<UmTrace, OffsetOutOfRange> {
    OffsetOutOfRange::check(bids.first().map(Order::quantity), bid_consumed)?;
    OffsetOutOfRange::check(asks.first().map(Order::quantity), ask_consumed)?;

    let mut out = Vec::new();
    let (mut bi, mut ai) = (0, 0);
    let (mut tb, mut ta) = (bid_consumed, ask_consumed);
    while let (Some(b), Some(a)) = (bids.get(bi), asks.get(ai)) {
        if b.price() < a.price() {
            break;
        }
        let bid_left = b.quantity() - tb;
        let ask_left = a.quantity() - ta;
        let qty = bid_left.min(ask_left);
        out.push(Transaction::unchecked(b.id(), a.id(), qty, a.price()));
        if ask_left == bid_left {
            bi += 1;
            ai += 1;
            tb = 0;
            ta = 0;
        } else if ask_left > bid_left {
            bi += 1;
            tb = 0;
            ta += bid_left;
        } else {
            ai += 1;
            ta = 0;
            tb += ask_left;
        }
    }
    let uniform_price = out.last().map(Transaction::price);
    Ok(UmTrace {
        provisional: Matching::new(out),
        uniform_price,
    })
}

/// Sorts both books and runs [`f_u`] from a clean start.
pub fn um_trace(bids: &OrderBookSide, asks: &OrderBookSide) -> UmTrace {
    let bids = sort_by_competitiveness(bids, Direction::MostCompetitiveFirst);
    let asks = sort_by_competitiveness(asks, Direction::MostCompetitiveFirst);
    f_u(bids.orders(), asks.orders(), 0, 0).expect("zero offsets are always in range")
}

/// Sets every transaction's price to `price`; nothing else changes.
pub fn replace_prices(m: &Matching, price: Price) -> Matching {
    m.iter().map(|t| t.with_price(price)).collect()
}

/// Fair, individual-rational, uniform matching of maximum volume among
/// uniform individual-rational matchings.
pub fn um(bids: &OrderBookSide, asks: &OrderBookSide) -> Matching {
    let trace = um_trace(bids, asks);
    match trace.uniform_price {
        Some(p) => replace_prices(&trace.provisional, p),
        None => Matching::empty(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::volume;
    use crate::order::Side;

    fn tx(b: u64, a: u64, q: u64, p: u64) -> Transaction {
        Transaction::new(b, a, q, p).unwrap()
    }

    #[test]
    fn two_by_two() {
        let b = OrderBookSide::bids(vec![
            Order::bid(1, 1, 1, 100).unwrap(),
            Order::bid(2, 2, 1, 85).unwrap(),
        ])
        .unwrap();
        let a = OrderBookSide::asks(vec![
            Order::ask(11, 1, 1, 70).unwrap(),
            Order::ask(12, 2, 1, 90).unwrap(),
        ])
        .unwrap();
        let trace = um_trace(&b, &a);
        // Second pair stops the recursion: 85 < 90.
        assert_eq!(trace.provisional, Matching::new(vec![tx(1, 11, 1, 70)]));
        assert_eq!(um(&b, &a), Matching::new(vec![tx(1, 11, 1, 70)]));
    }

    #[test]
    fn empty_sides() {
        let b = OrderBookSide::bids(vec![Order::bid(1, 1, 1, 100).unwrap()]).unwrap();
        assert!(um(&b, &OrderBookSide::empty(Side::Ask)).is_empty());
        assert!(um(
            &OrderBookSide::empty(Side::Bid),
            &OrderBookSide::empty(Side::Ask)
        )
        .is_empty());
        assert_eq!(
            um_trace(&b, &OrderBookSide::empty(Side::Ask)).uniform_price,
            None
        );
    }

    #[test]
    fn one_bid_two_asks() {
        let b = OrderBookSide::bids(vec![Order::bid(1, 0, 3, 110).unwrap()]).unwrap();
        let a = OrderBookSide::asks(vec![
            Order::ask(11, 0, 2, 100).unwrap(),
            Order::ask(12, 1, 5, 105).unwrap(),
        ])
        .unwrap();
        let m = um(&b, &a);
        assert_eq!(m, Matching::new(vec![tx(1, 11, 2, 105), tx(1, 12, 1, 105)]));
        assert_eq!(volume(&m).unwrap(), 3);
        assert_eq!(um_trace(&b, &a).uniform_price, Some(105));
    }

    #[test]
    fn equal_remaining_quantities_advance_both() {
        let bids = [
            Order::bid(1, 0, 2, 10).unwrap(),
            Order::bid(2, 1, 1, 9).unwrap(),
        ];
        let asks = [
            Order::ask(11, 0, 2, 5).unwrap(),
            Order::ask(12, 1, 1, 6).unwrap(),
        ];
        let trace = f_u(&bids, &asks, 0, 0).unwrap();
        assert_eq!(
            trace.provisional,
            Matching::new(vec![tx(1, 11, 2, 5), tx(2, 12, 1, 6)])
        );
    }

    #[test]
    fn offsets_reduce_head_quantities() {
        let bids = [Order::bid(1, 0, 3, 10).unwrap()];
        let asks = [Order::ask(11, 0, 3, 5).unwrap()];
        let trace = f_u(&bids, &asks, 1, 2).unwrap();
        assert_eq!(trace.provisional, Matching::new(vec![tx(1, 11, 1, 5)]));
        assert!(f_u(&bids, &asks, 3, 0).is_err());
    }

    #[test]
    fn uncrossed_books_trade_nothing() {
        let bids = [Order::bid(1, 0, 3, 4).unwrap()];
        let asks = [Order::ask(11, 0, 3, 5).unwrap()];
        assert!(f_u(&bids, &asks, 0, 0).unwrap().provisional.is_empty());
    }
}
