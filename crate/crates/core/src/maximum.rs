//! Maximum-volume mechanism.
//!
//! Pairs the most competitive bid with the least competitive ask it can
//! trade with, trading the smaller remaining quantity at the ask's limit. An
//! ask that the current bid cannot afford is dropped, since every later bid
//! is cheaper still. The result is made fair on asks with [`foa`]; it is
//! already fair on bids and [`foa`] keeps per-bid volumes.
//!
//! The carried consumed quantities mirror the uniform mechanism: when the
//! ask outlasts the bid the ask's consumed count grows by what the bid had
//! left, and vice versa.

use crate::error::OffsetOutOfRange;
use crate::fairness::{foa, sort_transactions};
use crate::matching::{Matching, Transaction};
use crate::order::{sort_by_competitiveness, Direction, Order, OrderBookSide, Quantity};

/// The pairing recursion `f_m(B, A, t_b, t_a)`.
///
/// `bids` sorted most competitive first, `asks` sorted most competitive
/// last.
pub fn f_m(
    bids: &[Order],
    asks: &[Order],
    bid_consumed: Quantity,
    ask_consumed: Quantity,
) -> Result<Matching, OffsetOutOfRange> {
    OffsetOutOfRange::check(bids.first().map(Order::quantity), bid_consumed)?;
    OffsetOutOfRange::check(asks.first().map(Order::quantity), ask_consumed)?;

    let mut out = Vec::new();
    let (mut bi, mut ai) = (0, 0);
    let (mut tb, mut ta) = (bid_consumed, ask_consumed);
    while let (Some(b), Some(a)) = (bids.get(bi), asks.get(ai)) {
        if b.price() < a.price() {
            ai += 1;
            ta = 0;
            continue;
        }
        let bid_left = b.quantity() - tb;
        let ask_left = a.quantity() - ta;
        out.push(Transaction::unchecked(
            b.id(),
            a.id(),
            bid_left.min(ask_left),
            a.price(),
        ));
        if ask_left == bid_left {
            bi += 1;
            ai += 1;
            tb = 0;
            ta = 0;
        } else if ask_left < bid_left {
            ai += 1;
            ta = 0;
            tb += ask_left;
        } else {
            bi += 1;
            tb = 0;
            ta += bid_left;
        }
    }
    Ok(Matching::new(out))
}

/// Fair, individual-rational matching of maximum volume.
pub fn mm(bids: &OrderBookSide, asks: &OrderBookSide) -> Matching {
    let bids = sort_by_competitiveness(bids, Direction::MostCompetitiveFirst);
    let asks_last = sort_by_competitiveness(asks, Direction::MostCompetitiveLast);
    let raw = f_m(bids.orders(), asks_last.orders(), 0, 0).expect("zero offsets are in range");

    let asks_first = sort_by_competitiveness(asks, Direction::MostCompetitiveFirst);
    let by_ask = sort_transactions(&raw, &asks_first, Direction::MostCompetitiveFirst)
        .expect("f_m only emits asks from the book");
    foa(&by_ask, &asks_first)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::{order_volume, volume};
    use crate::order::{OrderId, Side};

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
        let bs = sort_by_competitiveness(&b, Direction::MostCompetitiveFirst);
        let al = sort_by_competitiveness(&a, Direction::MostCompetitiveLast);
        // 100 trades with the 90 ask, then 85 with the 70 ask.
        assert_eq!(
            f_m(bs.orders(), al.orders(), 0, 0).unwrap(),
            Matching::new(vec![tx(1, 12, 1, 90), tx(2, 11, 1, 70)])
        );
        let m = mm(&b, &a);
        assert_eq!(volume(&m).unwrap(), 2);
        for id in [1, 2] {
            assert_eq!(order_volume(Side::Bid, OrderId(id), &m).unwrap(), 1);
        }
        for id in [11, 12] {
            assert_eq!(order_volume(Side::Ask, OrderId(id), &m).unwrap(), 1);
        }
    }

    #[test]
    fn empty_bids() {
        let a = OrderBookSide::asks(vec![Order::ask(11, 1, 1, 70).unwrap()]).unwrap();
        assert!(mm(&OrderBookSide::empty(Side::Bid), &a).is_empty());
    }

    #[test]
    fn one_bid_takes_least_competitive_ask_first() {
        let bids = [Order::bid(1, 0, 2, 100).unwrap()];
        let asks_last = [
            Order::ask(12, 1, 1, 80).unwrap(),
            Order::ask(11, 0, 1, 60).unwrap(),
        ];
        assert_eq!(
            f_m(&bids, &asks_last, 0, 0).unwrap(),
            Matching::new(vec![tx(1, 12, 1, 80), tx(1, 11, 1, 60)])
        );
        let b = OrderBookSide::bids(bids.to_vec()).unwrap();
        let a = OrderBookSide::asks(asks_last.to_vec()).unwrap();
        assert_eq!(volume(&mm(&b, &a)).unwrap(), 2);
    }

    #[test]
    fn unaffordable_asks_are_skipped() {
        let bids = [Order::bid(1, 0, 2, 50).unwrap()];
        let asks_last = [
            Order::ask(12, 1, 1, 80).unwrap(),
            Order::ask(11, 0, 1, 60).unwrap(),
        ];
        assert!(f_m(&bids, &asks_last, 0, 0).unwrap().is_empty());

        let asks_last = [
            Order::ask(12, 1, 1, 80).unwrap(),
            Order::ask(11, 0, 3, 40).unwrap(),
        ];
        assert_eq!(
            f_m(&bids, &asks_last, 0, 0).unwrap(),
            Matching::new(vec![tx(1, 11, 2, 40)])
        );
    }

    #[test]
    fn single_unit_pair() {
        let bids = [Order::bid(1, 0, 1, 50).unwrap()];
        let asks = [Order::ask(11, 0, 1, 45).unwrap()];
        assert_eq!(
            f_m(&bids, &asks, 0, 0).unwrap(),
            Matching::new(vec![tx(1, 11, 1, 45)])
        );
    }

    #[test]
    fn carried_quantities_respect_capacity() {
        // Bid 3 units, asks 2 and 2 (least competitive first): 2 + 1.
        let bids = [
            Order::bid(1, 0, 3, 100).unwrap(),
            Order::bid(2, 1, 4, 90).unwrap(),
        ];
        let asks = [
            Order::ask(12, 1, 2, 80).unwrap(),
            Order::ask(11, 0, 2, 60).unwrap(),
        ];
        assert_eq!(
            f_m(&bids, &asks, 0, 0).unwrap(),
            Matching::new(vec![tx(1, 12, 2, 80), tx(1, 11, 1, 60), tx(2, 11, 1, 60)])
        );
    }
}
