//! Transactions, matchings and their quantity aggregates.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::CoreError;
use crate::order::{checked_sum, Order, OrderId, Price, Quantity, Side};

/// A trade between one bid and one ask. Orders are referenced by id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transaction {
    bid: OrderId,
    ask: OrderId,
    quantity: Quantity,
    price: Price,
}

impl Transaction {
    pub fn new(
        bid: impl Into<OrderId>,
        ask: impl Into<OrderId>,
        quantity: Quantity,
        price: Price,
    ) -> Result<Self, CoreError> {
        let (bid, ask) = (bid.into(), ask.into());
        if quantity == 0 {
            return Err(CoreError::ZeroTradeQuantity { bid, ask });
        }
        Ok(Transaction {
            bid,
            ask,
            quantity,
            price,
        })
    }

    /// Callers guarantee `quantity >= 1`.
    pub(crate) fn unchecked(bid: OrderId, ask: OrderId, quantity: Quantity, price: Price) -> Self {
        debug_assert!(quantity >= 1);
        Transaction {
            bid,
            ask,
            quantity,
            price,
        }
    }

    pub fn bid(&self) -> OrderId {
        self.bid
    }

    pub fn ask(&self) -> OrderId {
        self.ask
    }

    pub fn quantity(&self) -> Quantity {
        self.quantity
    }

    pub fn price(&self) -> Price {
        self.price
    }

    /// The order this transaction references on `side`.
    pub fn order(&self, side: Side) -> OrderId {
        match side {
            Side::Bid => self.bid,
            Side::Ask => self.ask,
        }
    }

    pub fn with_price(&self, price: Price) -> Self {
        Transaction { price, ..*self }
    }

    pub(crate) fn with_order(&self, side: Side, id: OrderId) -> Self {
        match side {
            Side::Bid => Transaction { bid: id, ..*self },
            Side::Ask => Transaction { ask: id, ..*self },
        }
    }
}

impl fmt::Display for Transaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(bid {}, ask {}, qty {}, price {})",
            self.bid, self.ask, self.quantity, self.price
        )
    }
}

/// An ordered list of transactions. Whether it is a valid matching for a
/// given pair of books is decided by [`crate::properties::is_matching`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Matching {
    transactions: Vec<Transaction>,
}

impl Matching {
    pub fn new(transactions: Vec<Transaction>) -> Self {
        Matching { transactions }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn into_transactions(self) -> Vec<Transaction> {
        self.transactions
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Transaction> {
        self.transactions.iter()
    }

    /// Per-order traded volume on one side, keyed by id.
    pub fn volumes(&self, side: Side) -> Result<HashMap<OrderId, Quantity>, CoreError> {
        let mut out: HashMap<OrderId, Quantity> = HashMap::new();
        for t in &self.transactions {
            let v = out.entry(t.order(side)).or_insert(0);
            *v = v.checked_add(t.quantity).ok_or(CoreError::Overflow)?;
        }
        Ok(out)
    }

    /// Multiset of `(bid, ask, quantity)` ignoring prices and transaction
    /// order, with quantities of repeated pairs summed.
    pub fn pair_profile(&self) -> BTreeMap<(OrderId, OrderId), Quantity> {
        let mut out = BTreeMap::new();
        for t in &self.transactions {
            *out.entry((t.bid, t.ask)).or_insert(0u64) += t.quantity;
        }
        out
    }

    /// Transactions sorted into a canonical order, for set-like comparison.
    pub fn canonical(&self) -> Vec<Transaction> {
        let mut v = self.transactions.clone();
        v.sort();
        v
    }
}

impl FromIterator<Transaction> for Matching {
    fn from_iter<I: IntoIterator<Item = Transaction>>(iter: I) -> Self {
        Matching::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Matching {
    type Item = &'a Transaction;
    type IntoIter = std::slice::Iter<'a, Transaction>;

    fn into_iter(self) -> Self::IntoIter {
        self.transactions.iter()
    }
}

/// Total traded quantity `Q(M)`.
pub fn volume(m: &Matching) -> Result<Quantity, CoreError> {
    checked_sum(m.iter().map(|t| t.quantity))
}

/// `Q(ω, M)`: quantity traded by the order with `id` on `side`.
pub fn order_volume(side: Side, id: OrderId, m: &Matching) -> Result<Quantity, CoreError> {
    checked_sum(m.iter().filter(|t| t.order(side) == id).map(|t| t.quantity))
}

/// Convenience form of [`order_volume`] taking the order itself.
pub fn volume_of(order: &Order, m: &Matching) -> Result<Quantity, CoreError> {
    order_volume(order.side(), order.id(), m)
}

/// `Q(a <-> b, M)`: quantity traded between one bid and one ask.
pub fn pair_volume(bid: OrderId, ask: OrderId, m: &Matching) -> Result<Quantity, CoreError> {
    checked_sum(
        m.iter()
            .filter(|t| t.bid == bid && t.ask == ask)
            .map(|t| t.quantity),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tx(b: u64, a: u64, q: u64, p: u64) -> Transaction {
        Transaction::new(b, a, q, p).unwrap()
    }

    #[test]
    fn aggregates() {
        assert_eq!(volume(&Matching::empty()).unwrap(), 0);
        let m = Matching::new(vec![tx(1, 11, 2, 105), tx(1, 12, 1, 105)]);
        assert_eq!(volume(&m).unwrap(), 3);
        assert_eq!(order_volume(Side::Bid, OrderId(1), &m).unwrap(), 3);
        assert_eq!(order_volume(Side::Bid, OrderId(9), &m).unwrap(), 0);
        assert_eq!(pair_volume(OrderId(1), OrderId(11), &m).unwrap(), 2);
        assert_eq!(pair_volume(OrderId(2), OrderId(11), &m).unwrap(), 0);
    }

    #[test]
    fn section_seven_examples() {
        // M1 = {(b1,a1,1,p), (b2,a2,2,p)}, M2 = {(b1,a2,1,p), (b2,a2,1,p), (b2,a1,1,p)}
        let m1 = Matching::new(vec![tx(1, 11, 1, 7), tx(2, 12, 2, 7)]);
        let m2 = Matching::new(vec![tx(1, 12, 1, 7), tx(2, 12, 1, 7), tx(2, 11, 1, 7)]);
        assert_eq!(pair_volume(OrderId(2), OrderId(12), &m1).unwrap(), 2);
        assert_eq!(order_volume(Side::Ask, OrderId(12), &m2).unwrap(), 2);
        assert_eq!(
            m1.volumes(Side::Bid).unwrap(),
            m2.volumes(Side::Bid).unwrap()
        );
        assert_eq!(
            m1.volumes(Side::Ask).unwrap(),
            m2.volumes(Side::Ask).unwrap()
        );
    }

    #[test]
    fn zero_quantity_rejected() {
        assert!(Transaction::new(1, 2, 0, 5).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let m = Matching::new(vec![tx(1, 2, u64::MAX, 1), tx(1, 3, 1, 1)]);
        assert_eq!(volume(&m), Err(CoreError::Overflow));
        assert!(m.volumes(Side::Bid).is_err());
    }
}
