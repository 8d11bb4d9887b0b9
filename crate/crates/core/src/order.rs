//! Orders, order-book sides and the competitiveness orders.
//!
//! Bids compete on higher limit price, asks on lower limit price. Equal
//! prices fall back to the earlier timestamp and then to the lower id, so
//! both orders are total over a duplicate-free book.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::error::CoreError;

pub type Price = u64;
pub type Quantity = u64;
pub type Timestamp = u64;

/// Limit price used for market bids. Market asks use 0.
pub const MAX_PRICE: Price = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrderId(pub u64);

impl fmt::Display for OrderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for OrderId {
    fn from(v: u64) -> Self {
        OrderId(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Bid,
    Ask,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Bid => Side::Ask,
            Side::Ask => Side::Bid,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Bid => "bid",
            Side::Ask => "ask",
        }
    }

    /// Sort key comparison: `Less` means `a` is more competitive than `b`.
    pub fn rank(self, a: &Order, b: &Order) -> Ordering {
        let by_price = match self {
            Side::Bid => b.price.cmp(&a.price),
            Side::Ask => a.price.cmp(&b.price),
        };
        by_price
            .then(a.timestamp.cmp(&b.timestamp))
            .then(a.id.cmp(&b.id))
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A bid or an ask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Order {
    id: OrderId,
    timestamp: Timestamp,
    quantity: Quantity,
    price: Price,
    side: Side,
}

impl Order {
    pub fn new(
        side: Side,
        id: impl Into<OrderId>,
        timestamp: Timestamp,
        quantity: Quantity,
        price: Price,
    ) -> Result<Self, CoreError> {
        let id = id.into();
        if quantity == 0 {
            return Err(CoreError::ZeroQuantity { id });
        }
        Ok(Order {
            id,
            timestamp,
            quantity,
            price,
            side,
        })
    }

    pub fn bid(
        id: impl Into<OrderId>,
        timestamp: Timestamp,
        quantity: Quantity,
        price: Price,
    ) -> Result<Self, CoreError> {
        Self::new(Side::Bid, id, timestamp, quantity, price)
    }

    pub fn ask(
        id: impl Into<OrderId>,
        timestamp: Timestamp,
        quantity: Quantity,
        price: Price,
    ) -> Result<Self, CoreError> {
        Self::new(Side::Ask, id, timestamp, quantity, price)
    }

    pub fn id(&self) -> OrderId {
        self.id
    }

    pub fn timestamp(&self) -> Timestamp {
        self.timestamp
    }

    pub fn quantity(&self) -> Quantity {
        self.quantity
    }

    pub fn price(&self) -> Price {
        self.price
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Copy of this order with a different quantity (must stay positive).
    pub fn with_quantity(&self, quantity: Quantity) -> Result<Self, CoreError> {
        Self::new(self.side, self.id, self.timestamp, quantity, self.price)
    }

    pub fn with_price(&self, price: Price) -> Self {
        Order { price, ..*self }
    }

    /// `true` when this bid's limit is at least the ask's limit.
    pub fn matchable_with(&self, ask: &Order) -> bool {
        self.price >= ask.price
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Competitiveness {
    MoreCompetitive,
    LessCompetitive,
    /// Both arguments carry the same id.
    SameId,
}

fn competitiveness(side: Side, a: &Order, b: &Order) -> Competitiveness {
    if a.id == b.id {
        return Competitiveness::SameId;
    }
    match side.rank(a, b) {
        Ordering::Less => Competitiveness::MoreCompetitive,
        _ => Competitiveness::LessCompetitive,
    }
}

pub fn compare_bids(b1: &Order, b2: &Order) -> Competitiveness {
    debug_assert!(b1.side == Side::Bid && b2.side == Side::Bid);
    competitiveness(Side::Bid, b1, b2)
}

pub fn compare_asks(a1: &Order, a2: &Order) -> Competitiveness {
    debug_assert!(a1.side == Side::Ask && a2.side == Side::Ask);
    competitiveness(Side::Ask, a1, a2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    MostCompetitiveFirst,
    MostCompetitiveLast,
}

/// A duplicate-free list of orders on one side of the book.
#[derive(Debug, Clone)]
pub struct OrderBookSide {
    side: Side,
    orders: Vec<Order>,
    index: HashMap<OrderId, usize>,
}

impl PartialEq for OrderBookSide {
    fn eq(&self, other: &Self) -> bool {
        self.side == other.side && self.orders == other.orders
    }
}

impl Eq for OrderBookSide {}

impl OrderBookSide {
    pub fn new(side: Side, orders: Vec<Order>) -> Result<Self, CoreError> {
        let mut index = HashMap::with_capacity(orders.len());
        for (i, o) in orders.iter().enumerate() {
            if o.side != side {
                return Err(CoreError::WrongSide {
                    id: o.id,
                    expected: side,
                    found: o.side,
                });
            }
            if index.insert(o.id, i).is_some() {
                return Err(CoreError::DuplicateId { id: o.id, side });
            }
        }
        Ok(OrderBookSide {
            side,
            orders,
            index,
        })
    }

    pub fn empty(side: Side) -> Self {
        OrderBookSide {
            side,
            orders: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn bids(orders: Vec<Order>) -> Result<Self, CoreError> {
        Self::new(Side::Bid, orders)
    }

    pub fn asks(orders: Vec<Order>) -> Result<Self, CoreError> {
        Self::new(Side::Ask, orders)
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn orders(&self) -> &[Order] {
        &self.orders
    }

    pub fn into_orders(self) -> Vec<Order> {
        self.orders
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn get(&self, id: OrderId) -> Option<&Order> {
        self.index.get(&id).map(|&i| &self.orders[i])
    }

    pub fn contains(&self, id: OrderId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Order> {
        self.orders.iter()
    }

    /// Total quantity `Q(B)` of the side.
    pub fn total_quantity(&self) -> Result<Quantity, CoreError> {
        checked_sum(self.orders.iter().map(|o| o.quantity))
    }

    pub fn is_sorted(&self, direction: Direction) -> bool {
        self.orders.windows(2).all(|w| {
            let ord = self.side.rank(&w[0], &w[1]);
            match direction {
                Direction::MostCompetitiveFirst => ord != Ordering::Greater,
                Direction::MostCompetitiveLast => ord != Ordering::Less,
            }
        })
    }
}

impl<'a> IntoIterator for &'a OrderBookSide {
    type Item = &'a Order;
    type IntoIter = std::slice::Iter<'a, Order>;

    fn into_iter(self) -> Self::IntoIter {
        self.orders.iter()
    }
}

pub fn sort_by_competitiveness(side: &OrderBookSide, direction: Direction) -> OrderBookSide {
    let mut orders = side.orders.clone();
    let s = side.side;
    match direction {
        Direction::MostCompetitiveFirst => orders.sort_by(|a, b| s.rank(a, b)),
        Direction::MostCompetitiveLast => orders.sort_by(|a, b| s.rank(b, a)),
    }
    let index = orders.iter().enumerate().map(|(i, o)| (o.id, i)).collect();
    OrderBookSide {
        side: s,
        orders,
        index,
    }
}

pub(crate) fn checked_sum(it: impl IntoIterator<Item = Quantity>) -> Result<Quantity, CoreError> {
    it.into_iter()
        .try_fold(0u64, |acc, q| acc.checked_add(q))
        .ok_or(CoreError::Overflow)
}

/// Total demand `Q(B>=p)`: quantity of bids willing to pay at least `price`.
pub fn demand_at(bids: &OrderBookSide, price: Price) -> Result<Quantity, CoreError> {
    checked_sum(bids.iter().filter(|b| b.price >= price).map(|b| b.quantity))
}

/// Total supply `Q(A<=p)`: quantity of asks willing to sell at `price`.
pub fn supply_at(asks: &OrderBookSide, price: Price) -> Result<Quantity, CoreError> {
    checked_sum(asks.iter().filter(|a| a.price <= price).map(|a| a.quantity))
}

/// `true` when some pair of same-side orders agrees on price and timestamp,
/// which is where only the id decides competitiveness.
pub fn has_tie_break(side: &OrderBookSide) -> bool {
    !tie_groups(side).is_empty()
}

/// Groups of two or more orders sharing (price, timestamp).
pub fn tie_groups(side: &OrderBookSide) -> Vec<Vec<OrderId>> {
    let mut groups: HashMap<(Price, Timestamp), Vec<OrderId>> = HashMap::new();
    for o in side {
        groups.entry((o.price, o.timestamp)).or_default().push(o.id);
    }
    let mut out: Vec<Vec<OrderId>> = groups
        .into_values()
        .filter(|g| g.len() > 1)
        .map(|mut g| {
            g.sort();
            g
        })
        .collect();
    out.sort();
    out
}
