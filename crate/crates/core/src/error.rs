use thiserror::Error;

use crate::order::{OrderId, Side};
use crate::properties::PropertyReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("order {id} has zero quantity")]
    ZeroQuantity { id: OrderId },
    #[error("transaction {bid}/{ask} has zero quantity")]
    ZeroTradeQuantity { bid: OrderId, ask: OrderId },
    #[error("duplicate order id {id} on the {side} side")]
    DuplicateId { id: OrderId, side: Side },
    #[error("order {id} is a {found} but the book holds {expected}s")]
    WrongSide {
        id: OrderId,
        expected: Side,
        found: Side,
    },
    #[error("quantity overflow while aggregating")]
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FairnessError {
    #[error("input is not a matching: {0}")]
    NotAMatching(PropertyReport),
    #[error(transparent)]
    Offset(#[from] OffsetOutOfRange),
    #[error("transaction references order {0} which is not in the book")]
    UnknownOrder(OrderId),
}

/// A recursion entry point was given a consumed quantity that is not below
/// the quantity of the head order it applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("consumed quantity {consumed} must be below the head order quantity {quantity}")]
pub struct OffsetOutOfRange {
    pub consumed: u64,
    pub quantity: u64,
}

impl OffsetOutOfRange {
    /// Checks `consumed` against the head of a sorted list.
    pub fn check(head: Option<u64>, consumed: u64) -> Result<(), Self> {
        match head {
            Some(quantity) if consumed >= quantity => Err(OffsetOutOfRange { consumed, quantity }),
            None if consumed > 0 => Err(OffsetOutOfRange {
                consumed,
                quantity: 0,
            }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance exceeds the enumeration budget: {0}")]
    BudgetExceeded(String),
    #[error("budget is above the hard cap: {0}")]
    BudgetTooLarge(String),
}
