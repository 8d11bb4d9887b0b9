//! Deterministic multi-unit double-sided call auctions.
//!
//! Two clearing mechanisms over a bid book and an ask book:
//!
//! * [`uniform::um`] produces a fair, individual-rational matching at one
//!   price with the largest volume any such matching can reach.
//! * [`maximum::mm`] produces a fair, individual-rational matching of the
//!   largest volume overall, at possibly different prices.
//!
//! [`properties`] holds executable checks for every property the
//! mechanisms promise, [`oracle`] brute-force references for small books,
//! and [`audit`] compares an exchange's published trades against
//! [`uniform::um`]. Fair matchings of equal volume agree on the traded
//! quantity of every order, so comparing per-order volumes (plus checking
//! the exchange's prices for uniformity and individual rationality) decides
//! whether the exchange's matching is fair and optimal.

pub mod audit;
pub mod check;
pub mod error;
pub mod fairness;
pub mod ingest;
pub mod matching;
pub mod maximum;
pub mod oracle;
pub mod order;
pub mod properties;
pub mod uniform;

pub use error::{CoreError, FairnessError, OffsetOutOfRange, OracleError};
pub use matching::{order_volume, pair_volume, volume, Matching, Transaction};
pub use order::{
    compare_asks, compare_bids, demand_at, sort_by_competitiveness, supply_at, Competitiveness,
    Direction, Order, OrderBookSide, OrderId, Price, Quantity, Side, Timestamp, MAX_PRICE,
};
pub use properties::{PropertyReport, Witness};
