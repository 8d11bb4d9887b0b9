//! Order-book and trade-book files.
//!
//! All files are comma-separated ASCII with LF line endings, no quoting, and
//! a mandatory header line:
//!
//! | file        | header                                      |
//! |-------------|---------------------------------------------|
//! | bids / asks | `id,timestamp,quantity,price`               |
//! | trades      | `bid_id,ask_id,quantity,price`              |
//! | raw events  | `id,timestamp,side,action,quantity,price`   |
//!
//! Prices in book and event files may be `M` for a market order. Event
//! sides are `bid`/`ask`, actions `new`/`update`/`delete`; a delete leaves
//! quantity and price empty. Trailing spaces or tabs on a line and blank
//! lines at the end of the file are tolerated; anything else that does not
//! fit is rejected with its line and column.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::error::CoreError;
use crate::matching::{Matching, Transaction};
use crate::order::{Order, OrderBookSide, OrderId, Price, Quantity, Side, Timestamp};

pub const BOOK_HEADER: &str = "id,timestamp,quantity,price";
pub const TRADE_HEADER: &str = "bid_id,ask_id,quantity,price";
pub const EVENT_HEADER: &str = "id,timestamp,side,action,quantity,price";
pub const MARKET: &str = "M";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    /// 1-based field index; 0 when the whole line is at fault.
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error(transparent)]
    Book(#[from] CoreError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LimitPrice {
    Limit(Price),
    Market,
}

impl fmt::Display for LimitPrice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitPrice::Limit(p) => p.fmt(f),
            LimitPrice::Market => f.write_str(MARKET),
        }
    }
}

/// A row of a bids or asks file, before market prices are substituted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BookRow {
    pub side: Side,
    pub id: OrderId,
    pub timestamp: Timestamp,
    pub quantity: Quantity,
    pub price: LimitPrice,
}

impl BookRow {
    pub fn is_market(&self) -> bool {
        self.price == LimitPrice::Market
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TradeRecord {
    pub bid_id: OrderId,
    pub ask_id: OrderId,
    pub quantity: Quantity,
    pub price: Price,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    New,
    Update,
    Delete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawOrderEvent {
    pub id: OrderId,
    pub timestamp: Timestamp,
    pub side: Side,
    pub action: Action,
    /// `None` exactly for deletes; at least 1 otherwise.
    pub quantity: Option<Quantity>,
    pub price: Option<LimitPrice>,
}

struct Rows<'a> {
    lines: Vec<(usize, &'a str)>,
}

fn rows<'a>(text: &'a str, header: &str) -> Result<Rows<'a>, ParseError> {
    let mut lines: Vec<(usize, &str)> = text
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches([' ', '\t'])))
        .collect();
    while lines.last().is_some_and(|(_, l)| l.is_empty()) {
        lines.pop();
    }
    let mut it = lines.into_iter();
    match it.next() {
        // A zero-byte file is an empty list.
        None => return Ok(Rows { lines: Vec::new() }),
        Some((_, h)) if h == header => {}
        Some((n, h)) => {
            return Err(ParseError {
                line: n,
                column: 0,
                message: format!("expected header `{header}`, found `{h}`"),
            })
        }
    }
    let lines: Vec<_> = it.collect();
    for &(n, l) in &lines {
        if l == header {
            return Err(ParseError {
                line: n,
                column: 0,
                message: "duplicate header".into(),
            });
        }
        if l.is_empty() {
            return Err(ParseError {
                line: n,
                column: 0,
                message: "empty line".into(),
            });
        }
    }
    Ok(Rows { lines })
}

fn fields(line: usize, text: &str, expected: usize) -> Result<Vec<&str>, ParseError> {
    let f: Vec<&str> = text.split(',').collect();
    if f.len() != expected {
        return Err(ParseError {
            line,
            column: 0,
            message: format!("expected {expected} columns, found {}", f.len()),
        });
    }
    Ok(f)
}

fn integer(line: usize, column: usize, s: &str) -> Result<u64, ParseError> {
    let err = |message: String| ParseError {
        line,
        column,
        message,
    };
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(format!("`{s}` is not a non-negative integer")));
    }
    s.parse()
        .map_err(|_| err(format!("`{s}` does not fit in 64 bits")))
}

fn positive(line: usize, column: usize, s: &str) -> Result<u64, ParseError> {
    match integer(line, column, s)? {
        0 => Err(ParseError {
            line,
            column,
            message: "quantity must be at least 1".into(),
        }),
        q => Ok(q),
    }
}

fn limit(line: usize, column: usize, s: &str) -> Result<LimitPrice, ParseError> {
    if s == MARKET {
        Ok(LimitPrice::Market)
    } else {
        integer(line, column, s).map(LimitPrice::Limit)
    }
}

/// Parses a bids or asks file; `side` labels the rows.
pub fn parse_book(text: &str, side: Side) -> Result<Vec<BookRow>, ParseError> {
    rows(text, BOOK_HEADER)?
        .lines
        .into_iter()
        .map(|(n, l)| {
            let f = fields(n, l, 4)?;
            Ok(BookRow {
                side,
                id: OrderId(integer(n, 1, f[0])?),
                timestamp: integer(n, 2, f[1])?,
                quantity: positive(n, 3, f[2])?,
                price: limit(n, 4, f[3])?,
            })
        })
        .collect()
}

pub fn parse_bids(text: &str) -> Result<Vec<BookRow>, ParseError> {
    parse_book(text, Side::Bid)
}

pub fn parse_asks(text: &str) -> Result<Vec<BookRow>, ParseError> {
    parse_book(text, Side::Ask)
}

pub fn parse_trades(text: &str) -> Result<Vec<TradeRecord>, ParseError> {
    rows(text, TRADE_HEADER)?
        .lines
        .into_iter()
        .map(|(n, l)| {
            let f = fields(n, l, 4)?;
            Ok(TradeRecord {
                bid_id: OrderId(integer(n, 1, f[0])?),
                ask_id: OrderId(integer(n, 2, f[1])?),
                quantity: positive(n, 3, f[2])?,
                price: integer(n, 4, f[3])?,
            })
        })
        .collect()
}

pub fn parse_events(text: &str) -> Result<Vec<RawOrderEvent>, ParseError> {
    rows(text, EVENT_HEADER)?
        .lines
        .into_iter()
        .map(|(n, l)| {
            let f = fields(n, l, 6)?;
            let side = match f[2] {
                "bid" => Side::Bid,
                "ask" => Side::Ask,
                s => {
                    return Err(ParseError {
                        line: n,
                        column: 3,
                        message: format!("side must be `bid` or `ask`, found `{s}`"),
                    })
                }
            };
            let action = match f[3] {
                "new" => Action::New,
                "update" => Action::Update,
                "delete" => Action::Delete,
                s => {
                    return Err(ParseError {
                        line: n,
                        column: 4,
                        message: format!("action must be `new`, `update` or `delete`, found `{s}`"),
                    })
                }
            };
            let (quantity, price) = if action == Action::Delete {
                for (col, v) in [(5, f[4]), (6, f[5])] {
                    if !v.is_empty() {
                        return Err(ParseError {
                            line: n,
                            column: col,
                            message: "delete rows carry no quantity or price".into(),
                        });
                    }
                }
                (None, None)
            } else {
                (Some(positive(n, 5, f[4])?), Some(limit(n, 6, f[5])?))
            };
            Ok(RawOrderEvent {
                id: OrderId(integer(n, 1, f[0])?),
                timestamp: integer(n, 2, f[1])?,
                side,
                action,
                quantity,
                price,
            })
        })
        .collect()
}

fn read(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_owned(),
        source,
    })
}

fn at_path<T>(path: &Path, r: Result<T, ParseError>) -> Result<T, IngestError> {
    r.map_err(|source| IngestError::Parse {
        path: path.to_owned(),
        source,
    })
}

pub fn read_book(path: &Path, side: Side) -> Result<Vec<BookRow>, IngestError> {
    at_path(path, parse_book(&read(path)?, side))
}

pub fn read_trades(path: &Path) -> Result<Vec<TradeRecord>, IngestError> {
    at_path(path, parse_trades(&read(path)?))
}

pub fn read_events(path: &Path) -> Result<Vec<RawOrderEvent>, IngestError> {
    at_path(path, parse_events(&read(path)?))
}

pub fn serialize_book(rows: &[BookRow]) -> String {
    let mut out = format!("{BOOK_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.id, r.timestamp, r.quantity, r.price
        ));
    }
    out
}

/// Book rows for already-priced orders.
pub fn book_rows(book: &OrderBookSide) -> Vec<BookRow> {
    book.iter()
        .map(|o| BookRow {
            side: o.side(),
            id: o.id(),
            timestamp: o.timestamp(),
            quantity: o.quantity(),
            price: LimitPrice::Limit(o.price()),
        })
        .collect()
}

pub fn serialize_trades(records: &[TradeRecord]) -> String {
    let mut out = format!("{TRADE_HEADER}\n");
    for t in records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            t.bid_id, t.ask_id, t.quantity, t.price
        ));
    }
    out
}

pub fn serialize_events(events: &[RawOrderEvent]) -> String {
    let mut out = format!("{EVENT_HEADER}\n");
    for e in events {
        let action = match e.action {
            Action::New => "new",
            Action::Update => "update",
            Action::Delete => "delete",
        };
        let q = e.quantity.map(|q| q.to_string()).unwrap_or_default();
        let p = e.price.map(|p| p.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{action},{q},{p}\n",
            e.id, e.timestamp, e.side
        ));
    }
    out
}

pub fn matching_to_trades(m: &Matching) -> Vec<TradeRecord> {
    m.iter()
        .map(|t| TradeRecord {
            bid_id: t.bid(),
            ask_id: t.ask(),
            quantity: t.quantity(),
            price: t.price(),
        })
        .collect()
}

pub fn trades_to_matching(records: &[TradeRecord]) -> Result<Matching, CoreError> {
    records
        .iter()
        .map(|r| Transaction::new(r.bid_id, r.ask_id, r.quantity, r.price))
        .collect::<Result<Vec<_>, _>>()
        .map(Matching::new)
}

/// What an update does to time priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdatePolicy {
    /// The order keeps the timestamp of its `new` event.
    #[default]
    KeepTimestamp,
    /// The order takes the update's timestamp.
    Requeue,
}

impl fmt::Display for UpdatePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpdatePolicy::KeepTimestamp => "updates keep original timestamp",
            UpdatePolicy::Requeue => "updates requeue at their own timestamp",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarningKind {
    UnknownOrder,
    DuplicateNew,
}

/// An event that was skipped during resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestWarning {
    /// Position of the event in the input list.
    pub index: usize,
    pub id: OrderId,
    pub action: Action,
    pub kind: WarningKind,
}

impl fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            WarningKind::UnknownOrder => "refers to an unknown order",
            WarningKind::DuplicateNew => "re-creates an existing order",
        };
        write!(
            f,
            "event #{} ({:?} of order {}) {what}; skipped",
            self.index, self.action, self.id
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResolvedBook {
    pub bids: Vec<BookRow>,
    pub asks: Vec<BookRow>,
    pub warnings: Vec<IngestWarning>,
}

/// Final bid and ask rows after replaying events in (timestamp, input)
/// order. Output rows are sorted by id. An order is identified by its side
/// and id.
pub fn resolve_book(events: &[RawOrderEvent], policy: UpdatePolicy) -> ResolvedBook {
    let mut order: Vec<usize> = (0..events.len()).collect();
    order.sort_by_key(|&i| events[i].timestamp);

    // Bids and asks have separate id spaces.
    let mut live: BTreeMap<(Side, OrderId), BookRow> = BTreeMap::new();
    let mut warnings = Vec::new();
    for i in order {
        let e = &events[i];
        let warn = |kind| IngestWarning {
            index: i,
            id: e.id,
            action: e.action,
            kind,
        };
        match (e.action, live.get_mut(&(e.side, e.id))) {
            (Action::New, Some(_)) => warnings.push(warn(WarningKind::DuplicateNew)),
            (Action::New, None) => {
                live.insert(
                    (e.side, e.id),
                    BookRow {
                        side: e.side,
                        id: e.id,
                        timestamp: e.timestamp,
                        quantity: e.quantity.unwrap_or(1),
                        price: e.price.unwrap_or(LimitPrice::Market),
                    },
                );
            }
            (_, None) => warnings.push(warn(WarningKind::UnknownOrder)),
            (Action::Update, Some(row)) => {
                if let Some(q) = e.quantity {
                    row.quantity = q;
                }
                if let Some(p) = e.price {
                    row.price = p;
                }
                if policy == UpdatePolicy::Requeue {
                    row.timestamp = e.timestamp;
                }
            }
            (Action::Delete, Some(_)) => {
                live.remove(&(e.side, e.id));
            }
        }
    }
    let (bids, asks) = live.into_values().partition(|r| r.side == Side::Bid);
    ResolvedBook {
        bids,
        asks,
        warnings,
    }
}

/// Drops ask rows that carry a market price.
pub fn without_market_asks(rows: &[BookRow]) -> Vec<BookRow> {
    rows.iter()
        .filter(|r| !(r.side == Side::Ask && r.is_market()))
        .copied()
        .collect()
}

fn priced(rows: &[BookRow], side: Side, market: Price) -> Result<OrderBookSide, CoreError> {
    let orders = rows
        .iter()
        .map(|r| {
            let p = match r.price {
                LimitPrice::Limit(p) => p,
                LimitPrice::Market => market,
            };
            Order::new(side, r.id, r.timestamp, r.quantity, p)
        })
        .collect::<Result<Vec<_>, _>>()?;
    OrderBookSide::new(side, orders)
}

/// Market asks get limit 0 and market bids `max_price`; limit orders keep
/// their price.
pub fn substitute_market_prices(
    bids: &[BookRow],
    asks: &[BookRow],
    max_price: Price,
) -> Result<(OrderBookSide, OrderBookSide), CoreError> {
    Ok((
        priced(bids, Side::Bid, max_price)?,
        priced(asks, Side::Ask, 0)?,
    ))
}
