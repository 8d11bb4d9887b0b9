//! Trade-book audit.
//!
//! Any two fair matchings of equal volume trade the same quantity for every
//! order, and a matching with the optimal uniform volume whose per-order
//! quantities agree with a fair optimal one is itself fair. So an exchange's
//! trades can be checked against [`um`](crate::uniform::um) by comparing
//! per-order volumes alone; pairings and the chosen clearing price may
//! legitimately differ. IR and uniformity are read off the trade prices.

use std::collections::HashMap;
use std::fmt;

use crate::ingest::{TradeRecord, UpdatePolicy};
use crate::matching::{Matching, Transaction};
use crate::order::{
    has_tie_break, sort_by_competitiveness, tie_groups, Direction, OrderBookSide, OrderId,
    Quantity, Side,
};
use crate::properties::{is_ir, is_matching, is_uniform, PropertyReport, Witness};
use crate::uniform::um;

pub const NO_VIOLATION_MESSAGE: &str = "Matching does not violate the guidelines";
pub const VIOLATION_MESSAGE: &str = "Violation detected!";
pub const CSV_HEADER: &str = "order_id,side,exchange_qty,reference_qty,equal";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    NoViolation,
    Violation,
}

impl Verdict {
    pub fn message(self) -> &'static str {
        match self {
            Verdict::NoViolation => NO_VIOLATION_MESSAGE,
            Verdict::Violation => VIOLATION_MESSAGE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditRow {
    pub id: OrderId,
    pub side: Side,
    pub exchange: Quantity,
    pub reference: Quantity,
}

impl AuditRow {
    pub fn equal(&self) -> bool {
        self.exchange == self.reference
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    /// Bids then asks, each most competitive first.
    pub rows: Vec<AuditRow>,
    pub reference: Matching,
    pub matching_verdict: PropertyReport,
    pub ir_verdict: PropertyReport,
    pub uniform_verdict: PropertyReport,
    /// Trades naming an order absent from the books.
    pub unknown_orders: Vec<Witness>,
    /// Some same-side orders share price and timestamp.
    pub tie_break_exercised: bool,
    /// Book-resolution policy, when the books came from raw events.
    pub update_policy: Option<UpdatePolicy>,
    pub warnings: Vec<String>,
    pub verdict: Verdict,
}

impl AuditReport {
    pub fn verdict_message(&self) -> &'static str {
        self.verdict.message()
    }

    pub fn diverging(&self) -> impl Iterator<Item = &AuditRow> {
        self.rows.iter().filter(|r| !r.equal())
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.id,
                r.side,
                r.exchange,
                r.reference,
                r.equal()
            ));
        }
        out
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>20} {:>4} {:>12} {:>12}  equal",
            "order", "side", "exchange", "reference"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>20} {:>4} {:>12} {:>12}  {}",
                r.id.to_string(),
                r.side.as_str(),
                r.exchange,
                r.reference,
                if r.equal() { "yes" } else { "NO" }
            )?;
        }
        for report in [
            &self.matching_verdict,
            &self.ir_verdict,
            &self.uniform_verdict,
        ] {
            writeln!(f, "{report}")?;
        }
        for w in &self.unknown_orders {
            writeln!(f, "unknown order: {w}")?;
        }
        if self.tie_break_exercised {
            writeln!(
                f,
                "note: orders with equal price and timestamp are ranked by id"
            )?;
        }
        if let Some(p) = self.update_policy {
            writeln!(f, "book resolution: {p}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

fn volumes(m: &Matching, side: Side) -> HashMap<OrderId, Quantity> {
    let mut out: HashMap<OrderId, Quantity> = HashMap::new();
    for t in m {
        let v = out.entry(t.order(side)).or_default();
        *v = v.saturating_add(t.quantity());
    }
    out
}

fn unknown_orders(m: &Matching, bids: &OrderBookSide, asks: &OrderBookSide) -> Vec<Witness> {
    let mut out = Vec::new();
    for t in m {
        for (side, book) in [(Side::Bid, bids), (Side::Ask, asks)] {
            if !book.contains(t.order(side)) {
                out.push(Witness::UnknownOrder {
                    side,
                    id: t.order(side),
                    transaction: *t,
                });
            }
        }
    }
    out
}

/// Diverging rows that only trade places with other members of their
/// (price, timestamp) group, which leaves the group total unchanged.
fn tie_group_divergence_only(
    rows: &[AuditRow],
    bids: &OrderBookSide,
    asks: &OrderBookSide,
) -> bool {
    let by_key: HashMap<(Side, OrderId), &AuditRow> =
        rows.iter().map(|r| ((r.side, r.id), r)).collect();
    let mut groups: HashMap<(Side, OrderId), Vec<OrderId>> = HashMap::new();
    for (side, book) in [(Side::Bid, bids), (Side::Ask, asks)] {
        for g in tie_groups(book) {
            for &id in &g {
                groups.insert((side, id), g.clone());
            }
        }
    }
    rows.iter().filter(|r| !r.equal()).all(|r| {
        let Some(group) = groups.get(&(r.side, r.id)) else {
            return false;
        };
        let total = |f: fn(&AuditRow) -> Quantity| -> u128 {
            group
                .iter()
                .map(|id| u128::from(f(by_key[&(r.side, *id)])))
                .sum()
        };
        total(|r| r.exchange) == total(|r| r.reference)
    })
}

/// Audits exchange trades against the reference uniform matching.
pub fn audit(bids: &OrderBookSide, asks: &OrderBookSide, trades: &[TradeRecord]) -> AuditReport {
    let mut warnings = Vec::new();
    let exchange: Matching = trades
        .iter()
        .filter_map(
            |r| match Transaction::new(r.bid_id, r.ask_id, r.quantity, r.price) {
                Ok(t) => Some(t),
                Err(e) => {
                    warnings.push(format!("{e}; trade ignored"));
                    None
                }
            },
        )
        .collect();
    let mut report = audit_matching(bids, asks, &exchange);
    if !warnings.is_empty() {
        report.verdict = Verdict::Violation;
        report.warnings.splice(0..0, warnings);
    }
    report
}

/// [`audit`] for trades already in matching form.
pub fn audit_matching(
    bids: &OrderBookSide,
    asks: &OrderBookSide,
    exchange: &Matching,
) -> AuditReport {
    let reference = um(bids, asks);
    let mut rows = Vec::with_capacity(bids.len() + asks.len());
    for (side, book) in [(Side::Bid, bids), (Side::Ask, asks)] {
        let ex = volumes(exchange, side);
        let re = volumes(&reference, side);
        let sorted = sort_by_competitiveness(book, Direction::MostCompetitiveFirst);
        rows.extend(sorted.iter().map(|o| AuditRow {
            id: o.id(),
            side,
            exchange: ex.get(&o.id()).copied().unwrap_or(0),
            reference: re.get(&o.id()).copied().unwrap_or(0),
        }));
    }

    let matching_verdict = is_matching(exchange, bids, asks);
    let ir_verdict = is_ir(exchange, bids, asks);
    let uniform_verdict = is_uniform(exchange);
    let unknown_orders = unknown_orders(exchange, bids, asks);
    let tie_break_exercised = has_tie_break(bids) || has_tie_break(asks);

    let mut warnings = Vec::new();
    let checks_hold = unknown_orders.is_empty()
        && matching_verdict.holds()
        && ir_verdict.holds()
        && uniform_verdict.holds();
    let all_equal = rows.iter().all(AuditRow::equal);
    let verdict = if checks_hold && all_equal {
        Verdict::NoViolation
    } else if checks_hold && tie_group_divergence_only(&rows, bids, asks) {
        warnings.push(
            "volumes differ only among orders with equal price and timestamp; \
             the exchange may break such ties differently"
                .to_string(),
        );
        Verdict::NoViolation
    } else {
        Verdict::Violation
    };
    if !unknown_orders.is_empty() {
        warnings.push("trades name orders missing from the books; check book resolution".into());
    }

    AuditReport {
        rows,
        reference,
        matching_verdict,
        ir_verdict,
        uniform_verdict,
        unknown_orders,
        tie_break_exercised,
        update_policy: None,
        warnings,
        verdict,
    }
}

/// Holds iff both matchings trade the same quantity for every order of
/// either book.
pub fn uniqueness_check(
    m1: &Matching,
    m2: &Matching,
    bids: &OrderBookSide,
    asks: &OrderBookSide,
) -> PropertyReport {
    const NAME: &str = "equal per-order volumes";
    for (side, book) in [(Side::Bid, bids), (Side::Ask, asks)] {
        let (Ok(v1), Ok(v2)) = (m1.volumes(side), m2.volumes(side)) else {
            return PropertyReport::fail(NAME, Witness::Overflow);
        };
        for o in book {
            let left = v1.get(&o.id()).copied().unwrap_or(0);
            let right = v2.get(&o.id()).copied().unwrap_or(0);
            if left != right {
                return PropertyReport::fail(
                    NAME,
                    Witness::VolumeMismatch {
                        side,
                        id: o.id(),
                        left,
                        right,
                    },
                );
            }
        }
    }
    PropertyReport::pass(NAME)
}
