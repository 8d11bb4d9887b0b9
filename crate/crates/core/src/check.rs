//! Invariant harness over seeded random instances.
//!
//! [`run`] generates instances inside an [`InstanceBudget`], checks the
//! mechanisms against the exhaustive oracles, and on the first failure
//! shrinks the instance greedily to a small counterexample. Mechanisms are
//! passed in as plain functions so deliberately broken variants can be
//! checked too.

use std::collections::HashMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::audit::{audit_matching, Verdict};
use crate::error::OracleError;
use crate::fairness::{fair, foa, fob, sort_transactions};
use crate::ingest::{book_rows, serialize_book};
use crate::matching::{volume, Matching};
use crate::maximum::mm;
use crate::oracle::{
    enumerate_matchings, max_flow_volume, optimal_uniform_volume, random_instance, Instance,
    InstanceBudget, Pricing, TimestampPolicy,
};
use crate::order::{sort_by_competitiveness, Direction, Order, OrderBookSide, Quantity, Side};
use crate::properties::{
    check_volume_bound_sweep, is_fair, is_ir, is_matching, is_uniform, PropertyReport,
};
use crate::uniform::um;

pub type Mechanism = fn(&OrderBookSide, &OrderBookSide) -> Matching;

#[derive(Clone, Copy)]
pub struct Mechanisms {
    pub um: Mechanism,
    pub mm: Mechanism,
}

impl Default for Mechanisms {
    fn default() -> Self {
        Mechanisms { um, mm }
    }
}

#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub budget: InstanceBudget,
    pub instances: usize,
    pub seed: u64,
    pub timestamps: TimestampPolicy,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            budget: InstanceBudget::default(),
            instances: 1000,
            seed: 0,
            timestamps: TimestampPolicy::Distinct,
        }
    }
}

/// A broken invariant on one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub invariant: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.invariant, self.detail)
    }
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    /// Position of the original instance in the seeded sequence.
    pub index: usize,
    pub original: Instance,
    pub minimized: Instance,
    pub violation: Violation,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "instance #{} violates {}", self.index, self.violation)?;
        writeln!(f, "minimized bids:")?;
        f.write_str(&serialize_book(&book_rows(&self.minimized.bids)))?;
        writeln!(f, "minimized asks:")?;
        f.write_str(&serialize_book(&book_rows(&self.minimized.asks)))
    }
}

#[derive(Debug, Clone, Default)]
pub struct CheckSummary {
    pub instances: usize,
    pub matchings_enumerated: u64,
    pub counterexample: Option<Counterexample>,
}

impl CheckSummary {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

fn require(
    invariant: &'static str,
    ok: bool,
    detail: impl FnOnce() -> String,
) -> Result<(), Violation> {
    if ok {
        Ok(())
    } else {
        Err(Violation {
            invariant,
            detail: detail(),
        })
    }
}

fn report(invariant: &'static str, r: PropertyReport) -> Result<(), Violation> {
    require(invariant, r.holds(), || r.to_string())
}

fn oracle(e: OracleError) -> Violation {
    Violation {
        invariant: "oracle budget",
        detail: e.to_string(),
    }
}

fn total(m: &Matching) -> Quantity {
    volume(m).unwrap_or(Quantity::MAX)
}

/// Per-order volumes of both sides, in book order.
fn profile(m: &Matching, bids: &OrderBookSide, asks: &OrderBookSide) -> Vec<Quantity> {
    let vb = m.volumes(Side::Bid).unwrap_or_default();
    let va = m.volumes(Side::Ask).unwrap_or_default();
    bids.iter()
        .map(|o| vb.get(&o.id()).copied().unwrap_or(0))
        .chain(asks.iter().map(|o| va.get(&o.id()).copied().unwrap_or(0)))
        .collect()
}

fn check_fairness_transform(
    m: &Matching,
    bids: &OrderBookSide,
    asks: &OrderBookSide,
    sorted_bids: &OrderBookSide,
    sorted_asks: &OrderBookSide,
) -> Result<(), Violation> {
    const NAME: &str = "fairness transform";
    let out = fair(m, bids, asks).map_err(|e| Violation {
        invariant: NAME,
        detail: e.to_string(),
    })?;
    report(NAME, is_matching(&out, bids, asks))?;
    report(NAME, is_fair(&out, bids, asks))?;
    require(NAME, total(&out) == total(m), || {
        format!("volume {} became {}", total(m), total(&out))
    })?;

    let by_bid = sort_transactions(m, sorted_bids, Direction::MostCompetitiveFirst)
        .expect("matching names known bids");
    let by_ask = sort_transactions(m, sorted_asks, Direction::MostCompetitiveFirst)
        .expect("matching names known asks");
    let after_fob = fob(&by_bid, sorted_bids);
    let after_foa = foa(&by_ask, sorted_asks);
    require(
        NAME,
        after_fob.volumes(Side::Ask) == m.volumes(Side::Ask),
        || format!("fob changed per-ask volumes of {m:?}"),
    )?;
    require(
        NAME,
        after_foa.volumes(Side::Bid) == m.volumes(Side::Bid),
        || format!("foa changed per-bid volumes of {m:?}"),
    )
}

/// Checks every invariant on one instance; returns the number of matchings
/// enumerated.
pub fn check_instance(
    inst: &Instance,
    budget: &InstanceBudget,
    mechanisms: Mechanisms,
) -> Result<u64, Violation> {
    let (bids, asks) = (&inst.bids, &inst.asks);
    budget.admit(bids, asks).map_err(oracle)?;
    let sorted_bids = sort_by_competitiveness(bids, Direction::MostCompetitiveFirst);
    let sorted_asks = sort_by_competitiveness(asks, Direction::MostCompetitiveFirst);

    let u = (mechanisms.um)(bids, asks);
    report("um is a matching", is_matching(&u, bids, asks))?;
    report("um is individual-rational", is_ir(&u, bids, asks))?;
    report("um is uniform", is_uniform(&u))?;
    report("um is fair", is_fair(&u, bids, asks))?;
    let uniform_opt = optimal_uniform_volume(bids, asks).map_err(|e| Violation {
        invariant: "uniform optimum",
        detail: e.to_string(),
    })?;
    require(
        "um volume is the uniform optimum",
        total(&u) == uniform_opt,
        || format!("um trades {} but {} is reachable", total(&u), uniform_opt),
    )?;

    let m = (mechanisms.mm)(bids, asks);
    report("mm is a matching", is_matching(&m, bids, asks))?;
    report("mm is individual-rational", is_ir(&m, bids, asks))?;
    report("mm is fair", is_fair(&m, bids, asks))?;

    let self_audit = audit_matching(bids, asks, &u);
    require(
        "self-audit",
        self_audit.verdict == Verdict::NoViolation,
        || self_audit.to_string(),
    )?;

    let mut count = 0u64;
    let mut max_volume = 0;
    let mut max_uniform = 0;
    let mut fair_profiles: HashMap<Quantity, Vec<Quantity>> = HashMap::new();
    let u_profile = profile(&u, bids, asks);
    for candidate in enumerate_matchings(bids, asks, budget, Pricing::AskLimit).map_err(oracle)? {
        count += 1;
        let v = total(&candidate);
        max_volume = max_volume.max(v);
        let uniform_ok = candidate
            .iter()
            .map(|t| asks.get(t.ask()).map_or(0, Order::price))
            .max()
            .zip(
                candidate
                    .iter()
                    .map(|t| bids.get(t.bid()).map_or(0, Order::price))
                    .min(),
            )
            .is_some_and(|(hi_ask, lo_bid)| hi_ask <= lo_bid);
        if uniform_ok {
            max_uniform = max_uniform.max(v);
        }

        report(
            "volume bound",
            check_volume_bound_sweep(&candidate, bids, asks),
        )?;
        check_fairness_transform(&candidate, bids, asks, &sorted_bids, &sorted_asks)?;

        if is_fair(&candidate, bids, asks).holds() {
            let p = profile(&candidate, bids, asks);
            let first = fair_profiles.entry(v).or_insert_with(|| p.clone());
            require(
                "fair matchings of equal volume agree per order",
                *first == p,
                || format!("{candidate:?} differs from another fair matching of volume {v}"),
            )?;
            if uniform_ok && v == uniform_opt {
                require(
                    "fair optimal matchings agree with um",
                    p == u_profile,
                    || format!("{candidate:?} against um {u:?}"),
                )?;
            }
        }
    }

    require(
        "uniform optimum formula matches enumeration",
        max_uniform == uniform_opt,
        || format!("formula {uniform_opt}, enumeration {max_uniform}"),
    )?;
    let flow = max_flow_volume(bids, asks);
    require("max-flow matches enumeration", flow == max_volume, || {
        format!("max-flow {flow}, enumeration {max_volume}")
    })?;
    require("mm volume is the maximum", total(&m) == max_volume, || {
        format!("mm trades {} but {} is reachable", total(&m), max_volume)
    })?;
    Ok(count)
}

fn rebuild(side: Side, orders: Vec<Order>) -> OrderBookSide {
    OrderBookSide::new(side, orders).expect("ids stay distinct")
}

/// Instances one step smaller than `inst`: one order removed, one quantity
/// decremented, one price lowered to a smaller budget price, or one
/// timestamp set to 0.
fn shrink_candidates(inst: &Instance, budget: &InstanceBudget) -> Vec<Instance> {
    let mut out = Vec::new();
    let sides = [(Side::Bid, &inst.bids), (Side::Ask, &inst.asks)];
    for (side, book) in sides {
        let orders = book.orders();
        let with = |replaced: OrderBookSide| match side {
            Side::Bid => Instance {
                bids: replaced,
                asks: inst.asks.clone(),
            },
            Side::Ask => Instance {
                bids: inst.bids.clone(),
                asks: replaced,
            },
        };
        for i in 0..orders.len() {
            let mut fewer = orders.to_vec();
            fewer.remove(i);
            out.push(with(rebuild(side, fewer)));
        }
        for (i, o) in orders.iter().enumerate() {
            let mut variants = Vec::new();
            if o.quantity() > 1 {
                variants.push(o.with_quantity(o.quantity() - 1).expect("positive"));
            }
            if let Some(&p) = budget.prices.iter().filter(|&&p| p < o.price()).min() {
                variants.push(o.with_price(p));
            }
            if o.timestamp() > 0 {
                variants
                    .push(Order::new(side, o.id(), 0, o.quantity(), o.price()).expect("positive"));
            }
            for v in variants {
                let mut changed = orders.to_vec();
                changed[i] = v;
                out.push(with(rebuild(side, changed)));
            }
        }
    }
    out
}

/// Greedily shrinks `inst` while `still_fails` holds.
pub fn shrink(
    inst: Instance,
    budget: &InstanceBudget,
    mut still_fails: impl FnMut(&Instance) -> bool,
) -> Instance {
    let mut current = inst;
    'outer: loop {
        for c in shrink_candidates(&current, budget) {
            if still_fails(&c) {
                current = c;
                continue 'outer;
            }
        }
        return current;
    }
}

/// Runs the harness. Refuses budgets over the hard cap.
pub fn run(config: &CheckConfig, mechanisms: Mechanisms) -> Result<CheckSummary, OracleError> {
    config.budget.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut summary = CheckSummary::default();
    for index in 0..config.instances {
        let inst = random_instance(&mut rng, &config.budget, config.timestamps);
        summary.instances += 1;
        match check_instance(&inst, &config.budget, mechanisms) {
            Ok(n) => summary.matchings_enumerated += n,
            Err(violation) => {
                let name = violation.invariant;
                let minimized = shrink(
                    inst.clone(),
                    &config.budget,
                    |c| matches!(check_instance(c, &config.budget, mechanisms), Err(v) if v.invariant == name),
                );
                let violation = check_instance(&minimized, &config.budget, mechanisms)
                    .expect_err("minimized instance still fails");
                summary.counterexample = Some(Counterexample {
                    index,
                    original: inst,
                    minimized,
                    violation,
                });
                break;
            }
        }
    }
    Ok(summary)
}

/// Deliberately broken mechanisms for testing the harness itself.
pub mod mutants {
    use super::*;
    use crate::matching::Transaction;
    use crate::uniform::{replace_prices, um_trace};

    /// The uniform mechanism with the bodies of the two unequal-quantity
    /// cases swapped.
    pub fn um_swapped_cases(bids: &OrderBookSide, asks: &OrderBookSide) -> Matching {
        let bids = sort_by_competitiveness(bids, Direction::MostCompetitiveFirst);
        let asks = sort_by_competitiveness(asks, Direction::MostCompetitiveFirst);
        let (bids, asks) = (bids.orders(), asks.orders());
        let mut out = Vec::new();
        let (mut bi, mut ai, mut tb, mut ta) = (0, 0, 0, 0);
        while let (Some(b), Some(a)) = (bids.get(bi), asks.get(ai)) {
            if b.price() < a.price() {
                break;
            }
            let bid_left = b.quantity().saturating_sub(tb).max(1);
            let ask_left = a.quantity().saturating_sub(ta).max(1);
            out.push(Transaction::unchecked(
                b.id(),
                a.id(),
                bid_left.min(ask_left),
                a.price(),
            ));
            if ask_left == bid_left {
                (bi, ai, tb, ta) = (bi + 1, ai + 1, 0, 0);
            } else if ask_left < bid_left {
                bi += 1;
                tb = 0;
                ta += bid_left;
            } else {
                ai += 1;
                ta = 0;
                tb += ask_left;
            }
        }
        let m = Matching::new(out);
        match m.transactions().last() {
            Some(t) => replace_prices(&m, t.price()),
            None => m,
        }
    }

    /// The uniform mechanism without the final repricing.
    pub fn um_unpriced(bids: &OrderBookSide, asks: &OrderBookSide) -> Matching {
        um_trace(bids, asks).provisional
    }

    /// The maximum mechanism without the fairness pass on asks.
    pub fn mm_without_foa(bids: &OrderBookSide, asks: &OrderBookSide) -> Matching {
        let bids = sort_by_competitiveness(bids, Direction::MostCompetitiveFirst);
        let asks = sort_by_competitiveness(asks, Direction::MostCompetitiveLast);
        crate::maximum::f_m(bids.orders(), asks.orders(), 0, 0).expect("zero offsets")
    }
}
