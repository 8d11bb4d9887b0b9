use call_auction::ingest::{
    parse_bids, parse_events, parse_trades, resolve_book, serialize_book, serialize_events,
    serialize_trades, Action, BookRow, LimitPrice, RawOrderEvent, TradeRecord, UpdatePolicy,
};
use call_auction::{OrderId, Side};
use proptest::prelude::*;

fn limit_price() -> impl Strategy<Value = LimitPrice> {
    prop_oneof![
        1 => Just(LimitPrice::Market),
        4 => any::<u64>().prop_map(LimitPrice::Limit),
    ]
}

fn book_rows() -> impl Strategy<Value = Vec<BookRow>> {
    prop::collection::vec(
        (any::<u64>(), any::<u64>(), 1..=u64::MAX, limit_price()),
        0..20,
    )
    .prop_map(|rows| {
        rows.into_iter()
            .map(|(id, timestamp, quantity, price)| BookRow {
                side: Side::Bid,
                id: OrderId(id),
                timestamp,
                quantity,
                price,
            })
            .collect()
    })
}

fn trade_rows() -> impl Strategy<Value = Vec<TradeRecord>> {
    prop::collection::vec(
        (any::<u64>(), any::<u64>(), 1..=u64::MAX, any::<u64>()),
        0..20,
    )
    .prop_map(|rows| {
        rows.into_iter()
            .map(|(b, a, quantity, price)| TradeRecord {
                bid_id: OrderId(b),
                ask_id: OrderId(a),
                quantity,
                price,
            })
            .collect()
    })
}

fn events() -> impl Strategy<Value = Vec<RawOrderEvent>> {
    let event = (
        0u64..10,
        0u64..50,
        any::<bool>(),
        0u8..3,
        1u64..100,
        limit_price(),
    )
        .prop_map(|(id, timestamp, bid, action, q, p)| {
            let action = [Action::New, Action::Update, Action::Delete][action as usize];
            let live = action != Action::Delete;
            RawOrderEvent {
                id: OrderId(id),
                timestamp,
                side: if bid { Side::Bid } else { Side::Ask },
                action,
                quantity: live.then_some(q),
                price: live.then_some(p),
            }
        });
    prop::collection::vec(event, 0..30)
}

/// Adds trailing spaces/tabs to lines and blank lines at the end.
fn decorate(text: &str, pads: &[u8], blank_tail: usize) -> String {
    let mut out = String::new();
    for (i, line) in text.lines().enumerate() {
        out.push_str(line);
        match pads.get(i).copied().unwrap_or(0) % 4 {
            1 => out.push(' '),
            2 => out.push('\t'),
            3 => out.push_str(" \t "),
            _ => {}
        }
        out.push('\n');
    }
    out.push_str(&"\n".repeat(blank_tail));
    out
}

proptest! {
    #[test]
    fn book_round_trip(rows in book_rows(), pads in prop::collection::vec(any::<u8>(), 0..25), tail in 0usize..3) {
        let canonical = serialize_book(&rows);
        let decorated = decorate(&canonical, &pads, tail);
        let parsed = parse_bids(&decorated).unwrap();
        prop_assert_eq!(&parsed, &rows);
        prop_assert_eq!(serialize_book(&parsed), canonical);
    }

    #[test]
    fn trade_round_trip(rows in trade_rows(), pads in prop::collection::vec(any::<u8>(), 0..25), tail in 0usize..3) {
        let canonical = serialize_trades(&rows);
        let parsed = parse_trades(&decorate(&canonical, &pads, tail)).unwrap();
        prop_assert_eq!(serialize_trades(&parsed), canonical);
    }

    #[test]
    fn event_round_trip(evs in events(), pads in prop::collection::vec(any::<u8>(), 0..35)) {
        let canonical = serialize_events(&evs);
        let parsed = parse_events(&decorate(&canonical, &pads, 0)).unwrap();
        prop_assert_eq!(&parsed, &evs);
    }

    #[test]
    fn resolution_is_idempotent(evs in events(), requeue in any::<bool>()) {
        let policy = if requeue { UpdatePolicy::Requeue } else { UpdatePolicy::KeepTimestamp };
        let once = resolve_book(&evs, policy);
        let replay: Vec<RawOrderEvent> = once
            .bids
            .iter()
            .chain(&once.asks)
            .map(|r| RawOrderEvent {
                id: r.id,
                timestamp: r.timestamp,
                side: r.side,
                action: Action::New,
                quantity: Some(r.quantity),
                price: Some(r.price),
            })
            .collect();
        let twice = resolve_book(&replay, policy);
        prop_assert_eq!(&once.bids, &twice.bids);
        prop_assert_eq!(&once.asks, &twice.asks);
        prop_assert!(twice.warnings.is_empty());
        // Output is duplicate-free per side.
        for rows in [&once.bids, &once.asks] {
            let mut ids: Vec<_> = rows.iter().map(|r| r.id).collect();
            ids.dedup();
            prop_assert_eq!(ids.len(), rows.len());
        }
    }
}

#[test]
fn update_at_auction_time_survives_resolution() {
    // A market ask is later rewritten, at the auction time, to a limit order
    // priced at the clearing price. That update is the order that survives.
    let text = "id,timestamp,side,action,quantity,price\n\
                7,1633000000000050,ask,new,40,M\n\
                8,1633000000000060,bid,new,40,2600\n\
                7,1633000000900000,ask,update,40,2575\n";
    let resolved = resolve_book(&parse_events(text).unwrap(), UpdatePolicy::Requeue);
    assert_eq!(resolved.asks.len(), 1);
    let ask = resolved.asks[0];
    assert_eq!(ask.price, LimitPrice::Limit(2575));
    assert_eq!(ask.timestamp, 1633000000900000);

    let kept = resolve_book(&parse_events(text).unwrap(), UpdatePolicy::KeepTimestamp);
    assert_eq!(kept.asks[0].timestamp, 1633000000000050);
}

#[test]
fn unknown_updates_and_deletes_are_reported() {
    let text = "id,timestamp,side,action,quantity,price\n\
                1,5,bid,update,3,10\n\
                2,6,ask,delete,,\n\
                3,7,bid,new,1,10\n\
                3,8,ask,delete,,\n";
    let r = resolve_book(&parse_events(text).unwrap(), UpdatePolicy::KeepTimestamp);
    assert_eq!(r.warnings.len(), 3);
    assert_eq!(r.bids.len(), 1);
}
