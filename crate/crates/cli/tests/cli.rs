use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_call-auction"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn trade_rows(text: &str) -> Vec<Vec<u64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect()
}

fn match_two_by_two(mechanism: &str, dir: &TempDir) -> (Output, String) {
    let out = dir.path().join(format!("{mechanism}.csv"));
    let o = run(&[
        "match",
        mechanism,
        "--bids",
        path(&fixture("two_by_two/bids.csv")),
        "--asks",
        path(&fixture("two_by_two/asks.csv")),
        "--out",
        path(&out),
    ]);
    let text = fs::read_to_string(&out).unwrap_or_default();
    (o, text)
}

#[test]
fn two_by_two_um_trades_one_unit() {
    let dir = TempDir::new().unwrap();
    let (o, text) = match_two_by_two("um", &dir);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(text, "bid_id,ask_id,quantity,price\n1,11,1,70\n");
}

#[test]
fn two_by_two_mm_trades_two_units() {
    let dir = TempDir::new().unwrap();
    let (o, text) = match_two_by_two("mm", &dir);
    assert_eq!(o.status.code(), Some(0));
    let rows = trade_rows(&text);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows.iter().map(|r| r[2]).sum::<u64>(), 2);
}

#[test]
fn empty_bids_give_empty_trades() {
    let dir = TempDir::new().unwrap();
    let bids = dir.path().join("bids.csv");
    fs::write(&bids, "id,timestamp,quantity,price\n").unwrap();
    let out = dir.path().join("trades.csv");
    let o = run(&[
        "match",
        "um",
        "--bids",
        path(&bids),
        "--asks",
        path(&fixture("two_by_two/asks.csv")),
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        fs::read_to_string(out).unwrap(),
        "bid_id,ask_id,quantity,price\n"
    );
}

#[test]
fn matching_trades_pass_the_audit() {
    let dir = TempDir::new().unwrap();
    let (_, _) = match_two_by_two("um", &dir);
    let o = run(&[
        "audit",
        "--bids",
        path(&fixture("two_by_two/bids.csv")),
        "--asks",
        path(&fixture("two_by_two/asks.csv")),
        "--trades",
        path(&dir.path().join("um.csv")),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o).lines().last(),
        Some("Matching does not violate the guidelines")
    );
}

#[test]
fn diverging_trades_fail_the_audit() {
    let dir = TempDir::new().unwrap();
    let trades = dir.path().join("trades.csv");
    // The less competitive bid trades instead of the most competitive one.
    fs::write(&trades, "bid_id,ask_id,quantity,price\n2,11,1,70\n").unwrap();
    let csv = dir.path().join("report.csv");
    let o = run(&[
        "audit",
        "--bids",
        path(&fixture("two_by_two/bids.csv")),
        "--asks",
        path(&fixture("two_by_two/asks.csv")),
        "--trades",
        path(&trades),
        "--report-csv",
        path(&csv),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).lines().last(), Some("Violation detected!"));
    assert_eq!(
        fs::read_to_string(csv).unwrap(),
        "order_id,side,exchange_qty,reference_qty,equal\n\
         1,bid,0,1,false\n2,bid,1,0,false\n11,ask,1,1,true\n12,ask,0,0,true\n"
    );
}

fn audit_market_ask(extra: &[&str]) -> Output {
    let bids = fixture("market_ask/bids.csv");
    let asks = fixture("market_ask/asks.csv");
    let trades = fixture("market_ask/trades.csv");
    let mut args = vec![
        "audit",
        "--bids",
        path(&bids),
        "--asks",
        path(&asks),
        "--trades",
        path(&trades),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn unmatched_market_ask() {
    let kept = audit_market_ask(&["--keep-market-asks"]);
    assert_eq!(kept.status.code(), Some(1));
    assert_eq!(stdout(&kept).lines().last(), Some("Violation detected!"));

    let dropped = audit_market_ask(&[]);
    assert_eq!(dropped.status.code(), Some(0));
    assert_eq!(
        stdout(&dropped).lines().last(),
        Some("Matching does not violate the guidelines")
    );
}

#[test]
fn raw_events_resolve_to_the_same_books() {
    let events = fixture("market_ask/events.csv");
    let trades = fixture("market_ask/trades.csv");
    let base = [
        "audit",
        "--raw-events",
        path(&events),
        "--trades",
        path(&trades),
    ];

    let o = run(&base);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("updates keep original timestamp"));
    assert!(text.contains("unknown order"));

    let o = run(&[&base[..], &["--keep-market-asks", "--update-requeues-time"]].concat());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("updates requeue at their own timestamp"));
}

#[test]
fn missing_file_exits_2() {
    let o = run(&[
        "audit",
        "--bids",
        "/nonexistent/bids.csv",
        "--asks",
        path(&fixture("two_by_two/asks.csv")),
        "--trades",
        path(&fixture("market_ask/trades.csv")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/bids.csv"));
}

#[test]
fn malformed_file_exits_2_with_position() {
    let dir = TempDir::new().unwrap();
    let bids = dir.path().join("bids.csv");
    fs::write(&bids, "id,timestamp,quantity,price\n1,2,three,4\n").unwrap();
    let o = run(&[
        "match",
        "mm",
        "--bids",
        path(&bids),
        "--asks",
        path(&fixture("two_by_two/asks.csv")),
        "--out",
        path(&dir.path().join("out.csv")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2, column 3"));
    assert!(!dir.path().join("out.csv").exists());
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let (_, first) = match_two_by_two("mm", &dir);
    let (_, second) = match_two_by_two("mm", &dir);
    assert_eq!(first, second);
    let a = audit_market_ask(&["--keep-market-asks"]);
    let b = audit_market_ask(&["--keep-market-asks"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn oracle_check_exit_codes() {
    let ok = run(&["oracle-check", "--instances", "100", "--seed", "5"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));

    let refused = run(&["oracle-check", "--max-orders", "6"]);
    assert_eq!(refused.status.code(), Some(2));

    let mutant = run(&[
        "oracle-check",
        "--instances",
        "200",
        "--mutant",
        "um-swapped-cases",
    ]);
    assert_eq!(mutant.status.code(), Some(1));
    assert!(stdout(&mutant).contains("minimized bids:"));
}
