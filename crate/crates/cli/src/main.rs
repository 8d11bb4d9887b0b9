use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use call_auction::audit::{audit, Verdict};
use call_auction::check::{self, mutants, CheckConfig, Mechanisms};
use call_auction::ingest::{
    matching_to_trades, read_book, read_events, read_trades, resolve_book, serialize_trades,
    substitute_market_prices, without_market_asks, BookRow, IngestError, UpdatePolicy,
};
use call_auction::maximum::mm;
use call_auction::oracle::{InstanceBudget, TimestampPolicy};
use call_auction::properties::{is_fair, is_ir, is_matching, is_uniform};
use call_auction::uniform::um;
use call_auction::{Matching, OrderBookSide, Price, Side, MAX_PRICE};

const VIOLATION: u8 = 1;
const INPUT_ERROR: u8 = 2;
const INTERNAL_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "call-auction",
    version,
    about = "Call-auction matching and trade audit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clear a bid book and an ask book and write the trades.
    Match(MatchArgs),
    /// Compare an exchange trade-book with the uniform-price reference.
    Audit(AuditArgs),
    /// Check the mechanisms against exhaustive oracles on random books.
    OracleCheck(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MechanismName {
    /// Uniform price, largest uniform volume.
    Um,
    /// Largest volume, per-pair prices.
    Mm,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(value_enum)]
    mechanism: MechanismName,
    #[arg(long)]
    bids: PathBuf,
    #[arg(long)]
    asks: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Limit price given to market bids.
    #[arg(long, default_value_t = MAX_PRICE)]
    max_price: Price,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long, required_unless_present = "raw_events")]
    bids: Option<PathBuf>,
    #[arg(long, required_unless_present = "raw_events")]
    asks: Option<PathBuf>,
    #[arg(long)]
    trades: PathBuf,
    /// Build both books from an order-event log instead of --bids/--asks.
    #[arg(long, conflicts_with_all = ["bids", "asks"])]
    raw_events: Option<PathBuf>,
    /// Updated orders take the update's timestamp.
    #[arg(long, requires = "raw_events")]
    update_requeues_time: bool,
    /// Keep market asks in the books (they are dropped by default).
    #[arg(long)]
    keep_market_asks: bool,
    /// Limit price given to market bids.
    #[arg(long, default_value_t = MAX_PRICE)]
    max_price: Price,
    /// Also write the per-order comparison as CSV.
    #[arg(long)]
    report_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mutant {
    UmSwappedCases,
    UmUnpriced,
    MmWithoutFoa,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 1000)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    max_orders: usize,
    #[arg(long, default_value_t = 3)]
    max_quantity: u64,
    /// Price universe, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5")]
    prices: Vec<Price>,
    /// Draw timestamps from {0, 1} so that equal (price, timestamp) pairs occur.
    #[arg(long)]
    ties: bool,
    /// Run the suite against a deliberately broken mechanism.
    #[arg(long, value_enum, hide = true)]
    mutant: Option<Mutant>,
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn books(
    bids: &[BookRow],
    asks: &[BookRow],
    max_price: Price,
) -> Result<(OrderBookSide, OrderBookSide), Failure> {
    substitute_market_prices(bids, asks, max_price).map_err(|e| Failure::Input(e.to_string()))
}

fn self_check(
    name: MechanismName,
    m: &Matching,
    b: &OrderBookSide,
    a: &OrderBookSide,
) -> Result<(), Failure> {
    let mut reports = vec![is_matching(m, b, a), is_ir(m, b, a), is_fair(m, b, a)];
    if let MechanismName::Um = name {
        reports.push(is_uniform(m));
    }
    match reports.into_iter().find(|r| !r.holds()) {
        Some(r) => Err(Failure::Internal(format!("output failed self-check: {r}"))),
        None => Ok(()),
    }
}

fn cmd_match(args: MatchArgs) -> Result<u8, Failure> {
    let bids = read_book(&args.bids, Side::Bid)?;
    let asks = read_book(&args.asks, Side::Ask)?;
    let (b, a) = books(&bids, &asks, args.max_price)?;
    let m = match args.mechanism {
        MechanismName::Um => um(&b, &a),
        MechanismName::Mm => mm(&b, &a),
    };
    self_check(args.mechanism, &m, &b, &a)?;
    write(&args.out, &serialize_trades(&matching_to_trades(&m)))?;
    Ok(0)
}

fn cmd_audit(args: AuditArgs) -> Result<u8, Failure> {
    let policy = if args.update_requeues_time {
        UpdatePolicy::Requeue
    } else {
        UpdatePolicy::KeepTimestamp
    };
    let (bids, asks, ingest_warnings, resolved_with) = match &args.raw_events {
        Some(path) => {
            let r = resolve_book(&read_events(path)?, policy);
            (r.bids, r.asks, r.warnings, Some(policy))
        }
        None => {
            let bids = read_book(args.bids.as_deref().expect("required by clap"), Side::Bid)?;
            let asks = read_book(args.asks.as_deref().expect("required by clap"), Side::Ask)?;
            (bids, asks, Vec::new(), None)
        }
    };
    let trades = read_trades(&args.trades)?;

    for w in &ingest_warnings {
        println!("warning: {w}");
    }
    let asks = if args.keep_market_asks {
        asks
    } else {
        let kept = without_market_asks(&asks);
        let dropped = asks.len() - kept.len();
        if dropped > 0 {
            println!("preprocessing: dropped {dropped} market ask(s); pass --keep-market-asks to keep them");
        }
        kept
    };
    let (b, a) = books(&bids, &asks, args.max_price)?;
    let mut report = audit(&b, &a, &trades);
    report.update_policy = resolved_with;

    if let Some(path) = &args.report_csv {
        write(path, &report.to_csv())?;
    }
    print!("{report}");
    println!("{}", report.verdict_message());
    Ok(match report.verdict {
        Verdict::NoViolation => 0,
        Verdict::Violation => VIOLATION,
    })
}

fn cmd_oracle_check(args: OracleArgs) -> Result<u8, Failure> {
    let config = CheckConfig {
        budget: InstanceBudget {
            max_orders_per_side: args.max_orders,
            max_quantity: args.max_quantity,
            prices: args.prices,
        },
        instances: args.instances,
        seed: args.seed,
        timestamps: if args.ties {
            TimestampPolicy::AllowTies
        } else {
            TimestampPolicy::Distinct
        },
    };
    let mut mechanisms = Mechanisms::default();
    match args.mutant {
        Some(Mutant::UmSwappedCases) => mechanisms.um = mutants::um_swapped_cases,
        Some(Mutant::UmUnpriced) => mechanisms.um = mutants::um_unpriced,
        Some(Mutant::MmWithoutFoa) => mechanisms.mm = mutants::mm_without_foa,
        None => {}
    }
    let summary = check::run(&config, mechanisms).map_err(|e| Failure::Input(e.to_string()))?;
    match &summary.counterexample {
        None => {
            println!(
                "{} instances, {} matchings enumerated: all invariants hold",
                summary.instances, summary.matchings_enumerated
            );
            Ok(0)
        }
        Some(c) => {
            print!("{c}");
            Ok(VIOLATION)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Match(args) => cmd_match(args),
        Command::Audit(args) => cmd_audit(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(INPUT_ERROR)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(INTERNAL_ERROR)
        }
    }
}
