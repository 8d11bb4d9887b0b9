use petgraph::algo::dinics;
use petgraph::Graph;

use crate::order::{OrderBookSide, Quantity};

/// Maximum matching volume as an integer max-flow: source to each bid
/// (capacity `q_b`), bid to each ask it can trade with, each ask to sink
/// (capacity `q_a`).
pub fn max_flow_volume(bids: &OrderBookSide, asks: &OrderBookSide) -> Quantity {
    let mut g = Graph::<(), Quantity>::new();
    let source = g.add_node(());
    let sink = g.add_node(());
    let bid_nodes: Vec<_> = bids.iter().map(|_| g.add_node(())).collect();
    let ask_nodes: Vec<_> = asks.iter().map(|_| g.add_node(())).collect();
    for (b, &bn) in bids.iter().zip(&bid_nodes) {
        g.add_edge(source, bn, b.quantity());
        for (a, &an) in asks.iter().zip(&ask_nodes) {
            if b.matchable_with(a) {
                g.add_edge(bn, an, b.quantity().min(a.quantity()));
            }
        }
    }
    for (a, &an) in asks.iter().zip(&ask_nodes) {
        g.add_edge(an, sink, a.quantity());
    }
    dinics(&g, source, sink).0
}
