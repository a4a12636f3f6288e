//! Exact oracles on a small weighted hypergraph.

use hypergadget::verify::{
    max_independent_set, min_vertex_cover_brute, two_colorable, GenericHypergraph,
    DEFAULT_NODE_BUDGET,
};
use num_rational::BigRational;

fn main() {
    let weights = (1..=7)
        .map(|w| BigRational::from_integer(w.into()))
        .collect();
    let edges = vec![
        vec![0, 1, 2],
        vec![2, 3, 4],
        vec![4, 5, 6],
        vec![6, 0, 3],
        vec![1, 5],
    ];
    let h = GenericHypergraph::weighted(weights, 3, edges).unwrap();

    let mis = max_independent_set(&h, DEFAULT_NODE_BUDGET).unwrap();
    let (cover, vc) = min_vertex_cover_brute(&h);
    println!("independent set {:?}, weight {}", mis.set, mis.weight);
    println!("vertex cover    {cover:?}, weight {vc}");
    println!("sum = {}, total = {}", mis.weight + vc, h.total_weight());
    match two_colorable(&h).coloring() {
        Some(c) => println!(
            "2-coloring {:?}",
            c.iter().map(|&b| b as u8).collect::<Vec<_>>()
        ),
        None => println!("not 2-colorable"),
    }
}
