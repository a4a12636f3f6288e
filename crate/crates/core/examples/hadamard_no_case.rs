//! Find a maximum independent set in a one-triple gadget and run the
//! soundness inequality on it.

use hypergadget::csp::Lin3Instance;
use hypergadget::hadamard::{extract_strategies, HadamardGadget, Mode, DEFAULT_BLOCK_BUDGET};
use hypergadget::seed::stage_rng;
use hypergadget::verify::{max_independent_set, DEFAULT_NODE_BUDGET};

fn main() {
    let inst = Lin3Instance::random(10, 10, false, &mut stage_rng(2, "instance")).unwrap();
    let g = HadamardGadget::build(
        &inst,
        1,
        1,
        Mode::Enumerate,
        DEFAULT_BLOCK_BUDGET,
        &mut stage_rng(2, "gadget"),
    )
    .unwrap();
    let h = g.to_hypergraph().unwrap();
    let mis = max_independent_set(&h, DEFAULT_NODE_BUDGET).unwrap();
    println!(
        "{} vertices, {} edges; max independent set weight {} (optimal: {}, {} nodes)",
        h.num_vertices(),
        h.edges().len(),
        mis.weight,
        mis.optimal,
        mis.nodes
    );
    let mut ind = vec![false; g.num_vertices()];
    mis.set.iter().for_each(|&v| ind[v] = true);
    let rep = extract_strategies(&g, &ind, 0).unwrap();
    println!(
        "lhs = {:.6}, rhs = {:.6}, holds: {}",
        rep.lhs, rep.rhs, rep.holds
    );
    if let Some(acc) = rep.acceptance {
        println!("decoded strategies accepted with probability {acc:.4}");
    }
}
