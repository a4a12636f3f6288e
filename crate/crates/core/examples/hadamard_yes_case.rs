//! Build a Hadamard gadget from a satisfiable Max-3Lin instance and 2-color it.

use hypergadget::csp::Lin3Instance;
use hypergadget::hadamard::{yes_coloring, HadamardGadget, Mode, DEFAULT_BLOCK_BUDGET};
use hypergadget::seed::stage_rng;

fn main() {
    let inst = Lin3Instance::random(12, 12, true, &mut stage_rng(1, "instance")).unwrap();
    let g = HadamardGadget::build(
        &inst,
        1,
        3,
        Mode::Enumerate,
        DEFAULT_BLOCK_BUDGET,
        &mut stage_rng(1, "gadget"),
    )
    .unwrap();
    println!(
        "{} equations, {} blocks, {} vertices, {} edges ({} dropped)",
        inst.equations().len(),
        g.blocks().len(),
        g.num_vertices(),
        g.edges().len(),
        g.dropped()
    );
    let (coloring, cert) = yes_coloring(&g, inst.planted().unwrap()).unwrap();
    let h = g.to_hypergraph().unwrap();
    println!(
        "planted coloring: parity 1 on {}/{} edges, monochromatic {}",
        cert.parity_ones,
        cert.checked_edges,
        h.monochromatic_edges(&coloring).len()
    );
}
