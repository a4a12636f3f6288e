//! Long-code gadget on a planted layered PCP: the YES partition and dictator decoding.

use hypergadget::csp::LayeredPcp;
use hypergadget::longcode::{decode, yes_partition, LongCodeGadget};
use hypergadget::seed::stage_rng;
use num_rational::BigRational;

fn main() {
    let pcp = LayeredPcp::planted_toy(&[2, 2], &[3, 2], 1, &mut stage_rng(4, "pcp")).unwrap();
    let eps = BigRational::new(1.into(), 10.into());
    let g = LongCodeGadget::build(&pcp, &eps).unwrap();
    println!("{} vertices, mode {:?}", g.num_vertices(), g.mode());

    let part = yes_partition(&g, pcp.planted().unwrap(), 0, &mut stage_rng(4, "yes")).unwrap();
    println!(
        "weights: H_1 = {}, H_2 = {}, H_* = {}; {} edges checked, {} monochromatic",
        part.weight_1,
        part.weight_2,
        part.weight_star,
        part.certificate.checked_edges,
        part.certificate.violations.len()
    );

    let h1: Vec<bool> = part.class.iter().map(|&c| c == 1).collect();
    let out = decode(&g, &h1, 0.25, &mut stage_rng(4, "decode")).unwrap();
    println!(
        "decoded layers {} -> {}: {} witnesses, satisfied fraction {:.3}",
        out.layer,
        out.target_layer,
        out.witnesses.len(),
        out.satisfied_fraction
    );
}
