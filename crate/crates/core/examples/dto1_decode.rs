//! d-to-1 gadget: YES coloring on a planted PCP, then decoding from dictators.

use hypergadget::csp::LayeredPcp;
use hypergadget::dto1::{decode, dictator_indicator, yes_check, DecodeParams, Dto1Gadget};
use hypergadget::seed::stage_rng;

fn main() {
    let pcp = LayeredPcp::planted_dto1_toy(&[2, 2], 2, 2, 1, 1, &mut stage_rng(5, "pcp")).unwrap();
    let sigma = pcp.planted().unwrap();
    let g = Dto1Gadget::build(&pcp, 0.25).unwrap();
    let cert = yes_check(&g, sigma, 0, &mut stage_rng(5, "yes")).unwrap();
    println!(
        "{} vertices, {} edges checked, proper: {}",
        g.num_vertices(),
        cert.checked_edges,
        cert.proper()
    );

    let ind: Vec<Vec<Vec<f64>>> = pcp
        .layers()
        .iter()
        .enumerate()
        .map(|(l, layer)| {
            (0..layer.num_vars)
                .map(|v| dictator_indicator(layer.label_size, sigma[l][v] as usize))
                .collect()
        })
        .collect();
    let params = DecodeParams {
        delta: 0.25,
        eps: 0.5,
        nu: 0.1,
        gamma: 0.1,
        tau: 0.01,
        s: 2,
        t: 4,
    };
    let out = decode(&pcp, &ind, &params, &mut stage_rng(5, "decode")).unwrap();
    println!(
        "pair ({}, {}): {} constraints, satisfied fraction {:.3}",
        out.layer,
        out.target_layer,
        out.pairs.len(),
        out.satisfied_fraction
    );
}
