//! Gadgets built from satisfiable inputs, checked by the generic oracles.

use num_rational::BigRational;

use hypergadget::csp::{build_smooth_mlpcp, Dto1Game, LayeredPcp, Lin3Instance};
use hypergadget::dto1::{self, Dto1Gadget};
use hypergadget::hadamard::{yes_coloring, HadamardGadget, Mode, DEFAULT_BLOCK_BUDGET};
use hypergadget::longcode::{yes_partition, LongCodeGadget};
use hypergadget::seed::stage_rng;
use hypergadget::verify::{almost_two_colorable, two_colorable, GenericHypergraph};

fn assert_proper(h: &GenericHypergraph, coloring: &[bool]) {
    assert_eq!(coloring.len(), h.num_vertices());
    assert!(h.monochromatic_edges(coloring).is_empty());
}

#[test]
fn hadamard_yes_coloring_is_proper_and_found_by_search() {
    for seed in 0..3 {
        let inst = Lin3Instance::random(9, 9, true, &mut stage_rng(seed, "lin")).unwrap();
        let g = HadamardGadget::build(
            &inst,
            1,
            2,
            Mode::Enumerate,
            DEFAULT_BLOCK_BUDGET,
            &mut stage_rng(seed, "g"),
        )
        .unwrap();
        let h = g.to_hypergraph().unwrap();
        let (coloring, _) = yes_coloring(&g, inst.planted().unwrap()).unwrap();
        assert_proper(&h, &coloring);
        let found = two_colorable(&h);
        assert_proper(&h, found.coloring().expect("search finds a coloring"));
    }
}

#[test]
fn longcode_yes_is_almost_two_colorable_after_removing_stars() {
    let eps = BigRational::new(1.into(), 10.into());
    for seed in 0..3 {
        let pcp =
            LayeredPcp::planted_toy(&[2, 2], &[3, 2], 1, &mut stage_rng(seed, "pcp")).unwrap();
        let g = LongCodeGadget::build(&pcp, &eps).unwrap();
        let h = g.to_hypergraph().unwrap();
        assert_eq!(h.total_weight(), BigRational::from_integer(1.into()));
        let part = yes_partition(&g, pcp.planted().unwrap(), 0, &mut stage_rng(seed, "y")).unwrap();
        let stars: Vec<usize> = (0..h.num_vertices())
            .filter(|&v| part.class[v] == 0)
            .collect();
        assert_eq!(h.weight_of(&stars), eps);
        assert!(almost_two_colorable(&h, &eps, Some(&stars))
            .unwrap()
            .is_success());

        let h1: Vec<bool> = part.class.iter().map(|&c| c == 1).collect();
        assert!(h.is_independent(&h1));
    }
}

#[test]
fn dto1_yes_coloring_is_proper() {
    for seed in 0..3 {
        let pcp =
            LayeredPcp::planted_dto1_toy(&[2, 2], 2, 2, 1, 1, &mut stage_rng(seed, "pcp")).unwrap();
        let g = Dto1Gadget::build(&pcp, 0.25).unwrap();
        let h = g.to_hypergraph().unwrap();
        let cert =
            dto1::yes_check(&g, pcp.planted().unwrap(), 0, &mut stage_rng(seed, "y")).unwrap();
        assert!(cert.exhaustive && cert.proper());
        assert_proper(&h, &cert.coloring);
    }
}

#[test]
fn smooth_mlpcp_from_planted_game_keeps_its_labeling() {
    let game = Dto1Game::random(3, 6, 1, 2, 2, true, &mut stage_rng(3, "game")).unwrap();
    let pcp = build_smooth_mlpcp(&game, 2, 1).unwrap();
    let sigma = pcp.planted().expect("planted game yields a planted PCP");
    for c in pcp.constraints() {
        assert_eq!(
            c.proj[sigma[c.layer][c.v] as usize],
            sigma[c.target_layer][c.u]
        );
    }
}
