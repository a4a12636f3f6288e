//! Serialization round trips for every on-disk format.

use proptest::prelude::*;
use rand::Rng;

use hypergadget::csp::{build_smooth_mlpcp, Dto1Game, LayeredPcp, Lin3Instance};
use hypergadget::dto1::DDeltaR;
use hypergadget::seed::stage_rng;
use hypergadget::ternary::{random_monotone, TernaryFamily};
use hypergadget::verify::GenericHypergraph;
use num_rational::BigRational;

#[test]
fn lin3_json_round_trip() {
    let inst = Lin3Instance::random(10, 14, true, &mut stage_rng(1, "lin")).unwrap();
    let back: Lin3Instance = serde_json::from_str(&serde_json::to_string(&inst).unwrap()).unwrap();
    assert_eq!(back, inst);
}

#[test]
fn game_and_pcp_json_round_trip() {
    let game = Dto1Game::random(3, 6, 1, 2, 2, true, &mut stage_rng(2, "game")).unwrap();
    let back: Dto1Game = serde_json::from_str(&serde_json::to_string(&game).unwrap()).unwrap();
    assert_eq!(back, game);

    let pcp = build_smooth_mlpcp(&game, 2, 1).unwrap();
    let back: LayeredPcp = serde_json::from_str(&serde_json::to_string(&pcp).unwrap()).unwrap();
    assert_eq!(back, pcp);
}

#[test]
fn malformed_pcp_is_rejected() {
    let pcp = LayeredPcp::planted_toy(&[2, 2], &[3, 2], 1, &mut stage_rng(3, "pcp")).unwrap();
    let mut j: serde_json::Value = serde_json::to_value(&pcp).unwrap();
    j["constraints"][0]["proj"][0] = 99.into();
    assert!(serde_json::from_value::<LayeredPcp>(j).is_err());
}

#[test]
fn ddr_csv_lists_every_atom() {
    let d = DDeltaR::new(0.25, 2).unwrap();
    let csv = d.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("atom,probability"));
    let total: f64 = lines
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
}

fn random_hypergraph(seed: u64) -> GenericHypergraph {
    let mut rng = stage_rng(seed, "hyper");
    let n = rng.random_range(3..12);
    let weights = (0..n)
        .map(|_| BigRational::new(rng.random_range(1..9).into(), rng.random_range(1..5).into()))
        .collect();
    let edges = (0..rng.random_range(0..20))
        .map(|_| {
            let mut e: Vec<usize> = Vec::new();
            while e.len() < 3 {
                let v = rng.random_range(0..n);
                if !e.contains(&v) {
                    e.push(v);
                }
            }
            e
        })
        .collect();
    GenericHypergraph::weighted(weights, 3, edges).unwrap()
}

proptest! {
    #[test]
    fn hypergraph_json_and_edge_list_round_trip(seed in 0u64..1000) {
        let h = random_hypergraph(seed);
        let from_json = GenericHypergraph::from_json(&h.to_json()).unwrap();
        prop_assert_eq!(&from_json, &h);
        let from_list = GenericHypergraph::from_edge_list(&h.to_edge_list()).unwrap();
        prop_assert_eq!(from_list.weights(), h.weights());
        prop_assert_eq!(from_list.edges(), h.edges());
    }

    #[test]
    fn ternary_family_text_round_trip(seed in 0u64..1000, m in 1usize..=5) {
        let mut rng = stage_rng(seed, "family");
        let fam = random_monotone(m, 3, &mut rng).unwrap();
        let (back, p) = TernaryFamily::from_text(&fam.to_text(0.8)).unwrap();
        prop_assert_eq!(back, fam);
        prop_assert_eq!(p, 0.8);
    }
}
