//! Acceptance criteria for the library, one PASS/FAIL line each.

use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::Rng;

use hypergadget::analysis::{gamma_lower, gamma_upper, ProductFn};
use hypergadget::csp::{build_smooth_mlpcp, Dto1Game, LayeredPcp, Lin3Instance};
use hypergadget::dto1::{
    self, correlation_suite, dictator_indicator, influence_lemmas, support_safety_violation,
    DDeltaR, DecodeParams, Dto1Gadget,
};
use hypergadget::gf2::{fourier_transform, unfold, Gf2Subspace, Gf2Vector};
use hypergadget::hadamard::{
    extract_strategies, yes_coloring, HadamardGadget, Mode, DEFAULT_BLOCK_BUDGET,
};
use hypergadget::longcode::{self, yes_partition, LongCodeGadget};
use hypergadget::seed::stage_rng;
use hypergadget::ternary::random_monotone;
use hypergadget::verify::{
    max_independent_set, min_vertex_cover_brute, GenericHypergraph, DEFAULT_NODE_BUDGET,
};

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    limit: Duration,
}

fn run(id: &'static str, limit_secs: u64, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = f();
    Outcome {
        id,
        pass,
        detail,
        elapsed: start.elapsed(),
        limit: Duration::from_secs(limit_secs),
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn folding_lemma() -> (bool, String) {
    let mut rng = stage_rng(1, "acceptance-folding");
    let mut bad = 0;
    for _ in 0..200 {
        let m = rng.random_range(1..=12);
        let dim = rng.random_range(0..=m / 2);
        let gens: Vec<Gf2Vector> = (0..dim)
            .map(|_| Gf2Vector::new(m, rng.random_range(0..1u32 << m)).unwrap())
            .collect();
        let h = Gf2Subspace::span(m, &gens).unwrap();
        let folded: Vec<f64> = (0..h.num_cosets())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let coeffs = fourier_transform(&unfold(&folded, &h).unwrap());
        bad += coeffs
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(a, c)| c.abs() > 1e-12 && !h.is_orthogonal(*a as u32))
            .count();
    }
    (
        bad == 0,
        format!("200 tables, {bad} coefficients off H-perp"),
    )
}

fn hadamard_yes() -> (bool, String) {
    let mut edges = 0;
    for seed in 0..5 {
        let inst =
            Lin3Instance::random(12, 12, true, &mut stage_rng(seed, "acceptance-lin")).unwrap();
        let g = HadamardGadget::build(
            &inst,
            1,
            3,
            Mode::Enumerate,
            DEFAULT_BLOCK_BUDGET,
            &mut stage_rng(seed, "g"),
        )
        .unwrap();
        let (_, cert) = yes_coloring(&g, inst.planted().unwrap()).unwrap();
        if !cert.removed.is_empty()
            || cert.parity_ones != cert.checked_edges
            || cert.checked_edges != g.edges().len()
        {
            return (false, format!("seed {seed}: {cert:?}"));
        }
        edges += cert.checked_edges;
    }
    (
        true,
        format!("5 instances, parity 1 on all {edges} edges, 0 removed"),
    )
}

fn hadamard_no() -> (bool, String) {
    let mut worst = f64::INFINITY;
    for seed in 0..4 {
        let inst =
            Lin3Instance::random(12, 12, false, &mut stage_rng(seed, "acceptance-lin-no")).unwrap();
        let g = HadamardGadget::build(
            &inst,
            1,
            1,
            Mode::Enumerate,
            DEFAULT_BLOCK_BUDGET,
            &mut stage_rng(seed, "g"),
        )
        .unwrap();
        let mis = max_independent_set(&g.to_hypergraph().unwrap(), DEFAULT_NODE_BUDGET).unwrap();
        if !mis.optimal {
            return (false, format!("seed {seed}: search budget exhausted"));
        }
        let mut ind = vec![false; g.num_vertices()];
        mis.set.iter().for_each(|&v| ind[v] = true);
        let rep = extract_strategies(&g, &ind, 0).unwrap();
        worst = worst.min(rep.lhs - rep.rhs);
    }
    (
        worst >= -1e-10,
        format!("min lhs - rhs = {worst:.3e} over 4 gadgets"),
    )
}

fn russo() -> (bool, String) {
    let mut rng = stage_rng(4, "acceptance-russo");
    let mut fails = 0;
    for k in 0..100 {
        let m = rng.random_range(1..=6);
        let fam = random_monotone(m, rng.random_range(1..=4), &mut rng).unwrap();
        let p = [0.5, 0.8, 0.9][k % 3];
        let rep = fam.russo_check(p, 1e-4).unwrap();
        let a = rep.average_sensitivity;
        if rep.derivative < a / 2.0 - 1e-3 || rep.derivative > a + 1e-3 {
            fails += 1;
        }
    }
    (
        fails == 0,
        format!("100 families, {fails} outside the bracket"),
    )
}

fn core_mass() -> (bool, String) {
    let mut rng = stage_rng(5, "acceptance-core");
    let mut worst = f64::INFINITY;
    for k in 0..50 {
        let m = rng.random_range(1..=6);
        let fam = random_monotone(m, rng.random_range(1..=4), &mut rng).unwrap();
        let p = [0.5, 0.8, 0.9][k % 3];
        let core = fam.find_core(0.1, p);
        worst = worst.min(core.core_mass - (fam.measure(p) - 0.3));
    }
    (
        worst >= 0.0,
        format!("min core mass - (mu - 3 delta) = {worst:.4}"),
    )
}

fn witness() -> (bool, String) {
    let mut rng = stage_rng(6, "acceptance-witness");
    let (p, delta) = (0.8, 0.2);
    let (mut done, mut retries, mut invalid) = (0, 0usize, 0);
    while done < 50 {
        let m = rng.random_range(1..=6);
        let fam = random_monotone(m, rng.random_range(1..=4), &mut rng).unwrap();
        if fam.measure(p) < delta {
            continue;
        }
        let rep = fam.two_element_witness(p, delta, &mut rng).unwrap();
        invalid += !rep.pair.is_valid() as usize;
        retries += rep.draws - 1;
        done += 1;
    }
    let mean = retries as f64 / 50.0;
    (
        invalid == 0 && mean <= 4.0,
        format!("{invalid} invalid pairs, mean retries {mean:.2}"),
    )
}

fn longcode_yes() -> (bool, String) {
    let eps = rat(1, 10);
    for seed in 0..5 {
        let pcp =
            LayeredPcp::planted_toy(&[2, 2], &[3, 2], 1, &mut stage_rng(seed, "acceptance-pcp"))
                .unwrap();
        let g = LongCodeGadget::build(&pcp, &eps).unwrap();
        let part = yes_partition(&g, pcp.planted().unwrap(), 0, &mut stage_rng(seed, "y")).unwrap();
        let want = rat(9, 20);
        if part.weight_1 != want || part.weight_2 != want || part.weight_star != eps {
            return (
                false,
                format!(
                    "seed {seed}: weights {} {} {}",
                    part.weight_1, part.weight_2, part.weight_star
                ),
            );
        }
        if !part.certificate.exhaustive || !part.certificate.violations.is_empty() {
            return (
                false,
                format!("seed {seed}: {:?}", part.certificate.violations),
            );
        }
    }
    (
        true,
        "5 toys, weights (9/20, 9/20, 1/10), 0 monochromatic edges".into(),
    )
}

fn ddr_min_atom() -> (bool, String) {
    for &delta in &[0.1, 0.25] {
        for r in 1..=3 {
            let rep = correlation_suite(delta, r).unwrap();
            if !rep.regime || rep.min_atom != delta / (r as f64 * (1u64 << r) as f64) {
                return (
                    false,
                    format!("delta {delta}, r {r}: min atom {}", rep.min_atom),
                );
            }
        }
    }
    (
        true,
        "min atom = delta/(r 2^r) exactly on all 6 cases".into(),
    )
}

fn ddr_part_ii() -> (bool, String) {
    let mut worst = (0.0, 0.0, 0);
    for &delta in &[0.1, 0.25] {
        for r in 1..=3 {
            let rep = correlation_suite(delta, r).unwrap();
            if rep.part_ii.value - delta > worst.0 - worst.1 || worst == (0.0, 0.0, 0) {
                worst = (rep.part_ii.value, delta, r);
            }
        }
    }
    let pass = worst.0 <= worst.1 + 1e-9;
    (
        pass,
        format!(
            "worst rho(X, YZ) = {:.6} at delta {}, r {}",
            worst.0, worst.1, worst.2
        ),
    )
}

fn ddr_part_iv() -> (bool, String) {
    let mut slack = f64::INFINITY;
    for &delta in &[0.1, 0.25] {
        for r in 1..=3 {
            let rep = correlation_suite(delta, r).unwrap();
            slack = slack.min(rep.part_iv.bound + 1e-9 - rep.part_iv.value);
        }
    }
    (
        slack >= 0.0,
        format!("min slack of rho(Y, Z) <= 1 - xi^2/2: {slack:.3e}"),
    )
}

fn random_product_fn(rng: &mut impl Rng, n: usize) -> ProductFn {
    let measures: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let w: Vec<f64> = (0..rng.random_range(2..=3))
                .map(|_| rng.random_range(0.1..1.0))
                .collect();
            let s: f64 = w.iter().sum();
            w.iter().map(|x| x / s).collect()
        })
        .collect();
    ProductFn::from_fn(measures, |_| rng.random_range(-1.0..1.0)).unwrap()
}

fn noise_lemmas() -> (bool, String) {
    let mut rng = stage_rng(9, "acceptance-noise");
    let mut fails = [0; 3];
    for _ in 0..100 {
        let n = rng.random_range(1..=4);
        let f = random_product_fn(&mut rng, n);
        let s = rng.random_range(1..=n);
        let es = f.efron_stein().unwrap();
        let mut g = vec![0.0; f.values().len()];
        for (mask, part) in es.parts.iter().enumerate() {
            if (mask as u32).count_ones() as usize >= s {
                g.iter_mut().zip(part.values()).for_each(|(a, b)| *a += b);
            }
        }
        let g = ProductFn::new(f.measures().to_vec(), g).unwrap();
        let rho: f64 = rng.random_range(0.0..1.0);
        if g.bonami_beckner(rho).unwrap().norm2() > rho.powi(s as i32) * g.norm2() + 1e-10 {
            fails[0] += 1;
        }
    }
    for _ in 0..100 {
        let r = rng.random_range(1..=2);
        let blocks = rng.random_range(1..=if r == 1 { 4 } else { 3 });
        let values: Vec<f64> = (0..1 << (blocks * r))
            .map(|_| rng.random_range(0.0..1.0))
            .collect();
        let chk = influence_lemmas(&values, blocks, r, rng.random_range(0.05..0.5), 1e-10).unwrap();
        fails[1] += !chk.product_holds as usize;
        fails[2] += !chk.block_holds as usize;
    }
    (
        fails == [0; 3],
        format!(
            "violations: contraction {}, product-influence {}, block-influence {}",
            fails[0], fails[1], fails[2]
        ),
    )
}

fn gamma_quadrature() -> (bool, String) {
    let mut err = [0.0f64; 3];
    for i in 1..10 {
        for j in 1..10 {
            let (mu, nu) = (i as f64 / 10.0, j as f64 / 10.0);
            err[0] = err[0].max((gamma_lower(0.0, mu, nu).unwrap() - mu * nu).abs());
            err[0] = err[0].max((gamma_upper(0.0, mu, nu).unwrap() - mu * nu).abs());
            for k in 1..10 {
                let rho = k as f64 / 10.0;
                let s = gamma_lower(rho, mu, nu).unwrap() + gamma_upper(rho, mu, 1.0 - nu).unwrap();
                err[2] = err[2].max((s - mu).abs());
            }
        }
    }
    for k in 1..10 {
        let rho = k as f64 / 10.0;
        let want = 0.25 - rho.asin() / (2.0 * std::f64::consts::PI);
        err[1] = err[1].max((gamma_lower(rho, 0.5, 0.5).unwrap() - want).abs());
    }
    (
        err[0] <= 1e-8 && err[1] <= 1e-6 && err[2] <= 1e-7,
        format!(
            "product {:.1e}, arcsin {:.1e}, complement {:.1e}",
            err[0], err[1], err[2]
        ),
    )
}

fn smooth_structure() -> (bool, String) {
    let mut detail = Vec::new();
    for t in 1..=2 {
        let game = Dto1Game::random(
            3,
            6,
            1,
            2,
            2,
            true,
            &mut stage_rng(t as u64, "acceptance-game"),
        )
        .unwrap();
        let pcp = build_smooth_mlpcp(&game, 2, t).unwrap();
        for c in pcp.constraints() {
            let want = 2usize.pow((c.target_layer - c.layer) as u32);
            let mut counts = vec![0; pcp.layers()[c.target_layer].label_size];
            c.proj.iter().for_each(|&a| counts[a as usize] += 1);
            if counts.iter().any(|&n| n != want) {
                return (false, format!("T = {t}: preimage sizes {counts:?}"));
            }
        }
        let rep = pcp.check_smoothness().unwrap();
        if rep.max > 1.0 / t as f64 {
            return (false, format!("T = {t}: smoothness {}", rep.max));
        }
        detail.push(format!(
            "T={t}: {} projections, smoothness {:.3}",
            pcp.constraints().len(),
            rep.max
        ));
    }
    (true, detail.join("; "))
}

fn dto1_yes() -> (bool, String) {
    let mut edges = 0;
    for seed in 0..3 {
        let pcp = LayeredPcp::planted_dto1_toy(
            &[2, 2],
            2,
            2,
            1,
            1,
            &mut stage_rng(seed, "acceptance-dto1"),
        )
        .unwrap();
        let g = Dto1Gadget::build(&pcp, 0.25).unwrap();
        let cert =
            dto1::yes_check(&g, pcp.planted().unwrap(), 0, &mut stage_rng(seed, "y")).unwrap();
        if !cert.exhaustive || !cert.proper() {
            return (
                false,
                format!("seed {seed}: {} violations", cert.violations.len()),
            );
        }
        edges += cert.checked_edges;
    }
    for r in 1..=3 {
        if let Some(v) = support_safety_violation(&DDeltaR::new(0.25, r).unwrap()) {
            return (false, format!("r {r}: monochromatic atom {v:?}"));
        }
    }
    (
        true,
        format!("{edges} edges bichromatic; D tables r = 1..3 support-safe"),
    )
}

fn dictator_decoding() -> (bool, String) {
    let mut fr = Vec::new();
    for seed in 0..3 {
        let pcp =
            LayeredPcp::planted_toy(&[2, 2], &[3, 2], 1, &mut stage_rng(seed, "acceptance-dec4"))
                .unwrap();
        let g = LongCodeGadget::build(&pcp, &rat(1, 10)).unwrap();
        let part = yes_partition(&g, pcp.planted().unwrap(), 0, &mut stage_rng(seed, "y")).unwrap();
        let h1: Vec<bool> = part.class.iter().map(|&c| c == 1).collect();
        let out = longcode::decode(&g, &h1, 0.25, &mut stage_rng(seed, "d")).unwrap();
        fr.push(out.satisfied_fraction);

        let pcp = LayeredPcp::planted_dto1_toy(
            &[2, 2],
            2,
            2,
            1,
            1,
            &mut stage_rng(seed, "acceptance-dec5"),
        )
        .unwrap();
        let sigma = pcp.planted().unwrap();
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
        fr.push(
            dto1::decode(&pcp, &ind, &params, &mut stage_rng(seed, "d"))
                .unwrap()
                .satisfied_fraction,
        );
    }
    (
        fr.iter().all(|&f| f == 1.0),
        format!("satisfied fractions {fr:?}"),
    )
}

fn oracle_duality() -> (bool, String) {
    let mut rng = stage_rng(14, "acceptance-duality");
    for i in 0..100 {
        let n = rng.random_range(3..=16);
        let k = rng.random_range(2..=3);
        let weights = (0..n)
            .map(|_| rat(rng.random_range(1..8), rng.random_range(1..4)))
            .collect();
        let edges = (0..rng.random_range(0..2 * n))
            .map(|_| {
                let mut e: Vec<usize> = Vec::new();
                while e.len() < k {
                    let v = rng.random_range(0..n);
                    if !e.contains(&v) {
                        e.push(v);
                    }
                }
                e
            })
            .collect();
        let h = GenericHypergraph::weighted(weights, k, edges).unwrap();
        let mis = max_independent_set(&h, DEFAULT_NODE_BUDGET).unwrap();
        let (_, vc) = min_vertex_cover_brute(&h);
        if !mis.optimal || mis.weight.clone() + vc.clone() != h.total_weight() {
            return (
                false,
                format!(
                    "instance {i}: IS {} + VC {vc} != {}",
                    mis.weight,
                    h.total_weight()
                ),
            );
        }
    }
    (true, "100 hypergraphs, IS + VC = total exactly".into())
}

#[test]
fn acceptance() {
    let outcomes = vec![
        run("1 folding lemma", 10, folding_lemma),
        run("2 Hadamard YES", 30, hadamard_yes),
        run("3 Hadamard NO pipeline", 60, hadamard_no),
        run("4 Russo bracket", 30, russo),
        run("5 core mass", 60, core_mass),
        run("6 two-element witness", 30, witness),
        run("7 long-code YES", 30, longcode_yes),
        run("8a D min atom", 10, ddr_min_atom),
        run("8b D rho(X, YZ) <= delta", 10, ddr_part_ii),
        run("8c D rho(Y, Z) <= 1 - xi^2/2", 10, ddr_part_iv),
        run("9 noise lemmas", 60, noise_lemmas),
        run("10 Gamma quadrature", 10, gamma_quadrature),
        run("11 smooth MLPCP", 30, smooth_structure),
        run("12 d-to-1 YES", 30, dto1_yes),
        run("13 dictator decoding", 120, dictator_decoding),
        run("14 oracle duality", 60, oracle_duality),
    ];
    let mut failed = Vec::new();
    for o in &outcomes {
        let in_time = o.elapsed <= o.limit;
        let pass = o.pass && in_time;
        println!(
            "criterion {:<32} {}  ({:.2}s / {}s)  {}",
            o.id,
            if pass { "PASS" } else { "FAIL" },
            o.elapsed.as_secs_f64(),
            o.limit.as_secs(),
            o.detail
        );
        if !pass {
            failed.push(o.id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
