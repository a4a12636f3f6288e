//! Monotone ternary families: Russo bracket, core, and a two-element witness.

use hypergadget::seed::stage_rng;
use hypergadget::ternary::random_monotone;

fn main() {
    let mut rng = stage_rng(3, "ternary");
    let p = 0.8;
    let fam = random_monotone(5, 3, &mut rng).unwrap();
    println!(
        "m = {}, |F| = {}, mu_p = {:.4}",
        fam.m(),
        fam.len(),
        fam.measure(p)
    );

    let russo = fam.russo_check(p, 1e-4).unwrap();
    println!(
        "d mu/dp = {:.4}, AS = {:.4}, bracket [{:.4}, {:.4}] holds: {}",
        russo.derivative, russo.average_sensitivity, russo.lower, russo.upper, russo.holds
    );

    let core = fam.find_core(0.1, p);
    println!(
        "core {:?} (threshold {:.3}), core mass {:.4}",
        core.core, core.threshold, core.core_mass
    );

    let w = fam.two_element_witness(p, 0.2, &mut rng).unwrap();
    println!(
        "witness on S = {:?}: f = {:?}, f' = {:?}, valid: {}, draws: {}",
        w.pair.s,
        w.pair.f,
        w.pair.f_prime,
        w.pair.is_valid(),
        w.draws
    );
}
