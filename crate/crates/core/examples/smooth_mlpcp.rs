//! Smooth layered PCP from a random d-to-1 game, with its smoothness profile.

use hypergadget::csp::{build_smooth_mlpcp, Dto1Game};
use hypergadget::seed::stage_rng;

fn main() {
    let game = Dto1Game::random(3, 6, 1, 2, 2, true, &mut stage_rng(6, "game")).unwrap();
    for t in 1..=2 {
        let pcp = build_smooth_mlpcp(&game, 2, t).unwrap();
        let rep = pcp.check_smoothness().unwrap();
        let sizes: Vec<usize> = pcp.layers().iter().map(|l| l.num_vars).collect();
        println!(
            "T = {t}: layer sizes {sizes:?}, {} constraints, max collision {:.4} (bound {:.4})",
            pcp.constraints().len(),
            rep.max,
            1.0 / t as f64
        );
    }
}
