//! Gaussian noise-stability bounds on a small grid.

use hypergadget::analysis::gamma_bounds;

fn main() {
    println!("rho   mu   nu   lower     upper");
    for &rho in &[0.0, 0.3, 0.6, 0.9] {
        for &(mu, nu) in &[(0.5, 0.5), (0.2, 0.7), (0.1, 0.1)] {
            let (lo, hi) = gamma_bounds(rho, mu, nu).unwrap();
            println!("{rho:.1}  {mu:.1}  {nu:.1}  {lo:.6}  {hi:.6}");
        }
    }
}
