//! Correlation profile of the distribution D_{delta,r}.

use hypergadget::dto1::correlation_suite;

fn main() {
    println!("delta  r  xi        min_atom  rho(1,23)  rho(2,3)  1-xi^2/2");
    for &delta in &[0.1, 0.25, 0.5] {
        for r in 1..=3 {
            let c = correlation_suite(delta, r).unwrap();
            println!(
                "{delta:<5}  {r}  {:.6}  {:.6}  {:.6}   {:.6}  {:.6}",
                c.xi, c.min_atom, c.part_ii.value, c.part_iv.value, c.part_iv.bound
            );
        }
    }
}
