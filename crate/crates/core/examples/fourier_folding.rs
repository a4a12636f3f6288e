//! Fold a random table over a subspace H and show that its spectrum lives on H-perp.

use hypergadget::gf2::{fourier_transform, unfold, Gf2Subspace, Gf2Vector};
use hypergadget::seed::stage_rng;
use rand::Rng;

fn main() {
    let mut rng = stage_rng(7, "fourier-folding");
    let m = 6;
    let gens = [
        Gf2Vector::new(m, 0b000111).unwrap(),
        Gf2Vector::new(m, 0b110001).unwrap(),
    ];
    let h = Gf2Subspace::span(m, &gens).unwrap();
    let folded: Vec<f64> = (0..h.num_cosets())
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    let spectrum = fourier_transform(&unfold(&folded, &h).unwrap());

    println!("m = {m}, dim H = {}, cosets = {}", h.dim(), h.num_cosets());
    let mut off = 0;
    for (alpha, c) in spectrum.coeffs().iter().enumerate() {
        if c.abs() > 1e-12 {
            let perp = h.is_orthogonal(alpha as u32);
            off += !perp as usize;
            println!("alpha = {alpha:06b}  coeff = {c:+.4}  in H-perp: {perp}");
        }
    }
    println!(
        "energy = {:.6}, coefficients off H-perp: {off}",
        spectrum.energy()
    );
}
