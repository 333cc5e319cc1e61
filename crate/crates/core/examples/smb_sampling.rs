//! Seeded Shannon–McMillan–Breiman and Birkhoff sampling along orbits.

use entropy_lab::entropy::{birkhoff_concentration, smb_deviation};
use entropy_lab::{Potential, ShiftMeasure};

fn main() -> entropy_lab::Result<()> {
    let mu = ShiftMeasure::markov(vec![vec![0.9, 0.1], vec![0.4, 0.6]])?;
    for n in [50, 500, 5000] {
        let s = smb_deviation(&mu, n, 400, 1, 0.05)?;
        println!(
            "n = {n:4}: mean {:.5} (h = {:.5}), sd {:.5}, within ε: {:.3}",
            s.mean, s.entropy, s.stddev, s.fraction_within
        );
    }
    let b = birkhoff_concentration(&mu, &Potential::indicator(1), 1000, 0.02, 400, 1)?;
    println!(
        "frequency of 1: ∫ = {:.5}, fraction within ε = {:.3}",
        b.integral, b.fraction
    );
    Ok(())
}
