//! Maximal entropy under a frequency budget, by Lagrangian duality.

use entropy_lab::thermo::constrained_pressure;
use entropy_lab::{Potential, TransitionStructure};

fn main() -> entropy_lab::Result<()> {
    let full = TransitionStructure::full(2);
    let count_ones = Potential::depth1(&[0.0, 1.0])?;
    for d in [0.0, 0.1, 0.2, 0.3, 0.5, 0.8] {
        let r = constrained_pressure(&Potential::zero(), &count_ones, d, &full, 0)?;
        println!(
            "freq(1) ≤ {d:.1}: value {:.6}, t* {:.4}, witness freq {:.4}",
            r.value, r.multiplier, r.witness_constraint
        );
    }
    Ok(())
}
