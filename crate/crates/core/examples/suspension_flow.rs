//! Roof integrals and flow entropies of suspension flows.

use entropy_lab::suspension::{lift_measure, Roof};
use entropy_lab::{ShiftMeasure, TransitionStructure};

fn main() -> entropy_lab::Result<()> {
    let full = TransitionStructure::full(2);
    let mu = ShiftMeasure::bernoulli(vec![0.3, 0.7])?;
    for roof in [Roof::constant(1.0)?, Roof::constant(2.0)?, Roof::depth1(&[1.0, 3.0])?] {
        let f = lift_measure(&mu, &roof, &full, 0)?;
        println!(
            "∫τ = {:.4}: base entropy {:.6}, flow entropy {:.6}",
            f.normalizer, f.base_entropy, f.flow_entropy
        );
    }
    Ok(())
}
