//! Katok and plug-in entropy estimates against the exact entropy.

use entropy_lab::entropy::{exact_entropy, katok_estimate, plugin_entropy, simplified_formula_report, KatokOptions};
use entropy_lab::{ShiftMeasure, TransitionStructure};

fn main() -> entropy_lab::Result<()> {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let gm = TransitionStructure::golden_mean();
    let mu = ShiftMeasure::markov(vec![vec![1.0 / g, 1.0 / (g * g)], vec![1.0, 0.0]])?;
    println!("exact h = {:.6}", exact_entropy(&mu)?);
    for n in [6, 10, 14] {
        let k = katok_estimate(&mu, n, 0, 0.3, &gm, 0)?;
        let pl = plugin_entropy(&mu, n, &gm, 0)?;
        println!(
            "N = {n:2}: katok {:.6} (count {}), plug-in {:.6}",
            k.value,
            k.diagnostics.count.unwrap_or(0),
            pl.value
        );
    }
    let r = simplified_formula_report(&mu, 14, 0.3, 0..=3, &gm, 0, KatokOptions::default())?;
    println!("radius spread at N = 14: {:.4}", r.spread);
    Ok(())
}
