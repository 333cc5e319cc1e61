//! Entropy along sequences that lose mass to infinity, and the tail bound.

use entropy_lab::entropy::tail_entropy_bound;
use entropy_lab::experiments::{run, ExperimentConfig, ExperimentKind};

fn main() -> entropy_lab::Result<()> {
    let cfg = ExperimentConfig::from_path(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/configs/semicontinuity_block.json"
    ))?;
    for h in [0.0, 1.0, 4f64.ln()] {
        let mut cfg = cfg.clone();
        cfg.entropy_at_infinity = Some(h);
        let out = run(ExperimentKind::Semicontinuity, &cfg)?;
        println!("h∞ = {h:.4}: {:?}", out.verdict);
    }

    let masses: Vec<f64> = (1..=2000).map(|k| 1.0 / (k as f64 * (k as f64 + 1.0))).collect();
    for m in [1, 10, 100] {
        let b = tail_entropy_bound(&masses, m)?;
        println!("M = {m:3}: tail entropy {:.5} ≤ {:.5}", b.tail_entropy, b.bound);
    }
    Ok(())
}
