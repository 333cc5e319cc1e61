//! Gibbs constants of Markov measures against their log-transition potentials.

use entropy_lab::thermo::gibbs_certificate;
use entropy_lab::{Potential, ShiftMeasure, TransitionStructure};

fn main() -> entropy_lab::Result<()> {
    let p = vec![vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3], vec![0.25, 0.25, 0.5]];
    let mu = ShiftMeasure::markov(p.clone())?;
    let phi = Potential::markov_log(&p)?;
    let cert = gibbs_certificate(&mu, &phi, 0.0, 10, &TransitionStructure::full(3), 0)?;
    println!(
        "G = {:.6} ({:?}), worst word {:?}",
        cert.g,
        cert.verdict,
        cert.worst_word.map(|w| w.to_string())
    );

    // the uniform measure is not Gibbs for a biased potential
    let biased = Potential::depth1(&[0.1f64.ln(), 0.9f64.ln()])?;
    let cert = gibbs_certificate(
        &ShiftMeasure::uniform(2)?,
        &biased,
        0.0,
        10,
        &TransitionStructure::full(2),
        0,
    )?;
    println!(
        "uniform vs biased: growth rate {:.4} ({:?})",
        cert.growth_rate, cert.verdict
    );
    Ok(())
}
