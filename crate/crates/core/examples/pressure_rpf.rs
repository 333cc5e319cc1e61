//! Transfer-operator pressure and the equilibrium state of a depth-1 potential.

use entropy_lab::entropy::exact_entropy;
use entropy_lab::thermo::{equilibrium_gap, pressure_over_schedule, rpf_equilibrium, transfer_pressure};
use entropy_lab::{Potential, TransitionStructure};

fn main() -> entropy_lab::Result<()> {
    let gm = TransitionStructure::golden_mean();
    let phi = Potential::depth1(&[0.0, -0.5])?;
    let p = transfer_pressure(&phi, &gm, 0)?;
    let mu = rpf_equilibrium(&phi, &gm, 0)?;
    println!("P(φ) = {p:.12}");
    println!("h(μ_φ) = {:.12}", exact_entropy(&mu)?);
    println!("P − h − ∫φ = {:.2e}", equilibrium_gap(&mu, &phi, &gm, 0)?);

    // pressure of −β·n on truncations of the countable full shift
    let full = TransitionStructure::full_countable(vec![2, 4, 8, 16, 32])?;
    let report = pressure_over_schedule(&Potential::affine(0.0, -1.0)?, &full)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
