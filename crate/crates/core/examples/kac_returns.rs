//! First-return masses and Kac's identity.

use entropy_lab::measure::kac_return_masses;
use entropy_lab::ShiftMeasure;

fn main() -> entropy_lab::Result<()> {
    let mu = ShiftMeasure::markov(vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.8, 0.1], vec![0.3, 0.3, 0.4]])?;
    let r = kac_return_masses(&mu, &[0], 200)?;
    for (n, m) in r.masses.iter().enumerate().take(6) {
        println!("μ(A_{}) = {m:.6}", n + 1);
    }
    println!("Σ n μ(A_n) = {:.12} + tail ≤ {:.1e}", r.weighted_sum, r.tail_bound);
    Ok(())
}
