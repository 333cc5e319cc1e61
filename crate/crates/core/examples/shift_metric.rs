//! Admissibility, the `d_θ` metric and dynamical balls as cylinders.

use entropy_lab::shift::{ball_as_cylinder, d_theta, enumerate_cylinders, is_admissible, MetricParams};
use entropy_lab::TransitionStructure;

fn main() -> entropy_lab::Result<()> {
    let gm = TransitionStructure::golden_mean();
    println!("[0,1,0,0] admissible: {}", is_admissible(&[0, 1, 0, 0], &gm)?);
    println!("[0,1,1] admissible: {}", is_admissible(&[0, 1, 1], &gm)?);

    let words: Vec<_> = enumerate_cylinders(&gm, 0, 4)?.collect();
    println!("{} admissible words of length 4:", words.len());
    for w in &words {
        println!("  {w}");
    }

    let p = MetricParams::new(0.5)?;
    let x = [0, 1, 0, 0, 1, 0];
    let y = [0, 1, 0, 1, 0, 0];
    println!("d(x, y) = {:?}", d_theta(&x, &y, p));
    println!("(2, θ^1)-ball around x = {}", ball_as_cylinder(&x, 2, 1)?);
    Ok(())
}
