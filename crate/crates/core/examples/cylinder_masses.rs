//! Cylinder masses for Bernoulli, Markov, geometric and mixed measures.

use entropy_lab::ShiftMeasure;

fn main() -> entropy_lab::Result<()> {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let parry = ShiftMeasure::markov(vec![vec![1.0 / g, 1.0 / (g * g)], vec![1.0, 0.0]])?;
    let geo = ShiftMeasure::geometric(0.5)?;
    let mix = ShiftMeasure::mixture(vec![
        (0.6, ShiftMeasure::uniform(2)?),
        (0.4, ShiftMeasure::orbit(vec![7])?),
    ])?;

    for w in [vec![0], vec![0, 1], vec![0, 1, 0], vec![1, 1]] {
        println!("parry{:?} = {:.6}", w, parry.cylinder_mass(&w));
    }
    for w in [vec![1], vec![3, 3], vec![7, 7, 7]] {
        println!(
            "geometric{:?} = {:.6}  mixture{:?} = {:.6}",
            w,
            geo.cylinder_mass(&w),
            w,
            mix.cylinder_mass(&w)
        );
    }
    let m = mix.total_mass_at(4);
    println!("mixture mass on symbols < 4: {} (tail bound {})", m.value, m.tail_bound);
    Ok(())
}
