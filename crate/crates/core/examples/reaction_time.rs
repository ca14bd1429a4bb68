//! Shifted-gamma reaction times: quantiles and seeded sampling.

use dss_bva::reaction::{sample, ShiftedGamma, RNG_ALGORITHM};

fn main() -> dss_bva::Result<()> {
    let g = ShiftedGamma::default();
    println!("t0 = {}, k = {}, theta = {}", g.shift, g.shape, g.scale);
    println!("mean {:.4} s, sd {:.4} s", g.mean(), g.variance().sqrt());
    for p in [0.05, 0.5, 0.95, 0.99] {
        println!("  q({p}) = {:.4} s", g.quantile(p)?);
    }

    let seed = 7;
    let n = 100_000;
    let xs = sample(&g, seed, n)?;
    let mean = xs.iter().sum::<f64>() / n as f64;
    let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("\n{n} draws ({RNG_ALGORITHM}, seed {seed}): mean {mean:.4}, min {min:.4}");
    println!("first five: {:?}", &xs[..5]);
    Ok(())
}
