//! Array response, spatial covariance and the long-term inner precoder for
//! one random scattering environment.

use cascade_coop::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let (m, l, d) = (64, 20, 6);

    let broadside = steering_vector(0.0, 4)?;
    let entries: Vec<String> = broadside
        .iter()
        .map(|z| format!("{:+.2}{:+.2}j", z.re, z.im))
        .collect();
    println!("s(0) for M=4: [{}]", entries.join(", "));

    let env = draw_environment(m, l, 0.0, std::f64::consts::PI, &mut rng)?;
    let degrees: Vec<String> = env
        .path_angles()
        .iter()
        .take(5)
        .map(|a| format!("{:.1}", a.to_degrees()))
        .collect();
    println!("{l} paths, first angles (deg): {}", degrees.join(", "));

    let cov = analytic_covariance(&env);
    let w = inner_precoder(&cov, d)?;
    println!("trace(R) = {:.3} (M = {m})", cov.trace());
    println!(
        "top-{d} eigenvalues capture {:.1}% of the channel energy",
        100.0 * w.captured_energy() / cov.trace()
    );
    for (i, lambda) in w.eigenvalues().iter().take(d + 2).enumerate() {
        let marker = if i < d { "kept" } else { "" };
        println!("  lambda_{i:<2} = {lambda:8.3} {marker}");
    }
    Ok(())
}
