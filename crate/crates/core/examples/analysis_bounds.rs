//! Closed-form quantities for one channel: the eigen spectrum, the expected
//! cell distortion of a random codebook, the Jensen lower bound and the
//! ideal-cooperation ceiling, next to what the codebook actually achieves.

use cascade_coop::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let env = draw_environment(64, 20, 0.0, std::f64::consts::PI, &mut rng)?;
    let w = inner_precoder(&analytic_covariance(&env), 6)?;
    let h_e = effective_channel(&w, &sample_channel(&env, 4, &mut rng)?)?;
    let spectrum = eigen_spectrum(&h_e)?;
    println!("eigenvalues of H_e^H H_e: {:.3?}", spectrum.eigenvalues());
    println!("trace of the inverse: {:.4}", spectrum.trace_inverse());

    let n0 = 1.0;
    let ideal = ideal_cooperation_snr(&spectrum, n0)?;
    let codebook = generate_codebook(4, 12, &mut ChaCha20Rng::seed_from_u64(6))?;
    println!(" b  distortion  lower bound  selected  ideal");
    for bits in [2u32, 4, 6, 8, 10, 12] {
        let distortion = expected_cell_distortion(bits, 4)?;
        let bound = snr_lower_bound(&spectrum, bits, n0)?;
        let prefix = codebook.prefix(bits)?;
        let selected = select_codeword(&prefix, &h_e, n0)?;
        let angles = matched_distortion(selected.codeword, spectrum.eigenmatrix());
        let mean_angle = angles.iter().sum::<f64>() / angles.len() as f64;
        println!(
            "{bits:2}  {distortion:10.4}  {bound:11.4}  {:8.4}  {ideal:.4}   (measured sin^2 {mean_angle:.4})",
            selected.average_snr
        );
    }
    Ok(())
}
