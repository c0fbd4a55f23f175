//! Zero-forcing on the effective channel: per-user SNR without cooperation
//! and with the eigenbasis decoder that full cooperation allows.

use cascade_coop::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let env = draw_environment(64, 20, 0.0, std::f64::consts::PI, &mut rng)?;
    let w = inner_precoder(&analytic_covariance(&env), 6)?;
    let h = sample_channel(&env, 4, &mut rng)?;
    let h_e = effective_channel(&w, &h)?;
    println!("effective channel: {} x {}", h_e.dim(), h_e.num_users());

    let snr_db = 0.0;
    let n0 = 10f64.powf(-snr_db / 10.0);
    let zf = noncooperative_baseline_snr(&h_e, n0)?;

    let spectrum = eigen_spectrum(&h_e)?;
    let u = spectrum.decoding_matrix()?;
    let v = zf_outer_precoder(&h_e, &u)?;
    let coop: Vec<f64> = (0..4)
        .map(|p| per_user_snr(&h_e, &u, n0, p))
        .collect::<Result<_>>()?;

    println!("SNR {snr_db} dB");
    println!("user  ZF SNR   eigen-decoder SNR   eigenvalue/N0   precoder gain");
    for p in 0..4 {
        println!(
            "{p:>4}  {:7.3}  {:18.3}  {:14.3}  {:13.4}",
            zf[p],
            coop[p],
            spectrum.eigenvalues()[p] / n0,
            v.gains()[p]
        );
    }
    println!(
        "sum rate: ZF {:.3} b/s/Hz, ideal cooperation {:.3} b/s/Hz",
        capacity(&zf),
        capacity(&coop)
    );
    Ok(())
}
