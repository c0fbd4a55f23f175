//! Rate-limited sharing: how the link bandwidth and SNR set the quantizer
//! resolution, and what that does to each user's SNR.

use cascade_coop::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> Result<()> {
    let tau = 30.0;
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    let env = draw_environment(64, 20, 0.0, std::f64::consts::PI, &mut rng)?;
    let w = inner_precoder(&analytic_covariance(&env), 6)?;
    let h_e = effective_channel(&w, &sample_channel(&env, 4, &mut rng)?)?;
    let codebook = generate_codebook(4, 12, &mut ChaCha20Rng::seed_from_u64(18))?;

    let n0 = 1.0;
    let chosen = select_codeword(&codebook, &h_e, n0)?;
    let perfect: Vec<f64> = (0..4)
        .map(|p| per_user_snr(&h_e, chosen.codeword, n0, p))
        .collect::<Result<_>>()?;
    let zf = noncooperative_baseline_snr(&h_e, n0)?;
    println!("downlink SNR 0 dB, link SNR 20 dB, clip level {tau}");
    println!(
        "perfect sharing {:.3} b/s/Hz, no sharing {:.3} b/s/Hz",
        capacity(&perfect),
        capacity(&zf)
    );
    println!("W_c/W  bits  sigma_Q^2    sum rate");
    for ratio in [0.2, 0.6, 1.0, 1.5, 2.0, 3.0, 4.0] {
        let link = CooperationLink::from_db(ratio, 20.0)?;
        let q = quantized_snr(&h_e, chosen.codeword, n0, &link, tau)?;
        let mode = if q.cooperative {
            ""
        } else {
            "(sharing off, plain ZF)"
        };
        println!(
            "{ratio:5.1}  {:4}  {:10.4e}  {:8.3} {mode}",
            q.bits,
            q.sigma_q2,
            capacity(&q.snrs)
        );
    }

    let mut quantizer = UniformQuantizer::new(QuantizerConfig::new(4, tau)?);
    for y in [0.4, 12.0, 31.0, -45.0] {
        let out = quantizer.quantize(cascade_coop::linalg::C64::new(y, -y / 2.0));
        println!(
            "quantize({y:6.1}, {:6.1}) -> ({:6.2}, {:6.2})",
            -y / 2.0,
            out.re,
            out.im
        );
    }
    println!("overload rate {:.3}", quantizer.overload_rate());
    Ok(())
}
