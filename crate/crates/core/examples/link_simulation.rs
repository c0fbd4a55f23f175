//! Symbol-level simulation of the whole chain: precode, transmit, share the
//! received samples (exactly or quantized), decode, and compare the measured
//! SINR with the closed forms.

use cascade_coop::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(41);
    let env = draw_environment(64, 20, 0.0, std::f64::consts::PI, &mut rng)?;
    let w = inner_precoder(&analytic_covariance(&env), 6)?;
    let h_e = effective_channel(&w, &sample_channel(&env, 4, &mut rng)?)?;
    let codebook = generate_codebook(4, 8, &mut ChaCha20Rng::seed_from_u64(42))?;
    let n0 = 0.1;
    let chosen = select_codeword(&codebook, &h_e, n0)?;
    let q = chosen.codeword;
    let symbols = 50_000;

    let perfect = simulate_link(
        &h_e,
        q,
        n0,
        symbols,
        SymbolAlphabet::Qpsk,
        Sharing::Perfect,
        &mut rng,
    )?;
    let link = CooperationLink::new(3.0, 15.0)?;
    let model = quantized_snr(&h_e, q, n0, &link, 30.0)?;
    let quantized = simulate_link(
        &h_e,
        q,
        n0,
        symbols,
        SymbolAlphabet::Gaussian,
        Sharing::Quantized(QuantizerConfig::new(model.bits, 30.0)?),
        &mut rng,
    )?;

    println!("{symbols} symbols, SNR 10 dB, {}-bit sharing", model.bits);
    println!("user  perfect: sim / closed form    quantized: sim / closed form");
    for p in 0..4 {
        println!(
            "{p:>4}  {:8.3} / {:8.3}             {:8.3} / {:8.3}",
            perfect.sinr[p],
            per_user_snr(&h_e, q, n0, p)?,
            quantized.sinr[p],
            model.snrs[p]
        );
    }
    println!(
        "clipped components: {:.2e}",
        quantized.overload_rate.unwrap_or(0.0)
    );
    Ok(())
}
