//! Monte Carlo checks of the closed forms against direct simulation.

use cascade_coop::channel::{
    analytic_covariance, draw_environment, inner_precoder, sample_channel,
};
use cascade_coop::codebook::{generate_codebook, select_codeword};
use cascade_coop::linalg::CMatrix;
use cascade_coop::linksim::{simulate_link, Sharing, SymbolAlphabet};
use cascade_coop::precoding::{effective_channel, EffectiveChannel};
use cascade_coop::quantization::{
    bits_from_bandwidth, quantized_snr, CooperationLink, QuantizerConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

const TAU: f64 = 30.0;

fn effective(seed: u64, users: usize) -> EffectiveChannel {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let env = draw_environment(64, 20, 0.0, std::f64::consts::PI, &mut rng).unwrap();
    let w = inner_precoder(&analytic_covariance(&env), 6).unwrap();
    effective_channel(&w, &sample_channel(&env, users, &mut rng).unwrap()).unwrap()
}

#[test]
fn sample_covariance_converges_to_analytic() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let env = draw_environment(32, 8, 0.3, 1.2, &mut rng).unwrap();
    let draws = 100_000;
    let mut acc = CMatrix::zeros(32, 32);
    for _ in 0..draws {
        let h = sample_channel(&env, 1, &mut rng).unwrap();
        let col = h.matrix().column(0);
        acc += col * col.adjoint();
    }
    acc /= cascade_coop::linalg::C64::from(draws as f64);
    let analytic = analytic_covariance(&env);
    let err = (&acc - analytic.matrix()).norm() / analytic.matrix().norm();
    assert!(err < 0.02, "relative Frobenius error {err}");
}

#[test]
fn gaussian_symbols_match_closed_form_sinr() {
    let h_e = effective(21, 4);
    let cb = generate_codebook(4, 6, &mut ChaCha20Rng::seed_from_u64(22)).unwrap();
    let n0 = 0.5;
    let sel = select_codeword(&cb, &h_e, n0).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(23);
    let m = simulate_link(
        &h_e,
        sel.codeword,
        n0,
        100_000,
        SymbolAlphabet::Gaussian,
        Sharing::Perfect,
        &mut rng,
    )
    .unwrap();
    for (p, sinr) in m.sinr.iter().enumerate() {
        let expect = cascade_coop::precoding::per_user_snr(&h_e, sel.codeword, n0, p).unwrap();
        assert!(
            (sinr / expect - 1.0).abs() < 0.03,
            "user {p}: {sinr} vs {expect}"
        );
    }
    assert_eq!(m.overload_rate, None);
}

#[test]
fn quantized_sharing_matches_effective_noise_model() {
    // 10 dB downlink with a 12-bit link: quantization noise is comparable to
    // thermal noise and fine enough to behave as additive white noise.
    let h_e = effective(31, 4);
    let cb = generate_codebook(4, 6, &mut ChaCha20Rng::seed_from_u64(32)).unwrap();
    let n0 = 0.1;
    let sel = select_codeword(&cb, &h_e, n0).unwrap();
    // log2(1 + 15) = 4 bits per unit bandwidth.
    let link = CooperationLink::new(3.0, 15.0).unwrap();
    assert_eq!(bits_from_bandwidth(&link), 12);
    let model = quantized_snr(&h_e, sel.codeword, n0, &link, TAU).unwrap();
    assert!(model.cooperative && model.sigma_q2 > 0.5 * n0);

    let cfg = QuantizerConfig::new(12, TAU).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(33);
    let m = simulate_link(
        &h_e,
        sel.codeword,
        n0,
        100_000,
        SymbolAlphabet::Gaussian,
        Sharing::Quantized(cfg),
        &mut rng,
    )
    .unwrap();
    assert_eq!(m.overload_rate, Some(0.0));
    for (p, (sinr, expect)) in m.sinr.iter().zip(&model.snrs).enumerate() {
        assert!(
            (sinr / expect - 1.0).abs() < 0.05,
            "user {p}: {sinr} vs {expect}"
        );
    }
}
