use std::f64::consts::FRAC_PI_2;

use cascade_coop::bounds::{eigen_spectrum, ideal_cooperation_snr, snr_lower_bound, EigenSpectrum};
use cascade_coop::channel::{analytic_covariance, steering_vector, ScatteringEnvironment};
use cascade_coop::codebook::{average_snr, generate_codebook, CodewordScores};
use cascade_coop::linalg::{complex_gaussian_matrix, hermitian_eigen, CMatrix};
use cascade_coop::precoding::{
    per_user_snr, per_user_snr_matrix_form, EffectiveChannel, GramInverse,
};
use cascade_coop::quantization::{
    bits_from_bandwidth, quantization_noise_variance, uniform_quantize, CooperationLink,
    QuantizerConfig,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn channel(seed: u64, d: usize, p: usize) -> EffectiveChannel {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    EffectiveChannel::new(complex_gaussian_matrix(&mut rng, d, p, 1.0)).unwrap()
}

fn angle() -> impl Strategy<Value = f64> {
    -FRAC_PI_2..FRAC_PI_2
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steering_vector_has_norm_sqrt_m(theta in angle(), m in 1usize..128) {
        let s = steering_vector(theta, m).unwrap();
        prop_assert!((s.norm() - (m as f64).sqrt()).abs() < 1e-9);
        prop_assert!(s.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn covariance_ignores_path_order(
        angles in prop::collection::vec(angle(), 1..12),
        m in 2usize..24,
        rotate in 0usize..12,
    ) {
        let mut shuffled = angles.clone();
        let k = rotate % shuffled.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        let a = analytic_covariance(&ScatteringEnvironment::new(m, angles).unwrap());
        let b = analytic_covariance(&ScatteringEnvironment::new(m, shuffled).unwrap());
        prop_assert_eq!(a.matrix(), b.matrix());
        prop_assert!((a.trace() - m as f64).abs() < 1e-9 * m as f64);
    }

    #[test]
    fn rotated_gram_inverse_matches_quadratic_form(
        seed in any::<u64>(),
        users in 1usize..6,
        extra in 0usize..4,
        n0 in 0.01f64..10.0,
    ) {
        let h_e = channel(seed, users + extra, users);
        let cb = generate_codebook(users, 2, &mut ChaCha20Rng::seed_from_u64(!seed)).unwrap();
        for q in cb.codewords() {
            for p in 0..users {
                let fast = per_user_snr(&h_e, q, n0, p).unwrap();
                let slow = per_user_snr_matrix_form(&h_e, q, n0, p).unwrap();
                prop_assert!((fast - slow).abs() <= 1e-8 * slow.abs());
            }
        }
    }

    #[test]
    fn spectrum_is_invariant_under_unitary_conjugation(seed in any::<u64>(), users in 1usize..6) {
        let h_e = channel(seed, users + 2, users);
        let a = h_e.gram();
        let q = generate_codebook(users, 0, &mut ChaCha20Rng::seed_from_u64(!seed)).unwrap();
        let q = q.codewords()[0].matrix();
        let rotated: CMatrix = q.adjoint() * &a * q;
        let x = hermitian_eigen(&a).unwrap().values;
        let y = hermitian_eigen(&rotated).unwrap().values;
        for (l, r) in x.iter().zip(&y) {
            prop_assert!((l - r).abs() <= 1e-9 * x[0]);
        }
    }

    #[test]
    fn no_codeword_beats_the_eigenbasis(seed in any::<u64>(), users in 1usize..5) {
        let h_e = channel(seed, users + 2, users);
        let spectrum = eigen_spectrum(&h_e).unwrap();
        let ideal = ideal_cooperation_snr(&spectrum, 1.0).unwrap();
        let cb = generate_codebook(users, 4, &mut ChaCha20Rng::seed_from_u64(!seed)).unwrap();
        for q in cb.codewords() {
            prop_assert!(average_snr(&h_e, q, 1.0).unwrap() <= ideal * (1.0 + 1e-9));
        }
        let best = average_snr(&h_e, &spectrum.decoding_matrix().unwrap(), 1.0).unwrap();
        prop_assert!((best - ideal).abs() <= 1e-9 * ideal);
    }

    #[test]
    fn larger_prefixes_never_select_worse(seed in any::<u64>(), users in 2usize..5) {
        let h_e = channel(seed, 6, users);
        let cb = generate_codebook(users, 8, &mut ChaCha20Rng::seed_from_u64(!seed)).unwrap();
        let scores = CodewordScores::new(&cb, &GramInverse::new(&h_e).unwrap()).unwrap();
        let best: Vec<f64> = (0..=8).map(|b| scores.best_in_prefix(1 << b).1).collect();
        prop_assert!(best.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn lower_bound_never_exceeds_ideal(
        lambdas in prop::collection::vec(1e-3f64..1e3, 2..8),
        bits in 0u32..20,
        n0 in 0.01f64..10.0,
    ) {
        let spectrum = EigenSpectrum::from_eigenvalues(lambdas).unwrap();
        let bound = snr_lower_bound(&spectrum, bits, n0).unwrap();
        let ideal = ideal_cooperation_snr(&spectrum, n0).unwrap();
        prop_assert!(bound > 0.0 && bound <= ideal * (1.0 + 1e-9));
    }

    #[test]
    fn link_bits_grow_with_bandwidth_and_snr(
        ratio in 0.0f64..20.0,
        more in 0.0f64..5.0,
        gamma_db in -10.0f64..40.0,
        gamma_more in 0.0f64..10.0,
    ) {
        let base = bits_from_bandwidth(&CooperationLink::from_db(ratio, gamma_db).unwrap());
        let wider = bits_from_bandwidth(&CooperationLink::from_db(ratio + more, gamma_db).unwrap());
        let cleaner = bits_from_bandwidth(&CooperationLink::from_db(ratio, gamma_db + gamma_more).unwrap());
        prop_assert_eq!(base % 2, 0);
        prop_assert!(wider >= base && cleaner >= base);
    }

    #[test]
    fn quantizer_error_is_bounded_in_range(
        re in -30.0f64..30.0,
        im in -30.0f64..30.0,
        half_bits in 1u32..10,
    ) {
        let cfg = QuantizerConfig::new(2 * half_bits, 30.0).unwrap();
        let y = Complex64::new(re, im);
        let (yq, overloads) = uniform_quantize(y, &cfg);
        prop_assert_eq!(overloads, 0);
        prop_assert!((yq.re - re).abs() <= cfg.step() / 2.0 + 1e-12);
        prop_assert!((yq.im - im).abs() <= cfg.step() / 2.0 + 1e-12);
        let finer = QuantizerConfig::new(2 * half_bits + 2, 30.0).unwrap();
        prop_assert!(quantization_noise_variance(&finer) < quantization_noise_variance(&cfg));
    }
}
