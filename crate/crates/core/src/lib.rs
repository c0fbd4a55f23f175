//! Cascaded precoding for massive MIMO downlinks with device-to-device
//! receiver cooperation.
//!
//! The base station applies a long-term inner precoder built from the
//! shared spatial covariance, then a zero-forcing outer precoder on the
//! low-dimensional effective channel. Co-located users exchange their
//! received samples and decode with a unitary matrix that the base station
//! picks from a pre-stored random codebook. The crate covers the channel
//! model, the precoders, codebook selection, closed-form bounds, quantized
//! sample sharing over a rate-limited link, and a reproducible Monte Carlo
//! harness that writes capacity curves as CSV.
//!
//! ```
//! use cascade_coop::prelude::*;
//! use rand::SeedableRng;
//!
//! let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
//! let env = draw_environment(64, 20, 0.0, std::f64::consts::PI, &mut rng)?;
//! let w = inner_precoder(&analytic_covariance(&env), 6)?;
//! let h_e = effective_channel(&w, &sample_channel(&env, 4, &mut rng)?)?;
//! let codebook = generate_codebook(4, 6, &mut rng)?;
//! let chosen = select_codeword(&codebook, &h_e, 1.0)?;
//! let ideal = ideal_cooperation_snr(&eigen_spectrum(&h_e)?, 1.0)?;
//! assert!(chosen.average_snr <= ideal * (1.0 + 1e-9));
//! # Ok::<(), cascade_coop::Error>(())
//! ```

pub mod bounds;
pub mod channel;
pub mod codebook;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod linksim;
pub mod precoding;
pub mod quantization;

pub use error::{Error, Result};

/// The commonly used types and functions.
pub mod prelude {
    pub use crate::bounds::{
        eigen_spectrum, expected_cell_distortion, ideal_cooperation_snr, lower_bound_terms,
        matched_distortion, snr_lower_bound, EigenSpectrum,
    };
    pub use crate::channel::{
        analytic_covariance, draw_environment, inner_precoder, sample_channel, steering_vector,
        ChannelMatrix, InnerPrecoder, ScatteringEnvironment, SpatialCovariance,
    };
    pub use crate::codebook::{
        average_snr, generate_codebook, select_codeword, CodewordScores, DecodingCodebook,
        DecodingMatrix, Selection,
    };
    pub use crate::error::{Error, Result};
    pub use crate::harness::{
        capacity, run_experiment, Experiment, ExperimentConfig, ExperimentOutput, Mode, Preset,
    };
    pub use crate::linksim::{simulate_link, Sharing, SymbolAlphabet};
    pub use crate::precoding::{
        effective_channel, noncooperative_baseline_snr, per_user_snr, per_user_snr_matrix_form,
        zf_outer_precoder, EffectiveChannel, GramInverse, OuterPrecoder,
    };
    pub use crate::quantization::{
        bits_from_bandwidth, effective_noise_power, quantization_noise_variance, quantized_snr,
        uniform_quantize, CooperationLink, QuantizerConfig, UniformQuantizer,
    };
}
