//! Quantized sharing of received samples over a rate-limited cooperation
//! link.
//!
//! Each user quantizes its received sample with `c` bits (`c/2` per real
//! component) on `[-tau, tau]` and forwards it to the others. The error
//! variance `2 tau^2 / (3 * 2^c)` enters user `p`'s noise through the
//! weights its decoding vector puts on the other users' samples. The link
//! budget `c W <= W_c log2(1 + gamma)` ties `c` to the cooperation bandwidth.

use crate::codebook::DecodingMatrix;
use crate::error::{invalid, Result};
use crate::linalg::C64;
use crate::precoding::{baseline_from_inverse, EffectiveChannel, GramInverse};

/// Largest bit budget the quantizer accepts; the error variance at this
/// resolution is far below any noise floor of interest.
pub const MAX_BITS: u32 = 128;

/// Bit budget per complex sample and the clipping level per component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerConfig {
    total_bits: u32,
    clip_level: f64,
}

impl QuantizerConfig {
    pub fn new(total_bits: u32, clip_level: f64) -> Result<Self> {
        if total_bits < 2 || !total_bits.is_multiple_of(2) || total_bits > MAX_BITS {
            return Err(invalid(format!(
                "quantizer bits must be even and in 2..={MAX_BITS}, got {total_bits}"
            )));
        }
        if !(clip_level.is_finite() && clip_level > 0.0) {
            return Err(invalid(format!(
                "clip level must be positive, got {clip_level}"
            )));
        }
        Ok(Self {
            total_bits,
            clip_level,
        })
    }

    pub fn total_bits(&self) -> u32 {
        self.total_bits
    }

    pub fn clip_level(&self) -> f64 {
        self.clip_level
    }

    /// Levels per real component, `2^(c/2)`.
    pub fn levels(&self) -> f64 {
        (self.total_bits as f64 / 2.0).exp2()
    }

    /// Cell width per component, `2 tau / 2^(c/2)`.
    pub fn step(&self) -> f64 {
        2.0 * self.clip_level / self.levels()
    }
}

fn quantize_component(x: f64, q: &QuantizerConfig) -> (f64, bool) {
    let tau = q.clip_level;
    let levels = q.levels();
    let step = q.step();
    let overload = x.abs() > tau;
    let index = ((x + tau) / step).floor().clamp(0.0, levels - 1.0);
    (-tau + (index + 0.5) * step, overload)
}

/// Midrise uniform quantization of both components; also reports how many
/// components (0, 1 or 2) fell outside `[-tau, tau]` and were clipped.
pub fn uniform_quantize(y: C64, q: &QuantizerConfig) -> (C64, u32) {
    let (re, o_re) = quantize_component(y.re, q);
    let (im, o_im) = quantize_component(y.im, q);
    (C64::new(re, im), o_re as u32 + o_im as u32)
}

/// Quantizer that keeps a running overload count.
#[derive(Debug, Clone)]
pub struct UniformQuantizer {
    config: QuantizerConfig,
    components: u64,
    overloads: u64,
}

impl UniformQuantizer {
    pub fn new(config: QuantizerConfig) -> Self {
        Self {
            config,
            components: 0,
            overloads: 0,
        }
    }

    pub fn config(&self) -> &QuantizerConfig {
        &self.config
    }

    pub fn quantize(&mut self, y: C64) -> C64 {
        let (out, over) = uniform_quantize(y, &self.config);
        self.components += 2;
        self.overloads += over as u64;
        out
    }

    pub fn overloads(&self) -> u64 {
        self.overloads
    }

    pub fn components(&self) -> u64 {
        self.components
    }

    /// Fraction of quantized real components that were clipped.
    pub fn overload_rate(&self) -> f64 {
        if self.components == 0 {
            0.0
        } else {
            self.overloads as f64 / self.components as f64
        }
    }
}

/// Total quantization error variance `2 tau^2 / (3 * 2^c)`.
pub fn quantization_noise_variance(q: &QuantizerConfig) -> f64 {
    2.0 * q.clip_level * q.clip_level / (3.0 * (q.total_bits as f64).exp2())
}

/// Cooperation bandwidth relative to the downlink bandwidth, and the
/// cooperation link SNR (linear).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CooperationLink {
    bandwidth_ratio: f64,
    link_snr: f64,
}

impl CooperationLink {
    pub fn new(bandwidth_ratio: f64, link_snr: f64) -> Result<Self> {
        if !(bandwidth_ratio.is_finite() && bandwidth_ratio > 0.0) {
            return Err(invalid(format!(
                "bandwidth ratio must be positive and finite, got {bandwidth_ratio}"
            )));
        }
        if !(link_snr.is_finite() && link_snr > 0.0) {
            return Err(invalid(format!(
                "link SNR must be positive and finite, got {link_snr}"
            )));
        }
        Ok(Self {
            bandwidth_ratio,
            link_snr,
        })
    }

    pub fn from_db(bandwidth_ratio: f64, link_snr_db: f64) -> Result<Self> {
        Self::new(bandwidth_ratio, 10f64.powf(link_snr_db / 10.0))
    }

    pub fn bandwidth_ratio(&self) -> f64 {
        self.bandwidth_ratio
    }

    pub fn link_snr(&self) -> f64 {
        self.link_snr
    }

    /// Bits per downlink sample the link can carry, `(W_c/W) log2(1 + gamma)`,
    /// before rounding.
    pub fn capacity_bits(&self) -> f64 {
        self.bandwidth_ratio * self.link_snr.ln_1p() / std::f64::consts::LN_2
    }
}

/// Largest even `c` with `c <= (W_c/W) log2(1 + gamma)`, capped at
/// [`MAX_BITS`]. Zero means the link cannot support cooperation.
pub fn bits_from_bandwidth(link: &CooperationLink) -> u32 {
    // The slack absorbs rounding in log2 for exact budgets such as 2*log2(16).
    let pairs = (link.capacity_bits() / 2.0 + 1e-9).floor();
    let pairs = pairs.clamp(0.0, (MAX_BITS / 2) as f64) as u32;
    2 * pairs
}

/// Error variance with the bit budget left unrounded:
/// `(2 tau^2 / 3) (1 + gamma)^(-W_c/W)`.
pub fn continuous_noise_variance(link: &CooperationLink, clip_level: f64) -> f64 {
    2.0 * clip_level * clip_level / 3.0 * (-link.capacity_bits()).exp2()
}

/// Effective noise at one user, exactly and under the constant-amplitude
/// approximation `|q_p[p]|^2 = 1/P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveNoise {
    pub exact: f64,
    pub constant_amplitude: f64,
}

/// `N_a = N0 + (1 - |q_p[p]|^2) sigma_Q^2` for user `p`.
pub fn effective_noise_power(
    n0: f64,
    sigma_q2: f64,
    q: &DecodingMatrix,
    p: usize,
) -> Result<EffectiveNoise> {
    if !(n0.is_finite() && n0 > 0.0) {
        return Err(invalid(format!("noise power must be positive, got {n0}")));
    }
    if !(sigma_q2.is_finite() && sigma_q2 >= 0.0) {
        return Err(invalid(format!(
            "quantization variance must be nonnegative, got {sigma_q2}"
        )));
    }
    let users = q.dim();
    if p >= users {
        return Err(invalid(format!("user index {p} out of range")));
    }
    let own = q.matrix()[(p, p)].norm_sqr().min(1.0);
    Ok(EffectiveNoise {
        exact: n0 + (1.0 - own) * sigma_q2,
        constant_amplitude: n0 + sigma_q2 * (users - 1) as f64 / users as f64,
    })
}

/// Per-user SNRs when the shared samples are quantized.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedSnr {
    /// Bits per shared sample the link supports.
    pub bits: u32,
    /// Quantization error variance; zero when cooperation is disabled.
    pub sigma_q2: f64,
    /// False when `bits == 0` and users fall back to plain zero-forcing.
    pub cooperative: bool,
    pub snrs: Vec<f64>,
}

/// [`quantized_snr`] with the Gram inverse and bit budget already known.
pub fn quantized_snr_from_inverse(
    gram_inv: &GramInverse,
    q: &DecodingMatrix,
    n0: f64,
    bits: u32,
    clip_level: f64,
) -> Result<QuantizedSnr> {
    if q.dim() != gram_inv.num_users() {
        return Err(invalid(
            "decoding matrix does not match the number of users",
        ));
    }
    if bits == 0 {
        if !(n0.is_finite() && n0 > 0.0) {
            return Err(invalid(format!("noise power must be positive, got {n0}")));
        }
        return Ok(QuantizedSnr {
            bits,
            sigma_q2: 0.0,
            cooperative: false,
            snrs: baseline_from_inverse(gram_inv, n0),
        });
    }
    let sigma_q2 = quantization_noise_variance(&QuantizerConfig::new(bits, clip_level)?);
    let snrs = (0..q.dim())
        .map(|p| {
            let noise = effective_noise_power(n0, sigma_q2, q, p)?.exact;
            Ok(1.0 / (noise * gram_inv.quadratic(q, p)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuantizedSnr {
        bits,
        sigma_q2,
        cooperative: true,
        snrs,
    })
}

/// Per-user SNRs with the noise of each user replaced by its effective
/// noise under the bit budget the link supports. A link too weak for even
/// two bits disables cooperation: the users decode with `Q = I`.
pub fn quantized_snr(
    h_e: &EffectiveChannel,
    q: &DecodingMatrix,
    n0: f64,
    link: &CooperationLink,
    clip_level: f64,
) -> Result<QuantizedSnr> {
    let gram_inv = GramInverse::new(h_e)?;
    quantized_snr_from_inverse(&gram_inv, q, n0, bits_from_bandwidth(link), clip_level)
}
