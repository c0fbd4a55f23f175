//! Symbol-level simulation of the cooperative downlink.
//!
//! Symbols pass through `y = H_e^H V x + z`. Every user then applies its
//! decoding vector to the pooled received samples: its own sample exactly,
//! the others either exactly or after the shared uniform quantizer. The
//! measured per-user SINR checks the closed-form SNR expressions end to end.

use rand::Rng;

use crate::codebook::DecodingMatrix;
use crate::error::{invalid, Result};
use crate::linalg::{complex_gaussian, CMatrix, C64};
use crate::precoding::{zf_outer_precoder, EffectiveChannel};
use crate::quantization::{QuantizerConfig, UniformQuantizer};

/// Transmit constellation, both with unit average power.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolAlphabet {
    Qpsk,
    Gaussian,
}

impl SymbolAlphabet {
    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> C64 {
        match self {
            SymbolAlphabet::Qpsk => {
                let a = std::f64::consts::FRAC_1_SQRT_2;
                let re = if rng.random::<bool>() { a } else { -a };
                let im = if rng.random::<bool>() { a } else { -a };
                C64::new(re, im)
            }
            SymbolAlphabet::Gaussian => complex_gaussian(rng, 1.0),
        }
    }
}

/// How received samples reach the other users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sharing {
    Perfect,
    Quantized(QuantizerConfig),
}

/// Measured outcome of a link simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkMeasurement {
    /// Per-user signal to interference-plus-noise ratio (linear).
    pub sinr: Vec<f64>,
    /// Fraction of quantized components that were clipped, when quantizing.
    pub overload_rate: Option<f64>,
}

#[derive(Default, Clone, Copy)]
struct Moments {
    cross: C64,
    tx_power: f64,
    rx_power: f64,
}

impl Moments {
    fn push(&mut self, estimate: C64, sent: C64) {
        self.cross += estimate * sent.conj();
        self.tx_power += sent.norm_sqr();
        self.rx_power += estimate.norm_sqr();
    }

    /// Fits `estimate = g * sent + e` and returns `|g|^2 E|x|^2 / E|e|^2`.
    fn sinr(&self) -> f64 {
        let signal = self.cross.norm_sqr() / self.tx_power;
        let residual = self.rx_power - signal;
        signal / residual.max(f64::MIN_POSITIVE)
    }
}

/// Sends `symbols` independent symbol vectors through the cascaded
/// precoder with decoding matrix `q` and measures each user's SINR.
pub fn simulate_link<R: Rng + ?Sized>(
    h_e: &EffectiveChannel,
    q: &DecodingMatrix,
    n0: f64,
    symbols: usize,
    alphabet: SymbolAlphabet,
    sharing: Sharing,
    rng: &mut R,
) -> Result<LinkMeasurement> {
    if !(n0.is_finite() && n0 > 0.0) {
        return Err(invalid(format!("noise power must be positive, got {n0}")));
    }
    if symbols == 0 {
        return Err(invalid("need at least one symbol"));
    }
    let users = h_e.num_users();
    let v = zf_outer_precoder(h_e, q)?;
    let transfer: CMatrix = h_e.matrix().adjoint() * v.matrix();
    let decoders = q.matrix().adjoint();
    let mut quantizer = match sharing {
        Sharing::Perfect => None,
        Sharing::Quantized(cfg) => Some(UniformQuantizer::new(cfg)),
    };

    let mut x = vec![C64::new(0.0, 0.0); users];
    let mut y = vec![C64::new(0.0, 0.0); users];
    let mut shared = vec![C64::new(0.0, 0.0); users];
    let mut moments = vec![Moments::default(); users];
    for _ in 0..symbols {
        for xi in x.iter_mut() {
            *xi = alphabet.draw(rng);
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = complex_gaussian(rng, n0);
            for (j, xj) in x.iter().enumerate() {
                acc += transfer[(i, j)] * xj;
            }
            *yi = acc;
        }
        match quantizer.as_mut() {
            Some(qz) => shared
                .iter_mut()
                .zip(&y)
                .for_each(|(s, yi)| *s = qz.quantize(*yi)),
            None => shared.copy_from_slice(&y),
        }
        for (p, m) in moments.iter_mut().enumerate() {
            let mut estimate = C64::new(0.0, 0.0);
            for i in 0..users {
                // A user always has its own sample unquantized.
                let sample = if i == p { y[i] } else { shared[i] };
                estimate += decoders[(p, i)] * sample;
            }
            m.push(estimate, x[p]);
        }
    }
    Ok(LinkMeasurement {
        sinr: moments.iter().map(Moments::sinr).collect(),
        overload_rate: quantizer.map(|q| q.overload_rate()),
    })
}

/// Fraction of received real components exceeding `clip_level` in magnitude
/// over `symbols` Gaussian symbol vectors. Independent of the bit budget.
pub fn measure_overload<R: Rng + ?Sized>(
    h_e: &EffectiveChannel,
    q: &DecodingMatrix,
    n0: f64,
    clip_level: f64,
    symbols: usize,
    rng: &mut R,
) -> Result<f64> {
    let cfg = QuantizerConfig::new(2, clip_level)?;
    let m = simulate_link(
        h_e,
        q,
        n0,
        symbols,
        SymbolAlphabet::Gaussian,
        Sharing::Quantized(cfg),
        rng,
    )?;
    Ok(m.overload_rate.unwrap_or(0.0))
}
