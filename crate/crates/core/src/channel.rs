//! Flat Rician fading with AWGN and an additive Gaussian channel-estimation
//! error. One fading coefficient applies to the whole codeword.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// One fading realization together with the receiver's estimate of it.
///
/// The identity `h = h_hat + h_e` holds exactly on every draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDraw {
    /// True fading coefficient.
    pub h: Complex64,
    /// Pilot-based estimate available at the receiver.
    pub h_hat: Complex64,
    /// Estimation error, `h - h_hat`.
    pub h_e: Complex64,
    /// Noise variance (total, over both quadratures).
    pub sigma_w2: f64,
    /// Estimation-error variance.
    pub sigma_e2: f64,
    /// Rician K-factor as a linear power ratio.
    pub k_factor: f64,
}

/// Circularly-symmetric complex Gaussian with the given total variance.
fn complex_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(scale * re, scale * im)
}

/// Samples a Rician fading coefficient with E[|h|^2] = 1. The K-factor is
/// the linear ratio of line-of-sight to diffuse power; K = 0 is Rayleigh
/// and K = infinity degenerates to h = 1.
pub fn sample_rician<R: Rng + ?Sized>(k_factor: f64, rng: &mut R) -> Result<Complex64> {
    if k_factor < 0.0 || k_factor.is_nan() {
        return Err(Error::invalid(format!("negative K-factor {k_factor}")));
    }
    let diffuse_var = 1.0 / (k_factor + 1.0);
    let los = (1.0 - diffuse_var).sqrt();
    Ok(Complex64::new(los, 0.0) + complex_gaussian(diffuse_var, rng))
}

/// Samples a channel-estimation error, circularly-symmetric complex Gaussian
/// with total variance `sigma_e2` (each quadrature has variance
/// `sigma_e2 / 2`). Zero variance yields exactly zero.
pub fn sample_cee<R: Rng + ?Sized>(sigma_e2: f64, rng: &mut R) -> Result<Complex64> {
    if sigma_e2 < 0.0 || sigma_e2.is_nan() {
        return Err(Error::invalid(format!("negative CEE variance {sigma_e2}")));
    }
    Ok(complex_gaussian(sigma_e2, rng))
}

/// Passes a symbol vector through the channel: y_i = h x_i + w_i with
/// i.i.d. complex Gaussian noise of variance `sigma_w2`.
pub fn transmit<R: Rng + ?Sized>(
    x: &[Complex64],
    draw: &ChannelDraw,
    rng: &mut R,
) -> Vec<Complex64> {
    debug_assert!(draw.sigma_w2 > 0.0);
    x.iter()
        .map(|&xi| draw.h * xi + complex_gaussian(draw.sigma_w2, rng))
        .collect()
}

/// Draws the fading coefficient and the estimation error independently, then
/// derives the estimate so that `h = h_hat + h_e` holds exactly.
pub fn make_draw<R: Rng + ?Sized>(
    k_factor: f64,
    sigma_e2: f64,
    sigma_w2: f64,
    rng: &mut R,
) -> Result<ChannelDraw> {
    if !(sigma_w2 > 0.0) {
        return Err(Error::invalid(format!(
            "noise variance must be positive, got {sigma_w2}"
        )));
    }
    let h_raw = sample_rician(k_factor, rng)?;
    let h_e = sample_cee(sigma_e2, rng)?;
    // Rounding in h_raw - h_e would break the exact identity
    // h = h_hat + h_e, so h is recomposed from the rounded estimate (at
    // most one ulp from the raw sample).
    let h_hat = h_raw - h_e;
    Ok(ChannelDraw {
        h: h_hat + h_e,
        h_hat,
        h_e,
        sigma_w2,
        sigma_e2,
        k_factor,
    })
}

/// Noise variance for a given SNR in dB. With E[|h|^2] = 1 and a unit-energy
/// constellation, SNR = 1 / sigma_w2.
pub fn sigma_w2_from_snr_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}
