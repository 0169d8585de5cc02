//! Soft demapping: per-bit LLR computation for maximum-likelihood,
//! zero-forcing and MMSE detectors, plus an ML form that marginalizes the
//! residual channel-estimation error over a rectangular region.
//!
//! The sign convention throughout is lambda = log Pr[bit = 1] / Pr[bit = 0]:
//! positive LLR means bit 1 is more likely. The max-log forms therefore
//! compute (min distance over the bit-0 subset) minus (min distance over the
//! bit-1 subset).

use crate::error::{Error, Result};
use crate::gf2codes::BitVector;
use crate::modem::Constellation;
use crate::special::{ln_half_erf_diff, log_sum_exp};
use num_complex::Complex64;
use std::str::FromStr;

/// LLR values are clamped to this magnitude so that downstream posterior
/// computations never overflow; orderings are unaffected.
pub const LLR_CLAMP: f64 = 300.0;

/// Per-bit log-likelihood ratios aligned with codeword bit order. Values are
/// finite, clamped to `LLR_CLAMP` in magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector {
    values: Vec<f64>,
}

impl LlrVector {
    pub fn new(values: Vec<f64>) -> Self {
        let values = values
            .into_iter()
            .map(|v| {
                debug_assert!(!v.is_nan(), "NaN LLR");
                if v.is_nan() {
                    0.0
                } else {
                    v.clamp(-LLR_CLAMP, LLR_CLAMP)
                }
            })
            .collect();
        LlrVector { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Hard decision per bit: 1 where the LLR is positive, 0 otherwise
    /// (ties at zero decide 0).
    pub fn hard_decision(&self) -> BitVector {
        let bits: Vec<u8> = self.values.iter().map(|&v| (v > 0.0) as u8).collect();
        BitVector::from_bits(&bits).expect("bits are 0/1")
    }
}

/// Detector selecting which LLR formula feeds the decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    /// Exact sum over constellation subsets.
    MlExact,
    /// Max-log approximation of `MlExact`.
    Ml,
    /// Zero-forcing equalizer followed by max-log demapping.
    Zf,
    /// MMSE equalizer followed by max-log demapping.
    Mmse,
    /// ML marginalized over residual estimation error; requires a region and
    /// offset, so it is not available through `compute_llrs`.
    MlCee,
}

impl DetectorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DetectorKind::MlExact => "ml-exact",
            DetectorKind::Ml => "ml",
            DetectorKind::Zf => "zf",
            DetectorKind::Mmse => "mmse",
            DetectorKind::MlCee => "ml-cee",
        }
    }
}

impl std::fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ml-exact" | "ml_exact" => Ok(DetectorKind::MlExact),
            "ml" => Ok(DetectorKind::Ml),
            "zf" => Ok(DetectorKind::Zf),
            "mmse" => Ok(DetectorKind::Mmse),
            "ml-cee" | "ml_cee" => Ok(DetectorKind::MlCee),
            other => Err(Error::invalid(format!("unknown detector '{other}'"))),
        }
    }
}

fn check_sigma(sigma_w2: f64) -> Result<()> {
    if !(sigma_w2 > 0.0) {
        return Err(Error::invalid(format!(
            "noise variance must be positive, got {sigma_w2}"
        )));
    }
    Ok(())
}

/// Exact per-bit LLRs: log of the ratio of Gaussian likelihood sums over the
/// bit-1 and bit-0 subsets, evaluated with log-sum-exp stabilization.
pub fn llr_ml_exact(
    y: &[Complex64],
    h_hat: Complex64,
    sigma_w2: f64,
    c: &Constellation,
) -> Result<LlrVector> {
    check_sigma(sigma_w2)?;
    let m = c.bits_per_symbol();
    let points = c.points();
    let mut values = Vec::with_capacity(y.len() * m);
    let mut weights = vec![0.0f64; points.len()];
    for &yi in y {
        for (w, &v) in weights.iter_mut().zip(points) {
            *w = -(yi - h_hat * v).norm_sqr() / sigma_w2;
        }
        for j in 0..m {
            let num = log_sum_exp(c.subset_indices(j, 1).iter().map(|&i| weights[i]));
            let den = log_sum_exp(c.subset_indices(j, 0).iter().map(|&i| weights[i]));
            values.push(num - den);
        }
    }
    Ok(LlrVector::new(values))
}

fn min_distance_llrs(
    symbols: &[Complex64],
    reference: impl Fn(Complex64) -> Complex64,
    scale: f64,
    c: &Constellation,
) -> Vec<f64> {
    let m = c.bits_per_symbol();
    let points = c.points();
    let mut values = Vec::with_capacity(symbols.len() * m);
    let mut dists = vec![0.0f64; points.len()];
    for &yi in symbols {
        for (d, &v) in dists.iter_mut().zip(points) {
            *d = (yi - reference(v)).norm_sqr();
        }
        for j in 0..m {
            let min_of = |b: usize| {
                c.subset_indices(j, b)
                    .iter()
                    .map(|&i| dists[i])
                    .fold(f64::INFINITY, f64::min)
            };
            values.push(scale * (min_of(0) - min_of(1)));
        }
    }
    values
}

/// Max-log ML LLRs: scaled difference of minimum squared distances between
/// the bit-0 and bit-1 subsets.
pub fn llr_ml(
    y: &[Complex64],
    h_hat: Complex64,
    sigma_w2: f64,
    c: &Constellation,
) -> Result<LlrVector> {
    check_sigma(sigma_w2)?;
    Ok(LlrVector::new(min_distance_llrs(
        y,
        |v| h_hat * v,
        1.0 / sigma_w2,
        c,
    )))
}

/// Zero-forcing LLRs: equalize by 1/h_hat, then max-log demap with the
/// noise variance inflated by 1/|h_hat|^2. Fails on a zero estimate.
pub fn llr_zf(
    y: &[Complex64],
    h_hat: Complex64,
    sigma_w2: f64,
    c: &Constellation,
) -> Result<LlrVector> {
    check_sigma(sigma_w2)?;
    if h_hat == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularChannel);
    }
    let equalized: Vec<Complex64> = y.iter().map(|&yi| yi / h_hat).collect();
    let scale = h_hat.norm_sqr() / sigma_w2;
    Ok(LlrVector::new(min_distance_llrs(
        &equalized,
        |v| v,
        scale,
        c,
    )))
}

/// MMSE LLRs: scale by conj(h_hat)/(|h_hat|^2 + sigma_w2), then max-log
/// demap with scale (|h_hat|^2 + sigma_w2)/sigma_w2. Defined at h_hat = 0.
pub fn llr_mmse(
    y: &[Complex64],
    h_hat: Complex64,
    sigma_w2: f64,
    c: &Constellation,
) -> Result<LlrVector> {
    check_sigma(sigma_w2)?;
    let gain = h_hat.conj() / (h_hat.norm_sqr() + sigma_w2);
    let equalized: Vec<Complex64> = y.iter().map(|&yi| gain * yi).collect();
    let scale = (h_hat.norm_sqr() + sigma_w2) / sigma_w2;
    Ok(LlrVector::new(min_distance_llrs(
        &equalized,
        |v| v,
        scale,
        c,
    )))
}

/// Dispatches on the detector kind. `MlCee` needs a region and offset, so it
/// is rejected here; use [`llr_ml_cee`].
pub fn compute_llrs(
    kind: DetectorKind,
    y: &[Complex64],
    h_hat: Complex64,
    sigma_w2: f64,
    c: &Constellation,
) -> Result<LlrVector> {
    match kind {
        DetectorKind::MlExact => llr_ml_exact(y, h_hat, sigma_w2, c),
        DetectorKind::Ml => llr_ml(y, h_hat, sigma_w2, c),
        DetectorKind::Zf => llr_zf(y, h_hat, sigma_w2, c),
        DetectorKind::Mmse => llr_mmse(y, h_hat, sigma_w2, c),
        DetectorKind::MlCee => Err(Error::invalid(
            "ml-cee needs a residual-error cell; use llr_ml_cee",
        )),
    }
}

/// Axis-aligned rectangle in the residual estimation-error plane, relative
/// to a candidate offset. Edges may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoronoiRect {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl VoronoiRect {
    pub fn new(re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64) -> Result<Self> {
        if !(re_lo < re_hi) || !(im_lo < im_hi) {
            return Err(Error::invalid(format!(
                "degenerate cell [{re_lo}, {re_hi}] x [{im_lo}, {im_hi}]"
            )));
        }
        Ok(VoronoiRect {
            re_lo,
            re_hi,
            im_lo,
            im_hi,
        })
    }

    pub fn full_plane() -> Self {
        VoronoiRect {
            re_lo: f64::NEG_INFINITY,
            re_hi: f64::INFINITY,
            im_lo: f64::NEG_INFINITY,
            im_hi: f64::INFINITY,
        }
    }

    /// Half-open containment (lo <= u < hi per axis), so a set of abutting
    /// cells covers each point exactly once.
    pub fn contains(&self, u: Complex64) -> bool {
        self.re_lo <= u.re && u.re < self.re_hi && self.im_lo <= u.im && u.im < self.im_hi
    }
}

/// ML LLRs marginalized over the residual estimation error, restricted to
/// the rectangular cell around the tested candidate.
///
/// For a candidate estimate hm with offset delta from the pilot estimate,
/// the residual error u is Gaussian with mean -delta and per-axis variance
/// sigma_e2/2, truncated to `cell`. Each likelihood term
///
///   T_v = integral over the cell of
///         exp(-|y - (hm + u) v|^2 / sigma_w2) exp(-|u + delta|^2 / sigma_e2) du
///
/// factors per axis after completing the square: writing a = |v|^2/sigma_w2
/// and b = 1/sigma_e2, the integrand is an isotropic Gaussian in u with
/// precision a + b centered at mu_v = (a p_v - b delta)/(a + b) where
/// p_v = (y - hm v)/v, and each axis integral is a difference of error
/// functions. The truncation normalizer is common to numerator and
/// denominator and is omitted.
///
/// Returns the LLR vector and an underflow flag; bits where every term of
/// both subsets underflows to zero get LLR 0 and set the flag.
pub fn llr_ml_cee(
    y: &[Complex64],
    h_hat_m: Complex64,
    delta_m: Complex64,
    cell: &VoronoiRect,
    sigma_w2: f64,
    sigma_e2: f64,
    c: &Constellation,
) -> Result<(LlrVector, bool)> {
    check_sigma(sigma_w2)?;
    if !(sigma_e2 > 0.0) {
        return Err(Error::invalid(format!(
            "estimation-error variance must be positive, got {sigma_e2}"
        )));
    }
    if !(cell.re_lo < cell.re_hi) || !(cell.im_lo < cell.im_hi) {
        return Err(Error::invalid("zero-measure cell"));
    }

    let m = c.bits_per_symbol();
    let points = c.points();
    let b = 1.0 / sigma_e2;
    let q = -delta_m;
    let mut underflow = false;
    let mut values = Vec::with_capacity(y.len() * m);
    let mut log_terms = vec![f64::NEG_INFINITY; points.len()];

    for &yi in y {
        for (term, &v) in log_terms.iter_mut().zip(points) {
            let a = v.norm_sqr() / sigma_w2;
            let p = (yi - h_hat_m * v) / v;
            let precision = a + b;
            let mu = (p * a + q * b) / precision;
            let gauss = -(a * b / precision) * (p - q).norm_sqr();
            let s = precision.sqrt();
            let mass_re = ln_half_erf_diff(s * (cell.re_lo - mu.re), s * (cell.re_hi - mu.re));
            let mass_im = ln_half_erf_diff(s * (cell.im_lo - mu.im), s * (cell.im_hi - mu.im));
            *term = gauss - precision.ln() + mass_re + mass_im;
        }
        for j in 0..m {
            let num = log_sum_exp(c.subset_indices(j, 1).iter().map(|&i| log_terms[i]));
            let den = log_sum_exp(c.subset_indices(j, 0).iter().map(|&i| log_terms[i]));
            if num == f64::NEG_INFINITY && den == f64::NEG_INFINITY {
                underflow = true;
                values.push(0.0);
            } else {
                values.push(num - den);
            }
        }
    }
    Ok((LlrVector::new(values), underflow))
}
