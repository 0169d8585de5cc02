//! Shared test support: an independent 2-D quadrature reference for the
//! residual-error-marginalized LLRs, brute-force partition enumeration, and
//! BLER-curve helpers.

#![allow(dead_code)]

use grandfade::detect::VoronoiRect;
use grandfade::modem::Constellation;
use num_complex::Complex64;

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature
// ---------------------------------------------------------------------------

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1], found by
/// Newton iteration on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let legendre = |x: f64| -> (f64, f64) {
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        (p1, dp)
    };
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..60 {
            let (p, dp) = legendre(x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// log of the integral of exp(g) over [lo_re, hi_re] x [lo_im, hi_im] using
/// a tensor Gauss-Legendre rule with `panels` panels of `order` points per
/// axis, with the exponent shifted by its grid maximum for stability.
fn ln_integral_2d(
    g: &impl Fn(f64, f64) -> f64,
    bounds: (f64, f64, f64, f64),
    panels: usize,
    order: usize,
) -> f64 {
    let (lo_re, hi_re, lo_im, hi_im) = bounds;
    let (nodes, weights) = gauss_legendre(order);
    let step_re = (hi_re - lo_re) / panels as f64;
    let step_im = (hi_im - lo_im) / panels as f64;

    let mut points = Vec::with_capacity(panels * panels * order * order);
    let mut g_max = f64::NEG_INFINITY;
    for pr in 0..panels {
        let a_re = lo_re + pr as f64 * step_re;
        for pi in 0..panels {
            let a_im = lo_im + pi as f64 * step_im;
            for (ni, &xr) in nodes.iter().enumerate() {
                let u_re = a_re + 0.5 * step_re * (xr + 1.0);
                for (nj, &xi) in nodes.iter().enumerate() {
                    let u_im = a_im + 0.5 * step_im * (xi + 1.0);
                    let val = g(u_re, u_im);
                    let w = weights[ni] * weights[nj];
                    g_max = g_max.max(val);
                    points.push((val, w));
                }
            }
        }
    }
    if g_max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = points.iter().map(|&(v, w)| w * (v - g_max).exp()).sum();
    g_max + (0.25 * step_re * step_im * sum).ln()
}

/// Reference for one marginalized likelihood term: the log of the raw
/// double integral of
///   exp(-|y - (hm + u) v|^2 / sigma_w2) * exp(-|u + delta|^2 / sigma_e2)
/// over the cell, evaluated without the completed-square factorization the
/// production code uses. Infinite cell edges are truncated eight combined
/// standard deviations from the integrand's Gaussian center; panel counts
/// are doubled until the value is stable.
#[allow(clippy::too_many_arguments)]
pub fn ln_term_quadrature(
    y: Complex64,
    h_m: Complex64,
    delta: Complex64,
    v: Complex64,
    cell: &VoronoiRect,
    sigma_w2: f64,
    sigma_e2: f64,
    rel_tol: f64,
) -> f64 {
    // Center and spread of the product Gaussian, used only to bound the
    // integration domain.
    let a = v.norm_sqr() / sigma_w2;
    let b = 1.0 / sigma_e2;
    let p = (y - h_m * v) / v;
    let mu = (p * a - delta * b) / (a + b);
    let sigma_comb = (1.0 / (2.0 * (a + b))).sqrt();
    let reach = 8.0 * sigma_comb;

    // An infinite edge is truncated `reach` away from the integrand's
    // maximum within the cell: the center itself when it lies inside, the
    // nearest finite edge when it lies beyond (the in-cell mass then hugs
    // that edge).
    let clip = |lo: f64, hi: f64, center: f64| -> (f64, f64) {
        match (lo.is_infinite(), hi.is_infinite()) {
            (false, false) => (lo, hi),
            (true, false) => (center.min(hi) - reach, hi),
            (false, true) => (lo, center.max(lo) + reach),
            (true, true) => (center - reach, center + reach),
        }
    };
    let (lo_re, hi_re) = clip(cell.re_lo, cell.re_hi, mu.re);
    let (lo_im, hi_im) = clip(cell.im_lo, cell.im_hi, mu.im);

    let g = |u_re: f64, u_im: f64| -> f64 {
        let u = Complex64::new(u_re, u_im);
        -(y - (h_m + u) * v).norm_sqr() / sigma_w2 - (u + delta).norm_sqr() / sigma_e2
    };

    let mut panels = 4;
    let mut last = ln_integral_2d(&g, (lo_re, hi_re, lo_im, hi_im), panels, 24);
    loop {
        panels *= 2;
        let next = ln_integral_2d(&g, (lo_re, hi_re, lo_im, hi_im), panels, 24);
        if (next - last).abs() <= rel_tol * next.abs().max(1.0) || panels >= 64 {
            return next;
        }
        last = next;
    }
}

/// Per-bit LLRs of one received symbol under the cell-truncated
/// residual-error model, via raw 2-D quadrature.
#[allow(clippy::too_many_arguments)]
pub fn llr_cee_quadrature_symbol(
    y: Complex64,
    h_m: Complex64,
    delta: Complex64,
    cell: &VoronoiRect,
    sigma_w2: f64,
    sigma_e2: f64,
    constellation: &Constellation,
    rel_tol: f64,
) -> Vec<f64> {
    let m = constellation.bits_per_symbol();
    let terms: Vec<f64> = constellation
        .points()
        .iter()
        .map(|&v| ln_term_quadrature(y, h_m, delta, v, cell, sigma_w2, sigma_e2, rel_tol))
        .collect();
    let lse = |idx: Vec<usize>| -> f64 {
        let max = idx
            .iter()
            .map(|&i| terms[i])
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        max + idx
            .iter()
            .map(|&i| (terms[i] - max).exp())
            .sum::<f64>()
            .ln()
    };
    (1..=m)
        .map(|j| {
            let shift = m - j;
            let by_bit = |bit: u8| -> Vec<usize> {
                constellation
                    .labels()
                    .iter()
                    .enumerate()
                    .filter(|(_, &label)| (label >> shift) & 1 == bit)
                    .map(|(i, _)| i)
                    .collect()
            };
            let (num, den) = (lse(by_bit(1)), lse(by_bit(0)));
            if num == f64::NEG_INFINITY && den == f64::NEG_INFINITY {
                0.0 // total underflow, mirroring the production semantics
            } else {
                num - den
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Brute-force partition enumeration
// ---------------------------------------------------------------------------

/// All partitions of `weight` into distinct parts bounded by `max_part`, as
/// ascending part lists, enumerated largest-part-first so the recursion is
/// structured differently from the production generator.
pub fn partitions_distinct_brute(weight: u64, max_part: u64) -> Vec<Vec<u32>> {
    fn recurse(remaining: u64, cap: u64, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if remaining == 0 {
            let mut ascending = current.clone();
            ascending.reverse();
            out.push(ascending);
            return;
        }
        let mut part = cap.min(remaining);
        while part >= 1 {
            current.push(part as u32);
            recurse(remaining - part, part - 1, current, out);
            current.pop();
            if part == 1 {
                break;
            }
            part -= 1;
        }
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    recurse(weight, max_part, &mut current, &mut out);
    out
}

// ---------------------------------------------------------------------------
// BLER curve helpers
// ---------------------------------------------------------------------------

/// First SNR at which the curve drops below `target`, log-linearly
/// interpolated between the bracketing points. Returns the first SNR itself
/// when the curve starts below target, and `None` when it never gets there.
pub fn crossing_snr(points: &[(f64, f64)], target: f64) -> Option<f64> {
    if let Some(&(snr0, bler0)) = points.first() {
        if bler0 < target {
            return Some(snr0);
        }
    }
    for pair in points.windows(2) {
        let (s0, b0) = pair[0];
        let (s1, b1) = pair[1];
        if b0 >= target && b1 < target {
            let b0 = b0.max(1e-300);
            let b1 = b1.max(1e-300);
            let frac = (b0.ln() - target.ln()) / (b0.ln() - b1.ln());
            return Some(s0 + (s1 - s0) * frac);
        }
    }
    None
}
