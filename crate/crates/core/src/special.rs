//! Numerically stable Gaussian-tail helpers built on the error function.

/// log of erfc(x), valid far into the right tail where erfc underflows.
pub(crate) fn ln_erfc(x: f64) -> f64 {
    if x < 25.0 {
        libm::erfc(x).ln()
    } else {
        // Asymptotic expansion erfc(x) = e^{-x^2} / (x sqrt(pi)) *
        // (1 - 1/(2x^2) + 3/(4x^4) - 15/(8x^6) + ...); for x >= 25 the
        // truncation error is below 1e-10 relative.
        let z = 1.0 / (x * x);
        let series = 1.0 + z * (-0.5 + z * (0.75 + z * -1.875));
        -x * x - (x * std::f64::consts::PI.sqrt()).ln() + series.ln()
    }
}

/// log of (erf(b) - erf(a)) / 2 for a < b, i.e. the log-mass of a standard
/// erf-scaled Gaussian over [a, b]. Infinite endpoints are allowed. Returns
/// negative infinity when the mass underflows to zero.
pub(crate) fn ln_half_erf_diff(a: f64, b: f64) -> f64 {
    debug_assert!(a < b, "empty interval [{a}, {b}]");
    if a <= 0.0 && b >= 0.0 {
        // The interval straddles the origin: erf(b) - erf(a) adds two
        // nonnegative terms, no cancellation.
        return (0.5 * (libm::erf(b) - libm::erf(a))).ln();
    }
    // Reflect to the right tail: mass over [lo, hi] with 0 < lo < hi.
    let (lo, hi) = if a > 0.0 { (a, b) } else { (-b, -a) };
    let e_lo = libm::erfc(lo);
    if e_lo > f64::MIN_POSITIVE {
        let d = 0.5 * (e_lo - libm::erfc(hi));
        if d > 0.0 {
            return d.ln();
        }
    }
    // Deep tail: work with ln erfc directly.
    let l_lo = ln_erfc(lo);
    if l_lo == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let l_hi = if hi.is_infinite() {
        f64::NEG_INFINITY
    } else {
        ln_erfc(hi)
    };
    l_lo + 0.5f64.ln() + (-((l_hi - l_lo).exp())).ln_1p()
}

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let vals: Vec<f64> = values.collect();
    let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + vals.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
