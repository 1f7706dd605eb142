//! Standard normal survival function Ψ(x) = P{N(0,1) > x}, its logarithm,
//! and Γ on the small range the tail constants need.

use std::f64::consts::FRAC_1_SQRT_2;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Above this point `log_norm_survival` switches to the asymptotic series.
const LOG_SERIES_CUTOFF: f64 = 8.0;

pub fn norm_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Ψ(x) via `erfc`. Relative error stays below 1e-12 wherever the result is a
/// normal (non-subnormal) double, i.e. for x up to about 37.5.
pub fn norm_survival(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// ln Ψ(x), finite for every finite x.
///
/// For x > 8 this uses `−x²/2 − ln x − ln√(2π) + ln(1 − 1/x² + 3/x⁴ − …)`,
/// truncated at the smallest term of the asymptotic series.
pub fn log_norm_survival(x: f64) -> f64 {
    if x > LOG_SERIES_CUTOFF {
        let inv2 = 1.0 / (x * x);
        let mut term: f64 = 1.0;
        let mut sum: f64 = 1.0;
        let mut k = 1.0;
        loop {
            let next = -term * (2.0 * k - 1.0) * inv2;
            if next.abs() >= term.abs() || next.abs() < 1e-17 * sum.abs() {
                break;
            }
            sum += next;
            term = next;
            k += 1.0;
        }
        -0.5 * x * x - x.ln() - LN_SQRT_2PI + sum.ln()
    } else if x < -5.0 {
        // Ψ close to 1: ln(1 − Φ(x)) with Φ(x) = Ψ(−x) tiny
        (-norm_survival(-x)).ln_1p()
    } else {
        norm_survival(x).ln()
    }
}

/// Γ(x) for positive x (Lanczos-class evaluation from the C math library port).
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Mills-ratio replacement φ(x)/x for Ψ(x), the leading term as x → ∞.
pub fn mills_leading(x: f64) -> f64 {
    norm_pdf(x) / x
}

pub fn log_mills_leading(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI - x.ln()
}
