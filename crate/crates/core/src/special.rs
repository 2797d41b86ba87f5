//! Log-gamma via a 14-term Lanczos series (g = 671/128).

use crate::error::{invalid, Result};

const LANCZOS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];

pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return invalid(format!("log_gamma needs a finite positive argument, got {x}"));
    }
    Ok(ln_gamma(x))
}

/// Unchecked; x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    // Integers up to 20 are exact through the factorial table; this keeps
    // ln Gamma(1) = ln Gamma(2) = 0 exactly.
    if x == x.trunc() && x <= 21.0 {
        return factorial(x as u64 - 1).ln();
    }
    let mut tmp = x + 5.242_187_5;
    tmp = (x + 0.5) * tmp.ln() - tmp;
    let mut ser = 0.999_999_999_999_997_092;
    let mut y = x;
    for c in LANCZOS {
        y += 1.0;
        ser += c / y;
    }
    tmp + (2.506_628_274_631_000_5 * ser / x).ln()
}

pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

pub fn factorial(k: u64) -> f64 {
    (1..=k).fold(1.0, |acc, v| acc * v as f64)
}

/// Surface measure of the unit sphere S^{m-1} in R^m.
pub fn sphere_area(m: usize) -> f64 {
    let h = m as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / gamma(h)
}
