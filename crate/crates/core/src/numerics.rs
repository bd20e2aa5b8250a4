//! Standard normal distribution function, upper tail and density.
//!
//! Every other module takes Φ, Φ̄ and φ from here. The upper tail is
//! evaluated through `erfc` directly so that it keeps full relative
//! accuracy for large arguments, where `1 - Φ(x)` would cancel.

use crate::error::{ensure_finite, Result};

/// 1/√(2π).
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Φ(x), the standard normal distribution function.
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(cdf(x))
}

/// Φ̄(x) = 1 − Φ(x) = Φ(−x), computed without cancellation.
pub fn std_normal_upper_tail(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(upper_tail(x))
}

/// φ(x) = exp(−x²/2)/√(2π).
pub fn std_normal_pdf(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(pdf(x))
}

// Unchecked kernels for callers that have already validated their input.

#[inline]
pub(crate) fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

#[inline]
pub(crate) fn upper_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

#[inline]
pub(crate) fn pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Reference values of Φ from a 40-digit mpmath evaluation
/// (`mpmath.ncdf` at `mp.dps = 40`), rounded to 20 significant digits.
/// Pairs are `(x, Φ(x))`.
#[allow(clippy::excessive_precision)]
pub const CDF_REFERENCE: [(f64, f64); 16] = [
    (0.5, 0.691_462_461_274_013_1),
    (-0.5, 0.308_537_538_725_986_9),
    (1.0, 0.841_344_746_068_542_9),
    (-1.0, 0.158_655_253_931_457_05),
    (std::f64::consts::SQRT_2, 0.921_350_396_474_857_4),
    (-std::f64::consts::SQRT_2, 0.078_649_603_525_142_57),
    (1.732_050_807_568_877_2, 0.958_367_741_668_224_8),
    (-1.732_050_807_568_877_2, 0.041_632_258_331_775_2),
    (1.87083, 0.969_315_676_012_146_8),
    (-1.87083, 0.030_684_323_987_853_17),
    (2.0, 0.977_249_868_051_820_8),
    (-2.0, 0.022_750_131_948_179_207),
    (2.23607, 0.987_326_406_892_287_5),
    (-2.23607, 0.012_673_593_107_712_461),
    (3.0, 0.998_650_101_968_369_9),
    (-3.0, 0.001_349_898_031_630_094_5),
];

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, step: f64) -> impl Iterator<Item = f64> {
        let n = ((hi - lo) / step).round() as i64;
        (0..=n).map(move |k| lo + k as f64 * step)
    }

    #[test]
    fn cdf_basic_values() {
        assert_eq!(std_normal_cdf(0.0).unwrap(), 0.5);
        let p2 = std_normal_cdf(2.0).unwrap();
        assert!((p2 - 0.97725).abs() < 1e-4);
        assert!((p2 - 0.977_249_868_051_821).abs() < 1e-12);
    }

    #[test]
    fn cdf_matches_reference_table() {
        for (x, want) in CDF_REFERENCE {
            let got = std_normal_cdf(x).unwrap();
            assert!((got - want).abs() <= 1e-12, "Φ({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn upper_tail_values() {
        let t = std_normal_upper_tail(std::f64::consts::SQRT_2).unwrap();
        assert!((t - 0.078_649_603_5).abs() < 1e-9);
        assert_eq!(std_normal_upper_tail(0.0).unwrap(), 0.5);
        // mpmath: erfc(8/√2)/2 = 6.2209605742717841235e-16, erfc(5/√2)/2 = 2.8665157187919391167e-7
        let t8 = std_normal_upper_tail(8.0).unwrap();
        assert!(((t8 - 6.220_960_574_271_784e-16) / 6.220_960_574_271_784e-16).abs() < 1e-10);
        let t5 = std_normal_upper_tail(5.0).unwrap();
        assert!(((t5 - 2.866_515_718_791_939e-7) / 2.866_515_718_791_939e-7).abs() < 1e-10);
    }

    #[test]
    fn complement_identity() {
        for x in grid(-4.0, 4.0, 0.1) {
            let s = std_normal_upper_tail(x).unwrap() + std_normal_cdf(x).unwrap();
            assert!((s - 1.0).abs() <= 1e-12, "x = {x}");
        }
        for x in grid(-8.0, 8.0, 0.01) {
            let d = std_normal_cdf(-x).unwrap() - (1.0 - std_normal_cdf(x).unwrap());
            assert!(d.abs() <= 1e-12, "x = {x}");
        }
    }

    #[test]
    fn pdf_values() {
        assert!((std_normal_pdf(0.0).unwrap() - 0.398_942_280_401_433).abs() < 1e-12);
        for x in grid(0.0, 8.0, 0.25) {
            assert_eq!(std_normal_pdf(x).unwrap(), std_normal_pdf(-x).unwrap());
        }
        let s3 = 3.0_f64.sqrt();
        let l = 3.0 * s3 * std_normal_pdf(s3).unwrap();
        assert!((l - 0.4625).abs() < 5e-4);
    }

    #[test]
    fn mills_step() {
        for y in grid(0.001, 8.0, 0.001) {
            assert!(upper_tail(y) <= pdf(y) / y, "y = {y}");
        }
    }

    #[test]
    fn cdf_is_monotone_on_grid() {
        let mut prev = 0.0;
        for x in grid(-8.0, 8.0, 1e-4) {
            let p = cdf(x);
            assert!(p >= prev, "inversion at {x}");
            prev = p;
        }
    }

    #[test]
    fn non_finite_rejected() {
        assert!(std_normal_cdf(f64::NAN).is_err());
        assert!(std_normal_upper_tail(f64::INFINITY).is_err());
        assert!(std_normal_pdf(f64::NEG_INFINITY).is_err());
    }
}
