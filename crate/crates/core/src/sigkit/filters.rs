//! Analog-style low-pass responses used for the DAC, photodiode, ADC and
//! optical band-pass filter.

use num_complex::Complex64;

/// -3 dB frequency of the delay-normalized 4th-order Bessel prototype, rad/s.
const BESSEL4_W3DB: f64 = 2.113_917_674_904_21;

/// 4th-order Bessel (maximally flat group delay) low-pass, unity at DC,
/// -3 dB at `f3db`.
pub fn bessel4(f: f64, f3db: f64) -> Complex64 {
    let s = Complex64::new(0.0, BESSEL4_W3DB * f / f3db);
    let s2 = s * s;
    let den = s2 * s2 + s2 * s * 10.0 + s2 * 45.0 + s * 105.0 + 105.0;
    Complex64::new(105.0, 0.0) / den
}

/// Butterworth magnitude of the given order with zero phase.
pub fn butterworth_mag(f: f64, f3db: f64, order: u32) -> Complex64 {
    let r = (f / f3db).abs();
    Complex64::new(1.0 / (1.0 + r.powi(2 * order as i32)).sqrt(), 0.0)
}

/// Zero-phase super-Gaussian band-pass centered at baseband DC with the given
/// full -3 dB width.
pub fn super_gaussian(f: f64, full_width: f64, order: u32) -> Complex64 {
    let half = full_width / 2.0;
    let x = (f / half).abs().powi(2 * order as i32);
    Complex64::new((-(2f64.ln()) / 2.0 * x).exp(), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db(g: Complex64) -> f64 {
        20.0 * g.norm().log10()
    }

    #[test]
    fn bessel_three_db_point() {
        assert!((bessel4(0.0, 32e9) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((db(bessel4(32e9, 32e9)) + 3.0103).abs() < 1e-3);
        assert!(db(bessel4(64e9, 32e9)) < -10.0);
    }

    #[test]
    fn butterworth_and_gaussian_corners() {
        assert!((db(butterworth_mag(63e9, 63e9, 12)) + 3.0103).abs() < 1e-3);
        assert!((db(super_gaussian(50e9, 100e9, 2)) + 3.0103).abs() < 1e-3);
        assert!((db(super_gaussian(-50e9, 100e9, 2)) + 3.0103).abs() < 1e-3);
    }
}
