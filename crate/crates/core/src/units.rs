//! Frequency-unit conventions.
//!
//! Everything inside the crate is an angular frequency or rate in rad/s.
//! All human-facing interfaces (configuration files, CSV columns, printed
//! reports) use cyclic units (Hz) with the usual "/2π" semantics, so a
//! drive quoted as `0.311 MHz` enters the math as `2π · 0.311e6 rad/s`.

use crate::Real;

/// Convert a cyclic frequency (Hz) to an angular frequency (rad/s).
#[inline]
pub fn cyclic<T: Real>(f_hz: T) -> T {
    f_hz * T::two_pi()
}

/// Convert an angular frequency (rad/s) back to cyclic units (Hz).
#[inline]
pub fn to_cyclic<T: Real>(omega: T) -> T {
    omega / T::two_pi()
}

/// Convenience for literals: `rad_per_sec_from_hz(5.9945e9)`.
#[inline]
pub fn rad_per_sec_from_hz<T: Real>(f_hz: f64) -> T {
    cyclic(T::of(f_hz))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let f = 1.388e6_f64;
        assert!((to_cyclic(cyclic(f)) - f).abs() < 1e-9);
        // lifetime sanity: 1/(2π·0.311 MHz) = 512 ns
        let gamma: f64 = cyclic(0.311e6);
        assert!((1.0 / gamma * 1e9 - 511.8).abs() < 0.1);
    }
}
