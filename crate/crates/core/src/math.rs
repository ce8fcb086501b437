//! Float helpers that `core` does not provide.

pub(crate) use core::f64::consts::{PI, TAU};

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

/// Maps an angle into `[0, 2π)`.
#[inline]
pub(crate) fn wrap_angle(a: f64) -> f64 {
    let r = libm::fmod(a, TAU);
    let r = if r < 0.0 { r + TAU } else { r };
    // fmod of a tiny negative value can round up to exactly TAU.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert!((wrap_angle(-PI / 2.0) - 1.5 * PI).abs() < 1e-15);
        assert!((wrap_angle(5.0 * PI) - PI).abs() < 1e-12);
        assert!(wrap_angle(-1e-300) < TAU);
    }
}
