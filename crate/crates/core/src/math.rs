//! Tiny float helpers so the crate stays `no_std`.

pub(crate) fn abs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}

pub(crate) fn cos_deg(deg: f64) -> f64 {
    libm::cos(deg * core::f64::consts::PI / 180.0)
}

/// Euclidean remainder, result in [0, m).
pub(crate) fn rem_euclid(x: f64, m: f64) -> f64 {
    let r = x % m;
    if r < 0.0 {
        r + m
    } else {
        r
    }
}
