// Float helpers that `core` does not provide.

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

/// Distance from `x` to the nearest integer.
#[inline]
pub(crate) fn frac_dist(x: f64) -> f64 {
    (x - round(x)).abs()
}
