//! Shared comparison tolerances.

/// Absolute tolerance on time instants, in seconds.
pub const TIME: f64 = 1e-12;

const BITS_REL: f64 = 1e-9;
const BITS_ABS: f64 = 1e-6;

/// Tolerance for comparing two bit amounts of the given magnitudes.
#[inline]
pub fn bits(a: f64, b: f64) -> f64 {
    let scale = if a.abs() > b.abs() { a.abs() } else { b.abs() };
    let rel = BITS_REL * scale;
    if rel > BITS_ABS {
        rel
    } else {
        BITS_ABS
    }
}

#[inline]
pub fn bits_le(a: f64, b: f64) -> bool {
    a <= b + bits(a, b)
}

#[inline]
pub fn bits_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= bits(a, b)
}
