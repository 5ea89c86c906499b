//! Special-function substrate: complete elliptic integrals, the spectral
//! constants of the spherical-harmonic expansions, and recursively evaluated
//! real solid harmonics.

mod constants;
mod elliptic;
mod solid;

pub use constants::{SpectralConstants, MAX_TRUNCATION};

/// Builds the constant tables for truncation number `p`.
pub fn build_spectral_constants(p: usize) -> crate::error::Result<SpectralConstants> {
    SpectralConstants::new(p)
}
pub use elliptic::{elliptic_ke, EllipticPair};
pub use solid::{solid_harmonics, SolidHarmonicTable};

pub(crate) use solid::fill_schmidt_harmonics;

/// Position of `(n, m)`, `-n <= m <= n`, in a packed table of all orders.
#[inline]
pub fn packed_index(n: usize, m: i32) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= n);
    ((n * n + n) as isize + m as isize) as usize
}

/// Number of `(n, m)` pairs with `n < p`.
#[inline]
pub fn packed_len(p: usize) -> usize {
    p * p
}
