//! Truncated power-series algebra on disks and polydisks.
//!
//! Coefficients are stored in domain-scaled coordinates, so the sum of their
//! moduli (the majorant) bounds the sup-norm on the closed domain. All
//! compositions check that the inner range fits into the outer domain up to
//! a slack factor before expanding.

mod bivariate;
mod domain;
mod fn1;
mod inverse;
mod map2;

pub use bivariate::{tri_index, tri_len, Series2};
pub use domain::{DiskDomain, PolyDiskDomain};
pub use fn1::AnalyticFn1;
pub use inverse::{inverse_compose, invert1, invert1_auto, newton_point, partial_inverse_x};
pub use map2::{pair_norm, AnalyticMap2};

use crate::{f64_of, Error, Real, C};

/// Coefficients above this modulus are rejected as overflow.
pub const COEFF_CEILING: f64 = 1e12;

/// Truncated multiplication and constants; enough structure for Horner.
pub trait TruncAlgebra<T: Real>: Clone {
    fn mul_t(&self, other: &Self) -> Self;
    fn add_t(&self, other: &Self) -> Self;
    fn add_const(&mut self, c: C<T>);
    fn const_like(&self, c: C<T>) -> Self;
}

/// `Σ c_k v^k` by Horner, skipping trailing zeros.
pub(crate) fn horner1<T: Real, A: TruncAlgebra<T>>(coeffs: &[C<T>], v: &A) -> A {
    let top = coeffs.iter().rposition(|c| c.re != T::zero() || c.im != T::zero()).unwrap_or(0);
    let mut acc = v.const_like(coeffs[top]);
    for k in (0..top).rev() {
        acc = acc.mul_t(v);
        acc.add_const(coeffs[k]);
    }
    acc
}

pub(crate) fn range_error<T: Real>(context: &str, range: T, slack: T) -> Error {
    Error::RangeEscape { context: context.to_string(), range: f64_of(range), slack: f64_of(slack) }
}

pub(crate) fn check_ceiling<'a, T: Real + 'a>(coeffs: impl Iterator<Item = &'a C<T>>) -> crate::Result<()> {
    for c in coeffs {
        let m = f64_of(c.norm());
        if !(m <= COEFF_CEILING) {
            return Err(Error::Overflow { modulus: m });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests;
