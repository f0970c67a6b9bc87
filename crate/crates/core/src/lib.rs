//! Renormalization of one- and two-dimensional pairs of analytic maps.
//!
//! Everything is built on truncated Taylor series in domain-scaled
//! coordinates (see [`series`]). The numerical core is generic over the
//! scalar type through [`Real`]; the spectral layer runs in `f64`.

pub mod contfrac;
pub mod error;
pub mod linalg;
pub mod pair1d;
pub mod pair2d;
pub mod project;
pub mod report;
pub mod series;
pub mod settings;
pub mod spectral;

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

pub use error::{Error, Result};
pub use settings::Settings;

/// Complex scalar used for all coefficients.
pub type C<T> = num_complex::Complex<T>;

/// Real scalar the series arithmetic is generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable")
}

/// Converts a complex `f64` into `C<T>`.
#[inline]
pub fn clit<T: Real>(z: C<f64>) -> C<T> {
    C::new(lit(z.re), lit(z.im))
}

/// Widens a complex `T` to `f64`.
#[inline]
pub fn c64<T: Real>(z: C<T>) -> C<f64> {
    C::new(z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN))
}

/// Widens `T` to `f64`.
#[inline]
pub fn f64_of<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub type Disk = series::DiskDomain<f64>;
pub type PolyDisk = series::PolyDiskDomain<f64>;
pub type Series = series::AnalyticFn1<f64>;
pub type Series2 = series::Series2<f64>;
pub type Map2 = series::AnalyticMap2<f64>;
pub type Pair1 = pair1d::Pair1<f64>;
pub type NormalizedPair1 = pair1d::NormalizedPair1<f64>;
pub type Pair2 = pair2d::Pair2<f64>;

pub type Disk32 = series::DiskDomain<f32>;
pub type Series32 = series::AnalyticFn1<f32>;
pub type Map2f32 = series::AnalyticMap2<f32>;
pub type Pair1f32 = pair1d::Pair1<f32>;
pub type Pair2f32 = pair2d::Pair2<f32>;
