use serde::{Deserialize, Serialize};

use crate::{c64, clit, f64_of, lit, Error, Real, C};

/// An open disk `|z - center| < radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskDomain<T: Real> {
    pub center: C<T>,
    pub radius: T,
}

impl<T: Real> DiskDomain<T> {
    pub fn new(center: C<T>, radius: T) -> crate::Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() || !center.re.is_finite() || !center.im.is_finite() {
            return Err(Error::InvalidInput(format!("disk radius {radius} must be positive")));
        }
        Ok(Self { center, radius })
    }

    /// Disk centered at 0.
    pub fn centered(radius: T) -> Self {
        Self::new(C::new(T::zero(), T::zero()), radius).expect("positive radius")
    }

    /// Equality up to relative rounding (1e-12).
    pub fn approx_eq(&self, other: &Self) -> bool {
        let tol = lit::<T>(1e-12) * (self.radius + self.center.norm());
        (self.center - other.center).norm() <= tol && (self.radius - other.radius).abs() <= tol
    }

    pub fn contains(&self, z: C<T>) -> bool {
        (z - self.center).norm() < self.radius
    }

    /// True if `other` lies inside `self` up to a relative slack.
    pub fn covers(&self, other: &Self, slack: T) -> bool {
        (other.center - self.center).norm() + other.radius <= self.radius * slack
    }

    pub fn to_scaled(&self, z: C<T>) -> C<T> {
        (z - self.center) / self.radius
    }

    pub fn from_scaled(&self, u: C<T>) -> C<T> {
        self.center + u * self.radius
    }

    pub fn cast<S: Real>(&self) -> DiskDomain<S> {
        DiskDomain { center: clit(c64(self.center)), radius: lit(f64_of(self.radius)) }
    }
}

/// Product of two disks, `x_domain × y_domain`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyDiskDomain<T: Real> {
    pub x: DiskDomain<T>,
    pub y: DiskDomain<T>,
}

impl<T: Real> PolyDiskDomain<T> {
    pub fn new(x: DiskDomain<T>, y: DiskDomain<T>) -> Self {
        Self { x, y }
    }

    pub fn centered(rx: T, ry: T) -> Self {
        Self { x: DiskDomain::centered(rx), y: DiskDomain::centered(ry) }
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.x.approx_eq(&other.x) && self.y.approx_eq(&other.y)
    }

    pub fn cast<S: Real>(&self) -> PolyDiskDomain<S> {
        PolyDiskDomain { x: self.x.cast(), y: self.y.cast() }
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct DiskRepr {
    pub center: [f64; 2],
    pub radius: f64,
}

impl DiskRepr {
    pub fn of<T: Real>(d: &DiskDomain<T>) -> Self {
        let c = c64(d.center);
        Self { center: [c.re, c.im], radius: f64_of(d.radius) }
    }

    pub fn to<T: Real>(&self) -> crate::Result<DiskDomain<T>> {
        DiskDomain::new(C::new(lit(self.center[0]), lit(self.center[1])), lit(self.radius))
    }
}
