use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::bivariate::{Series2, Series2Repr};
use super::domain::PolyDiskDomain;
use super::fn1::AnalyticFn1;
use crate::{lit, Error, Real, C};

/// A map `(x, y) ↦ (F₁(x, y), F₂(x, y))` given by two bivariate series on a
/// common polydisk.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticMap2<T: Real> {
    f1: Series2<T>,
    f2: Series2<T>,
}

impl<T: Real> AnalyticMap2<T> {
    pub fn new(f1: Series2<T>, f2: Series2<T>) -> crate::Result<Self> {
        if !f1.domain().approx_eq(f2.domain()) || f1.cap() != f2.cap() {
            return Err(Error::Incompatible("map components on different domains or caps".into()));
        }
        Ok(Self { f1, f2 })
    }

    pub fn identity(domain: PolyDiskDomain<T>, cap: usize) -> Self {
        Self { f1: Series2::coord_x(domain, cap), f2: Series2::coord_y(domain, cap) }
    }

    /// `(x, y) ↦ (f(x), g(x))`.
    pub fn from_fns(domain: PolyDiskDomain<T>, cap: usize, f: &AnalyticFn1<T>, g: &AnalyticFn1<T>, slack: T) -> crate::Result<Self> {
        Ok(Self { f1: Series2::from_x(domain, cap, f, slack)?, f2: Series2::from_x(domain, cap, g, slack)? })
    }

    pub fn domain(&self) -> &PolyDiskDomain<T> {
        self.f1.domain()
    }

    pub fn cap(&self) -> usize {
        self.f1.cap()
    }

    pub fn f1(&self) -> &Series2<T> {
        &self.f1
    }

    pub fn f2(&self) -> &Series2<T> {
        &self.f2
    }

    pub fn comp(&self, i: usize) -> &Series2<T> {
        if i == 0 {
            &self.f1
        } else {
            &self.f2
        }
    }

    pub fn comp_mut(&mut self, i: usize) -> &mut Series2<T> {
        if i == 0 {
            &mut self.f1
        } else {
            &mut self.f2
        }
    }

    pub fn into_parts(self) -> (Series2<T>, Series2<T>) {
        (self.f1, self.f2)
    }

    pub fn eval(&self, x: C<T>, y: C<T>) -> (C<T>, C<T>) {
        (self.f1.eval(x, y), self.f2.eval(x, y))
    }

    /// `self ∘ inner` on `inner`'s domain.
    pub fn compose(&self, inner: &Self, slack: T) -> crate::Result<Self> {
        Ok(Self {
            f1: self.f1.compose(&inner.f1, &inner.f2, slack)?,
            f2: self.f2.compose(&inner.f1, &inner.f2, slack)?,
        })
    }

    pub fn restrict(&self, domain: PolyDiskDomain<T>, slack: T) -> crate::Result<Self> {
        Ok(Self { f1: self.f1.restrict(domain, slack)?, f2: self.f2.restrict(domain, slack)? })
    }

    /// `Λ⁻¹ ∘ F ∘ Λ` with `Λ(x, y) = (s x, s y)`.
    pub fn conjugate_linear(&self, s: C<T>) -> crate::Result<Self> {
        Ok(Self { f1: self.f1.conjugate_linear(s)?, f2: self.f2.conjugate_linear(s)? })
    }

    pub fn add(&self, other: &Self) -> crate::Result<Self> {
        Ok(Self { f1: self.f1.add(&other.f1)?, f2: self.f2.add(&other.f2)? })
    }

    pub fn sub(&self, other: &Self) -> crate::Result<Self> {
        Ok(Self { f1: self.f1.sub(&other.f1)?, f2: self.f2.sub(&other.f2)? })
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self { f1: self.f1.scale(s), f2: self.f2.scale(s) }
    }

    /// Larger of the component majorants (max-norm on `C²`).
    pub fn majorant(&self) -> T {
        self.f1.majorant().max(self.f2.majorant())
    }

    pub fn sampled_sup(&self, n: usize) -> T {
        self.f1.sampled_sup(n).max(self.f2.sampled_sup(n))
    }

    pub fn y_dependence(&self) -> T {
        self.f1.y_dependence().max(self.f2.y_dependence())
    }

    pub fn with_cap(&self, cap: usize) -> Self {
        Self { f1: self.f1.with_cap(cap), f2: self.f2.with_cap(cap) }
    }

    pub fn cast<S: Real>(&self) -> AnalyticMap2<S> {
        AnalyticMap2 { f1: self.f1.cast(), f2: self.f2.cast() }
    }
}

/// Distance-style norm of a pair of maps: half the sum of the max-norm
/// bounds of the two maps.
pub fn pair_norm<T: Real>(a: &AnalyticMap2<T>, b: &AnalyticMap2<T>) -> T {
    lit::<T>(0.5) * (a.majorant() + b.majorant())
}

#[derive(Serialize, Deserialize)]
struct Map2Repr {
    f1: Series2Repr,
    f2: Series2Repr,
}

impl<T: Real> Serialize for AnalyticMap2<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Map2Repr { f1: Series2Repr::of(&self.f1), f2: Series2Repr::of(&self.f2) }.serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for AnalyticMap2<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = Map2Repr::deserialize(d)?;
        let f1 = r.f1.to().map_err(serde::de::Error::custom)?;
        let f2 = r.f2.to().map_err(serde::de::Error::custom)?;
        Self::new(f1, f2).map_err(serde::de::Error::custom)
    }
}
