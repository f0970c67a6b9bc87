use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::domain::{DiskDomain, DiskRepr};
use super::{check_ceiling, horner1, range_error, TruncAlgebra};
use crate::{c64, clit, f64_of, lit, Error, Real, C};

/// Truncated power series `f(z) = Σ c_k ((z - center) / radius)^k`, `k ≤ D`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticFn1<T: Real> {
    domain: DiskDomain<T>,
    coeffs: Vec<C<T>>,
}

impl<T: Real> AnalyticFn1<T> {
    /// Builds a series from scaled coefficients.
    pub fn new(domain: DiskDomain<T>, coeffs: Vec<C<T>>) -> crate::Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidInput("degree cap must be at least 1".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self { domain, coeffs })
    }

    pub fn zero(domain: DiskDomain<T>, cap: usize) -> Self {
        Self { domain, coeffs: vec![C::zero(); cap.max(1) + 1] }
    }

    pub fn constant(domain: DiskDomain<T>, cap: usize, c: C<T>) -> Self {
        let mut f = Self::zero(domain, cap);
        f.coeffs[0] = c;
        f
    }

    /// `z ↦ a z + b`.
    pub fn affine(domain: DiskDomain<T>, cap: usize, a: C<T>, b: C<T>) -> Self {
        let mut f = Self::zero(domain, cap);
        f.coeffs[0] = a * domain.center + b;
        f.coeffs[1] = a * domain.radius;
        f
    }

    pub fn identity(domain: DiskDomain<T>, cap: usize) -> Self {
        Self::affine(domain, cap, C::one(), C::zero())
    }

    /// `z ↦ z + t`.
    pub fn translation(domain: DiskDomain<T>, cap: usize, t: C<T>) -> Self {
        Self::affine(domain, cap, C::one(), t)
    }

    /// Builds from Taylor coefficients about the domain center (unscaled).
    pub fn from_taylor(domain: DiskDomain<T>, cap: usize, taylor: &[C<T>]) -> Self {
        let mut f = Self::zero(domain, cap);
        let mut rk = T::one();
        for (k, c) in taylor.iter().enumerate().take(f.coeffs.len()) {
            f.coeffs[k] = *c * rk;
            rk = rk * domain.radius;
        }
        f
    }

    /// Builds from monomial coefficients `Σ p_k z^k` (about 0), truncated at `cap`.
    pub fn from_poly(domain: DiskDomain<T>, cap: usize, poly: &[C<T>]) -> Self {
        let id = Self::identity(domain, cap);
        horner1(poly, &id)
    }

    pub fn domain(&self) -> &DiskDomain<T> {
        &self.domain
    }

    pub fn cap(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Scaled coefficients.
    pub fn coeffs(&self) -> &[C<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C<T>] {
        &mut self.coeffs
    }

    /// k-th Taylor coefficient about the center, `f^{(k)}(center)/k!`.
    pub fn taylor(&self, k: usize) -> C<T> {
        match self.coeffs.get(k) {
            Some(c) => *c / self.domain.radius.powi(k as i32),
            None => C::zero(),
        }
    }

    pub fn eval(&self, z: C<T>) -> C<T> {
        let u = self.domain.to_scaled(z);
        self.coeffs.iter().rev().fold(C::zero(), |acc, c| acc * u + *c)
    }

    pub fn eval_deriv(&self, z: C<T>) -> C<T> {
        let u = self.domain.to_scaled(z);
        let mut acc = C::zero();
        for k in (1..self.coeffs.len()).rev() {
            acc = acc * u + self.coeffs[k] * lit::<T>(k as f64);
        }
        acc / self.domain.radius
    }

    /// Series of `f'` on the same domain and cap.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero(self.domain, self.cap());
        for k in 1..self.coeffs.len() {
            out.coeffs[k - 1] = self.coeffs[k] * lit::<T>(k as f64) / self.domain.radius;
        }
        out
    }

    /// Sum of moduli of the scaled coefficients; bounds `sup |f|` on the disk.
    pub fn majorant(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |s, c| s + c.norm())
    }

    /// Majorant of `f - f(center)`, the radius of a disk around `f(center)`
    /// containing the range.
    pub fn spread(&self) -> T {
        self.coeffs.iter().skip(1).fold(T::zero(), |s, c| s + c.norm())
    }

    /// Maximum of `|f|` over `n` equally spaced boundary points.
    pub fn sampled_sup(&self, n: usize) -> T {
        let mut best = T::zero();
        for i in 0..n {
            let t = lit::<T>(2.0 * std::f64::consts::PI * i as f64 / n as f64);
            let z = self.domain.from_scaled(C::new(t.cos(), t.sin()));
            best = best.max(self.eval(z).norm());
        }
        best
    }

    fn check_same(&self, other: &Self) -> crate::Result<()> {
        if !self.domain.approx_eq(&other.domain) || self.cap() != other.cap() {
            return Err(Error::Incompatible("series on different domains or caps".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> crate::Result<Self> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| *a + *b).collect();
        Ok(Self { domain: self.domain, coeffs })
    }

    pub fn sub(&self, other: &Self) -> crate::Result<Self> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| *a - *b).collect();
        Ok(Self { domain: self.domain, coeffs })
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self { domain: self.domain, coeffs: self.coeffs.iter().map(|c| *c * s).collect() }
    }

    pub fn mul(&self, other: &Self) -> crate::Result<Self> {
        self.check_same(other)?;
        Ok(self.mul_t(other))
    }

    /// Same function with a different cap (truncating or zero-padding).
    pub fn with_cap(&self, cap: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(cap.max(1) + 1, C::zero());
        Self { domain: self.domain, coeffs }
    }

    /// Scaled coefficients of `(self - c) / r`, i.e. `self` in the scaled
    /// coordinates of `target`.
    pub(crate) fn scaled_into(&self, target: &DiskDomain<T>) -> Self {
        let mut v = self.clone();
        v.coeffs[0] = v.coeffs[0] - target.center;
        for c in v.coeffs.iter_mut() {
            *c = *c / target.radius;
        }
        v
    }

    /// `self ∘ inner`, on `inner`'s domain and cap. The majorant range of
    /// `inner` must fit into `self`'s domain within `slack`.
    pub fn compose(&self, inner: &Self, slack: T) -> crate::Result<Self> {
        let v = inner.scaled_into(&self.domain);
        let range = v.majorant();
        if range > slack {
            return Err(range_error("compose1", range, slack));
        }
        let out = horner1(&self.coeffs, &v);
        check_ceiling(out.coeffs.iter())?;
        Ok(out)
    }

    /// Re-expands on a smaller disk.
    pub fn restrict(&self, domain: DiskDomain<T>, slack: T) -> crate::Result<Self> {
        let id = Self::identity(domain, self.cap());
        self.compose(&id, slack).map_err(|e| match e {
            Error::RangeEscape { range, slack, .. } => Error::RangeEscape { context: "restrict".into(), range, slack },
            e => e,
        })
    }

    /// `s⁻¹ ∘ f ∘ s` for multiplication by `s`; exact.
    pub fn conjugate_linear(&self, s: C<T>) -> crate::Result<Self> {
        let m = s.norm();
        if !(m > T::zero()) || !m.is_finite() {
            return Err(Error::ZeroScale { scale: f64_of(m) });
        }
        let phase = s / m;
        let domain = DiskDomain::new(self.domain.center / s, self.domain.radius / m)?;
        let mut p = C::one();
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let out = *c * p / s;
                p = p * phase;
                out
            })
            .collect();
        Ok(Self { domain, coeffs })
    }

    pub fn cast<S: Real>(&self) -> AnalyticFn1<S> {
        AnalyticFn1 { domain: self.domain.cast(), coeffs: self.coeffs.iter().map(|c| clit(c64(*c))).collect() }
    }

    pub fn map_coeffs(&self, f: impl Fn(usize, C<T>) -> C<T>) -> Self {
        Self { domain: self.domain, coeffs: self.coeffs.iter().enumerate().map(|(k, c)| f(k, *c)).collect() }
    }
}

impl<T: Real> TruncAlgebra<T> for AnalyticFn1<T> {
    fn mul_t(&self, other: &Self) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![C::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(n - i).enumerate() {
                out[i + j] = out[i + j] + *a * *b;
            }
        }
        Self { domain: self.domain, coeffs: out }
    }

    fn add_const(&mut self, c: C<T>) {
        self.coeffs[0] = self.coeffs[0] + c;
    }

    fn const_like(&self, c: C<T>) -> Self {
        Self::constant(self.domain, self.cap(), c)
    }

    fn add_t(&self, other: &Self) -> Self {
        Self { domain: self.domain, coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| *a + *b).collect() }
    }
}

#[derive(Serialize, Deserialize)]
struct Fn1Repr {
    center: [f64; 2],
    radius: f64,
    degree_cap: usize,
    coeffs: Vec<[f64; 2]>,
}

impl<T: Real> Serialize for AnalyticFn1<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let d = DiskRepr::of(&self.domain);
        Fn1Repr {
            center: d.center,
            radius: d.radius,
            degree_cap: self.cap(),
            coeffs: self.coeffs.iter().map(|c| {
                let c = c64(*c);
                [c.re, c.im]
            }).collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for AnalyticFn1<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = Fn1Repr::deserialize(d)?;
        if r.coeffs.len() != r.degree_cap + 1 {
            return Err(serde::de::Error::custom("coefficient count must be degree_cap + 1"));
        }
        let domain = DiskRepr { center: r.center, radius: r.radius }.to().map_err(serde::de::Error::custom)?;
        let coeffs = r.coeffs.iter().map(|c| C::new(lit(c[0]), lit(c[1]))).collect();
        Self::new(domain, coeffs).map_err(serde::de::Error::custom)
    }
}
