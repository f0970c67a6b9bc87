use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::domain::{DiskRepr, PolyDiskDomain};
use super::fn1::AnalyticFn1;
use super::{check_ceiling, horner1, range_error, TruncAlgebra};
use crate::{c64, clit, f64_of, lit, Error, Real, C};

/// Position of `u^i v^j` in the triangular table (rows by total degree).
#[inline]
pub fn tri_index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

#[inline]
pub fn tri_len(cap: usize) -> usize {
    (cap + 1) * (cap + 2) / 2
}

/// Bivariate truncated series `Σ c_ij u^i v^j`, `i + j ≤ cap`, with
/// `u = (x - cx)/rx`, `v = (y - cy)/ry`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series2<T: Real> {
    domain: PolyDiskDomain<T>,
    cap: usize,
    coeffs: Vec<C<T>>,
}

impl<T: Real> Series2<T> {
    pub fn new(domain: PolyDiskDomain<T>, cap: usize, coeffs: Vec<C<T>>) -> crate::Result<Self> {
        if cap < 1 || coeffs.len() != tri_len(cap) {
            return Err(Error::InvalidInput("bivariate table must be triangular with cap ≥ 1".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self { domain, cap, coeffs })
    }

    pub fn zero(domain: PolyDiskDomain<T>, cap: usize) -> Self {
        let cap = cap.max(1);
        Self { domain, cap, coeffs: vec![C::zero(); tri_len(cap)] }
    }

    pub fn constant(domain: PolyDiskDomain<T>, cap: usize, c: C<T>) -> Self {
        let mut s = Self::zero(domain, cap);
        s.coeffs[0] = c;
        s
    }

    /// `(x, y) ↦ x`.
    pub fn coord_x(domain: PolyDiskDomain<T>, cap: usize) -> Self {
        let mut s = Self::constant(domain, cap, domain.x.center);
        s.coeffs[tri_index(1, 0)] = C::new(domain.x.radius, T::zero());
        s
    }

    /// `(x, y) ↦ y`.
    pub fn coord_y(domain: PolyDiskDomain<T>, cap: usize) -> Self {
        let mut s = Self::constant(domain, cap, domain.y.center);
        s.coeffs[tri_index(0, 1)] = C::new(domain.y.radius, T::zero());
        s
    }

    /// `(x, y) ↦ f(x)`, with `f` given on any disk; re-expanded on the x-disk.
    pub fn from_x(domain: PolyDiskDomain<T>, cap: usize, f: &AnalyticFn1<T>, slack: T) -> crate::Result<Self> {
        let x = Self::coord_x(domain, cap);
        f.compose_into(&x, slack)
    }

    /// `(x, y) ↦ f(y)`.
    pub fn from_y(domain: PolyDiskDomain<T>, cap: usize, f: &AnalyticFn1<T>, slack: T) -> crate::Result<Self> {
        let y = Self::coord_y(domain, cap);
        f.compose_into(&y, slack)
    }

    /// Polynomial `Σ p x^i y^j` in absolute coordinates.
    pub fn from_poly(domain: PolyDiskDomain<T>, cap: usize, terms: &[(usize, usize, C<T>)]) -> Self {
        let x = Self::coord_x(domain, cap);
        let y = Self::coord_y(domain, cap);
        let mut out = Self::zero(domain, cap);
        for &(i, j, c) in terms {
            let mut m = Self::constant(domain, cap, c);
            for _ in 0..i {
                m = m.mul_t(&x);
            }
            for _ in 0..j {
                m = m.mul_t(&y);
            }
            out = out.add_t(&m);
        }
        out
    }

    pub fn domain(&self) -> &PolyDiskDomain<T> {
        &self.domain
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn coeffs(&self) -> &[C<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C<T>] {
        &mut self.coeffs
    }

    /// Scaled coefficient of `u^i v^j`.
    pub fn coeff(&self, i: usize, j: usize) -> C<T> {
        if i + j > self.cap {
            C::zero()
        } else {
            self.coeffs[tri_index(i, j)]
        }
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, c: C<T>) {
        self.coeffs[tri_index(i, j)] = c;
    }

    /// Unscaled Taylor coefficient of `(x-cx)^i (y-cy)^j`.
    pub fn taylor(&self, i: usize, j: usize) -> C<T> {
        self.coeff(i, j) / (self.domain.x.radius.powi(i as i32) * self.domain.y.radius.powi(j as i32))
    }

    fn row(&self, i: usize) -> Vec<C<T>> {
        (0..=self.cap - i).map(|j| self.coeffs[tri_index(i, j)]).collect()
    }

    pub fn eval(&self, x: C<T>, y: C<T>) -> C<T> {
        let u = self.domain.x.to_scaled(x);
        let v = self.domain.y.to_scaled(y);
        let mut acc = C::zero();
        for i in (0..=self.cap).rev() {
            let p = self.row(i).iter().rev().fold(C::zero(), |a, c| a * v + *c);
            acc = acc * u + p;
        }
        acc
    }

    pub fn deriv_x(&self) -> Self {
        let mut out = Self::zero(self.domain, self.cap);
        for d in 1..=self.cap {
            for j in 0..d {
                let i = d - j;
                out.coeffs[tri_index(i - 1, j)] = self.coeffs[tri_index(i, j)] * lit::<T>(i as f64) / self.domain.x.radius;
            }
        }
        out
    }

    pub fn deriv_y(&self) -> Self {
        let mut out = Self::zero(self.domain, self.cap);
        for d in 1..=self.cap {
            for j in 1..=d {
                let i = d - j;
                out.coeffs[tri_index(i, j - 1)] = self.coeffs[tri_index(i, j)] * lit::<T>(j as f64) / self.domain.y.radius;
            }
        }
        out
    }

    pub fn majorant(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |s, c| s + c.norm())
    }

    pub fn spread(&self) -> T {
        self.coeffs.iter().skip(1).fold(T::zero(), |s, c| s + c.norm())
    }

    /// Max of `|F|` over an `n × n` grid of the distinguished boundary.
    pub fn sampled_sup(&self, n: usize) -> T {
        let mut best = T::zero();
        for a in 0..n {
            for b in 0..n {
                let s = lit::<T>(2.0 * std::f64::consts::PI * a as f64 / n as f64);
                let t = lit::<T>(2.0 * std::f64::consts::PI * b as f64 / n as f64);
                let x = self.domain.x.from_scaled(C::new(s.cos(), s.sin()));
                let y = self.domain.y.from_scaled(C::new(t.cos(), t.sin()));
                best = best.max(self.eval(x, y).norm());
            }
        }
        best
    }

    /// Restriction to a horizontal line `y = y0`, as a series on the x-disk.
    pub fn at_y(&self, y0: C<T>, cap1: usize) -> AnalyticFn1<T> {
        let v = self.domain.y.to_scaled(y0);
        let mut coeffs = vec![C::zero(); cap1.max(1) + 1];
        for i in 0..=self.cap.min(cap1) {
            coeffs[i] = self.row(i).iter().rev().fold(C::zero(), |a, c| a * v + *c);
        }
        AnalyticFn1::new(self.domain.x, coeffs).expect("finite coefficients")
    }

    /// `F(x, y) - F(x, 0)`.
    pub fn y_part(&self) -> Self {
        let slice = self.at_y(C::zero(), self.cap);
        let mut out = self.clone();
        for i in 0..=self.cap {
            out.coeffs[tri_index(i, 0)] = out.coeffs[tri_index(i, 0)] - slice.coeffs()[i];
        }
        out
    }

    /// Majorant of the y-dependent part.
    pub fn y_dependence(&self) -> T {
        self.y_part().majorant()
    }

    fn check_same(&self, other: &Self) -> crate::Result<()> {
        if !self.domain.approx_eq(&other.domain) || self.cap != other.cap {
            return Err(Error::Incompatible("bivariate series on different domains or caps".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> crate::Result<Self> {
        self.check_same(other)?;
        Ok(self.add_t(other))
    }

    pub fn sub(&self, other: &Self) -> crate::Result<Self> {
        self.check_same(other)?;
        Ok(self.add_t(&other.scale(-C::one())))
    }

    pub fn mul(&self, other: &Self) -> crate::Result<Self> {
        self.check_same(other)?;
        Ok(self.mul_t(other))
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self { domain: self.domain, cap: self.cap, coeffs: self.coeffs.iter().map(|c| *c * s).collect() }
    }

    pub fn with_cap(&self, cap: usize) -> Self {
        let mut out = Self::zero(self.domain, cap);
        for d in 0..=cap.min(self.cap) {
            for j in 0..=d {
                out.coeffs[tri_index(d - j, j)] = self.coeffs[tri_index(d - j, j)];
            }
        }
        out
    }

    pub(crate) fn scaled_into(&self, center: C<T>, radius: T) -> Self {
        let mut v = self.clone();
        v.coeffs[0] = v.coeffs[0] - center;
        for c in v.coeffs.iter_mut() {
            *c = *c / radius;
        }
        v
    }

    /// Horner evaluation with series-valued scaled arguments.
    pub(crate) fn horner<A: TruncAlgebra<T>>(&self, u: &A, v: &A) -> A {
        let mut acc: Option<A> = None;
        for i in (0..=self.cap).rev() {
            let p = horner1(&self.row(i), v);
            acc = Some(match acc {
                None => p,
                Some(a) => a.mul_t(u).add_t(&p),
            });
        }
        acc.expect("cap ≥ 1")
    }

    fn check_arg_range(&self, u: T, v: T, slack: T, ctx: &str) -> crate::Result<()> {
        if u > slack {
            return Err(range_error(&format!("{ctx} (x argument)"), u, slack));
        }
        if v > slack {
            return Err(range_error(&format!("{ctx} (y argument)"), v, slack));
        }
        Ok(())
    }

    /// `F(X(·), Y(·))` for bivariate arguments on a common domain.
    pub fn compose(&self, x: &Self, y: &Self, slack: T) -> crate::Result<Self> {
        x.check_same(y)?;
        let u = x.scaled_into(self.domain.x.center, self.domain.x.radius);
        let v = y.scaled_into(self.domain.y.center, self.domain.y.radius);
        self.check_arg_range(u.majorant(), v.majorant(), slack, "compose2")?;
        let out = self.horner(&u, &v);
        check_ceiling(out.coeffs.iter())?;
        Ok(out)
    }

    /// `F(x(t), y(t))` along a one-variable curve.
    pub fn compose_curve(&self, x: &AnalyticFn1<T>, y: &AnalyticFn1<T>, slack: T) -> crate::Result<AnalyticFn1<T>> {
        if x.domain() != y.domain() || x.cap() != y.cap() {
            return Err(Error::Incompatible("curve components on different domains".into()));
        }
        let u = x.scaled_into(&self.domain.x);
        let v = y.scaled_into(&self.domain.y);
        self.check_arg_range(u.majorant(), v.majorant(), slack, "compose2 along curve")?;
        let out = self.horner(&u, &v);
        check_ceiling(out.coeffs().iter())?;
        Ok(out)
    }

    pub fn restrict(&self, domain: PolyDiskDomain<T>, slack: T) -> crate::Result<Self> {
        let x = Self::coord_x(domain, self.cap);
        let y = Self::coord_y(domain, self.cap);
        self.compose(&x, &y, slack)
    }

    /// `s⁻¹ F(s x, s y)`; exact.
    pub fn conjugate_linear(&self, s: C<T>) -> crate::Result<Self> {
        let m = s.norm();
        if !(m > T::zero()) || !m.is_finite() {
            return Err(Error::ZeroScale { scale: f64_of(m) });
        }
        let phase = s / m;
        let dx = super::DiskDomain::new(self.domain.x.center / s, self.domain.x.radius / m)?;
        let dy = super::DiskDomain::new(self.domain.y.center / s, self.domain.y.radius / m)?;
        let mut out = Self::zero(PolyDiskDomain::new(dx, dy), self.cap);
        let mut p = C::one();
        for d in 0..=self.cap {
            for j in 0..=d {
                let k = tri_index(d - j, j);
                out.coeffs[k] = self.coeffs[k] * p / s;
            }
            p = p * phase;
        }
        Ok(out)
    }

    pub fn cast<S: Real>(&self) -> Series2<S> {
        Series2 { domain: self.domain.cast(), cap: self.cap, coeffs: self.coeffs.iter().map(|c| clit(c64(*c))).collect() }
    }

    pub(crate) fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..=self.cap)
            .map(|d| {
                (0..=d)
                    .map(|j| {
                        let c = c64(self.coeffs[tri_index(d - j, j)]);
                        [c.re, c.im]
                    })
                    .collect()
            })
            .collect()
    }

    pub(crate) fn from_rows(domain: PolyDiskDomain<T>, cap: usize, rows: &[Vec<[f64; 2]>]) -> crate::Result<Self> {
        if rows.len() != cap + 1 || rows.iter().enumerate().any(|(d, r)| r.len() != d + 1) {
            return Err(Error::InvalidInput("triangular table has wrong shape".into()));
        }
        let mut coeffs = vec![C::zero(); tri_len(cap)];
        for (d, r) in rows.iter().enumerate() {
            for (j, c) in r.iter().enumerate() {
                coeffs[tri_index(d - j, j)] = C::new(lit(c[0]), lit(c[1]));
            }
        }
        Self::new(domain, cap, coeffs)
    }
}

impl<T: Real> TruncAlgebra<T> for Series2<T> {
    fn mul_t(&self, other: &Self) -> Self {
        let n = self.cap;
        let mut out = vec![C::zero(); self.coeffs.len()];
        for d1 in 0..=n {
            for j1 in 0..=d1 {
                let a = self.coeffs[tri_index(d1 - j1, j1)];
                if a.is_zero() {
                    continue;
                }
                for d2 in 0..=(n - d1) {
                    let base = d2 * (d2 + 1) / 2;
                    let tgt = d1 + d2;
                    let tbase = tgt * (tgt + 1) / 2 + j1;
                    for j2 in 0..=d2 {
                        let b = other.coeffs[base + j2];
                        out[tbase + j2] = out[tbase + j2] + a * b;
                    }
                }
            }
        }
        Self { domain: self.domain, cap: n, coeffs: out }
    }

    fn add_const(&mut self, c: C<T>) {
        self.coeffs[0] = self.coeffs[0] + c;
    }

    fn const_like(&self, c: C<T>) -> Self {
        Self::constant(self.domain, self.cap, c)
    }

    fn add_t(&self, other: &Self) -> Self {
        Self {
            domain: self.domain,
            cap: self.cap,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl<T: Real> AnalyticFn1<T> {
    /// `f ∘ S` for a bivariate argument; result lives on `S`'s domain.
    pub fn compose_into(&self, s: &Series2<T>, slack: T) -> crate::Result<Series2<T>> {
        let v = s.scaled_into(self.domain().center, self.domain().radius);
        let range = v.majorant();
        if range > slack {
            return Err(range_error("compose1 into bivariate", range, slack));
        }
        let out = horner1(self.coeffs(), &v);
        check_ceiling(out.coeffs.iter())?;
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct Series2Repr {
    pub x_domain: DiskRepr,
    pub y_domain: DiskRepr,
    pub degree_cap: usize,
    pub rows: Vec<Vec<[f64; 2]>>,
}

impl Series2Repr {
    pub fn of<T: Real>(s: &Series2<T>) -> Self {
        Self {
            x_domain: DiskRepr::of(&s.domain.x),
            y_domain: DiskRepr::of(&s.domain.y),
            degree_cap: s.cap,
            rows: s.to_rows(),
        }
    }

    pub fn to<T: Real>(&self) -> crate::Result<Series2<T>> {
        let domain = PolyDiskDomain::new(self.x_domain.to()?, self.y_domain.to()?);
        Series2::from_rows(domain, self.degree_cap, &self.rows)
    }
}
