
use super::bivariate::Series2;
use super::domain::{DiskDomain, PolyDiskDomain};
use super::fn1::AnalyticFn1;
use crate::{f64_of, lit, Error, Real, Settings, C};

/// Solves `f(x) = w` pointwise by Newton from `seed`, where `f` returns the
/// value and derivative.
pub fn newton_point<T: Real>(
    f: impl Fn(C<T>) -> (C<T>, C<T>),
    w: C<T>,
    seed: C<T>,
    settings: &Settings,
    context: &str,
) -> crate::Result<C<T>> {
    let tol = lit::<T>(1e-14);
    let mut x = seed;
    let mut last = T::infinity();
    for _ in 0..(4 * settings.max_newton) {
        let (v, d) = f(x);
        let r = v - w;
        last = r.norm();
        if d.norm() < lit(settings.derivative_floor) {
            return Err(Error::CriticalAtBase { derivative: f64_of(d.norm()), floor: settings.derivative_floor });
        }
        let step = r / d;
        // damp huge steps so a poor seed cannot jump across the plane
        let cap = lit::<T>(0.5) * (T::one() + x.norm());
        let step = if step.norm() > cap { step * (cap / step.norm()) } else { step };
        x = x - step;
        if step.norm() <= tol * (T::one() + x.norm()) {
            let (v, _) = f(x);
            last = (v - w).norm();
            if last <= lit::<T>(1e-10) * (T::one() + w.norm()) {
                return Ok(x);
            }
        }
    }
    Err(Error::NewtonStall { context: context.to_string(), residual: f64_of(last) })
}

/// Local inverse of `f` near `base`, as a series on the disk of radius
/// `out_radius` around `f(base)`.
///
/// Uses the chord iteration `g ← g + (w − f∘g) / f'(base)`.
pub fn invert1<T: Real>(f: &AnalyticFn1<T>, base: C<T>, out_radius: T, settings: &Settings) -> crate::Result<AnalyticFn1<T>> {
    let d = f.eval_deriv(base);
    if d.norm() < lit(settings.derivative_floor) {
        return Err(Error::CriticalAtBase { derivative: f64_of(d.norm()), floor: settings.derivative_floor });
    }
    let w0 = f.eval(base);
    let dom = DiskDomain::new(w0, out_radius)?;
    let cap = f.cap();
    let w = AnalyticFn1::identity(dom, cap);
    let inv_d = C::new(T::one(), T::zero()) / d;
    let mut g = AnalyticFn1::affine(dom, cap, inv_d, base - w0 * inv_d);
    let slack = lit::<T>(settings.slack);
    let tol = lit::<T>(1e-16) * (out_radius + w0.norm()).max(T::one());
    let mut last = T::infinity();
    for _ in 0..(4 * cap + 20) {
        let fg = f.compose(&g, slack)?;
        let r = w.sub(&fg)?;
        let m = r.majorant();
        g = g.add(&r.scale(inv_d))?;
        if m <= tol || (m <= tol * lit(1e4) && m > last * lit(0.5)) {
            return Ok(g);
        }
        if m > last * lit(4.0) && m > lit(1e-8) {
            break;
        }
        last = last.min(m);
    }
    let fg = f.compose(&g, slack)?;
    let r = w.sub(&fg)?.majorant();
    if r <= lit::<T>(1e-11) * (out_radius + w0.norm()).max(T::one()) {
        Ok(g)
    } else {
        Err(Error::NewtonStall { context: "invert1".into(), residual: f64_of(r) })
    }
}

/// `invert1` on the largest comfortable disk: half the image of the
/// distance from `base` to the boundary of `f`'s domain.
pub fn invert1_auto<T: Real>(f: &AnalyticFn1<T>, base: C<T>, settings: &Settings) -> crate::Result<AnalyticFn1<T>> {
    let room = f.domain().radius - (base - f.domain().center).norm();
    if room <= T::zero() {
        return Err(Error::InvalidInput("base point outside the domain".into()));
    }
    let r = lit::<T>(0.5) * room * f.eval_deriv(base).norm();
    invert1(f, base, r.max(lit(1e-12)), settings)
}

/// `f⁻¹ ∘ g` on `g`'s domain, choosing the branch of `f⁻¹` through the
/// Newton root nearest `seed`.
pub fn inverse_compose<T: Real>(f: &AnalyticFn1<T>, g: &AnalyticFn1<T>, seed: C<T>, settings: &Settings) -> crate::Result<AnalyticFn1<T>> {
    let gc = g.coeffs()[0];
    let b = newton_point(|x| (f.eval(x), f.eval_deriv(x)), gc, seed, settings, "inverse_compose base")?;
    let r = g.spread() * lit(1.02) + lit::<T>(1e-9) * (T::one() + gc.norm());
    let inv = invert1(f, b, r, settings)?;
    inv.compose(g, lit(settings.slack))
}

/// Partial inverse in `x` of `a(x, y)`: returns `P(X, y)` with
/// `a(P(X, y), y) = X` on `domain` (coordinates `(X, y)`), on the branch
/// through `base = (x0, y0)`.
pub fn partial_inverse_x<T: Real>(
    a: &Series2<T>,
    base: (C<T>, C<T>),
    domain: PolyDiskDomain<T>,
    settings: &Settings,
) -> crate::Result<Series2<T>> {
    let (x0, y0) = base;
    let d = a.deriv_x().eval(x0, y0);
    if d.norm() < lit(settings.derivative_floor) {
        return Err(Error::CriticalAtBase { derivative: f64_of(d.norm()), floor: settings.derivative_floor });
    }
    let cap = a.cap();
    let xs = Series2::coord_x(domain, cap);
    let ys = Series2::coord_y(domain, cap);
    let inv_d = C::new(T::one(), T::zero()) / d;
    let a0 = a.eval(x0, y0);
    let mut p = Series2::constant(domain, cap, x0).add(&xs.scale(inv_d))?;
    p.coeffs_mut()[0] = p.coeffs()[0] - a0 * inv_d;
    let slack = lit::<T>(settings.slack);
    let scale = (domain.x.radius + domain.x.center.norm()).max(T::one());
    let tol = lit::<T>(1e-16) * scale;
    let mut last = T::infinity();
    for _ in 0..(4 * cap + 30) {
        let ap = a.compose(&p, &ys, slack)?;
        let r = xs.sub(&ap)?;
        let m = r.majorant();
        p = p.add(&r.scale(inv_d))?;
        if m <= tol || (m <= tol * lit(1e4) && m > last * lit(0.5)) {
            return Ok(p);
        }
        if m > last * lit(4.0) && m > lit(1e-8) {
            break;
        }
        last = last.min(m);
    }
    let r = xs.sub(&a.compose(&p, &ys, slack)?)?.majorant();
    if r <= lit::<T>(1e-11) * scale {
        Ok(p)
    } else {
        Err(Error::NewtonStall { context: "partial inverse".into(), residual: f64_of(r) })
    }
}

