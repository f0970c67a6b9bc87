//! Projections and the assembled depth-`n` renormalization of 2D pairs.
//!
//! Critical pipeline: `p𝓡ⁿ`, then `Π₁`, then `Λ` with `ℓ = π₁B̃(0, 0)`,
//! then `Π₂`. Rotation pipeline: `p𝓡ⁿ`, then `Λ` with `ℓ = π₁B̄(0, 0)`,
//! then the ac-projection, then conjugation by `Ψ = (ψ, ψ)` where `ψ`
//! linearizes `π₁B(·, 0)` to `T₁`.

use serde::{Deserialize, Serialize};

use crate::contfrac::{brjuno_partials, denominators, RotationNumber};
use crate::pair1d::{linearizer, linearizer_to, prerenorm_words, renorm1, NormalizedPair1, Pair1};
use crate::pair2d::{prerenorm2, Pair2};
use crate::series::{invert1, newton_point, AnalyticFn1, AnalyticMap2, DiskDomain, PolyDiskDomain, Series2};
use crate::settings::{CommutationReading, Convention};
use crate::{c64, f64_of, linalg, lit, Error, Real, Settings, C};

/// Diagonal shifts `T_i(x, y) = (x + c_i, y + c_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalShift {
    pub c1: C<f64>,
    pub c2: C<f64>,
}

/// `a x⁴ + b x⁶ (+ d x⁵)` added to both components of `Ã`, `c` to both
/// components of `B̃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutationTuple {
    pub a: C<f64>,
    pub b: C<f64>,
    pub c: C<f64>,
    pub d: Option<C<f64>>,
    pub residual: f64,
}

impl CommutationTuple {
    pub fn max_abs(&self) -> f64 {
        [self.a, self.b, self.c, self.d.unwrap_or_default()].iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `d₀x + d₁x² + d₂x³` added to both components of `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcTriple {
    pub d0: C<f64>,
    pub d1: C<f64>,
    pub d2: C<f64>,
    pub residual: f64,
}

impl AcTriple {
    pub fn max_abs(&self) -> f64 {
        self.d0.norm().max(self.d1.norm()).max(self.d2.norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaleFactor {
    pub ell: C<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Critical,
    #[default]
    Rotation,
}

/// Stage-by-stage record of one `renorm2` call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Renorm2Trace {
    pub scale: Option<RescaleFactor>,
    pub shift: Option<CriticalShift>,
    pub tuple: Option<CommutationTuple>,
    pub ac: Option<AcTriple>,
    pub linearizer_defect: Option<f64>,
    /// Round trip of `H_Σ`, when a pre-renormalization was computed.
    pub h_round_trip: Option<f64>,
    pub dist_to_slice_pre: Option<f64>,
    pub dist_to_slice: f64,
}

fn zero<T: Real>() -> C<T> {
    C::new(T::zero(), T::zero())
}

fn shift_map<T: Real>(domain: PolyDiskDomain<T>, cap: usize, c: C<T>) -> AnalyticMap2<T> {
    let mut m = AnalyticMap2::identity(domain, cap);
    for i in 0..2 {
        let s = m.comp_mut(i);
        s.coeffs_mut()[0] = s.coeffs()[0] + c;
    }
    m
}

fn add_const<T: Real>(m: &AnalyticMap2<T>, c: C<T>) -> AnalyticMap2<T> {
    let mut m = m.clone();
    for i in 0..2 {
        let s = m.comp_mut(i);
        s.coeffs_mut()[0] = s.coeffs()[0] + c;
    }
    m
}

fn add_poly_both<T: Real>(m: &AnalyticMap2<T>, terms: &[(usize, C<T>)]) -> crate::Result<AnalyticMap2<T>> {
    let p: Vec<(usize, usize, C<T>)> = terms.iter().map(|&(i, c)| (i, 0, c)).collect();
    let s = Series2::from_poly(*m.domain(), m.cap(), &p);
    AnalyticMap2::new(m.f1().add(&s)?, m.f2().add(&s)?)
}

/// `(F₁, F₂)` along a curve.
fn along<T: Real>(m: &AnalyticMap2<T>, x: &AnalyticFn1<T>, y: &AnalyticFn1<T>, slack: T) -> crate::Result<(AnalyticFn1<T>, AnalyticFn1<T>)> {
    Ok((m.f1().compose_curve(x, y, slack)?, m.f2().compose_curve(x, y, slack)?))
}

const JET_CAP: usize = 8;

/// `π₁(A∘B − B∘A)(x, 0)` on a small disk around 0.
pub fn first_commutator<T: Real>(p: &Pair2<T>, settings: &Settings) -> crate::Result<AnalyticFn1<T>> {
    let slack = lit::<T>(settings.slack);
    let rho = lit::<T>(0.05) * p.a.domain().x.radius.min(p.b.domain().x.radius);
    let d = DiskDomain::centered(rho);
    let x = AnalyticFn1::identity(d, JET_CAP);
    let y = AnalyticFn1::zero(d, JET_CAP);
    let (a1, a2) = along(&p.a, &x, &y, slack)?;
    let (b1, b2) = along(&p.b, &x, &y, slack)?;
    let ab = p.a.f1().compose_curve(&b1, &b2, slack)?;
    let ba = p.b.f1().compose_curve(&a1, &a2, slack)?;
    ab.sub(&ba)
}

fn jets<T: Real>(f: &AnalyticFn1<T>) -> [C<T>; 3] {
    [f.taylor(0), f.taylor(1), f.taylor(2)]
}

/// Newton with a central finite-difference Jacobian on a small complex
/// system.
fn solve_tuple<T: Real>(
    f: &dyn Fn(&[C<T>]) -> crate::Result<Vec<C<T>>>,
    seed: Vec<C<T>>,
    settings: &Settings,
    context: &str,
) -> crate::Result<(Vec<C<T>>, f64)> {
    let k = seed.len();
    let mut u = seed;
    let tol = settings.newton_tol.max(f64_of(T::epsilon()) * 10.0);
    let norm = |v: &[C<T>]| v.iter().map(|z| f64_of(z.norm())).fold(0.0, f64::max);
    let mut r = f(&u)?;
    let mut res = norm(&r);
    let mut best = res;
    let mut stalls = 0;
    for _ in 0..settings.max_newton {
        if res <= tol {
            return Ok((u, res));
        }
        let h = lit::<T>(1e-6).max(T::epsilon().cbrt());
        let mut jac = vec![vec![zero::<T>(); k]; k];
        for j in 0..k {
            let mut up = u.clone();
            let mut um = u.clone();
            up[j] = up[j] + C::new(h, T::zero());
            um[j] = um[j] - C::new(h, T::zero());
            let (fp, fm) = (f(&up)?, f(&um)?);
            for i in 0..k {
                jac[i][j] = (fp[i] - fm[i]) / C::new(h + h, T::zero());
            }
        }
        let rhs: Vec<C<T>> = r.iter().map(|z| -*z).collect();
        let (step, cond) = linalg::solve(&jac, &rhs)?;
        if cond > 1e12 {
            return Err(Error::IllConditioned { condition: cond });
        }
        for (a, s) in u.iter_mut().zip(step) {
            *a = *a + s;
        }
        r = f(&u)?;
        res = norm(&r);
        if res < 0.5 * best {
            stalls = 0;
        } else {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        }
        best = best.min(res);
    }
    if res <= tol * 1e3 {
        Ok((u, res))
    } else {
        Err(Error::NewtonStall { context: context.into(), residual: res })
    }
}

fn check_unique<T: Real>(a: &[C<T>], b: &[C<T>]) -> crate::Result<()> {
    let d = a.iter().zip(b).map(|(x, y)| f64_of((*x - *y).norm())).fold(0.0, f64::max);
    let scale = 1.0 + a.iter().map(|x| f64_of(x.norm())).fold(0.0, f64::max);
    if d > 1e-8 * scale {
        return Err(Error::NonUnique { distance: d });
    }
    Ok(())
}

/// Number of zeros of `f` inside the circle of radius `r`, by winding.
pub fn zero_count<T: Real>(f: impl Fn(C<T>) -> C<T>, r: T, samples: usize) -> i64 {
    let mut total = 0.0f64;
    let mut prev = f(C::new(r, T::zero()));
    for k in 1..=samples {
        let t = lit::<T>(k as f64 * std::f64::consts::TAU / samples as f64);
        let v = f(C::from_polar(r, t));
        total += f64_of((v / prev).arg());
        prev = v;
    }
    (total / std::f64::consts::TAU).round() as i64
}

/// `∂ₓ π₁(outer ∘ inner)(t + c, t + c)` as a series in `t` near 0.
fn diagonal_derivative<T: Real>(
    outer: &AnalyticMap2<T>,
    inner: &AnalyticMap2<T>,
    c: C<T>,
    rho: T,
    settings: &Settings,
) -> crate::Result<AnalyticFn1<T>> {
    let slack = lit::<T>(settings.slack);
    let d = DiskDomain::centered(rho);
    let cap = 16;
    let t = AnalyticFn1::affine(d, cap, C::new(T::one(), T::zero()), c);
    let (u1, u2) = along(inner, &t, &t, slack)?;
    let i1x = inner.f1().deriv_x().compose_curve(&t, &t, slack)?;
    let i2x = inner.f2().deriv_x().compose_curve(&t, &t, slack)?;
    let o1x = outer.f1().deriv_x().compose_curve(&u1, &u2, slack)?;
    let o1y = outer.f1().deriv_y().compose_curve(&u1, &u2, slack)?;
    o1x.mul(&i1x)?.add(&o1y.mul(&i2x)?)
}

/// Zero count `N` of `f` inside `|t| = r` and the first two power sums
/// of the zeros, `(1/2πi)∮ tᵏ f'/f` for `k = 1, 2`.
fn zero_moments<T: Real>(f: &AnalyticFn1<T>, r: T, samples: usize) -> (i64, C<f64>, C<f64>) {
    let df = f.derivative();
    let mut s1 = C::new(0.0, 0.0);
    let mut s2 = C::new(0.0, 0.0);
    for k in 0..samples {
        let t = C::from_polar(r, lit::<T>(k as f64 * std::f64::consts::TAU / samples as f64));
        let w = c64(df.eval(t) / f.eval(t) * t) / samples as f64;
        let t = c64(t);
        s1 += w * t;
        s2 += w * t * t;
    }
    (zero_count(|t| f.eval(t), r, samples), s1, s2)
}

/// The unique (possibly multiple) zero of `f` near 0.
fn critical_point<T: Real>(f: &AnalyticFn1<T>, settings: &Settings) -> crate::Result<C<T>> {
    let r = lit::<T>(settings.q_radius);
    let (count, s1, s2) = zero_moments(f, r, 1024);
    if count <= 0 {
        return Err(Error::NoCriticalPoint { radius: settings.q_radius });
    }
    let m = count as f64;
    let mean = s1 / m;
    let spread = (s2 / m - mean * mean).norm();
    if spread > 1e-6 * settings.q_radius * settings.q_radius {
        return Err(Error::MultipleCriticalPoints { count, radius: settings.q_radius });
    }
    let mut g = f.clone();
    for _ in 1..count {
        g = g.derivative();
    }
    let dg = g.derivative();
    let c = newton_point(|t| (g.eval(t), dg.eval(t)), zero(), crate::clit(mean), settings, "critical point")?;
    if f64_of(c.norm()) > settings.q_radius {
        return Err(Error::NewtonStall { context: "critical point left the search disk".into(), residual: f64_of(c.norm()) });
    }
    Ok(c)
}

/// `Π₁(Ā, B̄) = (T₂⁻¹T₁⁻¹ĀT₁, T₁⁻¹B̄T₁T₂)`.
pub fn critical_projection<T: Real>(p: &Pair2<T>, settings: &Settings) -> crate::Result<(Pair2<T>, CriticalShift)> {
    let rho = lit::<T>(1.5 * settings.q_radius);
    let d1 = diagonal_derivative(&p.b, &p.a, zero(), rho, settings)?;
    let c1 = critical_point(&d1, settings)?;
    let d2 = diagonal_derivative(&p.a, &p.b, c1, rho, settings)?;
    let c2 = critical_point(&d2, settings)?;
    let slack = lit::<T>(settings.slack);
    let cap = p.cap();
    let moved = |d: &PolyDiskDomain<T>, c: C<T>| -> crate::Result<PolyDiskDomain<T>> {
        Ok(PolyDiskDomain::new(DiskDomain::new(d.x.center - c, d.x.radius)?, DiskDomain::new(d.y.center - c, d.y.radius)?))
    };
    let a = add_const(&p.a.compose(&shift_map(moved(p.a.domain(), c1)?, cap, c1), slack)?, -(c1 + c2));
    let b = add_const(&p.b.compose(&shift_map(moved(p.b.domain(), c1 + c2)?, cap, c1 + c2), slack)?, -c1);
    Ok((Pair2::new(a, b)?, CriticalShift { c1: c64(c1), c2: c64(c2) }))
}

fn commutation_modify<T: Real>(p: &Pair2<T>, u: &[C<T>]) -> crate::Result<Pair2<T>> {
    let mut terms = vec![(4, u[0]), (6, u[1])];
    if u.len() == 4 {
        terms.push((5, u[3]));
    }
    let a = add_poly_both(&p.a, &terms)?;
    let b = add_const(&p.b, u[2]);
    Pair2::new(a, b)
}

/// `Π₂`: the tuple making the commutation jets and `π₁B̃(0, 0) − 1` vanish.
pub fn commutation_projection<T: Real>(p: &Pair2<T>, settings: &Settings) -> crate::Result<(Pair2<T>, CommutationTuple)> {
    let four = settings.commutation == CommutationReading::Four;
    let k = if four { 4 } else { 3 };
    let f = |u: &[C<T>]| -> crate::Result<Vec<C<T>>> {
        let q = commutation_modify(p, u)?;
        let j = jets(&first_commutator(&q, settings)?);
        let norm = q.b.f1().eval(zero(), zero()) - C::new(T::one(), T::zero());
        Ok(if four { vec![j[0], j[2], norm, j[1]] } else { vec![j[0], j[2], norm] })
    };
    let (u, res) = solve_tuple(&f, vec![zero(); k], settings, "commutation projection")?;
    let seed2: Vec<C<T>> = (0..k).map(|i| C::new(lit(1e-3 * (i as f64 + 1.0)), lit(-1e-3))).collect();
    let (u2, _) = solve_tuple(&f, seed2, settings, "commutation projection (second seed)")?;
    check_unique(&u, &u2)?;
    let out = commutation_modify(p, &u)?;
    let tuple = CommutationTuple {
        a: c64(u[0]),
        b: c64(u[1]),
        c: c64(u[2]),
        d: if four { Some(c64(u[3])) } else { None },
        residual: res,
    };
    Ok((out, tuple))
}

fn ac_terms<T: Real>(u: &[C<T>]) -> [(usize, C<T>); 3] {
    [(1, u[0]), (2, u[1]), (3, u[2])]
}

/// Ac-projection: `d₀x + d₁x² + d₂x³` added to both components of `B` so
/// that `π₁[A, B](x, 0) = o(x²)`.
pub fn ac_projection<T: Real>(p: &Pair2<T>, settings: &Settings) -> crate::Result<(Pair2<T>, AcTriple)> {
    let modify = |u: &[C<T>]| -> crate::Result<Pair2<T>> { Pair2::new(p.a.clone(), add_poly_both(&p.b, &ac_terms(u))?) };
    let f = |u: &[C<T>]| -> crate::Result<Vec<C<T>>> { Ok(jets(&first_commutator(&modify(u)?, settings)?).to_vec()) };
    let (u, res) = solve_tuple(&f, vec![zero(); 3], settings, "ac projection")?;
    let seed2 = vec![C::new(lit(1e-3), T::zero()), C::new(lit(-1e-3), T::zero()), C::new(T::zero(), lit(1e-3))];
    let (u2, _) = solve_tuple(&f, seed2, settings, "ac projection (second seed)")?;
    check_unique(&u, &u2)?;
    Ok((modify(&u)?, AcTriple { d0: c64(u[0]), d1: c64(u[1]), d2: c64(u[2]), residual: res }))
}

/// One-dimensional ac-projection on a word-convention pair.
pub fn ac_projection1<T: Real>(p: &Pair1<T>, settings: &Settings) -> crate::Result<(Pair1<T>, AcTriple)> {
    let slack = lit::<T>(settings.slack);
    let rho = lit::<T>(0.05) * p.eta.domain().radius.min(p.xi.domain().radius);
    let d = DiskDomain::centered(rho);
    let x = AnalyticFn1::identity(d, JET_CAP);
    let modify = |u: &[C<T>]| -> crate::Result<Pair1<T>> {
        let dx = *p.xi.domain();
        let poly = AnalyticFn1::from_poly(dx, p.xi.cap(), &[zero(), u[0], u[1], u[2]]);
        Ok(Pair1 { eta: p.eta.clone(), xi: p.xi.add(&poly)? })
    };
    let f = |u: &[C<T>]| -> crate::Result<Vec<C<T>>> {
        let q = modify(u)?;
        let ex = q.eta.compose(&q.xi.compose(&x, slack)?, slack)?;
        let xe = q.xi.compose(&q.eta.compose(&x, slack)?, slack)?;
        Ok(jets(&ex.sub(&xe)?).to_vec())
    };
    let (u, res) = solve_tuple(&f, vec![zero(); 3], settings, "ac projection")?;
    let seed2 = vec![C::new(lit(1e-3), T::zero()), C::new(lit(-1e-3), T::zero()), C::new(T::zero(), lit(1e-3))];
    let (u2, _) = solve_tuple(&f, seed2, settings, "ac projection (second seed)")?;
    check_unique(&u, &u2)?;
    Ok((modify(&u)?, AcTriple { d0: c64(u[0]), d1: c64(u[1]), d2: c64(u[2]), residual: res }))
}

fn inverse_on<T: Real>(psi: &AnalyticFn1<T>, reach: T, settings: &Settings) -> crate::Result<AnalyticFn1<T>> {
    invert1(psi, zero(), reach, settings)
}

fn reach_of<T: Real>(fs: &[&Series2<T>]) -> T {
    fs.iter().fold(T::zero(), |m, f| m.max(f.coeffs()[0].norm() + f.spread())) * lit(1.02) + lit(1e-9)
}

/// `(Ψ⁻¹ A Ψ, Ψ⁻¹ B Ψ)` with `Ψ = (ψ, ψ)`, on the target domains.
fn conjugate_psi<T: Real>(
    p: &Pair2<T>,
    psi: &AnalyticFn1<T>,
    targets: (PolyDiskDomain<T>, PolyDiskDomain<T>),
    settings: &Settings,
) -> crate::Result<Pair2<T>> {
    let slack = lit::<T>(settings.slack);
    let cap = p.cap();
    let big = |dom: PolyDiskDomain<T>| -> crate::Result<AnalyticMap2<T>> {
        AnalyticMap2::new(Series2::from_x(dom, cap, psi, slack)?, Series2::from_y(dom, cap, psi, slack)?)
    };
    let ia = p.a.compose(&big(targets.0)?, slack)?;
    let ib = p.b.compose(&big(targets.1)?, slack)?;
    let reach = reach_of(&[ia.f1(), ia.f2(), ib.f1(), ib.f2()]);
    let inv = inverse_on(psi, reach, settings)?;
    let back = |m: &AnalyticMap2<T>| -> crate::Result<AnalyticMap2<T>> {
        AnalyticMap2::new(inv.compose_into(m.f1(), slack)?, inv.compose_into(m.f2(), slack)?)
    };
    Pair2::new(back(&ia)?, back(&ib)?)
}

fn conjugate_psi1<T: Real>(p: &Pair1<T>, psi: &AnalyticFn1<T>, targets: (DiskDomain<T>, DiskDomain<T>), settings: &Settings) -> crate::Result<Pair1<T>> {
    let slack = lit::<T>(settings.slack);
    let ia = p.eta.compose(&psi.restrict(targets.0, slack)?, slack)?;
    let ib = p.xi.compose(&psi.restrict(targets.1, slack)?, slack)?;
    let reach = (ia.coeffs()[0].norm() + ia.spread()).max(ib.coeffs()[0].norm() + ib.spread()) * lit(1.02) + lit(1e-9);
    let inv = inverse_on(psi, reach, settings)?;
    Ok(Pair1 { eta: inv.compose(&ia, slack)?, xi: inv.compose(&ib, slack)? })
}

fn covers<T: Real>(big: &PolyDiskDomain<T>, small: &PolyDiskDomain<T>) -> bool {
    big.x.covers(&small.x, T::one()) && big.y.covers(&small.y, T::one())
}

fn restrict_or_keep<T: Real>(p: Pair2<T>, targets: (PolyDiskDomain<T>, PolyDiskDomain<T>), slack: T) -> crate::Result<Pair2<T>> {
    let a = if covers(p.a.domain(), &targets.0) { p.a.restrict(targets.0, slack)? } else { p.a };
    let b = if covers(p.b.domain(), &targets.1) { p.b.restrict(targets.1, slack)? } else { p.b };
    Pair2::new(a, b)
}

fn rescale_by<T: Real>(p: &Pair2<T>, ell: C<T>, settings: &Settings) -> crate::Result<Pair2<T>> {
    if f64_of(ell.norm()) < settings.scale_floor {
        return Err(Error::ZeroScale { scale: f64_of(ell.norm()) });
    }
    p.rescale(ell)
}

/// Everything after `p𝓡ⁿ`: projections and rescaling, then restriction to
/// `targets` when the result covers them.
pub fn post_stages<T: Real>(
    pre: &Pair2<T>,
    pipeline: Pipeline,
    targets: (PolyDiskDomain<T>, PolyDiskDomain<T>),
    settings: &Settings,
    trace: &mut Renorm2Trace,
) -> crate::Result<Pair2<T>> {
    let slack = lit::<T>(settings.slack);
    let out = match pipeline {
        Pipeline::Critical => {
            let (tl, shift) = critical_projection(pre, settings)?;
            trace.shift = Some(shift);
            let ell = tl.b.f1().eval(zero(), zero());
            trace.scale = Some(RescaleFactor { ell: c64(ell) });
            let resc = rescale_by(&tl, ell, settings)?;
            let (pr, tuple) = commutation_projection(&resc, settings)?;
            trace.tuple = Some(tuple);
            restrict_or_keep(pr, targets, slack)?
        }
        Pipeline::Rotation => {
            let ell = pre.b.f1().eval(zero(), zero());
            trace.scale = Some(RescaleFactor { ell: c64(ell) });
            let resc = rescale_by(pre, ell, settings)?;
            let (ac, triple) = ac_projection(&resc, settings)?;
            trace.ac = Some(triple);
            let alpha = ac.b.f1().at_y(zero(), 2 * ac.cap());
            let lin = linearizer(&alpha, settings)?;
            trace.linearizer_defect = Some(lin.defect);
            conjugate_psi(&ac, &lin.psi, targets, settings)?
        }
    };
    trace.dist_to_slice = f64_of(out.dist_to_slice()?);
    Ok(out)
}

/// `ℛ_n Σ` for the chosen pipeline.
pub fn renorm2<T: Real>(
    sigma: &Pair2<T>,
    theta: &RotationNumber,
    n: usize,
    pipeline: Pipeline,
    settings: &Settings,
) -> crate::Result<(Pair2<T>, Renorm2Trace)> {
    let pre = prerenorm2(sigma, theta, n, settings)?;
    let mut trace = Renorm2Trace {
        h_round_trip: Some(pre.transform.round_trip),
        dist_to_slice_pre: Some(pre.dist_to_slice),
        ..Default::default()
    };
    let targets = (*sigma.a.domain(), *sigma.b.domain());
    let out = post_stages(&pre.pair, pipeline, targets, settings, &mut trace)?;
    Ok((out, trace))
}

/// `(H^{q_n}, H^{q_{n+1}})`.
pub fn iterate_pair<T: Real>(h: &AnalyticMap2<T>, theta: &RotationNumber, n: usize, settings: &Settings) -> crate::Result<Pair2<T>> {
    let q = denominators(theta, n + 1)?;
    let slack = lit::<T>(settings.slack);
    let power = |k: u64| -> crate::Result<AnalyticMap2<T>> {
        let mut m = AnalyticMap2::identity(*h.domain(), h.cap());
        for _ in 0..k {
            m = h.compose(&m, slack)?;
        }
        Ok(m)
    };
    Pair2::new(power(q[n])?, power(q[n + 1])?)
}

/// `ℛ_n H`: the post-pre-renormalization stages applied to the iterate pair.
pub fn renorm2_iterates<T: Real>(
    h: &AnalyticMap2<T>,
    theta: &RotationNumber,
    n: usize,
    pipeline: Pipeline,
    settings: &Settings,
) -> crate::Result<(Pair2<T>, Renorm2Trace)> {
    let pre = iterate_pair(h, theta, n, settings)?;
    let mut trace = Renorm2Trace { dist_to_slice_pre: Some(f64_of(pre.dist_to_slice()?)), ..Default::default() };
    let targets = (*pre.a.domain(), *pre.b.domain());
    let out = post_stages(&pre, pipeline, targets, settings, &mut trace)?;
    Ok((out, trace))
}

/// The rotation pipeline on a word-convention 1D pair: `p𝓡ⁿ`, rescale by
/// `ξ_n(0)`, ac-projection, linearization of `ξ` to `T₁`.
pub fn renorm1_slice<T: Real>(zeta: &Pair1<T>, theta: &RotationNumber, n: usize, settings: &Settings) -> crate::Result<(Pair1<T>, AcTriple)> {
    let words = prerenorm_words(theta, n, Convention::Words)?;
    let ell = zeta.scale_of(&words, Convention::Words, settings)?;
    if f64_of(ell.norm()) < settings.scale_floor {
        return Err(Error::ZeroScale { scale: f64_of(ell.norm()) });
    }
    let m = lit::<T>(settings.shift_margin);
    let dz = DiskDomain::centered(ell.norm() * (zeta.eta.domain().radius + m));
    let dw = DiskDomain::centered(ell.norm() * (zeta.xi.domain().radius + m));
    let pre = zeta.prerenorm1_on(&words, dz, dw, settings)?.rescale(ell)?;
    let (ac, triple) = ac_projection1(&pre, settings)?;
    let lin = linearizer(&ac.xi, settings)?;
    let out = conjugate_psi1(&ac, &lin.psi, (*zeta.eta.domain(), *zeta.xi.domain()), settings)?;
    Ok((out, triple))
}

/// One level of the renormalization microscope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroscopeRow {
    pub k: usize,
    /// `|g_k(0)|`, the translation `g_k` is linearized to.
    pub shift: f64,
    pub defect: f64,
    pub y_kn: f64,
    /// `Δ − C − Y_{kn}(θ)`.
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroscopeLedger {
    pub rows: Vec<MicroscopeRow>,
    pub y_infinity: f64,
    /// `Δ − C − Y_∞(θ)`.
    pub floor: f64,
}

/// Linearizers `h_k` of the shadowing maps `g_k` (generated by `n` steps
/// of `renorm1` per level from `g₀`) and the strip-height ledger.
pub fn microscope(
    g0: &NormalizedPair1<f64>,
    theta: &RotationNumber,
    k_max: usize,
    n: usize,
    delta: f64,
    c: f64,
    settings: &Settings,
) -> crate::Result<MicroscopeLedger> {
    let partials = brjuno_partials(theta, k_max * n + 1)?;
    let tail = theta.len().saturating_sub(1).min(200);
    let y_infinity = *brjuno_partials(theta, tail)?.last().unwrap_or(&0.0);
    let mut rows = Vec::new();
    let mut g = g0.clone();
    for k in 0..=k_max {
        if k > 0 {
            for _ in 0..n {
                g = renorm1(&g, settings)?;
            }
        }
        let s = g.beta.eval(zero());
        let lin = linearizer_to(&g.beta, s, settings)?;
        let y = partials[k * n];
        rows.push(MicroscopeRow { k, shift: s.norm(), defect: lin.defect, y_kn: y, height: delta - c - y });
    }
    Ok(MicroscopeLedger { rows, y_infinity, floor: delta - c - y_infinity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::invert1;

    fn c(x: f64) -> C<f64> {
        C::new(x, 0.0)
    }

    fn disk(r: f64) -> DiskDomain<f64> {
        DiskDomain::centered(r)
    }

    fn golden() -> RotationNumber {
        RotationNumber::golden(60)
    }

    /// `(ψ T_{−θ} ψ⁻¹, ψ T₁ ψ⁻¹)` with `ψ(z) = z + ε z²`.
    fn conjugated_rotation(eps: f64) -> Pair1<f64> {
        let s = Settings::default();
        let theta = golden().value();
        let psi = AnalyticFn1::from_poly(disk(9.0), 24, &[c(0.0), c(1.0), c(eps)]);
        let psi_inv = invert1(&psi, c(0.0), 7.0, &s).unwrap().restrict(disk(6.0), 1.0).unwrap();
        let conj = |t: f64| {
            let shifted = psi_inv.add(&AnalyticFn1::constant(disk(6.0), 24, c(t))).unwrap();
            psi.compose(&shifted, 1.05).unwrap().with_cap(12)
        };
        Pair1::new(conj(-theta), conj(1.0)).unwrap()
    }

    /// `H(x, y) = (κ + s x² − ε y, x)` on the unit bidisk.
    fn henon(kappa: f64, s: f64, eps: f64) -> AnalyticMap2<f64> {
        let dom = PolyDiskDomain::new(disk(1.0), disk(1.0));
        let f1 = Series2::from_poly(dom, 12, &[(0, 0, c(kappa)), (2, 0, c(s)), (0, 1, c(-eps))]);
        let f2 = Series2::from_poly(dom, 12, &[(1, 0, c(1.0))]);
        AnalyticMap2::new(f1, f2).unwrap()
    }

    #[test]
    fn ac_projection_vanishes_on_commuting_pairs() {
        let s = Settings::default();
        let p = Pair2::embed(&conjugated_rotation(0.01), 6.0, 12).unwrap();
        let (q, t) = ac_projection(&p, &s).unwrap();
        assert!(t.max_abs() < 1e-12, "{t:?}");
        assert!(q.sub(&p).unwrap().norm() < 1e-12);
    }

    #[test]
    fn ac_projection_kills_commutator_jets() {
        let s = Settings::default();
        let mut z = Pair1::rotation(golden().value(), 6.0, 12);
        z.eta.coeffs_mut()[2] += c(1e-3);
        z.xi.coeffs_mut()[3] += c(-2e-3);
        let (q, t) = ac_projection(&Pair2::embed(&z, 6.0, 12).unwrap(), &s).unwrap();
        assert!(t.max_abs() > 1e-6);
        let j = jets(&first_commutator(&q, &s).unwrap());
        assert!(j.iter().all(|v| v.norm() < 1e-12), "{j:?}");
        let (q1, t1) = ac_projection1(&z, &s).unwrap();
        assert!((t1.d0 - t.d0).norm() + (t1.d1 - t.d1).norm() + (t1.d2 - t.d2).norm() < 1e-12);
        assert!(q.diagonal_pair().xi.sub(&q1.xi).unwrap().majorant() < 1e-12);
    }

    #[test]
    fn critical_projection_of_commuting_iterates() {
        let s = Settings::default();
        for (kappa, sc, eps) in [(0.2, 0.5, 1e-3), (-0.25, 0.4, 5e-4), (0.3, 0.6, 2e-3)] {
            let h = henon(kappa, sc, eps);
            let p = Pair2::new(h.clone(), h.compose(&h, 1.05).unwrap()).unwrap();
            let (t, shift) = critical_projection(&p, &s).unwrap();
            assert!(shift.c2.norm() < 1e-12, "{shift:?}");
            let ell = t.b.f1().eval(c(0.0), c(0.0));
            let r = t.rescale(ell).unwrap();
            let (_, tuple) = commutation_projection(&r, &s).unwrap();
            assert!(tuple.max_abs() < 1e-12, "{tuple:?}");
        }
    }

    #[test]
    fn critical_projection_normalizes_derivatives() {
        let s = Settings::default();
        let h = henon(0.2, 0.5, 1e-3);
        let mut b = h.compose(&h, 1.05).unwrap();
        b.comp_mut(0).coeffs_mut()[1] += c(1e-3);
        let p = Pair2::new(h, b).unwrap();
        let (t, shift) = critical_projection(&p, &s).unwrap();
        assert!(shift.c2.norm() > 1e-8);
        let zero = c(0.0);
        for (o, i) in [(&t.b, &t.a), (&t.a, &t.b)] {
            let u = (i.f1().eval(zero, zero), i.f2().eval(zero, zero));
            let d = o.f1().deriv_x().eval(u.0, u.1) * i.f1().deriv_x().eval(zero, zero)
                + o.f1().deriv_y().eval(u.0, u.1) * i.f2().deriv_x().eval(zero, zero);
            assert!(d.norm() < 1e-12, "{d}");
        }
    }

    #[test]
    fn rotation_fixed_point() {
        let s = Settings::default();
        let p = Pair2::embed(&Pair1::rotation(golden().value(), 6.0, 12), 6.0, 12).unwrap();
        for n in 2..=3 {
            let (q, tr) = renorm2(&p, &golden(), n, Pipeline::Rotation, &s).unwrap();
            assert!(q.sub(&p).unwrap().norm() < 1e-10, "n = {n}: {tr:?}");
        }
    }

    #[test]
    fn renorm2_commutes_with_embedding() {
        let s = Settings::default();
        let z = conjugated_rotation(0.01);
        let (q, _) = renorm2(&Pair2::embed(&z, 6.0, 12).unwrap(), &golden(), 2, Pipeline::Rotation, &s).unwrap();
        let (z1, _) = renorm1_slice(&z, &golden(), 2, &s).unwrap();
        let e = Pair2::embed(&z1, 6.0, 12).unwrap();
        assert!(q.sub(&e).unwrap().norm() < 1e-9, "{}", q.sub(&e).unwrap().norm());
        assert!(q.dist_to_slice().unwrap() < 1e-10);
    }

    #[test]
    fn cubic_critical_point() {
        let s = Settings::default();
        let d = disk(0.2);
        let f = AnalyticFn1::from_poly(d, 12, &[c(-3e-4), c(3e-2), c(-0.3), c(1.0)]).derivative();
        let mut s2 = s.clone();
        s2.q_radius = 0.15;
        assert!((critical_point(&f, &s2).unwrap() - c(0.1)).norm() < 1e-10);
        let two = AnalyticFn1::from_poly(d, 12, &[c(-0.0025), c(0.0), c(1.0)]);
        assert!(matches!(critical_point(&two, &s2), Err(Error::MultipleCriticalPoints { count: 2, .. })));
    }

    #[test]
    fn zero_count_counts() {
        assert_eq!(zero_count(|z: C<f64>| z * z - c(0.01), 0.2, 1024), 2);
        assert_eq!(zero_count(|z: C<f64>| z - c(0.3), 0.2, 1024), 0);
    }

    #[test]
    fn microscope_on_rotation() {
        let s = Settings::default();
        let nu = NormalizedPair1::rotation(&golden(), 6.0, 12);
        let m = microscope(&nu, &golden(), 3, 1, 2.0, 0.1, &s).unwrap();
        assert_eq!(m.rows.len(), 4);
        assert!(m.rows.iter().all(|r| r.defect < 1e-12));
        assert!(m.rows.windows(2).all(|w| w[1].height <= w[0].height));
        assert!(m.floor <= m.rows[3].height);
    }

    #[test]
    fn critical_pipeline_on_fold_pair() {
        let s = crate::spectral::fold_settings();
        let p = crate::spectral::fold_pair(golden().value(), 12).unwrap();
        let (q, tr) = renorm2(&p, &golden(), 3, Pipeline::Critical, &s).unwrap();
        assert!(tr.dist_to_slice < 1e-10, "{tr:?}");
        let tuple = tr.tuple.unwrap();
        assert!(tuple.residual < 1e-12);
        let shift = tr.shift.unwrap();
        assert!(shift.c1.norm() < s.q_radius && shift.c2.norm() < s.q_radius);
        assert!((q.b.f1().eval(c(0.0), c(0.0)) - c(1.0)).norm() < 1e-12);
        let k = first_commutator(&q, &s).unwrap();
        assert!(k.taylor(0).norm() < 1e-10 && k.taylor(2).norm() < 1e-10, "{} {}", k.taylor(0), k.taylor(2));
    }

    #[test]
    fn renorm2_is_invariant_under_linear_conjugacy() {
        let st = Settings::default();
        let p = Pair2::embed(&conjugated_rotation(0.01), 6.0, 12).unwrap();
        let (q, _) = renorm2(&p, &golden(), 2, Pipeline::Rotation, &st).unwrap();
        let sc = C::from_polar(1.25, 0.2);
        let ps = p.rescale(sc).unwrap();
        let (qs, _) = renorm2(&ps, &golden(), 2, Pipeline::Rotation, &st).unwrap();
        let back = q.restrict(*qs.a.domain(), *qs.b.domain(), 1.0).unwrap();
        assert!(qs.sub(&back).unwrap().norm() < 1e-9, "{}", qs.sub(&back).unwrap().norm());
    }

    #[test]
    fn commutation_tuple_depends_smoothly_on_the_pair() {
        use crate::spectral::{fold_family, fold_settings, FamilyKind};
        let s = fold_settings();
        let tuple = |d: f64| {
            let p = fold_family(golden().value(), 12, FamilyKind::YOnly, d).unwrap();
            let t = renorm2(&p, &golden(), 3, Pipeline::Critical, &s).unwrap().1.tuple.unwrap();
            [t.a, t.b, t.c]
        };
        let fd = |h: f64| {
            let (p, m) = (tuple(1e-3 + h), tuple(1e-3 - h));
            [0, 1, 2].map(|k| (p[k] - m[k]) / (2.0 * h))
        };
        let (d1, d2) = (fd(1e-5), fd(5e-6));
        for k in 0..3 {
            assert!((d1[k] - d2[k]).norm() < 1e-5 * (1.0 + d1[k].norm()), "{k}: {} {}", d1[k], d2[k]);
        }
        assert!(d1.iter().any(|x| x.norm() > 1e-3));
    }

    #[test]
    fn microscope_on_perturbed_rotation() {
        let s = Settings::default();
        let z = conjugated_rotation(1e-3);
        let beta = z.eta.conjugate_linear(c(-1.0)).unwrap();
        let nu = NormalizedPair1::new(beta, Some(golden()));
        let m = microscope(&nu, &golden(), 4, 1, 2.0, 0.1, &s).unwrap();
        assert!(m.rows.iter().all(|r| r.defect < 1e-8), "{:?}", m.rows);
        assert!(m.rows.windows(2).all(|w| w[1].height < w[0].height));
    }
}
