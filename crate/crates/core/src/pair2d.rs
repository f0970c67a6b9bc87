//! Two-dimensional pairs `Σ = (A, B)` with `A = (a, h)`, `B = (b, g)`,
//! the embedding `ι`, and pre-renormalization pulled back by `H_Σ`.

use serde::{Deserialize, Serialize};

use crate::contfrac::{hat_index, hat_with, multi_indices, Letter, MultiIndex, RotationNumber, Selector};
use crate::pair1d::{NormalizedPair1, Pair1, Step};
use crate::series::{invert1, newton_point, pair_norm, partial_inverse_x, AnalyticFn1, AnalyticMap2, DiskDomain, PolyDiskDomain, Series2};
use crate::{f64_of, lit, Error, Real, Settings, C};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Pair2<T: Real> {
    #[serde(rename = "A")]
    pub a: AnalyticMap2<T>,
    #[serde(rename = "B")]
    pub b: AnalyticMap2<T>,
}

/// Parameters of the class `𝒜(𝒰, Q, δ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    pub delta: f64,
    /// Radius of the disk `Q` around 0.
    pub q_radius: f64,
    /// Floor on `|∂ₓh(x, 0)|`, `|∂ₓg(x, 0)|` outside `Q̄`.
    pub derivative_floor: f64,
    /// Center of `𝒰`.
    pub center: Pair1<f64>,
    pub center_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDiagnostics {
    pub near_center: bool,
    pub derivative_and_y: bool,
    pub distance_to_center: f64,
    pub min_dx_h: f64,
    pub min_dx_g: f64,
    pub y_dependence: f64,
}

impl ClassDiagnostics {
    pub fn passes(&self) -> bool {
        self.near_center && self.derivative_and_y
    }
}

/// `Ā = (η̄₁ + τ̄₁, η̄₂ + τ̄₂)`, `B̄ = (ξ̄₁ + π̄₁, ξ̄₂ + π̄₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalDecomposition<T: Real> {
    pub eta1: AnalyticFn1<T>,
    pub eta2: AnalyticFn1<T>,
    pub xi1: AnalyticFn1<T>,
    pub xi2: AnalyticFn1<T>,
    pub tau1: Series2<T>,
    pub tau2: Series2<T>,
    pub pi1: Series2<T>,
    pub pi2: Series2<T>,
}

impl<T: Real> DiagonalDecomposition<T> {
    pub fn of(s: &Pair2<T>) -> Self {
        let cap = s.cap();
        let zero = C::new(T::zero(), T::zero());
        Self {
            eta1: s.a.f1().at_y(zero, cap),
            eta2: s.a.f2().at_y(zero, cap),
            xi1: s.b.f1().at_y(zero, cap),
            xi2: s.b.f2().at_y(zero, cap),
            tau1: s.a.f1().y_part(),
            tau2: s.a.f2().y_part(),
            pi1: s.b.f1().y_part(),
            pi2: s.b.f2().y_part(),
        }
    }

    pub fn reconstruct(&self) -> crate::Result<Pair2<T>> {
        let slack = T::infinity();
        let join = |f: &AnalyticFn1<T>, t: &Series2<T>| -> crate::Result<Series2<T>> {
            Series2::from_x(*t.domain(), t.cap(), f, slack)?.add(t)
        };
        Ok(Pair2 {
            a: AnalyticMap2::new(join(&self.eta1, &self.tau1)?, join(&self.eta2, &self.tau2)?)?,
            b: AnalyticMap2::new(join(&self.xi1, &self.pi1)?, join(&self.xi2, &self.pi2)?)?,
        })
    }

    /// `½(‖η̄₁ − η̄₂‖ + ‖ξ̄₁ − ξ̄₂‖)`.
    pub fn diagonal_gap(&self) -> crate::Result<T> {
        Ok(lit::<T>(0.5) * (self.eta1.sub(&self.eta2)?.majorant() + self.xi1.sub(&self.xi2)?.majorant()))
    }

    /// `½(‖τ̄₁‖ + ‖τ̄₂‖ + ‖π̄₁‖ + ‖π̄₂‖)`.
    pub fn y_size(&self) -> T {
        lit::<T>(0.5) * (self.tau1.majorant() + self.tau2.majorant() + self.pi1.majorant() + self.pi2.majorant())
    }
}

impl<T: Real> Pair2<T> {
    pub fn new(a: AnalyticMap2<T>, b: AnalyticMap2<T>) -> crate::Result<Self> {
        if a.cap() != b.cap() {
            return Err(Error::Incompatible("A and B must share the degree cap".into()));
        }
        Ok(Self { a, b })
    }

    pub fn cap(&self) -> usize {
        self.a.cap()
    }

    /// `ι(η, ξ) = ((η(x), η(x)), (ξ(x), ξ(x)))` on `Z × 𝔻_R`, `W × 𝔻_R`.
    pub fn embed(zeta: &Pair1<T>, y_radius: T, cap: usize) -> crate::Result<Self> {
        let inf = T::infinity();
        let dy = DiskDomain::centered(y_radius);
        let om = PolyDiskDomain::new(*zeta.eta.domain(), dy);
        let ga = PolyDiskDomain::new(*zeta.xi.domain(), dy);
        let a = AnalyticMap2::from_fns(om, cap, &zeta.eta, &zeta.eta, inf)?;
        let b = AnalyticMap2::from_fns(ga, cap, &zeta.xi, &zeta.xi, inf)?;
        Self::new(a, b)
    }

    /// Embedding of the word-convention form of a normalized pair.
    pub fn embed_normalized(nu: &NormalizedPair1<T>, y_radius: T, cap: usize) -> crate::Result<Self> {
        Self::embed(&Pair1::from_normalized(nu)?, y_radius, cap)
    }

    /// `(π₁A(·, 0), π₁B(·, 0))`.
    pub fn diagonal_pair(&self) -> Pair1<T> {
        let zero = C::new(T::zero(), T::zero());
        let cap = self.cap();
        Pair1 { eta: self.a.f1().at_y(zero, cap), xi: self.b.f1().at_y(zero, cap) }
    }

    pub fn sub(&self, other: &Self) -> crate::Result<Self> {
        Ok(Self { a: self.a.sub(&other.a)?, b: self.b.sub(&other.b)? })
    }

    pub fn add(&self, other: &Self) -> crate::Result<Self> {
        Ok(Self { a: self.a.add(&other.a)?, b: self.b.add(&other.b)? })
    }

    pub fn norm(&self) -> T {
        pair_norm(&self.a, &self.b)
    }

    /// `½(‖a − h‖ + ‖b − g‖)`.
    pub fn asymmetry(&self) -> T {
        let da = self.a.f1().sub(self.a.f2()).map(|s| s.majorant()).unwrap_or(T::infinity());
        let db = self.b.f1().sub(self.b.f2()).map(|s| s.majorant()).unwrap_or(T::infinity());
        lit::<T>(0.5) * (da + db)
    }

    /// `pair_norm(Σ − ι(π₁A(·,0), π₁B(·,0)))`, an upper bound for the
    /// distance to the embedded slice.
    pub fn dist_to_slice(&self) -> crate::Result<T> {
        let inf = T::infinity();
        let w = self.diagonal_pair();
        let cap = self.cap();
        let a = AnalyticMap2::from_fns(*self.a.domain(), cap, &w.eta, &w.eta, inf)?;
        let b = AnalyticMap2::from_fns(*self.b.domain(), cap, &w.xi, &w.xi, inf)?;
        Ok(pair_norm(&self.a.sub(&a)?, &self.b.sub(&b)?))
    }

    pub fn y_dependence(&self) -> T {
        self.a.y_dependence().max(self.b.y_dependence())
    }

    /// `Λ⁻¹ Σ Λ` for `Λ(x, y) = (ℓx, ℓy)`.
    pub fn rescale(&self, scale: C<T>) -> crate::Result<Self> {
        Ok(Self { a: self.a.conjugate_linear(scale)?, b: self.b.conjugate_linear(scale)? })
    }

    pub fn restrict(&self, da: PolyDiskDomain<T>, db: PolyDiskDomain<T>, slack: T) -> crate::Result<Self> {
        Ok(Self { a: self.a.restrict(da, slack)?, b: self.b.restrict(db, slack)? })
    }

    pub fn letter(&self, l: Letter) -> &AnalyticMap2<T> {
        match l {
            Letter::Eta => &self.a,
            Letter::Xi => &self.b,
        }
    }

    /// `Σ^w ∘ inner`.
    pub fn word_apply2(&self, w: &MultiIndex, inner: &AnalyticMap2<T>, settings: &Settings) -> crate::Result<AnalyticMap2<T>> {
        let letters = w.letters();
        let slack = lit::<T>(settings.slack);
        let mut g = inner.clone();
        for (k, &l) in letters.iter().enumerate() {
            g = self.letter(l).compose(&g, slack).map_err(|e| match e {
                Error::RangeEscape { range, slack, .. } => {
                    Error::RangeEscape { context: format!("letter {k} ({l:?}) of {w}"), range, slack }
                }
                e => e,
            })?;
        }
        Ok(g)
    }

    /// Pointwise `Σ^w(x, y)`.
    pub fn eval_word(&self, w: &MultiIndex, x: C<T>, y: C<T>) -> (C<T>, C<T>) {
        w.letters().iter().fold((x, y), |(x, y), &l| self.letter(l).eval(x, y))
    }

    pub fn class_check(&self, p: &ClassParams) -> ClassDiagnostics {
        let w = self.diagonal_pair();
        let dist = |f: &AnalyticFn1<T>, c: &AnalyticFn1<f64>| -> f64 {
            let c = c.cast::<T>();
            let c = if c.domain().approx_eq(f.domain()) { Ok(c) } else { c.restrict(*f.domain(), lit(1.0)) };
            c.and_then(|c| f.sub(&c)).map(|d| f64_of(d.majorant())).unwrap_or(f64::INFINITY)
        };
        let distance_to_center = 0.5 * (dist(&w.eta, &p.center.eta) + dist(&w.xi, &p.center.xi));
        let min_dx = |s: &Series2<T>| -> f64 {
            let d = s.deriv_x();
            let dom = s.domain().x;
            let zero = C::new(T::zero(), T::zero());
            let mut best = f64::INFINITY;
            for i in 1..=24 {
                let r = dom.radius * lit(i as f64 / 24.0);
                for j in 0..64 {
                    let x = dom.center + C::from_polar(r, lit(j as f64 * std::f64::consts::TAU / 64.0));
                    if f64_of(x.norm()) <= p.q_radius {
                        continue;
                    }
                    best = best.min(f64_of(d.eval(x, zero).norm()));
                }
            }
            best
        };
        let min_dx_h = min_dx(self.a.f2());
        let min_dx_g = min_dx(self.b.f2());
        let y_dependence = f64_of(self.y_dependence());
        ClassDiagnostics {
            near_center: distance_to_center <= p.center_radius + p.delta,
            derivative_and_y: min_dx_h > p.derivative_floor && min_dx_g > p.derivative_floor && y_dependence <= p.delta,
            distance_to_center,
            min_dx_h,
            min_dx_g,
            y_dependence,
        }
    }
}

/// `H_Σ(x, y) = (a(x, y), K(y))` with `K(y) = w⁻¹_{q₀⁻¹(y)}(y)`, and its
/// inverse `(P(X, K⁻¹(Y)), K⁻¹(Y))`.
#[derive(Debug, Clone, PartialEq)]
pub struct HTransform<T: Real> {
    pub selector: Selector,
    pub h: AnalyticMap2<T>,
    pub hinv: AnalyticMap2<T>,
    pub k: AnalyticFn1<T>,
    pub kinv: AnalyticFn1<T>,
    /// `K(y₀) = 0`.
    pub y0: C<T>,
    /// `a(x₀, y₀) = 0`.
    pub x0: C<T>,
    pub round_trip: f64,
    /// Sampled sup of `|∂_z w_z|` and `|∂_z w_z⁻¹|`.
    pub dz_w: f64,
    pub dz_winv: f64,
}

/// Result of `prerenorm2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PreRenorm2<T: Real> {
    pub pair: Pair2<T>,
    pub decomposition: DiagonalDecomposition<T>,
    pub transform: HTransform<T>,
    pub dist_to_slice: f64,
    /// Scale of the restricted one-dimensional pair used to size domains.
    pub scale_estimate: C<T>,
}

fn fd<T: Real>(f: impl Fn(C<T>) -> crate::Result<C<T>>, x: C<T>) -> crate::Result<C<T>> {
    let h = T::epsilon().cbrt() * (T::one() + x.norm());
    let hc = C::new(h, T::zero());
    Ok((f(x + hc)? - f(x - hc)?) / (hc + hc))
}

struct Pullback<'a, T: Real> {
    sigma: &'a Pair2<T>,
    sel: Selector,
    settings: &'a Settings,
}

impl<'a, T: Real> Pullback<'a, T> {
    fn f(&self) -> &AnalyticMap2<T> {
        match self.sel {
            Selector::EtaEta => &self.sigma.a,
            Selector::EtaXi => &self.sigma.b,
        }
    }

    /// `φ(x, z)`: `π₁A²` or `π₁A∘B`.
    fn phi(&self, x: C<T>, z: C<T>) -> C<T> {
        let (u, v) = self.f().eval(x, z);
        self.sigma.a.f1().eval(u, v)
    }

    fn q(&self, x: C<T>, z: C<T>) -> C<T> {
        self.f().f2().eval(x, z)
    }

    fn solve_q(&self, y: C<T>, z: C<T>, seed: C<T>) -> crate::Result<C<T>> {
        let q = self.f().f2();
        let qx = q.deriv_x();
        newton_point(|x| (q.eval(x, z), qx.eval(x, z)), y, seed, self.settings, "q_z inverse")
    }

    fn translation_guess(&self, y: C<T>) -> C<T> {
        let zero = C::new(T::zero(), T::zero());
        y - self.q(zero, zero)
    }

    /// Pointwise `K(y)` and the solved `(z, X)`.
    fn k_point(&self, y: C<T>, seed: C<T>) -> crate::Result<(C<T>, C<T>, C<T>)> {
        let zero = C::new(T::zero(), T::zero());
        let z = self.solve_q(y, zero, seed)?;
        let x = self.solve_q(y, z, z)?;
        Ok((self.phi(x, z), z, x))
    }

    /// `w_z(x) = q_z(φ_z⁻¹(x))`, with `φ_z⁻¹` seeded at `seed`.
    fn w_point(&self, x: C<T>, z: C<T>, seed: C<T>) -> crate::Result<C<T>> {
        let phi = |u: C<T>| self.phi(u, z);
        let dphi = |u: C<T>| fd(|v| Ok(phi(v)), u).unwrap_or(C::new(T::zero(), T::zero()));
        let u = newton_point(|u| (phi(u), dphi(u)), x, seed, self.settings, "φ_z inverse")?;
        Ok(self.q(u, z))
    }

    /// `w_z⁻¹(y) = φ_z(q_z⁻¹(y))`.
    fn winv_point(&self, y: C<T>, z: C<T>, seed: C<T>) -> crate::Result<C<T>> {
        let u = self.solve_q(y, z, seed)?;
        Ok(self.phi(u, z))
    }

    /// `K` as a series on `disk(center, radius)`.
    fn k_series(&self, center: C<T>, radius: T, z_seed: C<T>) -> crate::Result<AnalyticFn1<T>> {
        let s = self.settings;
        let slack = lit::<T>(s.slack);
        let zero = C::new(T::zero(), T::zero());
        let f = self.f();
        let cap = f.cap();
        let q0 = f.f2().at_y(zero, cap);
        let z0 = newton_point(|x| (q0.eval(x), q0.eval_deriv(x)), center, z_seed, s, "q_0 inverse")?;
        let zser = invert1(&q0, z0, radius, s)?;
        let dom = *zser.domain();
        let x0 = self.solve_q(center, z0, z0)?;
        let d = f.f2().deriv_x().eval(x0, z0);
        if f64_of(d.norm()) < s.derivative_floor {
            return Err(Error::CriticalAtBase { derivative: f64_of(d.norm()), floor: s.derivative_floor });
        }
        let inv_d = C::new(T::one(), T::zero()) / d;
        let yid = AnalyticFn1::identity(dom, cap);
        let mut xser = AnalyticFn1::affine(dom, cap, inv_d, x0 - center * inv_d);
        let tol = lit::<T>(1e-15) * (T::one() + center.norm() + radius);
        let mut last = T::infinity();
        for _ in 0..(4 * cap + 30) {
            let r = yid.sub(&f.f2().compose_curve(&xser, &zser, slack)?)?;
            let m = r.majorant();
            xser = xser.add(&r.scale(inv_d))?;
            if m <= tol || (m <= tol * lit(1e4) && m > last * lit(0.5)) {
                break;
            }
            last = last.min(m);
        }
        let u1 = f.f1().compose_curve(&xser, &zser, slack)?;
        let u2 = f.f2().compose_curve(&xser, &zser, slack)?;
        self.sigma.a.f1().compose_curve(&u1, &u2, slack)
    }
}

/// Selector, hatted words and the full words for depth `n`.
pub fn hatted_words(theta: &RotationNumber, n: usize) -> crate::Result<(Selector, MultiIndex, MultiIndex, MultiIndex, MultiIndex)> {
    let (s, t) = multi_indices(theta, n)?;
    let (sh, sel) = hat_index(&s)?;
    let th = hat_with(&t, sel)?;
    Ok((sel, s, t, sh, th))
}

/// Builds `H_Σ` so that `H_Σ⁻¹` is defined on `out`.
pub fn h_transform<T: Real>(
    sigma: &Pair2<T>,
    theta: &RotationNumber,
    n: usize,
    out: PolyDiskDomain<T>,
    settings: &Settings,
) -> crate::Result<HTransform<T>> {
    let (sel, ..) = hatted_words(theta, n)?;
    h_transform_with(sigma, sel, out, settings)
}

fn h_transform_with<T: Real>(sigma: &Pair2<T>, sel: Selector, out: PolyDiskDomain<T>, settings: &Settings) -> crate::Result<HTransform<T>> {
    let pb = Pullback { sigma, sel, settings };
    let slack = lit::<T>(settings.slack);
    let cap = sigma.cap();
    let zero = C::new(T::zero(), T::zero());
    let kfun = |y: C<T>| pb.k_point(y, pb.translation_guess(y)).map(|r| r.0);
    let y_seed = match settings.pullback_seed {
        Some(s) => crate::clit(s),
        None => -kfun(zero)?,
    };
    let y0 = newton_point(
        |y| {
            let v = kfun(y).unwrap_or(C::new(T::nan(), T::nan()));
            let d = fd(kfun, y).unwrap_or(C::new(T::nan(), T::nan()));
            (v, d)
        },
        zero,
        y_seed,
        settings,
        "K(y) = 0",
    )?;
    let (_, z_at_y0, _) = pb.k_point(y0, pb.translation_guess(y0))?;
    let dk = fd(kfun, y0)?;
    if f64_of(dk.norm()) < settings.derivative_floor {
        return Err(Error::CriticalAtBase { derivative: f64_of(dk.norm()), floor: settings.derivative_floor });
    }
    let ry = out.y.center.norm() + out.y.radius;
    let rk = ry * lit(1.3) / dk.norm() + lit(1e-9);
    let k = pb.k_series(y0, rk, z_at_y0)?;
    let kinv0 = invert1(&k, y0, ry, settings)?;
    let kinv = kinv0.restrict(out.y, slack)?;
    let a = sigma.a.f1();
    let ax = a.deriv_x();
    let x_seed = -a.eval(zero, y0);
    let x0 = newton_point(|x| (a.eval(x, y0), ax.eval(x, y0)), zero, x_seed, settings, "a(x, y0) = 0")?;
    let py = DiskDomain::new(kinv.coeffs()[0], kinv.spread() * lit(1.02) + lit(1e-9))?;
    let p = partial_inverse_x(a, (x0, y0), PolyDiskDomain::new(out.x, py), settings)?;
    let xs = Series2::coord_x(out, cap);
    let ky = Series2::from_y(out, cap, &kinv, slack)?;
    let hinv = AnalyticMap2::new(p.compose(&xs, &ky, slack)?, ky)?;
    // H on a disk around the image of H⁻¹
    let h1c = hinv.f1().coeffs()[0];
    let hdom = PolyDiskDomain::new(DiskDomain::new(h1c, hinv.f1().spread() * lit(1.02) + lit(1e-9))?, py);
    let h = AnalyticMap2::new(a.restrict(hdom, slack)?, Series2::from_y(hdom, cap, &k, slack)?)?;
    let round = h.compose(&hinv, slack)?.sub(&AnalyticMap2::identity(out, cap))?.majorant();
    // ∂_z bounds by central differences at sample points
    let mut dz_w = 0.0f64;
    let mut dz_winv = 0.0f64;
    let hz = lit::<T>(1e-5);
    for j in 0..8 {
        let y = out.y.center + C::from_polar(out.y.radius * lit(0.5), lit(j as f64 * std::f64::consts::TAU / 8.0));
        let (kv, z, xstar) = pb.k_point(y, pb.translation_guess(y))?;
        let dz = C::new(hz, T::zero());
        let wp = pb.winv_point(y, z + dz, xstar)?;
        let wm = pb.winv_point(y, z - dz, xstar)?;
        dz_winv = dz_winv.max(f64_of(((wp - wm) / (dz + dz)).norm()));
        let fp = pb.w_point(kv, z + dz, xstar)?;
        let fm = pb.w_point(kv, z - dz, xstar)?;
        dz_w = dz_w.max(f64_of(((fp - fm) / (dz + dz)).norm()));
    }
    Ok(HTransform { selector: sel, h, hinv, k, kinv, y0, x0, round_trip: f64_of(round), dz_w, dz_winv })
}

/// Output disks `(Ā-domain, B̄-domain)` scaled from the input by the
/// one-dimensional scale estimate, or of radius `pr_radius` if set.
pub fn prerenorm2_domains<T: Real>(sigma: &Pair2<T>, scale: C<T>, settings: &Settings) -> crate::Result<(PolyDiskDomain<T>, PolyDiskDomain<T>)> {
    if let Some(r) = settings.pr_radius {
        let d = PolyDiskDomain::centered(lit(r), lit(r));
        return Ok((d, d));
    }
    let l = scale.norm();
    let m = lit::<T>(settings.shift_margin);
    let da = sigma.a.domain();
    let db = sigma.b.domain();
    let ry = l * (da.y.radius.max(db.y.radius) + m);
    Ok((PolyDiskDomain::centered(l * (da.x.radius + m), ry), PolyDiskDomain::centered(l * (db.x.radius + m), ry)))
}

/// `p𝓡ⁿΣ = H_Σ ∘ F ∘ (Σ^{ŝ_n}, Σ^{t̂_n}) ∘ A ∘ H_Σ⁻¹`.
pub fn prerenorm2<T: Real>(sigma: &Pair2<T>, theta: &RotationNumber, n: usize, settings: &Settings) -> crate::Result<PreRenorm2<T>> {
    let (sel, _s, t, sh, th) = hatted_words(theta, n)?;
    let zeta = sigma.diagonal_pair();
    let zero = C::new(T::zero(), T::zero());
    let words_t: Vec<Step> = t.letters().into_iter().map(Step::from).collect();
    let scale = zeta.eval_word(&words_t, zero, settings)?;
    if f64_of(scale.norm()) < settings.scale_floor {
        return Err(Error::ZeroScale { scale: f64_of(scale.norm()) });
    }
    let (da, db) = prerenorm2_domains(sigma, scale, settings)?;
    let rx = da.x.radius.max(db.x.radius);
    let ry = da.y.radius.max(db.y.radius);
    let out = PolyDiskDomain::centered(rx, ry);
    let tr = h_transform_with(sigma, sel, out, settings)?;
    let pb = Pullback { sigma, sel, settings };
    let slack = lit::<T>(settings.slack);
    let f = pb.f();
    let m0 = sigma.a.compose(&tr.hinv, slack)?;
    let finish = |w: &MultiIndex, dom: PolyDiskDomain<T>| -> crate::Result<AnalyticMap2<T>> {
        let s = sigma.word_apply2(w, &m0, settings)?;
        let g = f.compose(&s, slack)?;
        let first = sigma.a.f1().compose(g.f1(), g.f2(), slack)?;
        let g2 = g.f2();
        let c = g2.coeffs()[0];
        let kg = pb.k_series(c, g2.spread() * lit(1.02) + lit(1e-9), s.f1().coeffs()[0])?;
        let second = kg.compose_into(g2, slack)?;
        let m = AnalyticMap2::new(first, second)?;
        if dom.approx_eq(&out) {
            Ok(m)
        } else {
            m.restrict(dom, slack)
        }
    };
    let pair = Pair2::new(finish(&sh, da)?, finish(&th, db)?)?;
    let decomposition = DiagonalDecomposition::of(&pair);
    let dist = f64_of(pair.dist_to_slice()?);
    Ok(PreRenorm2 { pair, decomposition, transform: tr, dist_to_slice: dist, scale_estimate: scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::RotationNumber;
    use crate::settings::Convention;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type F = AnalyticFn1<f64>;

    fn c(x: f64) -> C<f64> {
        C::new(x, 0.0)
    }

    fn disk(r: f64) -> DiskDomain<f64> {
        DiskDomain::centered(r)
    }

    fn golden() -> RotationNumber {
        RotationNumber::golden(40)
    }

    /// `(ψ T_{−θ} ψ⁻¹, ψ T₁ ψ⁻¹)` with `ψ(z) = z + εz²`: commuting and nonlinear.
    fn conjugated_rotation(eps: f64) -> Pair1<f64> {
        let s = Settings::default();
        let theta = golden().value();
        let psi = F::from_poly(disk(9.0), 24, &[c(0.0), c(1.0), c(eps)]);
        let psi_inv = invert1(&psi, c(0.0), 7.0, &s).unwrap().restrict(disk(6.0), 1.0).unwrap();
        let conj = |t: f64| {
            let shifted = psi_inv.add(&F::constant(disk(6.0), 24, c(t))).unwrap();
            psi.compose(&shifted, 1.05).unwrap()
        };
        Pair1::new(conj(-theta), conj(1.0)).unwrap()
    }

    fn random_pair(rng: &mut ChaCha8Rng) -> Pair1<f64> {
        let mut p = Pair1::rotation(0.6, 6.0, 12);
        for k in 0..6 {
            p.eta.coeffs_mut()[k] += C::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1));
            p.xi.coeffs_mut()[k] += C::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1));
        }
        p
    }

    /// `ι(ζ)` plus `δ·y` terms in all four components.
    fn injected(zeta: &Pair1<f64>, delta: f64) -> Pair2<f64> {
        let e = Pair2::embed(zeta, 6.0, 12).unwrap();
        let bump = |m: &AnalyticMap2<f64>, k: f64| {
            let d = *m.domain();
            let t1 = Series2::from_poly(d, 12, &[(0, 1, c(delta / 6.0)), (1, 1, c(k * delta / 36.0))]);
            let t2 = Series2::from_poly(d, 12, &[(0, 1, c(-0.5 * delta / 6.0)), (0, 2, c(k * delta / 36.0))]);
            AnalyticMap2::new(m.f1().add(&t1).unwrap(), m.f2().add(&t2).unwrap()).unwrap()
        };
        Pair2::new(bump(&e.a, 1.0), bump(&e.b, -1.0)).unwrap()
    }

    #[test]
    fn embedding_of_translations() {
        let z = Pair1::translations(disk(6.0), disk(6.0), 12, c(1.0), c(0.4)).unwrap();
        let e = Pair2::embed(&z, 6.0, 12).unwrap();
        for (x, y) in [(c(0.3), c(-1.0)), (C::new(1.0, 2.0), c(4.0))] {
            assert_eq!(e.a.eval(x, y), (x + c(1.0), x + c(1.0)));
            let (u, v) = e.b.eval(x, y);
            assert!((u - x - c(0.4)).norm() < 1e-15 && (v - x - c(0.4)).norm() < 1e-15);
        }
        assert_eq!(e.y_dependence(), 0.0);
    }

    #[test]
    fn embedding_is_isometric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (p, q) = (random_pair(&mut rng), random_pair(&mut rng));
            let d1 = 0.5 * (p.eta.sub(&q.eta).unwrap().majorant() + p.xi.sub(&q.xi).unwrap().majorant());
            let d2 = Pair2::embed(&p, 6.0, 12).unwrap().sub(&Pair2::embed(&q, 6.0, 12).unwrap()).unwrap().norm();
            assert!((d1 - d2).abs() < 1e-12);
        }
    }

    #[test]
    fn asymmetry_examples() {
        let z = Pair1::rotation(0.6, 6.0, 12);
        let e = Pair2::embed(&z, 6.0, 12).unwrap();
        assert_eq!(e.asymmetry(), 0.0);
        let shift = |m: &AnalyticMap2<f64>| {
            let k = Series2::constant(*m.domain(), 12, C::new(0.03, -0.04));
            AnalyticMap2::new(m.f1().clone(), m.f1().add(&k).unwrap()).unwrap()
        };
        let s = Pair2::new(shift(&e.a), shift(&e.b)).unwrap();
        assert!((s.asymmetry() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn asymmetry_dominates_sampled_sup() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = Pair1::rotation(0.6, 6.0, 12);
        let e = Pair2::embed(&z, 6.0, 12).unwrap();
        for _ in 0..10 {
            let mut a = e.a.clone();
            let mut b = e.b.clone();
            for k in 0..10 {
                a.comp_mut(1).coeffs_mut()[k] += C::new(rng.gen_range(-1e-2..1e-2), rng.gen_range(-1e-2..1e-2));
                b.comp_mut(1).coeffs_mut()[k] += C::new(rng.gen_range(-1e-2..1e-2), rng.gen_range(-1e-2..1e-2));
            }
            let s = Pair2::new(a, b).unwrap();
            let sampled = 0.5
                * (s.a.f1().sub(s.a.f2()).unwrap().sampled_sup(24) + s.b.f1().sub(s.b.f2()).unwrap().sampled_sup(24));
            let asym = s.asymmetry();
            assert!(sampled <= asym * (1.0 + 1e-12));
            assert!(asym <= 10.0 * sampled);
        }
    }

    #[test]
    fn dist_to_slice_examples() {
        let z = conjugated_rotation(0.01);
        let e = Pair2::embed(&z, 6.0, 12).unwrap();
        assert!(e.dist_to_slice().unwrap() < 1e-15);
        let mut last = 0.0;
        for eps in [1e-4, 1e-3, 1e-2] {
            let s = injected(&z, eps);
            let y_norm = s.a.f1().y_part().majorant().max(s.a.f2().y_part().majorant());
            let d = s.dist_to_slice().unwrap();
            assert!(d > last);
            assert!(d >= 0.5 * y_norm - 1e-15 && d <= 2.0 * y_norm + 1e-15, "d={d} y={y_norm}");
            last = d;
        }
    }

    #[test]
    fn class_check_on_rotation_and_counterexample() {
        let z = Pair1::rotation(0.6, 6.0, 12);
        let e = Pair2::embed(&z, 6.0, 12).unwrap();
        let p = ClassParams { delta: 1e-3, q_radius: 0.1, derivative_floor: 1e-3, center: z.clone(), center_radius: 1e-2 };
        let d = e.class_check(&p);
        assert!(d.passes());
        assert_eq!(d.y_dependence, 0.0);
        // h with a critical point at x = 3, outside Q̄
        let bad = F::from_poly(disk(6.0), 12, &[c(-0.6), c(1.0), c(-1.0 / 6.0)]);
        let zb = Pair1::new(bad, z.xi.clone()).unwrap();
        let eb = Pair2::embed(&zb, 6.0, 12).unwrap();
        let db = eb.class_check(&ClassParams { center_radius: 10.0, ..p });
        assert!(db.near_center);
        assert!(!db.derivative_and_y);
        assert!(db.min_dx_h < 1e-2);
    }

    #[test]
    fn h_transform_of_embedded_commuting_pair() {
        let s = Settings::default();
        let z = conjugated_rotation(0.01);
        let e = Pair2::embed(&z, 6.0, 12).unwrap();
        let out = PolyDiskDomain::centered(2.5, 2.5);
        let tr = h_transform(&e, &golden(), 2, out, &s).unwrap();
        assert!(tr.round_trip < 1e-10, "round trip {}", tr.round_trip);
        // A ∘ H⁻¹(x, y) = (x, h(η⁻¹(x), y)), and h = η here
        let m0 = e.a.compose(&tr.hinv, 1.05).unwrap();
        for k in 0..6 {
            let (x, y) = (C::from_polar(1.5, k as f64), C::from_polar(1.0, 2.0 * k as f64));
            let (u, v) = m0.eval(x, y);
            assert!((u - x).norm() < 1e-10 && (v - x).norm() < 1e-10);
        }
        assert!(tr.dz_w < 1e-8 && tr.dz_winv < 1e-8);
    }

    #[test]
    fn h_transform_of_translations_is_affine() {
        let s = Settings::default();
        let z = Pair1::rotation(golden().value(), 6.0, 12);
        let e = Pair2::embed(&z, 6.0, 12).unwrap();
        let tr = h_transform(&e, &golden(), 3, PolyDiskDomain::centered(2.0, 2.0), &s).unwrap();
        for m in [tr.h.f1(), tr.h.f2(), tr.hinv.f1(), tr.hinv.f2()] {
            for d in 2..=12 {
                for j in 0..=d {
                    assert!(m.coeff(d - j, j).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn h_transform_z_derivatives_scale_with_delta() {
        let s = Settings::default();
        let z = conjugated_rotation(0.01);
        let out = PolyDiskDomain::centered(2.5, 2.5);
        let big = h_transform(&injected(&z, 1e-2), &golden(), 2, out, &s).unwrap();
        let small = h_transform(&injected(&z, 1e-3), &golden(), 2, out, &s).unwrap();
        for (b, sm) in [(big.dz_w, small.dz_w), (big.dz_winv, small.dz_winv)] {
            let ratio = b / sm;
            assert!(ratio > 7.0 && ratio < 13.0, "ratio {ratio}");
        }
    }

    #[test]
    fn prerenorm2_of_embedded_commuting_pair() {
        let s = Settings::default();
        let z = conjugated_rotation(0.01);
        let e = Pair2::embed(&z, 6.0, 12).unwrap();
        for n in 2..=4 {
            let pr = prerenorm2(&e, &golden(), n, &s).unwrap();
            assert!(pr.dist_to_slice < 1e-10, "n={n} dist {}", pr.dist_to_slice);
            let words = crate::pair1d::prerenorm_words(&golden(), n, Convention::Words).unwrap();
            let da = *pr.pair.a.domain();
            let db = *pr.pair.b.domain();
            let one = z.prerenorm1_on(&words, da.x, db.x, &s).unwrap();
            let want = Pair2::embed(&one, da.y.radius, 12).unwrap();
            let d = pr.pair.sub(&want).unwrap().norm();
            assert!(d < 1e-9, "n={n} distance {d}");
            let back = pr.decomposition.eta1.sub(&one.eta.with_cap(12)).unwrap().majorant();
            assert!(back < 1e-9);
        }
    }

    #[test]
    fn prerenorm2_of_translations_is_translations() {
        let s = Settings::default();
        let theta = golden().value();
        let z = Pair1::rotation(theta, 6.0, 12);
        let e = Pair2::embed(&z, 6.0, 12).unwrap();
        let pr = prerenorm2(&e, &golden(), 3, &s).unwrap();
        let (x, y) = (c(0.2), c(-0.1));
        let (u, v) = pr.pair.a.eval(x, y);
        let t = u - x;
        assert!((v - x - t).norm() < 1e-12);
        let (sa, _) = multi_indices(&golden(), 3).unwrap();
        let (ne, nx) = sa.weight();
        assert!((t - c(-theta * ne as f64 + nx as f64)).norm() < 1e-12);
    }

    #[test]
    fn decomposition_reconstructs_exactly() {
        let s = Settings::default();
        let z = conjugated_rotation(0.01);
        let pr = prerenorm2(&injected(&z, 1e-3), &golden(), 2, &s).unwrap();
        let back = pr.decomposition.reconstruct().unwrap();
        assert!(back.sub(&pr.pair).unwrap().norm() < 1e-14);
    }

    #[test]
    fn injected_pair_diagonal_gap_is_small() {
        let s = Settings::default();
        let z = conjugated_rotation(0.01);
        let mut gaps = Vec::new();
        for delta in [1e-2, 1e-3] {
            let sigma = injected(&z, delta);
            let pr = prerenorm2(&sigma, &golden(), 2, &s).unwrap();
            let gap = f64_of(pr.decomposition.diagonal_gap().unwrap());
            let bound = delta * sigma.asymmetry() + delta * delta;
            gaps.push((delta, gap, bound, pr.dist_to_slice));
        }
        for (delta, gap, bound, dist) in &gaps {
            eprintln!("delta={delta:e} gap={gap:e} delta*asym+delta^2={bound:e} dist_to_slice={dist:e}");
        }
        assert!(gaps[1].1 < gaps[0].1);
    }
}
