//! One-dimensional pairs `ζ = (η, ξ)`, normalized pairs `(T₁, β)`, and
//! their renormalization.

use serde::{Deserialize, Serialize};

use crate::contfrac::{multi_indices, Letter, MultiIndex, RotationNumber};
use crate::report::SweepReport;
use crate::series::{inverse_compose, newton_point, AnalyticFn1, DiskDomain};
use crate::settings::Convention;
use crate::{c64, f64_of, linalg, lit, Error, Real, Settings, C};

/// A letter of a word in `η`, `ξ` and their inverses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Step {
    Eta,
    Xi,
    EtaInv,
    XiInv,
}

impl Step {
    pub fn inverse(self) -> Self {
        match self {
            Step::Eta => Step::EtaInv,
            Step::Xi => Step::XiInv,
            Step::EtaInv => Step::Eta,
            Step::XiInv => Step::Xi,
        }
    }
}

impl From<Letter> for Step {
    fn from(l: Letter) -> Self {
        match l {
            Letter::Eta => Step::Eta,
            Letter::Xi => Step::Xi,
        }
    }
}

/// Inverse of a word given in application order.
pub fn invert_word(w: &[Step]) -> Vec<Step> {
    w.iter().rev().map(|s| s.inverse()).collect()
}

pub fn steps_of(w: &MultiIndex) -> Vec<Step> {
    w.letters().into_iter().map(Step::from).collect()
}

fn repeat_word(w: &[Step], times: u64) -> Vec<Step> {
    let mut out = Vec::with_capacity(w.len() * times as usize);
    for _ in 0..times {
        out.extend_from_slice(w);
    }
    out
}

/// Words `(η_n, ξ_n)` of the `n`-th pre-renormalization, in application
/// order, for the chosen recursion.
pub fn prerenorm_words(theta: &RotationNumber, n: usize, convention: Convention) -> crate::Result<(Vec<Step>, Vec<Step>)> {
    if n == 0 {
        return Ok((vec![Step::Eta], vec![Step::Xi]));
    }
    match convention {
        Convention::Words => {
            let (s, t) = multi_indices(theta, n)?;
            Ok((steps_of(&s), steps_of(&t)))
        }
        Convention::Mirrored => {
            if n > theta.len() {
                return Err(Error::InsufficientPrefix { needed: n, available: theta.len() });
            }
            let (mut e, mut x) = (vec![Step::Eta], vec![Step::Xi]);
            for k in 1..=n {
                let a = theta.quotient(k)?;
                let mut next = e;
                next.extend(repeat_word(&invert_word(&x), a));
                e = std::mem::replace(&mut x, next);
            }
            Ok((e, x))
        }
    }
}

/// A pair of maps `η` on `Z` and `ξ` on `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Pair1<T: Real> {
    pub eta: AnalyticFn1<T>,
    pub xi: AnalyticFn1<T>,
}

/// Result of pre-renormalization: the pair and the scale `ℓ_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PreRenorm1<T: Real> {
    pub pair: Pair1<T>,
    pub scale: C<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CommutatorRecord<T: Real> {
    pub series: AnalyticFn1<T>,
    /// Taylor coefficients of orders 0, 1, 2 at the origin.
    pub jets: [C<f64>; 3],
    pub norm: f64,
    pub lambda: Option<f64>,
}

/// The outer word `f_ℓ` with `[p𝓡^ℓζ] = sign·(f_ℓ∘η∘ξ − f_ℓ∘ξ∘η)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorFactor<T: Real> {
    pub word: Vec<Step>,
    pub sign: i32,
    /// `f_ℓ` expanded around `η∘ξ(0)`.
    pub series: AnalyticFn1<T>,
    /// Largest pointwise mismatch of the two factorization identities.
    pub residual: f64,
}

fn check_point<T: Real>(f: &AnalyticFn1<T>, z: C<T>, slack: T, context: &str) -> crate::Result<()> {
    let d = f.domain();
    let ratio = (z - d.center).norm() / d.radius;
    if ratio > slack {
        return Err(Error::RangeEscape { context: context.into(), range: f64_of(ratio), slack: f64_of(slack) });
    }
    Ok(())
}

fn translation_seed<T: Real>(f: &AnalyticFn1<T>, w: C<T>) -> C<T> {
    let c = f.domain().center;
    w - (f.eval(c) - c)
}

impl<T: Real> Pair1<T> {
    pub fn new(eta: AnalyticFn1<T>, xi: AnalyticFn1<T>) -> crate::Result<Self> {
        let zero = C::new(T::zero(), T::zero());
        if !eta.domain().contains(zero) || !xi.domain().contains(zero) {
            return Err(Error::InvalidInput("both domains must contain 0".into()));
        }
        Ok(Self { eta, xi })
    }

    /// `(z + u, z + v)` on the given disks.
    pub fn translations(z: DiskDomain<T>, w: DiskDomain<T>, cap: usize, u: C<T>, v: C<T>) -> crate::Result<Self> {
        Self::new(AnalyticFn1::translation(z, cap, u), AnalyticFn1::translation(w, cap, v))
    }

    /// The rotation pair `(T_{−θ}, T₁)` on centered disks.
    pub fn rotation(theta: T, radius: T, cap: usize) -> Self {
        let d = DiskDomain::centered(radius);
        Self {
            eta: AnalyticFn1::translation(d, cap, C::new(-theta, T::zero())),
            xi: AnalyticFn1::translation(d, cap, C::new(T::one(), T::zero())),
        }
    }

    /// `(z ↦ −β(−z), T₁)`, the word-convention form of `(T₁, β)`.
    pub fn from_normalized(nu: &NormalizedPair1<T>) -> crate::Result<Self> {
        let m1 = C::new(-T::one(), T::zero());
        let eta = nu.beta.conjugate_linear(m1)?;
        let xi = AnalyticFn1::translation(*eta.domain(), eta.cap(), C::new(T::one(), T::zero()));
        Self::new(eta, xi)
    }

    /// `(T₁, β)` as a plain pair, as used by the mirrored recursion.
    pub fn mirrored_of(nu: &NormalizedPair1<T>) -> Self {
        let b = &nu.beta;
        Self { eta: AnalyticFn1::translation(*b.domain(), b.cap(), C::new(T::one(), T::zero())), xi: b.clone() }
    }

    pub fn cap(&self) -> usize {
        self.eta.cap().max(self.xi.cap())
    }

    fn map_of(&self, s: Step) -> &AnalyticFn1<T> {
        match s {
            Step::Eta | Step::EtaInv => &self.eta,
            Step::Xi | Step::XiInv => &self.xi,
        }
    }

    pub fn eval_step(&self, s: Step, z: C<T>, settings: &Settings) -> crate::Result<C<T>> {
        let f = self.map_of(s);
        let slack = lit::<T>(settings.slack);
        match s {
            Step::Eta | Step::Xi => {
                check_point(f, z, slack, "word letter")?;
                Ok(f.eval(z))
            }
            Step::EtaInv | Step::XiInv => {
                let x = newton_point(|x| (f.eval(x), f.eval_deriv(x)), z, translation_seed(f, z), settings, "inverse letter")?;
                check_point(f, x, slack, "inverse letter")?;
                Ok(x)
            }
        }
    }

    /// Pointwise value of a word (application order).
    pub fn eval_word(&self, word: &[Step], z: C<T>, settings: &Settings) -> crate::Result<C<T>> {
        word.iter().try_fold(z, |acc, &s| self.eval_step(s, acc, settings))
    }

    pub fn apply_step(&self, s: Step, g: &AnalyticFn1<T>, settings: &Settings) -> crate::Result<AnalyticFn1<T>> {
        let f = self.map_of(s);
        match s {
            Step::Eta | Step::Xi => f.compose(g, lit(settings.slack)),
            Step::EtaInv | Step::XiInv => inverse_compose(f, g, translation_seed(f, g.coeffs()[0]), settings),
        }
    }

    /// `word ∘ inner` as a series on `inner`'s domain.
    pub fn apply_word(&self, word: &[Step], inner: &AnalyticFn1<T>, settings: &Settings) -> crate::Result<AnalyticFn1<T>> {
        let mut g = inner.clone();
        for (k, &s) in word.iter().enumerate() {
            g = self.apply_step(s, &g, settings).map_err(|e| match e {
                Error::RangeEscape { range, slack, .. } => {
                    Error::RangeEscape { context: format!("letter {k} ({s:?}) of a word of length {}", word.len()), range, slack }
                }
                e => e,
            })?;
        }
        Ok(g)
    }

    /// `ζ^w ∘ inner` for a multi-index word.
    pub fn word_apply(&self, w: &MultiIndex, inner: &AnalyticFn1<T>, settings: &Settings) -> crate::Result<AnalyticFn1<T>> {
        self.apply_word(&steps_of(w), inner, settings)
    }

    /// `ℓ_n`: `ξ_n(0)` for the word recursion, `η_n(0)` for the mirrored one.
    pub fn scale_of(&self, words: &(Vec<Step>, Vec<Step>), convention: Convention, settings: &Settings) -> crate::Result<C<T>> {
        let zero = C::new(T::zero(), T::zero());
        let w = match convention {
            Convention::Words => &words.1,
            Convention::Mirrored => &words.0,
        };
        self.eval_word(w, zero, settings)
    }

    /// Both words applied on explicit domains.
    pub fn prerenorm1_on(
        &self,
        words: &(Vec<Step>, Vec<Step>),
        dz: DiskDomain<T>,
        dw: DiskDomain<T>,
        settings: &Settings,
    ) -> crate::Result<Pair1<T>> {
        let cap = self.cap();
        let eta = self.apply_word(&words.0, &AnalyticFn1::identity(dz, cap), settings)?;
        let xi = self.apply_word(&words.1, &AnalyticFn1::identity(dw, cap), settings)?;
        Ok(Pair1 { eta, xi })
    }

    /// `p𝓡ⁿζ` on `Z_n = ℓ_n Z`, `W_n = ℓ_n W`.
    pub fn prerenorm1(&self, theta: &RotationNumber, n: usize, settings: &Settings) -> crate::Result<PreRenorm1<T>> {
        let words = prerenorm_words(theta, n, settings.convention)?;
        let scale = self.scale_of(&words, settings.convention, settings)?;
        if f64_of(scale.norm()) < settings.scale_floor {
            return Err(Error::ZeroScale { scale: f64_of(scale.norm()) });
        }
        let dz = DiskDomain::new(self.eta.domain().center * scale, self.eta.domain().radius * scale.norm())?;
        let dw = DiskDomain::new(self.xi.domain().center * scale, self.xi.domain().radius * scale.norm())?;
        Ok(PreRenorm1 { pair: self.prerenorm1_on(&words, dz, dw, settings)?, scale })
    }

    /// `(ℓ⁻¹ η ℓ, ℓ⁻¹ ξ ℓ)`.
    pub fn rescale(&self, scale: C<T>) -> crate::Result<Self> {
        Ok(Self { eta: self.eta.conjugate_linear(scale)?, xi: self.xi.conjugate_linear(scale)? })
    }

    /// `0.1 ×` the smaller domain radius.
    pub fn default_delta(&self) -> T {
        lit::<T>(0.1) * self.eta.domain().radius.min(self.xi.domain().radius)
    }

    /// `[ζ] = η∘ξ − ξ∘η` on `U_δ(0)`.
    pub fn commutator(&self, delta: T, settings: &Settings) -> crate::Result<CommutatorRecord<T>> {
        let u = AnalyticFn1::identity(DiskDomain::centered(delta), self.cap());
        let slack = lit::<T>(settings.slack);
        let ex = self.eta.compose(&self.xi.compose(&u, slack)?, slack)?;
        let xe = self.xi.compose(&self.eta.compose(&u, slack)?, slack)?;
        Ok(CommutatorRecord::of(ex.sub(&xe)?))
    }

    /// The common outer word after `ell` pre-renormalization steps.
    pub fn commutator_factor(&self, theta: &RotationNumber, ell: usize, settings: &Settings) -> crate::Result<CommutatorFactor<T>> {
        if ell > theta.len() {
            return Err(Error::InsufficientPrefix { needed: ell, available: theta.len() });
        }
        let (mut e, mut x) = (vec![Step::Eta], vec![Step::Xi]);
        let mut f: Vec<Step> = Vec::new();
        let mut sign = 1;
        for k in 1..=ell {
            let a = theta.quotient(k)?;
            match settings.convention {
                Convention::Words => {
                    f.extend(repeat_word(&e, a));
                    let mut next = x;
                    next.extend(repeat_word(&e, a));
                    x = std::mem::replace(&mut e, next);
                }
                Convention::Mirrored => {
                    let xinv = invert_word(&x);
                    f.extend(repeat_word(&xinv, a));
                    let mut next = e;
                    next.extend(repeat_word(&xinv, a));
                    e = std::mem::replace(&mut x, next);
                }
            }
            sign = -sign;
        }
        let zero = C::new(T::zero(), T::zero());
        let delta = self.default_delta();
        let ex0 = self.eval_word(&[Step::Xi, Step::Eta], zero, settings)?;
        let mut residual = 0.0f64;
        for j in 0..9 {
            let z = if j == 0 {
                zero
            } else {
                C::from_polar(delta * lit(0.5), lit::<T>(j as f64) * T::PI() / lit(4.0))
            };
            let xe = self.eval_word(&[Step::Eta, Step::Xi], z, settings)?;
            let ex = self.eval_word(&[Step::Xi, Step::Eta], z, settings)?;
            let (first, second) = if ell % 2 == 0 { (ex, xe) } else { (xe, ex) };
            let lhs1 = self.eval_word(&[x.as_slice(), e.as_slice()].concat(), z, settings)?;
            let lhs2 = self.eval_word(&[e.as_slice(), x.as_slice()].concat(), z, settings)?;
            let rhs1 = self.eval_word(&f, first, settings)?;
            let rhs2 = self.eval_word(&f, second, settings)?;
            let scale = T::one() + lhs1.norm().max(lhs2.norm());
            residual = residual.max(f64_of((lhs1 - rhs1).norm() / scale)).max(f64_of((lhs2 - rhs2).norm() / scale));
        }
        let series = self.apply_word(&f, &AnalyticFn1::identity(DiskDomain::new(ex0, delta)?, self.cap()), settings)?;
        Ok(CommutatorFactor { word: f, sign, series, residual })
    }
}

impl<T: Real> CommutatorRecord<T> {
    pub fn of(series: AnalyticFn1<T>) -> Self {
        let jets = [c64(series.taylor(0)), c64(series.taylor(1)), c64(series.taylor(2))];
        let norm = f64_of(series.majorant());
        Self { series, jets, norm, lambda: None }
    }
}

/// A pair `(T₁, β)`, optionally carrying the rotation number of `β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NormalizedPair1<T: Real> {
    pub beta: AnalyticFn1<T>,
    pub rotation: Option<RotationNumber>,
}

impl<T: Real> NormalizedPair1<T> {
    pub fn new(beta: AnalyticFn1<T>, rotation: Option<RotationNumber>) -> Self {
        Self { beta, rotation }
    }

    /// `β = T_θ` on the centered disk of radius `radius`.
    pub fn rotation(theta: &RotationNumber, radius: T, cap: usize) -> Self {
        let beta = AnalyticFn1::translation(DiskDomain::centered(radius), cap, C::new(lit(theta.value()), T::zero()));
        Self { beta, rotation: Some(theta.clone()) }
    }

    /// `‖β − T_{β(0)}‖` on `β`'s domain.
    pub fn distance_to_rotation(&self) -> T {
        let mut d = self.beta.clone();
        let r = d.domain().radius;
        let cs = d.coeffs_mut();
        cs[0] = C::new(T::zero(), T::zero());
        if cs.len() > 1 {
            cs[1] = cs[1] - C::new(r, T::zero());
        }
        d.majorant()
    }

    /// `‖β(z + 1) − β(z) − 1‖` on `U_δ(0)`.
    pub fn translation_defect(&self, delta: T, settings: &Settings) -> crate::Result<T> {
        Ok(self.commutator(delta, settings)?.series.majorant())
    }

    pub fn default_delta(&self) -> T {
        lit::<T>(0.1) * self.beta.domain().radius
    }

    /// `[(T₁, β)] = β + 1 − β∘T₁` on `U_δ(0)`.
    pub fn commutator(&self, delta: T, settings: &Settings) -> crate::Result<CommutatorRecord<T>> {
        let cap = self.beta.cap();
        let d = DiskDomain::centered(delta);
        let one = C::new(T::one(), T::zero());
        let slack = lit::<T>(settings.slack);
        let shifted = self.beta.compose(&AnalyticFn1::translation(d, cap, one), slack)?;
        let mut plain = self.beta.restrict(d, slack)?;
        plain.coeffs_mut()[0] = plain.coeffs()[0] + one;
        Ok(CommutatorRecord::of(plain.sub(&shifted)?))
    }
}

/// Linearizing coordinate `ψ` with `ψ(0) = 0` and `α̃∘ψ = ψ∘T_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linearization<T: Real> {
    pub psi: AnalyticFn1<T>,
    /// `‖ψ⁻¹∘α̃∘ψ − T_s‖` on the centered disk of radius `defect_radius`.
    pub defect: f64,
    pub defect_radius: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// [`linearizer_to`] with unit shift.
pub fn linearizer<T: Real>(alpha: &AnalyticFn1<T>, settings: &Settings) -> crate::Result<Linearization<T>> {
    linearizer_to(alpha, C::new(T::one(), T::zero()), settings)
}

/// Newton on the scaled coefficients of `ψ`, seeded at the identity.
///
/// The unknowns are all `D + 1` coefficients; the equations are the
/// residual coefficients of degree below `D` plus `ψ(0) = 0`.
pub fn linearizer_to<T: Real>(alpha: &AnalyticFn1<T>, shift: C<T>, settings: &Settings) -> crate::Result<Linearization<T>> {
    let dom = *alpha.domain();
    let cap = alpha.cap();
    let inf = T::infinity();
    let slack = lit::<T>(settings.slack);
    let zero = C::new(T::zero(), T::zero());
    let u0 = dom.to_scaled(zero);
    let tshift = AnalyticFn1::translation(dom, cap, shift);
    let dalpha = alpha.derivative();
    let mut psi = AnalyticFn1::identity(dom, cap);
    let tol = lit::<T>(settings.newton_tol).max(T::epsilon() * lit(100.0)) * (T::one() + dom.radius);
    let residual_of = |psi: &AnalyticFn1<T>| -> crate::Result<(Vec<C<T>>, T)> {
        let r = alpha.compose(psi, slack)?.sub(&psi.compose(&tshift, inf)?)?;
        let mut v: Vec<C<T>> = r.coeffs()[..cap].to_vec();
        v.push(psi.eval(zero));
        let m = v.iter().fold(T::zero(), |acc, c| acc + c.norm());
        Ok((v, m))
    };
    let (mut res, mut m) = residual_of(&psi)?;
    let mut best = m;
    let mut stalls = 0;
    let mut iterations = 0;
    while m > tol {
        if iterations >= settings.max_newton || stalls >= 4 {
            return Err(Error::LinearizerDivergence { residual: f64_of(m), iterations });
        }
        let da = dalpha.compose(&psi, inf)?;
        let mut mat = vec![vec![zero; cap + 1]; cap + 1];
        let mut upow = C::new(T::one(), T::zero());
        for k in 0..=cap {
            let mut ek = vec![zero; cap + 1];
            ek[k] = C::new(T::one(), T::zero());
            let e = AnalyticFn1::new(dom, ek)?;
            let col = da.mul(&e)?.sub(&e.compose(&tshift, inf)?)?;
            for (row, c) in col.coeffs()[..cap].iter().enumerate() {
                mat[row][k] = *c;
            }
            mat[cap][k] = upow;
            upow = upow * u0;
        }
        let rhs: Vec<C<T>> = res.iter().map(|c| -*c).collect();
        let (delta, _) = linalg::solve(&mat, &rhs)?;
        for (c, d) in psi.coeffs_mut().iter_mut().zip(delta) {
            *c = *c + d;
        }
        iterations += 1;
        let (r2, m2) = residual_of(&psi)?;
        res = r2;
        if m2 < best * lit(0.5) {
            stalls = 0;
        } else {
            stalls += 1;
        }
        best = best.min(m2);
        m = m2;
        if stalls >= 2 && m <= tol * lit(1e3) {
            break;
        }
    }
    let rho = dom.radius * lit(0.5);
    let sub = DiskDomain::centered(rho);
    let psi_sub = psi.restrict(sub, slack)?;
    let conj = inverse_compose(&psi, &alpha.compose(&psi_sub, slack)?, shift, settings)?;
    let defect = conj.sub(&AnalyticFn1::translation(sub, cap, shift))?.majorant();
    Ok(Linearization { psi, defect: f64_of(defect), defect_radius: f64_of(rho), iterations, residual: f64_of(m) })
}

fn leading_quotient<T: Real>(nu: &NormalizedPair1<T>, settings: &Settings) -> crate::Result<u64> {
    if let Some(r) = &nu.rotation {
        return r.quotient(1);
    }
    let b0 = f64_of(nu.beta.eval(C::new(T::zero(), T::zero())).re);
    if !(b0 > 0.0 && b0 < 1.0) {
        return Err(Error::InvalidInput(format!("β(0) = {b0} is not in (0, 1)")));
    }
    let a = (1.0 / b0).floor();
    if a > settings.rational_floor as f64 {
        return Err(Error::RationalInput { value: b0, denominator: a as u64 });
    }
    Ok(a as u64)
}

/// One continued-fraction step `(T₁, β) ↦ (β, β^{−a}∘T₁)`, rescaled by
/// `β(0)` and renormalized by linearizing the first map.
pub fn renorm1<T: Real>(nu: &NormalizedPair1<T>, settings: &Settings) -> crate::Result<NormalizedPair1<T>> {
    let beta = &nu.beta;
    let w = *beta.domain();
    let cap = beta.cap();
    let a = leading_quotient(nu, settings)?;
    let zero = C::new(T::zero(), T::zero());
    let one = C::new(T::one(), T::zero());
    let ell = beta.eval(zero);
    if f64_of(ell.norm()) < settings.scale_floor {
        return Err(Error::ZeroScale { scale: f64_of(ell.norm()) });
    }
    let zeta = Pair1::mirrored_of(nu);
    let back = repeat_word(&[Step::XiInv], a);
    let theta1 = zeta.eval_word(&[vec![Step::Eta], back.clone()].concat(), zero, settings)? / ell;
    let big = w.center.norm() + w.radius + theta1.norm() + lit(0.1);
    let d = DiskDomain::centered(ell.norm() * big);
    let slack = lit::<T>(settings.slack);
    let eta1 = beta.restrict(d, slack)?;
    let xi1 = zeta.apply_word(&back, &AnalyticFn1::translation(d, cap, one), settings)?;
    let eta_t = eta1.conjugate_linear(ell)?;
    let xi_t = xi1.conjugate_linear(ell)?;
    let lin = linearizer(&eta_t, settings)?;
    let psi_w = lin.psi.restrict(w, slack)?;
    let inner = xi_t.compose(&psi_w, slack)?;
    let beta1 = inverse_compose(&lin.psi, &inner, inner.coeffs()[0], settings)?;
    let rotation = nu.rotation.as_ref().and_then(|r| r.gauss().ok());
    Ok(NormalizedPair1 { beta: beta1, rotation })
}

/// `‖[𝓡^k ν]‖` on `U_δ(0)` for `k ≤ ell`, with ratio to `k = 0`.
pub fn commutator_decay<T: Real>(nu: &NormalizedPair1<T>, ell: usize, delta: T, settings: &Settings) -> crate::Result<SweepReport> {
    let mut rep = SweepReport::new("commutator_decay", &["k", "commutator_norm", "ratio"]);
    let mut cur = nu.clone();
    let mut first = 0.0;
    for k in 0..=ell {
        if k > 0 {
            cur = renorm1(&cur, settings)?;
        }
        let n = cur.commutator(delta, settings)?.norm;
        if k == 0 {
            first = n;
        }
        let ratio = if first > 0.0 { n / first } else { 0.0 };
        rep.rows.push(vec![k as f64, n, ratio]);
    }
    let tau = rep.rows.last().map(|r| r[2]).unwrap_or(0.0);
    rep.summary.push(("tau_hat".into(), tau));
    rep.summary.push(("delta".into(), f64_of(delta)));
    Ok(rep)
}

/// First-order size of the quadratic commutator coefficient after `ell`
/// steps: `λ_ℓ |f_ℓ'(η∘ξ(0))| |c|`, with `c` the `z²` coefficient of `[ν]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayPrediction {
    pub lambda: f64,
    pub f_prime: f64,
    pub c: f64,
    pub predicted: f64,
}

pub fn decay_prediction<T: Real>(nu: &NormalizedPair1<T>, ell: usize, settings: &Settings) -> crate::Result<DecayPrediction> {
    let theta = nu
        .rotation
        .clone()
        .ok_or_else(|| Error::InvalidInput("a rotation number is needed for the prediction".into()))?;
    let mirrored = Settings { convention: Convention::Mirrored, ..settings.clone() };
    let zeta = Pair1::mirrored_of(nu);
    let words = prerenorm_words(&theta, ell, Convention::Mirrored)?;
    let lambda = f64_of(zeta.scale_of(&words, Convention::Mirrored, &mirrored)?.norm());
    let factor = zeta.commutator_factor(&theta, ell, &mirrored)?;
    let f_prime = f64_of(factor.series.eval_deriv(factor.series.domain().center).norm());
    let c = nu.commutator(nu.default_delta(), settings)?.jets[2].norm();
    Ok(DecayPrediction { lambda, f_prime, c, predicted: lambda * f_prime * c })
}
