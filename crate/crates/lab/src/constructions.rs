//! Test pairs used by the experiments: rotations, conjugated rotations,
//! Hénon iterates, pairs with a prescribed commutator, and random
//! perturbations with a geometric envelope.

use rand::Rng;
use renormforge_core::NormalizedPair1;
use renormforge_core::series::{invert1, AnalyticFn1, AnalyticMap2, DiskDomain, PolyDiskDomain, Series2};
use renormforge_core::{Pair1, Pair2, Result, Settings, C};

fn c(x: f64) -> C<f64> {
    C::new(x, 0.0)
}

fn disk(r: f64) -> DiskDomain<f64> {
    DiskDomain::centered(r)
}

fn random_c<R: Rng>(rng: &mut R, size: f64) -> C<f64> {
    C::new(rng.gen_range(-size..=size), rng.gen_range(-size..=size))
}

/// `(ψ T_{−θ} ψ⁻¹, ψ T₁ ψ⁻¹)` on disks of radius 6 with `ψ(z) = z + ε z²`,
/// an exactly commuting pair off the rotation.
pub fn conjugated_rotation(theta: f64, eps: f64, cap: usize) -> Result<Pair1> {
    let s = Settings::default();
    let psi = AnalyticFn1::from_poly(disk(9.0), 2 * cap, &[c(0.0), c(1.0), c(eps)]);
    let psi_inv = invert1(&psi, c(0.0), 7.0, &s)?.restrict(disk(6.0), 1.0)?;
    let conj = |t: f64| -> Result<AnalyticFn1<f64>> {
        let shifted = psi_inv.add(&AnalyticFn1::constant(disk(6.0), 2 * cap, c(t)))?;
        Ok(psi.compose(&shifted, 1.05)?.with_cap(cap))
    };
    Pair1::new(conj(-theta)?, conj(1.0)?)
}

/// `H(x, y) = (κ + s x² − ε y, x)` on the unit bidisk.
pub fn henon(kappa: f64, s: f64, eps: f64, cap: usize) -> Result<AnalyticMap2<f64>> {
    let dom = PolyDiskDomain::new(disk(1.0), disk(1.0));
    let f1 = Series2::from_poly(dom, cap, &[(0, 0, c(kappa)), (2, 0, c(s)), (0, 1, c(-eps))]);
    let f2 = Series2::from_poly(dom, cap, &[(1, 0, c(1.0))]);
    AnalyticMap2::new(f1, f2)
}

/// `(H, H∘H)`, a commuting pair with a critical point of `π₁H(·, 0)` at 0.
pub fn henon_pair(kappa: f64, s: f64, eps: f64, cap: usize) -> Result<Pair2> {
    let h = henon(kappa, s, eps, cap)?;
    let hh = h.compose(&h, 1.05)?;
    Pair2::new(h, hh)
}

/// Random Hénon parameters with `κ ∈ ±[0.2, 0.3]`, `s ∈ [0.4, 0.6]`,
/// `ε ∈ [5·10⁻⁴, 2·10⁻³]`; the critical point of the pair then lies within
/// `0.02` of the origin.
pub fn random_henon_params<R: Rng>(rng: &mut R) -> (f64, f64, f64) {
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    (sign * rng.gen_range(0.2..=0.3), rng.gen_range(0.4..=0.6), rng.gen_range(5e-4..=2e-3))
}

/// `β = T_θ + p` with `p(z) − p(z + 1) = k z²`, so `[(T₁, β)] = k z²`.
pub fn quadratic_commutator(theta: &renormforge_core::contfrac::RotationNumber, k: C<f64>, radius: f64, cap: usize) -> NormalizedPair1 {
    let poly = [c(0.0), -k / 6.0, k / 2.0, -k / 3.0];
    let p = AnalyticFn1::from_poly(disk(radius), cap, &poly);
    let beta = AnalyticFn1::translation(disk(radius), cap, c(theta.value())).add(&p).expect("same domain");
    NormalizedPair1::new(beta, Some(theta.clone()))
}

/// Rotations of the plane about `±center` by angles `a` and `b`, on a disk
/// of radius `radius`. Words in them stay bounded for long.
pub fn isometry_pair(a: f64, b: f64, center: f64, radius: f64) -> Result<Pair1> {
    let rot = |angle: f64, z0: f64| {
        let u = C::from_polar(1.0, angle);
        AnalyticFn1::affine(disk(radius), 2, u, c(z0) - u * z0)
    };
    Pair1::new(rot(a, center), rot(b, -center))
}

/// Adds to every coefficient of degree `k ≥ min_degree` (scaled
/// coordinates) a uniform complex number of size `size·envelope^k`.
pub fn perturb_fn<R: Rng>(rng: &mut R, f: &AnalyticFn1<f64>, size: f64, envelope: f64, min_degree: usize) -> AnalyticFn1<f64> {
    let mut g = f.clone();
    for (k, v) in g.coeffs_mut().iter_mut().enumerate().skip(min_degree) {
        *v += random_c(rng, size * envelope.powi(k as i32));
    }
    g
}

/// Bivariate version of [`perturb_fn`], envelope in total degree.
pub fn perturb_series2<R: Rng>(rng: &mut R, f: &Series2<f64>, size: f64, envelope: f64, min_degree: usize) -> Series2<f64> {
    let mut g = f.clone();
    let cap = g.cap();
    for d in min_degree..=cap {
        for i in 0..=d {
            let j = d - i;
            let v = g.coeff(i, j) + random_c(rng, size * envelope.powi(d as i32));
            g.set_coeff(i, j, v);
        }
    }
    g
}

pub fn perturb_pair2<R: Rng>(rng: &mut R, p: &Pair2, size: f64, envelope: f64) -> Result<Pair2> {
    let map = |rng: &mut R, m: &AnalyticMap2<f64>| {
        AnalyticMap2::new(perturb_series2(rng, m.f1(), size, envelope, 2), perturb_series2(rng, m.f2(), size, envelope, 2))
    };
    let a = map(rng, &p.a)?;
    let b = map(rng, &p.b)?;
    Pair2::new(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn conjugated_rotation_commutes() {
        let z = conjugated_rotation(0.618, 1e-2, 12).unwrap();
        assert!(z.commutator(0.6, &Settings::default()).unwrap().norm < 1e-12);
    }

    #[test]
    fn henon_pair_commutes() {
        let p = henon_pair(0.25, 0.5, 1e-3, 12).unwrap();
        let ab = p.a.compose(&p.b, 1.05).unwrap();
        let ba = p.b.compose(&p.a, 1.05).unwrap();
        assert!(ab.sub(&ba).unwrap().majorant() < 1e-12);
    }

    #[test]
    fn quadratic_commutator_has_prescribed_jet() {
        let th = renormforge_core::contfrac::RotationNumber::golden(60);
        let nu = quadratic_commutator(&th, C::new(0.0, 1e-4), 6.0, 24);
        let j = nu.commutator(0.6, &Settings::default()).unwrap().jets;
        assert!((j[2] - C::new(0.0, 1e-4)).norm() < 1e-16);
    }

    #[test]
    fn perturbation_respects_envelope() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = AnalyticFn1::zero(disk(1.0), 10);
        let g = perturb_fn(&mut rng, &f, 1.0, 0.5, 2);
        for (k, v) in g.coeffs().iter().enumerate() {
            let bound = if k < 2 { 0.0 } else { 0.5f64.powi(k as i32) * 2f64.sqrt() };
            assert!(v.norm() <= bound);
        }
    }
}
