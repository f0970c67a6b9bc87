use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::{Settings, C};

type F = AnalyticFn1<f64>;

fn c(re: f64, im: f64) -> C<f64> {
    C::new(re, im)
}

fn r(x: f64) -> C<f64> {
    C::new(x, 0.0)
}

fn unit() -> DiskDomain<f64> {
    DiskDomain::centered(1.0)
}

fn random_fn(rng: &mut ChaCha8Rng, dom: DiskDomain<f64>, cap: usize, deg: usize, size: f64) -> F {
    let mut f = F::zero(dom, cap);
    for k in 0..=deg.min(cap) {
        let env = size * 0.5f64.powi(k as i32);
        f.coeffs_mut()[k] = c(rng.gen_range(-env..env), rng.gen_range(-env..env));
    }
    f
}

fn max_coeff_diff(a: &F, b: &F) -> f64 {
    a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn compose_square_after_shift() {
    let f = F::from_poly(unit(), 4, &[r(0.0), r(0.0), r(1.0)]);
    let g = F::translation(unit(), 4, r(1.0));
    let h = f.compose(&g, f64::INFINITY).unwrap();
    let want = F::from_poly(unit(), 4, &[r(1.0), r(2.0), r(1.0)]);
    assert!(max_coeff_diff(&h, &want) < 1e-15);
}

#[test]
fn translations_add() {
    let d = DiskDomain::centered(3.0);
    let f = F::translation(d, 6, r(0.5));
    let h = f.compose(&F::translation(DiskDomain::centered(2.0), 6, r(0.5)), 1.05).unwrap();
    assert!((h.eval(r(0.3)) - r(1.3)).norm() < 1e-15);
    assert!(max_coeff_diff(&h, &F::translation(DiskDomain::centered(2.0), 6, r(1.0))) < 1e-15);
}

#[test]
fn geometric_sum_after_doubling() {
    // symbolic oracle: Σ_{k≤4} (2z)^k = Σ 2^k z^k
    let d = DiskDomain::centered(0.25);
    let f = F::from_poly(DiskDomain::centered(1.0), 4, &[r(1.0); 5]);
    let g = F::affine(d, 4, r(2.0), r(0.0));
    let h = f.compose(&g, 1.05).unwrap();
    for k in 0..=4 {
        assert!((h.taylor(k) - r(2f64.powi(k as i32))).norm() < 1e-12, "k={k}");
    }
}

#[test]
fn range_escape_is_reported() {
    let f = F::identity(unit(), 4);
    let g = F::translation(unit(), 4, r(0.5));
    assert!(matches!(f.compose(&g, 1.05), Err(crate::Error::RangeEscape { .. })));
}

#[test]
fn invert_linear() {
    let s = Settings::default();
    let f = F::affine(DiskDomain::centered(2.0), 8, r(2.0), r(0.0));
    let g = invert1(&f, r(0.0), 1.0, &s).unwrap();
    assert!((g.eval(r(0.4)) - r(0.2)).norm() < 1e-15);
    assert!((g.taylor(1) - r(0.5)).norm() < 1e-15);
}

/// Lagrange inversion: the inverse of z + z² has coefficients
/// (-1)^{n-1} C_{n-1} (Catalan numbers).
#[test]
fn invert_matches_lagrange() {
    let s = Settings::default();
    let f = F::from_poly(DiskDomain::centered(0.3), 16, &[r(0.0), r(1.0), r(1.0)]);
    let g = invert1(&f, r(0.0), 0.05, &s).unwrap();
    let mut catalan = vec![1.0f64];
    for n in 1..10 {
        let prev = catalan[n - 1];
        catalan.push(prev * 2.0 * (2.0 * n as f64 - 1.0) / (n as f64 + 1.0));
    }
    for n in 1..10 {
        let want = if n % 2 == 1 { catalan[n - 1] } else { -catalan[n - 1] };
        assert!((g.taylor(n) - r(want)).norm() < 1e-9 * want.abs().max(1.0), "n={n}: {} vs {want}", g.taylor(n));
    }
    let round = f.compose(&g, 1.05).unwrap();
    let id = F::identity(*g.domain(), 16);
    assert!(round.sub(&id).unwrap().majorant() < 1e-12);
}

#[test]
fn critical_base_rejected() {
    let s = Settings::default();
    let f = F::from_poly(unit(), 6, &[r(0.0), r(0.0), r(1.0)]);
    assert!(matches!(invert1(&f, r(0.0), 0.1, &s), Err(crate::Error::CriticalAtBase { .. })));
}

#[test]
fn majorant_examples() {
    let f = F::from_poly(unit(), 3, &[r(1.0), r(0.5)]);
    assert!((f.majorant() - 1.5).abs() < 1e-15);
    let g = F::identity(DiskDomain::centered(2.0), 3);
    assert!((g.majorant() - 2.0).abs() < 1e-15);
}

#[test]
fn majorant_dominates_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let d = DiskDomain::new(c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), rng.gen_range(0.1..3.0)).unwrap();
        let f = random_fn(&mut rng, d, 8, 6, 2.0);
        assert!(f.majorant() >= f.sampled_sup(1000) - 1e-12);
    }
}

#[test]
fn conjugation_examples() {
    let d = DiskDomain::centered(4.0);
    let f = F::translation(d, 5, r(1.0));
    let g = f.conjugate_linear(r(2.0)).unwrap();
    assert!((g.eval(r(0.3)) - r(0.8)).norm() < 1e-15);
    assert!((g.domain().radius - 2.0).abs() < 1e-15);
    assert!(matches!(f.conjugate_linear(r(0.0)), Err(crate::Error::ZeroScale { .. })));
}

#[test]
fn restrict_preserves_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = random_fn(&mut rng, DiskDomain::centered(2.0), 10, 10, 1.0);
    let small = DiskDomain::new(c(0.3, -0.2), 0.9).unwrap();
    let g = f.restrict(small, 1.05).unwrap();
    for z in [c(0.3, -0.2), c(0.8, 0.1), c(-0.4, -0.5)] {
        assert!((g.eval(z) - f.eval(z)).norm() < 1e-13);
    }
}

#[test]
fn serde_round_trip_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = random_fn(&mut rng, DiskDomain::new(c(0.1, 0.2), 1.7).unwrap(), 7, 7, 1.0);
    let text = serde_json::to_string(&f).unwrap();
    let back: F = serde_json::from_str(&text).unwrap();
    assert_eq!(f, back);
    let dom = PolyDiskDomain::centered(2.0, 1.5);
    let m = AnalyticMap2::new(
        Series2::from_poly(dom, 5, &[(1, 0, c(1.0, 0.3)), (2, 1, r(0.25)), (0, 3, c(0.0, -0.5))]),
        Series2::coord_y(dom, 5),
    )
    .unwrap();
    let text = serde_json::to_string(&m).unwrap();
    let back: AnalyticMap2<f64> = serde_json::from_str(&text).unwrap();
    assert_eq!(m, back);
}

#[test]
fn pair_norm_examples() {
    let dom = PolyDiskDomain::centered(1.0, 1.0);
    let k = |v: f64| AnalyticMap2::new(Series2::constant(dom, 4, r(v)), Series2::constant(dom, 4, r(v))).unwrap();
    assert!((pair_norm(&k(2.0), &k(4.0)) - 3.0).abs() < 1e-15);
    assert_eq!(pair_norm(&k(0.0), &k(0.0)), 0.0);
    let x = Series2::coord_x(dom, 4);
    let f1 = AnalyticMap2::new(x.clone(), x).unwrap();
    assert!((pair_norm(&f1, &k(0.0)) - 0.5).abs() < 1e-15);
    assert!((0.5 * f1.sampled_sup(64) - 0.5).abs() < 1e-12);
}

#[test]
fn bivariate_compose_matches_pointwise() {
    let dom = PolyDiskDomain::centered(1.0, 1.0);
    let f = AnalyticMap2::new(
        Series2::from_poly(dom, 8, &[(0, 0, r(0.1)), (1, 0, r(0.5)), (1, 1, r(0.2)), (0, 2, c(0.0, 0.1))]),
        Series2::from_poly(dom, 8, &[(2, 0, r(0.3)), (0, 1, r(0.4))]),
    )
    .unwrap();
    let h = f.compose(&f, 1.05).unwrap();
    for (x, y) in [(c(0.2, 0.1), c(-0.3, 0.0)), (c(-0.5, 0.2), c(0.1, 0.4))] {
        let (u, v) = f.eval(x, y);
        let want = f.eval(u, v);
        let got = h.eval(x, y);
        assert!((got.0 - want.0).norm() < 1e-14 && (got.1 - want.1).norm() < 1e-14);
    }
}

#[test]
fn bivariate_conjugation_keeps_linear_part() {
    let dom = PolyDiskDomain::centered(2.0, 2.0);
    let f = AnalyticMap2::new(
        Series2::from_poly(dom, 4, &[(1, 0, r(0.7)), (0, 1, r(-0.2))]),
        Series2::from_poly(dom, 4, &[(1, 0, r(1.0))]),
    )
    .unwrap();
    let g = f.conjugate_linear(c(0.5, 0.5)).unwrap();
    let (a, _) = g.eval(r(0.1), r(0.0));
    assert!((a - r(0.07)).norm() < 1e-15);
    let back = g.conjugate_linear(C::new(1.0, 0.0) / c(0.5, 0.5)).unwrap();
    assert!(back.sub(&f).unwrap().majorant() < 1e-12);
}

#[test]
fn partial_inverse_round_trip() {
    let s = Settings::default();
    let dom = PolyDiskDomain::centered(3.0, 3.0);
    let a = Series2::from_poly(dom, 10, &[(0, 0, r(-0.6)), (1, 0, r(1.0)), (2, 0, r(0.05)), (1, 1, r(0.02)), (0, 1, r(0.03))]);
    let out = PolyDiskDomain::centered(0.5, 0.5);
    let p = partial_inverse_x(&a, (r(0.6), r(0.0)), out, &s).unwrap();
    for (x, y) in [(c(0.1, 0.0), c(0.2, -0.1)), (c(-0.3, 0.2), c(0.0, 0.3))] {
        let v = a.eval(p.eval(x, y), y);
        assert!((v - x).norm() < 1e-11);
    }
}

#[test]
fn f32_arithmetic_works() {
    let d = DiskDomain::<f32>::centered(1.0);
    let f = AnalyticFn1::<f32>::from_poly(d, 6, &[C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.25, 0.0)]);
    let g = AnalyticFn1::<f32>::affine(DiskDomain::centered(0.5), 6, C::new(0.5, 0.0), C::new(0.0, 0.0));
    let h = f.compose(&g, 1.05).unwrap();
    assert!((h.eval(C::new(0.2, 0.0)) - C::new(0.1025, 0.0)).norm() < 1e-6);
}

fn small_fn(seed: u64, dom: DiskDomain<f64>, cap: usize, deg: usize, size: f64) -> F {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_fn(&mut rng, dom, cap, deg, size)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn composition_is_associative(s1 in 0u64..10_000, s2 in 0u64..10_000, s3 in 0u64..10_000) {
        let d = unit();
        // total degree 3·2·2 stays within the cap, so truncation is exact
        let f = small_fn(s1, d, 12, 3, 0.3);
        let g = small_fn(s2, d, 12, 2, 0.3);
        let h = small_fn(s3, d, 12, 2, 0.3);
        let lhs = f.compose(&g, 1.05).unwrap().compose(&h, 1.05).unwrap();
        let rhs = f.compose(&g.compose(&h, 1.05).unwrap(), 1.05).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().majorant() < 1e-10);
    }

    #[test]
    fn majorant_bounds_every_sample(seed in 0u64..10_000, t in 0.0f64..1.0, rho in 0.0f64..1.0) {
        let f = small_fn(seed, DiskDomain::centered(1.5), 10, 10, 2.0);
        let z = C::from_polar(1.5 * rho, std::f64::consts::TAU * t);
        prop_assert!(f.majorant() + 1e-12 >= f.eval(z).norm());
    }

    #[test]
    fn conjugacy_round_trip(seed in 0u64..10_000, re in 0.2f64..3.0, im in -1.0f64..1.0) {
        let f = small_fn(seed, DiskDomain::centered(2.0), 10, 10, 1.0);
        let s = C::new(re, im);
        let back = f.conjugate_linear(s).unwrap().conjugate_linear(C::new(1.0, 0.0) / s).unwrap();
        prop_assert!(back.sub(&f).unwrap().majorant() < 1e-12 * f.majorant().max(1.0));
    }

    #[test]
    fn inverse_round_trip(seed in 0u64..10_000) {
        let s = Settings::default();
        let mut f = small_fn(seed, unit(), 16, 5, 0.1);
        f.coeffs_mut()[1] = C::new(1.0, 0.0);
        let g = invert1(&f, C::new(0.0, 0.0), 0.3, &s).unwrap();
        let id = F::identity(*g.domain(), 16);
        prop_assert!(f.compose(&g, 1.05).unwrap().sub(&id).unwrap().majorant() < 1e-12);
    }

    #[test]
    fn truncation_is_consistent(s1 in 0u64..10_000, s2 in 0u64..10_000) {
        let d = unit();
        let f = small_fn(s1, d, 5, 5, 0.4);
        let g = small_fn(s2, d, 5, 5, 0.4);
        let low = f.compose(&g, 1.05).unwrap();
        let high = f.with_cap(10).compose(&g.with_cap(10), 1.05).unwrap().with_cap(5);
        prop_assert!(max_coeff_diff(&low, &high) < 1e-14);
    }

    #[test]
    fn pair_norm_is_a_norm(s1 in 0u64..10_000, s2 in 0u64..10_000, k in -3.0f64..3.0) {
        let dom = PolyDiskDomain::centered(1.0, 1.0);
        let mk = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut terms = Vec::new();
            for i in 0..4 { for j in 0..(4 - i) {
                terms.push((i, j, C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
            } }
            let a = Series2::from_poly(dom, 6, &terms);
            let b = Series2::from_poly(dom, 6, &terms[2..]);
            AnalyticMap2::new(a, b).unwrap()
        };
        let (a1, b1, a2, b2) = (mk(s1), mk(s1 + 1), mk(s2), mk(s2 + 1));
        let sum = pair_norm(&a1.add(&a2).unwrap(), &b1.add(&b2).unwrap());
        prop_assert!(sum <= pair_norm(&a1, &b1) + pair_norm(&a2, &b2) + 1e-12);
        let sc = pair_norm(&a1.scale(C::new(k, 0.0)), &b1.scale(C::new(k, 0.0)));
        prop_assert!((sc - k.abs() * pair_norm(&a1, &b1)).abs() < 1e-12);
    }
}
