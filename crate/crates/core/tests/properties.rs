//! Randomized properties of the projections, the two-dimensional
//! renormalization and the spectral layer.

use nalgebra::DMatrix;
use proptest::prelude::*;
use renormforge_core::contfrac::RotationNumber;
use renormforge_core::project::{ac_projection, renorm1_slice, renorm2, Pipeline};
use renormforge_core::series::{invert1, AnalyticFn1, DiskDomain};
use renormforge_core::spectral::{fold_family, spectrum, CoeffChart, Differential, FamilyKind};
use renormforge_core::{Pair1, Pair2, Settings, C};

fn c(x: f64) -> C<f64> {
    C::new(x, 0.0)
}

fn disk(r: f64) -> DiskDomain<f64> {
    DiskDomain::centered(r)
}

fn golden() -> RotationNumber {
    RotationNumber::golden(96)
}

/// `(ψ T_{−θ} ψ⁻¹, ψ T₁ ψ⁻¹)` with `ψ(z) = z + ε z²`.
fn conjugated_rotation(eps: f64) -> Pair1 {
    let s = Settings::default();
    let psi = AnalyticFn1::from_poly(disk(9.0), 24, &[c(0.0), c(1.0), c(eps)]);
    let psi_inv = invert1(&psi, c(0.0), 7.0, &s).unwrap().restrict(disk(6.0), 1.0).unwrap();
    let conj = |t: f64| {
        let shifted = psi_inv.add(&AnalyticFn1::constant(disk(6.0), 24, c(t))).unwrap();
        psi.compose(&shifted, 1.05).unwrap().with_cap(12)
    };
    Pair1::new(conj(-golden().value()), conj(1.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn chart_round_trip(delta in 0.0f64..1e-2, re in proptest::collection::vec(-1.0f64..1.0, 180)) {
        let ch = CoeffChart::pair2(8);
        let p = fold_family(0.6, 12, FamilyKind::YOnly, delta).unwrap();
        let v: Vec<C<f64>> = re.iter().enumerate().map(|(k, x)| C::new(*x, 0.1 * k as f64)).collect();
        prop_assert_eq!(ch.flatten2(&ch.unflatten2(&p, &v)), v);
        prop_assert_eq!(ch.flatten2(&ch.unflatten2(&p, &ch.flatten2(&p))), ch.flatten2(&p));
    }

    #[test]
    fn ac_projection_fixes_commuting_pairs(eps in -2e-2f64..2e-2) {
        let p = Pair2::embed(&conjugated_rotation(eps), 6.0, 12).unwrap();
        let (q, t) = ac_projection(&p, &Settings::default()).unwrap();
        prop_assert!(t.max_abs() < 1e-12, "{:?}", t);
        prop_assert!(q.sub(&p).unwrap().norm() < 1e-12);
    }

    #[test]
    fn renorm2_commutes_with_embedding(eps in -1e-2f64..1e-2, n in 2usize..=3) {
        let s = Settings::default();
        let z = conjugated_rotation(eps);
        let (q, _) = renorm2(&Pair2::embed(&z, 6.0, 12).unwrap(), &golden(), n, Pipeline::Rotation, &s).unwrap();
        let (z1, _) = renorm1_slice(&z, &golden(), n, &s).unwrap();
        let e = Pair2::embed(&z1, 6.0, 12).unwrap();
        prop_assert!(q.sub(&e).unwrap().norm() < 1e-9, "{}", q.sub(&e).unwrap().norm());
        prop_assert!(q.dist_to_slice().unwrap() < 1e-10);
    }

    #[test]
    fn renorm2_is_scale_invariant(eps in -1e-2f64..1e-2, m in 1.0f64..1.4, arg in -0.5f64..0.5) {
        let st = Settings::default();
        let p = Pair2::embed(&conjugated_rotation(eps), 6.0, 12).unwrap();
        let (q, _) = renorm2(&p, &golden(), 2, Pipeline::Rotation, &st).unwrap();
        let ps = p.rescale(C::from_polar(m, arg)).unwrap();
        let (qs, _) = renorm2(&ps, &golden(), 2, Pipeline::Rotation, &st).unwrap();
        let back = q.restrict(*qs.a.domain(), *qs.b.domain(), 1.0).unwrap();
        prop_assert!(qs.sub(&back).unwrap().norm() < 1e-9);
    }

    #[test]
    fn spectrum_moduli_are_sorted(seed in proptest::collection::vec(-1.0f64..1.0, 32)) {
        let ch = CoeffChart::pair1(1);
        let m = DMatrix::from_fn(4, 4, |i, j| C::new(seed[4 * i + j], seed[16 + 4 * i + j]));
        let d = Differential { column_error: vec![0.0; 4], matrix: m.clone(), step: 0.0 };
        let s = spectrum(&d, &ch, 1e-9, 1e-6, 1e-6);
        prop_assert!(s.eigen.windows(2).all(|w| w[0].modulus >= w[1].modulus));
        // the eigenvalues sum to the trace
        let sum: C<f64> = s.values().iter().sum();
        prop_assert!((sum - m.trace()).norm() < 1e-10);
    }
}
