//! The acceptance criteria, each runnable on its own and collected by
//! `selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use renormforge_core::contfrac::{brjuno_partials, gauss, hat_index, multi_indices, Letter, MultiIndex, RotationNumber};
use renormforge_core::pair1d::{commutator_decay, renorm1, NormalizedPair1};
use renormforge_core::settings::Convention;
use renormforge_core::pair2d::ClassParams;
use renormforge_core::project::{ac_projection, commutation_projection, critical_projection, microscope, renorm2, Pipeline};
use renormforge_core::series::{invert1, AnalyticFn1, AnalyticMap2, DiskDomain, PolyDiskDomain, Series2};
use renormforge_core::spectral::{
    contraction_sweep, differential, fold_family, match_spectra, spectrum, CoeffChart, Renorm1Operator, Renorm2Operator, SpectrumReport,
};
use renormforge_core::{Error, Pair1, Pair2, Settings, C};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::constructions::{conjugated_rotation, henon_pair, isometry_pair, perturb_fn, quadratic_commutator, random_henon_params};
use crate::report::{Check, RunReport, Table, Trace};

type Res<T> = renormforge_core::Result<T>;

fn c(x: f64) -> C<f64> {
    C::new(x, 0.0)
}

fn zero() -> C<f64> {
    c(0.0)
}

/// Runs `f`; a stage error becomes a failing check named `name`.
fn guard(rep: &mut RunReport, name: &str, f: impl FnOnce(&mut RunReport) -> Res<()>) {
    if let Err(e) = f(rep) {
        rep.check(Check::failed(name, e));
    }
}

/// Embedded rotation `ι(T_{−θ}, T₁)` at the bivariate cap.
pub fn embedded_rotation(cfg: &ExperimentConfig, theta: f64) -> Res<Pair2> {
    let d = &cfg.domains;
    Pair2::embed(&Pair1::rotation(theta, d.z_radius, d.cap2), d.y_radius, d.cap2)
}

/// Derivative of `Gⁿ` at `θ` by a central difference.
pub fn gauss_power_derivative(theta: f64, n: usize) -> Res<f64> {
    let g = |mut t: f64| -> Res<f64> {
        for _ in 0..n {
            t = gauss(t, 1)?;
        }
        Ok(t)
    };
    let h = 1e-7;
    Ok((g(theta + h)? - g(theta - h)?) / (2.0 * h))
}

/// 1. `‖ℛ ι − ι‖` at the rotation, univariate and bivariate.
pub fn fixed_point(cfg: &ExperimentConfig, rep: &mut RunReport) {
    let tol = cfg.tolerances.fixed_point;
    guard(rep, "1a fixed point (1D)", |rep| {
        let th = cfg.rotation()?;
        let nu = NormalizedPair1::rotation(&th, cfg.domains.z_radius, cfg.domains.cap1);
        let out = renorm1(&nu, &cfg.settings())?;
        let next = out.rotation.as_ref().map(|r| r.value()).unwrap_or(th.value());
        let want = AnalyticFn1::translation(*out.beta.domain(), cfg.domains.cap1, c(next));
        let res = out.beta.sub(&want)?.majorant();
        rep.check(Check::below("1a fixed point (1D)", res, tol, format!("renorm1 of T_θ against T_(Gθ), cap {}", cfg.domains.cap1)));
        Ok(())
    });
    guard(rep, "1b fixed point (2D)", |rep| {
        let th = cfg.rotation()?;
        let n = cfg.run.n;
        let p = embedded_rotation(cfg, th.value())?;
        let (q, trace) = renorm2(&p, &th, n, Pipeline::Rotation, &cfg.settings())?;
        let want = embedded_rotation(cfg, th.shift(n)?.value())?;
        let res = q.sub(&want)?.norm();
        rep.traces.push(Trace::new("1b renorm2", &trace));
        rep.check(Check::below("1b fixed point (2D)", res, tol, format!("rotation pipeline, n = {n}, cap {}", cfg.domains.cap2)));
        Ok(())
    });
}

fn eigen_table(name: &str, s: &SpectrumReport, inputs: &impl Serialize) -> Table {
    let mut t = Table::new(name, &["index", "re", "im", "modulus", "normal"]);
    for (k, e) in s.eigen.iter().enumerate() {
        t.push("spectrum", &(inputs, k), &[k as f64, e.value[0], e.value[1], e.modulus, e.normal.unwrap_or(f64::NAN)]);
    }
    t
}

/// 2 and 3: leading eigenvalues against the Gauss map, and the 2D spectrum
/// against the slice spectrum.
pub fn spectral(cfg: &ExperimentConfig, rep: &mut RunReport) {
    let sp = cfg.spectrum.clone();
    let chart1 = CoeffChart::pair1(sp.chart_degree);
    let chart2 = CoeffChart::pair2(sp.chart_degree);
    guard(rep, "2a leading eigenvalue (1D, n=1)", |rep| {
        let th = cfg.rotation()?;
        let op = Renorm1Operator { theta: th.clone(), n: 1, settings: cfg.settings(), chart: chart1.clone() };
        let z = Pair1::rotation(th.value(), cfg.domains.z_radius, cfg.domains.cap2);
        let s = spectrum(&differential(&op, &z, sp.step)?, &chart1, sp.decay_floor, sp.normal_tol, sp.decay_floor);
        let oracle = gauss_power_derivative(th.value(), 1)?;
        let l = s.leading().ok_or_else(|| Error::InvalidInput("empty spectrum".into()))?;
        let rel = (l - c(oracle)).norm() / oracle.abs();
        rep.check(Check::below("2a leading eigenvalue (1D, n=1)", rel, sp.leading_rel_tol, format!("relative error; λ = {:.9}, G'(θ) = {oracle:.9}", l.re)));
        Ok(())
    });
    guard(rep, "3 spectrum structure", |rep| {
        let th = cfg.rotation()?;
        let n = cfg.run.n;
        let inputs = (&cfg.theta, n, &cfg.spectrum, &cfg.domains);
        let op2 = Renorm2Operator { theta: th.clone(), n, pipeline: Pipeline::Rotation, settings: cfg.settings(), chart: chart2.clone() };
        let p = embedded_rotation(cfg, th.value())?;
        let d2 = differential(&op2, &p, sp.step)?;
        let op1 = Renorm1Operator { theta: th.clone(), n, settings: cfg.settings(), chart: chart1.clone() };
        let z = Pair1::rotation(th.value(), cfg.domains.z_radius, cfg.domains.cap2);
        let d1 = differential(&op1, &z, sp.step)?;
        let sn = spectrum(&d2, &chart2, sp.decay_floor, sp.normal_tol, sp.decay_floor);
        let sm = spectrum(&d1, &chart1, sp.decay_floor, sp.normal_tol, sp.decay_floor);
        rep.tables.push(eigen_table("eigen_2d", &sn, &("2d", &inputs)));
        rep.tables.push(eigen_table("eigen_1d", &sm, &("1d", &inputs)));
        let v = match_spectra(&sn, &sm, sp.match_tol);
        let mut t = Table::new("matched", &["ref_re", "ref_im", "found_re", "found_im", "distance", "normal"]);
        for m in &v.matched {
            t.push("match_spectra", &(&inputs, m.reference), &[m.reference[0], m.reference[1], m.found[0], m.found[1], m.distance, m.normal.unwrap_or(f64::NAN)]);
        }
        for u in &v.unmatched_reference {
            t.push_error("match_spectra", &(&inputs, u), &[u[0], u[1]], "no partner in the 2D spectrum".into());
        }
        rep.tables.push(t);
        rep.traces.push(Trace::new(
            "3 differentials",
            &serde_json::json!({
                "column_error_2d": d2.max_column_error(),
                "column_error_1d": d1.max_column_error(),
                "decay_index_2d": sn.decay_index,
            }),
        ));

        let oracle = gauss_power_derivative(th.value(), n)?;
        let l = sn.leading().ok_or_else(|| Error::InvalidInput("empty spectrum".into()))?;
        let rel = (l - c(oracle)).norm() / oracle.abs();
        rep.check(Check::below(
            &format!("2b leading eigenvalue (2D, n={n})"),
            rel,
            sp.leading_rel_tol,
            format!("relative error; λ = {:.9}, (Gⁿ)'(θ) = {oracle:.9}", l.re),
        ));
        let worst = v.matched.iter().map(|m| m.distance).fold(0.0, f64::max);
        let mut matched = Check::below("3 eigenvalues matched", worst, sp.match_tol, format!("{} matched, {} unmatched 1D values", v.matched.len(), v.unmatched_reference.len()));
        matched.pass &= v.unmatched_reference.is_empty();
        rep.check(matched);
        rep.check(Check::below("3 unmatched moduli", v.unmatched_max, sp.match_tol, "largest unmatched 2D modulus"));
        rep.check(Check::below("3 normal components", v.max_normal, sp.normal_tol, "largest normal fraction of matched eigenvectors"));
        Ok(())
    });
}

/// 4. Quadratic contraction of `Π₂Π₁p𝓡ⁿ` on the fold family.
pub fn contraction(cfg: &ExperimentConfig, rep: &mut RunReport) {
    guard(rep, "4 contraction", |rep| {
        let th = cfg.rotation()?;
        let sw = cfg.sweep.clone();
        let cap = cfg.domains.cap2;
        let theta = th.value();
        let center = fold_family(theta, cap, sw.family, 0.0)?.diagonal_pair();
        let class = ClassParams {
            delta: sw.class_delta,
            q_radius: sw.q_radius,
            derivative_floor: cfg.tolerances.derivative_floor,
            center,
            center_radius: sw.class_radius,
        };
        let fam = move |d: f64| fold_family(theta, cap, sw.family, d);
        let out = contraction_sweep(&fam, &cfg.sweep.deltas, &th, cfg.sweep.n, &cfg.sweep_settings(), Some(&class));
        let slope = out.summary_value("slope").unwrap_or(f64::NAN);
        let zero = out.summary_value("zero_dist").unwrap_or(f64::NAN);
        rep.traces.push(Trace::new("4 summary", &out.summary));
        rep.tables.push(Table::from_sweep(&out, "contraction_sweep", &(&cfg.theta, &cfg.sweep)));
        rep.check(Check::within("4 log-log slope", slope, cfg.sweep.slope_target, cfg.sweep.slope_tol, format!("{:?} family, n = {}", cfg.sweep.family, cfg.sweep.n)));
        rep.check(Check::below("4 zero row", zero, cfg.sweep.zero_tol, "dist_to_slice at δ = 0"));
        Ok(())
    });
}

/// 5. Projections fix exactly commuting inputs.
pub fn projections(cfg: &ExperimentConfig, rep: &mut RunReport) {
    guard(rep, "5 projection identities", |rep| {
        let s = cfg.settings();
        let th = cfg.rotation()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed ^ 0x5);
        let mut t = Table::new("projections", &["sample", "kappa", "s", "eps", "c2", "commutation", "conjugacy_eps", "ac"]);
        let (mut c2max, mut tmax, mut acmax) = (0.0f64, 0.0f64, 0.0f64);
        let mut failures = 0;
        for k in 0..cfg.run.samples {
            let (kappa, sc, eps) = random_henon_params(&mut rng);
            let ce: f64 = rng.gen_range(-1e-2..=1e-2);
            let inputs = (cfg.run.seed, k, kappa, sc, eps, ce);
            let run = || -> Res<(f64, f64, f64)> {
                let p = henon_pair(kappa, sc, eps, cfg.domains.cap2)?;
                let (tl, shift) = critical_projection(&p, &s)?;
                let ell = tl.b.f1().eval(zero(), zero());
                let (_, tuple) = commutation_projection(&tl.rescale(ell)?, &s)?;
                let z = conjugated_rotation(th.value(), ce, cfg.domains.cap2)?;
                let (_, triple) = ac_projection(&Pair2::embed(&z, cfg.domains.y_radius, cfg.domains.cap2)?, &s)?;
                Ok((shift.c2.norm(), tuple.max_abs(), triple.max_abs()))
            };
            match run() {
                Ok((a, b, d)) => {
                    c2max = c2max.max(a);
                    tmax = tmax.max(b);
                    acmax = acmax.max(d);
                    t.push("projections", &inputs, &[k as f64, kappa, sc, eps, a, b, ce, d]);
                }
                Err(e) => {
                    failures += 1;
                    t.push_error("projections", &inputs, &[k as f64, kappa, sc, eps], e.to_string());
                }
            }
        }
        rep.tables.push(t);
        let tol = cfg.tolerances.identity;
        let note = |what: &str| format!("max over {} samples{what}", cfg.run.samples);
        let mut checks = [
            Check::below("5 |c2| (T2 = Id)", c2max, tol, note(", Hénon pairs (H, H∘H)")),
            Check::below("5 commutation tuple (Π2 = Id)", tmax, tol, note(", Hénon pairs")),
            Check::below("5 ac triple", acmax, tol, note(", embedded conjugated rotations")),
        ];
        for ch in &mut checks {
            if failures > 0 {
                ch.pass = false;
                ch.detail.push_str(&format!("; {failures} samples failed"));
            }
        }
        for ch in checks {
            rep.check(ch);
        }
        Ok(())
    });
}

/// 6. Commutator decay and factorization of the renormalized commutator.
pub fn commutator(cfg: &ExperimentConfig, rep: &mut RunReport) {
    guard(rep, "6 commutator decay", |rep| {
        let cm = cfg.commutator.clone();
        let th = cfg.rotation()?;
        let s = cfg.settings();
        let mirrored = Settings { convention: Convention::Mirrored, ..s.clone() };
        let (radius, cap) = (cfg.domains.z_radius, cfg.domains.cap1);
        // both the commutator norm and the distance are linear in |k|
        let unit = quadratic_commutator(&th, c(1.0), radius, cap);
        let n1 = unit.commutator(cm.delta, &s)?.norm;
        let d1 = unit.beta.sub(&AnalyticFn1::translation(*unit.beta.domain(), cap, c(th.value())))?.majorant();
        let lo = 1.5 * cm.min_norm / n1;
        let hi = (cm.max_norm / n1).min(cm.max_distance / d1) / 1.5;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed ^ 0x6);
        let mut t = Table::new("commutator", &["modulus", "phase", "norm", "distance", "ratio", "factor_residual"]);
        let (mut worst_ratio, mut worst_res, mut worst_dist) = (0.0f64, 0.0f64, 0.0f64);
        let (mut norm_lo, mut norm_hi) = (f64::INFINITY, 0.0f64);
        let mut failures = 0;
        for k in 0..5 {
            let m = (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / 4.0).exp();
            let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let nu = quadratic_commutator(&th, C::from_polar(m, phase), radius, cap);
            let inputs = (&cfg.theta, &cm, m, phase);
            let run = || -> Res<[f64; 4]> {
                let norm = nu.commutator(cm.delta, &s)?.norm;
                let dist = nu.beta.sub(&AnalyticFn1::translation(*nu.beta.domain(), cap, c(th.value())))?.majorant();
                let ratio = commutator_decay(&nu, cm.ell, cm.delta, &s)?.summary_value("tau_hat").unwrap_or(f64::NAN);
                let res = Pair1::mirrored_of(&nu).commutator_factor(&th, cm.ell, &mirrored)?.residual;
                Ok([norm, dist, ratio, res])
            };
            match run() {
                Ok([norm, dist, ratio, res]) => {
                    norm_lo = norm_lo.min(norm);
                    norm_hi = norm_hi.max(norm);
                    worst_dist = worst_dist.max(dist);
                    worst_ratio = worst_ratio.max(ratio);
                    worst_res = worst_res.max(res);
                    t.push("commutator_decay", &inputs, &[m, phase, norm, dist, ratio, res]);
                }
                Err(e) => {
                    failures += 1;
                    t.push_error("commutator_decay", &inputs, &[m, phase], e.to_string());
                }
            }
        }
        rep.tables.push(t);
        let mut range = Check::flag(
            "6 commutator norms in range",
            norm_lo >= cm.min_norm && norm_hi <= cm.max_norm,
            format!("[{norm_lo:.3e}, {norm_hi:.3e}] within [{:e}, {:e}]", cm.min_norm, cm.max_norm),
        );
        range.pass &= failures == 0;
        rep.check(range);
        rep.check(Check::below("6 distance to rotation", worst_dist, cm.max_distance, "largest over the samples"));
        rep.check(Check::below("6 decay ratio", worst_ratio, 1.0, format!("largest ‖[R^ℓ ν]‖/‖[ν]‖ at ℓ = {}", cm.ell)));
        rep.check(Check::below("6 factorization residual", worst_res, cm.factor_tol, format!("largest over the samples at ℓ = {}", cm.ell)));
        Ok(())
    });
}

/// Letter-by-letter value of a word `(a₁, b₁, …)` in application order.
fn eval_entries(entries: &[u64], eta: &impl Fn(C<f64>) -> C<f64>, xi: &impl Fn(C<f64>) -> C<f64>, mut z: C<f64>) -> C<f64> {
    for pair in entries.chunks(2) {
        for _ in 0..pair[0] {
            z = eta(z);
        }
        for _ in 0..pair[1] {
            z = xi(z);
        }
    }
    z
}

/// 7. Structure of the multi-indices of random bounded-type numbers.
pub fn multi_index(cfg: &ExperimentConfig, rep: &mut RunReport) {
    guard(rep, "7 multi-index structure", |rep| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed ^ 0x7);
        let bound = 5u64;
        let pair = isometry_pair(0.7, -1.3, 1e-4, 1e3)?;
        let (eta_s, xi_s) = (pair.eta.clone(), pair.xi.clone());
        let eta = move |z: C<f64>| eta_s.eval(z);
        let xi = move |z: C<f64>| xi_s.eval(z);
        let mut t = Table::new("multi_index", &["sample", "n", "blocks", "eta_letters", "xi_letters", "q_n", "identity_error"]);
        let (mut structure, mut inherit, mut counts) = (true, true, true);
        let mut worst = 0.0f64;
        for k in 0..10 {
            let quotients: Vec<u64> = (0..16).map(|_| rng.gen_range(1..=bound)).collect();
            let th = RotationNumber::new(quotients.clone(), Some(bound))?;
            // q₋₁ = 0, q₀ = 1, q_{j+1} = a_{j+1} q_j + q_{j−1}
            let mut q = vec![1u64, quotients[0]];
            let mut p = vec![0u64, 1];
            for j in 1..9 {
                q.push(quotients[j] * q[j] + q[j - 1]);
                p.push(quotients[j] * p[j] + p[j - 1]);
            }
            for n in 2..=8 {
                let (s, tt) = multi_indices(&th, n)?;
                let e = s.entries();
                let m = e.len() / 2;
                let (am, bm) = (e[2 * m - 2], e[2 * m - 1]);
                let ok = bm == 0 && (am >= 2 || (am == 1 && m >= 2 && e[2 * m - 3] == 1));
                structure &= ok;
                let ends = |w: &MultiIndex| {
                    let e = w.entries();
                    let m = e.len() / 2;
                    m >= 2 && e[2 * m - 1] == 0 && e[2 * m - 2] == 1 && e[2 * m - 3] == 1
                };
                if ends(&s) {
                    inherit &= ends(&tt);
                }
                let letters = s.letters();
                let ne = letters.iter().filter(|l| **l == Letter::Eta).count() as u64;
                let nx = letters.len() as u64 - ne;
                let tl = tt.letters();
                let te = tl.iter().filter(|l| **l == Letter::Eta).count() as u64;
                counts &= (ne, nx) == (q[n], p[n]) && (te, tl.len() as u64 - te) == (q[n - 1], p[n - 1]);
                let (hat, sel) = hat_index(&s)?;
                let mut err = 0.0f64;
                for j in 0..4 {
                    let z0 = C::from_polar(0.5, 1.1 * j as f64);
                    let direct = eval_entries(e, &eta, &xi, z0);
                    let mut via = eval_entries(hat.entries(), &eta, &xi, z0);
                    for l in sel.letters() {
                        via = if l == Letter::Eta { eta(via) } else { xi(via) };
                    }
                    err = err.max((direct - via).norm());
                }
                worst = worst.max(err);
                t.push("multi_indices", &(&quotients, n), &[k as f64, n as f64, m as f64, ne as f64, nx as f64, q[n] as f64, err]);
            }
        }
        rep.tables.push(t);
        rep.check(Check::flag("7 b_m = 0 and trailing dichotomy", structure, "10 random θ with quotients ≤ 5, 2 ≤ n ≤ 8"));
        rep.check(Check::flag("7 1,1,0 inheritance", inherit, "s̄_n ends 1,1,0 ⇒ t̄_n does"));
        rep.check(Check::below("7 hat identity", worst, 1e-12, "|ζ^s̄(z) − φ₀∘ζ^ŝ(z)| for a pair of plane rotations"));
        rep.check(Check::flag("7 q-recursion letter counts", counts, "(#η, #ξ) of s̄_n = (q_n, p_n), of t̄_n = (q_(n−1), p_(n−1))"));
        Ok(())
    });
}

/// 8a. Brjuno–Yoccoz partial sums.
pub fn brjuno(cfg: &ExperimentConfig, rep: &mut RunReport) {
    guard(rep, "8 Brjuno sum", |rep| {
        let m = cfg.brjuno.m;
        // Y_m needs θ₀, …, θ_m
        let (th, _) = RotationNumber::parse(&cfg.theta.spec, cfg.theta.length.max(m + 1))?;
        let ys = brjuno_partials(&th, m)?;
        let mut t = Table::new("brjuno", &["m", "y"]);
        for (k, y) in ys.iter().enumerate() {
            t.push("brjuno_partials", &(&cfg.theta, k), &[k as f64, *y]);
        }
        rep.tables.push(t);
        let last = *ys.last().unwrap_or(&f64::NAN);
        let golden = RotationNumber::golden(th.len());
        if th == golden {
            let g = golden.value();
            let closed = (1.0 / g).ln() / (1.0 - g);
            rep.check(Check::below("8 golden Y_m", (last - closed).abs(), cfg.brjuno.tol, format!("Y_{m} = {last:.10}, log(1/θ)/(1−θ) = {closed:.10}")));
        } else {
            rep.traces.push(Trace::new("8 brjuno", &serde_json::json!({ "y_last": last, "note": "no closed form off the golden mean" })));
        }
        Ok(())
    });
}

/// 8b. Strip heights of the renormalization microscope.
pub fn microscope_ledger(cfg: &ExperimentConfig, rep: &mut RunReport) {
    guard(rep, "8 microscope", |rep| {
        let th = cfg.rotation()?;
        let mc = cfg.microscope.clone();
        let z = conjugated_rotation(th.value(), mc.perturbation, cfg.domains.cap2)?;
        let beta = z.eta.conjugate_linear(c(-1.0))?;
        let nu = NormalizedPair1::new(beta, Some(th.clone()));
        let led = microscope(&nu, &th, mc.k_max, mc.n, mc.strip, mc.c, &cfg.settings())?;
        let mut t = Table::new("microscope", &["k", "shift", "defect", "y_kn", "height"]);
        for r in &led.rows {
            t.push("microscope", &(&cfg.theta, &mc, r.k), &[r.k as f64, r.shift, r.defect, r.y_kn, r.height]);
        }
        rep.tables.push(t);
        rep.traces.push(Trace::new("8 microscope floor", &serde_json::json!({ "y_infinity": led.y_infinity, "floor": led.floor })));
        let decreasing = led.rows.windows(2).all(|w| w[1].height < w[0].height);
        let above = led.rows.iter().all(|r| r.height >= led.floor);
        let worst = led.rows.iter().map(|r| r.defect).fold(0.0, f64::max);
        rep.check(Check::flag("8 heights strictly decreasing", decreasing, format!("Δ − C − Y_(kn), k ≤ {}", mc.k_max)));
        rep.check(Check::flag("8 heights above floor", above, format!("floor Δ − C − Y_∞ = {:.6}", led.floor)));
        rep.check(Check::below("8 linearizer defects", worst, mc.defect_tol, "largest over the levels"));
        Ok(())
    });
}

fn random_fn(rng: &mut ChaCha8Rng, dom: DiskDomain<f64>, cap: usize, linear: f64, size: f64) -> AnalyticFn1<f64> {
    let f = AnalyticFn1::affine(dom, cap, c(linear), zero());
    let mut g = perturb_fn(rng, &f, size, 0.5, 2);
    g.coeffs_mut()[0] = C::new(rng.gen_range(-size..size), rng.gen_range(-size..size));
    g
}

/// 9. Series algebra: associativity, inverses, majorants, conjugacy.
pub fn series_suite(cfg: &ExperimentConfig, rep: &mut RunReport) {
    guard(rep, "9 series algebra", |rep| {
        let s = cfg.settings();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed ^ 0x9);
        let cap = cfg.domains.cap1;
        let unit = DiskDomain::centered(1.0);
        let (mut assoc, mut inv, mut ratio, mut conj) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for _ in 0..cfg.run.samples {
            let f = random_fn(&mut rng, unit, cap, 0.5, 1e-2);
            let g = random_fn(&mut rng, unit, cap, 0.5, 1e-2);
            let h = random_fn(&mut rng, unit, cap, 0.5, 1e-2);
            let left = f.compose(&g.compose(&h, s.slack)?, s.slack)?;
            let right = f.compose(&g, s.slack)?.compose(&h, s.slack)?;
            assoc = assoc.max(left.sub(&right)?.majorant());

            let k = random_fn(&mut rng, DiskDomain::centered(2.0), cap, 2.0, 1e-2);
            let kinv = invert1(&k, zero(), 1.0, &s)?;
            let id = AnalyticFn1::identity(*kinv.domain(), cap);
            inv = inv.max(k.compose(&kinv, s.slack)?.sub(&id)?.majorant());
            let small = k.restrict(DiskDomain::centered(0.3), s.slack)?;
            inv = inv.max(kinv.compose(&small, s.slack)?.sub(&AnalyticFn1::identity(*small.domain(), cap))?.majorant());

            let dom2 = PolyDiskDomain::centered(1.0, 0.5);
            let mut m2 = Series2::zero(dom2, 12);
            for d in 0..=12usize {
                for i in 0..=d {
                    let env = 0.5f64.powi(d as i32);
                    m2.set_coeff(i, d - i, C::new(rng.gen_range(-env..env), rng.gen_range(-env..env)));
                }
            }
            ratio = ratio.max(f.sampled_sup(256) / f.majorant());
            ratio = ratio.max(m2.sampled_sup(48) / m2.majorant());

            let sc = C::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
            let back = f.conjugate_linear(sc)?.conjugate_linear(sc.inv())?;
            conj = conj.max(back.sub(&f)?.majorant());
            let map = AnalyticMap2::new(m2.clone(), m2.scale(c(0.5)))?;
            let back2 = map.conjugate_linear(sc)?.conjugate_linear(sc.inv())?;
            conj = conj.max(back2.sub(&map)?.majorant());
        }
        let n = cfg.run.samples;
        rep.check(Check::below("9 composition associativity", assoc, 1e-10, format!("{n} random triples, cap {cap}")));
        rep.check(Check::below("9 inverse round trips", inv, 1e-10, "f∘f⁻¹ and f⁻¹∘f against the identity"));
        let mut dom = Check::below("9 majorant dominance", ratio, 1.0 + 1e-12, "largest sampled sup / majorant");
        dom.threshold = "≤ 1".into();
        rep.check(dom);
        rep.check(Check::below("9 conjugacy round trips", conj, 1e-10, "univariate and bivariate, random complex scales"));
        Ok(())
    });
}

/// Every criterion, in order.
pub fn run_all(cfg: &ExperimentConfig, rep: &mut RunReport) {
    fixed_point(cfg, rep);
    spectral(cfg, rep);
    contraction(cfg, rep);
    projections(cfg, rep);
    commutator(cfg, rep);
    multi_index(cfg, rep);
    brjuno(cfg, rep);
    microscope_ledger(cfg, rep);
    series_suite(cfg, rep);
}
