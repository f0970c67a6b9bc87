//! The eight CLI commands.

use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use renormforge_core::pair1d::{renorm1, NormalizedPair1};
use renormforge_core::project::{renorm2, Pipeline};
use renormforge_core::series::AnalyticFn1;
use renormforge_core::spectral::fold_family;
use renormforge_core::{Pair2, C};
use serde::{Deserialize, Serialize};

use crate::acceptance::{self, embedded_rotation};
use crate::config::ExperimentConfig;
use crate::constructions::{perturb_fn, perturb_pair2};
use crate::report::{Check, RunReport, Table, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Renorm1d,
    Renorm2d,
    Spectrum,
    ContractSweep,
    CommutatorSweep,
    Brjuno,
    Microscope,
    Selftest,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Renorm1d,
        Command::Renorm2d,
        Command::Spectrum,
        Command::ContractSweep,
        Command::CommutatorSweep,
        Command::Brjuno,
        Command::Microscope,
        Command::Selftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Renorm1d => "renorm1d",
            Command::Renorm2d => "renorm2d",
            Command::Spectrum => "spectrum",
            Command::ContractSweep => "contract-sweep",
            Command::CommutatorSweep => "commutator-sweep",
            Command::Brjuno => "brjuno",
            Command::Microscope => "microscope",
            Command::Selftest => "selftest",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
            format!("unknown command {s:?}; expected one of {}", names.join(", "))
        })
    }
}

/// Runs `command`; `config` must already be validated.
pub fn run(command: Command, config: &ExperimentConfig) -> RunReport {
    let start = Instant::now();
    let mut rep = RunReport::new(command.name(), config);
    match command {
        Command::Renorm1d => renorm1d(config, &mut rep),
        Command::Renorm2d => renorm2d(config, &mut rep),
        Command::Spectrum => acceptance::spectral(config, &mut rep),
        Command::ContractSweep => acceptance::contraction(config, &mut rep),
        Command::CommutatorSweep => acceptance::commutator(config, &mut rep),
        Command::Brjuno => acceptance::brjuno(config, &mut rep),
        Command::Microscope => acceptance::microscope_ledger(config, &mut rep),
        Command::Selftest => acceptance::run_all(config, &mut rep),
    }
    if config.output.wall_clock {
        rep.wall_clock_s = Some(start.elapsed().as_secs_f64());
    }
    rep
}

fn c(x: f64) -> C<f64> {
    C::new(x, 0.0)
}

/// Iterates `renorm1` from the (optionally perturbed) rotation.
fn renorm1d(cfg: &ExperimentConfig, rep: &mut RunReport) {
    let th = match cfg.rotation() {
        Ok(t) => t,
        Err(e) => return rep.check(Check::failed("renorm1d", e)),
    };
    let d = &cfg.domains;
    let mut nu = NormalizedPair1::rotation(&th, d.z_radius, d.cap1);
    if cfg.run.perturbation > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
        nu.beta = perturb_fn(&mut rng, &nu.beta, cfg.run.perturbation, cfg.run.envelope, 2);
    }
    let s = cfg.settings();
    let mut t = Table::new("renorm1d", &["k", "theta_k", "distance_to_rotation", "commutator_norm", "beta0_re", "beta0_im"]);
    let mut residual = f64::NAN;
    for k in 0..=cfg.run.iterations {
        let inputs = (&cfg.theta, &cfg.run, &cfg.domains, k);
        if k > 0 {
            match renorm1(&nu, &s) {
                Ok(n) => nu = n,
                Err(e) => {
                    t.push_error("renorm1", &inputs, &[k as f64], e.to_string());
                    rep.check(Check::failed("renorm1d iterates", e));
                    break;
                }
            }
        }
        let theta_k = nu.rotation.as_ref().map(|r| r.value()).unwrap_or(f64::NAN);
        let dist = nu.beta.sub(&AnalyticFn1::translation(*nu.beta.domain(), d.cap1, c(theta_k))).map(|x| x.majorant()).unwrap_or(f64::NAN);
        if k > 0 {
            residual = if residual.is_nan() { dist } else { residual.max(dist) };
        }
        let comm = nu.commutator(cfg.commutator.delta, &s).map(|r| r.norm).unwrap_or(f64::NAN);
        let b0 = nu.beta.eval(c(0.0));
        t.push("renorm1", &inputs, &[k as f64, theta_k, dist, comm, b0.re, b0.im]);
    }
    rep.tables.push(t);
    if cfg.run.perturbation == 0.0 && cfg.run.iterations > 0 {
        rep.check(Check::below("renorm1d rotation residual", residual, cfg.tolerances.fixed_point, "‖R^k T_θ − T_(G^k θ)‖, largest over k"));
    }
}

/// Iterates `renorm2` from the embedded rotation (rotation pipeline) or
/// the fold family (critical pipeline).
fn renorm2d(cfg: &ExperimentConfig, rep: &mut RunReport) {
    let th = match cfg.rotation() {
        Ok(t) => t,
        Err(e) => return rep.check(Check::failed("renorm2d", e)),
    };
    let n = cfg.run.n;
    let (start, settings): (renormforge_core::Result<Pair2>, _) = match cfg.run.pipeline {
        Pipeline::Rotation => {
            let p = embedded_rotation(cfg, th.value()).and_then(|p| {
                if cfg.run.perturbation > 0.0 {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
                    perturb_pair2(&mut rng, &p, cfg.run.perturbation, cfg.run.envelope)
                } else {
                    Ok(p)
                }
            });
            (p, cfg.settings())
        }
        Pipeline::Critical => (fold_family(th.value(), cfg.domains.cap2, cfg.sweep.family, cfg.run.perturbation), cfg.sweep_settings()),
    };
    let mut sigma = match start {
        Ok(p) => p,
        Err(e) => return rep.check(Check::failed("renorm2d", e)),
    };
    let mut t = Table::new("renorm2d", &["k", "dist_to_slice", "asymmetry", "y_dependence", "step"]);
    t.push("renorm2", &(&cfg.theta, &cfg.run, 0), &[0.0, sigma.dist_to_slice().unwrap_or(f64::NAN), sigma.asymmetry(), sigma.y_dependence(), f64::NAN]);
    let mut theta = th.clone();
    let mut residual = f64::NAN;
    for k in 1..=cfg.run.iterations {
        let inputs = (&cfg.theta, &cfg.run, &cfg.domains, k);
        let out = renorm2(&sigma, &theta, n, cfg.run.pipeline, &settings);
        match out {
            Ok((q, trace)) => {
                rep.traces.push(Trace::new(&format!("renorm2 step {k}"), &trace));
                let step = q.sub(&sigma).map(|d| d.norm()).unwrap_or(f64::NAN);
                theta = match theta.shift(n) {
                    Ok(t) => t,
                    Err(e) => {
                        t.push_error("renorm2", &inputs, &[k as f64], e.to_string());
                        rep.check(Check::failed("renorm2d iterates", e));
                        break;
                    }
                };
                if cfg.run.pipeline == Pipeline::Rotation {
                    let want = embedded_rotation(cfg, theta.value()).and_then(|w| q.sub(&w)).map(|d| d.norm()).unwrap_or(f64::NAN);
                    residual = if residual.is_nan() { want } else { residual.max(want) };
                }
                t.push("renorm2", &inputs, &[k as f64, trace.dist_to_slice, q.asymmetry(), q.y_dependence(), step]);
                sigma = q;
            }
            Err(e) => {
                t.push_error("renorm2", &inputs, &[k as f64], e.to_string());
                rep.check(Check::failed("renorm2d iterates", e));
                break;
            }
        }
    }
    rep.tables.push(t);
    if cfg.run.pipeline == Pipeline::Rotation && cfg.run.perturbation == 0.0 && cfg.run.iterations > 0 {
        rep.check(Check::below("renorm2d fixed-point residual", residual, cfg.tolerances.fixed_point, "‖R_n ι − ι‖ at the rotation, largest over the iterates"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.output.wall_clock = false;
        c
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("renorm3d".parse::<Command>().is_err());
    }

    #[test]
    fn brjuno_golden_at_forty() {
        let mut cfg = quiet();
        cfg.brjuno.m = 40;
        let r = run(Command::Brjuno, &cfg);
        let y = r.table("brjuno").unwrap().column("y").unwrap();
        assert!((y.last().unwrap().unwrap() - 1.2598).abs() < 1e-4);
        assert!(r.pass, "{:?}", r.checks);
    }

    #[test]
    fn renorm2d_on_embedded_rotation() {
        let r = run(Command::Renorm2d, &quiet());
        assert!(r.pass, "{:?}", r.checks);
        assert!(r.checks[0].value.unwrap() < 1e-10);
    }

    #[test]
    fn renorm1d_perturbed_rows_are_complete() {
        let mut cfg = quiet();
        cfg.run.perturbation = 1e-4;
        cfg.run.iterations = 3;
        let r = run(Command::Renorm1d, &cfg);
        assert!(r.checks.is_empty());
        let t = r.table("renorm1d").unwrap();
        assert_eq!(t.rows.len(), 4);
        assert!(t.rows.iter().all(|r| r.error.is_none() && r.values.iter().all(Option::is_some)));
        assert!(t.column("commutator_norm").unwrap()[0].unwrap() > 1e-8);
    }

    #[test]
    fn critical_renorm2d_records_rows() {
        let mut cfg = quiet();
        cfg.run.pipeline = Pipeline::Critical;
        cfg.run.n = 3;
        cfg.run.iterations = 1;
        cfg.run.perturbation = 1e-3;
        let r = run(Command::Renorm2d, &cfg);
        let t = r.table("renorm2d").unwrap();
        assert_eq!(t.rows.len(), 2);
    }

    #[test]
    fn reports_are_deterministic() {
        let mut cfg = quiet();
        cfg.run.perturbation = 1e-4;
        let a = run(Command::Renorm1d, &cfg);
        let b = run(Command::Renorm1d, &cfg);
        assert_eq!(a.to_json(), b.to_json());
    }
}
