//! Experiment configuration: TOML with dotted keys, overridden by
//! `--set key=value` flags.

use std::path::Path;

use renormforge_core::contfrac::RotationNumber;
use renormforge_core::project::Pipeline;
use renormforge_core::spectral::FamilyKind;
use renormforge_core::Settings;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// Dotted path of the offending field, or `"<file>"`.
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error at {}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { path: path.into(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub pipeline: Pipeline,
    /// Depth of the two-dimensional renormalization.
    pub n: usize,
    pub seed: u64,
    /// Number of randomized constructions per check.
    pub samples: usize,
    /// Size of random coefficient perturbations.
    pub perturbation: f64,
    /// Ratio of the geometric envelope (per total degree) of random
    /// perturbations.
    pub envelope: f64,
    /// Renormalization steps for `renorm1d` / `renorm2d`.
    pub iterations: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { pipeline: Pipeline::Rotation, n: 2, seed: 2024, samples: 20, perturbation: 0.0, envelope: 0.5, iterations: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThetaSection {
    /// `golden`, `sqrt2m1`, a quotient list `"1,2,1,..."` or a decimal.
    pub spec: String,
    pub length: usize,
}

impl Default for ThetaSection {
    fn default() -> Self {
        Self { spec: "golden".into(), length: 96 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainSection {
    /// Degree cap of one-dimensional series.
    pub cap1: usize,
    /// Total-degree cap of bivariate series.
    pub cap2: usize,
    pub z_radius: f64,
    pub w_radius: f64,
    /// `R`, the y-radius of the polydisks.
    pub y_radius: f64,
    /// Radius of the pre-renormalization disks `Ẑ`, `Ŵ`; rescaled input
    /// domains when absent.
    pub pr_radius: Option<f64>,
    pub q_radius: f64,
}

impl Default for DomainSection {
    fn default() -> Self {
        Self { cap1: 24, cap2: 12, z_radius: 6.0, w_radius: 6.0, y_radius: 6.0, pr_radius: None, q_radius: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceSection {
    pub newton: f64,
    pub slack: f64,
    pub derivative_floor: f64,
    pub coeff_ceiling: f64,
    pub scale_floor: f64,
    pub shift_margin: f64,
    /// Threshold on `‖ℛΣ − Σ‖` for fixed-point checks.
    pub fixed_point: f64,
    /// Threshold for projection identities on commuting inputs.
    pub identity: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        Self {
            newton: 1e-13,
            slack: 1.05,
            derivative_floor: 1e-8,
            coeff_ceiling: 1e12,
            scale_floor: 1e-6,
            shift_margin: 1.5,
            fixed_point: 1e-10,
            identity: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    pub chart_degree: usize,
    pub step: f64,
    pub match_tol: f64,
    pub normal_tol: f64,
    pub decay_floor: f64,
    /// Relative tolerance of the leading eigenvalue against the Gauss-map
    /// derivative.
    pub leading_rel_tol: f64,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { chart_degree: 8, step: 1e-6, match_tol: 1e-6, normal_tol: 1e-6, decay_floor: 1e-6, leading_rel_tol: 1e-2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub deltas: Vec<f64>,
    pub family: FamilyKind,
    pub n: usize,
    pub q_radius: f64,
    pub pr_radius: f64,
    pub slope_target: f64,
    pub slope_tol: f64,
    pub zero_tol: f64,
    /// `δ` of the class check applied to family members.
    pub class_delta: f64,
    /// Radius of the neighbourhood `𝒰` around the unperturbed fold pair.
    pub class_radius: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            deltas: vec![0.0, 1e-2, 3e-3, 1e-3, 3e-4],
            family: FamilyKind::YOnly,
            n: 3,
            q_radius: 0.09,
            pr_radius: 0.46,
            slope_target: 2.0,
            slope_tol: 0.2,
            zero_tol: 1e-10,
            class_delta: 0.05,
            class_radius: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommutatorSection {
    /// Number of renormalization steps `ℓ`.
    pub ell: usize,
    /// Radius of the disk `U_δ(0)` the commutator is measured on.
    pub delta: f64,
    pub min_norm: f64,
    pub max_norm: f64,
    /// Largest allowed distance to the rotation.
    pub max_distance: f64,
    pub factor_tol: f64,
}

impl Default for CommutatorSection {
    fn default() -> Self {
        Self { ell: 4, delta: 0.6, min_norm: 1e-6, max_norm: 1e-3, max_distance: 1e-2, factor_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BrjunoSection {
    pub m: usize,
    pub tol: f64,
}

impl Default for BrjunoSection {
    fn default() -> Self {
        Self { m: 60, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MicroscopeSection {
    pub k_max: usize,
    /// `renorm1` steps per level.
    pub n: usize,
    /// `Δ`.
    pub strip: f64,
    /// `C`.
    pub c: f64,
    /// Size of the conjugacy `z + ε z²` applied to the rotation.
    pub perturbation: f64,
    pub defect_tol: f64,
}

impl Default for MicroscopeSection {
    fn default() -> Self {
        Self { k_max: 4, n: 1, strip: 2.0, c: 0.1, perturbation: 1e-3, defect_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
    pub formats: Vec<String>,
    /// Record wall-clock time; turn off for byte-stable golden files.
    pub wall_clock: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into(), formats: vec!["json".into()], wall_clock: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub run: RunSection,
    pub theta: ThetaSection,
    pub domains: DomainSection,
    pub tolerances: ToleranceSection,
    pub spectrum: SpectrumSection,
    pub sweep: SweepSection,
    pub commutator: CommutatorSection,
    pub brjuno: BrjunoSection,
    pub microscope: MicroscopeSection,
    pub output: OutputSection,
}

fn parse_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

/// Sets `key` (dotted) in `table`, creating intermediate tables.
pub fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), ConfigError> {
    let parts: Vec<&str> = key.split('.').map(str::trim).collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(err(key, "empty key segment"));
    }
    let mut cur = table;
    for (i, p) in parts.iter().enumerate() {
        if i + 1 == parts.len() {
            cur.insert(p.to_string(), value);
            return Ok(());
        }
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(err(&parts[..=i].join("."), "not a table")),
        };
    }
    Ok(())
}

impl ExperimentConfig {
    /// Reads `file` (if any), applies `sets` in order, and validates.
    pub fn load(file: Option<&Path>, sets: &[String]) -> Result<Self, ConfigError> {
        let mut table = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| err("<file>", format!("{}: {e}", p.display())))?;
                text.parse::<toml::Table>().map_err(|e| err("<file>", e.to_string()))?
            }
            None => toml::Table::new(),
        };
        for s in sets {
            let (k, v) = s.split_once('=').ok_or_else(|| err(s, "expected key=value"))?;
            set_dotted(&mut table, k.trim(), parse_value(v.trim()))?;
        }
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self, ConfigError> {
        let de = toml::Value::Table(table);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| err(&e.path().to_string(), e.inner().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("run.envelope", self.run.envelope),
            ("domains.z_radius", self.domains.z_radius),
            ("domains.w_radius", self.domains.w_radius),
            ("domains.y_radius", self.domains.y_radius),
            ("domains.q_radius", self.domains.q_radius),
            ("tolerances.newton", self.tolerances.newton),
            ("tolerances.slack", self.tolerances.slack),
            ("tolerances.derivative_floor", self.tolerances.derivative_floor),
            ("tolerances.coeff_ceiling", self.tolerances.coeff_ceiling),
            ("tolerances.scale_floor", self.tolerances.scale_floor),
            ("tolerances.shift_margin", self.tolerances.shift_margin),
            ("tolerances.fixed_point", self.tolerances.fixed_point),
            ("tolerances.identity", self.tolerances.identity),
            ("spectrum.step", self.spectrum.step),
            ("spectrum.match_tol", self.spectrum.match_tol),
            ("spectrum.normal_tol", self.spectrum.normal_tol),
            ("spectrum.decay_floor", self.spectrum.decay_floor),
            ("spectrum.leading_rel_tol", self.spectrum.leading_rel_tol),
            ("sweep.q_radius", self.sweep.q_radius),
            ("sweep.pr_radius", self.sweep.pr_radius),
            ("sweep.slope_tol", self.sweep.slope_tol),
            ("sweep.zero_tol", self.sweep.zero_tol),
            ("sweep.class_delta", self.sweep.class_delta),
            ("sweep.class_radius", self.sweep.class_radius),
            ("commutator.delta", self.commutator.delta),
            ("commutator.min_norm", self.commutator.min_norm),
            ("commutator.max_norm", self.commutator.max_norm),
            ("commutator.max_distance", self.commutator.max_distance),
            ("commutator.factor_tol", self.commutator.factor_tol),
            ("brjuno.tol", self.brjuno.tol),
            ("microscope.defect_tol", self.microscope.defect_tol),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(err(k, format!("must be positive and finite, got {v}")));
            }
        }
        if let Some(r) = self.domains.pr_radius {
            if !(r > 0.0) {
                return Err(err("domains.pr_radius", "must be positive"));
            }
        }
        if self.run.perturbation < 0.0 || self.microscope.perturbation < 0.0 {
            return Err(err("run.perturbation", "must be non-negative"));
        }
        if self.sweep.deltas.is_empty() {
            return Err(err("sweep.deltas", "grid must be non-empty"));
        }
        if self.sweep.deltas.iter().any(|d| !(*d >= 0.0)) {
            return Err(err("sweep.deltas", "entries must be non-negative"));
        }
        if self.commutator.min_norm >= self.commutator.max_norm {
            return Err(err("commutator.min_norm", "must be below commutator.max_norm"));
        }
        for (k, v) in [("run.n", self.run.n), ("run.samples", self.run.samples), ("sweep.n", self.sweep.n), ("brjuno.m", self.brjuno.m)] {
            if v == 0 {
                return Err(err(k, "must be at least 1"));
            }
        }
        if self.domains.cap1 < 2 || self.domains.cap2 < 2 {
            return Err(err("domains.cap1", "degree caps must be at least 2"));
        }
        for f in &self.output.formats {
            if f != "json" && f != "csv" {
                return Err(err("output.formats", format!("unknown format {f:?}")));
            }
        }
        self.rotation().map_err(|e| err("theta.spec", e.to_string()))?;
        Ok(())
    }

    pub fn rotation(&self) -> renormforge_core::Result<RotationNumber> {
        RotationNumber::parse(&self.theta.spec, self.theta.length).map(|r| r.0)
    }

    /// Core settings for the rotation pipeline and one-dimensional runs.
    pub fn settings(&self) -> Settings {
        let t = &self.tolerances;
        Settings {
            slack: t.slack,
            derivative_floor: t.derivative_floor,
            coeff_ceiling: t.coeff_ceiling,
            newton_tol: t.newton,
            shift_margin: t.shift_margin,
            pr_radius: self.domains.pr_radius,
            q_radius: self.domains.q_radius,
            scale_floor: t.scale_floor,
            ..Settings::default()
        }
    }

    /// Settings for the critical fold family of the contraction sweep.
    pub fn sweep_settings(&self) -> Settings {
        Settings { pr_radius: Some(self.sweep.pr_radius), q_radius: self.sweep.q_radius, ..self.settings() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
        assert_eq!(ExperimentConfig::load(None, &[]).unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn set_overrides_dotted_keys() {
        let sets = vec!["run.n=3".to_string(), "theta.spec=sqrt2m1".into(), "sweep.deltas=[0.0, 0.01]".into(), "domains.pr_radius=0.5".into()];
        let c = ExperimentConfig::load(None, &sets).unwrap();
        assert_eq!(c.run.n, 3);
        assert_eq!(c.theta.spec, "sqrt2m1");
        assert_eq!(c.sweep.deltas, vec![0.0, 0.01]);
        assert_eq!(c.domains.pr_radius, Some(0.5));
    }

    #[test]
    fn errors_carry_field_paths() {
        let e = ExperimentConfig::load(None, &["run.n=\"x\"".into()]).unwrap_err();
        assert_eq!(e.path, "run.n");
        let e = ExperimentConfig::load(None, &["sweep.bogus=1".into()]).unwrap_err();
        assert!(e.path.starts_with("sweep"), "{e}");
        let e = ExperimentConfig::load(None, &["tolerances.newton=-1".into()]).unwrap_err();
        assert_eq!(e.path, "tolerances.newton");
        let e = ExperimentConfig::load(None, &["sweep.deltas=[]".into()]).unwrap_err();
        assert_eq!(e.path, "sweep.deltas");
        let e = ExperimentConfig::load(None, &["theta.spec=0.5".into()]).unwrap_err();
        assert_eq!(e.path, "theta.spec");
    }

    #[test]
    fn file_and_flags_combine() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "run.n = 3\n[sweep]\nn = 2\n").unwrap();
        let c = ExperimentConfig::load(Some(&p), &["sweep.n=4".into()]).unwrap();
        assert_eq!((c.run.n, c.sweep.n), (3, 4));
    }
}
