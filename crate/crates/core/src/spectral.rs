//! Fixed points, finite-difference differentials and spectra of the
//! renormalization operators, and the contraction sweep.
//!
//! Everything here runs in `f64`. Points are flattened into a
//! [`CoeffChart`], a low-degree sub-table of the scaled coefficients.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contfrac::RotationNumber;
use crate::pair1d::Pair1;
use crate::pair2d::{prerenorm2, ClassParams, Pair2};
use crate::project::{post_stages, renorm1_slice, renorm2, Pipeline, Renorm2Trace};
use crate::report::{loglog_slope, SweepReport};
use crate::series::{AnalyticFn1, DiskDomain, Series2};
use crate::{Error, Settings, C};

type Cx = C<f64>;

/// One chart coordinate: scaled coefficient `u^i v^j` of component `comp`
/// of map `map` (`A`/`η` is 0, `B`/`ξ` is 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub map: usize,
    pub comp: usize,
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    Pair1,
    Pair2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffChart {
    pub kind: ChartKind,
    pub degree: usize,
    pub slots: Vec<Slot>,
}

impl CoeffChart {
    /// `η` coefficients `0..=degree`, then `ξ`'s.
    pub fn pair1(degree: usize) -> Self {
        let slots = (0..2).flat_map(|map| (0..=degree).map(move |i| Slot { map, comp: 0, i, j: 0 })).collect();
        Self { kind: ChartKind::Pair1, degree, slots }
    }

    /// For each of `a, h, b, g`, the scaled coefficients of total degree
    /// `≤ degree` in triangular order.
    pub fn pair2(degree: usize) -> Self {
        let mut slots = Vec::new();
        for map in 0..2 {
            for comp in 0..2 {
                for d in 0..=degree {
                    for j in 0..=d {
                        slots.push(Slot { map, comp, i: d - j, j });
                    }
                }
            }
        }
        Self { kind: ChartKind::Pair2, degree, slots }
    }

    pub fn dim(&self) -> usize {
        self.slots.len()
    }

    fn series2<'a>(p: &'a Pair2<f64>, s: &Slot) -> &'a Series2<f64> {
        if s.map == 0 { p.a.comp(s.comp) } else { p.b.comp(s.comp) }
    }

    pub fn flatten2(&self, p: &Pair2<f64>) -> Vec<Cx> {
        self.slots
            .iter()
            .map(|s| {
                let f = Self::series2(p, s);
                if s.i + s.j <= f.cap() { f.coeff(s.i, s.j) } else { Cx::new(0.0, 0.0) }
            })
            .collect()
    }

    /// `base` with the chart coordinates replaced by `v`.
    pub fn unflatten2(&self, base: &Pair2<f64>, v: &[Cx]) -> Pair2<f64> {
        let mut out = base.clone();
        for (s, x) in self.slots.iter().zip(v) {
            let m = if s.map == 0 { &mut out.a } else { &mut out.b };
            let f = m.comp_mut(s.comp);
            if s.i + s.j <= f.cap() {
                f.set_coeff(s.i, s.j, *x);
            }
        }
        out
    }

    fn fn1<'a>(p: &'a Pair1<f64>, s: &Slot) -> &'a AnalyticFn1<f64> {
        if s.map == 0 { &p.eta } else { &p.xi }
    }

    pub fn flatten1(&self, p: &Pair1<f64>) -> Vec<Cx> {
        self.slots.iter().map(|s| Self::fn1(p, s).coeffs().get(s.i).copied().unwrap_or_default()).collect()
    }

    pub fn unflatten1(&self, base: &Pair1<f64>, v: &[Cx]) -> Pair1<f64> {
        let mut out = base.clone();
        for (s, x) in self.slots.iter().zip(v) {
            let f = if s.map == 0 { &mut out.eta } else { &mut out.xi };
            if let Some(c) = f.coeffs_mut().get_mut(s.i) {
                *c = *x;
            }
        }
        out
    }

    /// Relative size of the part of `v` transverse to the embedded slice:
    /// y-dependent coordinates and the antisymmetric part `(a − h, b − g)`.
    /// Zero for one-dimensional charts.
    pub fn normal_fraction(&self, v: &[Cx]) -> f64 {
        if self.kind == ChartKind::Pair1 {
            return 0.0;
        }
        let total: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut normal = 0.0;
        for (k, s) in self.slots.iter().enumerate() {
            if s.j > 0 {
                normal += v[k].norm_sqr();
            } else if s.comp == 0 {
                let partner = self.slots.iter().position(|t| t.map == s.map && t.comp == 1 && t.i == s.i && t.j == 0);
                if let Some(p) = partner {
                    normal += 0.5 * (v[k] - v[p]).norm_sqr();
                }
            }
        }
        (normal / total).sqrt()
    }

    /// `Dι`: a tangent vector in a one-dimensional chart, written in this
    /// two-dimensional chart (both components get the same x-coefficients).
    pub fn embed_vector(&self, chart1: &CoeffChart, v1: &[Cx]) -> Vec<Cx> {
        self.slots
            .iter()
            .map(|s| {
                if s.j > 0 {
                    return Cx::new(0.0, 0.0);
                }
                chart1.slots.iter().position(|t| t.map == s.map && t.i == s.i).map(|k| v1[k]).unwrap_or_default()
            })
            .collect()
    }
}

/// An operator acting on points that can be read and written through a
/// chart.
pub trait ChartedOperator: Sync {
    type Point: Clone + Send + Sync;

    fn chart(&self) -> &CoeffChart;
    fn apply(&self, p: &Self::Point) -> crate::Result<Self::Point>;
    fn flatten(&self, p: &Self::Point) -> Vec<Cx>;
    fn unflatten(&self, base: &Self::Point, v: &[Cx]) -> Self::Point;
    /// Full-norm distance (not just the chart part).
    fn distance(&self, a: &Self::Point, b: &Self::Point) -> f64;
}

/// `Σ ↦ ℛ_n Σ`.
#[derive(Debug, Clone)]
pub struct Renorm2Operator {
    pub theta: RotationNumber,
    pub n: usize,
    pub pipeline: Pipeline,
    pub settings: Settings,
    pub chart: CoeffChart,
}

impl ChartedOperator for Renorm2Operator {
    type Point = Pair2<f64>;

    fn chart(&self) -> &CoeffChart {
        &self.chart
    }

    fn apply(&self, p: &Pair2<f64>) -> crate::Result<Pair2<f64>> {
        renorm2(p, &self.theta, self.n, self.pipeline, &self.settings).map(|r| r.0)
    }

    fn flatten(&self, p: &Pair2<f64>) -> Vec<Cx> {
        self.chart.flatten2(p)
    }

    fn unflatten(&self, base: &Pair2<f64>, v: &[Cx]) -> Pair2<f64> {
        self.chart.unflatten2(base, v)
    }

    fn distance(&self, a: &Pair2<f64>, b: &Pair2<f64>) -> f64 {
        a.sub(b).map(|d| d.norm()).unwrap_or(f64::INFINITY)
    }
}

/// The one-dimensional rotation pipeline on the slice, `ζ ↦ renorm1_slice(ζ)`.
#[derive(Debug, Clone)]
pub struct Renorm1Operator {
    pub theta: RotationNumber,
    pub n: usize,
    pub settings: Settings,
    pub chart: CoeffChart,
}

impl ChartedOperator for Renorm1Operator {
    type Point = Pair1<f64>;

    fn chart(&self) -> &CoeffChart {
        &self.chart
    }

    fn apply(&self, p: &Pair1<f64>) -> crate::Result<Pair1<f64>> {
        renorm1_slice(p, &self.theta, self.n, &self.settings).map(|r| r.0)
    }

    fn flatten(&self, p: &Pair1<f64>) -> Vec<Cx> {
        self.chart.flatten1(p)
    }

    fn unflatten(&self, base: &Pair1<f64>, v: &[Cx]) -> Pair1<f64> {
        self.chart.unflatten1(base, v)
    }

    fn distance(&self, a: &Pair1<f64>, b: &Pair1<f64>) -> f64 {
        let d = |f: &AnalyticFn1<f64>, g: &AnalyticFn1<f64>| f.sub(g).map(|s| s.majorant()).unwrap_or(f64::INFINITY);
        0.5 * (d(&a.eta, &b.eta) + d(&a.xi, &b.xi))
    }
}

type Pair2Fn = dyn Fn(&Pair2<f64>) -> crate::Result<Pair2<f64>> + Send + Sync;

/// A two-dimensional operator given by a closure.
pub struct FnOperator2 {
    pub chart: CoeffChart,
    pub f: Box<Pair2Fn>,
}

impl FnOperator2 {
    pub fn new(chart: CoeffChart, f: impl Fn(&Pair2<f64>) -> crate::Result<Pair2<f64>> + Send + Sync + 'static) -> Self {
        Self { chart, f: Box::new(f) }
    }
}

impl ChartedOperator for FnOperator2 {
    type Point = Pair2<f64>;

    fn chart(&self) -> &CoeffChart {
        &self.chart
    }

    fn apply(&self, p: &Pair2<f64>) -> crate::Result<Pair2<f64>> {
        (self.f)(p)
    }

    fn flatten(&self, p: &Pair2<f64>) -> Vec<Cx> {
        self.chart.flatten2(p)
    }

    fn unflatten(&self, base: &Pair2<f64>, v: &[Cx]) -> Pair2<f64> {
        self.chart.unflatten2(base, v)
    }

    fn distance(&self, a: &Pair2<f64>, b: &Pair2<f64>) -> f64 {
        a.sub(b).map(|d| d.norm()).unwrap_or(f64::INFINITY)
    }
}

/// Finite-difference Jacobian in chart coordinates.
#[derive(Debug, Clone)]
pub struct Differential {
    pub matrix: DMatrix<Cx>,
    /// Per column, max entry difference between steps `s` and `s/2`.
    pub column_error: Vec<f64>,
    pub step: f64,
}

impl Differential {
    pub fn max_column_error(&self) -> f64 {
        self.column_error.iter().copied().fold(0.0, f64::max)
    }
}

/// Central differences with step `step · max(1, |v_j|)` per coordinate.
/// Columns are evaluated in parallel and assembled by index.
pub fn differential<O: ChartedOperator>(op: &O, at: &O::Point, step: f64) -> crate::Result<Differential> {
    let v0 = op.flatten(at);
    let dim = v0.len();
    let column = |j: usize, h: f64| -> crate::Result<Vec<Cx>> {
        let mut plus = v0.clone();
        let mut minus = v0.clone();
        plus[j] += Cx::new(h, 0.0);
        minus[j] -= Cx::new(h, 0.0);
        let fp = op.flatten(&op.apply(&op.unflatten(at, &plus))?);
        let fm = op.flatten(&op.apply(&op.unflatten(at, &minus))?);
        Ok(fp.iter().zip(&fm).map(|(a, b)| (*a - *b) / (2.0 * h)).collect())
    };
    let cols: Vec<crate::Result<(Vec<Cx>, f64)>> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let h = step * v0[j].norm().max(1.0);
            let wrap = |e: Error| Error::ColumnFailed { column: j, message: e.to_string() };
            let c1 = column(j, h).map_err(wrap)?;
            let c2 = column(j, 0.5 * h).map_err(wrap)?;
            let err = c1.iter().zip(&c2).map(|(a, b)| (*a - *b).norm()).fold(0.0, f64::max);
            Ok((c1, err))
        })
        .collect();
    let mut matrix = DMatrix::zeros(dim, dim);
    let mut column_error = Vec::with_capacity(dim);
    for (j, c) in cols.into_iter().enumerate() {
        let (c, e) = c?;
        for (i, x) in c.into_iter().enumerate() {
            matrix[(i, j)] = x;
        }
        column_error.push(e);
    }
    Ok(Differential { matrix, column_error, step })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSettings {
    pub tol: f64,
    pub max_steps: usize,
    pub step: f64,
    pub max_condition: f64,
}

impl Default for FixedPointSettings {
    fn default() -> Self {
        Self { tol: 1e-10, max_steps: 8, step: 1e-6, max_condition: 1e8 }
    }
}

#[derive(Debug, Clone)]
pub struct FixedPoint<P> {
    pub point: P,
    pub residual: f64,
    pub steps: usize,
}

fn condition(m: &DMatrix<Cx>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 { max / min } else { f64::INFINITY }
}

/// Hybrid Newton: Newton on the chart coordinates, with the coefficients
/// outside the chart taken from the operator's output at each step.
pub fn fixed_point<O: ChartedOperator>(op: &O, seed: &O::Point, fp: &FixedPointSettings) -> crate::Result<FixedPoint<O::Point>> {
    let stall = |residual: f64, e: Option<Error>| Error::NewtonStall {
        context: match e {
            Some(e) => format!("fixed_point ({e})"),
            None => "fixed_point".into(),
        },
        residual,
    };
    let mut x = seed.clone();
    let mut last = f64::INFINITY;
    for k in 0..=fp.max_steps {
        let y = op.apply(&x).map_err(|e| stall(last, Some(e)))?;
        let res = op.distance(&y, &x);
        if res < fp.tol {
            return Ok(FixedPoint { point: x, residual: res, steps: k });
        }
        if k == fp.max_steps || !res.is_finite() || (k > 1 && res > 10.0 * last) {
            return Err(stall(res, None));
        }
        last = res;
        let d = differential(op, &x, fp.step).map_err(|e| stall(res, Some(e)))?;
        let dim = d.matrix.nrows();
        let a = &d.matrix - DMatrix::<Cx>::identity(dim, dim);
        let cond = condition(&a);
        if cond > fp.max_condition {
            return Err(Error::IllConditioned { condition: cond });
        }
        let vx = op.flatten(&x);
        let vy = op.flatten(&y);
        let r = nalgebra::DVector::from_iterator(dim, vy.iter().zip(&vx).map(|(b, a)| *a - *b));
        let delta = a.lu().solve(&r).ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
        let next: Vec<Cx> = vx.iter().zip(delta.iter()).map(|(a, b)| *a + *b).collect();
        x = op.unflatten(&y, &next);
    }
    Err(stall(last, None))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Tangential,
    Normal,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair {
    pub value: [f64; 2],
    pub modulus: f64,
    /// Relative normal component of the eigenvector, when computed.
    pub normal: Option<f64>,
    pub direction: Direction,
    #[serde(skip)]
    pub vector: Option<Vec<Cx>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Sorted by non-increasing modulus.
    pub eigen: Vec<Eigenpair>,
    /// First index past the leading eigenvalue whose modulus is below
    /// `decay_floor`.
    pub decay_index: Option<usize>,
    pub decay_floor: f64,
    pub max_column_error: f64,
}

impl SpectrumReport {
    pub fn values(&self) -> Vec<Cx> {
        self.eigen.iter().map(|e| Cx::new(e.value[0], e.value[1])).collect()
    }

    pub fn leading(&self) -> Option<Cx> {
        self.values().first().copied()
    }
}

fn inverse_iteration(m: &DMatrix<Cx>, lambda: Cx) -> Option<Vec<Cx>> {
    let n = m.nrows();
    let shift = lambda + Cx::new(1e-10 * lambda.norm().max(1.0), 0.0);
    let lu = (m - DMatrix::<Cx>::identity(n, n) * shift).lu();
    let mut v = nalgebra::DVector::from_iterator(n, (0..n).map(|k| Cx::new(1.0 + 0.01 * k as f64, 0.3 / (1.0 + k as f64))));
    for _ in 0..3 {
        let w = lu.solve(&v)?;
        let norm = w.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return None;
        }
        v = w / Cx::new(norm, 0.0);
    }
    Some(v.iter().copied().collect())
}

/// Eigenvalues by complex Schur decomposition; eigenvectors by inverse
/// iteration for eigenvalues of modulus at least `vector_floor`, labelled
/// by their normal component relative to `normal_tol`.
pub fn spectrum(d: &Differential, chart: &CoeffChart, vector_floor: f64, normal_tol: f64, decay_floor: f64) -> SpectrumReport {
    let vals: Vec<Cx> = d.matrix.clone().schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default();
    let mut vals = vals;
    vals.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let eigen: Vec<Eigenpair> = vals
        .iter()
        .map(|l| {
            let vector = if l.norm() >= vector_floor { inverse_iteration(&d.matrix, *l) } else { None };
            let normal = vector.as_ref().map(|v| chart.normal_fraction(v));
            let direction = match normal {
                Some(x) if x < normal_tol => Direction::Tangential,
                Some(x) if x > 1.0 - normal_tol => Direction::Normal,
                _ => Direction::Unresolved,
            };
            Eigenpair { value: [l.re, l.im], modulus: l.norm(), normal, direction, vector }
        })
        .collect();
    let decay_index = eigen.iter().skip(1).position(|e| e.modulus < decay_floor).map(|k| k + 1);
    SpectrumReport { eigen, decay_index, decay_floor, max_column_error: d.max_column_error() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub reference: [f64; 2],
    pub found: [f64; 2],
    pub distance: f64,
    pub normal: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMatch {
    pub tol: f64,
    pub matched: Vec<MatchedPair>,
    /// Reference eigenvalues above `tol` with no partner.
    pub unmatched_reference: Vec<[f64; 2]>,
    /// Largest modulus among the unmatched eigenvalues of the larger operator.
    pub unmatched_max: f64,
    /// Largest normal component among matched eigenvectors.
    pub max_normal: f64,
}

impl SpectrumMatch {
    pub fn passes(&self) -> bool {
        self.unmatched_reference.is_empty() && self.unmatched_max < self.tol
    }
}

/// Greedy matching of every eigenvalue of `m` above `tol` (largest first)
/// against the nearest unused eigenvalue of `n`.
pub fn match_spectra(n: &SpectrumReport, m: &SpectrumReport, tol: f64) -> SpectrumMatch {
    let mut used = vec![false; n.eigen.len()];
    let mut matched = Vec::new();
    let mut unmatched_reference = Vec::new();
    for e in m.eigen.iter().filter(|e| e.modulus > tol) {
        let k = Cx::new(e.value[0], e.value[1]);
        let best = n
            .eigen
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, f)| (i, (Cx::new(f.value[0], f.value[1]) - k).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((i, dist)) if dist <= tol => {
                used[i] = true;
                matched.push(MatchedPair { reference: e.value, found: n.eigen[i].value, distance: dist, normal: n.eigen[i].normal });
            }
            _ => unmatched_reference.push(e.value),
        }
    }
    let unmatched_max = n.eigen.iter().enumerate().filter(|(i, _)| !used[*i]).map(|(_, e)| e.modulus).fold(0.0, f64::max);
    let max_normal = matched.iter().filter_map(|p| p.normal).fold(0.0, f64::max);
    SpectrumMatch { tol, matched, unmatched_reference, unmatched_max, max_normal }
}

/// [`match_spectra`], failing with the unmatched values.
pub fn spectrum_compare(n: &SpectrumReport, m: &SpectrumReport, tol: f64) -> crate::Result<SpectrumMatch> {
    let v = match_spectra(n, m, tol);
    if v.passes() {
        Ok(v)
    } else {
        let mut unmatched = v.unmatched_reference.clone();
        let used: Vec<[f64; 2]> = v.matched.iter().map(|p| p.found).collect();
        unmatched.extend(n.eigen.iter().filter(|e| e.modulus >= tol && !used.contains(&e.value)).map(|e| e.value));
        Err(Error::SpectrumMismatch { unmatched })
    }
}

/// Critical fold pair `(η, ξ) = (−θ + 2z² − z³, z + 1)` on the disk of
/// radius 2, embedded.
pub fn fold_pair(theta: f64, cap: usize) -> crate::Result<Pair2<f64>> {
    let d = DiskDomain::centered(2.0);
    let c = |x: f64| Cx::new(x, 0.0);
    let eta = AnalyticFn1::from_poly(d, cap, &[c(-theta), c(0.0), c(2.0), c(-1.0)]);
    let xi = AnalyticFn1::from_poly(d, cap, &[c(1.0), c(1.0)]);
    Pair2::embed(&Pair1::new(eta, xi)?, 2.0, cap)
}

/// How the fold pair is pushed off the slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// `v` and `uv` terms of size `δ`, with different weights on the two
    /// components so the asymmetry is also of order `δ`.
    #[default]
    YOnly,
    /// Conjugation by `(x, y) ↦ (x + δy², y)`: y-dependent, commutator
    /// unchanged.
    Conjugated,
}

pub fn fold_family(theta: f64, cap: usize, kind: FamilyKind, delta: f64) -> crate::Result<Pair2<f64>> {
    let mut p = fold_pair(theta, cap)?;
    if delta == 0.0 {
        return Ok(p);
    }
    match kind {
        FamilyKind::YOnly => {
            for (i, m) in [&mut p.a, &mut p.b].into_iter().enumerate() {
                for k in 0..2 {
                    let f = m.comp_mut(k);
                    let v = f.coeff(0, 1);
                    f.set_coeff(0, 1, v + Cx::new(delta * (1.0 + 0.3 * i as f64 + 0.5 * k as f64), 0.0));
                    let uv = f.coeff(1, 1);
                    f.set_coeff(1, 1, uv + Cx::new(delta * 0.2 * (k as f64 - 0.5), 0.0));
                }
            }
            Ok(p)
        }
        FamilyKind::Conjugated => {
            let slack = 1.05;
            let conj = |m: &crate::series::AnalyticMap2<f64>| -> crate::Result<crate::series::AnalyticMap2<f64>> {
                let dom = *m.domain();
                let cap = m.cap();
                let phi = crate::series::AnalyticMap2::new(
                    Series2::from_poly(dom, cap, &[(1, 0, Cx::new(1.0, 0.0)), (0, 2, Cx::new(delta, 0.0))]),
                    Series2::coord_y(dom, cap),
                )?;
                let inner = m.compose(&phi, slack)?;
                let (u, v) = inner.into_parts();
                let v2 = v.mul(&v)?.scale(Cx::new(delta, 0.0));
                crate::series::AnalyticMap2::new(u.sub(&v2)?, v)
            };
            Pair2::new(conj(&p.a)?, conj(&p.b)?)
        }
    }
}

/// `Π₂Π₁p𝓡ⁿ` on the fold family: settings tuned so the pre-renormalized
/// pair and the critical-point search fit the radius-2 disks.
pub fn fold_settings() -> Settings {
    Settings { pr_radius: Some(0.46), q_radius: 0.09, ..Settings::default() }
}

/// Table of `(δ, asymmetry, y-dependence, distance before and after the
/// projections, class status)` over `deltas`, with a log-log slope over the
/// positive `δ` rows. Rows whose input fails `class` or whose stages fail
/// are flagged, not dropped.
pub fn contraction_sweep(
    family: &(dyn Fn(f64) -> crate::Result<Pair2<f64>> + Sync),
    deltas: &[f64],
    theta: &RotationNumber,
    n: usize,
    settings: &Settings,
    class: Option<&ClassParams>,
) -> SweepReport {
    let mut rep = SweepReport::new("contraction", &["delta", "asymmetry", "y_dependence", "dist_pre", "dist", "class_ok"]);
    let rows: Vec<(Vec<f64>, Vec<String>)> = deltas
        .par_iter()
        .map(|&delta| {
            let mut flags = Vec::new();
            let p = match family(delta) {
                Ok(p) => p,
                Err(e) => return (vec![delta, f64::NAN, f64::NAN, f64::NAN, f64::NAN, 0.0], vec![format!("delta={delta:e}: family: {e}")]),
            };
            let class_ok = match class {
                Some(cp) => {
                    let diag = p.class_check(cp);
                    if !diag.passes() {
                        flags.push(format!(
                            "delta={delta:e}: outside class (near_center={}, min_dx_h={:.3e}, min_dx_g={:.3e}, y_dependence={:.3e})",
                            diag.near_center, diag.min_dx_h, diag.min_dx_g, diag.y_dependence
                        ));
                    }
                    diag.passes()
                }
                None => true,
            };
            let run = || -> crate::Result<(f64, f64)> {
                let pre = prerenorm2(&p, theta, n, settings)?;
                let mut tr = Renorm2Trace::default();
                post_stages(&pre.pair, Pipeline::Critical, (*p.a.domain(), *p.b.domain()), settings, &mut tr)?;
                Ok((pre.dist_to_slice, tr.dist_to_slice))
            };
            let (pre, post) = run().unwrap_or_else(|e| {
                flags.push(format!("delta={delta:e}: {e}"));
                (f64::NAN, f64::NAN)
            });
            (vec![delta, p.asymmetry(), p.y_dependence(), pre, post, if class_ok { 1.0 } else { 0.0 }], flags)
        })
        .collect();
    for (r, f) in rows {
        rep.rows.push(r);
        rep.flags.extend(f);
    }
    let pos: Vec<&Vec<f64>> = rep.rows.iter().filter(|r| r[0] > 0.0 && r[4].is_finite()).collect();
    let xs: Vec<f64> = pos.iter().map(|r| r[0]).collect();
    let ys: Vec<f64> = pos.iter().map(|r| r[4]).collect();
    if let Some(s) = loglog_slope(&xs, &ys) {
        rep.summary.push(("slope".into(), s));
    }
    if let Some(c) = pos.iter().map(|r| r[4] / (r[0] * r[0])).reduce(f64::max) {
        rep.summary.push(("constant".into(), c));
    }
    if let Some(r) = rep.rows.iter().find(|r| r[0] == 0.0) {
        rep.summary.push(("zero_dist".into(), r[4]));
    }
    rep
}
