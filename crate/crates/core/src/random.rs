//! Random Hermitian tensor models, their moment generating functions, and the
//! Laplace-transform and master tail bounds for independent sums.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::{instance_rng, random_hermitian, random_unitary, with_eigenbasis};
use crate::error::{Error, Result};
use crate::quadrature::{QuadSummary, QuadratureScheme};
use crate::spectral::{hermitian_checked, Eigh};
use crate::tensor::{DenseTensor, Shape};

type CMat = DMatrix<Complex64>;

/// Joint supports larger than this are sampled instead of enumerated.
pub const MAX_ENUMERATION: usize = 4096;

/// Tolerance on probability vectors summing to one.
const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelKind {
    /// `scale * (G + G^H)/2` for a Ginibre `G`.
    GaussianHermitian { scale: f64 },
    /// `U diag(lambda) U^H` with Haar `U` and eigenvalues uniform in `[lo, hi]`.
    BoundedSpectrum { lo: f64, hi: f64 },
    /// `eps * A` with a fair sign `eps`.
    RademacherDilation { atom: DenseTensor },
    /// `X = atoms[i]` with probability `probs[i]`.
    FiniteMixture { atoms: Vec<DenseTensor>, probs: Vec<f64> },
}

/// A sampleable distribution over Hermitian tensors of one square shape.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomTensorModel {
    shape: Shape,
    kind: ModelKind,
}

/// On-disk model description `{"kind", "shape", "atoms", "probs", ...}`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ModelFile {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Shape>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<DenseTensor>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
}

impl RandomTensorModel {
    pub fn new(shape: Shape, kind: ModelKind) -> Result<Self> {
        let shape = Shape::new(shape.row_dims().to_vec(), shape.col_dims().to_vec())?;
        if !shape.is_square() {
            return Err(Error::Shape(format!("random tensor models need a square shape, got {shape}")));
        }
        let check_atom = |a: &DenseTensor| -> Result<()> {
            if a.shape() != &shape {
                return Err(Error::Shape(format!("atom of shape {} in a {shape} model", a.shape())));
            }
            hermitian_checked(a).map(|_| ())
        };
        match &kind {
            ModelKind::GaussianHermitian { scale } => {
                if !(scale.is_finite() && *scale >= 0.0) {
                    return Err(Error::Domain(format!("scale must be finite and >= 0, got {scale}")));
                }
            }
            ModelKind::BoundedSpectrum { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(Error::Domain(format!("need finite lo <= hi, got [{lo}, {hi}]")));
                }
            }
            ModelKind::RademacherDilation { atom } => check_atom(atom)?,
            ModelKind::FiniteMixture { atoms, probs } => {
                if atoms.is_empty() || atoms.len() != probs.len() {
                    return Err(Error::Domain(format!(
                        "mixture needs matching non-empty atoms/probs, got {} and {}",
                        atoms.len(),
                        probs.len()
                    )));
                }
                if probs.iter().any(|&p| !(p.is_finite() && p >= 0.0)) {
                    return Err(Error::Domain("probabilities must be finite and >= 0".into()));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > PROB_TOL {
                    return Err(Error::Domain(format!("probabilities sum to {total}, not 1")));
                }
                for a in atoms {
                    check_atom(a)?;
                }
            }
        }
        Ok(Self { shape, kind })
    }

    /// Deterministic law concentrated on `a`.
    pub fn deterministic(a: DenseTensor) -> Result<Self> {
        Self::new(a.shape().clone(), ModelKind::FiniteMixture { atoms: vec![a], probs: vec![1.0] })
    }

    pub fn rademacher(a: DenseTensor) -> Result<Self> {
        Self::new(a.shape().clone(), ModelKind::RademacherDilation { atom: a })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    /// Exact support with probabilities, if finite.
    pub fn support(&self) -> Option<Vec<(f64, DenseTensor)>> {
        match &self.kind {
            ModelKind::RademacherDilation { atom } => {
                Some(vec![(0.5, atom.clone()), (0.5, atom.scale_real(-1.0))])
            }
            ModelKind::FiniteMixture { atoms, probs } => {
                Some(probs.iter().copied().zip(atoms.iter().cloned()).collect())
            }
            _ => None,
        }
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> DenseTensor {
        match &self.kind {
            ModelKind::GaussianHermitian { scale } => random_hermitian(rng, &self.shape).scale_real(*scale),
            ModelKind::BoundedSpectrum { lo, hi } => {
                let u = random_unitary(rng, &self.shape);
                let vals: Vec<f64> = (0..self.shape.rows())
                    .map(|_| if lo == hi { *lo } else { rng.random_range(*lo..=*hi) })
                    .collect();
                with_eigenbasis(&u, &vals).expect("square shape")
            }
            ModelKind::RademacherDilation { atom } => {
                if rng.random_bool(0.5) {
                    atom.clone()
                } else {
                    atom.scale_real(-1.0)
                }
            }
            ModelKind::FiniteMixture { atoms, probs } => {
                let idx = WeightedIndex::new(probs).expect("validated probabilities");
                atoms[idx.sample(rng)].clone()
            }
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        let shape = match (&file.shape, file.atoms.first()) {
            (Some(s), _) => s.clone(),
            (None, Some(a)) => a.shape().clone(),
            (None, None) => return Err(Error::Parse("model file needs a shape or atoms".into())),
        };
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Parse(format!("model kind '{}' needs '{name}'", file.kind)))
        };
        let kind = match file.kind.as_str() {
            "gaussian-hermitian" => ModelKind::GaussianHermitian { scale: file.scale.unwrap_or(1.0) },
            "bounded-spectrum" => ModelKind::BoundedSpectrum { lo: need(file.lo, "lo")?, hi: need(file.hi, "hi")? },
            "rademacher-dilation" => {
                let [atom] = <[DenseTensor; 1]>::try_from(file.atoms.clone()).map_err(|_| {
                    Error::Parse("rademacher-dilation needs exactly one atom".into())
                })?;
                ModelKind::RademacherDilation { atom }
            }
            "finite-mixture" => ModelKind::FiniteMixture { atoms: file.atoms.clone(), probs: file.probs.clone() },
            other => return Err(Error::Parse(format!("unknown model kind '{other}'"))),
        };
        Self::new(shape, kind)
    }

    pub fn to_file(&self) -> ModelFile {
        let mut f = ModelFile { shape: Some(self.shape.clone()), ..ModelFile::default() };
        match &self.kind {
            ModelKind::GaussianHermitian { scale } => {
                f.kind = "gaussian-hermitian".into();
                f.scale = Some(*scale);
            }
            ModelKind::BoundedSpectrum { lo, hi } => {
                f.kind = "bounded-spectrum".into();
                f.lo = Some(*lo);
                f.hi = Some(*hi);
            }
            ModelKind::RademacherDilation { atom } => {
                f.kind = "rademacher-dilation".into();
                f.atoms = vec![atom.clone()];
            }
            ModelKind::FiniteMixture { atoms, probs } => {
                f.kind = "finite-mixture".into();
                f.atoms = atoms.clone();
                f.probs = probs.clone();
            }
        }
        f
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }
}

/// One draw from `model`; identical `(model, seed)` give bit-identical samples.
pub fn sample_model(model: &RandomTensorModel, seed: u64) -> DenseTensor {
    model.sample_with(&mut instance_rng(seed, 0))
}

/// Stream for trial `trial` of model `model_index`.
fn trial_rng(seed: u64, model_index: usize, trial: usize) -> rand_chacha::ChaCha20Rng {
    instance_rng(seed, ((model_index as u64) << 40) | trial as u64)
}

/// A model's law as a weighted atom list: exact for finite support, else an equal-weight
/// Monte Carlo sample reused for every expectation.
#[derive(Debug, Clone)]
pub struct ModelLaw {
    weights: Vec<f64>,
    atoms: Vec<DenseTensor>,
    eigs: Vec<Eigh>,
    exact: bool,
    top: f64,
}

impl ModelLaw {
    pub fn new(model: &RandomTensorModel, n_samples: usize, seed: u64, model_index: usize) -> Result<Self> {
        let (weights, atoms, exact) = match model.support() {
            Some(sup) => {
                let (w, a): (Vec<f64>, Vec<DenseTensor>) = sup.into_iter().filter(|(p, _)| *p > 0.0).unzip();
                (w, a, true)
            }
            None => {
                if n_samples == 0 {
                    return Err(Error::Domain("Monte Carlo expectation needs n_samples >= 1".into()));
                }
                let atoms: Vec<DenseTensor> = (0..n_samples)
                    .map(|i| model.sample_with(&mut trial_rng(seed, model_index, i)))
                    .collect();
                (vec![1.0 / n_samples as f64; n_samples], atoms, false)
            }
        };
        let eigs: Vec<Eigh> = atoms.iter().map(Eigh::new).collect::<Result<_>>()?;
        let top = eigs.iter().map(|e| e.max()).fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { weights, atoms, eigs, exact, top })
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Largest eigenvalue over the atoms.
    pub fn top(&self) -> f64 {
        self.top
    }

    /// `E exp(z (X - top I))`.
    fn mgf_scaled(&self, z: Complex64) -> CMat {
        let n = self.eigs[0].values().len();
        let mut acc = CMat::zeros(n, n);
        for (w, e) in self.weights.iter().zip(&self.eigs) {
            let v = e.vectors();
            let mut scaled = v.clone();
            for (j, &l) in e.values().iter().enumerate() {
                let f = (z * (l - self.top)).exp() * *w;
                for x in scaled.column_mut(j).iter_mut() {
                    *x *= f;
                }
            }
            acc += scaled * v.adjoint();
        }
        acc
    }

    /// `log E Tr exp(t (X - top I))`, from eigenvalues only.
    fn log_trace_mgf_scaled(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (w, e) in self.weights.iter().zip(&self.eigs) {
            for &l in e.values() {
                acc += w * (t * (l - self.top)).exp();
            }
        }
        acc.ln()
    }
}

/// `E exp(t X)`: exact for finite support, otherwise the mean over `n_samples` draws.
pub fn estimate_mgf(model: &RandomTensorModel, t: f64, n_samples: usize, seed: u64) -> Result<DenseTensor> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("MGF argument must be finite, got {t}")));
    }
    let law = ModelLaw::new(model, n_samples, seed, 0)?;
    if t == 0.0 && law.exact {
        return crate::tensor::identity_tensor(model.shape());
    }
    let m = law.mgf_scaled(Complex64::new(t, 0.0)) * Complex64::new((t * law.top).exp(), 0.0);
    DenseTensor::from_dmatrix(model.shape().clone(), &m)?.hermitian_part()
}

/// First two cumulants `E X` and `E X^2 - (E X)^2`.
pub fn tensor_cumulants(
    model: &RandomTensorModel,
    n_samples: usize,
    seed: u64,
) -> Result<(DenseTensor, DenseTensor)> {
    let law = ModelLaw::new(model, n_samples, seed, 0)?;
    let mut mean = DenseTensor::zeros(model.shape().clone());
    let mut second = DenseTensor::zeros(model.shape().clone());
    for (w, a) in law.weights.iter().zip(&law.atoms) {
        mean = mean.add(&a.scale_real(*w))?;
        second = second.add(&a.star(a).scale_real(*w))?;
    }
    let var = second.sub(&mean.star(&mean))?.hermitian_part()?;
    Ok((mean.hermitian_part()?, var))
}

/// Which dimensional constant multiplies the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantMode {
    /// `(2M - 1)^N` for cubical shapes with `M` index pairs of extent `N`.
    Paper,
    /// `1`, from `lambda_max <= Tr` on the matricization.
    Matricized,
}

/// `(2M - 1)^N` for a cubical shape, `None` otherwise.
pub fn paper_constant(shape: &Shape) -> Option<f64> {
    if !shape.is_cubical() {
        return None;
    }
    let m = shape.row_dims().len() as f64;
    let n = shape.row_dims()[0] as i32;
    Some((2.0 * m - 1.0).powi(n))
}

/// Coarse log-grid plus golden-section search for the infimum over `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TSearch {
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
}

impl Default for TSearch {
    fn default() -> Self {
        Self { t_min: 1e-3, t_max: 1e3, per_decade: 25 }
    }
}

impl TSearch {
    fn grid(&self) -> Vec<f64> {
        let (a, b) = (self.t_min.log10(), self.t_max.log10());
        let k = (((b - a) * self.per_decade as f64).round() as usize).max(1);
        (0..=k).map(|i| a + (b - a) * i as f64 / k as f64).collect()
    }

    /// Minimize `f(t)` over the search range; returns `(t*, f(t*))`.
    pub fn minimize(&self, mut f: impl FnMut(f64) -> Result<f64>) -> Result<(f64, f64)> {
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.per_decade > 0) {
            return Err(Error::Domain(format!("invalid t search {self:?}")));
        }
        let mut eval = |u: f64| -> Result<f64> {
            let v = f(10f64.powf(u))?;
            if v.is_nan() {
                return Err(Error::Numerical(format!("bound objective is NaN at t = {}", 10f64.powf(u))));
            }
            Ok(v)
        };
        let us = self.grid();
        let vals: Vec<f64> = us.iter().map(|&u| eval(u)).collect::<Result<_>>()?;
        let mut best = 0;
        for (i, v) in vals.iter().enumerate() {
            if *v < vals[best] {
                best = i;
            }
        }
        let (mut lo, mut hi) = (us[best.saturating_sub(1)], us[(best + 1).min(us.len() - 1)]);
        let (mut best_u, mut best_v) = (us[best], vals[best]);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let mut f1 = eval(x1)?;
        let mut f2 = eval(x2)?;
        for _ in 0..80 {
            if hi - lo < 1e-9 {
                break;
            }
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = eval(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = eval(x2)?;
            }
        }
        for (u, v) in [(x1, f1), (x2, f2)] {
            if v < best_v {
                best_u = u;
                best_v = v;
            }
        }
        Ok((10f64.powf(best_u), best_v))
    }
}

/// Settings shared by the tail bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailOptions {
    pub search: TSearch,
    pub mode: ConstantMode,
    /// Monte Carlo draws per model without finite support.
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self { search: TSearch::default(), mode: ConstantMode::Paper, n_samples: 2000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBoundReport {
    pub zeta: f64,
    pub t_star: f64,
    /// `log inf_t e^{-zeta t} (...)` before the dimensional constant and clipping.
    pub log_raw_bound: f64,
    /// Bound in the selected mode, clipped to 1.
    pub bound: f64,
    pub mode: ConstantMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_paper: Option<f64>,
    pub bound_matricized: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_dim_paper: Option<f64>,
    pub n_models: usize,
    pub exact_expectations: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad: Option<QuadSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empirical_tail: Option<f64>,
    pub n_trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clopper_pearson_upper: Option<f64>,
}

impl TailBoundReport {
    pub fn with_empirical(mut self, e: &EmpiricalTail) -> Self {
        self.empirical_tail = Some(e.fraction);
        self.n_trials = e.n_trials;
        self.clopper_pearson_upper = Some(e.clopper_pearson_upper);
        self
    }
}

fn finish_report(
    shape: &Shape,
    zeta: f64,
    t_star: f64,
    log_raw: f64,
    opts: &TailOptions,
    n_models: usize,
    exact: bool,
    quad: Option<QuadSummary>,
) -> Result<TailBoundReport> {
    let c_paper = paper_constant(shape);
    if opts.mode == ConstantMode::Paper && c_paper.is_none() {
        return Err(Error::Domain(format!(
            "the cubical dimension constant needs a cubical shape, got {shape}"
        )));
    }
    let clip = |c: f64| (c.ln() + log_raw).exp().min(1.0);
    let bound_matricized = clip(1.0);
    let bound_paper = c_paper.map(clip);
    let bound = match opts.mode {
        ConstantMode::Paper => bound_paper.expect("checked above"),
        ConstantMode::Matricized => bound_matricized,
    };
    Ok(TailBoundReport {
        zeta,
        t_star,
        log_raw_bound: log_raw,
        bound,
        mode: opts.mode,
        bound_paper,
        bound_matricized,
        c_dim_paper: c_paper,
        n_models,
        exact_expectations: exact,
        quad,
        empirical_tail: None,
        n_trials: 0,
        clopper_pearson_upper: None,
    })
}

fn common_model_shape(models: &[RandomTensorModel]) -> Result<Shape> {
    let first = models.first().ok_or_else(|| Error::Domain("need at least one model".into()))?;
    for m in models {
        if m.shape() != first.shape() {
            return Err(Error::Shape(format!("models of shapes {} and {}", first.shape(), m.shape())));
        }
    }
    Ok(first.shape().clone())
}

/// Independent models with their laws prepared once for repeated bound evaluations.
#[derive(Debug, Clone)]
pub struct TailProblem {
    shape: Shape,
    laws: Vec<ModelLaw>,
    opts: TailOptions,
}

impl TailProblem {
    pub fn new(models: &[RandomTensorModel], opts: TailOptions) -> Result<Self> {
        let shape = common_model_shape(models)?;
        let laws = models
            .iter()
            .enumerate()
            .map(|(k, m)| ModelLaw::new(m, opts.n_samples, opts.seed, k))
            .collect::<Result<_>>()?;
        Ok(Self { shape, laws, opts })
    }

    fn exact(&self) -> bool {
        self.laws.iter().all(|l| l.exact)
    }

    /// Laplace bound for the first model: `inf_t e^{-zeta t} E Tr e^{tY}`.
    pub fn laplace(&self, zeta: f64) -> Result<TailBoundReport> {
        let law = &self.laws[0];
        // the exponential factors are combined first so that e^{-zeta t} e^{t top} cancels exactly
        let (t_star, log_raw) =
            self.opts.search.minimize(|t| Ok(t * (law.top - zeta) + law.log_trace_mgf_scaled(t)))?;
        finish_report(&self.shape, zeta, t_star, log_raw, &self.opts, 1, law.exact, None)
    }

    /// Sum of the per-model eigenvalue shifts; the master objective carries `e^{t * shift}`.
    fn total_top(&self) -> f64 {
        self.laws.iter().map(|l| l.top).sum()
    }

    /// `log int Tr[E e^{tX_1} P(s) E e^{tX_n} P(s)^H] rho_0(s) ds - t * total_top`,
    /// `P(s) = prod_{k=2}^{n-1} E e^{(1+is)tX_k/2}`.
    fn log_master_scaled(&self, t: f64, quad: &QuadratureScheme) -> Result<f64> {
        let n = self.laws.len();
        let m1 = self.laws[0].mgf_scaled(Complex64::new(t, 0.0));
        let mn = self.laws[n - 1].mgf_scaled(Complex64::new(t, 0.0));
        let integrand = |p: Option<&CMat>| -> Result<f64> {
            let y = match p {
                None => &m1 * &mn,
                Some(p) => &m1 * p * &mn * p.adjoint(),
            };
            let tr: Complex64 = y.diagonal().iter().sum();
            if tr.im.abs() > 1e-8 * tr.norm() {
                return Err(Error::Numerical(format!(
                    "master-bound integrand has imaginary part {:.3e} (real {:.3e})",
                    tr.im, tr.re
                )));
            }
            Ok(tr.re)
        };
        let value = if n == 2 {
            integrand(None)?
        } else {
            quad.expectation(|s| {
                let z = Complex64::new(t / 2.0, t * s / 2.0);
                let mut p = self.laws[1].mgf_scaled(z);
                for law in &self.laws[2..n - 1] {
                    p *= law.mgf_scaled(z);
                }
                integrand(Some(&p))
            })?
        };
        if value <= 0.0 {
            return Err(Error::Numerical(format!("master-bound integral is not positive ({value:.3e})")));
        }
        Ok(value.ln())
    }

    /// Master bound for the sum of all models; one model reduces to [`TailProblem::laplace`].
    pub fn master(&self, zeta: f64, quad: &QuadratureScheme) -> Result<TailBoundReport> {
        Ok(self.master_many(&[zeta], quad)?.remove(0))
    }

    /// [`TailProblem::master`] at several thresholds, sharing the `t`-dependent integrals.
    pub fn master_many(&self, zetas: &[f64], quad: &QuadratureScheme) -> Result<Vec<TailBoundReport>> {
        if self.laws.len() == 1 {
            return zetas.iter().map(|&z| self.laplace(z)).collect();
        }
        if quad.theta != 0.0 {
            return Err(Error::Domain("master bound integrates against rho_0".into()));
        }
        let top = self.total_top();
        let mut memo: HashMap<u64, f64> = HashMap::new();
        let q = (self.laws.len() > 2).then(|| quad.summary());
        zetas
            .iter()
            .map(|&zeta| {
                let (t_star, log_raw) = self.opts.search.minimize(|t| {
                    let g = match memo.get(&t.to_bits()) {
                        Some(&g) => g,
                        None => {
                            let g = self.log_master_scaled(t, quad)?;
                            memo.insert(t.to_bits(), g);
                            g
                        }
                    };
                    Ok(t * (top - zeta) + g)
                })?;
                finish_report(&self.shape, zeta, t_star, log_raw, &self.opts, self.laws.len(), self.exact(), q.clone())
            })
            .collect()
    }
}

pub fn laplace_tail_bound(model: &RandomTensorModel, zeta: f64, opts: TailOptions) -> Result<TailBoundReport> {
    TailProblem::new(std::slice::from_ref(model), opts)?.laplace(zeta)
}

pub fn master_tail_bound(
    models: &[RandomTensorModel],
    zeta: f64,
    quad: &QuadratureScheme,
    opts: TailOptions,
) -> Result<TailBoundReport> {
    TailProblem::new(models, opts)?.master(zeta, quad)
}

/// `P(lambda_max(sum X_k) >= zeta)`, exact or sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTail {
    pub fraction: f64,
    /// Zero when the tail was enumerated exactly.
    pub n_trials: usize,
    pub exact: bool,
    /// One-sided 99% upper confidence bound (equals `fraction` when exact).
    pub clopper_pearson_upper: f64,
}

/// All outcomes of a finite joint support, with `lambda_min`/`lambda_max` of each sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSupport {
    pub probs: Vec<f64>,
    pub lambda_min: Vec<f64>,
    pub lambda_max: Vec<f64>,
}

impl JointSupport {
    /// `None` when a model lacks finite support or the product exceeds [`MAX_ENUMERATION`].
    pub fn enumerate(models: &[RandomTensorModel]) -> Result<Option<Self>> {
        common_model_shape(models)?;
        let mut supports = Vec::with_capacity(models.len());
        let mut total = 1usize;
        for m in models {
            let Some(s) = m.support() else { return Ok(None) };
            total = total.saturating_mul(s.len());
            if total > MAX_ENUMERATION {
                return Ok(None);
            }
            supports.push(s);
        }
        let mut probs = Vec::with_capacity(total);
        let mut lambda_min = Vec::with_capacity(total);
        let mut lambda_max = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut p = 1.0;
            let mut sum = DenseTensor::zeros(models[0].shape().clone());
            for s in supports.iter().rev() {
                let (pk, ref xk) = s[rem % s.len()];
                rem /= s.len();
                p *= pk;
                sum = sum.add(xk)?;
            }
            let e = Eigh::new(&sum)?;
            probs.push(p);
            lambda_min.push(e.min());
            lambda_max.push(e.max());
        }
        Ok(Some(Self { probs, lambda_min, lambda_max }))
    }

    pub fn tail(&self, zeta: f64) -> f64 {
        let cut = zeta - 1e-12 * (1.0 + zeta.abs());
        let t: f64 = self.probs.iter().zip(&self.lambda_max).filter(|(_, &l)| l >= cut).map(|(p, _)| p).sum();
        t.min(1.0)
    }

    /// `[min lambda_min, max lambda_max]` over the support.
    pub fn spectrum_range(&self) -> (f64, f64) {
        let lo = self.lambda_min.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.lambda_max.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// One-sided upper confidence bound for a binomial proportion (Clopper-Pearson).
pub fn clopper_pearson_upper(successes: usize, trials: usize, confidence: f64) -> f64 {
    if trials == 0 || successes >= trials {
        return 1.0;
    }
    let a = successes as f64 + 1.0;
    let b = (trials - successes) as f64;
    // upper end of the Beta(x + 1, n - x) quantile
    let (mut lo, mut hi) = (successes as f64 / trials as f64, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if statrs::function::beta::beta_reg(a, b, mid) < confidence {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

pub fn empirical_tail(models: &[RandomTensorModel], zeta: f64, n_trials: usize, seed: u64) -> Result<EmpiricalTail> {
    if let Some(js) = JointSupport::enumerate(models)? {
        let f = js.tail(zeta);
        return Ok(EmpiricalTail { fraction: f, n_trials: 0, exact: true, clopper_pearson_upper: f });
    }
    if n_trials == 0 {
        return Err(Error::Domain("empirical tail needs n_trials >= 1".into()));
    }
    let cut = zeta - 1e-12 * (1.0 + zeta.abs());
    let mut hits = 0usize;
    for trial in 0..n_trials {
        let mut sum = DenseTensor::zeros(models[0].shape().clone());
        for (k, m) in models.iter().enumerate() {
            // a stream family disjoint from the expectation samples
            sum = sum.add(&m.sample_with(&mut trial_rng(seed ^ 0x5eed_7a11, k, trial)))?;
        }
        if Eigh::new(&sum)?.max() >= cut {
            hits += 1;
        }
    }
    Ok(EmpiricalTail {
        fraction: hits as f64 / n_trials as f64,
        n_trials,
        exact: false,
        clopper_pearson_upper: clopper_pearson_upper(hits, n_trials, 0.99),
    })
}
