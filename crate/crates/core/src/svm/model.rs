use alloc::vec;
use alloc::vec::Vec;

use super::kernel::{Kernel, KernelSpec};
use super::scaler::Scaler;
use super::smo::{solve_dual, DualSolution, SmoParams};
use crate::matrix::Matrix;
use crate::montage::Difficulty;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SvmError {
    #[error("training data needs examples of at least two classes")]
    DegenerateLabels,
    #[error("no training examples")]
    Empty,
    #[error("{rows} rows but {labels} labels")]
    LabelCount { rows: usize, labels: usize },
    #[error("binary labels must be -1 or +1, found {0}")]
    BadLabel(f64),
    #[error("expected {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(&'static str),
}

/// Hyperparameters shared by every binary machine.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct SvmConfig {
    pub kernel: KernelSpec,
    pub c: f64,
    pub tol: f64,
    pub max_passes: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { kernel: KernelSpec::default(), c: 1.0, tol: 1e-3, max_passes: 1000 }
    }
}

impl SvmConfig {
    fn params(&self) -> Result<SmoParams, SvmError> {
        if !(self.c > 0.0) {
            return Err(SvmError::InvalidHyperparameter("C must be positive"));
        }
        if !(self.tol > 0.0) {
            return Err(SvmError::InvalidHyperparameter("tol must be positive"));
        }
        if matches!(self.kernel.gamma, Some(g) if !(g > 0.0)) {
            return Err(SvmError::InvalidHyperparameter("gamma must be positive"));
        }
        Ok(SmoParams { c: self.c, tol: self.tol, max_passes: self.max_passes })
    }
}

/// A trained binary machine. Support vectors are stored standardized.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c: f64,
    pub scaler: Scaler,
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i y_i` for each support vector.
    pub alphas: Vec<f64>,
    pub bias: f64,
}

impl SvmModel {
    pub fn n_features(&self) -> usize {
        self.scaler.dim()
    }

    fn decision_scaled(&self, z: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.alphas)
            .map(|(sv, a)| a * self.kernel.eval(sv, z))
            .sum::<f64>()
            + self.bias
    }

    pub fn decision(&self, x: &[f64]) -> Result<f64, SvmError> {
        if x.len() != self.n_features() {
            return Err(SvmError::DimensionMismatch { expected: self.n_features(), actual: x.len() });
        }
        let mut z = vec![0.0; x.len()];
        self.scaler.transform_row(x, &mut z);
        Ok(self.decision_scaled(&z))
    }

    /// Primal weight vector in standardized space; `None` for non-linear kernels.
    pub fn primal_weights(&self) -> Option<Vec<f64>> {
        if self.kernel != Kernel::Linear {
            return None;
        }
        let mut w = vec![0.0; self.n_features()];
        for (sv, a) in self.support_vectors.iter().zip(&self.alphas) {
            for (wk, v) in w.iter_mut().zip(sv) {
                *wk += a * v;
            }
        }
        Some(w)
    }

    fn from_solution(kernel: Kernel, c: f64, scaler: Scaler, z: &Matrix, y: &[f64], sol: &DualSolution) -> Self {
        let mut support_vectors = Vec::new();
        let mut alphas = Vec::new();
        for (i, (&a, &yi)) in sol.alpha.iter().zip(y).enumerate() {
            if a > 0.0 {
                support_vectors.push(z.row(i).to_vec());
                alphas.push(a * yi);
            }
        }
        Self { kernel, c, scaler, support_vectors, alphas, bias: sol.bias }
    }
}

/// A binary model together with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmFit {
    pub model: SvmModel,
    /// `false` when the sweep budget ran out; the model is then the last iterate.
    pub converged: bool,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
}

fn gram(kernel: &Kernel, z: &Matrix) -> Vec<f64> {
    let n = z.n_rows();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(z.row(i), z.row(j));
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Trains a binary SVM on labels `y ∈ {−1, +1}`. Features are standardized
/// with statistics stored in the model.
pub fn train_smo(x: &Matrix, y: &[f64], cfg: &SvmConfig) -> Result<SvmFit, SvmError> {
    let params = cfg.params()?;
    if x.n_rows() == 0 {
        return Err(SvmError::Empty);
    }
    if x.n_rows() != y.len() {
        return Err(SvmError::LabelCount { rows: x.n_rows(), labels: y.len() });
    }
    if let Some(&bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(SvmError::BadLabel(bad));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(SvmError::DegenerateLabels);
    }
    let scaler = Scaler::fit(x);
    let z = scaler.transform(x);
    let kernel = cfg.kernel.resolve(x.n_cols());
    let sol = solve_dual(&gram(&kernel, &z), y, &params);
    Ok(SvmFit {
        model: SvmModel::from_solution(kernel, cfg.c, scaler, &z, y, &sol),
        converged: sol.converged,
        iterations: sol.iterations,
        objective_trace: sol.objective_trace,
    })
}

/// One binary machine per difficulty class, each separating it from the rest.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MulticlassSvm {
    pub models: Vec<SvmModel>,
    /// Whether each binary solve converged.
    pub converged: Vec<bool>,
}

impl MulticlassSvm {
    pub fn n_features(&self) -> usize {
        self.models[0].n_features()
    }

    /// Label with the largest one-vs-rest decision value; ties go to the lower class.
    pub fn predict(&self, x: &[f64]) -> Result<(Difficulty, [f64; 3]), SvmError> {
        let mut values = [0.0; 3];
        for (v, m) in values.iter_mut().zip(&self.models) {
            *v = m.decision(x)?;
        }
        Ok((argmax_label(&values), values))
    }
}

pub(crate) fn argmax_label(values: &[f64; 3]) -> Difficulty {
    let mut best = 0;
    for c in 1..3 {
        if values[c] > values[best] {
            best = c;
        }
    }
    Difficulty::from_index(best).expect("three classes")
}

/// Trains the three one-vs-rest machines, sharing one kernel matrix. A class
/// absent from the training data gets a constant machine that always answers −1.
pub fn train_multiclass(x: &Matrix, labels: &[Difficulty], cfg: &SvmConfig) -> Result<MulticlassSvm, SvmError> {
    let params = cfg.params()?;
    if x.n_rows() == 0 {
        return Err(SvmError::Empty);
    }
    if x.n_rows() != labels.len() {
        return Err(SvmError::LabelCount { rows: x.n_rows(), labels: labels.len() });
    }
    let present = Difficulty::ALL.iter().filter(|c| labels.contains(c)).count();
    if present < 2 {
        return Err(SvmError::DegenerateLabels);
    }
    let scaler = Scaler::fit(x);
    let z = scaler.transform(x);
    let kernel = cfg.kernel.resolve(x.n_cols());
    let k = gram(&kernel, &z);
    let mut models = Vec::with_capacity(3);
    let mut converged = Vec::with_capacity(3);
    for class in Difficulty::ALL {
        if !labels.contains(&class) {
            models.push(SvmModel {
                kernel,
                c: cfg.c,
                scaler: scaler.clone(),
                support_vectors: Vec::new(),
                alphas: Vec::new(),
                bias: -1.0,
            });
            converged.push(true);
            continue;
        }
        let y: Vec<f64> = labels.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
        let sol = solve_dual(&k, &y, &params);
        models.push(SvmModel::from_solution(kernel, cfg.c, scaler.clone(), &z, &y, &sol));
        converged.push(sol.converged);
    }
    Ok(MulticlassSvm { models, converged })
}
