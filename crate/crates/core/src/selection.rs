//! Recursive feature elimination driven by linear one-vs-rest SVM weights,
//! stabilized by voting over bootstrap repeats. The linear machines are
//! trained in the primal by dual coordinate descent, which stays fast when
//! the feature count approaches the sample count.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::matrix::{dot, Matrix};
use crate::montage::Difficulty;
use crate::rng::{derive_index, seeded};
use crate::svm::Scaler;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct RfeConfig {
    pub target_k: usize,
    /// Fraction of the surviving features removed per round (at least one).
    pub drop_fraction: f64,
    pub n_repeats: usize,
    pub seed: u64,
    /// Box constraint of the inner linear SVMs.
    pub c: f64,
}

impl Default for RfeConfig {
    fn default() -> Self {
        Self { target_k: 5, drop_fraction: 0.1, n_repeats: 10, seed: 0, c: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RfeError {
    #[error("feature selection needs at least two classes")]
    DegenerateLabels,
    #[error("{rows} rows but {labels} labels")]
    LabelCount { rows: usize, labels: usize },
    #[error("target of {target_k} features is invalid for {n_features} features")]
    BadTarget { target_k: usize, n_features: usize },
    #[error("drop fraction {0} must lie in (0, 1)")]
    BadDropFraction(f64),
    #[error("at least one repeat is required")]
    NoRepeats,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionResult {
    /// `(feature, number of repeats it survived)`, most frequent first,
    /// lower index first on ties; only features that survived at least once.
    pub ranked: Vec<(usize, usize)>,
    /// The `target_k` most frequent features, in ranked order.
    pub selected: Vec<usize>,
}

fn validate(x: &Matrix, y: &[Difficulty], cfg: &RfeConfig) -> Result<(), RfeError> {
    if x.n_rows() != y.len() {
        return Err(RfeError::LabelCount { rows: x.n_rows(), labels: y.len() });
    }
    if cfg.target_k == 0 || cfg.target_k > x.n_cols() {
        return Err(RfeError::BadTarget { target_k: cfg.target_k, n_features: x.n_cols() });
    }
    if !(cfg.drop_fraction > 0.0 && cfg.drop_fraction < 1.0) {
        return Err(RfeError::BadDropFraction(cfg.drop_fraction));
    }
    if Difficulty::ALL.iter().filter(|c| y.contains(c)).count() < 2 {
        return Err(RfeError::DegenerateLabels);
    }
    Ok(())
}

/// Stopping threshold on the projected-gradient spread of the inner solver.
const DCD_TOL: f64 = 0.1;
/// Sweep budget of the inner solver.
const DCD_MAX_SWEEPS: usize = 2000;

/// Linear soft-margin SVM by dual coordinate descent with shrinking, the bias
/// folded in as a constant unit feature. `rows` is row-major `n × d`;
/// `alpha` carries the multipliers in and out so consecutive rounds can
/// warm-start. Coordinates are visited in a fixed-seed random order, so the
/// result is deterministic. Returns the feature weights (bias excluded).
fn linear_weights(rows: &[f64], d: usize, y: &[f64], c: f64, alpha: &mut [f64]) -> Vec<f64> {
    let n = y.len();
    let mut w = vec![0.0; d + 1];
    let mut diag = vec![0.0; n];
    for i in 0..n {
        let x = &rows[i * d..(i + 1) * d];
        diag[i] = dot(x, x) + 1.0;
        if alpha[i] != 0.0 {
            let s = alpha[i] * y[i];
            for (wk, xk) in w.iter_mut().zip(x) {
                *wk += s * xk;
            }
            w[d] += s;
        }
    }
    let mut rng = seeded(n as u64);
    let mut index: Vec<usize> = (0..n).collect();
    let mut active = n;
    let (mut pg_max_old, mut pg_min_old) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..DCD_MAX_SWEEPS {
        index[..active].shuffle(&mut rng);
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut s = 0;
        while s < active {
            let i = index[s];
            let x = &rows[i * d..(i + 1) * d];
            let g = y[i] * (dot(&w[..d], x) + w[d]) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                if g > pg_max_old {
                    active -= 1;
                    index.swap(s, active);
                    continue;
                }
                g.min(0.0)
            } else if alpha[i] >= c {
                if g < pg_min_old {
                    active -= 1;
                    index.swap(s, active);
                    continue;
                }
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg.abs() > 1e-12 {
                let next = (alpha[i] - g / diag[i]).clamp(0.0, c);
                let step = (next - alpha[i]) * y[i];
                alpha[i] = next;
                for (wk, xk) in w[..d].iter_mut().zip(x) {
                    *wk += step * xk;
                }
                w[d] += step;
            }
            s += 1;
        }
        if pg_max - pg_min <= DCD_TOL {
            if active == n {
                break;
            }
            // converged on the shrunk set: recheck everything
            active = n;
            pg_max_old = f64::INFINITY;
            pg_min_old = f64::NEG_INFINITY;
            continue;
        }
        pg_max_old = if pg_max <= 0.0 { f64::INFINITY } else { pg_max };
        pg_min_old = if pg_min >= 0.0 { f64::NEG_INFINITY } else { pg_min };
    }
    w.truncate(d);
    w
}

/// One elimination run on standardized features; returns the surviving
/// feature indices in increasing order.
pub fn rfe_once(x: &Matrix, y: &[Difficulty], cfg: &RfeConfig) -> Result<Vec<usize>, RfeError> {
    validate(x, y, cfg)?;
    let n = x.n_rows();
    let d = x.n_cols();
    let mut surviving: Vec<usize> = (0..d).collect();
    if cfg.target_k == d {
        return Ok(surviving);
    }

    let z = Scaler::fit(x).transform(x);
    let classes: Vec<Difficulty> = Difficulty::ALL.iter().copied().filter(|c| y.contains(c)).collect();
    let targets: Vec<Vec<f64>> = classes
        .iter()
        .map(|&c| y.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect())
        .collect();
    // each round starts from the previous round's multipliers
    let mut alphas: Vec<Vec<f64>> = vec![vec![0.0; n]; targets.len()];

    while surviving.len() > cfg.target_k {
        let k = surviving.len();
        let rows = z.select_cols(&surviving);
        let mut score = vec![0.0; k];
        for (t, alpha) in targets.iter().zip(alphas.iter_mut()) {
            let w = linear_weights(rows.as_slice(), k, t, cfg.c, alpha);
            for (s, wf) in score.iter_mut().zip(&w) {
                *s += wf * wf;
            }
        }

        let excess = k - cfg.target_k;
        let n_drop = (libm::ceil(cfg.drop_fraction * k as f64) as usize).clamp(1, excess);
        // weakest first; on equal scores the higher index goes first
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| score[a].total_cmp(&score[b]).then(surviving[b].cmp(&surviving[a])));
        let mut removed: Vec<usize> = order[..n_drop].iter().map(|&p| surviving[p]).collect();
        removed.sort_unstable();
        surviving.retain(|f| removed.binary_search(f).is_err());
    }
    Ok(surviving)
}

/// Row indices of a full-size bootstrap resample (with replacement).
pub fn bootstrap_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = seeded(seed);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Seed of the bootstrap resample used by repeat `r`.
pub fn repeat_seed(cfg: &RfeConfig, r: usize) -> u64 {
    derive_index(cfg.seed, r as u64)
}

/// Runs [`rfe_once`] on `n_repeats` bootstrap resamples and keeps the
/// `target_k` features that survived most often.
pub fn rfe_stable(x: &Matrix, y: &[Difficulty], cfg: &RfeConfig) -> Result<SelectionResult, RfeError> {
    validate(x, y, cfg)?;
    if cfg.n_repeats == 0 {
        return Err(RfeError::NoRepeats);
    }
    let mut counts = vec![0usize; x.n_cols()];
    for r in 0..cfg.n_repeats {
        let rows = bootstrap_indices(x.n_rows(), repeat_seed(cfg, r));
        let xb = x.select_rows(&rows);
        let yb: Vec<Difficulty> = rows.iter().map(|&i| y[i]).collect();
        for f in rfe_once(&xb, &yb, cfg)? {
            counts[f] += 1;
        }
    }
    Ok(tally(&counts, cfg.target_k))
}

/// Ranks features by survival count and takes the top `target_k`.
pub fn tally(counts: &[usize], target_k: usize) -> SelectionResult {
    let mut ranked: Vec<(usize, usize)> = counts.iter().copied().enumerate().filter(|&(_, c)| c > 0).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let selected = ranked.iter().take(target_k).map(|&(f, _)| f).collect();
    SelectionResult { ranked, selected }
}
