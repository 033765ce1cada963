mod common;

use common::{white, NOISE_COHERENCE_BASELINE};
use eegdiff_core::dsp::{bandpass_filter, epoch_signal, FilterSpec};
use eegdiff_core::experiments::{synth_generate, SynthConfig};
use eegdiff_core::matrix::Matrix;
use eegdiff_core::nn::{Cnn, Mode, NetworkSpec};
use eegdiff_core::selection::{rfe_once, rfe_stable, RfeConfig};
use eegdiff_core::spectral::{BandSpec, FeatureExtractor, WelchSpec};
use eegdiff_core::{Channel, Difficulty};

fn class_zero_features() -> (FeatureExtractor, Vec<Vec<f64>>) {
    let cfg = SynthConfig { n_subjects: 2, epochs_per_class_per_subject: 50, seed: 3, ..SynthConfig::default() };
    let ex = FeatureExtractor::new(&Channel::COHERENCE_SUBSET, &BandSpec::defaults(), WelchSpec::default()).unwrap();
    let mut rows = Vec::new();
    for r in synth_generate(&cfg).unwrap() {
        let filtered = bandpass_filter(&r, &FilterSpec::default()).unwrap();
        for e in epoch_signal(&filtered).unwrap() {
            if e.difficulty == Difficulty::None {
                rows.push(ex.extract(&e).unwrap());
            }
        }
    }
    (ex, rows)
}

#[test]
fn planted_pair_dominates_class_zero_epochs() {
    let (ex, rows) = class_zero_features();
    assert_eq!(rows.len(), 100);
    let layout = ex.layout();
    let target = layout.position(Channel::Pz, Channel::O2, "low_alpha").unwrap();
    let other = layout.position(Channel::F3, Channel::C3, "low_beta").unwrap();
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / rows.len() as f64).collect();
    let argmax = (0..d).max_by(|&a, &b| mean[a].total_cmp(&mean[b])).unwrap();
    assert_eq!(layout.name(argmax), layout.name(target));
    assert!(mean[target] > 0.9, "{}", mean[target]);
    // single epochs use three Welch segments, so a noise feature occasionally wins
    let wins = rows
        .iter()
        .filter(|row| (0..d).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap() == target)
        .count();
    assert!(wins >= 90, "{wins}");
    assert!(rows.iter().all(|row| row[target] > 0.9));
    let mean_other = rows.iter().map(|r| r[other]).sum::<f64>() / rows.len() as f64;
    assert!(mean_other < NOISE_COHERENCE_BASELINE + 0.1, "{mean_other}");
}

fn noise_matrix(n: usize, d: usize, seed: u64) -> (Matrix, Vec<Difficulty>) {
    let x = Matrix::from_vec(n, d, white(n * d, seed)).unwrap();
    let y = (0..n).map(|i| Difficulty::ALL[i % 3]).collect();
    (x, y)
}

#[test]
fn pure_noise_has_no_stable_winner() {
    let cfg = RfeConfig::default();
    for trial in 0..20 {
        let (x, y) = noise_matrix(300, 468, 100 + trial);
        let result = rfe_stable(&x, &y, &RfeConfig { seed: trial, ..cfg }).unwrap();
        let top = result.ranked[0].1;
        assert!(top <= 7, "trial {trial}: top frequency {top}");
    }
}

#[test]
fn rfe_is_permutation_equivariant_and_scale_invariant() {
    let (mut x, y) = noise_matrix(90, 12, 7);
    for i in 0..90 {
        x.set(i, 4, y[i].index() as f64 + 0.1 * x.get(i, 4));
    }
    let cfg = RfeConfig { target_k: 3, ..RfeConfig::default() };
    let base = rfe_once(&x, &y, &cfg).unwrap();

    let perm: Vec<usize> = (0..12).rev().collect();
    let permuted = x.select_cols(&perm);
    let mut mapped: Vec<usize> = rfe_once(&permuted, &y, &cfg).unwrap().iter().map(|&j| perm[j]).collect();
    mapped.sort_unstable();
    assert_eq!(mapped, base);

    let mut scaled = x.clone();
    for i in 0..90 {
        scaled.set(i, 4, 1000.0 * x.get(i, 4));
        scaled.set(i, 9, 0.01 * x.get(i, 9));
    }
    assert_eq!(rfe_once(&scaled, &y, &cfg).unwrap(), base);
}

#[test]
fn softmax_is_normalized_on_random_inputs() {
    let spec = NetworkSpec::default();
    let calib = white(spec.channels * spec.samples, 1);
    let net = Cnn::initialize(spec, 2, &[&calib]).unwrap();
    for k in 0..1000u64 {
        let scale = 0.1 + (k % 50) as f64;
        let x: Vec<f64> = white(spec.channels * spec.samples, 10 + k).iter().map(|v| v * scale).collect();
        let p = net.forward(&x, Mode::Eval).unwrap();
        assert_eq!(p.len(), 3);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
    }
}

#[test]
fn dropout_preserves_expectation_of_linear_readout() {
    // log-probability differences are linear in the dropped activations
    let spec = NetworkSpec::reduced();
    let x = white(spec.channels * spec.samples, 5);
    let net = Cnn::initialize(spec, 6, &[&x]).unwrap();
    let readout = |p: &[f64]| p[1].ln() - p[0].ln();
    let eval = readout(&net.forward(&x, Mode::Eval).unwrap());
    let n = 20_000;
    let draws: Vec<f64> = (0..n).map(|s| readout(&net.forward(&x, Mode::Train { seed: s }).unwrap())).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let sd = (draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    assert!((mean - eval).abs() < 4.0 * sd / (n as f64).sqrt(), "mean {mean} eval {eval} sd {sd}");
}
