mod common;

use common::{noise_epoch, sine, white, NOISE_COHERENCE_BASELINE};
use eegdiff_core::dsp::EPOCH_LEN;
use eegdiff_core::spectral::{coherence, extract_features, welch_spectra, BandSpec, WelchSpec};
use eegdiff_core::Channel;
use proptest::prelude::*;

const FS: f64 = 256.0;

fn coh(x: &[f64], y: &[f64]) -> Vec<f64> {
    let s = welch_spectra(x, y, &WelchSpec::default(), FS).unwrap();
    coherence(&s.sxx, &s.syy, &s.sxy)
}

#[test]
fn identical_signals_have_unit_coherence_at_every_powered_bin() {
    let x = white(EPOCH_LEN, 1);
    let s = welch_spectra(&x, &x, &WelchSpec::default(), FS).unwrap();
    for (k, c) in coherence(&s.sxx, &s.syy, &s.sxy).iter().enumerate() {
        if s.sxx[k] > 1e-30 {
            assert!((c - 1.0).abs() < 1e-9, "bin {k}: {c}");
        }
    }
}

#[test]
fn independent_noise_matches_monte_carlo_baseline() {
    let n = 400;
    let mean: f64 = (0..n)
        .map(|e| {
            let c = coh(&white(EPOCH_LEN, 2 * e), &white(EPOCH_LEN, 2 * e + 1));
            c[1..128].iter().sum::<f64>() / 127.0
        })
        .sum::<f64>()
        / n as f64;
    assert!((mean - NOISE_COHERENCE_BASELINE).abs() < 0.05, "{mean}");
    // tighter than the acceptance band: 400 epochs give a standard error near 1e-3
    assert!((mean - NOISE_COHERENCE_BASELINE).abs() < 0.006, "{mean}");
}

#[test]
fn tone_with_weak_noise_is_coherent_at_nine_hz() {
    for e in 0..100u64 {
        let x = sine(9.0, 10.0, 0.1 * e as f64, EPOCH_LEN, FS);
        let y: Vec<f64> = x.iter().zip(white(EPOCH_LEN, 1000 + e)).map(|(a, n)| a + n).collect();
        assert!(coh(&x, &y)[9] > 0.9);
    }
}

#[test]
fn feature_vector_is_symmetric_scale_invariant_and_deterministic() {
    let bands = BandSpec::defaults();
    let spec = WelchSpec::default();
    let e = noise_epoch(&Channel::COHERENCE_SUBSET, 10.0, 3);
    let a = extract_features(&e, &Channel::COHERENCE_SUBSET, &bands, &spec).unwrap().values;
    let b = extract_features(&e, &Channel::COHERENCE_SUBSET, &bands, &spec).unwrap().values;
    assert_eq!(a, b);

    let mut scaled = e.clone();
    for v in &mut scaled.samples[..EPOCH_LEN] {
        *v *= 8.0;
    }
    let s = extract_features(&scaled, &Channel::COHERENCE_SUBSET, &bands, &spec).unwrap().values;
    for (p, q) in a.iter().zip(&s) {
        assert!((p - q).abs() < 1e-9);
    }

    let x = white(EPOCH_LEN, 4);
    let y = white(EPOCH_LEN, 5);
    assert_eq!(coh(&x, &y), coh(&y, &x));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coherence_is_bounded(seed in any::<u64>(), scale in 1e-3f64..1e3) {
        let x: Vec<f64> = white(EPOCH_LEN, seed).iter().map(|v| v * scale).collect();
        let y: Vec<f64> = white(EPOCH_LEN, seed ^ 0xABCD).iter().zip(&x).map(|(n, s)| n + 0.5 * s).collect();
        for c in coh(&x, &y) {
            prop_assert!((0.0..=1.0).contains(&c));
        }
    }
}
