mod common;

use common::{noise_epoch, white};
use eegdiff_core::dsp::{epoch_signal, reject_artifacts, BandpassFilter, FilterSpec, EPOCH_LEN};
use eegdiff_core::{Channel, Difficulty, Event, Recording};
use proptest::prelude::*;

fn filter() -> BandpassFilter {
    BandpassFilter::design(&FilterSpec::default(), 256.0).unwrap()
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max) / scale
}

#[test]
fn filtering_is_linear() {
    let f = filter();
    let x = white(2048, 1);
    let y = white(2048, 2);
    let (a, b) = (2.5, -0.75);
    let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
    let fx = f.apply(&x).unwrap();
    let fy = f.apply(&y).unwrap();
    let expected: Vec<f64> = fx.iter().zip(&fy).map(|(p, q)| a * p + b * q).collect();
    assert!(max_rel(&f.apply(&mix).unwrap(), &expected) < 1e-9);
}

#[test]
fn zero_phase_filter_commutes_with_time_reversal() {
    let f = filter();
    let x = white(3000, 3);
    let mut rev = x.clone();
    rev.reverse();
    let mut out = f.apply(&rev).unwrap();
    out.reverse();
    assert!(max_rel(&out, &f.apply(&x).unwrap()) < 1e-9);
}

#[test]
fn spikes_are_counted_exactly() {
    let epochs: Vec<_> = (0..100)
        .map(|i| {
            let mut e = noise_epoch(&Channel::COHERENCE_SUBSET, 10.0, i);
            if i % 10 == 3 {
                e.samples[5 * EPOCH_LEN + 100] = 500.0;
                e.samples[5 * EPOCH_LEN + 101] = -500.0;
            }
            e
        })
        .collect();
    let (kept, dropped) = reject_artifacts(epochs, 200.0);
    assert_eq!(dropped, 10);
    assert_eq!(kept.len(), 90);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn epoching_partitions_each_event(lengths in proptest::collection::vec(1usize..3000, 1..5)) {
        let total: usize = lengths.iter().sum();
        let mut events = Vec::new();
        let mut onset = 0;
        for (k, &len) in lengths.iter().enumerate() {
            events.push(Event::new(onset, onset + len, Difficulty::ALL[k % 3]));
            onset += len;
        }
        let r = Recording {
            subject_id: "P".into(),
            sample_rate_hz: 256,
            channels: vec![Channel::O1],
            n_samples: total,
            samples: vec![0.0; total],
            events,
            mot_score: 0.5,
            vs_score: 0.5,
        };
        let epochs = epoch_signal(&r).unwrap();
        let kept: usize = lengths.iter().map(|l| l / EPOCH_LEN).sum();
        prop_assert_eq!(epochs.len(), kept);
        let remainder: usize = lengths.iter().map(|l| l % EPOCH_LEN).sum();
        prop_assert_eq!(epochs.len() * EPOCH_LEN + remainder, total);
    }
}
