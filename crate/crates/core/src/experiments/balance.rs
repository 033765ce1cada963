use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::ExperimentError;
use crate::montage::Difficulty;
use crate::rng::{derive_index, seeded};

/// Undersamples every present class to the minority-class count, without
/// replacement. Returns the kept positions in their original order.
pub fn balance_classes(labels: &[Difficulty], seed: u64) -> Result<Vec<usize>, ExperimentError> {
    let members: Vec<Vec<usize>> = Difficulty::ALL
        .iter()
        .map(|&d| (0..labels.len()).filter(|&i| labels[i] == d).collect())
        .collect();
    let target = members.iter().map(Vec::len).filter(|&n| n > 0).min().ok_or(ExperimentError::EmptyClass)?;
    let mut kept = Vec::with_capacity(target * Difficulty::COUNT);
    for (class, idx) in members.iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        let mut pool = idx.clone();
        pool.shuffle(&mut seeded(derive_index(seed, class as u64)));
        kept.extend_from_slice(&pool[..target]);
    }
    kept.sort_unstable();
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(counts: [usize; 3]) -> Vec<Difficulty> {
        let mut out = Vec::new();
        for (c, &n) in counts.iter().enumerate() {
            out.extend(core::iter::repeat_n(Difficulty::ALL[c], n));
        }
        out
    }

    fn counts(l: &[Difficulty], kept: &[usize]) -> [usize; 3] {
        let mut c = [0; 3];
        for &i in kept {
            c[l[i].index()] += 1;
        }
        c
    }

    #[test]
    fn undersamples_to_minority() {
        let l = labels([100, 80, 60]);
        let kept = balance_classes(&l, 1).unwrap();
        assert_eq!(counts(&l, &kept), [60, 60, 60]);
        assert!(kept.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn balanced_input_is_unchanged() {
        let l = labels([10, 10, 10]);
        assert_eq!(balance_classes(&l, 3).unwrap(), (0..30).collect::<Vec<_>>());
    }

    #[test]
    fn seed_changes_subset_not_counts() {
        let l = labels([100, 60, 60]);
        let a = balance_classes(&l, 1).unwrap();
        let b = balance_classes(&l, 2).unwrap();
        assert_eq!(counts(&l, &a), counts(&l, &b));
        assert_ne!(a, b);
        assert_eq!(a, balance_classes(&l, 1).unwrap());
    }

    #[test]
    fn absent_class_is_ignored_and_empty_input_fails() {
        let l = labels([5, 0, 3]);
        assert_eq!(counts(&l, &balance_classes(&l, 0).unwrap()), [3, 0, 3]);
        assert_eq!(balance_classes(&[], 0), Err(ExperimentError::EmptyClass));
    }
}
