//! Electrode names of the 20-channel 10-20 montage and the task-difficulty labels.

use core::fmt;
use core::str::FromStr;

/// One electrode of the 20-channel montage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[repr(u8)]
pub enum Channel {
    O1,
    O2,
    P4,
    POz,
    P3,
    Pz,
    Cz,
    C3,
    C4,
    Fz,
    F3,
    F4,
    T6,
    T4,
    F8,
    Fp1,
    Fp2,
    F7,
    T5,
    T3,
}

impl Channel {
    /// The full montage in canonical order.
    pub const ALL: [Channel; 20] = [
        Channel::O1,
        Channel::O2,
        Channel::P4,
        Channel::POz,
        Channel::P3,
        Channel::Pz,
        Channel::Cz,
        Channel::C3,
        Channel::C4,
        Channel::Fz,
        Channel::F3,
        Channel::F4,
        Channel::T6,
        Channel::T4,
        Channel::F8,
        Channel::Fp1,
        Channel::Fp2,
        Channel::F7,
        Channel::T5,
        Channel::T3,
    ];

    /// Electrodes over frontal, parietal, motor, occipital and temporal sites
    /// used for coherence features, in the order that fixes pair naming.
    pub const COHERENCE_SUBSET: [Channel; 13] = [
        Channel::T4,
        Channel::T3,
        Channel::O1,
        Channel::P3,
        Channel::Pz,
        Channel::F3,
        Channel::Fz,
        Channel::F4,
        Channel::C4,
        Channel::P4,
        Channel::C3,
        Channel::Cz,
        Channel::O2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::O1 => "O1",
            Channel::O2 => "O2",
            Channel::P4 => "P4",
            Channel::POz => "POz",
            Channel::P3 => "P3",
            Channel::Pz => "Pz",
            Channel::Cz => "Cz",
            Channel::C3 => "C3",
            Channel::C4 => "C4",
            Channel::Fz => "Fz",
            Channel::F3 => "F3",
            Channel::F4 => "F4",
            Channel::T6 => "T6",
            Channel::T4 => "T4",
            Channel::F8 => "F8",
            Channel::Fp1 => "Fp1",
            Channel::Fp2 => "Fp2",
            Channel::F7 => "F7",
            Channel::T5 => "T5",
            Channel::T3 => "T3",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown channel label {0:?}")]
pub struct UnknownChannel(pub alloc::string::String);

impl FromStr for Channel {
    type Err = UnknownChannel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Channel::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| UnknownChannel(s.into()))
    }
}

/// Mission difficulty: no adversary, static adversarial team, dynamic adversarial team.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[repr(u8)]
pub enum Difficulty {
    None = 0,
    Static = 1,
    Dynamic = 2,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::None, Difficulty::Static, Difficulty::Dynamic];
    pub const COUNT: usize = 3;

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Difficulty::None => "None",
            Difficulty::Static => "Static",
            Difficulty::Dynamic => "Dynamic",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip_through_names() {
        for c in Channel::ALL {
            assert_eq!(c.name().parse::<Channel>().unwrap(), c);
        }
        assert!("XX".parse::<Channel>().is_err());
    }

    #[test]
    fn coherence_subset_has_no_duplicates() {
        let mut seen = Channel::COHERENCE_SUBSET.to_vec();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 13);
    }
}
