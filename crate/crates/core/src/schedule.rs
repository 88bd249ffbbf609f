//! Setting labels and per-slot setting schedules.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Alice's two analyzer settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AliceSetting {
    Alpha,
    AlphaPrime,
}

/// Bob's two analyzer settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BobSetting {
    Beta,
    BetaPrime,
}

/// One joint setting choice for a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SettingPair {
    pub alice: AliceSetting,
    pub bob: BobSetting,
}

impl SettingPair {
    pub const fn new(alice: AliceSetting, bob: BobSetting) -> Self {
        SettingPair { alice, bob }
    }

    /// Canonical quarter order: (α,β'), (α,β), (α',β), (α',β').
    pub const CANONICAL: [SettingPair; 4] = [
        SettingPair::new(AliceSetting::Alpha, BobSetting::BetaPrime),
        SettingPair::new(AliceSetting::Alpha, BobSetting::Beta),
        SettingPair::new(AliceSetting::AlphaPrime, BobSetting::Beta),
        SettingPair::new(AliceSetting::AlphaPrime, BobSetting::BetaPrime),
    ];

    /// Position of this pair in the canonical quarter order.
    pub fn quarter_index(self) -> usize {
        match (self.alice, self.bob) {
            (AliceSetting::Alpha, BobSetting::BetaPrime) => 0,
            (AliceSetting::Alpha, BobSetting::Beta) => 1,
            (AliceSetting::AlphaPrime, BobSetting::Beta) => 2,
            (AliceSetting::AlphaPrime, BobSetting::BetaPrime) => 3,
        }
    }
}

impl fmt::Display for SettingPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = match self.alice {
            AliceSetting::Alpha => "alpha",
            AliceSetting::AlphaPrime => "alpha'",
        };
        let b = match self.bob {
            BobSetting::Beta => "beta",
            BobSetting::BetaPrime => "beta'",
        };
        write!(f, "({a}, {b})")
    }
}

/// Textual names for the four settings, plus optional analyzer angles.
///
/// Angle order matches the setting order (α, α', β, β'), in degrees,
/// restricted to [0°, 180°) as polarization directions.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingLabels {
    pub alice: [String; 2],
    pub bob: [String; 2],
    pub angles_deg: Option<[f64; 4]>,
}

impl SettingLabels {
    pub fn new(alice: [String; 2], bob: [String; 2], angles_deg: Option<[f64; 4]>) -> Result<Self> {
        if alice[0] == alice[1] || bob[0] == bob[1] {
            return Err(Error::PairAbsent(String::from("labels must be distinct")));
        }
        if let Some(angles) = angles_deg {
            for a in angles {
                if !(0.0..180.0).contains(&a) {
                    return Err(Error::InvalidAngle(a));
                }
            }
        }
        Ok(SettingLabels { alice, bob, angles_deg })
    }

    pub fn alice_label(&self, s: AliceSetting) -> &str {
        match s {
            AliceSetting::Alpha => &self.alice[0],
            AliceSetting::AlphaPrime => &self.alice[1],
        }
    }

    pub fn bob_label(&self, s: BobSetting) -> &str {
        match s {
            BobSetting::Beta => &self.bob[0],
            BobSetting::BetaPrime => &self.bob[1],
        }
    }

    pub fn parse_alice(&self, label: &str) -> Option<AliceSetting> {
        if label == self.alice[0] {
            Some(AliceSetting::Alpha)
        } else if label == self.alice[1] {
            Some(AliceSetting::AlphaPrime)
        } else {
            None
        }
    }

    pub fn parse_bob(&self, label: &str) -> Option<BobSetting> {
        if label == self.bob[0] {
            Some(BobSetting::Beta)
        } else if label == self.bob[1] {
            Some(BobSetting::BetaPrime)
        } else {
            None
        }
    }
}

impl Default for SettingLabels {
    fn default() -> Self {
        SettingLabels {
            alice: [String::from("alpha"), String::from("alpha'")],
            bob: [String::from("beta"), String::from("beta'")],
            angles_deg: None,
        }
    }
}

/// Per-slot assignment of one setting pair, for `len()` consecutive slots.
///
/// Slot indices are 0-based everywhere inside the library; reports may
/// render them 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SettingSchedule {
    slots: Vec<SettingPair>,
}

impl SettingSchedule {
    pub fn new(slots: Vec<SettingPair>) -> Self {
        SettingSchedule { slots }
    }

    /// Block schedule in canonical quarter order with `quarter_len` slots
    /// per setting pair.
    pub fn blocks(quarter_len: usize) -> Self {
        let mut slots = Vec::with_capacity(4 * quarter_len);
        for pair in SettingPair::CANONICAL {
            for _ in 0..quarter_len {
                slots.push(pair);
            }
        }
        SettingSchedule { slots }
    }

    /// Single fixed setting pair for all `n` slots.
    pub fn fixed(pair: SettingPair, n: usize) -> Self {
        SettingSchedule { slots: alloc::vec![pair; n] }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn pair_at(&self, slot: usize) -> Option<SettingPair> {
        self.slots.get(slot).copied()
    }

    pub fn slots(&self) -> &[SettingPair] {
        &self.slots
    }

    /// Slot indices carrying `pair`, in increasing order.
    pub fn slots_with(&self, pair: SettingPair) -> Vec<usize> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, p)| **p == pair)
            .map(|(i, _)| i)
            .collect()
    }

    /// The setting pairs that occur, in canonical order.
    pub fn pairs_present(&self) -> Vec<SettingPair> {
        SettingPair::CANONICAL
            .into_iter()
            .filter(|p| self.slots.contains(p))
            .collect()
    }

    pub fn has_all_pairs(&self) -> bool {
        self.pairs_present().len() == 4
    }

    /// Number of slots per pair when all present pairs carry the same
    /// count, `None` otherwise.
    pub fn balanced_quarter_len(&self) -> Option<usize> {
        let present = self.pairs_present();
        if present.is_empty() {
            return Some(0);
        }
        let counts: Vec<usize> = present.iter().map(|p| self.slots_with(*p).len()).collect();
        if counts.windows(2).all(|w| w[0] == w[1]) {
            Some(counts[0])
        } else {
            None
        }
    }

    /// True when the present pairs occupy contiguous spans ordered
    /// canonically: (α,β'), (α,β), (α',β), (α',β').
    pub fn is_block_form(&self) -> bool {
        let mut last_quarter = None;
        for pair in &self.slots {
            let q = pair.quarter_index();
            match last_quarter {
                Some(prev) if q < prev => return false,
                _ => last_quarter = Some(q),
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_blocks_are_block_form_and_balanced() {
        let s = SettingSchedule::blocks(3);
        assert_eq!(s.len(), 12);
        assert!(s.is_block_form());
        assert!(s.has_all_pairs());
        assert_eq!(s.balanced_quarter_len(), Some(3));
    }

    #[test]
    fn out_of_order_blocks_are_rejected() {
        let mut slots = Vec::new();
        slots.extend(SettingSchedule::blocks(1).slots().iter().rev().copied());
        let s = SettingSchedule::new(slots);
        assert!(!s.is_block_form());
    }

    #[test]
    fn single_pair_schedule_is_block_form() {
        let s = SettingSchedule::fixed(SettingPair::CANONICAL[1], 5);
        assert!(s.is_block_form());
        assert_eq!(s.balanced_quarter_len(), Some(5));
        assert!(!s.has_all_pairs());
    }

    #[test]
    fn labels_reject_out_of_range_angles() {
        let r = SettingLabels::new(
            [String::from("a"), String::from("a'")],
            [String::from("b"), String::from("b'")],
            Some([0.0, 45.0, 22.5, 180.0]),
        );
        assert!(matches!(r, Err(Error::InvalidAngle(_))));
    }
}
