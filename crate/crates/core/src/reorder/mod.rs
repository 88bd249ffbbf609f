//! Legitimate-reordering feasibility.
//!
//! A *legitimate* reordering permutes slots within fixed-setting blocks
//! and must carry both stations' outcomes together, so joint pair counts
//! (the physically real correlations) never change. This module decides
//! whether a factual table can be legitimately reordered — after
//! discarding at most a budgeted number of slots per quarter — so that
//! the Sica condition holds, and produces the explicit reordering and
//! condensed table when it can.
//!
//! The decision reduces to an integer feasibility problem: only the
//! within-quarter pair multisets matter once arbitrary within-block
//! permutations are allowed, so a reordering exists exactly when some
//! multiset of joint columns (a, b, a', b') projects onto all four
//! observed quarter profiles. See [`solver`] for the exact algorithms.

mod brute;
mod solver;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::outcome::Outcome;
use crate::schedule::SettingPair;
use crate::table::{CondensedTable, QuarterProfile, RunTable};
use crate::{Error, Result};

pub use brute::brute_force_feasibility;

/// Counts of joint outcome columns plus per-quarter discard counts.
///
/// `counts[(u, v, u', v')]` is the number of condensed columns carrying
/// those four outcomes; `discards[q][i][j]` the number of slots of pair
/// type (i, j) dropped from quarter `q` (canonical order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointAssignment {
    counts: BTreeMap<[Outcome; 4], usize>,
    discards: [[[usize; 3]; 3]; 4],
    retained: usize,
}

impl JointAssignment {
    /// Number of retained slots per quarter (the condensed length).
    pub fn retained_len(&self) -> usize {
        self.retained
    }

    /// Number of slots discarded from each quarter (equal by construction).
    pub fn discarded_per_quarter(&self) -> usize {
        self.discards[0].iter().flatten().sum()
    }

    /// Iterate over (column, count) in canonical column order.
    pub fn columns(&self) -> impl Iterator<Item = (&[Outcome; 4], usize)> {
        self.counts.iter().map(|(k, &v)| (k, v))
    }

    /// Discarded pair counts for one quarter.
    pub fn discards_for(&self, pair: SettingPair) -> QuarterProfile {
        QuarterProfile::from_counts(pair, self.discards[pair.quarter_index()])
    }

    /// The condensed table induced by this assignment (canonical column order).
    pub fn condensed_table(&self) -> CondensedTable {
        let mut rows: [Vec<Outcome>; 4] = core::array::from_fn(|_| Vec::with_capacity(self.retained));
        for (col, count) in self.columns() {
            for _ in 0..count {
                for (r, row) in rows.iter_mut().enumerate() {
                    row.push(col[r]);
                }
            }
        }
        CondensedTable::new(rows).expect("rows grown in lockstep")
    }

    fn from_joint(joint: &solver::Joint, counts: &solver::Counts, retained: usize) -> Self {
        let mut map = BTreeMap::new();
        for &((u, v, up, vp), x) in joint {
            let key = [
                Outcome::from_index(u),
                Outcome::from_index(v),
                Outcome::from_index(up),
                Outcome::from_index(vp),
            ];
            *map.entry(key).or_insert(0) += x;
        }
        let mut discards = [[[0usize; 3]; 3]; 4];
        for q in 0..4 {
            let proj = solver::project(joint, q);
            for i in 0..3 {
                for j in 0..3 {
                    discards[q][i][j] = counts[q][i][j] - proj[i][j];
                }
            }
        }
        JointAssignment { counts: map, discards, retained }
    }
}

/// A concrete reordering realizing a feasible assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    /// The table with retained slots permuted into Sica form (block
    /// schedule, one block per quarter, condensed order inside blocks).
    pub reordered: RunTable,
    /// Per quarter: source slot placed at each condensed position.
    pub slot_maps: [Vec<usize>; 4],
    /// Per quarter: source slots dropped, smallest indices first.
    pub discarded_slots: [Vec<usize>; 4],
    /// Condensed table read off the retained columns.
    pub condensed: CondensedTable,
}

/// Successful feasibility outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleReorder {
    pub assignment: JointAssignment,
    pub realization: Realization,
    /// Discarded slots per quarter divided by the quarter length.
    pub discard_fraction: f64,
}

/// Why no legitimate reordering exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InfeasibilityWitness {
    /// One station's two quarters cannot retain `required` slots with
    /// matching per-symbol counts; `cap` is the best achievable.
    MarginalMismatch { station: &'static str, cap: usize, required: usize },
    /// A CHSH-type sign combination of the factual correlation sums
    /// exceeds what any retained assignment could reach.
    ChshBound { signs: [i8; 4], value: i64, bound: i64 },
    /// The exact search ran to completion without finding an assignment.
    ExhaustedSearch,
}

/// Verdict of the feasibility decision.
#[derive(Debug, Clone, PartialEq)]
pub enum ReorderOutcome {
    Feasible(FeasibleReorder),
    Infeasible(InfeasibilityWitness),
}

impl ReorderOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, ReorderOutcome::Feasible(_))
    }

    pub fn feasible(&self) -> Option<&FeasibleReorder> {
        match self {
            ReorderOutcome::Feasible(f) => Some(f),
            ReorderOutcome::Infeasible(_) => None,
        }
    }
}

fn gather_counts(table: &RunTable) -> Result<(solver::Counts, usize)> {
    if !table.schedule().has_all_pairs() {
        return Err(Error::IncompleteSchedule);
    }
    let q = table
        .schedule()
        .balanced_quarter_len()
        .ok_or(Error::UnbalancedQuarters)?;
    let mut counts: solver::Counts = [[[0; 3]; 3]; 4];
    for pair in SettingPair::CANONICAL {
        let profile = table.quarter_profile(pair)?;
        counts[pair.quarter_index()] = *profile.counts();
    }
    Ok((counts, q))
}

/// Decide whether `table` admits a legitimate reordering into Sica form
/// discarding at most `discard_budget` (a fraction of each quarter).
///
/// With budget 0 this is exact Sica feasibility; the produced condensed
/// table reproduces all four quarter profiles. With a positive budget,
/// all four quarters retain equally many slots and a zero-discard
/// solution is still preferred when one exists.
pub fn feasibility(table: &RunTable, discard_budget: f64) -> Result<ReorderOutcome> {
    if !(0.0..=1.0).contains(&discard_budget) {
        return Err(Error::InvalidBudget(discard_budget));
    }
    let (counts, q) = gather_counts(table)?;
    let inst = solver::Instance::new(counts, q);
    let d_max = ((discard_budget * q as f64) as usize).min(q);
    let m_target = q - d_max;

    if let Some(witness) = solver::certificates(&inst, m_target) {
        return Ok(ReorderOutcome::Infeasible(witness));
    }
    // Prefer keeping everything; fall back to the budgeted length.
    let solution = solver::solve(&inst, q)
        .map(|joint| (joint, q))
        .or_else(|| {
            if m_target < q {
                solver::solve(&inst, m_target).map(|joint| (joint, m_target))
            } else {
                None
            }
        });
    match solution {
        Some((joint, retained)) => {
            let assignment = JointAssignment::from_joint(&joint, &counts, retained);
            let realization = realize_permutations(table, &assignment)?;
            let discard_fraction = if q == 0 {
                0.0
            } else {
                (q - retained) as f64 / q as f64
            };
            Ok(ReorderOutcome::Feasible(FeasibleReorder {
                assignment,
                realization,
                discard_fraction,
            }))
        }
        None => Ok(ReorderOutcome::Infeasible(InfeasibilityWitness::ExhaustedSearch)),
    }
}

/// Smallest per-quarter discard count (and fraction) at which a
/// legitimate reordering exists. Binary search over the retained length;
/// monotone because any solution shrinks by dropping columns.
pub fn minimal_discards(table: &RunTable) -> Result<(usize, f64)> {
    let (counts, q) = gather_counts(table)?;
    if q == 0 {
        return Ok((0, 0.0));
    }
    let inst = solver::Instance::new(counts, q);
    let decide = |m: usize| -> bool {
        if m == 0 {
            return true;
        }
        if solver::certificates(&inst, m).is_some() {
            return false;
        }
        solver::solve(&inst, m).is_some()
    };
    let (mut lo, mut hi) = (0usize, q);
    while lo < hi {
        let mid = lo + (hi - lo + 1) / 2;
        if decide(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok((q - lo, (q - lo) as f64 / q as f64))
}

/// Turn a feasible assignment into concrete per-quarter slot permutations.
///
/// Discards within each pair type take the smallest slot indices, and
/// retained slots map to condensed positions in slot order, so the result
/// is fully deterministic. Quarter profiles restricted to retained slots
/// are preserved by construction.
pub fn realize_permutations(table: &RunTable, assignment: &JointAssignment) -> Result<Realization> {
    let (counts, _q) = gather_counts(table)?;
    let mut slot_maps: [Vec<usize>; 4] = core::array::from_fn(|_| Vec::new());
    let mut discarded_slots: [Vec<usize>; 4] = core::array::from_fn(|_| Vec::new());

    for pair in SettingPair::CANONICAL {
        let qi = pair.quarter_index();
        // Bucket this quarter's slots by joint pair type, slot order kept.
        let mut buckets: BTreeMap<(Outcome, Outcome), Vec<usize>> = BTreeMap::new();
        for slot in table.schedule().slots_with(pair) {
            let key = (table.alice_outcome(slot), table.bob_outcome(slot));
            buckets.entry(key).or_default().push(slot);
        }
        // Check the assignment against the observed profile and drop the
        // discarded slots (earliest of each type first).
        let mut cursors: BTreeMap<(Outcome, Outcome), usize> = BTreeMap::new();
        for (i, row) in assignment.discards[qi].iter().enumerate() {
            for (j, &d) in row.iter().enumerate() {
                let key = (Outcome::from_index(i), Outcome::from_index(j));
                let have = buckets.get(&key).map_or(0, |b| b.len());
                let retained = counts[qi][i][j].checked_sub(d).ok_or(Error::AssignmentMismatch)?;
                if have != counts[qi][i][j] || retained + d != have {
                    return Err(Error::AssignmentMismatch);
                }
                if d > 0 {
                    let bucket = buckets.get(&key).ok_or(Error::AssignmentMismatch)?;
                    discarded_slots[qi].extend_from_slice(&bucket[..d]);
                    cursors.insert(key, d);
                }
            }
        }
        discarded_slots[qi].sort_unstable();
        // Walk the condensed columns and hand each its next source slot.
        for (col, count) in assignment.columns() {
            let key = match qi {
                0 => (col[0], col[3]),
                1 => (col[0], col[1]),
                2 => (col[2], col[1]),
                _ => (col[2], col[3]),
            };
            let bucket = buckets.get(&key).ok_or(Error::AssignmentMismatch)?;
            let cursor = cursors.entry(key).or_insert(0);
            if *cursor + count > bucket.len() {
                return Err(Error::AssignmentMismatch);
            }
            slot_maps[qi].extend_from_slice(&bucket[*cursor..*cursor + count]);
            *cursor += count;
        }
        // Every retained slot must be consumed.
        for (key, bucket) in &buckets {
            let used = cursors.get(key).copied().unwrap_or(0);
            if used != bucket.len() {
                return Err(Error::AssignmentMismatch);
            }
        }
    }

    let order: Vec<usize> = slot_maps.iter().flatten().copied().collect();
    let reordered = table.restricted(&order);
    Ok(Realization {
        reordered,
        slot_maps,
        discarded_slots,
        condensed: assignment.condensed_table(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{chsh, chsh_condensed, NormalizationMode};
    use crate::fixtures;
    use crate::schedule::SettingLabels;
    use crate::table::{block_table_from_quarters, outcomes, Row};

    #[test]
    fn sica16_is_feasible_with_no_discards() {
        let outcome = feasibility(&fixtures::sica16(), 0.0).unwrap();
        let f = outcome.feasible().expect("reordering exists");
        assert_eq!(f.discard_fraction, 0.0);
        assert_eq!(f.assignment.retained_len(), 4);
        // The condensed table carries the same columns as the original
        // condensation, independent of column order.
        let mut ours: Vec<[Outcome; 4]> =
            (0..4).map(|i| f.realization.condensed.column(i)).collect();
        let frozen = fixtures::sica16_condensed();
        let mut expected: Vec<[Outcome; 4]> = (0..4).map(|i| frozen.column(i)).collect();
        ours.sort_unstable();
        expected.sort_unstable();
        assert_eq!(ours, expected);
    }

    #[test]
    fn block16_is_feasible_and_reorders_into_sica_form() {
        let outcome = feasibility(&fixtures::block16(), 0.0).unwrap();
        let f = outcome.feasible().expect("reordering exists");
        let report = f.realization.reordered.sica_report().unwrap();
        assert!(report.holds);
        assert_eq!(
            chsh(&f.realization.reordered, NormalizationMode::PerCoincidence).unwrap().s,
            2.0
        );
    }

    #[test]
    fn chsh4_is_infeasible_with_a_chsh_witness() {
        let outcome = feasibility(&fixtures::chsh4(), 0.0).unwrap();
        match outcome {
            ReorderOutcome::Infeasible(InfeasibilityWitness::ChshBound { value, bound, .. }) => {
                assert_eq!(value, 8);
                assert_eq!(bound, 4);
            }
            other => panic!("expected CHSH witness, got {other:?}"),
        }
    }

    #[test]
    fn chsh4_stays_infeasible_at_half_budget() {
        // Any single retained column needs u = v, u' = v and u' = v' from
        // quarters 2-4, and u = -v' from quarter 1: a contradiction. The
        // slack-aware CHSH certificate sees exactly that.
        let outcome = feasibility(&fixtures::chsh4(), 0.5).unwrap();
        match outcome {
            ReorderOutcome::Infeasible(InfeasibilityWitness::ChshBound { value, bound, .. }) => {
                assert_eq!(value, 8);
                assert_eq!(bound, 6);
            }
            other => panic!("expected CHSH witness, got {other:?}"),
        }
        // Discarding everything is always possible.
        let outcome = feasibility(&fixtures::chsh4(), 1.0).unwrap();
        assert!(outcome.is_feasible());
    }

    /// A table that is infeasible as recorded but becomes feasible after
    /// discarding one slot per quarter: one quarter's `a`-marginal is off
    /// by a single slot.
    fn off_by_one_table() -> RunTable {
        block_table_from_quarters(
            SettingLabels::default(),
            (&outcomes("++"), &outcomes("++")),
            (&outcomes("+-"), &outcomes("++")),
            (&outcomes("++"), &outcomes("++")),
            (&outcomes("++"), &outcomes("++")),
        )
        .unwrap()
    }

    #[test]
    fn single_discard_repairs_a_marginal_mismatch() {
        let t = off_by_one_table();
        let outcome = feasibility(&t, 0.0).unwrap();
        match outcome {
            ReorderOutcome::Infeasible(InfeasibilityWitness::MarginalMismatch {
                station,
                cap,
                required,
            }) => {
                assert_eq!(station, "a");
                assert_eq!((cap, required), (1, 2));
            }
            other => panic!("expected marginal witness, got {other:?}"),
        }
        let outcome = feasibility(&t, 0.5).unwrap();
        let f = outcome.feasible().expect("one discard per quarter suffices");
        assert_eq!(f.assignment.discarded_per_quarter(), 1);
        assert_eq!(f.discard_fraction, 0.5);
        assert!(f.realization.reordered.sica_report().unwrap().holds);
    }

    #[test]
    fn identical_quarters_feasible_via_identity() {
        let a = outcomes("+--+");
        let t = block_table_from_quarters(
            SettingLabels::default(),
            (&a, &a),
            (&a, &a),
            (&a, &a),
            (&a, &a),
        )
        .unwrap();
        let outcome = feasibility(&t, 0.0).unwrap();
        let f = outcome.feasible().expect("identity works");
        // Identity: each quarter keeps its slots, reordered table satisfies Sica.
        assert!(f.realization.reordered.sica_report().unwrap().holds);
        for pair in SettingPair::CANONICAL {
            assert_eq!(
                f.realization.reordered.quarter_profile(pair).unwrap().counts(),
                t.quarter_profile(pair).unwrap().counts()
            );
        }
    }

    #[test]
    fn budget_outside_range_is_rejected() {
        assert!(matches!(
            feasibility(&fixtures::sica16(), 1.5),
            Err(Error::InvalidBudget(_))
        ));
        assert!(matches!(
            feasibility(&fixtures::sica16(), -0.1),
            Err(Error::InvalidBudget(_))
        ));
    }

    #[test]
    fn unbalanced_quarters_are_rejected() {
        use crate::schedule::{SettingPair, SettingSchedule};
        let pairs = SettingPair::CANONICAL;
        let slots = alloc::vec![pairs[0], pairs[1], pairs[1], pairs[2], pairs[3]];
        let schedule = SettingSchedule::new(slots);
        let records: Vec<_> = (0..5).map(|i| (i, Outcome::Plus, Outcome::Plus)).collect();
        let t = RunTable::from_records(schedule, SettingLabels::default(), &records).unwrap();
        assert_eq!(feasibility(&t, 0.0), Err(Error::UnbalancedQuarters));
    }

    #[test]
    fn minimal_discards_values() {
        // The maximal violation admits no partial repair: every nonempty
        // retained length fails, so everything must go.
        assert_eq!(minimal_discards(&fixtures::chsh4()).unwrap(), (2, 1.0));
        assert_eq!(minimal_discards(&fixtures::sica16()).unwrap(), (0, 0.0));
        assert_eq!(minimal_discards(&off_by_one_table()).unwrap(), (1, 0.5));
    }

    #[test]
    fn realization_preserves_retained_profiles() {
        let t = off_by_one_table();
        let outcome = feasibility(&t, 0.5).unwrap();
        let f = outcome.feasible().unwrap();
        let reordered = &f.realization.reordered;
        assert!(reordered.sica_report().unwrap().holds);
        // Retained profile = observed minus discards.
        for pair in SettingPair::CANONICAL {
            let observed = t.quarter_profile(pair).unwrap();
            let discards = f.assignment.discards_for(pair);
            let retained = reordered.quarter_profile(pair).unwrap();
            for a in Outcome::ALL {
                for b in Outcome::ALL {
                    assert_eq!(retained.count(a, b) + discards.count(a, b), observed.count(a, b));
                }
            }
        }
    }

    #[test]
    fn condensed_rows_match_reordered_blocks() {
        let outcome = feasibility(&fixtures::block16(), 0.0).unwrap();
        let f = outcome.feasible().unwrap();
        let c = &f.realization.condensed;
        let r = &f.realization.reordered;
        let m = c.len();
        for i in 0..m {
            // Quarter blocks sit at offsets 0, m, 2m, 3m after reordering.
            assert_eq!(r.alice_outcome(i), c.row(Row::A)[i]);
            assert_eq!(r.bob_outcome(i), c.row(Row::BPrime)[i]);
            assert_eq!(r.alice_outcome(m + i), c.row(Row::A)[i]);
            assert_eq!(r.bob_outcome(m + i), c.row(Row::B)[i]);
            assert_eq!(r.alice_outcome(2 * m + i), c.row(Row::APrime)[i]);
            assert_eq!(r.bob_outcome(2 * m + i), c.row(Row::B)[i]);
            assert_eq!(r.alice_outcome(3 * m + i), c.row(Row::APrime)[i]);
            assert_eq!(r.bob_outcome(3 * m + i), c.row(Row::BPrime)[i]);
        }
    }
}
