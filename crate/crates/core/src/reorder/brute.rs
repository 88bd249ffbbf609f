//! Exhaustive reordering search, used as an independent oracle.
//!
//! Searches over per-quarter permutations directly (the operational
//! definition of a legitimate reordering) instead of over joint counts,
//! so it validates the solver from the outside. Exponential in the
//! quarter length; capped accordingly.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::outcome::Outcome;
use crate::schedule::SettingPair;
use crate::table::RunTable;
use crate::{Error, Result};

use super::{
    realize_permutations, FeasibleReorder, InfeasibilityWitness, JointAssignment, ReorderOutcome,
};

const MAX_QUARTER: usize = 6;

/// All distinct partner sequences obtainable by permuting `pairs` so that
/// the first components equal `target` element by element.
fn carried_sequences(pairs: &[(Outcome, Outcome)], target: &[Outcome]) -> BTreeSet<Vec<Outcome>> {
    let mut classes: BTreeMap<Outcome, Vec<Outcome>> = BTreeMap::new();
    for &(lead, partner) in pairs {
        classes.entry(lead).or_default().push(partner);
    }
    // The lead multiset must match the target multiset at all.
    let mut needed: BTreeMap<Outcome, usize> = BTreeMap::new();
    for &t in target {
        *needed.entry(t).or_insert(0) += 1;
    }
    if needed.len() != classes.len()
        || needed.iter().any(|(o, n)| classes.get(o).map_or(0, |c| c.len()) != *n)
    {
        return BTreeSet::new();
    }

    // Distinct multiset permutations per class, combined along the target.
    fn fill(
        target: &[Outcome],
        pos: usize,
        remaining: &mut BTreeMap<Outcome, Vec<Outcome>>,
        current: &mut Vec<Outcome>,
        out: &mut BTreeSet<Vec<Outcome>>,
    ) {
        if pos == target.len() {
            out.insert(current.clone());
            return;
        }
        let class = target[pos];
        let available: BTreeSet<Outcome> =
            remaining.get(&class).map(|v| v.iter().copied().collect()).unwrap_or_default();
        for choice in available {
            let vec = remaining.get_mut(&class).expect("class exists");
            let idx = vec.iter().position(|&o| o == choice).expect("present");
            vec.swap_remove(idx);
            current.push(choice);
            fill(target, pos + 1, remaining, current, out);
            current.pop();
            remaining.get_mut(&class).expect("class exists").push(choice);
        }
    }

    let mut out = BTreeSet::new();
    let mut current = Vec::with_capacity(target.len());
    fill(target, 0, &mut classes, &mut current, &mut out);
    out
}

/// Exhaustive legitimate-reordering search with no discards.
///
/// Fixing the (α,β) quarter in place loses nothing (a common relabeling
/// of condensed positions absorbs its permutation), which leaves three
/// chained matching problems: permute (α,β') to align `a`, permute
/// (α',β) to align `b`, permute (α',β') to align `a'`, then demand the
/// two carried `b'` sequences agree.
pub fn brute_force_feasibility(table: &RunTable) -> Result<ReorderOutcome> {
    if !table.schedule().has_all_pairs() {
        return Err(Error::IncompleteSchedule);
    }
    let q = table
        .schedule()
        .balanced_quarter_len()
        .ok_or(Error::UnbalancedQuarters)?;
    if q > MAX_QUARTER {
        return Err(Error::QuarterTooLarge { len: q, max: MAX_QUARTER });
    }

    let quarter_pairs = |pair: SettingPair, swap: bool| -> Vec<(Outcome, Outcome)> {
        table
            .schedule()
            .slots_with(pair)
            .into_iter()
            .map(|s| {
                let (a, b) = (table.alice_outcome(s), table.bob_outcome(s));
                if swap {
                    (b, a)
                } else {
                    (a, b)
                }
            })
            .collect()
    };

    let [p0, p1, p2, p3] = SettingPair::CANONICAL;
    let a_target: Vec<Outcome> = quarter_pairs(p1, false).iter().map(|p| p.0).collect();
    let b_target: Vec<Outcome> = quarter_pairs(p1, false).iter().map(|p| p.1).collect();

    // (α,β'): align a, carry b'.
    let bprime_choices = carried_sequences(&quarter_pairs(p0, false), &a_target);
    if bprime_choices.is_empty() {
        return Ok(ReorderOutcome::Infeasible(InfeasibilityWitness::ExhaustedSearch));
    }
    // (α',β): align b, carry a'.
    let aprime_choices = carried_sequences(&quarter_pairs(p2, true), &b_target);
    let q4 = quarter_pairs(p3, false);
    for aprime in &aprime_choices {
        // (α',β'): align a', carry b'; close the cycle against (α,β').
        let closing = carried_sequences(&q4, aprime);
        if let Some(bprime) = closing.intersection(&bprime_choices).next() {
            let columns: Vec<[Outcome; 4]> = (0..q)
                .map(|i| [a_target[i], b_target[i], aprime[i], bprime[i]])
                .collect();
            let mut counts = BTreeMap::new();
            for col in columns {
                *counts.entry(col).or_insert(0usize) += 1;
            }
            let assignment =
                JointAssignment { counts, discards: [[[0; 3]; 3]; 4], retained: q };
            let realization = realize_permutations(table, &assignment)?;
            return Ok(ReorderOutcome::Feasible(FeasibleReorder {
                assignment,
                realization,
                discard_fraction: 0.0,
            }));
        }
    }
    Ok(ReorderOutcome::Infeasible(InfeasibilityWitness::ExhaustedSearch))
}
