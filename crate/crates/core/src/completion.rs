//! Counterfactual completion of factual tables.
//!
//! Every ideal-efficiency factual table whose same-setting multisets agree
//! (after an optional equal-length discard) embeds into a *complete* table
//! satisfying the Sica condition: reorder the first α-quarter so its `a`
//! series equals the second's (carrying `b'` along), reorder the first
//! α'-quarter likewise for `a'` (carrying `b`), fill the free `a` and `a'`
//! counterfactual blocks from an arbitrary sign choice, and copy the `b`
//! and `b'` counterfactual blocks from the factual ones their spans must
//! equal. Two free blocks of length Q mean exactly 2^(2Q) completions.
//!
//! The completed table condenses, and its condensed CHSH value can never
//! exceed 2 — regardless of how strongly the factual cells violate the
//! bound. Completion is an explanation, not a prediction: resampling the
//! schedule against a fixed complete table generally destroys the
//! violation (see [`resample_schedule`]).

use alloc::vec::Vec;

use crate::outcome::{Outcome, Provenance};
use crate::schedule::{SettingPair, SettingSchedule};
use crate::table::{alice_row, bob_row, CompleteTable, RunTable};
use crate::{Error, Result};

const MAX_ENUMERATION_QUARTER: usize = 8;

/// The two freely chosen counterfactual blocks, each of the retained
/// quarter length: the `a` block (written into both α'-quarters) and the
/// `a'` block (written into both α-quarters).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeChoice {
    pub a_block: Vec<Outcome>,
    pub a_prime_block: Vec<Outcome>,
}

impl FreeChoice {
    pub fn new(a_block: Vec<Outcome>, a_prime_block: Vec<Outcome>) -> Self {
        FreeChoice { a_block, a_prime_block }
    }

    /// Decode from bit patterns: bit k set means Minus at position k.
    pub fn from_bits(len: usize, a_bits: u64, a_prime_bits: u64) -> Self {
        let decode = |bits: u64| -> Vec<Outcome> {
            (0..len)
                .map(|k| if bits >> k & 1 == 1 { Outcome::Minus } else { Outcome::Plus })
                .collect()
        };
        FreeChoice { a_block: decode(a_bits), a_prime_block: decode(a_prime_bits) }
    }

    fn validate(&self, len: usize) -> Result<()> {
        for block in [&self.a_block, &self.a_prime_block] {
            if block.len() != len {
                return Err(Error::ChoiceLengthMismatch { expected: len, got: block.len() });
            }
            if block.iter().any(|o| !o.detected()) {
                return Err(Error::NullOutcome);
            }
        }
        Ok(())
    }
}

/// A finished completion.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResult {
    pub table: CompleteTable,
    /// Source slots (of the normalized input) dropped per quarter.
    pub discarded_slots: [Vec<usize>; 4],
    /// Retained slots per quarter.
    pub retained_quarter_len: usize,
}

impl CompletionResult {
    pub fn with_discards(&self) -> bool {
        self.discarded_slots.iter().any(|d| !d.is_empty())
    }
}

/// Everything the constructor fixes before the free choice enters:
/// normalized source, discards, and the two alignment reorderings.
struct Plan {
    base: RunTable,
    retained: usize,
    /// Source slots per quarter in output order (alignment applied).
    quarter_slots: [Vec<usize>; 4],
    discarded: [Vec<usize>; 4],
}

fn plan(table: &RunTable, discard_budget: f64) -> Result<Plan> {
    if !(0.0..=1.0).contains(&discard_budget) {
        return Err(Error::InvalidBudget(discard_budget));
    }
    if table.is_empty() {
        return Ok(Plan {
            base: table.clone(),
            retained: 0,
            quarter_slots: core::array::from_fn(|_| Vec::new()),
            discarded: core::array::from_fn(|_| Vec::new()),
        });
    }
    let base = table.normalize_schedule();
    if !base.schedule().has_all_pairs() {
        return Err(Error::IncompleteSchedule);
    }
    let q = base
        .schedule()
        .balanced_quarter_len()
        .ok_or(Error::UnbalancedQuarters)?;
    for slot in 0..base.len() {
        if !base.alice_outcome(slot).detected() || !base.bob_outcome(slot).detected() {
            return Err(Error::NullOutcome);
        }
    }

    let station = |pair_idx: usize, alice: bool| -> Vec<(usize, Outcome)> {
        base.schedule()
            .slots_with(SettingPair::CANONICAL[pair_idx])
            .into_iter()
            .map(|s| (s, if alice { base.alice_outcome(s) } else { base.bob_outcome(s) }))
            .collect()
    };
    let plus_count = |xs: &[(usize, Outcome)]| xs.iter().filter(|(_, o)| *o == Outcome::Plus).count();

    let quarters: [Vec<(usize, Outcome)>; 4] =
        [station(0, true), station(1, true), station(2, false), station(3, false)];
    // quarters[2] and [3] list the b/b' values; for alignment we need the
    // alice values of quarters 2 and 3.
    let q3_alice = station(2, false);
    let _ = q3_alice;

    let a1 = station(0, true);
    let a2 = station(1, true);
    let ap3 = station(2, true);
    let ap4 = station(3, true);
    let _ = quarters;

    let d_a = plus_count(&a1).abs_diff(plus_count(&a2));
    let d_ap = plus_count(&ap3).abs_diff(plus_count(&ap4));
    let needed = d_a.max(d_ap);
    let allowed = ((discard_budget * q as f64) as usize).min(q);
    if needed > allowed {
        return Err(Error::MultisetMismatch { needed, allowed });
    }
    let retained = q - needed;

    // Discard rules, smallest indices first: drop the excess symbol from
    // the richer quarter and the opposite symbol from the poorer one until
    // the multisets match, then matched symbol pairs (larger class first)
    // until both quarters lose exactly `needed` slots.
    let discard_pair = |xs: &[(usize, Outcome)], ys: &[(usize, Outcome)], total: usize| {
        let (px, py) = (plus_count(xs), plus_count(ys));
        let mut drop_x: Vec<usize> = Vec::new();
        let mut drop_y: Vec<usize> = Vec::new();
        let mut take = |from: &[(usize, Outcome)], sym: Outcome, n: usize, skip: &Vec<usize>| -> Vec<usize> {
            from.iter()
                .filter(|(s, o)| *o == sym && !skip.contains(s))
                .map(|(s, _)| *s)
                .take(n)
                .collect()
        };
        if px > py {
            drop_x = take(xs, Outcome::Plus, px - py, &Vec::new());
            drop_y = take(ys, Outcome::Minus, px - py, &Vec::new());
        } else if py > px {
            drop_x = take(xs, Outcome::Minus, py - px, &Vec::new());
            drop_y = take(ys, Outcome::Plus, py - px, &Vec::new());
        }
        let mut extra = total - drop_x.len();
        let mut plus_left = px.min(py);
        let mut minus_left = xs.len() - drop_x.len() - plus_left;
        while extra > 0 {
            let sym = if plus_left >= minus_left { Outcome::Plus } else { Outcome::Minus };
            let dx = take(xs, sym, 1, &drop_x);
            let dy = take(ys, sym, 1, &drop_y);
            drop_x.extend(dx);
            drop_y.extend(dy);
            if sym == Outcome::Plus {
                plus_left -= 1;
            } else {
                minus_left -= 1;
            }
            extra -= 1;
        }
        (drop_x, drop_y)
    };
    let (drop1, drop2) = discard_pair(&a1, &a2, needed);
    let (drop3, drop4) = discard_pair(&ap3, &ap4, needed);
    let discarded = [drop1, drop2, drop3, drop4];

    let retained_of = |xs: &[(usize, Outcome)], dropped: &[usize]| -> Vec<(usize, Outcome)> {
        xs.iter().filter(|(s, _)| !dropped.contains(s)).copied().collect()
    };
    let r1 = retained_of(&a1, &discarded[0]);
    let r2 = retained_of(&a2, &discarded[1]);
    let r3 = retained_of(&ap3, &discarded[2]);
    let r4 = retained_of(&ap4, &discarded[3]);

    // Align: permute quarter 1 so its `a` series equals quarter 2's, and
    // quarter 3 so its `a'` series equals quarter 4's. Matching is stable:
    // the k-th target symbol takes the k-th source slot carrying it.
    let align = |sources: &[(usize, Outcome)], targets: &[(usize, Outcome)]| -> Vec<usize> {
        let mut by_symbol: [Vec<usize>; 3] = core::array::from_fn(|_| Vec::new());
        for (s, o) in sources {
            by_symbol[o.index()].push(*s);
        }
        let mut cursors = [0usize; 3];
        targets
            .iter()
            .map(|(_, o)| {
                let i = o.index();
                let slot = by_symbol[i][cursors[i]];
                cursors[i] += 1;
                slot
            })
            .collect()
    };
    let quarter_slots = [
        align(&r1, &r2),
        r2.iter().map(|(s, _)| *s).collect(),
        align(&r3, &r4),
        r4.iter().map(|(s, _)| *s).collect(),
    ];
    Ok(Plan { base, retained, quarter_slots, discarded })
}

impl Plan {
    fn build(&self, choice: &FreeChoice) -> Result<CompletionResult> {
        choice.validate(self.retained)?;
        let m = self.retained;
        let schedule = SettingSchedule::blocks(m);
        let base = &self.base;
        let value_at = |q: usize, i: usize, alice: bool| -> Outcome {
            let slot = self.quarter_slots[q][i];
            if alice {
                base.alice_outcome(slot)
            } else {
                base.bob_outcome(slot)
            }
        };

        let mut values: [Vec<Outcome>; 4] = core::array::from_fn(|_| Vec::with_capacity(4 * m));
        let mut prov: [Vec<Provenance>; 4] = core::array::from_fn(|_| Vec::with_capacity(4 * m));
        let mut push = |row: usize, v: Outcome, p: Provenance, values: &mut [Vec<Outcome>; 4], prov: &mut [Vec<Provenance>; 4]| {
            values[row].push(v);
            prov[row].push(p);
        };
        use Provenance::{Counterfactual as Cf, Factual as Fa};
        // Row layout inside each quarter block of the output:
        //   a (0), b (1), a' (2), b' (3); quarter blocks in canonical order.
        for i in 0..m {
            // Quarter 1 = (α,β'): factual a (aligned) and b'; cf b and a'.
            push(0, value_at(0, i, true), Fa, &mut values, &mut prov);
            push(3, value_at(0, i, false), Fa, &mut values, &mut prov);
            push(1, value_at(2, i, false), Cf, &mut values, &mut prov);
            push(2, choice.a_prime_block[i], Cf, &mut values, &mut prov);
        }
        for i in 0..m {
            // Quarter 2 = (α,β): factual a and b.
            push(0, value_at(1, i, true), Fa, &mut values, &mut prov);
            push(1, value_at(1, i, false), Fa, &mut values, &mut prov);
            push(2, choice.a_prime_block[i], Cf, &mut values, &mut prov);
            push(3, value_at(3, i, false), Cf, &mut values, &mut prov);
        }
        for i in 0..m {
            // Quarter 3 = (α',β): factual a' (aligned) and b.
            push(2, value_at(2, i, true), Fa, &mut values, &mut prov);
            push(1, value_at(2, i, false), Fa, &mut values, &mut prov);
            push(0, choice.a_block[i], Cf, &mut values, &mut prov);
            push(3, value_at(0, i, false), Cf, &mut values, &mut prov);
        }
        for i in 0..m {
            // Quarter 4 = (α',β'): factual a' and b'.
            push(2, value_at(3, i, true), Fa, &mut values, &mut prov);
            push(3, value_at(3, i, false), Fa, &mut values, &mut prov);
            push(0, choice.a_block[i], Cf, &mut values, &mut prov);
            push(1, value_at(1, i, false), Cf, &mut values, &mut prov);
        }
        let table = CompleteTable::new(schedule, base.labels().clone(), values, prov)?;
        debug_assert!(table.sica_report().map(|r| r.holds).unwrap_or(false));
        Ok(CompletionResult {
            table,
            discarded_slots: self.discarded.clone(),
            retained_quarter_len: m,
        })
    }
}

/// Retained quarter length the constructor will use (and hence the length
/// the free-choice blocks must have).
pub fn free_block_len(table: &RunTable, discard_budget: f64) -> Result<usize> {
    plan(table, discard_budget).map(|p| p.retained)
}

/// Fill the never-performed cells of `table` so the result satisfies the
/// Sica condition, using `choice` for the two free counterfactual blocks.
///
/// Factual cells are the source cells, legitimately reordered (both
/// stations together) within their quarters; quarter profiles restricted
/// to retained slots are preserved.
pub fn complete_table(
    table: &RunTable,
    choice: &FreeChoice,
    discard_budget: f64,
) -> Result<CompletionResult> {
    plan(table, discard_budget)?.build(choice)
}

/// Iterator over the full constructor family for one factual table.
pub struct CompletionEnumeration {
    plan: Plan,
    next: u64,
    count: u64,
}

impl CompletionEnumeration {
    /// Total number of completions: 2^(2·retained length).
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn retained_quarter_len(&self) -> usize {
        self.plan.retained
    }
}

impl Iterator for CompletionEnumeration {
    type Item = CompletionResult;

    fn next(&mut self) -> Option<CompletionResult> {
        if self.next >= self.count {
            return None;
        }
        let m = self.plan.retained;
        let a_bits = self.next >> m;
        let ap_bits = self.next & ((1 << m) - 1);
        let choice = FreeChoice::from_bits(m, a_bits, ap_bits);
        self.next += 1;
        Some(self.plan.build(&choice).expect("bits decode to valid choices"))
    }
}

/// Enumerate every completion in the constructor family (the alignment
/// reordering is fixed canonically, so completions differ exactly in the
/// free blocks).
pub fn enumerate_completions(
    table: &RunTable,
    discard_budget: f64,
) -> Result<CompletionEnumeration> {
    let plan = plan(table, discard_budget)?;
    if plan.retained > MAX_ENUMERATION_QUARTER {
        return Err(Error::QuarterTooLarge { len: plan.retained, max: MAX_ENUMERATION_QUARTER });
    }
    let count = 1u64 << (2 * plan.retained);
    Ok(CompletionEnumeration { plan, next: 0, count })
}

/// Read a factual run off a complete table under a different schedule.
///
/// At every slot the cells selected by `schedule` become the factual
/// outcomes; everything else is forgotten. This is the sense in which a
/// complete table is an explanation but not a prediction: choosing other
/// observation times generally yields a run that no longer violates the
/// CHSH bound.
pub fn resample_schedule(
    complete: &CompleteTable,
    schedule: &SettingSchedule,
) -> Result<RunTable> {
    if schedule.len() != complete.len() {
        return Err(Error::ScheduleMismatch { expected: complete.len(), got: schedule.len() });
    }
    let records: Vec<(usize, Outcome, Outcome)> = (0..schedule.len())
        .map(|slot| {
            let pair = schedule.pair_at(slot).expect("slot in range");
            (
                slot,
                complete.value(alice_row(pair.alice), slot),
                complete.value(bob_row(pair.bob), slot),
            )
        })
        .collect();
    RunTable::from_records(schedule.clone(), complete.labels().clone(), &records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{chsh, chsh_condensed, NormalizationMode};
    use crate::fixtures;
    use crate::schedule::SettingLabels;
    use crate::table::{block_table_from_quarters, outcomes, Row};

    #[test]
    fn reproduces_the_frozen_completion_cell_for_cell() {
        let result = complete_table(&fixtures::chsh4(), &fixtures::chsh4_choice(), 0.0).unwrap();
        assert!(!result.with_discards());
        assert_eq!(result.table, fixtures::chsh4_completion());
    }

    #[test]
    fn completion_of_a_sica_table_keeps_the_bound() {
        let t = fixtures::sica16();
        // Copy the factual blocks as the free choice.
        let choice = FreeChoice::new(outcomes("-+-+"), outcomes("-++-"));
        let result = complete_table(&t, &choice, 0.0).unwrap();
        assert!(result.table.sica_report().unwrap().holds);
        let s = chsh_condensed(&result.table.condense().unwrap()).unwrap().s;
        assert!(s <= 2.0);
    }

    #[test]
    fn mismatching_multisets_need_budget() {
        let t = block_table_from_quarters(
            SettingLabels::default(),
            (&outcomes("++"), &outcomes("++")),
            (&outcomes("+-"), &outcomes("++")),
            (&outcomes("++"), &outcomes("++")),
            (&outcomes("++"), &outcomes("++")),
        )
        .unwrap();
        assert_eq!(
            complete_table(&t, &FreeChoice::from_bits(2, 0, 0), 0.0),
            Err(Error::MultisetMismatch { needed: 1, allowed: 0 })
        );
        let result = complete_table(&t, &FreeChoice::from_bits(1, 0, 0), 0.5).unwrap();
        assert!(result.with_discards());
        assert_eq!(result.retained_quarter_len, 1);
        assert!(result.table.sica_report().unwrap().holds);
    }

    #[test]
    fn wrong_choice_length_is_rejected() {
        assert_eq!(
            complete_table(&fixtures::chsh4(), &FreeChoice::from_bits(3, 0, 0), 0.0),
            Err(Error::ChoiceLengthMismatch { expected: 2, got: 3 })
        );
        assert_eq!(free_block_len(&fixtures::chsh4(), 0.0).unwrap(), 2);
    }

    #[test]
    fn zeros_are_rejected() {
        let z = outcomes("0+");
        let p = outcomes("++");
        let t = block_table_from_quarters(
            SettingLabels::default(),
            (&z, &p),
            (&p, &p),
            (&p, &p),
            (&p, &p),
        )
        .unwrap();
        assert_eq!(
            complete_table(&t, &FreeChoice::from_bits(2, 0, 0), 0.0),
            Err(Error::NullOutcome)
        );
    }

    #[test]
    fn enumeration_is_complete_and_distinct() {
        let en = enumerate_completions(&fixtures::chsh4(), 0.0).unwrap();
        assert_eq!(en.count(), 16);
        let tables: Vec<_> = en.map(|r| r.table).collect();
        assert_eq!(tables.len(), 16);
        for t in &tables {
            assert!(t.sica_report().unwrap().holds);
        }
        for i in 0..tables.len() {
            for j in 0..i {
                assert_ne!(tables[i], tables[j]);
            }
        }
        assert!(tables.contains(&fixtures::chsh4_completion()));
    }

    #[test]
    fn single_slot_quarters_admit_four_completions() {
        let p = outcomes("+");
        let t = block_table_from_quarters(
            SettingLabels::default(),
            (&p, &p),
            (&p, &p),
            (&p, &p),
            (&p, &p),
        )
        .unwrap();
        let en = enumerate_completions(&t, 0.0).unwrap();
        assert_eq!(en.count(), 4);
        assert_eq!(en.collect::<Vec<_>>().len(), 4);
    }

    #[test]
    fn empty_table_has_one_empty_completion() {
        let t = RunTable::from_records(
            SettingSchedule::new(Vec::new()),
            SettingLabels::default(),
            &[],
        )
        .unwrap();
        let en = enumerate_completions(&t, 0.0).unwrap();
        assert_eq!(en.count(), 1);
        let all: Vec<_> = en.collect();
        assert_eq!(all.len(), 1);
        assert!(all[0].table.is_empty());
    }

    #[test]
    fn resampling_moves_the_violation_away() {
        // Swap the first two quarter blocks of the schedule: the (α,β')
        // observation now happens at slots 2-3.
        let complete = fixtures::chsh4_completion();
        let pairs = SettingPair::CANONICAL;
        let slots = alloc::vec![
            pairs[1], pairs[1], pairs[0], pairs[0], pairs[2], pairs[2], pairs[3], pairs[3],
        ];
        let resampled = resample_schedule(&complete, &SettingSchedule::new(slots)).unwrap();
        let normalized = resampled.normalize_schedule();
        let r = chsh(&normalized, NormalizationMode::PerCoincidence).unwrap();
        assert_eq!(r.correlation_for(pairs[0]).value, 1.0);
        assert_eq!(r.s, 2.0);
    }

    #[test]
    fn resampling_with_the_original_schedule_recovers_the_factual_table() {
        let complete = fixtures::chsh4_completion();
        let resampled = resample_schedule(&complete, complete.schedule()).unwrap();
        assert_eq!(resampled, fixtures::chsh4());
    }

    #[test]
    fn schedule_length_mismatch_is_rejected() {
        let complete = fixtures::chsh4_completion();
        assert_eq!(
            resample_schedule(&complete, &SettingSchedule::blocks(1)),
            Err(Error::ScheduleMismatch { expected: 8, got: 4 })
        );
    }

    #[test]
    fn some_schedule_restores_and_some_destroys_the_violation() {
        // All 24 assignments of the four setting pairs to the four blocks.
        let complete = fixtures::chsh4_completion();
        let mut seen_violation = false;
        let mut seen_classical = false;
        let perms = permutations([0usize, 1, 2, 3]);
        for perm in perms {
            let mut slots = Vec::new();
            for &k in &perm {
                slots.push(SettingPair::CANONICAL[k]);
                slots.push(SettingPair::CANONICAL[k]);
            }
            let resampled =
                resample_schedule(&complete, &SettingSchedule::new(slots)).unwrap();
            let s = chsh(&resampled.normalize_schedule(), NormalizationMode::PerCoincidence)
                .unwrap()
                .s;
            if s > 2.0 {
                seen_violation = true;
            } else {
                seen_classical = true;
            }
        }
        assert!(seen_violation && seen_classical);
    }

    fn permutations(items: [usize; 4]) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut items: Vec<usize> = items.to_vec();
        fn rec(current: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if rest.is_empty() {
                out.push(current.clone());
                return;
            }
            for i in 0..rest.len() {
                let x = rest.remove(i);
                current.push(x);
                rec(current, rest, out);
                current.pop();
                rest.insert(i, x);
            }
        }
        rec(&mut Vec::new(), &mut items, &mut out);
        out
    }

    use crate::schedule::SettingSchedule;
    use crate::RunTable;
}
