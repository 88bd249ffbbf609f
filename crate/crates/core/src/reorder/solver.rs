//! Exact integer solver for the joint-row-count formulation.
//!
//! A legitimate reordering exists exactly when there is a multiset of
//! condensed columns (u, v, u', v') whose four pairwise projections land
//! inside the four observed quarter profiles, with a prescribed total.
//! The projected pairs sit on a 4-cycle: u-v', u-v, u'-v, u'-v', which is
//! what makes the problem nontrivial (trees would always be consistent).
//!
//! Three routes, all exact:
//! * sign-only data with no discards: a closed-form chain of integer
//!   interval intersections (coupling on (u,u') plus two three-variable
//!   tables hanging off it), O(1) regardless of quarter size;
//! * sign-only data with discards: a deterministic reduction to retained
//!   profiles followed by the closed form, falling back to search;
//! * anything else: depth-first search over the (up to 81) cell counts
//!   with residual-capacity propagation.

use alloc::vec::Vec;

use super::InfeasibilityWitness;

/// Quarter counts indexed `[quarter][alice outcome][bob outcome]` using the
/// dense outcome index (Plus = 0, Minus = 1, Zero = 2), quarters in
/// canonical order (α,β'), (α,β), (α',β), (α',β').
pub(crate) type Counts = [[[usize; 3]; 3]; 4];

/// A solution: count per joint cell `[u][v][u'][v']`.
pub(crate) type Joint = Vec<((usize, usize, usize, usize), usize)>;

pub(crate) struct Instance {
    pub counts: Counts,
    /// Slots per quarter.
    pub q: usize,
    /// True when no Zero outcome occurs anywhere.
    pub sign_only: bool,
}

impl Instance {
    pub fn new(counts: Counts, q: usize) -> Self {
        let zero = 2;
        let sign_only = counts.iter().all(|n| {
            (0..3).all(|i| n[i][zero] == 0 && n[zero][i] == 0)
        });
        Instance { counts, q, sign_only }
    }

    fn alphabet(&self) -> &'static [usize] {
        if self.sign_only {
            &[0, 1]
        } else {
            &[0, 1, 2]
        }
    }
}

/// Quarters adjacent to each station series, and which side they project.
/// Row station of quarter k is Alice for all k (index 0 of the pair).
const STATIONS: [(&str, usize, usize, bool); 4] = [
    // (name, quarter A, quarter B, alice side?)
    ("a", 0, 1, true),
    ("a'", 2, 3, true),
    ("b", 1, 2, false),
    ("b'", 3, 0, false),
];

fn marginal(n: &[[usize; 3]; 3], alice_side: bool, sym: usize) -> usize {
    if alice_side {
        n[sym].iter().sum()
    } else {
        (0..3).map(|i| n[i][sym]).sum()
    }
}

/// Unnormalized correlation sum Σ (±1/0 products) of one quarter.
fn product_sum(n: &[[usize; 3]; 3]) -> i64 {
    let val = |i: usize| -> i64 { [1, -1, 0][i] };
    let mut s = 0;
    for (i, row) in n.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            s += val(i) * val(j) * *c as i64;
        }
    }
    s
}

/// Sound necessary conditions for feasibility at retained length `m`.
///
/// Returns a witness when one of them fails; passing them decides nothing.
pub(crate) fn certificates(inst: &Instance, m: usize) -> Option<InfeasibilityWitness> {
    // Each station series must admit m retained slots with equal
    // per-symbol counts in its two quarters, so the pointwise minimum of
    // the two marginals caps the retained length.
    for (name, qa, qb, alice_side) in STATIONS {
        let cap: usize = (0..3)
            .map(|s| {
                marginal(&inst.counts[qa], alice_side, s)
                    .min(marginal(&inst.counts[qb], alice_side, s))
            })
            .sum();
        if m > cap {
            return Some(InfeasibilityWitness::MarginalMismatch {
                station: name,
                cap,
                required: m,
            });
        }
    }
    // CHSH-type bounds: for every sign pattern with an odd number of minus
    // signs, any m retained columns satisfy Σ s_k R_k ≤ 2m, and each
    // quarter's retained sum differs from the factual one by at most q − m.
    let c: [i64; 4] = core::array::from_fn(|k| product_sum(&inst.counts[k]));
    let slack = (inst.q - m) as i64;
    let bound = 2 * m as i64 + 4 * slack;
    for mask in 0..16u8 {
        if (mask.count_ones() % 2) != 1 {
            continue;
        }
        let signs: [i8; 4] = core::array::from_fn(|k| if mask >> k & 1 == 1 { -1 } else { 1 });
        let value: i64 = (0..4).map(|k| signs[k] as i64 * c[k]).sum();
        if value > bound {
            return Some(InfeasibilityWitness::ChshBound { signs, value, bound });
        }
    }
    None
}

/// Decide Σx = m with projections inside the quarter counts; exact.
pub(crate) fn solve(inst: &Instance, m: usize) -> Option<Joint> {
    if m == 0 {
        return Some(Vec::new());
    }
    if inst.sign_only {
        if m == inst.q {
            return interval_solve(&inst.counts, m);
        }
        if let Some(x) = reduce_then_solve(inst, m) {
            return Some(x);
        }
    }
    dfs_solve(inst, m)
}

// ---------------------------------------------------------------------------
// Closed form for sign-only data with exact profiles (no discards).
// ---------------------------------------------------------------------------

/// Floor division helper for bound propagation.
fn floor_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

/// Bounds on the free cell of a 3-variable table hanging off the coupling.
///
/// `pa` holds the (u, w) counts, `pb` the (u', w) counts for w the hanging
/// variable. Every cell of the table is affine in (s, t) where s = z(+,+)
/// of the (u,u') coupling and t is the table's own free cell; cells ≥ 0
/// translate into lower/upper bounds `slope·s + offset` on t.
struct Triangle {
    lows: [(i64, i64); 4],
    ups: [(i64, i64); 4],
}

fn triangle(pa: &[[usize; 3]; 3], pb: &[[usize; 3]; 3], ru: i64, rup: i64, m: i64) -> Triangle {
    let pa00 = pa[0][0] as i64;
    let pa10 = pa[1][0] as i64;
    let pb00 = pb[0][0] as i64;
    Triangle {
        lows: [(0, 0), (1, pa00 - ru), (1, pb00 - rup), (0, pb00 - pa10)],
        ups: [(1, 0), (0, pa00), (0, pb00), (1, m - ru - rup - pa10 + pb00)],
    }
}

impl Triangle {
    /// Narrow the feasible range of s so that a valid t exists.
    fn narrow(&self, s_lo: &mut i64, s_hi: &mut i64) -> bool {
        for (la, lb) in self.lows {
            for (ua, ub) in self.ups {
                let d = la - ua;
                let c = ub - lb;
                if d == 0 {
                    if c < 0 {
                        return false;
                    }
                } else if d > 0 {
                    *s_hi = (*s_hi).min(floor_div(c, d));
                } else {
                    *s_lo = (*s_lo).max(-floor_div(c, -d));
                }
            }
        }
        s_lo <= s_hi
    }

    fn pick_t(&self, s: i64) -> i64 {
        self.lows.iter().map(|(a, b)| a * s + b).max().expect("nonempty")
    }

    /// Fill the eight cells given (s, t); indices (u, u', w).
    fn cells(
        pa: &[[usize; 3]; 3],
        pb: &[[usize; 3]; 3],
        ru: i64,
        rup: i64,
        m: i64,
        s: i64,
        t: i64,
    ) -> [[[i64; 2]; 2]; 2] {
        let pa00 = pa[0][0] as i64;
        let pa10 = pa[1][0] as i64;
        let pb00 = pb[0][0] as i64;
        let z10 = ru - s;
        let z01 = rup - s;
        let z00 = m - ru - rup + s;
        let mut q = [[[0i64; 2]; 2]; 2];
        q[0][0][0] = t;
        q[0][0][1] = s - t;
        q[0][1][0] = pa00 - t;
        q[1][0][0] = pb00 - t;
        q[0][1][1] = z10 - pa00 + t;
        q[1][0][1] = z01 - pb00 + t;
        q[1][1][0] = pa10 - pb00 + t;
        q[1][1][1] = z00 - q[1][1][0];
        q
    }
}

/// Exact decision + construction for sign-only equality instances.
fn interval_solve(counts: &Counts, m: usize) -> Option<Joint> {
    let m = m as i64;
    let n = counts;
    // Consistent singles are a precondition for any exact cover.
    let margin_a = |k: usize, s: usize| n[k][s][0] as i64 + n[k][s][1] as i64;
    let margin_b = |k: usize, s: usize| n[k][0][s] as i64 + n[k][1][s] as i64;
    for s in 0..2 {
        if margin_a(1, s) != margin_a(0, s)
            || margin_b(1, s) != margin_b(2, s)
            || margin_a(2, s) != margin_a(3, s)
            || margin_b(3, s) != margin_b(0, s)
        {
            return None;
        }
    }
    let total: i64 = n[1].iter().flatten().map(|&c| c as i64).sum();
    if total != m {
        return None;
    }
    let ru = margin_a(1, 0); // count of u = +
    let rup = margin_a(2, 0); // count of u' = +

    let mut s_lo = 0.max(ru + rup - m);
    let mut s_hi = ru.min(rup);
    // Hanging variable v uses quarters (α,β) and (α',β); v' uses (α,β')
    // and (α',β').
    let tri_v = triangle(&n[1], &n[2], ru, rup, m);
    let tri_w = triangle(&n[0], &n[3], ru, rup, m);
    if !tri_v.narrow(&mut s_lo, &mut s_hi) || !tri_w.narrow(&mut s_lo, &mut s_hi) {
        return None;
    }
    if s_lo > s_hi {
        return None;
    }
    let s = s_lo;
    let qv = Triangle::cells(&n[1], &n[2], ru, rup, m, s, tri_v.pick_t(s));
    let qw = Triangle::cells(&n[0], &n[3], ru, rup, m, s, tri_w.pick_t(s));

    // Glue: inside each (u,u') slice, v and v' form a plain 2x2
    // transportation problem with equal totals; northwest fill is integral.
    let mut joint = Vec::new();
    for u in 0..2 {
        for up in 0..2 {
            let mut rows = [qv[u][up][0], qv[u][up][1]];
            let mut cols = [qw[u][up][0], qw[u][up][1]];
            debug_assert_eq!(rows.iter().sum::<i64>(), cols.iter().sum::<i64>());
            for (v, row) in rows.iter_mut().enumerate() {
                for (w, col) in cols.iter_mut().enumerate() {
                    let x = (*row).min(*col);
                    if x > 0 {
                        joint.push(((u, v, up, w), x as usize));
                        *row -= x;
                        *col -= x;
                    }
                }
            }
        }
    }
    debug_assert!(projections_within(&joint, counts));
    Some(joint)
}

// ---------------------------------------------------------------------------
// Discard handling for sign-only data: reduce to retained profiles.
// ---------------------------------------------------------------------------

/// Deterministically choose retained profiles of total `m` inside the
/// observed ones and hand them to the closed form. A `None` is not a
/// verdict; the caller falls back to the exhaustive search.
fn reduce_then_solve(inst: &Instance, m: usize) -> Option<Joint> {
    let n = &inst.counts;
    // Target per-symbol counts for each station series: start from the
    // pointwise minimum of its two quarters and trim the larger symbol
    // until the total is m.
    let mut k = [[0i64; 2]; 4];
    for (idx, (_, qa, qb, alice_side)) in STATIONS.iter().enumerate() {
        for s in 0..2 {
            k[idx][s] = (marginal(&n[*qa], *alice_side, s) as i64)
                .min(marginal(&n[*qb], *alice_side, s) as i64);
        }
        let mut excess = k[idx][0] + k[idx][1] - m as i64;
        if excess < 0 {
            return None;
        }
        while excess > 0 {
            let larger = if k[idx][0] >= k[idx][1] { 0 } else { 1 };
            let cut = excess.min(k[idx][larger] - k[idx][1 - larger]).max(1);
            k[idx][larger] -= cut;
            excess -= cut;
        }
    }
    // Per quarter, pick retained pair counts with the prescribed margins,
    // clipped to the observed counts, aiming at proportional shrinkage.
    let station_of = |quarter: usize, alice_side: bool| -> usize {
        match (quarter, alice_side) {
            (0 | 1, true) => 0,
            (2 | 3, true) => 1,
            (1 | 2, false) => 2,
            _ => 3,
        }
    };
    let mut retained: Counts = [[[0; 3]; 3]; 4];
    let mi = m as i64;
    let qi = inst.q as i64;
    for quarter in 0..4 {
        let kx = k[station_of(quarter, true)];
        let ky = k[station_of(quarter, false)];
        let nq = &n[quarter];
        let n00 = nq[0][0] as i64;
        let n01 = nq[0][1] as i64;
        let n10 = nq[1][0] as i64;
        let n11 = nq[1][1] as i64;
        let lo = 0.max(kx[0] - n01).max(ky[0] - n10).max(kx[0] + ky[0] - mi);
        let hi = n00.min(kx[0]).min(ky[0]).min(n11 - mi + kx[0] + ky[0]);
        if lo > hi {
            return None;
        }
        let proportional = (n00 * mi + qi / 2) / qi;
        let tau = proportional.clamp(lo, hi);
        retained[quarter][0][0] = tau as usize;
        retained[quarter][0][1] = (kx[0] - tau) as usize;
        retained[quarter][1][0] = (ky[0] - tau) as usize;
        retained[quarter][1][1] = (mi - kx[0] - ky[0] + tau) as usize;
    }
    interval_solve(&retained, m)
}

// ---------------------------------------------------------------------------
// Depth-first search over joint cell counts, exact for every alphabet.
// ---------------------------------------------------------------------------

fn dfs_solve(inst: &Instance, m: usize) -> Option<Joint> {
    let alpha = inst.alphabet();
    let mut cells = Vec::new();
    for &u in alpha {
        for &v in alpha {
            for &up in alpha {
                for &vp in alpha {
                    cells.push((u, v, up, vp));
                }
            }
        }
    }
    let mut residual = inst.counts;
    let mut assigned: Vec<usize> = Vec::with_capacity(cells.len());
    let mut used = alloc::vec![false; cells.len()];
    let mut order: Vec<usize> = Vec::with_capacity(cells.len());

    fn ub(res: &Counts, c: (usize, usize, usize, usize)) -> usize {
        let (u, v, up, vp) = c;
        res[0][u][vp].min(res[1][u][v]).min(res[2][up][v]).min(res[3][up][vp])
    }

    fn apply(res: &mut Counts, c: (usize, usize, usize, usize), x: usize, add: bool) {
        let (u, v, up, vp) = c;
        let cells = [(0, u, vp), (1, u, v), (2, up, v), (3, up, vp)];
        for (k, i, j) in cells {
            if add {
                res[k][i][j] += x;
            } else {
                res[k][i][j] -= x;
            }
        }
    }

    fn rec(
        cells: &[(usize, usize, usize, usize)],
        used: &mut [bool],
        res: &mut Counts,
        m_rem: usize,
        assigned: &mut Vec<usize>,
        order: &mut Vec<usize>,
    ) -> bool {
        if m_rem == 0 {
            return true;
        }
        // Pick the unassigned cell with the largest headroom; bail when the
        // combined headroom cannot reach the target.
        let mut best: Option<(usize, usize)> = None;
        let mut total = 0usize;
        for (i, &c) in cells.iter().enumerate() {
            if used[i] {
                continue;
            }
            let b = ub(res, c);
            total = total.saturating_add(b);
            match best {
                Some((_, bb)) if bb >= b => {}
                _ => best = Some((i, b)),
            }
        }
        if total < m_rem {
            return false;
        }
        let (i, cap) = best.expect("m_rem > 0 implies headroom");
        if cap == 0 {
            return false;
        }
        used[i] = true;
        let c = cells[i];
        let top = cap.min(m_rem);
        for x in (0..=top).rev() {
            apply(res, c, x, false);
            assigned.push(x);
            order.push(i);
            if rec(cells, used, res, m_rem - x, assigned, order) {
                return true;
            }
            order.pop();
            assigned.pop();
            apply(res, c, x, true);
        }
        used[i] = false;
        false
    }

    if rec(&cells, &mut used, &mut residual, m, &mut assigned, &mut order) {
        let mut joint: Joint = order
            .iter()
            .zip(&assigned)
            .filter(|(_, &x)| x > 0)
            .map(|(&i, &x)| (cells[i], x))
            .collect();
        joint.sort_unstable_by_key(|&(c, _)| c);
        debug_assert!(projections_within(&joint, &inst.counts));
        Some(joint)
    } else {
        None
    }
}

/// Sanity check: projections of a joint stay inside the quarter counts.
pub(crate) fn projections_within(joint: &Joint, counts: &Counts) -> bool {
    let mut proj: Counts = [[[0; 3]; 3]; 4];
    for &((u, v, up, vp), x) in joint {
        proj[0][u][vp] += x;
        proj[1][u][v] += x;
        proj[2][up][v] += x;
        proj[3][up][vp] += x;
    }
    for k in 0..4 {
        for i in 0..3 {
            for j in 0..3 {
                if proj[k][i][j] > counts[k][i][j] {
                    return false;
                }
            }
        }
    }
    true
}

/// Projection of a joint onto one quarter.
pub(crate) fn project(joint: &Joint, quarter: usize) -> [[usize; 3]; 3] {
    let mut out = [[0usize; 3]; 3];
    for &((u, v, up, vp), x) in joint {
        let (i, j) = match quarter {
            0 => (u, vp),
            1 => (u, v),
            2 => (up, v),
            _ => (up, vp),
        };
        out[i][j] += x;
    }
    out
}
