//! Strong secondary objectives on chains.
//!
//! Positions in the segment routines are 1-based: position `k` holds vertex
//! `k - 1`, position `0` is a `-∞` sentinel and position `n + 1` a `+∞`
//! sentinel.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::{Instance, Norm, RegressionResult};
use crate::pava::{pava, PooledPrefix};
use crate::relabel::{trim_err, weak_l0inf};

/// Kept-set size and accumulated error of a partial solution, plus the
/// predecessor it was reached from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostPair {
    pub count: usize,
    pub error: f64,
    pub back: usize,
}

impl CostPair {
    /// Larger count wins; equal counts prefer the smaller error.
    pub fn better_than(&self, other: &Self) -> bool {
        self.count > other.count || (self.count == other.count && self.error < other.error)
    }

    /// The better of two pairs; `self` on a tie.
    pub fn maxmin(self, other: Self) -> Self {
        if other.better_than(&self) {
            other
        } else {
            self
        }
    }
}

pub(crate) fn extended(values: &[f64]) -> Vec<f64> {
    let mut ext = Vec::with_capacity(values.len() + 2);
    ext.push(f64::NEG_INFINITY);
    ext.extend_from_slice(values);
    ext.push(f64::INFINITY);
    ext
}

fn check_norm(p: Norm) -> Result<()> {
    match p {
        Norm::L1 | Norm::L2 => Ok(()),
        Norm::LInf => Err(Error::InvalidExponent(f64::INFINITY)),
    }
}

/// Calls `emit(j, error)` for every potential successor `j` of position `i`.
fn scan_successors(ext: &[f64], i: usize, p: Norm, mut emit: impl FnMut(usize, f64)) {
    let last = ext.len() - 1;
    let a = ext[i];
    let mut ceil = f64::INFINITY;
    let mut accepted = false;
    let mut pooled = PooledPrefix::new();
    let (mut cnt_above, mut sum_above, mut cnt_below, mut sum_below) = (0.0, 0.0, 0.0, 0.0);
    let (mut d, mut min_d) = (0i64, 0i64);
    for j in i + 1..=last {
        let b = ext[j];
        let is_successor = if j == last {
            !accepted
        } else {
            b >= a && b < ceil
        };
        if is_successor {
            let err = match p {
                Norm::L2 => pooled.clamped_cost(a, b),
                _ if a == f64::NEG_INFINITY => sum_above - b * cnt_above,
                _ if b == f64::INFINITY => a * cnt_below - sum_below,
                _ => {
                    let to_b = sum_above - b * cnt_above + b * cnt_below - sum_below;
                    to_b + (b - a) * min_d as f64
                }
            };
            emit(j, err);
            accepted = true;
            ceil = b;
            if b == a {
                break;
            }
        }
        if j == last {
            break;
        }
        match p {
            Norm::L2 => pooled.push(b),
            _ if b >= a => {
                cnt_above += 1.0;
                sum_above += b;
                d += 1;
            }
            _ => {
                cnt_below += 1.0;
                sum_below += b;
                d -= 1;
                min_d = min_d.min(d);
            }
        }
    }
}

/// Optimal constrained errors (`Σ|f − g|^p`) from position `i` to each of
/// its potential successors, in increasing order of position.
pub fn segment_lp_errors(values: &[f64], i: usize, p: Norm) -> Result<Vec<(usize, f64)>> {
    check_norm(p)?;
    if i > values.len() {
        return Err(Error::VertexOutOfRange {
            vertex: i,
            n: values.len() + 1,
        });
    }
    let ext = extended(values);
    let mut out = Vec::new();
    scan_successors(&ext, i, p, |j, e| out.push((j, e)));
    Ok(out)
}

/// Optimal constrained error of the segment between positions `i` and `j`.
pub fn segment_lp_error(values: &[f64], i: usize, j: usize, p: Norm) -> Result<f64> {
    segment_lp_errors(values, i, p)?
        .into_iter()
        .find(|&(k, _)| k == j)
        .map(|(_, e)| e)
        .ok_or(Error::NotPotentialSuccessor { from: i, to: j })
}

/// Optimal fill of the open segment between positions `i` and `j`.
fn segment_fill(ext: &[f64], i: usize, j: usize, p: Norm) -> Vec<f64> {
    let (a, b) = (ext[i], ext[j]);
    let inner = &ext[i + 1..j];
    match p {
        Norm::L2 => pava(inner, &vec![1.0; inner.len()])
            .into_iter()
            .map(|x| x.max(a).min(b))
            .collect(),
        _ => {
            // the last prefix minimizing (#above - #below) takes `a`
            let (mut d, mut best, mut split) = (0i64, 0i64, 0usize);
            for (t, &x) in inner.iter().enumerate() {
                d += if x >= a { 1 } else { -1 };
                if d <= best {
                    best = d;
                    split = t + 1;
                }
            }
            (0..inner.len())
                .map(|t| if t < split { a } else { b })
                .collect()
        }
    }
}

fn violators_kept(inst: &Instance, g: &[f64]) -> Vec<usize> {
    let mask = inst.violator_mask();
    (0..g.len())
        .filter(|&v| mask[v] && g[v] == inst.values()[v])
        .collect()
}

/// Among isotonic functions that keep a maximum set of labels, one with the
/// smallest `L_p` error (`p ∈ {1, 2}`).
pub fn strong_l0p_linear(inst: &Instance, p: Norm) -> Result<RegressionResult> {
    if !inst.order().is_linear() {
        return Err(Error::RequiresLinear("strong L0,p"));
    }
    check_norm(p)?;
    let f = inst.numeric_values()?;
    let n = f.len();
    let ext = extended(f);
    let mut table: Vec<Option<CostPair>> = vec![None; n + 2];
    table[0] = Some(CostPair {
        count: 0,
        error: 0.0,
        back: 0,
    });
    for i in 0..=n {
        let Some(here) = table[i] else { continue };
        scan_successors(&ext, i, p, |j, err| {
            let cand = CostPair {
                count: here.count + usize::from(j <= n),
                error: here.error + err,
                back: i,
            };
            table[j] = Some(match table[j] {
                Some(cur) => cur.maxmin(cand),
                None => cand,
            });
        });
    }
    let mut g = vec![0.0; n];
    let mut j = n + 1;
    while j > 0 {
        let i = table[j].expect("reachable").back;
        for (k, x) in segment_fill(&ext, i, j, p).into_iter().enumerate() {
            g[i + k] = x;
        }
        if i > 0 {
            g[i - 1] = ext[i];
        }
        j = i;
    }
    let kept = violators_kept(inst, &g);
    Ok(RegressionResult::assemble(
        f,
        inst.scale(),
        g,
        kept,
        Some(p),
    ))
}

/// Fenwick tree of prefix maxima over value ranks.
struct PrefixBest {
    tree: Vec<Option<(usize, f64, usize)>>,
}

fn beats(a: &(usize, f64, usize), b: &(usize, f64, usize)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

impl PrefixBest {
    fn new(n: usize) -> Self {
        Self {
            tree: vec![None; n + 1],
        }
    }

    fn update(&mut self, rank: usize, item: (usize, f64, usize)) {
        let mut k = rank;
        while k < self.tree.len() {
            if self.tree[k].is_none_or(|cur| beats(&item, &cur)) {
                self.tree[k] = Some(item);
            }
            k += k & k.wrapping_neg();
        }
    }

    fn query(&self, rank: usize) -> Option<(usize, f64, usize)> {
        let mut best: Option<(usize, f64, usize)> = None;
        let mut k = rank;
        while k > 0 {
            if let Some(x) = self.tree[k] {
                if best.is_none_or(|b| beats(&x, &b)) {
                    best = Some(x);
                }
            }
            k -= k & k.wrapping_neg();
        }
        best
    }
}

/// A maximum kept set minimizing the largest trim error, filled by the
/// weak L∞ regression. `threshold` carries that trim error.
pub fn strong_l0inf_linear(inst: &Instance) -> Result<RegressionResult> {
    if !inst.order().is_linear() {
        return Err(Error::RequiresLinear("strong L0,inf on a chain"));
    }
    let f = inst.numeric_values()?;
    let n = f.len();
    let r = trim_err(inst.order(), f);
    let ranks = inst.ranks();
    let mut best = PrefixBest::new(inst.scale().len());
    let mut back = vec![usize::MAX; n];
    let mut top: Option<(usize, f64, usize)> = None;
    for v in 0..n {
        let (len, worst) = match best.query(ranks[v]) {
            Some((len, worst, u)) => {
                back[v] = u;
                (len + 1, worst.max(r[v]))
            }
            None => (1, r[v]),
        };
        let item = (len, worst, v);
        best.update(ranks[v], item);
        if top.is_none_or(|t| beats(&item, &t)) {
            top = Some(item);
        }
    }
    let mut chain = Vec::new();
    let mut cur = top.map(|t| t.2);
    while let Some(v) = cur {
        chain.push(v);
        cur = (back[v] != usize::MAX).then_some(back[v]);
    }
    let mask = inst.violator_mask();
    let kept: Vec<usize> = chain.into_iter().rev().filter(|&v| mask[v]).collect();
    let mut res = weak_l0inf(inst, &kept)?;
    res.threshold = Some(top.map_or(0.0, |t| t.1));
    Ok(res)
}

const DEAD: i32 = i32::MIN;

/// Sliding-window maxima for windows whose ends never move left. Entries
/// equal to `DEAD` are ignored.
#[derive(Default)]
struct Window {
    next: usize,
    first: VecDeque<usize>,
    last: VecDeque<usize>,
}

impl Window {
    fn reset(&mut self) {
        self.next = 0;
        self.first.clear();
        self.last.clear();
    }

    /// Maximum over `vals[lo..=hi]` with its first and last positions.
    fn query(&mut self, vals: &[i32], lo: usize, hi: usize) -> Option<(i32, usize, usize)> {
        while self.next <= hi && self.next < vals.len() {
            let x = vals[self.next];
            if x != DEAD {
                while self.first.back().is_some_and(|&b| vals[b] < x) {
                    self.first.pop_back();
                }
                self.first.push_back(self.next);
                while self.last.back().is_some_and(|&b| vals[b] <= x) {
                    self.last.pop_back();
                }
                self.last.push_back(self.next);
            }
            self.next += 1;
        }
        while self.first.front().is_some_and(|&b| b < lo) {
            self.first.pop_front();
        }
        while self.last.front().is_some_and(|&b| b < lo) {
            self.last.pop_front();
        }
        let &a = self.first.front()?;
        let &z = self.last.front()?;
        Some((vals[a], a, z))
    }
}

/// The isotonic relabeling whose stage vector `(n_0, n_1, …)` (the number
/// of vertices moved by exactly `d` label steps) is lexically largest.
///
/// Each stage maximizes `n_d` over the paths that survived the earlier
/// stages: `A` counts over prefixes ending in a cell, `B` over suffixes
/// starting in it, cells below the stage optimum die, and every surviving
/// cell keeps the interval of predecessor labels that stay optimal.
pub fn strong_l0_ordinal(inst: &Instance) -> Result<RegressionResult> {
    if !inst.order().is_linear() {
        return Err(Error::RequiresLinear("strong L0"));
    }
    let n = inst.len();
    let l = inst.scale().len();
    let f: Vec<usize> = inst.ranks().iter().map(|&r| r - 1).collect();
    if n == 0 {
        return Ok(RegressionResult::assemble(
            &[],
            inst.scale(),
            Vec::new(),
            Vec::new(),
            None,
        ));
    }
    let cell = |i: usize, j: usize| i * l + j;
    let mut live = vec![true; n * l];
    let mut lo = vec![0u32; n * l];
    let mut hi: Vec<u32> = (0..n * l).map(|c| (c % l) as u32).collect();
    let mut a = vec![DEAD; n * l];
    let mut b = vec![DEAD; n * l];
    let mut window = Window::default();
    let mut counts = Vec::with_capacity(l);
    for s in 0..l {
        let e = |i: usize, j: usize| i32::from(j.abs_diff(f[i]) == s);
        for j in 0..l {
            a[cell(0, j)] = if live[cell(0, j)] { e(0, j) } else { DEAD };
        }
        for i in 1..n {
            window.reset();
            let (prev, row) = a.split_at_mut(i * l);
            let prev = &prev[(i - 1) * l..];
            for j in 0..l {
                let c = cell(i, j);
                row[j] = if live[c] {
                    let (best, _, _) = window
                        .query(prev, lo[c] as usize, hi[c] as usize)
                        .expect("live cell has a live predecessor");
                    best + e(i, j)
                } else {
                    DEAD
                };
            }
        }
        for j in 0..l {
            b[cell(n - 1, j)] = if live[cell(n - 1, j)] {
                e(n - 1, j)
            } else {
                DEAD
            };
        }
        for i in (0..n - 1).rev() {
            window.reset();
            let (row, next) = b.split_at_mut((i + 1) * l);
            let row = &mut row[i * l..];
            let next = &next[..l];
            let succ = (i + 1) * l;
            // successors k with lo(k) ≤ j ≤ hi(k) form a range of live k
            let (mut k_lo, mut k_scan, mut k_hi) = (0usize, 0usize, None);
            for j in 0..l {
                while k_lo < l && (!live[succ + k_lo] || (hi[succ + k_lo] as usize) < j) {
                    k_lo += 1;
                }
                while k_scan < l && (!live[succ + k_scan] || lo[succ + k_scan] as usize <= j) {
                    if live[succ + k_scan] {
                        k_hi = Some(k_scan);
                    }
                    k_scan += 1;
                }
                let c = cell(i, j);
                row[j] = if live[c] {
                    let top = k_hi.expect("live cell has a live successor");
                    let (best, _, _) = window
                        .query(next, k_lo, top)
                        .expect("live cell has a live successor");
                    best + e(i, j)
                } else {
                    DEAD
                };
            }
        }
        let m = (0..l)
            .filter(|&j| live[cell(n - 1, j)])
            .map(|j| a[cell(n - 1, j)])
            .max();
        let m = m.expect("some cell survives");
        for i in 0..n {
            for j in 0..l {
                let c = cell(i, j);
                if live[c] && a[c] + b[c] - e(i, j) < m {
                    live[c] = false;
                    a[c] = DEAD;
                }
            }
        }
        for i in 1..n {
            window.reset();
            let prev = &a[(i - 1) * l..i * l];
            for j in 0..l {
                let c = cell(i, j);
                if !live[c] {
                    continue;
                }
                let (best, first, last) = window
                    .query(prev, lo[c] as usize, hi[c] as usize)
                    .expect("live cell has a live predecessor");
                debug_assert_eq!(best + b[c], m);
                lo[c] = first as u32;
                hi[c] = last as u32;
            }
        }
        counts.push(m as usize);
    }
    let mut labels = Vec::with_capacity(n);
    let mut prev = (0..l)
        .find(|&j| live[cell(0, j)])
        .expect("some cell survives");
    labels.push(prev);
    for i in 1..n {
        prev = (0..l)
            .find(|&j| {
                let c = cell(i, j);
                live[c] && lo[c] as usize <= prev && prev <= hi[c] as usize
            })
            .expect("a surviving path continues");
        labels.push(prev);
    }
    let scale = inst.scale();
    let g: Vec<f64> = labels.iter().map(|&j| scale.value(j + 1)).collect();
    let kept = violators_kept(inst, &g);
    let res = RegressionResult::assemble(inst.values(), scale, g, kept, None);
    debug_assert_eq!(res.stage_counts.as_deref(), Some(counts.as_slice()));
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{is_isotonic, LabelFunction, LabelScale, OrderSpec};
    use crate::validate;
    use proptest::prelude::*;

    const HUMP: [f64; 6] = [0.0, 5.0, 5.0, -1.0, 3.0, 3.0];

    fn linear(f: &[f64]) -> Instance {
        Instance::linear(f).unwrap()
    }

    #[test]
    fn maxmin_prefers_count_then_error() {
        let a = CostPair {
            count: 3,
            error: 9.0,
            back: 0,
        };
        let b = CostPair {
            count: 2,
            error: 1.0,
            back: 1,
        };
        let c = CostPair {
            count: 3,
            error: 4.0,
            back: 2,
        };
        assert_eq!(a.maxmin(b), a);
        assert_eq!(a.maxmin(c), c);
        assert_eq!(c.maxmin(a), c);
    }

    #[test]
    fn potential_successors() {
        let got: Vec<usize> = segment_lp_errors(&HUMP, 1, Norm::L1)
            .unwrap()
            .into_iter()
            .map(|x| x.0)
            .collect();
        assert_eq!(got, [2, 5]);
        let got: Vec<usize> = segment_lp_errors(&HUMP, 0, Norm::L1)
            .unwrap()
            .into_iter()
            .map(|x| x.0)
            .collect();
        assert_eq!(got, [1, 4]);
        let got: Vec<usize> = segment_lp_errors(&HUMP, 6, Norm::L1)
            .unwrap()
            .into_iter()
            .map(|x| x.0)
            .collect();
        assert_eq!(got, [7]);
    }

    #[test]
    fn segment_errors() {
        assert_eq!(segment_lp_error(&HUMP, 1, 5, Norm::L1).unwrap(), 8.0);
        assert_eq!(segment_lp_error(&HUMP, 1, 2, Norm::L1).unwrap(), 0.0);
        // fills (3,3,3), (3,3,0) is not isotonic
        assert_eq!(segment_lp_error(&HUMP, 1, 5, Norm::L2).unwrap(), 24.0);
        assert!(matches!(
            segment_lp_error(&HUMP, 1, 4, Norm::L1),
            Err(Error::NotPotentialSuccessor { from: 1, to: 4 })
        ));
    }

    #[test]
    fn strong_l0p_examples() {
        for p in [Norm::L1, Norm::L2] {
            let res = strong_l0p_linear(&linear(&HUMP), p).unwrap();
            assert_eq!(res.g, [0.0, 3.0, 3.0, 3.0, 3.0, 3.0]);
        }
        let res = strong_l0p_linear(&linear(&HUMP), Norm::L2).unwrap();
        assert_eq!(res.lp_error.unwrap().sum_pow, 24.0);
        let iso = linear(&[-1.0, 0.0, 0.0, 7.0]);
        let res = strong_l0p_linear(&iso, Norm::L1).unwrap();
        assert_eq!(
            (res.g.as_slice(), res.lp_error.unwrap().value),
            (iso.values(), 0.0)
        );
    }

    #[test]
    fn strong_l0inf_chain_examples() {
        let res = strong_l0inf_linear(&linear(&[0.0, 0.0, 8.0, -2.0, 2.0, 2.0])).unwrap();
        assert_eq!(res.kept, [0, 1, 4, 5]);
        assert_eq!(res.g, [0.0, 0.0, 2.0, 2.0, 2.0, 2.0]);
        assert_eq!(res.lp_error.unwrap().value, 6.0);
        let res = strong_l0inf_linear(&linear(&[1.0, 2.0])).unwrap();
        assert_eq!(
            (res.g.as_slice(), res.threshold),
            (&[1.0, 2.0][..], Some(0.0))
        );
    }

    #[test]
    fn strong_l0_examples() {
        let res = strong_l0_ordinal(&linear(&[2.0, 2.0, 2.0, 0.0, 0.0, 1.0, 1.0])).unwrap();
        assert_eq!(res.g, [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
        assert_eq!(res.l0_distance, 3);
        assert_eq!(res.stage_counts, Some(vec![4, 0, 3]));

        let scale = LabelScale::ordinal(["s", "m", "l"]).unwrap();
        let inst = validate(
            &OrderSpec::Linear { n: 3 },
            LabelFunction::new(vec![3, 2, 1]),
            scale,
        )
        .unwrap();
        let res = strong_l0_ordinal(&inst).unwrap();
        assert_eq!(res.g, [2.0, 2.0, 2.0]);
        assert_eq!(res.stage_counts, Some(vec![1, 2, 0]));

        let iso = linear(&[0.0, 1.0, 1.0, 4.0]);
        assert_eq!(strong_l0_ordinal(&iso).unwrap().g.as_slice(), iso.values());
    }

    #[test]
    fn rejects_other_orders() {
        let spec = OrderSpec::Dag {
            n: 2,
            edges: vec![(0, 1)],
        };
        let inst = Instance::from_values(&spec, &[2.0, 1.0]).unwrap();
        assert!(matches!(
            strong_l0p_linear(&inst, Norm::L1),
            Err(Error::RequiresLinear(_))
        ));
        assert!(matches!(
            strong_l0_ordinal(&inst),
            Err(Error::RequiresLinear(_))
        ));
        assert!(matches!(
            strong_l0inf_linear(&inst),
            Err(Error::RequiresLinear(_))
        ));
    }

    /// Lexically best stage vector by a direct DP over whole vectors.
    fn lex_best(f: &[usize], l: usize) -> Vec<usize> {
        let unit = |d: usize| {
            let mut v = vec![0; l];
            v[d] = 1;
            v
        };
        let add =
            |x: &[usize], y: &[usize]| x.iter().zip(y).map(|(a, b)| a + b).collect::<Vec<_>>();
        let mut row: Vec<Vec<usize>> = (0..l).map(|j| unit(j.abs_diff(f[0]))).collect();
        for &fi in &f[1..] {
            let mut best: Option<Vec<usize>> = None;
            row = (0..l)
                .map(|j| {
                    if best.as_ref().is_none_or(|b| row[j] > *b) {
                        best = Some(row[j].clone());
                    }
                    add(best.as_ref().unwrap(), &unit(j.abs_diff(fi)))
                })
                .collect();
        }
        row.into_iter().max().unwrap()
    }

    fn ordinal_chain() -> impl Strategy<Value = (Vec<usize>, usize)> {
        (1usize..6).prop_flat_map(|l| (prop::collection::vec(1..=l, 1..14), Just(l)))
    }

    proptest! {
        #[test]
        fn stage_vector_matches_the_vector_dp((ranks, l) in ordinal_chain()) {
            let scale = LabelScale::ordinal((1..=l).map(|i| format!("x{i}"))).unwrap();
            let n = ranks.len();
            let inst = validate(&OrderSpec::Linear { n }, LabelFunction::new(ranks), scale).unwrap();
            let res = strong_l0_ordinal(&inst).unwrap();
            prop_assert!(is_isotonic(inst.order(), &res.g));
            let f: Vec<usize> = inst.ranks().iter().map(|r| r - 1).collect();
            prop_assert_eq!(res.stage_counts.unwrap(), lex_best(&f, inst.scale().len()));
        }

        #[test]
        fn strong_l0p_keeps_a_maximum_set(f in prop::collection::vec(-5i32..6, 1..20)) {
            let f: Vec<f64> = f.into_iter().map(f64::from).collect();
            let inst = linear(&f);
            let lis = crate::relabel::l0_regression(&inst).unwrap().l0_distance;
            for p in [Norm::L1, Norm::L2] {
                let res = strong_l0p_linear(&inst, p).unwrap();
                prop_assert!(is_isotonic(inst.order(), &res.g));
                prop_assert_eq!(res.l0_distance, lis);
            }
            let res = strong_l0inf_linear(&inst).unwrap();
            prop_assert!(is_isotonic(inst.order(), &res.g));
            prop_assert_eq!(res.l0_distance, lis);
        }
    }
}
