//! Chain regressions minimizing `Σ|f − g|^p + α·|{v : g(v) ≠ f(v)}|` and
//! `‖f − g‖∞ + α·|{v : g(v) ≠ f(v)}|`.
//!
//! Segment positions follow the convention of [`crate::linear_strong`]:
//! position `k` holds vertex `k - 1`, with sentinels at `0` and `n + 1`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linear_strong::extended;
use crate::model::{Instance, LpError, Norm, RegressionResult};
use crate::pava::{pava, PooledPrefix};
use crate::relabel::{linf_isotonic, trim_err, weak_l0inf};

/// Versioned segment tree over the sorted distinct values: version `k`
/// holds the first `k` values, so any contiguous range of vertices is the
/// difference of two versions.
#[derive(Debug, Clone)]
pub struct PersistentStatTree {
    keys: Vec<f64>,
    left: Vec<u32>,
    right: Vec<u32>,
    count: Vec<u32>,
    sum: Vec<f64>,
    roots: Vec<u32>,
}

impl PersistentStatTree {
    pub fn new(values: &[f64]) -> Self {
        let mut keys = values.to_vec();
        keys.sort_by(f64::total_cmp);
        keys.dedup();
        let mut tree = Self {
            keys,
            left: vec![0],
            right: vec![0],
            count: vec![0],
            sum: vec![0.0],
            roots: vec![0],
        };
        for &v in values {
            let idx = tree.keys.partition_point(|&k| k < v);
            let prev = *tree.roots.last().unwrap();
            let root = tree.insert(prev, 0, tree.keys.len(), idx, v);
            tree.roots.push(root);
        }
        tree
    }

    fn insert(&mut self, prev: u32, lo: usize, hi: usize, idx: usize, v: f64) -> u32 {
        let p = prev as usize;
        let node = self.count.len() as u32;
        self.left.push(self.left[p]);
        self.right.push(self.right[p]);
        self.count.push(self.count[p] + 1);
        self.sum.push(self.sum[p] + v);
        if hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if idx < mid {
                let child = self.insert(self.left[p], lo, mid, idx, v);
                self.left[node as usize] = child;
            } else {
                let child = self.insert(self.right[p], mid, hi, idx, v);
                self.right[node as usize] = child;
            }
        }
        node
    }

    /// Number of inserted values.
    pub fn len(&self) -> usize {
        self.roots.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Count and sum of the values at vertices `lo..hi` that are `≤ x`.
    pub fn count_sum_le(&self, lo: usize, hi: usize, x: f64) -> (usize, f64) {
        let k = self.keys.partition_point(|&y| y <= x);
        let (mut a, mut b) = (self.roots[hi] as usize, self.roots[lo] as usize);
        let (mut l, mut r) = (0, self.keys.len());
        let (mut c, mut s) = (0u32, 0.0);
        while a != 0 && k > l {
            if k >= r {
                c += self.count[a] - self.count[b];
                s += self.sum[a] - self.sum[b];
                break;
            }
            let mid = (l + r) / 2;
            let (la, lb) = (self.left[a] as usize, self.left[b] as usize);
            if k <= mid {
                (a, b, r) = (la, lb, mid);
            } else {
                c += self.count[la] - self.count[lb];
                s += self.sum[la] - self.sum[lb];
                (a, b, l) = (self.right[a] as usize, self.right[b] as usize, mid);
            }
        }
        (c as usize, s)
    }

    /// Count and sum of all values at vertices `lo..hi`.
    pub fn count_sum(&self, lo: usize, hi: usize) -> (usize, f64) {
        let (a, b) = (self.roots[hi] as usize, self.roots[lo] as usize);
        (
            (self.count[a] - self.count[b]) as usize,
            self.sum[a] - self.sum[b],
        )
    }

    /// The `k`-th smallest (0-based) value at vertices `lo..hi`.
    ///
    /// # Panics
    /// If the range holds at most `k` values.
    pub fn kth(&self, lo: usize, hi: usize, mut k: usize) -> f64 {
        let (mut a, mut b) = (self.roots[hi] as usize, self.roots[lo] as usize);
        assert!(
            k < (self.count[a] - self.count[b]) as usize,
            "rank out of range"
        );
        let (mut l, mut r) = (0, self.keys.len());
        while r - l > 1 {
            let mid = (l + r) / 2;
            let (la, lb) = (self.left[a] as usize, self.left[b] as usize);
            let in_left = (self.count[la] - self.count[lb]) as usize;
            if k < in_left {
                (a, b, r) = (la, lb, mid);
            } else {
                k -= in_left;
                (a, b, l) = (self.right[a] as usize, self.right[b] as usize, mid);
            }
        }
        self.keys[l]
    }

    /// `Σ|f(v) − x|` over vertices `lo..hi`.
    pub fn abs_dev(&self, lo: usize, hi: usize, x: f64) -> f64 {
        let (cnt, tot) = self.count_sum(lo, hi);
        let (le, sum_le) = self.count_sum_le(lo, hi, x);
        x * le as f64 - sum_le + (tot - sum_le) - x * (cnt - le) as f64
    }
}

/// Incremental L1 fit of a growing interior: pooled blocks at their lower
/// medians, with prefix sums of the block errors.
struct MedianPrefix<'t> {
    tree: &'t PersistentStatTree,
    start: usize,
    end: usize,
    blocks: Vec<(usize, usize, f64)>,
    psae: Vec<f64>,
}

impl<'t> MedianPrefix<'t> {
    fn new(tree: &'t PersistentStatTree, start: usize) -> Self {
        Self {
            tree,
            start,
            end: start,
            blocks: Vec::new(),
            psae: vec![0.0],
        }
    }

    /// Appends the next vertex.
    fn push(&mut self) {
        let mut s = self.end;
        let e = self.end + 1;
        self.end = e;
        let mut med = self.tree.kth(s, e, 0);
        while let Some(&(ps, _, pm)) = self.blocks.last() {
            if pm <= med {
                break;
            }
            self.blocks.pop();
            self.psae.pop();
            s = ps;
            med = self.tree.kth(s, e, (e - s - 1) / 2);
        }
        self.blocks.push((s, e, med));
        let last = *self.psae.last().unwrap();
        self.psae.push(last + self.tree.abs_dev(s, e, med));
    }

    fn clamped_cost(&self, a: f64, b: f64) -> f64 {
        let nb = self.blocks.len();
        let low = self.blocks.partition_point(|blk| blk.2 < a);
        let high = self.blocks.partition_point(|blk| blk.2 <= b).max(low);
        let mut cost = self.psae[high] - self.psae[low];
        if low > 0 {
            cost += self.tree.abs_dev(self.start, self.blocks[low - 1].1, a);
        }
        if high < nb {
            cost += self.tree.abs_dev(self.blocks[high].0, self.end, b);
        }
        cost
    }

    fn fill(&self, a: f64, b: f64) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|&(s, e, m)| std::iter::repeat_n(m.max(a).min(b), e - s))
            .collect()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )))
    }
}

fn check_norm(p: Norm) -> Result<()> {
    match p {
        Norm::L1 | Norm::L2 => Ok(()),
        Norm::LInf => Err(Error::InvalidExponent(f64::INFINITY)),
    }
}

/// Calls `emit(j, error)` for every `j > i` with `ext[j] ≥ ext[i]`, where
/// the error is that of the best fill of `i + 1..j` within `[ext[i], ext[j]]`.
fn scan_segments(
    ext: &[f64],
    i: usize,
    p: Norm,
    tree: Option<&PersistentStatTree>,
    mut emit: impl FnMut(usize, f64),
) {
    let last = ext.len() - 1;
    let a = ext[i];
    match (p, tree) {
        (Norm::L1, Some(tree)) => {
            let mut fit = MedianPrefix::new(tree, i);
            for j in i + 1..=last {
                if ext[j] >= a {
                    emit(j, fit.clamped_cost(a, ext[j]));
                }
                if j < last {
                    fit.push();
                }
            }
        }
        _ => {
            let mut fit = PooledPrefix::new();
            for j in i + 1..=last {
                if ext[j] >= a {
                    emit(j, fit.clamped_cost(a, ext[j]));
                }
                if j < last {
                    fit.push(ext[j]);
                }
            }
        }
    }
}

fn segment_fill(
    ext: &[f64],
    i: usize,
    j: usize,
    p: Norm,
    tree: Option<&PersistentStatTree>,
) -> Vec<f64> {
    let (a, b) = (ext[i], ext[j]);
    match (p, tree) {
        (Norm::L1, Some(tree)) => {
            let mut fit = MedianPrefix::new(tree, i);
            for _ in i + 1..j {
                fit.push();
            }
            fit.fill(a, b)
        }
        _ => {
            let inner = &ext[i + 1..j];
            pava(inner, &vec![1.0; inner.len()])
                .into_iter()
                .map(|x| x.max(a).min(b))
                .collect()
        }
    }
}

/// Optimal `Σ|f − g|^p` over isotonic fills of the open segment between
/// positions `i` and `j`, with `g` pinned to `f` at both ends.
pub fn segment_lp_penalized(values: &[f64], i: usize, j: usize, p: Norm) -> Result<f64> {
    check_norm(p)?;
    let ext = extended(values);
    if i >= j || j >= ext.len() || ext[j] < ext[i] {
        return Err(Error::InvalidParameter(format!(
            "segment {i}..{j} is not increasing"
        )));
    }
    let tree = (p == Norm::L1).then(|| PersistentStatTree::new(values));
    let mut out = 0.0;
    scan_segments(&ext, i, p, tree.as_ref(), |k, e| {
        if k == j {
            out = e;
        }
    });
    Ok(out)
}

/// Isotonic `g` minimizing `Σ|f − g|^p + α·(changed vertices)` for
/// `p ∈ {1, 2}`. `objective` carries the minimum.
pub fn penalized_lp(inst: &Instance, alpha: f64, p: Norm) -> Result<RegressionResult> {
    if !inst.order().is_linear() {
        return Err(Error::RequiresLinear("penalized regression"));
    }
    check_alpha(alpha)?;
    check_norm(p)?;
    let f = inst.numeric_values()?;
    let n = f.len();
    let ext = extended(f);
    let tree = (p == Norm::L1).then(|| PersistentStatTree::new(f));
    let mut best = vec![f64::INFINITY; n + 2];
    let mut back = vec![0usize; n + 2];
    best[0] = 0.0;
    for i in 0..=n {
        let base = best[i];
        scan_segments(&ext, i, p, tree.as_ref(), |j, err| {
            let cand = base + alpha * (j - i - 1) as f64 + err;
            // later predecessors win ties
            if cand <= best[j] {
                best[j] = cand;
                back[j] = i;
            }
        });
    }
    let mut g = vec![0.0; n];
    let mut j = n + 1;
    while j > 0 {
        let i = back[j];
        for (k, x) in segment_fill(&ext, i, j, p, tree.as_ref())
            .into_iter()
            .enumerate()
        {
            g[i + k] = x;
        }
        if i > 0 {
            g[i - 1] = ext[i];
        }
        j = i;
    }
    finish(inst, g, alpha, p)
}

fn finish(inst: &Instance, g: Vec<f64>, alpha: f64, p: Norm) -> Result<RegressionResult> {
    let f = inst.values();
    let mask = inst.violator_mask();
    let kept = (0..g.len()).filter(|&v| mask[v] && g[v] == f[v]).collect();
    let mut res = RegressionResult::assemble(f, inst.scale(), g, kept, Some(p));
    let err = res.lp_error.map_or(0.0, |e: LpError| e.sum_pow);
    res.objective = Some(err + alpha * res.l0_distance as f64);
    Ok(res)
}

/// Longest nondecreasing subsequence over points inserted in any order of
/// position. The length is recomputed lazily after inserts.
#[derive(Debug, Clone, Default)]
pub struct LisTracker {
    points: BTreeMap<usize, f64>,
    cached: Option<usize>,
}

impl LisTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, position: usize, value: f64) -> Result<()> {
        if self.points.insert(position, value).is_some() {
            return Err(Error::DuplicatePosition(position));
        }
        self.cached = None;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.points.len()
    }

    /// Length of a longest nondecreasing subsequence of the inserted points.
    pub fn length(&mut self) -> usize {
        if let Some(len) = self.cached {
            return len;
        }
        let len = patience(self.points.values().copied()).len();
        self.cached = Some(len);
        len
    }
}

fn patience(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut tails: Vec<f64> = Vec::new();
    for x in values {
        let k = tails.partition_point(|&t| t <= x);
        if k == tails.len() {
            tails.push(x);
        } else {
            tails[k] = x;
        }
    }
    tails
}

/// LIS length after each insertion of `(position, value)`.
pub fn lis_insert_only(stream: &[(usize, f64)]) -> Result<Vec<usize>> {
    let mut tracker = LisTracker::new();
    stream
        .iter()
        .map(|&(pos, x)| {
            tracker.insert(pos, x)?;
            Ok(tracker.length())
        })
        .collect()
}

/// A longest nondecreasing subsequence of `f` restricted to `eligible`.
fn longest_chain(f: &[f64], eligible: &[bool]) -> Vec<usize> {
    let mut tails: Vec<usize> = Vec::new();
    let mut back = vec![usize::MAX; f.len()];
    for v in (0..f.len()).filter(|&v| eligible[v]) {
        let k = tails.partition_point(|&t| f[t] <= f[v]);
        if k > 0 {
            back[v] = tails[k - 1];
        }
        if k == tails.len() {
            tails.push(v);
        } else {
            tails[k] = v;
        }
    }
    let mut chain = Vec::with_capacity(tails.len());
    let mut cur = tails.last().copied();
    while let Some(v) = cur {
        chain.push(v);
        cur = (back[v] != usize::MAX).then_some(back[v]);
    }
    chain.reverse();
    chain
}

/// Isotonic `g` minimizing `‖f − g‖∞ + α·(changed vertices)`. `threshold`
/// carries the selected trim-error bound and `objective` the minimum.
pub fn penalized_linf(inst: &Instance, alpha: f64) -> Result<RegressionResult> {
    if !inst.order().is_linear() {
        return Err(Error::RequiresLinear("penalized regression"));
    }
    check_alpha(alpha)?;
    let f = inst.numeric_values()?;
    let n = f.len();
    let mid = linf_isotonic(inst.order(), f);
    let delta = f
        .iter()
        .zip(&mid)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let r = trim_err(inst.order(), f);
    let mut by_err: Vec<usize> = (0..n).collect();
    by_err.sort_by(|&u, &v| r[u].total_cmp(&r[v]).then(u.cmp(&v)));
    let mut tracker = LisTracker::new();
    let (mut best_eps, mut best_obj) = (0.0, delta + alpha * n as f64);
    let mut k = 0;
    while k < n {
        let eps = r[by_err[k]];
        while k < n && r[by_err[k]] == eps {
            tracker.insert(by_err[k], f[by_err[k]])?;
            k += 1;
        }
        let obj = delta.max(eps) + alpha * (n - tracker.length()) as f64;
        if obj < best_obj {
            (best_eps, best_obj) = (eps, obj);
        }
    }
    let eligible: Vec<bool> = r.iter().map(|&x| x <= best_eps).collect();
    let mask = inst.violator_mask();
    let kept: Vec<usize> = longest_chain(f, &eligible)
        .into_iter()
        .filter(|&v| mask[v])
        .collect();
    let mut res = weak_l0inf(inst, &kept)?;
    let err = res.lp_error.map_or(0.0, |e| e.value);
    res.objective = Some(err + alpha * res.l0_distance as f64);
    res.threshold = Some(best_eps);
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::is_isotonic;
    use proptest::prelude::*;

    const SPLICE: [f64; 8] = [0.0, 3.0, -3.0, -3.0, 0.0, -6.0, 6.0, 0.0];

    fn linear(f: &[f64]) -> Instance {
        Instance::linear(f).unwrap()
    }

    #[test]
    fn two_point_examples() {
        let res = penalized_lp(&linear(&[2.0, 0.0]), 1.0, Norm::L2).unwrap();
        assert_eq!(
            (res.g.as_slice(), res.objective),
            (&[1.0, 1.0][..], Some(4.0))
        );
        let res = penalized_lp(&linear(&[2.0, 0.0]), 5.0, Norm::L2).unwrap();
        assert_eq!(
            (res.g.as_slice(), res.objective),
            (&[0.0, 0.0][..], Some(9.0))
        );
        let iso = linear(&[0.0, 1.0, 1.0, 3.0]);
        for p in [Norm::L1, Norm::L2] {
            let res = penalized_lp(&iso, 0.5, p).unwrap();
            assert_eq!((res.g.as_slice(), res.objective), (iso.values(), Some(0.0)));
        }
        let res = penalized_linf(&iso, 0.5).unwrap();
        assert_eq!((res.g.as_slice(), res.objective), (iso.values(), Some(0.0)));
    }

    #[test]
    fn rejects_bad_alpha() {
        for alpha in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                penalized_lp(&linear(&[1.0]), alpha, Norm::L1),
                Err(Error::InvalidParameter(_))
            ));
            assert!(matches!(
                penalized_linf(&linear(&[1.0]), alpha),
                Err(Error::InvalidParameter(_))
            ));
        }
    }

    #[test]
    fn segment_examples() {
        let f = [0.0, 3.0, -3.0, 0.0];
        assert_eq!(segment_lp_penalized(&f, 1, 4, Norm::L1).unwrap(), 6.0);
        assert_eq!(segment_lp_penalized(&f, 1, 2, Norm::L1).unwrap(), 0.0);
        assert!(segment_lp_penalized(&[2.0, 1.0], 1, 2, Norm::L2).is_err());
    }

    #[test]
    fn linf_example_and_its_splice() {
        let inst = linear(&SPLICE);
        let alpha = 2.0;
        let res = penalized_linf(&inst, alpha).unwrap();
        assert_eq!(res.g, [-3.0, -3.0, -3.0, -3.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(res.lp_error.unwrap().value, 6.0);
        assert_eq!(res.l0_distance, 4);
        assert_eq!(res.objective, Some(6.0 + 4.0 * alpha));

        let left = penalized_linf(&linear(&SPLICE[..4]), alpha).unwrap();
        let right = penalized_linf(&linear(&SPLICE[4..]), alpha).unwrap();
        let joined: Vec<f64> = left.g.iter().chain(&right.g).copied().collect();
        if is_isotonic(inst.order(), &joined) {
            let e = LpError::between(Norm::LInf, &SPLICE, &joined).value;
            let changed = SPLICE.iter().zip(&joined).filter(|(a, b)| a != b).count();
            assert!(e + alpha * changed as f64 > res.objective.unwrap());
        }
    }

    #[test]
    fn lis_tracker_examples() {
        assert_eq!(
            lis_insert_only(&[(1, 5.0), (2, 3.0), (3, 4.0)]).unwrap(),
            [1, 1, 2]
        );
        assert_eq!(
            lis_insert_only(&[(3, 3.0), (1, 1.0), (2, 2.0)]).unwrap(),
            [1, 2, 3]
        );
        assert_eq!(
            lis_insert_only(&[(1, 1.0), (1, 2.0)]),
            Err(Error::DuplicatePosition(1))
        );
    }

    #[test]
    fn stat_tree_basics() {
        let t = PersistentStatTree::new(&[5.0, 1.0, 3.0, 3.0, 9.0]);
        assert_eq!(t.len(), 5);
        assert_eq!(t.count_sum_le(0, 5, 3.0), (3, 7.0));
        assert_eq!(t.count_sum_le(1, 4, 0.0), (0, 0.0));
        assert_eq!(t.kth(0, 5, 2), 3.0);
        assert_eq!(t.kth(2, 5, 2), 9.0);
        assert_eq!(t.abs_dev(0, 3, 3.0), 4.0);
    }

    proptest! {
        #[test]
        fn stat_tree_matches_scans(
            vals in prop::collection::vec(-20i32..20, 1..60),
            x in -25i32..25,
        ) {
            let f: Vec<f64> = vals.into_iter().map(f64::from).collect();
            let t = PersistentStatTree::new(&f);
            let x = f64::from(x);
            for lo in 0..f.len() {
                for hi in lo + 1..=f.len() {
                    let part = &f[lo..hi];
                    let le: Vec<f64> = part.iter().copied().filter(|&y| y <= x).collect();
                    prop_assert_eq!(t.count_sum_le(lo, hi, x), (le.len(), le.iter().sum::<f64>()));
                    let mut sorted = part.to_vec();
                    sorted.sort_by(f64::total_cmp);
                    let k = (hi - lo - 1) / 2;
                    prop_assert_eq!(t.kth(lo, hi, k), sorted[k]);
                }
            }
        }

        #[test]
        fn lis_tracker_matches_recomputation(
            vals in prop::collection::vec(0i32..8, 1..200),
            seed in any::<u64>(),
        ) {
            let n = vals.len();
            let mut order: Vec<usize> = (0..n).collect();
            // deterministic shuffle from the seed
            let mut s = seed | 1;
            for i in (1..n).rev() {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                order.swap(i, (s % (i as u64 + 1)) as usize);
            }
            let stream: Vec<(usize, f64)> = order.iter().map(|&p| (p, f64::from(vals[p]))).collect();
            let got = lis_insert_only(&stream).unwrap();
            for k in 0..n {
                let mut seen: Vec<(usize, f64)> = stream[..=k].to_vec();
                seen.sort_by_key(|e| e.0);
                prop_assert_eq!(got[k], patience(seen.iter().map(|e| e.1)).len());
            }
        }

        #[test]
        fn penalized_outputs_are_isotonic_and_bounded(
            vals in prop::collection::vec(-5i32..6, 1..16),
            alpha in prop::sample::select(vec![0.1, 1.0, 5.0]),
        ) {
            let f: Vec<f64> = vals.into_iter().map(f64::from).collect();
            let inst = linear(&f);
            let lis = f.len() - crate::relabel::l0_regression(&inst).unwrap().l0_distance;
            for p in [Norm::L1, Norm::L2] {
                let res = penalized_lp(&inst, alpha, p).unwrap();
                prop_assert!(is_isotonic(inst.order(), &res.g));
            }
            let res = penalized_linf(&inst, alpha).unwrap();
            prop_assert!(is_isotonic(inst.order(), &res.g));
            let mid = linf_isotonic(inst.order(), &f);
            let delta = LpError::between(Norm::LInf, &f, &mid).value;
            let obj = res.objective.unwrap();
            prop_assert!(obj >= delta - 1e-9);
            prop_assert!(obj >= alpha * (f.len() - lis) as f64 - 1e-9);
        }

        #[test]
        fn change_count_shrinks_as_alpha_grows(vals in prop::collection::vec(-5i32..6, 1..14)) {
            let f: Vec<f64> = vals.into_iter().map(f64::from).collect();
            let inst = linear(&f);
            for p in [Norm::L1, Norm::L2] {
                let mut prev = usize::MAX;
                let mut prev_obj = 0.0;
                for alpha in [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0] {
                    let res = penalized_lp(&inst, alpha, p).unwrap();
                    prop_assert!(res.l0_distance <= prev);
                    prop_assert!(res.objective.unwrap() >= prev_obj - 1e-9);
                    prev = res.l0_distance;
                    prev_obj = res.objective.unwrap();
                }
            }
        }
    }
}
