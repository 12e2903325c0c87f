//! Windows, trims and the L0 regressions built on a kept set.
//!
//! A kept set `C` names the violators whose labels survive; vertices in no
//! violating pair are always kept as well. The windows of `C` bound every
//! isotonic function that agrees with `f` on the kept vertices.

use crate::error::{Error, Result};
use crate::flow::max_isotonic_set;
use crate::maxflow::MaxFlow;
use crate::model::{Instance, Norm, Order, RegressionResult};
use crate::pava::pava;
use crate::violator::{EdgeSet, ViolatorDag};

/// Per-vertex bounds `[lo, hi]` induced by a kept set.
#[derive(Debug, Clone, PartialEq)]
pub struct Windows {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Windows {
    pub fn len(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }

    pub fn contains(&self, v: usize, x: f64) -> bool {
        self.lo[v] <= x && x <= self.hi[v]
    }
}

/// Kept vertices: `kept` together with every vertex in no violating pair.
pub fn kept_mask(inst: &Instance, kept: &[usize]) -> Result<Vec<bool>> {
    let n = inst.len();
    let mut mask: Vec<bool> = inst.violator_mask().iter().map(|v| !v).collect();
    for &v in kept {
        if v >= n {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
        mask[v] = true;
    }
    Ok(mask)
}

/// Windows of the vertices flagged in `mask`, with the scale ends as
/// sentinels.
pub fn windows_of_mask(
    order: &Order,
    f: &[f64],
    mask: &[bool],
    bottom: f64,
    top: f64,
) -> Result<Windows> {
    let low: Vec<f64> = (0..f.len())
        .map(|v| if mask[v] { f[v] } else { bottom })
        .collect();
    let high: Vec<f64> = (0..f.len())
        .map(|v| if mask[v] { f[v] } else { top })
        .collect();
    let lo = order.prefix_max(&low);
    let hi = order.suffix_min(&high);
    if (0..f.len()).any(|v| mask[v] && (lo[v] != f[v] || hi[v] != f[v])) {
        return Err(Error::NotIsotonicSet);
    }
    Ok(Windows { lo, hi })
}

/// Windows induced by the kept set `kept`.
pub fn windows(inst: &Instance, kept: &[usize]) -> Result<Windows> {
    let mask = kept_mask(inst, kept)?;
    let scale = inst.scale();
    windows_of_mask(
        inst.order(),
        inst.values(),
        &mask,
        scale.bottom(),
        scale.top(),
    )
}

/// Clamps every value into its window.
pub fn trim(values: &[f64], w: &Windows) -> Vec<f64> {
    values
        .iter()
        .enumerate()
        .map(|(v, &x)| x.max(w.lo[v]).min(w.hi[v]))
        .collect()
}

/// `max(max{f(u) − f(v) : u ⪯ v}, max{f(v) − f(u) : u ⪰ v})` per vertex.
pub fn trim_err(order: &Order, f: &[f64]) -> Vec<f64> {
    let up = order.prefix_max(f);
    let down = order.suffix_min(f);
    (0..f.len())
        .map(|v| (up[v] - f[v]).max(f[v] - down[v]))
        .collect()
}

/// Midpoint L∞ isotonic regression `(max{f(u) : u ⪯ v} + min{f(u) : u ⪰ v}) / 2`.
pub fn linf_isotonic(order: &Order, f: &[f64]) -> Vec<f64> {
    let up = order.prefix_max(f);
    let down = order.suffix_min(f);
    up.iter().zip(&down).map(|(a, b)| (a + b) / 2.0).collect()
}

/// An L0 isotonic regression: a maximum kept set, and `f` trimmed into its
/// windows and closed upward along the order.
pub fn l0_regression(inst: &Instance) -> Result<RegressionResult> {
    let vio = ViolatorDag::build(inst, EdgeSet::Reduction);
    let kept = max_isotonic_set(&vio, None);
    let w = windows(inst, &kept)?;
    // Trimming alone can leave an incomparable-window inversion on a dag;
    // the upward closure stays inside the windows and is isotonic.
    let g = inst.order().prefix_max(&trim(inst.values(), &w));
    Ok(RegressionResult::assemble(
        inst.values(),
        inst.scale(),
        g,
        kept,
        None,
    ))
}

/// A maximum kept set of the instance (violators only).
pub fn max_kept_set(inst: &Instance) -> Vec<usize> {
    max_isotonic_set(&ViolatorDag::build(inst, EdgeSet::Reduction), None)
}

/// Minimum-L1 isotonic function agreeing with `f` on the kept set.
pub fn weak_l01(inst: &Instance, kept: &[usize]) -> Result<RegressionResult> {
    let f = inst.numeric_values()?;
    let w = windows(inst, kept)?;
    let t = trim(f, &w);
    let fit = l1_isotonic_dag(inst.order(), &t, &vec![1.0; f.len()]);
    let g = trim(&fit, &w);
    Ok(RegressionResult::assemble(
        f,
        inst.scale(),
        g,
        kept.to_vec(),
        Some(Norm::L1),
    ))
}

/// L1 regression of `f`, trimmed afterwards.
pub fn optimize_then_trim_l1(inst: &Instance, kept: &[usize]) -> Result<RegressionResult> {
    let f = inst.numeric_values()?;
    let w = windows(inst, kept)?;
    let g = trim(&l1_isotonic_dag(inst.order(), f, &vec![1.0; f.len()]), &w);
    Ok(RegressionResult::assemble(
        f,
        inst.scale(),
        g,
        kept.to_vec(),
        Some(Norm::L1),
    ))
}

/// Weighted L1 isotonic regression over an arbitrary order, with values
/// taken from `values`. Ties resolve toward lower values.
///
/// # Panics
/// If the lengths differ from the order or a weight is not positive.
pub fn l1_isotonic_dag(order: &Order, values: &[f64], weights: &[f64]) -> Vec<f64> {
    let n = order.len();
    assert_eq!(values.len(), n, "one value per vertex");
    assert_eq!(weights.len(), n, "one weight per vertex");
    assert!(weights.iter().all(|&w| w > 0.0), "weights must be positive");
    let mut levels: Vec<f64> = values.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    let edges: Vec<(usize, usize)> = order.edges().collect();
    let mut group = vec![0usize; n];
    let mut local = vec![0usize; n];
    // (vertices, lowest level, highest level)
    let mut work = vec![((0..n).collect::<Vec<_>>(), 0, levels.len() - 1)];
    let mut tag = 0usize;
    while let Some((verts, a, b)) = work.pop() {
        if a == b {
            for &v in &verts {
                out[v] = levels[a];
            }
            continue;
        }
        let mid = (a + b) / 2;
        let (low, high) = (levels[mid], levels[mid + 1]);
        tag += 1;
        for (i, &v) in verts.iter().enumerate() {
            group[v] = tag;
            local[v] = i;
        }
        let (s, t) = (verts.len(), verts.len() + 1);
        let mut net = MaxFlow::<f64>::new(verts.len() + 2);
        for (i, &v) in verts.iter().enumerate() {
            let y = values[v];
            let gain = weights[v] * ((y - low).abs() - (y - high).abs());
            if gain > 0.0 {
                net.add_arc(s, i, gain, 0.0);
            } else if gain < 0.0 {
                net.add_arc(i, t, -gain, 0.0);
            }
        }
        for &(u, v) in &edges {
            if group[u] == tag && group[v] == tag {
                net.add_arc(local[u], local[v], f64::INFINITY, 0.0);
            }
        }
        net.run(s, t);
        let up = net.reachable_from(s);
        let (hi_set, lo_set): (Vec<usize>, Vec<usize>) = verts.iter().partition(|&&v| up[local[v]]);
        if !lo_set.is_empty() {
            work.push((lo_set, a, mid));
        }
        if !hi_set.is_empty() {
            work.push((hi_set, mid + 1, b));
        }
    }
    out
}

/// Minimum-L∞ isotonic function agreeing with `f` on the kept set: the
/// midpoint regression trimmed into the windows.
pub fn weak_l0inf(inst: &Instance, kept: &[usize]) -> Result<RegressionResult> {
    let f = inst.numeric_values()?;
    let w = windows(inst, kept)?;
    let g = trim(&linf_isotonic(inst.order(), f), &w);
    Ok(RegressionResult::assemble(
        f,
        inst.scale(),
        g,
        kept.to_vec(),
        Some(Norm::LInf),
    ))
}

/// `f` trimmed first, then replaced by its midpoint regression.
pub fn trim_then_optimize_linf(inst: &Instance, kept: &[usize]) -> Result<RegressionResult> {
    let f = inst.numeric_values()?;
    let w = windows(inst, kept)?;
    let g = linf_isotonic(inst.order(), &trim(f, &w));
    Ok(RegressionResult::assemble(
        f,
        inst.scale(),
        g,
        kept.to_vec(),
        Some(Norm::LInf),
    ))
}

/// Among all maximum kept sets, one whose largest trim error is smallest,
/// with its weak L∞ regression. `threshold` carries that trim error.
pub fn strong_l0inf(inst: &Instance) -> Result<RegressionResult> {
    let f = inst.numeric_values()?;
    let vio = ViolatorDag::build(inst, EdgeSet::Reduction);
    let best = max_isotonic_set(&vio, None);
    let r = trim_err(inst.order(), f);
    let mut cuts: Vec<f64> = vio.vertices().iter().map(|&v| r[v]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let solve = |t: f64| {
        let required: Vec<bool> = r.iter().map(|&x| x <= t).collect();
        max_isotonic_set(&vio, Some(&required))
    };
    let (mut lo, mut hi) = (0usize, cuts.len());
    let mut kept = best.clone();
    while lo < hi {
        let mid = (lo + hi) / 2;
        let c = solve(cuts[mid]);
        if c.len() == best.len() {
            kept = c;
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let threshold = kept.iter().map(|&v| r[v]).fold(0.0, f64::max);
    let mut res = weak_l0inf(inst, &kept)?;
    res.threshold = Some(threshold);
    Ok(res)
}

/// Staged L0 regression that, after keeping a maximum set, keeps as many
/// vertices as possible one label step away, then two, and so on.
///
/// `initial` replaces the first-stage kept set; it must be a maximum kept set.
pub fn weak_l00(inst: &Instance, initial: Option<&[usize]>) -> Result<RegressionResult> {
    let n = inst.len();
    let f = inst.values();
    let scale = inst.scale();
    let vio = ViolatorDag::build(inst, EdgeSet::Reduction);
    let is_violator = vio.membership();
    let first = match initial {
        Some(c) => c.to_vec(),
        None => max_isotonic_set(&vio, None),
    };
    let mut pinned = kept_mask(inst, &first)?;
    let mut g = f.to_vec();
    let rank = |x: f64| scale.rank_of(x).expect("trimmed values lie on the scale");
    for d in 1..scale.len() {
        let w = windows_of_mask(inst.order(), &g, &pinned, scale.bottom(), scale.top())?;
        let t = trim(f, &w);
        let stage: Vec<bool> = (0..n)
            .map(|v| is_violator[v] && !pinned[v] && rank(t[v]).abs_diff(rank(f[v])) == d)
            .collect();
        if !stage.iter().any(|&x| x) {
            continue;
        }
        for v in max_isotonic_set(&vio, Some(&stage)) {
            pinned[v] = true;
            g[v] = t[v];
        }
    }
    let w = windows_of_mask(inst.order(), &g, &pinned, scale.bottom(), scale.top())?;
    let g = inst.order().prefix_max(&trim(&g, &w));
    Ok(RegressionResult::assemble(f, scale, g, first, None))
}

/// ε-approximate minimum-L2 isotonic function agreeing with `f` on the kept
/// set, for chains: weighted L2 regression with heavy weights on the kept
/// vertices, trimmed into the windows.
pub fn weak_l02_approx(inst: &Instance, kept: &[usize], eps: f64) -> Result<RegressionResult> {
    if !inst.order().is_linear() {
        return Err(Error::RequiresLinear("weak L0,2 approximation"));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let f = inst.numeric_values()?;
    let mask = kept_mask(inst, kept)?;
    let w = windows(inst, kept)?;
    let mass: f64 = f.iter().map(|x| x.abs()).sum();
    let alpha = if mass > 0.0 { mass / eps } else { 1.0 };
    let weights: Vec<f64> = mask.iter().map(|&k| if k { alpha } else { 1.0 }).collect();
    let g = trim(&pava(f, &weights), &w);
    Ok(RegressionResult::assemble(
        f,
        inst.scale(),
        g,
        kept.to_vec(),
        Some(Norm::L2),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{is_isotonic, LabelFunction, LabelScale, OrderSpec};
    use crate::validate;
    use proptest::prelude::*;

    const SHIFTED: [f64; 8] = [0.0, 3.0, 1.0, -1.0, -2.0, -3.0, -4.0, 2.0];
    const SPIKE: [f64; 6] = [0.0, 0.0, 8.0, -2.0, 2.0, 2.0];

    fn linear(f: &[f64]) -> Instance {
        Instance::linear(f).unwrap()
    }

    fn lms() -> Instance {
        let scale = LabelScale::ordinal(["s", "m", "l"]).unwrap();
        validate(
            &OrderSpec::Linear { n: 3 },
            LabelFunction::new(vec![3, 2, 1]),
            scale,
        )
        .unwrap()
    }

    #[test]
    fn windows_of_the_shifted_chain() {
        let w = windows(&linear(&SHIFTED), &[0, 2, 7]).unwrap();
        assert_eq!((w.lo[1], w.hi[1]), (0.0, 1.0));
        for v in 3..=6 {
            assert_eq!((w.lo[v], w.hi[v]), (1.0, 2.0));
        }
        let w = windows(&linear(&SHIFTED), &[]).unwrap();
        assert!(w.lo.iter().all(|&x| x == -4.0) && w.hi.iter().all(|&x| x == 3.0));
        let iso = linear(&[1.0, 2.0, 2.0, 5.0]);
        let w = windows(&iso, &[0, 1, 2, 3]).unwrap();
        assert_eq!(
            (w.lo.clone(), w.hi.clone()),
            (iso.values().to_vec(), iso.values().to_vec())
        );
    }

    #[test]
    fn windows_reject_a_violating_kept_set() {
        assert_eq!(
            windows(&linear(&[2.0, 1.0]), &[0, 1]),
            Err(Error::NotIsotonicSet)
        );
        assert!(matches!(
            windows(&linear(&[2.0, 1.0]), &[5]),
            Err(Error::VertexOutOfRange { vertex: 5, n: 2 })
        ));
    }

    #[test]
    fn trims() {
        let inst = linear(&SHIFTED);
        let w = windows(&inst, &[0, 2, 7]).unwrap();
        let t = trim(inst.values(), &w);
        assert_eq!(t, [0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0]);
        assert_eq!(trim(&t, &w), t);

        let inst = linear(&SPIKE);
        let w = windows(&inst, &[0, 1, 4, 5]).unwrap();
        let g = trim(&linf_isotonic(inst.order(), inst.values()), &w);
        assert_eq!(g, [0.0, 0.0, 2.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn trim_errors() {
        let inst = linear(&SPIKE);
        assert_eq!(
            trim_err(inst.order(), inst.values()),
            [2.0, 2.0, 10.0, 10.0, 6.0, 6.0]
        );
        let inst = linear(&[5.0, 1.0]);
        assert_eq!(trim_err(inst.order(), inst.values()), [4.0, 4.0]);
        let inst = linear(&[1.0, 1.0, 3.0]);
        assert!(trim_err(inst.order(), inst.values())
            .iter()
            .all(|&r| r == 0.0));
    }

    #[test]
    fn l0_regressions() {
        let res = l0_regression(&linear(&[2.0, 2.0, 2.0, 0.0, 0.0, 1.0, 1.0])).unwrap();
        assert_eq!(res.g, [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
        assert_eq!(res.l0_distance, 3);

        let iso = linear(&[1.0, 2.0, 2.0]);
        let res = l0_regression(&iso).unwrap();
        assert_eq!((res.g.as_slice(), res.l0_distance), (iso.values(), 0));

        let res = l0_regression(&linear(&[2.0, 1.0])).unwrap();
        assert_eq!(res.l0_distance, 1);
        assert_eq!(res.g[0], res.g[1]);
    }

    #[test]
    fn l0_regression_on_a_dag_is_isotonic() {
        // u=0 ≺ v=1, u ≺ c=2, c'=3 ≺ v
        let spec = OrderSpec::Dag {
            n: 4,
            edges: vec![(0, 1), (0, 2), (3, 1)],
        };
        let inst = Instance::from_values(&spec, &[3.0, 0.0, 2.0, 1.0]).unwrap();
        let res = l0_regression(&inst).unwrap();
        assert!(is_isotonic(inst.order(), &res.g));
        assert_eq!(res.l0_distance, 2);
    }

    #[test]
    fn weak_l01_beats_optimize_then_trim() {
        let inst = linear(&SHIFTED);
        let res = weak_l01(&inst, &[0, 2, 7]).unwrap();
        assert_eq!(res.g, [0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0]);
        assert_eq!(res.lp_error.unwrap().value, 16.0);
        let base = optimize_then_trim_l1(&inst, &[0, 2, 7]).unwrap();
        assert_eq!(base.g, [0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0]);
        assert_eq!(base.lp_error.unwrap().value, 17.0);

        let iso = linear(&[0.0, 1.0, 1.0]);
        let res = weak_l01(&iso, &[]).unwrap();
        assert_eq!(res.g.as_slice(), iso.values());
    }

    #[test]
    fn l1_regression_of_the_shifted_chain() {
        let inst = linear(&SHIFTED);
        let g = l1_isotonic_dag(inst.order(), inst.values(), &[1.0; 8]);
        assert_eq!(g, [-1.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0, 2.0]);
        let iso = [-1.0, 0.0, 0.0, 4.0];
        assert_eq!(l1_isotonic_dag(&Order::linear(4), &iso, &[1.0; 4]), iso);
    }

    #[test]
    fn weak_l0inf_beats_trim_then_optimize() {
        let inst = linear(&SPIKE);
        let res = weak_l0inf(&inst, &[0, 1, 4, 5]).unwrap();
        assert_eq!(res.g, [0.0, 0.0, 2.0, 2.0, 2.0, 2.0]);
        assert_eq!(res.lp_error.unwrap().value, 6.0);
        let base = trim_then_optimize_linf(&inst, &[0, 1, 4, 5]).unwrap();
        assert_eq!(base.lp_error.unwrap().value, 7.0);
    }

    #[test]
    fn strong_l0inf_examples() {
        let res = strong_l0inf(&linear(&SPIKE)).unwrap();
        assert_eq!(res.threshold, Some(6.0));
        assert_eq!(res.kept, [0, 1, 4, 5]);
        assert_eq!(res.g, [0.0, 0.0, 2.0, 2.0, 2.0, 2.0]);

        let iso = linear(&[0.0, 2.0, 2.0]);
        let res = strong_l0inf(&iso).unwrap();
        assert_eq!(res.threshold, Some(0.0));
        assert_eq!(res.g.as_slice(), iso.values());
    }

    #[test]
    fn staged_regression() {
        let inst = lms();
        let res = weak_l00(&inst, Some(&[1])).unwrap();
        assert_eq!(res.g, [2.0, 2.0, 2.0]);
        assert_eq!(res.stage_counts, Some(vec![1, 2, 0]));

        let res = weak_l00(&linear(&[2.0, 2.0, 2.0, 0.0, 0.0, 1.0, 1.0]), None).unwrap();
        assert_eq!(res.g, [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
        assert_eq!(res.stage_counts, Some(vec![4, 0, 3]));

        let res = weak_l00(&linear(&[0.0, 1.0, 2.0]), None).unwrap();
        assert_eq!(res.stage_counts, Some(vec![3, 0, 0]));
    }

    #[test]
    fn weak_l02_examples() {
        let inst = linear(&[2.0, 0.0]);
        let res = weak_l02_approx(&inst, &[0], 1e-6).unwrap();
        assert!((res.g[0] - 2.0).abs() < 1e-6 && (res.g[1] - 2.0).abs() < 1e-6);
        let iso = linear(&[0.0, 1.0, 3.0]);
        for eps in [1e-3, 1.0, 10.0] {
            assert_eq!(
                weak_l02_approx(&iso, &[], eps).unwrap().g.as_slice(),
                iso.values()
            );
        }
        assert!(matches!(
            weak_l02_approx(&inst, &[0], 0.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    fn chain() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-4i32..5, 1..12).prop_map(|v| v.into_iter().map(f64::from).collect())
    }

    proptest! {
        #[test]
        fn outputs_are_isotonic_and_fix_non_violators(f in chain()) {
            let inst = linear(&f);
            let mask = inst.violator_mask();
            let kept = max_kept_set(&inst);
            for res in [
                l0_regression(&inst).unwrap(),
                weak_l01(&inst, &kept).unwrap(),
                weak_l0inf(&inst, &kept).unwrap(),
                strong_l0inf(&inst).unwrap(),
                weak_l00(&inst, None).unwrap(),
                weak_l02_approx(&inst, &kept, 1e-3).unwrap(),
            ] {
                prop_assert!(is_isotonic(inst.order(), &res.g));
                for v in 0..f.len() {
                    if !mask[v] {
                        prop_assert_eq!(res.g[v], f[v]);
                    }
                }
            }
        }

        #[test]
        fn windows_are_isotonic_and_trim_is_idempotent(f in chain()) {
            let inst = linear(&f);
            let w = windows(&inst, &max_kept_set(&inst)).unwrap();
            prop_assert!(is_isotonic(inst.order(), &w.lo) && is_isotonic(inst.order(), &w.hi));
            prop_assert!((0..f.len()).all(|v| w.lo[v] <= w.hi[v]));
            let t = trim(&f, &w);
            prop_assert_eq!(trim(&t, &w), t);
        }

        #[test]
        fn weak_optima_never_lose_to_the_baselines(f in chain()) {
            let inst = linear(&f);
            let kept = max_kept_set(&inst);
            let e = |r: RegressionResult| r.lp_error.unwrap().value;
            prop_assert!(e(weak_l01(&inst, &kept).unwrap()) <= e(optimize_then_trim_l1(&inst, &kept).unwrap()));
            prop_assert!(e(weak_l0inf(&inst, &kept).unwrap()) <= e(trim_then_optimize_linf(&inst, &kept).unwrap()));
        }

        #[test]
        fn trimming_does_not_raise_linf_error_past_the_trim_error(f in chain(), shift in -3i32..4) {
            let inst = linear(&f);
            let kept = max_kept_set(&inst);
            let w = windows(&inst, &kept).unwrap();
            let r = trim_err(inst.order(), &f);
            let te = kept.iter().map(|&v| r[v]).fold(0.0, f64::max);
            let dev = |g: &[f64]| f.iter().zip(g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let mid = linf_isotonic(inst.order(), &f);
            let g: Vec<f64> = mid.iter().map(|x| x + f64::from(shift)).collect();
            prop_assert!(dev(&trim(&g, &w)) <= dev(&g).max(te) + 1e-9);
            prop_assert!((dev(&trim(&mid, &w)) - dev(&mid).max(te)).abs() < 1e-9);
        }
    }
}
