//! Exhaustive reference solvers and seeded instance generators.
//!
//! Nothing here shares code with the fast routines beyond the instance
//! types: order relations come from explicit reachability, isotonic
//! functions are enumerated value by value, and L∞ fills come from the
//! pairwise constraints rather than sweeps.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Instance, Norm, OrderSpec};

/// Hard caps on exhaustive search sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_n: usize,
    pub max_labels: usize,
    pub max_distinct_values: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            max_n: 14,
            max_labels: 6,
            max_distinct_values: 8,
        }
    }
}

impl OracleBudget {
    pub fn check(&self, inst: &Instance) -> Result<()> {
        if inst.len() > self.max_n {
            return Err(Error::OverBudget(format!(
                "{} vertices > {}",
                inst.len(),
                self.max_n
            )));
        }
        let (cap, what) = if inst.scale().is_numeric() {
            (self.max_distinct_values, "distinct values")
        } else {
            (self.max_labels, "labels")
        };
        if inst.scale().len() > cap {
            return Err(Error::OverBudget(format!(
                "{} {what} > {cap}",
                inst.scale().len()
            )));
        }
        Ok(())
    }
}

/// Objectives the oracle can optimize.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// Fewest changed vertices.
    L0,
    /// Smallest `L_p` error among isotonic functions agreeing with `f` on
    /// `kept` and on every vertex in no violating pair.
    WeakL0p { norm: Norm, kept: Vec<usize> },
    /// Smallest `L_p` error among L0-optimal isotonic functions.
    StrongL0p(Norm),
    /// Smallest `err_p + α·changed`, where `err_p` is `Σ|f − g|^p` for
    /// `p ∈ {1, 2}` and the maximum deviation for `L∞`.
    Penalized { norm: Norm, alpha: f64 },
    /// Lexically largest stage vector.
    StrongL0,
}

/// Optimal value of an objective.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleValue {
    Distance(usize),
    /// `Σ|f − g|^p` (`p ∈ {1, 2}`), or the maximum deviation for `L∞`.
    Error(f64),
    Stages(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub value: OracleValue,
    /// One optimizer.
    pub g: Vec<f64>,
}

/// All pairs `u ≺ v`, by explicit reachability.
pub fn closure_pairs(inst: &Instance) -> Vec<(usize, usize)> {
    let order = inst.order();
    (0..inst.len())
        .flat_map(|u| {
            let below = order.descendants(u);
            (0..inst.len())
                .filter(move |&v| below[v])
                .map(move |v| (u, v))
        })
        .collect()
}

fn conflicts(inst: &Instance, pairs: &[(usize, usize)]) -> Vec<u32> {
    let f = inst.values();
    let mut c = vec![0u32; inst.len()];
    for &(u, v) in pairs {
        if f[u] > f[v] {
            c[u] |= 1 << v;
            c[v] |= 1 << u;
        }
    }
    c
}

fn members(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&v| mask & (1 << v) != 0).collect()
}

fn isotonic_subsets(inst: &Instance) -> Vec<u32> {
    let n = inst.len();
    let c = conflicts(inst, &closure_pairs(inst));
    (0u32..1 << n)
        .filter(|&s| (0..n).all(|v| s & (1 << v) == 0 || c[v] & s == 0))
        .collect()
}

/// Size of a maximum f-isotonic set and every set of that size (vertex ids,
/// ascending; sets in ascending order of their bitmask).
pub fn brute_max_isotonic_set(
    inst: &Instance,
    budget: &OracleBudget,
) -> Result<(usize, Vec<Vec<usize>>)> {
    budget.check(inst)?;
    let n = inst.len();
    let sets = isotonic_subsets(inst);
    let best = sets.iter().map(|s| s.count_ones()).max().unwrap_or(0);
    let witnesses = sets
        .into_iter()
        .filter(|s| s.count_ones() == best)
        .map(|s| members(s, n))
        .collect();
    Ok((best as usize, witnesses))
}

/// Trim error of every vertex, from the pairwise definition.
pub fn brute_trim_err(inst: &Instance) -> Vec<f64> {
    let f = inst.values();
    let mut r = vec![0.0f64; inst.len()];
    for (u, v) in closure_pairs(inst) {
        let gap = f[u] - f[v];
        r[u] = r[u].max(gap);
        r[v] = r[v].max(gap);
    }
    r
}

/// Smallest largest trim error over the maximum f-isotonic sets.
pub fn brute_min_trim_err(inst: &Instance, budget: &OracleBudget) -> Result<f64> {
    let (_, sets) = brute_max_isotonic_set(inst, budget)?;
    let r = brute_trim_err(inst);
    Ok(sets
        .iter()
        .map(|s| s.iter().map(|&v| r[v]).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min))
}

/// Visits every isotonic assignment over `candidates` that agrees with `f`
/// on the pinned vertices.
fn for_each_isotonic(
    inst: &Instance,
    candidates: &[f64],
    pinned: &[bool],
    visit: &mut dyn FnMut(&[f64]),
) {
    let order = inst.order();
    let topo = order.topological();
    let f = inst.values();
    let mut g = vec![f64::NAN; inst.len()];
    fn go(
        depth: usize,
        topo: &[usize],
        order: &crate::model::Order,
        f: &[f64],
        pinned: &[bool],
        candidates: &[f64],
        g: &mut Vec<f64>,
        visit: &mut dyn FnMut(&[f64]),
    ) {
        let Some(&v) = topo.get(depth) else {
            visit(g);
            return;
        };
        let floor = order
            .predecessors(v)
            .iter()
            .map(|&u| g[u])
            .fold(f64::NEG_INFINITY, f64::max);
        if pinned[v] {
            if f[v] >= floor {
                g[v] = f[v];
                go(depth + 1, topo, order, f, pinned, candidates, g, visit);
            }
            return;
        }
        for &c in candidates.iter().filter(|&&c| c >= floor) {
            g[v] = c;
            go(depth + 1, topo, order, f, pinned, candidates, g, visit);
        }
    }
    go(0, topo, order, f, pinned, candidates, &mut g, visit);
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    a.iter()
        .zip(b)
        .find(|(x, y)| x != y)
        .is_some_and(|(x, y)| x < y)
}

/// Keeps the smallest cost, then the lexically smallest optimizer.
struct Best {
    cost: f64,
    g: Vec<f64>,
}

impl Best {
    fn new() -> Self {
        Self {
            cost: f64::INFINITY,
            g: Vec::new(),
        }
    }

    fn offer(&mut self, cost: f64, g: &[f64]) {
        if cost < self.cost || (cost == self.cost && lex_less(g, &self.g)) {
            self.cost = cost;
            self.g = g.to_vec();
        }
    }
}

fn grid_fill(inst: &Instance, pinned: &[bool], cost: impl Fn(&[f64]) -> f64) -> Option<Best> {
    let candidates = (1..=inst.scale().len())
        .map(|r| inst.scale().value(r))
        .collect::<Vec<_>>();
    let mut best = Best::new();
    for_each_isotonic(inst, &candidates, pinned, &mut |g| best.offer(cost(g), g));
    best.cost.is_finite().then_some(best)
}

/// Smallest L∞ error with the pinned vertices fixed, from the pairwise
/// constraints `g(u) ≤ g(v)` for `u ≺ v`.
fn linf_fill(inst: &Instance, pinned: &[bool], pairs: &[(usize, usize)]) -> Option<Best> {
    let f = inst.values();
    let mut delta = 0.0f64;
    for &(u, v) in pairs {
        let gap = f[u] - f[v];
        if gap <= 0.0 {
            continue;
        }
        delta = delta.max(match (pinned[u], pinned[v]) {
            (true, true) => return None,
            (false, false) => gap / 2.0,
            _ => gap,
        });
    }
    let low: Vec<f64> = (0..f.len())
        .map(|v| if pinned[v] { f[v] } else { f[v] - delta })
        .collect();
    let mut g = low.clone();
    for &(u, v) in pairs {
        g[v] = g[v].max(low[u]);
    }
    Some(Best { cost: delta, g })
}

/// Smallest squared error on a chain with the pinned vertices fixed: every
/// free run takes contiguous blocks at their clamped means.
fn l2_fill(inst: &Instance, pinned: &[bool]) -> Result<Option<Best>> {
    if !inst.order().is_linear() {
        return Err(Error::RequiresLinear("oracle L2 fill"));
    }
    let f = inst.values();
    let n = f.len();
    let mut g = f.to_vec();
    let mut total = 0.0;
    let mut last = f64::NEG_INFINITY;
    let mut v = 0;
    while v < n {
        if pinned[v] {
            if f[v] < last {
                return Ok(None);
            }
            last = f[v];
            v += 1;
            continue;
        }
        let start = v;
        while v < n && !pinned[v] {
            v += 1;
        }
        let hi = if v < n { f[v] } else { f64::INFINITY };
        let run = &f[start..v];
        let mut best: Option<(f64, Vec<f64>)> = None;
        for cuts in 0u32..1 << (run.len() - 1) {
            let mut fill = Vec::with_capacity(run.len());
            let mut s = 0;
            for e in 1..=run.len() {
                if e == run.len() || cuts & (1 << (e - 1)) != 0 {
                    let mean = run[s..e].iter().sum::<f64>() / (e - s) as f64;
                    fill.extend(std::iter::repeat_n(mean.max(last).min(hi), e - s));
                    s = e;
                }
            }
            if fill.windows(2).any(|w| w[0] > w[1]) {
                continue;
            }
            let cost: f64 = run.iter().zip(&fill).map(|(a, b)| (a - b) * (a - b)).sum();
            if best
                .as_ref()
                .is_none_or(|(c, bf)| cost < *c || (cost == *c && lex_less(&fill, bf)))
            {
                best = Some((cost, fill));
            }
        }
        let (cost, fill) = best.expect("the single block is always monotone");
        total += cost;
        g[start..v].copy_from_slice(&fill);
    }
    Ok(Some(Best { cost: total, g }))
}

fn best_fill(
    inst: &Instance,
    pinned: &[bool],
    norm: Norm,
    pairs: &[(usize, usize)],
) -> Result<Option<Best>> {
    let f = inst.values();
    match norm {
        Norm::L1 => Ok(grid_fill(inst, pinned, |g| {
            f.iter().zip(g).map(|(a, b)| (a - b).abs()).sum()
        })),
        Norm::LInf => Ok(linf_fill(inst, pinned, pairs)),
        Norm::L2 => l2_fill(inst, pinned),
    }
}

fn mask_of(n: usize, set: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in set {
        m[v] = true;
    }
    m
}

/// Exhaustive optimum of an objective, with one optimizer.
pub fn brute_best_regression(
    inst: &Instance,
    objective: &Objective,
    budget: &OracleBudget,
) -> Result<OracleOutcome> {
    budget.check(inst)?;
    let n = inst.len();
    let f = inst.values();
    let pairs = closure_pairs(inst);
    let numeric = || inst.numeric_values().map(|_| ());
    match objective {
        Objective::L0 => {
            let best = grid_fill(inst, &vec![false; n], |g| {
                f.iter().zip(g).filter(|(a, b)| a != b).count() as f64
            })
            .expect("constant functions are isotonic");
            Ok(OracleOutcome {
                value: OracleValue::Distance(best.cost as usize),
                g: best.g,
            })
        }
        Objective::WeakL0p { norm, kept } => {
            numeric()?;
            if let Some(&v) = kept.iter().find(|&&v| v >= n) {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            let mut pinned = mask_of(n, kept);
            let c = conflicts(inst, &pairs);
            for v in 0..n {
                pinned[v] |= c[v] == 0;
            }
            let best = best_fill(inst, &pinned, *norm, &pairs)?.ok_or(Error::NotIsotonicSet)?;
            Ok(OracleOutcome {
                value: OracleValue::Error(best.cost),
                g: best.g,
            })
        }
        Objective::StrongL0p(norm) => {
            numeric()?;
            let (_, sets) = brute_max_isotonic_set(inst, budget)?;
            let mut best = Best::new();
            for s in &sets {
                if let Some(b) = best_fill(inst, &mask_of(n, s), *norm, &pairs)? {
                    best.offer(b.cost, &b.g);
                }
            }
            Ok(OracleOutcome {
                value: OracleValue::Error(best.cost),
                g: best.g,
            })
        }
        Objective::Penalized { norm, alpha } => {
            numeric()?;
            if *norm == Norm::L1 {
                // an optimal L1 fill always lies on data values
                let best = grid_fill(inst, &vec![false; n], |g| {
                    f.iter()
                        .zip(g)
                        .map(|(a, b)| (a - b).abs() + if a == b { 0.0 } else { *alpha })
                        .sum()
                })
                .expect("constant functions are isotonic");
                return Ok(OracleOutcome {
                    value: OracleValue::Error(best.cost),
                    g: best.g,
                });
            }
            let mut best = Best::new();
            for s in isotonic_subsets(inst) {
                let pinned: Vec<bool> = (0..n).map(|v| s & (1 << v) != 0).collect();
                if let Some(b) = best_fill(inst, &pinned, *norm, &pairs)? {
                    let changed = n - s.count_ones() as usize;
                    best.offer(b.cost + alpha * changed as f64, &b.g);
                }
            }
            Ok(OracleOutcome {
                value: OracleValue::Error(best.cost),
                g: best.g,
            })
        }
        Objective::StrongL0 => {
            let scale = inst.scale();
            let candidates: Vec<f64> = (1..=scale.len()).map(|r| scale.value(r)).collect();
            let ranks = inst.ranks();
            let mut best: Option<(Vec<usize>, Vec<f64>)> = None;
            for_each_isotonic(inst, &candidates, &vec![false; n], &mut |g| {
                let mut stages = vec![0; scale.len()];
                for (v, x) in g.iter().enumerate() {
                    let r = scale.rank_of(*x).expect("grid values lie on the scale");
                    stages[r.abs_diff(ranks[v])] += 1;
                }
                let better = best
                    .as_ref()
                    .is_none_or(|(s, bg)| stages > *s || (stages == *s && lex_less(g, bg)));
                if better {
                    best = Some((stages, g.to_vec()));
                }
            });
            let (stages, g) = best.expect("constant functions are isotonic");
            Ok(OracleOutcome {
                value: OracleValue::Stages(stages),
                g,
            })
        }
    }
}

fn values_for(rng: &mut ChaCha8Rng, labels: usize) -> Vec<f64> {
    let mut pool: Vec<i32> = (-9..=9).collect();
    for i in 0..labels {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    let mut vals: Vec<f64> = pool[..labels].iter().map(|&x| f64::from(x)).collect();
    vals.sort_by(f64::total_cmp);
    vals
}

fn random_labels(rng: &mut ChaCha8Rng, n: usize, max_labels: usize) -> Vec<f64> {
    let labels = rng.gen_range(1..=max_labels.max(1));
    let vals = values_for(rng, labels);
    (0..n).map(|_| vals[rng.gen_range(0..labels)]).collect()
}

/// Chain `n/2 + 1, …, n, 1, …, n/2`: every vertex of the first half
/// violates every vertex of the second.
pub fn half_swap(n: usize) -> Instance {
    let h = n / 2;
    let f: Vec<f64> = (h + 1..=n).chain(1..=h).map(|x| x as f64).collect();
    Instance::linear(&f).expect("valid chain")
}

/// Chain of exactly `n` vertices with uniform ranks over `1..=labels`.
pub fn random_ranks(rng: &mut ChaCha8Rng, n: usize, labels: usize) -> Instance {
    let f: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(1..=labels.max(1)) as f64)
        .collect();
    Instance::linear(&f).expect("valid chain")
}

/// Random chain with `1..=max_n` vertices and at most `max_labels` values.
pub fn random_linear(rng: &mut ChaCha8Rng, max_n: usize, max_labels: usize) -> Instance {
    let n = rng.gen_range(1..=max_n.max(1));
    let f = random_labels(rng, n, max_labels);
    Instance::from_values(&OrderSpec::Linear { n }, &f).expect("valid chain")
}

/// Random dag over a hidden topological numbering, each forward pair an
/// edge with probability `edge_prob`; vertex ids are shuffled.
pub fn random_dag(
    rng: &mut ChaCha8Rng,
    max_n: usize,
    max_labels: usize,
    edge_prob: f64,
) -> Instance {
    let n = rng.gen_range(1..=max_n.max(1));
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(edge_prob) {
                edges.push((perm[i], perm[j]));
            }
        }
    }
    let f = random_labels(rng, n, max_labels);
    Instance::from_values(&OrderSpec::Dag { n, edges }, &f).expect("valid dag")
}

/// Random points with small integer coordinates under dominance.
pub fn random_points(rng: &mut ChaCha8Rng, max_n: usize, d: usize, max_labels: usize) -> Instance {
    let n = rng.gen_range(1..=max_n.max(1));
    let coords = (0..n)
        .map(|_| (0..d).map(|_| f64::from(rng.gen_range(0..5))).collect())
        .collect();
    let f = random_labels(rng, n, max_labels);
    Instance::from_values(&OrderSpec::Points { n, d, coords }, &f).expect("valid points")
}
