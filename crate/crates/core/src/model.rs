//! Domain types shared by every routine: label scales, label functions,
//! order relations, validated instances and regression results.
//!
//! Labels are stored as ranks `1..=ℓ`. Numeric label values are only
//! consulted by the `L_p` computations; an ordinal scale reports its ranks
//! as values so that order-only routines can work on `f64` throughout.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Ordered label alphabet `λ(1) < … < λ(ℓ)`, optionally carrying numeric values.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelScale {
    labels: Vec<String>,
    numeric: Option<Vec<f64>>,
}

impl LabelScale {
    /// Ordinal scale; `labels` must already be in increasing order.
    pub fn ordinal<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        check_labels(&labels)?;
        Ok(Self {
            labels,
            numeric: None,
        })
    }

    /// Numeric scale whose tokens are the formatted values.
    pub fn numeric(values: Vec<f64>) -> Result<Self> {
        let labels = values.iter().map(|v| format_value(*v)).collect();
        Self::with_values(labels, values)
    }

    pub fn with_values(labels: Vec<String>, values: Vec<f64>) -> Result<Self> {
        check_labels(&labels)?;
        if values.len() != labels.len() {
            return Err(Error::LengthMismatch {
                expected: labels.len(),
                found: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(*bad));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidScale(
                "numeric values must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            labels,
            numeric: Some(values),
        })
    }

    /// Scale made of the distinct values occurring in `data`, together with
    /// the label function mapping each datum to its rank.
    pub fn from_data(data: &[f64]) -> Result<(Self, LabelFunction)> {
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(*bad));
        }
        let mut distinct = data.to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        let ranks = data
            .iter()
            .map(|x| distinct.partition_point(|y| y < x) + 1)
            .collect();
        Ok((Self::numeric(distinct)?, LabelFunction::new(ranks)))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, rank: usize) -> &str {
        &self.labels[rank - 1]
    }

    pub fn is_numeric(&self) -> bool {
        self.numeric.is_some()
    }

    pub fn numeric_values(&self) -> Option<&[f64]> {
        self.numeric.as_deref()
    }

    /// Value of `rank`: the numeric value when present, the rank otherwise.
    pub fn value(&self, rank: usize) -> f64 {
        match &self.numeric {
            Some(v) => v[rank - 1],
            None => rank as f64,
        }
    }

    /// Rank of a value that lies exactly on the scale.
    pub fn rank_of(&self, value: f64) -> Option<usize> {
        match &self.numeric {
            Some(v) => v
                .binary_search_by(|probe| probe.total_cmp(&value))
                .ok()
                .map(|i| i + 1),
            None => {
                let r = value as usize;
                (value.fract() == 0.0 && r >= 1 && r <= self.len()).then_some(r)
            }
        }
    }

    pub fn bottom(&self) -> f64 {
        self.value(1)
    }

    pub fn top(&self) -> f64 {
        self.value(self.len())
    }

    /// Restrict the scale to the ranks flagged in `used`, returning the new
    /// scale and the old-rank to new-rank map (0 for dropped ranks).
    fn restrict(&self, used: &[bool]) -> (Self, Vec<usize>) {
        let mut map = vec![0; self.len() + 1];
        let mut labels = Vec::new();
        let mut numeric = self.numeric.as_ref().map(|_| Vec::new());
        for (i, keep) in used.iter().enumerate() {
            if *keep {
                labels.push(self.labels[i].clone());
                if let (Some(dst), Some(src)) = (numeric.as_mut(), self.numeric.as_ref()) {
                    dst.push(src[i]);
                }
                map[i + 1] = labels.len();
            }
        }
        (Self { labels, numeric }, map)
    }
}

fn check_labels(labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::InvalidScale("scale needs at least one label".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::InvalidScale(format!("duplicate label {l:?}")));
        }
    }
    Ok(())
}

/// Shortest round-trip formatting, without a trailing `.0` for integers.
pub fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Per-vertex label assignment, as 1-based ranks into a [`LabelScale`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelFunction {
    ranks: Vec<usize>,
}

impl LabelFunction {
    pub fn new(ranks: Vec<usize>) -> Self {
        Self { ranks }
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

/// How the partial order `≺` is given.
#[derive(Debug, Clone, PartialEq)]
pub enum OrderSpec {
    Linear {
        n: usize,
    },
    Dag {
        n: usize,
        edges: Vec<(usize, usize)>,
    },
    /// Dominance order: `x ≺ y` iff `x ≠ y` and `x_i ≤ y_i` for every `i`.
    Points {
        n: usize,
        d: usize,
        coords: Vec<Vec<f64>>,
    },
}

impl OrderSpec {
    pub fn len(&self) -> usize {
        match self {
            OrderSpec::Linear { n } | OrderSpec::Dag { n, .. } | OrderSpec::Points { n, .. } => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderKind {
    Linear,
    Dag,
    Points { d: usize },
}

/// A validated order: adjacency in both directions plus a topological order.
///
/// For point sets the adjacency holds every dominance pair, so sweeps over
/// direct neighbours see all comparable vertices.
#[derive(Debug, Clone)]
pub struct Order {
    kind: OrderKind,
    topo: Vec<usize>,
    position: Vec<usize>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    coords: Option<Vec<Vec<f64>>>,
}

impl Order {
    pub fn new(spec: &OrderSpec) -> Result<Self> {
        match spec {
            OrderSpec::Linear { n } => Ok(Self::linear(*n)),
            OrderSpec::Dag { n, edges } => Self::dag(*n, edges),
            OrderSpec::Points { n, d, coords } => Self::points(*n, *d, coords),
        }
    }

    pub fn linear(n: usize) -> Self {
        let succ = (0..n)
            .map(|i| if i + 1 < n { vec![i + 1] } else { vec![] })
            .collect();
        let pred = (0..n)
            .map(|i| if i > 0 { vec![i - 1] } else { vec![] })
            .collect();
        Self {
            kind: OrderKind::Linear,
            topo: (0..n).collect(),
            position: (0..n).collect(),
            succ,
            pred,
            coords: None,
        }
    }

    fn dag(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::Cycle);
            }
            succ[u].push(v);
            pred[v].push(u);
        }
        for list in succ.iter_mut().chain(pred.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        // Kahn's algorithm; the smallest ready vertex goes first.
        let mut indeg: Vec<usize> = pred.iter().map(Vec::len).collect();
        let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
            .filter(|&v| indeg[v] == 0)
            .map(std::cmp::Reverse)
            .collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(std::cmp::Reverse(u)) = ready.pop() {
            topo.push(u);
            for &v in &succ[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    ready.push(std::cmp::Reverse(v));
                }
            }
        }
        if topo.len() != n {
            return Err(Error::Cycle);
        }
        let position = invert(&topo);
        Ok(Self {
            kind: OrderKind::Dag,
            topo,
            position,
            succ,
            pred,
            coords: None,
        })
    }

    fn points(n: usize, d: usize, coords: &[Vec<f64>]) -> Result<Self> {
        if coords.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "expected {n} points, found {}",
                coords.len()
            )));
        }
        for (i, row) in coords.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch(format!(
                    "point {i} has {} coordinates, expected {d}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|x| !x.is_finite()) {
                return Err(Error::NonFinite(*bad));
            }
        }
        // Lexicographic order extends dominance.
        let mut topo: Vec<usize> = (0..n).collect();
        topo.sort_by(|&a, &b| {
            coords[a]
                .iter()
                .zip(&coords[b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        for u in 0..n {
            for v in 0..n {
                if u != v && dominated_by(&coords[u], &coords[v]) {
                    succ[u].push(v);
                    pred[v].push(u);
                }
            }
        }
        let position = invert(&topo);
        Ok(Self {
            kind: OrderKind::Points { d },
            topo,
            position,
            succ,
            pred,
            coords: Some(coords.to_vec()),
        })
    }

    pub fn kind(&self) -> OrderKind {
        self.kind
    }

    pub fn is_linear(&self) -> bool {
        self.kind == OrderKind::Linear
    }

    pub fn len(&self) -> usize {
        self.topo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topo.is_empty()
    }

    /// Vertices in a topological order of `≺`.
    pub fn topological(&self) -> &[usize] {
        &self.topo
    }

    /// Position of `v` within [`Order::topological`].
    pub fn position(&self, v: usize) -> usize {
        self.position[v]
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.pred[v]
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    /// Every adjacency pair `(u, v)` with `u ≺ v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// Vertices `w` with `v ≺ w` (strict descendants).
    pub fn descendants(&self, v: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut queue: VecDeque<usize> = self.succ[v].iter().copied().collect();
        for &w in &self.succ[v] {
            seen[w] = true;
        }
        while let Some(u) = queue.pop_front() {
            for &w in &self.succ[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// `max{x(u) : u ⪯ v}` for every `v`.
    pub fn prefix_max(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        for &v in &self.topo {
            for &u in &self.pred[v] {
                if out[u] > out[v] {
                    out[v] = out[u];
                }
            }
        }
        out
    }

    /// `min{x(u) : u ⪰ v}` for every `v`.
    pub fn suffix_min(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        for &v in self.topo.iter().rev() {
            for &w in &self.succ[v] {
                if out[w] < out[v] {
                    out[v] = out[w];
                }
            }
        }
        out
    }
}

fn dominated_by(x: &[f64], y: &[f64]) -> bool {
    x != y && x.iter().zip(y).all(|(a, b)| a <= b)
}

fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &v) in perm.iter().enumerate() {
        inv[v] = i;
    }
    inv
}

/// An order together with a label function on it.
#[derive(Debug, Clone)]
pub struct Instance {
    order: Order,
    scale: LabelScale,
    f: LabelFunction,
    values: Vec<f64>,
}

/// Check an order specification and a label function against each other.
///
/// The returned instance keeps only the labels that occur in the data.
pub fn validate(order: &OrderSpec, f: LabelFunction, scale: LabelScale) -> Result<Instance> {
    let order = Order::new(order)?;
    if f.len() != order.len() {
        return Err(Error::LengthMismatch {
            expected: order.len(),
            found: f.len(),
        });
    }
    let mut used = vec![false; scale.len()];
    for (vertex, &rank) in f.ranks().iter().enumerate() {
        if rank == 0 || rank > scale.len() {
            return Err(Error::RankOutOfRange {
                vertex,
                rank,
                labels: scale.len(),
            });
        }
        used[rank - 1] = true;
    }
    let (scale, f) = if used.iter().all(|u| *u) || f.is_empty() {
        (scale, f)
    } else {
        let (scale, map) = scale.restrict(&used);
        let ranks = f.ranks().iter().map(|&r| map[r]).collect();
        (scale, LabelFunction::new(ranks))
    };
    let values = f.ranks().iter().map(|&r| scale.value(r)).collect();
    Ok(Instance {
        order,
        scale,
        f,
        values,
    })
}

impl Instance {
    /// Numeric instance whose labels are the distinct values of `data`.
    pub fn from_values(order: &OrderSpec, data: &[f64]) -> Result<Self> {
        let (scale, f) = LabelScale::from_data(data)?;
        validate(order, f, scale)
    }

    pub fn linear(data: &[f64]) -> Result<Self> {
        Self::from_values(&OrderSpec::Linear { n: data.len() }, data)
    }

    pub fn order(&self) -> &Order {
        &self.order
    }

    pub fn scale(&self) -> &LabelScale {
        &self.scale
    }

    pub fn labels(&self) -> &LabelFunction {
        &self.f
    }

    pub fn ranks(&self) -> &[usize] {
        self.f.ranks()
    }

    /// Label values per vertex (ranks for an ordinal scale).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Label values per vertex; fails on an ordinal scale.
    pub fn numeric_values(&self) -> Result<&[f64]> {
        if self.scale.is_numeric() {
            Ok(&self.values)
        } else {
            Err(Error::NotNumeric)
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Vertices taking part in at least one violating pair.
    pub fn violator_mask(&self) -> Vec<bool> {
        let up = self.order.prefix_max(&self.values);
        let down = self.order.suffix_min(&self.values);
        (0..self.len())
            .map(|v| up[v] > self.values[v] || down[v] < self.values[v])
            .collect()
    }
}

/// True iff no `u ≺ v` has `g(u) > g(v)`.
pub fn is_isotonic(order: &Order, g: &[f64]) -> bool {
    g.len() == order.len() && order.edges().all(|(u, v)| g[u] <= g[v])
}

/// Number of positions where `f` and `g` differ.
pub fn hamming_distance(f: &[f64], g: &[f64]) -> Result<usize> {
    same_len(f, g)?;
    Ok(f.iter().zip(g).filter(|(a, b)| a != b).count())
}

/// `(Σ|f − g|^p)^{1/p}`, or the maximum deviation for `p = ∞`.
pub fn lp_error(f: &[f64], g: &[f64], p: f64) -> Result<f64> {
    same_len(f, g)?;
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    let dev = f.iter().zip(g).map(|(a, b)| (a - b).abs());
    if p.is_infinite() {
        Ok(dev.fold(0.0, f64::max))
    } else if p == 1.0 {
        Ok(dev.sum())
    } else {
        Ok(dev.map(|d| d.powf(p)).sum::<f64>().powf(1.0 / p))
    }
}

fn same_len(f: &[f64], g: &[f64]) -> Result<()> {
    if f.len() != g.len() {
        return Err(Error::LengthMismatch {
            expected: f.len(),
            found: g.len(),
        });
    }
    Ok(())
}

/// The `L_p` norms used as secondary objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    L1,
    L2,
    LInf,
}

impl Norm {
    pub fn exponent(self) -> f64 {
        match self {
            Norm::L1 => 1.0,
            Norm::L2 => 2.0,
            Norm::LInf => f64::INFINITY,
        }
    }

    /// Per-vertex contribution `|d|^p` (`|d|` for `L∞`, combined by max).
    pub(crate) fn cost(self, d: f64) -> f64 {
        match self {
            Norm::L1 | Norm::LInf => d.abs(),
            Norm::L2 => d * d,
        }
    }
}

/// An `L_p` error, reported as the norm and as the raw sum of powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpError {
    pub norm: Norm,
    /// `‖f − g‖_p`.
    pub value: f64,
    /// `Σ|f − g|^p` (the maximum for `L∞`).
    pub sum_pow: f64,
}

impl LpError {
    pub fn between(norm: Norm, f: &[f64], g: &[f64]) -> Self {
        let costs = f.iter().zip(g).map(|(a, b)| norm.cost(a - b));
        let sum_pow = match norm {
            Norm::LInf => costs.fold(0.0, f64::max),
            _ => costs.sum(),
        };
        let value = match norm {
            Norm::L2 => sum_pow.sqrt(),
            _ => sum_pow,
        };
        Self {
            norm,
            value,
            sum_pow,
        }
    }
}

/// Output of every regression routine.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    /// Regression values, one per vertex.
    pub g: Vec<f64>,
    /// Kept violators `C`, sorted; vertices in no violating pair are kept
    /// implicitly and are not listed.
    pub kept: Vec<usize>,
    pub l0_distance: usize,
    /// `(n_0, …, n_{ℓ-1})`; absent when some `g(v)` is not a label value.
    pub stage_counts: Option<Vec<usize>>,
    pub lp_error: Option<LpError>,
    /// Penalized objective, when one was minimized.
    pub objective: Option<f64>,
    /// Trim-error threshold selected by the strong `L∞` routines.
    pub threshold: Option<f64>,
}

impl RegressionResult {
    pub(crate) fn assemble(
        f: &[f64],
        scale: &LabelScale,
        g: Vec<f64>,
        mut kept: Vec<usize>,
        norm: Option<Norm>,
    ) -> Self {
        kept.sort_unstable();
        kept.dedup();
        let l0_distance = f.iter().zip(&g).filter(|(a, b)| a != b).count();
        let stage_counts = stage_counts(f, &g, scale);
        let lp_error = norm.map(|p| LpError::between(p, f, &g));
        Self {
            g,
            kept,
            l0_distance,
            stage_counts,
            lp_error,
            objective: None,
            threshold: None,
        }
    }
}

/// `n_k = |{v : |rank g(v) − rank f(v)| = k}|`, when `g` lies on the scale.
pub fn stage_counts(f: &[f64], g: &[f64], scale: &LabelScale) -> Option<Vec<usize>> {
    let mut counts = vec![0; scale.len()];
    for (a, b) in f.iter().zip(g) {
        let ra = scale.rank_of(*a)?;
        let rb = scale.rank_of(*b)?;
        counts[ra.abs_diff(rb)] += 1;
    }
    Some(counts)
}
