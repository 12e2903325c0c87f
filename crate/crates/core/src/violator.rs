//! Violator dags: `u → v` paths exist iff `u ≺ v` and `f(u) > f(v)`.

use crate::model::{Instance, Order, OrderKind};

/// Which edge set represents the violating-pair order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeSet {
    /// Every violating pair.
    Closure,
    /// The covering pairs only.
    Reduction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolatorDag {
    n: usize,
    vertices: Vec<usize>,
    /// Violators listed in a topological order of `≺`.
    topo: Vec<usize>,
    edges: Vec<(usize, usize)>,
    edge_set: EdgeSet,
}

impl ViolatorDag {
    fn from_edges(order: &Order, mut edges: Vec<(usize, usize)>, edge_set: EdgeSet) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let n = order.len();
        let mut member = vec![false; n];
        for &(u, v) in &edges {
            member[u] = true;
            member[v] = true;
        }
        let vertices: Vec<usize> = (0..n).filter(|&v| member[v]).collect();
        let topo = order
            .topological()
            .iter()
            .copied()
            .filter(|&v| member[v])
            .collect();
        Self {
            n,
            vertices,
            topo,
            edges,
            edge_set,
        }
    }

    /// Violator dag of an instance, dispatching on the order variant.
    pub fn build(inst: &Instance, edge_set: EdgeSet) -> Self {
        let order = inst.order();
        let f = inst.values();
        match (order.kind(), edge_set) {
            (OrderKind::Linear, EdgeSet::Reduction) => linear_reduction(order, f),
            (OrderKind::Linear, EdgeSet::Closure) => linear_closure(order, f),
            (OrderKind::Points { .. }, _) => {
                let closure = violating_pairs_points(order, f);
                match edge_set {
                    EdgeSet::Closure => closure,
                    EdgeSet::Reduction => closure.transitive_reduction(),
                }
            }
            (OrderKind::Dag, _) => {
                let closure = violating_pairs_dag(order, f);
                match edge_set {
                    EdgeSet::Closure => closure,
                    EdgeSet::Reduction => closure.transitive_reduction(),
                }
            }
        }
    }

    /// Number of vertices of the underlying order.
    pub fn order_len(&self) -> usize {
        self.n
    }

    /// `V̂`, sorted.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn topological(&self) -> &[usize] {
        &self.topo
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_set(&self) -> EdgeSet {
        self.edge_set
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn membership(&self) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &v in &self.vertices {
            m[v] = true;
        }
        m
    }

    /// Minimal edge set with the same reachability.
    pub fn transitive_reduction(&self) -> Self {
        let mut pos = vec![usize::MAX; self.n];
        for (i, &v) in self.topo.iter().enumerate() {
            pos[v] = i;
        }
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
        }
        for list in &mut adj {
            list.sort_unstable_by_key(|&v| pos[v]);
        }
        let mut mark = vec![usize::MAX; self.n];
        let mut stack = Vec::new();
        let mut kept = Vec::new();
        for &u in &self.topo {
            for &w in &adj[u] {
                if mark[w] == u {
                    continue;
                }
                kept.push((u, w));
                stack.push(w);
                while let Some(x) = stack.pop() {
                    for &y in &adj[x] {
                        if mark[y] != u {
                            mark[y] = u;
                            stack.push(y);
                        }
                    }
                }
            }
        }
        kept.sort_unstable();
        Self {
            n: self.n,
            vertices: self.vertices.clone(),
            topo: self.topo.clone(),
            edges: kept,
            edge_set: EdgeSet::Reduction,
        }
    }
}

/// Transitive closure of `≺_v` by a breadth-first search from every vertex.
pub fn violating_pairs_dag(order: &Order, f: &[f64]) -> ViolatorDag {
    let mut edges = Vec::new();
    for u in 0..order.len() {
        let below = order.descendants(u);
        edges.extend(
            below
                .iter()
                .enumerate()
                .filter(|&(v, &reach)| reach && f[u] > f[v])
                .map(|(v, _)| (u, v)),
        );
    }
    ViolatorDag::from_edges(order, edges, EdgeSet::Closure)
}

/// Transitive closure of `≺_v` on a point set by comparing every pair.
///
/// # Panics
/// If `order` is not a point-set order.
pub fn violating_pairs_points(order: &Order, f: &[f64]) -> ViolatorDag {
    let coords = order.coords().expect("point-set order");
    let n = coords.len();
    let mut edges = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if f[x] > f[y]
                && coords[x] != coords[y]
                && coords[x].iter().zip(&coords[y]).all(|(a, b)| a <= b)
            {
                edges.push((x, y));
            }
        }
    }
    ViolatorDag::from_edges(order, edges, EdgeSet::Closure)
}

fn linear_closure(order: &Order, f: &[f64]) -> ViolatorDag {
    let n = f.len();
    let mut edges = Vec::new();
    for i in 0..n {
        edges.extend((i + 1..n).filter(|&j| f[i] > f[j]).map(|j| (i, j)));
    }
    ViolatorDag::from_edges(order, edges, EdgeSet::Closure)
}

/// Covering pairs of `≺_v` on a chain, without materializing the closure:
/// `(i, j)` covers iff `f(j) < f(i)` and no `k` in between has
/// `f(j) < f(k) < f(i)`.
fn linear_reduction(order: &Order, f: &[f64]) -> ViolatorDag {
    let n = f.len();
    let mut edges = Vec::new();
    for i in 0..n {
        let top = f[i];
        let mut best = f64::NEG_INFINITY;
        for (j, &x) in f.iter().enumerate().skip(i + 1) {
            if x < top && x >= best {
                edges.push((i, j));
                best = x;
            }
        }
    }
    ViolatorDag::from_edges(order, edges, EdgeSet::Reduction)
}
