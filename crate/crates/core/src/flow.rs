//! Lower-bounded flow network of a violator dag, minimum flow, and the
//! maximum f-isotonic set read off the resulting cut.
//!
//! Each violator `u` becomes `u_in → u_out` with lower bound 1 when `u` is
//! required (0 otherwise). Violator edges become `u_out → v_in`; the source
//! feeds every minimal violator and every maximal violator drains into the
//! sink. The minimum flow equals the largest antichain of required
//! violators, and that antichain is the set of required unit arcs crossing
//! the cut left by the flow.

use crate::maxflow::{Capacity, MaxFlow};
use crate::violator::ViolatorDag;

pub const SOURCE: usize = 0;
pub const SINK: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub lower: i64,
    pub capacity: i64,
    pub flow: i64,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    node_count: usize,
    arcs: Vec<Arc>,
    /// Violators in topological order; violator `k` owns nodes `2 + 2k`, `3 + 2k`.
    vertices: Vec<usize>,
    slot: Vec<Option<usize>>,
    required: Vec<bool>,
    unit_count: usize,
}

impl FlowNetwork {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Violators, in the topological order used for node numbering.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn in_node(&self, v: usize) -> Option<usize> {
        self.slot[v].map(|k| 2 + 2 * k)
    }

    pub fn out_node(&self, v: usize) -> Option<usize> {
        self.slot[v].map(|k| 3 + 2 * k)
    }

    /// The `v_in → v_out` arc of violator `v`.
    pub fn unit_arc(&self, v: usize) -> Option<&Arc> {
        self.slot[v].map(|k| &self.arcs[k])
    }

    pub fn unit_arc_count(&self) -> usize {
        self.unit_count
    }

    pub fn is_required(&self, v: usize) -> bool {
        self.required[v]
    }

    /// Net flow leaving the source.
    pub fn value(&self) -> i64 {
        self.arcs
            .iter()
            .map(|a| match (a.from, a.to) {
                (SOURCE, _) => a.flow,
                (_, SOURCE) => -a.flow,
                _ => 0,
            })
            .sum()
    }

    /// Bounds hold on every arc and flow is conserved at every inner node.
    pub fn is_feasible(&self) -> bool {
        let mut balance = vec![0i64; self.node_count];
        for a in &self.arcs {
            if a.flow < a.lower || a.flow > a.capacity {
                return false;
            }
            balance[a.from] -= a.flow;
            balance[a.to] += a.flow;
        }
        balance.iter().skip(2).all(|&b| b == 0)
    }
}

/// Builds the network; `required[v] = false` drops the lower bound of `v`.
pub fn build_flow_graph(vio: &ViolatorDag, required: Option<&[bool]>) -> FlowNetwork {
    let n = vio.order_len();
    let vertices = vio.topological().to_vec();
    let mut slot = vec![None; n];
    for (k, &v) in vertices.iter().enumerate() {
        slot[v] = Some(k);
    }
    let req: Vec<bool> = (0..n)
        .map(|v| slot[v].is_some() && required.is_none_or(|r| r[v]))
        .collect();
    let inf = i64::INFINITY;
    let node = |v: usize, out: bool| 2 + 2 * slot[v].unwrap() + usize::from(out);

    let mut arcs = Vec::with_capacity(3 * vertices.len() + vio.edges().len());
    for &v in &vertices {
        let lower = i64::from(req[v]);
        arcs.push(Arc {
            from: node(v, false),
            to: node(v, true),
            lower,
            capacity: inf,
            flow: 0,
        });
    }
    let mut has_pred = vec![false; n];
    let mut has_succ = vec![false; n];
    for &(u, v) in vio.edges() {
        has_succ[u] = true;
        has_pred[v] = true;
        arcs.push(Arc {
            from: node(u, true),
            to: node(v, false),
            lower: 0,
            capacity: inf,
            flow: 0,
        });
    }
    for &v in vertices.iter().filter(|&&v| !has_pred[v]) {
        arcs.push(Arc {
            from: SOURCE,
            to: node(v, false),
            lower: 0,
            capacity: inf,
            flow: 0,
        });
    }
    for &v in vertices.iter().filter(|&&v| !has_succ[v]) {
        arcs.push(Arc {
            from: node(v, true),
            to: SINK,
            lower: 0,
            capacity: inf,
            flow: 0,
        });
    }
    FlowNetwork {
        node_count: 2 + 2 * vertices.len(),
        unit_count: vertices.len(),
        arcs,
        vertices,
        slot,
        required: req,
    }
}

/// A feasible integral flow: every required violator sends one unit back to
/// the source along designated entering arcs and one unit on to the sink
/// along designated leaving arcs. Computed by one sweep in each direction.
fn feasible_flow(net: &mut FlowNetwork) {
    let n = net.slot.len();
    let mut enter = vec![usize::MAX; n];
    let mut leave = vec![usize::MAX; n];
    let mut vertex_of_in = vec![usize::MAX; net.node_count];
    let mut vertex_of_out = vec![usize::MAX; net.node_count];
    for &v in &net.vertices {
        let k = net.slot[v].unwrap();
        vertex_of_in[2 + 2 * k] = v;
        vertex_of_out[3 + 2 * k] = v;
    }
    for (i, a) in net.arcs.iter().enumerate().skip(net.unit_count) {
        if a.to != SINK {
            let v = vertex_of_in[a.to];
            if enter[v] == usize::MAX {
                enter[v] = i;
            }
        }
        if a.from != SOURCE {
            let u = vertex_of_out[a.from];
            if leave[u] == usize::MAX {
                leave[u] = i;
            }
        }
    }
    for a in &mut net.arcs {
        a.flow = 0;
    }
    let need: Vec<i64> = (0..n).map(|v| i64::from(net.required[v])).collect();
    let mut back = need.clone();
    for &w in net.vertices.iter().rev() {
        let arc = enter[w];
        net.arcs[arc].flow += back[w];
        let from = net.arcs[arc].from;
        if from != SOURCE {
            back[vertex_of_out[from]] += back[w];
        }
    }
    let mut fwd = need.clone();
    for &w in &net.vertices {
        let arc = leave[w];
        net.arcs[arc].flow += fwd[w];
        let to = net.arcs[arc].to;
        if to != SINK {
            fwd[vertex_of_in[to]] += fwd[w];
        }
    }
    for &v in &net.vertices {
        let k = net.slot[v].unwrap();
        net.arcs[k].flow = back[v] + fwd[v] - need[v];
    }
}

/// Replaces the arc flows with a minimum feasible flow and returns its value.
pub fn minimum_flow(net: &mut FlowNetwork) -> i64 {
    let (_, value) = solve(net);
    value
}

fn solve(net: &mut FlowNetwork) -> (MaxFlow<i64>, i64) {
    feasible_flow(net);
    debug_assert!(net.is_feasible());
    let initial = net.value();
    let mut residual = MaxFlow::<i64>::new(net.node_count);
    let ids: Vec<usize> = net
        .arcs
        .iter()
        .map(|a| residual.add_arc(a.from, a.to, a.capacity - a.flow, a.flow - a.lower))
        .collect();
    let cancelled = residual.run(SINK, SOURCE);
    for (a, &e) in net.arcs.iter_mut().zip(&ids) {
        a.flow = a.lower + residual.residual(e ^ 1);
    }
    (residual, initial - cancelled)
}

/// A maximum antichain of the required violators (equivalently, the
/// violators of a maximum f-isotonic set), sorted by vertex id.
pub fn max_isotonic_set(vio: &ViolatorDag, required: Option<&[bool]>) -> Vec<usize> {
    let mut net = build_flow_graph(vio, required);
    let (residual, value) = solve(&mut net);
    // Nodes that can still reach the source form the source side of the cut.
    let side = residual.reaching(SOURCE);
    let mut kept: Vec<usize> = net
        .vertices
        .iter()
        .copied()
        .filter(|&v| {
            let k = net.slot[v].unwrap();
            net.required[v] && side[2 + 2 * k] && !side[3 + 2 * k]
        })
        .collect();
    assert_eq!(
        kept.len() as i64,
        value,
        "cut size disagrees with the minimum flow"
    );
    kept.sort_unstable();
    kept
}
