//! Blocking-flow (Dinic) maximum flow over integer or real capacities.

use std::collections::VecDeque;
use std::fmt::Debug;
use std::ops::{Add, Sub};

pub(crate) trait Capacity:
    Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Debug
{
    const ZERO: Self;
    const INFINITY: Self;
    fn is_positive(self) -> bool;
}

impl Capacity for i64 {
    const ZERO: Self = 0;
    const INFINITY: Self = i64::MAX / 4;
    fn is_positive(self) -> bool {
        self > 0
    }
}

impl Capacity for f64 {
    const ZERO: Self = 0.0;
    const INFINITY: Self = f64::INFINITY;
    fn is_positive(self) -> bool {
        self > 1e-12
    }
}

/// Residual graph with paired arcs: arc `e` and its partner `e ^ 1`.
#[derive(Debug, Clone)]
pub(crate) struct MaxFlow<C> {
    adj: Vec<Vec<usize>>,
    head: Vec<usize>,
    residual: Vec<C>,
    level: Vec<usize>,
    cursor: Vec<usize>,
}

const UNSEEN: usize = usize::MAX;

impl<C: Capacity> MaxFlow<C> {
    pub fn new(nodes: usize) -> Self {
        Self {
            adj: vec![Vec::new(); nodes],
            head: Vec::new(),
            residual: Vec::new(),
            level: vec![UNSEEN; nodes],
            cursor: vec![0; nodes],
        }
    }

    /// Adds `u → v` with residual `forward` and its partner `v → u` with
    /// residual `backward`; returns the id of the forward arc.
    pub fn add_arc(&mut self, u: usize, v: usize, forward: C, backward: C) -> usize {
        let e = self.head.len();
        self.head.push(v);
        self.residual.push(forward);
        self.adj[u].push(e);
        self.head.push(u);
        self.residual.push(backward);
        self.adj[v].push(e + 1);
        e
    }

    pub fn residual(&self, e: usize) -> C {
        self.residual[e]
    }

    fn layer(&mut self, s: usize, t: usize) -> bool {
        self.level.fill(UNSEEN);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.head[e];
                if self.level[v] == UNSEEN && self.residual[e].is_positive() {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] != UNSEEN
    }

    /// Pushes a maximum flow from `s` to `t` and returns its value.
    pub fn run(&mut self, s: usize, t: usize) -> C {
        let mut total = C::ZERO;
        if s == t {
            return total;
        }
        let mut path: Vec<usize> = Vec::new();
        while self.layer(s, t) {
            self.cursor.fill(0);
            path.clear();
            loop {
                let u = path.last().map_or(s, |&e| self.head[e]);
                if u == t {
                    let mut push = C::INFINITY;
                    for &e in &path {
                        if self.residual[e] < push {
                            push = self.residual[e];
                        }
                    }
                    for &e in &path {
                        self.residual[e] = self.residual[e] - push;
                        self.residual[e ^ 1] = self.residual[e ^ 1] + push;
                    }
                    total = total + push;
                    let cut = path
                        .iter()
                        .position(|&e| !self.residual[e].is_positive())
                        .unwrap_or(path.len());
                    path.truncate(cut);
                    continue;
                }
                let mut advanced = false;
                while self.cursor[u] < self.adj[u].len() {
                    let e = self.adj[u][self.cursor[u]];
                    let v = self.head[e];
                    if self.residual[e].is_positive()
                        && self.level[v] != UNSEEN
                        && self.level[v] == self.level[u] + 1
                    {
                        path.push(e);
                        advanced = true;
                        break;
                    }
                    self.cursor[u] += 1;
                }
                if !advanced {
                    if u == s {
                        break;
                    }
                    self.level[u] = UNSEEN;
                    let e = path.pop().expect("non-source node has an entering arc");
                    self.cursor[self.head[e ^ 1]] += 1;
                }
            }
        }
        total
    }

    /// Nodes reachable from `s` along arcs with positive residual.
    pub fn reachable_from(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &e in &self.adj[u] {
                let v = self.head[e];
                if !seen[v] && self.residual[e].is_positive() {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Nodes from which `t` is reachable along arcs with positive residual.
    pub fn reaching(&self, t: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[t] = true;
        let mut stack = vec![t];
        while let Some(u) = stack.pop() {
            for &e in &self.adj[u] {
                // `e` leaves `u`; its partner enters `u` from `head[e]`.
                let v = self.head[e];
                if !seen[v] && self.residual[e ^ 1].is_positive() {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}
