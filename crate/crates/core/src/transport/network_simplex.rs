//! Primal network simplex for the uncapacitated transportation problem.
//!
//! Supply nodes are `0..m`, demand nodes `m..m+n`, and an artificial root
//! sits at `m+n`. The initial basis routes every supply to the root and every
//! demand from it through big-M arcs, which is a strongly feasible tree.
//! Leaving arcs are chosen by the strongly-feasible rule, so degenerate
//! pivots cannot cycle.

use crate::error::{Error, Result};

pub(super) struct Solved {
    /// Row-major `m × n` plan.
    pub flow: Vec<f64>,
    pub iterations: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Dir {
    /// Tree arc points from the node to its parent.
    Up,
    /// Tree arc points from the parent to the node.
    Down,
}

struct Network<'a> {
    m: usize,
    n: usize,
    costs: &'a [f64],
    big_m: f64,
    flow: Vec<f64>,
    in_tree: Vec<bool>,
    tree_arcs: Vec<usize>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    dir: Vec<Dir>,
    depth: Vec<usize>,
    pi: Vec<f64>,
}

const NONE: usize = usize::MAX;

impl<'a> Network<'a> {
    fn root(&self) -> usize {
        self.m + self.n
    }

    fn node_count(&self) -> usize {
        self.m + self.n + 1
    }

    fn real_arcs(&self) -> usize {
        self.m * self.n
    }

    fn ends(&self, arc: usize) -> (usize, usize) {
        let real = self.real_arcs();
        if arc < real {
            (arc / self.n, self.m + arc % self.n)
        } else {
            let node = arc - real;
            if node < self.m {
                (node, self.root())
            } else {
                (self.root(), node)
            }
        }
    }

    fn cost(&self, arc: usize) -> f64 {
        if arc < self.real_arcs() {
            self.costs[arc]
        } else {
            self.big_m
        }
    }

    fn reduced(&self, arc: usize) -> f64 {
        let (s, t) = self.ends(arc);
        self.cost(arc) + self.pi[s] - self.pi[t]
    }

    /// Recompute parent pointers, depths and potentials from the tree arc set.
    fn rebuild(&mut self) {
        let nodes = self.node_count();
        let mut start = vec![0usize; nodes + 1];
        for &a in &self.tree_arcs {
            let (s, t) = self.ends(a);
            start[s + 1] += 1;
            start[t + 1] += 1;
        }
        for k in 0..nodes {
            start[k + 1] += start[k];
        }
        let mut fill = start.clone();
        let mut adj = vec![0usize; start[nodes]];
        for &a in &self.tree_arcs {
            let (s, t) = self.ends(a);
            adj[fill[s]] = a;
            fill[s] += 1;
            adj[fill[t]] = a;
            fill[t] += 1;
        }
        let root = self.root();
        self.parent.iter_mut().for_each(|p| *p = NONE);
        self.parent[root] = root;
        self.pred[root] = NONE;
        self.depth[root] = 0;
        self.pi[root] = 0.0;
        let mut queue = Vec::with_capacity(nodes);
        queue.push(root);
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            for &a in &adj[start[u]..start[u + 1]] {
                let (s, t) = self.ends(a);
                let (v, dir) = if s == u { (t, Dir::Down) } else { (s, Dir::Up) };
                if self.parent[v] != NONE {
                    continue;
                }
                self.parent[v] = u;
                self.pred[v] = a;
                self.dir[v] = dir;
                self.depth[v] = self.depth[u] + 1;
                let c = self.cost(a);
                self.pi[v] = match dir {
                    Dir::Down => self.pi[u] + c,
                    Dir::Up => self.pi[u] - c,
                };
                queue.push(v);
            }
        }
    }

    fn join(&self, mut a: usize, mut b: usize) -> usize {
        while a != b {
            if self.depth[a] >= self.depth[b] {
                a = self.parent[a];
            } else {
                b = self.parent[b];
            }
        }
        a
    }

    /// Push flow around the cycle closed by `entering`; returns the leaving arc.
    fn pivot(&mut self, entering: usize) -> usize {
        let (first, second) = self.ends(entering);
        let join = self.join(first, second);
        let mut delta = f64::INFINITY;
        let mut leaving_node = NONE;
        let mut u = first;
        while u != join {
            if self.dir[u] == Dir::Up {
                let d = self.flow[self.pred[u]];
                if d < delta {
                    delta = d;
                    leaving_node = u;
                }
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != join {
            if self.dir[u] == Dir::Down {
                let d = self.flow[self.pred[u]];
                if d <= delta {
                    delta = d;
                    leaving_node = u;
                }
            }
            u = self.parent[u];
        }
        debug_assert!(leaving_node != NONE, "uncapacitated cycle is bounded by balance");
        if delta > 0.0 {
            self.flow[entering] += delta;
            let mut u = first;
            while u != join {
                let a = self.pred[u];
                match self.dir[u] {
                    Dir::Up => self.flow[a] = (self.flow[a] - delta).max(0.0),
                    Dir::Down => self.flow[a] += delta,
                }
                u = self.parent[u];
            }
            let mut u = second;
            while u != join {
                let a = self.pred[u];
                match self.dir[u] {
                    Dir::Up => self.flow[a] += delta,
                    Dir::Down => self.flow[a] = (self.flow[a] - delta).max(0.0),
                }
                u = self.parent[u];
            }
        }
        self.pred[leaving_node]
    }
}

pub(super) fn solve(supply: &[f64], demand: &[f64], costs: &[f64]) -> Result<Solved> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 || costs.len() != m * n {
        return Err(Error::Solver(format!(
            "malformed transportation problem: {m} x {n} with {} costs",
            costs.len()
        )));
    }
    let max_cost = costs.iter().cloned().fold(0.0f64, f64::max);
    let nodes = m + n + 1;
    let real = m * n;
    let mut net = Network {
        m,
        n,
        costs,
        big_m: (max_cost + 1.0) * nodes as f64,
        flow: vec![0.0; real + m + n],
        in_tree: vec![false; real + m + n],
        tree_arcs: (real..real + m + n).collect(),
        parent: vec![NONE; nodes],
        pred: vec![NONE; nodes],
        dir: vec![Dir::Up; nodes],
        depth: vec![0; nodes],
        pi: vec![0.0; nodes],
    };
    for (i, &s) in supply.iter().enumerate() {
        net.flow[real + i] = s;
    }
    for (j, &d) in demand.iter().enumerate() {
        net.flow[real + m + j] = d;
    }
    for &a in &net.tree_arcs {
        net.in_tree[a] = true;
    }
    net.rebuild();

    let tolerance = 1e-12 * max_cost.max(1.0);
    let block = ((real as f64).sqrt().ceil() as usize).max(10).min(real);
    let max_iterations = 50 * (real + nodes) + 1000;
    let mut cursor = 0usize;
    let mut iterations = 0usize;
    loop {
        // Block search pricing over the real arcs.
        let mut best = NONE;
        let mut best_rc = -tolerance;
        let mut scanned = 0usize;
        let mut in_block = 0usize;
        while scanned < real {
            let a = cursor;
            cursor = if cursor + 1 == real { 0 } else { cursor + 1 };
            scanned += 1;
            in_block += 1;
            if !net.in_tree[a] {
                let rc = net.reduced(a);
                if rc < best_rc {
                    best_rc = rc;
                    best = a;
                }
            }
            if in_block == block {
                if best != NONE {
                    break;
                }
                in_block = 0;
            }
        }
        if best == NONE {
            break;
        }
        iterations += 1;
        if iterations > max_iterations {
            return Err(Error::Solver(format!(
                "network simplex exceeded {max_iterations} pivots on a {m} x {n} problem"
            )));
        }
        let leaving = net.pivot(best);
        net.in_tree[leaving] = false;
        net.in_tree[best] = true;
        let slot = net
            .tree_arcs
            .iter()
            .position(|&a| a == leaving)
            .expect("leaving arc is a tree arc");
        net.tree_arcs[slot] = best;
        net.rebuild();
    }

    let stranded: f64 = net.flow[real..].iter().sum();
    if stranded > 1e-9 {
        return Err(Error::Solver(format!(
            "{stranded:e} mass left on artificial arcs; marginals do not balance"
        )));
    }
    net.flow.truncate(real);
    Ok(Solved {
        flow: net.flow,
        iterations,
    })
}
