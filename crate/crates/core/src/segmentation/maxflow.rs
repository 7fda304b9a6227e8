//! Boykov-Kolmogorov max-flow on a graph with terminal capacities.
//!
//! Two search trees grow from the source and sink; augmenting paths are
//! found where they touch, and orphaned subtrees are re-adopted using the
//! timestamp and distance heuristics of the original algorithm.

use std::collections::VecDeque;

const NONE: u32 = u32::MAX;
const TERMINAL: u32 = u32::MAX - 1;
const ORPHAN: u32 = u32::MAX - 2;
const INF_D: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    Source,
    Sink,
}

pub struct Graph {
    first: Vec<u32>,
    tr_cap: Vec<f64>,
    head: Vec<u32>,
    next: Vec<u32>,
    cap: Vec<f64>,
    flow: f64,
    parent: Vec<u32>,
    is_sink: Vec<bool>,
    ts: Vec<u32>,
    dist: Vec<u32>,
}

#[inline]
fn sister(a: u32) -> u32 {
    a ^ 1
}

impl Graph {
    pub fn new(nodes: usize, edge_hint: usize) -> Self {
        Self {
            first: vec![NONE; nodes],
            tr_cap: vec![0.0; nodes],
            head: Vec::with_capacity(2 * edge_hint),
            next: Vec::with_capacity(2 * edge_hint),
            cap: Vec::with_capacity(2 * edge_hint),
            flow: 0.0,
            parent: vec![NONE; nodes],
            is_sink: vec![false; nodes],
            ts: vec![0; nodes],
            dist: vec![0; nodes],
        }
    }

    pub fn node_count(&self) -> usize {
        self.first.len()
    }

    /// Edge `i -> j` with capacity `cap` and reverse capacity `rev_cap`.
    pub fn add_edge(&mut self, i: usize, j: usize, cap: f64, rev_cap: f64) {
        let a = self.head.len() as u32;
        self.head.push(j as u32);
        self.next.push(self.first[i]);
        self.cap.push(cap);
        self.first[i] = a;
        self.head.push(i as u32);
        self.next.push(self.first[j]);
        self.cap.push(rev_cap);
        self.first[j] = a + 1;
    }

    /// Add terminal capacities `source -> i` and `i -> sink`.
    pub fn add_tweights(&mut self, i: usize, source: f64, sink: f64) {
        let (mut s, mut t) = (source, sink);
        let delta = self.tr_cap[i];
        if delta > 0.0 {
            s += delta;
        } else {
            t -= delta;
        }
        self.flow += s.min(t);
        self.tr_cap[i] = s - t;
    }

    fn arcs(&self, i: u32) -> ArcIter<'_> {
        ArcIter { next: &self.next, cur: self.first[i as usize] }
    }

    fn tail(&self, a: u32) -> u32 {
        self.head[sister(a) as usize]
    }

    /// Run to completion and return the max-flow value.
    pub fn maxflow(&mut self) -> f64 {
        let n = self.node_count();
        let mut active: VecDeque<u32> = VecDeque::new();
        let mut queued = vec![false; n];
        let mut orphans: VecDeque<u32> = VecDeque::new();
        for i in 0..n {
            if self.tr_cap[i] != 0.0 {
                self.is_sink[i] = self.tr_cap[i] < 0.0;
                self.parent[i] = TERMINAL;
                self.ts[i] = 0;
                self.dist[i] = 1;
                active.push_back(i as u32);
                queued[i] = true;
            } else {
                self.parent[i] = NONE;
            }
        }
        let mut time: u32 = 0;
        while let Some(&i) = active.front() {
            if self.parent[i as usize] == NONE {
                active.pop_front();
                queued[i as usize] = false;
                continue;
            }
            let found = self.grow_from(i, &mut active, &mut queued);
            time += 1;
            match found {
                Some(a) => {
                    self.augment(a, &mut orphans);
                    while let Some(o) = orphans.pop_front() {
                        if self.is_sink[o as usize] {
                            self.process_sink_orphan(o, time, &mut orphans, &mut active, &mut queued);
                        } else {
                            self.process_source_orphan(o, time, &mut orphans, &mut active, &mut queued);
                        }
                    }
                }
                None => {
                    active.pop_front();
                    queued[i as usize] = false;
                }
            }
        }
        self.flow
    }

    fn activate(j: u32, active: &mut VecDeque<u32>, queued: &mut [bool]) {
        if !queued[j as usize] {
            queued[j as usize] = true;
            active.push_back(j);
        }
    }

    /// Expand node `i`; returns the source-to-sink arc joining the trees.
    fn grow_from(&mut self, i: u32, active: &mut VecDeque<u32>, queued: &mut [bool]) -> Option<u32> {
        let iu = i as usize;
        let sink_side = self.is_sink[iu];
        let mut a = self.first[iu];
        while a != NONE {
            let residual = if sink_side { self.cap[sister(a) as usize] } else { self.cap[a as usize] };
            if residual > 0.0 {
                let j = self.head[a as usize] as usize;
                if self.parent[j] == NONE {
                    self.is_sink[j] = sink_side;
                    self.parent[j] = sister(a);
                    self.ts[j] = self.ts[iu];
                    self.dist[j] = self.dist[iu] + 1;
                    Self::activate(j as u32, active, queued);
                } else if self.is_sink[j] != sink_side {
                    return Some(if sink_side { sister(a) } else { a });
                } else if self.ts[j] <= self.ts[iu] && self.dist[j] > self.dist[iu] {
                    self.parent[j] = sister(a);
                    self.ts[j] = self.ts[iu];
                    self.dist[j] = self.dist[iu] + 1;
                }
            }
            a = self.next[a as usize];
        }
        None
    }

    fn augment(&mut self, middle: u32, orphans: &mut VecDeque<u32>) {
        let mut b = self.cap[middle as usize];
        let mut i = self.tail(middle);
        loop {
            let p = self.parent[i as usize];
            if p == TERMINAL {
                break;
            }
            b = b.min(self.cap[sister(p) as usize]);
            i = self.head[p as usize];
        }
        b = b.min(self.tr_cap[i as usize]);
        let mut i = self.head[middle as usize];
        loop {
            let p = self.parent[i as usize];
            if p == TERMINAL {
                break;
            }
            b = b.min(self.cap[p as usize]);
            i = self.head[p as usize];
        }
        b = b.min(-self.tr_cap[i as usize]);

        self.cap[sister(middle) as usize] += b;
        self.cap[middle as usize] -= b;
        let mut i = self.tail(middle);
        loop {
            let p = self.parent[i as usize];
            if p == TERMINAL {
                break;
            }
            self.cap[p as usize] += b;
            self.cap[sister(p) as usize] -= b;
            if self.cap[sister(p) as usize] == 0.0 {
                self.parent[i as usize] = ORPHAN;
                orphans.push_front(i);
            }
            i = self.head[p as usize];
        }
        self.tr_cap[i as usize] -= b;
        if self.tr_cap[i as usize] == 0.0 {
            self.parent[i as usize] = ORPHAN;
            orphans.push_front(i);
        }
        let mut i = self.head[middle as usize];
        loop {
            let p = self.parent[i as usize];
            if p == TERMINAL {
                break;
            }
            self.cap[sister(p) as usize] += b;
            self.cap[p as usize] -= b;
            if self.cap[p as usize] == 0.0 {
                self.parent[i as usize] = ORPHAN;
                orphans.push_front(i);
            }
            i = self.head[p as usize];
        }
        self.tr_cap[i as usize] += b;
        if self.tr_cap[i as usize] == 0.0 {
            self.parent[i as usize] = ORPHAN;
            orphans.push_front(i);
        }
        self.flow += b;
    }

    /// Distance of `j` to its terminal, or `INF_D` if it hangs off an orphan.
    fn origin_distance(&mut self, j: u32, time: u32) -> u32 {
        let mut d: u32 = 0;
        let mut k = j as usize;
        loop {
            if self.ts[k] == time {
                return d + self.dist[k];
            }
            let a = self.parent[k];
            d += 1;
            if a == TERMINAL {
                self.ts[k] = time;
                self.dist[k] = 1;
                return d;
            }
            if a == ORPHAN {
                return INF_D;
            }
            k = self.head[a as usize] as usize;
        }
    }

    fn mark_path(&mut self, j: u32, mut d: u32, time: u32) {
        let mut k = j as usize;
        while self.ts[k] != time {
            self.ts[k] = time;
            self.dist[k] = d;
            d -= 1;
            k = self.head[self.parent[k] as usize] as usize;
        }
    }

    fn process_orphan(
        &mut self,
        i: u32,
        sink_side: bool,
        time: u32,
        orphans: &mut VecDeque<u32>,
        active: &mut VecDeque<u32>,
        queued: &mut [bool],
    ) {
        let iu = i as usize;
        let mut d_min = INF_D;
        let mut best = NONE;
        let arcs: Vec<u32> = self.arcs(i).collect();
        for &a0 in &arcs {
            let residual = if sink_side { self.cap[a0 as usize] } else { self.cap[sister(a0) as usize] };
            if residual <= 0.0 {
                continue;
            }
            let j = self.head[a0 as usize];
            if self.is_sink[j as usize] != sink_side || self.parent[j as usize] == NONE {
                continue;
            }
            let d = self.origin_distance(j, time);
            if d < INF_D {
                if d < d_min {
                    best = a0;
                    d_min = d;
                }
                self.mark_path(j, d, time);
            }
        }
        self.parent[iu] = best;
        if best != NONE {
            self.ts[iu] = time;
            self.dist[iu] = d_min + 1;
            return;
        }
        self.parent[iu] = NONE;
        for &a0 in &arcs {
            let j = self.head[a0 as usize];
            let ju = j as usize;
            if self.is_sink[ju] != sink_side || self.parent[ju] == NONE {
                continue;
            }
            let residual = if sink_side { self.cap[a0 as usize] } else { self.cap[sister(a0) as usize] };
            if residual > 0.0 {
                Self::activate(j, active, queued);
            }
            let a = self.parent[ju];
            if a != TERMINAL && a != ORPHAN && self.head[a as usize] == i {
                self.parent[ju] = ORPHAN;
                orphans.push_back(j);
            }
        }
    }

    fn process_source_orphan(
        &mut self,
        i: u32,
        time: u32,
        orphans: &mut VecDeque<u32>,
        active: &mut VecDeque<u32>,
        queued: &mut [bool],
    ) {
        self.process_orphan(i, false, time, orphans, active, queued)
    }

    fn process_sink_orphan(
        &mut self,
        i: u32,
        time: u32,
        orphans: &mut VecDeque<u32>,
        active: &mut VecDeque<u32>,
        queued: &mut [bool],
    ) {
        self.process_orphan(i, true, time, orphans, active, queued)
    }

    /// Side of the minimum cut after [`Graph::maxflow`]; nodes reachable
    /// from neither terminal are reported on the sink side.
    pub fn segment(&self, i: usize) -> Segment {
        if self.parent[i] != NONE && !self.is_sink[i] {
            Segment::Source
        } else {
            Segment::Sink
        }
    }
}

struct ArcIter<'a> {
    next: &'a [u32],
    cur: u32,
}

impl Iterator for ArcIter<'_> {
    type Item = u32;
    fn next(&mut self) -> Option<u32> {
        if self.cur == NONE {
            return None;
        }
        let a = self.cur;
        self.cur = self.next[a as usize];
        Some(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Edmonds-Karp on a dense capacity matrix with source `n` and sink `n+1`.
    fn edmonds_karp(cap: &mut [Vec<f64>], s: usize, t: usize) -> f64 {
        let n = cap.len();
        let mut flow = 0.0;
        loop {
            let mut prev = vec![usize::MAX; n];
            prev[s] = s;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for v in 0..n {
                    if prev[v] == usize::MAX && cap[u][v] > 1e-12 {
                        prev[v] = u;
                        q.push_back(v);
                    }
                }
            }
            if prev[t] == usize::MAX {
                return flow;
            }
            let mut b = f64::INFINITY;
            let mut v = t;
            while v != s {
                b = b.min(cap[prev[v]][v]);
                v = prev[v];
            }
            let mut v = t;
            while v != s {
                cap[prev[v]][v] -= b;
                cap[v][prev[v]] += b;
                v = prev[v];
            }
            flow += b;
        }
    }

    #[test]
    fn two_node_chain() {
        let mut g = Graph::new(2, 1);
        g.add_tweights(0, 5.0, 0.0);
        g.add_tweights(1, 0.0, 3.0);
        g.add_edge(0, 1, 4.0, 0.0);
        assert_eq!(g.maxflow(), 3.0);
        assert_eq!(g.segment(0), Segment::Source);
        // residual 0 -> 1 remains, so the cut is the sink link
        assert_eq!(g.segment(1), Segment::Source);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn matches_edmonds_karp(
            n in 2usize..9,
            tw in proptest::collection::vec((0u8..10, 0u8..10), 9),
            edges in proptest::collection::vec((0usize..9, 0usize..9, 0u8..10, 0u8..10), 0..30),
        ) {
            let mut g = Graph::new(n, edges.len());
            let mut dense = vec![vec![0.0; n + 2]; n + 2];
            for i in 0..n {
                let (s, t) = (tw[i].0 as f64, tw[i].1 as f64);
                g.add_tweights(i, s, t);
                dense[n][i] += s;
                dense[i][n + 1] += t;
            }
            let mut arcs = Vec::new();
            for &(i, j, c, r) in &edges {
                let (i, j) = (i % n, j % n);
                if i == j { continue; }
                g.add_edge(i, j, c as f64, r as f64);
                dense[i][j] += c as f64;
                dense[j][i] += r as f64;
                arcs.push((i, j, c as f64, r as f64));
            }
            let mut residual = dense.clone();
            let expected = edmonds_karp(&mut residual, n, n + 1);
            let got = g.maxflow();
            prop_assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
            // the reported partition is a cut of the same value
            let side: Vec<bool> = (0..n).map(|i| g.segment(i) == Segment::Source).collect();
            let mut cut = 0.0;
            for i in 0..n {
                if side[i] { cut += tw[i].1 as f64 } else { cut += tw[i].0 as f64 }
            }
            for &(i, j, c, r) in &arcs {
                if side[i] && !side[j] { cut += c }
                if side[j] && !side[i] { cut += r }
            }
            prop_assert!((cut - expected).abs() < 1e-9);
        }
    }
}
