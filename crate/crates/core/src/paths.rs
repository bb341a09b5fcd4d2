//! Shortest paths with exact perturbed lengths.
//!
//! Negative arcs are handled once per graph: a feasible potential is
//! computed by label correcting from a virtual source, after which every
//! reduced length is nonnegative and all single-source runs use Dijkstra.
//! The queue is a bucket array indexed by reduced integer part with a
//! small heap per bucket ordering the infinitesimal parts, so settled
//! distances come out in exact lexicographic order. Arcs whose reduced
//! part exceeds the bucket window (in practice only the oversized
//! triangulation edges) go to an overflow heap.

use crate::exact::ExactLength;
use crate::graph::{Dart, EmbeddedGraph, Vertex, NONE};
use crate::{Error, Result};
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::collections::VecDeque;

/// A feasible potential: `len(d) + pot[tail] - pot[head] >= 0` for every
/// dart. All zeros when no arc is negative, otherwise distances from a
/// virtual source. Fails with `NegativeCycle` when none exists.
pub fn potential(g: &EmbeddedGraph) -> Result<Vec<ExactLength>> {
    let n = g.num_vertices();
    if (0..g.num_darts()).all(|d| g.len(d) >= ExactLength::ZERO) {
        return Ok(vec![ExactLength::ZERO; n]);
    }
    let mut dist = vec![ExactLength::ZERO; n];
    let mut inq = vec![true; n];
    let mut pushes = vec![0u32; n];
    let mut queue: VecDeque<Vertex> = (0..n).collect();
    while let Some(v) = queue.pop_front() {
        inq[v] = false;
        for d in g.out_darts(v) {
            let w = g.head(d);
            let cand = dist[v] + g.len(d);
            if cand < dist[w] {
                dist[w] = cand;
                if !inq[w] {
                    pushes[w] += 1;
                    if pushes[w] > n as u32 {
                        return Err(Error::NegativeCycle);
                    }
                    inq[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    debug_assert!(check_potential(g, &dist));
    Ok(dist)
}

pub fn check_potential(g: &EmbeddedGraph, pot: &[ExactLength]) -> bool {
    (0..g.num_darts()).all(|d| g.len(d) + pot[g.tail(d)] - pot[g.head(d)] >= ExactLength::ZERO)
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Distances from the source along arc directions.
    FromSource,
    /// Distances of every vertex to the source.
    ToSource,
}

/// Arc-list view of a graph with precomputed reduced lengths, ready for
/// repeated Dijkstra runs in one direction.
pub struct ArcView {
    n: usize,
    dir: Direction,
    offsets: Vec<u32>,
    targets: Vec<u32>,
    red_base: Vec<i64>,
    red_eps: Vec<i64>,
    /// Original dart realizing the arc (`NONE` for synthetic arcs).
    darts: Vec<Dart>,
    structural: Vec<bool>,
    /// Potential per vertex, used to convert reduced distances back.
    pot: Vec<ExactLength>,
    /// Bucket window: 1 + max reduced base over non-structural arcs.
    window: i64,
}

impl ArcView {
    /// View of an embedded graph. `ToSource` flips every arc so that a run
    /// from `t` yields distances to `t` in the original graph.
    pub fn of_graph(g: &EmbeddedGraph, pot: &[ExactLength], dir: Direction) -> ArcView {
        assert_eq!(pot.len(), g.num_vertices());
        debug_assert!(check_potential(g, pot));
        let mut arcs: Vec<(Vertex, Vertex, ExactLength, Dart)> =
            Vec::with_capacity(g.num_darts());
        for d in 0..g.num_darts() {
            let (from, to) = match dir {
                Direction::FromSource => (g.tail(d), g.head(d)),
                Direction::ToSource => (g.head(d), g.tail(d)),
            };
            arcs.push((from, to, g.len(d), d));
        }
        Self::from_arcs(g.num_vertices(), dir, pot, arcs, |d| g.is_structural(d))
    }

    /// View of an arbitrary arc list `(tail, head, length, dart_id)`; used
    /// for pieces augmented with shortcut arcs. The potential must be
    /// feasible for every listed arc.
    pub fn of_arcs(
        n: usize,
        pot: &[ExactLength],
        dir: Direction,
        list: &[(Vertex, Vertex, ExactLength, Dart)],
        structural: impl Fn(Dart) -> bool,
    ) -> ArcView {
        let arcs = list
            .iter()
            .map(|&(u, v, l, d)| match dir {
                Direction::FromSource => (u, v, l, d),
                Direction::ToSource => (v, u, l, d),
            })
            .collect();
        Self::from_arcs(n, dir, pot, arcs, structural)
    }

    fn from_arcs(
        n: usize,
        dir: Direction,
        pot: &[ExactLength],
        arcs: Vec<(Vertex, Vertex, ExactLength, Dart)>,
        structural: impl Fn(Dart) -> bool,
    ) -> ArcView {
        let mut counts = vec![0u32; n + 1];
        for &(from, _, _, _) in &arcs {
            counts[from + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts;
        let mut pos: Vec<u32> = offsets[..n].to_vec();
        let total = arcs.len();
        let mut targets = vec![0u32; total];
        let mut red_base = vec![0i64; total];
        let mut red_eps = vec![0i64; total];
        let mut darts = vec![NONE; total];
        let mut struc = vec![false; total];
        let mut window = 1i64;
        for (from, to, l, d) in arcs {
            // reduced length in original orientation: l + pot[tail] - pot[head]
            let (t0, h0) = match dir {
                Direction::FromSource => (from, to),
                Direction::ToSource => (to, from),
            };
            let red = l + pot[t0] - pot[h0];
            debug_assert!(red >= ExactLength::ZERO, "potential not feasible");
            let i = pos[from] as usize;
            pos[from] += 1;
            targets[i] = to as u32;
            red_base[i] = red.base;
            red_eps[i] = red.eps;
            darts[i] = d;
            let s = d != NONE && structural(d);
            struc[i] = s;
            if !s {
                window = window.max(red.base + 1);
            }
        }
        ArcView {
            n,
            dir,
            offsets,
            targets,
            red_base,
            red_eps,
            darts,
            structural: struc,
            pot: pot.to_vec(),
            window,
        }
    }

    #[inline]
    pub fn num_vertices(&self) -> usize {
        self.n
    }
}

/// Restrictions applied to a single run.
#[derive(Default, Clone, Copy)]
pub struct RunMask<'a> {
    /// Vertices that may not be visited at all.
    pub banned_vertex: Option<&'a [bool]>,
    /// Darts that may not be relaxed (indexed by original dart id).
    pub banned_dart: Option<&'a [bool]>,
    /// Relax structural arcs too. Normally they are skipped: the graph is
    /// connected without them and they are too long to ever be on a real
    /// shortest path, but a heavily masked run may need them to keep the
    /// remainder connected.
    pub use_structural: bool,
}

/// Reusable single-source shortest path state.
pub struct Dijkstra {
    red: Vec<ExactLength>,
    parent: Vec<Dart>,
    epoch: Vec<u32>,
    settled: Vec<bool>,
    cur_epoch: u32,
    order: Vec<u32>,
    buckets: Vec<BinaryHeap<Reverse<(i64, u32)>>>,
    overflow: BinaryHeap<Reverse<(i64, i64, u32)>>,
    source: Vertex,
    source_pot: ExactLength,
    dir: Direction,
}

impl Dijkstra {
    pub fn new(n: usize) -> Dijkstra {
        Dijkstra {
            red: vec![ExactLength::ZERO; n],
            parent: vec![NONE; n],
            epoch: vec![0; n],
            settled: vec![false; n],
            cur_epoch: 0,
            order: Vec::with_capacity(n),
            buckets: Vec::new(),
            overflow: BinaryHeap::new(),
            source: 0,
            source_pot: ExactLength::ZERO,
            dir: Direction::FromSource,
        }
    }

    /// Runs Dijkstra from `source` on the view. Settles every reachable
    /// vertex; unreachable ones report `None` afterwards.
    pub fn run(&mut self, view: &ArcView, source: Vertex, mask: RunMask<'_>) {
        let n = view.n;
        assert!(self.red.len() >= n, "engine sized for a smaller graph");
        self.cur_epoch += 1;
        self.order.clear();
        self.source = source;
        self.source_pot = view.pot[source];
        self.dir = view.dir;
        let window = view.window.max(1) as usize;
        if self.buckets.len() < window {
            self.buckets.resize_with(window, BinaryHeap::new);
        }
        debug_assert!(self.buckets.iter().all(|b| b.is_empty()));
        debug_assert!(self.overflow.is_empty());
        if let Some(b) = mask.banned_vertex {
            if b[source] {
                return;
            }
        }

        let ep = self.cur_epoch;
        let w_i64 = window as i64;
        self.red[source] = ExactLength::ZERO;
        self.parent[source] = NONE;
        self.epoch[source] = ep;
        self.settled[source] = false;
        self.buckets[0].push(Reverse((0, source as u32)));
        // Pushes always satisfy cursor <= base < cursor + window, so every
        // bucket slot holds entries of a single base value at any time and
        // lazy deletion can compare against the current label directly.
        let mut in_buckets = 1usize;
        let mut in_overflow = 0usize;
        let mut cursor = 0i64;

        while in_buckets + in_overflow > 0 {
            if in_buckets == 0 {
                // everything live sits in the overflow heap; jump to it
                let &Reverse((b, _, _)) = self.overflow.peek().unwrap();
                cursor = b;
            } else {
                let slot = (cursor % w_i64) as usize;
                let mut settled_one = false;
                while let Some(&Reverse((eps, v))) = self.buckets[slot].peek() {
                    self.buckets[slot].pop();
                    in_buckets -= 1;
                    let vu = v as usize;
                    // only the entry matching the current label is alive
                    if self.epoch[vu] != ep
                        || self.settled[vu]
                        || self.red[vu] != ExactLength::new(cursor, eps)
                    {
                        continue;
                    }
                    self.settled[vu] = true;
                    self.order.push(v);
                    let dv = self.red[vu];
                    let start = view.offsets[vu] as usize;
                    let end = view.offsets[vu + 1] as usize;
                    for i in start..end {
                        if view.structural[i] && !mask.use_structural {
                            continue;
                        }
                        let w = view.targets[i] as usize;
                        if self.epoch[w] == ep && self.settled[w] {
                            continue;
                        }
                        if let Some(b) = mask.banned_vertex {
                            if b[w] {
                                continue;
                            }
                        }
                        let d = view.darts[i];
                        if let Some(bd) = mask.banned_dart {
                            if d != NONE && bd[d] {
                                continue;
                            }
                        }
                        let cand =
                            ExactLength::new(dv.base + view.red_base[i], dv.eps + view.red_eps[i]);
                        if self.epoch[w] != ep || cand < self.red[w] {
                            self.epoch[w] = ep;
                            self.settled[w] = false;
                            self.red[w] = cand;
                            self.parent[w] = d;
                            if cand.base < cursor + w_i64 {
                                self.buckets[(cand.base % w_i64) as usize]
                                    .push(Reverse((cand.eps, w as u32)));
                                in_buckets += 1;
                            } else {
                                self.overflow.push(Reverse((cand.base, cand.eps, w as u32)));
                                in_overflow += 1;
                            }
                        }
                    }
                    settled_one = true;
                    break;
                }
                if settled_one {
                    continue;
                }
                cursor += 1;
            }
            // pull overflow entries that fell inside the window
            while in_overflow > 0 {
                let &Reverse((b, _, _)) = self.overflow.peek().unwrap();
                if b >= cursor + w_i64 {
                    break;
                }
                let Reverse((b, e, v)) = self.overflow.pop().unwrap();
                in_overflow -= 1;
                self.buckets[(b % w_i64) as usize].push(Reverse((e, v)));
                in_buckets += 1;
            }
        }
    }

    /// Distance of the last run, converted back from reduced form.
    #[inline]
    pub fn dist(&self, view: &ArcView, v: Vertex) -> Option<ExactLength> {
        if self.epoch[v] != self.cur_epoch || !self.settled[v] {
            return None;
        }
        Some(match self.dir {
            Direction::FromSource => self.red[v] - self.source_pot + view.pot[v],
            Direction::ToSource => self.red[v] + self.source_pot - view.pot[v],
        })
    }

    /// For `FromSource`: the dart entering `v` on its shortest path.
    /// For `ToSource`: the dart leaving `v` towards the source.
    #[inline]
    pub fn parent_dart(&self, v: Vertex) -> Dart {
        if self.epoch[v] != self.cur_epoch || !self.settled[v] {
            NONE
        } else {
            self.parent[v]
        }
    }

    /// Vertices in the order they were settled (source first).
    pub fn settle_order(&self) -> &[u32] {
        &self.order
    }
}
