//! Brute-force reference implementations used to validate the solver.
//!
//! The all-pairs routine is plain Bellman-Ford per source: slow, simple,
//! and sharing no machinery with the solver pipeline beyond the graph
//! representation itself.

use crate::exact::{ExactLength, WideLength};
use crate::graph::EmbeddedGraph;
use crate::{Error, Result, VertexStats};

/// All-pairs distances by Bellman-Ford from every source. Row `v` holds
/// distances from `v`; unreachable entries are `INF`.
pub fn apsp(g: &EmbeddedGraph) -> Result<Vec<Vec<ExactLength>>> {
    let n = g.num_vertices();
    let mut rows = Vec::with_capacity(n);
    for s in 0..n {
        rows.push(sssp_bellman(g, s)?);
    }
    Ok(rows)
}

fn sssp_bellman(g: &EmbeddedGraph, s: usize) -> Result<Vec<ExactLength>> {
    let n = g.num_vertices();
    let mut dist = vec![ExactLength::INF; n];
    dist[s] = ExactLength::ZERO;
    for round in 0..n {
        let mut changed = false;
        for d in 0..g.num_darts() {
            let u = g.tail(d);
            if dist[u] == ExactLength::INF {
                continue;
            }
            let cand = dist[u] + g.len(d);
            if cand < dist[g.head(d)] {
                dist[g.head(d)] = cand;
                changed = true;
            }
        }
        if !changed {
            return Ok(dist);
        }
        if round == n - 1 {
            return Err(Error::NegativeCycle);
        }
    }
    Ok(dist)
}

/// All-pairs distances via the production shortest-path engine; for
/// medium-sized cross checks where n Bellman-Ford runs get slow.
pub fn apsp_fast(g: &EmbeddedGraph) -> Result<Vec<Vec<ExactLength>>> {
    use crate::paths::{ArcView, Dijkstra, Direction, RunMask};
    let n = g.num_vertices();
    let pot = crate::paths::potential(g)?;
    let view = ArcView::of_graph(g, &pot, Direction::FromSource);
    let mut dj = Dijkstra::new(n);
    let mut rows = Vec::with_capacity(n);
    for s in 0..n {
        dj.run(&view, s, RunMask::default());
        rows.push((0..n).map(|v| dj.dist(&view, v).unwrap_or(ExactLength::INF)).collect());
    }
    Ok(rows)
}

/// Statistics of one distance row: eccentricity, distance sum and the
/// number of entries with integer part at most `delta` (the vertex itself
/// counts; `d(v, v) = 0`).
pub fn row_stats(row: &[ExactLength], delta: i64) -> VertexStats {
    let mut ecc = ExactLength::NEG_INF;
    let mut sum = WideLength::ZERO;
    let mut count = 0u32;
    for &d in row {
        debug_assert!(d != ExactLength::INF, "stats need a strongly reachable row");
        if d > ecc {
            ecc = d;
        }
        sum += WideLength::from(d);
        if d.base <= delta {
            count += 1;
        }
    }
    VertexStats { ecc: ecc.base, sum: sum.base, count }
}

/// Per-vertex statistics in the from-direction.
pub fn stats(g: &EmbeddedGraph, delta: i64) -> Result<Vec<VertexStats>> {
    let rows = apsp(g)?;
    Ok(rows.iter().map(|r| row_stats(r, delta)).collect())
}

/// Per-vertex statistics of distances *to* each vertex.
pub fn stats_to(g: &EmbeddedGraph, delta: i64) -> Result<Vec<VertexStats>> {
    let rows = apsp(g)?;
    let n = g.num_vertices();
    let col: Vec<Vec<ExactLength>> =
        (0..n).map(|v| (0..n).map(|u| rows[u][v]).collect()).collect();
    Ok(col.iter().map(|r| row_stats(r, delta)).collect())
}

/// Largest eccentricity over all vertices.
pub fn diameter(stats: &[VertexStats]) -> i64 {
    stats.iter().map(|s| s.ecc).max().unwrap_or(0)
}

/// Sum of all pairwise distances (ordered pairs).
pub fn wiener(stats: &[VertexStats]) -> i128 {
    stats.iter().map(|s| s.sum).sum()
}
