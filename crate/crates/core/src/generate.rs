//! Graph generators: small named fixtures and scalable families used by
//! tests, benchmarks and the CLI.

use crate::exact::ExactLength;
use crate::graph::{Dart, EdgeSpec, EmbeddedGraph};
use crate::{paths, Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Everything needed to build a graph, still editable (e.g. lengths).
#[derive(Clone)]
pub struct GraphParts {
    pub n: usize,
    pub edges: Vec<EdgeSpec>,
    pub rotations: Vec<Vec<Dart>>,
    pub outer: Option<Dart>,
}

impl GraphParts {
    pub fn build(&self) -> Result<EmbeddedGraph> {
        EmbeddedGraph::build(self.n, &self.edges, &self.rotations, self.outer)
    }
}

fn unit(u: usize, v: usize) -> EdgeSpec {
    EdgeSpec { u, v, len_uv: 1, len_vu: 1 }
}

/// Four-cycle 0-1-2-3 embedded as a square, unit lengths.
pub fn c4_parts() -> GraphParts {
    GraphParts {
        n: 4,
        edges: vec![unit(0, 1), unit(1, 2), unit(2, 3), unit(3, 0)],
        rotations: vec![vec![0, 7], vec![2, 1], vec![4, 3], vec![6, 5]],
        outer: Some(1),
    }
}

pub fn c4() -> EmbeddedGraph {
    c4_parts().build().unwrap()
}

/// Path 0-1-2 with unit lengths.
pub fn p3_parts() -> GraphParts {
    GraphParts {
        n: 3,
        edges: vec![unit(0, 1), unit(1, 2)],
        rotations: vec![vec![0], vec![1, 2], vec![3]],
        outer: Some(0),
    }
}

pub fn p3() -> EmbeddedGraph {
    p3_parts().build().unwrap()
}

/// Complete graph on 4 vertices: triangle 0-1-2 with 3 in the middle.
pub fn k4_parts() -> (Vec<EdgeSpec>, Vec<Vec<Dart>>) {
    let edges = vec![unit(0, 1), unit(1, 2), unit(2, 0), unit(0, 3), unit(1, 3), unit(2, 3)];
    let rotations = vec![vec![0, 6, 5], vec![2, 8, 1], vec![4, 10, 3], vec![11, 7, 9]];
    (edges, rotations)
}

pub fn k4() -> EmbeddedGraph {
    let (edges, rotations) = k4_parts();
    EmbeddedGraph::build(4, &edges, &rotations, Some(1)).unwrap()
}

/// w x h grid with unit lengths; vertex (x, y) has index y*w + x.
pub fn grid_parts(w: usize, h: usize) -> GraphParts {
    assert!(w >= 1 && h >= 1 && w * h >= 1);
    let horiz = |x: usize, y: usize| y * (w - 1) + x;
    let hcount = if w > 1 { h * (w - 1) } else { 0 };
    let vert = |x: usize, y: usize| hcount + y * w + x;
    let mut edges = Vec::new();
    if w > 1 {
        for y in 0..h {
            for x in 0..w - 1 {
                debug_assert_eq!(horiz(x, y), edges.len());
                edges.push(unit(y * w + x, y * w + x + 1));
            }
        }
    }
    for y in 0..h.saturating_sub(1) {
        for x in 0..w {
            debug_assert_eq!(vert(x, y), edges.len());
            edges.push(unit(y * w + x, (y + 1) * w + x));
        }
    }
    let mut rotations = vec![Vec::new(); w * h];
    for y in 0..h {
        for x in 0..w {
            let rot = &mut rotations[y * w + x];
            // counterclockwise: east, north, west, south
            if x + 1 < w {
                rot.push(2 * horiz(x, y));
            }
            if y + 1 < h {
                rot.push(2 * vert(x, y));
            }
            if x > 0 {
                rot.push(2 * horiz(x - 1, y) + 1);
            }
            if y > 0 {
                rot.push(2 * vert(x, y - 1) + 1);
            }
        }
    }
    let outer = if w > 1 { Some(1) } else { Some(0) };
    GraphParts { n: w * h, edges, rotations, outer }
}

pub fn grid(w: usize, h: usize) -> EmbeddedGraph {
    grid_parts(w, h).build().unwrap()
}

/// Random planar triangulation grown from a triangle by repeatedly
/// inserting a vertex into a bounded face; `extra` insertions, so
/// n = 3 + extra. All faces except the outer one are triangles.
pub fn triangulation_parts(extra: usize, seed: u64) -> GraphParts {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut edges = vec![unit(0, 1), unit(1, 2), unit(2, 0)];
    let mut rotations: Vec<Vec<Dart>> = vec![vec![0, 5], vec![2, 1], vec![4, 3]];
    // bounded faces as dart triples [a->b, b->c, c->a]
    let mut faces: Vec<[Dart; 3]> = vec![[0, 2, 4]];
    let tail = |edges: &[EdgeSpec], d: Dart| {
        if d % 2 == 0 {
            edges[d / 2].u
        } else {
            edges[d / 2].v
        }
    };
    for _ in 0..extra {
        let fi = rng.gen_range(0..faces.len());
        let [dab, dbc, dca] = faces[fi];
        let (a, b, c) = (tail(&edges, dab), tail(&edges, dbc), tail(&edges, dca));
        let v = rotations.len();
        let new_dart = |edges: &mut Vec<EdgeSpec>, from: usize, to: usize| {
            let d = 2 * edges.len();
            edges.push(unit(from, to));
            d
        };
        let d_av = new_dart(&mut edges, a, v);
        let d_bv = new_dart(&mut edges, b, v);
        let d_cv = new_dart(&mut edges, c, v);
        // seen from v the three corners appear in counterclockwise order
        rotations.push(vec![d_av ^ 1, d_bv ^ 1, d_cv ^ 1]);
        // each new dart sits in the corner of the split face, i.e. right
        // after the face dart leaving that corner
        for (corner, face_dart, nd) in [(a, dab, d_av), (b, dbc, d_bv), (c, dca, d_cv)] {
            let rot = &mut rotations[corner];
            let pos = rot.iter().position(|&d| d == face_dart).unwrap();
            rot.insert(pos + 1, nd);
        }
        faces[fi] = [dab, d_bv, d_av ^ 1];
        faces.push([dbc, d_cv, d_bv ^ 1]);
        faces.push([dca, d_av, d_cv ^ 1]);
    }
    GraphParts { n: rotations.len(), edges, rotations, outer: Some(1) }
}

pub fn triangulation(extra: usize, seed: u64) -> EmbeddedGraph {
    triangulation_parts(extra, seed).build().unwrap()
}

/// Wheel: hub 0 joined to a k-cycle 1..=k. Diameter 2, unit lengths.
pub fn wheel_parts(k: usize) -> GraphParts {
    assert!(k >= 3);
    let mut edges = Vec::with_capacity(2 * k);
    for i in 1..=k {
        edges.push(unit(0, i));
    }
    for i in 1..=k {
        edges.push(unit(i, i % k + 1));
    }
    let rim_out = |i: usize| 2 * (k + i - 1); // dart i -> next
    let mut rotations = vec![(0..k).map(|i| 2 * i).collect::<Vec<_>>()];
    for i in 1..=k {
        let prev = if i == 1 { k } else { i - 1 };
        rotations.push(vec![rim_out(i), 2 * (i - 1) + 1, rim_out(prev) ^ 1]);
    }
    GraphParts { n: k + 1, edges, rotations, outer: Some(rim_out(1) ^ 1) }
}

/// Double wheel: a wheel plus a second hub adjacent to the whole rim from
/// outside. Every face is a triangle; diameter 2 for k >= 3.
pub fn double_wheel_parts(k: usize) -> GraphParts {
    let mut parts = wheel_parts(k);
    let hub2 = k + 1;
    parts.n += 1;
    let spoke2 = |i: usize| 2 * (2 * k + i - 1); // dart hub2 -> i
    for i in 1..=k {
        parts.edges.push(unit(hub2, i));
        // outward dart goes last in the rim rotation [next, hub, prev]
        parts.rotations[i].push(spoke2(i) ^ 1);
    }
    // a vertex drawn in the outer face sees the rim in clockwise order
    parts.rotations.push((1..=k).rev().map(spoke2).collect());
    parts.outer = Some(spoke2(1) ^ 1);
    parts
}

/// Random unweighted diameter-2 fixture: a wheel or double wheel of
/// seeded random size.
pub fn diameter_two(seed: u64) -> EmbeddedGraph {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let k = rng.gen_range(4..=12);
    let parts = if rng.gen_bool(0.5) { wheel_parts(k) } else { double_wheel_parts(k) };
    parts.build().unwrap()
}

/// Overwrites all lengths with independent draws from `lo..=hi`, negating
/// each with probability `neg_fraction`.
pub fn randomize_lengths(parts: &mut GraphParts, seed: u64, lo: i64, hi: i64, neg_fraction: f64) {
    assert!(0 < lo && lo <= hi);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha12Rng| {
        let v = rng.gen_range(lo..=hi);
        if neg_fraction > 0.0 && rng.gen_bool(neg_fraction) {
            -v
        } else {
            v
        }
    };
    for e in &mut parts.edges {
        e.len_uv = draw(&mut rng);
        e.len_vu = draw(&mut rng);
    }
}

/// Random lengths that admit no negative cycle, retrying the draw with
/// fresh randomness until the check passes.
pub fn with_random_lengths(
    template: &GraphParts,
    seed: u64,
    lo: i64,
    hi: i64,
    neg_fraction: f64,
) -> Result<EmbeddedGraph> {
    for attempt in 0u64..64 {
        let mut parts = template.clone();
        randomize_lengths(&mut parts, seed.wrapping_add(attempt.wrapping_mul(0x9e3779b9)), lo, hi, neg_fraction);
        let g = parts.build()?;
        if neg_fraction == 0.0 || paths::potential(&g).is_ok() {
            return Ok(g);
        }
    }
    Err(Error::BadParams("no negative-cycle-free draw found; lower the negative fraction".into()))
}

/// The arc lengths of `g` as edge specs (for re-export and round trips).
pub fn edge_specs(g: &EmbeddedGraph) -> Vec<EdgeSpec> {
    (0..g.num_edges())
        .map(|e| EdgeSpec {
            u: g.tail(2 * e),
            v: g.head(2 * e),
            len_uv: g.len(2 * e).base,
            len_vu: g.len(2 * e + 1).base,
        })
        .collect()
}

pub fn exact_len(base: i64) -> ExactLength {
    ExactLength::new(base, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DualGraph;

    #[test]
    fn fixture_face_counts() {
        let g = c4();
        assert_eq!(DualGraph::new(&g).num_faces(), 2);
        let g = p3();
        assert_eq!(DualGraph::new(&g).num_faces(), 1);
        let g = k4();
        assert_eq!(DualGraph::new(&g).num_faces(), 4);
    }

    #[test]
    fn grid_shapes() {
        for (w, h) in [(3, 3), (1, 5), (5, 1), (2, 2), (7, 4)] {
            let g = grid(w, h);
            assert_eq!(g.num_vertices(), w * h);
            let faces = DualGraph::new(&g).num_faces();
            assert_eq!(faces, (w - 1).max(0) * (h - 1).max(0) + 1, "{}x{}", w, h);
        }
    }

    #[test]
    fn triangulation_all_triangles_but_outer() {
        let g = triangulation(20, 9);
        assert_eq!(g.num_vertices(), 23);
        let dual = DualGraph::new(&g);
        assert_eq!(dual.num_faces(), 2 + 2 * 20);
        for f in 0..dual.num_faces() {
            if f != dual.outer {
                assert_eq!(dual.face_degree(f), 3);
            }
        }
        assert_eq!(dual.face_degree(dual.outer), 3);
    }

    #[test]
    fn wheel_shapes() {
        for k in 3..=8 {
            let g = wheel_parts(k).build().unwrap();
            assert_eq!(DualGraph::new(&g).num_faces(), k + 1);
            let g = double_wheel_parts(k).build().unwrap();
            assert_eq!(DualGraph::new(&g).num_faces(), 2 * k);
        }
    }

    #[test]
    fn negative_draws_have_no_negative_cycle() {
        let parts = grid_parts(5, 5);
        let g = with_random_lengths(&parts, 13, 1, 9, 0.1).unwrap();
        assert!(paths::potential(&g).is_ok());
        assert!((0..g.num_darts()).any(|d| g.len(d).base < 0));
    }
}
