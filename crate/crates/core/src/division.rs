//! r-divisions of triangulated planar graphs.
//!
//! A division partitions the faces of the graph into connected pieces; a
//! piece's edge set is everything incident to its faces, so neighboring
//! pieces share their rim edges. Splitting uses fundamental-cycle
//! separators: a BFS tree of the piece interdigitates with a spanning tree
//! of its dual, and removing one non-tree edge's dual subtree gives the two
//! sides. Pieces are split while they have too many vertices, then too many
//! boundary vertices, then too many holes.

use std::collections::VecDeque;

use crate::graph::{DualGraph, EdgeId, EmbeddedGraph, Face, SubMap, Vertex, NONE};
use crate::{Error, Result};

/// Slack constants of the division contract. A division has at most
/// `c1 * n / r` pieces, each with at most `c2 * r` vertices, `c3 * sqrt(r)`
/// boundary vertices, and `c4` holes.
#[derive(Clone, Copy, Debug)]
pub struct DivisionParams {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: usize,
}

impl Default for DivisionParams {
    fn default() -> Self {
        DivisionParams { c1: 8.0, c2: 1.0, c3: 8.0, c4: 12 }
    }
}

/// One piece of a division: an edge-induced subgraph of the parent.
pub struct Piece {
    /// Parent face ids making up the piece's region.
    pub faces: Vec<Face>,
    /// Parent edge ids, sorted. Rim edges appear in both adjacent pieces.
    pub edges: Vec<EdgeId>,
    pub graph: EmbeddedGraph,
    pub map: SubMap,
    /// Parent vertex ids incident to an edge outside the piece, sorted.
    pub boundary: Vec<Vertex>,
    /// Faces of `graph` (ids as built by `DualGraph::new`) that are not
    /// faces of the parent.
    pub holes: Vec<Face>,
}

pub struct Division {
    pub pieces: Vec<Piece>,
    /// Lowest-index piece containing each vertex.
    pub owner: Vec<usize>,
    pub r: usize,
    pub params: DivisionParams,
}

/// Measured contract constants of a finished division.
#[derive(Clone, Copy, Debug)]
pub struct DivisionStats {
    pub pieces: usize,
    pub max_vertices: usize,
    pub max_boundary: usize,
    pub max_holes: usize,
    pub boundary_total: usize,
    pub c1_measured: f64,
    pub c2_measured: f64,
    pub c3_measured: f64,
}

enum SplitBy {
    Vertices,
    Boundary,
    Holes,
}

pub fn r_division(g: &EmbeddedGraph, r: usize) -> Result<Division> {
    r_division_with(g, r, DivisionParams::default())
}

pub fn r_division_with(g: &EmbeddedGraph, r: usize, params: DivisionParams) -> Result<Division> {
    let dual = DualGraph::new(g);
    for (f, orbit) in dual.faces.iter().enumerate() {
        if orbit.len() != 3 {
            return Err(Error::NotTriangulated(f, orbit.len()));
        }
    }
    let r = r.max(4);
    let max_verts = (params.c2 * r as f64) as usize;
    let max_bnd = (params.c3 * (r as f64).sqrt()) as usize;

    let mut queue: VecDeque<Vec<Face>> = VecDeque::new();
    queue.push_back((0..dual.num_faces()).collect());
    let mut done: Vec<(Vec<Face>, EmbeddedGraph, SubMap, Vec<Vertex>, Vec<Face>)> = Vec::new();
    let mut in_set = vec![false; dual.num_faces()];

    while let Some(faces) = queue.pop_front() {
        let comps = dual_components(&dual, &faces, &mut in_set);
        if comps.len() > 1 {
            queue.extend(comps);
            continue;
        }
        let edges = edges_of(&dual, &faces);
        let (sub, map) = g.subgraph(&edges)?;
        let boundary = boundary_of(g, &dual, &faces, &map, &mut in_set);
        let holes = hole_faces(&dual, &sub, &map);
        let by = if sub.num_vertices() > max_verts {
            Some(SplitBy::Vertices)
        } else if boundary.len() > max_bnd {
            Some(SplitBy::Boundary)
        } else if holes.len() > params.c4 {
            Some(SplitBy::Holes)
        } else {
            None
        };
        match by {
            Some(by) if faces.len() > 1 => {
                let (a, b) = split_piece(&dual, &faces, &sub, &map, &boundary, by, &mut in_set);
                debug_assert_eq!(a.len() + b.len(), faces.len());
                if a.is_empty() || b.is_empty() {
                    // weights all fell on one side; fall back to an even cut
                    let (a, b) = bisect(&faces);
                    queue.push_back(a);
                    queue.push_back(b);
                } else {
                    queue.push_back(a);
                    queue.push_back(b);
                }
            }
            _ => done.push((faces, sub, map, boundary, holes)),
        }
    }

    let pieces: Vec<Piece> = done
        .into_iter()
        .map(|(faces, graph, map, boundary, holes)| {
            let edges = edges_of(&dual, &faces);
            Piece { faces, edges, graph, map, boundary, holes }
        })
        .collect();
    let owner = assign_owners(&pieces, g.num_vertices());
    Ok(Division { pieces, owner, r, params })
}

/// Lowest-index piece containing each vertex.
pub fn assign_owners(pieces: &[Piece], n: usize) -> Vec<usize> {
    let mut owner = vec![NONE; n];
    for (i, p) in pieces.iter().enumerate() {
        for &v in &p.map.v_to_parent {
            if owner[v] == NONE {
                owner[v] = i;
            }
        }
    }
    debug_assert!(owner.iter().all(|&o| o != NONE));
    owner
}

fn edges_of(dual: &DualGraph, faces: &[Face]) -> Vec<EdgeId> {
    let mut edges: Vec<EdgeId> = faces
        .iter()
        .flat_map(|&f| dual.faces[f].iter().map(|&d| d >> 1))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    edges
}

/// Splits a face set into components connected through shared edges.
fn dual_components(dual: &DualGraph, faces: &[Face], in_set: &mut [bool]) -> Vec<Vec<Face>> {
    for &f in faces {
        in_set[f] = true;
    }
    let mut comps = Vec::new();
    let mut seen = vec![false; faces.len()];
    let mut index = std::collections::HashMap::new();
    for (i, &f) in faces.iter().enumerate() {
        index.insert(f, i);
    }
    for i in 0..faces.len() {
        if seen[i] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![faces[i]];
        seen[i] = true;
        while let Some(f) = stack.pop() {
            comp.push(f);
            for &d in &dual.faces[f] {
                let nf = dual.face_of[d ^ 1];
                if in_set[nf] {
                    let ni = index[&nf];
                    if !seen[ni] {
                        seen[ni] = true;
                        stack.push(nf);
                    }
                }
            }
        }
        comps.push(comp);
    }
    for &f in faces {
        in_set[f] = false;
    }
    comps
}

/// Vertices incident to an edge both of whose sides lie outside the piece.
fn boundary_of(g: &EmbeddedGraph, dual: &DualGraph, faces: &[Face], map: &SubMap, in_set: &mut [bool]) -> Vec<Vertex> {
    for &f in faces {
        in_set[f] = true;
    }
    let mut boundary = Vec::new();
    for &v in &map.v_to_parent {
        let out = g
            .out_darts(v)
            .any(|d| !in_set[dual.face_of[d]] && !in_set[dual.face_of[d ^ 1]]);
        if out {
            boundary.push(v);
        }
    }
    for &f in faces {
        in_set[f] = false;
    }
    boundary.sort_unstable();
    boundary
}

/// Faces of the piece subgraph that are not faces of the parent.
fn hole_faces(dual: &DualGraph, sub: &EmbeddedGraph, map: &SubMap) -> Vec<Face> {
    let dual_s = DualGraph::new(sub);
    let mut holes = Vec::new();
    for (f, orbit) in dual_s.faces.iter().enumerate() {
        let pd = map.dart_to_parent[orbit[0]];
        let pf = dual.face_of[pd];
        let real = orbit.len() == dual.faces[pf].len()
            && orbit.iter().all(|&d| dual.face_of[map.dart_to_parent[d]] == pf);
        if !real {
            holes.push(f);
        }
    }
    holes
}

fn bisect(faces: &[Face]) -> (Vec<Face>, Vec<Face>) {
    let mid = faces.len() / 2;
    (faces[..mid].to_vec(), faces[mid..].to_vec())
}

/// One balanced fundamental-cycle split. Returns the piece's faces
/// partitioned into the side enclosed by the chosen cycle and the rest.
#[allow(clippy::too_many_arguments)]
fn split_piece(
    dual: &DualGraph,
    faces: &[Face],
    sub: &EmbeddedGraph,
    map: &SubMap,
    boundary: &[Vertex],
    by: SplitBy,
    in_set: &mut [bool],
) -> (Vec<Face>, Vec<Face>) {
    for &f in faces {
        in_set[f] = true;
    }
    let real_edges = sub.num_edges();
    let (tri, _) = sub.triangulated(0);
    let dual_t = DualGraph::new(&tri);
    let nf = dual_t.num_faces();

    // parent face behind each triangle that is real piece material
    let mut tri_parent = vec![NONE; nf];
    for (fi, orbit) in dual_t.faces.iter().enumerate() {
        debug_assert_eq!(orbit.len(), 3);
        if orbit.iter().any(|&d| d >= 2 * real_edges) {
            continue;
        }
        let pf = dual.face_of[map.dart_to_parent[orbit[0]]];
        if in_set[pf] && orbit.iter().all(|&d| dual.face_of[map.dart_to_parent[d]] == pf) {
            tri_parent[fi] = pf;
        }
    }

    // BFS tree over the real edges; every added chord is a non-tree edge
    let mut tree_edge = vec![false; tri.num_edges()];
    let mut seen_v = vec![false; tri.num_vertices()];
    let mut bfs = VecDeque::new();
    seen_v[0] = true;
    bfs.push_back(0usize);
    while let Some(v) = bfs.pop_front() {
        for d in sub.out_darts(v) {
            let w = sub.head(d);
            if !seen_v[w] {
                seen_v[w] = true;
                tree_edge[d >> 1] = true;
                bfs.push_back(w);
            }
        }
    }
    debug_assert!(seen_v.iter().all(|&s| s));

    // non-tree edges form a spanning tree of the triangulated dual
    let mut adj: Vec<Vec<Face>> = vec![Vec::new(); nf];
    for e in 0..tri.num_edges() {
        if e < real_edges && tree_edge[e] {
            continue;
        }
        let (fa, fb) = (dual_t.face_of[2 * e], dual_t.face_of[2 * e + 1]);
        adj[fa].push(fb);
        adj[fb].push(fa);
    }
    let root = dual_t.outer;
    let mut order = Vec::with_capacity(nf);
    let mut parent = vec![NONE; nf];
    let mut tin = vec![0usize; nf];
    let mut tout = vec![0usize; nf];
    let mut stack = vec![(root, false)];
    parent[root] = root;
    let mut clock = 0;
    while let Some((f, post)) = stack.pop() {
        if post {
            tout[f] = clock;
            continue;
        }
        tin[f] = clock;
        clock += 1;
        order.push(f);
        stack.push((f, true));
        for &nb in &adj[f] {
            if parent[nb] == NONE {
                parent[nb] = f;
                stack.push((nb, false));
            }
        }
    }
    debug_assert_eq!(order.len(), nf, "non-tree edges must span the dual");

    let mut w = vec![0u64; nf];
    match by {
        SplitBy::Holes => {
            for (fi, orbit) in dual_t.faces.iter().enumerate() {
                if orbit.iter().any(|&d| d >= 2 * real_edges) {
                    w[fi] = 1;
                }
            }
        }
        SplitBy::Vertices => {
            for v in 0..tri.num_vertices() {
                w[dual_t.face_of[tri.first_dart(v)]] += 1;
            }
        }
        SplitBy::Boundary => {
            for &pv in boundary {
                let v = map.v_to_sub[pv];
                w[dual_t.face_of[tri.first_dart(v)]] += 1;
            }
        }
    }
    let total: u64 = w.iter().sum();
    let mut sum = w.clone();
    for &f in order.iter().rev() {
        if parent[f] != f {
            sum[parent[f]] += sum[f];
        }
    }
    let mut best = NONE;
    let mut best_score = u64::MAX;
    for f in 0..nf {
        if f == root {
            continue;
        }
        let win = sum[f];
        let score = win.max(total - win);
        if score < best_score {
            best_score = score;
            best = f;
        }
    }
    let (mut inside, mut outside) = (Vec::new(), Vec::new());
    for fi in 0..nf {
        if tri_parent[fi] == NONE {
            continue;
        }
        if tin[best] <= tin[fi] && tin[fi] < tout[best] {
            inside.push(tri_parent[fi]);
        } else {
            outside.push(tri_parent[fi]);
        }
    }
    for &f in faces {
        in_set[f] = false;
    }
    (inside, outside)
}

/// Validates a division against its graph and measures the contract
/// constants. Errors spell out the first violated requirement.
pub fn check_division(g: &EmbeddedGraph, div: &Division) -> Result<DivisionStats> {
    let n = g.num_vertices();
    let dual = DualGraph::new(g);
    let fail = |msg: String| Err(Error::DivisionContract(msg));

    let mut edge_cover = vec![false; g.num_edges()];
    let mut face_owner = vec![NONE; dual.num_faces()];
    let mut max_vertices = 0;
    let mut max_boundary = 0;
    let mut max_holes = 0;
    let mut boundary_total = 0;
    for (i, p) in div.pieces.iter().enumerate() {
        for &f in &p.faces {
            if face_owner[f] != NONE {
                return fail(format!("face {f} lies in pieces {} and {i}", face_owner[f]));
            }
            face_owner[f] = i;
        }
        for &e in &p.edges {
            edge_cover[e] = true;
        }
        let expect = edges_of(&dual, &p.faces);
        if expect != p.edges {
            return fail(format!("piece {i} edge set disagrees with its faces"));
        }

        // boundary rule and hole incidence
        let mut in_set = vec![false; dual.num_faces()];
        for &f in &p.faces {
            in_set[f] = true;
        }
        let mut on_hole = vec![false; p.graph.num_vertices()];
        let dual_p = DualGraph::new(&p.graph);
        for &h in &p.holes {
            for &d in &dual_p.faces[h] {
                on_hole[p.graph.tail(d)] = true;
            }
        }
        for &v in &p.map.v_to_parent {
            let is_b = g
                .out_darts(v)
                .any(|d| !in_set[dual.face_of[d]] && !in_set[dual.face_of[d ^ 1]]);
            let listed = p.boundary.binary_search(&v).is_ok();
            if is_b != listed {
                return fail(format!("piece {i} misclassifies vertex {v} as boundary={listed}"));
            }
            if is_b && !on_hole[p.map.v_to_sub[v]] {
                return fail(format!("boundary vertex {v} of piece {i} touches no hole"));
            }
        }
        max_vertices = max_vertices.max(p.graph.num_vertices());
        max_boundary = max_boundary.max(p.boundary.len());
        max_holes = max_holes.max(p.holes.len());
        boundary_total += p.boundary.len();
    }
    if let Some(e) = edge_cover.iter().position(|&c| !c) {
        return fail(format!("edge {e} belongs to no piece"));
    }
    if let Some(f) = face_owner.iter().position(|&o| o == NONE) {
        return fail(format!("face {f} belongs to no piece"));
    }
    for v in 0..n {
        let o = div.owner[v];
        if o >= div.pieces.len() || div.pieces[o].map.v_to_sub[v] == NONE {
            return fail(format!("owner of vertex {v} does not contain it"));
        }
        if let Some(lower) = div.pieces[..o].iter().position(|p| p.map.v_to_sub[v] != NONE) {
            return fail(format!("vertex {v} owned by {o} but already in piece {lower}"));
        }
    }

    let r = div.r as f64;
    let stats = DivisionStats {
        pieces: div.pieces.len(),
        max_vertices,
        max_boundary,
        max_holes,
        boundary_total,
        c1_measured: div.pieces.len() as f64 * r / n as f64,
        c2_measured: max_vertices as f64 / r,
        c3_measured: max_boundary as f64 / r.sqrt(),
    };
    let p = div.params;
    if stats.c1_measured > p.c1 {
        return fail(format!("{} pieces exceed c1*n/r = {}", stats.pieces, p.c1 * n as f64 / r));
    }
    if stats.c2_measured > p.c2 {
        return fail(format!("piece with {max_vertices} vertices exceeds c2*r"));
    }
    if stats.c3_measured > p.c3 {
        return fail(format!("piece with {max_boundary} boundary vertices exceeds c3*sqrt(r)"));
    }
    if max_holes > p.c4 {
        return fail(format!("piece with {max_holes} holes exceeds c4 = {}", p.c4));
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;

    fn tri_grid(w: usize, h: usize) -> EmbeddedGraph {
        generate::grid(w, h).triangulated(0).0
    }

    #[test]
    fn grid_division_contract() {
        let g = tri_grid(16, 16);
        let div = r_division(&g, 64).unwrap();
        let stats = check_division(&g, &div).unwrap();
        assert!(stats.pieces > 1);
        // every piece kept within the advertised bounds
        assert!(stats.max_vertices <= 64);
        assert!(stats.max_boundary <= 8 * 8);
        assert!(stats.max_holes <= 12);
    }

    #[test]
    fn single_piece_when_r_covers_graph() {
        let g = generate::triangulation(30, 5);
        let n = g.num_vertices();
        let div = r_division(&g, n).unwrap();
        assert_eq!(div.pieces.len(), 1);
        assert!(div.pieces[0].boundary.is_empty());
        assert!(div.pieces[0].holes.is_empty());
        assert!(div.owner.iter().all(|&o| o == 0));
        check_division(&g, &div).unwrap();
    }

    #[test]
    fn rejects_non_triangulated_input() {
        let g = generate::grid(3, 3);
        assert!(matches!(r_division(&g, 4), Err(Error::NotTriangulated(_, _))));
    }

    #[test]
    fn random_triangulations_meet_the_contract() {
        for (extra, seed, r) in [(40usize, 1u64, 8usize), (90, 2, 12), (200, 3, 16), (200, 4, 40)] {
            let g = generate::triangulation(extra, seed);
            let div = r_division(&g, r).unwrap();
            let stats = check_division(&g, &div).unwrap();
            assert!(stats.pieces >= 1, "extra={extra} seed={seed} r={r}");
        }
    }

    #[test]
    fn double_wheel_divides() {
        let g = generate::double_wheel_parts(24).build().unwrap();
        let div = r_division(&g, 8).unwrap();
        check_division(&g, &div).unwrap();
    }

    #[test]
    fn larger_grid_constants_stay_moderate() {
        let g = tri_grid(24, 24);
        let div = r_division(&g, 36).unwrap();
        let stats = check_division(&g, &div).unwrap();
        assert!(stats.c1_measured <= 8.0, "c1 = {}", stats.c1_measured);
        assert!(stats.c3_measured <= 8.0, "c3 = {}", stats.c3_measured);
    }
}
