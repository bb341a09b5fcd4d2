//! Embedded planar digraphs and their duals.
//!
//! A graph is stored as a rotation system: edge `i` owns darts `2i` and
//! `2i+1` (reverses of each other), and every vertex has a circular list
//! of outgoing darts in counterclockwise order. Faces are traced with
//! `face_next(d) = rot_prev(rev(d))`, which puts every face on the left
//! of its darts: bounded faces are counterclockwise orbits, the outer
//! face a clockwise one. The dual dart of `d` keeps the id of `d`; it
//! goes from the face left of `d` to the face left of `rev(d)`, i.e. it
//! crosses `d` from left to right, so `tail(d)` lies to the right of the
//! dual dart.

use crate::exact::{ExactLength, MAX_INPUT_BASE};
use crate::{Error, Result};

pub type Vertex = usize;
pub type Dart = usize;
pub type Face = usize;
pub type EdgeId = usize;

/// Sentinel index used instead of Option to keep arrays flat.
pub const NONE: usize = usize::MAX;

/// One undirected input edge with the lengths of its two darts.
#[derive(Clone, Copy, Debug)]
pub struct EdgeSpec {
    pub u: Vertex,
    pub v: Vertex,
    pub len_uv: i64,
    pub len_vu: i64,
}

/// Planar digraph with a combinatorial embedding.
#[derive(Clone)]
pub struct EmbeddedGraph {
    n: usize,
    tail: Vec<Vertex>,
    len: Vec<ExactLength>,
    structural: Vec<bool>,
    rot_next: Vec<Dart>,
    rot_prev: Vec<Dart>,
    first_dart: Vec<Dart>,
    outer_dart: Dart,
    perturbed: bool,
}

impl EmbeddedGraph {
    /// Builds and validates a graph from edges and per-vertex rotations.
    ///
    /// `rotations[v]` must list all darts with tail `v` in counterclockwise
    /// order. `outer` designates the face left of that dart as the outer
    /// face; it defaults to the face left of dart 0.
    pub fn build(
        n: usize,
        edges: &[EdgeSpec],
        rotations: &[Vec<Dart>],
        outer: Option<Dart>,
    ) -> Result<EmbeddedGraph> {
        let m = edges.len();
        if n == 0 {
            return Err(Error::BadParams("graph needs at least one vertex".into()));
        }
        if rotations.len() != n {
            return Err(Error::BadParams(format!(
                "expected {} rotation lists, got {}",
                n,
                rotations.len()
            )));
        }
        let mut tail = vec![0usize; 2 * m];
        let mut len = vec![ExactLength::ZERO; 2 * m];
        for (i, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(Error::IndexOutOfRange(format!("edge {} endpoints {} {}", i, e.u, e.v)));
            }
            for l in [e.len_uv, e.len_vu] {
                if l.abs() > MAX_INPUT_BASE {
                    return Err(Error::LengthOverflow(format!(
                        "edge {} has length {}, limit is {}",
                        i, l, MAX_INPUT_BASE
                    )));
                }
            }
            tail[2 * i] = e.u;
            tail[2 * i + 1] = e.v;
            len[2 * i] = ExactLength::new(e.len_uv, 0);
            len[2 * i + 1] = ExactLength::new(e.len_vu, 0);
        }

        let mut rot_next = vec![NONE; 2 * m];
        let mut rot_prev = vec![NONE; 2 * m];
        let mut first_dart = vec![NONE; n];
        let mut seen = vec![false; 2 * m];
        for (v, rot) in rotations.iter().enumerate() {
            for &d in rot {
                if d >= 2 * m {
                    return Err(Error::IndexOutOfRange(format!("dart {} in rotation of {}", d, v)));
                }
                if seen[d] {
                    return Err(Error::DuplicateDart(d));
                }
                seen[d] = true;
                if tail[d] != v {
                    return Err(Error::BadParams(format!(
                        "dart {} has tail {}, listed in rotation of {}",
                        d, tail[d], v
                    )));
                }
            }
            for (k, &d) in rot.iter().enumerate() {
                rot_next[d] = rot[(k + 1) % rot.len()];
                rot_prev[d] = rot[(k + rot.len() - 1) % rot.len()];
            }
            if !rot.is_empty() {
                first_dart[v] = rot[0];
            }
        }
        if let Some(d) = seen.iter().position(|&s| !s) {
            return Err(Error::BadParams(format!("dart {} missing from rotations", d)));
        }
        if m == 0 && n > 1 {
            return Err(Error::DisconnectedGraph);
        }

        let outer_dart = outer.unwrap_or(0);
        if m > 0 && outer_dart >= 2 * m {
            return Err(Error::IndexOutOfRange(format!("outer dart {}", outer_dart)));
        }

        let g = EmbeddedGraph {
            n,
            tail,
            len,
            structural: vec![false; m],
            rot_next,
            rot_prev,
            first_dart,
            outer_dart,
            perturbed: false,
        };
        g.check_connected()?;
        g.check_euler()?;
        Ok(g)
    }

    /// Assembles a graph from raw arrays. Used internally where the pieces
    /// are planar by construction; validates in debug builds only.
    pub(crate) fn from_parts(
        n: usize,
        tail: Vec<Vertex>,
        len: Vec<ExactLength>,
        structural: Vec<bool>,
        rot_next: Vec<Dart>,
        outer_dart: Dart,
        perturbed: bool,
    ) -> EmbeddedGraph {
        let num_darts = tail.len();
        debug_assert_eq!(num_darts % 2, 0);
        debug_assert_eq!(structural.len(), num_darts / 2);
        let mut rot_prev = vec![NONE; num_darts];
        let mut first_dart = vec![NONE; n];
        for d in 0..num_darts {
            rot_prev[rot_next[d]] = d;
            if first_dart[tail[d]] == NONE {
                first_dart[tail[d]] = d;
            }
        }
        let g = EmbeddedGraph {
            n,
            tail,
            len,
            structural,
            rot_next,
            rot_prev,
            first_dart,
            outer_dart,
            perturbed,
        };
        debug_assert!(g.check_connected().is_ok());
        debug_assert!(g.check_euler().is_ok());
        g
    }

    #[inline]
    pub fn num_vertices(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.tail.len() / 2
    }

    #[inline]
    pub fn num_darts(&self) -> usize {
        self.tail.len()
    }

    #[inline]
    pub fn rev(&self, d: Dart) -> Dart {
        d ^ 1
    }

    #[inline]
    pub fn tail(&self, d: Dart) -> Vertex {
        self.tail[d]
    }

    #[inline]
    pub fn head(&self, d: Dart) -> Vertex {
        self.tail[d ^ 1]
    }

    #[inline]
    pub fn len(&self, d: Dart) -> ExactLength {
        self.len[d]
    }

    #[inline]
    pub fn edge(&self, d: Dart) -> EdgeId {
        d >> 1
    }

    #[inline]
    pub fn is_structural(&self, d: Dart) -> bool {
        self.structural[d >> 1]
    }

    #[inline]
    pub fn rot_next(&self, d: Dart) -> Dart {
        self.rot_next[d]
    }

    #[inline]
    pub fn rot_prev(&self, d: Dart) -> Dart {
        self.rot_prev[d]
    }

    /// Next dart along the face left of `d`: at `head(d)`, the first dart
    /// clockwise from `rev(d)`.
    #[inline]
    pub fn face_next(&self, d: Dart) -> Dart {
        self.rot_prev[d ^ 1]
    }

    /// Previous dart along the face left of `d`.
    #[inline]
    pub fn face_prev(&self, d: Dart) -> Dart {
        self.rot_next[d] ^ 1
    }

    #[inline]
    pub fn outer_dart(&self) -> Dart {
        self.outer_dart
    }

    /// Re-designates the outer face. The embedding itself never changes;
    /// only this marker does.
    pub fn set_outer_dart(&mut self, d: Dart) {
        assert!(d < self.num_darts());
        self.outer_dart = d;
    }

    #[inline]
    pub fn is_perturbed(&self) -> bool {
        self.perturbed
    }

    /// Some dart leaving `v`, or `NONE` for an isolated vertex.
    #[inline]
    pub fn first_dart(&self, v: Vertex) -> Dart {
        self.first_dart[v]
    }

    /// Iterates over the darts leaving `v` in rotation order.
    pub fn out_darts(&self, v: Vertex) -> OutDarts<'_> {
        OutDarts { g: self, first: self.first_dart[v], cur: self.first_dart[v], started: false }
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.out_darts(v).count()
    }

    fn check_connected(&self) -> Result<()> {
        if self.n == 1 {
            return Ok(());
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut cnt = 1;
        while let Some(v) = stack.pop() {
            for d in self.out_darts(v) {
                let w = self.head(d);
                if !seen[w] {
                    seen[w] = true;
                    cnt += 1;
                    stack.push(w);
                }
            }
        }
        if cnt != self.n {
            return Err(Error::DisconnectedGraph);
        }
        Ok(())
    }

    fn check_euler(&self) -> Result<()> {
        let f = self.count_faces();
        let n = self.n;
        let m = self.num_edges();
        if n + f != m + 2 {
            return Err(Error::EulerViolation { n, m, f });
        }
        Ok(())
    }

    fn count_faces(&self) -> usize {
        if self.num_darts() == 0 {
            return 1;
        }
        let mut seen = vec![false; self.num_darts()];
        let mut f = 0;
        for d0 in 0..self.num_darts() {
            if seen[d0] {
                continue;
            }
            f += 1;
            let mut d = d0;
            loop {
                seen[d] = true;
                d = self.face_next(d);
                if d == d0 {
                    break;
                }
            }
        }
        f
    }

    /// Draws a fresh infinitesimal per dart so that all shortest paths and
    /// all relevant distance comparisons become unique.
    pub fn perturb(&mut self, seed: u64) -> Result<()> {
        use rand::Rng;
        use rand::SeedableRng;
        if self.perturbed || self.len.iter().any(|l| l.eps != 0) {
            return Err(Error::AlreadyPerturbed);
        }
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        for l in &mut self.len {
            l.eps = rng.gen_range(1..=crate::exact::MAX_EPS);
        }
        self.perturbed = true;
        Ok(())
    }

    /// Restriction to an edge subset, keeping the induced embedding. The
    /// rotation of a kept vertex is its original rotation filtered to kept
    /// darts. Fails if the restriction is not connected.
    pub fn subgraph(&self, edges: &[EdgeId]) -> Result<(EmbeddedGraph, SubMap)> {
        if edges.is_empty() {
            return Err(Error::BadParams("empty edge set".into()));
        }
        let mut edge_keep = vec![false; self.num_edges()];
        for &e in edges {
            if e >= self.num_edges() {
                return Err(Error::IndexOutOfRange(format!("edge {}", e)));
            }
            if edge_keep[e] {
                return Err(Error::BadParams(format!("edge {} listed twice", e)));
            }
            edge_keep[e] = true;
        }
        let mut v_to_sub = vec![NONE; self.n];
        let mut v_to_parent = Vec::new();
        for &e in edges {
            for v in [self.tail(2 * e), self.head(2 * e)] {
                if v_to_sub[v] == NONE {
                    v_to_sub[v] = v_to_parent.len();
                    v_to_parent.push(v);
                }
            }
        }
        let sn = v_to_parent.len();
        let mut dart_to_parent = vec![NONE; 2 * edges.len()];
        let mut dart_to_sub = vec![NONE; self.num_darts()];
        for (i, &e) in edges.iter().enumerate() {
            for s in 0..2 {
                dart_to_parent[2 * i + s] = 2 * e + s;
                dart_to_sub[2 * e + s] = 2 * i + s;
            }
        }
        let mut tail = vec![0usize; 2 * edges.len()];
        let mut len = vec![ExactLength::ZERO; 2 * edges.len()];
        let mut structural = vec![false; edges.len()];
        for (i, &e) in edges.iter().enumerate() {
            structural[i] = self.structural[e];
            for s in 0..2 {
                tail[2 * i + s] = v_to_sub[self.tail[2 * e + s]];
                len[2 * i + s] = self.len[2 * e + s];
            }
        }
        let mut rot_next = vec![NONE; 2 * edges.len()];
        for &pv in &v_to_parent {
            let kept: Vec<Dart> = self
                .out_darts(pv)
                .filter(|&d| edge_keep[self.edge(d)])
                .map(|d| dart_to_sub[d])
                .collect();
            debug_assert!(!kept.is_empty());
            for (k, &d) in kept.iter().enumerate() {
                rot_next[d] = kept[(k + 1) % kept.len()];
            }
        }
        let mut rot_prev = vec![NONE; 2 * edges.len()];
        let mut first_dart = vec![NONE; sn];
        for d in 0..rot_next.len() {
            rot_prev[rot_next[d]] = d;
            if first_dart[tail[d]] == NONE {
                first_dart[tail[d]] = d;
            }
        }
        // deletions only merge faces, so the face left of a surviving outer
        // dart still contains the old outer region
        let outer_dart = if dart_to_sub[self.outer_dart] != NONE { dart_to_sub[self.outer_dart] } else { 0 };
        let g = EmbeddedGraph {
            n: sn,
            tail,
            len,
            structural,
            rot_next,
            rot_prev,
            first_dart,
            outer_dart,
            perturbed: self.perturbed,
        };
        g.check_connected()?;
        g.check_euler()?;
        Ok((g, SubMap { v_to_sub, v_to_parent, dart_to_parent, dart_to_sub }))
    }

    /// Adds chords until every face, the outer one included, is a triangle.
    /// New edges are marked structural and carry `chord_len` both ways.
    /// Returns the triangulated graph and the number of edges added; darts
    /// and vertices of the original keep their ids.
    ///
    /// Faces may visit a vertex twice (cut vertices); the chord for such a
    /// face is picked so it never forms a self loop. Parallel edges can
    /// appear and are fine for the rotation system.
    pub fn triangulated(&self, chord_len: i64) -> (EmbeddedGraph, usize) {
        let mut tail = self.tail.clone();
        let mut len = self.len.clone();
        let mut structural = self.structural.clone();
        let mut rot_next = self.rot_next.clone();
        let mut rot_prev = self.rot_prev.clone();
        let face_next = |rot_prev: &[Dart], d: Dart| rot_prev[d ^ 1];
        let mut done = vec![false; self.num_darts()];
        let mut d0 = 0;
        while d0 < tail.len() {
            if done[d0] {
                d0 += 1;
                continue;
            }
            let mut cur = d0;
            loop {
                let mut size = 1;
                let mut d = face_next(&rot_prev, cur);
                while d != cur {
                    size += 1;
                    d = face_next(&rot_prev, d);
                }
                if size <= 3 {
                    let mut d = cur;
                    loop {
                        done[d] = true;
                        d = face_next(&rot_prev, d);
                        if d == cur {
                            break;
                        }
                    }
                    break;
                }
                // chord two steps ahead, skipping spots where the face
                // revisits the same vertex
                let mut d1 = cur;
                loop {
                    let d3 = face_next(&rot_prev, face_next(&rot_prev, d1));
                    if tail[d1] != tail[d3] {
                        break;
                    }
                    d1 = face_next(&rot_prev, d1);
                    debug_assert_ne!(d1, cur, "untriangulatable face of a simple graph");
                }
                let d2 = face_next(&rot_prev, face_next(&rot_prev, d1));
                let a = tail.len();
                let b = a + 1;
                tail.push(tail[d1]);
                tail.push(tail[d2]);
                len.push(ExactLength::new(chord_len, 0));
                len.push(ExactLength::new(chord_len, 0));
                structural.push(true);
                done.push(false);
                done.push(false);
                rot_next.push(NONE);
                rot_next.push(NONE);
                rot_prev.push(NONE);
                rot_prev.push(NONE);
                for (x, nd) in [(d1, a), (d2, b)] {
                    let nx = rot_next[x];
                    rot_next[nd] = nx;
                    rot_prev[nx] = nd;
                    rot_next[x] = nd;
                    rot_prev[nd] = x;
                }
                // the triangle [b, d1, old face_next(d1)] is finished
                done[b] = true;
                done[d1] = true;
                done[face_next(&rot_prev, d1)] = true;
                cur = a;
            }
            d0 += 1;
        }
        let added = (tail.len() - self.num_darts()) / 2;
        let g = EmbeddedGraph::from_parts(self.n, tail, len, structural, rot_next, self.outer_dart, self.perturbed);
        (g, added)
    }
}

/// Index maps between a graph and one of its restrictions.
pub struct SubMap {
    /// Parent vertex -> sub vertex, `NONE` when absent.
    pub v_to_sub: Vec<usize>,
    /// Sub vertex -> parent vertex.
    pub v_to_parent: Vec<Vertex>,
    /// Sub dart -> parent dart.
    pub dart_to_parent: Vec<Dart>,
    /// Parent dart -> sub dart, `NONE` when absent.
    pub dart_to_sub: Vec<usize>,
}

pub struct OutDarts<'a> {
    g: &'a EmbeddedGraph,
    first: Dart,
    cur: Dart,
    started: bool,
}

impl Iterator for OutDarts<'_> {
    type Item = Dart;
    fn next(&mut self) -> Option<Dart> {
        if self.first == NONE || (self.started && self.cur == self.first) {
            return None;
        }
        self.started = true;
        let d = self.cur;
        self.cur = self.g.rot_next(d);
        Some(d)
    }
}

/// Faces of an embedding, with constant-time dual incidences.
///
/// The dual dart of `d` shares its id: it goes from `face_of[d]` to
/// `face_of[rev(d)]`, and the dual of `rev(d)` is its reverse.
pub struct DualGraph {
    pub face_of: Vec<Face>,
    pub faces: Vec<Vec<Dart>>,
    pub pos_in_face: Vec<usize>,
    pub outer: Face,
}

impl DualGraph {
    pub fn new(g: &EmbeddedGraph) -> DualGraph {
        let nd = g.num_darts();
        let mut face_of = vec![NONE; nd];
        let mut faces = Vec::new();
        let mut pos_in_face = vec![0usize; nd];
        for d0 in 0..nd {
            if face_of[d0] != NONE {
                continue;
            }
            let id = faces.len();
            let mut orbit = Vec::new();
            let mut d = d0;
            loop {
                face_of[d] = id;
                pos_in_face[d] = orbit.len();
                orbit.push(d);
                d = g.face_next(d);
                if d == d0 {
                    break;
                }
            }
            faces.push(orbit);
        }
        if faces.is_empty() {
            faces.push(Vec::new());
        }
        let outer = if nd == 0 { 0 } else { face_of[g.outer_dart()] };
        DualGraph { face_of, faces, pos_in_face, outer }
    }

    #[inline]
    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Tail of the dual dart with the same id as primal dart `d`.
    #[inline]
    pub fn dual_tail(&self, d: Dart) -> Face {
        self.face_of[d]
    }

    /// Head of the dual dart with the same id as primal dart `d`.
    #[inline]
    pub fn dual_head(&self, d: Dart) -> Face {
        self.face_of[d ^ 1]
    }

    #[inline]
    pub fn face_degree(&self, f: Face) -> usize {
        self.faces[f].len()
    }
}

/// Closed walk in the dual, stored as the sequence of dual dart ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualWalk {
    pub arcs: Vec<Dart>,
}

impl DualWalk {
    pub fn new(arcs: Vec<Dart>) -> DualWalk {
        DualWalk { arcs }
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// The same walk traversed backwards; each dual dart is replaced by
    /// its reverse, which shares the id of the reversed primal dart.
    pub fn reversed(&self) -> DualWalk {
        DualWalk { arcs: self.arcs.iter().rev().map(|&d| d ^ 1).collect() }
    }

    /// Checks the walk is a closed chain of adjacent dual darts.
    pub fn validate(&self, g: &EmbeddedGraph, dual: &DualGraph) -> Result<()> {
        if self.arcs.is_empty() {
            return Err(Error::InvalidWalk("empty walk".into()));
        }
        for &a in &self.arcs {
            if a >= g.num_darts() {
                return Err(Error::IndexOutOfRange(format!("walk arc {}", a)));
            }
        }
        for i in 0..self.arcs.len() {
            let a = self.arcs[i];
            let b = self.arcs[(i + 1) % self.arcs.len()];
            if dual.dual_head(a) != dual.dual_tail(b) {
                return Err(Error::InvalidWalk(format!(
                    "arcs {} and {} are not consecutive",
                    a, b
                )));
            }
        }
        Ok(())
    }
}

/// Vertices strictly to the right of a closed dual walk.
///
/// The walk must use every undirected dual edge at most once; that makes
/// "right of the traversal" a well defined side for the whole walk, found
/// by crossing-parity from the local anchor `tail(arcs[0])`, which sits on
/// the right of its strand. Runs in linear time.
pub fn walk_right_side(g: &EmbeddedGraph, dual: &DualGraph, walk: &DualWalk) -> Result<Vec<bool>> {
    walk.validate(g, dual)?;
    let mut crossed = vec![false; g.num_edges()];
    for &a in &walk.arcs {
        let e = g.edge(a);
        if crossed[e] {
            return Err(Error::CrossingWalk);
        }
        crossed[e] = true;
    }
    // parity[v] = number of walk strands crossed on the tree path from the
    // anchor, mod 2. Even parity = anchor side = right side.
    let anchor = g.tail(walk.arcs[0]);
    let mut parity = vec![u8::MAX; g.num_vertices()];
    parity[anchor] = 0;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(anchor);
    while let Some(v) = queue.pop_front() {
        for d in g.out_darts(v) {
            let w = g.head(d);
            let p = parity[v] ^ (crossed[g.edge(d)] as u8);
            if parity[w] == u8::MAX {
                parity[w] = p;
                queue.push_back(w);
            } else {
                debug_assert_eq!(parity[w], p, "walk does not separate consistently");
            }
        }
    }
    debug_assert!(parity.iter().all(|&p| p != u8::MAX));
    Ok(parity.iter().map(|&p| p == 0).collect())
}

/// Whether the closed dual walk is non-self-crossing: every dual edge used
/// at most once, and at every dual vertex visited several times the
/// entry/exit port pairs do not interleave around the face.
pub fn is_non_crossing(g: &EmbeddedGraph, dual: &DualGraph, walk: &DualWalk) -> Result<bool> {
    walk.validate(g, dual)?;
    let mut used = vec![false; g.num_edges()];
    for &a in &walk.arcs {
        let e = g.edge(a);
        if used[e] {
            return Ok(false);
        }
        used[e] = true;
    }
    // Visits of face f: entry arc a (dual head f) came in through boundary
    // dart rev(a); exit arc b (dual tail f) leaves through boundary dart b.
    // Ports are positions in the face orbit.
    let mut visits: std::collections::HashMap<Face, Vec<(usize, usize)>> =
        std::collections::HashMap::new();
    let k = walk.arcs.len();
    for i in 0..k {
        let a = walk.arcs[i];
        let b = walk.arcs[(i + 1) % k];
        let f = dual.dual_head(a);
        let p_in = dual.pos_in_face[a ^ 1];
        let p_out = dual.pos_in_face[b];
        visits.entry(f).or_default().push((p_in, p_out));
    }
    for (f, chords) in visits {
        if chords.len() < 2 {
            continue;
        }
        let deg = dual.face_degree(f);
        for i in 0..chords.len() {
            for j in i + 1..chords.len() {
                if chords_interleave(chords[i], chords[j], deg) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn chords_interleave(a: (usize, usize), b: (usize, usize), cycle: usize) -> bool {
    // b's endpoints must fall on the same side of chord a.
    let inside = |x: usize| -> bool {
        // strictly inside the cyclic interval (a.0, a.1)
        if a.0 == a.1 {
            return false;
        }
        let rel = (x + cycle - a.0) % cycle;
        let end = (a.1 + cycle - a.0) % cycle;
        rel > 0 && rel < end
    };
    inside(b.0) != inside(b.1)
}

/// Primal spanning tree plus the spanning tree of the dual formed by the
/// remaining edges, both by breadth-first search.
pub struct TreeCotree {
    /// Per vertex: the tree dart entering it from its parent; `NONE` at root.
    pub parent_dart: Vec<Dart>,
    /// Vertices in BFS order, root first.
    pub order: Vec<Vertex>,
    /// Per edge: whether it is in the primal tree.
    pub in_tree: Vec<bool>,
    /// Per face: the dual dart entering it from its parent face; `NONE` at root.
    pub cotree_parent: Vec<Dart>,
    /// Faces in BFS order of the cotree, root face first.
    pub cotree_order: Vec<Face>,
}

pub fn tree_cotree(
    g: &EmbeddedGraph,
    dual: &DualGraph,
    root: Vertex,
    cotree_root: Face,
) -> TreeCotree {
    let n = g.num_vertices();
    let mut parent_dart = vec![NONE; n];
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    seen[root] = true;
    order.push(root);
    let mut head = 0;
    let mut in_tree = vec![false; g.num_edges()];
    while head < order.len() {
        let v = order[head];
        head += 1;
        for d in g.out_darts(v) {
            let w = g.head(d);
            if !seen[w] {
                seen[w] = true;
                parent_dart[w] = d;
                in_tree[g.edge(d)] = true;
                order.push(w);
            }
        }
    }
    debug_assert_eq!(order.len(), n);

    let (cotree_parent, cotree_order) = cotree_of_tree(g, dual, &in_tree, cotree_root);
    TreeCotree { parent_dart, order, in_tree, cotree_parent, cotree_order }
}

/// Spanning tree of the dual using exactly the primal non-tree edges,
/// rooted at `root_face`: per-face parent dual dart plus a top-down order.
pub fn cotree_of_tree(
    g: &EmbeddedGraph,
    dual: &DualGraph,
    in_tree: &[bool],
    root_face: Face,
) -> (Vec<Dart>, Vec<Face>) {
    let nf = dual.num_faces();
    let mut parent = vec![NONE; nf];
    let mut order = Vec::with_capacity(nf);
    let mut seen = vec![false; nf];
    seen[root_face] = true;
    order.push(root_face);
    let mut head = 0;
    while head < order.len() {
        let f = order[head];
        head += 1;
        for &d in &dual.faces[f] {
            // the dual dart with id d leaves face_of[d] = f
            if in_tree[g.edge(d)] {
                continue;
            }
            let to = dual.dual_head(d);
            if !seen[to] {
                seen[to] = true;
                parent[to] = d;
                order.push(to);
            }
        }
    }
    debug_assert_eq!(order.len(), nf, "cotree must span the dual");
    (parent, order)
}
