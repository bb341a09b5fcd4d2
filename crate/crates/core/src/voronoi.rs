//! Weighted nearest-site regions over a plane graph, represented in the dual.
//!
//! Sites sit on the outer face and carry additive weights. The region of a
//! site is separated from its neighbours by bisector walks in the dual, and
//! every bisector passes through the outer face exactly once; that shared
//! anchor makes each two-site bisector a linear object and lets the diagram
//! be assembled one site at a time in boundary order.
//!
//! Distances are supplied by the caller, so the sides of a bisector may be
//! computed in a larger graph than the one whose dual carries the walk; the
//! walk then routes through the enclosed faces like through any other dual
//! vertex.

use std::collections::HashMap;

use crate::exact::ExactLength;
use crate::graph::{Dart, DualGraph, EmbeddedGraph, Vertex, NONE};
use crate::{Error, Result};

/// Order on (score, site slot) pairs. Exact score ties are broken by the
/// lower slot, which acts like an infinitesimal weight bump shared by every
/// comparison in a diagram; ties cannot be perturbed away in the lengths
/// because the competing walks may be the same walk.
pub(crate) fn closer(a: ExactLength, slot_a: usize, b: ExactLength, slot_b: usize) -> bool {
    a < b || (a == b && slot_a < slot_b)
}

/// Weighted owner of every vertex: the site minimizing weight + distance.
pub fn graphic_cells(dists: &[Vec<ExactLength>], weights: &[ExactLength]) -> Result<Vec<usize>> {
    let k = dists.len();
    assert!(k >= 1 && weights.len() == k);
    let n = dists[0].len();
    let mut owner = vec![usize::MAX; n];
    for x in 0..n {
        let mut best: Option<(ExactLength, usize)> = None;
        for s in 0..k {
            if !dists[s][x].is_finite() {
                continue;
            }
            let score = weights[s] + dists[s][x];
            let take = match best {
                None => true,
                Some((bv, bs)) => closer(score, s, bv, bs),
            };
            if take {
                best = Some((score, s));
            }
        }
        match best {
            Some((_, s)) => owner[x] = s,
            None => return Err(Error::BadParams(format!("vertex {x} unreachable from every site"))),
        }
    }
    Ok(owner)
}

/// True when every site owns at least one vertex.
pub fn independent_sites(owner: &[usize], k: usize) -> bool {
    let mut seen = vec![false; k];
    for &o in owner {
        seen[o] = true;
    }
    seen.iter().all(|&b| b)
}

/// One bisector: a closed non-crossing walk in the dual with the first
/// site's region on the right of every arc. Rotated so that the single pass
/// through the outer face falls between the last arc and `arcs[0]`.
#[derive(Clone, Debug)]
pub struct BisectorWalk {
    pub arcs: Vec<Dart>,
}

impl BisectorWalk {
    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Position along the outer face orbit where the walk leaves it.
    pub fn entry_rank(&self, dual: &DualGraph) -> usize {
        dual.pos_in_face[self.arcs[0]]
    }

    /// Position along the outer face orbit where the walk returns to it.
    pub fn exit_rank(&self, g: &EmbeddedGraph, dual: &DualGraph) -> usize {
        dual.pos_in_face[g.rev(*self.arcs.last().unwrap())]
    }
}

/// Stitches the cut darts of a vertex bipartition (tail inside `s_side`,
/// head outside) into the closed walk separating the two sides, starting
/// anywhere.
///
/// Inside each face an incoming arc is paired with the first cut dart
/// forward in the face orbit. Entries and exits alternate around every
/// orbit, so this pairing is the unique one that keeps the s side connected
/// on the right and the walk free of crossings.
fn trace_cut(g: &EmbeddedGraph, dual: &DualGraph, s_side: &[bool]) -> Result<Vec<Dart>> {
    let mut cut: Vec<Dart> = Vec::new();
    for d in 0..g.num_darts() {
        if s_side[g.tail(d)] && !s_side[g.head(d)] {
            cut.push(d);
        }
    }
    if cut.is_empty() {
        return Err(Error::InvalidWalk("bisector cut is empty; one side owns everything".into()));
    }
    let mut exits: HashMap<usize, Vec<(usize, Dart)>> = HashMap::new();
    for &d in &cut {
        exits.entry(dual.dual_tail(d)).or_default().push((dual.pos_in_face[d], d));
    }
    for list in exits.values_mut() {
        list.sort_unstable();
    }
    let start = cut[0];
    let mut seen = vec![false; g.num_darts()];
    let mut arcs = Vec::with_capacity(cut.len());
    let mut cur = start;
    loop {
        if seen[cur] {
            return Err(Error::CrossingWalk);
        }
        seen[cur] = true;
        arcs.push(cur);
        let f = dual.dual_head(cur);
        let list = exits
            .get(&f)
            .ok_or_else(|| Error::InvalidWalk(format!("face {f} is entered but never left")))?;
        let pos = dual.pos_in_face[g.rev(cur)];
        let i = list.partition_point(|&(p, _)| p <= pos);
        let next = if i == list.len() { list[0].1 } else { list[i].1 };
        if next == start {
            break;
        }
        cur = next;
    }
    if arcs.len() != cut.len() {
        return Err(Error::InvalidWalk("bisector cut is not a single closed walk".into()));
    }
    Ok(arcs)
}

/// Rotates a closed walk so that its single pass through the outer face
/// (arcs satisfying `leaves_outer`) falls between the last arc and
/// `arcs[0]`.
fn anchor_walk(mut arcs: Vec<Dart>, leaves_outer: impl Fn(Dart) -> bool) -> Result<BisectorWalk> {
    let hits: Vec<usize> = (0..arcs.len()).filter(|&i| leaves_outer(arcs[i])).collect();
    if hits.len() != 1 {
        return Err(Error::InvalidWalk(format!(
            "bisector crosses the outer face {} times, expected once",
            hits.len()
        )));
    }
    arcs.rotate_left(hits[0]);
    Ok(BisectorWalk { arcs })
}

/// The closed walk separating a vertex bipartition, anchored at the outer
/// face.
pub fn trace_bisector(g: &EmbeddedGraph, dual: &DualGraph, s_side: &[bool]) -> Result<BisectorWalk> {
    let arcs = trace_cut(g, dual, s_side)?;
    anchor_walk(arcs, |d| dual.dual_tail(d) == dual.outer)
}

/// Every bisector between one ordered pair of sites, across all values of
/// the weight difference. `thresholds` holds the distinct values of
/// eta_x = dist_s[x] - dist_t[x]; `walks[i]` separates the s side
/// {x : eta_x <= thresholds[i]} from the rest. A query difference
/// w = weight_t - weight_s puts x on the s side when eta_x <= w if s wins
/// score ties (s < t), and when eta_x < w otherwise.
pub struct BisectorFamily {
    pub s: usize,
    pub t: usize,
    pub thresholds: Vec<ExactLength>,
    pub walks: Vec<BisectorWalk>,
}

impl BisectorFamily {
    /// The bisector in force for weight difference `w`, with its index.
    /// Outside the threshold range one of the two cells is empty.
    pub fn walk_for(&self, w: ExactLength) -> Result<(usize, &BisectorWalk)> {
        let idx = if self.s < self.t {
            self.thresholds.partition_point(|&th| th <= w)
        } else {
            self.thresholds.partition_point(|&th| th < w)
        };
        if idx == 0 {
            return Err(Error::EmptyCell(self.s));
        }
        if idx == self.thresholds.len() {
            return Err(Error::EmptyCell(self.t));
        }
        Ok((idx - 1, &self.walks[idx - 1]))
    }
}

/// Builds the family for the ordered site pair (s, t) from per-vertex
/// distances. The s side grows one threshold at a time, so consecutive
/// walks are nested.
pub fn build_family(
    g: &EmbeddedGraph,
    dual: &DualGraph,
    s: usize,
    t: usize,
    dist_s: &[ExactLength],
    dist_t: &[ExactLength],
) -> Result<BisectorFamily> {
    let n = g.num_vertices();
    assert!(dist_s.len() == n && dist_t.len() == n);
    for x in 0..n {
        if !dist_s[x].is_finite() || !dist_t[x].is_finite() {
            return Err(Error::BadParams(format!("vertex {x} unreachable from site {s} or {t}")));
        }
    }
    let eta: Vec<ExactLength> = (0..n).map(|x| dist_s[x] - dist_t[x]).collect();
    let mut by_eta: Vec<Vertex> = (0..n).collect();
    by_eta.sort_by_key(|&x| eta[x]);
    let mut thresholds: Vec<ExactLength> = by_eta.iter().map(|&x| eta[x]).collect();
    thresholds.dedup();
    if thresholds.len() < 2 {
        return Err(Error::InvalidSitePair(s, t));
    }
    let mut s_side = vec![false; n];
    let mut walks = Vec::with_capacity(thresholds.len() - 1);
    let mut ptr = 0;
    for (i, &th) in thresholds.iter().enumerate() {
        while ptr < n && eta[by_eta[ptr]] == th {
            s_side[by_eta[ptr]] = true;
            ptr += 1;
        }
        if i + 1 < thresholds.len() {
            walks.push(trace_bisector(g, dual, &s_side)?);
        }
    }
    debug_assert_eq!(ptr, n);
    Ok(BisectorFamily { s, t, thresholds, walks })
}

/// The graph the distances are measured in: a supergraph of the piece from
/// which the run mask's material has already been dropped. A bisector is a
/// simple cycle in this graph's dual, so tracing it here and projecting
/// onto the piece settles how the walk threads the piece's enclosed faces,
/// which the piece alone cannot decide.
pub struct TraceHost<'a> {
    pub g: &'a EmbeddedGraph,
    pub dual: &'a DualGraph,
    /// Host dart to piece dart; `NONE` where the edge is not in the piece.
    pub dart_to_piece: &'a [usize],
    /// Host id of every piece vertex.
    pub piece_vertices: &'a [Vertex],
    /// Per site slot, distance to every host vertex.
    pub dists: &'a [Vec<ExactLength>],
}

/// Builds the family for the ordered site pair (s, t) by tracing in the
/// host. Every host vertex is a potential threshold: a flip inside an
/// enclosed face can reroute the walk there without moving any piece
/// vertex across it. Walks whose projection does not change are merged
/// into one interval, and the intervals where one side owns no piece
/// vertex at all are cut off, so lookups degenerate exactly as in the
/// piece-only construction.
pub fn build_family_in_host(
    piece_dual: &DualGraph,
    s: usize,
    t: usize,
    host: &TraceHost<'_>,
) -> Result<BisectorFamily> {
    let h = host.g.num_vertices();
    let (dist_s, dist_t) = (&host.dists[s], &host.dists[t]);
    assert!(dist_s.len() == h && dist_t.len() == h);
    for x in 0..h {
        if !dist_s[x].is_finite() || !dist_t[x].is_finite() {
            return Err(Error::BadParams(format!(
                "host vertex {x} unreachable from site {s} or {t}"
            )));
        }
    }
    let eta: Vec<ExactLength> = (0..h).map(|x| dist_s[x] - dist_t[x]).collect();
    let mut piece_eta: Vec<ExactLength> = host.piece_vertices.iter().map(|&x| eta[x]).collect();
    piece_eta.sort_unstable();
    let (lo, hi) = (piece_eta[0], *piece_eta.last().unwrap());
    if lo == hi {
        return Err(Error::InvalidSitePair(s, t));
    }
    let mut by_eta: Vec<Vertex> = (0..h).collect();
    by_eta.sort_by_key(|&x| eta[x]);
    let mut thresholds: Vec<ExactLength> = Vec::new();
    let mut walks: Vec<BisectorWalk> = Vec::new();
    let mut s_side = vec![false; h];
    let mut ptr = 0;
    while ptr < h {
        let th = eta[by_eta[ptr]];
        while ptr < h && eta[by_eta[ptr]] == th {
            s_side[by_eta[ptr]] = true;
            ptr += 1;
        }
        if th < lo {
            // below every piece vertex: the s cell is still empty
            continue;
        }
        if th >= hi {
            // from here up the t cell is empty
            break;
        }
        let cyc = trace_cut(host.g, host.dual, &s_side)?;
        let arcs: Vec<Dart> = cyc
            .iter()
            .filter_map(|&d| match host.dart_to_piece[d] {
                NONE => None,
                dp => Some(dp),
            })
            .collect();
        if arcs.is_empty() {
            return Err(Error::InvalidWalk("bisector never touches the piece".into()));
        }
        let w = anchor_walk(arcs, |d| piece_dual.dual_tail(d) == piece_dual.outer)?;
        if walks.last().map_or(true, |prev: &BisectorWalk| prev.arcs != w.arcs) {
            thresholds.push(th);
            walks.push(w);
        }
    }
    thresholds.push(hi);
    debug_assert_eq!(thresholds[0], lo);
    Ok(BisectorFamily { s, t, thresholds, walks })
}

/// Bisector families for every ordered pair of site slots.
pub struct FamilyTable {
    pub k: usize,
    fams: Vec<Option<BisectorFamily>>,
}

impl FamilyTable {
    pub fn build(g: &EmbeddedGraph, dual: &DualGraph, dists: &[Vec<ExactLength>]) -> Result<FamilyTable> {
        let k = dists.len();
        let mut fams = Vec::with_capacity(k * k);
        for s in 0..k {
            for t in 0..k {
                if s == t {
                    fams.push(None);
                } else {
                    fams.push(Some(build_family(g, dual, s, t, &dists[s], &dists[t])?));
                }
            }
        }
        Ok(FamilyTable { k, fams })
    }

    /// `build` with distances read from a trace host instead of the piece.
    pub fn build_in_host(piece_dual: &DualGraph, host: &TraceHost<'_>) -> Result<FamilyTable> {
        let k = host.dists.len();
        let mut fams = Vec::with_capacity(k * k);
        for s in 0..k {
            for t in 0..k {
                if s == t {
                    fams.push(None);
                } else {
                    fams.push(Some(build_family_in_host(piece_dual, s, t, host)?));
                }
            }
        }
        Ok(FamilyTable { k, fams })
    }

    pub fn family(&self, s: usize, t: usize) -> &BisectorFamily {
        self.fams[s * self.k + t].as_ref().expect("site slots must differ")
    }
}

/// A run of consecutive arcs on one stored bisector walk. The cell of slot
/// `s` lies on the right; `lo..=hi` index into the walk of family (s, t) at
/// `widx`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PortionRef {
    pub s: usize,
    pub t: usize,
    pub widx: usize,
    pub lo: usize,
    pub hi: usize,
}

/// One closed loop of a cell boundary: portions in cyclic order with the
/// region on the right. Consecutive portions join either at a shared vertex
/// or through the outer face (the earlier one returns to it, the later one
/// leaves it again). A region that reaches the outer face along several
/// separate stretches has one loop per stretch.
pub type BoundaryLoop = Vec<PortionRef>;

/// The diagram: per site slot, the loops bounding its region. A single-site
/// diagram has no loops at all.
pub struct Avd {
    pub cells: Vec<Vec<BoundaryLoop>>,
}

/// Arcs of one boundary portion.
pub fn portion_arcs<'a>(fams: &'a FamilyTable, pr: &PortionRef) -> &'a [Dart] {
    &fams.family(pr.s, pr.t).walks[pr.widx].arcs[pr.lo..=pr.hi]
}

/// Concatenates one boundary loop into a closed dual walk.
pub fn loop_arcs(fams: &FamilyTable, lp: &[PortionRef]) -> Vec<Dart> {
    let mut arcs = Vec::new();
    for pr in lp {
        arcs.extend_from_slice(portion_arcs(fams, pr));
    }
    arcs
}

/// How much of a bisector walk stays on the region boundary of its own two
/// sites once a third site competes. The surviving run is anchored at one
/// of the walk's outer-face ends; `Low` keeps arcs[0..=last], `High` keeps
/// arcs[first..].
#[derive(Clone, Copy, Debug)]
enum Survive {
    Full,
    Absent,
    Low { last: usize },
    High { first: usize },
}

/// Where the three-site diagram vertex sits on the walk: the gap index g
/// means between arcs g and g + 1.
fn vertex_gap(sv: &Survive) -> Option<usize> {
    match *sv {
        Survive::Low { last } => Some(last),
        Survive::High { first } => Some(first - 1),
        _ => None,
    }
}

/// Binary search for the surviving run of `walk` (site roles s, t) against
/// `third`. An arc survives when its tail is still closest to s and its
/// head still closest to t; the diagram of three sites has at most one
/// vertex, so the survivors form a single run anchored at an end.
fn surviving_portion(
    g: &EmbeddedGraph,
    walk: &BisectorWalk,
    s: usize,
    t: usize,
    third: usize,
    scores: &[Vec<ExactLength>],
) -> Survive {
    let pred = |i: usize| -> bool {
        let d = walk.arcs[i];
        let a = g.tail(d);
        let b = g.head(d);
        closer(scores[s][a], s, scores[third][a], third)
            && closer(scores[t][b], t, scores[third][b], third)
    };
    let k = walk.len();
    let first = pred(0);
    let last = pred(k - 1);
    match (first, last) {
        (true, true) => Survive::Full,
        (false, false) => Survive::Absent,
        (true, false) => {
            let mut lo = 0;
            let mut hi = k - 1;
            while lo + 1 < hi {
                let mid = (lo + hi) / 2;
                if pred(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Survive::Low { last: lo }
        }
        (false, true) => {
            let mut lo = 0;
            let mut hi = k - 1;
            while lo + 1 < hi {
                let mid = (lo + hi) / 2;
                if pred(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Survive::High { first: hi }
        }
    }
}

/// Cyclic test x in [a, b) along an orbit of length n.
fn in_gap(a: usize, b: usize, x: usize, n: usize) -> bool {
    let w = (b + n - a) % n;
    let d = (x + n - a) % n;
    d < w
}

/// How the chain stands when it enters a cell: out of the outer face at
/// orbit position `pos`, or across a portion of that cell's current
/// boundary, having come from the cell of `prev`.
#[derive(Clone, Copy, Debug)]
enum Entry {
    Seam { pos: usize },
    Edge { cyc: usize, idx: usize, prev: usize },
}

/// How it leaves: back into the outer face (the walk's own return), or
/// across the boundary portion recorded in the hit.
#[derive(Clone, Copy, Debug)]
enum Exit {
    Seam { pos: usize },
    Edge(ExitHit),
}

/// A crossing of the current cell's boundary found while marching: portion
/// `idx` of loop `cyc` leads to the cell of `x`; the chain's walk keeps arcs
/// up to `gap`, the crossed walk keeps arcs up to `gapb`.
#[derive(Clone, Copy, Debug)]
struct ExitHit {
    cyc: usize,
    idx: usize,
    x: usize,
    gap: usize,
    gapb: usize,
}

/// True when no part of `pr` stays on the diagram boundary once `u`
/// competes.
fn portion_dead(
    g: &EmbeddedGraph,
    fams: &FamilyTable,
    scores: &[Vec<ExactLength>],
    pr: &PortionRef,
    u: usize,
) -> bool {
    let w = &fams.family(pr.s, pr.t).walks[pr.widx];
    match surviving_portion(g, w, pr.s, pr.t, u, scores) {
        Survive::Absent => true,
        Survive::Low { last } => last < pr.lo,
        Survive::High { first } => first > pr.hi,
        Survive::Full => false,
    }
}

/// Index i such that the loop passes through the outer face between
/// `lp[i]` and its circular successor, covering orbit position `pos`. The
/// passage owns the positions from where lp[i] returns to the outer face
/// (inclusive: a seam landing exactly on that corner belongs to this
/// junction) through where the successor leaves it. None when no passage of
/// this loop covers `pos`.
fn passage_junction(
    g: &EmbeddedGraph,
    dual: &DualGraph,
    fams: &FamilyTable,
    lp: &[PortionRef],
    pos: usize,
) -> Option<usize> {
    let n = dual.faces[dual.outer].len();
    let m = lp.len();
    for i in 0..m {
        let last = *portion_arcs(fams, &lp[i]).last().unwrap();
        if dual.dual_head(last) != dual.outer {
            continue;
        }
        let from = dual.pos_in_face[g.rev(last)];
        let first = portion_arcs(fams, &lp[(i + 1) % m])[0];
        debug_assert_eq!(dual.dual_tail(first), dual.outer);
        let to = dual.pos_in_face[first];
        // to + 1 == from means the passage wraps the whole orbit
        let w = (to + 1 + n - from) % n;
        if w == 0 || in_gap(from, (to + 1) % n, pos, n) {
            return Some(i);
        }
    }
    None
}

/// Builds the diagram for sites on the outer face, inserting them in
/// boundary order. Cells of already placed sites are trimmed as the new
/// cell's boundary chain is walked from one of its outer-face seams to the
/// other.
pub fn build_avd(
    g: &EmbeddedGraph,
    dual: &DualGraph,
    fams: &FamilyTable,
    sites: &[Vertex],
    weights: &[ExactLength],
    dists: &[Vec<ExactLength>],
) -> Result<Avd> {
    let all: Vec<usize> = (0..sites.len()).collect();
    build_avd_within(g, dual, fams, sites, weights, dists, &all)
}

/// Diagram restricted to the site slots in `active`; the other slots keep
/// empty cells and their weights are never read. Slot numbering and walk
/// storage stay those of the full table, so portion references from
/// different subsets all resolve against the same families.
pub fn build_avd_within(
    g: &EmbeddedGraph,
    dual: &DualGraph,
    fams: &FamilyTable,
    sites: &[Vertex],
    weights: &[ExactLength],
    dists: &[Vec<ExactLength>],
    active: &[usize],
) -> Result<Avd> {
    let k = sites.len();
    if active.is_empty() || fams.k != k || weights.len() != k || dists.len() != k {
        return Err(Error::BadParams("sites, weights, distances and families must agree".into()));
    }
    let n = g.num_vertices();
    let mut scores: Vec<Vec<ExactLength>> = vec![Vec::new(); k];
    for &s in active {
        if s >= k || !scores[s].is_empty() {
            return Err(Error::BadParams(format!("bad active slot {s}")));
        }
        if !weights[s].is_finite() {
            return Err(Error::BadParams(format!("weight of site {s} is not finite")));
        }
        scores[s] = (0..n).map(|x| weights[s] + dists[s][x]).collect();
    }
    let orbit = &dual.faces[dual.outer];
    let mut rank_of: HashMap<Vertex, usize> = HashMap::new();
    for (i, &d) in orbit.iter().enumerate() {
        rank_of.entry(g.tail(d)).or_insert(i);
    }
    let mut ranks = vec![usize::MAX; k];
    for &s in active {
        ranks[s] = *rank_of.get(&sites[s]).ok_or(Error::XNotOnOuterFace(sites[s]))?;
    }
    let mut order: Vec<usize> = active.to_vec();
    order.sort_by_key(|&s| ranks[s]);
    for w in order.windows(2) {
        if ranks[w[0]] == ranks[w[1]] {
            return Err(Error::InvalidSitePair(w[0], w[1]));
        }
    }
    let mut cells: Vec<Vec<BoundaryLoop>> = vec![Vec::new(); k];
    if order.len() == 1 {
        return Ok(Avd { cells });
    }
    let mut placed: Vec<usize> = vec![order[0]];
    for &u in &order[1..] {
        insert_site(g, dual, fams, &scores, weights, &ranks, orbit, &placed, u, &mut cells)?;
        placed.push(u);
    }
    debug_assert!(order.iter().all(|&s| !cells[s].is_empty()));
    debug_assert!(cells.iter().all(|c| c.iter().all(|lp| !lp.is_empty())));
    Ok(Avd { cells })
}

#[allow(clippy::too_many_arguments)]
fn insert_site(
    g: &EmbeddedGraph,
    dual: &DualGraph,
    fams: &FamilyTable,
    scores: &[Vec<ExactLength>],
    weights: &[ExactLength],
    ranks: &[usize],
    orbit: &[Dart],
    placed: &[usize],
    u: usize,
    cells: &mut Vec<Vec<BoundaryLoop>>,
) -> Result<()> {
    if placed.len() == 1 {
        let p = placed[0];
        let (widx_up, w_up) = fams.family(u, p).walk_for(weights[p] - weights[u])?;
        let (widx_pu, w_pu) = fams.family(p, u).walk_for(weights[u] - weights[p])?;
        cells[u] = vec![vec![PortionRef { s: u, t: p, widx: widx_up, lo: 0, hi: w_up.len() - 1 }]];
        cells[p] = vec![vec![PortionRef { s: p, t: u, widx: widx_pu, lo: 0, hi: w_pu.len() - 1 }]];
        return Ok(());
    }
    let n = orbit.len();
    // Who controls each outer corner once u competes. Positions not won by
    // u keep their previous owner, so maximal u-runs tell exactly where the
    // new cell reaches the outer face and which cells flank it there.
    let mut owner = Vec::with_capacity(n);
    for &d in orbit {
        let v = g.tail(d);
        let mut best = None;
        for &s in placed.iter().chain(std::iter::once(&u)) {
            if !scores[s][v].is_finite() {
                continue;
            }
            match best {
                None => best = Some(s),
                Some(b) => {
                    if closer(scores[s][v], s, scores[b][v], b) {
                        best = Some(s);
                    }
                }
            }
        }
        let Some(b) = best else {
            return Err(Error::BadParams(format!(
                "outer vertex {v} is unreachable from every site"
            )));
        };
        owner.push(b);
    }
    // A site that loses its own vertex is beaten everywhere by the same
    // competitor, so its cell is empty and the diagram degenerates.
    for &s in placed.iter().chain(std::iter::once(&u)) {
        if owner[ranks[s]] != s {
            return Err(Error::EmptyCell(s));
        }
    }
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for a in 0..n {
        if owner[a] == u && owner[(a + n - 1) % n] != u {
            let mut b = a;
            while owner[(b + 1) % n] == u {
                b = (b + 1) % n;
            }
            runs.push((a, b));
        }
    }
    assert!(!runs.is_empty(), "new site controls no outer corner");

    // March one boundary chain per run, departing at the seam past the
    // run's high end. A chain ends at whichever seam its last walk reaches:
    // when the new cell wraps behind an enclosed pocket, the chain leaving
    // one run arrives at another run's low corner, and the run-to-run
    // pairing below links the chains into closed loops. Each placed cell
    // loses one connected piece, so no cell is visited twice.
    let mut arrival_run: HashMap<usize, usize> = runs
        .iter()
        .enumerate()
        .map(|(j, &(a, _))| ((a + n - 1) % n, j))
        .collect();
    let mut chains: Vec<Option<(Vec<PortionRef>, usize)>> = vec![None; runs.len()];
    let mut visited = vec![false; cells.len()];
    for (k, &(_, beta)) in runs.iter().enumerate() {
        let mut lp: Vec<PortionRef> = Vec::new();
        let mut cur = owner[(beta + 1) % n];
        let mut entry = Entry::Seam { pos: beta };
        let next_run = loop {
            assert!(!visited[cur], "insertion chain revisited a cell");
            visited[cur] = true;
            let (widx, walk) = fams.family(u, cur).walk_for(weights[cur] - weights[u])?;
            let from = match entry {
                Entry::Seam { pos } => {
                    debug_assert_eq!(walk.entry_rank(dual), pos);
                    0
                }
                Entry::Edge { prev, .. } => {
                    let sv = surviving_portion(g, walk, u, cur, prev, scores);
                    vertex_gap(&sv).expect("entry vertex must lie on the current bisector") + 1
                }
            };
            // First crossing of the current cell's boundary at or ahead of
            // the entry point.
            let mut best: Option<ExitHit> = None;
            for (cyc, loop_c) in cells[cur].iter().enumerate() {
                for (idx, beta_pr) in loop_c.iter().enumerate() {
                    if let Entry::Edge { cyc: ec, idx: ei, .. } = entry {
                        if cyc == ec && idx == ei {
                            continue;
                        }
                    }
                    let x = beta_pr.t;
                    let sv = surviving_portion(g, walk, u, cur, x, scores);
                    let gap = match vertex_gap(&sv) {
                        Some(gv) => gv,
                        None => continue,
                    };
                    if gap + 1 < from {
                        continue;
                    }
                    let wb = &fams.family(cur, x).walks[beta_pr.widx];
                    let svb = surviving_portion(g, wb, cur, x, u, scores);
                    if !matches!(svb, Survive::Low { .. }) {
                        continue;
                    }
                    let gapb = vertex_gap(&svb).unwrap();
                    if !(beta_pr.lo <= gapb && gapb <= beta_pr.hi) {
                        continue;
                    }
                    if best.as_ref().map_or(true, |b| gap < b.gap) {
                        best = Some(ExitHit { cyc, idx, x, gap, gapb });
                    }
                }
            }
            match best {
                None => {
                    let exit_pos = walk.exit_rank(g, dual);
                    let j = arrival_run
                        .remove(&exit_pos)
                        .expect("chain must close at a seam of the new cell");
                    lp.push(PortionRef { s: u, t: cur, widx, lo: from, hi: walk.len() - 1 });
                    trim_cell(g, dual, fams, scores, weights, &owner, cells, cur, u, entry, Exit::Seam { pos: exit_pos })?;
                    break j;
                }
                Some(hit) => {
                    if hit.gap >= from {
                        lp.push(PortionRef { s: u, t: cur, widx, lo: from, hi: hit.gap });
                    }
                    let next = hit.x;
                    trim_cell(g, dual, fams, scores, weights, &owner, cells, cur, u, entry, Exit::Edge(hit))?;
                    let mut eref = None;
                    for (cyc, loop_n) in cells[next].iter().enumerate() {
                        for (idx, pr) in loop_n.iter().enumerate() {
                            if pr.t == cur {
                                assert!(eref.is_none(), "cells share at most one boundary edge");
                                eref = Some((cyc, idx));
                            }
                        }
                    }
                    let (ecyc, eidx) = eref.expect("crossed edge must appear on the far cell");
                    entry = Entry::Edge { cyc: ecyc, idx: eidx, prev: cur };
                    cur = next;
                }
            }
        };
        chains[k] = Some((lp, next_run));
    }

    // A chain arriving at run j's low corner continues along j's stretch of
    // the outer face and hands over to the chain departing at j's high
    // corner. Following that relation until it returns to the start stitches
    // the chains into the boundary loops of the new cell.
    let mut fresh_loops: Vec<BoundaryLoop> = Vec::new();
    let mut taken = vec![false; runs.len()];
    for k0 in 0..runs.len() {
        if taken[k0] {
            continue;
        }
        let mut lp: BoundaryLoop = Vec::new();
        let mut k = k0;
        loop {
            taken[k] = true;
            let (portions, next) = chains[k].take().expect("chain seams must link into disjoint loops");
            lp.extend(portions);
            k = next;
            if k == k0 {
                break;
            }
        }
        fresh_loops.push(lp);
    }
    cells[u] = fresh_loops;
    Ok(())
}

/// Open piece of a dissolved boundary loop. `head`/`tail` hold outer face
/// ranks where the piece departs and arrives; `None` marks the end spliced
/// directly to the mirror walk at an interior cut vertex.
struct SegChain {
    items: Vec<PortionRef>,
    head: Option<usize>,
    tail: Option<usize>,
}

#[derive(Clone, Copy, PartialEq)]
enum CutKind {
    Plain,
    Out,
    In,
}

/// Rebuilds the boundary of `c` after the new cell of `u` carved a piece
/// out of it. Portions of the old loops either survive whole, die whole, or
/// are one of the two the chain crossed, which get cut at the new diagram
/// vertices. The loops are broken at cuts and dead runs, the mirrored image
/// of the chain's walk through `c` is spliced between the cut fragments,
/// and the open pieces are relinked by following the cell's surviving
/// stretches of the outer face. This covers bites out of one loop as well
/// as chunks that wrap behind a pocket and merge several loops into one.
#[allow(clippy::too_many_arguments)]
fn trim_cell(
    g: &EmbeddedGraph,
    dual: &DualGraph,
    fams: &FamilyTable,
    scores: &[Vec<ExactLength>],
    weights: &[ExactLength],
    owner: &[usize],
    cells: &mut Vec<Vec<BoundaryLoop>>,
    c: usize,
    u: usize,
    entry: Entry,
    exit: Exit,
) -> Result<()> {
    let n = dual.faces[dual.outer].len();
    let (widx_m, wm) = fams.family(c, u).walk_for(weights[u] - weights[c])?;
    let m_lo = match exit {
        Exit::Edge(hit) => {
            let sv = surviving_portion(g, wm, c, u, hit.x, scores);
            debug_assert!(matches!(sv, Survive::High { .. }), "exit cut must keep the walk's later part");
            vertex_gap(&sv).expect("exit vertex must lie on the mirror walk") + 1
        }
        Exit::Seam { pos } => {
            debug_assert_eq!(wm.entry_rank(dual), pos);
            0
        }
    };
    let m_hi = match entry {
        Entry::Edge { prev, .. } => {
            let sv = surviving_portion(g, wm, c, u, prev, scores);
            debug_assert!(matches!(sv, Survive::Low { .. }), "entry cut must keep the walk's earlier part");
            vertex_gap(&sv).expect("entry vertex must lie on the mirror walk")
        }
        Entry::Seam { pos } => {
            debug_assert_eq!(wm.exit_rank(g, dual), pos);
            wm.len() - 1
        }
    };
    assert!(m_lo <= m_hi + 1, "mirror portion must run exit to entry");
    let mirror = (m_lo <= m_hi).then_some(PortionRef { s: c, t: u, widx: widx_m, lo: m_lo, hi: m_hi });

    // Locate the cuts before dissolving anything. An edge cut keeps the
    // fragment of the crossed portion away from the new cell; a seam cut
    // splits an outer passage of whichever loop owns that stretch.
    let exit_cut: Option<(usize, usize, PortionRef)> = match exit {
        Exit::Edge(hit) => Some((hit.cyc, hit.idx, PortionRef { hi: hit.gapb, ..cells[c][hit.cyc][hit.idx] })),
        Exit::Seam { .. } => None,
    };
    let entry_cut: Option<(usize, usize, PortionRef)> = match entry {
        Entry::Edge { cyc, idx, prev } => {
            let beta = cells[c][cyc][idx];
            debug_assert_eq!(beta.t, prev);
            let wb = &fams.family(c, prev).walks[beta.widx];
            let sv = surviving_portion(g, wb, c, prev, u, scores);
            let first = match sv {
                Survive::High { first } => first,
                other => panic!("entry edge must keep its later part, got {other:?}"),
            };
            assert!(beta.lo <= first && first <= beta.hi, "entry vertex must cut inside the portion");
            Some((cyc, idx, PortionRef { lo: first, ..beta }))
        }
        Entry::Seam { .. } => None,
    };
    let probe_seam = |loops: &[BoundaryLoop], pos: usize| -> (usize, usize) {
        let cyc = (0..loops.len())
            .find(|&cy| passage_junction(g, dual, fams, &loops[cy], pos).is_some())
            .unwrap_or_else(|| panic!("seam cut at {pos} lands on no passage of cell {c}"));
        (cyc, passage_junction(g, dual, fams, &loops[cyc], pos).unwrap())
    };
    let exit_seam: Option<(usize, usize)> = match exit {
        Exit::Seam { pos } => Some(probe_seam(&cells[c], pos)),
        Exit::Edge(_) => None,
    };
    let entry_seam: Option<(usize, usize)> = match entry {
        Entry::Seam { pos } => Some(probe_seam(&cells[c], pos)),
        Entry::Edge { .. } => None,
    };

    // Dissolve the touched loops into maximal alive runs. Dead runs always
    // end at outer passages, never at interior apexes, so every open piece
    // departs and arrives on the outer face except at the two cuts.
    let mut fresh: Vec<BoundaryLoop> = Vec::new();
    let mut chains: Vec<SegChain> = Vec::new();
    let old = std::mem::take(&mut cells[c]);
    for (cyc, lp) in old.into_iter().enumerate() {
        let m = lp.len();
        let mut kind = vec![CutKind::Plain; m];
        let mut frag = lp.clone();
        if let Some((ec, ei, f)) = exit_cut {
            if ec == cyc {
                kind[ei] = CutKind::Out;
                frag[ei] = f;
            }
        }
        if let Some((ec, ei, f)) = entry_cut {
            if ec == cyc {
                assert!(kind[ei] == CutKind::Plain, "chain cannot leave through its entry portion");
                kind[ei] = CutKind::In;
                frag[ei] = f;
            }
        }
        let dead: Vec<bool> = (0..m)
            .map(|i| {
                if kind[i] != CutKind::Plain {
                    return false;
                }
                let d = portion_dead(g, fams, scores, &lp[i], u);
                #[cfg(debug_assertions)]
                if !d {
                    let wb = &fams.family(lp[i].s, lp[i].t).walks[lp[i].widx];
                    let sv = surviving_portion(g, wb, lp[i].s, lp[i].t, u, scores);
                    let whole = match sv {
                        Survive::Full => true,
                        Survive::Low { last } => last >= lp[i].hi,
                        Survive::High { first } => first <= lp[i].lo,
                        Survive::Absent => false,
                    };
                    debug_assert!(whole, "uncut portion must live or die whole: {:?} {sv:?}", lp[i]);
                }
                d
            })
            .collect();
        let seam_here = |s: &Option<(usize, usize)>, i: usize| matches!(s, Some((sc, sj)) if *sc == cyc && *sj == i);
        let brk: Vec<bool> = (0..m)
            .map(|i| {
                let ni = (i + 1) % m;
                dead[i]
                    || dead[ni]
                    || kind[i] == CutKind::Out
                    || kind[ni] == CutKind::In
                    || seam_here(&exit_seam, i)
                    || seam_here(&entry_seam, i)
            })
            .collect();
        if !brk.iter().any(|&b| b) {
            cells[c].push(lp);
            continue;
        }
        for s in 0..m {
            if dead[s] || !brk[(s + m - 1) % m] {
                continue;
            }
            let mut items = Vec::new();
            let mut e = s;
            loop {
                items.push(frag[e]);
                if brk[e] {
                    break;
                }
                e = (e + 1) % m;
            }
            let head = (kind[s] != CutKind::In).then(|| dual.pos_in_face[portion_arcs(fams, &items[0])[0]]);
            let tail = (kind[e] != CutKind::Out).then(|| {
                let arcs = portion_arcs(fams, items.last().unwrap());
                dual.pos_in_face[g.rev(*arcs.last().unwrap())]
            });
            chains.push(SegChain { items, head, tail });
        }
    }

    // Splice the mirror between the two cut ends. When both cuts sit on one
    // surviving run the loop closes right here; a seam-side mirror end
    // instead links through the outer face like any other piece.
    match (exit, entry) {
        (Exit::Edge(_), Entry::Edge { .. }) => {
            let ti = chains.iter().position(|ch| ch.tail.is_none()).expect("exit fragment must end a piece");
            let hi = chains.iter().position(|ch| ch.head.is_none()).expect("entry fragment must start a piece");
            if ti == hi {
                let ch = chains.swap_remove(ti);
                let mut lp = ch.items;
                lp.extend(mirror);
                fresh.push(lp);
            } else {
                let (ta, ha) = (ti.max(hi), ti.min(hi));
                let ch_a = chains.swap_remove(ta);
                let ch_b = chains.swap_remove(ha);
                let (mut t, h) = if ti > hi { (ch_a, ch_b) } else { (ch_b, ch_a) };
                t.items.extend(mirror);
                t.items.extend(h.items);
                chains.push(SegChain { items: t.items, head: t.head, tail: h.tail });
            }
        }
        (Exit::Edge(_), Entry::Seam { pos }) => {
            let ti = chains.iter().position(|ch| ch.tail.is_none()).expect("exit fragment must end a piece");
            let mut t = chains.swap_remove(ti);
            t.items.push(mirror.expect("seam-side cut keeps the walk's outer end"));
            t.tail = Some(pos);
            chains.push(t);
        }
        (Exit::Seam { pos }, Entry::Edge { .. }) => {
            let hi = chains.iter().position(|ch| ch.head.is_none()).expect("entry fragment must start a piece");
            let h = chains.swap_remove(hi);
            let mut items = vec![mirror.expect("seam-side cut keeps the walk's outer end")];
            items.extend(h.items);
            chains.push(SegChain { items, head: Some(pos), tail: h.tail });
        }
        (Exit::Seam { pos: e1 }, Entry::Seam { pos: e0 }) => {
            let items = vec![mirror.expect("seam to seam cut keeps the whole mirror walk")];
            chains.push(SegChain { items, head: Some(e1), tail: Some(e0) });
        }
    }

    // Relink: after a piece arrives, the boundary runs along the cell's
    // stretch of the outer face and the next piece departs at its far end.
    let mut by_dep: HashMap<usize, usize> = HashMap::new();
    for (i, ch) in chains.iter().enumerate() {
        let d = ch.head.expect("every unspliced piece departs the outer face");
        assert!(by_dep.insert(d, i).is_none(), "two boundary pieces depart one corner");
    }
    let mut used = vec![false; chains.len()];
    for k0 in 0..chains.len() {
        if used[k0] {
            continue;
        }
        let mut lp: BoundaryLoop = Vec::new();
        let mut k = k0;
        loop {
            used[k] = true;
            lp.extend(chains[k].items.iter().copied());
            let a = chains[k].tail.expect("every unspliced piece arrives on the outer face");
            debug_assert_eq!(owner[(a + 1) % n], c, "piece must arrive beside the cell's own stretch");
            let mut r = (a + 1) % n;
            while owner[(r + 1) % n] == c {
                r = (r + 1) % n;
            }
            let next = *by_dep
                .get(&r)
                .unwrap_or_else(|| panic!("no boundary piece of cell {c} departs corner {r}"));
            if next == k0 {
                break;
            }
            k = next;
            assert!(!used[k], "boundary pieces must link into disjoint loops");
        }
        fresh.push(lp);
    }
    cells[c].extend(fresh);
    Ok(())
}
#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::graph::{is_non_crossing, walk_right_side, DualWalk};
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn checked_walk(g: &EmbeddedGraph, dual: &DualGraph, arcs: Vec<Dart>) -> DualWalk {
        let dw = DualWalk::new(arcs);
        dw.validate(g, dual).unwrap();
        assert!(is_non_crossing(g, dual, &dw).unwrap());
        dw
    }

    #[test]
    fn trace_splits_grid_columns() {
        let g = generate::grid(3, 3);
        let dual = DualGraph::new(&g);
        let s_side: Vec<bool> = (0..9).map(|v| v % 3 == 0).collect();
        let walk = trace_bisector(&g, &dual, &s_side).unwrap();
        assert_eq!(dual.dual_tail(walk.arcs[0]), dual.outer);
        assert_eq!(dual.dual_head(*walk.arcs.last().unwrap()), dual.outer);
        let dw = checked_walk(&g, &dual, walk.arcs.clone());
        assert_eq!(walk_right_side(&g, &dual, &dw).unwrap(), s_side);
    }

    #[test]
    fn trace_single_vertex_side() {
        let g = generate::k4();
        let dual = DualGraph::new(&g);
        let s_side = vec![true, false, false, false];
        let walk = trace_bisector(&g, &dual, &s_side).unwrap();
        assert_eq!(walk.len(), g.degree(0));
        let dw = checked_walk(&g, &dual, walk.arcs.clone());
        assert_eq!(walk_right_side(&g, &dual, &dw).unwrap(), s_side);
    }

    #[test]
    fn family_walks_are_nested() {
        let g = generate::grid(4, 3);
        let dual = DualGraph::new(&g);
        let all = oracle::apsp(&g).unwrap();
        let fam = build_family(&g, &dual, 0, 1, &all[0], &all[11]).unwrap();
        assert_eq!(fam.walks.len(), fam.thresholds.len() - 1);
        let mut prev_count = 0usize;
        let mut prev_side: Vec<bool> = vec![false; 12];
        for walk in &fam.walks {
            let dw = checked_walk(&g, &dual, walk.arcs.clone());
            let side = walk_right_side(&g, &dual, &dw).unwrap();
            let count = side.iter().filter(|&&b| b).count();
            assert!(count > prev_count, "s side must grow with the weight difference");
            for v in 0..12 {
                assert!(!prev_side[v] || side[v], "s sides must be nested");
            }
            prev_count = count;
            prev_side = side;
        }
    }

    #[test]
    fn family_lookup_hits_thresholds_and_ends() {
        let g = generate::grid(3, 3);
        let dual = DualGraph::new(&g);
        let all = oracle::apsp(&g).unwrap();
        let fam = build_family(&g, &dual, 0, 1, &all[0], &all[8]).unwrap();
        let lowest = fam.thresholds[0];
        let highest = *fam.thresholds.last().unwrap();
        let kk = fam.thresholds.len();
        assert!(matches!(
            fam.walk_for(ExactLength::new(lowest.base - 1, 0)),
            Err(Error::EmptyCell(0))
        ));
        assert!(matches!(
            fam.walk_for(ExactLength::new(highest.base + 1, 0)),
            Err(Error::EmptyCell(1))
        ));
        // slot 0 wins exact ties, so at a threshold the s side has already
        // absorbed that class; the reversed pair flips the boundary
        assert!(matches!(fam.walk_for(lowest), Ok((0, _))));
        assert!(matches!(fam.walk_for(highest), Err(Error::EmptyCell(1))));
        let rfam = build_family(&g, &dual, 1, 0, &all[8], &all[0]).unwrap();
        assert!(matches!(rfam.walk_for(rfam.thresholds[0]), Err(Error::EmptyCell(1))));
        let rk = rfam.thresholds.len();
        let (ridx, _) = rfam.walk_for(*rfam.thresholds.last().unwrap()).unwrap();
        assert_eq!(ridx, rk - 2);
        for i in 0..fam.walks.len() {
            let w = ExactLength::new(fam.thresholds[i].base, fam.thresholds[i].eps + 1);
            assert!(w < fam.thresholds[i + 1]);
            let (idx, _) = fam.walk_for(w).unwrap();
            assert_eq!(idx, i);
        }
        assert_eq!(kk - 1, fam.walks.len());
    }

    #[test]
    fn surviving_portion_matches_full_scan() {
        let mut g = generate::with_random_lengths(&generate::grid_parts(4, 4), 11, 1, 9, 0.0).unwrap();
        g.perturb(5).unwrap();
        let dual = DualGraph::new(&g);
        let all = oracle::apsp(&g).unwrap();
        let sites = [0usize, 3, 15, 12];
        let dists: Vec<Vec<ExactLength>> = sites.iter().map(|&s| all[s].clone()).collect();
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let mut tested = 0;
        for trial in 0..40 {
            let apex = rng.gen_range(0..16);
            let weights: Vec<ExactLength> = sites.iter().map(|&s| all[apex][s]).collect();
            let scores: Vec<Vec<ExactLength>> = (0..4)
                .map(|i| (0..16).map(|x| weights[i] + dists[i][x]).collect())
                .collect();
            let s = trial % 4;
            let t = (trial + 1) % 4;
            let third = (trial + 2) % 4;
            let fam = build_family(&g, &dual, s, t, &dists[s], &dists[t]).unwrap();
            let w = weights[t] - weights[s];
            let walk = match fam.walk_for(w) {
                Ok((_, walk)) => walk,
                Err(_) => continue,
            };
            let sv = surviving_portion(&g, walk, s, t, third, &scores);
            let flags: Vec<bool> = (0..walk.len())
                .map(|i| {
                    let d = walk.arcs[i];
                    closer(scores[s][g.tail(d)], s, scores[third][g.tail(d)], third)
                        && closer(scores[t][g.head(d)], t, scores[third][g.head(d)], third)
                })
                .collect();
            let expect = {
                let k = flags.len();
                match (flags[0], flags[k - 1]) {
                    (true, true) => Survive::Full,
                    (false, false) => Survive::Absent,
                    (true, false) => Survive::Low { last: flags.iter().rposition(|&b| b).unwrap() },
                    (false, true) => Survive::High { first: flags.iter().position(|&b| b).unwrap() },
                }
            };
            // anchored runs only
            let transitions = flags.windows(2).filter(|w| w[0] != w[1]).count();
            assert!(transitions <= 1, "survivors must form one anchored run");
            match (sv, expect) {
                (Survive::Full, Survive::Full) | (Survive::Absent, Survive::Absent) => {}
                (Survive::Low { last: a }, Survive::Low { last: b }) => assert_eq!(a, b),
                (Survive::High { first: a }, Survive::High { first: b }) => assert_eq!(a, b),
                (got, want) => panic!("classification mismatch: got {got:?}, want {want:?}"),
            }
            tested += 1;
        }
        assert!(tested >= 20, "too few usable trials: {tested}");
    }

    /// Builds the diagram and checks every cell against the weighted owner
    /// assignment, or checks that both sides agree the input is degenerate.
    fn check_avd(
        g: &EmbeddedGraph,
        dual: &DualGraph,
        fams: &FamilyTable,
        sites: &[Vertex],
        weights: &[ExactLength],
        dists: &[Vec<ExactLength>],
    ) -> Result<()> {
        let owners = graphic_cells(dists, weights)?;
        let independent = independent_sites(&owners, sites.len());
        match build_avd(g, dual, fams, sites, weights, dists) {
            Err(Error::EmptyCell(_)) => {
                assert!(!independent, "diagram reported an empty cell on independent input");
                Ok(())
            }
            Err(e) => Err(e),
            Ok(avd) => {
                assert!(independent, "diagram built despite an empty owner set");
                for slot in 0..sites.len() {
                    // the region is what every loop keeps on its right
                    assert!(!avd.cells[slot].is_empty(), "cell of slot {slot} has no boundary");
                    let mut region = vec![true; g.num_vertices()];
                    for lp in &avd.cells[slot] {
                        let arcs = loop_arcs(fams, lp);
                        let dw = checked_walk(g, dual, arcs);
                        let side = walk_right_side(g, dual, &dw).unwrap();
                        for x in 0..g.num_vertices() {
                            region[x] &= side[x];
                        }
                    }
                    for x in 0..g.num_vertices() {
                        assert_eq!(
                            region[x],
                            owners[x] == slot,
                            "cell of slot {slot} disagrees with owners at vertex {x}"
                        );
                    }
                }
                Ok(())
            }
        }
    }

    #[test]
    fn avd_matches_owners_on_grid() {
        let mut g = generate::with_random_lengths(&generate::grid_parts(4, 4), 21, 1, 9, 0.0).unwrap();
        g.perturb(7).unwrap();
        let dual = DualGraph::new(&g);
        let all = oracle::apsp(&g).unwrap();
        let sites = [0usize, 3, 15, 12];
        let dists: Vec<Vec<ExactLength>> = sites.iter().map(|&s| all[s].clone()).collect();
        let fams = FamilyTable::build(&g, &dual, &dists).unwrap();
        // weights from every apex satisfy the proximity shape by the
        // triangle inequality, so every diagram must build and match
        for apex in 0..16 {
            let weights: Vec<ExactLength> = sites.iter().map(|&s| all[apex][s]).collect();
            check_avd(&g, &dual, &fams, &sites, &weights, &dists).unwrap();
        }
    }

    #[test]
    fn avd_matches_owners_on_wide_grid_many_sites() {
        let mut g = generate::with_random_lengths(&generate::grid_parts(6, 3), 33, 1, 9, 0.0).unwrap();
        g.perturb(13).unwrap();
        let dual = DualGraph::new(&g);
        let all = oracle::apsp(&g).unwrap();
        let sites = [0usize, 2, 5, 11, 17, 15, 12, 6];
        let dists: Vec<Vec<ExactLength>> = sites.iter().map(|&s| all[s].clone()).collect();
        let fams = FamilyTable::build(&g, &dual, &dists).unwrap();
        for apex in 0..18 {
            let weights: Vec<ExactLength> = sites.iter().map(|&s| all[apex][s]).collect();
            check_avd(&g, &dual, &fams, &sites, &weights, &dists).unwrap();
        }
    }

    #[test]
    fn avd_random_weights_agree_with_owners() {
        let mut g = generate::with_random_lengths(&generate::grid_parts(5, 4), 55, 1, 9, 0.0).unwrap();
        g.perturb(17).unwrap();
        let dual = DualGraph::new(&g);
        let all = oracle::apsp(&g).unwrap();
        let sites = [0usize, 4, 19, 15];
        let dists: Vec<Vec<ExactLength>> = sites.iter().map(|&s| all[s].clone()).collect();
        let fams = FamilyTable::build(&g, &dual, &dists).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(123);
        for _ in 0..60 {
            let weights: Vec<ExactLength> = (0..4)
                .map(|_| ExactLength::new(rng.gen_range(0..6), rng.gen_range(0..1 << 20)))
                .collect();
            check_avd(&g, &dual, &fams, &sites, &weights, &dists).unwrap();
        }
    }

    #[test]
    fn avd_random_sites_and_weights_stress() {
        let shapes = [(5usize, 4usize, 111u64, 5u64), (6, 3, 222, 7), (4, 4, 333, 11), (7, 3, 444, 13)];
        let mut rng = ChaCha12Rng::seed_from_u64(999);
        for &(w, h, seed, pseed) in &shapes {
            let mut g = generate::with_random_lengths(&generate::grid_parts(w, h), seed, 1, 9, 0.1).unwrap();
            g.perturb(pseed).unwrap();
            let dual = DualGraph::new(&g);
            let all = oracle::apsp(&g).unwrap();
            let mut boundary: Vec<Vertex> = Vec::new();
            for &d in &dual.faces[dual.outer] {
                let v = g.tail(d);
                if !boundary.contains(&v) {
                    boundary.push(v);
                }
            }
            for _ in 0..40 {
                let k = rng.gen_range(2..=boundary.len().min(9));
                let mut pool = boundary.clone();
                let mut sites = Vec::new();
                for _ in 0..k {
                    let i = rng.gen_range(0..pool.len());
                    sites.push(pool.swap_remove(i));
                }
                let dists: Vec<Vec<ExactLength>> = sites.iter().map(|&s| all[s].clone()).collect();
                let fams = FamilyTable::build(&g, &dual, &dists).unwrap();
                let weights: Vec<ExactLength> = (0..k)
                    .map(|_| ExactLength::new(rng.gen_range(0..6), rng.gen_range(0..1 << 20)))
                    .collect();
                check_avd(&g, &dual, &fams, &sites, &weights, &dists).unwrap();
            }
        }
    }

    #[test]
    fn avd_routes_through_missing_interior() {
        // distances live in the full grid, walks in a subgraph whose deleted
        // interior vertex leaves a large inner face
        let mut full = generate::with_random_lengths(&generate::grid_parts(4, 4), 77, 1, 9, 0.0).unwrap();
        full.perturb(19).unwrap();
        let keep: Vec<usize> = (0..full.num_edges())
            .filter(|&e| full.tail(2 * e) != 5 && full.head(2 * e) != 5)
            .collect();
        let (sub, map) = full.subgraph(&keep).unwrap();
        let dual = DualGraph::new(&sub);
        let full_all = oracle::apsp(&full).unwrap();
        let sub_all = oracle::apsp(&sub).unwrap();
        let sites_parent = [0usize, 3, 15, 12];
        let sites: Vec<Vertex> = sites_parent.iter().map(|&v| map.v_to_sub[v]).collect();
        // per-site distances stay inside the subgraph; only the additive
        // weights look at the full grid, like a query from a removed region
        let dists: Vec<Vec<ExactLength>> = sites.iter().map(|&s| sub_all[s].clone()).collect();
        let fams = FamilyTable::build(&sub, &dual, &dists).unwrap();
        for apex in 0..16 {
            if apex == 5 {
                continue;
            }
            let weights: Vec<ExactLength> = sites_parent.iter().map(|&s| full_all[apex][s]).collect();
            check_avd(&sub, &dual, &fams, &sites, &weights, &dists).unwrap();
        }
    }

    #[test]
    fn single_and_two_site_diagrams() {
        let mut g = generate::with_random_lengths(&generate::grid_parts(3, 3), 88, 1, 9, 0.0).unwrap();
        g.perturb(23).unwrap();
        let dual = DualGraph::new(&g);
        let all = oracle::apsp(&g).unwrap();
        let one = vec![all[4].clone()];
        let fams1 = FamilyTable::build(&g, &dual, &one).unwrap();
        let avd1 = build_avd(&g, &dual, &fams1, &[4], &[ExactLength::ZERO], &one);
        // a site not on the outer face is rejected even when alone
        assert!(matches!(avd1, Err(Error::XNotOnOuterFace(4))));
        let one = vec![all[0].clone()];
        let fams1 = FamilyTable::build(&g, &dual, &one).unwrap();
        let avd1 = build_avd(&g, &dual, &fams1, &[0], &[ExactLength::ZERO], &one).unwrap();
        assert!(avd1.cells[0].is_empty());

        let sites = [0usize, 8];
        let dists: Vec<Vec<ExactLength>> = sites.iter().map(|&s| all[s].clone()).collect();
        let fams = FamilyTable::build(&g, &dual, &dists).unwrap();
        for apex in 0..9 {
            let weights: Vec<ExactLength> = sites.iter().map(|&s| all[apex][s]).collect();
            check_avd(&g, &dual, &fams, &sites, &weights, &dists).unwrap();
        }
    }
}
