//! Per-piece aggregation engine: weighted nearest-site decomposition of a
//! piece from sites on its outer face, answering sum / max / count queries
//! over a fixed set of counted vertices.
//!
//! Preprocessing fixes the piece, the sites and the counted set. A query
//! supplies additive weights for a subset of the sites and aggregates
//! u -> min_y (weight_y + d(y, u)) over the counted set, where d is
//! measured in the host graph the piece was cut from (minus whatever the
//! run mask removes). Each query builds the weighted Voronoi diagram of
//! the active sites and evaluates every cell through structures indexed by
//! the stored bisector walks, so query time scales with the boundary
//! complexity of the diagram rather than with the piece size.

use crate::aggregate::{
    chi_weights, region_sum, CountStructure, Portion, PrefixFamily, StarTreeMax, WalkFamily,
};
use crate::exact::{ExactLength, WideLength};
use crate::graph::{Dart, DualGraph, EdgeSpec, EmbeddedGraph, SubMap, Vertex, NONE};
use crate::paths::{ArcView, Dijkstra, RunMask};
use crate::voronoi::{build_avd_within, Avd, BoundaryLoop, FamilyTable, TraceHost};
use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Flavor {
    Sum,
    Max,
    Count,
}

/// One query: active site slots and one finite weight per listed slot.
pub struct PieceQuery<'a> {
    pub y: &'a [usize],
    pub lambda: &'a [ExactLength],
}

pub struct PieceEngine {
    g: EmbeddedGraph,
    dual: DualGraph,
    flavor: Flavor,
    /// Site vertices in piece ids, slot order.
    sites: Vec<Vertex>,
    /// Per slot, host distance from the site to every piece vertex.
    dists: Vec<Vec<ExactLength>>,
    fams: FamilyTable,
    /// Per slot, first index of family (slot, t) in the walk numbering the
    /// prefix structures were built over.
    offs: Vec<Vec<usize>>,
    u_size: i64,
    sum_w: Vec<PrefixFamily<WideLength>>,
    sum_w_total: Vec<WideLength>,
    sum_c: Vec<PrefixFamily<i64>>,
    counts: Vec<CountStructure>,
    maxes: Vec<StarTreeMax>,
    /// Per slot, maximum site-to-vertex distance over the counted set.
    max_total: Vec<ExactLength>,
}

/// Breadth-first spanning tree over the undirected piece: dart entering
/// each vertex from its parent, and vertices in root-first order.
fn bfs_tree(g: &EmbeddedGraph, root: Vertex) -> (Vec<Dart>, Vec<Vertex>) {
    let n = g.num_vertices();
    let mut parent = vec![NONE; n];
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    seen[root] = true;
    order.push(root);
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for d in g.out_darts(v) {
            let w = g.head(d);
            if !seen[w] {
                seen[w] = true;
                parent[w] = d;
                order.push(w);
            }
        }
    }
    assert_eq!(order.len(), n, "piece must be connected");
    (parent, order)
}

impl PieceEngine {
    /// Builds the engine. `host` is the graph distances live in and `view`
    /// its from-source arc view; `mask` restricts every distance run (pass
    /// the default when the host itself is the metric). The piece's
    /// current outer face must carry every site; `sites` and `counted`
    /// are host vertex ids, `map` the piece-to-host correspondence.
    pub fn preprocess(
        host: &EmbeddedGraph,
        view: &ArcView,
        mask: RunMask<'_>,
        piece: &EmbeddedGraph,
        map: &SubMap,
        sites: &[Vertex],
        counted: &[Vertex],
        flavor: Flavor,
    ) -> Result<PieceEngine> {
        let np = piece.num_vertices();
        let k = sites.len();
        if k == 0 {
            return Err(Error::BadParams("no sites".into()));
        }
        let dual = DualGraph::new(piece);
        let mut site_sub = Vec::with_capacity(k);
        for &x in sites {
            let sv = map.v_to_sub.get(x).copied().unwrap_or(NONE);
            if sv == NONE {
                return Err(Error::RootOutsidePiece(x));
            }
            site_sub.push(sv);
        }
        // first outer-orbit rank per vertex, to fail fast on bad site sets
        let orbit = &dual.faces[dual.outer];
        let mut rank = vec![NONE; np];
        for (i, &d) in orbit.iter().enumerate() {
            let v = piece.tail(d);
            if rank[v] == NONE {
                rank[v] = i;
            }
        }
        let mut seen_rank = std::collections::HashMap::new();
        for (s, &sv) in site_sub.iter().enumerate() {
            if rank[sv] == NONE {
                return Err(Error::XNotOnOuterFace(sites[s]));
            }
            if let Some(&prev) = seen_rank.get(&rank[sv]) {
                return Err(Error::InvalidSitePair(prev, s));
            }
            seen_rank.insert(rank[sv], s);
        }
        let mut u_flag = vec![false; np];
        for &u in counted {
            let su = map.v_to_sub.get(u).copied().unwrap_or(NONE);
            if su == NONE {
                return Err(Error::BadParams(format!("counted vertex {u} outside the piece")));
            }
            u_flag[su] = true;
        }
        let u_size = u_flag.iter().filter(|&&b| b).count() as i64;

        // Host material that survives the mask: the graph the distances are
        // actually measured in. Bisectors are traced there, so every piece
        // edge must survive.
        let banned_v = |v: Vertex| mask.banned_vertex.map_or(false, |b| b[v]);
        let trav = |d: Dart| {
            !mask.banned_dart.map_or(false, |b| b[d])
                && (mask.use_structural || !host.is_structural(d))
        };
        let mut keep = Vec::new();
        for e in 0..host.num_edges() {
            let (u, v) = (host.tail(2 * e), host.head(2 * e));
            if !banned_v(u) && !banned_v(v) && (trav(2 * e) || trav(2 * e + 1)) {
                keep.push(e);
            }
        }
        let (th, th_map) = host.subgraph(&keep)?;
        let th_dual = DualGraph::new(&th);
        let mut dart_to_piece = vec![NONE; th.num_darts()];
        for dp in 0..piece.num_darts() {
            let td = th_map.dart_to_sub[map.dart_to_parent[dp]];
            assert!(td != NONE, "piece edge does not survive the mask");
            dart_to_piece[td] = dp;
        }
        let piece_in_th: Vec<Vertex> = (0..np)
            .map(|su| {
                let tv = th_map.v_to_sub[map.v_to_parent[su]];
                assert!(tv != NONE, "piece vertex does not survive the mask");
                tv
            })
            .collect();

        // One distance run per site; the max flavor also projects the run's
        // tree onto the piece while the run is still live.
        let mut dij = Dijkstra::new(host.num_vertices());
        let mut dists: Vec<Vec<ExactLength>> = Vec::with_capacity(k);
        let mut th_rows: Vec<Vec<ExactLength>> = Vec::with_capacity(k);
        let mut maxes: Vec<StarTreeMax> = Vec::new();
        for s in 0..k {
            let px = sites[s];
            dij.run(view, px, mask);
            let mut trow = Vec::with_capacity(th.num_vertices());
            for tv in 0..th.num_vertices() {
                let hv = th_map.v_to_parent[tv];
                match dij.dist(view, hv) {
                    Some(d) => trow.push(d),
                    None => {
                        return Err(Error::BadParams(format!(
                            "vertex {hv} unreachable from site {px} under the mask"
                        )))
                    }
                }
            }
            let row: Vec<ExactLength> = piece_in_th.iter().map(|&tv| trow[tv]).collect();
            if flavor == Flavor::Max {
                maxes.push(build_star_max(host, piece, map, &dij, px, &row, &u_flag)?);
            }
            dists.push(row);
            th_rows.push(trow);
        }

        let tracer = TraceHost {
            g: &th,
            dual: &th_dual,
            dart_to_piece: &dart_to_piece,
            piece_vertices: &piece_in_th,
            dists: &th_rows,
        };
        let fams = FamilyTable::build_in_host(&dual, &tracer)?;
        let mut pi: Vec<WalkFamily> = Vec::with_capacity(k);
        let mut offs: Vec<Vec<usize>> = Vec::with_capacity(k);
        for s in 0..k {
            let mut fam = WalkFamily::default();
            let mut off = vec![usize::MAX; k];
            for t in 0..k {
                if t == s {
                    continue;
                }
                off[t] = fam.walks.len();
                for w in &fams.family(s, t).walks {
                    fam.walks.push(w.arcs.clone());
                }
            }
            pi.push(fam);
            offs.push(off);
        }

        let mut sum_w = Vec::new();
        let mut sum_w_total = Vec::new();
        let mut sum_c = Vec::new();
        let mut counts = Vec::new();
        let mut max_total = Vec::new();
        for s in 0..k {
            match flavor {
                Flavor::Sum => {
                    let (parent, order) = bfs_tree(piece, site_sub[s]);
                    let w: Vec<WideLength> = (0..np)
                        .map(|v| if u_flag[v] { dists[s][v].into() } else { WideLength::ZERO })
                        .collect();
                    let chi = chi_weights(piece, &parent, &order, &w);
                    sum_w.push(PrefixFamily::build(&pi[s], |d| chi[d]));
                    let mut tot = WideLength::ZERO;
                    for v in 0..np {
                        tot += w[v];
                    }
                    sum_w_total.push(tot);
                    let c: Vec<i64> = (0..np).map(|v| u_flag[v] as i64).collect();
                    let chi_c = chi_weights(piece, &parent, &order, &c);
                    sum_c.push(PrefixFamily::build(&pi[s], |d| chi_c[d]));
                }
                Flavor::Count => {
                    let (parent, order) = bfs_tree(piece, site_sub[s]);
                    let value: Vec<Option<i64>> = (0..np)
                        .map(|v| if u_flag[v] { Some(dists[s][v].base) } else { None })
                        .collect();
                    counts.push(CountStructure::build(piece, &parent, &order, &pi[s], &value));
                }
                Flavor::Max => {
                    let mut best = ExactLength::NEG_INF;
                    for v in 0..np {
                        if u_flag[v] {
                            best = best.max(dists[s][v]);
                        }
                    }
                    max_total.push(best);
                }
            }
        }

        Ok(PieceEngine {
            g: piece.clone(),
            dual,
            flavor,
            sites: site_sub,
            dists,
            fams,
            offs,
            u_size,
            sum_w,
            sum_w_total,
            sum_c,
            counts,
            maxes,
            max_total,
        })
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    /// Sum of the weighted nearest-site distances over the counted set.
    pub fn query_sum(&self, q: &PieceQuery<'_>) -> Result<WideLength> {
        if self.flavor != Flavor::Sum {
            return Err(Error::BadParams("engine was not built for sum queries".into()));
        }
        let (weights, mut active) = self.check(q)?;
        let avd = self.diagram(&weights, &mut active)?;
        let mut acc = WideLength::ZERO;
        for &s in &active {
            let portions = self.flat_portions(&avd.cells[s]);
            let cnt = region_sum(&self.sum_c[s], &portions, self.u_size);
            let w = region_sum(&self.sum_w[s], &portions, self.sum_w_total[s]);
            acc += WideLength::scaled(weights[s], cnt) + w;
        }
        Ok(acc)
    }

    /// Maximum weighted nearest-site distance over the counted set, or
    /// `NEG_INF` when the counted set is empty.
    pub fn query_max(&self, q: &PieceQuery<'_>) -> Result<ExactLength> {
        if self.flavor != Flavor::Max {
            return Err(Error::BadParams("engine was not built for max queries".into()));
        }
        let (weights, mut active) = self.check(q)?;
        let avd = self.diagram(&weights, &mut active)?;
        let mut best = ExactLength::NEG_INF;
        for &s in &active {
            let mu = if avd.cells[s].is_empty() {
                self.max_total[s]
            } else {
                let mut best = ExactLength::NEG_INF;
                for tour in self.max_tours(&avd.cells[s]) {
                    for j in 0..tour.len() {
                        let next = tour[(j + 1) % tour.len()];
                        best = best.max(self.maxes[s].pair_score(tour[j], next));
                    }
                }
                best
            };
            if mu != ExactLength::NEG_INF {
                best = best.max(weights[s] + mu);
            }
        }
        Ok(best)
    }

    /// How many counted vertices have weighted nearest-site distance with
    /// integer part at most `delta`.
    pub fn query_count(&self, q: &PieceQuery<'_>, delta: i64) -> Result<i64> {
        if self.flavor != Flavor::Count {
            return Err(Error::BadParams("engine was not built for count queries".into()));
        }
        let (weights, mut active) = self.check(q)?;
        let avd = self.diagram(&weights, &mut active)?;
        let mut acc = 0i64;
        for &s in &active {
            let portions = self.flat_portions(&avd.cells[s]);
            let d = delta.checked_sub(weights[s].base).expect("count threshold overflow");
            acc += self.counts[s].region_count(&portions, d);
        }
        Ok(acc)
    }

    fn check(&self, q: &PieceQuery<'_>) -> Result<(Vec<ExactLength>, Vec<usize>)> {
        let k = self.sites.len();
        if q.y.is_empty() || q.y.len() != q.lambda.len() {
            return Err(Error::BadParams("query slots and weights must match".into()));
        }
        let mut weights = vec![ExactLength::INF; k];
        for (i, &s) in q.y.iter().enumerate() {
            if s >= k {
                return Err(Error::BadParams(format!("site slot {s} out of range")));
            }
            if !q.lambda[i].is_finite() {
                return Err(Error::BadParams(format!("weight of slot {s} is not finite")));
            }
            if weights[s] != ExactLength::INF {
                return Err(Error::BadParams(format!("site slot {s} listed twice")));
            }
            weights[s] = q.lambda[i];
        }
        #[cfg(debug_assertions)]
        for &a in q.y {
            for &b in q.y {
                if a != b && weights[a] >= weights[b] + self.dists[b][self.sites[a]] {
                    return Err(Error::ConditionViolated(format!(
                        "weight of slot {a} is not beaten by routing through slot {b}"
                    )));
                }
            }
        }
        Ok((weights, q.y.to_vec()))
    }

    /// Voronoi diagram of the active sites. A site whose region comes out
    /// empty is dominated by the others and contributes nothing, so it is
    /// dropped and the construction retried.
    fn diagram(&self, weights: &[ExactLength], active: &mut Vec<usize>) -> Result<Avd> {
        loop {
            match build_avd_within(
                &self.g,
                &self.dual,
                &self.fams,
                &self.sites,
                weights,
                &self.dists,
                active,
            ) {
                Ok(avd) => return Ok(avd),
                Err(Error::EmptyCell(s)) => {
                    let pos = active
                        .iter()
                        .position(|&a| a == s)
                        .expect("empty cell must name an active slot");
                    active.remove(pos);
                    if active.is_empty() {
                        return Err(Error::BadParams("every site degenerated".into()));
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }

    fn flat(&self, pr: &crate::voronoi::PortionRef) -> Portion {
        Portion { walk: self.offs[pr.s][pr.t] + pr.widx, lo: pr.lo, hi: pr.hi }
    }

    /// All portions of a cell in storage order; sums and counts telescope
    /// over the boundary loops independently of their order.
    fn flat_portions(&self, cell: &[BoundaryLoop]) -> Vec<Portion> {
        cell.iter().flat_map(|lp| lp.iter().map(|pr| self.flat(pr))).collect()
    }

    /// Cell boundary arcs re-chained into closed tours: at every face each
    /// arriving arc continues with the first cell arc forward in the face
    /// orbit. The stored loops pair arrivals the way the walks happened to
    /// be traced; inside an enclosed face that pairing shifts with the
    /// weights, and only the orbit-order pairing keeps every swept fan on
    /// the cell's side, so the tours are rebuilt from scratch per query.
    fn max_tours(&self, cell: &[BoundaryLoop]) -> Vec<Vec<Dart>> {
        let mut arcs: Vec<Dart> = Vec::new();
        for lp in cell {
            for pr in lp {
                arcs.extend_from_slice(crate::voronoi::portion_arcs(&self.fams, pr));
            }
        }
        let mut exits: std::collections::HashMap<usize, Vec<(usize, Dart)>> =
            std::collections::HashMap::new();
        for &d in &arcs {
            exits.entry(self.dual.dual_tail(d)).or_default().push((self.dual.pos_in_face[d], d));
        }
        for list in exits.values_mut() {
            list.sort_unstable();
        }
        let idx: std::collections::HashMap<Dart, usize> =
            arcs.iter().enumerate().map(|(i, &d)| (d, i)).collect();
        debug_assert_eq!(idx.len(), arcs.len(), "cell boundary repeats an arc");
        let mut used = vec![false; arcs.len()];
        let mut tours = Vec::new();
        for start in 0..arcs.len() {
            if used[start] {
                continue;
            }
            let mut tour = Vec::new();
            let mut d = arcs[start];
            loop {
                let i = idx[&d];
                if used[i] {
                    break;
                }
                used[i] = true;
                tour.push(d);
                let f = self.dual.dual_head(d);
                let list = &exits[&f];
                let pos = self.dual.pos_in_face[self.g.rev(d)];
                let i = list.partition_point(|&(p, _)| p <= pos);
                d = if i == list.len() { list[0].1 } else { list[i].1 };
            }
            tours.push(tour);
        }
        tours
    }
}

/// Maximum structure for one site: the piece is augmented with the site's
/// shortest path tree so that every diagram region is star shaped with
/// respect to it.
///
/// A tree path that leaves the piece and comes back carries no counted
/// vertices, so it is collapsed: each piece vertex whose parent arc leaves
/// the piece gets one synthetic edge to its nearest piece ancestor, drawn
/// along the path. The augmented graph keeps the piece's vertices and dart
/// ids, synthetic darts start at `2 * mp`, and subfaces of one piece face
/// are separated by synthetic edges alone, which makes their adjacency a
/// tree and pair scores across them independent of the route taken.
fn build_star_max(
    host: &EmbeddedGraph,
    piece: &EmbeddedGraph,
    map: &SubMap,
    dij: &Dijkstra,
    site_host: Vertex,
    row: &[ExactLength],
    u_flag: &[bool],
) -> Result<StarTreeMax> {
    let mp = piece.num_edges();
    let np = piece.num_vertices();
    let mut to_piece = vec![NONE; host.num_darts()];
    for dp in 0..2 * mp {
        to_piece[map.dart_to_parent[dp]] = dp;
    }
    let mut edges: Vec<EdgeSpec> = (0..mp)
        .map(|e| EdgeSpec { u: piece.tail(2 * e), v: piece.head(2 * e), len_uv: 0, len_vu: 0 })
        .collect();
    let mut synth = vec![NONE; np];
    for su in 0..np {
        let hv = map.v_to_parent[su];
        if hv == site_host {
            continue;
        }
        let pd = dij.parent_dart(hv);
        assert!(pd != NONE, "piece vertex outside the shortest path tree");
        if to_piece[pd] != NONE {
            continue;
        }
        let mut anc = host.tail(pd);
        let mut asu = map.v_to_sub[anc];
        while asu == NONE {
            let d = dij.parent_dart(anc);
            assert!(d != NONE, "tree path ended outside the piece");
            anc = host.tail(d);
            asu = map.v_to_sub[anc];
        }
        synth[su] = edges.len();
        edges.push(EdgeSpec { u: asu, v: su, len_uv: 0, len_vu: 0 });
    }

    // which subtrees reach the piece at all, to keep the splice walks short
    let mut has_p = vec![false; host.num_vertices()];
    for &v32 in dij.settle_order().iter().rev() {
        let v = v32 as usize;
        if map.v_to_sub[v] != NONE {
            has_p[v] = true;
        }
        if has_p[v] {
            let d = dij.parent_dart(v);
            if d != NONE {
                has_p[host.tail(d)] = true;
            }
        }
    }

    // Rotations: walk the host rotation of each piece vertex. A tree arc
    // into an excursion subtree contributes the synthetic darts of the
    // piece vertices hanging below it, ordered as contracting the subtree
    // edge by edge would splice them in.
    let mut rot: Vec<Vec<Dart>> = Vec::with_capacity(np);
    for su in 0..np {
        let hv = map.v_to_parent[su];
        let up = if hv == site_host { NONE } else { dij.parent_dart(hv) };
        let mut list = Vec::new();
        for hd in host.out_darts(hv) {
            if to_piece[hd] != NONE {
                list.push(to_piece[hd]);
            } else if up != NONE && hd == host.rev(up) {
                debug_assert!(synth[su] != NONE);
                list.push(2 * synth[su] + 1);
            } else {
                emit_subtree(host, map, dij, &has_p, &synth, hd, &mut list);
            }
        }
        rot.push(list);
    }
    let aug = EmbeddedGraph::build(np, &edges, &rot, Some(piece.outer_dart()))?;
    let dual_aug = DualGraph::new(&aug);

    let mut parent = vec![NONE; np];
    for su in 0..np {
        let hv = map.v_to_parent[su];
        if hv == site_host {
            continue;
        }
        let pd = dij.parent_dart(hv);
        parent[su] = if to_piece[pd] != NONE { to_piece[pd] } else { 2 * synth[su] };
    }
    let mut order = Vec::with_capacity(np);
    for &v32 in dij.settle_order() {
        let sv = map.v_to_sub[v32 as usize];
        if sv != NONE {
            order.push(sv);
        }
    }
    assert_eq!(order.len(), np, "piece vertex missing from the settle order");
    let mut omega = vec![ExactLength::NEG_INF; np];
    for su in 0..np {
        if u_flag[su] {
            omega[su] = row[su];
        }
    }
    Ok(StarTreeMax::build(&aug, &dual_aug, &parent, &order, dual_aug.outer, &omega, 2 * mp))
}

/// Emits, in contraction order, the synthetic darts of the piece vertices
/// whose tree paths run through the excursion arc `start`. The stack holds
/// one rotation scan per expanded excursion vertex: (stop, next position).
fn emit_subtree(
    host: &EmbeddedGraph,
    map: &SubMap,
    dij: &Dijkstra,
    has_p: &[bool],
    synth: &[usize],
    start: Dart,
    out: &mut Vec<Dart>,
) {
    let child_arc = |d: Dart| {
        let ch = host.head(d);
        dij.parent_dart(ch) == d && has_p[ch]
    };
    if !child_arc(start) {
        return;
    }
    let mut stack: Vec<(Dart, Dart)> = Vec::new();
    let mut pending = Some(start);
    loop {
        let hd = if let Some(d) = pending.take() {
            d
        } else if let Some(top) = stack.last_mut() {
            if top.1 == top.0 {
                stack.pop();
                continue;
            }
            let d = top.1;
            top.1 = host.rot_next(d);
            if !child_arc(d) {
                continue;
            }
            d
        } else {
            break;
        };
        let sv = map.v_to_sub[host.head(hd)];
        if sv != NONE {
            debug_assert!(synth[sv] != NONE, "re-entry vertex keeps its piece parent");
            out.push(2 * synth[sv]);
        } else {
            let back = host.rev(hd);
            stack.push((back, host.rot_next(back)));
        }
    }
}
