//! Randomized equivalence of the piece engine against direct evaluation.
//! Reference distances come from label correction over the masked host
//! arcs; reference aggregates scan the counted set one vertex at a time.

use plandist::exact::{ExactLength, WideLength};
use plandist::generate;
use plandist::graph::{DualGraph, EmbeddedGraph, SubMap, Vertex, NONE};
use plandist::paths::{potential, ArcView, Direction, RunMask};
use plandist::piece::{Flavor, PieceEngine, PieceQuery};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Bellman-Ford from `s` skipping banned material, independent of the
/// solver's shortest path machinery.
fn masked_row(
    g: &EmbeddedGraph,
    s: Vertex,
    banned_v: Option<&[bool]>,
    banned_d: Option<&[bool]>,
    use_structural: bool,
) -> Vec<ExactLength> {
    let n = g.num_vertices();
    let mut dist = vec![ExactLength::INF; n];
    if banned_v.map_or(false, |b| b[s]) {
        return dist;
    }
    dist[s] = ExactLength::ZERO;
    loop {
        let mut changed = false;
        for d in 0..g.num_darts() {
            if !use_structural && g.is_structural(d) {
                continue;
            }
            if banned_d.map_or(false, |b| b[d]) {
                continue;
            }
            let (u, v) = (g.tail(d), g.head(d));
            if banned_v.map_or(false, |b| b[u] || b[v]) {
                continue;
            }
            if dist[u] == ExactLength::INF {
                continue;
            }
            let cand = dist[u] + g.len(d);
            if cand < dist[v] {
                dist[v] = cand;
                changed = true;
            }
        }
        if !changed {
            return dist;
        }
    }
}

struct Setup {
    host: EmbeddedGraph,
    piece: EmbeddedGraph,
    map: SubMap,
    banned_v: Option<Vec<bool>>,
    banned_d: Option<Vec<bool>>,
    x_pool: Vec<Vertex>,
    apex_pool: Vec<Vertex>,
}

/// The host itself as the piece: sites live on the host's outer face.
fn identity_setup(host: EmbeddedGraph) -> Setup {
    let edges: Vec<usize> = (0..host.num_edges()).collect();
    let (piece, map) = host.subgraph(&edges).unwrap();
    let dual = DualGraph::new(&host);
    let mut x_pool = Vec::new();
    let mut seen = vec![false; host.num_vertices()];
    for &d in &dual.faces[dual.outer] {
        let v = host.tail(d);
        if !seen[v] {
            seen[v] = true;
            x_pool.push(v);
        }
    }
    let apex_pool = (0..host.num_vertices()).collect();
    Setup { host, piece, map, banned_v: None, banned_d: None, x_pool, apex_pool }
}

/// Vertex rectangle (x0, y0, x1, y1), inclusive, in a `gw`-wide grid.
type Rect = (usize, usize, usize, usize);

fn in_rect(v: Vertex, gw: usize, r: &Rect) -> bool {
    let (x, y) = (v % gw, v / gw);
    x >= r.0 && x <= r.2 && y >= r.1 && y <= r.3
}

fn in_interior(v: Vertex, gw: usize, r: &Rect) -> bool {
    let (x, y) = (v % gw, v / gw);
    x > r.0 && x < r.2 && y > r.1 && y < r.3
}

/// True for edges drawn strictly inside the rectangle: anything touching
/// an interior vertex, plus diagonals between rim vertices.
fn removed_edge(host: &EmbeddedGraph, e: usize, gw: usize, r: &Rect) -> bool {
    let (u, v) = (host.tail(2 * e), host.head(2 * e));
    if !(in_rect(u, gw, r) && in_rect(v, gw, r)) {
        return false;
    }
    if in_interior(u, gw, r) || in_interior(v, gw, r) {
        return true;
    }
    u % gw != v % gw && u / gw != v / gw
}

/// Cuts the listed rectangles out of a grid-shaped host. The first one is
/// the queried hole: the piece is re-rooted at it and its material banned
/// from the metric. Later rectangles stay reachable, so site-to-piece
/// paths may detour through them.
fn holed_setup(host: EmbeddedGraph, gw: usize, blocks: &[Rect]) -> Setup {
    let edges: Vec<usize> = (0..host.num_edges())
        .filter(|&e| blocks.iter().all(|b| !removed_edge(&host, e, gw, b)))
        .collect();
    let (mut piece, map) = host.subgraph(&edges).unwrap();
    let b0 = &blocks[0];
    let mut banned_v = vec![false; host.num_vertices()];
    for (v, bv) in banned_v.iter_mut().enumerate() {
        *bv = in_interior(v, gw, b0);
    }
    let mut banned_d = vec![false; host.num_darts()];
    for e in 0..host.num_edges() {
        if removed_edge(&host, e, gw, b0) {
            banned_d[2 * e] = true;
            banned_d[2 * e + 1] = true;
        }
    }
    let dual_p = DualGraph::new(&piece);
    let mut hole = NONE;
    for f in 0..dual_p.num_faces() {
        if f == dual_p.outer || dual_p.faces[f].len() <= 4 {
            continue;
        }
        let on_rim = dual_p.faces[f].iter().all(|&d| {
            let pv = map.v_to_parent[piece.tail(d)];
            in_rect(pv, gw, b0) && !in_interior(pv, gw, b0)
        });
        if on_rim {
            hole = f;
            break;
        }
    }
    assert!(hole != NONE, "hole face not found");
    let mut x_pool = Vec::new();
    let mut seen = vec![false; piece.num_vertices()];
    for &d in &dual_p.faces[hole] {
        let v = piece.tail(d);
        if !seen[v] {
            seen[v] = true;
            x_pool.push(map.v_to_parent[v]);
        }
    }
    piece.set_outer_dart(dual_p.faces[hole][0]);
    let apex_pool: Vec<Vertex> =
        (0..host.num_vertices()).filter(|&v| in_interior(v, gw, b0)).collect();
    Setup {
        host,
        piece,
        map,
        banned_v: Some(banned_v),
        banned_d: Some(banned_d),
        x_pool,
        apex_pool,
    }
}

fn run_trial(seed: u64, setup: &Setup, use_structural: bool) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let host = &setup.host;
    let bv = setup.banned_v.as_deref();
    let bd = setup.banned_d.as_deref();

    let k = rng.gen_range(2..=setup.x_pool.len().min(6));
    let mut pool = setup.x_pool.clone();
    let mut xs = Vec::with_capacity(k);
    for _ in 0..k {
        let i = rng.gen_range(0..pool.len());
        xs.push(pool.swap_remove(i));
    }

    let style = rng.gen_range(0..10);
    let counted: Vec<Vertex> = setup
        .map
        .v_to_parent
        .iter()
        .copied()
        .filter(|_| match style {
            0 => false,
            1 | 2 => true,
            _ => rng.gen_bool(0.66),
        })
        .collect();

    let rows: Vec<Vec<ExactLength>> =
        xs.iter().map(|&x| masked_row(host, x, bv, bd, use_structural)).collect();

    let apex = setup.apex_pool[rng.gen_range(0..setup.apex_pool.len())];
    let apex_row = masked_row(host, apex, None, None, use_structural);
    let mut lam: Vec<ExactLength> = xs.iter().map(|&x| apex_row[x]).collect();
    for l in &mut lam {
        assert!(l.is_finite());
        if rng.gen_bool(0.3) {
            *l = *l + ExactLength::new(rng.gen_range(0..3), 0);
        }
    }

    // drop dominated sites until the strict routing condition holds
    let mut active: Vec<usize> = (0..k).collect();
    loop {
        let mut drop = None;
        'scan: for &a in &active {
            for &b in &active {
                if a != b && lam[a] >= lam[b] + rows[b][xs[a]] {
                    drop = Some(a);
                    break 'scan;
                }
            }
        }
        match drop {
            Some(a) => {
                active.retain(|&s| s != a);
                assert!(!active.is_empty(), "domination emptied the site set");
            }
            None => break,
        }
    }

    let fvals: Vec<ExactLength> = counted
        .iter()
        .map(|&u| {
            active
                .iter()
                .map(|&s| lam[s] + rows[s][u])
                .fold(ExactLength::INF, ExactLength::min)
        })
        .collect();
    let want_sum = fvals.iter().fold(WideLength::ZERO, |a, &v| a + WideLength::from(v));
    let want_max = fvals.iter().copied().fold(ExactLength::NEG_INF, ExactLength::max);

    let pot = potential(host).unwrap();
    let view = ArcView::of_graph(host, &pot, Direction::FromSource);
    let mask = RunMask { banned_vertex: bv, banned_dart: bd, use_structural };
    let lams: Vec<ExactLength> = active.iter().map(|&s| lam[s]).collect();
    let q = PieceQuery { y: &active, lambda: &lams };

    let eng = PieceEngine::preprocess(
        host,
        &view,
        mask,
        &setup.piece,
        &setup.map,
        &xs,
        &counted,
        Flavor::Sum,
    )
    .unwrap();
    assert_eq!(eng.query_sum(&q).unwrap(), want_sum, "sum mismatch, seed {seed}");

    let eng = PieceEngine::preprocess(
        host,
        &view,
        mask,
        &setup.piece,
        &setup.map,
        &xs,
        &counted,
        Flavor::Max,
    )
    .unwrap();
    assert_eq!(eng.query_max(&q).unwrap(), want_max, "max mismatch, seed {seed}");

    let eng = PieceEngine::preprocess(
        host,
        &view,
        mask,
        &setup.piece,
        &setup.map,
        &xs,
        &counted,
        Flavor::Count,
    )
    .unwrap();
    let mut bases: Vec<i64> = fvals.iter().map(|v| v.base).collect();
    bases.sort_unstable();
    let deltas = if bases.is_empty() {
        vec![0, 5]
    } else {
        vec![bases[bases.len() / 2], bases[0] - 1, bases[bases.len() - 1], bases[bases.len() - 1] + 1]
    };
    for delta in deltas {
        let want = bases.iter().filter(|&&b| b <= delta).count() as i64;
        assert_eq!(
            eng.query_count(&q, delta).unwrap(),
            want,
            "count mismatch, seed {seed} delta {delta}"
        );
    }
}

#[test]
fn whole_graphs_match_reference() {
    let dims = [(4, 4), (5, 4), (6, 5), (7, 6), (8, 8), (3, 3)];
    for trial in 0..60u64 {
        let (w, h) = dims[trial as usize % dims.len()];
        let parts = generate::grid_parts(w, h);
        let mut host = if trial % 3 == 0 {
            generate::with_random_lengths(&parts, trial * 7 + 1, 5, 9, 0.06).unwrap()
        } else {
            generate::with_random_lengths(&parts, trial * 7 + 1, 1, 9, 0.0).unwrap()
        };
        host.perturb(trial ^ 0x5e5e).unwrap();
        run_trial(trial, &identity_setup(host), false);
    }
}

#[test]
fn whole_triangulations_match_reference() {
    for trial in 0..30u64 {
        let parts = generate::triangulation_parts(20 + (trial as usize % 25), trial);
        let mut host = if trial % 4 == 0 {
            generate::with_random_lengths(&parts, trial * 5 + 3, 5, 9, 0.01).unwrap()
        } else {
            generate::with_random_lengths(&parts, trial * 5 + 3, 1, 9, 0.0).unwrap()
        };
        host.perturb(trial ^ 0xa1a1).unwrap();
        run_trial(1000 + trial, &identity_setup(host), false);
    }
}

#[test]
fn holed_grid_pieces_match_reference() {
    for trial in 0..50u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(9000 + trial);
        let parts = generate::grid_parts(12, 12);
        let mut host = if trial % 4 == 0 {
            generate::with_random_lengths(&parts, trial * 11 + 5, 5, 9, 0.01).unwrap()
        } else {
            generate::with_random_lengths(&parts, trial * 11 + 5, 1, 9, 0.0).unwrap()
        };
        host.perturb(trial ^ 0xbeef).unwrap();
        let bw = rng.gen_range(2..=3);
        let bh = rng.gen_range(2..=3);
        let x0 = rng.gen_range(1..=10 - bw);
        let y0 = rng.gen_range(1..=10 - bh);
        let setup = holed_setup(host, 12, &[(x0, y0, x0 + bw, y0 + bh)]);
        run_trial(2000 + trial, &setup, false);
    }
}

#[test]
fn chorded_hole_boundaries_match_reference() {
    // short real diagonals: banning the ones inside the hole changes the
    // metric, so the dart mask is load bearing here
    for trial in 0..40u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(17000 + trial);
        let parts = generate::grid_parts(12, 12);
        let base = generate::with_random_lengths(&parts, trial * 13 + 7, 1, 9, 0.0).unwrap();
        let (mut host, _) = base.triangulated(3);
        host.perturb(trial ^ 0xc0de).unwrap();
        let bw = rng.gen_range(2..=3);
        let bh = rng.gen_range(2..=3);
        let x0 = rng.gen_range(1..=10 - bw);
        let y0 = rng.gen_range(1..=10 - bh);
        let setup = holed_setup(host, 12, &[(x0, y0, x0 + bw, y0 + bh)]);
        run_trial(3000 + trial, &setup, true);
    }
}

#[test]
fn two_hole_pieces_detour_through_the_far_hole() {
    for trial in 0..60u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(31000 + trial);
        let parts = generate::grid_parts(12, 12);
        let mut host = if trial % 5 == 0 {
            generate::with_random_lengths(&parts, trial * 17 + 9, 5, 9, 0.01).unwrap()
        } else {
            generate::with_random_lengths(&parts, trial * 17 + 9, 1, 9, 0.0).unwrap()
        };
        host.perturb(trial ^ 0xd00d).unwrap();
        let y0 = rng.gen_range(1..=7);
        let x0 = rng.gen_range(1..=3);
        let near = (x0, y0, x0 + 2, y0 + 2);
        let yb = rng.gen_range(1..=6);
        let far = (7, yb, 10, yb + 3);
        let setup = holed_setup(host, 12, &[near, far]);
        run_trial(4000 + trial, &setup, false);
    }
}
