//! Brute-force generation and independent checking: exhaustive small-graph
//! enumeration with isomorphism deduplication, all-orders confluence
//! checking, permutation-based isomorphism (no canonical encoding), and an
//! independent triangulated-complex computation of arc gluings.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{
    DecompositionGraph, Edge, EndRef, ExceptionalFibre, GraphError, GraphKind, IBundleBlock,
    Piece, SeifertBlock, SimpleBlock, SimpleFlag, SiteKind,
};
use crate::ids::{EdgeId, PieceId, SiteId};
use crate::isocanon;
use crate::rewrite;
use crate::surface::{Arc, ArcRef, BaseSurface, BoundaryCircle};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationBounds {
    pub max_pieces: usize,
    pub max_exceptional_fibres: usize,
    pub max_alpha: i64,
    pub max_genus: u32,
    pub max_circles: usize,
    pub max_arcs_per_circle: usize,
}

impl Default for EnumerationBounds {
    fn default() -> Self {
        Self {
            max_pieces: 3,
            max_exceptional_fibres: 1,
            max_alpha: 3,
            max_genus: 1,
            max_circles: 2,
            max_arcs_per_circle: 2,
        }
    }
}

/// Exceptional fibres with alpha up to the bound, beta in the bounded-base
/// normal range.
fn fibre_choices(max_alpha: i64) -> Vec<ExceptionalFibre> {
    let mut out = Vec::new();
    for alpha in 2..=max_alpha {
        for beta in 1..alpha {
            if num_integer::gcd(alpha, beta) == 1 {
                out.push(ExceptionalFibre::new(alpha, beta));
            }
        }
    }
    out
}

fn multisets<T: Clone>(items: &[T], size: usize) -> Vec<Vec<T>> {
    fn rec<T: Clone>(items: &[T], size: usize, from: usize, acc: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if acc.len() == size {
            out.push(acc.clone());
            return;
        }
        for i in from..items.len() {
            acc.push(items[i].clone());
            rec(items, size, i, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, size, 0, &mut Vec::new(), &mut out);
    out
}

/// Single fibred and I-bundle blocks within bounds, for block-level sweeps.
/// Sites are numbered within each piece.
pub fn enumerate_single_blocks(max_alpha: i64, max_fibres: usize) -> Vec<Piece> {
    let mut out = Vec::new();
    let patterns: Vec<Vec<BoundaryCircle>> = vec![
        vec![BoundaryCircle::whole_d0()],
        vec![BoundaryCircle::d0_annulus("a1")],
        vec![BoundaryCircle::of(vec![
            Arc::AnnulusEnd("a1".into()),
            Arc::AnnulusEnd("a2".into()),
        ])],
        vec![BoundaryCircle::torus("t1")],
    ];
    let bases: Vec<BaseSurface> = patterns
        .iter()
        .flat_map(|c| {
            vec![
                BaseSurface::new(true, 0, c.clone()),
                BaseSurface::new(true, 1, c.clone()),
                BaseSurface::new(false, 1, c.clone()),
            ]
        })
        .collect();
    let fibres = fibre_choices(max_alpha);
    for base in &bases {
        for n in 0..=max_fibres {
            for combo in multisets(&fibres, n) {
                out.push(Piece::Seifert(SeifertBlock::new(base.clone(), 0, combo)));
            }
        }
    }
    // I-bundle fiber bases with negative Euler characteristic or the
    // Moebius band / annulus
    let ib_bases = vec![
        BaseSurface::moebius(BoundaryCircle::of(vec![Arc::AnnulusEnd("a1".into())])),
        BaseSurface::moebius(BoundaryCircle::whole_d0()),
        BaseSurface::annulus(
            BoundaryCircle::of(vec![Arc::AnnulusEnd("a1".into())]),
            BoundaryCircle::of(vec![Arc::AnnulusEnd("a2".into())]),
        ),
        BaseSurface::new(
            true,
            0,
            vec![
                BoundaryCircle::of(vec![Arc::AnnulusEnd("a1".into())]),
                BoundaryCircle::whole_d0(),
                BoundaryCircle::whole_d0(),
            ],
        ),
        BaseSurface::new(
            false,
            1,
            vec![
                BoundaryCircle::of(vec![Arc::AnnulusEnd("a1".into())]),
                BoundaryCircle::whole_d0(),
            ],
        ),
    ];
    for fb in ib_bases {
        out.push(Piece::IBundle(IBundleBlock::new(fb)));
    }
    out
}

/// The piece universe behind the graph census.
fn census_pieces(b: &EnumerationBounds) -> Vec<Piece> {
    let mut out = Vec::new();
    let circle_patterns: Vec<BoundaryCircle> = {
        let mut v = vec![BoundaryCircle::whole_d0(), BoundaryCircle::torus("T")];
        if b.max_arcs_per_circle >= 2 {
            v.push(BoundaryCircle::d0_annulus("A"));
            v.push(BoundaryCircle::of(vec![
                Arc::AnnulusEnd("A".into()),
                Arc::AnnulusEnd("A".into()),
            ]));
        }
        v
    };
    // base surfaces: multisets of circle patterns with sites renumbered
    let mut bases = Vec::new();
    for orientable in [true, false] {
        let genus_range: Vec<u32> = if orientable {
            (0..=b.max_genus).collect()
        } else {
            (1..=b.max_genus).collect()
        };
        for genus in genus_range {
            for nc in 1..=b.max_circles {
                for combo in multisets(&circle_patterns, nc) {
                    let mut circles = Vec::new();
                    let mut na = 0;
                    let mut nt = 0;
                    for c in combo {
                        let mut arcs = Vec::new();
                        for arc in &c.arcs {
                            arcs.push(match arc {
                                Arc::FreeD0 => Arc::FreeD0,
                                Arc::AnnulusEnd(_) => {
                                    na += 1;
                                    Arc::AnnulusEnd(SiteId::new(format!("a{na}")))
                                }
                                Arc::TorusEnd(_) => {
                                    nt += 1;
                                    Arc::TorusEnd(SiteId::new(format!("t{nt}")))
                                }
                            });
                        }
                        circles.push(BoundaryCircle { arcs });
                    }
                    bases.push(BaseSurface::new(orientable, genus, circles));
                }
            }
        }
    }
    // the hexagon block, when the arc bound admits it
    if b.max_arcs_per_circle >= 6 {
        bases.push(BaseSurface::disk(BoundaryCircle::of(vec![
            Arc::FreeD0,
            Arc::AnnulusEnd("a1".into()),
            Arc::FreeD0,
            Arc::AnnulusEnd("a2".into()),
            Arc::FreeD0,
            Arc::AnnulusEnd("a3".into()),
        ])));
    }
    let fibres = fibre_choices(b.max_alpha);
    for base in &bases {
        for n in 0..=b.max_exceptional_fibres {
            for combo in multisets(&fibres, n) {
                out.push(Piece::Seifert(SeifertBlock::new(base.clone(), 0, combo)));
            }
        }
    }
    // I-bundles
    out.push(Piece::IBundle(IBundleBlock::new(BaseSurface::moebius(
        BoundaryCircle::of(vec![Arc::AnnulusEnd("a1".into())]),
    ))));
    out.push(Piece::IBundle(IBundleBlock::new(BaseSurface::new(
        true,
        0,
        vec![
            BoundaryCircle::of(vec![Arc::AnnulusEnd("a1".into())]),
            BoundaryCircle::whole_d0(),
            BoundaryCircle::whole_d0(),
        ],
    ))));
    out.push(Piece::IBundle(IBundleBlock::new(BaseSurface::annulus(
        BoundaryCircle::of(vec![Arc::AnnulusEnd("a1".into())]),
        BoundaryCircle::of(vec![Arc::AnnulusEnd("a2".into())]),
    ))));
    // opaque simple blocks
    for chi in [-2i64, -1, 0] {
        for flag in [SimpleFlag::StronglySimple, SimpleFlag::SpecialSimple] {
            out.push(Piece::Simple(SimpleBlock::new(
                chi,
                flag,
                vec![("a1".into(), SiteKind::Annulus)],
            )));
            out.push(Piece::Simple(SimpleBlock::new(
                chi,
                flag,
                vec![("t1".into(), SiteKind::Torus)],
            )));
        }
    }
    out.push(Piece::Simple(SimpleBlock::new(
        -2,
        SimpleFlag::StronglySimple,
        vec![("t1".into(), SiteKind::Torus), ("t2".into(), SiteKind::Torus)],
    )));
    out
}

const TORUS_GLUINGS: [[[i64; 2]; 2]; 3] = [
    [[0, 1], [1, 0]],
    [[0, 1], [1, 1]],
    [[0, -1], [1, 0]],
];

const SELF_TORUS_GLUINGS: [[[i64; 2]; 2]; 3] = [
    [[2, 1], [1, 1]],   // trace 3
    [[1, 1], [0, 1]],   // trace 2
    [[-1, 1], [0, -1]], // trace -2
];

/// All kind-compatible perfect matchings of the site list.
fn matchings(
    sites: &[(PieceId, SiteId, SiteKind)],
) -> Vec<Vec<((PieceId, SiteId), (PieceId, SiteId), SiteKind)>> {
    fn rec(
        sites: &[(PieceId, SiteId, SiteKind)],
        used: &mut Vec<bool>,
        acc: &mut Vec<((PieceId, SiteId), (PieceId, SiteId), SiteKind)>,
        out: &mut Vec<Vec<((PieceId, SiteId), (PieceId, SiteId), SiteKind)>>,
    ) {
        let Some(first) = used.iter().position(|u| !u) else {
            out.push(acc.clone());
            return;
        };
        used[first] = true;
        for j in (first + 1)..sites.len() {
            if used[j] || sites[j].2 != sites[first].2 {
                continue;
            }
            used[j] = true;
            acc.push((
                (sites[first].0.clone(), sites[first].1.clone()),
                (sites[j].0.clone(), sites[j].1.clone()),
                sites[first].2,
            ));
            rec(sites, used, acc, out);
            acc.pop();
            used[j] = false;
        }
        used[first] = false;
    }
    let mut out = Vec::new();
    rec(sites, &mut vec![false; sites.len()], &mut Vec::new(), &mut out);
    out
}

fn product_lists<T: Clone>(axes: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for item in axis {
                let mut p = prefix.clone();
                p.push(item.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Every valid graph within bounds, exactly once up to isomorphism, in a
/// deterministic order.
pub fn enumerate_graphs(b: &EnumerationBounds) -> Vec<DecompositionGraph> {
    let universe = census_pieces(b);
    // buckets of representatives under a cheap isomorphism invariant;
    // exact deduplication within a bucket is the permutation check
    let mut buckets: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let mut out: Vec<DecompositionGraph> = Vec::new();

    let mut push = |g: DecompositionGraph,
                    buckets: &mut BTreeMap<String, Vec<usize>>,
                    out: &mut Vec<DecompositionGraph>| {
        if !g.validate().is_valid() {
            return;
        }
        let key = invariant_key(&g);
        let bucket = buckets.entry(key).or_default();
        if bucket.iter().any(|&i| perm_isomorphic(&out[i], &g)) {
            return;
        }
        bucket.push(out.len());
        out.push(g);
    };

    for n in 1..=b.max_pieces {
        for combo in multisets(&universe, n) {
            // multi-piece graphs need every piece attachable
            if n > 1 && combo.iter().any(|p| p.sites().is_empty()) {
                continue;
            }
            let ids: Vec<PieceId> = (0..n).map(|i| PieceId::new(format!("p{}", i + 1))).collect();
            let mut sites: Vec<(PieceId, SiteId, SiteKind)> = Vec::new();
            for (i, piece) in combo.iter().enumerate() {
                for (s, k) in piece.sites() {
                    sites.push((ids[i].clone(), s, k));
                }
            }
            if sites.iter().filter(|(_, _, k)| *k == SiteKind::Annulus).count() % 2 == 1 {
                continue;
            }
            if sites.iter().filter(|(_, _, k)| *k == SiteKind::Torus).count() % 2 == 1 {
                continue;
            }
            for matching in matchings(&sites) {
                // decoration axes per edge
                let axes: Vec<Vec<Edge>> = matching
                    .iter()
                    .map(|(ea, eb, kind)| {
                        let a = EndRef { piece: ea.0.clone(), site: ea.1.clone() };
                        let bb = EndRef { piece: eb.0.clone(), site: eb.1.clone() };
                        match kind {
                            SiteKind::Annulus => vec![
                                Edge::Annulus { a: a.clone(), b: bb.clone(), flip: false },
                                Edge::Annulus { a, b: bb, flip: true },
                            ],
                            SiteKind::Torus => {
                                let set: &[[[i64; 2]; 2]] = if ea.0 == eb.0 && n == 1 {
                                    &SELF_TORUS_GLUINGS
                                } else {
                                    &TORUS_GLUINGS
                                };
                                set.iter()
                                    .map(|m| Edge::Torus {
                                        a: a.clone(),
                                        b: bb.clone(),
                                        gluing: *m,
                                    })
                                    .collect()
                            }
                        }
                    })
                    .collect();
                for decorated in product_lists(&axes) {
                    let mut g = DecompositionGraph::new("m", GraphKind::W);
                    for (i, piece) in combo.iter().enumerate() {
                        g.add_piece(ids[i].clone(), piece.clone());
                    }
                    for (k, edge) in decorated.into_iter().enumerate() {
                        g.add_edge(EdgeId::new(format!("e{}", k + 1)), edge);
                    }
                    push(g, &mut buckets, &mut out);
                }
            }
        }
    }
    out
}

/// Cheap isomorphism invariant used to bucket census candidates.
fn invariant_key(g: &DecompositionGraph) -> String {
    let mut piece_sigs: Vec<String> = g
        .pieces
        .values()
        .map(|p| match p {
            Piece::Seifert(b) => format!(
                "s|{}|{}|{:?}|{:?}|{}",
                b.base.orientable,
                b.base.genus,
                crate::seifert::circle_skeleton_multiset(&b.base),
                b.fibres.iter().map(|f| f.alpha).collect::<Vec<_>>(),
                b.b
            ),
            Piece::IBundle(b) => format!(
                "i|{}|{}|{:?}",
                b.fiber_base.orientable,
                b.fiber_base.genus,
                crate::seifert::circle_skeleton_multiset(&b.fiber_base)
            ),
            Piece::Simple(b) => format!(
                "o|{}|{:?}|{:?}",
                b.chi_d0,
                b.flag,
                b.sites.iter().map(|(_, k)| *k).collect::<Vec<_>>()
            ),
        })
        .collect();
    piece_sigs.sort();
    let mut edge_sigs: Vec<String> =
        g.edges.values().map(|e| e.kind_name().to_owned()).collect();
    edge_sigs.sort();
    format!("{:?}|{piece_sigs:?}|{edge_sigs:?}", g.kind)
}

/// Frozen census counts, one entry per piece count.
pub fn census_counts(graphs: &[DecompositionGraph]) -> BTreeMap<usize, usize> {
    let mut counts = BTreeMap::new();
    for g in graphs {
        *counts.entry(g.pieces.len()).or_default() += 1;
    }
    counts
}

// ---------------------------------------------------------------------------
// Confluence
// ---------------------------------------------------------------------------

/// True when every deletion order of the matched annuli yields pairwise
/// isomorphic results, checked with the permutation route.
pub fn check_confluence(g: &DecompositionGraph) -> Result<bool, GraphError> {
    let matched = rewrite::detect_matched_annuli(g).edges;
    let orders = permutations(&matched);
    let mut results = Vec::new();
    for order in orders {
        results.push(rewrite::w_to_jsj_with_order(g, &order)?);
    }
    for pair in results.windows(2) {
        if !perm_isomorphic(&pair[0], &pair[1]) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, x.clone());
            out.push(tail);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Permutation isomorphism
// ---------------------------------------------------------------------------

/// Decorated-graph isomorphism by exhaustive search over piece bijections
/// and piece presentations, matching edges directly. Shares the move-set
/// definition with the canonical-form module but none of its encoding or
/// minimization machinery.
pub fn perm_isomorphic(g1: &DecompositionGraph, g2: &DecompositionGraph) -> bool {
    let a = isocanon::normalize_decorations(g1);
    let b = isocanon::normalize_decorations(g2);
    if a.pieces.len() != b.pieces.len() || a.edges.len() != b.edges.len() || a.kind != b.kind {
        return false;
    }
    let a_ids: Vec<PieceId> = a.pieces.keys().cloned().collect();
    let b_ids: Vec<PieceId> = b.pieces.keys().cloned().collect();

    // all piece pairings with their compatible presentations
    let mut pair_options: BTreeMap<(usize, usize), Vec<SiteMatch>> = BTreeMap::new();
    for (i, pa) in a_ids.iter().enumerate() {
        for (j, pb) in b_ids.iter().enumerate() {
            let opts = piece_matches(&a.pieces[pa], &b.pieces[pb]);
            if !opts.is_empty() {
                pair_options.insert((i, j), opts);
            }
        }
    }

    let n = a_ids.len();
    let mut assignment: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    search(&a, &b, &a_ids, &b_ids, &pair_options, &mut assignment, &mut used, 0)
}

#[derive(Clone, Debug)]
struct SiteMatch {
    /// site of the first piece -> site of the second
    map: BTreeMap<SiteId, SiteId>,
    /// sites of the first piece whose arc direction flips under the match
    toggled: BTreeSet<SiteId>,
}

/// Presentations of `p` that equal a presentation of `q` up to site names.
fn piece_matches(p: &Piece, q: &Piece) -> Vec<SiteMatch> {
    let tp = isocanon::piece_transforms(p);
    let tq = isocanon::piece_transforms(q);
    let mut out: Vec<SiteMatch> = Vec::new();
    for a in &tp {
        for b in &tq {
            if a.site_sequence.len() != b.site_sequence.len() {
                continue;
            }
            if !pieces_equal_blanked(&a.piece, &b.piece) {
                continue;
            }
            let map: BTreeMap<SiteId, SiteId> = a
                .site_sequence
                .iter()
                .cloned()
                .zip(b.site_sequence.iter().cloned())
                .collect();
            let mut toggled = BTreeSet::new();
            for (sa, sb) in map.iter() {
                let ta = a.flag_toggled.contains(sa);
                let tb = b.flag_toggled.contains(sb);
                if ta != tb {
                    toggled.insert(sa.clone());
                }
            }
            if !out.iter().any(|m| m.map == map && m.toggled == toggled) {
                out.push(SiteMatch { map, toggled });
            }
        }
    }
    out
}

/// Structural equality with site identities ignored.
fn pieces_equal_blanked(p: &Piece, q: &Piece) -> bool {
    fn blank_surface(s: &BaseSurface) -> BaseSurface {
        let circles = s
            .circles
            .iter()
            .map(|c| BoundaryCircle {
                arcs: c
                    .arcs
                    .iter()
                    .map(|a| match a {
                        Arc::FreeD0 => Arc::FreeD0,
                        Arc::AnnulusEnd(_) => Arc::AnnulusEnd("x".into()),
                        Arc::TorusEnd(_) => Arc::TorusEnd("x".into()),
                    })
                    .collect(),
            })
            .collect();
        BaseSurface::new(s.orientable, s.genus, circles)
    }
    match (p, q) {
        (Piece::Seifert(x), Piece::Seifert(y)) => {
            x.b == y.b && x.fibres == y.fibres && blank_surface(&x.base) == blank_surface(&y.base)
        }
        (Piece::IBundle(x), Piece::IBundle(y)) => {
            x.twisted == y.twisted
                && blank_surface(&x.fiber_base) == blank_surface(&y.fiber_base)
        }
        (Piece::Simple(x), Piece::Simple(y)) => {
            x.chi_d0 == y.chi_d0
                && x.flag == y.flag
                && x.sites.iter().map(|(_, k)| k).collect::<Vec<_>>()
                    == y.sites.iter().map(|(_, k)| k).collect::<Vec<_>>()
        }
        _ => false,
    }
}

#[allow(clippy::too_many_arguments)]
fn search(
    a: &DecompositionGraph,
    b: &DecompositionGraph,
    a_ids: &[PieceId],
    b_ids: &[PieceId],
    pair_options: &BTreeMap<(usize, usize), Vec<SiteMatch>>,
    assignment: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    depth: usize,
) -> bool {
    if depth == a_ids.len() {
        return check_edges(a, b, a_ids, b_ids, pair_options, assignment);
    }
    for j in 0..b_ids.len() {
        if used[j] || !pair_options.contains_key(&(depth, j)) {
            continue;
        }
        assignment[depth] = Some(j);
        used[j] = true;
        if search(a, b, a_ids, b_ids, pair_options, assignment, used, depth + 1) {
            return true;
        }
        assignment[depth] = None;
        used[j] = false;
    }
    false
}

fn check_edges(
    a: &DecompositionGraph,
    b: &DecompositionGraph,
    a_ids: &[PieceId],
    b_ids: &[PieceId],
    pair_options: &BTreeMap<(usize, usize), Vec<SiteMatch>>,
    assignment: &[Option<usize>],
) -> bool {
    // choose one site match per piece pair, then match edges
    let choices: Vec<&Vec<SiteMatch>> = assignment
        .iter()
        .enumerate()
        .map(|(i, j)| &pair_options[&(i, j.unwrap())])
        .collect();
    let lens: Vec<usize> = choices.iter().map(|c| c.len()).collect();
    let combos = {
        let mut out = vec![Vec::new()];
        for &n in &lens {
            let mut next = Vec::with_capacity(out.len() * n);
            for prefix in &out {
                for k in 0..n {
                    let mut p = prefix.clone();
                    p.push(k);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    };
    let index_of: BTreeMap<&PieceId, usize> =
        a_ids.iter().enumerate().map(|(i, p)| (p, i)).collect();
    'combo: for combo in combos {
        let site_match = |end: &EndRef| -> Option<(EndRef, bool)> {
            let i = *index_of.get(&end.piece)?;
            let m = &choices[i][combo[i]];
            let mapped = m.map.get(&end.site)?;
            let j = assignment[i]?;
            Some((
                EndRef { piece: b_ids[j].clone(), site: mapped.clone() },
                m.toggled.contains(&end.site),
            ))
        };
        let mut remaining: Vec<(&EdgeId, &Edge)> = b.edges.iter().collect();
        for edge in a.edges.values() {
            let mut found = None;
            'scan: for (slot, (_, cand)) in remaining.iter().enumerate() {
                if edges_correspond(a, b, edge, cand, &site_match) {
                    found = Some(slot);
                    break 'scan;
                }
            }
            match found {
                Some(slot) => {
                    remaining.remove(slot);
                }
                None => continue 'combo,
            }
        }
        return true;
    }
    false
}

fn edges_correspond(
    a: &DecompositionGraph,
    b: &DecompositionGraph,
    e1: &Edge,
    e2: &Edge,
    site_match: &impl Fn(&EndRef) -> Option<(EndRef, bool)>,
) -> bool {
    let opaque_a = |end: &EndRef| matches!(a.pieces.get(&end.piece), Some(Piece::Simple(_)));
    let opaque_b = |end: &EndRef| matches!(b.pieces.get(&end.piece), Some(Piece::Simple(_)));
    match (e1, e2) {
        (
            Edge::Annulus { a: a1, b: b1, flip: f1 },
            Edge::Annulus { a: a2, b: b2, flip: f2 },
        ) => {
            let Some((ma, ta)) = site_match(a1) else { return false };
            let Some((mb, tb)) = site_match(b1) else { return false };
            let flip = *f1 ^ ta ^ tb;
            let straight = (&ma, &mb) == (a2, b2) || (&mb, &ma) == (a2, b2);
            straight && flip == *f2
        }
        (
            Edge::Torus { a: a1, b: b1, gluing: m1 },
            Edge::Torus { a: a2, b: b2, gluing: m2 },
        ) => {
            let Some((ma, _)) = site_match(a1) else { return false };
            let Some((mb, _)) = site_match(b1) else { return false };
            if (&ma, &mb) == (a2, b2) {
                isocanon::matrices_equivalent(
                    *m1,
                    *m2,
                    opaque_a(a1) || opaque_b(a2),
                    opaque_a(b1) || opaque_b(b2),
                )
            } else if (&mb, &ma) == (a2, b2) {
                isocanon::matrices_equivalent(
                    invert(*m1),
                    *m2,
                    opaque_a(b1) || opaque_b(a2),
                    opaque_a(a1) || opaque_b(b2),
                )
            } else {
                false
            }
        }
        (Edge::MoebiusBand { at: x }, Edge::MoebiusBand { at: y })
        | (Edge::KleinBottle { at: x }, Edge::KleinBottle { at: y }) => {
            matches!(site_match(x), Some((m, _)) if &m == y)
        }
        _ => false,
    }
}

fn invert(m: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let d = det;
    [[d * m[1][1], -d * m[0][1]], [-d * m[1][0], d * m[0][0]]]
}

// ---------------------------------------------------------------------------
// Independent gluing check
// ---------------------------------------------------------------------------

/// Surface invariants computed on a fan-triangulated complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleShape {
    pub chi: i64,
    pub orientable: bool,
    /// multiset of boundary circles, each the canonical rotation of its
    /// merged arc tags
    pub circles: Vec<String>,
}

pub fn shape_of(s: &BaseSurface) -> OracleShape {
    OracleShape {
        chi: s.euler_characteristic(),
        orientable: s.orientable,
        circles: crate::seifert::circle_skeleton_multiset(s),
    }
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
struct TriSide {
    label: usize,
    fwd: bool,
}

struct TriComplex {
    tris: Vec<[TriSide; 3]>,
    next: usize,
    free_tags: BTreeMap<usize, Arc>,
    arc_edges: BTreeMap<(usize, usize, usize), usize>,
}

impl TriComplex {
    fn new() -> Self {
        Self { tris: Vec::new(), next: 0, free_tags: BTreeMap::new(), arc_edges: BTreeMap::new() }
    }

    fn fresh(&mut self) -> usize {
        let e = self.next;
        self.next += 1;
        e
    }

    /// Fan-triangulate the polygon word of the surface.
    fn add_surface(&mut self, s: &BaseSurface, input: usize) {
        // polygon word: handles/crosscaps then tethered boundary circles
        let mut word: Vec<TriSide> = Vec::new();
        for _ in 0..s.genus {
            if s.orientable {
                let a = self.fresh();
                let b = self.fresh();
                word.push(TriSide { label: a, fwd: true });
                word.push(TriSide { label: b, fwd: true });
                word.push(TriSide { label: a, fwd: false });
                word.push(TriSide { label: b, fwd: false });
            } else {
                let c = self.fresh();
                word.push(TriSide { label: c, fwd: true });
                word.push(TriSide { label: c, fwd: true });
            }
        }
        for (ci, circle) in s.circles.iter().enumerate() {
            let t = self.fresh();
            word.push(TriSide { label: t, fwd: true });
            for (ai, arc) in circle.arcs.iter().enumerate() {
                let r = self.fresh();
                word.push(TriSide { label: r, fwd: true });
                self.free_tags.insert(r, arc.clone());
                self.arc_edges.insert((input, ci, ai), r);
            }
            word.push(TriSide { label: t, fwd: false });
        }
        let n = word.len();
        if n < 3 {
            // a polygon word shorter than 3 cannot arise for bounded surfaces
            panic!("degenerate polygon word");
        }
        // diagonals from corner 0
        let mut diag: BTreeMap<usize, usize> = BTreeMap::new();
        for i in 2..n - 1 {
            diag.insert(i, self.fresh());
        }
        for i in 1..=n - 2 {
            let first = if i == 1 {
                word[0]
            } else {
                TriSide { label: diag[&i], fwd: true }
            };
            let second = word[i];
            let third = if i == n - 2 {
                word[n - 1]
            } else {
                TriSide { label: diag[&(i + 1)], fwd: false }
            };
            self.tris.push([first, second, third]);
        }
    }

    fn identify(&mut self, keep: usize, gone: usize, parallel: bool) {
        for t in &mut self.tris {
            for side in t.iter_mut() {
                if side.label == gone {
                    *side = TriSide { label: keep, fwd: side.fwd == parallel };
                }
            }
        }
        self.free_tags.remove(&keep);
        self.free_tags.remove(&gone);
    }

    fn shape(&self) -> OracleShape {
        // corners: (tri, k); vertex classes via edge endpoints
        let total = self.tris.len() * 3;
        let mut parent: Vec<usize> = (0..total).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        fn union(p: &mut Vec<usize>, a: usize, b: usize) {
            let (ra, rb) = (find(p, a), find(p, b));
            if ra != rb {
                p[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut tails: BTreeMap<usize, usize> = BTreeMap::new();
        let mut heads: BTreeMap<usize, usize> = BTreeMap::new();
        let mut occur: BTreeMap<usize, Vec<(usize, bool)>> = BTreeMap::new();
        for (ti, tri) in self.tris.iter().enumerate() {
            for (k, side) in tri.iter().enumerate() {
                let start = ti * 3 + k;
                let end = ti * 3 + (k + 1) % 3;
                let (t, h) = if side.fwd { (start, end) } else { (end, start) };
                if let Some(&r) = tails.get(&side.label) {
                    union(&mut parent, r, t);
                } else {
                    tails.insert(side.label, t);
                }
                if let Some(&r) = heads.get(&side.label) {
                    union(&mut parent, r, h);
                } else {
                    heads.insert(side.label, h);
                }
                occur.entry(side.label).or_default().push((ti, side.fwd));
            }
        }
        let mut classes = BTreeSet::new();
        for v in 0..total {
            classes.insert(find(&mut parent, v));
        }
        let chi = classes.len() as i64 - occur.len() as i64 + self.tris.len() as i64;

        // orientability via triangle flip propagation
        let mut flips: Vec<Option<bool>> = vec![None; self.tris.len()];
        let mut orientable = true;
        let mut adj: Vec<Vec<(usize, bool)>> = vec![Vec::new(); self.tris.len()];
        for occ in occur.values() {
            if occ.len() == 2 {
                let ((t1, d1), (t2, d2)) = (occ[0], occ[1]);
                if t1 == t2 {
                    if d1 == d2 {
                        orientable = false;
                    }
                } else {
                    let same = d1 != d2;
                    adj[t1].push((t2, same));
                    adj[t2].push((t1, same));
                }
            }
        }
        for start in 0..self.tris.len() {
            if flips[start].is_some() {
                continue;
            }
            flips[start] = Some(false);
            let mut stack = vec![start];
            while let Some(t) = stack.pop() {
                let cur = flips[t].unwrap();
                for &(u, same) in &adj[t] {
                    let want = if same { cur } else { !cur };
                    match flips[u] {
                        None => {
                            flips[u] = Some(want);
                            stack.push(u);
                        }
                        Some(x) if x != want => orientable = false,
                        _ => {}
                    }
                }
            }
        }

        // boundary circles: free edges traced through vertex classes
        let free: Vec<usize> = self.free_tags.keys().copied().collect();
        let mut incident: BTreeMap<usize, Vec<(usize, u8)>> = BTreeMap::new();
        for &e in &free {
            let t = find(&mut parent, tails[&e]);
            let h = find(&mut parent, heads[&e]);
            incident.entry(t).or_default().push((e, 0));
            incident.entry(h).or_default().push((e, 1));
        }
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut circles = Vec::new();
        for &start in &free {
            if seen.contains(&start) {
                continue;
            }
            let mut tags: Vec<&Arc> = Vec::new();
            let mut e = start;
            let mut arrived: u8 = 1;
            loop {
                seen.insert(e);
                tags.push(&self.free_tags[&e]);
                let t = find(&mut parent, tails[&e]);
                let h = find(&mut parent, heads[&e]);
                let class = if arrived == 1 { h } else { t };
                let ends = &incident[&class];
                let (ne, nend) = *ends
                    .iter()
                    .find(|&&(oe, oend)| (oe, oend) != (e, arrived))
                    .expect("boundary vertex with two edge ends");
                e = ne;
                arrived = 1 - nend;
                if e == start && arrived == 1 {
                    break;
                }
            }
            // merge free runs and canonicalize
            let strs: Vec<&str> = tags
                .iter()
                .map(|a| match a {
                    Arc::FreeD0 => "d0",
                    Arc::AnnulusEnd(_) => "a",
                    Arc::TorusEnd(_) => "t",
                })
                .collect();
            circles.push(canonical_merged_cycle(&strs));
        }
        circles.sort();
        OracleShape { chi, orientable, circles }
    }
}

/// Merge cyclic runs of d0 tags, then take the least rotation/reflection.
fn canonical_merged_cycle(tags: &[&str]) -> String {
    let n = tags.len();
    if tags.iter().all(|t| *t == "d0") {
        return "d0".to_owned();
    }
    let start = tags.iter().position(|t| *t != "d0").unwrap();
    let mut merged: Vec<&str> = Vec::new();
    let mut k = 0;
    while k < n {
        let t = tags[(start + k) % n];
        if t == "d0" {
            while k + 1 < n && tags[(start + k + 1) % n] == "d0" {
                k += 1;
            }
            merged.push("d0");
        } else {
            merged.push(t);
        }
        k += 1;
    }
    crate::seifert::canonical_cycle(&merged)
}

/// Invariants of a gluing computed on the triangulated route.
pub fn oracle_glue_shape(
    s1: &BaseSurface,
    r1: ArcRef,
    other: Option<(&BaseSurface, ArcRef)>,
    reversing: bool,
) -> OracleShape {
    let mut cx = TriComplex::new();
    cx.add_surface(s1, 0);
    let (e1, e2) = match other {
        Some((s2, r2)) => {
            cx.add_surface(s2, 1);
            (cx.arc_edges[&(0, r1.circle, r1.arc)], cx.arc_edges[&(1, r2.circle, r2.arc)])
        }
        None => (cx.arc_edges[&(0, r1.circle, r1.arc)], {
            // use the second arc reference packed into `reversing` call sites
            unreachable!("self gluing must pass both arcs")
        }),
    };
    cx.identify(e1, e2, reversing);
    cx.shape()
}

/// Self-gluing variant.
pub fn oracle_self_glue_shape(
    s: &BaseSurface,
    r1: ArcRef,
    r2: ArcRef,
    reversing: bool,
) -> OracleShape {
    let mut cx = TriComplex::new();
    cx.add_surface(s, 0);
    let e1 = cx.arc_edges[&(0, r1.circle, r1.arc)];
    let e2 = cx.arc_edges[&(0, r2.circle, r2.arc)];
    cx.identify(e1, e2, reversing);
    cx.shape()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_block_census_is_stable() {
        // one-piece census with the smallest bounds: the count is frozen as
        // a regression guard
        let b = EnumerationBounds {
            max_pieces: 1,
            max_exceptional_fibres: 1,
            max_alpha: 2,
            max_genus: 1,
            max_circles: 2,
            max_arcs_per_circle: 2,
        };
        let graphs = enumerate_graphs(&b);
        assert!(!graphs.is_empty());
        for g in &graphs {
            assert!(g.validate().is_valid());
        }
        let counts = census_counts(&graphs);
        assert_eq!(counts.get(&1).copied().unwrap_or(0), graphs.len());
    }

    #[test]
    fn matched_pair_graph_appears_in_census() {
        let b = EnumerationBounds {
            max_pieces: 2,
            max_exceptional_fibres: 0,
            max_alpha: 2,
            max_genus: 1,
            max_circles: 2,
            max_arcs_per_circle: 2,
        };
        let graphs = enumerate_graphs(&b);
        let target = crate::format::parse(
            "manifold m kind=w\n\
             piece p1 seifert base=or:0 circles=d0,a:s b=0 fibres=\n\
             piece p2 seifert base=or:0 circles=d0,a:s b=0 fibres=\n\
             edge e1 annulus p1.s p2.s flip=0\n",
        )
        .unwrap();
        assert!(graphs.iter().any(|g| perm_isomorphic(g, &target)));
    }

    #[test]
    fn confluence_on_zero_and_two_matched() {
        let g = crate::format::parse(
            "manifold m kind=w\n\
             piece p1 seifert base=or:0 circles=t:t1;d0,a:s b=0 fibres=\n\
             piece p2 seifert base=or:0 circles=t:t1;a:x,a:y b=0 fibres=\n\
             piece p3 seifert base=or:0 circles=t:t1;d0,a:s b=0 fibres=\n\
             piece q1 simple chi0=-2 flags=ss sites=t:u\n\
             piece q2 simple chi0=-2 flags=ss sites=t:u\n\
             piece q3 simple chi0=-2 flags=ss sites=t:u\n\
             edge e1 annulus p1.s p2.x flip=0\n\
             edge e2 annulus p2.y p3.s flip=0\n\
             edge f1 torus p1.t1 q1.u m=0,1,1,0\n\
             edge f2 torus p2.t1 q2.u m=0,1,1,0\n\
             edge f3 torus p3.t1 q3.u m=0,1,1,0\n",
        )
        .unwrap();
        assert!(g.validate().is_valid(), "{:?}", g.validate());
        assert_eq!(rewrite::detect_matched_annuli(&g).edges.len(), 2);
        assert!(check_confluence(&g).unwrap());
        // the two orders also agree with the canonical route
        let o1 = rewrite::w_to_jsj_with_order(&g, &["e1".into(), "e2".into()]).unwrap();
        let o2 = rewrite::w_to_jsj_with_order(&g, &["e2".into(), "e1".into()]).unwrap();
        assert!(isocanon::isomorphic(&o1, &o2).unwrap());
    }

    #[test]
    fn perm_iso_agrees_on_simple_cases() {
        let g = crate::format::parse(
            "manifold m kind=w\n\
             piece p seifert base=or:0 circles=t:t1;d0,a:s b=0 fibres=\n\
             piece q seifert base=or:0 circles=t:t2;d0,a:s b=0 fibres=(2,1)\n\
             piece x simple chi0=-2 flags=ss sites=t:u\n\
             piece y simple chi0=-2 flags=ss sites=t:u\n\
             edge e annulus p.s q.s flip=0\n\
             edge f1 torus p.t1 x.u m=0,1,1,0\n\
             edge f2 torus q.t2 y.u m=0,1,1,0\n",
        )
        .unwrap();
        assert!(perm_isomorphic(&g, &g));
        let mut h = g.clone();
        // change a fibre: no longer isomorphic
        h.pieces.insert(
            "q".into(),
            Piece::Seifert(SeifertBlock::new(
                BaseSurface::annulus(BoundaryCircle::torus("t2"), BoundaryCircle::d0_annulus("s")),
                0,
                vec![ExceptionalFibre::new(3, 1)],
            )),
        );
        assert!(!perm_isomorphic(&g, &h));
        assert!(!isocanon::isomorphic(&g, &h).unwrap());
    }

    #[test]
    fn oracle_glue_agrees_with_core_on_samples() {
        let hex = BaseSurface::disk(BoundaryCircle::of(vec![
            Arc::FreeD0,
            Arc::AnnulusEnd("x".into()),
            Arc::FreeD0,
            Arc::AnnulusEnd("y".into()),
            Arc::FreeD0,
            Arc::AnnulusEnd("z".into()),
        ]));
        for flip in [false, true] {
            let core = hex.self_glue_arcs(ArcRef::new(0, 1), ArcRef::new(0, 5), flip).unwrap();
            let oracle = oracle_self_glue_shape(&hex, ArcRef::new(0, 1), ArcRef::new(0, 5), flip);
            assert_eq!(shape_of(&core.surface), oracle);
        }
        let a1 = BaseSurface::annulus(BoundaryCircle::torus("t"), BoundaryCircle::d0_annulus("s"));
        let a2 = a1.clone();
        for flip in [false, true] {
            let core = a1.glue_arcs(ArcRef::new(1, 1), &a2, ArcRef::new(1, 1), flip).unwrap();
            let oracle =
                oracle_glue_shape(&a1, ArcRef::new(1, 1), Some((&a2, ArcRef::new(1, 1))), flip);
            assert_eq!(shape_of(&core.surface), oracle);
        }
    }
}
