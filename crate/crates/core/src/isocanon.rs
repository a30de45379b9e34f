//! Canonical forms and isomorphism for decorated decomposition graphs.
//!
//! Two graphs are isomorphic when one maps to the other by relabelling
//! pieces, edges and sites, permuting and rotating boundary circles,
//! reflecting bases (all circles at once for orientable bases, circle by
//! circle otherwise, toggling the orientation flags of annulus edges at the
//! reflected arcs), flipping fibre orientations (negating b and the betas),
//! normalizing Seifert invariants, collapsing the two-structure blocks to
//! their preferred Seifert form, and re-framing torus edges by per-end
//! section twists and signs (opaque ends carry no canonical framing at all).
//!
//! The canonical form enumerates the orbit of a graph under these moves,
//! with type-partition pruning, and takes the least serialization.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{
    DecompositionGraph, Edge, EndRef, GraphError, Piece, SeifertBlock, SimpleBlock,
};
use crate::ids::{PieceId, SiteId};
use crate::seifert::{self, SeifertData};
use crate::surface::{Arc, BaseSurface, BoundaryCircle};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CanonicalEncoding(pub Vec<u8>);

impl CanonicalEncoding {
    pub fn hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn canonical_form(g: &DecompositionGraph) -> Result<CanonicalEncoding, GraphError> {
    let report = g.validate();
    if !report.is_valid() {
        return Err(GraphError::Invalid(report));
    }
    let norm = normalize_decorations(g);
    Ok(CanonicalEncoding(minimize(&norm)))
}

pub fn isomorphic(g1: &DecompositionGraph, g2: &DecompositionGraph) -> Result<bool, GraphError> {
    Ok(canonical_form(g1)? == canonical_form(g2)?)
}

/// Normal forms that do not interact with labelling: Seifert invariants in
/// normal form, two-structure blocks collapsed to the Seifert representative
/// (swapping the torus framings of a collapsed circle-bundle block), and
/// working state dropped.
pub(crate) fn normalize_decorations(g: &DecompositionGraph) -> DecompositionGraph {
    let mut out = g.clone();
    out.name = "g".to_owned();
    out.witnesses.clear();
    let ids: Vec<PieceId> = out.pieces.keys().cloned().collect();
    for pid in ids {
        let piece = out.pieces[&pid].clone();
        let (mut collapsed, swap_framings) = seifert::claim2_seifert_form(&piece);
        if let Piece::Seifert(blk) = &collapsed {
            let n = seifert::normalize_invariants(&SeifertData::of_block(blk));
            collapsed = Piece::Seifert(SeifertBlock::new(n.base, n.b, n.fibres));
        }
        if swap_framings {
            // fibre and section classes exchanged at every torus end
            for (site, _) in collapsed.sites() {
                for edge in out.edges.values_mut() {
                    if let Edge::Torus { a, b, gluing } = edge {
                        let s = [[0, 1], [1, 0]];
                        if a.piece == pid && a.site == site {
                            *gluing = mat_mul(*gluing, s);
                        }
                        if b.piece == pid && b.site == site {
                            *gluing = mat_mul(s, *gluing);
                        }
                    }
                }
            }
        }
        out.pieces.insert(pid, collapsed);
    }
    out
}

fn mat_mul(a: [[i64; 2]; 2], b: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn mat_inv(m: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    assert!(det.abs() == 1, "framing matrices are unimodular");
    let d = det; // 1/det = det for +-1
    [[d * m[1][1], -d * m[0][1]], [-d * m[1][0], d * m[0][0]]]
}

// ---------------------------------------------------------------------------
// Piece transforms
// ---------------------------------------------------------------------------

/// One relabelling-independent presentation of a piece: circles permuted,
/// rotated and possibly reflected, fibre orientation possibly flipped.
#[derive(Clone, Debug)]
pub(crate) struct TransformedPiece {
    pub piece: Piece,
    /// Attachment sites in canonical encounter order (original ids).
    pub site_sequence: Vec<SiteId>,
    /// Annulus sites whose stored arc direction was reversed.
    pub flag_toggled: BTreeSet<SiteId>,
}

fn reflected(circle: &BoundaryCircle) -> BoundaryCircle {
    let mut arcs = circle.arcs.clone();
    arcs.reverse();
    BoundaryCircle { arcs }
}

fn rotated(circle: &BoundaryCircle, start: usize) -> BoundaryCircle {
    let n = circle.arcs.len();
    BoundaryCircle {
        arcs: (0..n).map(|i| circle.arcs[(start + i) % n].clone()).collect(),
    }
}

fn skeleton_key(c: &BoundaryCircle) -> String {
    seifert::circle_skeleton(c)
}

/// Rotations of a circle whose skeleton reading is lexicographically least.
fn min_rotations(c: &BoundaryCircle) -> Vec<usize> {
    let n = c.arcs.len();
    let tag = |a: &Arc| match a {
        Arc::FreeD0 => "d0",
        Arc::AnnulusEnd(_) => "a",
        Arc::TorusEnd(_) => "t",
    };
    let mut best: Option<String> = None;
    let mut winners = Vec::new();
    for r in 0..n {
        let s = (0..n).map(|i| tag(&c.arcs[(r + i) % n])).collect::<Vec<_>>().join(",");
        match &best {
            None => {
                best = Some(s);
                winners = vec![r];
            }
            Some(b) if s < *b => {
                best = Some(s);
                winners = vec![r];
            }
            Some(b) if s == *b => winners.push(r),
            _ => {}
        }
    }
    winners
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

fn product_indices(axes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in axes {
        let mut next = Vec::with_capacity(out.len() * n);
        for prefix in &out {
            for i in 0..n {
                let mut p = prefix.clone();
                p.push(i);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// All canonical presentations of a piece under the move set.
pub(crate) fn piece_transforms(piece: &Piece) -> Vec<TransformedPiece> {
    match piece {
        Piece::Simple(b) => simple_transforms(b),
        Piece::Seifert(blk) => {
            surface_transforms(&blk.base, true, |base, flip| {
                let data = SeifertData::new(base.clone(), blk.b, blk.fibres.clone());
                let data = if flip {
                    SeifertData::new(
                        base.clone(),
                        -blk.b,
                        blk.fibres
                            .iter()
                            .map(|f| crate::graph::ExceptionalFibre::new(f.alpha, -f.beta))
                            .collect(),
                    )
                } else {
                    data
                };
                let n = seifert::normalize_invariants(&data);
                Piece::Seifert(SeifertBlock::new(n.base, n.b, n.fibres))
            })
        }
        Piece::IBundle(ib) => surface_transforms(&ib.fiber_base, false, |base, _| {
            Piece::IBundle(crate::graph::IBundleBlock::new(base.clone()))
        }),
    }
}

/// Enumerate circle permutations (within equal skeletons), reflections
/// (global for orientable bases, per circle otherwise) and least rotations;
/// `build` assembles the piece from the transformed base and the fibre-flip
/// bit.
fn surface_transforms(
    base: &BaseSurface,
    allow_fibre_flip: bool,
    build: impl Fn(&BaseSurface, bool) -> Piece,
) -> Vec<TransformedPiece> {
    let n = base.circles.len();
    // order circles by skeleton, permuting within tie groups
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| skeleton_key(&base.circles[i]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some(grp)
                if skeleton_key(&base.circles[grp[0]]) == skeleton_key(&base.circles[i]) =>
            {
                grp.push(i)
            }
            _ => groups.push(vec![i]),
        }
    }
    let group_perms: Vec<Vec<Vec<usize>>> = groups.iter().map(|g| permutations(g)).collect();

    let reflect_opts: Vec<Vec<bool>> = if base.orientable {
        // one orientation choice for the whole base
        vec![vec![false; n], vec![true; n]]
    } else {
        // per-circle reflections; skip circles where reflection cannot matter
        let axes: Vec<usize> = (0..n)
            .map(|i| if base.circles[i].arcs.len() > 1 { 2 } else { 1 })
            .collect();
        product_indices(&axes)
            .into_iter()
            .map(|bits| bits.into_iter().map(|b| b == 1).collect())
            .collect()
    };

    let flips: &[bool] = if allow_fibre_flip { &[false, true] } else { &[false] };

    let mut out = Vec::new();
    for group_choice in product_indices(&group_perms.iter().map(Vec::len).collect::<Vec<_>>()) {
        let circle_order: Vec<usize> = groups
            .iter()
            .enumerate()
            .flat_map(|(gi, _)| group_perms[gi][group_choice[gi]].clone())
            .collect();
        for refl in &reflect_opts {
            // circles after reflection, in canonical order
            let circles: Vec<BoundaryCircle> = circle_order
                .iter()
                .map(|&i| if refl[i] { reflected(&base.circles[i]) } else { base.circles[i].clone() })
                .collect();
            let rot_axes: Vec<Vec<usize>> = circles.iter().map(min_rotations).collect();
            for rot_choice in product_indices(&rot_axes.iter().map(Vec::len).collect::<Vec<_>>()) {
                let final_circles: Vec<BoundaryCircle> = circles
                    .iter()
                    .enumerate()
                    .map(|(k, c)| rotated(c, rot_axes[k][rot_choice[k]]))
                    .collect();
                let mut site_sequence = Vec::new();
                let mut flag_toggled = BTreeSet::new();
                for (k, c) in final_circles.iter().enumerate() {
                    for arc in &c.arcs {
                        if let Some(s) = arc.site() {
                            site_sequence.push(s.clone());
                            if refl[circle_order[k]] && matches!(arc, Arc::AnnulusEnd(_)) {
                                flag_toggled.insert(s.clone());
                            }
                        }
                    }
                }
                let new_base =
                    BaseSurface::new(base.orientable, base.genus, final_circles.clone());
                for &flip in flips {
                    out.push(TransformedPiece {
                        piece: build(&new_base, flip),
                        site_sequence: site_sequence.clone(),
                        flag_toggled: flag_toggled.clone(),
                    });
                }
            }
        }
    }
    dedup_transforms(out)
}

fn simple_transforms(b: &SimpleBlock) -> Vec<TransformedPiece> {
    // same-kind sites are interchangeable
    let mut annulus: Vec<SiteId> = Vec::new();
    let mut torus: Vec<SiteId> = Vec::new();
    for (s, k) in &b.sites {
        match k {
            crate::graph::SiteKind::Annulus => annulus.push(s.clone()),
            crate::graph::SiteKind::Torus => torus.push(s.clone()),
        }
    }
    let mut out = Vec::new();
    for ap in permutations(&annulus) {
        for tp in permutations(&torus) {
            let mut seq = ap.clone();
            seq.extend(tp.iter().cloned());
            out.push(TransformedPiece {
                piece: Piece::Simple(b.clone()),
                site_sequence: seq,
                flag_toggled: BTreeSet::new(),
            });
        }
    }
    out
}

fn dedup_transforms(v: Vec<TransformedPiece>) -> Vec<TransformedPiece> {
    let mut out: Vec<TransformedPiece> = Vec::new();
    for t in v {
        let dup = out.iter().any(|u| {
            u.piece == t.piece
                && u.site_sequence == t.site_sequence
                && u.flag_toggled == t.flag_toggled
        });
        if !dup {
            out.push(t);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Torus framing reduction
// ---------------------------------------------------------------------------

/// Allowed framing changes at one fibred end: section twists and sign
/// changes of fibre or section.
fn end_changes(window: i64) -> Vec<[[i64; 2]; 2]> {
    let mut out = Vec::new();
    for e1 in [1i64, -1] {
        for e2 in [1i64, -1] {
            for k in -window..=window {
                // diag(e1,e2) * [[1,-k],[0,1]]
                out.push([[e1, -e1 * k], [0, e2]]);
            }
        }
    }
    out
}

/// Canonical representative of a gluing matrix under the framing moves of
/// its two ends. Opaque (simple-piece) ends admit every reframing, so any
/// matrix with one collapses to the identity.
pub(crate) fn canonical_matrix(
    m: [[i64; 2]; 2],
    a_opaque: bool,
    b_opaque: bool,
) -> [[i64; 2]; 2] {
    if a_opaque || b_opaque {
        return [[1, 0], [0, 1]];
    }
    let mut best = m;
    loop {
        let next = reduce_once(best);
        if next == best {
            return best;
        }
        best = next;
    }
}

fn reduce_once(m: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let maxabs = m.iter().flatten().map(|x| x.abs()).max().unwrap_or(1).max(1);
    let window = 2 * maxabs + 2;
    let mut best = m;
    for ca in end_changes(window) {
        let mca = mat_mul(m, mat_inv(ca));
        for cb in end_changes(window) {
            let cand = mat_mul(cb, mca);
            if matrix_key(&cand) < matrix_key(&best) {
                best = cand;
            }
        }
    }
    best
}

/// Smallest entries first, signed tuple as the tie break.
fn matrix_key(m: &[[i64; 2]; 2]) -> (i64, [i64; 4]) {
    let abs_sum: i64 = m.iter().flatten().map(|x| x.abs()).sum();
    (abs_sum, [m[0][0], m[0][1], m[1][0], m[1][1]])
}

/// Whether two gluing matrices differ by allowed reframings of their ends.
pub(crate) fn matrices_equivalent(
    m1: [[i64; 2]; 2],
    m2: [[i64; 2]; 2],
    a_opaque: bool,
    b_opaque: bool,
) -> bool {
    canonical_matrix(m1, a_opaque, b_opaque) == canonical_matrix(m2, a_opaque, b_opaque)
}

// ---------------------------------------------------------------------------
// Minimization
// ---------------------------------------------------------------------------

fn piece_signature(g: &DecompositionGraph, pid: &PieceId) -> String {
    let piece = &g.pieces[pid];
    let mut sig = String::new();
    sig.push_str(piece.kind_name());
    match piece {
        Piece::Seifert(b) => {
            sig.push_str(&format!(
                "|{}g{}|{:?}|",
                if b.base.orientable { "or" } else { "no" },
                b.base.genus,
                seifert::circle_skeleton_multiset(&b.base)
            ));
            let alphas: Vec<i64> = b.fibres.iter().map(|f| f.alpha).collect();
            sig.push_str(&format!("{alphas:?}"));
        }
        Piece::IBundle(b) => {
            sig.push_str(&format!(
                "|{}g{}|{:?}",
                if b.fiber_base.orientable { "or" } else { "no" },
                b.fiber_base.genus,
                seifert::circle_skeleton_multiset(&b.fiber_base)
            ));
        }
        Piece::Simple(b) => {
            sig.push_str(&format!("|chi{}|{:?}|{}", b.chi_d0, b.flag, b.sites.len()));
        }
    }
    let (na, nt) = piece
        .sites()
        .iter()
        .fold((0, 0), |(a, t), (_, k)| match k {
            crate::graph::SiteKind::Annulus => (a + 1, t),
            crate::graph::SiteKind::Torus => (a, t + 1),
        });
    sig.push_str(&format!("|a{na}t{nt}"));
    sig
}

/// Orderings of the pieces: signature classes stay in signature order,
/// members within a class take every order.
fn orderings(g: &DecompositionGraph) -> Vec<Vec<PieceId>> {
    let mut by_sig: BTreeMap<String, Vec<PieceId>> = BTreeMap::new();
    for pid in g.pieces.keys() {
        by_sig.entry(piece_signature(g, pid)).or_default().push(pid.clone());
    }
    let classes: Vec<Vec<PieceId>> = by_sig.into_values().collect();
    let class_perms: Vec<Vec<Vec<PieceId>>> = classes.iter().map(|c| permutations(c)).collect();
    product_indices(&class_perms.iter().map(Vec::len).collect::<Vec<_>>())
        .into_iter()
        .map(|choice| {
            classes
                .iter()
                .enumerate()
                .flat_map(|(ci, _)| class_perms[ci][choice[ci]].clone())
                .collect()
        })
        .collect()
}

fn minimize(g: &DecompositionGraph) -> Vec<u8> {
    let mut best: Option<Vec<u8>> = None;
    for ordering in orderings(g) {
        let axes: Vec<Vec<TransformedPiece>> =
            ordering.iter().map(|pid| piece_transforms(&g.pieces[pid])).collect();
        let lens: Vec<usize> = axes.iter().map(Vec::len).collect();
        for combo in product_indices(&lens) {
            let bytes = render(g, &ordering, &axes, &combo);
            if best.as_ref().is_none_or(|b| bytes < *b) {
                best = Some(bytes);
            }
        }
    }
    best.unwrap_or_default()
}

fn render(
    g: &DecompositionGraph,
    ordering: &[PieceId],
    axes: &[Vec<TransformedPiece>],
    combo: &[usize],
) -> Vec<u8> {
    // site renaming: (old piece, old site) -> (piece index, canonical site name)
    let mut site_map: BTreeMap<(PieceId, SiteId), (usize, usize)> = BTreeMap::new();
    let mut toggled: BTreeSet<(PieceId, SiteId)> = BTreeSet::new();
    for (idx, pid) in ordering.iter().enumerate() {
        let t = &axes[idx][combo[idx]];
        for (k, site) in t.site_sequence.iter().enumerate() {
            site_map.insert((pid.clone(), site.clone()), (idx, k));
        }
        for site in &t.flag_toggled {
            toggled.insert((pid.clone(), site.clone()));
        }
    }

    let mut out = String::new();
    out.push_str("kind=");
    out.push_str(g.kind.name());
    out.push('\n');

    for (idx, pid) in ordering.iter().enumerate() {
        let t = &axes[idx][combo[idx]];
        out.push_str(&render_piece(idx, &t.piece, pid, &site_map));
    }

    let opaque = |end: &EndRef| matches!(g.pieces.get(&end.piece), Some(Piece::Simple(_)));
    let mut edge_lines: Vec<String> = Vec::new();
    for edge in g.edges.values() {
        let line = match edge {
            Edge::Annulus { a, b, flip } => {
                let f = *flip
                    ^ toggled.contains(&(a.piece.clone(), a.site.clone()))
                    ^ toggled.contains(&(b.piece.clone(), b.site.clone()));
                let ea = site_map[&(a.piece.clone(), a.site.clone())];
                let eb = site_map[&(b.piece.clone(), b.site.clone())];
                let (x, y) = if ea <= eb { (ea, eb) } else { (eb, ea) };
                format!("annulus p{}.s{} p{}.s{} flip={}\n", x.0, x.1, y.0, y.1, u8::from(f))
            }
            Edge::Torus { a, b, gluing } => {
                let ea = site_map[&(a.piece.clone(), a.site.clone())];
                let eb = site_map[&(b.piece.clone(), b.site.clone())];
                let fwd = canonical_matrix(*gluing, opaque(a), opaque(b));
                let bwd = canonical_matrix(mat_inv(*gluing), opaque(b), opaque(a));
                let render_t = |x: (usize, usize), y: (usize, usize), m: [[i64; 2]; 2]| {
                    format!(
                        "torus p{}.s{} p{}.s{} m={},{},{},{}\n",
                        x.0, x.1, y.0, y.1, m[0][0], m[0][1], m[1][0], m[1][1]
                    )
                };
                let l1 = render_t(ea, eb, fwd);
                let l2 = render_t(eb, ea, bwd);
                if l1 <= l2 {
                    l1
                } else {
                    l2
                }
            }
            Edge::MoebiusBand { at } => {
                let e = site_map[&(at.piece.clone(), at.site.clone())];
                format!("mobius p{}.s{}\n", e.0, e.1)
            }
            Edge::KleinBottle { at } => {
                let e = site_map[&(at.piece.clone(), at.site.clone())];
                format!("klein p{}.s{}\n", e.0, e.1)
            }
        };
        edge_lines.push(line);
    }
    edge_lines.sort();
    for l in edge_lines {
        out.push_str(&l);
    }
    out.into_bytes()
}

fn render_piece(
    idx: usize,
    piece: &Piece,
    pid: &PieceId,
    site_map: &BTreeMap<(PieceId, SiteId), (usize, usize)>,
) -> String {
    let site_name = |s: &SiteId| {
        let (p, k) = site_map[&(pid.clone(), s.clone())];
        debug_assert_eq!(p, idx);
        format!("s{k}")
    };
    let circles = |base: &BaseSurface| {
        base.circles
            .iter()
            .map(|c| {
                c.arcs
                    .iter()
                    .map(|a| match a {
                        Arc::FreeD0 => "d0".to_owned(),
                        Arc::AnnulusEnd(s) => format!("a:{}", site_name(s)),
                        Arc::TorusEnd(s) => format!("t:{}", site_name(s)),
                    })
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(";")
    };
    match piece {
        Piece::Seifert(b) => {
            let fibres: String =
                b.fibres.iter().map(|f| format!("({},{})", f.alpha, f.beta)).collect();
            format!(
                "p{idx} seifert {}:{} circles={} b={} fibres={}\n",
                if b.base.orientable { "or" } else { "no" },
                b.base.genus,
                circles(&b.base),
                b.b,
                fibres
            )
        }
        Piece::IBundle(b) => format!(
            "p{idx} ibundle {}:{} circles={} twisted={}\n",
            if b.fiber_base.orientable { "or" } else { "no" },
            b.fiber_base.genus,
            circles(&b.fiber_base),
            u8::from(b.twisted)
        ),
        Piece::Simple(b) => {
            let sites: Vec<String> = b
                .sites
                .iter()
                .map(|(s, k)| {
                    format!(
                        "{}:{}",
                        if *k == crate::graph::SiteKind::Annulus { "a" } else { "t" },
                        site_name(s)
                    )
                })
                .collect();
            format!(
                "p{idx} simple chi0={} flags={:?} sites={}\n",
                b.chi_d0,
                b.flag,
                sites.join(",")
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format;
    use crate::graph::{ExceptionalFibre, GraphKind, IBundleBlock, SimpleFlag, SiteKind};

    fn pair_graph() -> DecompositionGraph {
        format::parse(
            "manifold m kind=w\n\
             piece p seifert base=or:0 circles=t:t1;d0,a:s b=0 fibres=\n\
             piece q seifert base=or:0 circles=t:t2;d0,a:s b=0 fibres=\n\
             piece x simple chi0=-2 flags=ss sites=t:u\n\
             piece y simple chi0=-2 flags=ss sites=t:u\n\
             edge e annulus p.s q.s flip=0\n\
             edge f1 torus p.t1 x.u m=0,1,1,0\n\
             edge f2 torus q.t2 y.u m=0,1,1,0\n",
        )
        .unwrap()
    }

    #[test]
    fn relabelled_copy_has_equal_encoding() {
        let g = pair_graph();
        let relabelled = format::parse(
            "manifold other kind=w\n\
             piece aa seifert base=or:0 circles=d0,a:z;t:w b=0 fibres=\n\
             piece bb seifert base=or:0 circles=t:v;d0,a:k b=0 fibres=\n\
             piece cc simple chi0=-2 flags=ss sites=t:m\n\
             piece dd simple chi0=-2 flags=ss sites=t:m\n\
             edge q1 annulus aa.z bb.k flip=0\n\
             edge q2 torus aa.w cc.m m=0,1,1,0\n\
             edge q3 torus bb.v dd.m m=0,1,1,0\n",
        )
        .unwrap();
        assert!(isomorphic(&g, &relabelled).unwrap());
    }

    #[test]
    fn decoration_normal_forms_collapse() {
        // {0;(2,-1)} and {-1;(2,1)} over the same closed base
        let mk = |b: i64, beta: i64| {
            let mut g = DecompositionGraph::new("m", GraphKind::W);
            g.add_piece(
                "p",
                Piece::Seifert(SeifertBlock::new(
                    BaseSurface::sphere(),
                    b,
                    vec![ExceptionalFibre::new(2, beta)],
                )),
            );
            g
        };
        assert!(isomorphic(&mk(0, -1), &mk(-1, 1)).unwrap());
    }

    #[test]
    fn claim2_pair_collapses() {
        let mut g1 = DecompositionGraph::new("m", GraphKind::Jsj);
        g1.add_piece(
            "mb",
            Piece::IBundle(IBundleBlock::new(BaseSurface::moebius(BoundaryCircle::of(
                vec![Arc::AnnulusEnd("c".into())],
            )))),
        );
        g1.add_piece(
            "s",
            Piece::Simple(SimpleBlock::new(
                -2,
                SimpleFlag::StronglySimple,
                vec![("a1".into(), SiteKind::Annulus)],
            )),
        );
        g1.add_edge(
            "e",
            Edge::Annulus {
                a: EndRef::new("mb", "c"),
                b: EndRef::new("s", "a1"),
                flip: false,
            },
        );
        let mut g2 = g1.clone();
        g2.pieces.insert(
            "mb".into(),
            Piece::Seifert(SeifertBlock::new(
                BaseSurface::disk(BoundaryCircle::d0_annulus("c")),
                0,
                vec![ExceptionalFibre::new(2, 1)],
            )),
        );
        assert!(isomorphic(&g1, &g2).unwrap());
    }

    #[test]
    fn distinct_fibres_distinguish() {
        let mk = |alpha: i64| {
            let mut g = DecompositionGraph::new("m", GraphKind::W);
            g.add_piece(
                "p",
                Piece::Seifert(SeifertBlock::new(
                    BaseSurface::sphere(),
                    -1,
                    vec![ExceptionalFibre::new(alpha, 1)],
                )),
            );
            g
        };
        assert!(!isomorphic(&mk(2), &mk(3)).unwrap());
    }

    #[test]
    fn flip_flag_symmetrmain_invariance() {
        // toggling one end's circle direction and the flag together is a move
        let g1 = format::parse(
            "manifold m kind=w\n\
             piece h seifert base=or:0 circles=d0,a:x,d0,a:y,d0,a:z b=0 fibres=\n\
             piece s simple chi0=-2 flags=ss sites=a:a1\n\
             edge e annulus h.x h.z flip=0\n\
             edge f annulus h.y s.a1 flip=0\n",
        )
        .unwrap();
        let g2 = format::parse(
            "manifold m kind=w\n\
             piece h seifert base=or:0 circles=d0,a:z,d0,a:y,d0,a:x b=0 fibres=\n\
             piece s simple chi0=-2 flags=ss sites=a:a1\n\
             edge e annulus h.x h.z flip=0\n\
             edge f annulus h.y s.a1 flip=1\n",
        )
        .unwrap();
        // g2 is g1 with the hexagon reflected: self-edge flag unchanged,
        // two-piece edge flag toggled
        assert!(isomorphic(&g1, &g2).unwrap());
        // but toggling the self-edge flag alone changes the manifold
        let g3 = format::parse(
            "manifold m kind=w\n\
             piece h seifert base=or:0 circles=d0,a:x,d0,a:y,d0,a:z b=0 fibres=\n\
             piece s simple chi0=-2 flags=ss sites=a:a1\n\
             edge e annulus h.x h.z flip=1\n\
             edge f annulus h.y s.a1 flip=0\n",
        )
        .unwrap();
        assert!(!isomorphic(&g1, &g3).unwrap());
    }

    #[test]
    fn torus_framing_moves_are_quotiented() {
        let mk = |m: &str| {
            format::parse(&format!(
                "manifold m kind=jsj\n\
                 piece p seifert base=or:0 circles=t:t1;t:t2;d0 b=0 fibres=\n\
                 piece q seifert base=or:0 circles=t:u1;d0 b=0 fibres=(2,1)(3,1)\n\
                 piece r seifert base=or:0 circles=t:u2;d0 b=0 fibres=(2,1)(3,1)\n\
                 edge e1 torus p.t1 q.u1 m={m}\n\
                 edge e2 torus p.t2 r.u2 m=0,1,1,0\n"
            ))
            .unwrap()
        };
        // a section twist at one end: [[0,1],[1,0]] vs [[0,1],[1,-2]]
        let g1 = mk("0,1,1,0");
        let g2 = mk("0,1,1,-2");
        assert!(isomorphic(&g1, &g2).unwrap());
        // but fibre-to-fibre vs fibre-to-section gluing differ
        let g3 = mk("1,0,2,1");
        assert!(!isomorphic(&g1, &g3).unwrap());
    }

    #[test]
    fn canonical_form_deterministic() {
        let g = pair_graph();
        let c1 = canonical_form(&g).unwrap();
        let c2 = canonical_form(&g).unwrap();
        assert_eq!(c1, c2);
        assert!(!c1.hex().is_empty());
    }
}
