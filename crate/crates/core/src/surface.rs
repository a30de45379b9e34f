//! Base surfaces of fibred pieces: compact 2-manifolds with boundary circles
//! subdivided into tagged arcs, plus arc gluing on an explicit cell complex.
//!
//! A surface is stored abstractly (orientability, genus, boundary circles).
//! Gluing two annulus-end arcs rebuilds the surface as a polygon complex,
//! identifies the two boundary edges, and recomputes Euler characteristic,
//! orientability, genus and the boundary arc structure from the complex.
//!
//! Convention: for orientable surfaces the stored cyclic order of every
//! boundary circle is the one induced by a single chosen orientation of the
//! surface. Gluing with `reversing = false` identifies the arcs against
//! those stored directions (the orientation-compatible gluing).

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ids::SiteId;

/// One arc of a boundary circle.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arc {
    /// Lies in the boundary of the ambient manifold.
    FreeD0,
    /// End of a canonical annulus, labelled by its attachment site.
    AnnulusEnd(SiteId),
    /// Whole-circle end of a canonical torus; must be alone on its circle.
    TorusEnd(SiteId),
}

impl Arc {
    pub fn site(&self) -> Option<&SiteId> {
        match self {
            Arc::FreeD0 => None,
            Arc::AnnulusEnd(s) | Arc::TorusEnd(s) => Some(s),
        }
    }

    pub fn is_free(&self) -> bool {
        matches!(self, Arc::FreeD0)
    }
}

/// A boundary circle as a cyclic list of arcs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoundaryCircle {
    pub arcs: Vec<Arc>,
}

impl BoundaryCircle {
    pub fn of(arcs: Vec<Arc>) -> Self {
        Self { arcs }
    }

    /// A circle lying entirely in the ambient boundary.
    pub fn whole_d0() -> Self {
        Self { arcs: vec![Arc::FreeD0] }
    }

    /// A whole-circle torus attachment.
    pub fn torus(site: impl Into<SiteId>) -> Self {
        Self { arcs: vec![Arc::TorusEnd(site.into())] }
    }

    /// The common "one free arc, one annulus arc" circle.
    pub fn d0_annulus(site: impl Into<SiteId>) -> Self {
        Self { arcs: vec![Arc::FreeD0, Arc::AnnulusEnd(site.into())] }
    }

    pub fn is_torus_end(&self) -> Option<&SiteId> {
        match self.arcs.as_slice() {
            [Arc::TorusEnd(s)] => Some(s),
            _ => None,
        }
    }
}

/// Position of an arc: (circle index, arc index within the circle).
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArcRef {
    pub circle: usize,
    pub arc: usize,
}

impl ArcRef {
    pub fn new(circle: usize, arc: usize) -> Self {
        Self { circle, arc }
    }
}

/// A compact connected surface with boundary circles subdivided into arcs.
///
/// `genus` counts handles when orientable and crosscaps when not.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BaseSurface {
    pub orientable: bool,
    pub genus: u32,
    pub circles: Vec<BoundaryCircle>,
}

impl BaseSurface {
    pub fn new(orientable: bool, genus: u32, circles: Vec<BoundaryCircle>) -> Self {
        Self { orientable, genus, circles }
    }

    pub fn sphere() -> Self {
        Self::new(true, 0, vec![])
    }

    pub fn torus() -> Self {
        Self::new(true, 1, vec![])
    }

    pub fn projective_plane() -> Self {
        Self::new(false, 1, vec![])
    }

    pub fn klein_bottle() -> Self {
        Self::new(false, 2, vec![])
    }

    pub fn disk(circle: BoundaryCircle) -> Self {
        Self::new(true, 0, vec![circle])
    }

    pub fn annulus(c1: BoundaryCircle, c2: BoundaryCircle) -> Self {
        Self::new(true, 0, vec![c1, c2])
    }

    pub fn moebius(circle: BoundaryCircle) -> Self {
        Self::new(false, 1, vec![circle])
    }

    pub fn is_closed(&self) -> bool {
        self.circles.is_empty()
    }

    pub fn euler_characteristic(&self) -> i64 {
        let b = self.circles.len() as i64;
        let g = i64::from(self.genus);
        if self.orientable {
            2 - 2 * g - b
        } else {
            2 - g - b
        }
    }

    pub fn arc(&self, r: ArcRef) -> Option<&Arc> {
        self.circles.get(r.circle).and_then(|c| c.arcs.get(r.arc))
    }

    /// Iterate all arcs with their positions.
    pub fn arcs(&self) -> impl Iterator<Item = (ArcRef, &Arc)> {
        self.circles.iter().enumerate().flat_map(|(ci, c)| {
            c.arcs.iter().enumerate().map(move |(ai, a)| (ArcRef::new(ci, ai), a))
        })
    }

    /// Position of the arc carrying the given site id, if any.
    pub fn find_site(&self, site: &SiteId) -> Option<ArcRef> {
        self.arcs().find(|(_, a)| a.site() == Some(site)).map(|(r, _)| r)
    }

    /// Structural defects of the surface data itself.
    pub fn structural_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !self.orientable && self.genus == 0 {
            errs.push("non-orientable surface must have genus >= 1".to_owned());
        }
        for (ci, c) in self.circles.iter().enumerate() {
            if c.arcs.is_empty() {
                errs.push(format!("circle {ci} has no arcs"));
                continue;
            }
            let n = c.arcs.len();
            for (ai, a) in c.arcs.iter().enumerate() {
                match a {
                    Arc::TorusEnd(_) if n != 1 => {
                        errs.push(format!("circle {ci}: torus end must occupy the whole circle"));
                    }
                    Arc::FreeD0 if n > 1 && c.arcs[(ai + 1) % n].is_free() => {
                        errs.push(format!("circle {ci}: adjacent free arcs must be merged"));
                    }
                    _ => {}
                }
            }
        }
        errs
    }

    /// Glue an annulus-end arc of `self` to one of `other`.
    pub fn glue_arcs(
        &self,
        my_arc: ArcRef,
        other: &BaseSurface,
        other_arc: ArcRef,
        reversing: bool,
    ) -> Result<GlueOutcome, GlueError> {
        check_annulus_arc(self, my_arc)?;
        check_annulus_arc(other, other_arc)?;
        let mut cx = Complex::new();
        cx.add_surface(self, 0);
        cx.add_surface(other, 1);
        let e1 = cx.arc_edge(0, my_arc);
        let e2 = cx.arc_edge(1, other_arc);
        cx.identify(e1, e2, reversing);
        let expected_chi = self.euler_characteristic() + other.euler_characteristic() - 1;
        cx.assemble(expected_chi)
    }

    /// Glue two distinct, non-adjacent annulus-end arcs of `self` to each other.
    pub fn self_glue_arcs(
        &self,
        arc1: ArcRef,
        arc2: ArcRef,
        reversing: bool,
    ) -> Result<GlueOutcome, GlueError> {
        check_annulus_arc(self, arc1)?;
        check_annulus_arc(self, arc2)?;
        if arc1 == arc2 {
            return Err(GlueError::SameArc);
        }
        if arc1.circle == arc2.circle {
            let n = self.circles[arc1.circle].arcs.len();
            let (i, j) = (arc1.arc, arc2.arc);
            if (i + 1) % n == j || (j + 1) % n == i {
                return Err(GlueError::AdjacentArcs);
            }
        }
        let mut cx = Complex::new();
        cx.add_surface(self, 0);
        let e1 = cx.arc_edge(0, arc1);
        let e2 = cx.arc_edge(0, arc2);
        cx.identify(e1, e2, reversing);
        let expected_chi = self.euler_characteristic() - 1;
        cx.assemble(expected_chi)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GlueError {
    #[error("arc reference out of range")]
    BadArcRef,
    #[error("arc is not an annulus end")]
    NotAnnulusEnd,
    #[error("cannot glue an arc to itself")]
    SameArc,
    #[error("cannot glue adjacent arcs of one circle")]
    AdjacentArcs,
}

fn check_annulus_arc(s: &BaseSurface, r: ArcRef) -> Result<(), GlueError> {
    match s.arc(r) {
        None => Err(GlueError::BadArcRef),
        Some(Arc::AnnulusEnd(_)) => Ok(()),
        Some(_) => Err(GlueError::NotAnnulusEnd),
    }
}

/// Where a surviving tagged arc ended up after a gluing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcFate {
    /// 0 = first input surface, 1 = second.
    pub input: usize,
    pub from: ArcRef,
    pub to: ArcRef,
    /// True if the arc's stored direction is reversed in the output circle.
    pub reversed: bool,
}

/// Result of a gluing: the new surface plus the fate of every site-carrying arc.
#[derive(Clone, Debug)]
pub struct GlueOutcome {
    pub surface: BaseSurface,
    pub fates: Vec<ArcFate>,
}

impl GlueOutcome {
    pub fn fate_of(&self, input: usize, from: ArcRef) -> Option<&ArcFate> {
        self.fates.iter().find(|f| f.input == input && f.from == from)
    }
}

// ---------------------------------------------------------------------------
// Polygon cell complex
// ---------------------------------------------------------------------------

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
struct Side {
    edge: usize,
    forward: bool,
}

#[derive(Clone, Debug)]
struct FreeEdgeInfo {
    input: usize,
    from: ArcRef,
    tag: Arc,
}

struct Complex {
    faces: Vec<Vec<Side>>,
    next_edge: usize,
    free_info: BTreeMap<usize, FreeEdgeInfo>,
    /// (input index, arc ref) -> edge carrying that arc
    arc_edges: BTreeMap<(usize, usize, usize), usize>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl Complex {
    fn new() -> Self {
        Self {
            faces: Vec::new(),
            next_edge: 0,
            free_info: BTreeMap::new(),
            arc_edges: BTreeMap::new(),
        }
    }

    fn fresh_edge(&mut self) -> usize {
        let e = self.next_edge;
        self.next_edge += 1;
        e
    }

    /// One polygon per surface: handle/crosscap word, then for each boundary
    /// circle a tether conjugating the circle's arc edges.
    fn add_surface(&mut self, s: &BaseSurface, input: usize) {
        let mut word = Vec::new();
        for _ in 0..s.genus {
            if s.orientable {
                let a = self.fresh_edge();
                let b = self.fresh_edge();
                word.push(Side { edge: a, forward: true });
                word.push(Side { edge: b, forward: true });
                word.push(Side { edge: a, forward: false });
                word.push(Side { edge: b, forward: false });
            } else {
                let c = self.fresh_edge();
                word.push(Side { edge: c, forward: true });
                word.push(Side { edge: c, forward: true });
            }
        }
        for (ci, circle) in s.circles.iter().enumerate() {
            let t = self.fresh_edge();
            word.push(Side { edge: t, forward: true });
            for (ai, arc) in circle.arcs.iter().enumerate() {
                let r = self.fresh_edge();
                word.push(Side { edge: r, forward: true });
                self.free_info.insert(
                    r,
                    FreeEdgeInfo { input, from: ArcRef::new(ci, ai), tag: arc.clone() },
                );
                self.arc_edges.insert((input, ci, ai), r);
            }
            word.push(Side { edge: t, forward: false });
        }
        self.faces.push(word);
    }

    fn arc_edge(&self, input: usize, r: ArcRef) -> usize {
        self.arc_edges[&(input, r.circle, r.arc)]
    }

    /// Identify two boundary edges. `parallel = true` matches the stored
    /// directions head-to-head (the direction-reversing gluing),
    /// `parallel = false` matches them anti-parallel.
    fn identify(&mut self, keep: usize, gone: usize, parallel: bool) {
        for face in &mut self.faces {
            for side in face.iter_mut() {
                if side.edge == gone {
                    *side = Side { edge: keep, forward: parallel };
                }
            }
        }
        self.free_info.remove(&keep);
        self.free_info.remove(&gone);
    }

    fn assemble(self, expected_chi: i64) -> Result<GlueOutcome, GlueError> {
        // Corner k of a face of length n sits between sides k-1 and k.
        let mut offsets = Vec::with_capacity(self.faces.len());
        let mut total = 0;
        for f in &self.faces {
            offsets.push(total);
            total += f.len();
        }
        let mut uf = UnionFind::new(total);
        // tail/head corner sets per edge
        let mut tail_rep: BTreeMap<usize, usize> = BTreeMap::new();
        let mut head_rep: BTreeMap<usize, usize> = BTreeMap::new();
        let mut occurrences: BTreeMap<usize, Vec<(usize, usize, bool)>> = BTreeMap::new();
        for (fi, face) in self.faces.iter().enumerate() {
            let n = face.len();
            for (k, side) in face.iter().enumerate() {
                let start = offsets[fi] + k;
                let end = offsets[fi] + (k + 1) % n;
                let (t, h) = if side.forward { (start, end) } else { (end, start) };
                if let Some(&r) = tail_rep.get(&side.edge) {
                    uf.union(r, t);
                } else {
                    tail_rep.insert(side.edge, t);
                }
                if let Some(&r) = head_rep.get(&side.edge) {
                    uf.union(r, h);
                } else {
                    head_rep.insert(side.edge, h);
                }
                occurrences.entry(side.edge).or_default().push((fi, k, side.forward));
            }
        }

        let n_edges = occurrences.len() as i64;
        let mut classes = std::collections::BTreeSet::new();
        for v in 0..total {
            classes.insert(uf.find(v));
        }
        let chi = classes.len() as i64 - n_edges + self.faces.len() as i64;
        assert_eq!(chi, expected_chi, "Euler characteristic bookkeeping mismatch");

        // Orientability: assign a flip to each face so that every interior
        // edge is traversed in opposite directions by its two occurrences.
        let mut flips: Vec<Option<bool>> = vec![None; self.faces.len()];
        let mut orientable = true;
        let mut constraints: Vec<Vec<(usize, bool)>> = vec![Vec::new(); self.faces.len()];
        for occ in occurrences.values() {
            if occ.len() == 2 {
                let (f1, _, d1) = occ[0];
                let (f2, _, d2) = occ[1];
                if f1 == f2 {
                    if d1 == d2 {
                        orientable = false;
                    }
                } else {
                    // need (d1 xor flip1) != (d2 xor flip2)
                    let opposite = d1 != d2; // if already opposite, flips must agree
                    constraints[f1].push((f2, opposite));
                    constraints[f2].push((f1, opposite));
                }
            }
        }
        for start in 0..self.faces.len() {
            if flips[start].is_some() {
                continue;
            }
            flips[start] = Some(false);
            let mut queue = vec![start];
            while let Some(f) = queue.pop() {
                let cur = flips[f].unwrap();
                for &(g, same) in &constraints[f] {
                    let want = if same { cur } else { !cur };
                    match flips[g] {
                        None => {
                            flips[g] = Some(want);
                            queue.push(g);
                        }
                        Some(x) if x != want => orientable = false,
                        Some(_) => {}
                    }
                }
            }
        }
        let flips: Vec<bool> = flips.into_iter().map(|f| f.unwrap_or(false)).collect();

        // Boundary cycles over the free edges.
        let free_edges: Vec<usize> = self.free_info.keys().copied().collect();
        let mut endpoint: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        let mut face_of: BTreeMap<usize, usize> = BTreeMap::new();
        for &e in &free_edges {
            let t = uf.find(tail_rep[&e]);
            let h = uf.find(head_rep[&e]);
            endpoint.insert(e, (t, h));
            face_of.insert(e, occurrences[&e][0].0);
        }
        let cycles = if orientable {
            trace_directed(&free_edges, &endpoint, |e| flips[face_of[&e]])
        } else {
            trace_undirected(&free_edges, &endpoint)
        };

        // Assemble output circles, merging runs of free arcs.
        let mut circles = Vec::new();
        let mut fates = Vec::new();
        for cycle in cycles {
            let entries: Vec<(FreeEdgeInfo, bool)> = cycle
                .iter()
                .map(|&(e, reversed)| (self.free_info[&e].clone(), reversed))
                .collect();
            // rotate to start at a tagged arc when one exists
            let start = entries.iter().position(|(i, _)| !i.tag.is_free()).unwrap_or(0);
            let n = entries.len();
            let mut arcs = Vec::new();
            let ci = circles.len();
            let mut k = 0;
            while k < n {
                let (info, reversed) = &entries[(start + k) % n];
                if info.tag.is_free() {
                    // merge the whole run of free arcs into one
                    while k + 1 < n && entries[(start + k + 1) % n].0.tag.is_free() {
                        k += 1;
                    }
                    arcs.push(Arc::FreeD0);
                } else {
                    fates.push(ArcFate {
                        input: info.input,
                        from: info.from,
                        to: ArcRef::new(ci, arcs.len()),
                        reversed: *reversed,
                    });
                    arcs.push(info.tag.clone());
                }
                k += 1;
            }
            circles.push(BoundaryCircle { arcs });
        }

        let b = circles.len() as i64;
        let genus = if orientable {
            let twog = 2 - chi - b;
            assert!(twog >= 0 && twog % 2 == 0, "orientable genus bookkeeping mismatch");
            (twog / 2) as u32
        } else {
            let g = 2 - chi - b;
            assert!(g >= 1, "non-orientable genus bookkeeping mismatch");
            g as u32
        };
        Ok(GlueOutcome { surface: BaseSurface::new(orientable, genus, circles), fates })
    }
}

/// Boundary tracing for an oriented complex: each free edge is directed by
/// its (possibly flipped) face traversal and every boundary vertex has one
/// incoming and one outgoing edge. Items are (edge, reversed).
fn trace_directed(
    free_edges: &[usize],
    endpoint: &BTreeMap<usize, (usize, usize)>,
    flipped: impl Fn(usize) -> bool,
) -> Vec<Vec<(usize, bool)>> {
    let mut from_class: BTreeMap<usize, usize> = BTreeMap::new();
    for &e in free_edges {
        let (t, h) = endpoint[&e];
        let (from, _to) = if flipped(e) { (h, t) } else { (t, h) };
        from_class.insert(from, e);
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut cycles = Vec::new();
    for &start in free_edges {
        if seen.contains(&start) {
            continue;
        }
        let mut cycle = Vec::new();
        let mut e = start;
        loop {
            seen.insert(e);
            cycle.push((e, flipped(e)));
            let (t, h) = endpoint[&e];
            let to = if flipped(e) { t } else { h };
            e = from_class[&to];
            if e == start {
                break;
            }
        }
        cycles.push(cycle);
    }
    cycles
}

/// Undirected tracing for non-orientable complexes: every boundary vertex
/// class has exactly two incident free edge ends.
fn trace_undirected(
    free_edges: &[usize],
    endpoint: &BTreeMap<usize, (usize, usize)>,
) -> Vec<Vec<(usize, bool)>> {
    // incident edge ends per class: (edge, end) with end 0 = tail, 1 = head
    let mut incident: BTreeMap<usize, Vec<(usize, u8)>> = BTreeMap::new();
    for &e in free_edges {
        let (t, h) = endpoint[&e];
        incident.entry(t).or_default().push((e, 0));
        incident.entry(h).or_default().push((e, 1));
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut cycles = Vec::new();
    for &start in free_edges {
        if seen.contains(&start) {
            continue;
        }
        let mut cycle = Vec::new();
        // traverse the start edge forward: arrive at its head
        let mut e = start;
        let mut arrived_end: u8 = 1;
        loop {
            seen.insert(e);
            cycle.push((e, arrived_end == 0));
            let (t, h) = endpoint[&e];
            let class = if arrived_end == 1 { h } else { t };
            let ends = &incident[&class];
            let (ne, nend) = *ends
                .iter()
                .find(|&&(oe, oend)| (oe, oend) != (e, arrived_end))
                .expect("boundary vertex must have two edge ends");
            e = ne;
            // we enter the next edge at `nend`, so we arrive at its other end
            arrived_end = 1 - nend;
            if e == start && arrived_end == 1 {
                break;
            }
        }
        cycles.push(cycle);
    }
    cycles
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(site: &str) -> Arc {
        Arc::AnnulusEnd(site.into())
    }

    fn half_disk(site: &str) -> BaseSurface {
        BaseSurface::disk(BoundaryCircle::of(vec![Arc::FreeD0, a(site)]))
    }

    #[test]
    fn euler_characteristic_formulas() {
        assert_eq!(BaseSurface::sphere().euler_characteristic(), 2);
        assert_eq!(BaseSurface::torus().euler_characteristic(), 0);
        assert_eq!(BaseSurface::projective_plane().euler_characteristic(), 1);
        assert_eq!(BaseSurface::klein_bottle().euler_characteristic(), 0);
        assert_eq!(half_disk("x").euler_characteristic(), 1);
        assert_eq!(
            BaseSurface::moebius(BoundaryCircle::whole_d0()).euler_characteristic(),
            0
        );
    }

    #[test]
    fn glue_two_disks_gives_disk() {
        let s1 = half_disk("x");
        let s2 = half_disk("y");
        let out = s1
            .glue_arcs(ArcRef::new(0, 1), &s2, ArcRef::new(0, 1), false)
            .unwrap();
        let r = &out.surface;
        assert_eq!(r.euler_characteristic(), 1);
        assert!(r.orientable);
        assert_eq!(r.genus, 0);
        assert_eq!(r.circles.len(), 1);
        assert_eq!(r.circles[0].arcs, vec![Arc::FreeD0]);
    }

    #[test]
    fn glue_two_annuli_gives_pair_of_pants() {
        // each annulus: inner torus circle, outer circle split d0 / annulus arc
        let mk = |t: &str, s: &str| {
            BaseSurface::annulus(BoundaryCircle::torus(t), BoundaryCircle::d0_annulus(s))
        };
        let s1 = mk("t1", "x");
        let s2 = mk("t2", "y");
        let out = s1
            .glue_arcs(ArcRef::new(1, 1), &s2, ArcRef::new(1, 1), false)
            .unwrap();
        let r = &out.surface;
        assert_eq!(r.euler_characteristic(), -1);
        assert!(r.orientable);
        assert_eq!(r.genus, 0);
        assert_eq!(r.circles.len(), 3);
        let torus_circles = r.circles.iter().filter(|c| c.is_torus_end().is_some()).count();
        assert_eq!(torus_circles, 2);
        let d0_circles = r
            .circles
            .iter()
            .filter(|c| c.arcs == vec![Arc::FreeD0])
            .count();
        assert_eq!(d0_circles, 1);
    }

    #[test]
    fn hexagon_self_glue_straight_gives_annulus() {
        let hex = BaseSurface::disk(BoundaryCircle::of(vec![
            Arc::FreeD0,
            a("p"),
            Arc::FreeD0,
            a("q"),
            Arc::FreeD0,
            a("r"),
        ]));
        let out = hex
            .self_glue_arcs(ArcRef::new(0, 1), ArcRef::new(0, 5), false)
            .unwrap();
        let r = &out.surface;
        assert_eq!(r.euler_characteristic(), 0);
        assert!(r.orientable);
        assert_eq!(r.genus, 0);
        assert_eq!(r.circles.len(), 2);
        // the surviving annulus arc q keeps its direction
        let fate = out.fate_of(0, ArcRef::new(0, 3)).unwrap();
        assert!(!fate.reversed);
    }

    #[test]
    fn hexagon_self_glue_reversing_gives_moebius() {
        let hex = BaseSurface::disk(BoundaryCircle::of(vec![
            Arc::FreeD0,
            a("p"),
            Arc::FreeD0,
            a("q"),
            Arc::FreeD0,
            a("r"),
        ]));
        let out = hex
            .self_glue_arcs(ArcRef::new(0, 1), ArcRef::new(0, 5), true)
            .unwrap();
        let r = &out.surface;
        assert_eq!(r.euler_characteristic(), 0);
        assert!(!r.orientable);
        assert_eq!(r.genus, 1);
        assert_eq!(r.circles.len(), 1);
        assert_eq!(r.circles[0].arcs.len(), 2);
    }

    #[test]
    fn adjacent_self_glue_rejected() {
        let s = BaseSurface::disk(BoundaryCircle::of(vec![a("x"), Arc::FreeD0, a("y")]));
        // arcs 0 and 2 are cyclically adjacent on a 3-arc circle
        let err = s
            .self_glue_arcs(ArcRef::new(0, 0), ArcRef::new(0, 2), false)
            .unwrap_err();
        assert_eq!(err, GlueError::AdjacentArcs);
    }

    #[test]
    fn non_annulus_arc_rejected() {
        let s = BaseSurface::annulus(BoundaryCircle::torus("t"), BoundaryCircle::d0_annulus("x"));
        let err = s
            .self_glue_arcs(ArcRef::new(0, 0), ArcRef::new(1, 1), false)
            .unwrap_err();
        assert_eq!(err, GlueError::NotAnnulusEnd);
    }

    #[test]
    fn torus_circles_pass_through_unchanged() {
        let s1 = BaseSurface::annulus(BoundaryCircle::torus("t1"), BoundaryCircle::d0_annulus("x"));
        let s2 = half_disk("y");
        let out = s1
            .glue_arcs(ArcRef::new(1, 1), &s2, ArcRef::new(0, 1), false)
            .unwrap();
        let fate = out.fate_of(0, ArcRef::new(0, 0)).unwrap();
        let arc = out.surface.arc(fate.to).unwrap();
        assert_eq!(arc, &Arc::TorusEnd("t1".into()));
    }

    #[test]
    fn structural_errors_flag_bad_circles() {
        let s = BaseSurface::new(false, 0, vec![]);
        assert!(!s.structural_errors().is_empty());
        let s = BaseSurface::disk(BoundaryCircle::of(vec![Arc::FreeD0, Arc::FreeD0]));
        assert!(!s.structural_errors().is_empty());
        let s = BaseSurface::annulus(
            BoundaryCircle::of(vec![Arc::TorusEnd("t".into()), Arc::FreeD0]),
            BoundaryCircle::whole_d0(),
        );
        assert!(!s.structural_errors().is_empty());
    }
}
