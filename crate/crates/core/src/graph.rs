//! Pieces, edges and the decorated decomposition graph, with structural
//! validation and boundary Euler characteristic.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ids::{EdgeId, PieceId, SiteId};
use crate::surface::{Arc, ArcRef, BaseSurface};

/// An exceptional fibre (alpha, beta) of a Seifert fibration.
///
/// Graph-level validity requires alpha >= 2; normalization routines also
/// accept alpha = 1 fibres and absorb them.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExceptionalFibre {
    pub alpha: i64,
    pub beta: i64,
}

impl ExceptionalFibre {
    pub fn new(alpha: i64, beta: i64) -> Self {
        Self { alpha, beta }
    }
}

/// A Seifert fibred piece. For a bounded base the obstruction term is
/// absorbed into a section meeting every boundary component, so b = 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeifertBlock {
    pub base: BaseSurface,
    pub b: i64,
    pub fibres: Vec<ExceptionalFibre>,
}

impl SeifertBlock {
    /// Fibres are kept sorted so serialization is byte-stable.
    pub fn new(base: BaseSurface, b: i64, mut fibres: Vec<ExceptionalFibre>) -> Self {
        fibres.sort();
        Self { base, b, fibres }
    }
}

/// An I-bundle piece over `fiber_base`; `twisted` holds exactly when the
/// fiber base is non-orientable (orientable total space).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IBundleBlock {
    pub fiber_base: BaseSurface,
    pub twisted: bool,
}

impl IBundleBlock {
    pub fn new(fiber_base: BaseSurface) -> Self {
        let twisted = !fiber_base.orientable;
        Self { fiber_base, twisted }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SimpleFlag {
    StronglySimple,
    SpecialSimple,
}

/// An opaque simple piece: the engine trusts the declared flag and records
/// only the attachment sites and the Euler characteristic of its free boundary.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SimpleBlock {
    pub chi_d0: i64,
    pub flag: SimpleFlag,
    pub sites: Vec<(SiteId, SiteKind)>,
}

impl SimpleBlock {
    pub fn new(chi_d0: i64, flag: SimpleFlag, mut sites: Vec<(SiteId, SiteKind)>) -> Self {
        sites.sort();
        Self { chi_d0, flag, sites }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SiteKind {
    Annulus,
    Torus,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Piece {
    Seifert(SeifertBlock),
    IBundle(IBundleBlock),
    Simple(SimpleBlock),
}

impl Piece {
    pub fn sites(&self) -> Vec<(SiteId, SiteKind)> {
        match self {
            Piece::Seifert(b) => surface_sites(&b.base),
            Piece::IBundle(b) => surface_sites(&b.fiber_base),
            Piece::Simple(b) => b.sites.clone(),
        }
    }

    pub fn site_kind(&self, site: &SiteId) -> Option<SiteKind> {
        self.sites().into_iter().find(|(s, _)| s == site).map(|(_, k)| k)
    }

    /// Position of an annulus or torus site on the piece's base surface.
    pub fn site_arc(&self, site: &SiteId) -> Option<ArcRef> {
        match self {
            Piece::Seifert(b) => b.base.find_site(site),
            Piece::IBundle(b) => b.fiber_base.find_site(site),
            Piece::Simple(_) => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Piece::Seifert(_) => "seifert",
            Piece::IBundle(_) => "ibundle",
            Piece::Simple(_) => "simple",
        }
    }
}

fn surface_sites(s: &BaseSurface) -> Vec<(SiteId, SiteKind)> {
    let mut out = Vec::new();
    for (_, arc) in s.arcs() {
        match arc {
            Arc::AnnulusEnd(site) => out.push((site.clone(), SiteKind::Annulus)),
            Arc::TorusEnd(site) => out.push((site.clone(), SiteKind::Torus)),
            Arc::FreeD0 => {}
        }
    }
    out
}

/// One end of an edge: a site on a piece.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EndRef {
    pub piece: PieceId,
    pub site: SiteId,
}

impl EndRef {
    pub fn new(piece: impl Into<PieceId>, site: impl Into<SiteId>) -> Self {
        Self { piece: piece.into(), site: site.into() }
    }
}

/// A splitting surface of the decomposition. Annulus and torus edges join two
/// sites; one-sided Moebius band and Klein bottle surfaces of a geometric
/// decomposition attach to a single site.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Edge {
    Annulus { a: EndRef, b: EndRef, flip: bool },
    Torus { a: EndRef, b: EndRef, gluing: [[i64; 2]; 2] },
    MoebiusBand { at: EndRef },
    KleinBottle { at: EndRef },
}

impl Edge {
    pub fn ends(&self) -> Vec<&EndRef> {
        match self {
            Edge::Annulus { a, b, .. } | Edge::Torus { a, b, .. } => vec![a, b],
            Edge::MoebiusBand { at } | Edge::KleinBottle { at } => vec![at],
        }
    }

    pub fn site_kind_required(&self) -> SiteKind {
        match self {
            Edge::Annulus { .. } | Edge::MoebiusBand { .. } => SiteKind::Annulus,
            Edge::Torus { .. } | Edge::KleinBottle { .. } => SiteKind::Torus,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Edge::Annulus { .. } => "annulus",
            Edge::Torus { .. } => "torus",
            Edge::MoebiusBand { .. } => "mobius",
            Edge::KleinBottle { .. } => "klein",
        }
    }

    pub fn is_marker(&self) -> bool {
        matches!(self, Edge::MoebiusBand { .. } | Edge::KleinBottle { .. })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GraphKind {
    W,
    Jsj,
    Geometric,
}

impl GraphKind {
    pub fn name(&self) -> &'static str {
        match self {
            GraphKind::W => "w",
            GraphKind::Jsj => "jsj",
            GraphKind::Geometric => "geometric",
        }
    }
}

/// Snapshot taken before a matched-annulus merge, so the merge can be
/// undone exactly. Witnesses are working state: they are not serialized
/// and do not take part in isomorphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeWitness {
    pub merged_edge: EdgeId,
    pub pre_pieces: BTreeMap<PieceId, Piece>,
    pub pre_edges: BTreeMap<EdgeId, Edge>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionGraph {
    pub name: String,
    pub kind: GraphKind,
    pub pieces: BTreeMap<PieceId, Piece>,
    pub edges: BTreeMap<EdgeId, Edge>,
    pub witnesses: Vec<MergeWitness>,
}

impl DecompositionGraph {
    pub fn new(name: impl Into<String>, kind: GraphKind) -> Self {
        Self {
            name: name.into(),
            kind,
            pieces: BTreeMap::new(),
            edges: BTreeMap::new(),
            witnesses: Vec::new(),
        }
    }

    pub fn add_piece(&mut self, id: impl Into<PieceId>, piece: Piece) -> &mut Self {
        self.pieces.insert(id.into(), piece);
        self
    }

    pub fn add_edge(&mut self, id: impl Into<EdgeId>, edge: Edge) -> &mut Self {
        self.edges.insert(id.into(), edge);
        self
    }

    pub fn piece(&self, id: &PieceId) -> Option<&Piece> {
        self.pieces.get(id)
    }

    pub fn edge(&self, id: &EdgeId) -> Option<&Edge> {
        self.edges.get(id)
    }

    /// Kind of the site referenced by an end, if the reference resolves.
    pub fn end_site_kind(&self, end: &EndRef) -> Option<SiteKind> {
        self.pieces.get(&end.piece)?.site_kind(&end.site)
    }

    pub fn is_connected(&self) -> bool {
        let Some(start) = self.pieces.keys().next() else {
            return false;
        };
        let mut seen: BTreeSet<&PieceId> = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(p) = stack.pop() {
            if !seen.insert(p) {
                continue;
            }
            for edge in self.edges.values() {
                let ends = edge.ends();
                if edge.is_marker() {
                    continue;
                }
                if ends.iter().any(|e| &e.piece == p) {
                    for e in ends {
                        if !seen.contains(&e.piece) {
                            stack.push(&e.piece);
                        }
                    }
                }
            }
        }
        seen.len() == self.pieces.len()
    }

    /// Sum over pieces of the Euler characteristic of the free part of
    /// their boundary. Gluings along circles contribute nothing.
    pub fn boundary_euler_characteristic(&self) -> Result<i64, GraphError> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(GraphError::Invalid(report));
        }
        Ok(self.boundary_chi_raw())
    }

    pub fn boundary_chi_raw(&self) -> i64 {
        self.pieces
            .values()
            .map(|p| match p {
                // the free boundary of a Seifert piece is vertical: annuli and tori
                Piece::Seifert(_) => 0,
                // horizontal boundary: two copies of the base, or its
                // orientation double cover when twisted
                Piece::IBundle(b) => 2 * b.fiber_base.euler_characteristic(),
                Piece::Simple(b) => b.chi_d0,
            })
            .sum()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();

        if self.pieces.is_empty() {
            v.push(Violation::Empty);
        }

        for (pid, piece) in &self.pieces {
            self.validate_piece(pid, piece, &mut v);
        }

        // site reference counts
        let mut use_count: BTreeMap<(PieceId, SiteId), usize> = BTreeMap::new();
        for edge in self.edges.values() {
            for end in edge.ends() {
                *use_count.entry((end.piece.clone(), end.site.clone())).or_default() += 1;
            }
        }
        for (pid, piece) in &self.pieces {
            for (site, _) in piece.sites() {
                let n = use_count.get(&(pid.clone(), site.clone())).copied().unwrap_or(0);
                if n != 1 {
                    v.push(Violation::SiteUseCount(pid.clone(), site, n));
                }
            }
        }

        for (eid, edge) in &self.edges {
            self.validate_edge(eid, edge, &mut v);
        }

        // two annulus edges whose ends sit on pairwise adjacent arcs are
        // parallel surfaces; a maximal non-parallel system cannot contain them
        let annuli: Vec<(&EdgeId, &EndRef, &EndRef)> = self
            .edges
            .iter()
            .filter_map(|(eid, e)| match e {
                Edge::Annulus { a, b, .. } => Some((eid, a, b)),
                _ => None,
            })
            .collect();
        for i in 0..annuli.len() {
            for j in (i + 1)..annuli.len() {
                let (e1, a1, b1) = annuli[i];
                let (e2, a2, b2) = annuli[j];
                let par = (self.ends_adjacent(a1, a2) && self.ends_adjacent(b1, b2))
                    || (self.ends_adjacent(a1, b2) && self.ends_adjacent(b1, a2));
                if par {
                    v.push(Violation::ParallelAnnuli(e1.clone(), e2.clone()));
                }
            }
        }

        if !self.pieces.is_empty() && !self.is_connected() {
            v.push(Violation::Disconnected);
        }

        // fibration-level rules need a structurally sound graph
        if v.is_empty() {
            self.validate_fibrations(&mut v);
        }

        v.sort();
        v.dedup();
        ValidationReport { violations: v }
    }

    fn validate_piece(&self, pid: &PieceId, piece: &Piece, v: &mut Vec<Violation>) {
        let surface = match piece {
            Piece::Seifert(b) => Some(&b.base),
            Piece::IBundle(b) => Some(&b.fiber_base),
            Piece::Simple(_) => None,
        };
        if let Some(s) = surface {
            for e in s.structural_errors() {
                v.push(Violation::PieceStructure(pid.clone(), e));
            }
        }
        match piece {
            Piece::Seifert(b) => {
                if !b.base.is_closed() && b.b != 0 {
                    v.push(Violation::PieceStructure(
                        pid.clone(),
                        "bounded base requires b = 0".to_owned(),
                    ));
                }
                for (ci, c) in b.base.circles.iter().enumerate() {
                    // a whole-circle attachment of a fibred base is a torus
                    if matches!(c.arcs.as_slice(), [Arc::AnnulusEnd(_)]) {
                        v.push(Violation::PieceStructure(
                            pid.clone(),
                            format!("circle {ci}: annulus end cannot occupy a whole circle"),
                        ));
                    }
                }
                for f in &b.fibres {
                    if f.alpha < 2 {
                        v.push(Violation::PieceStructure(
                            pid.clone(),
                            format!("exceptional fibre ({},{}) needs alpha >= 2", f.alpha, f.beta),
                        ));
                    }
                    if num_integer::gcd(f.alpha, f.beta) != 1 {
                        v.push(Violation::PieceStructure(
                            pid.clone(),
                            format!("exceptional fibre ({},{}) is not coprime", f.alpha, f.beta),
                        ));
                    }
                }
            }
            Piece::IBundle(b) => {
                if b.twisted == b.fiber_base.orientable {
                    v.push(Violation::PieceStructure(
                        pid.clone(),
                        "twisted must hold exactly for a non-orientable fiber base".to_owned(),
                    ));
                }
                for circle in &b.fiber_base.circles {
                    if circle.arcs.len() != 1 {
                        v.push(Violation::PieceStructure(
                            pid.clone(),
                            "I-bundle base circles carry whole-circle tags only".to_owned(),
                        ));
                    }
                    if circle.is_torus_end().is_some() {
                        v.push(Violation::PieceStructure(
                            pid.clone(),
                            "I-bundle base circles cannot be torus ends".to_owned(),
                        ));
                    }
                }
            }
            Piece::Simple(_) => {}
        }
        let mut seen = BTreeSet::new();
        for (site, _) in piece.sites() {
            if !seen.insert(site.clone()) {
                v.push(Violation::PieceStructure(
                    pid.clone(),
                    format!("site {site} declared more than once"),
                ));
            }
        }
    }

    fn validate_edge(&self, eid: &EdgeId, edge: &Edge, v: &mut Vec<Violation>) {
        for end in edge.ends() {
            match self.end_site_kind(end) {
                None => {
                    v.push(Violation::DanglingEnd(eid.clone(), end.piece.clone(), end.site.clone()));
                }
                Some(k) if k != edge.site_kind_required() => {
                    v.push(Violation::SiteKindMismatch(eid.clone(), end.piece.clone(), end.site.clone()));
                }
                Some(_) => {}
            }
        }
        match edge {
            Edge::Torus { gluing, .. } => {
                let det = gluing[0][0] * gluing[1][1] - gluing[0][1] * gluing[1][0];
                if det.abs() != 1 {
                    v.push(Violation::NonUnimodular(eid.clone()));
                }
            }
            Edge::Annulus { a, b, .. } => {
                if a.piece == b.piece {
                    if a.site == b.site {
                        v.push(Violation::DegenerateAnnulus(eid.clone()));
                    } else if let Some(piece) = self.pieces.get(&a.piece) {
                        if let (Some(r1), Some(r2)) = (piece.site_arc(&a.site), piece.site_arc(&b.site)) {
                            if r1.circle == r2.circle {
                                let n = match piece {
                                    Piece::Seifert(blk) => blk.base.circles[r1.circle].arcs.len(),
                                    Piece::IBundle(blk) => blk.fiber_base.circles[r1.circle].arcs.len(),
                                    Piece::Simple(_) => 0,
                                };
                                if n > 0 && ((r1.arc + 1) % n == r2.arc || (r2.arc + 1) % n == r1.arc) {
                                    v.push(Violation::DegenerateAnnulus(eid.clone()));
                                }
                            }
                        }
                    }
                }
            }
            Edge::MoebiusBand { .. } | Edge::KleinBottle { .. } => {
                if self.kind != GraphKind::Geometric {
                    v.push(Violation::MarkerEdgeKind(eid.clone(), self.kind.name().to_owned()));
                }
            }
        }
    }

    fn validate_fibrations(&self, v: &mut Vec<Violation>) {
        use crate::rewrite;
        for (eid, edge) in &self.edges {
            match edge {
                Edge::Annulus { a, b, .. } => {
                    let both_ibundle = self.end_is_ibundle(a) && self.end_is_ibundle(b);
                    if both_ibundle && !self.is_exceptional_self_ibundle(eid) {
                        v.push(Violation::AdjacentIBundles(eid.clone()));
                    }
                    let matched = rewrite::annulus_edge_matched(self, edge);
                    match self.kind {
                        GraphKind::W => {
                            if !matched && self.boundary_chi_raw() == 0 {
                                // toral-boundary manifolds force every annulus
                                // edge to run between matching fibred sides
                                v.push(Violation::ToralAnnulusNotFibred(eid.clone()));
                            }
                        }
                        GraphKind::Jsj | GraphKind::Geometric => {
                            if matched {
                                v.push(Violation::MatchedAnnulusInJsj(eid.clone()));
                            }
                        }
                    }
                }
                Edge::Torus { .. } => {
                    if rewrite::torus_edge_matched(self, edge) && !self.is_exceptional_self_torus(eid) {
                        v.push(Violation::MatchedTorus(eid.clone()));
                    }
                }
                _ => {}
            }
        }
    }

    fn end_is_ibundle(&self, end: &EndRef) -> bool {
        matches!(self.pieces.get(&end.piece), Some(Piece::IBundle(_)))
    }

    /// Whether two edge ends sit on cyclically adjacent arcs of one circle.
    fn ends_adjacent(&self, u: &EndRef, v: &EndRef) -> bool {
        if u.piece != v.piece || u.site == v.site {
            return false;
        }
        let Some(piece) = self.pieces.get(&u.piece) else { return false };
        let (Some(ru), Some(rv)) = (piece.site_arc(&u.site), piece.site_arc(&v.site)) else {
            return false;
        };
        if ru.circle != rv.circle {
            return false;
        }
        let n = match piece {
            Piece::Seifert(b) => b.base.circles[ru.circle].arcs.len(),
            Piece::IBundle(b) => b.fiber_base.circles[ru.circle].arcs.len(),
            Piece::Simple(_) => return false,
        };
        n > 0 && ((ru.arc + 1) % n == rv.arc || (rv.arc + 1) % n == ru.arc)
    }

    /// The whole graph is one product I-bundle over an annulus glued to
    /// itself: the exceptional presentation of an I-bundle over the torus
    /// or Klein bottle.
    pub fn is_exceptional_self_ibundle(&self, eid: &EdgeId) -> bool {
        if self.pieces.len() != 1 || self.edges.len() != 1 {
            return false;
        }
        let Some(Edge::Annulus { a, b, .. }) = self.edges.get(eid) else {
            return false;
        };
        if a.piece != b.piece {
            return false;
        }
        match self.pieces.get(&a.piece) {
            Some(Piece::IBundle(ib)) => {
                ib.fiber_base.orientable
                    && ib.fiber_base.genus == 0
                    && ib.fiber_base.circles.len() == 2
                    && ib
                        .fiber_base
                        .circles
                        .iter()
                        .all(|c| matches!(c.arcs.as_slice(), [Arc::AnnulusEnd(_)]))
            }
            _ => false,
        }
    }

    /// The whole graph is one T2 x I piece glued to itself along a torus:
    /// the torus-bundle presentation, where matching fibrations are the
    /// recognized exceptional situation rather than a defect.
    pub fn is_exceptional_self_torus(&self, eid: &EdgeId) -> bool {
        if self.pieces.len() != 1 || self.edges.len() != 1 {
            return false;
        }
        let Some(Edge::Torus { a, b, .. }) = self.edges.get(eid) else {
            return false;
        };
        if a.piece != b.piece {
            return false;
        }
        match self.pieces.get(&a.piece) {
            Some(Piece::Seifert(blk)) => crate::classify::is_t2xi_fully_attached(blk),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Error)]
pub enum Violation {
    #[error("graph has no pieces")]
    Empty,
    #[error("graph is not connected")]
    Disconnected,
    #[error("piece {0}: {1}")]
    PieceStructure(PieceId, String),
    #[error("piece {0}: site {1} referenced by {2} edge ends")]
    SiteUseCount(PieceId, SiteId, usize),
    #[error("edge {0}: end {1}.{2} does not resolve to a site")]
    DanglingEnd(EdgeId, PieceId, SiteId),
    #[error("edge {0}: site kind mismatch at {1}.{2}")]
    SiteKindMismatch(EdgeId, PieceId, SiteId),
    #[error("edge {0}: torus gluing matrix must have determinant +-1")]
    NonUnimodular(EdgeId),
    #[error("edge {0}: degenerate annulus edge")]
    DegenerateAnnulus(EdgeId),
    #[error("edges {0} and {1}: parallel annuli")]
    ParallelAnnuli(EdgeId, EdgeId),
    #[error("edge {0}: adjacent I-bundles")]
    AdjacentIBundles(EdgeId),
    #[error("edge {0}: matched fibrations across a torus edge")]
    MatchedTorus(EdgeId),
    #[error("edge {0}: matched annulus in JSJ graph")]
    MatchedAnnulusInJsj(EdgeId),
    #[error("edge {0}: non-fibred annulus side in a toral-boundary graph")]
    ToralAnnulusNotFibred(EdgeId),
    #[error("edge {0}: marker edge not allowed in {1} graph")]
    MarkerEdgeKind(EdgeId, String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph is invalid: {}", format_report(.0))]
    Invalid(ValidationReport),
    #[error("operation requires a graph of kind {expected}, got {got}")]
    WrongKind { expected: &'static str, got: &'static str },
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("unknown piece {0}")]
    UnknownPiece(PieceId),
    #[error("{0}")]
    Unsupported(String),
}

fn format_report(r: &ValidationReport) -> String {
    r.violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::BoundaryCircle;

    fn torus_with_one_d0_circle() -> BaseSurface {
        BaseSurface::new(true, 1, vec![BoundaryCircle::whole_d0()])
    }

    #[test]
    fn single_seifert_block_is_valid() {
        let mut g = DecompositionGraph::new("m", GraphKind::W);
        g.add_piece("p", Piece::Seifert(SeifertBlock::new(torus_with_one_d0_circle(), 0, vec![])));
        assert!(g.validate().is_valid());
        assert_eq!(g.boundary_euler_characteristic().unwrap(), 0);
    }

    #[test]
    fn adjacent_ibundles_flagged() {
        let mut g = DecompositionGraph::new("m", GraphKind::W);
        let tpd = || {
            BaseSurface::new(
                true,
                0,
                vec![
                    BoundaryCircle::of(vec![Arc::AnnulusEnd("s".into())]),
                    BoundaryCircle::whole_d0(),
                    BoundaryCircle::whole_d0(),
                ],
            )
        };
        g.add_piece("p", Piece::IBundle(IBundleBlock::new(tpd())));
        g.add_piece("q", Piece::IBundle(IBundleBlock::new(tpd())));
        g.add_edge(
            "e",
            Edge::Annulus { a: EndRef::new("p", "s"), b: EndRef::new("q", "s"), flip: false },
        );
        let report = g.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::AdjacentIBundles(_))));
    }

    #[test]
    fn ibundle_over_twice_punctured_disk_boundary_chi() {
        let tpd = BaseSurface::new(
            true,
            0,
            vec![
                BoundaryCircle::whole_d0(),
                BoundaryCircle::whole_d0(),
                BoundaryCircle::whole_d0(),
            ],
        );
        let mut g = DecompositionGraph::new("m", GraphKind::W);
        g.add_piece("p", Piece::IBundle(IBundleBlock::new(tpd)));
        assert_eq!(g.boundary_euler_characteristic().unwrap(), -2);
    }

    #[test]
    fn two_seifert_blocks_torus_edge_chi_zero() {
        let mk = || {
            SeifertBlock::new(
                BaseSurface::annulus(BoundaryCircle::torus("t"), BoundaryCircle::whole_d0()),
                0,
                vec![ExceptionalFibre::new(2, 1)],
            )
        };
        let mut g = DecompositionGraph::new("m", GraphKind::Jsj);
        g.add_piece("p", Piece::Seifert(mk()));
        g.add_piece("q", Piece::Seifert(mk()));
        g.add_edge(
            "e",
            Edge::Torus {
                a: EndRef::new("p", "t"),
                b: EndRef::new("q", "t"),
                gluing: [[0, 1], [1, 0]],
            },
        );
        assert_eq!(g.boundary_euler_characteristic().unwrap(), 0);
    }

    #[test]
    fn dangling_site_and_disconnected_flagged() {
        let mut g = DecompositionGraph::new("m", GraphKind::W);
        g.add_piece(
            "p",
            Piece::Seifert(SeifertBlock::new(
                BaseSurface::disk(BoundaryCircle::d0_annulus("s")),
                0,
                vec![],
            )),
        );
        g.add_piece("q", Piece::Seifert(SeifertBlock::new(torus_with_one_d0_circle(), 0, vec![])));
        let report = g.validate();
        assert!(report.violations.iter().any(|v| matches!(v, Violation::SiteUseCount(_, _, 0))));
        assert!(report.violations.contains(&Violation::Disconnected));
    }

    #[test]
    fn validate_is_order_insensitive() {
        let mk = |chi| Piece::Simple(SimpleBlock::new(chi, SimpleFlag::StronglySimple, vec![]));
        let mut g1 = DecompositionGraph::new("m", GraphKind::W);
        g1.add_piece("a", mk(-1)).add_piece("b", mk(-2));
        let mut g2 = DecompositionGraph::new("m", GraphKind::W);
        g2.add_piece("b", mk(-2)).add_piece("a", mk(-1));
        assert_eq!(g1.validate(), g2.validate());
    }
}
