//! Block taxonomy: the eight fibred building-block schemas, I-bundle kinds,
//! the simple/special-simple distinction, exceptional whole-manifold
//! recognition, the torus-bundle trace test, and the toral specializations.
//!
//! Schemas are plain data. Each one records a base (orientability, genus),
//! the multiset of boundary-circle skeletons, and the exceptional fibre
//! count; the matcher never special-cases an index.

use std::collections::BTreeSet;
use std::fmt;

use crate::graph::{
    DecompositionGraph, Edge, GraphError, IBundleBlock, Piece, SeifertBlock, SimpleFlag,
};
use crate::seifert::{self, SeifertData};
use crate::surface::BaseSurface;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BlockSchema {
    pub orientable: bool,
    pub genus: u32,
    /// Sorted multiset of circle skeletons ("t", "d0", "a,d0", ...).
    pub circles: &'static [&'static str],
    pub fibre_count: usize,
}

const fn schema(
    orientable: bool,
    genus: u32,
    circles: &'static [&'static str],
    fibre_count: usize,
) -> BlockSchema {
    BlockSchema { orientable, genus, circles, fibre_count }
}

/// The eight fibred building blocks. Indices with several rows accept any of
/// the listed boundary patterns; 8 covers zero or one exceptional fibre.
pub const FIG8_SCHEMAS: &[(u8, BlockSchema)] = &[
    // 1: hexagon disk, three free and three annulus arcs alternating
    (1, schema(true, 0, &["a,d0,a,d0,a,d0"], 0)),
    // 2: annulus base, one whole torus circle, one split circle
    (2, schema(true, 0, &["a,d0", "t"], 0)),
    // 3: pair of pants, all three circles torus ends
    (3, schema(true, 0, &["t", "t", "t"], 0)),
    // 4: disk base, one exceptional fibre
    (4, schema(true, 0, &["a,d0"], 1)),
    (4, schema(true, 0, &["d0"], 1)),
    // 5: disk base, two exceptional fibres
    (5, schema(true, 0, &["a,d0"], 2)),
    (5, schema(true, 0, &["d0"], 2)),
    // 6: annulus base, both circles torus ends, one exceptional fibre
    (6, schema(true, 0, &["t", "t"], 1)),
    // 7: disk base, whole torus circle, one exceptional fibre
    (7, schema(true, 0, &["t"], 1)),
    // 8: Moebius base, at most one exceptional fibre
    (8, schema(false, 1, &["t"], 0)),
    (8, schema(false, 1, &["t"], 1)),
    (8, schema(false, 1, &["a,d0"], 0)),
    (8, schema(false, 1, &["a,d0"], 1)),
    (8, schema(false, 1, &["d0"], 0)),
    (8, schema(false, 1, &["d0"], 1)),
];

/// The nine toral block types: the torus-boundary schemas among the eight
/// blocks with whole boundary circles independently retagged free or
/// attached, some but not all free. Types whose pattern coincides with a
/// Figure schema are shadowed by it in `classify_block`.
pub const TORAL_SCHEMAS: &[(u8, BlockSchema)] = &[
    (1, schema(true, 0, &["t", "t", "t"], 0)),
    (2, schema(true, 0, &["d0", "t", "t"], 0)),
    (3, schema(true, 0, &["d0", "d0", "t"], 0)),
    (4, schema(true, 0, &["t"], 2)),
    (5, schema(true, 0, &["t", "t"], 1)),
    (6, schema(true, 0, &["d0", "t"], 1)),
    (7, schema(true, 0, &["t"], 1)),
    (8, schema(false, 1, &["t"], 0)),
    (9, schema(false, 1, &["t"], 1)),
];

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IBundleKind {
    TwicePuncturedDisk,
    Moebius,
    PuncturedMoebius,
    Other,
}

impl fmt::Display for IBundleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IBundleKind::TwicePuncturedDisk => "twice-punctured-disk",
            IBundleKind::Moebius => "moebius",
            IBundleKind::PuncturedMoebius => "punctured-moebius",
            IBundleKind::Other => "other",
        };
        f.write_str(s)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockType {
    Fig8(u8),
    IBundle(IBundleKind),
    StronglySimple,
    SpecialSimpleOpaque,
    ToralFig(u8),
    Unrecognized,
}

impl fmt::Display for BlockType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockType::Fig8(k) => write!(f, "Fig8.{k}"),
            BlockType::IBundle(k) => write!(f, "IBundle({k})"),
            BlockType::StronglySimple => f.write_str("StronglySimple"),
            BlockType::SpecialSimpleOpaque => f.write_str("SpecialSimpleOpaque"),
            BlockType::ToralFig(k) => write!(f, "Toral.{k}"),
            BlockType::Unrecognized => f.write_str("Unrecognized"),
        }
    }
}

fn schema_matches(s: &BlockSchema, blk: &SeifertBlock) -> bool {
    blk.base.orientable == s.orientable
        && blk.base.genus == s.genus
        && blk.fibres.len() == s.fibre_count
        && seifert::circle_skeleton_multiset(&blk.base)
            == s.circles.iter().map(|c| (*c).to_owned()).collect::<Vec<_>>()
}

pub fn ibundle_kind(ib: &IBundleBlock) -> IBundleKind {
    let f = &ib.fiber_base;
    match (f.orientable, f.genus, f.circles.len()) {
        (true, 0, 3) => IBundleKind::TwicePuncturedDisk,
        (false, 1, 1) => IBundleKind::Moebius,
        (false, 1, 2) => IBundleKind::PuncturedMoebius,
        _ => IBundleKind::Other,
    }
}

pub fn classify_block(p: &Piece) -> BlockType {
    match p {
        Piece::Simple(b) => match b.flag {
            SimpleFlag::StronglySimple => BlockType::StronglySimple,
            SimpleFlag::SpecialSimple => BlockType::SpecialSimpleOpaque,
        },
        Piece::IBundle(ib) => BlockType::IBundle(ibundle_kind(ib)),
        Piece::Seifert(blk) => {
            for (k, s) in FIG8_SCHEMAS {
                if schema_matches(s, blk) {
                    return BlockType::Fig8(*k);
                }
            }
            let toral = blk
                .base
                .arcs()
                .all(|(_, a)| !matches!(a, crate::surface::Arc::AnnulusEnd(_)));
            if toral {
                for (k, s) in TORAL_SCHEMAS {
                    if schema_matches(s, blk) {
                        return BlockType::ToralFig(*k);
                    }
                }
            }
            BlockType::Unrecognized
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PieceTypeTag {
    StronglySimple,
    IBundle,
    Seifert,
}

/// The types a piece belongs to, with the known overlaps: the I-bundle over
/// the Moebius band is also Seifert fibred; the I-bundles over the twice
/// punctured disk and once punctured Moebius band are also strongly simple.
/// A Seifert piece that is simple is special simple, never strongly simple,
/// so declared special-simple opaque pieces count as Seifert.
pub fn piece_types(p: &Piece) -> BTreeSet<PieceTypeTag> {
    let mut set = BTreeSet::new();
    match p {
        Piece::Seifert(_) => {
            set.insert(PieceTypeTag::Seifert);
        }
        Piece::IBundle(ib) => {
            set.insert(PieceTypeTag::IBundle);
            match ibundle_kind(ib) {
                IBundleKind::Moebius => {
                    set.insert(PieceTypeTag::Seifert);
                }
                IBundleKind::TwicePuncturedDisk | IBundleKind::PuncturedMoebius => {
                    set.insert(PieceTypeTag::StronglySimple);
                }
                IBundleKind::Other => {}
            }
        }
        Piece::Simple(b) => {
            set.insert(match b.flag {
                SimpleFlag::StronglySimple => PieceTypeTag::StronglySimple,
                SimpleFlag::SpecialSimple => PieceTypeTag::Seifert,
            });
        }
    }
    set
}

/// Special simplicity of a piece with non-empty attachment boundary.
pub fn is_special_simple(p: &Piece) -> Result<bool, GraphError> {
    if p.sites().is_empty() {
        return Err(GraphError::Unsupported(
            "special simplicity needs a non-empty attachment boundary".to_owned(),
        ));
    }
    Ok(match p {
        Piece::Simple(b) => b.flag == SimpleFlag::SpecialSimple,
        // a Seifert piece that is simple admits an essential annulus in its
        // attachment boundary, so it is special simple
        Piece::Seifert(_) => true,
        Piece::IBundle(ib) => match ibundle_kind(ib) {
            // Seifert fibred via its alternate structure
            IBundleKind::Moebius => true,
            IBundleKind::TwicePuncturedDisk | IBundleKind::PuncturedMoebius => false,
            // the I-bundle over the annulus is T2 x I, which is fibred
            IBundleKind::Other => {
                ib.fiber_base.orientable && ib.fiber_base.genus == 0 && ib.fiber_base.circles.len() == 2
            }
        },
    })
}

// ---------------------------------------------------------------------------
// Exceptional whole manifolds
// ---------------------------------------------------------------------------

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExceptionalManifoldTag {
    IBundleOverTorus,
    IBundleOverKleinBottle,
    CircleBundleOverTorus,
    CircleBundleOverKleinBottle,
    CircleBundleOverAnnulus,
    CircleBundleOverMoebius,
    TorusBundleTracePm2,
    Rp2DoubleFibration,
    TangentCircleBundleKleinBottle,
    NotExceptional,
}

impl fmt::Display for ExceptionalManifoldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExceptionalManifoldTag::IBundleOverTorus => "I-bundle-over-torus",
            ExceptionalManifoldTag::IBundleOverKleinBottle => "I-bundle-over-Klein-bottle",
            ExceptionalManifoldTag::CircleBundleOverTorus => "circle-bundle-over-torus",
            ExceptionalManifoldTag::CircleBundleOverKleinBottle => "circle-bundle-over-Klein-bottle",
            ExceptionalManifoldTag::CircleBundleOverAnnulus => "circle-bundle-over-annulus",
            ExceptionalManifoldTag::CircleBundleOverMoebius => "circle-bundle-over-moebius",
            ExceptionalManifoldTag::TorusBundleTracePm2 => "torus-bundle-trace-pm2",
            ExceptionalManifoldTag::Rp2DoubleFibration => "RP2-double-fibration",
            ExceptionalManifoldTag::TangentCircleBundleKleinBottle => {
                "tangent-circle-bundle-Klein-bottle"
            }
            ExceptionalManifoldTag::NotExceptional => "none",
        };
        f.write_str(s)
    }
}

/// A T2 x I block with both boundary tori attached: annulus base, no
/// exceptional fibres, both circles whole torus ends.
pub fn is_t2xi_fully_attached(blk: &SeifertBlock) -> bool {
    blk.base.orientable
        && blk.base.genus == 0
        && blk.base.circles.len() == 2
        && blk.fibres.is_empty()
        && blk.base.circles.iter().all(|c| c.is_torus_end().is_some())
}

/// A T2 x I block in whole-circle form: annulus base, no exceptional
/// fibres, each circle either free or a torus end. Such a piece fibres over
/// the circle direction of any slope.
pub fn is_t2xi_whole_circles(blk: &SeifertBlock) -> bool {
    blk.base.orientable
        && blk.base.genus == 0
        && blk.base.circles.len() == 2
        && blk.fibres.is_empty()
        && blk.base.circles.iter().all(|c| c.arcs.len() == 1)
}

fn closed_base_is(s: &BaseSurface, orientable: bool, genus: u32) -> bool {
    s.is_closed() && s.orientable == orientable && s.genus == genus
}

fn all_free_boundary(s: &BaseSurface) -> bool {
    s.circles
        .iter()
        .all(|c| matches!(c.arcs.as_slice(), [crate::surface::Arc::FreeD0]))
}

/// Recognize the whole-manifold graphs whose W-decomposition is trivial (or
/// torus-bundle shaped): the manifolds with no canonical annulus or torus,
/// plus the two closed fibrations that arise from matching the non-unique
/// blocks. Expects a structurally valid graph.
pub fn recognize_exceptional(g: &DecompositionGraph) -> ExceptionalManifoldTag {
    use ExceptionalManifoldTag::*;
    if g.pieces.len() != 1 {
        return NotExceptional;
    }
    let (_pid, piece) = g.pieces.iter().next().expect("one piece");

    if g.edges.is_empty() {
        return match piece {
            Piece::IBundle(ib) => {
                if closed_base_is(&ib.fiber_base, true, 1) {
                    IBundleOverTorus
                } else if closed_base_is(&ib.fiber_base, false, 2) {
                    IBundleOverKleinBottle
                } else {
                    NotExceptional
                }
            }
            Piece::Seifert(blk) => {
                let data = SeifertData::of_block(blk);
                if closed_base_is(&blk.base, true, 1) && blk.fibres.is_empty() {
                    CircleBundleOverTorus
                } else if closed_base_is(&blk.base, false, 2) && blk.fibres.is_empty() {
                    CircleBundleOverKleinBottle
                } else if blk.base.orientable
                    && blk.base.genus == 0
                    && blk.base.circles.len() == 2
                    && blk.fibres.is_empty()
                    && all_free_boundary(&blk.base)
                {
                    CircleBundleOverAnnulus
                } else if !blk.base.orientable
                    && blk.base.genus == 1
                    && blk.base.circles.len() == 1
                    && blk.fibres.is_empty()
                    && all_free_boundary(&blk.base)
                {
                    CircleBundleOverMoebius
                } else if closed_base_is(&blk.base, false, 1)
                    && seifert::fibrations_equivalent(
                        &data,
                        &SeifertData::new(
                            BaseSurface::projective_plane(),
                            -1,
                            vec![
                                crate::graph::ExceptionalFibre::new(2, 1),
                                crate::graph::ExceptionalFibre::new(2, -1),
                            ],
                        ),
                    )
                {
                    Rp2DoubleFibration
                } else if closed_base_is(&blk.base, true, 0)
                    && seifert::fibrations_equivalent(
                        &data,
                        &SeifertData::new(
                            BaseSurface::sphere(),
                            0,
                            vec![
                                crate::graph::ExceptionalFibre::new(2, 1),
                                crate::graph::ExceptionalFibre::new(2, 1),
                                crate::graph::ExceptionalFibre::new(2, -1),
                                crate::graph::ExceptionalFibre::new(2, -1),
                            ],
                        ),
                    )
                {
                    TangentCircleBundleKleinBottle
                } else {
                    NotExceptional
                }
            }
            Piece::Simple(_) => NotExceptional,
        };
    }

    if g.edges.len() != 1 {
        return NotExceptional;
    }
    let (eid, edge) = g.edges.iter().next().expect("one edge");
    match (piece, edge) {
        // self-glued product I-bundle over the annulus
        (Piece::IBundle(_), Edge::Annulus { flip, .. }) if g.is_exceptional_self_ibundle(eid) => {
            if *flip {
                IBundleOverKleinBottle
            } else {
                IBundleOverTorus
            }
        }
        // self-glued T2 x I: a torus bundle over the circle
        (Piece::Seifert(_), Edge::Torus { gluing, .. }) if g.is_exceptional_self_torus(eid) => {
            match torus_bundle_classify(*gluing) {
                Ok(TorusBundleClass::CircleBundle) => TorusBundleTracePm2,
                _ => NotExceptional,
            }
        }
        _ => NotExceptional,
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum TorusBundleClass {
    /// The fibre torus is canonical; the manifold splits as a self-glued T2 x I.
    CanonicalTorus,
    /// Trace +-2: the manifold is a circle bundle over the torus or Klein bottle.
    CircleBundle,
}

pub fn torus_bundle_classify(h: [[i64; 2]; 2]) -> Result<TorusBundleClass, GraphError> {
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    if det.abs() != 1 {
        return Err(GraphError::Unsupported(format!(
            "holonomy matrix must be unimodular, determinant {det}"
        )));
    }
    let trace = h[0][0] + h[1][1];
    Ok(if trace.abs() == 2 {
        TorusBundleClass::CircleBundle
    } else {
        TorusBundleClass::CanonicalTorus
    })
}

// ---------------------------------------------------------------------------
// Closed simple Seifert pieces
// ---------------------------------------------------------------------------

/// Closed Seifert manifolds that are simple: finite first homology, fibred
/// over the sphere with at most three exceptional fibres or over the
/// projective plane with at most one.
pub fn closed_simple_seifert(d: &SeifertData) -> Result<bool, GraphError> {
    if !d.base.is_closed() {
        return Err(GraphError::Unsupported(
            "closed_simple_seifert requires a closed base".to_owned(),
        ));
    }
    let over_s2 = d.base.orientable && d.base.genus == 0;
    let over_rp2 = !d.base.orientable && d.base.genus == 1;
    if over_s2 && d.fibres.len() <= 3 {
        Ok(h1_finite(d))
    } else if over_rp2 && d.fibres.len() <= 1 {
        Ok(h1_finite(d))
    } else {
        Ok(false)
    }
}

/// Finiteness of H1 by the determinant of the standard presentation matrix,
/// computed exactly over the integers.
pub fn h1_finite(d: &SeifertData) -> bool {
    h1_presentation_determinant(d) != 0
}

/// Determinant of the abelianized presentation matrix. Over the sphere the
/// generators are the fibre h and one x per exceptional fibre; over the
/// projective plane a crosscap generator c is added together with the
/// relations 2h = 0 and sum x + b h + 2c = 0.
pub fn h1_presentation_determinant(d: &SeifertData) -> i128 {
    let n = d.fibres.len();
    if d.base.orientable {
        // columns: x_1..x_n, h
        let dim = n + 1;
        let mut m = vec![vec![0i128; dim]; dim];
        for (i, f) in d.fibres.iter().enumerate() {
            m[i][i] = i128::from(f.alpha);
            m[i][n] = i128::from(f.beta);
        }
        for j in 0..n {
            m[n][j] = 1;
        }
        m[n][n] = i128::from(d.b);
        determinant(m)
    } else {
        // columns: c, x_1..x_n, h
        let dim = n + 2;
        let mut m = vec![vec![0i128; dim]; dim];
        m[0][n + 1] = 2; // 2h = 0
        for (i, f) in d.fibres.iter().enumerate() {
            m[i + 1][i + 1] = i128::from(f.alpha);
            m[i + 1][n + 1] = i128::from(f.beta);
        }
        m[n + 1][0] = 2;
        for j in 0..n {
            m[n + 1][j + 1] = 1;
        }
        m[n + 1][n + 1] = i128::from(d.b);
        determinant(m)
    }
}

/// Laplace expansion; the matrices here are tiny.
pub fn determinant(m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    if n == 1 {
        return m[0][0];
    }
    let mut det = 0i128;
    for (j, &entry) in m[0].iter().enumerate() {
        if entry == 0 {
            continue;
        }
        let minor: Vec<Vec<i128>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, &v)| v)
                    .collect()
            })
            .collect();
        let sign = if j % 2 == 0 { 1 } else { -1 };
        det += sign * entry * determinant(minor);
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ExceptionalFibre;
    use crate::surface::{Arc, BoundaryCircle};

    fn fib(a: i64, b: i64) -> ExceptionalFibre {
        ExceptionalFibre::new(a, b)
    }

    #[test]
    fn hexagon_is_fig8_1() {
        let blk = SeifertBlock::new(
            BaseSurface::disk(BoundaryCircle::of(vec![
                Arc::FreeD0,
                Arc::AnnulusEnd("x".into()),
                Arc::FreeD0,
                Arc::AnnulusEnd("y".into()),
                Arc::FreeD0,
                Arc::AnnulusEnd("z".into()),
            ])),
            0,
            vec![],
        );
        assert_eq!(classify_block(&Piece::Seifert(blk)), BlockType::Fig8(1));
    }

    #[test]
    fn twice_punctured_disk_ibundle() {
        let tpd = BaseSurface::new(
            true,
            0,
            vec![
                BoundaryCircle::of(vec![Arc::AnnulusEnd("s".into())]),
                BoundaryCircle::whole_d0(),
                BoundaryCircle::whole_d0(),
            ],
        );
        let p = Piece::IBundle(IBundleBlock::new(tpd));
        assert_eq!(classify_block(&p), BlockType::IBundle(IBundleKind::TwicePuncturedDisk));
        assert_eq!(
            piece_types(&p),
            BTreeSet::from([PieceTypeTag::IBundle, PieceTypeTag::StronglySimple])
        );
    }

    #[test]
    fn disk_one_fibre_is_fig8_4() {
        let blk = SeifertBlock::new(
            BaseSurface::disk(BoundaryCircle::d0_annulus("s")),
            0,
            vec![fib(2, 1)],
        );
        assert_eq!(classify_block(&Piece::Seifert(blk)), BlockType::Fig8(4));
    }

    #[test]
    fn moebius_ibundle_types() {
        let p = Piece::IBundle(IBundleBlock::new(BaseSurface::moebius(BoundaryCircle::of(
            vec![Arc::AnnulusEnd("s".into())],
        ))));
        assert_eq!(
            piece_types(&p),
            BTreeSet::from([PieceTypeTag::IBundle, PieceTypeTag::Seifert])
        );
        assert!(is_special_simple(&p).unwrap());
    }

    #[test]
    fn fig8_2_is_special_simple() {
        let blk = Piece::Seifert(SeifertBlock::new(
            BaseSurface::annulus(BoundaryCircle::torus("t"), BoundaryCircle::d0_annulus("s")),
            0,
            vec![],
        ));
        assert_eq!(classify_block(&blk), BlockType::Fig8(2));
        assert!(is_special_simple(&blk).unwrap());
        assert_eq!(piece_types(&blk), BTreeSet::from([PieceTypeTag::Seifert]));
    }

    #[test]
    fn declared_strongly_simple_is_not_special() {
        let p = Piece::Simple(crate::graph::SimpleBlock::new(
            -2,
            SimpleFlag::StronglySimple,
            vec![("s".into(), crate::graph::SiteKind::Annulus)],
        ));
        assert!(!is_special_simple(&p).unwrap());
    }

    #[test]
    fn toral_retagged_pants() {
        let blk = SeifertBlock::new(
            BaseSurface::new(
                true,
                0,
                vec![
                    BoundaryCircle::torus("t1"),
                    BoundaryCircle::torus("t2"),
                    BoundaryCircle::whole_d0(),
                ],
            ),
            0,
            vec![],
        );
        assert_eq!(classify_block(&Piece::Seifert(blk)), BlockType::ToralFig(2));
    }

    #[test]
    fn torus_bundle_trace_test() {
        assert_eq!(
            torus_bundle_classify([[2, 1], [1, 1]]).unwrap(),
            TorusBundleClass::CanonicalTorus
        );
        assert_eq!(
            torus_bundle_classify([[1, 0], [0, 1]]).unwrap(),
            TorusBundleClass::CircleBundle
        );
        assert_eq!(
            torus_bundle_classify([[1, 1], [0, 1]]).unwrap(),
            TorusBundleClass::CircleBundle
        );
        assert!(torus_bundle_classify([[2, 0], [0, 2]]).is_err());
    }

    #[test]
    fn closed_simple_seifert_examples() {
        // Poincare-sphere-like input
        let d = SeifertData::new(
            BaseSurface::sphere(),
            -1,
            vec![fib(2, 1), fib(3, 1), fib(5, 1)],
        );
        assert!(closed_simple_seifert(&d).unwrap());
        // Euler number zero: H1 infinite
        let d = SeifertData::new(
            BaseSurface::sphere(),
            0,
            vec![fib(2, 1), fib(2, 1), fib(2, -1), fib(2, -1)],
        );
        assert!(!closed_simple_seifert(&d).unwrap());
        assert_eq!(h1_presentation_determinant(&d), 0);
        // four exceptional fibres: count bound fails
        let d = SeifertData::new(
            BaseSurface::sphere(),
            -1,
            vec![fib(2, 1), fib(3, 1), fib(5, 1), fib(7, 1)],
        );
        assert!(!closed_simple_seifert(&d).unwrap());
        // over the projective plane with one degree-2 fibre: |H1| = 8
        let d = SeifertData::new(BaseSurface::projective_plane(), 1, vec![fib(2, 1)]);
        assert_eq!(h1_presentation_determinant(&d).abs(), 8);
        assert!(closed_simple_seifert(&d).unwrap());
    }

    #[test]
    fn exceptional_singletons() {
        use crate::graph::{DecompositionGraph, GraphKind};
        let mut g = DecompositionGraph::new("m", GraphKind::W);
        g.add_piece(
            "p",
            Piece::Seifert(SeifertBlock::new(
                BaseSurface::projective_plane(),
                -1,
                vec![fib(2, 1), fib(2, -1)],
            )),
        );
        assert_eq!(recognize_exceptional(&g), ExceptionalManifoldTag::Rp2DoubleFibration);

        let mut g = DecompositionGraph::new("m", GraphKind::W);
        g.add_piece(
            "p",
            Piece::Seifert(SeifertBlock::new(
                BaseSurface::sphere(),
                0,
                vec![fib(2, 1), fib(2, 1), fib(2, -1), fib(2, -1)],
            )),
        );
        assert_eq!(
            recognize_exceptional(&g),
            ExceptionalManifoldTag::TangentCircleBundleKleinBottle
        );

        let mut g = DecompositionGraph::new("m", GraphKind::W);
        g.add_piece("p", Piece::IBundle(IBundleBlock::new(BaseSurface::torus())));
        assert_eq!(recognize_exceptional(&g), ExceptionalManifoldTag::IBundleOverTorus);
    }
}
