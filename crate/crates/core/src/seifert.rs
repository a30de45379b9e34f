//! Exact arithmetic on unnormalized Seifert invariants: normal forms, the
//! rational Euler number, fibration equivalence, and the alternate-fibration
//! pairs of the non-unique blocks.

use num_rational::Rational64;
use thiserror::Error;

use crate::graph::{ExceptionalFibre, IBundleBlock, Piece, SeifertBlock};
use crate::surface::{Arc, BaseSurface, BoundaryCircle};

/// An unnormalized Seifert invariant {b; (a1,b1),...,(an,bn)} over a base.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeifertData {
    pub base: BaseSurface,
    pub b: i64,
    pub fibres: Vec<ExceptionalFibre>,
}

impl SeifertData {
    pub fn new(base: BaseSurface, b: i64, fibres: Vec<ExceptionalFibre>) -> Self {
        Self { base, b, fibres }
    }

    pub fn of_block(block: &SeifertBlock) -> Self {
        Self::new(block.base.clone(), block.b, block.fibres.clone())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeifertError {
    #[error("Euler number undefined for bounded base")]
    BoundedBase,
    #[error("exceptional fibre has alpha = 0")]
    ZeroAlpha,
}

/// Normal form of a Seifert invariant.
///
/// Closed orientable base: each beta is reduced mod alpha with b absorbing
/// the quotients. Non-orientable base: the free flip (a,b) ~ (a,-b) brings
/// each beta into [0, a/2], and b is then reduced by the parity left over
/// from pairs of flips (mod 1 when a (2,1) fibre is present, mod 2
/// otherwise). Bounded base: b is forced to 0, the section twists going to
/// the framing ledger. Fibres with alpha = 1 are absorbed into b and
/// removed; output fibres are sorted.
pub fn normalize_invariants(d: &SeifertData) -> SeifertData {
    let mut b = d.b;
    let mut fibres = Vec::new();
    for f in &d.fibres {
        assert!(f.alpha != 0, "exceptional fibre with alpha = 0");
        let (alpha, beta) = if f.alpha < 0 { (-f.alpha, -f.beta) } else { (f.alpha, f.beta) };
        if alpha == 1 {
            b += beta;
            continue;
        }
        let beta0 = beta.rem_euclid(alpha);
        b += (beta - beta0) / alpha;
        let beta_n = if !d.base.orientable && 2 * beta0 > alpha {
            // flip then renormalize: costs one unit of b
            b -= 1;
            alpha - beta0
        } else {
            beta0
        };
        fibres.push(ExceptionalFibre::new(alpha, beta_n));
    }
    fibres.sort();

    if !d.base.is_closed() {
        b = 0;
    } else if !d.base.orientable {
        let modulus = if fibres.iter().any(|f| 2 * f.beta == f.alpha) { 1 } else { 2 };
        b = b.rem_euclid(modulus);
    }
    SeifertData::new(d.base.clone(), b, fibres)
}

/// Rational Euler number of a closed-base fibration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EulerNumber {
    Exact(Rational64),
    /// Non-orientable base: the class of -(b + sum beta/alpha) in the
    /// quotient of Q by the subgroup generated by 2 and the 2*beta/alpha,
    /// reported as its smallest non-negative representative.
    Modulo { representative: Rational64, modulus: Rational64 },
}

impl EulerNumber {
    pub fn representative(&self) -> Rational64 {
        match self {
            EulerNumber::Exact(r) => *r,
            EulerNumber::Modulo { representative, .. } => *representative,
        }
    }
}

pub fn euler_number(d: &SeifertData) -> Result<EulerNumber, SeifertError> {
    if !d.base.is_closed() {
        return Err(SeifertError::BoundedBase);
    }
    if d.fibres.iter().any(|f| f.alpha == 0) {
        return Err(SeifertError::ZeroAlpha);
    }
    let sum: Rational64 = d
        .fibres
        .iter()
        .map(|f| Rational64::new(f.beta, f.alpha))
        .sum();
    let e = -(Rational64::from_integer(d.b) + sum);
    if d.base.orientable {
        return Ok(EulerNumber::Exact(e));
    }
    let mut modulus = Rational64::from_integer(2);
    for f in &d.fibres {
        modulus = rational_gcd(modulus, Rational64::new(2 * f.beta, f.alpha));
    }
    let rep = e - (e / modulus).floor() * modulus;
    Ok(EulerNumber::Modulo { representative: rep, modulus })
}

fn rational_gcd(a: Rational64, b: Rational64) -> Rational64 {
    if b == Rational64::from_integer(0) {
        return if a < Rational64::from_integer(0) { -a } else { a };
    }
    let num = num_integer::gcd(a.numer() * b.denom(), b.numer() * a.denom());
    Rational64::new(num, a.denom() * b.denom())
}

/// True when the two invariants normalize to equal data over homeomorphic
/// bases with identical boundary-arc patterns.
pub fn fibrations_equivalent(d1: &SeifertData, d2: &SeifertData) -> bool {
    let n1 = normalize_invariants(d1);
    let n2 = normalize_invariants(d2);
    n1.b == n2.b && n1.fibres == n2.fibres && bases_match(&n1.base, &n2.base)
}

/// Base homeomorphism with identical boundary-arc patterns: same
/// orientability and genus, and matching multisets of circle skeletons
/// (arc tag sequences up to rotation and reflection, sites anonymized).
pub fn bases_match(s1: &BaseSurface, s2: &BaseSurface) -> bool {
    s1.orientable == s2.orientable
        && s1.genus == s2.genus
        && circle_skeleton_multiset(s1) == circle_skeleton_multiset(s2)
}

pub fn circle_skeleton(c: &BoundaryCircle) -> String {
    let tags: Vec<&str> = c
        .arcs
        .iter()
        .map(|a| match a {
            Arc::FreeD0 => "d0",
            Arc::AnnulusEnd(_) => "a",
            Arc::TorusEnd(_) => "t",
        })
        .collect();
    canonical_cycle(&tags)
}

pub fn circle_skeleton_multiset(s: &BaseSurface) -> Vec<String> {
    let mut v: Vec<String> = s.circles.iter().map(circle_skeleton).collect();
    v.sort();
    v
}

/// Lexicographically least rotation of the sequence or its reversal.
pub fn canonical_cycle(tags: &[&str]) -> String {
    let n = tags.len();
    let mut best: Option<String> = None;
    for rev in [false, true] {
        let seq: Vec<&str> = if rev {
            tags.iter().rev().copied().collect()
        } else {
            tags.to_vec()
        };
        for r in 0..n {
            let rotated: Vec<&str> = (0..n).map(|i| seq[(r + i) % n]).collect();
            let s = rotated.join(",");
            if best.as_ref().is_none_or(|b| s < *b) {
                best = Some(s);
            }
        }
    }
    best.unwrap_or_default()
}

// ---------------------------------------------------------------------------
// Alternate fibrations (the non-unique blocks)
// ---------------------------------------------------------------------------

/// The alternative fibred structures of a piece. Non-empty exactly for the
/// four non-unique shapes: the I-bundle over the Moebius band and the
/// disk-base block with one degree-2 fibre are two structures on one solid
/// torus; the disk-base block with two degree-2 fibres and the Moebius-base
/// circle bundle are two structures on the twisted circle bundle.
/// Attachment sites are preserved.
pub fn alternate_fibrations(p: &Piece) -> Vec<Piece> {
    match p {
        Piece::IBundle(ib) => ibundle_alternative(ib).into_iter().collect(),
        Piece::Seifert(blk) => seifert_alternative(blk).into_iter().collect(),
        Piece::Simple(_) => Vec::new(),
    }
}

fn is_moebius_band(s: &BaseSurface) -> bool {
    !s.orientable && s.genus == 1 && s.circles.len() == 1
}

fn is_disk(s: &BaseSurface) -> bool {
    s.orientable && s.genus == 0 && s.circles.len() == 1
}

fn ibundle_alternative(ib: &IBundleBlock) -> Option<Piece> {
    if !is_moebius_band(&ib.fiber_base) {
        return None;
    }
    let circle = match ib.fiber_base.circles[0].arcs.as_slice() {
        [Arc::AnnulusEnd(s)] => BoundaryCircle::d0_annulus(s.clone()),
        [Arc::FreeD0] => BoundaryCircle::whole_d0(),
        _ => return None,
    };
    Some(Piece::Seifert(SeifertBlock::new(
        BaseSurface::disk(circle),
        0,
        vec![ExceptionalFibre::new(2, 1)],
    )))
}

fn seifert_alternative(blk: &SeifertBlock) -> Option<Piece> {
    let n = normalize_invariants(&SeifertData::of_block(blk));
    let circle = blk.base.circles.first()?;
    if is_disk(&blk.base) {
        match n.fibres.as_slice() {
            // one degree-2 fibre over the disk: also the I-bundle over the
            // Moebius band (only for annular or free boundary patterns)
            [f] if f.alpha == 2 => {
                let fb_circle = match circle.arcs.as_slice() {
                    [Arc::FreeD0, Arc::AnnulusEnd(s)] | [Arc::AnnulusEnd(s), Arc::FreeD0] => {
                        BoundaryCircle::of(vec![Arc::AnnulusEnd(s.clone())])
                    }
                    [Arc::FreeD0] => BoundaryCircle::whole_d0(),
                    _ => return None,
                };
                Some(Piece::IBundle(IBundleBlock::new(BaseSurface::moebius(fb_circle))))
            }
            // two degree-2 fibres over the disk: also the circle bundle
            // over the Moebius band with no exceptional fibre
            [f1, f2] if f1.alpha == 2 && f2.alpha == 2 => Some(Piece::Seifert(SeifertBlock::new(
                BaseSurface::moebius(circle.clone()),
                0,
                vec![],
            ))),
            _ => None,
        }
    } else if is_moebius_band(&blk.base) && n.fibres.is_empty() {
        Some(Piece::Seifert(SeifertBlock::new(
            BaseSurface::disk(circle.clone()),
            0,
            vec![ExceptionalFibre::new(2, 1), ExceptionalFibre::new(2, 1)],
        )))
    } else {
        None
    }
}

/// The preferred Seifert representative of a piece under the two-structure
/// identifications: I-bundles over the Moebius band become their disk-base
/// form, and Moebius-base circle bundles become their disk-base form. Other
/// pieces are returned unchanged. Used by canonicalization and by the
/// permutation oracle so that both compare the same relation.
pub fn claim2_seifert_form(p: &Piece) -> (Piece, bool) {
    match p {
        Piece::IBundle(ib) => match ibundle_alternative(ib) {
            Some(q) => (q, false),
            None => (p.clone(), false),
        },
        Piece::Seifert(blk) if is_moebius_band(&blk.base) => {
            let n = normalize_invariants(&SeifertData::of_block(blk));
            if n.fibres.is_empty() && blk.base.circles.len() == 1 {
                let circle = blk.base.circles[0].clone();
                let q = Piece::Seifert(SeifertBlock::new(
                    BaseSurface::disk(circle),
                    0,
                    vec![ExceptionalFibre::new(2, 1), ExceptionalFibre::new(2, 1)],
                ));
                // torus framings at this piece's ends swap fibre and section
                (q, true)
            } else {
                (p.clone(), false)
            }
        }
        _ => (p.clone(), false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fib(a: i64, b: i64) -> ExceptionalFibre {
        ExceptionalFibre::new(a, b)
    }

    fn over_s2(b: i64, fibres: Vec<ExceptionalFibre>) -> SeifertData {
        SeifertData::new(BaseSurface::sphere(), b, fibres)
    }

    fn over_rp2(b: i64, fibres: Vec<ExceptionalFibre>) -> SeifertData {
        SeifertData::new(BaseSurface::projective_plane(), b, fibres)
    }

    #[test]
    fn normalize_tangent_bundle_invariant() {
        let d = over_s2(0, vec![fib(2, 1), fib(2, 1), fib(2, -1), fib(2, -1)]);
        let n = normalize_invariants(&d);
        assert_eq!(n.b, -2);
        assert_eq!(n.fibres, vec![fib(2, 1); 4]);
        assert_eq!(euler_number(&d).unwrap(), euler_number(&n).unwrap());
        assert_eq!(
            euler_number(&d).unwrap(),
            EulerNumber::Exact(Rational64::from_integer(0))
        );
    }

    #[test]
    fn normalize_empty_is_identity() {
        let d = over_s2(0, vec![]);
        assert_eq!(normalize_invariants(&d), d);
    }

    #[test]
    fn normalize_rp2_double_fibration() {
        let d = over_rp2(-1, vec![fib(2, 1), fib(2, -1)]);
        let n = normalize_invariants(&d);
        // (2,-1) flips freely to (2,1); the (2,1) fibre then absorbs b entirely
        assert_eq!(n.fibres, vec![fib(2, 1), fib(2, 1)]);
        assert_eq!(n.b, 0);
        let e = euler_number(&d).unwrap();
        assert_eq!(e.representative(), Rational64::from_integer(0));
        assert_eq!(euler_number(&n).unwrap().representative(), e.representative());
    }

    #[test]
    fn euler_number_bounded_base_is_error() {
        let d = SeifertData::new(
            BaseSurface::disk(crate::surface::BoundaryCircle::whole_d0()),
            0,
            vec![],
        );
        assert_eq!(euler_number(&d).unwrap_err(), SeifertError::BoundedBase);
    }

    #[test]
    fn fibration_equivalence_examples() {
        let d = over_s2(0, vec![fib(2, 1), fib(2, 1), fib(2, -1), fib(2, -1)]);
        assert!(fibrations_equivalent(&d, &d));
        let n = over_s2(-2, vec![fib(2, 1), fib(2, 1), fib(2, 1), fib(2, 1)]);
        assert!(fibrations_equivalent(&d, &n));

        let disk = |fibres| {
            SeifertData::new(
                BaseSurface::disk(crate::surface::BoundaryCircle::whole_d0()),
                0,
                fibres,
            )
        };
        assert!(!fibrations_equivalent(&disk(vec![fib(2, 1)]), &disk(vec![fib(3, 1)])));
    }

    #[test]
    fn normalize_is_idempotent() {
        for d in [
            over_s2(3, vec![fib(2, 5), fib(3, -7), fib(1, 4)]),
            over_rp2(-4, vec![fib(5, 3), fib(2, 9)]),
            over_rp2(1, vec![fib(3, 2)]),
        ] {
            let n = normalize_invariants(&d);
            assert_eq!(normalize_invariants(&n), n);
            if d.base.is_closed() {
                assert_eq!(
                    euler_number(&d).unwrap().representative(),
                    euler_number(&n).unwrap().representative()
                );
            }
        }
    }

    #[test]
    fn moebius_ibundle_and_disk_block_alternate() {
        let ib = Piece::IBundle(IBundleBlock::new(BaseSurface::moebius(
            BoundaryCircle::of(vec![Arc::AnnulusEnd("s".into())]),
        )));
        let alts = alternate_fibrations(&ib);
        assert_eq!(alts.len(), 1);
        let Piece::Seifert(blk) = &alts[0] else { panic!("expected Seifert alternative") };
        assert_eq!(blk.fibres, vec![fib(2, 1)]);
        assert!(is_disk(&blk.base));
        // involution: back to the I-bundle
        let back = alternate_fibrations(&alts[0]);
        assert_eq!(back.len(), 1);
        assert!(matches!(&back[0], Piece::IBundle(b) if is_moebius_band(&b.fiber_base)));
    }

    #[test]
    fn two_degree_two_fibres_alternate_with_moebius_bundle() {
        let blk = Piece::Seifert(SeifertBlock::new(
            BaseSurface::disk(BoundaryCircle::d0_annulus("s")),
            0,
            vec![fib(2, 1), fib(2, 1)],
        ));
        let alts = alternate_fibrations(&blk);
        assert_eq!(alts.len(), 1);
        let Piece::Seifert(m) = &alts[0] else { panic!() };
        assert!(is_moebius_band(&m.base));
        assert!(m.fibres.is_empty());
        let back = alternate_fibrations(&alts[0]);
        assert_eq!(back.len(), 1);
        let Piece::Seifert(d) = &back[0] else { panic!() };
        assert!(is_disk(&d.base));
        assert_eq!(d.fibres, vec![fib(2, 1), fib(2, 1)]);
    }

    #[test]
    fn generic_blocks_have_no_alternate() {
        let pants = SeifertBlock::new(
            BaseSurface::new(
                true,
                0,
                vec![
                    BoundaryCircle::torus("t1"),
                    BoundaryCircle::torus("t2"),
                    BoundaryCircle::torus("t3"),
                ],
            ),
            0,
            vec![],
        );
        assert!(alternate_fibrations(&Piece::Seifert(pants)).is_empty());
        let deg3 = SeifertBlock::new(
            BaseSurface::disk(BoundaryCircle::d0_annulus("s")),
            0,
            vec![fib(3, 1)],
        );
        assert!(alternate_fibrations(&Piece::Seifert(deg3)).is_empty());
    }
}
