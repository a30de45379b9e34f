//! The plain-text graph format: a line-oriented grammar with '#' comments,
//! one header line, one line per piece and per edge. Serialization is
//! deterministic and byte-stable; parsing reports line and column.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{
    DecompositionGraph, Edge, EndRef, ExceptionalFibre, GraphError, GraphKind, IBundleBlock,
    Piece, SeifertBlock, SimpleBlock, SimpleFlag, SiteKind,
};
use crate::ids::{valid_token, EdgeId, PieceId, SiteId};
use crate::surface::{Arc, BaseSurface, BoundaryCircle};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

fn err<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, col, msg: msg.into() })
}

struct Tok<'a> {
    text: &'a str,
    col: usize,
}

fn tokens(line: &str) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Tok { text: &line[s..i], col: s + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Tok { text: &line[s..], col: s + 1 });
    }
    out
}

fn field<'a>(tok: &Tok<'a>, key: &str, line: usize) -> Result<&'a str, ParseError> {
    match tok.text.strip_prefix(key).and_then(|rest| rest.strip_prefix('=')) {
        Some(v) => Ok(v),
        None => err(line, tok.col, format!("expected {key}=<...>, found `{}`", tok.text)),
    }
}

fn parse_int(s: &str, line: usize, col: usize) -> Result<i64, ParseError> {
    s.parse::<i64>()
        .map_err(|_| ParseError { line, col, msg: format!("expected an integer, found `{s}`") })
}

fn parse_id(s: &str, line: usize, col: usize, what: &str) -> Result<String, ParseError> {
    if valid_token(s) {
        Ok(s.to_owned())
    } else {
        err(line, col, format!("invalid {what} `{s}` (alphanumeric and underscore only)"))
    }
}

fn parse_arc(s: &str, line: usize, col: usize) -> Result<Arc, ParseError> {
    if s == "d0" {
        return Ok(Arc::FreeD0);
    }
    if let Some(site) = s.strip_prefix("a:") {
        return Ok(Arc::AnnulusEnd(SiteId::new(parse_id(site, line, col, "site id")?)));
    }
    if let Some(site) = s.strip_prefix("t:") {
        return Ok(Arc::TorusEnd(SiteId::new(parse_id(site, line, col, "site id")?)));
    }
    err(line, col, format!("expected d0, a:<site> or t:<site>, found `{s}`"))
}

fn parse_circles(s: &str, line: usize, col: usize) -> Result<Vec<BoundaryCircle>, ParseError> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let mut circles = Vec::new();
    for part in s.split(';') {
        let mut arcs = Vec::new();
        for arc in part.split(',') {
            arcs.push(parse_arc(arc, line, col)?);
        }
        circles.push(BoundaryCircle { arcs });
    }
    Ok(circles)
}

fn parse_base(s: &str, line: usize, col: usize) -> Result<(bool, u32), ParseError> {
    let (or, genus) = match s.split_once(':') {
        Some(p) => p,
        None => return err(line, col, format!("expected <or|no>:<genus>, found `{s}`")),
    };
    let orientable = match or {
        "or" => true,
        "no" => false,
        _ => return err(line, col, format!("expected `or` or `no`, found `{or}`")),
    };
    let g = genus
        .parse::<u32>()
        .map_err(|_| ParseError { line, col, msg: format!("invalid genus `{genus}`") })?;
    Ok((orientable, g))
}

fn parse_fibres(s: &str, line: usize, col: usize) -> Result<Vec<ExceptionalFibre>, ParseError> {
    let mut out = Vec::new();
    let mut rest = s;
    while !rest.is_empty() {
        let Some(body) = rest.strip_prefix('(') else {
            return err(line, col, format!("expected (a,b) groups, found `{rest}`"));
        };
        let Some(close) = body.find(')') else {
            return err(line, col, "unterminated fibre group");
        };
        let inner = &body[..close];
        let Some((a, b)) = inner.split_once(',') else {
            return err(line, col, format!("expected (a,b), found `({inner})`"));
        };
        out.push(ExceptionalFibre::new(
            parse_int(a, line, col)?,
            parse_int(b, line, col)?,
        ));
        rest = &body[close + 1..];
    }
    Ok(out)
}

fn parse_end(s: &str, line: usize, col: usize) -> Result<EndRef, ParseError> {
    let Some((p, site)) = s.split_once('.') else {
        return err(line, col, format!("expected <piece.site>, found `{s}`"));
    };
    Ok(EndRef {
        piece: PieceId::new(parse_id(p, line, col, "piece id")?),
        site: SiteId::new(parse_id(site, line, col, "site id")?),
    })
}

fn expect_len(toks: &[Tok<'_>], n: usize, line: usize, what: &str) -> Result<(), ParseError> {
    if toks.len() == n {
        Ok(())
    } else if toks.len() < n {
        err(line, toks.last().map_or(1, |t| t.col), format!("truncated {what} line"))
    } else {
        err(line, toks[n].col, format!("unexpected token `{}`", toks[n].text))
    }
}

pub fn parse(text: &str) -> Result<DecompositionGraph, ParseError> {
    let mut graph: Option<DecompositionGraph> = None;
    let mut edge_lines: Vec<(EdgeId, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let toks = tokens(content);
        if toks.is_empty() {
            continue;
        }
        match toks[0].text {
            "manifold" => {
                if graph.is_some() {
                    return err(line, toks[0].col, "duplicate manifold header");
                }
                expect_len(&toks, 3, line, "manifold")?;
                let name = parse_id(toks[1].text, line, toks[1].col, "manifold name")?;
                let kind = match field(&toks[2], "kind", line)? {
                    "w" => GraphKind::W,
                    "jsj" => GraphKind::Jsj,
                    "geometric" => GraphKind::Geometric,
                    other => {
                        return err(line, toks[2].col, format!("unknown kind `{other}`"));
                    }
                };
                graph = Some(DecompositionGraph::new(name, kind));
            }
            "piece" => {
                let g = graph
                    .as_mut()
                    .ok_or(ParseError { line, col: 1, msg: "missing manifold header".into() })?;
                if toks.len() < 3 {
                    return err(line, 1, "truncated piece line");
                }
                let id = PieceId::new(parse_id(toks[1].text, line, toks[1].col, "piece id")?);
                if g.pieces.contains_key(&id) {
                    return err(line, toks[1].col, format!("duplicate piece id `{id}`"));
                }
                let piece = match toks[2].text {
                    "seifert" => {
                        expect_len(&toks, 7, line, "seifert piece")?;
                        let (orientable, genus) =
                            parse_base(field(&toks[3], "base", line)?, line, toks[3].col)?;
                        let circles =
                            parse_circles(field(&toks[4], "circles", line)?, line, toks[4].col)?;
                        let b = parse_int(field(&toks[5], "b", line)?, line, toks[5].col)?;
                        let fibres =
                            parse_fibres(field(&toks[6], "fibres", line)?, line, toks[6].col)?;
                        Piece::Seifert(SeifertBlock::new(
                            BaseSurface::new(orientable, genus, circles),
                            b,
                            fibres,
                        ))
                    }
                    "ibundle" => {
                        expect_len(&toks, 6, line, "ibundle piece")?;
                        let base = field(&toks[3], "base", line)?;
                        let Some((or_part, rest)) = base.split_once(':') else {
                            return err(line, toks[3].col, "expected base=<or|no>:<genus>:<circles>");
                        };
                        let Some((genus_part, circles_part)) = rest.split_once(':') else {
                            return err(line, toks[3].col, "expected base=<or|no>:<genus>:<circles>");
                        };
                        let (orientable, genus) = parse_base(
                            &format!("{or_part}:{genus_part}"),
                            line,
                            toks[3].col,
                        )?;
                        let circles = parse_circles(circles_part, line, toks[3].col)?;
                        let twisted = match field(&toks[4], "twisted", line)? {
                            "0" => false,
                            "1" => true,
                            other => {
                                return err(line, toks[4].col, format!("twisted must be 0 or 1, found `{other}`"));
                            }
                        };
                        let fiber_base = BaseSurface::new(orientable, genus, circles);
                        let block = IBundleBlock { fiber_base, twisted };
                        let declared = field(&toks[5], "sites", line)?;
                        let listed: Vec<&str> = if declared.is_empty() {
                            Vec::new()
                        } else {
                            declared.split(',').collect()
                        };
                        let actual: Vec<String> = Piece::IBundle(block.clone())
                            .sites()
                            .into_iter()
                            .map(|(s, _)| s.0)
                            .collect();
                        if listed != actual.iter().map(String::as_str).collect::<Vec<_>>() {
                            return err(
                                line,
                                toks[5].col,
                                format!(
                                    "sites field `{declared}` does not list the base's annulus sites ({})",
                                    actual.join(",")
                                ),
                            );
                        }
                        Piece::IBundle(block)
                    }
                    "simple" => {
                        expect_len(&toks, 6, line, "simple piece")?;
                        let chi = parse_int(field(&toks[3], "chi0", line)?, line, toks[3].col)?;
                        let flag = match field(&toks[4], "flags", line)? {
                            "ss" => SimpleFlag::StronglySimple,
                            "sp" => SimpleFlag::SpecialSimple,
                            other => {
                                return err(line, toks[4].col, format!("flags must be ss or sp, found `{other}`"));
                            }
                        };
                        let decl = field(&toks[5], "sites", line)?;
                        let mut sites = Vec::new();
                        if !decl.is_empty() {
                            for part in decl.split(',') {
                                let Some((kind, site)) = part.split_once(':') else {
                                    return err(line, toks[5].col, format!("expected <kind>:<site>, found `{part}`"));
                                };
                                let kind = match kind {
                                    "a" => SiteKind::Annulus,
                                    "t" => SiteKind::Torus,
                                    other => {
                                        return err(line, toks[5].col, format!("site kind must be a or t, found `{other}`"));
                                    }
                                };
                                sites.push((
                                    SiteId::new(parse_id(site, line, toks[5].col, "site id")?),
                                    kind,
                                ));
                            }
                        }
                        Piece::Simple(SimpleBlock::new(chi, flag, sites))
                    }
                    other => {
                        return err(line, toks[2].col, format!("unknown piece kind `{other}`"));
                    }
                };
                g.add_piece(id, piece);
            }
            "edge" => {
                let g = graph
                    .as_mut()
                    .ok_or(ParseError { line, col: 1, msg: "missing manifold header".into() })?;
                if toks.len() < 3 {
                    return err(line, 1, "truncated edge line");
                }
                let id = EdgeId::new(parse_id(toks[1].text, line, toks[1].col, "edge id")?);
                if g.edges.contains_key(&id) {
                    return err(line, toks[1].col, format!("duplicate edge id `{id}`"));
                }
                let edge = match toks[2].text {
                    "annulus" => {
                        expect_len(&toks, 6, line, "annulus edge")?;
                        let a = parse_end(toks[3].text, line, toks[3].col)?;
                        let b = parse_end(toks[4].text, line, toks[4].col)?;
                        let flip = match field(&toks[5], "flip", line)? {
                            "0" => false,
                            "1" => true,
                            other => {
                                return err(line, toks[5].col, format!("flip must be 0 or 1, found `{other}`"));
                            }
                        };
                        Edge::Annulus { a, b, flip }
                    }
                    "torus" => {
                        expect_len(&toks, 6, line, "torus edge")?;
                        let a = parse_end(toks[3].text, line, toks[3].col)?;
                        let b = parse_end(toks[4].text, line, toks[4].col)?;
                        let m = field(&toks[5], "m", line)?;
                        let parts: Vec<&str> = m.split(',').collect();
                        if parts.len() != 4 {
                            return err(line, toks[5].col, "expected m=<p,q,r,s>");
                        }
                        let v: Vec<i64> = parts
                            .iter()
                            .map(|p| parse_int(p, line, toks[5].col))
                            .collect::<Result<_, _>>()?;
                        Edge::Torus { a, b, gluing: [[v[0], v[1]], [v[2], v[3]]] }
                    }
                    "mobius" => {
                        expect_len(&toks, 4, line, "mobius edge")?;
                        Edge::MoebiusBand { at: parse_end(toks[3].text, line, toks[3].col)? }
                    }
                    "klein" => {
                        expect_len(&toks, 4, line, "klein edge")?;
                        Edge::KleinBottle { at: parse_end(toks[3].text, line, toks[3].col)? }
                    }
                    other => {
                        return err(line, toks[2].col, format!("unknown edge kind `{other}`"));
                    }
                };
                edge_lines.push((id.clone(), line));
                g.add_edge(id, edge);
            }
            other => {
                return err(line, toks[0].col, format!("unknown directive `{other}`"));
            }
        }
    }

    let g = graph.ok_or(ParseError { line: 1, col: 1, msg: "missing manifold header".into() })?;
    // dangling references are parse errors, reported with the edge's line
    for (eid, line) in &edge_lines {
        let edge = &g.edges[eid];
        for end in edge.ends() {
            if g.end_site_kind(end).is_none() {
                return err(
                    *line,
                    1,
                    format!("edge {eid} references absent site {}.{}", end.piece, end.site),
                );
            }
        }
    }
    Ok(g)
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

fn arc_str(a: &Arc) -> String {
    match a {
        Arc::FreeD0 => "d0".to_owned(),
        Arc::AnnulusEnd(s) => format!("a:{s}"),
        Arc::TorusEnd(s) => format!("t:{s}"),
    }
}

fn circles_str(s: &BaseSurface) -> String {
    s.circles
        .iter()
        .map(|c| c.arcs.iter().map(arc_str).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";")
}

fn base_str(s: &BaseSurface) -> String {
    format!("{}:{}", if s.orientable { "or" } else { "no" }, s.genus)
}

/// Deterministic text form: header, pieces in id order, edges in id order.
pub fn serialize(g: &DecompositionGraph) -> Result<String, GraphError> {
    let report = g.validate();
    if !report.is_valid() {
        return Err(GraphError::Invalid(report));
    }
    Ok(serialize_raw(g))
}

pub(crate) fn serialize_raw(g: &DecompositionGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "manifold {} kind={}", g.name, g.kind.name());
    for (id, piece) in &g.pieces {
        match piece {
            Piece::Seifert(b) => {
                let fibres: String =
                    b.fibres.iter().map(|f| format!("({},{})", f.alpha, f.beta)).collect();
                let _ = writeln!(
                    out,
                    "piece {id} seifert base={} circles={} b={} fibres={}",
                    base_str(&b.base),
                    circles_str(&b.base),
                    b.b,
                    fibres
                );
            }
            Piece::IBundle(b) => {
                let sites: Vec<String> =
                    piece.sites().into_iter().map(|(s, _)| s.0).collect();
                let _ = writeln!(
                    out,
                    "piece {id} ibundle base={}:{} twisted={} sites={}",
                    base_str(&b.fiber_base),
                    circles_str(&b.fiber_base),
                    u8::from(b.twisted),
                    sites.join(",")
                );
            }
            Piece::Simple(b) => {
                let sites: Vec<String> = b
                    .sites
                    .iter()
                    .map(|(s, k)| {
                        format!("{}:{s}", if *k == SiteKind::Annulus { "a" } else { "t" })
                    })
                    .collect();
                let _ = writeln!(
                    out,
                    "piece {id} simple chi0={} flags={} sites={}",
                    b.chi_d0,
                    if b.flag == SimpleFlag::StronglySimple { "ss" } else { "sp" },
                    sites.join(",")
                );
            }
        }
    }
    for (id, edge) in &g.edges {
        match edge {
            Edge::Annulus { a, b, flip } => {
                let _ = writeln!(
                    out,
                    "edge {id} annulus {}.{} {}.{} flip={}",
                    a.piece,
                    a.site,
                    b.piece,
                    b.site,
                    u8::from(*flip)
                );
            }
            Edge::Torus { a, b, gluing } => {
                let _ = writeln!(
                    out,
                    "edge {id} torus {}.{} {}.{} m={},{},{},{}",
                    a.piece,
                    a.site,
                    b.piece,
                    b.site,
                    gluing[0][0],
                    gluing[0][1],
                    gluing[1][0],
                    gluing[1][1]
                );
            }
            Edge::MoebiusBand { at } => {
                let _ = writeln!(out, "edge {id} mobius {}.{}", at.piece, at.site);
            }
            Edge::KleinBottle { at } => {
                let _ = writeln!(out, "edge {id} klein {}.{}", at.piece, at.site);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN_PAIR: &str = "\
manifold m kind=w
piece p seifert base=or:0 circles=t:t1;d0,a:s b=0 fibres=
piece q seifert base=or:0 circles=t:t2;d0,a:s b=0 fibres=
piece x simple chi0=-2 flags=ss sites=t:u
piece y simple chi0=-2 flags=ss sites=t:u
edge e annulus p.s q.s flip=0
edge f1 torus p.t1 x.u m=0,1,1,0
edge f2 torus q.t2 y.u m=0,1,1,0
";

    #[test]
    fn golden_pair_round_trips() {
        let g = parse(GOLDEN_PAIR).unwrap();
        assert_eq!(g.pieces.len(), 4);
        assert_eq!(g.edges.len(), 3);
        assert!(g.validate().is_valid(), "{:?}", g.validate());
        let text = serialize(&g).unwrap();
        assert_eq!(text, GOLDEN_PAIR);
        let g2 = parse(&text).unwrap();
        assert_eq!(g2, g);
    }

    #[test]
    fn empty_input_needs_header() {
        let e = parse("").unwrap_err();
        assert!(e.msg.contains("missing manifold header"));
        let e = parse("piece p simple chi0=0 flags=ss sites=\n").unwrap_err();
        assert!(e.msg.contains("missing manifold header"));
    }

    #[test]
    fn dangling_site_reported_with_line() {
        let text = "manifold m kind=w\npiece p simple chi0=-1 flags=ss sites=a:x\nedge e annulus p.x p.y flip=0\n";
        let e = parse(text).unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.msg.contains("absent site"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = "manifold m kind=w\npiece p seifert base=or:0 circles=d0 b=0 extra=1\n";
        let e = parse(text).unwrap_err();
        assert_eq!(e.line, 2);

        let text = "manifold m kind=w size=3\n";
        assert!(parse(text).is_err());
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let text = "# header\nmanifold m kind=jsj\n\n# a piece\npiece p seifert base=or:1 circles=d0 b=0 fibres=(2,1)\n";
        let g = parse(text).unwrap();
        assert_eq!(g.kind, GraphKind::Jsj);
        assert_eq!(g.pieces.len(), 1);
    }

    #[test]
    fn ibundle_line_round_trips() {
        let text = "manifold m kind=w\npiece p ibundle base=no:1:a:c twisted=1 sites=c\npiece s simple chi0=-2 flags=ss sites=a:z\nedge e annulus p.c s.z flip=1\n";
        let g = parse(text).unwrap();
        assert_eq!(serialize(&g).unwrap(), text);
    }

    #[test]
    fn geometric_marker_edges_round_trip() {
        let text = "manifold m kind=geometric\npiece s simple chi0=-2 flags=ss sites=a:z\nedge e mobius s.z\n";
        let g = parse(text).unwrap();
        assert!(g.validate().is_valid());
        assert_eq!(serialize(&g).unwrap(), text);
    }
}
