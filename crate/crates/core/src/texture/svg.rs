//! The SVG subset accepted for elements: `path` (M, L, H, V, C, Q, Z in
//! absolute and relative form), `rect`, `circle`, `ellipse` and `polygon`,
//! inside optional `g` groups, with `translate`/`scale` transforms only.
//! User units are millimeters. The result is flipped to a y-up frame and
//! centered on its bounding box.

use super::element::{circle_ring, point_in_ring, ElementSource, TextureElement};
use super::TextureError;
use crate::surface_map::Vec2;

#[derive(Debug, Clone, Copy)]
struct Affine {
    sx: f64,
    sy: f64,
    tx: f64,
    ty: f64,
}

impl Affine {
    const IDENTITY: Affine = Affine {
        sx: 1.0,
        sy: 1.0,
        tx: 0.0,
        ty: 0.0,
    };

    fn apply(&self, p: Vec2) -> Vec2 {
        Vec2::new(self.sx * p.x + self.tx, self.sy * p.y + self.ty)
    }

    /// `self` after `inner`.
    fn then(&self, inner: &Affine) -> Affine {
        Affine {
            sx: self.sx * inner.sx,
            sy: self.sy * inner.sy,
            tx: self.sx * inner.tx + self.tx,
            ty: self.sy * inner.ty + self.ty,
        }
    }
}

fn svg_err(msg: impl Into<String>) -> TextureError {
    TextureError::Svg(msg.into())
}

fn numbers(s: &str) -> Result<Vec<f64>, TextureError> {
    let mut out = Vec::new();
    let mut lex = Lexer::new(s);
    while let Some(x) = lex.number()? {
        out.push(x);
    }
    if !lex.at_end() {
        return Err(svg_err(format!("unexpected text in number list: {s:?}")));
    }
    Ok(out)
}

fn parse_transform(s: &str) -> Result<Affine, TextureError> {
    let mut acc = Affine::IDENTITY;
    let mut rest = s.trim();
    while !rest.is_empty() {
        let open = rest
            .find('(')
            .ok_or_else(|| svg_err(format!("bad transform {s:?}")))?;
        let close = rest
            .find(')')
            .ok_or_else(|| svg_err(format!("bad transform {s:?}")))?;
        let name = rest[..open].trim().trim_start_matches(',').trim();
        let args = numbers(&rest[open + 1..close])?;
        let t = match (name, args.as_slice()) {
            ("translate", [x]) => Affine { tx: *x, ..Affine::IDENTITY },
            ("translate", [x, y]) => Affine {
                tx: *x,
                ty: *y,
                ..Affine::IDENTITY
            },
            ("scale", [k]) => Affine {
                sx: *k,
                sy: *k,
                ..Affine::IDENTITY
            },
            ("scale", [x, y]) => Affine {
                sx: *x,
                sy: *y,
                ..Affine::IDENTITY
            },
            ("translate" | "scale", _) => return Err(svg_err(format!("bad {name} arguments"))),
            (other, _) => return Err(TextureError::UnsupportedSvg(format!("transform {other}"))),
        };
        acc = acc.then(&t);
        rest = rest[close + 1..].trim();
    }
    Ok(acc)
}

struct Lexer<'a> {
    s: &'a [u8],
    i: usize,
}

impl<'a> Lexer<'a> {
    fn new(s: &'a str) -> Self {
        Lexer { s: s.as_bytes(), i: 0 }
    }

    fn skip(&mut self) {
        while self.i < self.s.len() && (self.s[self.i].is_ascii_whitespace() || self.s[self.i] == b',') {
            self.i += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip();
        self.i >= self.s.len()
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip();
        self.s.get(self.i).copied()
    }

    fn command(&mut self) -> Option<u8> {
        let c = self.peek()?;
        if c.is_ascii_alphabetic() && c != b'e' && c != b'E' {
            self.i += 1;
            Some(c)
        } else {
            None
        }
    }

    fn number(&mut self) -> Result<Option<f64>, TextureError> {
        self.skip();
        let start = self.i;
        let s = self.s;
        let mut j = self.i;
        if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
            j += 1;
        }
        let digits = |j: &mut usize| {
            let k = *j;
            while *j < s.len() && s[*j].is_ascii_digit() {
                *j += 1;
            }
            *j > k
        };
        let mut any = digits(&mut j);
        if j < s.len() && s[j] == b'.' {
            j += 1;
            any |= digits(&mut j);
        }
        if !any {
            return Ok(None);
        }
        if j < s.len() && (s[j] == b'e' || s[j] == b'E') {
            let mut k = j + 1;
            if k < s.len() && (s[k] == b'+' || s[k] == b'-') {
                k += 1;
            }
            if digits(&mut k) {
                j = k;
            }
        }
        self.i = j;
        let text = std::str::from_utf8(&s[start..j]).expect("ascii");
        text.parse()
            .map(Some)
            .map_err(|_| svg_err(format!("bad number {text:?}")))
    }

    fn need(&mut self) -> Result<f64, TextureError> {
        self.number()?.ok_or_else(|| svg_err("path ended where a number was expected"))
    }

    fn pair(&mut self) -> Result<Vec2, TextureError> {
        Ok(Vec2::new(self.need()?, self.need()?))
    }
}

fn flatten_cubic(out: &mut Vec<Vec2>, p: [Vec2; 4], tol: f64, depth: usize) {
    let chord = p[3] - p[0];
    let len = chord.norm();
    let dist = |q: Vec2| {
        if len > 0.0 {
            ((q - p[0]).x * chord.y - (q - p[0]).y * chord.x).abs() / len
        } else {
            (q - p[0]).norm()
        }
    };
    if depth >= 16 || dist(p[1]).max(dist(p[2])) <= tol {
        out.push(p[3]);
        return;
    }
    let m01 = (p[0] + p[1]) / 2.0;
    let m12 = (p[1] + p[2]) / 2.0;
    let m23 = (p[2] + p[3]) / 2.0;
    let a = (m01 + m12) / 2.0;
    let b = (m12 + m23) / 2.0;
    let mid = (a + b) / 2.0;
    flatten_cubic(out, [p[0], m01, a, mid], tol, depth + 1);
    flatten_cubic(out, [mid, b, m23, p[3]], tol, depth + 1);
}

/// Closed subpaths of a path `d` attribute.
fn parse_path(d: &str, tol: f64) -> Result<Vec<Vec<Vec2>>, TextureError> {
    let mut lex = Lexer::new(d);
    let mut rings = Vec::new();
    let mut cur: Vec<Vec2> = Vec::new();
    let mut pos = Vec2::zeros();
    let mut start = Vec2::zeros();
    let mut cmd: Option<u8> = None;
    let finish_open = |cur: &Vec<Vec2>| -> Result<(), TextureError> {
        if cur.len() > 1 {
            let closes = (cur[0] - cur[cur.len() - 1]).norm() <= 1e-9;
            if !closes {
                return Err(TextureError::OpenPath);
            }
        }
        Ok(())
    };
    loop {
        if let Some(c) = lex.command() {
            cmd = Some(c);
        } else if lex.at_end() {
            break;
        } else if cmd.is_none() {
            return Err(svg_err("path data must start with a command"));
        }
        let c = cmd.expect("set above");
        let rel = c.is_ascii_lowercase();
        let base = if rel { pos } else { Vec2::zeros() };
        match c.to_ascii_uppercase() {
            b'M' => {
                finish_open(&cur)?;
                if cur.len() > 2 {
                    rings.push(std::mem::take(&mut cur));
                }
                cur.clear();
                pos = base + lex.pair()?;
                start = pos;
                cur.push(pos);
                // further pairs are line-tos
                cmd = Some(if rel { b'l' } else { b'L' });
            }
            b'L' => {
                pos = base + lex.pair()?;
                cur.push(pos);
            }
            b'H' => {
                let x = lex.need()?;
                pos = Vec2::new(if rel { pos.x + x } else { x }, pos.y);
                cur.push(pos);
            }
            b'V' => {
                let y = lex.need()?;
                pos = Vec2::new(pos.x, if rel { pos.y + y } else { y });
                cur.push(pos);
            }
            b'C' => {
                let c1 = base + lex.pair()?;
                let c2 = base + lex.pair()?;
                let end = base + lex.pair()?;
                flatten_cubic(&mut cur, [pos, c1, c2, end], tol, 0);
                pos = end;
            }
            b'Q' => {
                let q = base + lex.pair()?;
                let end = base + lex.pair()?;
                let c1 = pos + (q - pos) * (2.0 / 3.0);
                let c2 = end + (q - end) * (2.0 / 3.0);
                flatten_cubic(&mut cur, [pos, c1, c2, end], tol, 0);
                pos = end;
            }
            b'Z' => {
                if cur.len() > 2 {
                    rings.push(std::mem::take(&mut cur));
                }
                cur.clear();
                pos = start;
                cmd = None;
                continue;
            }
            other => return Err(TextureError::UnsupportedSvg(format!("path command {}", other as char))),
        }
    }
    finish_open(&cur)?;
    if cur.len() > 2 {
        rings.push(cur);
    }
    Ok(rings)
}

fn attr(node: &roxmltree::Node, name: &str) -> Result<f64, TextureError> {
    let v = node
        .attribute(name)
        .ok_or_else(|| svg_err(format!("<{}> needs {name}", node.tag_name().name())))?;
    let v = v.trim().trim_end_matches("mm");
    v.parse()
        .map_err(|_| svg_err(format!("bad {name} value {v:?}")))
}

fn attr_or(node: &roxmltree::Node, name: &str, default: f64) -> Result<f64, TextureError> {
    if node.attribute(name).is_some() {
        attr(node, name)
    } else {
        Ok(default)
    }
}

fn walk(node: roxmltree::Node, parent: Affine, tol: f64, rings: &mut Vec<Vec<Vec2>>) -> Result<(), TextureError> {
    if !node.is_element() {
        return Ok(());
    }
    for a in node.attributes() {
        if matches!(a.name(), "fill" | "stroke") && a.value().contains("url(") {
            return Err(TextureError::UnsupportedSvg("gradient or pattern paint".into()));
        }
    }
    let t = match node.attribute("transform") {
        Some(s) => parent.then(&parse_transform(s)?),
        None => parent,
    };
    let name = node.tag_name().name();
    let local: Vec<Vec<Vec2>> = match name {
        "svg" | "g" => {
            for child in node.children() {
                walk(child, t, tol, rings)?;
            }
            return Ok(());
        }
        "title" | "desc" | "metadata" => return Ok(()),
        "defs" => {
            for child in node.descendants().filter(|n| n.is_element()) {
                let n = child.tag_name().name();
                if n.contains("Gradient") {
                    return Err(TextureError::UnsupportedSvg(format!("gradient <{n}>")));
                }
            }
            return Ok(());
        }
        "path" => parse_path(node.attribute("d").unwrap_or(""), tol)?,
        "rect" => {
            if node.attribute("rx").is_some() || node.attribute("ry").is_some() {
                return Err(TextureError::UnsupportedSvg("rounded rect".into()));
            }
            let (x, y) = (attr_or(&node, "x", 0.0)?, attr_or(&node, "y", 0.0)?);
            let (w, h) = (attr(&node, "width")?, attr(&node, "height")?);
            vec![vec![
                Vec2::new(x, y),
                Vec2::new(x + w, y),
                Vec2::new(x + w, y + h),
                Vec2::new(x, y + h),
            ]]
        }
        "circle" => {
            let c = Vec2::new(attr_or(&node, "cx", 0.0)?, attr_or(&node, "cy", 0.0)?);
            let r = attr(&node, "r")?;
            vec![circle_ring(c, r, r, tol)]
        }
        "ellipse" => {
            let c = Vec2::new(attr_or(&node, "cx", 0.0)?, attr_or(&node, "cy", 0.0)?);
            vec![circle_ring(c, attr(&node, "rx")?, attr(&node, "ry")?, tol)]
        }
        "polygon" => {
            let n = numbers(node.attribute("points").unwrap_or(""))?;
            if n.len() % 2 != 0 {
                return Err(svg_err("polygon has an odd number of coordinates"));
            }
            vec![n.chunks(2).map(|c| Vec2::new(c[0], c[1])).collect()]
        }
        "polyline" | "line" => return Err(TextureError::OpenPath),
        other => return Err(TextureError::UnsupportedSvg(format!("<{other}>"))),
    };
    rings.extend(local.into_iter().map(|r| r.into_iter().map(|p| t.apply(p)).collect()));
    Ok(())
}

/// Parses an SVG document into one element. Curves are flattened to within
/// `chordal_tolerance`; nesting decides holes by the even-odd rule.
pub fn parse_svg_element(bytes: &[u8], chordal_tolerance: f64) -> Result<TextureElement, TextureError> {
    let text = std::str::from_utf8(bytes).map_err(|e| svg_err(format!("not UTF-8: {e}")))?;
    let doc = roxmltree::Document::parse(text).map_err(|e| svg_err(e.to_string()))?;
    let mut rings = Vec::new();
    walk(doc.root_element(), Affine::IDENTITY, chordal_tolerance, &mut rings)?;
    if rings.is_empty() {
        return Err(svg_err("no closed shape found"));
    }
    // y down to y up
    for r in &mut rings {
        for p in r.iter_mut() {
            p.y = -p.y;
        }
    }
    let (mut lo, mut hi) = (Vec2::repeat(f64::INFINITY), Vec2::repeat(f64::NEG_INFINITY));
    for p in rings.iter().flatten() {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let center = (lo + hi) / 2.0;
    for p in rings.iter_mut().flatten() {
        *p -= center;
    }
    let depth: Vec<usize> = rings
        .iter()
        .enumerate()
        .map(|(i, r)| {
            rings
                .iter()
                .enumerate()
                .filter(|&(j, other)| j != i && point_in_ring(r[0], other))
                .count()
        })
        .collect();
    let outers: Vec<usize> = (0..rings.len()).filter(|&i| depth[i] == 0).collect();
    if outers.len() != 1 {
        return Err(svg_err(format!("expected one outer shape, found {}", outers.len())));
    }
    if depth.iter().any(|&d| d > 1) {
        return Err(TextureError::UnsupportedSvg("island inside a hole".into()));
    }
    let outer = rings[outers[0]].clone();
    let holes = (0..rings.len()).filter(|&i| depth[i] == 1).map(|i| rings[i].clone()).collect();
    TextureElement::new(outer, holes, ElementSource::Svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn svg(body: &str) -> Vec<u8> {
        format!(r#"<svg xmlns="http://www.w3.org/2000/svg">{body}</svg>"#).into_bytes()
    }

    #[test]
    fn rect_is_a_square() {
        let e = parse_svg_element(&svg(r#"<rect x="1" y="1" width="4" height="4"/>"#), 0.05).unwrap();
        assert_eq!(e.outer.len(), 4);
        assert!(e.holes.is_empty());
        assert!((e.area() - 16.0).abs() < 1e-12);
        assert!(e.outer.iter().all(|p| p.x.abs() == 2.0 && p.y.abs() == 2.0));
    }

    #[test]
    fn circle_area_by_shoelace() {
        let e = parse_svg_element(&svg(r#"<circle cx="0" cy="0" r="2"/>"#), 0.05).unwrap();
        let analytic = PI * 4.0;
        assert!((e.area() - analytic).abs() / analytic < 0.005);
    }

    #[test]
    fn nested_rects_make_a_hole() {
        let e = parse_svg_element(
            &svg(r#"<rect width="4" height="4"/><rect x="1" y="1" width="2" height="2"/>"#),
            0.05,
        )
        .unwrap();
        assert_eq!(e.holes.len(), 1);
        assert!((e.area() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn path_commands() {
        let e = parse_svg_element(&svg(r#"<path d="M0,0 h4 v4 H0 z"/>"#), 0.05).unwrap();
        assert!((e.area() - 16.0).abs() < 1e-12);
        let e = parse_svg_element(&svg(r#"<path d="m 0 0 l 4 0 l 0 4 l -4 0 Z"/>"#), 0.05).unwrap();
        assert!((e.area() - 16.0).abs() < 1e-12);
        // quarter-circle-ish cubic lobe closes back
        let e = parse_svg_element(&svg(r#"<path d="M0 0 C 0 -2 4 -2 4 0 Q 2 3 0 0 Z"/>"#), 0.01).unwrap();
        assert!(e.outer.len() > 6);
    }

    #[test]
    fn transforms() {
        let e = parse_svg_element(
            &svg(r#"<g transform="translate(10 5) scale(2)"><rect width="1" height="3"/></g>"#),
            0.05,
        )
        .unwrap();
        assert!((e.area() - 12.0).abs() < 1e-12);
        let err = parse_svg_element(&svg(r#"<g transform="rotate(30)"><rect width="1" height="1"/></g>"#), 0.05).unwrap_err();
        assert_eq!(err, TextureError::UnsupportedSvg("transform rotate".into()));
    }

    #[test]
    fn rejections() {
        assert_eq!(
            parse_svg_element(&svg(r#"<path d="M0 0 L 4 0 L 4 4"/>"#), 0.05).unwrap_err(),
            TextureError::OpenPath
        );
        assert_eq!(
            parse_svg_element(&svg(r#"<text>hi</text>"#), 0.05).unwrap_err(),
            TextureError::UnsupportedSvg("<text>".into())
        );
        assert!(matches!(
            parse_svg_element(
                &svg(r#"<defs><linearGradient id="g"/></defs><rect width="1" height="1" fill="url(#g)"/>"#),
                0.05
            ),
            Err(TextureError::UnsupportedSvg(_))
        ));
        assert!(matches!(
            parse_svg_element(&svg(r#"<path d="M0 0 A 1 1 0 0 0 2 2 Z"/>"#), 0.05),
            Err(TextureError::UnsupportedSvg(_))
        ));
    }
}
