use crate::surface_map::Vec2;
use crate::texture::{StyleKind, TextureStyle};
use crate::Point;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("spec line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("spec: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegionSource {
    Cursor(Point),
    /// Face-index list, one index per line.
    File(PathBuf),
    Whole,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpecPattern {
    Lattice {
        u_step: Vec2,
        v_step: Option<Vec2>,
        counts: Option<[usize; 2]>,
    },
    Path {
        spacing: f64,
        stroke: Vec<Point>,
    },
}

/// Declarative description of one batch texturing job.
///
/// ```text
/// mesh: plate.stl
/// element: dot.svg
/// region-cursor: 8, 8, 3
/// pattern: grid 3x3 step 5
/// style: raised 1.0
/// output: out.stl
/// ```
///
/// Paths are relative to the spec file. The first placement sits at
/// `anchor`, or at the region cursor when no anchor is given.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternSpec {
    pub mesh: Option<PathBuf>,
    pub element: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub region: RegionSource,
    pub anchor: Point,
    pub pattern: SpecPattern,
    /// Radians.
    pub rotation: f64,
    pub scale: f64,
    pub style: TextureStyle,
}

const KEYS: &[&str] = &[
    "mesh",
    "element",
    "output",
    "region-cursor",
    "region-file",
    "anchor",
    "pattern",
    "u-step",
    "v-step",
    "counts",
    "stroke",
    "rotation",
    "scale",
    "style",
];

struct Lines<'a> {
    values: HashMap<&'a str, (usize, &'a str)>,
}

impl<'a> Lines<'a> {
    fn get(&self, key: &str) -> Option<(usize, &'a str)> {
        self.values.get(key).copied()
    }

    fn parse<T>(&self, key: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, SpecError> {
        self.get(key)
            .map(|(line, v)| {
                f(v).map_err(|m| SpecError::Line {
                    line,
                    message: format!("{key}: {m}"),
                })
            })
            .transpose()
    }
}

fn numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split([',', ' '])
        .filter(|t| !t.is_empty())
        .map(|t| {
            let x: f64 = t.parse().map_err(|_| format!("{t:?} is not a number"))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(format!("{t} is not finite"))
            }
        })
        .collect()
}

fn fixed<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v = numbers(s)?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected {N} numbers, got {}", v.len()))
}

fn point(s: &str) -> Result<Point, String> {
    fixed::<3>(s).map(Point::from)
}

fn step(s: &str) -> Result<Vec2, String> {
    let v = fixed::<2>(s).map(|[x, y]| Vec2::new(x, y))?;
    if v.norm() <= 0.0 {
        return Err("step must be non-zero".into());
    }
    Ok(v)
}

fn count(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("count must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(_) => Err(format!("{s:?} is not a count")),
    }
}

fn counts(s: &str) -> Result<[usize; 2], String> {
    let parts: Vec<&str> = s.split([',', 'x', ' ']).filter(|t| !t.is_empty()).collect();
    match parts[..] {
        [a] => Ok([count(a)?, 1]),
        [a, b] => Ok([count(a)?, count(b)?]),
        _ => Err("expected one or two counts".into()),
    }
}

fn spacing(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(format!("step must be positive, got {s}"));
    }
    Ok(x)
}

/// Shorthand pattern line: `grid NxM step S`, `row N step S`, `path step
/// S`, or a bare `grid`, `row` or `path` completed by the step keys.
fn shorthand(s: &str) -> Result<(String, Option<[usize; 2]>, Option<f64>), String> {
    let words: Vec<&str> = s.split_whitespace().collect();
    let (kind, rest) = words.split_first().ok_or("empty pattern")?;
    let mut n = None;
    let mut sp = None;
    let mut rest = rest;
    while let Some((w, tail)) = rest.split_first() {
        match (*w, tail) {
            ("step", [x, tail @ ..]) => {
                sp = Some(spacing(x)?);
                rest = tail;
            }
            (c, _) if n.is_none() && c.starts_with(|ch: char| ch.is_ascii_digit()) => {
                n = Some(counts(c)?);
                rest = tail;
            }
            _ => return Err(format!("unexpected {w:?}")),
        }
    }
    Ok((kind.to_string(), n, sp))
}

fn style(s: &str) -> Result<TextureStyle, String> {
    let mut words = s.split_whitespace();
    let kind = match words.next() {
        Some("raised") => StyleKind::Raised,
        Some("recessed") => StyleKind::Recessed,
        Some("hollow") => StyleKind::Hollow,
        other => return Err(format!("unknown style {other:?}")),
    };
    let rest: Vec<&str> = words.collect();
    let v = numbers(&rest.join(" "))?;
    let (h, t) = match (kind, &v[..]) {
        (StyleKind::Hollow, [h, t]) => (*h, Some(*t)),
        (StyleKind::Hollow, _) => return Err("hollow needs a height and a wall thickness".into()),
        (_, [h]) => (*h, None),
        _ => return Err("expected one height".into()),
    };
    TextureStyle::new(kind, h, t).map_err(|e| e.to_string())
}

impl PatternSpec {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, SpecError> {
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content.split_once(':').ok_or_else(|| SpecError::Line {
                line,
                message: format!("expected `key: value`, got {content:?}"),
            })?;
            let k = k.trim();
            let Some(key) = KEYS.iter().find(|&&x| x == k) else {
                return Err(SpecError::Line {
                    line,
                    message: format!("unknown key {k:?}"),
                });
            };
            if values.insert(*key, (line, v.trim())).is_some() {
                return Err(SpecError::Line {
                    line,
                    message: format!("duplicate key {k:?}"),
                });
            }
        }
        let l = Lines { values };
        let path = |p: &str| -> Result<PathBuf, String> {
            if p.is_empty() {
                Err("empty path".into())
            } else {
                Ok(base_dir.join(p))
            }
        };

        let cursor = l.parse("region-cursor", point)?;
        let file = l.parse("region-file", path)?;
        let region = match (cursor, file) {
            (Some(_), Some(_)) => return Err(SpecError::Invalid("give region-cursor or region-file, not both".into())),
            (Some(c), None) => RegionSource::Cursor(c),
            (None, Some(f)) => RegionSource::File(f),
            (None, None) => RegionSource::Whole,
        };
        let anchor = match (l.parse("anchor", point)?, cursor) {
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(SpecError::Invalid("anchor is required without region-cursor".into())),
        };

        let (pline, ptext) = l
            .get("pattern")
            .ok_or_else(|| SpecError::Invalid("missing key \"pattern\"".into()))?;
        let (kind, n, sp) = shorthand(ptext).map_err(|message| SpecError::Line { line: pline, message })?;
        let u = l.parse("u-step", step)?;
        let v = l.parse("v-step", step)?;
        let explicit_counts = l.parse("counts", counts)?;
        let n = match (n, explicit_counts) {
            (Some(_), Some(_)) => return Err(SpecError::Invalid("counts given twice".into())),
            (a, b) => a.or(b),
        };
        let need_step = || SpecError::Line {
            line: pline,
            message: "pattern needs a step".into(),
        };
        let pattern = match kind.as_str() {
            "grid" => {
                let (u, v) = match (sp, u, v) {
                    (Some(s), None, None) => (Vec2::new(s, 0.0), Vec2::new(0.0, s)),
                    (None, Some(u), Some(v)) => (u, v),
                    (None, None, None) => return Err(need_step()),
                    _ => {
                        return Err(SpecError::Invalid(
                            "grid takes either `step S` or both u-step and v-step".into(),
                        ))
                    }
                };
                SpecPattern::Lattice {
                    u_step: u,
                    v_step: Some(v),
                    counts: n,
                }
            }
            "row" => {
                if v.is_some() {
                    return Err(SpecError::Invalid("row takes no v-step".into()));
                }
                let u = match (sp, u) {
                    (Some(s), None) => Vec2::new(s, 0.0),
                    (None, Some(u)) => u,
                    (None, None) => return Err(need_step()),
                    _ => return Err(SpecError::Invalid("row step given twice".into())),
                };
                SpecPattern::Lattice {
                    u_step: u,
                    v_step: None,
                    counts: n.map(|[a, _]| [a, 1]),
                }
            }
            "path" => {
                let spacing = sp.or(u.map(|u| u.norm())).ok_or_else(need_step)?;
                let stroke = l
                    .parse("stroke", |s| s.split(';').map(point).collect::<Result<Vec<_>, _>>())?
                    .ok_or_else(|| SpecError::Invalid("path pattern needs a stroke".into()))?;
                if stroke.len() < 2 {
                    return Err(SpecError::Invalid("stroke needs at least two points".into()));
                }
                SpecPattern::Path { spacing, stroke }
            }
            other => {
                return Err(SpecError::Line {
                    line: pline,
                    message: format!("unknown pattern kind {other:?}"),
                })
            }
        };

        let rotation = l.parse("rotation", |s| fixed::<1>(s).map(|[d]| d.to_radians()))?.unwrap_or(0.0);
        let scale = l
            .parse("scale", |s| {
                let [x] = fixed::<1>(s)?;
                if x > 0.0 {
                    Ok(x)
                } else {
                    Err(format!("scale must be positive, got {x}"))
                }
            })?
            .unwrap_or(1.0);
        let style = l
            .parse("style", style)?
            .ok_or_else(|| SpecError::Invalid("missing key \"style\"".into()))?;

        Ok(PatternSpec {
            mesh: l.parse("mesh", path)?,
            element: l.parse("element", path)?,
            output: l.parse("output", path)?,
            region,
            anchor,
            pattern,
            rotation,
            scale,
            style,
        })
    }
}
