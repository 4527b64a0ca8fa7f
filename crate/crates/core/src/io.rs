//! JSON and SVG serialization of Ammann patterns, dual tilings and prototile
//! tables. Exact numbers a + b√D are written as pairs of reduced-fraction
//! strings ["a", "b"] with D stored once in the metadata.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ammann::{AmmannPattern, Window};
use crate::dual::{Point, PrototileReport, Segment, Tiling};
use crate::error::{Error, Result};
use crate::exactfield::{rational_string, QuadNum};

/// An exact number as ["a", "b"].
pub type ExactPair = [String; 2];
/// A point of the plane as two exact coordinates.
pub type ExactPoint = [ExactPair; 2];

pub fn quad_pair(x: &QuadNum) -> ExactPair {
    x.to_strings()
}

pub fn parse_pair(p: &ExactPair, d: u32) -> Result<QuadNum> {
    QuadNum::from_strings(&p[0], &p[1], d).ok_or_else(|| Error::Invalid(format!("bad exact number [{}, {}]", p[0], p[1])))
}

pub fn point_pair(p: &Point) -> ExactPoint {
    [quad_pair(&p[0]), quad_pair(&p[1])]
}

pub fn parse_point(p: &ExactPoint, d: u32) -> Result<Point> {
    Ok([parse_pair(&p[0], d)?, parse_pair(&p[1], d)?])
}

/// Rounds to nine decimals so float output does not depend on the last ulp.
fn round9(x: f64) -> f64 {
    let r = (x * 1e9).round() / 1e9;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn compact<T: Serialize>(x: &T) -> String {
    serde_json::to_string(x).expect("documents always serialize")
}

fn json_list<T: Serialize>(key: &str, items: &[T]) -> String {
    let mut s = format!(",\n\"{}\": [", key);
    for (i, x) in items.iter().enumerate() {
        s += if i == 0 { "\n" } else { ",\n" };
        s += &compact(x);
    }
    s += if items.is_empty() { "]" } else { "\n]" };
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TilingMeta {
    pub symmetry: String,
    pub row: String,
    /// Rational slice origin in ambient coordinates; empty when irrational.
    pub q0: Vec<String>,
    /// Disk radius.
    pub window: String,
    #[serde(rename = "D")]
    pub d: u32,
    /// Frame vectors g, h: positions are c1·g + c2·h.
    pub frame: [Vec<ExactPair>; 2],
    /// Edge vectors of the star in frame coordinates.
    pub edge_vectors: Vec<ExactPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexDoc {
    pub nu: Vec<String>,
    pub pos_exact: ExactPoint,
    pub pos_float: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceDoc {
    /// Vertex indices, counterclockwise.
    pub cells: Vec<usize>,
    /// Edge direction indices.
    pub edges: Vec<usize>,
    pub class_id: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassDoc {
    pub id: usize,
    pub shape: Vec<usize>,
    pub count: usize,
    /// Segments in tile-local coordinates.
    pub decoration: Vec<[ExactPoint; 2]>,
    /// Clipped child tiles in tile-local coordinates.
    pub inflation_patch: Vec<Vec<ExactPoint>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TilingDoc {
    pub meta: TilingMeta,
    pub vertices: Vec<VertexDoc>,
    pub faces: Vec<FaceDoc>,
    pub classes: Vec<ClassDoc>,
}

impl TilingDoc {
    pub fn from_tiling(t: &Tiling) -> Self {
        let meta = TilingMeta {
            symmetry: t.symmetry.to_string(),
            row: t.row.to_string(),
            q0: t.q0.to_rational().map(|v| v.iter().map(rational_string).collect()).unwrap_or_default(),
            window: rational_string(&t.window.radius),
            d: t.d,
            frame: [t.frame.g.iter().map(quad_pair).collect(), t.frame.h.iter().map(quad_pair).collect()],
            edge_vectors: t.edge_vectors.iter().map(point_pair).collect(),
        };
        let vertices = t
            .vertices
            .iter()
            .map(|v| {
                let f = t.to_float(&v.pos);
                VertexDoc {
                    nu: v.nu().iter().map(rational_string).collect(),
                    pos_exact: point_pair(&v.pos),
                    pos_float: [round9(f[0]), round9(f[1])],
                }
            })
            .collect();
        let faces = t
            .faces
            .iter()
            .map(|f| FaceDoc { cells: f.vertices.clone(), edges: f.edges.clone(), class_id: None })
            .collect();
        TilingDoc { meta, vertices, faces, classes: Vec::new() }
    }

    /// The tiling with class ids and the class table.
    pub fn from_report(r: &PrototileReport) -> Self {
        let mut doc = Self::from_tiling(&r.tiling);
        for (f, &c) in doc.faces.iter_mut().zip(&r.face_class) {
            f.class_id = Some(c);
        }
        doc.classes = r
            .classes
            .iter()
            .map(|c| ClassDoc {
                id: c.id,
                shape: c.shape.clone(),
                count: c.count,
                decoration: c.decoration.iter().map(|s| [point_pair(&s[0]), point_pair(&s[1])]).collect(),
                inflation_patch: c.inflation_patch.iter().map(|p| p.iter().map(point_pair).collect()).collect(),
            })
            .collect();
        doc
    }

    /// JSON with one line per vertex, face and class.
    pub fn to_json(&self) -> String {
        let mut s = String::from("{\n\"meta\": ");
        s += &compact(&self.meta);
        s += &json_list("vertices", &self.vertices);
        s += &json_list("faces", &self.faces);
        s += &json_list("classes", &self.classes);
        s += "\n}\n";
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: TilingDoc = serde_json::from_str(s).map_err(|e| Error::Invalid(format!("tiling JSON: {}", e)))?;
        let n = doc.vertices.len();
        if doc.faces.iter().flat_map(|f| &f.cells).any(|&c| c >= n) {
            return Err(Error::Invalid("face refers to a missing vertex".into()));
        }
        Ok(doc)
    }

    /// Exact vertex positions in frame coordinates.
    pub fn positions(&self) -> Result<Vec<Point>> {
        self.vertices.iter().map(|v| parse_point(&v.pos_exact, self.meta.d)).collect()
    }

    pub fn decorations(&self) -> Result<Vec<Vec<Segment>>> {
        let d = self.meta.d;
        self.classes
            .iter()
            .map(|c| c.decoration.iter().map(|s| Ok([parse_point(&s[0], d)?, parse_point(&s[1], d)?])).collect())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternMeta {
    pub symmetry: String,
    pub row: String,
    pub q0: Vec<String>,
    pub window: String,
    #[serde(rename = "D")]
    pub d: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneDoc {
    /// Direction index.
    pub j: usize,
    pub n: i64,
    /// Value of x ↦ a_j·x on the plane.
    pub offset: ExactPair,
    pub offset_float: f64,
}

/// Plane list of an Ammann pattern in any dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternDoc {
    pub meta: PatternMeta,
    /// Star directions a_j in ambient parallel coordinates.
    pub directions: Vec<Vec<ExactPair>>,
    pub planes: Vec<PlaneDoc>,
}

impl PatternDoc {
    pub fn new(pattern: &AmmannPattern, window: &Window) -> Result<Self> {
        let planes = pattern
            .planes_in_window(window)?
            .into_iter()
            .map(|p| PlaneDoc { j: p.j, n: p.n, offset_float: round9(p.offset.to_f64()), offset: quad_pair(&p.offset) })
            .collect();
        Ok(PatternDoc {
            meta: PatternMeta {
                symmetry: pattern.symmetry.to_string(),
                row: pattern.class.row_id.to_string(),
                q0: pattern.q0.to_rational().map(|v| v.iter().map(rational_string).collect()).unwrap_or_default(),
                window: rational_string(&window.radius),
                d: pattern.d(),
            },
            directions: pattern.star.directions.iter().map(|a| a.iter().map(quad_pair).collect()).collect(),
            planes,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = String::from("{\n\"meta\": ");
        s += &compact(&self.meta);
        s += &json_list("directions", &self.directions);
        s += &json_list("planes", &self.planes);
        s += "\n}\n";
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Invalid(format!("pattern JSON: {}", e)))
    }
}

/// Stroke of one SVG layer; the width is a multiple of the unit length.
#[derive(Clone, Debug, PartialEq)]
pub struct Stroke {
    pub color: String,
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Style {
    pub tiling: Stroke,
    pub decoration: Stroke,
    pub inflation: Stroke,
    pub lines: Stroke,
}

impl Default for Style {
    fn default() -> Self {
        Style {
            tiling: Stroke { color: "#6a1b9a".into(), width: 0.08 },
            decoration: Stroke { color: "#1565c0".into(), width: 0.025 },
            inflation: Stroke { color: "#e0529c".into(), width: 0.025 },
            lines: Stroke { color: "#1565c0".into(), width: 0.04 },
        }
    }
}

/// Polylines drawn with one stroke.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub id: String,
    pub color: String,
    pub width: f64,
    pub paths: Vec<(Vec<[f64; 2]>, bool)>,
}

impl Layer {
    pub fn new(id: &str, stroke: &Stroke, unit: f64) -> Self {
        Layer { id: id.into(), color: stroke.color.clone(), width: stroke.width * unit, paths: Vec::new() }
    }

    pub fn polygon(&mut self, pts: Vec<[f64; 2]>) {
        self.paths.push((pts, true));
    }

    pub fn segment(&mut self, a: [f64; 2], b: [f64; 2]) {
        self.paths.push((vec![a, b], false));
    }
}

fn num(x: f64) -> String {
    let s = format!("{:.4}", x);
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

/// SVG document of the layers in order, view box [x0, y0, x1, y1] in world
/// coordinates with y pointing up.
pub fn serialize_svg(layers: &[Layer], view: [f64; 4]) -> String {
    let (w, h) = (view[2] - view[0], view[3] - view[1]);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\" width=\"800\" height=\"{}\">",
        num(view[0]),
        num(-view[3]),
        num(w),
        num(h),
        (800.0 * h / w.max(1e-12)).round() as i64
    );
    for l in layers {
        let _ = writeln!(
            s,
            "  <g id=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\" stroke-linejoin=\"round\" stroke-linecap=\"round\">",
            l.id,
            l.color,
            num(l.width)
        );
        for (pts, closed) in &l.paths {
            let mut d = String::new();
            for (i, p) in pts.iter().enumerate() {
                let _ = write!(d, "{}{} {}", if i == 0 { "M" } else { " L" }, num(p[0]), num(-p[1]));
            }
            if *closed {
                d.push_str(" Z");
            }
            let _ = writeln!(s, "    <path d=\"{}\"/>", d);
        }
        s.push_str("  </g>\n");
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(layers: &[Layer], pad: f64) -> [f64; 4] {
    let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for p in layers.iter().flat_map(|l| &l.paths).flat_map(|(p, _)| p) {
        b[0] = b[0].min(p[0]);
        b[1] = b[1].min(p[1]);
        b[2] = b[2].max(p[0]);
        b[3] = b[3].max(p[1]);
    }
    if !b[0].is_finite() {
        return [-1.0, -1.0, 1.0, 1.0];
    }
    [b[0] - pad, b[1] - pad, b[2] + pad, b[3] + pad]
}

/// Tiling, decoration and inflation layers, in that order. Decorations are
/// per-face segments and inflation pieces are polygons, both in frame
/// coordinates.
pub fn tiling_svg(t: &Tiling, decoration: Option<&[Vec<Segment>]>, inflation: Option<&[Vec<Point>]>, style: &Style) -> String {
    let unit = if t.edge_vectors.is_empty() { 1.0 } else { t.edge_length() };
    let mut tiles = Layer::new("tiling", &style.tiling, unit);
    for f in &t.faces {
        tiles.polygon(t.face_points(f).iter().map(|p| t.to_float(p)).collect());
    }
    let mut layers = vec![tiles];
    if let Some(dec) = decoration {
        let mut l = Layer::new("decoration", &style.decoration, unit);
        for s in dec.iter().flatten() {
            l.segment(t.to_float(&s[0]), t.to_float(&s[1]));
        }
        layers.push(l);
    }
    if let Some(inf) = inflation {
        let mut l = Layer::new("inflation", &style.inflation, unit);
        for p in inf {
            l.polygon(p.iter().map(|x| t.to_float(x)).collect());
        }
        layers.push(l);
    }
    let view = bounds(&layers[..1], unit);
    serialize_svg(&layers, view)
}

/// Axis-aligned clip rectangle [x0, x1, y0, y1].
pub type BoxWindow = [f64; 4];

/// Part of the line {p + s·v} inside the box.
fn clip_line(p: [f64; 2], v: [f64; 2], b: &BoxWindow) -> Option<([f64; 2], [f64; 2])> {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (k, (min, max)) in [(b[0], b[1]), (b[2], b[3])].into_iter().enumerate() {
        if v[k].abs() < 1e-15 {
            if p[k] < min || p[k] > max {
                return None;
            }
        } else {
            let (s0, s1) = ((min - p[k]) / v[k], (max - p[k]) / v[k]);
            lo = lo.max(s0.min(s1));
            hi = hi.min(s0.max(s1));
        }
    }
    (lo < hi).then(|| ([p[0] + lo * v[0], p[1] + lo * v[1]], [p[0] + hi * v[0], p[1] + hi * v[1]]))
}

/// Lines of a planar pattern clipped to a box.
pub fn pattern_svg(pattern: &AmmannPattern, clip: &BoxWindow, style: &Style) -> Result<String> {
    let frame = pattern
        .frame()
        .ok_or_else(|| Error::Unsupported(format!("SVG output needs a planar pattern, got {}; use JSON", pattern.symmetry)))?;
    let w = pattern.line_coeffs().unwrap();
    let window = Window::new(circumscribed_radius(clip));
    let unit = pattern.max_step().to_f64() / pattern.star.a_norm2.to_f64().sqrt();
    let mut layer = Layer::new("lines", &style.lines, unit);
    for p in pattern.planes_in_window(&window)? {
        let wj = &w[p.j];
        let ww = &(&wj[0] * &wj[0]) + &(&wj[1] * &wj[1]);
        let s = &p.offset / &ww;
        let base = frame.to_float(&[&s * &wj[0], &s * &wj[1]]);
        let dir = frame.to_float(&[-wj[1].clone(), wj[0].clone()]);
        if let Some((a, b)) = clip_line(base, dir, clip) {
            layer.segment(a, b);
        }
    }
    let mut frame_layer = Layer::new("window", &Stroke { color: "#999999".into(), width: style.lines.width / 2.0 }, unit);
    frame_layer.polygon(vec![[clip[0], clip[2]], [clip[1], clip[2]], [clip[1], clip[3]], [clip[0], clip[3]]]);
    let view = [clip[0] - unit, clip[2] - unit, clip[1] + unit, clip[3] + unit];
    Ok(serialize_svg(&[layer, frame_layer], view))
}

/// Smallest rational radius r with r ≥ the farthest box corner distance,
/// rounded up to 1/1000.
pub fn circumscribed_radius(b: &BoxWindow) -> crate::Rational {
    let r = [b[0], b[1]]
        .iter()
        .flat_map(|x| [b[2], b[3]].map(|y| (x * x + y * y).sqrt()))
        .fold(0.0, f64::max);
    crate::Rational::new(((r * 1000.0).ceil() as i64).into(), 1000.into())
}

/// Seed and disk radius of the frozen tiling fixtures.
pub const FIXTURE_SEED: u64 = 2024;
pub const FIXTURE_RADIUS: i64 = 3;

/// The fixture document of one minimal planar case.
pub fn fixture_document(symmetry: crate::ammann::Symmetry, row: crate::quasilattice1d::RowId) -> Result<TilingDoc> {
    let window = Window::new(crate::exactfield::rat(FIXTURE_RADIUS, 1));
    let (pattern, _) = crate::ammann::generic_pattern(symmetry, row, FIXTURE_SEED, &window)?;
    Ok(TilingDoc::from_tiling(&crate::dual::dualize(&pattern, &window)?))
}
