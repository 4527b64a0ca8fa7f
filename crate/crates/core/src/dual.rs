//! Dual tilings of planar Ammann patterns: vertices from cell coordinates,
//! faces around line intersections, prototile classes, Ammann decorations,
//! inflation patches and wall-to-wall checks.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use crate::ammann::{planes_between, AmmannPattern, GridPlane, SliceOrigin, Symmetry, Window};
use crate::error::{Error, Result};
use crate::exactfield::{rat, QuadNum, Rational};
use crate::linalg;
use crate::quasilattice1d::{QuasilatticeSpec, RowId};
use crate::rootsystems::PlaneFrame;

pub type Point = [QuadNum; 2];
pub type Segment = [Point; 2];

fn sub(p: &Point, q: &Point) -> Point {
    [&p[0] - &q[0], &p[1] - &q[1]]
}

fn add(p: &Point, q: &Point) -> Point {
    [&p[0] + &q[0], &p[1] + &q[1]]
}

fn scale(s: &QuadNum, p: &Point) -> Point {
    [s * &p[0], s * &p[1]]
}

fn dot2(w: &Point, p: &Point) -> QuadNum {
    &w[0] * &p[0] + &w[1] * &p[1]
}

fn cross2(u: &Point, v: &Point) -> QuadNum {
    &u[0] * &v[1] - &u[1] * &v[0]
}

fn float_quad(x: f64, d: u32) -> QuadNum {
    QuadNum::from_rational(Rational::from_float(x).unwrap(), d)
}

/// Offsets of one direction's lines, sorted.
#[derive(Clone, Debug)]
struct Family {
    lines: Vec<(i64, QuadNum)>,
}

impl Family {
    fn build(spec: &QuasilatticeSpec, j: usize, bound: &QuadNum) -> Result<Self> {
        let lines = planes_between(spec, &-bound.clone(), bound).map_err(|e| match e {
            Error::SingularPhase { n } => Error::SingularDirection { direction: j, n },
            e => e,
        })?;
        Ok(Family { lines })
    }

    /// n with x_n < v < x_{n+1}.
    fn locate(&self, v: &QuadNum) -> Result<std::result::Result<i64, i64>> {
        let idx = self.lines.partition_point(|(_, t)| t < v);
        if idx == 0 || idx == self.lines.len() {
            return Err(Error::Computation("point outside the generated line range".into()));
        }
        if self.lines[idx].1 == *v {
            return Ok(Err(self.lines[idx].0));
        }
        Ok(Ok(self.lines[idx - 1].0))
    }

    fn between(&self, lo: &QuadNum, hi: &QuadNum) -> &[(i64, QuadNum)] {
        let a = self.lines.partition_point(|(_, t)| t < lo);
        let b = self.lines.partition_point(|(_, t)| t <= hi);
        &self.lines[a..b.max(a)]
    }
}

/// Planar geometry shared by a pattern and its refinement.
#[derive(Clone, Debug)]
struct Geometry {
    d: u32,
    frame: PlaneFrame,
    /// a_j·x = w_j·c for frame coordinates c.
    w: Vec<Point>,
    /// a_j in frame coordinates.
    a: Vec<Point>,
    /// −q0⁺ in frame coordinates.
    origin: Point,
    a_norm: f64,
}

impl Geometry {
    fn new(pattern: &AmmannPattern) -> Result<Self> {
        let frame = pattern
            .frame()
            .ok_or_else(|| Error::Unsupported(format!("dualization needs a planar pattern, got {}", pattern.symmetry)))?
            .clone();
        let w = pattern.line_coeffs().unwrap();
        let a = pattern.star.directions.iter().map(|v| frame.coords(v)).collect();
        let origin = frame.coords(&linalg::neg_vec(&pattern.q0.plus));
        Ok(Geometry { d: pattern.d(), frame, w, a, origin, a_norm: pattern.star.a_norm2.to_f64().sqrt() })
    }

    fn j(&self) -> usize {
        self.w.len()
    }

    fn offset_bound(&self, radius: f64) -> QuadNum {
        float_quad(radius * self.a_norm * 1.0001 + 1e-9, self.d)
    }

    fn to_float(&self, p: &Point) -> [f64; 2] {
        self.frame.to_float(p)
    }

    fn angle(&self, v: &Point) -> f64 {
        let f = self.to_float(v);
        let t = f[1].atan2(f[0]);
        if t < -1e-12 {
            t + 2.0 * std::f64::consts::PI
        } else {
            t.max(0.0)
        }
    }
}

/// A tiling vertex: the cell with half-integer coordinates ν_j = n_j + ½.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub n: Vec<i64>,
    pub pos: Point,
    /// A point strictly inside the dual cell; the intersection point itself
    /// for refined tilings.
    pub witness: Point,
}

impl Vertex {
    pub fn nu(&self) -> Vec<Rational> {
        self.n.iter().map(|&n| rat(2 * n + 1, 2)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    /// Vertex indices, counterclockwise.
    pub vertices: Vec<usize>,
    /// Edge direction indices into the 2J-star, edge i running from vertex i to i + 1.
    pub edges: Vec<usize>,
    /// The line intersection dual to this face.
    pub center: Point,
    pub lines: Vec<(usize, i64)>,
}

#[derive(Clone, Debug)]
pub struct Tiling {
    pub symmetry: Symmetry,
    pub row: RowId,
    pub q0: SliceOrigin,
    pub window: Window,
    pub d: u32,
    pub frame: PlaneFrame,
    pub vertices: Vec<Vertex>,
    pub faces: Vec<Face>,
    pub gamma: QuadNum,
    pub mean_step: QuadNum,
    /// ⟨m⁺⟩/γ times the level scale.
    pub coef: QuadNum,
    /// Edge vectors of the 2J-star in frame coordinates, counterclockwise.
    pub edge_vectors: Vec<Point>,
}

impl Tiling {
    pub fn star_size(&self) -> usize {
        self.edge_vectors.len()
    }

    pub fn face_points(&self, f: &Face) -> Vec<Point> {
        f.vertices.iter().map(|&v| self.vertices[v].pos.clone()).collect()
    }

    /// Area in frame units (true area divided by |g||h|).
    pub fn face_area(&self, f: &Face) -> QuadNum {
        polygon_area(&self.face_points(f))
    }

    /// Unordered vertex pairs joined by a face edge.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for f in &self.faces {
            let m = f.vertices.len();
            for i in 0..m {
                let (a, b) = (f.vertices[i], f.vertices[(i + 1) % m]);
                out.push((a.min(b), a.max(b)));
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Number of faces on each edge.
    pub fn edge_multiplicity(&self) -> HashMap<(usize, usize), usize> {
        let mut out = HashMap::new();
        for f in &self.faces {
            let m = f.vertices.len();
            for i in 0..m {
                let (a, b) = (f.vertices[i], f.vertices[(i + 1) % m]);
                *out.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        out
    }

    /// True when the vertex set is closed under x → −x.
    pub fn is_inversion_symmetric(&self) -> bool {
        let set: std::collections::HashSet<&Point> = self.vertices.iter().map(|v| &v.pos).collect();
        self.vertices.iter().all(|v| set.contains(&[-v.pos[0].clone(), -v.pos[1].clone()]))
    }

    pub fn to_float(&self, p: &Point) -> [f64; 2] {
        self.frame.to_float(p)
    }

    /// Edge length in physical units.
    pub fn edge_length(&self) -> f64 {
        let e = &self.edge_vectors[0];
        self.frame.inner(e, e).to_f64().sqrt()
    }
}

/// Signed shoelace area of a polygon in frame units.
pub fn polygon_area(pts: &[Point]) -> QuadNum {
    let d = pts.first().map(|p| p[0].d()).unwrap_or(5);
    let mut s = QuadNum::zero(d);
    for i in 0..pts.len() {
        s += &cross2(&pts[i], &pts[(i + 1) % pts.len()]);
    }
    s.scale(&rat(1, 2))
}

struct Builder<'a> {
    geo: &'a Geometry,
    families: Vec<Family>,
    coef: QuadNum,
    edge_vectors: Vec<Point>,
    /// (j, sign) → index into edge_vectors; sign 0 is +a_j.
    edge_index: Vec<[usize; 2]>,
    vertex_ids: HashMap<Vec<i64>, usize>,
    vertices: Vec<Vertex>,
    min_step: f64,
    witnesses: bool,
}

impl<'a> Builder<'a> {
    fn new(geo: &'a Geometry, specs: &[QuasilatticeSpec], bound: &QuadNum, mean: &QuadNum, gamma: &QuadNum) -> Result<Self> {
        let families = specs.iter().enumerate().map(|(j, s)| Family::build(s, j, bound)).collect::<Result<Vec<_>>>()?;
        let coef = mean / gamma;
        let mut star: Vec<(f64, usize, usize, Point)> = Vec::new();
        for (j, a) in geo.a.iter().enumerate() {
            let plus = scale(&coef, a);
            let minus = [-plus[0].clone(), -plus[1].clone()];
            star.push((geo.angle(&plus), j, 0, plus));
            star.push((geo.angle(&minus), j, 1, minus));
        }
        star.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let m = star.len();
        for (i, s) in star.iter().enumerate() {
            let expect = star[0].0 + 2.0 * std::f64::consts::PI * i as f64 / m as f64;
            if (s.0 - expect).abs() > 1e-6 {
                return Err(Error::Computation("edge star is not evenly spaced".into()));
            }
        }
        let mut edge_index = vec![[0usize; 2]; geo.j()];
        for (i, s) in star.iter().enumerate() {
            edge_index[s.1][s.2] = i;
        }
        let min_step = specs[0].m1_plus.clone().min(specs[0].m2_plus.clone()).to_f64() * specs[0].scale.to_f64() / geo.a_norm;
        Ok(Builder {
            geo,
            families,
            coef,
            edge_vectors: star.into_iter().map(|s| s.3).collect(),
            edge_index,
            vertex_ids: HashMap::new(),
            vertices: Vec::new(),
            min_step,
            witnesses: true,
        })
    }

    fn cell_of(&self, p: &Point) -> Result<Vec<i64>> {
        let mut n = Vec::with_capacity(self.geo.j());
        for (j, f) in self.families.iter().enumerate() {
            match f.locate(&dot2(&self.geo.w[j], p))? {
                Ok(k) => n.push(k),
                Err(k) => return Err(Error::Computation(format!("point lies on line ({}, {})", j, k))),
            }
        }
        Ok(n)
    }

    fn position(&self, n: &[i64]) -> Point {
        let d = self.geo.d;
        let mut s = [QuadNum::zero(d), QuadNum::zero(d)];
        for (j, &k) in n.iter().enumerate() {
            let nu = QuadNum::from_rational(rat(2 * k + 1, 2), d);
            s = add(&s, &scale(&nu, &self.geo.a[j]));
        }
        add(&self.geo.origin, &scale(&self.coef, &s))
    }

    fn witness(&self, center: &Point, dir: &Point, n: &[i64]) -> Result<Point> {
        let len = {
            let f = self.geo.to_float(dir);
            (f[0] * f[0] + f[1] * f[1]).sqrt()
        };
        let mut eps = float_quad(0.01 * self.min_step / len, self.geo.d);
        for _ in 0..40 {
            let p = add(center, &scale(&eps, dir));
            if self.cell_of(&p).ok().as_deref() == Some(n) {
                return Ok(p);
            }
            eps = eps.scale(&rat(1, 2));
        }
        Err(Error::Computation("no witness point found for a cell".into()))
    }

    fn vertex(&mut self, n: Vec<i64>, center: &Point, dir: &Point) -> Result<usize> {
        if let Some(&i) = self.vertex_ids.get(&n) {
            return Ok(i);
        }
        let witness = if self.witnesses { self.witness(center, dir, &n)? } else { center.clone() };
        let pos = self.position(&n);
        let i = self.vertices.len();
        self.vertices.push(Vertex { n: n.clone(), pos, witness });
        self.vertex_ids.insert(n, i);
        Ok(i)
    }

    fn face(&mut self, center: Point, lines: Vec<(usize, i64)>) -> Result<Face> {
        let geo = self.geo;
        let mut base = Vec::with_capacity(geo.j());
        for j in 0..geo.j() {
            match lines.iter().find(|l| l.0 == j) {
                Some(&(_, n)) => base.push(n),
                None => match self.families[j].locate(&dot2(&geo.w[j], &center))? {
                    Ok(n) => base.push(n),
                    Err(n) => return Err(Error::Computation(format!("line ({}, {}) missing from intersection", j, n))),
                },
            }
        }
        let mut rays: Vec<(f64, Point)> = Vec::new();
        for &(j, _) in &lines {
            let u = [-geo.w[j][1].clone(), geo.w[j][0].clone()];
            let v = [-u[0].clone(), -u[1].clone()];
            rays.push((geo.angle(&u), u));
            rays.push((geo.angle(&v), v));
        }
        rays.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let k = rays.len();
        let mut ids = Vec::with_capacity(k);
        let mut keys = Vec::with_capacity(k);
        for i in 0..k {
            let dir = add(&rays[i].1, &rays[(i + 1) % k].1);
            let mut n = base.clone();
            for &(j, nj) in &lines {
                let s = dot2(&geo.w[j], &dir);
                n[j] = if s.is_positive() { nj } else { nj - 1 };
            }
            keys.push(n.clone());
            ids.push(self.vertex(n, &center, &dir)?);
        }
        let mut edges = Vec::with_capacity(k);
        for i in 0..k {
            let (p, q) = (&keys[i], &keys[(i + 1) % k]);
            let diff: Vec<(usize, i64)> = (0..geo.j()).filter(|&j| p[j] != q[j]).map(|j| (j, q[j] - p[j])).collect();
            match diff.as_slice() {
                [(j, 1)] => edges.push(self.edge_index[*j][0]),
                [(j, -1)] => edges.push(self.edge_index[*j][1]),
                _ => return Err(Error::Computation("adjacent cells differ in more than one coordinate".into())),
            }
        }
        Ok(Face { vertices: ids, edges, center, lines })
    }
}

fn rational_to_f64(r: &Rational) -> f64 {
    QuadNum::from_rational(r.clone(), 5).to_f64()
}

/// Dual tiling of the given line families; faces are those whose
/// intersection point lies in the window.
fn build_tiling(pattern: &AmmannPattern, specs: &[QuasilatticeSpec], window: &Window, witnesses: bool) -> Result<Tiling> {
    let geo = Geometry::new(pattern)?;
    let r = rational_to_f64(&window.radius);
    let long = specs[0].long_length().to_f64() / geo.a_norm;
    let bound = geo.offset_bound(r + 2.0 * long);
    let mean = specs[0].mean_spacing()?;
    let gamma = pattern.star.gamma.clone();
    let mut b = Builder::new(&geo, specs, &bound, &mean, &gamma)?;
    b.witnesses = witnesses;

    let inner = geo.offset_bound(r);
    let r2 = QuadNum::from_rational(window.radius2(), geo.d);
    let mut points: BTreeMap<Point, Vec<(usize, i64)>> = BTreeMap::new();
    let sub: Vec<Vec<(i64, QuadNum)>> = b.families.iter().map(|f| f.between(&-inner.clone(), &inner).to_vec()).collect();
    for j in 0..geo.j() {
        for k in j + 1..geo.j() {
            let det = cross2(&geo.w[j], &geo.w[k]);
            if det.is_zero() {
                continue;
            }
            let inv = det.inv()?;
            let (wf, detf) = ([geo.w[j][0].to_f64(), geo.w[j][1].to_f64(), geo.w[k][0].to_f64(), geo.w[k][1].to_f64()], det.to_f64());
            let (gg, hh) = (geo.frame.gg.to_f64(), geo.frame.hh.to_f64());
            let rf2 = r * r * (1.0 + 1e-6) + 1e-9;
            for (nj, tj) in &sub[j] {
                let tjf = tj.to_f64();
                for (nk, tk) in &sub[k] {
                    let tkf = tk.to_f64();
                    let cf = [(tjf * wf[3] - tkf * wf[1]) / detf, (tkf * wf[0] - tjf * wf[2]) / detf];
                    if cf[0] * cf[0] * gg + cf[1] * cf[1] * hh > rf2 {
                        continue;
                    }
                    let c = [
                        &(tj * &geo.w[k][1] - tk * &geo.w[j][1]) * &inv,
                        &(tk * &geo.w[j][0] - tj * &geo.w[k][0]) * &inv,
                    ];
                    if geo.frame.inner(&c, &c) > r2 {
                        continue;
                    }
                    let e = points.entry(c).or_default();
                    for key in [(j, *nj), (k, *nk)] {
                        if !e.contains(&key) {
                            e.push(key);
                        }
                    }
                }
            }
        }
    }
    let mut faces = Vec::with_capacity(points.len());
    for (c, mut lines) in points {
        lines.sort();
        faces.push(b.face(c, lines)?);
    }
    Ok(Tiling {
        symmetry: pattern.symmetry,
        row: pattern.class.row_id,
        q0: pattern.q0.clone(),
        window: window.clone(),
        d: geo.d,
        frame: geo.frame.clone(),
        vertices: b.vertices,
        faces,
        gamma,
        mean_step: mean.clone(),
        coef: b.coef,
        edge_vectors: b.edge_vectors,
    })
}

/// The dual tiling x′ = −q0⁺ + (⟨m⁺⟩/γ)Σν_j a_j.
pub fn dualize(pattern: &AmmannPattern, window: &Window) -> Result<Tiling> {
    build_tiling(pattern, &pattern.per_direction, window, true)
}

/// The dual of the one-level refined pattern, scaled down by λ⁺.
pub fn refined_tiling(pattern: &AmmannPattern, window: &Window) -> Result<Tiling> {
    build_tiling(pattern, &pattern.refined_specs(), window, false)
}

/// ν of the cell containing a point, recomputed from the line families.
pub fn cell_of(pattern: &AmmannPattern, window: &Window, p: &Point) -> Result<Vec<i64>> {
    let geo = Geometry::new(pattern)?;
    let r = rational_to_f64(&window.radius);
    let long = pattern.max_step().to_f64() / geo.a_norm;
    let bound = geo.offset_bound(r + 2.0 * long);
    let b = Builder::new(&geo, &pattern.per_direction, &bound, &pattern.per_direction[0].mean_spacing()?, &pattern.star.gamma)?;
    b.cell_of(p)
}

/// Window radius in multiples of the tile edge length.
pub fn window_for_edges(pattern: &AmmannPattern, edges: i64) -> Result<Window> {
    let mean = pattern.per_direction[0].mean_spacing()?.to_f64();
    let edge = mean / pattern.star.gamma.to_f64() * pattern.star.a_norm2.to_f64().sqrt();
    let r = (edges as f64 * edge * 8.0).ceil() as i64;
    Ok(Window::new(rat(r.max(1), 8)))
}

/// One choice of anchor vertex and traversal direction for a face.
#[derive(Clone, Debug)]
struct FaceFrame {
    anchor: usize,
    forward: bool,
}

/// Canonical edge sequence of a face and the anchors attaining it.
fn canonical_shape(face: &Face, m: usize, chiral: bool) -> (Vec<usize>, Vec<FaceFrame>) {
    let k = face.edges.len();
    let half = m / 2;
    let mut best: Option<Vec<usize>> = None;
    let mut frames = Vec::new();
    for forward in [true, false] {
        if !forward && chiral {
            continue;
        }
        for s in 0..k {
            let seq: Vec<usize> = if forward {
                (0..k).map(|i| face.edges[(s + i) % k]).collect()
            } else {
                (0..k).map(|i| (m - (face.edges[(s + k - i - 1) % k] + half) % m) % m).collect()
            };
            let seq: Vec<usize> = seq.iter().map(|&x| (x + m - seq[0]) % m).collect();
            match best.as_ref().map(|b| seq.cmp(b)) {
                None | Some(Ordering::Less) => {
                    best = Some(seq);
                    frames = vec![FaceFrame { anchor: s, forward }];
                }
                Some(Ordering::Equal) => frames.push(FaceFrame { anchor: s, forward }),
                Some(Ordering::Greater) => {}
            }
        }
    }
    (best.unwrap(), frames)
}

/// Interior angles of a shape in units of π/J.
pub fn shape_angles(shape: &[usize], m: usize) -> Vec<usize> {
    let k = shape.len();
    let half = m / 2;
    (0..k)
        .map(|i| {
            let turn = (shape[i] + m - shape[(i + k - 1) % k]) % m;
            half - turn
        })
        .collect()
}

/// Local coordinates (u, v) with p − V = u e1 + v e2.
struct LocalFrame {
    origin: Point,
    e1: Point,
    e2: Point,
    det: QuadNum,
}

impl LocalFrame {
    fn new(pts: &[Point], f: &FaceFrame) -> Self {
        let k = pts.len();
        let v = pts[f.anchor].clone();
        let next = &pts[(f.anchor + 1) % k];
        let prev = &pts[(f.anchor + k - 1) % k];
        let (e1, e2) = if f.forward { (sub(next, &v), sub(prev, &v)) } else { (sub(prev, &v), sub(next, &v)) };
        let det = cross2(&e1, &e2);
        LocalFrame { origin: v, e1, e2, det }
    }

    fn local(&self, p: &Point) -> Point {
        let q = sub(p, &self.origin);
        [&cross2(&q, &self.e2) / &self.det, &cross2(&self.e1, &q) / &self.det]
    }
}

/// Segments of the lines w·c = t (t in the family) meeting a closed convex polygon.
fn clip_lines(pts: &[Point], w: &Point, family: &Family) -> Vec<Segment> {
    let vals: Vec<QuadNum> = pts.iter().map(|p| dot2(w, p)).collect();
    let lo = vals.iter().min().unwrap().clone();
    let hi = vals.iter().max().unwrap().clone();
    let mut out = Vec::new();
    let k = pts.len();
    for (_, t) in family.between(&lo, &hi) {
        let mut hits: Vec<Point> = Vec::new();
        for i in 0..k {
            let (fa, fb) = (&vals[i] - t, &vals[(i + 1) % k] - t);
            if fa.is_zero() {
                hits.push(pts[i].clone());
            } else if !fb.is_zero() && fa.is_positive() != fb.is_positive() {
                let s = &fa / &(&fa - &fb);
                hits.push(add(&pts[i], &scale(&s, &sub(&pts[(i + 1) % k], &pts[i]))));
            }
        }
        hits.sort();
        hits.dedup();
        if hits.len() >= 2 {
            out.push([hits[0].clone(), hits[hits.len() - 1].clone()]);
        }
    }
    out
}

fn normalize_segments(mut segs: Vec<Segment>) -> Vec<Segment> {
    for s in segs.iter_mut() {
        if s[1] < s[0] {
            s.swap(0, 1);
        }
    }
    segs.sort();
    segs.dedup();
    segs
}

/// True when two convex polygons overlap in a set of positive area.
pub fn overlaps(p: &[Point], q: &[Point]) -> bool {
    for poly in [p, q] {
        let k = poly.len();
        for i in 0..k {
            let e = sub(&poly[(i + 1) % k], &poly[i]);
            let proj = |pts: &[Point]| {
                let vals: Vec<QuadNum> = pts.iter().map(|x| cross2(&e, &sub(x, &poly[i]))).collect();
                (vals.iter().min().unwrap().clone(), vals.iter().max().unwrap().clone())
            };
            let (a0, a1) = proj(p);
            let (b0, b1) = proj(q);
            if a1 <= b0 || b1 <= a0 {
                return false;
            }
        }
    }
    true
}

/// Float separating-axis test; None when the margin is too small to decide.
fn overlaps_f64(p: &[[f64; 2]], q: &[[f64; 2]]) -> Option<bool> {
    let tol = 1e-9;
    let mut close = false;
    for poly in [p, q] {
        let k = poly.len();
        for i in 0..k {
            let (a, b) = (poly[i], poly[(i + 1) % k]);
            let e = [b[0] - a[0], b[1] - a[1]];
            let proj = |pts: &[[f64; 2]]| {
                pts.iter().map(|x| e[0] * (x[1] - a[1]) - e[1] * (x[0] - a[0])).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
            };
            let (a0, a1) = proj(p);
            let (b0, b1) = proj(q);
            let gap = (b0 - a1).max(a0 - b1);
            if gap > tol {
                return Some(false);
            }
            if gap > -tol {
                close = true;
            }
        }
    }
    if close {
        None
    } else {
        Some(true)
    }
}

/// Drops repeated and collinear vertices of a convex polygon.
fn simplify(mut pts: Vec<Point>) -> Vec<Point> {
    pts.dedup();
    while pts.len() > 1 && pts.first() == pts.last() {
        pts.pop();
    }
    let mut changed = true;
    while changed && pts.len() >= 3 {
        changed = false;
        let k = pts.len();
        for i in 0..k {
            let (a, b, c) = (&pts[(i + k - 1) % k], &pts[i], &pts[(i + 1) % k]);
            if cross2(&sub(b, a), &sub(c, b)).is_zero() {
                pts.remove(i);
                changed = true;
                break;
            }
        }
    }
    pts
}

/// Intersection of a convex polygon with a counterclockwise convex clip polygon.
pub fn clip_polygon(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = subject.to_vec();
    let k = clip.len();
    for i in 0..k {
        if out.is_empty() {
            break;
        }
        let (a, b) = (&clip[i], &clip[(i + 1) % k]);
        let e = sub(b, a);
        let side = |p: &Point| cross2(&e, &sub(p, a));
        let input = std::mem::take(&mut out);
        let n = input.len();
        for j in 0..n {
            let (p, q) = (&input[j], &input[(j + 1) % n]);
            let (sp, sq) = (side(p), side(q));
            let pin = !sp.is_negative();
            let qin = !sq.is_negative();
            if pin {
                out.push(p.clone());
            }
            if pin != qin && !sp.is_zero() && !sq.is_zero() {
                let t = &sp / &(&sp - &sq);
                out.push(add(p, &scale(&t, &sub(q, p))));
            }
        }
    }
    out.dedup();
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrototileClass {
    pub id: usize,
    /// Edge direction indices in canonical orientation.
    pub shape: Vec<usize>,
    /// Decoration segments in tile-local coordinates.
    pub decoration: Vec<Segment>,
    /// Child tiles clipped to the tile, as vertex sets in tile-local coordinates.
    pub inflation_patch: Vec<Vec<Point>>,
    pub count: usize,
}

#[derive(Clone, Debug)]
pub struct PrototileReport {
    pub tiling: Tiling,
    pub classes: Vec<PrototileClass>,
    /// Class id per face.
    pub face_class: Vec<usize>,
    /// Distinct undecorated shapes.
    pub shapes: Vec<Vec<usize>>,
    /// Shape id per face.
    pub face_shape: Vec<usize>,
    /// Decoration class id per face.
    pub decoration_class: Vec<usize>,
    /// Inflation class id per face.
    pub inflation_class: Vec<usize>,
    /// Faces whose child tiles failed to cover them exactly.
    pub incomplete: usize,
    /// Child tiles crossing a parent boundary.
    pub straddling: usize,
}

impl PrototileReport {
    /// Decoration and inflation classes partition the faces identically.
    pub fn bijection(&self) -> bool {
        let mut a: HashMap<usize, usize> = HashMap::new();
        let mut b: HashMap<usize, usize> = HashMap::new();
        for (&x, &y) in self.decoration_class.iter().zip(&self.inflation_class) {
            if *a.entry(x).or_insert(y) != y || *b.entry(y).or_insert(x) != x {
                return false;
            }
        }
        self.incomplete == 0
    }

    pub fn shape_count(&self) -> usize {
        self.shapes.len()
    }
}

fn intern<K: Ord + Clone>(map: &mut BTreeMap<K, usize>, key: &K) -> usize {
    let n = map.len();
    *map.entry(key.clone()).or_insert(n)
}

#[derive(Clone, Debug)]
pub struct Options {
    /// Keep mirror images in separate classes.
    pub chiral: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options { chiral: true }
    }
}

/// Undecorated shape classes of a tiling.
pub fn shape_classes(tiling: &Tiling, chiral: bool) -> (Vec<Vec<usize>>, Vec<usize>) {
    let m = tiling.star_size();
    let mut map = BTreeMap::new();
    let mut ids = Vec::with_capacity(tiling.faces.len());
    for f in &tiling.faces {
        let (shape, _) = canonical_shape(f, m, chiral);
        ids.push(intern(&mut map, &shape));
    }
    let mut shapes = vec![Vec::new(); map.len()];
    for (k, v) in map {
        shapes[v] = k;
    }
    (shapes, ids)
}

/// Refined-pattern segments inside every face, in frame coordinates.
pub fn decoration_segments(tiling: &Tiling, pattern: &AmmannPattern) -> Result<Vec<Vec<Segment>>> {
    let geo = Geometry::new(pattern)?;
    let refined = pattern.refined_specs();
    let r = rational_to_f64(&tiling.window.radius) + max_excursion(tiling) + 2.0 * pattern.max_step().to_f64() / geo.a_norm;
    let bound = geo.offset_bound(r);
    let families = refined.iter().enumerate().map(|(j, s)| Family::build(s, j, &bound)).collect::<Result<Vec<_>>>()?;
    Ok(tiling
        .faces
        .iter()
        .map(|f| {
            let pts = tiling.face_points(f);
            families.iter().enumerate().flat_map(|(j, fam)| clip_lines(&pts, &geo.w[j], fam)).collect()
        })
        .collect())
}

/// Decoration of every face by the refined pattern, in canonical local coordinates.
pub fn decorate(tiling: &Tiling, pattern: &AmmannPattern, chiral: bool) -> Result<Vec<(Vec<usize>, Vec<Segment>)>> {
    let m = tiling.star_size();
    let segments = decoration_segments(tiling, pattern)?;
    let mut out = Vec::with_capacity(tiling.faces.len());
    for (f, segs) in tiling.faces.iter().zip(segments) {
        let pts = tiling.face_points(f);
        let (shape, frames) = canonical_shape(f, m, chiral);
        let best = frames
            .iter()
            .map(|fr| {
                let lf = LocalFrame::new(&pts, fr);
                normalize_segments(segs.iter().map(|s| [lf.local(&s[0]), lf.local(&s[1])]).collect())
            })
            .min()
            .unwrap();
        out.push((shape, best));
    }
    Ok(out)
}

/// Largest distance from a face vertex to the intersection point it surrounds.
pub fn max_excursion(tiling: &Tiling) -> f64 {
    let mut best: f64 = 0.0;
    for f in &tiling.faces {
        let c = tiling.to_float(&f.center);
        for &v in &f.vertices {
            let p = tiling.to_float(&tiling.vertices[v].pos);
            best = best.max(((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt());
        }
    }
    best
}

/// Inflation patch of every face: the refined tiles clipped to it.
pub fn inflation_rules(tiling: &Tiling, pattern: &AmmannPattern, chiral: bool) -> Result<(Vec<Option<Vec<Vec<Point>>>>, usize)> {
    let (pieces, straddling) = inflation_pieces(tiling, pattern)?;
    let m = tiling.star_size();
    let out = tiling
        .faces
        .iter()
        .zip(pieces)
        .map(|(f, pieces)| {
            let pieces = pieces?;
            let pts = tiling.face_points(f);
            let (_, frames) = canonical_shape(f, m, chiral);
            frames
                .iter()
                .map(|fr| {
                    let lf = LocalFrame::new(&pts, fr);
                    let mut patch: Vec<Vec<Point>> = pieces
                        .iter()
                        .map(|piece| {
                            let mut v: Vec<Point> = piece.iter().map(|p| lf.local(p)).collect();
                            v.sort();
                            v
                        })
                        .collect();
                    patch.sort();
                    patch
                })
                .min()
        })
        .collect();
    Ok((out, straddling))
}

/// Refined tiles clipped to every face, in frame coordinates; None where they
/// fail to cover the face exactly.
pub fn inflation_pieces(tiling: &Tiling, pattern: &AmmannPattern) -> Result<(Vec<Option<Vec<Vec<Point>>>>, usize)> {
    let exc = max_excursion(tiling);
    let r = rational_to_f64(&tiling.window.radius) + 1.5 * exc + 2.0 * tiling.edge_length();
    let window = Window::new(rat((r * 16.0).ceil() as i64, 16));
    let child = refined_tiling(pattern, &window)?;
    let cell = (tiling.edge_length() * 2.0).max(1e-9);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let child_pts: Vec<Vec<Point>> = child.faces.iter().map(|f| child.face_points(f)).collect();
    let child_box: Vec<[f64; 4]> = child_pts.iter().map(|p| bbox(&child, p)).collect();
    for (i, b) in child_box.iter().enumerate() {
        for gx in (b[0] / cell).floor() as i64..=(b[2] / cell).floor() as i64 {
            for gy in (b[1] / cell).floor() as i64..=(b[3] / cell).floor() as i64 {
                grid.entry((gx, gy)).or_default().push(i);
            }
        }
    }
    let child_f: Vec<Vec<[f64; 2]>> = child_pts.iter().map(|p| p.iter().map(|x| child.to_float(x)).collect()).collect();
    let mut out = Vec::with_capacity(tiling.faces.len());
    let mut straddling = 0;
    for f in &tiling.faces {
        let pts = tiling.face_points(f);
        let pts_f: Vec<[f64; 2]> = pts.iter().map(|x| tiling.to_float(x)).collect();
        let b = bbox(tiling, &pts);
        let mut cand: Vec<usize> = Vec::new();
        for gx in (b[0] / cell).floor() as i64..=(b[2] / cell).floor() as i64 {
            for gy in (b[1] / cell).floor() as i64..=(b[3] / cell).floor() as i64 {
                if let Some(v) = grid.get(&(gx, gy)) {
                    cand.extend(v);
                }
            }
        }
        cand.sort();
        cand.dedup();
        let area = polygon_area(&pts);
        let mut covered = QuadNum::zero(tiling.d);
        let mut pieces = Vec::new();
        for &c in &cand {
            let hit = match overlaps_f64(&pts_f, &child_f[c]) {
                Some(h) => h,
                None => overlaps(&pts, &child_pts[c]),
            };
            if !hit {
                continue;
            }
            let piece = simplify(clip_polygon(&child_pts[c], &pts));
            if piece.len() < 3 {
                continue;
            }
            let part = polygon_area(&piece);
            covered += &part;
            if part != polygon_area(&child_pts[c]) {
                straddling += 1;
            }
            pieces.push(piece);
        }
        out.push((covered == area).then_some(pieces));
    }
    Ok((out, straddling))
}

fn bbox(t: &Tiling, pts: &[Point]) -> [f64; 4] {
    let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for p in pts {
        let f = t.to_float(p);
        b[0] = b[0].min(f[0]);
        b[1] = b[1].min(f[1]);
        b[2] = b[2].max(f[0]);
        b[3] = b[3].max(f[1]);
    }
    b
}

/// Dual tiling with shape, decoration and inflation classes.
pub fn prototiles(pattern: &AmmannPattern, window: &Window, opts: &Options) -> Result<PrototileReport> {
    let tiling = dualize(pattern, window)?;
    let (shapes, face_shape) = shape_classes(&tiling, opts.chiral);
    let decorations = decorate(&tiling, pattern, opts.chiral)?;
    let (patches, straddling) = inflation_rules(&tiling, pattern, opts.chiral)?;
    let mut dec_map = BTreeMap::new();
    let mut inf_map = BTreeMap::new();
    let mut decoration_class = Vec::with_capacity(tiling.faces.len());
    let mut inflation_class = Vec::with_capacity(tiling.faces.len());
    let mut incomplete = 0;
    for (dec, patch) in decorations.iter().zip(&patches) {
        decoration_class.push(intern(&mut dec_map, dec));
        match patch {
            Some(p) => inflation_class.push(intern(&mut inf_map, &(dec.0.clone(), p.clone()))),
            None => {
                incomplete += 1;
                inflation_class.push(usize::MAX);
            }
        }
    }
    let mut classes: Vec<PrototileClass> = Vec::with_capacity(dec_map.len());
    for ((shape, decoration), id) in &dec_map {
        classes.push(PrototileClass {
            id: *id,
            shape: shape.clone(),
            decoration: decoration.clone(),
            inflation_patch: Vec::new(),
            count: 0,
        });
    }
    classes.sort_by_key(|c| c.id);
    for (i, &c) in decoration_class.iter().enumerate() {
        classes[c].count += 1;
        if classes[c].inflation_patch.is_empty() {
            if let Some(p) = &patches[i] {
                classes[c].inflation_patch = p.clone();
            }
        }
    }
    let (order, face_class) = renumber(&classes, &decoration_class);
    let classes = order.into_iter().enumerate().map(|(i, mut c)| {
        c.id = i;
        c
    });
    Ok(PrototileReport {
        classes: classes.collect(),
        face_class,
        shapes,
        face_shape,
        decoration_class,
        inflation_class,
        incomplete,
        straddling,
        tiling,
    })
}

/// Classes ordered by shape then decoration, with per-face ids remapped.
fn renumber(classes: &[PrototileClass], ids: &[usize]) -> (Vec<PrototileClass>, Vec<usize>) {
    let mut order: Vec<PrototileClass> = classes.to_vec();
    order.sort_by(|a, b| (&a.shape, &a.decoration).cmp(&(&b.shape, &b.decoration)));
    let remap: HashMap<usize, usize> = order.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
    (order, ids.iter().map(|i| remap[i]).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WallReport {
    pub wall_to_wall: bool,
    pub checked: usize,
    pub violations: Vec<GridPlane>,
}

/// Offsets of each direction within ±bound, optionally with midpoints.
fn offsets(specs: &[QuasilatticeSpec], bound: &QuadNum, halved: bool, pad: &QuadNum) -> Result<Vec<Vec<(i64, QuadNum)>>> {
    let wide = bound + pad;
    let mut out = Vec::with_capacity(specs.len());
    for (j, s) in specs.iter().enumerate() {
        let fam = Family::build(s, j, &wide)?;
        let mut v: Vec<(i64, QuadNum)> = Vec::new();
        for (i, (n, t)) in fam.lines.iter().enumerate() {
            v.push((2 * n, t.clone()));
            if halved {
                if let Some((_, u)) = fam.lines.get(i + 1) {
                    v.push((2 * n + 1, (t + u).scale(&rat(1, 2))));
                }
            }
        }
        v.retain(|(_, t)| t.abs() <= *bound);
        out.push(v);
    }
    Ok(out)
}

fn wall_check(pattern: &AmmannPattern, window: &Window, halved: bool) -> Result<WallReport> {
    let geo_norm = pattern.star.a_norm2.to_f64().sqrt();
    let r = rational_to_f64(&window.radius);
    let bound = float_quad(r * geo_norm, pattern.d());
    let pad = pattern.max_step().scale(&rat(2, 1));
    let coarse = offsets(&pattern.per_direction, &bound, halved, &pad)?;
    let fine = offsets(&pattern.refined_specs(), &bound, halved, &pad)?;
    let mut violations = Vec::new();
    let mut checked = 0;
    for (j, (c, f)) in coarse.iter().zip(&fine).enumerate() {
        for (n, t) in c {
            checked += 1;
            if f.binary_search_by(|(_, u)| u.cmp(t)).is_err() {
                violations.push(GridPlane { j, n: *n, offset: t.clone() });
            }
        }
    }
    Ok(WallReport { wall_to_wall: violations.is_empty(), checked, violations })
}

/// Every original plane in the window is also a refined plane.
pub fn check_wall_to_wall(pattern: &AmmannPattern, window: &Window) -> Result<WallReport> {
    wall_check(pattern, window, false)
}

/// A pattern with a midplane inserted between every pair of adjacent parallel planes.
#[derive(Clone, Debug)]
pub struct HalvedPattern {
    pub base: AmmannPattern,
}

pub fn halve_pattern(pattern: &AmmannPattern) -> HalvedPattern {
    HalvedPattern { base: pattern.clone() }
}

impl HalvedPattern {
    /// Planes and midplanes meeting the window; midplanes carry odd indices.
    pub fn planes_in_window(&self, window: &Window) -> Result<Vec<GridPlane>> {
        let r = rational_to_f64(&window.radius);
        let bound = float_quad(r * self.base.star.a_norm2.to_f64().sqrt(), self.base.d());
        let pad = self.base.max_step().scale(&rat(2, 1));
        let offs = offsets(&self.base.per_direction, &bound, true, &pad)?;
        Ok(offs
            .into_iter()
            .enumerate()
            .flat_map(|(j, v)| v.into_iter().map(move |(n, offset)| GridPlane { j, n, offset }))
            .collect())
    }

    /// Halved planes against the halved refinement.
    pub fn check_wall_to_wall(&self, window: &Window) -> Result<WallReport> {
        wall_check(&self.base, window, true)
    }
}

/// Origin q0 with 2a_j·q0 and 2b_j·q0 integral for every direction, chosen
/// so every direction is inversion symmetric and nonsingular on the window.
pub fn inversion_symmetric_origin(pattern: &AmmannPattern, window: &Window) -> Result<AmmannPattern> {
    let proj = pattern.projection.clone();
    let f = &proj.fundamental;
    let dim = f.len();
    let zero = Rational::from_integer(0.into());
    let mut rows = Vec::new();
    for v in pattern.star.lifted_a.iter().chain(&pattern.star.lifted_b) {
        rows.push(proj.coefficients(v)?);
    }
    let basis = linalg::rational_row_basis(&rows);
    let dual = linalg::inverse(&basis).ok_or_else(|| Error::Computation("star lattice is not of full rank".into()))?;
    let gram: Vec<Vec<Rational>> = f.iter().map(|u| f.iter().map(|v| linalg::dot(u, v)).collect()).collect();
    let ginv = linalg::inverse(&gram).ok_or_else(|| Error::Computation("singular Gram matrix".into()))?;
    let weight = |beta: &[Rational]| {
        let mut q = vec![zero.clone(); proj.ambient_dim()];
        for (k, b) in beta.iter().enumerate() {
            for (l, fl) in f.iter().enumerate() {
                q = linalg::add_vec(&q, &linalg::scale_vec(&(b * &ginv[k][l]), fl));
            }
        }
        q
    };
    let padded = window.padded(&rat(4, 1));
    for step in 0..3i64.pow(dim as u32) {
        let mut s = step;
        let mut beta = vec![zero.clone(); dim];
        for i in 0..dim {
            let c = [0, 1, -1][(s % 3) as usize];
            s /= 3;
            for (k, b) in beta.iter_mut().enumerate() {
                *b += &dual[k][i] * &rat(c, 2);
            }
        }
        let candidate = match pattern.with_origin(SliceOrigin::from_rational(&proj, &weight(&beta))) {
            Ok(c) => c,
            Err(_) => continue,
        };
        if candidate.per_direction.iter().all(|s| s.inversion_symmetry().is_some()) && candidate.planes_in_window(&padded).is_ok() {
            return Ok(candidate);
        }
    }
    Err(Error::Computation("no nonsingular inversion-symmetric origin found".into()))
}

/// The pattern with one direction's phases shifted by `delta`.
pub fn perturb_phase(pattern: &AmmannPattern, j: usize, delta: &Rational) -> Result<AmmannPattern> {
    let mut out = pattern.clone();
    let s = &pattern.per_direction[j];
    let d = pattern.d();
    let shift = QuadNum::from_rational(delta.clone(), d);
    out.per_direction[j] = QuasilatticeSpec::with_phases(&s.class, &s.chi1_plus + &shift, &s.chi1_minus + &shift)?;
    Ok(out)
}
