//! Ammann patterns: star generation, lifting through the Coxeter pair, phases
//! from the slice origin, inflation by origin rescaling, windowed plane
//! enumeration and singular-point detection.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exactfield::{rat, QuadNum, Rational};
use crate::linalg::{self, dot};
use crate::quasilattice1d::{builtin_class, QuasilatticeClass, QuasilatticeSpec, RowId};
use crate::rootsystems::{coxeter_projection, quadratic_pair, PlaneFrame, Projection, SystemName};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symmetry {
    Ten,
    Eight,
    Twelve,
    H3,
    H4,
}

impl Symmetry {
    pub const ALL: [Symmetry; 5] = [Symmetry::Ten, Symmetry::Eight, Symmetry::Twelve, Symmetry::H3, Symmetry::H4];

    pub fn theta_par(&self) -> SystemName {
        match self {
            Symmetry::Ten => SystemName::I2(5),
            Symmetry::Eight => SystemName::I2(8),
            Symmetry::Twelve => SystemName::I2(12),
            Symmetry::H3 => SystemName::H3,
            Symmetry::H4 => SystemName::H4,
        }
    }

    pub fn dedup_default(&self) -> bool {
        !matches!(self, Symmetry::Ten)
    }

    pub fn field_d(&self) -> u32 {
        match self {
            Symmetry::Eight => 2,
            Symmetry::Twelve => 3,
            _ => 5,
        }
    }

    /// Rows whose field matches this symmetry.
    pub fn rows(&self) -> Vec<RowId> {
        use RowId::*;
        match self {
            Symmetry::Eight => vec![R2a, R2b],
            Symmetry::Twelve => vec![R3a, R3b, R3c],
            _ => vec![R1, R4a, R4b, R4c, R4d],
        }
    }

    pub fn is_planar(&self) -> bool {
        matches!(self, Symmetry::Ten | Symmetry::Eight | Symmetry::Twelve)
    }
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Symmetry::Ten => "10",
            Symmetry::Eight => "8",
            Symmetry::Twelve => "12",
            Symmetry::H3 => "h3",
            Symmetry::H4 => "h4",
        };
        f.write_str(s)
    }
}

impl FromStr for Symmetry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "10" => Ok(Symmetry::Ten),
            "8" => Ok(Symmetry::Eight),
            "12" => Ok(Symmetry::Twelve),
            "h3" => Ok(Symmetry::H3),
            "h4" => Ok(Symmetry::H4),
            _ => Err(Error::Invalid(format!("unknown symmetry '{}'", s))),
        }
    }
}

/// The six minimal 2D cases with their conventional names.
pub fn minimal_2d_cases() -> Vec<(Symmetry, RowId, &'static str)> {
    vec![
        (Symmetry::Ten, RowId::R1, "10"),
        (Symmetry::Eight, RowId::R2a, "8A"),
        (Symmetry::Eight, RowId::R2b, "8B"),
        (Symmetry::Twelve, RowId::R3a, "12A"),
        (Symmetry::Twelve, RowId::R3b, "12B"),
        (Symmetry::Twelve, RowId::R3c, "12C"),
    ]
}

pub fn projection_for(symmetry: Symmetry) -> Result<Arc<Projection>> {
    Ok(Arc::new(coxeter_projection(&quadratic_pair(symmetry.theta_par())?)?))
}

/// Default seed of the minimal star.
pub fn default_seed(symmetry: Symmetry, proj: &Projection) -> Vec<QuadNum> {
    match symmetry {
        Symmetry::Ten => proj.frame.as_ref().unwrap().h.clone(),
        Symmetry::H3 => {
            let mut e1 = vec![Rational::zero(); proj.ambient_dim()];
            e1[0] = rat(1, 1);
            proj.project_plus(&proj.to_k(&e1))
        }
        _ => proj.project_plus(&proj.to_k(&proj.fundamental[0])),
    }
}

#[derive(Clone, Debug)]
pub struct Star {
    /// a_j⁺ as ∥ vectors in ambient coordinates.
    pub directions: Vec<Vec<QuadNum>>,
    pub lifted_a: Vec<Vec<Rational>>,
    pub lifted_b: Vec<Vec<Rational>>,
    /// |a⁺|², common to every direction.
    pub a_norm2: QuadNum,
    /// b⁺/a⁺ = −m1⁻/m2⁻.
    pub b_over_a: QuadNum,
    /// Σ_j a_j⁺a_j⁺ᵀ = γ̂ on the ∥ space.
    pub gamma: QuadNum,
}

impl Star {
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

fn mirror_roots(proj: &Projection) -> Vec<Vec<QuadNum>> {
    let mut out: Vec<Vec<QuadNum>> = Vec::new();
    for r in proj.projected_roots() {
        let rr = dot(&r, &r);
        if !out.iter().any(|u| {
            let ur = dot(u, &r);
            &ur * &ur == &dot(u, u) * &rr
        }) {
            out.push(r);
        }
    }
    out
}

/// Orbit of `seed` under the ∥ reflection group, optionally keeping one of
/// each antipodal pair, with rational lifts a_j and b_j.
pub fn build_star(proj: &Projection, seed: &[QuadNum], dedup_antipodal: bool, class: &QuasilatticeClass) -> Result<Star> {
    if linalg::is_zero_vec(seed) {
        return Err(Error::Invalid("zero star seed".into()));
    }
    let mirrors = mirror_roots(proj);
    let mut orbit: Vec<Vec<QuadNum>> = vec![seed.to_vec()];
    let mut seen: HashSet<Vec<QuadNum>> = orbit.iter().cloned().collect();
    let mut i = 0;
    while i < orbit.len() {
        for m in &mirrors {
            let r = crate::rootsystems::reflect(&orbit[i], m);
            if seen.insert(r.clone()) {
                orbit.push(r);
            }
        }
        i += 1;
    }
    if orbit.len() == 1 {
        return Err(Error::Invalid("star seed is fixed by the whole group".into()));
    }
    let mut directions: Vec<Vec<QuadNum>> = if dedup_antipodal {
        orbit
            .iter()
            .filter(|v| {
                let neg = linalg::neg_vec(v);
                !seen.contains(&neg) || **v > neg
            })
            .cloned()
            .collect()
    } else {
        orbit
    };
    directions.sort_by(|u, v| angle_key(proj, u).partial_cmp(&angle_key(proj, v)).unwrap().then_with(|| v.cmp(u)));

    let b_over_a = -(class.ratio_minus.inv()?);
    let mut lifted_a = Vec::with_capacity(directions.len());
    let mut lifted_b = Vec::with_capacity(directions.len());
    for a in &directions {
        let la = proj.lift(a)?;
        let lb = proj.lift(&linalg::scale_vec(&b_over_a, a))?;
        if linalg::rank(&vec![la.clone(), lb.clone()]) != 2 {
            return Err(Error::Computation("lifted a_j and b_j are parallel".into()));
        }
        lifted_a.push(la);
        lifted_b.push(lb);
    }
    let a_norm2 = dot(&directions[0], &directions[0]);
    if directions.iter().any(|a| dot(a, a) != a_norm2) {
        return Err(Error::Computation("star directions differ in length".into()));
    }
    let gamma = star_gamma(proj, &directions)?;
    Ok(Star { directions, lifted_a, lifted_b, a_norm2, b_over_a, gamma })
}

fn angle_key(proj: &Projection, v: &[QuadNum]) -> f64 {
    match &proj.frame {
        Some(f) => {
            let p = f.to_float(&f.coords(v));
            let t = p[1].atan2(p[0]);
            if t < -1e-12 {
                t + 2.0 * std::f64::consts::PI
            } else {
                t.max(0.0)
            }
        }
        None => 0.0,
    }
}

/// γ̂ with Σ_j a_j a_jᵀ = γ̂·P⁺, or an error if the sum is not scalar.
pub fn star_gamma(proj: &Projection, directions: &[Vec<QuadNum>]) -> Result<QuadNum> {
    let n = proj.ambient_dim();
    let d = proj.d;
    let mut m = vec![vec![QuadNum::zero(d); n]; n];
    for a in directions {
        for i in 0..n {
            for j in 0..n {
                m[i][j] += &(&a[i] * &a[j]);
            }
        }
    }
    let mut trace = QuadNum::zero(d);
    for (i, row) in m.iter().enumerate() {
        trace += &row[i];
    }
    let gamma = trace.scale(&rat(1, proj.par_dim() as i64));
    for i in 0..n {
        for j in 0..n {
            if m[i][j] != &gamma * &proj.p_plus[i][j] {
                return Err(Error::NonScalarFrame(format!("entry ({}, {})", i, j)));
            }
        }
    }
    Ok(gamma)
}

/// Slice origin held as its two Galois-conjugate halves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceOrigin {
    pub plus: Vec<QuadNum>,
    pub minus: Vec<QuadNum>,
}

impl SliceOrigin {
    pub fn from_rational(proj: &Projection, q0: &[Rational]) -> Self {
        let (plus, minus) = proj.project(q0);
        SliceOrigin { plus, minus }
    }

    pub fn zero(proj: &Projection) -> Self {
        let z = vec![QuadNum::zero(proj.d); proj.ambient_dim()];
        SliceOrigin { plus: z.clone(), minus: z }
    }

    /// q0± → q0±/λ±.
    pub fn inflate(&self, class: &QuasilatticeClass) -> Self {
        let lp = class.lambda_plus.inv().unwrap();
        let lm = class.lambda_minus.inv().unwrap();
        SliceOrigin { plus: linalg::scale_vec(&lp, &self.plus), minus: linalg::scale_vec(&lm, &self.minus) }
    }

    /// q0⁺ + q0⁻ when that sum is rational.
    pub fn to_rational(&self) -> Option<Vec<Rational>> {
        self.plus
            .iter()
            .zip(&self.minus)
            .map(|(p, m)| {
                let s = p + m;
                s.is_rational().then(|| s.a().clone())
            })
            .collect()
    }

    pub fn conjugate(&self) -> Self {
        SliceOrigin {
            plus: self.plus.iter().map(|x| x.conjugate()).collect(),
            minus: self.minus.iter().map(|x| x.conjugate()).collect(),
        }
    }
}

/// Random rational q0 in the span of the fundamental roots.
pub fn random_q0(proj: &Projection, seed: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q0 = vec![Rational::zero(); proj.ambient_dim()];
    for f in &proj.fundamental {
        let c = rat(rng.gen_range(-40..=40), rng.gen_range(11..=47));
        q0 = linalg::add_vec(&q0, &linalg::scale_vec(&c, f));
    }
    q0
}

#[derive(Clone, Debug)]
pub struct AmmannSpec {
    pub symmetry: Symmetry,
    pub projection: Arc<Projection>,
    pub class: QuasilatticeClass,
    pub seed: Vec<QuadNum>,
    pub dedup_antipodal: bool,
    pub q0: SliceOrigin,
}

impl AmmannSpec {
    pub fn new(symmetry: Symmetry, row: RowId, q0: Option<&[Rational]>) -> Result<Self> {
        let projection = projection_for(symmetry)?;
        Self::with_projection(symmetry, projection, row, q0)
    }

    pub fn with_projection(symmetry: Symmetry, projection: Arc<Projection>, row: RowId, q0: Option<&[Rational]>) -> Result<Self> {
        if !symmetry.rows().contains(&row) {
            return Err(Error::Invalid(format!("row {} is not defined over the field of the {} pattern", row, symmetry)));
        }
        let class = builtin_class(row);
        let q0 = match q0 {
            Some(q) => {
                if q.len() != projection.ambient_dim() {
                    return Err(Error::Invalid(format!("q0 needs {} coordinates", projection.ambient_dim())));
                }
                SliceOrigin::from_rational(&projection, q)
            }
            None => SliceOrigin::zero(&projection),
        };
        Ok(AmmannSpec {
            symmetry,
            seed: default_seed(symmetry, &projection),
            dedup_antipodal: symmetry.dedup_default(),
            projection,
            class,
            q0,
        })
    }

    pub fn with_origin(&self, q0: SliceOrigin) -> Self {
        AmmannSpec { q0, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridPlane {
    pub j: usize,
    pub n: i64,
    pub offset: QuadNum,
}

#[derive(Clone, Debug)]
pub struct AmmannPattern {
    pub symmetry: Symmetry,
    pub projection: Arc<Projection>,
    pub class: QuasilatticeClass,
    pub star: Star,
    pub q0: SliceOrigin,
    pub per_direction: Vec<QuasilatticeSpec>,
}

/// Phases χ_j± = (a_j± + (m2±/m1±)b_j±)·q0±.
fn phases(proj: &Projection, class: &QuasilatticeClass, star: &Star, q0: &SliceOrigin) -> Result<Vec<QuasilatticeSpec>> {
    let rp = &class.ratio_plus;
    let rm = &class.ratio_minus;
    let mut out = Vec::with_capacity(star.len());
    for j in 0..star.len() {
        let a = proj.to_k(&star.lifted_a[j]);
        let b = proj.to_k(&star.lifted_b[j]);
        let (ap, am) = (proj.project_plus(&a), proj.project_minus(&a));
        let (bp, bm) = (proj.project_plus(&b), proj.project_minus(&b));
        let chi_p = dot(&linalg::add_vec(&ap, &linalg::scale_vec(rp, &bp)), &q0.plus);
        let chi_m = dot(&linalg::add_vec(&am, &linalg::scale_vec(rm, &bm)), &q0.minus);
        let spec = QuasilatticeSpec::with_phases(class, chi_p, chi_m)?;
        let cross_p = linalg::add_vec(&linalg::scale_vec(&spec.m1_plus, &am), &linalg::scale_vec(&spec.m2_plus, &bm));
        let cross_m = linalg::add_vec(&linalg::scale_vec(&spec.m1_minus, &ap), &linalg::scale_vec(&spec.m2_minus, &bp));
        if !linalg::is_zero_vec(&cross_p) || !linalg::is_zero_vec(&cross_m) {
            return Err(Error::Computation(format!("m1 a + m2 b identity fails in direction {}", j)));
        }
        out.push(spec);
    }
    Ok(out)
}

pub fn build_pattern(spec: &AmmannSpec) -> Result<AmmannPattern> {
    let star = build_star(&spec.projection, &spec.seed, spec.dedup_antipodal, &spec.class)?;
    let per_direction = phases(&spec.projection, &spec.class, &star, &spec.q0)?;
    Ok(AmmannPattern {
        symmetry: spec.symmetry,
        projection: spec.projection.clone(),
        class: spec.class.clone(),
        star,
        q0: spec.q0.clone(),
        per_direction,
    })
}

/// A circular window about the slice-local origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub radius: Rational,
}

impl Window {
    pub fn new(radius: Rational) -> Self {
        Window { radius }
    }

    pub fn radius2(&self) -> Rational {
        &self.radius * &self.radius
    }

    pub fn padded(&self, pad: &Rational) -> Self {
        Window { radius: &self.radius + pad }
    }
}

impl AmmannPattern {
    pub fn d(&self) -> u32 {
        self.projection.d
    }

    pub fn frame(&self) -> Option<&PlaneFrame> {
        self.projection.frame.as_ref()
    }

    pub fn spec(&self) -> AmmannSpec {
        AmmannSpec {
            symmetry: self.symmetry,
            projection: self.projection.clone(),
            class: self.class.clone(),
            seed: self.star.directions[0].clone(),
            dedup_antipodal: self.symmetry.dedup_default(),
            q0: self.q0.clone(),
        }
    }

    /// The same star and class with a new slice origin.
    pub fn with_origin(&self, q0: SliceOrigin) -> Result<AmmannPattern> {
        let per_direction = phases(&self.projection, &self.class, &self.star, &q0)?;
        Ok(AmmannPattern { q0, per_direction, ..self.clone() })
    }

    /// Pattern built from q0±/λ±, checked against per-direction phase inflation.
    pub fn inflate(&self) -> Result<AmmannPattern> {
        let q0 = self.q0.inflate(&self.class);
        let per_direction = phases(&self.projection, &self.class, &self.star, &q0)?;
        for (new, old) in per_direction.iter().zip(&self.per_direction) {
            if *new != old.inflate_phases() {
                return Err(Error::Computation("origin rescaling disagrees with phase inflation".into()));
            }
        }
        Ok(AmmannPattern { q0, per_direction, ..self.clone() })
    }

    /// The one-level denser pattern, direction by direction.
    pub fn refined_specs(&self) -> Vec<QuasilatticeSpec> {
        self.per_direction.iter().map(|s| s.refine()).collect()
    }

    /// Line coefficients w_j with a_j⁺·x = w_j·c in frame coordinates c.
    pub fn line_coeffs(&self) -> Option<Vec<[QuadNum; 2]>> {
        let f = self.frame()?;
        Some(
            self.star
                .directions
                .iter()
                .map(|a| [dot(a, &f.g), dot(a, &f.h)])
                .collect(),
        )
    }

    /// Largest interval length in functional units.
    pub fn max_step(&self) -> QuadNum {
        self.per_direction[0].long_length()
    }

    /// Planes of direction j with offsets in [lo, hi].
    pub fn planes_between(&self, j: usize, lo: &QuadNum, hi: &QuadNum) -> Result<Vec<GridPlane>> {
        planes_between(&self.per_direction[j], lo, hi)
            .map(|v| v.into_iter().map(|(n, offset)| GridPlane { j, n, offset }).collect())
            .map_err(|e| match e {
                Error::SingularPhase { n } => Error::SingularDirection { direction: j, n },
                e => e,
            })
    }

    /// All planes meeting the disk window, ordered by direction then index.
    pub fn planes_in_window(&self, window: &Window) -> Result<Vec<GridPlane>> {
        let bound2 = &self.star.a_norm2 * &QuadNum::from_rational(window.radius2(), self.d());
        let approx = Rational::from_float(bound2.to_f64().sqrt() * 1.0001 + 1e-9).unwrap();
        let bound = QuadNum::from_rational(approx, self.d());
        let mut out = Vec::new();
        for j in 0..self.star.len() {
            for p in self.planes_between(j, &-bound.clone(), &bound)? {
                if &p.offset * &p.offset <= bound2 {
                    out.push(p);
                }
            }
        }
        Ok(out)
    }

    /// Points inside the window where at least three lines meet (2D only).
    pub fn detect_singular(&self, window: &Window) -> Result<Vec<SingularPoint>> {
        let frame = self.frame().ok_or_else(|| Error::Unsupported("singular detection needs a planar pattern".into()))?;
        let w = self.line_coeffs().unwrap();
        let planes = self.planes_in_window(window)?;
        let by_dir: Vec<Vec<&GridPlane>> =
            (0..self.star.len()).map(|j| planes.iter().filter(|p| p.j == j).collect()).collect();
        let r2 = QuadNum::from_rational(window.radius2(), self.d());
        let mut points: HashMap<[QuadNum; 2], Vec<(usize, i64)>> = HashMap::new();
        for j in 0..by_dir.len() {
            for k in j + 1..by_dir.len() {
                let det = &w[j][0] * &w[k][1] - &w[j][1] * &w[k][0];
                if det.is_zero() {
                    continue;
                }
                let inv = det.inv()?;
                for p in &by_dir[j] {
                    for q in &by_dir[k] {
                        let c = [
                            &(&p.offset * &w[k][1] - &q.offset * &w[j][1]) * &inv,
                            &(&q.offset * &w[j][0] - &p.offset * &w[k][0]) * &inv,
                        ];
                        if frame.inner(&c, &c) > r2 {
                            continue;
                        }
                        let e = points.entry(c).or_default();
                        for key in [(p.j, p.n), (q.j, q.n)] {
                            if !e.contains(&key) {
                                e.push(key);
                            }
                        }
                    }
                }
            }
        }
        let mut out: Vec<SingularPoint> = points
            .into_iter()
            .filter(|(_, lines)| lines.len() >= 3)
            .map(|(point, mut lines)| {
                lines.sort();
                SingularPoint { point, lines }
            })
            .collect();
        out.sort_by(|a, b| a.lines.cmp(&b.lines));
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularPoint {
    /// Frame coordinates of the concurrency point.
    pub point: [QuadNum; 2],
    pub lines: Vec<(usize, i64)>,
}

/// (n, x_n) for every n with lo ≤ x_n ≤ hi.
pub fn planes_between(spec: &QuasilatticeSpec, lo: &QuadNum, hi: &QuadNum) -> Result<Vec<(i64, QuadNum)>> {
    if lo > hi {
        return Ok(Vec::new());
    }
    let mean = spec.mean_spacing()?.to_f64();
    let x0 = spec.position(0).or_else(|_| spec.position(1))?.to_f64();
    let mut n = ((lo.to_f64() - x0) / mean).floor() as i64 - 2;
    while spec.position(n)? >= *lo {
        n -= 4;
    }
    while spec.position(n)? < *lo {
        n += 1;
    }
    let mut out = Vec::new();
    loop {
        let x = spec.position(n)?;
        if x > *hi {
            break;
        }
        out.push((n, x));
        n += 1;
    }
    Ok(out)
}

/// Builds the pattern at the first seed from `seed` upward whose phases are
/// nonsingular on the window.
pub fn generic_pattern(symmetry: Symmetry, row: RowId, seed: u64, window: &Window) -> Result<(AmmannPattern, u64)> {
    let proj = projection_for(symmetry)?;
    for s in seed..seed + 64 {
        let q0 = random_q0(&proj, s);
        let spec = AmmannSpec::with_projection(symmetry, proj.clone(), row, Some(&q0))?;
        let pattern = build_pattern(&spec)?;
        match pattern.planes_in_window(window) {
            Ok(_) => return Ok((pattern, s)),
            Err(Error::SingularDirection { .. }) | Err(Error::SingularPhase { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Computation("no nonsingular origin found".into()))
}
