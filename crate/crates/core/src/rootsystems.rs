//! Root systems, Coxeter elements and numbers, Coxeter pairs, and the exact
//! projections that split the embedding space into Galois-conjugate halves.

use std::collections::HashSet;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactfield::{rat, rint, QuadNum, Rational, Scalar};
use crate::linalg::{self, dot, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SystemName {
    A(usize),
    B(usize),
    C(usize),
    D(usize),
    G2,
    F4,
    E6,
    E7,
    E8,
    I2(usize),
    H3,
    H4,
}

use SystemName::*;

impl SystemName {
    pub fn is_crystallographic(&self) -> bool {
        !matches!(self, I2(_) | H3 | H4)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            A(n) => n >= 1,
            B(n) => n >= 2,
            C(n) => n >= 3,
            D(n) => n >= 4,
            I2(n) => n >= 5,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Unsupported(self.to_string()))
        }
    }

    /// Real rank d.
    pub fn rank(&self) -> usize {
        match *self {
            A(n) | B(n) | C(n) | D(n) => n,
            G2 | I2(_) => 2,
            F4 => 4,
            E6 => 6,
            E7 => 7,
            E8 => 8,
            H3 => 3,
            H4 => 4,
        }
    }

    /// Dimension over Q of the rational span of the roots.
    pub fn rational_rank(&self) -> usize {
        match *self {
            I2(n) => totient(n),
            H3 => 6,
            H4 => 8,
            _ => self.rank(),
        }
    }

    /// Root count from the closed-form table.
    pub fn table_root_count(&self) -> usize {
        match *self {
            A(n) => n * (n + 1),
            B(n) | C(n) => 2 * n * n,
            D(n) => 2 * n * (n - 1),
            G2 => 12,
            F4 => 48,
            E6 => 72,
            E7 => 126,
            E8 => 240,
            I2(n) => 2 * n,
            H3 => 30,
            H4 => 120,
        }
    }

    /// Coxeter number from the closed-form table (crystallographic only).
    pub fn table_coxeter_number(&self) -> Option<usize> {
        match *self {
            A(n) => Some(n + 1),
            B(n) | C(n) => Some(2 * n),
            D(n) => Some(2 * (n - 1)),
            G2 => Some(6),
            F4 => Some(12),
            E6 => Some(12),
            E7 => Some(18),
            E8 => Some(30),
            _ => None,
        }
    }
}

impl fmt::Display for SystemName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            A(n) => write!(f, "A{}", n),
            B(n) => write!(f, "B{}", n),
            C(n) => write!(f, "C{}", n),
            D(n) => write!(f, "D{}", n),
            G2 => write!(f, "G2"),
            F4 => write!(f, "F4"),
            E6 => write!(f, "E6"),
            E7 => write!(f, "E7"),
            E8 => write!(f, "E8"),
            I2(n) => write!(f, "I2({})", n),
            H3 => write!(f, "H3"),
            H4 => write!(f, "H4"),
        }
    }
}

impl FromStr for SystemName {
    type Err = Error;

    /// Accepts `A4`, `E8`, `H3`, `I2(5)` or `i2:5`, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        let bad = || Error::Invalid(format!("unknown root system '{}'", s));
        let name = match t.as_str() {
            "G2" => G2,
            "F4" => F4,
            "E6" => E6,
            "E7" => E7,
            "E8" => E8,
            "H3" => H3,
            "H4" => H4,
            _ => {
                if let Some(rest) = t.strip_prefix("I2") {
                    let n = rest.trim_matches(|c| c == '(' || c == ')' || c == ':');
                    I2(n.parse().map_err(|_| bad())?)
                } else {
                    let (head, tail) = t.split_at(1);
                    let n: usize = tail.parse().map_err(|_| bad())?;
                    match head {
                        "A" => A(n),
                        "B" => B(n),
                        "C" => C(n),
                        "D" => D(n),
                        _ => return Err(bad()),
                    }
                }
            }
        };
        name.validate()?;
        Ok(name)
    }
}

pub fn totient(n: usize) -> usize {
    (1..=n).filter(|&k| num_integer::gcd(k, n) == 1).count()
}

#[derive(Clone, Debug)]
pub enum RootData {
    /// Exact rational ambient coordinates.
    Rational(Vec<Vec<Rational>>),
    /// Exact coordinates in Q(√5).
    Golden(Vec<Vec<QuadNum>>),
    /// Unit vectors in the plane, for dihedral systems.
    Planar(Vec<[f64; 2]>),
}

impl RootData {
    pub fn len(&self) -> usize {
        match self {
            RootData::Rational(v) => v.len(),
            RootData::Golden(v) => v.len(),
            RootData::Planar(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug)]
pub struct RootSystem {
    pub name: SystemName,
    pub rank: usize,
    pub ambient_dim: usize,
    pub roots: RootData,
    pub fundamental: RootData,
}

impl RootSystem {
    pub fn num_roots(&self) -> usize {
        self.roots.len()
    }

    pub fn rational_roots(&self) -> Option<&[Vec<Rational>]> {
        match &self.roots {
            RootData::Rational(v) => Some(v),
            _ => None,
        }
    }

    pub fn rational_fundamental(&self) -> Option<&[Vec<Rational>]> {
        match &self.fundamental {
            RootData::Rational(v) => Some(v),
            _ => None,
        }
    }

    pub fn golden_roots(&self) -> Option<&[Vec<QuadNum>]> {
        match &self.roots {
            RootData::Golden(v) => Some(v),
            _ => None,
        }
    }

    pub fn golden_fundamental(&self) -> Option<&[Vec<QuadNum>]> {
        match &self.fundamental {
            RootData::Golden(v) => Some(v),
            _ => None,
        }
    }
}

fn rvec(xs: &[i64]) -> Vec<Rational> {
    xs.iter().map(|&x| rint(x)).collect()
}

fn unit(n: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

/// Fundamental roots as explicit ambient vectors for the classical families,
/// G2, F4 and E8.
fn explicit_fundamental(name: SystemName) -> Option<Vec<Vec<Rational>>> {
    let out = match name {
        A(n) => (0..n)
            .map(|k| {
                let mut v = vec![0; n + 1];
                v[k] = -1;
                v[k + 1] = 1;
                rvec(&v)
            })
            .collect(),
        B(n) | C(n) => {
            let first = if matches!(name, B(_)) { 1 } else { 2 };
            let mut out = vec![rvec(&{
                let mut v = unit(n, 0);
                v[0] = first;
                v
            })];
            for k in 1..n {
                let mut v = vec![0; n];
                v[k] = 1;
                v[k - 1] = -1;
                out.push(rvec(&v));
            }
            out
        }
        D(n) => {
            let mut f1 = vec![0; n];
            f1[0] = -1;
            f1[1] = -1;
            let mut f2 = vec![0; n];
            f2[0] = 1;
            f2[1] = -1;
            let mut out = vec![rvec(&f1), rvec(&f2)];
            for k in 2..n {
                let mut v = vec![0; n];
                v[k - 1] = 1;
                v[k] = -1;
                out.push(rvec(&v));
            }
            out
        }
        G2 => vec![rvec(&[1, -1, 0]), rvec(&[-2, 1, 1])],
        F4 => vec![
            rvec(&[1, -1, 0, 0]),
            rvec(&[0, 1, -1, 0]),
            rvec(&[0, 0, 1, 0]),
            vec![rat(-1, 2); 4],
        ],
        E8 => {
            let mut out = Vec::new();
            let mut f1 = vec![rat(-1, 2); 8];
            f1[0] = rat(1, 2);
            f1[1] = rat(1, 2);
            out.push(f1);
            for k in 1..7 {
                let mut v = vec![0; 8];
                v[k - 1] = -1;
                v[k] = 1;
                out.push(rvec(&v));
            }
            out.push(vec![rat(1, 2); 8]);
            out
        }
        _ => return None,
    };
    Some(out)
}

pub fn reflect<T: Scalar>(v: &[T], r: &[T]) -> Vec<T> {
    let two = r[0].one_like() + r[0].one_like();
    let c = two * dot(v, r) / dot(r, r);
    linalg::sub_vec(v, &linalg::scale_vec(&c, r))
}

/// Closure of `gens` under the reflections they define.
pub fn root_closure<T: Scalar + Hash + Eq>(gens: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = gens.to_vec();
    let mut seen: HashSet<Vec<T>> = out.iter().cloned().collect();
    let mut i = 0;
    while i < out.len() {
        for g in gens {
            let r = reflect(&out[i], g);
            if seen.insert(r.clone()) {
                out.push(r);
            }
        }
        i += 1;
    }
    out
}

/// Simple roots relative to the positive half-space of `functional`: those
/// positive roots whose reflection permutes the other positive roots.
pub fn extract_simple_roots<T: Scalar + Ord>(roots: &[Vec<T>], functional: &[T]) -> Result<Vec<Vec<T>>> {
    let zero = functional[0].zero_like();
    if roots.iter().any(|r| dot(r, functional) == zero) {
        return Err(Error::Computation("functional vanishes on a root".into()));
    }
    let mut positive: Vec<&Vec<T>> = roots.iter().filter(|r| dot(r, functional) > zero).collect();
    positive.sort_by(|a, b| dot(a, functional).cmp(&dot(b, functional)));
    let simple = positive
        .iter()
        .filter(|r| {
            positive.iter().all(|p| std::ptr::eq(*p, **r) || dot(&reflect(p, r), functional) > zero)
        })
        .map(|r| (*r).clone())
        .collect();
    Ok(simple)
}

fn golden(a: i64, b: i64, den: i64) -> QuadNum {
    QuadNum::from_ints(a, b, den, 5)
}

fn even_permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            out.push(p.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, p, out);
            if k % 2 == 0 {
                p.swap(i, k - 1);
            } else {
                p.swap(0, k - 1);
            }
        }
    }
    let mut all = Vec::new();
    heap(n, &mut (0..n).collect(), &mut all);
    all.into_iter()
        .filter(|p| {
            let mut inv = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            inv % 2 == 0
        })
        .collect()
}

/// All sign changes and even permutations of `base`, deduplicated.
fn signed_even_orbit(base: &[QuadNum]) -> Vec<Vec<QuadNum>> {
    let n = base.len();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for perm in even_permutations(n) {
        for signs in 0..(1u32 << n) {
            let v: Vec<QuadNum> = (0..n)
                .map(|i| {
                    let x = base[perm[i]].clone();
                    if signs & (1 << i) != 0 {
                        -x
                    } else {
                        x
                    }
                })
                .collect();
            if seen.insert(v.clone()) {
                out.push(v);
            }
        }
    }
    out
}

fn h3_roots() -> Vec<Vec<QuadNum>> {
    let half = |x: QuadNum| x.scale(&rat(1, 2));
    let mut out = signed_even_orbit(&[golden(1, 0, 1), golden(0, 0, 1), golden(0, 0, 1)]);
    out.extend(signed_even_orbit(&[half(QuadNum::tau()), half(QuadNum::one(5)), half(QuadNum::sigma())]));
    out
}

fn h4_roots() -> Vec<Vec<QuadNum>> {
    let half = |x: QuadNum| x.scale(&rat(1, 2));
    let z = QuadNum::zero(5);
    let mut out = signed_even_orbit(&[QuadNum::one(5), z.clone(), z.clone(), z.clone()]);
    let mut seen: HashSet<Vec<QuadNum>> = out.iter().cloned().collect();
    for signs in 0..16u32 {
        let v: Vec<QuadNum> =
            (0..4).map(|i| golden(if signs & (1 << i) != 0 { -1 } else { 1 }, 0, 2)).collect();
        if seen.insert(v.clone()) {
            out.push(v);
        }
    }
    out.extend(signed_even_orbit(&[z, half(QuadNum::tau()), half(QuadNum::one(5)), half(QuadNum::sigma())]));
    out
}

/// The simple roots b1..b4 of H4 used for the space-group basis.
pub fn h4_simple_roots() -> Vec<Vec<QuadNum>> {
    vec![
        vec![golden(1, 0, 1), golden(0, 0, 1), golden(0, 0, 1), golden(0, 0, 1)],
        vec![golden(-1, 0, 2); 4],
        vec![golden(0, 0, 1), golden(1, 0, 2), QuadNum::sigma().scale(&rat(1, 2)), QuadNum::tau().scale(&rat(1, 2))],
        vec![golden(0, 0, 1), QuadNum::sigma().scale(&rat(1, 2)), QuadNum::tau().scale(&rat(1, 2)), golden(-1, 0, 2)],
    ]
}

fn generic_functional_rational(n: usize) -> Vec<Rational> {
    (0..n).map(|i| rint(3i64.pow(i as u32))).collect()
}

fn e8_roots() -> Vec<Vec<Rational>> {
    root_closure(&explicit_fundamental(E8).unwrap())
}

pub fn build_root_system(name: SystemName) -> Result<RootSystem> {
    name.validate()?;
    let rank = name.rank();
    let rs = match name {
        A(_) | B(_) | C(_) | D(_) | G2 | F4 | E8 => {
            let fund = explicit_fundamental(name).unwrap();
            let roots = root_closure(&fund);
            RootSystem {
                name,
                rank,
                ambient_dim: fund[0].len(),
                roots: RootData::Rational(roots),
                fundamental: RootData::Rational(fund),
            }
        }
        E7 | E6 => {
            let v = rvec(&[0, 0, 0, 0, 0, 0, 1, 1]);
            let w = rvec(&[0, 0, 0, 0, 0, 1, -1, 0]);
            let roots: Vec<Vec<Rational>> = e8_roots()
                .into_iter()
                .filter(|r| dot(r, &v).is_zero() && (name == E7 || dot(r, &w).is_zero()))
                .collect();
            let fund = extract_simple_roots(&roots, &generic_functional_rational(8))?;
            RootSystem {
                name,
                rank,
                ambient_dim: 8,
                roots: RootData::Rational(roots),
                fundamental: RootData::Rational(fund),
            }
        }
        H3 => {
            let roots = h3_roots();
            let functional = vec![golden(1, 0, 1), golden(3, 0, 1), golden(9, 0, 1)];
            let fund = extract_simple_roots(&roots, &functional)?;
            RootSystem { name, rank, ambient_dim: 3, roots: RootData::Golden(roots), fundamental: RootData::Golden(fund) }
        }
        H4 => RootSystem {
            name,
            rank,
            ambient_dim: 4,
            roots: RootData::Golden(h4_roots()),
            fundamental: RootData::Golden(h4_simple_roots()),
        },
        I2(n) => {
            let roots = (0..2 * n)
                .map(|k| {
                    let t = std::f64::consts::PI * k as f64 / n as f64;
                    [t.cos(), t.sin()]
                })
                .collect();
            let t = std::f64::consts::PI * (n as f64 - 1.0) / n as f64;
            RootSystem {
                name,
                rank,
                ambient_dim: 2,
                roots: RootData::Planar(roots),
                fundamental: RootData::Planar(vec![[1.0, 0.0], [t.cos(), t.sin()]]),
            }
        }
    };
    Ok(rs)
}

pub fn reflection_matrix<T: Scalar>(f: &[T]) -> Matrix<T> {
    let n = f.len();
    let ff = dot(f, f);
    let two = f[0].one_like() + f[0].one_like();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let id = if i == j { f[0].one_like() } else { f[0].zero_like() };
                    id - two.clone() * f[i].clone() * f[j].clone() / ff.clone()
                })
                .collect()
        })
        .collect()
}

/// Coxeter element C = F1 F2 ... Fd in ambient coordinates.
pub fn coxeter_element(rs: &RootSystem) -> Result<Matrix<Rational>> {
    let fund = rs
        .rational_fundamental()
        .ok_or_else(|| Error::Unsupported(format!("{} is not crystallographic", rs.name)))?;
    let mut c = linalg::identity(rs.ambient_dim, &Rational::zero());
    for f in fund {
        c = linalg::mat_mul(&c, &reflection_matrix(f));
    }
    Ok(c)
}

/// Smallest k in 1..=max with m^k = 1.
pub fn matrix_order<T: Scalar>(m: &Matrix<T>, max: usize) -> Option<usize> {
    let id = linalg::identity(m.len(), &m[0][0]);
    let mut p = m.clone();
    for k in 1..=max {
        if p == id {
            return Some(k);
        }
        p = linalg::mat_mul(&p, m);
    }
    None
}

/// h = #roots / d, verified against the order of the Coxeter element.
pub fn coxeter_number(rs: &RootSystem) -> Result<usize> {
    let c = coxeter_element(rs)?;
    let h = rs.num_roots() / rs.rank;
    if rs.num_roots() % rs.rank != 0 {
        return Err(Error::Computation(format!("{}: root count not divisible by rank", rs.name)));
    }
    match matrix_order(&c, h) {
        Some(k) if k == h => Ok(h),
        other => Err(Error::Computation(format!("{}: Coxeter element order {:?} differs from {}", rs.name, other, h))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoxeterPair {
    pub theta_par: SystemName,
    pub theta: SystemName,
    pub degree: usize,
    pub field_d: Option<u32>,
}

impl fmt::Display for CoxeterPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let theta = match self.theta {
            B(n) => format!("B{}/C{}", n, n),
            t => t.to_string(),
        };
        write!(f, "{} <-> {} (N = {}", self.theta_par, theta, self.degree)?;
        if let Some(d) = self.field_d {
            write!(f, ", K = Q(sqrt {})", d)?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairEntry {
    pub theta_par: SystemName,
    pub partner: Option<CoxeterPair>,
}

fn quadratic_field(theta_par: SystemName) -> Option<u32> {
    match theta_par {
        I2(5) | H3 | H4 => Some(5),
        I2(8) => Some(2),
        I2(12) => Some(3),
        _ => None,
    }
}

/// Crystallographic partner of I2(n): rank φ(n) and Coxeter number n.
pub fn i2_partner(n: usize) -> Option<CoxeterPair> {
    let d = totient(n);
    let mut candidates = vec![A(d)];
    if d >= 2 {
        candidates.push(B(d));
    }
    if d >= 4 {
        candidates.push(D(d));
    }
    candidates.extend([G2, F4, E6, E7, E8].into_iter().filter(|e| e.rank() == d));
    candidates.into_iter().find(|t| t.table_coxeter_number() == Some(n)).map(|theta| {
        let degree = d / 2;
        CoxeterPair { theta_par: I2(n), theta, degree, field_d: if degree == 2 { quadratic_field(I2(n)) } else { None } }
    })
}

/// Partner of H3 or H4: the rank-matching system whose root count is a multiple.
fn h_partner(theta_par: SystemName) -> Option<CoxeterPair> {
    let d = theta_par.rational_rank();
    let count = theta_par.table_root_count();
    let mut candidates = vec![A(d), B(d), C(d), D(d)];
    candidates.extend([G2, F4, E6, E7, E8].into_iter().filter(|e| e.rank() == d));
    let hits: Vec<SystemName> = candidates.into_iter().filter(|t| t.table_root_count() % count == 0).collect();
    match hits.as_slice() {
        [theta] => Some(CoxeterPair {
            theta_par,
            theta: *theta,
            degree: d / theta_par.rank(),
            field_d: quadratic_field(theta_par),
        }),
        _ => None,
    }
}

/// Partner lookup for every I2(n) with 5 ≤ n ≤ n_max (n ≠ 6), then H3 and H4.
pub fn enumerate_coxeter_pairs(n_max: usize) -> Vec<PairEntry> {
    let mut out: Vec<PairEntry> = (5..=n_max)
        .filter(|&n| n != 6)
        .map(|n| PairEntry { theta_par: I2(n), partner: i2_partner(n) })
        .collect();
    for h in [H3, H4] {
        out.push(PairEntry { theta_par: h, partner: h_partner(h) });
    }
    out
}

pub fn quadratic_pair(theta_par: SystemName) -> Result<CoxeterPair> {
    let pair = match theta_par {
        I2(n) => i2_partner(n),
        H3 | H4 => h_partner(theta_par),
        _ => None,
    };
    match pair {
        Some(p) if p.degree == 2 => Ok(p),
        _ => Err(Error::Unsupported(format!("{} has no quadratic Coxeter partner", theta_par))),
    }
}

/// Orthonormal-up-to-scale frame (g, h) of a parallel plane. Points are held
/// as coordinates (c1, c2) meaning c1·g + c2·h, all in Q(√D).
#[derive(Clone, Debug)]
pub struct PlaneFrame {
    pub g: Vec<QuadNum>,
    pub h: Vec<QuadNum>,
    pub gg: QuadNum,
    pub hh: QuadNum,
    scale: [f64; 2],
}

impl PlaneFrame {
    pub fn new(g: Vec<QuadNum>, h: Vec<QuadNum>) -> Self {
        let gg = dot(&g, &g);
        let hh = dot(&h, &h);
        let scale = [gg.to_f64().sqrt(), hh.to_f64().sqrt()];
        PlaneFrame { g, h, gg, hh, scale }
    }

    pub fn coords(&self, v: &[QuadNum]) -> [QuadNum; 2] {
        [dot(v, &self.g) / &self.gg, dot(v, &self.h) / &self.hh]
    }

    pub fn to_ambient(&self, c: &[QuadNum; 2]) -> Vec<QuadNum> {
        linalg::add_vec(&linalg::scale_vec(&c[0], &self.g), &linalg::scale_vec(&c[1], &self.h))
    }

    pub fn inner(&self, u: &[QuadNum; 2], v: &[QuadNum; 2]) -> QuadNum {
        &u[0] * &v[0] * &self.gg + &u[1] * &v[1] * &self.hh
    }

    /// Orientation sign of (u, v); the true cross product is this value times
    /// the positive constant |g||h|.
    pub fn cross(&self, u: &[QuadNum; 2], v: &[QuadNum; 2]) -> QuadNum {
        &u[0] * &v[1] - &u[1] * &v[0]
    }

    pub fn to_float(&self, c: &[QuadNum; 2]) -> [f64; 2] {
        [c[0].to_f64() * self.scale[0], c[1].to_f64() * self.scale[1]]
    }

    /// |g||h|, the area of the unit cell of the coordinate grid.
    pub fn area_unit(&self) -> f64 {
        self.scale[0] * self.scale[1]
    }
}

#[derive(Clone, Debug)]
pub struct Projection {
    pub pair: CoxeterPair,
    pub d: u32,
    pub theta: RootSystem,
    pub fundamental: Vec<Vec<Rational>>,
    pub plus_basis: Vec<Vec<QuadNum>>,
    pub minus_basis: Vec<Vec<QuadNum>>,
    pub p_plus: Matrix<QuadNum>,
    pub p_minus: Matrix<QuadNum>,
    pub zeta_plus: Matrix<QuadNum>,
    pub zeta_minus: Matrix<QuadNum>,
    pub frame: Option<PlaneFrame>,
}

fn conj_vec(v: &[QuadNum]) -> Vec<QuadNum> {
    v.iter().map(|x| x.conjugate()).collect()
}

fn conj_mat(m: &Matrix<QuadNum>) -> Matrix<QuadNum> {
    m.iter().map(|r| conj_vec(r)).collect()
}

fn to_k(v: &[Rational], d: u32) -> Vec<QuadNum> {
    v.iter().map(|x| QuadNum::from_rational(x.clone(), d)).collect()
}

fn gram_schmidt(vs: &[Vec<QuadNum>]) -> Vec<Vec<QuadNum>> {
    let mut out: Vec<Vec<QuadNum>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for u in &out {
            let c = dot(&w, u) / dot(u, u);
            w = linalg::sub_vec(&w, &linalg::scale_vec(&c, u));
        }
        if !linalg::is_zero_vec(&w) {
            out.push(w);
        }
    }
    out
}

fn projector(basis: &[Vec<QuadNum>], n: usize, d: u32) -> Matrix<QuadNum> {
    let mut p = vec![vec![QuadNum::zero(d); n]; n];
    for v in basis {
        let vv = dot(v, v);
        for i in 0..n {
            for j in 0..n {
                p[i][j] = &p[i][j] + &(&v[i] * &v[j] / &vv);
            }
        }
    }
    p
}

/// 2cos(2π/h) as an element of Q(√D).
fn two_cos(h: usize) -> Result<QuadNum> {
    match h {
        5 => Ok(QuadNum::from_ints(-1, 1, 2, 5)),
        8 => Ok(QuadNum::sqrt_d(2)),
        12 => Ok(QuadNum::sqrt_d(3)),
        _ => Err(Error::Unsupported(format!("Coxeter plane for h = {}", h))),
    }
}

fn d6_plus_basis() -> Vec<Vec<QuadNum>> {
    let t = QuadNum::tau;
    let i = |k: i64| QuadNum::from_int(k, 5);
    vec![
        vec![t(), i(0), i(1), t(), i(0), i(-1)],
        vec![i(1), t(), i(0), i(-1), t(), i(0)],
        vec![i(0), i(1), t(), i(0), i(-1), t()],
    ]
}

fn e8_plus_basis() -> Vec<Vec<QuadNum>> {
    let h = [[-1, -1, -1, -1], [1, -1, -1, 1], [1, 1, -1, -1], [1, -1, 1, -1]];
    let s = QuadNum::sigma().scale(&rat(1, 2));
    (0..4)
        .map(|col| {
            let mut v = Vec::with_capacity(8);
            for sign in [1i64, -1] {
                for row in 0..4 {
                    let id = if row == col { QuadNum::one(5) } else { QuadNum::zero(5) };
                    v.push(id + s.scale(&rint(sign * h[row][col])));
                }
            }
            v
        })
        .collect()
}

/// The maximally symmetric projection for a quadratic pair.
pub fn coxeter_projection(pair: &CoxeterPair) -> Result<Projection> {
    if pair.degree != 2 {
        return Err(Error::Unsupported(format!("{} is not a quadratic pair", pair.theta_par)));
    }
    let d = pair.field_d.ok_or_else(|| Error::Unsupported("missing field".into()))?;
    let theta = build_root_system(pair.theta)?;
    let fundamental = theta.rational_fundamental().unwrap().to_vec();
    let n = theta.ambient_dim;
    let plus_basis = match pair.theta_par {
        I2(_) => {
            let c = coxeter_element(&theta)?;
            let h = coxeter_number(&theta)?;
            let ck: Matrix<QuadNum> = c.iter().map(|r| to_k(r, d)).collect();
            let c2 = linalg::mat_mul(&ck, &ck);
            let tc = two_cos(h)?;
            let m: Matrix<QuadNum> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let id = if i == j { QuadNum::one(d) } else { QuadNum::zero(d) };
                            &c2[i][j] - &(&tc * &ck[i][j]) + id
                        })
                        .collect()
                })
                .collect();
            let kernel = linalg::nullspace(&m);
            if kernel.len() != 2 {
                return Err(Error::Computation(format!("Coxeter plane has dimension {}", kernel.len())));
            }
            gram_schmidt(&kernel)
        }
        H3 => d6_plus_basis(),
        H4 => e8_plus_basis(),
        _ => return Err(Error::Unsupported(pair.theta_par.to_string())),
    };
    let p_plus = projector(&plus_basis, n, d);
    let p_minus = conj_mat(&p_plus);
    let frame = if plus_basis.len() == 2 {
        let g = linalg::mat_vec(&p_plus, &to_k(&fundamental[0], d));
        let f2 = linalg::mat_vec(&p_plus, &to_k(&fundamental[1], d));
        let c = dot(&f2, &g) / dot(&g, &g);
        let h = linalg::sub_vec(&f2, &linalg::scale_vec(&c, &g));
        Some(PlaneFrame::new(g, h))
    } else {
        None
    };
    let fk: Matrix<QuadNum> = linalg::transpose(&fundamental.iter().map(|f| to_k(f, d)).collect());
    let ftf = linalg::mat_mul(&linalg::transpose(&fk), &fk);
    let pinv = linalg::mat_mul(
        &linalg::inverse(&ftf).ok_or_else(|| Error::Computation("singular Gram matrix".into()))?,
        &linalg::transpose(&fk),
    );
    let zeta_plus: Matrix<QuadNum> =
        fundamental.iter().map(|f| linalg::mat_vec(&pinv, &linalg::mat_vec(&p_plus, &to_k(f, d)))).collect();
    let zeta_minus = conj_mat(&zeta_plus);
    let minus_basis = plus_basis.iter().map(|v| conj_vec(v)).collect();
    Ok(Projection {
        pair: pair.clone(),
        d,
        theta,
        fundamental,
        plus_basis,
        minus_basis,
        p_plus,
        p_minus,
        zeta_plus,
        zeta_minus,
        frame,
    })
}

impl Projection {
    pub fn ambient_dim(&self) -> usize {
        self.theta.ambient_dim
    }

    pub fn par_dim(&self) -> usize {
        self.plus_basis.len()
    }

    pub fn to_k(&self, v: &[Rational]) -> Vec<QuadNum> {
        to_k(v, self.d)
    }

    pub fn project_plus(&self, x: &[QuadNum]) -> Vec<QuadNum> {
        linalg::mat_vec(&self.p_plus, x)
    }

    pub fn project_minus(&self, x: &[QuadNum]) -> Vec<QuadNum> {
        linalg::mat_vec(&self.p_minus, x)
    }

    /// (P⁺x, P⁻x) for a rational point.
    pub fn project(&self, x: &[Rational]) -> (Vec<QuadNum>, Vec<QuadNum>) {
        let xk = self.to_k(x);
        (self.project_plus(&xk), self.project_minus(&xk))
    }

    /// Rational coefficients φ_k with x = Σ φ_k f_k.
    pub fn coefficients(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        let f = linalg::transpose(&self.fundamental);
        let phi = linalg::solve(&f, x).ok_or(Error::OutsideRationalSpan)?;
        Ok(phi)
    }

    /// Rational coefficients φ_k with x∥ = Σ φ_k P⁺f_k.
    pub fn lift_coefficients(&self, x_par: &[QuadNum]) -> Result<Vec<Rational>> {
        let cols: Vec<Vec<QuadNum>> = self.fundamental.iter().map(|f| self.project_plus(&self.to_k(f))).collect();
        let n = self.ambient_dim();
        let mut a: Matrix<Rational> = Vec::with_capacity(2 * n);
        let mut b: Vec<Rational> = Vec::with_capacity(2 * n);
        for i in 0..n {
            a.push(cols.iter().map(|c| c[i].a().clone()).collect());
            b.push(x_par[i].a().clone());
            a.push(cols.iter().map(|c| c[i].b().clone()).collect());
            b.push(x_par[i].b().clone());
        }
        linalg::solve(&a, &b).ok_or(Error::OutsideRationalSpan)
    }

    /// The unique rational-span point whose parallel part is `x_par`.
    pub fn lift(&self, x_par: &[QuadNum]) -> Result<Vec<Rational>> {
        let phi = self.lift_coefficients(x_par)?;
        let mut x = vec![Rational::zero(); self.ambient_dim()];
        for (p, f) in phi.iter().zip(&self.fundamental) {
            x = linalg::add_vec(&x, &linalg::scale_vec(p, f));
        }
        Ok(x)
    }

    /// Parallel projections of all θ roots.
    pub fn projected_roots(&self) -> Vec<Vec<QuadNum>> {
        self.theta.rational_roots().unwrap().iter().map(|r| self.project_plus(&self.to_k(r))).collect()
    }

    /// Distinct squared radii of the projected roots, ascending, with counts.
    pub fn ring_structure(&self) -> Vec<(QuadNum, usize)> {
        let mut rings: Vec<(QuadNum, usize)> = Vec::new();
        for v in self.projected_roots() {
            let n2 = dot(&v, &v);
            match rings.iter_mut().find(|(r, _)| *r == n2) {
                Some(e) => e.1 += 1,
                None => rings.push((n2, 1)),
            }
        }
        rings.sort_by(|a, b| a.0.cmp(&b.0));
        rings
    }

    /// For each parallel mirror, the number of θ mirrors meeting the
    /// parallel space in it.
    pub fn mirror_multiplets(&self) -> Vec<usize> {
        let roots = self.theta.rational_roots().unwrap();
        let mut reps: Vec<Vec<Rational>> = Vec::new();
        for r in roots {
            if !reps.iter().any(|s| linalg::neg_vec(s) == *r) {
                reps.push(r.clone());
            }
        }
        let mut groups: Vec<(Vec<QuadNum>, usize)> = Vec::new();
        for r in reps {
            let v = self.project_plus(&self.to_k(&r));
            let vv = dot(&v, &v);
            match groups.iter_mut().find(|(u, _)| {
                let uv = dot(u, &v);
                &uv * &uv == &dot(u, u) * &vv
            }) {
                Some(g) => g.1 += 1,
                None => groups.push((v, 1)),
            }
        }
        groups.into_iter().map(|(_, c)| c).collect()
    }

    /// Checks P⁺ + P⁻ = 1 on the rational span and P⁺P⁻ = 0.
    pub fn check_complementary(&self) -> bool {
        let n = self.ambient_dim();
        let d = self.d;
        let prod = linalg::mat_mul(&self.p_plus, &self.p_minus);
        if prod.iter().flatten().any(|x| !x.is_zero()) {
            return false;
        }
        self.fundamental.iter().all(|f| {
            let fk = self.to_k(f);
            linalg::add_vec(&self.project_plus(&fk), &self.project_minus(&fk)) == fk
        }) && n > 0
            && d > 0
    }
}

/// Exact square root in Q(√D) when one exists.
pub fn sqrt_in_field(x: &QuadNum) -> Option<QuadNum> {
    let d = x.d();
    let norm = x.norm();
    let s = rational_sqrt(&norm)?;
    for sign in [1i64, -1] {
        let a2 = (x.a() + s.clone() * rint(sign)) / rint(2);
        if let Some(a) = rational_sqrt(&a2) {
            for a in [a.clone(), -a] {
                if a.is_zero() {
                    let b2 = x.a() / rint(d as i64);
                    if let Some(b) = rational_sqrt(&b2) {
                        let cand = QuadNum::new(a.clone(), b, d).ok()?;
                        if &cand * &cand == *x && !cand.is_negative() {
                            return Some(cand);
                        }
                    }
                    continue;
                }
                let b = x.b() / (a.clone() * rint(2));
                let cand = QuadNum::new(a, b, d).ok()?;
                if &cand * &cand == *x {
                    return Some(cand.abs());
                }
            }
        }
    }
    None
}

fn rational_sqrt(r: &Rational) -> Option<Rational> {
    use num_traits::Signed;
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let m = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&m * &m) == r.denom() {
        Some(Rational::new(n, m))
    } else {
        None
    }
}

/// True when x·y = 1 has a solution y with integral components of the same
/// shape, i.e. x is a unit of the ring of integers.
pub fn is_unit(x: &QuadNum) -> bool {
    let n = x.norm();
    (n == Rational::one() || n == -Rational::one()) && is_algebraic_integer(x)
}

fn is_algebraic_integer(x: &QuadNum) -> bool {
    let t = x.trace();
    t.is_integer() && x.norm().is_integer()
}
