//! Space groups of reflection point groups acting on a primitive quasilattice basis:
//! phase-function constraints, gauge fixing and classification over Q/Z.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactfield::Rational;
use crate::linalg;

pub type IntMatrix = Vec<Vec<i64>>;

fn identity(n: usize) -> IntMatrix {
    (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect()
}

fn mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    (0..n).map(|i| (0..m).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect()).collect()
}

fn add(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect()).collect()
}

fn to_rational(a: &IntMatrix) -> linalg::Matrix<Rational> {
    a.iter().map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect()).collect()
}

/// A relation `(g_1 g_2 … g_k)^order = 1` over generator indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub word: Vec<usize>,
    pub order: u32,
}

impl Relation {
    pub fn new(word: Vec<usize>, order: u32) -> Relation {
        Relation { word, order }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w: String = self.word.iter().map(|g| format!("R{}", g + 1)).collect();
        if self.word.len() == 1 {
            write!(f, "{}^{} = 1", w, self.order)
        } else {
            write!(f, "({})^{} = 1", w, self.order)
        }
    }
}

/// Point group given by integer generator matrices on a primitive basis, with relations.
/// Column `j` of a generator holds the image of `b_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub name: String,
    pub dim: usize,
    pub generators: Vec<IntMatrix>,
    pub relations: Vec<Relation>,
}

impl Presentation {
    pub fn new(name: &str, dim: usize, generators: Vec<IntMatrix>, relations: Vec<Relation>) -> Result<Presentation> {
        let p = Presentation { name: name.to_string(), dim, generators, relations };
        p.validate()?;
        Ok(p)
    }

    /// Checks shapes, unimodularity and every relation as a matrix identity.
    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.generators.iter().enumerate() {
            if g.len() != self.dim || g.iter().any(|r| r.len() != self.dim) {
                return Err(Error::InvalidPresentation(format!("R{} is not {}x{}", i + 1, self.dim, self.dim)));
            }
            let det = linalg::determinant(&to_rational(g));
            if det.abs() != Rational::one() {
                return Err(Error::InvalidPresentation(format!("R{} has determinant {}", i + 1, det)));
            }
        }
        for r in &self.relations {
            relation_matrix(self, r)?;
        }
        Ok(())
    }

    pub fn unknowns(&self) -> usize {
        self.generators.len() * self.dim
    }

    pub fn word_matrix(&self, word: &[usize]) -> Result<IntMatrix> {
        let mut m = identity(self.dim);
        for &g in word {
            let r = self
                .generators
                .get(g)
                .ok_or_else(|| Error::InvalidPresentation(format!("no generator R{}", g + 1)))?;
            m = mul(&m, r);
        }
        Ok(m)
    }

    /// Gauge-move matrix: rows are unknowns `Φ_i(b_j)`, columns the values `χ(b_l)`.
    pub fn gauge_matrix(&self) -> IntMatrix {
        let n = self.dim;
        let mut g = vec![vec![0; n]; self.unknowns()];
        for (i, r) in self.generators.iter().enumerate() {
            for j in 0..n {
                for l in 0..n {
                    g[i * n + j][l] = r[l][j] - i64::from(l == j);
                }
            }
        }
        g
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} generators on {} basis vectors, relations", self.name, self.generators.len(), self.dim)?;
        for r in &self.relations {
            write!(f, " {};", r)?;
        }
        Ok(())
    }
}

/// Standard Coxeter relations: squares, then labelled edges, then commuting pairs.
pub fn coxeter_relations(rank: usize, edges: &[(usize, usize, u32)]) -> Vec<Relation> {
    let label = |i: usize, j: usize| {
        edges.iter().find(|e| (e.0 == i && e.1 == j) || (e.0 == j && e.1 == i)).map_or(2, |e| e.2)
    };
    let mut rels: Vec<Relation> = (0..rank).map(|i| Relation::new(vec![i], 2)).collect();
    let pairs: Vec<(usize, usize)> = (0..rank).flat_map(|i| (i + 1..rank).map(move |j| (i, j))).collect();
    for &(i, j) in &pairs {
        if label(i, j) > 2 {
            rels.push(Relation::new(vec![i, j], label(i, j)));
        }
    }
    for &(i, j) in &pairs {
        if label(i, j) == 2 {
            rels.push(Relation::new(vec![i, j], 2));
        }
    }
    rels
}

/// Reflection presentation on the basis `{b_i} ∪ {τ b_i}` for a diagram with labels in {2, 3, 5}.
pub fn golden_reflection_presentation(name: &str, rank: usize, edges: &[(usize, usize, u32)]) -> Result<Presentation> {
    let relations = coxeter_relations(rank, edges);
    let cartan = |i: usize, j: usize| -> Result<(i64, i64)> {
        if i == j {
            return Ok((2, 0));
        }
        let m = relations.iter().find(|r| r.word == [i.min(j), i.max(j)]).map_or(2, |r| r.order);
        match m {
            2 => Ok((0, 0)),
            3 => Ok((-1, 0)),
            5 => Ok((0, -1)),
            _ => Err(Error::Unsupported(format!("edge label {} outside Z[τ]", m))),
        }
    };
    let n = 2 * rank;
    let mut gens = Vec::new();
    for i in 0..rank {
        let mut r = identity(n);
        for j in 0..rank {
            let (p, q) = cartan(i, j)?;
            r[i][j] -= p;
            r[i + rank][j] -= q;
            r[i][j + rank] -= q;
            r[i + rank][j + rank] -= p + q;
        }
        gens.push(r);
    }
    Presentation::new(name, n, gens, relations)
}

fn cyclotomic(n: usize) -> Vec<i64> {
    let mut p = vec![0i64; n + 1];
    p[0] = -1;
    p[n] = 1;
    for d in (1..n).filter(|d| n % d == 0) {
        let q = cyclotomic(d);
        let mut out = vec![0i64; p.len() - q.len() + 1];
        let mut rem = p.clone();
        for k in (0..out.len()).rev() {
            let c = rem[k + q.len() - 1];
            out[k] = c;
            for (t, &qc) in q.iter().enumerate() {
                rem[k + t] -= c * qc;
            }
        }
        p = out;
    }
    p
}

/// Dihedral group of order 2n acting on Z[ζ_n] in the power basis, generated by
/// `z ↦ z̄` and `z ↦ ζ z̄`.
pub fn i2(n: usize) -> Result<Presentation> {
    if n < 3 {
        return Err(Error::Unsupported(format!("I2({}) needs n ≥ 3", n)));
    }
    let phi = cyclotomic(n);
    let dim = phi.len() - 1;
    let power = |k: usize| -> Vec<i64> {
        let mut v = vec![0i64; dim.max(k + 1)];
        v[k] = 1;
        for e in (dim..v.len()).rev() {
            let c = v[e];
            if c != 0 {
                for (t, &pc) in phi.iter().enumerate() {
                    v[e - dim + t] -= c * pc;
                }
            }
        }
        v.truncate(dim);
        v
    };
    let generator = |shift: usize| -> IntMatrix {
        let cols: Vec<Vec<i64>> = (0..dim).map(|k| power((shift + n - k) % n)).collect();
        (0..dim).map(|i| (0..dim).map(|j| cols[j][i]).collect()).collect()
    };
    let relations = coxeter_relations(2, &[(0, 1, n as u32)]);
    Presentation::new(&format!("I2({})", n), dim, vec![generator(0), generator(1)], relations)
}

pub fn h3() -> Result<Presentation> {
    golden_reflection_presentation("H3", 3, &[(0, 1, 5), (1, 2, 3)])
}

/// The H4 generators on `b_1..b_4` (simple roots) and `b_5..b_8 = τ b_1..τ b_4`.
pub fn h4() -> Presentation {
    let r1 = vec![
        vec![-1, 1, 0, 0, 0, 0, 0, 0],
        vec![0, 1, 0, 0, 0, 0, 0, 0],
        vec![0, 0, 1, 0, 0, 0, 0, 0],
        vec![0, 0, 0, 1, 0, 0, 0, 0],
        vec![0, 0, 0, 0, -1, 1, 0, 0],
        vec![0, 0, 0, 0, 0, 1, 0, 0],
        vec![0, 0, 0, 0, 0, 0, 1, 0],
        vec![0, 0, 0, 0, 0, 0, 0, 1],
    ];
    let r2 = vec![
        vec![1, 0, 0, 0, 0, 0, 0, 0],
        vec![1, -1, 1, 0, 0, 0, 0, 0],
        vec![0, 0, 1, 0, 0, 0, 0, 0],
        vec![0, 0, 0, 1, 0, 0, 0, 0],
        vec![0, 0, 0, 0, 1, 0, 0, 0],
        vec![0, 0, 0, 0, 1, -1, 1, 0],
        vec![0, 0, 0, 0, 0, 0, 1, 0],
        vec![0, 0, 0, 0, 0, 0, 0, 1],
    ];
    let r3 = vec![
        vec![1, 0, 0, 0, 0, 0, 0, 0],
        vec![0, 1, 0, 0, 0, 0, 0, 0],
        vec![0, 1, -1, 0, 0, 0, 0, 1],
        vec![0, 0, 0, 1, 0, 0, 0, 0],
        vec![0, 0, 0, 0, 1, 0, 0, 0],
        vec![0, 0, 0, 0, 0, 1, 0, 0],
        vec![0, 0, 0, 1, 0, 1, -1, 1],
        vec![0, 0, 0, 0, 0, 0, 0, 1],
    ];
    let r4 = vec![
        vec![1, 0, 0, 0, 0, 0, 0, 0],
        vec![0, 1, 0, 0, 0, 0, 0, 0],
        vec![0, 0, 1, 0, 0, 0, 0, 0],
        vec![0, 0, 0, -1, 0, 0, 1, 0],
        vec![0, 0, 0, 0, 1, 0, 0, 0],
        vec![0, 0, 0, 0, 0, 1, 0, 0],
        vec![0, 0, 0, 0, 0, 0, 1, 0],
        vec![0, 0, 1, 0, 0, 0, 1, -1],
    ];
    let relations = coxeter_relations(4, &[(0, 1, 3), (1, 2, 3), (2, 3, 5)]);
    Presentation::new("H4", 8, vec![r1, r2, r3, r4], relations).expect("H4 presentation is valid")
}

/// Gauge pivots `Φ1(b2), Φ1(b6), Φ2(b1), Φ2(b5), Φ3(b4), Φ3(b8), Φ4(b3), Φ4(b7)`.
pub fn h4_pivots() -> Vec<Unknown> {
    [(0, 1), (0, 5), (1, 0), (1, 4), (2, 3), (2, 7), (3, 2), (3, 6)]
        .into_iter()
        .map(|(generator, basis)| Unknown { generator, basis })
        .collect()
}

/// Parses `h4`, `h3` or `i2:<n>`.
pub fn group(name: &str) -> Result<Presentation> {
    match name.to_ascii_lowercase().as_str() {
        "h4" => Ok(h4()),
        "h3" => h3(),
        s => match s.strip_prefix("i2:").map(str::parse::<usize>) {
            Some(Ok(n)) => i2(n),
            _ => Err(Error::Invalid(format!("unknown group {:?}; expected h4, h3 or i2:<n>", name))),
        },
    }
}

/// Matrices whose columns give the constraints of a relation: for the word
/// `g_1…g_k` with `M = 1 + g + … + g^{n−1}`, the t-th matrix is `g_{t+1}…g_k · M`.
pub fn relation_matrix(p: &Presentation, rel: &Relation) -> Result<Vec<IntMatrix>> {
    if rel.word.is_empty() || rel.order == 0 {
        return Err(Error::InvalidPresentation(format!("empty relation {}", rel)));
    }
    let g = p.word_matrix(&rel.word)?;
    let id = identity(p.dim);
    let mut sum = id.clone();
    let mut pow = id.clone();
    for _ in 1..rel.order {
        pow = mul(&pow, &g);
        sum = add(&sum, &pow);
    }
    if mul(&pow, &g) != id {
        return Err(Error::InvalidPresentation(format!("{} does not hold", rel)));
    }
    (0..rel.word.len()).map(|t| Ok(mul(&p.word_matrix(&rel.word[t + 1..])?, &sum))).collect()
}

/// The unknown `Φ_{generator}(b_{basis})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Unknown {
    pub generator: usize,
    pub basis: usize,
}

impl Unknown {
    pub fn index(&self, dim: usize) -> usize {
        self.generator * dim + self.basis
    }

    pub fn from_index(u: usize, dim: usize) -> Unknown {
        Unknown { generator: u / dim, basis: u % dim }
    }
}

impl fmt::Display for Unknown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Φ{}(b{})", self.generator + 1, self.basis + 1)
    }
}

/// Integer linear form `Σ c_u Φ_u ≡ 0 (mod 1)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint {
    pub dim: usize,
    pub coeffs: Vec<i64>,
}

impl Constraint {
    pub fn terms(&self) -> Vec<(Unknown, i64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(u, &c)| (Unknown::from_index(u, self.dim), c))
            .collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn holds(&self, phases: &[Rational]) -> bool {
        let s: Rational = self.coeffs.iter().zip(phases).map(|(&c, x)| x * Rational::from_integer(c.into())).sum();
        s.is_integer()
    }
}

fn write_sum(f: &mut fmt::Formatter<'_>, terms: &[(Unknown, String)]) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "0");
    }
    for (k, (u, c)) in terms.iter().enumerate() {
        let (neg, mag) = match c.strip_prefix('-') {
            Some(m) => (true, m.to_string()),
            None => (false, c.clone()),
        };
        match (k, neg) {
            (0, true) => write!(f, "−")?,
            (_, true) => write!(f, "−")?,
            (0, false) => {}
            (_, false) => write!(f, "+")?,
        }
        if mag != "1" {
            write!(f, "{}", mag)?;
        }
        write!(f, "{}", u)?;
    }
    Ok(())
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0 ≡ ")?;
        let terms: Vec<(Unknown, String)> = self.terms().into_iter().map(|(u, c)| (u, c.to_string())).collect();
        write_sum(f, &terms)
    }
}

/// Nonzero-column constraints of one relation.
pub fn relation_constraints(p: &Presentation, rel: &Relation) -> Result<Vec<Constraint>> {
    let mats = relation_matrix(p, rel)?;
    let n = p.dim;
    let mut out = Vec::new();
    for k in 0..n {
        let mut coeffs = vec![0i64; p.unknowns()];
        for (t, m) in mats.iter().enumerate() {
            let g = rel.word[t];
            for l in 0..n {
                coeffs[g * n + l] += m[l][k];
            }
        }
        let c = Constraint { dim: n, coeffs };
        if !c.is_trivial() {
            out.push(c);
        }
    }
    Ok(out)
}

/// Unknowns in Q/Z, integer constraints and the gauge-move matrix.
#[derive(Clone, Debug)]
pub struct PhaseSystem {
    pub dim: usize,
    pub generators: usize,
    pub constraints: Vec<Constraint>,
    pub gauge: IntMatrix,
}

impl PhaseSystem {
    pub fn new(p: &Presentation, relations: &[Relation]) -> Result<PhaseSystem> {
        let mut constraints = Vec::new();
        for r in relations {
            constraints.extend(relation_constraints(p, r)?);
        }
        Ok(PhaseSystem { dim: p.dim, generators: p.generators.len(), constraints, gauge: p.gauge_matrix() })
    }

    pub fn unknowns(&self) -> usize {
        self.dim * self.generators
    }
}

/// Status of an unknown after gauge fixing and propagation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Zero,
    Torsion(u64),
    Free,
}

/// A gauge choice `χ(b_chi) = Σ c Φ`, made to set `fixes` to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeChoice {
    pub chi: usize,
    pub fixes: Unknown,
    pub value: Vec<(Unknown, Rational)>,
}

impl fmt::Display for GaugeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "χ(b{}) = ", self.chi + 1)?;
        let terms: Vec<(Unknown, String)> = self.value.iter().map(|(u, c)| (*u, c.to_string())).collect();
        write_sum(f, &terms)?;
        write!(f, "  [sets {} ≡ 0]", self.fixes)
    }
}

/// System after gauge fixing: statuses, the choices made and any residual gauge freedom.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub dim: usize,
    pub status: Vec<Status>,
    pub choices: Vec<GaugeChoice>,
    pub residual_gauge: IntMatrix,
    pub constraints: Vec<Constraint>,
}

impl ReducedSystem {
    pub fn zero_count(&self) -> usize {
        self.status.iter().filter(|s| **s == Status::Zero).count()
    }

    pub fn torsion_count(&self, n: u64) -> usize {
        self.status.iter().filter(|s| **s == Status::Torsion(n)).count()
    }

    pub fn unknowns_with(&self, status: Status) -> Vec<Unknown> {
        (0..self.status.len()).filter(|&u| self.status[u] == status).map(|u| Unknown::from_index(u, self.dim)).collect()
    }

    /// Drops zero unknowns and reduces coefficients modulo torsion orders.
    pub fn reduce(&self, c: &Constraint) -> Option<Constraint> {
        let mut coeffs = c.coeffs.clone();
        for (u, x) in coeffs.iter_mut().enumerate() {
            match self.status[u] {
                Status::Zero => *x = 0,
                Status::Torsion(n) => *x = x.rem_euclid(n as i64),
                Status::Free => {}
            }
        }
        if let Some(first) = coeffs.iter().position(|&x| x != 0) {
            if coeffs[first] < 0 && coeffs.iter().enumerate().all(|(u, &x)| x == 0 || self.status[u] == Status::Free) {
                coeffs.iter_mut().for_each(|x| *x = -*x);
            }
        }
        let r = Constraint { dim: c.dim, coeffs };
        (!r.is_trivial()).then_some(r)
    }

    /// Reduced, deduplicated forms of a list of constraints, in first-seen order.
    pub fn reduce_all(&self, cs: &[Constraint]) -> Vec<Constraint> {
        let mut out: Vec<Constraint> = Vec::new();
        for c in cs {
            if let Some(r) = self.reduce(c) {
                if !out.contains(&r) {
                    out.push(r);
                }
            }
        }
        out
    }

    /// Classifies the reduced system: statuses become constraints, residual gauge stays.
    pub fn classify(&self) -> Result<SpaceGroupClassification> {
        let n = self.status.len();
        let mut cs = self.constraints.clone();
        for (u, s) in self.status.iter().enumerate() {
            let c = match s {
                Status::Zero => 1,
                Status::Torsion(k) => *k as i64,
                Status::Free => continue,
            };
            let mut coeffs = vec![0; n];
            coeffs[u] = c;
            cs.push(Constraint { dim: self.dim, coeffs });
        }
        classify_system(&cs, &self.residual_gauge, n)
    }
}

fn propagate(status: &mut [Status], constraints: &[Constraint]) {
    loop {
        let mut changed = false;
        for c in constraints {
            let live: Vec<(usize, i64)> = c
                .coeffs
                .iter()
                .enumerate()
                .filter(|(u, &x)| x != 0 && status[*u] != Status::Zero)
                .map(|(u, &x)| (u, x))
                .collect();
            if let [(u, x)] = live[..] {
                let k = x.unsigned_abs();
                let new = match status[u] {
                    _ if k == 1 => Status::Zero,
                    Status::Torsion(t) => {
                        let g = t.gcd(&k);
                        if g == 1 {
                            Status::Zero
                        } else {
                            Status::Torsion(g)
                        }
                    }
                    _ => Status::Torsion(k),
                };
                if new != status[u] {
                    status[u] = new;
                    changed = true;
                }
            }
        }
        if !changed && !forced_by_parity(status, constraints) {
            return;
        }
    }
}

/// Gaussian elimination over Z/2 on constraints whose live unknowns are all 2-torsion;
/// marks unknowns forced to zero.
fn forced_by_parity(status: &mut [Status], constraints: &[Constraint]) -> bool {
    let mut rows: Vec<BTreeSet<usize>> = Vec::new();
    for c in constraints {
        let live: Vec<(usize, i64)> =
            c.coeffs.iter().enumerate().filter(|(u, &x)| x != 0 && status[*u] != Status::Zero).map(|(u, &x)| (u, x)).collect();
        if live.iter().all(|(u, _)| status[*u] == Status::Torsion(2)) {
            let r: BTreeSet<usize> = live.iter().filter(|(_, x)| x % 2 != 0).map(|(u, _)| *u).collect();
            if !r.is_empty() {
                rows.push(r);
            }
        }
    }
    let mut basis: Vec<BTreeSet<usize>> = Vec::new();
    for mut r in rows {
        for b in &basis {
            if r.contains(b.iter().next().expect("nonempty row")) {
                r = r.symmetric_difference(b).copied().collect();
            }
        }
        if let Some(&lead) = r.iter().next() {
            for b in basis.iter_mut() {
                if b.contains(&lead) {
                    *b = b.symmetric_difference(&r).copied().collect();
                }
            }
            basis.push(r);
        }
    }
    let mut changed = false;
    for b in basis.iter().filter(|b| b.len() == 1) {
        let u = *b.iter().next().expect("single unknown");
        status[u] = Status::Zero;
        changed = true;
    }
    changed
}

/// Uses unit pivots of the gauge matrix to set unknowns to zero, trying `preferred`
/// first and then every unknown in order; then propagates single-unknown constraints.
pub fn gauge_fix(system: &PhaseSystem, preferred: &[Unknown]) -> Result<ReducedSystem> {
    let n = system.unknowns();
    let dim = system.dim;
    let mut cols: Vec<(usize, Vec<i64>)> =
        (0..dim).map(|l| (l, system.gauge.iter().map(|r| r[l]).collect())).collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for unit in [true, false] {
        let order: Vec<usize> = preferred.iter().map(|u| u.index(dim)).chain(0..n).collect();
        for u in order {
            if u >= n || pivots.iter().any(|p| p.0 == u) {
                continue;
            }
            let usable = |c: &Vec<i64>| if unit { c[u].abs() == 1 } else { c[u] != 0 };
            let Some(k) = cols.iter().position(|(_, c)| usable(c)) else { continue };
            let (l, pc) = cols.remove(k);
            for (_, c) in cols.iter_mut() {
                if c[u] != 0 {
                    let (a, b) = (pc[u], c[u]);
                    for (x, y) in c.iter_mut().zip(&pc) {
                        *x = a * *x - b * y;
                    }
                    let g = c.iter().fold(0i64, |g, x| g.gcd(x));
                    if g > 1 {
                        c.iter_mut().for_each(|x| *x /= g);
                    }
                }
            }
            pivots.push((u, l));
        }
    }
    let mut status = vec![Status::Free; n];
    for &(u, _) in &pivots {
        status[u] = Status::Zero;
    }
    let choices = gauge_choices(system, &pivots)?;
    propagate(&mut status, &system.constraints);
    let residual_gauge: IntMatrix = (0..n).map(|u| cols.iter().map(|(_, c)| c[u]).collect()).collect();
    Ok(ReducedSystem { dim, status, choices, residual_gauge, constraints: system.constraints.clone() })
}

fn gauge_choices(system: &PhaseSystem, pivots: &[(usize, usize)]) -> Result<Vec<GaugeChoice>> {
    let dim = system.dim;
    let chis: Vec<usize> = pivots.iter().map(|p| p.1).collect();
    let s: linalg::Matrix<Rational> =
        pivots.iter().map(|&(u, _)| chis.iter().map(|&l| Rational::from_integer(system.gauge[u][l].into())).collect()).collect();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let inv = linalg::inverse(&s).ok_or_else(|| Error::Computation("gauge pivots are dependent".into()))?;
    Ok(chis
        .iter()
        .enumerate()
        .map(|(a, &l)| {
            let value = pivots
                .iter()
                .enumerate()
                .filter(|(b, _)| !inv[a][*b].is_zero())
                .map(|(b, &(u, _))| (Unknown::from_index(u, dim), -inv[a][b].clone()))
                .collect();
            GaugeChoice { chi: l, fixes: Unknown::from_index(pivots[a].0, dim), value }
        })
        .collect())
}

/// Gauge-inequivalent phase assignments, each a vector of values in [0, 1).
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceGroupClassification {
    pub count: usize,
    pub representatives: Vec<Vec<Rational>>,
}

impl SpaceGroupClassification {
    pub fn is_symmorphic_only(&self) -> bool {
        self.count == 1 && self.representatives[0].iter().all(Zero::is_zero)
    }
}

impl fmt::Display for SpaceGroupClassification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.count == 1 { "" } else { "s" };
        if self.is_symmorphic_only() {
            write!(f, "1 space group (symmorphic)")
        } else {
            write!(f, "{} space group{} (1 symmorphic, {} nonsymmorphic)", self.count, s, self.count - 1)
        }
    }
}

/// Column-reduces `a` (m×n) to diagonal form, tracking the column transform and its inverse.
struct Diagonal {
    d: Vec<BigInt>,
    v: Vec<Vec<BigInt>>,
    vinv: Vec<Vec<BigInt>>,
}

fn diagonalize(mut a: Vec<Vec<BigInt>>, n: usize) -> Diagonal {
    let m = a.len();
    let id = |i: usize, j: usize| if i == j { BigInt::one() } else { BigInt::zero() };
    let mut v: Vec<Vec<BigInt>> = (0..n).map(|i| (0..n).map(|j| id(i, j)).collect()).collect();
    let mut vinv = v.clone();
    let mut d = Vec::new();
    for t in 0..m.min(n) {
        loop {
            let pos = (t..m)
                .flat_map(|i| (t..n).map(move |j| (i, j)))
                .filter(|&(i, j)| !a[i][j].is_zero())
                .min_by(|&(i, j), &(k, l)| a[i][j].abs().cmp(&a[k][l].abs()));
            let Some((pi, pj)) = pos else { return Diagonal { d, v, vinv } };
            a.swap(t, pi);
            if pj != t {
                for row in a.iter_mut().chain(v.iter_mut()) {
                    row.swap(t, pj);
                }
                vinv.swap(t, pj);
            }
            let mut clean = true;
            for i in t + 1..m {
                if !a[i][t].is_zero() {
                    let q = a[i][t].div_floor(&a[t][t]);
                    let pivot = a[t].clone();
                    for (x, y) in a[i].iter_mut().zip(&pivot) {
                        *x -= &q * y;
                    }
                    clean &= a[i][t].is_zero();
                }
            }
            for j in t + 1..n {
                if !a[t][j].is_zero() {
                    let q = a[t][j].div_floor(&a[t][t]);
                    for row in a.iter_mut().chain(v.iter_mut()) {
                        let y = row[t].clone();
                        row[j] -= &q * y;
                    }
                    let rj = vinv[j].clone();
                    for (x, y) in vinv[t].iter_mut().zip(&rj) {
                        *x += &q * y;
                    }
                    clean &= a[t][j].is_zero();
                }
            }
            if clean {
                break;
            }
        }
        d.push(a[t][t].abs());
    }
    Diagonal { d, v, vinv }
}

/// Solutions of `A Φ ≡ 0 (mod 1)` modulo real gauge moves `Φ ↦ Φ + G χ`.
pub fn classify_system(constraints: &[Constraint], gauge: &IntMatrix, n: usize) -> Result<SpaceGroupClassification> {
    for c in constraints {
        let ag: Vec<i64> = (0..gauge.first().map_or(0, Vec::len))
            .map(|l| c.coeffs.iter().zip(gauge).map(|(x, g)| x * g[l]).sum())
            .collect();
        if ag.iter().any(|&x| x != 0) {
            return Err(Error::InvalidPresentation(format!("gauge moves violate {}", c)));
        }
    }
    let a: Vec<Vec<BigInt>> = constraints.iter().map(|c| c.coeffs.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let diag = diagonalize(a, n);
    let r = diag.d.len();
    let free: linalg::Matrix<Rational> = (r..n)
        .map(|i| {
            (0..gauge.first().map_or(0, Vec::len))
                .map(|l| {
                    let s: BigInt = (0..n).map(|u| &diag.vinv[i][u] * BigInt::from(gauge[u][l])).sum();
                    Rational::from_integer(s)
                })
                .collect()
        })
        .collect();
    let gauge_rank = if free.is_empty() || free[0].is_empty() { 0 } else { linalg::rank(&free) };
    if gauge_rank < n - r {
        return Err(Error::Computation(format!("{} continuous phase parameters survive gauge fixing", n - r - gauge_rank)));
    }
    let orders: Vec<(usize, BigInt)> = diag.d.iter().cloned().enumerate().filter(|(_, x)| !x.is_one()).collect();
    let count = orders
        .iter()
        .try_fold(1usize, |acc, (_, x)| x.to_usize().and_then(|x| acc.checked_mul(x)))
        .ok_or_else(|| Error::Computation("too many space groups to enumerate".into()))?;
    let mut representatives = Vec::with_capacity(count);
    for mut idx in 0..count {
        let mut psi = vec![Rational::zero(); n];
        for (i, d) in &orders {
            let k = idx % d.to_usize().unwrap_or(1);
            idx /= d.to_usize().unwrap_or(1);
            psi[*i] = Rational::new(k.into(), d.clone());
        }
        let phi: Vec<Rational> = (0..n)
            .map(|u| {
                let s: Rational = (0..n).map(|i| &psi[i] * Rational::from_integer(diag.v[u][i].clone())).sum();
                &s - s.floor()
            })
            .collect();
        representatives.push(phi);
    }
    Ok(SpaceGroupClassification { count, representatives })
}

/// Classifies the full constraint system of a presentation.
pub fn classify(p: &Presentation) -> Result<SpaceGroupClassification> {
    let system = PhaseSystem::new(p, &p.relations)?;
    classify_system(&system.constraints, &system.gauge, system.unknowns())
}

/// One relation's contribution to the trace.
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub relation: Relation,
    pub matrices: Vec<IntMatrix>,
    pub constraints: Vec<Constraint>,
    pub reduced: Vec<Constraint>,
}

/// Step-by-step derivation: square relations fix the gauge, the others act on the
/// remaining torsion unknowns.
#[derive(Clone, Debug)]
pub struct Trace {
    pub presentation: Presentation,
    pub steps: Vec<TraceStep>,
    pub intermediate: ReducedSystem,
    pub classification: SpaceGroupClassification,
}

pub fn trace(p: &Presentation, preferred: &[Unknown]) -> Result<Trace> {
    let local: Vec<Relation> = p.relations.iter().filter(|r| r.word.len() == 1).cloned().collect();
    let intermediate = gauge_fix(&PhaseSystem::new(p, &local)?, preferred)?;
    let mut steps = Vec::new();
    for rel in &p.relations {
        let matrices = relation_matrix(p, rel)?;
        let constraints = relation_constraints(p, rel)?;
        let reduced = if rel.word.len() == 1 { Vec::new() } else { intermediate.reduce_all(&constraints) };
        steps.push(TraceStep { relation: rel.clone(), matrices, constraints, reduced });
    }
    Ok(Trace { presentation: p.clone(), steps, intermediate, classification: classify(p)? })
}

fn write_matrix(out: &mut String, m: &IntMatrix) {
    for row in m {
        let cells: Vec<String> = row.iter().map(|x| format!("{:>3}", x)).collect();
        out.push_str(&format!("    [{} ]\n", cells.join("")));
    }
}

impl Trace {
    pub fn render(&self) -> String {
        let mut out = format!("{}\n", self.presentation);
        let n = self.intermediate.status.len();
        for step in self.steps.iter().filter(|s| s.relation.word.len() == 1) {
            out.push_str(&format!("\n{}\n", step.relation));
            write_matrix(&mut out, &step.matrices[0]);
            for c in &step.constraints {
                out.push_str(&format!("  {}\n", c));
            }
        }
        out.push_str("\ngauge choices\n");
        for g in &self.intermediate.choices {
            out.push_str(&format!("  {}\n", g));
        }
        let torsion = self.intermediate.torsion_count(2);
        out.push_str(&format!(
            "\n{} of {} unknowns fixed to 0, {} constrained to {{0, 1/2}}, {} other\n",
            self.intermediate.zero_count(),
            n,
            torsion,
            n - self.intermediate.zero_count() - torsion
        ));
        let names = |s: Status| {
            self.intermediate.unknowns_with(s).iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
        };
        out.push_str(&format!("  zero: {}\n  torsion: {}\n", names(Status::Zero), names(Status::Torsion(2))));
        for step in self.steps.iter().filter(|s| s.relation.word.len() > 1) {
            out.push_str(&format!("\n{}\n", step.relation));
            for m in &step.matrices {
                write_matrix(&mut out, m);
                out.push('\n');
            }
            for c in &step.reduced {
                out.push_str(&format!("  {}\n", c));
            }
        }
        let all_zero = self.classification.is_symmorphic_only();
        out.push_str(&format!(
            "\n{}\n{}\n",
            if all_zero { "all phases ≡ 0 in this gauge" } else { "nonzero phases survive" },
            self.classification
        ));
        out
    }
}
