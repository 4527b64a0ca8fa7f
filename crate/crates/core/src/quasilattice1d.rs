//! The ten self-similar 1D quasilattices of degree two: closed-form
//! generation, phase inflation and refinement, inversion symmetry and the
//! self-similarity oracle.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactfield::{rat, QuadNum, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowId {
    R1,
    R2a,
    R2b,
    R3a,
    R3b,
    R3c,
    R4a,
    R4b,
    R4c,
    R4d,
}

impl RowId {
    pub const ALL: [RowId; 10] =
        [RowId::R1, RowId::R2a, RowId::R2b, RowId::R3a, RowId::R3b, RowId::R3c, RowId::R4a, RowId::R4b, RowId::R4c, RowId::R4d];

    pub fn label(&self) -> &'static str {
        match self {
            RowId::R1 => "1",
            RowId::R2a => "2a",
            RowId::R2b => "2b",
            RowId::R3a => "3a",
            RowId::R3b => "3b",
            RowId::R3c => "3c",
            RowId::R4a => "4a",
            RowId::R4b => "4b",
            RowId::R4c => "4c",
            RowId::R4d => "4d",
        }
    }
}

impl fmt::Display for RowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for RowId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches(['R', 'r']).to_ascii_lowercase();
        RowId::ALL
            .into_iter()
            .find(|r| r.label() == t)
            .ok_or_else(|| Error::Invalid(format!("unknown quasilattice row '{}'", s)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasilatticeClass {
    pub row_id: RowId,
    pub ratio_plus: QuadNum,
    pub ratio_minus: QuadNum,
    pub lambda_plus: QuadNum,
    pub lambda_minus: QuadNum,
    pub wall_to_wall: bool,
}

impl QuasilatticeClass {
    fn new(row_id: RowId, ratio: QuadNum, lambda: QuadNum, wall_to_wall: bool) -> Self {
        QuasilatticeClass {
            row_id,
            ratio_minus: ratio.conjugate(),
            ratio_plus: ratio,
            lambda_minus: lambda.conjugate(),
            lambda_plus: lambda,
            wall_to_wall,
        }
    }

    pub fn d(&self) -> u32 {
        self.ratio_plus.d()
    }

    /// κ1 = 1/(1 − m2⁻/m1⁻), κ2 = 1/(1 − m1⁻/m2⁻).
    pub fn kappas(&self) -> Result<(QuadNum, QuadNum)> {
        let one = QuadNum::one(self.d());
        let r = &self.ratio_minus;
        if r.is_zero() || *r == one {
            return Err(Error::Degenerate(format!("m2-/m1- = {}", r)));
        }
        let k1 = (&one - r).inv()?;
        let k2 = (&one - &r.inv()?).inv()?;
        Ok((k1, k2))
    }

    /// Swaps the roles of the + and − members.
    pub fn conjugate(&self) -> Self {
        QuasilatticeClass {
            row_id: self.row_id,
            ratio_plus: self.ratio_minus.clone(),
            ratio_minus: self.ratio_plus.clone(),
            lambda_plus: self.lambda_minus.clone(),
            lambda_minus: self.lambda_plus.clone(),
            wall_to_wall: self.wall_to_wall,
        }
    }
}

fn literal_classes() -> Vec<QuasilatticeClass> {
    use RowId::*;
    let q = QuadNum::from_ints;
    vec![
        QuasilatticeClass::new(R1, QuadNum::tau(), QuadNum::tau(), false),
        QuasilatticeClass::new(R2a, q(0, 1, 1, 2), q(1, 1, 1, 2), false),
        QuasilatticeClass::new(R2b, q(1, 1, 1, 2), q(1, 1, 1, 2), true),
        QuasilatticeClass::new(R3a, q(1, 1, 2, 3), q(2, 1, 1, 3), false),
        QuasilatticeClass::new(R3b, q(0, 1, 1, 3), q(2, 1, 1, 3), true),
        QuasilatticeClass::new(R3c, q(1, 1, 1, 3), q(2, 1, 1, 3), false),
        QuasilatticeClass::new(R4a, q(-1, 1, 1, 5), q(2, 1, 1, 5), false),
        QuasilatticeClass::new(R4b, q(0, 1, 1, 5), q(2, 1, 1, 5), true),
        QuasilatticeClass::new(R4c, q(1, 1, 1, 5), q(2, 1, 1, 5), false),
        QuasilatticeClass::new(R4d, q(2, 1, 1, 5), q(2, 1, 1, 5), true),
    ]
}

/// The ten rows. Debug builds run the self-similarity oracle on every row
/// the first time this is called.
pub fn builtin_classes() -> Vec<QuasilatticeClass> {
    let classes = literal_classes();
    if cfg!(debug_assertions) {
        static GATE: OnceLock<std::result::Result<(), String>> = OnceLock::new();
        let gate = GATE.get_or_init(|| {
            for c in &classes {
                let report = self_similarity_oracle(c, 160).map_err(|e| format!("{}: {}", c.row_id, e))?;
                if !report.passed() || report.wall_to_wall != c.wall_to_wall {
                    return Err(format!("row {} fails the self-similarity oracle: {:?}", c.row_id, report));
                }
            }
            Ok(())
        });
        if let Err(e) = gate {
            panic!("{}", e);
        }
    }
    classes
}

pub fn builtin_class(row: RowId) -> QuasilatticeClass {
    builtin_classes().into_iter().find(|c| c.row_id == row).unwrap()
}

/// m1⁺ = [(1 − (m1⁻/m2⁻)(m2⁺/m1⁺))a⁺]⁻¹, m2⁺ = [(1 − (m2⁻/m1⁻)(m1⁺/m2⁺))b⁺]⁻¹.
pub fn intervals_from_magnitudes(class: &QuasilatticeClass, a_plus: &QuadNum, b_plus: &QuadNum) -> Result<(QuadNum, QuadNum)> {
    let one = QuadNum::one(class.d());
    let rp = &class.ratio_plus;
    let rm = &class.ratio_minus;
    let m1 = ((&one - &(rp / rm)) * a_plus).inv()?;
    let m2 = ((&one - &(rm / rp)) * b_plus).inv()?;
    Ok((m1, m2))
}

/// b⁺ = −(m1⁻/m2⁻)a⁺.
pub fn b_from_a(ratio_minus: &QuadNum, a_plus: &QuadNum) -> QuadNum {
    -(a_plus / ratio_minus)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IntervalLabel {
    L,
    S,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasilatticeSpec {
    pub class: QuasilatticeClass,
    pub m1_plus: QuadNum,
    pub m2_plus: QuadNum,
    pub m1_minus: QuadNum,
    pub m2_minus: QuadNum,
    pub chi1_plus: QuadNum,
    pub chi1_minus: QuadNum,
    pub chi2_plus: QuadNum,
    pub chi2_minus: QuadNum,
    /// Overall factor applied to every position; 1 except for refined specs.
    pub scale: QuadNum,
}

impl QuasilatticeSpec {
    /// Spec with bi-grid magnitude a⁺ and phases χ1±.
    pub fn new(class: &QuasilatticeClass, a_plus: &QuadNum, chi1_plus: QuadNum, chi1_minus: QuadNum) -> Result<Self> {
        let b_plus = b_from_a(&class.ratio_minus, a_plus);
        let (m1_plus, m2_plus) = intervals_from_magnitudes(class, a_plus, &b_plus)?;
        let chi2_plus = &chi1_plus / &class.ratio_plus;
        let chi2_minus = &chi1_minus / &class.ratio_minus;
        Ok(QuasilatticeSpec {
            m1_minus: m1_plus.conjugate(),
            m2_minus: m2_plus.conjugate(),
            m1_plus,
            m2_plus,
            chi1_plus,
            chi1_minus,
            chi2_plus,
            chi2_minus,
            scale: QuadNum::one(class.d()),
            class: class.clone(),
        })
    }

    /// Spec in functional units (a⁺ = 1).
    pub fn with_phases(class: &QuasilatticeClass, chi1_plus: QuadNum, chi1_minus: QuadNum) -> Result<Self> {
        Self::new(class, &QuadNum::one(class.d()), chi1_plus, chi1_minus)
    }

    pub fn d(&self) -> u32 {
        self.class.d()
    }

    /// L = max(m1⁺, m2⁺).
    pub fn long_length(&self) -> QuadNum {
        (&self.m1_plus * &self.scale).max(&self.m2_plus * &self.scale)
    }

    /// Mean spacing κ1m2⁺ + κ2m1⁺.
    pub fn mean_spacing(&self) -> Result<QuadNum> {
        let (k1, k2) = self.class.kappas()?;
        Ok((&k1 * &self.m2_plus + &k2 * &self.m1_plus) * &self.scale)
    }

    fn singular_floor(&self, kappa: &QuadNum, n: i64, chi_minus: &QuadNum) -> Result<BigInt> {
        let arg = kappa * &(QuadNum::from_int(n, self.d()) - chi_minus);
        if arg.is_integer() {
            return Err(Error::SingularPhase { n });
        }
        Ok(arg.floor())
    }

    fn closed_form(&self, m_a: &QuadNum, m_b: &QuadNum, chi_plus: &QuadNum, fl: BigInt, n: i64) -> QuadNum {
        let d = self.d();
        let nn = QuadNum::from_int(n, d);
        let f = QuadNum::from_rational(Rational::from_integer(fl) + rat(1, 2), d);
        (m_a * &(nn - chi_plus) + (m_b - m_a) * f) * &self.scale
    }

    /// x_n by the first closed form; errors when κ1(n − χ1⁻) is an integer.
    pub fn position(&self, n: i64) -> Result<QuadNum> {
        let (k1, _) = self.class.kappas()?;
        let fl = self.singular_floor(&k1, n, &self.chi1_minus)?;
        Ok(self.closed_form(&self.m1_plus, &self.m2_plus, &self.chi1_plus, fl, n))
    }

    /// x_n by the second closed form.
    pub fn position_alt(&self, n: i64) -> Result<QuadNum> {
        let (_, k2) = self.class.kappas()?;
        let fl = self.singular_floor(&k2, n, &self.chi2_minus)?;
        Ok(self.closed_form(&self.m2_plus, &self.m1_plus, &self.chi2_plus, fl, n))
    }

    /// Positions for n in [n_lo, n_hi], with both closed forms checked equal.
    pub fn generate(&self, n_lo: i64, n_hi: i64) -> Result<Quasilattice1DWindow> {
        if n_hi < n_lo {
            return Err(Error::Invalid(format!("empty window [{}, {}]", n_lo, n_hi)));
        }
        let mut positions = Vec::with_capacity((n_hi - n_lo + 1) as usize);
        for n in n_lo..=n_hi {
            let x = self.position(n)?;
            let y = self.position_alt(n)?;
            if x != y {
                return Err(Error::Computation(format!("closed forms disagree at n = {}: {} vs {}", n, x, y)));
            }
            positions.push(x);
        }
        let long = self.long_length();
        let labels = positions
            .windows(2)
            .map(|w| if &w[1] - &w[0] == long { IntervalLabel::L } else { IntervalLabel::S })
            .collect();
        Ok(Quasilattice1DWindow { n_lo, positions, interval_labels: labels })
    }

    /// χ± → χ±/λ±.
    pub fn inflate_phases(&self) -> Self {
        self.map_phases(&self.class.lambda_plus.inv().unwrap(), &self.class.lambda_minus.inv().unwrap())
    }

    /// χ± → λ±χ± with positions scaled by 1/λ⁺: the next denser level.
    pub fn refine(&self) -> Self {
        let mut out = self.map_phases(&self.class.lambda_plus, &self.class.lambda_minus);
        out.scale = &self.scale / &self.class.lambda_plus;
        out
    }

    fn map_phases(&self, fp: &QuadNum, fm: &QuadNum) -> Self {
        QuasilatticeSpec {
            chi1_plus: &self.chi1_plus * fp,
            chi2_plus: &self.chi2_plus * fp,
            chi1_minus: &self.chi1_minus * fm,
            chi2_minus: &self.chi2_minus * fm,
            ..self.clone()
        }
    }

    /// Integers (p1, p2) with m1±χ1± = ½(p1m1± + p2m2±), if any.
    pub fn inversion_symmetry(&self) -> Option<(i64, i64)> {
        let two = rat(2, 1);
        let target = self.chi1_plus.scale(&two);
        let r = &self.class.ratio_plus;
        let (p1, p2) = if r.b().is_zero() {
            return None;
        } else {
            let p2 = target.b() / r.b();
            let p1 = target.a() - &p2 * r.a();
            (p1, p2)
        };
        if !p1.is_integer() || !p2.is_integer() {
            return None;
        }
        let d = self.d();
        let qp1 = QuadNum::from_rational(p1.clone(), d);
        let qp2 = QuadNum::from_rational(p2.clone(), d);
        if self.chi1_minus.scale(&two) != &qp1 + &(&qp2 * &self.class.ratio_minus) {
            return None;
        }
        Some((p1.to_integer().to_i64()?, p2.to_integer().to_i64()?))
    }

    /// Conjugates every member and swaps the + and − roles.
    pub fn conjugate(&self) -> Self {
        QuasilatticeSpec {
            class: self.class.conjugate(),
            m1_plus: self.m1_minus.clone(),
            m2_plus: self.m2_minus.clone(),
            m1_minus: self.m1_plus.clone(),
            m2_minus: self.m2_plus.clone(),
            chi1_plus: self.chi1_minus.clone(),
            chi1_minus: self.chi1_plus.clone(),
            chi2_plus: self.chi2_minus.clone(),
            chi2_minus: self.chi2_plus.clone(),
            scale: self.scale.conjugate(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quasilattice1DWindow {
    pub n_lo: i64,
    pub positions: Vec<QuadNum>,
    pub interval_labels: Vec<IntervalLabel>,
}

impl Quasilattice1DWindow {
    pub fn n_hi(&self) -> i64 {
        self.n_lo + self.positions.len() as i64 - 1
    }

    pub fn get(&self, n: i64) -> Option<&QuadNum> {
        if n < self.n_lo {
            return None;
        }
        self.positions.get((n - self.n_lo) as usize)
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.positions.windows(2).all(|w| w[0] < w[1])
    }

    pub fn interval_lengths(&self) -> Vec<QuadNum> {
        self.positions.windows(2).map(|w| &w[1] - &w[0]).collect()
    }

    /// Distinct interval lengths, and distinct separations between the starts
    /// of consecutive L intervals and of consecutive S intervals.
    pub fn interval_stats(&self) -> IntervalStats {
        let lengths: HashSet<QuadNum> = self.interval_lengths().into_iter().collect();
        let seps = |want: IntervalLabel| {
            let starts: Vec<&QuadNum> =
                self.interval_labels.iter().zip(&self.positions).filter(|(l, _)| **l == want).map(|(_, x)| x).collect();
            starts.windows(2).map(|w| w[1] - w[0]).collect::<HashSet<QuadNum>>()
        };
        IntervalStats { lengths, l_separations: seps(IntervalLabel::L), s_separations: seps(IntervalLabel::S) }
    }
}

#[derive(Clone, Debug)]
pub struct IntervalStats {
    pub lengths: HashSet<QuadNum>,
    pub l_separations: HashSet<QuadNum>,
    pub s_separations: HashSet<QuadNum>,
}

impl IntervalStats {
    pub fn is_degree_two(&self) -> bool {
        self.lengths.len() == 2 && self.l_separations.len() == 2 && self.s_separations.len() == 2
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleReport {
    pub points: usize,
    pub checked: usize,
    pub degree_two: bool,
    pub ratio_ok: bool,
    pub wall_to_wall: bool,
    pub halved_inclusion: bool,
    pub substitution_constant: bool,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.degree_two && self.ratio_ok && self.halved_inclusion && self.substitution_constant && self.checked > 0
    }
}

/// A generic nonsingular phase in the class's field.
pub fn generic_phase(d: u32) -> (QuadNum, QuadNum) {
    let chi = QuadNum::new(rat(1, 7), rat(1, 11), d).unwrap();
    (chi.clone(), chi.conjugate())
}

fn with_midpoints(xs: &[QuadNum]) -> Vec<QuadNum> {
    let half = rat(1, 2);
    let mut out = Vec::with_capacity(2 * xs.len());
    for w in xs.windows(2) {
        out.push(w[0].clone());
        out.push((&w[0] + &w[1]).scale(&half));
    }
    if let Some(last) = xs.last() {
        out.push(last.clone());
    }
    out
}

/// Inflate-and-match check at a generic phase over about `half_width`·2 points:
/// λ⁺·Q(χ/λ) against Q(χ), plus the same comparison after inserting midpoints
/// into both sets, plus constancy of the fine word inside each coarse interval.
pub fn self_similarity_oracle(class: &QuasilatticeClass, half_width: i64) -> Result<OracleReport> {
    let (cp, cm) = generic_phase(class.d());
    let spec = QuasilatticeSpec::with_phases(class, cp, cm)?;
    oracle_for_spec(&spec, half_width)
}

pub fn oracle_for_spec(spec: &QuasilatticeSpec, half_width: i64) -> Result<OracleReport> {
    let class = &spec.class;
    let fine = spec.generate(-half_width, half_width)?;
    let stats = fine.interval_stats();
    let ratio_ok = {
        let mut ls: Vec<QuadNum> = stats.lengths.iter().cloned().collect();
        ls.sort();
        ls.len() == 2 && {
            let r = &ls[1] / &ls[0];
            r == class.ratio_plus || r == class.ratio_plus.inv()?
        }
    };
    let lam = class.lambda_plus.to_f64();
    let coarse_hw = (half_width as f64 / lam).ceil() as i64 + 2;
    let coarse_spec = spec.inflate_phases();
    let coarse: Vec<QuadNum> =
        coarse_spec.generate(-coarse_hw, coarse_hw)?.positions.iter().map(|x| x * &class.lambda_plus).collect();
    let lo = fine.positions.first().unwrap().clone();
    let hi = fine.positions.last().unwrap().clone();
    let inside = |x: &QuadNum| *x > lo && *x < hi;

    let fine_set: HashSet<&QuadNum> = fine.positions.iter().collect();
    let coarse_in: Vec<&QuadNum> = coarse.iter().filter(|x| inside(x)).collect();
    let wall_to_wall = coarse_in.iter().all(|x| fine_set.contains(x));

    let fine_h = with_midpoints(&fine.positions);
    let coarse_h = with_midpoints(&coarse);
    let fine_h_set: HashSet<&QuadNum> = fine_h.iter().collect();
    let coarse_h_in: Vec<&QuadNum> = coarse_h.iter().filter(|x| inside(x)).collect();
    let halved_inclusion = coarse_h_in.iter().all(|x| fine_h_set.contains(x));

    let mut words: HashMap<QuadNum, Vec<QuadNum>> = HashMap::new();
    let mut substitution_constant = true;
    if halved_inclusion {
        let index: HashMap<&QuadNum, usize> = fine_h.iter().enumerate().map(|(i, x)| (x, i)).collect();
        for w in coarse_in.windows(2) {
            let (i, j) = (index[w[0]], index[w[1]]);
            let word: Vec<QuadNum> = fine_h[i..=j].windows(2).map(|p| &p[1] - &p[0]).collect();
            let len = w[1] - w[0];
            match words.get(&len) {
                Some(prev) if *prev != word => substitution_constant = false,
                Some(_) => {}
                None => {
                    words.insert(len, word);
                }
            }
        }
        substitution_constant &= words.len() == 2;
    }
    Ok(OracleReport {
        points: fine.positions.len(),
        checked: coarse_h_in.len(),
        degree_two: stats.is_degree_two(),
        ratio_ok,
        wall_to_wall,
        halved_inclusion,
        substitution_constant,
    })
}

/// Whether λ⁺·Q(χ/λ) ⊆ Q(χ) at a generic phase.
pub fn check_wall_to_wall_1d(class: &QuasilatticeClass) -> Result<bool> {
    Ok(self_similarity_oracle(class, 120)?.wall_to_wall)
}
