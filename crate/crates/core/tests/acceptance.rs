//! Acceptance run: one PASS/FAIL line per criterion.

use std::collections::{BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use quasiammann::ammann::*;
use quasiammann::dual::*;
use quasiammann::exactfield::{rat, QuadNum};
use quasiammann::io::{fixture_document, TilingDoc};
use quasiammann::linalg::dot;
use quasiammann::quasilattice1d::*;
use quasiammann::rootsystems::SystemName::*;
use quasiammann::rootsystems::*;
use quasiammann::spacegroup::*;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(start: Instant, limit: f64, what: &str) -> Result<f64, String> {
    let t = start.elapsed().as_secs_f64();
    ensure!(t < limit, "{} took {:.2} s, limit {} s", what, t, limit);
    Ok(t)
}

fn pairs_table() -> Outcome {
    let start = Instant::now();
    let entries = enumerate_coxeter_pairs(30);
    let t = within(start, 1.0, "pair enumeration")?;
    let mut expected: Vec<(SystemName, Option<(SystemName, usize)>)> = Vec::new();
    for n in (5..=30).filter(|&n| n != 6) {
        let prime = (2..n).all(|k| n % k != 0);
        let partner = if prime {
            Some((A(n - 1), (n - 1) / 2))
        } else if n.is_power_of_two() {
            Some((B(n / 2), n / 4))
        } else if n == 12 {
            Some((F4, 2))
        } else if n == 30 {
            Some((E8, 4))
        } else {
            None
        };
        expected.push((I2(n), partner));
    }
    expected.push((H3, Some((D(6), 2))));
    expected.push((H4, Some((E8, 2))));
    let got: Vec<(SystemName, Option<(SystemName, usize)>)> =
        entries.iter().map(|e| (e.theta_par, e.partner.as_ref().map(|p| (p.theta, p.degree)))).collect();
    ensure!(got == expected, "table differs: {:?}", got);
    let with = got.iter().filter(|e| e.1.is_some()).count();
    Ok(format!("{} entries, {} with partners, {:.3} s", got.len(), with, t))
}

fn coxeter_numbers() -> Outcome {
    let start = Instant::now();
    let mut systems: Vec<SystemName> = (1..=8).map(A).collect();
    systems.extend((2..=8).map(B));
    systems.extend((3..=8).map(C));
    systems.extend((4..=8).map(D));
    systems.extend([G2, F4, E6, E7, E8]);
    for &name in &systems {
        let rs = build_root_system(name).map_err(|e| format!("{}: {}", name, e))?;
        let d = rs.rank;
        let (roots, h) = match name {
            A(n) => (n * (n + 1), n + 1),
            B(n) | C(n) => (2 * n * n, 2 * n),
            D(n) => (2 * n * (n - 1), 2 * (n - 1)),
            G2 => (12, 6),
            F4 => (48, 12),
            E6 => (72, 12),
            E7 => (126, 18),
            _ => (240, 30),
        };
        ensure!(rs.num_roots() == roots, "{}: {} roots, table {}", name, rs.num_roots(), roots);
        ensure!(roots == h * d, "{}: #roots != h·d", name);
        let c = coxeter_element(&rs).map_err(|e| e.to_string())?;
        ensure!(matrix_order(&c, h) == Some(h), "{}: Coxeter element order is not {}", name, h);
    }
    let t = within(start, 5.0, "Coxeter numbers")?;
    Ok(format!("{} systems, {:.2} s", systems.len(), t))
}

/// Each ring is closed under reflection in its own vectors.
fn ring_closed(ring: &[Vec<QuadNum>]) -> bool {
    let set: HashSet<&Vec<QuadNum>> = ring.iter().collect();
    ring.iter().all(|r| ring.iter().all(|v| set.contains(&reflect(v, r))))
}

fn rings_of(proj: &Projection) -> Vec<Vec<Vec<QuadNum>>> {
    let structure = proj.ring_structure();
    structure
        .iter()
        .map(|(r2, _)| proj.projected_roots().into_iter().filter(|v| dot(v, v) == *r2).collect())
        .collect()
}

fn projections() -> Outcome {
    let tau2 = QuadNum::tau().pow(2);
    let proj = |n: SystemName| coxeter_projection(&quadratic_pair(n).map_err(|e| e.to_string())?).map_err(|e| e.to_string());

    let a4 = proj(I2(5))?;
    let counts = |p: &Projection| p.ring_structure().iter().map(|r| r.1).collect::<Vec<_>>();
    ensure!(counts(&a4) == [10, 10], "A4 rings {:?}", counts(&a4));

    let b4 = proj(I2(8))?;
    let r = b4.ring_structure();
    ensure!(counts(&b4) == [8, 8, 8, 8], "B4 rings {:?}", counts(&b4));
    ensure!(&r[2].0 / &r[0].0 == &r[3].0 / &r[1].0, "B4 rings do not pair up");
    let b4_rings = rings_of(&b4);
    ensure!(ring_closed(&[b4_rings[0].clone(), b4_rings[2].clone()].concat()), "B4 inner pair is not an orbit pair");
    ensure!(ring_closed(&[b4_rings[1].clone(), b4_rings[3].clone()].concat()), "B4 outer pair is not an orbit pair");

    let f4 = proj(I2(12))?;
    ensure!(counts(&f4) == [12, 12, 12, 12], "F4 rings {:?}", counts(&f4));
    ensure!(f4.projected_roots().len() == 48, "F4 root count");

    for (name, n, dim) in [(H3, 30, 3), (H4, 120, 4)] {
        let p = proj(name)?;
        ensure!(p.par_dim() == dim, "{} parallel dimension", name);
        ensure!(counts(&p) == [n, n], "{} rings {:?}", name, counts(&p));
        let rs = p.ring_structure();
        ensure!(&rs[1].0 / &rs[0].0 == tau2, "{} squared ring ratio is not τ²", name);
        for ring in rings_of(&p) {
            ensure!(ring_closed(&ring), "{} ring is not a root system", name);
        }
    }
    Ok("A4 10+10, B4 (8+8)+(8+8), F4 4×12, D6 2×30 ratio τ, E8 2×120 ratio τ".into())
}

fn one_dimensional() -> Outcome {
    let start = Instant::now();
    let mut min_points = usize::MAX;
    for c in builtin_classes() {
        let rep = self_similarity_oracle(&c, 260).map_err(|e| format!("{}: {}", c.row_id, e))?;
        ensure!(rep.points >= 500, "row {}: only {} points", c.row_id, rep.points);
        ensure!(rep.passed() && rep.degree_two, "row {}: {:?}", c.row_id, rep);
        min_points = min_points.min(rep.points);
    }
    let t = within(start, 10.0, "1D oracle")?;
    Ok(format!("10 rows, ≥ {} points each, {:.2} s", min_points, t))
}

fn ammann_self_similarity() -> Outcome {
    let mut checked = 0;
    for (sym, row, name) in minimal_2d_cases() {
        let proj = projection_for(sym).map_err(|e| e.to_string())?;
        for seed in 0..5 {
            let q0 = random_q0(&proj, seed);
            let spec = AmmannSpec::with_projection(sym, proj.clone(), row, Some(&q0)).map_err(|e| e.to_string())?;
            let p = build_pattern(&spec).map_err(|e| e.to_string())?;
            let scaled = build_pattern(&spec.with_origin(spec.q0.inflate(&p.class))).map_err(|e| e.to_string())?;
            let inflated: Vec<_> = p.per_direction.iter().map(|s| s.inflate_phases()).collect();
            ensure!(scaled.per_direction == inflated, "{} seed {}: phases differ", name, seed);
            checked += 1;
        }
    }
    Ok(format!("{} origins, all χ equal", checked))
}

fn ten_fold_prototiles() -> Outcome {
    let start = Instant::now();
    let probe = Window::new(rat(20, 1));
    let (p, _) = generic_pattern(Symmetry::Ten, RowId::R1, 0, &probe).map_err(|e| e.to_string())?;
    let w = window_for_edges(&p, 15).map_err(|e| e.to_string())?;
    let r = prototiles(&p, &w, &Options::default()).map_err(|e| e.to_string())?;
    let edges = QuadNum::from_rational(w.radius.clone(), 5).to_f64() / r.tiling.edge_length();
    ensure!(edges >= 15.0 - 1e-9, "window is {:.2} edge lengths", edges);
    let angles: BTreeSet<Vec<usize>> = r
        .shapes
        .iter()
        .map(|s| {
            let mut a = shape_angles(s, r.tiling.star_size());
            a.sort();
            a
        })
        .collect();
    let want: BTreeSet<Vec<usize>> = [vec![1, 1, 4, 4], vec![2, 2, 3, 3]].into_iter().collect();
    ensure!(r.shape_count() == 2, "{} shapes", r.shape_count());
    ensure!(angles == want, "angles {:?} in units of 36°", angles);
    ensure!(r.bijection(), "decoration and inflation partitions differ");
    let t = within(start, 60.0, "10-fold prototiles")?;
    Ok(format!(
        "thin {{36°,144°}} and fat {{72°,108°}}, {} faces, {} classes, radius {:.1} edges, {:.1} s",
        r.tiling.faces.len(),
        r.classes.len(),
        edges,
        t
    ))
}

fn wall_to_wall() -> Outcome {
    let w = Window::new(rat(6, 1));
    let mut notes = Vec::new();
    for (sym, row, name) in minimal_2d_cases() {
        let (p, _) = generic_pattern(sym, row, 8, &w).map_err(|e| e.to_string())?;
        let r = check_wall_to_wall(&p, &w).map_err(|e| e.to_string())?;
        let expect = matches!(row, RowId::R2b | RowId::R3b);
        ensure!(r.wall_to_wall == expect, "{}: wall-to-wall {}", name, r.wall_to_wall);
        if !expect {
            let h = halve_pattern(&p).check_wall_to_wall(&w).map_err(|e| e.to_string())?;
            ensure!(h.wall_to_wall, "{}: halved pattern still fails", name);
            notes.push(name.to_string());
        }
    }
    for row in [RowId::R4a, RowId::R4b, RowId::R4c, RowId::R4d] {
        let rep = self_similarity_oracle(&builtin_class(row), 200).map_err(|e| e.to_string())?;
        let expect = matches!(row, RowId::R4b | RowId::R4d);
        ensure!(rep.wall_to_wall == expect, "1D row {}: wall-to-wall {}", row, rep.wall_to_wall);
        if !expect {
            ensure!(rep.halved_inclusion, "1D row {}: halved pattern still fails", row);
            notes.push(row.to_string());
        }
    }
    Ok(format!("true for 2b, 3b, 4b, 4d; halving repairs {}", notes.join(", ")))
}

fn singular_census() -> Outcome {
    let w = Window::new(rat(8, 1));
    let mut singular = Vec::new();
    for (sym, row, name) in minimal_2d_cases() {
        let expect = matches!(row, RowId::R2b | RowId::R3b);
        for seed in 0..5 {
            let (p, _) = generic_pattern(sym, row, 100 * seed, &w).map_err(|e| e.to_string())?;
            let pts = p.detect_singular(&w).map_err(|e| e.to_string())?;
            ensure!(!pts.is_empty() == expect, "{} seed {}: {} concurrencies", name, seed, pts.len());
            ensure!(pts.iter().all(|q| q.lines.len() >= 3), "{}: concurrency with fewer than 3 lines", name);
        }
        if expect {
            singular.push(name);
        }
    }
    Ok(format!("singular: {} (2 of 6)", singular.join(", ")))
}

fn inversion_symmetry() -> Outcome {
    let mut done = Vec::new();
    for (sym, row, name) in minimal_2d_cases().into_iter().filter(|c| c.0 != Symmetry::Ten) {
        let probe = Window::new(rat(14, 1));
        let (p, _) = generic_pattern(sym, row, 0, &probe).map_err(|e| e.to_string())?;
        let w = window_for_edges(&p, 6).map_err(|e| e.to_string())?;
        let s = inversion_symmetric_origin(&p, &w).map_err(|e| format!("{}: {}", name, e))?;
        ensure!(s.per_direction.iter().all(|d| d.inversion_symmetry().is_some()), "{}: phases not symmetric", name);
        let t = dualize(&s, &w).map_err(|e| e.to_string())?;
        ensure!(t.is_inversion_symmetric(), "{}: vertex set not closed under negation", name);
        let broken = perturb_phase(&s, 0, &rat(1, 3)).map_err(|e| e.to_string())?;
        ensure!(!dualize(&broken, &w).map_err(|e| e.to_string())?.is_inversion_symmetric(), "{}: perturbed tiling still symmetric", name);
        done.push(name);
    }
    let (p, _) = generic_pattern(Symmetry::Ten, RowId::R1, 0, &Window::new(rat(14, 1))).map_err(|e| e.to_string())?;
    ensure!(
        inversion_symmetric_origin(&p, &Window::new(rat(3, 1))).is_err(),
        "10-fold: expected every symmetric origin to be singular"
    );
    Ok(format!("symmetric and broken by 1/3 for {}; 10-fold symmetric origins are all singular", done.join(", ")))
}

fn u(generator: usize, basis: usize) -> Unknown {
    Unknown { generator: generator - 1, basis: basis - 1 }
}

fn rel(word: &[usize], order: u32) -> Relation {
    Relation::new(word.iter().map(|g| g - 1).collect(), order)
}

fn span2(rows: &[BTreeSet<Unknown>]) -> BTreeSet<BTreeSet<Unknown>> {
    let mut basis: Vec<BTreeSet<Unknown>> = Vec::new();
    for r in rows {
        let mut r = r.clone();
        for b in &basis {
            let lead = *b.iter().next().unwrap();
            if r.contains(&lead) {
                r = r.symmetric_difference(b).cloned().collect();
            }
        }
        if let Some(&lead) = r.iter().next() {
            for b in basis.iter_mut() {
                if b.contains(&lead) {
                    *b = b.symmetric_difference(&r).cloned().collect();
                }
            }
            basis.push(r);
        }
    }
    basis.into_iter().collect()
}

fn h4_space_group() -> Outcome {
    let start = Instant::now();
    let p = h4();
    let c = classify(&p).map_err(|e| e.to_string())?;
    let t = trace(&p, &h4_pivots()).map_err(|e| e.to_string())?;
    let elapsed = within(start, 1.0, "H4 classification and trace")?;
    ensure!(c.count == 1 && c.is_symmorphic_only(), "count {}", c.count);

    let r1: Vec<String> = t.steps[0].constraints.iter().map(ToString::to_string).collect();
    let want_r1 = ["0 ≡ Φ1(b1)+2Φ1(b2)", "0 ≡ 2Φ1(b3)", "0 ≡ 2Φ1(b4)", "0 ≡ Φ1(b5)+2Φ1(b6)", "0 ≡ 2Φ1(b7)", "0 ≡ 2Φ1(b8)"];
    ensure!(r1 == want_r1, "R1² list {:?}", r1);

    let r = &t.intermediate;
    ensure!(r.zero_count() == 16 && r.torsion_count(2) == 16, "intermediate state {}/{}", r.zero_count(), r.torsion_count(2));
    let zeros: BTreeSet<Unknown> = r.unknowns_with(quasiammann::spacegroup::Status::Zero).into_iter().collect();
    let want_zeros: BTreeSet<Unknown> = [(1, [1, 2, 5, 6]), (2, [1, 2, 5, 6]), (3, [3, 4, 7, 8]), (4, [3, 4, 7, 8])]
        .into_iter()
        .flat_map(|(g, bs)| bs.into_iter().map(move |b| u(g, b)))
        .collect();
    ensure!(zeros == want_zeros, "fixed unknowns differ");

    let lists: Vec<(Relation, Vec<Vec<Unknown>>)> = vec![
        (rel(&[1, 2], 3), vec![vec![u(1, 3), u(2, 3)], vec![u(1, 4), u(2, 4)], vec![u(1, 7), u(2, 7)], vec![u(1, 8), u(2, 8)]]),
        (rel(&[2, 3], 3), vec![vec![u(2, 3), u(3, 1)], vec![u(2, 4), u(3, 6)], vec![u(2, 7), u(3, 5)], vec![u(2, 8), u(3, 2), u(3, 6)]]),
        (rel(&[3, 4], 5), vec![vec![u(3, 1), u(4, 1)], vec![u(3, 2), u(4, 2)], vec![u(3, 5), u(4, 5)], vec![u(3, 6), u(4, 6)]]),
        (rel(&[1, 3], 2), vec![vec![u(1, 3), u(3, 1)], vec![u(1, 7)], vec![u(1, 7), u(3, 5)], vec![u(1, 7), u(1, 3)]]),
        (rel(&[1, 4], 2), vec![vec![u(4, 1)], vec![u(1, 8)], vec![u(4, 5)], vec![u(1, 4)]]),
        (rel(&[2, 4], 2), vec![vec![u(4, 2)], vec![u(2, 8)], vec![u(4, 6)], vec![u(2, 4)]]),
    ];
    for (relation, expected) in &lists {
        let step = t.steps.iter().find(|s| s.relation == *relation).ok_or(format!("no step for {}", relation))?;
        let got: Vec<BTreeSet<Unknown>> = step.reduced.iter().map(|c| c.terms().into_iter().filter(|x| x.1 % 2 != 0).map(|x| x.0).collect()).collect();
        let want: Vec<BTreeSet<Unknown>> = expected.iter().map(|e| e.iter().copied().collect()).collect();
        ensure!(span2(&got) == span2(&want), "{}: reduced list differs", relation);
    }
    let text = t.render();
    for needle in ["0 ≡ Φ1(b1)+2Φ1(b2)", "16 of 32 unknowns fixed to 0, 16 constrained to {0, 1/2}", "all phases ≡ 0 in this gauge"] {
        ensure!(text.contains(needle), "trace lacks '{}'", needle);
    }
    Ok(format!("{}; 6 product-relation lists match; {:.3} s", c, elapsed))
}

fn golden_fixtures() -> Outcome {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut bytes = 0;
    for (sym, row, name) in minimal_2d_cases() {
        let frozen = std::fs::read_to_string(dir.join(format!("tiling-{}.json", name))).map_err(|e| format!("{}: {}", name, e))?;
        let a = fixture_document(sym, row).map_err(|e| e.to_string())?.to_json();
        let b = fixture_document(sym, row).map_err(|e| e.to_string())?.to_json();
        ensure!(a == b, "{}: two runs differ", name);
        ensure!(a == frozen, "{}: output differs from the frozen fixture", name);
        let doc = TilingDoc::from_json(&frozen).map_err(|e| e.to_string())?;
        ensure!(TilingDoc::from_json(&doc.to_json()).map_err(|e| e.to_string())? == doc, "{}: round trip", name);
        bytes += frozen.len();
    }
    Ok(format!("6 fixtures, {} bytes, byte-identical", bytes))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("Coxeter-pair table up to n = 30", pairs_table),
        ("Coxeter numbers up to rank 8", coxeter_numbers),
        ("projected root rings", projections),
        ("1D self-similarity for all rows", one_dimensional),
        ("Ammann self-similarity, six cases × 5 origins", ammann_self_similarity),
        ("10-fold prototiles and bijection", ten_fold_prototiles),
        ("wall-to-wall rows and halving", wall_to_wall),
        ("singularity census", singular_census),
        ("inversion symmetry", inversion_symmetry),
        ("H4 space group", h4_space_group),
        ("golden tiling fixtures", golden_fixtures),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {}: {} [{:.2} s]", i + 1, name, detail, start.elapsed().as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {}: {} [{:.2} s]", i + 1, name, why, start.elapsed().as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{} criteria failed", failed);
        std::process::exit(1);
    }
    println!("all 11 criteria passed");
}
