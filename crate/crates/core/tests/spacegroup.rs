use std::collections::BTreeSet;
use std::time::Instant;

use proptest::prelude::*;

use quasiammann::exactfield::Rational;
use quasiammann::spacegroup::*;
use quasiammann::Error;

fn u(generator: usize, basis: usize) -> Unknown {
    Unknown { generator: generator - 1, basis: basis - 1 }
}

fn rel(word: &[usize], order: u32) -> Relation {
    Relation::new(word.iter().map(|g| g - 1).collect(), order)
}

/// Constraint lists over Z/2 as sets of unknowns.
fn mod2(cs: &[Constraint]) -> Vec<BTreeSet<Unknown>> {
    cs.iter().map(|c| c.terms().into_iter().filter(|t| t.1 % 2 != 0).map(|t| t.0).collect()).collect()
}

/// Row span over GF(2) of sets of unknowns, as a reduced basis.
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

fn set(us: &[Unknown]) -> BTreeSet<Unknown> {
    us.iter().copied().collect()
}

#[test]
fn one_plus_r1() {
    let p = h4();
    let m = relation_matrix(&p, &rel(&[1], 2)).unwrap();
    assert_eq!(m.len(), 1);
    let mut expected = vec![vec![0i64; 8]; 8];
    for (i, v) in [2, 2, 2, 0, 2, 2, 2].iter().enumerate() {
        expected[i + 1][i + 1] = *v;
    }
    expected[0][1] = 1;
    expected[4][5] = 1;
    assert_eq!(m[0], expected);
    let cs = relation_constraints(&p, &rel(&[1], 2)).unwrap();
    let shown: Vec<String> = cs.iter().map(ToString::to_string).collect();
    assert_eq!(
        shown,
        [
            "0 ≡ Φ1(b1)+2Φ1(b2)",
            "0 ≡ 2Φ1(b3)",
            "0 ≡ 2Φ1(b4)",
            "0 ≡ Φ1(b5)+2Φ1(b6)",
            "0 ≡ 2Φ1(b7)",
            "0 ≡ 2Φ1(b8)"
        ]
    );
}

#[test]
fn square_relation_constraints() {
    let p = h4();
    let r2: Vec<String> = relation_constraints(&p, &rel(&[2], 2)).unwrap().iter().map(ToString::to_string).collect();
    assert_eq!(r2[0], "0 ≡ 2Φ2(b1)+Φ2(b2)");
    assert_eq!(r2[1], "0 ≡ Φ2(b2)+2Φ2(b3)");
    let r3: Vec<String> = relation_constraints(&p, &rel(&[3], 2)).unwrap().iter().map(ToString::to_string).collect();
    assert_eq!(r3[2], "0 ≡ 2Φ3(b4)+Φ3(b7)");
    assert_eq!(r3[5], "0 ≡ Φ3(b3)+Φ3(b7)+2Φ3(b8)");
    let r4: Vec<String> = relation_constraints(&p, &rel(&[4], 2)).unwrap().iter().map(ToString::to_string).collect();
    assert_eq!(r4[5], "0 ≡ Φ4(b4)+2Φ4(b7)+Φ4(b8)");
}

#[test]
fn product_relation_matrices_coincide() {
    let p = h4();
    let m = relation_matrix(&p, &rel(&[1, 2], 3)).unwrap();
    assert_eq!(m.len(), 2);
    assert_eq!(m[0], m[1]);
    let nonzero: Vec<usize> = (0..8).filter(|&k| m[0].iter().any(|r| r[k] != 0)).map(|k| k + 1).collect();
    assert_eq!(nonzero, [3, 4, 7, 8]);
    let col3: Vec<i64> = m[0].iter().map(|r| r[2]).collect();
    assert_eq!(col3, [1, 2, 3, 0, 0, 0, 0, 0]);
}

#[test]
fn identity_relation_is_degenerate() {
    let id = vec![vec![1, 0], vec![0, 1]];
    let p = Presentation::new("trivial", 2, vec![id.clone()], vec![Relation::new(vec![0], 1)]).unwrap();
    let m = relation_matrix(&p, &p.relations[0]).unwrap();
    assert_eq!(m[0], id);
    let cs: Vec<String> = relation_constraints(&p, &p.relations[0]).unwrap().iter().map(ToString::to_string).collect();
    assert_eq!(cs, ["0 ≡ Φ1(b1)", "0 ≡ Φ1(b2)"]);
    assert_eq!(classify(&p).unwrap().count, 1);
}

#[test]
fn bad_presentations_are_rejected() {
    let r = vec![vec![0, 1], vec![1, 0]];
    assert!(matches!(
        Presentation::new("bad", 2, vec![r], vec![Relation::new(vec![0], 3)]),
        Err(Error::InvalidPresentation(_))
    ));
    let shear = vec![vec![2, 0], vec![0, 1]];
    assert!(Presentation::new("bad", 2, vec![shear], vec![]).is_err());
    assert!(matches!(group("e8"), Err(Error::Invalid(_))));
    assert!(group("i2:2").is_err());
}

#[test]
fn trivial_group_has_nothing_to_fix() {
    let p = Presentation::new("trivial", 3, vec![], vec![]).unwrap();
    let sys = PhaseSystem::new(&p, &p.relations).unwrap();
    let r = gauge_fix(&sys, &[]).unwrap();
    assert!(r.status.is_empty() && r.choices.is_empty());
    let c = classify(&p).unwrap();
    assert_eq!(c.count, 1);
}

#[test]
fn one_dimensional_reflections() {
    let flip = Presentation::new("flip", 1, vec![vec![vec![-1]]], vec![Relation::new(vec![0], 2)]).unwrap();
    let r = gauge_fix(&PhaseSystem::new(&flip, &flip.relations).unwrap(), &[]).unwrap();
    assert_eq!(r.status, [Status::Zero]);
    assert_eq!(classify(&flip).unwrap().count, 1);

    let fixed = Presentation::new("fixed", 1, vec![vec![vec![1]]], vec![Relation::new(vec![0], 2)]).unwrap();
    let r = gauge_fix(&PhaseSystem::new(&fixed, &fixed.relations).unwrap(), &[]).unwrap();
    assert_eq!(r.status, [Status::Torsion(2)]);
    let c = classify(&fixed).unwrap();
    assert_eq!(c.count, 2);
    assert_eq!(c.representatives, [vec![Rational::new(0.into(), 1.into())], vec![Rational::new(1.into(), 2.into())]]);
}

#[test]
fn h4_gauge_fixing_matches_the_hand_computation() {
    let p = h4();
    let t = trace(&p, &h4_pivots()).unwrap();
    let r = &t.intermediate;
    assert_eq!(r.zero_count(), 16);
    assert_eq!(r.torsion_count(2), 16);
    let zeros = set(&r.unknowns_with(Status::Zero));
    let expected: Vec<Unknown> = [(1, [1, 2, 5, 6]), (2, [1, 2, 5, 6]), (3, [3, 4, 7, 8]), (4, [3, 4, 7, 8])]
        .into_iter()
        .flat_map(|(g, bs)| bs.into_iter().map(move |b| u(g, b)))
        .collect();
    assert_eq!(zeros, set(&expected));
    let choices: Vec<String> = r.choices.iter().map(|c| c.to_string().split("  ").next().unwrap().to_string()).collect();
    for want in [
        "χ(b1) = −Φ1(b2)",
        "χ(b5) = −Φ1(b6)",
        "χ(b2) = −Φ2(b1)",
        "χ(b6) = −Φ2(b5)",
        "χ(b3) = Φ3(b4)−Φ3(b8)",
        "χ(b7) = −Φ3(b4)",
        "χ(b4) = Φ4(b3)−Φ4(b7)",
        "χ(b8) = −Φ4(b3)",
    ] {
        assert!(choices.iter().any(|c| c == want), "missing {}: {:?}", want, choices);
    }
}

/// Reduced constraint lists for the product relations, each entry a set summing to 0 mod 1.
fn h4_product_lists() -> Vec<(Relation, Vec<Vec<Unknown>>)> {
    vec![
        (
            rel(&[1, 2], 3),
            vec![vec![u(1, 3), u(2, 3)], vec![u(1, 4), u(2, 4)], vec![u(1, 7), u(2, 7)], vec![u(1, 8), u(2, 8)]],
        ),
        (
            rel(&[2, 3], 3),
            vec![vec![u(2, 3), u(3, 1)], vec![u(2, 4), u(3, 6)], vec![u(2, 7), u(3, 5)], vec![u(2, 8), u(3, 2), u(3, 6)]],
        ),
        (
            rel(&[3, 4], 5),
            vec![vec![u(3, 1), u(4, 1)], vec![u(3, 2), u(4, 2)], vec![u(3, 5), u(4, 5)], vec![u(3, 6), u(4, 6)]],
        ),
        (rel(&[1, 3], 2), vec![vec![u(1, 3), u(3, 1)], vec![u(1, 7)], vec![u(1, 7), u(3, 5)], vec![u(1, 7), u(1, 3)]]),
        (rel(&[1, 4], 2), vec![vec![u(4, 1)], vec![u(1, 8)], vec![u(4, 5)], vec![u(1, 4)]]),
        (rel(&[2, 4], 2), vec![vec![u(4, 2)], vec![u(2, 8)], vec![u(4, 6)], vec![u(2, 4)]]),
    ]
}

#[test]
fn h4_product_relations_reduce_to_the_listed_constraints() {
    let t = trace(&h4(), &h4_pivots()).unwrap();
    for (relation, expected) in h4_product_lists() {
        let step = t.steps.iter().find(|s| s.relation == relation).unwrap();
        let got = mod2(&step.reduced);
        let want: Vec<BTreeSet<Unknown>> = expected.iter().map(|e| set(e)).collect();
        assert_eq!(span2(&got), span2(&want), "{}", relation);
        assert!(step.reduced.iter().all(|c| c.terms().iter().all(|t| t.1 == 1)));
    }
    let one_four = t.steps.iter().find(|s| s.relation == rel(&[1, 4], 2)).unwrap();
    assert!(mod2(&one_four.reduced).contains(&set(&[u(1, 8)])));
    let one_two = t.steps.iter().find(|s| s.relation == rel(&[1, 2], 3)).unwrap();
    assert_eq!(mod2(&one_two.reduced), h4_product_lists()[0].1.iter().map(|e| set(e)).collect::<Vec<_>>());
}

#[test]
fn h4_is_uniquely_symmorphic() {
    let start = Instant::now();
    let c = classify(&h4()).unwrap();
    assert!(start.elapsed().as_secs_f64() < 1.0);
    assert_eq!(c.count, 1);
    assert!(c.is_symmorphic_only());
    assert_eq!(c.to_string(), "1 space group (symmorphic)");
    let t = trace(&h4(), &h4_pivots()).unwrap();
    let text = t.render();
    assert!(text.contains("16 of 32 unknowns fixed to 0, 16 constrained to {0, 1/2}"));
    assert!(text.contains("0 ≡ Φ1(b1)+2Φ1(b2)"));
    assert!(text.contains("all phases ≡ 0 in this gauge"));
    let full = gauge_fix(&PhaseSystem::new(&h4(), &h4().relations).unwrap(), &h4_pivots()).unwrap();
    assert_eq!(full.zero_count(), 32);
}

#[test]
fn diagram_builder_reproduces_h4() {
    let built = golden_reflection_presentation("H4", 4, &[(0, 1, 3), (1, 2, 3), (2, 3, 5)]).unwrap();
    assert_eq!(built.generators, h4().generators);
    assert_eq!(built.relations, h4().relations);
}

#[test]
fn symmorphic_assignment_solves_everything() {
    for name in ["h4", "h3", "i2:5", "i2:8", "i2:12"] {
        let p = group(name).unwrap();
        let zero = vec![Rational::new(0.into(), 1.into()); p.unknowns()];
        for r in &p.relations {
            for c in relation_constraints(&p, r).unwrap() {
                assert!(c.holds(&zero));
            }
        }
    }
}

#[test]
fn lower_dimensional_cross_checks() {
    assert_eq!(classify(&h3().unwrap()).unwrap().count, 1);
    for n in [3, 5, 6, 7, 9, 10, 12, 15] {
        assert_eq!(classify(&i2(n).unwrap()).unwrap().count, 1, "I2({})", n);
    }
    for n in [4, 8, 16] {
        assert_eq!(classify(&i2(n).unwrap()).unwrap().count, 2, "I2({})", n);
    }
    let pentagon = golden_reflection_presentation("I2(5)", 2, &[(0, 1, 5)]).unwrap();
    assert_eq!(classify(&pentagon).unwrap().count, classify(&i2(5).unwrap()).unwrap().count);
}

#[test]
fn representatives_solve_and_differ() {
    let p = i2(8).unwrap();
    let c = classify(&p).unwrap();
    let sys = PhaseSystem::new(&p, &p.relations).unwrap();
    for r in &c.representatives {
        assert!(sys.constraints.iter().all(|k| k.holds(r)));
    }
    assert_ne!(c.representatives[0], c.representatives[1]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gauge_fixing_order_does_not_change_the_count(
        order in Just((0..32).collect::<Vec<usize>>()).prop_shuffle(),
        name in prop::sample::select(vec!["h4", "i2:8", "h3"]),
    ) {
        let p = group(name).unwrap();
        let n = p.unknowns();
        let pivots: Vec<Unknown> = order.iter().filter(|&&k| k < n).map(|&k| Unknown::from_index(k, p.dim)).collect();
        let sys = PhaseSystem::new(&p, &p.relations).unwrap();
        let reduced = gauge_fix(&sys, &pivots).unwrap();
        prop_assert_eq!(reduced.classify().unwrap().count, classify(&p).unwrap().count);
    }
}
