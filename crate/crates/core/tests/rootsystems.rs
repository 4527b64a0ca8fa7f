use num_traits::Zero;
use proptest::prelude::*;

use quasiammann::exactfield::{rat, rint, QuadNum, Rational};
use quasiammann::linalg::{self, dot, Matrix};
use quasiammann::rootsystems::*;
use quasiammann::rootsystems::SystemName::*;

fn rmat(rows: &[&[i64]]) -> Matrix<Rational> {
    rows.iter().map(|r| r.iter().map(|&x| rint(x)).collect()).collect()
}

#[test]
fn root_counts_match_table() {
    for name in [A(2), A(4), B(3), B(4), C(3), C(4), D(4), D(6), G2, F4, E6, E7, E8, H3, H4, I2(5), I2(8)] {
        let rs = build_root_system(name).unwrap();
        assert_eq!(rs.num_roots(), name.table_root_count(), "{}", name);
    }
}

#[test]
fn coxeter_numbers_match_table() {
    for name in [A(1), A(4), A(6), B(2), B(4), B(6), C(4), C(6), D(4), D(6), G2, F4, E6, E7, E8] {
        let rs = build_root_system(name).unwrap();
        assert_eq!(coxeter_number(&rs).unwrap(), name.table_coxeter_number().unwrap(), "{}", name);
    }
}

#[test]
fn e8_simple_roots_form_e8_diagram() {
    let rs = build_root_system(E8).unwrap();
    let f = rs.rational_fundamental().unwrap();
    let mut degree = [0usize; 8];
    for i in 0..8 {
        assert_eq!(dot(&f[i], &f[i]), rint(2));
        for j in i + 1..8 {
            let p = dot(&f[i], &f[j]);
            assert!(p == rint(0) || p == rint(-1));
            if p == rint(-1) {
                degree[i] += 1;
                degree[j] += 1;
            }
        }
    }
    let mut d = degree.to_vec();
    d.sort();
    assert_eq!(d, vec![1, 1, 1, 2, 2, 2, 2, 3]);
}

#[test]
fn coxeter_elements_match_known_matrices() {
    let a4 = coxeter_element(&build_root_system(A(4)).unwrap()).unwrap();
    let mut expect = vec![vec![rint(0); 5]; 5];
    expect[0][4] = rint(1);
    for i in 1..5 {
        expect[i][i - 1] = rint(1);
    }
    assert_eq!(a4, expect);

    let b4 = coxeter_element(&build_root_system(B(4)).unwrap()).unwrap();
    assert_eq!(b4, rmat(&[&[0, 0, 0, -1], &[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0]]));

    let f4 = coxeter_element(&build_root_system(F4).unwrap()).unwrap();
    let h = rat(1, 2);
    let sgn = [[1, 1, -1, 1], [1, -1, -1, -1], [-1, 1, -1, -1], [-1, -1, -1, 1]];
    let expect: Matrix<Rational> = sgn.iter().map(|r| r.iter().map(|&s| h.clone() * rint(s)).collect()).collect();
    assert_eq!(f4, expect);
}

#[test]
fn pair_enumeration_up_to_twenty() {
    let pairs = enumerate_coxeter_pairs(20);
    let find = |n| pairs.iter().find(|p| p.theta_par == n).unwrap().partner.clone();
    assert_eq!(find(I2(5)).unwrap().theta, A(4));
    assert_eq!(find(I2(8)).unwrap().theta, B(4));
    assert_eq!(find(I2(12)).unwrap().theta, F4);
    assert_eq!(find(I2(7)).unwrap().theta, A(6));
    assert_eq!(find(I2(9)), None);
    assert_eq!(find(H3).unwrap().theta, D(6));
    assert_eq!(find(H4).unwrap().theta, E8);
    let quad: Vec<_> = pairs.iter().filter_map(|p| p.partner.clone()).filter(|p| p.degree == 2).collect();
    assert_eq!(quad.len(), 5);
}

#[test]
fn i2_nine_has_no_rank_six_partner() {
    for name in [A(6), B(6), C(6), D(6), E6] {
        let rs = build_root_system(name).unwrap();
        assert_ne!(coxeter_number(&rs).unwrap(), 9);
    }
}

#[test]
fn two_dimensional_projections_are_complementary() {
    for n in [5, 8, 12] {
        let proj = coxeter_projection(&quadratic_pair(I2(n)).unwrap()).unwrap();
        assert_eq!(proj.par_dim(), 2);
        assert!(proj.check_complementary());
        let pp = linalg::mat_mul(&proj.p_plus, &proj.p_plus);
        assert_eq!(pp, proj.p_plus);
    }
}

#[test]
fn ring_structure_a4() {
    let proj = coxeter_projection(&quadratic_pair(I2(5)).unwrap()).unwrap();
    let rings = proj.ring_structure();
    assert_eq!(rings.iter().map(|r| r.1).collect::<Vec<_>>(), vec![10, 10]);
    let tau2 = QuadNum::tau().pow(2);
    assert_eq!(&rings[1].0 / &rings[0].0, tau2);
    assert_eq!(proj.mirror_multiplets(), vec![2; 5]);
}

#[test]
fn ring_structure_b4() {
    let proj = coxeter_projection(&quadratic_pair(I2(8)).unwrap()).unwrap();
    let rings = proj.ring_structure();
    assert_eq!(rings.iter().map(|r| r.1).collect::<Vec<_>>(), vec![8, 8, 8, 8]);
    let ratio = &rings[2].0 / &rings[0].0;
    assert_eq!(ratio, QuadNum::from_ints(2, 1, 1, 2));
    assert_eq!(&rings[3].0 / &rings[1].0, ratio);
    assert!(!is_unit(&ratio));
    assert_eq!(rings[1].0, QuadNum::from_ints(1, 0, 2, 2));
    let mut m = proj.mirror_multiplets();
    m.sort();
    assert_eq!(m, vec![2; 8]);
}

#[test]
fn ring_structure_f4() {
    let proj = coxeter_projection(&quadratic_pair(I2(12)).unwrap()).unwrap();
    let rings = proj.ring_structure();
    assert_eq!(rings.iter().map(|r| r.1).collect::<Vec<_>>(), vec![12, 12, 12, 12]);
    let ratio = &rings[2].0 / &rings[0].0;
    assert_eq!(ratio, QuadNum::from_ints(2, 1, 1, 3));
    assert_eq!(&rings[3].0 / &rings[1].0, ratio);
    assert!(is_unit(&ratio));
}

#[test]
fn three_and_four_dimensional_projections() {
    for (name, dim) in [(H3, 3), (H4, 4)] {
        let proj = coxeter_projection(&quadratic_pair(name).unwrap()).unwrap();
        assert_eq!(proj.par_dim(), dim);
        assert!(proj.check_complementary());
        let rings = proj.ring_structure();
        assert_eq!(rings.len(), 2);
        assert_eq!(&rings[1].0 / &rings[0].0, QuadNum::tau().pow(2));
    }
}

#[test]
fn unsupported_inputs_are_rejected() {
    assert!(build_root_system(A(0)).is_err());
    assert!(quadratic_pair(I2(7)).is_err());
    assert!("X4".parse::<SystemName>().is_err());
}

proptest! {
    #[test]
    fn lift_inverts_projection(coeffs in prop::collection::vec(-20i64..20, 4)) {
        let proj = coxeter_projection(&quadratic_pair(I2(5)).unwrap()).unwrap();
        let mut x = vec![Rational::zero(); proj.ambient_dim()];
        for (c, f) in coeffs.iter().zip(&proj.fundamental) {
            x = linalg::add_vec(&x, &linalg::scale_vec(&rint(*c), f));
        }
        let (plus, minus) = proj.project(&x);
        prop_assert_eq!(proj.lift(&plus).unwrap(), x.clone());
        let sum = linalg::add_vec(&plus, &minus);
        prop_assert_eq!(sum, proj.to_k(&x));
        let phi = proj.coefficients(&x).unwrap();
        prop_assert_eq!(phi, coeffs.iter().map(|&c| rint(c)).collect::<Vec<_>>());
    }

    #[test]
    fn reflections_permute_roots(i in 0usize..48, j in 0usize..48) {
        let rs = build_root_system(F4).unwrap();
        let roots = rs.rational_roots().unwrap();
        let r = reflect(&roots[i], &roots[j]);
        prop_assert!(roots.contains(&r));
    }
}
