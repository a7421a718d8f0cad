use geomech::catalog::*;
use geomech::fields::sample_box;
use geomech::flows::{trace, Integrator};
use geomech::poisson::{bracket_at, jacobi_residual};
use geomech::{Error, FdConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg() -> FdConfig {
    FdConfig::default()
}

#[test]
fn equal_moments_freeze_the_top() {
    let sys = get("euler-top", &[("lambda1".into(), 1.0), ("lambda2".into(), 1.0), ("lambda3".into(), 1.0)]).unwrap();
    let x = sys.vector_field(&cfg()).unwrap();
    for p in sample_box(3, 20, 2.0, 1) {
        assert!(x.eval(&p).iter().all(|v| *v == 0.0));
    }
}

#[test]
fn kowalewski_matrix_entries() {
    let j = get_default("kowalewski").unwrap().structure.matrix(&[0.0, 0.0, 1.0, 1.0, 0.0, 0.0]).unwrap();
    assert_eq!(j[(0, 1)], -1.0);
    assert_eq!(j[(1, 0)], 1.0);
    assert_eq!(j[(1, 5)], -1.0);
    assert_eq!(j[(2, 4)], 1.0);
    assert_eq!(j[(5, 1)], 1.0);
    for r in 3..6 {
        for c in 3..6 {
            assert_eq!(j[(r, c)], 0.0);
        }
    }
}

#[test]
fn printed_blocks_at_a_generic_point() {
    let hat = |a: [f64; 3]| [[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]];
    let x = [0.3, -1.2, 0.7, 0.5, 0.9, -0.4];
    let (a, b) = (hat([x[0], x[1], x[2]]), hat([x[3], x[4], x[5]]));
    let so4 = so4_structure().unwrap().matrix(&x).unwrap();
    let kow = kowalewski_structure().unwrap().matrix(&x).unwrap();
    let cle = clebsch_structure().unwrap().matrix(&x).unwrap();
    for r in 0..3 {
        for c in 0..3 {
            assert_eq!((so4[(r, c)], so4[(r, c + 3)], so4[(r + 3, c)], so4[(r + 3, c + 3)]), (a[r][c], b[r][c], b[r][c], a[r][c]));
            assert_eq!((kow[(r, c)], kow[(r, c + 3)], kow[(r + 3, c)], kow[(r + 3, c + 3)]), (a[r][c], b[r][c], b[r][c], 0.0));
            assert_eq!((cle[(r, c)], cle[(r, c + 3)], cle[(r + 3, c)], cle[(r + 3, c + 3)]), (0.0, a[r][c], a[r][c], b[r][c]));
        }
    }
}

#[test]
fn yang_mills_field_at_unit_position() {
    let x = get_default("yang-mills").unwrap().vector_field(&cfg()).unwrap();
    assert_eq!(x.eval(&[1.0, 0.0, 0.0, 0.0]), vec![0.0, 0.0, -1.0, 0.0]);
}

#[test]
fn henon_heiles_velocity_is_momentum() {
    let x = get_default("henon-heiles").unwrap().vector_field(&cfg()).unwrap();
    let v = x.eval(&[0.3, -0.2, 0.7, 0.1]);
    assert_eq!((v[0], v[1]), (0.7, 0.1));
}

#[test]
fn every_structure_satisfies_jacobi() {
    for name in NAMES {
        let s = get_default(name).unwrap().structure;
        for p in sample_box(s.dim(), 100, 2.0, 2) {
            assert!(jacobi_residual(&s, &p, &cfg()).unwrap() <= 1e-10, "{name}");
        }
    }
}

#[test]
fn declared_quantities_are_conserved() {
    for name in NAMES {
        let sys = get_default(name).unwrap();
        let x = sys.vector_field(&cfg()).unwrap();
        let fields: Vec<_> = sys.conserved().into_iter().map(|n| n.field).collect();
        for x0 in reference_initial_conditions(name, &[]).unwrap() {
            let tr = trace(&x, &x0, 10.0, &Integrator::rk4(1e-3).unwrap(), &fields).unwrap();
            assert!(tr.max_drift() <= 1e-7, "{name}: {}", tr.max_drift());
        }
    }
}

#[test]
fn kowalewski_involution_and_casimirs() {
    let sys = kowalewski().unwrap();
    for p in sample_box(6, 50, 2.0, 3) {
        let b = bracket_at(&sys.structure, &sys.integrals[0].field, &sys.integrals[1].field, &p, &cfg()).unwrap();
        assert!(b.abs() <= 1e-6);
        let j = sys.structure.matrix(&p).unwrap();
        for c in &sys.casimirs {
            let g = nalgebra::DVector::from_vec(c.field.analytic_grad(&p).unwrap());
            assert!((&j * g).amax() <= 1e-10);
        }
    }
}

#[test]
fn h4_real_form_matches_complex_product() {
    let h4 = kowalewski_h4();
    for p in sample_box(6, 50, 2.0, 4) {
        assert!((h4.eval(&p) - kowalewski_h4_complex(&p)).abs() < 1e-12);
    }
}

#[test]
fn lookup_and_parameter_errors() {
    assert!(matches!(get("lagrange-top", &[]), Err(Error::Lookup(_))));
    assert!(matches!(get("euler-top", &[("lambda9".into(), 1.0)]), Err(Error::Param(_))));
    match get("clebsch", &[("b1".into(), 2.0)]) {
        Err(Error::Param(msg)) => assert!(msg.contains("e-") || msg.contains('.'), "{msg}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn clebsch_condition_accepts_valid_parameters() {
    // b_k = 1/a_k satisfies the condition identically.
    let a = [2.0, 3.0, 5.0];
    let b = [0.5, 1.0 / 3.0, 0.2];
    assert!(clebsch_condition(a, b).abs() < 1e-12);
    assert!(clebsch(a, b).is_ok());
    assert!(clebsch(a, [1.0, 1.0, 2.0]).is_err());
}

#[test]
fn transform_matches_hamiltonians() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let yx: [f64; 4] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let (q, p) = ym_forward(yx);
        let p = p.map(|v| Complex64::new(v, 0.0));
        let lhs = ym_hamiltonian_qp(q, p);
        let rhs = ym_hamiltonian_yx(yx.map(|v| Complex64::new(v, 0.0)));
        assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
        let back = ym_inverse(q, p);
        assert!(back.iter().zip(yx).all(|(a, b)| (a - b).norm() < 1e-12));
    }
    let origin = symplectic_transform_ym(0.0, 0.0, 0.0, 0.0);
    assert!(origin.iter().all(|z| z.norm() == 0.0));
}

#[test]
fn transform_determinant_has_modulus_root_two() {
    let m = ym_matrix();
    let det = m.determinant();
    assert!((det.norm() - 2f64.sqrt()).abs() < 1e-12, "{det}");
    assert!((det - Complex64::new(0.0, 2f64.sqrt())).norm() < 1e-12);
}

#[test]
fn transform_real_slice_when_positions_agree() {
    let v = symplectic_transform_ym(0.8, 0.8, 0.3, -0.1);
    assert!(v.iter().all(|z| z.im.abs() < 1e-15));
    let h_qp = ym_hamiltonian_qp([Complex64::new(0.8, 0.0); 2], [Complex64::new(0.3, 0.0), Complex64::new(-0.1, 0.0)]);
    assert!((h_qp - ym_hamiltonian_yx(v)).norm() < 1e-12);
}

#[test]
fn registry_lists_every_system() {
    let v: serde_json::Value = serde_json::from_str(&registry_json()).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), NAMES.len());
    for (entry, name) in arr.iter().zip(NAMES) {
        assert_eq!(entry["name"], name);
        let (dim, n, k) = (entry["dim"].as_u64().unwrap(), entry["n"].as_u64().unwrap(), entry["k"].as_u64().unwrap());
        assert_eq!(dim, 2 * n + k);
        assert!(entry["params"].is_array());
    }
}

#[test]
fn default_reference_state_respects_window() {
    // λ = (1,2,3) relabelled descending: (3,2,1), with r² in the admissible window.
    let m = &reference_initial_conditions("euler-top", &[]).unwrap()[0];
    let h1 = 0.5 * (m[0] * m[0] + 2.0 * m[1] * m[1] + 3.0 * m[2] * m[2]);
    let r2: f64 = m.iter().map(|v| v * v).sum();
    assert!(2.0 * h1 / 3.0 < r2 && r2 < 2.0 * h1);
    assert_eq!(m[1], 0.0);
}
