use geomech::catalog;
use geomech::flows::{trace, Integrator};
use geomech::kowalewski::*;
use geomech::FdConfig;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reference() -> Vec<f64> {
    catalog::reference_initial_conditions("kowalewski", &[]).unwrap().remove(0)
}

fn reference_trace(t1: f64) -> geomech::Trajectory {
    let sys = catalog::kowalewski().unwrap();
    let x = sys.vector_field(&FdConfig::default()).unwrap();
    trace(&x, &reference(), t1, &Integrator::rk4(1e-3).unwrap(), &integral_fields().unwrap()).unwrap()
}

/// Right-hand side written out by hand from the equations of motion.
fn hand_field(x: &[f64]) -> [f64; 6] {
    let [m1, m2, m3, g1, g2, g3] = [x[0], x[1], x[2], x[3], x[4], x[5]];
    [m2 * m3, -m1 * m3 + 2.0 * g3, -2.0 * g2, 2.0 * m3 * g2 - m2 * g3, m1 * g3 - 2.0 * m3 * g1, m2 * g1 - m1 * g2]
}

#[test]
fn catalog_field_matches_hand_equations() {
    let x = catalog::kowalewski().unwrap().vector_field(&FdConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let p: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
        let got = x.eval(&p);
        for (a, b) in got.iter().zip(hand_field(&p)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn reference_state_is_normalized() {
    let c = KowalewskiConstants::from_state(&reference()).unwrap();
    let h = integrals(&reference()).unwrap();
    assert!((c.h1 * 6.0 - h[0]).abs() < 1e-15);
    assert!((c.h2 * 2.0 - h[1]).abs() < 1e-15);
    assert_eq!(c.k2, h[3]);
}

#[test]
fn integrals_agree_with_catalog_fields() {
    let sys = catalog::kowalewski().unwrap();
    let p = reference();
    let h = integrals(&p).unwrap();
    assert!((sys.integrals[0].field.eval(&p) - h[0]).abs() < 1e-14);
    assert!((sys.casimirs[0].field.eval(&p) - h[1]).abs() < 1e-14);
    assert!((sys.casimirs[1].field.eval(&p) - h[2]).abs() < 1e-14);
    assert!((catalog::kowalewski_h4_complex(&p) - h[3]).abs() < 1e-14);
}

#[test]
fn integrals_drift_little_over_ten_units() {
    let tr = reference_trace(10.0);
    assert!(tr.max_drift() <= 1e-7, "{}", tr.max_drift());
}

#[test]
fn algebraic_blocks_hold_along_the_flow() {
    let tr = reference_trace(10.0);
    let c = KowalewskiConstants::from_state(&reference()).unwrap();
    let worst = tr
        .states
        .iter()
        .map(|s| block_residuals(&to_kowalewski_vars(s).unwrap(), c).into_iter().fold(0.0, f64::max))
        .fold(0.0, f64::max);
    assert!(worst <= 1e-8, "{worst}");
}

#[test]
fn kummer_residuals_small_along_the_flow() {
    let tr = reference_trace(10.0);
    let c = KowalewskiConstants::from_state(&reference()).unwrap();
    let rows = residual_report(&tr, c).unwrap();
    let worst = rows.iter().map(|r| r.r1.max(r.r2)).fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn kummer_residual_flags_off_level_state() {
    let c = KowalewskiConstants::from_state(&reference()).unwrap();
    let mut p = reference();
    p[0] += 0.3;
    p[2] -= 0.2;
    let (r1, r2) = kummer_residual(&to_kowalewski_vars(&p).unwrap(), c);
    assert!(r1.max(r2) > 1e-3, "{r1} {r2}");
}

#[test]
fn fixed_point_lies_on_the_kummer_surface() {
    let c = KowalewskiConstants::from_state(&reference()).unwrap();
    let fp = find_fixed_point(c, 11).unwrap();
    let (r1, r2) = kummer_residual(&fp, c);
    assert!(r1 < 1e-10 && r2 < 1e-10, "{r1} {r2}");
    assert!(block_residuals(&fp, c).iter().all(|r| *r < 1e-10));
}

fn random_c(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))
}

#[test]
fn r1_factorization_at_random_complex_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let c = KowalewskiConstants::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.0..1.0));
        let p = polynomials(c);
        let (x1, x2) = (random_c(&mut rng), random_c(&mut rng));
        assert!(p.r1_identity_residual(x1, x2) <= 1e-8);
    }
}

#[test]
fn symmetric_functions_of_s() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let c = KowalewskiConstants::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.0..1.0));
        let p = polynomials(c);
        let cp = ComplexPoint {
            x1: random_c(&mut rng),
            x2: random_c(&mut rng),
            y1: random_c(&mut rng),
            y2: random_c(&mut rng),
            m3: random_c(&mut rng),
            g3: random_c(&mut rng),
        };
        let (s1, s2) = s_variables(&cp, c).unwrap();
        let d2 = (cp.x1 - cp.x2).powi(2);
        let sum = 2.0 * p.rxx(cp.x1, cp.x2) / d2 + 6.0 * c.h1;
        // (s1 - 3h1)(s2 - 3h1) = (Rxx^2 - R(x1)R(x2)) / d^4 = -R1 / d^2.
        let prod = -p.r1(cp.x1, cp.x2) / d2;
        let scale = 1.0 + sum.norm() + prod.norm();
        assert!((s1 + s2 - sum).norm() / scale < 1e-8);
        assert!(((s1 - 3.0 * c.h1) * (s2 - 3.0 * c.h1) - prod).norm() / scale < 1e-8);
    }
}

#[test]
fn s_pair_is_real_or_conjugate_on_real_states() {
    let tr = reference_trace(2.0);
    let c = KowalewskiConstants::from_state(&reference()).unwrap();
    for s in tr.states.iter().step_by(50) {
        let (s1, s2) = s_variables(&to_kowalewski_vars(s).unwrap(), c).unwrap();
        let real = s1.im.abs() < 1e-9 && s2.im.abs() < 1e-9;
        let conj = (s1 - s2.conj()).norm() < 1e-9 * (1.0 + s1.norm());
        assert!(real || conj, "{s1} {s2}");
    }
}

#[test]
fn p5_factor_at_s1() {
    let c = KowalewskiConstants::new(0.2, -0.1, 0.3);
    let p = polynomials(c);
    let cp = to_kowalewski_vars(&[0.4, 0.3, 0.1, 0.5, -0.2, 0.1]).unwrap();
    let (s1, _) = s_variables(&cp, c).unwrap();
    let inner = (p.rxx(cp.x1, cp.x2) - p.r_at(cp.x1).sqrt() * p.r_at(cp.x2).sqrt()) / (cp.x1 - cp.x2).powi(2);
    let lhs = (s1 - 3.0 * c.h1).powi(2) - c.k2;
    assert!((lhs - (inner * inner - c.k2)).norm() < 1e-12);
}

#[test]
fn printed_quintic_expands_its_factors() {
    let c = KowalewskiConstants::new(0.3, 0.2, 0.5);
    let p = polynomials(c);
    for s in [-1.0, 0.3, 2.0] {
        let s = Complex64::new(s, 0.1);
        let direct = ((s - 3.0 * c.h1).powi(2) - c.k2) * (4.0 * s.powi(3) - c.g2() * s - c.g3());
        assert!((p.p5(Quintic::Printed, s) - direct).norm() < 1e-12);
        let u = s / 2.0 - c.h1;
        let shifted = ((s - 3.0 * c.h1).powi(2) - c.k2) * (4.0 * u.powi(3) - c.g2() * u - c.g3());
        assert!((p.p5(Quintic::Weierstrass, s) - shifted).norm() < 1e-12);
    }
}

#[test]
fn euler_relation_holds_with_shifted_cubic() {
    let tr = reference_trace(10.0);
    let c = KowalewskiConstants::from_state(&reference()).unwrap();
    let x = catalog::kowalewski().unwrap().vector_field(&FdConfig::default()).unwrap();
    let thin = geomech::Trajectory {
        times: tr.times.iter().step_by(20).copied().collect(),
        states: tr.states.iter().step_by(20).cloned().collect(),
        invariant_log: vec![],
    };
    let good = euler_relation(&x, &thin, c, &EulerRelationConfig::default()).unwrap();
    assert!(good.len() > 300);
    let worst = good.iter().map(|s| s.residual).fold(0.0, f64::max);
    assert!(worst <= 1e-3, "{worst}");

    let printed = EulerRelationConfig { quintic: Quintic::Printed, ..Default::default() };
    let bad = euler_relation(&x, &thin, c, &printed).unwrap();
    let worst = bad.iter().map(|s| s.residual).fold(0.0, f64::max);
    assert!(worst > 1e-2, "{worst}");
}

#[test]
fn s_track_is_continuous() {
    let tr = reference_trace(3.0);
    let c = KowalewskiConstants::from_state(&reference()).unwrap();
    let states: Vec<Vec<f64>> = tr.states.iter().filter(|s| s[1].abs() > 0.02).cloned().collect();
    let track = s_track(&states[..500], c).unwrap();
    for w in track.windows(2) {
        let jump = (w[1].0 - w[0].0).norm() + (w[1].1 - w[0].1).norm();
        assert!(jump < 0.1, "{jump}");
    }
}

#[test]
fn report_csv_has_header_and_rows() {
    let tr = reference_trace(0.01);
    let c = KowalewskiConstants::from_state(&reference()).unwrap();
    let csv = report_csv(&residual_report(&tr, c).unwrap()).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,r1,r2,dH1,dH2,dH3,dH4");
    assert_eq!(lines.len(), tr.len() + 1);
    assert_eq!(lines[1].split(',').count(), 7);
}
