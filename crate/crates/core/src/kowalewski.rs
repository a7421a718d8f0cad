//! Kowalewski's change of variables, the polynomials of the reduction and the
//! Kummer-surface residuals evaluated along real trajectories.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::fields::{ScalarField, VectorField};
use crate::flows::{flow, Integrator, Trajectory};

/// Allowed `|H_3 - 1|` for the normalized level set.
pub const H3_TOL: f64 = 1e-8;
/// Below this `|x_1 - x_2|` the `s` variables are undefined.
pub const SINGULAR_GAP: f64 = 1e-10;

type C = Complex64;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// `h_1 = H_1 / 6`, `h_2 = H_2 / 2`, `k^2 = H_4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KowalewskiConstants {
    pub h1: f64,
    pub h2: f64,
    pub k2: f64,
}

/// The four first integrals `(H_1, H_2, H_3, H_4)` at a state `(m, γ)`.
pub fn integrals(state: &[f64]) -> Result<[f64; 4]> {
    check_dim(6, state.len())?;
    let [m1, m2, m3, g1, g2, g3] = [state[0], state[1], state[2], state[3], state[4], state[5]];
    let h1 = 0.5 * (m1 * m1 + m2 * m2) + m3 * m3 + 2.0 * g1;
    let h2 = m1 * g1 + m2 * g2 + m3 * g3;
    let h3 = g1 * g1 + g2 * g2 + g3 * g3;
    let u = 0.25 * (m1 * m1 - m2 * m2) - g1;
    let v = 0.5 * m1 * m2 - g2;
    Ok([h1, h2, h3, u * u + v * v])
}

impl KowalewskiConstants {
    pub fn new(h1: f64, h2: f64, k2: f64) -> Self {
        Self { h1, h2, k2 }
    }

    /// Reads the constants off a state on the `H_3 = 1` level.
    pub fn from_state(state: &[f64]) -> Result<Self> {
        let [h1, h2, h3, h4] = integrals(state)?;
        if (h3 - 1.0).abs() > H3_TOL {
            return Err(Error::Param(format!("H3 = {h3} is not 1 within {H3_TOL:e}")));
        }
        Ok(Self::new(h1 / 6.0, h2 / 2.0, h4))
    }

    /// `(c_1, c_2, c_3, c_4) = (6 h_1, 2 h_2, 1, k^2)`.
    pub fn levels(&self) -> [f64; 4] {
        [6.0 * self.h1, 2.0 * self.h2, 1.0, self.k2]
    }

    /// `g_2 = k^2 - 1 + 3 h_1^2`.
    pub fn g2(&self) -> f64 {
        self.k2 - 1.0 + 3.0 * self.h1 * self.h1
    }

    /// `g_3 = h_1 (k^2 - 1 - h_1^2) + h_2^2`.
    pub fn g3(&self) -> f64 {
        self.h1 * (self.k2 - 1.0 - self.h1 * self.h1) + self.h2 * self.h2
    }
}

/// A state in Kowalewski's complex coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPoint {
    pub x1: C,
    pub x2: C,
    pub y1: C,
    pub y2: C,
    pub m3: C,
    pub g3: C,
}

/// `x_{1,2} = (m_1 ± i m_2)/2`, `y_{1,2} = x_{1,2}^2 - (γ_1 ± i γ_2)`.
pub fn to_kowalewski_vars(state: &[f64]) -> Result<ComplexPoint> {
    check_dim(6, state.len())?;
    let x1 = C::new(state[0], state[1]) / 2.0;
    let x2 = C::new(state[0], -state[1]) / 2.0;
    Ok(ComplexPoint {
        x1,
        x2,
        y1: x1 * x1 - C::new(state[3], state[4]),
        y2: x2 * x2 - C::new(state[3], -state[4]),
        m3: c(state[2]),
        g3: c(state[5]),
    })
}

/// Which quintic multiplies `ds / dt` in the separated equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quintic {
    /// `((s - 3h_1)^2 - k^2)(4 s^3 - g_2 s - g_3)` exactly as printed.
    Printed,
    /// `((s - 3h_1)^2 - k^2) φ(s/2 - h_1)` with `φ(u) = 4u^3 - g_2 u - g_3`.
    Weierstrass,
}

/// Coefficients (ascending powers) of the one-variable polynomials of the reduction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polynomials {
    pub consts: KowalewskiConstants,
    /// `R(x) = -x^4 + 6h_1 x^2 - 4h_2 x + 1 - k^2`.
    pub r: Vec<f64>,
    pub p5_printed: Vec<f64>,
    pub p5_weierstrass: Vec<f64>,
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Horner evaluation of ascending coefficients.
pub fn poly_eval(coeffs: &[f64], x: C) -> C {
    coeffs.iter().rev().fold(C::new(0.0, 0.0), |acc, a| acc * x + a)
}

/// Index of the highest non-zero coefficient.
pub fn degree(coeffs: &[f64]) -> Option<usize> {
    coeffs.iter().rposition(|a| *a != 0.0)
}

pub fn polynomials(consts: KowalewskiConstants) -> Polynomials {
    let KowalewskiConstants { h1, h2, k2 } = consts;
    let quad = [9.0 * h1 * h1 - k2, -6.0 * h1, 1.0];
    let (g2, g3) = (consts.g2(), consts.g3());
    let cubic = [-g3, -g2, 0.0, 4.0];
    // φ(s/2 - h1) expanded in s.
    let shifted = [
        -4.0 * h1 * h1 * h1 + g2 * h1 - g3,
        6.0 * h1 * h1 - 0.5 * g2,
        -3.0 * h1,
        0.5,
    ];
    Polynomials {
        consts,
        r: vec![1.0 - k2, -4.0 * h2, 6.0 * h1, 0.0, -1.0],
        p5_printed: poly_mul(&quad, &cubic),
        p5_weierstrass: poly_mul(&quad, &shifted),
    }
}

impl Polynomials {
    pub fn r_at(&self, x: C) -> C {
        poly_eval(&self.r, x)
    }

    /// `R_1(x_1, x_2)`, the degree-two-in-each companion of `R`.
    pub fn r1(&self, x1: C, x2: C) -> C {
        let KowalewskiConstants { h1, h2, k2 } = self.consts;
        let p = x1 * x2;
        let s = x1 + x2;
        -6.0 * h1 * p * p + 4.0 * h2 * p * s - (1.0 - k2) * s * s + 6.0 * h1 * (1.0 - k2) - 4.0 * h2 * h2
    }

    /// `R(x_1, x_2) = -x_1^2 x_2^2 + 6h_1 x_1 x_2 - 2h_2 (x_1 + x_2) + 1 - k^2`.
    pub fn rxx(&self, x1: C, x2: C) -> C {
        let KowalewskiConstants { h1, h2, k2 } = self.consts;
        let p = x1 * x2;
        -p * p + 6.0 * h1 * p - 2.0 * h2 * (x1 + x2) + (1.0 - k2)
    }

    pub fn p5(&self, which: Quintic, s: C) -> C {
        match which {
            Quintic::Printed => poly_eval(&self.p5_printed, s),
            Quintic::Weierstrass => poly_eval(&self.p5_weierstrass, s),
        }
    }

    /// `|R_1 - (R(x_1)R(x_2) - R(x_1,x_2)^2)/(x_1 - x_2)^2|` relative to the larger side.
    pub fn r1_identity_residual(&self, x1: C, x2: C) -> f64 {
        let lhs = self.r1(x1, x2);
        let d = x1 - x2;
        let rhs = (self.r_at(x1) * self.r_at(x2) - self.rxx(x1, x2).powi(2)) / (d * d);
        (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1.0)
    }
}

/// `(|y_1 y_2 - k^2|, |y_1 R(x_2) + y_2 R(x_1) + R_1 + k^2 (x_1 - x_2)^2|)`.
pub fn kummer_residual(cp: &ComplexPoint, consts: KowalewskiConstants) -> (f64, f64) {
    let p = polynomials(consts);
    let d = cp.x1 - cp.x2;
    let r1 = (cp.y1 * cp.y2 - consts.k2).norm();
    let r2 = (cp.y1 * p.r_at(cp.x2) + cp.y2 * p.r_at(cp.x1) + p.r1(cp.x1, cp.x2) + consts.k2 * d * d).norm();
    (r1, r2)
}

/// Residuals of the four algebraic relations tying `y_1 y_2`, `m_3^2`, `m_3 γ_3`, `γ_3^2` to `(x, y)`.
pub fn block_residuals(cp: &ComplexPoint, consts: KowalewskiConstants) -> [f64; 4] {
    let KowalewskiConstants { h1, h2, k2 } = consts;
    let ComplexPoint { x1, x2, y1, y2, m3, g3 } = *cp;
    let s = x1 + x2;
    [
        (y1 * y2 - k2).norm(),
        (m3 * m3 - (6.0 * h1 + y1 + y2 - s * s)).norm(),
        (m3 * g3 - (2.0 * h2 + x1 * y2 + x2 * y1 - x1 * x2 * s)).norm(),
        (g3 * g3 - (1.0 - k2 + x1 * x1 * y2 + x2 * x2 * y1 - x1 * x1 * x2 * x2)).norm(),
    ]
}

/// `s_{1,2} = (R(x_1,x_2) ∓ √R(x_1) √R(x_2)) / (x_1 - x_2)^2 + 3h_1`, principal roots.
pub fn s_variables(cp: &ComplexPoint, consts: KowalewskiConstants) -> Result<(C, C)> {
    let d = cp.x1 - cp.x2;
    if d.norm() < SINGULAR_GAP {
        return Err(Error::Singular(format!("|x1 - x2| = {:e} is below {SINGULAR_GAP:e}", d.norm())));
    }
    let p = polynomials(consts);
    let root = p.r_at(cp.x1).sqrt() * p.r_at(cp.x2).sqrt();
    let base = p.rxx(cp.x1, cp.x2);
    let d2 = d * d;
    Ok(((base - root) / d2 + 3.0 * consts.h1, (base + root) / d2 + 3.0 * consts.h1))
}

/// Orders `next` to be the nearest continuation of `prev`.
pub fn match_branch(prev: (C, C), next: (C, C)) -> (C, C) {
    let keep = (next.0 - prev.0).norm() + (next.1 - prev.1).norm();
    let swap = (next.1 - prev.0).norm() + (next.0 - prev.1).norm();
    if swap < keep {
        (next.1, next.0)
    } else {
        next
    }
}

/// `(s_1, s_2)` at every sample, continued from the principal branch at the first.
pub fn s_track(states: &[Vec<f64>], consts: KowalewskiConstants) -> Result<Vec<(C, C)>> {
    let mut out: Vec<(C, C)> = Vec::with_capacity(states.len());
    for st in states {
        let s = s_variables(&to_kowalewski_vars(st)?, consts)?;
        out.push(match out.last() {
            Some(prev) => match_branch(*prev, s),
            None => s,
        });
    }
    Ok(out)
}

/// Settings for the finite-difference Euler relation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerRelationConfig {
    /// Half-width of the central difference in time.
    pub dt: f64,
    /// Samples with `|m_2|` below this sit too close to the `x_1 = x_2` slice and are skipped.
    pub min_m2: f64,
    pub quintic: Quintic,
}

impl Default for EulerRelationConfig {
    fn default() -> Self {
        Self { dt: 1e-5, min_m2: 0.02, quintic: Quintic::Weierstrass }
    }
}

/// One evaluated sample of `ṡ_1/√P(s_1) ± ṡ_2/√P(s_2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerSample {
    pub t: f64,
    /// `min(|a + b|, |a - b|) / (|a| + |b|)`.
    pub residual: f64,
}

/// Checks `ṡ_1/√P(s_1) = ±ṡ_2/√P(s_2)` at each trajectory sample, with `ṡ` from flowing `±dt`.
pub fn euler_relation(
    field: &VectorField,
    traj: &Trajectory,
    consts: KowalewskiConstants,
    cfg: &EulerRelationConfig,
) -> Result<Vec<EulerSample>> {
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(Error::Arg(format!("dt must be positive, got {}", cfg.dt)));
    }
    let poly = polynomials(consts);
    let integ = Integrator::rk4(cfg.dt)?;
    let s_at = |st: &[f64]| s_variables(&to_kowalewski_vars(st)?, consts);
    let mut out = Vec::new();
    for (t, st) in traj.times.iter().zip(&traj.states) {
        if st[1].abs() < cfg.min_m2 {
            continue;
        }
        let s0 = s_at(st)?;
        let fwd = match_branch(s0, s_at(&flow(field, st, cfg.dt, &integ)?)?);
        let bwd = match_branch(s0, s_at(&flow(field, st, -cfg.dt, &integ)?)?);
        let d1 = (fwd.0 - bwd.0) / (2.0 * cfg.dt);
        let d2 = (fwd.1 - bwd.1) / (2.0 * cfg.dt);
        let a = d1 / poly.p5(cfg.quintic, s0.0).sqrt();
        let b = d2 / poly.p5(cfg.quintic, s0.1).sqrt();
        let scale = a.norm() + b.norm();
        let residual = if scale == 0.0 { 0.0 } else { (a + b).norm().min((a - b).norm()) / scale };
        out.push(EulerSample { t: *t, residual });
    }
    Ok(out)
}

/// The four equations satisfied by `(x_1, x_2, y_1, y_2)` when `m_3 = γ_3 = 0`.
pub fn fixed_point_equations(v: &[C; 4], consts: KowalewskiConstants) -> [C; 4] {
    let KowalewskiConstants { h1, h2, k2 } = consts;
    let [x1, x2, y1, y2] = *v;
    let s = x1 + x2;
    [
        y1 * y2 - k2,
        y1 + y2 - s * s + 6.0 * h1,
        x2 * y1 + x1 * y2 - x1 * x2 * s + 2.0 * h2,
        x2 * x2 * y1 + x1 * x1 * y2 - x1 * x1 * x2 * x2 - k2 + 1.0,
    ]
}

fn fixed_point_jacobian(v: &[C; 4]) -> Matrix4<C> {
    let [x1, x2, y1, y2] = *v;
    let s = x1 + x2;
    let one = c(1.0);
    let zero = c(0.0);
    Matrix4::new(
        zero, zero, y2, y1,
        -2.0 * s, -2.0 * s, one, one,
        y2 - 2.0 * x1 * x2 - x2 * x2, y1 - x1 * x1 - 2.0 * x1 * x2, x2, x1,
        2.0 * x1 * (y2 - x2 * x2), 2.0 * x2 * (y1 - x1 * x1), x2 * x2, x1 * x1,
    )
}

/// One root of the fixed-point system with `x_1^2 ≠ x_2^2`, by Newton from seeded complex starts.
pub fn find_fixed_point(consts: KowalewskiConstants, seed: u64) -> Result<ComplexPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..200 {
        let mut v: [C; 4] = std::array::from_fn(|_| C::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)));
        for _ in 0..100 {
            let f = Vector4::from(fixed_point_equations(&v, consts));
            let Some(delta) = fixed_point_jacobian(&v).lu().solve(&f) else { break };
            for (vi, di) in v.iter_mut().zip(delta.iter()) {
                *vi -= di;
            }
            if delta.iter().all(|d| d.is_finite()) && delta.norm() < 1e-14 * (1.0 + Vector4::from(v).norm()) {
                break;
            }
        }
        let res = fixed_point_equations(&v, consts).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let [x1, x2, y1, y2] = v;
        if res < 1e-12 && (x1 * x1 - x2 * x2).norm() > 1e-6 && v.iter().all(|z| z.norm() < 1e6) {
            return Ok(ComplexPoint { x1, x2, y1, y2, m3: c(0.0), g3: c(0.0) });
        }
    }
    Err(Error::Singular("Newton found no admissible fixed point".into()))
}

/// One row of the residual report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRow {
    pub t: f64,
    pub r1: f64,
    pub r2: f64,
    /// `|H_i - c_i|` for `i = 1..4`.
    pub drift: [f64; 4],
}

/// Kummer residuals and integral drifts at every sample of a trajectory.
pub fn residual_report(traj: &Trajectory, consts: KowalewskiConstants) -> Result<Vec<ResidualRow>> {
    let levels = consts.levels();
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(t, st)| {
            let (r1, r2) = kummer_residual(&to_kowalewski_vars(st)?, consts);
            let h = integrals(st)?;
            Ok(ResidualRow { t: *t, r1, r2, drift: std::array::from_fn(|i| (h[i] - levels[i]).abs()) })
        })
        .collect()
}

/// CSV with header `t,r1,r2,dH1,dH2,dH3,dH4` and full-precision scientific values.
pub fn report_csv(rows: &[ResidualRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Arg(format!("csv: {e}"));
    w.write_record(["t", "r1", "r2", "dH1", "dH2", "dH3", "dH4"]).map_err(io)?;
    for r in rows {
        let mut rec = vec![format!("{:.16e}", r.t), format!("{:.16e}", r.r1), format!("{:.16e}", r.r2)];
        rec.extend(r.drift.iter().map(|d| format!("{d:.16e}")));
        w.write_record(&rec).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Arg(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Arg(format!("csv: {e}")))
}

/// `H_1..H_4` as scalar fields, for logging along a trace.
pub fn integral_fields() -> Result<Vec<ScalarField>> {
    (0..4)
        .map(|i| ScalarField::new(6, move |x| integrals(x).map(|h| h[i]).unwrap_or(f64::NAN)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_maps_to_zero() {
        let cp = to_kowalewski_vars(&[0.0; 6]).unwrap();
        for z in [cp.x1, cp.x2, cp.y1, cp.y2, cp.m3, cp.g3] {
            assert_eq!(z, c(0.0));
        }
    }

    #[test]
    fn trivial_constants_give_quartic() {
        let p = polynomials(KowalewskiConstants::new(0.0, 0.0, 0.0));
        assert_eq!(p.r, vec![1.0, 0.0, 0.0, 0.0, -1.0]);
        assert_eq!(degree(&p.p5_printed), Some(5));
        assert_eq!(degree(&p.p5_weierstrass), Some(5));
    }

    #[test]
    fn y_product_is_h4() {
        let st = [0.3, -0.7, 0.2, 0.5, 0.1, -0.4];
        let cp = to_kowalewski_vars(&st).unwrap();
        let h4 = integrals(&st).unwrap()[3];
        assert!((cp.y1 * cp.y2 - h4).norm() < 1e-12);
    }

    #[test]
    fn coincident_x_is_singular() {
        let cp = to_kowalewski_vars(&[0.3, 0.0, 0.2, 0.5, 0.1, -0.4]).unwrap();
        assert!(matches!(s_variables(&cp, KowalewskiConstants::new(0.1, 0.2, 0.3)), Err(Error::Singular(_))));
    }

    #[test]
    fn unnormalized_gamma_is_rejected() {
        assert!(matches!(KowalewskiConstants::from_state(&[0.1, 0.2, 0.3, 1.0, 1.0, 0.0]), Err(Error::Param(_))));
    }

    #[test]
    fn branch_matching_swaps() {
        let prev = (c(1.0), c(-1.0));
        assert_eq!(match_branch(prev, (c(-0.9), c(1.1))), (c(1.1), c(-0.9)));
        assert_eq!(match_branch(prev, (c(0.9), c(-1.1))), (c(0.9), c(-1.1)));
    }
}
