//! so(3) and so(4): hat map, (co)adjoint actions of rotations, orbit
//! symplectic forms and the reduced rigid-body bracket on the sphere.

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::Rng;

use crate::error::{Error, Result};
use crate::exterior::{exterior_derivative, DifferentialForm};
use crate::fields::{FdConfig, ScalarField};

/// Denominator threshold for chart evaluations.
pub const CHART_EPS: f64 = 1e-12;

/// An element of so(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewMatrix3(pub Matrix3<f64>);

/// `a -> [[0, -a3, a2], [a3, 0, -a1], [-a2, a1, 0]]`, so that `hat(a) b = a x b`.
pub fn hat(a: [f64; 3]) -> SkewMatrix3 {
    SkewMatrix3(Matrix3::new(0.0, -a[2], a[1], a[2], 0.0, -a[0], -a[1], a[0], 0.0))
}

/// Inverse of [`hat`]. Fails unless `m` is skew to 1e-12.
pub fn unhat(m: &Matrix3<f64>) -> Result<[f64; 3]> {
    let asym = (m + m.transpose()).amax();
    if asym > 1e-12 {
        return Err(Error::Shape(format!("matrix is not skew: |M + M^T| = {asym:e}")));
    }
    Ok([m[(2, 1)], m[(0, 2)], m[(1, 0)]])
}

impl SkewMatrix3 {
    pub fn axis(&self) -> [f64; 3] {
        [self.0[(2, 1)], self.0[(0, 2)], self.0[(1, 0)]]
    }

    pub fn commutator(&self, other: &SkewMatrix3) -> SkewMatrix3 {
        SkewMatrix3(self.0 * other.0 - other.0 * self.0)
    }
}

/// The 6x6 so(4) matrix `[[hat(x_123), hat(x_456)], [hat(x_456), hat(x_123)]]`.
pub fn so4_matrix(x: [f64; 6]) -> DMatrix<f64> {
    let a = hat([x[0], x[1], x[2]]).0;
    let b = hat([x[3], x[4], x[5]]).0;
    DMatrix::from_fn(6, 6, |i, j| {
        let same = (i < 3) == (j < 3);
        let m = if same { &a } else { &b };
        m[(i % 3, j % 3)]
    })
}

/// Rotation by `angle` about `axis` (Rodrigues). The axis need not be normalized.
pub fn rodrigues(axis: [f64; 3], angle: f64) -> Result<Matrix3<f64>> {
    let v = Vector3::from(axis);
    let n = v.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::Param(format!("rotation axis {axis:?} has no direction")));
    }
    let k = hat((v / n).into()).0;
    Ok(Matrix3::identity() + k * angle.sin() + k * k * (1.0 - angle.cos()))
}

/// `exp(hat(a))` for any axis vector, identity at zero.
pub fn exp_so3(a: [f64; 3]) -> Matrix3<f64> {
    let n = Vector3::from(a).norm();
    if n == 0.0 {
        Matrix3::identity()
    } else {
        rodrigues(a, n).expect("nonzero axis")
    }
}

/// A rotation with a uniformly random axis direction and angle in `[0, pi)`.
pub fn random_rotation<R: Rng>(rng: &mut R) -> Matrix3<f64> {
    loop {
        let axis = [0; 3].map(|_| rng.random_range(-1.0..1.0));
        if Vector3::from(axis).norm() > 1e-3 {
            let angle = rng.random_range(0.0..std::f64::consts::PI);
            return rodrigues(axis, angle).expect("axis is nonzero");
        }
    }
}

fn check_rotation(y: &Matrix3<f64>) -> Result<()> {
    let orth = (y.transpose() * y - Matrix3::identity()).amax();
    let det = y.determinant();
    if orth > 1e-10 || (det - 1.0).abs() > 1e-10 {
        return Err(Error::Param(format!("not a rotation: |Y^T Y - I| = {orth:e}, det = {det}")));
    }
    Ok(())
}

/// `Ad_Y A = Y A Y^{-1}`.
pub fn adjoint_action(y: &Matrix3<f64>, a: &SkewMatrix3) -> Result<SkewMatrix3> {
    check_rotation(y)?;
    Ok(SkewMatrix3(y * a.0 * y.transpose()))
}

/// `Ad*_Y A = Y^{-1} A Y`.
pub fn coadjoint_action(y: &Matrix3<f64>, a: &SkewMatrix3) -> Result<SkewMatrix3> {
    check_rotation(y)?;
    Ok(SkewMatrix3(y.transpose() * a.0 * y))
}

/// Sorted imaginary parts of the eigenvalues of a 3x3 skew matrix, `{0, +-|a|}` exactly
/// in exact arithmetic.
pub fn skew_spectrum(a: &SkewMatrix3) -> [f64; 3] {
    let mut ims: Vec<f64> = a.0.complex_eigenvalues().iter().map(|z| z.im).collect();
    ims.sort_by(f64::total_cmp);
    [ims[0], ims[1], ims[2]]
}

/// Which coordinate pair a sphere chart uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// `dx_1 ^ dx_2 / x_3`
    Xy,
    /// `dx_2 ^ dx_3 / x_1`
    Yz,
    /// `dx_3 ^ dx_1 / x_2`
    Zx,
}

impl Chart {
    /// `(i, j, denominator index)`, 0-based.
    fn indices(self) -> (usize, usize, usize) {
        match self {
            Chart::Xy => (0, 1, 2),
            Chart::Yz => (1, 2, 0),
            Chart::Zx => (2, 0, 1),
        }
    }
}

/// A 2-form on an orbit, with an optional chart whose denominator must stay away from 0.
#[derive(Debug, Clone)]
pub struct OrbitForm {
    pub form: DifferentialForm,
    pub chart: Option<Chart>,
}

impl OrbitForm {
    pub fn evaluate(&self, p: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        if let Some(chart) = self.chart {
            let (_, _, d) = chart.indices();
            if p.len() > d && p[d].abs() < CHART_EPS {
                return Err(Error::ChartSingular { denominator: p[d] });
            }
        }
        self.form.evaluate(p, &[u.to_vec(), v.to_vec()])
    }
}

/// The area form of a sphere `|x| = r` in R^3, written in one of three charts.
pub fn orbit_form_s2(chart: Chart) -> Result<OrbitForm> {
    let (i, j, d) = chart.indices();
    let coeff = ScalarField::new(3, move |p| 1.0 / p[d])?;
    Ok(OrbitForm { form: DifferentialForm::from_terms(3, 2, vec![(vec![i, j], coeff)])?, chart: Some(chart) })
}

/// `-x_3 dx_1^dx_2 - x_6 dx_1^dx_5 + x_6 dx_2^dx_4 - x_3 dx_4^dx_5` on R^6.
pub fn orbit_form_so4() -> Result<OrbitForm> {
    let x = |i: usize, s: f64| ScalarField::coordinate(6, i).map(|f| f.scale(s));
    let terms = vec![
        (vec![0, 1], x(2, -1.0)?),
        (vec![0, 4], x(5, -1.0)?),
        (vec![1, 3], x(5, 1.0)?),
        (vec![3, 4], x(2, -1.0)?),
    ];
    Ok(OrbitForm { form: DifferentialForm::from_terms(6, 2, terms)?, chart: None })
}

/// Tangent vector `J(x) a` to the so(4) orbit through `x`.
pub fn so4_orbit_tangent(x: [f64; 6], a: [f64; 6]) -> Vec<f64> {
    (so4_matrix(x) * nalgebra::DVector::from_row_slice(&a)).iter().copied().collect()
}

/// Largest `|dOmega(x)(t_1, t_2, t_3)|` over orbit tangent triples `t_i = J(x) a_i`.
pub fn so4_orbit_closedness(samples: &[([f64; 6], [[f64; 6]; 3])], cfg: &FdConfig) -> Result<f64> {
    let d_omega = exterior_derivative(&orbit_form_so4()?.form, cfg)?;
    let mut worst = 0.0f64;
    for (x, a) in samples {
        let ts: Vec<Vec<f64>> = a.iter().map(|ai| so4_orbit_tangent(*x, *ai)).collect();
        worst = worst.max(d_omega.evaluate(x, &ts)?.abs());
    }
    Ok(worst)
}

/// Blocks of the so(4) form in `u = x_123 + x_456`, `v = x_123 - x_456`:
/// `(Omega(du_i, du_j), Omega(dv_i, dv_j), Omega(du_i, dv_j))`.
pub fn so4_block_pairing(x: [f64; 6]) -> Result<(Matrix3<f64>, Matrix3<f64>, Matrix3<f64>)> {
    let omega = orbit_form_so4()?.form;
    let du = |i: usize| {
        let mut e = vec![0.0; 6];
        e[i] = 0.5;
        e[i + 3] = 0.5;
        e
    };
    let dv = |i: usize| {
        let mut e = vec![0.0; 6];
        e[i] = 0.5;
        e[i + 3] = -0.5;
        e
    };
    let mut uu = Matrix3::zeros();
    let mut vv = Matrix3::zeros();
    let mut uv = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            uu[(i, j)] = omega.evaluate(&x, &[du(i), du(j)])?;
            vv[(i, j)] = omega.evaluate(&x, &[dv(i), dv(j)])?;
            uv[(i, j)] = omega.evaluate(&x, &[du(i), dv(j)])?;
        }
    }
    Ok((uu, vv, uv))
}

/// Compare the Euler field's `(m1', m2')` with the reduced bracket `[[0, -m3], [m3, 0]]`
/// acting on `H` restricted to the sphere through each probe; returns the worst difference.
pub fn reduced_euler_equivalence(lambda: [f64; 3], probes: &[[f64; 3]]) -> Result<f64> {
    let mut worst = 0.0f64;
    for m in probes {
        if m[2].abs() < CHART_EPS {
            return Err(Error::ChartSingular { denominator: m[2] });
        }
        let full = [(lambda[2] - lambda[1]) * m[1] * m[2], (lambda[0] - lambda[2]) * m[0] * m[2]];
        // dm3/dm_i = -m_i / m3 on the sphere
        let dh = [0, 1].map(|i| lambda[i] * m[i] + lambda[2] * m[2] * (-m[i] / m[2]));
        let reduced = [-m[2] * dh[1], m[2] * dh[0]];
        worst = worst.max((full[0] - reduced[0]).abs()).max((full[1] - reduced[1]).abs());
    }
    Ok(worst)
}
