//! Differential forms on R^m with sorted-index storage.
//!
//! A k-form is kept as a map from strictly increasing 0-based index tuples
//! to coefficient fields. The antisymmetric extension is never stored.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::fields::{gradient, partial, FdConfig, ScalarField, VectorField};
use crate::flows::{pullback_form, Integrator};

#[derive(Clone)]
pub struct DifferentialForm {
    dim: usize,
    degree: usize,
    coeffs: BTreeMap<Vec<usize>, ScalarField>,
}

impl fmt::Debug for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DifferentialForm")
            .field("dim", &self.dim)
            .field("degree", &self.degree)
            .field("keys", &self.coeffs.keys().collect::<Vec<_>>())
            .finish()
    }
}

/// Sort `idx` in place and return the permutation sign, or `None` on a repeated index.
pub fn sort_with_sign(idx: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// Determinant of a small dense matrix. The 2x2 case is written out so that
/// swapping columns negates the value bit-for-bit.
fn small_det(m: &DMatrix<f64>) -> f64 {
    match m.nrows() {
        0 => 1.0,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        _ => m.clone().lu().determinant(),
    }
}

impl DifferentialForm {
    fn check_shape(dim: usize, degree: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::BadDim("forms need m >= 1".into()));
        }
        if degree > dim {
            return Err(Error::Dim { expected: dim, got: degree });
        }
        Ok(())
    }

    /// The zero k-form. In degree 0 this still carries the empty key.
    pub fn zero(dim: usize, degree: usize) -> Result<Self> {
        Self::check_shape(dim, degree)?;
        let mut coeffs = BTreeMap::new();
        if degree == 0 {
            coeffs.insert(Vec::new(), ScalarField::constant(dim, 0.0)?);
        }
        Ok(Self { dim, degree, coeffs })
    }

    /// A 0-form.
    pub fn scalar(f: ScalarField) -> Self {
        let mut coeffs = BTreeMap::new();
        let dim = f.dim();
        coeffs.insert(Vec::new(), f);
        Self { dim, degree: 0, coeffs }
    }

    /// Sum of `f dx_{i_1} ^ ... ^ dx_{i_k}` terms. Indices need not be sorted;
    /// repeated indices contribute nothing.
    pub fn from_terms(dim: usize, degree: usize, terms: Vec<(Vec<usize>, ScalarField)>) -> Result<Self> {
        let mut out = Self::zero(dim, degree)?;
        for (mut idx, f) in terms {
            if idx.len() != degree {
                return Err(Error::Degree(format!("index tuple {idx:?} has length {}, expected {degree}", idx.len())));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= dim) {
                return Err(Error::Arg(format!("index {bad} out of range for m = {dim}")));
            }
            check_dim(dim, f.dim())?;
            if let Some(sign) = sort_with_sign(&mut idx) {
                let f = if sign < 0.0 { f.scale(-1.0) } else { f };
                out.accumulate(idx, f)?;
            }
        }
        Ok(out)
    }

    /// `c dx_{i_1} ^ ... ^ dx_{i_k}` with constant `c`.
    pub fn monomial(dim: usize, idx: &[usize], c: f64) -> Result<Self> {
        Self::from_terms(dim, idx.len(), vec![(idx.to_vec(), ScalarField::constant(dim, c)?)])
    }

    /// `dx_1 ^ ... ^ dx_m`.
    pub fn volume(dim: usize) -> Result<Self> {
        Self::monomial(dim, &(0..dim).collect::<Vec<_>>(), 1.0)
    }

    /// `sum_k dx_k ^ dx_{n+k}` on R^{2n}.
    pub fn canonical_symplectic(n: usize) -> Result<Self> {
        let terms = (0..n)
            .map(|k| Ok((vec![k, n + k], ScalarField::constant(2 * n, 1.0)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(2 * n, 2, terms)
    }

    fn accumulate(&mut self, key: Vec<usize>, f: ScalarField) -> Result<()> {
        let merged = match self.coeffs.remove(&key) {
            Some(g) => g.add(&f)?,
            None => f,
        };
        self.coeffs.insert(key, merged);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn keys(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.coeffs.keys()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &ScalarField)> {
        self.coeffs.iter()
    }

    /// Coefficient of `dx_idx` at `p`, with the sign of the sorting permutation applied.
    pub fn coefficient_at(&self, idx: &[usize], p: &[f64]) -> Result<f64> {
        check_dim(self.dim, p.len())?;
        if idx.len() != self.degree {
            return Err(Error::Degree(format!("expected {} indices, got {}", self.degree, idx.len())));
        }
        let mut key = idx.to_vec();
        let Some(sign) = sort_with_sign(&mut key) else { return Ok(0.0) };
        Ok(self.coeffs.get(&key).map_or(0.0, |f| sign * f.eval(p)))
    }

    /// All stored coefficients at `p`.
    pub fn coefficients_at(&self, p: &[f64]) -> Result<BTreeMap<Vec<usize>, f64>> {
        check_dim(self.dim, p.len())?;
        Ok(self.coeffs.iter().map(|(k, f)| (k.clone(), f.eval(p))).collect())
    }

    /// Largest coefficient magnitude at `p`.
    pub fn max_abs_at(&self, p: &[f64]) -> Result<f64> {
        Ok(self.coefficients_at(p)?.values().fold(0.0f64, |a, v| a.max(v.abs())))
    }

    /// The 0-form value, for degree-0 forms.
    pub fn scalar_at(&self, p: &[f64]) -> Result<f64> {
        if self.degree != 0 {
            return Err(Error::Degree(format!("scalar_at needs a 0-form, got degree {}", self.degree)));
        }
        self.coefficient_at(&[], p)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        if self.degree != other.degree {
            return Err(Error::Degree(format!("cannot add degrees {} and {}", self.degree, other.degree)));
        }
        let mut out = self.clone();
        for (k, f) in &other.coeffs {
            out.accumulate(k.clone(), f.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|(k, f)| (k.clone(), f.scale(c))).collect(),
        }
    }

    /// `f ω` for a scalar field `f`.
    pub fn scale_by(&self, f: &ScalarField) -> Result<Self> {
        check_dim(self.dim, f.dim())?;
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, g)| Ok((k.clone(), f.mul(g)?)))
            .collect::<Result<_>>()?;
        Ok(Self { dim: self.dim, degree: self.degree, coeffs })
    }

    /// Evaluate on `vs` (k vectors of length m): the sum over stored keys of
    /// coefficient times the minor of the selected rows.
    pub fn evaluate(&self, p: &[f64], vs: &[Vec<f64>]) -> Result<f64> {
        check_dim(self.dim, p.len())?;
        if vs.len() != self.degree {
            return Err(Error::Dim { expected: self.degree, got: vs.len() });
        }
        for v in vs {
            check_dim(self.dim, v.len())?;
        }
        let k = self.degree;
        let mut total = 0.0;
        for (key, f) in &self.coeffs {
            let c = f.eval(p);
            if !c.is_finite() {
                return Err(Error::Domain(format!("coefficient {key:?} is {c} at {p:?}")));
            }
            if c == 0.0 {
                continue;
            }
            let minor = DMatrix::from_fn(k, k, |r, col| vs[col][key[r]]);
            total += c * small_det(&minor);
        }
        Ok(total)
    }

    /// The matrix `ω(e_i, e_j)` of a 2-form at `p`.
    pub fn gram(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        if self.degree != 2 {
            return Err(Error::Degree(format!("gram needs a 2-form, got degree {}", self.degree)));
        }
        check_dim(self.dim, p.len())?;
        let mut g = DMatrix::zeros(self.dim, self.dim);
        for (key, f) in &self.coeffs {
            let c = f.eval(p);
            g[(key[0], key[1])] += c;
            g[(key[1], key[0])] -= c;
        }
        Ok(g)
    }
}

/// `α ^ β`.
pub fn wedge(a: &DifferentialForm, b: &DifferentialForm) -> Result<DifferentialForm> {
    check_dim(a.dim, b.dim)?;
    let degree = a.degree + b.degree;
    if degree > a.dim {
        return Err(Error::Dim { expected: a.dim, got: degree });
    }
    let mut out = DifferentialForm::zero(a.dim, degree)?;
    if degree == 0 {
        out.coeffs.clear();
    }
    for (i, f) in &a.coeffs {
        for (j, g) in &b.coeffs {
            let mut key: Vec<usize> = i.iter().chain(j).copied().collect();
            if let Some(sign) = sort_with_sign(&mut key) {
                out.accumulate(key, f.mul(g)?.scale(sign))?;
            }
        }
    }
    Ok(out)
}

/// Contraction in the first slot: `(i_X ω)(v_2, ..) = ω(X, v_2, ..)`.
pub fn interior_product(x: &VectorField, w: &DifferentialForm) -> Result<DifferentialForm> {
    check_dim(w.dim, x.dim())?;
    if w.degree == 0 {
        return Err(Error::Degree("interior product of a 0-form".into()));
    }
    let mut out = DifferentialForm::zero(w.dim, w.degree - 1)?;
    for (key, f) in &w.coeffs {
        for (a, &i) in key.iter().enumerate() {
            let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
            let (x, f) = (x.clone(), f.clone());
            let coeff = ScalarField::new(w.dim, move |p| sign * x.eval(p)[i] * f.eval(p))?;
            let mut rest = key.clone();
            rest.remove(a);
            out.accumulate(rest, coeff)?;
        }
    }
    Ok(out)
}

fn partial_field(f: &ScalarField, j: usize, cfg: &FdConfig) -> Result<ScalarField> {
    let (f, cfg) = (f.clone(), *cfg);
    ScalarField::new(f.dim(), move |p| {
        let d = match f.analytic_grad(p) {
            Some(g) => Ok(g[j]),
            None => partial(&f, p, j, &cfg),
        };
        d.unwrap_or(f64::NAN)
    })
}

/// `dω` with finite-difference partials (analytic gradients are used when the
/// coefficients carry them). Non-finite values surface as `Error::Domain` on evaluation.
pub fn exterior_derivative(w: &DifferentialForm, cfg: &FdConfig) -> Result<DifferentialForm> {
    if w.degree >= w.dim {
        return Err(Error::Degree(format!("d of a degree-{} form on R^{}", w.degree, w.dim)));
    }
    let mut out = DifferentialForm::zero(w.dim, w.degree + 1)?;
    for (key, f) in &w.coeffs {
        for j in (0..w.dim).filter(|j| !key.contains(j)) {
            let pos = key.iter().filter(|&&i| i < j).count();
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            let mut new_key = key.clone();
            new_key.insert(pos, j);
            out.accumulate(new_key, partial_field(f, j, cfg)?.scale(sign))?;
        }
    }
    Ok(out)
}

/// `L_X ω = d(i_X ω) + i_X(dω)`; on functions this is `X . f`.
pub fn lie_derivative_cartan(x: &VectorField, w: &DifferentialForm, cfg: &FdConfig) -> Result<DifferentialForm> {
    check_dim(w.dim, x.dim())?;
    if w.degree == 0 {
        let f = w.coeffs[&Vec::new()].clone();
        let (x, cfg) = (x.clone(), *cfg);
        let lf = ScalarField::new(w.dim, move |p| match gradient(&f, p, &cfg) {
            Ok(g) => g.iter().zip(x.eval(p)).map(|(a, b)| a * b).sum(),
            Err(_) => f64::NAN,
        })?;
        return Ok(DifferentialForm::scalar(lf));
    }
    let first = exterior_derivative(&interior_product(x, w)?, cfg)?;
    if w.degree == w.dim {
        return Ok(first);
    }
    first.add(&interior_product(x, &exterior_derivative(w, cfg)?)?)
}

/// `d/dt (g_t^* ω)(p)(vs)` at `t = 0` by a central difference of width `dt`.
pub fn lie_derivative_flow(
    x: &VectorField,
    w: &DifferentialForm,
    p: &[f64],
    vs: &[Vec<f64>],
    dt: f64,
    cfg: &FdConfig,
) -> Result<f64> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Arg(format!("dt must be positive, got {dt}")));
    }
    let integ = Integrator::rk4(dt / 4.0)?;
    let plus = pullback_form(x, w, p, vs, dt, &integ, cfg).map_err(blowup_to_domain)?;
    let minus = pullback_form(x, w, p, vs, -dt, &integ, cfg).map_err(blowup_to_domain)?;
    Ok((plus - minus) / (2.0 * dt))
}

fn blowup_to_domain(e: Error) -> Error {
    match e {
        Error::Blowup { time, .. } => Error::Domain(format!("flow left the finite range at t = {time}")),
        other => other,
    }
}

/// Result of a nondegeneracy test on a 2-form.
#[derive(Debug, Clone)]
pub struct Nondegeneracy {
    pub nondegenerate: bool,
    /// Coefficient of `dx_1 ^ ... ^ dx_{2n}` in the wedge power `ω^n`.
    pub top_coefficient: f64,
    /// `top_coefficient / n!`.
    pub normalized_top: f64,
    pub gram: DMatrix<f64>,
    pub gram_det: f64,
}

/// Compute `ω^n` on R^{2n} and read off its single coefficient at `p`.
pub fn check_nondegenerate(w: &DifferentialForm, p: &[f64]) -> Result<Nondegeneracy> {
    if w.degree != 2 {
        return Err(Error::Degree(format!("expected a 2-form, got degree {}", w.degree)));
    }
    if !w.dim.is_multiple_of(2) {
        return Err(Error::BadDim(format!("odd dimension {}", w.dim)));
    }
    check_dim(w.dim, p.len())?;
    let n = w.dim / 2;
    let mut power = w.clone();
    for _ in 1..n {
        power = wedge(&power, w)?;
    }
    let top: Vec<usize> = (0..w.dim).collect();
    let top_coefficient = power.coefficient_at(&top, p)?;
    let factorial: f64 = (1..=n).map(|i| i as f64).product();
    let gram = w.gram(p)?;
    let gram_det = gram.clone().lu().determinant();
    Ok(Nondegeneracy {
        nondegenerate: top_coefficient.abs() > 1e-12,
        top_coefficient,
        normalized_top: top_coefficient / factorial,
        gram,
        gram_det,
    })
}
