//! Scalar and vector fields on R^m as pure evaluators, plus the central
//! finite-difference engine used for every derivative in the crate.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Finite-difference settings.
///
/// The step along coordinate `i` is `rel_step * max(1, |p_i|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    pub rel_step: f64,
    pub fd_tol: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        // cube root of f64 epsilon
        Self { rel_step: 6.06e-6, fd_tol: 1e-6 }
    }
}

impl FdConfig {
    pub fn new(rel_step: f64, fd_tol: f64) -> Result<Self> {
        if !(rel_step > 0.0 && rel_step.is_finite()) {
            return Err(Error::Arg(format!("rel_step must be positive, got {rel_step}")));
        }
        if !(fd_tol > 0.0 && fd_tol.is_finite()) {
            return Err(Error::Arg(format!("fd_tol must be positive, got {fd_tol}")));
        }
        Ok(Self { rel_step, fd_tol })
    }

    pub fn with_rel_step(rel_step: f64) -> Result<Self> {
        Self::new(rel_step, Self::default().fd_tol)
    }

    #[inline]
    pub fn step_at(&self, x: f64) -> f64 {
        self.rel_step * x.abs().max(1.0)
    }
}

/// A smooth function R^m -> R, optionally carrying its analytic gradient.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    eval: ScalarFn,
    grad: Option<VectorFn>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("analytic_grad", &self.grad.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new<F>(dim: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::BadDim("fields need m >= 1".into()));
        }
        Ok(Self { dim, eval: Arc::new(f), grad: None })
    }

    /// Attach an analytic gradient.
    pub fn with_grad<G>(mut self, g: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(g));
        self
    }

    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        Ok(Self::new(dim, move |_| c)?.with_grad(move |_| vec![0.0; dim]))
    }

    /// The coordinate function `x_i` (0-based).
    pub fn coordinate(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::Arg(format!("coordinate {i} out of range for m = {dim}")));
        }
        Ok(Self::new(dim, move |p| p[i])?.with_grad(move |_| {
            let mut g = vec![0.0; dim];
            g[i] = 1.0;
            g
        }))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn eval(&self, p: &[f64]) -> f64 {
        (self.eval)(p)
    }

    pub fn has_grad(&self) -> bool {
        self.grad.is_some()
    }

    pub fn analytic_grad(&self, p: &[f64]) -> Option<Vec<f64>> {
        self.grad.as_ref().map(|g| g(p))
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        check_dim(self.dim, other.dim)?;
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let mut out = ScalarField::new(self.dim, move |p| a(p) + b(p))?;
        if let (Some(ga), Some(gb)) = (self.grad.clone(), other.grad.clone()) {
            out = out.with_grad(move |p| ga(p).iter().zip(gb(p)).map(|(x, y)| x + y).collect());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.add(&other.scale(-1.0))
    }

    /// Pointwise product, with the product rule for the gradient.
    pub fn mul(&self, other: &ScalarField) -> Result<ScalarField> {
        check_dim(self.dim, other.dim)?;
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let mut out = ScalarField::new(self.dim, move |p| a(p) * b(p))?;
        if let (Some(ga), Some(gb)) = (self.grad.clone(), other.grad.clone()) {
            let (a, b) = (self.eval.clone(), other.eval.clone());
            out = out.with_grad(move |p| {
                let (va, vb) = (a(p), b(p));
                ga(p).iter().zip(gb(p)).map(|(x, y)| x * vb + va * y).collect()
            });
        }
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        let a = self.eval.clone();
        let grad = self.grad.clone().map(|g| -> VectorFn {
            Arc::new(move |p: &[f64]| g(p).into_iter().map(|x| c * x).collect())
        });
        ScalarField { dim: self.dim, eval: Arc::new(move |p| c * a(p)), grad }
    }
}

/// A vector field on R^m.
#[derive(Clone)]
pub struct VectorField {
    dim: usize,
    eval: VectorFn,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField").field("dim", &self.dim).finish()
    }
}

impl VectorField {
    pub fn new<F>(dim: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::BadDim("fields need m >= 1".into()));
        }
        Ok(Self { dim, eval: Arc::new(f) })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(dim, move |_| vec![0.0; dim])
    }

    /// Build from component scalar fields.
    pub fn from_components(components: Vec<ScalarField>) -> Result<Self> {
        let dim = components.len();
        for c in &components {
            check_dim(dim, c.dim())?;
        }
        Self::new(dim, move |p| components.iter().map(|c| c.eval(p)).collect())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn eval(&self, p: &[f64]) -> Vec<f64> {
        (self.eval)(p)
    }

    /// The field `f X`.
    pub fn scaled_by(&self, f: &ScalarField) -> Result<VectorField> {
        check_dim(self.dim, f.dim())?;
        let (x, f) = (self.eval.clone(), f.clone());
        VectorField::new(self.dim, move |p| {
            let s = f.eval(p);
            x(p).into_iter().map(|v| s * v).collect()
        })
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        check_dim(self.dim, other.dim)?;
        let (a, b) = (self.eval.clone(), other.eval.clone());
        VectorField::new(self.dim, move |p| a(p).iter().zip(b(p)).map(|(x, y)| x + y).collect())
    }

    pub fn scale(&self, c: f64) -> VectorField {
        let a = self.eval.clone();
        VectorField { dim: self.dim, eval: Arc::new(move |p| a(p).into_iter().map(|v| c * v).collect()) }
    }

    /// `-X`, the field whose flow runs this one backwards.
    pub fn reversed(&self) -> VectorField {
        self.scale(-1.0)
    }
}

fn finite_or(value: f64, what: &str, p: &[f64]) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain(format!("{what} evaluated to {value} near {p:?}")))
    }
}

/// Central difference of `f` along coordinate `j`.
pub fn partial(f: &ScalarField, p: &[f64], j: usize, cfg: &FdConfig) -> Result<f64> {
    check_dim(f.dim(), p.len())?;
    let h = cfg.step_at(p[j]);
    let mut q = p.to_vec();
    q[j] = p[j] + h;
    let fp = finite_or(f.eval(&q), "scalar field", &q)?;
    q[j] = p[j] - h;
    let fm = finite_or(f.eval(&q), "scalar field", &q)?;
    Ok((fp - fm) / (2.0 * h))
}

/// Gradient by central differences only, ignoring any analytic gradient.
pub fn central_gradient(f: &ScalarField, p: &[f64], cfg: &FdConfig) -> Result<Vec<f64>> {
    check_dim(f.dim(), p.len())?;
    finite_or(f.eval(p), "scalar field", p)?;
    (0..p.len()).map(|j| partial(f, p, j, cfg)).collect()
}

/// Gradient of `f` at `p`: the analytic one when supplied, otherwise central differences.
pub fn gradient(f: &ScalarField, p: &[f64], cfg: &FdConfig) -> Result<Vec<f64>> {
    check_dim(f.dim(), p.len())?;
    match f.analytic_grad(p) {
        Some(g) => {
            check_dim(f.dim(), g.len())?;
            for v in &g {
                finite_or(*v, "analytic gradient", p)?;
            }
            Ok(g)
        }
        None => central_gradient(f, p, cfg),
    }
}

/// Largest deviation between the analytic gradient and central differences over `probes`.
/// Returns `None` when the field carries no analytic gradient.
pub fn grad_mismatch(f: &ScalarField, probes: &[Vec<f64>], cfg: &FdConfig) -> Result<Option<f64>> {
    if !f.has_grad() {
        return Ok(None);
    }
    let mut worst = 0.0f64;
    for p in probes {
        let a = gradient(f, p, cfg)?;
        let n = central_gradient(f, p, cfg)?;
        for (x, y) in a.iter().zip(&n) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(Some(worst))
}

/// Jacobian `(i, j) = dX_i / dx_j` by central differences.
pub fn jacobian(x: &VectorField, p: &[f64], cfg: &FdConfig) -> Result<DMatrix<f64>> {
    let m = x.dim();
    check_dim(m, p.len())?;
    let mut jac = DMatrix::zeros(m, m);
    let mut q = p.to_vec();
    for j in 0..m {
        let h = cfg.step_at(p[j]);
        q[j] = p[j] + h;
        let fp = x.eval(&q);
        q[j] = p[j] - h;
        let fm = x.eval(&q);
        q[j] = p[j];
        check_dim(m, fp.len())?;
        check_dim(m, fm.len())?;
        for i in 0..m {
            let d = (fp[i] - fm[i]) / (2.0 * h);
            jac[(i, j)] = finite_or(d, "vector field", p)?;
        }
    }
    Ok(jac)
}

/// The Lie bracket `[X, Y] = DY X - DX Y`.
pub fn lie_bracket(x: &VectorField, y: &VectorField, cfg: &FdConfig) -> Result<VectorField> {
    check_dim(x.dim(), y.dim())?;
    let (x, y, cfg) = (x.clone(), y.clone(), *cfg);
    let m = x.dim();
    VectorField::new(m, move |p| {
        let (Ok(dx), Ok(dy)) = (jacobian(&x, p, &cfg), jacobian(&y, p, &cfg)) else {
            return vec![f64::NAN; m];
        };
        let xv = nalgebra::DVector::from_vec(x.eval(p));
        let yv = nalgebra::DVector::from_vec(y.eval(p));
        (dy * xv - dx * yv).iter().copied().collect()
    })
}

/// Reproducible uniform samples from the box `[-half_width, half_width]^dim`.
pub fn sample_box(dim: usize, count: usize, half_width: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_box_with(&mut rng, dim, count, half_width)
}

pub fn sample_box_with<R: Rng>(rng: &mut R, dim: usize, count: usize, half_width: f64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..dim).map(|_| rng.random_range(-half_width..=half_width)).collect())
        .collect()
}
