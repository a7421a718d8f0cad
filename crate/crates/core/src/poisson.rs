//! Poisson structures `J(x)`, brackets, Hamiltonian vector fields, the
//! Jacobi criterion and the probe-based Liouville audit.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::fields::{gradient, sample_box_with, FdConfig, ScalarField, VectorField};

pub type MatrixFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
/// `dj(p)[k]` is the matrix of partials `dJ_ij / dx_k`.
pub type MatrixDerivFn = Arc<dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync>;

/// A skew matrix field, optionally with analytic derivatives of its entries.
#[derive(Clone)]
pub struct PoissonStructure {
    dim: usize,
    j: MatrixFn,
    dj: Option<MatrixDerivFn>,
}

impl fmt::Debug for PoissonStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PoissonStructure")
            .field("dim", &self.dim)
            .field("analytic_dj", &self.dj.is_some())
            .finish()
    }
}

impl PoissonStructure {
    pub fn new<F>(dim: usize, j: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::BadDim("structures need m >= 1".into()));
        }
        Ok(Self { dim, j: Arc::new(j), dj: None })
    }

    pub fn with_derivatives<G>(mut self, dj: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync + 'static,
    {
        self.dj = Some(Arc::new(dj));
        self
    }

    /// A constant structure, with zero derivatives.
    pub fn constant(j: DMatrix<f64>) -> Result<Self> {
        if !j.is_square() {
            return Err(Error::Shape(format!("{}x{} matrix is not square", j.nrows(), j.ncols())));
        }
        let m = j.nrows();
        Ok(Self::new(m, move |_| j.clone())?.with_derivatives(move |_| vec![DMatrix::zeros(m, m); m]))
    }

    /// `[[0, I], [-I, 0]]` on R^{2n}, so that `q' = dH/dp` and `p' = -dH/dq`.
    pub fn canonical(n: usize) -> Result<Self> {
        let mut j = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(i, n + i)] = 1.0;
            j[(n + i, i)] = -1.0;
        }
        Self::constant(j)
    }

    /// A linear (Lie-Poisson) structure `J(x) = sum_k x_k A_k`, with exact derivatives `A_k`.
    pub fn linear(generators: Vec<DMatrix<f64>>) -> Result<Self> {
        let m = generators.len();
        for a in &generators {
            if a.nrows() != m || a.ncols() != m {
                return Err(Error::Shape(format!("generator is {}x{}, expected {m}x{m}", a.nrows(), a.ncols())));
            }
        }
        let gens = generators.clone();
        Ok(Self::new(m, move |x| {
            let mut j = DMatrix::zeros(m, m);
            for (xk, a) in x.iter().zip(&gens) {
                j += a * *xk;
            }
            j
        })?
        .with_derivatives(move |_| generators.clone()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_derivatives(&self) -> bool {
        self.dj.is_some()
    }

    pub fn matrix(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.dim, p.len())?;
        let j = (self.j)(p);
        if j.nrows() != self.dim || j.ncols() != self.dim {
            return Err(Error::Shape(format!("J is {}x{}, expected m = {}", j.nrows(), j.ncols(), self.dim)));
        }
        if j.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("J is not finite at {p:?}")));
        }
        Ok(j)
    }

    /// `dJ/dx_k` for every `k`, analytic when available.
    pub fn derivatives(&self, p: &[f64], cfg: &FdConfig) -> Result<Vec<DMatrix<f64>>> {
        check_dim(self.dim, p.len())?;
        if let Some(dj) = &self.dj {
            let d = dj(p);
            check_dim(self.dim, d.len())?;
            return Ok(d);
        }
        self.fd_derivatives(p, cfg)
    }

    /// `dJ/dx_k` by central differences, ignoring analytic derivatives.
    pub fn fd_derivatives(&self, p: &[f64], cfg: &FdConfig) -> Result<Vec<DMatrix<f64>>> {
        check_dim(self.dim, p.len())?;
        let mut q = p.to_vec();
        (0..self.dim)
            .map(|k| {
                let h = cfg.step_at(p[k]);
                q[k] = p[k] + h;
                let plus = self.matrix(&q)?;
                q[k] = p[k] - h;
                let minus = self.matrix(&q)?;
                q[k] = p[k];
                Ok((plus - minus) / (2.0 * h))
            })
            .collect()
    }

    /// `max |J + J^T|` at `p`.
    pub fn skew_residual(&self, p: &[f64]) -> Result<f64> {
        let j = self.matrix(p)?;
        Ok((&j + j.transpose()).amax())
    }
}

/// `{F, G}(p) = grad F^T J grad G`.
pub fn bracket_at(s: &PoissonStructure, f: &ScalarField, g: &ScalarField, p: &[f64], cfg: &FdConfig) -> Result<f64> {
    check_dim(s.dim(), f.dim())?;
    check_dim(s.dim(), g.dim())?;
    let j = s.matrix(p)?;
    let df = DVector::from_vec(gradient(f, p, cfg)?);
    let dg = DVector::from_vec(gradient(g, p, cfg)?);
    Ok(df.dot(&(j * dg)))
}

/// The bracket as a scalar field. Evaluation failures read as NaN.
pub fn poisson_bracket(s: &PoissonStructure, f: &ScalarField, g: &ScalarField, cfg: &FdConfig) -> Result<ScalarField> {
    check_dim(s.dim(), f.dim())?;
    check_dim(s.dim(), g.dim())?;
    let (s, f, g, cfg) = (s.clone(), f.clone(), g.clone(), *cfg);
    ScalarField::new(s.dim(), move |p| bracket_at(&s, &f, &g, p, &cfg).unwrap_or(f64::NAN))
}

/// `max_{i<j<l} |sum_k (J_kj dJ_li/dx_k + J_ki dJ_jl/dx_k + J_kl dJ_ij/dx_k)|`.
pub fn jacobi_residual(s: &PoissonStructure, p: &[f64], cfg: &FdConfig) -> Result<f64> {
    let j = s.matrix(p)?;
    let d = s.derivatives(p, cfg)?;
    Ok(jacobi_from_parts(&j, &d))
}

fn jacobi_from_parts(j: &DMatrix<f64>, d: &[DMatrix<f64>]) -> f64 {
    let m = j.nrows();
    let mut worst = 0.0f64;
    for i in 0..m {
        for jj in i + 1..m {
            for l in jj + 1..m {
                let mut sum = 0.0;
                for (k, dk) in d.iter().enumerate() {
                    sum += j[(k, jj)] * dk[(l, i)] + j[(k, i)] * dk[(jj, l)] + j[(k, l)] * dk[(i, jj)];
                }
                worst = worst.max(sum.abs());
            }
        }
    }
    worst
}

/// `{{H,F},G} + {{F,G},H} + {{G,H},F}` at `p`, by nested brackets.
pub fn bracket_jacobi_residual(
    s: &PoissonStructure,
    f: &ScalarField,
    g: &ScalarField,
    h: &ScalarField,
    p: &[f64],
    cfg: &FdConfig,
) -> Result<f64> {
    let hf = poisson_bracket(s, h, f, cfg)?;
    let fg = poisson_bracket(s, f, g, cfg)?;
    let gh = poisson_bracket(s, g, h, cfg)?;
    Ok(bracket_at(s, &hf, g, p, cfg)? + bracket_at(s, &fg, h, p, cfg)? + bracket_at(s, &gh, f, p, cfg)?)
}

/// A named scalar field.
#[derive(Debug, Clone)]
pub struct Named {
    pub name: String,
    pub field: ScalarField,
}

impl Named {
    pub fn new(name: impl Into<String>, field: ScalarField) -> Self {
        Self { name: name.into(), field }
    }
}

/// A Poisson structure with a Hamiltonian and declared conserved quantities, `m = 2n + k`.
#[derive(Debug, Clone)]
pub struct HamiltonianSystem {
    pub name: String,
    pub structure: PoissonStructure,
    pub hamiltonian: ScalarField,
    /// Declared first integrals, the Hamiltonian first.
    pub integrals: Vec<Named>,
    pub casimirs: Vec<Named>,
    pub n: usize,
    pub k: usize,
}

impl HamiltonianSystem {
    pub fn new(
        name: impl Into<String>,
        structure: PoissonStructure,
        hamiltonian: ScalarField,
        integrals: Vec<Named>,
        casimirs: Vec<Named>,
        n: usize,
        k: usize,
    ) -> Result<Self> {
        let m = structure.dim();
        if 2 * n + k != m {
            return Err(Error::BadDim(format!("2n + k = {} but m = {m}", 2 * n + k)));
        }
        check_dim(m, hamiltonian.dim())?;
        for f in integrals.iter().chain(&casimirs) {
            check_dim(m, f.field.dim())?;
        }
        Ok(Self { name: name.into(), structure, hamiltonian, integrals, casimirs, n, k })
    }

    pub fn dim(&self) -> usize {
        self.structure.dim()
    }

    /// Integrals followed by Casimirs.
    pub fn conserved(&self) -> Vec<Named> {
        self.integrals.iter().chain(&self.casimirs).cloned().collect()
    }

    pub fn vector_field(&self, cfg: &FdConfig) -> Result<VectorField> {
        hamiltonian_vector_field(self, cfg)
    }
}

/// `X_H(p) = J(p) grad H(p)`.
pub fn hamiltonian_vector_field(s: &HamiltonianSystem, cfg: &FdConfig) -> Result<VectorField> {
    structure_field(&s.structure, &s.hamiltonian, cfg)
}

/// `J grad H` for an arbitrary structure and function.
pub fn structure_field(s: &PoissonStructure, h: &ScalarField, cfg: &FdConfig) -> Result<VectorField> {
    check_dim(s.dim(), h.dim())?;
    let (s, h, cfg) = (s.clone(), h.clone(), *cfg);
    let m = s.dim();
    VectorField::new(m, move |p| {
        match (s.matrix(p), gradient(&h, p, &cfg)) {
            (Ok(j), Ok(g)) => (j * DVector::from_vec(g)).iter().copied().collect(),
            _ => vec![f64::NAN; m],
        }
    })
}

/// Check that `{H,F}` and `{H,G}` vanish at every probe, then return `max |{H,{F,G}}|`.
pub fn poisson_theorem_check(
    s: &HamiltonianSystem,
    f: &ScalarField,
    g: &ScalarField,
    probes: &[Vec<f64>],
    tol: f64,
    cfg: &FdConfig,
) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::Arg("no probes".into()));
    }
    let h = &s.hamiltonian;
    let fg = poisson_bracket(&s.structure, f, g, cfg)?;
    let mut worst = 0.0f64;
    for (i, p) in probes.iter().enumerate() {
        for (label, x) in [("F", f), ("G", g)] {
            let v = bracket_at(&s.structure, h, x, p, cfg)?;
            if v.abs() >= tol {
                return Err(Error::Precondition { probe: i, reason: format!("{{H,{label}}} = {v:e} at {p:?}") });
            }
        }
        worst = worst.max(bracket_at(&s.structure, h, &fg, p, cfg)?.abs());
    }
    Ok(worst)
}

/// Thresholds for [`audit`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AuditConfig {
    pub skew_tol: f64,
    pub jacobi_tol: f64,
    pub casimir_tol: f64,
    pub involution_tol: f64,
    /// Singular values above `rank_rel * sigma_max` count towards the rank.
    pub rank_rel: f64,
    /// Half-width of the box replacement probes are drawn from.
    pub box_half_width: f64,
    pub seed: u64,
    #[serde(skip)]
    pub fd: FdConfig,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            skew_tol: 1e-12,
            jacobi_tol: 1e-8,
            casimir_tol: 1e-8,
            involution_tol: 1e-8,
            rank_rel: 1e-8,
            box_half_width: 2.0,
            seed: 0,
            fd: FdConfig::default(),
        }
    }
}

pub const VERDICT_INTEGRABLE: &str = "liouville-integrable-at-probes";
pub const VERDICT_NOT_CERTIFIED: &str = "not-certified";
pub const VERDICT_NONE: &str = "no-verdict";

/// Outcome of [`audit`]. Residuals are worst cases over probes; the Jacobi,
/// Casimir and involution residuals are relative to `1 + |terms|`.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub system: String,
    pub dim: usize,
    pub n: usize,
    pub k: usize,
    pub probes: usize,
    pub resampled: usize,
    pub skew_ok: bool,
    pub max_skew: f64,
    pub jacobi_ok: bool,
    pub max_jacobi: f64,
    pub casimirs_ok: bool,
    pub max_casimir: f64,
    pub involution_ok: bool,
    pub integral_names: Vec<String>,
    /// `involution_matrix[i][j] = max |{H_i, H_j}|` over probes.
    pub involution_matrix: Vec<Vec<f64>>,
    pub independence_ok: bool,
    pub min_rank: usize,
    pub expected_rank: usize,
    pub verdict: String,
}

impl AuditReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Rank by singular values: count of `sigma > rel * sigma_max`.
pub fn numerical_rank(a: &DMatrix<f64>, rel: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel * max).count()
}

fn gradient_matrix(fs: &[Named], p: &[f64], cfg: &FdConfig) -> Result<DMatrix<f64>> {
    let m = p.len();
    let mut a = DMatrix::zeros(fs.len(), m);
    for (r, f) in fs.iter().enumerate() {
        for (c, v) in gradient(&f.field, p, cfg)?.into_iter().enumerate() {
            a[(r, c)] = v;
        }
    }
    Ok(a)
}

/// Probe-based check of the Liouville hypotheses: skewness, Jacobi, Casimirs,
/// pairwise involution of the integrals and independence of integrals plus Casimirs.
/// A probe where the gradients lose rank is replaced once by a fresh random point.
pub fn audit(s: &HamiltonianSystem, probes: &[Vec<f64>], cfg: &AuditConfig) -> Result<AuditReport> {
    if probes.is_empty() {
        return Err(Error::Arg("audit needs at least one probe".into()));
    }
    let m = s.dim();
    for p in probes {
        check_dim(m, p.len())?;
    }
    let fd = &cfg.fd;
    let functions = s.conserved();
    let ni = s.integrals.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_a0d1);

    let mut max_skew = 0.0f64;
    let mut max_jacobi = 0.0f64;
    let mut max_casimir = 0.0f64;
    let mut max_inv_rel = 0.0f64;
    let mut inv = vec![vec![0.0f64; ni]; ni];
    let mut min_rank = usize::MAX;
    let mut resampled = 0;

    for p0 in probes {
        let mut p = p0.clone();
        let mut rank = numerical_rank(&gradient_matrix(&functions, &p, fd)?, cfg.rank_rel);
        if rank < functions.len() {
            let fresh = sample_box_with(&mut rng, m, 1, cfg.box_half_width).remove(0);
            let r2 = numerical_rank(&gradient_matrix(&functions, &fresh, fd)?, cfg.rank_rel);
            resampled += 1;
            p = fresh;
            rank = r2;
        }
        min_rank = min_rank.min(rank);

        let j = s.structure.matrix(&p)?;
        let jnorm = j.amax();
        max_skew = max_skew.max((&j + j.transpose()).amax());

        let d = s.structure.derivatives(&p, fd)?;
        let dnorm = d.iter().fold(0.0f64, |a, x| a.max(x.amax()));
        max_jacobi = max_jacobi.max(jacobi_from_parts(&j, &d) / (1.0 + m as f64 * jnorm * dnorm));

        for c in &s.casimirs {
            let g = DVector::from_vec(gradient(&c.field, &p, fd)?);
            let r = (&j * &g).amax() / (1.0 + m as f64 * jnorm * g.amax());
            max_casimir = max_casimir.max(r);
        }

        let grads = s
            .integrals
            .iter()
            .map(|f| gradient(&f.field, &p, fd).map(DVector::from_vec))
            .collect::<Result<Vec<_>>>()?;
        for a in 0..ni {
            for b in 0..ni {
                let v = grads[a].dot(&(&j * &grads[b])).abs();
                inv[a][b] = inv[a][b].max(v);
                let scale = 1.0 + grads[a].norm() * jnorm * m as f64 * grads[b].norm();
                max_inv_rel = max_inv_rel.max(v / scale);
            }
        }
    }

    let skew_ok = max_skew <= cfg.skew_tol;
    let jacobi_ok = max_jacobi <= cfg.jacobi_tol;
    let casimirs_ok = max_casimir <= cfg.casimir_tol;
    let involution_ok = max_inv_rel <= cfg.involution_tol;
    let independence_ok = min_rank == functions.len();
    let expected_rank = s.n + s.k;
    let verdict = if functions.len() < expected_rank {
        VERDICT_NONE
    } else if skew_ok && jacobi_ok && casimirs_ok && involution_ok && independence_ok && min_rank == expected_rank {
        VERDICT_INTEGRABLE
    } else {
        VERDICT_NOT_CERTIFIED
    };
    Ok(AuditReport {
        system: s.name.clone(),
        dim: m,
        n: s.n,
        k: s.k,
        probes: probes.len(),
        resampled,
        skew_ok,
        max_skew,
        jacobi_ok,
        max_jacobi,
        casimirs_ok,
        max_casimir,
        involution_ok,
        integral_names: s.integrals.iter().map(|f| f.name.clone()).collect(),
        involution_matrix: inv,
        independence_ok,
        min_rank,
        expected_rank,
        verdict: verdict.to_string(),
    })
}

/// Rank and spectrum of `J(p)`.
#[derive(Debug, Clone)]
pub struct EigenReport {
    pub rank: usize,
    pub eigenvalues: Vec<Complex64>,
    pub even_rank: bool,
    /// Every eigenvalue above the rank threshold has `|Re| <= 1e-8 |Im|`.
    pub imaginary_ok: bool,
}

pub fn eigen_structure(s: &PoissonStructure, p: &[f64]) -> Result<EigenReport> {
    let j = s.matrix(p)?;
    let rank = numerical_rank(&j, 1e-8);
    let eigenvalues: Vec<Complex64> = j.complex_eigenvalues().iter().copied().collect();
    let cutoff = 1e-8 * j.clone().svd(false, false).singular_values.max();
    let imaginary_ok = eigenvalues
        .iter()
        .filter(|z| z.norm() > cutoff)
        .all(|z| z.re.abs() <= 1e-8 * z.im.abs());
    Ok(EigenReport { rank, eigenvalues, even_rank: rank.is_multiple_of(2), imaginary_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::sample_box;

    fn hat_structure() -> PoissonStructure {
        PoissonStructure::new(3, |m| {
            DMatrix::from_row_slice(3, 3, &[0.0, -m[2], m[1], m[2], 0.0, -m[0], -m[1], m[0], 0.0])
        })
        .unwrap()
    }

    fn coord(m: usize, i: usize) -> ScalarField {
        ScalarField::coordinate(m, i).unwrap()
    }

    #[test]
    fn canonical_brackets() {
        let s = PoissonStructure::canonical(2).unwrap();
        let cfg = FdConfig::default();
        let p = [0.3, 0.1, -0.2, 0.5];
        let (q1, q2, p1) = (coord(4, 0), coord(4, 1), coord(4, 2));
        assert_eq!(bracket_at(&s, &q1, &p1, &p, &cfg).unwrap(), 1.0);
        assert_eq!(bracket_at(&s, &p1, &q1, &p, &cfg).unwrap(), -1.0);
        assert_eq!(bracket_at(&s, &q1, &q2, &p, &cfg).unwrap(), 0.0);
        assert_eq!(bracket_at(&s, &q1, &q1, &p, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn so3_bracket_at_pole() {
        let s = hat_structure();
        let v = bracket_at(&s, &coord(3, 0), &coord(3, 1), &[0.0, 0.0, 1.0], &FdConfig::default()).unwrap();
        assert_eq!(v, -1.0);
    }

    #[test]
    fn constant_structure_has_zero_jacobi() {
        let s = PoissonStructure::canonical(3).unwrap();
        assert_eq!(jacobi_residual(&s, &[0.1; 6], &FdConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn so3_jacobi_by_differences() {
        let s = hat_structure();
        for p in sample_box(3, 50, 2.0, 8) {
            assert!(jacobi_residual(&s, &p, &FdConfig::default()).unwrap() < 1e-10);
        }
    }

    #[test]
    fn even_rank_examples() {
        let r = eigen_structure(&PoissonStructure::canonical(2).unwrap(), &[0.0; 4]).unwrap();
        assert_eq!(r.rank, 4);
        assert!(r.imaginary_ok);
        assert!(r.eigenvalues.iter().all(|z| (z.im.abs() - 1.0).abs() < 1e-12));

        let r = eigen_structure(&hat_structure(), &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(r.rank, 2);
        let mut ims: Vec<f64> = r.eigenvalues.iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] + 3f64.sqrt()).abs() < 1e-12 && ims[1].abs() < 1e-12 && (ims[2] - 3f64.sqrt()).abs() < 1e-12);

        assert_eq!(eigen_structure(&hat_structure(), &[0.0; 3]).unwrap().rank, 0);
    }

    #[test]
    fn dimension_bookkeeping() {
        let s = PoissonStructure::canonical(1).unwrap();
        let h = ScalarField::constant(2, 0.0).unwrap();
        assert!(HamiltonianSystem::new("x", s, h, vec![], vec![], 2, 0).is_err());
    }

    #[test]
    fn audit_rejects_empty_probes() {
        let s = PoissonStructure::canonical(1).unwrap();
        let h = ScalarField::new(2, |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let sys = HamiltonianSystem::new("osc", s, h.clone(), vec![Named::new("H", h)], vec![], 1, 0).unwrap();
        assert!(matches!(audit(&sys, &[], &AuditConfig::default()), Err(Error::Arg(_))));
    }

    #[test]
    fn rank_of_zero_matrix() {
        assert_eq!(numerical_rank(&DMatrix::zeros(3, 3), 1e-8), 0);
    }
}
