#![allow(dead_code)]

use geomech::exterior::DifferentialForm;
use geomech::{ScalarField, VectorField};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A sparse polynomial: coefficient and exponent vector per term.
#[derive(Debug, Clone)]
pub struct Poly {
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl Poly {
    pub fn random(rng: &mut ChaCha8Rng, m: usize, max_degree: u32, n_terms: usize) -> Self {
        let terms = (0..n_terms)
            .map(|_| {
                let mut exps = vec![0u32; m];
                let deg = rng.random_range(0..=max_degree);
                for _ in 0..deg {
                    exps[rng.random_range(0..m)] += 1;
                }
                (rng.random_range(-1.0..1.0), exps)
            })
            .collect();
        Self { terms }
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * e.iter().zip(p).map(|(k, x)| x.powi(*k as i32)).product::<f64>())
            .sum()
    }

    /// Exact partial derivatives, as an oracle for finite differences.
    pub fn grad(&self, p: &[f64]) -> Vec<f64> {
        (0..p.len())
            .map(|j| {
                self.terms
                    .iter()
                    .filter(|(_, e)| e[j] > 0)
                    .map(|(c, e)| {
                        let rest: f64 = e
                            .iter()
                            .enumerate()
                            .map(|(i, k)| if i == j { p[i].powi(*k as i32 - 1) } else { p[i].powi(*k as i32) })
                            .product();
                        c * e[j] as f64 * rest
                    })
                    .sum()
            })
            .collect()
    }

    /// Scalar field evaluated by the polynomial, without an analytic gradient.
    pub fn field(&self, m: usize) -> ScalarField {
        let me = self.clone();
        ScalarField::new(m, move |p| me.eval(p)).unwrap()
    }
}

pub fn random_scalar(rng: &mut ChaCha8Rng, m: usize, deg: u32) -> ScalarField {
    Poly::random(rng, m, deg, 5).field(m)
}

pub fn random_vector_field(rng: &mut ChaCha8Rng, m: usize, deg: u32) -> VectorField {
    VectorField::from_components((0..m).map(|_| random_scalar(rng, m, deg)).collect()).unwrap()
}

/// A k-form with random polynomial coefficients on every increasing k-tuple.
pub fn random_form(rng: &mut ChaCha8Rng, m: usize, k: usize, deg: u32) -> DifferentialForm {
    let terms = tuples(m, k).into_iter().map(|t| (t, random_scalar(rng, m, deg))).collect();
    DifferentialForm::from_terms(m, k, terms).unwrap()
}

pub fn tuples(m: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for t in tuples(m, k - 1) {
        let start = t.last().map_or(0, |l| l + 1);
        for i in start..m {
            let mut u = t.clone();
            u.push(i);
            out.push(u);
        }
    }
    out
}

pub fn random_point(rng: &mut ChaCha8Rng, m: usize, half: f64) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(-half..half)).collect()
}

pub fn random_vectors(rng: &mut ChaCha8Rng, m: usize, k: usize) -> Vec<Vec<f64>> {
    (0..k).map(|_| random_point(rng, m, 1.0)).collect()
}

/// Determinant by Laplace expansion, independent of the library's own.
pub fn laplace_det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    if n == 0 {
        return 1.0;
    }
    if n == 1 {
        return a[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<f64>> = a[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| *v).collect())
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * a[0][j] * laplace_det(&minor)
        })
        .sum()
}

/// Value of a form by the determinant oracle: coefficients times Laplace minors.
pub fn oracle_value(w: &DifferentialForm, p: &[f64], vs: &[Vec<f64>]) -> f64 {
    w.terms()
        .map(|(key, f)| {
            let minor: Vec<Vec<f64>> = key.iter().map(|&r| vs.iter().map(|v| v[r]).collect()).collect();
            f.eval(p) * laplace_det(&minor)
        })
        .sum()
}
