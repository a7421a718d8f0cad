//! Ready-made Hamiltonian systems with analytic structures, gradients and
//! declared conserved quantities.
//!
//! | name | coordinates |
//! |------|-------------|
//! | `canonical` | `(q_1..q_n, p_1..p_n)` |
//! | `harmonic` | `(q_1..q_n, p_1..p_n)` |
//! | `henon-heiles` | `(y_1, y_2, x_1, x_2)` |
//! | `euler-top` | `(m_1, m_2, m_3)` |
//! | `so4-geodesic` | `(x_1..x_6)` |
//! | `kowalewski` | `(m_1, m_2, m_3, g_1, g_2, g_3)` |
//! | `clebsch` | `(p_1, p_2, p_3, l_1, l_2, l_3)` |
//! | `yang-mills` | `(y_1, y_2, x_1, x_2)` |
//! | `yang-mills-qp` | `(q_1, q_2, p_1, p_2)` |

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use serde::Serialize;

use crate::coadjoint::hat;
use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::poisson::{HamiltonianSystem, Named, PoissonStructure};

pub const NAMES: [&str; 9] = [
    "canonical",
    "harmonic",
    "henon-heiles",
    "euler-top",
    "so4-geodesic",
    "kowalewski",
    "clebsch",
    "yang-mills",
    "yang-mills-qp",
];

/// Tolerance on the Clebsch parameter condition.
pub const CLEBSCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct ParamInfo {
    pub name: String,
    pub default: f64,
}

/// Registry listing entry.
#[derive(Debug, Clone, Serialize)]
pub struct SystemInfo {
    pub name: String,
    pub description: String,
    pub coordinates: Vec<String>,
    pub dim: usize,
    pub n: usize,
    pub k: usize,
    pub params: Vec<ParamInfo>,
    pub integrals: Vec<String>,
    pub casimirs: Vec<String>,
    pub reference_initial_conditions: Vec<Vec<f64>>,
}

fn sf<F, G>(dim: usize, f: F, g: G) -> ScalarField
where
    F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
{
    ScalarField::new(dim, f).expect("catalog dimensions are positive").with_grad(g)
}

fn hat_dm(a: [f64; 3]) -> DMatrix<f64> {
    let h = hat(a).0;
    DMatrix::from_fn(3, 3, |i, j| h[(i, j)])
}

fn unit(k: usize) -> [f64; 3] {
    let mut e = [0.0; 3];
    e[k] = 1.0;
    e
}

/// A 6x6 matrix from four 3x3 blocks.
fn blocks(tl: &DMatrix<f64>, tr: &DMatrix<f64>, bl: &DMatrix<f64>, br: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(6, 6);
    m.view_mut((0, 0), (3, 3)).copy_from(tl);
    m.view_mut((0, 3), (3, 3)).copy_from(tr);
    m.view_mut((3, 0), (3, 3)).copy_from(bl);
    m.view_mut((3, 3), (3, 3)).copy_from(br);
    m
}

/// Resolved parameter values, with defaults filled in and unknown names rejected.
struct Params {
    values: BTreeMap<String, f64>,
}

impl Params {
    fn resolve(system: &str, defaults: &[(String, f64)], overrides: &[(String, f64)]) -> Result<Self> {
        let mut values: BTreeMap<String, f64> = defaults.iter().cloned().collect();
        for (k, v) in overrides {
            if !values.contains_key(k) {
                let known: Vec<&str> = defaults.iter().map(|(n, _)| n.as_str()).collect();
                return Err(Error::Param(format!("`{system}` has no parameter `{k}` (known: {known:?})")));
            }
            if !v.is_finite() {
                return Err(Error::Param(format!("parameter `{k}` = {v} is not finite")));
            }
            values.insert(k.clone(), *v);
        }
        Ok(Self { values })
    }

    fn get(&self, k: &str) -> f64 {
        self.values[k]
    }

    fn triple(&self, prefix: &str) -> [f64; 3] {
        [1, 2, 3].map(|i| self.get(&format!("{prefix}{i}")))
    }
}

fn size_param(system: &str, overrides: &[(String, f64)]) -> Result<usize> {
    let n = overrides.iter().rev().find(|(k, _)| k == "n").map_or(2.0, |(_, v)| *v);
    if n < 1.0 || n.fract() != 0.0 || n > 64.0 {
        return Err(Error::Param(format!("`{system}` needs an integer n in 1..=64, got {n}")));
    }
    Ok(n as usize)
}

fn defaults(name: &str, overrides: &[(String, f64)]) -> Result<Vec<(String, f64)>> {
    let p = |k: &str, v: f64| (k.to_string(), v);
    Ok(match name {
        "canonical" => vec![p("n", 2.0)],
        "harmonic" => {
            let n = size_param(name, overrides)?;
            std::iter::once(p("n", 2.0)).chain((1..=n).map(|j| p(&format!("lambda{j}"), j as f64 / 2.0))).collect()
        }
        "henon-heiles" => vec![p("A", 1.0), p("B", 1.0), p("epsilon", -1.0)],
        "euler-top" => vec![p("lambda1", 1.0), p("lambda2", 2.0), p("lambda3", 3.0)],
        "so4-geodesic" => (1..=6).map(|j| p(&format!("lambda{j}"), j as f64)).collect(),
        "clebsch" => vec![
            p("a1", 1.0),
            p("a2", 2.0),
            p("a3", 3.0),
            p("b1", 1.0),
            p("b2", 0.5),
            p("b3", 1.0 / 3.0),
        ],
        "kowalewski" | "yang-mills" | "yang-mills-qp" => vec![],
        other => return Err(Error::Lookup(other.to_string())),
    })
}

fn kowalewski_reference() -> Vec<f64> {
    let g = [0.9f64, 0.1, 0.2];
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    vec![0.1, 0.2, 0.3, g[0] / norm, g[1] / norm, g[2] / norm]
}

/// Reference initial conditions for `name` under the given parameters.
pub fn reference_initial_conditions(name: &str, overrides: &[(String, f64)]) -> Result<Vec<Vec<f64>>> {
    Ok(match name {
        "canonical" | "harmonic" => {
            let n = size_param(name, overrides)?;
            let q = (1..=n).map(|j| 1.0 / j as f64);
            let p = (1..=n).map(|j| 0.3 * (j as f64 - 1.0));
            vec![q.chain(p).collect()]
        }
        "henon-heiles" => vec![vec![0.1, -0.1, 0.2, 0.1]],
        "euler-top" => vec![vec![1.0, 0.0, 0.5], vec![1.0, 0.5, 0.25]],
        "so4-geodesic" => vec![vec![0.3, 0.2, 0.1, 0.4, 0.5, 0.6]],
        "kowalewski" => vec![kowalewski_reference()],
        "clebsch" => vec![vec![0.3, -0.2, 0.5, 0.4, 0.1, -0.6]],
        "yang-mills" => vec![vec![1.0, 0.0, 0.0, 1.0]],
        "yang-mills-qp" => vec![vec![1.0, 0.5, 0.0, 0.2]],
        other => return Err(Error::Lookup(other.to_string())),
    })
}

fn describe(name: &str) -> (&'static str, Vec<String>) {
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    match name {
        "canonical" => ("free particle under the canonical structure", vec![]),
        "harmonic" => ("uncoupled oscillators H_j = p_j^2/2 + lambda_j q_j^2", vec![]),
        "henon-heiles" => ("Henon-Heiles potential", s(&["y1", "y2", "x1", "x2"])),
        "euler-top" => ("free rigid body on so(3)*", s(&["m1", "m2", "m3"])),
        "so4-geodesic" => ("geodesic flow on SO(4), diagonal metric", s(&["x1", "x2", "x3", "x4", "x5", "x6"])),
        "kowalewski" => ("Kowalewski top, time rescaled by 2", s(&["m1", "m2", "m3", "g1", "g2", "g3"])),
        "clebsch" => ("Clebsch case of the Kirchhoff equations", s(&["p1", "p2", "p3", "l1", "l2", "l3"])),
        "yang-mills" => ("reduced SU(2) Yang-Mills, quartic central potential", s(&["y1", "y2", "x1", "x2"])),
        "yang-mills-qp" => ("reduced SU(2) Yang-Mills before the linear change of variables", s(&["q1", "q2", "p1", "p2"])),
        _ => ("", vec![]),
    }
}

fn qp_names(n: usize) -> Vec<String> {
    (1..=n).map(|j| format!("q{j}")).chain((1..=n).map(|j| format!("p{j}"))).collect()
}

/// Listing entry for `name` with default parameters.
pub fn info(name: &str) -> Result<SystemInfo> {
    let sys = get(name, &[])?;
    let defaults = defaults(name, &[])?;
    let (description, mut coordinates) = describe(name);
    if coordinates.is_empty() {
        coordinates = qp_names(sys.n);
    }
    Ok(SystemInfo {
        name: name.to_string(),
        description: description.to_string(),
        coordinates,
        dim: sys.dim(),
        n: sys.n,
        k: sys.k,
        params: defaults.into_iter().map(|(name, default)| ParamInfo { name, default }).collect(),
        integrals: sys.integrals.iter().map(|f| f.name.clone()).collect(),
        casimirs: sys.casimirs.iter().map(|f| f.name.clone()).collect(),
        reference_initial_conditions: reference_initial_conditions(name, &[])?,
    })
}

pub fn list() -> Vec<SystemInfo> {
    NAMES.iter().map(|n| info(n).expect("registered systems build with defaults")).collect()
}

pub fn registry_json() -> String {
    serde_json::to_string_pretty(&list()).expect("listing serializes")
}

/// Build a registered system. `params` override the defaults by name.
pub fn get(name: &str, params: &[(String, f64)]) -> Result<HamiltonianSystem> {
    let defaults = defaults(name, params)?;
    let p = Params::resolve(name, &defaults, params)?;
    match name {
        "canonical" => canonical(size_param(name, params)?),
        "harmonic" => {
            let n = size_param(name, params)?;
            harmonic(&(1..=n).map(|j| p.get(&format!("lambda{j}"))).collect::<Vec<_>>())
        }
        "henon-heiles" => henon_heiles(p.get("A"), p.get("B"), p.get("epsilon")),
        "euler-top" => euler_top(p.triple("lambda")),
        "so4-geodesic" => {
            let l: Vec<f64> = (1..=6).map(|j| p.get(&format!("lambda{j}"))).collect();
            so4_geodesic(l.try_into().expect("six parameters"))
        }
        "kowalewski" => kowalewski(),
        "clebsch" => clebsch(p.triple("a"), p.triple("b")),
        "yang-mills" => yang_mills(),
        "yang-mills-qp" => yang_mills_qp(),
        other => Err(Error::Lookup(other.to_string())),
    }
}

/// Look up a system with default parameters.
pub fn get_default(name: &str) -> Result<HamiltonianSystem> {
    get(name, &[])
}

/// `H = |p|^2 / 2` with integrals `H, p_2, .., p_n`.
pub fn canonical(n: usize) -> Result<HamiltonianSystem> {
    let m = 2 * n;
    let h = sf(m, move |x| 0.5 * x[n..].iter().map(|v| v * v).sum::<f64>(), move |x| {
        let mut g = vec![0.0; m];
        g[n..].copy_from_slice(&x[n..]);
        g
    });
    let mut integrals = vec![Named::new("H", h.clone())];
    for j in 1..n {
        integrals.push(Named::new(format!("p{}", j + 1), ScalarField::coordinate(m, n + j)?));
    }
    HamiltonianSystem::new("canonical", PoissonStructure::canonical(n)?, h, integrals, vec![], n, 0)
}

/// `H = sum_j (p_j^2 / 2 + lambda_j q_j^2)`, integrals the individual terms.
pub fn harmonic(lambda: &[f64]) -> Result<HamiltonianSystem> {
    let n = lambda.len();
    if n == 0 {
        return Err(Error::Param("harmonic needs at least one oscillator".into()));
    }
    let m = 2 * n;
    let term = |j: usize, l: f64| {
        sf(m, move |x| 0.5 * x[n + j] * x[n + j] + l * x[j] * x[j], move |x| {
            let mut g = vec![0.0; m];
            g[j] = 2.0 * l * x[j];
            g[n + j] = x[n + j];
            g
        })
    };
    let integrals: Vec<Named> = lambda.iter().enumerate().map(|(j, &l)| Named::new(format!("H{}", j + 1), term(j, l))).collect();
    let mut h = integrals[0].field.clone();
    for f in &integrals[1..] {
        h = h.add(&f.field)?;
    }
    HamiltonianSystem::new("harmonic", PoissonStructure::canonical(n)?, h, integrals, vec![], n, 0)
}

pub fn henon_heiles(a: f64, b: f64, eps: f64) -> Result<HamiltonianSystem> {
    let h = sf(
        4,
        move |x| {
            let (y1, y2, x1, x2) = (x[0], x[1], x[2], x[3]);
            0.5 * (x1 * x1 + x2 * x2 + a * y1 * y1 + b * y2 * y2) + y1 * y1 * y2 + eps / 3.0 * y2 * y2 * y2
        },
        move |x| {
            let (y1, y2, x1, x2) = (x[0], x[1], x[2], x[3]);
            vec![a * y1 + 2.0 * y1 * y2, b * y2 + y1 * y1 + eps * y2 * y2, x1, x2]
        },
    );
    HamiltonianSystem::new("henon-heiles", PoissonStructure::canonical(2)?, h.clone(), vec![Named::new("H", h)], vec![], 2, 0)
}

/// `J(m) = hat(m)`.
pub fn so3_structure() -> Result<PoissonStructure> {
    PoissonStructure::linear((0..3).map(|k| hat_dm(unit(k))).collect())
}

/// `J = [[hat(x_123), hat(x_456)], [hat(x_456), hat(x_123)]]`.
pub fn so4_structure() -> Result<PoissonStructure> {
    let z = DMatrix::zeros(3, 3);
    let gens = (0..6)
        .map(|k| {
            if k < 3 {
                let a = hat_dm(unit(k));
                blocks(&a, &z, &z, &a)
            } else {
                let b = hat_dm(unit(k - 3));
                blocks(&z, &b, &b, &z)
            }
        })
        .collect();
    PoissonStructure::linear(gens)
}

/// `J = [[hat(m), hat(g)], [hat(g), 0]]`.
pub fn kowalewski_structure() -> Result<PoissonStructure> {
    let z = DMatrix::zeros(3, 3);
    let gens = (0..6)
        .map(|k| {
            if k < 3 {
                blocks(&hat_dm(unit(k)), &z, &z, &z)
            } else {
                let b = hat_dm(unit(k - 3));
                blocks(&z, &b, &b, &z)
            }
        })
        .collect();
    PoissonStructure::linear(gens)
}

/// `J = [[0, hat(p)], [hat(p), hat(l)]]`.
pub fn clebsch_structure() -> Result<PoissonStructure> {
    let z = DMatrix::zeros(3, 3);
    let gens = (0..6)
        .map(|k| {
            if k < 3 {
                let a = hat_dm(unit(k));
                blocks(&z, &a, &a, &z)
            } else {
                blocks(&z, &z, &z, &hat_dm(unit(k - 3)))
            }
        })
        .collect();
    PoissonStructure::linear(gens)
}

/// Diagonal quadratic form `sum_i w_i x_i^2 / 2`.
fn diag_quadratic(w: Vec<f64>) -> ScalarField {
    let dim = w.len();
    let w2 = w.clone();
    sf(
        dim,
        move |x| 0.5 * x.iter().zip(&w).map(|(v, l)| l * v * v).sum::<f64>(),
        move |x| x.iter().zip(&w2).map(|(v, l)| l * v).collect(),
    )
}

/// `sum_i x_{a+i} x_{b+i}` for `i` in 0..3.
fn pairing(dim: usize, a: usize, b: usize) -> ScalarField {
    sf(dim, move |x| (0..3).map(|i| x[a + i] * x[b + i]).sum(), move |x| {
        let mut g = vec![0.0; dim];
        for i in 0..3 {
            g[a + i] += x[b + i];
            g[b + i] += x[a + i];
        }
        g
    })
}

/// `H_1 = (l_1 m_1^2 + l_2 m_2^2 + l_3 m_3^2) / 2`, Casimir `H_2 = |m|^2 / 2`.
pub fn euler_top(lambda: [f64; 3]) -> Result<HamiltonianSystem> {
    let h = diag_quadratic(lambda.to_vec());
    let c = diag_quadratic(vec![1.0; 3]);
    HamiltonianSystem::new("euler-top", so3_structure()?, h.clone(), vec![Named::new("H1", h)], vec![Named::new("H2", c)], 1, 1)
}

/// Casimirs `|x|^2 / 2` and `x_1 x_4 + x_2 x_5 + x_3 x_6`.
pub fn so4_geodesic(lambda: [f64; 6]) -> Result<HamiltonianSystem> {
    let h = diag_quadratic(lambda.to_vec());
    let casimirs = vec![Named::new("C1", diag_quadratic(vec![1.0; 6])), Named::new("C2", pairing(6, 0, 3))];
    HamiltonianSystem::new("so4-geodesic", so4_structure()?, h.clone(), vec![Named::new("H", h)], casimirs, 2, 2)
}

/// `|((m_1 + i m_2)/2)^2 - (g_1 + i g_2)|^2` in real form.
pub fn kowalewski_h4() -> ScalarField {
    let uv = |x: &[f64]| (0.25 * (x[0] * x[0] - x[1] * x[1]) - x[3], 0.5 * x[0] * x[1] - x[4]);
    sf(
        6,
        move |x| {
            let (u, v) = uv(x);
            u * u + v * v
        },
        move |x| {
            let (u, v) = uv(x);
            vec![u * x[0] + v * x[1], -u * x[1] + v * x[0], 0.0, -2.0 * u, -2.0 * v, 0.0]
        },
    )
}

/// The same integral from its complex product, as an independent evaluation.
pub fn kowalewski_h4_complex(x: &[f64]) -> f64 {
    let z = Complex64::new(x[0], x[1]) / 2.0;
    let w = Complex64::new(x[0], -x[1]) / 2.0;
    ((z * z - Complex64::new(x[3], x[4])) * (w * w - Complex64::new(x[3], -x[4]))).re
}

pub fn kowalewski() -> Result<HamiltonianSystem> {
    let h1 = sf(
        6,
        |x| 0.5 * (x[0] * x[0] + x[1] * x[1]) + x[2] * x[2] + 2.0 * x[3],
        |x| vec![x[0], x[1], 2.0 * x[2], 2.0, 0.0, 0.0],
    );
    let h2 = pairing(6, 0, 3);
    let h3 = sf(6, |x| x[3] * x[3] + x[4] * x[4] + x[5] * x[5], |x| vec![0.0, 0.0, 0.0, 2.0 * x[3], 2.0 * x[4], 2.0 * x[5]]);
    HamiltonianSystem::new(
        "kowalewski",
        kowalewski_structure()?,
        h1.clone(),
        vec![Named::new("H1", h1), Named::new("H4", kowalewski_h4())],
        vec![Named::new("H2", h2), Named::new("H3", h3)],
        2,
        2,
    )
}

/// `(a_2 - a_3)/b_1 + (a_3 - a_1)/b_2 + (a_1 - a_2)/b_3`.
pub fn clebsch_condition(a: [f64; 3], b: [f64; 3]) -> f64 {
    (a[1] - a[2]) / b[0] + (a[2] - a[0]) / b[1] + (a[0] - a[1]) / b[2]
}

/// `H = sum_k (a_k p_k^2 + b_k l_k^2) / 2`; Casimirs `|p|^2` and `p . l`.
pub fn clebsch(a: [f64; 3], b: [f64; 3]) -> Result<HamiltonianSystem> {
    if b.contains(&0.0) {
        return Err(Error::Param(format!("clebsch needs nonzero b, got {b:?}")));
    }
    let residual = clebsch_condition(a, b);
    if residual.is_nan() || residual.abs() >= CLEBSCH_TOL {
        return Err(Error::Param(format!(
            "clebsch condition (a2-a3)/b1 + (a3-a1)/b2 + (a1-a2)/b3 = 0 violated: residual {residual:e}"
        )));
    }
    let h = diag_quadratic(a.iter().chain(&b).copied().collect());
    let c1 = sf(6, |x| x[0] * x[0] + x[1] * x[1] + x[2] * x[2], |x| vec![2.0 * x[0], 2.0 * x[1], 2.0 * x[2], 0.0, 0.0, 0.0]);
    HamiltonianSystem::new(
        "clebsch",
        clebsch_structure()?,
        h.clone(),
        vec![Named::new("H", h)],
        vec![Named::new("C1", c1), Named::new("C2", pairing(6, 0, 3))],
        2,
        2,
    )
}

/// `H_1 = (x_1^2 + x_2^2)/2 + (y_1^2 + y_2^2)^2/4`, `H_2 = x_1 y_2 - x_2 y_1`.
pub fn yang_mills() -> Result<HamiltonianSystem> {
    let h1 = sf(
        4,
        |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            0.5 * (x[2] * x[2] + x[3] * x[3]) + 0.25 * r2 * r2
        },
        |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            vec![r2 * x[0], r2 * x[1], x[2], x[3]]
        },
    );
    let h2 = sf(4, |x| x[2] * x[1] - x[3] * x[0], |x| vec![-x[3], x[2], x[1], -x[0]]);
    HamiltonianSystem::new(
        "yang-mills",
        PoissonStructure::canonical(2)?,
        h1.clone(),
        vec![Named::new("H1", h1), Named::new("H2", h2)],
        vec![],
        2,
        0,
    )
}

/// `H = (p_1^2 + p_2^2 + q_1^2 q_2^2) / 2` on real `(q, p)`.
pub fn yang_mills_qp() -> Result<HamiltonianSystem> {
    let h = sf(
        4,
        |x| 0.5 * (x[2] * x[2] + x[3] * x[3] + x[0] * x[0] * x[1] * x[1]),
        |x| vec![x[0] * x[1] * x[1], x[0] * x[0] * x[1], x[2], x[3]],
    );
    HamiltonianSystem::new("yang-mills-qp", PoissonStructure::canonical(2)?, h.clone(), vec![Named::new("H", h)], vec![], 2, 0)
}

/// `2^{3/4} / 2`, the scale of the position substitution.
pub fn ym_q_scale() -> f64 {
    0.5 * 2f64.powf(0.75)
}

/// Forward substitution `(y, x) -> (q, p)`:
/// `q_{1,2} = 2^{3/4}/2 (y_1 +- i y_2)`, `p_{1,2} = (x_1 +- x_2)/sqrt 2`.
/// Real `(y, x)` give complex-conjugate positions and real momenta.
pub fn ym_forward(yx: [f64; 4]) -> ([Complex64; 2], [f64; 2]) {
    let c = ym_q_scale();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (
        [Complex64::new(c * yx[0], c * yx[1]), Complex64::new(c * yx[0], -c * yx[1])],
        [s * (yx[2] + yx[3]), s * (yx[2] - yx[3])],
    )
}

/// Inverse substitution for arbitrary complex `(q, p)`, returning complex `(y_1, y_2, x_1, x_2)`.
pub fn ym_inverse(q: [Complex64; 2], p: [Complex64; 2]) -> [Complex64; 4] {
    let c = ym_q_scale();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let i = Complex64::i();
    [(q[0] + q[1]) / (2.0 * c), (q[0] - q[1]) / (2.0 * c * i), s * (p[0] + p[1]), s * (p[0] - p[1])]
}

/// The map `(q_1, q_2, p_1, p_2) -> (y_1, y_2, x_1, x_2)` for real input; the
/// position part of the image is complex unless `q_1 = q_2`.
pub fn symplectic_transform_ym(q1: f64, q2: f64, p1: f64, p2: f64) -> [Complex64; 4] {
    let r = |v: f64| Complex64::new(v, 0.0);
    ym_inverse([r(q1), r(q2)], [r(p1), r(p2)])
}

/// `(p_1^2 + p_2^2 + q_1^2 q_2^2) / 2` on complex arguments.
pub fn ym_hamiltonian_qp(q: [Complex64; 2], p: [Complex64; 2]) -> Complex64 {
    0.5 * (p[0] * p[0] + p[1] * p[1] + q[0] * q[0] * q[1] * q[1])
}

/// `(x_1^2 + x_2^2)/2 + (y_1^2 + y_2^2)^2/4` on complex arguments.
pub fn ym_hamiltonian_yx(v: [Complex64; 4]) -> Complex64 {
    let r2 = v[0] * v[0] + v[1] * v[1];
    0.5 * (v[2] * v[2] + v[3] * v[3]) + 0.25 * r2 * r2
}

/// Matrix of the forward substitution, rows `(q_1, q_2, p_1, p_2)`, columns `(y_1, y_2, x_1, x_2)`.
pub fn ym_matrix() -> Matrix4<Complex64> {
    let c = Complex64::new(ym_q_scale(), 0.0);
    let ci = Complex64::new(0.0, ym_q_scale());
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    Matrix4::new(c, ci, z, z, c, -ci, z, z, z, z, s, s, z, z, s, -s)
}
