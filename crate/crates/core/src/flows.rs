//! Fixed-step RK4 flows `g_t^X`, sampled trajectories and pullbacks.

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::exterior::DifferentialForm;
use crate::fields::{FdConfig, ScalarField, VectorField};

const MAX_STEPS: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scheme {
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    pub scheme: Scheme,
    pub step: f64,
}

impl Default for Integrator {
    fn default() -> Self {
        Self { scheme: Scheme::Rk4, step: 1e-3 }
    }
}

impl Integrator {
    pub fn rk4(step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Arg(format!("step must be positive and finite, got {step}")));
        }
        Ok(Self { scheme: Scheme::Rk4, step })
    }

    /// Number of equal substeps used to cover `|t|`.
    pub fn substeps(&self, t: f64) -> Result<usize> {
        if !t.is_finite() {
            return Err(Error::Arg(format!("non-finite time {t}")));
        }
        let n = (t.abs() / self.step).ceil();
        if n > MAX_STEPS {
            return Err(Error::Arg(format!("{n} substeps exceeds the limit of {MAX_STEPS}")));
        }
        Ok(n as usize)
    }
}

fn axpy(x: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(xi, ki)| xi + a * ki).collect()
}

fn rk4_step(x: &VectorField, state: &[f64], h: f64) -> Vec<f64> {
    let k1 = x.eval(state);
    let k2 = x.eval(&axpy(state, 0.5 * h, &k1));
    let k3 = x.eval(&axpy(state, 0.5 * h, &k2));
    let k4 = x.eval(&axpy(state, h, &k3));
    state
        .iter()
        .enumerate()
        .map(|(i, s)| s + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

fn check_start(x: &VectorField, x0: &[f64]) -> Result<()> {
    check_dim(x.dim(), x0.len())?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Arg(format!("initial state is not finite: {x0:?}")));
    }
    Ok(())
}

/// `g_t^X(x0)`: `ceil(|t| / step)` equal RK4 substeps. Negative `t` runs the field backwards.
pub fn flow(x: &VectorField, x0: &[f64], t: f64, integ: &Integrator) -> Result<Vec<f64>> {
    check_start(x, x0)?;
    let n = integ.substeps(t)?;
    if n == 0 {
        return Ok(x0.to_vec());
    }
    let h = t / n as f64;
    let mut state = x0.to_vec();
    for i in 0..n {
        let next = rk4_step(x, &state, h);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Blowup { time: (i + 1) as f64 * h, last_good: i as f64 * h });
        }
        state = next;
    }
    Ok(state)
}

/// A sampled solution curve with the values of selected integrals at each sample.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `invariant_log[i][s]` is integral `i` at sample `s`.
    pub invariant_log: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.states.last().map(|s| s.as_slice())
    }

    /// Largest `|I(t) - I(0)|` for integral `i`.
    pub fn drift(&self, i: usize) -> f64 {
        let log = &self.invariant_log[i];
        log.iter().fold(0.0f64, |a, v| a.max((v - log[0]).abs()))
    }

    /// Largest drift over all logged integrals.
    pub fn max_drift(&self) -> f64 {
        (0..self.invariant_log.len()).map(|i| self.drift(i)).fold(0.0, f64::max)
    }
}

/// Integrate from 0 to `t1 >= 0`, recording every step.
pub fn trace(
    x: &VectorField,
    x0: &[f64],
    t1: f64,
    integ: &Integrator,
    integrals: &[ScalarField],
) -> Result<Trajectory> {
    check_start(x, x0)?;
    if t1 < 0.0 {
        return Err(Error::Arg(format!("trace needs t1 >= 0, got {t1}")));
    }
    for f in integrals {
        check_dim(x.dim(), f.dim())?;
    }
    let n = integ.substeps(t1)?;
    let h = if n == 0 { 0.0 } else { t1 / n as f64 };
    let mut traj = Trajectory {
        times: Vec::with_capacity(n + 1),
        states: Vec::with_capacity(n + 1),
        invariant_log: vec![Vec::with_capacity(n + 1); integrals.len()],
    };
    let record = |traj: &mut Trajectory, t: f64, s: Vec<f64>| {
        for (log, f) in traj.invariant_log.iter_mut().zip(integrals) {
            log.push(f.eval(&s));
        }
        traj.times.push(t);
        traj.states.push(s);
    };
    record(&mut traj, 0.0, x0.to_vec());
    let mut state = x0.to_vec();
    for i in 0..n {
        let next = rk4_step(x, &state, h);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Blowup { time: (i + 1) as f64 * h, last_good: i as f64 * h });
        }
        state = next;
        let t = if i + 1 == n { t1 } else { (i + 1) as f64 * h };
        record(&mut traj, t, state.clone());
    }
    Ok(traj)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `|g_{t+s}(x0) - g_t(g_s(x0))|`.
pub fn group_law_residual(x: &VectorField, x0: &[f64], t: f64, s: f64, integ: &Integrator) -> Result<f64> {
    let direct = flow(x, x0, t + s, integ)?;
    let composed = flow(x, &flow(x, x0, s, integ)?, t, integ)?;
    Ok(distance(&direct, &composed))
}

/// `(g_t^* ω)(p)(vs) = ω(g_t p)(Dg_t vs)`, with `Dg_t v` by central differences of the flow along `v`.
pub fn pullback_form(
    x: &VectorField,
    w: &DifferentialForm,
    p: &[f64],
    vs: &[Vec<f64>],
    t: f64,
    integ: &Integrator,
    cfg: &FdConfig,
) -> Result<f64> {
    check_dim(x.dim(), w.dim())?;
    if t == 0.0 {
        return w.evaluate(p, vs);
    }
    let q = flow(x, p, t, integ)?;
    let scale = p.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let pushed = vs
        .iter()
        .map(|v| {
            check_dim(x.dim(), v.len())?;
            let norm = v.iter().fold(0.0f64, |a, c| a.max(c.abs()));
            if norm == 0.0 {
                return Ok(vec![0.0; v.len()]);
            }
            let h = cfg.rel_step * scale / norm;
            let fwd = flow(x, &axpy(p, h, v), t, integ)?;
            let bwd = flow(x, &axpy(p, -h, v), t, integ)?;
            Ok(fwd.iter().zip(&bwd).map(|(a, b)| (a - b) / (2.0 * h)).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    w.evaluate(&q, &pushed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euler_top() -> VectorField {
        VectorField::new(3, |m| vec![m[1] * m[2], -2.0 * m[0] * m[2], m[0] * m[1]]).unwrap()
    }

    #[test]
    fn zero_field_is_stationary() {
        let z = VectorField::zero(2).unwrap();
        let x0 = [0.3, -0.7];
        for t in [0.0, 1.0, -2.5] {
            assert_eq!(flow(&z, &x0, t, &Integrator::default()).unwrap(), x0.to_vec());
        }
    }

    #[test]
    fn exponential_growth() {
        let x = VectorField::new(1, |p| vec![p[0]]).unwrap();
        let y = flow(&x, &[1.0], 1.0, &Integrator::rk4(1e-3).unwrap()).unwrap();
        assert!((y[0] - std::f64::consts::E).abs() < 1e-8);
        let back = flow(&x, &y, -1.0, &Integrator::rk4(1e-3).unwrap()).unwrap();
        assert!((back[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn blowup_reports_time() {
        let x = VectorField::new(1, |p| vec![p[0] * p[0]]).unwrap();
        match flow(&x, &[1.0], 2.0, &Integrator::rk4(1e-2).unwrap()) {
            Err(Error::Blowup { time, last_good }) => {
                assert!(time > 0.9 && time <= 2.0, "{time}");
                assert!(last_good < time);
            }
            other => panic!("expected blowup, got {other:?}"),
        }
    }

    #[test]
    fn bad_step_is_rejected() {
        assert!(Integrator::rk4(0.0).is_err());
        assert!(Integrator::rk4(f64::NAN).is_err());
        assert!(flow(&euler_top(), &[1.0, 0.0, 0.0], 1e9, &Integrator::rk4(1e-3).unwrap()).is_err());
    }

    #[test]
    fn trace_with_no_integrals() {
        let tr = trace(&euler_top(), &[1.0, 0.5, 0.25], 0.01, &Integrator::default(), &[]).unwrap();
        assert!(tr.invariant_log.is_empty());
        assert_eq!(tr.len(), 11);
        assert_eq!(*tr.times.last().unwrap(), 0.01);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn trace_at_zero_time() {
        let tr = trace(&euler_top(), &[1.0, 0.5, 0.25], 0.0, &Integrator::default(), &[]).unwrap();
        assert_eq!(tr.len(), 1);
        assert_eq!(tr.states[0], vec![1.0, 0.5, 0.25]);
    }

    #[test]
    fn group_law_is_exact_at_zero() {
        let x = euler_top();
        let i = Integrator::default();
        assert_eq!(group_law_residual(&x, &[1.0, 0.5, 0.25], 0.0, 0.7, &i).unwrap(), 0.0);
        assert_eq!(group_law_residual(&x, &[1.0, 0.5, 0.25], 0.7, 0.0, &i).unwrap(), 0.0);
    }

    #[test]
    fn pullback_at_zero_time_is_evaluate() {
        let w = DifferentialForm::monomial(3, &[0, 2], 2.5).unwrap();
        let vs = vec![vec![1.0, 2.0, 3.0], vec![-1.0, 0.5, 0.0]];
        let p = [0.1, 0.2, 0.3];
        let direct = w.evaluate(&p, &vs).unwrap();
        let pulled = pullback_form(&euler_top(), &w, &p, &vs, 0.0, &Integrator::default(), &FdConfig::default()).unwrap();
        assert_eq!(direct, pulled);
    }
}
