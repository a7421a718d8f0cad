//! Jacobi elliptic functions, the closed-form free rigid body, and the
//! elliptic curve of the reduced Yang-Mills system.

use crate::error::{Error, Result};
use crate::flows::Trajectory;

const AGM_MAX_ITER: usize = 16;

fn check_modulus(k2: f64) -> Result<()> {
    if !(0.0..1.0).contains(&k2) {
        return Err(Error::Param(format!("squared modulus must lie in [0, 1), got {k2}")));
    }
    Ok(())
}

/// `sn, cn, dn` of `u` with squared modulus `k2` by the descending Landen (AGM) scheme.
pub fn jacobi_sn_cn_dn(u: f64, k2: f64) -> Result<(f64, f64, f64)> {
    check_modulus(k2)?;
    if !u.is_finite() {
        return Err(Error::Arg(format!("non-finite argument {u}")));
    }
    if k2 == 0.0 {
        return Ok((u.sin(), u.cos(), 1.0));
    }
    let mut a = vec![1.0f64];
    let mut c = vec![k2.sqrt()];
    let mut b = (1.0 - k2).sqrt();
    for _ in 0..AGM_MAX_ITER {
        let an = a[a.len() - 1];
        if c[c.len() - 1].abs() <= f64::EPSILON * an {
            break;
        }
        let next_a = 0.5 * (an + b);
        c.push(0.5 * (an - b));
        b = (an * b).sqrt();
        a.push(next_a);
    }
    let n = a.len() - 1;
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    for i in (1..=n).rev() {
        phi = 0.5 * (phi + (c[i] / a[i] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // dn stays positive for k2 < 1, so the square root carries no sign ambiguity
    let dn = (1.0 - k2 * sn * sn).sqrt();
    Ok((sn, cn, dn))
}

/// Arithmetic-geometric mean.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= f64::EPSILON * a.abs() {
            break;
        }
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    a
}

/// Complete elliptic integral of the first kind, `K(k2) = pi / (2 agm(1, sqrt(1 - k2)))`.
pub fn complete_k(k2: f64) -> Result<f64> {
    check_modulus(k2)?;
    Ok(std::f64::consts::FRAC_PI_2 / agm(1.0, (1.0 - k2).sqrt()))
}

/// The closed-form free rigid body on one level set, for `l1 >= l2 > l3`,
/// `2 H1 / l1 < r2 < 2 H1 / l3` and `r2 > 2 H1 / l2`:
///
/// `m(t) = (s1 A1 cn(nu t), s1 s3 A2 sn(nu t), s3 A3 dn(nu t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerTopClosedForm {
    pub lambda: [f64; 3],
    pub h1: f64,
    pub r2: f64,
    pub k2: f64,
    pub nu: f64,
    pub amp: [f64; 3],
}

impl EulerTopClosedForm {
    pub fn new(lambda: [f64; 3], h1: f64, r2: f64) -> Result<Self> {
        let [l1, l2, l3] = lambda;
        if !(l1 >= l2 && l2 > l3) {
            return Err(Error::Param(format!("need l1 >= l2 > l3, got {lambda:?}")));
        }
        if !(2.0 * h1 / l1 < r2 && r2 < 2.0 * h1 / l3) {
            return Err(Error::Param(format!("r2 = {r2} outside (2H1/l1, 2H1/l3) for H1 = {h1}")));
        }
        if l1 > l2 && r2 <= 2.0 * h1 / l2 {
            return Err(Error::Param(format!("r2 = {r2} not above 2H1/l2 = {}; swap labels 1 and 3", 2.0 * h1 / l2)));
        }
        Self::from_parts(lambda, h1, r2)
    }

    /// Same formulas with only the radicands and the modulus checked; used after relabelling.
    fn from_parts(lambda: [f64; 3], h1: f64, r2: f64) -> Result<Self> {
        let [l1, l2, l3] = lambda;
        let e = 2.0 * h1;
        let amp2 = [(e - r2 * l3) / (l1 - l3), (e - r2 * l3) / (l2 - l3), (r2 * l1 - e) / (l1 - l3)];
        if amp2.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::Param(format!("negative squared amplitude {amp2:?}")));
        }
        let nu2 = (l2 - l3) * (r2 * l1 - e);
        let k2 = (l1 - l2) * (e - r2 * l3) / nu2;
        if nu2.is_nan() || nu2 <= 0.0 || !(0.0..1.0).contains(&k2) {
            return Err(Error::Param(format!("modulus k2 = {k2} outside [0, 1)")));
        }
        Ok(Self { lambda, h1, r2, k2, nu: nu2.sqrt(), amp: amp2.map(f64::sqrt) })
    }

    /// From a starting point, in the labels given.
    pub fn from_state(lambda: [f64; 3], m: [f64; 3]) -> Result<Self> {
        let h1 = 0.5 * (0..3).map(|i| lambda[i] * m[i] * m[i]).sum::<f64>();
        let r2 = m.iter().map(|v| v * v).sum();
        Self::new(lambda, h1, r2)
    }

    /// Quarter period in `t`.
    pub fn quarter_period(&self) -> f64 {
        complete_k(self.k2).expect("modulus validated") / self.nu
    }

    /// `m(t)` anchored at `m_2(0) = 0`, with amplitude signs `(s1, s3)`.
    pub fn eval(&self, t: f64, signs: (f64, f64)) -> Result<[f64; 3]> {
        self.eval_phase(self.nu * t, signs)
    }

    fn eval_phase(&self, u: f64, (s1, s3): (f64, f64)) -> Result<[f64; 3]> {
        let (sn, cn, dn) = jacobi_sn_cn_dn(u, self.k2)?;
        Ok([s1 * self.amp[0] * cn, s1 * s3 * self.amp[1] * sn, s3 * self.amp[2] * dn])
    }
}

/// The free rigid body through an arbitrary starting point, for any ordering of
/// three distinct moments. Labels are sorted into the closed-form ordering, and 1, 3
/// are swapped on the other side of the separatrix.
#[derive(Debug, Clone)]
pub struct EulerSolution {
    pub closed: EulerTopClosedForm,
    /// `perm[i]` is the original index placed in slot `i`.
    pub perm: [usize; 3],
    pub time_sign: f64,
    pub sign3: f64,
    /// Phase at `t = 0`.
    pub u0: f64,
}

fn parity(p: [usize; 3]) -> f64 {
    let inversions = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl EulerSolution {
    pub fn new(lambda: [f64; 3], m0: [f64; 3]) -> Result<Self> {
        let mut perm = [0usize, 1, 2];
        perm.sort_by(|&a, &b| lambda[b].total_cmp(&lambda[a]));
        let l: [f64; 3] = perm.map(|i| lambda[i]);
        if !(l[0] > l[1] && l[1] > l[2]) {
            return Err(Error::Param(format!("moments must be distinct, got {lambda:?}")));
        }
        // the closed form runs forward for descending labels; after a swap of 1 and 3
        // it runs backward, which cancels the extra transposition
        let time_sign = parity(perm);
        let m: [f64; 3] = perm.map(|i| m0[i]);
        let h1 = 0.5 * (0..3).map(|i| l[i] * m[i] * m[i]).sum::<f64>();
        let r2: f64 = m.iter().map(|v| v * v).sum();
        let (perm, l, m) = if r2 < 2.0 * h1 / l[1] {
            ([perm[2], perm[1], perm[0]], [l[2], l[1], l[0]], [m[2], m[1], m[0]])
        } else {
            (perm, l, m)
        };
        let closed = EulerTopClosedForm::from_parts(l, h1, r2)?;
        let sign3 = if m[2] < 0.0 { -1.0 } else { 1.0 };
        let kq = complete_k(closed.k2)?;
        let target = if closed.amp[1] > 0.0 { (sign3 * m[1] / closed.amp[1]).clamp(-1.0, 1.0) } else { 0.0 };
        let mut u0 = bisect_sn(target, closed.k2, kq)?;
        if m[0] < 0.0 {
            u0 = 2.0 * kq - u0;
        }
        Ok(Self { closed, perm, time_sign, sign3, u0 })
    }

    /// State at time `t`, in the caller's labels.
    pub fn eval(&self, t: f64) -> Result<[f64; 3]> {
        let u = self.u0 + self.time_sign * self.closed.nu * t;
        let w = self.closed.eval_phase(u, (1.0, self.sign3))?;
        let mut out = [0.0; 3];
        for (slot, &orig) in self.perm.iter().enumerate() {
            out[orig] = w[slot];
        }
        Ok(out)
    }
}

/// Solve `sn(u) = target` on `[-K, K]`.
fn bisect_sn(target: f64, k2: f64, kq: f64) -> Result<f64> {
    let (mut lo, mut hi) = (-kq, kq);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if jacobi_sn_cn_dn(mid, k2)?.0 < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * kq {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The symmetric top `l1 = l2`: `m1 + i m2 = C exp(i A (l1 - l3) t + i phi0)`, `m3 = A`.
pub fn degenerate_axisymmetric(lambda: [f64; 3], m0: [f64; 3], t: f64) -> Result<[f64; 3]> {
    if lambda[0] != lambda[1] {
        return Err(Error::Param(format!("needs l1 = l2, got {lambda:?}")));
    }
    let a = m0[2];
    let c = m0[0].hypot(m0[1]);
    let phase = m0[1].atan2(m0[0]) + a * (lambda[0] - lambda[2]) * t;
    Ok([c * phase.cos(), c * phase.sin(), a])
}

/// `|w^2 + z^3/2 - 2 c1 z + c2^2|` at one state `(y1, y2, x1, x2)`, with
/// `z = |y|^2` and `w = r r' = y . x`.
pub fn ym_curve_residual_at(state: &[f64], c1: f64, c2: f64) -> f64 {
    let z = state[0] * state[0] + state[1] * state[1];
    let w = state[0] * state[2] + state[1] * state[3];
    (w * w + 0.5 * z * z * z - 2.0 * c1 * z + c2 * c2).abs()
}

/// Worst curve residual over a Yang-Mills trajectory.
pub fn ym_curve_residual(traj: &Trajectory, c1: f64, c2: f64) -> f64 {
    traj.states.iter().map(|s| ym_curve_residual_at(s, c1, c2)).fold(0.0, f64::max)
}
