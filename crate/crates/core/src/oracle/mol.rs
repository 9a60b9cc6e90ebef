use super::march::{march, Stepped};
use super::{signed_pow, signed_pow_deriv, OracleError, StepOptions};
use crate::physics1d::{Loading, Material1D};

/// Nodal history of the method-of-lines solution, physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct MolSeries {
    pub y: Vec<f64>,
    pub t: Vec<f64>,
    pub strain: Vec<f64>,
    pub tau: Vec<f64>,
    /// `gamma_p[j][i]`: plastic strain at output time `j`, node `i`.
    pub gamma_p: Vec<Vec<f64>>,
    pub s: Vec<Vec<f64>>,
    pub accepted: usize,
    pub rejected: usize,
    /// Reason the run stopped before `t_max`, if it did.
    pub partial: Option<String>,
}

impl MolSeries {
    pub fn n_nodes(&self) -> usize {
        self.y.len()
    }

    pub fn midpoint_gamma(&self) -> Vec<f64> {
        let mid = self.n_nodes() / 2;
        self.gamma_p.iter().map(|g| g[mid]).collect()
    }

    pub fn final_profile(&self) -> &[f64] {
        self.gamma_p.last().expect("series holds the initial state")
    }
}

pub fn mol_energetic(mat: &Material1D, loading: &Loading, n: usize, tol: f64) -> Result<MolSeries, OracleError> {
    mol_energetic_with(mat, loading, n, &StepOptions::new(tol))
}

/// Central differences on `n` nodes across the strip, uniform stress from the
/// average-strain constraint, implicit Euler with damped Newton in time.
/// Walls carry γᵖ = 0 when `L > 0`; at `L = 0` every node is free.
pub fn mol_energetic_with(
    mat: &Material1D,
    loading: &Loading,
    n: usize,
    opts: &StepOptions,
) -> Result<MolSeries, OracleError> {
    if mat.dissipative_length != 0.0 {
        return Err(OracleError::Precondition("method-of-lines oracle needs l = 0".into()));
    }
    if n < 11 || n % 2 == 0 {
        return Err(OracleError::Precondition(format!("node count must be odd and at least 11, got {n}")));
    }
    if !(opts.tol > 0.0) {
        return Err(OracleError::Precondition("tol must be positive".into()));
    }
    mat.validate().map_err(|e| OracleError::Precondition(e.to_string()))?;

    let g0 = mat.strain_scale();
    let a = loading.max_strain() / g0;
    let b = g0 / (loading.t_max * mat.d0);
    let p = 1.0 / mat.m;
    let r = mat.hardening / mat.mu;
    let dy = 1.0 / (n - 1) as f64;
    let walls = mat.energetic_length > 0.0;
    let c = mat.energetic_length * mat.energetic_length * g0 / (dy * dy);
    let free: Vec<usize> = if walls { (1..n - 1).collect() } else { (0..n).collect() };
    let nu = free.len();
    let weight = |j: usize| if j == 0 || j == n - 1 { 0.5 * dy } else { dy };
    let max_newton = opts.max_newton;

    let residual = |t1: f64, h: f64, x: &[f64], xn: &[f64], sn: &[f64]| {
        let mean: f64 = (0..n).map(|j| weight(j) * x[j]).sum();
        let tau = a * t1 - mean;
        let mut f = vec![0.0; nu];
        let mut q = vec![0.0; nu];
        let mut sig = vec![0.0; nu];
        let mut s = sn.to_vec();
        for (k, &i) in free.iter().enumerate() {
            let lap = if walls { x[i - 1] - 2.0 * x[i] + x[i + 1] } else { 0.0 };
            sig[k] = tau + c * lap;
            s[i] = sn[i] + r * (x[i] - xn[i]).abs();
            q[k] = sig[k] / s[i];
            f[k] = x[i] - xn[i] - h / b * signed_pow(q[k], p);
        }
        (f, q, sig, s)
    };

    // Rates from the flow rule itself; (x − xₙ)/h loses all digits at tiny h.
    let flow_rate = |q: &[f64]| {
        let mut rate = vec![0.0; n];
        for (k, &i) in free.iter().enumerate() {
            rate[i] = signed_pow(q[k], p) / b;
        }
        rate
    };

    let step = |t: f64, h: f64, xn: &[f64], sn: &[f64], guess: &[f64]| -> Option<Stepped> {
        let t1 = t + h;
        let mut x = guess.to_vec();
        if walls {
            x[0] = 0.0;
            x[n - 1] = 0.0;
        }
        let norm = |v: &[f64]| v.iter().map(|e| e * e).sum::<f64>().sqrt();
        let (mut f, mut q, mut sig, mut s) = residual(t1, h, &x, xn, sn);
        for _ in 0..max_newton {
            // J = T + u·wᵀ: tridiagonal curvature and hardening terms plus the
            // rank-one coupling through the mean plastic strain in τ.
            let mut lower = vec![0.0; nu];
            let mut diag = vec![0.0; nu];
            let mut upper = vec![0.0; nu];
            let mut u = vec![0.0; nu];
            for (k, &i) in free.iter().enumerate() {
                let g = h / b * signed_pow_deriv(q[k], p);
                let sgn = (x[i] - xn[i]).signum();
                u[k] = g / s[i];
                diag[k] = 1.0 + g * sig[k] * r * sgn / (s[i] * s[i]);
                if walls {
                    diag[k] += 2.0 * c * g / s[i];
                    lower[k] = -c * g / s[i];
                    upper[k] = -c * g / s[i];
                }
            }
            let w: Vec<f64> = free.iter().map(|&j| weight(j)).collect();
            let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
            let delta = solve_tridiagonal_rank_one(&lower, &diag, &upper, &u, &w, &rhs)?;
            let f0 = norm(&f);
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let mut trial = x.clone();
                for (k, &i) in free.iter().enumerate() {
                    trial[i] += alpha * delta[k];
                }
                let out = residual(t1, h, &trial, xn, sn);
                let f1 = norm(&out.0);
                if f1.is_finite() && f1 <= (1.0 - 1e-4 * alpha) * f0 {
                    x = trial;
                    (f, q, sig, s) = out;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            let step_norm = delta.iter().fold(0.0f64, |m, d| m.max(d.abs())) * alpha;
            let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !accepted {
                // No further decrease possible: accept only if already at roundoff.
                if f0 <= 1e-12 * scale {
                    break;
                }
                return None;
            }
            if step_norm <= 1e-13 * scale || norm(&f) <= 1e-13 * scale {
                return Some(Stepped { rate: flow_rate(&q), x, s });
            }
        }
        if norm(&f) <= 1e-11 * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
            return Some(Stepped { rate: flow_rate(&q), x, s });
        }
        None
    };

    let m = march(opts, vec![0.0; n], vec![1.0; n], loading.t_max, step);
    let tau = m
        .x
        .iter()
        .zip(&m.t)
        .map(|(x, &t)| (a * t - (0..n).map(|j| weight(j) * x[j]).sum::<f64>()) * mat.s0)
        .collect();
    Ok(MolSeries {
        y: (0..n).map(|i| i as f64 * dy * mat.width).collect(),
        t: m.t.iter().map(|t| t * loading.t_max).collect(),
        strain: m.t.iter().map(|t| a * t * g0).collect(),
        tau,
        gamma_p: m.x.iter().map(|x| x.iter().map(|v| v * g0).collect()).collect(),
        s: m.s.iter().map(|s| s.iter().map(|v| v * mat.s0).collect()).collect(),
        accepted: m.accepted,
        rejected: m.rejected,
        partial: m.partial.map(|e| e.to_string()),
    })
}

/// Solves `(T + u·wᵀ) x = rhs` with `T` tridiagonal (`lower[0]` and
/// `upper[n-1]` unused) by the Thomas algorithm and Sherman–Morrison.
fn solve_tridiagonal_rank_one(lower: &[f64], diag: &[f64], upper: &[f64], u: &[f64], w: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut cp = vec![0.0; n];
    let mut denom = vec![0.0; n];
    for i in 0..n {
        let d = diag[i] - if i > 0 { lower[i] * cp[i - 1] } else { 0.0 };
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        denom[i] = d;
        cp[i] = if i + 1 < n { upper[i] / d } else { 0.0 };
    }
    let solve = |b: &[f64]| {
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = (b[i] - if i > 0 { lower[i] * y[i - 1] } else { 0.0 }) / denom[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            y[i] -= cp[i] * y[i + 1];
        }
        y
    };
    let z = solve(rhs);
    let y = solve(u);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let den = 1.0 + dot(w, &y);
    if den == 0.0 || !den.is_finite() {
        return None;
    }
    let beta = dot(w, &z) / den;
    let x: Vec<f64> = z.iter().zip(&y).map(|(zi, yi)| zi - beta * yi).collect();
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energetic_profile_vanishes_at_walls_and_is_symmetric() {
        let mat = Material1D {
            energetic_length: 10.0,
            ..Default::default()
        };
        let s = mol_energetic(&mat, &Loading::default(), 41, 1e-5).unwrap();
        assert!(s.partial.is_none());
        let g = s.final_profile();
        let mid = g[20];
        assert!(mid > 0.0);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[40], 0.0);
        for i in 0..41 {
            assert!((g[i] - g[40 - i]).abs() <= 1e-3 * mid);
        }
    }

    #[test]
    fn structured_solve_matches_dense() {
        let n = 7;
        let lower: Vec<f64> = (0..n).map(|i| -0.3 - 0.01 * i as f64).collect();
        let upper: Vec<f64> = (0..n).map(|i| -0.2 + 0.02 * i as f64).collect();
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + 0.1 * i as f64).collect();
        let u: Vec<f64> = (0..n).map(|i| 0.5 / (1.0 + i as f64)).collect();
        let w = vec![1.0 / n as f64; n];
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = solve_tridiagonal_rank_one(&lower, &diag, &upper, &u, &w, &rhs).unwrap();
        for i in 0..n {
            let mut ax = diag[i] * x[i] + u[i] * w.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
            if i > 0 {
                ax += lower[i] * x[i - 1];
            }
            if i + 1 < n {
                ax += upper[i] * x[i + 1];
            }
            assert!((ax - rhs[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn bad_grids_are_rejected() {
        let m = Material1D::default();
        assert!(mol_energetic(&m, &Loading::default(), 10, 1e-6).is_err());
        assert!(mol_energetic(&m, &Loading::default(), 9, 1e-6).is_err());
        let ml = Material1D {
            dissipative_length: 1.0,
            ..m
        };
        assert!(mol_energetic(&ml, &Loading::default(), 11, 1e-6).is_err());
    }
}
