use super::march::{march, Stepped};
use super::{signed_pow, signed_pow_deriv, OracleError, StepOptions};
use crate::physics1d::{Loading, Material1D};

/// One output sample in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdePoint {
    pub t: f64,
    pub strain: f64,
    pub tau: f64,
    pub gamma_p: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSeries {
    pub points: Vec<OdePoint>,
    pub accepted: usize,
    pub rejected: usize,
}

impl OdeSeries {
    /// Linear interpolation of τ at applied strain `g`.
    pub fn tau_at_strain(&self, g: f64) -> f64 {
        let p = &self.points;
        let i = p.partition_point(|q| q.strain < g).clamp(1, p.len() - 1);
        let (a, b) = (p[i - 1], p[i]);
        if b.strain == a.strain {
            return b.tau;
        }
        a.tau + (b.tau - a.tau) * (g - a.strain) / (b.strain - a.strain)
    }
}

/// Scalar-ODE oracle for the homogeneous strip (`L = l = 0`).
pub fn homogeneous_ode(mat: &Material1D, loading: &Loading, tol: f64) -> Result<OdeSeries, OracleError> {
    homogeneous_ode_with(mat, loading, &StepOptions::new(tol))
}

pub fn homogeneous_ode_with(mat: &Material1D, loading: &Loading, opts: &StepOptions) -> Result<OdeSeries, OracleError> {
    if mat.energetic_length != 0.0 || mat.dissipative_length != 0.0 {
        return Err(OracleError::Precondition("homogeneous oracle needs L = l = 0".into()));
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
    let max_newton = opts.max_newton;

    let step = |t: f64, h: f64, xn: &[f64], sn: &[f64], _guess: &[f64]| -> Option<Stepped> {
        let (xn, sn) = (xn[0], sn[0]);
        let strain = a * (t + h);
        let eval = |x: f64| {
            let tau = strain - x;
            let s = sn + r * (x - xn).abs();
            let q = tau / s;
            let f = x - xn - h / b * signed_pow(q, p);
            let dq = -1.0 / s - tau * r * (x - xn).signum() / (s * s);
            (f, 1.0 - h / b * signed_pow_deriv(q, p) * dq, s)
        };
        // F is monotone in x; the flow cannot carry x past the stress-free state.
        let (mut lo, mut hi) = if strain - xn >= 0.0 { (xn, strain) } else { (strain, xn) };
        let mut x = xn;
        for _ in 0..max_newton {
            let (f, df, _) = eval(x);
            if f == 0.0 {
                lo = x;
                hi = x;
            } else if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let mut next = x - f / df;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let done = (next - x).abs() <= 1e-15 * (1.0 + x.abs()) || hi - lo <= 1e-15 * (1.0 + x.abs());
            x = next;
            if done {
                let (_, _, s) = eval(x);
                // From the flow rule: (x − xₙ)/h loses all digits at tiny h.
                let rate = signed_pow((strain - x) / s, p) / b;
                return Some(Stepped {
                    x: vec![x],
                    s: vec![s],
                    rate: vec![rate],
                });
            }
        }
        None
    };
    let m = march(opts, vec![0.0], vec![1.0], loading.t_max, step);
    if let Some(e) = m.partial {
        return Err(e);
    }
    let points = m
        .t
        .iter()
        .zip(m.x.iter().zip(&m.s))
        .map(|(&t, (x, s))| {
            let strain = a * t;
            OdePoint {
                t: t * loading.t_max,
                strain: strain * g0,
                tau: (strain - x[0]) * mat.s0,
                gamma_p: x[0] * g0,
                s: s[0] * mat.s0,
            }
        })
        .collect();
    Ok(OdeSeries {
        points,
        accepted: m.accepted,
        rejected: m.rejected,
    })
}
