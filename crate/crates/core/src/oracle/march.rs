use super::{OracleError, StepOptions};

/// Implicit step result: new state, new rates and whether Newton converged.
pub(super) struct Stepped {
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub rate: Vec<f64>,
}

pub(super) struct Marched {
    /// Output times (scaled) and the states there.
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub s: Vec<Vec<f64>>,
    pub accepted: usize,
    pub rejected: usize,
    /// Set when integration stopped early; holds the reason.
    pub partial: Option<OracleError>,
}

/// Marches from `t̂ = 0` to `1`, landing on every output time. `step(t, h,
/// x, s, guess)` performs one implicit step of size `h` from time `t`.
pub(super) fn march<F>(opts: &StepOptions, x0: Vec<f64>, s0: Vec<f64>, t_scale: f64, mut step: F) -> Marched
where
    F: FnMut(f64, f64, &[f64], &[f64], &[f64]) -> Option<Stepped>,
{
    let n_out = opts.n_out.max(2);
    let outs: Vec<f64> = (0..n_out)
        .map(|j| if j + 1 == n_out { 1.0 } else { j as f64 / (n_out - 1) as f64 })
        .collect();
    let mut res = Marched {
        t: vec![0.0],
        x: vec![x0.clone()],
        s: vec![s0.clone()],
        accepted: 0,
        rejected: 0,
        partial: None,
    };
    let (mut x, mut s) = (x0, s0);
    let mut rate = vec![0.0; x.len()];
    let mut t = 0.0;
    let mut h = 1e-4f64.min(opts.h_max);
    for &target in &outs[1..] {
        while t < target {
            let remaining = target - t;
            let landing = h >= remaining * (1.0 - 1e-12);
            let hs = if landing { remaining } else { h };
            let guess: Vec<f64> = x.iter().zip(&rate).map(|(xi, ri)| xi + hs * ri).collect();
            match step(t, hs, &x, &s, &guess) {
                Some(st) => {
                    let est = st
                        .rate
                        .iter()
                        .zip(&rate)
                        .map(|(a, b)| 0.5 * hs * (a - b).abs())
                        .fold(0.0, f64::max);
                    let scale = st.rate.iter().chain(&rate).fold(1.0f64, |m, r| m.max(r.abs()));
                    let allowed = opts.tol * hs * scale;
                    if est <= allowed || hs <= opts.h_min {
                        t = if landing { target } else { t + hs };
                        x = st.x;
                        s = st.s;
                        rate = st.rate;
                        res.accepted += 1;
                        let grow = if est > 0.0 { 0.9 * allowed / est } else { 2.0 };
                        if !landing || grow < 1.0 {
                            h = (hs * grow.clamp(0.2, 2.0)).clamp(opts.h_min, opts.h_max);
                        }
                    } else {
                        res.rejected += 1;
                        h = (hs * (0.9 * allowed / est).clamp(0.1, 0.5)).max(opts.h_min);
                    }
                }
                None => {
                    res.rejected += 1;
                    if hs <= opts.h_min {
                        res.partial = Some(OracleError::NewtonFailure {
                            t: t * t_scale,
                            h: hs * t_scale,
                        });
                        return res;
                    }
                    h = (hs * 0.5).max(opts.h_min);
                }
            }
        }
        res.t.push(target);
        res.x.push(x.clone());
        res.s.push(s.clone());
    }
    res
}
