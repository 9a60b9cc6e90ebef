//! One-dimensional strain-gradient plasticity of a sheared strip.
//!
//! The strip occupies `0 ≤ y ≤ h`; the bottom is fixed and the top follows a
//! monotone ramp `u†(t) = Γ̇·h·t`. Fields are the displacement `u`, plastic
//! strain `γᵖ`, optionally the flow resistance `S` (when `H ≠ 0`) and the
//! gradient microstress `kᵖ` (mixed formulation). Residuals are evaluated in
//! scaled units:
//!
//! * macro: `∂τ/∂y` over `μ·u_max/h²`
//! * micro: `(τ − τᵖ + ∂kᵖ/∂y) / S0`
//! * hardening: `(Ṡ − H·dᵖ) / (H·d0)`
//! * mixed defect: `(kᵖ_net − kᵖ_constitutive) / (S0·h)`
//!
//! Rates enter the flow rule divided by `d0`; the regularization floor
//! `eps_reg` lives on that same scale.

use serde::{Deserialize, Serialize};

use crate::ad::{Jet2, Scalar};
use crate::net::{apply_constraints_1d, forward_jet, Constraint1D, Fields1D, NetworkSpec, Outputs1D, ScalingRules};
use crate::net::{InputScale, OutputScale};
use crate::problem::{PhysicsError, Problem, Term, TermValues};

pub const DEFAULT_EPS_REG: f64 = 1e-8;

/// Material constants in SI units. Length scales are multiples of `width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material1D {
    pub mu: f64,
    pub s0: f64,
    pub d0: f64,
    pub m: f64,
    pub hardening: f64,
    pub energetic_length: f64,
    pub dissipative_length: f64,
    pub width: f64,
}

impl Default for Material1D {
    fn default() -> Self {
        Material1D {
            mu: 100e9,
            s0: 100e6,
            d0: 0.1,
            m: 0.02,
            hardening: 0.0,
            energetic_length: 0.0,
            dissipative_length: 0.0,
            width: 1e-6,
        }
    }
}

impl Material1D {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        let bad = |what: &str| Err(PhysicsError::InvalidMaterial(what.to_string()));
        if !(self.mu > 0.0) {
            return bad("mu must be positive");
        }
        if !(self.s0 > 0.0) {
            return bad("s0 must be positive");
        }
        if !(self.d0 > 0.0) {
            return bad("d0 must be positive");
        }
        if !(self.m > 0.0 && self.m < 1.0) {
            return bad("m must lie in (0, 1)");
        }
        if !(self.hardening >= 0.0) {
            return bad("hardening modulus must be non-negative");
        }
        if !(self.energetic_length >= 0.0 && self.dissipative_length >= 0.0) {
            return bad("length scales must be non-negative");
        }
        if !(self.width > 0.0) {
            return bad("strip width must be positive");
        }
        Ok(())
    }

    /// Elastic strain at the flow resistance, `S0/μ`; the plastic-strain scale.
    pub fn strain_scale(&self) -> f64 {
        self.s0 / self.mu
    }
}

/// Monotone shear ramp `u†(t) = Γ̇·h·t` on `[0, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Loading {
    pub shear_rate: f64,
    pub t_max: f64,
}

impl Default for Loading {
    fn default() -> Self {
        Loading {
            shear_rate: 0.1,
            t_max: 0.25,
        }
    }
}

impl Loading {
    pub fn max_strain(&self) -> f64 {
        self.shear_rate * self.t_max
    }

    pub fn strain_at(&self, t: f64) -> f64 {
        self.shear_rate * t
    }

    pub fn top_displacement(&self, t: f64, width: f64) -> f64 {
        self.shear_rate * width * t
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !(self.shear_rate > 0.0 && self.t_max > 0.0) {
            return Err(PhysicsError::Config("shear rate and final time must be positive".into()));
        }
        Ok(())
    }
}

/// How the gradient microstress enters the microforce balance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MicroMode {
    /// `∂kᵖ/∂y` from second input derivatives of γᵖ; requires `l = 0`.
    Direct,
    /// `kᵖ` is a network output tied to its constitutive law by a defect residual.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Mu,
    S0,
}

impl SweepParam {
    pub fn input_name(self) -> &'static str {
        match self {
            SweepParam::Mu => "mu",
            SweepParam::S0 => "s0",
        }
    }
}

/// One material parameter promoted to a network input, trained on an
/// equally spaced grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub param: SweepParam,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Sweep {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !(self.hi > self.lo && self.lo > 0.0) || self.count < 2 {
            return Err(PhysicsError::Config("sweep needs 0 < lo < hi and at least two grid values".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    pub fn scale(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }

    pub fn unscale(&self, s: f64) -> f64 {
        self.lo + s * (self.hi - self.lo)
    }
}

// ---------------------------------------------------------------------------
// Constitutive relations. Units are whatever the caller uses consistently.

/// `τ = μ(u_y − γᵖ)`.
pub fn elastic_stress<S: Scalar>(u_y: S, gamma_p: S, mu: f64) -> S {
    (u_y - gamma_p).mul_f(mu)
}

/// `dᵖ = √(γ̇ᵖ² + l²·γ̇ᵖ_y² + ε²)`.
pub fn effective_rate<S: Scalar>(rate: S, rate_grad: S, l: f64, eps: f64) -> S {
    let lg = rate_grad.mul_f(l);
    (rate * rate + lg * lg).add_f(eps * eps).sqrt()
}

/// `τᵖ = S·(dᵖ/d0)^m·γ̇ᵖ/dᵖ`.
pub fn microstress<S: Scalar>(rate: S, d: S, s: S, d0: f64, m: f64) -> Result<S, PhysicsError> {
    if !(d.value() > 0.0) {
        return Err(PhysicsError::BelowFloor { value: d.value() });
    }
    let dn = d.mul_f(1.0 / d0);
    Ok(s * rate * dn.powf(m) * d.recip())
}

/// `kᵖ = S0·L²·γᵖ_y + S0·l²·(dᵖ/d0)^m·γ̇ᵖ_y/dᵖ`; the dissipative term is skipped when `l = 0`.
#[allow(clippy::too_many_arguments)]
pub fn gradient_microstress<S: Scalar>(
    gamma_y: S,
    rate_grad: S,
    d: S,
    s0: f64,
    energetic: f64,
    dissipative: f64,
    d0: f64,
    m: f64,
) -> S {
    let mut k = gamma_y.mul_f(s0 * energetic * energetic);
    if dissipative > 0.0 {
        let dn = d.mul_f(1.0 / d0);
        k = k + (dn.powf(m) * rate_grad * d.recip()).mul_f(s0 * dissipative * dissipative);
    }
    k
}

/// `(Ṡ − H·dᵖ)/(H·d0)`.
pub fn residual_hardening<S: Scalar>(s_rate: S, d: S, hardening: f64, d0: f64) -> S {
    (s_rate - d.mul_f(hardening)).mul_f(1.0 / (hardening * d0))
}

/// Scaled residuals at one collocation point.
#[derive(Debug, Clone, Copy)]
pub struct Residuals1D<S> {
    pub macro_: S,
    pub micro: S,
    pub hardening: Option<S>,
    pub mixed: Option<S>,
}

/// Physical-unit state at one point, for export.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointState1D {
    pub y: f64,
    pub t: f64,
    pub strain: f64,
    pub u: f64,
    pub gamma_p: f64,
    pub tau: f64,
    pub tau_p: f64,
    pub k_p: f64,
    pub d_p: f64,
    pub s: f64,
}

#[derive(Debug, Clone)]
pub struct Problem1D {
    pub material: Material1D,
    pub loading: Loading,
    pub mode: MicroMode,
    pub eps_reg: f64,
    pub sweep: Option<Sweep>,
    spec: NetworkSpec,
    outputs: Outputs1D,
    hard_walls: bool,
}

impl Problem1D {
    pub fn new(
        material: Material1D,
        loading: Loading,
        mode: MicroMode,
        hidden: &[usize],
        sweep: Option<Sweep>,
        eps_reg: f64,
    ) -> Result<Self, PhysicsError> {
        material.validate()?;
        loading.validate()?;
        if !(eps_reg > 0.0) {
            return Err(PhysicsError::Config("eps_reg must be positive".into()));
        }
        if mode == MicroMode::Direct && material.dissipative_length > 0.0 {
            return Err(PhysicsError::Config(
                "direct mode requires a zero dissipative length scale; mixed mode is mandatory when l > 0".into(),
            ));
        }
        if let Some(s) = &sweep {
            s.validate()?;
            if material.hardening != 0.0 || material.energetic_length != 0.0 || material.dissipative_length != 0.0 {
                return Err(PhysicsError::Unsupported(
                    "parameter sweeps are defined for the length-scale-free, non-hardening model".into(),
                ));
            }
        }
        let mut inputs = vec!["y".to_string(), "t".to_string()];
        if let Some(s) = &sweep {
            inputs.push(s.param.input_name().to_string());
        }
        let mut names = vec!["u".to_string(), "gamma_p".to_string()];
        let resistance = (material.hardening != 0.0).then(|| {
            names.push("s".to_string());
            names.len() - 1
        });
        let micro_gradient = (mode == MicroMode::Mixed).then(|| {
            names.push("k_p".to_string());
            names.len() - 1
        });
        let spec = NetworkSpec::new(inputs, hidden, names)?;
        Ok(Problem1D {
            material,
            loading,
            mode,
            eps_reg,
            sweep,
            spec,
            outputs: Outputs1D {
                u: 0,
                gamma: 1,
                resistance,
                micro_gradient,
            },
            hard_walls: true,
        })
    }

    pub fn outputs(&self) -> &Outputs1D {
        &self.outputs
    }

    /// Drops the `ŷ(1−ŷ)` wall factor on γᵖ. Only meaningful without length
    /// scales, where the local flow rule admits no wall condition.
    pub fn with_hard_walls(mut self, on: bool) -> Self {
        self.hard_walls = on;
        self
    }

    pub fn hard_walls(&self) -> bool {
        self.hard_walls
    }

    /// Identifier of the constraint transform, stored in checkpoints.
    pub fn transform_id(&self) -> String {
        format!("sgp1d-ramp:walls={}:gain=elastic-ratio:v1", self.hard_walls as u8)
    }

    /// Material at a point; differs from `self.material` only under a sweep.
    pub fn material_at(&self, coords: &[f64]) -> Material1D {
        let mut m = self.material;
        if let Some(s) = &self.sweep {
            let v = s.unscale(coords[2]);
            match s.param {
                SweepParam::Mu => m.mu = v,
                SweepParam::S0 => m.s0 = v,
            }
        }
        m
    }

    /// Plastic-strain gain of the transform: the maximum applied strain in units of `S0/μ`.
    pub fn plastic_gain(&self, mat: &Material1D) -> f64 {
        self.loading.max_strain() / mat.strain_scale()
    }

    pub fn scaling_rules(&self, mat: &Material1D) -> ScalingRules {
        let h = mat.width;
        let mut inputs = vec![
            InputScale { name: "y".into(), lo: 0.0, hi: h },
            InputScale { name: "t".into(), lo: 0.0, hi: self.loading.t_max },
        ];
        if let Some(s) = &self.sweep {
            inputs.push(InputScale {
                name: s.param.input_name().into(),
                lo: s.lo,
                hi: s.hi,
            });
        }
        let mut outputs = vec![
            OutputScale {
                name: "u".into(),
                divisor: self.loading.top_displacement(self.loading.t_max, h),
            },
            OutputScale {
                name: "gamma_p".into(),
                divisor: mat.strain_scale(),
            },
        ];
        if self.outputs.resistance.is_some() {
            outputs.push(OutputScale { name: "s".into(), divisor: mat.s0 });
        }
        if self.outputs.micro_gradient.is_some() {
            outputs.push(OutputScale {
                name: "k_p".into(),
                divisor: mat.s0 * h,
            });
        }
        ScalingRules { inputs, outputs }
    }

    /// Constrained scaled fields at a point.
    pub fn fields<S: Scalar>(&self, coords: &[f64], raw: &[Jet2<S>]) -> Fields1D<S> {
        let mat = self.material_at(coords);
        let y = Jet2::lift(S::from_f64(coords[0]), Some(0), 2).expect("k = 2");
        let t = Jet2::lift(S::from_f64(coords[1]), Some(1), 2).expect("k = 2");
        let c = Constraint1D {
            hard_walls: self.hard_walls,
            plastic_gain: self.plastic_gain(&mat),
        };
        apply_constraints_1d(raw, &y, &t, &t, &self.outputs, &c)
    }

    pub fn residuals<S: Scalar>(&self, coords: &[f64], raw: &[Jet2<S>]) -> Result<Residuals1D<S>, PhysicsError> {
        let mat = self.material_at(coords);
        let f = self.fields(coords, raw);
        let g0 = mat.strain_scale();
        let a = self.loading.max_strain() / g0;
        let b = g0 / (self.loading.t_max * mat.d0);
        let (l_en, l_dis) = (mat.energetic_length, mat.dissipative_length);

        // τ/S0 as a first-order jet in (ŷ, t̂)
        let tau = f.u.partial(0).scale(a) - f.gamma.first_order();
        let rate = f.gamma.d1(1).mul_f(b);
        let rate_grad = f.gamma.d2(0, 1).mul_f(b);
        let d = effective_rate(rate, rate_grad, l_dis, self.eps_reg);
        let s = f.resistance.map(|j| j.value()).unwrap_or(S::from_f64(1.0));
        let tau_p = microstress(rate, d, s, 1.0, mat.m)?;

        let (k_grad, mixed) = match self.mode {
            MicroMode::Direct => (f.gamma.d2(0, 0).mul_f(l_en * l_en * g0), None),
            MicroMode::Mixed => {
                let k_net = f.micro_gradient.expect("mixed mode has a k_p output");
                let k_law = gradient_microstress(f.gamma.d1(0).mul_f(g0), rate_grad, d, 1.0, l_en, l_dis, 1.0, mat.m);
                (k_net.d1(0), Some(k_net.value() - k_law))
            }
        };

        let hardening = f.resistance.map(|sj| {
            let s_rate = sj.d1(1).mul_f(mat.s0 / self.loading.t_max);
            residual_hardening(s_rate, d.mul_f(mat.d0), mat.hardening, mat.d0)
        });

        Ok(Residuals1D {
            macro_: tau.d1(0).mul_f(1.0 / a),
            micro: tau.value() - tau_p + k_grad,
            hardening,
            mixed,
        })
    }

    /// Physical state at scaled coordinates from trained parameters.
    pub fn state_at(&self, theta: &[f64], coords: &[f64]) -> Result<PointState1D, PhysicsError> {
        let inputs: Vec<Jet2<f64>> = coords
            .iter()
            .enumerate()
            .map(|(i, &x)| Jet2::lift(x, (i < 2).then_some(i), 2))
            .collect::<Result<_, _>>()?;
        let raw = forward_jet(&self.spec, theta, &inputs)?;
        let mat = self.material_at(coords);
        let f = self.fields(coords, &raw);
        let g0 = mat.strain_scale();
        let a = self.loading.max_strain() / g0;
        let b = g0 / (self.loading.t_max * mat.d0);
        let tau = a * f.u.d1(0) - f.gamma.value();
        let rate = b * f.gamma.d1(1);
        let rate_grad = b * f.gamma.d2(0, 1);
        let d = effective_rate(rate, rate_grad, mat.dissipative_length, self.eps_reg);
        let s = f.resistance.map(|j| j.value()).unwrap_or(1.0);
        let tau_p = microstress(rate, d, s, 1.0, mat.m)?;
        let k = match (self.mode, f.micro_gradient) {
            (MicroMode::Mixed, Some(k)) => k.value(),
            _ => gradient_microstress(
                g0 * f.gamma.d1(0),
                rate_grad,
                d,
                1.0,
                mat.energetic_length,
                mat.dissipative_length,
                1.0,
                mat.m,
            ),
        };
        let t = coords[1] * self.loading.t_max;
        Ok(PointState1D {
            y: coords[0] * mat.width,
            t,
            strain: self.loading.strain_at(t),
            u: f.u.value() * self.loading.top_displacement(self.loading.t_max, mat.width),
            gamma_p: f.gamma.value() * g0,
            tau: tau * mat.s0,
            tau_p: tau_p * mat.s0,
            k_p: k * mat.s0 * mat.width,
            d_p: d * mat.d0,
            s: s * mat.s0,
        })
    }

    /// Scaled coordinates with an optional sweep value appended.
    pub fn coords(&self, y: f64, t: f64, param: Option<f64>) -> Vec<f64> {
        let mut c = vec![y, t];
        if let Some(s) = &self.sweep {
            c.push(s.scale(param.unwrap_or(match s.param {
                SweepParam::Mu => self.material.mu,
                SweepParam::S0 => self.material.s0,
            })));
        }
        c
    }

    /// Midplane stress versus applied strain at `n` equally spaced times.
    pub fn stress_strain(&self, theta: &[f64], n: usize, param: Option<f64>) -> Result<Vec<PointState1D>, PhysicsError> {
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1).max(1) as f64;
                self.state_at(theta, &self.coords(0.5, t, param))
            })
            .collect()
    }

    /// Plastic-strain profile across the strip at scaled time `t`.
    pub fn profile(&self, theta: &[f64], n: usize, t: f64, param: Option<f64>) -> Result<Vec<PointState1D>, PhysicsError> {
        (0..n)
            .map(|i| {
                let y = i as f64 / (n - 1).max(1) as f64;
                self.state_at(theta, &self.coords(y, t, param))
            })
            .collect()
    }
}

impl Problem for Problem1D {
    fn network(&self) -> &NetworkSpec {
        &self.spec
    }

    fn tracked(&self) -> usize {
        2
    }

    fn prepare_point(&self, index: usize, coords: &mut [f64]) {
        if let Some(s) = &self.sweep {
            let grid = s.grid();
            coords[2] = s.scale(grid[index % grid.len()]);
        }
    }

    fn point_terms<S: Scalar>(&self, coords: &[f64], raw: &[Jet2<S>]) -> Result<TermValues<S>, PhysicsError> {
        let r = self.residuals(coords, raw)?;
        let mut tv = TermValues::new();
        tv.add_square(Term::Macro, r.macro_);
        tv.add_square(Term::Micro, r.micro);
        if let Some(h) = r.hardening {
            tv.add_square(Term::Hardening, h);
        }
        if let Some(x) = r.mixed {
            tv.add_square(Term::Mixed, x);
        }
        Ok(tv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::init_params;
    use rand::{Rng, SeedableRng};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn elastic_stress_examples() {
        assert!(rel(elastic_stress(1e-3, 0.0, 100e9), 100e6) < 1e-12);
        assert_eq!(elastic_stress(2e-3, 2e-3, 100e9), 0.0);
        assert!(rel(elastic_stress(2e-3, 1e-3, 100e9), 100e6) < 1e-12);
    }

    #[test]
    fn effective_rate_examples() {
        let d = effective_rate(0.3, 0.04, 10.0, 0.0);
        assert!((d - 0.5).abs() < 1e-15);
        assert_eq!(effective_rate(0.0, 0.0, 10.0, 1e-8), 1e-8);
        let d = effective_rate(0.1, 5.0, 0.0, 1e-8);
        assert!((d - 0.1).abs() <= 1e-15);
    }

    #[test]
    fn microstress_examples() {
        let d = effective_rate(0.1, 0.0, 0.0, 1e-8);
        let tp = microstress(0.1, d, 100e6, 0.1, 0.02).unwrap();
        assert!(rel(tp, 100e6) < 1e-12);
        let d0 = effective_rate(0.0, 0.0, 0.0, 1e-8);
        assert_eq!(microstress(0.0, d0, 100e6, 0.1, 0.02).unwrap(), 0.0);
        let d = effective_rate(1.0, 0.0, 0.0, 1e-8);
        let tp = microstress(1.0, d, 100e6, 0.1, 0.02).unwrap();
        // 10^0.02 = exp(0.02 ln 10)
        assert!(rel(tp, 100e6 * (0.02 * 10f64.ln()).exp()) < 1e-12);
        assert!((tp / 1e6 - 104.7).abs() < 0.05);
        assert!(matches!(microstress(0.1, 0.0, 1.0, 0.1, 0.02), Err(PhysicsError::BelowFloor { .. })));
    }

    #[test]
    fn gradient_microstress_examples() {
        assert_eq!(gradient_microstress(1e-3, 0.5, 0.3, 100e6, 0.0, 0.0, 0.1, 0.02), 0.0);
        let k = gradient_microstress(1e-5, 0.0, 0.1, 100e6, 10.0, 0.0, 0.1, 0.02);
        assert!(rel(k, 100e6 * 100.0 * 1e-5) < 1e-14);
        assert_eq!(gradient_microstress(0.0, 0.0, 0.1, 100e6, 0.0, 10.0, 0.1, 0.02), 0.0);
    }

    #[test]
    fn hardening_residual_example() {
        assert!((residual_hardening(0.0, 0.1, 500e6, 0.1) + 1.0).abs() < 1e-15);
        assert_eq!(residual_hardening(500e6 * 0.1, 0.1, 500e6, 0.1), 0.0);
    }

    #[test]
    fn regularization_consistency() {
        let m = Material1D::default();
        let vals: Vec<f64> = [1e-6, 1e-8, 1e-10]
            .iter()
            .map(|&e| {
                let d = effective_rate(1.0, 0.0, 0.0, e);
                microstress(1.0, d, 1.0, 1.0, m.m).unwrap()
            })
            .collect();
        let spread = vals.iter().cloned().fold(f64::MIN, f64::max) - vals.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread / vals[0] <= 1e-6);
    }

    #[test]
    fn sign_and_monotonicity_of_microstress() {
        let mut last = 0.0;
        for i in 1..200 {
            let r = i as f64 * 0.05;
            let d = effective_rate(r, 0.0, 0.0, 1e-8);
            let tp = microstress(r, d, 1.0, 1.0, 0.02).unwrap();
            let dn = effective_rate(-r, 0.0, 0.0, 1e-8);
            let tn = microstress(-r, dn, 1.0, 1.0, 0.02).unwrap();
            assert_eq!(tn, -tp);
            assert!(tp > last);
            last = tp;
        }
    }

    #[test]
    fn direct_mode_rejects_dissipative_length() {
        let mat = Material1D {
            dissipative_length: 10.0,
            ..Default::default()
        };
        let err = Problem1D::new(mat, Loading::default(), MicroMode::Direct, &[8], None, DEFAULT_EPS_REG).unwrap_err();
        assert!(err.to_string().contains("mixed mode"));
        assert!(Problem1D::new(mat, Loading::default(), MicroMode::Mixed, &[8], None, DEFAULT_EPS_REG).is_ok());
    }

    #[test]
    fn output_list_follows_model() {
        let base = Problem1D::new(Material1D::default(), Loading::default(), MicroMode::Direct, &[4], None, 1e-8).unwrap();
        assert_eq!(base.network().output_names, vec!["u", "gamma_p"]);
        let mat = Material1D {
            hardening: 500e6,
            dissipative_length: 10.0,
            ..Default::default()
        };
        let p = Problem1D::new(mat, Loading::default(), MicroMode::Mixed, &[4], None, 1e-8).unwrap();
        assert_eq!(p.network().output_names, vec!["u", "gamma_p", "s", "k_p"]);
        assert!(p.hard_walls());
    }

    #[test]
    fn zero_network_residuals_match_elastic_ramp() {
        let p = Problem1D::new(Material1D::default(), Loading::default(), MicroMode::Direct, &[16, 16], None, 1e-8).unwrap();
        let theta = vec![0.0; p.network().param_count()];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let c = [rng.gen::<f64>(), rng.gen::<f64>()];
            let inputs = [Jet2::lift(c[0], Some(0), 2).unwrap(), Jet2::lift(c[1], Some(1), 2).unwrap()];
            let raw = forward_jet(p.network(), &theta, &inputs).unwrap();
            let r = p.residuals(&c, &raw).unwrap();
            let t = c[1] * p.loading.t_max;
            let tau_ramp = p.material.mu * p.loading.shear_rate * t;
            assert_eq!(r.macro_, 0.0);
            assert!((r.micro - tau_ramp / p.material.s0).abs() <= 1e-12);
        }
    }

    #[test]
    fn residual_homogeneity_under_common_stiffness_scaling() {
        let mat = Material1D {
            hardening: 500e6,
            energetic_length: 0.5,
            ..Default::default()
        };
        let scaled = Material1D {
            mu: mat.mu * 3.0,
            s0: mat.s0 * 3.0,
            hardening: mat.hardening * 3.0,
            ..mat
        };
        let p1 = Problem1D::new(mat, Loading::default(), MicroMode::Direct, &[8, 8], None, 1e-8).unwrap();
        let p2 = Problem1D::new(scaled, Loading::default(), MicroMode::Direct, &[8, 8], None, 1e-8).unwrap();
        let theta = init_params(p1.network(), 4).values;
        for c in [[0.3, 0.6], [0.8, 0.1], [0.5, 0.95]] {
            let inputs = [Jet2::lift(c[0], Some(0), 2).unwrap(), Jet2::lift(c[1], Some(1), 2).unwrap()];
            let raw = forward_jet(p1.network(), &theta, &inputs).unwrap();
            let r1 = p1.residuals(&c, &raw).unwrap();
            let r2 = p2.residuals(&c, &raw).unwrap();
            assert!((r1.micro - r2.micro).abs() <= 1e-12 * (1.0 + r1.micro.abs()));
            let (h1, h2) = (r1.hardening.unwrap(), r2.hardening.unwrap());
            assert!((h1 - h2).abs() <= 1e-12 * (1.0 + h1.abs()));
        }
    }

    #[test]
    fn sweep_grid_has_endpoints() {
        let s = Sweep {
            param: SweepParam::Mu,
            lo: 10e9,
            hi: 1000e9,
            count: 30,
        };
        let g = s.grid();
        assert_eq!(g.len(), 30);
        assert_eq!(g[0], 10e9);
        assert_eq!(g[29], 1000e9);
        let nearest = g.iter().map(|v| (v - 100e9).abs()).fold(f64::MAX, f64::min);
        assert!(nearest > 12e9);
    }
}
