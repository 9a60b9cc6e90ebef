//! Plane-strain strain-gradient plasticity of a sheared strip.
//!
//! The domain is `[0, w] × [0, h]` in `(x1, x2)`; the bottom is clamped and
//! the top is sheared by `u1 = Γ̇·h·t`. The network carries the displacement,
//! the equivalent plastic strain and the three independent in-plane
//! plastic-strain components; `E^p_33 = −(E^p_11 + E^p_22)`. Residuals (all
//! scaled):
//!
//! * macro (2): `div T + b` over `μ·u_max/h²`
//! * micro: `(div ξ + τ − π) / S0`
//! * evolution (3): `Ė^p − γ̇ᵖ·N^p` over the applied rate
//! * accumulation penalty: `max(−γ̇ᵖ, 0)²` on the same rate scale
//! * mixed defect (2, when `l3 > 0`): `ξ_net − ξ_constitutive`

use serde::{Deserialize, Serialize};

use crate::ad::{Jet1, Jet2, Scalar};
use crate::net::{apply_constraints_2d, forward_jet, Constraint2D, Fields2D, NetworkSpec, Outputs2D};
use crate::net::{InputScale, OutputScale, ScalingRules};
use crate::physics1d::Loading;
use crate::problem::{PhysicsError, Problem, Term, TermValues};

/// Regularization of `|T0|` inside the flow direction, in units of S0.
pub const EPS_DIR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material2D {
    pub young: f64,
    pub poisson: f64,
    pub s0: f64,
    pub d0: f64,
    pub nu0: f64,
    pub m: f64,
    pub q: f64,
    pub hardening: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub width: f64,
    /// Body force (Pa/m), constant.
    pub body_force: [f64; 2],
}

impl Default for Material2D {
    fn default() -> Self {
        Material2D {
            young: 210e9,
            poisson: 0.3,
            s0: 141.4e6,
            d0: 0.02828,
            nu0: 0.02828,
            m: 0.05,
            q: 0.05,
            hardening: 0.0,
            l1: 0.0,
            l2: 0.0,
            l3: 0.0,
            width: 1e-6,
            body_force: [0.0, 0.0],
        }
    }
}

impl Material2D {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        let bad = |w: &str| Err(PhysicsError::InvalidMaterial(w.to_string()));
        if !(self.young > 0.0) {
            return bad("Young's modulus must be positive");
        }
        if !(self.poisson > 0.0 && self.poisson < 0.5) {
            return bad("Poisson ratio must lie in (0, 0.5)");
        }
        if !(self.s0 > 0.0 && self.d0 > 0.0 && self.nu0 > 0.0) {
            return bad("s0, d0 and nu0 must be positive");
        }
        if !(self.m > 0.0 && self.m < 1.0) {
            return bad("m must lie in (0, 1)");
        }
        if !(self.q > 0.0) {
            return bad("q must be positive");
        }
        if !(self.hardening >= 0.0) {
            return bad("hardening modulus must be non-negative");
        }
        if !(self.l1 >= 0.0 && self.l2 >= 0.0 && self.l3 >= 0.0) {
            return bad("length scales must be non-negative");
        }
        if !(self.width > 0.0) {
            return bad("strip width must be positive");
        }
        if self.body_force.iter().any(|b| !b.is_finite()) {
            return bad("body force must be finite");
        }
        if self.l2 != 0.0 {
            return Err(PhysicsError::Unsupported(
                "l2 > 0 is not supported: the dissipative gradient-hardening rate mixes a vector and a tensor without a defined product".into(),
            ));
        }
        Ok(())
    }

    pub fn shear_modulus(&self) -> f64 {
        self.young / (2.0 * (1.0 + self.poisson))
    }

    pub fn lame_lambda(&self) -> f64 {
        self.young * self.poisson / ((1.0 + self.poisson) * (1.0 - 2.0 * self.poisson))
    }

    pub fn strain_scale(&self) -> f64 {
        self.s0 / self.shear_modulus()
    }
}

/// Default 2D loading: `Γ̇ = 0.02 s⁻¹` over one second.
pub fn default_loading_2d() -> Loading {
    Loading {
        shear_rate: 0.02,
        t_max: 1.0,
    }
}

// ---------------------------------------------------------------------------
// Constitutive relations on 3×3 tensors stored as [[S; 3]; 3].

pub type Tensor<S> = [[S; 3]; 3];

/// Entry type of a tensor: plain scalars or first-order jets.
pub trait Entry: Copy + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> + std::ops::Neg<Output = Self> {
    /// Zero with the same shape as `self`.
    fn zero_like(&self) -> Self;
    fn times(self, c: f64) -> Self;
}

impl<S: Scalar> Entry for S {
    fn zero_like(&self) -> Self {
        S::zero()
    }
    fn times(self, c: f64) -> Self {
        self.mul_f(c)
    }
}

impl<S: Scalar> Entry for Jet1<S> {
    fn zero_like(&self) -> Self {
        Jet1::constant(S::zero(), self.k())
    }
    fn times(self, c: f64) -> Self {
        self.scale(c)
    }
}

/// Plane-strain small strain from the in-plane displacement gradient `grad[i][j] = u_i,j`.
pub fn strain_from_displacement<S: Entry>(grad: [[S; 2]; 2]) -> Tensor<S> {
    let z = grad[0][0].zero_like();
    let off = (grad[0][1] + grad[1][0]).times(0.5);
    [[grad[0][0], off, z], [off, grad[1][1], z], [z, z, z]]
}

/// Plastic strain tensor from its three independent in-plane components.
pub fn plastic_tensor<S: Entry>(ep11: S, ep22: S, ep12: S) -> Tensor<S> {
    let z = ep11.zero_like();
    [[ep11, ep12, z], [ep12, ep22, z], [z, z, -(ep11 + ep22)]]
}

pub fn trace<S: Entry>(t: &Tensor<S>) -> S {
    t[0][0] + t[1][1] + t[2][2]
}

/// `T = 2μ(E − E^p) + λ tr(E) 1`.
pub fn cauchy_stress<S: Entry>(e: &Tensor<S>, ep: &Tensor<S>, mu: f64, lambda: f64) -> Tensor<S> {
    let tr = trace(e).times(lambda);
    let mut t = *e;
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = (e[i][j] - ep[i][j]).times(2.0 * mu);
            if i == j {
                t[i][j] = t[i][j] + tr;
            }
        }
    }
    t
}

pub fn deviator<S: Scalar>(t: &Tensor<S>) -> Tensor<S> {
    let p = trace(t).mul_f(1.0 / 3.0);
    let mut d = *t;
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = row[i] - p;
    }
    d
}

/// Frobenius norm squared.
pub fn norm_sq<S: Scalar>(t: &Tensor<S>) -> S {
    let mut s = S::zero();
    for row in t {
        for &v in row {
            s = s + v * v;
        }
    }
    s
}

/// `N^p = T0/√(|T0|² + ε²)`.
pub fn flow_direction<S: Scalar>(t0: &Tensor<S>, eps: f64) -> Tensor<S> {
    let inv = norm_sq(t0).add_f(eps * eps).sqrt().recip();
    t0.map(|row| row.map(|v| v * inv))
}

fn pos<S: Scalar>(x: S) -> S {
    if x.value() > 0.0 {
        x
    } else {
        S::zero()
    }
}

/// `π = S0·f(γᵖ)·(γ̇ᵖ⁺/ν0 + ε)^m` with `f = 1 + (H0/S0)γᵖ`; `rate` is `γ̇ᵖ/ν0`.
pub fn resistance_pi<S: Scalar>(gamma_p: S, rate: S, s0: f64, h0: f64, m: f64, eps: f64) -> S {
    let f = gamma_p.mul_f(h0 / s0).add_f(1.0);
    (f * pos(rate).add_f(eps).powf(m)).mul_f(s0)
}

/// `ξ = S0·l1²·∇γᵖ + S0·(dᵖ/d0)^q·l3²·∇γ̇ᵖ/dᵖ`, with `dᵖ` floored at `eps·d0`.
/// Arguments are per unit length and per `d0`: `grad_rate = ∇γ̇ᵖ/d0`.
pub fn micro_stress_xi<S: Scalar>(grad_gamma: [S; 2], grad_rate: [S; 2], s0: f64, l1: f64, l3: f64, q: f64, eps: f64) -> [S; 2] {
    let mut xi = [grad_gamma[0].mul_f(s0 * l1 * l1), grad_gamma[1].mul_f(s0 * l1 * l1)];
    if l3 > 0.0 {
        let d = (grad_rate[0] * grad_rate[0] + grad_rate[1] * grad_rate[1]).mul_f(l3 * l3).add_f(eps * eps).sqrt();
        let c = d.powf(q) * d.recip();
        for i in 0..2 {
            xi[i] = xi[i] + (c * grad_rate[i]).mul_f(s0 * l3 * l3);
        }
    }
    xi
}

/// `max(−r, 0)²`.
pub fn accumulation_penalty<S: Scalar>(rate: S) -> S {
    let n = pos(-rate);
    n * n
}

#[derive(Debug, Clone, Copy)]
pub struct Residuals2D<S> {
    pub macro_: [S; 2],
    pub micro: S,
    pub evolution: [S; 3],
    pub accumulation: S,
    pub mixed: Option<[S; 2]>,
}

/// Physical state at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointState2D {
    pub x1: f64,
    pub x2: f64,
    pub t: f64,
    pub strain: f64,
    pub u1: f64,
    pub u2: f64,
    pub gamma_p: f64,
    /// E^p_11, E^p_22, E^p_12, E^p_33.
    pub ep: [f64; 4],
    /// T11, T22, T33, T12.
    pub stress: [f64; 4],
    /// `|T0|`.
    pub tau: f64,
    pub n_norm: f64,
    pub pi: f64,
}

impl PointState2D {
    /// `√(3/2)·|T0|`.
    pub fn equivalent_stress(&self) -> f64 {
        1.5f64.sqrt() * self.tau
    }
}

#[derive(Debug, Clone)]
pub struct Problem2D {
    pub material: Material2D,
    pub loading: Loading,
    pub eps_reg: f64,
    /// Domain width `w/h` along x1.
    pub aspect: f64,
    spec: NetworkSpec,
    outputs: Outputs2D,
}

struct Scales {
    g0: f64,
    a: f64,
    b: f64,
    lam_over_mu: f64,
}

impl Problem2D {
    pub fn new(material: Material2D, loading: Loading, hidden: &[usize], eps_reg: f64) -> Result<Self, PhysicsError> {
        material.validate()?;
        loading.validate()?;
        if !(eps_reg > 0.0) {
            return Err(PhysicsError::Config("eps_reg must be positive".into()));
        }
        let mut names: Vec<String> = ["u1", "u2", "gamma_p", "ep11", "ep22", "ep12"].iter().map(|s| s.to_string()).collect();
        let xi = (material.l3 > 0.0).then(|| {
            names.push("xi1".into());
            names.push("xi2".into());
            (6, 7)
        });
        let spec = NetworkSpec::new(["x1", "x2", "t"], hidden, names)?;
        Ok(Problem2D {
            material,
            loading,
            eps_reg,
            aspect: 1.0,
            spec,
            outputs: Outputs2D {
                u1: 0,
                u2: 1,
                gamma: 2,
                ep11: 3,
                ep22: 4,
                ep12: 5,
                xi,
            },
        })
    }

    pub fn with_aspect(mut self, aspect: f64) -> Self {
        self.aspect = aspect;
        self
    }

    pub fn mixed(&self) -> bool {
        self.outputs.xi.is_some()
    }

    pub fn scaling_rules(&self) -> ScalingRules {
        let h = self.material.width;
        let g0 = self.material.strain_scale();
        let mut outputs: Vec<OutputScale> = ["u1", "u2"]
            .iter()
            .map(|n| OutputScale {
                name: n.to_string(),
                divisor: self.loading.top_displacement(self.loading.t_max, h),
            })
            .collect();
        for n in ["gamma_p", "ep11", "ep22", "ep12"] {
            outputs.push(OutputScale { name: n.into(), divisor: g0 });
        }
        if self.mixed() {
            for n in ["xi1", "xi2"] {
                outputs.push(OutputScale {
                    name: n.into(),
                    divisor: self.material.s0 * h,
                });
            }
        }
        ScalingRules {
            inputs: vec![
                InputScale { name: "x1".into(), lo: 0.0, hi: self.aspect * h },
                InputScale { name: "x2".into(), lo: 0.0, hi: h },
                InputScale { name: "t".into(), lo: 0.0, hi: self.loading.t_max },
            ],
            outputs,
        }
    }

    pub fn transform_id(&self) -> String {
        "sgp2d-ramp:walls=1:gain=elastic-ratio:v1".into()
    }

    fn scales(&self) -> Scales {
        let g0 = self.material.strain_scale();
        Scales {
            g0,
            a: self.loading.max_strain() / g0,
            b: g0 / (self.loading.t_max * self.material.d0),
            lam_over_mu: self.material.lame_lambda() / self.material.shear_modulus(),
        }
    }

    pub fn fields<S: Scalar>(&self, coords: &[f64], raw: &[Jet2<S>]) -> Fields2D<S> {
        let x2 = Jet2::lift(S::from_f64(coords[1]), Some(1), 3).expect("k = 3");
        let t = Jet2::lift(S::from_f64(coords[2]), Some(2), 3).expect("k = 3");
        let c = Constraint2D {
            hard_walls: true,
            plastic_gain: self.scales().a,
        };
        apply_constraints_2d(raw, &x2, &t, &t, &self.outputs, &c)
    }

    /// Scaled stress `T/S0` as first-order jets, and the scaled fields.
    fn stress_jets<S: Scalar>(&self, f: &Fields2D<S>) -> Tensor<Jet1<S>> {
        let sc = self.scales();
        // x1 is stretched by the aspect ratio: x̂1 ∈ [0,1] maps to [0, w/h].
        let gu = |u: &Jet2<S>, j: usize| {
            let d = u.partial(j).scale(sc.a);
            if j == 0 {
                d.scale(1.0 / self.aspect)
            } else {
                d
            }
        };
        let grad = [[gu(&f.u1, 0), gu(&f.u1, 1)], [gu(&f.u2, 0), gu(&f.u2, 1)]];
        let e = strain_from_displacement(grad);
        let ep = plastic_tensor(f.ep[0].first_order(), f.ep[1].first_order(), f.ep[2].first_order());
        cauchy_stress(&e, &ep, 1.0, sc.lam_over_mu)
    }

    pub fn residuals<S: Scalar>(&self, coords: &[f64], raw: &[Jet2<S>]) -> Result<Residuals2D<S>, PhysicsError> {
        let sc = self.scales();
        let mat = &self.material;
        let f = self.fields(coords, raw);
        let t = self.stress_jets(&f);
        let kx = 1.0 / self.aspect;

        let body = [
            mat.body_force[0] * mat.width / (mat.shear_modulus() * self.loading.max_strain()),
            mat.body_force[1] * mat.width / (mat.shear_modulus() * self.loading.max_strain()),
        ];
        let macro_ = [
            (t[0][0].d1(0).mul_f(kx) + t[0][1].d1(1)).mul_f(1.0 / sc.a).add_f(body[0]),
            (t[1][0].d1(0).mul_f(kx) + t[1][1].d1(1)).mul_f(1.0 / sc.a).add_f(body[1]),
        ];

        let tv = t.map(|r| r.map(|j| j.value()));
        let t0 = deviator(&tv);
        let tau = norm_sq(&t0).sqrt();
        let n = flow_direction(&t0, EPS_DIR);

        let gamma = f.gamma.value();
        let rate_hat = f.gamma.d1(2);
        // γ̇ᵖ/ν0 = (S0/μ)/(t_max·ν0)·∂γ̂/∂t̂
        let rate_nu = rate_hat.mul_f(sc.g0 / (self.loading.t_max * mat.nu0));
        let pi = resistance_pi(gamma.mul_f(sc.g0), rate_nu, 1.0, mat.hardening / mat.s0, mat.m, self.eps_reg);

        let (div_xi, mixed) = match f.xi {
            None => {
                let lap = f.gamma.d2(0, 0).mul_f(kx * kx) + f.gamma.d2(1, 1);
                (lap.mul_f(mat.l1 * mat.l1 * sc.g0), None)
            }
            Some(xi) => {
                let grad_g = [f.gamma.d1(0).mul_f(kx * sc.g0), f.gamma.d1(1).mul_f(sc.g0)];
                let grad_r = [f.gamma.d2(0, 2).mul_f(kx * sc.b), f.gamma.d2(1, 2).mul_f(sc.b)];
                let law = micro_stress_xi(grad_g, grad_r, 1.0, mat.l1, mat.l3, mat.q, self.eps_reg);
                let div = xi[0].d1(0).mul_f(kx) + xi[1].d1(1);
                (div, Some([xi[0].value() - law[0], xi[1].value() - law[1]]))
            }
        };

        let inv_a = 1.0 / sc.a;
        let idx = [(0, 0), (1, 1), (0, 1)];
        let mut evolution = [S::zero(); 3];
        for (k, &(i, j)) in idx.iter().enumerate() {
            evolution[k] = (f.ep[k].d1(2) - rate_hat * n[i][j]).mul_f(inv_a);
        }

        Ok(Residuals2D {
            macro_,
            micro: div_xi + tau - pi,
            evolution,
            accumulation: accumulation_penalty(rate_hat.mul_f(inv_a)),
            mixed,
        })
    }

    pub fn state_at(&self, theta: &[f64], coords: &[f64]) -> Result<PointState2D, PhysicsError> {
        let inputs: Vec<Jet2<f64>> = coords.iter().enumerate().map(|(i, &x)| Jet2::lift(x, Some(i), 3)).collect::<Result<_, _>>()?;
        let raw = forward_jet(&self.spec, theta, &inputs)?;
        let sc = self.scales();
        let mat = &self.material;
        let f = self.fields(coords, &raw);
        let t = self.stress_jets(&f).map(|r| r.map(|j| j.value()));
        let t0 = deviator(&t);
        let tau = norm_sq(&t0).sqrt();
        let n = flow_direction(&t0, EPS_DIR);
        let rate_nu = f.gamma.d1(2) * sc.g0 / (self.loading.t_max * mat.nu0);
        let pi = resistance_pi(f.gamma.value() * sc.g0, rate_nu, 1.0, mat.hardening / mat.s0, mat.m, self.eps_reg);
        let ep: Vec<f64> = f.ep.iter().map(|e| e.value() * sc.g0).collect();
        let umax = self.loading.max_strain() * mat.width;
        let time = coords[2] * self.loading.t_max;
        Ok(PointState2D {
            x1: coords[0] * self.aspect * mat.width,
            x2: coords[1] * mat.width,
            t: time,
            strain: self.loading.strain_at(time),
            u1: f.u1.value() * umax,
            u2: f.u2.value() * umax,
            gamma_p: f.gamma.value() * sc.g0,
            ep: [ep[0], ep[1], ep[2], -(ep[0] + ep[1])],
            stress: [t[0][0], t[1][1], t[2][2], t[0][1]].map(|v| v * mat.s0),
            tau: tau * mat.s0,
            n_norm: norm_sq(&n).sqrt(),
            pi: pi * mat.s0,
        })
    }

    /// Stress history at the strip centre.
    pub fn stress_strain(&self, theta: &[f64], n: usize) -> Result<Vec<PointState2D>, PhysicsError> {
        (0..n)
            .map(|i| self.state_at(theta, &[0.5, 0.5, i as f64 / (n - 1).max(1) as f64]))
            .collect()
    }

    pub fn profile(&self, theta: &[f64], n: usize, t: f64) -> Result<Vec<PointState2D>, PhysicsError> {
        (0..n)
            .map(|i| self.state_at(theta, &[0.5, i as f64 / (n - 1).max(1) as f64, t]))
            .collect()
    }

    /// Largest scaled `|∂field/∂x̂1|` over an `n × n × n` probe grid, across
    /// displacement, plastic strain and plastic-strain components.
    pub fn x1_variation(&self, theta: &[f64], n: usize) -> Result<f64, PhysicsError> {
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let c = [(i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64, (k as f64 + 0.5) / n as f64];
                    let inputs: Vec<Jet2<f64>> = c.iter().enumerate().map(|(d, &x)| Jet2::lift(x, Some(d), 3)).collect::<Result<_, _>>()?;
                    let raw = forward_jet(&self.spec, theta, &inputs)?;
                    let f = self.fields(&c, &raw);
                    let a = self.scales().a;
                    let vals = [
                        f.u1.d1(0),
                        f.u2.d1(0),
                        f.gamma.d1(0) / a,
                        f.ep[0].d1(0) / a,
                        f.ep[1].d1(0) / a,
                        f.ep[2].d1(0) / a,
                    ];
                    worst = vals.iter().fold(worst, |w, v| w.max(v.abs()));
                }
            }
        }
        Ok(worst)
    }
}

impl Problem for Problem2D {
    fn network(&self) -> &NetworkSpec {
        &self.spec
    }

    fn tracked(&self) -> usize {
        3
    }

    fn point_terms<S: Scalar>(&self, coords: &[f64], raw: &[Jet2<S>]) -> Result<TermValues<S>, PhysicsError> {
        let r = self.residuals(coords, raw)?;
        let mut tv = TermValues::new();
        for m in r.macro_ {
            tv.add_square(Term::Macro, m);
        }
        tv.add_square(Term::Micro, r.micro);
        for e in r.evolution {
            tv.add_square(Term::Evolution, e);
        }
        tv.add(Term::Penalty, r.accumulation);
        if let Some(x) = r.mixed {
            for v in x {
                tv.add_square(Term::Mixed, v);
            }
        }
        Ok(tv)
    }
}
