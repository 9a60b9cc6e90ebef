//! Acceptance criteria, one line per criterion.
//!
//! Criteria 1, 2, 9 and 10 are deterministic and fail the run. The training
//! criteria (3 to 8) report PASS/FAIL and only fail the run when
//! `SGP_ACCEPT_STRICT=1`. `SGP_ACCEPT_BUDGET=full` trains at the budgets in
//! `configs/`; the default trims the expensive ones (see `Budget`).
//! Positional arguments select criteria by number, e.g. `-- 3 9`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sgp_pinn::ad::{Jet2, Scalar};
use sgp_pinn::io::{BuiltProblem, RunConfig};
use sgp_pinn::net::{forward_batch, forward_jet, init_params, BatchInput, NetworkSpec};
use sgp_pinn::oracle::{homogeneous_ode, mol_energetic, OdeSeries};
use sgp_pinn::physics1d::{Loading, Material1D, MicroMode, Problem1D};
use sgp_pinn::physics2d::{default_loading_2d, Material2D, Problem2D};
use sgp_pinn::problem::{PhysicsError, Problem, Term, TermValues};
use sgp_pinn::run;
use sgp_pinn::train::{compute_loss, CollocationBatch, FitResult, LossWeights, Role};

// criterion 1
const GRAD_REL_TOL: f64 = 1e-6;
const GRAD_FLOOR: f64 = 1e-3;
const GRAD_FD_STEP: f64 = 1e-5;
const GRAD_INDICES: usize = 40;
const MIXED_TOL: f64 = 1e-4;
const MIXED_FD_STEP: f64 = 1e-4;
const AD_NETS: usize = 50;
// criterion 2
const CONSTRAINT_TOL: f64 = 1e-12;
const CONSTRAINT_THETAS: usize = 1000;
const CONSTRAINT_SAMPLES: usize = 1000;
// criterion 3
const BASE_MAX_DEV: f64 = 0.03;
const BASE_SLOPE_TOL: f64 = 0.05;
const BASE_PLATEAU_TOL: f64 = 0.03;
const ELASTIC_FRACTION: f64 = 0.4;
const CURVE_POINTS: usize = 251;
// criterion 4
const HARD_SLOPE_TOL: f64 = 0.10;
const HARD_MAX_DEV: f64 = 0.05;
// criterion 5
const WALL_TOL: f64 = 1e-3;
const SYMMETRY_TOL: f64 = 0.02;
const MIDPOINT_TOL: f64 = 0.10;
const MOL_NODES: usize = 101;
// criterion 6
const DISS_LOSS_TOL: f64 = 1e-3;
const DISS_MIXED_TOL: f64 = 1e-4;
const MONOTONE_SLACK: f64 = 1e-4;
// criterion 7
const X1_TOL: f64 = 1e-3;
const X1_PROBES: usize = 8;
const T12_TOL: f64 = 0.05;
const NORM_TOL: f64 = 1e-6;
const FLOWING_FRACTION: f64 = 0.9;
// criterion 8
const SWEEP_MU_DEV: f64 = 0.05;
const SWEEP_S0_TOL: f64 = 0.05;
const SWEEP_S0_NEEDED: usize = 3;
// criterion 9
const ORACLE_TOL: f64 = 1e-5;
const L0_REL_TOL: f64 = 1e-6;
const HALVING_TOLS: (f64, f64) = (5e-4, 2.5e-4);
const HALVING_REF_TOL: f64 = 1e-6;
const HALVING_MIN_RATIO: f64 = 1.8;
const GRID_CHANGE_TOL: f64 = 0.01;

#[derive(Clone, Copy, PartialEq)]
enum Budget {
    Reduced,
    Full,
}

/// Training size for one experiment under the reduced budget.
struct Trim {
    epochs: usize,
    collocation: usize,
    hidden: &'static [usize],
}

impl Budget {
    fn from_env() -> Self {
        match std::env::var("SGP_ACCEPT_BUDGET").as_deref() {
            Ok("full") => Budget::Full,
            _ => Budget::Reduced,
        }
    }

    fn trim(self, experiment: &str) -> Option<Trim> {
        if self == Budget::Full {
            return None;
        }
        match experiment {
            "energetic" | "dissipative" => Some(Trim {
                epochs: 5000,
                collocation: 2000,
                hidden: &[64, 64, 64],
            }),
            "shear2d" => Some(Trim {
                epochs: 3000,
                collocation: 2000,
                hidden: &[32, 32, 32],
            }),
            "sweep_mu" | "sweep_s0" => Some(Trim {
                epochs: 10000,
                collocation: 2000,
                hidden: &[32, 32, 32],
            }),
            _ => None,
        }
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn work_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name)
}

fn load(name: &str, budget: Budget) -> RunConfig {
    let mut cfg = RunConfig::load(&config_dir().join(format!("{name}.toml"))).expect("shipped config parses");
    if let Some(t) = budget.trim(name) {
        cfg.train.epochs = t.epochs;
        cfg.train.collocation = t.collocation;
        cfg.network.hidden = t.hidden.to_vec();
    }
    cfg
}

fn budget_note(cfg: &RunConfig) -> String {
    format!("{}x{}, {} epochs, {} pts", cfg.network.hidden.len(), cfg.network.hidden[0], cfg.train.epochs, cfg.train.collocation)
}

fn train(cfg: &RunConfig) -> Result<FitResult, String> {
    let out = work_dir(&cfg.experiment);
    let r = run::train(cfg, &out).map_err(|e| e.to_string())?;
    Ok(r.fit)
}

fn problem_1d(cfg: &RunConfig) -> Problem1D {
    match cfg.build().expect("config builds") {
        BuiltProblem::OneD(p) => p,
        BuiltProblem::TwoD(_) => panic!("expected a 1d config"),
    }
}

fn max_abs_dev(pinn: &[(f64, f64)], oracle: &OdeSeries) -> f64 {
    pinn.iter().map(|&(g, tau)| (tau - oracle.tau_at_strain(g)).abs()).fold(0.0, f64::max)
}

fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn curve(p: &Problem1D, theta: &[f64], param: Option<f64>) -> Result<Vec<(f64, f64)>, PhysicsError> {
    Ok(p.stress_strain(theta, CURVE_POINTS, param)?.iter().map(|s| (s.strain, s.tau)).collect())
}

// ---------------------------------------------------------------------------

/// Two-output residual mixing values, first and second input derivatives.
struct PinnStyle {
    spec: NetworkSpec,
}

impl Problem for PinnStyle {
    fn network(&self) -> &NetworkSpec {
        &self.spec
    }

    fn tracked(&self) -> usize {
        self.spec.n_inputs()
    }

    fn point_terms<S: Scalar>(&self, _coords: &[f64], raw: &[Jet2<S>]) -> Result<TermValues<S>, PhysicsError> {
        let (u, v) = (&raw[0], &raw[1]);
        let mut tv = TermValues::new();
        tv.add_square(Term::Macro, u.d2(0, 0) + u.d2(1, 1).mul_f(0.5) - v.value());
        tv.add_square(Term::Micro, u.d1(1) + u.value() * v.d1(0) - v.d2(0, 1).tanh());
        tv.add_square(Term::Hardening, (u.value() - v.d1(1)).add_f(-0.25));
        Ok(tv)
    }
}

fn random_theta(spec: &NetworkSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut th = init_params(spec, rng.gen()).values;
    for v in &mut th {
        *v += rng.gen_range(-0.1..0.1);
    }
    th
}

fn c1_autodiff() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut grad_worst = 0.0f64;
    let mut mixed_worst = 0.0f64;
    for _ in 0..AD_NETS {
        let n_in = rng.gen_range(2..=4);
        let hidden: Vec<usize> = (0..3).map(|_| rng.gen_range(32..=64)).collect();
        let inputs: Vec<String> = (0..n_in).map(|i| format!("x{i}")).collect();
        let spec = NetworkSpec::new(inputs, &hidden, ["u", "v"]).unwrap();
        let theta = random_theta(&spec, &mut rng);
        let p = PinnStyle { spec: spec.clone() };
        let coords: Vec<f64> = (0..16 * n_in).map(|_| rng.gen()).collect();
        let batch = CollocationBatch::from_points(n_in, coords.clone(), Role::Training).unwrap();
        let w = LossWeights::default();
        let (_, g) = compute_loss(&p, &theta, &batch, &w, true).unwrap();
        let g = g.unwrap();
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut loss = |th: &[f64]| compute_loss(&p, th, &batch, &w, false).unwrap().0.total;
        for _ in 0..GRAD_INDICES {
            let i = rng.gen_range(0..theta.len());
            let fd = sgp_pinn::ad::central_difference(&mut loss, &theta, i, GRAD_FD_STEP);
            let rel = (fd - g[i]).abs() / g[i].abs().max(GRAD_FLOOR * scale);
            grad_worst = grad_worst.max(rel);
        }

        let value = |x: &[f64], o: usize| {
            let jets: Vec<Jet2<f64>> = x.iter().map(|&v| Jet2::constant(v, 1)).collect();
            forward_jet(&spec, &theta, &jets).unwrap()[o].value()
        };
        let x: Vec<f64> = (0..n_in).map(|_| rng.gen_range(0.1..0.9)).collect();
        let jets: Vec<Jet2<f64>> = x.iter().enumerate().map(|(i, &v)| Jet2::lift(v, Some(i), n_in).unwrap()).collect();
        let out = forward_jet(&spec, &theta, &jets).unwrap();
        let h = MIXED_FD_STEP;
        for i in 0..n_in {
            for j in (i + 1)..n_in {
                for (o, jet) in out.iter().enumerate() {
                    let shifted = |di: f64, dj: f64| {
                        let mut y = x.clone();
                        y[i] += di;
                        y[j] += dj;
                        value(&y, o)
                    };
                    let fd = (shifted(h, h) - shifted(h, -h) - shifted(-h, h) + shifted(-h, -h)) / (4.0 * h * h);
                    let ad = jet.d2(i, j);
                    mixed_worst = mixed_worst.max((fd - ad).abs() / ad.abs().max(1.0));
                }
            }
        }
    }
    verdict(
        grad_worst <= GRAD_REL_TOL && mixed_worst <= MIXED_TOL,
        format!("{AD_NETS} nets: parameter gradient rel err {grad_worst:.2e} (<= {GRAD_REL_TOL:.0e}), mixed second derivative err {mixed_worst:.2e} (<= {MIXED_TOL:.0e})"),
    )
}

fn c2_constraints() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mat = Material1D {
        hardening: 500e6,
        energetic_length: 10.0,
        dissipative_length: 10.0,
        ..Default::default()
    };
    let p1 = Problem1D::new(mat, Loading::default(), MicroMode::Mixed, &[16, 16, 16], None, 1e-8).unwrap();
    let m2 = Material2D { l3: 10.0, ..Default::default() };
    let p2 = Problem2D::new(m2, default_loading_2d(), &[16, 16, 16], 1e-8).unwrap();
    let mut worst = 0.0f64;
    let mut check = |v: f64| worst = worst.max(v.abs());
    // side 0: lower wall, 1: upper wall, 2: initial time
    let side = |k: usize| k % 3;
    for _ in 0..CONSTRAINT_THETAS {
        let th1 = random_theta(p1.network(), &mut rng);
        let th2 = random_theta(p2.network(), &mut rng);
        let pts1: Vec<[f64; 2]> = (0..CONSTRAINT_SAMPLES)
            .map(|k| {
                let r: f64 = rng.gen();
                match side(k) {
                    0 => [0.0, r],
                    1 => [1.0, r],
                    _ => [r, 0.0],
                }
            })
            .collect();
        let pts2: Vec<[f64; 3]> = (0..CONSTRAINT_SAMPLES)
            .map(|k| {
                let (r, r2): (f64, f64) = (rng.gen(), rng.gen());
                match side(k) {
                    0 => [r2, 0.0, r],
                    1 => [r2, 1.0, r],
                    _ => [r2, r, 0.0],
                }
            })
            .collect();
        let refs1: Vec<&[f64]> = pts1.iter().map(|c| c.as_slice()).collect();
        let refs2: Vec<&[f64]> = pts2.iter().map(|c| c.as_slice()).collect();
        let tr1 = forward_batch(p1.network(), &th1, &BatchInput::seeded(&refs1, 2, 2).unwrap()).unwrap();
        let tr2 = forward_batch(p2.network(), &th2, &BatchInput::seeded(&refs2, 3, 3).unwrap()).unwrap();
        for k in 0..CONSTRAINT_SAMPLES {
            let c = pts1[k];
            let raw: Vec<Jet2<f64>> = (0..tr1.n_outputs()).map(|o| tr1.output_jet(k, o)).collect();
            let f = p1.fields(&c, &raw);
            if side(k) < 2 {
                check(f.u.value() - c[0] * c[1]);
                check(f.gamma.value());
                check(f.gamma.d1(1));
            } else {
                check(f.u.value());
                check(f.gamma.value());
                check(f.resistance.expect("hardening output").value() - 1.0);
            }
            let c = pts2[k];
            let raw: Vec<Jet2<f64>> = (0..tr2.n_outputs()).map(|o| tr2.output_jet(k, o)).collect();
            let f = p2.fields(&c, &raw);
            if side(k) < 2 {
                check(f.u1.value() - c[1] * c[2]);
                check(f.u2.value());
                check(f.gamma.value());
                check(f.gamma.d1(2));
            } else {
                check(f.u1.value());
                check(f.u2.value());
                check(f.gamma.value());
                for e in &f.ep {
                    check(e.value());
                }
            }
        }
    }
    verdict(
        worst <= CONSTRAINT_TOL,
        format!("{CONSTRAINT_THETAS} thetas x {CONSTRAINT_SAMPLES} samples, 1d and 2d: max violation {worst:.1e} (<= {CONSTRAINT_TOL:.0e})"),
    )
}

fn c3_baseline(budget: Budget) -> Result<Outcome, String> {
    let cfg = load("baseline", budget);
    let fit = train(&cfg)?;
    let p = problem_1d(&cfg);
    let mat = p.material;
    let oracle = homogeneous_ode(&mat, &p.loading, ORACLE_TOL).map_err(|e| e.to_string())?;
    let c = curve(&p, &fit.theta, None).map_err(|e| e.to_string())?;
    let dev = max_abs_dev(&c, &oracle);
    let g_el = ELASTIC_FRACTION * mat.strain_scale();
    let elastic: Vec<(f64, f64)> = (1..=21)
        .map(|i| {
            let g = g_el * i as f64 / 21.0;
            let s = p.state_at(&fit.theta, &p.coords(0.5, g / p.loading.max_strain(), None))?;
            Ok((s.strain, s.tau))
        })
        .collect::<Result<_, PhysicsError>>()
        .map_err(|e| e.to_string())?;
    let slope = ls_slope(&elastic);
    let plateau = c.last().unwrap().1;
    let dev_ok = dev <= BASE_MAX_DEV * mat.s0;
    let slope_ok = (slope / mat.mu - 1.0).abs() <= BASE_SLOPE_TOL;
    let plateau_ok = (plateau / mat.s0 - 1.0).abs() <= BASE_PLATEAU_TOL;
    Ok(verdict(
        dev_ok && slope_ok && plateau_ok,
        format!(
            "{}: max|dtau| {:.2} MPa (<= {:.1}), elastic slope {:.1} GPa (mu {:.0} +-{:.0}%), plateau {:.2} MPa (+-{:.0}%), final loss {:.2e}",
            budget_note(&cfg),
            dev / 1e6,
            BASE_MAX_DEV * mat.s0 / 1e6,
            slope / 1e9,
            mat.mu / 1e9,
            BASE_SLOPE_TOL * 100.0,
            plateau / 1e6,
            BASE_PLATEAU_TOL * 100.0,
            fit.final_loss().unwrap_or(f64::NAN)
        ),
    ))
}

fn c4_hardening(budget: Budget) -> Result<Outcome, String> {
    let cfg = load("hardening", budget);
    let fit = train(&cfg)?;
    let p = problem_1d(&cfg);
    let mat = p.material;
    let oracle = homogeneous_ode(&mat, &p.loading, ORACLE_TOL).map_err(|e| e.to_string())?;
    let c = curve(&p, &fit.theta, None).map_err(|e| e.to_string())?;
    let dev = max_abs_dev(&c, &oracle);
    let half = p.loading.max_strain() / 2.0;
    let tail: Vec<(f64, f64)> = c.iter().copied().filter(|q| q.0 >= half).collect();
    let tail_oracle: Vec<(f64, f64)> = tail.iter().map(|q| (q.0, oracle.tau_at_strain(q.0))).collect();
    let (sp, so) = (ls_slope(&tail), ls_slope(&tail_oracle));
    let slope_ok = (sp / so - 1.0).abs() <= HARD_SLOPE_TOL;
    let dev_ok = dev <= HARD_MAX_DEV * mat.s0;
    Ok(verdict(
        slope_ok && dev_ok,
        format!(
            "{}: post-transition slope {:.1} MPa vs oracle {:.1} MPa (+-{:.0}%), max|dtau| {:.2} MPa (<= {:.1}), final loss {:.2e}",
            budget_note(&cfg),
            sp / 1e6,
            so / 1e6,
            HARD_SLOPE_TOL * 100.0,
            dev / 1e6,
            HARD_MAX_DEV * mat.s0 / 1e6,
            fit.final_loss().unwrap_or(f64::NAN)
        ),
    ))
}

/// Wall value relative to the midpoint and the worst mirror mismatch.
fn profile_shape(g: &[f64]) -> (f64, f64, f64) {
    let n = g.len();
    let mid = g[n / 2];
    let walls = g[0].abs().max(g[n - 1].abs()) / mid.abs();
    let asym = (0..n).map(|i| (g[i] - g[n - 1 - i]).abs()).fold(0.0, f64::max) / mid.abs();
    (mid, walls, asym)
}

fn c5_energetic(budget: Budget) -> Result<Outcome, String> {
    let cfg = load("energetic", budget);
    let fit = train(&cfg)?;
    let p = problem_1d(&cfg);
    let prof: Vec<f64> = p.profile(&fit.theta, 101, 1.0, None).map_err(|e| e.to_string())?.iter().map(|s| s.gamma_p).collect();
    let (mid, walls, asym) = profile_shape(&prof);
    let mol = mol_energetic(&p.material, &p.loading, MOL_NODES, ORACLE_TOL).map_err(|e| e.to_string())?;
    let mol_mid = mol.final_profile()[MOL_NODES / 2];
    let mid_err = (mid / mol_mid - 1.0).abs();
    Ok(verdict(
        walls <= WALL_TOL && asym <= SYMMETRY_TOL && mid_err <= MIDPOINT_TOL,
        format!(
            "{}: walls {:.1e} of midpoint (<= {WALL_TOL:.0e}), asymmetry {:.2}% (<= {:.0}%), midpoint gamma_p {:.4e} vs oracle {:.4e} ({:.1}%, <= {:.0}%)",
            budget_note(&cfg),
            walls,
            asym * 100.0,
            SYMMETRY_TOL * 100.0,
            mid,
            mol_mid,
            mid_err * 100.0,
            MIDPOINT_TOL * 100.0
        ),
    ))
}

fn c6_dissipative(budget: Budget) -> Result<Outcome, String> {
    let cfg = load("dissipative", budget);
    let fit = train(&cfg)?;
    let p = problem_1d(&cfg);
    let last = fit.history.last().ok_or("empty history")?;
    let total = last.total;
    let mixed = last.terms[Term::Mixed.index()];
    let prof: Vec<f64> = p.profile(&fit.theta, 101, 1.0, None).map_err(|e| e.to_string())?.iter().map(|s| s.gamma_p).collect();
    let (_, walls, _) = profile_shape(&prof);
    let c = curve(&p, &fit.theta, None).map_err(|e| e.to_string())?;
    let worst_drop = c.windows(2).map(|w| w[0].1 - w[1].1).fold(f64::NEG_INFINITY, f64::max);
    let monotone = worst_drop <= MONOTONE_SLACK * p.material.s0;
    Ok(verdict(
        total <= DISS_LOSS_TOL && mixed <= DISS_MIXED_TOL && walls <= WALL_TOL && monotone,
        format!(
            "{}: total loss {:.2e} (<= {DISS_LOSS_TOL:.0e}), mixed residual ms {:.2e} (<= {DISS_MIXED_TOL:.0e}), walls {:.1e}, largest stress drop {:.3} MPa (<= {:.3})",
            budget_note(&cfg),
            total,
            mixed,
            walls,
            worst_drop / 1e6,
            MONOTONE_SLACK * p.material.s0 / 1e6
        ),
    ))
}

fn c7_shear2d(budget: Budget) -> Result<Outcome, String> {
    let cfg = load("shear2d", budget);
    let fit = train(&cfg)?;
    let p = match cfg.build().map_err(|e| e.to_string())? {
        BuiltProblem::TwoD(p) => p,
        BuiltProblem::OneD(_) => return Err("expected a 2d config".into()),
    };
    let x1 = p.x1_variation(&fit.theta, X1_PROBES).map_err(|e| e.to_string())?;
    let series = p.stress_strain(&fit.theta, 101).map_err(|e| e.to_string())?;
    let target = p.material.s0 / 2f64.sqrt();
    let t12 = series.last().unwrap().stress[3];
    let t12_err = (t12 / target - 1.0).abs();
    let mut trace = 0.0f64;
    for i in 0..X1_PROBES {
        for s in p.profile(&fit.theta, 21, (i as f64 + 0.5) / X1_PROBES as f64).map_err(|e| e.to_string())? {
            trace = trace.max((s.ep[0] + s.ep[1] + s.ep[3]).abs());
        }
    }
    let tau_max = series.iter().map(|s| s.tau).fold(0.0, f64::max);
    let flowing: Vec<_> = series.iter().filter(|s| s.tau >= FLOWING_FRACTION * tau_max).collect();
    let norm_err = flowing.iter().map(|s| (s.n_norm - 1.0).abs()).fold(0.0, f64::max);
    Ok(verdict(
        x1 <= X1_TOL && t12_err <= T12_TOL && trace == 0.0 && norm_err <= NORM_TOL,
        format!(
            "{}: x1 variation {:.1e} (<= {X1_TOL:.0e}), T12 {:.2} MPa vs {:.2} (+-{:.0}%), trace {:.0e}, ||N|-1| {:.1e} over {} flowing samples (<= {NORM_TOL:.0e})",
            budget_note(&cfg),
            x1,
            t12 / 1e6,
            target / 1e6,
            T12_TOL * 100.0,
            trace,
            norm_err,
            flowing.len()
        ),
    ))
}

fn c8_sweeps(budget: Budget) -> Result<Outcome, String> {
    let cfg = load("sweep_mu", budget);
    let p = problem_1d(&cfg);
    let grid = p.sweep.as_ref().ok_or("missing sweep")?.grid();
    let target_mu = 100e9;
    let gap = grid.iter().map(|g| (g - target_mu).abs()).fold(f64::INFINITY, f64::min);
    let fit = train(&cfg)?;
    let mat = Material1D { mu: target_mu, ..p.material };
    let oracle = homogeneous_ode(&mat, &p.loading, ORACLE_TOL).map_err(|e| e.to_string())?;
    let dev = max_abs_dev(&curve(&p, &fit.theta, Some(target_mu)).map_err(|e| e.to_string())?, &oracle);
    let mu_ok = dev <= SWEEP_MU_DEV * mat.s0;

    let cfg_s = load("sweep_s0", budget);
    let ps = problem_1d(&cfg_s);
    let grid_s = ps.sweep.as_ref().ok_or("missing sweep")?.grid();
    let fit_s = train(&cfg_s)?;
    let rate_factor = (ps.loading.shear_rate / ps.material.d0).powf(ps.material.m);
    let mut hits = 0;
    let mut report = Vec::new();
    for s0 in cfg_s.sweep_predictions() {
        let untrained = grid_s.iter().all(|g| (g - s0).abs() > 1e-6 * s0);
        let c = curve(&ps, &fit_s.theta, Some(s0)).map_err(|e| e.to_string())?;
        let g_hi = ps.loading.max_strain();
        let tail: Vec<f64> = c.iter().filter(|q| q.0 >= 0.75 * g_hi).map(|q| q.1).collect();
        let plateau = tail.iter().sum::<f64>() / tail.len() as f64;
        let expected = s0 * rate_factor;
        let err = (plateau / expected - 1.0).abs();
        if untrained && err <= SWEEP_S0_TOL {
            hits += 1;
        }
        report.push(format!("{:.0}:{:.1}%", s0 / 1e6, err * 100.0));
    }
    Ok(verdict(
        mu_ok && hits >= SWEEP_S0_NEEDED,
        format!(
            "{} each; mu=100 GPa (grid gap {:.1} GPa): max|dtau| {:.2} MPa (<= {:.1}); S0 plateau errors [{}] MPa, {hits} within {:.0}% (need {SWEEP_S0_NEEDED})",
            budget_note(&cfg),
            gap / 1e9,
            dev / 1e6,
            SWEEP_MU_DEV * mat.s0 / 1e6,
            report.join(", "),
            SWEEP_S0_TOL * 100.0
        ),
    ))
}

fn c9_oracle() -> Result<Outcome, String> {
    let e = |e: sgp_pinn::oracle::OracleError| e.to_string();
    let loading = Loading::default();
    let m0 = Material1D::default();
    let ode = homogeneous_ode(&m0, &loading, ORACLE_TOL).map_err(e)?;
    let mol0 = mol_energetic(&m0, &loading, 11, ORACLE_TOL).map_err(e)?;
    let tau_max = ode.points.iter().map(|p| p.tau.abs()).fold(0.0, f64::max);
    let l0 = mol0.strain.iter().zip(&mol0.tau).map(|(&g, &t)| (t - ode.tau_at_strain(g)).abs()).fold(0.0, f64::max) / tau_max;

    let reference = homogeneous_ode(&m0, &loading, HALVING_REF_TOL).map_err(e)?;
    let err_at = |tol: f64| -> Result<f64, String> {
        let s = homogeneous_ode(&m0, &loading, tol).map_err(|e| e.to_string())?;
        Ok(s.points.iter().map(|q| (q.tau - reference.tau_at_strain(q.strain)).abs()).fold(0.0, f64::max))
    };
    let (e1, e2) = (err_at(HALVING_TOLS.0)?, err_at(HALVING_TOLS.1)?);
    let ratio = e1 / e2;

    let m10 = Material1D {
        energetic_length: 10.0,
        ..Default::default()
    };
    let coarse = mol_energetic(&m10, &loading, 101, ORACLE_TOL).map_err(e)?;
    let fine = mol_energetic(&m10, &loading, 201, ORACLE_TOL).map_err(e)?;
    let (gc, gf) = (coarse.final_profile()[50], fine.final_profile()[100]);
    let change = (gf / gc - 1.0).abs();
    Ok(verdict(
        l0 <= L0_REL_TOL && ratio >= HALVING_MIN_RATIO && change <= GRID_CHANGE_TOL,
        format!(
            "L=0 mol vs ode {l0:.1e} (<= {L0_REL_TOL:.0e}); tol {:.1e}->{:.2e} error ratio {ratio:.2} (>= {HALVING_MIN_RATIO}); grid 101->201 midpoint change {:.2e} (<= {GRID_CHANGE_TOL})",
            HALVING_TOLS.0, HALVING_TOLS.1, change
        ),
    ))
}

fn c10_determinism() -> Result<Outcome, String> {
    let small = |name: &str, hidden: &[usize], epochs: usize, pts: usize| {
        let mut c = load(name, Budget::Full);
        c.network.hidden = hidden.to_vec();
        c.train.epochs = epochs;
        c.train.collocation = pts;
        c.train.validation_every = 25;
        c
    };
    let cases = [
        small("baseline", &[32, 32, 32], 200, 300),
        small("dissipative", &[16, 16, 16], 60, 200),
        small("shear2d", &[16, 16, 16], 60, 200),
    ];
    let mut details = Vec::new();
    let mut all = true;
    for cfg in cases {
        let mut files = Vec::new();
        for (run_id, threads) in [(0, 1), (1, 3), (2, 1)] {
            let mut c = cfg.clone();
            c.train.threads = Some(threads);
            let dir = work_dir(&format!("determinism/{}-{run_id}", cfg.experiment));
            let r = run::train(&c, &dir).map_err(|e| e.to_string())?;
            files.push(std::fs::read(&r.history).map_err(|e| e.to_string())?);
        }
        let same = files.windows(2).all(|w| w[0] == w[1]);
        all &= same && !files[0].is_empty();
        details.push(format!("{} {}", cfg.experiment, if same { "identical" } else { "DIFFERS" }));
    }
    Ok(verdict(all, format!("loss history over 1, 3, 1 threads: {}", details.join(", "))))
}

// ---------------------------------------------------------------------------

struct Criterion {
    id: usize,
    name: &'static str,
    hard: bool,
    run: fn(Budget) -> Result<Outcome, String>,
}

fn main() {
    let budget = Budget::from_env();
    let strict = std::env::var("SGP_ACCEPT_STRICT").is_ok_and(|v| v == "1");
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria = [
        Criterion { id: 1, name: "autodiff correctness", hard: true, run: |_| Ok(c1_autodiff()) },
        Criterion { id: 2, name: "hard constraints", hard: true, run: |_| Ok(c2_constraints()) },
        Criterion { id: 3, name: "baseline 1d", hard: false, run: c3_baseline },
        Criterion { id: 4, name: "hardening 1d", hard: false, run: c4_hardening },
        Criterion { id: 5, name: "energetic 1d", hard: false, run: c5_energetic },
        Criterion { id: 6, name: "dissipative 1d", hard: false, run: c6_dissipative },
        Criterion { id: 7, name: "2d shear", hard: false, run: c7_shear2d },
        Criterion { id: 8, name: "parametric sweeps", hard: false, run: c8_sweeps },
        Criterion { id: 9, name: "oracle self-check", hard: true, run: |_| c9_oracle() },
        Criterion { id: 10, name: "determinism", hard: true, run: |_| c10_determinism() },
    ];
    println!(
        "acceptance: budget {}, training criteria {}",
        if budget == Budget::Full { "full" } else { "reduced" },
        if strict { "strict" } else { "report-only" }
    );
    let mut lines = Vec::new();
    let mut failed_hard = false;
    for c in criteria.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let t0 = Instant::now();
        let out = (c.run)(budget).unwrap_or_else(|e| verdict(false, format!("error: {e}")));
        let line = format!(
            "criterion {:>2} {:<22} {}  {} [{:.1} s]",
            c.id,
            c.name,
            if out.pass { "PASS" } else { "FAIL" },
            out.detail,
            t0.elapsed().as_secs_f64()
        );
        println!("{line}");
        lines.push(line);
        if !out.pass && (c.hard || strict) {
            failed_hard = true;
        }
    }
    let summary = work_dir("summary.txt");
    if let Some(d) = summary.parent() {
        let _ = std::fs::create_dir_all(d);
    }
    let _ = std::fs::write(&summary, lines.join("\n") + "\n");
    if failed_hard {
        eprintln!("acceptance: a required criterion failed");
        std::process::exit(1);
    }
}
