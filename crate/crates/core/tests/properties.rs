use proptest::prelude::*;

use sgp_pinn::ad::{central_difference, Jet2};
use sgp_pinn::io::{Checkpoint, RunConfig};
use sgp_pinn::net::{forward_jet, init_params};
use sgp_pinn::oracle::homogeneous_ode;
use sgp_pinn::physics1d::{microstress, Loading, Material1D, MicroMode, Problem1D};
use sgp_pinn::physics2d::{default_loading_2d, Material2D, Problem2D};
use sgp_pinn::problem::Problem;
use sgp_pinn::train::{compute_loss, lr_schedule, sample_points, LossWeights, Role};

fn small_1d(hardening: f64, mode: MicroMode, width: usize) -> Problem1D {
    let mat = Material1D {
        hardening,
        energetic_length: 2.0,
        ..Default::default()
    };
    Problem1D::new(mat, Loading::default(), mode, &[width, width], None, 1e-8).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn loss_gradient_matches_finite_differences(seed in 0u64..1000, width in 4usize..12, hard in proptest::bool::ANY, idx in 0usize..10_000) {
        let p = small_1d(if hard { 500e6 } else { 0.0 }, MicroMode::Mixed, width);
        let theta: Vec<f64> = init_params(p.network(), seed).values.iter().map(|v| v * 0.5).collect();
        let batch = sample_points(&p, 24, seed, Role::Training).unwrap();
        let w = LossWeights::default();
        let g = compute_loss(&p, &theta, &batch, &w, true).unwrap().1.unwrap();
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let i = idx % theta.len();
        let mut f = |th: &[f64]| compute_loss(&p, th, &batch, &w, false).unwrap().0.total;
        let fd = central_difference(&mut f, &theta, i, 1e-6);
        prop_assert!((fd - g[i]).abs() <= 1e-5 * g[i].abs().max(1e-3 * scale), "i {} fd {} ad {}", i, fd, g[i]);
    }

    #[test]
    fn constraints_hold_for_any_theta(seed in 0u64..10_000, y in 0.0f64..1.0, t in 0.0f64..1.0) {
        let p = small_1d(500e6, MicroMode::Mixed, 6);
        let theta: Vec<f64> = init_params(p.network(), seed).values.iter().map(|v| v * 3.0).collect();
        let eval = |c: [f64; 2]| {
            let jets: Vec<Jet2<f64>> = c.iter().enumerate().map(|(i, &x)| Jet2::lift(x, Some(i), 2).unwrap()).collect();
            p.fields(&c, &forward_jet(p.network(), &theta, &jets).unwrap())
        };
        for wall in [0.0, 1.0] {
            let f = eval([wall, t]);
            prop_assert_eq!(f.u.value(), wall * t);
            prop_assert_eq!(f.gamma.value(), 0.0);
            prop_assert_eq!(f.gamma.d1(1), 0.0);
        }
        let f = eval([y, 0.0]);
        prop_assert_eq!(f.u.value(), 0.0);
        prop_assert_eq!(f.gamma.value(), 0.0);
        prop_assert_eq!(f.resistance.unwrap().value(), 1.0);
    }

    #[test]
    fn plastic_strain_is_trace_free(seed in 0u64..10_000, x1 in 0.0f64..1.0, x2 in 0.0f64..1.0, t in 0.0f64..1.0) {
        let p = Problem2D::new(Material2D::default(), default_loading_2d(), &[6, 6], 1e-8).unwrap();
        let theta = init_params(p.network(), seed).values;
        let s = p.state_at(&theta, &[x1, x2, t]).unwrap();
        prop_assert_eq!(s.ep[0] + s.ep[1] + s.ep[3], 0.0);
    }

    #[test]
    fn microstress_is_odd_and_increasing(r1 in -10.0f64..10.0, r2 in -10.0f64..10.0, s in 0.5f64..3.0) {
        let f = |r: f64| microstress(r, (r * r + 1e-16).sqrt(), s, 1.0, 0.02).unwrap();
        prop_assert!((f(r1) + f(-r1)).abs() <= 1e-12 * f(r1).abs().max(1.0));
        if r1 < r2 {
            prop_assert!(f(r1) <= f(r2));
        }
    }

    #[test]
    fn schedule_starts_and_ends_exactly(epochs in 2usize..100_000, lo in 1e-6f64..1e-3, hi in 1e-3f64..1e-1) {
        prop_assert_eq!(lr_schedule(0, epochs, hi, lo), hi);
        prop_assert_eq!(lr_schedule(epochs - 1, epochs, hi, lo), lo);
        let mid = lr_schedule(epochs / 2, epochs, hi, lo);
        prop_assert!(mid <= hi && mid >= lo);
    }

    #[test]
    fn validation_points_are_disjoint_from_training(seed in 0u64..100_000) {
        let p = small_1d(0.0, MicroMode::Direct, 4);
        let tr = sample_points(&p, 200, seed, Role::Training).unwrap();
        let va = sample_points(&p, 50, seed, Role::Validation).unwrap();
        for a in va.points() {
            prop_assert!(tr.points().all(|b| b != a));
        }
    }

    #[test]
    fn checkpoint_round_trip_for_random_configs(seed in 0u64..1000, epochs in 1usize..100) {
        let cfg = RunConfig::from_toml(&format!(
            "experiment = \"p\"\nmodel = \"1d\"\nseed = {seed}\n[network]\nhidden = [5, 3]\n[train]\nepochs = {epochs}\ncollocation = 10\n"
        )).unwrap();
        let again = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        prop_assert_eq!(cfg.hash(), again.hash());
        let dir = tempfile::tempdir().unwrap();
        let r = sgp_pinn::run::train(&cfg, dir.path()).unwrap();
        let bytes = std::fs::read(&r.checkpoint).unwrap();
        let ck = Checkpoint::from_bytes(&bytes).unwrap();
        prop_assert_eq!(ck.to_bytes(), bytes);
        prop_assert_eq!(&ck.theta, &r.fit.theta);
    }
}

#[test]
fn oracle_stress_is_monotone_under_monotone_loading() {
    for h in [0.0, 500e6] {
        let mat = Material1D { hardening: h, ..Default::default() };
        let s = homogeneous_ode(&mat, &Loading::default(), 1e-4).unwrap();
        assert!(s.points.windows(2).all(|w| w[1].tau >= w[0].tau - 1e-6 * mat.s0));
    }
}
