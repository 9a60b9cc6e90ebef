//! Orchestration behind the command-line subcommands: training runs,
//! predictions from checkpoints, oracle tables and plots.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::io::{save_svg, BuiltProblem, Checkpoint, CheckpointHeader, IoError, Model, PlotSpec, RunConfig, Series, Table};
use crate::net::{init_params, ScalingRules};
use crate::oracle::{homogeneous_ode, mol_energetic, oracle_export, OracleError};
use crate::physics1d::{Loading, Material1D, Problem1D, SweepParam};
use crate::physics2d::Material2D;
use crate::problem::{PhysicsError, Problem};
use crate::train::{fit_observed, write_history_header, write_history_row, AdamState, FitObserver, FitResult, HistoryRow, StopReason, TrainError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("{0}")]
    Usage(String),
}

pub const HISTORY_FILE: &str = "loss_history.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";

/// Default relative tolerance of the reference integrators.
pub const ORACLE_TOL: f64 = 1e-5;
/// Node count of the method-of-lines reference.
pub const ORACLE_NODES: usize = 101;

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    experiment: &'a str,
    model: Model,
    seed: u64,
    config_hash: String,
    checkpoint_format: u32,
    parameters: usize,
    epochs_run: usize,
    stop: StopReason,
    error: Option<String>,
    final_loss: Option<f64>,
    final_validation: Option<f64>,
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub dir: PathBuf,
    pub checkpoint: PathBuf,
    pub history: PathBuf,
    pub fit: FitResult,
}

struct RunObserver {
    history: BufWriter<File>,
    history_path: PathBuf,
    dir: PathBuf,
    header: CheckpointHeader,
    epochs: usize,
    cadence: usize,
    error: Option<IoError>,
}

impl RunObserver {
    fn checkpoint(&self, epoch: usize, theta: &[f64], adam: &AdamState) -> Checkpoint {
        let mut header = self.header.clone();
        header.epoch = epoch;
        header.adam_step = adam.step;
        Checkpoint {
            header,
            theta: theta.to_vec(),
            adam_m: adam.m.clone(),
            adam_v: adam.v.clone(),
        }
    }

    fn keep(&mut self, r: Result<(), IoError>) {
        if let (Err(e), None) = (r, &self.error) {
            self.error = Some(e);
        }
    }
}

impl FitObserver for RunObserver {
    fn on_row(&mut self, row: &HistoryRow) {
        let p = self.history_path.clone();
        let r = write_history_row(row, &mut self.history)
            .and_then(|_| self.history.flush())
            .map_err(|e| IoError::file(&p, e));
        self.keep(r);
    }

    fn on_checkpoint(&mut self, epoch: usize, theta: &[f64], adam: &AdamState) {
        // The end-of-run call is saved by `train` as `checkpoint.bin`.
        if self.cadence == 0 || epoch % self.cadence != 0 || epoch >= self.epochs {
            return;
        }
        let r = self.checkpoint(epoch, theta, adam).save(&self.dir.join(format!("checkpoint_{epoch:07}.bin")));
        self.keep(r);
    }
}

fn model_name(m: Model) -> &'static str {
    match m {
        Model::OneD => "1d",
        Model::TwoD => "2d",
    }
}

fn scaling_of(p: &BuiltProblem) -> ScalingRules {
    match p {
        BuiltProblem::OneD(p) => p.scaling_rules(&p.material),
        BuiltProblem::TwoD(p) => p.scaling_rules(),
    }
}

fn transform_of(p: &BuiltProblem) -> String {
    match p {
        BuiltProblem::OneD(p) => p.transform_id(),
        BuiltProblem::TwoD(p) => p.transform_id(),
    }
}

/// Trains the configured problem and writes the run directory `out`:
/// `config.toml`, `loss_history.csv`, `checkpoint.bin` (plus periodic
/// checkpoints) and `metadata.json`.
pub fn train(cfg: &RunConfig, out: &Path) -> Result<TrainOutcome, RunError> {
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(|e| IoError::file(out, e))?;
    let cfg_path = out.join("config.toml");
    std::fs::write(&cfg_path, cfg.to_toml()).map_err(|e| IoError::file(&cfg_path, e))?;
    let problem = cfg.build()?;
    let spec = match &problem {
        BuiltProblem::OneD(p) => p.network().clone(),
        BuiltProblem::TwoD(p) => p.network().clone(),
    };
    let header = CheckpointHeader {
        model: model_name(cfg.model).into(),
        spec: spec.clone(),
        scaling: scaling_of(&problem),
        transform: transform_of(&problem),
        epoch: 0,
        config_hash: cfg.hash(),
        adam_step: 0,
        config: cfg.to_toml(),
    };
    let history_path = out.join(HISTORY_FILE);
    let f = File::create(&history_path).map_err(|e| IoError::file(&history_path, e))?;
    let mut history = BufWriter::new(f);
    write_history_header(&mut history).map_err(|e| IoError::file(&history_path, e))?;
    let tc = cfg.train_config();
    let mut obs = RunObserver {
        history,
        history_path: history_path.clone(),
        dir: out.to_path_buf(),
        header,
        epochs: tc.epochs,
        cadence: tc.checkpoint_every,
        error: None,
    };
    let theta0 = init_params(&spec, cfg.seed).values;
    let fit = match &problem {
        BuiltProblem::OneD(p) => fit_observed(p, &tc, theta0, &mut obs)?,
        BuiltProblem::TwoD(p) => fit_observed(p, &tc, theta0, &mut obs)?,
    };
    // The end-of-run checkpoint always lands in `checkpoint.bin`.
    let last = obs.checkpoint(fit.adam.step as usize, &fit.theta, &fit.adam);
    obs.keep(last.save(&out.join(CHECKPOINT_FILE)));
    let flushed = obs.history.flush().map_err(|e| IoError::file(&history_path, e));
    obs.keep(flushed);
    if let Some(e) = obs.error.take() {
        return Err(e.into());
    }
    let meta = Metadata {
        experiment: &cfg.experiment,
        model: cfg.model,
        seed: cfg.seed,
        config_hash: cfg.hash(),
        checkpoint_format: crate::io::FORMAT_VERSION,
        parameters: spec.param_count(),
        epochs_run: fit.adam.step as usize,
        stop: fit.stop,
        error: fit.error.clone(),
        final_loss: fit.final_loss(),
        final_validation: fit.history.iter().rev().find_map(|r| r.validation),
    };
    let meta_path = out.join("metadata.json");
    let json = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    std::fs::write(&meta_path, json + "\n").map_err(|e| IoError::file(&meta_path, e))?;
    Ok(TrainOutcome {
        dir: out.to_path_buf(),
        checkpoint: out.join(CHECKPOINT_FILE),
        history: history_path,
        fit,
    })
}

/// Rebuilds the problem a checkpoint was trained on and checks it matches.
pub fn problem_for(ck: &Checkpoint) -> Result<(RunConfig, BuiltProblem), RunError> {
    let cfg = RunConfig::from_toml(&ck.header.config)?;
    let problem = cfg.build()?;
    let spec = match &problem {
        BuiltProblem::OneD(p) => p.network(),
        BuiltProblem::TwoD(p) => p.network(),
    };
    if spec != &ck.header.spec || transform_of(&problem) != ck.header.transform {
        return Err(IoError::Format("checkpoint network or transform does not match its stored configuration".into()).into());
    }
    Ok((cfg, problem))
}

#[derive(Debug, Clone, Default)]
pub struct PredictOptions {
    /// Points per axis of the field map; defaults to the config value.
    pub grid: Option<usize>,
    /// Extra probe points in scaled coordinates.
    pub probes: Vec<Vec<f64>>,
}

fn save(t: &Table, dir: &Path, name: &str, written: &mut Vec<PathBuf>) -> Result<(), IoError> {
    let p = dir.join(name);
    t.save(&p)?;
    written.push(p);
    Ok(())
}

fn sweep_suffix(p: &Problem1D, v: f64) -> String {
    match p.sweep.as_ref().map(|s| s.param) {
        Some(SweepParam::Mu) => format!("_mu_gpa_{}", v / 1e9),
        Some(SweepParam::S0) => format!("_s0_mpa_{}", v / 1e6),
        None => String::new(),
    }
}

fn stress_strain_1d(p: &Problem1D, theta: &[f64], n: usize, param: Option<f64>) -> Result<Table, RunError> {
    let mut t = Table::new(["time_s", "strain", "tau_pa", "gamma_p", "s_pa", "tau_p_pa"]);
    for s in p.stress_strain(theta, n, param)? {
        t.push(vec![s.t, s.strain, s.tau, s.gamma_p, s.s, s.tau_p]);
    }
    Ok(t)
}

fn profile_1d(p: &Problem1D, theta: &[f64], n: usize, normalize: bool, param: Option<f64>) -> Result<Table, RunError> {
    let states = p.profile(theta, n, 1.0, param)?;
    let mid = p.state_at(theta, &p.coords(0.5, 1.0, param))?.gamma_p;
    let mut header = vec!["y_m", "y_over_h", "gamma_p", "tau_pa", "k_p_pa_m"];
    if normalize {
        header.push("gamma_p_over_mid");
    }
    let mut t = Table::new(header);
    for (i, s) in states.iter().enumerate() {
        let mut row = vec![s.y, i as f64 / (n - 1).max(1) as f64, s.gamma_p, s.tau, s.k_p];
        if normalize {
            row.push(s.gamma_p / mid);
        }
        t.push(row);
    }
    Ok(t)
}

const PROBE_1D: [&str; 8] = ["y_m", "time_s", "u_m", "gamma_p", "tau_pa", "tau_p_pa", "s_pa", "d_p_per_s"];
const PROBE_2D: [&str; 12] = [
    "x1_m", "x2_m", "time_s", "u1_m", "u2_m", "gamma_p", "ep11", "ep22", "ep12", "t12_pa", "tau_pa", "pi_pa",
];

fn in_unit_box(c: &[f64]) -> bool {
    c.iter().all(|v| (0.0..=1.0).contains(v))
}

/// Writes prediction tables for a trained checkpoint into `out`.
pub fn predict(ck: &Checkpoint, out: &Path, opts: &PredictOptions) -> Result<Vec<PathBuf>, RunError> {
    let (cfg, problem) = problem_for(ck)?;
    std::fs::create_dir_all(out).map_err(|e| IoError::file(out, e))?;
    let theta = &ck.theta;
    let pc = &cfg.predict;
    let grid = opts.grid.unwrap_or(pc.grid);
    if grid < 2 {
        return Err(RunError::Usage("grid needs at least 2 points per axis".into()));
    }
    let axis = |i: usize| i as f64 / (grid - 1) as f64;
    let mut written = Vec::new();
    match &problem {
        BuiltProblem::OneD(p) => {
            let params: Vec<Option<f64>> = if p.sweep.is_some() {
                std::iter::once(None).chain(cfg.sweep_predictions().into_iter().map(Some)).collect()
            } else {
                vec![None]
            };
            for param in params {
                let sfx = param.map(|v| sweep_suffix(p, v)).unwrap_or_default();
                save(&stress_strain_1d(p, theta, pc.series_points, param)?, out, &format!("stress_strain{sfx}.csv"), &mut written)?;
                save(
                    &profile_1d(p, theta, pc.profile_points, pc.normalize_profile, param)?,
                    out,
                    &format!("profile{sfx}.csv"),
                    &mut written,
                )?;
            }
            let mut map = Table::new(["y_m", "time_s", "u_m", "gamma_p", "tau_pa", "s_pa"]);
            for j in 0..grid {
                for i in 0..grid {
                    let s = p.state_at(theta, &p.coords(axis(i), axis(j), None))?;
                    map.push(vec![s.y, s.t, s.u, s.gamma_p, s.tau, s.s]);
                }
            }
            save(&map, out, "field_map.csv", &mut written)?;
            if !opts.probes.is_empty() {
                let mut header: Vec<String> = p.network().input_names.iter().map(|n| format!("{n}_scaled")).collect();
                header.extend(PROBE_1D.iter().map(|s| s.to_string()));
                header.push("out_of_range".into());
                let mut t = Table::new(header);
                for c in &opts.probes {
                    if c.len() != p.dim() {
                        return Err(RunError::Usage(format!("probe needs {} coordinates, got {}", p.dim(), c.len())));
                    }
                    let flag = !in_unit_box(c);
                    if flag {
                        log::warn!("probe {c:?} lies outside the trained domain");
                    }
                    let s = p.state_at(theta, c)?;
                    let mut row = c.clone();
                    row.extend([s.y, s.t, s.u, s.gamma_p, s.tau, s.tau_p, s.s, s.d_p, flag as u8 as f64]);
                    t.push(row);
                }
                save(&t, out, "probes.csv", &mut written)?;
            }
        }
        BuiltProblem::TwoD(p) => {
            let mut ss = Table::new(["time_s", "strain", "t12_pa", "tau_pa", "equivalent_stress_pa", "gamma_p", "ep12"]);
            for s in p.stress_strain(theta, pc.series_points)? {
                ss.push(vec![s.t, s.strain, s.stress[3], s.tau, s.equivalent_stress(), s.gamma_p, s.ep[2]]);
            }
            save(&ss, out, "stress_strain.csv", &mut written)?;
            let n = pc.profile_points;
            let mid = p.state_at(theta, &[0.5, 0.5, 1.0])?.gamma_p;
            let mut header = vec!["x2_m", "x2_over_h", "gamma_p", "ep12", "t12_pa"];
            if pc.normalize_profile {
                header.push("gamma_p_over_mid");
            }
            let mut prof = Table::new(header);
            for (i, s) in p.profile(theta, n, 1.0)?.iter().enumerate() {
                let mut row = vec![s.x2, i as f64 / (n - 1).max(1) as f64, s.gamma_p, s.ep[2], s.stress[3]];
                if pc.normalize_profile {
                    row.push(s.gamma_p / mid);
                }
                prof.push(row);
            }
            save(&prof, out, "profile.csv", &mut written)?;
            let mut map = Table::new(["x1_m", "x2_m", "u1_m", "u2_m", "gamma_p", "ep11", "ep22", "ep12", "t12_pa"]);
            for j in 0..grid {
                for i in 0..grid {
                    let s = p.state_at(theta, &[axis(i), axis(j), 1.0])?;
                    map.push(vec![s.x1, s.x2, s.u1, s.u2, s.gamma_p, s.ep[0], s.ep[1], s.ep[2], s.stress[3]]);
                }
            }
            save(&map, out, "field_map.csv", &mut written)?;
            if !opts.probes.is_empty() {
                let mut header: Vec<String> = ["x1_scaled", "x2_scaled", "t_scaled"].iter().map(|s| s.to_string()).collect();
                header.extend(PROBE_2D.iter().map(|s| s.to_string()));
                header.push("out_of_range".into());
                let mut t = Table::new(header);
                for c in &opts.probes {
                    if c.len() != 3 {
                        return Err(RunError::Usage(format!("probe needs 3 coordinates, got {}", c.len())));
                    }
                    let flag = !in_unit_box(c);
                    if flag {
                        log::warn!("probe {c:?} lies outside the trained domain");
                    }
                    let s = p.state_at(theta, c)?;
                    let mut row = c.clone();
                    row.extend([
                        s.x1,
                        s.x2,
                        s.t,
                        s.u1,
                        s.u2,
                        s.gamma_p,
                        s.ep[0],
                        s.ep[1],
                        s.ep[2],
                        s.stress[3],
                        s.tau,
                        s.pi,
                        flag as u8 as f64,
                    ]);
                    t.push(row);
                }
                save(&t, out, "probes.csv", &mut written)?;
            }
        }
    }
    Ok(written)
}

/// Initial-boundary value problem of the homogeneous 2D strip, recast as
/// the equivalent 1D shear problem. In pure shear `|T0| = √2·T12` and
/// `Ep12 = γᵖ/√2`, so the engineering plastic shear is `√2·γᵖ`, the 1D
/// flow resistance is `S0/√2` and the 1D reference rate is `√2·ν0`.
pub fn equivalent_shear_material(m: &Material2D) -> Material1D {
    Material1D {
        mu: m.shear_modulus(),
        s0: m.s0 / 2f64.sqrt(),
        d0: 2f64.sqrt() * m.nu0,
        m: m.m,
        hardening: 0.0,
        energetic_length: 0.0,
        dissipative_length: 0.0,
        width: m.width,
    }
}

fn oracle_1d(mat: &Material1D, loading: &Loading, dir: &Path, sfx: &str, written: &mut Vec<PathBuf>) -> Result<(), RunError> {
    if mat.dissipative_length > 0.0 {
        return Err(RunError::Unsupported(
            "no classical reference exists for a positive dissipative length scale; the fourth-order stiff system is checked by residual properties only".into(),
        ));
    }
    if mat.energetic_length == 0.0 {
        let s = homogeneous_ode(mat, loading, ORACLE_TOL)?;
        save(&oracle_export(&s)?, dir, &format!("oracle_stress_strain{sfx}.csv"), written)?;
    } else {
        let s = mol_energetic(mat, loading, ORACLE_NODES, ORACLE_TOL)?;
        if let Some(why) = &s.partial {
            log::warn!("method-of-lines reference stopped early: {why}");
        }
        save(&s.history_table(), dir, &format!("oracle_stress_strain{sfx}.csv"), written)?;
        save(&s.profile_table(), dir, &format!("oracle_profile{sfx}.csv"), written)?;
    }
    Ok(())
}

/// Runs the reference solver matching the configuration and writes its tables.
pub fn oracle(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(|e| IoError::file(out, e))?;
    let loading = cfg.loading();
    let mut written = Vec::new();
    match cfg.model {
        Model::OneD => {
            let mat = cfg.material_1d();
            oracle_1d(&mat, &loading, out, "", &mut written)?;
            if let (Some(sw), BuiltProblem::OneD(p)) = (cfg.sweep_spec()?, cfg.build()?) {
                for v in cfg.sweep_predictions() {
                    let mut m = mat;
                    match sw.param {
                        SweepParam::Mu => m.mu = v,
                        SweepParam::S0 => m.s0 = v,
                    }
                    oracle_1d(&m, &loading, out, &sweep_suffix(&p, v), &mut written)?;
                }
            }
        }
        Model::TwoD => {
            let m = cfg.material_2d();
            if m.l1 != 0.0 || m.l3 != 0.0 || m.hardening != 0.0 {
                return Err(RunError::Unsupported(
                    "the 2D reference covers only the homogeneous, non-hardening strip (l1 = l3 = 0, no hardening)".into(),
                ));
            }
            let s = homogeneous_ode(&equivalent_shear_material(&m), &loading, ORACLE_TOL)?;
            let mut t = Table::new(["time_s", "strain", "t12_pa", "tau_pa", "equivalent_stress_pa", "gamma_p", "ep12"]);
            for q in &s.points {
                let gp = q.gamma_p / 2f64.sqrt();
                let tau = 2f64.sqrt() * q.tau;
                t.push(vec![q.t, q.strain, q.tau, tau, 1.5f64.sqrt() * tau, gp, gp / 2f64.sqrt()]);
            }
            save(&t, out, "oracle_stress_strain.csv", &mut written)?;
        }
    }
    Ok(written)
}

#[derive(Debug, Clone)]
pub struct PlotOptions {
    pub x: Option<String>,
    pub y: Option<String>,
    pub title: Option<String>,
    pub log_y: bool,
}

/// Overlays one column pair from each table. Tables whose file name starts
/// with `oracle` are drawn as markers.
pub fn plot(tables: &[PathBuf], out: &Path, opts: &PlotOptions) -> Result<(), RunError> {
    if tables.is_empty() {
        return Err(RunError::Usage("plot needs at least one table".into()));
    }
    let mut series = Vec::new();
    let mut labels = (String::new(), String::new());
    for path in tables {
        let t = Table::load(path)?;
        if t.rows.is_empty() {
            return Err(IoError::file(path, "table has no data rows").into());
        }
        let pick = |want: &Option<String>, fallback: &[&str], pos: usize| -> Result<String, RunError> {
            if let Some(w) = want {
                return Ok(w.clone());
            }
            for f in fallback {
                if t.header.iter().any(|h| h == f) {
                    return Ok(f.to_string());
                }
            }
            t.header
                .get(pos)
                .cloned()
                .ok_or_else(|| IoError::file(path, "table needs at least two columns").into())
        };
        let xc = pick(&opts.x, &["strain", "epoch", "y_m", "x2_m"], 0)?;
        let yc = pick(&opts.y, &["tau_pa", "t12_pa", "loss_total", "gamma_p"], 1)?;
        let col = |c: &str| t.column(c).ok_or_else(|| IoError::file(path, format!("no column `{c}`")));
        let (xs, ys) = (col(&xc)?, col(&yc)?);
        let points = xs.into_iter().zip(ys).collect();
        let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        series.push(if label.starts_with("oracle") {
            Series::markers(label, points)
        } else {
            Series::line(label, points)
        });
        labels = (xc, yc);
    }
    let title = opts.title.clone().unwrap_or_else(|| format!("{} vs {}", labels.1, labels.0));
    let mut spec = PlotSpec::new(title, labels.0, labels.1);
    spec.log_y = opts.log_y;
    save_svg(out, &spec, &series)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics2d::default_loading_2d;

    #[test]
    fn equivalent_shear_plateau() {
        let m = Material2D::default();
        let e = equivalent_shear_material(&m);
        let l = default_loading_2d();
        // T12 plateau S0/√2 · (Γ̇/(√2 ν0))^m
        let expect = m.s0 / 2f64.sqrt() * (l.shear_rate / (2f64.sqrt() * m.nu0)).powf(m.m);
        let s = homogeneous_ode(&e, &l, 1e-5).unwrap();
        let last = s.points.last().unwrap().tau;
        assert!((last / expect - 1.0).abs() < 1e-3, "{last} vs {expect}");
    }
}
