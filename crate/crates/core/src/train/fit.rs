use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{adam_step, compute_loss, lr_schedule, sample_points, AdamConfig, AdamState, LossWeights, Role, TrainError};
use crate::problem::{Problem, Term, N_TERMS};

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "SGP_PINN_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub collocation: usize,
    /// Defaults to 20% of `collocation` (at least one point).
    pub validation: Option<usize>,
    pub lr_start: f64,
    pub lr_end: f64,
    pub adam: AdamConfig,
    pub seed: u64,
    /// Consecutive validation checks above the running minimum before
    /// stopping; `None` disables early stopping.
    pub patience: Option<usize>,
    pub validation_every: usize,
    /// Checkpoint callback cadence in epochs; 0 means only at the end.
    pub checkpoint_every: usize,
    /// Draw a fresh training set every epoch.
    pub resample: bool,
    /// Stop once the training loss reaches this value.
    pub loss_target: Option<f64>,
    pub weights: LossWeights,
    pub threads: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 25_000,
            collocation: 1_000,
            validation: None,
            lr_start: 0.01,
            lr_end: 1e-5,
            adam: AdamConfig::default(),
            seed: 0,
            patience: Some(10),
            validation_every: 100,
            checkpoint_every: 0,
            resample: false,
            loss_target: None,
            weights: LossWeights::default(),
            threads: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::Config(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.collocation == 0 {
            return bad("collocation count must be at least 1");
        }
        if !(self.lr_start >= self.lr_end && self.lr_end > 0.0) {
            return bad("learning rates must satisfy lr_start >= lr_end > 0");
        }
        if self.validation_every == 0 {
            return bad("validation cadence must be at least 1");
        }
        if self.weights.values.iter().any(|w| !(*w >= 0.0)) {
            return bad("loss weights must be non-negative");
        }
        if self.threads == Some(0) {
            return bad("thread count must be positive");
        }
        Ok(())
    }

    pub fn validation_count(&self) -> usize {
        self.validation.unwrap_or((self.collocation / 5).max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    EarlyStop,
    LossTarget,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRow {
    pub epoch: usize,
    pub lr: f64,
    pub terms: [f64; N_TERMS],
    pub total: f64,
    pub validation: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub theta: Vec<f64>,
    pub adam: AdamState,
    pub history: Vec<HistoryRow>,
    pub stop: StopReason,
    /// Diagnostic for a non-finite abort.
    pub error: Option<String>,
}

impl FitResult {
    pub fn final_loss(&self) -> Option<f64> {
        self.history.last().map(|r| r.total)
    }
}

fn thread_count(cfg: &TrainConfig) -> Option<usize> {
    cfg.threads.or_else(|| std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse().ok()).filter(|&n| n > 0))
}

/// Receives training progress as it happens.
pub trait FitObserver {
    fn on_row(&mut self, _row: &HistoryRow) {}
    /// Fires at the configured cadence and once at the end.
    fn on_checkpoint(&mut self, _epoch: usize, _theta: &[f64], _adam: &AdamState) {}
}

struct CheckpointFn<F>(F);

impl<F: FnMut(usize, &[f64], &AdamState)> FitObserver for CheckpointFn<F> {
    fn on_checkpoint(&mut self, epoch: usize, theta: &[f64], adam: &AdamState) {
        (self.0)(epoch, theta, adam)
    }
}

/// Trains `theta0` on `problem`. `on_checkpoint(epoch, θ, adam)` fires at the
/// configured cadence and once at the end.
pub fn fit<P: Problem>(
    problem: &P,
    cfg: &TrainConfig,
    theta0: Vec<f64>,
    on_checkpoint: impl FnMut(usize, &[f64], &AdamState),
) -> Result<FitResult, TrainError> {
    fit_observed(problem, cfg, theta0, &mut CheckpointFn(on_checkpoint))
}

pub fn fit_observed<P: Problem>(
    problem: &P,
    cfg: &TrainConfig,
    theta0: Vec<f64>,
    observer: &mut dyn FitObserver,
) -> Result<FitResult, TrainError> {
    cfg.validate()?;
    if theta0.len() != problem.network().param_count() {
        return Err(TrainError::Config(format!(
            "expected {} parameters, got {}",
            problem.network().param_count(),
            theta0.len()
        )));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(cfg) {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| TrainError::Config(e.to_string()))?;
    run(problem, cfg, theta0, &pool, observer)
}

fn run<P: Problem>(
    problem: &P,
    cfg: &TrainConfig,
    mut theta: Vec<f64>,
    pool: &rayon::ThreadPool,
    observer: &mut dyn FitObserver,
) -> Result<FitResult, TrainError> {
    let mut train = sample_points(problem, cfg.collocation, cfg.seed, Role::Training)?;
    let valid = sample_points(problem, cfg.validation_count(), cfg.seed, Role::Validation)?;
    let mut adam = AdamState::new(theta.len());
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best_valid = f64::INFINITY;
    let mut worse = 0usize;
    let mut stop = StopReason::Completed;
    let mut error = None;

    for epoch in 0..cfg.epochs {
        if cfg.resample && epoch > 0 {
            train = sample_points(problem, cfg.collocation, cfg.seed.wrapping_add(epoch as u64), Role::Training)?;
        }
        let lr = lr_schedule(epoch, cfg.epochs, cfg.lr_start, cfg.lr_end);
        let (report, grad) = match pool.install(|| compute_loss(problem, &theta, &train, &cfg.weights, true)) {
            Ok(r) if r.0.total.is_finite() => r,
            Ok(r) => {
                error = Some(format!("non-finite training loss {}", r.0.total));
                stop = StopReason::NonFinite;
                break;
            }
            Err(e @ TrainError::NonFinite { .. }) => {
                error = Some(e.to_string());
                stop = StopReason::NonFinite;
                break;
            }
            Err(e) => return Err(e),
        };
        let grad = grad.expect("gradient requested");
        if grad.iter().any(|g| !g.is_finite()) {
            error = Some("non-finite gradient".into());
            stop = StopReason::NonFinite;
            break;
        }

        let check = epoch % cfg.validation_every == 0 || epoch + 1 == cfg.epochs;
        let validation = if check {
            let (vr, _) = pool.install(|| compute_loss(problem, &theta, &valid, &cfg.weights, false))?;
            Some(vr.total)
        } else {
            None
        };
        let row = HistoryRow {
            epoch,
            lr,
            terms: report.terms,
            total: report.total,
            validation,
        };
        observer.on_row(&row);
        history.push(row);
        log::debug!("epoch {epoch} lr {lr:.3e} loss {:.6e}", report.total);

        if let Some(target) = cfg.loss_target {
            if report.total <= target {
                stop = StopReason::LossTarget;
                break;
            }
        }
        if let (Some(v), Some(patience)) = (validation, cfg.patience) {
            if v < best_valid {
                best_valid = v;
                worse = 0;
            } else {
                worse += 1;
                if worse >= patience {
                    stop = StopReason::EarlyStop;
                    break;
                }
            }
        }

        adam_step(&mut theta, &grad, &mut adam, lr, &cfg.adam);
        if cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0 && epoch + 1 < cfg.epochs {
            observer.on_checkpoint(epoch + 1, &theta, &adam);
        }
    }
    observer.on_checkpoint(adam.step as usize, &theta, &adam);
    Ok(FitResult {
        theta,
        adam,
        history,
        stop,
        error,
    })
}

/// Loss history as comma-separated text with a header row.
pub fn write_history<W: Write>(rows: &[HistoryRow], mut w: W) -> std::io::Result<()> {
    write_history_header(&mut w)?;
    for r in rows {
        write_history_row(r, &mut w)?;
    }
    Ok(())
}

/// Losses are squared scaled residuals, hence dimensionless.
pub fn write_history_header<W: Write>(mut w: W) -> std::io::Result<()> {
    write!(w, "epoch,lr")?;
    for t in Term::ALL {
        write!(w, ",loss_{}", t.name())?;
    }
    writeln!(w, ",loss_total,loss_validation")
}

pub fn write_history_row<W: Write>(r: &HistoryRow, mut w: W) -> std::io::Result<()> {
    write!(w, "{},{:.11e}", r.epoch, r.lr)?;
    for v in r.terms {
        write!(w, ",{v:.11e}")?;
    }
    write!(w, ",{:.11e},", r.total)?;
    if let Some(v) = r.validation {
        write!(w, "{v:.11e}")?;
    }
    writeln!(w)
}
