//! Run configuration. Every dimensional key carries its unit in the name.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::IoError;
use crate::physics1d::{Loading, Material1D, MicroMode, Problem1D, Sweep, SweepParam, DEFAULT_EPS_REG};
use crate::physics2d::{Material2D, Problem2D};
use crate::problem::Term;
use crate::train::{AdamConfig, LossWeights, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "1d")]
    OneD,
    #[serde(rename = "2d")]
    TwoD,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Material1DConfig {
    pub mu_gpa: f64,
    pub s0_mpa: f64,
    pub d0_per_s: f64,
    pub m: f64,
    pub hardening_mpa: f64,
    /// Energetic length scale in units of the strip width.
    pub energetic_length_h: f64,
    /// Dissipative length scale in units of the strip width.
    pub dissipative_length_h: f64,
    pub width_um: f64,
}

impl Default for Material1DConfig {
    fn default() -> Self {
        let m = Material1D::default();
        Material1DConfig {
            mu_gpa: m.mu / 1e9,
            s0_mpa: m.s0 / 1e6,
            d0_per_s: m.d0,
            m: m.m,
            hardening_mpa: 0.0,
            energetic_length_h: 0.0,
            dissipative_length_h: 0.0,
            width_um: m.width * 1e6,
        }
    }
}

impl Material1DConfig {
    pub fn to_material(&self) -> Material1D {
        Material1D {
            mu: self.mu_gpa * 1e9,
            s0: self.s0_mpa * 1e6,
            d0: self.d0_per_s,
            m: self.m,
            hardening: self.hardening_mpa * 1e6,
            energetic_length: self.energetic_length_h,
            dissipative_length: self.dissipative_length_h,
            width: self.width_um * 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Material2DConfig {
    pub young_gpa: f64,
    pub poisson: f64,
    pub s0_mpa: f64,
    pub d0_per_s: f64,
    /// Reference rate of the resistance π; defaults to `d0_per_s`.
    pub nu0_per_s: Option<f64>,
    pub m: f64,
    /// Rate sensitivity of the dissipative gradient term; defaults to `m`.
    pub q: Option<f64>,
    pub hardening_mpa: f64,
    pub l1_h: f64,
    pub l2_h: f64,
    pub l3_h: f64,
    pub width_um: f64,
    pub body_force_pa_per_m: [f64; 2],
    /// Domain length along x1 in units of the strip width.
    pub aspect: f64,
}

impl Default for Material2DConfig {
    fn default() -> Self {
        let m = Material2D::default();
        Material2DConfig {
            young_gpa: m.young / 1e9,
            poisson: m.poisson,
            s0_mpa: m.s0 / 1e6,
            d0_per_s: m.d0,
            nu0_per_s: None,
            m: m.m,
            q: None,
            hardening_mpa: 0.0,
            l1_h: 0.0,
            l2_h: 0.0,
            l3_h: 0.0,
            width_um: m.width * 1e6,
            body_force_pa_per_m: [0.0, 0.0],
            aspect: 1.0,
        }
    }
}

impl Material2DConfig {
    pub fn to_material(&self) -> Material2D {
        Material2D {
            young: self.young_gpa * 1e9,
            poisson: self.poisson,
            s0: self.s0_mpa * 1e6,
            d0: self.d0_per_s,
            nu0: self.nu0_per_s.unwrap_or(self.d0_per_s),
            m: self.m,
            q: self.q.unwrap_or(self.m),
            hardening: self.hardening_mpa * 1e6,
            l1: self.l1_h,
            l2: self.l2_h,
            l3: self.l3_h,
            width: self.width_um * 1e-6,
            body_force: self.body_force_pa_per_m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadingConfig {
    pub shear_rate_per_s: f64,
    pub t_max_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub hidden: Vec<usize>,
    /// `direct` or `mixed`; chosen from the length scales when absent.
    pub mode: Option<MicroMode>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            hidden: vec![32, 32, 32],
            mode: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightsConfig {
    pub macro_: f64,
    pub micro: f64,
    pub hardening: f64,
    pub mixed: f64,
    pub evolution: f64,
    pub penalty: f64,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        WeightsConfig {
            macro_: 1.0,
            micro: 1.0,
            hardening: 1.0,
            mixed: 1.0,
            evolution: 1.0,
            penalty: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub epochs: usize,
    pub collocation: usize,
    pub validation: Option<usize>,
    pub lr_start: f64,
    pub lr_end: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    /// Validation checks without improvement before stopping; 0 disables.
    pub patience: usize,
    pub validation_every: usize,
    pub checkpoint_every: usize,
    pub resample: bool,
    pub loss_target: Option<f64>,
    pub threads: Option<usize>,
    pub weights: WeightsConfig,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            epochs: t.epochs,
            collocation: t.collocation,
            validation: None,
            lr_start: t.lr_start,
            lr_end: t.lr_end,
            beta1: t.adam.beta1,
            beta2: t.adam.beta2,
            adam_eps: t.adam.eps,
            patience: t.patience.unwrap_or(0),
            validation_every: t.validation_every,
            checkpoint_every: 0,
            resample: false,
            loss_target: None,
            threads: None,
            weights: WeightsConfig::default(),
        }
    }
}

/// One swept parameter, or a list (rejected unless it has exactly one entry).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamList {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// `mu_gpa` or `s0_mpa`; `lo`, `hi` and `predict` use that unit.
    pub param: ParamList,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    #[serde(default)]
    pub predict: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PredictConfig {
    pub grid: usize,
    pub series_points: usize,
    pub profile_points: usize,
    /// Divide the plastic-strain profile by its midpoint value.
    pub normalize_profile: bool,
}

impl Default for PredictConfig {
    fn default() -> Self {
        PredictConfig {
            grid: 101,
            series_points: 101,
            profile_points: 101,
            normalize_profile: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: String,
    pub model: Model,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub output_dir: String,
    #[serde(default = "default_eps")]
    pub eps_reg: f64,
    #[serde(default)]
    pub material_1d: Option<Material1DConfig>,
    #[serde(default)]
    pub material_2d: Option<Material2DConfig>,
    #[serde(default)]
    pub loading: Option<LoadingConfig>,
    #[serde(default)]
    pub network: NetworkConfig,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub predict: PredictConfig,
}

fn default_out() -> String {
    "runs".into()
}

fn default_eps() -> f64 {
    DEFAULT_EPS_REG
}

/// A validated problem ready for training.
#[derive(Debug, Clone)]
pub enum BuiltProblem {
    OneD(Problem1D),
    TwoD(Problem2D),
}

impl RunConfig {
    pub fn from_toml(s: &str) -> Result<Self, IoError> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| IoError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, IoError> {
        let s = std::fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
        Self::from_toml(&s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 over the canonical JSON form (sorted keys), hex encoded.
    pub fn hash(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        let canon = serde_json::to_string(&v).expect("json");
        let digest = Sha256::digest(canon.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn loading(&self) -> Loading {
        match (&self.loading, self.model) {
            (Some(l), _) => Loading {
                shear_rate: l.shear_rate_per_s,
                t_max: l.t_max_s,
            },
            (None, Model::OneD) => Loading::default(),
            (None, Model::TwoD) => crate::physics2d::default_loading_2d(),
        }
    }

    pub fn material_1d(&self) -> Material1D {
        self.material_1d.clone().unwrap_or_default().to_material()
    }

    pub fn material_2d(&self) -> Material2D {
        self.material_2d.clone().unwrap_or_default().to_material()
    }

    pub fn micro_mode(&self) -> MicroMode {
        let m = self.material_1d();
        self.network.mode.unwrap_or(if m.dissipative_length > 0.0 {
            MicroMode::Mixed
        } else {
            MicroMode::Direct
        })
    }

    pub fn sweep_spec(&self) -> Result<Option<Sweep>, IoError> {
        let Some(s) = &self.sweep else { return Ok(None) };
        let name = match &s.param {
            ParamList::One(n) => n.clone(),
            ParamList::Many(v) if v.len() == 1 => v[0].clone(),
            ParamList::Many(v) => {
                return Err(IoError::Config(format!(
                    "sweep.param: joint sweeps over {v:?} are unsupported; training with both mu and s0 as inputs proved unreliable, sweep one parameter at a time"
                )))
            }
        };
        let (param, unit) = match name.as_str() {
            "mu_gpa" => (SweepParam::Mu, 1e9),
            "s0_mpa" => (SweepParam::S0, 1e6),
            other => return Err(IoError::Config(format!("sweep.param: unknown parameter `{other}` (expected mu_gpa or s0_mpa)"))),
        };
        Ok(Some(Sweep {
            param,
            lo: s.lo * unit,
            hi: s.hi * unit,
            count: s.count,
        }))
    }

    /// Sweep prediction values in SI units.
    pub fn sweep_predictions(&self) -> Vec<f64> {
        match (&self.sweep, self.sweep_spec()) {
            (Some(s), Ok(Some(sp))) => {
                let unit = if sp.param == SweepParam::Mu { 1e9 } else { 1e6 };
                s.predict.iter().map(|v| v * unit).collect()
            }
            _ => Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), IoError> {
        let cfg = |m: String| Err(IoError::Config(m));
        match self.model {
            Model::OneD => {
                if self.material_2d.is_some() {
                    return cfg("material_2d given for a 1d model".into());
                }
                let m = self.material_1d();
                if m.dissipative_length > 0.0 && self.network.mode == Some(MicroMode::Direct) {
                    return cfg(
                        "network.mode: direct mode needs dissipative_length_h = 0; mixed mode is mandatory when the dissipative length scale is positive".into(),
                    );
                }
            }
            Model::TwoD => {
                if self.material_1d.is_some() {
                    return cfg("material_1d given for a 2d model".into());
                }
                if self.sweep.is_some() {
                    return cfg("sweep: parameter sweeps are defined for the 1d model only".into());
                }
                if self.network.mode.is_some() {
                    return cfg("network.mode: the 2d model selects mixed mode from l3_h".into());
                }
                if self.material_2d().l2 != 0.0 {
                    return cfg("material_2d.l2_h: l2 > 0 is unsupported (ambiguous dissipative gradient-hardening operator)".into());
                }
            }
        }
        self.sweep_spec()?;
        self.build().map(|_| ()).map_err(|e| match e {
            IoError::Config(m) => IoError::Config(m),
            other => other,
        })?;
        self.train_config().validate().map_err(|e| IoError::Config(format!("train: {e}")))
    }

    pub fn build(&self) -> Result<BuiltProblem, IoError> {
        let err = |e: crate::problem::PhysicsError| IoError::Config(e.to_string());
        match self.model {
            Model::OneD => Problem1D::new(
                self.material_1d(),
                self.loading(),
                self.micro_mode(),
                &self.network.hidden,
                self.sweep_spec()?,
                self.eps_reg,
            )
            .map(BuiltProblem::OneD)
            .map_err(err),
            Model::TwoD => {
                let m2 = self.material_2d.clone().unwrap_or_default();
                if !(m2.aspect > 0.0) {
                    return Err(IoError::Config("material_2d.aspect must be positive".into()));
                }
                Problem2D::new(self.material_2d(), self.loading(), &self.network.hidden, self.eps_reg)
                    .map(|p| BuiltProblem::TwoD(p.with_aspect(m2.aspect)))
                    .map_err(err)
            }
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.train;
        let w = &t.weights;
        let weights = LossWeights::default()
            .with(Term::Macro, w.macro_)
            .with(Term::Micro, w.micro)
            .with(Term::Hardening, w.hardening)
            .with(Term::Mixed, w.mixed)
            .with(Term::Evolution, w.evolution)
            .with(Term::Penalty, w.penalty);
        TrainConfig {
            epochs: t.epochs,
            collocation: t.collocation,
            validation: t.validation,
            lr_start: t.lr_start,
            lr_end: t.lr_end,
            adam: AdamConfig {
                beta1: t.beta1,
                beta2: t.beta2,
                eps: t.adam_eps,
            },
            seed: self.seed,
            patience: (t.patience > 0).then_some(t.patience),
            validation_every: t.validation_every,
            checkpoint_every: t.checkpoint_every,
            resample: t.resample,
            loss_target: t.loss_target,
            weights,
            threads: t.threads,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
experiment = "baseline"
model = "1d"
seed = 3

[material_1d]
mu_gpa = 100.0
s0_mpa = 100.0

[train]
epochs = 10
collocation = 50
"#;

    #[test]
    fn parses_and_builds() {
        let c = RunConfig::from_toml(BASE).unwrap();
        assert_eq!(c.train_config().epochs, 10);
        assert_eq!(c.material_1d().mu, 100e9);
        assert!(matches!(c.build().unwrap(), BuiltProblem::OneD(_)));
    }

    #[test]
    fn hash_ignores_key_order() {
        let reordered = r#"
model = "1d"
experiment = "baseline"
[train]
collocation = 50
epochs = 10
[material_1d]
s0_mpa = 100.0
mu_gpa = 100.0
"#;
        let a = RunConfig::from_toml(BASE).unwrap();
        let mut b = RunConfig::from_toml(reordered).unwrap();
        b.seed = 3;
        assert_eq!(a.hash(), b.hash());
        b.seed = 4;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn direct_mode_with_dissipative_length_names_the_rule() {
        let s = format!("{BASE}\n[network]\nmode = \"direct\"\n").replace("s0_mpa = 100.0", "s0_mpa = 100.0\ndissipative_length_h = 10.0");
        let e = RunConfig::from_toml(&s).unwrap_err().to_string();
        assert!(e.contains("mixed mode"), "{e}");
    }

    #[test]
    fn joint_sweep_is_rejected() {
        let s = format!("{BASE}\n[sweep]\nparam = [\"mu_gpa\", \"s0_mpa\"]\nlo = 10.0\nhi = 1000.0\ncount = 30\n");
        let e = RunConfig::from_toml(&s).unwrap_err().to_string();
        assert!(e.contains("joint sweeps"), "{e}");
    }

    #[test]
    fn unknown_keys_are_reported() {
        let s = BASE.replace("mu_gpa", "mu");
        let e = RunConfig::from_toml(&s).unwrap_err().to_string();
        assert!(e.contains("mu"), "{e}");
    }

    #[test]
    fn two_d_rejects_l2() {
        let s = "experiment = \"x\"\nmodel = \"2d\"\n[material_2d]\nl2_h = 1.0\n";
        assert!(RunConfig::from_toml(s).unwrap_err().to_string().contains("l2"));
    }
}
