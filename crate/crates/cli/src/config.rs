//! Experiment configuration: one TOML file per experiment, flat dotted keys.

use serde::{Deserialize, Serialize};

use entchaos::classical::{dicke_point_from_energy, DickeParams, DickeState, KickedTopParams};
use entchaos::phase_space::BlochAngles;
use entchaos::precision::PrecisionConfig;
use entchaos::quantifiers::Axis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    KickedTop,
    Dicke,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Trajectory,
    Poincare,
    Lyapunov,
    Entropy,
    Qfi,
    Squeezing,
    Otoc,
    EdCompare,
}

impl Output {
    pub fn name(self) -> &'static str {
        match self {
            Output::Trajectory => "trajectory",
            Output::Poincare => "poincare",
            Output::Lyapunov => "lyapunov",
            Output::Entropy => "entropy",
            Output::Qfi => "qfi",
            Output::Squeezing => "squeezing",
            Output::Otoc => "otoc",
            Output::EdCompare => "ed_compare",
        }
    }

    /// Outputs computed from the fluctuation dynamics and, per `N`, by ED.
    pub fn is_quantifier(self) -> bool {
        matches!(self, Output::Entropy | Output::Qfi | Output::Squeezing | Output::Otoc | Output::EdCompare)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

/// Model parameters; which keys are required depends on the model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub omega: Option<f64>,
    pub omega0: Option<f64>,
}

/// Initial point. The Dicke oscillator is either given directly (`q`, `p`)
/// or fixed by `energy` with `p = 0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    pub theta: Option<f64>,
    pub cos_theta: Option<f64>,
    pub phi: f64,
    pub energy: Option<f64>,
    pub q: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovConfig {
    #[serde(rename = "K", alias = "k")]
    pub k: usize,
    pub s: f64,
    pub n_steps: usize,
    pub rng_seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdConfig {
    /// Boson cutoff `N_cut = cutoff_factor·N`; estimated from the classical
    /// trajectory when absent.
    pub cutoff_factor: Option<usize>,
    /// Kicks for which the kicked-top square commutator is computed.
    pub commutator_kicks: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoincareConfig {
    pub t_final: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub model: Model,
    #[serde(default)]
    pub params: Params,
    #[serde(alias = "initial_condition")]
    pub initial: Initial,
    #[serde(default, alias = "N_list")]
    pub n_list: Vec<usize>,
    pub t_final: f64,
    /// Sampling interval of Dicke series; the kicked top samples every kick.
    #[serde(default = "default_sample_dt")]
    pub sample_dt: f64,
    #[serde(default)]
    pub precision: PrecisionConfig,
    /// Spin fraction of subsystem `A` in kicked-top entropies.
    #[serde(default = "default_f_a")]
    pub f_a: f64,
    #[serde(default)]
    pub otoc_axes: Option<(Axis, Axis)>,
    pub lyapunov: Option<LyapunovConfig>,
    #[serde(default)]
    pub ed: EdConfig,
    #[serde(default)]
    pub poincare: PoincareConfig,
    pub outputs: Vec<Output>,
    pub output_dir: String,
    #[serde(default)]
    pub format: Format,
}

fn default_sample_dt() -> f64 {
    0.1
}

fn default_f_a() -> f64 {
    0.5
}

/// Largest spin multiplet accepted for kicked-top ED.
pub const MAX_ED_SPINS: usize = 4000;

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, Vec<String>> {
        toml::from_str(text).map_err(|e| vec![e.message().to_string()])
    }

    pub fn wants(&self, o: Output) -> bool {
        self.outputs.contains(&o)
    }

    pub fn wants_quantifiers(&self) -> bool {
        self.outputs.iter().any(|o| o.is_quantifier())
    }

    pub fn kicked_top_params(&self) -> Option<KickedTopParams> {
        Some(KickedTopParams::new(self.params.alpha?, self.params.beta?))
    }

    pub fn dicke_params(&self) -> Option<DickeParams> {
        Some(DickeParams {
            omega: self.params.omega.unwrap_or(1.0),
            omega0: self.params.omega0.unwrap_or(1.0),
            gamma: self.params.gamma?,
        })
    }

    pub fn angles(&self) -> Result<BlochAngles, String> {
        let a = match (self.initial.theta, self.initial.cos_theta) {
            (Some(t), None) => BlochAngles::new(t, self.initial.phi),
            (None, Some(c)) => BlochAngles::from_cos_theta(c, self.initial.phi),
            _ => return Err("give exactly one of initial.theta and initial.cos_theta".into()),
        };
        a.map_err(|e| e.to_string())
    }

    pub fn dicke_start(&self) -> Result<DickeState, String> {
        let params = self.dicke_params().ok_or("params.gamma is required for the Dicke model")?;
        let angles = self.angles()?;
        match (self.initial.energy, self.initial.q, self.initial.p) {
            (Some(e), None, None) => {
                dicke_point_from_energy(e, &angles, &params).map(|r| r.state).map_err(|e| e.to_string())
            }
            (None, Some(q), Some(p)) => Ok(DickeState::new(q, p, angles)),
            _ => Err("give either initial.energy or both initial.q and initial.p".into()),
        }
    }

    /// Number of kicks for kicked-top runs.
    pub fn kicks(&self) -> usize {
        self.t_final.round() as usize
    }

    pub fn dicke_times(&self) -> Vec<f64> {
        let steps = (self.t_final / self.sample_dt).round() as usize;
        (0..=steps).map(|k| k as f64 * self.sample_dt).collect()
    }

    pub fn axes(&self) -> (Axis, Axis) {
        self.otoc_axes.unwrap_or((Axis::Z, Axis::Z))
    }

    /// All problems with the configuration; empty when it is runnable.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = vec![];
        if self.name.trim().is_empty() {
            errs.push("name must not be empty".into());
        }
        if self.outputs.is_empty() {
            errs.push("outputs must list at least one output".into());
        }
        if self.output_dir.trim().is_empty() {
            errs.push("output_dir must not be empty".into());
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            errs.push(format!("t_final must be positive, got {}", self.t_final));
        }
        if let Err(e) = self.precision.validate() {
            errs.push(e.to_string());
        }
        if !(self.f_a > 0.0 && self.f_a < 1.0) {
            errs.push(format!("f_a must lie in (0, 1), got {}", self.f_a));
        }
        if let Err(e) = self.angles() {
            errs.push(e);
        }
        if self.wants(Output::EdCompare) && self.n_list.is_empty() {
            errs.push("ed_compare needs a non-empty N_list".into());
        }
        for &n in &self.n_list {
            if n < 2 {
                errs.push(format!("N_list entries must be at least 2, got {n}"));
            }
        }
        match &self.lyapunov {
            None if self.wants(Output::Lyapunov) => errs.push("lyapunov output needs a [lyapunov] section".into()),
            Some(l) if self.wants(Output::Lyapunov) => {
                if l.rng_seed.is_none() {
                    errs.push("lyapunov.rng_seed is mandatory when lyapunov output is requested".into());
                }
                if l.n_steps == 0 || !(l.s > 0.0) {
                    errs.push("lyapunov.n_steps and lyapunov.s must be positive".into());
                }
                let dim = match self.model {
                    Model::KickedTop => 2,
                    Model::Dicke => 4,
                };
                if l.k == 0 || l.k > dim {
                    errs.push(format!("lyapunov.K must lie in 1..={dim}"));
                }
                if self.model == Model::KickedTop && l.s.fract() != 0.0 {
                    errs.push("lyapunov.s must be a whole number of kicks".into());
                }
            }
            _ => {}
        }
        match self.model {
            Model::KickedTop => self.validate_kicked_top(&mut errs),
            Model::Dicke => self.validate_dicke(&mut errs),
        }
        errs
    }

    fn validate_kicked_top(&self, errs: &mut Vec<String>) {
        match self.kicked_top_params() {
            Some(p) => {
                if let Err(e) = p.validate() {
                    errs.push(e.to_string());
                }
            }
            None => errs.push("params.alpha and params.beta are required for the kicked top".into()),
        }
        if self.params.gamma.is_some() || self.params.omega.is_some() || self.params.omega0.is_some() {
            errs.push("params.gamma, params.omega and params.omega0 belong to the Dicke model".into());
        }
        if self.t_final.fract() != 0.0 {
            errs.push("t_final counts kicks and must be a whole number".into());
        }
        if self.initial.energy.is_some() || self.initial.q.is_some() || self.initial.p.is_some() {
            errs.push("initial.energy, initial.q and initial.p belong to the Dicke model".into());
        }
        if self.ed.cutoff_factor.is_some() {
            errs.push("ed.cutoff_factor belongs to the Dicke model".into());
        }
        if self.wants(Output::Otoc) && !self.n_list.is_empty() && self.axes() != (Axis::Z, Axis::Z) {
            errs.push("exact square commutators are computed for otoc_axes = [\"z\", \"z\"] only".into());
        }
        for &n in &self.n_list {
            if n > MAX_ED_SPINS {
                errs.push(format!("N={n} exceeds the ED limit {MAX_ED_SPINS}"));
            }
            let n_a = (self.f_a * n as f64).round() as usize;
            if n_a == 0 || n_a >= n {
                errs.push(format!("f_a={} leaves an empty subsystem at N={n}", self.f_a));
            }
        }
    }

    fn validate_dicke(&self, errs: &mut Vec<String>) {
        match self.dicke_params() {
            Some(p) => {
                if let Err(e) = p.validate() {
                    errs.push(e.to_string());
                } else if let Err(e) = self.dicke_start() {
                    errs.push(e);
                }
            }
            None => errs.push("params.gamma is required for the Dicke model".into()),
        }
        if self.params.alpha.is_some() || self.params.beta.is_some() {
            errs.push("params.alpha and params.beta belong to the kicked top".into());
        }
        if self.precision.is_extended() {
            errs.push("extended precision is only available for the kicked top".into());
        }
        if !(self.sample_dt > 0.0) || self.sample_dt > self.t_final {
            errs.push(format!("sample_dt must lie in (0, t_final], got {}", self.sample_dt));
        }
        if self.ed.commutator_kicks.is_some() {
            errs.push("ed.commutator_kicks belongs to the kicked top".into());
        }
        if let Some(d) = self.ed.cutoff_factor {
            if d < 1 {
                errs.push("ed.cutoff_factor must be at least 1".into());
            }
        }
    }
}
