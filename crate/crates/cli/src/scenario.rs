//! Scenario configuration: which plant, which disturbance, which bounds.

use serde::{Deserialize, Serialize};

use gapbound::bounds::BoundKind;
use gapbound::envelopes::Envelope;
use gapbound::ode::IntegratorConfig;
use gapbound::powermodels::{GeneratorParams, GovernorParams, CASE_X0};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Second-order generator on both sides of the gap.
    Generator2,
    /// Second-order model against the generator with turbine-governor.
    GeneratorGovernor,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub generator: GeneratorParams,
    pub governor: GovernorParams,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resonant {
    Resonant,
}

/// Sine frequency in rad/s, or `"resonant"` for the gain peak of `A(∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Frequency {
    Resonant(Resonant),
    RadPerSec(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Disturbance {
    /// `P_m + epsilon`.
    Constant { epsilon: f64 },
    /// `P_m + magnitude·sin(frequency·t)`.
    Sine {
        magnitude: f64,
        frequency: Frequency,
        /// Lets bounds that need the input signal itself be evaluated.
        #[serde(default)]
        known_input: bool,
    },
    /// The plant is the governor model; the disturbance is its `P_m(t) − P_m`.
    GovernorMismatch {
        #[serde(default)]
        known_input: bool,
    },
}

impl Disturbance {
    pub fn input_known(&self) -> bool {
        match *self {
            Disturbance::Constant { .. } => true,
            Disturbance::Sine { known_input, .. } | Disturbance::GovernorMismatch { known_input } => known_input,
        }
    }
}

fn default_inflation() -> f64 {
    0.05
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvelopeChoice {
    /// Both envelopes fitted to sampled norms.
    Fit {
        #[serde(default = "default_inflation")]
        inflation: f64,
        /// Sampling step of the fit; the bound grid step when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid_step: Option<f64>,
    },
    /// `β·e^{−ct}` from the Lyapunov equation for `‖e^{A(∞)s}‖`; the deviation is still fitted.
    Lemma3 {
        #[serde(default = "default_inflation")]
        inflation: f64,
    },
    Explicit { exp: Envelope, d_a: Envelope },
}

impl Default for EnvelopeChoice {
    fn default() -> Self {
        EnvelopeChoice::Fit { inflation: default_inflation(), grid_step: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundOptions {
    /// Pieces of the uniform partition used by `bound1_tight`.
    pub partition_pieces: usize,
    /// Norm-equivalence constant; `√n` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k2inf: Option<f64>,
    /// Slack allowed when testing containment, absorbing integrator error.
    pub containment_tol: f64,
    /// Convergence tolerance for `A(t)` at the end of the horizon.
    pub steady_tol: f64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self { partition_pieces: 10, k2inf: None, containment_tol: 1e-8, steady_tol: 1e-4 }
    }
}

fn default_x0() -> [f64; 2] {
    CASE_X0
}

fn default_horizon() -> f64 {
    20.0
}

fn default_grid_step() -> f64 {
    0.005
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub model: ModelKind,
    #[serde(default)]
    pub params: ModelParams,
    /// Initial `(δ, ω)`.
    #[serde(default = "default_x0")]
    pub x0: [f64; 2],
    pub disturbance: Disturbance,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
    pub bounds: Vec<BoundKind>,
    #[serde(default)]
    pub envelope: EnvelopeChoice,
    #[serde(default)]
    pub options: BoundOptions,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Scenario {
    /// Parses JSON, reporting the offending field path and position on failure.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            bad(format!("{path}: {inner}"))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            return Err(bad(format!("name: `{}` must be non-empty and use only [A-Za-z0-9._-]", self.name)));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(bad("horizon: must be positive"));
        }
        if !(self.grid_step.is_finite() && self.grid_step > 0.0 && self.grid_step <= self.horizon) {
            return Err(bad("grid_step: must be positive and at most the horizon"));
        }
        if !self.x0.iter().all(|v| v.is_finite()) {
            return Err(bad("x0: must be finite"));
        }
        self.params.generator.validate().map_err(|e| bad(format!("params.generator: {e}")))?;
        self.params.governor.validate().map_err(|e| bad(format!("params.governor: {e}")))?;
        self.integrator.validate().map_err(|e| bad(format!("integrator: {e}")))?;

        match (self.model, &self.disturbance) {
            (ModelKind::GeneratorGovernor, Disturbance::GovernorMismatch { .. }) => {}
            (ModelKind::Generator2, Disturbance::Constant { .. } | Disturbance::Sine { .. }) => {}
            (m, _) => return Err(bad(format!("disturbance: not compatible with model {m:?}"))),
        }
        match self.disturbance {
            Disturbance::Constant { epsilon } if !(epsilon.is_finite() && epsilon >= 0.0) => {
                return Err(bad("disturbance.epsilon: must be finite and non-negative"));
            }
            Disturbance::Sine { magnitude, frequency, .. } => {
                if !(magnitude.is_finite() && magnitude >= 0.0) {
                    return Err(bad("disturbance.magnitude: must be finite and non-negative"));
                }
                if let Frequency::RadPerSec(w) = frequency {
                    if !(w.is_finite() && w >= 0.0) {
                        return Err(bad("disturbance.frequency: must be finite and non-negative"));
                    }
                }
            }
            _ => {}
        }

        if self.bounds.is_empty() {
            return Err(bad("bounds: at least one bound is required"));
        }
        for (i, b) in self.bounds.iter().enumerate() {
            if self.bounds[..i].contains(b) {
                return Err(bad(format!("bounds[{i}]: `{b}` listed twice")));
            }
        }
        if !self.disturbance.input_known() {
            if let Some(b) = self.bounds.iter().find(|b| **b != BoundKind::Theorem2) {
                return Err(bad(format!(
                    "bounds: `{b}` needs the disturbance signal; set disturbance.known_input or request theorem2 only"
                )));
            }
        }

        if self.options.partition_pieces == 0 {
            return Err(bad("options.partition_pieces: must be at least 1"));
        }
        if let Some(k) = self.options.k2inf {
            if !(k.is_finite() && k >= 1.0) {
                return Err(bad("options.k2inf: must be at least 1"));
            }
        }
        if !(self.options.containment_tol >= 0.0 && self.options.containment_tol.is_finite()) {
            return Err(bad("options.containment_tol: must be finite and non-negative"));
        }
        if !(self.options.steady_tol > 0.0) {
            return Err(bad("options.steady_tol: must be positive"));
        }
        match self.envelope {
            EnvelopeChoice::Fit { inflation, grid_step } => {
                if !(inflation.is_finite() && inflation >= 0.0) {
                    return Err(bad("envelope.inflation: must be finite and non-negative"));
                }
                if let Some(s) = grid_step {
                    if !(s > 0.0 && s <= self.horizon) {
                        return Err(bad("envelope.grid_step: must be positive and at most the horizon"));
                    }
                }
            }
            EnvelopeChoice::Lemma3 { inflation } if !(inflation.is_finite() && inflation >= 0.0) => {
                return Err(bad("envelope.inflation: must be finite and non-negative"));
            }
            EnvelopeChoice::Explicit { exp, d_a } => {
                exp.validate().map_err(|e| bad(format!("envelope.exp: {e}")))?;
                d_a.validate().map_err(|e| bad(format!("envelope.d_a: {e}")))?;
                if exp.is_zero() {
                    return Err(bad("envelope.exp: the exponential envelope cannot be zero"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Constant step of 0.1 in `P_m`.
pub fn constant_scenario() -> Scenario {
    Scenario {
        name: "constant".into(),
        model: ModelKind::Generator2,
        params: ModelParams::default(),
        x0: CASE_X0,
        disturbance: Disturbance::Constant { epsilon: 0.1 },
        horizon: default_horizon(),
        grid_step: default_grid_step(),
        bounds: vec![BoundKind::Bound1, BoundKind::Bound1Tight, BoundKind::Bound2],
        envelope: EnvelopeChoice::default(),
        options: BoundOptions::default(),
        integrator: IntegratorConfig::default(),
    }
}

/// Sine of magnitude 0.1 in `P_m` at the resonant frequency of `A(∞)`.
pub fn sine_scenario() -> Scenario {
    Scenario {
        name: "sine".into(),
        disturbance: Disturbance::Sine { magnitude: 0.1, frequency: Frequency::Resonant(Resonant::Resonant), known_input: false },
        bounds: vec![BoundKind::Theorem2],
        ..constant_scenario()
    }
}

/// Second-order model against the plant with turbine-governor.
pub fn governor_scenario() -> Scenario {
    Scenario {
        name: "governor".into(),
        model: ModelKind::GeneratorGovernor,
        disturbance: Disturbance::GovernorMismatch { known_input: false },
        bounds: vec![BoundKind::Theorem2],
        ..constant_scenario()
    }
}

pub fn builtin_scenarios() -> Vec<Scenario> {
    vec![constant_scenario(), sine_scenario(), governor_scenario()]
}
