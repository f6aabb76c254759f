use std::fmt;

use serde::{Deserialize, Serialize};

use super::ExplainError;

/// Seed used when a configuration does not carry one.
pub const DEFAULT_SEED: u64 = 42;

/// Hyperparameters of one explainer run.
///
/// Serializes flat, with the method name under `"name"`:
///
/// ```
/// use thermostat::explainers::{ExplainerConfig, Method};
///
/// let cfg: ExplainerConfig = serde_json::from_str(r#"{"name":"lime","seed":7}"#).unwrap();
/// match cfg.method {
///     Method::Lime(p) => assert_eq!((p.samples, p.mask_prob), (25, 0.3)),
///     _ => unreachable!(),
/// }
/// assert_eq!(cfg.seed, 7);
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplainerConfig {
    #[serde(flatten)]
    pub method: Method,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Method {
    /// (Layer) Gradient × Activation. No hyperparameters.
    Lgxa,
    /// (Layer) Integrated Gradients.
    Lig(LigParams),
    Lime(LimeParams),
    /// Sliding-window occlusion.
    Occ(OcclusionParams),
    /// Shapley value sampling.
    Svs(SvsParams),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LigParams {
    /// Riemann midpoints along the baseline → input path.
    pub steps: usize,
}

impl Default for LigParams {
    fn default() -> Self {
        Self { steps: 25 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimeParams {
    /// Perturbed samples, including the unperturbed input.
    pub samples: usize,
    /// Probability of replacing a token with `[PAD]`.
    pub mask_prob: f64,
    pub kernel_width: f64,
    /// L2 penalty on the token coefficients (the intercept is not penalized).
    pub ridge_lambda: f64,
}

impl Default for LimeParams {
    fn default() -> Self {
        Self {
            samples: 25,
            mask_prob: 0.3,
            kernel_width: 1.0,
            ridge_lambda: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OcclusionParams {
    pub window: usize,
}

impl Default for OcclusionParams {
    fn default() -> Self {
        Self { window: 3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvsParams {
    /// Number of sampled permutations.
    pub samples: usize,
}

impl Default for SvsParams {
    fn default() -> Self {
        Self { samples: 25 }
    }
}

impl Method {
    pub const NAMES: [&'static str; 5] = ["lgxa", "lig", "lime", "occ", "svs"];

    /// Lowercase short name, as used in dataset coordinates.
    pub fn short_name(&self) -> &'static str {
        match self {
            Method::Lgxa => "lgxa",
            Method::Lig(_) => "lig",
            Method::Lime(_) => "lime",
            Method::Occ(_) => "occ",
            Method::Svs(_) => "svs",
        }
    }

    /// Default hyperparameters for a short name.
    pub fn from_short_name(name: &str) -> Option<Self> {
        Some(match name {
            "lgxa" => Method::Lgxa,
            "lig" => Method::Lig(LigParams::default()),
            "lime" => Method::Lime(LimeParams::default()),
            "occ" => Method::Occ(OcclusionParams::default()),
            "svs" => Method::Svs(SvsParams::default()),
            _ => return None,
        })
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Method::Lime(_) | Method::Svs(_))
    }
}

impl ExplainerConfig {
    pub fn new(method: Method, seed: u64) -> Self {
        Self { method, seed }
    }

    pub fn lgxa() -> Self {
        Self::new(Method::Lgxa, DEFAULT_SEED)
    }

    pub fn lig(steps: usize) -> Self {
        Self::new(Method::Lig(LigParams { steps }), DEFAULT_SEED)
    }

    pub fn lime(params: LimeParams, seed: u64) -> Self {
        Self::new(Method::Lime(params), seed)
    }

    pub fn occlusion(window: usize) -> Self {
        Self::new(Method::Occ(OcclusionParams { window }), DEFAULT_SEED)
    }

    pub fn svs(samples: usize, seed: u64) -> Self {
        Self::new(Method::Svs(SvsParams { samples }), seed)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn short_name(&self) -> &'static str {
        self.method.short_name()
    }

    /// Checks value ranges of every hyperparameter.
    pub fn validate(&self) -> Result<(), ExplainError> {
        let bad = |msg: String| Err(ExplainError::InvalidConfig(msg));
        match &self.method {
            Method::Lgxa => Ok(()),
            Method::Lig(p) if p.steps == 0 => bad("lig.steps must be >= 1".into()),
            Method::Occ(p) if p.window == 0 => bad("occ.window must be >= 1".into()),
            Method::Svs(p) if p.samples == 0 => bad("svs.samples must be >= 1".into()),
            Method::Lime(p) => {
                if p.samples == 0 {
                    bad("lime.samples must be >= 1".into())
                } else if !(p.mask_prob > 0.0 && p.mask_prob < 1.0) {
                    bad(format!("lime.mask_prob must be in (0, 1), got {}", p.mask_prob))
                } else if !(p.kernel_width > 0.0 && p.kernel_width.is_finite()) {
                    bad(format!("lime.kernel_width must be positive, got {}", p.kernel_width))
                } else if !(p.ridge_lambda >= 0.0 && p.ridge_lambda.is_finite()) {
                    bad(format!(
                        "lime.ridge_lambda must be non-negative, got {}",
                        p.ridge_lambda
                    ))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// `key=value` pairs of every hyperparameter, seed last.
    pub fn hyperparameters(&self) -> Vec<(&'static str, String)> {
        let mut out = match &self.method {
            Method::Lgxa => vec![],
            Method::Lig(p) => vec![("steps", p.steps.to_string())],
            Method::Lime(p) => vec![
                ("samples", p.samples.to_string()),
                ("mask_prob", p.mask_prob.to_string()),
                ("kernel_width", p.kernel_width.to_string()),
                ("ridge_lambda", p.ridge_lambda.to_string()),
            ],
            Method::Occ(p) => vec![("window", p.window.to_string())],
            Method::Svs(p) => vec![("samples", p.samples.to_string())],
        };
        out.push(("seed", self.seed.to_string()));
        out
    }
}

impl fmt::Display for ExplainerConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "explainer={}", self.short_name())?;
        for (k, v) in self.hyperparameters() {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}
