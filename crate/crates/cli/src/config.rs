//! Experiment configuration: a TOML document that round-trips losslessly
//! and rejects unknown fields.
//!
//! Slowly varying functions are described by a family name plus a
//! positional parameter array:
//!
//! | family         | params            | function                           |
//! |----------------|-------------------|------------------------------------|
//! | `constant`     | `[c]`             | `c`                                |
//! | `iterlog`      | `[m1, .., mk]`    | `prod_j (ln_j s)^(m_j)`            |
//! | `explog`       | `[m1, .., mk]`    | `exp(prod_j (ln_j s)^(m_j))`       |
//! | `oscillating`  | `[]`              | `exp((ln s)^(1/3) cos((ln s)^(1/3)))` |
//! | `karamata_log` | `[m]`             | Karamata form with `eps = m/ln`    |
//!
//! Kernel families use the same convention: `box [width]`,
//! `tent [half_base]`, `gaussian [variance]`, `stable [sigma, scale]`,
//! `logperturbed [sigma, mu, scale]`, `prescribed [sigma, gamma, scale]`
//! plus a `[kernel.slow]` table, and `pathological []`. Initial data:
//! `gaussian [variance]`, `box [width]`, `spike []`,
//! `bandlimited [cutoff]`.

use std::sync::Arc;

use nldiff_core::decayfit::{EnvelopeSpec, ScenarioKind, ScenarioSpec};
use nldiff_core::kernels::KernelFamily;
use nldiff_core::regvar::SlowVarying;
use nldiff_core::solver::{InitialFamily, NormP};
use nldiff_core::xseries::{geometric_grid, SeriesSpec};
use nldiff_core::regvar::RegVarying;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Scenario identifier; for `solve` one of the theorem scenarios,
    /// free-form for `series` and `kernel` runs.
    pub scenario: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_removal_rate")]
    pub removal_rate: f64,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default = "default_norms")]
    pub norms: Vec<String>,
    #[serde(default)]
    pub kernel: Option<KernelConfig>,
    #[serde(default)]
    pub u0: Option<InitialConfig>,
    #[serde(default)]
    pub time_grid: Option<TimeGridConfig>,
    #[serde(default)]
    pub fit: Option<FitConfig>,
    #[serde(default)]
    pub envelope: Option<EnvelopeConfig>,
    #[serde(default)]
    pub series: Option<SeriesConfig>,
    #[serde(default)]
    pub kernel_sweep: Option<KernelSweepConfig>,
}

fn default_removal_rate() -> f64 {
    1.0
}

fn default_norms() -> Vec<String> {
    vec!["inf".into()]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub family: String,
    #[serde(default)]
    pub params: Vec<f64>,
    pub n: usize,
    pub half_width: f64,
    pub points_per_axis: usize,
    #[serde(default)]
    pub slow: Option<SlowConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlowConfig {
    pub family: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub family: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGridConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_decade: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub window: [f64; 2],
    #[serde(default = "default_tolerance")]
    pub exponent_tolerance: f64,
    #[serde(default = "default_ratio_cap")]
    pub ratio_cap: f64,
}

fn default_tolerance() -> f64 {
    0.05
}

fn default_ratio_cap() -> f64 {
    2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConfig {
    pub index: f64,
    pub slow: SlowConfig,
    pub start: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub points: usize,
    pub calibrate_at: usize,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_margin() -> f64 {
    1.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    pub alpha: f64,
    pub start: usize,
    pub index: f64,
    pub slow: SlowConfig,
    #[serde(default = "default_tail_tolerance")]
    pub tail_tolerance: f64,
}

fn default_tail_tolerance() -> f64 {
    1e-9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSweepConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub points_per_decade: usize,
    #[serde(default = "default_gamma_probe")]
    pub gamma_probe: f64,
}

fn default_gamma_probe() -> f64 {
    1.0
}

/// A configuration problem, reported with the offending field.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn require<'a, T>(value: &'a Option<T>, field: &str) -> Result<&'a T, ConfigError> {
    value.as_ref().ok_or_else(|| ConfigError(format!("missing [{field}] section")))
}

fn positive(v: f64, field: &str) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError(format!("field {field} must be positive, got {v}")))
    }
}

impl SlowConfig {
    pub fn build(&self) -> Result<SlowVarying, ConfigError> {
        let bad = |msg: String| ConfigError(msg);
        match self.family.as_str() {
            "constant" => {
                let c = *self
                    .params
                    .first()
                    .ok_or_else(|| bad("slow.params needs [c] for constant".into()))?;
                SlowVarying::constant(c).map_err(|e| bad(format!("slow.params: {e}")))
            }
            "iterlog" => SlowVarying::iter_log_power(&self.params)
                .map_err(|e| bad(format!("slow.params: {e}"))),
            "explog" => SlowVarying::exp_log_power(&self.params)
                .map_err(|e| bad(format!("slow.params: {e}"))),
            "oscillating" => Ok(SlowVarying::oscillating()),
            "karamata_log" => {
                let mu = *self
                    .params
                    .first()
                    .ok_or_else(|| bad("slow.params needs [mu] for karamata_log".into()))?;
                SlowVarying::karamata(
                    Arc::new(|_| 1.0),
                    Arc::new(move |tau: f64| mu / tau.ln()),
                    std::f64::consts::E,
                )
                .map_err(|e| bad(format!("slow.params: {e}")))
            }
            other => Err(bad(format!("unknown slow family {other:?}"))),
        }
    }
}

impl KernelConfig {
    pub fn family(&self) -> Result<KernelFamily, ConfigError> {
        let p = |i: usize, name: &str| -> Result<f64, ConfigError> {
            self.params.get(i).copied().ok_or_else(|| {
                ConfigError(format!("kernel.params needs {name} at position {i}"))
            })
        };
        match self.family.as_str() {
            "box" => Ok(KernelFamily::Box { width: p(0, "width")? }),
            "tent" => Ok(KernelFamily::Tent { half_base: p(0, "half_base")? }),
            "gaussian" => Ok(KernelFamily::Gaussian { variance: p(0, "variance")? }),
            "stable" => Ok(KernelFamily::StableSymbol { sigma: p(0, "sigma")?, scale: p(1, "scale")? }),
            "logperturbed" => Ok(KernelFamily::LogPerturbedSymbol {
                sigma: p(0, "sigma")?,
                mu: p(1, "mu")?,
                scale: p(2, "scale")?,
            }),
            "prescribed" => {
                let slow = require(&self.slow, "kernel.slow")?.build()?;
                Ok(KernelFamily::PrescribedSymbol {
                    sigma: p(0, "sigma")?,
                    gamma: p(1, "gamma")?,
                    scale: p(2, "scale")?,
                    slow,
                })
            }
            "pathological" => Ok(KernelFamily::PathologicalLogTail),
            other => Err(ConfigError(format!("unknown kernel family {other:?}"))),
        }
    }
}

impl InitialConfig {
    pub fn family(&self) -> Result<InitialFamily, ConfigError> {
        let p = |i: usize, name: &str| -> Result<f64, ConfigError> {
            self.params.get(i).copied().ok_or_else(|| {
                ConfigError(format!("u0.params needs {name} at position {i}"))
            })
        };
        match self.family.as_str() {
            "gaussian" => Ok(InitialFamily::Gaussian { variance: p(0, "variance")? }),
            "box" => Ok(InitialFamily::Box { width: p(0, "width")? }),
            "spike" => Ok(InitialFamily::Spike),
            "bandlimited" => Ok(InitialFamily::BandLimited { cutoff: p(0, "cutoff")? }),
            other => Err(ConfigError(format!("unknown u0 family {other:?}"))),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("{e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn norm_set(&self) -> Result<Vec<NormP>, ConfigError> {
        if self.norms.is_empty() {
            return Err(ConfigError("field norms must not be empty".into()));
        }
        self.norms
            .iter()
            .map(|s| NormP::parse(s).map_err(|e| ConfigError(format!("field norms: {e}"))))
            .collect()
    }

    pub fn time_points(&self) -> Result<Vec<f64>, ConfigError> {
        let tg = require(&self.time_grid, "time_grid")?;
        positive(tg.t_min, "time_grid.t_min")?;
        if !(tg.t_max > tg.t_min) {
            return Err(ConfigError(format!(
                "field time_grid.t_max must exceed t_min, got {} <= {}",
                tg.t_max, tg.t_min
            )));
        }
        if tg.points_per_decade == 0 {
            return Err(ConfigError("field time_grid.points_per_decade must be >= 1".into()));
        }
        Ok(geometric_grid(tg.t_min, tg.t_max, tg.points_per_decade))
    }

    pub fn series_spec(&self) -> Result<SeriesSpec, ConfigError> {
        let sc = require(&self.series, "series")?;
        positive(sc.alpha, "series.alpha")?;
        let slow = sc.slow.build()?;
        let envelope = RegVarying::new(sc.index, slow)
            .map_err(|e| ConfigError(format!("series.index: {e}")))?;
        SeriesSpec::new(sc.alpha, sc.start, envelope, sc.tail_tolerance)
            .map_err(|e| ConfigError(format!("series: {e}")))
    }

    pub fn envelope_spec(&self) -> Result<Option<EnvelopeSpec>, ConfigError> {
        let Some(env) = &self.envelope else { return Ok(None) };
        if env.k_min < env.start.max(1) || env.k_max < env.k_min || env.points == 0 {
            return Err(ConfigError(format!(
                "envelope k range [{}, {}] with {} points is invalid for start {}",
                env.k_min, env.k_max, env.points, env.start
            )));
        }
        Ok(Some(EnvelopeSpec {
            index: env.index,
            slow: env.slow.build()?,
            start: env.start,
            k_values: nldiff_core::decayfit::log_spaced_k(env.k_min, env.k_max, env.points),
            calibrate_at: env.calibrate_at,
            margin: env.margin,
        }))
    }

    /// Assemble the full scenario for the `solve` command.
    pub fn scenario_spec(&self) -> Result<ScenarioSpec, ConfigError> {
        let kind = ScenarioKind::parse(&self.scenario)
            .map_err(|e| ConfigError(format!("field scenario: {e}")))?;
        let kernel = require(&self.kernel, "kernel")?;
        let u0 = require(&self.u0, "u0")?;
        let fit = require(&self.fit, "fit")?;
        positive(self.removal_rate, "removal_rate")?;
        positive(fit.window[0], "fit.window[0]")?;
        positive(fit.exponent_tolerance, "fit.exponent_tolerance")?;
        if fit.ratio_cap < 1.0 {
            return Err(ConfigError(format!(
                "field fit.ratio_cap must be >= 1, got {}",
                fit.ratio_cap
            )));
        }
        Ok(ScenarioSpec {
            name: self.scenario.clone(),
            kind,
            kernel_family: kernel.family()?,
            dim: kernel.n,
            half_width: kernel.half_width,
            points_per_axis: kernel.points_per_axis,
            initial: u0.family()?,
            removal_rate: self.removal_rate,
            t_grid: self.time_points()?,
            norms: self.norm_set()?,
            window: (fit.window[0], fit.window[1]),
            exponent_tolerance: fit.exponent_tolerance,
            ratio_cap: fit.ratio_cap,
            envelope: self.envelope_spec()?,
        })
    }
}
