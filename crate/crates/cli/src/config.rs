//! Experiment configuration: defaults per figure, file parsing, flag
//! overrides and validation.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{CliError, CliResult};

/// The figure pipelines plus `custom`, which routes a fully specified
/// parameter set through one of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Custom,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Fig1,
        Experiment::Fig2,
        Experiment::Fig3,
        Experiment::Fig4,
        Experiment::Fig5,
        Experiment::Fig6,
        Experiment::Fig7,
        Experiment::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig1 => "fig1",
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Fig5 => "fig5",
            Experiment::Fig6 => "fig6",
            Experiment::Fig7 => "fig7",
            Experiment::Custom => "custom",
        }
    }

    /// Parameters read by this pipeline, in header order.
    pub fn fields(self) -> &'static [Field] {
        use Field::*;
        match self {
            Experiment::Fig1 => &[OmegaOverGamma, Phi, RSteps, ThetaSteps],
            Experiment::Fig2 => &[DeltaOverGamma, OmegaOverGamma, R, Theta, Phi, TMax, Steps],
            Experiment::Fig3 | Experiment::Fig4 | Experiment::Fig5 => {
                &[N, K, P, J, JzOverJ, GammaAnis, H, TMax, Steps]
            }
            Experiment::Fig6 | Experiment::Fig7 => &[DeltaOverGamma, OmegaOverGamma, Theta, Phi, RSteps, FdStep],
            Experiment::Custom => &[],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown experiment `{s}`")))
    }
}

/// Names of the flat parameter namespace shared by files, flags and headers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    DeltaOverGamma,
    OmegaOverGamma,
    R,
    Theta,
    Phi,
    N,
    K,
    P,
    J,
    JzOverJ,
    GammaAnis,
    H,
    TMax,
    Steps,
    RSteps,
    ThetaSteps,
    FdStep,
}

impl Field {
    pub const ALL: [Field; 17] = [
        Field::DeltaOverGamma,
        Field::OmegaOverGamma,
        Field::R,
        Field::Theta,
        Field::Phi,
        Field::N,
        Field::K,
        Field::P,
        Field::J,
        Field::JzOverJ,
        Field::GammaAnis,
        Field::H,
        Field::TMax,
        Field::Steps,
        Field::RSteps,
        Field::ThetaSteps,
        Field::FdStep,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Field::DeltaOverGamma => "delta_over_gamma",
            Field::OmegaOverGamma => "omega_over_gamma",
            Field::R => "r",
            Field::Theta => "theta",
            Field::Phi => "phi",
            Field::N => "n",
            Field::K => "k",
            Field::P => "p",
            Field::J => "j",
            Field::JzOverJ => "jz_over_j",
            Field::GammaAnis => "gamma_anis",
            Field::H => "h",
            Field::TMax => "t_max",
            Field::Steps => "steps",
            Field::RSteps => "r_steps",
            Field::ThetaSteps => "theta_steps",
            Field::FdStep => "fd_step",
        }
    }
}

/// Accepts either a single value or an array.
#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(de: D) -> Result<Option<Vec<T>>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(Option::<OneOrMany<T>>::deserialize(de)?.map(|v| match v {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(xs) => xs,
    }))
}

/// Partially specified parameters, as read from a file or from flags.
///
/// Serialises to the JSON object written in CSV headers; only populated
/// fields appear.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<Experiment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_over_gamma: Option<f64>,
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    pub omega_over_gamma: Option<Vec<f64>>,
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<usize>>,
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jz_over_j: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_anis: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
}

impl Params {
    /// Reads a TOML file, or JSON when the extension is `.json`.
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("TOML config: {e}")))
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("JSON config: {e}")))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overridden_by(self, other: Params) -> Params {
        Params {
            pipeline: other.pipeline.or(self.pipeline),
            delta_over_gamma: other.delta_over_gamma.or(self.delta_over_gamma),
            omega_over_gamma: other.omega_over_gamma.or(self.omega_over_gamma),
            r: other.r.or(self.r),
            theta: other.theta.or(self.theta),
            phi: other.phi.or(self.phi),
            n: other.n.or(self.n),
            k: other.k.or(self.k),
            p: other.p.or(self.p),
            j: other.j.or(self.j),
            jz_over_j: other.jz_over_j.or(self.jz_over_j),
            gamma_anis: other.gamma_anis.or(self.gamma_anis),
            h: other.h.or(self.h),
            t_max: other.t_max.or(self.t_max),
            steps: other.steps.or(self.steps),
            r_steps: other.r_steps.or(self.r_steps),
            theta_steps: other.theta_steps.or(self.theta_steps),
            fd_step: other.fd_step.or(self.fd_step),
        }
    }

    fn is_set(&self, f: Field) -> bool {
        match f {
            Field::DeltaOverGamma => self.delta_over_gamma.is_some(),
            Field::OmegaOverGamma => self.omega_over_gamma.is_some(),
            Field::R => self.r.is_some(),
            Field::Theta => self.theta.is_some(),
            Field::Phi => self.phi.is_some(),
            Field::N => self.n.is_some(),
            Field::K => self.k.is_some(),
            Field::P => self.p.is_some(),
            Field::J => self.j.is_some(),
            Field::JzOverJ => self.jz_over_j.is_some(),
            Field::GammaAnis => self.gamma_anis.is_some(),
            Field::H => self.h.is_some(),
            Field::TMax => self.t_max.is_some(),
            Field::Steps => self.steps.is_some(),
            Field::RSteps => self.r_steps.is_some(),
            Field::ThetaSteps => self.theta_steps.is_some(),
            Field::FdStep => self.fd_step.is_some(),
        }
    }

    /// Copies field `f` from `src`.
    fn take(&mut self, src: &Params, f: Field) {
        match f {
            Field::DeltaOverGamma => self.delta_over_gamma = src.delta_over_gamma,
            Field::OmegaOverGamma => self.omega_over_gamma.clone_from(&src.omega_over_gamma),
            Field::R => self.r.clone_from(&src.r),
            Field::Theta => self.theta.clone_from(&src.theta),
            Field::Phi => self.phi = src.phi,
            Field::N => self.n = src.n,
            Field::K => self.k.clone_from(&src.k),
            Field::P => self.p.clone_from(&src.p),
            Field::J => self.j = src.j,
            Field::JzOverJ => self.jz_over_j = src.jz_over_j,
            Field::GammaAnis => self.gamma_anis = src.gamma_anis,
            Field::H => self.h = src.h,
            Field::TMax => self.t_max = src.t_max,
            Field::Steps => self.steps = src.steps,
            Field::RSteps => self.r_steps = src.r_steps,
            Field::ThetaSteps => self.theta_steps = src.theta_steps,
            Field::FdStep => self.fd_step = src.fd_step,
        }
    }
}

/// Default parameters of each figure pipeline.
pub fn figure_defaults(e: Experiment) -> Params {
    let mut d = Params {
        pipeline: Some(e),
        delta_over_gamma: Some(0.5),
        phi: Some(FRAC_PI_4),
        r_steps: Some(101),
        theta_steps: Some(101),
        fd_step: Some(1e-4),
        t_max: Some(0.2),
        steps: Some(400),
        n: Some(8),
        j: Some(1.0),
        jz_over_j: Some(0.5),
        gamma_anis: Some(0.75),
        h: Some(0.0),
        ..Params::default()
    };
    match e {
        Experiment::Fig1 | Experiment::Fig2 | Experiment::Fig7 => {
            d.omega_over_gamma = Some(vec![0.1, 1.0, 10.0]);
        }
        Experiment::Fig6 => d.omega_over_gamma = Some(vec![0.1]),
        _ => {}
    }
    match e {
        Experiment::Fig2 => {
            d.r = Some(vec![0.25]);
            d.theta = Some(vec![FRAC_PI_4, 3.0 * FRAC_PI_4]);
        }
        Experiment::Fig6 | Experiment::Fig7 => d.theta = Some(vec![3.0 * FRAC_PI_4]),
        Experiment::Fig3 | Experiment::Fig4 => {
            d.k = Some((2..=7).collect());
            d.p = Some(vec![0.5]);
        }
        Experiment::Fig5 => {
            d.k = Some(vec![5]);
            d.p = Some(vec![0.25, 0.5, 0.75, 1.0]);
        }
        _ => {}
    }
    d
}

/// A fully resolved configuration for one pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// The pipeline that runs; never `Custom`.
    pub pipeline: Experiment,
    pub delta_over_gamma: f64,
    pub omega_over_gamma: Vec<f64>,
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    pub phi: f64,
    pub n: usize,
    pub k: Vec<usize>,
    pub p: Vec<f64>,
    pub j: f64,
    pub jz_over_j: f64,
    pub gamma_anis: f64,
    pub h: f64,
    pub t_max: f64,
    pub steps: usize,
    pub r_steps: usize,
    pub theta_steps: usize,
    pub fd_step: f64,
    /// The parameters the pipeline reads, as recorded in the CSV header.
    resolved: Params,
}

impl ExperimentConfig {
    /// Default configuration of a figure.
    pub fn figure(e: Experiment) -> CliResult<Self> {
        Self::resolve(e, Params::default())
    }

    /// Fills unset fields from the figure defaults. For `custom`, `pipeline`
    /// and every parameter that pipeline reads must be given.
    pub fn resolve(experiment: Experiment, given: Params) -> CliResult<Self> {
        let pipeline = match (experiment, given.pipeline) {
            (Experiment::Custom, None) => return Err(CliError::MissingField("pipeline")),
            (Experiment::Custom, Some(Experiment::Custom)) => {
                return Err(CliError::Config("`pipeline` must name a figure pipeline".into()))
            }
            (Experiment::Custom, Some(p)) => p,
            (e, None) => e,
            (e, Some(p)) if p == e => e,
            (e, Some(p)) => {
                return Err(CliError::Config(format!(
                    "`pipeline = {p}` conflicts with experiment `{e}`"
                )))
            }
        };
        let fields = pipeline.fields();
        for f in Field::ALL {
            if given.is_set(f) && !fields.contains(&f) {
                return Err(CliError::Config(format!("field `{}` does not apply to {pipeline}", f.key())));
            }
        }
        let defaults = figure_defaults(pipeline);
        let mut resolved = Params {
            pipeline: Some(pipeline),
            ..Params::default()
        };
        for &f in fields {
            if given.is_set(f) {
                resolved.take(&given, f);
            } else if experiment == Experiment::Custom {
                return Err(CliError::MissingField(f.key()));
            } else {
                resolved.take(&defaults, f);
            }
        }
        // Every field is concrete; those the pipeline ignores keep the
        // figure defaults and stay out of the header.
        let full = defaults.overridden_by(resolved.clone());
        let cfg = ExperimentConfig {
            pipeline,
            delta_over_gamma: full.delta_over_gamma.unwrap_or(0.5),
            omega_over_gamma: full.omega_over_gamma.unwrap_or_default(),
            r: full.r.unwrap_or_default(),
            theta: full.theta.unwrap_or_default(),
            phi: full.phi.unwrap_or(FRAC_PI_4),
            n: full.n.unwrap_or(8),
            k: full.k.unwrap_or_default(),
            p: full.p.unwrap_or_default(),
            j: full.j.unwrap_or(1.0),
            jz_over_j: full.jz_over_j.unwrap_or(0.5),
            gamma_anis: full.gamma_anis.unwrap_or(0.75),
            h: full.h.unwrap_or(0.0),
            t_max: full.t_max.unwrap_or(0.2),
            steps: full.steps.unwrap_or(400),
            r_steps: full.r_steps.unwrap_or(101),
            theta_steps: full.theta_steps.unwrap_or(101),
            fd_step: full.fd_step.unwrap_or(1e-4),
            resolved,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The header record: the resolved parameters as one JSON object.
    pub fn header_json(&self) -> String {
        serde_json::to_string(&self.resolved).expect("plain numeric parameters always serialise")
    }

    fn validate(&self) -> CliResult<()> {
        let fields = self.pipeline.fields();
        let uses = |f: Field| fields.contains(&f);
        let bad = |key: &str, why: &str| Err(CliError::Config(format!("field `{key}`: {why}")));

        if uses(Field::DeltaOverGamma) && !self.delta_over_gamma.is_finite() {
            return bad("delta_over_gamma", "must be finite");
        }
        if uses(Field::OmegaOverGamma)
            && (self.omega_over_gamma.is_empty() || !self.omega_over_gamma.iter().all(|&w| w.is_finite() && w >= 0.0))
        {
            return bad("omega_over_gamma", "needs at least one finite value >= 0");
        }
        if uses(Field::R) && (self.r.is_empty() || !self.r.iter().all(|r| (0.0..=1.0).contains(r))) {
            return bad("r", "needs at least one value in [0, 1]");
        }
        if uses(Field::Theta) && (self.theta.is_empty() || !self.theta.iter().all(|t| (0.0..=PI).contains(t))) {
            return bad("theta", "needs at least one value in [0, pi]");
        }
        if uses(Field::Phi) && !self.phi.is_finite() {
            return bad("phi", "must be finite");
        }
        if uses(Field::N) && !(3..=10).contains(&self.n) {
            return bad("n", "must lie in 3..=10");
        }
        if uses(Field::K) && (self.k.is_empty() || !self.k.iter().all(|&k| k >= 2 && k < self.n)) {
            return bad("k", "needs at least one value with 2 <= k < n");
        }
        if uses(Field::P) && (self.p.is_empty() || !self.p.iter().all(|p| (0.0..=1.0).contains(p))) {
            return bad("p", "needs at least one value in [0, 1]");
        }
        if uses(Field::J) && !(self.j.is_finite() && self.j > 0.0) {
            return bad("j", "must be finite and positive");
        }
        if uses(Field::JzOverJ) && !self.jz_over_j.is_finite() {
            return bad("jz_over_j", "must be finite");
        }
        if uses(Field::GammaAnis) && !(-1.0..=1.0).contains(&self.gamma_anis) {
            return bad("gamma_anis", "must lie in [-1, 1]");
        }
        if uses(Field::H) && !self.h.is_finite() {
            return bad("h", "must be finite");
        }
        if uses(Field::TMax) && !(self.t_max.is_finite() && self.t_max > 0.0) {
            return bad("t_max", "must be finite and positive");
        }
        if uses(Field::Steps) && self.steps < 2 {
            return bad("steps", "must be at least 2");
        }
        if uses(Field::RSteps) && self.r_steps < 2 {
            return bad("r_steps", "must be at least 2");
        }
        if self.pipeline == Experiment::Fig1 && (self.r_steps < 16 || self.theta_steps < 16) {
            return bad("r_steps/theta_steps", "the mesh must be at least 16x16");
        }
        if uses(Field::FdStep) && !(self.fd_step.is_finite() && self.fd_step > 0.0) {
            return bad("fd_step", "must be finite and positive");
        }
        Ok(())
    }
}
