//! Experiment configuration: JSON schema, parsing and validation.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thinlab_core::geometry::ProfileParams;
use thinlab_core::{CoefficientSpec, ProfileDescriptor, ProfileKind, Smooth1d};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ShrinkStudy,
    BarrierReport,
    AsymptoticStudy,
    TransformAudit,
    WeightedStudy,
    MmsConvergence,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ShrinkStudy => "shrink_study",
            ExperimentKind::BarrierReport => "barrier_report",
            ExperimentKind::AsymptoticStudy => "asymptotic_study",
            ExperimentKind::TransformAudit => "transform_audit",
            ExperimentKind::WeightedStudy => "weighted_study",
            ExperimentKind::MmsConvergence => "mms_convergence",
        }
    }
}

/// One-variable data, e.g. `{"cosine": {"amp": 1, "freq": 1}}` for `cos(pi x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant(f64),
    /// coefficients `[c0, c1, ...]` in `x`
    Polynomial(Vec<f64>),
    Cosine {
        amp: f64,
        freq: f64,
    },
    Sine {
        amp: f64,
        freq: f64,
    },
    TrigSeries {
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    HolderCusps {
        centers: Vec<f64>,
        gamma: f64,
    },
    /// trig series with coefficients drawn from the config seed, decaying like `1/(1+k)`
    RandomTrig {
        terms: usize,
    },
}

impl FunctionSpec {
    pub fn build(&self, seed: u64) -> Smooth1d {
        match self {
            FunctionSpec::Constant(c) => Smooth1d::constant(*c),
            FunctionSpec::Polynomial(c) => Smooth1d::polynomial(c.clone()),
            FunctionSpec::Cosine { amp, freq } => Smooth1d::cosine(*amp, *freq),
            FunctionSpec::Sine { amp, freq } => Smooth1d::sine(*amp, *freq),
            FunctionSpec::TrigSeries { cos, sin } => {
                Smooth1d::trig_series(cos.clone(), sin.clone())
            }
            FunctionSpec::HolderCusps { centers, gamma } => {
                Smooth1d::holder_cusps(centers.clone(), *gamma)
            }
            FunctionSpec::RandomTrig { terms } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let c: Vec<f64> = (0..*terms)
                    .map(|k| rng.gen_range(-1.0..1.0) / (1.0 + k as f64))
                    .collect();
                let s: Vec<f64> = (0..*terms)
                    .map(|k| rng.gen_range(-1.0..1.0) / (1.0 + k as f64))
                    .collect();
                Smooth1d::trig_series(c, s)
            }
        }
    }
}

/// Profile shape without its amplitude; member `n` of the family has
/// amplitude `amplitude_scale * sigmas[n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFamily {
    pub kind: ProfileKind,
    #[serde(default)]
    pub params: ProfileParams,
    #[serde(default = "half")]
    pub gamma: f64,
    #[serde(default = "one")]
    pub amplitude_scale: f64,
}

impl ProfileFamily {
    pub fn descriptor(&self, sigma: f64) -> ProfileDescriptor {
        ProfileDescriptor {
            kind: self.kind,
            amplitude: self.amplitude_scale * sigma,
            params: self.params.clone(),
            gamma: self.gamma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    #[serde(default = "CoefficientSpec::laplace")]
    pub coefficients: CoefficientSpec,
    pub profile: ProfileFamily,
    pub sigmas: Vec<f64>,
    #[serde(default = "default_phi")]
    pub phi: FunctionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<FunctionSpec>,
    /// replaces the oblique condition on `y = 0` by `u = g`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_dirichlet: Option<FunctionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_nx")]
    pub nx: usize,
    #[serde(default = "default_ny")]
    pub ny: usize,
    /// when set, `nx = max(nx, ceil(nx_per_sigma / sigma))`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nx_per_sigma: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            nx: default_nx(),
            ny: default_ny(),
            nx_per_sigma: None,
        }
    }
}

impl GridConfig {
    pub fn nx_for(&self, sigma: f64) -> usize {
        match self.nx_per_sigma {
            Some(k) => self.nx.max((k / sigma).ceil() as usize),
            None => self.nx,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// bound on max/min of a family quantity
    #[serde(default = "two")]
    pub ratio_max: f64,
    #[serde(default = "order_min")]
    pub order_min: f64,
    #[serde(default = "order_max")]
    pub order_max: f64,
    /// fitted deviation slope must reach `gamma - slope_margin`
    #[serde(default = "slope_margin")]
    pub slope_margin: f64,
    #[serde(default = "halving_ratio")]
    pub halving_ratio: f64,
    #[serde(default = "embed_constant")]
    pub embed_constant: f64,
    #[serde(default = "round_trip")]
    pub round_trip: f64,
    #[serde(default = "chain_rule")]
    pub chain_rule: f64,
    /// shrink study: require growth last/first >= this instead of a bounded ratio
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_growth: Option<f64>,
    /// smallness threshold on the profile norm; violations are warnings
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ratio_max: two(),
            order_min: order_min(),
            order_max: order_max(),
            slope_margin: slope_margin(),
            halving_ratio: halving_ratio(),
            embed_constant: embed_constant(),
            round_trip: round_trip(),
            chain_rule: chain_rule(),
            expect_growth: None,
            sigma0: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierConfig {
    #[serde(default = "default_x0")]
    pub x0: Vec<f64>,
    /// weight exponent for the weighted barrier
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default = "default_nr")]
    pub nr: usize,
    #[serde(default = "default_ntheta")]
    pub ntheta: usize,
    #[serde(default = "yes")]
    pub margins: bool,
    /// solve the problem and report the comparison window constants
    #[serde(default)]
    pub comparison: bool,
}

impl Default for BarrierConfig {
    fn default() -> Self {
        Self {
            x0: default_x0(),
            m: None,
            nr: default_nr(),
            ntheta: default_ntheta(),
            margins: true,
            comparison: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapName {
    P1,
    P2,
    P3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformConfig {
    #[serde(default = "default_pipeline")]
    pub pipeline: Vec<MapName>,
    #[serde(default = "embed_constant")]
    pub c_bar: f64,
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self {
            pipeline: default_pipeline(),
            c_bar: embed_constant(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub problem: Problem,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub barrier: BarrierConfig,
    #[serde(default)]
    pub transform: TransformConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// also write `solution_NN.csv` for every solve
    #[serde(default)]
    pub dump_solutions: bool,
}

fn half() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn yes() -> bool {
    true
}
fn order_min() -> f64 {
    1.8
}
fn order_max() -> f64 {
    2.2
}
fn slope_margin() -> f64 {
    0.1
}
fn halving_ratio() -> f64 {
    1.5
}
fn embed_constant() -> f64 {
    10.0
}
fn round_trip() -> f64 {
    1e-9
}
fn chain_rule() -> f64 {
    1e-8
}
fn default_nx() -> usize {
    128
}
fn default_ny() -> usize {
    32
}
fn default_nr() -> usize {
    256
}
fn default_ntheta() -> usize {
    64
}
fn default_x0() -> Vec<f64> {
    vec![0.1, 0.3, 0.5, 0.65]
}
fn default_pipeline() -> Vec<MapName> {
    vec![MapName::P1, MapName::P2]
}
fn default_phi() -> FunctionSpec {
    FunctionSpec::Cosine {
        amp: 1.0,
        freq: 1.0,
    }
}

fn bad(key: &str, msg: impl Into<String>) -> CliError {
    CliError::Config {
        key: key.into(),
        msg: msg.into(),
    }
}

impl ExperimentConfig {
    /// Parses and validates; errors name the offending key.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            bad(
                if key == "." { "<root>" } else { &key },
                e.into_inner().to_string(),
            )
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let s = &self.problem.sigmas;
        if s.is_empty() {
            return Err(bad("problem.sigmas", "must not be empty"));
        }
        if let Some(i) = s.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(bad(
                &format!("problem.sigmas[{i}]"),
                format!("must be positive, got {}", s[i]),
            ));
        }
        if let Some(i) = s.windows(2).position(|w| w[1] >= w[0]) {
            return Err(bad(
                "problem.sigmas",
                format!(
                    "must be strictly decreasing ({} then {} at index {})",
                    s[i],
                    s[i + 1],
                    i + 1
                ),
            ));
        }
        let g = self.problem.profile.gamma;
        if !(g > 0.0 && g < 1.0) {
            return Err(bad(
                "problem.profile.gamma",
                format!("must lie in (0, 1), got {g}"),
            ));
        }
        if self.problem.profile.amplitude_scale.is_nan()
            || self.problem.profile.amplitude_scale <= 0.0
        {
            return Err(bad("problem.profile.amplitude_scale", "must be positive"));
        }
        if self.grid.nx < 8 {
            return Err(bad(
                "grid.nx",
                format!("need at least 8 columns, got {}", self.grid.nx),
            ));
        }
        if self.grid.ny < 8 {
            return Err(bad(
                "grid.ny",
                format!("need at least 8 rows, got {}", self.grid.ny),
            ));
        }
        if let Some(k) = self.grid.nx_per_sigma {
            if k.is_nan() || k <= 0.0 {
                return Err(bad("grid.nx_per_sigma", "must be positive"));
            }
        }
        if let Some(i) = self.barrier.x0.iter().position(|x| !(*x > 0.0 && *x < 1.0)) {
            return Err(bad(&format!("barrier.x0[{i}]"), "must lie in (0, 1)"));
        }
        if self.kind == ExperimentKind::BarrierReport && self.barrier.x0.is_empty() {
            return Err(bad("barrier.x0", "must not be empty"));
        }
        if self.kind == ExperimentKind::TransformAudit && self.transform.pipeline.is_empty() {
            return Err(bad("transform.pipeline", "must not be empty"));
        }
        if let FunctionSpec::RandomTrig { terms: 0 } = self.problem.phi {
            return Err(bad("problem.phi.random_trig.terms", "must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(sigmas: &str) -> String {
        format!(
            r#"{{"kind":"shrink_study","problem":{{"profile":{{"kind":"sine"}},"sigmas":{sigmas}}}}}"#
        )
    }

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(&minimal("[0.08, 0.04]")).unwrap();
        assert_eq!(c.grid.nx, 128);
        assert_eq!(
            c.problem.phi,
            FunctionSpec::Cosine {
                amp: 1.0,
                freq: 1.0
            }
        );
        assert_eq!(c.problem.profile.descriptor(0.04).amplitude, 0.04);
        assert_eq!(c.tolerances.ratio_max, 2.0);
    }

    #[test]
    fn increasing_sigmas_name_the_key() {
        let e = ExperimentConfig::from_json(&minimal("[0.01, 0.02]")).unwrap_err();
        assert!(
            matches!(&e, CliError::Config { key, .. } if key == "problem.sigmas"),
            "{e}"
        );
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn unknown_fields_name_the_path() {
        let text = r#"{"kind":"shrink_study","problem":{"profile":{"kind":"sine","colour":1},"sigmas":[0.1]}}"#;
        let e = ExperimentConfig::from_json(text).unwrap_err();
        assert!(e.to_string().contains("problem.profile"), "{e}");
    }

    #[test]
    fn random_trig_is_seeded() {
        let f = FunctionSpec::RandomTrig { terms: 4 };
        assert_eq!(f.build(3).value(0.37), f.build(3).value(0.37));
        assert_ne!(f.build(3).value(0.37), f.build(4).value(0.37));
    }

    #[test]
    fn grid_scales_with_sigma() {
        let g = GridConfig {
            nx: 64,
            ny: 16,
            nx_per_sigma: Some(26.0),
        };
        assert_eq!(g.nx_for(0.08), 325);
        assert_eq!(g.nx_for(1.0), 64);
    }
}
