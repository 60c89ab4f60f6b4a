use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bvcalc::{BVFunction, RandomBv};
use crate::error::{invalid, Result};
use crate::generators::GeneratorSpec;
use crate::limits::{DEFAULT_TOLERANCE, DEFAULT_TRUNCATION_LAG};
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Verify,
    Clt,
    Boot,
    Cov,
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Verify => "verify",
            Self::Clt => "clt",
            Self::Boot => "boot",
            Self::Cov => "cov",
        })
    }
}

/// Index family `g_1, …, g_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FunctionFamily {
    /// `1_{(-∞, t]}` for each point `t`.
    Indicators { points: Vec<f64> },
    /// Random functions with `‖g‖_TV, ‖g‖_∞ ≤ t_bound`, drawn from the root seed.
    RandomBv {
        count: usize,
        #[serde(default = "default_max_knots")]
        max_knots: usize,
        t_bound: f64,
        #[serde(default)]
        piecewise_constant: bool,
    },
    /// Functions in the text format of [`BVFunction`]'s `FromStr`.
    Explicit { functions: Vec<String> },
}

fn default_max_knots() -> usize {
    6
}

impl Default for FunctionFamily {
    fn default() -> Self {
        Self::Indicators { points: vec![0.0] }
    }
}

impl FunctionFamily {
    /// Labelled members; random families depend only on `seed`.
    pub fn build(&self, seed: u64) -> Result<Vec<(String, BVFunction)>> {
        let members: Vec<(String, BVFunction)> = match self {
            Self::Indicators { points } => points
                .iter()
                .map(|&t| Ok((format!("le({t})"), BVFunction::indicator_le(t)?)))
                .collect::<Result<_>>()?,
            Self::RandomBv { count, max_knots, t_bound, piecewise_constant } => {
                if !(t_bound.is_finite() && *t_bound > 0.0) {
                    return invalid(format!("t_bound {t_bound} must be positive"));
                }
                let sampler = RandomBv {
                    max_knots: *max_knots,
                    bound: *t_bound,
                    piecewise_constant: *piecewise_constant,
                    ..RandomBv::default()
                };
                let mut rng = stream(seed, super::domain::FAMILY, 0);
                (0..*count).map(|i| (format!("g{i}"), sampler.sample(&mut rng, &[]))).collect()
            }
            Self::Explicit { functions } => functions
                .iter()
                .enumerate()
                .map(|(i, text)| Ok((format!("f{i}"), text.parse::<BVFunction>()?)))
                .collect::<Result<_>>()?,
        };
        if members.is_empty() {
            return invalid("function family is empty");
        }
        Ok(members)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifySection {
    pub ibp_pairs: usize,
    pub shared_pairs: usize,
    pub route_draws: usize,
    pub route_max_n: usize,
    pub bound_draws: usize,
    pub regularization_draws: usize,
    pub grid_draws: usize,
    pub grid_max_beta: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            ibp_pairs: 1000,
            shared_pairs: 100,
            route_draws: 1000,
            route_max_n: 200,
            bound_draws: 1000,
            regularization_draws: 500,
            grid_draws: 500,
            grid_max_beta: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapSection {
    /// Block length; `null` selects `⌈n^{1/3}⌉`.
    pub b: Option<usize>,
    pub m: Option<usize>,
    /// Bootstrap draws `B` per data replication.
    pub replications: usize,
    /// Independent draws of `Z̄_n(g)` for the two-sample comparison.
    pub mc_draws: usize,
    /// Also rerun every data replication with `b = 1`.
    pub negative_control: bool,
}

impl Default for BootstrapSection {
    fn default() -> Self {
        Self { b: None, m: None, replications: 500, mc_draws: 2000, negative_control: true }
    }
}

/// Decay of the moduli along a δ-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuliSection {
    #[serde(default = "default_moduli_n")]
    pub n: usize,
    #[serde(default = "default_moduli_paths")]
    pub paths: usize,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    /// Generator with an atomic marginal for the `𝕘_{√δ}·√δ` check.
    #[serde(default)]
    pub atomic_generator: Option<GeneratorSpec>,
}

fn default_moduli_n() -> usize {
    5000
}

fn default_moduli_paths() -> usize {
    200
}

fn default_deltas() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.02]
}

/// Pass/fail thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub ibp_residual: f64,
    pub route_error: f64,
    pub variance_rel: f64,
    pub ks_normal: f64,
    pub boot_variance_rel: f64,
    pub boot_ks: f64,
    pub cov_se_multiple: f64,
    pub psd_floor: f64,
    /// Nominal level of the percentile intervals (coverage is reported, not judged).
    pub coverage_level: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            ibp_residual: 1e-10,
            route_error: 1e-10,
            variance_rel: 0.05,
            ks_normal: 0.05,
            boot_variance_rel: 0.10,
            boot_ks: 0.10,
            cov_se_multiple: 3.0,
            psd_floor: -1e-8,
            coverage_level: 0.90,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputPaths {
    pub dir: Option<String>,
}

fn default_truncation_lag() -> usize {
    DEFAULT_TRUNCATION_LAG
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,
    /// Overrides the generator's own `n`.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub family: FunctionFamily,
    /// `R`; for `verify` it caps every suite's draw count.
    #[serde(default)]
    pub replications: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_truncation_lag")]
    pub truncation_lag: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub bootstrap: BootstrapSection,
    #[serde(default)]
    pub moduli: Option<ModuliSection>,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub output: OutputPaths,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            generator: None,
            n: None,
            family: FunctionFamily::default(),
            replications: None,
            seed: 0,
            truncation_lag: DEFAULT_TRUNCATION_LAG,
            tolerance: DEFAULT_TOLERANCE,
            bootstrap: BootstrapSection::default(),
            moduli: None,
            verify: VerifySection::default(),
            thresholds: Thresholds::default(),
            output: OutputPaths::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| crate::Error::Parse(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form, output paths excluded.
    pub fn config_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = OutputPaths::default();
        let text = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    /// The generator with the `n` override applied.
    pub fn data_spec(&self) -> Result<GeneratorSpec> {
        let Some(spec) = &self.generator else {
            return invalid(format!("{} experiments need a generator", self.experiment));
        };
        let spec = match self.n {
            Some(n) => spec.with_n(n),
            None => spec.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `R` for the Monte Carlo experiments.
    pub fn monte_carlo_replications(&self) -> Result<usize> {
        match self.replications {
            Some(r) if r >= 1 => Ok(r),
            Some(_) => invalid("replications must be at least 1"),
            None => invalid(format!("{} experiments need replications", self.experiment)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return invalid("tolerance must be positive");
        }
        self.family.build(self.seed)?;
        if self.experiment == ExperimentKind::Verify {
            let v = &self.verify;
            if v.shared_pairs > v.ibp_pairs {
                return invalid("shared_pairs exceeds ibp_pairs");
            }
            if v.route_max_n == 0 {
                return invalid("route_max_n must be positive");
            }
            if !(v.grid_max_beta > 0.0 && v.grid_max_beta < 1.0) {
                return invalid("grid_max_beta must lie in (0, 1)");
            }
            return Ok(());
        }
        self.data_spec()?;
        self.monte_carlo_replications()?;
        if self.experiment == ExperimentKind::Boot {
            let n = self.data_spec()?.n;
            crate::bootstrap::BlockBootstrapConfig { block_length: self.bootstrap.b, resample_size: self.bootstrap.m, seed: 0 }
                .resolve(n)?;
            if self.bootstrap.replications < 2 || self.bootstrap.mc_draws < 1 {
                return invalid("bootstrap needs replications ≥ 2 and mc_draws ≥ 1");
            }
        }
        if let Some(m) = &self.moduli {
            if m.n == 0 || m.paths == 0 {
                return invalid("moduli section needs positive n and paths");
            }
            if m.deltas.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
                return invalid("moduli deltas must lie in (0, 1)");
            }
            if let Some(g) = &m.atomic_generator {
                g.validate()?;
            }
        }
        Ok(())
    }
}
