//! Command configurations. Each is read from an optional JSON file on top of
//! built-in defaults; command-line flags are applied last.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use specreg::filters::FilterKind;
use specreg::kernels::KernelChoice;
use specreg::simlab::{BoundCase, LambdaRule, RateMethod, Target};
use specreg::spectrum::Schedule;

use crate::CliError;

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn field(name: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("invalid `{name}`: {reason}"))
}

/// `count` evenly spaced values from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn validate(&self, name: &str) -> Result<(), CliError> {
        if self.count == 0 {
            return Err(field(name, "grid is empty"));
        }
        if !(self.min > 0.0 && self.max >= self.min && self.max.is_finite()) {
            return Err(field(name, format!("need 0 < min ≤ max, got [{}, {}]", self.min, self.max)));
        }
        if self.count == 1 && self.min != self.max {
            return Err(field(name, "a single-point grid needs min = max"));
        }
        Ok(())
    }

    pub fn linear(&self) -> Vec<f64> {
        specreg::filters::linear_grid(self.min, self.max, self.count)
    }

    pub fn logarithmic(&self) -> Vec<f64> {
        specreg::filters::log_grid(self.min, self.max, self.count)
    }
}

fn default_filters() -> Vec<FilterKind> {
    vec![FilterKind::Ridge, FilterKind::Cutoff]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReproduceConfig {
    pub domain_size: usize,
    pub n: usize,
    pub n_validation: Option<usize>,
    pub marginal_exponent: f64,
    pub sigma_sq: f64,
    pub target: Target,
    pub lambdas: GridSpec,
    pub kernel: KernelChoice,
    pub filters: Vec<FilterKind>,
    pub replicates: usize,
    pub seed: u64,
    pub force_dense: bool,
}

impl Default for ReproduceConfig {
    fn default() -> Self {
        Self {
            domain_size: 1 << 13,
            n: 1 << 13,
            n_validation: None,
            marginal_exponent: 0.5,
            sigma_sq: 0.25,
            target: Target::Indicators { count: 5 },
            lambdas: GridSpec {
                min: 1e-5,
                max: 0.02,
                count: 1 << 10,
            },
            kernel: KernelChoice::Discrete,
            filters: default_filters(),
            replicates: 5,
            seed: 0,
            force_dense: false,
        }
    }
}

impl ReproduceConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.replicates == 0 {
            return Err(field("replicates", "must be at least 1"));
        }
        if self.domain_size == 0 {
            return Err(field("domain_size", "must be at least 1"));
        }
        if self.n == 0 {
            return Err(field("n", "must be at least 1"));
        }
        if !(self.sigma_sq >= 0.0 && self.sigma_sq.is_finite()) {
            return Err(field("sigma_sq", format!("must be nonnegative, got {}", self.sigma_sq)));
        }
        if self.filters.is_empty() {
            return Err(field("filters", "need at least one filter"));
        }
        self.lambdas.validate("lambdas")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RateMode {
    /// Indicator target, both filters on the polynomial schedule.
    Polynomial,
    /// Rank-5 target: cut-off at `(1 − r)t_J²` against ridge on its schedule.
    FiniteRank,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesConfig {
    pub mode: RateMode,
    pub domain_size: usize,
    pub marginal_exponent: f64,
    pub sigma_sq: f64,
    /// Defaults to the mode's target when absent.
    pub target: Option<Target>,
    pub ladder: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub c_prime: f64,
    pub rank: usize,
    pub r: f64,
    /// Overrides the mode's default method list.
    pub methods: Option<Vec<RateMethod>>,
}

impl Default for RatesConfig {
    fn default() -> Self {
        Self {
            mode: RateMode::Polynomial,
            domain_size: 1 << 14,
            marginal_exponent: 2.0,
            sigma_sq: 0.25,
            target: None,
            ladder: (8..=12).map(|k| 1usize << k).collect(),
            replicates: 20,
            seed: 0,
            c_prime: 1.0,
            rank: 5,
            r: 0.5,
            methods: None,
        }
    }
}

impl RatesConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.replicates == 0 {
            return Err(field("replicates", "must be at least 1"));
        }
        if self.ladder.len() < 3 {
            return Err(field("ladder", format!("need ≥ 3 ladder points, got {}", self.ladder.len())));
        }
        if !(self.sigma_sq >= 0.0 && self.sigma_sq.is_finite()) {
            return Err(field("sigma_sq", format!("must be nonnegative, got {}", self.sigma_sq)));
        }
        if !(self.marginal_exponent > 0.0) {
            return Err(field("marginal_exponent", "rate schedules need a > 0"));
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(field("r", format!("must lie in (0, 1), got {}", self.r)));
        }
        Ok(())
    }

    pub fn resolved_target(&self) -> Target {
        self.target.clone().unwrap_or(match self.mode {
            RateMode::Polynomial => Target::Indicators { count: 1 },
            RateMode::FiniteRank => Target::Indicators { count: self.rank },
        })
    }

    /// Polynomial decay exponent `ν` with `t_j² ∝ j^{−2ν}`: `ν = a/2`.
    pub fn nu(&self) -> f64 {
        self.marginal_exponent / 2.0
    }

    pub fn resolved_methods(&self) -> Vec<RateMethod> {
        if let Some(m) = &self.methods {
            return m.clone();
        }
        let schedule = Schedule::Polynomial {
            nu: self.nu(),
            c_prime: self.c_prime,
        };
        match self.mode {
            RateMode::Polynomial => vec![
                RateMethod {
                    name: "krr".into(),
                    filter: FilterKind::Ridge,
                    rule: LambdaRule::Schedule { schedule, zeta: 0.0 },
                },
                RateMethod {
                    name: "kpcr".into(),
                    filter: FilterKind::Cutoff,
                    rule: LambdaRule::Schedule { schedule, zeta: 0.0 },
                },
            ],
            RateMode::FiniteRank => vec![
                RateMethod {
                    name: "kpcr".into(),
                    filter: FilterKind::Cutoff,
                    rule: LambdaRule::FiniteRank {
                        rank: self.rank,
                        r: self.r,
                    },
                },
                // The target is infinitely smooth, but ridge only exploits
                // smoothness up to its qualification: ζ = 1.
                RateMethod {
                    name: "krr".into(),
                    filter: FilterKind::Ridge,
                    rule: LambdaRule::Schedule { schedule, zeta: 1.0 },
                },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub domain_sizes: Vec<usize>,
    pub marginal_exponents: Vec<f64>,
    pub sigma_sqs: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub filters: Vec<FilterKind>,
    pub n: usize,
    pub zeta: f64,
    pub delta: f64,
    pub target: Target,
    pub replicates: usize,
    pub seed: u64,
    /// Explicit cases replace the sweep above when given.
    pub cases: Option<Vec<BoundCase>>,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            domain_sizes: vec![64, 256],
            marginal_exponents: vec![1.0, 2.0],
            sigma_sqs: vec![0.01, 0.25],
            lambdas: vec![0.005, 0.02, 0.1, 0.5],
            filters: default_filters(),
            n: 500,
            zeta: 0.0,
            delta: 0.0,
            target: Target::Indicators { count: 1 },
            replicates: 200,
            seed: 0,
            cases: None,
        }
    }
}

impl BoundsConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.replicates < 2 {
            return Err(field("replicates", "need at least 2 for a standard error"));
        }
        if self.cases.as_ref().is_some_and(Vec::is_empty) {
            return Err(field("cases", "empty case list"));
        }
        if self.cases.is_none() {
            for (name, empty) in [
                ("domain_sizes", self.domain_sizes.is_empty()),
                ("marginal_exponents", self.marginal_exponents.is_empty()),
                ("sigma_sqs", self.sigma_sqs.is_empty()),
                ("lambdas", self.lambdas.is_empty()),
                ("filters", self.filters.is_empty()),
            ] {
                if empty {
                    return Err(field(name, "grid is empty"));
                }
            }
        }
        if self.n == 0 {
            return Err(field("n", "must be at least 1"));
        }
        Ok(())
    }

    pub fn resolved_cases(&self) -> Vec<BoundCase> {
        if let Some(c) = &self.cases {
            return c.clone();
        }
        let mut out = Vec::new();
        for &domain_size in &self.domain_sizes {
            for &marginal_exponent in &self.marginal_exponents {
                for &sigma_sq in &self.sigma_sqs {
                    for &lambda in &self.lambdas {
                        for &filter in &self.filters {
                            out.push(BoundCase {
                                domain_size,
                                marginal_exponent,
                                target: self.target.clone(),
                                sigma_sq,
                                lambda,
                                n: self.n,
                                zeta: self.zeta,
                                delta: self.delta,
                                filter,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// Finite model for concentration trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureModel {
    /// Discrete kernel under `μ ∝ x^{−a}` on `{1, …, N}`.
    Discrete { domain_size: usize, exponent: f64 },
    /// Gaussian kernel on the integer grid `{1, …, N}` under `μ ∝ x^{−a}`.
    GaussianGrid {
        domain_size: usize,
        exponent: f64,
        bandwidth: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationCase {
    pub model: FeatureModel,
    pub n: usize,
    pub lambda: f64,
    pub delta: f64,
    /// Deviation level as a multiple of the smallest admissible one.
    pub r_multiple: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcentrationConfig {
    pub models: Vec<FeatureModel>,
    pub sample_sizes: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub r_multiples: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub cases: Option<Vec<ConcentrationCase>>,
}

impl Default for ConcentrationConfig {
    fn default() -> Self {
        Self {
            models: vec![
                FeatureModel::Discrete {
                    domain_size: 16,
                    exponent: 1.0,
                },
                FeatureModel::Discrete {
                    domain_size: 64,
                    exponent: 2.0,
                },
                FeatureModel::GaussianGrid {
                    domain_size: 20,
                    exponent: 0.5,
                    bandwidth: 2.0,
                },
            ],
            sample_sizes: vec![100, 1000],
            lambdas: vec![0.05, 0.2],
            deltas: vec![0.0],
            r_multiples: vec![1.0, 2.0, 4.0],
            replicates: 2000,
            seed: 0,
            cases: None,
        }
    }
}

impl ConcentrationConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.replicates == 0 {
            return Err(field("replicates", "must be at least 1"));
        }
        if self.cases.as_ref().is_some_and(Vec::is_empty) {
            return Err(field("cases", "empty case list"));
        }
        if self.cases.is_none() {
            for (name, empty) in [
                ("models", self.models.is_empty()),
                ("sample_sizes", self.sample_sizes.is_empty()),
                ("lambdas", self.lambdas.is_empty()),
                ("deltas", self.deltas.is_empty()),
                ("r_multiples", self.r_multiples.is_empty()),
            ] {
                if empty {
                    return Err(field(name, "grid is empty"));
                }
            }
        }
        for c in self.resolved_cases() {
            if !(c.r_multiple >= 1.0) {
                return Err(field("r_multiples", format!("must be ≥ 1, got {}", c.r_multiple)));
            }
        }
        Ok(())
    }

    pub fn resolved_cases(&self) -> Vec<ConcentrationCase> {
        if let Some(c) = &self.cases {
            return c.clone();
        }
        let mut out = Vec::new();
        for model in &self.models {
            for &n in &self.sample_sizes {
                for &lambda in &self.lambdas {
                    for &delta in &self.deltas {
                        for &r_multiple in &self.r_multiples {
                            out.push(ConcentrationCase {
                                model: model.clone(),
                                n,
                                lambda,
                                delta,
                                r_multiple,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitPrecomputedConfig {
    pub kernel_path: Option<PathBuf>,
    pub splits_path: Option<PathBuf>,
    pub labels_path: Option<PathBuf>,
    pub lambdas: GridSpec,
    pub filters: Vec<FilterKind>,
}

impl Default for FitPrecomputedConfig {
    fn default() -> Self {
        Self {
            kernel_path: None,
            splits_path: None,
            labels_path: None,
            lambdas: GridSpec {
                min: 1e-5,
                max: 0.4,
                count: 1 << 10,
            },
            filters: default_filters(),
        }
    }
}

impl FitPrecomputedConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        for (name, p) in [
            ("kernel_path", &self.kernel_path),
            ("splits_path", &self.splits_path),
            ("labels_path", &self.labels_path),
        ] {
            if p.is_none() {
                return Err(field(name, "required"));
            }
        }
        if self.filters.is_empty() {
            return Err(field("filters", "need at least one filter"));
        }
        self.lambdas.validate("lambdas")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiltersVerifyConfig {
    pub kappa_sq: f64,
    /// Logarithmic grid of `λ` values.
    pub lambdas: GridSpec,
    /// Logarithmic grid of spectral points `t ∈ (0, κ²]`.
    pub spectrum: GridSpec,
    pub xis: Vec<f64>,
    /// Constant allowed in the Landweber qualification check.
    pub landweber_slack: f64,
}

impl Default for FiltersVerifyConfig {
    fn default() -> Self {
        Self {
            kappa_sq: 1.0,
            lambdas: GridSpec {
                min: 1e-4,
                max: 0.5,
                count: 60,
            },
            spectrum: GridSpec {
                min: 1e-6,
                max: 1.0,
                count: 10_000,
            },
            xis: vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0],
            landweber_slack: 1.0,
        }
    }
}

impl FiltersVerifyConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.kappa_sq > 0.0 && self.kappa_sq.is_finite()) {
            return Err(field("kappa_sq", "must be positive"));
        }
        self.lambdas.validate("lambdas")?;
        self.spectrum.validate("spectrum")?;
        if self.spectrum.max > self.kappa_sq {
            return Err(field("spectrum", "points must lie in (0, kappa_sq]"));
        }
        if self.xis.is_empty() {
            return Err(field("xis", "grid is empty"));
        }
        if !(self.landweber_slack >= 1.0 && self.landweber_slack.is_finite()) {
            return Err(field("landweber_slack", "must be ≥ 1"));
        }
        Ok(())
    }
}
