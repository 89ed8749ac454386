//! Simulation harness on finite domains `{1, …, N}`: sampling, exact and
//! Monte Carlo risk, validation-based `λ` selection, the bias–variance split,
//! log–log rate fits, and Monte Carlo checks of the operator concentration
//! bounds.
//!
//! Every random quantity is a pure function of a master seed and a replicate
//! index. Each replicate seeds a ChaCha8 generator through [`replicate_seed`];
//! sample points and noise use separate streams of that generator, so the
//! design points do not depend on the noise level.

use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimator::{prepare_grid, DiscreteGroups, FittedEstimator, GridFitContext};
use crate::filters::{FilterFamily, FilterKind};
use crate::kernels::{cross_kernel, KernelChoice, KernelSpec, Points};
use crate::spectral::eigvalsh_symmetric;
use crate::spectrum::{
    finite_rank_lambda, finite_rank_precondition, lambda_schedule, power_law_masses, BoundParams, BoundTerms,
    FeatureMap, Schedule, SpectrumModel,
};

/// Name of the Gaussian sampler, echoed in reports.
pub const NOISE_TRANSFORM: &str = "rand_distr::StandardNormal (ziggurat) over ChaCha8";

const POINT_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `index` under `master_seed`.
pub fn replicate_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index))
}

/// The regression function on `{1, …, N}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    /// `f(x) = Σ_{j ≤ count} 1{x = j}`.
    Indicators { count: usize },
    /// `f(x) = values[x − 1]`, zero beyond the list.
    Values { values: Vec<f64> },
}

impl Default for Target {
    fn default() -> Self {
        Target::Indicators { count: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTask {
    pub domain_size: usize,
    pub marginal_exponent: f64,
    #[serde(default)]
    pub target: Target,
    pub noise_sd: f64,
    pub master_seed: u64,
}

impl SyntheticTask {
    pub fn validate(&self) -> Result<()> {
        if self.domain_size == 0 {
            return Err(invalid("domain_size", "must be at least 1"));
        }
        if !(self.marginal_exponent >= 0.0 && self.marginal_exponent.is_finite()) {
            return Err(invalid("marginal_exponent", format!("must be nonnegative, got {}", self.marginal_exponent)));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(invalid("noise_sd", format!("must be nonnegative, got {}", self.noise_sd)));
        }
        if let Target::Values { values } = &self.target {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(invalid("target", "values must be finite"));
            }
        }
        Ok(())
    }

    pub fn masses(&self) -> Result<Vec<f64>> {
        power_law_masses(self.domain_size, self.marginal_exponent)
    }

    /// `f(x)` for `x = 1, …, N` (entry `x − 1`).
    pub fn target_values(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.domain_size];
        match &self.target {
            Target::Indicators { count } => {
                for v in out.iter_mut().take(*count) {
                    *v = 1.0;
                }
            }
            Target::Values { values } => {
                for (o, v) in out.iter_mut().zip(values) {
                    *o = *v;
                }
            }
        }
        out
    }

    /// Spectrum of the discrete kernel under this marginal, with the target's
    /// coefficients attached.
    pub fn spectrum_model(&self) -> Result<SpectrumModel> {
        SpectrumModel::marginal_power(self.domain_size, self.marginal_exponent)?.with_discrete_target(&self.target_values())
    }
}

/// Precomputed masses, cumulative masses and target values of a task.
#[derive(Debug, Clone)]
pub struct TaskTables {
    masses: Vec<f64>,
    cumulative: Vec<f64>,
    target: Vec<f64>,
    noise_sd: f64,
}

impl TaskTables {
    pub fn new(task: &SyntheticTask) -> Result<Self> {
        task.validate()?;
        let masses = task.masses()?;
        let mut acc = 0.0;
        let cumulative = masses
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self {
            masses,
            cumulative,
            target: task.target_values(),
            noise_sd: task.noise_sd,
        })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn domain_size(&self) -> usize {
        self.masses.len()
    }

    fn draw_point(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty domain");
        let u: f64 = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.masses.len() - 1) + 1
    }

    pub fn sample(&self, n: usize, seed: u64) -> Dataset {
        let mut point_rng = ChaCha8Rng::seed_from_u64(seed);
        point_rng.set_stream(POINT_STREAM);
        let mut noise_rng = ChaCha8Rng::seed_from_u64(seed);
        noise_rng.set_stream(NOISE_STREAM);
        let x: Vec<usize> = (0..n).map(|_| self.draw_point(&mut point_rng)).collect();
        let y = x
            .iter()
            .map(|&xi| {
                let z: f64 = StandardNormal.sample(&mut noise_rng);
                self.target[xi - 1] + self.noise_sd * z
            })
            .collect();
        Dataset { x, y }
    }

    /// `Σ_x μ(x)(f(x) − f̂(x))²` from predictions at every domain point.
    pub fn mu_mse(&self, predictions: &[f64]) -> Result<f64> {
        if predictions.len() != self.masses.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} predictions for a domain of {}",
                predictions.len(),
                self.masses.len()
            )));
        }
        Ok(self
            .masses
            .iter()
            .zip(&self.target)
            .zip(predictions)
            .map(|((p, f), g)| p * (f - g) * (f - g))
            .sum())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Vec<usize>,
    pub y: Vec<f64>,
}

/// Draws `n` iid points from `μ` by inverse CDF and adds `σ·N(0, 1)` noise.
pub fn sample_dataset(task: &SyntheticTask, n: usize, replicate_seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    Ok(TaskTables::new(task)?.sample(n, replicate_seed))
}

/// Exact `‖f − f̂‖²_μ` summed over the whole domain.
pub fn exact_mu_mse(task: &SyntheticTask, est: &FittedEstimator) -> Result<f64> {
    let tables = TaskTables::new(task)?;
    let preds = est.predict(&Points::domain(task.domain_size))?;
    tables.mu_mse(&preds)
}

pub fn mean_squared_error(predictions: &[f64], labels: &[f64]) -> Result<f64> {
    if labels.is_empty() {
        return Err(invalid("validation", "need at least one point"));
    }
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    Ok(predictions.iter().zip(labels).map(|(p, y)| (y - p) * (y - p)).sum::<f64>() / labels.len() as f64)
}

/// `n⁻¹ Σ (y_i − f̂(x_i))²` over a validation sample.
pub fn validation_mse(est: &FittedEstimator, val_x: &Points, val_y: &[f64]) -> Result<f64> {
    mean_squared_error(&est.predict(val_x)?, val_y)
}

/// Index and value of the `λ` with the smallest validation error; ties go to
/// the smallest `λ`.
pub fn select_lambda(lambdas: &[f64], mses: &[f64]) -> Result<(usize, f64)> {
    if lambdas.is_empty() {
        return Err(invalid("lambdas", "need at least one grid value"));
    }
    if lambdas.len() != mses.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} lambdas but {} errors",
            lambdas.len(),
            mses.len()
        )));
    }
    let mut best = 0;
    for i in 1..lambdas.len() {
        let better = mses[i] < mses[best] || (mses[i] == mses[best] && lambdas[i] < lambdas[best]);
        if better {
            best = i;
        }
    }
    if !mses[best].is_finite() {
        return Err(Error::Precondition("no finite validation error on the grid".into()));
    }
    Ok((best, lambdas[best]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasVariance {
    pub bias_part: f64,
    pub variance_part: f64,
}

impl BiasVariance {
    pub fn total(&self) -> f64 {
        self.bias_part + self.variance_part
    }
}

/// Exact noise-averaged risk at a fixed design, split into the error of the
/// noiseless fit and the noise contribution `σ² Σ_x μ(x)‖A_x‖²`, where `A`
/// maps labels to predictions. Uses the closed-form route for the discrete
/// kernel.
pub fn bias_variance_split(
    task: &SyntheticTask,
    x: &[usize],
    kernel: &KernelSpec,
    filter: &FilterFamily,
    lambda: f64,
) -> Result<BiasVariance> {
    let tables = TaskTables::new(task)?;
    match kernel {
        KernelSpec::Discrete => {
            let labels: Vec<f64> = x.iter().map(|&xi| target_at(&tables, xi)).collect::<Result<_>>()?;
            let groups = DiscreteGroups::new(x, &labels)?;
            grouped_bias_variance(&tables, &groups, filter, lambda)
        }
        _ => bias_variance_split_dense(task, x, kernel, filter, lambda),
    }
}

fn target_at(tables: &TaskTables, x: usize) -> Result<f64> {
    if x == 0 || x > tables.domain_size() {
        return Err(Error::Domain {
            point: x.to_string(),
            reason: format!("outside the domain {{1, …, {}}}", tables.domain_size()),
        });
    }
    Ok(tables.target[x - 1])
}

/// Same as [`bias_variance_split`] but always through the dense prediction
/// operator `A = K(domain, X)·U g_λ(Λ) Uᵀ / n`.
pub fn bias_variance_split_dense(
    task: &SyntheticTask,
    x: &[usize],
    kernel: &KernelSpec,
    filter: &FilterFamily,
    lambda: f64,
) -> Result<BiasVariance> {
    let tables = TaskTables::new(task)?;
    let noiseless: Vec<f64> = x.iter().map(|&xi| target_at(&tables, xi)).collect::<Result<_>>()?;
    let train = Points::Discrete(x.to_vec());
    let ctx = prepare_grid(&train, &noiseless, kernel, None)?;
    let n = x.len() as f64;
    let weights: Vec<f64> = ctx.eigenvalues().iter().map(|&t| filter.weight(lambda, t)).collect();
    let u = ctx.spectrum().eigenvectors();
    let mut scaled = u.clone();
    for (mut col, w) in scaled.columns_mut().into_iter().zip(&weights) {
        col *= *w / n;
    }
    let est = ctx.estimator(filter, lambda)?;
    let cross = cross_kernel(kernel, &train, &Points::domain(tables.domain_size()))?;
    let operator = cross.dot(&scaled).dot(&u.t());
    let fhat0 = est.predict(&Points::domain(tables.domain_size()))?;
    let bias_part = tables.mu_mse(&fhat0)?;
    let sigma_sq = tables.noise_sd * tables.noise_sd;
    let variance_part = sigma_sq
        * operator
            .rows()
            .into_iter()
            .zip(&tables.masses)
            .map(|(row, p)| p * row.dot(&row))
            .sum::<f64>();
    Ok(BiasVariance {
        bias_part,
        variance_part,
    })
}

fn grouped_bias_variance(
    tables: &TaskTables,
    groups: &DiscreteGroups,
    filter: &FilterFamily,
    lambda: f64,
) -> Result<BiasVariance> {
    let shrink = groups.shrinkage(filter, lambda)?;
    let mut fhat0 = vec![0.0; tables.domain_size()];
    let mut row_norms = 0.0;
    for ((&x, &c), &s) in groups.values().iter().zip(groups.counts()).zip(&shrink) {
        fhat0[x - 1] = s * tables.target[x - 1];
        // The prediction at x averages the c labels seen there, times s.
        row_norms += tables.masses[x - 1] * s * s / c as f64;
    }
    Ok(BiasVariance {
        bias_part: tables.mu_mse(&fhat0)?,
        variance_part: tables.noise_sd * tables.noise_sd * row_norms,
    })
}

/// Least-squares slope of `log(risk)` against `log(n)`.
pub fn estimate_rate(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(invalid("ladder", format!("need ≥ 3 ladder points, got {}", points.len())));
    }
    if let Some((n, r)) = points.iter().find(|(n, r)| !(*n > 0.0 && *r > 0.0 && n.is_finite() && r.is_finite())) {
        return Err(invalid("ladder", format!("points must be positive, got ({n}, {r})")));
    }
    let k = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|(n, _)| n.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|(_, r)| r.ln()).collect();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(invalid("ladder", "sample sizes must not all be equal"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Mean, median and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    pub std_dev: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self {
                mean: f64::NAN,
                median: f64::NAN,
                std_dev: f64::NAN,
            };
        }
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 {
            sorted[mid]
        } else {
            0.5 * (sorted[mid - 1] + sorted[mid])
        };
        let std_dev = if values.len() > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, median, std_dev }
    }

    /// Standard error of the mean.
    pub fn standard_error(&self, count: usize) -> f64 {
        self.std_dev / (count as f64).sqrt()
    }
}

/// How predictions over the domain are computed for one training sample.
enum Sweep {
    Grouped(DiscreteGroups),
    Dense(GridFitContext),
}

impl Sweep {
    fn build(data: &Dataset, kernel: &KernelSpec, domain_size: usize, force_dense: bool) -> Result<Self> {
        match kernel {
            KernelSpec::Discrete if !force_dense => Ok(Sweep::Grouped(DiscreteGroups::new(&data.x, &data.y)?)),
            _ => Ok(Sweep::Dense(prepare_grid(
                &Points::Discrete(data.x.clone()),
                &data.y,
                kernel,
                Some(&Points::domain(domain_size)),
            )?)),
        }
    }

    fn domain_predictions(&self, filter: &FilterFamily, lambda: f64, domain_size: usize) -> Result<Vec<f64>> {
        match self {
            Sweep::Grouped(g) => g.domain_predictions(filter, lambda, domain_size),
            Sweep::Dense(ctx) => ctx.eval_predictions(filter, lambda),
        }
    }
}

/// Configuration of a validation-selected risk experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: SyntheticTask,
    pub n: usize,
    /// Validation sample size; defaults to `n`.
    pub n_validation: Option<usize>,
    pub kernel: KernelChoice,
    pub filters: Vec<FilterKind>,
    pub lambdas: Vec<f64>,
    pub replicates: usize,
    /// Use the dense eigendecomposition even for the discrete kernel.
    #[serde(default)]
    pub force_dense: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.task.validate()?;
        if self.n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        if self.n_validation == Some(0) {
            return Err(invalid("n_validation", "must be at least 1"));
        }
        if self.replicates == 0 {
            return Err(invalid("replicates", "must be at least 1"));
        }
        if self.filters.is_empty() {
            return Err(invalid("filters", "need at least one filter"));
        }
        if self.lambdas.is_empty() {
            return Err(invalid("lambdas", "grid is empty"));
        }
        if self.lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(invalid("lambdas", "grid values must be positive"));
        }
        if self.lambdas.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("lambdas", "grid must be sorted ascending"));
        }
        let kernel = KernelSpec::from(self.kernel);
        for kind in &self.filters {
            let f = self.filter(*kind, &kernel)?;
            for &l in &self.lambdas {
                f.check_lambda(l)?;
            }
        }
        Ok(())
    }

    fn filter(&self, kind: FilterKind, kernel: &KernelSpec) -> Result<FilterFamily> {
        let kappa_sq = kernel.kappa_sq(&Points::domain(self.task.domain_size))?;
        match kind {
            FilterKind::Landweber { .. } => FilterFamily::new(kind, kappa_sq).or_else(|_| FilterFamily::landweber(kappa_sq)),
            _ => FilterFamily::new(kind, kappa_sq),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub seed: u64,
    pub method: String,
    pub lambda_selected: f64,
    pub validation_mse: f64,
    pub mu_mse: f64,
    pub bias_part: f64,
    pub variance_part: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub lambda_selected: Stats,
    pub validation_mse: Stats,
    pub mu_mse: Stats,
    pub bias_part: Stats,
    pub variance_part: Stats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    pub config: ExperimentConfig,
    pub noise_transform: &'static str,
    pub records: Vec<ReplicateRecord>,
    pub summaries: Vec<MethodSummary>,
}

impl RiskReport {
    pub fn summary(&self, method: &str) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }
}

/// Train and validation samples of one replicate.
pub fn replicate_data(tables: &TaskTables, master_seed: u64, replicate: usize, n: usize, n_val: usize) -> (u64, Dataset, Dataset) {
    let seed = replicate_seed(master_seed, replicate as u64);
    let train = tables.sample(n, splitmix64(seed));
    let val = tables.sample(n_val, splitmix64(seed ^ 0x5A5A_5A5A_5A5A_5A5A));
    (seed, train, val)
}

/// Fresh train and validation samples per replicate, a sweep over the `λ`
/// grid for every filter, validation selection, and the exact risk of the
/// selected estimator.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RiskReport> {
    config.validate()?;
    let tables = TaskTables::new(&config.task)?;
    let kernel = KernelSpec::from(config.kernel);
    let filters: Vec<FilterFamily> = config
        .filters
        .iter()
        .map(|k| config.filter(*k, &kernel))
        .collect::<Result<_>>()?;
    let size = config.task.domain_size;
    let n_val = config.n_validation.unwrap_or(config.n);
    let per_replicate: Vec<Vec<ReplicateRecord>> = (0..config.replicates)
        .into_par_iter()
        .map(|rep| {
            let (seed, train, val) = replicate_data(&tables, config.task.master_seed, rep, config.n, n_val);
            let sweep = Sweep::build(&train, &kernel, size, config.force_dense)?;
            let mut out = Vec::with_capacity(filters.len());
            for filter in &filters {
                let mses = config
                    .lambdas
                    .iter()
                    .map(|&l| {
                        let preds = sweep.domain_predictions(filter, l, size)?;
                        let at_val: Vec<f64> = val.x.iter().map(|&x| preds[x - 1]).collect();
                        mean_squared_error(&at_val, &val.y)
                    })
                    .collect::<Result<Vec<f64>>>()?;
                let (best, lambda) = select_lambda(&config.lambdas, &mses)?;
                let preds = sweep.domain_predictions(filter, lambda, size)?;
                let mu_mse = tables.mu_mse(&preds)?;
                let split = match &sweep {
                    Sweep::Grouped(_) => {
                        let noiseless: Vec<f64> = train.x.iter().map(|&x| tables.target[x - 1]).collect();
                        grouped_bias_variance(&tables, &DiscreteGroups::new(&train.x, &noiseless)?, filter, lambda)?
                    }
                    Sweep::Dense(_) => bias_variance_split_dense(&config.task, &train.x, &kernel, filter, lambda)?,
                };
                out.push(ReplicateRecord {
                    replicate: rep,
                    seed,
                    method: filter.label().to_string(),
                    lambda_selected: lambda,
                    validation_mse: mses[best],
                    mu_mse,
                    bias_part: split.bias_part,
                    variance_part: split.variance_part,
                });
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let records: Vec<ReplicateRecord> = per_replicate.into_iter().flatten().collect();
    let summaries = filters
        .iter()
        .map(|f| {
            let method = f.label();
            let rows: Vec<&ReplicateRecord> = records.iter().filter(|r| r.method == method).collect();
            let col = |get: fn(&ReplicateRecord) -> f64| Stats::of(&rows.iter().map(|r| get(r)).collect::<Vec<_>>());
            MethodSummary {
                method: method.to_string(),
                lambda_selected: col(|r| r.lambda_selected),
                validation_mse: col(|r| r.validation_mse),
                mu_mse: col(|r| r.mu_mse),
                bias_part: col(|r| r.bias_part),
                variance_part: col(|r| r.variance_part),
            }
        })
        .collect();
    Ok(RiskReport {
        config: config.clone(),
        noise_transform: NOISE_TRANSFORM,
        records,
        summaries,
    })
}

/// How `λ` is chosen in a rate experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum LambdaRule {
    /// A `λ(n)` schedule evaluated at smoothness `ζ`.
    Schedule { schedule: Schedule, zeta: f64 },
    /// `λ = (1 − r) t_J²` for a rank-`J` target.
    FiniteRank { rank: usize, r: f64 },
    /// Validation selection over a grid.
    Validation { lambdas: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateMethod {
    pub name: String,
    pub filter: FilterKind,
    pub rule: LambdaRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    pub task: SyntheticTask,
    pub ladder: Vec<usize>,
    pub replicates: usize,
    pub methods: Vec<RateMethod>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub method: String,
    pub n: usize,
    /// Scheduled `λ`; `NaN` under validation selection.
    pub lambda: f64,
    pub median_risk: f64,
    pub mean_risk: f64,
    pub std_risk: f64,
    /// For finite-rank rows: whether `r t_J² ≥ κ²/√n + κ²/(3n)` holds.
    pub precondition: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub method: String,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub rows: Vec<RateRow>,
    pub fits: Vec<RateFit>,
}

impl RateReport {
    pub fn slope(&self, method: &str) -> Option<f64> {
        self.fits.iter().find(|f| f.method == method).map(|f| f.slope)
    }
}

impl RateConfig {
    pub fn validate(&self) -> Result<()> {
        self.task.validate()?;
        if self.ladder.len() < 3 {
            return Err(invalid("ladder", format!("need ≥ 3 ladder points, got {}", self.ladder.len())));
        }
        if self.ladder.iter().any(|&n| n < 2) {
            return Err(invalid("ladder", "sample sizes must be at least 2"));
        }
        if self.replicates == 0 {
            return Err(invalid("replicates", "must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(invalid("methods", "need at least one method"));
        }
        for m in &self.methods {
            if let LambdaRule::Validation { lambdas } = &m.rule {
                if lambdas.is_empty() {
                    return Err(invalid("lambdas", "grid is empty"));
                }
            }
        }
        Ok(())
    }
}

/// Median exact risk over replicates at each ladder size, and the fitted
/// log–log slope per method. Uses the discrete kernel.
pub fn run_rates(config: &RateConfig) -> Result<RateReport> {
    config.validate()?;
    let tables = TaskTables::new(&config.task)?;
    let model = config.task.spectrum_model()?;
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for method in &config.methods {
        let filter = FilterFamily::new(method.filter, 1.0).or_else(|_| FilterFamily::landweber(1.0))?;
        let mut points = Vec::new();
        for &n in &config.ladder {
            let (lambda, precondition) = match &method.rule {
                LambdaRule::Schedule { schedule, zeta } => (Some(lambda_schedule(schedule, n, *zeta)?), None),
                LambdaRule::FiniteRank { rank, r } => {
                    let l = finite_rank_lambda(&model, *rank, *r)?;
                    let t = model.eigenvalues()[rank - 1];
                    (Some(l), Some(finite_rank_precondition(t, *r, 1.0, n)))
                }
                LambdaRule::Validation { .. } => (None, None),
            };
            let risks: Vec<f64> = (0..config.replicates)
                .into_par_iter()
                .map(|rep| {
                    let (_, train, val) = replicate_data(&tables, config.task.master_seed ^ n as u64, rep, n, n);
                    let groups = DiscreteGroups::new(&train.x, &train.y)?;
                    let size = tables.domain_size();
                    let chosen = match (&method.rule, lambda) {
                        (_, Some(l)) => l,
                        (LambdaRule::Validation { lambdas }, None) => {
                            let mses = lambdas
                                .iter()
                                .map(|&l| {
                                    let preds = groups.domain_predictions(&filter, l, size)?;
                                    let at_val: Vec<f64> = val.x.iter().map(|&x| preds[x - 1]).collect();
                                    mean_squared_error(&at_val, &val.y)
                                })
                                .collect::<Result<Vec<f64>>>()?;
                            select_lambda(lambdas, &mses)?.1
                        }
                        _ => unreachable!("only validation rules leave lambda unset"),
                    };
                    tables.mu_mse(&groups.domain_predictions(&filter, chosen, size)?)
                })
                .collect::<Result<_>>()?;
            let stats = Stats::of(&risks);
            points.push((n as f64, stats.median));
            rows.push(RateRow {
                method: method.name.clone(),
                n,
                lambda: lambda.unwrap_or(f64::NAN),
                median_risk: stats.median,
                mean_risk: stats.mean,
                std_risk: stats.std_dev,
                precondition,
            });
        }
        fits.push(RateFit {
            method: method.name.clone(),
            slope: estimate_rate(&points)?,
        });
    }
    Ok(RateReport { rows, fits })
}

/// One Monte Carlo check of the excess-risk bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCase {
    pub domain_size: usize,
    pub marginal_exponent: f64,
    #[serde(default)]
    pub target: Target,
    pub sigma_sq: f64,
    pub lambda: f64,
    pub n: usize,
    pub zeta: f64,
    pub delta: f64,
    pub filter: FilterKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub case: BoundCase,
    pub window_ok: bool,
    pub kappa_delta_sq: f64,
    pub effective_dimension: f64,
    pub mc_risk: f64,
    pub mc_standard_error: f64,
    pub terms: Option<BoundTerms>,
    /// `mc_risk − 2·SE ≤ total`; absent when the window fails.
    pub dominated: Option<bool>,
}

/// Monte Carlo risk of the discrete-kernel estimator against the four-term
/// bound. Window failures are reported in the row rather than raised.
pub fn run_bound_case(case: &BoundCase, replicates: usize, master_seed: u64) -> Result<BoundRow> {
    if replicates < 2 {
        return Err(invalid("replicates", "need at least 2 for a standard error"));
    }
    if !(case.sigma_sq >= 0.0) {
        return Err(invalid("sigma_sq", format!("must be nonnegative, got {}", case.sigma_sq)));
    }
    let task = SyntheticTask {
        domain_size: case.domain_size,
        marginal_exponent: case.marginal_exponent,
        target: case.target.clone(),
        noise_sd: case.sigma_sq.sqrt(),
        master_seed,
    };
    let tables = TaskTables::new(&task)?;
    let model = task.spectrum_model()?;
    let features = FeatureMap::discrete(tables.masses())?;
    let kappa_delta_sq = features.kappa_delta_sq(case.delta);
    let filter = FilterFamily::new(case.filter, 1.0)?;
    filter.check_lambda(case.lambda)?;
    let risks: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let (_, train, _) = replicate_data(&tables, master_seed, rep, case.n, 1);
            let groups = DiscreteGroups::new(&train.x, &train.y)?;
            tables.mu_mse(&groups.domain_predictions(&filter, case.lambda, case.domain_size)?)
        })
        .collect::<Result<_>>()?;
    let stats = Stats::of(&risks);
    let se = stats.standard_error(replicates);
    let params = BoundParams {
        zeta: case.zeta,
        sigma_sq: case.sigma_sq,
        kappa_sq: features.kappa_sq(),
        kappa_delta_sq,
        delta: case.delta,
        lambda: case.lambda,
        n: case.n,
    };
    let window_ok = crate::spectrum::check_lambda_window(case.lambda, case.n, case.delta, kappa_delta_sq);
    let terms = if window_ok { Some(model.theorem_bound(&params)?) } else { None };
    Ok(BoundRow {
        case: case.clone(),
        window_ok,
        kappa_delta_sq,
        effective_dimension: model.effective_dimension(case.lambda)?,
        mc_risk: stats.mean,
        mc_standard_error: se,
        dominated: terms.map(|t| stats.mean - 2.0 * se <= t.total),
        terms,
    })
}

/// Outcome of a concentration trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationResult {
    pub n: usize,
    pub lambda: f64,
    pub delta: f64,
    pub r: f64,
    pub replicates: usize,
    pub effective_dimension: f64,
    pub kappa_sq: f64,
    pub kappa_delta_sq: f64,
    pub empirical_tail_prob: f64,
    pub tail_bound: f64,
    pub empirical_second_moment: f64,
    pub moment_bound: f64,
}

impl ConcentrationResult {
    /// Tail bound plus three binomial standard errors dominates the
    /// empirical frequency, and the moment bound dominates the mean.
    pub fn holds(&self) -> bool {
        let p = self.empirical_tail_prob;
        let se = (p * (1.0 - p) / self.replicates as f64).sqrt();
        p <= self.tail_bound + 3.0 * se && self.empirical_second_moment <= self.moment_bound
    }
}

/// `4 d_λ exp(−λ^{1−δ} n r² / (2κ_δ²(1 + r/3)))`.
pub fn tail_bound(d_lambda: f64, lambda: f64, delta: f64, kappa_delta_sq: f64, n: usize, r: f64) -> f64 {
    let scaled = lambda.powf(1.0 - delta) * n as f64;
    4.0 * d_lambda * (-scaled * r * r / (2.0 * kappa_delta_sq * (1.0 + r / 3.0))).exp()
}

/// `34κ⁴/n + 15κ⁴/n²`.
pub fn moment_bound(kappa_sq: f64, n: usize) -> f64 {
    let n = n as f64;
    let k4 = kappa_sq * kappa_sq;
    34.0 * k4 / n + 15.0 * k4 / (n * n)
}

/// Smallest admissible deviation level `√(κ_δ²/(λ^{1−δ}n)) + κ_δ²/(3λ^{1−δ}n)`.
pub fn minimal_deviation_level(lambda: f64, delta: f64, kappa_delta_sq: f64, n: usize) -> f64 {
    let q = kappa_delta_sq / (lambda.powf(1.0 - delta) * n as f64);
    q.sqrt() + q / 3.0
}

/// Multinomial counts of `n` draws from `masses`, by sequential binomials.
fn multinomial(masses: &[f64], n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<u64>> {
    let mut remaining = n as u64;
    let mut left = 1.0_f64;
    let mut counts = Vec::with_capacity(masses.len());
    for (i, &p) in masses.iter().enumerate() {
        if remaining == 0 || i + 1 == masses.len() {
            counts.push(remaining);
            remaining = 0;
            continue;
        }
        let q = if left > 0.0 { (p / left).clamp(0.0, 1.0) } else { 1.0 };
        let c = Binomial::new(remaining, q)
            .map_err(|e| Error::Precondition(format!("binomial draw: {e}")))?
            .sample(rng);
        counts.push(c);
        remaining -= c;
        left -= p;
    }
    Ok(counts)
}

/// Monte Carlo frequency of `‖(T+λ)^{−1/2}(Σ−T)(T+λ)^{−1/2}‖ ≥ r` and mean of
/// `‖Σ−T‖²`, with `Σ = n⁻¹ Σ_i φ(x_i)φ(x_i)ᵀ` and `T = diag(t_j²)`.
pub fn concentration_trial(
    map: &FeatureMap,
    n: usize,
    lambda: f64,
    delta: f64,
    r: f64,
    replicates: usize,
    master_seed: u64,
) -> Result<ConcentrationResult> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    if replicates == 0 {
        return Err(invalid("replicates", "must be at least 1"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda", format!("must be positive, got {lambda}")));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(invalid("delta", format!("must lie in [0, 1), got {delta}")));
    }
    let kappa_delta_sq = map.kappa_delta_sq(delta);
    let scaled = lambda.powf(1.0 - delta);
    if scaled > kappa_delta_sq {
        return Err(Error::Precondition(format!(
            "lambda^(1-delta) = {scaled} exceeds kappa_delta_sq = {kappa_delta_sq}"
        )));
    }
    let r_min = minimal_deviation_level(lambda, delta, kappa_delta_sq, n);
    if r < r_min {
        return Err(Error::Precondition(format!(
            "deviation level r = {r} is below the admissible minimum {r_min}"
        )));
    }
    let d = map.dimension();
    let t = map.eigenvalues();
    let phi = map.features();
    let masses = map.masses();
    let inv_sqrt: Vec<f64> = t.iter().map(|&v| 1.0 / (v + lambda).sqrt()).collect();
    let outcomes: Vec<(bool, f64)> = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(replicate_seed(master_seed, rep as u64));
            let counts = multinomial(masses, n, &mut rng)?;
            let mut diff = Array2::<f64>::zeros((d, d));
            for (x, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let w = c as f64 / n as f64;
                let row: ArrayView1<f64> = phi.row(x);
                for a in 0..d {
                    let ra = w * row[a];
                    if ra == 0.0 {
                        continue;
                    }
                    for b in 0..d {
                        diff[[a, b]] += ra * row[b];
                    }
                }
            }
            for j in 0..d {
                diff[[j, j]] -= t[j];
            }
            let moment = spectral_norm(&diff)?.powi(2);
            let scaled_diff = Array2::from_shape_fn((d, d), |(a, b)| inv_sqrt[a] * diff[[a, b]] * inv_sqrt[b]);
            Ok((spectral_norm(&scaled_diff)? >= r, moment))
        })
        .collect::<Result<_>>()?;
    let hits = outcomes.iter().filter(|(hit, _)| *hit).count();
    let d_lambda = map.effective_dimension(lambda)?;
    let kappa_sq = map.kappa_sq();
    Ok(ConcentrationResult {
        n,
        lambda,
        delta,
        r,
        replicates,
        effective_dimension: d_lambda,
        kappa_sq,
        kappa_delta_sq,
        empirical_tail_prob: hits as f64 / replicates as f64,
        tail_bound: tail_bound(d_lambda, lambda, delta, kappa_delta_sq, n, r),
        empirical_second_moment: outcomes.iter().map(|(_, m)| m).sum::<f64>() / replicates as f64,
        moment_bound: moment_bound(kappa_sq, n),
    })
}

/// Largest absolute eigenvalue; diagonal matrices skip the eigensolver.
fn spectral_norm(a: &Array2<f64>) -> Result<f64> {
    let d = a.nrows();
    let diagonal = (0..d).all(|i| (0..d).all(|j| i == j || a[[i, j]] == 0.0));
    if diagonal {
        return Ok(a.diag().iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    Ok(eigvalsh_symmetric(a.view())?.iter().fold(0.0, |m, v| m.max(v.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::linear_grid;

    fn task(size: usize, a: f64, sd: f64) -> SyntheticTask {
        SyntheticTask {
            domain_size: size,
            marginal_exponent: a,
            target: Target::default(),
            noise_sd: sd,
            master_seed: 11,
        }
    }

    #[test]
    fn noiseless_samples_hit_target() {
        let t = task(20, 0.5, 0.0);
        let d = sample_dataset(&t, 500, 3).unwrap();
        let f = t.target_values();
        assert!(d.x.iter().zip(&d.y).all(|(&x, &y)| y == f[x - 1]));
        assert!(d.x.iter().all(|&x| (1..=20).contains(&x)));
        assert_eq!(d, sample_dataset(&t, 500, 3).unwrap());
        assert_ne!(d.x, sample_dataset(&t, 500, 4).unwrap().x);
        assert!(sample_dataset(&t, 0, 3).is_err());
    }

    #[test]
    fn design_does_not_depend_on_noise_level() {
        let a = sample_dataset(&task(50, 1.0, 0.1), 200, 9).unwrap();
        let b = sample_dataset(&task(50, 1.0, 2.0), 200, 9).unwrap();
        assert_eq!(a.x, b.x);
    }

    #[test]
    fn mu_mse_of_zero_function() {
        let mut t = task(2, 0.0, 0.0);
        t.target = Target::Indicators { count: 1 };
        let tables = TaskTables::new(&t).unwrap();
        assert_eq!(tables.mu_mse(&[0.0, 0.0]).unwrap(), 0.5);
        assert_eq!(tables.mu_mse(&[1.0, 0.0]).unwrap(), 0.0);
        assert!(tables.mu_mse(&[1.0]).is_err());
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mean_squared_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mean_squared_error(&[1.5, 2.5, -0.5], &[1.0, 2.0, -1.0]).unwrap(), 0.25);
        assert!(mean_squared_error(&[], &[]).is_err());
    }

    #[test]
    fn selection_rules() {
        assert_eq!(select_lambda(&[0.1, 0.2, 0.3], &[3.0, 1.0, 2.0]).unwrap(), (1, 0.2));
        assert_eq!(select_lambda(&[0.1, 0.2, 0.3], &[1.0, 1.0, 2.0]).unwrap(), (0, 0.1));
        assert_eq!(select_lambda(&[0.3, 0.1], &[1.0, 1.0]).unwrap(), (1, 0.1));
        assert!(select_lambda(&[], &[]).is_err());
    }

    #[test]
    fn rate_examples() {
        let exact: Vec<(f64, f64)> = [10.0, 100.0, 1000.0].iter().map(|&n| (n, 1.0 / n)).collect();
        assert!((estimate_rate(&exact).unwrap() + 1.0).abs() < 1e-12);
        let flat: Vec<(f64, f64)> = [10.0, 100.0, 1000.0].iter().map(|&n| (n, 0.3)).collect();
        assert!(estimate_rate(&flat).unwrap().abs() < 1e-12);
        let err = estimate_rate(&exact[..1]).unwrap_err();
        assert!(err.to_string().contains("need ≥ 3 ladder points"));
        assert!(estimate_rate(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
    }

    #[test]
    fn stats_examples() {
        let s = Stats::of(&[1.0, 3.0, 2.0, 10.0]);
        assert_eq!(s.mean, 4.0);
        assert_eq!(s.median, 2.5);
        assert!((s.std_dev - (50.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert_eq!(Stats::of(&[5.0]).std_dev, 0.0);
    }

    #[test]
    fn concentration_formulas() {
        let d: f64 = 2.5;
        let want = 4.0 * d * (-0.1_f64 * 100.0 * 0.25 / (2.0 * (1.0 + 1.0 / 6.0))).exp();
        assert!((tail_bound(d, 0.1, 0.0, 1.0, 100, 0.5) - want).abs() < 1e-15);
        assert!((moment_bound(1.0, 10) - 3.55).abs() < 1e-15);
    }

    #[test]
    fn concentration_precondition_reported() {
        let map = FeatureMap::discrete(&[0.25; 4]).unwrap();
        let r_min = minimal_deviation_level(0.1, 0.0, 1.0, 100);
        let err = concentration_trial(&map, 100, 0.1, 0.0, 0.5 * r_min, 10, 1).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        assert!(concentration_trial(&map, 100, 2.0, 0.0, 1.0, 10, 1).is_err());
    }

    #[test]
    fn concentration_with_huge_sample() {
        let map = FeatureMap::discrete(&[0.25; 4]).unwrap();
        let res = concentration_trial(&map, 1_000_000, 0.1, 0.0, 0.05, 200, 5).unwrap();
        assert_eq!(res.empirical_tail_prob, 0.0);
        assert!(res.empirical_second_moment < 0.1 * res.moment_bound);
        assert!(res.holds());
    }

    #[test]
    fn grouped_and_dense_bias_variance_agree() {
        let t = task(32, 1.0, 0.7);
        let d = sample_dataset(&t, 64, 21).unwrap();
        for filter in [FilterFamily::ridge(1.0).unwrap(), FilterFamily::cutoff(1.0).unwrap(), FilterFamily::landweber(1.0).unwrap()] {
            for lambda in [0.003, 0.04, 0.2] {
                let g = bias_variance_split(&t, &d.x, &KernelSpec::Discrete, &filter, lambda).unwrap();
                let h = bias_variance_split_dense(&t, &d.x, &KernelSpec::Discrete, &filter, lambda).unwrap();
                assert!((g.bias_part - h.bias_part).abs() < 1e-12);
                assert!((g.variance_part - h.variance_part).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_noise_and_zero_estimator_splits() {
        let t = task(16, 0.5, 0.0);
        let d = sample_dataset(&t, 40, 2).unwrap();
        let cut = FilterFamily::cutoff(1.0).unwrap();
        let bv = bias_variance_split(&t, &d.x, &KernelSpec::Discrete, &cut, 0.01).unwrap();
        assert_eq!(bv.variance_part, 0.0);
        let est = crate::estimator::fit(&Points::Discrete(d.x.clone()), &d.y, &KernelSpec::Discrete, &cut, 0.01).unwrap();
        assert!((bv.bias_part - exact_mu_mse(&t, &est).unwrap()).abs() < 1e-14);
        let high = bias_variance_split(&t, &d.x, &KernelSpec::Discrete, &cut, 1.0).unwrap();
        let tables = TaskTables::new(&t).unwrap();
        assert!((high.bias_part - tables.mu_mse(&[0.0; 16]).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn variance_grows_with_noise() {
        let ridge = FilterFamily::ridge(1.0).unwrap();
        let mut last = -1.0;
        for sd in [0.0, 0.1, 0.5, 1.0] {
            let t = task(24, 1.0, sd);
            let d = sample_dataset(&t, 50, 8).unwrap();
            let v = bias_variance_split(&t, &d.x, &KernelSpec::Discrete, &ridge, 0.02).unwrap().variance_part;
            assert!(v >= last);
            last = v;
        }
    }

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            task: task(64, 0.5, 0.5),
            n: 128,
            n_validation: None,
            kernel: KernelChoice::Discrete,
            filters: vec![FilterKind::Ridge, FilterKind::Cutoff],
            lambdas: linear_grid(1e-4, 0.05, 64),
            replicates: 3,
            force_dense: false,
        }
    }

    #[test]
    fn experiment_is_deterministic() {
        let cfg = small_config();
        let a = run_experiment(&cfg).unwrap();
        assert_eq!(a, run_experiment(&cfg).unwrap());
        assert_eq!(a.records.len(), 6);
        assert!(a.records.iter().all(|r| r.mu_mse >= 0.0));
        assert!(a.summary("krr").is_some() && a.summary("kpcr").is_some());
    }

    #[test]
    fn dense_and_grouped_experiments_agree() {
        let mut cfg = small_config();
        let grouped = run_experiment(&cfg).unwrap();
        cfg.force_dense = true;
        let dense = run_experiment(&cfg).unwrap();
        for (g, d) in grouped.records.iter().zip(&dense.records) {
            assert_eq!(g.lambda_selected, d.lambda_selected);
            assert!((g.mu_mse - d.mu_mse).abs() < 1e-10);
            assert!((g.variance_part - d.variance_part).abs() < 1e-10);
        }
    }

    #[test]
    fn noiseless_interpolation_errs_only_at_unseen_points() {
        let mut cfg = small_config();
        cfg.task.noise_sd = 0.0;
        cfg.replicates = 1;
        cfg.filters = vec![FilterKind::Cutoff];
        cfg.lambdas = vec![1e-6];
        let report = run_experiment(&cfg).unwrap();
        let tables = TaskTables::new(&cfg.task).unwrap();
        let (_, train, _) = replicate_data(&tables, cfg.task.master_seed, 0, cfg.n, cfg.n);
        let unseen: f64 = (1..=64usize)
            .filter(|x| !train.x.contains(x))
            .map(|x| tables.masses()[x - 1] * tables.target()[x - 1].powi(2))
            .sum();
        assert!(report.records[0].mu_mse <= unseen + 1e-15);
    }

    #[test]
    fn config_validation_names_fields() {
        let mut cfg = small_config();
        cfg.replicates = 0;
        assert!(run_experiment(&cfg).unwrap_err().to_string().contains("replicates"));
        let mut cfg = small_config();
        cfg.lambdas.clear();
        assert!(run_experiment(&cfg).unwrap_err().to_string().contains("lambdas"));
    }

    #[test]
    fn bound_rows_gate_on_window() {
        let case = BoundCase {
            domain_size: 64,
            marginal_exponent: 1.0,
            target: Target::Indicators { count: 1 },
            sigma_sq: 0.25,
            lambda: 0.001,
            n: 200,
            zeta: 0.0,
            delta: 0.0,
            filter: FilterKind::Ridge,
        };
        let row = run_bound_case(&case, 20, 3).unwrap();
        assert!(!row.window_ok && row.terms.is_none() && row.dominated.is_none());
        let row = run_bound_case(&BoundCase { lambda: 0.1, ..case }, 50, 3).unwrap();
        assert_eq!(row.dominated, Some(true));
    }
}
