//! Experiment runner behind the `specreg` binary. Each command takes a
//! resolved config, writes CSV files into the output directory and returns
//! the text it prints.

// `!(x >= c)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod output;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ndarray::Array2;
use serde::Serialize;
use specreg::estimator::{empirical_effective_dimension, fit_grid, prepare_grid};
use specreg::filters::{empirical_qualification, verify_family_conditions, ConditionCheck, FilterFamily};
use specreg::kernels::{kernel_matrix, load_labels, load_precomputed, KernelSpec, Points};
use specreg::simlab::{
    concentration_trial, mean_squared_error, minimal_deviation_level, replicate_seed, run_bound_case,
    run_experiment, run_rates, select_lambda, BoundRow, ConcentrationResult, ExperimentConfig, RateConfig,
    RateReport, RiskReport, SyntheticTask,
};
use specreg::spectrum::{power_law_masses, FeatureMap};

use config::{
    BoundsConfig, ConcentrationCase, ConcentrationConfig, FeatureModel, FitPrecomputedConfig, FiltersVerifyConfig,
    RateMode, RatesConfig, ReproduceConfig,
};
use output::{num, write_csv};

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Io(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<specreg::Error> for CliError {
    fn from(e: specreg::Error) -> Self {
        use specreg::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidParameter { .. } | E::Precondition(_) | E::Domain { .. } => CliError::Config(msg),
            E::Io { .. } | E::Parse { .. } | E::OverlappingSplits { .. } => CliError::Io(msg),
            _ => CliError::Numeric(msg),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "specreg", version, about = "Spectral-filter kernel regression experiments")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for CSV files.
    #[arg(long, global = true, default_value = "specreg-out")]
    pub out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Monte Carlo replicates.
    #[arg(long, global = true)]
    pub replicates: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Validation-tuned ridge and cut-off on the simulated discrete task.
    ReproduceSim {
        /// Sets both the domain size and the sample size.
        #[arg(long)]
        n_override: Option<usize>,
    },
    /// Risk against sample size under a λ schedule, with fitted slopes.
    Rates {
        #[arg(long, value_enum)]
        mode: Option<RateMode>,
    },
    /// Monte Carlo risk against the four-term excess-risk bound.
    Bounds,
    /// Tail and second-moment checks for the empirical covariance.
    Concentration,
    /// Grid fit on a precomputed kernel with validation selection.
    FitPrecomputed {
        #[arg(long)]
        kernel: Option<PathBuf>,
        #[arg(long)]
        splits: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Structural conditions and qualification of the three filter families.
    FiltersVerify {
        #[arg(long)]
        landweber_slack: Option<f64>,
    },
}

/// Runs a parsed command line and returns the text to print.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    if let Some(threads) = cli.common.threads {
        if threads == 0 {
            return Err(CliError::Config("invalid `threads`: must be at least 1".into()));
        }
        // Fails only if a pool already exists, e.g. when called twice in-process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let common = &cli.common;
    let path = common.config.as_deref();
    match &cli.command {
        Command::ReproduceSim { n_override } => {
            let mut cfg: ReproduceConfig = config::load(path)?;
            if let Some(n) = n_override {
                cfg.domain_size = *n;
                cfg.n = *n;
            }
            override_common(common, &mut cfg.seed, &mut cfg.replicates);
            reproduce_sim(&cfg, &common.out).map(|r| r.text)
        }
        Command::Rates { mode } => {
            let mut cfg: RatesConfig = config::load(path)?;
            if let Some(m) = mode {
                cfg.mode = *m;
            }
            override_common(common, &mut cfg.seed, &mut cfg.replicates);
            rates(&cfg, &common.out).map(|r| r.text)
        }
        Command::Bounds => {
            let mut cfg: BoundsConfig = config::load(path)?;
            override_common(common, &mut cfg.seed, &mut cfg.replicates);
            bounds(&cfg, &common.out).map(|r| r.text)
        }
        Command::Concentration => {
            let mut cfg: ConcentrationConfig = config::load(path)?;
            override_common(common, &mut cfg.seed, &mut cfg.replicates);
            concentration(&cfg, &common.out).map(|r| r.text)
        }
        Command::FitPrecomputed { kernel, splits, labels } => {
            let mut cfg: FitPrecomputedConfig = config::load(path)?;
            for (flag, slot) in [
                (kernel, &mut cfg.kernel_path),
                (splits, &mut cfg.splits_path),
                (labels, &mut cfg.labels_path),
            ] {
                if flag.is_some() {
                    *slot = flag.clone();
                }
            }
            fit_precomputed(&cfg, &common.out).map(|r| r.text)
        }
        Command::FiltersVerify { landweber_slack } => {
            let mut cfg: FiltersVerifyConfig = config::load(path)?;
            if let Some(s) = landweber_slack {
                cfg.landweber_slack = *s;
            }
            filters_verify(&cfg, &common.out).map(|r| r.text)
        }
    }
}

fn override_common(common: &Common, seed: &mut u64, replicates: &mut usize) {
    if let Some(s) = common.seed {
        *seed = s;
    }
    if let Some(r) = common.replicates {
        *replicates = r;
    }
}

fn ensure_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("configs serialize")
}

/// A command's result: the underlying report and the text it prints.
#[derive(Debug, Clone)]
pub struct Outcome<T> {
    pub report: T,
    pub text: String,
}

pub fn reproduce_sim(cfg: &ReproduceConfig, out: &Path) -> Result<Outcome<RiskReport>, CliError> {
    cfg.validate()?;
    let experiment = ExperimentConfig {
        task: SyntheticTask {
            domain_size: cfg.domain_size,
            marginal_exponent: cfg.marginal_exponent,
            target: cfg.target.clone(),
            noise_sd: cfg.sigma_sq.sqrt(),
            master_seed: cfg.seed,
        },
        n: cfg.n,
        n_validation: cfg.n_validation,
        kernel: cfg.kernel,
        filters: cfg.filters.clone(),
        lambdas: cfg.lambdas.linear(),
        replicates: cfg.replicates,
        force_dense: cfg.force_dense,
    };
    let report = run_experiment(&experiment)?;
    ensure_dir(out)?;
    let header = format!("{}; noise: {}", json(cfg), report.noise_transform);
    let rows: Vec<Vec<String>> = report
        .records
        .iter()
        .map(|r| {
            vec![
                r.replicate.to_string(),
                r.seed.to_string(),
                r.method.clone(),
                num(r.lambda_selected),
                num(r.validation_mse),
                num(r.mu_mse),
                num(r.bias_part),
                num(r.variance_part),
            ]
        })
        .collect();
    write_csv(
        &out.join("reproduce_sim_replicates.csv"),
        &header,
        &[
            "replicate",
            "seed",
            "method",
            "lambda_selected",
            "validation_mse",
            "mu_mse",
            "bias_part",
            "variance_part",
        ],
        &rows,
    )?;
    let summary: Vec<Vec<String>> = report
        .summaries
        .iter()
        .map(|s| {
            vec![
                s.method.clone(),
                num(s.mu_mse.median),
                num(s.mu_mse.mean),
                num(s.mu_mse.std_dev),
                num(s.lambda_selected.median),
                num(s.validation_mse.median),
                num(s.bias_part.median),
                num(s.variance_part.median),
            ]
        })
        .collect();
    write_csv(
        &out.join("reproduce_sim_summary.csv"),
        &header,
        &[
            "method",
            "median_mu_mse",
            "mean_mu_mse",
            "std_mu_mse",
            "median_lambda_selected",
            "median_validation_mse",
            "median_bias_part",
            "median_variance_part",
        ],
        &summary,
    )?;
    let mut text = String::new();
    for s in &report.summaries {
        let _ = writeln!(
            text,
            "{:<10} median mu-MSE {:.4e}  (median lambda {:.4e}, {} replicates)",
            s.method, s.mu_mse.median, s.lambda_selected.median, cfg.replicates
        );
    }
    Ok(Outcome { report, text })
}

pub fn rates(cfg: &RatesConfig, out: &Path) -> Result<Outcome<RateReport>, CliError> {
    cfg.validate()?;
    let mut resolved = cfg.clone();
    resolved.target = Some(cfg.resolved_target());
    resolved.methods = Some(cfg.resolved_methods());
    let rate_config = RateConfig {
        task: SyntheticTask {
            domain_size: cfg.domain_size,
            marginal_exponent: cfg.marginal_exponent,
            target: cfg.resolved_target(),
            noise_sd: cfg.sigma_sq.sqrt(),
            master_seed: cfg.seed,
        },
        ladder: cfg.ladder.clone(),
        replicates: cfg.replicates,
        methods: cfg.resolved_methods(),
    };
    let report = run_rates(&rate_config)?;
    ensure_dir(out)?;
    let header = json(&resolved);
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.method.clone(),
                r.n.to_string(),
                num(r.lambda),
                num(r.median_risk),
                num(r.mean_risk),
                num(r.std_risk),
                r.precondition.map(|p| p.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    write_csv(
        &out.join("rates.csv"),
        &header,
        &["method", "n", "lambda", "median_risk", "mean_risk", "std_risk", "precondition"],
        &rows,
    )?;
    let fits: Vec<Vec<String>> = report.fits.iter().map(|f| vec![f.method.clone(), num(f.slope)]).collect();
    write_csv(&out.join("rates_slopes.csv"), &header, &["method", "slope"], &fits)?;
    let mut text = String::new();
    for f in &report.fits {
        let _ = writeln!(text, "{:<10} slope {:.4}", f.method, f.slope);
    }
    let violated: Vec<usize> = report
        .rows
        .iter()
        .filter(|r| r.precondition == Some(false))
        .map(|r| r.n)
        .collect();
    if !violated.is_empty() {
        let _ = writeln!(text, "finite-rank sample-size condition fails at n = {violated:?}");
    }
    Ok(Outcome { report, text })
}

pub fn bounds(cfg: &BoundsConfig, out: &Path) -> Result<Outcome<Vec<BoundRow>>, CliError> {
    cfg.validate()?;
    let cases = cfg.resolved_cases();
    let rows = cases
        .iter()
        .enumerate()
        .map(|(i, case)| run_bound_case(case, cfg.replicates, replicate_seed(cfg.seed, i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    ensure_dir(out)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let c = &r.case;
            let terms = match &r.terms {
                Some(t) => vec![num(t.term1), num(t.term2), num(t.term3), num(t.term4), num(t.total)],
                None => vec![String::new(); 5],
            };
            let mut row = vec![
                c.domain_size.to_string(),
                num(c.marginal_exponent),
                num(c.sigma_sq),
                num(c.lambda),
                c.n.to_string(),
                num(c.zeta),
                num(c.delta),
                c.filter.label().to_string(),
                window_label(r).to_string(),
                num(r.kappa_delta_sq),
                num(r.effective_dimension),
                num(r.mc_risk),
                num(r.mc_standard_error),
            ];
            row.extend(terms);
            row.push(r.dominated.map(|d| d.to_string()).unwrap_or_default());
            row
        })
        .collect();
    write_csv(
        &out.join("bounds.csv"),
        &json(cfg),
        &[
            "domain_size",
            "marginal_exponent",
            "sigma_sq",
            "lambda",
            "n",
            "zeta",
            "delta",
            "method",
            "status",
            "kappa_delta_sq",
            "effective_dimension",
            "mc_risk",
            "mc_standard_error",
            "term1",
            "term2",
            "term3",
            "term4",
            "total",
            "dominated",
        ],
        &table,
    )?;
    let checked = rows.iter().filter(|r| r.window_ok).count();
    let dominated = rows.iter().filter(|r| r.dominated == Some(true)).count();
    let mut text = String::new();
    for r in &rows {
        let c = &r.case;
        let _ = write!(
            text,
            "N={:<4} a={:<3} sigma2={:<5} lambda={:<6} {:<5} {}",
            c.domain_size,
            c.marginal_exponent,
            c.sigma_sq,
            c.lambda,
            c.filter.label(),
            window_label(r)
        );
        match (&r.terms, r.dominated) {
            (Some(t), Some(d)) => {
                let _ = writeln!(text, "  risk {:.3e} ± {:.1e}  bound {:.3e}  dominated {d}", r.mc_risk, r.mc_standard_error, t.total);
            }
            _ => {
                let _ = writeln!(text, "  risk {:.3e}", r.mc_risk);
            }
        }
    }
    let _ = writeln!(text, "{dominated}/{checked} window-passing configs dominated");
    Ok(Outcome { report: rows, text })
}

fn window_label(row: &BoundRow) -> &'static str {
    if row.window_ok {
        "window: ok"
    } else {
        "window: fail"
    }
}

/// Feature map of a concentration model.
pub fn feature_map(model: &FeatureModel) -> Result<FeatureMap, CliError> {
    match *model {
        FeatureModel::Discrete { domain_size, exponent } => Ok(FeatureMap::discrete(&power_law_masses(domain_size, exponent)?)?),
        FeatureModel::GaussianGrid {
            domain_size,
            exponent,
            bandwidth,
        } => {
            let grid = Array2::from_shape_fn((domain_size, 1), |(i, _)| (i + 1) as f64);
            let k = kernel_matrix(&KernelSpec::gaussian(bandwidth)?, &Points::Vectors(grid))?;
            Ok(FeatureMap::from_kernel(k.view(), &power_law_masses(domain_size, exponent)?)?)
        }
    }
}

fn model_label(model: &FeatureModel) -> String {
    match model {
        FeatureModel::Discrete { domain_size, exponent } => format!("discrete(N={domain_size},a={exponent})"),
        FeatureModel::GaussianGrid {
            domain_size,
            exponent,
            bandwidth,
        } => format!("gaussian_grid(N={domain_size},a={exponent},h={bandwidth})"),
    }
}

/// One row per concentration case.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationRow {
    pub case: ConcentrationCase,
    pub result: ConcentrationResult,
}

pub fn concentration(cfg: &ConcentrationConfig, out: &Path) -> Result<Outcome<Vec<ConcentrationRow>>, CliError> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for (i, case) in cfg.resolved_cases().into_iter().enumerate() {
        let map = feature_map(&case.model)?;
        let r_min = minimal_deviation_level(case.lambda, case.delta, map.kappa_delta_sq(case.delta), case.n);
        let result = concentration_trial(
            &map,
            case.n,
            case.lambda,
            case.delta,
            case.r_multiple * r_min,
            cfg.replicates,
            replicate_seed(cfg.seed, i as u64),
        )?;
        rows.push(ConcentrationRow { case, result });
    }
    ensure_dir(out)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            let r = &row.result;
            vec![
                model_label(&row.case.model),
                r.n.to_string(),
                num(r.lambda),
                num(r.delta),
                num(row.case.r_multiple),
                num(r.r),
                num(r.effective_dimension),
                num(r.kappa_sq),
                num(r.kappa_delta_sq),
                num(r.empirical_tail_prob),
                num(r.tail_bound),
                num(r.empirical_second_moment),
                num(r.moment_bound),
                r.holds().to_string(),
            ]
        })
        .collect();
    write_csv(
        &out.join("concentration.csv"),
        &json(cfg),
        &[
            "model",
            "n",
            "lambda",
            "delta",
            "r_multiple",
            "r",
            "effective_dimension",
            "kappa_sq",
            "kappa_delta_sq",
            "empirical_tail_prob",
            "tail_bound",
            "empirical_second_moment",
            "moment_bound",
            "holds",
        ],
        &table,
    )?;
    let held = rows.iter().filter(|r| r.result.holds()).count();
    let mut text = String::new();
    for row in &rows {
        let r = &row.result;
        let _ = writeln!(
            text,
            "{:<36} n={:<5} lambda={:<5} r={:.3}  tail {:.4} <= {:.4}  moment {:.3e} <= {:.3e}  {}",
            model_label(&row.case.model),
            r.n,
            r.lambda,
            r.r,
            r.empirical_tail_prob,
            r.tail_bound,
            r.empirical_second_moment,
            r.moment_bound,
            if r.holds() { "ok" } else { "VIOLATED" }
        );
    }
    let _ = writeln!(text, "{held}/{} configs within both bounds", rows.len());
    Ok(Outcome { report: rows, text })
}

/// Per-method outcome of a precomputed-kernel fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecomputedResult {
    pub method: String,
    pub lambda_selected: f64,
    pub validation_mse: f64,
    pub test_mse: f64,
    pub effective_dimension: f64,
    pub retained_components: usize,
    pub train_mse: f64,
}

pub fn fit_precomputed(cfg: &FitPrecomputedConfig, out: &Path) -> Result<Outcome<Vec<PrecomputedResult>>, CliError> {
    cfg.validate()?;
    let (Some(kpath), Some(spath), Some(lpath)) = (&cfg.kernel_path, &cfg.splits_path, &cfg.labels_path) else {
        unreachable!("validated above");
    };
    let (kernel, splits) = load_precomputed(kpath, spath)?;
    let size = match &kernel {
        KernelSpec::Precomputed(p) => p.size(),
        _ => unreachable!("load_precomputed returns a precomputed kernel"),
    };
    let labels = load_labels(lpath, size)?;
    let pick = |idx: &[usize]| -> Vec<f64> { idx.iter().map(|&i| labels[i]).collect() };
    let train = Points::Indices(splits.train.clone());
    let val = Points::Indices(splits.validation.clone());
    let test = Points::Indices(splits.test.clone());
    let (y_train, y_val, y_test) = (pick(&splits.train), pick(&splits.validation), pick(&splits.test));
    if y_val.is_empty() || y_test.is_empty() {
        return Err(CliError::Config("validation and test splits must be nonempty".into()));
    }
    let ctx = prepare_grid(&train, &y_train, &kernel, Some(&val))?;
    let kappa_sq = kernel.kappa_sq(&train)?;
    let lambdas = cfg.lambdas.linear();
    let mut results = Vec::new();
    for &kind in &cfg.filters {
        let filter = FilterFamily::new(kind, kappa_sq)?;
        let records = fit_grid(&ctx, &filter, &lambdas)?;
        let mses = records
            .iter()
            .map(|r| mean_squared_error(r.eval_predictions.as_deref().unwrap_or_default(), &y_val))
            .collect::<Result<Vec<_>, _>>()?;
        let (idx, lambda) = select_lambda(&lambdas, &mses)?;
        let est = ctx.estimator(&filter, lambda)?;
        results.push(PrecomputedResult {
            method: kind.label().to_string(),
            lambda_selected: lambda,
            validation_mse: mses[idx],
            test_mse: mean_squared_error(&est.predict(&test)?, &y_test)?,
            effective_dimension: empirical_effective_dimension(&ctx, lambda)?,
            retained_components: ctx.retained_components(lambda),
            train_mse: mean_squared_error(&est.predict(&train)?, &y_train)?,
        });
    }
    ensure_dir(out)?;
    let table: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            vec![
                r.method.clone(),
                num(r.lambda_selected),
                num(r.validation_mse),
                num(r.test_mse),
                num(r.effective_dimension),
                r.retained_components.to_string(),
                num(r.train_mse),
            ]
        })
        .collect();
    write_csv(
        &out.join("fit_precomputed.csv"),
        &json(cfg),
        &[
            "method",
            "lambda_selected",
            "validation_mse",
            "test_mse",
            "effective_dimension",
            "retained_components",
            "train_mse",
        ],
        &table,
    )?;
    let (n_train, n_val, n_test) = splits.sizes();
    let mut text = format!("splits: {n_train} train, {n_val} validation, {n_test} test\n");
    for r in &results {
        let _ = writeln!(
            text,
            "{:<10} lambda {:.4e}  test MSE {:.4e}  effective dimension {:.3}",
            r.method, r.lambda_selected, r.test_mse, r.effective_dimension
        );
    }
    Ok(Outcome { report: results, text })
}

/// Qualification outcome for one family and one `ξ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualificationRow {
    pub method: String,
    pub xi: f64,
    pub slack: f64,
    pub holds: bool,
    /// Smallest constant that would make the check pass.
    pub ratio: f64,
    pub witness_lambda: f64,
    pub witness_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionRow {
    pub method: String,
    pub condition: &'static str,
    pub check: ConditionCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterVerification {
    pub conditions: Vec<ConditionRow>,
    pub qualification: Vec<QualificationRow>,
}

impl FilterVerification {
    pub fn qualification(&self, method: &str, xi: f64) -> Option<&QualificationRow> {
        self.qualification.iter().find(|q| q.method == method && q.xi == xi)
    }
}

pub fn filters_verify(cfg: &FiltersVerifyConfig, out: &Path) -> Result<Outcome<FilterVerification>, CliError> {
    cfg.validate()?;
    let lambdas = cfg.lambdas.logarithmic();
    let ts = cfg.spectrum.logarithmic();
    let families = [
        (FilterFamily::ridge(cfg.kappa_sq)?, 1.0),
        (FilterFamily::cutoff(cfg.kappa_sq)?, 1.0),
        (FilterFamily::landweber(cfg.kappa_sq)?, cfg.landweber_slack),
    ];
    let mut conditions = Vec::new();
    let mut qualification = Vec::new();
    for (filter, slack) in &families {
        let report = verify_family_conditions(filter, &lambdas, &ts)?;
        for (name, check) in [("R1", report.r1), ("R2", report.r2), ("R3", report.r3)] {
            conditions.push(ConditionRow {
                method: filter.label().to_string(),
                condition: name,
                check,
            });
        }
        for &xi in &cfg.xis {
            let q = empirical_qualification(filter, xi, &lambdas, &ts, *slack)?;
            qualification.push(QualificationRow {
                method: filter.label().to_string(),
                xi,
                slack: *slack,
                holds: q.holds,
                ratio: q.ratio,
                witness_lambda: q.worst.lambda,
                witness_t: q.worst.t,
            });
        }
    }
    ensure_dir(out)?;
    let mut table: Vec<Vec<String>> = conditions
        .iter()
        .map(|c| {
            vec![
                c.method.clone(),
                c.condition.to_string(),
                String::new(),
                String::new(),
                c.check.holds.to_string(),
                c.check.strict.to_string(),
                num(c.check.worst.value),
                num(c.check.worst.lambda),
                num(c.check.worst.t),
            ]
        })
        .collect();
    table.extend(qualification.iter().map(|q| {
        vec![
            q.method.clone(),
            "qualification".to_string(),
            num(q.xi),
            num(q.slack),
            q.holds.to_string(),
            String::new(),
            num(q.ratio),
            num(q.witness_lambda),
            num(q.witness_t),
        ]
    }));
    write_csv(
        &out.join("filters_verify.csv"),
        &json(cfg),
        &["method", "check", "xi", "slack", "holds", "strict", "worst_value", "witness_lambda", "witness_t"],
        &table,
    )?;
    let mut text = format!(
        "grids: {} lambda values in [{}, {}], {} spectral points in [{}, {}]\n",
        lambdas.len(),
        cfg.lambdas.min,
        cfg.lambdas.max,
        ts.len(),
        cfg.spectrum.min,
        cfg.spectrum.max
    );
    let _ = writeln!(text, "landweber qualification slack: {}", cfg.landweber_slack);
    for c in &conditions {
        let verdict = match (c.check.holds, c.check.weak) {
            (true, _) => "pass",
            (false, true) => "pass (equality attained)",
            (false, false) => "FAIL",
        };
        let _ = writeln!(
            text,
            "{:<10} {}  {:<26} sup {:.6} at lambda={:.4e} t={:.4e}",
            c.method, c.condition, verdict, c.check.worst.value, c.check.worst.lambda, c.check.worst.t
        );
    }
    for q in &qualification {
        let _ = writeln!(
            text,
            "{:<10} xi={:<4} slack={:<4} {:<4}  needed constant {:.4e} at lambda={:.4e} t={:.4e}",
            q.method,
            q.xi,
            q.slack,
            if q.holds { "pass" } else { "FAIL" },
            q.ratio,
            q.witness_lambda,
            q.witness_t
        );
    }
    Ok(Outcome {
        report: FilterVerification {
            conditions,
            qualification,
        },
        text,
    })
}
