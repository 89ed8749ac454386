//! The spectral-filter estimator `f̂_λ = Σ γ̂_i K(x_i, ·)` with dual
//! coefficients `γ̂ = g_λ(K/n) y / n`.
//!
//! Two routes compute the same coefficients:
//!
//! * the dense route eigendecomposes `K/n` once ([`prepare_grid`]) and then
//!   sweeps any number of `λ` values cheaply;
//! * for the discrete kernel `K(x, x̃) = 1{x = x̃}` the spectrum of `K/n` is
//!   known in closed form (one eigenvalue `c/n` per distinct point seen `c`
//!   times, zeros elsewhere), which [`DiscreteGroups`] exploits so that large
//!   samples never need an `n × n` matrix.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, ArrayView1};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::filters::{FilterFamily, FilterKind};
use crate::kernels::{cross_kernel, kernel_matrix, KernelSpec, Points};
use crate::spectral::{eigh_symmetric, SymmetricSpectrum};

/// Eigenvalues below this fraction of the largest one are treated as zero.
pub const RELATIVE_EIGEN_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct FittedEstimator {
    train_points: Points,
    dual_coefficients: Vec<f64>,
    kernel: KernelSpec,
    filter: FilterFamily,
    lambda: f64,
}

impl FittedEstimator {
    pub fn from_parts(
        train_points: Points,
        dual_coefficients: Vec<f64>,
        kernel: KernelSpec,
        filter: FilterFamily,
        lambda: f64,
    ) -> Result<Self> {
        if train_points.len() != dual_coefficients.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} training points but {} coefficients",
                train_points.len(),
                dual_coefficients.len()
            )));
        }
        Ok(Self {
            train_points,
            dual_coefficients,
            kernel,
            filter,
            lambda,
        })
    }

    pub fn train_points(&self) -> &Points {
        &self.train_points
    }

    pub fn dual_coefficients(&self) -> &[f64] {
        &self.dual_coefficients
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn filter(&self) -> &FilterFamily {
        &self.filter
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Evaluates `Σ_i γ̂_i K(x_i, x)` at each new point.
    pub fn predict(&self, new: &Points) -> Result<Vec<f64>> {
        let cross = cross_kernel(&self.kernel, &self.train_points, new)?;
        Ok(cross.dot(&ArrayView1::from(&self.dual_coefficients[..])).to_vec())
    }
}

fn check_labels(points: &Points, y: &[f64]) -> Result<()> {
    if points.is_empty() {
        return Err(invalid("points", "need at least one training point"));
    }
    if points.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} training points but {} labels",
            points.len(),
            y.len()
        )));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(invalid("labels", format!("label {i} is not finite")));
    }
    Ok(())
}

/// Eigenvalues with roundoff negatives and values below the relative floor
/// replaced by exact zeros.
fn floored(eigenvalues: &[f64]) -> Vec<f64> {
    let top = eigenvalues.iter().fold(0.0_f64, |a, &v| a.max(v));
    let floor = RELATIVE_EIGEN_FLOOR * top;
    eigenvalues
        .iter()
        .map(|&v| if v > floor && v > 0.0 { v } else { 0.0 })
        .collect()
}

fn check_filter_range(filter: &FilterFamily, top: f64) -> Result<()> {
    if let FilterKind::Landweber { step } = filter.kind() {
        // The iteration only contracts while ηt < 1 on the whole spectrum.
        if step * top >= 1.0 || top > filter.kappa_sq() * (1.0 + 1e-9) {
            return Err(Error::Precondition(format!(
                "landweber needs the spectrum of K/n inside (0, κ²] = (0, {}], largest eigenvalue is {top}",
                filter.kappa_sq()
            )));
        }
    }
    Ok(())
}

fn check_lambdas(filter: &FilterFamily, lambdas: &[f64]) -> Result<()> {
    for &l in lambdas {
        filter.check_lambda(l)?;
    }
    if lambdas.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("lambdas", "grid must be sorted ascending"));
    }
    Ok(())
}

/// Fits `f̂_λ` by applying `g_λ` to the eigendecomposition of `K/n`.
pub fn fit(
    points: &Points,
    y: &[f64],
    kernel: &KernelSpec,
    filter: &FilterFamily,
    lambda: f64,
) -> Result<FittedEstimator> {
    check_labels(points, y)?;
    filter.check_lambda(lambda)?;
    let n = points.len();
    let k = kernel_matrix(kernel, points)? / n as f64;
    let spectrum = eigh_symmetric(k.view())?;
    let eig = floored(spectrum.eigenvalues());
    check_filter_range(filter, eig.first().copied().unwrap_or(0.0))?;
    // g_λ(K/n) assembled as U diag(g) Uᵀ, then applied to y / n.
    let weights: Vec<f64> = eig.iter().map(|&t| filter.weight(lambda, t)).collect();
    let u = spectrum.eigenvectors();
    let mut scaled = u.clone();
    for (mut col, w) in scaled.columns_mut().into_iter().zip(&weights) {
        col *= *w;
    }
    let operator = scaled.dot(&u.t());
    let gamma = operator.dot(&ArrayView1::from(y)) / n as f64;
    FittedEstimator::from_parts(points.clone(), gamma.to_vec(), kernel.clone(), *filter, lambda)
}

/// Everything needed to evaluate the estimator for many `λ` after a single
/// eigendecomposition of `K/n`. Immutable and shareable across threads.
#[derive(Debug, Clone)]
pub struct GridFitContext {
    n: usize,
    spectrum: SymmetricSpectrum,
    eigenvalues: Vec<f64>,
    rotated_labels: Array1<f64>,
    projected_cross: Option<Array2<f64>>,
    train_points: Points,
    kernel: KernelSpec,
}

/// One point of a grid sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRecord {
    pub lambda: f64,
    pub dual_coefficients: Vec<f64>,
    pub eval_predictions: Option<Vec<f64>>,
}

/// Eigendecomposes `K/n`, rotates the labels, and (optionally) projects the
/// cross kernel of a fixed evaluation set onto the eigenvectors.
pub fn prepare_grid(
    points: &Points,
    y: &[f64],
    kernel: &KernelSpec,
    eval_points: Option<&Points>,
) -> Result<GridFitContext> {
    check_labels(points, y)?;
    let n = points.len();
    let k = kernel_matrix(kernel, points)? / n as f64;
    let spectrum = eigh_symmetric(k.view())?;
    let u = spectrum.eigenvectors();
    let rotated_labels = u.t().dot(&ArrayView1::from(y));
    let projected_cross = match eval_points {
        Some(eval) if !eval.is_empty() => Some(cross_kernel(kernel, points, eval)?.dot(u)),
        _ => None,
    };
    Ok(GridFitContext {
        n,
        eigenvalues: floored(spectrum.eigenvalues()),
        spectrum,
        rotated_labels,
        projected_cross,
        train_points: points.clone(),
        kernel: kernel.clone(),
    })
}

impl GridFitContext {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spectrum(&self) -> &SymmetricSpectrum {
        &self.spectrum
    }

    /// Eigenvalues of `K/n` after flooring roundoff to zero, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn rotated_labels(&self) -> ArrayView1<'_, f64> {
        self.rotated_labels.view()
    }

    pub fn has_eval_points(&self) -> bool {
        self.projected_cross.is_some()
    }

    /// `g_λ(Λ) Uᵀy / n`, the estimator in eigenvector coordinates.
    fn spectral_weights(&self, filter: &FilterFamily, lambda: f64) -> Array1<f64> {
        let n = self.n as f64;
        Array1::from_iter(
            self.eigenvalues
                .iter()
                .zip(self.rotated_labels.iter())
                .map(|(&t, &r)| filter.weight(lambda, t) * r / n),
        )
    }

    fn check(&self, filter: &FilterFamily, lambda: f64) -> Result<()> {
        filter.check_lambda(lambda)?;
        check_filter_range(filter, self.eigenvalues.first().copied().unwrap_or(0.0))
    }

    pub fn coefficients(&self, filter: &FilterFamily, lambda: f64) -> Result<Vec<f64>> {
        self.check(filter, lambda)?;
        let w = self.spectral_weights(filter, lambda);
        Ok(self.spectrum.eigenvectors().dot(&w).to_vec())
    }

    /// Predictions at the evaluation points supplied to [`prepare_grid`].
    pub fn eval_predictions(&self, filter: &FilterFamily, lambda: f64) -> Result<Vec<f64>> {
        self.check(filter, lambda)?;
        let cross = self
            .projected_cross
            .as_ref()
            .ok_or_else(|| Error::Precondition("context was prepared without evaluation points".into()))?;
        Ok(cross.dot(&self.spectral_weights(filter, lambda)).to_vec())
    }

    pub fn estimator(&self, filter: &FilterFamily, lambda: f64) -> Result<FittedEstimator> {
        FittedEstimator::from_parts(
            self.train_points.clone(),
            self.coefficients(filter, lambda)?,
            self.kernel.clone(),
            *filter,
            lambda,
        )
    }

    /// Number of eigenvalues retained by the cut-off filter at `λ`.
    pub fn retained_components(&self, lambda: f64) -> usize {
        self.eigenvalues.iter().filter(|&&t| t > 0.0 && t >= lambda).count()
    }
}

/// Runs the estimator over an ascending `λ` grid, in parallel over `λ`.
pub fn fit_grid(ctx: &GridFitContext, filter: &FilterFamily, lambdas: &[f64]) -> Result<Vec<GridRecord>> {
    check_lambdas(filter, lambdas)?;
    lambdas
        .par_iter()
        .map(|&lambda| {
            let dual_coefficients = ctx.coefficients(filter, lambda)?;
            let eval_predictions = if ctx.has_eval_points() {
                Some(ctx.eval_predictions(filter, lambda)?)
            } else {
                None
            };
            Ok(GridRecord {
                lambda,
                dual_coefficients,
                eval_predictions,
            })
        })
        .collect()
}

/// `Σ_j λ̂_j/(λ̂_j + λ)` over the eigenvalues of `K/n`.
pub fn empirical_effective_dimension(ctx: &GridFitContext, lambda: f64) -> Result<f64> {
    effective_dimension_of(ctx.eigenvalues(), lambda)
}

pub(crate) fn effective_dimension_of(eigenvalues: &[f64], lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda", format!("must be positive and finite, got {lambda}")));
    }
    Ok(eigenvalues
        .iter()
        .map(|&t| {
            let t = t.max(0.0);
            t / (t + lambda)
        })
        .sum())
}

/// Closed-form spectrum of `K/n` for the discrete kernel on a sample.
///
/// Each distinct point `x` seen `c_x` times contributes one eigenvalue
/// `c_x/n` (eigenvector: normalized indicator of its occurrences) and
/// `c_x − 1` zero eigenvalues (contrasts within the group). Hence
///
/// * `γ̂_i = (g_λ(c/n)·ȳ + g_λ(0)·(y_i − ȳ)) / n` for `x_i` in a group with
///   count `c` and mean label `ȳ`,
/// * `f̂_λ(x) = (c_x/n)·g_λ(c_x/n)·ȳ_x`, and `0` at unseen points.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteGroups {
    n: usize,
    values: Vec<usize>,
    counts: Vec<usize>,
    means: Vec<f64>,
    group_of: Vec<usize>,
    labels: Vec<f64>,
}

impl DiscreteGroups {
    pub fn new(xs: &[usize], y: &[f64]) -> Result<Self> {
        check_labels(&Points::Discrete(xs.to_vec()), y)?;
        if xs.contains(&0) {
            return Err(Error::Domain {
                point: "0".into(),
                reason: "discrete domain points are positive integers".into(),
            });
        }
        let mut sums: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
        for (&x, &v) in xs.iter().zip(y) {
            let e = sums.entry(x).or_insert((0, 0.0));
            e.0 += 1;
            e.1 += v;
        }
        let mut values = Vec::with_capacity(sums.len());
        let mut counts = Vec::with_capacity(sums.len());
        let mut means = Vec::with_capacity(sums.len());
        for (x, (c, s)) in &sums {
            values.push(*x);
            counts.push(*c);
            means.push(s / *c as f64);
        }
        let group_of = xs
            .iter()
            .map(|x| values.binary_search(x).expect("value was inserted"))
            .collect();
        Ok(Self {
            n: xs.len(),
            values,
            counts,
            means,
            group_of,
            labels: y.to_vec(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Distinct sample points, ascending.
    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// All `n` eigenvalues of `K/n`, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.n as f64;
        let mut eig: Vec<f64> = self.counts.iter().map(|&c| c as f64 / n).collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        eig.resize(self.n, 0.0);
        eig
    }

    fn check(&self, filter: &FilterFamily, lambda: f64) -> Result<()> {
        filter.check_lambda(lambda)?;
        let top = self.counts.iter().max().copied().unwrap_or(0) as f64 / self.n as f64;
        check_filter_range(filter, top)
    }

    pub fn coefficients(&self, filter: &FilterFamily, lambda: f64) -> Result<Vec<f64>> {
        self.check(filter, lambda)?;
        let n = self.n as f64;
        let null_weight = filter.weight(lambda, 0.0);
        let group_weight: Vec<f64> = self.counts.iter().map(|&c| filter.weight(lambda, c as f64 / n)).collect();
        Ok(self
            .group_of
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                let ybar = self.means[g];
                (group_weight[g] * ybar + null_weight * (self.labels[i] - ybar)) / n
            })
            .collect())
    }

    /// `(c/n)·g_λ(c/n)` per distinct point: the factor mapping a group's mean
    /// label to the prediction at that point.
    pub fn shrinkage(&self, filter: &FilterFamily, lambda: f64) -> Result<Vec<f64>> {
        self.check(filter, lambda)?;
        let n = self.n as f64;
        Ok(self
            .counts
            .iter()
            .map(|&c| {
                let t = c as f64 / n;
                t * filter.weight(lambda, t)
            })
            .collect())
    }

    /// Predictions at every point of the domain `{1, …, size}`; entry `x − 1`
    /// holds `f̂_λ(x)`.
    pub fn domain_predictions(&self, filter: &FilterFamily, lambda: f64, size: usize) -> Result<Vec<f64>> {
        if let Some(&last) = self.values.last() {
            if last > size {
                return Err(Error::Domain {
                    point: last.to_string(),
                    reason: format!("outside the domain {{1, …, {size}}}"),
                });
            }
        }
        let factor = self.shrinkage(filter, lambda)?;
        let mut out = vec![0.0; size];
        for ((&x, &m), &f) in self.values.iter().zip(&self.means).zip(&factor) {
            out[x - 1] = f * m;
        }
        Ok(out)
    }

    /// `Σ_j λ̂_j/(λ̂_j + λ)` over the closed-form spectrum.
    pub fn effective_dimension(&self, lambda: f64) -> Result<f64> {
        let n = self.n as f64;
        let eig: Vec<f64> = self.counts.iter().map(|&c| c as f64 / n).collect();
        effective_dimension_of(&eig, lambda)
    }
}
