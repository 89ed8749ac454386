//! Population-side quantities: eigenvalue decay models `{t_j²}`, target
//! coefficients `θ_j`, source norms, the effective dimension
//! `d_λ = Σ t_j²/(t_j² + λ)`, the four-term excess-risk bound, and the
//! `λ(n)` schedules matched to each decay law.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectral::eigh_symmetric;

/// Default number of retained eigenvalues.
pub const DEFAULT_TRUNCATION: usize = 1 << 14;

/// `8/3 + 2√(5/3)`, the sample-size factor in the admissible `λ` window.
pub fn window_constant() -> f64 {
    8.0 / 3.0 + 2.0 * (5.0_f64 / 3.0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decay {
    /// Eigenvalues listed directly (sorted descending on construction).
    Explicit { values: Vec<f64> },
    /// `t_j² = C j^{−2ν}`.
    Polynomial { c: f64, nu: f64 },
    /// `t_j² = C e^{−αj}`.
    Exponential { c: f64, alpha: f64 },
    /// `t_j² = C e^{−αj²}`.
    Gaussian { c: f64, alpha: f64 },
    /// Point masses of `μ(x) ∝ x^{−a}` on `{1, …, N}`, which are the
    /// eigenvalues of the discrete kernel's integral operator.
    MarginalPower { domain_size: usize, exponent: f64 },
}

/// Normalized masses `μ(x) ∝ x^{−a}` for `x = 1, …, N`.
pub fn power_law_masses(domain_size: usize, exponent: f64) -> Result<Vec<f64>> {
    if domain_size == 0 {
        return Err(invalid("domain_size", "must be at least 1"));
    }
    if !(exponent >= 0.0 && exponent.is_finite()) {
        return Err(invalid("exponent", format!("must be nonnegative, got {exponent}")));
    }
    let raw: Vec<f64> = (1..=domain_size).map(|x| (x as f64).powf(-exponent)).collect();
    let total: f64 = raw.iter().rev().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {v}")))
    }
}

/// `‖f‖²` in a source space, which may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceNorm {
    Finite(f64),
    Infinite,
}

impl SourceNorm {
    pub fn value(&self) -> Option<f64> {
        match self {
            SourceNorm::Finite(v) => Some(*v),
            SourceNorm::Infinite => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, SourceNorm::Finite(_))
    }
}

/// Eigenvalues `t_j²` (descending, truncated) and target coefficients `θ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumModel {
    decay: Decay,
    truncation: usize,
    eigenvalues: Vec<f64>,
    omitted_trace_bound: f64,
    theta: Vec<f64>,
}

impl SpectrumModel {
    pub fn new(decay: Decay, truncation: usize) -> Result<Self> {
        if truncation == 0 {
            return Err(invalid("truncation", "must be at least 1"));
        }
        let (eigenvalues, omitted) = match &decay {
            Decay::Explicit { values } => {
                if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                    return Err(invalid("values", format!("eigenvalues must be nonnegative, got {v}")));
                }
                let mut sorted = values.clone();
                sorted.sort_by(|a, b| b.total_cmp(a));
                let omitted: f64 = sorted.iter().skip(truncation).sum();
                sorted.truncate(truncation);
                (sorted, omitted)
            }
            Decay::Polynomial { c, nu } => {
                positive("c", *c)?;
                positive("nu", *nu)?;
                let vals = (1..=truncation).map(|j| c * (j as f64).powf(-2.0 * nu)).collect();
                // Σ_{j>J} j^{−2ν} ≤ ∫_J^∞ s^{−2ν} ds when 2ν > 1.
                let omitted = if 2.0 * nu > 1.0 {
                    c * (truncation as f64).powf(1.0 - 2.0 * nu) / (2.0 * nu - 1.0)
                } else {
                    f64::INFINITY
                };
                (vals, omitted)
            }
            Decay::Exponential { c, alpha } => {
                positive("c", *c)?;
                positive("alpha", *alpha)?;
                let vals = (1..=truncation).map(|j| c * (-alpha * j as f64).exp()).collect();
                let omitted = c * (-alpha * (truncation + 1) as f64).exp() / -(-alpha).exp_m1();
                (vals, omitted)
            }
            Decay::Gaussian { c, alpha } => {
                positive("c", *c)?;
                positive("alpha", *alpha)?;
                let vals = (1..=truncation)
                    .map(|j| c * (-alpha * (j * j) as f64).exp())
                    .collect();
                // e^{−αj²} ≤ e^{−α(J+1)j} for j > J, a geometric tail.
                let next = (truncation + 1) as f64;
                let omitted = c * (-alpha * next * next).exp() / -(-alpha * next).exp_m1();
                (vals, omitted)
            }
            Decay::MarginalPower { domain_size, exponent } => {
                let masses = power_law_masses(*domain_size, *exponent)?;
                let omitted = masses.iter().skip(truncation).sum();
                (masses.into_iter().take(truncation).collect(), omitted)
            }
        };
        Ok(Self {
            decay,
            truncation,
            eigenvalues,
            omitted_trace_bound: omitted,
            theta: Vec::new(),
        })
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        let len = values.len().max(1);
        Self::new(Decay::Explicit { values }, len)
    }

    pub fn marginal_power(domain_size: usize, exponent: f64) -> Result<Self> {
        Self::new(
            Decay::MarginalPower {
                domain_size,
                exponent,
            },
            domain_size.max(1),
        )
    }

    /// Attaches target coefficients `θ_j`.
    pub fn with_theta(mut self, theta: Vec<f64>) -> Result<Self> {
        if theta.len() > self.eigenvalues.len() {
            return Err(invalid(
                "theta",
                format!("{} coefficients for {} eigenvalues", theta.len(), self.eigenvalues.len()),
            ));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(invalid("theta", "coefficients must be finite"));
        }
        self.theta = theta;
        Ok(self)
    }

    /// Target coefficients for a function on the discrete domain: with the
    /// discrete kernel the eigenfunctions are `1{x = j}/√μ(j)` (masses are
    /// already descending in `x` for `μ ∝ x^{−a}`), so `θ_j = f(j)·√μ(j)`.
    pub fn with_discrete_target(self, values: &[f64]) -> Result<Self> {
        if !matches!(self.decay, Decay::MarginalPower { .. }) {
            return Err(invalid("decay", "discrete targets need a marginal_power model"));
        }
        if values.len() > self.eigenvalues.len() {
            return Err(invalid("target", "more values than domain points"));
        }
        let theta = values
            .iter()
            .zip(&self.eigenvalues)
            .map(|(f, p)| f * p.sqrt())
            .collect();
        self.with_theta(theta)
    }

    pub fn decay(&self) -> &Decay {
        &self.decay
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Upper bound on `Σ_{j > J_max} t_j²`, the trace lost to truncation.
    pub fn omitted_trace_bound(&self) -> f64 {
        self.omitted_trace_bound
    }

    /// `t_1²`, or 0 for an empty model.
    pub fn top_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn effective_dimension(&self, lambda: f64) -> Result<f64> {
        positive("lambda", lambda)?;
        Ok(self.eigenvalues.iter().rev().map(|&t| t / (t + lambda)).sum())
    }

    /// `Σ θ_j² / t_j^{2(1+ζ)}`.
    pub fn source_norm_sq(&self, zeta: f64) -> Result<SourceNorm> {
        if !(zeta >= 0.0 && zeta.is_finite()) {
            return Err(invalid("zeta", format!("must be nonnegative, got {zeta}")));
        }
        let mut total = 0.0;
        for (theta, &t) in self.theta.iter().zip(&self.eigenvalues) {
            if *theta == 0.0 {
                continue;
            }
            if t <= 0.0 {
                return Ok(SourceNorm::Infinite);
            }
            total += theta * theta * t.powf(-(1.0 + zeta));
        }
        Ok(SourceNorm::Finite(total))
    }

    /// `(Σ θ_j² / t_j^{2(1+ζ)})^{1/2}`.
    pub fn source_norm(&self, zeta: f64) -> Result<SourceNorm> {
        Ok(match self.source_norm_sq(zeta)? {
            SourceNorm::Finite(v) => SourceNorm::Finite(v.sqrt()),
            SourceNorm::Infinite => SourceNorm::Infinite,
        })
    }

    /// Evaluates the four-term excess-risk bound.
    pub fn theorem_bound(&self, p: &BoundParams) -> Result<BoundTerms> {
        p.validate()?;
        if !check_lambda_window(p.lambda, p.n, p.delta, p.kappa_delta_sq) {
            return Err(Error::Precondition(format!(
                "lambda = {} outside the admissible window for n = {}, delta = {}, kappa_delta_sq = {}",
                p.lambda, p.n, p.delta, p.kappa_delta_sq
            )));
        }
        let infinite = |z: f64| Error::Precondition(format!("target has infinite source norm at zeta = {z}"));
        let norm_zeta = self.source_norm_sq(p.zeta)?.value().ok_or_else(|| infinite(p.zeta))?;
        let norm_h = self.source_norm_sq(0.0)?.value().ok_or_else(|| infinite(0.0))?;
        let d = self.effective_dimension(p.lambda)?;
        let n = p.n as f64;
        let t1 = self.top_eigenvalue();
        let term1 = 2f64.powf(p.zeta + 3.0) * norm_zeta * p.lambda.powf(p.zeta + 1.0);
        let term2 = 4.0 * d * p.sigma_sq / n;
        let term3 = 4.0
            * d
            * (norm_h * t1 + p.kappa_sq * p.sigma_sq / (p.lambda * n))
            * (-3.0 * p.lambda.powf(1.0 - p.delta) * n / (28.0 * p.kappa_delta_sq)).exp();
        let term4 = if p.zeta > 1.0 {
            16.0 * p.zeta * p.zeta
                * 1.5f64.powf(p.zeta - 1.0)
                * norm_zeta
                * (t1 + p.lambda).powf(p.zeta - 1.0)
                * p.kappa_sq
                * p.kappa_sq
                * (34.0 / n + 15.0 / (n * n))
        } else {
            0.0
        };
        Ok(BoundTerms {
            term1,
            term2,
            term3,
            term4,
            total: term1 + term2 + term3 + term4,
        })
    }
}

/// Inputs of [`SpectrumModel::theorem_bound`] besides the model itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub zeta: f64,
    pub sigma_sq: f64,
    pub kappa_sq: f64,
    pub kappa_delta_sq: f64,
    pub delta: f64,
    pub lambda: f64,
    pub n: usize,
}

impl BoundParams {
    fn validate(&self) -> Result<()> {
        if !(self.zeta >= 0.0 && self.zeta.is_finite()) {
            return Err(invalid("zeta", format!("must be nonnegative, got {}", self.zeta)));
        }
        if !(self.sigma_sq >= 0.0 && self.sigma_sq.is_finite()) {
            return Err(invalid("sigma_sq", format!("must be nonnegative, got {}", self.sigma_sq)));
        }
        positive("kappa_sq", self.kappa_sq)?;
        positive("kappa_delta_sq", self.kappa_delta_sq)?;
        positive("lambda", self.lambda)?;
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(invalid("delta", format!("must lie in [0, 1], got {}", self.delta)));
        }
        if self.n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundTerms {
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
    pub term4: f64,
    pub total: f64,
}

/// Whether `(8/3 + 2√(5/3))·κ_δ²/n ≤ λ^{1−δ} ≤ κ_δ²`.
pub fn check_lambda_window(lambda: f64, n: usize, delta: f64, kappa_delta_sq: f64) -> bool {
    if n == 0 || !(lambda > 0.0) || !(0.0..=1.0).contains(&delta) {
        return false;
    }
    let scaled = lambda.powf(1.0 - delta);
    window_constant() * kappa_delta_sq / n as f64 <= scaled && scaled <= kappa_delta_sq
}

/// `λ(n)` schedules matched to each eigenvalue decay law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    /// `λ = C′ n^{−2ν/(2ν(ζ+1)+1)}`.
    Polynomial { nu: f64, c_prime: f64 },
    /// `λ = C′ log(n)/n`.
    Exponential { c_prime: f64 },
    /// `λ = C′ √(log n)/n`.
    Gaussian { c_prime: f64 },
}

impl Schedule {
    /// Exponent `e` with risk `∝ n^{−e}` implied by the schedule, for
    /// polynomial decay: `2ν(ζ+1)/(2ν(ζ+1)+1)`.
    pub fn polynomial_rate(nu: f64, zeta: f64) -> f64 {
        let s = 2.0 * nu * (zeta + 1.0);
        s / (s + 1.0)
    }
}

pub fn lambda_schedule(schedule: &Schedule, n: usize, zeta: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid("n", format!("schedules need n ≥ 2, got {n}")));
    }
    if !(zeta >= 0.0 && zeta.is_finite()) {
        return Err(invalid("zeta", format!("must be nonnegative, got {zeta}")));
    }
    let n = n as f64;
    match *schedule {
        Schedule::Polynomial { nu, c_prime } => {
            positive("nu", nu)?;
            positive("c_prime", c_prime)?;
            Ok(c_prime * n.powf(-2.0 * nu / (2.0 * nu * (zeta + 1.0) + 1.0)))
        }
        Schedule::Exponential { c_prime } => {
            positive("c_prime", c_prime)?;
            Ok(c_prime * n.ln() / n)
        }
        Schedule::Gaussian { c_prime } => {
            positive("c_prime", c_prime)?;
            Ok(c_prime * n.ln().sqrt() / n)
        }
    }
}

/// Smallest `n₀ ≥ 2` such that the polynomial schedule lies in the `δ = 0`
/// window (with `κ_0² = κ²`) for every `n ≥ n₀`.
pub fn polynomial_window_threshold(nu: f64, zeta: f64, c_prime: f64, kappa_sq: f64) -> Result<usize> {
    positive("kappa_sq", kappa_sq)?;
    let schedule = Schedule::Polynomial { nu, c_prime };
    lambda_schedule(&schedule, 2, zeta)?;
    let e = 2.0 * nu / (2.0 * nu * (zeta + 1.0) + 1.0);
    // λ ≤ κ² ⟺ n ≥ (C′/κ²)^{1/e};  c κ²/n ≤ λ ⟺ n ≥ (c κ²/C′)^{1/(1−e)}.
    let upper = (c_prime / kappa_sq).powf(1.0 / e);
    let lower = (window_constant() * kappa_sq / c_prime).powf(1.0 / (1.0 - e));
    let mut n0 = upper.max(lower).max(2.0).ceil() as usize;
    let holds = |n: usize| lambda_schedule(&schedule, n, zeta).is_ok_and(|l| check_lambda_window(l, n, 0.0, kappa_sq));
    // Absorb rounding at the boundary in either direction.
    while n0 > 2 && holds(n0 - 1) && holds(n0) {
        n0 -= 1;
    }
    while !holds(n0) {
        n0 += 1;
    }
    Ok(n0)
}

/// `λ = (1 − r)·t_J²` for cut-off regression on a rank-`J` target.
pub fn finite_rank_lambda(model: &SpectrumModel, rank: usize, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(invalid("r", format!("must lie in (0, 1), got {r}")));
    }
    let t = rank
        .checked_sub(1)
        .and_then(|j| model.eigenvalues().get(j))
        .ok_or_else(|| invalid("rank", format!("must lie in 1..={}", model.eigenvalues().len())))?;
    Ok((1.0 - r) * t)
}

/// Whether `r t_J² ≥ κ²/√n + κ²/(3n)`.
pub fn finite_rank_precondition(t_j_sq: f64, r: f64, kappa_sq: f64, n: usize) -> bool {
    let n = n as f64;
    r * t_j_sq >= kappa_sq / n.sqrt() + kappa_sq / (3.0 * n)
}

/// Risk bound for cut-off regression at `λ = (1 − r)t_J²` on a target
/// supported on the first `J` eigenfunctions.
pub fn finite_rank_bound(t_j_sq: f64, r: f64, kappa_sq: f64, norm_h_sq: f64, sigma_sq: f64, n: usize) -> f64 {
    let n = n as f64;
    let k2 = kappa_sq;
    let t4 = t_j_sq * t_j_sq;
    let leading = (34.0 * k2.powi(3) / (r * r * t4) * norm_h_sq + 3.0 * k2 / ((1.0 - r) * t_j_sq) * sigma_sq) / n;
    let tail = k2
        * norm_h_sq
        * (15.0 * k2 * k2 / (n * n * r * r * t4)
            + 4.0 * (-n * r * r * t4 / (2.0 * k2 * k2 + 2.0 * k2 * r * t_j_sq / 3.0)).exp());
    leading + tail
}

/// A kernel on a finite domain written in eigen-coordinates of its integral
/// operator under `μ`: features `φ_j(x) = t_j ψ_j(x)` with `E[φφᵀ] = diag(t_j²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    masses: Vec<f64>,
    eigenvalues: Vec<f64>,
    /// Row `x` holds `φ(x)`.
    features: Array2<f64>,
}

impl FeatureMap {
    /// The discrete kernel `1{x = x̃}`: `t_j² = μ(x_j)` and `φ_j(x) = 1{x = x_j}`.
    /// Columns are ordered by decreasing mass.
    pub fn discrete(masses: &[f64]) -> Result<Self> {
        check_masses(masses)?;
        let mut order: Vec<usize> = (0..masses.len()).collect();
        order.sort_by(|&a, &b| masses[b].total_cmp(&masses[a]));
        let mut features = Array2::zeros((masses.len(), masses.len()));
        for (j, &x) in order.iter().enumerate() {
            features[[x, j]] = 1.0;
        }
        Ok(Self {
            masses: masses.to_vec(),
            eigenvalues: order.iter().map(|&x| masses[x]).collect(),
            features,
        })
    }

    /// Any kernel matrix on a finite domain. With `M = D^{1/2} K D^{1/2} = VΛVᵀ`
    /// (`D = diag(μ)`), `t_j² = Λ_j` and `φ_j(x) = √Λ_j V_{xj}/√μ(x)`.
    /// Directions with `Λ_j ≤ 1e-12·Λ_1` are dropped.
    pub fn from_kernel(kernel: ArrayView2<'_, f64>, masses: &[f64]) -> Result<Self> {
        check_masses(masses)?;
        let size = masses.len();
        if kernel.dim() != (size, size) {
            return Err(Error::DimensionMismatch(format!(
                "kernel is {:?} but there are {size} masses",
                kernel.dim()
            )));
        }
        if masses.iter().any(|&p| p <= 0.0) {
            return Err(invalid("masses", "feature maps from kernels need strictly positive masses"));
        }
        let sqrt_p: Vec<f64> = masses.iter().map(|p| p.sqrt()).collect();
        let m = Array2::from_shape_fn((size, size), |(i, j)| sqrt_p[i] * kernel[[i, j]] * sqrt_p[j]);
        let spec = eigh_symmetric(m.view())?;
        let top = spec.eigenvalues().first().copied().unwrap_or(0.0).max(0.0);
        let keep: Vec<usize> = (0..size).filter(|&j| spec.eigenvalues()[j] > 1e-12 * top).collect();
        let v = spec.eigenvectors();
        let features = Array2::from_shape_fn((size, keep.len()), |(x, k)| {
            let j = keep[k];
            spec.eigenvalues()[j].sqrt() * v[[x, j]] / sqrt_p[x]
        });
        Ok(Self {
            masses: masses.to_vec(),
            eigenvalues: keep.iter().map(|&j| spec.eigenvalues()[j]).collect(),
            features,
        })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `sup_x K(x, x) = sup_x ‖φ(x)‖²`.
    pub fn kappa_sq(&self) -> f64 {
        self.kappa_delta_sq(0.0)
    }

    /// `sup_x Σ_j t_j^{2(1−δ)} ψ_j(x)² = sup_x Σ_j t_j^{−2δ} φ_j(x)²`, by brute
    /// force over the domain (points of zero mass are excluded).
    pub fn kappa_delta_sq(&self, delta: f64) -> f64 {
        let weights: Vec<f64> = self.eigenvalues.iter().map(|t| t.powf(-delta)).collect();
        self.features
            .rows()
            .into_iter()
            .zip(&self.masses)
            .filter(|(_, &p)| p > 0.0)
            .map(|(row, _)| row.iter().zip(&weights).map(|(f, w)| w * f * f).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn effective_dimension(&self, lambda: f64) -> Result<f64> {
        positive("lambda", lambda)?;
        Ok(self.eigenvalues.iter().map(|&t| t / (t + lambda)).sum())
    }

    pub fn spectrum_model(&self) -> Result<SpectrumModel> {
        SpectrumModel::explicit(self.eigenvalues.clone())
    }
}

fn check_masses(masses: &[f64]) -> Result<()> {
    if masses.is_empty() {
        return Err(invalid("masses", "need at least one domain point"));
    }
    if masses.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
        return Err(invalid("masses", "must be nonnegative"));
    }
    let total: f64 = masses.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(invalid("masses", format!("must sum to 1, got {total}")));
    }
    Ok(())
}
