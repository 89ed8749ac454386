//! Regularization families `g_λ`: functions that approximate `t ↦ 1/t` on
//! `(0, κ²]` while staying bounded by `1/λ`.
//!
//! Three families are provided:
//!
//! * ridge (Tikhonov): `g_λ(t) = 1/(t + λ)`
//! * spectral cut-off: `g_λ(t) = 1{t ≥ λ}/t`
//! * Landweber iteration with step `η`: `g_λ(t) = (1 − (1 − ηt)^m)/t`, where the
//!   iteration count is `m = max(1, ⌈1/(ηλ)⌉ − 1)`.
//!
//! Besides point evaluation, this module checks the three structural
//! conditions a family must satisfy (`|t g| < 1`, `|1 − t g| ≤ 1`,
//! `|g| < 1/λ`) and the qualification inequality on finite grids.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Margin applied to the strict `|g| < 1/λ` check.
const STRICT_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterKind {
    Ridge,
    Cutoff,
    Landweber { step: f64 },
}

impl FilterKind {
    /// Short method label used in reports (`krr`, `kpcr`, `landweber`).
    pub fn label(&self) -> &'static str {
        match self {
            FilterKind::Ridge => "krr",
            FilterKind::Cutoff => "kpcr",
            FilterKind::Landweber { .. } => "landweber",
        }
    }

    /// Qualification of the family: 1 for ridge, unbounded otherwise.
    pub fn nominal_qualification(&self) -> f64 {
        match self {
            FilterKind::Ridge => 1.0,
            FilterKind::Cutoff | FilterKind::Landweber { .. } => f64::INFINITY,
        }
    }
}

/// A regularization family together with the spectral range `(0, κ²]` it
/// operates on. Immutable once constructed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterFamily {
    kind: FilterKind,
    kappa_sq: f64,
}

impl FilterFamily {
    pub fn ridge(kappa_sq: f64) -> Result<Self> {
        Self::new(FilterKind::Ridge, kappa_sq)
    }

    pub fn cutoff(kappa_sq: f64) -> Result<Self> {
        Self::new(FilterKind::Cutoff, kappa_sq)
    }

    /// Landweber family with step `1/(2κ²)`.
    pub fn landweber(kappa_sq: f64) -> Result<Self> {
        Self::new(FilterKind::Landweber { step: 0.5 / kappa_sq }, kappa_sq)
    }

    pub fn landweber_with_step(kappa_sq: f64, step: f64) -> Result<Self> {
        Self::new(FilterKind::Landweber { step }, kappa_sq)
    }

    pub fn new(kind: FilterKind, kappa_sq: f64) -> Result<Self> {
        if !(kappa_sq > 0.0 && kappa_sq.is_finite()) {
            return Err(invalid("kappa_sq", format!("must be positive and finite, got {kappa_sq}")));
        }
        if let FilterKind::Landweber { step } = kind {
            if !(step > 0.0 && step <= 0.5 / kappa_sq * (1.0 + 1e-15)) {
                return Err(invalid(
                    "landweber_step",
                    format!("must lie in (0, 1/(2κ²)] = (0, {}], got {step}", 0.5 / kappa_sq),
                ));
            }
        }
        Ok(Self { kind, kappa_sq })
    }

    /// The same family on a different spectral range. Landweber keeps the
    /// default step `1/(2κ²)` relative to the new range.
    pub fn with_kappa_sq(&self, kappa_sq: f64) -> Result<Self> {
        match self.kind {
            FilterKind::Landweber { .. } => Self::landweber(kappa_sq),
            kind => Self::new(kind, kappa_sq),
        }
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn kappa_sq(&self) -> f64 {
        self.kappa_sq
    }

    pub fn label(&self) -> &'static str {
        self.kind.label()
    }

    pub fn landweber_step(&self) -> Option<f64> {
        match self.kind {
            FilterKind::Landweber { step } => Some(step),
            _ => None,
        }
    }

    /// Landweber iteration count `max(1, ⌈1/(ηλ)⌉ − 1)` for this `λ`.
    pub fn landweber_iterations(&self, lambda: f64) -> Option<f64> {
        self.landweber_step()
            .map(|step| ((1.0 / (step * lambda)).ceil() - 1.0).max(1.0))
    }

    pub fn check_lambda(&self, lambda: f64) -> Result<()> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", format!("must be positive and finite, got {lambda}")));
        }
        if let Some(step) = self.landweber_step() {
            if lambda * step >= 1.0 {
                return Err(invalid(
                    "lambda",
                    format!("landweber requires lambda < 1/step = {}, got {lambda}", 1.0 / step),
                ));
            }
        }
        Ok(())
    }

    fn check_point(&self, lambda: f64, t: f64) -> Result<()> {
        self.check_lambda(lambda)?;
        if !(t > 0.0 && t <= self.kappa_sq) {
            return Err(invalid("t", format!("must lie in (0, {}], got {t}", self.kappa_sq)));
        }
        Ok(())
    }

    /// `g_λ(t)` for `t ∈ (0, κ²]`.
    pub fn evaluate(&self, lambda: f64, t: f64) -> Result<f64> {
        self.check_point(lambda, t)?;
        Ok(self.weight(lambda, t))
    }

    /// `1 − t g_λ(t)` for `t ∈ (0, κ²]`.
    pub fn residual(&self, lambda: f64, t: f64) -> Result<f64> {
        self.check_point(lambda, t)?;
        Ok(self.residual_unchecked(lambda, t))
    }

    /// `g_λ(t)` without domain checks. Non-positive `t` is treated as the
    /// limit `t → 0⁺` (`1/λ` for ridge, `0` for cut-off, `ηm` for Landweber),
    /// which is what null directions of a kernel matrix receive.
    pub(crate) fn weight(&self, lambda: f64, t: f64) -> f64 {
        match self.kind {
            FilterKind::Ridge => 1.0 / (t.max(0.0) + lambda),
            FilterKind::Cutoff => {
                if t > 0.0 && t >= lambda {
                    1.0 / t
                } else {
                    0.0
                }
            }
            FilterKind::Landweber { step } => {
                let m = ((1.0 / (step * lambda)).ceil() - 1.0).max(1.0);
                if t <= 0.0 {
                    step * m
                } else {
                    // (1 − (1 − ηt)^m)/t without cancellation for small t.
                    -(m * (-step * t).ln_1p()).exp_m1() / t
                }
            }
        }
    }

    pub(crate) fn residual_unchecked(&self, lambda: f64, t: f64) -> f64 {
        match self.kind {
            FilterKind::Ridge => lambda / (t + lambda),
            FilterKind::Cutoff => {
                if t < lambda {
                    1.0
                } else {
                    0.0
                }
            }
            FilterKind::Landweber { step } => {
                let m = ((1.0 / (step * lambda)).ceil() - 1.0).max(1.0);
                (m * (-step * t).ln_1p()).exp()
            }
        }
    }

    /// Whether `1 − t g_λ(t)` is strictly positive, decided without the
    /// underflow that hits `(1 − ηt)^m` for large `m`.
    fn residual_positive(&self, lambda: f64, t: f64) -> bool {
        match self.kind {
            FilterKind::Ridge => true,
            FilterKind::Cutoff => t < lambda,
            FilterKind::Landweber { step } => step * t < 1.0,
        }
    }
}

/// Where a grid check attained its extreme value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub lambda: f64,
    pub t: f64,
    pub value: f64,
}

/// Outcome of one structural condition over a grid.
///
/// `holds` is the condition as required of the family: the weak form for
/// `|1 − t g| ≤ 1`, the strict form otherwise. `strict` records whether the
/// strict inequality held, and `weak` whether the non-strict one did; the
/// cut-off family attains equality in the first and third conditions at
/// `t ≥ λ` and `t = λ`, which shows up as `weak && !strict`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub holds: bool,
    pub strict: bool,
    pub weak: bool,
    pub worst: Witness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyReport {
    /// `sup |t g_λ(t)| < 1`
    pub r1: ConditionCheck,
    /// `sup |1 − t g_λ(t)| ≤ 1`
    pub r2: ConditionCheck,
    /// `sup λ |g_λ(t)| < 1`
    pub r3: ConditionCheck,
}

impl FamilyReport {
    pub fn r1_ok(&self) -> bool {
        self.r1.holds
    }
    pub fn r2_ok(&self) -> bool {
        self.r2.holds
    }
    pub fn r3_ok(&self) -> bool {
        self.r3.holds
    }
    /// All three conditions hold, with equality accepted only where the
    /// family attains it exactly (cut-off).
    pub fn all_weak(&self) -> bool {
        self.r1.weak && self.r2.weak && self.r3.weak
    }
    pub fn all_strict(&self) -> bool {
        self.r1.holds && self.r2.holds && self.r3.holds
    }
}

fn check_grids(lambda_grid: &[f64], t_grid: &[f64]) -> Result<()> {
    if lambda_grid.is_empty() {
        return Err(invalid("lambda_grid", "must not be empty"));
    }
    if t_grid.is_empty() {
        return Err(invalid("t_grid", "must not be empty"));
    }
    Ok(())
}

struct Tracker {
    worst: Witness,
    strict: bool,
    weak: bool,
}

impl Tracker {
    fn new() -> Self {
        Self {
            worst: Witness {
                lambda: f64::NAN,
                t: f64::NAN,
                value: f64::NEG_INFINITY,
            },
            strict: true,
            weak: true,
        }
    }

    fn observe(&mut self, lambda: f64, t: f64, value: f64, strict: bool, weak: bool) {
        if value > self.worst.value {
            self.worst = Witness { lambda, t, value };
        }
        self.strict &= strict;
        self.weak &= weak;
    }
}

/// Checks the three defining conditions over every `(λ, t)` grid point.
pub fn verify_family_conditions(filter: &FilterFamily, lambda_grid: &[f64], t_grid: &[f64]) -> Result<FamilyReport> {
    check_grids(lambda_grid, t_grid)?;
    let (mut r1, mut r2, mut r3) = (Tracker::new(), Tracker::new(), Tracker::new());
    for &lambda in lambda_grid {
        for &t in t_grid {
            let g = filter.evaluate(lambda, t)?;
            let tg = (t * g).abs();
            let res = filter.residual_unchecked(lambda, t).abs();
            let scaled = lambda * g.abs();
            r1.observe(lambda, t, tg, filter.residual_positive(lambda, t) && tg < 1.0 + 1e-15, tg <= 1.0 + 1e-15);
            r2.observe(lambda, t, res, res <= 1.0, res <= 1.0);
            r3.observe(lambda, t, scaled, scaled < 1.0 - STRICT_MARGIN, scaled <= 1.0 + 1e-15);
        }
    }
    let finish = |tr: Tracker, strict_required: bool| ConditionCheck {
        holds: if strict_required { tr.strict } else { tr.weak },
        strict: tr.strict,
        weak: tr.weak,
        worst: tr.worst,
    };
    Ok(FamilyReport {
        r1: finish(r1, true),
        r2: finish(r2, false),
        r3: finish(r3, true),
    })
}

/// Result of a finite-grid qualification check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QualificationReport {
    pub holds: bool,
    /// Grid point maximizing `|1 − t g_λ(t)| t^ξ / λ^ξ`; `value` is the
    /// unnormalized `|1 − t g_λ(t)| t^ξ`.
    pub worst: Witness,
    /// `|1 − t g_λ(t)| t^ξ / λ^ξ` at the witness, i.e. the smallest slack that
    /// would make the check pass.
    pub ratio: f64,
}

/// Checks `sup_t |1 − t g_λ(t)| t^ξ ≤ slack · λ^ξ` for every `λ` in the grid.
pub fn empirical_qualification(
    filter: &FilterFamily,
    xi: f64,
    lambda_grid: &[f64],
    t_grid: &[f64],
    slack: f64,
) -> Result<QualificationReport> {
    check_grids(lambda_grid, t_grid)?;
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(invalid("xi", format!("must be finite and nonnegative, got {xi}")));
    }
    if !(slack >= 1.0) {
        return Err(invalid("slack", format!("must be at least 1, got {slack}")));
    }
    let mut worst = Witness {
        lambda: f64::NAN,
        t: f64::NAN,
        value: 0.0,
    };
    let mut ratio = f64::NEG_INFINITY;
    for &lambda in lambda_grid {
        filter.check_lambda(lambda)?;
        for &t in t_grid {
            filter.check_point(lambda, t)?;
            let res = filter.residual_unchecked(lambda, t).abs();
            // Work in logs: t^ξ and λ^ξ under/overflow for large ξ.
            let r = if res == 0.0 {
                0.0
            } else {
                (res.ln() + xi * (t.ln() - lambda.ln())).exp()
            };
            if r > ratio {
                ratio = r;
                worst = Witness {
                    lambda,
                    t,
                    value: res * t.powf(xi),
                };
            }
        }
    }
    Ok(QualificationReport {
        holds: ratio <= slack * (1.0 + 1e-12),
        worst,
        ratio,
    })
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![hi],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let step = (b - a) / (count - 1) as f64;
            let mut grid: Vec<f64> = (0..count).map(|i| (a + step * i as f64).exp()).collect();
            grid[0] = lo;
            grid[count - 1] = hi;
            grid
        }
    }
}

/// `count` equally spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (count - 1) as f64;
            let mut grid: Vec<f64> = (0..count).map(|i| lo + step * i as f64).collect();
            grid[count - 1] = hi;
            grid
        }
    }
}
