//! Dense symmetric eigendecomposition and the operator-level helpers built on it.
//!
//! The solver reduces the matrix to tridiagonal form with Householder
//! reflections and then diagonalizes the tridiagonal matrix with the
//! implicitly shifted QL iteration (the EISPACK `tred2`/`tql2` pair). Both
//! stages are written against row-major storage so that every inner loop
//! walks contiguous memory: reflections update rows of the trailing block, and
//! the QL rotations act on rows of the *transposed* eigenvector matrix.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Relative symmetry defect tolerated before input is rejected.
const SYMMETRY_TOLERANCE: f64 = 1e-8;

/// Maximum QL sweeps spent on a single eigenvalue.
const MAX_QL_ITERATIONS: usize = 60;

/// Eigenvalues (descending) and orthonormal eigenvectors of a symmetric matrix.
///
/// Column `j` of [`eigenvectors`](Self::eigenvectors) is the unit eigenvector
/// for `eigenvalues()[j]`. Each eigenvector is oriented so that its first
/// component of magnitude above `1e-10` is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSpectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Array2<f64>,
}

impl SymmetricSpectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Array2<f64> {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// `V · diag(f(λ)) · Vᵀ`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> Array2<f64> {
        let n = self.dim();
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&v| f(v)).collect();
        let mut scaled = self.eigenvectors.clone();
        for mut row in scaled.rows_mut() {
            for (x, w) in row.iter_mut().zip(&weights) {
                *x *= w;
            }
        }
        let mut out = scaled.dot(&self.eigenvectors.t());
        // Restore exact symmetry lost to summation order.
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (out[[i, j]] + out[[j, i]]);
                out[[i, j]] = avg;
                out[[j, i]] = avg;
            }
        }
        out
    }

    /// `V · diag(λ) · Vᵀ`.
    pub fn reconstruct(&self) -> Array2<f64> {
        self.map_eigenvalues(|v| v)
    }
}

/// Validates squareness/finiteness/symmetry and returns the symmetrized
/// row-major copy of `a`.
fn symmetrized(a: ArrayView2<'_, f64>) -> Result<(usize, Vec<f64>)> {
    let (rows, cols) = a.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let n = rows;
    let mut max_abs = 0.0_f64;
    for ((i, j), &v) in a.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row: i, col: j });
        }
        max_abs = max_abs.max(v.abs());
    }
    let tolerance = SYMMETRY_TOLERANCE * max_abs;
    let mut defect = 0.0_f64;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (a[[i, j]], a[[j, i]]);
            defect = defect.max((x - y).abs());
            out[i * n + j] = 0.5 * (x + y);
        }
    }
    if defect > tolerance {
        return Err(Error::NotSymmetric { defect, tolerance });
    }
    Ok((n, out))
}

/// Householder reduction of the symmetric row-major matrix `a` to tridiagonal
/// form `Qᵀ A Q = T`. Returns the diagonal, the superdiagonal (with a trailing
/// zero), and optionally `Qᵀ` in row-major order.
fn tridiagonalize(n: usize, a: &mut [f64], want_vectors: bool) -> (Vec<f64>, Vec<f64>, Option<Vec<f64>>) {
    let mut diag = vec![0.0; n];
    let mut offdiag = vec![0.0; n];
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n.saturating_sub(2));
    let mut p = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let m = n - lo;
        let x = &a[k * n + lo..k * n + n];
        let scale = x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if scale == 0.0 {
            offdiag[k] = 0.0;
            reflectors.push((Vec::new(), 0.0));
            continue;
        }
        let mut v: Vec<f64> = x.iter().map(|xi| xi / scale).collect();
        let norm = v.iter().map(|vi| vi * vi).sum::<f64>().sqrt();
        let alpha = if v[0] > 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|vi| vi * vi).sum();
        offdiag[k] = alpha * scale;
        if vtv == 0.0 {
            reflectors.push((Vec::new(), 0.0));
            continue;
        }
        let beta = 2.0 / vtv;

        // p = β A₂₂ v, w = p − (β/2)(pᵀv) v, A₂₂ ← A₂₂ − v wᵀ − w vᵀ.
        for i in 0..m {
            let row = &a[(lo + i) * n + lo..(lo + i) * n + n];
            p[i] = beta * row.iter().zip(&v).map(|(r, vi)| r * vi).sum::<f64>();
        }
        let k_coef = 0.5 * beta * p[..m].iter().zip(&v).map(|(pi, vi)| pi * vi).sum::<f64>();
        for i in 0..m {
            p[i] -= k_coef * v[i];
        }
        for i in 0..m {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a[(lo + i) * n + lo..(lo + i) * n + n];
            for ((r, vj), wj) in row.iter_mut().zip(&v).zip(&p[..m]) {
                *r -= vi * wj + wi * vj;
            }
        }
        reflectors.push((v, beta));
    }

    for i in 0..n {
        diag[i] = a[i * n + i];
    }
    if n >= 2 {
        offdiag[n - 2] = a[(n - 2) * n + n - 1];
    }

    let q_t = want_vectors.then(|| {
        // Backward accumulation Q = H₀ H₁ ⋯ applied to the shrinking trailing block.
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            q[i * n + i] = 1.0;
        }
        let mut r = vec![0.0; n];
        for (k, (v, beta)) in reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let lo = k + 1;
            let r = &mut r[..n - lo];
            r.iter_mut().for_each(|x| *x = 0.0);
            for (i, vi) in v.iter().enumerate() {
                let row = &q[(lo + i) * n + lo..(lo + i) * n + n];
                for (rj, qij) in r.iter_mut().zip(row) {
                    *rj += vi * qij;
                }
            }
            for (i, vi) in v.iter().enumerate() {
                let coef = beta * vi;
                let row = &mut q[(lo + i) * n + lo..(lo + i) * n + n];
                for (qij, rj) in row.iter_mut().zip(r.iter()) {
                    *qij -= coef * rj;
                }
            }
        }
        let mut q_t = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                q_t[j * n + i] = q[i * n + j];
            }
        }
        q_t
    });

    (diag, offdiag, q_t)
}

/// Implicit QL iteration on the tridiagonal matrix given by `diag` and the
/// superdiagonal `offdiag` (`offdiag[n-1]` must be zero). When `rows` is
/// present, its rows are rotated alongside so that on exit row `j` is the
/// eigenvector belonging to `diag[j]`.
fn tridiagonal_ql(n: usize, diag: &mut [f64], offdiag: &mut [f64], mut rows: Option<&mut [f64]>) -> Result<()> {
    let eps = f64::EPSILON;
    let mut shift_total = 0.0;
    let mut tst1 = 0.0_f64;
    for l in 0..n {
        tst1 = tst1.max(diag[l].abs() + offdiag[l].abs());
        let mut m = l;
        while m < n - 1 && offdiag[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                if iterations > MAX_QL_ITERATIONS {
                    return Err(Error::NoConvergence { iterations });
                }
                let g = diag[l];
                let mut p = (diag[l + 1] - g) / (2.0 * offdiag[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                diag[l] = offdiag[l] / (p + r);
                diag[l + 1] = offdiag[l] * (p + r);
                let dl1 = diag[l + 1];
                let mut h = g - diag[l];
                for d in diag.iter_mut().take(n).skip(l + 2) {
                    *d -= h;
                }
                shift_total += h;

                p = diag[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = offdiag[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * offdiag[i];
                    h = c * p;
                    r = p.hypot(offdiag[i]);
                    offdiag[i + 1] = s * r;
                    s = offdiag[i] / r;
                    c = p / r;
                    p = c * diag[i] - s * g;
                    diag[i + 1] = h + s * (c * g + s * diag[i]);

                    if let Some(w) = rows.as_deref_mut() {
                        let (head, tail) = w.split_at_mut((i + 1) * n);
                        let row_i = &mut head[i * n..];
                        let row_next = &mut tail[..n];
                        for (a, b) in row_i.iter_mut().zip(row_next.iter_mut()) {
                            let hb = *b;
                            *b = s * *a + c * hb;
                            *a = c * *a - s * hb;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * offdiag[l] / dl1;
                offdiag[l] = s * p;
                diag[l] = c * p;
                if offdiag[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        diag[l] += shift_total;
        offdiag[l] = 0.0;
    }
    Ok(())
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    order
}

/// Full eigendecomposition of a symmetric matrix.
///
/// The input is symmetrized as `(A + Aᵀ)/2`; a defect above `1e-8·max|A|`
/// is rejected.
pub fn eigh_symmetric(a: ArrayView2<'_, f64>) -> Result<SymmetricSpectrum> {
    let (n, mut work) = symmetrized(a)?;
    if n == 0 {
        return Ok(SymmetricSpectrum {
            eigenvalues: Vec::new(),
            eigenvectors: Array2::zeros((0, 0)),
        });
    }
    let (mut diag, mut offdiag, q_t) = tridiagonalize(n, &mut work, true);
    drop(work);
    let mut rows = q_t.expect("vectors requested");
    tridiagonal_ql(n, &mut diag, &mut offdiag, Some(&mut rows))?;

    let order = descending_order(&diag);
    let mut eigenvectors = Array2::zeros((n, n));
    let mut eigenvalues = Vec::with_capacity(n);
    for (col, &src) in order.iter().enumerate() {
        eigenvalues.push(diag[src]);
        let row = &rows[src * n..(src + 1) * n];
        let sign = match row.iter().find(|v| v.abs() > 1e-10) {
            Some(v) if *v < 0.0 => -1.0,
            _ => 1.0,
        };
        for (r, v) in row.iter().enumerate() {
            eigenvectors[[r, col]] = sign * v;
        }
    }
    Ok(SymmetricSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, in descending order.
pub fn eigvalsh_symmetric(a: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    let (n, mut work) = symmetrized(a)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let (mut diag, mut offdiag, _) = tridiagonalize(n, &mut work, false);
    tridiagonal_ql(n, &mut diag, &mut offdiag, None)?;
    diag.sort_by(|a, b| b.total_cmp(a));
    Ok(diag)
}

/// Spectral norm `max_j |λ_j|` of a symmetric matrix.
pub fn operator_norm(a: ArrayView2<'_, f64>) -> Result<f64> {
    Ok(eigvalsh_symmetric(a)?
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs())))
}

/// `A^γ` for a symmetric positive semidefinite `A`, computed spectrally.
///
/// Eigenvalues in `[-1e-12, 0)` are clamped to zero; anything more negative is
/// rejected.
pub fn psd_power(a: ArrayView2<'_, f64>, gamma: f64) -> Result<Array2<f64>> {
    let spectrum = eigh_symmetric(a)?;
    check_psd(&spectrum)?;
    Ok(spectrum.map_eigenvalues(|v| v.max(0.0).powf(gamma)))
}

fn check_psd(spectrum: &SymmetricSpectrum) -> Result<()> {
    if let Some(&min) = spectrum.eigenvalues().last() {
        if min < -1e-12 {
            return Err(Error::SpectrumRange(format!(
                "matrix is not positive semidefinite (smallest eigenvalue {min:e})"
            )));
        }
    }
    Ok(())
}

/// Left and right sides of an operator power-difference inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerGap {
    /// `‖A^γ − B^γ‖`
    pub lhs: f64,
    /// The Lipschitz-type bound on the right-hand side.
    pub rhs: f64,
}

impl PowerGap {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

fn power_difference(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, gamma: f64) -> Result<(f64, f64)> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operands have shapes {:?} and {:?}",
            a.dim(),
            b.dim()
        )));
    }
    let a_pow = psd_power(a, gamma)?;
    let b_pow = psd_power(b, gamma)?;
    let lhs = operator_norm((&a_pow - &b_pow).view())?;
    let diff = operator_norm((&a - &b).view())?;
    Ok((lhs, diff))
}

fn spectrum_bounds(m: ArrayView2<'_, f64>) -> Result<(f64, f64)> {
    let values = eigvalsh_symmetric(m)?;
    let max = values.first().copied().unwrap_or(0.0);
    let min = values.last().copied().unwrap_or(0.0);
    Ok((min, max))
}

/// `‖A^γ − B^γ‖ ≤ 2γ‖A − B‖` for PSD `A`, `B` with norms below one and `γ ≥ 1`.
pub fn power_inequality_gap(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, gamma: f64) -> Result<PowerGap> {
    if !(gamma >= 1.0) || !gamma.is_finite() {
        return Err(crate::error::invalid("gamma", format!("must be finite and >= 1, got {gamma}")));
    }
    for (name, m) in [("A", a), ("B", b)] {
        let (min, max) = spectrum_bounds(m)?;
        if min < -1e-12 || max >= 1.0 {
            return Err(Error::SpectrumRange(format!(
                "{name} must be PSD with norm < 1, spectrum in [{min}, {max}]"
            )));
        }
    }
    let (lhs, diff) = power_difference(a, b, gamma)?;
    Ok(PowerGap {
        lhs,
        rhs: 2.0 * gamma * diff,
    })
}

/// `‖A^γ − B^γ‖ ≤ γ r^{γ−1} ‖A − B‖` for spectra inside `[r, 1)` and `0 < γ < 1`.
pub fn fractional_power_gap(
    a: ArrayView2<'_, f64>,
    b: ArrayView2<'_, f64>,
    gamma: f64,
    floor: f64,
) -> Result<PowerGap> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(crate::error::invalid("gamma", format!("must lie in (0, 1), got {gamma}")));
    }
    if !(floor > 0.0 && floor < 1.0) {
        return Err(crate::error::invalid("floor", format!("must lie in (0, 1), got {floor}")));
    }
    for (name, m) in [("A", a), ("B", b)] {
        let (min, max) = spectrum_bounds(m)?;
        if min < floor - 1e-12 || max >= 1.0 {
            return Err(Error::SpectrumRange(format!(
                "{name} spectrum [{min}, {max}] not inside [{floor}, 1)"
            )));
        }
    }
    let (lhs, diff) = power_difference(a, b, gamma)?;
    Ok(PowerGap {
        lhs,
        rhs: gamma * floor.powf(gamma - 1.0) * diff,
    })
}
