//! Kernel evaluation, kernel-matrix assembly, and ingestion of precomputed
//! kernel matrices with train/validation/test splits.
//!
//! File formats:
//!
//! * kernel file: first line `n=<int>`, then `n` lines of `n` comma-separated
//!   decimal floats (row `i` is kernel row `i`);
//! * splits file: three lines `train: ...`, `validation: ...`, `test: ...`,
//!   each followed by comma-separated zero-based indices;
//! * labels file: one decimal float per line, `n` lines.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Symmetry defect (relative to `max(1, max|K|)`) tolerated in a precomputed matrix.
const PRECOMPUTED_SYMMETRY_TOLERANCE: f64 = 1e-8;

/// A set of input points. The variant must match the kernel kind: discrete
/// domains use positive integers, Euclidean kernels use the rows of a matrix,
/// and precomputed kernels use zero-based row indices into the loaded matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Points {
    Discrete(Vec<usize>),
    Vectors(Array2<f64>),
    Indices(Vec<usize>),
}

impl Points {
    pub fn len(&self) -> usize {
        match self {
            Points::Discrete(v) | Points::Indices(v) => v.len(),
            Points::Vectors(m) => m.nrows(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The full discrete domain `{1, …, N}`.
    pub fn domain(size: usize) -> Self {
        Points::Discrete((1..=size).collect())
    }
}

/// A loaded precomputed kernel matrix, shared read-only between users.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecomputedKernel {
    matrix: Arc<Array2<f64>>,
}

impl PrecomputedKernel {
    pub fn new(matrix: Array2<f64>) -> Result<Self> {
        let (rows, cols) = matrix.dim();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        let mut max_abs = 0.0_f64;
        for ((i, j), &v) in matrix.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            max_abs = max_abs.max(v.abs());
        }
        let tolerance = PRECOMPUTED_SYMMETRY_TOLERANCE * max_abs.max(1.0);
        let mut defect = 0.0_f64;
        for i in 0..rows {
            for j in (i + 1)..rows {
                defect = defect.max((matrix[[i, j]] - matrix[[j, i]]).abs());
            }
        }
        if defect > tolerance {
            return Err(Error::NotSymmetric { defect, tolerance });
        }
        Ok(Self {
            matrix: Arc::new(matrix),
        })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `K(x, x̃) = 1{x = x̃}` on positive integers.
    Discrete,
    /// `K(x, x̃) = exp(−‖x − x̃‖² / (2h²))`.
    Gaussian { bandwidth: f64 },
    /// `K(x, x̃) = ⟨x, x̃⟩`.
    Linear,
    Precomputed(PrecomputedKernel),
}

/// Serializable description of a non-precomputed kernel, used by configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelChoice {
    Discrete,
    Gaussian { bandwidth: f64 },
    Linear,
}

impl From<KernelChoice> for KernelSpec {
    fn from(choice: KernelChoice) -> Self {
        match choice {
            KernelChoice::Discrete => KernelSpec::Discrete,
            KernelChoice::Gaussian { bandwidth } => KernelSpec::Gaussian { bandwidth },
            KernelChoice::Linear => KernelSpec::Linear,
        }
    }
}

impl KernelSpec {
    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(invalid("bandwidth", format!("must be positive, got {bandwidth}")));
        }
        Ok(KernelSpec::Gaussian { bandwidth })
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Discrete => "discrete",
            KernelSpec::Gaussian { .. } => "gaussian",
            KernelSpec::Linear => "linear",
            KernelSpec::Precomputed(_) => "precomputed",
        }
    }

    /// `sup_x K(x, x)` over the given points: exactly 1 for the discrete and
    /// Gaussian kernels, the largest diagonal entry otherwise.
    pub fn kappa_sq(&self, points: &Points) -> Result<f64> {
        match self {
            KernelSpec::Discrete | KernelSpec::Gaussian { .. } => Ok(1.0),
            KernelSpec::Linear => {
                let mut best = 0.0_f64;
                for i in 0..points.len() {
                    best = best.max(self.eval(points, i, points, i)?);
                }
                Ok(best)
            }
            KernelSpec::Precomputed(pre) => Ok(pre.matrix.diag().iter().fold(0.0_f64, |a, v| a.max(*v))),
        }
    }

    fn validate(&self, points: &Points) -> Result<()> {
        match (self, points) {
            (KernelSpec::Discrete, Points::Discrete(xs)) => {
                if let Some(&bad) = xs.iter().find(|&&x| x == 0) {
                    return Err(Error::Domain {
                        point: bad.to_string(),
                        reason: "discrete domain points are positive integers".into(),
                    });
                }
                Ok(())
            }
            (KernelSpec::Gaussian { .. } | KernelSpec::Linear, Points::Discrete(_)) => Ok(()),
            (KernelSpec::Gaussian { .. } | KernelSpec::Linear, Points::Vectors(m)) => {
                if m.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Domain {
                        point: "vector".into(),
                        reason: "non-finite coordinate".into(),
                    });
                }
                Ok(())
            }
            (KernelSpec::Precomputed(pre), Points::Indices(idx)) => {
                if let Some(&bad) = idx.iter().find(|&&i| i >= pre.size()) {
                    return Err(Error::Domain {
                        point: bad.to_string(),
                        reason: format!("index out of range for a {}x{} kernel", pre.size(), pre.size()),
                    });
                }
                Ok(())
            }
            (spec, pts) => Err(Error::Domain {
                point: format!("{:?}", std::mem::discriminant(pts)),
                reason: format!("point type not supported by the {} kernel", spec.name()),
            }),
        }
    }

    fn eval(&self, a: &Points, i: usize, b: &Points, j: usize) -> Result<f64> {
        let value = match (self, a, b) {
            (KernelSpec::Discrete, Points::Discrete(x), Points::Discrete(y)) => f64::from(u8::from(x[i] == y[j])),
            (KernelSpec::Precomputed(pre), Points::Indices(x), Points::Indices(y)) => pre.matrix[[x[i], y[j]]],
            (KernelSpec::Gaussian { bandwidth }, _, _) => {
                let d2 = squared_distance(a, i, b, j);
                (-d2 / (2.0 * bandwidth * bandwidth)).exp()
            }
            (KernelSpec::Linear, _, _) => inner(a, i, b, j),
            _ => unreachable!("validated point types"),
        };
        if !value.is_finite() {
            return Err(Error::NonFinite { row: i, col: j });
        }
        Ok(value)
    }
}

fn coords(p: &Points, i: usize) -> Coords<'_> {
    match p {
        Points::Discrete(v) | Points::Indices(v) => Coords::Scalar(v[i] as f64),
        Points::Vectors(m) => Coords::Row(m.row(i)),
    }
}

enum Coords<'a> {
    Scalar(f64),
    Row(ArrayView1<'a, f64>),
}

fn squared_distance(a: &Points, i: usize, b: &Points, j: usize) -> f64 {
    match (coords(a, i), coords(b, j)) {
        (Coords::Scalar(x), Coords::Scalar(y)) => (x - y) * (x - y),
        (Coords::Row(x), Coords::Row(y)) => x.iter().zip(y.iter()).map(|(u, v)| (u - v) * (u - v)).sum(),
        (Coords::Scalar(x), Coords::Row(y)) | (Coords::Row(y), Coords::Scalar(x)) => {
            y.iter().map(|v| (x - v) * (x - v)).sum()
        }
    }
}

fn inner(a: &Points, i: usize, b: &Points, j: usize) -> f64 {
    match (coords(a, i), coords(b, j)) {
        (Coords::Scalar(x), Coords::Scalar(y)) => x * y,
        (Coords::Row(x), Coords::Row(y)) => x.dot(&y),
        (Coords::Scalar(x), Coords::Row(y)) | (Coords::Row(y), Coords::Scalar(x)) => x * y.sum(),
    }
}

fn check_compatible(a: &Points, b: &Points) -> Result<()> {
    if let (Points::Vectors(x), Points::Vectors(y)) = (a, b) {
        if x.ncols() != y.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "point dimensions differ: {} vs {}",
                x.ncols(),
                y.ncols()
            )));
        }
    }
    Ok(())
}

/// The symmetric kernel matrix `(K(x_i, x_j))_{i,j}`.
pub fn kernel_matrix(spec: &KernelSpec, points: &Points) -> Result<Array2<f64>> {
    spec.validate(points)?;
    let n = points.len();
    let mut k = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v = spec.eval(points, i, points, j)?;
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    Ok(k)
}

/// Rectangular kernel matrix with rows indexed by `new` and columns by `train`.
pub fn cross_kernel(spec: &KernelSpec, train: &Points, new: &Points) -> Result<Array2<f64>> {
    spec.validate(train)?;
    spec.validate(new)?;
    check_compatible(train, new)?;
    let mut k = Array2::zeros((new.len(), train.len()));
    for i in 0..new.len() {
        for j in 0..train.len() {
            k[[i, j]] = spec.eval(new, i, train, j)?;
        }
    }
    Ok(k)
}

/// Disjoint index sets for a precomputed-kernel experiment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Splits {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl Splits {
    pub fn new(train: Vec<usize>, validation: Vec<usize>, test: Vec<usize>, n: usize) -> Result<Self> {
        let mut owner: Vec<Option<&'static str>> = vec![None; n];
        for (name, set) in [("train", &train), ("validation", &validation), ("test", &test)] {
            for &i in set.iter() {
                if i >= n {
                    return Err(Error::Domain {
                        point: i.to_string(),
                        reason: format!("{name} index out of range for n = {n}"),
                    });
                }
                if let Some(first) = owner[i] {
                    return Err(Error::OverlappingSplits {
                        index: i,
                        first,
                        second: name,
                    });
                }
                owner[i] = Some(name);
            }
        }
        Ok(Self { train, validation, test })
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.validation.len(), self.test.len())
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

fn parse_err(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        source_name: path.display().to_string(),
        line,
        reason: reason.into(),
    }
}

fn parse_float(path: &Path, line: usize, field: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("not a decimal float: {field:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value {field:?}")));
    }
    Ok(v)
}

/// Parses a kernel file (`n=<int>` header followed by `n` rows).
pub fn parse_kernel_matrix(text: &str, path: &Path) -> Result<Array2<f64>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let n: usize = header
        .trim()
        .strip_prefix("n=")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| parse_err(path, 1, format!("expected `n=<int>`, got {header:?}")))?;
    let mut m = Array2::zeros((n, n));
    let mut rows = 0;
    for (idx, line) in lines {
        let lineno = idx + 1;
        if rows == n {
            return Err(parse_err(path, lineno, format!("more than {n} rows")));
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n {
            return Err(parse_err(path, lineno, format!("expected {n} values, found {}", fields.len())));
        }
        for (j, f) in fields.iter().enumerate() {
            m[[rows, j]] = parse_float(path, lineno, f)?;
        }
        rows += 1;
    }
    if rows != n {
        return Err(parse_err(path, rows + 2, format!("expected {n} rows, found {rows}")));
    }
    Ok(m)
}

/// Parses a splits file into disjoint index sets over `0..n`.
pub fn parse_splits(text: &str, path: &Path, n: usize) -> Result<Splits> {
    let mut sets: [Option<Vec<usize>>; 3] = [None, None, None];
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (name, rest) = line
            .split_once(':')
            .ok_or_else(|| parse_err(path, lineno, "expected `<split>: <indices>`"))?;
        let slot = match name.trim() {
            "train" => 0,
            "validation" => 1,
            "test" => 2,
            other => return Err(parse_err(path, lineno, format!("unknown split {other:?}"))),
        };
        if sets[slot].is_some() {
            return Err(parse_err(path, lineno, format!("split {:?} given twice", name.trim())));
        }
        let indices = rest
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| parse_err(path, lineno, format!("not a zero-based index: {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        sets[slot] = Some(indices);
    }
    let [train, validation, test] = sets;
    let missing = |name: &str| parse_err(path, 0, format!("missing `{name}:` line"));
    let splits = Splits::new(
        train.ok_or_else(|| missing("train"))?,
        validation.ok_or_else(|| missing("validation"))?,
        test.ok_or_else(|| missing("test"))?,
        n,
    )?;
    if splits.train.is_empty() {
        return Err(parse_err(path, 0, "train split is empty"));
    }
    Ok(splits)
}

/// Parses a labels file with one float per line.
pub fn parse_labels(text: &str, path: &Path) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_float(path, i + 1, l))
        .collect()
}

/// Loads a precomputed kernel and its splits from disk.
pub fn load_precomputed(matrix_path: &Path, splits_path: &Path) -> Result<(KernelSpec, Splits)> {
    let matrix = parse_kernel_matrix(&read_text(matrix_path)?, matrix_path)?;
    let n = matrix.nrows();
    let kernel = PrecomputedKernel::new(matrix)?;
    let splits = parse_splits(&read_text(splits_path)?, splits_path, n)?;
    Ok((KernelSpec::Precomputed(kernel), splits))
}

/// Loads a labels file and checks its length against the kernel size.
pub fn load_labels(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let labels = parse_labels(&read_text(path)?, path)?;
    if labels.len() != expected {
        return Err(parse_err(
            path,
            labels.len(),
            format!("expected {expected} labels, found {}", labels.len()),
        ));
    }
    Ok(labels)
}

/// Renders a matrix in the kernel file format.
pub fn format_kernel_matrix(m: &Array2<f64>) -> String {
    let mut out = format!("n={}\n", m.nrows());
    for row in m.rows() {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Renders splits in the splits file format.
pub fn format_splits(s: &Splits) -> String {
    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    format!(
        "train: {}\nvalidation: {}\ntest: {}\n",
        join(&s.train),
        join(&s.validation),
        join(&s.test)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn discrete_matrix() {
        let k = kernel_matrix(&KernelSpec::Discrete, &Points::Discrete(vec![1, 2, 2])).unwrap();
        assert_eq!(k, array![[1.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, 1.0, 1.0]]);
    }

    #[test]
    fn gaussian_matrix() {
        let spec = KernelSpec::gaussian(1.0).unwrap();
        let pts = Points::Vectors(array![[0.0], [(2.0 * 2f64.ln()).sqrt()], [3.0]]);
        let k = kernel_matrix(&spec, &pts).unwrap();
        for i in 0..3 {
            assert_eq!(k[[i, i]], 1.0);
        }
        assert!((k[[0, 1]] - 0.5).abs() < 1e-15);
        assert_eq!(spec.kappa_sq(&pts).unwrap(), 1.0);
        assert!(KernelSpec::gaussian(0.0).is_err());
    }

    #[test]
    fn cross_kernel_discrete() {
        let k = cross_kernel(&KernelSpec::Discrete, &Points::Discrete(vec![1, 2]), &Points::Discrete(vec![2, 3])).unwrap();
        assert_eq!(k, array![[0.0, 1.0], [0.0, 0.0]]);
    }

    #[test]
    fn cross_kernel_on_same_points_matches_matrix() {
        let pts = Points::Vectors(array![[0.1, 0.2], [1.0, -0.3], [0.5, 0.5]]);
        for spec in [KernelSpec::gaussian(0.7).unwrap(), KernelSpec::Linear] {
            assert_eq!(cross_kernel(&spec, &pts, &pts).unwrap(), kernel_matrix(&spec, &pts).unwrap());
        }
    }

    #[test]
    fn domain_errors() {
        assert!(kernel_matrix(&KernelSpec::Discrete, &Points::Discrete(vec![0, 1])).is_err());
        assert!(kernel_matrix(&KernelSpec::Discrete, &Points::Indices(vec![1])).is_err());
        let pre = KernelSpec::Precomputed(PrecomputedKernel::new(Array2::eye(3)).unwrap());
        assert!(kernel_matrix(&pre, &Points::Indices(vec![0, 3])).is_err());
    }

    #[test]
    fn precomputed_rejects_asymmetry() {
        let m = array![[1.0, 0.2], [0.1, 1.0]];
        assert!(matches!(PrecomputedKernel::new(m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn splits_parse_and_overlap() {
        let p = Path::new("splits.txt");
        let s = parse_splits("train: 0,1\nvalidation: 2\ntest: 3\n", p, 4).unwrap();
        assert_eq!(s.sizes(), (2, 1, 1));
        let err = parse_splits("train: 0,1\nvalidation: 1\ntest: 3\n", p, 4).unwrap_err();
        assert!(err.to_string().contains("overlapping splits"), "{err}");
        assert!(parse_splits("train: 0,9\nvalidation: 2\ntest: 3\n", p, 4).is_err());
        assert!(parse_splits("train: 0\nvalidation: 2\n", p, 4).is_err());
    }

    #[test]
    fn kernel_file_roundtrip_and_errors() {
        let p = Path::new("k.txt");
        let m = array![[1.0, 0.25, 0.0], [0.25, 2.0, 1e-7], [0.0, 1e-7, 0.5]];
        let parsed = parse_kernel_matrix(&format_kernel_matrix(&m), p).unwrap();
        assert_eq!(parsed, m);
        assert!(parse_kernel_matrix("3\n1,0\n", p).is_err());
        assert!(parse_kernel_matrix("n=2\n1,0\n0,x\n", p).is_err());
        assert!(parse_kernel_matrix("n=2\n1,0\n", p).is_err());
        assert!(parse_kernel_matrix("n=2\n1,0,0\n0,1\n", p).is_err());
    }
}
