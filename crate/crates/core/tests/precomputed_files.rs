use std::fs;

use ndarray::Array2;
use specreg::kernels::{
    cross_kernel, format_kernel_matrix, format_splits, kernel_matrix, load_labels, load_precomputed, KernelSpec, Points, Splits,
};

#[test]
fn small_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let m = Array2::from_shape_fn((4, 4), |(i, j)| 1.0 / (1.0 + i as f64 + j as f64));
    let kpath = dir.path().join("k.txt");
    let spath = dir.path().join("s.txt");
    fs::write(&kpath, format_kernel_matrix(&m)).unwrap();
    fs::write(&spath, "train: 0,1\nvalidation: 2\ntest: 3\n").unwrap();
    let (spec, splits) = load_precomputed(&kpath, &spath).unwrap();
    assert_eq!(splits, Splits { train: vec![0, 1], validation: vec![2], test: vec![3] });
    let train = Points::Indices(splits.train.clone());
    let eval = Points::Indices(vec![3, 2]);
    let sub = cross_kernel(&spec, &train, &eval).unwrap();
    // Submatrix entries come straight from the parsed file.
    let text = fs::read_to_string(&kpath).unwrap();
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    for (a, &i) in [3usize, 2].iter().enumerate() {
        for (b, &j) in [0usize, 1].iter().enumerate() {
            assert_eq!(sub[[a, b]], rows[i][j]);
        }
    }
    assert_eq!(kernel_matrix(&spec, &train).unwrap(), cross_kernel(&spec, &train, &train).unwrap());
}

#[test]
fn overlap_and_asymmetry_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let kpath = dir.path().join("k.txt");
    let spath = dir.path().join("s.txt");
    fs::write(&kpath, format_kernel_matrix(&Array2::eye(4))).unwrap();
    fs::write(&spath, "train: 0,1\nvalidation: 1\ntest: 3\n").unwrap();
    let err = load_precomputed(&kpath, &spath).unwrap_err();
    assert!(err.to_string().contains("overlapping splits"));
    fs::write(&kpath, "n=2\n1,0.5\n0.4,1\n").unwrap();
    fs::write(&spath, "train: 0\nvalidation: 1\ntest:\n").unwrap();
    assert!(load_precomputed(&kpath, &spath).is_err());
    assert!(load_precomputed(&dir.path().join("missing.txt"), &spath).is_err());
}

#[test]
fn large_identity_with_standard_split_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let n = 3300;
    let kpath = dir.path().join("k.txt");
    let spath = dir.path().join("s.txt");
    fs::write(&kpath, format_kernel_matrix(&Array2::eye(n))).unwrap();
    let splits = Splits::new((0..1000).collect(), (1000..2100).collect(), (2100..3300).collect(), n).unwrap();
    fs::write(&spath, format_splits(&splits)).unwrap();
    let (spec, loaded) = load_precomputed(&kpath, &spath).unwrap();
    assert_eq!(loaded.sizes(), (1000, 1100, 1200));
    assert!(matches!(spec, KernelSpec::Precomputed(_)));
    let lpath = dir.path().join("y.txt");
    fs::write(&lpath, "0.5\n".repeat(n)).unwrap();
    assert_eq!(load_labels(&lpath, n).unwrap().len(), n);
    assert!(load_labels(&lpath, n + 1).is_err());
}
