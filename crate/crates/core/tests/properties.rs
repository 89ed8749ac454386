use ndarray::Array2;
use proptest::prelude::*;
use specreg::estimator::{fit, fit_grid, prepare_grid};
use specreg::filters::{FilterFamily, FilterKind};
use specreg::kernels::{cross_kernel, kernel_matrix, KernelSpec, Points};
use specreg::spectral::{eigh_symmetric, eigvalsh_symmetric};
use specreg::spectrum::{BoundParams, SpectrumModel};

fn symmetric(n: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(-5.0..5.0f64, n * n).prop_map(move |v| {
        let a = Array2::from_shape_vec((n, n), v).unwrap();
        (&a + &a.t()) * 0.5
    })
}

fn filter_of(kind: u8) -> FilterFamily {
    match kind % 3 {
        0 => FilterFamily::ridge(1.0).unwrap(),
        1 => FilterFamily::cutoff(1.0).unwrap(),
        _ => FilterFamily::landweber(1.0).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_reconstructs(a in (1usize..24).prop_flat_map(symmetric)) {
        let s = eigh_symmetric(a.view()).unwrap();
        let scale = a.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let n = a.nrows();
        let err = (&s.reconstruct() - &a).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        prop_assert!(err <= 1e-10 * scale * n as f64);
        let v = s.eigenvectors();
        let gram = v.t().dot(v) - Array2::<f64>::eye(n);
        prop_assert!(gram.iter().all(|x| x.abs() < 1e-10));
        prop_assert!(s.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn filter_identity_and_conditions(kind in 0u8..3, lambda in 1e-4..0.9f64, t in 1e-6..1.0f64) {
        let f = filter_of(kind);
        let g = f.evaluate(lambda, t).unwrap();
        let r = f.residual(lambda, t).unwrap();
        prop_assert!((t * g + r - 1.0).abs() < 1e-12);
        prop_assert!(t * g <= 1.0 + 1e-15);
        prop_assert!(r.abs() <= 1.0);
        prop_assert!(g <= 1.0 / lambda * (1.0 + 1e-12));
    }

    #[test]
    fn kernel_matrices_symmetric_psd(xs in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 1..40), h in 0.2..3.0f64) {
        let pts = Points::Vectors(Array2::from_shape_fn((xs.len(), 2), |(i, j)| if j == 0 { xs[i].0 } else { xs[i].1 }));
        for spec in [KernelSpec::gaussian(h).unwrap(), KernelSpec::Linear] {
            let k = kernel_matrix(&spec, &pts).unwrap();
            prop_assert_eq!(&k, &k.t().to_owned());
            let kappa = spec.kappa_sq(&pts).unwrap();
            prop_assert!(k.diag().iter().all(|&d| d <= kappa));
            let low = eigvalsh_symmetric(k.view()).unwrap().into_iter().fold(f64::INFINITY, f64::min);
            prop_assert!(low >= -1e-9 * kappa.max(1.0));
            prop_assert_eq!(cross_kernel(&spec, &pts, &pts).unwrap(), k);
        }
    }

    #[test]
    fn fit_linear_in_labels(
        xs in prop::collection::vec(1usize..15, 2..30),
        seed in 0u64..1000,
        kind in 0u8..3,
        lambda in 1e-3..0.5f64,
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
    ) {
        let n = xs.len();
        let y1: Vec<f64> = (0..n).map(|i| ((seed + i as u64) as f64 * 0.37).sin()).collect();
        let y2: Vec<f64> = (0..n).map(|i| ((seed * 3 + i as u64) as f64 * 0.91).cos()).collect();
        let mix: Vec<f64> = y1.iter().zip(&y2).map(|(u, v)| a * u + b * v).collect();
        let pts = Points::Discrete(xs);
        let f = filter_of(kind);
        let g1 = fit(&pts, &y1, &KernelSpec::Discrete, &f, lambda).unwrap();
        let g2 = fit(&pts, &y2, &KernelSpec::Discrete, &f, lambda).unwrap();
        let gm = fit(&pts, &mix, &KernelSpec::Discrete, &f, lambda).unwrap();
        for i in 0..n {
            let want = a * g1.dual_coefficients()[i] + b * g2.dual_coefficients()[i];
            prop_assert!((gm.dual_coefficients()[i] - want).abs() <= 1e-10);
        }
    }

    #[test]
    fn grid_reproduces_fit(xs in prop::collection::vec(1usize..20, 1..40), kind in 0u8..3, lambdas in prop::collection::vec(1e-4..0.6f64, 1..6)) {
        let mut lambdas = lambdas;
        lambdas.sort_by(f64::total_cmp);
        let y: Vec<f64> = xs.iter().map(|&x| (x as f64).sqrt() - 2.0).collect();
        let pts = Points::Discrete(xs);
        let f = filter_of(kind);
        let ctx = prepare_grid(&pts, &y, &KernelSpec::Discrete, None).unwrap();
        for rec in fit_grid(&ctx, &f, &lambdas).unwrap() {
            let direct = fit(&pts, &y, &KernelSpec::Discrete, &f, rec.lambda).unwrap();
            for (u, v) in rec.dual_coefficients.iter().zip(direct.dual_coefficients()) {
                prop_assert!((u - v).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn effective_dimension_monotone_and_bounded(values in prop::collection::vec(0.0..1.0f64, 1..50), l1 in 1e-5..1.0f64, l2 in 1e-5..1.0f64) {
        prop_assume!(values.iter().any(|&v| v > 0.0) && l1 != l2);
        let m = SpectrumModel::explicit(values.clone()).unwrap();
        let (lo, hi) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
        let dlo = m.effective_dimension(lo).unwrap();
        let dhi = m.effective_dimension(hi).unwrap();
        prop_assert!(dhi < dlo);
        let trace: f64 = values.iter().sum();
        prop_assert!(dlo <= values.len() as f64 && dlo <= trace / lo * (1.0 + 1e-12));
    }

    #[test]
    fn source_norm_non_decreasing_in_zeta(size in 2usize..200, a in 0.0..3.0f64, coeffs in prop::collection::vec(-2.0..2.0f64, 1..10), z1 in 0.0..4.0f64, z2 in 0.0..4.0f64) {
        let m = SpectrumModel::marginal_power(size, a).unwrap();
        let coeffs: Vec<f64> = coeffs.into_iter().take(size).collect();
        let m = m.with_discrete_target(&coeffs).unwrap();
        let (lo, hi) = if z1 < z2 { (z1, z2) } else { (z2, z1) };
        let nlo = m.source_norm_sq(lo).unwrap().value().unwrap();
        let nhi = m.source_norm_sq(hi).unwrap().value().unwrap();
        prop_assert!(nlo <= nhi * (1.0 + 1e-12));
    }

    #[test]
    fn bound_non_increasing_as_noise_drops(s1 in 0.0..1.0f64, s2 in 0.0..1.0f64, lambda in 0.02..1.0f64, zeta in 0.0..3.0f64) {
        let m = SpectrumModel::marginal_power(128, 1.5).unwrap().with_discrete_target(&[1.0, 0.5]).unwrap();
        let p = |sigma_sq| BoundParams { zeta, sigma_sq, kappa_sq: 1.0, kappa_delta_sq: 1.0, delta: 0.0, lambda, n: 1000 };
        let (lo, hi) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
        prop_assert!(m.theorem_bound(&p(lo)).unwrap().total <= m.theorem_bound(&p(hi)).unwrap().total);
    }
}

#[test]
fn qualification_kinds() {
    assert_eq!(FilterKind::Ridge.nominal_qualification(), 1.0);
    assert!(FilterKind::Cutoff.nominal_qualification().is_infinite());
}
