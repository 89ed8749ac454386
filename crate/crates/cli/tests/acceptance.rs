//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specreg::estimator::{fit, fit_grid, prepare_grid};
use specreg::filters::{linear_grid, FilterFamily};
use specreg::kernels::{format_kernel_matrix, format_splits, kernel_matrix, KernelSpec, Points, Splits};
use specreg::spectral::{eigh_symmetric, fractional_power_gap, power_inequality_gap};
use specreg_cli::config::{
    BoundsConfig, ConcentrationConfig, FiltersVerifyConfig, RateMode, RatesConfig, ReproduceConfig,
};
use specreg_cli::{bounds, concentration, filters_verify, rates, reproduce_sim};

type Check = Result<String, String>;
type Criterion<'a> = (&'a str, Box<dyn Fn() -> Check + 'a>);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn simulation_medians(n: usize, out: &Path) -> Result<(f64, f64), String> {
    let cfg = ReproduceConfig {
        domain_size: n,
        n,
        ..ReproduceConfig::default()
    };
    let report = reproduce_sim(&cfg, out).map_err(err)?.report;
    let median = |m: &str| report.summary(m).map(|s| s.mu_mse.median).ok_or(format!("no {m} summary"));
    Ok((median("krr")?, median("kpcr")?))
}

fn ac1(out: &Path) -> Check {
    let (krr, kpcr) = simulation_medians(1 << 13, &out.join("full"))?;
    let (krr_small, kpcr_small) = simulation_medians(1 << 11, &out.join("fallback"))?;
    let detail = format!(
        "N=n=8192, 5 seeds: median KRR {krr:.3e}, KPCR {kpcr:.3e}; N=n=2048: KRR {krr_small:.3e}, KPCR {kpcr_small:.3e}"
    );
    ensure(
        kpcr < krr
            && (1e-3..=1e-2).contains(&krr)
            && (5e-5..=1.5e-3).contains(&kpcr)
            && kpcr_small < krr_small,
        detail,
    )
}

fn ac2(out: &Path) -> Check {
    let cfg = RatesConfig {
        replicates: 100,
        ..RatesConfig::default()
    };
    let report = rates(&cfg, out).map_err(err)?.report;
    let krr = report.slope("krr").ok_or("no krr slope")?;
    let kpcr = report.slope("kpcr").ok_or("no kpcr slope")?;
    ensure(
        (-0.82..=-0.52).contains(&krr) && (-0.82..=-0.52).contains(&kpcr),
        format!("a=2, zeta=0, n=256..4096, 100 replicates: slope KRR {krr:.3}, KPCR {kpcr:.3} (target -0.667)"),
    )
}

fn ac3(out: &Path) -> Check {
    let cfg = RatesConfig {
        mode: RateMode::FiniteRank,
        replicates: 100,
        ..RatesConfig::default()
    };
    let report = rates(&cfg, out).map_err(err)?.report;
    let kpcr = report.slope("kpcr").ok_or("no kpcr slope")?;
    let krr = report.slope("krr").ok_or("no krr slope")?;
    let unmet = report.rows.iter().filter(|r| r.precondition == Some(false)).count();
    ensure(
        (-1.2..=-0.85).contains(&kpcr) && krr >= kpcr + 0.1,
        format!(
            "J=5, r=1/2: slope KPCR {kpcr:.3}, ridge (zeta=1) {krr:.3}; sample-size condition unmet at {unmet} of {} ladder points",
            cfg.ladder.len()
        ),
    )
}

fn ac4(out: &Path) -> Check {
    let rows = bounds(&BoundsConfig::default(), out).map_err(err)?.report;
    let passing: Vec<_> = rows.iter().filter(|r| r.window_ok).collect();
    let dominated = passing.iter().filter(|r| r.dominated == Some(true)).count();
    let worst = passing
        .iter()
        .filter_map(|r| r.terms.map(|t| (r.mc_risk - 2.0 * r.mc_standard_error) / t.total))
        .fold(0.0_f64, f64::max);
    ensure(
        passing.len() >= 20 && dominated == passing.len(),
        format!(
            "{dominated}/{} window-passing configs dominated (of {}), 200 replicates, max (risk - 2SE)/bound {worst:.3e}",
            passing.len(),
            rows.len()
        ),
    )
}

fn ac5(out: &Path) -> Check {
    let cfg = ConcentrationConfig::default();
    let rows = concentration(&cfg, out).map_err(err)?.report;
    let held = rows.iter().filter(|r| r.result.holds()).count();
    let nontrivial = rows.iter().filter(|r| r.result.tail_bound < 1.0).count();
    ensure(
        held == rows.len() && cfg.replicates >= 2000,
        format!(
            "{held}/{} configs within tail and moment bounds, {} replicates each, {nontrivial} with tail bound < 1",
            rows.len(),
            cfg.replicates
        ),
    )
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

fn ac6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut ridge_worst = 0.0_f64;
    for _ in 0..50 {
        let n = rng.random_range(2..=128);
        let points = Points::Vectors(Array2::from_shape_fn((n, 3), |_| rng.random_range(-2.0..2.0)));
        let kernel = KernelSpec::gaussian(rng.random_range(0.3..2.0)).map_err(err)?;
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lambda = 10f64.powf(rng.random_range(-4.0..0.0));
        let k = kernel_matrix(&kernel, &points).map_err(err)?;
        let est = fit(&points, &y, &kernel, &FilterFamily::ridge(1.0).map_err(err)?, lambda).map_err(err)?;
        let a = DMatrix::from_fn(n, n, |i, j| k[[i, j]]) + DMatrix::identity(n, n) * (n as f64 * lambda);
        let direct = a.lu().solve(&DVector::from_column_slice(&y)).ok_or("singular system")?;
        ridge_worst = ridge_worst.max(rel_err(est.dual_coefficients(), direct.as_slice()));
    }

    let n = 40;
    let points = Points::Vectors(Array2::from_shape_fn((n, 1), |(i, _)| i as f64));
    let kernel = KernelSpec::gaussian(0.6).map_err(err)?;
    let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let k = kernel_matrix(&kernel, &points).map_err(err)?;
    let min_eig = *eigh_symmetric((k.clone() / n as f64).view()).map_err(err)?.eigenvalues().last().unwrap();
    let cutoff = FilterFamily::cutoff(1.0).map_err(err)?;
    let interp = fit(&points, &y, &kernel, &cutoff, 0.5 * min_eig).map_err(err)?;
    let interp_err = rel_err(&interp.predict(&points).map_err(err)?, &y);

    let n = 96;
    let points = Points::Vectors(Array2::from_shape_fn((n, 2), |_| rng.random_range(-1.0..1.0)));
    let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let ctx = prepare_grid(&points, &y, &kernel, None).map_err(err)?;
    let lambdas = linear_grid(1e-4, 0.5, 64);
    let mut grid_worst = 0.0_f64;
    for filter in [
        FilterFamily::ridge(1.0),
        FilterFamily::cutoff(1.0),
        FilterFamily::landweber(1.0),
    ] {
        let filter = filter.map_err(err)?;
        let records = fit_grid(&ctx, &filter, &lambdas).map_err(err)?;
        for (rec, &lambda) in records.iter().zip(&lambdas) {
            let single = fit(&points, &y, &kernel, &filter, lambda).map_err(err)?;
            let scale = single.dual_coefficients().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            for (a, b) in rec.dual_coefficients.iter().zip(single.dual_coefficients()) {
                grid_worst = grid_worst.max((a - b).abs() / scale);
            }
        }
    }
    ensure(
        ridge_worst <= 1e-8 && interp_err <= 1e-8 && grid_worst <= 1e-12,
        format!(
            "ridge vs LU worst rel err {ridge_worst:.2e} (50 instances); cutoff interpolation rel err {interp_err:.2e}; grid vs single fit worst {grid_worst:.2e}"
        ),
    )
}

fn ac7(out: &Path) -> Check {
    let report = filters_verify(&FiltersVerifyConfig::default(), out).map_err(err)?.report;
    let axioms = report.conditions.iter().all(|c| c.check.weak);
    let equality_only = report
        .conditions
        .iter()
        .filter(|c| !c.check.holds)
        .map(|c| format!("{} {}", c.method, c.condition))
        .collect::<Vec<_>>();
    let q = |m: &str, xi: f64| report.qualification(m, xi).ok_or(format!("missing {m} xi={xi}"));
    let ridge1 = q("krr", 1.0)?;
    let ridge2 = q("krr", 2.0)?;
    // Witness: t = κ² = 1 and the smallest λ, where |1 − t g|·t²/λ² = 1/(λ(1 + λ)).
    let expected = 1.0 / (1e-4 * (1.0 + 1e-4));
    let witness_ok = ridge2.witness_t == 1.0
        && ridge2.witness_lambda == 1e-4
        && (ridge2.ratio - expected).abs() <= 1e-9 * expected;
    let mut cutoff_ok = true;
    for xi in [1.0, 2.0, 4.0, 8.0, 16.0] {
        cutoff_ok &= q("kpcr", xi)?.holds;
    }
    ensure(
        axioms && ridge1.holds && !ridge2.holds && witness_ok && cutoff_ok,
        format!(
            "R1-R3 hold on 60x10^4 grids for all families (equality attained: {}); ridge xi=1 pass, xi=2 fail at lambda={:e}, t={} with constant {:.4e}; cutoff passes xi in {{1,2,4,8,16}}",
            equality_only.join(", "),
            ridge2.witness_lambda,
            ridge2.witness_t,
            ridge2.ratio
        ),
    )
}

fn random_psd(n: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut s = Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0));
    s = &s + &s.t();
    let q = eigh_symmetric(s.view()).unwrap().eigenvectors().clone();
    let d: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    let mut qd = q.clone();
    for (mut col, v) in qd.columns_mut().into_iter().zip(&d) {
        col *= *v;
    }
    let m = qd.dot(&q.t());
    (&m + &m.t()) * 0.5
}

/// A nearby admissible partner: `A` with its spectrum perturbed and clamped.
fn nearby(a: &Array2<f64>, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = a.nrows();
    let mut e = Array2::from_shape_fn((n, n), |_| rng.random_range(-1e-3..1e-3));
    e = &e + &e.t();
    let spec = eigh_symmetric((a + &e).view()).unwrap();
    let m = spec.map_eigenvalues(|v| v.clamp(lo, hi));
    (&m + &m.t()) * 0.5
}

fn ac8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut power_ok, mut frac_ok) = (0, 0);
    let (mut power_ratio, mut frac_ratio) = (0.0_f64, 0.0_f64);
    for i in 0..500 {
        let n = rng.random_range(2..=10);
        let a = random_psd(n, 0.0, 0.95, &mut rng);
        let b = if i % 2 == 0 { random_psd(n, 0.0, 0.95, &mut rng) } else { nearby(&a, 0.0, 0.95, &mut rng) };
        let gap = power_inequality_gap(a.view(), b.view(), rng.random_range(1.0..4.0)).map_err(err)?;
        power_ok += gap.holds() as usize;
        power_ratio = power_ratio.max(gap.lhs / gap.rhs);

        let floor = rng.random_range(0.05..0.5);
        let a = random_psd(n, floor, 0.95, &mut rng);
        let b = if i % 2 == 0 { random_psd(n, floor, 0.95, &mut rng) } else { nearby(&a, floor, 0.95, &mut rng) };
        let gap = fractional_power_gap(a.view(), b.view(), rng.random_range(0.05..0.95), floor).map_err(err)?;
        frac_ok += gap.holds() as usize;
        frac_ratio = frac_ratio.max(gap.lhs / gap.rhs);
    }
    ensure(
        power_ok == 500 && frac_ok == 500,
        format!(
            "integer-type power: {power_ok}/500 (max lhs/rhs {power_ratio:.3}); fractional power: {frac_ok}/500 (max lhs/rhs {frac_ratio:.3})"
        ),
    )
}

fn ac9(out: &Path) -> Check {
    fs::create_dir_all(out).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 150;
    let x = Array2::<f64>::from_shape_fn((n, 2), |_| rng.random_range(-1.0..1.0));
    let labels: Vec<f64> = x
        .rows()
        .into_iter()
        .map(|r| (3.0 * r[0]).sin() + r[1] * r[1] + 0.1 * rng.random_range(-1.0..1.0))
        .collect();
    let k = kernel_matrix(&KernelSpec::gaussian(0.5).map_err(err)?, &Points::Vectors(x)).map_err(err)?;
    let splits = Splits::new((0..90).collect(), (90..120).collect(), (120..150).collect(), n).map_err(err)?;
    let kpath = out.join("kernel.txt");
    let spath = out.join("splits.txt");
    let lpath = out.join("labels.txt");
    fs::write(&kpath, format_kernel_matrix(&k)).map_err(err)?;
    fs::write(&spath, format_splits(&splits)).map_err(err)?;
    fs::write(&lpath, labels.iter().map(|v| format!("{v:?}\n")).collect::<String>()).map_err(err)?;
    let status = Command::new(env!("CARGO_BIN_EXE_specreg"))
        .arg("fit-precomputed")
        .arg("--kernel")
        .arg(&kpath)
        .arg("--splits")
        .arg(&spath)
        .arg("--labels")
        .arg(&lpath)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(err)?;
    if !status.status.success() {
        return Err(String::from_utf8_lossy(&status.stderr).into_owned());
    }
    let csv = fs::read_to_string(out.join("fit_precomputed.csv")).map_err(err)?;
    let mut lines = csv.lines().skip(1);
    let header: Vec<&str> = lines.next().ok_or("empty csv")?.split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).ok_or(format!("no column {name}"));
    let (mc, tc, dc) = (col("method")?, col("test_mse")?, col("effective_dimension")?);
    let mut parts = Vec::new();
    let mut ok = true;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let test: f64 = f[tc].parse().map_err(err)?;
        let dim: f64 = f[dc].parse().map_err(err)?;
        ok &= test.is_finite() && dim.is_finite() && dim > 0.0;
        parts.push(format!("{} test MSE {test:.4e}, effective dimension {dim:.2}", f[mc]));
    }
    ensure(ok && parts.len() == 2, format!("n=150 Gaussian kernel, 90/30/30 split: {}", parts.join("; ")))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let root = dir.path();
    let checks: Vec<Criterion> = vec![
        ("AC1 simulation reproduction", Box::new(|| ac1(&root.join("ac1")))),
        ("AC2 polynomial-decay rate", Box::new(|| ac2(&root.join("ac2")))),
        ("AC3 finite-rank adaptation", Box::new(|| ac3(&root.join("ac3")))),
        ("AC4 excess-risk bound dominance", Box::new(|| ac4(&root.join("ac4")))),
        ("AC5 concentration lemmas", Box::new(|| ac5(&root.join("ac5")))),
        ("AC6 estimator oracle equivalence", Box::new(ac6)),
        ("AC7 filter conditions and qualification", Box::new(|| ac7(&root.join("ac7")))),
        ("AC8 operator power inequalities", Box::new(ac8)),
        ("AC9 precomputed-kernel pipeline", Box::new(|| ac9(&root.join("ac9")))),
    ];
    let mut failed = 0;
    for (name, check) in &checks {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {name} [{secs:.1}s]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} [{secs:.1}s]: {detail}");
            }
        }
    }
    println!("{} of {} acceptance criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
