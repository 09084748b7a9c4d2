//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails.

#[path = "../../core/tests/support/oracles.rs"]
mod oracles;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use mulberry_core::agronomy::{nutrient_index, NutrientCounts};
use mulberry_core::dataset::{
    drop_incomplete_rows, load_csv, soil_samples, soil_schema, EncodingMap,
};
use mulberry_core::forest::{best_split, fit_forest, ForestParams};
use mulberry_core::linear::{fit_mlr, fit_ridge};
use mulberry_core::metrics::{r2_score, rmse, rss};
use mulberry_core::model::{
    from_json, load_model, save_model, to_json, FittedModel, ModelArtifact, ModelNormalization,
};
use mulberry_core::preprocess::{
    apply_minmax, invert_minmax, pearson, pearson_correlation, NormalizationParams,
};
use mulberry_core::report::EvaluationReport;
use mulberry_core::{rng, synth, Matrix};
use rand::Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))
}

fn ols_oracle() -> Check {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let mut r = rng::seeded(seed);
        let d = r.random_range(1..=10);
        let n = r.random_range(d + 2..=50);
        let x = oracles::random_matrix(&mut r, n, d);
        let y: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
        let m = fit_mlr(&x, &y).map_err(|e| format!("seed {seed}: {e}"))?;
        let (b0, beta) = oracles::pinv_fit(&x, &y);
        worst = worst
            .max(max_abs_diff(&m.coefficients, &beta))
            .max((m.intercept - b0).abs());
    }
    ensure(worst < 1e-8, || format!("max |Δβ| = {worst:e}"))?;
    within(Duration::from_secs(5), start)?;
    Ok(format!("100 instances, max |Δβ| = {worst:.1e}"))
}

fn ridge_closed_form() -> Check {
    let mut worst0 = 0.0f64;
    for seed in 0..20u64 {
        let mut r = rng::seeded(1000 + seed);
        let d = r.random_range(1..=8);
        let n = r.random_range(d + 2..=40);
        let x = oracles::random_matrix(&mut r, n, d);
        let y: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
        let ols = fit_mlr(&x, &y).map_err(|e| e.to_string())?;
        let r0 = fit_ridge(&x, &y, 0.0).map_err(|e| e.to_string())?;
        worst0 = worst0.max(max_abs_diff(&ols.coefficients, &r0.coefficients));
        let mut prev = f64::INFINITY;
        for lambda in [0.0, 0.1, 1.0, 10.0, 1e3] {
            let m = fit_ridge(&x, &y, lambda).map_err(|e| e.to_string())?;
            let norm = m.coefficients.iter().map(|b| b * b).sum::<f64>().sqrt();
            ensure(norm <= prev * (1.0 + 1e-12), || {
                format!("seed {seed}: ‖β‖ grew at λ={lambda}")
            })?;
            prev = norm;
        }
    }
    ensure(worst0 < 1e-8, || format!("λ=0 vs OLS differ by {worst0:e}"))?;
    let x = Matrix::from_vec(2, 1, vec![-1.0, 1.0]).unwrap();
    let m = fit_ridge(&x, &[-1.0, 1.0], 2.0).map_err(|e| e.to_string())?;
    ensure(
        (m.coefficients[0] - 0.5).abs() < 1e-12 && m.intercept.abs() < 1e-12,
        || format!("1-D slope {} intercept {}", m.coefficients[0], m.intercept),
    )?;
    Ok(format!(
        "λ=0 |Δβ| = {worst0:.1e}, 1-D slope 0.5, shrinkage monotone on 20 instances"
    ))
}

fn split_oracle() -> Check {
    let start = Instant::now();
    for seed in 0..200u64 {
        let mut r = rng::seeded(seed);
        let n = r.random_range(2..=30);
        let d = r.random_range(1..=4);
        let x = Matrix::from_vec(
            n,
            d,
            (0..n * d)
                .map(|_| r.random_range(0..12) as f64 * 0.25)
                .collect(),
        )
        .unwrap();
        let y: Vec<f64> = (0..n).map(|_| r.random_range(-10.0..10.0)).collect();
        let min_leaf = r.random_range(1..=3);
        let rows: Vec<usize> = (0..n).collect();
        let feats: Vec<usize> = (0..d).collect();
        let got = best_split(&rows, &x, &y, &feats, min_leaf);
        let want = oracles::brute_force_split(&rows, &x, &y, &feats, min_leaf);
        match (got, want) {
            (None, None) => {}
            (Some(g), Some((f, t, gain))) => {
                ensure((g.feature, g.threshold) == (f, t), || {
                    format!(
                        "seed {seed}: ({}, {}) vs ({f}, {t})",
                        g.feature, g.threshold
                    )
                })?;
                ensure(
                    (g.impurity_decrease - gain).abs() <= 1e-9 * (1.0 + gain.abs()),
                    || format!("seed {seed}: reduction"),
                )?;
            }
            (g, w) => return Err(format!("seed {seed}: got {g:?}, oracle {w:?}")),
        }
    }
    within(Duration::from_secs(5), start)?;
    Ok("200 instances match exhaustive enumeration".into())
}

fn metric_suite() -> Check {
    let y = [1.0, 2.0, 3.0];
    let e = |r: mulberry_core::Result<f64>| r.map_err(|e| e.to_string());
    ensure(e(r2_score(&y, &y))? == 1.0, || "ŷ = y".into())?;
    ensure(e(r2_score(&y, &[2.0, 2.0, 2.0]))? == 0.0, || {
        "ŷ = mean".into()
    })?;
    let r = e(r2_score(&y, &[1.1, 1.9, 3.2]))?;
    ensure((r - 0.97).abs() < 1e-12, || format!("R² = {r}"))?;
    let mut g = rng::seeded(4);
    for _ in 0..100 {
        let n = g.random_range(2..40);
        let yt: Vec<f64> = (0..n).map(|_| g.random_range(-10.0..10.0)).collect();
        let yp: Vec<f64> = (0..n).map(|_| g.random_range(-10.0..10.0)).collect();
        let c = g.random_range(-100.0..100.0);
        let shift = |v: &[f64]| v.iter().map(|a| a + c).collect::<Vec<_>>();
        let a = e(r2_score(&yt, &yp))?;
        let b = e(r2_score(&shift(&yt), &shift(&yp)))?;
        ensure((a - b).abs() < 1e-10, || {
            format!("shift changed R² {a} -> {b}")
        })?;
        let s = e(rss(&yt, &yp))?;
        let m = e(rmse(&yt, &yp))?;
        ensure((s - n as f64 * m * m).abs() < 1e-10 * s.max(1.0), || {
            "RSS ≠ n·rmse²".into()
        })?;
    }
    Ok("R² = 1, 0, 0.97; shift invariance and RSS = n·rmse² on 100 vectors".into())
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_mulberry")
}

fn mulberry(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(bin())
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!(
            "`mulberry {}` failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr).trim()
        )
    })
}

/// synth → train → evaluate → correlate with default settings.
fn full_pipeline(dir: &Path, workers: &str) -> Result<(), String> {
    mulberry(
        dir,
        &["synth", "--n", "500", "--seed", "7", "--output-dir", "out"],
    )?;
    let common = [
        "--input",
        "out/synthetic_soil.csv",
        "--output-dir",
        "out",
        "--test-ratio",
        "0.2",
    ];
    let mut train = vec!["train"];
    train.extend(common);
    train.extend(["--workers", workers]);
    mulberry(dir, &train)?;
    let mut eval = vec!["evaluate"];
    eval.extend(common);
    mulberry(dir, &eval)?;
    let mut corr = vec!["correlate"];
    corr.extend(common);
    mulberry(dir, &corr)
}

fn qualitative_ordering() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    full_pipeline(dir.path(), "1")?;
    within(Duration::from_secs(30), start)?;
    let text = std::fs::read_to_string(dir.path().join("out/evaluation.json"))
        .map_err(|e| e.to_string())?;
    let report = EvaluationReport::from_json(&text).map_err(|e| e.to_string())?;
    let r2 = |name: &str| {
        report
            .entries
            .iter()
            .find(|s| s.model_name == name)
            .map(|s| s.r2)
    };
    let (Some(f), Some(r), Some(m)) = (r2("forest"), r2("ridge"), r2("mlr")) else {
        return Err("report lacks a model".into());
    };
    ensure(f - r >= 0.10 && f - m >= 0.10, || {
        format!("forest {f:.4}, ridge {r:.4}, mlr {m:.4}")
    })?;
    ensure(
        report.ranking.first().map(String::as_str) == Some("forest"),
        || format!("ranking {:?}", report.ranking),
    )?;
    let csv = std::fs::read_to_string(dir.path().join("out/comparison.csv"))
        .map_err(|e| e.to_string())?;
    ensure(
        csv.lines().nth(1).is_some_and(|l| l.starts_with("forest,")),
        || "comparison.csv not led by forest".into(),
    )?;
    Ok(format!(
        "test R²: forest {f:.4}, ridge {r:.4}, mlr {m:.4} in {:.2?}",
        start.elapsed()
    ))
}

const DETERMINISTIC_OUTPUTS: [&str; 10] = [
    "synthetic_soil.csv",
    "models/mlr.json",
    "models/ridge.json",
    "models/forest.json",
    "train_log.txt",
    "evaluation.json",
    "comparison.csv",
    "comparison.svg",
    "correlation.csv",
    "heatmap.svg",
];

fn determinism() -> Check {
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (d, w) in dirs.iter().zip(["1", "1", "8"]) {
        full_pipeline(d.path(), w)?;
    }
    let read = |d: &tempfile::TempDir, f: &str| -> Result<Vec<u8>, String> {
        let p: PathBuf = d.path().join("out").join(f);
        std::fs::read(&p).map_err(|e| format!("{}: {e}", p.display()))
    };
    for f in DETERMINISTIC_OUTPUTS {
        let base = read(&dirs[0], f)?;
        ensure(read(&dirs[1], f)? == base, || {
            format!("{f} differs between repeated runs")
        })?;
        ensure(read(&dirs[2], f)? == base, || {
            format!("{f} differs between 1 and 8 workers")
        })?;
    }
    Ok(format!(
        "{} output files byte-identical across 2 repeats and 1 vs 8 workers",
        DETERMINISTIC_OUTPUTS.len()
    ))
}

fn normalization() -> Check {
    let mut g = rng::seeded(77);
    for _ in 0..50 {
        let (n, d) = (g.random_range(2..20), g.random_range(1..6));
        let x = oracles::random_matrix(&mut g, n, d);
        let names: Vec<String> = (0..d).map(|j| format!("c{j}")).collect();
        let rows: Vec<usize> = (0..n).collect();
        let p = NormalizationParams::fit_matrix(&x, &names, &rows).map_err(|e| e.to_string())?;
        for i in 0..n {
            let z = apply_minmax(&p, x.row(i)).map_err(|e| e.to_string())?;
            let back = invert_minmax(&p, &z).map_err(|e| e.to_string())?;
            ensure(max_abs_diff(&back, x.row(i)) <= 1e-12, || {
                "round trip > 1e-12".into()
            })?;
        }
        let wild: Vec<f64> = (0..d).map(|_| g.random_range(-50.0..50.0)).collect();
        let z = apply_minmax(&p, &wild).map_err(|e| e.to_string())?;
        ensure(z.iter().all(|v| (0.0..=1.0).contains(v)), || {
            format!("out-of-range input gave {z:?}")
        })?;
    }
    let c = Matrix::from_vec(3, 1, vec![4.0, 4.0, 4.0]).unwrap();
    let p = NormalizationParams::fit_matrix(&c, &["c".into()], &[0, 1, 2])
        .map_err(|e| e.to_string())?;
    ensure(
        apply_minmax(&p, &[4.0]).map_err(|e| e.to_string())? == vec![0.0],
        || "constant column".into(),
    )?;
    Ok("bounded in [0,1], round trip ≤ 1e-12, constant column → 0".into())
}

fn correlation() -> Check {
    let mut g = rng::seeded(123);
    for _ in 0..50 {
        let (n, d) = (g.random_range(2..30), g.random_range(1..7));
        let x = oracles::random_matrix(&mut g, n, d);
        let schema = (0..d)
            .map(|j| mulberry_core::dataset::ColumnSchema::feature(&format!("c{j}"), ""))
            .collect();
        let ds =
            mulberry_core::dataset::Dataset::from_matrix(schema, &x).map_err(|e| e.to_string())?;
        let c = pearson_correlation(&ds).map_err(|e| e.to_string())?;
        for i in 0..d {
            ensure(c.get(i, i) == 1.0, || "diagonal".into())?;
            for j in 0..d {
                ensure((c.get(i, j) - c.get(j, i)).abs() <= 1e-12, || {
                    "symmetry".into()
                })?;
                ensure(c.get(i, j).abs() <= 1.0 + 1e-12, || "bounds".into())?;
            }
        }
    }
    let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]);
    ensure((r - 0.9820).abs() < 1e-4, || format!("r = {r}"))?;
    Ok(format!("50 random datasets; hand case r = {r:.4}"))
}

fn reference_fixtures() -> Check {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/reference_samples.csv");
    let d = load_csv(&path, &soil_schema(true)).map_err(|e| e.to_string())?;
    let clean = drop_incomplete_rows(&d).map_err(|e| e.to_string())?;
    let samples = soil_samples(&clean).map_err(|e| e.to_string())?;
    let yields: Vec<Option<f64>> = samples.iter().map(|s| s.yield_label).collect();
    ensure(
        samples.len() == 2 && yields == [Some(50.36), Some(48.62)],
        || format!("samples {yields:?}"),
    )?;
    let ni = |c| nutrient_index(&c).map_err(|e| e.to_string());
    ensure(
        ni(NutrientCounts {
            nl: 2,
            nm: 3,
            nh: 5,
            nt: 10,
        })? == 2.3,
        || "NI(2,3,5,10)".into(),
    )?;
    ensure(
        ni(NutrientCounts::new(4, 0, 0))? == 1.0 && ni(NutrientCounts::new(0, 0, 4))? == 3.0,
        || "NI bounds".into(),
    )?;
    Ok("2 complete samples (50.36, 48.62); NI = 2.3, bounds 1 and 3".into())
}

fn persistence() -> Check {
    let d = synth::generate(150, 5).map_err(|e| e.to_string())?;
    let cols = d.feature_columns();
    let names = d.names(&cols);
    let raw = d.numeric_matrix(&cols).map_err(|e| e.to_string())?;
    let rows: Vec<usize> = (0..d.n_rows()).collect();
    let features =
        NormalizationParams::fit_matrix(&raw, &names, &rows).map_err(|e| e.to_string())?;
    let (x, _) = features.apply_matrix(&raw).map_err(|e| e.to_string())?;
    let y = d.target_values().map_err(|e| e.to_string())?;
    let models = [
        FittedModel::Mlr(
            fit_mlr(&x, &y)
                .unwrap()
                .with_feature_names(names.clone())
                .unwrap(),
        ),
        FittedModel::Ridge(
            fit_ridge(&x, &y, 1.0)
                .unwrap()
                .with_feature_names(names.clone())
                .unwrap(),
        ),
        FittedModel::Forest(
            fit_forest(
                &x,
                &y,
                &ForestParams {
                    n_trees: 50,
                    seed: 3,
                    ..Default::default()
                },
            )
            .unwrap()
            .with_feature_names(names.clone())
            .unwrap(),
        ),
    ];
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut g = rng::seeded(8);
    let inputs = Matrix::from_vec(
        100,
        names.len(),
        (0..100 * names.len())
            .map(|_| g.random_range(-1.0..100.0))
            .collect(),
    )
    .unwrap();
    for model in models {
        let kind = model.kind();
        let a = ModelArtifact {
            model,
            target_name: "yield".into(),
            normalization: Some(ModelNormalization {
                features: features.clone(),
                target: None,
            }),
            encoding: EncodingMap::default(),
        };
        let path = dir.path().join(format!("{kind}.json"));
        save_model(&a, &path).map_err(|e| e.to_string())?;
        let loaded = load_model(&path).map_err(|e| e.to_string())?;
        let (p, q) = (
            a.predict(&inputs).unwrap().values,
            loaded.predict(&inputs).unwrap().values,
        );
        ensure(
            p.iter().zip(&q).all(|(a, b)| a.to_bits() == b.to_bits()),
            || format!("{kind}: predictions changed"),
        )?;
        let text = to_json(&a).map_err(|e| e.to_string())?;
        for frac in [0.1, 0.5, 0.9, 0.999] {
            let cut = (text.len() as f64 * frac) as usize;
            std::fs::write(&path, &text[..cut]).map_err(|e| e.to_string())?;
            ensure(load_model(&path).is_err(), || {
                format!("{kind}: truncation at {cut} accepted")
            })?;
            ensure(from_json(&text[..cut]).is_err(), || {
                format!("{kind}: truncation at {cut} parsed")
            })?;
        }
    }
    Ok("mlr, ridge, forest bit-exact on 100 inputs; truncated files rejected".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("OLS matches pseudo-inverse oracle", ols_oracle),
        ("ridge closed-form checks", ridge_closed_form),
        ("split matches brute-force oracle", split_oracle),
        ("R² metric suite", metric_suite),
        (
            "forest outranks linear models on synthetic data",
            qualitative_ordering,
        ),
        ("pipeline determinism across runs and workers", determinism),
        ("min-max normalization properties", normalization),
        ("correlation properties", correlation),
        ("bundled reference fixtures", reference_fixtures),
        ("model persistence round trip", persistence),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS  criterion {:>2}: {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {:>2}: {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
