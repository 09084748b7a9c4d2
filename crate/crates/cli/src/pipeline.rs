//! The commands behind each subcommand. Every function writes its outputs
//! under the configured output directory and returns what it wrote.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mulberry_core::agronomy::{nutrient_index, NutrientCounts, ThresholdTable};
use mulberry_core::dataset::{
    drop_incomplete_rows, encode_categoricals, format_number, load_csv_renamed, save_csv,
    train_test_split, ColumnKind, ColumnSchema, Dataset, SplitIndices,
};
use mulberry_core::forest::{fit_forest, fit_forest_with_workers};
use mulberry_core::linear::{fit_mlr, fit_ridge, LinearModel};
use mulberry_core::model::{
    load_model, save_model, FittedModel, ModelArtifact, ModelKind, ModelNormalization,
};
use mulberry_core::preprocess::{
    pearson_correlation, render_heatmap, ColumnRange, NormalizationParams,
};
use mulberry_core::report::{compare_models, text_table, EvaluationReport, ModelScore};
use mulberry_core::{metrics, synth, Error, Matrix};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const DEFAULT_THRESHOLDS: &str = include_str!("../../../config/nutrient_thresholds.toml");
pub const PREDICTION_COLUMN: &str = "predicted_yield";

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

/// Writes the effective configuration next to the outputs.
pub fn echo_config(cfg: &RunConfig) -> CliResult<PathBuf> {
    ensure_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join("run_config.toml");
    fs::write(&path, cfg.to_toml()?)?;
    Ok(path)
}

pub fn model_path(dir: &Path, kind: ModelKind) -> PathBuf {
    dir.join("models").join(format!("{}.json", kind.as_str()))
}

/// Feature columns selected by name, so file column order never matters.
pub fn matrix_by_names(d: &Dataset, names: &[String]) -> CliResult<Matrix> {
    let cols = names
        .iter()
        .map(|n| {
            d.column_index(n).ok_or_else(|| Error::HeaderMismatch {
                column: n.clone(),
                source_name: source_name(d),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(d.numeric_matrix(&cols)?)
}

fn source_name(d: &Dataset) -> String {
    d.provenance()
        .source
        .as_ref()
        .map_or_else(|| "<input>".to_string(), |p| p.display().to_string())
}

/// Loaded, cleaned and encoded training table with its split.
pub struct PreparedData {
    pub raw_rows: usize,
    pub dropped_rows: usize,
    pub cleaned: Dataset,
    pub encoded: Dataset,
    pub split: SplitIndices,
}

pub fn prepare(cfg: &RunConfig) -> CliResult<PreparedData> {
    cfg.validate()?;
    let schema = cfg.training_schema()?;
    let raw = load_csv_renamed(cfg.input()?, &schema, &cfg.renames)?;
    if raw.target_column().is_none() {
        return Err(Error::HeaderMismatch {
            column: cfg.target.clone(),
            source_name: source_name(&raw),
        }
        .into());
    }
    let cleaned = drop_incomplete_rows(&raw)?;
    let (encoded, _) = encode_categoricals(&cleaned);
    let split = train_test_split(&encoded, cfg.test_ratio, cfg.seed)?;
    Ok(PreparedData {
        raw_rows: raw.n_rows(),
        dropped_rows: cleaned.provenance().rows_dropped,
        cleaned,
        encoded,
        split,
    })
}

pub struct TrainOutcome {
    pub models: Vec<(ModelKind, PathBuf)>,
    pub log: String,
    pub log_path: PathBuf,
}

fn target_range(name: &str, y: &[f64], rows: &[usize]) -> CliResult<ColumnRange> {
    let values: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Err(Error::ZeroVariance(min).into());
    }
    Ok(ColumnRange {
        name: name.to_string(),
        min,
        max,
    })
}

fn fit_one(
    kind: ModelKind,
    cfg: &RunConfig,
    x: &Matrix,
    z: &[f64],
    names: &[String],
) -> CliResult<FittedModel> {
    let named = |m: LinearModel| m.with_feature_names(names.to_vec());
    Ok(match kind {
        ModelKind::Mlr => FittedModel::Mlr(named(fit_mlr(x, z)?)?),
        ModelKind::Ridge => FittedModel::Ridge(named(fit_ridge(x, z, cfg.lambda)?)?),
        ModelKind::Forest => {
            let params = cfg.forest_params();
            let forest = match cfg.workers {
                Some(w) => fit_forest_with_workers(x, z, &params, w)?,
                None => fit_forest(x, z, &params)?,
            };
            FittedModel::Forest(forest.with_feature_names(names.to_vec())?)
        }
    })
}

/// Clean, encode, split, fit min-max on the training rows, fit each model,
/// and save one artifact per model.
pub fn train(cfg: &RunConfig) -> CliResult<TrainOutcome> {
    let data = prepare(cfg)?;
    ensure_dir(&cfg.output_dir.join("models"))?;
    echo_config(cfg)?;

    let features = data.encoded.feature_columns();
    let names = data.encoded.names(&features);
    let x = data.encoded.numeric_matrix(&features)?;
    let y = data.encoded.target_values()?;
    let train = &data.split.train;

    let feature_norm = NormalizationParams::fit_matrix(&x, &names, train)?;
    let target_norm = target_range(&cfg.target, &y, train)?;
    let (x_train, _) = feature_norm.apply_matrix(&x.select_rows(train))?;
    let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
    let z_train: Vec<f64> = y_train
        .iter()
        .map(|v| (v - target_norm.min) / (target_norm.max - target_norm.min))
        .collect();
    let encoding = encode_categoricals(&data.cleaned).1;

    let mut log = String::new();
    let _ = writeln!(log, "input: {}", cfg.input()?.display());
    let _ = writeln!(log, "rows read: {}", data.raw_rows);
    let _ = writeln!(log, "rows dropped (incomplete): {}", data.dropped_rows);
    let _ = writeln!(log, "rows used: {}", data.encoded.n_rows());
    let _ = writeln!(
        log,
        "split: train {} / test {} (test_ratio {}, seed {})",
        data.split.train.len(),
        data.split.test.len(),
        cfg.test_ratio,
        cfg.seed
    );
    let _ = writeln!(log, "features: {}", names.join(","));
    let _ = writeln!(log, "target: {}", cfg.target);
    for (col, tokens) in &encoding.columns {
        let _ = writeln!(log, "categorical {col}: {}", tokens.join(","));
    }

    let mut models = Vec::new();
    for kind in cfg.model.kinds() {
        let model = fit_one(kind, cfg, &x_train, &z_train, &names)?;
        let artifact = ModelArtifact {
            model,
            target_name: cfg.target.clone(),
            normalization: Some(ModelNormalization {
                features: feature_norm.clone(),
                target: Some(target_norm.clone()),
            }),
            encoding: encoding.clone(),
        };
        let fitted = artifact.predict(&x.select_rows(train))?;
        let r2 = metrics::r2_score(&y_train, &fitted.values)?;
        let path = model_path(&cfg.output_dir, kind);
        save_model(&artifact, &path)?;

        let _ = write!(log, "model {kind}: training_r2 {}", fmt4(r2));
        match &artifact.model {
            FittedModel::Mlr(m) | FittedModel::Ridge(m) => {
                let _ = write!(
                    log,
                    ", solver {}",
                    format!("{:?}", m.diagnostics.method).to_lowercase()
                );
                if let Some(c) = m.diagnostics.condition_estimate {
                    let _ = write!(log, ", condition {c:.3e}");
                }
                if kind == ModelKind::Ridge {
                    let _ = write!(log, ", lambda {}", cfg.lambda);
                }
            }
            FittedModel::Forest(f) => {
                let _ = write!(
                    log,
                    ", trees {}, max_features {}",
                    f.params.n_trees,
                    f.params.max_features.unwrap_or(0)
                );
                if let Some(oob) = f.oob_r2 {
                    let _ = write!(log, ", oob_r2 {}", fmt4(oob));
                }
            }
        }
        let _ = writeln!(log);
        models.push((kind, path));
    }
    let log_path = cfg.output_dir.join("train_log.txt");
    fs::write(&log_path, &log)?;
    Ok(TrainOutcome {
        models,
        log,
        log_path,
    })
}

fn fmt4(v: f64) -> String {
    format!("{v:.4}")
}

pub struct EvaluateOutcome {
    pub report: EvaluationReport,
    pub report_path: PathBuf,
    pub csv: PathBuf,
    pub svg: PathBuf,
}

/// Rebuilds the split from the seed and scores saved models on the test rows
/// in original target units.
pub fn evaluate(cfg: &RunConfig, model_files: &[PathBuf]) -> CliResult<EvaluateOutcome> {
    let data = prepare(cfg)?;
    echo_config(cfg)?;
    let files: Vec<PathBuf> = if model_files.is_empty() {
        cfg.model
            .kinds()
            .into_iter()
            .map(|k| model_path(&cfg.output_dir, k))
            .collect()
    } else {
        model_files.to_vec()
    };
    let test_rows = data.cleaned.select_rows(&data.split.test);
    let mut entries = Vec::new();
    for file in &files {
        let artifact = load_model(file)?;
        let encoded = artifact.encoding.apply(&test_rows)?;
        let x = matrix_by_names(&encoded, artifact.feature_names())?;
        let y_col =
            encoded
                .column_index(&artifact.target_name)
                .ok_or_else(|| Error::HeaderMismatch {
                    column: artifact.target_name.clone(),
                    source_name: source_name(&data.cleaned),
                })?;
        let y = encoded.numeric_matrix(&[y_col])?.column(0);
        let pred = artifact.predict(&x)?;
        entries.push(ModelScore::evaluate(
            artifact.model.kind().as_str(),
            &y,
            &pred.values,
        )?);
    }
    let report = EvaluationReport::new(entries)?;
    let report_path = cfg.output_dir.join("evaluation.json");
    fs::write(&report_path, report.to_json()?)?;
    let cmp = compare_models(&report, &cfg.output_dir)?;
    Ok(EvaluateOutcome {
        report,
        report_path,
        csv: cmp.csv,
        svg: cmp.svg,
    })
}

pub struct PredictOutcome {
    pub path: PathBuf,
    pub predicted: usize,
    pub skipped: usize,
    pub clamped_cells: usize,
}

/// Schema implied by a saved model: its features, categorical where the
/// model carries an encoding for them.
fn model_schema(artifact: &ModelArtifact) -> Vec<ColumnSchema> {
    artifact
        .feature_names()
        .iter()
        .map(|n| {
            if artifact.encoding.columns.contains_key(n) {
                ColumnSchema::categorical(n)
            } else {
                ColumnSchema::feature(n, "")
            }
        })
        .collect()
}

/// Appends a prediction column to every input row. Rows missing a feature
/// get an empty prediction and are counted in the footer.
pub fn predict(model: &Path, input: &Path, cfg: &RunConfig) -> CliResult<PredictOutcome> {
    let artifact = load_model(model)?;
    let d = load_csv_renamed(input, &model_schema(&artifact), &cfg.renames)?;
    let complete: Vec<usize> = (0..d.n_rows())
        .filter(|&i| d.rows()[i].iter().all(|c| !c.is_missing()))
        .collect();
    let encoded = artifact.encoding.apply(&d.select_rows(&complete))?;
    let (values, clamped_cells) = if complete.is_empty() {
        (Vec::new(), 0)
    } else {
        let x = matrix_by_names(&encoded, artifact.feature_names())?;
        let p = artifact.predict(&x)?;
        (p.values, p.clamped_cells)
    };
    let mut by_row: Vec<Option<f64>> = vec![None; d.n_rows()];
    for (&i, &v) in complete.iter().zip(&values) {
        by_row[i] = Some(v);
    }

    ensure_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join("predictions.csv");
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_path(input)?;
    let mut out = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(Vec::new());
    let mut header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    header.push(PREDICTION_COLUMN.to_string());
    out.write_record(&header)?;
    for (record, pred) in rdr.records().zip(&by_row) {
        let mut fields: Vec<String> = record?.iter().map(str::to_string).collect();
        fields.push(pred.map(format_number).unwrap_or_default());
        out.write_record(&fields)?;
    }
    let mut bytes = out
        .into_inner()
        .map_err(|e| CliError::Core(Error::Io(e.into_error())))?;
    let skipped = d.n_rows() - complete.len();
    bytes.extend(format!("# clamped_cells={clamped_cells} skipped_rows={skipped}\n").as_bytes());
    fs::write(&path, bytes)?;
    Ok(PredictOutcome {
        path,
        predicted: complete.len(),
        skipped,
        clamped_cells,
    })
}

pub struct CorrelateOutcome {
    pub csv: PathBuf,
    pub svg: PathBuf,
    pub dim: usize,
}

/// Pearson matrix over the feature and target columns of the cleaned data.
pub fn correlate(cfg: &RunConfig) -> CliResult<CorrelateOutcome> {
    let mut schema = cfg.training_schema()?;
    for c in schema.iter_mut().filter(|c| c.name == cfg.target) {
        c.optional = true;
    }
    let raw = load_csv_renamed(cfg.input()?, &schema, &cfg.renames)?;
    let (encoded, _) = encode_categoricals(&drop_incomplete_rows(&raw)?);
    let c = pearson_correlation(&encoded)?;
    echo_config(cfg)?;
    let csv = cfg.output_dir.join("correlation.csv");
    c.write_csv(fs::File::create(&csv)?)?;
    let svg = cfg.output_dir.join("heatmap.svg");
    render_heatmap(&c, &svg)?;
    Ok(CorrelateOutcome {
        csv,
        svg,
        dim: c.dim(),
    })
}

pub struct CompareOutcome {
    pub report: EvaluationReport,
    pub table: String,
    pub csv: PathBuf,
    pub svg: PathBuf,
}

pub fn compare(reports: &[PathBuf], output_dir: &Path) -> CliResult<CompareOutcome> {
    let parsed = reports
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => Error::FileNotFound(p.clone()),
                _ => Error::Io(e),
            })?;
            EvaluationReport::from_json(&text)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let report = EvaluationReport::merge(&parsed)?;
    ensure_dir(output_dir)?;
    let files = compare_models(&report, output_dir)?;
    Ok(CompareOutcome {
        table: text_table(&report),
        report,
        csv: files.csv,
        svg: files.svg,
    })
}

pub fn synth(n: usize, seed: u64, output_dir: &Path) -> CliResult<PathBuf> {
    let d = synth::generate(n, seed)?;
    ensure_dir(output_dir)?;
    let path = output_dir.join("synthetic_soil.csv");
    save_csv(&d, &path)?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NutrientRow {
    pub nutrient: String,
    pub counts: NutrientCounts,
    pub index: f64,
}

/// Low/medium/high counts and the nutrient index for every nutrient in the
/// threshold table that the input provides.
pub fn nutrient_summary(
    input: &Path,
    thresholds: &ThresholdTable,
    cfg: &RunConfig,
) -> CliResult<Vec<NutrientRow>> {
    let schema: Vec<ColumnSchema> = thresholds
        .nutrients
        .keys()
        .map(|n| {
            ColumnSchema {
                kind: ColumnKind::Numeric,
                ..ColumnSchema::feature(n, "")
            }
            .optional()
        })
        .collect();
    let d = load_csv_renamed(input, &schema, &cfg.renames)?;
    if d.n_cols() == 0 {
        return Err(Error::EmptySelection.into());
    }
    let mut rows = Vec::new();
    for (j, col) in d.schema().iter().enumerate() {
        let values = d.rows().iter().filter_map(|r| r[j].as_number());
        let counts = thresholds.nutrients[&col.name].classify(values);
        if counts.nt == 0 {
            continue;
        }
        rows.push(NutrientRow {
            nutrient: col.name.clone(),
            index: nutrient_index(&counts)?,
            counts,
        });
    }
    if rows.is_empty() {
        return Err(Error::ZeroTotal.into());
    }
    Ok(rows)
}

pub fn write_nutrient_summary(rows: &[NutrientRow], output_dir: &Path) -> CliResult<PathBuf> {
    ensure_dir(output_dir)?;
    let path = output_dir.join("nutrient_index.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["nutrient", "low", "medium", "high", "total", "index"])?;
    for r in rows {
        let c = r.counts;
        w.write_record([
            r.nutrient.clone(),
            c.nl.to_string(),
            c.nm.to_string(),
            c.nh.to_string(),
            c.nt.to_string(),
            format_number(r.index),
        ])?;
    }
    w.flush()?;
    Ok(path)
}
