//! Held-out evaluation and the model comparison table and bar chart.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::format_number;
use crate::error::{Error, Result};
use crate::metrics;
use crate::svg::{escape, header, label2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub model_name: String,
    pub r2: f64,
    pub rmse: f64,
    pub mae: f64,
    pub n_test: usize,
    pub rss: f64,
    pub tss: f64,
}

impl ModelScore {
    pub fn evaluate(model_name: &str, y_true: &[f64], y_pred: &[f64]) -> Result<ModelScore> {
        Ok(ModelScore {
            model_name: model_name.to_string(),
            r2: metrics::r2_score(y_true, y_pred)?,
            rmse: metrics::rmse(y_true, y_pred)?,
            mae: metrics::mae(y_true, y_pred)?,
            n_test: y_true.len(),
            rss: metrics::rss(y_true, y_pred)?,
            tss: metrics::tss(y_true),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub entries: Vec<ModelScore>,
    /// Model names by descending R², ties alphabetical.
    pub ranking: Vec<String>,
}

impl EvaluationReport {
    pub fn new(entries: Vec<ModelScore>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidSchema(
                "evaluation report needs at least one model".into(),
            ));
        }
        let mut names: Vec<&str> = entries.iter().map(|e| e.model_name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSchema(
                "duplicate model name in report".into(),
            ));
        }
        let ranking = rank(&entries);
        Ok(EvaluationReport { entries, ranking })
    }

    /// Entries in ranking order.
    pub fn ranked(&self) -> Vec<&ModelScore> {
        self.ranking
            .iter()
            .filter_map(|name| self.entries.iter().find(|e| &e.model_name == name))
            .collect()
    }

    pub fn merge(reports: &[EvaluationReport]) -> Result<Self> {
        EvaluationReport::new(
            reports
                .iter()
                .flat_map(|r| r.entries.iter().cloned())
                .collect(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::SchemaViolation(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: EvaluationReport =
            serde_json::from_str(text).map_err(|e| Error::SchemaViolation(e.to_string()))?;
        // ranking is derived; rebuild it rather than trusting the file
        EvaluationReport::new(r.entries)
    }
}

fn rank(entries: &[ModelScore]) -> Vec<String> {
    let mut order: Vec<&ModelScore> = entries.iter().collect();
    order.sort_by(|a, b| {
        b.r2.total_cmp(&a.r2)
            .then_with(|| a.model_name.cmp(&b.model_name))
    });
    order.into_iter().map(|e| e.model_name.clone()).collect()
}

/// `model,r2,rmse,mae,n_test`, one row per model in ranking order.
pub fn comparison_csv(report: &EvaluationReport) -> String {
    let mut s = String::from("model,r2,rmse,mae,n_test\n");
    for e in report.ranked() {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            e.model_name,
            format_number(e.r2),
            format_number(e.rmse),
            format_number(e.mae),
            e.n_test
        );
    }
    s
}

pub fn text_table(report: &EvaluationReport) -> String {
    let width = report
        .entries
        .iter()
        .map(|e| e.model_name.len())
        .max()
        .unwrap_or(5)
        .max(5);
    let mut s = format!(
        "{:<width$}  {:>8}  {:>10}  {:>10}  {:>6}\n",
        "model", "R2", "RMSE", "MAE", "n_test"
    );
    for e in report.ranked() {
        let _ = writeln!(
            s,
            "{:<width$}  {:>8.4}  {:>10.4}  {:>10.4}  {:>6}",
            e.model_name, e.r2, e.rmse, e.mae, e.n_test
        );
    }
    s
}

/// Bar chart of test R² per model, sorted descending, values to 2 decimals.
pub fn comparison_svg(report: &EvaluationReport) -> String {
    const BAR: u32 = 60;
    const GAP: u32 = 30;
    const LEFT: u32 = 60;
    const TOP: u32 = 50;
    const PLOT_H: u32 = 220;

    let ranked = report.ranked();
    let lo = ranked.iter().map(|e| e.r2).fold(0.0_f64, f64::min);
    let hi = ranked.iter().map(|e| e.r2).fold(1.0_f64, f64::max);
    let y_of = |v: f64| TOP as f64 + (hi - v) / (hi - lo) * PLOT_H as f64;
    let n = ranked.len() as u32;
    let width = LEFT + n * (BAR + GAP) + GAP;
    let height = TOP + PLOT_H + 50;

    let mut s = header(width, height);
    let _ = writeln!(
        s,
        "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>"
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">Model comparison (test R&#178;)</text>",
        width / 2
    );
    let mut ticks = vec![0.0, 0.5, 1.0];
    if lo < 0.0 {
        ticks.push(lo);
    }
    if hi > 1.0 {
        ticks.push(hi);
    }
    for t in ticks {
        let y = y_of(t);
        let _ = writeln!(
            s,
            "<line x1=\"{LEFT}\" y1=\"{y:.1}\" x2=\"{}\" y2=\"{y:.1}\" stroke=\"#dddddd\" stroke-width=\"1\"/>",
            width - GAP / 2
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            LEFT - 6,
            y + 4.0,
            label2(t)
        );
    }
    let base = y_of(0.0);
    for (k, e) in ranked.iter().enumerate() {
        let x = LEFT + GAP + k as u32 * (BAR + GAP);
        let top = y_of(e.r2);
        let (y, h) = if e.r2 >= 0.0 {
            (top, base - top)
        } else {
            (base, top - base)
        };
        let fill = if e.r2 >= 0.0 { "#1f77b4" } else { "#7f7f7f" };
        let _ = writeln!(
            s,
            "<rect x=\"{x}\" y=\"{y:.1}\" width=\"{BAR}\" height=\"{h:.1}\" fill=\"{fill}\"/>"
        );
        let label_y = if e.r2 >= 0.0 { top - 6.0 } else { top + 14.0 };
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{label_y:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            x + BAR / 2,
            label2(e.r2)
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            x + BAR / 2,
            TOP + PLOT_H + 24,
            escape(&e.model_name)
        );
    }
    let _ = writeln!(
        s,
        "<line x1=\"{LEFT}\" y1=\"{base:.1}\" x2=\"{}\" y2=\"{base:.1}\" stroke=\"#333333\" stroke-width=\"1\"/>",
        width - GAP / 2
    );
    s.push_str("</svg>\n");
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonFiles {
    pub csv: PathBuf,
    pub svg: PathBuf,
}

/// Writes `comparison.csv` and `comparison.svg` into `dir`.
pub fn compare_models(report: &EvaluationReport, dir: &Path) -> Result<ComparisonFiles> {
    let files = ComparisonFiles {
        csv: dir.join("comparison.csv"),
        svg: dir.join("comparison.svg"),
    };
    std::fs::write(&files.csv, comparison_csv(report))?;
    std::fs::write(&files.svg, comparison_svg(report))?;
    Ok(files)
}
