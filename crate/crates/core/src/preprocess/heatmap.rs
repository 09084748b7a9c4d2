use std::fmt::Write as _;
use std::path::Path;

use super::CorrelationMatrix;
use crate::error::Result;
use crate::svg::{escape, header, label2};

const CELL: u32 = 48;
const POSITIVE: &str = "#d62728";
const NEGATIVE: &str = "#7f7f7f";

/// Heatmap of a correlation matrix as SVG 1.1 text. Positive coefficients
/// are red and negative ones gray, with fill opacity equal to |r|.
pub fn heatmap_svg(c: &CorrelationMatrix) -> String {
    let d = c.dim() as u32;
    let longest = c
        .labels
        .iter()
        .map(|l| l.chars().count())
        .max()
        .unwrap_or(0) as u32;
    let margin = 16 + 7 * longest;
    let top = margin + 24;
    let (width, height) = (margin + d * CELL + 16, top + d * CELL + 16);

    let mut s = header(width, height);
    let _ = writeln!(
        s,
        "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>"
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">Attribute correlation (Pearson r)</text>",
        width / 2
    );
    for (j, label) in c.labels.iter().enumerate() {
        let x = margin + j as u32 * CELL + CELL / 2;
        let _ = writeln!(
            s,
            "<text x=\"{x}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            top - 8,
            escape(label)
        );
    }
    for (i, label) in c.labels.iter().enumerate() {
        let y = top + i as u32 * CELL;
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{}</text>",
            margin - 6,
            y + CELL / 2 + 4,
            escape(label)
        );
        for j in 0..c.dim() {
            let r = c.get(i, j);
            let x = margin + j as u32 * CELL;
            let fill = if r < 0.0 { NEGATIVE } else { POSITIVE };
            let opacity = r.abs().min(1.0);
            let ink = if opacity > 0.6 { "#ffffff" } else { "#000000" };
            let _ = writeln!(
                s,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{fill}\" fill-opacity=\"{opacity:.3}\" stroke=\"#cccccc\" stroke-width=\"1\"/>"
            );
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\" fill=\"{ink}\">{}</text>",
                x + CELL / 2,
                y + CELL / 2 + 4,
                label2(r)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn render_heatmap(c: &CorrelationMatrix, path: &Path) -> Result<()> {
    std::fs::write(path, heatmap_svg(c))?;
    Ok(())
}
