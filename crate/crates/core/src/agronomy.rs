//! Block-level soil fertility: the nutrient index over low/medium/high counts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NutrientCounts {
    pub nl: u64,
    pub nm: u64,
    pub nh: u64,
    pub nt: u64,
}

impl NutrientCounts {
    pub fn new(nl: u64, nm: u64, nh: u64) -> Self {
        NutrientCounts {
            nl,
            nm,
            nh,
            nt: nl + nm + nh,
        }
    }
}

/// `(Nl·1 + Nm·2 + Nh·3) / Nt`, always in `[1, 3]`.
pub fn nutrient_index(c: &NutrientCounts) -> Result<f64> {
    if c.nt == 0 {
        return Err(Error::ZeroTotal);
    }
    let sum = c.nl + c.nm + c.nh;
    if sum != c.nt {
        return Err(Error::InconsistentCounts { sum, total: c.nt });
    }
    Ok((c.nl as f64 + 2.0 * c.nm as f64 + 3.0 * c.nh as f64) / c.nt as f64)
}

/// Class boundaries for one nutrient: values below `low_below` are low,
/// values above `high_above` are high, anything else is medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NutrientThresholds {
    pub low_below: f64,
    pub high_above: f64,
}

impl NutrientThresholds {
    pub fn classify<I: IntoIterator<Item = f64>>(&self, values: I) -> NutrientCounts {
        let (mut nl, mut nm, mut nh) = (0, 0, 0);
        for v in values {
            if v < self.low_below {
                nl += 1;
            } else if v > self.high_above {
                nh += 1;
            } else {
                nm += 1;
            }
        }
        NutrientCounts::new(nl, nm, nh)
    }
}

/// Threshold table keyed by column name, as stored in
/// `config/nutrient_thresholds.toml`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    #[serde(flatten)]
    pub nutrients: BTreeMap<String, NutrientThresholds>,
}

impl ThresholdTable {
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: ThresholdTable = toml::from_str(text)
            .map_err(|e| Error::InvalidSchema(format!("threshold table: {e}")))?;
        for (name, t) in &table.nutrients {
            if !(t.low_below <= t.high_above) {
                return Err(Error::InvalidSchema(format!(
                    "thresholds for `{name}` are inverted"
                )));
            }
        }
        Ok(table)
    }
}
