//! Model congruence: how aligned two models' outputs are.
//!
//! For classification this is the proportion of test cases both models get
//! right; for segmentation it is the Pearson correlation of the per-image
//! DSC values. Published quantiles are available as presets; users with raw
//! paired outputs can compute their own value empirically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a congruence value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    PresetMedian,
    PresetQ1,
    PresetQ3,
    UserSupplied,
    Empirical,
}

/// An assumed or measured congruence value, with provenance and a flag that
/// records whether it had to be adjusted onto the feasible bounds of a
/// specific comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CongruenceAssumption {
    pub value: f64,
    pub provenance: Provenance,
    pub clamped: bool,
}

impl CongruenceAssumption {
    pub fn user_supplied(value: f64) -> Self {
        CongruenceAssumption {
            value,
            provenance: Provenance::UserSupplied,
            clamped: false,
        }
    }

    pub fn empirical(value: f64) -> Self {
        CongruenceAssumption {
            value,
            provenance: Provenance::Empirical,
            clamped: false,
        }
    }
}

/// One of the three published quantiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetQuantile {
    Q1,
    Median,
    Q3,
}

impl PresetQuantile {
    pub const ALL: [PresetQuantile; 3] =
        [PresetQuantile::Q1, PresetQuantile::Median, PresetQuantile::Q3];

    pub fn label(&self) -> &'static str {
        match self {
            PresetQuantile::Q1 => "q1",
            PresetQuantile::Median => "median",
            PresetQuantile::Q3 => "q3",
        }
    }
}

/// Published congruence quantiles for one task family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CongruencePresets {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl CongruencePresets {
    pub fn get(&self, quantile: PresetQuantile) -> CongruenceAssumption {
        let (value, provenance) = match quantile {
            PresetQuantile::Q1 => (self.q1, Provenance::PresetQ1),
            PresetQuantile::Median => (self.median, Provenance::PresetMedian),
            PresetQuantile::Q3 => (self.q3, Provenance::PresetQ3),
        };
        CongruenceAssumption {
            value,
            provenance,
            clamped: false,
        }
    }
}

/// Joint-correct-proportion quantiles for accuracy comparisons.
pub const CLASSIFICATION_PRESETS: CongruencePresets = CongruencePresets {
    q1: 0.47,
    median: 0.67,
    q3: 0.83,
};

/// DSC-correlation quantiles for segmentation comparisons.
pub const SEGMENTATION_PRESETS: CongruencePresets = CongruencePresets {
    q1: 0.44,
    median: 0.67,
    q3: 0.82,
};

/// Per-image correctness indicators for two classifiers on the same test set.
#[derive(Clone, Debug)]
pub struct PairedClassificationOutcomes {
    correct_a: Vec<bool>,
    correct_b: Vec<bool>,
}

impl PairedClassificationOutcomes {
    pub fn new(correct_a: Vec<bool>, correct_b: Vec<bool>) -> Result<Self> {
        if correct_a.is_empty() {
            return Err(Error::invalid("paired outcomes must be non-empty"));
        }
        if correct_a.len() != correct_b.len() {
            return Err(Error::invalid(format!(
                "paired outcome vectors differ in length: {} vs {}",
                correct_a.len(),
                correct_b.len()
            )));
        }
        Ok(PairedClassificationOutcomes { correct_a, correct_b })
    }

    pub fn len(&self) -> usize {
        self.correct_a.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn accuracy_a(&self) -> f64 {
        count(&self.correct_a) / self.len() as f64
    }

    pub fn accuracy_b(&self) -> f64 {
        count(&self.correct_b) / self.len() as f64
    }
}

fn count(v: &[bool]) -> f64 {
    v.iter().filter(|&&b| b).count() as f64
}

/// Per-image DSC values for two methods on the same test set.
#[derive(Clone, Debug)]
pub struct PairedDscVectors {
    dsc_a: Vec<f64>,
    dsc_b: Vec<f64>,
}

impl PairedDscVectors {
    pub fn new(dsc_a: Vec<f64>, dsc_b: Vec<f64>) -> Result<Self> {
        if dsc_a.len() < 3 {
            return Err(Error::invalid(format!(
                "paired DSC vectors need >= 3 images, got {}",
                dsc_a.len()
            )));
        }
        if dsc_a.len() != dsc_b.len() {
            return Err(Error::invalid(format!(
                "paired DSC vectors differ in length: {} vs {}",
                dsc_a.len(),
                dsc_b.len()
            )));
        }
        for &v in dsc_a.iter().chain(dsc_b.iter()) {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("DSC value {v} outside [0, 1]")));
            }
        }
        Ok(PairedDscVectors { dsc_a, dsc_b })
    }

    pub fn len(&self) -> usize {
        self.dsc_a.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Proportion of images both classifiers predicted correctly.
pub fn congruence_classification(
    outcomes: &PairedClassificationOutcomes,
) -> CongruenceAssumption {
    let both = outcomes
        .correct_a
        .iter()
        .zip(&outcomes.correct_b)
        .filter(|(&a, &b)| a && b)
        .count();
    CongruenceAssumption::empirical(both as f64 / outcomes.len() as f64)
}

/// Pearson correlation of the two per-image DSC vectors.
pub fn congruence_segmentation(vectors: &PairedDscVectors) -> Result<CongruenceAssumption> {
    let r = pearson(&vectors.dsc_a, &vectors.dsc_b)?;
    Ok(CongruenceAssumption::empirical(r))
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::degenerate(
            "correlation undefined: a DSC vector has zero variance",
        ));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Linear-interpolation quartiles (the common "type 7" convention) of a
/// slice of plain values. Input order does not matter.
pub fn quartiles(values: &[f64]) -> Result<(f64, f64, f64)> {
    if values.is_empty() {
        return Err(Error::invalid("quartiles of an empty slice"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in quantile input"));
    Ok((
        quantile_sorted(&sorted, 0.25),
        quantile_sorted(&sorted, 0.5),
        quantile_sorted(&sorted, 0.75),
    ))
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Quartiles of a set of congruence values.
pub fn congruence_quantiles(values: &[CongruenceAssumption]) -> Result<(f64, f64, f64)> {
    let raw: Vec<f64> = values.iter().map(|c| c.value).collect();
    quartiles(&raw)
}

/// Reads a paired-output CSV with header `id,a,b` where `a` and `b` are
/// 0/1 correctness indicators.
pub fn read_paired_outcomes(path: &std::path::Path) -> Result<PairedClassificationOutcomes> {
    let (a, b) = read_paired_columns(path)?;
    let to_bool = |v: f64, row: usize| -> Result<bool> {
        if v == 0.0 {
            Ok(false)
        } else if v == 1.0 {
            Ok(true)
        } else {
            Err(Error::invalid(format!(
                "row {row}: classification outcomes must be 0 or 1, got {v}"
            )))
        }
    };
    let ba: Vec<bool> = a
        .into_iter()
        .enumerate()
        .map(|(i, v)| to_bool(v, i + 2))
        .collect::<Result<_>>()?;
    let bb: Vec<bool> = b
        .into_iter()
        .enumerate()
        .map(|(i, v)| to_bool(v, i + 2))
        .collect::<Result<_>>()?;
    PairedClassificationOutcomes::new(ba, bb)
}

/// Reads a paired-output CSV with header `id,a,b` where `a` and `b` are
/// per-image DSC values in [0, 1].
pub fn read_paired_dsc(path: &std::path::Path) -> Result<PairedDscVectors> {
    let (a, b) = read_paired_columns(path)?;
    PairedDscVectors::new(a, b)
}

fn read_paired_columns(path: &std::path::Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let expected = ["id", "a", "b"];
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::invalid(format!(
            "paired CSV header must be `id,a,b`, got `{}`",
            got.join(",")
        )));
    }
    let mut col_a = Vec::new();
    let mut col_b = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2;
        let parse = |field: &str, name: &str| -> Result<f64> {
            field.trim().parse::<f64>().map_err(|_| {
                Error::invalid(format!("row {row}: column `{name}` is not a number: `{field}`"))
            })
        };
        col_a.push(parse(&record[1], "a")?);
        col_b.push(parse(&record[2], "b")?);
    }
    Ok((col_a, col_b))
}
