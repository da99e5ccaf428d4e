//! Corpus ingestion, eligibility filtering, batch estimation, and
//! threshold-curve construction.
//!
//! The input is a CSV of extracted paper comparisons, one row per
//! comparison:
//!
//! ```text
//! paper_id,task,split,n_test,metric_a,metric_b,sd_a,sd_b,metric_scale
//! ```
//!
//! Rows either parse into [`CorpusRecord`]s or land in a machine-readable
//! rejection report; nothing is silently dropped. Eligibility filtering then
//! partitions the parsed records by the selection criteria (independent test
//! set, both metric values, known test size), again with reason codes.

use std::io::Read;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classification::{pfc_classification, ClassificationComparison};
use crate::congruence::{
    CongruenceAssumption, PresetQuantile, CLASSIFICATION_PRESETS, SEGMENTATION_PRESETS,
};
use crate::error::{Error, Result};
use crate::estimate::EstimateMethod;
use crate::kernels::RngStream;
use crate::segmentation::{pfc_segmentation, SdImputationModel, SdSource, SegmentationComparison};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Classification,
    Segmentation,
}

impl Task {
    pub fn label(&self) -> &'static str {
        match self {
            Task::Classification => "classification",
            Task::Segmentation => "segmentation",
        }
    }

    pub fn presets(&self) -> crate::congruence::CongruencePresets {
        match self {
            Task::Classification => CLASSIFICATION_PRESETS,
            Task::Segmentation => SEGMENTATION_PRESETS,
        }
    }
}

/// Data-splitting strategy reported by the paper.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Split {
    TrainTest,
    TrainValTest,
    CvPlusTest,
    CvOnly,
    NoneReported,
}

impl Split {
    fn parse(s: &str) -> Option<Split> {
        match s {
            "train-test" => Some(Split::TrainTest),
            "train-val-test" => Some(Split::TrainValTest),
            "cv-plus-test" => Some(Split::CvPlusTest),
            "cv-only" => Some(Split::CvOnly),
            "none-reported" => Some(Split::NoneReported),
            _ => None,
        }
    }

    /// Whether the split includes a test set distinct from model selection.
    pub fn has_independent_test(&self) -> bool {
        matches!(self, Split::TrainTest | Split::TrainValTest | Split::CvPlusTest)
    }
}

/// One extracted paper comparison, metric values normalized to unit scale.
/// Metric values are optional because ineligible rows (e.g. a paper that
/// reported only the winner's score) still enter the corpus and are
/// partitioned out with a reason during filtering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub paper_id: String,
    pub task: Task,
    pub split: Split,
    pub n_test: Option<u64>,
    pub metric_a: Option<f64>,
    pub metric_b: Option<f64>,
    pub sd_a: Option<f64>,
    pub sd_b: Option<f64>,
}

/// Reason a CSV row failed to parse into a record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    MalformedField,
    OutOfRange,
    RankOrderViolation,
}

impl RejectReason {
    pub fn code(&self) -> &'static str {
        match self {
            RejectReason::MalformedField => "malformed-field",
            RejectReason::OutOfRange => "out-of-range",
            RejectReason::RankOrderViolation => "rank-order-violation",
        }
    }
}

/// One rejected row with its position and reason.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line number in the source file (header is line 1).
    pub line: usize,
    pub paper_id: String,
    pub reason: RejectReason,
    pub detail: String,
}

/// Reason an otherwise well-formed record is excluded from estimation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExclusionReason {
    NoIndependentTest,
    MissingMetricValues,
    MissingTestSize,
}

impl ExclusionReason {
    pub fn code(&self) -> &'static str {
        match self {
            ExclusionReason::NoIndependentTest => "no-independent-test",
            ExclusionReason::MissingMetricValues => "missing-metric-values",
            ExclusionReason::MissingTestSize => "missing-test-size",
        }
    }
}

/// An excluded record together with why it was excluded.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Excluded {
    pub record: CorpusRecord,
    pub reason: ExclusionReason,
}

/// Supported ingestion schema versions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemaVersion {
    V1,
}

pub const SCHEMA_V1_HEADER: [&str; 9] = [
    "paper_id", "task", "split", "n_test", "metric_a", "metric_b", "sd_a", "sd_b", "metric_scale",
];

/// Parses a corpus CSV file. A malformed header is fatal; malformed rows are
/// collected in the rejection report and never abort the run.
pub fn ingest_corpus(
    path: &Path,
    version: SchemaVersion,
) -> Result<(Vec<CorpusRecord>, Vec<Rejection>)> {
    let file = std::fs::File::open(path)?;
    ingest_corpus_reader(file, version)
}

/// Reader-based variant of [`ingest_corpus`].
pub fn ingest_corpus_reader<R: Read>(
    reader: R,
    version: SchemaVersion,
) -> Result<(Vec<CorpusRecord>, Vec<Rejection>)> {
    let SchemaVersion::V1 = version;
    let mut csv_reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != SCHEMA_V1_HEADER {
        return Err(Error::invalid(format!(
            "corpus header must be `{}`, got `{}`",
            SCHEMA_V1_HEADER.join(","),
            got.join(",")
        )));
    }

    let mut records = Vec::new();
    let mut rejections = Vec::new();
    for (i, row) in csv_reader.records().enumerate() {
        let line = i + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                rejections.push(Rejection {
                    line,
                    paper_id: String::new(),
                    reason: RejectReason::MalformedField,
                    detail: e.to_string(),
                });
                continue;
            }
        };
        match parse_row(&row) {
            Ok(record) => records.push(record),
            Err((reason, detail)) => rejections.push(Rejection {
                line,
                paper_id: row.get(0).unwrap_or("").trim().to_string(),
                reason,
                detail,
            }),
        }
    }
    Ok((records, rejections))
}

fn parse_row(row: &csv::StringRecord) -> std::result::Result<CorpusRecord, (RejectReason, String)> {
    use RejectReason::*;

    if row.len() != SCHEMA_V1_HEADER.len() {
        return Err((
            MalformedField,
            format!("expected {} fields, got {}", SCHEMA_V1_HEADER.len(), row.len()),
        ));
    }
    let field = |i: usize| row.get(i).unwrap_or("").trim();

    let paper_id = field(0).to_string();
    if paper_id.is_empty() {
        return Err((MalformedField, "empty paper_id".into()));
    }

    let task = match field(1) {
        "classification" => Task::Classification,
        "segmentation" => Task::Segmentation,
        other => return Err((MalformedField, format!("unknown task `{other}`"))),
    };

    let split = Split::parse(field(2))
        .ok_or_else(|| (MalformedField, format!("unknown split `{}`", field(2))))?;

    let n_test = match field(3) {
        "" => None,
        s => Some(
            s.parse::<u64>()
                .map_err(|_| (MalformedField, format!("n_test is not a count: `{s}`")))?,
        ),
    };

    let opt_real = |i: usize, name: &str| -> std::result::Result<Option<f64>, (RejectReason, String)> {
        match field(i) {
            "" => Ok(None),
            s => s
                .parse::<f64>()
                .map(Some)
                .map_err(|_| (MalformedField, format!("{name} is not a number: `{s}`"))),
        }
    };

    let scale = match field(8) {
        "unit" => 1.0,
        "percent" => 100.0,
        other => return Err((MalformedField, format!("unknown metric_scale `{other}`"))),
    };

    let normalize = |v: Option<f64>, name: &str| -> std::result::Result<Option<f64>, (RejectReason, String)> {
        match v {
            None => Ok(None),
            Some(raw) => {
                let unit = raw / scale;
                if !(0.0..=1.0).contains(&unit) || !unit.is_finite() {
                    Err((
                        OutOfRange,
                        format!("{name} = {raw} is outside the {} range", if scale == 1.0 { "[0,1]" } else { "[0,100]" }),
                    ))
                } else {
                    Ok(Some(unit))
                }
            }
        }
    };

    let metric_a = normalize(opt_real(4, "metric_a")?, "metric_a")?;
    let metric_b = normalize(opt_real(5, "metric_b")?, "metric_b")?;
    let sd_a = normalize(opt_real(6, "sd_a")?, "sd_a")?;
    let sd_b = normalize(opt_real(7, "sd_b")?, "sd_b")?;

    if let (Some(a), Some(b)) = (metric_a, metric_b) {
        if b > a {
            return Err((
                RankOrderViolation,
                format!("metric_b = {b} exceeds metric_a = {a}; method A must be the reported winner"),
            ));
        }
    }

    Ok(CorpusRecord {
        paper_id,
        task,
        split,
        n_test,
        metric_a,
        metric_b,
        sd_a,
        sd_b,
    })
}

/// Partitions records into those eligible for estimation and those excluded,
/// with reason codes. The two sides together contain every input record
/// exactly once, in order.
pub fn filter_eligible(records: Vec<CorpusRecord>) -> (Vec<CorpusRecord>, Vec<Excluded>) {
    let mut eligible = Vec::new();
    let mut excluded = Vec::new();
    for record in records {
        match exclusion_reason(&record) {
            None => eligible.push(record),
            Some(reason) => excluded.push(Excluded { record, reason }),
        }
    }
    (eligible, excluded)
}

fn exclusion_reason(record: &CorpusRecord) -> Option<ExclusionReason> {
    if !record.split.has_independent_test() {
        return Some(ExclusionReason::NoIndependentTest);
    }
    if record.metric_a.is_none() || record.metric_b.is_none() {
        return Some(ExclusionReason::MissingMetricValues);
    }
    if record.n_test.is_none() {
        return Some(ExclusionReason::MissingTestSize);
    }
    None
}

/// How the congruence assumption for a corpus run is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CongruenceChoice {
    /// Use the task-appropriate published preset quantile per record.
    Preset(PresetQuantile),
    /// Use one explicit value for every record.
    Value(f64),
}

impl CongruenceChoice {
    fn resolve(&self, task: Task) -> CongruenceAssumption {
        match self {
            CongruenceChoice::Preset(q) => task.presets().get(*q),
            CongruenceChoice::Value(v) => CongruenceAssumption::user_supplied(*v),
        }
    }
}

/// Per-record estimation outcome, flat for CSV/JSON emission.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusPfcRow {
    pub index: usize,
    pub paper_id: String,
    pub task: Task,
    pub n_test: Option<u64>,
    pub delta: Option<f64>,
    pub probability: Option<f64>,
    pub std_err: Option<f64>,
    pub method: Option<EstimateMethod>,
    pub congruence: Option<f64>,
    pub clamped: bool,
    pub degenerate: bool,
    /// Populated when the record could not be estimated; the run continues.
    pub error: Option<String>,
}

/// Stable stream id from the fields that enter the posterior, so identical
/// comparisons receive identical draws (and therefore identical estimates)
/// wherever they appear in the corpus.
fn record_stream(record: &CorpusRecord) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(PRIME);
        }
    };
    eat(&[match record.task {
        Task::Classification => 1,
        Task::Segmentation => 2,
    }]);
    eat(&record.n_test.unwrap_or(0).to_le_bytes());
    let bits = |v: Option<f64>| v.unwrap_or(-1.0).to_bits().to_le_bytes();
    eat(&bits(record.metric_a));
    eat(&bits(record.metric_b));
    eat(&bits(record.sd_a));
    eat(&bits(record.sd_b));
    h
}

/// Computes one estimate per eligible record. Records are processed in
/// parallel; each takes its own stream derived from (seed, record content),
/// so the output is identical for any worker count and any record order.
pub fn corpus_pfc(
    eligible: &[CorpusRecord],
    congruence: CongruenceChoice,
    sd_source: SdSource,
    model: &SdImputationModel,
    k: u64,
    seed: u64,
) -> Vec<CorpusPfcRow> {
    eligible
        .par_iter()
        .enumerate()
        .map(|(index, record)| estimate_record(index, record, congruence, sd_source, model, k, seed))
        .collect()
}

fn estimate_record(
    index: usize,
    record: &CorpusRecord,
    congruence: CongruenceChoice,
    sd_source: SdSource,
    model: &SdImputationModel,
    k: u64,
    seed: u64,
) -> CorpusPfcRow {
    let assumed = congruence.resolve(record.task);
    let mut row = CorpusPfcRow {
        index,
        paper_id: record.paper_id.clone(),
        task: record.task,
        n_test: record.n_test,
        delta: match (record.metric_a, record.metric_b) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        },
        probability: None,
        std_err: None,
        method: None,
        congruence: None,
        clamped: false,
        degenerate: false,
        error: None,
    };

    let outcome = (|| -> Result<(CongruenceAssumption, crate::estimate::PfcEstimate)> {
        let n = record
            .n_test
            .ok_or_else(|| Error::invalid("record lacks n_test"))?;
        let a = record
            .metric_a
            .ok_or_else(|| Error::invalid("record lacks metric_a"))?;
        let b = record
            .metric_b
            .ok_or_else(|| Error::invalid("record lacks metric_b"))?;
        match record.task {
            Task::Classification => {
                let cmp = ClassificationComparison::new(n, a, b)?;
                let clamped = cmp.clamp_congruence(assumed);
                let stream = RngStream::new(seed, record_stream(record));
                let est = pfc_classification(&cmp, clamped, k, stream)?;
                Ok((clamped, est))
            }
            Task::Segmentation => {
                let cmp = SegmentationComparison::new(n, a, b, record.sd_a, record.sd_b)?;
                let est = pfc_segmentation(&cmp, assumed, sd_source, model)?;
                Ok((assumed, est))
            }
        }
    })();

    match outcome {
        Ok((used, est)) => {
            row.probability = Some(est.probability);
            row.std_err = est.std_err;
            row.method = Some(est.method);
            row.congruence = Some(used.value);
            row.clamped = used.clamped;
            row.degenerate = est.degenerate;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// One probability per paper: papers may contribute several comparison rows,
/// and a paper carries a likely-false claim as soon as any of its rows does,
/// so each paper reports its maximum estimated probability. Rows without an
/// estimate are skipped. Papers appear in first-occurrence order.
pub fn paper_level_probabilities(rows: &[CorpusPfcRow]) -> Vec<f64> {
    let mut papers: Vec<(&str, f64)> = Vec::new();
    for row in rows {
        let Some(p) = row.probability else { continue };
        match papers.iter_mut().find(|(id, _)| *id == row.paper_id) {
            Some((_, best)) => *best = best.max(p),
            None => papers.push((&row.paper_id, p)),
        }
    }
    papers.into_iter().map(|(_, p)| p).collect()
}

/// Cumulative exceedance curve: for each threshold, the percentage of
/// estimates strictly above it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCurve {
    pub thresholds: Vec<f64>,
    pub cumulative_pct: Vec<f64>,
}

pub fn threshold_curve(estimates: &[f64], thresholds: &[f64]) -> Result<ThresholdCurve> {
    if estimates.is_empty() {
        return Err(Error::invalid("threshold curve of zero estimates"));
    }
    if thresholds.is_empty() {
        return Err(Error::invalid("threshold curve needs at least one threshold"));
    }
    let mut prev = 0.0;
    for &t in thresholds {
        if !(t > 0.0 && t <= 0.5) {
            return Err(Error::invalid(format!(
                "thresholds must lie in (0, 0.5], got {t}"
            )));
        }
        if t <= prev {
            return Err(Error::invalid("thresholds must be strictly ascending"));
        }
        prev = t;
    }
    let n = estimates.len() as f64;
    let cumulative_pct = thresholds
        .iter()
        .map(|&t| 100.0 * estimates.iter().filter(|&&p| p > t).count() as f64 / n)
        .collect();
    Ok(ThresholdCurve {
        thresholds: thresholds.to_vec(),
        cumulative_pct,
    })
}

/// Corpus descriptive statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub n_total: usize,
    pub n_eligible: usize,
    pub median_delta: Option<f64>,
    pub mean_delta: Option<f64>,
    pub test_size_q1: Option<f64>,
    pub test_size_median: Option<f64>,
    pub test_size_q3: Option<f64>,
}

/// Deltas are taken over records with both metric values; test-size
/// quartiles over records with a known test size. Quartiles follow the
/// linear-interpolation convention used for congruence quantiles.
pub fn summarize(records: &[CorpusRecord]) -> Result<CorpusSummary> {
    if records.is_empty() {
        return Err(Error::invalid("summary of an empty corpus"));
    }
    let n_eligible = records
        .iter()
        .filter(|r| exclusion_reason(r).is_none())
        .count();

    let deltas: Vec<f64> = records
        .iter()
        .filter_map(|r| match (r.metric_a, r.metric_b) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        })
        .collect();
    let (median_delta, mean_delta) = if deltas.is_empty() {
        (None, None)
    } else {
        let (_, median, _) = crate::congruence::quartiles(&deltas)?;
        (Some(median), Some(deltas.iter().sum::<f64>() / deltas.len() as f64))
    };

    let sizes: Vec<f64> = records
        .iter()
        .filter_map(|r| r.n_test.map(|n| n as f64))
        .collect();
    let (test_size_q1, test_size_median, test_size_q3) = if sizes.is_empty() {
        (None, None, None)
    } else {
        let (q1, med, q3) = crate::congruence::quartiles(&sizes)?;
        (Some(q1), Some(med), Some(q3))
    };

    Ok(CorpusSummary {
        n_total: records.len(),
        n_eligible,
        median_delta,
        mean_delta,
        test_size_q1,
        test_size_median,
        test_size_q3,
    })
}
