//! Closed-form probability of false claims for mean-DSC comparisons.
//!
//! Under a joint-normal model of the two methods' per-image DSC values, the
//! posterior of the true mean difference is a scaled Student-t, so the
//! probability that the runner-up is at least as good has the closed form
//! t_{n-1}( sqrt(n) (dsc_b - dsc_a) / sqrt(s_a^2 + s_b^2 - 2 s_a s_b r) ).
//! Missing standard deviations are imputed from the reported means, with
//! prediction-interval quartile variants for sensitivity analysis.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::congruence::CongruenceAssumption;
use crate::error::{Error, Result};
use crate::estimate::{EstimateMethod, PfcEstimate};
use crate::kernels::{student_t_cdf, RngStream};

/// Reported mean DSCs of the two top-ranked methods, optional reported SDs,
/// and the test-set size. Method A is the reported winner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentationComparison {
    n: u64,
    dsc_a: f64,
    dsc_b: f64,
    sd_a: Option<f64>,
    sd_b: Option<f64>,
}

impl SegmentationComparison {
    pub fn new(
        n: u64,
        dsc_a: f64,
        dsc_b: f64,
        sd_a: Option<f64>,
        sd_b: Option<f64>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(
                "segmentation needs n >= 2 (the posterior has n - 1 degrees of freedom)",
            ));
        }
        if !dsc_a.is_finite() || !dsc_b.is_finite() {
            return Err(Error::invalid("DSC values must be finite"));
        }
        if !(0.0..=1.0).contains(&dsc_a) || !(0.0..=1.0).contains(&dsc_b) {
            return Err(Error::invalid(format!(
                "DSC values must lie in [0, 1], got dsc_a={dsc_a}, dsc_b={dsc_b}"
            )));
        }
        if dsc_b > dsc_a {
            return Err(Error::invalid(format!(
                "dsc_a is the reported winner and must satisfy dsc_a >= dsc_b, \
                 got dsc_a={dsc_a} < dsc_b={dsc_b}"
            )));
        }
        for (name, sd) in [("sd_a", sd_a), ("sd_b", sd_b)] {
            if let Some(s) = sd {
                if s.is_nan() || s < 0.0 || !s.is_finite() {
                    return Err(Error::invalid(format!("{name} must be >= 0, got {s}")));
                }
            }
        }
        Ok(SegmentationComparison { n, dsc_a, dsc_b, sd_a, sd_b })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn dsc_a(&self) -> f64 {
        self.dsc_a
    }

    pub fn dsc_b(&self) -> f64 {
        self.dsc_b
    }

    pub fn sd_a(&self) -> Option<f64> {
        self.sd_a
    }

    pub fn sd_b(&self) -> Option<f64> {
        self.sd_b
    }
}

/// Which prediction-interval variant of the imputation to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdVariant {
    Point,
    Q1,
    Q3,
}

/// Where the per-method SDs for the closed form come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdSource {
    Reported,
    ImputedPoint,
    ImputedQ1,
    ImputedQ3,
}

impl SdSource {
    pub fn label(&self) -> &'static str {
        match self {
            SdSource::Reported => "reported",
            SdSource::ImputedPoint => "imputed-point",
            SdSource::ImputedQ1 => "imputed-q1",
            SdSource::ImputedQ3 => "imputed-q3",
        }
    }
}

/// Functional form of the mean-to-SD imputation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SdModelKind {
    /// s = coefficient * sqrt(mean (1 - mean)). The SD shrinks toward zero
    /// at both ends of the DSC range.
    ParametricDefault { coefficient: f64 },
    /// Piecewise-linear interpolation of user-supplied (mean, sd) pairs,
    /// clamped at the table ends.
    UserTable { points: Vec<(f64, f64)> },
}

/// SD imputation model plus prediction-interval quartile multipliers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdImputationModel {
    pub kind: SdModelKind,
    /// Multiplier for the lower prediction-interval quartile (<= 1).
    pub pi_q1: f64,
    /// Multiplier for the upper prediction-interval quartile (>= 1).
    pub pi_q3: f64,
}

impl Default for SdImputationModel {
    fn default() -> Self {
        SdImputationModel {
            kind: SdModelKind::ParametricDefault { coefficient: 0.4 },
            pi_q1: 0.7,
            pi_q3: 1.3,
        }
    }
}

impl SdImputationModel {
    pub fn new(kind: SdModelKind, pi_q1: f64, pi_q3: f64) -> Result<Self> {
        if pi_q1.is_nan() || pi_q1 <= 0.0 || pi_q1 > 1.0 {
            return Err(Error::invalid(format!(
                "pi_q1 must lie in (0, 1], got {pi_q1}"
            )));
        }
        if pi_q3.is_nan() || pi_q3 < 1.0 || !pi_q3.is_finite() {
            return Err(Error::invalid(format!("pi_q3 must be >= 1, got {pi_q3}")));
        }
        match &kind {
            SdModelKind::ParametricDefault { coefficient } => {
                if coefficient.is_nan() || *coefficient <= 0.0 || !coefficient.is_finite() {
                    return Err(Error::invalid(format!(
                        "imputation coefficient must be > 0, got {coefficient}"
                    )));
                }
            }
            SdModelKind::UserTable { points } => {
                if points.is_empty() {
                    return Err(Error::invalid("user SD table must be non-empty"));
                }
                let mut prev = f64::NEG_INFINITY;
                for &(m, s) in points {
                    if m.is_nan() || m <= prev {
                        return Err(Error::invalid(
                            "user SD table means must be strictly increasing",
                        ));
                    }
                    if s.is_nan() || s <= 0.0 || !s.is_finite() {
                        return Err(Error::invalid(format!(
                            "user SD table entries must have sd > 0, got {s}"
                        )));
                    }
                    prev = m;
                }
            }
        }
        Ok(SdImputationModel { kind, pi_q1, pi_q3 })
    }

    pub fn parametric(coefficient: f64, pi_q1: f64, pi_q3: f64) -> Result<Self> {
        SdImputationModel::new(SdModelKind::ParametricDefault { coefficient }, pi_q1, pi_q3)
    }
}

/// Imputed per-image SD for a reported mean DSC.
///
/// The Q1/Q3 variants scale the point imputation by the prediction-interval
/// multipliers, so q1 <= point <= q3 always holds.
pub fn impute_sd(mean_dsc: f64, model: &SdImputationModel, variant: SdVariant) -> Result<f64> {
    if mean_dsc <= 0.0 || mean_dsc >= 1.0 {
        return Err(Error::degenerate(format!(
            "SD imputation is undefined at the zero-variance boundary, got mean {mean_dsc}"
        )));
    }
    let point = match &model.kind {
        SdModelKind::ParametricDefault { coefficient } => {
            coefficient * (mean_dsc * (1.0 - mean_dsc)).sqrt()
        }
        SdModelKind::UserTable { points } => interpolate(points, mean_dsc),
    };
    Ok(match variant {
        SdVariant::Point => point,
        SdVariant::Q1 => model.pi_q1 * point,
        SdVariant::Q3 => model.pi_q3 * point,
    })
}

fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    if x <= points[0].0 {
        return points[0].1;
    }
    if x >= points[points.len() - 1].0 {
        return points[points.len() - 1].1;
    }
    let idx = points.partition_point(|&(m, _)| m < x);
    let (x0, y0) = points[idx - 1];
    let (x1, y1) = points[idx];
    y0 + (x - x0) / (x1 - x0) * (y1 - y0)
}

/// Resolves the pair of SDs the closed form will use, either from the
/// reported values or from the imputation model.
pub fn resolve_sds(
    cmp: &SegmentationComparison,
    source: SdSource,
    model: &SdImputationModel,
) -> Result<(f64, f64)> {
    match source {
        SdSource::Reported => match (cmp.sd_a, cmp.sd_b) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::invalid(
                "sd source is `reported` but the comparison lacks reported SDs",
            )),
        },
        SdSource::ImputedPoint => imputed_pair(cmp, model, SdVariant::Point),
        SdSource::ImputedQ1 => imputed_pair(cmp, model, SdVariant::Q1),
        SdSource::ImputedQ3 => imputed_pair(cmp, model, SdVariant::Q3),
    }
}

fn imputed_pair(
    cmp: &SegmentationComparison,
    model: &SdImputationModel,
    variant: SdVariant,
) -> Result<(f64, f64)> {
    Ok((
        impute_sd(cmp.dsc_a, model, variant)?,
        impute_sd(cmp.dsc_b, model, variant)?,
    ))
}

fn validate_correlation(r: f64) -> Result<()> {
    if r.is_nan() || r <= -1.0 || r > 1.0 {
        return Err(Error::invalid(format!(
            "segmentation congruence must lie in (-1, 1], got {r}"
        )));
    }
    Ok(())
}

/// Closed-form probability of false claims for a mean-DSC comparison.
pub fn pfc_segmentation(
    cmp: &SegmentationComparison,
    r_ab: CongruenceAssumption,
    source: SdSource,
    model: &SdImputationModel,
) -> Result<PfcEstimate> {
    let (sd_a, sd_b) = resolve_sds(cmp, source, model)?;
    pfc_segmentation_with_sds(cmp, r_ab, sd_a, sd_b)
}

/// Closed form with explicitly supplied SDs.
pub fn pfc_segmentation_with_sds(
    cmp: &SegmentationComparison,
    r_ab: CongruenceAssumption,
    sd_a: f64,
    sd_b: f64,
) -> Result<PfcEstimate> {
    validate_correlation(r_ab.value)?;
    let var = combined_variance(sd_a, sd_b, r_ab.value)?;
    if var == 0.0 {
        let probability = if cmp.dsc_a > cmp.dsc_b { 0.0 } else { 0.5 };
        return Ok(PfcEstimate {
            probability,
            method: EstimateMethod::ClosedForm,
            k: None,
            std_err: None,
            congruence: r_ab,
            degenerate: true,
        });
    }
    let n = cmp.n as f64;
    let z = n.sqrt() * (cmp.dsc_b - cmp.dsc_a) / var.sqrt();
    let probability = student_t_cdf(z, n - 1.0)?;
    Ok(PfcEstimate::exact(probability, r_ab))
}

fn combined_variance(sd_a: f64, sd_b: f64, r: f64) -> Result<f64> {
    let var = sd_a * sd_a + sd_b * sd_b - 2.0 * sd_a * sd_b * r;
    if var < 0.0 {
        // Impossible for r <= 1; reaching this means the caller bypassed
        // validation.
        return Err(Error::internal(format!(
            "negative combined variance {var} from sd_a={sd_a}, sd_b={sd_b}, r={r}"
        )));
    }
    Ok(var)
}

/// Simulation cross-check of the closed form.
///
/// Draws `k` synthetic test sets of `n` per-image DSC pairs from the
/// joint-normal model, forms each set's t statistic for the mean difference
/// around the true delta, and uses those pivots as posterior draws of the
/// true difference. Agreement with [`pfc_segmentation`] within Monte Carlo
/// error validates both the variance combination and the t reduction.
pub fn pfc_segmentation_mc_check(
    cmp: &SegmentationComparison,
    r_ab: CongruenceAssumption,
    sd_a: f64,
    sd_b: f64,
    k: u64,
    stream: RngStream,
) -> Result<PfcEstimate> {
    validate_correlation(r_ab.value)?;
    if k < 1 {
        return Err(Error::invalid("draw count k must be >= 1"));
    }
    let var = combined_variance(sd_a, sd_b, r_ab.value)?;
    if var == 0.0 {
        let probability = if cmp.dsc_a > cmp.dsc_b { 0.0 } else { 0.5 };
        return Ok(PfcEstimate {
            probability,
            method: EstimateMethod::MonteCarlo,
            k: Some(k),
            std_err: Some(0.0),
            congruence: r_ab,
            degenerate: true,
        });
    }

    let n = cmp.n as f64;
    let delta = cmp.dsc_a - cmp.dsc_b;
    let threshold = n.sqrt() * delta / var.sqrt();
    let cross = (1.0 - r_ab.value * r_ab.value).sqrt();
    let mut rng = stream.rng();
    let mut hits = 0u64;
    for _ in 0..k {
        // One synthetic test set; Welford accumulation of the differences.
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for i in 0..cmp.n {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            let a = cmp.dsc_a + sd_a * z1;
            let b = cmp.dsc_b + sd_b * (r_ab.value * z1 + cross * z2);
            let d = a - b;
            let step = (i + 1) as f64;
            let diff = d - mean;
            mean += diff / step;
            m2 += diff * (d - mean);
        }
        let sample_sd = (m2 / (n - 1.0)).sqrt();
        if sample_sd == 0.0 {
            continue;
        }
        let pivot = (mean - delta) * n.sqrt() / sample_sd;
        // Posterior draw of the true difference: delta - (s_obs/sqrt(n)) * pivot
        // <= 0 exactly when pivot >= threshold.
        if pivot >= threshold {
            hits += 1;
        }
    }
    Ok(PfcEstimate {
        probability: hits as f64 / k as f64,
        method: EstimateMethod::MonteCarlo,
        k: Some(k),
        std_err: Some({
            let p = hits as f64 / k as f64;
            (p * (1.0 - p) / k as f64).sqrt()
        }),
        congruence: r_ab,
        degenerate: false,
    })
}
