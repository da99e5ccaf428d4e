//! Result type shared by the classification and segmentation estimators.

use serde::{Deserialize, Serialize};

use crate::congruence::CongruenceAssumption;

/// How a probability-of-false-claims value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    MonteCarlo,
    ClosedForm,
    GridOracle,
}

/// Probability that the second-ranked method is actually at least as good as
/// the reported winner, plus estimator metadata.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PfcEstimate {
    pub probability: f64,
    pub method: EstimateMethod,
    /// Monte Carlo draw count; absent for closed-form and oracle results.
    pub k: Option<u64>,
    /// Monte Carlo standard error, sqrt(p(1-p)/k); absent when exact.
    pub std_err: Option<f64>,
    /// Congruence value the estimate was computed at (after any clamping).
    pub congruence: CongruenceAssumption,
    /// Set when the inputs hit a degenerate limit (zero denominator) and the
    /// returned probability is the limiting value.
    pub degenerate: bool,
}

impl PfcEstimate {
    pub fn exact(probability: f64, congruence: CongruenceAssumption) -> Self {
        PfcEstimate {
            probability,
            method: EstimateMethod::ClosedForm,
            k: None,
            std_err: None,
            congruence,
            degenerate: false,
        }
    }

    pub fn monte_carlo(successes: u64, k: u64, congruence: CongruenceAssumption) -> Self {
        let p = successes as f64 / k as f64;
        PfcEstimate {
            probability: p,
            method: EstimateMethod::MonteCarlo,
            k: Some(k),
            std_err: Some((p * (1.0 - p) / k as f64).sqrt()),
            congruence,
            degenerate: false,
        }
    }
}
