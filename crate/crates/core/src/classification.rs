//! Probability of false claims for accuracy comparisons.
//!
//! Given the two reported accuracies and the test-set size, the joint
//! posterior of the disagreement proportions (p1 = A right, B wrong;
//! p2 = B right, A wrong) is a three-component Dirichlet once a congruence
//! value fixes the joint-correct proportion. The probability that the
//! runner-up is actually at least as good is the posterior mass of
//! {p1 <= p2}, estimated by Monte Carlo. A deterministic two-dimensional
//! grid integration of the same posterior serves as an independent oracle
//! for test-sized instances.

use crate::congruence::CongruenceAssumption;
use crate::error::{Error, Result};
use crate::estimate::{EstimateMethod, PfcEstimate};
use crate::kernels::{DirichletParams, DirichletSampler, RngStream};

/// Reported accuracies of the two top-ranked methods plus the test-set size.
/// Method A is the reported winner; `acc_a >= acc_b` is enforced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassificationComparison {
    n: u64,
    acc_a: f64,
    acc_b: f64,
}

impl ClassificationComparison {
    pub fn new(n: u64, acc_a: f64, acc_b: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid("test-set size must be >= 1"));
        }
        if !acc_a.is_finite() || !acc_b.is_finite() {
            return Err(Error::invalid("accuracies must be finite"));
        }
        if !(0.0..=1.0).contains(&acc_a) || !(0.0..=1.0).contains(&acc_b) {
            return Err(Error::invalid(format!(
                "accuracies must lie in [0, 1], got acc_a={acc_a}, acc_b={acc_b}"
            )));
        }
        if acc_b > acc_a {
            return Err(Error::invalid(format!(
                "acc_a is the reported winner and must satisfy acc_a >= acc_b, \
                 got acc_a={acc_a} < acc_b={acc_b} (inputs are not swapped silently)"
            )));
        }
        Ok(ClassificationComparison { n, acc_a, acc_b })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn acc_a(&self) -> f64 {
        self.acc_a
    }

    pub fn acc_b(&self) -> f64 {
        self.acc_b
    }

    /// Feasible range of the joint-correct proportion, forced by the 2x2
    /// agreement table: max(0, acc_a + acc_b - 1) <= p11 <= min(acc_a, acc_b).
    pub fn congruence_bounds(&self) -> (f64, f64) {
        let lower = (self.acc_a + self.acc_b - 1.0).max(0.0);
        let upper = self.acc_a.min(self.acc_b);
        (lower, upper)
    }

    /// Projects an assumed congruence onto the feasible bounds. Values inside
    /// the bounds pass through untouched; values outside move to the nearer
    /// bound (ties to the lower bound) and are flagged.
    pub fn clamp_congruence(&self, assumed: CongruenceAssumption) -> CongruenceAssumption {
        let (lower, upper) = self.congruence_bounds();
        let v = assumed.value;
        if v >= lower && v <= upper {
            return assumed;
        }
        let value = if (v - lower).abs() <= (v - upper).abs() {
            lower
        } else {
            upper
        };
        CongruenceAssumption {
            value,
            provenance: assumed.provenance,
            clamped: true,
        }
    }
}

/// Dirichlet posterior concentrations for a comparison at a fixed congruence.
///
/// The implied disagreement counts n(acc - congruence) are generally
/// non-integer; they are used as-is by default, and `round_counts` snaps
/// them to the nearest integers for sensitivity checks against the
/// integer-count reading. Fails with an internal-invariant error if the
/// congruence was not clamped into the feasible bounds first.
fn posterior_params(
    cmp: &ClassificationComparison,
    congruence: f64,
    round_counts: bool,
) -> Result<DirichletParams> {
    if !(0.0..=1.0).contains(&congruence) {
        return Err(Error::invalid(format!(
            "classification congruence must lie in [0, 1], got {congruence}"
        )));
    }
    let n = cmp.n as f64;
    let snap = |x: f64| if x < 0.0 && x > -1e-9 * n.max(1.0) { 0.0 } else { x };
    let mut x1 = snap(n * (cmp.acc_a - congruence));
    let mut x2 = snap(n * (cmp.acc_b - congruence));
    if x1 < 0.0 || x2 < 0.0 {
        return Err(Error::internal(format!(
            "congruence {congruence} exceeds an accuracy ({}, {}); clamp before estimating",
            cmp.acc_a, cmp.acc_b
        )));
    }
    if round_counts {
        x1 = x1.round();
        x2 = x2.round();
    }
    let x3 = snap(n - x1 - x2);
    if x3 < 0.0 {
        return Err(Error::internal(format!(
            "congruence {congruence} below the feasible lower bound; clamp before estimating"
        )));
    }
    DirichletParams::new(vec![x1 + 1.0, x2 + 1.0, x3 + 2.0])
}

/// Monte Carlo estimate of the probability of false claims.
///
/// Draws `k` samples from the posterior Dirichlet and counts how often the
/// runner-up's exclusive-success proportion is at least the winner's.
pub fn pfc_classification(
    cmp: &ClassificationComparison,
    assumed: CongruenceAssumption,
    k: u64,
    stream: RngStream,
) -> Result<PfcEstimate> {
    pfc_with_counts(cmp, assumed, k, stream, false)
}

/// Variant of [`pfc_classification`] that rounds the implied disagreement
/// counts to integers before forming the posterior.
pub fn pfc_classification_rounded(
    cmp: &ClassificationComparison,
    assumed: CongruenceAssumption,
    k: u64,
    stream: RngStream,
) -> Result<PfcEstimate> {
    pfc_with_counts(cmp, assumed, k, stream, true)
}

fn pfc_with_counts(
    cmp: &ClassificationComparison,
    assumed: CongruenceAssumption,
    k: u64,
    stream: RngStream,
    round_counts: bool,
) -> Result<PfcEstimate> {
    if k < 1 {
        return Err(Error::invalid("draw count k must be >= 1"));
    }
    let params = posterior_params(cmp, assumed.value, round_counts)?;
    let sampler = DirichletSampler::new(&params);
    let mut rng = stream.rng();
    let mut buf = [0.0; 3];
    let mut hits = 0u64;
    for _ in 0..k {
        sampler.sample_into(&mut rng, &mut buf);
        if buf[0] <= buf[1] {
            hits += 1;
        }
    }
    Ok(PfcEstimate::monte_carlo(hits, k, assumed))
}

/// Largest test-set size the grid oracle accepts; the cost grows with the
/// square of the grid resolution and the oracle exists for verification, not
/// production use.
pub const ORACLE_MAX_N: u64 = 2000;

const ORACLE_GRID_STEP: f64 = 1e-3;

/// Deterministic grid integration of the posterior over {p1 <= p2}.
///
/// Integrates the marginal density on a uniform lattice over the triangle
/// p1, p2 >= 0, p1 + p2 <= 1 and returns the mass ratio of the half where
/// p1 <= p2. Normalization cancels in the ratio, so this path shares no
/// special-function code with the Monte Carlo estimator it checks.
/// Absolute error is below 1e-4 for n <= ORACLE_MAX_N.
pub fn pfc_classification_oracle(
    cmp: &ClassificationComparison,
    assumed: CongruenceAssumption,
) -> Result<PfcEstimate> {
    if cmp.n > ORACLE_MAX_N {
        return Err(Error::invalid(format!(
            "grid oracle refuses n = {} (> {ORACLE_MAX_N}); it is reserved for verification",
            cmp.n
        )));
    }
    let params = posterior_params(cmp, assumed.value, false)?;
    let alphas = params.alphas();
    let (e1, e2, e3) = (alphas[0] - 1.0, alphas[1] - 1.0, alphas[2] - 1.0);

    let m = (1.0 / ORACLE_GRID_STEP).round() as usize;
    let h = 1.0 / m as f64;
    let ln_density = |p1: f64, p2: f64| -> f64 {
        let rest = 1.0 - p1 - p2;
        let term = |e: f64, p: f64| if e == 0.0 { 0.0 } else { e * p.ln() };
        term(e1, p1) + term(e2, p2) + term(e3, rest.max(0.0))
    };

    // Pass 1: locate the log-density maximum for stable exponentiation.
    let mut max_ln = f64::NEG_INFINITY;
    for j in 0..=m {
        let p2 = j as f64 * h;
        for i in 0..=(m - j) {
            let p1 = i as f64 * h;
            let v = ln_density(p1, p2);
            if v > max_ln {
                max_ln = v;
            }
        }
    }
    if !max_ln.is_finite() {
        return Err(Error::internal("grid oracle found no finite density"));
    }

    // Pass 2: trapezoid accumulation. Boundary nodes of the triangle carry
    // half weight per incident edge; nodes on the p1 = p2 cut contribute
    // half their mass to the {p1 <= p2} side.
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..=m {
        let p2 = j as f64 * h;
        for i in 0..=(m - j) {
            let p1 = i as f64 * h;
            let mut w = (ln_density(p1, p2) - max_ln).exp();
            if i == 0 {
                w *= 0.5;
            }
            if j == 0 {
                w *= 0.5;
            }
            if i + j == m {
                w *= 0.5;
            }
            den += w;
            if i < j {
                num += w;
            } else if i == j {
                num += 0.5 * w;
            }
        }
    }
    if den == 0.0 {
        return Err(Error::internal("grid oracle mass underflowed"));
    }

    Ok(PfcEstimate {
        probability: num / den,
        method: EstimateMethod::GridOracle,
        k: None,
        std_err: None,
        congruence: assumed,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congruence::{CLASSIFICATION_PRESETS, PresetQuantile};
    use crate::kernels::reg_inc_beta;

    fn cmp(n: u64, a: f64, b: f64) -> ClassificationComparison {
        ClassificationComparison::new(n, a, b).unwrap()
    }

    #[test]
    fn rejects_swapped_ranks_and_bad_ranges() {
        assert!(ClassificationComparison::new(100, 0.7, 0.8).is_err());
        assert!(ClassificationComparison::new(0, 0.8, 0.7).is_err());
        assert!(ClassificationComparison::new(100, 1.2, 0.7).is_err());
        assert!(ClassificationComparison::new(100, 0.8, -0.1).is_err());
    }

    #[test]
    fn bounds_direct_formula() {
        let (lower, upper) = cmp(100, 0.9, 0.8).congruence_bounds();
        assert!((lower - 0.7).abs() < 1e-12);
        assert_eq!(upper, 0.8);
    }

    #[test]
    fn bounds_lower_clips_at_zero() {
        assert_eq!(cmp(100, 0.5, 0.4).congruence_bounds(), (0.0, 0.4));
    }

    #[test]
    fn bounds_degenerate_perfect_scores() {
        assert_eq!(cmp(100, 1.0, 1.0).congruence_bounds(), (1.0, 1.0));
    }

    #[test]
    fn clamp_keeps_in_range_values() {
        let c = cmp(500, 0.81, 0.80);
        let out = c.clamp_congruence(CongruenceAssumption::user_supplied(0.67));
        assert_eq!(out.value, 0.67);
        assert!(!out.clamped);
    }

    #[test]
    fn clamp_moves_to_nearer_lower_bound() {
        let c = cmp(100, 0.95, 0.90);
        let out = c.clamp_congruence(CongruenceAssumption::user_supplied(0.67));
        assert!((out.value - 0.85).abs() < 1e-12);
        assert!(out.clamped);
    }

    #[test]
    fn clamp_moves_to_upper_bound() {
        let c = cmp(100, 0.40, 0.30);
        let out = c.clamp_congruence(CongruenceAssumption::user_supplied(0.83));
        assert_eq!(out.value, 0.30);
        assert!(out.clamped);
    }

    #[test]
    fn clamp_is_idempotent() {
        let c = cmp(100, 0.95, 0.90);
        let once = c.clamp_congruence(CLASSIFICATION_PRESETS.get(PresetQuantile::Median));
        let twice = c.clamp_congruence(once);
        assert_eq!(once, twice);
    }

    #[test]
    fn symmetric_accuracies_give_half() {
        let c = cmp(100, 0.8, 0.8);
        let assumed = c.clamp_congruence(CongruenceAssumption::user_supplied(0.7));
        let est = pfc_classification(&c, assumed, 200_000, RngStream::new(42, 0)).unwrap();
        assert!((est.probability - 0.5).abs() < 0.005, "got {}", est.probability);
    }

    #[test]
    fn estimate_matches_oracle_on_small_instance() {
        let c = cmp(10, 0.9, 0.7);
        let assumed = CongruenceAssumption::user_supplied(0.6);
        let oracle = pfc_classification_oracle(&c, assumed).unwrap();
        // Frozen from the grid oracle; the posterior here is Dirichlet(4,2,8)
        // and the exact mass of {p1 <= p2} is 3/16.
        assert!((oracle.probability - 0.1875).abs() < 1e-4, "oracle {}", oracle.probability);
        let mc = pfc_classification(&c, assumed, 200_000, RngStream::new(1, 0)).unwrap();
        let tol = 3.0 * mc.std_err.unwrap();
        assert!((mc.probability - oracle.probability).abs() < tol.max(2e-3));
    }

    #[test]
    fn oracle_frozen_small_delta_small_n() {
        let c = cmp(50, 0.9, 0.88);
        let assumed = CongruenceAssumption::user_supplied(0.83);
        let est = pfc_classification_oracle(&c, assumed).unwrap();
        assert!((est.probability - 0.354_487).abs() < 1e-4, "got {}", est.probability);
        assert!(est.probability > 0.3 && est.probability < 0.5);
    }

    #[test]
    fn oracle_frozen_typical_reported_values() {
        // The cell the headline threshold checks hang off: n = 500,
        // accuracies 0.81 / 0.80, congruence 0.67.
        let c = cmp(500, 0.81, 0.80);
        let assumed = CongruenceAssumption::user_supplied(0.67);
        let est = pfc_classification_oracle(&c, assumed).unwrap();
        assert!((est.probability - 0.334_133).abs() < 1e-4, "got {}", est.probability);
    }

    #[test]
    fn oracle_symmetric_case_is_half() {
        let c = cmp(100, 0.8, 0.8);
        let est = pfc_classification_oracle(&c, CongruenceAssumption::user_supplied(0.7)).unwrap();
        assert!((est.probability - 0.5).abs() < 1e-4);
    }

    #[test]
    fn oracle_agrees_with_beta_aggregation_identity() {
        // Aggregation property of the Dirichlet: p1/(p1+p2) ~ Beta(a1, a2),
        // so the {p1 <= p2} mass equals the Beta CDF at 1/2. This is an
        // algebraic route entirely separate from the lattice sum.
        for (n, a, b, c) in [
            (10u64, 0.9, 0.7, 0.6),
            (50, 0.9, 0.88, 0.83),
            (500, 0.81, 0.80, 0.67),
        ] {
            let cmpv = cmp(n, a, b);
            let assumed = CongruenceAssumption::user_supplied(c);
            let est = pfc_classification_oracle(&cmpv, assumed).unwrap();
            let nf = n as f64;
            let (a1, a2) = (nf * (a - c) + 1.0, nf * (b - c) + 1.0);
            let exact = reg_inc_beta(0.5, a1, a2).unwrap();
            assert!(
                (est.probability - exact).abs() < 1e-4,
                "n={n}: grid {} vs beta {exact}",
                est.probability
            );
        }
    }

    #[test]
    fn oracle_refuses_large_n() {
        let c = cmp(5000, 0.8, 0.79);
        let assumed = CongruenceAssumption::user_supplied(0.67);
        assert!(pfc_classification_oracle(&c, assumed).is_err());
    }

    #[test]
    fn unclamped_congruence_is_an_internal_invariant_violation() {
        let c = cmp(100, 0.6, 0.5);
        let too_high = CongruenceAssumption::user_supplied(0.83);
        let err = pfc_classification(&c, too_high, 100, RngStream::new(0, 0)).unwrap_err();
        assert!(matches!(err, Error::InternalInvariant(_)));
    }

    #[test]
    fn zero_draws_rejected() {
        let c = cmp(100, 0.8, 0.7);
        let assumed = c.clamp_congruence(CongruenceAssumption::user_supplied(0.67));
        assert!(pfc_classification(&c, assumed, 0, RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn congruence_at_upper_bound_is_accepted() {
        // p11 = acc_b makes x2 exactly zero; the posterior is still proper.
        let c = cmp(200, 0.9, 0.8);
        let assumed = CongruenceAssumption::user_supplied(0.8);
        let est = pfc_classification(&c, assumed, 50_000, RngStream::new(3, 1)).unwrap();
        assert!(est.probability < 0.05);
    }

    #[test]
    fn rounding_toggle_snaps_fractional_counts() {
        // Fractional counts: n = 50, delta 0.013 -> x1 = 4.15, x2 = 3.5.
        // Rounding sends both to 4, erasing the sub-count delta; this is the
        // bias the real-valued default avoids.
        let c = cmp(50, 0.913, 0.9);
        let assumed = CongruenceAssumption::user_supplied(0.83);
        let plain = pfc_classification(&c, assumed, 200_000, RngStream::new(8, 0)).unwrap();
        let rounded =
            pfc_classification_rounded(&c, assumed, 200_000, RngStream::new(8, 0)).unwrap();
        let tol = 3.0 * rounded.std_err.unwrap();
        assert!((rounded.probability - 0.5).abs() < tol, "got {}", rounded.probability);
        assert!(plain.probability < rounded.probability - 0.05);
        // With exactly integer counts (dyadic inputs), the toggle changes
        // nothing: n = 64, accs 7/8 and 13/16, congruence 3/4.
        let c = cmp(64, 0.875, 0.8125);
        let assumed = CongruenceAssumption::user_supplied(0.75);
        let a = pfc_classification(&c, assumed, 50_000, RngStream::new(8, 1)).unwrap();
        let b = pfc_classification_rounded(&c, assumed, 50_000, RngStream::new(8, 1)).unwrap();
        assert_eq!(a.probability, b.probability);
    }

    #[test]
    fn same_stream_reproduces_bit_identical_estimate() {
        let c = cmp(500, 0.81, 0.80);
        let assumed = c.clamp_congruence(CongruenceAssumption::user_supplied(0.67));
        let a = pfc_classification(&c, assumed, 10_000, RngStream::new(42, 5)).unwrap();
        let b = pfc_classification(&c, assumed, 10_000, RngStream::new(42, 5)).unwrap();
        assert_eq!(a.probability, b.probability);
    }
}
