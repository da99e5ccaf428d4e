//! How likely is a published claim of model outperformance to be false?
//!
//! Papers typically report two metric values and a test-set size. Given
//! those numbers plus an assumption about model congruence (how aligned the
//! two models' outputs are), this crate computes the posterior probability
//! that the second-ranked method is actually at least as good as the
//! reported winner:
//!
//! * accuracy comparisons go through a Dirichlet posterior over the
//!   disagreement proportions, estimated by seeded Monte Carlo
//!   ([`classification`]);
//! * mean-DSC comparisons have a closed-form Student-t posterior, with SD
//!   imputation when papers omit variability ([`segmentation`]);
//! * whole corpora of extracted comparisons run through eligibility
//!   filtering, batch estimation, and cumulative threshold curves
//!   ([`corpus`]);
//! * planning grids and minimum test-set-size searches answer "how many
//!   test images would substantiate this delta?" ([`planner`]).
//!
//! Everything downstream of a seed is bit-reproducible, including under
//! parallel execution.

pub mod classification;
pub mod congruence;
pub mod corpus;
pub mod error;
pub mod estimate;
pub mod kernels;
pub mod planner;
pub mod segmentation;

pub use classification::{
    pfc_classification, pfc_classification_oracle, pfc_classification_rounded,
    ClassificationComparison,
};
pub use congruence::{
    congruence_classification, congruence_quantiles, congruence_segmentation, quartiles,
    CongruenceAssumption, CongruencePresets, PairedClassificationOutcomes, PairedDscVectors,
    PresetQuantile, Provenance, CLASSIFICATION_PRESETS, SEGMENTATION_PRESETS,
};
pub use corpus::{
    corpus_pfc, filter_eligible, ingest_corpus, paper_level_probabilities, summarize,
    threshold_curve, CongruenceChoice, CorpusPfcRow, CorpusRecord, CorpusSummary, Excluded,
    ExclusionReason, RejectReason, Rejection, SchemaVersion, Split, Task, ThresholdCurve,
};
pub use error::{Error, Result};
pub use estimate::{EstimateMethod, PfcEstimate};
pub use kernels::{
    ln_beta, ln_gamma, reg_inc_beta, sample_dirichlet, student_t_cdf, DirichletParams,
    DirichletSampler, RngStream,
};
pub use planner::{
    build_grid, grid_to_csv, grid_to_svg, required_n, Band, GridCell, PlanningGrid, RequiredN,
    DEFAULT_N_CAP,
};
pub use segmentation::{
    impute_sd, pfc_segmentation, pfc_segmentation_mc_check, pfc_segmentation_with_sds, resolve_sds,
    SdImputationModel, SdModelKind, SdSource, SdVariant, SegmentationComparison,
};
