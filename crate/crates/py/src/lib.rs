//! Python bindings: the single-comparison estimators, congruence helpers,
//! and the planner search, with dict-shaped results.
//!
//! Build with `cargo build --release -p claimgate-py`; the resulting
//! `libclaimgate_py.so` imports as the module `claimgate_py` once renamed
//! (see python/smoke_test.py).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use claimgate::{
    pfc_classification, pfc_classification_oracle, pfc_segmentation, required_n as plan_required_n,
    ClassificationComparison, CongruenceAssumption, Provenance, RequiredN, RngStream,
    SdImputationModel, SdSource, SdVariant, SegmentationComparison, Task,
    CLASSIFICATION_PRESETS, SEGMENTATION_PRESETS,
};

fn to_py_err(err: claimgate::Error) -> PyErr {
    match err {
        claimgate::Error::InternalInvariant(_) => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn provenance_label(p: Provenance) -> &'static str {
    match p {
        Provenance::PresetMedian => "preset-median",
        Provenance::PresetQ1 => "preset-q1",
        Provenance::PresetQ3 => "preset-q3",
        Provenance::UserSupplied => "user-supplied",
        Provenance::Empirical => "empirical",
    }
}

fn parse_task(task: &str) -> PyResult<Task> {
    match task {
        "classification" => Ok(Task::Classification),
        "segmentation" => Ok(Task::Segmentation),
        other => Err(PyValueError::new_err(format!(
            "task must be `classification` or `segmentation`, got `{other}`"
        ))),
    }
}

fn parse_variant(variant: &str) -> PyResult<SdVariant> {
    match variant {
        "point" => Ok(SdVariant::Point),
        "q1" => Ok(SdVariant::Q1),
        "q3" => Ok(SdVariant::Q3),
        other => Err(PyValueError::new_err(format!(
            "variant must be `point`, `q1`, or `q3`, got `{other}`"
        ))),
    }
}

fn model(sd_coef: f64, pi_q1: f64, pi_q3: f64) -> PyResult<SdImputationModel> {
    SdImputationModel::parametric(sd_coef, pi_q1, pi_q3).map_err(to_py_err)
}

/// Probability that the reported accuracy win is false, by Monte Carlo on
/// the posterior. The congruence value is clamped onto the feasible bounds
/// of the comparison first; the dict reports whether that happened.
#[pyfunction]
#[pyo3(signature = (n, acc_a, acc_b, congruence=0.67, k=200_000, seed=42, stream=0))]
#[allow(clippy::too_many_arguments)]
fn check_classification(
    py: Python<'_>,
    n: u64,
    acc_a: f64,
    acc_b: f64,
    congruence: f64,
    k: u64,
    seed: u64,
    stream: u64,
) -> PyResult<Py<PyDict>> {
    let cmp = ClassificationComparison::new(n, acc_a, acc_b).map_err(to_py_err)?;
    if !(0.0..=1.0).contains(&congruence) {
        return Err(PyValueError::new_err(format!(
            "classification congruence must lie in [0, 1], got {congruence}"
        )));
    }
    let used = cmp.clamp_congruence(CongruenceAssumption::user_supplied(congruence));
    let est = pfc_classification(&cmp, used, k, RngStream::new(seed, stream)).map_err(to_py_err)?;
    let (lower, upper) = cmp.congruence_bounds();

    let out = PyDict::new(py);
    out.set_item("probability", est.probability)?;
    out.set_item("std_err", est.std_err)?;
    out.set_item("k", k)?;
    out.set_item("method", "monte-carlo")?;
    out.set_item("congruence", used.value)?;
    out.set_item("clamped", used.clamped)?;
    out.set_item("provenance", provenance_label(used.provenance))?;
    out.set_item("lower_bound", lower)?;
    out.set_item("upper_bound", upper)?;
    Ok(out.into())
}

/// Deterministic grid-integration reference for small test sets (n <= 2000).
#[pyfunction]
fn check_classification_oracle(n: u64, acc_a: f64, acc_b: f64, congruence: f64) -> PyResult<f64> {
    let cmp = ClassificationComparison::new(n, acc_a, acc_b).map_err(to_py_err)?;
    let used = cmp.clamp_congruence(CongruenceAssumption::user_supplied(congruence));
    Ok(pfc_classification_oracle(&cmp, used)
        .map_err(to_py_err)?
        .probability)
}

/// Closed-form probability that the reported mean-DSC win is false. Supply
/// both reported SDs or let the model impute them from the means.
#[pyfunction]
#[pyo3(signature = (n, dsc_a, dsc_b, sd_a=None, sd_b=None, variant="point", congruence=0.67,
                    sd_coef=0.4, pi_q1=0.7, pi_q3=1.3))]
#[allow(clippy::too_many_arguments)]
fn check_segmentation(
    py: Python<'_>,
    n: u64,
    dsc_a: f64,
    dsc_b: f64,
    sd_a: Option<f64>,
    sd_b: Option<f64>,
    variant: &str,
    congruence: f64,
    sd_coef: f64,
    pi_q1: f64,
    pi_q3: f64,
) -> PyResult<Py<PyDict>> {
    if sd_a.is_some() != sd_b.is_some() {
        return Err(PyValueError::new_err("supply both sd_a and sd_b or neither"));
    }
    let cmp = SegmentationComparison::new(n, dsc_a, dsc_b, sd_a, sd_b).map_err(to_py_err)?;
    let source = if sd_a.is_some() {
        SdSource::Reported
    } else {
        match parse_variant(variant)? {
            SdVariant::Point => SdSource::ImputedPoint,
            SdVariant::Q1 => SdSource::ImputedQ1,
            SdVariant::Q3 => SdSource::ImputedQ3,
        }
    };
    let model = model(sd_coef, pi_q1, pi_q3)?;
    let assumed = CongruenceAssumption::user_supplied(congruence);
    let (sd_a_used, sd_b_used) = claimgate::resolve_sds(&cmp, source, &model).map_err(to_py_err)?;
    let est = pfc_segmentation(&cmp, assumed, source, &model).map_err(to_py_err)?;

    let out = PyDict::new(py);
    out.set_item("probability", est.probability)?;
    out.set_item("method", "closed-form")?;
    out.set_item("congruence", assumed.value)?;
    out.set_item("sd_a_used", sd_a_used)?;
    out.set_item("sd_b_used", sd_b_used)?;
    out.set_item("sd_source", source.label())?;
    out.set_item("degenerate", est.degenerate)?;
    Ok(out.into())
}

/// Imputed per-image SD for a reported mean metric value.
#[pyfunction]
#[pyo3(signature = (mean, variant="point", sd_coef=0.4, pi_q1=0.7, pi_q3=1.3))]
fn impute_sd(mean: f64, variant: &str, sd_coef: f64, pi_q1: f64, pi_q3: f64) -> PyResult<f64> {
    let model = model(sd_coef, pi_q1, pi_q3)?;
    claimgate::impute_sd(mean, &model, parse_variant(variant)?).map_err(to_py_err)
}

/// Proportion of images both classifiers got right.
#[pyfunction]
fn congruence_classification(correct_a: Vec<bool>, correct_b: Vec<bool>) -> PyResult<f64> {
    let outcomes = claimgate::PairedClassificationOutcomes::new(correct_a, correct_b)
        .map_err(to_py_err)?;
    Ok(claimgate::congruence_classification(&outcomes).value)
}

/// Pearson correlation of two per-image DSC vectors.
#[pyfunction]
fn congruence_segmentation(dsc_a: Vec<f64>, dsc_b: Vec<f64>) -> PyResult<f64> {
    let vectors = claimgate::PairedDscVectors::new(dsc_a, dsc_b).map_err(to_py_err)?;
    Ok(claimgate::congruence_segmentation(&vectors)
        .map_err(to_py_err)?
        .value)
}

/// (q1, median, q3) with linear interpolation.
#[pyfunction]
fn congruence_quantiles(values: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    claimgate::quartiles(&values).map_err(to_py_err)
}

/// Feasible congruence range of an accuracy comparison.
#[pyfunction]
fn classification_bounds(n: u64, acc_a: f64, acc_b: f64) -> PyResult<(f64, f64)> {
    Ok(ClassificationComparison::new(n, acc_a, acc_b)
        .map_err(to_py_err)?
        .congruence_bounds())
}

/// Smallest test-set size reaching the target probability, or None when the
/// cap is exceeded.
#[pyfunction]
#[pyo3(signature = (task, delta, base, congruence=0.67, target=0.05, k=200_000, seed=42,
                    cap=claimgate::DEFAULT_N_CAP, sd_coef=0.4, pi_q1=0.7, pi_q3=1.3))]
#[allow(clippy::too_many_arguments)]
fn required_n(
    task: &str,
    delta: f64,
    base: f64,
    congruence: f64,
    target: f64,
    k: u64,
    seed: u64,
    cap: u64,
    sd_coef: f64,
    pi_q1: f64,
    pi_q3: f64,
) -> PyResult<Option<u64>> {
    let model = model(sd_coef, pi_q1, pi_q3)?;
    let result = plan_required_n(
        parse_task(task)?,
        delta,
        base,
        CongruenceAssumption::user_supplied(congruence),
        target,
        k,
        seed,
        cap,
        &model,
    )
    .map_err(to_py_err)?;
    Ok(match result {
        RequiredN::Found { n } => Some(n),
        RequiredN::ExceedsCap { .. } => None,
    })
}

/// Published congruence preset quantiles per task.
#[pyfunction]
fn presets(py: Python<'_>, task: &str) -> PyResult<Py<PyDict>> {
    let p = match parse_task(task)? {
        Task::Classification => CLASSIFICATION_PRESETS,
        Task::Segmentation => SEGMENTATION_PRESETS,
    };
    let out = PyDict::new(py);
    out.set_item("q1", p.q1)?;
    out.set_item("median", p.median)?;
    out.set_item("q3", p.q3)?;
    Ok(out.into())
}

#[pymodule]
fn claimgate_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(check_classification, m)?)?;
    m.add_function(wrap_pyfunction!(check_classification_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(check_segmentation, m)?)?;
    m.add_function(wrap_pyfunction!(impute_sd, m)?)?;
    m.add_function(wrap_pyfunction!(congruence_classification, m)?)?;
    m.add_function(wrap_pyfunction!(congruence_segmentation, m)?)?;
    m.add_function(wrap_pyfunction!(congruence_quantiles, m)?)?;
    m.add_function(wrap_pyfunction!(classification_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(required_n, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    Ok(())
}
