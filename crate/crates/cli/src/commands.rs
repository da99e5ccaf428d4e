use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use claimgate::{
    build_grid, congruence_classification, congruence_segmentation, corpus_pfc, filter_eligible,
    grid_to_csv, grid_to_svg, ingest_corpus, pfc_classification, pfc_segmentation, resolve_sds,
    summarize, threshold_curve, ClassificationComparison, CongruenceAssumption, CongruenceChoice,
    Error, PresetQuantile, Provenance, RequiredN, Result, RngStream, SdImputationModel, SdSource,
    SegmentationComparison, Task, ThresholdCurve, CLASSIFICATION_PRESETS, SEGMENTATION_PRESETS,
};

use crate::{
    CheckClsArgs, CheckSegArgs, CongruenceArg, CongruenceArgs, CorpusArgs, GridArgs, PresetsArg,
    RequiredNArgs, SdModelOpts,
};

fn provenance_label(p: Provenance) -> &'static str {
    match p {
        Provenance::PresetMedian => "preset-median",
        Provenance::PresetQ1 => "preset-q1",
        Provenance::PresetQ3 => "preset-q3",
        Provenance::UserSupplied => "user-supplied",
        Provenance::Empirical => "empirical",
    }
}

fn resolve_congruence(arg: CongruenceArg, task: Task) -> CongruenceAssumption {
    match arg {
        CongruenceArg::Preset(q) => task.presets().get(q),
        CongruenceArg::Value(v) => CongruenceAssumption::user_supplied(v),
    }
}

fn sd_model(opts: &SdModelOpts) -> Result<SdImputationModel> {
    SdImputationModel::parametric(opts.sd_coef, opts.pi_q1, opts.pi_q3)
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report types serialize")
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report types serialize"));
}

fn write_with_config(path: &Path, command: &str, config_json: &str, body: &str) -> Result<()> {
    let content = format!("# claimgate {command}\n# config: {config_json}\n{body}");
    std::fs::write(path, content)?;
    Ok(())
}

/// Minimal CSV quoting for free-text fields.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("{what}: `{t}` is not a number")))
        })
        .collect()
}

fn parse_u64_list(s: &str, what: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<u64>()
                .map_err(|_| Error::InvalidArgument(format!("{what}: `{t}` is not a count")))
        })
        .collect()
}

#[derive(Serialize)]
struct BoundsOut {
    lower: f64,
    upper: f64,
}

#[derive(Serialize)]
struct CongruenceOut {
    value: f64,
    provenance: &'static str,
    clamped: bool,
}

impl CongruenceOut {
    fn from(c: CongruenceAssumption) -> Self {
        CongruenceOut {
            value: c.value,
            provenance: provenance_label(c.provenance),
            clamped: c.clamped,
        }
    }
}

// ---------------------------------------------------------------------------
// check-cls

#[derive(Serialize)]
struct CheckClsConfig {
    command: &'static str,
    n: u64,
    acc_a: f64,
    acc_b: f64,
    congruence: String,
    scale: &'static str,
    round_counts: bool,
    k: u64,
    seed: u64,
}

#[derive(Serialize)]
struct CheckClsReport {
    config: CheckClsConfig,
    probability: f64,
    std_err: f64,
    method: &'static str,
    congruence: CongruenceOut,
    bounds: BoundsOut,
}

pub fn check_cls(args: CheckClsArgs) -> Result<()> {
    let acc_a = args.scale.normalize(args.acc_a);
    let acc_b = args.scale.normalize(args.acc_b);
    let cmp = ClassificationComparison::new(args.n, acc_a, acc_b)?;
    let assumed = resolve_congruence(args.congruence, Task::Classification);
    if !(0.0..=1.0).contains(&assumed.value) {
        return Err(Error::InvalidArgument(format!(
            "classification congruence must lie in [0, 1], got {}",
            assumed.value
        )));
    }
    let used = cmp.clamp_congruence(assumed);
    let stream = RngStream::new(args.run.seed, 0);
    let est = if args.round_counts {
        claimgate::pfc_classification_rounded(&cmp, used, args.run.k, stream)?
    } else {
        pfc_classification(&cmp, used, args.run.k, stream)?
    };
    let (lower, upper) = cmp.congruence_bounds();

    let report = CheckClsReport {
        config: CheckClsConfig {
            command: "check-cls",
            n: args.n,
            acc_a: args.acc_a,
            acc_b: args.acc_b,
            congruence: args.congruence.label(),
            scale: args.scale.label(),
            round_counts: args.round_counts,
            k: args.run.k,
            seed: args.run.seed,
        },
        probability: est.probability,
        std_err: est.std_err.unwrap_or(0.0),
        method: "monte-carlo",
        congruence: CongruenceOut::from(used),
        bounds: BoundsOut { lower, upper },
    };

    if args.json {
        print_json(&report);
    } else {
        println!("probability of false claims: {}", report.probability);
        println!("std err: {:.6} (k = {})", report.std_err, args.run.k);
        println!(
            "congruence: {} ({}, clamped: {})",
            used.value,
            provenance_label(used.provenance),
            used.clamped
        );
        println!("congruence bounds: [{lower}, {upper}]");
        println!("config: {}", to_json(&report.config));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// check-seg

#[derive(Serialize)]
struct CheckSegConfig {
    command: &'static str,
    n: u64,
    dsc_a: f64,
    dsc_b: f64,
    sd_a: Option<f64>,
    sd_b: Option<f64>,
    sd_source: &'static str,
    sd_coef: f64,
    pi_q1: f64,
    pi_q3: f64,
    congruence: String,
    scale: &'static str,
}

#[derive(Serialize)]
struct CheckSegReport {
    config: CheckSegConfig,
    probability: f64,
    method: &'static str,
    congruence: CongruenceOut,
    sd_a_used: f64,
    sd_b_used: f64,
    degenerate: bool,
}

pub fn check_seg(args: CheckSegArgs) -> Result<()> {
    let dsc_a = args.scale.normalize(args.dsc_a);
    let dsc_b = args.scale.normalize(args.dsc_b);
    let sd_a = args.sd_a.map(|v| args.scale.normalize(v));
    let sd_b = args.sd_b.map(|v| args.scale.normalize(v));
    let cmp = SegmentationComparison::new(args.n, dsc_a, dsc_b, sd_a, sd_b)?;

    let source = if sd_a.is_some() {
        SdSource::Reported
    } else {
        args.impute.unwrap_or(crate::ImputeVariant::Point).source()
    };
    let model = sd_model(&args.model)?;
    let assumed = resolve_congruence(args.congruence, Task::Segmentation);
    let (sd_a_used, sd_b_used) = resolve_sds(&cmp, source, &model)?;
    let est = pfc_segmentation(&cmp, assumed, source, &model)?;

    let report = CheckSegReport {
        config: CheckSegConfig {
            command: "check-seg",
            n: args.n,
            dsc_a: args.dsc_a,
            dsc_b: args.dsc_b,
            sd_a: args.sd_a,
            sd_b: args.sd_b,
            sd_source: source.label(),
            sd_coef: args.model.sd_coef,
            pi_q1: args.model.pi_q1,
            pi_q3: args.model.pi_q3,
            congruence: args.congruence.label(),
            scale: args.scale.label(),
        },
        probability: est.probability,
        method: "closed-form",
        congruence: CongruenceOut::from(assumed),
        sd_a_used,
        sd_b_used,
        degenerate: est.degenerate,
    };

    if args.json {
        print_json(&report);
    } else {
        println!("probability of false claims: {}", report.probability);
        println!("method: closed-form (Student-t posterior, dof = {})", args.n - 1);
        println!(
            "congruence: {} ({})",
            assumed.value,
            provenance_label(assumed.provenance)
        );
        println!("sd used: a = {sd_a_used}, b = {sd_b_used} ({})", source.label());
        if est.degenerate {
            println!("degenerate: zero denominator; limiting value reported");
        }
        println!("config: {}", to_json(&report.config));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// corpus

#[derive(Serialize)]
struct CorpusConfig {
    command: &'static str,
    input: String,
    task: Option<&'static str>,
    presets: &'static str,
    thresholds: Vec<f64>,
    sd_source: &'static str,
    sd_coef: f64,
    pi_q1: f64,
    pi_q3: f64,
    k: u64,
    seed: u64,
}

#[derive(Serialize)]
struct NamedCurve {
    preset: &'static str,
    #[serde(flatten)]
    curve: ThresholdCurve,
}

#[derive(Serialize)]
struct CorpusReport<'a> {
    config: &'a CorpusConfig,
    summary: &'a claimgate::CorpusSummary,
    rejections: &'a [claimgate::Rejection],
    excluded: &'a [claimgate::Excluded],
    records: &'a [claimgate::CorpusPfcRow],
    curves: &'a [NamedCurve],
    paper_level_curves: &'a [NamedCurve],
}

pub fn corpus(args: CorpusArgs) -> Result<()> {
    let (all_records, rejections) = ingest_corpus(&args.input, claimgate::SchemaVersion::V1)?;
    let task_filter: Option<Task> = args.task.map(Into::into);
    let records: Vec<_> = match task_filter {
        Some(t) => all_records.into_iter().filter(|r| r.task == t).collect(),
        None => all_records,
    };
    if records.is_empty() {
        return Err(Error::InvalidArgument(
            "no usable records after parsing and task filtering".into(),
        ));
    }

    let thresholds = parse_f64_list(&args.thresholds, "--thresholds")?;
    let model = sd_model(&args.model)?;
    let sd_source: SdSource = args.sd_source.into();
    let summary = summarize(&records)?;
    let (eligible, excluded) = filter_eligible(records);

    let quantiles: &[PresetQuantile] = match args.presets {
        PresetsArg::Median => &[PresetQuantile::Median],
        PresetsArg::All => &[PresetQuantile::Q1, PresetQuantile::Median, PresetQuantile::Q3],
    };

    let mut curves = Vec::new();
    let mut paper_curves = Vec::new();
    let mut median_rows = Vec::new();
    for &q in quantiles {
        let rows = corpus_pfc(
            &eligible,
            CongruenceChoice::Preset(q),
            sd_source,
            &model,
            args.run.k,
            args.run.seed,
        );
        let probs: Vec<f64> = rows.iter().filter_map(|r| r.probability).collect();
        if probs.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "no record produced an estimate under the {} preset",
                q.label()
            )));
        }
        curves.push(NamedCurve {
            preset: q.label(),
            curve: threshold_curve(&probs, &thresholds)?,
        });
        // Papers with several comparison rows are also summarized at the
        // paper level, each counted once at its worst row.
        paper_curves.push(NamedCurve {
            preset: q.label(),
            curve: threshold_curve(&claimgate::paper_level_probabilities(&rows), &thresholds)?,
        });
        if q == PresetQuantile::Median {
            median_rows = rows;
        }
    }

    let config = CorpusConfig {
        command: "corpus",
        input: args.input.display().to_string(),
        task: task_filter.map(|t| t.label()),
        presets: match args.presets {
            PresetsArg::Median => "median",
            PresetsArg::All => "all",
        },
        thresholds: thresholds.clone(),
        sd_source: sd_source.label(),
        sd_coef: args.model.sd_coef,
        pi_q1: args.model.pi_q1,
        pi_q3: args.model.pi_q3,
        k: args.run.k,
        seed: args.run.seed,
    };
    let config_json = to_json(&config);

    std::fs::create_dir_all(&args.out_dir)?;

    let report = CorpusReport {
        config: &config,
        summary: &summary,
        rejections: &rejections,
        excluded: &excluded,
        records: &median_rows,
        curves: &curves,
        paper_level_curves: &paper_curves,
    };
    let mut report_json = serde_json::to_string_pretty(&report).expect("report serializes");
    report_json.push('\n');
    std::fs::write(args.out_dir.join("report.json"), report_json)?;

    let mut estimates = String::from(
        "index,paper_id,task,n_test,delta,probability,std_err,method,congruence,clamped,degenerate,error\n",
    );
    for row in &median_rows {
        let method = match row.method {
            Some(claimgate::EstimateMethod::MonteCarlo) => "monte-carlo",
            Some(claimgate::EstimateMethod::ClosedForm) => "closed-form",
            Some(claimgate::EstimateMethod::GridOracle) => "grid-oracle",
            None => "",
        };
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        writeln!(
            estimates,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            row.index,
            csv_field(&row.paper_id),
            row.task.label(),
            row.n_test.map(|n| n.to_string()).unwrap_or_default(),
            opt(row.delta),
            opt(row.probability),
            opt(row.std_err),
            method,
            opt(row.congruence),
            row.clamped,
            row.degenerate,
            csv_field(row.error.as_deref().unwrap_or("")),
        )
        .expect("string write");
    }
    write_with_config(&args.out_dir.join("estimates.csv"), "corpus", &config_json, &estimates)?;

    let write_curves = |set: &[NamedCurve], suffix: &str| -> Result<()> {
        for named in set {
            let mut body = String::from("threshold,cumulative_pct\n");
            for (t, p) in named.curve.thresholds.iter().zip(&named.curve.cumulative_pct) {
                writeln!(body, "{t},{p}").expect("string write");
            }
            write_with_config(
                &args.out_dir.join(format!("curve_{}{suffix}.csv", named.preset)),
                "corpus",
                &config_json,
                &body,
            )?;
        }
        Ok(())
    };
    write_curves(&curves, "")?;
    write_curves(&paper_curves, "_papers")?;

    let mut rej = String::from("line,paper_id,reason,detail\n");
    for r in &rejections {
        writeln!(
            rej,
            "{},{},{},{}",
            r.line,
            csv_field(&r.paper_id),
            r.reason.code(),
            csv_field(&r.detail)
        )
        .expect("string write");
    }
    for e in &excluded {
        writeln!(
            rej,
            ",{},{},excluded by eligibility filter",
            csv_field(&e.record.paper_id),
            e.reason.code()
        )
        .expect("string write");
    }
    write_with_config(&args.out_dir.join("rejections.csv"), "corpus", &config_json, &rej)?;

    println!(
        "corpus: {} eligible / {} total records, {} rejected rows, {} excluded; bundle in {}",
        eligible.len(),
        summary.n_total,
        rejections.len(),
        excluded.len(),
        args.out_dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// grid

#[derive(Serialize)]
struct GridConfig {
    command: &'static str,
    task: &'static str,
    n_list: Vec<u64>,
    delta_list: Vec<f64>,
    base: f64,
    sd_coef: f64,
    pi_q1: f64,
    pi_q3: f64,
    k: u64,
    seed: u64,
}

pub fn grid(args: GridArgs) -> Result<()> {
    let task: Task = args.task.into();
    let n_values = parse_u64_list(&args.n_list, "--n-list")?;
    let delta_values = parse_f64_list(&args.delta_list, "--delta-list")?;
    let model = sd_model(&args.model)?;
    let presets = task.presets();
    let grid = build_grid(
        task,
        &n_values,
        &delta_values,
        args.base,
        &presets,
        &model,
        args.run.k,
        args.run.seed,
    )?;

    let config = GridConfig {
        command: "grid",
        task: task.label(),
        n_list: n_values,
        delta_list: delta_values,
        base: args.base,
        sd_coef: args.model.sd_coef,
        pi_q1: args.model.pi_q1,
        pi_q3: args.model.pi_q3,
        k: args.run.k,
        seed: args.run.seed,
    };
    let config_json = to_json(&config);

    write_with_config(&args.out, "grid", &config_json, &grid_to_csv(&grid))?;
    if let Some(svg_path) = &args.svg {
        std::fs::write(svg_path, grid_to_svg(&grid, &config_json))?;
    }

    let infeasible = grid.cells.iter().filter(|c| c.infeasible).count();
    println!(
        "grid: {} cells ({} infeasible) -> {}",
        grid.cells.len(),
        infeasible,
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// required-n

#[derive(Serialize)]
struct RequiredNConfig {
    command: &'static str,
    task: &'static str,
    delta: f64,
    base: f64,
    congruence: String,
    target: f64,
    cap: u64,
    sd_coef: f64,
    pi_q1: f64,
    pi_q3: f64,
    k: u64,
    seed: u64,
}

#[derive(Serialize)]
struct RequiredNReport {
    config: RequiredNConfig,
    result: RequiredN,
}

pub fn required_n(args: RequiredNArgs) -> Result<()> {
    let task: Task = args.task.into();
    let assumed = resolve_congruence(args.congruence, task);
    let model = sd_model(&args.model)?;
    let result = claimgate::required_n(
        task,
        args.delta,
        args.base,
        assumed,
        args.target,
        args.run.k,
        args.run.seed,
        args.cap,
        &model,
    )?;

    let report = RequiredNReport {
        config: RequiredNConfig {
            command: "required-n",
            task: task.label(),
            delta: args.delta,
            base: args.base,
            congruence: args.congruence.label(),
            target: args.target,
            cap: args.cap,
            sd_coef: args.model.sd_coef,
            pi_q1: args.model.pi_q1,
            pi_q3: args.model.pi_q3,
            k: args.run.k,
            seed: args.run.seed,
        },
        result,
    };

    if args.json {
        print_json(&report);
    } else {
        match result {
            RequiredN::Found { n } => println!(
                "minimum test-set size for pfc <= {}: n = {n}",
                args.target
            ),
            RequiredN::ExceedsCap { cap } => println!(
                "target pfc {} is not reached below the cap of n = {cap}",
                args.target
            ),
        }
        println!("config: {}", to_json(&report.config));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// congruence

#[derive(Serialize)]
struct CongruenceConfig {
    command: &'static str,
    input: String,
    task: &'static str,
}

#[derive(Serialize)]
struct CongruenceReport {
    config: CongruenceConfig,
    value: f64,
    provenance: &'static str,
    n_images: usize,
    presets_for_task: claimgate::CongruencePresets,
}

pub fn congruence(args: CongruenceArgs) -> Result<()> {
    let task: Task = args.task.into();
    let (value, n_images) = match task {
        Task::Classification => {
            let outcomes = claimgate::congruence::read_paired_outcomes(&args.input)?;
            (congruence_classification(&outcomes), outcomes.len())
        }
        Task::Segmentation => {
            let vectors = claimgate::congruence::read_paired_dsc(&args.input)?;
            (congruence_segmentation(&vectors)?, vectors.len())
        }
    };

    let report = CongruenceReport {
        config: CongruenceConfig {
            command: "congruence",
            input: args.input.display().to_string(),
            task: task.label(),
        },
        value: value.value,
        provenance: provenance_label(value.provenance),
        n_images,
        presets_for_task: match task {
            Task::Classification => CLASSIFICATION_PRESETS,
            Task::Segmentation => SEGMENTATION_PRESETS,
        },
    };

    if args.json {
        print_json(&report);
    } else {
        println!("empirical congruence: {} ({} images)", value.value, n_images);
        println!(
            "published presets for {}: q1 = {}, median = {}, q3 = {}",
            task.label(),
            report.presets_for_task.q1,
            report.presets_for_task.median,
            report.presets_for_task.q3
        );
        println!("config: {}", to_json(&report.config));
    }
    Ok(())
}
