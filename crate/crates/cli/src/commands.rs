use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use satmetric_core::ingest::{
    generate_synthetic, parse_item_means, parse_response_file, MissingPolicy, ResponseKind, ResponseSet,
    ValidationReport,
};
use satmetric_core::instrument::{build_instrument, SurveyInstrument};
use satmetric_core::kano::prioritize;
use satmetric_core::psychometrics::{item_descriptives, reliability_report, ReliabilityReport, ScoreMatrix};
use satmetric_core::qfd::build_hoq;
use satmetric_core::report::{
    assemble, emit, technical_importance_csv, write_files, AnalysisReport, Format, OutputFile, ReportParts, SurveyPair,
};
use satmetric_core::rootcause::{branch_magnitudes, build_fishbone, dissatisfaction_contributions, pareto, ContributionWeighting};
use satmetric_core::servqual::{analyze, importance_weights, ImportanceWeights, ReliabilityContext};

use crate::{
    Command, DescriptivesArgs, Failure, GapArgs, OutputArgs, QfdArgs, ReliabilityArgs, ReportArgs, SurveyArgs,
    SynthArgs, ValidateArgs,
};

pub(crate) fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate(a) => validate(a),
        Command::Descriptives(a) => descriptives(a),
        Command::Reliability(a) => reliability(a),
        Command::Gap(a) => gap(a),
        Command::Qfd(a) => qfd(a),
        Command::Synth(a) => synth(a),
        Command::Report(a) => report(a),
    }
}

fn data<E: std::fmt::Display>(context: &Path) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Data(format!("{}: {e}", context.display()))
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    String::from_utf8(read(path)?).map_err(data(path))
}

fn load_instrument(path: &Path) -> Result<SurveyInstrument, Failure> {
    build_instrument(&read_text(path)?).map_err(data(path))
}

fn load_responses(
    path: &Path,
    instrument: &SurveyInstrument,
    kind: ResponseKind,
    policy: MissingPolicy,
) -> Result<(ResponseSet, ValidationReport), Failure> {
    let (rs, report) = parse_response_file(&read(path)?, instrument, kind, policy).map_err(data(path))?;
    for e in &report.row_errors {
        eprintln!("{}: {e}", path.display());
    }
    Ok((rs, report))
}

fn write_output(out: Option<&PathBuf>, body: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)
                    .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", parent.display())))?;
            }
            std::fs::write(path, body).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .map_err(|e| Failure::Usage(format!("cannot write to standard output: {e}")))
        }
    }
}

fn validate(a: ValidateArgs) -> Result<(), Failure> {
    let inst = load_instrument(&a.instrument)?;
    let files: Vec<(&PathBuf, ResponseKind)> = [
        (&a.expect, ResponseKind::Expectation),
        (&a.perceive, ResponseKind::Perception),
        (&a.importance, ResponseKind::Importance),
    ]
    .into_iter()
    .filter_map(|(p, k)| p.as_ref().map(|p| (p, k)))
    .collect();
    if files.is_empty() {
        return Err(Failure::Usage("validate needs at least one of --expect, --perceive, --importance".into()));
    }
    let mut clean = true;
    for (path, kind) in files {
        match parse_response_file(&read(path)?, &inst, kind, MissingPolicy::DropRow) {
            Ok((_, report)) => {
                for e in &report.row_errors {
                    eprintln!("{}: {e}", path.display());
                }
                println!(
                    "{} ({kind}): {} accepted, {} rejected",
                    path.display(),
                    report.accepted_rows,
                    report.rejected_rows
                );
                clean &= report.is_clean();
            }
            Err(e) => {
                if let satmetric_core::IngestError::NoAcceptedRows(report) = &e {
                    for row in &report.row_errors {
                        eprintln!("{}: {row}", path.display());
                    }
                }
                eprintln!("{}: {e}", path.display());
                println!("{} ({kind}): invalid", path.display());
                clean = false;
            }
        }
    }
    if clean {
        Ok(())
    } else {
        Err(Failure::Data("validation found rejected rows".into()))
    }
}

fn survey(a: &SurveyArgs) -> (&PathBuf, ResponseKind) {
    match (&a.expect, &a.perceive) {
        (Some(p), _) => (p, ResponseKind::Expectation),
        (_, Some(p)) => (p, ResponseKind::Perception),
        // clap's required group guarantees one of the two.
        (None, None) => unreachable!("survey group is required"),
    }
}

fn descriptives(a: DescriptivesArgs) -> Result<(), Failure> {
    let inst = load_instrument(&a.survey.instrument)?;
    let (path, kind) = survey(&a.survey);
    let (rs, _) = load_responses(path, &inst, kind, a.survey.missing_policy)?;
    let d = item_descriptives(&rs, a.variance).map_err(data(path))?;
    let mut body = String::from("item_id,mean,variance,n\n");
    for x in d {
        body.push_str(&format!("{},{},{},{}\n", x.item_id, x.mean, x.variance, x.n));
    }
    write_output(a.out.as_ref(), &body)
}

fn check_alpha_threshold(t: f64) -> Result<(), Failure> {
    if (0.0..1.0).contains(&t) {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--alpha-threshold must lie in [0, 1), got {t}")))
    }
}

fn reliability_of(rs: &ResponseSet, threshold: f64, path: &Path) -> Result<ReliabilityReport, Failure> {
    let ids = rs.item_ids();
    reliability_report(&ScoreMatrix::from_response_set(rs), Some(&ids), threshold).map_err(data(path))
}

fn reliability(a: ReliabilityArgs) -> Result<(), Failure> {
    check_alpha_threshold(a.alpha_threshold)?;
    let inst = load_instrument(&a.survey.instrument)?;
    let (path, kind) = survey(&a.survey);
    let (rs, _) = load_responses(path, &inst, kind, a.survey.missing_policy)?;
    let r = reliability_of(&rs, a.alpha_threshold, path)?;
    let mut body = serde_json::to_string_pretty(&r).expect("reliability report serializes");
    body.push('\n');
    write_output(a.out.as_ref(), &body)?;
    if !r.passes_gate {
        eprintln!("satmetric: alpha {} does not exceed the threshold {}", r.alpha, r.threshold);
        if a.strict_gate {
            return Err(Failure::Data("reliability gate failed".into()));
        }
    }
    Ok(())
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn write_bundle(report: &AnalysisReport, output: &OutputArgs) -> Result<(), Failure> {
    let stem = output.out.to_string_lossy();
    let mut files: Vec<OutputFile> = Vec::new();
    for f in Format::ALL.into_iter().filter(|f| output.format.contains(f)) {
        files.extend(emit(report, f, &stem).map_err(|e| Failure::Data(e.to_string()))?);
    }
    write_files(&files).map_err(|e| Failure::Usage(e.to_string()))?;
    for f in &files {
        println!("wrote {}", f.path);
    }
    Ok(())
}

fn gap(a: GapArgs) -> Result<(), Failure> {
    check_alpha_threshold(a.alpha_threshold)?;
    if !(a.pareto_threshold > 0.0 && a.pareto_threshold <= 100.0) {
        return Err(Failure::Usage(format!("--pareto-threshold must lie in (0, 100], got {}", a.pareto_threshold)));
    }
    if a.weight_tolerance.is_nan() || a.weight_tolerance < 0.0 {
        return Err(Failure::Usage(format!("--weight-tolerance must be non-negative, got {}", a.weight_tolerance)));
    }

    let inst = load_instrument(&a.instrument)?;
    inst.require_all_dimensions().map_err(data(&a.instrument))?;
    let (e_rs, e_val) = load_responses(&a.expect, &inst, ResponseKind::Expectation, a.missing_policy)?;
    let (p_rs, p_val) = load_responses(&a.perceive, &inst, ResponseKind::Perception, a.missing_policy)?;
    let mut validation = vec![("expectation".to_string(), e_val), ("perception".to_string(), p_val)];

    let e_desc = item_descriptives(&e_rs, a.variance).map_err(data(&a.expect))?;
    let p_desc = item_descriptives(&p_rs, a.variance).map_err(data(&a.perceive))?;

    let mut rel = SurveyPair::default();
    for (label, rs, path, slot) in [
        ("expectation", &e_rs, &a.expect, &mut rel.expectation),
        ("perception", &p_rs, &a.perceive, &mut rel.perception),
    ] {
        match reliability_of(rs, a.alpha_threshold, path) {
            Ok(r) => {
                if !r.passes_gate {
                    eprintln!(
                        "satmetric: {label} survey alpha {} does not exceed the threshold {}",
                        r.alpha, a.alpha_threshold
                    );
                    if a.strict_gate {
                        return Err(Failure::Data(format!("{label} survey failed the reliability gate")));
                    }
                }
                *slot = Some(r);
            }
            Err(e) if a.strict_gate => return Err(e),
            Err(e) => eprintln!("satmetric: reliability not computed: {e}"),
        }
    }

    let weights = match (&a.importance, &a.weights) {
        (Some(path), _) => {
            let (rs, val) = load_responses(path, &inst, ResponseKind::Importance, a.missing_policy)?;
            validation.push(("importance".to_string(), val));
            importance_weights(&rs).map_err(data(path))?
        }
        (_, Some(path)) => ImportanceWeights::from_json(&read_text(path)?).map_err(data(path))?,
        (None, None) => unreachable!("weights source group is required"),
    };
    let weights = if a.normalize_weights {
        weights.normalized().map_err(|e| Failure::Data(e.to_string()))?
    } else if !weights.within_tolerance(a.weight_tolerance) {
        return Err(Failure::Data(format!(
            "importance means sum to {}, outside 100 +/- {}; pass --normalize-weights to rescale",
            weights.sum_of_means, a.weight_tolerance
        )));
    } else {
        weights
    };

    let mut gap_report = analyze(&inst, &e_desc, &p_desc, &weights).map_err(|e| Failure::Data(e.to_string()))?;
    gap_report.reliability_context = Some(ReliabilityContext {
        expectation: rel.expectation.clone(),
        perception: rel.perception.clone(),
    });
    let kano = prioritize(&gap_report.item_gaps, &weights, &inst, &a.kano_multipliers)
        .map_err(|e| Failure::Data(e.to_string()))?;
    let weighting = if a.pareto_unweighted {
        ContributionWeighting::Unweighted
    } else {
        ContributionWeighting::Importance
    };
    let contribs = dissatisfaction_contributions(&gap_report.item_gaps, &weights, &inst, weighting)
        .map_err(|e| Failure::Data(e.to_string()))?;
    let table = pareto(&contribs, a.pareto_threshold).map_err(|e| Failure::Usage(e.to_string()))?;

    let hoq = match &a.hoq {
        Some(path) => Some(build_hoq(&read_text(path)?).map_err(data(path))?),
        None => None,
    };
    let (fishbone, branches) = match &a.fishbone {
        Some(path) => {
            let tree = build_fishbone(&read_text(path)?).map_err(data(path))?;
            tree.check_items(&inst).map_err(data(path))?;
            let b = branch_magnitudes(&tree, &contribs);
            (Some(tree), b)
        }
        None => (None, Vec::new()),
    };

    let mut config = BTreeMap::new();
    config.insert("alpha_threshold".into(), a.alpha_threshold.to_string());
    config.insert("kano_multipliers".into(), a.kano_multipliers.to_string());
    config.insert("missing_policy".into(), format!("{:?}", a.missing_policy).to_lowercase());
    config.insert("normalize_weights".into(), a.normalize_weights.to_string());
    config.insert("pareto_threshold".into(), a.pareto_threshold.to_string());
    config.insert(
        "pareto_weighting".into(),
        if a.pareto_unweighted { "unweighted" } else { "importance" }.into(),
    );
    config.insert("strict_gate".into(), a.strict_gate.to_string());
    config.insert("variance".into(), format!("{:?}", a.variance).to_lowercase());
    config.insert("weight_tolerance".into(), a.weight_tolerance.to_string());
    config.insert(
        "weights_source".into(),
        if a.importance.is_some() { "importance" } else { "weights" }.into(),
    );

    let report = assemble(ReportParts {
        instrument: Some(inst),
        validation,
        descriptives: SurveyPair { expectation: Some(e_desc), perception: Some(p_desc) },
        reliability: rel,
        gap_report: Some(gap_report),
        kano_priorities: kano,
        pareto: Some(table),
        hoq,
        fishbone,
        branch_magnitudes: branches,
        weight_tolerance: Some(a.weight_tolerance),
        generated_at: (!a.output.suppress_timestamp).then(now),
        config,
    })
    .map_err(|e| Failure::Data(e.to_string()))?;
    for w in &report.warnings {
        eprintln!("warning [{}]: {}", w.code.as_str(), w.message);
    }
    println!("overall weighted score: {}", report.gap_report.overall_weighted_sum);
    write_bundle(&report, &a.output)
}

fn qfd(a: QfdArgs) -> Result<(), Failure> {
    let hoq = build_hoq(&read_text(&a.hoq)?).map_err(data(&a.hoq))?;
    if hoq.degenerate {
        eprintln!("warning [qfd_degenerate]: every relationship strength is zero");
    }
    let body = technical_importance_csv(&hoq).map_err(|e| Failure::Data(e.to_string()))?;
    write_output(a.out.as_ref(), &body)
}

fn synth(a: SynthArgs) -> Result<(), Failure> {
    let inst = load_instrument(&a.instrument)?;
    let targets = parse_item_means(&read(&a.targets)?, &inst).map_err(data(&a.targets))?;
    let rs = generate_synthetic(&inst, a.kind, &targets, a.n, a.seed).map_err(|e| Failure::Data(e.to_string()))?;
    write_output(a.out.as_ref(), &rs.to_csv())
}

fn report(a: ReportArgs) -> Result<(), Failure> {
    let mut report = AnalysisReport::from_json(&read_text(&a.from)?).map_err(data(&a.from))?;
    if a.output.suppress_timestamp {
        report.metadata.generated_at = None;
    }
    write_bundle(&report, &a.output)
}
