//! The five subcommands.

use std::collections::HashMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use setpersist::depth::FunctionalSample;
use setpersist::envelope::global_envelope_test_with;
use setpersist::io;
use setpersist::pipeline::{summary_curves, Analysis};
use setpersist::plot::{curves_svg, envelope_svg, Labels};
use setpersist::raster::{rasterize, GrainConfiguration};
use setpersist::simulate::{realisation_rng, ModelSpec};
use setpersist::study::{GofStudy, OutlierStudy};
use setpersist::summaries::CurveKind;

use crate::config::PipelineConfig;
use crate::CliError;

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))
}

/// Output failures are configuration problems (exit 2).
fn output<T>(path: &Path, r: setpersist::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    let f = File::create(path)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

fn csv_row<I, S>(w: &mut csv::Writer<BufWriter<File>>, path: &Path, row: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(row)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn finish(mut w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<(), CliError> {
    w.flush()
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn single_model(list: &[(String, ModelSpec)], what: &str) -> Result<(String, ModelSpec), CliError> {
    match list {
        [one] => Ok(one.clone()),
        [] => Err(CliError::Usage(format!("no {what} model given"))),
        _ => Err(CliError::Usage(format!("give exactly one {what} model"))),
    }
}

/// `simulate`: grain JSON plus PGM raster (with sidecar) per realisation.
pub fn simulate(cfg: &PipelineConfig) -> Result<(), CliError> {
    let n = cfg.n.unwrap_or(10);
    create_dir(&cfg.out)?;
    for (name, spec) in &cfg.models {
        for k in 0..n {
            let mut rng = realisation_rng(cfg.seed, k as u64);
            let config = spec
                .simulate(&cfg.window, &mut rng)
                .map_err(|e| CliError::Usage(format!("{name}: {e}")))?;
            let raster = rasterize(&config, cfg.resolution)
                .map_err(|e| CliError::Usage(format!("{name}: {e}")))?;
            let stem = format!("{name}-{k:04}");
            let grains = cfg.out.join(format!("{stem}.grains.json"));
            output(&grains, io::write_json(&config, &grains))?;
            let pgm = cfg.out.join(format!("{stem}.pgm"));
            output(&pgm, io::save_raster(&raster, &pgm))?;
        }
        eprintln!("{name}: wrote {n} realisations to {}", cfg.out.display());
    }
    Ok(())
}

fn load_input(path: &Path, resolution: usize) -> setpersist::Result<Analysis> {
    if path.extension().is_some_and(|e| e == "json") {
        let config: GrainConfiguration = io::read_configuration(path, None)?;
        Analysis::of_config(&config, resolution)
    } else {
        Analysis::of_raster(io::load_raster(path)?)
    }
}

fn usage(e: setpersist::Error) -> CliError {
    CliError::Usage(format!("{}: {e}", e.kind()))
}

fn stem(path: &Path) -> String {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("input");
    let name = name.strip_suffix(".grains.json").unwrap_or(name);
    match name.rfind('.') {
        Some(k) if k > 0 => name[..k].to_string(),
        _ => name.to_string(),
    }
}

/// `analyze`: diagram and summary CSVs (and optional SVGs) per input.
/// Returns whether every input failed.
pub fn analyze(cfg: &PipelineConfig, inputs: &[PathBuf], svg: bool) -> Result<bool, CliError> {
    if inputs.is_empty() {
        return Err(CliError::Usage("analyze needs at least one input file".into()));
    }
    create_dir(&cfg.out)?;
    let errors_path = cfg.out.join("errors.csv");
    let mut errors = csv_writer(&errors_path)?;
    csv_row(&mut errors, &errors_path, ["input", "error", "message"])?;
    let mut ok: Vec<(String, Analysis)> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for path in inputs {
        match load_input(path, cfg.resolution) {
            Ok(a) => {
                let base = stem(path);
                let count = seen.entry(base.clone()).or_insert(0);
                *count += 1;
                let name = if *count == 1 { base } else { format!("{base}-{count}") };
                ok.push((name, a));
            }
            Err(e) => {
                eprintln!("{}: {}: {e}", path.display(), e.kind());
                csv_row(
                    &mut errors,
                    &errors_path,
                    [path.display().to_string(), e.kind().to_string(), e.to_string()],
                )?;
            }
        }
    }
    finish(errors, &errors_path)?;
    if ok.is_empty() {
        return Ok(true);
    }
    let analyses: Vec<Analysis> = ok.iter().map(|(_, a)| a.clone()).collect();
    for (stem, a) in &ok {
        let path = cfg.out.join(format!("{stem}.pd.csv"));
        let f = BufWriter::new(output(&path, File::create(&path).map_err(Into::into))?);
        output(&path, io::write_diagram_csv(&a.diagram, f))?;
    }
    for &kind in &cfg.summaries {
        let curves = summary_curves(kind, &analyses, &cfg.grids)
            .map_err(|e| CliError::Analysis(e.to_string()))?;
        for ((stem, _), curve) in ok.iter().zip(&curves) {
            let path = cfg.out.join(format!("{stem}.{kind}.csv"));
            let f = BufWriter::new(output(&path, File::create(&path).map_err(Into::into))?);
            output(&path, io::write_curve_csv(curve, f))?;
            if svg {
                let labels = Labels {
                    title: format!("{kind} of {stem}"),
                    x: axis_label(kind).into(),
                    y: kind.to_string(),
                };
                let plot = curves_svg(&[(curve, "")], &labels)
                    .map_err(|e| CliError::Analysis(e.to_string()))?;
                write_text(&cfg.out.join(format!("{stem}.{kind}.svg")), &plot)?;
            }
        }
    }
    eprintln!(
        "analysed {} of {} inputs into {}",
        ok.len(),
        inputs.len(),
        cfg.out.display()
    );
    Ok(false)
}

fn axis_label(kind: CurveKind) -> &'static str {
    match kind {
        CurveKind::Apf0 | CurveKind::Apf1 => "meanage",
        CurveKind::Hz0 | CurveKind::Hz1 => "rho",
        CurveKind::Cf => "square side",
        CurveKind::Esf => "signed distance",
        CurveKind::Custom => "argument",
    }
}

fn pct(count: usize, of: usize) -> String {
    if of == 0 {
        "NA".into()
    } else {
        format!("{:.1}", 100.0 * count as f64 / of as f64)
    }
}

fn study_pairs(cfg: &PipelineConfig, what: &str) -> Result<Vec<((String, ModelSpec), (String, ModelSpec))>, CliError> {
    if cfg.alternatives.is_empty() {
        return Err(CliError::Usage(format!("give the {what} model(s) with --alt")));
    }
    Ok(cfg
        .models
        .iter()
        .flat_map(|m| cfg.alternatives.iter().map(move |a| (m.clone(), a.clone())))
        .collect())
}

/// `outlier-study`: detection rates per (null, intruder, summary).
/// Returns whether some cell had no successful repetition.
pub fn outlier_study(cfg: &PipelineConfig) -> Result<bool, CliError> {
    let studies = study_pairs(cfg, "intruder")?
        .into_iter()
        .map(|((null_name, null), (alt_name, alt))| {
            let study = OutlierStudy {
                summaries: cfg.summaries.clone(),
                sample_size: cfg.n.unwrap_or(30),
                reps: cfg.reps.unwrap_or(100),
                alpha: cfg.alpha,
                resolution: cfg.resolution,
                seed: cfg.seed,
                grids: cfg.grids,
                depth: cfg.depth,
                ..OutlierStudy::new(null, alt, cfg.window)
            };
            study.validate().map_err(usage)?;
            Ok((null_name, alt_name, study))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    create_dir(&cfg.out)?;
    let table_path = cfg.out.join("outlier_study.csv");
    let records_path = cfg.out.join("outlier_records.csv");
    let mut table = csv_writer(&table_path)?;
    let mut records = csv_writer(&records_path)?;
    csv_row(
        &mut table,
        &table_path,
        [
            "null", "intruder", "summary", "reps", "failures", "detected", "detection_pct", "order1",
            "order2", "order3", "mean_null_flagged",
        ],
    )?;
    csv_row(
        &mut records,
        &records_path,
        ["null", "intruder", "summary", "rep", "intruder_order", "null_flagged", "error"],
    )?;
    let mut empty_cell = false;
    println!("null        intruder    summary  detected  by order (1/2/3)  failures");
    for (null_name, alt_name, study) in studies {
        let result = study.run().map_err(usage)?;
        for c in &result.cells {
            let ok = c.reps - c.failures;
            empty_cell |= ok == 0;
            println!(
                "{null_name:<11} {alt_name:<11} {:<8} {:>6}%   {}/{}/{}  {:>14}",
                c.summary.to_string(),
                pct(c.detected, ok),
                c.by_order[0],
                c.by_order[1],
                c.by_order[2],
                c.failures
            );
            csv_row(
                &mut table,
                &table_path,
                [
                    null_name.clone(),
                    alt_name.clone(),
                    c.summary.to_string(),
                    c.reps.to_string(),
                    c.failures.to_string(),
                    c.detected.to_string(),
                    pct(c.detected, ok),
                    c.by_order[0].to_string(),
                    c.by_order[1].to_string(),
                    c.by_order[2].to_string(),
                    format!("{:.3}", c.mean_null_flagged),
                ],
            )?;
        }
        for r in &result.records {
            if let Some(e) = &r.error {
                eprintln!("{null_name}/{alt_name} rep {} {}: {e}", r.rep, r.summary);
            }
            csv_row(
                &mut records,
                &records_path,
                [
                    null_name.clone(),
                    alt_name.clone(),
                    r.summary.to_string(),
                    r.rep.to_string(),
                    r.intruder_order.map_or("NA", |o| o.as_str()).to_string(),
                    r.null_flagged.to_string(),
                    r.error.clone().unwrap_or_default(),
                ],
            )?;
        }
    }
    finish(table, &table_path)?;
    finish(records, &records_path)?;
    Ok(empty_cell)
}

/// `gof-study`: rejection rates per (null, alternative, summary).
/// Returns whether some cell had no successful repetition.
pub fn gof_study(cfg: &PipelineConfig) -> Result<bool, CliError> {
    let studies = study_pairs(cfg, "alternative")?
        .into_iter()
        .map(|((null_name, null), (alt_name, alt))| {
            let study = GofStudy {
                summaries: cfg.summaries.clone(),
                sims: cfg.n.unwrap_or(50),
                reps: cfg.reps.unwrap_or(50),
                alpha: cfg.alpha,
                ordering: cfg.ordering,
                resolution: cfg.resolution,
                seed: cfg.seed,
                grids: cfg.grids,
                ..GofStudy::new(null, alt, cfg.window)
            };
            study.validate().map_err(usage)?;
            Ok((null_name, alt_name, study))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    create_dir(&cfg.out)?;
    let table_path = cfg.out.join("gof_study.csv");
    let records_path = cfg.out.join("gof_records.csv");
    let mut table = csv_writer(&table_path)?;
    let mut records = csv_writer(&records_path)?;
    csv_row(
        &mut table,
        &table_path,
        [
            "null", "alternative", "summary", "reps", "failures", "rejected_05", "rejected_10",
            "pct_05", "pct_10",
        ],
    )?;
    csv_row(
        &mut records,
        &records_path,
        ["null", "alternative", "summary", "rep", "p_value", "observed_rank", "error"],
    )?;
    let mut empty_cell = false;
    println!("null        alternative summary  p<=0.05  p<=0.1  failures");
    for (null_name, alt_name, study) in studies {
        let result = study.run().map_err(usage)?;
        for c in &result.cells {
            let ok = c.reps - c.failures;
            empty_cell |= ok == 0;
            println!(
                "{null_name:<11} {alt_name:<11} {:<8} {:>6}%  {:>6}%  {:>8}",
                c.summary.to_string(),
                pct(c.rejected_05, ok),
                pct(c.rejected_10, ok),
                c.failures
            );
            csv_row(
                &mut table,
                &table_path,
                [
                    null_name.clone(),
                    alt_name.clone(),
                    c.summary.to_string(),
                    c.reps.to_string(),
                    c.failures.to_string(),
                    c.rejected_05.to_string(),
                    c.rejected_10.to_string(),
                    pct(c.rejected_05, ok),
                    pct(c.rejected_10, ok),
                ],
            )?;
        }
        for r in &result.records {
            if let Some(e) = &r.error {
                eprintln!("{null_name}/{alt_name} rep {} {}: {e}", r.rep, r.summary);
            }
            csv_row(
                &mut records,
                &records_path,
                [
                    null_name.clone(),
                    alt_name.clone(),
                    r.summary.to_string(),
                    r.rep.to_string(),
                    r.p_value.map_or("NA".into(), |p| p.to_string()),
                    r.observed_rank.map_or("NA".into(), |k| k.to_string()),
                    r.error.clone().unwrap_or_default(),
                ],
            )?;
        }
    }
    finish(table, &table_path)?;
    finish(records, &records_path)?;
    Ok(empty_cell)
}

/// `envelope-plot`: one envelope test of an observed realisation (a file or
/// a draw from the alternative) against null simulations.
pub fn envelope_plot(cfg: &PipelineConfig, observed: Option<&Path>) -> Result<(), CliError> {
    let (null_name, null) = single_model(&cfg.models, "null")?;
    let sims = cfg.n.unwrap_or(50);
    if cfg.alpha * ((sims + 1) as f64) < 1.0 - 1e-9 {
        return Err(CliError::Usage(format!(
            "InsufficientSimulations: {sims} simulations cannot reach alpha {}",
            cfg.alpha
        )));
    }
    let kind = cfg.summaries[0];
    let (obs_name, obs) = match observed {
        Some(path) => (
            stem(path),
            load_input(path, cfg.resolution)
                .map_err(|e| CliError::Analysis(format!("{}: {}: {e}", path.display(), e.kind())))?,
        ),
        None => {
            let (name, alt) = single_model(&cfg.alternatives, "observed (--alt)")?;
            let config = alt
                .simulate(&cfg.window, &mut realisation_rng(cfg.seed ^ 0x0b5e_4ed0, 0))
                .map_err(|e| CliError::Analysis(e.to_string()))?;
            let a = Analysis::of_config(&config, cfg.resolution)
                .map_err(|e| CliError::Analysis(format!("{}: {e}", e.kind())))?;
            (name, a)
        }
    };
    let mut analyses = vec![obs];
    for k in 0..sims {
        let config = null
            .simulate(&cfg.window, &mut realisation_rng(cfg.seed, k as u64))
            .map_err(|e| CliError::Analysis(e.to_string()))?;
        analyses.push(
            Analysis::of_config(&config, cfg.resolution)
                .map_err(|e| CliError::Analysis(format!("simulation {k}: {}: {e}", e.kind())))?,
        );
    }
    let analysis_err = |e: setpersist::Error| CliError::Analysis(format!("{}: {e}", e.kind()));
    let mut curves = summary_curves(kind, &analyses, &cfg.grids).map_err(analysis_err)?;
    let sample = FunctionalSample::new(curves.split_off(1)).map_err(analysis_err)?;
    let observed = &curves[0];
    let result =
        global_envelope_test_with(observed, &sample, cfg.alpha, cfg.ordering).map_err(analysis_err)?;
    create_dir(&cfg.out)?;
    let json = cfg.out.join("envelope.json");
    output(&json, io::write_json(&io::EnvelopeSummary::from(&result), &json))?;
    let csv_path = cfg.out.join("envelope.csv");
    let f = BufWriter::new(output(&csv_path, File::create(&csv_path).map_err(Into::into))?);
    output(&csv_path, io::write_envelope_csv(&result, observed, f))?;
    let labels = Labels {
        title: format!("{kind}: {obs_name} against {sims} {null_name} simulations"),
        x: axis_label(kind).into(),
        y: kind.to_string(),
    };
    let svg = envelope_svg(&result, observed, &labels).map_err(analysis_err)?;
    write_text(&cfg.out.join("envelope.svg"), &svg)?;
    println!(
        "p = {:.4} (rank {}), {} at alpha = {}",
        result.p_value,
        result.observed_rank,
        if result.reject { "reject" } else { "do not reject" },
        cfg.alpha
    );
    Ok(())
}
