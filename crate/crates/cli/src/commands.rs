use std::fs;
use std::path::{Path, PathBuf};

use actiscreen::eval::{
    iterations_csv, run_kfold, run_pair_loocv, run_transfer_eval, summary_csv, summary_text,
    PairLoocvOptions, RocCurve,
};
use actiscreen::features::{build_dataset_from_hours, hours_for_all, SubjectHours};
use actiscreen::ingest::{
    load_depresjon_dataset_with, load_fitbit_dataset, parse_fitbit_steps, DepresjonLayout,
};
use actiscreen::model::{fit_forest, load_bundle, save_bundle, MaxFeatures, TrainingMetadata};
use actiscreen::scaling::{default_levels, fit_scaler, qq_points};
use actiscreen::screening::screen_upload;
use actiscreen::{
    Exec, FeatureSchema, ForestConfig, HourlyScaling, ModelBundle, ScalerKind, SubjectSeries,
};
use anyhow::{bail, Context, Result};
use serde::Serialize;

use crate::{Cli, Command, ForestArgs, OutputFormat};

fn forest_config(args: &ForestArgs, seed: u64, exec: Exec) -> ForestConfig {
    ForestConfig {
        n_trees: args.trees,
        max_features: MaxFeatures::Sqrt,
        max_depth: args.max_depth,
        min_samples_leaf: args.min_samples_leaf,
        seed,
        exec,
    }
}

/// Parameters echoed next to every output table.
#[derive(Serialize)]
struct RunRecord<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    scaler: Option<String>,
    forest: Option<&'a ForestConfig>,
    inputs: Vec<String>,
}

fn write(dir: &Path, name: &str, content: impl AsRef<[u8]>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, content).with_context(|| format!("writing {}", path.display()))
}

fn prepare_out(dir: &Path, record: &RunRecord) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write(
        dir,
        "run.json",
        serde_json::to_string_pretty(record)? + "\n",
    )
}

fn load_depresjon(root: &Path, exec: Exec) -> Result<Vec<SubjectSeries>> {
    let subjects = load_depresjon_dataset_with(root, &DepresjonLayout::default(), exec)
        .with_context(|| format!("loading dataset at {}", root.display()))?;
    if subjects.is_empty() {
        bail!("no activity files under {}", root.display());
    }
    Ok(subjects)
}

fn write_roc(dir: &Path, name: &str, roc: Option<&RocCurve>) -> Result<()> {
    match roc {
        Some(r) => write(dir, name, r.to_csv()),
        None => Ok(()),
    }
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), |v| format!("{v:.4}"))
}

pub fn run(cli: &Cli) -> Result<()> {
    let exec = cli.exec();
    let seed = cli.seed;
    let version = env!("CARGO_PKG_VERSION");
    match &cli.command {
        Command::Cv5 {
            data,
            scaler,
            folds,
            forest,
            out,
        } => {
            let kind = ScalerKind::from(*scaler);
            let config = forest_config(forest, seed, exec);
            prepare_out(
                out,
                &RunRecord {
                    command: "cv5",
                    version,
                    seed,
                    scaler: Some(kind.to_string()),
                    forest: Some(&config),
                    inputs: vec![data.display().to_string()],
                },
            )?;
            let subjects = load_depresjon(data, exec)?;
            let hours = hours_for_all(&subjects, exec);
            let dataset = build_dataset_from_hours(&hours, HourlyScaling::Fit(kind), exec)?;
            let cv = run_kfold(&dataset, *folds, &config, seed)?;
            let all = [&cv.forest, &cv.dummy];
            write(out, "summary.csv", summary_csv(&all))?;
            write(out, "iterations.csv", iterations_csv(seed, &all))?;
            write_roc(out, "roc.csv", Some(&cv.pooled_roc))?;
            for (i, roc) in cv.fold_rocs.iter().enumerate() {
                write_roc(out, &format!("roc_fold{}.csv", i + 1), roc.as_ref())?;
            }
            print!("{}", summary_text(&all));
            println!("pooled AUC {:.4}", cv.pooled_roc.auc);
        }
        Command::LoocvPairs {
            data,
            scaler,
            max_pairs,
            forest,
            out,
        } => {
            let kind = ScalerKind::from(*scaler);
            let config = forest_config(forest, seed, exec);
            prepare_out(
                out,
                &RunRecord {
                    command: "loocv-pairs",
                    version,
                    seed,
                    scaler: Some(kind.to_string()),
                    forest: Some(&config),
                    inputs: vec![data.display().to_string()],
                },
            )?;
            let subjects = load_depresjon(data, exec)?;
            let options = PairLoocvOptions {
                scaling: HourlyScaling::Fit(kind),
                max_pairs: *max_pairs,
                ..PairLoocvOptions::default()
            };
            let res = run_pair_loocv(&subjects, &config, seed, &options)?;
            let all = [&res.forest, &res.dummy];
            write(out, "summary.csv", summary_csv(&all))?;
            write(out, "iterations.csv", iterations_csv(seed, &all))?;
            let mut pairs = String::from(
                "pair,depressed_id,healthy_id,n_test,forest_accuracy,dummy_accuracy,poor\n",
            );
            for p in &res.pairs {
                pairs.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    p.index,
                    p.depressed_id,
                    p.healthy_id,
                    p.n_test,
                    cell(p.forest_accuracy),
                    cell(p.dummy_accuracy),
                    p.poor
                ));
            }
            write(out, "pairs.csv", pairs)?;
            write_roc(out, "roc.csv", res.pooled_roc.as_ref())?;
            print!("{}", summary_text(&all));
            println!("poor pairs: {} of {}", res.poor_pairs(), res.pairs.len());
        }
        Command::Transfer {
            secondary,
            primary,
            scaler,
            forest,
            out,
        } => {
            let kind = ScalerKind::from(*scaler);
            let config = forest_config(forest, seed, exec);
            prepare_out(
                out,
                &RunRecord {
                    command: "transfer",
                    version,
                    seed,
                    scaler: Some(kind.to_string()),
                    forest: Some(&config),
                    inputs: vec![
                        secondary.display().to_string(),
                        primary.display().to_string(),
                    ],
                },
            )?;
            let train = load_depresjon(secondary, exec)?;
            let test = load_fitbit_dataset(primary, &DepresjonLayout::default(), exec)
                .with_context(|| format!("loading step logs at {}", primary.display()))?;
            if test.is_empty() {
                bail!("no step logs under {}", primary.display());
            }
            let res = run_transfer_eval(&train, &test, &config, kind)?;
            let all = [&res.summary];
            write(out, "summary.csv", summary_csv(&all))?;
            write(out, "iterations.csv", iterations_csv(seed, &all))?;
            let mut days = String::from("subject_id,date,score,label,actual\n");
            for s in &res.subjects {
                for d in &s.days {
                    days.push_str(&format!(
                        "{},{},{},{},{}\n",
                        s.subject_id,
                        d.date,
                        d.score,
                        d.label.as_str(),
                        s.actual.as_str()
                    ));
                }
            }
            write(out, "days.csv", days)?;
            write_roc(out, "roc.csv", res.pooled_roc.as_ref())?;
            print!("{}", summary_text(&all));
            println!(
                "pooled accuracy {}",
                cell(res.summary.pooled_confusion().metrics().accuracy)
            );
        }
        Command::Train {
            data,
            scaler,
            forest,
            trained_at,
            out,
        } => {
            let kind = ScalerKind::from(*scaler);
            let config = forest_config(forest, seed, exec);
            let subjects = load_depresjon(data, exec)?;
            let hours = hours_for_all(&subjects, exec);
            let dataset = build_dataset_from_hours(&hours, HourlyScaling::Fit(kind), exec)?;
            let model = fit_forest(&dataset, &config)?;
            let name = data
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or("dataset")
                .to_string();
            let trained_at = trained_at.clone().unwrap_or_else(|| {
                chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
            });
            let bundle = ModelBundle::new(
                model,
                kind,
                FeatureSchema::v1(),
                TrainingMetadata {
                    dataset_name: name,
                    row_count: dataset.len(),
                    trained_at,
                },
            );
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(out, save_bundle(&bundle))
                .with_context(|| format!("writing {}", out.display()))?;
            eprintln!(
                "wrote {} ({} trees, {} rows)",
                out.display(),
                bundle.forest.trees.len(),
                dataset.len()
            );
        }
        Command::Predict {
            model,
            input,
            format,
            window,
        } => {
            let bundle = read_bundle(model)?;
            let bytes = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
            let resp = screen_upload(&bundle, &bytes, *window)
                .with_context(|| format!("screening {}", input.display()))?;
            match format {
                OutputFormat::Json => println!("{}", serde_json::to_string(&resp)?),
                OutputFormat::Csv => {
                    print!("{}", resp.to_csv());
                    eprintln!("skipped days: {}", resp.skipped_days);
                    eprintln!("{}", resp.disclaimer);
                }
            }
        }
        Command::Qq { a, b, out } => {
            prepare_out(
                out,
                &RunRecord {
                    command: "qq",
                    version,
                    seed,
                    scaler: None,
                    forest: None,
                    inputs: vec![a.display().to_string(), b.display().to_string()],
                },
            )?;
            let sa: Vec<f64> = hours_for_all(&load_depresjon(a, exec)?, exec)
                .iter()
                .flat_map(|h| h.totals().collect::<Vec<_>>())
                .collect();
            let sb = step_totals(b, exec)?;
            let levels = default_levels();
            let mut summary = String::from("variant,pearson,concordance\n");
            for (variant, kind) in [
                ("raw", None),
                ("minmax", Some(ScalerKind::MinMax)),
                ("robust", Some(ScalerKind::Robust)),
            ] {
                let (xa, xb) = match kind {
                    None => (sa.clone(), sb.clone()),
                    Some(k) => {
                        let pa = fit_scaler(k, &sa)?;
                        let pb = fit_scaler(k, &sb)?;
                        (
                            sa.iter().map(|&x| pa.apply(x)).collect(),
                            sb.iter().map(|&x| pb.apply(x)).collect(),
                        )
                    }
                };
                let qq = qq_points(&xa, &xb, &levels)?;
                write(out, &format!("qq_{variant}.csv"), qq.to_csv())?;
                summary.push_str(&format!(
                    "{variant},{},{}\n",
                    cell(qq.pearson()),
                    cell(qq.concordance())
                ));
            }
            write(out, "qq_summary.csv", &summary)?;
            print!("{summary}");
        }
        Command::Serve {
            model,
            port,
            bind,
            max_upload_bytes,
            static_dir,
        } => {
            let bundle = model.as_deref().map(read_bundle).transpose()?;
            let config = actiscreen_serve::ServeConfig {
                bind: bind.clone(),
                port: *port,
                max_upload_bytes: *max_upload_bytes,
                static_dir: static_dir.clone(),
            };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(actiscreen_serve::serve(bundle, config))?;
        }
    }
    Ok(())
}

fn read_bundle(path: &Path) -> Result<ModelBundle> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    load_bundle(&bytes).with_context(|| format!("loading bundle {}", path.display()))
}

fn step_totals(path: &PathBuf, exec: Exec) -> Result<Vec<f64>> {
    let subjects = if path.is_dir() {
        load_fitbit_dataset(path, &DepresjonLayout::default(), exec)?
    } else {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        vec![parse_fitbit_steps(&text).with_context(|| format!("parsing {}", path.display()))?]
    };
    let totals: Vec<f64> = subjects
        .iter()
        .flat_map(|s| SubjectHours::from_series(s).totals().collect::<Vec<_>>())
        .collect();
    if totals.is_empty() {
        bail!("no step records in {}", path.display());
    }
    Ok(totals)
}
