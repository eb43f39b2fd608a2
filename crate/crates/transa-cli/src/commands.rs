//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use transa::analysis::{ldl_decompose, pca_project, weight_difference};
use transa::checkpoint::{file_hash, load_checkpoint, save_checkpoint, CheckpointMeta};
use transa::data::{RelationCategory, TripleSet};
use transa::eval;
use transa::metric::{EmbeddingModel, Variant};
use transa::train::{train_with_callback, TrainConfig, ValidationMode};

use crate::config;
use crate::dataset;
use crate::manifest::RunManifest;
use crate::DatasetArgs;

#[derive(clap::Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Score-function variant.
    #[arg(long, value_parser = ["transe", "transa", "psd"])]
    pub variant: Option<String>,
    /// Named preset: wn18, fb15k, wn11 or fb13.
    #[arg(long)]
    pub preset: Option<String>,
    /// Flat key-value config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Embedding-norm regularization weight.
    #[arg(long)]
    pub c: Option<f64>,
    /// Weight-matrix F-norm regularization weight.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Negative sampling strategy.
    #[arg(long, value_parser = ["unif", "bern"])]
    pub strategy: Option<String>,
    #[arg(long)]
    pub w_update_period: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub validation_period: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    /// Worker threads; 1 is the deterministic path.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Output directory for checkpoints, report and manifest.
    #[arg(long, default_value = "runs/latest")]
    pub out_dir: PathBuf,
}

pub fn stats(data: &DatasetArgs, out: Option<&Path>) -> Result<()> {
    let dir = dataset::resolve_dir(data.dataset.as_deref())?;
    let ts = dataset::load(&dir, data.column_order())?;
    let (train, valid, test) = ts.split_counts();
    let atpe = ts.atpe();

    println!("dataset   {}", dir.display());
    println!("#Rel      {}", ts.relation_count());
    println!("#Ent      {}", ts.entity_count());
    println!("#Train    {train}");
    println!("#Valid    {valid}");
    println!("#Test     {test}");
    println!("ATPE      {atpe:.2}");

    if let Some(out) = out {
        let csv = format!(
            "relations,entities,train,valid,test,atpe\n{},{},{},{},{},{:.4}\n",
            ts.relation_count(),
            ts.entity_count(),
            train,
            valid,
            test,
            atpe
        );
        fs::write(out, csv).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(())
}

pub fn train(args: TrainArgs) -> Result<()> {
    let mut cfg = match &args.preset {
        Some(name) => config::preset(name)?,
        None => TrainConfig::default(),
    };
    if let Some(path) = &args.config {
        config::apply_file(&mut cfg, path)?;
    }
    // Flags win over file and preset.
    let mut set = |key: &str, value: Option<String>| -> Result<()> {
        if let Some(v) = value {
            config::apply_key(&mut cfg, key, &v)?;
        }
        Ok(())
    };
    set("variant", args.variant.clone())?;
    set("alpha", args.alpha.map(|v| v.to_string()))?;
    set("k", args.k.map(|v| v.to_string()))?;
    set("gamma", args.gamma.map(|v| v.to_string()))?;
    set("c", args.c.map(|v| v.to_string()))?;
    set("lambda", args.lambda.map(|v| v.to_string()))?;
    set("epochs", args.epochs.map(|v| v.to_string()))?;
    set("batch_size", args.batch_size.map(|v| v.to_string()))?;
    set("strategy", args.strategy.clone())?;
    set("w_update_period", args.w_update_period.map(|v| v.to_string()))?;
    set("seed", args.seed.map(|v| v.to_string()))?;
    set("validation_period", args.validation_period.map(|v| v.to_string()))?;
    set("patience", args.patience.map(|v| v.to_string()))?;

    if cfg.variant == Variant::TransE && args.lambda.is_some() {
        eprintln!("warning: --lambda has no effect with --variant transe");
    }
    if cfg.variant == Variant::TransE && args.w_update_period.is_some() {
        eprintln!("warning: --w-update-period has no effect with --variant transe");
    }

    let dir = dataset::resolve_dir(args.data.dataset.as_deref())?;
    let ts = dataset::load(&dir, args.data.column_order())?;
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;

    let mut manifest = RunManifest::begin("train", args.workers);
    manifest.resolved_config = config::config_map(&cfg);
    manifest.seed = Some(cfg.seed);
    manifest.record_dataset(&dir)?;

    println!(
        "training variant={} k={} alpha={} gamma={} c={} strategy={} epochs={} seed={} workers={}",
        cfg.variant.label(),
        cfg.k,
        cfg.alpha,
        cfg.gamma,
        cfg.c,
        cfg.strategy.label(),
        cfg.epochs,
        cfg.seed,
        args.workers
    );

    let meta = CheckpointMeta::of(&ts);
    let mut improvement_paths: Vec<PathBuf> = Vec::new();
    let (model, report) =
        train_with_callback(&ts, &cfg, args.workers, |model, epoch, metric| {
            let path = args.out_dir.join(format!("checkpoint-epoch{epoch}.ckpt"));
            if let Err(err) = save_checkpoint(model, &meta, &path) {
                eprintln!("warning: could not save {}: {err}", path.display());
            } else {
                println!(
                    "epoch {epoch}: validation improved to {metric:.3}, saved {}",
                    path.display()
                );
                improvement_paths.push(path);
            }
        })?;

    // Full per-epoch log goes to report.csv; stdout gets a readable sample.
    let stride = (report.epochs.len() / 20).max(1);
    for (i, stats) in report.epochs.iter().enumerate() {
        if i % stride != 0 && i + 1 != report.epochs.len() {
            continue;
        }
        println!(
            "epoch {:>4}  hinge {:>10.5}  violations {:>7}  entity-norm {:.4}  w-fallbacks {:>4}  {:.2}s",
            stats.epoch,
            stats.mean_hinge,
            stats.violations,
            stats.mean_entity_norm,
            stats.weight_fallbacks,
            stats.wall_secs
        );
    }
    match report.mode {
        ValidationMode::None => println!("no validation split; returning the final model"),
        _ => println!(
            "best validation metric {:.3} at epoch {}{}",
            report.best_metric,
            report.best_epoch,
            if report.stopped_early { " (stopped early)" } else { "" }
        ),
    }

    let ckpt_path = args.out_dir.join("model.ckpt");
    save_checkpoint(&model, &meta, &ckpt_path)?;
    let report_path = args.out_dir.join("report.csv");
    fs::write(&report_path, report.to_csv())
        .with_context(|| format!("writing {}", report_path.display()))?;

    manifest.add_artifact("checkpoint", &ckpt_path);
    manifest.add_artifact("report", &report_path);
    for (i, p) in improvement_paths.iter().enumerate() {
        manifest.add_artifact(&format!("improvement_{i}"), p);
    }
    manifest.checkpoint_hash = Some(file_hash(&ckpt_path)?);
    let manifest_path = manifest.finish(&args.out_dir)?;
    println!("checkpoint {}", ckpt_path.display());
    println!("manifest   {}", manifest_path.display());
    Ok(())
}

/// Loads a checkpoint and the dataset it was trained on, verifying the
/// vocabulary hashes.
fn load_model_and_dataset(
    model_path: &Path,
    data: &DatasetArgs,
) -> Result<(EmbeddingModel, TripleSet, PathBuf)> {
    let dir = dataset::resolve_dir(data.dataset.as_deref())?;
    let ts = dataset::load(&dir, data.column_order())?;
    let (model, meta) = load_checkpoint(model_path)?;
    meta.verify(&ts, model_path)?;
    Ok((model, ts, dir))
}

fn out_dir_or_model_dir(out_dir: Option<&Path>, model_path: &Path) -> PathBuf {
    out_dir
        .map(Path::to_owned)
        .unwrap_or_else(|| model_path.parent().unwrap_or(Path::new(".")).to_owned())
}

pub fn eval_link(
    model_path: &Path,
    data: &DatasetArgs,
    filtered_only: bool,
    workers: usize,
    out_dir: Option<&Path>,
) -> Result<()> {
    let (model, ts, dir) = load_model_and_dataset(model_path, data)?;
    let out_dir = out_dir_or_model_dir(out_dir, model_path);
    fs::create_dir_all(&out_dir)?;

    let mut manifest = RunManifest::begin("eval-link", workers);
    manifest.record_dataset(&dir)?;
    manifest.checkpoint_hash = Some(file_hash(model_path)?);

    let report = eval::link_prediction(&model, &ts, workers);

    if !filtered_only {
        println!(
            "raw      mean rank {:>9.1}   hits@10 {:>6.2}%",
            report.mean_rank_raw, report.hits_at_10_raw
        );
    }
    println!(
        "filtered mean rank {:>9.1}   hits@10 {:>6.2}%",
        report.mean_rank_filtered, report.hits_at_10_filtered
    );

    let link_path = out_dir.join("link_prediction.csv");
    let csv = format!(
        "variant,mean_rank_raw,mean_rank_filtered,hits10_raw,hits10_filtered\n{},{:.4},{:.4},{:.4},{:.4}\n",
        model.variant.label(),
        report.mean_rank_raw,
        report.mean_rank_filtered,
        report.hits_at_10_raw,
        report.hits_at_10_filtered
    );
    fs::write(&link_path, csv).with_context(|| format!("writing {}", link_path.display()))?;

    let cat_path = out_dir.join("by_category.csv");
    let mut csv = String::from("category,predicting_head_hits10,predicting_tail_hits10\n");
    let fmt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.4}"));
    for (i, cat) in RelationCategory::ALL.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{}\n",
            cat.label(),
            fmt(report.category_head[i]),
            fmt(report.category_tail[i])
        ));
        let show = |v: Option<f64>| v.map_or("   -  ".to_owned(), |x| format!("{x:>6.2}"));
        println!(
            "category {:>3}  head hits@10 {}  tail hits@10 {}",
            cat.label(),
            show(report.category_head[i]),
            show(report.category_tail[i])
        );
    }
    fs::write(&cat_path, csv).with_context(|| format!("writing {}", cat_path.display()))?;

    manifest.add_artifact("link_prediction", &link_path);
    manifest.add_artifact("by_category", &cat_path);
    manifest.finish(&out_dir)?;
    Ok(())
}

pub fn eval_class(
    model_path: &Path,
    data: &DatasetArgs,
    workers: usize,
    out_dir: Option<&Path>,
) -> Result<()> {
    let (model, ts, dir) = load_model_and_dataset(model_path, data)?;
    if ts.valid_labels.is_none() || ts.test_labels.is_none() {
        bail!("classification labels required");
    }
    let out_dir = out_dir_or_model_dir(out_dir, model_path);
    fs::create_dir_all(&out_dir)?;

    let mut manifest = RunManifest::begin("eval-class", workers);
    manifest.record_dataset(&dir)?;
    manifest.checkpoint_hash = Some(file_hash(model_path)?);

    let (thresholds, report) = eval::classify(&model, &ts, workers)?;
    println!("accuracy {:.2}%  ({} relations with tuned thresholds)",
        report.accuracy,
        thresholds.per_relation.iter().flatten().count()
    );

    let path = out_dir.join("classification.csv");
    let mut csv = String::from("relation,threshold,correct,total,accuracy\n");
    for (rel, &(correct, total)) in report.per_relation.iter().enumerate() {
        if total == 0 {
            continue;
        }
        csv.push_str(&format!(
            "{},{},{},{},{:.4}\n",
            ts.relations.name(rel as u32),
            thresholds.threshold_for(rel as u32),
            correct,
            total,
            100.0 * correct as f64 / total as f64
        ));
    }
    csv.push_str(&format!(
        "__overall__,{},{},{},{:.4}\n",
        thresholds.global,
        report.per_relation.iter().map(|r| r.0).sum::<usize>(),
        report.per_relation.iter().map(|r| r.1).sum::<usize>(),
        report.accuracy
    ));
    fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;

    manifest.add_artifact("classification", &path);
    manifest.finish(&out_dir)?;
    Ok(())
}

pub fn analyze_weights(
    model_path: &Path,
    dataset_dir: Option<&Path>,
    column_order: &str,
    workers: usize,
    out_dir: Option<&Path>,
) -> Result<()> {
    let (model, meta) = load_checkpoint(model_path)?;
    if model.weights.is_none() {
        bail!("the checkpoint is a transe model; weight analysis needs transa or psd");
    }
    let order = transa::data::ColumnOrder::parse(column_order).expect("validated by clap");

    // Dataset is optional: names and per-relation accuracies appear when it
    // is given (and labeled).
    let ts = if dataset_dir.is_some() || std::env::var_os(dataset::DATA_DIR_ENV).is_some() {
        let dir = dataset::resolve_dir(dataset_dir)?;
        let ts = dataset::load(&dir, order)?;
        meta.verify(&ts, model_path)?;
        Some(ts)
    } else {
        None
    };
    let accuracies: Option<Vec<(usize, usize)>> = match &ts {
        Some(ts) if ts.valid_labels.is_some() && ts.test_labels.is_some() => {
            let (_, report) = eval::classify(&model, ts, workers)?;
            Some(report.per_relation)
        }
        _ => None,
    };

    let out_dir = out_dir_or_model_dir(out_dir, model_path);
    fs::create_dir_all(&out_dir)?;
    let mut manifest = RunManifest::begin("analyze-weights", workers);
    manifest.checkpoint_hash = Some(file_hash(model_path)?);

    let weights = model.weights.as_ref().expect("checked above");
    let mut csv = String::from("relation,weight_difference,flagged,accuracy\n");
    for (rel, w) in weights.iter().enumerate() {
        let factors = ldl_decompose(w)?;
        let wd = weight_difference(&factors);
        let name = ts
            .as_ref()
            .map(|ts| ts.relations.name(rel as u32).to_owned())
            .unwrap_or_else(|| format!("relation_{rel}"));
        let acc = accuracies
            .as_ref()
            .and_then(|a| a.get(rel))
            .filter(|(_, total)| *total > 0)
            .map(|(c, t)| format!("{:.4}", 100.0 * *c as f64 / *t as f64))
            .unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{}\n",
            name,
            wd.map_or(String::new(), |x| format!("{x:.6}")),
            factors.perturbed,
            acc
        ));
    }
    let path = out_dir.join("weights.csv");
    fs::write(&path, &csv).with_context(|| format!("writing {}", path.display()))?;
    print!("{csv}");

    manifest.add_artifact("weights", &path);
    manifest.finish(&out_dir)?;
    Ok(())
}

pub fn export_pca(
    model_path: &Path,
    data: &DatasetArgs,
    relation: &str,
    head: Option<&str>,
    out_dir: Option<&Path>,
) -> Result<()> {
    let (model, ts, _dir) = load_model_and_dataset(model_path, data)?;
    let rel = ts
        .relations
        .id(relation)
        .ok_or(transa::Error::UnknownRelationName(relation.to_owned()))?;
    let head_id = match head {
        Some(name) => Some(
            ts.entities
                .id(name)
                .ok_or(transa::Error::UnknownEntityName(name.to_owned()))?,
        ),
        None => None,
    };

    // Entities incident to the relation across all positive splits; an
    // entity is "matched" when it completes a positive triple as tail (of
    // the given head, when one is named).
    let mut incident: Vec<u32> = Vec::new();
    let mut matched: Vec<bool> = Vec::new();
    let mut seen = std::collections::HashMap::new();
    let splits = [
        (&ts.train, None),
        (&ts.valid, ts.valid_labels.as_ref()),
        (&ts.test, ts.test_labels.as_ref()),
    ];
    for (split, labels) in splits {
        for (i, t) in split.iter().enumerate() {
            if t.relation != rel || labels.is_some_and(|l| !l[i]) {
                continue;
            }
            for e in [t.head, t.tail] {
                seen.entry(e).or_insert_with(|| {
                    incident.push(e);
                    matched.push(false);
                    incident.len() - 1
                });
            }
            let tail_ok = head_id.is_none_or(|h| t.head == h);
            if tail_ok {
                matched[seen[&t.tail]] = true;
            }
        }
    }
    if incident.len() < 2 {
        bail!("relation `{relation}` touches fewer than two entities");
    }

    let vectors: Vec<&[f64]> = incident.iter().map(|&e| model.entity(e)).collect();
    let projection = pca_project(&vectors)?;
    if projection.degenerate {
        eprintln!("warning: zero variance in the selected vectors; coordinates are all zero");
    }

    let out_dir = out_dir_or_model_dir(out_dir, model_path);
    fs::create_dir_all(&out_dir)?;
    let mut manifest = RunManifest::begin("export-pca", 1);
    manifest.checkpoint_hash = Some(file_hash(model_path)?);

    let mut csv = String::from("entity,x,y,matched\n");
    for ((e, coords), is_matched) in incident.iter().zip(&projection.coords).zip(&matched) {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            ts.entities.name(*e),
            coords[0],
            coords[1],
            is_matched
        ));
    }
    let path = out_dir.join("pca.csv");
    fs::write(&path, &csv).with_context(|| format!("writing {}", path.display()))?;
    println!(
        "wrote {} ({} entities, explained variance {:.4} + {:.4})",
        path.display(),
        incident.len(),
        projection.explained_variance[0],
        projection.explained_variance[1]
    );

    manifest.add_artifact("pca", &path);
    manifest.finish(&out_dir)?;
    Ok(())
}
