//! The `milattn` command line.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use milattn_core::embed::EmbeddingStore;
use milattn_core::evalkit::{kfold_split, run_fold, summarize, FoldMetrics, FoldOutcome, MilTrainer};
use milattn_core::milhead::{gradient_check_suite, GRADCHECK_STEP};
use milattn_core::numerics::{stream_id, RngStream};
use milattn_core::slidelab::{augment_patch, extract_patch, tissue_mask};
use milattn_core::slidescore::score_and_heatmap;
use milattn_core::trainer::{fixed_bags, grid_search, train_model, LabeledStore, TrainOutcome};
use milattn_core::HER2_CLASSES;
use serde_json::json;

use crate::checkpoint_io::{load_checkpoint_for, save_checkpoint};
use crate::config::{resolve_config, Override, Profile, ResolvedConfig};
use crate::error::{Error, Result};
use crate::imageio::{load_slide_png, save_mask_png, save_overlay, save_rgb, write_file, write_mask_csv};
use crate::manifest::{embed_slide, load_split, Manifest, SlideRecord, Split};
use crate::report::{
    fold_metrics_csv, heatmap_csv, roc_points_csv, score_json, summary_table_csv, training_log_csv, write_json,
    CrossvalReport, FoldReport,
};
use crate::store_io::{import_csv, read_store, write_store};
use crate::synth::{generate, synth_train_config, write_dataset, SynthConfig};

/// Largest gradient-check relative error accepted by `gradcheck`.
pub const GRADCHECK_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "milattn",
    version,
    about = "Attention-MIL HER2 scoring from patch embeddings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `train.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Maximum worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Defaults layered under the config file.
    #[arg(long, global = true, value_enum, default_value_t = Profile::Paper)]
    pub profile: Profile,
    /// Config override, e.g. `--set train.epochs=50`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<Override>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SlideSource {
    /// Binary embedding store.
    #[arg(long)]
    pub store: Option<PathBuf>,
    /// PNG slide, embedded with the toy embedder.
    #[arg(long)]
    pub image: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tissue mask of a PNG slide as mask.png and mask.csv.
    Mask {
        #[arg(long)]
        image: PathBuf,
    },
    /// Writes every eligible patch of a slide as PNG, optionally with
    /// augmented copies.
    Patches {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value_t = 0)]
        augmented_copies: usize,
    },
    /// Embeds one slide (`--image`) or every image in the config's manifest.
    Embed {
        #[arg(long, requires = "slide_id")]
        image: Option<PathBuf>,
        #[arg(long)]
        slide_id: Option<String>,
    },
    /// Converts an embedding CSV into a binary store.
    Import {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        slide_id: String,
    },
    /// Trains one head on the manifest's training split.
    Train,
    /// Learning-rate × weight-decay grid scored on one held-out fold.
    Gridsearch,
    /// K-fold cross-evaluation on the manifest's test split.
    Crossval,
    /// Slide-level score from sampled bags.
    Score {
        #[arg(long)]
        checkpoint: PathBuf,
        #[command(flatten)]
        source: SlideSource,
        #[arg(long)]
        slide_id: String,
    },
    /// Patch-level positivity heatmap (CSV, plus an overlay PNG for images).
    Heatmap {
        #[arg(long)]
        checkpoint: PathBuf,
        #[command(flatten)]
        source: SlideSource,
        #[arg(long)]
        slide_id: String,
        /// Multiply displayed values by the bag size.
        #[arg(long)]
        normalize: bool,
    },
    /// Compares analytic and finite-difference gradients.
    Gradcheck,
    /// Writes a synthetic four-class dataset with manifest and config.
    Synth {
        #[arg(long, default_value_t = 10)]
        slides_per_class: usize,
        #[arg(long, default_value_t = 2)]
        test_per_class: usize,
    },
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code: 0 on success, 1 on runtime errors, 2 on usage errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Err(msg) = init_logging() {
        eprintln!("error: {msg}");
        return 2;
    }
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn init_logging() -> std::result::Result<(), String> {
    let level = match std::env::var("MILATTN_LOG").as_deref() {
        Err(_) | Ok("info") => log::LevelFilter::Info,
        Ok("quiet") => log::LevelFilter::Off,
        Ok("debug") => log::LevelFilter::Debug,
        Ok(other) => return Err(format!("MILATTN_LOG must be quiet, info or debug, got {other:?}")),
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();
    log::set_max_level(level);
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    std::fs::create_dir_all(&g.out_dir).map_err(|e| Error::io(&g.out_dir, e))?;
    match &cli.command {
        Command::Mask { image } => cmd_mask(g, image),
        Command::Patches {
            image,
            augmented_copies,
        } => cmd_patches(g, image, *augmented_copies),
        Command::Embed { image, slide_id } => cmd_embed(g, image.as_deref(), slide_id.as_deref()),
        Command::Import { csv, slide_id } => {
            let store = import_csv(csv, slide_id)?;
            let out = g.out_dir.join(format!("{slide_id}.mile"));
            write_store(&store, &out)?;
            info!("{} entries of dim {} -> {}", store.len(), store.dim(), out.display());
            Ok(())
        }
        Command::Train => cmd_train(g),
        Command::Gridsearch => cmd_gridsearch(g),
        Command::Crossval => cmd_crossval(g),
        Command::Score {
            checkpoint,
            source,
            slide_id,
        } => cmd_score(g, checkpoint, source, slide_id, None),
        Command::Heatmap {
            checkpoint,
            source,
            slide_id,
            normalize,
        } => cmd_score(g, checkpoint, source, slide_id, Some(*normalize)),
        Command::Gradcheck => cmd_gradcheck(g),
        Command::Synth {
            slides_per_class,
            test_per_class,
        } => cmd_synth(g, *slides_per_class, *test_per_class),
    }
}

/// Config for commands that never train: `train.epochs` may be omitted.
fn settings(g: &GlobalArgs) -> Result<ResolvedConfig> {
    match resolve_config(g.config.as_deref(), g.profile, &g.overrides, g.seed) {
        Err(Error::Config(msg)) if msg.contains("missing field `epochs`") => {
            let mut overrides = g.overrides.clone();
            overrides.push("train.epochs=1".parse().expect("valid override"));
            resolve_config(g.config.as_deref(), g.profile, &overrides, g.seed)
        }
        other => other,
    }
}

fn training_settings(g: &GlobalArgs) -> Result<ResolvedConfig> {
    resolve_config(g.config.as_deref(), g.profile, &g.overrides, g.seed)
}

fn provenance(command: &str, r: &ResolvedConfig) -> serde_json::Value {
    json!({
        "command": command,
        "profile": r.profile,
        "config_file": r.source,
        "overrides": r.overrides,
        "config": r.config,
    })
}

fn slide_name(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "slide".into(), |s| s.to_string_lossy().into_owned())
}

fn cmd_mask(g: &GlobalArgs, image: &Path) -> Result<()> {
    let r = settings(g)?;
    let slide = load_slide_png(image, r.config.microns_per_pixel)?;
    let mask = tissue_mask(&slide, &r.config.mask).map_err(|e| Error::at(image, e))?;
    save_mask_png(&mask, &g.out_dir.join("mask.png"))?;
    write_mask_csv(&mask, &g.out_dir.join("mask.csv"))?;
    info!(
        "{} of {} cells eligible",
        mask.eligible_count(),
        mask.cols() * mask.rows()
    );
    Ok(())
}

fn cmd_patches(g: &GlobalArgs, image: &Path, copies: usize) -> Result<()> {
    let r = settings(g)?;
    let slide = load_slide_png(image, r.config.microns_per_pixel)?;
    let id = slide_name(image);
    let mask = tissue_mask(&slide, &r.config.mask).map_err(|e| Error::at(image, e))?;
    let dir = g.out_dir.join("patches");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let seed = r.config.train.seed;
    for (i, pr) in mask.eligible_refs(&id).iter().enumerate() {
        let patch = extract_patch(&slide, pr)?;
        let name = format!("x{}_y{}", pr.x, pr.y);
        save_rgb(
            &dir.join(format!("{name}.png")),
            patch.size(),
            patch.size(),
            patch.data().to_vec(),
        )?;
        let mut rng = RngStream::new(seed, stream_id(format!("augment:{id}").as_bytes(), i as u64));
        for j in 0..copies {
            let aug = augment_patch(&patch, &r.config.augment, &mut rng)?;
            save_rgb(
                &dir.join(format!("{name}_aug{j}.png")),
                aug.size(),
                aug.size(),
                aug.data().to_vec(),
            )?;
        }
    }
    info!("{} patches -> {}", mask.eligible_count(), dir.display());
    Ok(())
}

fn cmd_embed(g: &GlobalArgs, image: Option<&Path>, slide_id: Option<&str>) -> Result<()> {
    let r = settings(g)?;
    let embed = |path: &Path, id: &str| -> Result<EmbeddingStore> {
        let slide = load_slide_png(path, r.config.microns_per_pixel)?;
        embed_slide(&slide, id, &r.config.mask).map_err(|e| e.core().cloned().map_or(e, |c| Error::at(path, c)))
    };
    if let (Some(image), Some(id)) = (image, slide_id) {
        let store = embed(image, id)?;
        let out = g.out_dir.join(format!("{id}.mile"));
        write_store(&store, &out)?;
        info!("{} patches -> {}", store.len(), out.display());
        return Ok(());
    }
    let manifest = Manifest::load(&require_manifest(&r)?)?;
    let dir = g.out_dir.join("stores");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut records = Vec::with_capacity(manifest.slides.len());
    for rec in &manifest.slides {
        let store_path = match (&rec.image_path, &rec.store_path) {
            (Some(img), _) => {
                let store = embed(img, &rec.slide_id)?;
                let rel = PathBuf::from("stores").join(format!("{}.mile", rec.slide_id));
                write_store(&store, &g.out_dir.join(&rel))?;
                rel
            }
            (None, Some(p)) => std::path::absolute(p).map_err(|e| Error::io(p, e))?,
            (None, None) => unreachable!("validated on load"),
        };
        records.push(SlideRecord {
            image_path: None,
            store_path: Some(store_path),
            ..rec.clone()
        });
    }
    Manifest::save(&records, &g.out_dir.join("manifest.json"))?;
    info!("embedded {} slides -> {}", records.len(), g.out_dir.display());
    Ok(())
}

fn require_manifest(r: &ResolvedConfig) -> Result<PathBuf> {
    r.manifest_path()
        .ok_or_else(|| Error::Config("`manifest` is required for this command".into()))
}

fn load_splits(r: &ResolvedConfig) -> Result<(Vec<LabeledStore>, Vec<LabeledStore>)> {
    let manifest = Manifest::load(&require_manifest(r)?)?;
    let c = &r.config;
    let train = load_split(&manifest, Split::Train, &c.mask, c.microns_per_pixel)?;
    let test = load_split(&manifest, Split::Test, &c.mask, c.microns_per_pixel)?;
    if train.is_empty() {
        return Err(Error::Config(format!(
            "{}: no training slides",
            manifest.path.display()
        )));
    }
    Ok((train, test))
}

fn checkpoint_info(prov: &serde_json::Value, outcome: &TrainOutcome, fold: Option<usize>) -> serde_json::Value {
    json!({
        "provenance": prov,
        "fold": fold,
        "best_epoch": outcome.best_epoch,
        "best_val_loss": outcome.best_val_loss,
    })
}

fn cmd_train(g: &GlobalArgs) -> Result<()> {
    let r = training_settings(g)?;
    let (train, _) = load_splits(&r)?;
    let cfg = &r.config.train;
    let outcome = train_model(&train, &[] as &[LabeledStore], cfg)?;
    let prov = provenance("train", &r);
    save_checkpoint(
        &outcome.best_params,
        &g.out_dir.join("model.milc"),
        checkpoint_info(&prov, &outcome, None),
    )?;
    write_file(
        &g.out_dir.join("training_log.csv"),
        training_log_csv(&outcome.history, cfg).as_bytes(),
    )?;
    let last = outcome.history.last().map_or(f64::NAN, |h| h.train_loss);
    info!(
        "trained {} epochs on {} slides, final loss {last:.6}",
        cfg.epochs,
        train.len()
    );
    Ok(())
}

fn cmd_gridsearch(g: &GlobalArgs) -> Result<()> {
    let r = training_settings(g)?;
    let c = &r.config;
    let (train, _) = load_splits(&r)?;
    let labels: Vec<usize> = train.iter().map(|s| s.label).collect();
    let plan = kfold_split(&labels, c.folds, c.train.seed, c.stratify)?;
    let fit: Vec<&LabeledStore> = plan.training(0).into_iter().map(|i| &train[i]).collect();
    let val: Vec<&LabeledStore> = plan.held_out(0).into_iter().map(|i| &train[i]).collect();
    let result = grid_search(&fit, &val, &c.lr_grid, &c.wd_grid, &c.train)?;
    let mut csv = String::from("lr,wd,val_loss\n");
    for cell in &result.cells {
        csv.push_str(&format!(
            "{},{},{}\n",
            cell.learning_rate, cell.weight_decay, cell.val_loss
        ));
    }
    write_file(&g.out_dir.join("grid.csv"), csv.as_bytes())?;
    let best = &result.best;
    write_json(
        &json!({
            "provenance": provenance("gridsearch", &r),
            "validation_slides": val.iter().map(|s| s.slide_id()).collect::<Vec<_>>(),
            "best": {"learning_rate": best.learning_rate, "weight_decay": best.weight_decay, "val_loss": best.val_loss},
        }),
        &g.out_dir.join("grid.json"),
    )?;
    info!(
        "best lr {} wd {} (val loss {:.6})",
        best.learning_rate, best.weight_decay, best.val_loss
    );
    Ok(())
}

fn worker_count(g: &GlobalArgs, jobs: usize) -> usize {
    let avail = std::thread::available_parallelism().map_or(1, |n| n.get());
    g.threads.unwrap_or(avail).clamp(1, jobs.max(1))
}

fn cmd_crossval(g: &GlobalArgs) -> Result<()> {
    let r = training_settings(g)?;
    let c = &r.config;
    let (train, test) = load_splits(&r)?;
    if test.is_empty() {
        return Err(Error::Config(
            "crossval needs slides with \"split\": \"test\" in the manifest".into(),
        ));
    }
    let labels: Vec<usize> = train.iter().map(|s| s.label).collect();
    let plan = kfold_split(&labels, c.folds, c.train.seed, c.stratify)?;
    let test_bags = fixed_bags(&test, c.train.test_bags, c.train.bag_size, c.test_seed())?;
    let trainer = MilTrainer { cfg: c.train.clone() };

    let workers = worker_count(g, plan.k);
    info!(
        "{} folds on {} training slides, {} workers",
        plan.k,
        train.len(),
        workers
    );
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<milattn_core::Result<FoldOutcome<TrainOutcome>>>>> =
        Mutex::new((0..plan.k).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let fold = next.fetch_add(1, Ordering::SeqCst);
                if fold >= plan.k {
                    break;
                }
                let outcome = run_fold(&trainer, &plan, fold, &train, &test_bags);
                if let Ok(o) = &outcome {
                    info!("fold {fold}: accuracy {:.4}", o.evaluation.metrics.accuracy);
                }
                slots.lock().expect("no worker panicked")[fold] = Some(outcome);
            });
        }
    });
    let folds = slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|o| o.expect("every fold ran").map_err(Error::from))
        .collect::<Result<Vec<_>>>()?;

    let prov = provenance("crossval", &r);
    let metrics: Vec<&FoldMetrics> = folds.iter().map(|f| &f.evaluation.metrics).collect();
    if plan.k == 1 {
        warn!("one fold: confidence intervals are degenerate");
    }
    let summary = summarize(&metrics)?;
    let mut fold_reports = Vec::with_capacity(folds.len());
    for f in &folds {
        let name = format!("fold_{}.milc", f.fold);
        save_checkpoint(
            &f.model.best_params,
            &g.out_dir.join(&name),
            checkpoint_info(&prov, &f.model, Some(f.fold)),
        )?;
        write_file(
            &g.out_dir.join(format!("fold_{}_log.csv", f.fold)),
            training_log_csv(&f.model.history, &c.train).as_bytes(),
        )?;
        fold_reports.push(FoldReport {
            fold: f.fold,
            train_slides: &f.train_slides,
            val_slides: &f.val_slides,
            best_epoch: f.model.best_epoch,
            best_val_loss: f.model.best_val_loss,
            checkpoint: name,
            metrics: &f.evaluation.metrics,
        });
    }
    let test_ids: Vec<String> = test.iter().map(|s| s.slide_id().to_string()).collect();
    let report = CrossvalReport {
        provenance: &prov,
        plan: &plan,
        test_slides: &test_ids,
        test_bags: test_bags.len(),
        folds: fold_reports,
        summary: &summary,
    };
    write_json(&report, &g.out_dir.join("report.json"))?;
    write_file(&g.out_dir.join("metrics.csv"), fold_metrics_csv(&metrics).as_bytes())?;
    write_file(&g.out_dir.join("table.csv"), summary_table_csv(&summary).as_bytes())?;
    let evals: Vec<_> = folds.iter().map(|f| &f.evaluation).collect();
    write_file(
        &g.out_dir.join("roc.csv"),
        roc_points_csv(&evals, HER2_CLASSES).as_bytes(),
    )?;
    match &summary.auc {
        Some(auc) => info!(
            "macro AUC {:.4} ± {:.4}, accuracy {:.4} ± {:.4}",
            auc.mean, auc.half_width, summary.accuracy.mean, summary.accuracy.half_width
        ),
        None => info!(
            "accuracy {:.4} ± {:.4}",
            summary.accuracy.mean, summary.accuracy.half_width
        ),
    }
    Ok(())
}

fn cmd_score(
    g: &GlobalArgs,
    checkpoint: &Path,
    source: &SlideSource,
    slide_id: &str,
    heatmap: Option<bool>,
) -> Result<()> {
    let r = settings(g)?;
    let c = &r.config;
    let (store, slide) = match (&source.store, &source.image) {
        (Some(p), _) => (read_store(p, slide_id)?, None),
        (None, Some(p)) => {
            let slide = load_slide_png(p, c.microns_per_pixel)?;
            let store =
                embed_slide(&slide, slide_id, &c.mask).map_err(|e| e.core().cloned().map_or(e, |x| Error::at(p, x)))?;
            (store, Some(slide))
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    let params = load_checkpoint_for(checkpoint, store.dim())?;
    let seed = c.train.seed;
    let bag_size = c.train.bag_size;
    let (score, map) = score_and_heatmap(&params, &store, c.n_samples, bag_size, seed)?;
    write_json(&score_json(&score), &g.out_dir.join(format!("score_{slide_id}.json")))?;
    info!("{slide_id}: predicted {} probs {:?}", score.predicted, score.probs);
    if let Some(normalize) = heatmap {
        let scale = if normalize { bag_size as f64 } else { 1.0 };
        let cells = map.cells();
        write_file(
            &g.out_dir.join(format!("heatmap_{slide_id}.csv")),
            heatmap_csv(&cells, scale).as_bytes(),
        )?;
        if let Some(slide) = &slide {
            save_overlay(
                slide,
                &cells,
                c.mask.patch_size,
                scale,
                &g.out_dir.join(format!("overlay_{slide_id}.png")),
            )?;
        }
        info!("{} heatmap cells", cells.len());
    }
    Ok(())
}

fn cmd_gradcheck(g: &GlobalArgs) -> Result<()> {
    let seed = g.seed.unwrap_or(0);
    let cases = gradient_check_suite(seed)?;
    let worst = cases.iter().map(|c| c.max_rel_err).fold(0.0, f64::max);
    println!(
        "gradcheck seed {seed}: {} configurations, h = {GRADCHECK_STEP:e}, max relative error {worst:e}",
        cases.len()
    );
    if worst <= GRADCHECK_TOLERANCE {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "max relative error {worst:e} exceeds {GRADCHECK_TOLERANCE:e}"
        )))
    }
}

fn cmd_synth(g: &GlobalArgs, slides_per_class: usize, test_per_class: usize) -> Result<()> {
    let cfg = SynthConfig {
        slides_per_class,
        test_per_class,
        seed: g.seed.unwrap_or(0),
        ..SynthConfig::default()
    };
    let slides = generate(&cfg)?;
    let manifest = write_dataset(&slides, &g.out_dir)?;
    let desk = json!({
        "manifest": "manifest.json",
        "mask": {"patch_size": cfg.patch_size},
        "train": synth_train_config(),
    });
    write_json(&desk, &g.out_dir.join("desk.json"))?;
    info!("{} slides -> {}", slides.len(), manifest.display());
    Ok(())
}
