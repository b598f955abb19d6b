use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn milattn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_milattn"))
        .args(args)
        .env("MILATTN_LOG", "quiet")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let o = milattn(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
    assert_eq!(milattn(&[]).status.code(), Some(2));
    assert_eq!(milattn(&["score", "--slide-id", "a"]).status.code(), Some(2));
}

#[test]
fn bad_log_level_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_milattn"))
        .args(["gradcheck"])
        .env("MILATTN_LOG", "loud")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("MILATTN_LOG"));
}

#[test]
fn gradcheck_reports_error() {
    let o = milattn(&["gradcheck", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("max relative error"), "{out}");
}

#[test]
fn runtime_errors_name_the_culprit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"train": {"epochs": 1, "learning_rat": 0.1}}"#).unwrap();
    let o = milattn(&["train", "--config", p(&cfg), "--out-dir", p(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("learning_rat"), "{}", stderr(&o));

    let o = milattn(&["mask", "--image", "/no/such/slide.png", "--out-dir", p(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/no/such/slide.png"));

    let o = milattn(&["train", "--set", "train.epochs=1", "--out-dir", p(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("manifest"));
}

#[test]
fn import_then_score() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("e.csv");
    let mut body = String::from("x,y,f0,f1,f2\n");
    for i in 0..6 {
        body.push_str(&format!("{},0,{},0.5,-1\n", i * 16, i));
    }
    fs::write(&csv, body).unwrap();
    let o = milattn(&[
        "import",
        "--csv",
        p(&csv),
        "--slide-id",
        "e",
        "--out-dir",
        p(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::metadata(dir.path().join("e.mile")).unwrap().len(),
        24 + 6 * (8 + 3 * 4)
    );

    let params =
        milattn_core::milhead::init_params(4, 3, 4, &mut milattn_core::numerics::RngStream::new(0, 0)).unwrap();
    let ckpt = dir.path().join("m.milc");
    milattn::checkpoint_io::save_checkpoint(&params, &ckpt, serde_json::Value::Null).unwrap();
    let store = dir.path().join("e.mile");
    let args = [
        "score",
        "--checkpoint",
        p(&ckpt),
        "--store",
        p(&store),
        "--slide-id",
        "e",
        "--set",
        "n_samples=50",
        "--set",
        "train.bag_size=4",
        "--out-dir",
        p(dir.path()),
    ];
    let o = milattn(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let score: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("score_e.json")).unwrap()).unwrap();
    assert_eq!(score["n_samples"], 50);
    assert_eq!(score["probs"].as_array().unwrap().len(), 4);
    let total: f64 = score["probs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-9);

    let bad = dir.path().join("bad.milc");
    let wide = milattn_core::milhead::init_params(4, 64, 4, &mut milattn_core::numerics::RngStream::new(0, 0)).unwrap();
    milattn::checkpoint_io::save_checkpoint(&wide, &bad, serde_json::Value::Null).unwrap();
    let o = milattn(&[
        "score",
        "--checkpoint",
        p(&bad),
        "--store",
        p(&store),
        "--slide-id",
        "e",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.milc"), "{}", stderr(&o));
}

#[test]
fn synthetic_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let o = milattn(&[
        "synth",
        "--slides-per-class",
        "3",
        "--test-per-class",
        "1",
        "--out-dir",
        p(&data),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let cfg = data.join("desk.json");
    let image = data.join("slides").join("c2_s00.png");

    let masks = dir.path().join("mask");
    assert!(milattn(&[
        "mask",
        "--config",
        p(&cfg),
        "--image",
        p(&image),
        "--out-dir",
        p(&masks)
    ])
    .status
    .success());
    let rows = fs::read_to_string(masks.join("mask.csv")).unwrap().lines().count();
    assert_eq!(rows, 101);
    assert!(masks.join("mask.png").exists());

    let patches = dir.path().join("patches");
    let o = milattn(&[
        "patches",
        "--config",
        p(&cfg),
        "--image",
        p(&image),
        "--augmented-copies",
        "1",
        "--out-dir",
        p(&patches),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_dir(patches.join("patches")).unwrap().count(), 200);

    let stores = dir.path().join("stores");
    let o = milattn(&["embed", "--config", p(&cfg), "--out-dir", p(&stores)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(stores.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.as_array().unwrap().len(), 12);
    assert!(manifest[0]["store_path"].is_string() && manifest[0].get("image_path").is_none());

    let train = dir.path().join("train");
    let o = milattn(&[
        "train",
        "--config",
        p(&cfg),
        "--set",
        "train.epochs=3",
        "--seed",
        "4",
        "--out-dir",
        p(&train),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let log = fs::read_to_string(train.join("training_log.csv")).unwrap();
    assert_eq!(log.lines().count(), 4);
    assert!(log.lines().nth(1).unwrap().ends_with(",0.001,0.00001,4"), "{log}");
    let side: serde_json::Value = serde_json::from_slice(&fs::read(train.join("model.json")).unwrap()).unwrap();
    assert_eq!(side["embed_dim"], 64);
    let overrides = &side["info"]["provenance"]["overrides"];
    assert_eq!(overrides[0]["key"], "train.epochs");
    assert_eq!(overrides[1]["key"], "train.seed");

    let grid = dir.path().join("grid");
    let o = milattn(&[
        "gridsearch",
        "--config",
        p(&cfg),
        "--set",
        "train.epochs=2",
        "--set",
        "lr_grid=[0.01,0.001]",
        "--set",
        "wd_grid=[0.0001]",
        "--set",
        "folds=3",
        "--out-dir",
        p(&grid),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(grid.join("grid.csv")).unwrap().lines().count(), 3);

    let cv = dir.path().join("cv");
    let o = milattn(&[
        "crossval",
        "--config",
        p(&cfg),
        "--set",
        "train.epochs=2",
        "--set",
        "folds=3",
        "--set",
        "train.test_bags=64",
        "--out-dir",
        p(&cv),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ckpts = fs::read_dir(&cv)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension() == Some("milc".as_ref()))
        .count();
    assert_eq!(ckpts, 3);
    let table = fs::read_to_string(cv.join("table.csv")).unwrap();
    assert!(table.starts_with("metric,mean,ci95_half_width,folds\nprecision,"));
    let roc = fs::read_to_string(cv.join("roc.csv")).unwrap();
    assert!(roc.starts_with("fold,class,threshold,fpr,tpr\n0,0,inf,0,0\n"));

    let hm = dir.path().join("hm");
    let o = milattn(&[
        "heatmap",
        "--config",
        p(&cfg),
        "--checkpoint",
        p(&cv.join("fold_0.milc")),
        "--image",
        p(&image),
        "--slide-id",
        "c2_s00",
        "--set",
        "n_samples=20",
        "--out-dir",
        p(&hm),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(hm.join("heatmap_c2_s00.csv")).unwrap();
    assert!(csv.starts_with("x,y,count,mean_p\n"));
    assert!(hm.join("overlay_c2_s00.png").exists());
    let normalized = dir.path().join("hm_norm");
    let o = milattn(&[
        "heatmap",
        "--config",
        p(&cfg),
        "--checkpoint",
        p(&cv.join("fold_0.milc")),
        "--image",
        p(&image),
        "--slide-id",
        "c2_s00",
        "--set",
        "n_samples=20",
        "--normalize",
        "--out-dir",
        p(&normalized),
    ]);
    assert!(o.status.success());
    let first = |s: &str| -> f64 { s.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap() };
    let scaled = first(&fs::read_to_string(normalized.join("heatmap_c2_s00.csv")).unwrap());
    assert!((scaled - 20.0 * first(&csv)).abs() < 1e-12);
}
