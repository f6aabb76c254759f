use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use thermostat::explainers::ExplainerConfig;
use thermostat::hub::{self, DatasetConfig, ExplanationDataset, Instance, DATA_FILE};
use thermostat::model::TokenSequence;

struct Env {
    tmp: tempfile::TempDir,
}

impl Env {
    fn new() -> Self {
        Self {
            tmp: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.tmp.path().join(name)
    }

    fn root(&self) -> PathBuf {
        self.path("root")
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_thermostat"))
            .env("THERMO_ROOT", self.root())
            .args(args)
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }

    /// Toy corpus of 30 texts plus a trained model.
    fn with_model(&self, activation: &str) -> (String, String) {
        let corpus = self.path("corpus.jsonl").display().to_string();
        let model = self.path(&format!("model-{activation}.json")).display().to_string();
        if !Path::new(&corpus).exists() {
            self.ok(&["toy-corpus", "--out", &corpus, "--size", "30"]);
        }
        self.ok(&["train", "--corpus", &corpus, "--out", &model, "--activation", activation, "--epochs", "50"]);
        (corpus, model)
    }

    fn generate(&self, corpus: &str, model: &str, id: &str, extra: &[&str]) -> String {
        let mut args = vec!["generate", "--corpus", corpus, "--model", model, "--id", id];
        args.extend_from_slice(extra);
        self.ok(&args)
    }
}

fn code(out: &Output) -> Option<i32> {
    out.status.code()
}

#[test]
fn generate_then_validate() {
    let env = Env::new();
    let (corpus, model) = env.with_model("tanh");
    let out = env.generate(&corpus, &model, "toy-ref-lgxa", &[]);
    assert!(out.starts_with("generated 30 instances for toy-ref-lgxa@1.0"), "{out}");
    assert!(env.root().join("toy-ref-lgxa/1.0").join(DATA_FILE).is_file());
    assert_eq!(env.ok(&["validate", "--id", "toy-ref-lgxa"]), "ok: 30 instances\n");
}

#[test]
fn unknown_explainer_is_a_usage_error() {
    let env = Env::new();
    let (corpus, model) = env.with_model("tanh");
    let out = env.run(&["generate", "--corpus", &corpus, "--model", &model, "--explainer", "shap", "--id", "toy-ref-lig"]);
    assert_eq!(code(&out), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("possible values: lgxa, lig, lime, occ, svs"));
    let out = env.run(&["generate", "--corpus", &corpus, "--model", &model, "--id", "toy-ref-shap"]);
    assert_eq!(code(&out), Some(1));
}

#[test]
fn generation_is_reproducible() {
    let env = Env::new();
    let (corpus, model) = env.with_model("tanh");
    env.generate(&corpus, &model, "toy-ref-lime@a", &[]);
    env.generate(&corpus, &model, "toy-ref-lime@b", &["--workers", "3"]);
    env.generate(&corpus, &model, "toy-ref-lime@c", &["--seed", "5"]);
    let read = |v: &str| fs::read(env.root().join("toy-ref-lime").join(v).join(DATA_FILE)).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
}

#[test]
fn config_sets_hyperparameters() {
    let env = Env::new();
    let (corpus, model) = env.with_model("tanh");
    env.generate(&corpus, &model, "toy-ref-occ", &["--config", r#"{"window": 1}"#]);
    let cfg_file = env.path("lig.json");
    fs::write(&cfg_file, r#"{"name": "lig", "steps": 7}"#).unwrap();
    env.generate(&corpus, &model, "toy-ref-lig", &["--config", cfg_file.to_str().unwrap()]);
    let info = env.ok(&["info", "--id", "toy-ref-lig"]);
    assert!(info.contains("explainer=lig steps=7 seed=42 n=30 classes=2 version=1.0"), "{info}");
    assert!(env.ok(&["info", "--id", "toy-ref-occ"]).contains("window=1"));

    let out = env.run(&["generate", "--corpus", &corpus, "--model", &model, "--id", "toy-ref-lig@2", "--config", r#"{"name": "lime"}"#]);
    assert_eq!(code(&out), Some(1));
    let out = env.run(&["generate", "--corpus", &corpus, "--model", &model, "--id", "toy-ref-lig@2", "--config", r#"{"steps": 0}"#]);
    assert_eq!(code(&out), Some(1));
}

#[test]
fn info_shows_lime_masking_probability() {
    let env = Env::new();
    let (corpus, model) = env.with_model("tanh");
    env.generate(&corpus, &model, "toy-ref-lime", &[]);
    let info = env.ok(&["info", "--id", "toy-ref-lime"]);
    assert_eq!(info.lines().count(), 1);
    assert!(info.contains("mask_prob=0.3"), "{info}");
}

#[test]
fn render_writes_html_and_checks_idx() {
    let env = Env::new();
    let (corpus, model) = env.with_model("tanh");
    env.generate(&corpus, &model, "toy-ref-lig", &["--labels", "negative,positive"]);
    let out = env.path("h.html");
    env.ok(&["render", "--id", "toy-ref-lig", "--idx", "0", "--out", out.to_str().unwrap()]);
    let html = fs::read_to_string(&out).unwrap();
    assert!(html.starts_with("<!DOCTYPE html>") && html.ends_with("</html>\n"));
    assert!(html.contains("toy-ref-lig #0 | true: "));

    let bad = env.run(&["render", "--id", "toy-ref-lig", "--idx", "-1", "--out", "x.html"]);
    assert_eq!(code(&bad), Some(1));
    let bad = env.run(&["render", "--id", "toy-ref-lig", "--idx", "30", "--out", "x.html"]);
    assert_eq!(code(&bad), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("out of range"));
}

#[test]
fn correlate_output_and_errors() {
    let env = Env::new();
    let (corpus, model) = env.with_model("tanh");
    env.generate(&corpus, &model, "toy-ref-lig", &[]);
    let line = env.ok(&["correlate", "--id-a", "toy-ref-lig", "--id-b", "toy-ref-lig"]);
    assert!(line.starts_with("tau=1 p="), "{line}");
    assert_eq!(line.lines().count(), 1);

    let short = env.path("short.jsonl");
    let text = fs::read_to_string(&corpus).unwrap();
    fs::write(&short, text.lines().take(10).collect::<Vec<_>>().join("\n")).unwrap();
    env.generate(short.to_str().unwrap(), &model, "short-ref-lig", &[]);
    let out = env.run(&["correlate", "--id-a", "toy-ref-lig", "--id-b", "short-ref-lig"]);
    assert_eq!(code(&out), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not aligned"));
}

#[test]
fn linear_model_gradient_explainers_agree() {
    let env = Env::new();
    let (corpus, model) = env.with_model("identity");
    env.generate(&corpus, &model, "toy-lin-lig", &[]);
    env.generate(&corpus, &model, "toy-lin-lgxa", &[]);
    let line = env.ok(&["correlate", "--id-a", "toy-lin-lig", "--id-b", "toy-lin-lgxa", "--drop-pad"]);
    assert!(line.starts_with("tau=1 "), "{line}");
}

fn hand_built(coordinate: &str, logits: &[[f64; 2]]) -> ExplanationDataset {
    let config = DatasetConfig {
        coordinate: coordinate.parse().unwrap(),
        explainer: ExplainerConfig::lgxa(),
        model_file: "missing.json".into(),
        num_classes: 2,
        label_names: Vec::new(),
        created: "2026-01-01T00:00:00Z".into(),
        tool_version: "0".into(),
    };
    let instances = logits
        .iter()
        .enumerate()
        .map(|(idx, l)| Instance {
            idx,
            input_ids: TokenSequence::new(vec![2, 4 + idx as u32, 3]).unwrap(),
            attributions: vec![0.0, 0.5, 0.1],
            true_label: 0,
            logits: l.to_vec(),
        })
        .collect();
    ExplanationDataset::new(config, instances)
}

#[test]
fn compare_lists_constructed_flip() {
    let env = Env::new();
    let a = hand_built("hand-a-lgxa", &[[1.0, 0.0], [0.0, 1.0], [2.0, 1.0], [0.0, 0.5]]);
    let b = hand_built("hand-b-lgxa", &[[1.0, 0.0], [0.0, 1.0], [1.0, 2.0], [0.0, 0.5]]);
    hub::save(&a, &env.root()).unwrap();
    hub::save(&b, &env.root()).unwrap();
    assert_eq!(
        env.ok(&["compare", "--id-a", "hand-a-lgxa", "--id-b", "hand-a-lgxa"]),
        "0 disagreements\nidx: \n"
    );
    assert_eq!(
        env.ok(&["compare", "--id-a", "hand-a-lgxa", "--id-b", "hand-b-lgxa"]),
        "1 disagreements\nidx: 2\n"
    );
    // rendering needs the vocabulary, which these datasets do not have
    let dir = env.path("pairs");
    let out = env.run(&["compare", "--id-a", "hand-a-lgxa", "--id-b", "hand-b-lgxa", "--render-dir", dir.to_str().unwrap()]);
    assert_eq!(code(&out), Some(1));
}

#[test]
fn compare_renders_two_files_per_pair() {
    let env = Env::new();
    let corpus = env.path("corpus.jsonl").display().to_string();
    env.ok(&["toy-corpus", "--out", &corpus, "--size", "200"]);
    for seed in ["1", "2"] {
        let model = env.path(&format!("m{seed}.json")).display().to_string();
        env.ok(&["--seed", seed, "train", "--corpus", &corpus, "--out", &model]);
        env.generate(&corpus, &model, &format!("toy-m{seed}-lgxa"), &[]);
    }
    let dir = env.path("pairs");
    let out = env.ok(&["compare", "--id-a", "toy-m1-lgxa", "--id-b", "toy-m2-lgxa", "--render-dir", dir.to_str().unwrap()]);
    let count: usize = out.split_whitespace().next().unwrap().parse().unwrap();
    assert!(count > 0, "{out}");
    assert_eq!(fs::read_dir(&dir).unwrap().count(), 2 * count);
}

#[test]
fn validate_reports_corrupt_line() {
    let env = Env::new();
    let ds = hand_built("hand-a-lgxa", &[[1.0, 0.0], [0.0, 1.0], [2.0, 1.0]]);
    let dir = hub::save(&ds, &env.root()).unwrap();
    let data = dir.join(DATA_FILE);
    let text = fs::read_to_string(&data).unwrap();
    fs::write(&data, text.replacen("\"logits\":[0.0,1.0]", "\"logits\":[0.0]", 1)).unwrap();
    let out = env.run(&["validate", "--id", "hand-a-lgxa"]);
    assert_eq!(code(&out), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("line 2 (idx 1)"));

    let lines: Vec<&str> = text.lines().collect();
    fs::write(&data, format!("{}\n{{\"idx\":1,\n", lines[0])).unwrap();
    let out = env.run(&["validate", "--id", "hand-a-lgxa"]);
    assert_eq!(code(&out), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("data.jsonl:2"));
}

#[test]
fn missing_dataset_and_bad_coordinate() {
    let env = Env::new();
    let out = env.run(&["info", "--id", "none-ref-lig"]);
    assert_eq!(code(&out), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not found"));
    let out = env.run(&["info", "--id", "Not A Coordinate"]);
    assert_eq!(code(&out), Some(1));
}

#[test]
fn numerical_breakdown_is_an_internal_error() {
    let env = Env::new();
    let (corpus, model) = env.with_model("tanh");
    let out = env.run(&[
        "generate", "--corpus", &corpus, "--model", &model, "--id", "toy-ref-lime",
        "--config", r#"{"samples": 1, "ridge_lambda": 0}"#,
    ]);
    assert_eq!(code(&out), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("singular"));
}

#[test]
fn help_and_version_succeed() {
    let env = Env::new();
    assert!(env.ok(&["--help"]).contains("correlate"));
    assert!(env.ok(&["--version"]).starts_with("thermostat "));
    assert_eq!(code(&env.run(&[])), Some(1));
}
