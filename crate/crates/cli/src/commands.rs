use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use serde_json::{Map, Value};
use thermostat::analysis::{disagreement, explainer_agreement};
use thermostat::corpus::{read_jsonl, toy_sentiment, write_jsonl};
use thermostat::explainers::{select_target, ExplainerConfig};
use thermostat::hub::{self, CoordinateId, ExplanationDataset, GenerateOptions};
use thermostat::model::{Activation, Classifier, ReferenceModel, TokenSequence, TrainConfig, Vocab};
use thermostat::render::{render_html, side_by_side, Heatmap};

use crate::{
    ActivationName, Cli, Command, CompareArgs, CorrelateArgs, GenerateArgs, IdArgs, RenderArgs,
    ToyCorpusArgs, TrainArgs,
};

pub fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Generate(args) => generate(cli, args),
        Command::Render(args) => render(cli, args),
        Command::Correlate(args) => correlate(cli, args),
        Command::Compare(args) => compare(cli, args),
        Command::Validate(args) => validate(cli, args),
        Command::Info(args) => info(cli, args),
        Command::ToyCorpus(args) => toy_corpus(cli, args),
        Command::Train(args) => train(cli, args),
    }?;
    Ok(ExitCode::SUCCESS)
}

/// Builds the explainer config from `--config` (inline JSON or a file), the
/// explainer name and the global seed. A `seed` inside the config wins over
/// `--seed`.
fn explainer_config(raw: Option<&str>, name: &str, seed: u64) -> Result<ExplainerConfig> {
    let mut obj = match raw {
        None => Map::new(),
        Some(raw) => {
            let text = if raw.trim_start().starts_with('{') {
                raw.to_owned()
            } else {
                fs::read_to_string(raw).with_context(|| format!("reading config {raw}"))?
            };
            match serde_json::from_str(&text).context("parsing --config")? {
                Value::Object(obj) => obj,
                _ => bail!("--config must be a JSON object"),
            }
        }
    };
    match obj.get("name") {
        None => {
            obj.insert("name".into(), name.into());
        }
        Some(Value::String(given)) if given == name => {}
        Some(other) => bail!("--config names explainer {other}, but the explainer is {name}"),
    }
    obj.entry("seed").or_insert(seed.into());
    let cfg: ExplainerConfig =
        serde_json::from_value(Value::Object(obj)).context("invalid explainer configuration")?;
    cfg.validate()?;
    Ok(cfg)
}

fn generate(cli: &Cli, args: &GenerateArgs) -> Result<()> {
    let started = Instant::now();
    let id: CoordinateId = args.id.parse()?;
    let name = match args.explainer {
        Some(e) if e.as_str() != id.explainer => bail!(
            "--explainer {} does not match the explainer coordinate of {id}",
            e.as_str()
        ),
        Some(e) => e.as_str(),
        None => id.explainer.as_str(),
    };
    let cfg = explainer_config(args.config.as_deref(), name, cli.seed)?;
    let corpus = read_jsonl(&args.corpus)?;
    // recorded absolute so later commands find the vocabulary from anywhere
    let model_file = fs::canonicalize(&args.model)
        .with_context(|| format!("model file {}", args.model.display()))?;
    let opts = GenerateOptions {
        workers: args.workers.into(),
        label_names: args.labels.clone(),
        created: None,
    };
    if cli.verbose {
        eprintln!("explaining {} texts with {cfg} on {} workers", corpus.len(), args.workers);
    }
    let ds = hub::generate(&corpus, &model_file, &cfg, id, &opts)?;
    let violations = ds.validate();
    ensure!(violations.is_empty(), "generated dataset is invalid: {}", violations[0]);
    let dir = hub::save(&ds, &cli.root)?;
    println!(
        "generated {} instances for {} in {:.2}s -> {}",
        ds.len(),
        ds.coordinate(),
        started.elapsed().as_secs_f64(),
        dir.display()
    );
    Ok(())
}

fn load_vocab(ds: &ExplanationDataset, model: Option<&Path>) -> Result<Vocab> {
    let path = model.unwrap_or(&ds.config.model_file);
    let model = ReferenceModel::load(path).with_context(|| {
        format!("loading the vocabulary of {} (use --model to point elsewhere)", ds.coordinate())
    })?;
    Ok(model.vocab().clone())
}

fn render(cli: &Cli, args: &RenderArgs) -> Result<()> {
    let ds = hub::load(args.id.as_str(), &cli.root)?;
    let Some(inst) = ds.get(args.idx) else {
        bail!("idx {} out of range: {} has {} instances", args.idx, ds.coordinate(), ds.len());
    };
    let vocab = load_vocab(&ds, args.model.as_deref())?;
    let html = render_html(inst, &vocab, &ds.config.label_names, ds.coordinate());
    fs::write(&args.out, html).with_context(|| format!("writing {}", args.out.display()))?;
    if cli.verbose {
        eprintln!("wrote {}", args.out.display());
    }
    Ok(())
}

fn correlate(cli: &Cli, args: &CorrelateArgs) -> Result<()> {
    let a = hub::load(args.id_a.as_str(), &cli.root)?;
    let b = hub::load(args.id_b.as_str(), &cli.root)?;
    let pad = if args.drop_pad {
        Some(load_vocab(&a, None)?.pad_id())
    } else {
        None
    };
    let r = explainer_agreement(&a, &b, pad)?;
    println!("tau={} p={} n={}", r.tau, r.p_value, r.n);
    Ok(())
}

fn compare(cli: &Cli, args: &CompareArgs) -> Result<()> {
    let a = hub::load(args.id_a.as_str(), &cli.root)?;
    let b = hub::load(args.id_b.as_str(), &cli.root)?;
    let pairs = disagreement(&a, &b)?;
    println!("{} disagreements", pairs.len());
    let idxs: Vec<String> = pairs.iter().map(|p| p.idx.to_string()).collect();
    println!("idx: {}", idxs.join(" "));

    let Some(dir) = &args.render_dir else {
        return Ok(());
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let vocab_a = load_vocab(&a, None)?;
    let vocab_b = load_vocab(&b, None)?;
    for pair in &pairs {
        let left = Heatmap::from_instance(&pair.instance_a, &vocab_a, &a.config.label_names, a.coordinate());
        let right = Heatmap::from_instance(&pair.instance_b, &vocab_b, &b.config.label_names, b.coordinate());
        let title = format!("idx {}: {} vs {}", pair.idx, a.coordinate(), b.coordinate());
        let stem: PathBuf = dir.join(format!("idx_{}", pair.idx));
        fs::write(stem.with_extension("html"), side_by_side(&title, &left, &right))?;
        let record = serde_json::json!({
            "idx": pair.idx,
            "a": { "coordinate": a.coordinate().to_string(), "predicted": pair.labels.0, "instance": pair.instance_a },
            "b": { "coordinate": b.coordinate().to_string(), "predicted": pair.labels.1, "instance": pair.instance_b },
        });
        fs::write(stem.with_extension("json"), format!("{record}\n"))?;
    }
    if cli.verbose {
        eprintln!("wrote {} pairs to {}", pairs.len(), dir.display());
    }
    Ok(())
}

fn validate(cli: &Cli, args: &IdArgs) -> Result<()> {
    let ds = hub::load_unvalidated(args.id.as_str(), &cli.root)?;
    let violations = ds.validate();
    for v in &violations {
        println!("{v}");
    }
    ensure!(
        violations.is_empty(),
        "{} has {} violation(s)",
        ds.coordinate(),
        violations.len()
    );
    println!("ok: {} instances", ds.len());
    Ok(())
}

fn info(cli: &Cli, args: &IdArgs) -> Result<()> {
    let ds = hub::load(args.id.as_str(), &cli.root)?;
    let c = &ds.config;
    println!(
        "id={} {} n={} classes={} version={} created={}",
        c.coordinate.canonical(),
        c.explainer,
        ds.len(),
        c.num_classes,
        c.coordinate.version,
        c.created
    );
    Ok(())
}

fn toy_corpus(cli: &Cli, args: &ToyCorpusArgs) -> Result<()> {
    ensure!(args.size > 0, "--size must be positive");
    let corpus = toy_sentiment(args.size, cli.seed);
    write_jsonl(&args.out, &corpus)?;
    println!("wrote {} texts to {}", corpus.len(), args.out.display());
    Ok(())
}

fn train(cli: &Cli, args: &TrainArgs) -> Result<()> {
    let corpus = read_jsonl(&args.corpus)?;
    let classes = corpus.iter().map(|t| t.label).max().unwrap_or(0) + 1;
    let vocab = Vocab::from_corpus(corpus.iter().map(|t| t.text.as_str()));
    let activation = match args.activation {
        ActivationName::Tanh => Activation::Tanh,
        ActivationName::Identity => Activation::Identity,
    };
    let mut model = ReferenceModel::new(vocab, args.dim, args.hidden, classes.max(2), activation, cli.seed)?;
    let data: Vec<(TokenSequence, usize)> = corpus
        .iter()
        .map(|t| (model.tokenize(&t.text), t.label))
        .collect();
    let losses = model.train(
        &data,
        &TrainConfig {
            epochs: args.epochs,
            learning_rate: args.lr,
        },
    )?;
    model.save(&args.out)?;
    let correct = data
        .iter()
        .filter(|(ids, label)| {
            let logits = model.forward(ids.ids()).expect("tokenized by this model");
            select_target(&logits) == *label
        })
        .count();
    println!(
        "trained {} epochs: loss={:.4} accuracy={:.3} -> {}",
        args.epochs,
        losses.last().copied().unwrap_or(f64::NAN),
        correct as f64 / data.len() as f64,
        args.out.display()
    );
    Ok(())
}
