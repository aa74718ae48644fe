use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sublinear::bench::{dataset_pairs, generated_pairs, run_bench, BenchSpec};
use sublinear::dataset::{Dataset, GraphLine};
use sublinear::error::{Error, Result};
use sublinear::evaluate::evaluate;
use sublinear::gxl::{parse_gxl, read_iam_dir, GxlAttrConfig};
use sublinear::persist::{read_json, write_json, Classifier, ModelFile};
use sublinear::protocol::{run_protocol, Algorithm, ProtocolConfig};
use sublinear::synthetic::{generate_synthetic, SyntheticSpec};
use sublinear_core::{
    sdp, train_binary, train_one_vs_all, AttributedGraph, LabeledExample, MatchMethod,
    MatcherConfig, TrainConfig,
};

/// Sublinear classifiers on attributed graphs.
#[derive(Parser)]
#[command(name = "sublinear", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Graph matcher used for every dot product.
    #[arg(long, global = true, value_enum)]
    matcher: Option<Matcher>,
    /// Largest order the exact matcher accepts.
    #[arg(long, global = true)]
    exact_max_order: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON configuration for the chosen command.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of the text summary.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Matcher {
    Exact,
    Graduated,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Dataset directory (JSON Lines or IAM .cxl/.gxl) or a single .jsonl file.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    format: Format,
    /// GXL attribute preset for IAM data.
    #[arg(long, default_value = "letter")]
    gxl_preset: String,
    /// GXL attribute mapping as JSON; overrides the preset.
    #[arg(long)]
    gxl_config: Option<PathBuf>,
    /// Standardize node attributes with train-split statistics.
    #[arg(long)]
    standardize: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Auto,
    Jsonl,
    Iam,
}

#[derive(Subcommand)]
enum Command {
    /// Sublinear dot product of two graphs (.json or .gxl).
    Dot {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "letter")]
        gxl_preset: String,
    },
    /// Train a binary or one-against-all model.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "train")]
        split: String,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        margin: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Accuracy and confusion matrix of a saved model.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "test")]
        split: String,
    },
    /// Generate a synthetic dataset with a planted model.
    Synth,
    /// Time exact against graduated matching and report value gaps.
    Bench {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// Grid search on validation, then repeated test runs.
    Protocol {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum)]
        algorithm: Option<AlgorithmArg>,
        #[arg(long)]
        repeats: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Perceptron,
    MarginPerceptron,
    Knn,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Perceptron => Algorithm::Perceptron,
            AlgorithmArg::MarginPerceptron => Algorithm::MarginPerceptron,
            AlgorithmArg::Knn => Algorithm::Knn,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

impl Global {
    fn load_config<T: DeserializeOwned + Default>(&self) -> Result<T> {
        match &self.config {
            Some(p) => read_json(p),
            None => Ok(T::default()),
        }
    }

    fn apply_matcher(&self, mut m: MatcherConfig) -> Result<MatcherConfig> {
        if let Some(kind) = self.matcher {
            m.method = match kind {
                Matcher::Exact => MatchMethod::Exact,
                Matcher::Graduated => MatchMethod::Graduated,
            };
        }
        if let Some(n) = self.exact_max_order {
            m.exact_max_order = n;
        }
        m.validate()?;
        Ok(m)
    }

    fn out_dir(&self) -> Result<Option<&Path>> {
        if let Some(d) = &self.out {
            fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
        }
        Ok(self.out.as_deref())
    }

    fn emit<T: Serialize>(&self, report: &T, text: String, file: &str) -> Result<()> {
        if self.json {
            println!("{}", serde_json::to_string_pretty(report)?);
        } else {
            print!("{text}");
        }
        if let Some(dir) = self.out_dir()? {
            write_json(report, &dir.join(format!("{file}.json")))?;
            let p = dir.join(format!("{file}.txt"));
            fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Dot { a, b, gxl_preset } => cmd_dot(g, a, b, gxl_preset),
        Command::Train {
            data,
            split,
            eta,
            margin,
            epochs,
        } => cmd_train(g, data, split, *eta, *margin, *epochs),
        Command::Eval { model, data, split } => cmd_eval(g, model, data, split),
        Command::Synth => cmd_synth(g),
        Command::Bench { data, pairs } => cmd_bench(g, data.as_deref(), *pairs),
        Command::Protocol {
            data,
            algorithm,
            repeats,
        } => cmd_protocol(g, data, *algorithm, *repeats),
    }
}

fn gxl_config(preset: &str, file: Option<&Path>) -> Result<GxlAttrConfig> {
    match file {
        Some(p) => read_json(p),
        None => GxlAttrConfig::preset(preset)
            .ok_or_else(|| Error::Validation(format!("unknown GXL preset `{preset}`"))),
    }
}

fn load_dataset(args: &DataArgs, split: &str) -> Result<Dataset> {
    let path = &args.data;
    if !path.exists() {
        return Err(Error::io(path, std::io::Error::from(std::io::ErrorKind::NotFound)));
    }
    let iam = match args.format {
        Format::Iam => true,
        Format::Jsonl => false,
        Format::Auto => path.is_dir() && SPLITS_CXL.iter().any(|s| path.join(s).exists()),
    };
    let mut ds = if iam {
        read_iam_dir(path, &gxl_config(&args.gxl_preset, args.gxl_config.as_deref())?)?
    } else if path.is_dir() {
        Dataset::read_dir(path)?
    } else {
        Dataset::read_file(path, split)?
    };
    if args.standardize {
        ds.standardize_nodes()?;
    }
    Ok(ds)
}

const SPLITS_CXL: [&str; 3] = ["train.cxl", "validation.cxl", "test.cxl"];

/// Single-graph JSON document: the dataset line format with `id` and
/// `class` optional.
#[derive(Deserialize)]
struct GraphDoc {
    nodes: Vec<Vec<f64>>,
    #[serde(default)]
    edges: Vec<(usize, usize, Vec<f64>)>,
}

fn load_graph(path: &Path, preset: &str) -> Result<AttributedGraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gxl")) {
        return parse_gxl(&text, &gxl_config(preset, None)?);
    }
    let doc: GraphDoc = serde_json::from_str(&text)?;
    let line = GraphLine {
        id: String::new(),
        class: String::new(),
        nodes: doc.nodes,
        edges: doc.edges,
    };
    Ok(line.to_graph()?)
}

#[derive(Serialize)]
struct DotReport {
    value: f64,
    exact: bool,
    matching: Vec<(usize, usize)>,
}

fn cmd_dot(g: &Global, a: &Path, b: &Path, preset: &str) -> Result<()> {
    let matcher = g.apply_matcher(g.load_config::<MatcherConfig>()?)?;
    let x = load_graph(a, preset)?;
    let y = load_graph(b, preset)?;
    let r = sdp(&x, &y, &matcher)?;
    let report = DotReport {
        value: r.value,
        exact: r.exact,
        matching: r.matching.pairs().collect(),
    };
    let pairs: Vec<String> = report.matching.iter().map(|(i, j)| format!("{i}-{j}")).collect();
    let text = format!(
        "value {}\nmatch {}\n{}\n",
        report.value,
        pairs.join(" "),
        if report.exact { "exact" } else { "heuristic" }
    );
    g.emit(&report, text, "dot")
}

#[derive(Serialize)]
struct TrainReport {
    classes: Vec<String>,
    scheme: &'static str,
    examples: usize,
    config: TrainConfig,
    traces: Vec<sublinear_core::TrainTrace>,
}

fn cmd_train(
    g: &Global,
    data: &DataArgs,
    split: &str,
    eta: Option<f64>,
    margin: Option<f64>,
    epochs: Option<usize>,
) -> Result<()> {
    let mut cfg: TrainConfig = g.load_config()?;
    cfg.matcher = g.apply_matcher(cfg.matcher)?;
    cfg.seed = g.seed.unwrap_or(cfg.seed);
    cfg.learning_rate = eta.unwrap_or(cfg.learning_rate);
    cfg.margin = margin.unwrap_or(cfg.margin);
    cfg.max_epochs = epochs.unwrap_or(cfg.max_epochs);
    cfg.validate()?;
    let ds = load_dataset(data, split)?;
    let examples = ds.require_split(split)?.examples();
    if examples.is_empty() {
        return Err(Error::Validation(format!("split `{split}` holds no examples")));
    }
    let (classifier, traces, scheme) = if ds.classes.len() == 2 {
        let binary: Vec<LabeledExample<i8>> = examples
            .iter()
            .map(|e| LabeledExample::new(e.graph.clone(), if e.label == 0 { 1 } else { -1 }))
            .collect();
        let (model, trace) = train_binary(&binary, &cfg)?;
        let c = Classifier::Binary {
            classes: ds.classes.clone(),
            model,
        };
        (c, vec![trace], "binary")
    } else {
        let (model, traces) = train_one_vs_all(&examples, &ds.classes, &cfg)?;
        (Classifier::OneVsAll(model), traces, "one_vs_all")
    };
    let report = TrainReport {
        classes: ds.classes.clone(),
        scheme,
        examples: examples.len(),
        config: cfg.clone(),
        traces,
    };
    let mut text = format!(
        "trained {scheme} model on {} example(s), {} class(es)\n",
        report.examples,
        report.classes.len()
    );
    for (c, t) in report.traces.iter().enumerate() {
        let last = t.epochs.last();
        text += &format!(
            "member {c}: epochs {} updates {} converged {} final errors {} matcher calls {}\n",
            t.final_epoch,
            t.total_updates,
            t.converged,
            last.map_or(0, |e| e.errors),
            t.matcher_calls
        );
    }
    let metadata = serde_json::json!({
        "dataset": ds.name,
        "split": split,
        "examples": report.examples,
        "config": cfg,
        "provenance": ds.provenance,
    });
    g.emit(&report, text, "trace")?;
    let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_json(&classifier.to_file(metadata), &dir.join("model.json"))
}

fn cmd_eval(g: &Global, model: &Path, data: &DataArgs, split: &str) -> Result<()> {
    let file: ModelFile = read_json(model)?;
    let mut classifier = Classifier::from_file(&file)?;
    if g.matcher.is_some() || g.exact_max_order.is_some() {
        let base = match &classifier {
            Classifier::Binary { model, .. } => *model.matcher(),
            Classifier::OneVsAll(m) => *m.members()[0].matcher(),
        };
        classifier = classifier.with_matcher(g.apply_matcher(base)?);
    }
    let ds = load_dataset(data, split)?;
    if ds.classes != classifier.classes() {
        return Err(Error::Validation(format!(
            "dataset classes {:?} differ from model classes {:?}",
            ds.classes,
            classifier.classes()
        )));
    }
    let e = evaluate(&classifier, &ds.require_split(split)?.records)?;
    let text = e.render_text();
    g.emit(&e, text, "eval")
}

fn cmd_synth(g: &Global) -> Result<()> {
    let mut spec: SyntheticSpec = g.load_config()?;
    spec.seed = g.seed.unwrap_or(spec.seed);
    let out = g
        .out
        .clone()
        .ok_or_else(|| Error::Validation("synth needs --out DIR".into()))?;
    let s = generate_synthetic(&spec)?;
    s.dataset.write_dir(&out)?;
    let planted = Classifier::Binary {
        classes: s.dataset.classes.clone(),
        model: s.planted,
    };
    write_json(
        &planted.to_file(serde_json::json!({"planted": true, "achieved_margin": s.achieved_margin})),
        &out.join("planted.json"),
    )?;
    let sizes: Vec<String> = s
        .dataset
        .splits
        .iter()
        .map(|sp| format!("{} {}", sp.name, sp.len()))
        .collect();
    println!(
        "wrote {} ({}); achieved margin {:.4}",
        out.display(),
        sizes.join(", "),
        s.achieved_margin
    );
    Ok(())
}

fn cmd_bench(g: &Global, data: Option<&Path>, pairs: Option<usize>) -> Result<()> {
    let mut spec: BenchSpec = g.load_config()?;
    spec.seed = g.seed.unwrap_or(spec.seed);
    spec.pairs = pairs.unwrap_or(spec.pairs);
    if let Some(n) = g.exact_max_order {
        spec.exact_max_order = n;
    }
    let sample = match data {
        Some(p) => {
            let args = DataArgs {
                data: p.to_path_buf(),
                format: Format::Auto,
                gxl_preset: "letter".into(),
                gxl_config: None,
                standardize: false,
            };
            dataset_pairs(&load_dataset(&args, "train")?, spec.pairs, spec.seed)?
        }
        None => generated_pairs(&spec)?,
    };
    let r = run_bench(&sample, spec.exact_max_order, &spec.ga)?;
    let text = r.render_text();
    g.emit(&r, text, "bench")
}

fn cmd_protocol(
    g: &Global,
    data: &DataArgs,
    algorithm: Option<AlgorithmArg>,
    repeats: Option<usize>,
) -> Result<()> {
    let mut cfg: ProtocolConfig = g.load_config()?;
    cfg.matcher = g.apply_matcher(cfg.matcher)?;
    cfg.seed = g.seed.unwrap_or(cfg.seed);
    if let Some(a) = algorithm {
        cfg.algorithm = a.into();
    }
    cfg.repeats = repeats.unwrap_or(cfg.repeats);
    let ds = load_dataset(data, "train")?;
    let report = run_protocol(&ds, &cfg)?;
    let text = report.render_text();
    g.emit(&report, text, "report")
}
