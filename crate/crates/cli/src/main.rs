mod args;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde::Serialize;
use serde_json::json;
use snals::hypergraph::{canonical_set, extract_local, extract_local_masked, DatasetFormat, DegreeStats, Hypergraph, LocalEnvironment};
use snals::model::ModelInput;
use snals::pipeline::{
    ablate, config_hash, evaluate, prepare_inputs, run_cv, CheckpointMeta, CvOptions, Experiment, PipelineError,
    ResultsSink, TrainConfig,
};
use snals::spectrum::spectrum_feature;
use snals::SnalsModel;

use args::{Cli, Command, ConfigArgs, DataArgs};

/// Failure classes, each with its own exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<snals::Error> for Failure {
    fn from(e: snals::Error) -> Self {
        use snals::model::ModelError;
        match &e {
            _ if e.is_numeric() => Failure::Numeric(e.to_string()),
            snals::Error::Pipeline(PipelineError::Config(_)) | snals::Error::Model(ModelError::Config(_)) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<snals::hypergraph::HypergraphError> for Failure {
    fn from(e: snals::hypergraph::HypergraphError) -> Self {
        Failure::Data(e.to_string())
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Data(format!("{}: {e}", path.display()))
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Stats { data, human } => stats(&data, human),
        Command::Train { data, config, out, checkpoint, human } => {
            train(&data, &config, out.as_deref(), checkpoint.as_deref(), human)
        }
        Command::Evaluate { data, checkpoint, fold, human } => evaluate_cmd(&data, &checkpoint, fold, human),
        Command::Predict { data, checkpoint, candidates, out, human } => {
            predict(&data, &checkpoint, &candidates, out.as_deref(), human)
        }
        Command::Explain { data, set, q, human } => explain(&data, &set, q, human),
        Command::Ablate { data, config, axis, seeds, out, checkpoint, human } => {
            let train_config = load_config(&config)?;
            let seeds = if seeds.is_empty() { vec![train_config.seed] } else { seeds };
            let options = CvOptions { dataset: data.name(), checkpoint_dir: checkpoint };
            let hg = load(&data)?;
            let rows = ablate(&hg, &train_config, axis, &seeds, &options)?;
            if let Some(path) = &out {
                let sink = ResultsSink::create(path).map_err(|e| io_failure(path, e))?;
                for record in rows.iter().flat_map(|r| &r.records) {
                    sink.append(record)?;
                }
            }
            if human {
                let mut s = format!("{:<16} {:>16} {:>16}\n", "setting", "F1", "AUC");
                for r in &rows {
                    let _ = writeln!(
                        s,
                        "{:<16} {:>16} {:>16}",
                        r.setting,
                        format!("{:.3} ({:.3})", r.f1_mean, r.f1_std),
                        format!("{:.3} ({:.3})", r.auc_mean, r.auc_std)
                    );
                }
                print!("{s}");
            } else {
                let summary: Vec<_> = rows
                    .iter()
                    .map(|r| {
                        json!({"axis": r.axis, "setting": r.setting, "seeds": r.seeds, "f1_mean": r.f1_mean,
                               "f1_std": r.f1_std, "auc_mean": r.auc_mean, "auc_std": r.auc_std,
                               "records": r.records.len()})
                    })
                    .collect();
                emit(&summary)?;
            }
            Ok(())
        }
    }
}

fn emit<T: Serialize>(value: &T) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Data(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn load(data: &DataArgs) -> Result<Hypergraph, Failure> {
    Ok(DatasetFormat::from(data.format).load(&data.data)?)
}

fn load_config(args: &ConfigArgs) -> Result<TrainConfig, Failure> {
    let base = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => TrainConfig::default(),
    };
    let config = args.apply(base);
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(config)
}

fn stats(data: &DataArgs, human: bool) -> Outcome {
    let hg = load(data)?;
    let s = DegreeStats::of(&hg);
    if human {
        println!("edges        {}", s.edges);
        println!("nodes        {}", s.nodes);
        println!("edge degree  {:.3}({:.3})", s.edge_degree_mean, s.edge_degree_std);
        println!("node degree  {:.3}({:.3})", s.node_degree_mean, s.node_degree_std);
        Ok(())
    } else {
        emit(&s)
    }
}

fn train(data: &DataArgs, args: &ConfigArgs, out: Option<&Path>, checkpoint: Option<&Path>, human: bool) -> Outcome {
    let config = load_config(args)?;
    let hg = load(data)?;
    let options = CvOptions { dataset: data.name(), checkpoint_dir: checkpoint.map(Path::to_path_buf) };
    let start = Instant::now();
    let report = run_cv(&hg, &config, &options)?;
    let wall = start.elapsed().as_secs_f64();
    if let Some(path) = out {
        let sink = ResultsSink::create(path).map_err(|e| io_failure(path, e))?;
        for record in &report.records {
            sink.append(record)?;
        }
        // Run metadata lives beside the records so the records themselves
        // stay reproducible byte for byte.
        let meta = json!({
            "dataset": report.dataset,
            "seed": config.seed,
            "config_hash": config_hash(&config),
            "wall_time_secs": wall,
            "folds": report.records.len(),
            "f1_mean": report.f1_mean,
            "auc_mean": report.auc_mean,
        });
        let meta_path = path.with_extension("run.json");
        fs::write(&meta_path, meta.to_string()).map_err(|e| io_failure(&meta_path, e))?;
    }
    if human {
        println!("{:<6} {:>8} {:>8} {:>7}", "fold", "F1", "AUC", "epochs");
        for r in &report.records {
            println!("{:<6} {:>8.3} {:>8.3} {:>7}", r.fold, r.f1, r.auc, r.epochs_run);
        }
        println!("mean   {:.3}({:.3}) {:.3}({:.3})", report.f1_mean, report.f1_std, report.auc_mean, report.auc_std);
        println!("{} positives, {} negatives, {wall:.1}s", report.positives, report.negatives);
        Ok(())
    } else {
        emit(&json!({
            "dataset": report.dataset,
            "positives": report.positives,
            "negatives": report.negatives,
            "f1_mean": report.f1_mean,
            "f1_std": report.f1_std,
            "auc_mean": report.auc_mean,
            "auc_std": report.auc_std,
            "folds": report.records,
        }))
    }
}

fn load_checkpoint(path: &Path) -> Result<(SnalsModel, CheckpointMeta), Failure> {
    let meta_path = CheckpointMeta::sidecar_path(path);
    let meta_text = fs::read_to_string(&meta_path).map_err(|e| io_failure(&meta_path, e))?;
    let meta: CheckpointMeta =
        serde_json::from_str(&meta_text).map_err(|e| Failure::Data(format!("{}: {e}", meta_path.display())))?;
    let weights = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let model = SnalsModel::from_checkpoint_json(meta.model.clone(), &weights).map_err(snals::Error::from)?;
    Ok((model, meta))
}

fn evaluate_cmd(data: &DataArgs, checkpoint: &Path, fold: Option<usize>, human: bool) -> Outcome {
    let (model, meta) = load_checkpoint(checkpoint)?;
    let fold = fold.unwrap_or(meta.fold);
    if fold >= meta.train.folds {
        return Err(Failure::Usage(format!("fold {fold} out of range for {} folds", meta.train.folds)));
    }
    let hg = load(data)?;
    let exp = Experiment::build(&hg, &meta.train)?;
    let inputs = prepare_inputs(&hg, &exp.samples, &meta.train)?;
    let (_, test) = exp.split(fold);
    let m = evaluate(&model, &inputs, &exp.labels(), &test, meta.train.threshold)?;
    if human {
        println!("fold {fold}: F1 {:.4}, AUC {:.4} (logged for fold {}: F1 {:.4}, AUC {:.4})", m.f1, m.auc, meta.fold, meta.f1, meta.auc);
        Ok(())
    } else {
        emit(&json!({
            "dataset": meta.dataset,
            "fold": fold,
            "f1": m.f1,
            "auc": m.auc,
            "trained_fold": meta.fold,
            "logged_f1": meta.f1,
            "logged_auc": meta.auc,
        }))
    }
}

/// Parses "1,2 3" style node lists.
fn parse_set(text: &str) -> Result<Vec<usize>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| format!("expected a node id, found {t:?}")))
        .collect()
}

/// Rejects malformed sets as usage errors and unknown ids as data errors.
fn checked_candidate(hg: &Hypergraph, text: &str) -> Result<Vec<usize>, Failure> {
    let nodes = parse_set(text).map_err(Failure::Usage)?;
    if nodes.len() < 2 {
        return Err(Failure::Usage(format!("a candidate needs at least two nodes, got {}", nodes.len())));
    }
    if canonical_set(nodes.clone()).len() != nodes.len() {
        return Err(Failure::Usage("candidate repeats a node id".into()));
    }
    for &v in &nodes {
        hg.check_node(v)?;
    }
    Ok(nodes)
}

fn predict(data: &DataArgs, checkpoint: &Path, candidates: &Path, out: Option<&Path>, human: bool) -> Outcome {
    let (model, meta) = load_checkpoint(checkpoint)?;
    let hg = load(data)?;
    let text = fs::read_to_string(candidates).map_err(|e| io_failure(candidates, e))?;
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let nodes = checked_candidate(&hg, body)
            .map_err(|f| Failure::Data(format!("{} line {}: {}", candidates.display(), k + 1, f.message())))?;
        // Observed edges are scored with themselves hidden, as in training.
        let own = hg.find_edge(&canonical_set(nodes.clone()));
        let env = extract_local_masked(&hg, &nodes, meta.train.q, meta.train.cutoff(), own)?;
        let input = ModelInput::from_env(&env).map_err(snals::Error::from)?;
        let p = model.predict(&input).map_err(snals::Error::from)?;
        rows.push((k + 1, nodes, p));
    }
    let mut rendered = String::new();
    for (line, nodes, p) in &rows {
        if human {
            let set: Vec<String> = nodes.iter().map(usize::to_string).collect();
            let _ = writeln!(rendered, "{:<24} {p:.4}", set.join(","));
        } else {
            let _ = writeln!(rendered, "{}", json!({"line": line, "nodes": nodes, "probability": p}));
        }
    }
    match out {
        Some(path) => fs::write(path, rendered).map_err(|e| io_failure(path, e)),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}

fn explain(data: &DataArgs, set: &str, q: u32, human: bool) -> Outcome {
    let hg = load(data)?;
    let nodes = checked_candidate(&hg, set)?;
    let env: LocalEnvironment = extract_local(&hg, &nodes, q, 2 * q + 1)?;
    let spectrum = spectrum_feature(&env).map_err(snals::Error::from)?;
    if human {
        println!("candidate {:?}, q = {q}, cutoff = {}", env.candidate(), env.cutoff());
        println!("{} local nodes, {} local edges", env.num_nodes(), env.num_edges());
        for (i, &v) in env.nodes().iter().enumerate() {
            println!("  {v:>6}  {:?}", env.affinity_row(i));
        }
        println!("sigma1 {:.6}, sigma2 {:.6}, ratio {:.6}", spectrum.sigma1, spectrum.sigma2, spectrum.ratio);
        Ok(())
    } else {
        let edges: Vec<&[usize]> = env.edges().iter().map(|&e| hg.edge(e)).collect();
        emit(&json!({
            "candidate": env.candidate(),
            "q": q,
            "cutoff": env.cutoff(),
            "num_local_nodes": env.num_nodes(),
            "num_local_edges": env.num_edges(),
            "local_nodes": env.nodes(),
            "local_edges": edges,
            "affinity": env.affinity_rows(),
            "spectrum": spectrum,
        }))
    }
}
