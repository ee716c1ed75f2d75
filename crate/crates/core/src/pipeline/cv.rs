use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::hypergraph::Hypergraph;
use crate::model::{ModelConfig, ModelInput, NormScenario, SetPooling};

use super::{derive_seed, mean_std, split_validation, train_model, evaluate, Experiment, TrainConfig};
use super::dataset::prepare_inputs;

const TAG_VALIDATION: u64 = 20;
const TAG_TRAIN: u64 = 21;

/// One line of the results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub dataset: String,
    pub fold: usize,
    pub f1: f64,
    pub auc: f64,
    pub scenario: NormScenario,
    pub pooling: SetPooling,
    pub spectrum: bool,
    pub seed: u64,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub config_hash: String,
    pub checkpoint: Option<String>,
    /// The effective configuration the fold ran with.
    pub config: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub dataset: String,
    pub positives: usize,
    pub negatives: usize,
    pub records: Vec<FoldRecord>,
    pub f1_mean: f64,
    pub f1_std: f64,
    pub auc_mean: f64,
    pub auc_std: f64,
}

impl CvReport {
    fn from_records(dataset: &str, experiment: &Experiment, records: Vec<FoldRecord>) -> Self {
        let f1: Vec<f64> = records.iter().map(|r| r.f1).collect();
        let auc: Vec<f64> = records.iter().map(|r| r.auc).collect();
        let (f1_mean, f1_std) = mean_std(&f1);
        let (auc_mean, auc_std) = mean_std(&auc);
        Self {
            dataset: dataset.to_string(),
            positives: experiment.num_positives(),
            negatives: experiment.num_negatives(),
            records,
            f1_mean,
            f1_std,
            auc_mean,
            auc_std,
        }
    }
}

/// Sidecar written next to every fold checkpoint; enough to rebuild the
/// experiment and re-evaluate the held-out fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub dataset: String,
    pub fold: usize,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub f1: f64,
    pub auc: f64,
}

impl CheckpointMeta {
    pub fn sidecar_path(checkpoint: &Path) -> PathBuf {
        checkpoint.with_extension("meta.json")
    }
}

#[derive(Debug, Clone, Default)]
pub struct CvOptions {
    pub dataset: String,
    /// Where to write `fold{k}.json` checkpoints; none when unset.
    pub checkpoint_dir: Option<PathBuf>,
}

/// Append-only JSON-lines writer shared between workers.
#[derive(Debug)]
pub struct ResultsSink {
    file: Mutex<File>,
}

impl ResultsSink {
    pub fn create(path: &Path) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { file: Mutex::new(file) })
    }

    pub fn append<T: Serialize>(&self, record: &T) -> crate::Result<()> {
        let mut line = serde_json::to_string(record)?;
        line.push('\n');
        let mut file = self.file.lock().expect("results sink poisoned");
        file.write_all(line.as_bytes())?;
        file.flush()?;
        Ok(())
    }
}

/// FNV-1a over the canonical JSON of the configuration.
pub fn config_hash(config: &TrainConfig) -> String {
    let json = serde_json::to_string(config).expect("config serialises");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in json.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Trains and evaluates every fold of a built experiment.
pub(crate) fn run_folds(
    experiment: &Experiment,
    inputs: &[ModelInput],
    config: &TrainConfig,
    options: &CvOptions,
) -> crate::Result<CvReport> {
    let labels = experiment.labels();
    let hash = config_hash(config);
    if let Some(dir) = &options.checkpoint_dir {
        fs::create_dir_all(dir)?;
    }
    let mut records = Vec::with_capacity(config.folds);
    for fold in 0..config.folds {
        let (train, test) = experiment.split(fold);
        let val_seed = derive_seed(config.seed, &[TAG_VALIDATION, fold as u64]);
        let (fit, val) = split_validation(&train, &labels, config.validation_fraction, val_seed);
        let outcome = train_model(inputs, &labels, &fit, &val, config, derive_seed(config.seed, &[TAG_TRAIN, fold as u64]))?;
        let metrics = evaluate(&outcome.model, inputs, &labels, &test, config.threshold)?;
        let checkpoint = match &options.checkpoint_dir {
            Some(dir) => {
                let path = dir.join(format!("fold{fold}.json"));
                fs::write(&path, outcome.model.to_checkpoint_json())?;
                let meta = CheckpointMeta {
                    dataset: options.dataset.clone(),
                    fold,
                    model: config.model.clone(),
                    train: config.clone(),
                    f1: metrics.f1,
                    auc: metrics.auc,
                };
                fs::write(CheckpointMeta::sidecar_path(&path), serde_json::to_string_pretty(&meta)?)?;
                Some(path.display().to_string())
            }
            None => None,
        };
        records.push(FoldRecord {
            dataset: options.dataset.clone(),
            fold,
            f1: metrics.f1,
            auc: metrics.auc,
            scenario: config.model.norm_scenario,
            pooling: config.model.set_pooling,
            spectrum: config.model.spectrum_enabled,
            seed: config.seed,
            epochs_run: outcome.epochs_run,
            best_epoch: outcome.best_epoch,
            config_hash: hash.clone(),
            checkpoint,
            config: config.clone(),
        });
    }
    Ok(CvReport::from_records(&options.dataset, experiment, records))
}

/// Negative sampling, stratified folds, training and evaluation per fold.
pub fn run_cv(hg: &Hypergraph, config: &TrainConfig, options: &CvOptions) -> crate::Result<CvReport> {
    let experiment = Experiment::build(hg, config)?;
    let inputs = prepare_inputs(hg, &experiment.samples, config)?;
    run_folds(&experiment, &inputs, config, options)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AblationAxis {
    Scenario,
    Pooling,
    Spectrum,
}

impl std::str::FromStr for AblationAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "scenario" => Ok(Self::Scenario),
            "pooling" => Ok(Self::Pooling),
            "spectrum" => Ok(Self::Spectrum),
            other => Err(format!("unknown ablation axis {other:?} (expected scenario, pooling or spectrum)")),
        }
    }
}

impl AblationAxis {
    fn settings(self, base: &ModelConfig) -> Vec<(String, ModelConfig)> {
        match self {
            Self::Scenario => NormScenario::ALL
                .iter()
                .map(|&s| (s.to_string(), ModelConfig { norm_scenario: s, ..base.clone() }))
                .collect(),
            Self::Pooling => SetPooling::ALL
                .iter()
                .map(|&p| (p.to_string(), ModelConfig { set_pooling: p, ..base.clone() }))
                .collect(),
            Self::Spectrum => [false, true]
                .iter()
                .map(|&on| {
                    let name = if on { "spectrum" } else { "structural-only" };
                    (name.to_string(), ModelConfig { spectrum_enabled: on, ..base.clone() })
                })
                .collect(),
        }
    }
}

/// One setting of an ablation, aggregated over seeds and folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub axis: AblationAxis,
    pub setting: String,
    pub seeds: Vec<u64>,
    pub f1_mean: f64,
    pub f1_std: f64,
    pub auc_mean: f64,
    pub auc_std: f64,
    pub records: Vec<FoldRecord>,
}

/// Runs every setting of `axis` with everything else fixed. Negatives,
/// folds and extracted inputs are shared across settings of the same seed.
pub fn ablate(
    hg: &Hypergraph,
    base: &TrainConfig,
    axis: AblationAxis,
    seeds: &[u64],
    options: &CvOptions,
) -> crate::Result<Vec<AblationRow>> {
    let settings = axis.settings(&base.model);
    let mut per_setting: Vec<Vec<FoldRecord>> = vec![Vec::new(); settings.len()];
    for &seed in seeds {
        let seeded = TrainConfig { seed, ..base.clone() };
        let experiment = Experiment::build(hg, &seeded)?;
        let inputs = prepare_inputs(hg, &experiment.samples, &seeded)?;
        for (k, (name, model)) in settings.iter().enumerate() {
            let config = TrainConfig { model: model.clone(), ..seeded.clone() };
            let opts = CvOptions {
                dataset: options.dataset.clone(),
                checkpoint_dir: options.checkpoint_dir.as_ref().map(|d| d.join(format!("{name}-seed{seed}"))),
            };
            per_setting[k].extend(run_folds(&experiment, &inputs, &config, &opts)?.records);
        }
    }
    Ok(settings
        .into_iter()
        .zip(per_setting)
        .map(|((setting, _), records)| {
            let (f1_mean, f1_std) = mean_std(&records.iter().map(|r| r.f1).collect::<Vec<_>>());
            let (auc_mean, auc_std) = mean_std(&records.iter().map(|r| r.auc).collect::<Vec<_>>());
            AblationRow { axis, setting, seeds: seeds.to_vec(), f1_mean, f1_std, auc_mean, auc_std, records }
        })
        .collect())
}
