//! Subcommand implementations. Each step takes a fully resolved options
//! struct, writes its outputs, and records the options in a run manifest
//! next to them. Replaying a manifest reruns the step with the same
//! options.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use netadv_core::attacks::{AdversarialBatch, AttackConfig, AttackConfigPatch};
use netadv_core::constraints::derive_constraints;
use netadv_core::dataset::{
    build_schema_with_ranges, encode, parse_nslkdd, split_traffic, stratified_split, synth_dataset, RawRecord,
    PROTOCOLS,
};
use netadv_core::evaluation::{
    evaluate as evaluate_report, EvaluationReport, ReportMetadata, Target, SEVERITY_DEFINITION,
};
use netadv_core::models::{
    evaluate_accuracy, train_forest, train_knn, train_mlp, train_svm, train_tree, AnyModel, Classifier, ForestConfig,
    Hyperparameters, KnnConfig, Metrics, MlpConfig, ModelKind, SvmConfig, TreeConfig,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::render::{render_report, Format};
use crate::runner;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TEST_FRACTION: f64 = 0.2;
pub const DEFAULT_ATTACK_LIMIT: usize = 500;
pub const DEFAULT_SYNTHETIC_ROWS: usize = 5000;

/// Record of one run: what ran, on what, with which resolved options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub options: serde_json::Value,
}

/// Manifest location for an output: `dir/manifest.json` for directories,
/// `stem.manifest.json` beside a file.
pub fn manifest_path(out: &Path, out_is_dir: bool) -> PathBuf {
    if out_is_dir {
        return out.join(MANIFEST_FILE);
    }
    let stem = out
        .file_stem()
        .map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.{MANIFEST_FILE}"))
}

fn write_manifest<T: Serialize>(
    path: &Path,
    subcommand: &str,
    config_path: Option<&Path>,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    options: &T,
) -> Result<()> {
    let m = RunManifest {
        subcommand: subcommand.into(),
        config_path: config_path.map(Path::to_path_buf),
        seed,
        inputs,
        outputs,
        options: serde_json::to_value(options).expect("serializable options"),
    };
    io::write_json(path, &m)
}

fn options_from<T: DeserializeOwned>(m: &RunManifest, path: &Path) -> Result<T> {
    serde_json::from_value(m.options.clone()).map_err(|e| Error::format(path, e))
}

/// Reruns the step recorded in a manifest.
pub fn replay(path: &Path) -> Result<()> {
    let m: RunManifest = io::read_json(path)?;
    match m.subcommand.as_str() {
        "prepare" => prepare(&options_from(&m, path)?).map(drop),
        "derive" => derive(&options_from(&m, path)?).map(drop),
        "train" => train(&options_from(&m, path)?).map(drop),
        "attack" => attack(&options_from(&m, path)?).map(drop),
        "evaluate" => evaluate(&options_from(&m, path)?).map(drop),
        "pipeline" => pipeline(&options_from(&m, path)?).map(drop),
        other => Err(Error::format(path, format!("unknown subcommand '{other}'"))),
    }
}

// ---------------------------------------------------------------- prepare

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepareOptions {
    pub input: Option<PathBuf>,
    pub synthetic: Option<usize>,
    pub out: PathBuf,
    pub seed: u64,
    pub test_fraction: f64,
}

fn load_records(input: Option<&Path>, synthetic: Option<usize>, seed: u64) -> Result<Vec<RawRecord>> {
    let records = match (input, synthetic) {
        (Some(path), None) => {
            let text = io::read_text(path)?;
            parse_nslkdd(&text).map_err(|source| Error::Parse {
                path: path.to_path_buf(),
                source,
            })?
        }
        (None, Some(n)) => synth_dataset(seed, n),
        _ => return Err(Error::Usage("give exactly one of --input and --synthetic".into())),
    };
    if records.is_empty() {
        return Err(Error::Data("no records to prepare".into()));
    }
    Ok(records)
}

/// Parses or generates records, splits them (stratified by label), and
/// writes the encoded splits with their schema. One-hot vocabularies come
/// from all records, min/max statistics from the training split.
pub fn prepare(opts: &PrepareOptions) -> Result<Vec<PathBuf>> {
    if !(0.0..1.0).contains(&opts.test_fraction) {
        return Err(Error::Usage("test fraction must be in [0, 1)".into()));
    }
    let records = load_records(opts.input.as_deref(), opts.synthetic, opts.seed)?;
    let labels: Vec<u8> = records.iter().map(|r| u8::from(r.is_malicious())).collect();
    let (train_idx, test_idx) = stratified_split(&labels, opts.test_fraction, opts.seed);
    let pick = |idx: &[usize]| idx.iter().map(|&i| records[i].clone()).collect::<Vec<_>>();
    let (train_recs, test_recs) = (pick(&train_idx), pick(&test_idx));
    let schema = build_schema_with_ranges(&records, &train_recs)?;
    let train = encode(&train_recs, &schema)?;
    let test = encode(&test_recs, &schema)?;
    log::info!(
        "prepared {} records: {} train, {} test, {} encoded columns",
        records.len(),
        train.len(),
        test.len(),
        schema.dim()
    );
    let written = io::write_dataset(&opts.out, &train, &test)?;
    write_manifest(
        &manifest_path(&opts.out, true),
        "prepare",
        None,
        Some(opts.seed),
        opts.input.iter().cloned().collect(),
        written.clone(),
        opts,
    )?;
    Ok(written)
}

// ----------------------------------------------------------------- derive

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeriveOptions {
    pub data: PathBuf,
    pub out: PathBuf,
}

/// Derives constraints from the training split.
pub fn derive(opts: &DeriveOptions) -> Result<()> {
    let data = io::read_dataset(&opts.data)?;
    let cs = derive_constraints(&data.train)?;
    for p in PROTOCOLS.iter().filter(|p| !cs.implications.contains_key(**p)) {
        log::warn!("no '{p}' rows in the training data: '{p}' gets no implication entry, so its samples are rejected");
    }
    log::info!("derived implications for {} protocols", cs.implications.len());
    io::write_constraints(&opts.out, &cs, &data.train.schema)?;
    write_manifest(
        &manifest_path(&opts.out, false),
        "derive",
        None,
        None,
        vec![opts.data.clone()],
        vec![opts.out.clone()],
        opts,
    )
}

// ------------------------------------------------------------------ train

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub data: PathBuf,
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub hyperparameters: Hyperparameters,
}

/// Hyperparameters for `kind`: defaults, overlaid by the JSON object in
/// `config` if given, with `seed` (if given) replacing any config seed.
pub fn resolve_hyperparameters(kind: ModelKind, config: Option<&Path>, seed: Option<u64>) -> Result<Hyperparameters> {
    fn load<T: DeserializeOwned + Default>(config: Option<&Path>) -> Result<T> {
        config.map_or_else(|| Ok(T::default()), io::read_json)
    }
    Ok(match kind {
        ModelKind::Mlp => {
            let mut c: MlpConfig = load(config)?;
            if let Some(s) = seed {
                c.seed = s;
            }
            Hyperparameters::Mlp(c)
        }
        ModelKind::Forest => {
            let mut c: ForestConfig = load(config)?;
            if let Some(s) = seed {
                c.seed = s;
            }
            Hyperparameters::Forest(c)
        }
        ModelKind::Knn => Hyperparameters::Knn(load(config)?),
        ModelKind::Tree => Hyperparameters::Tree(load(config)?),
        ModelKind::Svm => Hyperparameters::Svm(load(config)?),
        ModelKind::Linear => return Err(Error::Usage("linear models are not trainable; use svm".into())),
    })
}

fn hyper_seed(h: &Hyperparameters) -> Option<u64> {
    match h {
        Hyperparameters::Mlp(c) => Some(c.seed),
        Hyperparameters::Forest(c) => Some(c.seed),
        _ => None,
    }
}

pub fn fit(data: &netadv_core::dataset::EncodedDataset, h: &Hyperparameters) -> Result<AnyModel> {
    Ok(match h {
        Hyperparameters::Mlp(c) => AnyModel::Mlp {
            config: c.clone(),
            model: train_mlp(data, c)?,
        },
        Hyperparameters::Knn(c) => AnyModel::Knn(train_knn(data, c)?),
        Hyperparameters::Tree(c) => AnyModel::Tree(train_tree(data, c)?),
        Hyperparameters::Forest(c) => AnyModel::Forest(train_forest(data, c)?),
        Hyperparameters::Svm(c) => AnyModel::Svm(train_svm(data, c)?),
        Hyperparameters::Linear => return Err(Error::Usage("linear models are not trainable; use svm".into())),
    })
}

/// One-line summary of a trained model's test metrics.
pub fn metrics_line(model: &AnyModel, m: &Metrics) -> String {
    let mut line = format!(
        "model={} accuracy={:.4} precision={:.4} recall={:.4} f1={:.4}",
        model.kind(),
        m.accuracy,
        m.precision,
        m.recall,
        m.f1
    );
    if let AnyModel::Mlp { model, .. } = model {
        line.push_str(&format!(" architecture={:?}", model.architecture()));
    }
    line
}

/// Trains on the training split and scores on the test split.
pub fn train(opts: &TrainOptions) -> Result<(AnyModel, Metrics)> {
    let data = io::read_dataset(&opts.data)?;
    let started = std::time::Instant::now();
    let model = fit(&data.train, &opts.hyperparameters)?;
    let metrics = evaluate_accuracy(&model, &data.test)?;
    log::info!(
        "trained {} in {:.1}s, test accuracy {:.4}",
        model.kind(),
        started.elapsed().as_secs_f64(),
        metrics.accuracy
    );
    io::write_model(&opts.out, &model)?;
    write_manifest(
        &manifest_path(&opts.out, false),
        "train",
        opts.config.as_deref(),
        hyper_seed(&opts.hyperparameters),
        vec![opts.data.clone()],
        vec![opts.out.clone()],
        opts,
    )?;
    Ok((model, metrics))
}

// ----------------------------------------------------------------- attack

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackOptions {
    pub model: PathBuf,
    pub data: PathBuf,
    pub attacks: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    /// Number of malicious test samples to attack.
    pub limit: usize,
    pub configs: Vec<AttackConfig>,
}

/// Attack configs from a JSON list of partial configs, or all seven
/// defaults when no file is given.
pub fn resolve_attack_configs(path: Option<&Path>, seed: u64) -> Result<Vec<AttackConfig>> {
    let Some(path) = path else {
        return Ok(AttackConfig::default_suite(seed));
    };
    let patches: Vec<AttackConfigPatch> = io::read_json(path)?;
    if patches.is_empty() {
        return Err(Error::format(path, "no attack configs"));
    }
    patches
        .iter()
        .map(|p| p.resolve(seed).map_err(|e| Error::format(path, e)))
        .collect()
}

/// Identifier of a model file: its file stem.
pub fn model_id(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "model".into(), |s| s.to_string_lossy().into_owned())
}

pub fn attack(opts: &AttackOptions) -> Result<Vec<AdversarialBatch>> {
    let model = io::read_model(&opts.model)?;
    let data = io::read_dataset(&opts.data)?;
    let schema = &data.test.schema;
    if model.input_dim() != schema.dim() {
        return Err(Error::Data(format!(
            "{}: model expects {} features, data has {}",
            opts.model.display(),
            model.input_dim(),
            schema.dim()
        )));
    }
    let (_, malicious) = split_traffic(&data.test);
    let n = opts.limit.min(malicious.len());
    if n == 0 {
        return Err(Error::Data("no malicious test samples to attack".into()));
    }
    if n < opts.limit {
        log::warn!("only {n} malicious test samples available, {} requested", opts.limit);
    }
    let samples = malicious.features.select(&(0..n).collect::<Vec<_>>());

    let cfgs: Vec<AttackConfig> = opts
        .configs
        .iter()
        .filter(|c| {
            let ok = !c.attack_kind.needs_gradients() || model.differentiable();
            if !ok {
                log::warn!(
                    "skipping {}: the {} surrogate has no gradients",
                    c.attack_kind.id(),
                    model.kind()
                );
            }
            ok
        })
        .cloned()
        .collect();
    if cfgs.is_empty() {
        return Err(Error::Data("no requested attack can run against this surrogate".into()));
    }

    let pool = runner::thread_pool(runner::worker_count())?;
    let out = runner::run_suite(&pool, &model, &model_id(&opts.model), &samples, &cfgs)?;
    let mut outputs = vec![opts.out.join(io::SCHEMA_FILE)];
    io::write_json(&outputs[0], schema)?;
    for b in &out.batches {
        let dir = opts.out.join(b.attack.attack_kind.id());
        io::write_batch(&dir, b, schema, &data.fingerprint)?;
        outputs.push(dir);
    }
    write_manifest(
        &manifest_path(&opts.out, true),
        "attack",
        opts.attacks.as_deref(),
        Some(opts.seed),
        vec![opts.model.clone(), opts.data.clone()],
        outputs,
        opts,
    )?;
    Ok(out.batches)
}

// --------------------------------------------------------------- evaluate

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub name: String,
    pub path: PathBuf,
}

impl TargetSpec {
    /// `name=path`, or a bare path named by its file stem.
    pub fn parse(s: &str) -> Self {
        match s.split_once('=') {
            Some((name, path)) if !name.is_empty() => TargetSpec {
                name: name.into(),
                path: path.into(),
            },
            _ => TargetSpec {
                name: model_id(Path::new(s)),
                path: s.into(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateOptions {
    pub batches: PathBuf,
    pub constraints: PathBuf,
    pub targets: Vec<TargetSpec>,
    pub out: PathBuf,
    pub render: Vec<Format>,
}

fn config_hash(cfg: &AttackConfig) -> String {
    let json = serde_json::to_string(cfg).expect("serializable config");
    io::sha256_hex(&[json.as_bytes()])
}

pub fn evaluate(opts: &EvaluateOptions) -> Result<EvaluationReport> {
    if opts.targets.is_empty() {
        return Err(Error::Usage("at least one target model is required".into()));
    }
    for (i, t) in opts.targets.iter().enumerate() {
        if opts.targets[..i].iter().any(|u| u.name == t.name) {
            return Err(Error::Usage(format!("target name '{}' given twice", t.name)));
        }
    }
    let (schema, loaded) = io::read_batches(&opts.batches)?;
    let constraints = io::read_constraints(&opts.constraints, &schema)?;
    let (first_batch, first_meta) = &loaded[0];
    if loaded.iter().any(|(b, m)| {
        b.surrogate_id != first_batch.surrogate_id || m.dataset_fingerprint != first_meta.dataset_fingerprint
    }) {
        return Err(Error::Data("batches come from different surrogates or datasets".into()));
    }

    let models = opts
        .targets
        .iter()
        .map(|t| io::read_model(&t.path))
        .collect::<Result<Vec<_>>>()?;

    let mut metadata = ReportMetadata {
        severity_definition: SEVERITY_DEFINITION.into(),
        surrogate: first_batch.surrogate_id.clone(),
        dataset_fingerprint: first_meta.dataset_fingerprint.clone(),
        attacked_samples: first_batch.len(),
        excluded_samples: first_batch.excluded,
        ..Default::default()
    };
    for (b, _) in &loaded {
        let id = b.attack.attack_kind.id();
        metadata.seeds.insert(format!("attack.{id}"), b.attack.seed);
        metadata.config_hashes.insert(id.to_string(), config_hash(&b.attack));
        metadata.configs.push(b.attack.clone());
    }
    for (t, m) in opts.targets.iter().zip(&models) {
        let (seed, desc) = match m {
            AnyModel::Mlp { config, model } => (Some(config.seed), format!("mlp {:?}", model.architecture())),
            AnyModel::Forest(f) => (Some(f.config.seed), format!("forest of {}", f.trees.len())),
            other => (None, other.kind().to_string()),
        };
        if let Some(s) = seed {
            metadata.seeds.insert(format!("target.{}", t.name), s);
        }
        metadata.notes.insert(format!("target.{}", t.name), desc);
    }

    let targets: Vec<Target<'_>> = opts
        .targets
        .iter()
        .zip(&models)
        .map(|(t, m)| Target {
            name: t.name.clone(),
            model: m,
        })
        .collect();
    let batches: Vec<AdversarialBatch> = loaded.into_iter().map(|(b, _)| b).collect();
    let report = evaluate_report(&batches, &targets, &constraints, &schema, metadata)?;
    for v in &report.validity {
        log::info!(
            "{}: {} valid, {} invalid",
            v.attack.id(),
            v.valid_count,
            v.invalid_count
        );
    }
    let written = render_report(&report, &opts.out, &opts.render)?;
    let mut inputs = vec![opts.batches.clone(), opts.constraints.clone()];
    inputs.extend(opts.targets.iter().map(|t| t.path.clone()));
    write_manifest(
        &manifest_path(&opts.out, false),
        "evaluate",
        None,
        None,
        inputs,
        written,
        opts,
    )?;
    Ok(report)
}

// --------------------------------------------------------------- pipeline

/// Target models trained by the pipeline, by file stem.
pub const PIPELINE_TARGETS: [&str; 6] = ["mlp", "svm", "dt", "rf", "knn", "mlp2"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub input: Option<PathBuf>,
    pub synthetic: Option<usize>,
    pub out: PathBuf,
    pub seed: u64,
    pub test_fraction: f64,
    pub limit: usize,
    pub attacks: Option<PathBuf>,
    pub configs: Vec<AttackConfig>,
    /// Surrogate, then the targets, keyed by model file stem.
    pub models: BTreeMap<String, Hyperparameters>,
    pub render: Vec<Format>,
}

impl PipelineOptions {
    /// Defaults: the surrogate MLP seeded with `seed`, a second MLP seeded
    /// with `seed + 1`, the four classical targets, all seven attacks.
    pub fn new(out: PathBuf, seed: u64) -> Self {
        let mlp = |s| {
            Hyperparameters::Mlp(MlpConfig {
                seed: s,
                ..Default::default()
            })
        };
        let models = BTreeMap::from([
            ("mlp".to_string(), mlp(seed)),
            ("mlp2".to_string(), mlp(seed.wrapping_add(1))),
            ("svm".to_string(), Hyperparameters::Svm(SvmConfig::default())),
            ("dt".to_string(), Hyperparameters::Tree(TreeConfig::default())),
            (
                "rf".to_string(),
                Hyperparameters::Forest(ForestConfig {
                    seed,
                    ..Default::default()
                }),
            ),
            ("knn".to_string(), Hyperparameters::Knn(KnnConfig::default())),
        ]);
        Self {
            input: None,
            synthetic: Some(DEFAULT_SYNTHETIC_ROWS),
            out,
            seed,
            test_fraction: DEFAULT_TEST_FRACTION,
            limit: DEFAULT_ATTACK_LIMIT,
            attacks: None,
            configs: AttackConfig::default_suite(seed),
            models,
            render: vec![Format::Csv, Format::Markdown, Format::Svg],
        }
    }

    pub fn data_dir(&self) -> PathBuf {
        self.out.join("data")
    }

    pub fn constraints_path(&self) -> PathBuf {
        self.out.join("constraints.json")
    }

    pub fn model_path(&self, name: &str) -> PathBuf {
        self.out.join("models").join(format!("{name}.json"))
    }

    pub fn batches_dir(&self) -> PathBuf {
        self.out.join("batches")
    }

    pub fn report_path(&self) -> PathBuf {
        self.out.join("report").join("report.json")
    }

    pub fn metrics_path(&self) -> PathBuf {
        self.out.join("metrics.json")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub report: EvaluationReport,
    /// Test metrics per model file stem.
    pub metrics: BTreeMap<String, Metrics>,
}

/// prepare → derive → train (surrogate and targets) → attack → evaluate.
pub fn pipeline(opts: &PipelineOptions) -> Result<PipelineOutput> {
    if !opts.models.contains_key("mlp") {
        return Err(Error::Usage("the pipeline needs an 'mlp' surrogate entry".into()));
    }
    prepare(&PrepareOptions {
        input: opts.input.clone(),
        synthetic: opts.synthetic,
        out: opts.data_dir(),
        seed: opts.seed,
        test_fraction: opts.test_fraction,
    })?;
    derive(&DeriveOptions {
        data: opts.data_dir(),
        out: opts.constraints_path(),
    })?;

    let mut metrics = BTreeMap::new();
    let mut target_names: Vec<&str> = PIPELINE_TARGETS
        .iter()
        .copied()
        .filter(|n| opts.models.contains_key(*n))
        .collect();
    target_names.extend(
        opts.models
            .keys()
            .map(String::as_str)
            .filter(|n| !PIPELINE_TARGETS.contains(n)),
    );
    for name in &target_names {
        let (model, m) = train(&TrainOptions {
            data: opts.data_dir(),
            config: None,
            out: opts.model_path(name),
            hyperparameters: opts.models[*name].clone(),
        })?;
        log::info!("{name}: {}", metrics_line(&model, &m));
        metrics.insert(name.to_string(), m);
    }
    io::write_json(&opts.metrics_path(), &metrics)?;

    attack(&AttackOptions {
        model: opts.model_path("mlp"),
        data: opts.data_dir(),
        attacks: opts.attacks.clone(),
        out: opts.batches_dir(),
        seed: opts.seed,
        limit: opts.limit,
        configs: opts.configs.clone(),
    })?;
    let report = evaluate(&EvaluateOptions {
        batches: opts.batches_dir(),
        constraints: opts.constraints_path(),
        targets: target_names
            .iter()
            .map(|n| TargetSpec {
                name: n.to_string(),
                path: opts.model_path(n),
            })
            .collect(),
        out: opts.report_path(),
        render: opts.render.clone(),
    })?;
    write_manifest(
        &manifest_path(&opts.out, true),
        "pipeline",
        opts.attacks.as_deref(),
        Some(opts.seed),
        opts.input.iter().cloned().collect(),
        vec![opts.report_path(), opts.metrics_path()],
        opts,
    )?;
    Ok(PipelineOutput { report, metrics })
}
