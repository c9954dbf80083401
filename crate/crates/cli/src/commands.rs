use std::path::Path;

use darkwatch_core::charts;
use darkwatch_core::cnn::CnnTrainConfig;
use darkwatch_core::corpus::Corpus;
use darkwatch_core::dataset::{self, Field, FeatureSchema, ThreatTable};
use darkwatch_core::eda;
use darkwatch_core::imaging::filters::denoiser_from_spec;
use darkwatch_core::imaging::{decode_pnm, encode_pgm, hog, GrayImage, HogParams, PnmEncoding};
use darkwatch_core::linear::{self, ModelFile, ModelKind, TrainConfig};
use darkwatch_core::metrics::{self, EvaluationRecord};
use darkwatch_core::pipeline::{ImageTrainOptions, Pipeline};
use serde_json::json;

use crate::error::{CliError, Result};
use crate::output::{pretty, resolve_out, Summary};
use crate::*;

pub fn dispatch(command: Command, summary: &mut Summary) -> Result<()> {
    match command {
        Command::Validate(a) => validate(a, summary),
        Command::Eda(a) => run_eda(a, summary),
        Command::Train(a) => train(a, summary),
        Command::Evaluate(a) => evaluate(a, summary),
        Command::Compare(a) => compare(a, summary),
        Command::Img(ImgCommand::Denoise(a)) => img_denoise(a, summary),
        Command::Img(ImgCommand::Hog(a)) => img_hog(a, summary),
        Command::Img(ImgCommand::Train(a)) => img_train(a, summary),
        Command::Img(ImgCommand::Classify(a)) => img_classify(a, summary),
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn load_table(path: &Path) -> Result<ThreatTable> {
    Ok(dataset::parse_threat_csv(&read_text(path)?, &path.display().to_string())?)
}

fn load_image(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode_pnm(&bytes).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn validate(a: ValidateArgs, summary: &mut Summary) -> Result<()> {
    let raw = dataset::parse_raw_csv(&read_text(&a.data)?, &a.data.display().to_string())?;
    summary.set("rows", raw.rows.len());
    let nulls = dataset::validate_no_nulls(&raw);
    let per_field: serde_json::Map<_, _> = Field::ALL
        .iter()
        .map(|f| (f.key().to_string(), nulls.get(*f).into()))
        .collect();
    summary.set("nulls", per_field);
    if !nulls.is_clean() {
        return Err(CliError::Data(format!("{} null cells found", nulls.total())));
    }
    raw.into_typed()?;
    Ok(())
}

fn run_eda(a: EdaArgs, summary: &mut Summary) -> Result<()> {
    let table = load_table(&a.data)?;
    let report = eda::report(&table, a.bins)?;
    let out = resolve_out(a.out, "eda");
    summary.set("rows", table.len());
    summary.write(&out, "report.json", &pretty(&report))?;
    for (name, svg) in charts::eda_charts(&report) {
        summary.write(&out, name, svg.as_bytes())?;
    }
    Ok(())
}

fn linear_config(f: &LinearFlags, seed: u64) -> TrainConfig {
    TrainConfig {
        learning_rate: f.lr,
        epochs: f.epochs,
        l2_strength: f.l2,
        svm_lambda: f.lambda,
        tolerance: f.tolerance,
        seed,
    }
}

/// Scores a model on the test part of `split(schema.transform(table))`.
fn score_split(
    model: &linear::LinearModel,
    schema: &FeatureSchema,
    table: &ThreatTable,
    ratio: f64,
    seed: u64,
    threshold: f64,
) -> Result<(EvaluationRecord, usize, usize)> {
    let data = dataset::EncodedDataset {
        features: schema.transform(table),
        labels: table.records.iter().map(|r| r.target).collect(),
        schema: schema.clone(),
    };
    let parts = dataset::split(&data, ratio, seed)?;
    let pred = linear::predict(model, &parts.test.features, threshold)?;
    let cm = metrics::confusion(&parts.test.labels, &pred.labels)?;
    let record = EvaluationRecord::from_confusion(Some(model.kind.display_name().to_string()), cm)?;
    Ok((record, parts.train.len(), parts.test.len()))
}

fn metrics_summary(summary: &mut Summary, record: &EvaluationRecord) {
    summary.set("model", record.name.clone().unwrap_or_default());
    summary.set("confusion", serde_json::to_value(record.confusion).expect("serializes"));
    summary.set("accuracy", record.report.accuracy);
    summary.set("precision", record.report.precision);
    summary.set("recall", record.report.recall);
    summary.set("f1", record.report.f1);
}

fn train(a: TrainArgs, summary: &mut Summary) -> Result<()> {
    let kind: ModelKind = a.model.parse()?;
    let config = linear_config(&a.linear, a.seed);
    let table = load_table(&a.data)?;
    let data = dataset::encode(&table, a.scale)?;
    let parts = dataset::split(&data, a.split, a.seed)?;
    let model = linear::train(&parts.train, kind, &config)?;
    let (record, n_train, n_test) = score_split(&model, &data.schema, &table, a.split, a.seed, a.threshold)?;

    summary.set("train_rows", n_train);
    summary.set("test_rows", n_test);
    summary.set("epochs_run", model.history.len().saturating_sub(1));
    summary.set("final_loss", model.final_loss());
    metrics_summary(summary, &record);

    let out = resolve_out(a.out, "train");
    let file = ModelFile::new(model, data.schema);
    summary.write(&out, "model.json", format!("{}\n", file.to_json()).as_bytes())?;
    summary.write(&out, "metrics.json", &pretty(&record))?;
    Ok(())
}

fn evaluate(a: EvaluateArgs, summary: &mut Summary) -> Result<()> {
    let file = ModelFile::from_json(&read_text(&a.model)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", a.model.display())))?;
    let table = load_table(&a.data)?;
    let (record, n_train, n_test) = score_split(&file.model, &file.schema, &table, a.split, a.seed, a.threshold)?;
    summary.set("train_rows", n_train);
    summary.set("test_rows", n_test);
    metrics_summary(summary, &record);
    let out = resolve_out(a.out, "evaluate");
    summary.write(&out, "metrics.json", &pretty(&record))?;
    Ok(())
}

fn compare(a: CompareArgs, summary: &mut Summary) -> Result<()> {
    if !a.names.is_empty() && a.names.len() != a.files.len() {
        return Err(CliError::Usage(format!(
            "--names lists {} names for {} files",
            a.names.len(),
            a.files.len()
        )));
    }
    let mut reports = Vec::with_capacity(a.files.len());
    for (i, path) in a.files.iter().enumerate() {
        let record: EvaluationRecord = serde_json::from_str(&read_text(path)?)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let name = a
            .names
            .get(i)
            .cloned()
            .or(record.name)
            .unwrap_or_else(|| fallback_name(path));
        reports.push((name, record.report));
    }
    let report = metrics::compare(&reports)?;
    summary.set("winner", report.winner.clone());
    let out = resolve_out(a.out, "compare");
    summary.write(&out, "comparison.json", &pretty(&report))?;
    summary.write(&out, "accuracy.svg", charts::accuracy_comparison(&report).as_bytes())?;
    Ok(())
}

/// `run1/metrics.json` is named `run1`; other files by their stem.
fn fallback_name(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    match (stem.as_deref(), path.parent().and_then(Path::file_name)) {
        (Some("metrics"), Some(dir)) => dir.to_string_lossy().into_owned(),
        (Some(s), _) => s.to_string(),
        _ => path.display().to_string(),
    }
}

fn img_denoise(a: DenoiseArgs, summary: &mut Summary) -> Result<()> {
    let filter = denoiser_from_spec(&a.filter)?;
    let img = load_image(&a.input)?;
    let clean = filter.apply(&img);
    summary.set("filter", filter.spec());
    summary.set("width", img.width());
    summary.set("height", img.height());
    let out = resolve_out(a.out, "img denoise");
    summary.write(&out, "denoised.pgm", &encode_pgm(&clean, PnmEncoding::Binary))?;
    Ok(())
}

fn hog_params(f: &HogFlags) -> HogParams {
    HogParams {
        cell_size: f.cell_size,
        block_size: f.block_size,
        bins: f.bins,
        signed: f.signed,
        ..HogParams::default()
    }
}

fn img_hog(a: HogArgs, summary: &mut Summary) -> Result<()> {
    let params = hog_params(&a.hog);
    params.validate()?;
    let filter = denoiser_from_spec(&a.denoise)?;
    let img = filter.apply(&load_image(&a.input)?);
    let desc = hog(&img, &params)?;
    summary.set("length", desc.values.len());
    let out = resolve_out(a.out, "img hog");
    summary.write(&out, "hog.json", format!("{}\n", desc.to_json()).as_bytes())?;
    summary.write(&out, "hog.csv", desc.to_csv().as_bytes())?;
    Ok(())
}

fn img_train(a: ImgTrainArgs, summary: &mut Summary) -> Result<()> {
    let corpus = Corpus::load(&a.corpus)?;
    let cnn_defaults = CnnTrainConfig::default();
    let linear_defaults = TrainConfig::default();
    let opts = ImageTrainOptions {
        cnn: CnnTrainConfig {
            learning_rate: a.lr.unwrap_or(cnn_defaults.learning_rate),
            epochs: a.epochs.unwrap_or(cnn_defaults.epochs),
            batch_size: a.batch_size,
            seed: a.seed,
        },
        kernel: a.kernel,
        channels: a.channels,
        hog: hog_params(&a.hog),
        linear_kind: a.head.parse()?,
        linear: TrainConfig {
            learning_rate: a.lr.unwrap_or(linear_defaults.learning_rate),
            epochs: a.epochs.unwrap_or(linear_defaults.epochs),
            seed: a.seed,
            ..linear_defaults
        },
    };
    let (pipeline, history) = Pipeline::train(&corpus, &a.denoise, &a.mode, &opts)?;
    let accuracy = pipeline.accuracy(&corpus)?;
    summary.set("mode", pipeline.classifier.mode());
    summary.set("samples", corpus.len());
    summary.set("train_accuracy", accuracy);
    summary.set("final_loss", history.last().copied());

    let out = resolve_out(a.out, "img train");
    summary.write(&out, "model.json", format!("{}\n", pipeline.to_json()).as_bytes())?;
    let training = json!({
        "mode": pipeline.classifier.mode(),
        "denoise": pipeline.denoiser.spec(),
        "samples": corpus.len(),
        "train_accuracy": accuracy,
        "loss_history": history,
    });
    summary.write(&out, "training.json", &pretty(&training))?;
    Ok(())
}

fn img_classify(a: ClassifyArgs, summary: &mut Summary) -> Result<()> {
    let pipeline = Pipeline::from_json(&read_text(&a.model)?)?;
    let img = load_image(&a.input)?;
    let c = pipeline.classify(&img)?;
    summary.set("mode", pipeline.classifier.mode());
    summary.set("label", c.label);
    summary.set("confidence", c.confidence);
    Ok(())
}
