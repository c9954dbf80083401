//! Acceptance suite: one PASS/FAIL line per criterion; exits nonzero on any failure.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use darkwatch_core::cnn::{train_cnn, CnnNetwork, CnnTrainConfig, NetSpec, Shape, Tensor};
use darkwatch_core::dataset::{encode, parse_threat_csv, split, write_threat_csv, ThreatRecord, ThreatTable};
use darkwatch_core::eda;
use darkwatch_core::imaging::hog::cell_histograms;
use darkwatch_core::imaging::{gaussian_blur, hog, median_denoise, GrayImage, HogParams};
use darkwatch_core::linear::{self, logistic_loss_grad, margin, svm_loss_grad, ModelKind, TrainConfig};
use darkwatch_core::metrics::{scores, ConfusionMatrix, ZeroDivision};
use darkwatch_core::pipeline::{classify_image, image_to_tensor, ImageTrainOptions, Pipeline};
use darkwatch_core::synth::{bar_corpus, separable_threat_table, SECTORS, THREAT_TYPES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn darkwatch(dir: &Path, args: &[&str]) -> Result<Value, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_darkwatch"))
        .current_dir(dir)
        .env_remove("DARKWATCH_OUT")
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    ensure!(out.status.success(), "`darkwatch {}` exited {:?}: {stdout}", args.join(" "), out.status.code());
    serde_json::from_str(stdout.trim()).map_err(|e| format!("summary is not JSON: {e}"))
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

// 1 -------------------------------------------------------------------------

fn confusion_arithmetic() -> Outcome {
    let r = scores(&ConfusionMatrix::new(928, 15, 53, 0)).map_err(|e| e.to_string())?;
    ensure!((r.accuracy - 0.9317).abs() <= 1e-4, "accuracy {}", r.accuracy);
    ensure!(r.precision == 0.0 && r.recall == 0.0 && r.f1 == 0.0, "expected zero P/R/F1, got {r:?}");
    ensure!(r.flags.contains(&ZeroDivision::F1), "F1 zero-division flag missing: {:?}", r.flags);
    Ok(format!("accuracy {:.4}, precision/recall/F1 0, flags {:?}", r.accuracy, r.flags))
}

// 2 -------------------------------------------------------------------------

fn metrics_fixture(name: &str, accuracy: f64) -> Value {
    json!({
        "name": name,
        "confusion": {"tn": 0, "fp": 0, "fn": 0, "tp": 0},
        "accuracy": accuracy,
        "precision": 0.0,
        "recall": 0.0,
        "f1": 0.0,
        "flags": []
    })
}

fn comparison_chart() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = tmp.path();
    for (dir, name, acc) in [("lr", "Logistic Regression", 0.93), ("svm", "SVM", 0.94)] {
        std::fs::create_dir_all(d.join(dir)).unwrap();
        std::fs::write(d.join(dir).join("metrics.json"), metrics_fixture(name, acc).to_string()).unwrap();
    }
    let summary = darkwatch(d, &["compare", "lr/metrics.json", "svm/metrics.json", "--out", "cmp"])?;
    ensure!(summary["winner"] == "SVM", "summary winner {}", summary["winner"]);
    let report: Value = serde_json::from_slice(&std::fs::read(d.join("cmp/comparison.json")).unwrap()).unwrap();
    let order: Vec<&str> = report["entries"].as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    ensure!(order == ["SVM", "Logistic Regression"], "ranking {order:?}");
    let svg = std::fs::read_to_string(d.join("cmp/accuracy.svg")).unwrap();
    ensure!(svg.starts_with("<svg") && svg.contains("winner: SVM"), "chart does not name the winner");
    ensure!(svg.contains(">0.94<") && svg.contains(">0.93<"), "chart lacks the bar labels");
    Ok("SVM ranked first in comparison.json and accuracy.svg".into())
}

// 3 -------------------------------------------------------------------------

type LossFn = fn(&[f64], f64, &[Vec<f64>], &[u8], f64) -> linear::Result<linear::LossGrad>;

fn linear_fd(f: LossFn, w: &[f64], b: f64, x: &[Vec<f64>], y: &[u8], reg: f64, h: f64) -> f64 {
    let loss = |w: &[f64], b: f64| f(w, b, x, y, reg).unwrap().loss;
    let g = f(w, b, x, y, reg).unwrap();
    let mut worst: f64 = 0.0;
    for j in 0..w.len() {
        let (mut p, mut m) = (w.to_vec(), w.to_vec());
        p[j] += h;
        m[j] -= h;
        worst = worst.max(rel_err(g.grad_w[j], (loss(&p, b) - loss(&m, b)) / (2.0 * h)));
    }
    worst.max(rel_err(g.grad_b, (loss(w, b + h) - loss(w, b - h)) / (2.0 * h)))
}

fn gradient_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_lr, mut worst_svm) = (0.0f64, 0.0f64);
    let mut done = [0usize; 2];
    while done[0] < 100 || done[1] < 100 {
        let n = rng.gen_range(3..20);
        let d = rng.gen_range(1..6);
        let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b = rng.gen_range(-1.0..1.0);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
        let y: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1)).collect();
        let reg = rng.gen_range(0.01..0.5);
        if done[0] < 100 {
            worst_lr = worst_lr.max(linear_fd(logistic_loss_grad, &w, b, &x, &y, reg, 1e-5));
            done[0] += 1;
        }
        let h = 1e-3;
        let clear = x.iter().zip(&y).all(|(row, &yi)| {
            let s = if yi == 1 { 1.0 } else { -1.0 };
            let reach = h * (1.0 + row.iter().map(|v| v.abs()).sum::<f64>());
            (s * margin(&w, b, row) - 1.0).abs() > 2.0 * reach
        });
        if clear && done[1] < 100 {
            worst_svm = worst_svm.max(linear_fd(svm_loss_grad, &w, b, &x, &y, reg, h));
            done[1] += 1;
        }
    }
    ensure!(worst_lr < 1e-6, "logistic worst relative error {worst_lr:e}");
    ensure!(worst_svm < 1e-6, "svm worst relative error {worst_svm:e}");

    let spec = NetSpec { input_shape: Shape::new(8, 8, 1), kernel: 3, channels: 2, classes: 2 };
    let mut net = CnnNetwork::new(spec, 17).unwrap();
    for p in 0..net.parameter_count() {
        let v = net.parameter_mut(p);
        if *v == 0.0 {
            *v = rng.gen_range(-0.1..0.1);
        }
    }
    let batch: Vec<Tensor> = (0..4)
        .map(|_| Tensor::new(spec.input_shape, (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap())
        .collect();
    let labels = [0, 1, 0, 1];
    let analytic = net.loss_gradients(&batch, &labels).unwrap().1.flat();
    let h = 1e-4;
    let mut worst_cnn: f64 = 0.0;
    for p in 0..net.parameter_count() {
        let orig = *net.parameter_mut(p);
        *net.parameter_mut(p) = orig + h;
        let up = net.loss_gradients(&batch, &labels).unwrap().0;
        *net.parameter_mut(p) = orig - h;
        let down = net.loss_gradients(&batch, &labels).unwrap().0;
        *net.parameter_mut(p) = orig;
        worst_cnn = worst_cnn.max(rel_err(analytic[p], (up - down) / (2.0 * h)));
    }
    ensure!(worst_cnn < 1e-3, "cnn worst relative error {worst_cnn:e}");
    Ok(format!(
        "worst relative error: logistic {worst_lr:.1e}, svm {worst_svm:.1e}, cnn ({} params) {worst_cnn:.1e}",
        net.parameter_count()
    ))
}

// 4 -------------------------------------------------------------------------

fn optimizer_quality() -> Outcome {
    let x: Vec<Vec<f64>> = [-2.0, -1.0, 0.0, 1.0, 2.0].iter().map(|&v| vec![v]).collect();
    let y = [0u8, 1, 0, 1, 1];
    let mut grid = f64::INFINITY;
    for i in 0..=2000 {
        for j in 0..=2000 {
            let (w, b) = (-10.0 + 0.01 * i as f64, -10.0 + 0.01 * j as f64);
            let loss: f64 = x
                .iter()
                .zip(&y)
                .map(|(xi, &yi)| {
                    let p = 1.0 / (1.0 + (-(w * xi[0] + b)).exp());
                    if yi == 1 { -p.ln() } else { -(1.0 - p).ln() }
                })
                .sum::<f64>()
                / 5.0;
            grid = grid.min(loss);
        }
    }
    let cfg = TrainConfig { l2_strength: 0.0, ..TrainConfig::default() };
    let model = linear::train_matrix(&x, &y, ModelKind::Logistic, &cfg).map_err(|e| e.to_string())?;
    let trained = logistic_loss_grad(&model.weights, model.bias, &x, &y, 0.0).unwrap().loss;
    ensure!(trained <= grid + 1e-3, "trained loss {trained} vs grid minimum {grid}");

    let table = separable_threat_table(1000, 0.05, 2024);
    let data = encode(&table, true).map_err(|e| e.to_string())?;
    ensure!(data.width() == 12, "feature width {}", data.width());
    let parts = split(&data, 0.8, 7).map_err(|e| e.to_string())?;
    let mut accs = Vec::new();
    for kind in [ModelKind::Logistic, ModelKind::Svm] {
        let m = linear::train(&parts.train, kind, &TrainConfig::default()).map_err(|e| e.to_string())?;
        let pred = linear::predict(&m, &parts.test.features, 0.5).unwrap();
        let hits = pred.labels.iter().zip(&parts.test.labels).filter(|(a, b)| a == b).count();
        let acc = hits as f64 / parts.test.len() as f64;
        ensure!(acc >= 0.99, "{kind} test accuracy {acc}");
        accs.push(acc);
    }
    Ok(format!(
        "1-D loss {trained:.6} <= grid {grid:.6} + 1e-3; separable test accuracy LR {:.3}, SVM {:.3}",
        accs[0], accs[1]
    ))
}

// 5 -------------------------------------------------------------------------

const NINE_ROWS: &str = "\
Type of Threat,Targeted Sector,Number of Attempts,Impact Level,Target
Malware,Data Breach,85,26,0
Data Breach,Data Breach,86,32,0
Ransomware,Ransomware,99,55,0
Data Breach,Ransomware,9,78,0
Social Engineering,Phishing,21,92,0
Social Engineering,Social Engineering,71,47,0
Phishing,Ransomware,35,74,0
Malware,Malware,53,92,1
Ransomware,Ransomware,95,91,0
";

fn brute_quantile(v: &[f64], q: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (s.len() - 1) as f64 * q;
    let i = h as usize;
    if i + 1 >= s.len() { s[i] } else { s[i] + (h - i as f64) * (s[i + 1] - s[i]) }
}

fn brute_pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let vx = n * x.iter().map(|a| a * a).sum::<f64>() - sx * sx;
    let vy = n * y.iter().map(|a| a * a).sum::<f64>() - sy * sy;
    let cxy = n * x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() - sx * sy;
    (vx != 0.0 && vy != 0.0).then(|| cxy / (vx * vy).sqrt())
}

fn eda_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for case in 0..1000 {
        let rows = rng.gen_range(2..=64);
        let types = rng.gen_range(1..=THREAT_TYPES.len());
        let records: Vec<ThreatRecord> = (0..rows)
            .map(|_| {
                ThreatRecord::new(
                    THREAT_TYPES[rng.gen_range(0..types)],
                    SECTORS[rng.gen_range(0..SECTORS.len())],
                    rng.gen_range(0..=200),
                    rng.gen_range(0..=100),
                    rng.gen_range(0..=1),
                )
            })
            .collect();
        let table = ThreatTable::new("random", records);
        let mut groups: BTreeMap<&str, Vec<&ThreatRecord>> = BTreeMap::new();
        for r in &table.records {
            groups.entry(r.threat_type.as_str()).or_default().push(r);
        }

        let summaries = eda::summarize_by_threat(&table).unwrap();
        let boxes = eda::box_stats_by_threat(&table).unwrap();
        ensure!(summaries.len() == groups.len(), "case {case}: group count");
        for ((s, b), (key, members)) in summaries.iter().zip(&boxes).zip(&groups) {
            let attempts: Vec<f64> = members.iter().map(|r| r.num_attempts as f64).collect();
            let total: f64 = attempts.iter().sum();
            let impact: f64 = members.iter().map(|r| r.impact_level as f64).sum::<f64>() / members.len() as f64;
            ensure!(s.group_key == *key && b.group_key == *key, "case {case}: key order");
            ensure!(s.count == members.len() && s.attempt_total as f64 == total, "case {case}: totals");
            ensure!((s.attempt_mean - total / members.len() as f64).abs() < 1e-9, "case {case}: attempt mean");
            ensure!((s.impact_mean - impact).abs() < 1e-9, "case {case}: impact mean");
            for (got, q) in [(b.min, 0.0), (b.q1, 0.25), (b.median, 0.5), (b.q3, 0.75), (b.max, 1.0)] {
                ensure!((got - brute_quantile(&attempts, q)).abs() < 1e-9, "case {case}: quantile {q}");
            }
        }

        let bins = rng.gen_range(1..=20);
        let hist = eda::impact_histogram(&table, bins).unwrap();
        for k in 0..bins {
            let lo = 100.0 * k as f64 / bins as f64;
            let hi = 100.0 * (k + 1) as f64 / bins as f64;
            let want = table
                .records
                .iter()
                .map(|r| r.impact_level as f64)
                .filter(|&v| v >= lo && (v < hi || (k == bins - 1 && v <= hi)))
                .count();
            ensure!(hist.counts[k] == want, "case {case}: bin {k}/{bins}");
        }

        let corr = eda::correlation(&table).unwrap();
        let cols: [Vec<f64>; 3] = [
            table.records.iter().map(|r| r.num_attempts as f64).collect(),
            table.records.iter().map(|r| r.impact_level as f64).collect(),
            table.records.iter().map(|r| r.target as f64).collect(),
        ];
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { Some(1.0) } else { brute_pearson(&cols[i], &cols[j]) };
                let got = corr.cells[i][j];
                ensure!((got - want.unwrap_or(0.0)).abs() < 1e-9, "case {case}: corr ({i},{j})");
            }
        }
    }

    let t = parse_threat_csv(NINE_ROWS, "nine").unwrap();
    let hist = eda::impact_histogram(&t, 10).unwrap();
    ensure!(hist.counts == [0, 0, 1, 1, 1, 1, 0, 2, 0, 3], "nine-row histogram {:?}", hist.counts);
    let shares = eda::sector_shares(&t).unwrap();
    ensure!(shares[0].sector == "Ransomware" && (shares[0].proportion - 4.0 / 9.0).abs() < 1e-12, "top share {:?}", shares[0]);
    let rw = eda::summarize_by_threat(&t).unwrap().into_iter().find(|g| g.group_key == "Ransomware").unwrap();
    ensure!(rw.attempt_total == 194, "Ransomware attempt_total {}", rw.attempt_total);
    Ok("1000 random tables match brute force to 1e-9; nine-row hand values reproduced".into())
}

// 6 -------------------------------------------------------------------------

fn px(img: &GrayImage, x: i64, y: i64) -> f64 {
    let cx = x.clamp(0, img.width() as i64 - 1) as usize;
    let cy = y.clamp(0, img.height() as i64 - 1) as usize;
    img.pixels()[cy * img.width() + cx]
}

fn imaging_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    for case in 0..100 {
        let (w, h) = (rng.gen_range(8..=16), rng.gen_range(8..=16));
        let img = GrayImage::from_fn(w, h, |_, _| rng.gen_range(0..=200) as f64).unwrap();

        let r = rng.gen_range(1..=2i64);
        let med = median_denoise(&img, r as usize).unwrap();
        let sigma = rng.gen_range(0.4..2.0);
        let blur = gaussian_blur(&img, sigma).unwrap();
        let rad = (3.0 * sigma).ceil() as i64;
        let g = |d: i64| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp();
        let norm: f64 = (-rad..=rad).map(g).sum();
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let mut win: Vec<f64> = (-r..=r).flat_map(|dy| (-r..=r).map(move |dx| (dx, dy))).map(|(dx, dy)| px(&img, x + dx, y + dy)).collect();
                win.sort_by(|a, b| a.partial_cmp(b).unwrap());
                ensure!(med.get(x as usize, y as usize) == win[win.len() / 2], "case {case}: median at ({x},{y})");
                let mut acc = 0.0;
                for dy in -rad..=rad {
                    for dx in -rad..=rad {
                        acc += g(dx) * g(dy) * px(&img, x + dx, y + dy);
                    }
                }
                let want = acc / (norm * norm);
                ensure!((blur.get(x as usize, y as usize) - want).abs() < 1e-9, "case {case}: gaussian at ({x},{y})");
            }
        }

        let params = HogParams { cell_size: 4, ..HogParams::default() };
        let a = hog(&img, &params).unwrap();
        let c = rng.gen_range(1.0..55.0);
        let brighter = GrayImage::from_fn(w, h, |x, y| img.get(x, y) + c).unwrap();
        let b = hog(&brighter, &params).unwrap();
        ensure!(a.values.iter().zip(&b.values).all(|(p, q)| (p - q).abs() < 1e-9), "case {case}: brightness");
        let (bx, by) = (w / 4 - 1, h / 4 - 1);
        ensure!(a.values.len() == bx * by * 4 * 9, "case {case}: descriptor length {}", a.values.len());
    }

    let flat = hog(&GrayImage::filled(16, 16, 120.0).unwrap(), &HogParams::default()).unwrap();
    ensure!(flat.values.iter().all(|&v| v == 0.0), "constant image gives a nonzero descriptor");

    let edge = GrayImage::from_fn(16, 16, |x, _| if x < 8 { 0.0 } else { 255.0 }).unwrap();
    for (i, cell) in cell_histograms(&edge, &HogParams::default()).unwrap().iter().enumerate() {
        let rest: f64 = cell[1..].iter().sum();
        ensure!(cell[0] > 0.0 && rest < 0.01 * cell[0], "edge cell {i}: {cell:?}");
    }
    Ok("median exact, gaussian within 1e-9 on 100 random images; HOG properties hold".into())
}

// 7 -------------------------------------------------------------------------

fn image_pipeline() -> Outcome {
    let train = bar_corpus(200, 8, 1);
    let held_out = bar_corpus(100, 8, 2);
    let opts = ImageTrainOptions {
        cnn: CnnTrainConfig { learning_rate: 0.05, epochs: 200, ..CnnTrainConfig::default() },
        hog: HogParams { cell_size: 4, ..HogParams::default() },
        ..ImageTrainOptions::default()
    };

    let tensors: Vec<Tensor> = train.samples.iter().map(|s| image_to_tensor(&s.image)).collect();
    let spec = NetSpec { input_shape: Shape::new(8, 8, 1), kernel: opts.kernel, channels: opts.channels, classes: 2 };
    let net = train_cnn(&tensors, &train.labels(), spec, &opts.cnn).map_err(|e| e.to_string())?.network;
    let hits = tensors.iter().zip(train.labels()).filter(|(t, l)| net.predict(t).unwrap().0 == *l).count();
    let train_acc = hits as f64 / train.len() as f64;
    ensure!(train_acc >= 0.95, "train_cnn training accuracy {train_acc}");

    let accuracy = |p: &Pipeline| {
        let hits = held_out.samples.iter().filter(|s| classify_image(p, &s.image).unwrap().label == s.label).count();
        hits as f64 / held_out.len() as f64
    };
    let (cnn, _) = Pipeline::train(&train, "none", "raw-cnn", &opts).map_err(|e| e.to_string())?;
    let cnn_acc = accuracy(&cnn);
    ensure!(cnn_acc >= 0.9, "raw-cnn held-out accuracy {cnn_acc}");
    let (hogp, _) = Pipeline::train(&train, "none", "hog+dense", &opts).map_err(|e| e.to_string())?;
    let hog_acc = accuracy(&hogp);
    ensure!(hog_acc >= 0.9, "hog+dense held-out accuracy {hog_acc}");
    Ok(format!("train_cnn {train_acc:.3}; held-out raw-cnn {cnn_acc:.3}, hog+dense {hog_acc:.3}"))
}

// 8 -------------------------------------------------------------------------

fn tree_bytes(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = tmp.path();
    std::fs::write(d.join("threats.csv"), write_threat_csv(&separable_threat_table(400, 0.02, 8)).unwrap()).unwrap();
    bar_corpus(40, 8, 3).save(&d.join("bars")).map_err(|e| e.to_string())?;

    let mut runs = Vec::new();
    for run in ["a", "b"] {
        let out = |sub: &str| format!("{run}/{sub}");
        for model in ["logistic", "svm"] {
            darkwatch(d, &["train", "--model", model, "--data", "threats.csv", "--seed", "42", "--out", &out(model)])?;
        }
        darkwatch(d, &["evaluate", "--model", &format!("{run}/svm/model.json"), "--data", "threats.csv", "--seed", "42", "--out", &out("eval")])?;
        darkwatch(d, &["eda", "--data", "threats.csv", "--out", &out("eda")])?;
        darkwatch(d, &["compare", &format!("{run}/logistic/metrics.json"), &format!("{run}/svm/metrics.json"), "--out", &out("cmp")])?;
        darkwatch(d, &["img", "train", "--corpus", "bars", "--mode", "raw-cnn", "--denoise", "gaussian:0.7", "--epochs", "20", "--seed", "9", "--out", &out("cnn")])?;
        darkwatch(d, &["img", "train", "--corpus", "bars", "--mode", "hog-linear", "--cell-size", "4", "--seed", "9", "--out", &out("hog")])?;
        runs.push(tree_bytes(&d.join(run)));
    }
    ensure!(runs[0].len() >= 15, "only {} files produced", runs[0].len());
    ensure!(runs[0].keys().eq(runs[1].keys()), "different file sets");
    for (name, bytes) in &runs[0] {
        ensure!(runs[1][name] == *bytes, "{name} differs between runs");
    }
    Ok(format!("{} model, metrics and report files byte-identical across two runs", runs[0].len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("confusion-matrix arithmetic", confusion_arithmetic),
        ("model comparison chart", comparison_chart),
        ("gradient oracles", gradient_oracles),
        ("optimizer quality", optimizer_quality),
        ("EDA oracle equivalence", eda_oracles),
        ("imaging oracles", imaging_oracles),
        ("end-to-end image pipeline", image_pipeline),
        ("CLI determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                println!("criterion {}: FAIL  {name} ({secs:.1}s): {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria passed", criteria.len(), criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
