use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use ehh::sysid::{
    build_regressors, evaluate_free_run, load_csv, narendra_li_generate_with, write_csv_to, IoData, NarxModel,
};
use ehh::trainer::{train, CycleRecord, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{RunConfig, SizeSetting};
use crate::manifest::{sha256_hex, Candidate, FileRecord, RunManifest};
use crate::report::{self, EvalReport};

pub const MODEL_FILE: &str = "model.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CYCLES_FILE: &str = "cycles.csv";

/// A replayed run produced different bytes.
#[derive(Debug)]
pub struct ReplayMismatch(pub String);

impl std::fmt::Display for ReplayMismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "replay mismatch: {}", self.0)
    }
}

impl std::error::Error for ReplayMismatch {}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn csv_bytes(data: &IoData) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv_to(&mut buf, data)?;
    Ok(buf)
}

/// Benchmark records for a config, as CSV bytes.
pub fn benchmark_csvs(cfg: &RunConfig) -> anyhow::Result<(Vec<u8>, Vec<u8>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.train.seed);
    let (tr, te) = narendra_li_generate_with(&cfg.benchmark, &mut rng);
    Ok((csv_bytes(&tr)?, csv_bytes(&te)?))
}

pub fn gen_benchmark(cfg: RunConfig, out: &Path) -> anyhow::Result<RunManifest> {
    let start = Instant::now();
    create_dir(out)?;
    let (tr, te) = benchmark_csvs(&cfg)?;
    let mut manifest = RunManifest::new("gen-benchmark", cfg);
    for (role, name, bytes) in [("train", "train.csv", &tr), ("test", "test.csv", &te)] {
        let path = out.join(name);
        write_file(&path, bytes)?;
        manifest.outputs.push(FileRecord::of(role, &path)?);
    }
    manifest.timings.total_ms = start.elapsed().as_secs_f64() * 1e3;
    manifest.save(&out.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// The selected model of a training run and how it was found.
pub struct Fit {
    pub model: NarxModel,
    pub cycles: Vec<CycleRecord>,
    pub candidates: Vec<Candidate>,
    pub selected: usize,
    pub per_candidate_ms: Vec<f64>,
}

struct Scored {
    candidate: Candidate,
    fit: Option<(NarxModel, Vec<CycleRecord>)>,
}

fn run_candidate(
    stage: &str,
    config: &TrainConfig,
    cfg: &RunConfig,
    tr: &ehh::Dataset,
    test: Option<&IoData>,
) -> Scored {
    let mut candidate = Candidate {
        stage: stage.to_string(),
        q: config.q,
        neurons: config.neurons,
        seed: config.seed,
        cycles: None,
        active_neurons: None,
        training_gcv: None,
        test_vaf: None,
        error: None,
    };
    let result = train(config, tr).and_then(|(net, state)| Ok((NarxModel::new(cfg.narx, net)?, state)));
    match result {
        Ok((model, state)) => {
            candidate.cycles = Some(state.cycle);
            candidate.active_neurons = Some(model.model.n_nodes());
            candidate.training_gcv = state.history.last().and_then(|r| r.gcv);
            if let Some(te) = test {
                match evaluate_free_run(&model.model, te, &cfg.narx) {
                    Ok(sim) => candidate.test_vaf = sim.metrics.map(|m| m.vaf),
                    Err(e) => log::warn!("seed {}: free run on test data failed: {e}", config.seed),
                }
            }
            log::info!(
                "{stage} q={} M={} seed={}: gcv {:?}, test VAF {:?}",
                config.q,
                config.neurons,
                config.seed,
                candidate.training_gcv,
                candidate.test_vaf
            );
            Scored {
                candidate,
                fit: Some((model, state.history)),
            }
        }
        Err(e) => {
            log::warn!(
                "{stage} q={} M={} seed={} failed: {e}",
                config.q,
                config.neurons,
                config.seed
            );
            candidate.error = Some(e.to_string());
            Scored { candidate, fit: None }
        }
    }
}

/// Lower is better; failed candidates never win.
fn gcv_key(c: &Candidate) -> f64 {
    c.training_gcv.unwrap_or(f64::INFINITY)
}

/// Optional size sweep by training GCV, then restarts with seeds `seed + r`,
/// keeping the best test VAF when test data is given and the least training
/// GCV otherwise.
pub fn fit(cfg: &RunConfig, train_io: &IoData, test_io: Option<&IoData>) -> anyhow::Result<Fit> {
    cfg.check()?;
    let data = build_regressors(train_io, &cfg.narx)?;
    let mut candidates = Vec::new();
    let mut per_candidate_ms = Vec::new();
    let mut last_error: Option<String> = None;

    let mut base = cfg.train.clone();
    if !cfg.grid.is_empty() {
        let mut best: Option<(f64, SizeSetting)> = None;
        for &size in &cfg.grid {
            let t = Instant::now();
            let s = run_candidate("grid", &cfg.sized(size), cfg, &data, None);
            per_candidate_ms.push(t.elapsed().as_secs_f64() * 1e3);
            let key = gcv_key(&s.candidate);
            if s.fit.is_some() && best.is_none_or(|(b, _)| key < b) {
                best = Some((key, size));
            }
            last_error = s.candidate.error.clone().or(last_error);
            candidates.push(s.candidate);
        }
        let Some((_, size)) = best else {
            return Err(anyhow::anyhow!(
                "every grid candidate failed; last error: {}",
                last_error.unwrap_or_default()
            ))
            .context(TrainingFailed);
        };
        base = cfg.sized(size);
    }

    let mut best: Option<(usize, NarxModel, Vec<CycleRecord>)> = None;
    for r in 0..cfg.restarts {
        let config = TrainConfig {
            seed: cfg.train.seed.wrapping_add(r as u64),
            ..base.clone()
        };
        let t = Instant::now();
        let s = run_candidate("restart", &config, cfg, &data, test_io);
        per_candidate_ms.push(t.elapsed().as_secs_f64() * 1e3);
        let index = candidates.len();
        let better = |prev: &Candidate| match test_io {
            Some(_) => s.candidate.test_vaf.unwrap_or(f64::NEG_INFINITY) > prev.test_vaf.unwrap_or(f64::NEG_INFINITY),
            None => gcv_key(&s.candidate) < gcv_key(prev),
        };
        if let Some((model, cycles)) = s.fit {
            if best.as_ref().is_none_or(|(i, _, _)| better(&candidates[*i])) {
                best = Some((index, model, cycles));
            }
        }
        last_error = s.candidate.error.clone().or(last_error);
        candidates.push(s.candidate);
    }
    let Some((selected, model, cycles)) = best else {
        return Err(anyhow::anyhow!(
            "every restart failed; last error: {}",
            last_error.unwrap_or_default()
        ))
        .context(TrainingFailed);
    };
    Ok(Fit {
        model,
        cycles,
        candidates,
        selected,
        per_candidate_ms,
    })
}

/// Marker for training failures without an underlying library error.
#[derive(Debug)]
pub struct TrainingFailed;

impl std::fmt::Display for TrainingFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("training failed")
    }
}

impl std::error::Error for TrainingFailed {}

pub fn model_json(model: &NarxModel) -> anyhow::Result<String> {
    Ok(model.to_json()?)
}

fn cycles_csv(cycles: &[CycleRecord]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in cycles {
        w.serialize(c)?;
    }
    Ok(w.into_inner()?)
}

pub fn train_cmd(cfg: RunConfig, data: &Path, test: Option<&Path>, out: &Path) -> anyhow::Result<RunManifest> {
    let start = Instant::now();
    let train_io = load_csv(data, cfg.columns).with_context(|| format!("loading {}", data.display()))?;
    let test_io = test
        .map(|p| load_csv(p, cfg.columns).with_context(|| format!("loading {}", p.display())))
        .transpose()?;
    create_dir(out)?;
    let mut manifest = RunManifest::new("train", cfg);
    manifest.inputs.push(FileRecord::of("train", data)?);
    if let Some(p) = test {
        manifest.inputs.push(FileRecord::of("test", p)?);
    }

    let result = fit(&manifest.config, &train_io, test_io.as_ref());
    let fit = match result {
        Ok(f) => f,
        Err(e) => {
            // keep whatever was recorded so the failure can be inspected
            manifest.timings.total_ms = start.elapsed().as_secs_f64() * 1e3;
            manifest.save(&out.join(MANIFEST_FILE))?;
            return Err(e);
        }
    };

    let model_path = out.join(MODEL_FILE);
    write_file(&model_path, model_json(&fit.model)?.as_bytes())?;
    let cycles_path = out.join(CYCLES_FILE);
    write_file(&cycles_path, &cycles_csv(&fit.cycles)?)?;
    manifest.outputs.push(FileRecord::of("model", &model_path)?);
    manifest.outputs.push(FileRecord::of("cycles", &cycles_path)?);
    manifest.seed = fit.candidates[fit.selected].seed;
    manifest.training_fit = Some(report::evaluate(&fit.model, &train_io, false)?);
    manifest.test_report = match &test_io {
        Some(te) => report::evaluate(&fit.model, te, true).ok(),
        None => None,
    };
    manifest.candidates = fit.candidates;
    manifest.selected = Some(fit.selected);
    manifest.cycles = fit.cycles;
    manifest.timings.per_candidate_ms = fit.per_candidate_ms;
    manifest.timings.total_ms = start.elapsed().as_secs_f64() * 1e3;
    manifest.save(&out.join(MANIFEST_FILE))?;
    Ok(manifest)
}

pub fn load_model(path: &Path) -> anyhow::Result<NarxModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    NarxModel::from_json(&text).with_context(|| format!("loading model {}", path.display()))
}

pub fn eval_cmd(model: &Path, data: &Path, cfg: &RunConfig) -> anyhow::Result<EvalReport> {
    let model = load_model(model)?;
    let io = load_csv(data, cfg.columns).with_context(|| format!("loading {}", data.display()))?;
    Ok(report::evaluate(&model, &io, true)?)
}

pub fn anova_cmd(model: &Path, data: &Path, cfg: &RunConfig, top_k: usize) -> anyhow::Result<Vec<report::AnovaRow>> {
    let model = load_model(model)?;
    let io = load_csv(data, cfg.columns).with_context(|| format!("loading {}", data.display()))?;
    Ok(report::anova_rows(&model, &io, cfg.train.neuron_cost, top_k)?)
}

/// Writes `k,y,y_s` rows (1-based `k`), optionally only the last `window`.
pub fn export_cmd(
    model: &Path,
    data: &Path,
    cfg: &RunConfig,
    out: &Path,
    window: Option<usize>,
) -> anyhow::Result<usize> {
    let model = load_model(model)?;
    let io = load_csv(data, cfg.columns).with_context(|| format!("loading {}", data.display()))?;
    let simulated = if io.len() > model.narx.max_lag() {
        evaluate_free_run(&model.model, &io, &model.narx)?.simulated
    } else {
        Vec::new()
    };
    let skip = window.map_or(0, |w| simulated.len().saturating_sub(w));
    let mut w = csv::Writer::from_path(out).with_context(|| format!("writing {}", out.display()))?;
    w.write_record(["k", "y", "y_s"])?;
    let mut rows = 0;
    for (t, ys) in simulated.iter().enumerate().skip(skip) {
        w.serialize((t + 1, io.y[t], ys))?;
        rows += 1;
    }
    w.flush()?;
    Ok(rows)
}

/// Re-runs a recorded command and checks that its outputs hash the same.
pub fn replay_cmd(manifest_path: &Path) -> anyhow::Result<()> {
    let manifest = RunManifest::load(manifest_path)?;
    let expect = |role: &str| -> anyhow::Result<String> {
        manifest
            .output(role)
            .map(|f| f.sha256.clone())
            .ok_or_else(|| anyhow::Error::new(ReplayMismatch(format!("manifest records no {role} output"))))
    };
    let check = |role: &str, bytes: &[u8]| -> anyhow::Result<()> {
        let want = expect(role)?;
        let got = sha256_hex(bytes);
        if got != want {
            bail!(ReplayMismatch(format!("{role}: expected {want}, got {got}")));
        }
        Ok(())
    };
    match manifest.command.as_str() {
        "gen-benchmark" => {
            let (tr, te) = benchmark_csvs(&manifest.config)?;
            check("train", &tr)?;
            check("test", &te)
        }
        "train" => {
            let input = |role: &str| -> anyhow::Result<Option<IoData>> {
                let Some(rec) = manifest.input(role) else {
                    return Ok(None);
                };
                let got = crate::manifest::sha256_file(&rec.path)?;
                if got != rec.sha256 {
                    bail!(ReplayMismatch(format!("{} changed since the run", rec.path.display())));
                }
                Ok(Some(load_csv(&rec.path, manifest.config.columns)?))
            };
            let Some(train_io) = input("train")? else {
                bail!(ReplayMismatch("manifest records no training data".into()));
            };
            let test_io = input("test")?;
            let fit = fit(&manifest.config, &train_io, test_io.as_ref())?;
            check("model", model_json(&fit.model)?.as_bytes())
        }
        other => bail!(ReplayMismatch(format!("cannot replay command {other:?}"))),
    }
}

pub fn default_out(dir: Option<PathBuf>) -> PathBuf {
    dir.unwrap_or_else(|| PathBuf::from("."))
}
