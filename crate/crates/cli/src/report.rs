use std::fmt::Write as _;

use ehh::network::anova_importance;
use ehh::sysid::{build_regressors, evaluate_free_run, predict_one_step, IoData, Metrics, NarxModel};
use ehh::EhhNetwork;
use serde::{Deserialize, Serialize};

/// Several readings of "number of parameters"; no single convention is
/// standard, so all of them are reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterCounts {
    /// Output weights that are not exactly zero, bias included.
    pub nonzero_weights: usize,
    /// Nonzero weights plus one offset per source node.
    pub with_offsets: usize,
    /// Additionally two parent indices per intermediate node.
    pub with_structure: usize,
    /// All `M + 1` weights plus two parameters for each of the `M` neurons.
    pub per_neuron: usize,
}

impl ParameterCounts {
    pub fn of(net: &EhhNetwork) -> Self {
        let nonzero = net.nonzero_weights();
        let with_offsets = nonzero + net.n_sources();
        let m = net.n_nodes();
        Self {
            nonzero_weights: nonzero,
            with_offsets,
            with_structure: with_offsets + 2 * net.n_intermediates(),
            per_neuron: m + 1 + 2 * m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub samples: usize,
    pub one_step: Metrics,
    pub free_run: Option<Metrics>,
    pub active_neurons: usize,
    pub parameters: ParameterCounts,
}

/// Scores a model on a record; the free run is skipped unless requested.
pub fn evaluate(model: &NarxModel, data: &IoData, free_run: bool) -> ehh::Result<EvalReport> {
    let start = model.narx.max_lag();
    let one = predict_one_step(&model.model, data, &model.narx)?;
    let one_step = Metrics::compute(&one, &data.y[start..])?;
    let free_run = if free_run {
        evaluate_free_run(&model.model, data, &model.narx)?.metrics
    } else {
        None
    };
    Ok(EvalReport {
        samples: one.len(),
        one_step,
        free_run,
        active_neurons: model.model.n_nodes(),
        parameters: ParameterCounts::of(&model.model),
    })
}

pub fn render_eval(r: &EvalReport) -> String {
    let mut s = String::new();
    let line = |s: &mut String, name: &str, m: &Metrics| {
        writeln!(
            s,
            "{name:<10} VAF {:>8.4}  RMSE {:.6e}  ({:.2} dB)",
            m.vaf, m.rmse.linear, m.rmse.db
        )
        .unwrap();
    };
    writeln!(s, "samples    {}", r.samples).unwrap();
    line(&mut s, "one-step", &r.one_step);
    if let Some(m) = &r.free_run {
        line(&mut s, "free-run", m);
    }
    let p = &r.parameters;
    writeln!(s, "neurons    {}", r.active_neurons).unwrap();
    writeln!(
        s,
        "parameters nonzero weights {}, +offsets {}, +structure {}, per-neuron {}",
        p.nonzero_weights, p.with_offsets, p.with_structure, p.per_neuron
    )
    .unwrap();
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnovaRow {
    pub rank: usize,
    pub regressors: Vec<String>,
    pub neurons: usize,
    pub sigma: f64,
    pub gcv_without: Option<f64>,
}

/// ANOVA functions ranked by sigma, skipping groups whose neurons all have
/// zero weight.
pub fn anova_rows(model: &NarxModel, data: &IoData, d: f64, top_k: usize) -> ehh::Result<Vec<AnovaRow>> {
    let set = build_regressors(data, &model.narx)?;
    let mut report = anova_importance(&model.model, &set, d)?;
    let w = model.model.weights();
    report.entries.retain(|e| e.neurons.iter().any(|&k| w[k + 1] != 0.0));
    report.sort_by_sigma();
    let labels = model.narx.labels();
    Ok(report
        .top(top_k)
        .iter()
        .enumerate()
        .map(|(i, e)| AnovaRow {
            rank: i + 1,
            regressors: e.variables.iter().map(|&v| labels[v].clone()).collect(),
            neurons: e.neurons.len(),
            sigma: e.sigma.unwrap_or(0.0),
            gcv_without: e.gcv_without,
        })
        .collect())
}

pub fn render_anova(rows: &[AnovaRow]) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{:>4}  {:<36} {:>7} {:>12} {:>12}",
        "rank", "regressors", "neurons", "sigma", "GCV without"
    )
    .unwrap();
    for r in rows {
        let gcv = r.gcv_without.map_or("-".to_string(), |g| format!("{g:.6}"));
        writeln!(
            s,
            "{:>4}  {:<36} {:>7} {:>12.6} {:>12}",
            r.rank,
            r.regressors.join(", "),
            r.neurons,
            r.sigma,
            gcv
        )
        .unwrap();
    }
    s
}
