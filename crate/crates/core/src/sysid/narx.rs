use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::metrics::Metrics;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::network::EhhNetwork;

/// Default bound on simulated outputs before a free run is declared unstable.
pub const DEFAULT_OVERFLOW_GUARD: f64 = 1e6;

/// Regressor layout `[y(k-1)..y(k-n_b), u(k), u(k-1)..u(k-n_a)]`, with `u(k)`
/// optional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NarxSpec {
    /// `n_b`.
    pub output_lags: usize,
    /// `n_a`.
    pub input_lags: usize,
    pub include_current_input: bool,
}

impl NarxSpec {
    pub fn new(output_lags: usize, input_lags: usize, include_current_input: bool) -> Result<Self> {
        let spec = Self {
            output_lags,
            input_lags,
            include_current_input,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `y(k-1..k-3), u(k-1..k-3)`.
    pub fn narendra_li() -> Self {
        Self {
            output_lags: 3,
            input_lags: 3,
            include_current_input: false,
        }
    }

    /// `y(k-1..k-15), u(k..k-14)`.
    pub fn bouc_wen() -> Self {
        Self {
            output_lags: 15,
            input_lags: 14,
            include_current_input: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.output_lags == 0 {
            return Err(Error::InvalidConfig("at least one output lag is required".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.output_lags + self.input_lags + usize::from(self.include_current_input)
    }

    pub fn max_lag(&self) -> usize {
        self.output_lags.max(self.input_lags)
    }

    pub fn labels(&self) -> Vec<String> {
        let mut out: Vec<String> = (1..=self.output_lags).map(|i| format!("y(k-{i})")).collect();
        if self.include_current_input {
            out.push("u(k)".into());
        }
        out.extend((1..=self.input_lags).map(|i| format!("u(k-{i})")));
        out
    }

    /// Regressor for target index `t` (0-based), reading past outputs from `y`.
    pub fn regressor(&self, y: &[f64], u: &[f64], t: usize) -> Vec<f64> {
        let mut phi = Vec::with_capacity(self.dim());
        phi.extend((1..=self.output_lags).map(|i| y[t - i]));
        if self.include_current_input {
            phi.push(u[t]);
        }
        phi.extend((1..=self.input_lags).map(|i| u[t - i]));
        phi
    }

    fn check_model(&self, model: &EhhNetwork) -> Result<()> {
        if model.input_dim() != self.dim() {
            return Err(Error::SpecMismatch {
                spec: self.dim(),
                model: model.input_dim(),
            });
        }
        Ok(())
    }
}

/// Measured input and output sequences of equal length.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IoData {
    pub u: Vec<f64>,
    pub y: Vec<f64>,
}

impl IoData {
    pub fn new(u: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if u.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: u.len(),
                found: y.len(),
            });
        }
        Ok(Self { u, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    fn check_length(&self, spec: &NarxSpec) -> Result<()> {
        if self.u.len() != self.y.len() {
            return Err(Error::DimensionMismatch {
                expected: self.u.len(),
                found: self.y.len(),
            });
        }
        if self.len() <= spec.max_lag() {
            return Err(Error::InsufficientData {
                needed: spec.max_lag() + 1,
                available: self.len(),
            });
        }
        Ok(())
    }
}

/// One regressor row per target `y(k)`, `k = max_lag..N-1` (0-based).
pub fn build_regressors(data: &IoData, spec: &NarxSpec) -> Result<Dataset> {
    spec.validate()?;
    data.check_length(spec)?;
    let start = spec.max_lag();
    let rows = data.len() - start;
    let mut phi = DMatrix::zeros(rows, spec.dim());
    for r in 0..rows {
        for (c, v) in spec.regressor(&data.y, &data.u, start + r).into_iter().enumerate() {
            phi[(r, c)] = v;
        }
    }
    Dataset::new(phi, data.y[start..].to_vec().into())
}

/// `yhat(k) = f(phi(k))` from measured lags, for `k = max_lag..N-1`.
pub fn predict_one_step(model: &EhhNetwork, data: &IoData, spec: &NarxSpec) -> Result<Vec<f64>> {
    spec.check_model(model)?;
    let set = build_regressors(data, spec)?;
    Ok(model.predict_batch(&set.inputs)?.iter().copied().collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    /// Full-length output; the first `max_lag` entries are the seeds.
    pub simulated: Vec<f64>,
    /// Regressor used at each simulated step.
    pub regressors: Vec<Vec<f64>>,
    /// Against measured outputs over the simulated steps, when available.
    pub metrics: Option<Metrics>,
}

impl SimResult {
    /// Simulated outputs excluding the seeds.
    pub fn simulated_tail(&self, max_lag: usize) -> &[f64] {
        &self.simulated[max_lag..]
    }
}

/// Feeds the model's own raw outputs back as output lags. Seeds are the
/// first `max_lag` entries of `seed_outputs`.
pub fn simulate_free_run(
    model: &EhhNetwork,
    u: &[f64],
    seed_outputs: &[f64],
    spec: &NarxSpec,
    guard: f64,
) -> Result<SimResult> {
    spec.validate()?;
    spec.check_model(model)?;
    let start = spec.max_lag();
    if seed_outputs.len() < start {
        return Err(Error::InsufficientData {
            needed: start,
            available: seed_outputs.len(),
        });
    }
    let mut ys = Vec::with_capacity(u.len());
    ys.extend_from_slice(&seed_outputs[..start.min(u.len())]);
    let mut regressors = Vec::with_capacity(u.len().saturating_sub(start));
    for t in start..u.len() {
        let phi = spec.regressor(&ys, u, t);
        let v = model.predict(&phi)?;
        if !v.is_finite() || v.abs() > guard {
            return Err(Error::NumericOverflow { step: t, value: v });
        }
        ys.push(v);
        regressors.push(phi);
    }
    Ok(SimResult {
        simulated: ys,
        regressors,
        metrics: None,
    })
}

/// Free run seeded from the measured record, scored over the simulated steps.
pub fn evaluate_free_run(model: &EhhNetwork, data: &IoData, spec: &NarxSpec) -> Result<SimResult> {
    data.check_length(spec)?;
    let mut sim = simulate_free_run(model, &data.u, &data.y, spec, DEFAULT_OVERFLOW_GUARD)?;
    let start = spec.max_lag();
    sim.metrics = Some(Metrics::compute(&sim.simulated[start..], &data.y[start..])?);
    Ok(sim)
}

/// A trained network together with the regressor layout it expects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NarxModel {
    pub narx: NarxSpec,
    pub model: EhhNetwork,
}

impl NarxModel {
    pub fn new(narx: NarxSpec, model: EhhNetwork) -> Result<Self> {
        narx.check_model(&model)?;
        Ok(Self { narx, model })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        m.narx.check_model(&m.model)?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{IntermediateNode, Normalizer, SourceNode};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dimensions_and_labels() {
        let nl = NarxSpec::narendra_li();
        assert_eq!(nl.dim(), 6);
        assert_eq!(
            nl.labels(),
            ["y(k-1)", "y(k-2)", "y(k-3)", "u(k-1)", "u(k-2)", "u(k-3)"]
        );
        let bw = NarxSpec::bouc_wen();
        assert_eq!(bw.dim(), 30);
        assert_eq!(bw.labels()[15], "u(k)");
        assert_eq!(bw.labels()[29], "u(k-14)");
        assert!(NarxSpec::new(0, 2, true).is_err());
    }

    #[test]
    fn short_record_row_count() {
        let spec = NarxSpec::new(1, 0, true).unwrap();
        let data = IoData::new(vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]).unwrap();
        let set = build_regressors(&data, &spec).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.inputs.row(0).iter().copied().collect::<Vec<_>>(), [4.0, 2.0]);
        assert_eq!(set.targets[1], 6.0);
        let tiny = IoData::new(vec![1.0], vec![1.0]).unwrap();
        assert!(matches!(
            build_regressors(&tiny, &spec),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn rows_match_index_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (nb, na, cur) in [(3, 3, false), (2, 5, true), (4, 0, true), (1, 1, false)] {
            let spec = NarxSpec::new(nb, na, cur).unwrap();
            let n = 40;
            let u: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let set = build_regressors(&IoData::new(u.clone(), y.clone()).unwrap(), &spec).unwrap();
            let ml = nb.max(na);
            assert_eq!(set.len(), n - ml);
            for k in ml..n {
                let r = k - ml;
                let mut c = 0;
                for i in 1..=nb {
                    assert_eq!(set.inputs[(r, c)], y[k - i]);
                    c += 1;
                }
                if cur {
                    assert_eq!(set.inputs[(r, c)], u[k]);
                    c += 1;
                }
                for i in 1..=na {
                    assert_eq!(set.inputs[(r, c)], u[k - i]);
                    c += 1;
                }
                assert_eq!(set.targets[r], y[k]);
            }
        }
    }

    /// `y(k) = 0.5 y(k-1)` as a single hinge at offset 0 on inputs in [0, 1].
    fn halving_model() -> EhhNetwork {
        let norm = Normalizer {
            min: vec![0.0, -1.0],
            max: vec![1.0, 1.0],
        };
        EhhNetwork::new(
            norm,
            vec![SourceNode::new(0, 0.0), SourceNode::new(1, 0.0)],
            vec![],
            vec![0.0, 0.5, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn geometric_free_run() {
        let spec = NarxSpec::new(1, 1, false).unwrap();
        let u = vec![0.0; 12];
        let sim = simulate_free_run(&halving_model(), &u, &[1.0], &spec, 1e6).unwrap();
        for (k, v) in sim.simulated.iter().enumerate() {
            assert!((v - 0.5f64.powi(k as i32)).abs() < 1e-15);
        }
        assert_eq!(sim.regressors.len(), 11);
    }

    #[test]
    fn output_free_model_simulates_like_one_step() {
        let spec = NarxSpec::new(2, 2, true).unwrap();
        let sources = vec![
            SourceNode::new(2, 0.3),
            SourceNode::new(3, 0.1),
            SourceNode::new(0, 0.5),
        ];
        let net = EhhNetwork::new(
            Normalizer::identity(5),
            sources,
            vec![IntermediateNode::new(0, 1)],
            vec![0.2, 1.0, -0.7, 0.0, 2.0],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u: Vec<f64> = (0..30).map(|_| rng.random()).collect();
        let y: Vec<f64> = (0..30).map(|_| rng.random()).collect();
        let data = IoData::new(u, y).unwrap();
        let one = predict_one_step(&net, &data, &spec).unwrap();
        let sim = simulate_free_run(&net, &data.u, &data.y, &spec, 1e6).unwrap();
        assert_eq!(sim.simulated_tail(2), one.as_slice());
    }

    #[test]
    fn bias_only_model_predicts_constant() {
        let spec = NarxSpec::new(1, 0, false).unwrap();
        let net = EhhNetwork::new(
            Normalizer::identity(1),
            vec![SourceNode::new(0, 0.0)],
            vec![],
            vec![3.5, 0.0],
        )
        .unwrap();
        let data = IoData::new(vec![0.0; 5], vec![0.1, 0.4, 0.2, 0.9, 0.3]).unwrap();
        assert_eq!(predict_one_step(&net, &data, &spec).unwrap(), vec![3.5; 4]);
    }

    #[test]
    fn spec_mismatch() {
        let spec = NarxSpec::narendra_li();
        let data = IoData::new(vec![0.0; 10], vec![0.0; 10]).unwrap();
        assert!(matches!(
            predict_one_step(&halving_model(), &data, &spec),
            Err(Error::SpecMismatch { spec: 6, model: 2 })
        ));
    }

    #[test]
    fn unstable_model_overflows() {
        let spec = NarxSpec::new(1, 1, false).unwrap();
        let mut net = halving_model();
        net.set_weights(vec![0.0, 3.0, 0.0]);
        let err = simulate_free_run(&net, &[0.0; 40], &[1.0], &spec, 1e6).unwrap_err();
        assert!(matches!(err, Error::NumericOverflow { step: 13, .. }));
    }
}
