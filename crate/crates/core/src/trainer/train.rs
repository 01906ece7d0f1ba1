use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{NeighbourhoodMode, TrainConfig};
use super::gcv::{gcv_for_matrix, residual_sum_of_squares};
use super::generate::generate_structure;
use super::lambda::{lambda_for, select_lambda_for_matrix};
use super::lasso::{l1_penalty, LassoProblem};
use super::state::{CycleRecord, TrainState};
use super::structure::{structure_step_column, structure_step_element, StepReport};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::network::EhhNetwork;

/// `J = (y - Z alpha)^T (y - Z alpha) + lambda ||alpha||_1` with `Z` rebuilt
/// from the network.
pub fn cost(net: &EhhNetwork, weights: &[f64], data: &Dataset, lambda: f64) -> Result<f64> {
    let z = net.data_matrix(&data.inputs)?;
    if weights.len() != z.ncols() {
        return Err(Error::DimensionMismatch {
            expected: z.ncols(),
            found: weights.len(),
        });
    }
    Ok(residual_sum_of_squares(&z, weights, &data.targets) + lambda * l1_penalty(weights, true))
}

/// Runs the alternating optimisation one cycle at a time, so a caller can
/// inspect or keep the state between cycles.
pub struct Trainer<'a> {
    config: TrainConfig,
    data: &'a Dataset,
    zetas: Vec<f64>,
}

impl<'a> Trainer<'a> {
    pub fn new(config: TrainConfig, data: &'a Dataset) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InsufficientData {
                needed: 2,
                available: 0,
            });
        }
        config.validate(data.dim())?;
        let zetas = config.zeta_values(&data.targets);
        Ok(Self { config, data, zetas })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    /// Random structure, one Lasso solve with GCV-selected `lambda`, then
    /// pruning. Records cycle 0.
    pub fn initial_state(&self) -> Result<TrainState> {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let net = generate_structure(&self.config, &mut rng, self.data)?;
        self.state_from(net, start)
    }

    /// Starts training from a given structure; its weights are replaced by a
    /// fresh Lasso fit.
    pub fn state_from_network(&self, net: EhhNetwork) -> Result<TrainState> {
        self.state_from(net, Instant::now())
    }

    fn state_from(&self, net: EhhNetwork, start: Instant) -> Result<TrainState> {
        let z = net.data_matrix(&self.data.inputs)?;
        let sel = select_lambda_for_matrix(&net, &z, &self.data.targets, &self.zetas, &self.config, None)?;
        let net = net.with_weights(sel.solution.weights).prune();
        let mut state = TrainState::new(net, sel.lambda, sel.zeta, self.data, self.config.penalize_intercept)?;
        self.record(&mut state, 0, start);
        Ok(state)
    }

    /// One structure pass over every intermediate column followed by one
    /// Lasso step and pruning.
    pub fn run_cycle(&self, state: &mut TrainState) -> Result<()> {
        let start = Instant::now();
        let nd = state.network.n_sources();
        let m = state.network.n_nodes();
        let mut changes = 0;
        for j in nd..m {
            let report: StepReport = match self.config.mode {
                NeighbourhoodMode::Column => structure_step_column(state, j, self.data)?,
                NeighbourhoodMode::Element => structure_step_element(state, j, self.data)?,
            };
            changes += usize::from(report.changed);
        }
        self.lasso_step(state)?;
        state.cycle += 1;
        let cycle = state.cycle;
        self.record(state, changes, start);
        debug_assert_eq!(state.history.last().map(|r| r.cycle), Some(cycle));
        Ok(())
    }

    /// Re-selects `lambda` by GCV and refits the weights, keeping the new
    /// `(lambda, alpha)` only if it does not raise the cost. Otherwise the
    /// previous `zeta` is refit at the current `l_alpha`, and failing that the
    /// weights are left alone. The network is pruned afterwards.
    fn lasso_step(&self, state: &mut TrainState) -> Result<()> {
        let y = &self.data.targets;
        let before = state.cost;
        let warm = state.network.weights().to_vec();
        let mut accepted = false;

        match select_lambda_for_matrix(&state.network, &state.z, y, &self.zetas, &self.config, Some(&warm)) {
            Ok(sel) => {
                let j_new = sel.solution.objective;
                if j_new <= before {
                    state.network.set_weights(sel.solution.weights);
                    state.lambda = sel.lambda;
                    state.zeta = sel.zeta;
                    accepted = true;
                } else {
                    log::debug!("GCV choice zeta {} raises the cost to {j_new}", sel.zeta);
                }
            }
            Err(Error::NoValidLambda) => log::warn!("no zeta produced a usable fit this cycle"),
            Err(e) => return Err(e),
        }

        if !accepted {
            let lambda = lambda_for(state.zeta, state.network.n_nodes() + 1);
            let problem = LassoProblem::new(&state.z, y)?.penalize_intercept(self.config.penalize_intercept);
            let solution = match problem.solve(lambda, &self.config.admm, Some(&warm)) {
                Ok(s) => Some(s),
                Err(Error::NonConvergence(s)) => Some(*s),
                Err(e) => return Err(e),
            };
            if let Some(s) = solution.filter(|s| s.objective <= before) {
                state.network.set_weights(s.weights);
                state.lambda = lambda;
            }
        }

        state.cost = state.scratch_cost(self.data)?;
        let pruned = state.network.prune();
        if pruned.n_nodes() != state.network.n_nodes() {
            state.network = pruned;
            let cost = state.cost;
            state.refresh(self.data)?;
            debug_assert!(state.cost <= cost);
        }
        Ok(())
    }

    fn record(&self, state: &mut TrainState, changes: usize, start: Instant) {
        let gcv = gcv_for_matrix(
            &state.z,
            state.network.weights(),
            &self.data.targets,
            state.network.n_nodes(),
            self.config.neuron_cost,
        )
        .ok()
        .map(|s| s.gcv);
        let rec = CycleRecord {
            cycle: state.cycle,
            cost: state.cost,
            active_neurons: state.network.n_nodes(),
            lambda: state.lambda,
            zeta: state.zeta,
            gcv,
            structure_changes: changes,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        log::info!(
            "cycle {}: cost {:.6e}, {} neurons, lambda {:.4e}",
            rec.cycle,
            rec.cost,
            rec.active_neurons,
            rec.lambda
        );
        state.history.push(rec);
    }

    /// Cycles until the relative cost decrease over a cycle falls below the
    /// tolerance or the cycle limit is reached.
    pub fn run(&self, state: &mut TrainState, mut observer: impl FnMut(&CycleRecord)) -> Result<()> {
        for _ in 0..self.config.max_cycles {
            let before = state.cost;
            self.run_cycle(state)?;
            observer(state.history.last().unwrap());
            let drop = before - state.cost;
            if before <= 0.0 || drop < self.config.cost_tolerance * before {
                break;
            }
        }
        Ok(())
    }
}

/// Trains a network from scratch. Returns the final (pruned) network and the
/// state holding the cost history.
pub fn train(config: &TrainConfig, data: &Dataset) -> Result<(EhhNetwork, TrainState)> {
    train_with_observer(config, data, |_| {})
}

/// Like [`train`], calling `observer` with every cycle record.
pub fn train_with_observer(
    config: &TrainConfig,
    data: &Dataset,
    mut observer: impl FnMut(&CycleRecord),
) -> Result<(EhhNetwork, TrainState)> {
    let trainer = Trainer::new(config.clone(), data)?;
    let mut state = trainer.initial_state()?;
    observer(&state.history[0]);
    trainer.run(&mut state, observer)?;
    Ok((state.network.clone(), state))
}
