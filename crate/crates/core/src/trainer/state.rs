use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::gcv::residual_sum_of_squares;
use super::lasso::l1_penalty;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::network::EhhNetwork;

/// Summary of one training cycle; cycle 0 is the initial network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: usize,
    pub cost: f64,
    pub active_neurons: usize,
    pub lambda: f64,
    pub zeta: f64,
    pub gcv: Option<f64>,
    /// Columns whose parents changed during the structure pass.
    pub structure_changes: usize,
    pub wall_time_ms: f64,
}

/// A network under training together with its data matrix on the training
/// inputs. `cost` is always recomputed from scratch for the current network,
/// weights and `lambda`.
#[derive(Clone, Debug)]
pub struct TrainState {
    pub network: EhhNetwork,
    pub lambda: f64,
    pub zeta: f64,
    pub cost: f64,
    pub cycle: usize,
    pub history: Vec<CycleRecord>,
    pub(crate) penalize_intercept: bool,
    pub(crate) z: DMatrix<f64>,
}

impl TrainState {
    pub fn new(network: EhhNetwork, lambda: f64, zeta: f64, data: &Dataset, penalize_intercept: bool) -> Result<Self> {
        let z = network.data_matrix(&data.inputs)?;
        if network.weights().len() != z.ncols() {
            return Err(Error::DimensionMismatch {
                expected: z.ncols(),
                found: network.weights().len(),
            });
        }
        let mut state = Self {
            network,
            lambda,
            zeta,
            cost: 0.0,
            cycle: 0,
            history: Vec::new(),
            penalize_intercept,
            z,
        };
        state.cost = state.scratch_cost(data)?;
        Ok(state)
    }

    pub fn weights(&self) -> &[f64] {
        self.network.weights()
    }

    pub fn cost_history(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.cost).collect()
    }

    /// The cached data matrix of the current network.
    pub fn data_matrix(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub(crate) fn check_data(&self, data: &Dataset) -> Result<()> {
        if data.len() != self.z.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.z.nrows(),
                found: data.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn penalty(&self, weights: &[f64]) -> f64 {
        l1_penalty(weights, self.penalize_intercept)
    }

    /// `J` from the cached data matrix.
    pub(crate) fn scratch_cost(&self, data: &Dataset) -> Result<f64> {
        self.check_data(data)?;
        let w = self.network.weights();
        Ok(residual_sum_of_squares(&self.z, w, &data.targets) + self.lambda * self.penalty(w))
    }

    /// Rebuilds the cached data matrix after the network changed shape.
    pub(crate) fn refresh(&mut self, data: &Dataset) -> Result<()> {
        self.z = self.network.data_matrix(&data.inputs)?;
        self.cost = self.scratch_cost(data)?;
        Ok(())
    }
}
