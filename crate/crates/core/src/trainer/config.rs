use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which parents of a column the structure step may change at once.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeighbourhoodMode {
    /// Search every valid parent pair of the column.
    #[default]
    Column,
    /// Change one parent at a time, holding the other.
    Element,
}

/// ADMM runs on the problem with unit-norm data-matrix columns, so `rho` is
/// relative to a unit Gram diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdmmSettings {
    pub rho: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iterations: usize,
    pub over_relaxation: f64,
    /// Rebalance `rho` when primal and dual residuals drift apart.
    pub adaptive_rho: bool,
    /// Periodically solve the optimality conditions on the current support.
    pub polish: bool,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        Self {
            rho: 0.01,
            abs_tol: 1e-6,
            rel_tol: 1e-4,
            max_iterations: 2000,
            over_relaxation: 1.5,
            adaptive_rho: false,
            polish: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Offsets per input dimension (source nodes per variable).
    pub q: usize,
    /// Total hidden-neuron budget `M`.
    pub neurons: usize,
    /// Candidate `zeta` values for `lambda = zeta * sqrt(2 ln l_alpha)`.
    pub zeta_grid: Vec<f64>,
    /// Multiply the grid by the standard deviation of the targets.
    pub scale_zeta_by_target_std: bool,
    /// Per-neuron cost `d` in the GCV complexity term.
    pub neuron_cost: f64,
    pub admm: AdmmSettings,
    pub max_cycles: usize,
    /// Stop once a cycle lowers the cost by less than this fraction.
    pub cost_tolerance: f64,
    pub mode: NeighbourhoodMode,
    pub seed: u64,
    pub penalize_intercept: bool,
    /// Consecutive rejected parent draws tolerated while generating a node.
    pub max_draws: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            q: 5,
            neurons: 70,
            zeta_grid: vec![0.001, 0.01, 0.05, 0.1, 0.5, 1.0],
            scale_zeta_by_target_std: true,
            neuron_cost: 3.0,
            admm: AdmmSettings::default(),
            max_cycles: 30,
            cost_tolerance: 1e-4,
            mode: NeighbourhoodMode::Column,
            seed: 0,
            penalize_intercept: true,
            max_draws: 1000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, input_dim: usize) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        if self.q == 0 {
            return fail("q must be at least 1".into());
        }
        if self.neurons < input_dim * self.q {
            return fail(format!(
                "neuron budget {} is below the {} source nodes",
                self.neurons,
                input_dim * self.q
            ));
        }
        if !(self.neuron_cost > 0.0) {
            return fail("neuron cost d must be positive".into());
        }
        if self.zeta_grid.is_empty() || self.zeta_grid.iter().any(|z| !(*z >= 0.0)) {
            return fail("zeta grid must be non-empty and non-negative".into());
        }
        let a = &self.admm;
        if !(a.rho > 0.0) || !(a.over_relaxation > 0.0 && a.over_relaxation < 2.0) {
            return fail("ADMM needs rho > 0 and over-relaxation in (0, 2)".into());
        }
        Ok(())
    }
}
