use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::gcv::{gcv_for_matrix, GcvScore};
use super::lasso::{LassoProblem, LassoSolution};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg;
use crate::network::EhhNetwork;

/// `zeta * sqrt(2 ln l_alpha)`.
pub fn lambda_for(zeta: f64, l_alpha: usize) -> f64 {
    let l = (l_alpha.max(1)) as f64;
    zeta * (2.0 * l.ln()).sqrt()
}

impl TrainConfig {
    /// The zeta grid in target units.
    pub fn zeta_values(&self, targets: &DVector<f64>) -> Vec<f64> {
        let scale = if self.scale_zeta_by_target_std {
            linalg::std_dev(targets.as_slice())
        } else {
            1.0
        };
        self.zeta_grid.iter().map(|z| z * scale).collect()
    }
}

/// One row of the selection table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub zeta: f64,
    pub lambda: f64,
    /// `None` when the point was excluded.
    pub gcv: Option<f64>,
    pub active_neurons: Option<usize>,
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct LambdaSelection {
    pub zeta: f64,
    pub lambda: f64,
    /// Lasso solution on the unpruned network.
    pub solution: LassoSolution,
    /// GCV of the pruned network.
    pub score: GcvScore,
    pub table: Vec<GridPoint>,
}

/// Solves the Lasso for each `zeta` (already in target units) and keeps the
/// one whose pruned model has the least GCV. Ties go to the larger `zeta`.
pub fn select_lambda(net: &EhhNetwork, data: &Dataset, zetas: &[f64], config: &TrainConfig) -> Result<LambdaSelection> {
    let z = net.data_matrix(&data.inputs)?;
    select_lambda_for_matrix(net, &z, &data.targets, zetas, config, None)
}

pub(crate) fn select_lambda_for_matrix(
    net: &EhhNetwork,
    z: &DMatrix<f64>,
    y: &DVector<f64>,
    zetas: &[f64],
    config: &TrainConfig,
    warm_start: Option<&[f64]>,
) -> Result<LambdaSelection> {
    if zetas.is_empty() {
        return Err(Error::InvalidConfig("zeta grid is empty".into()));
    }
    let problem = LassoProblem::new(z, y)?.penalize_intercept(config.penalize_intercept);
    let l_alpha = net.n_nodes() + 1;
    let mut table = Vec::with_capacity(zetas.len());
    let mut best: Option<(f64, f64, LassoSolution, GcvScore)> = None;

    for &zeta in zetas {
        let lambda = lambda_for(zeta, l_alpha);
        let mut point = GridPoint {
            zeta,
            lambda,
            gcv: None,
            active_neurons: None,
            note: None,
        };
        let solution = match problem.solve(lambda, &config.admm, warm_start) {
            Ok(s) => s,
            Err(Error::NonConvergence(s)) => {
                log::warn!(
                    "zeta {zeta}: ADMM stopped after {} iterations; point excluded",
                    s.iterations
                );
                point.note = Some("no convergence".into());
                table.push(point);
                continue;
            }
            Err(e) => return Err(e),
        };
        let (pruned, kept) = net.clone().with_weights(solution.weights.clone()).prune_with_map();
        let cols: Vec<usize> = std::iter::once(0).chain(kept.iter().map(|k| k + 1)).collect();
        let zp = z.select_columns(&cols);
        point.active_neurons = Some(pruned.n_nodes());
        match gcv_for_matrix(&zp, pruned.weights(), y, pruned.n_nodes(), config.neuron_cost) {
            Ok(score) => {
                point.gcv = Some(score.gcv);
                let better = best
                    .as_ref()
                    .is_none_or(|(g, bz, _, _)| score.gcv < *g || (score.gcv == *g && zeta > *bz));
                if better {
                    best = Some((score.gcv, zeta, solution, score));
                }
            }
            Err(Error::Saturated { complexity, .. }) => {
                log::warn!("zeta {zeta}: complexity {complexity} saturates the data; point excluded");
                point.note = Some("saturated".into());
            }
            Err(e) => return Err(e),
        }
        table.push(point);
    }

    let (_, zeta, solution, score) = best.ok_or(Error::NoValidLambda)?;
    Ok(LambdaSelection {
        zeta,
        lambda: solution.lambda,
        solution,
        score,
        table,
    })
}
