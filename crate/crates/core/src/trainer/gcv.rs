use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg;
use crate::network::EhhNetwork;

/// Generalised cross-validation score and the quantities behind it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GcvScore {
    pub gcv: f64,
    pub rss: f64,
    /// Numerical column rank of the data matrix (the hat-matrix trace).
    pub rank: usize,
    /// `rank + d * M`.
    pub complexity: f64,
}

/// `RSS / (N (1 - C/N)^2)` with `C = rank + d * neurons`.
pub fn gcv_from_parts(rss: f64, rank: usize, neurons: usize, samples: usize, d: f64) -> Result<GcvScore> {
    let complexity = rank as f64 + d * neurons as f64;
    if complexity >= samples as f64 {
        return Err(Error::Saturated { complexity, samples });
    }
    let ns = samples as f64;
    let shrink = 1.0 - complexity / ns;
    Ok(GcvScore {
        gcv: rss / (ns * shrink * shrink),
        rss,
        rank,
        complexity,
    })
}

pub(crate) fn residual_sum_of_squares(z: &DMatrix<f64>, weights: &[f64], y: &DVector<f64>) -> f64 {
    let mut rss = 0.0;
    for i in 0..z.nrows() {
        let mut f = 0.0;
        for (k, w) in weights.iter().enumerate() {
            f += z[(i, k)] * w;
        }
        let r = y[i] - f;
        rss += r * r;
    }
    rss
}

/// GCV of a network with the given weights. `M` is the number of hidden
/// neurons in the network, so prune first to count only active ones.
pub fn gcv(net: &EhhNetwork, weights: &[f64], data: &Dataset, d: f64) -> Result<GcvScore> {
    let z = net.data_matrix(&data.inputs)?;
    if weights.len() != z.ncols() {
        return Err(Error::DimensionMismatch {
            expected: z.ncols(),
            found: weights.len(),
        });
    }
    gcv_for_matrix(&z, weights, &data.targets, net.n_nodes(), d)
}

pub(crate) fn gcv_for_matrix(
    z: &DMatrix<f64>,
    weights: &[f64],
    y: &DVector<f64>,
    neurons: usize,
    d: f64,
) -> Result<GcvScore> {
    let rss = residual_sum_of_squares(z, weights, y);
    gcv_from_parts(rss, linalg::numerical_rank(z), neurons, z.nrows(), d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{EhhNetwork, Normalizer, SourceNode};

    #[test]
    fn independent_columns_use_full_rank() {
        let s = gcv_from_parts(2.0, 5, 4, 100, 3.0).unwrap();
        assert_eq!(s.complexity, 5.0 + 12.0);
        let shrink = 1.0 - 17.0 / 100.0;
        assert_eq!(s.gcv, 2.0 / (100.0 * shrink * shrink));
    }

    #[test]
    fn perfect_fit_scores_zero() {
        assert_eq!(gcv_from_parts(0.0, 3, 2, 50, 3.0).unwrap().gcv, 0.0);
    }

    #[test]
    fn saturation() {
        assert!(matches!(
            gcv_from_parts(1.0, 10, 10, 40, 3.0),
            Err(Error::Saturated { .. })
        ));
    }

    #[test]
    fn duplicated_column_reduces_rank_by_one() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x, (x * 7.0).sin()]).collect();
        let y: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let data = Dataset::from_rows(&rows, y).unwrap();
        let norm = Normalizer::fit(&data.inputs).unwrap();
        let independent = EhhNetwork::new(
            norm.clone(),
            vec![SourceNode::new(0, 0.0), SourceNode::new(1, 0.3)],
            vec![],
            vec![0.0; 3],
        )
        .unwrap();
        // a second hinge at offset 0 on variable 0 repeats column 1
        let duplicated = EhhNetwork::from_parts(
            norm,
            vec![
                SourceNode::new(0, 0.0),
                SourceNode::new(1, 0.3),
                SourceNode::new(0, 0.0),
            ],
            vec![],
            vec![0.0; 4],
        );
        let a = gcv(&independent, &[0.0; 3], &data, 3.0).unwrap();
        let b = gcv(&duplicated, &[0.0; 4], &data, 3.0).unwrap();
        assert_eq!(a.rank, 3);
        // M + 1 = 4 columns but only rank 3
        assert_eq!(b.rank, duplicated.n_nodes());
    }
}
