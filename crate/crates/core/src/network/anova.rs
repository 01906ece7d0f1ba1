use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::EhhNetwork;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg;
use crate::trainer::gcv::{gcv_from_parts, residual_sum_of_squares};

/// One ANOVA function: all neurons depending on exactly `variables`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnovaEntry {
    pub variables: BTreeSet<usize>,
    pub neurons: Vec<usize>,
    /// Population standard deviation of the function over the training set.
    pub sigma: Option<f64>,
    /// GCV of a least-squares refit without this function's neurons.
    pub gcv_without: Option<f64>,
    /// The refit behind `gcv_without` was rank deficient.
    pub singular_refit: bool,
}

impl AnovaEntry {
    /// Weighted sum of the member neurons, given per-node outputs.
    pub fn evaluate(&self, net: &EhhNetwork, nodes: &[f64]) -> f64 {
        let mut f = 0.0;
        for &k in &self.neurons {
            f += net.weights[k + 1] * nodes[k];
        }
        f
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AnovaReport {
    pub entries: Vec<AnovaEntry>,
}

impl AnovaReport {
    pub fn entry(&self, variables: &BTreeSet<usize>) -> Option<&AnovaEntry> {
        self.entries.iter().find(|e| &e.variables == variables)
    }

    /// Orders entries by decreasing sigma; entries without sigma go last.
    pub fn sort_by_sigma(&mut self) {
        self.entries.sort_by(|a, b| {
            let key = |e: &AnovaEntry| e.sigma.unwrap_or(f64::NEG_INFINITY);
            key(b).total_cmp(&key(a))
        });
    }

    pub fn top(&self, k: usize) -> &[AnovaEntry] {
        &self.entries[..k.min(self.entries.len())]
    }
}

/// Groups every neuron by its variable set. Variable sets are read off the
/// interaction matrix: the source nodes reaching a neuron name its variables.
pub fn anova_decompose(net: &EhhNetwork) -> AnovaReport {
    let ir = net.interaction_matrix();
    let mut groups: BTreeMap<(usize, Vec<usize>), Vec<usize>> = BTreeMap::new();
    for j in 0..net.n_nodes() {
        let vars: BTreeSet<usize> = if net.is_source(j) {
            BTreeSet::from([net.sources[j].variable])
        } else {
            ir.sources_of(j).iter().map(|&s| net.sources[s].variable).collect()
        };
        let key = (vars.len(), vars.into_iter().collect());
        groups.entry(key).or_default().push(j);
    }
    AnovaReport {
        entries: groups
            .into_iter()
            .map(|((_, vars), neurons)| AnovaEntry {
                variables: vars.into_iter().collect(),
                neurons,
                sigma: None,
                gcv_without: None,
                singular_refit: false,
            })
            .collect(),
    }
}

/// Decomposes the network and scores each ANOVA function on training data.
///
/// `gcv_without` refits the remaining columns by ordinary least squares and
/// counts the remaining neurons in the complexity term; it is `None` when that
/// model saturates the sample count.
pub fn anova_importance(net: &EhhNetwork, data: &Dataset, d: f64) -> Result<AnovaReport> {
    let z = net.data_matrix(&data.inputs)?;
    if net.weights.len() != z.ncols() {
        return Err(Error::DimensionMismatch {
            expected: z.ncols(),
            found: net.weights.len(),
        });
    }
    let mut report = anova_decompose(net);
    let ns = z.nrows();
    for entry in &mut report.entries {
        let values: Vec<f64> = (0..ns)
            .map(|i| {
                let mut f = 0.0;
                for &k in &entry.neurons {
                    f += net.weights[k + 1] * z[(i, k + 1)];
                }
                f
            })
            .collect();
        entry.sigma = Some(linalg::std_dev(&values));

        let keep: Vec<usize> = (0..z.ncols())
            .filter(|&c| c == 0 || !entry.neurons.contains(&(c - 1)))
            .collect();
        let reduced = DMatrix::from_fn(ns, keep.len(), |i, c| z[(i, keep[c])]);
        let fit = linalg::least_squares(&reduced, &data.targets);
        entry.singular_refit = fit.rank_deficient(keep.len());
        let rss = residual_sum_of_squares(&reduced, fit.coefficients.as_slice(), &data.targets);
        entry.gcv_without = match gcv_from_parts(rss, fit.rank, keep.len() - 1, ns, d) {
            Ok(s) => Some(s.gcv),
            Err(Error::Saturated { .. }) => {
                log::warn!("GCV without {:?} saturates; left unset", entry.variables);
                None
            }
            Err(e) => return Err(e),
        };
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::super::tests::example_network;
    use super::*;
    use crate::network::{Normalizer, SourceNode};

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn example_groups() {
        let net = example_network([0.1; 4], vec![1.0; 9]);
        let report = anova_decompose(&net);
        let keys: Vec<_> = report.entries.iter().map(|e| e.variables.clone()).collect();
        let expect = [
            set(&[0]),
            set(&[1]),
            set(&[2]),
            set(&[3]),
            set(&[0, 2]),
            set(&[0, 3]),
            set(&[0, 1, 2]),
            set(&[0, 1, 3]),
        ];
        assert_eq!(keys, expect);
    }

    #[test]
    fn linear_network_has_univariate_groups_only() {
        let sources = (0..3).map(|i| SourceNode::new(i, 0.0)).collect();
        let net = EhhNetwork::new(Normalizer::identity(3), sources, vec![], vec![1.0; 4]).unwrap();
        let report = anova_decompose(&net);
        assert_eq!(report.entries.len(), 3);
        assert!(report.entries.iter().all(|e| e.variables.len() == 1));
    }

    fn grid_data(net_dim: usize) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| (0..net_dim).map(|d| ((i * (d + 3)) % 17) as f64 / 16.0).collect())
            .collect();
        let y = rows.iter().map(|r| r.iter().sum::<f64>().sin()).collect();
        Dataset::from_rows(&rows, y).unwrap()
    }

    #[test]
    fn zero_weight_group_has_zero_sigma() {
        let mut w = vec![0.5; 9];
        w[5] = 0.0; // C1, the only {1, 3} neuron
        let net = example_network([0.1; 4], w);
        let report = anova_importance(&net, &grid_data(4), 3.0).unwrap();
        assert_eq!(report.entry(&set(&[0, 2])).unwrap().sigma, Some(0.0));
    }

    #[test]
    fn removing_the_only_group_leaves_the_constant_model() {
        let sources = vec![SourceNode::new(0, 0.0), SourceNode::new(0, 0.5)];
        let data = grid_data(1);
        let net = EhhNetwork::new(
            Normalizer::fit(&data.inputs).unwrap(),
            sources,
            vec![],
            vec![0.2, 1.0, -1.0],
        )
        .unwrap();
        let report = anova_importance(&net, &data, 3.0).unwrap();
        assert_eq!(report.entries.len(), 1);
        let y = data.targets.as_slice();
        let m = linalg::mean(y);
        let rss: f64 = y.iter().map(|v| (v - m) * (v - m)).sum();
        let expected = gcv_from_parts(rss, 1, 0, y.len(), 3.0).unwrap().gcv;
        let got = report.entries[0].gcv_without.unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected, "{got} vs {expected}");
        assert!(!report.entries[0].singular_refit);
    }

    #[test]
    fn sorting_and_top_k() {
        let net = example_network([0.1, 0.2, 0.3, 0.0], (0..9).map(|k| k as f64).collect());
        let mut report = anova_importance(&net, &grid_data(4), 3.0).unwrap();
        report.sort_by_sigma();
        let sig: Vec<f64> = report.entries.iter().map(|e| e.sigma.unwrap()).collect();
        assert!(sig.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(report.top(100).len(), report.entries.len());
        assert_eq!(report.top(3).len(), 3);
    }
}
