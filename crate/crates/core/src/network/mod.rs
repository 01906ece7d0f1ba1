//! The efficient hinging hyperplanes network.
//!
//! The hidden layer is a DAG stored as an ordered node list: first the source
//! nodes, each a univariate hinge `max{0, x_v - beta}`, then the intermediate
//! nodes, each the `min` of two earlier nodes. Node indices are 0-based and
//! node `k` carries output weight `weights[k + 1]`; `weights[0]` is the bias.
//!
//! Because every intermediate node only references earlier indices, a single
//! pass in index order evaluates the whole layer.

mod anova;
mod document;
mod full;
mod graph;
mod normalize;
mod prune;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};

pub use anova::{anova_decompose, anova_importance, AnovaEntry, AnovaReport};
pub use document::{ModelDocument, MODEL_VERSION};
pub use full::{full_connection_network, uniform_offsets, DEFAULT_NEURON_CAP};
pub use graph::{AdjacencyMatrix, BinaryMatrix, InteractionMatrix};
pub use normalize::Normalizer;

/// Output matrix of all neurons over a sample set: column 0 is the constant
/// bias column, column `k + 1` holds node `k`.
pub type DataMatrix = DMatrix<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceNode {
    pub variable: usize,
    pub offset: f64,
}

impl SourceNode {
    pub fn new(variable: usize, offset: f64) -> Self {
        Self { variable, offset }
    }

    /// `max{0, x_v - beta}` on a normalised input.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (x[self.variable] - self.offset).max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntermediateNode {
    pub parents: [usize; 2],
}

impl IntermediateNode {
    pub fn new(a: usize, b: usize) -> Self {
        Self { parents: [a, b] }
    }
}

/// A structural problem found by [`EhhNetwork::validate`] or
/// [`AdjacencyMatrix::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    OffsetOutOfRange {
        node: usize,
        offset: f64,
    },
    VariableOutOfRange {
        node: usize,
        variable: usize,
    },
    /// A parent index is not strictly below the node (Rule 1).
    ParentOrder {
        node: usize,
        parent: usize,
    },
    RepeatedParent {
        node: usize,
    },
    /// The two parents share input variables (Rule 2).
    SharedVariables {
        node: usize,
        shared: Vec<usize>,
    },
    ColumnDegree {
        node: usize,
        count: usize,
    },
    SourceHasParents {
        node: usize,
    },
    NotUpperTriangular {
        row: usize,
        col: usize,
    },
    WeightCount {
        expected: usize,
        found: usize,
    },
    /// Same source set as an earlier node. Reported, but not an error.
    DuplicateNeuron {
        node: usize,
        duplicate_of: usize,
    },
}

impl Violation {
    pub fn is_error(&self) -> bool {
        !matches!(self, Violation::DuplicateNeuron { .. })
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            OffsetOutOfRange { node, offset } => {
                write!(f, "node {node}: offset {offset} outside [0, 1)")
            }
            VariableOutOfRange { node, variable } => {
                write!(f, "node {node}: variable {variable} out of range")
            }
            ParentOrder { node, parent } => {
                write!(f, "node {node}: parent {parent} is not an earlier node")
            }
            RepeatedParent { node } => write!(f, "node {node}: both parents are the same node"),
            SharedVariables { node, shared } => {
                write!(f, "node {node}: parents share variables {shared:?}")
            }
            ColumnDegree { node, count } => {
                write!(f, "node {node}: {count} incoming edges, expected 2")
            }
            SourceHasParents { node } => write!(f, "source node {node} has incoming edges"),
            NotUpperTriangular { row, col } => {
                write!(f, "edge ({row}, {col}) is not strictly upper triangular")
            }
            WeightCount { expected, found } => {
                write!(f, "expected {expected} weights, found {found}")
            }
            DuplicateNeuron { node, duplicate_of } => {
                write!(f, "node {node} duplicates node {duplicate_of}")
            }
        }
    }
}

/// Per-node outputs from a single forward pass plus the network output.
#[derive(Clone, Debug, PartialEq)]
pub struct Forward {
    pub nodes: Vec<f64>,
    pub output: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EhhNetwork {
    pub(crate) normalizer: Normalizer,
    pub(crate) offset_grid: Vec<Vec<f64>>,
    pub(crate) sources: Vec<SourceNode>,
    pub(crate) intermediates: Vec<IntermediateNode>,
    pub(crate) weights: Vec<f64>,
}

impl EhhNetwork {
    /// Builds a network and rejects it if [`validate`](Self::validate)
    /// reports any error. Duplicate neurons are allowed.
    pub fn new(
        normalizer: Normalizer,
        sources: Vec<SourceNode>,
        intermediates: Vec<IntermediateNode>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let net = Self::from_parts(normalizer, sources, intermediates, weights);
        let errors: Vec<_> = net.validate().into_iter().filter(Violation::is_error).collect();
        if errors.is_empty() {
            Ok(net)
        } else {
            Err(Error::InvalidNetwork(errors))
        }
    }

    /// Assembles a network without structural checks.
    pub fn from_parts(
        normalizer: Normalizer,
        sources: Vec<SourceNode>,
        intermediates: Vec<IntermediateNode>,
        weights: Vec<f64>,
    ) -> Self {
        Self {
            normalizer,
            offset_grid: Vec::new(),
            sources,
            intermediates,
            weights,
        }
    }

    /// Builds a network whose hidden-layer edges come from an adjacency matrix.
    pub fn from_adjacency(
        normalizer: Normalizer,
        sources: Vec<SourceNode>,
        adjacency: &AdjacencyMatrix,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if adjacency.n_sources() != sources.len() {
            return Err(Error::DimensionMismatch {
                expected: sources.len(),
                found: adjacency.n_sources(),
            });
        }
        let errors = adjacency.validate();
        if !errors.is_empty() {
            return Err(Error::InvalidNetwork(errors));
        }
        let intermediates = (sources.len()..adjacency.size())
            .map(|j| {
                let col = adjacency.matrix().column(j);
                IntermediateNode::new(col[0], col[1])
            })
            .collect();
        Self::new(normalizer, sources, intermediates, weights)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Self {
        self.weights = weights;
        self
    }

    pub fn with_offset_grid(mut self, grid: Vec<Vec<f64>>) -> Self {
        self.offset_grid = grid;
        self
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn offset_grid(&self) -> &[Vec<f64>] {
        &self.offset_grid
    }

    pub fn sources(&self) -> &[SourceNode] {
        &self.sources
    }

    pub fn intermediates(&self) -> &[IntermediateNode] {
        &self.intermediates
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn set_weights(&mut self, weights: Vec<f64>) {
        self.weights = weights;
    }

    /// Input dimension `n`.
    pub fn input_dim(&self) -> usize {
        self.normalizer.dim()
    }

    pub fn n_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn n_intermediates(&self) -> usize {
        self.intermediates.len()
    }

    /// Hidden-layer size `M`.
    pub fn n_nodes(&self) -> usize {
        self.sources.len() + self.intermediates.len()
    }

    pub fn is_source(&self, node: usize) -> bool {
        node < self.sources.len()
    }

    /// Parents of an intermediate node, `None` for sources.
    pub fn parents(&self, node: usize) -> Option<[usize; 2]> {
        node.checked_sub(self.sources.len())
            .and_then(|i| self.intermediates.get(i))
            .map(|c| c.parents)
    }

    /// Direct successors of every node.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_nodes()];
        for (i, c) in self.intermediates.iter().enumerate() {
            let node = self.sources.len() + i;
            for &p in &c.parents {
                if p < out.len() && !out[p].contains(&node) {
                    out[p].push(node);
                }
            }
        }
        out
    }

    /// Hidden-layer pass over an already normalised input.
    pub fn hidden_normalized(&self, x: &[f64]) -> Vec<f64> {
        let mut nodes = Vec::with_capacity(self.n_nodes());
        for s in &self.sources {
            nodes.push(s.eval(x));
        }
        for c in &self.intermediates {
            let [a, b] = c.parents;
            nodes.push(nodes[a].min(nodes[b]));
        }
        nodes
    }

    /// `alpha_0 + sum_k alpha_k * nn_k`, accumulated in node order.
    pub fn output_from_nodes(&self, nodes: &[f64]) -> f64 {
        let mut f = self.weights[0];
        for (k, v) in nodes.iter().enumerate() {
            f += self.weights[k + 1] * v;
        }
        f
    }

    pub fn forward(&self, x_raw: &[f64]) -> Result<Forward> {
        self.check_weights()?;
        let x = self.normalizer.apply(x_raw)?;
        let nodes = self.hidden_normalized(&x);
        let output = self.output_from_nodes(&nodes);
        Ok(Forward { nodes, output })
    }

    pub fn predict(&self, x_raw: &[f64]) -> Result<f64> {
        Ok(self.forward(x_raw)?.output)
    }

    /// Network outputs for every row of `samples`.
    pub fn predict_batch(&self, samples: &DMatrix<f64>) -> Result<DVector<f64>> {
        self.check_weights()?;
        let x = self.normalizer.apply_matrix(samples)?;
        let mut out = DVector::zeros(x.nrows());
        let mut row = vec![0.0; x.ncols()];
        for i in 0..x.nrows() {
            for (j, r) in row.iter_mut().enumerate() {
                *r = x[(i, j)];
            }
            out[i] = self.output_from_nodes(&self.hidden_normalized(&row));
        }
        Ok(out)
    }

    /// The `N_s x (M + 1)` data matrix for raw samples (one per row).
    pub fn data_matrix(&self, samples: &DMatrix<f64>) -> Result<DataMatrix> {
        let x = self.normalizer.apply_matrix(samples)?;
        Ok(self.data_matrix_normalized(&x))
    }

    pub(crate) fn data_matrix_normalized(&self, x: &DMatrix<f64>) -> DataMatrix {
        let ns = x.nrows();
        let mut z = DMatrix::zeros(ns, self.n_nodes() + 1);
        z.column_mut(0).fill(1.0);
        for (k, s) in self.sources.iter().enumerate() {
            let src = x.column(s.variable);
            let mut dst = z.column_mut(k + 1);
            for i in 0..ns {
                dst[i] = (src[i] - s.offset).max(0.0);
            }
        }
        let nd = self.sources.len();
        for (t, c) in self.intermediates.iter().enumerate() {
            let [a, b] = c.parents;
            for i in 0..ns {
                z[(i, nd + t + 1)] = z[(i, a + 1)].min(z[(i, b + 1)]);
            }
        }
        z
    }

    fn check_weights(&self) -> Result<()> {
        if self.weights.len() != self.n_nodes() + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.n_nodes() + 1,
                found: self.weights.len(),
            });
        }
        Ok(())
    }

    /// Source-node sets `K_j` as bit sets, in node order. Invalid parent
    /// references contribute nothing.
    pub(crate) fn source_bitsets(&self) -> Vec<BitSet> {
        let nd = self.sources.len();
        let mut sets: Vec<BitSet> = (0..nd).map(|k| BitSet::singleton(nd, k)).collect();
        for (t, c) in self.intermediates.iter().enumerate() {
            let node = nd + t;
            let get = |p: usize, sets: &Vec<BitSet>| {
                if p < node {
                    sets[p].clone()
                } else {
                    BitSet::new(nd)
                }
            };
            let s = get(c.parents[0], &sets).union(&get(c.parents[1], &sets));
            sets.push(s);
        }
        sets
    }

    /// Variable sets `S_j` as bit sets, in node order.
    pub(crate) fn variable_bitsets(&self) -> Vec<BitSet> {
        let nd = self.sources.len();
        let width = self
            .sources
            .iter()
            .map(|s| s.variable + 1)
            .max()
            .unwrap_or(0)
            .max(self.input_dim())
            .max(1);
        let mut sets: Vec<BitSet> = self
            .sources
            .iter()
            .map(|s| BitSet::singleton(width, s.variable))
            .collect();
        for (t, c) in self.intermediates.iter().enumerate() {
            let node = nd + t;
            let get = |p: usize, sets: &Vec<BitSet>| {
                if p < node {
                    sets[p].clone()
                } else {
                    BitSet::new(width)
                }
            };
            let s = get(c.parents[0], &sets).union(&get(c.parents[1], &sets));
            sets.push(s);
        }
        sets
    }

    /// The set `K_j` of source nodes with `nn_j(x) = min_{k in K_j} nn_k(x)`.
    pub fn min_form(&self, node: usize) -> BTreeSet<usize> {
        if self.is_source(node) {
            return BTreeSet::from([node]);
        }
        let mut out = BTreeSet::new();
        let mut stack = vec![node];
        let mut seen = vec![false; self.n_nodes()];
        while let Some(j) = stack.pop() {
            if std::mem::replace(&mut seen[j], true) {
                continue;
            }
            match self.parents(j) {
                None => {
                    out.insert(j);
                }
                Some(ps) => stack.extend(ps.into_iter().filter(|&p| p < j)),
            }
        }
        out
    }

    /// Indices of the input variables a node depends on.
    pub fn variable_set(&self, node: usize) -> BTreeSet<usize> {
        self.min_form(node)
            .into_iter()
            .map(|k| self.sources[k].variable)
            .collect()
    }

    /// Derived adjacency view of the hidden layer.
    pub fn adjacency(&self) -> AdjacencyMatrix {
        let m = self.n_nodes();
        let nd = self.sources.len();
        let entries = self
            .intermediates
            .iter()
            .enumerate()
            .flat_map(|(t, c)| c.parents.map(|p| (p, nd + t)));
        AdjacencyMatrix::from_entries(m, nd, entries)
    }

    pub fn interaction_matrix(&self) -> InteractionMatrix {
        graph::interaction_matrix(&self.adjacency())
    }

    /// Lists every structural violation; an empty list means the network
    /// satisfies both connection rules and all range constraints.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.input_dim();
        for (k, s) in self.sources.iter().enumerate() {
            if !(0.0..1.0).contains(&s.offset) {
                out.push(Violation::OffsetOutOfRange {
                    node: k,
                    offset: s.offset,
                });
            }
            if s.variable >= n {
                out.push(Violation::VariableOutOfRange {
                    node: k,
                    variable: s.variable,
                });
            }
        }
        let vars = self.variable_bitsets();
        let ksets = self.source_bitsets();
        let nd = self.sources.len();
        let mut seen: HashMap<&BitSet, usize> = HashMap::new();
        for (k, set) in ksets.iter().enumerate().take(nd) {
            seen.entry(set).or_insert(k);
        }
        for (t, c) in self.intermediates.iter().enumerate() {
            let node = nd + t;
            let [a, b] = c.parents;
            let mut ordered = true;
            for p in [a, b] {
                if p >= node {
                    out.push(Violation::ParentOrder { node, parent: p });
                    ordered = false;
                }
            }
            if a == b {
                out.push(Violation::RepeatedParent { node });
            } else if ordered && vars[a].intersects(&vars[b]) {
                let shared = vars[a].iter().filter(|&v| vars[b].contains(v)).collect();
                out.push(Violation::SharedVariables { node, shared });
            }
            if let Some(&first) = seen.get(&ksets[node]) {
                out.push(Violation::DuplicateNeuron {
                    node,
                    duplicate_of: first,
                });
            } else {
                seen.insert(&ksets[node], node);
            }
        }
        if self.weights.len() != self.n_nodes() + 1 {
            out.push(Violation::WeightCount {
                expected: self.n_nodes() + 1,
                found: self.weights.len(),
            });
        }
        out
    }

    /// The network with every removable node deleted; see [`prune`](prune::prune).
    pub fn prune(&self) -> EhhNetwork {
        prune::prune(self).0
    }

    /// Like [`prune`](Self::prune), also returning the original index of each
    /// surviving node.
    pub fn prune_with_map(&self) -> (EhhNetwork, Vec<usize>) {
        prune::prune(self)
    }

    /// Number of weights that are not exactly zero (bias included).
    pub fn nonzero_weights(&self) -> usize {
        self.weights.iter().filter(|w| **w != 0.0).count()
    }
}
