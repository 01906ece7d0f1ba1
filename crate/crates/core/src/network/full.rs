use super::{EhhNetwork, IntermediateNode, Normalizer, SourceNode};
use crate::error::{Error, Result};

/// Default ceiling on `(q + 1)^n` for the full-connection construction.
pub const DEFAULT_NEURON_CAP: u128 = 1 << 20;

/// Offsets `0, 1/q, ..., (q - 1)/q`.
pub fn uniform_offsets(q: usize) -> Vec<f64> {
    (0..q).map(|j| j as f64 / q as f64).collect()
}

/// Builds the network holding every min-combination of source nodes on
/// pairwise distinct variables, one neuron per distinct source set.
///
/// Neurons are arranged by how many variables they involve. A neuron on `r`
/// variables is the min of the source node on its lowest variable and the
/// neuron on the remaining `r - 1` variables, so every source set is produced
/// exactly once. Weights are all zero. Including the bias there are
/// `(q + 1)^n` neurons in total.
pub fn full_connection_network(n: usize, q: usize, cap: u128) -> Result<EhhNetwork> {
    if n == 0 || q == 0 {
        return Err(Error::InvalidConfig("full connection needs n >= 1 and q >= 1".into()));
    }
    let required = u32::try_from(n)
        .ok()
        .and_then(|e| (q as u128 + 1).checked_pow(e))
        .unwrap_or(u128::MAX);
    if required > cap {
        return Err(Error::ResourceBound { required, cap });
    }

    let offsets = uniform_offsets(q);
    let sources: Vec<SourceNode> = (0..n)
        .flat_map(|v| offsets.iter().map(move |&b| SourceNode::new(v, b)))
        .collect();
    let nd = sources.len();

    // Each level holds (node index, lowest variable) of its neurons.
    let mut level: Vec<(usize, usize)> = (0..nd).map(|k| (k, sources[k].variable)).collect();
    let mut intermediates = Vec::new();
    for _ in 2..=n {
        let mut next = Vec::new();
        for (a, src) in sources.iter().enumerate() {
            for &(node, lowest) in &level {
                if lowest > src.variable {
                    next.push((nd + intermediates.len(), src.variable));
                    intermediates.push(IntermediateNode::new(a, node));
                }
            }
        }
        level = next;
    }

    let m = nd + intermediates.len();
    let net = EhhNetwork::new(Normalizer::identity(n), sources, intermediates, vec![0.0; m + 1])?;
    Ok(net.with_offset_grid(vec![offsets; n]))
}
