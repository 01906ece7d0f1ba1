use std::collections::HashSet;

use rand::Rng;

use super::config::TrainConfig;
use super::quantile::quantile_offsets;
use crate::bitset::BitSet;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::network::{EhhNetwork, IntermediateNode, Normalizer, SourceNode};

/// Random hidden-layer structure with zero weights.
///
/// Source nodes come from the per-dimension quantile offsets. Every
/// intermediate node then draws two distinct earlier nodes uniformly, redrawing
/// while the pair shares a variable or reproduces an existing source set.
pub fn generate_structure<R: Rng + ?Sized>(config: &TrainConfig, rng: &mut R, data: &Dataset) -> Result<EhhNetwork> {
    config.validate(data.dim())?;
    let normalizer = Normalizer::fit(&data.inputs)?;
    let x = normalizer.apply_matrix(&data.inputs)?;
    let grid = quantile_offsets(&x, config.q)?;

    let n = data.dim();
    let sources: Vec<SourceNode> = grid
        .iter()
        .enumerate()
        .flat_map(|(v, offs)| offs.iter().map(move |&b| SourceNode::new(v, b)))
        .collect();
    let nd = sources.len();

    let mut vars: Vec<BitSet> = sources.iter().map(|s| BitSet::singleton(n, s.variable)).collect();
    let mut ksets: Vec<BitSet> = (0..nd).map(|k| BitSet::singleton(nd, k)).collect();
    let mut seen: HashSet<BitSet> = ksets.iter().cloned().collect();
    let mut intermediates = Vec::with_capacity(config.neurons.saturating_sub(nd));

    for node in nd..config.neurons {
        let mut failures = 0;
        loop {
            if failures >= config.max_draws {
                return Err(Error::GenerationStall {
                    node,
                    attempts: failures,
                });
            }
            let a = rng.random_range(0..node);
            let b = rng.random_range(0..node);
            if a == b || vars[a].intersects(&vars[b]) {
                failures += 1;
                continue;
            }
            let k = ksets[a].union(&ksets[b]);
            if seen.contains(&k) {
                failures += 1;
                continue;
            }
            seen.insert(k.clone());
            ksets.push(k);
            vars.push(vars[a].union(&vars[b]));
            intermediates.push(IntermediateNode::new(a.min(b), a.max(b)));
            break;
        }
    }

    let m = nd + intermediates.len();
    Ok(EhhNetwork::new(normalizer, sources, intermediates, vec![0.0; m + 1])?.with_offset_grid(grid))
}

/// Random initial network with weights from one GCV-selected Lasso solve.
/// The network is not pruned.
pub fn generate_initial<R: Rng + ?Sized>(config: &TrainConfig, rng: &mut R, data: &Dataset) -> Result<EhhNetwork> {
    let net = generate_structure(config, rng, data)?;
    let sel = super::select_lambda(&net, data, &config.zeta_values(&data.targets), config)?;
    Ok(net.with_weights(sel.solution.weights))
}
