use super::{EhhNetwork, IntermediateNode};

/// Repeatedly deletes nodes whose augmented-adjacency row is empty: no
/// surviving successor and a zero output weight. Deleting a node can free its
/// parents, so the sweep runs to a fixpoint. Returns the compacted network and
/// the original index of each surviving node.
pub(crate) fn prune(net: &EhhNetwork) -> (EhhNetwork, Vec<usize>) {
    let m = net.n_nodes();
    let nd = net.n_sources();
    let mut alive = vec![true; m];
    let mut out_degree: Vec<usize> = net.children().iter().map(Vec::len).collect();
    let removable = |k: usize, out_degree: &[usize]| out_degree[k] == 0 && net.weights[k + 1] == 0.0;

    let mut stack: Vec<usize> = (0..m).rev().filter(|&k| removable(k, &out_degree)).collect();
    while let Some(k) = stack.pop() {
        if !alive[k] {
            continue;
        }
        alive[k] = false;
        if let Some(parents) = net.parents(k) {
            let mut ps = parents.to_vec();
            ps.dedup();
            for p in ps {
                out_degree[p] -= 1;
                if alive[p] && removable(p, &out_degree) {
                    stack.push(p);
                }
            }
        }
    }

    let kept: Vec<usize> = (0..m).filter(|&k| alive[k]).collect();
    let mut new_index = vec![usize::MAX; m];
    for (new, &old) in kept.iter().enumerate() {
        new_index[old] = new;
    }
    let sources = kept.iter().filter(|&&k| k < nd).map(|&k| net.sources[k]).collect();
    let intermediates = kept
        .iter()
        .filter(|&&k| k >= nd)
        .map(|&k| {
            let [a, b] = net.intermediates[k - nd].parents;
            IntermediateNode::new(new_index[a], new_index[b])
        })
        .collect();
    let mut weights = Vec::with_capacity(kept.len() + 1);
    weights.push(net.weights[0]);
    weights.extend(kept.iter().map(|&k| net.weights[k + 1]));

    let pruned = EhhNetwork {
        normalizer: net.normalizer.clone(),
        offset_grid: net.offset_grid.clone(),
        sources,
        intermediates,
        weights,
    };
    (pruned, kept)
}
