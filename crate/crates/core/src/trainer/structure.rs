//! Single-column structure moves with the output weights held fixed.

use std::collections::HashSet;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::state::TrainState;
use crate::bitset::BitSet;
use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepReport {
    /// Candidate pairs scored, the incumbent included.
    pub evaluated: usize,
    pub changed: bool,
}

impl std::ops::AddAssign for StepReport {
    fn add_assign(&mut self, other: Self) {
        self.evaluated += other.evaluated;
        self.changed |= other.changed;
    }
}

fn sorted(p: [usize; 2]) -> [usize; 2] {
    [p[0].min(p[1]), p[0].max(p[1])]
}

/// Everything a candidate evaluation reads, captured once per step.
struct Frozen<'a> {
    z: &'a DMatrix<f64>,
    weights: &'a [f64],
    residual: Vec<f64>,
    incumbent: [usize; 2],
    /// Node `j` followed by its descendants in index order.
    chain: Vec<usize>,
    chain_pos: Vec<usize>,
    chain_parents: Vec<[usize; 2]>,
    vars: Vec<BitSet>,
    ksets: Vec<BitSet>,
    /// Source sets of every node outside the chain.
    taken: HashSet<BitSet>,
}

impl<'a> Frozen<'a> {
    fn new(state: &'a TrainState, j: usize, data: &Dataset) -> Result<Self> {
        state.check_data(data)?;
        let net = &state.network;
        let incumbent = match net.parents(j) {
            Some(p) => sorted(p),
            None => {
                return Err(Error::InvalidConfig(format!(
                    "column {j} is not an intermediate node of a {}-node network",
                    net.n_nodes()
                )))
            }
        };
        let m = net.n_nodes();
        let children = net.children();
        let mut in_chain = vec![false; m];
        in_chain[j] = true;
        let mut stack = vec![j];
        while let Some(k) = stack.pop() {
            for &c in &children[k] {
                if !std::mem::replace(&mut in_chain[c], true) {
                    stack.push(c);
                }
            }
        }
        let chain: Vec<usize> = (0..m).filter(|&k| in_chain[k]).collect();
        let mut chain_pos = vec![usize::MAX; m];
        for (pos, &k) in chain.iter().enumerate() {
            chain_pos[k] = pos;
        }
        let chain_parents = chain.iter().map(|&k| net.parents(k).unwrap()).collect();

        let ksets = net.source_bitsets();
        let taken = (0..m).filter(|&k| !in_chain[k]).map(|k| ksets[k].clone()).collect();

        let weights = net.weights();
        let z = &state.z;
        let residual = (0..z.nrows())
            .map(|i| {
                let mut f = 0.0;
                for (k, w) in weights.iter().enumerate() {
                    f += z[(i, k)] * w;
                }
                data.targets[i] - f
            })
            .collect();

        Ok(Self {
            z,
            weights,
            residual,
            incumbent,
            chain,
            chain_pos,
            chain_parents,
            vars: net.variable_bitsets(),
            ksets,
            taken,
        })
    }

    fn parents_at(&self, pos: usize, pair: [usize; 2]) -> [usize; 2] {
        if pos == 0 {
            pair
        } else {
            self.chain_parents[pos]
        }
    }

    /// Rule 2 for node `j` and every descendant, and no repeated source set.
    fn is_valid(&self, pair: [usize; 2]) -> bool {
        let mut new_vars: Vec<BitSet> = Vec::with_capacity(self.chain.len());
        let mut new_ksets: Vec<BitSet> = Vec::with_capacity(self.chain.len());
        for pos in 0..self.chain.len() {
            let [a, b] = self.parents_at(pos, pair);
            if a == b {
                return false;
            }
            let pick = |p: usize, own: &'_ Vec<BitSet>, base: &'_ Vec<BitSet>| -> BitSet {
                match self.chain_pos[p] {
                    usize::MAX => base[p].clone(),
                    q => own[q].clone(),
                }
            };
            let (va, vb) = (pick(a, &new_vars, &self.vars), pick(b, &new_vars, &self.vars));
            if va.intersects(&vb) {
                return false;
            }
            let k = pick(a, &new_ksets, &self.ksets).union(&pick(b, &new_ksets, &self.ksets));
            if self.taken.contains(&k) || new_ksets.contains(&k) {
                return false;
            }
            new_vars.push(va.union(&vb));
            new_ksets.push(k);
        }
        true
    }

    /// Residual sum of squares with node `j` rewired to `pair`.
    fn score(&self, pair: [usize; 2], buf: &mut Vec<f64>) -> f64 {
        let ns = self.z.nrows();
        let len = self.chain.len();
        buf.resize(ns * len, 0.0);
        for pos in 0..len {
            let [a, b] = self.parents_at(pos, pair);
            for i in 0..ns {
                let va = self.value(a, i, buf);
                let vb = self.value(b, i, buf);
                buf[pos * ns + i] = va.min(vb);
            }
        }
        let mut rss = 0.0;
        for i in 0..ns {
            let mut delta = 0.0;
            for (pos, &k) in self.chain.iter().enumerate() {
                delta += self.weights[k + 1] * (self.z[(i, k + 1)] - buf[pos * ns + i]);
            }
            let r = self.residual[i] + delta;
            rss += r * r;
        }
        rss
    }

    #[inline]
    fn value(&self, node: usize, i: usize, buf: &[f64]) -> f64 {
        match self.chain_pos[node] {
            usize::MAX => self.z[(i, node + 1)],
            pos => buf[pos * self.z.nrows() + i],
        }
    }

    /// Lowest-RSS valid candidate, ties to the smallest pair. The incumbent is
    /// always scored.
    fn choose(&self, candidates: impl Iterator<Item = [usize; 2]>) -> ([usize; 2], usize) {
        let mut valid: Vec<[usize; 2]> = candidates
            .map(sorted)
            .filter(|&p| p != self.incumbent && self.is_valid(p))
            .collect();
        valid.push(self.incumbent);
        valid.sort_unstable();
        valid.dedup();
        let best = valid
            .par_iter()
            .map_init(Vec::new, |buf, &p| (self.score(p, buf), p))
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
            .map(|(_, p)| p)
            .unwrap_or(self.incumbent);
        (best, valid.len())
    }
}

fn recompute_chain(state: &mut TrainState, chain: &[usize]) {
    let ns = state.z.nrows();
    for &k in chain {
        let [a, b] = state.network.parents(k).unwrap();
        for i in 0..ns {
            state.z[(i, k + 1)] = state.z[(i, a + 1)].min(state.z[(i, b + 1)]);
        }
    }
}

/// Rewires node `j` and keeps the change only if the recomputed cost does not
/// exceed the incumbent's.
fn install(state: &mut TrainState, j: usize, pair: [usize; 2], chain: &[usize], data: &Dataset) -> Result<bool> {
    let nd = state.network.n_sources();
    let old = state.network.intermediates[j - nd].parents;
    let saved: Vec<_> = chain.iter().map(|&k| state.z.column(k + 1).clone_owned()).collect();
    state.network.intermediates[j - nd].parents = pair;
    recompute_chain(state, chain);
    let cost = state.scratch_cost(data)?;
    if cost <= state.cost {
        state.cost = cost;
        return Ok(true);
    }
    log::debug!("column {j}: rewiring to {pair:?} raised the cost to {cost}; reverted");
    state.network.intermediates[j - nd].parents = old;
    for (&k, col) in chain.iter().zip(saved) {
        state.z.set_column(k + 1, &col);
    }
    Ok(false)
}

fn optimise(
    state: &mut TrainState,
    j: usize,
    data: &Dataset,
    candidates: impl Fn([usize; 2]) -> Vec<[usize; 2]>,
) -> Result<([usize; 2], StepReport)> {
    let (best, evaluated, incumbent, chain) = {
        let frozen = Frozen::new(state, j, data)?;
        let (best, evaluated) = frozen.choose(candidates(frozen.incumbent).into_iter());
        (best, evaluated, frozen.incumbent, frozen.chain)
    };
    let changed = best != incumbent && install(state, j, best, &chain, data)?;
    let now = if changed { best } else { incumbent };
    Ok((now, StepReport { evaluated, changed }))
}

/// Tries every parent pair for column `j` and installs the one with the least
/// cost.
pub fn structure_step_column(state: &mut TrainState, j: usize, data: &Dataset) -> Result<StepReport> {
    let all = |_: [usize; 2]| (0..j).flat_map(|a| (a + 1..j).map(move |b| [a, b])).collect();
    Ok(optimise(state, j, data, all)?.1)
}

/// Re-optimises the first parent of column `j` with the second held, then
/// the second with the new first held.
pub fn structure_step_element(state: &mut TrainState, j: usize, data: &Dataset) -> Result<StepReport> {
    let [_, k2] = state
        .network
        .parents(j)
        .ok_or_else(|| Error::InvalidConfig(format!("column {j} is not an intermediate node")))?;
    let vary = |held: usize| move |_: [usize; 2]| (0..j).filter(|&p| p != held).map(|p| [p, held]).collect();
    let (pair, mut report) = optimise(state, j, data, vary(k2))?;
    let new_k1 = if pair[0] == k2 { pair[1] } else { pair[0] };
    let (_, second) = optimise(state, j, data, vary(new_k1))?;
    report += second;
    Ok(report)
}
