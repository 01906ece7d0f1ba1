use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Empirical `p`-quantile of sorted data, linearly interpolated.
pub(crate) fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Source-node offsets for each dimension of normalised samples: `0` followed
/// by the interior `j/q`-quantiles, `j = 1..q-1`.
///
/// Repeated offsets and offsets at or above 1 are dropped with a warning, so a
/// dimension can end up with fewer than `q` offsets. A dimension is degenerate
/// when it is constant or, for `q >= 2`, when no interior offset survives.
pub fn quantile_offsets(samples: &DMatrix<f64>, q: usize) -> Result<Vec<Vec<f64>>> {
    if samples.nrows() == 0 {
        return Err(Error::InsufficientData {
            needed: 1,
            available: 0,
        });
    }
    let mut out = Vec::with_capacity(samples.ncols());
    for (dim, col) in samples.column_iter().enumerate() {
        let mut sorted: Vec<f64> = col.iter().copied().collect();
        sorted.sort_by(f64::total_cmp);
        if sorted[0] == sorted[sorted.len() - 1] {
            return Err(Error::DegenerateQuantiles { dim, distinct: 1, q });
        }
        let mut offsets = vec![0.0];
        for j in 1..q {
            let b = sorted_quantile(&sorted, j as f64 / q as f64);
            if b > *offsets.last().unwrap() && b < 1.0 {
                offsets.push(b);
            }
        }
        if offsets.len() < q {
            if offsets.len() == 1 && q > 1 {
                return Err(Error::DegenerateQuantiles { dim, distinct: 1, q });
            }
            log::warn!(
                "dimension {dim}: {} of {q} quantile offsets are distinct",
                offsets.len()
            );
        }
        out.push(offsets);
    }
    Ok(out)
}
