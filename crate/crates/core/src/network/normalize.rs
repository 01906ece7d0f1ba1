use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-dimension min/max affine map onto the unit interval.
///
/// Inputs outside the fitted range are mapped by the same affine rule and are
/// not clipped; the hinges in the source nodes absorb values below zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Normalizer {
    /// Fits the map on raw samples laid out one sample per row.
    pub fn fit(samples: &DMatrix<f64>) -> Result<Self> {
        if samples.nrows() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                available: samples.nrows(),
            });
        }
        let mut min = Vec::with_capacity(samples.ncols());
        let mut max = Vec::with_capacity(samples.ncols());
        for (i, col) in samples.column_iter().enumerate() {
            let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !(hi > lo) {
                return Err(Error::ConstantDimension(i));
            }
            min.push(lo);
            max.push(hi);
        }
        Ok(Self { min, max })
    }

    /// The identity map on `[0, 1]^n`, for inputs that are already normalised.
    pub fn identity(n: usize) -> Self {
        Self {
            min: vec![0.0; n],
            max: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    #[inline]
    pub(crate) fn scale(&self, i: usize, raw: f64) -> f64 {
        (raw - self.min[i]) / (self.max[i] - self.min[i])
    }

    pub fn apply(&self, x_raw: &[f64]) -> Result<Vec<f64>> {
        if x_raw.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x_raw.len(),
            });
        }
        Ok(x_raw.iter().enumerate().map(|(i, &v)| self.scale(i, v)).collect())
    }

    pub fn apply_matrix(&self, samples: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if samples.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: samples.ncols(),
            });
        }
        let mut out = samples.clone();
        for (i, mut col) in out.column_iter_mut().enumerate() {
            col.apply(|v| *v = self.scale(i, *v));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maps_column_onto_unit_interval() {
        let s = DMatrix::from_column_slice(3, 1, &[0.0, 2.0, 4.0]);
        let n = Normalizer::fit(&s).unwrap();
        assert_eq!(n.apply_matrix(&s).unwrap().as_slice(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn symmetric_input_range() {
        let s = DMatrix::from_column_slice(2, 1, &[-2.0, 2.0]);
        let n = Normalizer::fit(&s).unwrap();
        assert_eq!(n.apply(&[-2.0]).unwrap(), vec![0.0]);
        assert_eq!(n.apply(&[2.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn constant_dimension_is_rejected() {
        let s = DMatrix::from_row_slice(3, 2, &[1.0, 5.0, 2.0, 5.0, 3.0, 5.0]);
        assert!(matches!(Normalizer::fit(&s), Err(Error::ConstantDimension(1))));
    }

    #[test]
    fn extrapolates_without_clipping() {
        let n = Normalizer {
            min: vec![0.0],
            max: vec![4.0],
        };
        assert_eq!(n.apply(&[2.0]).unwrap(), vec![0.5]);
        assert_eq!(n.apply(&[5.0]).unwrap(), vec![1.25]);
        assert!(matches!(
            n.apply(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        ));
    }
}
