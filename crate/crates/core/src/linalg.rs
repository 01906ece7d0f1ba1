//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value cutoff used for numerical rank, matching the usual
/// `eps * max(rows, cols) * sigma_max` convention.
fn rank_threshold(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    f64::EPSILON * rows.max(cols) as f64 * sigma_max
}

pub fn numerical_rank(z: &DMatrix<f64>) -> usize {
    if z.nrows() == 0 || z.ncols() == 0 {
        return 0;
    }
    let sv = z.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    let tol = rank_threshold(z.nrows(), z.ncols(), smax);
    sv.iter().filter(|&&s| s > tol).count()
}

/// Minimum-norm least squares through the SVD pseudo-inverse.
pub struct LeastSquares {
    pub coefficients: DVector<f64>,
    pub rank: usize,
}

impl LeastSquares {
    pub fn rank_deficient(&self, cols: usize) -> bool {
        self.rank < cols
    }
}

pub fn least_squares(z: &DMatrix<f64>, y: &DVector<f64>) -> LeastSquares {
    let cols = z.ncols();
    if cols == 0 || z.nrows() == 0 {
        return LeastSquares {
            coefficients: DVector::zeros(cols),
            rank: 0,
        };
    }
    let svd = z.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = rank_threshold(z.nrows(), cols, smax);
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let coefficients = if smax == 0.0 {
        DVector::zeros(cols)
    } else {
        svd.solve(y, tol).expect("both singular-vector sets were computed")
    };
    LeastSquares { coefficients, rank }
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Population variance (divides by `n`).
pub fn variance(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

pub fn std_dev(v: &[f64]) -> f64 {
    variance(v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_duplicated_column_drops_by_one() {
        let z = DMatrix::from_row_slice(4, 3, &[1., 0., 0., 1., 1., 1., 1., 2., 2., 1., 3., 3.]);
        assert_eq!(numerical_rank(&z), 2);
        let z = DMatrix::from_row_slice(4, 3, &[1., 0., 5., 1., 1., 1., 1., 2., 2., 1., 3., 3.]);
        assert_eq!(numerical_rank(&z), 3);
    }

    #[test]
    fn least_squares_exact_fit() {
        let z = DMatrix::from_row_slice(3, 2, &[1., 0., 1., 1., 1., 2.]);
        let y = DVector::from_vec(vec![1., 3., 5.]);
        let ls = least_squares(&z, &y);
        assert_eq!(ls.rank, 2);
        assert!((ls.coefficients[0] - 1.).abs() < 1e-12);
        assert!((ls.coefficients[1] - 2.).abs() < 1e-12);
    }

    #[test]
    fn population_std() {
        assert_eq!(std_dev(&[1., 3.]), 1.0);
        assert_eq!(std_dev(&[]), 0.0);
    }
}
