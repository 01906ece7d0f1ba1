use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Root mean square error, linear and in decibels (`20 log10`). A zero error
/// gives `-inf` dB.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rmse {
    pub linear: f64,
    /// JSON has no infinity; a zero error is written as `null` and read back
    /// as `-inf`.
    #[serde(deserialize_with = "db_or_neg_inf")]
    pub db: f64,
}

fn db_or_neg_inf<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub vaf: f64,
    pub rmse: Rmse,
}

impl Metrics {
    pub fn compute(predicted: &[f64], actual: &[f64]) -> Result<Self> {
        Ok(Self {
            vaf: vaf(predicted, actual)?,
            rmse: rmse(predicted, actual)?,
        })
    }
}

fn check_lengths(predicted: &[f64], actual: &[f64], min: usize) -> Result<()> {
    if predicted.len() != actual.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            found: predicted.len(),
        });
    }
    if actual.len() < min {
        return Err(Error::InsufficientData {
            needed: min,
            available: actual.len(),
        });
    }
    Ok(())
}

/// Variance accounted for, `max{0, 1 - var(predicted - actual) / var(actual)}`.
pub fn vaf(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    check_lengths(predicted, actual, 2)?;
    let var_y = linalg::variance(actual);
    if var_y == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let err: Vec<f64> = predicted.iter().zip(actual).map(|(p, a)| p - a).collect();
    Ok((1.0 - linalg::variance(&err) / var_y).max(0.0))
}

pub fn rmse(predicted: &[f64], actual: &[f64]) -> Result<Rmse> {
    check_lengths(predicted, actual, 1)?;
    let mse = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a) * (p - a))
        .sum::<f64>()
        / actual.len() as f64;
    let linear = mse.sqrt();
    Ok(Rmse {
        linear,
        db: 20.0 * linear.log10(),
    })
}
