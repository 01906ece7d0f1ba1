use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use super::narx::IoData;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NarendraLiOptions {
    pub train_len: usize,
    pub test_len: usize,
    pub noise_variance: f64,
    /// Add the same measurement noise to the test output.
    pub noisy_test: bool,
    /// Training input is uniform on `[-input_bound, input_bound]`.
    pub input_bound: f64,
}

impl Default for NarendraLiOptions {
    fn default() -> Self {
        Self {
            train_len: 2000,
            test_len: 200,
            noise_variance: 0.1,
            noisy_test: false,
            input_bound: 2.0,
        }
    }
}

/// Noise-free output of the benchmark system for input `u`, starting from the
/// zero state at the first sample.
pub fn narendra_li_response(u: &[f64]) -> Vec<f64> {
    let (mut x1, mut x2) = (0.0f64, 0.0f64);
    let mut y = Vec::with_capacity(u.len());
    for &uk in u {
        y.push(x1 / (1.0 + 0.5 * x2.sin()) + x2 / (1.0 + 0.5 * x1.sin()));
        let n1 = (x1 / (1.0 + x1 * x1) + 1.0) * x2.sin();
        let n2 = x2 * x2.cos()
            + x1 * (-(x1 * x1 + x2 * x2) / 8.0).exp()
            + uk.powi(3) / (1.0 + uk * uk + 0.5 * (x1 + x2).cos());
        x1 = n1;
        x2 = n2;
    }
    y
}

/// `sin(2 pi k / 10) + sin(2 pi k / 25)` for `k = 1..=len`.
pub fn narendra_li_test_input(len: usize) -> Vec<f64> {
    (1..=len)
        .map(|k| {
            let k = k as f64;
            (2.0 * PI * k / 10.0).sin() + (2.0 * PI * k / 25.0).sin()
        })
        .collect()
}

/// Training and test records with default lengths and a noise-free test
/// output.
pub fn narendra_li_generate<R: Rng + ?Sized>(train_len: usize, noise_variance: f64, rng: &mut R) -> (IoData, IoData) {
    let options = NarendraLiOptions {
        train_len,
        noise_variance,
        ..NarendraLiOptions::default()
    };
    narendra_li_generate_with(&options, rng)
}

/// Draws the training input, then the training noise, then (if enabled) the
/// test noise, all from `rng`.
pub fn narendra_li_generate_with<R: Rng + ?Sized>(options: &NarendraLiOptions, rng: &mut R) -> (IoData, IoData) {
    let b = options.input_bound;
    let uniform = Uniform::new_inclusive(-b, b).expect("finite input bound");
    let u: Vec<f64> = (0..options.train_len).map(|_| uniform.sample(rng)).collect();
    let noise = Normal::new(0.0, options.noise_variance.max(0.0).sqrt()).expect("finite noise variance");

    let mut y = narendra_li_response(&u);
    for v in &mut y {
        *v += noise.sample(rng);
    }
    let ut = narendra_li_test_input(options.test_len);
    let mut yt = narendra_li_response(&ut);
    if options.noisy_test {
        for v in &mut yt {
            *v += noise.sample(rng);
        }
    }
    (IoData { u, y }, IoData { u: ut, y: yt })
}
