//! Synthetic joint-distribution generators for the CLI and tests.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::prob::JointDistribution;

#[derive(Debug, Error, PartialEq)]
pub enum DatasetError {
    #[error("bad shape: need n >= m >= 1, got n = {n}, m = {m}")]
    BadShape { n: usize, m: usize },
    #[error("noise must lie in [0, 0.5), got {0}")]
    BadNoise(f64),
}

/// Uniform p(X) with Y = X over n symbols.
pub fn identity_joint(n: usize) -> Result<JointDistribution, DatasetError> {
    if n < 1 {
        return Err(DatasetError::BadShape { n, m: 1 });
    }
    Ok(JointDistribution::identity(n))
}

/// Seeded balanced surjection f: [n] -> [m]; y symbols are dealt round-robin
/// to shuffled x symbols, so cell counts differ by at most one.
fn surjection(n: usize, m: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs: Vec<usize> = (0..n).collect();
    xs.shuffle(&mut rng);
    let mut f = vec![0; n];
    for (k, &x) in xs.iter().enumerate() {
        f[x] = k % m;
    }
    f
}

/// Uniform p(X), Y = f(X) for a seeded surjection onto m symbols.
pub fn map_joint(n: usize, m: usize, seed: u64) -> Result<JointDistribution, DatasetError> {
    if m < 1 || n < m {
        return Err(DatasetError::BadShape { n, m });
    }
    let f = surjection(n, m, seed);
    let mut matrix = vec![vec![0.0; m]; n];
    for (x, row) in matrix.iter_mut().enumerate() {
        row[f[x]] = 1.0 / n as f64;
    }
    Ok(JointDistribution::validate(&matrix)
        .expect("generated joint is valid")
        .joint)
}

/// Deterministic-map joint with `noise` probability mass per x spread
/// uniformly off the graph of f.
pub fn stochastic_joint(
    n: usize,
    m: usize,
    noise: f64,
    seed: u64,
) -> Result<JointDistribution, DatasetError> {
    if m < 1 || n < m {
        return Err(DatasetError::BadShape { n, m });
    }
    if !(0.0..0.5).contains(&noise) {
        return Err(DatasetError::BadNoise(noise));
    }
    if m == 1 {
        // no off-graph cells to spread noise over
        return map_joint(n, m, seed);
    }
    let f = surjection(n, m, seed);
    let off = noise / (m - 1) as f64;
    let mut matrix = vec![vec![0.0; m]; n];
    for (x, row) in matrix.iter_mut().enumerate() {
        for (y, cell) in row.iter_mut().enumerate() {
            *cell = if y == f[x] { 1.0 - noise } else { off } / n as f64;
        }
    }
    Ok(JointDistribution::validate(&matrix)
        .expect("generated joint is valid")
        .joint)
}

/// Seeded random joint with full support, for randomized test corpora.
pub fn random_joint(n: usize, m: usize, seed: u64) -> JointDistribution {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| 0.05 + rng.gen::<f64>()).collect())
        .collect();
    let total: f64 = raw.iter().flatten().sum();
    let matrix: Vec<Vec<f64>> = raw
        .iter()
        .map(|r| r.iter().map(|v| v / total).collect())
        .collect();
    JointDistribution::validate(&matrix)
        .expect("generated joint is valid")
        .joint
}
