//! Sample-based utilities: the kernel pairwise-distance upper bound on
//! I(X;T) used by stochastic-encoder training, and DBSCAN cluster counting
//! for plateau analysis.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::prob::{JointDistribution, ProbError};
use crate::solver::SolveResult;

/// Default kernel variance (exp(-1))^2.
pub const DEFAULT_SIGMA2: f64 = 0.135335283236612692;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("non-finite sample entry at row {0}")]
    NonFinite(usize),
    #[error("samples must share a dimension: row {row} has {got}, expected {expected}")]
    RaggedRows { row: usize, got: usize, expected: usize },
    #[error("sigma2 must be positive, got {0}")]
    BadSigma(f64),
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// Encoder-output samples with a shared isotropic Gaussian kernel variance.
#[derive(Debug, Clone)]
pub struct SampleSet {
    means: Vec<Vec<f64>>,
    sigma2: f64,
}

impl SampleSet {
    pub fn new(means: Vec<Vec<f64>>, sigma2: f64) -> Result<Self, EstimatorError> {
        if means.len() < 2 {
            return Err(EstimatorError::TooFewSamples(means.len()));
        }
        if sigma2 <= 0.0 {
            return Err(EstimatorError::BadSigma(sigma2));
        }
        let d = means[0].len();
        for (i, row) in means.iter().enumerate() {
            if row.len() != d {
                return Err(EstimatorError::RaggedRows {
                    row: i,
                    got: row.len(),
                    expected: d,
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(EstimatorError::NonFinite(i));
            }
        }
        Ok(SampleSet { means, sigma2 })
    }

    pub fn with_default_sigma(means: Vec<Vec<f64>>) -> Result<Self, EstimatorError> {
        Self::new(means, DEFAULT_SIGMA2)
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Kernel mixture upper bound on I(X;T), in bits:
/// -(1/N) sum_i log2((1/N) sum_j exp(-|mu_i - mu_j|^2 / (2 sigma2))).
///
/// Bounded by [0, log2 N]; invariant to translation, rotation and sample
/// order; non-decreasing when pairwise separations grow.
pub fn kde_mi_upper(s: &SampleSet) -> f64 {
    let n = s.len();
    let inv_two_sigma2 = 1.0 / (2.0 * s.sigma2);
    let mut acc = 0.0;
    for i in 0..n {
        let mut inner = 0.0;
        for j in 0..n {
            inner += (-sq_dist(&s.means[i], &s.means[j]) * inv_two_sigma2).exp();
        }
        acc -= (inner / n as f64).log2();
    }
    (acc / n as f64).max(0.0)
}

/// DBSCAN labeling: cluster ids from 0, -1 for noise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DbscanResult {
    pub n_clusters: usize,
    pub labels: Vec<i64>,
}

/// Standard density-based clustering with Euclidean distance. Core points
/// have at least `min_pts` neighbors (self included) within `eps`; clusters
/// are connected components of core points plus reachable border points.
pub fn dbscan_clusters(s: &SampleSet, eps: f64, min_pts: usize) -> DbscanResult {
    let n = s.len();
    let eps2 = eps * eps;
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| sq_dist(&s.means[i], &s.means[j]) <= eps2)
                .collect()
        })
        .collect();
    let core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= min_pts).collect();

    let mut labels = vec![-1_i64; n];
    let mut cluster = 0_i64;
    for start in 0..n {
        if !core[start] || labels[start] != -1 {
            continue;
        }
        labels[start] = cluster;
        let mut queue = vec![start];
        while let Some(p) = queue.pop() {
            for &q in &neighbors[p] {
                if labels[q] == -1 {
                    labels[q] = cluster;
                    if core[q] {
                        queue.push(q);
                    }
                }
            }
        }
        cluster += 1;
    }
    DbscanResult {
        n_clusters: cluster as usize,
        labels,
    }
}

/// One sweep point correlated with its sample clusterization.
#[derive(Debug, Clone)]
pub struct PlateauRow {
    pub beta_u: f64,
    pub i_xt_bits: f64,
    pub i_ty_bits: f64,
    pub support_t: usize,
    pub n_clusters: usize,
}

/// Correlation table between sweep performance levels and cluster counts.
#[derive(Debug, Clone)]
pub struct PlateauReport {
    /// Embedding convention: this is an analysis convenience, not a claim
    /// about the solved encoders themselves.
    pub header: String,
    pub rows: Vec<PlateauRow>,
}

/// For each sweep point, draws encoder outputs (x from p(X), t from the
/// encoder row, embedded on a circle of radius 10 with unit Gaussian noise
/// in 2 dimensions) and counts DBSCAN clusters.
pub fn plateau_cluster_report(
    sweep: &[SolveResult],
    j: &JointDistribution,
    n_samples: usize,
    eps: f64,
    min_pts: usize,
    seed: u64,
) -> Result<PlateauReport, EstimatorError> {
    let px = j.px();
    let mut rows = Vec::with_capacity(sweep.len());
    for (k, res) in sweep.iter().enumerate() {
        let nt = res.encoder.nt();
        let centers: Vec<[f64; 2]> = (0..nt)
            .map(|t| {
                let ang = 2.0 * std::f64::consts::PI * t as f64 / nt as f64;
                [10.0 * ang.cos(), 10.0 * ang.sin()]
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
        let mut means = Vec::with_capacity(n_samples);
        for _ in 0..n_samples {
            let x = sample_index(&mut rng, px.mass());
            let t = sample_index(&mut rng, res.encoder.matrix()[x].as_slice());
            let (g1, g2) = gauss_pair(&mut rng);
            means.push(vec![centers[t][0] + g1, centers[t][1] + g2]);
        }
        let set = SampleSet::new(means, 1.0)?;
        let clusters = dbscan_clusters(&set, eps, min_pts);
        rows.push(PlateauRow {
            beta_u: res.beta_u,
            i_xt_bits: res.i_xt_bits,
            i_ty_bits: res.i_ty_bits,
            support_t: res.support_t,
            n_clusters: clusters.n_clusters,
        });
    }
    Ok(PlateauReport {
        header: "symbols embedded on a circle of radius 10 with unit Gaussian noise \
                 (analysis convenience; correlation only, no causal claim)"
            .to_string(),
        rows,
    })
}

fn sample_index(rng: &mut ChaCha8Rng, mass: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &m) in mass.iter().enumerate() {
        acc += m;
        if u < acc {
            return i;
        }
    }
    mass.len() - 1
}

fn gauss_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    // Box-Muller
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    (r * th.cos(), r * th.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{induce, Encoder};
    use crate::solver::{solve_classic, SolverConfig};

    #[test]
    fn kde_zero_for_identical_means() {
        let s = SampleSet::with_default_sigma(vec![vec![1.0, 2.0]; 10]).unwrap();
        assert_eq!(kde_mi_upper(&s), 0.0);
    }

    #[test]
    fn kde_translation_invariant() {
        let means: Vec<Vec<f64>> = (0..8).map(|k| vec![k as f64 * 0.3, 1.0 - k as f64 * 0.1]).collect();
        let a = SampleSet::with_default_sigma(means.clone()).unwrap();
        let shifted: Vec<Vec<f64>> = means.iter().map(|r| vec![r[0] + 5.0, r[1] - 3.0]).collect();
        let b = SampleSet::with_default_sigma(shifted).unwrap();
        assert!((kde_mi_upper(&a) - kde_mi_upper(&b)).abs() < 1e-12);
    }

    #[test]
    fn kde_two_far_clusters_give_one_bit() {
        let sigma2 = DEFAULT_SIGMA2;
        let gap = 1e6 * sigma2.sqrt();
        let mut means = vec![vec![0.0, 0.0]; 5];
        means.extend(vec![vec![gap, 0.0]; 5]);
        let s = SampleSet::new(means, sigma2).unwrap();
        assert!((kde_mi_upper(&s) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn kde_bounded_by_log_n() {
        let means: Vec<Vec<f64>> = (0..6).map(|k| vec![1e9 * k as f64]).collect();
        let s = SampleSet::with_default_sigma(means).unwrap();
        let v = kde_mi_upper(&s);
        assert!(v >= 0.0 && v <= (6.0_f64).log2() + 1e-12);
        assert!((v - (6.0_f64).log2()).abs() < 1e-9);
    }

    #[test]
    fn dbscan_three_blobs() {
        let mut means = Vec::new();
        for c in 0..3 {
            let cx = 100.0 * c as f64;
            for k in 0..100 {
                // intra-blob spread well under eps/2
                means.push(vec![cx + 0.001 * k as f64, 0.0]);
            }
        }
        let s = SampleSet::new(means, 1.0).unwrap();
        let out = dbscan_clusters(&s, 1.0, 50);
        assert_eq!(out.n_clusters, 3);
        assert!(out.labels.iter().all(|&l| l >= 0));
    }

    #[test]
    fn dbscan_all_noise() {
        let means: Vec<Vec<f64>> = (0..10).map(|k| vec![10.0 * k as f64]).collect();
        let s = SampleSet::new(means, 1.0).unwrap();
        let out = dbscan_clusters(&s, 1.0, 2);
        assert_eq!(out.n_clusters, 0);
        assert!(out.labels.iter().all(|&l| l == -1));
    }

    #[test]
    fn dbscan_minimal_core() {
        let means = vec![vec![0.0]; 5];
        let s = SampleSet::new(means, 1.0).unwrap();
        let out = dbscan_clusters(&s, 0.5, 5);
        assert_eq!(out.n_clusters, 1);
    }

    #[test]
    fn plateau_report_counts_symbol_clusters() {
        let j = JointDistribution::identity(4);
        let cfg = SolverConfig::with_seed(1);
        // sharp point: four separated symbol embeddings
        let sharp = solve_classic(&j, 0.2, &cfg).unwrap();
        // collapsed point: one embedding
        let collapsed = solve_classic(&j, 1.5, &cfg).unwrap();
        let rep = plateau_cluster_report(&[sharp, collapsed], &j, 8000, 0.3, 50, 7).unwrap();
        assert_eq!(rep.rows[0].n_clusters, 4);
        assert_eq!(rep.rows[1].n_clusters, 1);
    }

    #[test]
    fn plateau_report_two_group_encoder() {
        let j = JointDistribution::identity(4);
        let e = Encoder::new(vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        let ind = induce(&j, &e).unwrap();
        let res = SolveResult {
            encoder: e,
            i_xt_bits: ind.i_xt_bits,
            i_ty_bits: ind.i_ty_bits,
            beta_u: 1.0,
            beta_effective: 1.0,
            objective: 0.0,
            outer_iterations: 0,
            inner_iterations: 0,
            converged: true,
            support_t: 2,
        };
        let rep = plateau_cluster_report(&[res], &j, 8000, 0.3, 50, 11).unwrap();
        assert_eq!(rep.rows[0].n_clusters, 2);
    }
}
