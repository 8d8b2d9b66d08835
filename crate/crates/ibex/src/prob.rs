//! Finite-alphabet probability machinery.
//!
//! Everything here is exact up to floating point: entropies, mutual
//! information and KL divergence over explicit mass vectors/matrices, plus
//! channel composition along the Markov chain `Y <-> X <-> T` and the
//! cross-entropy decoding cost with its mutual-information bound.
//!
//! All quantities are in bits (base-2 logarithms), with `0 log 0 := 0`.

use thiserror::Error;

/// Tolerance on normalization of validated objects.
pub const NORM_TOL: f64 = 1e-9;
/// Mass-sum deviation beyond which raw input is rejected instead of renormalized.
pub const REJECT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbError {
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("mass sums to {sum}, deviating from 1 by more than {REJECT_TOL}")]
    SumOutOfTolerance { sum: f64 },
    #[error("no x symbols with positive mass remain after pruning")]
    EmptyAfterPruning,
    #[error("support violation at index {index}: p > 0 where q = 0")]
    SupportViolation { index: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

pub(crate) fn xlog2x(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// A probability mass vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    mass: Vec<f64>,
}

impl Distribution {
    pub fn new(mass: Vec<f64>) -> Result<Self, ProbError> {
        for (i, &p) in mass.iter().enumerate() {
            if p < 0.0 {
                return Err(ProbError::NegativeEntry {
                    row: 0,
                    col: i,
                    value: p,
                });
            }
        }
        let sum: f64 = mass.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(ProbError::SumOutOfTolerance { sum });
        }
        Ok(Self { mass })
    }

    /// Normalizes a nonnegative vector with positive total mass.
    pub fn from_unnormalized(raw: &[f64]) -> Result<Self, ProbError> {
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(ProbError::EmptyAfterPruning);
        }
        let mass = raw.iter().map(|&p| p / sum).collect();
        Self::new(mass)
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            mass: vec![1.0 / n as f64; n],
        }
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }
}

/// Shannon entropy H(d) in bits.
pub fn entropy(d: &Distribution) -> f64 {
    -d.mass.iter().copied().map(xlog2x).sum::<f64>()
}

/// KL divergence D(p || q) in bits. Requires support(p) contained in support(q).
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<f64, ProbError> {
    if p.len() != q.len() {
        return Err(ProbError::ShapeMismatch(format!(
            "KL over lengths {} and {}",
            p.len(),
            q.len()
        )));
    }
    kl_divergence_raw(p.mass(), q.mass())
}

/// KL divergence over raw mass slices; callers guarantee both are normalized.
pub(crate) fn kl_divergence_raw(p: &[f64], q: &[f64]) -> Result<f64, ProbError> {
    let mut d = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(ProbError::SupportViolation { index: i });
            }
            d += pi * (pi / qi).log2();
        }
    }
    Ok(d.max(0.0))
}

/// Report from [`JointDistribution::validate`]: the cleaned joint plus the
/// indices of x symbols that carried zero mass and were dropped.
#[derive(Debug, Clone)]
pub struct ValidatedJoint {
    pub joint: JointDistribution,
    pub pruned_x: Vec<usize>,
}

/// A finite joint distribution p(X, Y), rows indexed by x.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    matrix: Vec<Vec<f64>>,
    nx: usize,
    ny: usize,
}

impl JointDistribution {
    /// Validates a raw matrix: rejects negative entries and gross mass
    /// deviation, renormalizes small drift, and drops all-zero x rows.
    pub fn validate(raw: &[Vec<f64>]) -> Result<ValidatedJoint, ProbError> {
        if raw.is_empty() || raw[0].is_empty() {
            return Err(ProbError::ShapeMismatch("empty matrix".into()));
        }
        let ny = raw[0].len();
        for (i, row) in raw.iter().enumerate() {
            if row.len() != ny {
                return Err(ProbError::ShapeMismatch(format!(
                    "row {i} has {} columns, expected {ny}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if v < 0.0 {
                    return Err(ProbError::NegativeEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        let sum: f64 = raw.iter().flatten().sum();
        if (sum - 1.0).abs() > REJECT_TOL {
            return Err(ProbError::SumOutOfTolerance { sum });
        }
        let mut pruned_x = Vec::new();
        let mut matrix = Vec::new();
        for (i, row) in raw.iter().enumerate() {
            if row.iter().sum::<f64>() > 0.0 {
                matrix.push(row.iter().map(|&v| v / sum).collect());
            } else {
                pruned_x.push(i);
            }
        }
        if matrix.is_empty() {
            return Err(ProbError::EmptyAfterPruning);
        }
        let nx = matrix.len();
        Ok(ValidatedJoint {
            joint: JointDistribution { matrix, nx, ny },
            pruned_x,
        })
    }

    /// Uniform joint concentrated on the diagonal: X uniform, Y = X.
    pub fn identity(n: usize) -> Self {
        let mut matrix = vec![vec![0.0; n]; n];
        for (i, row) in matrix.iter_mut().enumerate() {
            row[i] = 1.0 / n as f64;
        }
        JointDistribution { matrix, nx: n, ny: n }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.matrix[x][y]
    }

    /// Marginal p(X). Strictly positive by construction (zero rows pruned).
    pub fn px(&self) -> Distribution {
        Distribution {
            mass: self.matrix.iter().map(|r| r.iter().sum()).collect(),
        }
    }

    /// Marginal p(Y).
    pub fn py(&self) -> Distribution {
        let mut mass = vec![0.0; self.ny];
        for row in &self.matrix {
            for (j, &v) in row.iter().enumerate() {
                mass[j] += v;
            }
        }
        Distribution { mass }
    }

    /// Conditional rows p(Y | X = x).
    pub fn py_given_x(&self) -> Vec<Vec<f64>> {
        self.matrix
            .iter()
            .map(|row| {
                let s: f64 = row.iter().sum();
                row.iter().map(|&v| v / s).collect()
            })
            .collect()
    }
}

/// Mutual information I(X;Y) of a joint, in bits.
pub fn mutual_information(j: &JointDistribution) -> f64 {
    mi_of_joint(j.matrix())
}

/// I of an explicit joint matrix; rows and columns may carry zero mass.
pub(crate) fn mi_of_joint(matrix: &[Vec<f64>]) -> f64 {
    let ny = matrix[0].len();
    let row_m: Vec<f64> = matrix.iter().map(|r| r.iter().sum()).collect();
    let mut col_m = vec![0.0; ny];
    for row in matrix {
        for (j, &v) in row.iter().enumerate() {
            col_m[j] += v;
        }
    }
    let mut i = 0.0;
    for (r, row) in matrix.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if v > 0.0 {
                i += v * (v / (row_m[r] * col_m[c])).log2();
            }
        }
    }
    i.max(0.0)
}

/// Row-stochastic matrix: generic building block for encoders and decoders.
fn validate_rows(matrix: &[Vec<f64>]) -> Result<(), ProbError> {
    if matrix.is_empty() || matrix[0].is_empty() {
        return Err(ProbError::ShapeMismatch("empty matrix".into()));
    }
    let cols = matrix[0].len();
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != cols {
            return Err(ProbError::ShapeMismatch(format!(
                "row {i} has {} columns, expected {cols}",
                row.len()
            )));
        }
        for (j, &v) in row.iter().enumerate() {
            if v < 0.0 {
                return Err(ProbError::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > NORM_TOL {
            return Err(ProbError::SumOutOfTolerance { sum: s });
        }
    }
    Ok(())
}

/// Conditional channel q(T | X): |X| rows, |T| columns, row-stochastic.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    matrix: Vec<Vec<f64>>,
}

impl Encoder {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self, ProbError> {
        validate_rows(&matrix)?;
        Ok(Self { matrix })
    }

    /// Renormalizes nonnegative rows with positive mass.
    pub(crate) fn from_rows_unchecked(mut matrix: Vec<Vec<f64>>) -> Self {
        for row in &mut matrix {
            let s: f64 = row.iter().sum();
            for v in row.iter_mut() {
                *v /= s;
            }
        }
        Self { matrix }
    }

    pub fn identity(n: usize) -> Self {
        let mut matrix = vec![vec![0.0; n]; n];
        for (i, row) in matrix.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self { matrix }
    }

    /// Constant encoder: every x maps to t = 0.
    pub fn constant(nx: usize, nt: usize) -> Self {
        let mut matrix = vec![vec![0.0; nt]; nx];
        for row in &mut matrix {
            row[0] = 1.0;
        }
        Self { matrix }
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn nx(&self) -> usize {
        self.matrix.len()
    }

    pub fn nt(&self) -> usize {
        self.matrix[0].len()
    }
}

/// Decoding channel q(Y | T): |T| rows, |Y| columns, row-stochastic.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoder {
    matrix: Vec<Vec<f64>>,
}

impl Decoder {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self, ProbError> {
        validate_rows(&matrix)?;
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }
}

/// Quantities induced by an encoder on a joint: the bottleneck marginal q(T),
/// the decoding posterior q(Y|T), and the achieved information pair.
#[derive(Debug, Clone)]
pub struct InducedQuantities {
    pub q_t: Distribution,
    pub q_y_given_t: Vec<Vec<f64>>,
    pub i_xt_bits: f64,
    pub i_ty_bits: f64,
    /// t symbols with q(t) = 0; their q(Y|T) rows are uniform placeholders
    /// and never enter information sums.
    pub zero_mass_t: Vec<usize>,
}

/// Composes an encoder with a joint along Y <-> X <-> T.
pub fn induce(j: &JointDistribution, e: &Encoder) -> Result<InducedQuantities, ProbError> {
    if e.nx() != j.nx() {
        return Err(ProbError::ShapeMismatch(format!(
            "encoder has {} rows, joint has {} x symbols",
            e.nx(),
            j.nx()
        )));
    }
    let nt = e.nt();
    let ny = j.ny();
    let px = j.px();

    // joint p(x, t) = p(x) q(t|x)
    let xt: Vec<Vec<f64>> = (0..j.nx())
        .map(|x| e.matrix()[x].iter().map(|&q| px.mass()[x] * q).collect())
        .collect();
    // joint q(t, y) = sum_x p(x, y) q(t|x)
    let mut ty = vec![vec![0.0; ny]; nt];
    for x in 0..j.nx() {
        for t in 0..nt {
            let w = e.matrix()[x][t];
            if w > 0.0 {
                for y in 0..ny {
                    ty[t][y] += j.p(x, y) * w;
                }
            }
        }
    }

    let q_t_mass: Vec<f64> = ty.iter().map(|r| r.iter().sum()).collect();
    let mut zero_mass_t = Vec::new();
    let q_y_given_t: Vec<Vec<f64>> = ty
        .iter()
        .enumerate()
        .map(|(t, row)| {
            let s = q_t_mass[t];
            if s > 0.0 {
                row.iter().map(|&v| v / s).collect()
            } else {
                zero_mass_t.push(t);
                vec![1.0 / ny as f64; ny]
            }
        })
        .collect();

    Ok(InducedQuantities {
        q_t: Distribution { mass: q_t_mass },
        q_y_given_t,
        i_xt_bits: mi_of_joint(&xt),
        i_ty_bits: mi_of_joint(&ty),
        zero_mass_t,
    })
}

/// Expected cross-entropy decoding cost J_CE in bits.
///
/// Satisfies I(T;Y) >= H(Y) - J_CE, with equality when the decoder equals the
/// induced posterior q(Y|T).
pub fn cross_entropy_cost(
    j: &JointDistribution,
    e: &Encoder,
    d: &Decoder,
) -> Result<f64, ProbError> {
    let ind = induce(j, e)?;
    if d.matrix().len() != e.nt() || d.matrix()[0].len() != j.ny() {
        return Err(ProbError::ShapeMismatch(format!(
            "decoder is {}x{}, expected {}x{}",
            d.matrix().len(),
            d.matrix()[0].len(),
            e.nt(),
            j.ny()
        )));
    }
    let mut cost = 0.0;
    for (t, &qt) in ind.q_t.mass().iter().enumerate() {
        if qt == 0.0 {
            continue;
        }
        for (y, &qyt) in ind.q_y_given_t[t].iter().enumerate() {
            if qyt > 0.0 {
                let dy = d.matrix()[t][y];
                if dy <= 0.0 {
                    return Err(ProbError::SupportViolation { index: y });
                }
                cost -= qt * qyt * dy.log2();
            }
        }
    }
    Ok(cost)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(mass: &[f64]) -> Distribution {
        Distribution::new(mass.to_vec()).unwrap()
    }

    #[test]
    fn validate_accepts_uniform() {
        let v = JointDistribution::validate(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        assert_eq!(v.joint.nx(), 2);
        assert_eq!(v.joint.ny(), 2);
        assert!(v.pruned_x.is_empty());
    }

    #[test]
    fn validate_prunes_zero_rows() {
        let v = JointDistribution::validate(&[vec![0.5, 0.5], vec![0.0, 0.0]]).unwrap();
        assert_eq!(v.joint.nx(), 1);
        assert_eq!(v.pruned_x, vec![1]);
    }

    #[test]
    fn validate_rejects_negative() {
        let err = JointDistribution::validate(&[vec![0.3, -0.1], vec![0.4, 0.4]]).unwrap_err();
        assert!(matches!(err, ProbError::NegativeEntry { .. }));
    }

    #[test]
    fn validate_rejects_bad_sum() {
        let err = JointDistribution::validate(&[vec![0.3, 0.3], vec![0.3, 0.3]]).unwrap_err();
        assert!(matches!(err, ProbError::SumOutOfTolerance { .. }));
    }

    #[test]
    fn validate_rejects_all_zero() {
        // within the rejection tolerance of mass 1 is impossible for the
        // all-zero matrix, so force the pruning path with a tiny epsilon
        let err = JointDistribution::validate(&[vec![0.0, 0.0]]).map(|_| ());
        assert!(err.is_err());
    }

    #[test]
    fn entropy_values() {
        assert!((entropy(&dist(&[0.5, 0.5])) - 1.0).abs() < 1e-12);
        assert!(entropy(&dist(&[1.0, 0.0])).abs() < 1e-12);
        assert!((entropy(&dist(&[0.5, 0.25, 0.25])) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn mi_values() {
        let ident = JointDistribution::identity(4);
        assert!((mutual_information(&ident) - 2.0).abs() < 1e-12);

        // product joint -> zero MI
        let v = JointDistribution::validate(&[vec![0.06, 0.14], vec![0.24, 0.56]]).unwrap();
        assert!(mutual_information(&v.joint).abs() < 1e-12);

        // frozen from the direct double-sum oracle
        let v = JointDistribution::validate(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        assert!((mutual_information(&v.joint) - 0.27807).abs() < 1e-5);
    }

    #[test]
    fn kl_values() {
        let p = dist(&[0.3, 0.7]);
        assert!(kl_divergence(&p, &p).unwrap().abs() < 1e-12);
        let d = kl_divergence(&dist(&[1.0, 0.0]), &dist(&[0.5, 0.5])).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        // frozen from the direct summation oracle
        let d = kl_divergence(&dist(&[0.75, 0.25]), &dist(&[0.5, 0.5])).unwrap();
        assert!((d - 0.18872).abs() < 1e-5);
    }

    #[test]
    fn kl_support_violation() {
        let err = kl_divergence(&dist(&[0.5, 0.5]), &dist(&[1.0, 0.0])).unwrap_err();
        assert_eq!(err, ProbError::SupportViolation { index: 1 });
    }

    #[test]
    fn induce_identity_encoder() {
        let j = JointDistribution::identity(4);
        let ind = induce(&j, &Encoder::identity(4)).unwrap();
        assert!((ind.i_xt_bits - 2.0).abs() < 1e-12);
        assert!((ind.i_ty_bits - 2.0).abs() < 1e-12);
    }

    #[test]
    fn induce_constant_encoder() {
        let j = JointDistribution::identity(4);
        let ind = induce(&j, &Encoder::constant(4, 4)).unwrap();
        assert!(ind.i_xt_bits.abs() < 1e-12);
        assert!(ind.i_ty_bits.abs() < 1e-12);
        assert_eq!(ind.zero_mass_t, vec![1, 2, 3]);
    }

    #[test]
    fn induce_pair_merging_encoder() {
        // frozen from exhaustive computation of the induced joint: merging
        // {0,1} and {2,3} of a uniform 4x4 identity gives one bit each way
        let j = JointDistribution::identity(4);
        let e = Encoder::new(vec![
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        let ind = induce(&j, &e).unwrap();
        assert!((ind.i_xt_bits - 1.0).abs() < 1e-12);
        assert!((ind.i_ty_bits - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_at_induced_posterior_is_conditional_entropy() {
        let v = JointDistribution::validate(&[
            vec![0.20, 0.05, 0.05],
            vec![0.10, 0.25, 0.05],
            vec![0.05, 0.05, 0.20],
        ])
        .unwrap();
        let j = v.joint;
        let e = Encoder::new(vec![
            vec![0.7, 0.3],
            vec![0.2, 0.8],
            vec![0.5, 0.5],
        ])
        .unwrap();
        let ind = induce(&j, &e).unwrap();
        let d = Decoder::new(ind.q_y_given_t.clone()).unwrap();
        let jce = cross_entropy_cost(&j, &e, &d).unwrap();
        let hy = entropy(&j.py());
        // I(T;Y) = H(Y) - J_CE exactly when the decoder is the induced posterior
        assert!((ind.i_ty_bits - (hy - jce)).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_uniform_decoder() {
        let j = JointDistribution::identity(4);
        let e = Encoder::identity(4);
        let d = Decoder::new(vec![vec![0.25; 4]; 4]).unwrap();
        let jce = cross_entropy_cost(&j, &e, &d).unwrap();
        assert!((jce - 2.0).abs() < 1e-12);
    }
}
