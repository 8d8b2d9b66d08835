//! IB-curve construction and verification: the deterministic closed form,
//! Pareto filtering of sweep output, and explorability reporting.

use crate::solver::SolveResult;

/// One solved point of the information plane.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub beta_u: f64,
    pub i_xt_bits: f64,
    pub i_ty_bits: f64,
    pub objective: f64,
    pub converged: bool,
    pub support_t: usize,
}

impl From<&SolveResult> for CurvePoint {
    fn from(r: &SolveResult) -> Self {
        CurvePoint {
            beta_u: r.beta_u,
            i_xt_bits: r.i_xt_bits,
            i_ty_bits: r.i_ty_bits,
            objective: r.objective,
            converged: r.converged,
            support_t: r.support_t,
        }
    }
}

/// Pareto-filtered, compression-ordered estimate of the curve.
#[derive(Debug, Clone)]
pub struct CurveEstimate {
    /// Points ordered by i_xt_bits.
    pub points: Vec<CurvePoint>,
    pub i_xy_bits: f64,
    /// Per-point flag: not dominated by any other point.
    pub pareto: Vec<bool>,
}

impl CurveEstimate {
    pub fn pareto_points(&self) -> impl Iterator<Item = &CurvePoint> {
        self.points
            .iter()
            .zip(&self.pareto)
            .filter_map(|(p, &keep)| keep.then_some(p))
    }

    /// Discrete concavity of the Pareto subset: second differences of i_ty
    /// over i_xt stay below `tol`.
    pub fn pareto_is_concave(&self, tol: f64) -> bool {
        let pts: Vec<&CurvePoint> = self.pareto_points().collect();
        for w in pts.windows(3) {
            let (a, b, c) = (w[0], w[1], w[2]);
            let d1 = b.i_xt_bits - a.i_xt_bits;
            let d2 = c.i_xt_bits - b.i_xt_bits;
            if d1 <= 0.0 || d2 <= 0.0 {
                continue;
            }
            let s1 = (b.i_ty_bits - a.i_ty_bits) / d1;
            let s2 = (c.i_ty_bits - b.i_ty_bits) / d2;
            if s2 - s1 > tol {
                return false;
            }
        }
        true
    }
}

/// The piecewise-linear deterministic IB curve: f(r) = min(r, i_xy).
pub fn deterministic_curve(i_xy: f64, r: f64) -> f64 {
    r.min(i_xy)
}

/// Marks dominated points (another point with <= compression and >=
/// relevance, strict in at least one) and orders by compression.
pub fn pareto_filter(points: &[CurvePoint], i_xy_bits: f64) -> CurveEstimate {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .i_xt_bits
            .partial_cmp(&points[b].i_xt_bits)
            .unwrap()
            .then(points[a].i_ty_bits.partial_cmp(&points[b].i_ty_bits).unwrap())
    });
    let sorted: Vec<CurvePoint> = order.iter().map(|&i| points[i].clone()).collect();
    let pareto: Vec<bool> = sorted
        .iter()
        .map(|p| {
            !sorted.iter().any(|q| {
                q.i_xt_bits <= p.i_xt_bits
                    && q.i_ty_bits >= p.i_ty_bits
                    && (q.i_xt_bits < p.i_xt_bits || q.i_ty_bits > p.i_ty_bits)
            })
        })
        .collect();
    CurveEstimate {
        points: sorted,
        i_xy_bits,
        pareto,
    }
}

/// Summary of how well a sweep explored the curve.
#[derive(Debug, Clone)]
pub struct ExplorabilityReport {
    pub family: String,
    pub resolution_bits: f64,
    /// Count of compression clusters at the given resolution.
    pub distinct_levels: usize,
    /// Largest gap between consecutive achieved compressions.
    pub max_gap_bits: f64,
    /// Fraction of [0, i_xy] covered by resolution-sized bins around points.
    pub coverage_fraction: f64,
    /// Per point |i_ty - min(i_xt, i_xy)|, meaningful on deterministic instances.
    pub deterministic_deviation_bits: Vec<f64>,
}

/// Operationalizes the explorability contrast: the classic Lagrangian yields
/// one level on deterministic instances, convex families spread across the
/// curve.
pub fn explorability_report(
    est: &CurveEstimate,
    family_name: &str,
    resolution: f64,
) -> ExplorabilityReport {
    let mut xs: Vec<f64> = est.points.iter().map(|p| p.i_xt_bits).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut distinct = 0;
    let mut cluster_start = f64::NEG_INFINITY;
    for &x in &xs {
        if x - cluster_start > resolution {
            distinct += 1;
            cluster_start = x;
        }
    }
    let max_gap = xs
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0_f64, f64::max);

    let coverage = if est.i_xy_bits > 0.0 {
        let nbins = (est.i_xy_bits / resolution).ceil() as usize;
        let mut hit = vec![false; nbins.max(1)];
        for &x in &xs {
            if x <= est.i_xy_bits {
                let b = ((x / resolution) as usize).min(hit.len() - 1);
                hit[b] = true;
            }
        }
        hit.iter().filter(|&&h| h).count() as f64 / hit.len() as f64
    } else {
        1.0
    };

    let deviations = est
        .points
        .iter()
        .map(|p| (p.i_ty_bits - deterministic_curve(est.i_xy_bits, p.i_xt_bits)).abs())
        .collect();

    ExplorabilityReport {
        family: family_name.to_string(),
        resolution_bits: resolution,
        distinct_levels: distinct,
        max_gap_bits: max_gap,
        coverage_fraction: coverage,
        deterministic_deviation_bits: deviations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(i_xt: f64, i_ty: f64) -> CurvePoint {
        CurvePoint {
            beta_u: 0.0,
            i_xt_bits: i_xt,
            i_ty_bits: i_ty,
            objective: 0.0,
            converged: true,
            support_t: 1,
        }
    }

    #[test]
    fn deterministic_curve_values() {
        let i_xy = 10f64.log2();
        assert!((deterministic_curve(i_xy, 1.0) - 1.0).abs() < 1e-12);
        assert!((deterministic_curve(i_xy, 5.0) - 3.3219).abs() < 1e-4);
        assert_eq!(deterministic_curve(i_xy, 0.0), 0.0);
    }

    #[test]
    fn deterministic_curve_idempotent_nondecreasing() {
        let i_xy = 2.0;
        let mut prev = -1.0;
        for k in 0..100 {
            let r = k as f64 * 0.025;
            let v = deterministic_curve(i_xy, r);
            assert!(v >= prev);
            prev = v;
            if r <= i_xy {
                assert!((deterministic_curve(i_xy, v) - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pareto_dominated_same_cost() {
        let est = pareto_filter(&[pt(1.0, 1.0), pt(1.0, 0.5)], 2.0);
        assert_eq!(est.pareto, vec![false, true]);
        assert!((est.points[1].i_ty_bits - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pareto_dominated_same_value() {
        let est = pareto_filter(&[pt(1.0, 1.0), pt(2.0, 1.0)], 2.0);
        let kept: Vec<f64> = est.pareto_points().map(|p| p.i_xt_bits).collect();
        assert_eq!(kept, vec![1.0]);
    }

    #[test]
    fn pareto_tradeoff_chain_all_kept() {
        let est = pareto_filter(&[pt(1.5, 1.0), pt(0.5, 0.5), pt(1.0, 0.9)], 2.0);
        assert!(est.pareto.iter().all(|&p| p));
        let xs: Vec<f64> = est.points.iter().map(|p| p.i_xt_bits).collect();
        assert_eq!(xs, vec![0.5, 1.0, 1.5]);
    }

    #[test]
    fn pareto_invariant_to_order() {
        let pts = vec![pt(0.5, 0.5), pt(1.0, 0.9), pt(1.5, 1.0), pt(1.2, 0.4)];
        let a = pareto_filter(&pts, 2.0);
        let mut rev = pts.clone();
        rev.reverse();
        let b = pareto_filter(&rev, 2.0);
        assert_eq!(a.points, b.points);
        assert_eq!(a.pareto, b.pareto);
    }

    #[test]
    fn report_counts_single_level() {
        let pts: Vec<CurvePoint> = (0..9).map(|k| pt(2.0 + 0.004 * k as f64, 2.0)).collect();
        let est = pareto_filter(&pts, 2.0);
        let rep = explorability_report(&est, "identity", 0.1);
        assert_eq!(rep.distinct_levels, 1);
    }

    #[test]
    fn report_counts_spread_levels() {
        let pts: Vec<CurvePoint> = (0..10).map(|k| pt(0.2 * k as f64, 0.2 * k as f64)).collect();
        let est = pareto_filter(&pts, 2.0);
        let rep = explorability_report(&est, "pow:1", 0.1);
        assert_eq!(rep.distinct_levels, 10);
        assert!((rep.max_gap_bits - 0.2).abs() < 1e-12);
        assert!(rep.deterministic_deviation_bits.iter().all(|&d| d < 1e-12));
    }
}
