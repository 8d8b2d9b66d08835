//! Maximization of the classic and convex IB Lagrangians over finite encoders.
//!
//! The inner engine is the self-consistent Blahut-Arimoto update at a fixed
//! effective multiplier. The convex objective is handled by an outer scalar
//! fixed point tying the effective multiplier to the current compression,
//! `beta_eff = beta_u u'(I(X;T))`, driven by damped iteration with a
//! bisection fallback. Every encoder iterate seen anywhere in the process is
//! scored against the convex objective and the best one wins, which makes
//! the search robust to the flat classic landscape of deterministic
//! instances.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lagrangian::{self, CurveSpec, UFamily};
use crate::prob::{entropy, induce, Encoder, InducedQuantities, JointDistribution, ProbError};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Lagrangian(#[from] lagrangian::LagrangianError),
    #[error("instance too large for the gradient oracle: |X| x |T| = {0} > 64")]
    SizeLimit(usize),
}

/// Knobs for the iterative solvers. Identical configs (including seed) give
/// bit-identical results.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Bottleneck cardinality |T|; defaults to |X|.
    pub cardinality_t: Option<usize>,
    pub max_outer: usize,
    pub max_inner: usize,
    pub tol_objective: f64,
    pub tol_fixed_point: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Multiplicative annealing ladder applied to the target effective
    /// multiplier, ending at 1.
    pub anneal: Vec<f64>,
    /// Damping for the outer fixed-point update, in (0, 1].
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        // geometric ladder of 8 factors rising to 1; starting below the
        // target keeps the inner iteration on the sharp side of the
        // collapse transition, which BA cannot escape once entered
        let steps = 8;
        let start = 2.0 / 3.0_f64;
        let anneal = (0..steps)
            .map(|k| start.powf(1.0 - k as f64 / (steps - 1) as f64))
            .collect();
        SolverConfig {
            cardinality_t: None,
            max_outer: 200,
            max_inner: 2000,
            tol_objective: 1e-9,
            tol_fixed_point: 1e-7,
            restarts: 10,
            seed: 0,
            anneal,
            damping: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(seed: u64) -> Self {
        SolverConfig {
            seed,
            ..Self::default()
        }
    }

    fn nt(&self, j: &JointDistribution) -> usize {
        self.cardinality_t.unwrap_or(j.nx()).max(1)
    }
}

/// Deterministic per-task seed derivation (splitmix-style spread).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Outcome of one solve.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub encoder: Encoder,
    pub i_xt_bits: f64,
    pub i_ty_bits: f64,
    pub beta_u: f64,
    pub beta_effective: f64,
    pub objective: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub converged: bool,
    /// Count of t symbols with induced mass above 1e-6.
    pub support_t: usize,
}

/// One Blahut-Arimoto update. `degenerate` marks the fallback to the
/// constant encoder when every t symbol lost support.
#[derive(Debug, Clone)]
pub struct BaOutcome {
    pub encoder: Encoder,
    pub degenerate: bool,
}

/// Self-consistent update at effective multiplier `beta_eff`:
/// q(t|x) proportional to q(t) 2^(-KL(p(y|x) || q(y|t)) / beta_eff).
/// `beta_eff = 0` is the hard limit: all mass on the KL-minimizing symbols.
pub fn ba_step(
    j: &JointDistribution,
    e: &Encoder,
    beta_eff: f64,
) -> Result<BaOutcome, SolverError> {
    let ind = induce(j, e)?;
    Ok(ba_step_induced(j, &ind, e.nt(), beta_eff))
}

fn ba_step_induced(
    j: &JointDistribution,
    ind: &InducedQuantities,
    nt: usize,
    beta_eff: f64,
) -> BaOutcome {
    let py_given_x = j.py_given_x();
    let nx = j.nx();
    let mut rows = Vec::with_capacity(nx);
    let mut degenerate = false;

    for px_row in py_given_x.iter().take(nx) {
        // KL(p(y|x) || q(y|t)) in bits, +inf on support violation
        let mut kl = vec![0.0_f64; nt];
        for (t, k) in kl.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (y, &p) in px_row.iter().enumerate() {
                if p > 0.0 {
                    let q = ind.q_y_given_t[t][y];
                    if q <= 0.0 {
                        acc = f64::INFINITY;
                        break;
                    }
                    acc += p * (p / q).log2();
                }
            }
            *k = acc;
        }

        let mut scores = vec![f64::NEG_INFINITY; nt];
        if beta_eff == 0.0 {
            // hard assignment: weight by q(t) over the KL minimizers
            let kmin = kl
                .iter()
                .enumerate()
                .filter(|(t, _)| ind.q_t.mass()[*t] > 0.0)
                .map(|(_, &k)| k)
                .fold(f64::INFINITY, f64::min);
            for t in 0..nt {
                let qt = ind.q_t.mass()[t];
                if qt > 0.0 && kl[t] <= kmin {
                    scores[t] = qt.log2();
                }
            }
        } else {
            for t in 0..nt {
                let qt = ind.q_t.mass()[t];
                if qt > 0.0 && kl[t].is_finite() {
                    scores[t] = qt.log2() - kl[t] / beta_eff;
                }
            }
        }

        let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            degenerate = true;
            break;
        }
        let row: Vec<f64> = scores
            .iter()
            .map(|&s| {
                if s == f64::NEG_INFINITY {
                    0.0
                } else {
                    (s - m).exp2()
                }
            })
            .collect();
        rows.push(row);
    }

    if degenerate {
        return BaOutcome {
            encoder: Encoder::constant(nx, nt),
            degenerate: true,
        };
    }
    BaOutcome {
        encoder: Encoder::from_rows_unchecked(rows),
        degenerate: false,
    }
}

/// Best-so-far tracker scored by the convex objective at (family, beta_u).
/// Equal objectives break toward the lower compression.
struct CandidateSet<'a> {
    family: &'a UFamily,
    beta_u: f64,
    best: Option<(Encoder, f64, f64, f64)>, // encoder, i_xt, i_ty, objective
}

impl<'a> CandidateSet<'a> {
    fn new(family: &'a UFamily, beta_u: f64) -> Self {
        CandidateSet {
            family,
            beta_u,
            best: None,
        }
    }

    fn consider(&mut self, encoder: &Encoder, ind: &InducedQuantities) {
        let obj = lagrangian::objective(ind.i_xt_bits, ind.i_ty_bits, self.family, self.beta_u);
        if !obj.value.is_finite() {
            return;
        }
        let better = match &self.best {
            None => true,
            Some((_, best_ixt, _, best_obj)) => {
                obj.value > best_obj + 1e-12
                    || ((obj.value - best_obj).abs() <= 1e-12 && ind.i_xt_bits < *best_ixt)
            }
        };
        if better {
            self.best = Some((encoder.clone(), ind.i_xt_bits, ind.i_ty_bits, obj.value));
        }
    }
}

/// Dirichlet(1) rows, blended toward the identity assignment when the
/// bottleneck alphabet can hold it; symmetric inits are BA fixed points and
/// must be broken.
fn init_encoder(rng: &mut ChaCha8Rng, nx: usize, nt: usize) -> Encoder {
    let mut rows = Vec::with_capacity(nx);
    for x in 0..nx {
        let mut row: Vec<f64> = (0..nt)
            .map(|_| -(1.0 - rng.gen::<f64>()).ln())
            .collect();
        let s: f64 = row.iter().sum();
        for v in row.iter_mut() {
            *v /= s;
        }
        if nt >= nx {
            for (t, v) in row.iter_mut().enumerate() {
                *v = 0.5 * *v + if t == x { 0.5 } else { 0.0 };
            }
        }
        rows.push(row);
    }
    Encoder::from_rows_unchecked(rows)
}

/// Deterministic encoder mapping x to x mod |T|.
fn identity_mod_encoder(nx: usize, nt: usize) -> Encoder {
    let mut rows = vec![vec![0.0; nt]; nx];
    for (x, row) in rows.iter_mut().enumerate() {
        row[x % nt] = 1.0;
    }
    Encoder::from_rows_unchecked(rows)
}

/// Runs the annealed BA ladder to the target multiplier, reporting every
/// iterate to the candidate tracker. Returns (final encoder, steps used,
/// converged at the final stage).
fn run_ba_ladder(
    j: &JointDistribution,
    e0: Encoder,
    beta_target: f64,
    ladder: &[f64],
    step_budget: usize,
    tol_objective: f64,
    cands: &mut CandidateSet<'_>,
) -> (Encoder, usize, bool) {
    let nt = e0.nt();
    let mut e = e0;
    let mut steps = 0;
    let mut converged = false;
    let stages: Vec<f64> = if beta_target == 0.0 {
        vec![0.0]
    } else {
        ladder.iter().map(|f| f * beta_target).collect()
    };
    let per_stage = (step_budget / stages.len()).max(8);

    for (si, &beta) in stages.iter().enumerate() {
        let last_stage = si + 1 == stages.len();
        let mut prev_obj = f64::NEG_INFINITY;
        converged = false;
        for _ in 0..per_stage {
            let ind = match induce(j, &e) {
                Ok(ind) => ind,
                Err(_) => break,
            };
            cands.consider(&e, &ind);
            let obj = ind.i_ty_bits - beta * ind.i_xt_bits;
            if (obj - prev_obj).abs() < tol_objective {
                converged = true;
                break;
            }
            prev_obj = obj;
            let out = ba_step_induced(j, &ind, nt, beta);
            e = out.encoder;
            steps += 1;
            if out.degenerate {
                break;
            }
        }
        if !last_stage {
            continue;
        }
    }
    if let Ok(ind) = induce(j, &e) {
        cands.consider(&e, &ind);
    }
    (e, steps, converged)
}

fn result_from_candidates(
    j: &JointDistribution,
    cands: CandidateSet<'_>,
    beta_u: f64,
    beta_effective: f64,
    outer: usize,
    inner: usize,
    converged: bool,
) -> SolveResult {
    let (encoder, i_xt, i_ty, objective) = cands
        .best
        .expect("candidate set seeded with the constant encoder");
    let ind = induce(j, &encoder).expect("best candidate was induced before");
    let support_t = ind.q_t.mass().iter().filter(|&&q| q > 1e-6).count();
    SolveResult {
        encoder,
        i_xt_bits: i_xt,
        i_ty_bits: i_ty,
        beta_u,
        beta_effective,
        objective,
        outer_iterations: outer,
        inner_iterations: inner,
        converged,
        support_t,
    }
}

/// Seeds the tracker with the two closed-form encoders every solve must
/// dominate: the constant map and the (mod-|T|) identity map.
fn seed_candidates(
    j: &JointDistribution,
    nt: usize,
    cands: &mut CandidateSet<'_>,
) -> Result<(), SolverError> {
    for e in [Encoder::constant(j.nx(), nt), identity_mod_encoder(j.nx(), nt)] {
        let ind = induce(j, &e)?;
        cands.consider(&e, &ind);
    }
    Ok(())
}

/// Maximizes the classic Lagrangian I(T;Y) - beta I(X;T).
pub fn solve_classic(
    j: &JointDistribution,
    beta: f64,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    let nt = cfg.nt(j);
    let family = UFamily::Identity;
    let mut cands = CandidateSet::new(&family, beta);
    seed_candidates(j, nt, &mut cands)?;

    let mut inner_total = 0;
    let mut any_converged = false;
    for restart in 0..cfg.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, restart as u64));
        let e0 = init_encoder(&mut rng, j.nx(), nt);
        let (_, steps, conv) = run_ba_ladder(
            j,
            e0,
            beta,
            &cfg.anneal,
            cfg.max_inner,
            cfg.tol_objective,
            &mut cands,
        );
        inner_total += steps;
        any_converged |= conv;
    }
    Ok(result_from_candidates(
        j,
        cands,
        beta,
        beta,
        0,
        inner_total,
        any_converged,
    ))
}

/// Maximizes the convex Lagrangian I(T;Y) - beta_u u(I(X;T)).
///
/// The outer loop solves the scalar fixed point r = I(X;T) of
/// beta_eff(r) = beta_u u'(r) over r in [0, H(X)] by damped iteration with a
/// bisection fallback; the fixed point is unique because u' is strictly
/// increasing while the classic solution is non-increasing in beta.
pub fn solve_convex(
    j: &JointDistribution,
    f: &UFamily,
    beta_u: f64,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    if f.is_identity() {
        return solve_classic(j, beta_u, cfg);
    }
    if beta_u == 0.0 {
        // pure I(T;Y) maximization
        let mut res = solve_classic(j, 0.0, cfg)?;
        res.beta_effective = 0.0;
        return Ok(res);
    }

    let nt = cfg.nt(j);
    let h_x = entropy(&j.px());
    let mut cands = CandidateSet::new(f, beta_u);
    seed_candidates(j, nt, &mut cands)?;

    let beta_eff_at = |r: f64| -> f64 {
        let ln_beta = beta_u.ln() + f.u_prime_ln(r.max(0.0));
        ln_beta.exp().clamp(1e-12, 1e12)
    };
    let inner_per_outer = (cfg.max_inner / cfg.max_outer).max(40) * cfg.anneal.len().max(1);

    let mut inner_total = 0;
    let mut outer_total = 0;
    let mut any_converged = false;

    for restart in 0..cfg.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, restart as u64));
        let e0 = init_encoder(&mut rng, j.nx(), nt);

        let ind0 = induce(j, &e0)?;
        cands.consider(&e0, &ind0);
        let mut r = ind0.i_xt_bits.clamp(0.0, h_x);
        let (mut lo, mut hi) = (0.0_f64, h_x);
        let mut best_gap = f64::INFINITY;
        let mut stall = 0;
        let mut converged = false;

        for _ in 0..cfg.max_outer {
            outer_total += 1;
            let beta_eff = beta_eff_at(r);
            let (e_final, steps, _) = run_ba_ladder(
                j,
                e0.clone(),
                beta_eff,
                &cfg.anneal,
                inner_per_outer,
                cfg.tol_objective,
                &mut cands,
            );
            inner_total += steps;
            let r_new = induce(j, &e_final)?.i_xt_bits;
            let gap = r_new - r;

            if gap > cfg.tol_fixed_point {
                lo = lo.max(r);
            } else if gap < -cfg.tol_fixed_point {
                hi = hi.min(r);
            } else {
                converged = true;
                break;
            }
            if hi - lo < cfg.tol_fixed_point {
                converged = true;
                break;
            }

            if gap.abs() < best_gap - 1e-12 {
                best_gap = gap.abs();
                stall = 0;
            } else {
                stall += 1;
            }
            let damped = r + cfg.damping * gap;
            r = if stall > 20 || damped <= lo || damped >= hi {
                0.5 * (lo + hi)
            } else {
                damped
            };
        }
        any_converged |= converged;

        // polish: rerun at the multiplier matched to the best compression
        // seen, sweeping candidates once more through its neighborhood
        if let Some((_, best_ixt, _, _)) = &cands.best {
            let beta_eff = beta_eff_at(*best_ixt);
            let (_, steps, _) = run_ba_ladder(
                j,
                e0,
                beta_eff,
                &cfg.anneal,
                inner_per_outer,
                cfg.tol_objective,
                &mut cands,
            );
            inner_total += steps;
        }
    }

    let best_ixt = cands.best.as_ref().map(|b| b.1).unwrap_or(0.0);
    let beta_effective = beta_u * f.u_prime(best_ixt).value;
    Ok(result_from_candidates(
        j,
        cands,
        beta_u,
        beta_effective,
        outer_total,
        inner_total,
        any_converged,
    ))
}

/// Independent verification path: projected gradient ascent on encoder
/// logits with central finite-difference gradients of the exact objective.
/// Limited to |X| x |T| <= 64.
pub fn gradient_oracle(
    j: &JointDistribution,
    f: &UFamily,
    beta_u: f64,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    let nt = cfg.nt(j);
    let nx = j.nx();
    let dim = nx * nt;
    if dim > 64 {
        return Err(SolverError::SizeLimit(dim));
    }

    let encoder_of = |logits: &[f64]| -> Encoder {
        let rows: Vec<Vec<f64>> = (0..nx)
            .map(|x| {
                let row = &logits[x * nt..(x + 1) * nt];
                let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                row.iter().map(|&l| (l - m).exp()).collect()
            })
            .collect();
        Encoder::from_rows_unchecked(rows)
    };
    let objective_of = |logits: &[f64]| -> f64 {
        let e = encoder_of(logits);
        match induce(j, &e) {
            Ok(ind) => {
                let o = lagrangian::objective(ind.i_xt_bits, ind.i_ty_bits, f, beta_u);
                if o.value.is_finite() {
                    o.value
                } else {
                    f64::NEG_INFINITY
                }
            }
            Err(_) => f64::NEG_INFINITY,
        }
    };

    let mut cands = CandidateSet::new(f, beta_u);
    seed_candidates(j, nt, &mut cands)?;

    let fd_h = 1e-5;
    let max_iters = 600;
    let mut evals = 0usize;
    let mut any_converged = false;

    for restart in 0..cfg.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed ^ 0x6F72_61_63_6C_65, restart as u64));
        let mut logits: Vec<f64> = match restart {
            0 => (0..dim).map(|i| if i / nt == (i % nt) % nx { 3.0 } else { 0.0 }).collect(),
            1 => vec![0.0; dim],
            _ => (0..dim).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect(),
        };
        let mut obj = objective_of(&logits);
        let mut step = 1.0_f64;
        let mut converged = false;

        for _ in 0..max_iters {
            // central finite differences
            let mut grad = vec![0.0; dim];
            for (i, g) in grad.iter_mut().enumerate() {
                let orig = logits[i];
                logits[i] = orig + fd_h;
                let up = objective_of(&logits);
                logits[i] = orig - fd_h;
                let down = objective_of(&logits);
                logits[i] = orig;
                *g = (up - down) / (2.0 * fd_h);
                evals += 2;
            }
            let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if gnorm < 1e-9 {
                converged = true;
                break;
            }

            // backtracking line search along the gradient
            let mut accepted = false;
            for _ in 0..40 {
                let trial: Vec<f64> = logits
                    .iter()
                    .zip(&grad)
                    .map(|(&l, &g)| l + step * g)
                    .collect();
                let trial_obj = objective_of(&trial);
                evals += 1;
                if trial_obj > obj {
                    logits = trial;
                    obj = trial_obj;
                    step = (step * 1.5).min(1e3);
                    accepted = true;
                    break;
                }
                step *= 0.4;
                if step < 1e-14 {
                    break;
                }
            }
            if !accepted {
                converged = true;
                break;
            }
        }
        any_converged |= converged;

        let e = encoder_of(&logits);
        let ind = induce(j, &e)?;
        cands.consider(&e, &ind);
    }

    let best_ixt = cands.best.as_ref().map(|b| b.1).unwrap_or(0.0);
    let beta_effective = if f.is_identity() {
        beta_u
    } else {
        beta_u * f.u_prime(best_ixt).value
    };
    Ok(result_from_candidates(
        j,
        cands,
        beta_u,
        beta_effective,
        0,
        evals,
        any_converged,
    ))
}

/// Multiplier schedule for [`sweep`].
#[derive(Debug, Clone)]
pub enum SweepBetas {
    Explicit(Vec<f64>),
    /// Log-spaced grid inside the explorable range. Uses the multiplier
    /// range of `curve` when given, the shape-free bound otherwise.
    Auto {
        curve: Option<CurveSpec>,
        points: usize,
    },
}

/// Builds the auto grid of multipliers for a family.
pub fn auto_beta_grid(
    f: &UFamily,
    curve: Option<&CurveSpec>,
    points: usize,
) -> Result<Vec<f64>, SolverError> {
    let range = match curve {
        Some(c) => lagrangian::multiplier_range(f, c)?,
        None => lagrangian::multiplier_range_bound(f, None)?,
    };
    let mut hi = range.hi;
    if !hi.is_finite() {
        // cap where the mapping predicts near-zero compression, 1e3 otherwise
        hi = match curve {
            Some(c) => lagrangian::beta_for_compression(f, c, 0.05).unwrap_or(1e3),
            None => 1e3,
        };
    }
    let lo = if range.lo > 0.0 { range.lo } else { hi * 1e-4 };
    if points <= 1 || hi <= lo {
        return Ok(vec![lo]);
    }
    let ratio = (hi / lo).powf(1.0 / (points - 1) as f64);
    Ok((0..points).map(|k| lo * ratio.powi(k as i32)).collect())
}

/// Solves one instance per multiplier, ascending, each point independently
/// seeded from the master seed so parallel and serial runs agree bit for bit.
/// `IBEX_THREADS` caps the worker count (0 or unset = automatic).
pub fn sweep(
    j: &JointDistribution,
    f: &UFamily,
    betas: &SweepBetas,
    cfg: &SolverConfig,
) -> Result<Vec<SolveResult>, SolverError> {
    let mut grid = match betas {
        SweepBetas::Explicit(b) => b.clone(),
        SweepBetas::Auto { curve, points } => auto_beta_grid(f, curve.as_ref(), *points)?,
    };
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let tasks: Vec<(usize, f64)> = grid.iter().copied().enumerate().collect();
    let solve_one = |&(idx, beta_u): &(usize, f64)| -> Result<SolveResult, SolverError> {
        let cfg_i = SolverConfig {
            seed: derive_seed(cfg.seed, idx as u64),
            ..cfg.clone()
        };
        solve_convex(j, f, beta_u, &cfg_i)
    };

    let threads = std::env::var("IBEX_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    let run = || -> Result<Vec<SolveResult>, SolverError> {
        use rayon::prelude::*;
        tasks.par_iter().map(solve_one).collect()
    };
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(run)
    } else {
        run()
    }
}

/// Aim-mode outcome: a shifted-exponential solve targeted at `r_star`.
#[derive(Debug, Clone)]
pub struct AimResult {
    pub result: SolveResult,
    pub r_star_bits: f64,
    pub deviation_bits: f64,
    /// Set when r_star exceeds H(X), which no encoder can reach.
    pub target_unreachable: bool,
}

/// Targets a compression level r_star through the shifted-exponential
/// family's value convergence.
pub fn aim_compression(
    j: &JointDistribution,
    r_star: f64,
    eta: f64,
    beta_u: f64,
    cfg: &SolverConfig,
) -> Result<AimResult, SolverError> {
    let family = UFamily::shifted_exponential(eta, r_star)?;
    let result = solve_convex(j, &family, beta_u, cfg)?;
    let h_x = entropy(&j.px());
    Ok(AimResult {
        r_star_bits: r_star,
        deviation_bits: (result.i_xt_bits - r_star).abs(),
        target_unreachable: r_star > h_x,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ident4() -> JointDistribution {
        JointDistribution::identity(4)
    }

    #[test]
    fn constant_encoder_is_ba_fixed_point() {
        let j = ident4();
        let e = Encoder::constant(4, 4);
        for beta in [0.0, 0.3, 1.0, 10.0] {
            let out = ba_step(&j, &e, beta).unwrap();
            let ind = induce(&j, &out.encoder).unwrap();
            assert!(ind.i_xt_bits.abs() < 1e-9, "beta = {beta}");
        }
    }

    #[test]
    fn ba_high_beta_collapses() {
        let j = ident4();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut e = init_encoder(&mut rng, 4, 4);
        for _ in 0..500 {
            e = ba_step(&j, &e, 10.0).unwrap().encoder;
        }
        let ind = induce(&j, &e).unwrap();
        assert!(ind.i_xt_bits < 0.05, "i_xt = {}", ind.i_xt_bits);
    }

    #[test]
    fn ba_low_beta_sharpens() {
        let j = ident4();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut e = init_encoder(&mut rng, 4, 4);
        for _ in 0..500 {
            e = ba_step(&j, &e, 0.2).unwrap().encoder;
        }
        let ind = induce(&j, &e).unwrap();
        assert!(ind.i_xt_bits > 1.9, "i_xt = {}", ind.i_xt_bits);
    }

    #[test]
    fn classic_below_one_recovers_full_information() {
        let j = ident4();
        let cfg = SolverConfig::with_seed(1);
        let res = solve_classic(&j, 0.5, &cfg).unwrap();
        assert!((res.i_xt_bits - 2.0).abs() < 0.05, "i_xt = {}", res.i_xt_bits);
        assert!((res.i_ty_bits - 2.0).abs() < 0.05);
    }

    #[test]
    fn classic_above_one_collapses() {
        let j = ident4();
        let cfg = SolverConfig::with_seed(1);
        let res = solve_classic(&j, 1.5, &cfg).unwrap();
        assert!(res.i_xt_bits < 0.05, "i_xt = {}", res.i_xt_bits);
    }

    #[test]
    fn convex_power_targets_unit_compression() {
        // scalar maximization of i - 0.5 i^2 peaks at i = 1
        let j = ident4();
        let f = UFamily::power(1.0).unwrap();
        let cfg = SolverConfig::with_seed(3);
        let res = solve_convex(&j, &f, 0.5, &cfg).unwrap();
        assert!((res.i_xt_bits - 1.0).abs() < 0.1, "i_xt = {}", res.i_xt_bits);
        assert!((res.i_ty_bits - 1.0).abs() < 0.1, "i_ty = {}", res.i_ty_bits);
    }

    #[test]
    fn convex_exponential_closed_form() {
        let j = ident4();
        let f = UFamily::exponential(1.0).unwrap();
        let cfg = SolverConfig::with_seed(3);
        let res = solve_convex(&j, &f, (-1.0_f64).exp(), &cfg).unwrap();
        assert!((res.i_xt_bits - 1.0).abs() < 0.1, "i_xt = {}", res.i_xt_bits);
    }

    #[test]
    fn convex_shifted_exponential_closed_form() {
        let j = ident4();
        let f = UFamily::shifted_exponential(50.0, 1.0).unwrap();
        let cfg = SolverConfig::with_seed(3);
        let res = solve_convex(&j, &f, 1.0, &cfg).unwrap();
        let expected = 1.0 - 50f64.ln() / 50.0;
        assert!(
            (res.i_xt_bits - expected).abs() < 0.05,
            "i_xt = {}, expected {expected}",
            res.i_xt_bits
        );
    }

    #[test]
    fn determinism() {
        let j = ident4();
        let f = UFamily::power(1.0).unwrap();
        let cfg = SolverConfig::with_seed(42);
        let a = solve_convex(&j, &f, 0.5, &cfg).unwrap();
        let b = solve_convex(&j, &f, 0.5, &cfg).unwrap();
        assert_eq!(a.encoder, b.encoder);
        assert_eq!(a.objective, b.objective);
        assert_eq!(a.inner_iterations, b.inner_iterations);
    }

    #[test]
    fn aim_examples() {
        let j = ident4();
        let cfg = SolverConfig::with_seed(5);
        let aim1 = aim_compression(&j, 1.0, 50.0, 1.0, &cfg).unwrap();
        assert!((aim1.result.i_xt_bits - 0.9218).abs() < 0.05);
        let aim4 = aim_compression(&j, 1.0, 50.0, 4.0, &cfg).unwrap();
        assert!((aim4.result.i_xt_bits - 0.8940).abs() < 0.05);
        let aim0 = aim_compression(&j, 0.0, 50.0, 1.0, &cfg).unwrap();
        assert!(aim0.result.i_xt_bits < 0.05);
        assert!(!aim0.target_unreachable);
        let unreachable = aim_compression(&j, 5.0, 50.0, 1.0, &cfg).unwrap();
        assert!(unreachable.target_unreachable);
    }

    #[test]
    fn oracle_matches_classic_on_identity_joint() {
        let j = ident4();
        let cfg = SolverConfig {
            restarts: 5,
            ..SolverConfig::with_seed(9)
        };
        let res = gradient_oracle(&j, &UFamily::Identity, 0.5, &cfg).unwrap();
        assert!((res.i_xt_bits - 2.0).abs() < 0.05, "i_xt = {}", res.i_xt_bits);
        assert!((res.i_ty_bits - 2.0).abs() < 0.05);
    }

    #[test]
    fn oracle_size_limit() {
        let j = JointDistribution::identity(9);
        let cfg = SolverConfig {
            cardinality_t: Some(9),
            ..SolverConfig::with_seed(0)
        };
        assert!(matches!(
            gradient_oracle(&j, &UFamily::Identity, 0.5, &cfg),
            Err(SolverError::SizeLimit(81))
        ));
    }

    #[test]
    fn oracle_far_above_range_collapses() {
        let j = ident4();
        let f = UFamily::power(1.0).unwrap();
        let cfg = SolverConfig {
            restarts: 5,
            ..SolverConfig::with_seed(9)
        };
        let res = gradient_oracle(&j, &f, 50.0, &cfg).unwrap();
        assert!(res.i_xt_bits < 0.05, "i_xt = {}", res.i_xt_bits);
    }

    #[test]
    fn sweep_identity_family_single_level() {
        let j = ident4();
        let betas: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
        let cfg = SolverConfig::with_seed(11);
        let results = sweep(&j, &UFamily::Identity, &SweepBetas::Explicit(betas), &cfg).unwrap();
        for r in &results {
            assert!((r.i_xt_bits - 2.0).abs() < 0.05, "beta = {}", r.beta_u);
            assert!((r.i_ty_bits - 2.0).abs() < 0.05);
        }
    }

    #[test]
    fn solve_result_invariants() {
        let j = ident4();
        let f = UFamily::power(1.0).unwrap();
        let cfg = SolverConfig::with_seed(2);
        let res = solve_convex(&j, &f, 0.5, &cfg).unwrap();
        // DPI
        assert!(res.i_ty_bits <= res.i_xt_bits + 1e-6);
        // objective consistency
        let direct = lagrangian::objective(res.i_xt_bits, res.i_ty_bits, &f, res.beta_u);
        assert!((res.objective - direct.value).abs() < 1e-9);
        // dominance over the trivial encoders
        let const_ind = induce(&j, &Encoder::constant(4, 4)).unwrap();
        let const_obj =
            lagrangian::objective(const_ind.i_xt_bits, const_ind.i_ty_bits, &f, 0.5).value;
        assert!(res.objective >= const_obj - 1e-9);
        let id_ind = induce(&j, &Encoder::identity(4)).unwrap();
        let id_obj = lagrangian::objective(id_ind.i_xt_bits, id_ind.i_ty_bits, &f, 0.5).value;
        assert!(res.objective >= id_obj - 1e-9);
    }
}
