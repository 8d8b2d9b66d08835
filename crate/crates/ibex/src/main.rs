//! `ibex`: command-line surface over the discrete IB toolkit.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 a required solve
//! failed to converge.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use ibex::curve::{deterministic_curve, explorability_report, pareto_filter, CurvePoint};
use ibex::estimators::{dbscan_clusters, kde_mi_upper, plateau_cluster_report, SampleSet, DEFAULT_SIGMA2};
use ibex::io::{self, RunManifest, SweepRow};
use ibex::lagrangian::{self, CurveSpec, UFamily};
use ibex::prob::{entropy, mutual_information, ValidatedJoint};
use ibex::solver::{self, SolveResult, SolverConfig, SweepBetas};
use ibex::dataset;

#[derive(Parser)]
#[command(name = "ibex", version, about = "discrete information-bottleneck solver and curve explorer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SolverFlags {
    /// Bottleneck cardinality |T| (default |X|)
    #[arg(long = "t-card")]
    t_card: Option<usize>,
    /// Master RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Solver restarts per multiplier
    #[arg(long)]
    restarts: Option<usize>,
}

impl SolverFlags {
    fn config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::with_seed(self.seed);
        cfg.cardinality_t = self.t_card;
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        cfg
    }
}

#[derive(Args, Clone)]
struct CurveFlags {
    /// Deterministic curve with the given I(X;Y) in bits
    #[arg(long)]
    deterministic: Option<f64>,
    /// Assumed constant curve slope in (0, 1]
    #[arg(long)]
    slope: Option<f64>,
}

impl CurveFlags {
    fn curve(&self) -> Option<CurveSpec> {
        match (self.deterministic, self.slope) {
            (Some(i_xy), _) => Some(CurveSpec::deterministic(i_xy)),
            (None, Some(s)) => Some(CurveSpec::assumed_slope(s)),
            (None, None) => None,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a joint distribution instance
    Gen {
        /// deterministic-identity | deterministic-map | stochastic
        kind: String,
        /// n [m] [noise]
        args: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Entropies and mutual information of a joint
    Info {
        #[arg(long)]
        joint: PathBuf,
    },
    /// Maximize the (convex) IB Lagrangian at one multiplier
    Solve {
        #[arg(long)]
        joint: PathBuf,
        #[arg(long)]
        family: String,
        #[arg(long)]
        beta: f64,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Solve across a multiplier grid
    Sweep {
        #[arg(long)]
        joint: PathBuf,
        #[arg(long)]
        family: String,
        /// Explicit comma-separated multipliers
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<f64>>,
        /// Derive the grid from the multiplier range
        #[arg(long)]
        auto: bool,
        /// Grid size in auto mode
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[command(flatten)]
        curve: CurveFlags,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long)]
        out: PathBuf,
    },
    /// Target a compression level via the shifted-exponential family
    Aim {
        #[arg(long)]
        joint: PathBuf,
        #[arg(long = "r-star")]
        r_star: f64,
        #[arg(long, default_value_t = 50.0)]
        eta: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Multiplier range for a family (bound if no curve is given)
    Range {
        #[arg(long)]
        family: String,
        #[command(flatten)]
        curve: CurveFlags,
        /// Known infimum of beta_0 for the range bound
        #[arg(long = "inf-beta0")]
        inf_beta0: Option<f64>,
    },
    /// Map between multiplier and compression on a known curve
    Map {
        #[arg(long)]
        family: String,
        #[command(flatten)]
        curve: CurveFlags,
        /// Multiplier -> compression
        #[arg(long)]
        beta: Option<f64>,
        /// Compression (bits) -> multiplier
        #[arg(long)]
        compression: Option<f64>,
    },
    /// Tabulate the theoretical deterministic curve
    Curve {
        #[arg(long = "i-xy")]
        i_xy: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Kernel upper bound on I(X;T) from a sample CSV
    Estimate {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        sigma2: Option<f64>,
    },
    /// DBSCAN cluster count of a sample CSV
    Cluster {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, default_value_t = 0.3)]
        eps: f64,
        #[arg(long = "min-pts", default_value_t = 50)]
        min_pts: usize,
        /// Write per-sample labels here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Explorability and plateau/cluster tables for a sweep
    Report {
        #[arg(long)]
        joint: PathBuf,
        #[arg(long)]
        family: String,
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<f64>>,
        #[arg(long)]
        auto: bool,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 0.1)]
        resolution: f64,
        #[arg(long = "n-samples", default_value_t = 8000)]
        n_samples: usize,
        #[arg(long, default_value_t = 0.3)]
        eps: f64,
        #[arg(long = "min-pts", default_value_t = 50)]
        min_pts: usize,
        #[command(flatten)]
        curve: CurveFlags,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Data-level failure: file, format or instance problems. Exit code 2.
struct DataError(String);

impl<E: std::fmt::Display> From<E> for DataError {
    fn from(e: E) -> Self {
        DataError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are success, not usage errors
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(DataError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &PathBuf) -> Result<ValidatedJoint, DataError> {
    let v = io::load_joint(path)?;
    for x in &v.pruned_x {
        eprintln!("note: x={x} pruned (zero mass)");
    }
    Ok(v)
}

fn parse_family(spec: &str) -> Result<UFamily, DataError> {
    Ok(spec.parse::<UFamily>()?)
}

fn manifest(command: &str, params: &[(&str, String)], seed: u64, started: Instant) -> RunManifest {
    let map: BTreeMap<String, String> = params
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect();
    let mut m = RunManifest::new(command, map, seed);
    m.wall_time_ms = started.elapsed().as_millis() as u64;
    m
}

fn result_json(family: &UFamily, r: &SolveResult) -> serde_json::Value {
    serde_json::json!({
        "family": family.to_string(),
        "beta_u": r.beta_u,
        "beta_effective": r.beta_effective,
        "i_xt_bits": r.i_xt_bits,
        "i_ty_bits": r.i_ty_bits,
        "objective": r.objective,
        "outer_iterations": r.outer_iterations,
        "inner_iterations": r.inner_iterations,
        "converged": r.converged,
        "support_t": r.support_t,
        "encoder": r.encoder.matrix(),
    })
}

fn run(cli: Cli) -> Result<ExitCode, DataError> {
    let started = Instant::now();
    match cli.command {
        Command::Gen { kind, args, seed, out } => {
            let n = *args.first().ok_or("gen: missing n")? as usize;
            let j = match kind.as_str() {
                "deterministic-identity" => dataset::identity_joint(n)?,
                "deterministic-map" => {
                    let m = *args.get(1).ok_or("gen: missing m")? as usize;
                    dataset::map_joint(n, m, seed)?
                }
                "stochastic" => {
                    let m = *args.get(1).ok_or("gen: missing m")? as usize;
                    let noise = *args.get(2).ok_or("gen: missing noise")?;
                    dataset::stochastic_joint(n, m, noise, seed)?
                }
                other => return Err(format!("unknown dataset kind `{other}`").into()),
            };
            io::save_joint_csv(&out, &j)?;
            let params = [
                ("kind", kind.clone()),
                ("args", format!("{args:?}")),
                ("out", out.display().to_string()),
            ];
            manifest("gen", &params, seed, started).write_sidecar(&out)?;
            println!("wrote {} ({}x{})", out.display(), j.nx(), j.ny());
            Ok(ExitCode::SUCCESS)
        }

        Command::Info { joint } => {
            let j = load(&joint)?.joint;
            println!("|X| = {}", j.nx());
            println!("|Y| = {}", j.ny());
            println!("H(X) = {}", entropy(&j.px()));
            println!("H(Y) = {}", entropy(&j.py()));
            println!("I(X;Y) = {}", mutual_information(&j));
            Ok(ExitCode::SUCCESS)
        }

        Command::Solve {
            joint,
            family,
            beta,
            solver: sf,
            out,
            format,
        } => {
            let j = load(&joint)?.joint;
            let fam = parse_family(&family)?;
            let cfg = sf.config();
            let res = solver::solve_convex(&j, &fam, beta, &cfg)?;
            println!(
                "beta_u={} i_xt={} i_ty={} objective={} converged={}",
                res.beta_u, res.i_xt_bits, res.i_ty_bits, res.objective, res.converged
            );
            if let Some(out) = out {
                match format.as_str() {
                    "json" => std::fs::write(&out, serde_json::to_string_pretty(&result_json(&fam, &res))?)
                        .map_err(DataError::from)?,
                    "csv" => io::write_sweep_csv(&out, &[SweepRow::from_result(&fam, &res)])?,
                    other => return Err(format!("unknown format `{other}`").into()),
                }
                let params = [
                    ("joint", joint.display().to_string()),
                    ("family", family.clone()),
                    ("beta", beta.to_string()),
                ];
                manifest("solve", &params, cfg.seed, started).write_sidecar(&out)?;
            }
            if res.converged {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(3))
            }
        }

        Command::Sweep {
            joint,
            family,
            betas,
            auto,
            points,
            curve,
            solver: sf,
            out,
        } => {
            let j = load(&joint)?.joint;
            let fam = parse_family(&family)?;
            let cfg = sf.config();
            let schedule = match (betas, auto) {
                (Some(b), _) => SweepBetas::Explicit(b),
                (None, true) => SweepBetas::Auto {
                    curve: curve.curve(),
                    points,
                },
                (None, false) => return Err("sweep: need --betas or --auto".into()),
            };
            let results = solver::sweep(&j, &fam, &schedule, &cfg)?;
            let rows: Vec<SweepRow> = results
                .iter()
                .map(|r| SweepRow::from_result(&fam, r))
                .collect();
            io::write_sweep_csv(&out, &rows)?;
            let params = [
                ("joint", joint.display().to_string()),
                ("family", family.clone()),
                ("points", rows.len().to_string()),
            ];
            manifest("sweep", &params, cfg.seed, started).write_sidecar(&out)?;
            println!("wrote {} ({} rows)", out.display(), rows.len());
            if results.iter().all(|r| r.converged) {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(3))
            }
        }

        Command::Aim {
            joint,
            r_star,
            eta,
            beta,
            solver: sf,
        } => {
            let j = load(&joint)?.joint;
            let cfg = sf.config();
            let aim = solver::aim_compression(&j, r_star, eta, beta, &cfg)?;
            println!(
                "r_star={} i_xt={} i_ty={} deviation={} unreachable={}",
                aim.r_star_bits,
                aim.result.i_xt_bits,
                aim.result.i_ty_bits,
                aim.deviation_bits,
                aim.target_unreachable
            );
            if aim.result.converged {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(3))
            }
        }

        Command::Range {
            family,
            curve,
            inf_beta0,
        } => {
            let fam = parse_family(&family)?;
            let range = match curve.curve() {
                Some(c) => lagrangian::multiplier_range(&fam, &c)?,
                None => lagrangian::multiplier_range_bound(&fam, inf_beta0)?,
            };
            println!("[{}, {}]", range.lo, range.hi);
            Ok(ExitCode::SUCCESS)
        }

        Command::Map {
            family,
            curve,
            beta,
            compression,
        } => {
            let fam = parse_family(&family)?;
            let c = curve.curve().ok_or("map: need --deterministic or --slope")?;
            match (beta, compression) {
                (Some(b), None) => {
                    let r = lagrangian::compression_for_beta(&fam, &c, b)?;
                    if r.clamped {
                        eprintln!("note: beta outside the explorable range, result clamped");
                    }
                    println!("{}", r.r_bits);
                }
                (None, Some(r)) => {
                    let b = lagrangian::beta_for_compression(&fam, &c, r)?;
                    println!("{b}");
                }
                _ => return Err("map: need exactly one of --beta or --compression".into()),
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Curve { i_xy, points, out } => {
            let mut table = String::from("r_bits,i_ty_bits\n");
            for k in 0..=points {
                let r = 1.25 * i_xy * k as f64 / points as f64;
                table.push_str(&format!("{r},{}\n", deterministic_curve(i_xy, r)));
            }
            match out {
                Some(out) => {
                    std::fs::write(&out, table).map_err(DataError::from)?;
                    manifest("curve", &[("i_xy", i_xy.to_string())], 0, started).write_sidecar(&out)?;
                    println!("wrote {}", out.display());
                }
                None => print!("{table}"),
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Estimate { samples, sigma2 } => {
            let means = io::load_samples(&samples)?;
            let set = SampleSet::new(means, sigma2.unwrap_or(DEFAULT_SIGMA2))?;
            println!("{}", kde_mi_upper(&set));
            Ok(ExitCode::SUCCESS)
        }

        Command::Cluster {
            samples,
            eps,
            min_pts,
            out,
        } => {
            let means = io::load_samples(&samples)?;
            let set = SampleSet::new(means, 1.0)?;
            let res = dbscan_clusters(&set, eps, min_pts);
            println!("{}", res.n_clusters);
            if let Some(out) = out {
                let body: String = res.labels.iter().map(|l| format!("{l}\n")).collect();
                std::fs::write(&out, body).map_err(DataError::from)?;
                let params = [("eps", eps.to_string()), ("min_pts", min_pts.to_string())];
                manifest("cluster", &params, 0, started).write_sidecar(&out)?;
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Report {
            joint,
            family,
            betas,
            auto,
            points,
            resolution,
            n_samples,
            eps,
            min_pts,
            curve,
            solver: sf,
            out,
        } => {
            let j = load(&joint)?.joint;
            let fam = parse_family(&family)?;
            let cfg = sf.config();
            let schedule = match (betas, auto) {
                (Some(b), _) => SweepBetas::Explicit(b),
                (None, true) => SweepBetas::Auto {
                    curve: curve.curve(),
                    points,
                },
                (None, false) => return Err("report: need --betas or --auto".into()),
            };
            let results = solver::sweep(&j, &fam, &schedule, &cfg)?;
            let cps: Vec<CurvePoint> = results.iter().map(CurvePoint::from).collect();
            let est = pareto_filter(&cps, mutual_information(&j));
            let rep = explorability_report(&est, &family, resolution);
            println!("family: {}", rep.family);
            println!("distinct performance levels @ {} bits: {}", rep.resolution_bits, rep.distinct_levels);
            println!("max compression gap: {} bits", rep.max_gap_bits);
            println!("coverage of [0, I(X;Y)]: {:.1}%", 100.0 * rep.coverage_fraction);

            let plateau = plateau_cluster_report(&results, &j, n_samples, eps, min_pts, cfg.seed)?;
            println!("# {}", plateau.header);
            println!("beta_u,i_xt_bits,i_ty_bits,support_t,n_clusters");
            for row in &plateau.rows {
                println!(
                    "{},{},{},{},{}",
                    row.beta_u, row.i_xt_bits, row.i_ty_bits, row.support_t, row.n_clusters
                );
            }
            if let Some(out) = out {
                let doc = serde_json::json!({
                    "family": rep.family,
                    "resolution_bits": rep.resolution_bits,
                    "distinct_levels": rep.distinct_levels,
                    "max_gap_bits": rep.max_gap_bits,
                    "coverage_fraction": rep.coverage_fraction,
                    "deterministic_deviation_bits": rep.deterministic_deviation_bits,
                    "plateau_note": plateau.header,
                    "plateau_rows": plateau.rows.iter().map(|r| serde_json::json!({
                        "beta_u": r.beta_u,
                        "i_xt_bits": r.i_xt_bits,
                        "i_ty_bits": r.i_ty_bits,
                        "support_t": r.support_t,
                        "n_clusters": r.n_clusters,
                    })).collect::<Vec<_>>(),
                });
                std::fs::write(&out, serde_json::to_string_pretty(&doc)?).map_err(DataError::from)?;
                let params = [
                    ("joint", joint.display().to_string()),
                    ("family", family.clone()),
                ];
                manifest("report", &params, cfg.seed, started).write_sidecar(&out)?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
