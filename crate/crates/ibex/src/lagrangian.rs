//! The convex IB Lagrangian family `L(T; beta_u) = I(T;Y) - beta_u u(I(X;T))`.
//!
//! `u` is a monotonically increasing, strictly convex function of the
//! compression level (in bits). This module carries the supported `u`
//! families with their derivatives and inverses, the bijective mappings
//! between multipliers and compression levels on a known curve, the
//! multiplier ranges that trace the curve, the effective-multiplier relation
//! to the classic Lagrangian, and the convex <-> concave multiplier relation.
//!
//! Compression arguments are bit-valued; exponentials and logarithms inside
//! the families use the natural base.

use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// Natural-log argument beyond which exp overflows double precision.
pub const EXP_OVERFLOW_ARG: f64 = 700.0;

#[derive(Debug, Clone, Error)]
pub enum LagrangianError {
    #[error("exponential overflow: exp argument {arg} exceeds {EXP_OVERFLOW_ARG}")]
    Overflow { arg: f64 },
    #[error("value {value} outside the range of u'")]
    OutOfRange { value: f64 },
    #[error("curve slope is zero at r = {r}: no bijection on the flat region")]
    FlatRegion { r: f64 },
    #[error("the identity family is not strictly convex; mapping operations require a non-identity u")]
    IdentityFamily,
    #[error("operation requires a curve with known shape (deterministic or known slope with r_max)")]
    UnknownCurveShape,
    #[error("invalid family spec `{0}`: expected identity | pow:ALPHA | exp:ETA | shexp:ETA:RSTAR")]
    ParseError(String),
    #[error("invalid family parameter: {0}")]
    BadParameter(String),
}

/// A value that may have saturated to +inf on exponential overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluated {
    pub value: f64,
    pub overflow: bool,
}

impl Evaluated {
    fn exact(value: f64) -> Self {
        Evaluated {
            value,
            overflow: false,
        }
    }

    fn exp_guarded(arg: f64, scale: f64) -> Self {
        if arg > EXP_OVERFLOW_ARG {
            Evaluated {
                value: f64::INFINITY,
                overflow: true,
            }
        } else {
            Evaluated::exact(scale * arg.exp())
        }
    }
}

/// Convex `u` family applied to the compression level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UFamily {
    /// u(r) = r; the classic IB Lagrangian. Admitted only as a baseline,
    /// rejected by the mapping operations.
    Identity,
    /// u(r) = r^(1+alpha), alpha > 0. alpha = 1 is the squared Lagrangian.
    Power { alpha: f64 },
    /// u(r) = exp(eta r), eta > 0.
    Exponential { eta: f64 },
    /// u(r) = exp(eta (r - r_star)); targets the compression level r_star.
    ShiftedExponential { eta: f64, r_star: f64 },
}

impl UFamily {
    pub fn power(alpha: f64) -> Result<Self, LagrangianError> {
        if alpha > 0.0 {
            Ok(UFamily::Power { alpha })
        } else {
            Err(LagrangianError::BadParameter(format!("alpha = {alpha}, need alpha > 0")))
        }
    }

    pub fn exponential(eta: f64) -> Result<Self, LagrangianError> {
        if eta > 0.0 {
            Ok(UFamily::Exponential { eta })
        } else {
            Err(LagrangianError::BadParameter(format!("eta = {eta}, need eta > 0")))
        }
    }

    pub fn shifted_exponential(eta: f64, r_star: f64) -> Result<Self, LagrangianError> {
        if eta <= 0.0 {
            return Err(LagrangianError::BadParameter(format!("eta = {eta}, need eta > 0")));
        }
        if r_star < 0.0 {
            return Err(LagrangianError::BadParameter(format!(
                "r_star = {r_star}, need r_star >= 0"
            )));
        }
        Ok(UFamily::ShiftedExponential { eta, r_star })
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, UFamily::Identity)
    }

    /// u(r), saturating to +inf on exponential overflow.
    pub fn u_value(&self, r: f64) -> Evaluated {
        match *self {
            UFamily::Identity => Evaluated::exact(r),
            UFamily::Power { alpha } => Evaluated::exact(r.powf(1.0 + alpha)),
            UFamily::Exponential { eta } => Evaluated::exp_guarded(eta * r, 1.0),
            UFamily::ShiftedExponential { eta, r_star } => {
                Evaluated::exp_guarded(eta * (r - r_star), 1.0)
            }
        }
    }

    /// u'(r), saturating to +inf on exponential overflow.
    pub fn u_prime(&self, r: f64) -> Evaluated {
        match *self {
            UFamily::Identity => Evaluated::exact(1.0),
            UFamily::Power { alpha } => Evaluated::exact((1.0 + alpha) * r.powf(alpha)),
            UFamily::Exponential { eta } => Evaluated::exp_guarded(eta * r, eta),
            UFamily::ShiftedExponential { eta, r_star } => {
                Evaluated::exp_guarded(eta * (r - r_star), eta)
            }
        }
    }

    /// ln u'(r); finite for every r >= 0 on the exponential families, used to
    /// keep multiplier arithmetic out of the overflow regime.
    pub(crate) fn u_prime_ln(&self, r: f64) -> f64 {
        match *self {
            UFamily::Identity => 0.0,
            UFamily::Power { alpha } => (1.0 + alpha).ln() + alpha * r.ln(),
            UFamily::Exponential { eta } => eta.ln() + eta * r,
            UFamily::ShiftedExponential { eta, r_star } => eta.ln() + eta * (r - r_star),
        }
    }

    /// (u')^{-1}(s) for s in the range of u' over r >= 0.
    pub fn u_prime_inverse(&self, s: f64) -> Result<f64, LagrangianError> {
        if !s.is_finite() || s <= 0.0 {
            return Err(LagrangianError::OutOfRange { value: s });
        }
        let r = match *self {
            UFamily::Identity => return Err(LagrangianError::IdentityFamily),
            UFamily::Power { alpha } => (s / (1.0 + alpha)).powf(1.0 / alpha),
            UFamily::Exponential { eta } => (s / eta).ln() / eta,
            UFamily::ShiftedExponential { eta, r_star } => r_star + (s / eta).ln() / eta,
        };
        if r < 0.0 {
            Err(LagrangianError::OutOfRange { value: s })
        } else {
            Ok(r)
        }
    }

    /// lim_{r -> 0+} u'(r).
    pub fn u_prime_at_zero(&self) -> f64 {
        match *self {
            UFamily::Identity => 1.0,
            UFamily::Power { .. } => 0.0,
            UFamily::Exponential { eta } => eta,
            UFamily::ShiftedExponential { eta, r_star } => eta * (-eta * r_star).exp(),
        }
    }
}

impl FromStr for UFamily {
    type Err = LagrangianError;

    /// Grammar: `identity` | `pow:ALPHA` | `exp:ETA` | `shexp:ETA:RSTAR`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || LagrangianError::ParseError(s.to_string());
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
        match parts.as_slice() {
            ["identity"] => Ok(UFamily::Identity),
            ["pow", a] => UFamily::power(num(a)?),
            ["exp", e] => UFamily::exponential(num(e)?),
            ["shexp", e, r] => UFamily::shifted_exponential(num(e)?, num(r)?),
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for UFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            UFamily::Identity => write!(f, "identity"),
            UFamily::Power { alpha } => write!(f, "pow:{alpha}"),
            UFamily::Exponential { eta } => write!(f, "exp:{eta}"),
            UFamily::ShiftedExponential { eta, r_star } => write!(f, "shexp:{eta}:{r_star}"),
        }
    }
}

/// Concave `v` family for the concave counterpart of the Lagrangian relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VFamily {
    /// v(i) = sqrt(i)
    Sqrt,
    /// v(i) = ln(1 + i)
    Log1p,
    /// v(i) = i^gamma, gamma in (0, 1)
    PowerConcave { gamma: f64 },
}

impl VFamily {
    pub fn v_value(&self, i: f64) -> f64 {
        match *self {
            VFamily::Sqrt => i.sqrt(),
            VFamily::Log1p => i.ln_1p(),
            VFamily::PowerConcave { gamma } => i.powf(gamma),
        }
    }

    pub fn v_prime(&self, i: f64) -> f64 {
        match *self {
            VFamily::Sqrt => 0.5 / i.sqrt(),
            VFamily::Log1p => 1.0 / (1.0 + i),
            VFamily::PowerConcave { gamma } => gamma * i.powf(gamma - 1.0),
        }
    }

    pub fn v_prime_inverse(&self, s: f64) -> Result<f64, LagrangianError> {
        if !s.is_finite() || s <= 0.0 {
            return Err(LagrangianError::OutOfRange { value: s });
        }
        let i = match *self {
            VFamily::Sqrt => 0.25 / (s * s),
            VFamily::Log1p => 1.0 / s - 1.0,
            VFamily::PowerConcave { gamma } => (s / gamma).powf(1.0 / (gamma - 1.0)),
        };
        if i < 0.0 {
            Err(LagrangianError::OutOfRange { value: s })
        } else {
            Ok(i)
        }
    }
}

/// Shape knowledge about the IB curve I(T;Y) = f(I(X;T)).
#[derive(Clone)]
pub enum CurveSpec {
    /// Deterministic scenario: f(r) = min(r, i_xy); slope 1 below i_xy, 0 above.
    Deterministic { i_xy: f64 },
    /// Known slope function f'(r) on [0, r_max]; f(0) = 0.
    KnownSlope {
        slope: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        r_max: f64,
    },
    /// Unknown curve; a constant assumed slope in (0, 1] (default 1).
    UnknownBounded { f_prime_assumed: f64 },
}

impl std::fmt::Debug for CurveSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurveSpec::Deterministic { i_xy } => write!(f, "Deterministic {{ i_xy: {i_xy} }}"),
            CurveSpec::KnownSlope { r_max, .. } => write!(f, "KnownSlope {{ r_max: {r_max} }}"),
            CurveSpec::UnknownBounded { f_prime_assumed } => {
                write!(f, "UnknownBounded {{ f_prime_assumed: {f_prime_assumed} }}")
            }
        }
    }
}

impl CurveSpec {
    pub fn deterministic(i_xy: f64) -> Self {
        CurveSpec::Deterministic { i_xy }
    }

    pub fn assumed_slope(f_prime: f64) -> Self {
        CurveSpec::UnknownBounded {
            f_prime_assumed: f_prime,
        }
    }

    /// f'(r).
    pub fn slope(&self, r: f64) -> f64 {
        match self {
            CurveSpec::Deterministic { i_xy } => {
                if r < *i_xy {
                    1.0
                } else {
                    0.0
                }
            }
            CurveSpec::KnownSlope { slope, r_max } => {
                if r < *r_max {
                    slope(r)
                } else {
                    0.0
                }
            }
            CurveSpec::UnknownBounded { f_prime_assumed } => *f_prime_assumed,
        }
    }

    /// r_max: the smallest compression achieving the curve plateau, if known.
    pub fn r_max(&self) -> Option<f64> {
        match self {
            CurveSpec::Deterministic { i_xy } => Some(*i_xy),
            CurveSpec::KnownSlope { r_max, .. } => Some(*r_max),
            CurveSpec::UnknownBounded { .. } => None,
        }
    }

    /// f(r); the known-slope variant integrates its slope (f(0) = 0).
    pub fn value(&self, r: f64) -> f64 {
        match self {
            CurveSpec::Deterministic { i_xy } => r.min(*i_xy),
            CurveSpec::KnownSlope { .. } => {
                // composite trapezoid; slope functions here are smooth
                let n = 2000;
                let h = r / n as f64;
                let mut acc = 0.0;
                for k in 0..n {
                    let a = h * k as f64;
                    let b = a + h;
                    acc += 0.5 * h * (self.slope(a) + self.slope(b));
                }
                acc
            }
            CurveSpec::UnknownBounded { f_prime_assumed } => f_prime_assumed * r,
        }
    }

    /// f^{-1}(i) on the strictly increasing region, by bisection.
    pub fn inverse_value(&self, i: f64) -> Result<f64, LagrangianError> {
        match self {
            CurveSpec::Deterministic { i_xy } => {
                if i < 0.0 || i > *i_xy {
                    Err(LagrangianError::OutOfRange { value: i })
                } else {
                    Ok(i)
                }
            }
            CurveSpec::KnownSlope { r_max, .. } => {
                if i < 0.0 || i > self.value(*r_max) {
                    return Err(LagrangianError::OutOfRange { value: i });
                }
                let (mut lo, mut hi) = (0.0, *r_max);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.value(mid) < i {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-12 {
                        break;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
            CurveSpec::UnknownBounded { f_prime_assumed } => Ok(i / f_prime_assumed),
        }
    }
}

/// Closed interval of usable multipliers; `hi` may be +inf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierRange {
    pub lo: f64,
    pub hi: f64,
}

impl MultiplierRange {
    pub fn contains(&self, beta: f64) -> bool {
        beta >= self.lo && beta <= self.hi
    }
}

/// The convex Lagrangian value I(T;Y) - beta_u u(I(X;T)).
pub fn objective(i_xt: f64, i_ty: f64, f: &UFamily, beta_u: f64) -> Evaluated {
    let u = f.u_value(i_xt);
    Evaluated {
        value: i_ty - beta_u * u.value,
        overflow: u.overflow,
    }
}

/// Multiplier achieving compression r on a known curve: beta_u = f'(r)/u'(r).
pub fn beta_for_compression(
    f: &UFamily,
    c: &CurveSpec,
    r: f64,
) -> Result<f64, LagrangianError> {
    if f.is_identity() {
        return Err(LagrangianError::IdentityFamily);
    }
    let slope = c.slope(r);
    if slope <= 0.0 {
        return Err(LagrangianError::FlatRegion { r });
    }
    // log-space keeps large-eta shifted-exponential sweeps finite
    Ok((slope.ln() - f.u_prime_ln(r)).exp())
}

/// Result of [`compression_for_beta`]; `clamped` marks multipliers outside
/// the explorable range, resolved to the nearest endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Compression {
    pub r_bits: f64,
    pub clamped: bool,
}

/// Compression level achieved by beta_u on a known curve:
/// the fixed point of r = (u')^{-1}(f'(r) / beta_u).
pub fn compression_for_beta(
    f: &UFamily,
    c: &CurveSpec,
    beta_u: f64,
) -> Result<Compression, LagrangianError> {
    if f.is_identity() {
        return Err(LagrangianError::IdentityFamily);
    }
    if !(beta_u > 0.0) {
        return Err(LagrangianError::OutOfRange { value: beta_u });
    }
    if let CurveSpec::UnknownBounded { f_prime_assumed } = c {
        // constant slope: direct inversion, clamped at the origin
        return match f.u_prime_inverse(f_prime_assumed / beta_u) {
            Ok(r) => Ok(Compression {
                r_bits: r,
                clamped: false,
            }),
            Err(LagrangianError::OutOfRange { .. }) => Ok(Compression {
                r_bits: 0.0,
                clamped: true,
            }),
            Err(e) => Err(e),
        };
    }
    let r_hi = c.r_max().ok_or(LagrangianError::UnknownCurveShape)?;
    let range = multiplier_range(f, c)?;
    if beta_u > range.hi {
        return Ok(Compression {
            r_bits: 0.0,
            clamped: true,
        });
    }
    if beta_u < range.lo {
        return Ok(Compression {
            r_bits: r_hi,
            clamped: true,
        });
    }

    // candidate(r): inverse of u' at f'(r)/beta_u, clamped into [0, r_hi]
    let candidate = |r: f64| -> f64 {
        let slope = c.slope(r);
        if slope <= 0.0 {
            return 0.0;
        }
        match f.u_prime_inverse(slope / beta_u) {
            Ok(v) => v.min(r_hi),
            Err(_) => 0.0,
        }
    };

    // g(r) = candidate(r) - r is non-increasing: u' strictly increasing,
    // f' non-increasing. Bisect for its root.
    if candidate(0.0) <= 0.0 {
        return Ok(Compression {
            r_bits: 0.0,
            clamped: false,
        });
    }
    let (mut lo, mut hi) = (0.0_f64, r_hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if candidate(mid) > mid {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    Ok(Compression {
        r_bits: 0.5 * (lo + hi),
        clamped: false,
    })
}

/// Range of multipliers tracing the strictly increasing curve region:
/// lo = lim_{r -> r_max-} f'(r)/u'(r), hi = lim_{r -> 0+} f'(r)/u'(r).
pub fn multiplier_range(f: &UFamily, c: &CurveSpec) -> Result<MultiplierRange, LagrangianError> {
    let r_max = c.r_max().ok_or(LagrangianError::UnknownCurveShape)?;
    let eps = 1e-9 * r_max.max(1.0);
    let slope_top = c.slope(r_max - eps);
    let lo = (slope_top.ln() - f.u_prime_ln(r_max)).exp();
    let u0 = f.u_prime_at_zero();
    let slope0 = c.slope(eps);
    let hi = if u0 == 0.0 {
        f64::INFINITY
    } else {
        slope0 / u0
    };
    Ok(MultiplierRange { lo, hi })
}

/// Curve-shape-free bound on the multiplier range:
/// [0, (inf beta_0)^{-1} / u'(0+)], with numerator 1 when no bound is given.
pub fn multiplier_range_bound(
    f: &UFamily,
    inf_beta0: Option<f64>,
) -> Result<MultiplierRange, LagrangianError> {
    if f.is_identity() {
        return Err(LagrangianError::IdentityFamily);
    }
    let numerator = 1.0 / inf_beta0.unwrap_or(1.0);
    let u0 = f.u_prime_at_zero();
    let hi = if u0 == 0.0 {
        f64::INFINITY
    } else {
        numerator / u0
    };
    Ok(MultiplierRange { lo: 0.0, hi })
}

/// Classic multiplier equivalent to (f, beta_u) at compression r: beta = beta_u u'(r).
pub fn effective_beta(f: &UFamily, beta_u: f64, r: f64) -> Evaluated {
    let up = f.u_prime(r);
    Evaluated {
        value: beta_u * up.value,
        overflow: up.overflow,
    }
}

/// Inverse direction of [`effective_beta`]: beta_u = beta / u'(r).
pub fn beta_u_from_effective(f: &UFamily, beta: f64, r: f64) -> f64 {
    (beta.ln() - f.u_prime_ln(r)).exp()
}

/// Concave multiplier matching (u, beta_u) at curve point r:
/// beta_v^{-1} = f'(r) v'(f((u')^{-1}(f'(r)/beta_u))).
pub fn beta_v_from_beta_u(
    u: &UFamily,
    v: &VFamily,
    c: &CurveSpec,
    r: f64,
    beta_u: f64,
) -> Result<f64, LagrangianError> {
    if u.is_identity() {
        return Err(LagrangianError::IdentityFamily);
    }
    let slope = c.slope(r);
    if slope <= 0.0 {
        return Err(LagrangianError::FlatRegion { r });
    }
    let inner_r = u.u_prime_inverse(slope / beta_u)?;
    let i = c.value(inner_r);
    Ok(1.0 / (slope * v.v_prime(i)))
}

/// Inverse relation: beta_u^{-1} = u'(f^{-1}((v')^{-1}((beta_v f'(r))^{-1}))) / f'(r).
pub fn beta_u_from_beta_v(
    u: &UFamily,
    v: &VFamily,
    c: &CurveSpec,
    r: f64,
    beta_v: f64,
) -> Result<f64, LagrangianError> {
    if u.is_identity() {
        return Err(LagrangianError::IdentityFamily);
    }
    let slope = c.slope(r);
    if slope <= 0.0 {
        return Err(LagrangianError::FlatRegion { r });
    }
    let i = v.v_prime_inverse(1.0 / (beta_v * slope))?;
    let rr = c.inverse_value(i)?;
    Ok(slope / u.u_prime(rr).value)
}
