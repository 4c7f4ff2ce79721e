//! Model parameters, the scalar potential governing the large-n limit,
//! and location/classification of its global maximizers.
//!
//! The potential on `[0, 1]` is
//!
//! ```text
//! V(x) = beta1 * x + beta2 * x^p - x ln x - (1 - x) ln(1 - x),
//! ```
//!
//! i.e. the tilted entropy of an edge density `x`. Everything the crate
//! computes — free energy limits, variance scaling, the phase transition
//! curve — is driven by where and how `V` attains its maximum on `(0, 1)`.

use crate::error::{Error, Result};
use crate::fmath::{self, powu};

/// Default absolute accuracy in `x` for maximizer solves.
pub const DEFAULT_X_TOL: f64 = 1e-12;

/// Default tolerance used to decide curve membership and criticality.
pub const DEFAULT_CURVE_TOL: f64 = 1e-10;

/// Search brackets start this far inside `(0, 1)`; the first derivative
/// diverges to +inf at 0 and -inf at 1, so maximizers with moderate
/// parameters lie well inside.
const BRACKET_EPS: f64 = 1e-12;

const MAX_BISECT_ITER: u32 = 200;

/// The parameter triple of the ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    beta1: f64,
    beta2: f64,
    p: u32,
}

impl ModelParams {
    /// Edge parameter `beta1`, star parameter `beta2`, integer star
    /// order `p >= 2`.
    pub fn new(beta1: f64, beta2: f64, p: u32) -> Result<Self> {
        if !beta1.is_finite() || !beta2.is_finite() {
            return Err(Error::InvalidParams("beta1 and beta2 must be finite"));
        }
        if p < 2 {
            return Err(Error::InvalidParams("star order p must be an integer >= 2"));
        }
        Ok(Self { beta1, beta2, p })
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn beta2(&self) -> f64 {
        self.beta2
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// The parameter point at the critical endpoint of the transition
    /// curve for star order `p`.
    pub fn at_critical_point(p: u32) -> Result<Self> {
        let (b1, b2) = critical_point(p)?;
        Self::new(b1, b2, p)
    }
}

/// Critical endpoint `(beta1_c, beta2_c)` of the transition curve:
/// `(ln(p-1) - p/(p-1), p^(p-1)/(p-1)^p)`.
pub fn critical_point(p: u32) -> Result<(f64, f64)> {
    if p < 2 {
        return Err(Error::InvalidParams("star order p must be an integer >= 2"));
    }
    let pf = p as f64;
    let pm1 = pf - 1.0;
    let beta1_c = fmath::ln(pm1) - pf / pm1;
    let beta2_c = powu(pf, p - 1) / powu(pm1, p);
    Ok((beta1_c, beta2_c))
}

/// The potential `V(x)` with the continuous extension at the endpoints
/// (`x ln x -> 0` as `x -> 0`).
pub fn potential(x: f64, params: &ModelParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            what: "potential requires x in [0, 1]",
            value: x,
        });
    }
    Ok(potential_unchecked(x, params))
}

#[inline]
pub(crate) fn potential_unchecked(x: f64, params: &ModelParams) -> f64 {
    let xlnx = if x == 0.0 { 0.0 } else { x * fmath::ln(x) };
    let ylny = if x == 1.0 {
        0.0
    } else {
        (1.0 - x) * fmath::ln_1p(-x)
    };
    params.beta1 * x + params.beta2 * powu(x, params.p) - xlnx - ylny
}

/// Analytic derivative of the potential of the given order (1 through 6)
/// at an interior point.
///
/// Orders 5 and 6 feed the quartic-regime expansion coefficients; the
/// star term contributes a falling-factorial power and the entropy term a
/// closed-form inverse power at every order.
pub fn potential_deriv(x: f64, params: &ModelParams, order: u32) -> Result<f64> {
    if !(1..=6).contains(&order) {
        return Err(Error::Domain {
            what: "derivative order must be between 1 and 6",
            value: order as f64,
        });
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain {
            what: "potential derivatives require x in (0, 1)",
            value: x,
        });
    }
    Ok(potential_deriv_unchecked(x, params, order))
}

pub(crate) fn potential_deriv_unchecked(x: f64, params: &ModelParams, order: u32) -> f64 {
    let p = params.p;
    let pf = p as f64;
    if order == 1 {
        let logit = fmath::ln(x) - fmath::ln_1p(-x);
        return params.beta1 + pf * params.beta2 * powu(x, p - 1) - logit;
    }
    // Star term: beta2 * p (p-1) ... (p-order+1) * x^(p-order); vanishes
    // for order > p.
    let star = if order <= p {
        let mut ff = 1.0;
        for j in 0..order {
            ff *= pf - j as f64;
        }
        params.beta2 * ff * powu(x, p - order)
    } else {
        0.0
    };
    // Entropy term: (-1)^(order-1) (order-2)! / x^(order-1)
    //               - (order-2)! / (1-x)^(order-1).
    let mut fact = 1.0;
    for j in 2..order {
        fact *= (j - 1) as f64;
    }
    let sign = if order.is_multiple_of(2) { -1.0 } else { 1.0 };
    star + sign * fact / powu(x, order - 1) - fact / powu(1.0 - x, order - 1)
}

/// Where the potential attains its global maximum, and how.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regime {
    /// Unique global maximizer; analytic regime.
    OffCurve { maximizer: f64 },
    /// Two equal-height global maximizers straddling `(p-1)/p`.
    OnCurve { lower: f64, upper: f64 },
    /// Critical endpoint: unique maximizer with vanishing second and
    /// third derivatives.
    Critical { maximizer: f64 },
}

/// Result of a maximizer solve: the regime and the maximal potential
/// value (the limiting free energy density).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseClassification {
    pub regime: Regime,
    pub max_potential: f64,
}

impl PhaseClassification {
    /// All global maximizers, lower first.
    pub fn maximizers(&self) -> (f64, Option<f64>) {
        match self.regime {
            Regime::OffCurve { maximizer } | Regime::Critical { maximizer } => (maximizer, None),
            Regime::OnCurve { lower, upper } => (lower, Some(upper)),
        }
    }

    /// Power of n in the scaling of the second free-energy derivatives:
    /// 0 off the curve, 1 on it, 1/2 at the critical point.
    pub fn scale_exponent(&self) -> f64 {
        match self.regime {
            Regime::OffCurve { .. } => 0.0,
            Regime::OnCurve { .. } => 1.0,
            Regime::Critical { .. } => 0.5,
        }
    }

    pub fn is_on_curve(&self) -> bool {
        matches!(self.regime, Regime::OnCurve { .. })
    }

    pub fn is_critical(&self) -> bool {
        matches!(self.regime, Regime::Critical { .. })
    }
}

/// Local maxima of the potential on `(0, 1)`.
#[derive(Clone, Copy, Debug)]
pub(crate) enum MaximaStructure {
    Single(f64),
    Double { lower: f64, upper: f64 },
}

/// Sign-change bisection. `f(lo)` and `f(hi)` must differ in sign.
pub(crate) fn bisect(
    f: &mut dyn FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    x_tol: f64,
    what: &'static str,
) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if (flo > 0.0) == (fhi > 0.0) {
        return Err(Error::BracketFailure { what, at: lo });
    }
    for _ in 0..MAX_BISECT_ITER {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= x_tol {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence { what })
}

/// Roots of the second derivative, if any.
///
/// `V''(x) = p(p-1) x^(p-2) [beta2 - m(x)]` with
/// `m(x) = 1 / (p(p-1) x^(p-1) (1-x))`, and `m >= p^(p-1)/(p-1)^p` with
/// equality only at `x = (p-1)/p`. For `beta2` above that bound there
/// are exactly two roots straddling `(p-1)/p`.
pub(crate) fn inflection_points(
    params: &ModelParams,
    x_tol: f64,
) -> Result<Option<(f64, f64)>> {
    let p = params.p;
    let pf = p as f64;
    let (_, beta2_c) = critical_point(p)?;
    if params.beta2 <= beta2_c {
        return Ok(None);
    }
    let xc = (pf - 1.0) / pf;
    let beta2 = params.beta2;
    let mut g = |x: f64| beta2 - 1.0 / (pf * (pf - 1.0) * powu(x, p - 1) * (1.0 - x));
    let u1 = bisect(&mut g, BRACKET_EPS, xc, x_tol, "inflection point below (p-1)/p")?;
    let u2 = bisect(
        &mut g,
        xc,
        1.0 - BRACKET_EPS,
        x_tol,
        "inflection point above (p-1)/p",
    )?;
    Ok(Some((u1, u2)))
}

/// Locate every local maximum of the potential.
///
/// With at most two roots of `V''`, `V'` is monotone on each resulting
/// subinterval, so each sign change is bracketed exactly once; no global
/// scan is needed.
pub(crate) fn locate_maxima(params: &ModelParams, x_tol: f64) -> Result<MaximaStructure> {
    let lo = BRACKET_EPS;
    let hi = 1.0 - BRACKET_EPS;
    let mut d1 = |x: f64| potential_deriv_unchecked(x, params, 1);
    let inflections = inflection_points(params, x_tol)?;
    match inflections {
        None => {
            // V' strictly decreasing from +inf to -inf: one root.
            let x = bisect(&mut d1, lo, hi, x_tol, "unique maximizer")?;
            Ok(MaximaStructure::Single(x))
        }
        Some((u1, u2)) => {
            // V' decreases on (0, u1), increases on (u1, u2), decreases
            // on (u2, 1).
            let s1 = potential_deriv_unchecked(u1, params, 1);
            let s2 = potential_deriv_unchecked(u2, params, 1);
            if s1 >= 0.0 {
                let x = bisect(&mut d1, u2, hi, x_tol, "upper maximizer")?;
                Ok(MaximaStructure::Single(x))
            } else if s2 <= 0.0 {
                let x = bisect(&mut d1, lo, u1, x_tol, "lower maximizer")?;
                Ok(MaximaStructure::Single(x))
            } else {
                let lower = bisect(&mut d1, lo, u1, x_tol, "lower maximizer")?;
                let upper = bisect(&mut d1, u2, hi, x_tol, "upper maximizer")?;
                Ok(MaximaStructure::Double { lower, upper })
            }
        }
    }
}

/// Classification with explicit tolerances; `curve_tol` controls both the
/// critical-point proximity test and the equal-height test.
pub fn classify_with(
    params: &ModelParams,
    x_tol: f64,
    curve_tol: f64,
) -> Result<PhaseClassification> {
    if !x_tol.is_finite() || x_tol <= 0.0 {
        return Err(Error::Domain {
            what: "x tolerance must be positive",
            value: x_tol,
        });
    }
    if !curve_tol.is_finite() || curve_tol <= 0.0 {
        return Err(Error::Domain {
            what: "curve tolerance must be positive",
            value: curve_tol,
        });
    }
    let (b1c, b2c) = critical_point(params.p)?;
    let near_critical =
        (params.beta1 - b1c).abs().max((params.beta2 - b2c).abs()) < curve_tol;
    match locate_maxima(params, x_tol)? {
        MaximaStructure::Single(x) => {
            let value = potential_unchecked(x, params);
            let regime = if near_critical {
                Regime::Critical { maximizer: x }
            } else {
                Regime::OffCurve { maximizer: x }
            };
            Ok(PhaseClassification {
                regime,
                max_potential: value,
            })
        }
        MaximaStructure::Double { lower, upper } => {
            let v_lo = potential_unchecked(lower, params);
            let v_hi = potential_unchecked(upper, params);
            let max_potential = v_lo.max(v_hi);
            let regime = if near_critical {
                let maximizer = if v_hi >= v_lo { upper } else { lower };
                Regime::Critical { maximizer }
            } else if (v_hi - v_lo).abs() < curve_tol * v_lo.abs().max(1.0) {
                Regime::OnCurve { lower, upper }
            } else if v_hi > v_lo {
                Regime::OffCurve { maximizer: upper }
            } else {
                Regime::OffCurve { maximizer: lower }
            };
            Ok(PhaseClassification {
                regime,
                max_potential,
            })
        }
    }
}

/// Find all global maximizers of the potential to absolute accuracy
/// `x_tol` and classify the parameter point.
///
/// Two local maxima are reported as [`Regime::OnCurve`] only when their
/// heights agree within the default curve tolerance; otherwise the
/// higher one wins. Proximity to the critical endpoint is decided with
/// the same default; use [`crate::curve::classify_point`] to control it.
pub fn find_maximizers(params: &ModelParams, x_tol: f64) -> Result<PhaseClassification> {
    classify_with(params, x_tol, DEFAULT_CURVE_TOL)
}
