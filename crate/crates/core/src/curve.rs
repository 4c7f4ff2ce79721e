//! Regime classification in the parameter plane and the transition
//! curve: for each `beta1` below the critical value there is a unique
//! `beta2` at which the two local maxima of the potential have equal
//! height. This module solves for that value, evaluates the analytic
//! slope of the curve, and traces it by continuation.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmath::powu;
use crate::model::{
    self, MaximaStructure, ModelParams, PhaseClassification, DEFAULT_X_TOL,
};

/// The curve solver refuses `beta1` closer than this to the critical
/// endpoint: the two maxima merge like a pitchfork there and the
/// equal-height condition loses all conditioning.
pub const NEAR_CRITICAL_CUTOFF: f64 = 1e-4;

/// Default tolerance on the equal-height gap.
pub const DEFAULT_GAP_TOL: f64 = 1e-10;

const MAX_SCAN_DOUBLINGS: u32 = 64;
const MAX_GAP_BISECT_ITER: u32 = 200;

/// Classify a parameter point with an explicit curve tolerance.
///
/// Returns `Critical` when the point is within `curve_tol` of the
/// critical endpoint in the max norm, `OnCurve` when two local maxima
/// exist with heights equal within `curve_tol * max(1, |V|)`, and
/// `OffCurve` with the global maximizer otherwise.
pub fn classify_point(params: &ModelParams, curve_tol: f64) -> Result<PhaseClassification> {
    model::classify_with(params, DEFAULT_X_TOL, curve_tol)
}

/// A solved point of the transition curve.
#[derive(Clone, Copy, Debug)]
pub struct CurvePoint {
    pub beta1: f64,
    /// The curve value `beta2(beta1)`.
    pub beta2: f64,
    pub p: u32,
    /// Low-density maximizer, below `(p-1)/p`.
    pub x_low: f64,
    /// High-density maximizer, above `(p-1)/p`.
    pub x_high: f64,
    /// Analytic slope `d beta2 / d beta1` of the curve at this point.
    pub slope: f64,
    /// Height gap `|V(x_high) - V(x_low)|` at the solution.
    pub residual: f64,
}

enum GapEval {
    /// Only the low-density maximizer exists (or dominates as sole max).
    LowerOnly,
    UpperOnly,
    Two { lower: f64, upper: f64, gap: f64 },
}

fn eval_gap(beta1: f64, beta2: f64, p: u32, x_tol: f64) -> Result<GapEval> {
    let params = ModelParams::new(beta1, beta2, p)?;
    let xc = (p as f64 - 1.0) / p as f64;
    match model::locate_maxima(&params, x_tol)? {
        MaximaStructure::Single(x) => {
            if x > xc {
                Ok(GapEval::UpperOnly)
            } else {
                Ok(GapEval::LowerOnly)
            }
        }
        MaximaStructure::Double { lower, upper } => {
            let gap = model::potential_unchecked(upper, &params)
                - model::potential_unchecked(lower, &params);
            Ok(GapEval::Two { lower, upper, gap })
        }
    }
}

/// Analytic slope of the curve from the two maximizers:
/// `-(x_low - x_high) / (x_low^p - x_high^p)`.
pub fn curve_slope(point: &CurvePoint) -> Result<f64> {
    if (point.x_low - point.x_high).abs() < 1e-8 {
        return Err(Error::Degenerate {
            what: "maximizers are too close; slope formula degenerates near the critical point",
        });
    }
    Ok(-(point.x_low - point.x_high) / (powu(point.x_low, point.p) - powu(point.x_high, point.p)))
}

fn build_point(
    beta1: f64,
    beta2: f64,
    p: u32,
    lower: f64,
    upper: f64,
    gap: f64,
) -> Result<CurvePoint> {
    let mut point = CurvePoint {
        beta1,
        beta2,
        p,
        x_low: lower,
        x_high: upper,
        slope: 0.0,
        residual: gap.abs(),
    };
    point.slope = curve_slope(&point)?;
    Ok(point)
}

fn bisect_gap(beta1: f64, p: u32, tol: f64, mut lo: f64, mut hi: f64) -> Result<CurvePoint> {
    for _ in 0..MAX_GAP_BISECT_ITER {
        let mid = 0.5 * (lo + hi);
        match eval_gap(beta1, mid, p, DEFAULT_X_TOL)? {
            GapEval::Two { lower, upper, gap } => {
                if gap.abs() < tol {
                    return build_point(beta1, mid, p, lower, upper, gap);
                }
                if gap < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            GapEval::LowerOnly => lo = mid,
            GapEval::UpperOnly => hi = mid,
        }
    }
    Err(Error::NoConvergence {
        what: "equal-height bisection for the transition curve",
    })
}

/// Solve for the curve value `beta2 = q(beta1)`.
///
/// The height gap is monotone increasing in `beta2`, so after a
/// geometric scan upward from the critical `beta2` establishes a sign
/// change, plain bisection converges unconditionally.
pub fn solve_curve_point(beta1: f64, p: u32, tol: f64) -> Result<CurvePoint> {
    let (b1c, b2c) = model::critical_point(p)?;
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::Domain {
            what: "gap tolerance must be positive",
            value: tol,
        });
    }
    if !beta1.is_finite() || beta1 >= b1c - NEAR_CRITICAL_CUTOFF {
        return Err(Error::Domain {
            what: "beta1 must lie below the critical value by at least the near-critical cutoff",
            value: beta1,
        });
    }
    let mut lo = b2c;
    let mut span = 0.25 * b2c.abs().max(1.0);
    let mut hi = None;
    for _ in 0..MAX_SCAN_DOUBLINGS {
        let cand = b2c + span;
        match eval_gap(beta1, cand, p, DEFAULT_X_TOL)? {
            GapEval::UpperOnly => {
                hi = Some(cand);
                break;
            }
            GapEval::Two { gap, .. } if gap > 0.0 => {
                hi = Some(cand);
                break;
            }
            _ => {
                lo = cand;
                span *= 2.0;
            }
        }
    }
    let hi = hi.ok_or(Error::BracketFailure {
        what: "no two-maximizer window with positive height gap found",
        at: beta1,
    })?;
    bisect_gap(beta1, p, tol, lo, hi)
}

/// Curve solve with a warm-start bracket centered on a predicted
/// `beta2`; falls back to the full scan when the prediction misses.
fn solve_with_hint(beta1: f64, p: u32, tol: f64, predicted: f64, width: f64) -> Result<CurvePoint> {
    let (_, b2c) = model::critical_point(p)?;
    let lo = (predicted - width).max(b2c);
    let hi = predicted + width;
    let lo_ok = match eval_gap(beta1, lo, p, DEFAULT_X_TOL)? {
        GapEval::LowerOnly => true,
        GapEval::Two { gap, .. } => gap <= 0.0,
        GapEval::UpperOnly => false,
    };
    let hi_ok = match eval_gap(beta1, hi, p, DEFAULT_X_TOL)? {
        GapEval::UpperOnly => true,
        GapEval::Two { gap, .. } => gap > 0.0,
        GapEval::LowerOnly => false,
    };
    if lo_ok && hi_ok {
        bisect_gap(beta1, p, tol, lo, hi)
    } else {
        solve_curve_point(beta1, p, tol)
    }
}

/// Trace the curve from `beta1_start` down to `beta1_end` in steps of
/// `step`, warm-starting each solve from the previous solution shifted
/// along the tangent. Output is ordered by decreasing `beta1`.
pub fn trace_curve(p: u32, beta1_start: f64, beta1_end: f64, step: f64) -> Result<Vec<CurvePoint>> {
    trace_curve_with_tol(p, beta1_start, beta1_end, step, DEFAULT_GAP_TOL)
}

/// [`trace_curve`] with an explicit equal-height tolerance.
pub fn trace_curve_with_tol(
    p: u32,
    beta1_start: f64,
    beta1_end: f64,
    step: f64,
    tol: f64,
) -> Result<Vec<CurvePoint>> {
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::Domain {
            what: "trace step must be positive",
            value: step,
        });
    }
    if !beta1_end.is_finite() || beta1_end >= beta1_start {
        return Err(Error::Domain {
            what: "trace requires beta1_end < beta1_start",
            value: beta1_end,
        });
    }
    let mut points: Vec<CurvePoint> = Vec::new();
    let mut k = 0u64;
    loop {
        let beta1 = beta1_start - k as f64 * step;
        if beta1 < beta1_end - 1e-9 * beta1_end.abs().max(1.0) {
            break;
        }
        let point = match points.last() {
            None => solve_curve_point(beta1, p, tol)?,
            Some(prev) => {
                let predicted = prev.beta2 - prev.slope * step;
                let width = (0.5 * step * prev.slope.abs()).max(1e-6);
                solve_with_hint(beta1, p, tol, predicted, width)?
            }
        };
        points.push(point);
        k += 1;
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Regime;

    #[test]
    fn classify_examples() {
        let off = classify_point(&ModelParams::new(0.0, 0.0, 2).unwrap(), 1e-10).unwrap();
        assert!(matches!(off.regime, Regime::OffCurve { .. }));
        let on = classify_point(&ModelParams::new(-2.5, 2.5, 2).unwrap(), 1e-10).unwrap();
        assert!(matches!(on.regime, Regime::OnCurve { .. }));
        let crit = classify_point(&ModelParams::new(-2.0, 2.0, 2).unwrap(), 1e-10).unwrap();
        assert!(matches!(crit.regime, Regime::Critical { .. }));
    }

    #[test]
    fn p2_curve_is_antidiagonal() {
        // The p = 2 symmetry pins the curve to beta2 = -beta1.
        for &b1 in &[-2.5f64, -3.0, -4.0] {
            let point = solve_curve_point(b1, 2, 1e-10).unwrap();
            assert!(
                (point.beta2 + b1).abs() < 1e-8,
                "beta1={b1}: beta2={}",
                point.beta2
            );
            assert!((point.slope + 1.0).abs() < 1e-8);
            assert!((point.x_low + point.x_high - 1.0).abs() < 1e-9);
            assert!(point.residual < 1e-10);
        }
    }

    #[test]
    fn p3_point_and_slope_window() {
        let point = solve_curve_point(-1.2, 3, 1e-10).unwrap();
        assert!(point.residual < 1e-10);
        assert!(point.beta2 > 9.0 / 8.0);
        assert!(
            point.slope > -1.0 && point.slope < -0.75,
            "slope = {}",
            point.slope
        );
        assert!(point.x_low < 2.0 / 3.0 && point.x_high > 2.0 / 3.0);
    }

    #[test]
    fn first_order_conditions_at_solution() {
        for &(b1, p) in &[(-2.5f64, 2u32), (-1.2, 3), (-2.0, 4)] {
            let point = solve_curve_point(b1, p, 1e-10).unwrap();
            assert!(point.slope < 0.0, "the curve is strictly decreasing");
            let (_, b2c) = model::critical_point(p).unwrap();
            assert!(point.beta2 > b2c);
            let params = ModelParams::new(point.beta1, point.beta2, p).unwrap();
            let g_lo = model::potential_deriv(point.x_low, &params, 1).unwrap();
            let g_hi = model::potential_deriv(point.x_high, &params, 1).unwrap();
            assert!(g_lo.abs() < 1e-9, "V'(x_low) = {g_lo}");
            assert!(g_hi.abs() < 1e-9, "V'(x_high) = {g_hi}");
            let equal_height = model::potential(point.x_low, &params).unwrap()
                - model::potential(point.x_high, &params).unwrap();
            assert!(equal_height.abs() < 1e-9);
        }
    }

    #[test]
    fn slope_degenerates_when_maximizers_merge() {
        let point = CurvePoint {
            beta1: -2.0001,
            beta2: 2.0001,
            p: 2,
            x_low: 0.5 - 4e-9,
            x_high: 0.5 + 4e-9,
            slope: 0.0,
            residual: 0.0,
        };
        assert!(matches!(
            curve_slope(&point),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn refuses_beta1_at_or_above_critical() {
        assert!(solve_curve_point(-2.0, 2, 1e-10).is_err());
        assert!(solve_curve_point(-1.0, 2, 1e-10).is_err());
        assert!(solve_curve_point(-2.0 - 0.5e-4, 2, 1e-10).is_err());
    }

    /// Nudging beta2 off a solved point flips the classification to a
    /// single phase, with the surviving maximizer on the side the nudge
    /// favors.
    #[test]
    fn perturbation_flips_classification() {
        let tol = 1e-10;
        for &(b1, p) in &[(-2.5f64, 2u32), (-1.5, 3)] {
            let point = solve_curve_point(b1, p, tol).unwrap();
            let xc = (p as f64 - 1.0) / p as f64;
            let up = ModelParams::new(b1, point.beta2 + 10.0 * tol, p).unwrap();
            match classify_point(&up, tol).unwrap().regime {
                Regime::OffCurve { maximizer } => {
                    assert!(maximizer > xc, "upward nudge should favor the dense phase")
                }
                other => panic!("expected OffCurve, got {other:?}"),
            }
            let down = ModelParams::new(b1, point.beta2 - 10.0 * tol, p).unwrap();
            match classify_point(&down, tol).unwrap().regime {
                Regime::OffCurve { maximizer } => assert!(maximizer < xc),
                other => panic!("expected OffCurve, got {other:?}"),
            }
        }
    }

    #[test]
    fn trace_p2_line() {
        let points = trace_curve(2, -2.2, -5.0, 0.1).unwrap();
        assert_eq!(points.len(), 29);
        let worst = points
            .iter()
            .map(|pt| (pt.beta2 + pt.beta1).abs())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-8, "max |beta2 + beta1| = {worst}");
    }

    #[test]
    fn trace_p3_convexity_and_derivative_consistency() {
        let points = trace_curve(3, -1.0, -3.0, 0.05).unwrap();
        assert!(points.len() > 30);
        for w in points.windows(2) {
            // beta1 decreases along the trace; convexity means the slope
            // decreases with it (allowing solver noise).
            assert!(w[1].slope <= w[0].slope + 1e-7);
            assert!(w[1].beta2 > w[0].beta2);
            // Maximizer drift: the low branch moves down, the high
            // branch up, as beta1 decreases.
            assert!(w[1].x_low < w[0].x_low);
            assert!(w[1].x_high > w[0].x_high);
        }
        for i in 1..points.len() - 1 {
            let fd = (points[i - 1].beta2 - points[i + 1].beta2)
                / (points[i - 1].beta1 - points[i + 1].beta1);
            assert!(
                (fd - points[i].slope).abs() < 1e-4,
                "i={i}: fd={fd} analytic={}",
                points[i].slope
            );
            assert!(points[i].slope > -1.0 && points[i].slope < -0.75);
        }
    }

    #[test]
    fn slope_limit_toward_critical_point() {
        // The slope tends to -p^(p-2)/(p-1)^(p-1) at the critical
        // endpoint: -3/4 for p = 3.
        let limit = -3.0f64 / 4.0;
        // -0.8069 is within the near-critical cutoff of beta1_c: refused.
        assert!(solve_curve_point(-0.8069, 3, 1e-10).is_err());
        let close = solve_curve_point(-0.82, 3, 1e-10).unwrap();
        assert!((close.slope - limit).abs() < 0.02, "slope={}", close.slope);
    }
}
