//! Laplace-type asymptotics for the integrals
//! `I_m(n) = ∫_0^1 x^m (x(1-x))^(-1/2) exp(n V(x)) dx`
//! and the closed-form limiting variances, covariance and edge
//! probability in all three regimes.
//!
//! Off the transition curve the peak of `V` is quadratic and the
//! expansion proceeds in powers of `n^(-1)` under a Gaussian; at the
//! critical point the quadratic and cubic terms vanish and the peak is
//! quartic, switching the ladder to powers of `n^(-1/2)` under
//! `exp(n b4 u^4)`. On the curve two Gaussian peaks of equal height
//! contribute side by side.

use alloc::vec::Vec;

use crate::curve;
use crate::error::{Error, Result};
use crate::fmath::{self, powu};
use crate::model::{self, ModelParams, PhaseClassification, Regime, DEFAULT_CURVE_TOL};
use crate::special::{gamma, CompensatedSum};

/// Coefficients below this magnitude are treated as singular where the
/// regime requires dividing by them.
const SINGULAR_EPS: f64 = 1e-14;

/// Taylor data `(d0, d1, d2)` of the observable
/// `f_m(x) = x^m (x(1-x))^(-1/2)` at an interior center.
///
/// Closed forms from logarithmic differentiation of `f_m`; valid for
/// every non-negative integer `m`.
pub fn observable_taylor(center: f64, m: u32) -> Result<(f64, f64, f64)> {
    if !(center > 0.0 && center < 1.0) {
        return Err(Error::Domain {
            what: "observable Taylor coefficients require a center in (0, 1)",
            value: center,
        });
    }
    let c = center;
    let mf = m as f64;
    let s = c * (1.0 - c);
    let cm = powu(c, m);
    let d0 = cm / fmath::sqrt(s);
    let d1 = ((mf - 0.5) * cm - (mf - 1.0) * cm * c) / fmath::powf(s, 1.5);
    let d2 = ((mf * mf - 2.0 * mf + 0.75) * cm - (2.0 * mf * mf - 5.0 * mf + 2.0) * cm * c
        + (mf * mf - 3.0 * mf + 2.0) * cm * c * c)
        / (2.0 * fmath::powf(s, 2.5));
    Ok((d0, d1, d2))
}

/// Taylor coefficients of one observable.
#[derive(Clone, Copy, Debug)]
pub struct ObservableCoeffs {
    /// Power `m` of the observable `x^m (x(1-x))^(-1/2)`.
    pub power: u32,
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Everything the expansion needs at one center.
#[derive(Clone, Debug)]
pub struct LaplaceCoefficients {
    pub center: f64,
    /// Entry k holds `V^(k)(center) / k!` for k = 0..=6.
    pub potential_coeffs: [f64; 7],
    /// Half-line Gaussian moment factors
    /// `Gamma(k/2) |b2|^(-k/2) / 2` for odd k = 1, 3, 5, 7.
    /// Present only when `b2` is nonzero.
    pub gaussian_factors: Option<[f64; 4]>,
    /// Quartic analogues `Gamma(k/4) |b4|^(-k/4) / 4` for odd
    /// k = 1, 3, 5, 7, 9, 11. Present only when `b4` is nonzero.
    pub quartic_factors: Option<[f64; 6]>,
    /// Observable coefficients for m in {0, 1, 2, p, p+1, 2p}.
    pub observables: Vec<ObservableCoeffs>,
}

impl LaplaceCoefficients {
    /// Coefficients for the observable of the given power, if tabulated.
    pub fn observable(&self, power: u32) -> Option<&ObservableCoeffs> {
        self.observables.iter().find(|o| o.power == power)
    }
}

/// Assemble the expansion coefficients at a maximizer of the potential.
pub fn laplace_coefficients(center: f64, params: &ModelParams) -> Result<LaplaceCoefficients> {
    let mut b = [0.0f64; 7];
    b[0] = model::potential(center, params)?;
    let mut kfact = 1.0;
    for k in 1..=6u32 {
        kfact *= k as f64;
        b[k as usize] = model::potential_deriv(center, params, k)? / kfact;
    }

    let gaussian_factors = if b[2].abs() > SINGULAR_EPS {
        let mut a = [0.0f64; 4];
        for (slot, k) in a.iter_mut().zip([1u32, 3, 5, 7]) {
            *slot = 0.5 * gamma(k as f64 / 2.0) * fmath::powf(b[2].abs(), -(k as f64) / 2.0);
        }
        Some(a)
    } else {
        None
    };
    let quartic_factors = if b[4].abs() > SINGULAR_EPS {
        let mut g = [0.0f64; 6];
        for (slot, k) in g.iter_mut().zip([1u32, 3, 5, 7, 9, 11]) {
            *slot = 0.25 * gamma(k as f64 / 4.0) * fmath::powf(b[4].abs(), -(k as f64) / 4.0);
        }
        Some(g)
    } else {
        None
    };
    if gaussian_factors.is_none() && quartic_factors.is_none() {
        return Err(Error::SingularCoefficient {
            what: "both the quadratic and quartic potential coefficients vanish",
            value: center,
        });
    }

    let p = params.p();
    let mut powers = alloc::vec![0u32, 1, 2, p, p + 1, 2 * p];
    powers.sort_unstable();
    powers.dedup();
    let mut observables = Vec::with_capacity(powers.len());
    for m in powers {
        let (d0, d1, d2) = observable_taylor(center, m)?;
        observables.push(ObservableCoeffs { power: m, d0, d1, d2 });
    }

    Ok(LaplaceCoefficients {
        center,
        potential_coeffs: b,
        gaussian_factors,
        quartic_factors,
        observables,
    })
}

/// A positive quantity stored as `mantissa * exp(log_scale)`.
///
/// `exp(n V(x*))` overflows for n beyond a few hundred, so expansion
/// values keep the exponential factor symbolic; ratios of two values are
/// formed by subtracting `log_value`s.
#[derive(Clone, Copy, Debug)]
pub struct LogValue {
    pub log_scale: f64,
    pub mantissa: f64,
}

impl LogValue {
    pub fn log_value(&self) -> f64 {
        self.log_scale + fmath::ln(self.mantissa)
    }
}

/// Truncated expansion of `I_m(n)`, dispatched on the regime of the
/// parameter point.
///
/// The stored factors are half-line moments, so each full-line bracket
/// carries an overall factor of two.
pub fn laplace_expand(params: &ModelParams, n: u64, m: u32) -> Result<LogValue> {
    if n < 1 {
        return Err(Error::Domain {
            what: "laplace_expand requires n >= 1",
            value: n as f64,
        });
    }
    let nf = n as f64;
    let cls = curve::classify_point(params, DEFAULT_CURVE_TOL)?;
    let singular = |what| Error::SingularCoefficient {
        what,
        value: 0.0,
    };
    let mantissa = match cls.regime {
        Regime::OffCurve { maximizer } => {
            let co = laplace_coefficients(maximizer, params)?;
            let a = co
                .gaussian_factors
                .ok_or_else(|| singular("quadratic coefficient vanishes off the curve"))?;
            let b = co.potential_coeffs;
            let (d0, d1, d2) = observable_taylor(maximizer, m)?;
            let correction =
                d2 * a[1] + d1 * b[3] * a[2] + d0 * b[4] * a[2] + 0.5 * d0 * b[3] * b[3] * a[3];
            2.0 * (d0 * a[0] / fmath::sqrt(nf) + correction * fmath::powf(nf, -1.5))
        }
        Regime::OnCurve { lower, upper } => {
            let mut lead = 0.0;
            for c in [lower, upper] {
                let co = laplace_coefficients(c, params)?;
                let a = co
                    .gaussian_factors
                    .ok_or_else(|| singular("quadratic coefficient vanishes on the curve"))?;
                let (d0, _, _) = observable_taylor(c, m)?;
                lead += d0 * a[0];
            }
            2.0 * lead / fmath::sqrt(nf)
        }
        Regime::Critical { maximizer } => {
            let co = laplace_coefficients(maximizer, params)?;
            let g = co
                .quartic_factors
                .ok_or_else(|| singular("quartic coefficient vanishes at the critical point"))?;
            let b = co.potential_coeffs;
            let (d0, d1, d2) = observable_taylor(maximizer, m)?;
            let correction =
                d2 * g[1] + d1 * b[5] * g[3] + d0 * b[6] * g[3] + 0.5 * d0 * b[5] * b[5] * g[5];
            2.0 * (d0 * g[0] * fmath::powf(nf, -0.25) + correction * fmath::powf(nf, -0.75))
        }
    };
    Ok(LogValue {
        log_scale: nf * cls.max_potential,
        mantissa,
    })
}

// 15-point Gauss-Kronrod pair on [-1, 1] (QUADPACK dqk15). Odd-index
// nodes plus the center form the embedded 7-point Gauss rule.
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for (j, &node) in GK_NODES.iter().enumerate().take(7) {
        let dx = half * node;
        let fsum = f(mid + dx) + f(mid - dx);
        kronrod += GK_WEIGHTS[j] * fsum;
        if j % 2 == 1 {
            gauss += GAUSS_WEIGHTS[j / 2] * fsum;
        }
    }
    (kronrod * half, (kronrod - gauss).abs() * half)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

const QUAD_PANEL_BUDGET: usize = 4000;

/// Globally adaptive Gauss-Kronrod integration with mandatory split
/// points.
fn adaptive_quadrature(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    interior_splits: &[f64],
    abs_tol: f64,
) -> Result<f64> {
    let mut edges = alloc::vec![a];
    for &s in interior_splits {
        if s > a && s < b {
            edges.push(s);
        }
    }
    edges.push(b);
    edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
    edges.dedup();

    let mut panels: Vec<Panel> = Vec::new();
    for w in edges.windows(2) {
        let (value, error) = gk15(f, w[0], w[1]);
        panels.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }

    loop {
        let total_err: f64 = panels.iter().map(|p| p.error).sum();
        let total_abs: f64 = panels.iter().map(|p| p.value.abs()).sum();
        if total_err <= abs_tol.max(50.0 * f64::EPSILON * total_abs) {
            let mut acc = CompensatedSum::new();
            for p in &panels {
                acc.add(p.value);
            }
            return Ok(acc.value());
        }
        if panels.len() >= QUAD_PANEL_BUDGET {
            return Err(Error::NoConvergence {
                what: "adaptive quadrature panel budget exhausted",
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let Panel { a, b, .. } = panels.swap_remove(worst);
        let mid = 0.5 * (a + b);
        for (lo, hi) in [(a, mid), (mid, b)] {
            let (value, error) = gk15(f, lo, hi);
            panels.push(Panel {
                a: lo,
                b: hi,
                value,
                error,
            });
        }
    }
}

/// Log of `I_m(n)` by adaptive quadrature; the numerical oracle for
/// [`laplace_expand`].
///
/// The substitution `x = sin^2(theta)` removes the endpoint
/// singularities exactly: the integrand becomes
/// `2 sin^(2m)(theta) exp(n (V - V*))` on `[0, pi/2]`, which is analytic.
/// Panels are pre-split at every maximizer and at the inflection points
/// of `V`. Returns `n V* + ln(shifted integral)`.
pub fn quadrature_integral(params: &ModelParams, n: u64, m: u32) -> Result<f64> {
    let nf = n as f64;
    let cls = curve::classify_point(params, DEFAULT_CURVE_TOL)?;
    let peak = cls.max_potential;

    let mut splits: Vec<f64> = Vec::new();
    let (x1, x2) = cls.maximizers();
    splits.push(x1);
    if let Some(x) = x2 {
        splits.push(x);
    }
    if let Some((u1, u2)) = model::inflection_points(params, 1e-12)? {
        splits.push(u1);
        splits.push(u2);
    }
    let theta_splits: Vec<f64> = splits
        .iter()
        .map(|&x| fmath::asin(fmath::sqrt(x)))
        .collect();

    let integrand = move |theta: f64| {
        let s = fmath::sin(theta);
        let x = s * s;
        2.0 * powu(x, m) * fmath::exp(nf * (model::potential_unchecked(x, params) - peak))
    };
    let value = adaptive_quadrature(
        &integrand,
        0.0,
        core::f64::consts::FRAC_PI_2,
        &theta_splits,
        1e-12,
    )?;
    Ok(nf * peak + fmath::ln(value))
}

/// Closed-form limiting quantities for one parameter point.
#[derive(Clone, Debug)]
pub struct RegimeLimits {
    pub classification: PhaseClassification,
    /// Limit of `psi_n`: the maximal potential value.
    pub free_energy_limit: f64,
    /// Limit constant of `n^(-exponent) * d^2 psi_n / d beta1^2`.
    pub var_edge: f64,
    /// Same for the star statistic.
    pub var_star: f64,
    /// Same for the mixed derivative.
    pub cov_edge_star: f64,
    /// 0 off the curve, 1 on it, 1/2 at the critical point.
    pub scale_exponent: f64,
    /// Limiting probability that a fixed edge is present.
    pub edge_prob: f64,
    /// Convex-combination weight of the lower maximizer in the on-curve
    /// edge probability; absent in the other regimes.
    pub mixture_weight: Option<f64>,
}

/// Peak weight `w(x) = sqrt(x (1-x) |V''(x)|)` entering every on-curve
/// limit formula.
fn peak_weight(x: f64, params: &ModelParams) -> f64 {
    let h = model::potential_deriv_unchecked(x, params, 2).abs();
    fmath::sqrt(x * (1.0 - x) * h)
}

/// Evaluate the limiting variances, covariance, scale exponent and edge
/// probability for the regime of the given parameters, classifying with
/// the default curve tolerance.
pub fn limiting_values(params: &ModelParams) -> Result<RegimeLimits> {
    let cls = curve::classify_point(params, DEFAULT_CURVE_TOL)?;
    Ok(limiting_values_for(&cls, params))
}

/// Limiting quantities for an already-classified parameter point.
pub fn limiting_values_for(cls: &PhaseClassification, params: &ModelParams) -> RegimeLimits {
    let cls = *cls;
    let p = params.p();
    let pf = p as f64;
    match cls.regime {
        Regime::OffCurve { maximizer } => {
            let x = maximizer;
            let h = model::potential_deriv_unchecked(x, params, 2).abs();
            RegimeLimits {
                classification: cls,
                free_energy_limit: cls.max_potential,
                var_edge: 1.0 / h,
                var_star: pf * pf * powu(x, 2 * p - 2) / h,
                cov_edge_star: pf * powu(x, p - 1) / h,
                scale_exponent: 0.0,
                edge_prob: x,
                mixture_weight: None,
            }
        }
        Regime::OnCurve { lower, upper } => {
            let w1 = peak_weight(lower, params);
            let w2 = peak_weight(upper, params);
            let base = w1 * w2 / ((w1 + w2) * (w1 + w2));
            let dx = lower - upper;
            let dxp = powu(lower, p) - powu(upper, p);
            let alpha = w2 / (w1 + w2);
            RegimeLimits {
                classification: cls,
                free_energy_limit: cls.max_potential,
                var_edge: dx * dx * base,
                var_star: dxp * dxp * base,
                cov_edge_star: dx * dxp * base,
                scale_exponent: 1.0,
                edge_prob: alpha * lower + (1.0 - alpha) * upper,
                mixture_weight: Some(alpha),
            }
        }
        Regime::Critical { maximizer } => {
            // gamma_3 / gamma_1 = Gamma(3/4)/Gamma(1/4) |b4|^(-1/2) with
            // |b4| = p^5 / (24 (p-1)^2).
            let base = gamma(0.75) / gamma(0.25) * 2.0 * fmath::sqrt(6.0);
            RegimeLimits {
                classification: cls,
                free_energy_limit: cls.max_potential,
                var_edge: base * (pf - 1.0) / fmath::powf(pf, 2.5),
                var_star: base * fmath::powf(pf - 1.0, 2.0 * pf - 1.0)
                    / fmath::powf(pf, 2.0 * pf - 1.5),
                cov_edge_star: base * powu(pf - 1.0, p) / fmath::powf(pf, pf + 0.5),
                scale_exponent: 0.5,
                edge_prob: maximizer,
                mixture_weight: None,
            }
        }
    }
}
