//! Built-in self-check suite behind `ergm-phase verify`.
//!
//! Each check re-derives a quantity two independent ways and compares at
//! a documented tolerance; one line is printed per check and the exit
//! code is nonzero if any fail.

use ergm_core::asymptotics::{
    laplace_expand, limiting_values, observable_taylor, quadrature_integral,
};
use ergm_core::curve::{classify_point, solve_curve_point};
use ergm_core::ensemble::{
    brute_force_psi, exact_derivatives, free_energy_density, TiltedBinomial,
};
use ergm_core::model::{ModelParams, Regime};
use ergm_core::sampler::CounterRng;
use ergm_core::special::gamma;

pub struct Options {
    /// Skip the checks that need n >= 1e5.
    pub quick: bool,
    /// Negative-control hook: corrupt the gamma constant before the
    /// identity check, which must then fail.
    pub inject_bad_gamma: bool,
}

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Outcome {
    Outcome {
        name,
        passed,
        detail,
    }
}

fn params(b1: f64, b2: f64, p: u32) -> ModelParams {
    ModelParams::new(b1, b2, p).expect("verify uses valid parameters")
}

fn gamma_identities(inject: bool) -> Outcome {
    let pi = std::f64::consts::PI;
    let fudge = if inject { 1.0 + 1e-8 } else { 1.0 };
    let half = (gamma(0.5) - pi.sqrt()).abs() / pi.sqrt();
    let product = gamma(0.25) * fudge * gamma(0.75);
    let refl = (product - pi * 2.0f64.sqrt()).abs() / (pi * 2.0f64.sqrt());
    check(
        "gamma-identities",
        half < 1e-12 && refl < 1e-12,
        format!("Gamma(1/2) rel {half:.2e}, Gamma(1/4)Gamma(3/4) rel {refl:.2e}"),
    )
}

fn brute_force_oracle() -> Outcome {
    let rng = CounterRng::new(0x0AC1E);
    let mut worst = 0.0f64;
    for trial in 0..12u64 {
        let b1 = -3.0 + 6.0 * rng.uniform([trial, 0, 0]);
        let b2 = -3.0 + 6.0 * rng.uniform([trial, 1, 0]);
        let p = 2 + (rng.index([trial, 2, 0]) % 2) as u32;
        let pr = params(b1, b2, p);
        for n in 2..=4u64 {
            let diff = (free_energy_density(&pr, n).unwrap() - brute_force_psi(&pr, n).unwrap())
                .abs();
            worst = worst.max(diff);
        }
    }
    check(
        "brute-force-oracle",
        worst < 1e-10,
        format!("max |psi - enumeration| = {worst:.2e} over 36 cases"),
    )
}

fn trivial_exactness(quick: bool) -> Outcome {
    let pr = params(0.0, 0.0, 2);
    let mut sizes = vec![100u64, 10_000];
    if !quick {
        sizes.push(1_000_000);
    }
    let mut worst = 0.0f64;
    for &n in &sizes {
        let ed = exact_derivatives(&pr, n).unwrap();
        worst = worst.max((ed.free_energy - std::f64::consts::LN_2).abs());
        worst = worst.max((ed.d2_edge - 0.25).abs());
    }
    check(
        "trivial-exactness",
        worst < 1e-12,
        format!("max deviation {worst:.2e} over n = {sizes:?}"),
    )
}

fn symmetric_edge_probability(quick: bool) -> Outcome {
    let pr = params(-2.5, 2.5, 2);
    let mut sizes = vec![10u64, 1000, 10_000];
    if !quick {
        sizes.push(100_000);
    }
    let mut worst = 0.0f64;
    for &n in &sizes {
        let ed = exact_derivatives(&pr, n).unwrap();
        worst = worst.max((ed.edge_prob - 0.5).abs());
    }
    check(
        "symmetric-edge-probability",
        worst < 1e-12,
        format!("max |P(edge) - 1/2| = {worst:.2e}"),
    )
}

fn observable_identities() -> Outcome {
    let rng = CounterRng::new(0x0D0);
    let mut worst = 0.0f64;
    for trial in 0..50u64 {
        let c = 0.02 + 0.96 * rng.uniform([trial, 0, 0]);
        let p = 2 + (rng.index([trial, 1, 0]) % 4) as u32;
        let d = |m: u32| observable_taylor(c, m).unwrap().0;
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        worst = worst.max(rel(d(2) * d(0), d(1) * d(1)));
        worst = worst.max(rel(d(2 * p) * d(0), d(p) * d(p)));
        worst = worst.max(rel(d(p + 1) * d(0), d(1) * d(p)));
    }
    check(
        "observable-product-identities",
        worst < 1e-12,
        format!("max relative defect {worst:.2e}"),
    )
}

fn critical_limit_constants() -> Outcome {
    let crit = ModelParams::at_critical_point(2).unwrap();
    let lim = limiting_values(&crit).unwrap();
    let spread = ((lim.var_star - lim.var_edge).abs() + (lim.cov_edge_star - lim.var_edge).abs())
        / lim.var_edge;
    let value_ok = (lim.var_edge - 0.292_707).abs() < 1e-4;
    check(
        "critical-limit-constants",
        spread < 1e-12 && value_ok,
        format!("constant {:.6}, p=2 spread {spread:.2e}", lim.var_edge),
    )
}

fn free_energy_derivatives() -> Outcome {
    let rng = CounterRng::new(0xF1D);
    let n = 200u64;
    let h = 1e-5;
    let mut ok = true;
    let mut worst = 0.0f64;
    for trial in 0..5u64 {
        let b1 = -2.0 + 4.0 * rng.uniform([trial, 0, 7]);
        let b2 = -1.0 + 2.0 * rng.uniform([trial, 1, 7]);
        let pr = params(b1, b2, 2);
        let ed = exact_derivatives(&pr, n).unwrap();
        let psi =
            |d1: f64, d2: f64| free_energy_density(&params(b1 + d1, b2 + d2, 2), n).unwrap();
        let fd1 = (psi(h, 0.0) - psi(-h, 0.0)) / (2.0 * h);
        let fd2 = (psi(h, 0.0) - 2.0 * psi(0.0, 0.0) + psi(-h, 0.0)) / (h * h);
        let e1 = (fd1 - ed.d_edge).abs() / ed.d_edge.abs().max(1e-6);
        let e2 = (fd2 - ed.d2_edge).abs() / ed.d2_edge.abs().max(1e-3);
        worst = worst.max(e1.max(e2));
        ok &= e1 < 1e-6 && e2 < 1e-3;
    }
    check(
        "free-energy-derivatives",
        ok,
        format!("max finite-difference mismatch {worst:.2e}"),
    )
}

fn expansion_vs_quadrature() -> Outcome {
    let cases: [(&str, ModelParams, f64); 3] = [
        ("regular", params(-1.5, 1.5, 2), 1e-3),
        ("critical", ModelParams::at_critical_point(2).unwrap(), 1e-2),
        ("two-phase", params(-2.5, 2.5, 2), 1e-2),
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for (label, pr, tol) in cases {
        let le = laplace_expand(&pr, 1000, 0).unwrap();
        let q = quadrature_integral(&pr, 1000, 0).unwrap();
        let rel = ((le.log_value() - q).exp() - 1.0).abs();
        ok &= rel < tol;
        details.push(format!("{label} {rel:.1e}"));
    }
    check(
        "expansion-vs-quadrature",
        ok,
        details.join(", "),
    )
}

fn curve_p2_line() -> Outcome {
    let mut worst = 0.0f64;
    for &b1 in &[-2.5f64, -4.0] {
        let point = solve_curve_point(b1, 2, 1e-10).unwrap();
        worst = worst.max((point.beta2 + b1).abs());
    }
    check(
        "curve-p2-line",
        worst < 1e-8,
        format!("max |q(beta1) + beta1| = {worst:.2e}"),
    )
}

fn classification_sanity() -> Outcome {
    let off = classify_point(&params(0.0, 0.0, 2), 1e-10).unwrap();
    let on = classify_point(&params(-2.5, 2.5, 2), 1e-10).unwrap();
    let crit = classify_point(&params(-2.0, 2.0, 2), 1e-10).unwrap();
    let ok = matches!(off.regime, Regime::OffCurve { .. })
        && matches!(on.regime, Regime::OnCurve { .. })
        && matches!(crit.regime, Regime::Critical { .. });
    check(
        "classification-sanity",
        ok,
        format!("{:?} / {:?} / {:?}", off.regime, on.regime, crit.regime),
    )
}

fn normalization(quick: bool) -> Outcome {
    let mut sizes = vec![10_000u64];
    if !quick {
        sizes.push(1_000_000);
    }
    let mut worst = 0.0f64;
    for &n in &sizes {
        let tb = TiltedBinomial::new(params(-1.5, 1.5, 2), n).unwrap();
        let total = ergm_core::special::sum_compensated(tb.probabilities());
        worst = worst.max((total - 1.0).abs());
    }
    check(
        "normalization",
        worst < 1e-12,
        format!("max |sum p_i - 1| = {worst:.2e}"),
    )
}

/// Run the suite; returns the number of failures.
pub fn run(options: &Options) -> u32 {
    let outcomes = vec![
        gamma_identities(options.inject_bad_gamma),
        brute_force_oracle(),
        trivial_exactness(options.quick),
        symmetric_edge_probability(options.quick),
        observable_identities(),
        critical_limit_constants(),
        free_energy_derivatives(),
        expansion_vs_quadrature(),
        curve_p2_line(),
        classification_sanity(),
        normalization(options.quick),
    ];
    let mut failures = 0u32;
    for o in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag}  {:32}  {}", o.name, o.detail);
        if !o.passed {
            failures += 1;
        }
    }
    if failures == 0 {
        println!("all {} checks passed", outcomes.len());
    } else {
        println!("{failures} of {} checks failed", outcomes.len());
    }
    failures
}
