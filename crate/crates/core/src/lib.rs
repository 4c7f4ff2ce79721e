//! Numerics for a directed exponential random graph ensemble whose
//! sufficient statistics are the edge density and the outward p-star
//! density.
//!
//! The crate computes, for any parameter point `(beta1, beta2)` and star
//! order `p >= 2`:
//!
//! * the exact finite-n free energy density and its first and second
//!   parameter derivatives, via the row factorization of the partition
//!   function over a tilted binomial out-degree law ([`ensemble`]);
//! * the scalar potential whose global maximizers on `(0, 1)` govern the
//!   large-n behaviour, together with a robust maximizer finder and phase
//!   classification ([`model`]);
//! * the phase transition curve in the parameter plane, its analytic
//!   slope, and a continuation tracer ([`curve`]);
//! * Laplace-type asymptotic expansions of the governing integrals, the
//!   closed-form limiting variances/covariance in all three regimes, and
//!   a quadrature oracle ([`asymptotics`]);
//! * exact reproducible sampling of graphs from the ensemble and Monte
//!   Carlo estimates of the same observables ([`sampler`]).
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the
//! default `std` feature and enable `libm` for embedded or wasm targets.
//!
//! ```
//! use ergm_core::{ModelParams, Regime};
//!
//! // A two-phase point: for p = 2 the transition curve is beta2 = -beta1.
//! let params = ModelParams::new(-2.5, 2.5, 2).unwrap();
//! let cls = ergm_core::curve::classify_point(&params, 1e-10).unwrap();
//! assert!(matches!(cls.regime, Regime::OnCurve { .. }));
//!
//! // The exact finite-n free energy approaches the maximal potential.
//! let psi = ergm_core::ensemble::free_energy_density(&params, 2000).unwrap();
//! assert!((psi - cls.max_potential).abs() < 5.0 * 2000f64.ln() / 2000.0);
//!
//! // Limiting edge probability: an equal mixture of the two phases.
//! let limits = ergm_core::asymptotics::limiting_values(&params).unwrap();
//! assert!((limits.edge_prob - 0.5).abs() < 1e-9);
//! ```

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("ergm-core requires either the `std` or the `libm` feature");

extern crate alloc;

mod fmath;

pub mod asymptotics;
pub mod curve;
pub mod ensemble;
pub mod error;
pub mod model;
pub mod sampler;
pub mod special;

pub use error::{Error, Result};
pub use model::{ModelParams, PhaseClassification, Regime};
