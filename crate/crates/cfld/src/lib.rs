//! Exact optimization toolkit for competitive facility location with
//! discrete attractiveness levels (CFLD).
//!
//! A company enters a market where competitor facilities already operate.
//! It picks locations for new facilities among candidate sites and, for each
//! opened site, exactly one attractiveness level from a finite menu. Customers
//! split their spending across facilities following a gravity rule
//! (attractiveness over squared distance), so the captured revenue is a sum of
//! linear-fractional terms in the binary decisions.
//!
//! The crate provides:
//!
//! * [`model`] — problem data, derived coefficients, objective evaluation and
//!   analytic gradients;
//! * [`instancegen`] — seeded random instance generation and the canonical
//!   JSON instance format;
//! * [`oracle`] — exhaustive ground-truth optimizer for small instances;
//! * [`relaxation`] — conditional-gradient solver for the convex continuous
//!   relaxation, producing certified lower bounds;
//! * [`bnb`] — built-in exact branch-and-bound solver;
//! * [`formulations`] — the three exact reformulations (MILP via McCormick
//!   envelopes, outer-approximation master, rotated-cone MICQP) with MPS, CBF
//!   and JSON exporters plus feasibility checking;
//! * [`oa`] — the outer-approximation loop with pluggable master solvers;
//! * [`extsolver`] — a subprocess boundary for optional external MILP/conic
//!   engines via exchange files;
//! * [`bench`] — benchmark sweeps and plot-ready CSV series.
//!
//! With the `parallel` feature (default) the enumeration, branch-and-bound and
//! benchmark inner loops can run on a rayon pool; without it every entry point
//! falls back to the sequential path with identical results.

pub mod bench;
pub mod bnb;
pub mod error;
pub mod exec;
pub mod extsolver;
pub mod formulations;
pub mod instancegen;
pub mod model;
pub mod oa;
pub mod oracle;
pub mod relaxation;

pub use error::CfldError;
pub use exec::ExecMode;
pub use model::{DerivedCoefficients, FractionalPoint, Instance, Solution};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CfldError>;
