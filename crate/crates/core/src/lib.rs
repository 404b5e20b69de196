//! Principal eigenpairs of the radial weighted p-Laplacian.
//!
//! The radial Dirichlet problem
//!
//! ```text
//! −(ρ |u′|^{p−2} u′)′ = λ σ |u|^{p−2} u   on (R₁, R₂),   u(R₁) = u(R₂) = 0,
//! ```
//!
//! with `ρ = r^{N−1} v` and `σ = r^{N−1} w`, is handled end to end:
//!
//! * [`weights`] — piecewise power–log weights and problem data;
//! * [`quadrature`] — improper integrals with convergence certificates;
//! * [`conditions`] — the integrability and boundedness hypotheses on the
//!   weights, each with numeric witnesses;
//! * [`solver`] — shooting in flux variables, a discrete Rayleigh-quotient
//!   minimizer and a fixed-point boundary representation;
//! * [`asymptotics`] — envelope sandwiches and decay-exponent fits;
//! * [`degiorgi`] — the recursion-decay lemma behind the boundedness theory.
//!
//! Everything numeric is generic over [`Real`] (`f32`/`f64`); the aliases at
//! the crate root fix the scalar to `f64`.
//!
//! ```
//! use radial_plap::{presets, solver::{find_lambda1, SolveOptions}};
//!
//! let ps = presets::annulus_trivial::<f64>();
//! let eig = find_lambda1(&ps, &SolveOptions::default()).unwrap();
//! assert!((eig.lambda - std::f64::consts::PI.powi(2)).abs() < 1e-6);
//! ```

// `!(a < b)` is the NaN-rejecting guard throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod conditions;
pub mod degiorgi;
pub mod endpoint;
pub mod error;
pub mod mesh;
pub mod ode;
pub mod presets;
pub mod quadrature;
pub mod scalar;
pub mod solver;
pub mod weights;

pub use endpoint::{Endpoint, PowerLog};
pub use error::{Error, Result};
pub use scalar::Real;
pub use weights::{PowerLogPiece, ProblemJson, ProblemSpec, WeightModel};

pub type WeightModelF64 = weights::WeightModel<f64>;
pub type ProblemSpecF64 = weights::ProblemSpec<f64>;
pub type EigenpairF64 = solver::Eigenpair<f64>;
pub type MeshF64 = mesh::Mesh<f64>;
pub type ConditionReportF64 = conditions::ConditionReport;
pub type IntegralResultF64 = quadrature::IntegralResult<f64>;
pub type AsymptoticVerdictF64 = asymptotics::AsymptoticVerdict<f64>;

pub type ProblemSpecF32 = weights::ProblemSpec<f32>;
pub type EigenpairF32 = solver::Eigenpair<f32>;
