//! Numerical laboratory for the porous medium equation `u_t = Δu^m` (m > 1)
//! posed on backgrounds that evolve by Ricci flow.
//!
//! The crate works in pressure form, `v = m/(m-1) u^{m-1}`, which obeys
//! `v_t = (m-1) v Δv + |∇v|²`. It provides
//!
//! * [`families`]: the closed-form coefficient triples `(α, φ, γ)` and
//!   grid audits of their admissibility inequalities,
//! * [`geometry`]: flat circles/tori and the homothetically shrinking round
//!   sphere, with time-dependent discrete Laplacian and gradient,
//! * [`solver`]: an explicit, positivity-checked integrator for the pressure
//!   equation,
//! * [`estimates`]: the Li–Yau/Hamilton-type quantity `F`, the local and
//!   global right-hand sides, the `G = γF` differential inequality, cutoff
//!   functions and the classical Aronson–Bénilan check,
//! * [`oracle`]: Barenblatt profiles, manufactured solutions and
//!   convergence-order tables,
//! * [`harness`]: config parsing, orchestration, sweeps and report emission.

pub mod error;
pub mod estimates;
pub mod families;
pub mod geometry;
pub mod harness;
pub mod oracle;
pub mod solver;

pub use error::{LabError, Result};
pub use families::{Family, FlowEnv, FunctionTriple, PmeParameters, TripleSample};


pub use geometry::{GridSpec, ManifoldModel, ModelKind};
pub use solver::{PressureField, RunTrace};
