//! Simulation and threshold analysis for a viral propagation model with
//! nonlinear infection rate and two free boundaries.
//!
//! The model couples an ODE for uninfected cells `u` on the whole line, an
//! ODE for infected cells `v` and a diffusion equation for virions `w`, the
//! last two living on a habitat `(g(t), h(t))` whose ends move by Stefan
//! conditions `g' = −μ w_x`, `h' = −β w_x`.
//!
//! * [`model`]: parameters, reaction terms, `R0`, `Λ`, `D`, equilibria and the
//!   bilinear baseline ODE.
//! * [`spectral`]: closed-form principal eigenvalue of the linearized
//!   `(v, w)` operator, thresholds, and a finite-difference oracle.
//! * [`steady`]: positive steady states by monotone iteration.
//! * [`solver`]: front-fixing time integration of the full system.
//! * [`classify`]: spreading/vanishing verdicts, the explicit vanishing
//!   certificate, threshold bisection and parameter sweeps.
//! * [`io`]: configuration files, CSV/JSON output and the command-line driver.

pub mod classify;
pub mod error;
pub mod io;
pub mod model;
pub mod solver;
pub mod spectral;
pub mod steady;
pub mod tridiag;

pub use error::{Error, Result};
pub use model::{DerivedConstants, EquilibriumTriple, InitialData, ModelParams};
