//! Time integration of the full free-boundary system.
//!
//! `w` and `v` are carried on the straightened interval `y ∈ [-1, 1]` via
//! `x(t, y) = ((h − g) y + h + g)/2`; `u`, which does not diffuse and lives
//! on the whole line, is carried on a fixed physical grid that grows when a
//! front approaches its edge.

mod run;
mod state;
mod step;

pub use run::{run, Diagnostics, RunOutcome, SeriesRow};
pub use state::{default_half_width, initialize, SimState, StepperConfig, TransformCoeffs};
pub use step::{dt_rule, front_speeds, step, step_until, CLIP_COUNT, CLIP_REJECT, MIN_WIDTH};

#[cfg(test)]
mod tests;
