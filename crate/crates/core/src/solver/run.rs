use serde::Serialize;

use crate::classify::{Classification, OnlineClassifier};
use crate::error::Result;
use crate::model::{derived_constants, equilibrium_full, DerivedConstants, InitialData, ModelParams};

use super::state::{initialize, SimState, StepperConfig};
use super::step::step_until;

/// One row of the run's time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesRow {
    pub t: f64,
    pub g: f64,
    pub h: f64,
    pub width: f64,
    pub max_w: f64,
    pub max_v: f64,
    pub u_center: f64,
}

impl SeriesRow {
    pub fn of(s: &SimState) -> Self {
        SeriesRow {
            t: s.t,
            g: s.g,
            h: s.h,
            width: s.width(),
            max_w: s.max_w(),
            max_v: s.max_v(),
            u_center: s.u_at(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub r0: f64,
    pub lambda_cap: Option<f64>,
    pub final_width: f64,
    /// `(h − g)/Λ` at the end of the run.
    pub width_over_lambda: Option<f64>,
    pub center_triple: [f64; 3],
    pub equilibrium_triple: Option<[f64; 3]>,
    /// True only where the long-time limit `(u*, v*, w*)` is established:
    /// `R0 > 1`, `b <= 2a` and `R0 + sqrt(R0) > b/a`.
    pub equilibrium_limit_expected: bool,
    pub clip_count: usize,
    pub steps: usize,
    pub rejected_steps: usize,
    pub final_front_speeds: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub classification: Classification,
    pub derived: DerivedConstants,
    pub series: Vec<SeriesRow>,
    /// Profile snapshots at the series cadence (only when recorded).
    pub snapshots: Vec<SimState>,
    pub final_state: SimState,
    pub diagnostics: Diagnostics,
}

/// Appends nodes to both ends of the `u` grid once a front gets within a
/// margin of its edge. New nodes have never been inside the habitat, so
/// their value is the closed-form relaxation of `u0`.
fn extend_u_grid(s: &mut SimState, p: &ModelParams, init: &InitialData) {
    let half = s.x_half_width();
    let margin = (0.1 * half).max(10.0 * s.u_dx);
    if s.h < half - margin && s.g > -half + margin {
        return;
    }
    let add = (0.5 * half / s.u_dx).ceil() as usize;
    let u_free = p.u_free();
    let decay = (-p.a * s.t).exp();
    let relaxed = |x: f64| u_free + (init.u0.eval(x) - u_free) * decay;
    let new_x0 = s.u_x0 - add as f64 * s.u_dx;
    let old_len = s.u_vals.len();
    let mut vals = Vec::with_capacity(old_len + 2 * add);
    vals.extend((0..add).map(|i| relaxed(new_x0 + s.u_dx * i as f64)));
    vals.extend_from_slice(&s.u_vals);
    vals.extend((0..add).map(|i| relaxed(new_x0 + s.u_dx * (old_len + add + i) as f64)));
    s.u_x0 = new_x0;
    s.u_vals = vals;
}

fn diagnostics(p: &ModelParams, dc: &DerivedConstants, s: &SimState) -> Diagnostics {
    let ba = p.b / p.a;
    Diagnostics {
        r0: dc.r0,
        lambda_cap: dc.lambda_cap,
        final_width: s.width(),
        width_over_lambda: dc.lambda_cap.map(|l| s.width() / l),
        center_triple: s.center_triple(),
        equilibrium_triple: equilibrium_full(p).ok().map(|e| e.as_array()),
        equilibrium_limit_expected: dc.r0 > 1.0 && p.b <= 2.0 * p.a && dc.r0 + dc.r0.sqrt() > ba,
        clip_count: s.clip_count,
        steps: s.steps,
        rejected_steps: s.rejected_steps,
        final_front_speeds: (s.g_speed, s.h_speed),
    }
}

/// Integrates to `t_end`, or until the online classification is definite
/// when `stop_on_decision` is set.
pub fn run(p: &ModelParams, init: &InitialData, cfg: &StepperConfig) -> Result<RunOutcome> {
    let derived = derived_constants(p, init)?;
    let mut s = initialize(p, init, cfg)?;
    let mut classifier = OnlineClassifier::new(derived, cfg.classify.clone(), s.initial_max_w, p.u_free());
    let mut verdict = classifier.observe(&s);
    let mut series = vec![SeriesRow::of(&s)];
    let mut snapshots = Vec::new();
    if cfg.record_profiles {
        snapshots.push(s.clone());
    }
    let mut snap_index: u64 = 1;
    let done = |v: &Classification, s: &SimState| (cfg.stop_on_decision && v.is_definite()) || s.t >= cfg.t_end;
    while !done(&verdict, &s) {
        let next_snap = (snap_index as f64 * cfg.snapshot_every).min(cfg.t_end);
        s = step_until(&s, p, cfg, next_snap)?;
        extend_u_grid(&mut s, p, init);
        verdict = classifier.observe(&s);
        if s.t >= next_snap {
            snap_index += 1;
            series.push(SeriesRow::of(&s));
            if cfg.record_profiles {
                snapshots.push(s.clone());
            }
        }
    }
    if series.last().map(|r| r.t) != Some(s.t) {
        series.push(SeriesRow::of(&s));
    }
    let diagnostics = diagnostics(p, &derived, &s);
    Ok(RunOutcome { classification: verdict, derived, series, snapshots, final_state: s, diagnostics })
}
