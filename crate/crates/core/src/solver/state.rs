use serde::{Deserialize, Serialize};

use crate::classify::ClassifyTolerances;
use crate::error::{Error, Result};
use crate::model::{InitialData, ModelParams};

/// Time-stepping configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperConfig {
    /// Nodes on the transformed interval `[-1, 1]`; odd so `y = 0` is a node.
    pub n_y: usize,
    pub dt_init: f64,
    pub dt_max: f64,
    pub cfl_safety: f64,
    pub t_end: f64,
    /// Half-width `X` of the physical grid carrying `u`. `None` picks
    /// `h0 + 4Λ` when `R0 > 1` and `4 h0` otherwise.
    pub x_half_width: Option<f64>,
    /// Spacing of the physical grid. `None` uses the initial transformed
    /// spacing `2 h0 / (n_y − 1)`.
    pub u_dx: Option<f64>,
    /// Cadence of the time series (and of profile snapshots when recorded).
    pub snapshot_every: f64,
    /// Stop as soon as the online classification is definite.
    pub stop_on_decision: bool,
    /// Retries with halved `dt` before a rejected step becomes an error.
    pub max_retries: usize,
    /// Keep full profile snapshots at the series cadence.
    pub record_profiles: bool,
    pub classify: ClassifyTolerances,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            n_y: 257,
            dt_init: 1e-4,
            dt_max: 1e-2,
            cfl_safety: 0.5,
            t_end: 200.0,
            x_half_width: None,
            u_dx: None,
            snapshot_every: 0.5,
            stop_on_decision: true,
            max_retries: 30,
            record_profiles: false,
            classify: ClassifyTolerances::default(),
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("stepper.{msg}")));
        if self.n_y < 65 || self.n_y % 2 == 0 {
            return bad("n_y must be odd and at least 65");
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 0.9) {
            return bad("cfl_safety must lie in (0, 0.9]");
        }
        for (name, v) in [
            ("dt_init", self.dt_init),
            ("dt_max", self.dt_max),
            ("t_end", self.t_end),
            ("snapshot_every", self.snapshot_every),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be positive"));
            }
        }
        if let Some(x) = self.x_half_width {
            if !(x > 0.0 && x.is_finite()) {
                return bad("x_half_width must be positive");
            }
        }
        if let Some(dx) = self.u_dx {
            if !(dx > 0.0 && dx.is_finite()) {
                return bad("u_dx must be positive");
            }
        }
        self.classify.validate()
    }
}

/// Coefficients of the front-fixing transform
/// `x(t, y) = ((h − g) y + h + g)/2`:
/// `ξ = 4/(h − g)²` and `ζ(y) = (h' + g')/(h − g) + (h' − g') y/(h − g)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformCoeffs {
    pub xi: f64,
    zeta_const: f64,
    zeta_slope: f64,
}

impl TransformCoeffs {
    pub fn new(g: f64, h: f64, g_speed: f64, h_speed: f64) -> Self {
        let width = h - g;
        TransformCoeffs {
            xi: 4.0 / (width * width),
            zeta_const: (h_speed + g_speed) / width,
            zeta_slope: (h_speed - g_speed) / width,
        }
    }

    #[inline]
    pub fn zeta_at(&self, y: f64) -> f64 {
        self.zeta_const + self.zeta_slope * y
    }

    /// `max |ζ|` over `[-1, 1]` (attained at an end since `ζ` is affine).
    pub fn zeta_max(&self) -> f64 {
        (self.zeta_const + self.zeta_slope).abs().max((self.zeta_const - self.zeta_slope).abs())
    }
}

/// Full discrete state.
///
/// `z` and `r` hold `w` and `v` on the transformed grid `y_j = −1 + jΔy`;
/// `u_vals` holds `u` on the fixed physical grid `x_i = u_x0 + i·u_dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub g: f64,
    pub h: f64,
    pub g_speed: f64,
    pub h_speed: f64,
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    pub u_x0: f64,
    pub u_dx: f64,
    pub u_vals: Vec<f64>,
    /// Negative values set to zero so far.
    pub clip_count: usize,
    pub steps: usize,
    pub rejected_steps: usize,
    /// Last accepted step size.
    pub dt: f64,
    /// `max w` at `t = 0`.
    pub initial_max_w: f64,
    /// `A1 = max(sup u0, θ/a)`.
    pub u_bound: f64,
}

impl SimState {
    pub fn n_y(&self) -> usize {
        self.z.len()
    }

    pub fn dy(&self) -> f64 {
        2.0 / (self.z.len() as f64 - 1.0)
    }

    pub fn y_at(&self, j: usize) -> f64 {
        y_node(j, self.z.len())
    }

    pub fn y_grid(&self) -> Vec<f64> {
        (0..self.z.len()).map(|j| self.y_at(j)).collect()
    }

    pub fn width(&self) -> f64 {
        self.h - self.g
    }

    /// Physical position of transformed node `j`.
    pub fn x_at(&self, j: usize) -> f64 {
        0.5 * (self.width() * self.y_at(j) + self.h + self.g)
    }

    pub fn coeffs(&self) -> TransformCoeffs {
        TransformCoeffs::new(self.g, self.h, self.g_speed, self.h_speed)
    }

    pub fn u_grid(&self) -> Vec<f64> {
        (0..self.u_vals.len()).map(|i| self.u_x0 + self.u_dx * i as f64).collect()
    }

    pub fn x_half_width(&self) -> f64 {
        -self.u_x0
    }

    /// `w(t, x)` by linear interpolation on the transformed grid; zero
    /// outside `(g, h)`.
    pub fn w_at(&self, x: f64) -> f64 {
        interp_moving(&self.z, self.g, self.h, x)
    }

    pub fn v_at(&self, x: f64) -> f64 {
        interp_moving(&self.r, self.g, self.h, x)
    }

    /// `u(t, x)` by linear interpolation on the physical grid.
    pub fn u_at(&self, x: f64) -> f64 {
        interp_fixed(&self.u_vals, self.u_x0, self.u_dx, x)
    }

    pub fn max_w(&self) -> f64 {
        self.z.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_v(&self) -> f64 {
        self.r.iter().copied().fold(0.0, f64::max)
    }

    /// `(u, v, w)` at the habitat midpoint `x = 0`.
    pub fn center_triple(&self) -> [f64; 3] {
        [self.u_at(0.0), self.v_at(0.0), self.w_at(0.0)]
    }

    pub fn max_front_speed(&self) -> f64 {
        self.g_speed.abs().max(self.h_speed.abs())
    }
}

#[inline]
pub(crate) fn y_node(j: usize, n: usize) -> f64 {
    if j + 1 == n {
        1.0
    } else {
        -1.0 + 2.0 * j as f64 / (n as f64 - 1.0)
    }
}

pub(crate) fn interp_moving(vals: &[f64], g: f64, h: f64, x: f64) -> f64 {
    if !(x > g && x < h) {
        return 0.0;
    }
    let n = vals.len();
    let s = (x - g) / (h - g) * (n as f64 - 1.0);
    let j = (s.floor() as usize).min(n - 2);
    let frac = s - j as f64;
    vals[j] + frac * (vals[j + 1] - vals[j])
}

pub(crate) fn interp_fixed(vals: &[f64], x0: f64, dx: f64, x: f64) -> f64 {
    let n = vals.len();
    let s = (x - x0) / dx;
    if s <= 0.0 {
        return vals[0];
    }
    if s >= (n - 1) as f64 {
        return vals[n - 1];
    }
    let i = s.floor() as usize;
    let frac = s - i as f64;
    vals[i] + frac * (vals[i + 1] - vals[i])
}

/// Default physical half-width for the `u` grid.
pub fn default_half_width(p: &ModelParams) -> f64 {
    match p.lambda_cap() {
        Some(lam) => p.h0 + 4.0 * lam,
        None => 4.0 * p.h0,
    }
}

/// Builds the state at `t = 0`: fronts at `∓h0`, `w0` and `v0` sampled
/// through the straightening map, `u0` sampled on `[-X, X]`, front speeds
/// from the Stefan conditions applied to `w0`.
pub fn initialize(p: &ModelParams, init: &InitialData, cfg: &StepperConfig) -> Result<SimState> {
    p.validate()?;
    cfg.validate()?;
    init.validate(p.h0)?;
    let n = cfg.n_y;
    let h0 = p.h0;
    let mut z: Vec<f64> = (0..n).map(|j| init.w0.eval(h0 * y_node(j, n), h0)).collect();
    let mut r: Vec<f64> = (0..n).map(|j| init.v0.eval(h0 * y_node(j, n), h0)).collect();
    z[0] = 0.0;
    z[n - 1] = 0.0;
    r[0] = 0.0;
    r[n - 1] = 0.0;

    let dx = cfg.u_dx.unwrap_or(2.0 * h0 / (n as f64 - 1.0));
    let half = cfg.x_half_width.unwrap_or_else(|| default_half_width(p)).max(1.5 * h0);
    let k = (half / dx).ceil() as usize;
    let u_x0 = -(k as f64) * dx;
    let u_vals: Vec<f64> = (0..=2 * k).map(|i| init.u0.eval(u_x0 + dx * i as f64)).collect();

    let (slope_left, slope_right) = init.w0.end_slopes(h0);
    let initial_max_w = z.iter().copied().fold(0.0, f64::max);
    Ok(SimState {
        t: 0.0,
        g: -h0,
        h: h0,
        g_speed: -p.mu * slope_left,
        h_speed: -p.beta * slope_right,
        z,
        r,
        u_x0,
        u_dx: dx,
        u_vals,
        clip_count: 0,
        steps: 0,
        rejected_steps: 0,
        dt: cfg.dt_init,
        initial_max_w,
        u_bound: init.u0.sup().max(p.u_free()),
    })
}
