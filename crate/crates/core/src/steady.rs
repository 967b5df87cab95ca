//! Positive steady states of the `(v, w)` subsystem on `(−l, l)` with the
//! uninfected-cell density frozen at `m`.
//!
//! Eliminating `v = bmw/(c(1+w))` reduces the problem to the scalar BVP
//!
//! ```text
//! −d w'' + q w = kbm w / (c (1+w)²),   −l < x < l
//! ```
//!
//! with either homogeneous Dirichlet data or `w(±l) = K`. Both are solved by
//! monotone iteration between an ordered pair of lower and upper solutions,
//! each sweep a tridiagonal solve of the shifted linear operator.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{w_hat, ModelParams};
use crate::spectral::eigen_for_model;
use crate::tridiag;

/// Sweep cap for the monotone iteration.
pub const MAX_SWEEPS: usize = 2_000_000;
/// Relative sup-norm change that ends the iteration.
pub const CHANGE_TOL: f64 = 1e-10;
/// `|λ1|` below this is treated as "at the bifurcation point".
pub const NEAR_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BvpSolution {
    pub l: f64,
    pub grid: Vec<f64>,
    pub w_vals: Vec<f64>,
    pub v_vals: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Every sweep moved each node in the expected direction.
    pub monotone: bool,
    /// Sup-norm residual of the discrete equation at the returned iterate.
    pub residual: f64,
    pub diagnostic: Option<String>,
}

impl BvpSolution {
    pub fn max_w(&self) -> f64 {
        self.w_vals.iter().copied().fold(0.0, f64::max)
    }

    pub fn center_w(&self) -> f64 {
        self.w_vals[self.w_vals.len() / 2]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum BvpOutcome {
    Solution(BvpSolution),
    /// `λ1 <= 0`: only the trivial solution exists.
    NoPositiveSolution { lambda1: f64 },
}

impl BvpOutcome {
    pub fn solution(&self) -> Option<&BvpSolution> {
        match self {
            BvpOutcome::Solution(s) => Some(s),
            BvpOutcome::NoPositiveSolution { .. } => None,
        }
    }
}

/// Discretized operator `−d D2 + q` on a uniform grid with `n` nodes
/// (endpoints included) and the nonlinearity `G(w) = kbm w/(c(1+w)²)`.
struct Discretization {
    d: f64,
    q: f64,
    gain: f64,
    h: f64,
    grid: Vec<f64>,
    boundary: f64,
}

impl Discretization {
    fn new(m: f64, p: &ModelParams, l: f64, n: usize, boundary: f64) -> Result<Self> {
        if n < 64 {
            return Err(Error::InvalidParameter("BVP grid needs n >= 64".into()));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidParameter("l must be positive".into()));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidParameter("m must be positive".into()));
        }
        let h = 2.0 * l / (n as f64 - 1.0);
        let grid = (0..n).map(|i| if i + 1 == n { l } else { -l + h * i as f64 }).collect();
        Ok(Discretization { d: p.d, q: p.q, gain: p.k * p.b * m / p.c, h, grid, boundary })
    }

    fn nonlinear(&self, w: f64) -> f64 {
        self.gain * w / ((1.0 + w) * (1.0 + w))
    }

    fn residual(&self, w: &[f64]) -> f64 {
        let n = w.len();
        let h2 = self.h * self.h;
        (1..n - 1)
            .map(|i| {
                let lap = (w[i - 1] - 2.0 * w[i] + w[i + 1]) / h2;
                (-self.d * lap + self.q * w[i] - self.nonlinear(w[i])).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Monotone iteration from `start`; `increasing` is the expected direction.
    /// An iterate whose sup norm drops to `zero_floor` counts as converged to
    /// the trivial solution.
    fn iterate(&self, start: Vec<f64>, increasing: bool, cap: usize, zero_floor: f64) -> (Vec<f64>, usize, bool, bool) {
        let n = start.len();
        let m = n - 2;
        let h2 = self.h * self.h;
        // G(w) + K w is nondecreasing on w >= 0 for K >= max |G'| = gain.
        let shift = self.gain;
        let off = -self.d / h2;
        let lower = vec![off; m];
        let upper = vec![off; m];
        let diag = vec![2.0 * self.d / h2 + self.q + shift; m];
        let mut scratch = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        let mut w = start;
        let mut monotone = true;
        for sweep in 1..=cap {
            for i in 0..m {
                let wi = w[i + 1];
                rhs[i] = self.nonlinear(wi) + shift * wi;
            }
            rhs[0] += self.d * self.boundary / h2;
            rhs[m - 1] += self.d * self.boundary / h2;
            tridiag::solve_in_place(&lower, &diag, &upper, &mut rhs, &mut scratch);
            let mut change: f64 = 0.0;
            let mut sup: f64 = 0.0;
            for i in 0..m {
                let delta = rhs[i] - w[i + 1];
                let slack = 1e-13 * w[i + 1].abs().max(1e-300);
                if (increasing && delta < -slack) || (!increasing && delta > slack) {
                    monotone = false;
                }
                change = change.max(delta.abs());
                sup = sup.max(rhs[i].abs());
                w[i + 1] = rhs[i];
            }
            if change <= CHANGE_TOL * sup.min(1.0) || sup <= zero_floor {
                return (w, sweep, true, monotone);
            }
        }
        (w, cap, false, monotone)
    }

    fn finish(&self, l: f64, m: f64, p: &ModelParams, w: Vec<f64>, iters: usize, converged: bool, monotone: bool) -> BvpSolution {
        let v_vals = w.iter().map(|&wi| p.b * m * wi / (p.c * (1.0 + wi))).collect();
        BvpSolution {
            l,
            grid: self.grid.clone(),
            residual: self.residual(&w),
            w_vals: w,
            v_vals,
            converged,
            iterations: iters,
            monotone,
            diagnostic: None,
        }
    }
}

/// Positive solution of the Dirichlet problem, or `NoPositiveSolution` when
/// the principal eigenvalue on `(−l, l)` is nonpositive.
pub fn solve_dirichlet_bvp(m: f64, p: &ModelParams, l: f64, n: usize) -> Result<BvpOutcome> {
    solve_dirichlet_bvp_capped(m, p, l, n, MAX_SWEEPS)
}

pub fn solve_dirichlet_bvp_capped(m: f64, p: &ModelParams, l: f64, n: usize, cap: usize) -> Result<BvpOutcome> {
    let disc = Discretization::new(m, p, l, n, 0.0)?;
    let lambda1 = eigen_for_model(m, p, -l, l)?.lambda1;
    if lambda1 <= 0.0 {
        return Ok(BvpOutcome::NoPositiveSolution { lambda1 });
    }
    let near = lambda1 < NEAR_THRESHOLD;

    // Lower solution δ·cos(πx/(2l)), δ halved until the discrete inequality
    // −d D2 w + q w <= G(w) holds at every interior node.
    let scale = w_hat(m, p).map(|(_, w)| w).unwrap_or(1.0);
    let profile: Vec<f64> = disc.grid.iter().map(|&x| (PI * x / (2.0 * l)).cos().max(0.0)).collect();
    let mut delta = 1e-3 * scale;
    let h2 = disc.h * disc.h;
    let mut lower_ok = false;
    while delta > 1e-250 {
        let w: Vec<f64> = profile.iter().map(|c| delta * c).collect();
        let ok = (1..n - 1).all(|i| {
            let lap = (w[i - 1] - 2.0 * w[i] + w[i + 1]) / h2;
            -disc.d * lap + disc.q * w[i] <= disc.nonlinear(w[i])
        });
        if ok {
            lower_ok = true;
            break;
        }
        delta *= 0.5;
    }
    if !lower_ok {
        let mut sol = disc.finish(l, m, p, vec![0.0; n], 0, false, true);
        sol.diagnostic = Some(format!("no discrete lower solution found; lambda1 = {lambda1}"));
        return Ok(BvpOutcome::Solution(sol));
    }
    let mut start: Vec<f64> = profile.iter().map(|c| delta * c).collect();
    start[0] = 0.0;
    start[n - 1] = 0.0;
    let (w, iters, converged, monotone) = disc.iterate(start, true, cap, 0.0);
    let mut sol = disc.finish(l, m, p, w, iters, converged, monotone);
    if !converged {
        if near {
            sol.diagnostic = Some(format!("near threshold (lambda1 = {lambda1}); iteration cap reached"));
        } else {
            return Err(Error::NonConvergence {
                iterations: iters,
                reason: format!("monotone iteration stalled at lambda1 = {lambda1}; refine the grid"),
            });
        }
    }
    Ok(BvpOutcome::Solution(sol))
}

/// Solution of the problem with `w(±l) = boundary`, iterated down from the
/// constant upper solution `boundary >= ŵ(m)`.
pub fn solve_bvp_with_boundary_value(m: f64, p: &ModelParams, l: f64, boundary: f64, n: usize) -> Result<BvpSolution> {
    let (_, w_top) = w_hat(m, p)?;
    if !(boundary.is_finite() && boundary >= w_top * (1.0 - 1e-15)) {
        return Err(Error::PreconditionViolated(format!(
            "boundary value {boundary} must be at least w_hat(m) = {w_top}"
        )));
    }
    let disc = Discretization::new(m, p, l, n, boundary)?;
    let (w, iters, converged, monotone) = disc.iterate(vec![boundary; n], false, MAX_SWEEPS, 0.0);
    if !converged {
        return Err(Error::NonConvergence { iterations: iters, reason: "boundary-value iteration".into() });
    }
    Ok(disc.finish(l, m, p, w, iters, converged, monotone))
}

/// Dirichlet problem iterated down from the constant upper solution
/// `max(ŵ(m), 1)`. Converges to the maximal solution: positive when
/// `λ1 > 0`, the zero solution otherwise (reported once the sup norm falls
/// below `1e-12` of the start).
pub fn solve_dirichlet_from_above(m: f64, p: &ModelParams, l: f64, n: usize, cap: usize) -> Result<BvpSolution> {
    let disc = Discretization::new(m, p, l, n, 0.0)?;
    let top = w_hat(m, p).map(|(_, w)| w.max(1.0)).unwrap_or(1.0);
    let mut start = vec![top; n];
    start[0] = 0.0;
    start[n - 1] = 0.0;
    let (w, iters, converged, monotone) = disc.iterate(start, false, cap, 1e-12 * top);
    Ok(disc.finish(l, m, p, w, iters, converged, monotone))
}
