//! One time step of the front-fixed system.
//!
//! In the straightened variable `y ∈ [-1, 1]` the virus and infected-cell
//! equations become
//!
//! ```text
//! z_t = d ξ z_yy + ζ z_y + f3(r, z)
//! r_t =            ζ r_y + f2(u(x(t, y)), r, z)
//! ```
//!
//! Each step is a two-stage predictor–corrector. Diffusion and the `ζ z_y`
//! term are trapezoidal in time (one tridiagonal solve per stage), reaction
//! terms and the `ζ r_y` transport are explicit Heun. The fronts use the
//! trapezoidal rule on the Stefan speeds, which come from a one-sided
//! three-point derivative at `y = ∓1`. `u` lives on a fixed physical grid: it
//! relaxes in closed form where the habitat never reaches during the step
//! and is advanced by Heun elsewhere.

use crate::error::{Error, Result};
use crate::model::{f1_raw, f2_raw, f3_raw, ModelParams};
use crate::tridiag;

use super::state::{interp_fixed, interp_moving, y_node, SimState, StepperConfig, TransformCoeffs};

/// Negative values larger than this in magnitude reject the step.
pub const CLIP_REJECT: f64 = 1e-8;
/// Negative values larger than this in magnitude are counted as clips.
pub const CLIP_COUNT: f64 = 1e-14;
/// Minimum habitat width before the run is aborted.
pub const MIN_WIDTH: f64 = 1e-6;

/// Stefan front speeds `(g', h')` from the current transformed profile.
pub fn front_speeds(z: &[f64], g: f64, h: f64, p: &ModelParams) -> (f64, f64) {
    let n = z.len();
    let dy = 2.0 / (n as f64 - 1.0);
    let scale = 2.0 / (h - g);
    let wx_left = (-3.0 * z[0] + 4.0 * z[1] - z[2]) / (2.0 * dy) * scale;
    let wx_right = (3.0 * z[n - 1] - 4.0 * z[n - 2] + z[n - 3]) / (2.0 * dy) * scale;
    ((-p.mu * wx_left).min(0.0), (-p.beta * wx_right).max(0.0))
}

/// Stable step size from the front motion: `cfl · min(Δy/max|ζ|,
/// Δy (h − g)/(2 max|front speed|), dt_max)`.
pub fn dt_rule(s: &SimState, cfg: &StepperConfig) -> f64 {
    let dy = s.dy();
    let mut lim = cfg.dt_max;
    let zeta = s.coeffs().zeta_max();
    if zeta > 0.0 {
        lim = lim.min(dy / zeta);
    }
    let speed = s.max_front_speed();
    if speed > 0.0 {
        lim = lim.min(dy * s.width() / (2.0 * speed));
    }
    cfg.cfl_safety * lim
}

/// Row coefficients `(lower, centre, upper)` of `dξ ∂yy + ζ ∂y` at node `j`.
/// Central differences, switching to upwind where the cell Péclet number
/// would break diagonal dominance.
#[inline]
fn operator_row(c: &TransformCoeffs, d: f64, y: f64, dy: f64) -> (f64, f64, f64) {
    let a = d * c.xi / (dy * dy);
    let zeta = c.zeta_at(y);
    let b = zeta / (2.0 * dy);
    if a >= b.abs() {
        (a - b, -2.0 * a, a + b)
    } else if zeta > 0.0 {
        (a, -2.0 * a - zeta / dy, a + zeta / dy)
    } else {
        (a - zeta / dy, -2.0 * a + zeta / dy, a)
    }
}

/// Trapezoidal step of `z_t = L z + src` with `L` taken at `old` and `new`.
fn diffuse(z: &[f64], old: &TransformCoeffs, new: &TransformCoeffs, d: f64, dt: f64, src: &[f64]) -> Vec<f64> {
    let n = z.len();
    let dy = 2.0 / (n as f64 - 1.0);
    let m = n - 2;
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    let mut scratch = vec![0.0; m];
    for j in 1..n - 1 {
        let y = y_node(j, n);
        let (ol, oc, ou) = operator_row(old, d, y, dy);
        let explicit = ol * z[j - 1] + oc * z[j] + ou * z[j + 1];
        rhs[j - 1] = z[j] + 0.5 * dt * explicit + dt * src[j];
        let (nl, nc, nu) = operator_row(new, d, y, dy);
        lower[j - 1] = -0.5 * dt * nl;
        diag[j - 1] = 1.0 - 0.5 * dt * nc;
        upper[j - 1] = -0.5 * dt * nu;
    }
    tridiag::solve_in_place(&lower, &diag, &upper, &mut rhs, &mut scratch);
    let mut out = vec![0.0; n];
    out[1..n - 1].copy_from_slice(&rhs);
    out
}

/// Right-hand side of the transformed `v` equation; `u_nodes` holds `u` at
/// the physical positions of the transformed nodes.
fn infected_rate(r: &[f64], z: &[f64], u_nodes: &[f64], c: &TransformCoeffs, p: &ModelParams) -> Vec<f64> {
    let n = r.len();
    let dy = 2.0 / (n as f64 - 1.0);
    let mut rate = vec![0.0; n];
    for j in 1..n - 1 {
        let zeta = c.zeta_at(y_node(j, n));
        // second-order upwind, first order next to the boundary
        let ry = if zeta > 0.0 {
            if j + 2 < n {
                (-3.0 * r[j] + 4.0 * r[j + 1] - r[j + 2]) / (2.0 * dy)
            } else {
                (r[j + 1] - r[j]) / dy
            }
        } else if zeta < 0.0 {
            if j >= 2 {
                (3.0 * r[j] - 4.0 * r[j - 1] + r[j - 2]) / (2.0 * dy)
            } else {
                (r[j] - r[j - 1]) / dy
            }
        } else {
            0.0
        };
        rate[j] = f2_raw(u_nodes[j], r[j], z[j].max(0.0), p) + zeta * ry;
    }
    rate
}

fn u_at_nodes(u: &[f64], x0: f64, dx: f64, g: f64, h: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| interp_fixed(u, x0, dx, 0.5 * ((h - g) * y_node(j, n) + h + g)))
        .collect()
}

/// Zeroes negative entries. Returns the number of counted clips, or the
/// offending value when it exceeds the rejection threshold.
fn clip_negative(vals: &mut [f64]) -> std::result::Result<usize, f64> {
    let mut clips = 0;
    for v in vals.iter_mut() {
        if !v.is_finite() || *v < -CLIP_REJECT {
            return Err(*v);
        }
        if *v < 0.0 {
            if *v < -CLIP_COUNT {
                clips += 1;
            }
            *v = 0.0;
        }
    }
    Ok(clips)
}

enum Attempt {
    Accepted(SimState),
    Rejected(String),
}

fn attempt(s: &SimState, p: &ModelParams, dt: f64) -> Result<Attempt> {
    let n = s.n_y();
    let (x0, dx) = (s.u_x0, s.u_dx);
    let nu = s.u_vals.len();
    let u_free = p.u_free();
    let mut clips = 0usize;

    let lvl0 = s.coeffs();
    let g1 = s.g + dt * s.g_speed;
    let h1 = s.h + dt * s.h_speed;
    if h1 - g1 < MIN_WIDTH {
        return Err(Error::FrontCollapse { t: s.t + dt, width: h1 - g1 });
    }

    // predictor
    let src0: Vec<f64> = (0..n).map(|j| f3_raw(s.r[j], s.z[j].max(0.0), p)).collect();
    let mut z1 = diffuse(&s.z, &lvl0, &TransformCoeffs::new(g1, h1, s.g_speed, s.h_speed), p.d, dt, &src0);
    let u_nodes0 = u_at_nodes(&s.u_vals, x0, dx, s.g, s.h, n);
    let rate0 = infected_rate(&s.r, &s.z, &u_nodes0, &lvl0, p);
    let mut r1: Vec<f64> = s.r.iter().zip(&rate0).map(|(r, k)| r + dt * k).collect();
    match (clip_negative(&mut z1), clip_negative(&mut r1)) {
        (Ok(a), Ok(b)) => clips += a + b,
        (Err(v), _) | (_, Err(v)) => return Ok(Attempt::Rejected(format!("predictor produced {v}"))),
    }
    let (gs1, hs1) = front_speeds(&z1, g1, h1, p);

    // u nodes the habitat can touch during the step
    let lo = s.g.min(g1);
    let hi = s.h.max(h1);
    let i_lo = (((lo - x0) / dx).floor().max(0.0) as usize).min(nu - 1);
    let i_hi = (((hi - x0) / dx).ceil().max(0.0) as usize).min(nu - 1);
    let mut rate_u0 = vec![0.0; i_hi + 1 - i_lo];
    let mut u1 = vec![0.0; i_hi + 1 - i_lo];
    for (k, i) in (i_lo..=i_hi).enumerate() {
        let x = x0 + dx * i as f64;
        let u = s.u_vals[i];
        rate_u0[k] = f1_raw(u, interp_moving(&s.z, s.g, s.h, x), p);
        u1[k] = u + dt * rate_u0[k];
    }

    // corrector
    let g2 = s.g + 0.5 * dt * (s.g_speed + gs1);
    let h2 = s.h + 0.5 * dt * (s.h_speed + hs1);
    if h2 - g2 < MIN_WIDTH {
        return Err(Error::FrontCollapse { t: s.t + dt, width: h2 - g2 });
    }
    let lvl1 = TransformCoeffs::new(g1, h1, gs1, hs1);
    let src: Vec<f64> = (0..n).map(|j| 0.5 * (src0[j] + f3_raw(r1[j], z1[j], p))).collect();
    let mut z2 = diffuse(&s.z, &lvl0, &TransformCoeffs::new(g2, h2, gs1, hs1), p.d, dt, &src);

    let mut u_pred = s.u_vals.clone();
    u_pred[i_lo..=i_hi].copy_from_slice(&u1);
    let u_nodes1 = u_at_nodes(&u_pred, x0, dx, g1, h1, n);
    let rate1 = infected_rate(&r1, &z1, &u_nodes1, &lvl1, p);
    let mut r2: Vec<f64> = (0..n).map(|j| s.r[j] + 0.5 * dt * (rate0[j] + rate1[j])).collect();
    match (clip_negative(&mut z2), clip_negative(&mut r2)) {
        (Ok(a), Ok(b)) => clips += a + b,
        (Err(v), _) | (_, Err(v)) => return Ok(Attempt::Rejected(format!("corrector produced {v}"))),
    }

    let decay = (-p.a * dt).exp();
    let mut u2: Vec<f64> = s.u_vals.iter().map(|&u| u_free + (u - u_free) * decay).collect();
    for (k, i) in (i_lo..=i_hi).enumerate() {
        let x = x0 + dx * i as f64;
        let w0 = interp_moving(&s.z, s.g, s.h, x);
        let w1 = interp_moving(&z1, g1, h1, x);
        if w0 > 0.0 || w1 > 0.0 {
            u2[i] = s.u_vals[i] + 0.5 * dt * (rate_u0[k] + f1_raw(u1[k], w1, p));
        }
    }
    for u in u2[i_lo..=i_hi].iter_mut() {
        if !u.is_finite() || *u <= 0.0 {
            return Ok(Attempt::Rejected(format!("u lost positivity ({u})")));
        }
        if *u > s.u_bound {
            if *u > s.u_bound + 1e-12 {
                clips += 1;
            }
            *u = s.u_bound;
        }
    }

    let (gs2, hs2) = front_speeds(&z2, g2, h2, p);
    Ok(Attempt::Accepted(SimState {
        t: s.t + dt,
        g: g2,
        h: h2,
        g_speed: gs2,
        h_speed: hs2,
        z: z2,
        r: r2,
        u_x0: x0,
        u_dx: dx,
        u_vals: u2,
        clip_count: s.clip_count + clips,
        steps: s.steps + 1,
        rejected_steps: s.rejected_steps,
        dt,
        initial_max_w: s.initial_max_w,
        u_bound: s.u_bound,
    }))
}

/// Advances by one adaptive step.
pub fn step(s: &SimState, p: &ModelParams, cfg: &StepperConfig) -> Result<SimState> {
    step_until(s, p, cfg, f64::INFINITY)
}

/// Advances by one adaptive step that does not pass `t_target`; when the step
/// is shortened to land on it, the new time is exactly `t_target`.
pub fn step_until(s: &SimState, p: &ModelParams, cfg: &StepperConfig, t_target: f64) -> Result<SimState> {
    let nominal = dt_rule(s, cfg).min(2.0 * s.dt);
    let remaining = t_target - s.t;
    let lands = remaining <= nominal * (1.0 + 1e-9);
    let mut dt = if lands { remaining } else { nominal };
    let mut landing = lands;
    for retry in 0..=cfg.max_retries {
        match attempt(s, p, dt)? {
            Attempt::Accepted(mut next) => {
                next.rejected_steps += retry;
                if landing {
                    next.t = t_target;
                    // keep the step history from shrinking because of the landing
                    next.dt = dt.max(s.dt.min(nominal));
                }
                return Ok(next);
            }
            Attempt::Rejected(reason) => {
                if retry == cfg.max_retries {
                    return Err(Error::StepRejected { t: s.t, reason });
                }
                dt *= 0.5;
                landing = false;
            }
        }
    }
    unreachable!("loop returns on the final retry")
}
