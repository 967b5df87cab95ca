//! Model parameters, reaction terms and the closed-form quantities derived
//! from them: the basic reproduction number, the critical width `Λ`, the
//! critical diffusion `D`, the positive equilibrium and the constant steady
//! state `(v̂, ŵ)` at a frozen uninfected-cell level.
//!
//! The baseline (bilinear, spatially homogeneous) viral dynamics ODE lives
//! here as well; it is used as a reference for the long-time limits.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The ten positive scalars of the free-boundary system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Virus diffusion coefficient.
    pub d: f64,
    /// Production rate of uninfected cells.
    pub theta: f64,
    /// Death rate of uninfected cells.
    pub a: f64,
    /// Infection-rate coefficient.
    pub b: f64,
    /// Death rate of infected cells.
    pub c: f64,
    /// Virion production coefficient.
    pub k: f64,
    /// Virion death rate.
    pub q: f64,
    /// Expansion coefficient of the left front.
    pub mu: f64,
    /// Expansion coefficient of the right front.
    pub beta: f64,
    /// Initial half-width of the infected habitat.
    pub h0: f64,
}

impl ModelParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        d: f64,
        theta: f64,
        a: f64,
        b: f64,
        c: f64,
        k: f64,
        q: f64,
        mu: f64,
        beta: f64,
        h0: f64,
    ) -> Result<Self> {
        let p = ModelParams { d, theta, a, b, c, k, q, mu, beta, h0 };
        p.validate()?;
        Ok(p)
    }

    /// Rejects non-finite or non-positive fields, naming the first offender.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.named_fields() {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidParameter(format!("model.{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn named_fields(&self) -> [(&'static str, f64); 10] {
        [
            ("d", self.d),
            ("theta", self.theta),
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("k", self.k),
            ("q", self.q),
            ("mu", self.mu),
            ("beta", self.beta),
            ("h0", self.h0),
        ]
    }

    /// `γ = max(μ, β)`.
    pub fn gamma(&self) -> f64 {
        self.mu.max(self.beta)
    }

    /// Copy with `μ` and `β` scaled jointly so that `max(μ, β) = gamma`.
    pub fn with_gamma(&self, gamma: f64) -> Self {
        let s = gamma / self.gamma();
        ModelParams { mu: self.mu * s, beta: self.beta * s, ..*self }
    }

    /// Uninfected equilibrium level `θ/a`.
    pub fn u_free(&self) -> f64 {
        self.theta / self.a
    }

    /// `R0 = θkb/(acq)`.
    pub fn r0(&self) -> f64 {
        self.theta * self.k * self.b / (self.a * self.c * self.q)
    }

    /// Critical width `Λ = π·sqrt(acd/(θkb − acq))`, defined only for `R0 > 1`.
    pub fn lambda_cap(&self) -> Option<f64> {
        let denom = self.theta * self.k * self.b - self.a * self.c * self.q;
        (denom > 0.0).then(|| PI * (self.a * self.c * self.d / denom).sqrt())
    }

    /// Critical diffusion `D = 4h0²q(R0 − 1)/π²`, defined only for `R0 > 1`.
    pub fn d_cap(&self) -> Option<f64> {
        let r0 = self.r0();
        (r0 > 1.0).then(|| 4.0 * self.h0 * self.h0 * self.q * (r0 - 1.0) / (PI * PI))
    }
}

/// Piecewise-linear table `x ↦ y` on increasing abscissae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Table {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidInitialData(
                "tabulated profile needs at least two (x, value) pairs".into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInitialData("tabulated abscissae must be strictly increasing".into()));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInitialData("tabulated profile contains non-finite values".into()));
        }
        Ok(Table { xs, ys })
    }

    /// Linear interpolation, constant extension past either end.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&xi| xi <= x) - 1;
        let s = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.ys[i] + s * (self.ys[i + 1] - self.ys[i])
    }

    pub fn max(&self) -> f64 {
        self.ys.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.ys.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Initial uninfected-cell density on the whole line.
#[derive(Debug, Clone, PartialEq)]
pub enum CellProfile {
    Constant(f64),
    Tabulated(Table),
}

impl CellProfile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            CellProfile::Constant(c) => *c,
            CellProfile::Tabulated(t) => t.eval(x),
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            CellProfile::Constant(c) => *c,
            CellProfile::Tabulated(t) => t.max(),
        }
    }

    pub fn inf(&self) -> f64 {
        match self {
            CellProfile::Constant(c) => *c,
            CellProfile::Tabulated(t) => t.min(),
        }
    }
}

/// Initial infected-cell or virus density on `[-h0, h0]`.
#[derive(Debug, Clone, PartialEq)]
pub enum HabitatProfile {
    /// `amplitude · cos(πx/(2h0))`.
    Cosine { amplitude: f64 },
    Tabulated(Table),
}

impl HabitatProfile {
    /// Value at `x`; zero outside `[-h0, h0]`.
    pub fn eval(&self, x: f64, h0: f64) -> f64 {
        if x.abs() > h0 {
            return 0.0;
        }
        match self {
            HabitatProfile::Cosine { amplitude } => amplitude * (PI * x / (2.0 * h0)).cos().max(0.0),
            HabitatProfile::Tabulated(t) => t.eval(x),
        }
    }

    /// One-sided slopes `(w'(-h0+), w'(h0-))`.
    pub fn end_slopes(&self, h0: f64) -> (f64, f64) {
        match self {
            HabitatProfile::Cosine { amplitude } => {
                let s = amplitude * PI / (2.0 * h0);
                (s, -s)
            }
            HabitatProfile::Tabulated(t) => {
                let n = t.xs.len();
                let left = (t.ys[1] - t.ys[0]) / (t.xs[1] - t.xs[0]);
                let right = (t.ys[n - 1] - t.ys[n - 2]) / (t.xs[n - 1] - t.xs[n - 2]);
                (left, right)
            }
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            HabitatProfile::Cosine { amplitude } => *amplitude,
            HabitatProfile::Tabulated(t) => t.max(),
        }
    }

    /// Smallest `M` with `profile(x) <= M cos(πx/(2h0))` on `(-h0, h0)`.
    ///
    /// Tabulated profiles are checked at their interior nodes and at the
    /// midpoints between them.
    pub fn cosine_envelope(&self, h0: f64) -> f64 {
        match self {
            HabitatProfile::Cosine { amplitude } => *amplitude,
            HabitatProfile::Tabulated(t) => {
                let mut probes: Vec<f64> = t.xs.clone();
                probes.extend(t.xs.windows(2).map(|w| 0.5 * (w[0] + w[1])));
                let mut m: f64 = 0.0;
                for x in probes {
                    let c = (PI * x / (2.0 * h0)).cos();
                    if x.abs() < h0 && c > 1e-12 {
                        m = m.max(t.eval(x) / c);
                    }
                }
                // the ratio at the ends tends to slope/(π/(2h0))
                let (sl, sr) = self.end_slopes(h0);
                let k = PI / (2.0 * h0);
                m.max(sl / k).max(-sr / k)
            }
        }
    }
}

/// Initial data `(u0, v0, w0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub u0: CellProfile,
    pub v0: HabitatProfile,
    pub w0: HabitatProfile,
}

impl InitialData {
    /// `u0` constant, `v0 = v_amp cos(πx/(2h0))`, `w0 = w_amp cos(πx/(2h0))`.
    pub fn cosine(u0: f64, v_amp: f64, w_amp: f64) -> Self {
        InitialData {
            u0: CellProfile::Constant(u0),
            v0: HabitatProfile::Cosine { amplitude: v_amp },
            w0: HabitatProfile::Cosine { amplitude: w_amp },
        }
    }

    /// Cosine data with `u0 = θ/a` and the same amplitude for `v0`, `w0`.
    pub fn cosine_default(p: &ModelParams, amplitude: f64) -> Self {
        Self::cosine(p.u_free(), amplitude, amplitude)
    }

    /// Copy with `v0` and `w0` multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let scale = |hp: &HabitatProfile| match hp {
            HabitatProfile::Cosine { amplitude } => HabitatProfile::Cosine { amplitude: amplitude * factor },
            HabitatProfile::Tabulated(t) => HabitatProfile::Tabulated(Table {
                xs: t.xs.clone(),
                ys: t.ys.iter().map(|y| y * factor).collect(),
            }),
        };
        InitialData { u0: self.u0.clone(), v0: scale(&self.v0), w0: scale(&self.w0) }
    }

    /// Checks the compatibility conditions on the initial data, reporting the
    /// violated clause.
    pub fn validate(&self, h0: f64) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInitialData(msg.to_string()));
        match &self.u0 {
            CellProfile::Constant(c) if !(c.is_finite() && *c > 0.0) => return bad("u0 must be positive"),
            CellProfile::Tabulated(t) if t.min() <= 0.0 => return bad("u0 must be positive"),
            _ => {}
        }
        for (name, prof) in [("v0", &self.v0), ("w0", &self.w0)] {
            match prof {
                HabitatProfile::Cosine { amplitude } => {
                    if !(amplitude.is_finite() && *amplitude > 0.0) {
                        return bad(&format!("{name} amplitude must be positive"));
                    }
                }
                HabitatProfile::Tabulated(t) => {
                    let n = t.xs.len();
                    let tol = 1e-9 * h0.max(1.0);
                    if (t.xs[0] + h0).abs() > tol || (t.xs[n - 1] - h0).abs() > tol {
                        return bad(&format!("{name} samples must span [-h0, h0]"));
                    }
                    let scale = t.max().abs().max(1e-300);
                    if t.ys[0].abs() > 1e-12 * scale.max(1.0) {
                        return bad(&format!("{name}(-h0) must be 0"));
                    }
                    if t.ys[n - 1].abs() > 1e-12 * scale.max(1.0) {
                        return bad(&format!("{name}(h0) must be 0"));
                    }
                    if t.ys[1..n - 1].iter().any(|&y| !(y > 0.0)) {
                        return bad(&format!("{name} must be positive in (-h0, h0)"));
                    }
                }
            }
        }
        let (sl, sr) = self.w0.end_slopes(h0);
        if !(sl > 0.0) {
            return bad("w0'(-h0) must be positive");
        }
        if !(sr < 0.0) {
            return bad("w0'(h0) must be negative");
        }
        Ok(())
    }
}

/// Closed-form constants attached to a parameter set and its initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub r0: f64,
    /// `Λ`; `None` when `R0 <= 1`.
    pub lambda_cap: Option<f64>,
    /// `D`; `None` when `R0 <= 1`.
    pub d_cap: Option<f64>,
    /// `A1 = max(sup u0, θ/a)`.
    pub u_bound: f64,
}

impl DerivedConstants {
    /// `h0 >= Λ/2`; false whenever `Λ` is undefined.
    pub fn initially_supercritical(&self, h0: f64) -> bool {
        self.lambda_cap.is_some_and(|l| h0 >= 0.5 * l)
    }
}

pub fn derived_constants(p: &ModelParams, init: &InitialData) -> Result<DerivedConstants> {
    p.validate()?;
    Ok(DerivedConstants {
        r0: p.r0(),
        lambda_cap: p.lambda_cap(),
        d_cap: p.d_cap(),
        u_bound: init.u0.sup().max(p.u_free()),
    })
}

fn check_w(w: f64) -> Result<()> {
    if w < 0.0 || w.is_nan() {
        Err(Error::Domain(format!("virus concentration w = {w} must be nonnegative")))
    } else {
        Ok(())
    }
}

/// `f1 = θ − au − buw/(1+w)`.
pub fn f1(u: f64, w: f64, p: &ModelParams) -> Result<f64> {
    check_w(w)?;
    Ok(f1_raw(u, w, p))
}

/// `f2 = buw/(1+w) − cv`.
pub fn f2(u: f64, v: f64, w: f64, p: &ModelParams) -> Result<f64> {
    check_w(w)?;
    Ok(f2_raw(u, v, w, p))
}

/// `f3 = kv/(1+w) − qw`.
pub fn f3(v: f64, w: f64, p: &ModelParams) -> Result<f64> {
    check_w(w)?;
    Ok(f3_raw(v, w, p))
}

#[inline]
pub(crate) fn f1_raw(u: f64, w: f64, p: &ModelParams) -> f64 {
    p.theta - p.a * u - p.b * u * w / (1.0 + w)
}

#[inline]
pub(crate) fn f2_raw(u: f64, v: f64, w: f64, p: &ModelParams) -> f64 {
    p.b * u * w / (1.0 + w) - p.c * v
}

#[inline]
pub(crate) fn f3_raw(v: f64, w: f64, p: &ModelParams) -> f64 {
    p.k * v / (1.0 + w) - p.q * w
}

/// Positive equilibrium of the saturating reaction system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumTriple {
    pub u_star: f64,
    pub v_star: f64,
    pub w_star: f64,
}

impl EquilibriumTriple {
    pub fn as_array(&self) -> [f64; 3] {
        [self.u_star, self.v_star, self.w_star]
    }
}

/// Unique positive root of `cq[a(1+w)² + bw(1+w)] = θkb` and the matching
/// `u*`, `v*`.
pub fn equilibrium_full(p: &ModelParams) -> Result<EquilibriumTriple> {
    p.validate()?;
    let r0 = p.r0();
    if r0 <= 1.0 {
        return Err(Error::NoPositiveRoot { r0 });
    }
    // (a+b) w² + (2a+b) w + a(1 − R0) = 0, constant term negative.
    let qa = p.a + p.b;
    let qb = 2.0 * p.a + p.b;
    let neg_qc = p.theta * p.k * p.b / (p.c * p.q) - p.a;
    let w = 2.0 * neg_qc / (qb + (qb * qb + 4.0 * qa * neg_qc).sqrt());
    let u = p.c * p.q * (1.0 + w) * (1.0 + w) / (p.k * p.b);
    let v = p.q * w * (1.0 + w) / p.k;
    Ok(EquilibriumTriple { u_star: u, v_star: v, w_star: w })
}

/// Constant steady state `(v̂, ŵ)` of the `(v, w)` subsystem with `u` frozen
/// at `m`: `ŵ = sqrt(kbm/(qc)) − 1`, `v̂ = bmŵ/(c(1+ŵ))`.
pub fn w_hat(m: f64, p: &ModelParams) -> Result<(f64, f64)> {
    let lhs = p.k * p.b * m;
    let rhs = p.q * p.c;
    if !(lhs > rhs) {
        return Err(Error::ThresholdViolated { lhs, rhs });
    }
    let w = (lhs / rhs).sqrt() - 1.0;
    let v = p.b * m * w / (p.c * (1.0 + w));
    Ok((v, w))
}

/// Sampled solution of the baseline ODE.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<[f64; 3]>,
}

impl Trajectory {
    pub fn last(&self) -> [f64; 3] {
        *self.states.last().expect("trajectory is never empty")
    }
}

/// Interior equilibrium of the bilinear baseline,
/// `(qc/(kb), θ/c − aq/(kb), θk/(qc) − a/b)`.
pub fn baseline_equilibrium(p: &ModelParams) -> [f64; 3] {
    let kb = p.k * p.b;
    [p.q * p.c / kb, p.theta / p.c - p.a * p.q / kb, p.theta * p.k / (p.q * p.c) - p.a / p.b]
}

fn baseline_rhs(s: [f64; 3], p: &ModelParams) -> [f64; 3] {
    let [u, v, w] = s;
    [p.theta - p.a * u - p.b * u * w, p.b * u * w - p.c * v, p.k * v - p.q * w]
}

/// Fixed-step classical Runge–Kutta integration of the bilinear model
/// `u' = θ − au − buw`, `v' = buw − cv`, `w' = kv − qw`.
pub fn ode_baseline(p: &ModelParams, init: [f64; 3], t_end: f64, dt: f64) -> Result<Trajectory> {
    p.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter("dt must be positive".into()));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter("t_end must be nonnegative".into()));
    }
    if init.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidParameter("initial triple must be nonnegative".into()));
    }
    let steps = (t_end / dt).ceil() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut t = 0.0;
    let mut s = init;
    times.push(t);
    states.push(s);
    let axpy = |x: [f64; 3], h: f64, k: [f64; 3]| [x[0] + h * k[0], x[1] + h * k[1], x[2] + h * k[2]];
    for i in 0..steps {
        let h = if i + 1 == steps { t_end - t } else { dt };
        let k1 = baseline_rhs(s, p);
        let k2 = baseline_rhs(axpy(s, 0.5 * h, k1), p);
        let k3 = baseline_rhs(axpy(s, 0.5 * h, k2), p);
        let k4 = baseline_rhs(axpy(s, h, k3), p);
        for j in 0..3 {
            s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        t = if i + 1 == steps { t_end } else { t + h };
        if let Some(x) = s.iter().find(|x| **x < -1e-10) {
            return Err(Error::StepRejected {
                t,
                reason: format!("component went negative ({x}); reduce dt"),
            });
        }
        for x in &mut s {
            *x = x.max(0.0);
        }
        times.push(t);
        states.push(s);
    }
    Ok(Trajectory { times, states })
}
