//! Spreading/vanishing verdicts.
//!
//! Online rules, first match wins:
//!
//! * `S1`: `R0 > 1` and `h − g >= Λ`. Rigorous: a vanishing solution never
//!   gets wider than `Λ`.
//! * `V1`: `max w` below a fraction of its initial value, both fronts still
//!   and `u` back at `θ/a`, sustained over a window of accepted steps. This is
//!   a finite-time heuristic for an asymptotic property.
//!
//! Also here: the explicit vanishing certificate `μ0` built from a
//! shrinking-cosine supersolution, bisection for the sharp threshold in
//! `γ = max(μ, β)`, and parameter sweeps.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DerivedConstants, InitialData, ModelParams};
use crate::solver::{run, SimState, StepperConfig};
use crate::spectral::phi_tilde;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Spreading,
    Vanishing,
    Undetermined,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Spreading => "spreading",
            Verdict::Vanishing => "vanishing",
            Verdict::Undetermined => "undetermined",
        }
    }
}

/// Rule that produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    /// Width reached `Λ` with `R0 > 1`.
    S1,
    /// Sustained dead state (heuristic).
    V1,
    /// No rule fired yet.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub reason: Rule,
    /// Time of the decision, or of the last observation when undetermined.
    pub t_decided: f64,
}

impl Classification {
    pub fn is_definite(&self) -> bool {
        self.verdict != Verdict::Undetermined
    }
}

/// Thresholds of the vanishing rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyTolerances {
    /// `max w` must fall below this fraction of its initial maximum.
    pub w_dead_rel: f64,
    /// Both front speeds must fall below this.
    pub front_still: f64,
    /// Consecutive accepted steps the conditions must hold.
    pub window: usize,
    /// `sup |u − θ/a|` must fall below this.
    pub u_settle: f64,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        ClassifyTolerances { w_dead_rel: 1e-5, front_still: 1e-7, window: 50, u_settle: 1e-4 }
    }
}

impl ClassifyTolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("w_dead_rel", self.w_dead_rel), ("front_still", self.front_still), ("u_settle", self.u_settle)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("stepper.classify.{name} must be positive")));
            }
        }
        if self.window == 0 {
            return Err(Error::InvalidParameter("stepper.classify.window must be positive".into()));
        }
        Ok(())
    }
}

/// Applies the online rules to a stream of accepted states. Once a verdict is
/// definite it no longer changes.
#[derive(Debug, Clone)]
pub struct OnlineClassifier {
    dc: DerivedConstants,
    tol: ClassifyTolerances,
    w_reference: f64,
    u_free: f64,
    streak: usize,
    decided: Option<Classification>,
}

impl OnlineClassifier {
    pub fn new(dc: DerivedConstants, tol: ClassifyTolerances, initial_max_w: f64, u_free: f64) -> Self {
        OnlineClassifier { dc, tol, w_reference: initial_max_w, u_free, streak: 0, decided: None }
    }

    pub fn observe(&mut self, s: &SimState) -> Classification {
        if let Some(c) = self.decided {
            return c;
        }
        // Λ exists only when R0 > 1, so S1 cannot fire otherwise.
        if let Some(lam) = self.dc.lambda_cap {
            if self.dc.r0 > 1.0 && s.width() >= lam {
                return self.decide(Verdict::Spreading, Rule::S1, s.t);
            }
        }
        let dead = s.max_w() < self.tol.w_dead_rel * self.w_reference
            && s.max_front_speed() < self.tol.front_still
            && s.u_vals.iter().all(|u| (u - self.u_free).abs() < self.tol.u_settle);
        self.streak = if dead { self.streak + 1 } else { 0 };
        if self.streak >= self.tol.window {
            return self.decide(Verdict::Vanishing, Rule::V1, s.t);
        }
        Classification { verdict: Verdict::Undetermined, reason: Rule::None, t_decided: s.t }
    }

    fn decide(&mut self, verdict: Verdict, reason: Rule, t: f64) -> Classification {
        let c = Classification { verdict, reason, t_decided: t };
        self.decided = Some(c);
        c
    }
}

/// Single-state classification: the rigorous width rule only, since the
/// vanishing rule needs a history.
pub fn classify_state(s: &SimState, dc: &DerivedConstants) -> Classification {
    match dc.lambda_cap {
        Some(lam) if dc.r0 > 1.0 && s.width() >= lam => {
            Classification { verdict: Verdict::Spreading, reason: Rule::S1, t_decided: s.t }
        }
        _ => Classification { verdict: Verdict::Undetermined, reason: Rule::None, t_decided: s.t },
    }
}

/// Explicit bound `μ0`: any `max(μ, β) <= μ0` forces vanishing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    /// Half-width the supersolution never exceeds.
    pub l: f64,
    pub lambda1: f64,
    pub phi_t: f64,
    /// Amplitude of the cosine envelope of `(v0, w0/φ̃)`.
    pub m: f64,
    /// `û(0) = max(sup u0, θ/a)`.
    pub u_hat0: f64,
    /// `∫_0^∞ f(s) ds`.
    pub integral: f64,
    pub mu0: f64,
}

/// Adaptive Simpson quadrature.
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Certificate at a given half-width `l > h0` with `λ1 < 0` on `(−l, l)`.
pub fn vanishing_certificate(p: &ModelParams, init: &InitialData, l: f64) -> Result<Certificate> {
    p.validate()?;
    init.validate(p.h0)?;
    if !(l > p.h0) {
        return Err(Error::NotApplicable(format!("certificate needs l = {l} > h0 = {}", p.h0)));
    }
    let pt = match phi_tilde(p, l) {
        Ok(pt) => pt,
        Err(Error::PreconditionViolated(msg)) => return Err(Error::NotApplicable(msg)),
        Err(e) => return Err(e),
    };
    let (lambda1, phi_t) = (pt.lambda1, pt.phi_t);
    let m = init.v0.cosine_envelope(p.h0).max(init.w0.cosine_envelope(p.h0) / phi_t);
    let u_free = p.u_free();
    let u_hat0 = init.u0.sup().max(u_free);
    let excess = phi_t * p.b * (u_hat0 - u_free) / p.a;
    let decay = -lambda1;
    let integral = if excess == 0.0 {
        m / decay
    } else {
        let f = |t: f64| m * (lambda1 * t + excess * (1.0 - (-p.a * t).exp())).exp();
        // f(t) <= m e^{excess} e^{λ1 t}: choose the cut so the tail is below
        // 1e-12 of the lower bound m/decay, then add the tail bound.
        let cut = (excess + 12.0 * std::f64::consts::LN_10) / decay;
        let body = simpson(&f, 0.0, cut, 1e-15 * m / decay);
        let tail = m * (excess + lambda1 * cut).exp() / decay;
        body + tail
    };
    let mu0 = (l * l - p.h0 * p.h0) / (PI * phi_t * integral);
    Ok(Certificate { l, lambda1, phi_t, m, u_hat0, integral, mu0 })
}

/// Default half-width `(h0 + Λ/2)/2`.
pub fn default_certificate_l(p: &ModelParams) -> Result<f64> {
    let lam = p
        .lambda_cap()
        .ok_or_else(|| Error::NotApplicable("R0 <= 1: every gamma vanishes, no certificate width needed".into()))?;
    if p.h0 >= 0.5 * lam {
        return Err(Error::NotApplicable("h0 >= critical half-width: spreading is certain".into()));
    }
    Ok(0.5 * (p.h0 + 0.5 * lam))
}

/// Certificate with `l` chosen by golden-section search on `(h0, Λ/2)` to
/// maximize `μ0`.
pub fn optimal_certificate(p: &ModelParams, init: &InitialData) -> Result<Certificate> {
    default_certificate_l(p)?;
    let lam = p.lambda_cap().expect("checked above");
    let (mut a, mut b) = (p.h0, 0.5 * lam);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let eval = |l: f64| vanishing_certificate(p, init, l).map(|c| c.mu0).unwrap_or(0.0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    for _ in 0..100 {
        if (b - a) <= 1e-10 * lam {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = eval(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = eval(x1);
        }
    }
    let best = if f1 > f2 { x1 } else { x2 };
    let default = vanishing_certificate(p, init, default_certificate_l(p)?)?;
    let opt = vanishing_certificate(p, init, best)?;
    Ok(if opt.mu0 >= default.mu0 { opt } else { default })
}

/// One simulated (or certified) point of a threshold search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Probe {
    pub gamma: f64,
    pub verdict: Verdict,
    pub reason: Rule,
    /// Side used by the bisection.
    pub resolved: Verdict,
    /// The run ended undetermined and was assigned a side by its width.
    pub flagged: bool,
    /// Vanishing guaranteed by the certificate, no simulation run.
    pub certified: bool,
    pub final_width: f64,
    pub t_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdBracket {
    pub mu_lo: f64,
    pub mu_hi: f64,
    /// Probes in evaluation order.
    pub probes: Vec<Probe>,
    /// Number of verdict changes along increasing `γ`.
    pub flips: usize,
    pub certificate_mu0: Option<f64>,
}

impl ThresholdBracket {
    pub fn relative_width(&self) -> f64 {
        (self.mu_hi - self.mu_lo) / self.mu_hi
    }
}

fn probe(p: &ModelParams, init: &InitialData, cfg: &StepperConfig, gamma: f64, mu0: Option<f64>) -> Result<Probe> {
    if let Some(mu0) = mu0 {
        if gamma <= mu0 {
            return Ok(Probe {
                gamma,
                verdict: Verdict::Vanishing,
                reason: Rule::None,
                resolved: Verdict::Vanishing,
                flagged: false,
                certified: true,
                final_width: f64::NAN,
                t_final: 0.0,
            });
        }
    }
    let pg = p.with_gamma(gamma);
    let cfg = StepperConfig { stop_on_decision: true, ..cfg.clone() };
    let out = run(&pg, init, &cfg)?;
    let c = out.classification;
    let width = out.final_state.width();
    let lam = out.derived.lambda_cap.unwrap_or(f64::INFINITY);
    let (resolved, flagged) = match c.verdict {
        Verdict::Undetermined if width > 0.9 * lam => (Verdict::Spreading, true),
        Verdict::Undetermined => (Verdict::Vanishing, true),
        v => (v, false),
    };
    Ok(Probe {
        gamma,
        verdict: c.verdict,
        reason: c.reason,
        resolved,
        flagged,
        certified: false,
        final_width: width,
        t_final: out.final_state.t,
    })
}

/// Number of verdict changes when probes are ordered by `γ`.
pub fn count_flips(probes: &[Probe]) -> usize {
    let mut sorted: Vec<&Probe> = probes.iter().collect();
    sorted.sort_by(|a, b| a.gamma.total_cmp(&b.gamma));
    sorted.windows(2).filter(|w| w[0].resolved != w[1].resolved).count()
}

/// Bisection on `γ = max(μ, β)` (both scaled jointly) for the sharp
/// spreading threshold.
pub fn threshold_search(
    p: &ModelParams,
    init: &InitialData,
    cfg: &StepperConfig,
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> Result<ThresholdBracket> {
    p.validate()?;
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidParameter("rel_tol must be positive".into()));
    }
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::BracketInvalid(format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    match p.lambda_cap() {
        Some(lam) if 2.0 * p.h0 < lam => {}
        _ => {
            return Err(Error::PreconditionViolated(
                "threshold search needs R0 > 1 and 2 h0 below the critical width".into(),
            ))
        }
    }
    let mu0 = optimal_certificate(p, init).ok().map(|c| c.mu0);
    let mut probes = Vec::new();
    let lo_probe = probe(p, init, cfg, lo, mu0)?;
    let lo_ok = lo_probe.resolved == Verdict::Vanishing;
    probes.push(lo_probe);
    if !lo_ok {
        return Err(Error::BracketInvalid(format!("gamma = {lo} does not vanish")));
    }
    let hi_probe = probe(p, init, cfg, hi, mu0)?;
    let hi_ok = hi_probe.resolved == Verdict::Spreading;
    probes.push(hi_probe);
    if !hi_ok {
        return Err(Error::BracketInvalid(format!("gamma = {hi} does not spread")));
    }
    let (mut a, mut b) = (lo, hi);
    while (b - a) / b > rel_tol {
        let mid = 0.5 * (a + b);
        let pr = probe(p, init, cfg, mid, mu0)?;
        if pr.resolved == Verdict::Spreading {
            b = mid;
        } else {
            a = mid;
        }
        probes.push(pr);
    }
    let flips = count_flips(&probes);
    if flips != 1 {
        return Err(Error::MonotonicityViolation(format!(
            "verdict changes {flips} times across {} probes",
            probes.len()
        )));
    }
    Ok(ThresholdBracket { mu_lo: a, mu_hi: b, probes, flips, certificate_mu0: mu0 })
}

/// Inclusive linear axis `lo..=hi` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self.n {
            0 => vec![],
            1 => vec![self.lo],
            n => (0..n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

/// Ranges for a sweep; an absent axis keeps the base value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepAxes {
    pub h0: Option<Axis>,
    pub d: Option<Axis>,
    pub gamma: Option<Axis>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictSource {
    Analytic,
    Simulated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub h0: f64,
    pub d: f64,
    pub gamma: f64,
    pub r0: f64,
    pub lambda_cap: Option<f64>,
    pub d_cap: Option<f64>,
    /// `None` when the simulation failed; see `error`.
    pub verdict: Option<Verdict>,
    pub source: VerdictSource,
    pub error: Option<String>,
}

fn sweep_cell(base: &ModelParams, init: &InitialData, cfg: &StepperConfig, h0: f64, d: f64, gamma: f64) -> SweepRow {
    let p = ModelParams { h0, d, ..base.with_gamma(gamma) };
    let row = |verdict, source, error| SweepRow {
        h0,
        d,
        gamma,
        r0: p.r0(),
        lambda_cap: p.lambda_cap(),
        d_cap: p.d_cap(),
        verdict,
        source,
        error,
    };
    if let Err(e) = p.validate() {
        return row(None, VerdictSource::Analytic, Some(e.to_string()));
    }
    if p.r0() <= 1.0 {
        return row(Some(Verdict::Vanishing), VerdictSource::Analytic, None);
    }
    if p.lambda_cap().is_some_and(|lam| 2.0 * h0 >= lam) {
        return row(Some(Verdict::Spreading), VerdictSource::Analytic, None);
    }
    let cfg = StepperConfig { stop_on_decision: true, ..cfg.clone() };
    match run(&p, init, &cfg) {
        Ok(out) => row(Some(out.classification.verdict), VerdictSource::Simulated, None),
        Err(e) => row(None, VerdictSource::Simulated, Some(e.to_string())),
    }
}

/// Evaluates every grid point (`h0` outermost, `gamma` innermost). Cells run
/// in parallel; rows come back in grid order.
pub fn sweep(base: &ModelParams, init: &InitialData, axes: &SweepAxes, cfg: &StepperConfig) -> Result<Vec<SweepRow>> {
    base.validate()?;
    let h0s = axes.h0.map(|a| a.values()).unwrap_or_else(|| vec![base.h0]);
    let ds = axes.d.map(|a| a.values()).unwrap_or_else(|| vec![base.d]);
    let gammas = axes.gamma.map(|a| a.values()).unwrap_or_else(|| vec![base.gamma()]);
    let mut cells = Vec::with_capacity(h0s.len() * ds.len() * gammas.len());
    for &h in &h0s {
        for &d in &ds {
            cells.extend(gammas.iter().map(|&g| (h, d, g)));
        }
    }
    Ok(cells.par_iter().map(|&(h, d, g)| sweep_cell(base, init, cfg, h, d, g)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::initialize;

    fn reference(h0: f64) -> ModelParams {
        ModelParams::new(1.0, 1.0, 1.0, 2.0, 1.0, 2.0, 1.0, 1.0, 1.0, h0).unwrap()
    }

    #[test]
    fn simpson_integrates_exponential() {
        let v = simpson(&|t: f64| (-0.5 * t).exp(), 0.0, 80.0, 1e-14);
        assert!((v - 2.0 * (1.0 - (-40f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn certificate_reference_value() {
        let p = reference(0.4);
        let pt = phi_tilde(&p, 0.8).unwrap();
        // M = 1: v0 = cos, w0 = φ̃ cos
        let init = InitialData::cosine(1.0, 1.0, pt.phi_t);
        let c = vanishing_certificate(&p, &init, 0.8).unwrap();
        assert!((c.m - 1.0).abs() < 1e-15);
        assert!((c.integral - 1.0 / -c.lambda1).abs() < 1e-15);
        let exact = (0.64 - 0.16) * (-c.lambda1) / (PI * c.phi_t);
        assert!((c.mu0 - exact).abs() < 1e-14);
        assert!((c.mu0 - 0.0539).abs() < 1e-4);
    }

    #[test]
    fn certificate_with_excess_u_matches_direct_quadrature() {
        let p = reference(0.4);
        let init = InitialData::cosine(1.7, 0.2, 0.2);
        let c = vanishing_certificate(&p, &init, 0.7).unwrap();
        // independent trapezoid sum on a long fine grid
        let excess = c.phi_t * p.b * 0.7 / p.a;
        let f = |t: f64| c.m * (c.lambda1 * t + excess * (1.0 - (-p.a * t).exp())).exp();
        let h = 1e-3;
        let n = 600_000;
        let mut s = 0.5 * (f(0.0) + f(n as f64 * h));
        for i in 1..n {
            s += f(i as f64 * h);
        }
        s *= h;
        assert!((c.integral - s).abs() < 1e-6 * s);
        assert!(c.integral > c.m / -c.lambda1);
    }

    #[test]
    fn certificate_not_applicable() {
        let p = reference(0.4);
        let init = InitialData::cosine(1.0, 0.1, 0.1);
        assert!(matches!(vanishing_certificate(&p, &init, 0.3), Err(Error::NotApplicable(_))));
        assert!(matches!(vanishing_certificate(&p, &init, 1.0), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn optimal_certificate_beats_default() {
        let p = reference(0.4);
        let init = InitialData::cosine(1.0, 0.1, 0.1);
        let d = vanishing_certificate(&p, &init, default_certificate_l(&p).unwrap()).unwrap();
        let o = optimal_certificate(&p, &init).unwrap();
        assert!(o.mu0 >= d.mu0);
        assert!(o.l > p.h0 && o.l < 0.5 * p.lambda_cap().unwrap());
    }

    #[test]
    fn s1_rule_and_guard() {
        let p = reference(0.4);
        let init = InitialData::cosine(1.0, 0.1, 0.1);
        let cfg = StepperConfig::default();
        let mut s = initialize(&p, &init, &cfg).unwrap();
        let dc = crate::model::derived_constants(&p, &init).unwrap();
        assert_eq!(classify_state(&s, &dc).verdict, Verdict::Undetermined);
        let mut clf = OnlineClassifier::new(dc, cfg.classify.clone(), s.initial_max_w, p.u_free());
        assert_eq!(clf.observe(&s).verdict, Verdict::Undetermined);
        s.h = 2.0;
        s.t = 3.5;
        let c = clf.observe(&s);
        assert_eq!((c.verdict, c.reason, c.t_decided), (Verdict::Spreading, Rule::S1, 3.5));

        // R0 <= 1: no Λ, S1 can never fire however wide
        let sub = ModelParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.4).unwrap();
        let dc = crate::model::derived_constants(&sub, &init).unwrap();
        s.g = -1e6;
        s.h = 1e6;
        assert_eq!(classify_state(&s, &dc).verdict, Verdict::Undetermined);
    }

    #[test]
    fn v1_needs_a_sustained_window() {
        let p = reference(0.4);
        let init = InitialData::cosine(1.0, 0.1, 0.1);
        let cfg = StepperConfig::default();
        let mut s = initialize(&p, &init, &cfg).unwrap();
        let dc = crate::model::derived_constants(&p, &init).unwrap();
        let tol = ClassifyTolerances { window: 3, ..Default::default() };
        let mut clf = OnlineClassifier::new(dc, tol, s.initial_max_w, p.u_free());
        s.z.iter_mut().for_each(|z| *z = 0.0);
        s.g_speed = 0.0;
        s.h_speed = 0.0;
        assert!(!clf.observe(&s).is_definite());
        assert!(!clf.observe(&s).is_definite());
        let c = clf.observe(&s);
        assert_eq!((c.verdict, c.reason), (Verdict::Vanishing, Rule::V1));
    }

    #[test]
    fn axis_values() {
        assert_eq!(Axis { lo: 1.0, hi: 2.0, n: 3 }.values(), vec![1.0, 1.5, 2.0]);
        assert_eq!(Axis { lo: 1.0, hi: 2.0, n: 1 }.values(), vec![1.0]);
    }

    #[test]
    fn flip_counting() {
        let mk = |gamma, resolved| Probe {
            gamma,
            verdict: resolved,
            reason: Rule::None,
            resolved,
            flagged: false,
            certified: false,
            final_width: 0.0,
            t_final: 0.0,
        };
        let ok = [mk(0.1, Verdict::Vanishing), mk(2.0, Verdict::Spreading), mk(1.0, Verdict::Spreading)];
        assert_eq!(count_flips(&ok), 1);
        let bad = [mk(0.1, Verdict::Vanishing), mk(0.5, Verdict::Spreading), mk(1.0, Verdict::Vanishing)];
        assert_eq!(count_flips(&bad), 2);
    }

    #[test]
    fn sweep_is_ordered_and_monotone_in_gamma() {
        let p = reference(0.4);
        let init = InitialData::cosine_default(&p, 0.1);
        let axes = SweepAxes {
            gamma: Some(Axis { lo: 0.5, hi: 8.0, n: 4 }),
            d: Some(Axis { lo: 0.1, hi: 1.0, n: 2 }),
            ..Default::default()
        };
        let rows = sweep(&p, &init, &axes, &StepperConfig::default()).unwrap();
        assert_eq!(rows.len(), 8);
        let d_cap = p.d_cap().unwrap();
        for r in &rows[..4] {
            // d = 0.1 <= D: forced spreading
            assert!(r.d <= d_cap);
            assert_eq!((r.verdict, r.source), (Some(Verdict::Spreading), VerdictSource::Analytic));
        }
        let simulated: Vec<Verdict> = rows[4..].iter().map(|r| r.verdict.unwrap()).collect();
        assert!(rows[4..].iter().all(|r| r.source == VerdictSource::Simulated));
        assert_eq!(simulated.first(), Some(&Verdict::Vanishing));
        assert_eq!(simulated.last(), Some(&Verdict::Spreading));
        assert_eq!(simulated.windows(2).filter(|w| w[0] != w[1]).count(), 1);
        assert!(rows.windows(2).all(|w| (w[0].d, w[0].gamma) < (w[1].d, w[1].gamma)));

        let sub = ModelParams { k: 0.4, ..p };
        let rows = sweep(&sub, &init, &SweepAxes::default(), &StepperConfig::default()).unwrap();
        assert_eq!((rows[0].verdict, rows[0].source), (Some(Verdict::Vanishing), VerdictSource::Analytic));
    }

    #[test]
    fn search_rejects_bad_brackets() {
        let p = reference(0.4);
        let init = InitialData::cosine_default(&p, 0.1);
        let cfg = StepperConfig::default();
        assert!(matches!(threshold_search(&p, &init, &cfg, 2.0, 1.0, 0.05), Err(Error::BracketInvalid(_))));
        // both endpoints vanish
        assert!(matches!(threshold_search(&p, &init, &cfg, 0.1, 0.2, 0.05), Err(Error::BracketInvalid(_))));
        let wide = reference(1.0);
        assert!(matches!(threshold_search(&wide, &init, &cfg, 0.1, 8.0, 0.05), Err(Error::PreconditionViolated(_))));
    }
}
