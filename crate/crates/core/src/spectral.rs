//! Principal eigenvalue of the coupled constant-coefficient problem
//!
//! ```text
//! d φ'' + a11 φ + a12 ψ = λ φ,   l1 < x < l2
//!         a21 φ + a22 ψ = λ ψ,   l1 < x < l2
//! φ(l1) = φ(l2) = 0
//! ```
//!
//! with `a12, a21 > 0` and `a11, a22 < 0`. The principal eigenpair is known in
//! closed form: `φ` is the first Dirichlet cosine mode, `ψ` a positive
//! multiple of it, and
//! `λ1 = ½[ρ1 + a22 + sqrt((ρ1 − a22)² + 4 a12 a21)]` with
//! `ρ1 = a11 − dπ²/(l2 − l1)²`.
//!
//! [`eigen_oracle`] recomputes the same number from a finite-difference
//! discretization and is used to check the closed form.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// `|λ1|` below this is reported as "at threshold".
pub const THRESHOLD_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenProblem {
    pub d: f64,
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    pub l1: f64,
    pub l2: f64,
}

impl EigenProblem {
    pub fn new(d: f64, a11: f64, a12: f64, a21: f64, a22: f64, l1: f64, l2: f64) -> Result<Self> {
        let ep = EigenProblem { d, a11, a12, a21, a22, l1, l2 };
        ep.validate()?;
        Ok(ep)
    }

    /// Coefficients for the `(v, w)` linearization with `u` frozen at `m`:
    /// `a11 = −q`, `a12 = k`, `a21 = bm`, `a22 = −c`.
    pub fn for_model(m: f64, p: &ModelParams, l1: f64, l2: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidParameter("m must be positive".into()));
        }
        Self::new(p.d, -p.q, p.k, p.b * m, -p.c, l1, l2)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.d, self.a11, self.a12, self.a21, self.a22, self.l1, self.l2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("eigenproblem coefficients must be finite".into()));
        }
        if !(self.d > 0.0) {
            return Err(Error::InvalidParameter("d must be positive".into()));
        }
        if !(self.a12 > 0.0 && self.a21 > 0.0) {
            return Err(Error::InvalidParameter("a12 and a21 must be positive".into()));
        }
        if !(self.a11 < 0.0 && self.a22 < 0.0) {
            return Err(Error::InvalidParameter("a11 and a22 must be negative".into()));
        }
        if !(self.l2 > self.l1) {
            return Err(Error::InvalidParameter("interval must satisfy l1 < l2".into()));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.l2 - self.l1
    }

    /// `Γ = a11 − a12 a21 / a22`.
    pub fn gamma(&self) -> f64 {
        self.a11 - self.a12 * self.a21 / self.a22
    }
}

/// Closed-form descriptor of the positive eigenfunction
/// `φ(x) = cos(π(2x − l2 − l1)/(2(l2 − l1)))`, `ψ = psi_scale · φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CosineMode {
    pub l1: f64,
    pub l2: f64,
}

impl CosineMode {
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.l1 || x >= self.l2 {
            return 0.0;
        }
        (PI * (2.0 * x - self.l2 - self.l1) / (2.0 * (self.l2 - self.l1))).cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenResult {
    /// Principal Dirichlet eigenvalue of `dφ'' + a11 φ`.
    pub rho1: f64,
    /// Principal eigenvalue of the coupled problem.
    pub lambda1: f64,
    /// `Γ = a11 − a12 a21 / a22`.
    pub gamma_coeff: f64,
    pub phi: CosineMode,
    /// `ψ = psi_scale · φ`, `psi_scale = a21/(λ1 − a22) > 0`.
    pub psi_scale: f64,
}

impl EigenResult {
    pub fn psi(&self, x: f64) -> f64 {
        self.psi_scale * self.phi.eval(x)
    }

    pub fn at_threshold(&self) -> bool {
        self.lambda1.abs() < THRESHOLD_EPS
    }
}

pub fn principal_eigenvalue(ep: &EigenProblem) -> Result<EigenResult> {
    ep.validate()?;
    let len = ep.length();
    let rho1 = ep.a11 - ep.d * PI * PI / (len * len);
    let prod = ep.a12 * ep.a21;
    let diff = rho1 - ep.a22;
    let root = (diff * diff + 4.0 * prod).sqrt();
    // rho1 + a22 < 0, so the smaller root has no cancellation; recover the
    // larger one from the product of the roots.
    let lambda_minus = 0.5 * (rho1 + ep.a22 - root);
    let lambda1 = (rho1 * ep.a22 - prod) / lambda_minus;
    Ok(EigenResult {
        rho1,
        lambda1,
        gamma_coeff: ep.gamma(),
        phi: CosineMode { l1: ep.l1, l2: ep.l2 },
        psi_scale: ep.a21 / (lambda1 - ep.a22),
    })
}

pub fn eigen_for_model(m: f64, p: &ModelParams, l1: f64, l2: f64) -> Result<EigenResult> {
    principal_eigenvalue(&EigenProblem::for_model(m, p, l1, l2)?)
}

/// Critical values from the sign analysis of `λ1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub gamma: f64,
    /// Critical diffusion on the fixed interval; `None` when `Γ <= 0`.
    pub d_star: Option<f64>,
    /// Critical interval length at the fixed `d`; `None` when `Γ <= 0`.
    pub l_star: Option<f64>,
}

pub fn thresholds(ep: &EigenProblem) -> Result<Thresholds> {
    ep.validate()?;
    let gamma = ep.gamma();
    if gamma > 0.0 {
        let len = ep.length();
        Ok(Thresholds {
            gamma,
            d_star: Some(gamma * len * len / (PI * PI)),
            l_star: Some(PI * (ep.d / gamma).sqrt()),
        })
    } else {
        Ok(Thresholds { gamma, d_star: None, l_star: None })
    }
}

/// The positive constant `φ̃` relating the two components of the principal
/// eigenfunction on `(−l, l)` with `u` frozen at `θ/a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiTilde {
    pub phi_t: f64,
    pub lambda1: f64,
}

/// Requires `λ1 < 0` on `(−l, l)`, i.e. `2l < Λ`.
pub fn phi_tilde(p: &ModelParams, l: f64) -> Result<PhiTilde> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidParameter("l must be positive".into()));
    }
    let res = eigen_for_model(p.u_free(), p, -l, l)?;
    let lambda1 = res.lambda1;
    if lambda1 >= 0.0 {
        return Err(Error::PreconditionViolated(format!(
            "principal eigenvalue on (-{l}, {l}) is {lambda1} >= 0; need 2l < critical width"
        )));
    }
    let phi_t = (p.c + lambda1) * p.a / (p.b * p.theta);
    let kq = PI / (2.0 * l);
    let lhs = -p.d * kq * kq * phi_t - p.q * phi_t + p.k;
    let rhs = lambda1 * phi_t;
    if (lhs - rhs).abs() > 1e-10 * p.k.max(rhs.abs()) {
        return Err(Error::IterationFailure(format!(
            "eigen relation mismatch: {lhs} vs {rhs}"
        )));
    }
    Ok(PhiTilde { phi_t, lambda1 })
}

/// Rightmost eigenvalue of the 2×2 matrix `[[p, a12], [a21, a22]]`, found by
/// inverse iteration with a shift above the spectrum.
fn top_eigenvalue_2x2(p: f64, a12: f64, a21: f64, a22: f64) -> Result<f64> {
    // Gershgorin-type bound: every eigenvalue is below this.
    let shift = p.max(a22) + (a12 * a21).sqrt() + 1.0 + 1e-3 * (p.abs() + a22.abs());
    let (m11, m12, m21, m22) = (p - shift, a12, a21, a22 - shift);
    let det = m11 * m22 - m12 * m21;
    let mut x = [1.0, 1.0];
    let mut estimate = f64::NAN;
    for _ in 0..200_000 {
        let y = [(m22 * x[0] - m12 * x[1]) / det, (-m21 * x[0] + m11 * x[1]) / det];
        let num = x[0] * x[0] + x[1] * x[1];
        let den = x[0] * y[0] + x[1] * y[1];
        let next = shift + num / den;
        let norm = y[0].hypot(y[1]);
        x = [y[0] / norm, y[1] / norm];
        if (next - estimate).abs() <= 1e-14 * (shift.abs() + next.abs()) {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::IterationFailure("inverse iteration did not converge".into()))
}

/// Finite-difference oracle for the principal eigenvalue.
///
/// Discretizes `φ''` with second-order central differences on `n` interior
/// nodes. The resulting block operator is diagonalized by the discrete sine
/// modes, so the rightmost eigenvalue is the maximum over modes of the top
/// eigenvalue of a 2×2 block.
pub fn eigen_oracle(ep: &EigenProblem, n: usize) -> Result<f64> {
    ep.validate()?;
    if n < 16 {
        return Err(Error::InvalidParameter("oracle grid needs n >= 16".into()));
    }
    let h = ep.length() / (n as f64 + 1.0);
    let mut best = f64::NEG_INFINITY;
    for j in 1..=n {
        let s = (j as f64 * PI / (2.0 * (n as f64 + 1.0))).sin();
        let mode = -4.0 * s * s / (h * h);
        let top = top_eigenvalue_2x2(ep.d * mode + ep.a11, ep.a12, ep.a21, ep.a22)?;
        best = best.max(top);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference() -> ModelParams {
        ModelParams::new(1.0, 1.0, 1.0, 2.0, 1.0, 2.0, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn closed_form_example() {
        let ep = EigenProblem::new(1.0, -1.0, 2.0, 2.0, -1.0, -2.0, 2.0).unwrap();
        let r = principal_eigenvalue(&ep).unwrap();
        assert!((r.rho1 - (-1.0 - PI * PI / 16.0)).abs() < 1e-15);
        assert!((r.rho1 + 1.6169).abs() < 1e-4);
        assert!((r.lambda1 - 0.7152).abs() < 1e-4);
        assert!(r.rho1 - ep.a12 * ep.a21 / ep.a22 > 0.0);
        assert!(r.phi.eval(0.0) > 0.99 && r.psi(0.5) > 0.0);
        let th = thresholds(&ep).unwrap();
        assert_eq!(th.gamma, 3.0);
        assert!((th.l_star.unwrap() - PI / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_limits() {
        let ep = EigenProblem::new(1.0, -1.0, 1e-9, 1e-9, -3.0, 0.0, 1.0).unwrap();
        let r = principal_eigenvalue(&ep).unwrap();
        assert!((r.lambda1 - r.rho1.max(ep.a22)).abs() < 1e-12);
        // rho1 == a22
        let len: f64 = 2.0;
        let a22 = -1.0 - PI * PI / (len * len);
        let ep = EigenProblem::new(1.0, -1.0, 0.5, 2.0, a22, 0.0, len).unwrap();
        let r = principal_eigenvalue(&ep).unwrap();
        assert!((r.lambda1 - (a22 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn model_mapping_examples() {
        let p = reference();
        let r = eigen_for_model(1.0, &p, -0.8, 0.8).unwrap();
        assert!((r.rho1 - (-1.0 - PI * PI / 2.56)).abs() < 1e-14);
        assert!((r.lambda1 + 0.1499).abs() < 1e-4);

        let ep = EigenProblem::for_model(p.u_free(), &p, 0.0, 1.0).unwrap();
        let th = thresholds(&ep).unwrap();
        assert_eq!(th.gamma > 0.0, p.r0() > 1.0);
        assert!((th.l_star.unwrap() - p.lambda_cap().unwrap()).abs() < 1e-14);

        let l_star = th.l_star.unwrap();
        let at = eigen_for_model(p.u_free(), &p, 0.0, l_star).unwrap();
        assert!(at.lambda1.abs() < 1e-10 && at.at_threshold());
    }

    #[test]
    fn nonpositive_gamma_has_no_thresholds() {
        // Γ = a11 − a12 a21/a22 = −1 + 1 = 0
        let ep = EigenProblem::new(0.01, -1.0, 1.0, 1.0, -1.0, 0.0, 100.0).unwrap();
        let th = thresholds(&ep).unwrap();
        assert!(th.d_star.is_none() && th.l_star.is_none());
        assert!(principal_eigenvalue(&ep).unwrap().lambda1 < 0.0);
    }

    #[test]
    fn phi_tilde_reference() {
        let p = reference();
        let pt = phi_tilde(&p, 0.8).unwrap();
        assert!((pt.lambda1 + 0.1499).abs() < 1e-4);
        assert!((pt.phi_t - 0.4251).abs() < 1e-4);
        // second relation
        assert!((p.b * p.theta / p.a * pt.phi_t - p.c - pt.lambda1).abs() < 1e-14);
        let lam = p.lambda_cap().unwrap();
        assert!(matches!(phi_tilde(&p, lam / 2.0 + 1e-9), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn oracle_reproduces_example() {
        let ep = EigenProblem::new(1.0, -1.0, 2.0, 2.0, -1.0, -2.0, 2.0).unwrap();
        let exact = principal_eigenvalue(&ep).unwrap().lambda1;
        let o = eigen_oracle(&ep, 2000).unwrap();
        assert!((o - exact).abs() < 1e-4);
        assert!(eigen_oracle(&ep, 8).is_err());
    }

    #[test]
    fn oracle_degenerate_coupling() {
        let ep = EigenProblem::new(1.0, -0.5, 1e-10, 1e-10, -2.0, 0.0, 3.0).unwrap();
        let n = 200;
        let h = 3.0 / (n as f64 + 1.0);
        let s = (PI / (2.0 * (n as f64 + 1.0))).sin();
        let rho_disc = -0.5 - 4.0 * s * s / (h * h);
        let o = eigen_oracle(&ep, n).unwrap();
        assert!((o - rho_disc.max(-2.0)).abs() < 1e-9);
    }

    fn arb_problem() -> impl Strategy<Value = EigenProblem> {
        (0.05f64..5.0, -5.0f64..-0.01, 0.01f64..5.0, 0.01f64..5.0, -5.0f64..-0.01, 0.1f64..10.0)
            .prop_map(|(d, a11, a12, a21, a22, len)| EigenProblem {
                d,
                a11,
                a12,
                a21,
                a22,
                l1: -0.5 * len,
                l2: 0.5 * len,
            })
    }

    proptest! {
        #[test]
        fn fixed_point_identity_and_sign(ep in arb_problem()) {
            let r = principal_eigenvalue(&ep).unwrap();
            prop_assert!(r.lambda1 > ep.a22);
            let back = r.lambda1 - ep.a12 * ep.a21 / (r.lambda1 - ep.a22);
            prop_assert!((back - r.rho1).abs() <= 1e-12 * r.rho1.abs().max(1.0));
            let s = r.rho1 - ep.a12 * ep.a21 / ep.a22;
            if s.abs() > 1e-9 {
                prop_assert_eq!(r.lambda1 > 0.0, s > 0.0);
            }
            prop_assert!(r.psi_scale > 0.0);
        }

        #[test]
        fn monotone_in_length_and_diffusion(ep in arb_problem(), grow in 1.01f64..3.0) {
            let base = principal_eigenvalue(&ep).unwrap().lambda1;
            let wider = EigenProblem { l2: ep.l1 + ep.length() * grow, ..ep };
            prop_assert!(principal_eigenvalue(&wider).unwrap().lambda1 > base);
            let stiffer = EigenProblem { d: ep.d * grow, ..ep };
            prop_assert!(principal_eigenvalue(&stiffer).unwrap().lambda1 < base);
        }

        #[test]
        fn sign_matches_threshold_analysis(ep in arb_problem()) {
            let th = thresholds(&ep).unwrap();
            let lam = principal_eigenvalue(&ep).unwrap().lambda1;
            match th.l_star {
                None => prop_assert!(lam < 0.0),
                Some(ls) => {
                    let len = ep.length();
                    if (len - ls).abs() > 1e-9 * ls {
                        prop_assert_eq!(lam > 0.0, len > ls);
                    }
                    let ds = th.d_star.unwrap();
                    if (ep.d - ds).abs() > 1e-9 * ds {
                        prop_assert_eq!(lam > 0.0, ep.d < ds);
                    }
                }
            }
        }
    }
}
