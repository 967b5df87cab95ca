use proptest::prelude::*;

use super::*;
use crate::error::Error;
use crate::model::{InitialData, ModelParams};

fn reference(h0: f64) -> ModelParams {
    ModelParams::new(1.0, 1.0, 1.0, 2.0, 1.0, 2.0, 1.0, 1.0, 1.0, h0).unwrap()
}

#[test]
fn initial_state_matches_data() {
    let p = reference(0.5);
    let init = InitialData::cosine(1.2, 0.3, 0.2);
    let s = initialize(&p, &init, &StepperConfig::default()).unwrap();
    assert_eq!((s.g, s.h, s.t), (-0.5, 0.5, 0.0));
    assert_eq!(s.z[0], 0.0);
    assert_eq!(s.z[s.n_y() - 1], 0.0);
    assert!((s.z[s.n_y() / 2] - 0.2).abs() < 1e-15);
    assert!((s.r[s.n_y() / 2] - 0.3).abs() < 1e-15);
    // h'(0) = −β w0'(h0) = β · 0.2 · π/(2 h0)
    let expect = 0.2 * std::f64::consts::PI / (2.0 * 0.5);
    assert!((s.h_speed - expect).abs() < 1e-14);
    assert!((s.g_speed + expect).abs() < 1e-14);
    assert_eq!(s.u_bound, 1.2);
    assert!(s.x_half_width() >= default_half_width(&p));
}

#[test]
fn invalid_inputs_are_rejected() {
    let p = reference(0.5);
    let init = InitialData::cosine(1.0, 0.1, 0.1);
    let even = StepperConfig { n_y: 256, ..Default::default() };
    assert!(matches!(initialize(&p, &init, &even), Err(Error::InvalidParameter(_))));
    let bad_cfl = StepperConfig { cfl_safety: 1.5, ..Default::default() };
    assert!(matches!(initialize(&p, &init, &bad_cfl), Err(Error::InvalidParameter(_))));
    let bad = InitialData::cosine(1.0, 0.1, -0.1);
    assert!(matches!(initialize(&p, &bad, &StepperConfig::default()), Err(Error::InvalidInitialData(_))));
}

#[test]
fn transform_coefficients() {
    let c = TransformCoeffs::new(-1.0, 3.0, -0.5, 1.5);
    assert_eq!(c.xi, 0.25);
    assert_eq!(c.zeta_at(0.0), 0.25);
    assert_eq!(c.zeta_at(1.0), 0.75);
    assert_eq!(c.zeta_max(), 0.75);
}

#[test]
fn front_speeds_from_exact_slopes() {
    let p = reference(1.0);
    // z = 1 − y² on [-1, 1] with g = −1, h = 1: w_x(±1) = ∓2, exact for the stencil
    let n = 65;
    let z: Vec<f64> = (0..n).map(|j| {
        let y = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
        1.0 - y * y
    }).collect();
    let (gs, hs) = front_speeds(&z, -1.0, 1.0, &p);
    assert!((gs + 2.0).abs() < 1e-12 && (hs - 2.0).abs() < 1e-12);
    // a receding slope is clamped to zero
    let flipped: Vec<f64> = z.iter().map(|v| -v).collect();
    assert_eq!(front_speeds(&flipped, -1.0, 1.0, &p), (0.0, 0.0));
}

#[test]
fn equal_coefficients_keep_symmetry() {
    let p = reference(0.6);
    let init = InitialData::cosine_default(&p, 0.3);
    let cfg = StepperConfig { t_end: 2.0, stop_on_decision: false, ..Default::default() };
    let out = run(&p, &init, &cfg).unwrap();
    let s = &out.final_state;
    assert!((s.g + s.h).abs() < 1e-12 * s.h);
    let n = s.n_y();
    for j in 0..n {
        assert!((s.z[j] - s.z[n - 1 - j]).abs() < 1e-12);
    }
    assert!(s.h > 0.6);
}

#[test]
fn step_until_lands_exactly() {
    let p = reference(0.5);
    let init = InitialData::cosine_default(&p, 0.1);
    let cfg = StepperConfig::default();
    let mut s = initialize(&p, &init, &cfg).unwrap();
    while s.t < 0.0123 {
        s = step_until(&s, &p, &cfg, 0.0123).unwrap();
    }
    assert_eq!(s.t, 0.0123);
    assert!(s.steps > 0);
}

#[test]
fn fronts_are_monotone_and_u_stays_bounded() {
    let p = ModelParams { mu: 2.0, beta: 0.5, ..reference(1.0) };
    let init = InitialData::cosine(1.3, 0.2, 0.4);
    let cfg = StepperConfig { t_end: 5.0, stop_on_decision: false, snapshot_every: 0.25, ..Default::default() };
    let out = run(&p, &init, &cfg).unwrap();
    for w in out.series.windows(2) {
        assert!(w[1].g <= w[0].g && w[1].h >= w[0].h);
    }
    let s = &out.final_state;
    assert!(s.u_vals.iter().all(|&u| u > 0.0 && u <= 1.3));
    // unequal coefficients: the left front moves further
    assert!(-s.g - 1.0 > s.h - 1.0);
    // far from the habitat u relaxes as θ/a + (u0 − θ/a) e^{−at}
    let far = s.u_vals[0];
    assert!((far - (1.0 + 0.3 * (-5.0f64).exp())).abs() < 1e-12);
}

#[test]
fn u_grid_grows_with_the_fronts() {
    let p = reference(1.0);
    let init = InitialData::cosine_default(&p, 0.1);
    let cfg = StepperConfig { t_end: 30.0, stop_on_decision: false, x_half_width: Some(3.0), ..Default::default() };
    let out = run(&p, &init, &cfg).unwrap();
    let s = &out.final_state;
    assert!(s.x_half_width() > s.h && -s.x_half_width() < s.g);
    assert!((s.u_grid()[0] + s.x_half_width()).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn short_runs_keep_invariants(
        amp in 0.01f64..1.0,
        h0 in 0.2f64..2.0,
        mu in 0.1f64..5.0,
        beta in 0.1f64..5.0,
        u0 in 0.5f64..2.0,
    ) {
        let p = ModelParams { mu, beta, ..reference(h0) };
        let init = InitialData::cosine(u0, amp, amp);
        let cfg = StepperConfig { t_end: 1.0, stop_on_decision: false, ..Default::default() };
        let out = run(&p, &init, &cfg).unwrap();
        let s = &out.final_state;
        prop_assert_eq!(s.t, 1.0);
        prop_assert!(s.g <= -h0 && s.h >= h0);
        prop_assert!(s.z.iter().chain(&s.r).all(|&v| v >= 0.0 && v.is_finite()));
        prop_assert!(s.z[0] == 0.0 && s.z[s.n_y() - 1] == 0.0);
        prop_assert!(s.u_vals.iter().all(|&u| u > 0.0 && u <= u0.max(1.0)));
        let rerun = run(&p, &init, &cfg).unwrap();
        prop_assert_eq!(&rerun.final_state, s);
    }
}
