use std::fs;
use std::path::Path;

use crate::classify::{Certificate, Classification, SweepRow, ThresholdBracket};
use crate::error::{Error, Result};
use crate::solver::{RunOutcome, SeriesRow, SimState};

use super::format::{num, CsvText, Json};

pub const PROFILE_HEADER: &str = "t,x,u,v,w";
pub const SERIES_HEADER: &str = "t,g,h,width,max_w,max_v,u_center";
pub const SWEEP_HEADER: &str = "h0,d,gamma,r0,lambda_cap,verdict,source";

/// Appends one snapshot: the moving nodes inside `[g, h]` with `u`
/// interpolated, and the fixed `u` nodes outside with `v`, `w` blank.
fn push_profile(csv: &mut CsvText, s: &SimState) {
    let t = num(s.t);
    let u_grid = s.u_grid();
    for (&x, &u) in u_grid.iter().zip(&s.u_vals).filter(|(&x, _)| x < s.g) {
        csv.row([t.as_str(), &num(x), &num(u), "", ""]);
    }
    for j in 0..s.n_y() {
        let x = s.x_at(j);
        csv.row([t.as_str(), &num(x), &num(s.u_at(x)), &num(s.r[j]), &num(s.z[j])]);
    }
    for (&x, &u) in u_grid.iter().zip(&s.u_vals).filter(|(&x, _)| x > s.h) {
        csv.row([t.as_str(), &num(x), &num(u), "", ""]);
    }
}

pub fn profiles_csv<'a>(snapshots: impl IntoIterator<Item = &'a SimState>) -> String {
    let mut csv = CsvText::new(PROFILE_HEADER);
    for s in snapshots {
        push_profile(&mut csv, s);
    }
    csv.into_string()
}

pub fn series_csv(rows: &[SeriesRow]) -> String {
    let mut csv = CsvText::new(SERIES_HEADER);
    for r in rows {
        csv.row([r.t, r.g, r.h, r.width, r.max_w, r.max_v, r.u_center].map(num));
    }
    csv.into_string()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut csv = CsvText::new(SWEEP_HEADER);
    for r in rows {
        let verdict = r.verdict.map_or("error", |v| v.as_str());
        let source = match r.source {
            crate::classify::VerdictSource::Analytic => "analytic",
            crate::classify::VerdictSource::Simulated => "simulated",
        };
        csv.row([
            num(r.h0),
            num(r.d),
            num(r.gamma),
            num(r.r0),
            r.lambda_cap.map_or(String::new(), num),
            verdict.to_string(),
            source.to_string(),
        ]);
    }
    csv.into_string()
}

pub fn classification_json(c: &Classification) -> Json {
    Json::obj([
        ("verdict", Json::from(c.verdict.as_str())),
        ("reason", Json::from(format!("{:?}", c.reason))),
        ("t_decided", Json::from(c.t_decided)),
    ])
}

pub fn certificate_json(c: &Certificate) -> Json {
    Json::obj([
        ("l", Json::from(c.l)),
        ("lambda1", Json::from(c.lambda1)),
        ("phi_t", Json::from(c.phi_t)),
        ("M", Json::from(c.m)),
        ("u_hat0", Json::from(c.u_hat0)),
        ("integral", Json::from(c.integral)),
        ("mu0", Json::from(c.mu0)),
    ])
}

pub fn bracket_json(b: &ThresholdBracket) -> Json {
    let probes = b
        .probes
        .iter()
        .map(|p| {
            Json::obj([
                ("gamma", Json::from(p.gamma)),
                ("verdict", Json::from(p.verdict.as_str())),
                ("reason", Json::from(format!("{:?}", p.reason))),
                ("resolved", Json::from(p.resolved.as_str())),
                ("flagged", Json::from(p.flagged)),
                ("certified", Json::from(p.certified)),
                ("final_width", Json::from(p.final_width)),
                ("t_final", Json::from(p.t_final)),
            ])
        })
        .collect();
    Json::obj([
        ("mu_lo", Json::from(b.mu_lo)),
        ("mu_hi", Json::from(b.mu_hi)),
        ("relative_width", Json::from(b.relative_width())),
        ("flips", Json::from(b.flips)),
        ("certificate_mu0", Json::from(b.certificate_mu0)),
        ("probes", Json::Arr(probes)),
    ])
}

/// Run summary with the fixed key set, plus optional certificate and
/// threshold bracket.
pub fn summary_json(out: &RunOutcome, certificate: Option<&Certificate>, bracket: Option<&ThresholdBracket>) -> Json {
    let d = &out.diagnostics;
    let mut pairs = vec![
        ("classification".to_string(), classification_json(&out.classification)),
        ("r0".into(), Json::from(d.r0)),
        ("lambda_cap".into(), Json::from(d.lambda_cap)),
        ("final_width".into(), Json::from(d.final_width)),
        ("t_final".into(), Json::from(out.final_state.t)),
        ("center_triple".into(), Json::from(d.center_triple)),
        ("equilibrium_triple".into(), d.equilibrium_triple.map_or(Json::Null, Json::from)),
        ("clip_count".into(), Json::from(d.clip_count)),
        ("d_cap".into(), Json::from(out.derived.d_cap)),
        ("width_over_lambda".into(), Json::from(d.width_over_lambda)),
        ("equilibrium_limit_expected".into(), Json::from(d.equilibrium_limit_expected)),
        ("steps".into(), Json::from(d.steps)),
        ("rejected_steps".into(), Json::from(d.rejected_steps)),
        ("final_front_speeds".into(), Json::from([d.final_front_speeds.0, d.final_front_speeds.1])),
    ];
    if let Some(c) = certificate {
        pairs.push(("certificate".into(), certificate_json(c)));
    }
    if let Some(b) = bracket {
        pairs.push(("threshold_bracket".into(), bracket_json(b)));
    }
    Json::Obj(pairs)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::Io(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
