use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::classify::{optimal_certificate, sweep, threshold_search, vanishing_certificate, Axis, SweepAxes};
use crate::error::{Error, Result};
use crate::model::{equilibrium_full, ode_baseline, w_hat};
use crate::solver::{run, StepperConfig};
use crate::spectral::{eigen_for_model, thresholds, EigenProblem};
use crate::steady::{solve_bvp_with_boundary_value, solve_dirichlet_bvp, BvpOutcome, BvpSolution};

use super::config::{parse_config, Format, RunConfig};
use super::format::{num, CsvText, Json};
use super::output::{
    bracket_json, certificate_json, profiles_csv, series_csv, summary_json, sweep_csv, write_file,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "viralfb", version, about = "Viral propagation with two free boundaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the free-boundary simulation and write series, profiles and summary.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `outputs.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Principal eigenvalue of the linearized problem on (-l, l).
    Eigen {
        #[arg(long)]
        config: PathBuf,
        /// Frozen uninfected-cell level; defaults to theta/a.
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        l: f64,
    },
    /// Positive steady state on (-l, l), Dirichlet or with w(±l) = boundary.
    Steady {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        l: f64,
        #[arg(long)]
        boundary: Option<f64>,
        /// Grid nodes including both ends.
        #[arg(long, default_value_t = 401)]
        n: usize,
        /// Write the profile as CSV `x,v,w`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// R0, critical width, critical diffusion and the positive equilibrium.
    Thresholds {
        #[arg(long)]
        config: PathBuf,
    },
    /// Explicit vanishing bound mu0; `--l` absent picks the maximizing l.
    Certificate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        l: Option<f64>,
    },
    /// Verdict table over h0, d and gamma ranges (`--axis name=LO:HI:N`).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "axis", value_parser = parse_axis)]
        axes: Vec<(String, Axis)>,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bisection on gamma = max(mu, beta) for the sharp threshold.
    ThresholdSearch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 0.05)]
        rtol: f64,
        /// Also write the result to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spatially homogeneous bilinear ODE from the initial values at x = 0.
    OdeBaseline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_axis(s: &str) -> std::result::Result<(String, Axis), String> {
    let (name, range) = s.split_once('=').ok_or("expected name=LO:HI:N")?;
    if !matches!(name, "h0" | "d" | "gamma") {
        return Err(format!("unknown axis `{name}` (expected h0, d or gamma)"));
    }
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err("expected name=LO:HI:N".into());
    }
    let lo: f64 = parts[0].parse().map_err(|_| format!("bad LO `{}`", parts[0]))?;
    let hi: f64 = parts[1].parse().map_err(|_| format!("bad HI `{}`", parts[1]))?;
    let n: usize = parts[2].parse().map_err(|_| format!("bad N `{}`", parts[2]))?;
    if !(lo.is_finite() && hi.is_finite()) || n == 0 {
        return Err("axis needs finite bounds and N >= 1".into());
    }
    Ok((name.to_string(), Axis { lo, hi, n }))
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit status.
pub fn dispatch<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.exit_code() == 0 {
                let _ = write!(stdout, "{text}");
                return EXIT_OK;
            }
            let _ = write!(stderr, "{text}");
            let obj = Json::obj([(
                "error",
                Json::obj([
                    ("kind", Json::from("usage")),
                    ("message", Json::from(e.kind().to_string())),
                    ("exit_code", Json::Int(EXIT_VALIDATION as i64)),
                ]),
            )]);
            let _ = writeln!(stderr, "{}", obj.render_compact());
            return EXIT_VALIDATION;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let code = if e.is_validation() { EXIT_VALIDATION } else { EXIT_NUMERICAL };
            let _ = writeln!(stderr, "error: {e}");
            let obj = Json::obj([(
                "error",
                Json::obj([
                    ("kind", Json::from(e.kind())),
                    ("message", Json::from(e.to_string())),
                    ("exit_code", Json::Int(code as i64)),
                ]),
            )]);
            let _ = writeln!(stderr, "{}", obj.render_compact());
            code
        }
    }
}

fn out_err(e: std::io::Error) -> Error {
    Error::Io(format!("stdout: {e}"))
}

fn execute(cmd: Command, stdout: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Simulate { config, out } => {
            let cfg = parse_config(&config)?;
            let dir = out.unwrap_or_else(|| cfg.outputs.dir.clone());
            simulate(&cfg, &dir, stdout)
        }
        Command::Eigen { config, m, l } => {
            let cfg = parse_config(&config)?;
            let p = &cfg.model;
            let m = m.unwrap_or(p.u_free());
            let res = eigen_for_model(m, p, -l, l)?;
            let th = thresholds(&EigenProblem::for_model(m, p, -l, l)?)?;
            let j = Json::obj([
                ("m", Json::from(m)),
                ("l", Json::from(l)),
                ("rho1", Json::from(res.rho1)),
                ("lambda1", Json::from(res.lambda1)),
                ("gamma_coeff", Json::from(res.gamma_coeff)),
                ("psi_scale", Json::from(res.psi_scale)),
                ("d_star", Json::from(th.d_star)),
                ("l_star", Json::from(th.l_star)),
            ]);
            write!(stdout, "{}", j.render()).map_err(out_err)
        }
        Command::Steady { config, m, l, boundary, n, out } => {
            let cfg = parse_config(&config)?;
            let p = &cfg.model;
            let m = m.unwrap_or(p.u_free());
            let w_top = w_hat(m, p).ok().map(|(_, w)| w);
            let (sol, lambda1): (Option<BvpSolution>, Option<f64>) = match boundary {
                Some(k) => (Some(solve_bvp_with_boundary_value(m, p, l, k, n)?), None),
                None => match solve_dirichlet_bvp(m, p, l, n)? {
                    BvpOutcome::Solution(s) => (Some(s), None),
                    BvpOutcome::NoPositiveSolution { lambda1 } => (None, Some(lambda1)),
                },
            };
            let lambda1 = lambda1.unwrap_or(eigen_for_model(m, p, -l, l)?.lambda1);
            let mut pairs = vec![
                ("m".to_string(), Json::from(m)),
                ("l".into(), Json::from(l)),
                ("lambda1".into(), Json::from(lambda1)),
                ("w_hat".into(), Json::from(w_top)),
            ];
            match &sol {
                Some(s) => {
                    pairs.extend([
                        ("outcome".to_string(), Json::from("solution")),
                        ("center_w".into(), Json::from(s.center_w())),
                        ("max_w".into(), Json::from(s.max_w())),
                        ("converged".into(), Json::from(s.converged)),
                        ("iterations".into(), Json::from(s.iterations)),
                        ("monotone".into(), Json::from(s.monotone)),
                        ("residual".into(), Json::from(s.residual)),
                        ("diagnostic".into(), s.diagnostic.clone().map_or(Json::Null, Json::from)),
                    ]);
                    if let Some(path) = &out {
                        let mut csv = CsvText::new("x,v,w");
                        for i in 0..s.grid.len() {
                            csv.row([num(s.grid[i]), num(s.v_vals[i]), num(s.w_vals[i])]);
                        }
                        write_file(path, &csv.into_string())?;
                    }
                }
                None => pairs.push(("outcome".to_string(), Json::from("no_positive_solution"))),
            }
            write!(stdout, "{}", Json::Obj(pairs).render()).map_err(out_err)
        }
        Command::Thresholds { config } => {
            let cfg = parse_config(&config)?;
            let p = &cfg.model;
            let th = thresholds(&EigenProblem::for_model(p.u_free(), p, -p.h0, p.h0)?)?;
            let eq = equilibrium_full(p).ok().map(|e| e.as_array());
            let j = Json::obj([
                ("r0", Json::from(p.r0())),
                ("lambda_cap", Json::from(p.lambda_cap())),
                ("d_cap", Json::from(p.d_cap())),
                ("u_free", Json::from(p.u_free())),
                ("initially_supercritical", Json::from(p.lambda_cap().is_some_and(|l| 2.0 * p.h0 >= l))),
                ("gamma_coeff", Json::from(th.gamma)),
                ("equilibrium_triple", eq.map_or(Json::Null, Json::from)),
                ("w_hat", Json::from(w_hat(p.u_free(), p).ok().map(|(_, w)| w))),
            ]);
            write!(stdout, "{}", j.render()).map_err(out_err)
        }
        Command::Certificate { config, l } => {
            let cfg = parse_config(&config)?;
            let c = match l {
                Some(l) => vanishing_certificate(&cfg.model, &cfg.data, l)?,
                None => optimal_certificate(&cfg.model, &cfg.data)?,
            };
            let j = Json::obj([("certificate", certificate_json(&c))]);
            write!(stdout, "{}", j.render()).map_err(out_err)
        }
        Command::Sweep { config, axes, out } => {
            let cfg = parse_config(&config)?;
            let mut sa = SweepAxes::default();
            for (name, axis) in axes {
                let slot = match name.as_str() {
                    "h0" => &mut sa.h0,
                    "d" => &mut sa.d,
                    _ => &mut sa.gamma,
                };
                if slot.replace(axis).is_some() {
                    return Err(Error::Config(format!("axis `{name}` given twice")));
                }
            }
            let rows = sweep(&cfg.model, &cfg.data, &sa, &cfg.stepper)?;
            let text = sweep_csv(&rows);
            match out {
                Some(path) => {
                    write_file(&path, &text)?;
                    writeln!(stdout, "sweep: {} cells written to {}", rows.len(), path.display()).map_err(out_err)
                }
                None => write!(stdout, "{text}").map_err(out_err),
            }
        }
        Command::ThresholdSearch { config, lo, hi, rtol, out } => {
            let cfg = parse_config(&config)?;
            let b = threshold_search(&cfg.model, &cfg.data, &cfg.stepper, lo, hi, rtol)?;
            let cert = optimal_certificate(&cfg.model, &cfg.data).ok();
            let j = Json::obj([
                ("r0", Json::from(cfg.model.r0())),
                ("lambda_cap", Json::from(cfg.model.lambda_cap())),
                ("certificate", cert.as_ref().map_or(Json::Null, certificate_json)),
                ("threshold_bracket", bracket_json(&b)),
            ]);
            let text = j.render();
            if let Some(path) = out {
                write_file(&path, &text)?;
            }
            write!(stdout, "{text}").map_err(out_err)
        }
        Command::OdeBaseline { config, t_end, dt, out } => {
            let cfg = parse_config(&config)?;
            let d = &cfg.data;
            let start = [d.u0.eval(0.0), d.v0.eval(0.0, cfg.model.h0), d.w0.eval(0.0, cfg.model.h0)];
            let traj = ode_baseline(&cfg.model, start, t_end, dt)?;
            let mut csv = CsvText::new("t,u,v,w");
            for (t, s) in traj.times.iter().zip(&traj.states) {
                csv.row([num(*t), num(s[0]), num(s[1]), num(s[2])]);
            }
            let text = csv.into_string();
            match out {
                Some(path) => {
                    write_file(&path, &text)?;
                    let last = traj.last();
                    writeln!(
                        stdout,
                        "ode-baseline: t={} u={} v={} w={}",
                        num(t_end),
                        num(last[0]),
                        num(last[1]),
                        num(last[2])
                    )
                    .map_err(out_err)
                }
                None => write!(stdout, "{text}").map_err(out_err),
            }
        }
    }
}

/// Runs the simulation described by `cfg` and writes every requested
/// output under `dir`.
pub fn simulate(cfg: &RunConfig, dir: &Path, stdout: &mut dyn Write) -> Result<()> {
    let stride = cfg.profile_stride();
    let stepper = StepperConfig { record_profiles: stride.is_some(), ..cfg.stepper.clone() };
    let out = run(&cfg.model, &cfg.data, &stepper)?;
    let mut effective = cfg.clone();
    effective.outputs.dir = dir.to_path_buf();
    write_file(&dir.join("effective_config.json"), &effective.effective_json())?;
    if cfg.outputs.formats.contains(&Format::Csv) {
        write_file(&dir.join("series.csv"), &series_csv(&out.series))?;
        if let Some(stride) = stride {
            let last = out.snapshots.len().saturating_sub(1);
            let picked = out.snapshots.iter().enumerate().filter(|(i, _)| i % stride == 0 || *i == last).map(|(_, s)| s);
            write_file(&dir.join("profiles.csv"), &profiles_csv(picked))?;
        }
    }
    if cfg.outputs.formats.contains(&Format::Json) {
        let cert = optimal_certificate(&cfg.model, &cfg.data).ok();
        write_file(&dir.join("summary.json"), &summary_json(&out, cert.as_ref(), None).render())?;
    }
    let c = out.classification;
    writeln!(
        stdout,
        "simulate: verdict={} reason={:?} t_decided={} t_final={} r0={} final_width={} out={}",
        c.verdict.as_str(),
        c.reason,
        num(c.t_decided),
        num(out.final_state.t),
        num(out.diagnostics.r0),
        num(out.diagnostics.final_width),
        dir.display()
    )
    .map_err(out_err)
}
