//! Command implementations behind the `ftflow` binary: single runs, sweeps
//! over initial-condition magnitudes, seeded figure reproduction, and the
//! verification suite.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::acceptance;
use crate::config::parse_config;
use crate::error::{FtError, Result};
use crate::experiments::{
    certified_thm2_bound, certify_constants, gen_fused_lasso, gen_qp, run_sweep,
    CertifiedConstants, ExperimentConfig, ProblemKind, SweepSpec,
};
use crate::field::VectorField;
use crate::flows::{genlag_field, pal_field};
use crate::integrator::{
    integrate, IntegrateOptions, RecordStride, SettleStop, Trajectory,
};
use crate::linalg::{dist, norm};
use crate::output::{
    error_plot_svg, fnv1a_hex, write_sweep_csv, write_trajectory_csv, PlotSeries, RunManifest,
};
use crate::reference::{solve_fused_lasso, solve_qp, DEFAULT_TOL};
use crate::scaling::{thm1_bound, LyapunovConstants, ScalingParams};

/// Which figure-style experiment `reproduce` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Composite (fused-lasso) primal-dual flow, full-scale instance.
    Fig3a,
    /// Constrained-QP primal-dual flow, desk-scale rank-feasible instance.
    Fig3b,
}

impl std::str::FromStr for Figure {
    type Err = FtError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig3a" => Ok(Figure::Fig3a),
            "fig3b" => Ok(Figure::Fig3b),
            other => Err(FtError::Config(format!(
                "unknown figure `{other}`; expected fig3a or fig3b"
            ))),
        }
    }
}

/// A base flow with its known equilibrium, built from a configuration.
pub struct ProblemSetup {
    pub field: VectorField<f64>,
    pub equilibrium: Vec<f64>,
}

fn neg_identity(dim: usize) -> VectorField<f64> {
    VectorField::new(dim, |x: &[f64], out: &mut [f64]| {
        for (o, &xi) in out.iter_mut().zip(x) {
            *o = -xi;
        }
    })
}

/// Builds the configured flow and solves for its equilibrium with the
/// reference solver.
pub fn build_problem(cfg: &ExperimentConfig) -> Result<ProblemSetup> {
    match cfg.problem {
        ProblemKind::Scalar => Ok(ProblemSetup {
            field: neg_identity(cfg.n.max(1)),
            equilibrium: vec![0.0; cfg.n.max(1)],
        }),
        ProblemKind::FusedLasso => {
            if cfg.n == 0 || cfg.n % 10 != 0 {
                return Err(FtError::InvalidParameter(format!(
                    "n must be a positive multiple of the block length 10, got {}",
                    cfg.n
                )));
            }
            let exp = gen_fused_lasso(cfg.seed, cfg.n, 10, cfg.mu)?;
            let sol = solve_fused_lasso(&exp.data, DEFAULT_TOL)?;
            let mut z_star = sol.x_star;
            z_star.extend_from_slice(&sol.y_star);
            Ok(ProblemSetup { field: pal_field(&exp.problem), equilibrium: z_star })
        }
        ProblemKind::Qp => {
            let (d_eq, d_ineq) = if cfg.d == 0 { (3, 5) } else { (cfg.d, cfg.d) };
            let exp = gen_qp(cfg.seed, d_eq, d_ineq, cfg.n, cfg.mu)?;
            let sol = solve_qp(&exp.data, DEFAULT_TOL)?;
            let mut z_star = sol.x_star;
            z_star.extend_from_slice(&sol.ineq_multipliers);
            z_star.extend_from_slice(&sol.eq_multipliers);
            Ok(ProblemSetup { field: genlag_field(&exp.problem), equilibrium: z_star })
        }
    }
}

/// Maps an error to the process exit code: 2 for configuration problems,
/// 1 for runtime failures.
pub fn exit_code(err: &FtError) -> i32 {
    match err {
        FtError::Config(_) | FtError::InvalidParameter(_) => 2,
        _ => 1,
    }
}

fn read_config(path: &Path) -> Result<(String, ExperimentConfig)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| FtError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let cfg = parse_config(&text)?;
    Ok((text, cfg))
}

fn versions() -> String {
    format!("ftflow {}", env!("CARGO_PKG_VERSION"))
}

fn finish_manifest(
    out_dir: &Path,
    command: String,
    config_digest: String,
    mut outputs: Vec<String>,
    started: Instant,
) -> Result<RunManifest> {
    outputs.push("manifest.txt".to_string());
    let manifest = RunManifest {
        command,
        config_digest,
        outputs,
        wall_time_s: started.elapsed().as_secs_f64(),
        versions: versions(),
    };
    manifest.write(&out_dir.join("manifest.txt"))?;
    Ok(manifest)
}

/// `ftflow run`: one trajectory per configured magnitude, written as
/// trajectory_<i>.csv.
pub fn cmd_run(config_path: &Path, out_dir: &Path) -> Result<RunManifest> {
    let started = Instant::now();
    let (text, cfg) = read_config(config_path)?;
    let setup = build_problem(&cfg)?;
    std::fs::create_dir_all(out_dir)?;

    let res = run_sweep(&SweepSpec {
        field: &setup.field,
        equilibrium: &setup.equilibrium,
        scaling: cfg.scaling,
        magnitudes: &cfg.magnitudes,
        settle_delta: cfg.settle_delta,
        opts: cfg.integrator.clone(),
        seed: cfg.seed,
        bound_for_magnitude: None,
        keep_trajectories: true,
    })?;

    let mut outputs = Vec::new();
    let mut failed = Vec::new();
    for (i, traj) in res.trajectories.iter().enumerate() {
        match traj {
            Some(t) => {
                let name = format!("trajectory_{i}.csv");
                write_trajectory_csv(&out_dir.join(&name), t, &setup.equilibrium)?;
                outputs.push(name);
            }
            None => failed.push(cfg.magnitudes[i]),
        }
    }
    let manifest = finish_manifest(
        out_dir,
        format!("run --config {}", config_path.display()),
        fnv1a_hex(text.as_bytes()),
        outputs,
        started,
    )?;
    if !failed.is_empty() {
        return Err(FtError::Degenerate(format!(
            "integration failed for magnitudes {failed:?}; completed rows were written"
        )));
    }
    Ok(manifest)
}

/// Estimates the stability constants for a configured problem so settling
/// bounds can be attached to sweep rows; `None` when estimation fails.
fn certify_for_config(setup: &ProblemSetup, cfg: &ExperimentConfig) -> Option<CertifiedConstants> {
    let dim = setup.field.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut u: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    let un = norm(&u).max(1e-300);
    for v in u.iter_mut() {
        *v /= un;
    }
    let z0: Vec<f64> = setup.equilibrium.iter().zip(&u).map(|(&z, &ui)| z + ui).collect();
    let opts = IntegrateOptions {
        t_max: cfg.integrator.t_max.max(100.0) * 20.0,
        stop_field_norm: 0.0,
        record_stride: RecordStride::Every(4),
        settle_stop: Some(SettleStop {
            target: setup.equilibrium.clone(),
            radius: 1e-6 * norm(&setup.equilibrium).max(1.0),
        }),
        ..Default::default()
    };
    let traj = integrate(&setup.field, &z0, &opts).ok()?;
    let radius = 10.0 * cfg.magnitudes.iter().cloned().fold(1.0, f64::max);
    certify_constants(
        &setup.field,
        &setup.equilibrium,
        radius,
        cfg.seed.wrapping_add(7),
        2000,
        &traj,
        0.3 * traj.final_time(),
    )
    .ok()
}

/// `ftflow sweep`: settling time versus magnitude, written as sweep.csv
/// with bound overlays from certified constants where available.
pub fn cmd_sweep(config_path: &Path, out_dir: &Path) -> Result<RunManifest> {
    let started = Instant::now();
    let (text, cfg) = read_config(config_path)?;
    let setup = build_problem(&cfg)?;
    std::fs::create_dir_all(out_dir)?;

    let cc = match cfg.scaling {
        ScalingParams::None => None,
        _ => certify_for_config(&setup, &cfg),
    };
    let bound_fn: Option<Box<dyn Fn(f64) -> Option<f64>>> = match (cfg.scaling, cc) {
        (ScalingParams::Finite { eta, lambda }, Some(cc)) => Some(Box::new(move |s: f64| {
            let k =
                LyapunovConstants::new(1.0, 1.0, 2.0 * cc.rho_hat, cc.l_hat, cc.m_hat, cc.beta_hat)
                    .ok()?;
            thm1_bound(&k, eta, lambda, s).ok().map(|b| b.value)
        })),
        (ScalingParams::Fixed { eta1, eta2, lambda1, lambda2 }, Some(cc)) => {
            let value = certified_thm2_bound(&cc, eta1, eta2, lambda1, lambda2)
                .ok()
                .map(|b| b.value);
            Some(Box::new(move |_s: f64| value))
        }
        _ => None,
    };

    let res = run_sweep(&SweepSpec {
        field: &setup.field,
        equilibrium: &setup.equilibrium,
        scaling: cfg.scaling,
        magnitudes: &cfg.magnitudes,
        settle_delta: cfg.settle_delta,
        opts: cfg.integrator.clone(),
        seed: cfg.seed,
        bound_for_magnitude: bound_fn.as_deref(),
        keep_trajectories: false,
    })?;
    write_sweep_csv(&out_dir.join("sweep.csv"), &res)?;

    finish_manifest(
        out_dir,
        format!("sweep --config {}", config_path.display()),
        fnv1a_hex(text.as_bytes()),
        vec!["sweep.csv".to_string()],
        started,
    )
}

/// Deterministic short label for a magnitude, e.g. 100 -> "1e2".
fn magnitude_label(s: f64) -> String {
    format!("{s:e}").replace(['.', '-'], "_")
}

fn error_series(traj: &Trajectory<f64>, equilibrium: &[f64], label: &str, dashed: bool) -> PlotSeries {
    let scale = norm(equilibrium).max(1.0);
    PlotSeries {
        label: label.to_string(),
        points: traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(&t, s)| (t, dist(s, equilibrium) / scale))
            .collect(),
        dashed,
    }
}

/// `ftflow reproduce`: unscaled (solid analog) and fixed-time-scaled
/// (dashed analog) error curves over three initial-condition decades, as
/// CSVs plus a log-error SVG plot.
pub fn cmd_reproduce(figure: Figure, out_dir: &Path, seed: u64) -> Result<RunManifest> {
    let started = Instant::now();
    std::fs::create_dir_all(out_dir)?;
    let magnitudes = [1.0, 1e2, 1e4];
    let scaling = ScalingParams::Fixed { eta1: 10.0, eta2: 1.0, lambda1: 0.5, lambda2: 3.0 };

    let (label, setup, dual_slice) = match figure {
        Figure::Fig3a => {
            let exp = gen_fused_lasso(seed, 100, 10, 1.0)?;
            let sol = solve_fused_lasso(&exp.data, DEFAULT_TOL)?;
            let mut z_star = sol.x_star;
            z_star.extend_from_slice(&sol.y_star);
            ("fig3a", ProblemSetup { field: pal_field(&exp.problem), equilibrium: z_star }, None)
        }
        Figure::Fig3b => {
            let exp = gen_qp(seed, 3, 5, 20, 1.0)?;
            let sol = solve_qp(&exp.data, DEFAULT_TOL)?;
            let n = exp.problem.primal_dim();
            let di = exp.problem.ineq_count();
            let mut z_star = sol.x_star;
            z_star.extend_from_slice(&sol.ineq_multipliers);
            z_star.extend_from_slice(&sol.eq_multipliers);
            (
                "fig3b",
                ProblemSetup { field: genlag_field(&exp.problem), equilibrium: z_star },
                Some((n, di)),
            )
        }
    };

    let uopts = IntegrateOptions {
        t_max: 20.0,
        stop_field_norm: 0.0,
        record_stride: RecordStride::Every(2),
        ..Default::default()
    };
    let unscaled = run_sweep(&SweepSpec {
        field: &setup.field,
        equilibrium: &setup.equilibrium,
        scaling: ScalingParams::None,
        magnitudes: &magnitudes,
        settle_delta: 1e-9,
        opts: uopts,
        seed,
        bound_for_magnitude: None,
        keep_trajectories: true,
    })?;
    let sopts = IntegrateOptions {
        t_max: 20.0,
        stop_field_norm: 0.0,
        record_stride: RecordStride::Every(2),
        ..Default::default()
    };
    let scaled = run_sweep(&SweepSpec {
        field: &setup.field,
        equilibrium: &setup.equilibrium,
        scaling,
        magnitudes: &magnitudes,
        settle_delta: 1e-6,
        opts: sopts,
        seed,
        bound_for_magnitude: None,
        keep_trajectories: true,
    })?;

    let mut outputs = Vec::new();
    let mut series = Vec::new();
    for (i, &s) in magnitudes.iter().enumerate() {
        let tag = magnitude_label(s);
        for (sweep, kind, dashed) in
            [(&unscaled, "unscaled", false), (&scaled, "scaled", true)]
        {
            let traj = sweep.trajectories[i].as_ref().ok_or_else(|| {
                FtError::Degenerate(format!("{kind} integration failed at magnitude {s}"))
            })?;
            let name = format!("trajectory_{kind}_{tag}.csv");
            write_trajectory_csv(&out_dir.join(&name), traj, &setup.equilibrium)?;
            outputs.push(name);
            series.push(error_series(traj, &setup.equilibrium, &format!("{kind} s={s:e}"), dashed));
        }
    }

    // dual trajectory from y(0) = 0 (positive-orthant invariance witness)
    if let Some((n, di)) = dual_slice {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(13));
        let mut ux: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let un = norm(&ux).max(1e-300);
        for v in ux.iter_mut() {
            *v /= un;
        }
        let mut z0 = vec![0.0; setup.field.dim()];
        for i in 0..n {
            z0[i] = setup.equilibrium[i] + ux[i];
        }
        let dopts = IntegrateOptions { t_max: 20.0, stop_field_norm: 0.0, ..Default::default() };
        let traj = integrate(&setup.field, &z0, &dopts)?;
        let mut csv = String::from("t,min_dual\n");
        for (t, state) in traj.times.iter().zip(&traj.states) {
            let md = state[n..n + di].iter().cloned().fold(f64::INFINITY, f64::min);
            csv.push_str(&format!("{t:.17e},{md:.17e}\n"));
        }
        std::fs::write(out_dir.join("duals.csv"), csv)?;
        outputs.push("duals.csv".to_string());
    }

    let svg = error_plot_svg(&format!("{label}: relative error vs time"), &series)?;
    std::fs::write(out_dir.join("plot.svg"), svg)?;
    outputs.push("plot.svg".to_string());

    let command = format!("reproduce {label} --seed {seed}");
    let digest = fnv1a_hex(command.as_bytes());
    finish_manifest(out_dir, command, digest, outputs, started)
}

/// `ftflow verify`: runs the whole verification suite, prints one line per
/// criterion, and writes the report; returns whether everything passed.
pub fn cmd_verify(out_dir: &Path) -> Result<(RunManifest, bool)> {
    let started = Instant::now();
    std::fs::create_dir_all(out_dir)?;
    let reports = acceptance::run_all();
    let mut table = String::new();
    for r in &reports {
        let line = r.line();
        println!("{line}");
        table.push_str(&line);
        table.push('\n');
    }
    let all_passed = reports.iter().all(|r| r.passed);
    table.push_str(if all_passed { "result: PASS\n" } else { "result: FAIL\n" });
    std::fs::write(out_dir.join("report.txt"), &table)?;
    let manifest = finish_manifest(
        out_dir,
        "verify".to_string(),
        fnv1a_hex(table.as_bytes()),
        vec!["report.txt".to_string()],
        started,
    )?;
    Ok((manifest, all_passed))
}

/// Convenience used by tests: path of an output inside a directory.
pub fn output_path(out_dir: &Path, name: &str) -> PathBuf {
    out_dir.join(name)
}
