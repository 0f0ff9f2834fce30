use std::time::Instant;

use serde_json::{json, Value};
use wavefield_core::anc::{
    ear_disk_mean_db, field_grid_power, grid_points, run_anc, AncMode, AncRunReport, FieldMap,
};
use wavefield_core::pinn::{model_to_text, pinn_predict, train_pinn, TrainedPinn};
use wavefield_core::sh::{sh_fit, sh_interpolate_on_sphere};
use wavefield_core::{interpolation_error, sphere_points, to_db, Point3, ScenarioConfig};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{csv, fmt_float, Bundle, Check};

/// Radius of the ear regions used for the field-map comparison.
pub const EAR_DISK_RADIUS: f64 = 0.03;
/// Iterations averaged for steady-state levels.
pub const STEADY_STATE_TAIL: usize = 1000;
/// Iterations over which the initial convergence rates are compared.
pub const EARLY_ITERATIONS: usize = 500;

pub fn train_model(cfg: &ExperimentConfig, scenario: &ScenarioConfig) -> Result<TrainedPinn, CliError> {
    let mics = scenario.primary_at_all(&scenario.monitoring_positions)?;
    Ok(train_pinn(scenario, &mics, &cfg.train)?)
}

fn model_files(bundle: &mut Bundle, model: &TrainedPinn) {
    bundle.add("model.txt", model_to_text(&model.params, &model.norm));
    let rows = model.report.history.iter().map(|h| {
        vec![h.epoch.to_string(), fmt_float(h.data_loss), fmt_float(h.pde_loss)]
    });
    bundle.add("training_history.csv", csv(&["epoch", "data_loss", "pde_loss"], rows));
}

fn training_summary(model: &TrainedPinn) -> Value {
    let r = &model.report;
    json!({
        "epochs": r.epochs_run,
        "initial_data_loss": r.initial_data_loss,
        "final_data_loss": r.final_data_loss,
        "initial_pde_loss": r.initial_pde_loss,
        "final_pde_loss": r.final_pde_loss,
        "c_eff": model.norm.c_eff,
        "window_seconds": model.norm.span,
    })
}

fn summary(
    experiment: &str,
    cfg: &ExperimentConfig,
    started: Instant,
    metrics: Value,
    checks: &[Check],
) -> Result<String, CliError> {
    let echo = cfg.echo()?;
    let v = json!({
        "experiment": experiment,
        "config": echo,
        "seeds": { "scenario": cfg.scenario.rng_seed, "train": cfg.train.seed },
        "metrics": metrics,
        "checks": checks,
        "all_passed": checks.iter().all(|c| c.passed),
        "wall_clock_seconds": started.elapsed().as_secs_f64(),
    });
    Ok(serde_json::to_string_pretty(&v).expect("summary is serialisable") + "\n")
}

fn use_or_train(
    cfg: &ExperimentConfig,
    scenario: &ScenarioConfig,
    model: Option<&TrainedPinn>,
) -> Result<TrainedPinn, CliError> {
    match model {
        Some(m) => Ok(m.clone()),
        None => train_model(cfg, scenario),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub radius: f64,
    pub eps_sh_db: f64,
    pub eps_pinn_db: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub model: TrainedPinn,
    pub bundle: Bundle,
}

impl SweepOutcome {
    /// Mean of `eps_sh_db - eps_pinn_db` over radii in `[lo, hi]`.
    pub fn mean_margin(&self, lo: f64, hi: f64) -> f64 {
        let sel: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.radius >= lo - 1e-9 && r.radius <= hi + 1e-9)
            .map(|r| r.eps_sh_db - r.eps_pinn_db)
            .collect();
        sel.iter().sum::<f64>() / sel.len().max(1) as f64
    }

    pub fn min_margin(&self) -> f64 {
        self.rows.iter().map(|r| r.eps_sh_db - r.eps_pinn_db).fold(f64::INFINITY, f64::min)
    }
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    csv(
        &["r_s", "eps_sh_dB", "eps_pinn_dB"],
        rows.iter().map(|r| vec![fmt_float(r.radius), fmt_float(r.eps_sh_db), fmt_float(r.eps_pinn_db)]),
    )
}

/// Interpolation error of both methods on spheres of increasing radius.
pub fn run_interp_sweep(cfg: &ExperimentConfig, model: Option<&TrainedPinn>) -> Result<SweepOutcome, CliError> {
    let started = Instant::now();
    let scenario = cfg.resolve()?;
    let model = use_or_train(cfg, &scenario, model)?;
    let mut bundle = Bundle::default();
    model_files(&mut bundle, &model);

    let mics = scenario.primary_at_all(&scenario.monitoring_positions)?;
    let fit = sh_fit(&scenario.monitoring_positions, &mics, cfg.sh_order, cfg.sh_regularization)?;
    let c = scenario.speed_of_sound;
    let mut rows = Vec::with_capacity(cfg.sweep_radii.len());
    for &radius in &cfg.sweep_radii {
        let row = (|| -> Result<SweepRow, CliError> {
            let points = sphere_points(radius, cfg.sphere_points, Point3::ORIGIN);
            let truth = scenario.primary_at_all(&points)?;
            let sh = sh_interpolate_on_sphere(&fit, &points, c)?;
            let pinn = pinn_predict(&model.params, &model.norm, &points, scenario.sample_rate, scenario.duration)?;
            Ok(SweepRow {
                radius,
                eps_sh_db: to_db(interpolation_error(&truth, &sh)?),
                eps_pinn_db: to_db(interpolation_error(&truth, &pinn)?),
            })
        })();
        match row {
            Ok(r) => rows.push(r),
            Err(e) => {
                bundle.add("interp_sweep.csv", sweep_csv(&rows));
                return Err(CliError::Partial {
                    bundle: Box::new(bundle),
                    source: Box::new(e),
                });
            }
        }
    }
    bundle.add("interp_sweep.csv", sweep_csv(&rows));

    let ears = scenario.primary_at_all(&scenario.virtual_positions)?;
    let ear_pred = pinn_predict(
        &model.params,
        &model.norm,
        &scenario.virtual_positions,
        scenario.sample_rate,
        scenario.duration,
    )?;
    let mut out = SweepOutcome { rows, model, bundle };
    let checks = vec![
        Check::at_least(
            "pinn_below_sh_at_every_radius",
            out.min_margin(),
            f64::MIN_POSITIVE,
            "smallest eps_sh_dB - eps_pinn_dB over the sweep",
        ),
        Check::at_least(
            "mean_margin_0.2_to_0.4",
            out.mean_margin(0.2, 0.4),
            4.0,
            "mean eps_sh_dB - eps_pinn_dB for r_s in [0.2, 0.4]",
        ),
    ];
    let metrics = json!({
        "min_margin_dB": out.min_margin(),
        "mean_margin_0.2_0.4_dB": out.mean_margin(0.2, 0.4),
        "ear_interpolation_error_dB": to_db(interpolation_error(&ears, &ear_pred)?),
        "training": training_summary(&out.model),
    });
    out.bundle.add("summary.json", summary("interp-sweep", cfg, started, metrics, &checks)?);
    out.bundle.checks = checks;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ConvergenceOutcome {
    pub multipoint: AncRunReport,
    pub pinn: AncRunReport,
    pub model: TrainedPinn,
    pub bundle: Bundle,
}

impl ConvergenceOutcome {
    /// Steady-state advantage of the network-assisted loop in dB.
    pub fn steady_state_gap(&self) -> f64 {
        self.multipoint.tail_mean_db(STEADY_STATE_TAIL) - self.pinn.tail_mean_db(STEADY_STATE_TAIL)
    }
}

/// Control runs for both error-signal sources from the same starting point.
pub fn run_both_modes(
    cfg: &ExperimentConfig,
    scenario: &ScenarioConfig,
    model: &TrainedPinn,
) -> Result<(AncRunReport, AncRunReport), CliError> {
    let mp = run_anc(scenario, &AncMode::MultiplePoint, &cfg.anc)?;
    let pinn_mode = AncMode::PinnAssisted {
        params: model.params.clone(),
        norm: model.norm,
    };
    let pinn = run_anc(scenario, &pinn_mode, &cfg.anc)?;
    Ok((mp, pinn))
}

pub fn run_anc_convergence(
    cfg: &ExperimentConfig,
    model: Option<&TrainedPinn>,
) -> Result<ConvergenceOutcome, CliError> {
    let started = Instant::now();
    let scenario = cfg.resolve()?;
    let model = use_or_train(cfg, &scenario, model)?;
    let (multipoint, pinn) = run_both_modes(cfg, &scenario, &model)?;
    let mut bundle = Bundle::default();
    model_files(&mut bundle, &model);
    let rows = multipoint
        .eps_db
        .iter()
        .zip(&pinn.eps_db)
        .enumerate()
        .map(|(i, (a, b))| vec![i.to_string(), fmt_float(*a), fmt_float(*b)]);
    bundle.add(
        "anc_convergence.csv",
        csv(&["iteration", "eps_dB_multipoint", "eps_dB_pinn"], rows),
    );
    bundle.add("anc_multipoint.txt", multipoint.to_columns());
    bundle.add("anc_pinn.txt", pinn.to_columns());

    let mut out = ConvergenceOutcome {
        multipoint,
        pinn,
        model,
        bundle,
    };
    let early = EARLY_ITERATIONS.min(out.pinn.iterations() - 1);
    let mse_uncontrolled = out.multipoint.uncontrolled_mse;
    let mse_last = *out.multipoint.mse_error_sensors.last().expect("at least one iteration");
    let checks = vec![
        Check::at_least(
            "steady_state_gap",
            out.steady_state_gap(),
            8.0,
            "mean eps_dB over the last 1000 iterations, multipoint minus pinn",
        ),
        Check::at_most(
            "multipoint_sensor_mse_not_increased",
            mse_last,
            mse_uncontrolled,
            "final windowed mean-square error at the monitoring microphones against the uncontrolled level",
        ),
    ];
    let metrics = json!({
        "steady_state_dB_multipoint": out.multipoint.tail_mean_db(STEADY_STATE_TAIL),
        "steady_state_dB_pinn": out.pinn.tail_mean_db(STEADY_STATE_TAIL),
        "steady_state_gap_dB": out.steady_state_gap(),
        "early_eps_dB_multipoint": out.multipoint.eps_db[early],
        "early_eps_dB_pinn": out.pinn.eps_db[early],
        "early_iteration": early,
        "converged_multipoint": out.multipoint.converged,
        "converged_pinn": out.pinn.converged,
        "training": training_summary(&out.model),
    });
    out.bundle.add("summary.json", summary("anc-convergence", cfg, started, metrics, &checks)?);
    out.bundle.checks = checks;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct FieldOutcome {
    pub multipoint: FieldMap,
    pub pinn: FieldMap,
    pub ear_db_multipoint: f64,
    pub ear_db_pinn: f64,
    pub bundle: Bundle,
}

fn field_csv(map: &FieldMap, values: &[f64]) -> String {
    csv(
        &["x", "y", "power_dB"],
        map.points
            .iter()
            .zip(values)
            .map(|(p, v)| vec![fmt_float(p.x), fmt_float(p.y), fmt_float(*v)]),
    )
}

pub fn run_field_map(cfg: &ExperimentConfig, model: Option<&TrainedPinn>) -> Result<FieldOutcome, CliError> {
    let started = Instant::now();
    let scenario = cfg.resolve()?;
    let model = use_or_train(cfg, &scenario, model)?;
    let (mp_run, pinn_run) = run_both_modes(cfg, &scenario, &model)?;
    let grid = grid_points();
    let taps = cfg.anc.path_taps;
    let multipoint = field_grid_power(&scenario, &mp_run.weights, &grid, taps)?;
    let pinn = field_grid_power(&scenario, &pinn_run.weights, &grid, taps)?;
    let ears = &scenario.virtual_positions;
    let ear_db_multipoint = ear_disk_mean_db(&grid, &multipoint.residual_db, ears, EAR_DISK_RADIUS)?;
    let ear_db_pinn = ear_disk_mean_db(&grid, &pinn.residual_db, ears, EAR_DISK_RADIUS)?;

    let mut bundle = Bundle::default();
    model_files(&mut bundle, &model);
    bundle.add("field_primary.csv", field_csv(&multipoint, &multipoint.primary_db));
    bundle.add("field_multipoint.csv", field_csv(&multipoint, &multipoint.residual_db));
    bundle.add("field_pinn.csv", field_csv(&pinn, &pinn.residual_db));
    let checks = vec![Check::at_least(
        "ear_region_gap",
        ear_db_multipoint - ear_db_pinn,
        5.0,
        "mean power in the ear disks, multipoint minus pinn",
    )];
    let metrics = json!({
        "ear_disk_dB_multipoint": ear_db_multipoint,
        "ear_disk_dB_pinn": ear_db_pinn,
        "ear_disk_primary_dB": ear_disk_mean_db(&grid, &multipoint.primary_db, ears, EAR_DISK_RADIUS)?,
        "training": training_summary(&model),
    });
    bundle.add("summary.json", summary("field-map", cfg, started, metrics, &checks)?);
    bundle.checks = checks;
    Ok(FieldOutcome {
        multipoint,
        pinn,
        ear_db_multipoint,
        ear_db_pinn,
        bundle,
    })
}

pub fn run_validate(cfg: &ExperimentConfig) -> Result<Bundle, CliError> {
    let started = Instant::now();
    cfg.resolve()?;
    let checks = crate::validate::all_checks(cfg.train.seed)?;
    let mut bundle = Bundle::default();
    let v = json!({
        "checks": checks,
        "all_passed": checks.iter().all(|c| c.passed),
        "wall_clock_seconds": started.elapsed().as_secs_f64(),
    });
    bundle.add("validate.json", serde_json::to_string_pretty(&v).expect("serialisable") + "\n");
    bundle.checks = checks;
    Ok(bundle)
}
