//! Multichannel filtered-x LMS control loop.

mod field;

pub use field::{ear_disk_mean_db, field_grid_power, grid_points, FieldMap, GRID_HALF_WIDTH, GRID_SIDE, GRID_SPACING};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::acoustics::make_path_fir;
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::metrics::to_db;
use crate::pinn::{pinn_predict, MlpParams, NormSpec};
use crate::scenario::ScenarioConfig;
use crate::signal::{FirFilter, SampledSignal};

/// Weight magnitude treated as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// One adaptive FIR per secondary source, all of the same length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AncWeights {
    filters: Vec<Vec<f64>>,
}

impl AncWeights {
    pub fn zeros(num_sources: usize, filter_len: usize) -> Self {
        Self {
            filters: vec![vec![0.0; filter_len]; num_sources],
        }
    }

    pub fn from_filters(filters: Vec<Vec<f64>>) -> Result<Self> {
        let len = filters.first().map(Vec::len).unwrap_or(0);
        if len == 0 || filters.iter().any(|f| f.len() != len) {
            return Err(Error::InvalidConfig("weight vectors must share a non-zero length".into()));
        }
        if filters.iter().flatten().any(|w| !w.is_finite()) {
            return Err(Error::InvalidConfig("weights must be finite".into()));
        }
        Ok(Self { filters })
    }

    pub fn num_sources(&self) -> usize {
        self.filters.len()
    }

    pub fn filter_len(&self) -> usize {
        self.filters.first().map(Vec::len).unwrap_or(0)
    }

    pub fn filter(&self, source: usize) -> &[f64] {
        &self.filters[source]
    }

    pub fn max_abs(&self) -> f64 {
        self.filters.iter().flatten().fold(0.0, |m, w| m.max(w.abs()))
    }

    /// Secondary output `d = -wᵀ x` for a reference history whose last element
    /// is the newest sample.
    pub fn output(&self, source: usize, history: &[f64]) -> f64 {
        let w = &self.filters[source];
        let newest = history.len() - 1;
        -w.iter().enumerate().map(|(j, wj)| wj * history[newest - j]).sum::<f64>()
    }
}

/// Reference filtered by `path` at the `n_taps` most recent lags. `history` is
/// in time order with the newest sample last; entry `j` of the result is the
/// filtered reference `j` samples ago.
pub fn filtered_reference(history: &[f64], path: &FirFilter, n_taps: usize) -> Result<Vec<f64>> {
    let needed = n_taps + path.len() - 1;
    if history.len() < needed {
        return Err(Error::BufferTooShort {
            len: history.len(),
            needed,
        });
    }
    let newest = history.len() - 1;
    Ok((0..n_taps)
        .map(|j| {
            path.taps()
                .iter()
                .enumerate()
                .map(|(k, s)| s * history[newest - j - k])
                .sum()
        })
        .collect())
}

/// `w_ℓ += μ Σ_s x′_{ℓ,s} e_s`. `filtered_refs[ℓ][s]` holds the lag vector for
/// source `ℓ` and sensor `s`.
pub fn fxlms_step(weights: &mut AncWeights, filtered_refs: &[Vec<Vec<f64>>], errors: &[f64], mu: f64) {
    assert_eq!(filtered_refs.len(), weights.num_sources(), "one reference set per source");
    for (w, refs) in weights.filters.iter_mut().zip(filtered_refs) {
        assert_eq!(refs.len(), errors.len(), "one filtered reference per sensor");
        for (xp, &e) in refs.iter().zip(errors) {
            if e == 0.0 {
                continue;
            }
            let g = mu * e;
            for (wj, xj) in w.iter_mut().zip(xp) {
                *wj += g * xj;
            }
        }
    }
}

/// Where the loop takes its error signals from.
#[derive(Debug, Clone, PartialEq)]
pub enum AncMode {
    /// Measured residuals at the monitoring microphones.
    MultiplePoint,
    /// Residuals at the virtual microphones built from the network's primary
    /// estimate.
    PinnAssisted { params: MlpParams, norm: NormSpec },
    /// Residuals at the virtual microphones built from the exact primary field.
    VirtualOracle,
}

impl AncMode {
    pub fn name(&self) -> &'static str {
        match self {
            AncMode::MultiplePoint => "multipoint",
            AncMode::PinnAssisted { .. } => "pinn",
            AncMode::VirtualOracle => "virtual-oracle",
        }
    }
}

fn default_iterations() -> usize {
    10_000
}
fn default_mu() -> f64 {
    1e-5
}
fn default_filter_len() -> usize {
    256
}
fn default_path_taps() -> usize {
    256
}
fn default_window() -> usize {
    480
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AncConfig {
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_filter_len")]
    pub filter_len: usize,
    #[serde(default = "default_path_taps")]
    pub path_taps: usize,
    /// Trailing window, in samples, for the per-iteration power ratios.
    #[serde(default = "default_window")]
    pub window: usize,
}

impl Default for AncConfig {
    fn default() -> Self {
        Self {
            iterations: default_iterations(),
            mu: default_mu(),
            filter_len: default_filter_len(),
            path_taps: default_path_taps(),
            window: default_window(),
        }
    }
}

impl AncConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.iterations == 0 {
            return bad("iterations must be at least 1");
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return bad("mu must be finite and non-negative");
        }
        if self.filter_len == 0 {
            return bad("filter_len must be at least 1");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AncRunReport {
    pub mode: String,
    /// Ear noise-reduction ratio in dB over the trailing window, per iteration.
    pub eps_db: Vec<f64>,
    /// Mean-square error at the active error sensors over the trailing window.
    pub mse_error_sensors: Vec<f64>,
    /// Mean-square of the error signals without control, over one window.
    pub uncontrolled_mse: f64,
    pub weights: AncWeights,
    pub converged: bool,
}

impl AncRunReport {
    pub fn iterations(&self) -> usize {
        self.eps_db.len()
    }

    /// Mean of `eps_db` over the last `count` iterations.
    pub fn tail_mean_db(&self, count: usize) -> f64 {
        let n = self.eps_db.len();
        let tail = &self.eps_db[n.saturating_sub(count)..];
        tail.iter().sum::<f64>() / tail.len().max(1) as f64
    }

    /// Columnar text: `iteration eps_dB mse_error_sensors`.
    pub fn to_columns(&self) -> String {
        let mut out = String::from("iteration eps_dB mse_error_sensors\n");
        for (i, (e, m)) in self.eps_db.iter().zip(&self.mse_error_sensors).enumerate() {
            let _ = writeln!(out, "{i} {e:.8e} {m:.8e}");
        }
        out
    }
}

fn path_bank(scenario: &ScenarioConfig, sensors: &[Point3], taps: usize) -> Result<Vec<Vec<FirFilter>>> {
    scenario
        .secondary_positions
        .iter()
        .map(|&src| {
            sensors
                .iter()
                .map(|&rx| make_path_fir(src, rx, scenario.sample_rate, taps, scenario.speed_of_sound))
                .collect()
        })
        .collect()
}

/// Sliding sums of squares over the last `window` entries.
struct TrailingPower {
    window: usize,
    values: Vec<f64>,
}

impl TrailingPower {
    fn new(window: usize, capacity: usize) -> Self {
        Self {
            window,
            values: Vec::with_capacity(capacity),
        }
    }

    fn push(&mut self, v: f64) -> f64 {
        self.values.push(v);
        let n = self.values.len();
        self.values[n.saturating_sub(self.window)..].iter().sum()
    }
}

/// Runs the sample-synchronous control loop from zero weights.
pub fn run_anc(scenario: &ScenarioConfig, mode: &AncMode, cfg: &AncConfig) -> Result<AncRunReport> {
    scenario.validate()?;
    cfg.validate()?;
    let fs = scenario.sample_rate;
    let (sensors, sensor_primaries): (&[Point3], Vec<SampledSignal>) = match mode {
        AncMode::MultiplePoint => (
            &scenario.monitoring_positions,
            scenario.primary_at_all(&scenario.monitoring_positions)?,
        ),
        AncMode::VirtualOracle => (
            &scenario.virtual_positions,
            scenario.primary_at_all(&scenario.virtual_positions)?,
        ),
        AncMode::PinnAssisted { params, norm } => (
            &scenario.virtual_positions,
            pinn_predict(params, norm, &scenario.virtual_positions, fs, scenario.duration)?,
        ),
    };
    let ear_primaries = scenario.primary_at_all(&scenario.virtual_positions)?;
    let uncontrolled_mse = sensor_primaries
        .iter()
        .map(|p| (0..cfg.window as i64).map(|n| p.periodic(n).powi(2)).sum::<f64>())
        .sum::<f64>()
        / (cfg.window * sensors.len()) as f64;
    let reference = scenario.reference_signal()?;

    let num_src = scenario.secondary_positions.len();
    let sensor_paths = path_bank(scenario, sensors, cfg.path_taps)?;
    let ear_paths = path_bank(scenario, &scenario.virtual_positions, cfg.path_taps)?;

    let iters = cfg.iterations;
    let n_w = cfg.filter_len;
    let n_p = cfg.path_taps;
    // reference history reaches back far enough to filter every lag at n = 0
    let lead = n_w + n_p;
    let x: Vec<f64> = (-(lead as i64)..iters as i64).map(|n| reference.periodic(n)).collect();
    let xf: Vec<Vec<Vec<f64>>> = sensor_paths
        .iter()
        .map(|row| {
            row.iter()
                .map(|path| {
                    (0..x.len())
                        .map(|i| {
                            let kmax = path.len().min(i + 1);
                            (0..kmax).map(|k| path.taps()[k] * x[i - k]).sum()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut weights = AncWeights::zeros(num_src, n_w);
    // secondary outputs, zero before the loop starts
    let mut d: Vec<Vec<f64>> = vec![vec![0.0; n_p + iters]; num_src];
    let mut refs: Vec<Vec<Vec<f64>>> = vec![vec![vec![0.0; n_w]; sensors.len()]; num_src];
    let mut errors = vec![0.0; sensors.len()];

    let mut eps_db = Vec::with_capacity(iters);
    let mut mse = Vec::with_capacity(iters);
    let mut ear_res = TrailingPower::new(cfg.window, iters);
    let mut ear_pri = TrailingPower::new(cfg.window, iters);
    let mut sens_pow = TrailingPower::new(cfg.window, iters);

    let contribution = |paths: &[Vec<FirFilter>], d: &[Vec<f64>], s: usize, pos: usize| -> f64 {
        let mut acc = 0.0;
        for (l, dl) in d.iter().enumerate() {
            let taps = paths[l][s].taps();
            for (k, h) in taps.iter().enumerate() {
                acc += h * dl[pos - k];
            }
        }
        acc
    };

    for n in 0..iters {
        let xi = n + lead;
        let pos = n + n_p;
        for l in 0..num_src {
            d[l][pos] = weights.output(l, &x[xi + 1 - n_w..=xi]);
        }
        let mut sq = 0.0;
        for s in 0..sensors.len() {
            let e = sensor_primaries[s].periodic(n as i64) + contribution(&sensor_paths, &d, s, pos);
            errors[s] = e;
            sq += e * e;
        }
        let (mut er, mut ep) = (0.0, 0.0);
        for (v, p) in ear_primaries.iter().enumerate() {
            let pv = p.periodic(n as i64);
            let e = pv + contribution(&ear_paths, &d, v, pos);
            er += e * e;
            ep += pv * pv;
        }
        let res = ear_res.push(er);
        let pri = ear_pri.push(ep);
        eps_db.push(if pri > 0.0 { to_db(res / pri) } else { 0.0 });
        let span = (n + 1).min(cfg.window) * sensors.len();
        mse.push(sens_pow.push(sq) / span as f64);

        for l in 0..num_src {
            for s in 0..sensors.len() {
                let src = &xf[l][s];
                let dst = &mut refs[l][s];
                for (j, v) in dst.iter_mut().enumerate() {
                    *v = src[xi - j];
                }
            }
        }
        fxlms_step(&mut weights, &refs, &errors, cfg.mu);
        if !(weights.max_abs() <= DIVERGENCE_LIMIT) {
            let report = AncRunReport {
                mode: mode.name().into(),
                eps_db,
                mse_error_sensors: mse,
                uncontrolled_mse,
                weights,
                converged: false,
            };
            return Err(Error::Diverged {
                iteration: n,
                report: Box::new(report),
            });
        }
    }

    let converged = settled(&eps_db, cfg.window);
    Ok(AncRunReport {
        mode: mode.name().into(),
        eps_db,
        mse_error_sensors: mse,
        uncontrolled_mse,
        weights,
        converged,
    })
}

/// Two consecutive trailing blocks agree within 0.5 dB.
fn settled(eps_db: &[f64], block: usize) -> bool {
    let n = eps_db.len();
    if n < 2 * block {
        return false;
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    (mean(&eps_db[n - block..]) - mean(&eps_db[n - 2 * block..n - block])).abs() < 0.5
}
