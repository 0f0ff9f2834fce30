use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::acoustics::sample_count;
use crate::error::{Error, Result};
use crate::geometry::{ball_points, Point3};
use crate::pinn::adam::{adam_step, AdamConfig, AdamState};
use crate::pinn::loss::{loss_and_grads, DataPoint};
use crate::pinn::mlp::{glorot_init, mlp_forward, Input, MlpParams};
use crate::scenario::ScenarioConfig;
use crate::signal::SampledSignal;

/// Half-width of the normalized input range shared by time and space.
pub const NORM_HALF_RANGE: f64 = 0.15;

/// Affine time normalization for the network's τ input.
///
/// Physical times in `[0, span]` map onto `[-half_range, half_range]`. When
/// `period` is set, the training window holds one period of the field with
/// `margin` seconds of context on either side, and any physical time is first
/// folded into `[margin, margin + period)` before mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub half_range: f64,
    pub span: f64,
    pub margin: f64,
    pub period: Option<f64>,
    pub c_eff: f64,
}

impl NormSpec {
    /// Maps `[0, duration]` onto the normalized range, with no folding.
    pub fn linear(duration: f64, c: f64) -> Self {
        Self {
            half_range: NORM_HALF_RANGE,
            span: duration,
            margin: 0.0,
            period: None,
            c_eff: c * duration / (2.0 * NORM_HALF_RANGE),
        }
    }

    /// One `period` of a periodic field plus `margin` on both sides.
    pub fn periodic(period: f64, margin: f64, c: f64) -> Self {
        let span = period + 2.0 * margin;
        Self {
            half_range: NORM_HALF_RANGE,
            span,
            margin,
            period: Some(period),
            c_eff: c * span / (2.0 * NORM_HALF_RANGE),
        }
    }

    /// `dτ/dt`.
    pub fn time_scale(&self) -> f64 {
        2.0 * self.half_range / self.span
    }

    pub fn tau(&self, t: f64) -> f64 {
        let t = match self.period {
            Some(p) => self.margin + (t - self.margin).rem_euclid(p),
            None => t,
        };
        -self.half_range + t * self.time_scale()
    }

    pub fn input(&self, t: f64, p: &Point3) -> Input {
        [self.tau(t), p.x, p.y, p.z]
    }
}

/// Collocation points: the monitoring positions followed by seeded points in
/// the ball enclosing the array.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationSet {
    pub positions: Vec<Point3>,
    pub radius: f64,
}

impl CollocationSet {
    pub fn new(mics: &[Point3], total: usize, radius: f64, seed: u64) -> Self {
        let extra = total.saturating_sub(mics.len());
        let mut positions = mics.to_vec();
        positions.extend(ball_points(radius, extra, Point3::ORIGIN, seed));
        Self { positions, radius }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Pairs every position with a fresh uniform τ.
    pub fn draw(&self, half_range: f64, rng: &mut impl Rng, out: &mut Vec<Input>) {
        out.clear();
        for p in &self.positions {
            let tau = rng.random_range(-half_range..half_range);
            out.push([tau, p.x, p.y, p.z]);
        }
    }
}

fn default_epochs() -> usize {
    50_000
}
fn default_learning_rate() -> f64 {
    1e-2
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}
fn default_pde_weight() -> f64 {
    1e-7
}
fn default_hidden() -> usize {
    16
}
fn default_collocation() -> usize {
    100
}
fn default_margin() -> f64 {
    0.0
}
fn default_true() -> bool {
    true
}
fn default_time_gain() -> f64 {
    80.0
}
fn default_log_every() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_beta1")]
    pub adam_beta1: f64,
    #[serde(default = "default_beta2")]
    pub adam_beta2: f64,
    #[serde(default = "default_eps")]
    pub adam_eps: f64,
    #[serde(default = "default_pde_weight")]
    pub pde_weight: f64,
    #[serde(default = "default_hidden")]
    pub hidden: usize,
    #[serde(default = "default_collocation")]
    pub collocation_points: usize,
    /// Random time indices drawn per microphone each epoch; `None` uses every
    /// sample in the training window.
    #[serde(default)]
    pub time_samples_per_mic: Option<usize>,
    /// Train on one period of the field when the tones share a fundamental
    /// period that fits in the recording.
    #[serde(default = "default_true")]
    pub periodic_window: bool,
    #[serde(default = "default_margin")]
    pub window_margin: f64,
    /// Multiplier on the Glorot draw for the τ column of `W1`.
    #[serde(default = "default_time_gain")]
    pub time_init_gain: f64,
    /// Overrides the normalized wave speed derived from the time scaling.
    #[serde(default)]
    pub c_eff: Option<f64>,
    #[serde(default = "default_log_every")]
    pub log_every: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: default_epochs(),
            learning_rate: default_learning_rate(),
            adam_beta1: default_beta1(),
            adam_beta2: default_beta2(),
            adam_eps: default_eps(),
            pde_weight: default_pde_weight(),
            hidden: default_hidden(),
            collocation_points: default_collocation(),
            time_samples_per_mic: None,
            periodic_window: true,
            window_margin: default_margin(),
            time_init_gain: default_time_gain(),
            c_eff: None,
            log_every: default_log_every(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(self.pde_weight >= 0.0) {
            return bad("pde_weight must be non-negative");
        }
        if self.hidden == 0 {
            return bad("hidden width must be at least 1");
        }
        if self.collocation_points == 0 {
            return bad("collocation_points must be at least 1");
        }
        if self.time_samples_per_mic == Some(0) {
            return bad("time_samples_per_mic must be at least 1");
        }
        if !(self.window_margin >= 0.0) {
            return bad("window_margin must be non-negative");
        }
        if self.c_eff.is_some_and(|c| !(c > 0.0)) {
            return bad("c_eff must be positive");
        }
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossLogEntry {
    pub epoch: usize,
    pub data_loss: f64,
    pub pde_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub history: Vec<LossLogEntry>,
    pub initial_data_loss: f64,
    pub initial_pde_loss: f64,
    pub final_data_loss: f64,
    pub final_pde_loss: f64,
    pub epochs_run: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedPinn {
    pub params: MlpParams,
    pub norm: NormSpec,
    pub report: TrainReport,
}

/// Chooses the training window for a scenario.
pub fn norm_for(scenario: &ScenarioConfig, cfg: &TrainConfig) -> NormSpec {
    let c = scenario.speed_of_sound;
    let mut norm = match scenario.primary_source.fundamental_period() {
        Some(p) if cfg.periodic_window && p + 2.0 * cfg.window_margin <= scenario.duration => {
            NormSpec::periodic(p, cfg.window_margin, c)
        }
        _ => NormSpec::linear(scenario.duration, c),
    };
    if let Some(c_eff) = cfg.c_eff {
        norm.c_eff = c_eff;
    }
    norm
}

/// Fits the network to the monitoring signals under the wave-equation
/// penalty.
pub fn train_pinn(scenario: &ScenarioConfig, mic_signals: &[SampledSignal], cfg: &TrainConfig) -> Result<TrainedPinn> {
    cfg.validate()?;
    let mics = &scenario.monitoring_positions;
    if mic_signals.len() != mics.len() {
        return Err(Error::SignalMismatch(format!(
            "{} microphone signals for {} positions",
            mic_signals.len(),
            mics.len()
        )));
    }
    if mic_signals.iter().any(SampledSignal::is_empty) {
        return Err(Error::EmptySignal);
    }
    let norm = norm_for(scenario, cfg);
    let fs = scenario.sample_rate;
    let window_len = mic_signals.iter().map(SampledSignal::len).min().unwrap_or(0);
    let window_len = window_len.min(sample_count(fs, norm.span) + 1);

    let mut samples: Vec<Vec<DataPoint>> = Vec::with_capacity(mics.len());
    for (sig, p) in mic_signals.iter().zip(mics) {
        samples.push(
            (0..window_len)
                .map(|k| {
                    let t = sig.start_time + k as f64 / sig.sample_rate;
                    DataPoint {
                        input: [-norm.half_range + t * norm.time_scale(), p.x, p.y, p.z],
                        pressure: sig.samples[k],
                    }
                })
                .collect(),
        );
    }
    let full_batch: Vec<DataPoint> = samples.iter().flatten().copied().collect();

    let colloc = CollocationSet::new(mics, cfg.collocation_points, scenario.array_radius(), cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));

    let mut params = glorot_init(cfg.seed, cfg.hidden);
    params.scale_input_column(0, cfg.time_init_gain);
    let adam = cfg.adam();
    let mut state = AdamState::new(params.as_slice().len());

    let mut report = TrainReport {
        history: Vec::new(),
        initial_data_loss: f64::NAN,
        initial_pde_loss: f64::NAN,
        final_data_loss: f64::NAN,
        final_pde_loss: f64::NAN,
        epochs_run: 0,
    };
    let mut col_batch = Vec::with_capacity(colloc.len());
    let log_every = cfg.log_every.max(1);

    if cfg.epochs == 0 {
        colloc.draw(norm.half_range, &mut rng, &mut col_batch);
        let l = loss_and_grads(&params, &full_batch, &col_batch, cfg.pde_weight, norm.c_eff)?;
        report.initial_data_loss = l.data;
        report.initial_pde_loss = l.pde;
        report.final_data_loss = l.data;
        report.final_pde_loss = l.pde;
        return Ok(TrainedPinn { params, norm, report });
    }

    let mut epoch_data = Vec::new();
    for epoch in 1..=cfg.epochs {
        colloc.draw(norm.half_range, &mut rng, &mut col_batch);
        let batch: &[DataPoint] = match cfg.time_samples_per_mic {
            None => &full_batch,
            Some(n) => {
                epoch_data.clear();
                for s in &samples {
                    for _ in 0..n {
                        epoch_data.push(s[rng.random_range(0..s.len())]);
                    }
                }
                &epoch_data
            }
        };
        let l = loss_and_grads(&params, batch, &col_batch, cfg.pde_weight, norm.c_eff)?;
        if epoch == 1 {
            report.initial_data_loss = l.data;
            report.initial_pde_loss = l.pde;
        }
        if !l.total.is_finite() || !l.grads.is_finite() {
            report.epochs_run = epoch - 1;
            return Err(Error::DivergenceDetected {
                epoch,
                report: Box::new(report),
            });
        }
        report.final_data_loss = l.data;
        report.final_pde_loss = l.pde;
        if epoch % log_every == 0 {
            report.history.push(LossLogEntry {
                epoch,
                data_loss: l.data,
                pde_loss: l.pde,
            });
        }
        adam_step(params.as_mut_slice(), l.grads.as_slice(), &mut state, &adam);
        report.epochs_run = epoch;
    }
    if !params.is_finite() {
        return Err(Error::DivergenceDetected {
            epoch: cfg.epochs,
            report: Box::new(report),
        });
    }
    Ok(TrainedPinn { params, norm, report })
}

/// Network prediction at one point and physical time.
pub fn predict_at(params: &MlpParams, norm: &NormSpec, point: &Point3, t: f64) -> f64 {
    mlp_forward(params, &norm.input(t, point))
}

/// Evaluates the network on the sample grid `k / sample_rate` for each point.
pub fn pinn_predict(
    params: &MlpParams,
    norm: &NormSpec,
    points: &[Point3],
    sample_rate: f64,
    duration: f64,
) -> Result<Vec<SampledSignal>> {
    let n = sample_count(sample_rate, duration);
    points
        .iter()
        .map(|p| SampledSignal::from_fn(sample_rate, 0.0, n, |t| predict_at(params, norm, p, t)))
        .collect()
}
