//! Experiment geometry and its on-disk form.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::acoustics::{propagate_tonal, TonalSource, ToneComponent};
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::signal::SampledSignal;

/// Per-tone source strength used by [`ScenarioConfig::headrest`]. A strength of
/// `2π` gives a pressure amplitude of `1 / (2 d)` at distance `d`.
pub const DEFAULT_TONE_AMPLITUDE: f64 = 2.0 * PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub primary_source: TonalSource,
    pub secondary_positions: Vec<Point3>,
    pub monitoring_positions: Vec<Point3>,
    pub virtual_positions: Vec<Point3>,
    pub speed_of_sound: f64,
    pub sample_rate: f64,
    pub duration: f64,
    pub rng_seed: u64,
}

impl ScenarioConfig {
    /// One noise source with 300, 400 and 500 Hz tones at (0.6, 0.8, 1),
    /// loudspeakers at (0, ±0.5, 0), monitoring microphones on the corners of
    /// the ±0.15 m cube and virtual microphones at the ears (0, ±0.1, 0).
    /// Tone phases are drawn from `seed`.
    pub fn headrest(seed: u64) -> Self {
        let phases = draw_phases(seed, 3);
        let components = [300.0, 400.0, 500.0]
            .iter()
            .zip(phases)
            .map(|(&frequency, phase)| ToneComponent {
                frequency,
                amplitude: DEFAULT_TONE_AMPLITUDE,
                phase,
            })
            .collect();
        let h = 0.15;
        let mut monitoring_positions = Vec::with_capacity(8);
        for sx in [-h, h] {
            for sy in [-h, h] {
                for sz in [-h, h] {
                    monitoring_positions.push(Point3::new(sx, sy, sz));
                }
            }
        }
        Self {
            primary_source: TonalSource {
                position: Point3::new(0.6, 0.8, 1.0),
                components,
            },
            secondary_positions: vec![Point3::new(0.0, 0.5, 0.0), Point3::new(0.0, -0.5, 0.0)],
            monitoring_positions,
            virtual_positions: vec![Point3::new(0.0, 0.1, 0.0), Point3::new(0.0, -0.1, 0.0)],
            speed_of_sound: 343.0,
            sample_rate: 24_000.0,
            duration: 0.1,
            rng_seed: seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.primary_source.validate()?;
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.secondary_positions.is_empty() {
            return bad("at least one secondary source is required".into());
        }
        if self.monitoring_positions.is_empty() {
            return bad("at least one monitoring microphone is required".into());
        }
        if self.virtual_positions.is_empty() {
            return bad("at least one virtual microphone is required".into());
        }
        if !(self.speed_of_sound > 0.0) || !self.speed_of_sound.is_finite() {
            return bad(format!("speed_of_sound {} must be positive", self.speed_of_sound));
        }
        if !(self.sample_rate > 0.0) || !self.sample_rate.is_finite() {
            return bad(format!("sample_rate {} must be positive", self.sample_rate));
        }
        if !(self.duration > 0.0) || self.num_samples() == 0 {
            return bad(format!("duration {} yields no samples", self.duration));
        }
        if self.primary_source.max_frequency() >= self.sample_rate / 2.0 {
            return bad("tone frequencies must lie below the Nyquist frequency".into());
        }
        let mics: Vec<&Point3> = self.monitoring_positions.iter().chain(&self.virtual_positions).collect();
        for (i, a) in mics.iter().enumerate() {
            if mics[..i].iter().any(|b| a.distance(b) < 1e-12) {
                return bad(format!("duplicate microphone position {:?}", a.to_array()));
            }
        }
        Ok(())
    }

    pub fn num_samples(&self) -> usize {
        crate::acoustics::sample_count(self.sample_rate, self.duration)
    }

    /// Ground-truth primary field at `p` over the scenario duration.
    pub fn primary_at(&self, p: Point3) -> Result<SampledSignal> {
        propagate_tonal(&self.primary_source, p, self.sample_rate, self.duration, self.speed_of_sound)
    }

    pub fn primary_at_all(&self, points: &[Point3]) -> Result<Vec<SampledSignal>> {
        points.iter().map(|&p| self.primary_at(p)).collect()
    }

    /// The source waveform over the scenario duration, used as the reference signal.
    pub fn reference_signal(&self) -> Result<SampledSignal> {
        SampledSignal::from_fn(self.sample_rate, 0.0, self.num_samples(), |t| self.primary_source.emission(t))
    }

    /// Largest monitoring-microphone distance from the origin.
    pub fn array_radius(&self) -> f64 {
        self.monitoring_positions.iter().map(Point3::norm).fold(0.0, f64::max)
    }
}

fn draw_phases(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random_range(0.0..2.0 * PI)).collect()
}

/// A tone as written in a config file; missing amplitude or phase are filled in
/// on resolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToneSpec {
    pub frequency: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceSpec {
    pub position: Point3,
    pub components: Vec<ToneSpec>,
}

/// Scenario as read from disk. Tones without a phase get one drawn uniformly
/// in `[0, 2π)` from `rng_seed`; tones without an amplitude get
/// [`DEFAULT_TONE_AMPLITUDE`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub primary_source: SourceSpec,
    pub secondary_positions: Vec<Point3>,
    pub monitoring_positions: Vec<Point3>,
    pub virtual_positions: Vec<Point3>,
    pub speed_of_sound: f64,
    pub sample_rate: f64,
    pub duration: f64,
    pub rng_seed: u64,
}

impl ScenarioSpec {
    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let phases = draw_phases(self.rng_seed, self.primary_source.components.len());
        let components = self
            .primary_source
            .components
            .iter()
            .zip(phases)
            .map(|(t, drawn)| ToneComponent {
                frequency: t.frequency,
                amplitude: t.amplitude.unwrap_or(DEFAULT_TONE_AMPLITUDE),
                phase: t.phase.unwrap_or(drawn),
            })
            .collect();
        let cfg = ScenarioConfig {
            primary_source: TonalSource {
                position: self.primary_source.position,
                components,
            },
            secondary_positions: self.secondary_positions.clone(),
            monitoring_positions: self.monitoring_positions.clone(),
            virtual_positions: self.virtual_positions.clone(),
            speed_of_sound: self.speed_of_sound,
            sample_rate: self.sample_rate,
            duration: self.duration,
            rng_seed: self.rng_seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl From<&ScenarioConfig> for ScenarioSpec {
    fn from(c: &ScenarioConfig) -> Self {
        Self {
            primary_source: SourceSpec {
                position: c.primary_source.position,
                components: c
                    .primary_source
                    .components
                    .iter()
                    .map(|t| ToneSpec {
                        frequency: t.frequency,
                        amplitude: Some(t.amplitude),
                        phase: Some(t.phase),
                    })
                    .collect(),
            },
            secondary_positions: c.secondary_positions.clone(),
            monitoring_positions: c.monitoring_positions.clone(),
            virtual_positions: c.virtual_positions.clone(),
            speed_of_sound: c.speed_of_sound,
            sample_rate: c.sample_rate,
            duration: c.duration,
            rng_seed: c.rng_seed,
        }
    }
}
