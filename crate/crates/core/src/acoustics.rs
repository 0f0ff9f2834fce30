//! Free-field propagation of tonal sources and FIR models of acoustic paths.
//!
//! A monopole of strength `A` at distance `d` produces `A / (4π d)` times the
//! source waveform delayed by `d / c`. Ground-truth pressures use that delay
//! exactly inside the sine argument; [`make_path_fir`] approximates the same
//! transfer with a Blackman-windowed sinc so that arbitrary signals (the
//! controller outputs) can be propagated sample by sample.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::signal::{FirFilter, SampledSignal};

/// Sources closer than this to a receiver are rejected.
pub const MIN_DISTANCE: f64 = 1e-9;

/// Half-width of the windowed-sinc kernel; the kernel spans `2 * 16 + 1` taps.
pub const SINC_HALF_WIDTH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToneComponent {
    pub frequency: f64,
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TonalSource {
    pub position: Point3,
    pub components: Vec<ToneComponent>,
}

impl TonalSource {
    pub fn new(position: Point3, components: Vec<ToneComponent>) -> Result<Self> {
        let src = Self { position, components };
        src.validate()?;
        Ok(src)
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::InvalidConfig("tonal source has no components".into()));
        }
        for (i, c) in self.components.iter().enumerate() {
            if !(c.frequency > 0.0) || !c.frequency.is_finite() {
                return Err(Error::InvalidConfig(format!("tone frequency {} must be positive", c.frequency)));
            }
            if !(c.amplitude >= 0.0) || !c.amplitude.is_finite() {
                return Err(Error::InvalidConfig(format!("tone amplitude {} must be >= 0", c.amplitude)));
            }
            if !c.phase.is_finite() {
                return Err(Error::InvalidConfig("tone phase must be finite".into()));
            }
            if self.components[..i].iter().any(|o| o.frequency == c.frequency) {
                return Err(Error::InvalidConfig(format!("duplicate tone frequency {}", c.frequency)));
            }
        }
        Ok(())
    }

    pub fn max_frequency(&self) -> f64 {
        self.components.iter().map(|c| c.frequency).fold(0.0, f64::max)
    }

    /// Source waveform `Σ A sin(2π f t + φ)`.
    pub fn emission(&self, t: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.amplitude * (2.0 * PI * c.frequency * t + c.phase).sin())
            .sum()
    }

    /// Analytic free-field pressure at `receiver` and time `t`.
    pub fn pressure_at(&self, receiver: &Point3, t: f64, c: f64) -> f64 {
        let d = self.position.distance(receiver);
        self.emission(t - d / c) / (4.0 * PI * d)
    }

    /// Common period of all tones, when their frequencies share a divisor on a
    /// micro-hertz grid. `None` for incommensurate tones.
    pub fn fundamental_period(&self) -> Option<f64> {
        const GRID: f64 = 1e6;
        let mut g = 0u64;
        for c in &self.components {
            let units = (c.frequency * GRID).round();
            if (units / GRID - c.frequency).abs() > 1e-9 * c.frequency || units < 1.0 {
                return None;
            }
            g = gcd(g, units as u64);
        }
        (g > 0).then(|| GRID / g as f64)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn check_nyquist(source: &TonalSource, sample_rate: f64) -> Result<()> {
    let nyquist = sample_rate / 2.0;
    match source.components.iter().find(|c| c.frequency >= nyquist) {
        Some(c) => Err(Error::AboveNyquist { frequency: c.frequency, nyquist }),
        None => Ok(()),
    }
}

/// Number of samples in a signal of `duration` seconds.
pub fn sample_count(sample_rate: f64, duration: f64) -> usize {
    (duration * sample_rate).round() as usize
}

/// Samples the analytic free-field pressure of `source` at `receiver` for
/// `t = k / sample_rate`, `k < round(duration * sample_rate)`.
pub fn propagate_tonal(
    source: &TonalSource,
    receiver: Point3,
    sample_rate: f64,
    duration: f64,
    c: f64,
) -> Result<SampledSignal> {
    let d = source.position.distance(&receiver);
    if d < MIN_DISTANCE {
        return Err(Error::ZeroDistance { distance: d });
    }
    if !(c > 0.0) {
        return Err(Error::InvalidConfig(format!("speed of sound {c} must be positive")));
    }
    check_nyquist(source, sample_rate)?;
    let n = sample_count(sample_rate, duration);
    SampledSignal::from_fn(sample_rate, 0.0, n, |t| source.pressure_at(&receiver, t, c))
}

fn blackman(x: f64, half_width: f64) -> f64 {
    let a = PI * x / half_width;
    0.42 + 0.5 * a.cos() + 0.08 * (2.0 * a).cos()
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Windowed-sinc fractional-delay model of the free-field path between two points.
pub fn make_path_fir(
    source_pos: Point3,
    receiver_pos: Point3,
    sample_rate: f64,
    num_taps: usize,
    c: f64,
) -> Result<FirFilter> {
    let d = source_pos.distance(&receiver_pos);
    if d < MIN_DISTANCE {
        return Err(Error::ZeroDistance { distance: d });
    }
    let delay = d / c * sample_rate;
    if num_taps <= SINC_HALF_WIDTH || delay.floor() >= (num_taps - SINC_HALF_WIDTH) as f64 {
        return Err(Error::DelayExceedsFilter { delay_samples: delay, num_taps });
    }
    let gain = 1.0 / (4.0 * PI * d);
    // window reaches zero one sample beyond the half-width
    let edge = SINC_HALF_WIDTH as f64 + 1.0;
    let taps = (0..num_taps)
        .map(|k| {
            let x = k as f64 - delay;
            if x.abs() < edge {
                gain * sinc(x) * blackman(x, edge)
            } else {
                0.0
            }
        })
        .collect();
    FirFilter::new(taps, sample_rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(f: f64, a: f64, phase: f64) -> ToneComponent {
        ToneComponent { frequency: f, amplitude: a, phase }
    }

    fn source_at(p: Point3, tones: Vec<ToneComponent>) -> TonalSource {
        TonalSource::new(p, tones).unwrap()
    }

    #[test]
    fn unit_amplitude_at_one_meter() {
        let f = 300.0;
        let src = source_at(Point3::ORIGIN, vec![tone(f, 4.0 * PI, 0.0)]);
        let s = propagate_tonal(&src, Point3::new(1.0, 0.0, 0.0), 24_000.0, 0.01, 343.0).unwrap();
        assert_eq!(s.len(), 240);
        for (k, v) in s.samples.iter().enumerate() {
            let t = k as f64 / 24_000.0;
            assert!((v - (2.0 * PI * f * (t - 1.0 / 343.0)).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn primary_delay_to_origin() {
        let d = Point3::new(0.6, 0.8, 1.0).norm();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert!((d / 343.0 * 1e3 - 4.1231).abs() < 1e-4);
    }

    #[test]
    fn inverse_distance_law() {
        let f = 250.0;
        let c = 343.0;
        let src = source_at(Point3::ORIGIN, vec![tone(f, 1.0, 0.3)]);
        let near = Point3::new(0.4, 0.0, 0.0);
        let far = Point3::new(0.8, 0.0, 0.0);
        for k in 0..50 {
            let t = k as f64 * 1e-4;
            // doubling the distance halves the amplitude and adds a delay of d/c
            let a = src.pressure_at(&near, t - 0.4 / c, c);
            let b = src.pressure_at(&far, t, c);
            assert!((a - 2.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_distance_and_nyquist_errors() {
        let src = source_at(Point3::ORIGIN, vec![tone(100.0, 1.0, 0.0)]);
        assert!(matches!(
            propagate_tonal(&src, Point3::ORIGIN, 1000.0, 0.1, 343.0),
            Err(Error::ZeroDistance { .. })
        ));
        let hi = source_at(Point3::ORIGIN, vec![tone(500.0, 1.0, 0.0)]);
        assert!(matches!(
            propagate_tonal(&hi, Point3::new(1.0, 0.0, 0.0), 1000.0, 0.1, 343.0),
            Err(Error::AboveNyquist { .. })
        ));
    }

    #[test]
    fn source_validation() {
        assert!(TonalSource::new(Point3::ORIGIN, vec![]).is_err());
        assert!(TonalSource::new(Point3::ORIGIN, vec![tone(100.0, 1.0, 0.0), tone(100.0, 2.0, 1.0)]).is_err());
        assert!(TonalSource::new(Point3::ORIGIN, vec![tone(-1.0, 1.0, 0.0)]).is_err());
        assert!(TonalSource::new(Point3::ORIGIN, vec![tone(1.0, -1.0, 0.0)]).is_err());
    }

    #[test]
    fn fundamental_period_of_headrest_tones() {
        let src = source_at(
            Point3::ORIGIN,
            vec![tone(300.0, 1.0, 0.0), tone(400.0, 1.0, 0.0), tone(500.0, 1.0, 0.0)],
        );
        assert!((src.fundamental_period().unwrap() - 0.01).abs() < 1e-15);
        let odd = source_at(Point3::ORIGIN, vec![tone(PI * 100.0, 1.0, 0.0)]);
        assert!(odd.fundamental_period().is_none());
    }

    #[test]
    fn integer_delay_is_kronecker() {
        let fs = 24_000.0;
        let c = 343.0;
        // 10 samples of delay
        let d = 10.0 * c / fs;
        let fir = make_path_fir(Point3::ORIGIN, Point3::new(d, 0.0, 0.0), fs, 64, c).unwrap();
        let g = 1.0 / (4.0 * PI * d);
        for (k, h) in fir.taps().iter().enumerate() {
            if k == 10 {
                assert!((h - g).abs() < 1e-12 * g);
            } else {
                assert!(h.abs() < 1e-12 * g, "tap {k} = {h}");
            }
        }
    }

    #[test]
    fn fir_path_matches_analytic_tone() {
        let fs = 24_000.0;
        let c = 343.0;
        let src_pos = Point3::new(0.0, 0.5, 0.0);
        let rx = Point3::new(0.15, -0.15, 0.15);
        let src = source_at(src_pos, vec![tone(400.0, 1.0, 0.7)]);
        let fir = make_path_fir(src_pos, rx, fs, 256, c).unwrap();
        let emitted = SampledSignal::from_fn(fs, 0.0, 2400, |t| src.emission(t)).unwrap();
        let modeled = fir.apply(&emitted).unwrap();
        let truth = propagate_tonal(&src, rx, fs, 0.1, c).unwrap();
        let (mut err, mut pow) = (0.0, 0.0);
        for k in 256..2400 {
            err += (modeled.samples[k] - truth.samples[k]).powi(2);
            pow += truth.samples[k].powi(2);
        }
        assert!((err / pow).sqrt() < 1e-2, "relative error {}", (err / pow).sqrt());
    }

    #[test]
    fn delay_must_fit() {
        let fs = 24_000.0;
        let c = 343.0;
        let far = Point3::new(1.0, 0.0, 0.0); // ~70 samples
        assert!(matches!(
            make_path_fir(Point3::ORIGIN, far, fs, 64, c),
            Err(Error::DelayExceedsFilter { .. })
        ));
        assert!(make_path_fir(Point3::ORIGIN, far, fs, 128, c).is_ok());
        assert!(make_path_fir(Point3::ORIGIN, Point3::ORIGIN, fs, 128, c).is_err());
    }
}
