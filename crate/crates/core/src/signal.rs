//! Uniformly sampled pressure signals and FIR filters.

use crate::error::{Error, Result};

/// A uniformly sampled pressure time series.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub sample_rate: f64,
    pub start_time: f64,
    pub samples: Vec<f64>,
}

impl SampledSignal {
    pub fn new(sample_rate: f64, start_time: f64, samples: Vec<f64>) -> Result<Self> {
        if !(sample_rate > 0.0) {
            return Err(Error::InvalidConfig(format!("sample rate {sample_rate} must be positive")));
        }
        if samples.is_empty() {
            return Err(Error::EmptySignal);
        }
        Ok(Self { sample_rate, start_time, samples })
    }

    /// Samples `f(t)` at `t = start_time + k / sample_rate` for `k < len`.
    pub fn from_fn(sample_rate: f64, start_time: f64, len: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = (0..len).map(|k| f(start_time + k as f64 / sample_rate)).collect();
        Self::new(sample_rate, start_time, samples)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }

    /// Sum of squared samples.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }

    /// Sample `n` of the periodic extension of this signal; negative indices wrap.
    pub fn periodic(&self, n: i64) -> f64 {
        self.samples[n.rem_euclid(self.len() as i64) as usize]
    }

    pub fn check_combinable(&self, other: &SampledSignal) -> Result<()> {
        if self.sample_rate != other.sample_rate {
            return Err(Error::SignalMismatch(format!(
                "sample rates {} and {}",
                self.sample_rate, other.sample_rate
            )));
        }
        if self.start_time != other.start_time {
            return Err(Error::SignalMismatch(format!(
                "start times {} and {}",
                self.start_time, other.start_time
            )));
        }
        if self.len() != other.len() {
            return Err(Error::SignalMismatch(format!("lengths {} and {}", self.len(), other.len())));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &SampledSignal) -> Result<SampledSignal> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &SampledSignal) -> Result<SampledSignal> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &SampledSignal, f: impl Fn(f64, f64) -> f64) -> Result<SampledSignal> {
        self.check_combinable(other)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect();
        Ok(SampledSignal { samples, ..*self })
    }

    pub fn scaled(&self, gain: f64) -> SampledSignal {
        SampledSignal {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            ..*self
        }
    }
}

/// Finite impulse response filter.
#[derive(Debug, Clone, PartialEq)]
pub struct FirFilter {
    taps: Vec<f64>,
    sample_rate: f64,
}

impl FirFilter {
    pub fn new(taps: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidConfig("FIR filter needs at least one tap".into()));
        }
        if let Some(bad) = taps.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite FIR tap {bad}")));
        }
        if !(sample_rate > 0.0) {
            return Err(Error::InvalidConfig(format!("sample rate {sample_rate} must be positive")));
        }
        Ok(Self { taps, sample_rate })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// Causal convolution from a zero initial state, truncated to the input length.
    pub fn filter(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.is_empty() {
            return Err(Error::EmptySignal);
        }
        let out = (0..input.len())
            .map(|n| {
                self.taps
                    .iter()
                    .take(n + 1)
                    .enumerate()
                    .map(|(k, h)| h * input[n - k])
                    .sum()
            })
            .collect();
        Ok(out)
    }

    pub fn apply(&self, signal: &SampledSignal) -> Result<SampledSignal> {
        if signal.sample_rate != self.sample_rate {
            return Err(Error::SignalMismatch(format!(
                "filter at {} Hz applied to signal at {} Hz",
                self.sample_rate, signal.sample_rate
            )));
        }
        Ok(SampledSignal {
            samples: self.filter(&signal.samples)?,
            ..*signal
        })
    }

    /// Output sample at `n` for an input given as a function of the (possibly
    /// negative) sample index.
    pub fn output_at(&self, n: i64, input: impl Fn(i64) -> f64) -> f64 {
        self.taps.iter().enumerate().map(|(k, h)| h * input(n - k as i64)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(v: Vec<f64>) -> SampledSignal {
        SampledSignal::new(100.0, 0.0, v).unwrap()
    }

    #[test]
    fn rejects_empty_and_bad_rate() {
        assert!(matches!(SampledSignal::new(10.0, 0.0, vec![]), Err(Error::EmptySignal)));
        assert!(SampledSignal::new(0.0, 0.0, vec![1.0]).is_err());
        assert!(SampledSignal::new(f64::NAN, 0.0, vec![1.0]).is_err());
    }

    #[test]
    fn combination_requires_matching_grid() {
        let a = sig(vec![1.0, 2.0]);
        let b = sig(vec![0.5, 0.5]);
        assert_eq!(a.try_add(&b).unwrap().samples, vec![1.5, 2.5]);
        assert_eq!(a.try_sub(&b).unwrap().samples, vec![0.5, 1.5]);
        let shifted = SampledSignal { start_time: 0.01, ..b.clone() };
        assert!(a.try_add(&shifted).is_err());
        let short = sig(vec![1.0]);
        assert!(a.try_add(&short).is_err());
        let other_rate = SampledSignal { sample_rate: 50.0, ..b };
        assert!(a.try_sub(&other_rate).is_err());
    }

    #[test]
    fn periodic_wraps_negative_indices() {
        let a = sig(vec![1.0, 2.0, 3.0]);
        assert_eq!(a.periodic(-1), 3.0);
        assert_eq!(a.periodic(4), 2.0);
    }

    #[test]
    fn fir_matches_direct_convolution() {
        let h = FirFilter::new(vec![0.5, -0.25, 0.125], 100.0).unwrap();
        let x: Vec<f64> = (0..6).map(|k| k as f64).collect();
        let y = h.filter(&x).unwrap();
        let expected = [0.0, 0.5, 0.75, 1.125, 1.5, 1.875];
        for (a, b) in y.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(h.output_at(5, |n| if n >= 0 { n as f64 } else { 0.0 }), 1.875);
    }

    #[test]
    fn fir_rejects_empty_input_and_taps() {
        let h = FirFilter::new(vec![1.0], 100.0).unwrap();
        assert!(matches!(h.filter(&[]), Err(Error::EmptySignal)));
        assert!(FirFilter::new(vec![], 100.0).is_err());
        assert!(FirFilter::new(vec![f64::INFINITY], 100.0).is_err());
    }
}
