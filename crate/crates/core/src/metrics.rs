//! Energy-ratio metrics reported in decibels.

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// Decibel values below this are reported as the floor.
pub const DB_FLOOR: f64 = -300.0;

/// `10 log10(ratio)`, floored at [`DB_FLOOR`].
pub fn to_db(ratio: f64) -> f64 {
    if ratio <= 0.0 {
        return DB_FLOOR;
    }
    (10.0 * ratio.log10()).max(DB_FLOOR)
}

/// `Σ (a - b)² / Σ a²` summed over every signal and sample.
fn residual_ratio<'a>(pairs: impl Iterator<Item = (&'a [f64], &'a [f64])>) -> Result<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in pairs {
        for (x, y) in a.iter().zip(b) {
            num += (x - y) * (x - y);
            den += x * x;
        }
    }
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}

fn check_lists(a: &[SampledSignal], b: &[SampledSignal]) -> Result<()> {
    if a.is_empty() {
        return Err(Error::EmptySignals);
    }
    if a.len() != b.len() {
        return Err(Error::SignalMismatch(format!("{} signals against {}", a.len(), b.len())));
    }
    for (x, y) in a.iter().zip(b) {
        if x.len() != y.len() {
            return Err(Error::SignalMismatch(format!("lengths {} and {}", x.len(), y.len())));
        }
    }
    Ok(())
}

/// Normalised interpolation error `Σ (p - p̂)² / Σ p²` over all points and samples.
pub fn interpolation_error(truth: &[SampledSignal], estimate: &[SampledSignal]) -> Result<f64> {
    check_lists(truth, estimate)?;
    residual_ratio(truth.iter().zip(estimate).map(|(t, e)| (&t.samples[..], &e.samples[..])))
}

/// Noise reduction ratio `Σ e² / Σ p²` of residual against primary signals,
/// returned with its decibel value.
pub fn noise_reduction(residuals: &[SampledSignal], primaries: &[SampledSignal]) -> Result<(f64, f64)> {
    check_lists(primaries, residuals)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (e, p) in residuals.iter().zip(primaries) {
        num += e.energy();
        den += p.energy();
    }
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let ratio = num / den;
    Ok((ratio, to_db(ratio)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> SampledSignal {
        SampledSignal::new(10.0, 0.0, v.to_vec()).unwrap()
    }

    #[test]
    fn interpolation_error_cases() {
        let truth = vec![s(&[1.0, -2.0, 0.5]), s(&[0.3, 0.0, 4.0])];
        assert_eq!(interpolation_error(&truth, &truth).unwrap(), 0.0);
        assert_eq!(to_db(interpolation_error(&truth, &truth).unwrap()), DB_FLOOR);

        let zero: Vec<_> = truth.iter().map(|t| t.scaled(0.0)).collect();
        assert!((interpolation_error(&truth, &zero).unwrap() - 1.0).abs() < 1e-15);

        let scaled: Vec<_> = truth.iter().map(|t| t.scaled(0.9)).collect();
        let e = interpolation_error(&truth, &scaled).unwrap();
        assert!((e - 0.01).abs() < 1e-12);
        assert!((to_db(e) + 20.0).abs() < 1e-9);
    }

    #[test]
    fn zero_truth_is_an_error() {
        let truth = vec![s(&[0.0, 0.0])];
        assert!(matches!(interpolation_error(&truth, &truth), Err(Error::ZeroDenominator)));
        assert!(matches!(noise_reduction(&truth, &truth), Err(Error::ZeroDenominator)));
    }

    #[test]
    fn mismatched_lists() {
        let a = vec![s(&[1.0, 2.0])];
        assert!(interpolation_error(&a, &[]).is_err());
        assert!(interpolation_error(&a, &[s(&[1.0])]).is_err());
        assert!(interpolation_error(&[], &[]).is_err());
    }

    #[test]
    fn noise_reduction_cases() {
        let p = vec![s(&[1.0, -1.0, 0.5]), s(&[2.0, 0.1, -0.3])];
        assert_eq!(noise_reduction(&p, &p).unwrap().1, 0.0);
        let tenth: Vec<_> = p.iter().map(|x| x.scaled(0.1)).collect();
        assert!((noise_reduction(&tenth, &p).unwrap().1 + 20.0).abs() < 1e-9);
        let silent: Vec<_> = p.iter().map(|x| x.scaled(0.0)).collect();
        assert_eq!(noise_reduction(&silent, &p).unwrap().1, DB_FLOOR);
    }
}
