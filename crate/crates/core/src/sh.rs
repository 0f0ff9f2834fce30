//! Spherical-harmonic soundfield interpolation.
//!
//! Pressures measured on a sphere of radius `r` are projected onto real
//! orthonormal spherical harmonics sample by sample. Each coefficient series
//! is then moved to a new radius `r_s` in the frequency domain by the ratio
//! `j_u(k r_s) / j_u(k r)` of spherical Bessel functions, evaluated at every
//! DFT bin, and re-synthesised at the target direction.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::{cart_to_sph, Point3};
use crate::signal::SampledSignal;

/// Highest order supported by [`spherical_bessel_j`].
pub const MAX_BESSEL_ORDER: usize = 4;

/// Bessel denominators smaller than this are clamped away from zero.
pub const BESSEL_CLAMP: f64 = 1e-6;

/// Below this argument the power series is used instead of the closed forms,
/// which lose digits to cancellation near the origin.
const BESSEL_SERIES_LIMIT: f64 = 2.0;

/// Order `u >= 0` and degree `|v| <= u` of a spherical harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ShIndex {
    pub order: usize,
    pub degree: i64,
}

impl ShIndex {
    pub fn new(order: usize, degree: i64) -> Option<Self> {
        (degree.unsigned_abs() as usize <= order).then_some(Self { order, degree })
    }

    /// Position in the `(u, v)` ordering `u² + u + v`.
    pub fn linear(&self) -> usize {
        ((self.order * self.order + self.order) as i64 + self.degree) as usize
    }

    /// All indices up to `max_order`, in linear order.
    pub fn up_to(max_order: usize) -> Vec<ShIndex> {
        (0..=max_order)
            .flat_map(|u| (-(u as i64)..=u as i64).map(move |v| ShIndex { order: u, degree: v }))
            .collect()
    }
}

/// Number of harmonics up to and including `max_order`.
pub fn num_harmonics(max_order: usize) -> usize {
    (max_order + 1) * (max_order + 1)
}

/// Associated Legendre function `P_l^m(x)` without the Condon–Shortley phase.
fn legendre(l: usize, m: usize, x: f64) -> f64 {
    let somx2 = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
    let mut pmm = 1.0;
    let mut fact = 1.0;
    for _ in 0..m {
        pmm *= fact * somx2;
        fact += 2.0;
    }
    if l == m {
        return pmm;
    }
    let mut pmmp1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pmmp1;
    }
    let mut pll = 0.0;
    for ll in (m + 2)..=l {
        pll = ((2 * ll - 1) as f64 * x * pmmp1 - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pmmp1;
        pmmp1 = pll;
    }
    pll
}

fn factorial_ratio(l: usize, m: usize) -> f64 {
    // (l - m)! / (l + m)!
    ((l - m + 1)..=(l + m)).fold(1.0, |acc, k| acc / k as f64)
}

/// Real orthonormal spherical harmonic `Y_u^v(θ, φ)`: cosine in `φ` for
/// `v > 0`, sine for `v < 0`.
pub fn real_sh(idx: ShIndex, theta: f64, phi: f64) -> f64 {
    let l = idx.order;
    let m = idx.degree.unsigned_abs() as usize;
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * factorial_ratio(l, m)).sqrt();
    let p = legendre(l, m, theta.cos());
    match idx.degree {
        0 => norm * p,
        v if v > 0 => 2f64.sqrt() * norm * p * (m as f64 * phi).cos(),
        _ => 2f64.sqrt() * norm * p * (m as f64 * phi).sin(),
    }
}

fn bessel_series(order: usize, x: f64) -> f64 {
    let mut lead = 1.0;
    for k in 0..order {
        lead *= x / (2 * k + 3) as f64;
    }
    // x^u / (2u+1)!!, the k = 0 loop above starts the double factorial at 3
    let mut term = 1.0;
    let mut sum = 1.0;
    let half_sq = -0.5 * x * x;
    for k in 1..60 {
        term *= half_sq / (k * (2 * order + 2 * k + 1)) as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// Spherical Bessel function of the first kind, orders 0 through 4, `x >= 0`.
///
/// # Panics
///
/// If `order` exceeds [`MAX_BESSEL_ORDER`].
pub fn spherical_bessel_j(order: usize, x: f64) -> f64 {
    assert!(order <= MAX_BESSEL_ORDER, "spherical Bessel order {order} not supported");
    let x = x.abs();
    if x < BESSEL_SERIES_LIMIT {
        return bessel_series(order, x);
    }
    let (s, c) = x.sin_cos();
    let (x2, x3, x4) = (x * x, x * x * x, x * x * x * x);
    match order {
        0 => s / x,
        1 => s / x2 - c / x,
        2 => (3.0 / x2 - 1.0) * s / x - 3.0 * c / x2,
        3 => (15.0 / x3 - 6.0 / x) * s / x - (15.0 / x2 - 1.0) * c / x,
        4 => (105.0 / x4 - 45.0 / x2 + 1.0) * s / x - (105.0 / x3 - 10.0 / x) * c / x,
        _ => unreachable!(),
    }
}

/// Truncation order `⌈2π f r / c⌉`; arguments below `1e-12` give 0.
pub fn max_order(max_frequency: f64, radius: f64, c: f64) -> usize {
    let arg = 2.0 * PI * max_frequency * radius / c;
    if arg < 1e-12 {
        return 0;
    }
    // tolerate rounding when the argument is an exact integer
    (arg - 1e-9).ceil().max(1.0) as usize
}

/// Spherical-harmonic coefficient time series `α_{u,v}(n)` measured at one radius.
#[derive(Debug, Clone, PartialEq)]
pub struct ShCoeffSeries {
    pub max_order: usize,
    pub fit_radius: f64,
    pub sample_rate: f64,
    pub start_time: f64,
    /// One series per harmonic, in [`ShIndex::up_to`] order.
    pub coeffs: Vec<Vec<f64>>,
}

impl ShCoeffSeries {
    pub fn num_samples(&self) -> usize {
        self.coeffs.first().map_or(0, Vec::len)
    }

    pub fn coeff(&self, idx: ShIndex) -> &[f64] {
        &self.coeffs[idx.linear()]
    }

    /// `Σ α_{u,v}(n) Y_u^v(θ, φ)` at every sample.
    pub fn evaluate(&self, theta: f64, phi: f64) -> Result<SampledSignal> {
        let weights: Vec<f64> = ShIndex::up_to(self.max_order)
            .into_iter()
            .map(|i| real_sh(i, theta, phi))
            .collect();
        let samples = (0..self.num_samples())
            .map(|n| weights.iter().zip(&self.coeffs).map(|(w, a)| w * a[n]).sum())
            .collect();
        SampledSignal::new(self.sample_rate, self.start_time, samples)
    }
}

fn sh_matrix(directions: &[(f64, f64)], max_order: usize) -> DMatrix<f64> {
    let idx = ShIndex::up_to(max_order);
    DMatrix::from_fn(directions.len(), idx.len(), |q, k| {
        let (theta, phi) = directions[q];
        real_sh(idx[k], theta, phi)
    })
}

/// Least-squares fit of microphone signals on a common sphere onto harmonics
/// up to `max_order`.
///
/// `reg` is a ridge parameter relative to the largest singular value of the
/// harmonic matrix: each sample solves
/// `min ‖Y α − p‖² + (reg σ_max)² ‖α‖²`. With `reg > 0` an underdetermined
/// system resolves to (approximately) the minimum-norm solution; `reg = 0`
/// uses the exact pseudo-inverse.
pub fn sh_fit(positions: &[Point3], signals: &[SampledSignal], max_order: usize, reg: f64) -> Result<ShCoeffSeries> {
    if positions.is_empty() || signals.is_empty() {
        return Err(Error::EmptySignals);
    }
    if positions.len() != signals.len() {
        return Err(Error::SignalMismatch(format!(
            "{} positions but {} signals",
            positions.len(),
            signals.len()
        )));
    }
    for s in &signals[1..] {
        signals[0].check_combinable(s)?;
    }
    if !(reg >= 0.0) {
        return Err(Error::InvalidConfig(format!("regularisation {reg} must be >= 0")));
    }
    let sph: Vec<_> = positions.iter().map(|&p| cart_to_sph(p)).collect();
    let radius = sph[0].r;
    if let Some(off) = sph.iter().find(|s| (s.r - radius).abs() > 1e-6) {
        return Err(Error::RadiusMismatch { expected: radius, found: off.r });
    }
    let dirs: Vec<(f64, f64)> = sph.iter().map(|s| (s.theta, s.phi)).collect();
    let y = sh_matrix(&dirs, max_order);
    let (q, k) = y.shape();

    // fit operator: α(n) = M p(n)
    let fit = if reg == 0.0 {
        y.clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
    } else {
        let sigma_max = y.singular_values().max();
        let damping = reg * sigma_max;
        let mut aug = DMatrix::zeros(q + k, k);
        aug.rows_mut(0, q).copy_from(&y);
        for i in 0..k {
            aug[(q + i, i)] = damping;
        }
        let qr = aug.qr();
        let r = qr.r();
        let qt = qr.q().transpose();
        // right-hand sides are the identity on the first q rows
        let rhs = qt.columns(0, q).into_owned();
        r.solve_upper_triangular(&rhs)
            .ok_or_else(|| Error::InvalidConfig("singular harmonic fit".into()))?
    };

    let n = signals[0].len();
    let mut coeffs = vec![vec![0.0; n]; k];
    let mut p = DVector::zeros(q);
    for t in 0..n {
        for (j, s) in signals.iter().enumerate() {
            p[j] = s.samples[t];
        }
        let a = &fit * &p;
        for (i, series) in coeffs.iter_mut().enumerate() {
            series[t] = a[i];
        }
    }
    Ok(ShCoeffSeries {
        max_order,
        fit_radius: radius,
        sample_rate: signals[0].sample_rate,
        start_time: signals[0].start_time,
        coeffs,
    })
}

/// Ratio `j_u(2π f r_s / c) / j_u(2π f r / c)` applied at DFT frequency `f`.
///
/// At DC the ratio takes its small-argument limit `(r_s / r)^u`. Away from
/// the origin the denominator is clamped to magnitude [`BESSEL_CLAMP`] near
/// zeros of `j_u`; below the first zero (`x < u + 2`) it never vanishes and is
/// used as is.
pub fn bessel_ratio(order: usize, frequency: f64, target_radius: f64, fit_radius: f64, c: f64) -> f64 {
    if frequency == 0.0 {
        return (target_radius / fit_radius).powi(order as i32);
    }
    let k = 2.0 * PI * frequency / c;
    let num = spherical_bessel_j(order, k * target_radius);
    let x = k * fit_radius;
    let mut den = spherical_bessel_j(order, x);
    if x >= order as f64 + 2.0 && den.abs() < BESSEL_CLAMP {
        den = if den < 0.0 { -BESSEL_CLAMP } else { BESSEL_CLAMP };
    }
    num / den
}

/// Moves every coefficient series from the fit radius to `target_radius`.
pub fn sh_translate(series: &ShCoeffSeries, target_radius: f64, c: f64) -> Result<ShCoeffSeries> {
    let n = series.num_samples();
    if n == 0 {
        return Err(Error::EmptySignal);
    }
    if series.max_order > MAX_BESSEL_ORDER {
        return Err(Error::InvalidConfig(format!(
            "harmonic order {} above supported {MAX_BESSEL_ORDER}",
            series.max_order
        )));
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let bin_freq = |b: usize| b.min(n - b) as f64 * series.sample_rate / n as f64;

    let ratios: Vec<Vec<f64>> = (0..=series.max_order)
        .map(|u| {
            (0..n)
                .map(|b| bessel_ratio(u, bin_freq(b), target_radius, series.fit_radius, c))
                .collect()
        })
        .collect();

    let coeffs = ShIndex::up_to(series.max_order)
        .iter()
        .zip(&series.coeffs)
        .map(|(idx, a)| {
            let mut buf: Vec<Complex<f64>> = a.iter().map(|&v| Complex::new(v, 0.0)).collect();
            fwd.process(&mut buf);
            for (z, r) in buf.iter_mut().zip(&ratios[idx.order]) {
                *z *= r;
            }
            inv.process(&mut buf);
            buf.iter().map(|z| z.re / n as f64).collect()
        })
        .collect();
    Ok(ShCoeffSeries {
        fit_radius: target_radius,
        coeffs,
        ..series.clone()
    })
}

/// Reconstructs the pressure signal at `target` from fitted coefficients.
pub fn sh_interpolate(series: &ShCoeffSeries, target: Point3, c: f64) -> Result<SampledSignal> {
    let s = cart_to_sph(target);
    sh_translate(series, s.r, c)?.evaluate(s.theta, s.phi)
}

/// Interpolates at many points sharing one radius, translating only once.
pub fn sh_interpolate_on_sphere(series: &ShCoeffSeries, targets: &[Point3], c: f64) -> Result<Vec<SampledSignal>> {
    let Some(first) = targets.first() else {
        return Ok(Vec::new());
    };
    let radius = first.norm();
    if let Some(p) = targets.iter().find(|p| (p.norm() - radius).abs() > 1e-9) {
        return Err(Error::RadiusMismatch { expected: radius, found: p.norm() });
    }
    let moved = sh_translate(series, radius, c)?;
    targets
        .iter()
        .map(|&p| {
            let s = cart_to_sph(p);
            moved.evaluate(s.theta, s.phi)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sphere_points;

    // 40-digit reference values of j_u(x)
    const BESSEL_TABLE: &[(usize, f64, f64)] = &[
        (0, 0.001, 0.99999983333334166667),
        (0, 0.1, 0.99833416646828152307),
        (0, 1.0, 0.84147098480789650665),
        (0, 1.9, 0.49805267773021815184),
        (0, 2.1, 0.41105207935660655747),
        (0, 5.0, -0.19178485493262769378),
        (0, 30.0, -0.032934387469762059666),
        (1, 0.001, 0.00033333330000000119048),
        (1, 0.01, 0.0033333000001190473986),
        (1, 1.0, 0.30116867893975678925),
        (1, 2.1, 0.43614199236022095671),
        (1, 10.0, 0.078466941798751547092),
        (1, 50.0, -0.019404270511323836996),
        (2, 0.001, 6.6666661904762037037e-8),
        (2, 0.5, 0.016371106607993412617),
        (2, 1.9, 0.18450320420362249147),
        (2, 2.1, 0.21200790972942338069),
        (2, 10.0, 0.077942193628562445468),
        (3, 0.01, 9.5237566138768637227e-9),
        (3, 1.0, 0.0090065811171125162594),
        (3, 2.1, 0.068638745090787092549),
        (3, 5.0, 0.22982061816429601044),
        (3, 30.0, 0.01162460035834002134),
        (4, 0.001, 1.058201010101011026e-15),
        (4, 0.1, 1.0577201502098731878e-7),
        (4, 1.9, 0.01167863373840969211),
        (4, 2.1, 0.016787907239866927808),
        (4, 10.0, -0.10558928511769167252),
        (4, 50.0, -0.0013094776000062202822),
    ];

    #[test]
    fn bessel_matches_reference_table() {
        for &(u, x, want) in BESSEL_TABLE {
            let got = spherical_bessel_j(u, x);
            assert!(((got - want) / want).abs() < 1e-10, "j_{u}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn bessel_limits() {
        assert_eq!(spherical_bessel_j(0, 0.0), 1.0);
        assert_eq!(spherical_bessel_j(1, 0.0), 0.0);
        assert_eq!(spherical_bessel_j(2, 0.0), 0.0);
        assert!(spherical_bessel_j(0, PI).abs() < 1e-15);
        assert!((spherical_bessel_j(1, 1.0) - 0.3011687).abs() < 1e-6);
    }

    #[test]
    fn bessel_continuous_across_series_switch() {
        for u in 0..=4 {
            let below = spherical_bessel_j(u, BESSEL_SERIES_LIMIT - 1e-12);
            let above = spherical_bessel_j(u, BESSEL_SERIES_LIMIT);
            assert!(((below - above) / above).abs() < 1e-10, "order {u}");
        }
    }

    #[test]
    fn low_order_harmonics() {
        let y00 = ShIndex::new(0, 0).unwrap();
        for &(t, p) in &[(0.0, 0.0), (1.0, 2.0), (2.5, 5.0)] {
            assert!((real_sh(y00, t, p) - 0.2820948).abs() < 1e-7);
        }
        let y10 = ShIndex::new(1, 0).unwrap();
        assert!((real_sh(y10, 0.0, 0.0) - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
        assert!((real_sh(y10, 0.0, 0.0) - 0.4886025).abs() < 1e-7);
        // closed forms for order 1 without the Condon-Shortley sign
        let (t, p): (f64, f64) = (0.7, 1.3);
        let c = (3.0 / (4.0 * PI)).sqrt();
        let y11 = real_sh(ShIndex::new(1, 1).unwrap(), t, p);
        let y1m1 = real_sh(ShIndex::new(1, -1).unwrap(), t, p);
        assert!((y11 - c * t.sin() * p.cos()).abs() < 1e-14);
        assert!((y1m1 - c * t.sin() * p.sin()).abs() < 1e-14);
    }

    #[test]
    fn index_validity_and_order() {
        assert!(ShIndex::new(1, 2).is_none());
        assert!(ShIndex::new(2, -2).is_some());
        let all = ShIndex::up_to(3);
        assert_eq!(all.len(), num_harmonics(3));
        for (i, idx) in all.iter().enumerate() {
            assert_eq!(idx.linear(), i);
        }
    }

    fn gram(max_order: usize, n: usize) -> DMatrix<f64> {
        let pts = sphere_points(1.0, n, Point3::ORIGIN);
        let dirs: Vec<_> = pts
            .iter()
            .map(|p| {
                let s = cart_to_sph(*p);
                (s.theta, s.phi)
            })
            .collect();
        let y = sh_matrix(&dirs, max_order);
        y.transpose() * y * (4.0 * PI / n as f64)
    }

    #[test]
    fn orthonormal_under_quadrature() {
        let g = gram(3, 10_000);
        let k = num_harmonics(3);
        let dev = (g - DMatrix::<f64>::identity(k, k)).abs().max();
        assert!(dev < 1e-3, "max Gram deviation {dev}");
    }

    #[test]
    fn max_order_cases() {
        assert_eq!(max_order(500.0, 0.15 * 3f64.sqrt(), 343.0), 3);
        assert_eq!(max_order(343.0 / (2.0 * PI), 1.0, 343.0), 1);
        assert_eq!(max_order(1e-3, 1e-3, 343.0), 1);
        assert_eq!(max_order(1e-12, 1e-3, 343.0), 0);
    }

    fn signals_from(points: &[Point3], n: usize, f: impl Fn(Point3, usize) -> f64) -> Vec<SampledSignal> {
        points
            .iter()
            .map(|&p| SampledSignal::new(1000.0, 0.0, (0..n).map(|t| f(p, t)).collect()).unwrap())
            .collect()
    }

    #[test]
    fn constant_field_is_pure_monopole() {
        let pts = sphere_points(0.3, 16, Point3::ORIGIN);
        let sig = signals_from(&pts, 4, |_, _| 2.5);
        let fit = sh_fit(&pts, &sig, 1, 1e-9).unwrap();
        for (i, idx) in ShIndex::up_to(1).iter().enumerate() {
            let want = if i == 0 { 2.5 * (4.0 * PI).sqrt() } else { 0.0 };
            for &a in fit.coeff(*idx) {
                assert!((a - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dipole_mode_is_recovered() {
        let pts = sphere_points(0.2, 16, Point3::ORIGIN);
        let y10 = ShIndex::new(1, 0).unwrap();
        let sig = signals_from(&pts, 3, |p, _| {
            let s = cart_to_sph(p);
            real_sh(y10, s.theta, s.phi)
        });
        let fit = sh_fit(&pts, &sig, 1, 1e-9).unwrap();
        for idx in ShIndex::up_to(1) {
            for &a in fit.coeff(idx) {
                if idx == y10 {
                    assert!((a - 1.0).abs() < 1e-6);
                } else {
                    assert!(a.abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn fit_errors() {
        let pts = vec![Point3::new(0.1, 0.0, 0.0), Point3::new(0.0, 0.2, 0.0)];
        let sig = signals_from(&pts, 3, |_, _| 1.0);
        assert!(matches!(sh_fit(&pts, &sig, 1, 1e-6), Err(Error::RadiusMismatch { .. })));
        assert!(matches!(sh_fit(&[], &[], 1, 1e-6), Err(Error::EmptySignals)));
    }

    #[test]
    fn identity_translation() {
        let pts = sphere_points(0.25, 20, Point3::ORIGIN);
        let sig = signals_from(&pts, 64, |p, t| (0.3 * t as f64 + 5.0 * p.x).sin() + p.z * p.y);
        let fit = sh_fit(&pts, &sig, 2, 1e-9).unwrap();
        let target = Point3::from_spherical(0.25, 1.1, 4.0);
        let got = sh_interpolate(&fit, target, 343.0).unwrap();
        let direct = fit.evaluate(1.1, 4.0).unwrap();
        for (a, b) in got.samples.iter().zip(&direct.samples) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_field_any_radius() {
        let pts = sphere_points(0.25, 16, Point3::ORIGIN);
        let sig = signals_from(&pts, 32, |_, _| 1.5);
        let fit = sh_fit(&pts, &sig, 2, 1e-9).unwrap();
        let got = sh_interpolate(&fit, Point3::new(0.0, 0.05, 0.02), 343.0).unwrap();
        for v in got.samples {
            assert!((v - 1.5).abs() < 1e-9);
        }
    }

    #[test]
    fn dc_ratio_matches_small_argument_limit() {
        for u in 0..=4 {
            let limit = bessel_ratio(u, 0.0, 0.1, 0.26, 343.0);
            let near = bessel_ratio(u, 1e-3, 0.1, 0.26, 343.0);
            assert!(((limit - near) / limit).abs() < 1e-8, "order {u}");
        }
    }
}
