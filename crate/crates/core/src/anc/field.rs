use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::acoustics::make_path_fir;
use crate::anc::AncWeights;
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::metrics::to_db;
use crate::scenario::ScenarioConfig;
use crate::signal::FirFilter;

pub const GRID_SIDE: usize = 21;
pub const GRID_HALF_WIDTH: f64 = 0.2;
pub const GRID_SPACING: f64 = 2.0 * GRID_HALF_WIDTH / (GRID_SIDE - 1) as f64;

/// Steady-state power on the evaluation grid, in dB relative to the largest
/// primary-field power on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    pub points: Vec<Point3>,
    pub primary_db: Vec<f64>,
    pub residual_db: Vec<f64>,
}

/// The 21 × 21 grid over `[-0.2, 0.2]²` at `z = 0`, x varying slowest.
pub fn grid_points() -> Vec<Point3> {
    let coord = |i: usize| -GRID_HALF_WIDTH + i as f64 * GRID_SPACING;
    (0..GRID_SIDE)
        .flat_map(|i| (0..GRID_SIDE).map(move |j| Point3::new(coord(i), coord(j), 0.0)))
        .collect()
}

fn response(taps: &[f64], frequency: f64, sample_rate: f64) -> Complex64 {
    let w = -2.0 * PI * frequency / sample_rate;
    taps.iter()
        .enumerate()
        .map(|(k, &h)| Complex64::from_polar(h, w * k as f64))
        .sum()
}

/// Per-tone phasor analysis of the controlled field with fixed weights. Each
/// tone's steady-state power is `|P + Σ_ℓ S_ℓ D_ℓ|² / 2`, summed over tones.
pub fn field_grid_power(
    scenario: &ScenarioConfig,
    weights: &AncWeights,
    points: &[Point3],
    path_taps: usize,
) -> Result<FieldMap> {
    if weights.num_sources() != scenario.secondary_positions.len() {
        return Err(Error::InvalidConfig(format!(
            "{} weight vectors for {} secondary sources",
            weights.num_sources(),
            scenario.secondary_positions.len()
        )));
    }
    let fs = scenario.sample_rate;
    let c = scenario.speed_of_sound;
    let src = &scenario.primary_source;
    let paths: Vec<Vec<FirFilter>> = points
        .iter()
        .map(|&p| {
            scenario
                .secondary_positions
                .iter()
                .map(|&s| make_path_fir(s, p, fs, path_taps, c))
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut primary = vec![0.0; points.len()];
    let mut residual = vec![0.0; points.len()];
    for tone in &src.components {
        let f = tone.frequency;
        let x = Complex64::from_polar(tone.amplitude, tone.phase);
        let drive: Vec<Complex64> = (0..weights.num_sources())
            .map(|l| -x * response(weights.filter(l), f, fs))
            .collect();
        for (i, p) in points.iter().enumerate() {
            let d = src.position.distance(p);
            let pri = Complex64::from_polar(tone.amplitude / (4.0 * PI * d), tone.phase - 2.0 * PI * f * d / c);
            let sec: Complex64 = paths[i]
                .iter()
                .zip(&drive)
                .map(|(path, dl)| response(path.taps(), f, fs) * dl)
                .sum();
            primary[i] += pri.norm_sqr() / 2.0;
            residual[i] += (pri + sec).norm_sqr() / 2.0;
        }
    }
    let reference = primary.iter().copied().fold(0.0, f64::max);
    if reference == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(FieldMap {
        points: points.to_vec(),
        primary_db: primary.iter().map(|v| to_db(v / reference)).collect(),
        residual_db: residual.iter().map(|v| to_db(v / reference)).collect(),
    })
}

/// Mean power, averaged linearly, over the points within `radius` of any of
/// `centers`.
pub fn ear_disk_mean_db(points: &[Point3], values_db: &[f64], centers: &[Point3], radius: f64) -> Result<f64> {
    let (mut sum, mut count) = (0.0, 0usize);
    for (p, v) in points.iter().zip(values_db) {
        if centers.iter().any(|c| c.distance(p) <= radius + 1e-12) {
            sum += 10f64.powf(v / 10.0);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::InvalidConfig("no grid points inside the ear disks".into()));
    }
    Ok(to_db(sum / count as f64))
}
