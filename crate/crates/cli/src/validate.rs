//! Numerical self-checks run by the `validate` experiment.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavefield_core::anc::{fxlms_step, run_anc, AncConfig, AncMode, AncWeights};
use wavefield_core::pinn::{
    adam_step, glorot_init, loss_and_grads, mlp_forward, mlp_second_derivs, pde_residual, AdamConfig, AdamState,
    DataPoint, Input, MlpParams,
};
use wavefield_core::sh::{real_sh, sh_fit, spherical_bessel_j, ShIndex};
use wavefield_core::{cart_to_sph, sphere_points, Point3, SampledSignal, ScenarioConfig, TonalSource, ToneComponent};

use crate::error::CliError;
use crate::output::Check;

const J1_AT_1: f64 = 0.3011686789397568;

fn random_input(rng: &mut ChaCha8Rng) -> Input {
    std::array::from_fn(|_| rng.random_range(-0.15..0.15))
}

fn perturbed_params(seed: u64) -> MlpParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut p = glorot_init(seed, 16);
    for v in p.as_mut_slice() {
        *v += rng.random_range(-0.3..0.3);
    }
    p
}

fn full_loss(p: &MlpParams, data: &[DataPoint], col: &[Input], lam: f64, c: f64) -> f64 {
    let ld = data.iter().map(|d| (mlp_forward(p, &d.input) - d.pressure).powi(2)).sum::<f64>() / data.len() as f64;
    let lp = col.iter().map(|u| pde_residual(p, u, c).powi(2)).sum::<f64>() / col.len() as f64;
    ld + lam * lp
}

/// Largest relative gap between analytic loss gradients and central
/// differences with step `1e-5`, over `draws` random cases.
pub fn gradient_check(seed: u64, draws: u64) -> f64 {
    let (lam, c, h) = (0.5, 2.0, 1e-5);
    let mut worst: f64 = 0.0;
    for d in 0..draws {
        let p = perturbed_params(seed + d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + d);
        let data: Vec<DataPoint> = (0..12)
            .map(|_| DataPoint {
                input: random_input(&mut rng),
                pressure: rng.random_range(-1.0..1.0),
            })
            .collect();
        let col: Vec<Input> = (0..10).map(|_| random_input(&mut rng)).collect();
        let g = loss_and_grads(&p, &data, &col, lam, c).expect("non-empty batches");
        for i in 0..p.as_slice().len() {
            let (mut up, mut dn) = (p.clone(), p.clone());
            up.as_mut_slice()[i] += h;
            dn.as_mut_slice()[i] -= h;
            let fd = (full_loss(&up, &data, &col, lam, c) - full_loss(&dn, &data, &col, lam, c)) / (2.0 * h);
            let a = g.grads.as_slice()[i];
            worst = worst.max((a - fd).abs() / a.abs().max(fd.abs()).max(1e-6));
        }
    }
    worst
}

/// Central second difference along input `i`, accumulated per hidden unit
/// from the exact identity for `tanh(z ± δ) - tanh(z)`.
pub fn second_difference(p: &MlpParams, u: &Input, i: usize, h: f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..p.hidden() {
        let w = p.w1(k);
        let z = w[0] * u[0] + w[1] * u[1] + w[2] * u[2] + w[3] * u[3] + p.b1()[k];
        let t = z.tanh();
        let s = (w[i] * h).tanh();
        let up = s * (1.0 - t * t) / (1.0 + t * s);
        let dn = -s * (1.0 - t * t) / (1.0 - t * s);
        acc += p.w2()[k] * (up + dn);
    }
    acc / (h * h)
}

/// Largest relative gap between closed-form second input derivatives and
/// central second differences with step `1e-4`.
pub fn second_derivative_check(seed: u64, draws: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for d in 0..draws {
        let p = perturbed_params(seed + 100 + d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100 + d);
        let u = random_input(&mut rng);
        let an = mlp_second_derivs(&p, &u);
        for (i, a) in an.iter().enumerate() {
            let fd = second_difference(&p, &u, i, 1e-4);
            worst = worst.max((a - fd).abs() / a.abs().max(1e-12));
        }
    }
    worst
}

/// Mean-square wave-equation residual at held-out points for a network fitted
/// to a plane wave, and for an untrained network.
pub fn plane_wave_residuals(seed: u64) -> (f64, f64, f64) {
    let c = 1.0;
    let k = [2.0, 1.0, -1.5];
    let omega = c * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2] as f64).sqrt();
    let wave = |u: &Input| (k[0] * u[1] + k[1] * u[2] + k[2] * u[3] - omega * u[0]).sin();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let data: Vec<DataPoint> = (0..400)
        .map(|_| {
            let u = random_input(&mut rng);
            DataPoint {
                input: u,
                pressure: wave(&u),
            }
        })
        .collect();
    let col: Vec<Input> = (0..200).map(|_| random_input(&mut rng)).collect();
    let held: Vec<Input> = (0..200).map(|_| random_input(&mut rng)).collect();

    let untrained = glorot_init(seed, 16);
    let mut p = untrained.clone();
    let mut state = AdamState::new(p.as_slice().len());
    let cfg = AdamConfig {
        learning_rate: 1e-2,
        ..Default::default()
    };
    for _ in 0..20_000 {
        let l = loss_and_grads(&p, &data, &col, 0.1, c).expect("non-empty batches");
        adam_step(p.as_mut_slice(), l.grads.as_slice(), &mut state, &cfg);
    }
    let fit = data.iter().map(|d| (mlp_forward(&p, &d.input) - d.pressure).powi(2)).sum::<f64>() / data.len() as f64;
    let ms = |q: &MlpParams| held.iter().map(|u| pde_residual(q, u, c).powi(2)).sum::<f64>() / held.len() as f64;
    (fit, ms(&p), ms(&untrained))
}

/// Largest deviation of the quadrature Gram matrix of harmonics up to
/// `max_order` from the identity.
pub fn gram_deviation(max_order: usize, n: usize) -> f64 {
    let idx = ShIndex::up_to(max_order);
    let rows: Vec<Vec<f64>> = sphere_points(1.0, n, Point3::ORIGIN)
        .iter()
        .map(|p| {
            let s = cart_to_sph(*p);
            idx.iter().map(|&i| real_sh(i, s.theta, s.phi)).collect()
        })
        .collect();
    let w = 4.0 * PI / n as f64;
    let mut worst: f64 = 0.0;
    for a in 0..idx.len() {
        for b in 0..idx.len() {
            let g: f64 = rows.iter().map(|r| r[a] * r[b]).sum::<f64>() * w;
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    worst
}

/// Fits each pure harmonic up to order 2 from 64 points and returns the
/// largest coefficient error.
pub fn pure_mode_round_trip() -> Result<f64, CliError> {
    let pts = sphere_points(0.25, 64, Point3::ORIGIN);
    let idx = ShIndex::up_to(2);
    let mut worst: f64 = 0.0;
    for &mode in &idx {
        let signals: Vec<SampledSignal> = pts
            .iter()
            .map(|p| {
                let s = cart_to_sph(*p);
                let y = real_sh(mode, s.theta, s.phi);
                SampledSignal::new(1000.0, 0.0, vec![y, -0.5 * y, 2.0 * y])
            })
            .collect::<Result<_, _>>()?;
        let fit = sh_fit(&pts, &signals, 2, 0.0)?;
        for &other in &idx {
            let want = if other == mode { 1.0 } else { 0.0 };
            for (got, scale) in fit.coeff(other).iter().zip([1.0, -0.5, 2.0]) {
                worst = worst.max((got - want * scale).abs());
            }
        }
    }
    Ok(worst)
}

/// One loudspeaker, one error microphone and a single 400 Hz tone.
pub fn single_channel_scenario() -> ScenarioConfig {
    let mut s = ScenarioConfig::headrest(0);
    s.primary_source = TonalSource {
        position: Point3::new(0.6, 0.8, 1.0),
        components: vec![ToneComponent {
            frequency: 400.0,
            amplitude: 2.0 * PI,
            phase: 0.7,
        }],
    };
    s.secondary_positions = vec![Point3::new(0.0, 0.2, 0.0)];
    s.monitoring_positions = vec![Point3::new(0.0, 0.0, 0.3)];
    s.virtual_positions = vec![Point3::ORIGIN];
    s
}

/// Reduction in dB at the error microphone after 5000 updates with `μ = 1e-5`.
pub fn single_tone_reduction() -> Result<f64, CliError> {
    let cfg = AncConfig {
        iterations: 5000,
        ..Default::default()
    };
    let r = run_anc(&single_channel_scenario(), &AncMode::VirtualOracle, &cfg)?;
    Ok(-r.eps_db[r.eps_db.len() - 1])
}

pub fn fixed_point_holds(seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let filters: Vec<Vec<f64>> = (0..2).map(|_| (0..64).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let mut w = AncWeights::from_filters(filters).expect("valid weights");
    let before = w.clone();
    let refs: Vec<Vec<Vec<f64>>> = (0..2)
        .map(|_| (0..8).map(|_| (0..64).map(|_| rng.random_range(-1.0..1.0)).collect()).collect())
        .collect();
    fxlms_step(&mut w, &refs, &[0.0; 8], 1e-5);
    w == before
}

pub fn all_checks(seed: u64) -> Result<Vec<Check>, CliError> {
    let (fit, fitted, untrained) = plane_wave_residuals(seed);
    let mut checks = vec![
        Check::at_most(
            "loss_gradient_vs_finite_difference",
            gradient_check(seed, 20),
            1e-4,
            "max relative error over 20 random draws",
        ),
        Check::at_most(
            "second_derivative_vs_finite_difference",
            second_derivative_check(seed, 20),
            1e-6,
            "max relative error over 20 random draws",
        ),
        Check::at_most(
            "bessel_j1_at_1",
            (spherical_bessel_j(1, 1.0) - J1_AT_1).abs(),
            1e-6,
            "absolute error against 0.3011687",
        ),
        Check::at_most(
            "sh_gram_orthonormality",
            gram_deviation(3, 10_000),
            1e-3,
            "max |G - I| up to order 3 on 10000 lattice points",
        ),
        Check::at_most(
            "sh_pure_mode_round_trip",
            pure_mode_round_trip()?,
            1e-6,
            "max coefficient error up to order 2",
        ),
        Check::at_most("plane_wave_fit_data_loss", fit, 1e-6, "data loss of the plane-wave fit"),
        Check::at_least(
            "plane_wave_residual_ratio",
            untrained / fitted,
            10.0,
            "mean-square residual, untrained over fitted",
        ),
        Check::at_least(
            "fxlms_fixed_point",
            if fixed_point_holds(seed) { 1.0 } else { 0.0 },
            1.0,
            "zero errors leave weights bitwise unchanged",
        ),
        Check::at_least(
            "fxlms_single_tone_reduction",
            single_tone_reduction()?,
            40.0,
            "dB reduction at the sensor after 5000 steps",
        ),
    ];
    for c in &mut checks {
        if !c.measured.is_finite() {
            c.passed = false;
        }
    }
    Ok(checks)
}
