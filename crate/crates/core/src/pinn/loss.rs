//! Data-misfit plus wave-equation loss with exact parameter gradients.
//!
//! The residual at a collocation point is
//! `r = Σ_k W2_k tanh''(z_k) q_k` with
//! `q_k = c² (W1_kx² + W1_ky² + W1_kz²) − W1_kτ²`, so its parameter gradient
//! needs `tanh'''` through the pre-activation `z_k`.

use crate::error::{Error, Result};
use crate::pinn::mlp::{tanh_d2, tanh_d3, Input, MlpParams, INPUT_DIM};

/// A training sample: network input and the measured pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPoint {
    pub input: Input,
    pub pressure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossBreakdown {
    pub data: f64,
    pub pde: f64,
    pub total: f64,
    pub grads: MlpParams,
}

/// `L = mean (p̂ − p)² + λ mean r²` and its gradient with respect to every
/// parameter.
pub fn loss_and_grads(
    params: &MlpParams,
    data: &[DataPoint],
    collocation: &[Input],
    pde_weight: f64,
    c_eff: f64,
) -> Result<LossBreakdown> {
    if data.is_empty() || collocation.is_empty() {
        return Err(Error::InvalidConfig("loss needs data and collocation points".into()));
    }
    let hidden = params.hidden();
    let mut grads = MlpParams::zeros(hidden);
    let mut act = vec![0.0; hidden];

    let w2 = params.w2().to_vec();
    let b1 = params.b1().to_vec();
    let w1: Vec<[f64; INPUT_DIM]> = (0..hidden)
        .map(|k| {
            let r = params.w1(k);
            [r[0], r[1], r[2], r[3]]
        })
        .collect();
    let b2 = params.b2();

    let mut g_w1 = vec![[0.0; INPUT_DIM]; hidden];
    let mut g_b1 = vec![0.0; hidden];
    let mut g_w2 = vec![0.0; hidden];
    let mut g_b2 = 0.0;

    let nd = data.len() as f64;
    let mut data_sum = 0.0;
    for d in data {
        let u = &d.input;
        let mut out = b2;
        for k in 0..hidden {
            let w = &w1[k];
            let h = (w[0] * u[0] + w[1] * u[1] + w[2] * u[2] + w[3] * u[3] + b1[k]).tanh();
            act[k] = h;
            out += w2[k] * h;
        }
        let r = out - d.pressure;
        data_sum += r * r;
        let g = 2.0 * r / nd;
        g_b2 += g;
        for k in 0..hidden {
            let h = act[k];
            g_w2[k] += g * h;
            let s = g * w2[k] * (1.0 - h * h);
            g_b1[k] += s;
            let gw = &mut g_w1[k];
            for i in 0..INPUT_DIM {
                gw[i] += s * u[i];
            }
        }
    }

    let c2 = c_eff * c_eff;
    let q: Vec<f64> = w1
        .iter()
        .map(|w| c2 * (w[1] * w[1] + w[2] * w[2] + w[3] * w[3]) - w[0] * w[0])
        .collect();
    let nc = collocation.len() as f64;
    let mut pde_sum = 0.0;
    let mut t2 = vec![0.0; hidden];
    let mut t3 = vec![0.0; hidden];
    for u in collocation {
        let mut r = 0.0;
        for k in 0..hidden {
            let w = &w1[k];
            let t = (w[0] * u[0] + w[1] * u[1] + w[2] * u[2] + w[3] * u[3] + b1[k]).tanh();
            t2[k] = tanh_d2(t);
            t3[k] = tanh_d3(t);
            r += w2[k] * t2[k] * q[k];
        }
        pde_sum += r * r;
        let g = pde_weight * 2.0 * r / nc;
        if g == 0.0 {
            continue;
        }
        for k in 0..hidden {
            let w = &w1[k];
            g_w2[k] += g * t2[k] * q[k];
            let a = g * w2[k];
            let via_z = a * t3[k] * q[k];
            g_b1[k] += via_z;
            let gw = &mut g_w1[k];
            gw[0] += via_z * u[0] - a * t2[k] * 2.0 * w[0];
            for i in 1..INPUT_DIM {
                gw[i] += via_z * u[i] + a * t2[k] * 2.0 * c2 * w[i];
            }
        }
    }

    for k in 0..hidden {
        grads.w1_mut(k).copy_from_slice(&g_w1[k]);
    }
    grads.b1_mut().copy_from_slice(&g_b1);
    grads.w2_mut().copy_from_slice(&g_w2);
    *grads.b2_mut() = g_b2;

    let data_loss = data_sum / nd;
    let pde_loss = pde_sum / nc;
    Ok(LossBreakdown {
        data: data_loss,
        pde: pde_loss,
        total: data_loss + pde_weight * pde_loss,
        grads,
    })
}
