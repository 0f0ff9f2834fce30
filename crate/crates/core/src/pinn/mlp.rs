//! One-hidden-layer tanh network `(τ, x, y, z) → p̂` with closed-form input
//! derivatives.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Network inputs in order `(τ, x, y, z)`.
pub type Input = [f64; 4];

pub const INPUT_DIM: usize = 4;

/// Weights and biases stored flat as `W1` (row-major, `hidden × 4`), `b1`,
/// `W2`, `b2`. The same layout is used for gradients and optimizer moments.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    hidden: usize,
    values: Vec<f64>,
}

pub(crate) fn tanh_d2(t: f64) -> f64 {
    -2.0 * t * (1.0 - t * t)
}

pub(crate) fn tanh_d3(t: f64) -> f64 {
    let t2 = t * t;
    -2.0 + 8.0 * t2 - 6.0 * t2 * t2
}

impl MlpParams {
    pub fn num_params_for(hidden: usize) -> usize {
        hidden * (INPUT_DIM + 2) + 1
    }

    pub fn zeros(hidden: usize) -> Self {
        Self {
            hidden,
            values: vec![0.0; Self::num_params_for(hidden)],
        }
    }

    /// Builds parameters from the flat layout; `None` if the length is wrong.
    pub fn from_flat(hidden: usize, values: Vec<f64>) -> Option<Self> {
        (values.len() == Self::num_params_for(hidden)).then_some(Self { hidden, values })
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn b1_offset(&self) -> usize {
        self.hidden * INPUT_DIM
    }

    fn w2_offset(&self) -> usize {
        self.hidden * (INPUT_DIM + 1)
    }

    fn b2_offset(&self) -> usize {
        self.hidden * (INPUT_DIM + 2)
    }

    pub fn w1(&self, k: usize) -> &[f64] {
        &self.values[k * INPUT_DIM..(k + 1) * INPUT_DIM]
    }

    pub fn w1_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.values[k * INPUT_DIM..(k + 1) * INPUT_DIM]
    }

    pub fn b1(&self) -> &[f64] {
        &self.values[self.b1_offset()..self.w2_offset()]
    }

    pub fn b1_mut(&mut self) -> &mut [f64] {
        let (a, b) = (self.b1_offset(), self.w2_offset());
        &mut self.values[a..b]
    }

    pub fn w2(&self) -> &[f64] {
        &self.values[self.w2_offset()..self.b2_offset()]
    }

    pub fn w2_mut(&mut self) -> &mut [f64] {
        let (a, b) = (self.w2_offset(), self.b2_offset());
        &mut self.values[a..b]
    }

    pub fn b2(&self) -> f64 {
        self.values[self.b2_offset()]
    }

    pub fn b2_mut(&mut self) -> &mut f64 {
        let i = self.b2_offset();
        &mut self.values[i]
    }

    /// Multiplies input column `i` of `W1` by `gain`.
    pub fn scale_input_column(&mut self, i: usize, gain: f64) {
        for k in 0..self.hidden {
            self.w1_mut(k)[i] *= gain;
        }
    }

    fn preactivation(&self, k: usize, input: &Input) -> f64 {
        let w = self.w1(k);
        w[0] * input[0] + w[1] * input[1] + w[2] * input[2] + w[3] * input[3] + self.b1()[k]
    }
}

/// Glorot-normal weights (variance `2 / (fan_in + fan_out)`) and zero biases.
pub fn glorot_init(seed: u64, hidden: usize) -> MlpParams {
    assert!(hidden >= 1, "hidden width must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = MlpParams::zeros(hidden);
    let std1 = (2.0 / (INPUT_DIM + hidden) as f64).sqrt();
    let std2 = (2.0 / (hidden + 1) as f64).sqrt();
    let n1 = Normal::new(0.0, std1).expect("finite std");
    let n2 = Normal::new(0.0, std2).expect("finite std");
    for v in &mut p.values[..hidden * INPUT_DIM] {
        *v = n1.sample(&mut rng);
    }
    for v in p.w2_mut() {
        *v = n2.sample(&mut rng);
    }
    p
}

/// `p̂ = W2 · tanh(W1 u + b1) + b2`.
pub fn mlp_forward(params: &MlpParams, input: &Input) -> f64 {
    let w2 = params.w2();
    (0..params.hidden)
        .map(|k| w2[k] * params.preactivation(k, input).tanh())
        .sum::<f64>()
        + params.b2()
}

/// Pure second partials `(∂²/∂τ², ∂²/∂x², ∂²/∂y², ∂²/∂z²)` of the output.
pub fn mlp_second_derivs(params: &MlpParams, input: &Input) -> [f64; 4] {
    let w2 = params.w2();
    let mut out = [0.0; 4];
    for k in 0..params.hidden {
        let s = w2[k] * tanh_d2(params.preactivation(k, input).tanh());
        let w = params.w1(k);
        for i in 0..INPUT_DIM {
            out[i] += s * w[i] * w[i];
        }
    }
    out
}

/// Wave-equation residual `c² ∇² p̂ − ∂²p̂/∂τ²`, with `c_eff` expressed in
/// meters per unit of the time input.
pub fn pde_residual(params: &MlpParams, input: &Input, c_eff: f64) -> f64 {
    let d = mlp_second_derivs(params, input);
    c_eff * c_eff * (d[1] + d[2] + d[3]) - d[0]
}
