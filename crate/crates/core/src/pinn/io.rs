//! Plain-text model files.
//!
//! ```text
//! hidden 16
//! w1 <64 values, row-major>
//! b1 <16 values>
//! w2 <16 values>
//! b2 <1 value>
//! norm_half_range <value>
//! norm_span <value>
//! norm_margin <value>
//! norm_period <value or none>
//! norm_c_eff <value>
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::pinn::mlp::{MlpParams, INPUT_DIM};
use crate::pinn::train::NormSpec;

fn push_line(out: &mut String, key: &str, values: &[f64]) {
    out.push_str(key);
    for v in values {
        let _ = write!(out, " {v:.16e}");
    }
    out.push('\n');
}

pub fn model_to_text(params: &MlpParams, norm: &NormSpec) -> String {
    let h = params.hidden();
    let s = params.as_slice();
    let mut out = format!("hidden {h}\n");
    push_line(&mut out, "w1", &s[..h * INPUT_DIM]);
    push_line(&mut out, "b1", params.b1());
    push_line(&mut out, "w2", params.w2());
    push_line(&mut out, "b2", &[params.b2()]);
    push_line(&mut out, "norm_half_range", &[norm.half_range]);
    push_line(&mut out, "norm_span", &[norm.span]);
    push_line(&mut out, "norm_margin", &[norm.margin]);
    match norm.period {
        Some(p) => push_line(&mut out, "norm_period", &[p]),
        None => out.push_str("norm_period none\n"),
    }
    push_line(&mut out, "norm_c_eff", &[norm.c_eff]);
    out
}

fn fmt_err(msg: impl Into<String>) -> Error {
    Error::ModelFormat(msg.into())
}

pub fn model_from_text(text: &str) -> Result<(MlpParams, NormSpec)> {
    let mut fields = std::collections::HashMap::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        if fields.insert(key.to_string(), rest).is_some() {
            return Err(fmt_err(format!("duplicate key {key}")));
        }
    }
    let get = |k: &str| fields.get(k).ok_or_else(|| fmt_err(format!("missing key {k}")));
    let nums = |k: &str, n: usize| -> Result<Vec<f64>> {
        let raw = get(k)?;
        if raw.len() != n {
            return Err(fmt_err(format!("{k}: expected {n} values, found {}", raw.len())));
        }
        raw.iter()
            .map(|s| s.parse::<f64>().map_err(|e| fmt_err(format!("{k}: {e}"))))
            .collect()
    };
    let hidden: usize = get("hidden")?
        .first()
        .ok_or_else(|| fmt_err("hidden: no value"))?
        .parse()
        .map_err(|e| fmt_err(format!("hidden: {e}")))?;
    if hidden == 0 {
        return Err(fmt_err("hidden width must be positive"));
    }
    let mut values = nums("w1", hidden * INPUT_DIM)?;
    values.extend(nums("b1", hidden)?);
    values.extend(nums("w2", hidden)?);
    values.extend(nums("b2", 1)?);
    let params = MlpParams::from_flat(hidden, values).ok_or_else(|| fmt_err("parameter count"))?;
    let period = match get("norm_period")?.as_slice() {
        ["none"] => None,
        _ => Some(nums("norm_period", 1)?[0]),
    };
    let norm = NormSpec {
        half_range: nums("norm_half_range", 1)?[0],
        span: nums("norm_span", 1)?[0],
        margin: nums("norm_margin", 1)?[0],
        period,
        c_eff: nums("norm_c_eff", 1)?[0],
    };
    if !params.is_finite() {
        return Err(fmt_err("non-finite parameter"));
    }
    Ok((params, norm))
}
