//! Exact log-domain BCJR over the 4-state code trellis.

use super::{forward_backward, RscCode};
use crate::llr::{clamp, LlrFrame, LlrRole};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderOutput {
    /// Posterior minus input, one value per coded bit (tail included).
    pub extrinsic: LlrFrame,
    /// Posterior LLRs of the message bits.
    pub posterior: LlrFrame,
}

impl DecoderOutput {
    pub fn message_bits(&self) -> Vec<u8> {
        self.posterior
            .values
            .iter()
            .map(|&l| u8::from(l < 0.0))
            .collect()
    }
}

/// Decodes channel LLRs on the multiplexed coded bits
/// `[sys_0, par_0, sys_1, par_1, …]`, terminated at state 0 on both ends.
/// Message bits have uniform priors.
pub fn bcjr_decode(code: &RscCode, coded: &LlrFrame) -> Result<DecoderOutput> {
    let n = coded.len();
    if n % 2 != 0 || n < 2 * RscCode::MEMORY {
        return Err(Error::LengthMismatch {
            expected: RscCode::coded_len(n.saturating_sub(2 * RscCode::MEMORY) / 2),
            actual: n,
        });
    }
    let steps = n / 2;
    let k = steps - RscCode::MEMORY;
    let spec = code.trellis();
    let input: Vec<f64> = coded.values.iter().map(|&l| clamp(l)).collect();

    let lattice = forward_backward(&spec, steps, 0, Some(0), |t, s, u| {
        if t >= k && u as u8 != RscCode::tail_input(s) {
            return f64::NEG_INFINITY;
        }
        let out = spec.output(s, u);
        0.5 * (out[0] * input[2 * t] + out[1] * input[2 * t + 1])
    });

    let mut extrinsic = Vec::with_capacity(n);
    let mut posterior = Vec::with_capacity(k);
    for t in 0..steps {
        for bit in 0..2 {
            let plus = lattice.branch_sum(&spec, t, |s, u| spec.output(s, u)[bit] > 0.0);
            let minus = lattice.branch_sum(&spec, t, |s, u| spec.output(s, u)[bit] < 0.0);
            extrinsic.push(clamp(plus - minus - input[2 * t + bit]));
            if bit == 0 && t < k {
                posterior.push(clamp(plus - minus));
            }
        }
    }
    Ok(DecoderOutput {
        extrinsic: LlrFrame {
            values: extrinsic,
            role: LlrRole::Extrinsic,
        },
        posterior: LlrFrame {
            values: posterior,
            role: LlrRole::Posterior,
        },
    })
}
