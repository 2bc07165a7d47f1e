//! BCJR (MAP) channel equalizer over the `2^{L_h-1}`-state ISI trellis.

use super::{forward_backward, TrellisSpec};
use crate::llr::{clamp, LlrFrame, LlrRole};
use crate::signal::{IsiChannel, ReceivedFrame};
use crate::{Error, Result};

/// Covers `h2` (seven taps, 64 states).
pub const DEFAULT_STATE_CAP: usize = 64;

pub fn bcjr_equalize(ch: &IsiChannel, rx: &ReceivedFrame, apriori: &LlrFrame) -> Result<LlrFrame> {
    bcjr_equalize_with_cap(ch, rx, apriori, DEFAULT_STATE_CAP)
}

/// Extrinsic LLRs of the payload symbols. The trellis starts in the all-guard
/// state and runs through the `L_h - 1` samples after the payload with the
/// guard symbol forced, which also pins the final state.
pub fn bcjr_equalize_with_cap(
    ch: &IsiChannel,
    rx: &ReceivedFrame,
    apriori: &LlrFrame,
    state_cap: usize,
) -> Result<LlrFrame> {
    let memory = ch.memory();
    let states = 1usize.checked_shl(memory as u32).unwrap_or(usize::MAX);
    if memory >= usize::BITS as usize || states > state_cap {
        return Err(Error::TooManyStates {
            states,
            cap: state_cap,
        });
    }
    let layout = rx.layout;
    let payload = layout.payload_len;
    if apriori.len() != payload {
        return Err(Error::LengthMismatch {
            expected: payload,
            actual: apriori.len(),
        });
    }
    if rx.samples.len() != layout.total() + memory {
        return Err(Error::LengthMismatch {
            expected: layout.total() + memory,
            actual: rx.samples.len(),
        });
    }
    let spec = TrellisSpec::channel(ch.taps());
    let steps = payload + memory;
    let start = layout.guard_prefix;
    let inv_2n0 = 0.5 / rx.noise_variance;
    let prior: Vec<f64> = apriori.values.iter().map(|&l| clamp(l)).collect();

    let lattice = forward_backward(&spec, steps, 0, Some(0), |t, s, u| {
        let x = crate::signal::bit_to_symbol(u as u8);
        let prior_term = if t < payload {
            0.5 * x * prior[t]
        } else if u == 0 {
            0.0
        } else {
            return f64::NEG_INFINITY;
        };
        let e = rx.samples[start + t] - spec.output(s, u)[0];
        prior_term - e * e * inv_2n0
    });

    let values = (0..payload)
        .map(|t| {
            let plus = lattice.branch_sum(&spec, t, |_, u| u == 0);
            let minus = lattice.branch_sum(&spec, t, |_, u| u == 1);
            clamp(plus - minus - prior[t])
        })
        .collect();
    Ok(LlrFrame {
        values,
        role: LlrRole::Extrinsic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::FrameLayout;

    fn frame(samples: Vec<f64>, n0: f64, layout: FrameLayout) -> ReceivedFrame {
        ReceivedFrame {
            samples,
            noise_variance: n0,
            layout,
        }
    }

    #[test]
    fn memoryless_channel_is_scaled_sample() {
        let ch = IsiChannel::new(vec![1.0]).unwrap();
        let r = vec![0.3, -1.2, 0.7, 2.0];
        let rx = frame(r.clone(), 0.5, FrameLayout::new(0, 0, 4));
        let la = LlrFrame::new(vec![3.0, -1.0, 0.0, 7.0], LlrRole::APriori);
        let le = bcjr_equalize(&ch, &rx, &la).unwrap();
        for (l, r) in le.values.iter().zip(&r) {
            assert!((l - 2.0 * r / 0.5).abs() < 1e-9, "{l} vs {}", 2.0 * r / 0.5);
        }
    }

    #[test]
    fn state_cap_enforced() {
        let ch = IsiChannel::new(vec![1.0; 8]).unwrap();
        let rx = frame(vec![0.0; 8], 1.0, FrameLayout::new(0, 1, 0));
        let la = LlrFrame::zeros(0, LlrRole::APriori);
        assert!(matches!(
            bcjr_equalize(&ch, &rx, &la),
            Err(Error::TooManyStates {
                states: 128,
                cap: 64
            })
        ));
    }
}
