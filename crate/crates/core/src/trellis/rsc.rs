//! Rate-1/2 recursive systematic convolutional code with feedback
//! polynomial `1 + D + D²` and parity polynomial `1 + D²`.

use super::TrellisSpec;
use crate::signal::bit_to_symbol;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RscCode;

impl RscCode {
    pub const MEMORY: usize = 2;
    pub const NUM_STATES: usize = 4;

    /// Coded bits for a message of `k` bits, termination included.
    pub fn coded_len(k: usize) -> usize {
        2 * (k + Self::MEMORY)
    }

    /// State bits are `(a_{k-1}, a_{k-2})` packed as `a1 | a2 << 1`, where
    /// `a_k = u_k ⊕ a_{k-1} ⊕ a_{k-2}` is the register input. Returns the
    /// next state and the parity bit `a_k ⊕ a_{k-2}`.
    #[inline]
    pub fn step(state: usize, input: u8) -> (usize, u8) {
        let a1 = (state & 1) as u8;
        let a2 = ((state >> 1) & 1) as u8;
        let a = input ^ a1 ^ a2;
        let parity = a ^ a2;
        ((a | (a1 << 1)) as usize, parity)
    }

    /// Input that drives the register input to zero (termination).
    #[inline]
    pub fn tail_input(state: usize) -> u8 {
        ((state & 1) ^ ((state >> 1) & 1)) as u8
    }

    /// Trellis with branch outputs `[x_sys, x_par]` as `±1` symbols.
    pub fn trellis(&self) -> TrellisSpec {
        let mut next_state = Vec::with_capacity(4);
        let mut outputs = Vec::with_capacity(8);
        for s in 0..Self::NUM_STATES {
            let (n0, p0) = Self::step(s, 0);
            let (n1, p1) = Self::step(s, 1);
            next_state.push([n0, n1]);
            outputs.push(vec![bit_to_symbol(0), bit_to_symbol(p0)]);
            outputs.push(vec![bit_to_symbol(1), bit_to_symbol(p1)]);
        }
        TrellisSpec {
            num_states: Self::NUM_STATES,
            next_state,
            outputs,
        }
    }

    /// Systematic and parity bits multiplexed per step, followed by two
    /// termination steps that return the encoder to state 0.
    pub fn encode(&self, bits: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::coded_len(bits.len()));
        let mut state = 0;
        for &b in bits {
            let (next, p) = Self::step(state, b & 1);
            out.push(b & 1);
            out.push(p);
            state = next;
        }
        for _ in 0..Self::MEMORY {
            let u = Self::tail_input(state);
            let (next, p) = Self::step(state, u);
            out.push(u);
            out.push(p);
            state = next;
        }
        debug_assert_eq!(state, 0);
        out
    }
}

pub fn rsc_encode(bits: &[u8]) -> Vec<u8> {
    RscCode.encode(bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_in_zero_out() {
        assert_eq!(rsc_encode(&[0; 10]), vec![0; 24]);
    }

    #[test]
    fn impulse_response_matches_shift_register() {
        // Clocking (1 + D²)/(1 + D + D²) by hand on the impulse:
        // register input a_k = u_k ⊕ a_{k-1} ⊕ a_{k-2} runs 1 1 0 1 1 0,
        // parity a_k ⊕ a_{k-2} runs 1 1 1 0 1 1.
        let out = rsc_encode(&[1, 0, 0, 0, 0, 0]);
        let sys: Vec<u8> = out.iter().step_by(2).copied().collect();
        let par: Vec<u8> = out.iter().skip(1).step_by(2).copied().collect();
        assert_eq!(&sys[..6], &[1, 0, 0, 0, 0, 0]);
        assert_eq!(&par[..6], &[1, 1, 1, 0, 1, 1]);
        assert_eq!(out.len(), 16);
    }

    #[test]
    fn termination_returns_to_zero() {
        for pattern in 0u32..64 {
            let bits: Vec<u8> = (0..6).map(|i| ((pattern >> i) & 1) as u8).collect();
            let mut state = 0;
            let out = rsc_encode(&bits);
            for pair in out.chunks(2) {
                let (next, p) = RscCode::step(state, pair[0]);
                assert_eq!(p, pair[1]);
                state = next;
            }
            assert_eq!(state, 0);
        }
    }
}
