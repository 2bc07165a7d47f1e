//! Coded-system scaffolding: the RSC code, exact log-domain BCJR for the code
//! and for the ISI channel, and the interleaver between them.

mod bcjr;
mod equalizer;
mod interleaver;
mod rsc;

pub use bcjr::{bcjr_decode, DecoderOutput};
pub use equalizer::{bcjr_equalize, bcjr_equalize_with_cap, DEFAULT_STATE_CAP};
pub use interleaver::Interleaver;
pub use rsc::{rsc_encode, RscCode};

/// Complete transition table of a binary-input trellis.
#[derive(Debug, Clone, PartialEq)]
pub struct TrellisSpec {
    pub num_states: usize,
    /// `next_state[s][u]` for input bit `u`.
    pub next_state: Vec<[usize; 2]>,
    /// Branch output symbols, indexed `state * 2 + input`.
    pub outputs: Vec<Vec<f64>>,
}

impl TrellisSpec {
    #[inline]
    pub fn output(&self, state: usize, input: usize) -> &[f64] {
        &self.outputs[state * 2 + input]
    }

    /// Channel trellis over the last `L_h - 1` symbols. Bit `k` of the state
    /// is set when `x_{n-1-k} = -1`; the branch output is the noiseless sample.
    pub fn channel(taps: &[f64]) -> Self {
        let memory = taps.len() - 1;
        let num_states = 1usize << memory;
        let mask = num_states - 1;
        let mut next_state = Vec::with_capacity(num_states);
        let mut outputs = Vec::with_capacity(2 * num_states);
        for s in 0..num_states {
            next_state.push([(s << 1) & mask, ((s << 1) | 1) & mask]);
            for u in 0..2 {
                let mut y = taps[0] * crate::signal::bit_to_symbol(u as u8);
                for (k, h) in taps.iter().enumerate().skip(1) {
                    let bit = ((s >> (k - 1)) & 1) as u8;
                    y += h * crate::signal::bit_to_symbol(bit);
                }
                outputs.push(vec![y]);
            }
        }
        Self {
            num_states,
            next_state,
            outputs,
        }
    }
}

/// Normalized log-domain forward and backward metrics.
pub(crate) struct Lattice {
    states: usize,
    /// `alpha[t * states + s]`, `t = 0..=steps`.
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// `gamma[(t * states + s) * 2 + u]`.
    gamma: Vec<f64>,
}

impl Lattice {
    #[inline]
    pub fn alpha(&self, t: usize, s: usize) -> f64 {
        self.alpha[t * self.states + s]
    }

    #[inline]
    pub fn beta(&self, t: usize, s: usize) -> f64 {
        self.beta[t * self.states + s]
    }

    #[inline]
    pub fn gamma(&self, t: usize, s: usize, u: usize) -> f64 {
        self.gamma[(t * self.states + s) * 2 + u]
    }

    /// Log of the summed path metric through every branch at step `t` with
    /// `select(s, u)` true.
    pub fn branch_sum(
        &self,
        spec: &TrellisSpec,
        t: usize,
        mut select: impl FnMut(usize, usize) -> bool,
    ) -> f64 {
        let mut acc = f64::NEG_INFINITY;
        for s in 0..self.states {
            let a = self.alpha(t, s);
            if a == f64::NEG_INFINITY {
                continue;
            }
            for u in 0..2 {
                if select(s, u) {
                    let m = a + self.gamma(t, s, u) + self.beta(t + 1, spec.next_state[s][u]);
                    acc = crate::llr::log_add(acc, m);
                }
            }
        }
        acc
    }
}

/// Exact forward-backward recursion. `gamma(t, s, u)` is the log branch
/// metric; `-inf` marks a forbidden branch.
pub(crate) fn forward_backward(
    spec: &TrellisSpec,
    steps: usize,
    initial: usize,
    terminal: Option<usize>,
    gamma: impl Fn(usize, usize, usize) -> f64,
) -> Lattice {
    let ns = spec.num_states;
    let mut g = vec![f64::NEG_INFINITY; steps * ns * 2];
    for t in 0..steps {
        for s in 0..ns {
            for u in 0..2 {
                g[(t * ns + s) * 2 + u] = gamma(t, s, u);
            }
        }
    }

    let mut alpha = vec![f64::NEG_INFINITY; (steps + 1) * ns];
    alpha[initial] = 0.0;
    for t in 0..steps {
        let (cur, next) = alpha.split_at_mut((t + 1) * ns);
        let cur = &cur[t * ns..];
        let next = &mut next[..ns];
        for s in 0..ns {
            if cur[s] == f64::NEG_INFINITY {
                continue;
            }
            for u in 0..2 {
                let gm = g[(t * ns + s) * 2 + u];
                if gm == f64::NEG_INFINITY {
                    continue;
                }
                let to = spec.next_state[s][u];
                next[to] = crate::llr::log_add(next[to], cur[s] + gm);
            }
        }
        normalize(next);
    }

    let mut beta = vec![f64::NEG_INFINITY; (steps + 1) * ns];
    match terminal {
        Some(s) => beta[steps * ns + s] = 0.0,
        None => beta[steps * ns..].fill(0.0),
    }
    for t in (0..steps).rev() {
        let (cur, next) = beta.split_at_mut((t + 1) * ns);
        let cur = &mut cur[t * ns..];
        for s in 0..ns {
            let mut acc = f64::NEG_INFINITY;
            for u in 0..2 {
                let gm = g[(t * ns + s) * 2 + u];
                if gm == f64::NEG_INFINITY {
                    continue;
                }
                acc = crate::llr::log_add(acc, gm + next[spec.next_state[s][u]]);
            }
            cur[s] = acc;
        }
        normalize(cur);
    }

    Lattice {
        states: ns,
        alpha,
        beta,
        gamma: g,
    }
}

fn normalize(metrics: &mut [f64]) {
    let max = metrics.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max.is_finite() {
        for m in metrics.iter_mut() {
            *m -= max;
        }
    }
}
