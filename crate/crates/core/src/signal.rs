//! Channel model, BPSK framing and the banded channel convolution matrices
//! shared by every equalizer.
//!
//! Frames carry known guard symbols (`+1`) on both sides of the payload. The
//! guards seed the feedback history at block start and pin the trellis
//! boundary states, so the algorithms never see undefined symbols.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::numerics::Matrix;
use crate::{Error, Result};

/// Value of every guard symbol and of symbols outside the frame.
pub const GUARD_SYMBOL: f64 = 1.0;

/// Bit `0` maps to `+1`, bit `1` to `-1`.
#[inline]
pub fn bit_to_symbol(bit: u8) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
pub fn symbol_to_bit(symbol: f64) -> u8 {
    u8::from(symbol < 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsiChannel {
    taps: Vec<f64>,
    energy: f64,
}

impl IsiChannel {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidChannel("no taps".into()));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidChannel("non-finite tap".into()));
        }
        let energy: f64 = taps.iter().map(|t| t * t).sum();
        if !(energy > 0.0) {
            return Err(Error::InvalidChannel("zero energy".into()));
        }
        Ok(Self { taps, energy })
    }

    /// `(1/√19)[1 2 3 2 1]`
    pub fn h1() -> Self {
        let k = 19f64.sqrt().recip();
        Self::new([1.0, 2.0, 3.0, 2.0, 1.0].iter().map(|v| v * k).collect()).unwrap()
    }

    /// `(1/√44)[1 2 3 4 3 2 1]`
    pub fn h2() -> Self {
        let k = 44f64.sqrt().recip();
        Self::new(
            [1.0, 2.0, 3.0, 4.0, 3.0, 2.0, 1.0]
                .iter()
                .map(|v| v * k)
                .collect(),
        )
        .unwrap()
    }

    /// Accepts a preset name (`h1`, `h2`) or a comma-separated tap list.
    pub fn parse(spec: &str) -> Result<Self> {
        match spec.trim() {
            "h1" => Ok(Self::h1()),
            "h2" => Ok(Self::h2()),
            other => {
                let taps = other
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::InvalidChannel(format!("'{t}': {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::new(taps)
            }
        }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Number of past symbols each sample depends on, `L_h - 1`.
    pub fn memory(&self) -> usize {
        self.taps.len() - 1
    }

    /// Autocorrelation `R_hh[k]` for lags `0..L_h`.
    pub fn autocorrelation(&self) -> Vec<f64> {
        let n = self.taps.len();
        (0..n)
            .map(|k| (0..n - k).map(|i| self.taps[i] * self.taps[i + k]).sum())
            .collect()
    }
}

pub fn time_reverse_channel(ch: &IsiChannel) -> IsiChannel {
    let mut taps = ch.taps.clone();
    taps.reverse();
    IsiChannel {
        taps,
        energy: ch.energy,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    pub guard_prefix: usize,
    pub guard_suffix: usize,
    pub payload_len: usize,
}

impl FrameLayout {
    pub fn new(guard_prefix: usize, guard_suffix: usize, payload_len: usize) -> Self {
        Self {
            guard_prefix,
            guard_suffix,
            payload_len,
        }
    }

    /// Guards and payload, without the channel tail.
    pub fn total(&self) -> usize {
        self.guard_prefix + self.payload_len + self.guard_suffix
    }

    pub fn payload_range(&self) -> std::ops::Range<usize> {
        self.guard_prefix..self.guard_prefix + self.payload_len
    }

    pub fn is_payload(&self, index: isize) -> bool {
        index >= self.guard_prefix as isize
            && index < (self.guard_prefix + self.payload_len) as isize
    }

    pub fn reversed(&self) -> Self {
        Self {
            guard_prefix: self.guard_suffix,
            guard_suffix: self.guard_prefix,
            payload_len: self.payload_len,
        }
    }

    /// Fails unless both guards hold at least `needed` symbols.
    pub fn require_guards(&self, needed: usize) -> Result<()> {
        let have = self.guard_prefix.min(self.guard_suffix);
        if have < needed {
            return Err(Error::GuardTooShort { needed, have });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    /// Guards and payload, each entry exactly `±1`.
    pub symbols: Vec<f64>,
    pub layout: FrameLayout,
}

impl SymbolFrame {
    pub fn payload(&self) -> &[f64] {
        &self.symbols[self.layout.payload_range()]
    }

    /// Symbol at any integer index; outside the frame the guard value.
    pub fn at(&self, index: isize) -> f64 {
        if index < 0 {
            GUARD_SYMBOL
        } else {
            self.symbols
                .get(index as usize)
                .copied()
                .unwrap_or(GUARD_SYMBOL)
        }
    }

    pub fn reversed(&self) -> Self {
        let mut symbols = self.symbols.clone();
        symbols.reverse();
        Self {
            symbols,
            layout: self.layout.reversed(),
        }
    }
}

pub fn bpsk_modulate(bits: &[u8], guard_prefix: usize, guard_suffix: usize) -> SymbolFrame {
    debug_assert!(bits.iter().all(|&b| b <= 1));
    let mut symbols = Vec::with_capacity(guard_prefix + bits.len() + guard_suffix);
    symbols.extend(std::iter::repeat_n(GUARD_SYMBOL, guard_prefix));
    symbols.extend(bits.iter().map(|&b| bit_to_symbol(b)));
    symbols.extend(std::iter::repeat_n(GUARD_SYMBOL, guard_suffix));
    SymbolFrame {
        symbols,
        layout: FrameLayout::new(guard_prefix, guard_suffix, bits.len()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedFrame {
    /// `layout.total() + L_h - 1` samples; the tail flushes the channel.
    pub samples: Vec<f64>,
    pub noise_variance: f64,
    pub layout: FrameLayout,
}

impl ReceivedFrame {
    /// Time reversal of the whole sample sequence, tail included. The result
    /// is exactly the output of the reversed channel driven by the reversed
    /// symbol frame, so symbol `i` of the reversed frame is symbol
    /// `total - 1 - i` of the original.
    pub fn reversed(&self) -> Self {
        let mut samples = self.samples.clone();
        samples.reverse();
        Self {
            samples,
            noise_variance: self.noise_variance,
            layout: self.layout.reversed(),
        }
    }

    pub fn sample(&self, index: isize) -> f64 {
        if index < 0 {
            0.0
        } else {
            self.samples.get(index as usize).copied().unwrap_or(0.0)
        }
    }
}

/// Noiseless channel output over the frame plus its `L_h - 1` tail.
pub fn convolve(ch: &IsiChannel, frame: &SymbolFrame) -> Vec<f64> {
    let n = frame.symbols.len() + ch.memory();
    (0..n as isize)
        .map(|t| {
            ch.taps
                .iter()
                .enumerate()
                .map(|(k, h)| h * frame.at(t - k as isize))
                .sum()
        })
        .collect()
}

pub fn apply_channel<R: Rng + ?Sized>(
    ch: &IsiChannel,
    frame: &SymbolFrame,
    n0: f64,
    rng: &mut R,
) -> Result<ReceivedFrame> {
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::InvalidNoiseVariance(n0));
    }
    let sigma = n0.sqrt();
    let samples = convolve(ch, frame)
        .into_iter()
        .map(|s| {
            let w: f64 = rng.sample(StandardNormal);
            s + sigma * w
        })
        .collect();
    Ok(ReceivedFrame {
        samples,
        noise_variance: n0,
        layout: frame.layout,
    })
}

/// Banded channel convolution matrix for one equalizer window.
///
/// Column `j` stands for symbol `x_{n - target + j}`, row `i` for sample
/// `r_{n - lag + i}`, and `H[i][j] = h_{i + target - lag - j}`. For the DFE
/// (`lag = 0`, `target = feedback = L_d`) this is the `(L_c+1) × (L_c+L_d+1)`
/// matrix whose first row is the reversed tap vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionMatrices {
    pub h: Matrix,
    /// Column of `H` belonging to the current symbol.
    pub s: Vec<f64>,
    pub target: usize,
    /// Leading columns covered by fed-back decisions (`L_d`).
    pub feedback: usize,
    pub lag: usize,
    bands: Vec<Band>,
    channel_len: usize,
}

/// Nonzero run of one column of `H`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Band {
    pub first_row: usize,
    pub values: Vec<f64>,
}

impl ConvolutionMatrices {
    fn banded(ch: &IsiChannel, rows: usize, target: usize, lag: usize, feedback: usize) -> Self {
        let offset = target - lag;
        let cols = rows + offset;
        let mut h = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let k = i as isize + offset as isize - j as isize;
                if k >= 0 && (k as usize) < ch.len() {
                    h[(i, j)] = ch.taps[k as usize];
                }
            }
        }
        let bands = (0..cols)
            .map(|j| {
                let first = (0..rows).find(|&i| h[(i, j)] != 0.0);
                match first {
                    Some(f) => {
                        let last = (0..rows).rev().find(|&i| h[(i, j)] != 0.0).unwrap();
                        Band {
                            first_row: f,
                            values: (f..=last).map(|i| h[(i, j)]).collect(),
                        }
                    }
                    None => Band {
                        first_row: 0,
                        values: Vec::new(),
                    },
                }
            })
            .collect();
        let s = h.column(target);
        Self {
            h,
            s,
            target,
            feedback,
            lag,
            bands,
            channel_len: ch.len(),
        }
    }

    pub fn rows(&self) -> usize {
        self.h.rows()
    }

    pub fn cols(&self) -> usize {
        self.h.cols()
    }

    /// Feedforward length minus one.
    pub fn lc(&self) -> usize {
        self.h.rows() - 1
    }

    pub fn ld(&self) -> usize {
        self.feedback
    }

    pub fn channel_len(&self) -> usize {
        self.channel_len
    }

    /// `M = [I_{L_d}, 0]`.
    pub fn m_selector(&self) -> Matrix {
        let mut m = Matrix::zeros(self.feedback, self.cols());
        for i in 0..self.feedback {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Columns `L_d ..` of `H`.
    pub fn h1(&self) -> Matrix {
        self.h.columns(self.feedback, self.cols())
    }

    pub(crate) fn band(&self, j: usize) -> &Band {
        &self.bands[j]
    }

    /// `Hᵀ c` using the band structure.
    pub fn project(&self, c: &[f64]) -> Vec<f64> {
        self.bands
            .iter()
            .map(|b| {
                b.values
                    .iter()
                    .zip(&c[b.first_row..])
                    .map(|(h, c)| h * c)
                    .sum()
            })
            .collect()
    }
}

/// DFE window: `L_c + 1` feedforward taps, `L_d` feedback taps.
pub fn build_convolution_matrices(ch: &IsiChannel, lc: usize, ld: usize) -> ConvolutionMatrices {
    ConvolutionMatrices::banded(ch, lc + 1, ld, 0, ld)
}

/// Symmetric linear-equalizer window of `taps` (odd) samples centred on the
/// current symbol: `r_{n-N2} … r_{n+N1}`, `N1 = N2 = (taps-1)/2`.
pub fn build_le_matrices(ch: &IsiChannel, taps: usize) -> Result<ConvolutionMatrices> {
    if taps % 2 == 0 {
        return Err(Error::InvalidEqualizer(format!(
            "linear equalizer needs an odd tap count, got {taps}"
        )));
    }
    let half = (taps - 1) / 2;
    Ok(ConvolutionMatrices::banded(
        ch,
        taps,
        half + ch.memory(),
        half,
        0,
    ))
}
