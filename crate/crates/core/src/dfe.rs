//! Soft-input soft-output MMSE equalizers: time-varying and time-invariant
//! DFE and LE filter design, the per-symbol DFE output, and the extrinsic LLR
//! mappings (conventional, error-propagation aware, and the exhaustive
//! enumeration over causal error patterns).

use crate::bidfe::UnbiasedTrace;
use crate::llr::{self, clamp, ln_sigmoid, log_add, LlrFrame, LlrRole, L_MAX};
use crate::numerics::{dot, SpdWorkspace};
use crate::signal::{ConvolutionMatrices, ReceivedFrame, GUARD_SYMBOL};
use crate::{Error, Result};

/// Largest feedback length accepted by [`enumerated_llr`].
pub const MAX_ENUMERATED_FEEDBACK: usize = 12;

const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterMode {
    /// Taps recomputed for every symbol from the current priors.
    TimeVarying,
    /// Classical taps computed once with unit symbol variances.
    TimeInvariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LlrMode {
    Conventional,
    Proposed,
}

/// `1 - tanh(L/2)^2` written as `4e^{-|L|}/(1+e^{-|L|})^2`.
#[inline]
pub fn prior_variance(l: f64) -> f64 {
    let e = (-l.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// Decoder a priori LLRs on the payload with their symbol means and variances.
#[derive(Debug, Clone, PartialEq)]
pub struct AprioriFrame {
    pub la: LlrFrame,
    pub mean: Vec<f64>,
    pub z: Vec<f64>,
}

impl AprioriFrame {
    pub fn new(la: LlrFrame) -> Self {
        let la = la.with_role(LlrRole::APriori);
        let mean = la.values.iter().map(|&l| llr::soft_mean(l)).collect();
        let z = la.values.iter().map(|&l| prior_variance(l)).collect();
        Self { la, mean, z }
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(LlrFrame::zeros(len, LlrRole::APriori))
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        Self::new(LlrFrame::new(values, LlrRole::APriori))
    }

    pub fn len(&self) -> usize {
        self.la.len()
    }

    pub fn is_empty(&self) -> bool {
        self.la.is_empty()
    }

    pub fn reversed(&self) -> Self {
        let mut values = self.la.values.clone();
        values.reverse();
        Self::from_values(values)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DfeFilters {
    /// Feedforward taps, one per row of `H`.
    pub c: Vec<f64>,
    /// Feedback taps, oldest symbol first.
    pub d: Vec<f64>,
    /// `cᵀH₁`: gains on the current and future symbols.
    pub p: Vec<f64>,
    pub p0: f64,
    /// `Hᵀc` over every window column; `d` and `p` are its two halves.
    pub q: Vec<f64>,
    pub mode: FilterMode,
    pub noise_variance: f64,
    /// Symbol index for time-varying filters, `None` when invariant.
    pub time_index: Option<usize>,
    pub jitter: Option<f64>,
}

/// Reusable buffers for repeated filter solves of one window shape.
#[derive(Debug, Clone)]
pub struct FilterDesigner {
    work: SpdWorkspace,
    a: Vec<f64>,
    weights: Vec<f64>,
}

impl FilterDesigner {
    pub fn new(mats: &ConvolutionMatrices) -> Self {
        let n = mats.rows();
        Self {
            work: SpdWorkspace::new(n),
            a: vec![0.0; n * n],
            weights: vec![0.0; mats.cols()],
        }
    }

    /// Time-varying taps; `z` holds the prior variance of every window column
    /// (entries for fed-back columns and the current symbol are ignored).
    pub fn tv(
        &mut self,
        mats: &ConvolutionMatrices,
        z: &[f64],
        n0: f64,
        time_index: usize,
    ) -> Result<DfeFilters> {
        check_len(mats.cols(), z.len())?;
        for (w, &zj) in self.weights.iter_mut().zip(z) {
            *w = zj;
        }
        self.design(mats, n0, FilterMode::TimeVarying, Some(time_index))
    }

    pub fn tiv(&mut self, mats: &ConvolutionMatrices, n0: f64) -> Result<DfeFilters> {
        self.weights.fill(1.0);
        self.design(mats, n0, FilterMode::TimeInvariant, None)
    }

    fn design(
        &mut self,
        mats: &ConvolutionMatrices,
        n0: f64,
        mode: FilterMode,
        time_index: Option<usize>,
    ) -> Result<DfeFilters> {
        if !(n0 > 0.0 && n0.is_finite()) {
            return Err(Error::InvalidNoiseVariance(n0));
        }
        let n = mats.rows();
        let a = &mut self.a;
        a.fill(0.0);
        for i in 0..n {
            a[i * n + i] = n0;
        }
        // H Σ Hᵀ + (1 - z_n) s sᵀ: the current column always enters with weight 1.
        for j in mats.feedback..mats.cols() {
            let w = if j == mats.target {
                1.0
            } else {
                self.weights[j]
            };
            if w == 0.0 {
                continue;
            }
            let band = mats.band(j);
            let f = band.first_row;
            for (x, &vx) in band.values.iter().enumerate() {
                let row = (f + x) * n + f;
                let wv = w * vx;
                for (y, &vy) in band.values[..=x].iter().enumerate() {
                    a[row + y] += wv * vy;
                }
            }
        }
        let c = self.work.solve(a, &mats.s, time_index)?;
        let q = mats.project(&c);
        let p0 = q[mats.target];
        if !(p0 > MIN_GAIN) {
            return Err(Error::NonPositiveGain { p0, time_index });
        }
        Ok(DfeFilters {
            d: q[..mats.feedback].to_vec(),
            p: q[mats.feedback..].to_vec(),
            c,
            p0,
            q,
            mode,
            noise_variance: n0,
            time_index,
            jitter: self.work.last_jitter,
        })
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// `c = (H Σ Hᵀ + (1 - z_n) s sᵀ + N0 I)⁻¹ s` for one symbol.
pub fn compute_tv_filters(
    mats: &ConvolutionMatrices,
    z: &[f64],
    n0: f64,
    time_index: usize,
) -> Result<DfeFilters> {
    FilterDesigner::new(mats).tv(mats, z, n0, time_index)
}

/// `c = (H Σ Hᵀ + N0 I)⁻¹ s` with unit variances on all non-fed-back columns.
pub fn compute_tiv_filters(mats: &ConvolutionMatrices, n0: f64) -> Result<DfeFilters> {
    FilterDesigner::new(mats).tiv(mats, n0)
}

/// Residual variance `Var(v_n)` of the biased output.
pub fn output_noise_variance(mats: &ConvolutionMatrices, f: &DfeFilters, z: &[f64]) -> f64 {
    let closed = f.p0 * (1.0 - f.p0);
    if f.mode == FilterMode::TimeVarying && f.jitter.is_none() && closed > 0.0 {
        return closed;
    }
    let mut v = f.noise_variance * dot(&f.c, &f.c);
    for j in mats.feedback..mats.cols() {
        if j != mats.target {
            v += z[j] * f.q[j] * f.q[j];
        }
    }
    v.max(f64::MIN_POSITIVE)
}

/// Everything one DFE step reads.
#[derive(Debug, Clone, Copy)]
pub struct StepWindow<'a> {
    /// One received sample per row of `H`.
    pub samples: &'a [f64],
    /// Prior means per column of `H`; fed-back columns are ignored.
    pub mean: &'a [f64],
    /// Prior variances per column of `H`.
    pub z: &'a [f64],
    /// Fed-back hard decisions, oldest first.
    pub decisions: &'a [f64],
    /// Posterior LLRs of the fed-back symbols.
    pub causal_llr: &'a [f64],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfeStepOutput {
    pub y: f64,
    pub p0: f64,
    pub var_v: f64,
    pub mean_i: f64,
    pub var_i: f64,
    pub prob_i_zero: f64,
    pub log_prob_i_zero: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPropStats {
    pub mean_i: f64,
    pub var_i: f64,
    pub prob_i_zero: f64,
    pub log_prob_i_zero: f64,
}

/// Mean and variance of the feedback error term and the probability that
/// every fed-back decision is right, from the causal posteriors.
pub fn error_prop_stats(d: &[f64], causal_llr: &[f64], decisions: &[f64]) -> ErrorPropStats {
    debug_assert_eq!(d.len(), causal_llr.len());
    debug_assert_eq!(d.len(), decisions.len());
    let mut mean_i = 0.0;
    let mut var_i = 0.0;
    let mut log_p = 0.0;
    for ((&dk, &l), &xh) in d.iter().zip(causal_llr).zip(decisions) {
        mean_i += dk * (llr::soft_mean(l) - xh);
        var_i += dk * dk * prior_variance(l);
        log_p += ln_sigmoid(l.abs());
    }
    ErrorPropStats {
        mean_i,
        var_i,
        prob_i_zero: log_p.exp(),
        log_prob_i_zero: log_p,
    }
}

pub fn dfe_equalize_step(
    mats: &ConvolutionMatrices,
    f: &DfeFilters,
    w: &StepWindow<'_>,
) -> DfeStepOutput {
    let ld = mats.feedback;
    let mut y = dot(&f.c, w.samples) - dot(&f.d, w.decisions);
    for j in ld..mats.cols() {
        if j != mats.target {
            y -= f.q[j] * w.mean[j];
        }
    }
    let var_v = output_noise_variance(mats, f, w.z);
    let stats = error_prop_stats(&f.d, w.causal_llr, w.decisions);
    let mut out = DfeStepOutput {
        y,
        p0: f.p0,
        var_v,
        mean_i: stats.mean_i,
        var_i: stats.var_i,
        prob_i_zero: stats.prob_i_zero,
        log_prob_i_zero: stats.log_prob_i_zero,
        phi: 0.0,
    };
    out.phi = phi(&out);
    out
}

/// `p0 (y - E(i | i ≠ 0)) / Var(v)`.
pub fn phi(out: &DfeStepOutput) -> f64 {
    let p_err = -out.log_prob_i_zero.exp_m1();
    let shift = if p_err > 0.0 { out.mean_i / p_err } else { 0.0 };
    out.p0 * (out.y - shift) / out.var_v
}

pub fn conventional_llr(out: &DfeStepOutput) -> f64 {
    clamp(2.0 * out.p0 * out.y / out.var_v)
}

/// Two-case mixture over `i = 0` and `i ≠ 0`, the second branch using the
/// linearised LLR `2φ/(1+|φ|)`.
pub fn proposed_llr(out: &DfeStepOutput) -> f64 {
    let le0 = 2.0 * out.p0 * out.y / out.var_v;
    let ln_p0 = out.log_prob_i_zero.min(0.0);
    if out.prob_i_zero >= 1.0 || ln_p0 == 0.0 {
        return clamp(le0);
    }
    let ln_p1 = (-ln_p0.exp_m1()).ln();
    let phi = phi(out);
    let le1 = 2.0 * phi / (1.0 + phi.abs());
    let num = log_add(ln_sigmoid(le0) + ln_p0, ln_sigmoid(le1) + ln_p1);
    let den = log_add(ln_sigmoid(-le0) + ln_p0, ln_sigmoid(-le1) + ln_p1);
    clamp(num - den)
}

/// Exact mixture over all `2^{L_d}` causal error patterns, with the pattern
/// probabilities factorised over the causal posteriors.
pub fn enumerated_llr(
    out: &DfeStepOutput,
    d: &[f64],
    causal_llr: &[f64],
    decisions: &[f64],
) -> Result<f64> {
    let ld = d.len();
    if ld > MAX_ENUMERATED_FEEDBACK {
        return Err(Error::FeedbackTooLong(ld));
    }
    check_len(ld, causal_llr.len())?;
    check_len(ld, decisions.len())?;
    let scale = 2.0 * out.p0 / out.var_v;
    let mut num = f64::NEG_INFINITY;
    let mut den = f64::NEG_INFINITY;
    for mask in 0usize..1 << ld {
        let mut ln_pr = 0.0;
        let mut isi = 0.0;
        for k in 0..ld {
            let x = if mask >> k & 1 == 0 { 1.0 } else { -1.0 };
            ln_pr += ln_sigmoid(x * causal_llr[k]);
            isi += d[k] * (x - decisions[k]);
        }
        let le = scale * (out.y - isi);
        num = log_add(num, ln_pr + ln_sigmoid(le));
        den = log_add(den, ln_pr + ln_sigmoid(-le));
    }
    Ok(clamp(num - den))
}

/// `+1` iff `Le + La ≥ 0`.
#[inline]
pub fn slice_decision(le: f64, la: f64) -> f64 {
    llr::hard_symbol(le + la)
}

/// Guard symbols needed on each side of the payload by a window shape.
pub fn required_guard(mats: &ConvolutionMatrices) -> usize {
    mats.target.max(mats.lc() - mats.lag)
}

/// Prior means and variances over the whole frame, padded with known guard
/// statistics so any window column can be read without bounds logic.
struct PaddedPriors {
    mean: Vec<f64>,
    z: Vec<f64>,
    pad: usize,
}

impl PaddedPriors {
    fn new(rx: &ReceivedFrame, ap: &AprioriFrame, pad: usize, tail: usize) -> Self {
        let len = pad + rx.layout.total() + tail;
        let mut mean = vec![GUARD_SYMBOL; len];
        let mut z = vec![0.0; len];
        let start = pad + rx.layout.guard_prefix;
        mean[start..start + ap.len()].copy_from_slice(&ap.mean);
        z[start..start + ap.len()].copy_from_slice(&ap.z);
        Self { mean, z, pad }
    }

    /// Columns of the window whose first column is frame symbol `first`.
    fn window(&self, first: isize, cols: usize) -> (&[f64], &[f64]) {
        let s = (first + self.pad as isize) as usize;
        (&self.mean[s..s + cols], &self.z[s..s + cols])
    }
}

fn check_block(mats: &ConvolutionMatrices, rx: &ReceivedFrame, ap: &AprioriFrame) -> Result<()> {
    check_len(rx.layout.payload_len, ap.len())?;
    check_len(rx.layout.total() + mats.channel_len() - 1, rx.samples.len())?;
    rx.layout.require_guards(required_guard(mats))
}

/// SISO MMSE linear equalizer over one block.
pub fn le_run_block(
    mode: FilterMode,
    mats: &ConvolutionMatrices,
    rx: &ReceivedFrame,
    ap: &AprioriFrame,
) -> Result<LlrFrame> {
    if mats.feedback != 0 {
        return Err(Error::InvalidEqualizer(
            "linear equalizer window has feedback columns".into(),
        ));
    }
    check_block(mats, rx, ap)?;
    let n0 = rx.noise_variance;
    let cols = mats.cols();
    let priors = PaddedPriors::new(rx, ap, mats.target, cols);
    let mut designer = FilterDesigner::new(mats);
    let tiv = match mode {
        FilterMode::TimeInvariant => Some(designer.tiv(mats, n0)?),
        FilterMode::TimeVarying => None,
    };
    let mut values = Vec::with_capacity(ap.len());
    for n in rx.layout.payload_range() {
        let (mean, z) = priors.window(n as isize - mats.target as isize, cols);
        let tv;
        let f = match &tiv {
            Some(f) => f,
            None => {
                tv = designer.tv(mats, z, n0, n)?;
                &tv
            }
        };
        let r0 = n - mats.lag;
        let mut y = dot(&f.c, &rx.samples[r0..r0 + mats.rows()]);
        for j in 0..cols {
            if j != mats.target {
                y -= f.q[j] * mean[j];
            }
        }
        let var_v = output_noise_variance(mats, f, z);
        values.push(clamp(2.0 * f.p0 * y / var_v));
    }
    Ok(LlrFrame {
        values,
        role: LlrRole::Extrinsic,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DfeBlockOutput {
    pub extrinsic: LlrFrame,
    pub trace: UnbiasedTrace,
    /// Symbols whose filter solve needed diagonal loading.
    pub jitter_events: usize,
}

/// One left-to-right DFE pass over the payload. `ideal` (true payload
/// symbols) replaces the fed-back decisions and marks them certain.
pub fn dfe_run_block(
    filter_mode: FilterMode,
    llr_mode: LlrMode,
    mats: &ConvolutionMatrices,
    rx: &ReceivedFrame,
    ap: &AprioriFrame,
    ideal: Option<&[f64]>,
) -> Result<DfeBlockOutput> {
    let ld = mats.feedback;
    if ld + 1 < mats.channel_len() || mats.target != ld || mats.lag != 0 {
        return Err(Error::InvalidEqualizer(format!(
            "DFE needs a causal window with at least L_h - 1 = {} feedback taps, got {ld}",
            mats.channel_len() - 1
        )));
    }
    check_block(mats, rx, ap)?;
    if let Some(truth) = ideal {
        check_len(ap.len(), truth.len())?;
    }
    let layout = rx.layout;
    let n0 = rx.noise_variance;
    let cols = mats.cols();
    let rows = mats.rows();
    let priors = PaddedPriors::new(rx, ap, 0, cols);
    let mut designer = FilterDesigner::new(mats);
    let tiv = match filter_mode {
        FilterMode::TimeInvariant => Some(designer.tiv(mats, n0)?),
        FilterMode::TimeVarying => None,
    };

    let mut decisions = vec![GUARD_SYMBOL; layout.total()];
    let mut posterior = vec![L_MAX; layout.total()];
    let payload = layout.payload_len;
    let mut values = Vec::with_capacity(payload);
    let mut trace = UnbiasedTrace::with_capacity(payload);
    let mut jitter_events = 0;

    for (k, n) in layout.payload_range().enumerate() {
        let (mean, z) = priors.window((n - ld) as isize, cols);
        let tv;
        let f = match &tiv {
            Some(f) => f,
            None => {
                tv = designer.tv(mats, z, n0, n)?;
                &tv
            }
        };
        if f.jitter.is_some() {
            jitter_events += 1;
        }
        let window = StepWindow {
            samples: &rx.samples[n..n + rows],
            mean,
            z,
            decisions: &decisions[n - ld..n],
            causal_llr: &posterior[n - ld..n],
        };
        let out = dfe_equalize_step(mats, f, &window);
        let le = match llr_mode {
            LlrMode::Conventional => conventional_llr(&out),
            LlrMode::Proposed => proposed_llr(&out),
        };
        let la = ap.la.values[k];
        let (xh, post) = match ideal {
            Some(truth) => (truth[k], L_MAX * truth[k]),
            None => (slice_decision(le, la), clamp(la + le)),
        };
        decisions[n] = xh;
        posterior[n] = post;
        values.push(le);
        trace.push(
            out.y / out.p0,
            out.mean_i / out.p0,
            xh,
            out.var_v / (out.p0 * out.p0),
        );
    }
    Ok(DfeBlockOutput {
        extrinsic: LlrFrame {
            values,
            role: LlrRole::Extrinsic,
        },
        trace,
        jitter_events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{
        apply_channel, bpsk_modulate, build_convolution_matrices, build_le_matrices, IsiChannel,
    };
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn step(y: f64, p0: f64, var_v: f64, mean_i: f64, prob_i_zero: f64) -> DfeStepOutput {
        let mut out = DfeStepOutput {
            y,
            p0,
            var_v,
            mean_i,
            var_i: 0.0,
            prob_i_zero,
            log_prob_i_zero: prob_i_zero.ln(),
            phi: 0.0,
        };
        out.phi = phi(&out);
        out
    }

    #[test]
    fn scalar_filter() {
        let ch = IsiChannel::new(vec![1.0]).unwrap();
        let m = build_convolution_matrices(&ch, 0, 0);
        let f = compute_tiv_filters(&m, 1.0).unwrap();
        assert!((f.c[0] - 0.5).abs() < 1e-15);
        assert!((f.p0 - 0.5).abs() < 1e-15);
        assert!((output_noise_variance(&m, &f, &[1.0]) - 0.25).abs() < 1e-15);
        let tv = compute_tv_filters(&m, &[1.0], 1.0, 0).unwrap();
        assert!((output_noise_variance(&m, &tv, &[1.0]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn tiv_equals_tv_without_priors() {
        let ch = IsiChannel::h1();
        let m = build_convolution_matrices(&ch, 16, 4);
        let tiv = compute_tiv_filters(&m, 0.25).unwrap();
        let tv = compute_tv_filters(&m, &vec![1.0; m.cols()], 0.25, 7).unwrap();
        for (a, b) in tiv.c.iter().zip(&tv.c) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn perfect_priors_give_matched_filter() {
        let ch = IsiChannel::h2();
        let m = build_convolution_matrices(&ch, 20, 6);
        let n0 = 0.3;
        let mut z = vec![0.0; m.cols()];
        z[m.target] = 1.0;
        let f = compute_tv_filters(&m, &z, n0, 0).unwrap();
        let a = 1.0 / (n0 + ch.energy());
        for (i, c) in f.c.iter().enumerate() {
            let h = ch.taps().get(i).copied().unwrap_or(0.0);
            assert!((c - a * h).abs() < 1e-12);
        }
    }

    #[test]
    fn feedback_taps_are_projection() {
        let ch = IsiChannel::h1();
        let m = build_convolution_matrices(&ch, 16, 4);
        let f = compute_tiv_filters(&m, 0.1).unwrap();
        let q = m.h.tr_matvec(&f.c);
        assert_eq!(f.d.len(), 4);
        for (a, b) in f.d.iter().zip(&q) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((f.p0 - dot(&f.c, &m.s)).abs() < 1e-14);
    }

    #[test]
    fn error_prop_limits() {
        let s = error_prop_stats(&[0.4, -0.2], &[L_MAX, -L_MAX], &[1.0, -1.0]);
        assert!(s.mean_i.abs() < 1e-15 && s.var_i < 1e-20);
        assert_eq!(s.prob_i_zero, 1.0);
        let s = error_prop_stats(&[0.4, -0.2, 0.1], &[0.0; 3], &[1.0; 3]);
        assert!((s.prob_i_zero - 0.125).abs() < 1e-15);
    }

    #[test]
    fn error_prop_hand_values() {
        let d = [0.3, -0.2];
        let l = [1.0, -0.5];
        let x = [1.0, -1.0];
        let s = error_prop_stats(&d, &l, &x);
        let t0 = (0.5f64).tanh();
        let t1 = (-0.25f64).tanh();
        let mean = 0.3 * (t0 - 1.0) - 0.2 * (t1 + 1.0);
        let var = 0.09 * (1.0 - t0 * t0) + 0.04 * (1.0 - t1 * t1);
        let p = (1f64.exp() / (1.0 + 1f64.exp())) * (0.5f64.exp() / (1.0 + 0.5f64.exp()));
        assert!((s.mean_i - mean).abs() < 1e-15);
        assert!((s.var_i - var).abs() < 1e-15);
        assert!((s.prob_i_zero - p).abs() < 1e-15);
    }

    #[test]
    fn llr_examples() {
        assert!((conventional_llr(&step(0.5, 0.8, 0.2, 0.0, 1.0)) - 4.0).abs() < 1e-12);
        assert_eq!(conventional_llr(&step(0.0, 0.8, 0.2, 0.0, 1.0)), 0.0);
        let out = step(3.0, 1.0, 1.0, 0.0, 0.0);
        assert!((out.phi - 3.0).abs() < 1e-15);
        assert!((proposed_llr(&out) - 1.5).abs() < 1e-12);
        let c = step(0.3, 0.6, 0.3, 0.1, 1.0);
        assert_eq!(proposed_llr(&c), conventional_llr(&c));
    }

    #[test]
    fn enumerated_with_certain_history_is_conventional() {
        let out = step(0.4, 0.7, 0.25, 0.0, 1.0);
        let e = enumerated_llr(
            &out,
            &[0.2, -0.1, 0.3],
            &[L_MAX, -L_MAX, L_MAX],
            &[1.0, -1.0, 1.0],
        )
        .unwrap();
        assert!((e - conventional_llr(&out)).abs() < 1e-9);
        assert!(enumerated_llr(&out, &[0.0; 13], &[0.0; 13], &[1.0; 13]).is_err());
    }

    #[test]
    fn slicing() {
        assert_eq!(slice_decision(1.0, -0.5), 1.0);
        assert_eq!(slice_decision(0.0, 0.0), 1.0);
        assert_eq!(slice_decision(-3.0, 1.0), -1.0);
    }

    #[test]
    fn memoryless_extrinsic_ignores_own_prior() {
        let ch = IsiChannel::new(vec![1.0]).unwrap();
        let m = build_convolution_matrices(&ch, 2, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bits: Vec<u8> = (0..50).map(|_| rng.random_range(0..2)).collect();
        let frame = bpsk_modulate(&bits, 4, 4);
        let rx = apply_channel(&ch, &frame, 0.5, &mut rng).unwrap();
        let la: Vec<f64> = (0..50).map(|_| rng.random_range(-6.0..6.0)).collect();
        let mut la2 = la.clone();
        la2[20] += 9.0;
        for mode in [FilterMode::TimeVarying, FilterMode::TimeInvariant] {
            let a = dfe_run_block(
                mode,
                LlrMode::Conventional,
                &m,
                &rx,
                &AprioriFrame::from_values(la.clone()),
                None,
            )
            .unwrap();
            let b = dfe_run_block(
                mode,
                LlrMode::Conventional,
                &m,
                &rx,
                &AprioriFrame::from_values(la2.clone()),
                None,
            )
            .unwrap();
            assert!((a.extrinsic.values[20] - b.extrinsic.values[20]).abs() < 1e-9);
            for (l, r) in a.extrinsic.values.iter().zip(&rx.samples[4..54]) {
                assert!((l - 2.0 * r / 0.5).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn le_matches_dfe_on_memoryless_channel() {
        let ch = IsiChannel::new(vec![1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bits: Vec<u8> = (0..30).map(|_| rng.random_range(0..2)).collect();
        let frame = bpsk_modulate(&bits, 6, 6);
        let rx = apply_channel(&ch, &frame, 0.8, &mut rng).unwrap();
        let ap = AprioriFrame::from_values((0..30).map(|_| rng.random_range(-3.0..3.0)).collect());
        let le = le_run_block(
            FilterMode::TimeVarying,
            &build_le_matrices(&ch, 5).unwrap(),
            &rx,
            &ap,
        )
        .unwrap();
        let dfe = dfe_run_block(
            FilterMode::TimeVarying,
            LlrMode::Conventional,
            &build_convolution_matrices(&ch, 4, 0),
            &rx,
            &ap,
            None,
        )
        .unwrap();
        for (a, b) in le.values.iter().zip(&dfe.extrinsic.values) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn noiseless_signs_correct() {
        let ch = IsiChannel::h1();
        let m = build_convolution_matrices(&ch, 16, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let bits: Vec<u8> = (0..400).map(|_| rng.random_range(0..2)).collect();
        let frame = bpsk_modulate(&bits, 16, 16);
        let rx = apply_channel(&ch, &frame, 1e-8, &mut rng).unwrap();
        let ap = AprioriFrame::zeros(400);
        for fm in [FilterMode::TimeVarying, FilterMode::TimeInvariant] {
            for lm in [LlrMode::Conventional, LlrMode::Proposed] {
                let out = dfe_run_block(fm, lm, &m, &rx, &ap, None).unwrap();
                for (l, x) in out.extrinsic.values.iter().zip(frame.payload()) {
                    assert!(l * x > 0.0);
                }
                assert_eq!(out.trace.decisions, frame.payload());
            }
        }
    }

    #[test]
    fn rejects_short_feedback_and_guards() {
        let ch = IsiChannel::h1();
        let frame = bpsk_modulate(&[0; 8], 16, 16);
        let rx = apply_channel(&ch, &frame, 0.1, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let ap = AprioriFrame::zeros(8);
        let short = build_convolution_matrices(&ch, 8, 3);
        assert!(dfe_run_block(
            FilterMode::TimeInvariant,
            LlrMode::Conventional,
            &short,
            &rx,
            &ap,
            None
        )
        .is_err());
        let long = build_convolution_matrices(&ch, 20, 4);
        assert!(matches!(
            dfe_run_block(
                FilterMode::TimeInvariant,
                LlrMode::Conventional,
                &long,
                &rx,
                &ap,
                None
            ),
            Err(Error::GuardTooShort {
                needed: 20,
                have: 16
            })
        ));
    }

    proptest! {
        #[test]
        fn proposed_is_conventional_when_history_certain(
            y in -5.0f64..5.0, p0 in 0.05f64..1.0, v in 0.01f64..2.0, m in -1.0f64..1.0
        ) {
            let out = step(y, p0, v, m, 1.0);
            prop_assert_eq!(proposed_llr(&out).to_bits(), conventional_llr(&out).to_bits());
        }

        #[test]
        fn proposed_is_odd_without_mean(
            y in -5.0f64..5.0, p0 in 0.05f64..1.0, v in 0.01f64..2.0, p in 0.0f64..1.0
        ) {
            let a = proposed_llr(&step(y, p0, v, 0.0, p));
            let b = proposed_llr(&step(-y, p0, v, 0.0, p));
            prop_assert!((a + b).abs() < 1e-9);
        }

        #[test]
        fn llrs_monotone_in_y(
            y in -5.0f64..5.0, dy in 1e-3f64..1.0, p0 in 0.05f64..1.0, v in 0.05f64..2.0,
            m in -0.5f64..0.5, p in 0.0f64..1.0
        ) {
            let lo = step(y, p0, v, m, p);
            let hi = step(y + dy, p0, v, m, p);
            prop_assert!(proposed_llr(&hi) >= proposed_llr(&lo));
            let (cl, ch) = (conventional_llr(&lo), conventional_llr(&hi));
            prop_assert!(ch > cl || ch == L_MAX || cl == -L_MAX);
        }
    }
}
