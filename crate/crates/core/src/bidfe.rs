//! Bidirectional DFE: a forward pass and a pass over the time-reversed block,
//! the residual correlation estimate between them, and the LLR combiners.

use crate::dfe::{
    dfe_run_block, output_noise_variance, AprioriFrame, DfeFilters, FilterMode, LlrMode,
};
use crate::llr::{clamp, LlrFrame, LlrRole};
use crate::numerics::dot;
use crate::signal::{ConvolutionMatrices, ReceivedFrame};
use crate::Result;

/// Floor of the clamped correlation estimate.
pub const RHO_FLOOR: f64 = -1.0 + 1e-6;

/// Unbiased DFE outputs `Y = y/p0` with the matching feedback-error means,
/// decisions and residual variances, in payload order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UnbiasedTrace {
    pub y: Vec<f64>,
    pub mean_i: Vec<f64>,
    pub decisions: Vec<f64>,
    pub var_v: Vec<f64>,
}

impl UnbiasedTrace {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            y: Vec::with_capacity(n),
            mean_i: Vec::with_capacity(n),
            decisions: Vec::with_capacity(n),
            var_v: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, y: f64, mean_i: f64, decision: f64, var_v: f64) {
        self.y.push(y);
        self.mean_i.push(mean_i);
        self.decisions.push(decision);
        self.var_v.push(var_v);
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn reversed(&self) -> Self {
        let rev = |v: &Vec<f64>| v.iter().rev().copied().collect();
        Self {
            y: rev(&self.y),
            mean_i: rev(&self.mean_i),
            decisions: rev(&self.decisions),
            var_v: rev(&self.var_v),
        }
    }

    pub fn mean_var_v(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.var_v.iter().sum::<f64>() / self.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationEstimate {
    pub rho_hat: f64,
    pub sample_count: usize,
    pub agreement_fraction: f64,
    /// False when no usable samples were found; `rho_hat` is then 0.
    pub valid: bool,
}

/// Time-averaged correlation of the residuals `Y - X̂ - E(I)`, using only
/// symbols where both passes decided alike.
pub fn estimate_rho(fwd: &UnbiasedTrace, bwd: &UnbiasedTrace) -> CorrelationEstimate {
    let n = fwd.len().min(bwd.len());
    let mut sff = 0.0;
    let mut sbb = 0.0;
    let mut sfb = 0.0;
    let mut count = 0usize;
    for i in 0..n {
        let x = fwd.decisions[i];
        if x != bwd.decisions[i] {
            continue;
        }
        let uf = fwd.y[i] - x - fwd.mean_i[i];
        let ub = bwd.y[i] - x - bwd.mean_i[i];
        sff += uf * uf;
        sbb += ub * ub;
        sfb += uf * ub;
        count += 1;
    }
    let agreement_fraction = if n == 0 { 0.0 } else { count as f64 / n as f64 };
    let den = sff.sqrt() * sbb.sqrt();
    if count == 0 || !(den > 0.0) {
        return CorrelationEstimate {
            rho_hat: 0.0,
            sample_count: count,
            agreement_fraction,
            valid: false,
        };
    }
    CorrelationEstimate {
        rho_hat: (sfb / den).clamp(RHO_FLOOR, 1.0),
        sample_count: count,
        agreement_fraction,
        valid: true,
    }
}

/// Eigen-structure of the 2×2 residual covariance
/// `R = [[Nf, ρ√(NfNb)], [ρ√(NfNb), Nb]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseCorrelationModel {
    pub nf: f64,
    pub nb: f64,
    pub rho: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub g1: [f64; 2],
    pub g2: [f64; 2],
    /// Whitening matrix `A = Gᵀ`, row-major.
    pub a: [[f64; 2]; 2],
}

impl NoiseCorrelationModel {
    pub fn new(nf: f64, nb: f64, rho: f64) -> Self {
        let rho = rho.clamp(-1.0, 1.0);
        let off = rho * (nf * nb).sqrt();
        let half = 0.5 * (nf - nb);
        let root = (half * half + off * off).sqrt();
        let mid = 0.5 * (nf + nb);
        let theta = 0.5 * (2.0 * off).atan2(nf - nb);
        let (s, c) = theta.sin_cos();
        let g1 = [c, s];
        let g2 = [-s, c];
        Self {
            nf,
            nb,
            rho,
            lambda1: mid + root,
            lambda2: (mid - root).max(0.0),
            g1,
            g2,
            a: [g1, g2],
        }
    }

    pub fn covariance(&self) -> [[f64; 2]; 2] {
        let off = self.rho * (self.nf * self.nb).sqrt();
        [[self.nf, off], [off, self.nb]]
    }

    /// Sum of the per-stream LLRs after whitening, evaluated from the
    /// unbiased outputs. Undefined when `R` is singular.
    pub fn whitened_llr(&self, yf: f64, yb: f64) -> f64 {
        let wf = self.a[0][0] * yf + self.a[0][1] * yb;
        let wb = self.a[1][0] * yf + self.a[1][1] * yb;
        let gain1 = self.a[0][0] + self.a[0][1];
        let gain2 = self.a[1][0] + self.a[1][1];
        2.0 * gain1 * wf / self.lambda1 + 2.0 * gain2 * wb / self.lambda2
    }
}

/// Two-weight combination for unequal residual variances; `ρ = 1` falls back
/// to the mean combiner.
pub fn combine_whitened(lef: f64, leb: f64, model: &NoiseCorrelationModel) -> f64 {
    let rho = model.rho;
    if rho >= 1.0 {
        return combine_mean(lef, leb);
    }
    let root = (model.nf * model.nb).sqrt();
    let k = 1.0 - rho * rho;
    let wf = (model.nb - rho * root) / (k * model.nb);
    let wb = (model.nf - rho * root) / (k * model.nf);
    clamp(wf * lef + wb * leb)
}

pub fn combine_equal_variance(lef: f64, leb: f64, rho: f64) -> f64 {
    clamp((lef + leb) / (1.0 + rho.max(RHO_FLOOR)))
}

pub fn combine_mean(lef: f64, leb: f64) -> f64 {
    clamp(0.5 * (lef + leb))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Combiner {
    Mean,
    EqualVariance,
    Whitened,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BidfeOutput {
    pub extrinsic: LlrFrame,
    pub forward: LlrFrame,
    /// Backward-pass extrinsic, re-reversed into payload order.
    pub backward: LlrFrame,
    pub forward_trace: UnbiasedTrace,
    pub backward_trace: UnbiasedTrace,
    pub estimate: CorrelationEstimate,
    /// Correlation actually used by the combiner.
    pub rho_used: f64,
    pub jitter_events: usize,
}

/// Forward DFE on `rx`, backward DFE on the reversed block with the reversed
/// channel (`mats_bwd`), then per-symbol combining with the block's ρ̂.
#[allow(clippy::too_many_arguments)]
pub fn bidfe_run_block(
    filter_mode: FilterMode,
    llr_mode: LlrMode,
    combiner: Combiner,
    mats_fwd: &ConvolutionMatrices,
    mats_bwd: &ConvolutionMatrices,
    rx: &ReceivedFrame,
    ap: &AprioriFrame,
    ideal: Option<&[f64]>,
) -> Result<BidfeOutput> {
    let fwd = dfe_run_block(filter_mode, llr_mode, mats_fwd, rx, ap, ideal)?;
    let rx_rev = rx.reversed();
    let ap_rev = ap.reversed();
    let ideal_rev: Option<Vec<f64>> = ideal.map(|t| t.iter().rev().copied().collect());
    let bwd = dfe_run_block(
        filter_mode,
        llr_mode,
        mats_bwd,
        &rx_rev,
        &ap_rev,
        ideal_rev.as_deref(),
    )?;

    let backward_trace = bwd.trace.reversed();
    let backward: Vec<f64> = bwd.extrinsic.values.iter().rev().copied().collect();
    let estimate = estimate_rho(&fwd.trace, &backward_trace);
    let rho_used = if estimate.valid {
        estimate.rho_hat
    } else {
        0.0
    };

    let values = match combiner {
        Combiner::Mean => fwd
            .extrinsic
            .values
            .iter()
            .zip(&backward)
            .map(|(&f, &b)| combine_mean(f, b))
            .collect(),
        Combiner::EqualVariance => fwd
            .extrinsic
            .values
            .iter()
            .zip(&backward)
            .map(|(&f, &b)| combine_equal_variance(f, b, rho_used))
            .collect(),
        Combiner::Whitened => {
            let model = NoiseCorrelationModel::new(
                fwd.trace.mean_var_v(),
                backward_trace.mean_var_v(),
                rho_used,
            );
            fwd.extrinsic
                .values
                .iter()
                .zip(&backward)
                .map(|(&f, &b)| combine_whitened(f, b, &model))
                .collect()
        }
    };
    Ok(BidfeOutput {
        extrinsic: LlrFrame {
            values,
            role: LlrRole::Extrinsic,
        },
        forward: fwd.extrinsic,
        backward: LlrFrame {
            values: backward,
            role: LlrRole::Extrinsic,
        },
        forward_trace: fwd.trace,
        backward_trace,
        estimate,
        rho_used,
        jitter_events: fwd.jitter_events + bwd.jitter_events,
    })
}

/// Closed-form residual correlation of the two passes under ideal feedback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoMode<'a> {
    /// Time-varying filters of one symbol (variance `cᵀs(1 - sᵀc)`).
    Tv,
    /// Time-invariant filters with the prior variances of each window.
    Tiv { z_fwd: &'a [f64], z_bwd: &'a [f64] },
    /// Time-invariant filters without priors.
    NoApriori,
    /// Time-varying filters with perfect priors: always 1.
    PerfectTv,
    /// Time-invariant filters with perfect priors.
    PerfectTiv,
}

/// `Σ_j c_j c̃_{L_h-1-j}`: the forward tap on `w_{n+j}` meets the backward
/// tap on the same noise sample.
pub fn overlap_kernel(c: &[f64], c_rev: &[f64], channel_len: usize) -> f64 {
    let last = channel_len as isize - 1;
    c.iter()
        .enumerate()
        .filter_map(|(j, &cj)| {
            let k = last - j as isize;
            (k >= 0)
                .then(|| c_rev.get(k as usize).map(|&ck| cj * ck))
                .flatten()
        })
        .sum()
}

pub fn analytic_rho(
    mode: RhoMode<'_>,
    mats_fwd: &ConvolutionMatrices,
    fwd: &DfeFilters,
    mats_bwd: &ConvolutionMatrices,
    bwd: &DfeFilters,
) -> f64 {
    let n0 = fwd.noise_variance;
    let kernel = overlap_kernel(&fwd.c, &bwd.c, mats_fwd.channel_len());
    let closed = |f: &DfeFilters| (f.p0 * (1.0 - f.p0)).sqrt();
    match mode {
        RhoMode::PerfectTv => 1.0,
        RhoMode::Tv | RhoMode::NoApriori => n0 * kernel / (closed(fwd) * closed(bwd)),
        RhoMode::Tiv { z_fwd, z_bwd } => {
            let vf = output_noise_variance(mats_fwd, fwd, z_fwd);
            let vb = output_noise_variance(mats_bwd, bwd, z_bwd);
            n0 * kernel / (vf * vb).sqrt()
        }
        RhoMode::PerfectTiv => kernel / (dot(&fwd.c, &fwd.c).sqrt() * dot(&bwd.c, &bwd.c).sqrt()),
    }
}
