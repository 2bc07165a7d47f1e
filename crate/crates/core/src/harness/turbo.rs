//! One coded block through the iterative equalizer/decoder loop.

use rand::{Rng, RngCore};

use super::config::{EqualizerKind, ExperimentConfig};
use super::exit::measure_mi;
use super::seeds::{block_rng, snr_key, Stream};
use crate::analysis::noise_variance_for_snr_db;
use crate::bidfe::{bidfe_run_block, CorrelationEstimate};
use crate::dfe::{dfe_run_block, le_run_block, required_guard, AprioriFrame};
use crate::llr::{LlrFrame, LlrRole};
use crate::signal::{
    apply_channel, bit_to_symbol, bpsk_modulate, build_convolution_matrices, build_le_matrices,
    time_reverse_channel, ConvolutionMatrices, ReceivedFrame, SymbolFrame,
};
use crate::trellis::{bcjr_decode, bcjr_equalize, Interleaver, RscCode};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct IterationStats {
    pub bit_errors: u64,
    /// BiDFE variants only.
    pub rho: Option<CorrelationEstimate>,
    pub jitter_events: usize,
    /// MI of the equalizer extrinsic about the transmitted symbols.
    pub mi_equalizer: f64,
    /// MI of the decoder extrinsic about the coded bits.
    pub mi_decoder: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockResult {
    pub message_bits: usize,
    pub iterations: Vec<IterationStats>,
}

impl BlockResult {
    pub fn final_errors(&self) -> u64 {
        self.iterations.last().map_or(0, |s| s.bit_errors)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualizerOutput {
    pub extrinsic: LlrFrame,
    pub rho: Option<CorrelationEstimate>,
    pub jitter_events: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub bits: Vec<u8>,
    pub coded: Vec<u8>,
    pub interleaver: Interleaver,
    pub frame: SymbolFrame,
    pub rx: ReceivedFrame,
}

/// Window matrices and guard length resolved once per configuration.
#[derive(Debug, Clone)]
pub struct TurboRunner {
    cfg: ExperimentConfig,
    kind: EqualizerKind,
    mats_dfe: ConvolutionMatrices,
    mats_dfe_rev: ConvolutionMatrices,
    mats_le: ConvolutionMatrices,
    guard: usize,
}

impl TurboRunner {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let l = cfg.lengths();
        let lc = l.dfe_feedforward - 1;
        let mats_dfe = build_convolution_matrices(&cfg.channel, lc, l.dfe_feedback);
        let rev = time_reverse_channel(&cfg.channel);
        let mats_dfe_rev = build_convolution_matrices(&rev, lc, l.dfe_feedback);
        let mats_le = build_le_matrices(&cfg.channel, l.le_taps)?;
        // One guard for every variant keeps the noise draws paired.
        let guard = required_guard(&mats_dfe).max(required_guard(&mats_le));
        Ok(Self {
            cfg: cfg.clone(),
            kind: cfg.equalizer(),
            mats_dfe,
            mats_dfe_rev,
            mats_le,
            guard,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn guard(&self) -> usize {
        self.guard
    }

    pub fn dfe_matrices(&self) -> (&ConvolutionMatrices, &ConvolutionMatrices) {
        (&self.mats_dfe, &self.mats_dfe_rev)
    }

    /// One soft-in soft-out equalizer pass. `truth` holds the payload
    /// symbols and is only used by DFE variants for ideal feedback.
    pub fn equalize(
        &self,
        rx: &ReceivedFrame,
        apriori: &[f64],
        truth: Option<&[f64]>,
    ) -> Result<EqualizerOutput> {
        let la = LlrFrame::new(apriori.to_vec(), LlrRole::APriori);
        let plain = |extrinsic| EqualizerOutput {
            extrinsic,
            rho: None,
            jitter_events: 0,
        };
        match self.kind {
            EqualizerKind::Map => Ok(plain(bcjr_equalize(&self.cfg.channel, rx, &la)?)),
            EqualizerKind::Le(mode) => Ok(plain(le_run_block(
                mode,
                &self.mats_le,
                rx,
                &AprioriFrame::new(la),
            )?)),
            EqualizerKind::Dfe(fm, lm) => {
                let out = dfe_run_block(fm, lm, &self.mats_dfe, rx, &AprioriFrame::new(la), truth)?;
                Ok(EqualizerOutput {
                    extrinsic: out.extrinsic,
                    rho: None,
                    jitter_events: out.jitter_events,
                })
            }
            EqualizerKind::Bidfe(fm, lm, comb) => {
                let out = bidfe_run_block(
                    fm,
                    lm,
                    comb,
                    &self.mats_dfe,
                    &self.mats_dfe_rev,
                    rx,
                    &AprioriFrame::new(la),
                    truth,
                )?;
                Ok(EqualizerOutput {
                    extrinsic: out.extrinsic,
                    rho: Some(out.estimate),
                    jitter_events: out.jitter_events,
                })
            }
        }
    }

    pub fn run_block(&self, snr_db: f64, block: u64) -> Result<BlockResult> {
        self.run_block_inner(snr_db, block)
            .map_err(|e| Error::Block {
                block,
                snr_db,
                source: Box::new(e),
            })
    }

    /// Message, interleaver, symbol frame and received samples of one block.
    /// Depends only on the seed, the SNR point, the block index and the
    /// guard, never on the variant.
    pub fn transmit(&self, snr_db: f64, block: u64) -> Result<Transmission> {
        let cfg = &self.cfg;
        let key = snr_key(snr_db);
        let mut rng = block_rng(cfg.seed, key, block, Stream::Bits);
        let bits: Vec<u8> = (0..cfg.message_bits)
            .map(|_| rng.random_range(0..2))
            .collect();
        let coded = RscCode.encode(&bits);
        let interleaver = if cfg.interleaver {
            let s = block_rng(cfg.seed, key, block, Stream::Interleaver).next_u64();
            Interleaver::random(coded.len(), s)
        } else {
            Interleaver::identity(coded.len())
        };
        let frame = bpsk_modulate(&interleaver.interleave(&coded)?, self.guard, self.guard);
        let mut noise = block_rng(cfg.seed, key, block, Stream::Noise);
        let rx = apply_channel(
            &cfg.channel,
            &frame,
            noise_variance_for_snr_db(snr_db),
            &mut noise,
        )?;
        Ok(Transmission {
            bits,
            coded,
            interleaver,
            frame,
            rx,
        })
    }

    fn run_block_inner(&self, snr_db: f64, block: u64) -> Result<BlockResult> {
        let cfg = &self.cfg;
        let Transmission {
            bits,
            coded,
            interleaver: il,
            frame,
            rx,
        } = self.transmit(snr_db, block)?;

        let truth = cfg.ideal_feedback.then(|| frame.payload());
        let coded_symbols: Vec<f64> = coded.iter().map(|&b| bit_to_symbol(b)).collect();
        let mut la = vec![0.0; coded.len()];
        let mut iterations = Vec::with_capacity(cfg.iterations);
        for _ in 0..cfg.iterations {
            let eq = self.equalize(&rx, &la, truth)?;
            let mi_equalizer = measure_mi(&eq.extrinsic.values, frame.payload());
            let dec_in = LlrFrame::new(il.deinterleave(&eq.extrinsic.values)?, LlrRole::APriori);
            let dec = bcjr_decode(&RscCode, &dec_in)?;
            let bit_errors = dec
                .message_bits()
                .iter()
                .zip(&bits)
                .filter(|(a, b)| a != b)
                .count() as u64;
            let mi_decoder = measure_mi(&dec.extrinsic.values, &coded_symbols);
            la = il.interleave(&dec.extrinsic.values)?;
            iterations.push(IterationStats {
                bit_errors,
                rho: eq.rho,
                jitter_events: eq.jitter_events,
                mi_equalizer,
                mi_decoder,
            });
        }
        Ok(BlockResult {
            message_bits: cfg.message_bits,
            iterations,
        })
    }
}

pub fn run_turbo_block(cfg: &ExperimentConfig, snr_db: f64, block: u64) -> Result<BlockResult> {
    TurboRunner::new(cfg)?.run_block(snr_db, block)
}
