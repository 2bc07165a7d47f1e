//! BER sweeps and correlation trajectories over many blocks.

use super::config::ExperimentConfig;
use super::parallel::{map_ordered, with_threads};
use super::turbo::{BlockResult, TurboRunner};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub iteration: usize,
    pub bit_errors: u64,
    pub bits_counted: u64,
    pub ber: f64,
    pub blocks: u64,
}

impl BerPoint {
    /// Binomial standard error of `ber`.
    pub fn std_error(&self) -> f64 {
        if self.bits_counted == 0 {
            return 0.0;
        }
        (self.ber * (1.0 - self.ber) / self.bits_counted as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IterationTally {
    pub bit_errors: u64,
    pub rho_sum: f64,
    pub rho_sq_sum: f64,
    pub rho_valid: u64,
    /// Blocks whose ρ̂ was unusable and fell back to 0.
    pub rho_fallbacks: u64,
    pub agreement_sum: f64,
    pub jitter_events: u64,
    pub mi_equalizer_sum: f64,
    pub mi_decoder_sum: f64,
}

impl IterationTally {
    pub fn rho_mean(&self) -> Option<f64> {
        (self.rho_valid > 0).then(|| self.rho_sum / self.rho_valid as f64)
    }

    pub fn rho_std(&self) -> Option<f64> {
        let m = self.rho_mean()?;
        let n = self.rho_valid as f64;
        Some((self.rho_sq_sum / n - m * m).max(0.0).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointTally {
    pub snr_db: f64,
    pub blocks: u64,
    pub bits_per_block: u64,
    pub iterations: Vec<IterationTally>,
}

impl PointTally {
    pub fn new(snr_db: f64, iterations: usize, bits_per_block: usize) -> Self {
        Self {
            snr_db,
            blocks: 0,
            bits_per_block: bits_per_block as u64,
            iterations: vec![IterationTally::default(); iterations],
        }
    }

    pub fn absorb(&mut self, block: &BlockResult) {
        self.blocks += 1;
        for (t, s) in self.iterations.iter_mut().zip(&block.iterations) {
            t.bit_errors += s.bit_errors;
            t.jitter_events += s.jitter_events as u64;
            t.mi_equalizer_sum += s.mi_equalizer;
            t.mi_decoder_sum += s.mi_decoder;
            if let Some(e) = s.rho {
                t.agreement_sum += e.agreement_fraction;
                if e.valid {
                    t.rho_sum += e.rho_hat;
                    t.rho_sq_sum += e.rho_hat * e.rho_hat;
                    t.rho_valid += 1;
                } else {
                    t.rho_fallbacks += 1;
                }
            }
        }
    }

    pub fn final_errors(&self) -> u64 {
        self.iterations.last().map_or(0, |t| t.bit_errors)
    }

    pub fn bits_counted(&self) -> u64 {
        self.blocks * self.bits_per_block
    }

    pub fn ber_points(&self) -> Vec<BerPoint> {
        let bits = self.bits_counted();
        self.iterations
            .iter()
            .enumerate()
            .map(|(i, t)| BerPoint {
                snr_db: self.snr_db,
                iteration: i + 1,
                bit_errors: t.bit_errors,
                bits_counted: bits,
                ber: if bits == 0 {
                    0.0
                } else {
                    t.bit_errors as f64 / bits as f64
                },
                blocks: self.blocks,
            })
            .collect()
    }

    pub fn final_point(&self) -> Option<BerPoint> {
        self.ber_points().pop()
    }
}

fn batch_size() -> u64 {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads().max(1) as u64 * 2
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Runs blocks `0, 1, …` and absorbs them in index order until the block
/// cap, or until at least `min_blocks` are in and the final iteration has
/// `target_errors` errors (`0` disables the early stop). Blocks of a batch
/// past the stopping block are discarded, so the outcome does not depend on
/// the worker count.
pub fn run_point(
    runner: &TurboRunner,
    snr_db: f64,
    max_blocks: u64,
    min_blocks: u64,
    target_errors: u64,
) -> Result<PointTally> {
    let cfg = runner.config();
    let mut tally = PointTally::new(snr_db, cfg.iterations, cfg.message_bits);
    let batch = batch_size();
    let mut next = 0;
    'outer: while next < max_blocks {
        let end = (next + batch).min(max_blocks);
        let results = map_ordered(next..end, |b| runner.run_block(snr_db, b))?;
        for r in &results {
            tally.absorb(r);
            if target_errors > 0
                && tally.blocks >= min_blocks
                && tally.final_errors() >= target_errors
            {
                break 'outer;
            }
        }
        next = end;
    }
    Ok(tally)
}

pub fn run_ber_sweep(cfg: &ExperimentConfig) -> Result<Vec<PointTally>> {
    let runner = TurboRunner::new(cfg)?;
    with_threads(cfg.threads, || {
        cfg.snr_db
            .iter()
            .map(|&s| run_point(&runner, s, cfg.blocks, cfg.min_blocks, cfg.target_errors))
            .collect()
    })
}

/// All `cfg.blocks` blocks at every SNR, without early stopping.
pub fn run_rho_trajectory(cfg: &ExperimentConfig) -> Result<Vec<PointTally>> {
    let runner = TurboRunner::new(cfg)?;
    with_threads(cfg.threads, || {
        cfg.snr_db
            .iter()
            .map(|&s| run_point(&runner, s, cfg.blocks, cfg.blocks, 0))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Variant;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig {
            variant: Variant::TivDfe,
            iterations: 2,
            message_bits: 64,
            blocks: 6,
            snr_db: vec![0.0, 3.0],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn ber_is_ratio_and_counts_grow() {
        let pts = run_ber_sweep(&cfg()).unwrap();
        assert_eq!(pts.len(), 2);
        for p in pts.iter().flat_map(|t| t.ber_points()) {
            assert_eq!(p.bits_counted, p.blocks * 64);
            assert_eq!(p.ber, p.bit_errors as f64 / p.bits_counted as f64);
        }
    }

    #[test]
    fn early_stop_hits_target() {
        let mut c = cfg();
        c.snr_db = vec![-3.0];
        c.target_errors = 5;
        c.blocks = 50;
        let t = &run_ber_sweep(&c).unwrap()[0];
        assert!(t.final_errors() >= 5);
        assert!(t.blocks < 50);
        // The stopping block is the first that reaches the target.
        let runner = TurboRunner::new(&c).unwrap();
        let shorter = run_point(&runner, -3.0, t.blocks - 1, 1, 0).unwrap();
        assert!(shorter.final_errors() < 5);
    }

    #[test]
    fn empty_grid() {
        let mut c = cfg();
        c.snr_db.clear();
        assert!(run_ber_sweep(&c).unwrap().is_empty());
    }

    #[test]
    fn min_blocks_respected() {
        let mut c = cfg();
        c.snr_db = vec![-3.0];
        c.target_errors = 1;
        c.min_blocks = 4;
        assert_eq!(run_ber_sweep(&c).unwrap()[0].blocks, 4);
    }
}
