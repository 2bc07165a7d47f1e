//! EXIT charts with the consistent-Gaussian a priori model.

use std::f64::consts::LN_2;

use rand::Rng;
use rand_distr::StandardNormal;

use super::config::ExperimentConfig;
use super::parallel::map_ordered;
use super::seeds::{block_rng, snr_key, Stream};
use super::turbo::TurboRunner;
use crate::analysis::noise_variance_for_snr_db;
use crate::llr::{softplus, LlrFrame, LlrRole, L_MAX};
use crate::signal::{apply_channel, bit_to_symbol, bpsk_modulate};
use crate::trellis::{bcjr_decode, RscCode};
use crate::{Error, Result};

/// A priori MI grid `0, 0.1, …, 1`.
pub fn exit_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

const SIGMA_MAX: f64 = 80.0;
const QUAD_HALF_WIDTH: f64 = 12.0;
const QUAD_INTERVALS: usize = 2400;

/// MI between a `±1` symbol and its LLR `L ~ N(±σ²/2, σ²)`.
pub fn j_function(sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    // Simpson over t with L = σ²/2 + σt, x = +1.
    let h = 2.0 * QUAD_HALF_WIDTH / QUAD_INTERVALS as f64;
    let mu = 0.5 * sigma * sigma;
    let f = |t: f64| {
        let pdf = (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        pdf * softplus(-(mu + sigma * t))
    };
    let mut s = f(-QUAD_HALF_WIDTH) + f(QUAD_HALF_WIDTH);
    for k in 1..QUAD_INTERVALS {
        let t = -QUAD_HALF_WIDTH + k as f64 * h;
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(t);
    }
    (1.0 - s * h / 3.0 / LN_2).clamp(0.0, 1.0)
}

/// `σ` with `J(σ) = mi`, by bisection to `1e-6` in `σ`.
pub fn j_inverse(mi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&mi) {
        return Err(Error::Config(format!(
            "mutual information {mi} outside [0, 1]"
        )));
    }
    if mi == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, SIGMA_MAX);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if j_function(mid) < mi {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `L_a = (σ²/2)x + σn` with `J(σ) = i_a`; `i_a = 1` gives `±L_MAX`.
pub fn generate_apriori_for_exit<R: Rng + ?Sized>(
    i_a: f64,
    truth: &[f64],
    rng: &mut R,
) -> Result<LlrFrame> {
    if i_a == 1.0 {
        return Ok(LlrFrame::new(
            truth.iter().map(|x| L_MAX * x).collect(),
            LlrRole::APriori,
        ));
    }
    let sigma = j_inverse(i_a)?;
    if sigma == 0.0 {
        return Ok(LlrFrame::zeros(truth.len(), LlrRole::APriori));
    }
    let mu = 0.5 * sigma * sigma;
    let values = truth
        .iter()
        .map(|x| {
            let n: f64 = rng.sample(StandardNormal);
            mu * x + sigma * n
        })
        .collect();
    Ok(LlrFrame::new(values, LlrRole::APriori))
}

/// `1 - mean(log2(1 + exp(-x L)))`, not clamped.
pub fn measure_mi_raw(llr: &[f64], truth: &[f64]) -> f64 {
    let n = llr.len().min(truth.len());
    if n == 0 {
        return 0.0;
    }
    let loss: f64 = llr.iter().zip(truth).map(|(l, x)| softplus(-x * l)).sum();
    1.0 - loss / (n as f64 * LN_2)
}

pub fn measure_mi(llr: &[f64], truth: &[f64]) -> f64 {
    measure_mi_raw(llr, truth).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitRole {
    Equalizer,
    Decoder,
}

impl ExitRole {
    pub fn name(self) -> &'static str {
        match self {
            ExitRole::Equalizer => "equalizer",
            ExitRole::Decoder => "decoder",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitPoint {
    pub i_in: f64,
    pub i_out: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExitCurve {
    pub role: ExitRole,
    /// `None` for the decoder, whose curve does not depend on the channel.
    pub snr_db: Option<f64>,
    pub points: Vec<ExitPoint>,
}

impl ExitCurve {
    pub fn at(&self, i_in: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|p| (p.i_in - i_in).abs() < 1e-12)
            .map(|p| p.i_out)
    }
}

/// Averaged MI pair of one turbo iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryStep {
    pub iteration: usize,
    pub mi_equalizer: f64,
    pub mi_decoder: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExitChart {
    pub equalizer: Vec<ExitCurve>,
    pub decoder: ExitCurve,
    pub trajectories: Vec<(f64, Vec<TrajectoryStep>)>,
}

fn grid_block(point: usize, block: u64) -> u64 {
    ((point as u64) << 32) | block
}

/// Equalizer transfer curve on fresh frames of `cfg.exit_symbols` symbols.
pub fn equalizer_exit_curve(runner: &TurboRunner, snr_db: f64) -> Result<ExitCurve> {
    let cfg = runner.config();
    let grid = exit_grid();
    let blocks = cfg.exit_blocks.max(1);
    let n0 = noise_variance_for_snr_db(snr_db);
    let key = snr_key(snr_db);
    let total = grid.len() as u64 * blocks;
    let mis = map_ordered(0..total, |job| {
        let point = (job / blocks) as usize;
        let id = grid_block(point, job % blocks);
        let mut rng = block_rng(cfg.seed, key, id, Stream::Bits);
        let bits: Vec<u8> = (0..cfg.exit_symbols)
            .map(|_| rng.random_range(0..2))
            .collect();
        let frame = bpsk_modulate(&bits, runner.guard(), runner.guard());
        let mut noise = block_rng(cfg.seed, key, id, Stream::Noise);
        let rx = apply_channel(&cfg.channel, &frame, n0, &mut noise)?;
        let mut prior_rng = block_rng(cfg.seed, key, id, Stream::Apriori);
        let la = generate_apriori_for_exit(grid[point], frame.payload(), &mut prior_rng)?;
        let truth = cfg.ideal_feedback.then(|| frame.payload());
        let eq = runner.equalize(&rx, &la.values, truth)?;
        Ok(measure_mi(&eq.extrinsic.values, frame.payload()))
    })?;
    Ok(ExitCurve {
        role: ExitRole::Equalizer,
        snr_db: Some(snr_db),
        points: average_points(&grid, &mis, blocks),
    })
}

/// Key shared by all decoder runs so its curve cannot depend on the SNR.
const DECODER_KEY: i64 = i64::MIN;

/// Decoder transfer curve: `i_in` is the MI of the coded-bit a priori,
/// `i_out` that of the coded-bit extrinsic.
pub fn decoder_exit_curve(cfg: &ExperimentConfig) -> Result<ExitCurve> {
    let grid = exit_grid();
    let blocks = cfg.exit_blocks.max(1);
    let total = grid.len() as u64 * blocks;
    let mis = map_ordered(0..total, |job| {
        let point = (job / blocks) as usize;
        let id = grid_block(point, job % blocks);
        let mut rng = block_rng(cfg.seed, DECODER_KEY, id, Stream::Bits);
        let bits: Vec<u8> = (0..cfg.message_bits)
            .map(|_| rng.random_range(0..2))
            .collect();
        let coded: Vec<f64> = RscCode
            .encode(&bits)
            .into_iter()
            .map(bit_to_symbol)
            .collect();
        let mut prior_rng = block_rng(cfg.seed, DECODER_KEY, id, Stream::Apriori);
        let la = generate_apriori_for_exit(grid[point], &coded, &mut prior_rng)?;
        let dec = bcjr_decode(&RscCode, &la)?;
        Ok(measure_mi(&dec.extrinsic.values, &coded))
    })?;
    Ok(ExitCurve {
        role: ExitRole::Decoder,
        snr_db: None,
        points: average_points(&grid, &mis, blocks),
    })
}

fn average_points(grid: &[f64], mis: &[f64], blocks: u64) -> Vec<ExitPoint> {
    grid.iter()
        .zip(mis.chunks(blocks as usize))
        .map(|(&i_in, c)| ExitPoint {
            i_in,
            i_out: c.iter().sum::<f64>() / c.len() as f64,
        })
        .collect()
}

/// Mean per-iteration MI of `cfg.exit_blocks` turbo blocks.
pub fn exit_trajectory(runner: &TurboRunner, snr_db: f64) -> Result<Vec<TrajectoryStep>> {
    let blocks = runner.config().exit_blocks.max(1);
    let results = map_ordered(0..blocks, |b| runner.run_block(snr_db, b))?;
    let iters = runner.config().iterations;
    Ok((0..iters)
        .map(|i| {
            let n = results.len() as f64;
            TrajectoryStep {
                iteration: i + 1,
                mi_equalizer: results
                    .iter()
                    .map(|r| r.iterations[i].mi_equalizer)
                    .sum::<f64>()
                    / n,
                mi_decoder: results
                    .iter()
                    .map(|r| r.iterations[i].mi_decoder)
                    .sum::<f64>()
                    / n,
            }
        })
        .collect())
}

pub fn run_exit_chart(cfg: &ExperimentConfig, with_trajectory: bool) -> Result<ExitChart> {
    let runner = TurboRunner::new(cfg)?;
    let mut equalizer = Vec::with_capacity(cfg.snr_db.len());
    let mut trajectories = Vec::new();
    for &snr in &cfg.snr_db {
        equalizer.push(equalizer_exit_curve(&runner, snr)?);
        if with_trajectory {
            trajectories.push((snr, exit_trajectory(&runner, snr)?));
        }
    }
    Ok(ExitChart {
        equalizer,
        decoder: decoder_exit_curve(cfg)?,
        trajectories,
    })
}
