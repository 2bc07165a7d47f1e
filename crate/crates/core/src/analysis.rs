//! Infinite-length unbiased DFE / BiDFE figures, the matched filter bound and
//! the combiner sensitivities.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dfe::{dfe_run_block, AprioriFrame, FilterMode, LlrMode};
use crate::numerics::{frequency_response, spectral_factorize, DEFAULT_GRID};
use crate::signal::{apply_channel, bpsk_modulate, build_convolution_matrices, IsiChannel};
use crate::{Error, Result};

pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn from_db(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

/// Noise variance for an SNR axis defined as `1/N0` in dB.
pub fn noise_variance_for_snr_db(snr_db: f64) -> f64 {
    from_db(-snr_db)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealSnrReport {
    pub snr_db: f64,
    pub n0: f64,
    pub p0: f64,
    pub snr_udfe: f64,
    pub snr_urdfe: f64,
    pub snr_ubidfe: f64,
    pub rho_inf: f64,
    pub snr_mfb: f64,
}

impl IdealSnrReport {
    pub fn mse_udfe(&self) -> f64 {
        1.0 / self.snr_udfe
    }

    pub fn mse_ubidfe(&self) -> f64 {
        1.0 / self.snr_ubidfe
    }
}

/// `(P0 - N0)/N0`.
pub fn ideal_dfe_snr(ch: &IsiChannel, px: f64, n0: f64) -> Result<f64> {
    let sf = spectral_factorize(ch, px, n0, grid_for(ch))?;
    Ok((sf.p0 - n0) / n0)
}

/// Correlation of the forward and time-reversed unbiased DFE residuals and the
/// SNR of their average, `2(P0 - N0)/((1 + ρ) N0)`.
pub fn ideal_bidfe_snr(ch: &IsiChannel, px: f64, n0: f64) -> Result<(f64, f64)> {
    let grid = grid_for(ch);
    let sf = spectral_factorize(ch, px, n0, grid)?;
    let rho = rho_inf(ch, px, n0, sf.p0, &sf.g, grid);
    Ok((rho, 2.0 * (sf.p0 - n0) / ((1.0 + rho) * n0)))
}

/// `P0²/(Px(P0 - N0)) · [c(D)² R_hh(D)]_0` with `c = Px/(P0 g*(D^{-*}))`,
/// the zero lag taken as the grid mean.
fn rho_inf(ch: &IsiChannel, px: f64, n0: f64, p0: f64, g: &[f64], grid: usize) -> f64 {
    let hf = frequency_response(ch.taps(), grid);
    let gf = frequency_response(g, grid);
    let mean: f64 = hf
        .iter()
        .zip(&gf)
        .map(|(h, g)| {
            let c = px / (p0 * g.conj());
            (c * c * h.norm_sqr()).re
        })
        .sum::<f64>()
        / grid as f64;
    p0 * p0 / (px * (p0 - n0)) * mean
}

pub fn mfb_snr(ch: &IsiChannel, px: f64, n0: f64) -> f64 {
    px * ch.energy() / n0
}

pub fn ideal_snr_report(ch: &IsiChannel, snr_db: f64) -> Result<IdealSnrReport> {
    let n0 = noise_variance_for_snr_db(snr_db);
    let grid = grid_for(ch);
    let sf = spectral_factorize(ch, 1.0, n0, grid)?;
    let snr_udfe = (sf.p0 - n0) / n0;
    let rho = rho_inf(ch, 1.0, n0, sf.p0, &sf.g, grid);
    Ok(IdealSnrReport {
        snr_db,
        n0,
        p0: sf.p0,
        snr_udfe,
        snr_urdfe: snr_udfe,
        snr_ubidfe: 2.0 * snr_udfe / (1.0 + rho),
        rho_inf: rho,
        snr_mfb: mfb_snr(ch, 1.0, n0),
    })
}

pub fn snr_table(ch: &IsiChannel, snr_db: &[f64]) -> Result<Vec<IdealSnrReport>> {
    snr_db.iter().map(|&s| ideal_snr_report(ch, s)).collect()
}

fn grid_for(ch: &IsiChannel) -> usize {
    DEFAULT_GRID.max((8 * ch.len()).next_power_of_two())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CombinerVariant {
    Whitened,
    EqualVariance,
}

/// `|∂L_e/∂ρ|` of the chosen combiner.
pub fn combiner_sensitivity(
    variant: CombinerVariant,
    rho: f64,
    nf: f64,
    nb: f64,
    lef: f64,
    leb: f64,
) -> f64 {
    match variant {
        CombinerVariant::EqualVariance => ((lef + leb) / ((1.0 + rho) * (1.0 + rho))).abs(),
        CombinerVariant::Whitened => {
            let root = (nf * nb).sqrt();
            let k = (1.0 - rho * rho).powi(2);
            let a = (2.0 * rho * nb - (1.0 + rho * rho) * root) / (k * nb);
            let b = (2.0 * rho * nf - (1.0 + rho * rho) * root) / (k * nf);
            (a * lef + b * leb).abs()
        }
    }
}

/// Output SNR `1/mean((Y - x)²)` of a finite DFE with ideal feedback and no
/// priors, measured over `symbols` random symbols.
pub fn empirical_dfe_snr(
    ch: &IsiChannel,
    lc: usize,
    ld: usize,
    n0: f64,
    symbols: usize,
    seed: u64,
) -> Result<f64> {
    if symbols == 0 {
        return Err(Error::Config(
            "empirical SNR needs at least one symbol".into(),
        ));
    }
    let mats = build_convolution_matrices(ch, lc, ld);
    let guard = lc.max(ld);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits: Vec<u8> = (0..symbols)
        .map(|_| rand::Rng::random_range(&mut rng, 0..2))
        .collect();
    let frame = bpsk_modulate(&bits, guard, guard);
    let rx = apply_channel(ch, &frame, n0, &mut rng)?;
    let out = dfe_run_block(
        FilterMode::TimeInvariant,
        LlrMode::Conventional,
        &mats,
        &rx,
        &AprioriFrame::zeros(symbols),
        Some(frame.payload()),
    )?;
    let mse = out
        .trace
        .y
        .iter()
        .zip(frame.payload())
        .map(|(y, x)| (y - x) * (y - x))
        .sum::<f64>()
        / symbols as f64;
    Ok(1.0 / mse)
}
