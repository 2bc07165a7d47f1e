//! Quick oracle checks runnable from the command line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::exit::{generate_apriori_for_exit, measure_mi};
use crate::analysis::{noise_variance_for_snr_db, snr_table};
use crate::bidfe::{combine_equal_variance, combine_whitened, NoiseCorrelationModel};
use crate::dfe::compute_tv_filters;
use crate::llr::{clamp, log_sum_exp, LlrFrame, LlrRole};
use crate::signal::{
    bpsk_modulate, build_convolution_matrices, convolve, IsiChannel, ReceivedFrame,
};
use crate::trellis::{bcjr_decode, bcjr_equalize, RscCode};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestCase {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn case(name: &'static str, err: f64, tol: f64) -> SelftestCase {
    SelftestCase {
        name,
        passed: err <= tol,
        detail: format!("max error {err:.3e} (tolerance {tol:.0e})"),
    }
}

fn bits_of(mask: usize, n: usize) -> Vec<u8> {
    (0..n).map(|k| (mask >> k & 1) as u8).collect()
}

fn sym(b: u8) -> f64 {
    if b == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Extrinsic LLRs of every coded bit by summing over all messages.
fn decoder_oracle(k: usize, llr: &[f64]) -> Vec<f64> {
    let words: Vec<Vec<u8>> = (0..1 << k)
        .map(|m| RscCode.encode(&bits_of(m, k)))
        .collect();
    (0..llr.len())
        .map(|t| {
            let metric = |w: &Vec<u8>| {
                w.iter()
                    .enumerate()
                    .filter(|&(s, _)| s != t)
                    .map(|(s, &b)| 0.5 * sym(b) * llr[s])
                    .sum::<f64>()
            };
            let num = log_sum_exp(words.iter().filter(|w| w[t] == 0).map(metric));
            let den = log_sum_exp(words.iter().filter(|w| w[t] == 1).map(metric));
            clamp(num - den)
        })
        .collect()
}

fn check_decoder(rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let k = rng.random_range(1..=4);
        let llr: Vec<f64> = (0..RscCode::coded_len(k))
            .map(|_| rng.random_range(-4.0..4.0))
            .collect();
        let out = bcjr_decode(&RscCode, &LlrFrame::new(llr.clone(), LlrRole::APriori))?;
        for (a, b) in out.extrinsic.values.iter().zip(decoder_oracle(k, &llr)) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

fn check_equalizer(rng: &mut ChaCha8Rng) -> Result<f64> {
    let ch = IsiChannel::new(vec![0.8, -0.5, 0.3])?;
    let n = 6;
    let n0 = 0.4;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let bits: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let frame = bpsk_modulate(&bits, 2, 2);
        let mut samples = convolve(&ch, &frame);
        for s in &mut samples {
            *s += rng.random_range(-1.0..1.0);
        }
        let rx = ReceivedFrame {
            samples: samples.clone(),
            noise_variance: n0,
            layout: frame.layout,
        };
        let la: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let got = bcjr_equalize(&ch, &rx, &LlrFrame::new(la.clone(), LlrRole::APriori))?;
        let metric = |m: usize| {
            let cand = bits_of(m, n);
            let f = bpsk_modulate(&cand, 2, 2);
            let dist: f64 = convolve(&ch, &f)
                .iter()
                .zip(&samples)
                .map(|(a, b)| (a - b).powi(2))
                .sum();
            let prior: f64 = cand.iter().zip(&la).map(|(&b, l)| 0.5 * sym(b) * l).sum();
            (cand, -dist / (2.0 * n0) + prior)
        };
        let all: Vec<_> = (0..1 << n).map(metric).collect();
        for t in 0..n {
            let num = log_sum_exp(all.iter().filter(|(c, _)| c[t] == 0).map(|(_, m)| *m));
            let den = log_sum_exp(all.iter().filter(|(c, _)| c[t] == 1).map(|(_, m)| *m));
            worst = worst.max((num - den - la[t] - got.values[t]).abs());
        }
    }
    Ok(worst)
}

fn check_matched_filter() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (ch, lc, ld) in [(IsiChannel::h1(), 16, 4), (IsiChannel::h2(), 20, 6)] {
        let mats = build_convolution_matrices(&ch, lc, ld);
        let n0 = noise_variance_for_snr_db(6.0);
        let f = compute_tv_filters(&mats, &vec![0.0; mats.cols()], n0, 0)?;
        let g = 1.0 / (n0 + ch.energy());
        for (i, c) in f.c.iter().enumerate() {
            let want = ch.taps().get(i).map_or(0.0, |h| h * g);
            worst = worst.max((c - want).abs());
        }
    }
    Ok(worst)
}

fn check_combiners(rng: &mut ChaCha8Rng) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let n = rng.random_range(0.05..5.0);
        let rho = rng.random_range(-0.95..0.95);
        let (a, b) = (rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
        let m = NoiseCorrelationModel::new(n, n, rho);
        worst = worst.max((combine_whitened(a, b, &m) - combine_equal_variance(a, b, rho)).abs());
        worst = worst.max((combine_equal_variance(a, b, 0.0) - (a + b)).abs());
    }
    worst
}

fn check_snr_ordering() -> Result<f64> {
    let grid: Vec<f64> = (0..=14).map(f64::from).collect();
    let mut worst: f64 = 0.0;
    for r in snr_table(&IsiChannel::h1(), &grid)? {
        worst = worst
            .max(r.snr_udfe - r.snr_ubidfe)
            .max(r.snr_ubidfe - r.snr_mfb);
    }
    Ok(worst.max(0.0))
}

fn check_exit_apriori(rng: &mut ChaCha8Rng) -> Result<f64> {
    let truth: Vec<f64> = (0..100_000)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let mut worst: f64 = 0.0;
    for target in [0.2, 0.5, 0.8] {
        let la = generate_apriori_for_exit(target, &truth, rng)?;
        worst = worst.max((measure_mi(&la.values, &truth) - target).abs());
    }
    Ok(worst)
}

pub fn run_selftest(seed: u64) -> Result<Vec<SelftestCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(vec![
        case(
            "bcjr decoder vs exhaustive APP",
            check_decoder(&mut rng)?,
            1e-8,
        ),
        case(
            "bcjr equalizer vs exhaustive APP",
            check_equalizer(&mut rng)?,
            1e-8,
        ),
        case(
            "tv taps with perfect priors are the matched filter",
            check_matched_filter()?,
            1e-9,
        ),
        case(
            "whitened = equal-variance at equal noise; rho=0 adds",
            check_combiners(&mut rng),
            1e-9,
        ),
        case(
            "ideal SNR ordering udfe <= ubidfe <= mfb on h1",
            check_snr_ordering()?,
            0.0,
        ),
        case(
            "exit a priori hits its target MI",
            check_exit_apriori(&mut rng)?,
            0.01,
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_cases_pass() {
        for c in run_selftest(1).unwrap() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
