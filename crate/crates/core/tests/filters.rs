mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use turboeq::analysis::{ideal_bidfe_snr, noise_variance_for_snr_db};
use turboeq::bidfe::{analytic_rho, bidfe_run_block, estimate_rho, Combiner, RhoMode};
use turboeq::dfe::{
    compute_tiv_filters, compute_tv_filters, dfe_run_block, enumerated_llr, AprioriFrame,
    DfeStepOutput, FilterMode, LlrMode,
};
use turboeq::signal::{
    apply_channel, bpsk_modulate, build_convolution_matrices, build_le_matrices,
    time_reverse_channel, IsiChannel,
};

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        assert!((x - y).abs() < tol, "tap {i}: {x} vs {y}");
    }
}

#[test]
fn dfe_taps_match_naive_solve_on_h1() {
    let ch = IsiChannel::h1();
    let mats = build_convolution_matrices(&ch, 16, 4);
    let n0 = 10f64.powf(-0.6);
    let f = compute_tiv_filters(&mats, n0).unwrap();
    let h = common::conv_matrix(ch.taps(), 17, 4);
    let want = common::mmse_taps(&h, &vec![1.0; 21], 4, 4, n0);
    assert_close(&f.c, &want, 1e-9);
}

#[test]
fn dfe_taps_match_naive_solve_on_h2() {
    let ch = IsiChannel::h2();
    let mats = build_convolution_matrices(&ch, 20, 6);
    let f = compute_tiv_filters(&mats, 0.1).unwrap();
    let h = common::conv_matrix(ch.taps(), 21, 6);
    let want = common::mmse_taps(&h, &vec![1.0; 27], 6, 6, 0.1);
    assert_close(&f.c, &want, 1e-9);
    // d is the fed-back half of Hᵀc.
    for (j, dj) in f.d.iter().enumerate() {
        let col: f64 = (0..21).map(|i| h[i][j] * f.c[i]).sum();
        assert!((dj - col).abs() < 1e-9);
    }
}

#[test]
fn le_taps_match_naive_solve() {
    let ch = IsiChannel::h1();
    let mats = build_le_matrices(&ch, 21).unwrap();
    let f = compute_tiv_filters(&mats, 0.3).unwrap();
    let h = common::conv_matrix(ch.taps(), 21, 4);
    let want = common::mmse_taps(&h, &vec![1.0; 25], 14, 0, 0.3);
    assert_close(&f.c, &want, 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tv_taps_match_naive_solve(
        z in prop::collection::vec(0.0f64..=1.0, 21),
        n0 in 0.01f64..2.0,
    ) {
        let ch = IsiChannel::h1();
        let mats = build_convolution_matrices(&ch, 16, 4);
        let f = compute_tv_filters(&mats, &z, n0, 0).unwrap();
        let h = common::conv_matrix(ch.taps(), 17, 4);
        let want = common::mmse_taps(&h, &z, 4, 4, n0);
        for (a, b) in f.c.iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        let p0: f64 = (0..17).map(|i| h[i][4] * f.c[i]).sum();
        prop_assert!((p0 - f.p0).abs() < 1e-9);
    }
}

#[test]
fn enumerated_llr_matches_probability_domain_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10_000 {
        let ld = rng.random_range(1..=4);
        let d: Vec<f64> = (0..ld).map(|_| rng.random_range(-0.5..0.5)).collect();
        let llr: Vec<f64> = (0..ld).map(|_| rng.random_range(-6.0..6.0)).collect();
        let dec: Vec<f64> = llr
            .iter()
            .map(|&l| if l >= 0.0 { 1.0 } else { -1.0 })
            .collect();
        let out = DfeStepOutput {
            y: rng.random_range(-2.0..2.0),
            p0: rng.random_range(0.2..0.95),
            var_v: rng.random_range(0.05..1.0),
            mean_i: 0.0,
            var_i: 0.0,
            prob_i_zero: 1.0,
            log_prob_i_zero: 0.0,
            phi: 0.0,
        };
        let got = enumerated_llr(&out, &d, &llr, &dec).unwrap();
        let want = common::enumerated_oracle(out.y, out.p0, out.var_v, &d, &llr, &dec);
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
}

#[test]
fn residual_variance_matches_model_with_correct_feedback() {
    let ch = IsiChannel::h1();
    let mats = build_convolution_matrices(&ch, 16, 4);
    let n = 100_000;
    let n0 = noise_variance_for_snr_db(6.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let bits: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
    let frame = bpsk_modulate(&bits, 16, 16);
    let rx = apply_channel(&ch, &frame, n0, &mut rng).unwrap();
    let out = dfe_run_block(
        FilterMode::TimeInvariant,
        LlrMode::Conventional,
        &mats,
        &rx,
        &AprioriFrame::zeros(n),
        Some(frame.payload()),
    )
    .unwrap();
    let emp = out
        .trace
        .y
        .iter()
        .zip(frame.payload())
        .map(|(y, x)| (y - x).powi(2))
        .sum::<f64>()
        / n as f64;
    let model = out.trace.mean_var_v();
    assert!((emp / model - 1.0).abs() < 0.05, "{emp} vs {model}");
}

#[test]
fn measured_rho_with_ideal_feedback_matches_closed_form() {
    let ch = IsiChannel::h1();
    let rev = time_reverse_channel(&ch);
    let mf = build_convolution_matrices(&ch, 16, 4);
    let mb = build_convolution_matrices(&rev, 16, 4);
    let n = 100_000;
    let n0 = noise_variance_for_snr_db(6.0);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let bits: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
    let frame = bpsk_modulate(&bits, 16, 16);
    let rx = apply_channel(&ch, &frame, n0, &mut rng).unwrap();
    let out = bidfe_run_block(
        FilterMode::TimeInvariant,
        LlrMode::Conventional,
        Combiner::EqualVariance,
        &mf,
        &mb,
        &rx,
        &AprioriFrame::zeros(n),
        Some(frame.payload()),
    )
    .unwrap();
    let ff = compute_tiv_filters(&mf, n0).unwrap();
    let fb = compute_tiv_filters(&mb, n0).unwrap();
    let closed = analytic_rho(RhoMode::NoApriori, &mf, &ff, &mb, &fb);
    assert!(out.estimate.valid);
    assert!(
        (out.estimate.rho_hat - closed).abs() < 0.02,
        "{} vs {closed}",
        out.estimate.rho_hat
    );
    let again = estimate_rho(&out.forward_trace, &out.backward_trace);
    assert_eq!(again, out.estimate);

    // Averaging the two unbiased outputs shrinks the error by (1 + ρ)/2.
    let var = |ys: &[f64]| {
        ys.iter()
            .zip(frame.payload())
            .map(|(y, x)| (y - x).powi(2))
            .sum::<f64>()
            / n as f64
    };
    let vf = var(&out.forward_trace.y);
    let vb = var(&out.backward_trace.y);
    let avg: Vec<f64> = out
        .forward_trace
        .y
        .iter()
        .zip(&out.backward_trace.y)
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let va = var(&avg);
    assert!(va <= vf && va <= vb);
    let rho = out.estimate.rho_hat;
    let predicted = 0.5 * (1.0 + rho) * 0.5 * (vf + vb);
    assert!((va / predicted - 1.0).abs() < 0.05, "{va} vs {predicted}");

    let (rho_inf, _) = ideal_bidfe_snr(&ch, 1.0, n0).unwrap();
    assert!((closed - rho_inf).abs() < 0.01);
}
