//! Browser bindings for the demo page in `www/`. Every export returns a flat
//! `Float64Array` whose row width is given in its doc comment.

use wasm_bindgen::prelude::*;

use turboeq::analysis::{db, snr_table};
use turboeq::dfe::{conventional_llr, phi, proposed_llr, DfeStepOutput};
use turboeq::harness::{ExperimentConfig, TurboRunner};
use turboeq::signal::IsiChannel;

fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(step > 0.0) || hi < lo || (hi - lo) / step > 10_000.0 {
        return Err(format!("bad grid {lo}:{step}:{hi}"));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| lo + k as f64 * step).collect())
}

/// Rows of `[snr_db, udfe_db, ubidfe_db, rho_inf, mfb_db]`.
pub fn snr_rows(channel: &str, lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, String> {
    let ch = IsiChannel::parse(channel).map_err(|e| e.to_string())?;
    let table = snr_table(&ch, &grid(lo, hi, step)?).map_err(|e| e.to_string())?;
    Ok(table
        .iter()
        .flat_map(|r| {
            [
                r.snr_db,
                db(r.snr_udfe),
                db(r.snr_ubidfe),
                r.rho_inf,
                db(r.snr_mfb),
            ]
        })
        .collect())
}

/// Rows of `[y, conventional, proposed]` for a single feedback tap `d` whose
/// decision is wrong with probability `1 - prob_ok`.
pub fn llr_rows(
    p0: f64,
    var_v: f64,
    d: f64,
    prob_ok: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    if !(0.0..=1.0).contains(&prob_ok) || !(var_v > 0.0) || points < 2 {
        return Err("need 0 <= prob_ok <= 1, var_v > 0, points >= 2".into());
    }
    // A +1 decision that is wrong leaves i = d(x - x̂) = -2d.
    let p_err = 1.0 - prob_ok;
    let mean_i = -2.0 * d * p_err;
    let mut rows = Vec::with_capacity(3 * points);
    for k in 0..points {
        let y = -3.0 + 6.0 * k as f64 / (points - 1) as f64;
        let mut out = DfeStepOutput {
            y,
            p0,
            var_v,
            mean_i,
            var_i: 4.0 * d * d * prob_ok * p_err,
            prob_i_zero: prob_ok,
            log_prob_i_zero: prob_ok.ln(),
            phi: 0.0,
        };
        out.phi = phi(&out);
        rows.extend([y, conventional_llr(&out), proposed_llr(&out)]);
    }
    Ok(rows)
}

/// Rows of `[iteration, ber, rho_hat]`; `rho_hat` is NaN for variants
/// without a backward pass.
pub fn turbo_rows(
    channel: &str,
    variant: &str,
    snr_db: f64,
    iterations: usize,
    message_bits: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let mut cfg = ExperimentConfig::default();
    let mut set = |k: &str, v: String| cfg.set(k, &v).map_err(|e| e.to_string());
    set("channel", channel.to_string())?;
    set("variant", variant.to_string())?;
    set("iterations", iterations.to_string())?;
    set("message_bits", message_bits.to_string())?;
    set("seed", seed.to_string())?;
    let runner = TurboRunner::new(&cfg).map_err(|e| e.to_string())?;
    let block = runner.run_block(snr_db, 0).map_err(|e| e.to_string())?;
    Ok(block
        .iterations
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            [
                (i + 1) as f64,
                s.bit_errors as f64 / block.message_bits as f64,
                s.rho.map_or(f64::NAN, |r| r.rho_hat),
            ]
        })
        .collect())
}

#[wasm_bindgen]
pub fn snr_curves(channel: &str, lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, JsError> {
    snr_rows(channel, lo, hi, step).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn llr_curves(
    p0: f64,
    var_v: f64,
    d: f64,
    prob_ok: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    llr_rows(p0, var_v, d, prob_ok, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn turbo_block(
    channel: &str,
    variant: &str,
    snr_db: f64,
    iterations: usize,
    message_bits: usize,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    turbo_rows(channel, variant, snr_db, iterations, message_bits, seed)
        .map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_rows_are_ordered() {
        let rows = snr_rows("h1", 0.0, 14.0, 2.0).unwrap();
        assert_eq!(rows.len(), 8 * 5);
        for r in rows.chunks(5) {
            assert!(r[1] <= r[2] && r[2] <= r[4]);
        }
        assert!(snr_rows("h1", 3.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn llr_rows_coincide_without_errors() {
        let rows = llr_rows(0.8, 0.2, 0.3, 1.0, 11).unwrap();
        for r in rows.chunks(3) {
            assert_eq!(r[1], r[2]);
        }
        let rows = llr_rows(0.8, 0.2, 0.3, 0.5, 11).unwrap();
        let last = rows.chunks(3).last().unwrap();
        assert!(last[2].abs() < last[1].abs());
    }

    #[test]
    fn turbo_rows_report_each_iteration() {
        let rows = turbo_rows("h1", "tv_bidfe_proposed", 8.0, 3, 128, 1).unwrap();
        assert_eq!(rows.len(), 9);
        assert!(rows.chunks(3).all(|r| r[2].is_finite()));
        let rows = turbo_rows("h1", "map", 8.0, 2, 128, 1).unwrap();
        assert!(rows[2].is_nan());
        assert!(turbo_rows("h1", "nope", 8.0, 2, 128, 1).is_err());
    }
}
