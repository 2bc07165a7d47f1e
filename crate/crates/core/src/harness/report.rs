//! CSV output. Each file opens with `#` lines naming the schema and its
//! version, the column list and the configuration that produced it.

use std::io::{self, Write};

use super::config::ExperimentConfig;
use super::exit::ExitChart;
use super::rho::RhoReference;
use super::sweep::PointTally;
use crate::analysis::{db, IdealSnrReport};

pub const BER_SCHEMA: &str = "turboeq-ber v1";
pub const EXIT_SCHEMA: &str = "turboeq-exit v1";
pub const SNR_SCHEMA: &str = "turboeq-snr v1";
pub const RHO_SCHEMA: &str = "turboeq-rho v1";

pub const BER_COLUMNS: &str = "snr_db,iteration,bit_errors,bits_counted,ber,blocks";
pub const EXIT_COLUMNS: &str = "role,snr_db,iteration,i_in,i_out";
pub const SNR_COLUMNS: &str = "snr_db,snr_udfe_db,snr_ubidfe_db,rho_inf,snr_mfb_db";
pub const RHO_COLUMNS: &str =
    "snr_db,iteration,rho_hat_mean,rho_hat_std,valid_blocks,fallback_blocks,agreement,rho_perfect_tv,rho_perfect_tiv,rho_no_apriori,rho_inf";

fn preamble<W: Write + ?Sized>(
    w: &mut W,
    schema: &str,
    columns: &str,
    extra: &[String],
) -> io::Result<()> {
    writeln!(w, "# {schema}")?;
    writeln!(w, "# columns: {columns}")?;
    for line in extra {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "{columns}")
}

fn config_lines(cfg: &ExperimentConfig) -> Vec<String> {
    cfg.to_kv_string()
        .lines()
        .filter(|l| !l.starts_with("snr ="))
        .map(|l| format!("config {l}"))
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn write_ber_csv<W: Write + ?Sized>(
    w: &mut W,
    cfg: &ExperimentConfig,
    points: &[PointTally],
) -> io::Result<()> {
    let mut extra = config_lines(cfg);
    extra.push("snr_db is 10 log10(1/N0) with unit-energy symbols".into());
    preamble(w, BER_SCHEMA, BER_COLUMNS, &extra)?;
    for p in points.iter().flat_map(|t| t.ber_points()) {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            p.snr_db, p.iteration, p.bit_errors, p.bits_counted, p.ber, p.blocks
        )?;
    }
    Ok(())
}

pub fn write_exit_csv<W: Write + ?Sized>(
    w: &mut W,
    cfg: &ExperimentConfig,
    chart: &ExitChart,
) -> io::Result<()> {
    let mut extra = config_lines(cfg);
    extra.extend([
        "equalizer rows: i_in = a priori MI of the equalizer, i_out = its extrinsic MI".to_string(),
        "decoder rows: i_in = a priori MI of the decoder (vertical axis of the chart), i_out = its extrinsic MI (horizontal axis); snr_db is empty".to_string(),
        "trajectory rows: per iteration, trajectory_equalizer (i_in = previous decoder MI) then trajectory_decoder".to_string(),
    ]);
    preamble(w, EXIT_SCHEMA, EXIT_COLUMNS, &extra)?;
    for c in &chart.equalizer {
        for p in &c.points {
            writeln!(
                w,
                "{},{},,{},{}",
                c.role.name(),
                opt(c.snr_db),
                p.i_in,
                p.i_out
            )?;
        }
    }
    for p in &chart.decoder.points {
        writeln!(w, "{},,,{},{}", chart.decoder.role.name(), p.i_in, p.i_out)?;
    }
    for (snr, steps) in &chart.trajectories {
        let mut prev = 0.0;
        for s in steps {
            writeln!(
                w,
                "trajectory_equalizer,{snr},{},{prev},{}",
                s.iteration, s.mi_equalizer
            )?;
            writeln!(
                w,
                "trajectory_decoder,{snr},{},{},{}",
                s.iteration, s.mi_equalizer, s.mi_decoder
            )?;
            prev = s.mi_decoder;
        }
    }
    Ok(())
}

pub fn write_snr_csv<W: Write + ?Sized>(
    w: &mut W,
    channel: &str,
    rows: &[IdealSnrReport],
) -> io::Result<()> {
    let extra = [
        format!("config channel = {channel}"),
        "infinite-length unbiased DFE and BiDFE SNRs, Px = 1".to_string(),
    ];
    preamble(w, SNR_SCHEMA, SNR_COLUMNS, &extra)?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.snr_db,
            db(r.snr_udfe),
            db(r.snr_ubidfe),
            r.rho_inf,
            db(r.snr_mfb)
        )?;
    }
    Ok(())
}

pub fn write_rho_csv<W: Write + ?Sized>(
    w: &mut W,
    cfg: &ExperimentConfig,
    points: &[PointTally],
    refs: &[RhoReference],
) -> io::Result<()> {
    let mut extra = config_lines(cfg);
    extra.push("rho_hat statistics over blocks with a valid estimate".into());
    preamble(w, RHO_SCHEMA, RHO_COLUMNS, &extra)?;
    for (p, r) in points.iter().zip(refs) {
        for (i, t) in p.iterations.iter().enumerate() {
            let seen = t.rho_valid + t.rho_fallbacks;
            let agreement = (seen > 0).then(|| t.agreement_sum / seen as f64);
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                p.snr_db,
                i + 1,
                opt(t.rho_mean()),
                opt(t.rho_std()),
                t.rho_valid,
                t.rho_fallbacks,
                opt(agreement),
                r.perfect_tv,
                r.perfect_tiv,
                r.no_apriori,
                r.rho_inf
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_ber_csv_has_header() {
        let mut buf = Vec::new();
        write_ber_csv(&mut buf, &ExperimentConfig::default(), &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# turboeq-ber v1");
        assert_eq!(text.lines().last().unwrap(), BER_COLUMNS);
        assert!(text.lines().filter(|l| !l.starts_with('#')).count() == 1);
    }

    #[test]
    fn snr_rows() {
        let rows =
            crate::analysis::snr_table(&crate::signal::IsiChannel::h1(), &[0.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        write_snr_csv(&mut buf, "h1", &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let data: Vec<_> = text
            .lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .collect();
        assert_eq!(data.len(), 2);
        assert!(data[0].starts_with("0,"));
        assert_eq!(data[1].split(',').count(), 5);
    }
}
