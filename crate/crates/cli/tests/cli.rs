use std::process::{Command, Output};

fn turboeq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_turboeq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect()
}

#[test]
fn selftest_passes() {
    let o = turboeq(&["selftest"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.lines().count() >= 6);
    assert!(out.lines().all(|l| l.starts_with("PASS ")), "{out}");
}

#[test]
fn snr_csv_has_versioned_header() {
    let o = turboeq(&["snr", "--channel", "h1", "--snr", "0:2:14"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("# turboeq-snr v1"));
    assert!(out
        .lines()
        .any(|l| l == "snr_db,snr_udfe_db,snr_ubidfe_db,rho_inf,snr_mfb_db"));
    assert_eq!(data_rows(&out).len(), 8);
    for row in data_rows(&out) {
        let v: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[1] <= v[2] && v[2] <= v[4], "{row}");
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("ber.csv");
    std::fs::write(
        &cfg,
        "# small run\nchannel = h1\nvariant = tiv_dfe\nsnr = 8\niters = 5\nblocks = 3\nmessage_bits = 64\n",
    )
    .unwrap();
    let o = turboeq(&[
        "ber",
        "--config",
        cfg.to_str().unwrap(),
        "--iters",
        "2",
        "--variant",
        "map",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("# turboeq-ber v1\n"));
    assert!(csv.contains("# config variant = map"), "{csv}");
    assert!(csv.contains("# config iterations = 2"), "{csv}");
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("8,2,"));
}

#[test]
fn bad_config_line_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "iters = 2\nnot a pair\n").unwrap();
    let o = turboeq(&["ber", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn empty_snr_grid_writes_only_the_header() {
    let o = turboeq(&["ber", "--snr", "", "--blocks", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("snr_db,iteration,bit_errors,bits_counted,ber,blocks"));
    assert!(data_rows(&out).is_empty());
}

#[test]
fn rho_rejects_non_bidfe_variant() {
    let o = turboeq(&["rho", "--variant", "tv_le", "--blocks", "1"]);
    assert!(!o.status.success());
}

#[test]
fn exit_chart_has_both_roles() {
    let o = turboeq(&[
        "exit",
        "--variant",
        "tiv_dfe_proposed",
        "--snr",
        "6",
        "--message-bits",
        "256",
        "--config",
        "/dev/null",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.starts_with("# turboeq-exit v1\n"));
    let rows = data_rows(&out);
    assert!(rows.iter().any(|r| r.starts_with("equalizer,6,")));
    assert!(rows.iter().any(|r| r.starts_with("decoder,")));
}
