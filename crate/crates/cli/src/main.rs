use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use turboeq::analysis::snr_table;
use turboeq::harness::report::{write_ber_csv, write_exit_csv, write_rho_csv, write_snr_csv};
use turboeq::harness::{
    rho_reference, run_ber_sweep, run_exit_chart, run_rho_trajectory, run_selftest, with_threads,
    ExperimentConfig, TurboRunner,
};

#[derive(Parser, Debug)]
#[command(
    name = "turboeq",
    version,
    about = "Turbo equalization experiments over ISI channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// BER per SNR point and iteration.
    Ber(Common),
    /// EXIT curves of the equalizer and the decoder.
    Exit {
        #[command(flatten)]
        common: Common,
        /// Also record the mean turbo trajectory.
        #[arg(long)]
        trajectory: bool,
    },
    /// Infinite-length DFE/BiDFE SNR figures and the matched filter bound.
    Snr(Common),
    /// Measured BiDFE correlation per iteration with the analytic references.
    Rho(Common),
    /// Built-in oracle checks.
    Selftest(Common),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Flat `key = value` file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `h1`, `h2` or comma-separated taps.
    #[arg(long)]
    channel: Option<String>,
    #[arg(long)]
    variant: Option<String>,
    /// SNR list in dB (`1/N0`): values and `start:step:stop` ranges.
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
    #[arg(long)]
    iters: Option<usize>,
    /// Block cap per SNR point.
    #[arg(long)]
    blocks: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_interleaver: bool,
    /// Feed back the true symbols (test hook).
    #[arg(long)]
    ideal_feedback: bool,
    #[arg(long)]
    message_bits: Option<usize>,
    /// Final-iteration errors that end an SNR point early (0 = never).
    #[arg(long)]
    target_errors: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                ExperimentConfig::from_kv_str(&text)?
            }
            None => ExperimentConfig::default(),
        };
        let mut set = |k: &str, v: Option<String>| -> Result<()> {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
            Ok(())
        };
        set("channel", self.channel.clone())?;
        set("variant", self.variant.clone())?;
        set("snr", self.snr.clone())?;
        set("iterations", self.iters.map(|v| v.to_string()))?;
        set("blocks", self.blocks.map(|v| v.to_string()))?;
        set("seed", self.seed.map(|v| v.to_string()))?;
        set("message_bits", self.message_bits.map(|v| v.to_string()))?;
        set("target_errors", self.target_errors.map(|v| v.to_string()))?;
        set("threads", self.threads.map(|v| v.to_string()))?;
        if self.no_interleaver {
            cfg.interleaver = false;
        }
        if self.ideal_feedback {
            cfg.ideal_feedback = true;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        if cfg.min_blocks > cfg.blocks {
            cfg.min_blocks = cfg.blocks;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(out: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            );
            body(&mut w)?;
            w.flush()?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let t0 = Instant::now();
    match cli.command {
        Command::Ber(c) => {
            let cfg = c.resolve()?;
            let points = run_ber_sweep(&cfg)?;
            for p in &points {
                if let Some(f) = p.final_point() {
                    eprintln!(
                        "{} dB: {} blocks, {} errors, BER {:.3e}",
                        f.snr_db, f.blocks, f.bit_errors, f.ber
                    );
                }
            }
            emit(cfg.out.as_deref(), |w| write_ber_csv(w, &cfg, &points))?;
        }
        Command::Exit { common, trajectory } => {
            let cfg = common.resolve()?;
            let chart = with_threads(cfg.threads, || run_exit_chart(&cfg, trajectory))?;
            emit(cfg.out.as_deref(), |w| write_exit_csv(w, &cfg, &chart))?;
        }
        Command::Snr(c) => {
            let cfg = c.resolve()?;
            let rows = snr_table(&cfg.channel, &cfg.snr_db)?;
            emit(cfg.out.as_deref(), |w| {
                write_snr_csv(w, &cfg.channel_name, &rows)
            })?;
        }
        Command::Rho(c) => {
            let cfg = c.resolve()?;
            if !matches!(cfg.equalizer(), turboeq::harness::EqualizerKind::Bidfe(..)) {
                bail!("rho needs a BiDFE variant, got {}", cfg.variant);
            }
            let points = run_rho_trajectory(&cfg)?;
            let runner = TurboRunner::new(&cfg)?;
            let refs = cfg
                .snr_db
                .iter()
                .map(|&s| rho_reference(&runner, s))
                .collect::<turboeq::Result<Vec<_>>>()?;
            emit(cfg.out.as_deref(), |w| {
                write_rho_csv(w, &cfg, &points, &refs)
            })?;
        }
        Command::Selftest(c) => {
            let cfg = c.resolve()?;
            let cases = run_selftest(cfg.seed)?;
            let mut failed = 0;
            for case in &cases {
                let tag = if case.passed { "PASS" } else { "FAIL" };
                println!("{tag} {}: {}", case.name, case.detail);
                failed += usize::from(!case.passed);
            }
            if failed > 0 {
                bail!("{failed} of {} self-test cases failed", cases.len());
            }
        }
    }
    eprintln!("done in {:.1} s", t0.elapsed().as_secs_f64());
    Ok(())
}
