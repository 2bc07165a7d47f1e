//! Experiment configuration and its flat `key = value` file format.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::bidfe::Combiner;
use crate::dfe::{FilterMode, LlrMode};
use crate::signal::IsiChannel;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    TvLe,
    TivLe,
    TvDfe,
    TivDfe,
    TvDfeProposed,
    TivDfeProposed,
    TvBidfeMean,
    TivBidfeMean,
    TvBidfeProposed,
    TivBidfeProposed,
    Map,
}

/// What a variant runs as the soft-in soft-out equalizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqualizerKind {
    Le(FilterMode),
    Dfe(FilterMode, LlrMode),
    Bidfe(FilterMode, LlrMode, Combiner),
    Map,
}

impl Variant {
    pub const ALL: [Variant; 11] = [
        Variant::TvLe,
        Variant::TivLe,
        Variant::TvDfe,
        Variant::TivDfe,
        Variant::TvDfeProposed,
        Variant::TivDfeProposed,
        Variant::TvBidfeMean,
        Variant::TivBidfeMean,
        Variant::TvBidfeProposed,
        Variant::TivBidfeProposed,
        Variant::Map,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::TvLe => "tv_le",
            Variant::TivLe => "tiv_le",
            Variant::TvDfe => "tv_dfe",
            Variant::TivDfe => "tiv_dfe",
            Variant::TvDfeProposed => "tv_dfe_proposed",
            Variant::TivDfeProposed => "tiv_dfe_proposed",
            Variant::TvBidfeMean => "tv_bidfe_mean",
            Variant::TivBidfeMean => "tiv_bidfe_mean",
            Variant::TvBidfeProposed => "tv_bidfe_proposed",
            Variant::TivBidfeProposed => "tiv_bidfe_proposed",
            Variant::Map => "map",
        }
    }

    pub fn kind(self) -> EqualizerKind {
        use FilterMode::{TimeInvariant as Tiv, TimeVarying as Tv};
        use LlrMode::{Conventional, Proposed};
        match self {
            Variant::TvLe => EqualizerKind::Le(Tv),
            Variant::TivLe => EqualizerKind::Le(Tiv),
            Variant::TvDfe => EqualizerKind::Dfe(Tv, Conventional),
            Variant::TivDfe => EqualizerKind::Dfe(Tiv, Conventional),
            Variant::TvDfeProposed => EqualizerKind::Dfe(Tv, Proposed),
            Variant::TivDfeProposed => EqualizerKind::Dfe(Tiv, Proposed),
            Variant::TvBidfeMean => EqualizerKind::Bidfe(Tv, Conventional, Combiner::Mean),
            Variant::TivBidfeMean => EqualizerKind::Bidfe(Tiv, Conventional, Combiner::Mean),
            Variant::TvBidfeProposed => EqualizerKind::Bidfe(Tv, Proposed, Combiner::EqualVariance),
            Variant::TivBidfeProposed => {
                EqualizerKind::Bidfe(Tiv, Proposed, Combiner::EqualVariance)
            }
            Variant::Map => EqualizerKind::Map,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown variant '{s}'")))
    }
}

fn parse_combiner(s: &str) -> Result<Combiner> {
    match s.trim() {
        "mean" => Ok(Combiner::Mean),
        "equal_variance" => Ok(Combiner::EqualVariance),
        "whitened" => Ok(Combiner::Whitened),
        other => Err(Error::Config(format!("unknown combiner '{other}'"))),
    }
}

pub fn combiner_name(c: Combiner) -> &'static str {
    match c {
        Combiner::Mean => "mean",
        Combiner::EqualVariance => "equal_variance",
        Combiner::Whitened => "whitened",
    }
}

/// DFE feedforward/feedback and LE tap counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterLengths {
    pub dfe_feedforward: usize,
    pub dfe_feedback: usize,
    pub le_taps: usize,
}

impl FilterLengths {
    /// Preset lengths for `h1` and `h2`; other channels scale with memory.
    pub fn default_for(ch: &IsiChannel) -> Self {
        if *ch == IsiChannel::h1() {
            return Self {
                dfe_feedforward: 17,
                dfe_feedback: 4,
                le_taps: 21,
            };
        }
        if *ch == IsiChannel::h2() {
            return Self {
                dfe_feedforward: 21,
                dfe_feedback: 6,
                le_taps: 27,
            };
        }
        let m = ch.memory();
        Self {
            dfe_feedforward: 4 * m + 1,
            dfe_feedback: m,
            le_taps: 5 * m + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub channel_name: String,
    pub channel: IsiChannel,
    pub variant: Variant,
    pub snr_db: Vec<f64>,
    pub iterations: usize,
    pub message_bits: usize,
    /// Block cap per SNR point.
    pub blocks: u64,
    pub min_blocks: u64,
    /// Early stop once the final iteration has this many bit errors.
    pub target_errors: u64,
    pub seed: u64,
    pub interleaver: bool,
    pub ideal_feedback: bool,
    pub dfe_feedforward: Option<usize>,
    pub dfe_feedback: Option<usize>,
    pub le_taps: Option<usize>,
    /// Overrides the variant's BiDFE combiner.
    pub combiner: Option<Combiner>,
    /// Fresh frames per point of an EXIT curve.
    pub exit_blocks: u64,
    /// Symbols per EXIT frame.
    pub exit_symbols: usize,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            channel_name: "h1".into(),
            channel: IsiChannel::h1(),
            variant: Variant::TvDfeProposed,
            snr_db: vec![6.0],
            iterations: 20,
            message_bits: 2048,
            blocks: 1000,
            min_blocks: 1,
            target_errors: 100,
            seed: 1,
            interleaver: true,
            ideal_feedback: false,
            dfe_feedforward: None,
            dfe_feedback: None,
            le_taps: None,
            combiner: None,
            exit_blocks: 10,
            exit_symbols: 4096,
            threads: None,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn lengths(&self) -> FilterLengths {
        let d = FilterLengths::default_for(&self.channel);
        FilterLengths {
            dfe_feedforward: self.dfe_feedforward.unwrap_or(d.dfe_feedforward),
            dfe_feedback: self.dfe_feedback.unwrap_or(d.dfe_feedback),
            le_taps: self.le_taps.unwrap_or(d.le_taps),
        }
    }

    pub fn equalizer(&self) -> EqualizerKind {
        match (self.variant.kind(), self.combiner) {
            (EqualizerKind::Bidfe(f, l, _), Some(c)) => EqualizerKind::Bidfe(f, l, c),
            (k, _) => k,
        }
    }

    pub fn set_channel(&mut self, spec: &str) -> Result<()> {
        self.channel = IsiChannel::parse(spec)?;
        self.channel_name = spec.trim().to_string();
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.lengths();
        if l.dfe_feedforward == 0 {
            return Err(Error::Config("dfe_feedforward must be at least 1".into()));
        }
        if l.dfe_feedback + 1 < self.channel.len() {
            return Err(Error::Config(format!(
                "dfe_feedback must be at least the channel memory {}",
                self.channel.memory()
            )));
        }
        if l.le_taps % 2 == 0 {
            return Err(Error::Config("le_taps must be odd".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if self.min_blocks > self.blocks {
            return Err(Error::Config("min_blocks exceeds blocks".into()));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr values must be finite".into()));
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = |what: &str| Error::Config(format!("{key}: invalid {what} '{value}'"));
        match key.trim() {
            "channel" => self.set_channel(value)?,
            "variant" => self.variant = value.parse()?,
            "snr" | "snr_db" => self.snr_db = parse_snr_list(value)?,
            "iterations" | "iters" => self.iterations = value.parse().map_err(|_| bad("count"))?,
            "message_bits" => self.message_bits = value.parse().map_err(|_| bad("count"))?,
            "blocks" => self.blocks = value.parse().map_err(|_| bad("count"))?,
            "min_blocks" => self.min_blocks = value.parse().map_err(|_| bad("count"))?,
            "target_errors" => self.target_errors = value.parse().map_err(|_| bad("count"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "interleaver" => self.interleaver = parse_bool(value).ok_or_else(|| bad("flag"))?,
            "ideal_feedback" => {
                self.ideal_feedback = parse_bool(value).ok_or_else(|| bad("flag"))?
            }
            "dfe_feedforward" => {
                self.dfe_feedforward = Some(value.parse().map_err(|_| bad("count"))?)
            }
            "dfe_feedback" => self.dfe_feedback = Some(value.parse().map_err(|_| bad("count"))?),
            "le_taps" => self.le_taps = Some(value.parse().map_err(|_| bad("count"))?),
            "combiner" => self.combiner = Some(parse_combiner(value)?),
            "exit_blocks" => self.exit_blocks = value.parse().map_err(|_| bad("count"))?,
            "exit_symbols" => self.exit_symbols = value.parse().map_err(|_| bad("count"))?,
            "threads" => self.threads = Some(value.parse().map_err(|_| bad("count"))?),
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Parses a flat `key = value` file over the defaults. `#` starts a comment.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_kv_str(text)?;
        Ok(cfg)
    }

    pub fn apply_kv_str(&mut self, text: &str) -> Result<()> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", no + 1)))?;
        }
        Ok(())
    }

    pub fn to_kv_string(&self) -> String {
        let l = self.lengths();
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        put("channel", self.channel_name.clone());
        put("variant", self.variant.to_string());
        put("snr", format_snr_list(&self.snr_db));
        put("iterations", self.iterations.to_string());
        put("message_bits", self.message_bits.to_string());
        put("blocks", self.blocks.to_string());
        put("min_blocks", self.min_blocks.to_string());
        put("target_errors", self.target_errors.to_string());
        put("seed", self.seed.to_string());
        put("interleaver", self.interleaver.to_string());
        put("ideal_feedback", self.ideal_feedback.to_string());
        put("dfe_feedforward", l.dfe_feedforward.to_string());
        put("dfe_feedback", l.dfe_feedback.to_string());
        put("le_taps", l.le_taps.to_string());
        if let Some(c) = self.combiner {
            put("combiner", combiner_name(c).to_string());
        }
        put("exit_blocks", self.exit_blocks.to_string());
        put("exit_symbols", self.exit_symbols.to_string());
        s
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Some(true),
        "0" | "false" | "no" | "off" => Some(false),
        _ => None,
    }
}

/// Comma-separated values and `start:step:stop` ranges, e.g. `0:2:10,11`.
pub fn parse_snr_list(s: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let nums: Vec<f64> = part
            .split(':')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Config(format!("bad snr entry '{part}'")))?;
        match nums.as_slice() {
            [v] => out.push(*v),
            [start, step, stop] if *step > 0.0 => {
                let count = ((stop - start) / step + 1e-9).floor();
                if count < 0.0 {
                    return Err(Error::Config(format!("empty snr range '{part}'")));
                }
                for k in 0..=count as usize {
                    out.push(start + k as f64 * step);
                }
            }
            _ => return Err(Error::Config(format!("bad snr entry '{part}'"))),
        }
    }
    Ok(out)
}

fn format_snr_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
