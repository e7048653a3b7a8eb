//! On-grid doubly selective channels.
//!
//! A path delays the signal by an integer number of samples and rotates it
//! by an integer number of Doppler bins per frame of N samples. Prefix
//! samples use negative time indices, stored with an offset so that
//! n = -L_c sits at array position 0.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_len, Error, Result};
use crate::params::AfdmConfig;

/// One propagation path: complex gain, integer delay and Doppler in grid units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSpec {
    pub gain: Complex64,
    pub delay: usize,
    pub doppler: i64,
}

impl PathSpec {
    pub fn new(gain: Complex64, delay: usize, doppler: i64) -> Self {
        Self {
            gain,
            delay,
            doppler,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    paths: Vec<PathSpec>,
}

impl ChannelRealization {
    pub fn new(paths: Vec<PathSpec>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::Argument("a channel needs at least one path".into()));
        }
        Ok(Self { paths })
    }

    /// Single unit path with no delay or Doppler.
    pub fn identity() -> Self {
        Self::single(Complex64::new(1.0, 0.0), 0, 0)
    }

    pub fn single(gain: Complex64, delay: usize, doppler: i64) -> Self {
        Self {
            paths: vec![PathSpec::new(gain, delay, doppler)],
        }
    }

    pub fn paths(&self) -> &[PathSpec] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(|p| p.gain.norm_sqr()).sum()
    }

    pub fn max_delay(&self) -> usize {
        self.paths.iter().map(|p| p.delay).max().unwrap_or(0)
    }

    /// Check every path against the frame's delay and Doppler limits.
    pub fn validate(&self, cfg: &AfdmConfig) -> Result<()> {
        for p in &self.paths {
            if p.delay > cfg.l_max || p.doppler.unsigned_abs() as usize > cfg.k_max {
                return Err(Error::Config(format!(
                    "path (l={}, k={}) outside l_max={}, k_max={}",
                    p.delay, p.doppler, cfg.l_max, cfg.k_max
                )));
            }
        }
        Ok(())
    }
}

/// One entry of a power-delay profile on the sample grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayPower {
    pub delay: usize,
    pub power: f64,
}

/// Extended Vehicular A taps: (delay in ns, relative power in dB).
pub const EVA_TAPS: [(f64, f64); 9] = [
    (0.0, 0.0),
    (30.0, -1.5),
    (150.0, -1.4),
    (310.0, -3.6),
    (370.0, -0.6),
    (710.0, -9.1),
    (1090.0, -7.0),
    (1730.0, -12.0),
    (2510.0, -16.9),
];

fn quantize_delay(delay_ns: f64, bandwidth_hz: f64) -> usize {
    (delay_ns * 1e-9 * bandwidth_hz).round() as usize
}

fn normalize(mut profile: Vec<DelayPower>) -> Vec<DelayPower> {
    let total: f64 = profile.iter().map(|t| t.power).sum();
    profile.iter_mut().for_each(|t| t.power /= total);
    profile
}

fn check_quantized_span(profile: &[DelayPower], cfg: &AfdmConfig) -> Result<()> {
    let max_delay = profile.iter().map(|t| t.delay).max().unwrap_or(0);
    if max_delay != cfg.l_max {
        return Err(Error::Config(format!(
            "EVA at {} Hz quantizes to max delay {max_delay}, config has l_max={}",
            cfg.bandwidth_hz, cfg.l_max
        )));
    }
    Ok(())
}

/// EVA quantized to the sample grid, taps sharing a grid delay merged.
pub fn eva_profile(cfg: &AfdmConfig) -> Result<Vec<DelayPower>> {
    let mut merged: Vec<DelayPower> = Vec::new();
    for &(ns, db) in EVA_TAPS.iter() {
        let delay = quantize_delay(ns, cfg.bandwidth_hz);
        let power = 10f64.powf(db / 10.0);
        match merged.iter_mut().find(|t| t.delay == delay) {
            Some(t) => t.power += power,
            None => merged.push(DelayPower { delay, power }),
        }
    }
    let merged = normalize(merged);
    check_quantized_span(&merged, cfg)?;
    Ok(merged)
}

/// EVA quantized to the sample grid with every tap kept as its own path,
/// so taps landing on the same delay draw independent Dopplers.
pub fn eva_tap_profile(cfg: &AfdmConfig) -> Result<Vec<DelayPower>> {
    let taps = EVA_TAPS
        .iter()
        .map(|&(ns, db)| DelayPower {
            delay: quantize_delay(ns, cfg.bandwidth_hz),
            power: 10f64.powf(db / 10.0),
        })
        .collect();
    let taps = normalize(taps);
    check_quantized_span(&taps, cfg)?;
    Ok(taps)
}

/// One path per profile entry: gain ~ CN(0, power), Doppler uniform on
/// the integers in [-k_max, k_max].
pub fn draw_realization(profile: &[DelayPower], k_max: usize, seed: u64) -> ChannelRealization {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = k_max as i64;
    let paths = profile
        .iter()
        .map(|tap| {
            let scale = (tap.power / 2.0).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let doppler = rng.random_range(-k..=k);
            PathSpec::new(Complex64::new(re, im) * scale, tap.delay, doppler)
        })
        .collect();
    ChannelRealization { paths }
}

/// The six-path example channel: (l, k) in
/// {(0,0), (0,-2), (0,2), (1,0), (1,-1), (1,1)}, unit gains unless given.
pub fn fig3_channel(gains: Option<[Complex64; 6]>) -> ChannelRealization {
    const GRID: [(usize, i64); 6] = [(0, 0), (0, -2), (0, 2), (1, 0), (1, -1), (1, 1)];
    let gains = gains.unwrap_or([Complex64::new(1.0, 0.0); 6]);
    let paths = GRID
        .iter()
        .zip(gains)
        .map(|(&(l, k), g)| PathSpec::new(g, l, k))
        .collect();
    ChannelRealization { paths }
}

/// Parse `delay,doppler,gain_re,gain_im` rows. Blank lines and `#` comments
/// are skipped, as is a leading header row.
pub fn parse_custom_channel(text: &str) -> Result<ChannelRealization> {
    let mut paths = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if paths.is_empty() && fields.first().is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        let bad = |what: &str| Error::Parse(format!("line {}: {what}", lineno + 1));
        if fields.len() != 4 {
            return Err(bad("expected delay,doppler,gain_re,gain_im"));
        }
        let delay = fields[0].parse::<usize>().map_err(|_| bad("bad delay"))?;
        let doppler = fields[1].parse::<i64>().map_err(|_| bad("bad doppler"))?;
        let re = fields[2].parse::<f64>().map_err(|_| bad("bad gain_re"))?;
        let im = fields[3].parse::<f64>().map_err(|_| bad("bad gain_im"))?;
        paths.push(PathSpec::new(Complex64::new(re, im), delay, doppler));
    }
    ChannelRealization::new(paths)
}

pub fn load_custom_channel(path: impl AsRef<Path>) -> Result<ChannelRealization> {
    parse_custom_channel(&std::fs::read_to_string(path)?)
}

/// exp(j2π k n / N) evaluated with exact integer phase reduction.
pub(crate) fn doppler_phase(doppler: i64, n: i64, period: usize) -> Complex64 {
    let p = period as i64;
    let turns = (doppler * n).rem_euclid(p) as f64 / p as f64;
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * turns)
}

/// Apply the channel to a sample stream whose first element has time index
/// `-origin`. Samples before the start of the stream are taken as zero.
pub fn apply_channel_stream(
    input: &[Complex64],
    chan: &ChannelRealization,
    origin: usize,
    doppler_period: usize,
) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); input.len()];
    for path in chan.paths() {
        for (t, o) in out.iter_mut().enumerate().skip(path.delay) {
            let n = t as i64 - origin as i64;
            *o += path.gain * input[t - path.delay] * doppler_phase(path.doppler, n, doppler_period);
        }
    }
    out
}

/// r_cpp[n] = Σ_i h_i s_cpp[n - l_i] exp(j2π k_i n / N), n in [-L_c, N).
pub fn apply_channel(
    s_cpp: &[Complex64],
    chan: &ChannelRealization,
    cfg: &AfdmConfig,
) -> Result<Vec<Complex64>> {
    check_len(cfg.frame_samples(), s_cpp.len())?;
    if let Some(p) = chan.paths().iter().find(|p| p.delay > cfg.cpp_len) {
        return Err(Error::DelayExceedsPrefix {
            delay: p.delay,
            prefix_len: cfg.cpp_len,
        });
    }
    Ok(apply_channel_stream(s_cpp, chan, cfg.cpp_len, cfg.n))
}

/// Add circularly symmetric Gaussian noise of total variance `sigma2`.
pub fn add_awgn(r: &[Complex64], sigma2: f64, seed: u64) -> Result<Vec<Complex64>> {
    let mut out = r.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    add_awgn_with(&mut out, sigma2, &mut rng)?;
    Ok(out)
}

pub fn add_awgn_with<R: Rng + ?Sized>(buf: &mut [Complex64], sigma2: f64, rng: &mut R) -> Result<()> {
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(Error::Argument(format!("noise variance {sigma2} must be finite and >= 0")));
    }
    if sigma2 == 0.0 {
        return Ok(());
    }
    let sd = (sigma2 / 2.0).sqrt();
    for v in buf.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v += Complex64::new(re, im) * sd;
    }
    Ok(())
}

/// Where each frame's channel comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelModel {
    /// EVA with taps merged per grid delay, one Doppler per merged path.
    Eva,
    /// EVA with each tap a separate path and Doppler.
    EvaTaps,
    /// Fixed six-path example channel, unit gains.
    Fig3,
    /// Identity channel, for pure AWGN runs.
    Awgn,
    /// Fixed channel from a file.
    Custom(ChannelRealization),
}

impl ChannelModel {
    /// Accepts `eva`, `eva-taps`, `fig3`, `awgn` or `custom:<file>`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(file) = s.strip_prefix("custom:") {
            return Ok(ChannelModel::Custom(load_custom_channel(file)?));
        }
        match s {
            "eva" => Ok(ChannelModel::Eva),
            "eva-taps" => Ok(ChannelModel::EvaTaps),
            "fig3" => Ok(ChannelModel::Fig3),
            "awgn" => Ok(ChannelModel::Awgn),
            other => Err(Error::Parse(format!("unknown channel profile `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChannelModel::Eva => "eva",
            ChannelModel::EvaTaps => "eva-taps",
            ChannelModel::Fig3 => "fig3",
            ChannelModel::Awgn => "awgn",
            ChannelModel::Custom(_) => "custom",
        }
    }

    /// Resolve against a frame configuration, checking delay and Doppler
    /// limits once up front.
    pub fn prepare(&self, cfg: &AfdmConfig) -> Result<ChannelSource> {
        let source = match self {
            ChannelModel::Eva => ChannelSource::Random {
                profile: eva_profile(cfg)?,
                k_max: cfg.k_max,
            },
            ChannelModel::EvaTaps => ChannelSource::Random {
                profile: eva_tap_profile(cfg)?,
                k_max: cfg.k_max,
            },
            ChannelModel::Fig3 => ChannelSource::Fixed(fig3_channel(None)),
            ChannelModel::Awgn => ChannelSource::Fixed(ChannelRealization::identity()),
            ChannelModel::Custom(c) => ChannelSource::Fixed(c.clone()),
        };
        if let ChannelSource::Fixed(c) = &source {
            c.validate(cfg)?;
        }
        Ok(source)
    }
}

/// A prepared per-frame channel generator.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSource {
    Random { profile: Vec<DelayPower>, k_max: usize },
    Fixed(ChannelRealization),
}

impl ChannelSource {
    pub fn realize(&self, seed: u64) -> ChannelRealization {
        match self {
            ChannelSource::Random { profile, k_max } => draw_realization(profile, *k_max, seed),
            ChannelSource::Fixed(c) => c.clone(),
        }
    }
}
