//! Monte Carlo BER engine.
//!
//! Each frame gets its own seed derived from the point seed and the frame
//! index, so a point's result does not depend on how frames are scheduled.
//! Frames run in fixed-size batches (in parallel with the `parallel`
//! feature); results are folded in frame order and the stopping rule is
//! checked after every frame.

mod report;

use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use report::{
    efficiency_report, parse_ebn0_list, write_ber_csv, write_efficiency_csv, EfficiencyRow, BER_CSV_COLUMNS,
};

use crate::baselines::{lmmse_chain, BlockModem, OfdmConfig};
use crate::channel::{ChannelModel, ChannelSource};
use crate::error::{Error, Result};
use crate::params::AfdmConfig;
use crate::zp_afdm::{random_bits, zp_afdm_chain, ChainOutput, ZpAfdmModem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    ZpAfdm,
    Ofdm,
    Scfde,
    LmmseAfdm,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::ZpAfdm, Scheme::Ofdm, Scheme::Scfde, Scheme::LmmseAfdm];

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zp_afdm" => Ok(Scheme::ZpAfdm),
            "ofdm" => Ok(Scheme::Ofdm),
            "scfde" => Ok(Scheme::Scfde),
            "lmmse_afdm" => Ok(Scheme::LmmseAfdm),
            other => Err(Error::Parse(format!("unknown scheme `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::ZpAfdm => "zp_afdm",
            Scheme::Ofdm => "ofdm",
            Scheme::Scfde => "scfde",
            Scheme::LmmseAfdm => "lmmse_afdm",
        }
    }

    fn id(self) -> u64 {
        self as u64 + 1
    }
}

/// Largest N_d the dense LMMSE detector accepts.
pub const LMMSE_MAX_DATA: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub ebn0_db: Vec<f64>,
    pub min_bits: u64,
    pub min_errors: u64,
    pub max_frames: u64,
    pub schemes: Vec<Scheme>,
    pub chis: Vec<u32>,
    pub master_seed: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            ebn0_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            min_bits: 100_000,
            min_errors: 100,
            max_frames: 10_000,
            schemes: vec![Scheme::ZpAfdm],
            chis: vec![9],
            master_seed: 1,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.max_frames == 0 {
            return Err(Error::Config("max_frames must be at least 1".into()));
        }
        if self.schemes.is_empty() || self.chis.is_empty() || self.ebn0_db.is_empty() {
            return Err(Error::Config("sweep needs at least one scheme, chi and Eb/N0".into()));
        }
        if self.ebn0_db.iter().any(|v| v.is_nan()) {
            return Err(Error::Config("Eb/N0 values must be numbers".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub scheme: Scheme,
    pub chi: u32,
    pub ebn0_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub frames: u64,
    pub wall_seconds: f64,
    pub seed: u64,
    /// Frames where the one-tap equalizer hit a zero tap.
    pub flagged_frames: u64,
    /// Half-width of the 95% confidence interval on `ber`, from the spread
    /// of per-frame error counts.
    pub ci95: f64,
}

impl BerRecord {
    pub fn low_confidence(&self) -> bool {
        self.errors < 10
    }

    pub fn flags(&self) -> String {
        let mut f = Vec::new();
        if self.low_confidence() {
            f.push("low_confidence");
        }
        if self.flagged_frames > 0 {
            f.push("zero_tap");
        }
        f.join(";")
    }

    /// Equal to everything but the wall clock.
    pub fn same_result(&self, other: &BerRecord) -> bool {
        let mut a = self.clone();
        a.wall_seconds = other.wall_seconds;
        a == *other
    }
}

/// Noise variance per complex sample for a given Eb/N0, with E_s = 1 and
/// the whole frame's sample budget charged to the data bits.
pub fn noise_variance(ebn0_db: f64, frame_samples: usize, data_symbols: usize, bits_per_symbol: usize) -> f64 {
    if ebn0_db == f64::INFINITY {
        return 0.0;
    }
    let eb = frame_samples as f64 / (data_symbols * bits_per_symbol) as f64;
    eb / 10f64.powf(ebn0_db / 10.0)
}

/// How frames within a batch are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

const BATCH: u64 = 32;

/// SplitMix64 finalizer.
pub fn mix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one sweep point.
pub fn point_seed(master: u64, scheme: Scheme, chi: u32, ebn0_index: usize) -> u64 {
    mix(mix(mix(mix(master) ^ scheme.id()) ^ u64::from(chi)) ^ ebn0_index as u64)
}

pub fn frame_seed(point_seed: u64, frame: u64) -> u64 {
    mix(point_seed ^ mix(frame))
}

enum Receiver {
    Afdm(ZpAfdmModem),
    Lmmse(ZpAfdmModem),
    Block { modem: BlockModem, single_carrier: bool },
}

/// Everything needed to run frames of one (scheme, configuration) pair.
pub struct FrameRunner {
    receiver: Receiver,
    source: ChannelSource,
    bits_per_frame: usize,
    frame_samples: usize,
    data_symbols: usize,
    bits_per_symbol: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameResult {
    pub errors: u64,
    pub flagged: bool,
}

impl FrameRunner {
    pub fn new(scheme: Scheme, cfg: &AfdmConfig, model: &ChannelModel) -> Result<Self> {
        let source = model.prepare(cfg)?;
        let bps = cfg.constellation.bits_per_symbol();
        let afdm = |lmmse: bool| -> Result<Self> {
            if lmmse && cfg.n_data > LMMSE_MAX_DATA {
                return Err(Error::Config(format!(
                    "lmmse_afdm is a dense detector; N_d={} exceeds {LMMSE_MAX_DATA}",
                    cfg.n_data
                )));
            }
            let modem = ZpAfdmModem::new(cfg)?;
            Ok(Self {
                receiver: if lmmse { Receiver::Lmmse(modem) } else { Receiver::Afdm(modem) },
                source: source.clone(),
                bits_per_frame: cfg.n_data * bps,
                frame_samples: cfg.frame_samples(),
                data_symbols: cfg.n_data,
                bits_per_symbol: bps,
            })
        };
        match scheme {
            Scheme::ZpAfdm => afdm(false),
            Scheme::LmmseAfdm => afdm(true),
            Scheme::Ofdm | Scheme::Scfde => {
                let ocfg = OfdmConfig::matching(cfg)?;
                Ok(Self {
                    receiver: Receiver::Block {
                        modem: BlockModem::new(&ocfg)?,
                        single_carrier: scheme == Scheme::Scfde,
                    },
                    source,
                    bits_per_frame: ocfg.bits_per_frame(),
                    frame_samples: ocfg.used_samples(),
                    data_symbols: ocfg.data_symbols(),
                    bits_per_symbol: bps,
                })
            }
        }
    }

    pub fn bits_per_frame(&self) -> usize {
        self.bits_per_frame
    }

    pub fn noise_variance(&self, ebn0_db: f64) -> f64 {
        noise_variance(ebn0_db, self.frame_samples, self.data_symbols, self.bits_per_symbol)
    }

    /// One frame from its seed: bits, channel draw and noise all derive from it.
    pub fn run_frame(&self, seed: u64, sigma2: f64) -> Result<FrameResult> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits = random_bits(self.bits_per_frame, &mut rng);
        let chan = self.source.realize(rng.next_u64());
        let noise_seed = rng.next_u64();
        let out: ChainOutput = match &self.receiver {
            Receiver::Afdm(m) => zp_afdm_chain(&bits, &chan, sigma2, m, noise_seed)?,
            Receiver::Lmmse(m) => lmmse_chain(&bits, &chan, sigma2, m, noise_seed)?,
            Receiver::Block { modem, single_carrier } => modem.run(&bits, &chan, sigma2, noise_seed, *single_carrier)?,
        };
        let errors = bits.iter().zip(&out.bits).filter(|(a, b)| a != b).count() as u64;
        Ok(FrameResult {
            errors,
            flagged: out.flagged,
        })
    }

    fn run_batch(&self, seeds: &[u64], sigma2: f64, exec: Execution) -> Result<Vec<FrameResult>> {
        match exec {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                seeds.par_iter().map(|&s| self.run_frame(s, sigma2)).collect()
            }
            _ => seeds.iter().map(|&s| self.run_frame(s, sigma2)).collect(),
        }
    }

    /// Run frames until the stopping rule fires.
    pub fn run_point(
        &self,
        scheme: Scheme,
        chi: u32,
        ebn0_db: f64,
        spec: &SweepSpec,
        seed: u64,
        exec: Execution,
    ) -> Result<BerRecord> {
        let start = Instant::now();
        let sigma2 = self.noise_variance(ebn0_db);
        let bpf = self.bits_per_frame as u64;
        let (mut frames, mut errors, mut flagged) = (0u64, 0u64, 0u64);
        let mut sum_sq = 0.0f64;
        'outer: while frames < spec.max_frames {
            let n = BATCH.min(spec.max_frames - frames);
            let seeds: Vec<u64> = (frames..frames + n).map(|f| frame_seed(seed, f)).collect();
            for r in self.run_batch(&seeds, sigma2, exec)? {
                frames += 1;
                errors += r.errors;
                sum_sq += (r.errors as f64).powi(2);
                flagged += u64::from(r.flagged);
                if errors >= spec.min_errors && frames * bpf >= spec.min_bits {
                    break 'outer;
                }
            }
        }
        let bits = frames * bpf;
        let f = frames as f64;
        let mean = errors as f64 / f;
        let var = if frames > 1 {
            ((sum_sq - f * mean * mean) / (f - 1.0)).max(0.0)
        } else {
            0.0
        };
        Ok(BerRecord {
            scheme,
            chi,
            ebn0_db,
            bits,
            errors,
            ber: errors as f64 / bits as f64,
            frames,
            wall_seconds: start.elapsed().as_secs_f64(),
            seed,
            flagged_frames: flagged,
            ci95: 1.96 * var.sqrt() / f.sqrt() / bpf as f64,
        })
    }
}

/// One BER point: independent channel per frame, full chain, error count.
pub fn run_point(
    scheme: Scheme,
    cfg: &AfdmConfig,
    model: &ChannelModel,
    ebn0_db: f64,
    spec: &SweepSpec,
    seed: u64,
) -> Result<BerRecord> {
    FrameRunner::new(scheme, cfg, model)?.run_point(scheme, cfg.chi, ebn0_db, spec, seed, Execution::default())
}

/// Every (χ, scheme, Eb/N0) combination of the spec. `make_cfg` builds the
/// frame configuration for a given χ.
pub fn run_sweep<F>(spec: &SweepSpec, model: &ChannelModel, make_cfg: F) -> Result<Vec<BerRecord>>
where
    F: Fn(u32) -> Result<AfdmConfig>,
{
    spec.validate()?;
    let mut out = Vec::new();
    for &chi in &spec.chis {
        let cfg = make_cfg(chi)?;
        for &scheme in &spec.schemes {
            let runner = FrameRunner::new(scheme, &cfg, model)?;
            for (i, &eb) in spec.ebn0_db.iter().enumerate() {
                let seed = point_seed(spec.master_seed, scheme, chi, i);
                out.push(runner.run_point(scheme, chi, eb, spec, seed, Execution::default())?);
            }
        }
    }
    Ok(out)
}
