//! Flat `key = value` simulation config files.
//!
//! ```text
//! # desk-scale EVA run
//! n = 512
//! chi = 8
//! k_max = 2
//! l_max = 3
//! profile = eva-taps
//! bandwidth_hz = 1.36e6
//! ```

use std::path::Path;

use crate::channel::ChannelModel;
use crate::error::{Error, Result};
use crate::harness::Scheme;
use crate::params::{build_config, AfdmConfig, Constellation, DEFAULT_BANDWIDTH_HZ, DEFAULT_CARRIER_HZ};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub chi: u32,
    pub k_max: usize,
    pub l_max: usize,
    /// Defaults to l_max.
    pub cpp_len: Option<usize>,
    pub constellation: Constellation,
    pub profile: ChannelModel,
    pub seed: u64,
    pub scheme: Option<Scheme>,
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 4096,
            chi: 9,
            k_max: 4,
            l_max: 5,
            cpp_len: None,
            constellation: Constellation::Qpsk,
            profile: ChannelModel::Eva,
            seed: 1,
            scheme: None,
            bandwidth_hz: DEFAULT_BANDWIDTH_HZ,
            carrier_hz: DEFAULT_CARRIER_HZ,
        }
    }
}

fn value<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad value `{v}` for `{key}`")))
}

impl SimConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = SimConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {line_no}: expected key = value")))?;
            let (key, v) = (key.trim(), v.trim());
            match key {
                "n" => c.n = value(key, v, line_no)?,
                "chi" => c.chi = value(key, v, line_no)?,
                "k_max" => c.k_max = value(key, v, line_no)?,
                "l_max" => c.l_max = value(key, v, line_no)?,
                "cpp_len" => c.cpp_len = Some(value(key, v, line_no)?),
                "constellation" => c.constellation = Constellation::parse(v)?,
                "profile" => c.profile = ChannelModel::parse(v)?,
                "seed" => c.seed = value(key, v, line_no)?,
                "scheme" => c.scheme = Some(Scheme::parse(v)?),
                "bandwidth_hz" => c.bandwidth_hz = value(key, v, line_no)?,
                "carrier_hz" => c.carrier_hz = value(key, v, line_no)?,
                other => return Err(Error::Parse(format!("line {line_no}: unknown key `{other}`"))),
            }
        }
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Frame configuration at this config's χ.
    pub fn afdm(&self) -> Result<AfdmConfig> {
        self.afdm_with_chi(self.chi)
    }

    pub fn afdm_with_chi(&self, chi: u32) -> Result<AfdmConfig> {
        let cfg = build_config(chi, self.k_max, self.l_max, self.n, self.constellation)?
            .with_bandwidth(self.bandwidth_hz)?
            .with_carrier(self.carrier_hz)?;
        match self.cpp_len {
            Some(lc) => cfg.with_cpp_len(lc),
            None => Ok(cfg),
        }
    }
}
