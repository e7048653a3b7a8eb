//! Chirp-rate selection and frame geometry.

use crate::error::{Error, Result};
use crate::transforms::ChirpParams;

/// Symbol alphabet. Only QPSK is wired through the chains today.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Constellation {
    #[default]
    Qpsk,
}

impl Constellation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Constellation::Qpsk => 2,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Constellation::Qpsk),
            other => Err(Error::Parse(format!("unknown constellation `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Constellation::Qpsk => "qpsk",
        }
    }
}

/// Post- and pre-chirp rates for a given χ:
/// c1 = χ(2k_max+1)/(2N), c2 = 1/(4 c1 N²).
pub fn select_params(chi: u32, k_max: usize, n: usize) -> Result<(f64, f64)> {
    if chi == 0 {
        return Err(Error::Argument("chi must be a positive integer".into()));
    }
    if n < 2 {
        return Err(Error::Argument(format!("frame length N={n} must be at least 2")));
    }
    let nf = n as f64;
    let c1 = f64::from(chi) * (2 * k_max + 1) as f64 / (2.0 * nf);
    let c2 = 1.0 / (4.0 * c1 * nf * nf);
    Ok((c1, c2))
}

/// Validated ZP-AFDM frame configuration. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct AfdmConfig {
    pub n: usize,
    pub chi: u32,
    pub k_max: usize,
    pub l_max: usize,
    pub c1: f64,
    pub c2: f64,
    /// Chirp-periodic prefix length.
    pub cpp_len: usize,
    /// Leading zeros in the affine frame.
    pub lead_zeros: usize,
    /// Total zero-padded affine symbols (leading plus trailing k_max).
    pub zero_pad: usize,
    /// Data symbols per frame.
    pub n_data: usize,
    pub constellation: Constellation,
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
}

pub const DEFAULT_BANDWIDTH_HZ: f64 = 2.0e6;
pub const DEFAULT_CARRIER_HZ: f64 = 2.0e9;

/// Assemble a configuration with `cpp_len = l_max` and the default
/// 2 MHz / 2 GHz bookkeeping values.
pub fn build_config(
    chi: u32,
    k_max: usize,
    l_max: usize,
    n: usize,
    constellation: Constellation,
) -> Result<AfdmConfig> {
    let (c1, c2) = select_params(chi, k_max, n)?;
    let shift = chi as usize * (2 * k_max + 1);
    let lead_zeros = k_max + shift * l_max;
    let zero_pad = lead_zeros + k_max;
    if zero_pad >= n {
        return Err(Error::FrameTooShort {
            chi,
            k_max,
            l_max,
            n,
        });
    }
    Ok(AfdmConfig {
        n,
        chi,
        k_max,
        l_max,
        c1,
        c2,
        cpp_len: l_max,
        lead_zeros,
        zero_pad,
        n_data: n - zero_pad,
        constellation,
        bandwidth_hz: DEFAULT_BANDWIDTH_HZ,
        carrier_hz: DEFAULT_CARRIER_HZ,
    })
}

impl AfdmConfig {
    pub fn with_cpp_len(mut self, cpp_len: usize) -> Result<Self> {
        if cpp_len < self.l_max {
            return Err(Error::Config(format!(
                "prefix length {cpp_len} is shorter than l_max={}",
                self.l_max
            )));
        }
        self.cpp_len = cpp_len;
        Ok(self)
    }

    pub fn with_bandwidth(mut self, bandwidth_hz: f64) -> Result<Self> {
        if !(bandwidth_hz > 0.0 && bandwidth_hz.is_finite()) {
            return Err(Error::Argument("bandwidth must be positive".into()));
        }
        self.bandwidth_hz = bandwidth_hz;
        Ok(self)
    }

    pub fn with_carrier(mut self, carrier_hz: f64) -> Result<Self> {
        if !(carrier_hz > 0.0 && carrier_hz.is_finite()) {
            return Err(Error::Argument("carrier frequency must be positive".into()));
        }
        self.carrier_hz = carrier_hz;
        Ok(self)
    }

    /// 2·c1·N, the affine-domain shift contributed by one unit of delay.
    pub fn shift_per_delay(&self) -> usize {
        self.chi as usize * (2 * self.k_max + 1)
    }

    pub fn chirp(&self) -> ChirpParams {
        ChirpParams {
            c1: self.c1,
            c2: self.c2,
            n_points: self.n,
        }
    }

    pub fn sample_period(&self) -> f64 {
        1.0 / self.bandwidth_hz
    }

    pub fn frame_duration(&self) -> f64 {
        self.n as f64 * self.sample_period()
    }

    /// Samples on air per frame, prefix included.
    pub fn frame_samples(&self) -> usize {
        self.n + self.cpp_len
    }

    /// Fraction of the N affine symbols spent on zero padding.
    pub fn overhead(&self) -> f64 {
        self.zero_pad as f64 / self.n as f64
    }

    /// Effective affine-domain delay of a path: L2 + k - 2c1N·l.
    pub fn effective_delay(&self, delay: usize, doppler: i64) -> i64 {
        self.lead_zeros as i64 + doppler - (self.shift_per_delay() * delay) as i64
    }
}

/// Data-carrying fraction of transmitted samples, N_d / (N + L_c).
pub fn efficiency(cfg: &AfdmConfig) -> f64 {
    cfg.n_data as f64 / (cfg.n + cfg.cpp_len) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn select_params_examples() {
        for n in [16usize, 64, 4096] {
            let (c1, _) = select_params(2, 2, n).unwrap();
            assert!((c1 - 10.0 / (2.0 * n as f64)).abs() < 1e-18);
        }
        let (c1, c2) = select_params(2, 2, 4096).unwrap();
        assert!((c2 - 1.0 / (20.0 * 4096.0)).abs() < 1e-18);
        assert!((4.0 * c1 * c2 * 4096f64.powi(2) - 1.0).abs() < 1e-12);

        let (c1, c2) = select_params(1, 0, 16).unwrap();
        assert_eq!(c1, 1.0 / 32.0);
        assert_eq!(c2, 1.0 / 32.0);
    }

    #[test]
    fn select_params_rejects_bad_arguments() {
        assert!(matches!(select_params(0, 2, 64), Err(Error::Argument(_))));
        assert!(matches!(select_params(1, 2, 1), Err(Error::Argument(_))));
        assert!(matches!(select_params(1, 2, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn default_frame_geometry_for_chi_9() {
        let cfg = build_config(9, 4, 5, 4096, Constellation::Qpsk).unwrap();
        assert_eq!(cfg.shift_per_delay(), 81);
        assert_eq!(cfg.lead_zeros, 409);
        assert_eq!(cfg.zero_pad, 413);
        assert_eq!(cfg.n_data, 3683);
        assert!((cfg.overhead() - 0.10083).abs() < 1e-4);
        assert!((cfg.overhead() - 0.10).abs() < 0.005);
        assert_eq!(cfg.cpp_len, 5);
        assert!((efficiency(&cfg) - 3683.0 / 4101.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_and_large_chi_geometry() {
        let cfg = build_config(1, 0, 0, 8, Constellation::Qpsk).unwrap();
        assert_eq!((cfg.lead_zeros, cfg.zero_pad, cfg.n_data), (0, 0, 8));
        assert_eq!(efficiency(&cfg), 1.0);

        let cfg = build_config(17, 4, 5, 4096, Constellation::Qpsk).unwrap();
        assert_eq!(cfg.zero_pad, 773);
        assert_eq!(cfg.n_data, 3323);
        assert!((cfg.overhead() - 0.1887).abs() < 1e-3);

        let cfg = build_config(13, 4, 5, 4096, Constellation::Qpsk).unwrap();
        assert_eq!(cfg.n_data, 3503);
        assert!((efficiency(&cfg) - 3503.0 / 4101.0).abs() < 1e-15);
    }

    #[test]
    fn too_short_frame_is_rejected() {
        let err = build_config(9, 4, 5, 400, Constellation::Qpsk).unwrap_err();
        assert!(matches!(err, Error::FrameTooShort { chi: 9, .. }));
        // N_d would be exactly zero
        assert!(build_config(1, 1, 1, 5, Constellation::Qpsk).is_err());
        assert!(build_config(1, 1, 1, 6, Constellation::Qpsk).is_ok());
    }

    #[test]
    fn prefix_shorter_than_delay_spread_rejected() {
        let cfg = build_config(2, 2, 3, 128, Constellation::Qpsk).unwrap();
        assert!(cfg.clone().with_cpp_len(2).is_err());
        assert_eq!(cfg.with_cpp_len(7).unwrap().cpp_len, 7);
    }

    #[test]
    fn chi_trade_off_is_monotone() {
        let mut last: Option<AfdmConfig> = None;
        for chi in 1..=20 {
            let cfg = build_config(chi, 4, 5, 4096, Constellation::Qpsk).unwrap();
            if let Some(prev) = &last {
                assert!(cfg.zero_pad > prev.zero_pad);
                assert!(efficiency(&cfg) < efficiency(prev));
            }
            last = Some(cfg);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn chirp_product_is_one(chi in 1u32..40, k_max in 0usize..10, n in 2usize..20_000) {
                let (c1, c2) = select_params(chi, k_max, n).unwrap();
                let nf = n as f64;
                prop_assert!((4.0 * c1 * c2 * nf * nf - 1.0).abs() < 1e-12);
            }

            #[test]
            fn delay_shifts_land_on_grid(chi in 1u32..30, k_max in 0usize..6, l_max in 0usize..6) {
                let n = 1 << 14;
                let cfg = build_config(chi, k_max, l_max, n, Constellation::Qpsk).unwrap();
                for l in 0..=l_max {
                    let shift = 2.0 * cfg.c1 * n as f64 * l as f64;
                    prop_assert!((shift - shift.round()).abs() < 1e-9);
                    prop_assert_eq!(shift.round() as usize, cfg.shift_per_delay() * l);
                }
                prop_assert_eq!(cfg.zero_pad, 2 * k_max + cfg.shift_per_delay() * l_max);
            }
        }
    }
}
