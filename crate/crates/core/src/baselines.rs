//! Reference receivers: CP-OFDM and SC-FDE with one-tap frequency-domain
//! MMSE, and a full linear MMSE on the reconstructed affine symbols.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{build_h_aff_recon, EffectiveMatrix};
use crate::channel::{add_awgn_with, apply_channel_stream, ChannelRealization};
use crate::error::{check_len, Error, Result};
use crate::params::{efficiency, AfdmConfig, Constellation};
use crate::transforms::{unit_phase, UnitaryDft};
use crate::zp_afdm::mapping::demap_into;
use crate::zp_afdm::{map_bits, receive_reconstructed, ChainOutput, ZpAfdmModem};

/// Block layout for the OFDM and SC-FDE baselines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OfdmConfig {
    pub n_subcarriers: usize,
    pub n_symbols: usize,
    pub cp_len: usize,
    /// Samples available per frame (N + L_c of the matching AFDM frame).
    pub frame_len: usize,
    /// Samples per Doppler bin period, N of the matching AFDM frame.
    pub doppler_period: usize,
    pub constellation: Constellation,
}

impl OfdmConfig {
    pub fn new(
        n_subcarriers: usize,
        n_symbols: usize,
        cp_len: usize,
        frame_len: usize,
        doppler_period: usize,
    ) -> Result<Self> {
        let c = Self {
            n_subcarriers,
            n_symbols,
            cp_len,
            frame_len,
            doppler_period,
            constellation: Constellation::Qpsk,
        };
        if n_subcarriers == 0 || n_symbols == 0 || doppler_period == 0 {
            return Err(Error::Config("OFDM layout needs at least one subcarrier and symbol".into()));
        }
        if c.used_samples() > frame_len {
            return Err(Error::Config(format!(
                "{n_symbols} symbols of {} samples exceed the {frame_len}-sample frame",
                n_subcarriers + cp_len
            )));
        }
        Ok(c)
    }

    /// Same CP length as the AFDM prefix and the same data fraction, packed
    /// into the same N + L_c samples.
    pub fn matching(cfg: &AfdmConfig) -> Result<Self> {
        let cp = cfg.cpp_len;
        let frame_len = cfg.frame_samples();
        let n_sc = if cp == 0 {
            frame_len
        } else {
            let eta = efficiency(cfg);
            ((cp as f64 * eta / (1.0 - eta)).round() as usize).max(1)
        };
        let n_sym = frame_len / (n_sc + cp);
        let c = Self::new(n_sc, n_sym, cp, frame_len, cfg.n)?;
        c.check_delay_spread(cfg.l_max)?;
        Ok(c)
    }

    pub fn check_delay_spread(&self, l_max: usize) -> Result<()> {
        if self.cp_len < l_max {
            return Err(Error::Config(format!(
                "cyclic prefix {} is shorter than l_max={l_max}",
                self.cp_len
            )));
        }
        Ok(())
    }

    pub fn used_samples(&self) -> usize {
        self.n_symbols * (self.n_subcarriers + self.cp_len)
    }

    pub fn data_symbols(&self) -> usize {
        self.n_symbols * self.n_subcarriers
    }

    pub fn bits_per_frame(&self) -> usize {
        self.data_symbols() * self.constellation.bits_per_symbol()
    }

    pub fn overhead(&self) -> f64 {
        self.cp_len as f64 / (self.n_subcarriers + self.cp_len) as f64
    }
}

/// Planned OFDM / SC-FDE transceiver.
#[derive(Debug, Clone)]
pub struct BlockModem {
    ocfg: OfdmConfig,
    dft: UnitaryDft,
}

impl BlockModem {
    pub fn new(ocfg: &OfdmConfig) -> Result<Self> {
        Ok(Self {
            ocfg: ocfg.clone(),
            dft: UnitaryDft::new(ocfg.n_subcarriers)?,
        })
    }

    pub fn config(&self) -> &OfdmConfig {
        &self.ocfg
    }

    /// Channel frequency response at the middle of symbol `j`.
    fn mid_symbol_response(&self, chan: &ChannelRealization, j: usize) -> Vec<Complex64> {
        let o = &self.ocfg;
        let nsc = o.n_subcarriers as i64;
        // twice the mid-symbol time index, kept integral
        let two_mid = (2 * j * (o.n_subcarriers + o.cp_len) + 2 * o.cp_len + o.n_subcarriers) as i64;
        let period2 = 2 * o.doppler_period as i64;
        let mut h = vec![Complex64::new(0.0, 0.0); o.n_subcarriers];
        for p in chan.paths() {
            let g = p.gain * unit_phase((p.doppler * two_mid).rem_euclid(period2) as f64 / period2 as f64);
            for (f, hf) in h.iter_mut().enumerate() {
                let turns = (f as i64 * p.delay as i64).rem_euclid(nsc) as f64 / nsc as f64;
                *hf += g * unit_phase(-turns);
            }
        }
        h
    }

    /// One frame through the channel. `single_carrier` selects SC-FDE.
    pub fn run(
        &self,
        bits: &[u8],
        chan: &ChannelRealization,
        sigma2: f64,
        seed: u64,
        single_carrier: bool,
    ) -> Result<ChainOutput> {
        let o = &self.ocfg;
        check_len(o.bits_per_frame(), bits.len())?;
        if let Some(p) = chan.paths().iter().find(|p| p.delay > o.cp_len) {
            return Err(Error::DelayExceedsPrefix {
                delay: p.delay,
                prefix_len: o.cp_len,
            });
        }
        let symbols = map_bits(bits, o.constellation)?;
        let (nsc, cp) = (o.n_subcarriers, o.cp_len);

        let mut tx = Vec::with_capacity(o.used_samples());
        let mut block = vec![Complex64::new(0.0, 0.0); nsc];
        for data in symbols.chunks_exact(nsc) {
            block.copy_from_slice(data);
            if !single_carrier {
                self.dft.inverse_in_place(&mut block)?;
            }
            tx.extend_from_slice(&block[nsc - cp..]);
            tx.extend_from_slice(&block);
        }

        let mut rx = apply_channel_stream(&tx, chan, 0, o.doppler_period);
        add_awgn_with(&mut rx, sigma2, &mut ChaCha8Rng::seed_from_u64(seed))?;

        let mut out = Vec::with_capacity(bits.len());
        let mut flagged = false;
        for (j, sym) in rx.chunks_exact(nsc + cp).enumerate() {
            block.copy_from_slice(&sym[cp..]);
            self.dft.forward_in_place(&mut block)?;
            let h = self.mid_symbol_response(chan, j);
            for (y, hf) in block.iter_mut().zip(&h) {
                let denom = hf.norm_sqr() + sigma2;
                if denom == 0.0 {
                    flagged = true;
                    *y = Complex64::new(0.0, 0.0);
                } else {
                    *y = *y * hf.conj() / denom;
                }
            }
            if single_carrier {
                self.dft.inverse_in_place(&mut block)?;
            }
            demap_into(&block, &mut out);
        }
        Ok(ChainOutput { bits: out, flagged })
    }
}

pub fn ofdm_chain(
    bits: &[u8],
    chan: &ChannelRealization,
    sigma2: f64,
    ocfg: &OfdmConfig,
    seed: u64,
) -> Result<ChainOutput> {
    BlockModem::new(ocfg)?.run(bits, chan, sigma2, seed, false)
}

pub fn scfde_chain(
    bits: &[u8],
    chan: &ChannelRealization,
    sigma2: f64,
    ocfg: &OfdmConfig,
    seed: u64,
) -> Result<ChainOutput> {
    BlockModem::new(ocfg)?.run(bits, chan, sigma2, seed, true)
}

/// x̂ = Hᴴ (H Hᴴ + σ² I)⁻¹ y.
pub fn lmmse_affine(y_d: &[Complex64], h: &EffectiveMatrix, sigma2: f64) -> Result<Vec<Complex64>> {
    lmmse_affine_weighted(y_d, h, &vec![sigma2; y_d.len()])
}

/// x̂ = Hᴴ (H Hᴴ + diag(noise))⁻¹ y, for independent noise with per-row
/// variances.
pub fn lmmse_affine_weighted(y_d: &[Complex64], h: &EffectiveMatrix, noise: &[f64]) -> Result<Vec<Complex64>> {
    check_len(h.nrows(), y_d.len())?;
    check_len(h.nrows(), noise.len())?;
    if let Some(v) = noise.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::Argument(format!("noise variance {v} must be finite and >= 0")));
    }
    let gram = gram_with_loading(&h.entries, noise);
    let y = DVector::from_column_slice(y_d);
    let z = if noise.iter().all(|v| *v > 0.0) {
        gram.cholesky()
            .ok_or_else(|| Error::Argument("H Hᴴ + σ²I is not positive definite".into()))?
            .solve(&y)
    } else {
        gram.lu()
            .solve(&y)
            .ok_or_else(|| Error::Argument("H Hᴴ is singular".into()))?
    };
    Ok((h.entries.adjoint() * z).iter().copied().collect())
}

/// H Hᴴ + diag(noise), skipping the zeros of a banded H.
fn gram_with_loading(h: &DMatrix<Complex64>, noise: &[f64]) -> DMatrix<Complex64> {
    let rows = h.nrows();
    let mut g = DMatrix::from_element(rows, rows, Complex64::new(0.0, 0.0));
    let mut support: Vec<(usize, Complex64)> = Vec::new();
    for col in h.column_iter() {
        support.clear();
        support.extend(col.iter().enumerate().filter(|(_, v)| v.re != 0.0 || v.im != 0.0).map(|(i, v)| (i, *v)));
        for &(i, a) in &support {
            for &(j, b) in &support {
                g[(i, j)] += a * b.conj();
            }
        }
    }
    for (i, v) in noise.iter().enumerate() {
        g[(i, i)] += *v;
    }
    g
}

/// Noise variance of each reconstructed symbol: σ² times the number of
/// received affine symbols folded onto it.
pub fn folded_noise(sigma2: f64, cfg: &AfdmConfig) -> Vec<f64> {
    (0..cfg.n_data)
        .map(|m| sigma2 * (m..cfg.n).step_by(cfg.n_data).count() as f64)
        .collect()
}

/// ZP-AFDM transmit chain with the LMMSE detector on the reconstructed
/// symbols, using perfect channel knowledge and the exact folded noise
/// covariance.
pub fn lmmse_chain(
    bits: &[u8],
    chan: &ChannelRealization,
    sigma2: f64,
    modem: &ZpAfdmModem,
    seed: u64,
) -> Result<ChainOutput> {
    let cfg = modem.config();
    let y_d = receive_reconstructed(bits, chan, sigma2, modem, seed)?;
    let h = build_h_aff_recon(chan, cfg);
    let x_hat = lmmse_affine_weighted(&y_d, &h, &folded_noise(sigma2, cfg))?;
    let mut out = Vec::with_capacity(bits.len());
    demap_into(&x_hat, &mut out);
    Ok(ChainOutput { bits: out, flagged: false })
}
