//! Zero-padded AFDM transceiver with the frequency-of-affine (FoA) one-tap
//! equalizer.
//!
//! Transmit: QPSK map, affine zero padding (L2 leading, k_max trailing
//! zeros), IDAFT, chirp-periodic prefix. Receive: prefix removal, DAFT,
//! cyclic superposition of the received affine vector onto N_d symbols,
//! N_d-point DFT into the FoA domain, one MMSE tap per FoA bin, IDFT back.

pub mod mapping;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use mapping::{demap, map_bits};

use crate::channel::{add_awgn_with, apply_channel, ChannelRealization};
use crate::error::{check_len, Error, Result};
use crate::params::AfdmConfig;
use crate::transforms::{kappa, unit_phase, AffineTransform, UnitaryDft};

/// Affine-domain data symbols and their zero-padded frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFrame {
    pub data: Vec<Complex64>,
    pub padded: Vec<Complex64>,
}

/// FoA-domain symbols (received, equalized or transmitted).
#[derive(Debug, Clone, PartialEq)]
pub struct FoAFrame {
    pub values: Vec<Complex64>,
}

/// Equalizer output. `flagged` marks frames where a tap hit 0/0 and was
/// forced to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct OneTapOutput {
    pub frame: FoAFrame,
    pub flagged: bool,
}

/// A path as seen in the zero-padded affine domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinePath {
    /// h_i
    pub gain: Complex64,
    /// ĥ_i = h_i exp(jπ k_i² / (2 c1 N²))
    pub gain_hat: Complex64,
    /// l̂_i = L2 + k_i - 2c1N l_i
    pub l_hat: i64,
    pub doppler: i64,
}

pub(crate) fn affine_paths(chan: &ChannelRealization, cfg: &AfdmConfig) -> Vec<AffinePath> {
    // 2 c1 N² = q N with q = 2 c1 N an integer, so every phase below is a
    // ratio of integers and can be reduced exactly.
    let qn = (cfg.shift_per_delay() * cfg.n) as i64;
    chan.paths()
        .iter()
        .map(|p| {
            let k = p.doppler;
            let turns = (k * k).rem_euclid(2 * qn) as f64 / (2 * qn) as f64;
            AffinePath {
                gain: p.gain,
                gain_hat: p.gain * unit_phase(turns),
                l_hat: cfg.effective_delay(p.delay, k),
                doppler: k,
            }
        })
        .collect()
}

/// exp(-j2π k p / (2 c1 N²)), the slow affine-domain rotation at index p.
pub(crate) fn affine_rotation(doppler: i64, index: i64, cfg: &AfdmConfig) -> Complex64 {
    let qn = (cfg.shift_per_delay() * cfg.n) as i64;
    unit_phase(-((doppler * index).rem_euclid(qn) as f64) / qn as f64)
}

/// FoA-domain leakage offset k_i N_d / (2 c1 N²).
pub(crate) fn foa_offset(doppler: i64, cfg: &AfdmConfig) -> f64 {
    doppler as f64 * cfg.n_data as f64 / (cfg.shift_per_delay() * cfg.n) as f64
}

/// Place N_d data symbols at affine indices L2..N-k_max.
pub fn zero_pad(x_d: &[Complex64], cfg: &AfdmConfig) -> Result<AffineFrame> {
    check_len(cfg.n_data, x_d.len())?;
    let mut padded = vec![Complex64::new(0.0, 0.0); cfg.n];
    padded[cfg.lead_zeros..cfg.lead_zeros + cfg.n_data].copy_from_slice(x_d);
    Ok(AffineFrame {
        data: x_d.to_vec(),
        padded,
    })
}

/// Planned transceiver for one configuration. Cheap to share across threads.
#[derive(Debug, Clone)]
pub struct ZpAfdmModem {
    cfg: AfdmConfig,
    affine: AffineTransform,
    foa_dft: UnitaryDft,
    // exp(-j2π c1 (N² + 2Nn)) for n = -L_c..-1
    prefix_phase: Vec<Complex64>,
}

impl ZpAfdmModem {
    pub fn new(cfg: &AfdmConfig) -> Result<Self> {
        let nf = cfg.n as f64;
        let base = (cfg.c1 * nf * nf).rem_euclid(1.0);
        let prefix_phase = (-(cfg.cpp_len as i64)..0)
            .map(|n| {
                let per_sample = (cfg.c1 * 2.0 * nf * n as f64).rem_euclid(1.0);
                unit_phase(-(base + per_sample))
            })
            .collect();
        Ok(Self {
            cfg: cfg.clone(),
            affine: AffineTransform::new(cfg.chirp())?,
            foa_dft: UnitaryDft::new(cfg.n_data)?,
            prefix_phase,
        })
    }

    pub fn config(&self) -> &AfdmConfig {
        &self.cfg
    }

    /// IDAFT of the padded frame followed by the chirp-periodic prefix.
    /// Output index 0 is time n = -L_c.
    pub fn modulate(&self, frame: &AffineFrame) -> Result<Vec<Complex64>> {
        check_len(self.cfg.n, frame.padded.len())?;
        let lc = self.cfg.cpp_len;
        let n = self.cfg.n;
        let mut out = vec![Complex64::new(0.0, 0.0); lc + n];
        out[lc..].copy_from_slice(&frame.padded);
        self.affine.idaft_in_place(&mut out[lc..])?;
        for (i, ph) in self.prefix_phase.iter().enumerate() {
            // prefix position i is n = i - L_c, copied from s[n + N]
            out[i] = out[lc + n - lc + i] * ph;
        }
        Ok(out)
    }

    /// Drop the prefix and apply the DAFT.
    pub fn demodulate(&self, r_cpp: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.cfg.frame_samples(), r_cpp.len())?;
        let mut y = r_cpp[self.cfg.cpp_len..].to_vec();
        self.affine.daft_in_place(&mut y)?;
        Ok(y)
    }

    pub fn reconstruct(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        reconstruct(y, &self.cfg)
    }

    pub fn foa(&self, y_d: &[Complex64]) -> Result<FoAFrame> {
        let mut values = y_d.to_vec();
        self.foa_dft.forward_in_place(&mut values)?;
        Ok(FoAFrame { values })
    }

    pub fn recover(&self, x_hat: &FoAFrame) -> Result<Vec<Complex64>> {
        let mut out = x_hat.values.clone();
        self.foa_dft.inverse_in_place(&mut out)?;
        Ok(out)
    }

    /// Noise-plus-interference power used by the one-tap MMSE weights.
    pub fn total_disturbance(&self, chan: &ChannelRealization, sigma2: f64) -> f64 {
        reconstructed_noise_power(sigma2, &self.cfg) + interference_power(chan, &self.cfg)
    }

    /// FoA transform, one-tap MMSE and IDFT on reconstructed symbols.
    pub fn equalize(
        &self,
        y_d: &[Complex64],
        chan: &ChannelRealization,
        sigma2: f64,
    ) -> Result<(Vec<Complex64>, bool)> {
        let y_foa = self.foa(y_d)?;
        let h_diag = foa_diag(chan, &self.cfg);
        let eq = one_tap_equalize(&y_foa, &h_diag, self.total_disturbance(chan, sigma2))?;
        Ok((self.recover(&eq.frame)?, eq.flagged))
    }

    /// Full noisy frame with every intermediate vector kept.
    pub fn trace_frame(
        &self,
        bits: &[u8],
        chan: &ChannelRealization,
        sigma2: f64,
        noise_seed: u64,
    ) -> Result<FrameTrace> {
        let x_d = map_bits(bits, self.cfg.constellation)?;
        let frame = zero_pad(&x_d, &self.cfg)?;
        let s_cpp = self.modulate(&frame)?;
        let s = s_cpp[self.cfg.cpp_len..].to_vec();
        let mut r_cpp = apply_channel(&s_cpp, chan, &self.cfg)?;
        add_awgn_with(&mut r_cpp, sigma2, &mut ChaCha8Rng::seed_from_u64(noise_seed))?;
        let y = self.demodulate(&r_cpp)?;
        let y_d = self.reconstruct(&y)?;
        let y_foa = self.foa(&y_d)?;
        let h_diag = foa_diag(chan, &self.cfg);
        let eq = one_tap_equalize(&y_foa, &h_diag, self.total_disturbance(chan, sigma2))?;
        let x_hat = self.recover(&eq.frame)?;
        let bits_hat = demap(&x_hat, self.cfg.constellation);
        Ok(FrameTrace {
            x_d,
            x: frame.padded,
            s,
            s_cpp,
            r_cpp,
            y,
            y_d,
            y_foa: y_foa.values,
            x_foa_hat: eq.frame.values,
            x_d_hat: x_hat,
            bits_hat,
            flagged: eq.flagged,
        })
    }
}

/// Every intermediate vector of one frame, in processing order.
#[derive(Debug, Clone)]
pub struct FrameTrace {
    pub x_d: Vec<Complex64>,
    pub x: Vec<Complex64>,
    pub s: Vec<Complex64>,
    pub s_cpp: Vec<Complex64>,
    pub r_cpp: Vec<Complex64>,
    pub y: Vec<Complex64>,
    pub y_d: Vec<Complex64>,
    pub y_foa: Vec<Complex64>,
    pub x_foa_hat: Vec<Complex64>,
    pub x_d_hat: Vec<Complex64>,
    pub bits_hat: Vec<u8>,
    pub flagged: bool,
}

impl FrameTrace {
    /// (name, vector) pairs for the dumped stages.
    pub fn stages(&self) -> [(&'static str, &[Complex64]); 10] {
        [
            ("x_d", &self.x_d),
            ("x", &self.x),
            ("s", &self.s),
            ("s_cpp", &self.s_cpp),
            ("r_cpp", &self.r_cpp),
            ("y", &self.y),
            ("y_d", &self.y_d),
            ("Y_d", &self.y_foa),
            ("X_hat_d", &self.x_foa_hat),
            ("x_hat_d", &self.x_d_hat),
        ]
    }
}

/// Result of pushing one frame of bits through a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub bits: Vec<u8>,
    pub flagged: bool,
}

/// Bits in, hard-decided bits out, over `chan` with noise variance `sigma2`
/// per time sample.
pub fn zp_afdm_chain(
    bits: &[u8],
    chan: &ChannelRealization,
    sigma2: f64,
    modem: &ZpAfdmModem,
    seed: u64,
) -> Result<ChainOutput> {
    let y_d = receive_reconstructed(bits, chan, sigma2, modem, seed)?;
    let (x_hat, flagged) = modem.equalize(&y_d, chan, sigma2)?;
    Ok(ChainOutput {
        bits: demap(&x_hat, modem.cfg.constellation),
        flagged,
    })
}

/// Transmit, channel, noise, demodulate and reconstruct: the y_d vector
/// every affine-domain receiver starts from.
pub fn receive_reconstructed(
    bits: &[u8],
    chan: &ChannelRealization,
    sigma2: f64,
    modem: &ZpAfdmModem,
    seed: u64,
) -> Result<Vec<Complex64>> {
    let cfg = &modem.cfg;
    let x_d = map_bits(bits, cfg.constellation)?;
    let s_cpp = modem.modulate(&zero_pad(&x_d, cfg)?)?;
    let mut r_cpp = apply_channel(&s_cpp, chan, cfg)?;
    add_awgn_with(&mut r_cpp, sigma2, &mut ChaCha8Rng::seed_from_u64(seed))?;
    modem.reconstruct(&modem.demodulate(&r_cpp)?)
}

pub fn modulate(frame: &AffineFrame, cfg: &AfdmConfig) -> Result<Vec<Complex64>> {
    ZpAfdmModem::new(cfg)?.modulate(frame)
}

pub fn demodulate(r_cpp: &[Complex64], cfg: &AfdmConfig) -> Result<Vec<Complex64>> {
    ZpAfdmModem::new(cfg)?.demodulate(r_cpp)
}

/// Fold the N received affine symbols onto N_d: y_d[m] = Σ_j y[m + j N_d].
/// With L_z ≤ N_d this is y[m] + y[m + N_d] for m < L_z and y[m] otherwise.
pub fn reconstruct(y: &[Complex64], cfg: &AfdmConfig) -> Result<Vec<Complex64>> {
    check_len(cfg.n, y.len())?;
    let mut y_d = y[..cfg.n_data].to_vec();
    for chunk in y[cfg.n_data..].chunks(cfg.n_data) {
        y_d.iter_mut().zip(chunk).for_each(|(a, b)| *a += b);
    }
    Ok(y_d)
}

/// Unitary N_d-point DFT into the FoA domain.
pub fn foa(y_d: &[Complex64]) -> Result<FoAFrame> {
    Ok(FoAFrame {
        values: crate::transforms::dft(y_d)?,
    })
}

/// Unitary N_d-point IDFT back to the affine domain.
pub fn recover(x_hat: &FoAFrame) -> Result<Vec<Complex64>> {
    crate::transforms::idft(&x_hat.values)
}

/// Diagonal of the FoA channel matrix from perfect CSI:
/// Σ_i ĥ_i exp(-j2π k l̂_i / N_d) κ_{N_d, l̂_i}(-k_i N_d / (2 c1 N²)).
pub fn foa_diag(chan: &ChannelRealization, cfg: &AfdmConfig) -> Vec<Complex64> {
    let nd = cfg.n_data as i64;
    let mut diag = vec![Complex64::new(0.0, 0.0); cfg.n_data];
    for p in affine_paths(chan, cfg) {
        let leak = p.gain_hat * kappa(cfg.n_data, p.l_hat, -foa_offset(p.doppler, cfg));
        let step = p.l_hat.rem_euclid(nd);
        for (k, d) in diag.iter_mut().enumerate() {
            let turns = (k as i64 * step).rem_euclid(nd) as f64 / nd as f64;
            *d += leak * unit_phase(-turns);
        }
    }
    diag
}

/// Residual FoA inter-symbol interference power,
/// Σ_i |h_i|² (1 - |κ_{N_d, l̂_i}(-k_i N_d / (2 c1 N²))|²).
pub fn interference_power(chan: &ChannelRealization, cfg: &AfdmConfig) -> f64 {
    affine_paths(chan, cfg)
        .iter()
        .map(|p| {
            let k = kappa(cfg.n_data, p.l_hat, -foa_offset(p.doppler, cfg)).norm_sqr();
            p.gain.norm_sqr() * (1.0 - k).clamp(0.0, 1.0)
        })
        .sum()
}

/// Noise power per FoA bin after reconstruction, (N / N_d) σ².
pub fn reconstructed_noise_power(sigma2: f64, cfg: &AfdmConfig) -> f64 {
    cfg.n as f64 / cfg.n_data as f64 * sigma2
}

/// X̂[k] = Y[k] conj(H[k]) / (|H[k]|² + σ²_total).
pub fn one_tap_equalize(
    y: &FoAFrame,
    h_diag: &[Complex64],
    sigma2_total: f64,
) -> Result<OneTapOutput> {
    check_len(y.values.len(), h_diag.len())?;
    if !(sigma2_total >= 0.0) || !sigma2_total.is_finite() {
        return Err(Error::Argument(format!(
            "total disturbance power {sigma2_total} must be finite and >= 0"
        )));
    }
    let mut flagged = false;
    let values = y
        .values
        .iter()
        .zip(h_diag)
        .map(|(yk, hk)| {
            let denom = hk.norm_sqr() + sigma2_total;
            if denom == 0.0 {
                flagged = true;
                Complex64::new(0.0, 0.0)
            } else {
                yk * hk.conj() / denom
            }
        })
        .collect();
    Ok(OneTapOutput {
        frame: FoAFrame { values },
        flagged,
    })
}

/// Uniform random bits.
pub fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<u8> {
    (0..len).map(|_| u8::from(rng.random::<bool>())).collect()
}
