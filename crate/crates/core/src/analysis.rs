//! Effective channel matrices in every domain of the receiver, the
//! boundary phase terms of the affine IOR, and brute-force oracles built
//! from explicit time-domain linear maps.
//!
//! All matrices are dense and meant for desk-scale N.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::{ChannelRealization, PathSpec};
use crate::error::{check_len, Error, Result};
use crate::params::AfdmConfig;
use crate::transforms::{kappa, unit_phase};
use crate::zp_afdm::{affine_paths, affine_rotation, foa_offset};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    /// N×N affine-domain matrix.
    Aff,
    /// N×N_d affine-domain matrix acting on data symbols only.
    AffZp,
    /// N_d×N_d matrix after cyclic superposition.
    AffRecon,
    /// N_d×N_d matrix in the FoA domain.
    Foa,
    /// N×N frequency-domain matrix with a plain cyclic prefix.
    Freq,
    /// N×N time-domain matrix with the chirp-periodic prefix.
    Time,
}

impl MatrixKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "aff" => MatrixKind::Aff,
            "zp" => MatrixKind::AffZp,
            "recon" => MatrixKind::AffRecon,
            "foa" => MatrixKind::Foa,
            "freq" => MatrixKind::Freq,
            "time" => MatrixKind::Time,
            other => return Err(Error::Parse(format!("unknown matrix kind `{other}`"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            MatrixKind::Aff => "aff",
            MatrixKind::AffZp => "zp",
            MatrixKind::AffRecon => "recon",
            MatrixKind::Foa => "foa",
            MatrixKind::Freq => "freq",
            MatrixKind::Time => "time",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveMatrix {
    pub kind: MatrixKind,
    pub entries: DMatrix<Complex64>,
}

impl EffectiveMatrix {
    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.ncols(), x.len())?;
        let v = &self.entries * nalgebra::DVector::from_column_slice(x);
        Ok(v.iter().copied().collect())
    }

    pub fn max_abs_diff(&self, other: &EffectiveMatrix) -> f64 {
        assert_eq!(self.entries.shape(), other.entries.shape());
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Sparse `row,col,re,im` dump of entries with magnitude above 1e-15.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "row,col,re,im")?;
        for r in 0..self.nrows() {
            for c in 0..self.ncols() {
                let v = self.entries[(r, c)];
                if v.norm() > 1e-15 {
                    writeln!(out, "{r},{c},{:.17e},{:.17e}", v.re, v.im)?;
                }
            }
        }
        Ok(())
    }
}

/// 2 c1 N as an integer; every on-grid construction here assumes it is one.
fn grid_shift(cfg: &AfdmConfig) -> i64 {
    (2.0 * cfg.c1 * cfg.n as f64).round() as i64
}

/// D_i[m] for arbitrary (c1, c2), applied on the rows where the cyclic
/// index of the IOR wraps around.
pub fn additional_phase_general(path: &PathSpec, m: usize, cfg: &AfdmConfig) -> Complex64 {
    let n = cfg.n as f64;
    let q = grid_shift(cfg);
    let (k, l, m) = (path.doppler, path.delay as i64, m as i64);
    let shift = k - q * l;
    let idx = (m - k + q * l) as f64;
    if shift < 0 && m >= cfg.n as i64 + shift {
        unit_phase(cfg.c2 * n * (n - 2.0 * idx))
    } else if shift > 0 && m < shift {
        unit_phase(cfg.c2 * n * (n + 2.0 * idx))
    } else {
        Complex64::new(1.0, 0.0)
    }
}

/// D'_i[m], the boundary phase once 4 c1 c2 N² = 1.
pub fn additional_phase_simplified(path: &PathSpec, m: usize, cfg: &AfdmConfig) -> Result<Complex64> {
    check_simplified(cfg)?;
    Ok(simplified_phase(path, m as i64, cfg))
}

fn check_simplified(cfg: &AfdmConfig) -> Result<()> {
    let n = cfg.n as f64;
    let product = 4.0 * cfg.c1 * cfg.c2 * n * n;
    if (product - 1.0).abs() > 1e-9 {
        return Err(Error::Contract(format!(
            "simplified phase needs 4 c1 c2 N^2 = 1, got {product}"
        )));
    }
    Ok(())
}

fn simplified_phase(path: &PathSpec, m: i64, cfg: &AfdmConfig) -> Complex64 {
    // 1/(4c1) ± (m-k)/(2c1N) = (N ± 2(m-k)) / (2q) turns
    let q = grid_shift(cfg);
    let n = cfg.n as i64;
    let k = path.doppler;
    let shift = k - q * path.delay as i64;
    let num = if shift < 0 && m >= n + shift {
        n - 2 * (m - k)
    } else if shift > 0 && m < shift {
        n + 2 * (m - k)
    } else {
        return Complex64::new(1.0, 0.0);
    };
    unit_phase(num.rem_euclid(2 * q) as f64 / (2 * q) as f64)
}

/// Affine-domain matrix from the general IOR, valid for any c2.
pub fn build_h_aff_general(chan: &ChannelRealization, cfg: &AfdmConfig) -> EffectiveMatrix {
    let n = cfg.n;
    let nf = n as f64;
    let q = grid_shift(cfg);
    let a = 4.0 * cfg.c1 * cfg.c2 * nf * nf - 1.0;
    let mut h = DMatrix::from_element(n, n, ZERO);
    for p in chan.paths() {
        let (k, l) = (p.doppler as f64, p.delay as f64);
        let constant = unit_phase((a * (cfg.c1 * nf * l * l - l * k) + cfg.c2 * nf * k * k) / nf);
        for m in 0..n {
            let col = (m as i64 - p.doppler + q * p.delay as i64).rem_euclid(n as i64) as usize;
            let linear = unit_phase(m as f64 / nf * (a * l - 2.0 * cfg.c2 * nf * k));
            h[(m, col)] += p.gain * additional_phase_general(p, m, cfg) * linear * constant;
        }
    }
    EffectiveMatrix {
        kind: MatrixKind::Aff,
        entries: h,
    }
}

/// Affine-domain matrix from the simplified IOR:
/// H[m, (m - k_i + 2c1N l_i) mod N] += ĥ_i exp(-j2π k_i m / (2c1N²)) D'_i[m].
pub fn build_h_aff(chan: &ChannelRealization, cfg: &AfdmConfig) -> Result<EffectiveMatrix> {
    check_simplified(cfg)?;
    let n = cfg.n;
    let q = grid_shift(cfg);
    let mut h = DMatrix::from_element(n, n, ZERO);
    for (p, ap) in chan.paths().iter().zip(affine_paths(chan, cfg)) {
        for m in 0..n {
            let col = (m as i64 - p.doppler + q * p.delay as i64).rem_euclid(n as i64) as usize;
            h[(m, col)] += ap.gain_hat
                * affine_rotation(p.doppler, m as i64, cfg)
                * simplified_phase(p, m as i64, cfg);
        }
    }
    Ok(EffectiveMatrix {
        kind: MatrixKind::Aff,
        entries: h,
    })
}

/// N×N_d banded matrix seen by the data symbols after zero padding.
/// Path i occupies the diagonal row - col = l̂_i.
pub fn build_h_aff_zp(chan: &ChannelRealization, cfg: &AfdmConfig) -> EffectiveMatrix {
    let mut h = DMatrix::from_element(cfg.n, cfg.n_data, ZERO);
    for p in affine_paths(chan, cfg) {
        for col in 0..cfg.n_data {
            let row = col as i64 + p.l_hat;
            h[(row as usize, col)] += p.gain_hat * affine_rotation(p.doppler, row, cfg);
        }
    }
    EffectiveMatrix {
        kind: MatrixKind::AffZp,
        entries: h,
    }
}

/// N_d×N_d matrix after folding rows m + jN_d onto row m.
pub fn build_h_aff_recon(chan: &ChannelRealization, cfg: &AfdmConfig) -> EffectiveMatrix {
    let nd = cfg.n_data as i64;
    let mut h = DMatrix::from_element(cfg.n_data, cfg.n_data, ZERO);
    for p in affine_paths(chan, cfg) {
        for m in 0..nd {
            let col = (m - p.l_hat).rem_euclid(nd);
            // row of the unfolded matrix that lands on m
            let unfolded = p.l_hat + col;
            h[(m as usize, col as usize)] += p.gain_hat * affine_rotation(p.doppler, unfolded, cfg);
        }
    }
    EffectiveMatrix {
        kind: MatrixKind::AffRecon,
        entries: h,
    }
}

/// FoA-domain matrix in closed form:
/// H[k, k'] = Σ_i ĥ_i exp(-j2π k' l̂_i / N_d) κ_{N_d, l̂_i}(k' - k - k_i N_d / (2c1N²)).
pub fn build_h_foa(chan: &ChannelRealization, cfg: &AfdmConfig) -> EffectiveMatrix {
    let n_d = cfg.n_data;
    let nd = n_d as i64;
    let mut h = DMatrix::from_element(n_d, n_d, ZERO);
    for p in affine_paths(chan, cfg) {
        let offset = foa_offset(p.doppler, cfg);
        let step = p.l_hat.rem_euclid(nd);
        for kp in 0..n_d {
            let col_phase = p.gain_hat * unit_phase(-((kp as i64 * step).rem_euclid(nd) as f64) / nd as f64);
            for k in 0..n_d {
                h[(k, kp)] += col_phase * kappa(n_d, p.l_hat, kp as f64 - k as f64 - offset);
            }
        }
    }
    EffectiveMatrix {
        kind: MatrixKind::Foa,
        entries: h,
    }
}

/// Frequency-domain matrix of the plain cyclic-prefix system:
/// H[f, (f - k_i) mod N] += h_i exp(-j2π (f - k_i) l_i / N).
pub fn build_h_freq(chan: &ChannelRealization, cfg: &AfdmConfig) -> EffectiveMatrix {
    let n = cfg.n as i64;
    let mut h = DMatrix::from_element(cfg.n, cfg.n, ZERO);
    for p in chan.paths() {
        for f in 0..n {
            let col = (f - p.doppler).rem_euclid(n);
            let turns = (col * p.delay as i64).rem_euclid(n) as f64 / n as f64;
            h[(f as usize, col as usize)] += p.gain * unit_phase(-turns);
        }
    }
    EffectiveMatrix {
        kind: MatrixKind::Freq,
        entries: h,
    }
}

/// Dispatch by kind, using the closed-form builders.
pub fn build(kind: MatrixKind, chan: &ChannelRealization, cfg: &AfdmConfig) -> Result<EffectiveMatrix> {
    match kind {
        MatrixKind::Aff => build_h_aff(chan, cfg),
        MatrixKind::AffZp => Ok(build_h_aff_zp(chan, cfg)),
        MatrixKind::AffRecon => Ok(build_h_aff_recon(chan, cfg)),
        MatrixKind::Foa => Ok(build_h_foa(chan, cfg)),
        MatrixKind::Freq => Ok(build_h_freq(chan, cfg)),
        MatrixKind::Time => Ok(build_h_time(chan, cfg, true)),
    }
}

/// Received affine vector y = H_aff x evaluated directly from the IOR. With
/// `apply_boundary_phase = false` every D'_i[m] is replaced by 1.
pub fn affine_ior(
    x: &[Complex64],
    chan: &ChannelRealization,
    cfg: &AfdmConfig,
    apply_boundary_phase: bool,
) -> Result<Vec<Complex64>> {
    check_len(cfg.n, x.len())?;
    check_simplified(cfg)?;
    let n = cfg.n as i64;
    let q = grid_shift(cfg);
    let mut y = vec![ZERO; cfg.n];
    for (p, ap) in chan.paths().iter().zip(affine_paths(chan, cfg)) {
        for m in 0..n {
            let src = (m - p.doppler + q * p.delay as i64).rem_euclid(n) as usize;
            let mut v = ap.gain_hat * affine_rotation(p.doppler, m, cfg) * x[src];
            if apply_boundary_phase {
                v *= simplified_phase(p, m, cfg);
            }
            y[m as usize] += v;
        }
    }
    Ok(y)
}

// ---------------------------------------------------------------------------
// Oracles. These share no code with the builders above beyond the channel
// description itself.

/// Unitary DAFT matrix, A[m, n] = exp(-j2π(c1 n² + c2 m² + m n / N)) / √N.
pub fn daft_matrix(cfg: &AfdmConfig) -> DMatrix<Complex64> {
    let n = cfg.n;
    let nf = n as f64;
    DMatrix::from_fn(n, n, |m, t| {
        let (mf, tf) = (m as f64, t as f64);
        let phase = -2.0 * std::f64::consts::PI * (cfg.c1 * tf * tf + cfg.c2 * mf * mf + mf * tf / nf);
        Complex64::from_polar(1.0 / nf.sqrt(), phase)
    })
}

/// Unitary DFT matrix of size n.
pub fn dft_matrix(n: usize) -> DMatrix<Complex64> {
    let nf = n as f64;
    DMatrix::from_fn(n, n, |k, t| {
        Complex64::from_polar(1.0 / nf.sqrt(), -2.0 * std::f64::consts::PI * (k * t) as f64 / nf)
    })
}

/// Time-domain N×N matrix r = H s through prefix insertion, the channel on
/// the (N + L_c)-sample stream, and prefix removal, each an explicit matrix.
/// `chirp_prefix = false` uses a plain cyclic prefix.
pub fn build_h_time(chan: &ChannelRealization, cfg: &AfdmConfig, chirp_prefix: bool) -> EffectiveMatrix {
    let n = cfg.n;
    let lc = cfg.cpp_len;
    let nf = n as f64;
    let total = n + lc;
    let two_pi = 2.0 * std::f64::consts::PI;

    let insert = DMatrix::from_fn(total, n, |row, col| {
        let t = row as i64 - lc as i64;
        if t >= 0 {
            if t as usize == col {
                Complex64::new(1.0, 0.0)
            } else {
                ZERO
            }
        } else if (t + n as i64) as usize == col {
            if chirp_prefix {
                let tf = t as f64;
                Complex64::from_polar(1.0, -two_pi * cfg.c1 * (nf * nf + 2.0 * nf * tf))
            } else {
                Complex64::new(1.0, 0.0)
            }
        } else {
            ZERO
        }
    });

    let mut stream = DMatrix::from_element(total, total, ZERO);
    for p in chan.paths() {
        for row in p.delay..total {
            let t = row as f64 - lc as f64;
            stream[(row, row - p.delay)] += p.gain * Complex64::from_polar(1.0, two_pi * p.doppler as f64 * t / nf);
        }
    }

    let remove = DMatrix::from_fn(n, total, |row, col| {
        if col == row + lc {
            Complex64::new(1.0, 0.0)
        } else {
            ZERO
        }
    });

    EffectiveMatrix {
        kind: MatrixKind::Time,
        entries: remove * stream * insert,
    }
}

/// Brute-force counterpart of each closed-form builder.
pub fn brute_force(kind: MatrixKind, chan: &ChannelRealization, cfg: &AfdmConfig) -> EffectiveMatrix {
    let aff = || {
        let a = daft_matrix(cfg);
        &a * build_h_time(chan, cfg, true).entries * a.adjoint()
    };
    let zp = || aff().columns(cfg.lead_zeros, cfg.n_data).into_owned();
    let recon = || {
        let z = zp();
        let mut r = z.rows(0, cfg.n_data).into_owned();
        let mut start = cfg.n_data;
        while start < cfg.n {
            let len = cfg.n_data.min(cfg.n - start);
            let block = z.rows(start, len).into_owned();
            let mut top = r.rows_mut(0, len);
            top += block;
            start += cfg.n_data;
        }
        r
    };
    let entries = match kind {
        MatrixKind::Aff => aff(),
        MatrixKind::AffZp => zp(),
        MatrixKind::AffRecon => recon(),
        MatrixKind::Foa => {
            let f = dft_matrix(cfg.n_data);
            &f * recon() * f.adjoint()
        }
        MatrixKind::Freq => {
            let f = dft_matrix(cfg.n);
            &f * build_h_time(chan, cfg, false).entries * f.adjoint()
        }
        MatrixKind::Time => build_h_time(chan, cfg, true).entries,
    };
    EffectiveMatrix { kind, entries }
}

/// F·H·Fᴴ of a reconstructed matrix, numerically.
pub fn foa_from_recon(recon: &EffectiveMatrix) -> EffectiveMatrix {
    let f = dft_matrix(recon.nrows());
    EffectiveMatrix {
        kind: MatrixKind::Foa,
        entries: &f * &recon.entries * f.adjoint(),
    }
}

// ---------------------------------------------------------------------------
// Structure summaries.

/// Mean |entry|² along one diagonal, `offset = row - col`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandEntry {
    pub offset: i64,
    pub mean_energy: f64,
}

/// Per-diagonal mean energy for every diagonal of the matrix.
pub fn band_profile(m: &EffectiveMatrix) -> Vec<BandEntry> {
    let (rows, cols) = (m.nrows() as i64, m.ncols() as i64);
    (-(cols - 1)..rows)
        .map(|offset| {
            let cells: Vec<f64> = (0..cols)
                .filter_map(|c| {
                    let r = c + offset;
                    (0..rows).contains(&r).then(|| m.entries[(r as usize, c as usize)].norm_sqr())
                })
                .collect();
            BandEntry {
                offset,
                mean_energy: cells.iter().sum::<f64>() / cells.len() as f64,
            }
        })
        .collect()
}

/// Mean over rows of |H[k,k]|² / Σ_k' |H[k,k']|² (square matrices).
pub fn diagonal_energy_fraction(m: &EffectiveMatrix) -> f64 {
    let n = m.nrows();
    let mut acc = 0.0;
    for k in 0..n {
        let row: f64 = m.entries.row(k).iter().map(|v| v.norm_sqr()).sum();
        if row > 0.0 {
            acc += m.entries[(k, k)].norm_sqr() / row;
        }
    }
    acc / n as f64
}

/// Share of total energy within cyclic distance `width` of the diagonal.
pub fn band_energy_fraction(m: &EffectiveMatrix, width: usize) -> f64 {
    let n = m.nrows();
    let (mut inside, mut total) = (0.0, 0.0);
    for r in 0..n {
        for c in 0..m.ncols() {
            let e = m.entries[(r, c)].norm_sqr();
            let d = r.abs_diff(c);
            if d.min(n - d) <= width {
                inside += e;
            }
            total += e;
        }
    }
    inside / total
}

/// Mean over rows of the off-diagonal energy Σ_{k'≠k} |H[k,k']|².
pub fn mean_off_diagonal_energy(m: &EffectiveMatrix) -> f64 {
    let n = m.nrows();
    let total: f64 = (0..n)
        .map(|k| {
            (0..m.ncols())
                .filter(|&c| c != k)
                .map(|c| m.entries[(k, c)].norm_sqr())
                .sum::<f64>()
        })
        .sum();
    total / n as f64
}
