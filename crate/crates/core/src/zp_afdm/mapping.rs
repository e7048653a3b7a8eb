//! Gray-mapped QPSK.
//!
//! Bit pair (b0, b1) maps to ((1 - 2 b0) + j (1 - 2 b1)) / √2, so 00 is the
//! first-quadrant point. Hard decisions use the sign of each component and a
//! component exactly on a decision boundary decides 0.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::params::Constellation;

pub fn map_bits(bits: &[u8], constellation: Constellation) -> Result<Vec<Complex64>> {
    let bps = constellation.bits_per_symbol();
    if bits.len() % bps != 0 {
        return Err(Error::Argument(format!(
            "{} bits is not a multiple of {bps} bits per symbol",
            bits.len()
        )));
    }
    if let Some(b) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::Argument(format!("bit value {b} is not 0 or 1")));
    }
    let level = |b: u8| if b == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    Ok(bits
        .chunks_exact(2)
        .map(|pair| Complex64::new(level(pair[0]), level(pair[1])))
        .collect())
}

pub fn demap(symbols: &[Complex64], constellation: Constellation) -> Vec<u8> {
    let mut bits = Vec::with_capacity(symbols.len() * constellation.bits_per_symbol());
    demap_into(symbols, &mut bits);
    bits
}

pub(crate) fn demap_into(symbols: &[Complex64], bits: &mut Vec<u8>) {
    for s in symbols {
        bits.push(u8::from(s.re < 0.0));
        bits.push(u8::from(s.im < 0.0));
    }
}
