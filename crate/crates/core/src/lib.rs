//! Zero-padded affine frequency division multiplexing (ZP-AFDM) over
//! doubly selective channels, with a one-tap equalizer in the
//! frequency-of-affine domain, effective channel matrices, baseline
//! receivers and a Monte Carlo BER harness.

pub mod analysis;
pub mod baselines;
pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod params;
pub mod transforms;
pub mod zp_afdm;

pub use num_complex::Complex64;

pub use error::{Error, Result};
