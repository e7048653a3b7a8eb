use std::io::Write;

use super::{BerRecord, SweepSpec};
use crate::error::{Error, Result};
use crate::params::{efficiency, AfdmConfig};

pub const BER_CSV_COLUMNS: &str = "scheme,chi,ebn0_db,bits,errors,ber,frames,wall_seconds,seed,flags";

/// BER records as CSV. `#` lines before the header document the Eb/N0
/// convention and the stopping rule.
pub fn write_ber_csv<W: Write>(mut out: W, records: &[BerRecord], spec: &SweepSpec) -> Result<()> {
    writeln!(
        out,
        "# Eb/N0: Es = 1 per data symbol; Eb = (transmitted samples per frame) / (data symbols * bits per symbol); noise variance per sample = Eb / (Eb/N0)"
    )?;
    writeln!(
        out,
        "# stop rule: errors >= {} and bits >= {}, or frames = {}; master_seed = {}",
        spec.min_errors, spec.min_bits, spec.max_frames, spec.master_seed
    )?;
    writeln!(out, "{BER_CSV_COLUMNS}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{:.6e},{},{:.3},{},{}",
            r.scheme.name(),
            r.chi,
            r.ebn0_db,
            r.bits,
            r.errors,
            r.ber,
            r.frames,
            r.wall_seconds,
            r.seed,
            r.flags()
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyRow {
    pub chi: u32,
    pub zero_pad: usize,
    pub n_data: usize,
    pub efficiency: f64,
}

/// Zero padding, data symbols and efficiency for each χ. `make_cfg` builds
/// the frame configuration for a given χ.
pub fn efficiency_report<F>(chis: &[u32], make_cfg: F) -> Result<Vec<EfficiencyRow>>
where
    F: Fn(u32) -> Result<AfdmConfig>,
{
    chis.iter()
        .map(|&chi| {
            let cfg = make_cfg(chi)?;
            Ok(EfficiencyRow {
                chi,
                zero_pad: cfg.zero_pad,
                n_data: cfg.n_data,
                efficiency: efficiency(&cfg),
            })
        })
        .collect()
}

pub fn write_efficiency_csv<W: Write>(mut out: W, rows: &[EfficiencyRow]) -> Result<()> {
    writeln!(out, "chi,L_z,N_d,efficiency")?;
    for r in rows {
        writeln!(out, "{},{},{},{:.6}", r.chi, r.zero_pad, r.n_data, r.efficiency)?;
    }
    Ok(())
}

/// `start:step:stop` (inclusive), a comma list, or a single value.
/// `inf` means no noise.
pub fn parse_ebn0_list(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| -> Result<f64> {
        let t = t.trim();
        if t.eq_ignore_ascii_case("inf") {
            return Ok(f64::INFINITY);
        }
        t.parse::<f64>()
            .ok()
            .filter(|v| !v.is_nan())
            .ok_or_else(|| Error::Parse(format!("bad Eb/N0 value `{t}`")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (a, d, b) = (num(start)?, num(step)?, num(stop)?);
            if !(d > 0.0) || !a.is_finite() || !b.is_finite() || b < a {
                return Err(Error::Parse(format!("bad Eb/N0 range `{s}`")));
            }
            let count = ((b - a) / d + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| a + i as f64 * d).collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(Error::Parse(format!("bad Eb/N0 range `{s}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Scheme;
    use crate::params::{build_config, Constellation};

    #[test]
    fn ebn0_ranges() {
        let v = parse_ebn0_list("0:2.5:30").unwrap();
        assert_eq!(v.len(), 13);
        assert_eq!(v[12], 30.0);
        assert_eq!(parse_ebn0_list("4,6,8").unwrap(), vec![4.0, 6.0, 8.0]);
        assert_eq!(parse_ebn0_list("inf").unwrap(), vec![f64::INFINITY]);
        assert!(parse_ebn0_list("3:0:4").is_err());
        assert!(parse_ebn0_list("5:1:4").is_err());
        assert!(parse_ebn0_list("a,b").is_err());
        assert!(parse_ebn0_list("1:2").is_err());
    }

    #[test]
    fn ber_csv_layout() {
        let rec = BerRecord {
            scheme: Scheme::Ofdm,
            chi: 9,
            ebn0_db: 12.5,
            bits: 1000,
            errors: 3,
            ber: 3e-3,
            frames: 4,
            wall_seconds: 0.25,
            seed: 42,
            flagged_frames: 1,
            ci95: 1e-3,
        };
        let mut buf = Vec::new();
        write_ber_csv(&mut buf, &[rec], &SweepSpec::default()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines[0], BER_CSV_COLUMNS);
        assert_eq!(lines[1], "ofdm,9,12.5,1000,3,3.000000e-3,4,0.250,42,low_confidence;zero_tap");
        assert_eq!(text.lines().filter(|l| l.starts_with('#')).count(), 2);
    }

    #[test]
    fn efficiency_rows_fall_with_chi() {
        let rows = efficiency_report(&[1, 5, 9, 13, 17], |chi| build_config(chi, 4, 5, 4096, Constellation::Qpsk))
            .unwrap();
        assert_eq!(rows[2].zero_pad, 413);
        assert!(rows.windows(2).all(|w| w[1].efficiency < w[0].efficiency));
        let mut buf = Vec::new();
        write_efficiency_csv(&mut buf, &rows).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("9,413,3683,0.898"));
    }
}
