//! Flat binary and CSV dumps of stored ensembles.
//!
//! Binary layout, all little-endian:
//!
//! | offset | size | field |
//! |---|---|---|
//! | 0 | 4 | magic `SQZE` |
//! | 4 | 4 | format version, u32 = 1 |
//! | 8 | 1 | stage: 0 vacuum, 1 squeezed |
//! | 9 | 1 | gated: 0 or 1 |
//! | 10 | 6 | reserved, zero |
//! | 16 | 8 | realizations `R`, u64 |
//! | 24 | 8 | lattice points `M`, u64 |
//! | 32 | 8 | `ω₀`, f64 |
//! | 40 | 8 | half width, f64 |
//! | 48 | 8 | gate duration `T`, f64 (0 when ungated) |
//! | 56 | 8 | `P_SF`, f64 |
//! | 64 | 8 | master seed, u64 |
//! | 72 | `16·R·M` | realization-major `(re, im)` f64 pairs |

use ndarray::Array2;
use num_complex::Complex64;
use std::io::Write;

use crate::error::{Error, Result};
use crate::lattice::FrequencyLattice;
use crate::sf_engine::ensemble::{FieldEnsemble, NoiseSpec, Stage};

pub const MAGIC: &[u8; 4] = b"SQZE";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 72;

pub fn encode(ensemble: &FieldEnsemble) -> Vec<u8> {
    let (r, m) = ensemble.data.dim();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * r * m);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(match ensemble.stage {
        Stage::Vacuum => 0,
        Stage::Squeezed => 1,
    });
    out.push(ensemble.gate_duration.is_some() as u8);
    out.extend_from_slice(&[0u8; 6]);
    out.extend_from_slice(&(r as u64).to_le_bytes());
    out.extend_from_slice(&(m as u64).to_le_bytes());
    out.extend_from_slice(&ensemble.lattice.omega0().to_le_bytes());
    out.extend_from_slice(&ensemble.lattice.half_width().to_le_bytes());
    out.extend_from_slice(&ensemble.gate_duration.unwrap_or(0.0).to_le_bytes());
    out.extend_from_slice(&ensemble.noise.p_sf.to_le_bytes());
    out.extend_from_slice(&ensemble.noise.seed.to_le_bytes());
    for v in ensemble.data.iter() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

fn decode_err(msg: impl Into<String>) -> Error {
    Error::Decode(msg.into())
}

fn u64_at(bytes: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8-byte slice"))
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8-byte slice"))
}

pub fn decode(bytes: &[u8]) -> Result<FieldEnsemble> {
    if bytes.len() < HEADER_LEN {
        return Err(decode_err(format!(
            "truncated header: {} of {HEADER_LEN} bytes",
            bytes.len()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(decode_err("bad magic"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4-byte slice"));
    if version != FORMAT_VERSION {
        return Err(decode_err(format!("unsupported format version {version}")));
    }
    let stage = match bytes[8] {
        0 => Stage::Vacuum,
        1 => Stage::Squeezed,
        s => return Err(decode_err(format!("unknown stage byte {s}"))),
    };
    let gated = match bytes[9] {
        0 => false,
        1 => true,
        g => return Err(decode_err(format!("invalid gated flag {g}"))),
    };
    if bytes[10..16].iter().any(|&b| b != 0) {
        return Err(decode_err("reserved header bytes are not zero"));
    }
    let r = usize::try_from(u64_at(bytes, 16)).map_err(|_| decode_err("realization count overflows"))?;
    let m = usize::try_from(u64_at(bytes, 24)).map_err(|_| decode_err("lattice size overflows"))?;
    let lattice = FrequencyLattice::new(f64_at(bytes, 32), f64_at(bytes, 40), m)
        .map_err(|e| decode_err(format!("invalid lattice: {e}")))?;
    let duration = f64_at(bytes, 48);
    let gate_duration = match gated {
        true if duration > 0.0 && duration.is_finite() => Some(duration),
        false if duration == 0.0 => None,
        _ => return Err(decode_err(format!("gate duration {duration} inconsistent with gated flag"))),
    };
    let noise = NoiseSpec::new(f64_at(bytes, 56), u64_at(bytes, 64), r);
    noise
        .validate()
        .map_err(|e| decode_err(format!("invalid noise header: {e}")))?;
    let payload = r
        .checked_mul(m)
        .and_then(|n| n.checked_mul(16))
        .ok_or_else(|| decode_err("payload size overflows"))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != payload {
        return Err(decode_err(format!(
            "payload is {} bytes, header implies {payload}",
            body.len()
        )));
    }
    let values: Vec<Complex64> = body
        .chunks_exact(16)
        .map(|c| Complex64::new(f64_at(c, 0), f64_at(c, 8)))
        .collect();
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(decode_err("non-finite sample"));
    }
    Ok(FieldEnsemble {
        lattice,
        stage,
        gate_duration,
        noise,
        gain_tag: None,
        data: Array2::from_shape_vec((r, m), values).expect("length checked above"),
    })
}

/// One row per sample: `realization,index,omega,re,im`.
pub fn write_csv<W: Write>(ensemble: &FieldEnsemble, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["realization", "index", "omega", "re", "im"])?;
    for ((r, k), v) in ensemble.data.indexed_iter() {
        w.write_record([
            r.to_string(),
            k.to_string(),
            format!("{:.16e}", ensemble.lattice.omega(k)),
            format!("{:.16e}", v.re),
            format!("{:.16e}", v.im),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::GateKernel;
    use crate::sf_engine::ensemble::{gate_ensemble, sample_vacuum};

    fn ensemble() -> FieldEnsemble {
        let lat = FrequencyLattice::new(10.0, 2.0, 9).unwrap();
        let vac = sample_vacuum(&lat, &NoiseSpec::new(0.5, 4, 3)).unwrap();
        gate_ensemble(&vac, &GateKernel::new(7.0, lat).unwrap()).unwrap()
    }

    #[test]
    fn round_trip() {
        let e = ensemble();
        let back = decode(&encode(&e)).unwrap();
        assert_eq!(back.data, e.data);
        assert_eq!(back.lattice, e.lattice);
        assert_eq!(back.gate_duration, Some(7.0));
        assert_eq!(back.noise, e.noise);
    }

    #[test]
    fn corrupt_inputs_are_errors() {
        let bytes = encode(&ensemble());
        assert!(decode(&bytes[..10]).is_err());
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut bad = bytes.clone();
        bad[24] = 8; // even lattice size
        assert!(decode(&bad).is_err());
        let mut bad = bytes;
        bad[16..24].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(decode(&bad).is_err());
    }

    #[test]
    fn csv_has_one_row_per_sample() {
        let e = ensemble();
        let mut buf = Vec::new();
        write_csv(&e, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 3 * 9);
        assert!(text.starts_with("realization,index,omega,re,im\n"));
    }
}
