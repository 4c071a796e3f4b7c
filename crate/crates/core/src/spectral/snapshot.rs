//! Binary and CSV snapshots of spectral fields.
//!
//! Binary layout: a single JSON header line `{"n","L","nu","K","count"}`
//! terminated by `\n`, followed by `count` records. Each record holds the
//! `n` integer components of a stored wave vector (i32, little-endian) and
//! then `2n` f64 values, real and imaginary parts interleaved.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::params::PhysicalParams;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub n: usize,
    #[serde(rename = "L")]
    pub box_len: f64,
    pub nu: f64,
    #[serde(rename = "K")]
    pub k_max: i32,
    pub count: usize,
}

pub fn write_binary<W: Write>(u: &SpectralField, mut out: W) -> Result<()> {
    let p = u.params();
    let header = SnapshotHeader {
        n: p.dim(),
        box_len: p.box_len(),
        nu: p.nu(),
        k_max: u.k_max(),
        count: u.len(),
    };
    let line = serde_json::to_string(&header).map_err(|e| Error::Format(e.to_string()))?;
    out.write_all(line.as_bytes())?;
    out.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(u.len() * p.dim() * 20);
    for (i, mode) in u.lattice().modes().iter().enumerate() {
        for &c in mode.components() {
            buf.extend_from_slice(&c.to_le_bytes());
        }
        for z in u.coeff(i) {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_binary<R: BufRead>(mut input: R) -> Result<SpectralField> {
    let mut line = String::new();
    input.read_line(&mut line)?;
    let header: SnapshotHeader = serde_json::from_str(line.trim_end())
        .map_err(|e| Error::Format(format!("snapshot header: {e}")))?;
    let params = PhysicalParams::new(header.n, header.box_len, header.nu)?;
    let mut u = SpectralField::zeros(params, header.k_max)?;
    let n = header.n;
    let mut ibuf = [0u8; 4];
    let mut fbuf = [0u8; 8];
    let mut comps = vec![0i32; n];
    let mut value = vec![Complex64::new(0.0, 0.0); n];
    for rec in 0..header.count {
        let truncated = |e: std::io::Error| Error::Format(format!("record {rec}: {e}"));
        for c in comps.iter_mut() {
            input.read_exact(&mut ibuf).map_err(truncated)?;
            *c = i32::from_le_bytes(ibuf);
        }
        for z in value.iter_mut() {
            input.read_exact(&mut fbuf).map_err(truncated)?;
            let re = f64::from_le_bytes(fbuf);
            input.read_exact(&mut fbuf).map_err(truncated)?;
            let im = f64::from_le_bytes(fbuf);
            *z = Complex64::new(re, im);
        }
        u.set(&comps, &value)
            .map_err(|e| Error::Format(format!("record {rec}: {e}")))?;
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after the last record".into()));
    }
    Ok(u)
}

pub fn save(u: &SpectralField, path: &std::path::Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_binary(u, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: &std::path::Path) -> Result<SpectralField> {
    let file = std::fs::File::open(path)?;
    read_binary(std::io::BufReader::new(file))
}

/// Debug dump: one row per stored mode with components and `re_j, im_j` columns.
pub fn write_csv<W: Write>(u: &SpectralField, mut out: W) -> Result<()> {
    let n = u.dim();
    let axes = ["x", "y", "z"];
    let mut head: Vec<String> = (0..n).map(|j| format!("k{}", axes[j])).collect();
    for ax in axes.iter().take(n) {
        head.push(format!("re_{ax}"));
        head.push(format!("im_{ax}"));
    }
    writeln!(out, "{}", head.join(","))?;
    for (i, mode) in u.lattice().modes().iter().enumerate() {
        let mut row: Vec<String> = mode.components().iter().map(|c| c.to_string()).collect();
        for z in u.coeff(i) {
            row.push(format!("{:e}", z.re));
            row.push(format!("{:e}", z.im));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_field, AmplitudeProfile};

    #[test]
    fn binary_round_trip_is_exact() {
        for dim in [2, 3] {
            let p = PhysicalParams::new(dim, 1.7, 0.03).unwrap();
            let u = random_field(p, 4, [1.0, 4.0], 8, AmplitudeProfile::Uniform).unwrap();
            let mut bytes = Vec::new();
            write_binary(&u, &mut bytes).unwrap();
            let back = read_binary(bytes.as_slice()).unwrap();
            assert_eq!(back, u);
        }
    }

    #[test]
    fn header_is_one_json_line() {
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let u = SpectralField::zeros(p, 2).unwrap();
        let mut bytes = Vec::new();
        write_binary(&u, &mut bytes).unwrap();
        let nl = bytes.iter().position(|&b| b == b'\n').unwrap();
        let h: serde_json::Value = serde_json::from_slice(&bytes[..nl]).unwrap();
        assert_eq!(h["K"], 2);
        assert_eq!(h["count"], 12);
        assert_eq!(bytes.len() - nl - 1, 12 * (2 * 4 + 4 * 8));
    }

    #[test]
    fn truncated_input_is_rejected() {
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let u = random_field(p, 3, [1.0, 3.0], 1, AmplitudeProfile::Flat).unwrap();
        let mut bytes = Vec::new();
        write_binary(&u, &mut bytes).unwrap();
        bytes.pop();
        assert!(matches!(read_binary(bytes.as_slice()), Err(Error::Format(_))));
        assert!(read_binary(&b"not json\n"[..]).is_err());
    }

    #[test]
    fn csv_has_one_row_per_mode() {
        let p = PhysicalParams::unit(3, 1.0).unwrap();
        let u = SpectralField::zeros(p, 1).unwrap();
        let mut out = Vec::new();
        write_csv(&u, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 1 + u.len());
        assert!(text.starts_with("kx,ky,kz,re_x,im_x"));
    }
}
