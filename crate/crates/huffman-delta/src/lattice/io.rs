//! Plain-text tensors and binary PGM images.
//!
//! Text layout: the first line holds the extents, then one line per row of the
//! last axis. Integers are written verbatim; reals always carry a decimal point
//! or exponent so the mode survives a round trip.

use std::fs;
use std::path::Path;

use super::tensor::{Elements, Tensor};
use crate::error::{Error, Result};

pub fn to_text(t: &Tensor) -> String {
    let mut out = t.shape().iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    out.push('\n');
    let row = *t.shape().last().unwrap_or(&1);
    let cells: Vec<String> = match t.elements() {
        Elements::Int(v) => v.iter().map(i128::to_string).collect(),
        Elements::Real(v) => v.iter().map(|x| format!("{x:?}")).collect(),
    };
    for chunk in cells.chunks(row) {
        out.push_str(&chunk.join(" "));
        out.push('\n');
    }
    out
}

pub fn from_text(text: &str) -> Result<Tensor> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("missing extents line".into()))?;
    let shape: Vec<usize> = header
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad extent {s:?}"))))
        .collect::<Result<_>>()?;
    let tokens: Vec<&str> = lines.flat_map(str::split_whitespace).collect();
    let is_real = tokens.iter().any(|s| s.contains(['.', 'e', 'E', 'n', 'N', 'i']));
    if is_real {
        let values = tokens
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| Error::Parse(format!("bad real {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Tensor::from_reals(&shape, values)
    } else {
        let values = tokens
            .iter()
            .map(|s| {
                s.parse::<i128>()
                    .map_err(|_| Error::Parse(format!("bad integer {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Tensor::from_i128(&shape, values)
    }
}

pub fn read_text(path: &Path) -> Result<Tensor> {
    from_text(&fs::read_to_string(path)?)
}

pub fn write_text(path: &Path, t: &Tensor) -> Result<()> {
    fs::write(path, to_text(t))?;
    Ok(())
}

/// How tensor values map onto PGM grey levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgmMapping {
    /// Integer values already in `0..=maxval`, written as is.
    Direct,
    /// Linear stretch of `min..max` onto `0..=maxval`.
    Stretch,
}

/// Encode a 2D tensor as binary PGM; `maxval` above 255 selects 16-bit samples.
pub fn to_pgm(t: &Tensor, maxval: u16, mapping: PgmMapping) -> Result<Vec<u8>> {
    if t.ndim() != 2 {
        return Err(Error::DimensionMismatch(2, t.ndim()));
    }
    if maxval == 0 {
        return Err(Error::InvalidSpec("PGM maxval must be positive".into()));
    }
    let levels: Vec<u16> = match mapping {
        PgmMapping::Direct => t
            .ints()?
            .iter()
            .map(|&v| {
                u16::try_from(v)
                    .ok()
                    .filter(|&g| g <= maxval)
                    .ok_or_else(|| Error::Constraint(format!("value {v} outside 0..={maxval}")))
            })
            .collect::<Result<_>>()?,
        PgmMapping::Stretch => {
            let (lo, hi) = t.min_max();
            let span = if hi > lo { hi - lo } else { 1.0 };
            t.to_f64_vec()
                .iter()
                .map(|x| ((x - lo) / span * maxval as f64).round() as u16)
                .collect()
        }
    };
    let mut out = format!("P5\n{} {}\n{}\n", t.shape()[1], t.shape()[0], maxval).into_bytes();
    for g in levels {
        if maxval < 256 {
            out.push(g as u8);
        } else {
            out.extend_from_slice(&g.to_be_bytes());
        }
    }
    Ok(out)
}

/// Decode a binary (P5) PGM into an integer tensor of shape `[height, width]`.
pub fn from_pgm(bytes: &[u8]) -> Result<Tensor> {
    let mut pos = 0;
    let mut fields = Vec::new();
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Parse("truncated PGM header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if fields[0] != "P5" {
        return Err(Error::Parse(format!("unsupported PGM magic {:?}", fields[0])));
    }
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad PGM field {s:?}")))
    };
    let (w, h, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    pos += 1;
    let wide = maxval > 255;
    let need = w * h * if wide { 2 } else { 1 };
    let data = bytes
        .get(pos..pos + need)
        .ok_or_else(|| Error::Parse("truncated PGM raster".into()))?;
    let values: Vec<i128> = if wide {
        data.chunks(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as i128)
            .collect()
    } else {
        data.iter().map(|&b| b as i128).collect()
    };
    Tensor::from_i128(&[h, w], values)
}

pub fn read_pgm(path: &Path) -> Result<Tensor> {
    from_pgm(&fs::read(path)?)
}

pub fn write_pgm(path: &Path, t: &Tensor, maxval: u16, mapping: PgmMapping) -> Result<()> {
    fs::write(path, to_pgm(t, maxval, mapping)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip_keeps_mode() {
        let i = Tensor::ints_2d(&[vec![1, -2, 3], vec![4, 5, -6]]).unwrap();
        assert_eq!(from_text(&to_text(&i)).unwrap(), i);
        let r = Tensor::from_reals(&[2, 2], vec![0.1, -2.0, 1e-300, 3.25]).unwrap();
        let back = from_text(&to_text(&r)).unwrap();
        assert_eq!(back, r);
        assert!(!back.is_integer());
    }

    #[test]
    fn text_layout() {
        let t = Tensor::ints_2d(&[vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(to_text(&t), "2 2\n1 2\n3 4\n");
        assert!(from_text("2 2\n1 2 3\n").is_err());
    }

    #[test]
    fn pgm_round_trip_8_and_16_bit() {
        let t = Tensor::ints_2d(&[vec![0, 7, 255], vec![3, 4, 5]]).unwrap();
        assert_eq!(from_pgm(&to_pgm(&t, 255, PgmMapping::Direct).unwrap()).unwrap(), t);
        let w = Tensor::ints_2d(&[vec![0, 700], vec![65535, 1]]).unwrap();
        assert_eq!(from_pgm(&to_pgm(&w, 65535, PgmMapping::Direct).unwrap()).unwrap(), w);
        assert!(to_pgm(&w, 255, PgmMapping::Direct).is_err());
    }

    #[test]
    fn pgm_stretch_spans_range() {
        let r = Tensor::from_reals(&[1, 3], vec![-1.0, 0.0, 1.0]).unwrap();
        let back = from_pgm(&to_pgm(&r, 255, PgmMapping::Stretch).unwrap()).unwrap();
        assert_eq!(back.ints().unwrap(), &[0, 128, 255]);
    }
}
