//! Discrete line-sum projections and alternating-sign twins.
//!
//! A 2D array `a[y][x]` projected along `p:q` sums every element into bin
//! `t = q*x - p*y`, offset so the first bin is 0. Projection commutes with
//! auto-correlation, so a projected Huffman array inherits a delta-like
//! correlation and a flat spectrum.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{io, outer_product, Elements, Tensor};
use crate::metrics::{classify, QualityReport};

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Coprime direction `p:q` or `p:q:r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjectionDirection {
    pub p: i64,
    pub q: i64,
    pub r: Option<i64>,
}

impl ProjectionDirection {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        Self::check(&[p, q])?;
        Ok(ProjectionDirection { p, q, r: None })
    }

    pub fn new3(p: i64, q: i64, r: i64) -> Result<Self> {
        Self::check(&[p, q, r])?;
        Ok(ProjectionDirection { p, q, r: Some(r) })
    }

    fn check(c: &[i64]) -> Result<()> {
        match c.iter().fold(0, |g, &v| gcd(g, v)) {
            0 => Err(Error::InvalidSpec("projection direction is all zero".into())),
            1 => Ok(()),
            g => Err(Error::InvalidSpec(format!("direction components share factor {g}"))),
        }
    }

    /// `|p| + |q|` (plus `|r|`), the bin-spacing multiplier.
    pub fn n(&self) -> i64 {
        self.p.abs() + self.q.abs() + self.r.map_or(0, i64::abs)
    }
}

impl fmt::Display for ProjectionDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.p, self.q)?;
        if let Some(r) = self.r {
            write!(f, ":{r}")?;
        }
        Ok(())
    }
}

impl FromStr for ProjectionDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<i64> = s
            .split(':')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| Error::InvalidSpec(format!("bad direction {s:?}")))
            })
            .collect::<Result<_>>()?;
        match parts[..] {
            [p, q] => Self::new(p, q),
            [p, q, r] => Self::new3(p, q, r),
            _ => Err(Error::InvalidSpec(format!(
                "direction needs 2 or 3 components, got {s:?}"
            ))),
        }
    }
}

/// Accumulate `a` into bins addressed by `bin(index)`; `shape` is the output shape.
fn accumulate(a: &Tensor, shape: &[usize], bin: impl Fn(&[usize]) -> usize) -> Result<Tensor> {
    let n: usize = shape.iter().product();
    match a.elements() {
        Elements::Int(v) => {
            let mut out = vec![0i128; n];
            for (k, &x) in v.iter().enumerate() {
                let slot = &mut out[bin(&a.unravel(k))];
                *slot = slot.checked_add(x).ok_or(Error::Overflow("projection"))?;
            }
            Tensor::from_i128(shape, out)
        }
        Elements::Real(v) => {
            let mut out = vec![0.0; n];
            for (k, &x) in v.iter().enumerate() {
                out[bin(&a.unravel(k))] += x;
            }
            Tensor::from_reals(shape, out)
        }
    }
}

/// Line sums of a 2D array along `p:q`; length `|q|(W-1) + |p|(H-1) + 1`.
pub fn project(a: &Tensor, dir: ProjectionDirection) -> Result<Tensor> {
    if a.ndim() != 2 {
        return Err(Error::DimensionMismatch(2, a.ndim()));
    }
    if dir.r.is_some() {
        return Err(Error::InvalidSpec("2D projection takes a p:q direction".into()));
    }
    let (h, w) = (a.shape()[0] as i64, a.shape()[1] as i64);
    let (p, q) = (dir.p, dir.q);
    let min_t = q.min(0) * (w - 1) - p.max(0) * (h - 1);
    let len = (q.abs() * (w - 1) + p.abs() * (h - 1) + 1) as usize;
    accumulate(a, &[len], |idx| {
        let (y, x) = (idx[0] as i64, idx[1] as i64);
        (q * x - p * y - min_t) as usize
    })
}

fn dot(a: [i64; 3], b: [i64; 3]) -> i64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Lattice basis `(b1, b2)` of the plane orthogonal to `v` with `b1 x b2 = v`.
///
/// Shortest total squared length wins; ties go to the lexicographically
/// greatest pair so the choice is reproducible.
pub fn plane_basis(v: [i64; 3]) -> [[i64; 3]; 2] {
    let k = v.iter().map(|c| c.abs()).max().unwrap_or(1) + 1;
    let mut perp = Vec::new();
    for x in -k..=k {
        for y in -k..=k {
            for z in -k..=k {
                let b = [x, y, z];
                if b != [0, 0, 0] && dot(b, v) == 0 {
                    perp.push(b);
                }
            }
        }
    }
    let mut best: Option<(i64, [[i64; 3]; 2])> = None;
    for &b1 in &perp {
        for &b2 in &perp {
            if cross(b1, b2) != v {
                continue;
            }
            let cost = dot(b1, b1) + dot(b2, b2);
            let better = match best {
                None => true,
                Some((c, pair)) => cost < c || (cost == c && [b1, b2] > pair),
            };
            if better {
                best = Some((cost, [b1, b2]));
            }
        }
    }
    best.expect("a coprime direction always has a plane basis").1
}

/// Line sums of a 3D array `a[z][y][x]` along `p:q:r` (components in `x, y, z`).
///
/// Output rows follow `b2 . (x, y, z)` and columns `b1 . (x, y, z)` for the
/// basis from [`plane_basis`], each offset to start at 0.
pub fn project3(a: &Tensor, dir: ProjectionDirection) -> Result<Tensor> {
    if a.ndim() != 3 {
        return Err(Error::DimensionMismatch(3, a.ndim()));
    }
    let r = dir
        .r
        .ok_or_else(|| Error::InvalidSpec("3D projection takes a p:q:r direction".into()))?;
    let [b1, b2] = plane_basis([dir.p, dir.q, r]);
    let ext = [
        a.shape()[2] as i64 - 1,
        a.shape()[1] as i64 - 1,
        a.shape()[0] as i64 - 1,
    ];
    let span = |b: [i64; 3]| {
        let lo: i64 = (0..3).map(|i| (b[i] * ext[i]).min(0)).sum();
        let hi: i64 = (0..3).map(|i| (b[i] * ext[i]).max(0)).sum();
        (lo, (hi - lo + 1) as usize)
    };
    let (col_lo, cols) = span(b1);
    let (row_lo, rows) = span(b2);
    accumulate(a, &[rows, cols], |idx| {
        let p = [idx[2] as i64, idx[1] as i64, idx[0] as i64];
        let row = (dot(b2, p) - row_lo) as usize;
        let col = (dot(b1, p) - col_lo) as usize;
        row * cols + col
    })
}

/// Alternate signs along the last axis, starting with `+`.
pub fn twin(a: &Tensor) -> Tensor {
    let n = *a.shape().last().unwrap_or(&1);
    let sign = |k: usize| (k % n) % 2 == 1;
    match a.elements() {
        Elements::Int(v) => Tensor::from_i128(
            a.shape(),
            v.iter()
                .enumerate()
                .map(|(k, &x)| if sign(k) { -x } else { x })
                .collect(),
        ),
        Elements::Real(v) => Tensor::from_reals(
            a.shape(),
            v.iter()
                .enumerate()
                .map(|(k, &x)| if sign(k) { -x } else { x })
                .collect(),
        ),
    }
    .expect("shape preserved")
}

/// One projection of a seed's outer square.
#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub direction: ProjectionDirection,
    pub array: Tensor,
    pub report: QualityReport,
}

/// Coprime `p:q` with `1 <= |p| + |q| <= max_n`, one of each `+-` pair, ordered by `n`, `p`, `q`.
pub fn default_directions(max_n: i64) -> Vec<ProjectionDirection> {
    let mut dirs = Vec::new();
    for n in 1..=max_n {
        for p in -n..=n {
            let rest = n - p.abs();
            for q in [rest, -rest] {
                let canonical = q > 0 || (q == 0 && p > 0);
                let seen = dirs.iter().any(|d: &ProjectionDirection| d.p == p && d.q == q);
                if canonical && gcd(p, q) == 1 && !seen {
                    dirs.push(ProjectionDirection { p, q, r: None });
                }
            }
        }
    }
    dirs
}

/// Project the outer square of a 1D seed along each direction and score it.
pub fn spectrally_equivalent_family(seed: &Tensor, directions: &[ProjectionDirection]) -> Result<Vec<FamilyMember>> {
    if seed.ndim() != 1 {
        return Err(Error::DimensionMismatch(1, seed.ndim()));
    }
    let square = outer_product(&[seed.clone(), seed.clone()])?;
    directions
        .par_iter()
        .map(|&direction| {
            let array = project(&square, direction)?;
            let report = classify(&array)?;
            Ok(FamilyMember {
                direction,
                array,
                report,
            })
        })
        .collect()
}

/// One tensor file per member plus `index.csv`.
pub fn write_family(dir: &Path, members: &[FamilyMember]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut index = csv::Writer::from_path(dir.join("index.csv")).map_err(csv_error)?;
    let mut header = vec!["direction", "file", "length"];
    header.extend(QualityReport::CSV_HEADER);
    index.write_record(&header).map_err(csv_error)?;
    for m in members {
        let file = format!("proj_{}_{}.txt", m.direction.p, m.direction.q);
        io::write_text(&dir.join(&file), &m.array)?;
        let mut row = vec![m.direction.to_string(), file, m.array.len().to_string()];
        row.extend(m.report.csv_row());
        index.write_record(&row).map_err(csv_error)?;
    }
    index.flush()?;
    Ok(())
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

/// `(C0^2 + 2) / (2 C0)` and `(C0^2 + 2)^2 / (2 (2 C0)^2 + 2)`: `R` and `M` of a
/// diagonal projection of a canonical seed's outer square.
pub fn diagonal_metrics(c0: f64) -> (f64, f64) {
    let peak = c0 * c0 + 2.0;
    (peak / (2.0 * c0), peak * peak / (2.0 * (2.0 * c0).powi(2) + 2.0))
}
