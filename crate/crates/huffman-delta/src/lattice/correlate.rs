use num_complex::Complex64;

use super::fft::{fft_nd, to_complex_padded};
use super::tensor::{strides_of, unravel_in, Elements, Scalar, Tensor};
use crate::error::{Error, Result};

/// Which engine evaluates a correlation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Backend {
    /// Nested shift-and-sum; exact for integers.
    Direct,
    /// Zero-padded DFT product; real output.
    Fft,
    /// Direct for integers and small operands, FFT for real operands of at least 64 per side.
    #[default]
    Auto,
}

/// Smallest per-axis extent at which `Backend::Auto` switches to the FFT.
pub const FFT_MIN_EXTENT: usize = 64;

/// Full aperiodic correlation plus the quantities read off it.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationResult {
    /// Extent `Na + Nb - 1` per axis; zero shift at `centre`.
    pub values: Tensor,
    /// Index of the zero shift, `Na - 1` per axis.
    pub centre: Vec<usize>,
    /// Value at zero shift.
    pub peak: Scalar,
    /// Largest magnitude away from zero shift.
    pub off_peak_max: Scalar,
    /// Shifts that translate the support onto itself across opposite faces of its hull.
    pub edge_shifts: Vec<Vec<isize>>,
    /// Edge value of largest magnitude; absent for unequal extents or empty support.
    pub edge: Option<Scalar>,
    /// Largest magnitude excluding zero shift and the edge shifts.
    pub op: Option<Scalar>,
}

impl CorrelationResult {
    /// Flat index of a signed shift, if it lies in the output.
    pub fn index_of(&self, shift: &[isize]) -> Option<usize> {
        let mut idx = Vec::with_capacity(shift.len());
        for ((&s, &c), &n) in shift.iter().zip(&self.centre).zip(self.values.shape()) {
            let i = c as isize + s;
            if i < 0 || i >= n as isize {
                return None;
            }
            idx.push(i as usize);
        }
        Some(self.values.ravel(&idx))
    }

    pub fn at_shift(&self, shift: &[isize]) -> Option<Scalar> {
        self.index_of(shift).map(|k| self.values.value(k))
    }

    /// Signed shift of a flat output index.
    pub fn shift_of(&self, flat: usize) -> Vec<isize> {
        self.values
            .unravel(flat)
            .iter()
            .zip(&self.centre)
            .map(|(&i, &c)| i as isize - c as isize)
            .collect()
    }

    /// Flat index of the zero shift.
    pub fn centre_index(&self) -> usize {
        self.values.ravel(&self.centre)
    }
}

fn check_pair(a: &Tensor, b: &Tensor) -> Result<()> {
    if a.ndim() != b.ndim() {
        return Err(Error::DimensionMismatch(a.ndim(), b.ndim()));
    }
    Ok(())
}

fn out_shape(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().zip(b).map(|(x, y)| x + y - 1).collect()
}

/// Shift-and-sum kernel: `C[rb - ra + Na - 1] += a[ra] * b[rb]`.
fn direct_kernel<T: Copy>(
    a: &[T],
    ash: &[usize],
    b: &[T],
    bsh: &[usize],
    zero: T,
    is_zero: impl Fn(T) -> bool,
    mac: impl Fn(T, T, T) -> Option<T>,
) -> Option<Vec<T>> {
    let osh = out_shape(ash, bsh);
    let ostr = strides_of(&osh);
    let mut out = vec![zero; osh.iter().product()];
    let offb: Vec<usize> = (0..b.len())
        .map(|k| unravel_in(bsh, k).iter().zip(&ostr).map(|(i, s)| i * s).sum())
        .collect();
    for (ka, &va) in a.iter().enumerate() {
        if is_zero(va) {
            continue;
        }
        let base: usize = unravel_in(ash, ka)
            .iter()
            .zip(ash)
            .zip(&ostr)
            .map(|((i, n), s)| (n - 1 - i) * s)
            .sum();
        for (kb, &vb) in b.iter().enumerate() {
            let slot = &mut out[base + offb[kb]];
            *slot = mac(*slot, va, vb)?;
        }
    }
    Some(out)
}

fn direct_values(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let osh = out_shape(a.shape(), b.shape());
    match (a.elements(), b.elements()) {
        (Elements::Int(x), Elements::Int(y)) => {
            let out = direct_kernel(
                x,
                a.shape(),
                y,
                b.shape(),
                0i128,
                |v| v == 0,
                |acc, p, q| p.checked_mul(q).and_then(|m| acc.checked_add(m)),
            )
            .ok_or(Error::Overflow("correlation"))?;
            Tensor::from_i128(&osh, out)
        }
        _ => {
            let x = a.to_f64_vec();
            let y = b.to_f64_vec();
            let out = direct_kernel(
                &x,
                a.shape(),
                &y,
                b.shape(),
                0.0f64,
                |v| v == 0.0,
                |acc, p, q| Some(acc + p * q),
            )
            .expect("real accumulation cannot fail");
            Tensor::from_reals(&osh, out)
        }
    }
}

fn fft_values(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let osh = out_shape(a.shape(), b.shape());
    let mut fa = to_complex_padded(a, &osh);
    let mut fb = to_complex_padded(b, &osh);
    fft_nd(&mut fa, &osh, false);
    fft_nd(&mut fb, &osh, false);
    let mut prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x.conj() * y).collect();
    fft_nd(&mut prod, &osh, true);
    let total = prod.len();
    let norm = total as f64;
    // The circular result holds shift s at s mod n; rotate so s = -(Na-1) lands at 0.
    let ostr = strides_of(&osh);
    let mut out = vec![0.0; total];
    for (k, slot) in out.iter_mut().enumerate() {
        let src: usize = unravel_in(&osh, k)
            .iter()
            .zip(a.shape())
            .zip(&osh)
            .zip(&ostr)
            .map(|(((&u, &na), &n), &s)| ((u + n - (na - 1)) % n) * s)
            .sum();
        *slot = prod[src].re / norm;
    }
    Tensor::from_reals(&osh, out)
}

/// Correlation values only, `C(s) = sum_r a(r) b(r + s)`.
pub fn correlation_values(a: &Tensor, b: &Tensor, backend: Backend) -> Result<Tensor> {
    check_pair(a, b)?;
    let use_fft = match backend {
        Backend::Direct => false,
        Backend::Fft => true,
        Backend::Auto => {
            !(a.is_integer() && b.is_integer()) && a.shape().iter().chain(b.shape()).all(|&n| n >= FFT_MIN_EXTENT)
        }
    };
    if use_fft {
        fft_values(a, b)
    } else {
        direct_values(a, b)
    }
}

/// Full aperiodic cross-correlation with peak, edge and off-peak bookkeeping.
pub fn correlate(a: &Tensor, b: &Tensor) -> Result<CorrelationResult> {
    correlate_with(a, b, Backend::Auto)
}

pub fn correlate_with(a: &Tensor, b: &Tensor, backend: Backend) -> Result<CorrelationResult> {
    let values = correlation_values(a, b, backend)?;
    let centre: Vec<usize> = a.shape().iter().map(|n| n - 1).collect();
    let edge_shifts = if a.shape() == b.shape() {
        let support: Vec<Vec<usize>> = (0..a.len())
            .filter(|&k| a.is_nonzero(k) || b.is_nonzero(k))
            .map(|k| a.unravel(k))
            .collect();
        support_edge_shifts(&support, a.ndim())
    } else {
        Vec::new()
    };
    Ok(summarise(values, centre, edge_shifts))
}

fn magnitude_max(values: &Tensor, skip: impl Fn(usize) -> bool) -> Scalar {
    match values.elements() {
        Elements::Int(v) => Scalar::Int(
            v.iter()
                .enumerate()
                .filter(|(k, _)| !skip(*k))
                .map(|(_, x)| x.abs())
                .max()
                .unwrap_or(0),
        ),
        Elements::Real(v) => Scalar::Real(
            v.iter()
                .enumerate()
                .filter(|(k, _)| !skip(*k))
                .fold(0.0, |m, (_, x)| m.max(x.abs())),
        ),
    }
}

fn summarise(values: Tensor, centre: Vec<usize>, edge_shifts: Vec<Vec<isize>>) -> CorrelationResult {
    let mut result = CorrelationResult {
        peak: values.at(&centre),
        off_peak_max: Scalar::Int(0),
        edge: None,
        op: None,
        values,
        centre,
        edge_shifts: Vec::new(),
    };
    let c = result.centre_index();
    result.off_peak_max = magnitude_max(&result.values, |k| k == c);
    let edge_idx: Vec<usize> = edge_shifts.iter().filter_map(|s| result.index_of(s)).collect();
    if !edge_idx.is_empty() {
        let mut best = edge_idx[0];
        for &k in &edge_idx {
            if result.values.get_f64(k).abs() > result.values.get_f64(best).abs() {
                best = k;
            }
        }
        result.edge = Some(result.values.value(best));
        result.op = Some(magnitude_max(&result.values, |k| k == c || edge_idx.contains(&k)));
    }
    result.edge_shifts = edge_shifts;
    result
}

/// Full aperiodic convolution `(a * b)(n) = sum_r a(r) b(n - r)`, index 0 at the origin.
pub fn convolve(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    convolve_with(a, b, Backend::Auto)
}

pub fn convolve_with(a: &Tensor, b: &Tensor, backend: Backend) -> Result<Tensor> {
    // Correlating the flipped kernel against `a` lands index n at n.
    correlation_values(&flip(b), a, backend)
}

/// Coordinate inversion `a(-r)` about the array centre.
pub fn flip(a: &Tensor) -> Tensor {
    // Reversing every axis of a row-major array reverses its flat store.
    let elements = match a.elements() {
        Elements::Int(v) => v.iter().rev().copied().map(Scalar::Int).collect::<Vec<_>>(),
        Elements::Real(v) => v.iter().rev().copied().map(Scalar::Real).collect(),
    };
    rebuild(a.shape(), &elements)
}

fn rebuild(shape: &[usize], values: &[Scalar]) -> Tensor {
    if values.iter().all(|v| matches!(v, Scalar::Int(_))) {
        Tensor::from_i128(shape, values.iter().filter_map(|v| v.as_int()).collect())
    } else {
        Tensor::from_reals(shape, values.iter().map(|v| v.to_f64()).collect())
    }
    .expect("shape preserved")
}

/// Outer product of 1D factors; the result has one axis per factor.
pub fn outer_product(factors: &[Tensor]) -> Result<Tensor> {
    let first = factors.first().ok_or(Error::Empty)?;
    if let Some(bad) = factors.iter().find(|f| f.ndim() != 1) {
        return Err(Error::DimensionMismatch(1, bad.ndim()));
    }
    let mut acc = first.clone();
    for f in &factors[1..] {
        let mut shape = acc.shape().to_vec();
        shape.push(f.len());
        acc = match (acc.elements(), f.elements()) {
            (Elements::Int(x), Elements::Int(y)) => {
                let mut out = Vec::with_capacity(x.len() * y.len());
                for &p in x {
                    for &q in y {
                        out.push(p.checked_mul(q).ok_or(Error::Overflow("outer product"))?);
                    }
                }
                Tensor::from_i128(&shape, out)?
            }
            _ => {
                let x = acc.to_f64_vec();
                let y = f.to_f64_vec();
                let out = x.iter().flat_map(|p| y.iter().map(move |q| p * q)).collect();
                Tensor::from_reals(&shape, out)?
            }
        };
    }
    Ok(acc)
}

/// Shifts across opposite faces of the support hull.
///
/// 1D: the span between the outermost non-zeros. 2D: centroid differences of
/// antiparallel edges of the convex hull (lattice-valued ones only). Higher
/// dimensions: the bounding-box span along each axis.
pub fn support_edge_shifts(support: &[Vec<usize>], ndim: usize) -> Vec<Vec<isize>> {
    let mut shifts: Vec<Vec<isize>> = Vec::new();
    if support.is_empty() {
        return shifts;
    }
    match ndim {
        2 => {
            let pts: Vec<(i64, i64)> = support.iter().map(|p| (p[0] as i64, p[1] as i64)).collect();
            let hull = convex_hull(pts);
            if hull.len() == 2 {
                let d = (hull[1].0 - hull[0].0, hull[1].1 - hull[0].1);
                shifts.push(vec![d.0 as isize, d.1 as isize]);
                shifts.push(vec![-d.0 as isize, -d.1 as isize]);
            } else if hull.len() >= 3 {
                let n = hull.len();
                let edges: Vec<((i64, i64), (i64, i64))> = (0..n).map(|k| (hull[k], hull[(k + 1) % n])).collect();
                for (i, &(p0, p1)) in edges.iter().enumerate() {
                    let di = (p1.0 - p0.0, p1.1 - p0.1);
                    for (j, &(q0, q1)) in edges.iter().enumerate() {
                        if i == j {
                            continue;
                        }
                        let dj = (q1.0 - q0.0, q1.1 - q0.1);
                        let cross = di.0 * dj.1 - di.1 * dj.0;
                        let dot = di.0 * dj.0 + di.1 * dj.1;
                        if cross != 0 || dot >= 0 {
                            continue;
                        }
                        let twice = (q0.0 + q1.0 - p0.0 - p1.0, q0.1 + q1.1 - p0.1 - p1.1);
                        if twice.0 % 2 == 0 && twice.1 % 2 == 0 {
                            shifts.push(vec![(twice.0 / 2) as isize, (twice.1 / 2) as isize]);
                        }
                    }
                }
            }
        }
        _ => {
            for axis in 0..ndim {
                let lo = support.iter().map(|p| p[axis]).min().unwrap_or(0);
                let hi = support.iter().map(|p| p[axis]).max().unwrap_or(0);
                if hi > lo {
                    let mut s = vec![0isize; ndim];
                    s[axis] = (hi - lo) as isize;
                    shifts.push(s.clone());
                    s[axis] = -s[axis];
                    shifts.push(s);
                }
            }
        }
    }
    shifts.sort();
    shifts.dedup();
    shifts
}

/// Andrew's monotone chain, collinear points dropped, counter-clockwise.
fn convex_hull(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
