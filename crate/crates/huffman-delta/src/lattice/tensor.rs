use crate::error::{Error, Result};

/// Flat row-major element store. A tensor is either exact-integer or real, never both.
#[derive(Clone, Debug, PartialEq)]
pub enum Elements {
    Int(Vec<i128>),
    Real(Vec<f64>),
}

/// A single element, tagged like the tensor it came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scalar {
    Int(i128),
    Real(f64),
}

impl Scalar {
    pub fn to_f64(self) -> f64 {
        match self {
            Scalar::Int(v) => v as f64,
            Scalar::Real(v) => v,
        }
    }

    pub fn abs(self) -> Scalar {
        match self {
            Scalar::Int(v) => Scalar::Int(v.abs()),
            Scalar::Real(v) => Scalar::Real(v.abs()),
        }
    }

    pub fn as_int(self) -> Option<i128> {
        match self {
            Scalar::Int(v) => Some(v),
            Scalar::Real(_) => None,
        }
    }
}

impl std::fmt::Display for Scalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scalar::Int(v) => write!(f, "{v}"),
            Scalar::Real(v) => write!(f, "{v:?}"),
        }
    }
}

/// Dense n-dimensional array of exact integers or reals.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    elements: Elements,
}

fn check_shape(shape: &[usize], count: usize) -> Result<()> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(Error::Empty);
    }
    if shape.iter().product::<usize>() != count {
        return Err(Error::ElementCount {
            shape: shape.to_vec(),
            count,
        });
    }
    Ok(())
}

impl Tensor {
    pub fn from_i128(shape: &[usize], values: Vec<i128>) -> Result<Self> {
        check_shape(shape, values.len())?;
        Ok(Tensor {
            shape: shape.to_vec(),
            elements: Elements::Int(values),
        })
    }

    pub fn from_ints(shape: &[usize], values: &[i64]) -> Result<Self> {
        Self::from_i128(shape, values.iter().map(|&v| v as i128).collect())
    }

    pub fn from_reals(shape: &[usize], values: Vec<f64>) -> Result<Self> {
        check_shape(shape, values.len())?;
        Ok(Tensor {
            shape: shape.to_vec(),
            elements: Elements::Real(values),
        })
    }

    /// 1D integer sequence.
    pub fn ints_1d(values: &[i64]) -> Result<Self> {
        Self::from_ints(&[values.len()], values)
    }

    /// 2D integer matrix from equal-length rows.
    pub fn ints_2d(rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch(vec![cols], vec![bad.len()]));
        }
        let flat: Vec<i64> = rows.iter().flatten().copied().collect();
        Self::from_ints(&[rows.len(), cols], &flat)
    }

    pub fn reals_1d(values: &[f64]) -> Result<Self> {
        Self::from_reals(&[values.len()], values.to_vec())
    }

    pub fn zeros_int(shape: &[usize]) -> Result<Self> {
        Self::from_i128(shape, vec![0; shape.iter().product()])
    }

    pub fn zeros_real(shape: &[usize]) -> Result<Self> {
        Self::from_reals(shape, vec![0.0; shape.iter().product()])
    }

    /// Unit tensor: a single element equal to one.
    pub fn impulse(ndim: usize) -> Self {
        Tensor {
            shape: vec![1; ndim.max(1)],
            elements: Elements::Int(vec![1]),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        match &self.elements {
            Elements::Int(v) => v.len(),
            Elements::Real(v) => v.len(),
        }
    }

    /// Always false: tensors have at least one element.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_integer(&self) -> bool {
        matches!(self.elements, Elements::Int(_))
    }

    pub fn elements(&self) -> &Elements {
        &self.elements
    }

    pub fn as_ints(&self) -> Option<&[i128]> {
        match &self.elements {
            Elements::Int(v) => Some(v),
            Elements::Real(_) => None,
        }
    }

    pub fn as_reals(&self) -> Option<&[f64]> {
        match &self.elements {
            Elements::Real(v) => Some(v),
            Elements::Int(_) => None,
        }
    }

    /// Integer elements, or a mode error for real tensors.
    pub fn ints(&self) -> Result<&[i128]> {
        self.as_ints().ok_or(Error::Mode("integer"))
    }

    /// Integer elements narrowed to i64, failing if any does not fit.
    pub fn to_i64_vec(&self) -> Result<Vec<i64>> {
        self.ints()?
            .iter()
            .map(|&v| i64::try_from(v).map_err(|_| Error::Overflow("narrowing to i64")))
            .collect()
    }

    pub fn value(&self, flat: usize) -> Scalar {
        match &self.elements {
            Elements::Int(v) => Scalar::Int(v[flat]),
            Elements::Real(v) => Scalar::Real(v[flat]),
        }
    }

    pub fn get_f64(&self, flat: usize) -> f64 {
        self.value(flat).to_f64()
    }

    pub fn at(&self, index: &[usize]) -> Scalar {
        self.value(self.ravel(index))
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        match &self.elements {
            Elements::Int(v) => v.iter().map(|&x| x as f64).collect(),
            Elements::Real(v) => v.clone(),
        }
    }

    /// Explicit promotion to real mode.
    pub fn to_real(&self) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            elements: Elements::Real(self.to_f64_vec()),
        }
    }

    /// Explicit conversion to integer mode by rounding half away from zero.
    pub fn round_to_int(&self) -> Result<Tensor> {
        let values = match &self.elements {
            Elements::Int(v) => v.clone(),
            Elements::Real(v) => v
                .iter()
                .map(|x| {
                    let r = x.round();
                    if r.is_finite() && r.abs() < 1.0e37 {
                        Ok(r as i128)
                    } else {
                        Err(Error::Overflow("rounding to integer"))
                    }
                })
                .collect::<Result<_>>()?,
        };
        Tensor::from_i128(&self.shape, values)
    }

    pub fn strides(&self) -> Vec<usize> {
        strides_of(&self.shape)
    }

    pub fn ravel(&self, index: &[usize]) -> usize {
        index.iter().zip(self.strides()).map(|(&i, s)| i * s).sum()
    }

    pub fn unravel(&self, flat: usize) -> Vec<usize> {
        unravel_in(&self.shape, flat)
    }

    pub fn reshape(&self, shape: &[usize]) -> Result<Tensor> {
        check_shape(shape, self.len())?;
        Ok(Tensor {
            shape: shape.to_vec(),
            elements: self.elements.clone(),
        })
    }

    pub fn map_real(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            elements: Elements::Real(self.to_f64_vec().into_iter().map(f).collect()),
        }
    }

    pub fn negate(&self) -> Tensor {
        let elements = match &self.elements {
            Elements::Int(v) => Elements::Int(v.iter().map(|x| -x).collect()),
            Elements::Real(v) => Elements::Real(v.iter().map(|x| -x).collect()),
        };
        Tensor {
            shape: self.shape.clone(),
            elements,
        }
    }

    /// Multiply every element by an integer, keeping the mode.
    pub fn scale_int(&self, k: i128) -> Result<Tensor> {
        let elements = match &self.elements {
            Elements::Int(v) => Elements::Int(
                v.iter()
                    .map(|x| x.checked_mul(k).ok_or(Error::Overflow("scale")))
                    .collect::<Result<_>>()?,
            ),
            Elements::Real(v) => Elements::Real(v.iter().map(|x| x * k as f64).collect()),
        };
        Ok(Tensor {
            shape: self.shape.clone(),
            elements,
        })
    }

    pub fn scale(&self, k: f64) -> Tensor {
        self.map_real(|x| x * k)
    }

    /// Add a constant to every element; integer tensors stay integer.
    pub fn offset_int(&self, k: i128) -> Result<Tensor> {
        let elements = match &self.elements {
            Elements::Int(v) => Elements::Int(
                v.iter()
                    .map(|x| x.checked_add(k).ok_or(Error::Overflow("offset")))
                    .collect::<Result<_>>()?,
            ),
            Elements::Real(v) => Elements::Real(v.iter().map(|x| x + k as f64).collect()),
        };
        Ok(Tensor {
            shape: self.shape.clone(),
            elements,
        })
    }

    fn zip_with(
        &self,
        other: &Tensor,
        fi: impl Fn(i128, i128) -> Option<i128>,
        fr: impl Fn(f64, f64) -> f64,
    ) -> Result<Tensor> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(self.shape.clone(), other.shape.clone()));
        }
        let elements = match (&self.elements, &other.elements) {
            (Elements::Int(a), Elements::Int(b)) => Elements::Int(
                a.iter()
                    .zip(b)
                    .map(|(&x, &y)| fi(x, y).ok_or(Error::Overflow("elementwise")))
                    .collect::<Result<_>>()?,
            ),
            _ => Elements::Real(
                self.to_f64_vec()
                    .iter()
                    .zip(other.to_f64_vec())
                    .map(|(&x, y)| fr(x, y))
                    .collect(),
            ),
        };
        Ok(Tensor {
            shape: self.shape.clone(),
            elements,
        })
    }

    /// Elementwise sum; mixed modes promote to real.
    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_with(other, i128::checked_add, |x, y| x + y)
    }

    /// Elementwise difference; mixed modes promote to real.
    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_with(other, i128::checked_sub, |x, y| x - y)
    }

    /// Elementwise product; mixed modes promote to real.
    pub fn mul(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_with(other, i128::checked_mul, |x, y| x * y)
    }

    pub fn sum(&self) -> Result<Scalar> {
        match &self.elements {
            Elements::Int(v) => v
                .iter()
                .try_fold(0i128, |acc, &x| acc.checked_add(x))
                .map(Scalar::Int)
                .ok_or(Error::Overflow("sum")),
            Elements::Real(v) => Ok(Scalar::Real(v.iter().sum())),
        }
    }

    /// Sum of squared elements, exact in integer mode.
    pub fn sum_squares(&self) -> Result<Scalar> {
        match &self.elements {
            Elements::Int(v) => v
                .iter()
                .try_fold(0i128, |acc, &x| x.checked_mul(x).and_then(|sq| acc.checked_add(sq)))
                .map(Scalar::Int)
                .ok_or(Error::Overflow("sum of squares")),
            Elements::Real(v) => Ok(Scalar::Real(v.iter().map(|x| x * x).sum())),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.to_f64_vec().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Smallest and largest element as reals.
    pub fn min_max(&self) -> (f64, f64) {
        self.to_f64_vec()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            })
    }

    pub fn count_nonzero(&self) -> usize {
        match &self.elements {
            Elements::Int(v) => v.iter().filter(|&&x| x != 0).count(),
            Elements::Real(v) => v.iter().filter(|&&x| x != 0.0).count(),
        }
    }

    pub fn is_nonzero(&self, flat: usize) -> bool {
        match &self.elements {
            Elements::Int(v) => v[flat] != 0,
            Elements::Real(v) => v[flat] != 0.0,
        }
    }

    /// Sub-block starting at `start` with the given extents.
    pub fn crop(&self, start: &[usize], extent: &[usize]) -> Result<Tensor> {
        if start.len() != self.ndim() || extent.len() != self.ndim() {
            return Err(Error::DimensionMismatch(self.ndim(), start.len()));
        }
        if start.iter().zip(extent).zip(&self.shape).any(|((s, e), n)| s + e > *n) {
            return Err(Error::ShapeMismatch(self.shape.clone(), extent.to_vec()));
        }
        let count: usize = extent.iter().product();
        let mut flat = Vec::with_capacity(count);
        for k in 0..count {
            let local = unravel_in(extent, k);
            let idx: Vec<usize> = local.iter().zip(start).map(|(a, b)| a + b).collect();
            flat.push(self.ravel(&idx));
        }
        let elements = match &self.elements {
            Elements::Int(v) => Elements::Int(flat.iter().map(|&i| v[i]).collect()),
            Elements::Real(v) => Elements::Real(flat.iter().map(|&i| v[i]).collect()),
        };
        check_shape(extent, count)?;
        Ok(Tensor {
            shape: extent.to_vec(),
            elements,
        })
    }

    /// Copy of `self` with `block` written in at `start`, growing nothing.
    pub fn paste(&self, block: &Tensor, start: &[usize]) -> Result<Tensor> {
        if block.ndim() != self.ndim() || start.len() != self.ndim() {
            return Err(Error::DimensionMismatch(self.ndim(), block.ndim()));
        }
        if start
            .iter()
            .zip(block.shape())
            .zip(&self.shape)
            .any(|((s, e), n)| s + e > *n)
        {
            return Err(Error::ShapeMismatch(self.shape.clone(), block.shape.clone()));
        }
        let mut out = if self.is_integer() && block.is_integer() {
            self.clone()
        } else {
            self.to_real()
        };
        for k in 0..block.len() {
            let idx: Vec<usize> = block.unravel(k).iter().zip(start).map(|(a, b)| a + b).collect();
            let f = out.ravel(&idx);
            match &mut out.elements {
                Elements::Int(v) => v[f] = block.value(k).as_int().unwrap_or_default(),
                Elements::Real(v) => v[f] = block.get_f64(k),
            }
        }
        Ok(out)
    }

    /// Zero tensor of `shape` with `self` placed at `start`.
    pub fn embed(&self, shape: &[usize], start: &[usize]) -> Result<Tensor> {
        let canvas = if self.is_integer() {
            Tensor::zeros_int(shape)?
        } else {
            Tensor::zeros_real(shape)?
        };
        canvas.paste(self, start)
    }
}

pub(crate) fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * shape[i + 1];
    }
    strides
}

pub(crate) fn unravel_in(shape: &[usize], mut flat: usize) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for i in (0..shape.len()).rev() {
        idx[i] = flat % shape[i];
        flat /= shape[i];
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_must_match_count() {
        assert!(Tensor::from_ints(&[2, 3], &[1, 2, 3]).is_err());
        assert!(matches!(Tensor::from_ints(&[0], &[]), Err(Error::Empty)));
        assert!(matches!(Tensor::ints_1d(&[]), Err(Error::Empty)));
    }

    #[test]
    fn ravel_round_trips() {
        let t = Tensor::zeros_int(&[3, 4, 5]).unwrap();
        for k in 0..t.len() {
            assert_eq!(t.ravel(&t.unravel(k)), k);
        }
        assert_eq!(t.strides(), vec![20, 5, 1]);
    }

    #[test]
    fn integer_mode_is_sticky() {
        let a = Tensor::ints_1d(&[1, 2]).unwrap();
        let b = Tensor::ints_1d(&[3, 4]).unwrap();
        assert!(a.add(&b).unwrap().is_integer());
        let r = Tensor::reals_1d(&[0.5, 0.5]).unwrap();
        assert!(!a.add(&r).unwrap().is_integer());
        assert_eq!(a.to_real().round_to_int().unwrap(), a);
    }

    #[test]
    fn overflow_is_reported() {
        let big = Tensor::from_i128(&[2], vec![i128::MAX, 1]).unwrap();
        assert!(matches!(big.sum(), Err(Error::Overflow(_))));
    }

    #[test]
    fn crop_and_embed_are_inverse() {
        let t = Tensor::ints_2d(&[vec![1, 2], vec![3, 4]]).unwrap();
        let big = t.embed(&[4, 5], &[1, 2]).unwrap();
        assert_eq!(big.crop(&[1, 2], &[2, 2]).unwrap(), t);
        assert_eq!(big.sum().unwrap(), Scalar::Int(10));
    }
}
