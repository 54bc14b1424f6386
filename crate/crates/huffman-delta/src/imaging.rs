//! Diffuse point-spread-function experiments.
//!
//! An object `O` is blurred by full cross-correlation with a Huffman mask `H`,
//! `I(s) = sum_r O(r) H(r + s)`. Correlating `I` with `H` again gives `O` convolved
//! with the mask auto-correlation `C`, a scaled copy of `O` plus faint aliases,
//! and the aliases are removed by iterating `O_{p+1} = O_1 - C_off * O_p / C0`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{correlate, correlation_values, Backend, Tensor};
use crate::metrics::classify;
use crate::rng::trial_rng;

fn same_rank(a: &Tensor, b: &Tensor) -> Result<()> {
    if a.ndim() != b.ndim() {
        return Err(Error::DimensionMismatch(a.ndim(), b.ndim()));
    }
    Ok(())
}

/// Full cross-correlation of the object with the mask; extents `No + Nh - 1`.
pub fn encode(object: &Tensor, mask: &Tensor) -> Result<Tensor> {
    same_rank(object, mask)?;
    correlation_values(object, mask, Backend::Auto)
}

/// Extents of the object that produced a blurred image of `blurred` under `mask`.
pub fn object_shape(blurred: &[usize], mask: &[usize]) -> Result<Vec<usize>> {
    blurred
        .iter()
        .zip(mask)
        .map(|(&b, &m)| {
            (b >= m)
                .then(|| b + 1 - m)
                .ok_or_else(|| Error::ShapeMismatch(blurred.to_vec(), mask.to_vec()))
        })
        .collect()
}

/// First estimate `O_1`: correlate with the mask and crop to the object extents.
///
/// The result carries the factor `C0`; integer inputs stay exact.
pub fn decode(blurred: &Tensor, mask: &Tensor) -> Result<Tensor> {
    same_rank(blurred, mask)?;
    let shape = object_shape(blurred.shape(), mask.shape())?;
    let full = correlation_values(blurred, mask, Backend::Auto)?;
    let start: Vec<usize> = mask.shape().iter().map(|n| n - 1).collect();
    full.crop(&start, &shape)
}

/// Result of the alias-removal recursion.
#[derive(Clone, Debug)]
pub struct DeblurOutcome {
    /// `O_p / C0` for the last completed iteration.
    pub estimate: Tensor,
    /// Completed iterations `p`, counting `O_1` as the first.
    pub iterations: usize,
    /// `max |O_{p+1} - O_p| / C0` after each step.
    pub steps: Vec<f64>,
    /// Stopped because the step size grew three times in a row.
    pub diverged: bool,
}

/// Options for [`deblur_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeblurOptions {
    /// Stop early once a step changes no element by more than this (after `/ C0`).
    pub tolerance: f64,
    /// Round the final estimate to the nearest integer.
    pub snap: bool,
}

impl Default for DeblurOptions {
    fn default() -> Self {
        DeblurOptions {
            tolerance: 0.0,
            snap: false,
        }
    }
}

/// `p` iterations of the recursion starting from `O_1 = decode(I, H)`.
pub fn deblur(blurred: &Tensor, mask: &Tensor, iterations: usize) -> Result<DeblurOutcome> {
    deblur_with(blurred, mask, iterations, DeblurOptions::default())
}

pub fn deblur_with(
    blurred: &Tensor,
    mask: &Tensor,
    iterations: usize,
    options: DeblurOptions,
) -> Result<DeblurOutcome> {
    if iterations == 0 {
        return Err(Error::InvalidSpec("deblur needs at least one iteration".into()));
    }
    let o1 = decode(blurred, mask)?.to_real();
    let c = correlate(mask, mask)?;
    let c0 = c.peak.to_f64();
    if c0 == 0.0 {
        return Err(Error::Numerical("mask has zero energy".into()));
    }
    let centre = c.centre_index();
    let mut c_off = c.values.to_f64_vec();
    c_off[centre] = 0.0;
    let c_off = Tensor::from_reals(c.values.shape(), c_off)?;
    let start: Vec<usize> = mask.shape().iter().map(|n| n - 1).collect();
    let shape = o1.shape().to_vec();
    let o1v = o1.to_f64_vec();
    let mut current = o1v.clone();
    let mut steps = Vec::new();
    let mut growth = 0;
    let mut diverged = false;
    let mut done = 1;
    while done < iterations {
        let op = Tensor::from_reals(&shape, current.iter().map(|x| x / c0).collect())?;
        let alias = correlation_values(&c_off, &op, Backend::Auto)?.crop(&start, &shape)?;
        let next: Vec<f64> = o1v.iter().zip(alias.to_f64_vec()).map(|(a, b)| a - b).collect();
        let step = next.iter().zip(&current).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / c0;
        if !step.is_finite() {
            return Err(Error::Numerical("deblur produced non-finite values".into()));
        }
        growth = match steps.last() {
            Some(&prev) if step > prev => growth + 1,
            _ => 0,
        };
        steps.push(step);
        current = next;
        done += 1;
        if growth >= 3 {
            diverged = true;
            break;
        }
        if step <= options.tolerance {
            break;
        }
    }
    let estimate = Tensor::from_reals(&shape, current.iter().map(|x| x / c0).collect())?;
    let estimate = if options.snap {
        estimate.round_to_int()?
    } else {
        estimate
    };
    Ok(DeblurOutcome {
        estimate,
        iterations: done,
        steps,
        diverged,
    })
}

/// Largest absolute difference between two equally shaped tensors.
pub fn max_abs_error(a: &Tensor, b: &Tensor) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(a.shape().to_vec(), b.shape().to_vec()));
    }
    Ok(a.to_f64_vec()
        .iter()
        .zip(b.to_f64_vec())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
}

/// Mean absolute difference between two equally shaped tensors.
pub fn mean_abs_error(a: &Tensor, b: &Tensor) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(a.shape().to_vec(), b.shape().to_vec()));
    }
    let n = a.len() as f64;
    Ok(a.to_f64_vec()
        .iter()
        .zip(b.to_f64_vec())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        / n)
}

/// Both shots of the two-measurement scheme and their difference.
#[derive(Clone, Debug)]
pub struct PedestalPair {
    /// `O` correlated with `H + kappa`.
    pub plus: Tensor,
    /// `O` correlated with `-H + kappa`.
    pub minus: Tensor,
    /// `plus - minus = 2 O * H`.
    pub combined: Tensor,
}

/// Smallest pedestal that keeps both `H + kappa` and `-H + kappa` non-negative.
pub fn min_pedestal(mask: &Tensor) -> f64 {
    let (lo, hi) = mask.min_max();
    (-lo).max(hi).max(0.0)
}

fn with_pedestal(mask: &Tensor, kappa: f64) -> Result<Tensor> {
    if mask.is_integer() && kappa.fract() == 0.0 && kappa.abs() < 1e30 {
        mask.offset_int(kappa as i128)
    } else {
        Ok(mask.map_real(|x| x + kappa))
    }
}

pub fn pedestal_pair(object: &Tensor, mask: &Tensor, kappa: f64) -> Result<PedestalPair> {
    let need = min_pedestal(mask);
    if kappa.is_nan() || kappa < need {
        return Err(Error::Constraint(format!(
            "pedestal {kappa} leaves a negative mask; need at least {need}"
        )));
    }
    let plus = encode(object, &with_pedestal(mask, kappa)?)?;
    let minus = encode(object, &with_pedestal(&mask.negate(), kappa)?)?;
    let combined = plus.sub(&minus)?;
    Ok(PedestalPair { plus, minus, combined })
}

/// How the propagated pedestal `kappa'` is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum KappaMode {
    /// `kappa * sum(O) * sum(H)`, available when the object total is known.
    Exact,
    /// Mean of the decoded image over the border of the reconstruction window.
    #[default]
    Boundary,
}

impl FromStr for KappaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(KappaMode::Exact),
            "boundary" => Ok(KappaMode::Boundary),
            other => Err(Error::InvalidSpec(format!("unknown kappa mode {other:?}"))),
        }
    }
}

/// Bucket signal and reconstruction of a scanned-mask ghost-imaging run.
#[derive(Clone, Debug)]
pub struct GhostOutcome {
    /// One total intensity per mask shift, laid out like [`encode`]'s output.
    pub bucket: Tensor,
    /// `(B * H - kappa') / C0`, cropped to the object extents.
    pub reconstruction: Tensor,
    pub kappa_prime: f64,
    pub mode: KappaMode,
    /// Some shifts needed for a full reconstruction were not scanned.
    pub partial: bool,
}

/// Scan the mask on a uniform pedestal `kappa` over the object and reconstruct.
///
/// `scan` bounds the scanned shifts as an inclusive window of bucket indices per
/// axis; shifts outside it record nothing. `None` scans every overlapping shift.
pub fn ghost_image(
    object: &Tensor,
    mask: &Tensor,
    kappa: f64,
    scan: Option<(&[usize], &[usize])>,
    mode: KappaMode,
) -> Result<GhostOutcome> {
    same_rank(object, mask)?;
    let (lo, _) = mask.min_max();
    if kappa + lo < 0.0 {
        return Err(Error::Constraint(format!(
            "pedestal {kappa} leaves a negative mask; need at least {}",
            -lo
        )));
    }
    let total = object.to_f64_vec().iter().sum::<f64>();
    let mut bucket = encode(object, mask)?.map_real(|x| x + kappa * total);
    let mut partial = false;
    if let Some((from, to)) = scan {
        if from.len() != bucket.ndim() || to.len() != bucket.ndim() {
            return Err(Error::DimensionMismatch(bucket.ndim(), from.len()));
        }
        let mut v = bucket.to_f64_vec();
        for (k, slot) in v.iter_mut().enumerate() {
            let idx = bucket.unravel(k);
            let inside = idx.iter().zip(from).zip(to).all(|((i, a), b)| a <= i && i <= b);
            if !inside {
                *slot = 0.0;
                partial = true;
            }
        }
        bucket = Tensor::from_reals(bucket.shape(), v)?;
    }
    let decoded = decode(&bucket, mask)?.to_f64_vec();
    let shape = object_shape(bucket.shape(), mask.shape())?;
    let mask_total = mask.to_f64_vec().iter().sum::<f64>();
    let kappa_prime = match mode {
        KappaMode::Exact => kappa * total * mask_total,
        KappaMode::Boundary => {
            let probe = Tensor::zeros_real(&shape)?;
            let border: Vec<f64> = (0..decoded.len())
                .filter(|&k| probe.unravel(k).iter().zip(&shape).any(|(&i, &n)| i == 0 || i + 1 == n))
                .map(|k| decoded[k])
                .collect();
            border.iter().sum::<f64>() / border.len() as f64
        }
    };
    let c0 = mask.sum_squares()?.to_f64();
    let reconstruction = Tensor::from_reals(&shape, decoded.iter().map(|x| (x - kappa_prime) / c0).collect())?;
    Ok(GhostOutcome {
        bucket,
        reconstruction,
        kappa_prime,
        mode,
        partial,
    })
}

/// Top-left corner at which a mark lands `offset` away from the host centre.
fn mark_corner(host: &[usize], mark: &[usize], offset: &[isize]) -> Result<Vec<usize>> {
    if host.len() != mark.len() || offset.len() != host.len() {
        return Err(Error::DimensionMismatch(host.len(), offset.len()));
    }
    host.iter()
        .zip(mark)
        .zip(offset)
        .map(|((&h, &m), &o)| {
            let corner = (h / 2) as isize + o - (m / 2) as isize;
            if corner < 0 || corner as usize + m > h {
                Err(Error::Constraint(format!(
                    "mark of extent {m} at offset {o} leaves the host of extent {h}"
                )))
            } else {
                Ok(corner as usize)
            }
        })
        .collect()
}

/// Add the mark to the host with its centre `offset` away from the host centre.
pub fn watermark_embed(host: &Tensor, mark: &Tensor, offset: &[isize]) -> Result<Tensor> {
    same_rank(host, mark)?;
    let corner = mark_corner(host.shape(), mark.shape(), offset)?;
    host.add(&mark.embed(host.shape(), &corner)?)
}

/// Where the mark correlates most strongly with a host.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WatermarkLocation {
    /// Mark centre relative to the host centre.
    pub offset: Vec<isize>,
    /// Correlation at that position after removing the host mean.
    pub peak: f64,
    /// `sum(mark^2)`.
    pub c0: f64,
    /// `peak >= C0 / 2`.
    pub detected: bool,
}

/// Cross-correlate the mark with the mean-removed host over positions where it fits.
pub fn watermark_locate(marked: &Tensor, mark: &Tensor) -> Result<WatermarkLocation> {
    same_rank(marked, mark)?;
    if marked.shape().iter().zip(mark.shape()).any(|(h, m)| m > h) {
        return Err(Error::ShapeMismatch(marked.shape().to_vec(), mark.shape().to_vec()));
    }
    let mean = marked.to_f64_vec().iter().sum::<f64>() / marked.len() as f64;
    let centred = marked.map_real(|x| x - mean);
    let c = correlation_values(&mark.to_real(), &centred, Backend::Auto)?;
    // Shift s places the mark's corner at s; index s + Nm - 1.
    let valid: Vec<usize> = marked
        .shape()
        .iter()
        .zip(mark.shape())
        .map(|(h, m)| h - m + 1)
        .collect();
    let start: Vec<usize> = mark.shape().iter().map(|m| m - 1).collect();
    let window = c.crop(&start, &valid)?;
    let values = window.to_f64_vec();
    let (best, peak) = values.iter().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |(bk, bv), (k, &v)| if v > bv { (k, v) } else { (bk, bv) },
    );
    let corner = window.unravel(best);
    let offset = corner
        .iter()
        .zip(mark.shape())
        .zip(marked.shape())
        .map(|((&c, &m), &h)| c as isize + (m / 2) as isize - (h / 2) as isize)
        .collect();
    let c0 = mark.sum_squares()?.to_f64();
    Ok(WatermarkLocation {
        offset,
        peak,
        c0,
        detected: peak >= c0 / 2.0,
    })
}

/// Minimum, mean and maximum of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        if finite.is_empty() {
            return Summary {
                min: f64::NAN,
                mean: f64::NAN,
                max: f64::NAN,
            };
        }
        Summary {
            min: finite.iter().copied().fold(f64::INFINITY, f64::min),
            mean: finite.iter().sum::<f64>() / finite.len() as f64,
            max: finite.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BaselineStats {
    pub trials: usize,
    pub r: Summary,
    pub m: Summary,
    /// Per-trial `(R, M)`.
    #[serde(skip)]
    pub samples: Vec<(f64, f64)>,
    /// Some trial had no off-peak entries, so `R` and `M` are undefined there.
    pub undefined: bool,
}

/// Metrics of random arrangements of distinct values drawn from `pool`.
///
/// Each trial shuffles the pool with its own seeded stream and fills `shape`
/// with the leading values.
pub fn random_baseline(shape: &[usize], pool: &[i64], trials: usize, seed: u64) -> Result<BaselineStats> {
    let n: usize = shape.iter().product();
    if trials == 0 {
        return Err(Error::InvalidSpec("baseline needs at least one trial".into()));
    }
    if n == 0 || n > pool.len() {
        return Err(Error::InvalidSpec(format!(
            "shape {shape:?} needs {n} distinct values, pool has {}",
            pool.len()
        )));
    }
    let samples = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let mut values = pool.to_vec();
            values.shuffle(&mut rng);
            let a = Tensor::from_ints(shape, &values[..n])?;
            let r = classify(&a)?;
            Ok((r.r, r.m))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let undefined = samples.iter().any(|(r, m)| !r.is_finite() || !m.is_finite());
    let rs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ms: Vec<f64> = samples.iter().map(|s| s.1).collect();
    Ok(BaselineStats {
        trials,
        r: Summary::of(&rs),
        m: Summary::of(&ms),
        samples,
        undefined,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NoiseReport {
    pub sigma: f64,
    pub trials: usize,
    /// Mean squared error per pixel of the raster (delta-probe) acquisition.
    pub mse_delta: f64,
    /// Mean squared error per pixel after decoding the diffuse acquisition.
    pub mse_diffuse: f64,
    /// `mse_delta / mse_diffuse`.
    pub ratio: f64,
    /// Mask elements, the ideal ratio.
    pub elements: usize,
}

fn noisy(t: &Tensor, normal: &Normal<f64>, rng: &mut impl Rng) -> Result<Tensor> {
    Tensor::from_reals(
        t.shape(),
        t.to_f64_vec().iter().map(|x| x + normal.sample(rng)).collect(),
    )
}

/// Equal white noise per measurement for raster and diffuse acquisition.
///
/// The mask is rescaled so its mean squared element is 1, which fixes the
/// per-measurement dose. Raster measures `O + n`; diffuse measures
/// `encode(O, H) + n` and is deblurred until steps fall below 1e-12 (50
/// iterations at most).
pub fn multiplex_noise_study(
    object: &Tensor,
    mask: &Tensor,
    sigma: f64,
    trials: usize,
    seed: u64,
) -> Result<NoiseReport> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidSpec(format!("sigma must be positive, got {sigma}")));
    }
    if trials == 0 {
        return Err(Error::InvalidSpec("noise study needs at least one trial".into()));
    }
    let l = mask.len();
    let energy = mask.sum_squares()?.to_f64();
    if energy == 0.0 {
        return Err(Error::Numerical("mask has zero energy".into()));
    }
    let mask = mask.scale((l as f64 / energy).sqrt());
    let object = object.to_real();
    let clean = encode(&object, &mask)?;
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Numerical(e.to_string()))?;
    let options = DeblurOptions {
        tolerance: 1e-12,
        snap: false,
    };
    let errors = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut raster_rng = trial_rng(seed, t as u64);
            let mut diffuse_rng = trial_rng(seed, t as u64);
            let raster = noisy(&object, &normal, &mut raster_rng)?;
            let measured = noisy(&clean, &normal, &mut diffuse_rng)?;
            let recovered = deblur_with(&measured, &mask, 50, options)?.estimate;
            let mse = |a: &Tensor| -> f64 {
                a.to_f64_vec()
                    .iter()
                    .zip(object.to_f64_vec())
                    .map(|(x, y)| (x - y).powi(2))
                    .sum::<f64>()
                    / object.len() as f64
            };
            Ok((mse(&raster), mse(&recovered)))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let mse_delta = errors.iter().map(|e| e.0).sum::<f64>() / trials as f64;
    let mse_diffuse = errors.iter().map(|e| e.1).sum::<f64>() / trials as f64;
    Ok(NoiseReport {
        sigma,
        trials,
        mse_delta,
        mse_diffuse,
        ratio: mse_delta / mse_diffuse,
        elements: l,
    })
}

/// Seeded random integer image with values in `lo..=hi`.
pub fn random_image(shape: &[usize], lo: i64, hi: i64, seed: u64) -> Result<Tensor> {
    let mut rng = trial_rng(seed, 0);
    let n: usize = shape.iter().product();
    let values: Vec<i64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    Tensor::from_ints(shape, &values)
}

/// Flat `key = value` run configuration; `#` starts a comment.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", n + 1)))?;
            entries.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(RunConfig { entries })
    }

    pub fn read(path: &Path) -> Result<RunConfig> {
        RunConfig::parse(&fs::read_to_string(path)?)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Typed value, `default` when absent.
    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::Parse(format!("bad value {key} = {v}"))),
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }
}
