//! Delta-likeness measures and the canonical / quasi / other classification.
//!
//! Correlation sums stay exact in integer mode and are converted to reals only
//! for the final ratios. A perfect delta has no off-peak energy and reports
//! infinite `M` and `R`.

use std::fmt;

use serde::ser::{Serialize, SerializeMap, Serializer};

use crate::error::Result;
use crate::lattice::{correlate, dft_magnitudes, CorrelationResult, Elements, Scalar, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    Canonical,
    Quasi,
    Other,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Canonical => "canonical",
            Classification::Quasi => "quasi",
            Classification::Other => "other",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Quality measures of one array.
#[derive(Clone, Debug, PartialEq)]
pub struct QualityReport {
    pub m: f64,
    pub r: f64,
    pub e: f64,
    pub p: f64,
    pub s: f64,
    pub c0: Scalar,
    /// Edge correlation of largest magnitude; zero when the support has no edge shift.
    pub c_edge: Scalar,
    pub op: Scalar,
    pub off_peak_max: Scalar,
    pub bits: u32,
    pub classification: Classification,
}

fn number(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else if x.is_nan() {
        serde_json::Value::Null
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn scalar(x: Scalar) -> serde_json::Value {
    match x {
        Scalar::Int(v) => match i64::try_from(v) {
            Ok(v) => v.into(),
            Err(_) => v.to_string().into(),
        },
        Scalar::Real(v) => number(v),
    }
}

impl Serialize for QualityReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(10))?;
        map.serialize_entry("M", &number(self.m))?;
        map.serialize_entry("R", &number(self.r))?;
        map.serialize_entry("E", &number(self.e))?;
        map.serialize_entry("P", &number(self.p))?;
        map.serialize_entry("S", &number(self.s))?;
        map.serialize_entry("C0", &scalar(self.c0))?;
        map.serialize_entry("Cedge", &scalar(self.c_edge))?;
        map.serialize_entry("OP", &scalar(self.op))?;
        map.serialize_entry("bits", &self.bits)?;
        map.serialize_entry("class", self.classification.as_str())?;
        map.end()
    }
}

fn fmt_real(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x}")
    }
}

impl QualityReport {
    pub const CSV_HEADER: [&'static str; 10] = ["R", "M", "S", "E", "P", "OP", "bits", "C0", "Cedge", "class"];

    /// Row in the order of [`Self::CSV_HEADER`].
    pub fn csv_row(&self) -> Vec<String> {
        vec![
            fmt_real(self.r),
            fmt_real(self.m),
            fmt_real(self.s),
            fmt_real(self.e),
            fmt_real(self.p),
            self.op.to_string(),
            self.bits.to_string(),
            self.c0.to_string(),
            self.c_edge.to_string(),
            self.classification.to_string(),
        ]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Off-peak sum of squares; exact in integer mode unless it would overflow.
fn off_peak_energy(c: &CorrelationResult) -> f64 {
    let centre = c.centre_index();
    match c.values.elements() {
        Elements::Int(v) => {
            let exact = v
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != centre)
                .try_fold(0i128, |acc, (_, &x)| acc.checked_add(x.checked_mul(x)?));
            match exact {
                Some(s) => s as f64,
                None => v
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != centre)
                    .map(|(_, &x)| (x as f64) * (x as f64))
                    .sum(),
            }
        }
        Elements::Real(v) => v
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != centre)
            .map(|(_, x)| x * x)
            .sum(),
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            f64::NAN
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// `C0^2 / sum of squared off-peak values`; infinite for a perfect delta.
pub fn merit_factor(c: &CorrelationResult) -> f64 {
    let c0 = c.peak.to_f64();
    ratio(c0 * c0, off_peak_energy(c))
}

/// `C0 / max |off-peak|`; infinite for a perfect delta.
pub fn side_lobe_ratio(c: &CorrelationResult) -> f64 {
    ratio(c.peak.to_f64(), c.off_peak_max.to_f64())
}

/// Fraction of non-zero elements.
pub fn efficiency(a: &Tensor) -> f64 {
    a.count_nonzero() as f64 / a.len() as f64
}

/// Root mean square over the largest magnitude.
pub fn power(a: &Tensor) -> f64 {
    let mean_square = a.to_f64_vec().iter().map(|x| x * x).sum::<f64>() / a.len() as f64;
    ratio(mean_square.sqrt(), a.max_abs())
}

/// Spread of the native-size DFT magnitudes over their mean.
pub fn spectral_flatness(a: &Tensor) -> f64 {
    let spectrum = dft_magnitudes(a);
    let (lo, hi) = spectrum.min_max();
    let mags = spectrum.to_f64_vec();
    let mean = mags.iter().sum::<f64>() / mags.len() as f64;
    ratio(hi - lo, mean)
}

/// Bits needed to address every grey level between the smallest and largest value.
pub fn bits(a: &Tensor) -> u32 {
    let (lo, hi) = a.min_max();
    let levels = (hi.round() - lo.round()) + 1.0;
    (levels.log2().ceil() as u32).max(1)
}

/// Canonical: every off-peak non-zero lies on the outer boundary of the
/// correlation box and none exceeds the edge value. Quasi: no off-peak
/// magnitude exceeds the edge value.
fn classification(c: &CorrelationResult) -> Classification {
    let Some(edge) = c.edge else {
        return if c.off_peak_max.to_f64() == 0.0 && c.peak.to_f64() != 0.0 {
            Classification::Canonical
        } else {
            Classification::Other
        };
    };
    let limit = edge.to_f64().abs();
    if c.off_peak_max.to_f64() > limit {
        return Classification::Other;
    }
    let shape = c.values.shape();
    let centre = c.centre_index();
    let interior_clear = (0..c.values.len()).all(|k| {
        if k == centre || !c.values.is_nonzero(k) {
            return true;
        }
        let idx = c.values.unravel(k);
        idx.iter().zip(shape).any(|(&i, &n)| i == 0 || i + 1 == n)
    });
    if interior_clear {
        Classification::Canonical
    } else {
        Classification::Quasi
    }
}

/// Full report from a precomputed auto-correlation of `a`.
pub fn report_from(a: &Tensor, c: &CorrelationResult) -> QualityReport {
    let zero = if c.values.is_integer() {
        Scalar::Int(0)
    } else {
        Scalar::Real(0.0)
    };
    QualityReport {
        m: merit_factor(c),
        r: side_lobe_ratio(c),
        e: efficiency(a),
        p: power(a),
        s: spectral_flatness(a),
        c0: c.peak,
        c_edge: c.edge.unwrap_or(zero),
        op: c.op.unwrap_or(c.off_peak_max),
        off_peak_max: c.off_peak_max,
        bits: bits(a),
        classification: classification(c),
    }
}

/// Auto-correlate `a` and report every measure.
pub fn classify(a: &Tensor) -> Result<QualityReport> {
    let c = correlate(a, a)?;
    Ok(report_from(a, &c))
}

/// Peak and side-lobe measures of a cross-correlation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossReport {
    /// Largest magnitude anywhere.
    pub peak: f64,
    /// Shift at which `peak` occurs.
    pub peak_shift: [isize; 1],
    /// `peak` over the largest magnitude away from the peak shift and its mirror.
    pub r: f64,
    /// `peak^2` over the energy of every other entry.
    pub m: f64,
}

/// Cross-correlation measures for two 1D arrays of equal length.
///
/// With no zero-shift peak to anchor on, the largest magnitude plays the role of
/// `C0`; the mirror shift is excluded from the side-lobe search because a pair of
/// twins correlates symmetrically about zero shift.
pub fn cross_metrics(a: &Tensor, b: &Tensor) -> Result<CrossReport> {
    let c = correlate(a, b)?;
    let v = c.values.to_f64_vec();
    let (kmax, peak) = v.iter().enumerate().fold(
        (0, 0.0f64),
        |(bk, bv), (k, x)| if x.abs() > bv { (k, x.abs()) } else { (bk, bv) },
    );
    let shift = c.shift_of(kmax);
    let mirror: Vec<isize> = shift.iter().map(|s| -s).collect();
    let mirror_idx = c.index_of(&mirror);
    let side = v
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != kmax && Some(*k) != mirror_idx)
        .fold(0.0f64, |m, (_, x)| m.max(x.abs()));
    let energy: f64 = v.iter().map(|x| x * x).sum::<f64>() - peak * peak;
    Ok(CrossReport {
        peak,
        peak_shift: [shift.first().copied().unwrap_or(0)],
        r: ratio(peak, side),
        m: ratio(peak * peak, energy),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{catalog, fibonacci_huffman};

    #[test]
    fn h9_metrics() {
        let r = classify(&catalog("H9").unwrap()).unwrap();
        assert_eq!(r.m, 1024.0);
        assert_eq!(r.r, 64.0);
        assert_eq!(r.c0, Scalar::Int(64));
        assert_eq!(r.classification, Classification::Quasi);
        assert!((r.s - 0.044).abs() < 0.002, "S = {}", r.s);
    }

    #[test]
    fn h8_metrics() {
        let r = classify(&catalog("H8").unwrap()).unwrap();
        assert_eq!(r.r, 24.5);
        assert!((r.m - 100.0).abs() < 0.05, "M = {}", r.m);
        assert_eq!(r.bits, 3);
    }

    #[test]
    fn canonical_sequences() {
        for n in [7, 11, 15] {
            let h = fibonacci_huffman(n, 2).unwrap();
            let r = classify(&h).unwrap();
            let c0 = r.c0.to_f64();
            assert_eq!(r.classification, Classification::Canonical);
            assert_eq!(r.r, c0);
            assert_eq!(r.m, c0 * c0 / 2.0);
        }
    }

    #[test]
    fn impulse_is_perfect() {
        let r = classify(&Tensor::impulse(2)).unwrap();
        assert!(r.m.is_infinite() && r.r.is_infinite());
        assert_eq!(r.s, 0.0);
        assert_eq!(r.classification, Classification::Canonical);
        assert!(r.to_json().contains("\"M\": \"inf\""));
    }

    #[test]
    fn simple_measures() {
        assert_eq!(efficiency(&Tensor::ints_1d(&[1, 0, 1, 0]).unwrap()), 0.5);
        assert_eq!(power(&Tensor::ints_1d(&[3, 3, 3]).unwrap()), 1.0);
        assert_eq!(bits(&Tensor::ints_1d(&[1]).unwrap()), 1);
        assert_eq!(bits(&Tensor::ints_1d(&[-7, 8]).unwrap()), 4);
        assert_eq!(bits(&Tensor::ints_1d(&[-7, 9]).unwrap()), 5);
    }

    #[test]
    fn supplemental_two_dimensional_examples() {
        let five = classify(&catalog("H5x5").unwrap()).unwrap();
        assert!((five.r - 75.5).abs() < 0.05);
        assert!((five.m - 518.2).abs() < 0.5);
        let a = classify(&catalog("H7x7A").unwrap()).unwrap();
        assert!((a.r - 221.7).abs() < 0.1);
        assert!((a.e - 0.753).abs() < 3e-3);
        assert!((a.p - 0.398).abs() < 5e-4);
        let b = classify(&catalog("H7x7B").unwrap()).unwrap();
        // sqrt(3692 / 49) / 36; the published figure reads 0.214.
        assert!((b.p - 0.2411).abs() < 5e-4);
    }

    #[test]
    fn json_field_names() {
        let r = classify(&catalog("H9").unwrap()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["M", "R", "E", "P", "S", "C0", "Cedge", "OP", "bits", "class"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["class"], "quasi");
    }

    #[test]
    fn r_times_off_peak_is_c0() {
        let r = classify(&catalog("H7x7B").unwrap()).unwrap();
        assert_eq!(r.r * r.off_peak_max.to_f64(), r.c0.to_f64());
    }
}
