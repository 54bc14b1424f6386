//! Flat `key=value` construction recipes.
//!
//! `family=fibonacci_binet N=15 b=2`, `family=h5_family n=2 odd=false`,
//! `family=catalog key=H9`, `family=diamond5 alphabet=0,1,4,28,99`,
//! `family=diamond7 e=3 f=20` (optionally `g=` and `h=`),
//! `family=even_length key=H8`, and
//! `family=outer_product rank=2 seed=fibonacci_binet N=27 b=2`, where every key
//! after `seed` describes the 1D seed.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::catalog::catalog;
use super::diophantine::{build_diamond, diamond7_closed_form, diamond7_solve_with, DEFAULT_BOUND};
use super::fibonacci::{fibonacci_huffman, h5_family, h5_family_odd};
use crate::error::{Error, Result};
use crate::lattice::{outer_product, Tensor};
use crate::metrics::classify;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HuffmanSpec {
    FibonacciBinet {
        len: usize,
        b: i64,
    },
    H5Family {
        n: i64,
        odd: bool,
    },
    Catalog {
        key: String,
    },
    OuterProduct {
        seed: Box<HuffmanSpec>,
        rank: usize,
    },
    Diamond5 {
        alphabet: Vec<i64>,
    },
    /// `g` and `h` default to the closed form when it applies, else the best searched pair.
    Diamond7 {
        e: i64,
        f: i64,
        g: Option<i64>,
        h: Option<i64>,
    },
    EvenLength {
        key: String,
    },
}

fn take<T: FromStr>(kv: &mut BTreeMap<String, String>, key: &str) -> Result<T> {
    let raw = kv
        .remove(key)
        .ok_or_else(|| Error::InvalidSpec(format!("missing {key}=")))?;
    raw.parse()
        .map_err(|_| Error::InvalidSpec(format!("bad value {key}={raw}")))
}

fn take_opt<T: FromStr>(kv: &mut BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    if kv.contains_key(key) {
        take(kv, key).map(Some)
    } else {
        Ok(None)
    }
}

fn parse_list(raw: &str) -> Result<Vec<i64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("bad alphabet entry {s:?}")))
        })
        .collect()
}

impl HuffmanSpec {
    fn from_pairs(family: &str, kv: &mut BTreeMap<String, String>) -> Result<HuffmanSpec> {
        let spec = match family {
            "fibonacci_binet" | "fibonacci" => HuffmanSpec::FibonacciBinet {
                len: take(kv, "N")?,
                b: take_opt(kv, "b")?.unwrap_or(2),
            },
            "h5_family" => HuffmanSpec::H5Family {
                n: take(kv, "n")?,
                odd: take_opt(kv, "odd")?.unwrap_or(false),
            },
            "catalog" => HuffmanSpec::Catalog { key: take(kv, "key")? },
            "even_length" => HuffmanSpec::EvenLength { key: take(kv, "key")? },
            "diamond5" => HuffmanSpec::Diamond5 {
                alphabet: parse_list(&take::<String>(kv, "alphabet")?)?,
            },
            "diamond7" => HuffmanSpec::Diamond7 {
                e: take(kv, "e")?,
                f: take(kv, "f")?,
                g: take_opt(kv, "g")?,
                h: take_opt(kv, "h")?,
            },
            "outer_product" => {
                let rank = take(kv, "rank")?;
                let seed: String = take(kv, "seed")?;
                HuffmanSpec::OuterProduct {
                    seed: Box::new(HuffmanSpec::from_pairs(&seed, kv)?),
                    rank,
                }
            }
            other => return Err(Error::InvalidSpec(format!("unknown family {other:?}"))),
        };
        Ok(spec)
    }

    /// Build the array this spec describes.
    pub fn generate(&self) -> Result<Tensor> {
        match self {
            HuffmanSpec::FibonacciBinet { len, b } => fibonacci_huffman(*len, *b),
            HuffmanSpec::H5Family { n, odd: false } => h5_family(*n),
            HuffmanSpec::H5Family { n, odd: true } => h5_family_odd(*n),
            HuffmanSpec::Catalog { key } => catalog(key),
            HuffmanSpec::EvenLength { key } => {
                let t = catalog(key)?;
                if t.shape().iter().any(|n| n % 2 != 0) {
                    return Err(Error::InvalidSpec(format!("{key} is not an even-length entry")));
                }
                Ok(t)
            }
            HuffmanSpec::OuterProduct { seed, rank } => {
                if *rank == 0 {
                    return Err(Error::InvalidSpec("rank must be at least 1".into()));
                }
                let s = seed.generate()?;
                if s.ndim() != 1 {
                    return Err(Error::DimensionMismatch(1, s.ndim()));
                }
                outer_product(&vec![s; *rank])
            }
            HuffmanSpec::Diamond5 { alphabet } => build_diamond(5, alphabet),
            HuffmanSpec::Diamond7 { e, f, g, h } => {
                let (g, h) = match (g, h) {
                    (Some(g), Some(h)) => (*g, *h),
                    _ => diamond7_default(*e, *f, *g)?,
                };
                build_diamond(7, &[1, *e, *f, g, h])
            }
        }
    }
}

/// Closed-form `(g, h)` when it applies, otherwise the searched pair with the largest `R`.
fn diamond7_default(e: i64, f: i64, g: Option<i64>) -> Result<(i64, i64)> {
    if e == 3 && g.is_none() {
        if let Some(gh) = diamond7_closed_form(f) {
            return Ok(gh);
        }
    }
    let g_range = g.map_or((1, DEFAULT_BOUND), |g| (g, g));
    let mut best: Option<((i64, i64), f64)> = None;
    for sol in diamond7_solve_with(1, e, (f, f), g_range, (1, DEFAULT_BOUND))? {
        let (g, h) = (sol.alphabet[6], sol.alphabet[7]);
        let r = classify(&build_diamond(7, &[1, e, f, g, h])?)?.r;
        if best.is_none_or(|(_, br)| r > br) {
            best = Some(((g, h), r));
        }
    }
    best.map(|(gh, _)| gh)
        .ok_or_else(|| Error::Constraint(format!("no quasi-Huffman (g, h) for e = {e}, f = {f}")))
}

impl FromStr for HuffmanSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut family = None;
        let mut kv = BTreeMap::new();
        for token in s.split_whitespace() {
            let (k, v) = token
                .split_once('=')
                .ok_or_else(|| Error::InvalidSpec(format!("expected key=value, got {token:?}")))?;
            if k == "family" {
                family = Some(v.to_string());
            } else if kv.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::InvalidSpec(format!("duplicate key {k}")));
            }
        }
        let family = family.ok_or_else(|| Error::InvalidSpec("missing family=".into()))?;
        let spec = HuffmanSpec::from_pairs(&family, &mut kv)?;
        if let Some(k) = kv.keys().next() {
            return Err(Error::InvalidSpec(format!("unused key {k}=")));
        }
        Ok(spec)
    }
}

impl HuffmanSpec {
    fn write_pairs(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HuffmanSpec::FibonacciBinet { len, b } => write!(f, "fibonacci_binet N={len} b={b}"),
            HuffmanSpec::H5Family { n, odd } => write!(f, "h5_family n={n} odd={odd}"),
            HuffmanSpec::Catalog { key } => write!(f, "catalog key={key}"),
            HuffmanSpec::EvenLength { key } => write!(f, "even_length key={key}"),
            HuffmanSpec::Diamond5 { alphabet } => {
                let list: Vec<String> = alphabet.iter().map(i64::to_string).collect();
                write!(f, "diamond5 alphabet={}", list.join(","))
            }
            HuffmanSpec::Diamond7 { e, f: ff, g, h } => {
                write!(f, "diamond7 e={e} f={ff}")?;
                if let Some(g) = g {
                    write!(f, " g={g}")?;
                }
                if let Some(h) = h {
                    write!(f, " h={h}")?;
                }
                Ok(())
            }
            HuffmanSpec::OuterProduct { seed, rank } => {
                write!(f, "outer_product rank={rank} seed=")?;
                seed.write_pairs(f)
            }
        }
    }
}

impl fmt::Display for HuffmanSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("family=")?;
        self.write_pairs(f)
    }
}

/// Outer product of the arrays built from 1D specs.
pub fn tensor_huffman(specs: &[HuffmanSpec]) -> Result<Tensor> {
    let factors = specs.iter().map(HuffmanSpec::generate).collect::<Result<Vec<_>>>()?;
    outer_product(&factors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::correlate;

    #[test]
    fn parse_display_round_trip() {
        for text in [
            "family=fibonacci_binet N=15 b=2",
            "family=h5_family n=-2 odd=true",
            "family=catalog key=H9",
            "family=diamond5 alphabet=0,1,4,28,99",
            "family=diamond7 e=3 f=20 g=202 h=1030",
            "family=outer_product rank=3 seed=fibonacci_binet N=7 b=2",
        ] {
            let spec: HuffmanSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
            assert_eq!(spec.generate().unwrap(), spec.generate().unwrap());
        }
    }

    #[test]
    fn parse_errors() {
        assert!("N=15".parse::<HuffmanSpec>().is_err());
        assert!("family=fibonacci_binet".parse::<HuffmanSpec>().is_err());
        assert!("family=catalog key=H9 extra=1".parse::<HuffmanSpec>().is_err());
        assert!("family=nope".parse::<HuffmanSpec>().is_err());
        assert!("family=fibonacci_binet N=9 b=2"
            .parse::<HuffmanSpec>()
            .unwrap()
            .generate()
            .is_err());
    }

    #[test]
    fn diamond7_defaults() {
        let t: HuffmanSpec = "family=diamond7 e=3 f=20".parse().unwrap();
        let a = t.generate().unwrap();
        assert_eq!(a.at(&[3, 3]).as_int(), Some(1020));
        assert_eq!(a.at(&[2, 3]).as_int(), Some(201));
        let e1: HuffmanSpec = "family=diamond7 e=1 f=1".parse().unwrap();
        assert_eq!(e1.generate().unwrap().at(&[3, 3]).as_int(), Some(3));
    }

    #[test]
    fn cube_of_h7() {
        let spec = HuffmanSpec::FibonacciBinet { len: 7, b: 2 };
        let cube = tensor_huffman(&[spec.clone(), spec.clone(), spec]).unwrap();
        assert_eq!(cube.shape(), &[7, 7, 7]);
        let c = correlate(&cube, &cube).unwrap();
        assert_eq!(c.peak.as_int(), Some(5832));
    }

    #[test]
    fn even_length_only_accepts_even_entries() {
        assert!(HuffmanSpec::EvenLength { key: "H8x8".into() }.generate().is_ok());
        assert!(HuffmanSpec::EvenLength { key: "H9".into() }.generate().is_err());
    }
}
