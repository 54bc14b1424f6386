//! Symbolic array templates and the exhaustive quasi-Huffman search over them.
//!
//! Template entries are affine forms in the alphabet, so every auto-correlation
//! entry is a quadratic form. Free variables are scanned in index order; a
//! constraint is checked as soon as every variable it mentions is assigned, and
//! the final variable is solved by interval intersection when it enters every
//! remaining constraint linearly (true for a centre element, which only pairs
//! with itself at zero shift).

use crate::error::{Error, Result};
use crate::lattice::Tensor;
use crate::metrics::{classify, Classification};

/// Largest magnitude accepted for any search bound or alphabet value.
pub const MAX_ALPHABET: i64 = 1 << 40;

/// Default half-width of each scanned range.
pub const DEFAULT_BOUND: i64 = 4096;

/// `constant + sum_k coefs[k] * var_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Linear {
    pub constant: i64,
    pub coefs: Vec<i64>,
}

/// `constant + sum_k linear[k] v_k + sum_{k,l} quadratic[k*n+l] v_k v_l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quadratic {
    pub constant: i128,
    pub linear: Vec<i128>,
    pub quadratic: Vec<i128>,
}

impl Quadratic {
    fn vars(&self) -> usize {
        self.linear.len()
    }

    pub fn eval(&self, v: &[i128]) -> i128 {
        let n = self.vars();
        let mut acc = self.constant;
        for k in 0..n {
            if v[k] == 0 {
                continue;
            }
            acc += self.linear[k] * v[k];
            for l in 0..n {
                acc += self.quadratic[k * n + l] * v[k] * v[l];
            }
        }
        acc
    }

    pub fn depends_on(&self, k: usize) -> bool {
        let n = self.vars();
        self.linear[k] != 0 || (0..n).any(|l| self.quadratic[k * n + l] != 0 || self.quadratic[l * n + k] != 0)
    }

    /// Fold fixed variables into the lower-order coefficients.
    pub fn substitute(&self, fixed: &[Option<i64>]) -> Quadratic {
        let n = self.vars();
        let mut out = Quadratic {
            constant: self.constant,
            linear: vec![0; n],
            quadratic: vec![0; n * n],
        };
        for k in 0..n {
            match fixed[k] {
                Some(x) => out.constant += self.linear[k] * x as i128,
                None => out.linear[k] += self.linear[k],
            }
            for l in 0..n {
                let q = self.quadratic[k * n + l];
                match (fixed[k], fixed[l]) {
                    (Some(x), Some(y)) => out.constant += q * x as i128 * y as i128,
                    (Some(x), None) => out.linear[l] += q * x as i128,
                    (None, Some(y)) => out.linear[k] += q * y as i128,
                    (None, None) => out.quadratic[k * n + l] += q,
                }
            }
        }
        out
    }

    fn square_coef(&self, k: usize) -> i128 {
        self.quadratic[k * self.vars() + k]
    }
}

/// A symbolic array over a named alphabet.
#[derive(Clone, Debug)]
pub struct Template {
    pub shape: Vec<usize>,
    pub names: Vec<&'static str>,
    pub entries: Vec<Linear>,
}

fn parse_template(shape: &[usize], names: &[&'static str], cells: &[&str]) -> Template {
    let entries = cells
        .iter()
        .map(|cell| {
            let mut coefs = vec![0i64; names.len()];
            let mut constant = 0;
            for term in cell.split('+') {
                let term = term.trim();
                let (sign, body) = match term.strip_prefix('-') {
                    Some(rest) => (-1, rest),
                    None => (1, term),
                };
                let (k, var) = match body.find(|c: char| c.is_ascii_alphabetic()) {
                    Some(0) => (1, body),
                    Some(p) => (body[..p].parse::<i64>().expect("template coefficient"), &body[p..]),
                    None => {
                        constant += sign * body.parse::<i64>().expect("template constant");
                        continue;
                    }
                };
                let idx = names.iter().position(|n| *n == var).expect("template variable");
                coefs[idx] += sign * k;
            }
            Linear { constant, coefs }
        })
        .collect();
    Template {
        shape: shape.to_vec(),
        names: names.to_vec(),
        entries,
    }
}

impl Template {
    /// 5x5 transpose-symmetric template over `[a, b, c, x, d, e]`.
    pub fn diamond5() -> Template {
        parse_template(
            &[5, 5],
            &["a", "b", "c", "x", "d", "e"],
            &[
                "a", "b", "c", "-b", "a", //
                "b", "x", "d", "-x", "b", //
                "c", "d", "e", "-d", "c", //
                "-b", "-x", "-d", "x", "-b", //
                "a", "b", "c", "-b", "a",
            ],
        )
    }

    /// 7x7 transpose-symmetric template over `[a, b, c, d, e, f, g, h]`.
    ///
    /// With `a = b = c = 0` it reduces to the diamond pattern whose only free
    /// entries are `d, e, f, g, h`.
    pub fn diamond7() -> Template {
        parse_template(
            &[7, 7],
            &["a", "b", "c", "d", "e", "f", "g", "h"],
            &[
                "a", "b", "c", "d", "-c", "b", "-a", //
                "b", "2c", "e", "f", "-e", "2c", "-b", //
                "c", "e", "2c+2f", "g", "-2c+-2f", "e", "-c", //
                "d", "f", "g", "h", "-g", "f", "-d", //
                "-c", "-e", "-2c+-2f", "-g", "2c+2f", "-e", "c", //
                "b", "2c", "e", "f", "-e", "2c", "-b", //
                "-a", "-b", "-c", "-d", "c", "-b", "a",
            ],
        )
    }

    pub fn instantiate(&self, values: &[i64]) -> Result<Tensor> {
        if values.len() != self.names.len() {
            return Err(Error::InvalidSpec(format!(
                "template needs {} alphabet values, got {}",
                self.names.len(),
                values.len()
            )));
        }
        let flat: Vec<i128> = self
            .entries
            .iter()
            .map(|l| {
                l.constant as i128
                    + l.coefs
                        .iter()
                        .zip(values)
                        .map(|(&c, &v)| c as i128 * v as i128)
                        .sum::<i128>()
            })
            .collect();
        Tensor::from_i128(&self.shape, flat)
    }

    /// Symbolic auto-correlation: one quadratic per shift, zero shift included.
    pub fn autocorrelation(&self) -> Vec<(Vec<isize>, Quadratic)> {
        let n = self.names.len();
        let probe = Tensor::zeros_int(&self.shape).expect("template shape");
        let ndim = self.shape.len();
        let out_shape: Vec<usize> = self.shape.iter().map(|s| 2 * s - 1).collect();
        let out = Tensor::zeros_int(&out_shape).expect("template shape");
        let mut polys = vec![
            Quadratic {
                constant: 0,
                linear: vec![0; n],
                quadratic: vec![0; n * n],
            };
            out.len()
        ];
        for (ra, la) in self.entries.iter().enumerate() {
            let ia = probe.unravel(ra);
            for (rb, lb) in self.entries.iter().enumerate() {
                let ib = probe.unravel(rb);
                let idx: Vec<usize> = (0..ndim).map(|d| ib[d] + self.shape[d] - 1 - ia[d]).collect();
                let q = &mut polys[out.ravel(&idx)];
                q.constant += la.constant as i128 * lb.constant as i128;
                for k in 0..n {
                    q.linear[k] +=
                        la.constant as i128 * lb.coefs[k] as i128 + lb.constant as i128 * la.coefs[k] as i128;
                    for l in 0..n {
                        q.quadratic[k * n + l] += la.coefs[k] as i128 * lb.coefs[l] as i128;
                    }
                }
            }
        }
        polys
            .into_iter()
            .enumerate()
            .map(|(k, q)| {
                let shift = out
                    .unravel(k)
                    .iter()
                    .zip(&self.shape)
                    .map(|(&i, &s)| i as isize - (s as isize - 1))
                    .collect();
                (shift, q)
            })
            .collect()
    }
}

struct Scan<'a> {
    stages: Vec<Vec<&'a Quadratic>>,
    free: Vec<usize>,
    ranges: Vec<(i64, i64)>,
    limit: i128,
    values: Vec<i128>,
    last_affine: bool,
    found: Vec<Vec<i64>>,
}

impl Scan<'_> {
    /// `(alpha, beta, gamma)` of a stage polynomial as a function of free variable `pos`.
    fn coefficients(&mut self, q: &Quadratic, pos: usize) -> (i128, i128, i128) {
        let k = self.free[pos];
        self.values[k] = 0;
        let alpha = q.eval(&self.values);
        self.values[k] = 1;
        let p1 = q.eval(&self.values);
        self.values[k] = -1;
        let m1 = q.eval(&self.values);
        self.values[k] = 0;
        ((alpha), (p1 - m1) / 2, (p1 + m1) / 2 - alpha)
    }

    fn run(&mut self, pos: usize) {
        let k = self.free[pos];
        let stage: Vec<&Quadratic> = self.stages[pos].clone();
        let coefs: Vec<(i128, i128, i128)> = stage.iter().map(|q| self.coefficients(q, pos)).collect();
        let (lo, hi) = self.ranges[k];
        let last = pos + 1 == self.free.len();
        if last && self.last_affine {
            let (mut lo, mut hi) = (lo as i128, hi as i128);
            for &(a, b, _) in &coefs {
                if b == 0 {
                    if a.abs() > self.limit {
                        return;
                    }
                    continue;
                }
                // -limit <= a + b x <= limit
                let (p, q) = ((-self.limit - a), (self.limit - a));
                let (l, u) = if b > 0 {
                    (div_ceil(p, b), div_floor(q, b))
                } else {
                    (div_ceil(q, b), div_floor(p, b))
                };
                lo = lo.max(l);
                hi = hi.min(u);
                if lo > hi {
                    return;
                }
            }
            for x in lo..=hi {
                self.values[k] = x;
                self.found.push(self.values.iter().map(|&v| v as i64).collect());
            }
            self.values[k] = 0;
            return;
        }
        for x in lo..=hi {
            let x = x as i128;
            if coefs
                .iter()
                .all(|&(a, b, g)| (a + b * x + g * x * x).abs() <= self.limit)
            {
                self.values[k] = x;
                if last {
                    self.found.push(self.values.iter().map(|&v| v as i64).collect());
                } else {
                    self.run(pos + 1);
                }
            }
        }
        self.values[k] = 0;
    }
}

fn div_floor(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i128, b: i128) -> i128 {
    -div_floor(-a, b)
}

/// Every assignment of the free (`None`) variables within `ranges` that keeps each
/// off-peak auto-correlation magnitude at or below the magnitude at `edge_shift`.
///
/// The edge value must depend on fixed variables only. Results are in
/// lexicographic order of the free variables.
pub fn solve_quasi(
    template: &Template,
    fixed: &[Option<i64>],
    ranges: &[(i64, i64)],
    edge_shift: &[isize],
) -> Result<Vec<Vec<i64>>> {
    let n = template.names.len();
    if fixed.len() != n || ranges.len() != n {
        return Err(Error::InvalidSpec(format!("expected {n} fixed values and ranges")));
    }
    let in_bounds = |v: i64| v.abs() <= MAX_ALPHABET;
    if fixed.iter().flatten().any(|&v| !in_bounds(v)) || ranges.iter().any(|&(lo, hi)| !in_bounds(lo) || !in_bounds(hi))
    {
        return Err(Error::InvalidSpec(format!("alphabet bounds exceed {MAX_ALPHABET}")));
    }
    let polys: Vec<(Vec<isize>, Quadratic)> = template
        .autocorrelation()
        .into_iter()
        .map(|(s, q)| (s, q.substitute(fixed)))
        .collect();
    let free: Vec<usize> = (0..n).filter(|&k| fixed[k].is_none()).collect();
    let values: Vec<i128> = fixed.iter().map(|v| v.unwrap_or(0) as i128).collect();
    let edge = polys
        .iter()
        .find(|(s, _)| s.as_slice() == edge_shift)
        .map(|(_, q)| q)
        .ok_or_else(|| Error::InvalidSpec(format!("edge shift {edge_shift:?} outside template")))?;
    if free.iter().any(|&k| edge.depends_on(k)) {
        return Err(Error::InvalidSpec("edge correlation depends on a free variable".into()));
    }
    let limit = edge.eval(&values).abs();
    let mut stages: Vec<Vec<&Quadratic>> = vec![Vec::new(); free.len()];
    for (shift, q) in &polys {
        if shift.iter().all(|&s| s == 0) {
            continue;
        }
        match free.iter().rposition(|&k| q.depends_on(k)) {
            Some(stage) => stages[stage].push(q),
            None => {
                if q.eval(&values).abs() > limit {
                    return Ok(Vec::new());
                }
            }
        }
    }
    if free.is_empty() {
        return Ok(vec![fixed.iter().map(|v| v.unwrap_or(0)).collect()]);
    }
    let last = *free.last().unwrap_or(&0);
    let last_affine = stages[free.len() - 1].iter().all(|q| q.square_coef(last) == 0);
    let mut scan = Scan {
        stages,
        free,
        ranges: ranges.to_vec(),
        limit,
        values,
        last_affine,
        found: Vec::new(),
    };
    scan.run(0);
    Ok(scan.found)
}

/// One alphabet that satisfies the quasi-Huffman constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphabetSolution {
    pub names: Vec<&'static str>,
    pub alphabet: Vec<i64>,
    pub c_edge: i128,
    pub classification: Classification,
    /// Member of the closed-form `g = f^2/2 + 1`, `h = f^3/8 + f` family.
    pub closed_form: bool,
}

impl AlphabetSolution {
    pub fn value(&self, name: &str) -> Option<i64> {
        self.names.iter().position(|n| *n == name).map(|k| self.alphabet[k])
    }
}

fn verified(template: &Template, alphabet: Vec<i64>) -> Result<Option<AlphabetSolution>> {
    let t = template.instantiate(&alphabet)?;
    let report = classify(&t)?;
    if report.classification == Classification::Other {
        return Ok(None);
    }
    let closed_form = template.shape == [7, 7] && {
        let v = |k: usize| alphabet[k];
        let (a, b, c, d, e, f, g, h) = (v(0), v(1), v(2), v(3), v(4), v(5), v(6), v(7));
        a == 0 && b == 0 && c == 0 && d == 1 && e == 3 && diamond7_closed_form(f) == Some((g, h))
    };
    Ok(Some(AlphabetSolution {
        names: template.names.clone(),
        alphabet,
        c_edge: report.c_edge.as_int().unwrap_or(0),
        classification: report.classification,
        closed_form,
    }))
}

/// `(d, e)` pairs making the 5x5 template quasi-Huffman for fixed `[a, b, c]`.
///
/// `x` defaults to `2c`; `d` and `e` range over `[-bound, bound]`.
pub fn diamond5_solve(abc: [i64; 3], x: Option<i64>, bound: i64) -> Result<Vec<AlphabetSolution>> {
    let [a, b, c] = abc;
    let x = x.unwrap_or(2 * c);
    let template = Template::diamond5();
    let fixed = [Some(a), Some(b), Some(c), Some(x), None, None];
    let ranges = [(0, 0), (0, 0), (0, 0), (0, 0), (-bound, bound), (-bound, bound)];
    let raw = solve_quasi(&template, &fixed, &ranges, &[4, 0])?;
    raw.into_iter()
        .filter_map(|alpha| verified(&template, alpha).transpose())
        .collect()
}

/// `g = f^2/2 + 1`, `h = f^3/8 + f` for even `f` (the `d = 1`, `e = 3` family).
pub fn diamond7_closed_form(f: i64) -> Option<(i64, i64)> {
    (f % 2 == 0 && f != 0).then(|| (f * f / 2 + 1, f * f * f / 8 + f))
}

/// `(f, g, h)` triples for the 7x7 diamond with `d` and `e` fixed.
///
/// Each variable scans its own inclusive range; `f = 0` admits unbounded `h`, so
/// callers should keep `f` positive.
pub fn diamond7_solve_with(
    d: i64,
    e: i64,
    f_range: (i64, i64),
    g_range: (i64, i64),
    h_range: (i64, i64),
) -> Result<Vec<AlphabetSolution>> {
    let template = Template::diamond7();
    let fixed = [Some(0), Some(0), Some(0), Some(d), Some(e), None, None, None];
    let ranges = [(0, 0), (0, 0), (0, 0), (0, 0), (0, 0), f_range, g_range, h_range];
    let raw = solve_quasi(&template, &fixed, &ranges, &[3, 3])?;
    raw.into_iter()
        .filter_map(|alpha| verified(&template, alpha).transpose())
        .collect()
}

/// `d = 1`, positive `f` in `f_range`, `g` and `h` in `1..=DEFAULT_BOUND`.
pub fn diamond7_solve(e: i64, f_range: (i64, i64)) -> Result<Vec<AlphabetSolution>> {
    if e < 1 {
        return Err(Error::InvalidSpec(format!("e must be at least 1, got {e}")));
    }
    let f_range = (f_range.0.max(1), f_range.1);
    diamond7_solve_with(1, e, f_range, (1, DEFAULT_BOUND), (1, DEFAULT_BOUND))
}

/// Materialise a 5x5 or 7x7 diamond and recheck the quasi constraint.
///
/// 5x5 accepts `[a,b,c,d,e]` (with `x = 2c`) or `[a,b,c,x,d,e]`; 7x7 accepts
/// `[d,e,f,g,h]` (with `a = b = c = 0`) or `[a,b,c,d,e,f,g,h]`.
pub fn build_diamond(size: usize, alphabet: &[i64]) -> Result<Tensor> {
    let (template, full) = match (size, alphabet.len()) {
        (5, 5) => (
            Template::diamond5(),
            vec![
                alphabet[0],
                alphabet[1],
                alphabet[2],
                2 * alphabet[2],
                alphabet[3],
                alphabet[4],
            ],
        ),
        (5, 6) => (Template::diamond5(), alphabet.to_vec()),
        (7, 5) => (Template::diamond7(), [&[0, 0, 0][..], alphabet].concat()),
        (7, 8) => (Template::diamond7(), alphabet.to_vec()),
        _ => {
            return Err(Error::InvalidSpec(format!(
                "no {size}x{size} template takes {} alphabet values",
                alphabet.len()
            )))
        }
    };
    let t = template.instantiate(&full)?;
    let report = classify(&t)?;
    if report.classification == Classification::Other {
        return Err(Error::Constraint(format!(
            "alphabet {alphabet:?}: off-peak {} exceeds edge {}",
            report.off_peak_max, report.c_edge
        )));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::catalog;
    use crate::lattice::correlate;

    #[test]
    fn templates_instantiate_catalog_arrays() {
        let five = Template::diamond5().instantiate(&[0, 1, 2, 4, 7, 13]).unwrap();
        assert_eq!(five, catalog("H5x5").unwrap());
        let a = Template::diamond7().instantiate(&[0, 0, 1, 2, 6, 7, 17, 20]).unwrap();
        assert_eq!(a, catalog("H7x7A").unwrap());
        let b = Template::diamond7().instantiate(&[0, 0, 0, 1, 3, 6, 20, 36]).unwrap();
        assert_eq!(b, catalog("H7x7B").unwrap());
    }

    #[test]
    fn symbolic_correlation_matches_numeric() {
        let t = Template::diamond7();
        let alpha = [2i64, -1, 3, 1, 4, -5, 9, 7];
        let numeric = t.instantiate(&alpha).unwrap();
        let c = correlate(&numeric, &numeric).unwrap();
        let v: Vec<i128> = alpha.iter().map(|&x| x as i128).collect();
        for (shift, q) in t.autocorrelation() {
            assert_eq!(Some(crate::lattice::Scalar::Int(q.eval(&v))), c.at_shift(&shift));
        }
    }

    #[test]
    fn diamond7_e1_is_unique() {
        let sols = diamond7_solve(1, (1, 64)).unwrap();
        let fgh: Vec<(i64, i64, i64)> = sols
            .iter()
            .map(|s| (s.value("f").unwrap(), s.value("g").unwrap(), s.value("h").unwrap()))
            .collect();
        assert_eq!(fgh, vec![(1, 2, 3)]);
    }

    #[test]
    fn diamond5_family_for_0_1_4() {
        let sols = diamond5_solve([0, 1, 4], None, DEFAULT_BOUND).unwrap();
        let de: Vec<(i64, i64)> = sols
            .iter()
            .map(|s| (s.value("d").unwrap(), s.value("e").unwrap()))
            .collect();
        let expected = vec![
            (24, 74),
            (24, 75),
            (25, 80),
            (25, 81),
            (26, 86),
            (26, 87),
            (27, 92),
            (27, 93),
            (28, 98),
            (28, 99),
            (28, 100),
        ];
        assert_eq!(de, expected);
        assert!(sols.iter().all(|s| s.c_edge == 18));
    }

    #[test]
    fn closed_form_members_are_flagged() {
        let sols = diamond7_solve(3, (4, 4)).unwrap();
        let cf: Vec<_> = sols.iter().filter(|s| s.closed_form).collect();
        assert_eq!(cf.len(), 1);
        assert_eq!(cf[0].value("g"), Some(9));
        assert_eq!(cf[0].value("h"), Some(12));
        assert!(sols.iter().all(|s| s.c_edge.abs() == 20));
    }

    #[test]
    fn build_rejects_violations() {
        assert!(build_diamond(5, &[0, 1, 4, 28, 99]).is_ok());
        assert!(build_diamond(5, &[0, 1, 4, 28, 90]).is_err());
        assert!(build_diamond(7, &[1, 3, 4, 9, 12]).is_ok());
        assert!(build_diamond(6, &[1, 2, 3]).is_err());
    }

    #[test]
    fn interval_division_rounds_outward() {
        assert_eq!(div_floor(-7, 2), -4);
        assert_eq!(div_ceil(-7, 2), -3);
        assert_eq!(div_floor(7, -2), -4);
        assert_eq!(div_ceil(7, 2), 4);
    }
}
