use crate::error::{Error, Result};
use crate::lattice::{correlate, Scalar, Tensor};

fn check_upscaling(b: i64) -> Result<()> {
    if b < 2 || b % 2 != 0 {
        return Err(Error::InvalidSpec(format!(
            "up-scaling b must be even and at least 2, got {b}"
        )));
    }
    Ok(())
}

/// Term `u_n` of `u_{n+1} = (b/2) u_n + u_{n-1}`, `u_0 = 0`, `u_1 = 1`, for any signed `n`.
///
/// `b = 2` gives the Fibonacci numbers and `b = 4` the Pell numbers. Negative
/// indices follow `u_{-n} = (-1)^{n+1} u_n`.
pub fn generalized_fibonacci(b: i64, n: i64) -> Result<i128> {
    check_upscaling(b)?;
    let p = (b / 2) as i128;
    let m = n.unsigned_abs();
    let (mut prev, mut cur) = (0i128, 1i128);
    if m == 0 {
        return Ok(0);
    }
    for _ in 1..m {
        let next = p
            .checked_mul(cur)
            .and_then(|v| v.checked_add(prev))
            .ok_or(Error::Overflow("generalized Fibonacci"))?;
        prev = cur;
        cur = next;
    }
    if n < 0 && m.is_multiple_of(2) {
        cur = -cur;
    }
    Ok(cur)
}

/// Closed (Binet) form of [`generalized_fibonacci`] in floating point.
pub fn binet(b: i64, n: i64) -> f64 {
    let p = b as f64 / 2.0;
    let root = (p * p + 4.0).sqrt();
    let alpha = (p + root) / 2.0;
    let beta = (p - root) / 2.0;
    (alpha.powi(n as i32) - beta.powi(n as i32)) / root
}

/// Canonical Huffman sequence of length `N = 4n + 3` from the up-scaled Fibonacci recurrence.
///
/// The left half is `b * [1/b, u_1, .., u_{M-1}]` with `M = (N-1)/2`, the right
/// half mirrors it with alternating asymmetric signs, and the middle element is
/// solved from the single even-shift constraint that still involves it.
pub fn fibonacci_huffman(len: usize, b: i64) -> Result<Tensor> {
    if len < 7 || len % 4 != 3 {
        return Err(Error::InvalidSpec(format!(
            "length must be 4n+3 with n >= 1, got {len}"
        )));
    }
    check_upscaling(b)?;
    let m = (len - 1) / 2;
    let mut left = vec![1i128];
    for k in 1..m as i64 {
        left.push(
            generalized_fibonacci(b, k)?
                .checked_mul(b as i128)
                .ok_or(Error::Overflow("sequence scaling"))?,
        );
    }
    let build = |x: i128| {
        let mut h = vec![0i128; len];
        for (i, &v) in left.iter().enumerate() {
            h[i] = v;
            h[len - 1 - i] = if i % 2 == 0 { -v } else { v };
        }
        h[m] = x;
        Tensor::from_i128(&[len], h)
    };
    let base = build(0)?;
    let x = solve_middle(base.ints()?, m)?;
    let h = build(x)?;
    let c = correlate(&h, &h)?;
    let ok = (0..c.values.len()).all(|k| {
        let s = c.shift_of(k)[0].unsigned_abs();
        let v = c.values.value(k);
        s == 0 || (s == len - 1 && v.abs() == Scalar::Int(1)) || v == Scalar::Int(0)
    });
    if !ok {
        return Err(Error::Constraint(format!(
            "length {len}, b = {b}: middle element {x} leaves off-peak correlation"
        )));
    }
    Ok(h)
}

/// Middle element making the first x-dependent even shift vanish.
fn solve_middle(h: &[i128], m: usize) -> Result<i128> {
    let n = h.len();
    let corr = |s: usize| -> Option<i128> {
        (0..n - s).try_fold(0i128, |acc, r| acc.checked_add(h[r].checked_mul(h[r + s])?))
    };
    for s in (2..n - 1).step_by(2) {
        // C(s) = A + x (h[m-s] + h[m+s]) for the sequence with x set to zero.
        let lo = if s <= m { h[m - s] } else { 0 };
        let hi = if m + s < n { h[m + s] } else { 0 };
        let slope = lo + hi;
        if slope == 0 {
            continue;
        }
        let a = corr(s).ok_or(Error::Overflow("middle element"))?;
        if a % slope != 0 {
            return Err(Error::Constraint(format!(
                "middle element {}/{} is not an integer",
                -a, slope
            )));
        }
        return Ok(-a / slope);
    }
    Err(Error::Constraint("no shift constrains the middle element".into()))
}

/// `[1, 2n, 2n^2, -2n, 1]`, auto-correlating to `[1,0,0,0,4n^4+8n^2+2,0,0,0,1]`.
pub fn h5_family(n: i64) -> Result<Tensor> {
    if n == 0 {
        return Err(Error::InvalidSpec("n = 0 gives a degenerate sequence".into()));
    }
    Tensor::ints_1d(&[1, 2 * n, 2 * n * n, -2 * n, 1])
}

/// `[1, 2n+1, 2n(n+1), -(2n+1), 1]`, the odd-valued companion family.
pub fn h5_family_odd(n: i64) -> Result<Tensor> {
    let k = 2 * n + 1;
    if n == 0 || n == -1 {
        return Err(Error::InvalidSpec(format!("n = {n} gives a degenerate sequence")));
    }
    Tensor::ints_1d(&[1, k, 2 * n * (n + 1), -k, 1])
}
