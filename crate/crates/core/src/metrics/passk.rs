use crate::{Error, Result};

/// Unbiased pass@k estimate from `n` samples of which `c` are correct:
/// `1 - C(n-c, k) / C(n, k)`, evaluated as a running product so large `n`
/// never overflows.
pub fn pass_at_k(n: usize, c: usize, k: usize) -> Result<f64> {
    if c > n {
        return Err(Error::Metric(format!("pass@k: c = {c} exceeds n = {n}")));
    }
    if k == 0 || k > n {
        return Err(Error::Metric(format!("pass@k: k = {k} must lie in 1..={n}")));
    }
    if n - c < k {
        return Ok(1.0);
    }
    let mut miss = 1.0f64;
    for i in 0..k {
        miss *= (n - c - i) as f64 / (n - i) as f64;
    }
    Ok(1.0 - miss)
}
