use crate::error::{Error, Result};
use crate::numeric::norm_quantile;

/// Tie-adjusted Kendall's tau (tau-b) in `O(n log n)` by Knight's method.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::invalid(format!("samples of length {n} and {}", y.len())));
    }
    if n < 2 {
        return Err(Error::invalid("Kendall's tau needs at least two observations"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let pairs = |k: u64| k * k.saturating_sub(1) / 2;
    let n0 = pairs(n as u64);
    // ties in x, and joint ties
    let (mut tx, mut txy) = (0u64, 0u64);
    let (mut run_x, mut run_xy) = (1u64, 1u64);
    for w in idx.windows(2) {
        let (a, b) = (w[0], w[1]);
        if x[a] == x[b] {
            run_x += 1;
            if y[a] == y[b] {
                run_xy += 1;
            } else {
                txy += pairs(run_xy);
                run_xy = 1;
            }
        } else {
            tx += pairs(run_x);
            txy += pairs(run_xy);
            run_x = 1;
            run_xy = 1;
        }
    }
    tx += pairs(run_x);
    txy += pairs(run_xy);

    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let swaps = merge_count(&mut ys);
    let mut ty = 0u64;
    let mut run = 1u64;
    for w in ys.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            ty += pairs(run);
            run = 1;
        }
    }
    ty += pairs(run);

    let denom = ((n0 - tx) as f64 * (n0 - ty) as f64).sqrt();
    if denom == 0.0 {
        return Err(Error::DegenerateData("constant sample; Kendall's tau undefined".into()));
    }
    let num = n0 as f64 - tx as f64 - ty as f64 + txy as f64 - 2.0 * swaps as f64;
    Ok((num / denom).clamp(-1.0, 1.0))
}

/// Sorts `v` ascending and returns the number of inversions.
fn merge_count(v: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mut buf = v.to_vec();
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid && j < hi {
                if v[j] < v[i] {
                    swaps += (mid - i) as u64;
                    buf[k] = v[j];
                    j += 1;
                } else {
                    buf[k] = v[i];
                    i += 1;
                }
                k += 1;
            }
            buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
            k += mid - i;
            buf[k..k + hi - j].copy_from_slice(&v[j..hi]);
            lo = hi;
        }
        v.copy_from_slice(&buf);
        width *= 2;
    }
    swaps
}

/// Asymptotic normal test statistic `|tau| sqrt(9n(n-1) / (2(2n+5)))`.
pub fn independence_statistic(tau: f64, n: usize) -> f64 {
    let n = n as f64;
    tau.abs() * (9.0 * n * (n - 1.0) / (2.0 * (2.0 * n + 5.0))).sqrt()
}

/// Whether independence of `u` and `v` is rejected at level `alpha`.
pub fn independence_test(u: &[f64], v: &[f64], alpha: f64) -> Result<bool> {
    check_alpha(alpha)?;
    if u.len() < 10 {
        return Err(Error::invalid(format!("independence test needs n >= 10, got {}", u.len())));
    }
    let tau = kendall_tau(u, v)?;
    Ok(reject_independence(tau, u.len(), alpha))
}

pub(crate) fn reject_independence(tau: f64, n: usize, alpha: f64) -> bool {
    independence_statistic(tau, n) > norm_quantile(1.0 - alpha / 2.0)
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("alpha = {alpha} must lie in (0, 1)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // O(n^2) tau-b straight from the definition
    fn tau_b_naive(x: &[f64], y: &[f64]) -> f64 {
        let (mut s, mut nx, mut ny) = (0.0, 0.0, 0.0);
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                let a = (x[i] - x[j]).signum() * ((x[i] != x[j]) as i32 as f64);
                let b = (y[i] - y[j]).signum() * ((y[i] != y[j]) as i32 as f64);
                s += a * b;
                nx += a * a;
                ny += b * b;
            }
        }
        s / (nx * ny).sqrt()
    }

    #[test]
    fn matches_naive_with_ties() {
        let x = [1.0, 2.0, 2.0, 3.0, 5.0, 5.0, 5.0, 0.0, 4.0];
        let y = [2.0, 1.0, 1.0, 3.0, 3.0, 4.0, 0.0, 0.0, 2.0];
        assert!((kendall_tau(&x, &y).unwrap() - tau_b_naive(&x, &y)).abs() < 1e-12);
        let x: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64).collect();
        let y: Vec<f64> = (0..50).map(|i| ((i * 13) % 7) as f64).collect();
        assert!((kendall_tau(&x, &y).unwrap() - tau_b_naive(&x, &y)).abs() < 1e-12);
    }

    #[test]
    fn extremes() {
        let x = [0.1, 0.4, 0.2, 0.9];
        assert_eq!(kendall_tau(&x, &x).unwrap(), 1.0);
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(kendall_tau(&x, &y).unwrap(), -1.0);
        assert!(matches!(kendall_tau(&x, &[1.0; 4]), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn zero_tau_not_rejected() {
        assert!(!reject_independence(0.0, 1000, 0.05));
        assert!(reject_independence(0.2, 1000, 0.05));
        assert!(independence_test(&[0.5; 5], &[0.5; 5], 0.05).is_err());
        assert!(check_alpha(1.0).is_err());
    }
}
