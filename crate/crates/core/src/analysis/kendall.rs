use std::cmp::Ordering;

use serde::Serialize;
use statrs::function::erf::erfc;

use super::AnalysisError;

/// Kendall's τ-b with a two-sided p-value from the normal approximation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TauResult {
    pub tau: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Pair and tie statistics shared by both τ implementations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct PairCounts {
    n: usize,
    /// concordant − discordant
    score: i128,
    /// pairs tied in x (including joint ties)
    ties_x: u64,
    /// pairs tied in y (including joint ties)
    ties_y: u64,
    /// tie-group sizes, for the variance
    groups_x: Vec<u64>,
    groups_y: Vec<u64>,
}

fn check_inputs(x: &[f64], y: &[f64]) -> Result<(), AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(AnalysisError::TooShort(x.len()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }
    Ok(())
}

fn pairs(t: u64) -> u64 {
    t * t.saturating_sub(1) / 2
}

/// Sizes (> 1) of runs of equal values in a sorted sequence.
fn tie_groups<T: PartialEq>(sorted: impl Iterator<Item = T>) -> Vec<u64> {
    let mut groups = Vec::new();
    let mut prev: Option<T> = None;
    let mut run = 0u64;
    for v in sorted {
        if prev.as_ref() == Some(&v) {
            run += 1;
        } else {
            if run > 1 {
                groups.push(run);
            }
            run = 1;
            prev = Some(v);
        }
    }
    if run > 1 {
        groups.push(run);
    }
    groups
}

/// Sorts `v` in place, returning the number of inversions (pairs `i < j`
/// with `v[i] > v[j]`).
fn merge_sort_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_sort_count(l, bl) + merge_sort_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// O(n log n) counting (Knight's algorithm).
fn counts_fast(x: &[f64], y: &[f64]) -> PairCounts {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));
    let groups_x = tie_groups(order.iter().map(|&i| x[i].to_bits()));
    let joint: u64 = tie_groups(order.iter().map(|&i| (x[i].to_bits(), y[i].to_bits())))
        .into_iter()
        .map(pairs)
        .sum();
    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_sort_count(&mut ys, &mut buf);
    let groups_y = tie_groups(ys.iter().map(|v| v.to_bits()));
    let ties_x: u64 = groups_x.iter().copied().map(pairs).sum();
    let ties_y: u64 = groups_y.iter().copied().map(pairs).sum();
    let total = pairs(n as u64);
    let score = total as i128 - ties_x as i128 - ties_y as i128 + joint as i128 - 2 * swaps as i128;
    PairCounts {
        n,
        score,
        ties_x,
        ties_y,
        groups_x,
        groups_y,
    }
}

/// O(n²) pair enumeration.
fn counts_naive(x: &[f64], y: &[f64]) -> PairCounts {
    let n = x.len();
    let mut c = PairCounts {
        n,
        ..Default::default()
    };
    for i in 0..n {
        for j in i + 1..n {
            let sx = x[i].total_cmp(&x[j]);
            let sy = y[i].total_cmp(&y[j]);
            if sx == Ordering::Equal {
                c.ties_x += 1;
            }
            if sy == Ordering::Equal {
                c.ties_y += 1;
            }
            if sx != Ordering::Equal && sy != Ordering::Equal {
                c.score += if sx == sy { 1 } else { -1 };
            }
        }
    }
    let sorted = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        tie_groups(s.into_iter().map(f64::to_bits))
    };
    c.groups_x = sorted(x);
    c.groups_y = sorted(y);
    c
}

fn finish(c: &PairCounts) -> Result<TauResult, AnalysisError> {
    let total = pairs(c.n as u64);
    if c.ties_x == total || c.ties_y == total {
        return Err(AnalysisError::ZeroVariance);
    }
    let denom = ((total - c.ties_x) as f64 * (total - c.ties_y) as f64).sqrt();
    let tau = (c.score as f64 / denom).clamp(-1.0, 1.0);

    // variance of C − D under independence, with tie corrections
    let n = c.n as f64;
    let sum = |groups: &[u64], f: fn(f64) -> f64| groups.iter().map(|&t| f(t as f64)).sum::<f64>();
    let v0 = n * (n - 1.0) * (2.0 * n + 5.0);
    let vt = sum(&c.groups_x, |t| t * (t - 1.0) * (2.0 * t + 5.0));
    let vu = sum(&c.groups_y, |t| t * (t - 1.0) * (2.0 * t + 5.0));
    let t1 = sum(&c.groups_x, |t| t * (t - 1.0));
    let u1 = sum(&c.groups_y, |t| t * (t - 1.0));
    let t2 = sum(&c.groups_x, |t| t * (t - 1.0) * (t - 2.0));
    let u2 = sum(&c.groups_y, |t| t * (t - 1.0) * (t - 2.0));
    let mut var = (v0 - vt - vu) / 18.0 + t1 * u1 / (2.0 * n * (n - 1.0));
    if c.n > 2 {
        var += t2 * u2 / (9.0 * n * (n - 1.0) * (n - 2.0));
    }
    let p_value = if var > 0.0 {
        let z = c.score as f64 / var.sqrt();
        erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(TauResult {
        tau,
        p_value,
        n: c.n,
    })
}

/// Kendall's τ-b, `(C − D) / √((n0 − n1)(n0 − n2))`, in O(n log n).
///
/// ```
/// use thermostat::analysis::kendall_tau;
/// let r = kendall_tau(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
/// assert!((r.tau - 2.0 / 3.0).abs() < 1e-15);
/// ```
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<TauResult, AnalysisError> {
    check_inputs(x, y)?;
    finish(&counts_fast(&unsigned_zeros(x), &unsigned_zeros(y)))
}

/// Reference τ-b by enumerating all pairs. O(n²); use [`kendall_tau`].
pub fn kendall_tau_naive(x: &[f64], y: &[f64]) -> Result<TauResult, AnalysisError> {
    check_inputs(x, y)?;
    finish(&counts_naive(&unsigned_zeros(x), &unsigned_zeros(y)))
}

/// Maps `-0.0` to `0.0` so that total ordering agrees with `==`.
fn unsigned_zeros(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&a| if a == 0.0 { 0.0 } else { a }).collect()
}
