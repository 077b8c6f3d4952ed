//! Small statistical helpers: Wilson score intervals, isotonic
//! regression, and percentile extraction for bootstrap confidence
//! intervals.

/// 97.5% normal quantile, for two-sided 95% intervals.
pub const Z_95: f64 = 1.959963984540054;

/// Wilson score interval: (p_hat, lo, hi).
pub fn wilson_ci(successes: u64, trials: u64, z: f64) -> (f64, f64, f64) {
    assert!(trials > 0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (p, (center - half).max(0.0), (center + half).min(1.0))
}

/// Pool-adjacent-violators: least-squares nondecreasing fit.
pub fn isotonic_nondecreasing(ys: &[f64]) -> Vec<f64> {
    let n = ys.len();
    let mut level: Vec<f64> = Vec::with_capacity(n);
    let mut weight: Vec<f64> = Vec::with_capacity(n);
    let mut count: Vec<usize> = Vec::with_capacity(n);
    for &y in ys {
        level.push(y);
        weight.push(1.0);
        count.push(1);
        while level.len() > 1 && level[level.len() - 2] > level[level.len() - 1] {
            let (l2, w2, c2) = (level.pop().unwrap(), weight.pop().unwrap(), count.pop().unwrap());
            let k = level.len() - 1;
            let merged = (level[k] * weight[k] + l2 * w2) / (weight[k] + w2);
            level[k] = merged;
            weight[k] += w2;
            count[k] += c2;
        }
    }
    let mut out = Vec::with_capacity(n);
    for (l, c) in level.iter().zip(count.iter()) {
        out.extend(std::iter::repeat(*l).take(*c));
    }
    out
}

/// First crossing of `target` by the piecewise-linear interpolation of a
/// nondecreasing curve, clamped to the x range.
pub fn crossing_point(xs: &[f64], ys: &[f64], target: f64) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(!xs.is_empty());
    if ys[0] >= target {
        return xs[0];
    }
    for i in 1..xs.len() {
        if ys[i] >= target {
            let (x0, x1, y0, y1) = (xs[i - 1], xs[i], ys[i - 1], ys[i]);
            if (y1 - y0).abs() < 1e-300 {
                return x1;
            }
            return x0 + (x1 - x0) * (target - y0) / (y1 - y0);
        }
    }
    *xs.last().unwrap()
}

/// Percentile by linear interpolation on a sorted copy; q in [0, 1].
pub fn percentile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
    }
}
