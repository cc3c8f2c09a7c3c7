//! Small numerical kernels shared by the other modules.

/// Pairwise (cascade) summation. The split points depend only on the slice
/// length, so the result is independent of how callers schedule work.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        let mut acc = 0.0;
        for v in values {
            acc += *v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise sum of `f(i)` for `i in 0..len`.
pub fn pairwise_sum_by<F: Fn(usize) -> f64>(len: usize, f: F) -> f64 {
    fn rec<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
        if hi - lo <= 32 {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    rec(0, len, &f)
}

/// Maximum of a slice, ignoring nothing: NaN poisons the result.
pub fn max_of(values: &[f64]) -> f64 {
    values.iter().fold(f64::NEG_INFINITY, |m, v| if v.is_nan() || *v > m { *v } else { m })
}

/// Outcome of a monotone root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionResult {
    pub root: f64,
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

/// Finds `inf { λ > 0 : g(λ) <= 1 }` for a nonincreasing `g`.
///
/// The bracket is found by doubling/halving from `λ = 1`; bisection (in the
/// log scale while the bracket spans more than a factor two) then stops once
/// `hi - lo <= rel_tol * hi`. The returned root is the upper endpoint, which
/// always satisfies `g(root) <= 1`.
pub fn infimum_level<G: Fn(f64) -> f64>(g: G, rel_tol: f64) -> BisectionResult {
    let mut iterations = 0;
    let (mut lo, mut hi);
    if g(1.0) <= 1.0 {
        hi = 1.0;
        lo = 0.5;
        while g(lo) <= 1.0 {
            hi = lo;
            lo *= 0.5;
            iterations += 1;
            if lo < 1e-300 {
                return BisectionResult { root: 0.0, lo: 0.0, hi, iterations };
            }
        }
    } else {
        lo = 1.0;
        hi = 2.0;
        while g(hi) > 1.0 {
            lo = hi;
            hi *= 2.0;
            iterations += 1;
            if hi > 1e300 {
                return BisectionResult { root: f64::INFINITY, lo, hi: f64::INFINITY, iterations };
            }
        }
    }
    while hi - lo > rel_tol * hi {
        let mid = if hi > 2.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
        if iterations > 10_000 {
            break;
        }
    }
    BisectionResult { root: hi, lo, hi, iterations }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (5 points).
pub const GAUSS5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
pub const GAUSS5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Integrates `f` on `[a, b]` with one 5-point Gauss–Legendre panel.
pub fn gauss5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Composite 5-point Gauss–Legendre rule with `panels` equal panels.
pub fn composite_gauss5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let width = (b - a) / panels as f64;
    pairwise_sum_by(panels, |i| {
        let lo = a + width * i as f64;
        gauss5(&f, lo, lo + width)
    })
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
