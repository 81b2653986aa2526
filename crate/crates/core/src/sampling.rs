//! Deterministic low-discrepancy points on the unit sphere.

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `i` in base `b`.
fn halton(mut i: u64, b: u32) -> f64 {
    let b = b as u64;
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// `count` points on `S^{n-1}`, reproducible across runs.
///
/// Halton points in `[0,1)^{2⌈n/2⌉}` are pushed through Box–Muller and
/// normalized. For `n = 1` the sphere is `{−1, +1}`.
pub fn sphere_points(n: usize, count: usize) -> Vec<Vec<f64>> {
    assert!(n >= 1 && n <= PRIMES.len(), "dimension {n} unsupported");
    if n == 1 {
        return (0..count).map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 }]).collect();
    }
    let pairs = n.div_ceil(2);
    (0..count)
        .map(|i| {
            let idx = i as u64 + 1;
            let mut v = Vec::with_capacity(2 * pairs);
            for p in 0..pairs {
                let u1 = halton(idx, PRIMES[2 * p]).max(1e-300);
                let u2 = halton(idx, PRIMES[2 * p + 1]);
                let r = (-2.0 * u1.ln()).sqrt();
                let t = std::f64::consts::TAU * u2;
                v.push(r * t.cos());
                v.push(r * t.sin());
            }
            v.truncate(n);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                let mut e = vec![0.0; n];
                e[0] = 1.0;
                return e;
            }
            v.iter().map(|x| x / norm).collect()
        })
        .collect()
}
