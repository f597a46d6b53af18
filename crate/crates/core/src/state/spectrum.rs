use num_complex::Complex64;

use crate::geometry::Point;

use super::labels::InterlineLabelSet;

/// Projection profile of `positions` around `p` for diameter `d` and
/// orientation `theta`.
///
/// Every point within `d/2` of `p` (inclusive, `p` itself too) falls into bin
/// `floor(o × (q − p) + d/2)`, clamped to `[0, d − 1]`, where
/// `o = (cos θ, sin θ)`. `candidates` restricts the scan to the given
/// indices; pass `None` to scan all positions.
pub fn projection_profile(
    p: Point,
    d: usize,
    theta: f64,
    positions: &[Point],
    candidates: Option<&[usize]>,
) -> Vec<u32> {
    let mut bins = vec![0u32; d];
    let (s, c) = theta.sin_cos();
    let half = d as f64 / 2.0;
    let mut add = |q: Point| {
        if q.dist(p) <= half {
            let off = c * (q.y - p.y) - s * (q.x - p.x);
            let b = (off + half).floor().clamp(0.0, (d - 1) as f64) as usize;
            bins[b] += 1;
        }
    };
    match candidates {
        Some(ids) => ids.iter().for_each(|&i| add(positions[i])),
        None => positions.iter().for_each(|&q| add(q)),
    }
    bins
}

/// In-place iterative radix-2 FFT, `H_k = Σ_n h_n e^{-2πikn/N}`.
///
/// # Panics
/// If the length is not a power of two.
pub fn fft(buf: &mut [Complex64]) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "fft length {n} is not a power of two");
    if n < 2 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let ang = -2.0 * std::f64::consts::PI / len as f64;
        let half = len / 2;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = Complex64::from_polar(1.0, ang * k as f64);
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// One-sided energy fractions of the mean-subtracted profile.
///
/// Entry `k` (for `1 ≤ k ≤ d/2`) is `(|H_k|² + |H_{d−k}|²) / Σ_{j≠0} |H_j|²`,
/// with the Nyquist bin counted once; entry 0 is 0. For a real profile the
/// two conjugate bins carry the same period, so a pure cosine of `k` periods
/// gets energy exactly 1 and the entries sum to 1. `None` when the
/// mean-subtracted profile is identically zero.
pub fn spectral_energies(profile: &[u32]) -> Option<Vec<f64>> {
    let n = profile.len();
    let mean = profile.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = profile.iter().map(|&v| Complex64::new(v as f64 - mean, 0.0)).collect();
    fft(&mut buf);
    let power: Vec<f64> = buf.iter().map(|h| h.norm_sqr()).collect();
    let total: f64 = power[1..].iter().sum();
    // integer counts: a non-constant profile has total power of order 1
    if total <= 1e-9 {
        return None;
    }
    let mut e = vec![0.0; n / 2 + 1];
    for (k, slot) in e.iter_mut().enumerate().skip(1) {
        let mirror = n - k;
        *slot = if mirror == k { power[k] } else { power[k] + power[mirror] } / total;
    }
    Some(e)
}

/// Data cost `min(−ln E, cap)` for every label of `labels`, given the
/// profile for each diameter (keyed by diameter).
pub fn data_costs_from_profiles(
    labels: &InterlineLabelSet,
    profile_for: impl Fn(usize) -> Vec<u32>,
    cap: f64,
) -> Vec<f64> {
    let mut costs = vec![cap; labels.len()];
    let mut diameters: Vec<usize> = labels.labels().iter().map(|l| l.diameter).collect();
    diameters.sort_unstable();
    diameters.dedup();
    for d in diameters {
        let Some(e) = spectral_energies(&profile_for(d)) else { continue };
        for (i, l) in labels.labels().iter().enumerate() {
            if l.diameter == d {
                let energy = e.get(l.harmonic).copied().unwrap_or(0.0);
                costs[i] = if energy > 0.0 { (-energy.ln()).min(cap) } else { cap };
            }
        }
    }
    costs
}
