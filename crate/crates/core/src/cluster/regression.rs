// dense elimination reads clearest with explicit row and column indices
#![allow(clippy::needless_range_loop)]

use crate::geometry::{axial_mean, Point};
use crate::state::SpState;

/// `(θ, s)` of a set of superpixels: the axial mean orientation and the
/// arithmetic mean interline distance.
///
/// When the doubled-angle vectors cancel exactly, the orientation of the
/// first member is used.
///
/// # Panics
/// On an empty set.
pub fn cluster_statistics(members: &[usize], states: &[SpState]) -> (f64, f64) {
    assert!(!members.is_empty(), "statistics of an empty cluster");
    let theta = axial_mean(members.iter().map(|&i| states[i].theta)).unwrap_or(states[members[0]].theta);
    let s = members.iter().map(|&i| states[i].interline).sum::<f64>() / members.len() as f64;
    (theta, s)
}

/// Least-squares polynomial `v = p(t)` in the frame rotated by `−θ`.
///
/// Internally the polynomial is expressed in `u = (t − center) / scale` to
/// keep the fit well conditioned.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionCurve {
    pub theta: f64,
    /// Coefficients of `u⁰, u¹, …`.
    pub coeffs: Vec<f64>,
    pub center: f64,
    pub scale: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl RegressionCurve {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn u(&self, t: f64) -> f64 {
        (t - self.center) / self.scale
    }

    pub fn eval(&self, t: f64) -> f64 {
        let u = self.u(t);
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    /// `dp/dt`.
    pub fn slope(&self, t: f64) -> f64 {
        let u = self.u(t);
        let du = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * u + k as f64 * c);
        du / self.scale
    }

    /// Tangent orientation at `t` in image coordinates.
    pub fn tangent_angle(&self, t: f64) -> f64 {
        self.theta + self.slope(t).atan()
    }

    /// Point `(t, p(t))` of the rotated frame, mapped back to the image.
    pub fn point_at(&self, t: f64) -> Point {
        unrotate(self.theta, t, self.eval(t))
    }

    /// The polynomial in the monomials of `t` itself.
    pub fn coefficients_in_t(&self) -> Vec<f64> {
        // expand Σ c_k ((t − m)/s)^k
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        for (k, &c) in self.coeffs.iter().enumerate() {
            // ((t − m)/s)^k = s^{-k} Σ_j C(k,j) t^j (−m)^{k−j}
            let mut binom = 1.0;
            for j in 0..=k {
                out[j] += c * binom * (-self.center).powi((k - j) as i32) / self.scale.powi(k as i32);
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
        }
        out
    }
}

/// `(t, v)` coordinates of `p` in the frame rotated by `−θ`.
pub fn rotate_into(theta: f64, p: Point) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    (p.x * c + p.y * s, -p.x * s + p.y * c)
}

pub fn unrotate(theta: f64, t: f64, v: f64) -> Point {
    let (s, c) = theta.sin_cos();
    Point::new(t * c - v * s, t * s + v * c)
}

/// Fits the regression curve of a cluster with degree `min(deg, n − 1)`,
/// lowered further when fewer distinct abscissae are available.
pub fn regression_curve(members: &[usize], positions: &[Point], states: &[SpState], deg: usize) -> RegressionCurve {
    let (theta, _) = cluster_statistics(members, states);
    let tv: Vec<(f64, f64)> = members.iter().map(|&i| rotate_into(theta, positions[i])).collect();
    fit_rotated(theta, &tv, deg)
}

pub(crate) fn fit_rotated(theta: f64, tv: &[(f64, f64)], deg: usize) -> RegressionCurve {
    let n = tv.len();
    let t_min = tv.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let t_max = tv.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let center = tv.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let spread = tv.iter().map(|p| (p.0 - center).abs()).fold(0.0, f64::max);
    let tol = 1e-9 * (1.0 + center.abs());
    if spread <= tol {
        let mean = tv.iter().map(|p| p.1).sum::<f64>() / n as f64;
        return RegressionCurve { theta, coeffs: vec![mean], center, scale: 1.0, t_min, t_max };
    }
    let mut ts: Vec<f64> = tv.iter().map(|p| p.0).collect();
    ts.sort_by(f64::total_cmp);
    let distinct = 1 + ts.windows(2).filter(|w| w[1] - w[0] > tol).count();
    let m = deg.min(distinct - 1);
    let cols = m + 1;
    let mut a: Vec<Vec<f64>> = tv
        .iter()
        .map(|&(t, _)| {
            let u = (t - center) / spread;
            (0..cols).map(|k| u.powi(k as i32)).collect()
        })
        .collect();
    let mut b: Vec<f64> = tv.iter().map(|p| p.1).collect();
    let coeffs = householder_lstsq(&mut a, &mut b, cols);
    RegressionCurve { theta, coeffs, center, scale: spread, t_min, t_max }
}

/// Least squares via Householder QR; `a` is row-major `n × cols`.
fn householder_lstsq(a: &mut [Vec<f64>], b: &mut [f64], cols: usize) -> Vec<f64> {
    let n = a.len();
    for k in 0..cols {
        let norm = (k..n).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..n).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..cols {
            let dot: f64 = (k..n).map(|i| v[i - k] * a[i][j]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..n {
                a[i][j] -= f * v[i - k];
            }
        }
        let dot: f64 = (k..n).map(|i| v[i - k] * b[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in k..n {
            b[i] -= f * v[i - k];
        }
    }
    let mut x = vec![0.0; cols];
    for k in (0..cols).rev() {
        let s: f64 = (k + 1..cols).map(|j| a[k][j] * x[j]).sum();
        x[k] = if a[k][k].abs() > 1e-300 { (b[k] - s) / a[k][k] } else { 0.0 };
    }
    x
}

/// RMS regression residual divided by the cluster's mean interline
/// distance; 0 for clusters of at most `deg + 1` superpixels.
pub fn curvilinearity(members: &[usize], positions: &[Point], states: &[SpState], deg: usize) -> f64 {
    if members.len() <= deg + 1 {
        return 0.0;
    }
    let (theta, s) = cluster_statistics(members, states);
    let tv: Vec<(f64, f64)> = members.iter().map(|&i| rotate_into(theta, positions[i])).collect();
    let curve = fit_rotated(theta, &tv, deg);
    let ss: f64 = tv.iter().map(|&(t, v)| (v - curve.eval(t)).powi(2)).sum();
    (ss / tv.len() as f64).sqrt() / s
}

/// A superpixel moved onto its cluster's regression curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projected {
    pub index: usize,
    pub t: f64,
    pub point: Point,
    /// Tangent orientation of the curve at `t`.
    pub tangent: f64,
}

/// Projects every member onto `curve` along the curve's normal direction
/// `θ + π/2`, ordered by increasing `t` (index on ties).
pub fn project_to_curve(members: &[usize], positions: &[Point], curve: &RegressionCurve) -> Vec<Projected> {
    let mut out: Vec<Projected> = members
        .iter()
        .map(|&i| {
            let (t, _) = rotate_into(curve.theta, positions[i]);
            Projected { index: i, t, point: curve.point_at(t), tangent: curve.tangent_angle(t) }
        })
        .collect();
    out.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.index.cmp(&b.index)));
    out
}
