//! Layer primitives on [`Tensor3`] feature maps. Kernels are stored as
//! `[kh, kw, in, out]` and biases as `[out]`.

use crate::error::{NplError, Result};
use crate::tensor::Tensor3;
use crate::weights::Param;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    None,
    Relu,
}

/// Upper bound on im2col buffer entries; larger inputs are processed in
/// bands of rows.
const IM2COL_BUDGET: usize = 1 << 22;

fn kernel_dims(kernel: &Param, bias: &Param, depth: usize) -> Result<(usize, usize, usize)> {
    let d = kernel.dims();
    if d.len() != 4 {
        return Err(NplError::Shape(format!("kernel rank {} (expected 4)", d.len())));
    }
    let (kh, kw, ci, co) = (d[0], d[1], d[2], d[3]);
    if ci != depth {
        return Err(NplError::Shape(format!("kernel expects depth {ci}, input has {depth}")));
    }
    if bias.dims() != [co] {
        return Err(NplError::Shape(format!("bias shape {:?} for {co} output channels", bias.dims())));
    }
    Ok((kh, kw, co))
}

/// `C[m×n] += A[m×k] · B[k×n]`, all row-major.
fn gemm_acc(m: usize, k: usize, n: usize, a: &[f32], b: &[f32], c: &mut [f32]) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || k == 0 || n == 0 {
        return;
    }
    // SAFETY: the slices cover the strided extents checked above.
    unsafe {
        matrixmultiply::sgemm(
            m, k, n, 1.0,
            a.as_ptr(), k as isize, 1,
            b.as_ptr(), n as isize, 1,
            1.0,
            c.as_mut_ptr(), n as isize, 1,
        );
    }
}

/// Stride-1 convolution with zero "same" padding: the window of output
/// pixel `(y, x)` starts at `(y − ⌊(kh−1)/2⌋, x − ⌊(kw−1)/2⌋)`, so spatial
/// dims are preserved for odd and even kernels alike.
pub fn conv2d(x: &Tensor3, kernel: &Param, bias: &Param, act: Activation) -> Result<Tensor3> {
    let (kh, kw, co) = kernel_dims(kernel, bias, x.depth())?;
    let (h, w, ci) = (x.height(), x.width(), x.depth());
    let (pt, pl) = ((kh - 1) / 2, (kw - 1) / 2);
    let kdim = kh * kw * ci;
    let mut out = vec![0.0f32; h * w * co];
    for row in out.chunks_exact_mut(co.max(1)) {
        row.copy_from_slice(&bias.data()[..co]);
    }
    let band = (IM2COL_BUDGET / (w * kdim).max(1)).clamp(1, h.max(1));
    let src = x.data();
    let mut cols = vec![0.0f32; band * w * kdim];
    let mut y0 = 0;
    while y0 < h {
        let rows = band.min(h - y0);
        let cols = &mut cols[..rows * w * kdim];
        cols.fill(0.0);
        for r in 0..rows {
            let y = y0 + r;
            for xo in 0..w {
                let dst = &mut cols[(r * w + xo) * kdim..(r * w + xo + 1) * kdim];
                for ky in 0..kh {
                    let yy = y as isize + ky as isize - pt as isize;
                    if yy < 0 || yy >= h as isize {
                        continue;
                    }
                    for kx in 0..kw {
                        let xx = xo as isize + kx as isize - pl as isize;
                        if xx < 0 || xx >= w as isize {
                            continue;
                        }
                        let s = (yy as usize * w + xx as usize) * ci;
                        let d = (ky * kw + kx) * ci;
                        dst[d..d + ci].copy_from_slice(&src[s..s + ci]);
                    }
                }
            }
        }
        let c = &mut out[y0 * w * co..(y0 + rows) * w * co];
        gemm_acc(rows * w, kdim, co, cols, kernel.data(), c);
        y0 += rows;
    }
    apply(&mut out, act);
    Tensor3::new(h, w, co, out)
}

fn apply(v: &mut [f32], act: Activation) {
    if act == Activation::Relu {
        relu_in_place(v);
    }
}

pub fn relu_in_place(v: &mut [f32]) {
    for a in v {
        *a = a.max(0.0);
    }
}

pub fn relu(x: &Tensor3) -> Tensor3 {
    let mut y = x.clone();
    relu_in_place(y.data_mut());
    y
}

/// Elementwise sum of two equally shaped tensors.
pub fn add(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    if (a.dims(), a.depth()) != (b.dims(), b.depth()) {
        return Err(NplError::Shape(format!(
            "add {:?}x{} and {:?}x{}",
            a.dims(),
            a.depth(),
            b.dims(),
            b.depth()
        )));
    }
    let data = a.data().iter().zip(b.data()).map(|(x, y)| x + y).collect();
    Tensor3::new(a.height(), a.width(), a.depth(), data)
}

/// 2×2 window reduction with stride 2 and ceil output dims; border windows
/// hold the 1 or 2 pixels that exist.
fn pool2(x: &Tensor3, reduce: impl Fn(&[f32]) -> f32) -> Tensor3 {
    let (h, w, d) = (x.height(), x.width(), x.depth());
    let (oh, ow) = (h.div_ceil(2), w.div_ceil(2));
    let mut out = Tensor3::zeros(oh, ow, d);
    let mut buf = Vec::with_capacity(4);
    for y in 0..oh {
        for xo in 0..ow {
            for c in 0..d {
                buf.clear();
                for yy in 2 * y..(2 * y + 2).min(h) {
                    for xx in 2 * xo..(2 * xo + 2).min(w) {
                        buf.push(x.get(yy, xx, c));
                    }
                }
                out.set(y, xo, c, reduce(&buf));
            }
        }
    }
    out
}

pub fn maxpool2(x: &Tensor3) -> Tensor3 {
    pool2(x, |v| v.iter().copied().fold(f32::NEG_INFINITY, f32::max))
}

/// Mean over each existing pixel of the 2×2 window; builds the image
/// pyramid.
pub fn avgpool2(x: &Tensor3) -> Tensor3 {
    pool2(x, |v| v.iter().sum::<f32>() / v.len() as f32)
}

/// Transposed convolution with the given stride. Input pixel `(y, x)`
/// stamps its kernel response at `(y·stride, x·stride)` of the full output
/// of size `((h−1)·stride + kh) × ((w−1)·stride + kw)`, which is then
/// center-cropped (or zero-padded) to `target` before the bias is added.
pub fn deconv(
    x: &Tensor3,
    kernel: &Param,
    bias: &Param,
    stride: usize,
    target: (usize, usize),
    act: Activation,
) -> Result<Tensor3> {
    let (kh, kw, co) = kernel_dims(kernel, bias, x.depth())?;
    assert!(stride >= 1, "stride must be positive");
    let (h, w, ci) = (x.height(), x.width(), x.depth());
    let (fh, fw) = ((h.max(1) - 1) * stride + kh, (w.max(1) - 1) * stride + kw);
    let (th, tw) = target;
    let off_y = (fh as isize - th as isize).div_euclid(2);
    let off_x = (fw as isize - tw as isize).div_euclid(2);

    // kernel as [ci, kh·kw·co] so one product yields every stamp
    let k = kernel.data();
    let stamp = kh * kw * co;
    let mut kt = vec![0.0f32; ci * stamp];
    for t in 0..kh * kw {
        for c in 0..ci {
            for o in 0..co {
                kt[c * stamp + t * co + o] = k[(t * ci + c) * co + o];
            }
        }
    }
    let mut stamps = vec![0.0f32; h * w * stamp];
    gemm_acc(h * w, ci, stamp, x.data(), &kt, &mut stamps);

    let mut out = vec![0.0f32; th * tw * co];
    for y in 0..h {
        for xi in 0..w {
            let s = &stamps[(y * w + xi) * stamp..(y * w + xi + 1) * stamp];
            for ky in 0..kh {
                let ty = (y * stride + ky) as isize - off_y;
                if ty < 0 || ty >= th as isize {
                    continue;
                }
                for kx in 0..kw {
                    let tx = (xi * stride + kx) as isize - off_x;
                    if tx < 0 || tx >= tw as isize {
                        continue;
                    }
                    let d = (ty as usize * tw + tx as usize) * co;
                    let src = &s[(ky * kw + kx) * co..(ky * kw + kx + 1) * co];
                    for (o, v) in out[d..d + co].iter_mut().zip(src) {
                        *o += v;
                    }
                }
            }
        }
    }
    for px in out.chunks_exact_mut(co.max(1)) {
        for (o, b) in px.iter_mut().zip(bias.data()) {
            *o += b;
        }
    }
    apply(&mut out, act);
    Tensor3::new(th, tw, co, out)
}

/// Softmax across channels at every pixel.
pub fn softmax_channels(x: &Tensor3) -> Tensor3 {
    let mut y = x.clone();
    let d = x.depth().max(1);
    for px in y.data_mut().chunks_exact_mut(d) {
        let m = px.iter().copied().fold(f32::NEG_INFINITY, f32::max);
        let mut sum = 0.0f32;
        for v in px.iter_mut() {
            *v = (*v - m).exp();
            sum += *v;
        }
        for v in px.iter_mut() {
            *v /= sum;
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn param(dims: &[usize], f: impl FnMut() -> f32) -> Param {
        let n = dims.iter().product();
        Param::new(dims.to_vec(), std::iter::repeat_with(f).take(n).collect()).unwrap()
    }

    fn random(dims: &[usize], rng: &mut ChaCha8Rng) -> Param {
        param(dims, || rng.random_range(-1.0..1.0))
    }

    fn random_t(h: usize, w: usize, d: usize, rng: &mut ChaCha8Rng) -> Tensor3 {
        let data = (0..h * w * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        Tensor3::new(h, w, d, data).unwrap()
    }

    /// Direct nested-loop convolution.
    fn conv_oracle(x: &Tensor3, k: &Param, b: &Param) -> Tensor3 {
        let [kh, kw, ci, co] = k.dims()[..] else { unreachable!() };
        let (pt, pl) = ((kh - 1) / 2, (kw - 1) / 2);
        Tensor3::from_fn(x.height(), x.width(), co, |y, xx, o| {
            let mut acc = b.data()[o] as f64;
            for ky in 0..kh {
                for kx in 0..kw {
                    let (sy, sx) = (y as isize + ky as isize - pt as isize, xx as isize + kx as isize - pl as isize);
                    if sy < 0 || sx < 0 || sy >= x.height() as isize || sx >= x.width() as isize {
                        continue;
                    }
                    for c in 0..ci {
                        acc += x.get(sy as usize, sx as usize, c) as f64
                            * k.data()[((ky * kw + kx) * ci + c) * co + o] as f64;
                    }
                }
            }
            acc as f32
        })
    }

    /// Explicit scatter of every input pixel into the full output, then crop.
    fn deconv_oracle(x: &Tensor3, k: &Param, b: &Param, s: usize, target: (usize, usize)) -> Tensor3 {
        let [kh, kw, ci, co] = k.dims()[..] else { unreachable!() };
        let (fh, fw) = ((x.height() - 1) * s + kh, (x.width() - 1) * s + kw);
        let mut full = vec![vec![vec![0.0f64; co]; fw]; fh];
        for y in 0..x.height() {
            for xx in 0..x.width() {
                for ky in 0..kh {
                    for kx in 0..kw {
                        for c in 0..ci {
                            for (o, acc) in full[y * s + ky][xx * s + kx].iter_mut().enumerate().take(co) {
                                *acc += x.get(y, xx, c) as f64 * k.data()[((ky * kw + kx) * ci + c) * co + o] as f64;
                            }
                        }
                    }
                }
            }
        }
        let oy = (fh as isize - target.0 as isize).div_euclid(2);
        let ox = (fw as isize - target.1 as isize).div_euclid(2);
        Tensor3::from_fn(target.0, target.1, co, |y, xx, o| {
            let (sy, sx) = (y as isize + oy, xx as isize + ox);
            let v = if sy >= 0 && sx >= 0 && (sy as usize) < fh && (sx as usize) < fw {
                full[sy as usize][sx as usize][o]
            } else {
                0.0
            };
            (v + b.data()[o] as f64) as f32
        })
    }

    fn close(a: &Tensor3, b: &Tensor3, tol: f32) -> bool {
        a.dims() == b.dims() && a.depth() == b.depth() && a.data().iter().zip(b.data()).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn identity_and_bias_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_t(5, 4, 2, &mut rng);
        let id = Param::new(vec![1, 1, 2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let zero_b = Param::new(vec![2], vec![0.0; 2]).unwrap();
        assert_eq!(conv2d(&x, &id, &zero_b, Activation::None).unwrap(), x);
        let k = param(&[3, 3, 2, 1], || 0.0);
        let b = Param::new(vec![1], vec![0.3]).unwrap();
        let y = conv2d(&x, &k, &b, Activation::Relu).unwrap();
        assert!(y.data().iter().all(|&v| v == 0.3));
    }

    #[test]
    fn box_kernel_on_delta_gives_mirrored_plateau() {
        let mut x = Tensor3::zeros(7, 7, 1);
        x.set(3, 3, 0, 1.0);
        // asymmetric kernel shows the mirroring: k[ky][kx] lands at (3+1-ky, 3+1-kx)
        let k = Param::new(vec![3, 3, 1, 1], (1..=9).map(|v| v as f32).collect()).unwrap();
        let b = Param::new(vec![1], vec![0.0]).unwrap();
        let y = conv2d(&x, &k, &b, Activation::None).unwrap();
        for ky in 0..3 {
            for kx in 0..3 {
                assert_eq!(y.get(4 - ky, 4 - kx, 0), (ky * 3 + kx + 1) as f32);
            }
        }
        assert_eq!(y.data().iter().filter(|&&v| v != 0.0).count(), 9);
    }

    #[test]
    fn shape_errors() {
        let x = Tensor3::zeros(4, 4, 2);
        let k = param(&[3, 3, 3, 1], || 0.0);
        let b = Param::new(vec![1], vec![0.0]).unwrap();
        assert!(matches!(conv2d(&x, &k, &b, Activation::None), Err(NplError::Shape(_))));
        let k = param(&[3, 3, 2, 2], || 0.0);
        assert!(matches!(conv2d(&x, &k, &b, Activation::None), Err(NplError::Shape(_))));
    }

    #[test]
    fn maxpool_examples() {
        let x = Tensor3::new(2, 2, 1, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(maxpool2(&x).data(), &[0.4]);
        let c = Tensor3::from_fn(6, 4, 1, |_, _, _| 0.7);
        let p = maxpool2(&c);
        assert_eq!((p.dims(), p.data().iter().all(|&v| v == 0.7)), ((3, 2), true));
        let odd = Tensor3::from_fn(3, 3, 1, |y, x, _| (y * 3 + x) as f32);
        assert_eq!(maxpool2(&odd).data(), &[4.0, 5.0, 7.0, 8.0]);
        assert_eq!(avgpool2(&odd).data(), &[2.0, 3.5, 6.5, 8.0]);
    }

    #[test]
    fn deconv_stamps() {
        let x = Tensor3::new(1, 1, 1, vec![2.5]).unwrap();
        let k = param(&[2, 2, 1, 1], || 1.0);
        let b = Param::new(vec![1], vec![0.0]).unwrap();
        let y = deconv(&x, &k, &b, 2, (2, 2), Activation::None).unwrap();
        assert_eq!(y.data(), &[2.5; 4]);

        let mut x = Tensor3::zeros(3, 3, 1);
        x.set(1, 2, 0, 1.0);
        let k = Param::new(vec![4, 4, 1, 1], (0..16).map(|v| v as f32).collect()).unwrap();
        let y = deconv(&x, &k, &b, 4, (12, 12), Activation::None).unwrap();
        for ky in 0..4 {
            for kx in 0..4 {
                assert_eq!(y.get(4 + ky, 8 + kx, 0), (ky * 4 + kx) as f32);
            }
        }
        assert_eq!(y.data().iter().filter(|&&v| v != 0.0).count(), 15);
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let x = Tensor3::new(1, 2, 3, vec![1.0, 2.0, 3.0, 1000.0, 0.0, -1000.0]).unwrap();
        let y = softmax_channels(&x);
        for px in y.data().chunks(3) {
            assert!((px.iter().sum::<f32>() - 1.0).abs() < 1e-6);
        }
        assert!(y.get(0, 0, 2) > y.get(0, 0, 1));
    }

    proptest! {
        #[test]
        fn conv_matches_oracle(h in 1usize..9, w in 1usize..9, ci in 1usize..4, co in 1usize..4, k in 1usize..5, seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_t(h, w, ci, &mut rng);
            let kp = random(&[k, k, ci, co], &mut rng);
            let b = random(&[co], &mut rng);
            let y = conv2d(&x, &kp, &b, Activation::None).unwrap();
            prop_assert!(close(&y, &conv_oracle(&x, &kp, &b), 1e-5));
        }

        #[test]
        fn maxpool_matches_oracle(h in 1usize..9, w in 1usize..9, d in 1usize..4, seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_t(h, w, d, &mut rng);
            let y = maxpool2(&x);
            let oracle = Tensor3::from_fn(h.div_ceil(2), w.div_ceil(2), d, |yy, xx, c| {
                let mut m = f32::NEG_INFINITY;
                for a in 0..2 {
                    for bb in 0..2 {
                        if 2 * yy + a < h && 2 * xx + bb < w {
                            m = m.max(x.get(2 * yy + a, 2 * xx + bb, c));
                        }
                    }
                }
                m
            });
            prop_assert_eq!(y, oracle);
        }

        #[test]
        fn deconv_matches_oracle(h in 1usize..6, w in 1usize..6, ci in 1usize..4, co in 1usize..4,
                                 k in 1usize..5, s in 1usize..5, dh in -3isize..4, dw in -3isize..4, seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_t(h, w, ci, &mut rng);
            let kp = random(&[k, k, ci, co], &mut rng);
            let b = random(&[co], &mut rng);
            let target = (((h * s) as isize + dh).max(1) as usize, ((w * s) as isize + dw).max(1) as usize);
            let y = deconv(&x, &kp, &b, s, target, Activation::None).unwrap();
            prop_assert!(close(&y, &deconv_oracle(&x, &kp, &b, s, target), 1e-5));
        }
    }
}
