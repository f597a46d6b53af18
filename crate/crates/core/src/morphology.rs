//! Binary erosion, dilation and opening with the 3×3 square structuring
//! element. Pixels outside the image are background.

use crate::image::BinaryImage;

fn pass(src: &BinaryImage, horizontal: bool, erode: bool) -> BinaryImage {
    let (h, w) = src.dims();
    let mut out = BinaryImage::new(h, w);
    for y in 0..h {
        for x in 0..w {
            let (a, b) = if horizontal {
                (
                    if x > 0 { src.get(y, x - 1) } else { false },
                    if x + 1 < w { src.get(y, x + 1) } else { false },
                )
            } else {
                (
                    if y > 0 { src.get(y - 1, x) } else { false },
                    if y + 1 < h { src.get(y + 1, x) } else { false },
                )
            };
            let c = src.get(y, x);
            out.set(y, x, if erode { a && b && c } else { a || b || c });
        }
    }
    out
}

pub fn erode(img: &BinaryImage) -> BinaryImage {
    pass(&pass(img, true, true), false, true)
}

pub fn dilate(img: &BinaryImage) -> BinaryImage {
    pass(&pass(img, true, false), false, false)
}

pub fn dilate_n(img: &BinaryImage, n: usize) -> BinaryImage {
    let mut out = img.clone();
    for _ in 0..n {
        out = dilate(&out);
    }
    out
}

pub fn open(img: &BinaryImage) -> BinaryImage {
    dilate(&erode(img))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(img: &BinaryImage, erode: bool) -> BinaryImage {
        let (h, w) = img.dims();
        let mut out = BinaryImage::new(h, w);
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let mut acc = erode;
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (yy, xx) = (y + dy, x + dx);
                        let v = yy >= 0 && xx >= 0 && yy < h as i64 && xx < w as i64
                            && img.get(yy as usize, xx as usize);
                        acc = if erode { acc && v } else { acc || v };
                    }
                }
                out.set(y as usize, x as usize, acc);
            }
        }
        out
    }

    #[test]
    fn separable_passes_match_window_oracle() {
        let mut state = 12345u64;
        let mut img = BinaryImage::new(13, 17);
        for y in 0..13 {
            for x in 0..17 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                img.set(y, x, !(state >> 33).is_multiple_of(3));
            }
        }
        assert_eq!(erode(&img), brute(&img, true));
        assert_eq!(dilate(&img), brute(&img, false));
    }
}
