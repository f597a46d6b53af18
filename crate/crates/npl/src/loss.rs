use baseline_core::groundtruth::PixelGT;
use baseline_core::ConfidenceMaps;

use crate::error::{NplError, Result};

/// Lower clamp on predicted probabilities inside the logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

/// `−Σ_{y,x,c} G(y,x,c) · ln max(pred(y,x,c), 1e-12)`. A missing `other`
/// plane is taken as `1 − baseline − separator`.
pub fn cross_entropy_loss(pred: &ConfidenceMaps, gt: &PixelGT) -> Result<f64> {
    if pred.dims() != gt.dims() {
        return Err(NplError::Shape(format!("prediction {:?} vs ground truth {:?}", pred.dims(), gt.dims())));
    }
    let (h, w) = pred.dims();
    let mut loss = 0.0;
    for y in 0..h {
        for x in 0..w {
            let p = match gt.class_at(y, x) {
                0 => pred.baseline.get(y, x) as f64,
                1 => pred.separator.get(y, x) as f64,
                _ => match &pred.other {
                    Some(o) => o.get(y, x) as f64,
                    None => 1.0 - pred.baseline.get(y, x) as f64 - pred.separator.get(y, x) as f64,
                },
            };
            loss -= p.max(PROB_FLOOR).ln();
        }
    }
    Ok(loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use baseline_core::{BinaryImage, GrayImage};

    fn gt_2x2() -> PixelGT {
        let b = BinaryImage::from_vec(2, 2, vec![true, false, false, false]).unwrap();
        let s = BinaryImage::from_vec(2, 2, vec![false, true, false, false]).unwrap();
        let o = BinaryImage::from_vec(2, 2, vec![false, false, true, true]).unwrap();
        PixelGT { baseline: b, separator: s, other: o }
    }

    #[test]
    fn perfect_and_uniform() {
        let gt = gt_2x2();
        let perfect = ConfidenceMaps::new(gt.baseline.to_gray(), gt.separator.to_gray(), Some(gt.other.to_gray())).unwrap();
        assert_eq!(cross_entropy_loss(&perfect, &gt).unwrap(), 0.0);
        let third = GrayImage::filled(2, 2, 1.0 / 3.0);
        let uniform = ConfidenceMaps::new(third.clone(), third.clone(), Some(third)).unwrap();
        assert!((cross_entropy_loss(&uniform, &gt).unwrap() - 4.0 * 3f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn hand_sum() {
        let gt = gt_2x2();
        let b = GrayImage::new(2, 2, vec![0.7, 0.1, 0.2, 0.0]).unwrap();
        let s = GrayImage::new(2, 2, vec![0.2, 0.6, 0.3, 0.0]).unwrap();
        let o = GrayImage::new(2, 2, vec![0.1, 0.3, 0.5, 1.0]).unwrap();
        let maps = ConfidenceMaps::new(b, s, Some(o)).unwrap();
        let expected = -(0.7f32 as f64).ln() - (0.6f32 as f64).ln() - (0.5f32 as f64).ln() - 0.0;
        assert!((cross_entropy_loss(&maps, &gt).unwrap() - expected).abs() < 1e-12);
        // a zero prediction on the true class hits the floor
        let zero = ConfidenceMaps::new(GrayImage::zeros(2, 2), GrayImage::zeros(2, 2), Some(GrayImage::zeros(2, 2))).unwrap();
        assert!((cross_entropy_loss(&zero, &gt).unwrap() + 4.0 * PROB_FLOOR.ln()).abs() < 1e-9);
        let wrong = ConfidenceMaps::new(GrayImage::zeros(3, 2), GrayImage::zeros(3, 2), None).unwrap();
        assert!(cross_entropy_loss(&wrong, &gt).is_err());
    }
}
