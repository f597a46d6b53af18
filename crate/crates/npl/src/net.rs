use baseline_core::{ConfidenceMaps, GrayImage};

use crate::arch::{NplArchitecture, Variant};
use crate::error::{NplError, Result};
use crate::ops::{add, avgpool2, conv2d, deconv, maxpool2, relu, softmax_channels, Activation};
use crate::tensor::Tensor3;
use crate::weights::{Param, WeightStore};

/// Class probabilities (`h × w × num_classes`, channel order baseline,
/// separator, other) and, for ARU, the normalized attention map of each
/// image scale.
#[derive(Debug, Clone, PartialEq)]
pub struct NplOutput {
    pub classes: Tensor3,
    pub attention: Vec<Tensor3>,
}

impl NplOutput {
    /// The first three class planes as confidence maps.
    pub fn to_maps(&self) -> Result<ConfidenceMaps> {
        if self.classes.depth() != 3 {
            return Err(NplError::Shape(format!("{} classes, expected 3", self.classes.depth())));
        }
        let (h, w) = self.classes.dims();
        let plane = |c: usize| {
            let data = self.classes.channel(c).into_data().into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
            GrayImage::new(h, w, data)
        };
        Ok(ConfidenceMaps::new(plane(0)?, plane(1)?, Some(plane(2)?))?)
    }
}

/// A pixel labeler: architecture plus a complete, shape-checked weight set.
#[derive(Debug, Clone)]
pub struct Npl {
    arch: NplArchitecture,
    weights: WeightStore,
}

impl Npl {
    pub fn new(arch: NplArchitecture, weights: WeightStore) -> Result<Self> {
        arch.validate()?;
        weights.check_slots(&arch.slots())?;
        Ok(Self { arch, weights })
    }

    /// He-initialized weights from `seed`.
    pub fn random(arch: NplArchitecture, seed: u64) -> Result<Self> {
        let weights = WeightStore::he_init(&arch.slots(), seed);
        Self::new(arch, weights)
    }

    pub fn arch(&self) -> &NplArchitecture {
        &self.arch
    }

    pub fn weights(&self) -> &WeightStore {
        &self.weights
    }

    fn pair(&self, name: &str) -> Result<(&Param, &Param)> {
        Ok((self.weights.get(&format!("{name}/kernel"))?, self.weights.get(&format!("{name}/bias"))?))
    }

    fn conv(&self, x: &Tensor3, name: &str, act: Activation) -> Result<Tensor3> {
        let (k, b) = self.pair(name)?;
        conv2d(x, k, b, act)
    }

    /// One encoder or decoder block. U: two activated convolutions. RU: the
    /// entry logits `e` feed a chain of activated convolutions whose last
    /// member stays pre-activation; the block returns `relu(chain + e)`.
    pub fn block(&self, x: &Tensor3, prefix: &str) -> Result<Tensor3> {
        let entry = self.conv(x, &format!("{prefix}/entry"), Activation::None)?;
        match self.arch.variant {
            Variant::U => self.conv(&relu(&entry), &format!("{prefix}/conv0"), Activation::Relu),
            Variant::RU | Variant::ARU => {
                let n = self.arch.residual_depth;
                let mut h = relu(&entry);
                for j in 0..n {
                    let act = if j + 1 == n { Activation::None } else { Activation::Relu };
                    h = self.conv(&h, &format!("{prefix}/conv{j}"), act)?;
                }
                Ok(relu(&add(&h, &entry)?))
            }
        }
    }

    /// The (R)U-Net: returns `initial_depth` feature maps at input size.
    pub fn unet(&self, x: &Tensor3) -> Result<Tensor3> {
        let s = self.arch.scale_spaces;
        let mut skips = Vec::with_capacity(s);
        let mut h = x.clone();
        for l in 0..s {
            if l > 0 {
                h = maxpool2(&h);
            }
            h = self.block(&h, &format!("unet/enc{l}"))?;
            skips.push(h.clone());
        }
        for l in (0..s - 1).rev() {
            let skip = &skips[l];
            let (k, b) = self.pair(&format!("unet/dec{l}/up"))?;
            let up = deconv(&h, k, b, 2, skip.dims(), Activation::Relu)?;
            h = self.block(&skip.concat(&up)?, &format!("unet/dec{l}"))?;
        }
        Ok(h)
    }

    /// Attention logits at input size.
    pub fn anet(&self, x: &Tensor3) -> Result<Tensor3> {
        let n = self.arch.anet_depths.len();
        let mut h = x.clone();
        for j in 0..n {
            let act = if j + 1 == n { Activation::None } else { Activation::Relu };
            h = maxpool2(&self.conv(&h, &format!("anet/conv{j}"), act)?);
        }
        let (k, b) = self.pair("anet/up")?;
        deconv(&h, k, b, self.arch.anet_factor(), x.dims(), Activation::None)
    }

    /// Full forward pass on a single-channel input.
    pub fn forward(&self, x: &Tensor3) -> Result<NplOutput> {
        if x.depth() != 1 {
            return Err(NplError::Shape(format!("input depth {}, expected 1", x.depth())));
        }
        let min = self.arch.min_input_side();
        if x.height() < min || x.width() < min {
            return Err(NplError::TooSmall { height: x.height(), width: x.width(), min });
        }
        let (features, attention) = match self.arch.variant {
            Variant::U | Variant::RU => (self.unet(x)?, Vec::new()),
            Variant::ARU => {
                let mut pyramid = vec![x.clone()];
                for _ in 1..self.arch.image_scales {
                    let next = avgpool2(pyramid.last().expect("nonempty"));
                    pyramid.push(next);
                }
                let mut feats = Vec::with_capacity(pyramid.len());
                let mut logits = Vec::with_capacity(pyramid.len());
                for (s, img) in pyramid.iter().enumerate() {
                    let (mut f, mut a) = (self.unet(img)?, self.anet(img)?);
                    if s > 0 {
                        let (k, b) = self.pair(&format!("scale{s}/features_up"))?;
                        f = deconv(&f, k, b, 1 << s, x.dims(), Activation::None)?;
                        let (k, b) = self.pair(&format!("scale{s}/attention_up"))?;
                        a = deconv(&a, k, b, 1 << s, x.dims(), Activation::None)?;
                    }
                    feats.push(f);
                    logits.push(a);
                }
                let attention = attention_softmax(&logits)?;
                (blend(&feats, &attention)?, attention)
            }
        };
        let classes = softmax_channels(&self.conv(&features, "classifier", Activation::None)?);
        Ok(NplOutput { classes, attention })
    }
}

/// Pixel-wise softmax across a stack of single-channel logit maps.
pub fn attention_softmax(logits: &[Tensor3]) -> Result<Vec<Tensor3>> {
    let first = logits.first().ok_or_else(|| NplError::Shape("no attention maps".into()))?;
    let (h, w) = first.dims();
    if logits.iter().any(|a| a.dims() != (h, w) || a.depth() != 1) {
        return Err(NplError::Shape("attention maps must be single-channel with equal dims".into()));
    }
    let mut stacked = Tensor3::zeros(h, w, logits.len());
    for (i, a) in logits.iter().enumerate() {
        for (p, &v) in a.data().iter().enumerate() {
            stacked.data_mut()[p * logits.len() + i] = v;
        }
    }
    let soft = softmax_channels(&stacked);
    Ok((0..logits.len()).map(|i| soft.channel(i)).collect())
}

/// `Σ_i features_i ⊙ attention_i`, the attention broadcast over channels.
pub fn blend(features: &[Tensor3], attention: &[Tensor3]) -> Result<Tensor3> {
    let first = features.first().ok_or_else(|| NplError::Shape("no feature maps".into()))?;
    if features.len() != attention.len() {
        return Err(NplError::Shape(format!("{} feature maps, {} attention maps", features.len(), attention.len())));
    }
    let (h, w, d) = (first.height(), first.width(), first.depth());
    let mut out = Tensor3::zeros(h, w, d);
    for (f, a) in features.iter().zip(attention) {
        if f.dims() != (h, w) || f.depth() != d || a.dims() != (h, w) || a.depth() != 1 {
            return Err(NplError::Shape("blend operands differ in shape".into()));
        }
        for ((o, fv), &av) in out.data_mut().chunks_exact_mut(d).zip(f.data().chunks_exact(d)).zip(a.data()) {
            for (x, y) in o.iter_mut().zip(fv) {
                *x += y * av;
            }
        }
    }
    Ok(out)
}
