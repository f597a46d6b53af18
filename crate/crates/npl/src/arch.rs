use crate::error::{NplError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Plain U-Net: two activated convolutions per block.
    U,
    /// U-Net with residual blocks.
    RU,
    /// RU-Net applied to an image pyramid and blended by learned attention.
    ARU,
}

/// Hyperparameters of the pixel labeler.
#[derive(Debug, Clone, PartialEq)]
pub struct NplArchitecture {
    pub scale_spaces: usize,
    pub initial_depth: usize,
    /// Activated layers in a residual block.
    pub residual_depth: usize,
    pub growth_factor: usize,
    pub kernel: usize,
    pub anet_kernel: usize,
    /// Output depths of the A-Net convolutions; the last must be 1.
    pub anet_depths: Vec<usize>,
    pub image_scales: usize,
    pub classifier_kernel: usize,
    pub num_classes: usize,
    pub variant: Variant,
}

impl NplArchitecture {
    /// The reference configuration: 6 scale spaces, initial depth 8,
    /// residual depth 3, growth 2, 3×3 kernels, A-Net 4×4 with depths
    /// 12/16/32/1, 5 image scales, 4×4 three-class classifier.
    pub fn reference(variant: Variant) -> Self {
        Self {
            scale_spaces: 6,
            initial_depth: 8,
            residual_depth: 3,
            growth_factor: 2,
            kernel: 3,
            anet_kernel: 4,
            anet_depths: vec![12, 16, 32, 1],
            image_scales: 5,
            classifier_kernel: 4,
            num_classes: 3,
            variant,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(NplError::Shape(format!("invalid architecture: {m}")));
        if self.scale_spaces == 0 || self.image_scales == 0 {
            return bad("scale_spaces and image_scales must be at least 1");
        }
        if self.growth_factor < 2 {
            return bad("growth_factor must be at least 2");
        }
        if self.initial_depth == 0 || self.kernel == 0 || self.classifier_kernel == 0 || self.num_classes == 0 {
            return bad("depths and kernel sizes must be positive");
        }
        if matches!(self.variant, Variant::RU | Variant::ARU) && self.residual_depth == 0 {
            return bad("residual_depth must be at least 1");
        }
        if self.variant == Variant::ARU && (self.anet_depths.last() != Some(&1) || self.anet_kernel == 0) {
            return bad("the A-Net must end in a single channel");
        }
        Ok(())
    }

    /// Feature depth of scale space `level`.
    pub fn depth_at(&self, level: usize) -> usize {
        self.initial_depth * self.growth_factor.pow(level as u32)
    }

    /// Smallest accepted input side: one pixel at the coarsest scale space.
    pub fn min_input_side(&self) -> usize {
        1 << (self.scale_spaces - 1)
    }

    /// Total downsampling of the A-Net (one 2×2 pool per convolution).
    pub fn anet_factor(&self) -> usize {
        1 << self.anet_depths.len()
    }

    /// Convolutions in one block after the entry convolution.
    pub fn inner_convs(&self) -> usize {
        match self.variant {
            Variant::U => 1,
            Variant::RU | Variant::ARU => self.residual_depth,
        }
    }

    /// Every parameter slot as `(name, dims)`, in construction order.
    pub fn slots(&self) -> Vec<(String, Vec<usize>)> {
        let mut out = Vec::new();
        let mut conv = |name: String, k: usize, i: usize, o: usize| {
            out.push((format!("{name}/kernel"), vec![k, k, i, o]));
            out.push((format!("{name}/bias"), vec![o]));
        };
        let k = self.kernel;
        let block = |conv: &mut dyn FnMut(String, usize, usize, usize), prefix: String, i: usize, z: usize| {
            conv(format!("{prefix}/entry"), k, i, z);
            for j in 0..self.inner_convs() {
                conv(format!("{prefix}/conv{j}"), k, z, z);
            }
        };
        for l in 0..self.scale_spaces {
            let i = if l == 0 { 1 } else { self.depth_at(l - 1) };
            block(&mut conv, format!("unet/enc{l}"), i, self.depth_at(l));
        }
        for l in (0..self.scale_spaces - 1).rev() {
            let z = self.depth_at(l);
            conv(format!("unet/dec{l}/up"), k, self.depth_at(l + 1), z);
            block(&mut conv, format!("unet/dec{l}"), 2 * z, z);
        }
        if self.variant == Variant::ARU {
            let mut i = 1;
            for (j, &o) in self.anet_depths.iter().enumerate() {
                conv(format!("anet/conv{j}"), self.anet_kernel, i, o);
                i = o;
            }
            conv("anet/up".into(), self.anet_factor(), 1, 1);
            for s in 1..self.image_scales {
                conv(format!("scale{s}/features_up"), 1 << s, self.initial_depth, self.initial_depth);
                conv(format!("scale{s}/attention_up"), 1 << s, 1, 1);
            }
        }
        conv("classifier".into(), self.classifier_kernel, self.initial_depth, self.num_classes);
        out
    }
}

/// Number of trainable scalars of the architecture.
pub fn count_parameters(arch: &NplArchitecture) -> usize {
    arch.slots().iter().map(|(_, d)| d.iter().product::<usize>()).sum()
}
