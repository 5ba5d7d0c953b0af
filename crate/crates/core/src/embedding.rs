//! Image-to-token conversion for the two streams.
//!
//! Patches are flattened channel-major within a patch, raster order across
//! patches, so checkpoints are portable across implementations of this
//! layout. Inputs live in [0, 1]; [`standardize`] maps them to the fixed
//! per-channel mean/std of 0.5/0.5 just before projection.

use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VittmError};
use crate::tensor::{DType, Parameter, Tensor, Var};

pub const CHANNELS: usize = 3;

/// RGB image with values in [0, 1], stored as channel planes (C, H, W).
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl Image {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Image> {
        if values.len() != CHANNELS * height * width {
            return Err(VittmError::Contract(format!(
                "image {height}x{width} needs {} values, got {}",
                CHANNELS * height * width,
                values.len()
            )));
        }
        Ok(Image {
            height,
            width,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn value(&self, channel: usize, y: usize, x: usize) -> f64 {
        self.values[(channel * self.height + y) * self.width + x]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// How the process stream gets its initial tokens.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// A learned, image-independent token set.
    Latent,
    /// Average-pool the memory token grid down to the process grid.
    DownSample,
    /// A second learned patch projection (the default).
    Patch,
}

/// Splits the image into non-overlapping `p`-sized patches; row `i` holds
/// the channel-major pixels of patch `i` in raster order. Lossless:
/// [`unpatchify`] restores the image exactly.
pub fn patchify(img: &Image, p: usize) -> Result<Tensor> {
    if p == 0 || img.height % p != 0 || img.width % p != 0 {
        return Err(VittmError::Config(format!(
            "patch size {p} does not divide image {}x{}",
            img.height, img.width
        )));
    }
    let gy = img.height / p;
    let gx = img.width / p;
    let row_len = CHANNELS * p * p;
    let mut data = Vec::with_capacity(gy * gx * row_len);
    for py in 0..gy {
        for px in 0..gx {
            for c in 0..CHANNELS {
                for dy in 0..p {
                    for dx in 0..p {
                        data.push(img.value(c, py * p + dy, px * p + dx));
                    }
                }
            }
        }
    }
    Tensor::new_f64(&[gy * gx, row_len], data)
}

/// Exact inverse of [`patchify`].
pub fn unpatchify(patches: &Tensor, p: usize, height: usize, width: usize) -> Result<Image> {
    let gy = height / p;
    let gx = width / p;
    let row_len = CHANNELS * p * p;
    if patches.shape() != [gy * gx, row_len] || height % p != 0 || width % p != 0 {
        return Err(VittmError::dim(
            "unpatchify",
            patches.shape(),
            &[gy * gx, row_len],
        ));
    }
    let src = patches.to_f64_vec();
    let mut values = vec![0.0; CHANNELS * height * width];
    for py in 0..gy {
        for px in 0..gx {
            let row = (py * gx + px) * row_len;
            let mut k = 0;
            for c in 0..CHANNELS {
                for dy in 0..p {
                    for dx in 0..p {
                        let y = py * p + dy;
                        let x = px * p + dx;
                        values[(c * height + y) * width + x] = src[row + k];
                        k += 1;
                    }
                }
            }
        }
    }
    Image::new(height, width, values)
}

/// Maps [0, 1] inputs to zero mean and unit-ish scale with the fixed
/// per-channel constants mean = std = 0.5, i.e. `2x - 1`.
pub fn standardize(patches: &Var) -> Result<Var> {
    patches.affine(2.0, -1.0)
}

/// Linear projection plus learned positional table: `patches * proj + pos`.
pub fn embed_stream(patches: &Var, proj: &Rc<Parameter>, pos: &Rc<Parameter>) -> Result<Var> {
    patches.matmul(&proj.var())?.add(&pos.var())
}

/// Constant `[K, T]` matrix whose product with the memory tokens is the
/// 2-D average pool of the memory grid down to the process grid.
pub fn downsample_matrix(mem_grid: usize, proc_grid: usize, dtype: DType) -> Result<Tensor> {
    if proc_grid == 0 || mem_grid % proc_grid != 0 {
        return Err(VittmError::Config(format!(
            "memory grid {mem_grid} is not an integer multiple of process grid {proc_grid}"
        )));
    }
    let s = mem_grid / proc_grid;
    let k = proc_grid * proc_grid;
    let t = mem_grid * mem_grid;
    let w = 1.0 / (s * s) as f64;
    let mut data = vec![0.0; k * t];
    for ky in 0..proc_grid {
        for kx in 0..proc_grid {
            let row = ky * proc_grid + kx;
            for dy in 0..s {
                for dx in 0..s {
                    let ty = ky * s + dy;
                    let tx = kx * s + dx;
                    data[row * t + ty * mem_grid + tx] = w;
                }
            }
        }
    }
    Ok(Tensor::new_f64(&[k, t], data)?.to_dtype(dtype))
}
