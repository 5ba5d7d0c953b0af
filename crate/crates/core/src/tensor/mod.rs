//! Minimal dense-tensor math with tape-based reverse-mode differentiation.
//!
//! Tensors are immutable, row-major and contiguous; the element type is a
//! per-tensor property (`f64` is the default for tests and training, `f32`
//! for latency benchmarks). Differentiable computation goes through
//! [`Var`], which records a backward tape while gradients are enabled.

mod autodiff;
mod gradcheck;
mod io;
pub(crate) mod kernels;
mod ops;

pub use autodiff::{backward, is_grad_enabled, no_grad, Parameter, Var};
pub use gradcheck::grad_check;
pub use io::{read_tensor, write_tensor};
#[doc(hidden)]
pub use kernels::bench_matmul_f32;

use std::fmt;
use std::sync::Arc;

use rand_chacha::rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VittmError};

/// Element type of a tensor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DType {
    F32,
    F64,
}

#[derive(Clone, Debug)]
pub(crate) enum Data {
    F32(Vec<f32>),
    F64(Vec<f64>),
}

struct Inner {
    shape: Vec<usize>,
    data: Data,
}

/// Dense N-dimensional array, immutable after construction.
///
/// Cloning is cheap (shared storage). `product(shape)` always equals the
/// data length.
#[derive(Clone)]
pub struct Tensor {
    inner: Arc<Inner>,
}

impl Tensor {
    pub(crate) fn from_data(shape: Vec<usize>, data: Data) -> Tensor {
        let numel: usize = shape.iter().product();
        let len = match &data {
            Data::F32(v) => v.len(),
            Data::F64(v) => v.len(),
        };
        assert_eq!(numel, len, "shape {:?} does not match data length {}", shape, len);
        Tensor {
            inner: Arc::new(Inner { shape, data }),
        }
    }

    /// Builds an `f64` tensor, checking that the shape matches the data.
    pub fn new_f64(shape: &[usize], data: Vec<f64>) -> Result<Tensor> {
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(VittmError::Contract(format!(
                "shape {:?} implies {} elements but {} were provided",
                shape,
                numel,
                data.len()
            )));
        }
        Ok(Tensor::from_data(shape.to_vec(), Data::F64(data)))
    }

    /// Builds an `f32` tensor, checking that the shape matches the data.
    pub fn new_f32(shape: &[usize], data: Vec<f32>) -> Result<Tensor> {
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(VittmError::Contract(format!(
                "shape {:?} implies {} elements but {} were provided",
                shape,
                numel,
                data.len()
            )));
        }
        Ok(Tensor::from_data(shape.to_vec(), Data::F32(data)))
    }

    pub fn zeros(shape: &[usize], dtype: DType) -> Tensor {
        let numel: usize = shape.iter().product();
        let data = match dtype {
            DType::F32 => Data::F32(vec![0.0; numel]),
            DType::F64 => Data::F64(vec![0.0; numel]),
        };
        Tensor::from_data(shape.to_vec(), data)
    }

    pub fn ones(shape: &[usize], dtype: DType) -> Tensor {
        Tensor::full(shape, 1.0, dtype)
    }

    pub fn full(shape: &[usize], value: f64, dtype: DType) -> Tensor {
        let numel: usize = shape.iter().product();
        let data = match dtype {
            DType::F32 => Data::F32(vec![value as f32; numel]),
            DType::F64 => Data::F64(vec![value; numel]),
        };
        Tensor::from_data(shape.to_vec(), data)
    }

    /// Gaussian samples with the given standard deviation (Box-Muller over
    /// the raw RNG stream, so the result depends only on the seed).
    pub fn randn<R: RngCore>(shape: &[usize], std: f64, dtype: DType, rng: &mut R) -> Tensor {
        let numel: usize = shape.iter().product();
        let mut vals = Vec::with_capacity(numel);
        while vals.len() < numel {
            let u1 = uniform_open01(rng);
            let u2 = uniform_open01(rng);
            let r = (-2.0 * u1.ln()).sqrt();
            let theta = 2.0 * std::f64::consts::PI * u2;
            vals.push(r * theta.cos() * std);
            if vals.len() < numel {
                vals.push(r * theta.sin() * std);
            }
        }
        let t = Tensor::from_data(shape.to_vec(), Data::F64(vals));
        t.to_dtype(dtype)
    }

    pub fn shape(&self) -> &[usize] {
        &self.inner.shape
    }

    pub fn rank(&self) -> usize {
        self.inner.shape.len()
    }

    pub fn numel(&self) -> usize {
        self.inner.shape.iter().product()
    }

    pub fn dtype(&self) -> DType {
        match self.inner.data {
            Data::F32(_) => DType::F32,
            Data::F64(_) => DType::F64,
        }
    }

    pub(crate) fn data(&self) -> &Data {
        &self.inner.data
    }

    /// Borrows the raw storage; panics if the tensor is not `f32`.
    pub fn as_f32(&self) -> &[f32] {
        match &self.inner.data {
            Data::F32(v) => v,
            Data::F64(_) => panic!("tensor is f64, not f32"),
        }
    }

    /// Borrows the raw storage; panics if the tensor is not `f64`.
    pub fn as_f64(&self) -> &[f64] {
        match &self.inner.data {
            Data::F64(v) => v,
            Data::F32(_) => panic!("tensor is f32, not f64"),
        }
    }

    /// Copies the values out, widening `f32` to `f64`.
    pub fn to_f64_vec(&self) -> Vec<f64> {
        match &self.inner.data {
            Data::F32(v) => v.iter().map(|&x| x as f64).collect(),
            Data::F64(v) => v.clone(),
        }
    }

    /// Element at a flat index, widened to `f64`.
    pub fn at(&self, flat: usize) -> f64 {
        match &self.inner.data {
            Data::F32(v) => v[flat] as f64,
            Data::F64(v) => v[flat],
        }
    }

    /// Element of a rank-2 tensor.
    pub fn at2(&self, row: usize, col: usize) -> f64 {
        debug_assert_eq!(self.rank(), 2);
        self.at(row * self.inner.shape[1] + col)
    }

    /// Converts to the requested element type (no-op if it already matches).
    pub fn to_dtype(&self, dtype: DType) -> Tensor {
        if self.dtype() == dtype {
            return self.clone();
        }
        let data = match (&self.inner.data, dtype) {
            (Data::F32(v), DType::F64) => Data::F64(v.iter().map(|&x| x as f64).collect()),
            (Data::F64(v), DType::F32) => Data::F32(v.iter().map(|&x| x as f32).collect()),
            _ => unreachable!(),
        };
        Tensor::from_data(self.inner.shape.clone(), data)
    }

    pub fn is_all_finite(&self) -> bool {
        match &self.inner.data {
            Data::F32(v) => v.iter().all(|x| x.is_finite()),
            Data::F64(v) => v.iter().all(|x| x.is_finite()),
        }
    }

    /// True when shapes, dtypes and every bit of the payload agree.
    pub fn bitwise_eq(&self, other: &Tensor) -> bool {
        if self.shape() != other.shape() {
            return false;
        }
        match (&self.inner.data, &other.inner.data) {
            (Data::F32(a), Data::F32(b)) => {
                a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            (Data::F64(a), Data::F64(b)) => {
                a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            _ => false,
        }
    }

    /// Largest relative difference against `other`, using
    /// `|a-b| / max(1, |a|, |b|)` per element.
    pub fn max_rel_diff(&self, other: &Tensor) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in comparison");
        let a = self.to_f64_vec();
        let b = other.to_f64_vec();
        a.iter()
            .zip(&b)
            .map(|(&x, &y)| (x - y).abs() / 1f64.max(x.abs()).max(y.abs()))
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tensor[{:?}, {:?}]", self.inner.shape, self.dtype())?;
        if self.numel() <= 16 {
            write!(f, " {:?}", self.to_f64_vec())?;
        }
        Ok(())
    }
}

/// Uniform in (0, 1], safe for `ln`.
fn uniform_open01<R: RngCore>(rng: &mut R) -> f64 {
    let x = rng.next_u64() >> 11; // 53 random bits
    (x as f64 + 1.0) * (1.0 / 9007199254740992.0)
}
