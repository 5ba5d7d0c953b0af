//! Raw numeric kernels, generic over the element type.
//!
//! Everything here works on plain slices; shape checking and tape
//! bookkeeping live in `ops`. The matmul is blocked so the per-layer
//! weight panels stay cache-resident; the inner loop is a contiguous
//! axpy that auto-vectorizes.

use super::{Data, DType, Tensor};

pub(crate) trait Element:
    Copy
    + PartialOrd
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
    + std::ops::AddAssign
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn tanh(self) -> Self;
    fn max(self, other: Self) -> Self;
    fn slice(data: &Data) -> &[Self];
    fn into_data(v: Vec<Self>) -> Data;
}

macro_rules! impl_element {
    ($t:ty, $dt:expr, $variant:ident) => {
        impl Element for $t {
            fn zero() -> Self {
                0.0
            }
            fn one() -> Self {
                1.0
            }
            fn from_f64(x: f64) -> Self {
                x as $t
            }
            fn exp(self) -> Self {
                self.exp()
            }
            fn ln(self) -> Self {
                self.ln()
            }
            fn sqrt(self) -> Self {
                self.sqrt()
            }
            fn tanh(self) -> Self {
                self.tanh()
            }
            fn max(self, other: Self) -> Self {
                if self > other {
                    self
                } else {
                    other
                }
            }
            fn slice(data: &Data) -> &[Self] {
                match data {
                    Data::$variant(v) => v,
                    _ => panic!("dtype confusion"),
                }
            }
            fn into_data(v: Vec<Self>) -> Data {
                Data::$variant(v)
            }
        }
    };
}

impl_element!(f32, DType::F32, F32);
impl_element!(f64, DType::F64, F64);

/// Dispatches a generic kernel on a tensor's element type.
macro_rules! with_dtype {
    ($dtype:expr, $T:ident => $body:expr) => {
        match $dtype {
            $crate::tensor::DType::F32 => {
                type $T = f32;
                $body
            }
            $crate::tensor::DType::F64 => {
                type $T = f64;
                $body
            }
        }
    };
}
pub(crate) use with_dtype;

pub(crate) fn tensor_from<T: Element>(shape: Vec<usize>, v: Vec<T>) -> Tensor {
    Tensor::from_data(shape, T::into_data(v))
}

// Depth and column block sizes: a KC x JC panel of B is ~512 KiB at f32,
// which stays L2-resident while all rows of A stream over it.
const KC: usize = 256;
const JC: usize = 512;

/// C[m,n] = A[m,k] * B[k,n], row-major.
pub(crate) fn matmul<T: Element>(a: &[T], b: &[T], m: usize, k: usize, n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); m * n];
    for jj in (0..n).step_by(JC) {
        let jw = JC.min(n - jj);
        for kk in (0..k).step_by(KC) {
            let kw = KC.min(k - kk);
            for i in 0..m {
                let arow = &a[i * k + kk..i * k + kk + kw];
                let crow = &mut out[i * n + jj..i * n + jj + jw];
                for (p, &av) in arow.iter().enumerate() {
                    let brow = &b[(kk + p) * n + jj..(kk + p) * n + jj + jw];
                    for (c, &bv) in crow.iter_mut().zip(brow) {
                        *c += av * bv;
                    }
                }
            }
        }
    }
    out
}

/// C[m,p] = A[m,n] * B[p,n]^T (dot products of rows; used by matmul
/// backward so the adjoints never materialize a transpose).
pub(crate) fn matmul_nt<T: Element>(a: &[T], b: &[T], m: usize, n: usize, p: usize) -> Vec<T> {
    let mut out = vec![T::zero(); m * p];
    for i in 0..m {
        let arow = &a[i * n..(i + 1) * n];
        for q in 0..p {
            let brow = &b[q * n..(q + 1) * n];
            let mut s = T::zero();
            for (&x, &y) in arow.iter().zip(brow) {
                s += x * y;
            }
            out[i * p + q] = s;
        }
    }
    out
}

/// C[k,n] = A[m,k]^T * B[m,n].
pub(crate) fn matmul_tn<T: Element>(a: &[T], b: &[T], m: usize, k: usize, n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); k * n];
    for i in 0..m {
        let brow = &b[i * n..(i + 1) * n];
        for p in 0..k {
            let av = a[i * k + p];
            let crow = &mut out[p * n..(p + 1) * n];
            for (c, &bv) in crow.iter_mut().zip(brow) {
                *c += av * bv;
            }
        }
    }
    out
}

pub(crate) fn transpose<T: Element>(x: &[T], rows: usize, cols: usize) -> Vec<T> {
    let mut out = vec![T::zero(); rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            out[j * rows + i] = x[i * cols + j];
        }
    }
    out
}

pub(crate) fn map<T: Element>(x: &[T], f: impl Fn(T) -> T) -> Vec<T> {
    x.iter().map(|&v| f(v)).collect()
}

pub(crate) fn zip<T: Element>(a: &[T], b: &[T], f: impl Fn(T, T) -> T) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

/// Applies `f(a[i,j], b[j])` with `b` broadcast across rows.
pub(crate) fn zip_rowbcast<T: Element>(
    a: &[T],
    b: &[T],
    rows: usize,
    cols: usize,
    f: impl Fn(T, T) -> T,
) -> Vec<T> {
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            out.push(f(a[i * cols + j], b[j]));
        }
    }
    out
}

/// Sums the rows of `g` down to a single row (broadcast adjoint).
pub(crate) fn sum_rows<T: Element>(g: &[T], rows: usize, cols: usize) -> Vec<T> {
    let mut out = vec![T::zero(); cols];
    for i in 0..rows {
        for j in 0..cols {
            out[j] += g[i * cols + j];
        }
    }
    out
}

pub(crate) fn sigmoid<T: Element>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// elu with alpha = 1.
pub(crate) fn elu<T: Element>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        x.exp() - T::one()
    }
}

pub(crate) fn elu_grad<T: Element>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else {
        x.exp()
    }
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044715;

/// tanh-approximated gelu.
pub(crate) fn gelu<T: Element>(x: T) -> T {
    let c = T::from_f64(GELU_C);
    let a = T::from_f64(GELU_A);
    let half = T::from_f64(0.5);
    let u = c * (x + a * x * x * x);
    half * x * (T::one() + u.tanh())
}

pub(crate) fn gelu_grad<T: Element>(x: T) -> T {
    let c = T::from_f64(GELU_C);
    let a = T::from_f64(GELU_A);
    let half = T::from_f64(0.5);
    let three = T::from_f64(3.0);
    let u = c * (x + a * x * x * x);
    let t = u.tanh();
    let sech2 = T::one() - t * t;
    half * (T::one() + t) + half * x * sech2 * c * (T::one() + three * a * x * x)
}

/// Row-wise softmax over the last dimension of an [rows, cols] matrix.
pub(crate) fn softmax_rows<T: Element>(x: &[T], rows: usize, cols: usize) -> Vec<T> {
    let mut out = vec![T::zero(); rows * cols];
    for i in 0..rows {
        let row = &x[i * cols..(i + 1) * cols];
        let mut mx = row[0];
        for &v in row {
            mx = mx.max(v);
        }
        let mut sum = T::zero();
        for j in 0..cols {
            let e = (row[j] - mx).exp();
            out[i * cols + j] = e;
            sum += e;
        }
        for j in 0..cols {
            out[i * cols + j] = out[i * cols + j] / sum;
        }
    }
    out
}

/// Row-wise log-softmax (shift by the row max for stability).
pub(crate) fn log_softmax_rows<T: Element>(x: &[T], rows: usize, cols: usize) -> Vec<T> {
    let mut out = vec![T::zero(); rows * cols];
    for i in 0..rows {
        let row = &x[i * cols..(i + 1) * cols];
        let mut mx = row[0];
        for &v in row {
            mx = mx.max(v);
        }
        let mut sum = T::zero();
        for &v in row {
            sum += (v - mx).exp();
        }
        let lse = mx + sum.ln();
        for j in 0..cols {
            out[i * cols + j] = row[j] - lse;
        }
    }
    out
}

/// Per-row mean and inverse standard deviation for layer norm.
pub(crate) fn row_moments<T: Element>(x: &[T], rows: usize, cols: usize, eps: T) -> (Vec<T>, Vec<T>) {
    let inv_n = T::one() / T::from_f64(cols as f64);
    let mut mean = Vec::with_capacity(rows);
    let mut inv_std = Vec::with_capacity(rows);
    for i in 0..rows {
        let row = &x[i * cols..(i + 1) * cols];
        let mut mu = T::zero();
        for &v in row {
            mu += v;
        }
        mu = mu * inv_n;
        let mut var = T::zero();
        for &v in row {
            let d = v - mu;
            var += d * d;
        }
        var = var * inv_n;
        mean.push(mu);
        inv_std.push(T::one() / (var + eps).sqrt());
    }
    (mean, inv_std)
}


#[doc(hidden)]
pub fn bench_matmul_f32(a: &[f32], b: &[f32], m: usize, k: usize, n: usize) -> Vec<f32> {
    matmul(a, b, m, k, n)
}
