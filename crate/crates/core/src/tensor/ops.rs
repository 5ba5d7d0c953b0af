//! Differentiable operations on [`Var`].
//!
//! Each op checks shapes, runs the forward kernel, and registers a closure
//! producing one cotangent per parent. Broadcasting is limited to
//! leading-axis expansion: a `[d]` or `[1, d]` operand may pair with an
//! `[n, d]` one; the adjoint sums over the expanded rows.

use super::kernels::{self, with_dtype, Element};
use super::{DType, Tensor, Var};
use crate::error::{Result, VittmError};

// ---------------------------------------------------------------------------
// raw tensor helpers (shared with the autodiff engine and the trainer)

pub(crate) fn tensor_add(a: &Tensor, b: &Tensor) -> Tensor {
    debug_assert_eq!(a.shape(), b.shape());
    with_dtype!(a.dtype(), T => {
        let v = kernels::zip(T::slice(a.data()), T::slice(b.data()), |x, y| x + y);
        kernels::tensor_from(a.shape().to_vec(), v)
    })
}

pub(crate) fn tensor_scale(a: &Tensor, s: f64) -> Tensor {
    with_dtype!(a.dtype(), T => {
        let sv = T::from_f64(s);
        let v = kernels::map(T::slice(a.data()), |x| x * sv);
        kernels::tensor_from(a.shape().to_vec(), v)
    })
}

pub(crate) fn tensor_mul(a: &Tensor, b: &Tensor) -> Tensor {
    debug_assert_eq!(a.shape(), b.shape());
    with_dtype!(a.dtype(), T => {
        let v = kernels::zip(T::slice(a.data()), T::slice(b.data()), |x, y| x * y);
        kernels::tensor_from(a.shape().to_vec(), v)
    })
}

pub(crate) fn tensor_matmul(a: &Tensor, b: &Tensor) -> Tensor {
    let (m, k) = (a.shape()[0], a.shape()[1]);
    let n = b.shape()[1];
    debug_assert_eq!(k, b.shape()[0]);
    with_dtype!(a.dtype(), T => {
        let v = kernels::matmul(T::slice(a.data()), T::slice(b.data()), m, k, n);
        kernels::tensor_from(vec![m, n], v)
    })
}

fn tensor_matmul_nt(a: &Tensor, b: &Tensor) -> Tensor {
    let (m, n) = (a.shape()[0], a.shape()[1]);
    let p = b.shape()[0];
    debug_assert_eq!(n, b.shape()[1]);
    with_dtype!(a.dtype(), T => {
        let v = kernels::matmul_nt(T::slice(a.data()), T::slice(b.data()), m, n, p);
        kernels::tensor_from(vec![m, p], v)
    })
}

fn tensor_matmul_tn(a: &Tensor, b: &Tensor) -> Tensor {
    let (m, k) = (a.shape()[0], a.shape()[1]);
    let n = b.shape()[1];
    debug_assert_eq!(m, b.shape()[0]);
    with_dtype!(a.dtype(), T => {
        let v = kernels::matmul_tn(T::slice(a.data()), T::slice(b.data()), m, k, n);
        kernels::tensor_from(vec![k, n], v)
    })
}

fn tensor_transpose(a: &Tensor) -> Tensor {
    let (r, c) = (a.shape()[0], a.shape()[1]);
    with_dtype!(a.dtype(), T => {
        let v = kernels::transpose(T::slice(a.data()), r, c);
        kernels::tensor_from(vec![c, r], v)
    })
}

/// Rows/cols view of the trailing dimension.
fn row_view(shape: &[usize]) -> (usize, usize) {
    let cols = *shape.last().expect("rank >= 1");
    let rows = shape.iter().product::<usize>() / cols;
    (rows, cols)
}

fn check_dtype(op: &'static str, a: &Var, b: &Var) -> Result<()> {
    if a.dtype() != b.dtype() {
        return Err(VittmError::DTypeMismatch {
            op,
            lhs: a.dtype(),
            rhs: b.dtype(),
        });
    }
    Ok(())
}

/// How the second operand of a binary op lines up with the first.
enum Broadcast {
    Same,
    /// rhs is `[d]` or `[1, d]`, expanded across the rows of lhs.
    RhsRow,
    /// lhs is the row vector instead.
    LhsRow,
}

fn is_row_of(small: &[usize], big: &[usize]) -> bool {
    let cols = *big.last().unwrap();
    (small == [cols]) || (small == [1, cols] && big.len() == 2)
}

fn broadcast_kind(op: &'static str, lhs: &[usize], rhs: &[usize]) -> Result<Broadcast> {
    if lhs == rhs {
        Ok(Broadcast::Same)
    } else if is_row_of(rhs, lhs) {
        Ok(Broadcast::RhsRow)
    } else if is_row_of(lhs, rhs) {
        Ok(Broadcast::LhsRow)
    } else {
        Err(VittmError::dim(op, lhs, rhs))
    }
}

impl Var {
    // -- structural ---------------------------------------------------------

    /// Matrix product of two rank-2 tensors.
    pub fn matmul(&self, rhs: &Var) -> Result<Var> {
        check_dtype("matmul", self, rhs)?;
        if self.shape().len() != 2 || rhs.shape().len() != 2 || self.shape()[1] != rhs.shape()[0] {
            return Err(VittmError::dim("matmul", self.shape(), rhs.shape()));
        }
        let out = tensor_matmul(self.value(), rhs.value());
        let (a, b) = (self.value().clone(), rhs.value().clone());
        let (need_a, need_b) = (self.is_tracked(), rhs.is_tracked());
        Ok(Var::from_op(out, vec![self.node(), rhs.node()], move |g| {
            vec![
                need_a.then(|| tensor_matmul_nt(g, &b)), // dA = g * B^T
                need_b.then(|| tensor_matmul_tn(&a, g)), // dB = A^T * g
            ]
        }))
    }

    pub fn transpose(&self) -> Result<Var> {
        if self.shape().len() != 2 {
            return Err(VittmError::dim("transpose", self.shape(), &[]));
        }
        let out = tensor_transpose(self.value());
        Ok(Var::from_op(out, vec![self.node()], move |g| {
            vec![Some(tensor_transpose(g))]
        }))
    }

    /// Columns `[start, start+len)` of a rank-2 tensor.
    pub fn slice_cols(&self, start: usize, len: usize) -> Result<Var> {
        if self.shape().len() != 2 || start + len > self.shape()[1] {
            return Err(VittmError::dim("slice_cols", self.shape(), &[start, len]));
        }
        let (rows, cols) = (self.shape()[0], self.shape()[1]);
        let out = with_dtype!(self.dtype(), T => {
            let x = T::slice(self.value().data());
            let mut v = Vec::with_capacity(rows * len);
            for i in 0..rows {
                v.extend_from_slice(&x[i * cols + start..i * cols + start + len]);
            }
            kernels::tensor_from(vec![rows, len], v)
        });
        Ok(Var::from_op(out, vec![self.node()], move |g| {
            let full = with_dtype!(g.dtype(), T => {
                let gs = T::slice(g.data());
                let mut v = vec![T::zero(); rows * cols];
                for i in 0..rows {
                    v[i * cols + start..i * cols + start + len]
                        .copy_from_slice(&gs[i * len..(i + 1) * len]);
                }
                kernels::tensor_from(vec![rows, cols], v)
            });
            vec![Some(full)]
        }))
    }

    /// Concatenates rank-2 tensors with equal row counts along columns.
    pub fn concat_cols(parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(VittmError::Contract("concat_cols of zero tensors".into()));
        }
        let rows = parts[0].shape()[0];
        let dtype = parts[0].dtype();
        let mut widths = Vec::with_capacity(parts.len());
        for p in parts {
            check_dtype("concat_cols", &parts[0], p)?;
            if p.shape().len() != 2 || p.shape()[0] != rows {
                return Err(VittmError::dim("concat_cols", parts[0].shape(), p.shape()));
            }
            widths.push(p.shape()[1]);
        }
        let total: usize = widths.iter().sum();
        let out = with_dtype!(dtype, T => {
            let mut v = Vec::with_capacity(rows * total);
            for i in 0..rows {
                for p in parts {
                    let w = p.shape()[1];
                    v.extend_from_slice(&T::slice(p.value().data())[i * w..(i + 1) * w]);
                }
            }
            kernels::tensor_from(vec![rows, total], v)
        });
        let nodes: Vec<_> = parts.iter().map(Var::node).collect();
        let widths_c = widths.clone();
        Ok(Var::from_op(out, nodes, move |g| {
            let mut offset = 0;
            let mut grads = Vec::with_capacity(widths_c.len());
            for &w in &widths_c {
                let piece = with_dtype!(g.dtype(), T => {
                    let gs = T::slice(g.data());
                    let mut v = Vec::with_capacity(rows * w);
                    for i in 0..rows {
                        v.extend_from_slice(&gs[i * total + offset..i * total + offset + w]);
                    }
                    kernels::tensor_from(vec![rows, w], v)
                });
                grads.push(Some(piece));
                offset += w;
            }
            grads
        }))
    }

    // -- arithmetic ---------------------------------------------------------

    pub fn add(&self, rhs: &Var) -> Result<Var> {
        self.binary_bcast("add", rhs, AddLike::Add)
    }

    pub fn sub(&self, rhs: &Var) -> Result<Var> {
        self.binary_bcast("sub", rhs, AddLike::Sub)
    }

    /// Elementwise product (same shape, or one operand a broadcast row).
    pub fn mul(&self, rhs: &Var) -> Result<Var> {
        check_dtype("mul", self, rhs)?;
        let kind = broadcast_kind("mul", self.shape(), rhs.shape())?;
        let (a, b) = (self.value().clone(), rhs.value().clone());
        let (need_a, need_b) = (self.is_tracked(), rhs.is_tracked());
        let out = match kind {
            Broadcast::Same => tensor_mul(&a, &b),
            Broadcast::RhsRow => rowbcast_mul(&a, &b),
            Broadcast::LhsRow => rowbcast_mul(&b, &a),
        };
        let (ash, bsh) = (a.shape().to_vec(), b.shape().to_vec());
        Ok(Var::from_op(out, vec![self.node(), rhs.node()], move |g| {
            // d(target) = g * other, contracted over rows when `target`
            // was the broadcast row operand.
            let grad_for = |target_shape: &[usize], other: &Tensor| {
                if target_shape == g.shape() {
                    if other.shape() == g.shape() {
                        tensor_mul(g, other)
                    } else {
                        rowbcast_mul(g, other)
                    }
                } else {
                    let prod = tensor_mul(g, other);
                    sum_to_row(&prod, target_shape)
                }
            };
            vec![
                need_a.then(|| grad_for(&ash, &b)),
                need_b.then(|| grad_for(&bsh, &a)),
            ]
        }))
    }

    /// `scale * x + shift` with scalar constants.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Var> {
        let out = with_dtype!(self.dtype(), T => {
            let (s, c) = (T::from_f64(scale), T::from_f64(shift));
            let v = kernels::map(T::slice(self.value().data()), |x| x * s + c);
            kernels::tensor_from(self.shape().to_vec(), v)
        });
        Ok(Var::from_op(out, vec![self.node()], move |g| {
            vec![Some(tensor_scale(g, scale))]
        }))
    }

    /// Multiplies row `i` of `[n, d]` by scalar `s[i]` (`s` is `[n]` or `[n, 1]`).
    pub fn scale_rows(&self, s: &Var) -> Result<Var> {
        check_dtype("scale_rows", self, s)?;
        let n = self.shape()[0];
        let ok = self.shape().len() == 2
            && (s.shape() == [n] || s.shape() == [n, 1]);
        if !ok {
            return Err(VittmError::dim("scale_rows", self.shape(), s.shape()));
        }
        let d = self.shape()[1];
        let out = with_dtype!(self.dtype(), T => {
            let x = T::slice(self.value().data());
            let sv = T::slice(s.value().data());
            let mut v = Vec::with_capacity(n * d);
            for i in 0..n {
                for j in 0..d {
                    v.push(x[i * d + j] * sv[i]);
                }
            }
            kernels::tensor_from(self.shape().to_vec(), v)
        });
        let (x, sv) = (self.value().clone(), s.value().clone());
        let (need_x, need_s) = (self.is_tracked(), s.is_tracked());
        let s_shape = s.shape().to_vec();
        Ok(Var::from_op(out, vec![self.node(), s.node()], move |g| {
            let dx = need_x.then(|| {
                with_dtype!(g.dtype(), T => {
                    let gs = T::slice(g.data());
                    let ss = T::slice(sv.data());
                    let mut v = Vec::with_capacity(n * d);
                    for i in 0..n {
                        for j in 0..d {
                            v.push(gs[i * d + j] * ss[i]);
                        }
                    }
                    kernels::tensor_from(vec![n, d], v)
                })
            });
            let ds = need_s.then(|| {
                with_dtype!(g.dtype(), T => {
                    let gs = T::slice(g.data());
                    let xs = T::slice(x.data());
                    let mut v = Vec::with_capacity(n);
                    for i in 0..n {
                        let mut acc = T::zero();
                        for j in 0..d {
                            acc += gs[i * d + j] * xs[i * d + j];
                        }
                        v.push(acc);
                    }
                    kernels::tensor_from(s_shape.clone(), v)
                })
            });
            vec![dx, ds]
        }))
    }

    // -- nonlinearities ------------------------------------------------------

    pub fn sigmoid(&self) -> Result<Var> {
        let out = unary_forward(self, kernels::sigmoid::<f32>, kernels::sigmoid::<f64>);
        let y = out.clone();
        Ok(Var::from_op(out, vec![self.node()], move |g| {
            // sigma' = sigma (1 - sigma)
            let dx = with_dtype!(g.dtype(), T => {
                let v = kernels::zip(T::slice(g.data()), T::slice(y.data()), |gv, yv| {
                    gv * yv * (T::one() - yv)
                });
                kernels::tensor_from(g.shape().to_vec(), v)
            });
            vec![Some(dx)]
        }))
    }

    /// elu with alpha = 1, so `1 + elu(x)` is the positive feature map.
    pub fn elu(&self) -> Result<Var> {
        let out = unary_forward(self, kernels::elu::<f32>, kernels::elu::<f64>);
        let x = self.value().clone();
        Ok(Var::from_op(out, vec![self.node()], move |g| {
            let dx = with_dtype!(g.dtype(), T => {
                let v = kernels::zip(T::slice(g.data()), T::slice(x.data()), |gv, xv| {
                    gv * kernels::elu_grad(xv)
                });
                kernels::tensor_from(g.shape().to_vec(), v)
            });
            vec![Some(dx)]
        }))
    }

    pub fn gelu(&self) -> Result<Var> {
        let out = unary_forward(self, kernels::gelu::<f32>, kernels::gelu::<f64>);
        let x = self.value().clone();
        Ok(Var::from_op(out, vec![self.node()], move |g| {
            let dx = with_dtype!(g.dtype(), T => {
                let v = kernels::zip(T::slice(g.data()), T::slice(x.data()), |gv, xv| {
                    gv * kernels::gelu_grad(xv)
                });
                kernels::tensor_from(g.shape().to_vec(), v)
            });
            vec![Some(dx)]
        }))
    }

    pub fn recip(&self) -> Result<Var> {
        let out = with_dtype!(self.dtype(), T => {
            let v = kernels::map(T::slice(self.value().data()), |x| T::one() / x);
            kernels::tensor_from(self.shape().to_vec(), v)
        });
        let y = out.clone();
        Ok(Var::from_op(out, vec![self.node()], move |g| {
            let dx = with_dtype!(g.dtype(), T => {
                let v = kernels::zip(T::slice(g.data()), T::slice(y.data()), |gv, yv| {
                    -gv * yv * yv
                });
                kernels::tensor_from(g.shape().to_vec(), v)
            });
            vec![Some(dx)]
        }))
    }

    // -- reductions and normalizers ------------------------------------------

    /// Softmax along the last dimension; rows sum to one.
    pub fn softmax_lastdim(&self) -> Result<Var> {
        let (rows, cols) = row_view(self.shape());
        let out = with_dtype!(self.dtype(), T => {
            let v = kernels::softmax_rows(T::slice(self.value().data()), rows, cols);
            kernels::tensor_from(self.shape().to_vec(), v)
        });
        let y = out.clone();
        Ok(Var::from_op(out, vec![self.node()], move |g| {
            let dx = with_dtype!(g.dtype(), T => {
                let gs = T::slice(g.data());
                let ys = T::slice(y.data());
                let mut v = vec![T::zero(); gs.len()];
                for i in 0..rows {
                    let mut dot = T::zero();
                    for j in 0..cols {
                        dot += gs[i * cols + j] * ys[i * cols + j];
                    }
                    for j in 0..cols {
                        let idx = i * cols + j;
                        v[idx] = ys[idx] * (gs[idx] - dot);
                    }
                }
                kernels::tensor_from(g.shape().to_vec(), v)
            });
            vec![Some(dx)]
        }))
    }

    /// Numerically stable log-softmax along the last dimension.
    pub fn log_softmax_lastdim(&self) -> Result<Var> {
        let (rows, cols) = row_view(self.shape());
        let out = with_dtype!(self.dtype(), T => {
            let v = kernels::log_softmax_rows(T::slice(self.value().data()), rows, cols);
            kernels::tensor_from(self.shape().to_vec(), v)
        });
        let y = out.clone();
        Ok(Var::from_op(out, vec![self.node()], move |g| {
            let dx = with_dtype!(g.dtype(), T => {
                let gs = T::slice(g.data());
                let ys = T::slice(y.data());
                let mut v = vec![T::zero(); gs.len()];
                for i in 0..rows {
                    let mut gsum = T::zero();
                    for j in 0..cols {
                        gsum += gs[i * cols + j];
                    }
                    for j in 0..cols {
                        let idx = i * cols + j;
                        v[idx] = gs[idx] - ys[idx].exp() * gsum;
                    }
                }
                kernels::tensor_from(g.shape().to_vec(), v)
            });
            vec![Some(dx)]
        }))
    }

    /// Mean over the last dimension, keeping it as size 1.
    pub fn mean_lastdim(&self) -> Result<Var> {
        let (rows, cols) = row_view(self.shape());
        let mut out_shape = self.shape().to_vec();
        *out_shape.last_mut().unwrap() = 1;
        let out = with_dtype!(self.dtype(), T => {
            let x = T::slice(self.value().data());
            let inv = T::from_f64(1.0 / cols as f64);
            let mut v = Vec::with_capacity(rows);
            for i in 0..rows {
                let mut s = T::zero();
                for j in 0..cols {
                    s += x[i * cols + j];
                }
                v.push(s * inv);
            }
            kernels::tensor_from(out_shape.clone(), v)
        });
        let in_shape = self.shape().to_vec();
        Ok(Var::from_op(out, vec![self.node()], move |g| {
            let dx = with_dtype!(g.dtype(), T => {
                let gs = T::slice(g.data());
                let inv = T::from_f64(1.0 / cols as f64);
                let mut v = Vec::with_capacity(rows * cols);
                for i in 0..rows {
                    for _ in 0..cols {
                        v.push(gs[i] * inv);
                    }
                }
                kernels::tensor_from(in_shape.clone(), v)
            });
            vec![Some(dx)]
        }))
    }

    /// Sum of all elements, as a `[1]` tensor.
    pub fn sum_all(&self) -> Result<Var> {
        let out = with_dtype!(self.dtype(), T => {
            let mut s = T::zero();
            for &x in T::slice(self.value().data()) {
                s += x;
            }
            kernels::tensor_from(vec![1], vec![s])
        });
        let in_shape = self.shape().to_vec();
        Ok(Var::from_op(out, vec![self.node()], move |g| {
            let gv = g.at(0);
            vec![Some(Tensor::full(&in_shape, gv, g.dtype()))]
        }))
    }

    /// Per-row normalization over the last dimension with learned scale
    /// and shift (`gamma`, `beta` are `[d]` or `[1, d]`).
    pub fn layer_norm(&self, gamma: &Var, beta: &Var, eps: f64) -> Result<Var> {
        check_dtype("layer_norm", self, gamma)?;
        check_dtype("layer_norm", self, beta)?;
        let (rows, cols) = row_view(self.shape());
        if !is_row_of(gamma.shape(), self.shape()) || !is_row_of(beta.shape(), self.shape()) {
            return Err(VittmError::dim("layer_norm", self.shape(), gamma.shape()));
        }
        let (out, xhat) = with_dtype!(self.dtype(), T => {
            let x = T::slice(self.value().data());
            let gm = T::slice(gamma.value().data());
            let bt = T::slice(beta.value().data());
            let (mean, inv_std) = kernels::row_moments(x, rows, cols, T::from_f64(eps));
            let mut xh = Vec::with_capacity(rows * cols);
            let mut y = Vec::with_capacity(rows * cols);
            for i in 0..rows {
                for j in 0..cols {
                    let v = (x[i * cols + j] - mean[i]) * inv_std[i];
                    xh.push(v);
                    y.push(v * gm[j] + bt[j]);
                }
            }
            (
                kernels::tensor_from(self.shape().to_vec(), y),
                kernels::tensor_from(vec![rows, cols], xh),
            )
        });
        let gamma_t = gamma.value().clone();
        let x_t = self.value().clone();
        let (need_x, need_g, need_b) =
            (self.is_tracked(), gamma.is_tracked(), beta.is_tracked());
        let gshape = gamma.shape().to_vec();
        let bshape = beta.shape().to_vec();
        let in_shape = self.shape().to_vec();
        Ok(Var::from_op(
            out,
            vec![self.node(), gamma.node(), beta.node()],
            move |g| {
                with_dtype!(g.dtype(), T => {
                    let gs = T::slice(g.data());
                    let xh = T::slice(xhat.data());
                    let gm = T::slice(gamma_t.data());
                    let x = T::slice(x_t.data());
                    let (_, inv_std) = kernels::row_moments(x, rows, cols, T::from_f64(eps));
                    let dgamma = need_g.then(|| {
                        let mut v = vec![T::zero(); cols];
                        for i in 0..rows {
                            for j in 0..cols {
                                v[j] += gs[i * cols + j] * xh[i * cols + j];
                            }
                        }
                        kernels::tensor_from(gshape.clone(), v)
                    });
                    let dbeta = need_b.then(|| {
                        let v = kernels::sum_rows(gs, rows, cols);
                        kernels::tensor_from(bshape.clone(), v)
                    });
                    let dx = need_x.then(|| {
                        let inv_n = T::from_f64(1.0 / cols as f64);
                        let mut v = Vec::with_capacity(rows * cols);
                        for i in 0..rows {
                            let mut m1 = T::zero(); // mean of dxhat
                            let mut m2 = T::zero(); // mean of dxhat * xhat
                            for j in 0..cols {
                                let dxh = gs[i * cols + j] * gm[j];
                                m1 += dxh;
                                m2 += dxh * xh[i * cols + j];
                            }
                            m1 = m1 * inv_n;
                            m2 = m2 * inv_n;
                            for j in 0..cols {
                                let idx = i * cols + j;
                                let dxh = gs[idx] * gm[j];
                                v.push(inv_std[i] * (dxh - m1 - xh[idx] * m2));
                            }
                        }
                        kernels::tensor_from(in_shape.clone(), v)
                    });
                    vec![dx, dgamma, dbeta]
                })
            },
        ))
    }

    /// Picks `x[i, idx[i]]` per row, producing `[n, 1]`.
    pub fn gather_lastdim(&self, idx: &[usize]) -> Result<Var> {
        let (rows, cols) = row_view(self.shape());
        if idx.len() != rows {
            return Err(VittmError::dim("gather_lastdim", self.shape(), &[idx.len()]));
        }
        if let Some(&bad) = idx.iter().find(|&&j| j >= cols) {
            return Err(VittmError::Contract(format!(
                "gather index {bad} out of range for {cols} columns"
            )));
        }
        let idx_v = idx.to_vec();
        let out = with_dtype!(self.dtype(), T => {
            let x = T::slice(self.value().data());
            let v: Vec<T> = idx_v.iter().enumerate().map(|(i, &j)| x[i * cols + j]).collect();
            kernels::tensor_from(vec![rows, 1], v)
        });
        Ok(Var::from_op(out, vec![self.node()], move |g| {
            let dx = with_dtype!(g.dtype(), T => {
                let gs = T::slice(g.data());
                let mut v = vec![T::zero(); rows * cols];
                for (i, &j) in idx_v.iter().enumerate() {
                    v[i * cols + j] = gs[i];
                }
                kernels::tensor_from(vec![rows, cols], v)
            });
            vec![Some(dx)]
        }))
    }

    /// Value of a one-element tensor as f64.
    pub fn scalar(&self) -> f64 {
        assert_eq!(self.value().numel(), 1, "scalar() on non-scalar");
        self.value().at(0)
    }

    fn binary_bcast(&self, op: &'static str, rhs: &Var, kind: AddLike) -> Result<Var> {
        check_dtype(op, self, rhs)?;
        let bc = broadcast_kind(op, self.shape(), rhs.shape())?;
        let (a, b) = (self.value(), rhs.value());
        let sub = matches!(kind, AddLike::Sub);
        let out = match bc {
            Broadcast::Same => with_dtype!(self.dtype(), T => {
                let f = if sub { |x: T, y: T| x - y } else { |x: T, y: T| x + y };
                let v = kernels::zip(T::slice(a.data()), T::slice(b.data()), f);
                kernels::tensor_from(self.shape().to_vec(), v)
            }),
            Broadcast::RhsRow => with_dtype!(self.dtype(), T => {
                let (rows, cols) = row_view(a.shape());
                let f = if sub { |x: T, y: T| x - y } else { |x: T, y: T| x + y };
                let v = kernels::zip_rowbcast(T::slice(a.data()), T::slice(b.data()), rows, cols, f);
                kernels::tensor_from(a.shape().to_vec(), v)
            }),
            Broadcast::LhsRow => with_dtype!(self.dtype(), T => {
                let (rows, cols) = row_view(b.shape());
                // callback receives (full_elem, row_elem); lhs is the row
                let f = if sub {
                    |bv: T, av: T| av - bv
                } else {
                    |bv: T, av: T| av + bv
                };
                let v = kernels::zip_rowbcast(T::slice(b.data()), T::slice(a.data()), rows, cols, f);
                kernels::tensor_from(b.shape().to_vec(), v)
            }),
        };
        let (need_a, need_b) = (self.is_tracked(), rhs.is_tracked());
        let ashape = self.shape().to_vec();
        let bshape = rhs.shape().to_vec();
        Ok(Var::from_op(out, vec![self.node(), rhs.node()], move |g| {
            let reduce = |shape: &[usize], negate: bool| {
                let base = if shape == g.shape() {
                    g.clone()
                } else {
                    sum_to_row(g, shape)
                };
                if negate {
                    tensor_scale(&base, -1.0)
                } else {
                    base
                }
            };
            vec![
                need_a.then(|| reduce(&ashape, false)),
                need_b.then(|| reduce(&bshape, sub)),
            ]
        }))
    }
}

#[derive(Clone, Copy)]
enum AddLike {
    Add,
    Sub,
}

/// `a[i,j] * row[j]` with `row` broadcast over rows.
fn rowbcast_mul(a: &Tensor, row: &Tensor) -> Tensor {
    let (rows, cols) = row_view(a.shape());
    with_dtype!(a.dtype(), T => {
        let v = kernels::zip_rowbcast(T::slice(a.data()), T::slice(row.data()), rows, cols, |x, y| x * y);
        kernels::tensor_from(a.shape().to_vec(), v)
    })
}

/// Contracts a full-shaped gradient down to a broadcast row operand.
fn sum_to_row(g: &Tensor, row_shape: &[usize]) -> Tensor {
    let (rows, cols) = row_view(g.shape());
    with_dtype!(g.dtype(), T => {
        let v = kernels::sum_rows(T::slice(g.data()), rows, cols);
        kernels::tensor_from(row_shape.to_vec(), v)
    })
}

fn unary_forward(x: &Var, f32_op: fn(f32) -> f32, f64_op: fn(f64) -> f64) -> Tensor {
    match x.dtype() {
        DType::F32 => {
            let v = kernels::map(f32::slice(x.value().data()), f32_op);
            kernels::tensor_from(x.shape().to_vec(), v)
        }
        DType::F64 => {
            let v = kernels::map(f64::slice(x.value().data()), f64_op);
            kernels::tensor_from(x.shape().to_vec(), v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{no_grad, Parameter};
    use super::*;

    fn t2(shape: &[usize], data: Vec<f64>) -> Var {
        Var::constant(Tensor::new_f64(shape, data).unwrap())
    }

    #[test]
    fn matmul_identity_and_hand_case() {
        let i2 = t2(&[2, 2], vec![1.0, 0.0, 0.0, 1.0]);
        let a = t2(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]);
        let prod = i2.matmul(&a).unwrap();
        assert!(prod.value().bitwise_eq(a.value()));

        let r = t2(&[1, 2], vec![1.0, 2.0]);
        let c = t2(&[2, 1], vec![3.0, 4.0]);
        let s = r.matmul(&c).unwrap();
        assert_eq!(s.value().to_f64_vec(), vec![11.0]);
    }

    #[test]
    fn matmul_shape_error_names_both_shapes() {
        let a = t2(&[2, 3], vec![0.0; 6]);
        let b = t2(&[2, 3], vec![0.0; 6]);
        match a.matmul(&b) {
            Err(VittmError::Dimension { lhs, rhs, .. }) => {
                assert_eq!(lhs, vec![2, 3]);
                assert_eq!(rhs, vec![2, 3]);
            }
            other => panic!("expected dimension error, got {other:?}"),
        }
    }

    #[test]
    fn matmul_matches_triple_loop_oracle_f64() {
        // random-ish 5x7 by 7x3 against an elementwise triple loop
        let a_data: Vec<f64> = (0..35).map(|i| ((i * 31 % 17) as f64 - 8.0) / 3.0).collect();
        let b_data: Vec<f64> = (0..21).map(|i| ((i * 23 % 19) as f64 - 9.0) / 5.0).collect();
        let a = t2(&[5, 7], a_data.clone());
        let b = t2(&[7, 3], b_data.clone());
        let c = a.matmul(&b).unwrap();
        for i in 0..5 {
            for j in 0..3 {
                let mut s = 0.0;
                for p in 0..7 {
                    s += a_data[i * 7 + p] * b_data[p * 3 + j];
                }
                let got = c.value().at2(i, j);
                assert!(
                    (got - s).abs() <= 1e-12 * s.abs().max(1.0),
                    "({i},{j}): {got} vs {s}"
                );
            }
        }
    }

    #[test]
    fn elementwise_suite_spot_values() {
        // elu(0) + 1 == 1
        let x = t2(&[1], vec![0.0]);
        let phi = x.elu().unwrap().affine(1.0, 1.0).unwrap();
        assert_eq!(phi.value().to_f64_vec(), vec![1.0]);
        // sigmoid(0) == 0.5
        assert_eq!(x.sigmoid().unwrap().value().to_f64_vec(), vec![0.5]);
        // softmax of uniform logits
        let u = t2(&[1, 3], vec![1.0, 1.0, 1.0]);
        let sm = u.softmax_lastdim().unwrap();
        for v in sm.value().to_f64_vec() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn broadcast_add_and_reject() {
        let a = t2(&[2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let row = t2(&[1, 3], vec![10.0, 20.0, 30.0]);
        let s = a.add(&row).unwrap();
        assert_eq!(s.value().to_f64_vec(), vec![11.0, 22.0, 33.0, 14.0, 25.0, 36.0]);
        let bad = t2(&[2, 2], vec![0.0; 4]);
        assert!(matches!(a.add(&bad), Err(VittmError::Dimension { .. })));
    }

    #[test]
    fn backward_linear_map_gives_broadcast_of_input() {
        // loss = sum(W x), so dW = x^T broadcast over rows of W
        let w = Parameter::new("w", Tensor::new_f64(&[3, 2], vec![0.0; 6]).unwrap());
        let x = t2(&[2, 1], vec![5.0, -2.0]);
        let loss = w.var().matmul(&x).unwrap().sum_all().unwrap();
        loss.backward().unwrap();
        assert_eq!(w.grad().to_f64_vec(), vec![5.0, -2.0, 5.0, -2.0, 5.0, -2.0]);
    }

    #[test]
    fn backward_sigmoid_at_zero_quarter() {
        let w = Parameter::new("w", Tensor::zeros(&[4], DType::F64));
        let loss = w.var().sigmoid().unwrap().sum_all().unwrap();
        loss.backward().unwrap();
        for g in w.grad().to_f64_vec() {
            assert!((g - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_accumulates_across_backward_calls() {
        let w = Parameter::new("w", Tensor::ones(&[2], DType::F64));
        for _ in 0..2 {
            let loss = w.var().sum_all().unwrap();
            loss.backward().unwrap();
        }
        assert_eq!(w.grad().to_f64_vec(), vec![2.0, 2.0]);
        w.zero_grad();
        assert_eq!(w.grad().to_f64_vec(), vec![0.0, 0.0]);
    }

    #[test]
    fn shared_parameter_fan_in_sums() {
        // loss = sum(w) + sum(w * w) => dw = 1 + 2w
        let w = Parameter::new("w", Tensor::new_f64(&[2], vec![3.0, -1.0]).unwrap());
        let v = w.var();
        let loss = v.sum_all().unwrap().add(&v.mul(&v).unwrap().sum_all().unwrap()).unwrap();
        loss.backward().unwrap();
        assert_eq!(w.grad().to_f64_vec(), vec![7.0, -1.0]);
    }

    #[test]
    fn layer_norm_normalizes_rows() {
        let x = t2(&[2, 4], vec![1.0, 2.0, 3.0, 4.0, -5.0, 0.0, 5.0, 10.0]);
        let gamma = t2(&[1, 4], vec![1.0; 4]);
        let beta = t2(&[1, 4], vec![0.0; 4]);
        let y = x.layer_norm(&gamma, &beta, 1e-6).unwrap();
        for i in 0..2 {
            let row: Vec<f64> = (0..4).map(|j| y.value().at2(i, j)).collect();
            let mean: f64 = row.iter().sum::<f64>() / 4.0;
            let var: f64 = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0;
            assert!(mean.abs() < 1e-6);
            assert!((var - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn no_grad_forward_produces_constants() {
        let w = Parameter::new("w", Tensor::ones(&[2, 2], DType::F64));
        let out = no_grad(|| w.var().matmul(&w.var()).unwrap());
        assert!(!out.is_tracked());
    }
}
