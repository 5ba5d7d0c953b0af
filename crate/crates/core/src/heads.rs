//! Read and write heads exchanging information between the two streams.
//!
//! The default head is linear attention with feature map `phi(x) = 1 + elu(x)`:
//! `out = phi(Q) (phi(K)^T V)` with `Q = X2 Wq`, `K = X1 Wk`, `V = X1 Wv`,
//! computed in the factored order so cost stays linear in the longer
//! sequence. There is no normalization denominator by default; the
//! `normalized` flag adds the usual `phi(Q)(phi(K)^T 1)` divisor for
//! comparison runs. Cross attention and token summary are the ablation
//! alternatives.

use std::rc::Rc;

use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VittmError};
use crate::tensor::{DType, Parameter, Tensor, Var};

/// Which read-write head a model uses (read and write share the kind).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadKind {
    LinearAttention,
    CrossAttention,
    TokenSummary,
}

const INIT_STD: f64 = 0.02;

/// Single-head linear attention with a reduced latent width `c` for the
/// query/key projections.
pub struct LinearAttentionHead {
    pub w_q: Rc<Parameter>,
    pub w_k: Rc<Parameter>,
    pub w_v: Rc<Parameter>,
    normalized: bool,
}

impl LinearAttentionHead {
    pub fn new(
        prefix: &str,
        d: usize,
        c: usize,
        normalized: bool,
        dtype: DType,
        rng: &mut ChaCha20Rng,
    ) -> Result<LinearAttentionHead> {
        if c == 0 || c > d {
            return Err(VittmError::Config(format!(
                "latent dim c = {c} must be in 1..={d}"
            )));
        }
        Ok(LinearAttentionHead {
            w_q: Parameter::new(
                format!("{prefix}.w_q"),
                Tensor::randn(&[d, c], INIT_STD, dtype, rng),
            ),
            w_k: Parameter::new(
                format!("{prefix}.w_k"),
                Tensor::randn(&[d, c], INIT_STD, dtype, rng),
            ),
            w_v: Parameter::new(
                format!("{prefix}.w_v"),
                Tensor::randn(&[d, d], INIT_STD, dtype, rng),
            ),
            normalized,
        })
    }

    /// Queries come from `x2`, keys and values from `x1`.
    pub fn attend(&self, x1: &Var, x2: &Var) -> Result<Var> {
        let q = x2.matmul(&self.w_q.var())?;
        let k = x1.matmul(&self.w_k.var())?;
        let v = x1.matmul(&self.w_v.var())?;
        let phi_q = phi(&q)?;
        let phi_k = phi(&k)?;
        // factored order: (c x n1)(n1 x d) then (n2 x c)(c x d)
        let kv = phi_k.transpose()?.matmul(&v)?;
        let out = phi_q.matmul(&kv)?;
        if !self.normalized {
            return Ok(out);
        }
        let ones = Var::constant(Tensor::ones(&[x1.shape()[0], 1], x1.dtype()));
        let ksum = phi_k.transpose()?.matmul(&ones)?;
        let denom = phi_q.matmul(&ksum)?;
        out.scale_rows(&denom.recip()?)
    }

    pub fn params(&self) -> Vec<Rc<Parameter>> {
        vec![self.w_q.clone(), self.w_k.clone(), self.w_v.clone()]
    }
}

/// The feature map `1 + elu(x)`, positive for all finite inputs.
pub fn phi(x: &Var) -> Result<Var> {
    x.elu()?.affine(1.0, 1.0)
}

/// Standard multi-head softmax cross attention with output projection.
pub struct CrossAttentionHead {
    pub w_q: Rc<Parameter>,
    pub w_k: Rc<Parameter>,
    pub w_v: Rc<Parameter>,
    pub w_o: Rc<Parameter>,
    heads: usize,
}

impl CrossAttentionHead {
    pub fn new(
        prefix: &str,
        d: usize,
        heads: usize,
        dtype: DType,
        rng: &mut ChaCha20Rng,
    ) -> Result<CrossAttentionHead> {
        if heads == 0 || d % heads != 0 {
            return Err(VittmError::Config(format!(
                "head count {heads} does not divide embed dim {d}"
            )));
        }
        let mk = |name: &str, rng: &mut ChaCha20Rng| {
            Parameter::new(
                format!("{prefix}.{name}"),
                Tensor::randn(&[d, d], INIT_STD, dtype, rng),
            )
        };
        Ok(CrossAttentionHead {
            w_q: mk("w_q", rng),
            w_k: mk("w_k", rng),
            w_v: mk("w_v", rng),
            w_o: mk("w_o", rng),
            heads,
        })
    }

    pub fn attend(&self, x1: &Var, x2: &Var) -> Result<Var> {
        let d = x1.shape()[1];
        let dh = d / self.heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let q = x2.matmul(&self.w_q.var())?;
        let k = x1.matmul(&self.w_k.var())?;
        let v = x1.matmul(&self.w_v.var())?;
        let mut per_head = Vec::with_capacity(self.heads);
        for h in 0..self.heads {
            let qh = q.slice_cols(h * dh, dh)?;
            let kh = k.slice_cols(h * dh, dh)?;
            let vh = v.slice_cols(h * dh, dh)?;
            let scores = qh.matmul(&kh.transpose()?)?.affine(scale, 0.0)?;
            let attn = scores.softmax_lastdim()?;
            per_head.push(attn.matmul(&vh)?);
        }
        Var::concat_cols(&per_head)?.matmul(&self.w_o.var())
    }

    pub fn params(&self) -> Vec<Rc<Parameter>> {
        vec![
            self.w_q.clone(),
            self.w_k.clone(),
            self.w_v.clone(),
            self.w_o.clone(),
        ]
    }
}

/// Learned softmax pooling that compresses `n` input tokens into a fixed
/// number of summary tokens.
pub struct TokenSummaryHead {
    pub w_s: Rc<Parameter>,
    out_tokens: usize,
}

impl TokenSummaryHead {
    pub fn new(
        prefix: &str,
        d: usize,
        out_tokens: usize,
        dtype: DType,
        rng: &mut ChaCha20Rng,
    ) -> Result<TokenSummaryHead> {
        if out_tokens == 0 {
            return Err(VittmError::Config("token summary needs at least 1 output".into()));
        }
        Ok(TokenSummaryHead {
            w_s: Parameter::new(
                format!("{prefix}.w_s"),
                Tensor::randn(&[d, out_tokens], INIT_STD, dtype, rng),
            ),
            out_tokens,
        })
    }

    /// Attention of each output token over the `n` inputs; rows sum to 1.
    pub fn summary_weights(&self, x: &Var) -> Result<Var> {
        let logits = x.matmul(&self.w_s.var())?; // [n, s]
        logits.transpose()?.softmax_lastdim() // [s, n]
    }

    pub fn summarize(&self, x: &Var) -> Result<Var> {
        self.summary_weights(x)?.matmul(x)
    }

    pub fn out_tokens(&self) -> usize {
        self.out_tokens
    }

    pub fn params(&self) -> Vec<Rc<Parameter>> {
        vec![self.w_s.clone()]
    }
}

/// A head bound to one direction (read or write).
pub enum ReadWriteHead {
    Linear(LinearAttentionHead),
    Cross(CrossAttentionHead),
    Summary(TokenSummaryHead),
}

impl ReadWriteHead {
    /// Builds a head for the given direction. `out_tokens` is the target
    /// token count (K for read, T for write); only token summary uses it.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: HeadKind,
        prefix: &str,
        d: usize,
        c: usize,
        heads: usize,
        out_tokens: usize,
        normalized_linear: bool,
        dtype: DType,
        rng: &mut ChaCha20Rng,
    ) -> Result<ReadWriteHead> {
        Ok(match kind {
            HeadKind::LinearAttention => ReadWriteHead::Linear(LinearAttentionHead::new(
                prefix,
                d,
                c,
                normalized_linear,
                dtype,
                rng,
            )?),
            HeadKind::CrossAttention => {
                ReadWriteHead::Cross(CrossAttentionHead::new(prefix, d, heads, dtype, rng)?)
            }
            HeadKind::TokenSummary => {
                ReadWriteHead::Summary(TokenSummaryHead::new(prefix, d, out_tokens, dtype, rng)?)
            }
        })
    }

    pub fn params(&self) -> Vec<Rc<Parameter>> {
        match self {
            ReadWriteHead::Linear(h) => h.params(),
            ReadWriteHead::Cross(h) => h.params(),
            ReadWriteHead::Summary(h) => h.params(),
        }
    }
}

/// Read: produce K read tokens from memory, conditioned on the process
/// tokens (queries from `p_prev`, keys/values from `m`).
pub fn read(head: &ReadWriteHead, p_prev: &Var, m: &Var) -> Result<Var> {
    match head {
        ReadWriteHead::Linear(h) => h.attend(m, p_prev),
        ReadWriteHead::Cross(h) => h.attend(m, p_prev),
        ReadWriteHead::Summary(h) => h.summarize(m),
    }
}

/// Write: produce T write tokens from the processed tokens (queries from
/// `m`, keys/values from `p`; token summary compresses only `p`).
pub fn write(head: &ReadWriteHead, p: &Var, m: &Var) -> Result<Var> {
    match head {
        ReadWriteHead::Linear(h) => h.attend(p, m),
        ReadWriteHead::Cross(h) => h.attend(p, m),
        ReadWriteHead::Summary(h) => h.summarize(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    fn rand_var(shape: &[usize], rng: &mut ChaCha20Rng) -> Var {
        Var::constant(Tensor::randn(shape, 1.0, DType::F64, rng))
    }

    fn zero_weights(head: &ReadWriteHead) {
        for p in head.params() {
            p.set_value(Tensor::zeros(&p.shape(), p.dtype()));
        }
    }

    /// O(n1 * n2) oracle: materialize phi(Q) phi(K)^T, then multiply by V.
    fn linear_attention_oracle(h: &LinearAttentionHead, x1: &Tensor, x2: &Tensor) -> Vec<f64> {
        let (n1, d) = (x1.shape()[0], x1.shape()[1]);
        let n2 = x2.shape()[0];
        let c = h.w_q.shape()[1];
        let wq = h.w_q.value().to_f64_vec();
        let wk = h.w_k.value().to_f64_vec();
        let wv = h.w_v.value().to_f64_vec();
        let x1v = x1.to_f64_vec();
        let x2v = x2.to_f64_vec();
        let phi = |x: f64| 1.0 + if x > 0.0 { x } else { x.exp() - 1.0 };
        let proj = |x: &[f64], n: usize, w: &[f64], cols: usize| -> Vec<f64> {
            let mut out = vec![0.0; n * cols];
            for i in 0..n {
                for j in 0..cols {
                    for p in 0..d {
                        out[i * cols + j] += x[i * d + p] * w[p * cols + j];
                    }
                }
            }
            out
        };
        let q: Vec<f64> = proj(&x2v, n2, &wq, c).iter().map(|&v| phi(v)).collect();
        let k: Vec<f64> = proj(&x1v, n1, &wk, c).iter().map(|&v| phi(v)).collect();
        let v = proj(&x1v, n1, &wv, d);
        // kernel matrix [n2, n1], then times V
        let mut kernel = vec![0.0; n2 * n1];
        for i in 0..n2 {
            for j in 0..n1 {
                for p in 0..c {
                    kernel[i * n1 + j] += q[i * c + p] * k[j * c + p];
                }
            }
        }
        let mut out = vec![0.0; n2 * d];
        for i in 0..n2 {
            for j in 0..d {
                for p in 0..n1 {
                    out[i * d + j] += kernel[i * n1 + p] * v[p * d + j];
                }
            }
        }
        out
    }

    #[test]
    fn linear_attention_zero_weights_give_zero_output() {
        let mut r = rng(1);
        let h = LinearAttentionHead::new("t", 4, 2, false, DType::F64, &mut r).unwrap();
        for p in h.params() {
            p.set_value(Tensor::zeros(&p.shape(), DType::F64));
        }
        let x1 = rand_var(&[5, 4], &mut r);
        let x2 = rand_var(&[3, 4], &mut r);
        let out = h.attend(&x1, &x2).unwrap();
        assert!(out.value().to_f64_vec().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_attention_base_read_shape() {
        let mut r = rng(2);
        let h = LinearAttentionHead::new("t", 768, 192, false, DType::F64, &mut r).unwrap();
        let m = rand_var(&[196, 768], &mut r);
        let p = rand_var(&[49, 768], &mut r);
        let out = h.attend(&m, &p).unwrap();
        assert_eq!(out.shape(), &[49, 768]);
    }

    #[test]
    fn linear_attention_matches_kernel_matrix_oracle() {
        let mut r = rng(3);
        // the smallest interesting instance from the contract, plus a larger one
        for (n1, n2, d, c) in [(2, 1, 2, 1), (6, 4, 5, 3)] {
            let h = LinearAttentionHead::new("t", d, c, false, DType::F64, &mut r).unwrap();
            let x1 = rand_var(&[n1, d], &mut r);
            let x2 = rand_var(&[n2, d], &mut r);
            let fast = h.attend(&x1, &x2).unwrap();
            let slow = linear_attention_oracle(&h, x1.value(), x2.value());
            for (i, expected) in slow.iter().enumerate() {
                let got = fast.value().at(i);
                assert!(
                    (got - expected).abs() <= 1e-10 * expected.abs().max(1.0),
                    "elem {i}: {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn normalized_variant_divides_by_key_mass() {
        let mut r = rng(4);
        let h = LinearAttentionHead::new("t", 3, 2, true, DType::F64, &mut r).unwrap();
        let plain = LinearAttentionHead {
            w_q: h.w_q.clone(),
            w_k: h.w_k.clone(),
            w_v: h.w_v.clone(),
            normalized: false,
        };
        let x1 = rand_var(&[4, 3], &mut r);
        let x2 = rand_var(&[2, 3], &mut r);
        let unnorm = plain.attend(&x1, &x2).unwrap();
        let norm = h.attend(&x1, &x2).unwrap();
        // rows of the normalized output are the plain rows divided by
        // phi(Q) . sum_rows(phi(K))
        let q = x2.matmul(&h.w_q.var()).unwrap();
        let k = x1.matmul(&h.w_k.var()).unwrap();
        let phi_q = phi(&q).unwrap().value().to_f64_vec();
        let phi_k = phi(&k).unwrap().value().to_f64_vec();
        for i in 0..2 {
            let mut denom = 0.0;
            for p in 0..2 {
                let ksum: f64 = (0..4).map(|j| phi_k[j * 2 + p]).sum();
                denom += phi_q[i * 2 + p] * ksum;
            }
            for j in 0..3 {
                let expected = unnorm.value().at2(i, j) / denom;
                assert!((norm.value().at2(i, j) - expected).abs() < 1e-12);
            }
        }
    }

    /// Naive per-head softmax attention oracle.
    fn cross_attention_oracle(h: &CrossAttentionHead, x1: &Tensor, x2: &Tensor, heads: usize) -> Vec<f64> {
        let (n1, d) = (x1.shape()[0], x1.shape()[1]);
        let n2 = x2.shape()[0];
        let dh = d / heads;
        let matvec = |x: &Tensor, w: &Tensor| -> Vec<f64> {
            let n = x.shape()[0];
            let xv = x.to_f64_vec();
            let wv = w.to_f64_vec();
            let mut out = vec![0.0; n * d];
            for i in 0..n {
                for j in 0..d {
                    for p in 0..d {
                        out[i * d + j] += xv[i * d + p] * wv[p * d + j];
                    }
                }
            }
            out
        };
        let q = matvec(x2, &h.w_q.value());
        let k = matvec(x1, &h.w_k.value());
        let v = matvec(x1, &h.w_v.value());
        let mut concat = vec![0.0; n2 * d];
        for head in 0..heads {
            let off = head * dh;
            for i in 0..n2 {
                let mut scores = vec![0.0; n1];
                for j in 0..n1 {
                    let mut s = 0.0;
                    for p in 0..dh {
                        s += q[i * d + off + p] * k[j * d + off + p];
                    }
                    scores[j] = s / (dh as f64).sqrt();
                }
                let mx = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = scores.iter().map(|s| (s - mx).exp()).collect();
                let z: f64 = exps.iter().sum();
                for p in 0..dh {
                    let mut acc = 0.0;
                    for j in 0..n1 {
                        acc += exps[j] / z * v[j * d + off + p];
                    }
                    concat[i * d + off + p] = acc;
                }
            }
        }
        let wo = h.w_o.value().to_f64_vec();
        let mut out = vec![0.0; n2 * d];
        for i in 0..n2 {
            for j in 0..d {
                for p in 0..d {
                    out[i * d + j] += concat[i * d + p] * wo[p * d + j];
                }
            }
        }
        out
    }

    #[test]
    fn cross_attention_single_key_degeneracy() {
        let mut r = rng(5);
        let h = CrossAttentionHead::new("t", 4, 2, DType::F64, &mut r).unwrap();
        let x1 = rand_var(&[1, 4], &mut r); // one key: softmax weight is 1
        let x2 = rand_var(&[3, 4], &mut r);
        let out = h.attend(&x1, &x2).unwrap();
        let v1 = x1.matmul(&h.w_v.var()).unwrap();
        let expected = v1.matmul(&h.w_o.var()).unwrap();
        for i in 0..3 {
            for j in 0..4 {
                assert!((out.value().at2(i, j) - expected.value().at2(0, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cross_attention_duplicate_keys_match_single_key() {
        let mut r = rng(6);
        let h = CrossAttentionHead::new("t", 4, 2, DType::F64, &mut r).unwrap();
        let single_row = Tensor::randn(&[1, 4], 1.0, DType::F64, &mut r);
        let mut dup = single_row.to_f64_vec();
        dup.extend(single_row.to_f64_vec());
        let x1_single = Var::constant(single_row);
        let x1_dup = Var::constant(Tensor::new_f64(&[2, 4], dup).unwrap());
        let x2 = rand_var(&[2, 4], &mut r);
        let a = h.attend(&x1_single, &x2).unwrap();
        let b = h.attend(&x1_dup, &x2).unwrap();
        assert!(a.value().max_rel_diff(b.value()) < 1e-12);
    }

    #[test]
    fn cross_attention_matches_naive_oracle() {
        let mut r = rng(7);
        let h = CrossAttentionHead::new("t", 6, 3, DType::F64, &mut r).unwrap();
        let x1 = rand_var(&[5, 6], &mut r);
        let x2 = rand_var(&[4, 6], &mut r);
        let fast = h.attend(&x1, &x2).unwrap();
        let slow = cross_attention_oracle(&h, x1.value(), x2.value(), 3);
        for (i, expected) in slow.iter().enumerate() {
            let got = fast.value().at(i);
            assert!(
                (got - expected).abs() <= 1e-10 * expected.abs().max(1.0),
                "elem {i}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn cross_attention_rejects_non_dividing_heads() {
        let mut r = rng(8);
        assert!(matches!(
            CrossAttentionHead::new("t", 6, 4, DType::F64, &mut r),
            Err(VittmError::Config(_))
        ));
    }

    #[test]
    fn token_summary_single_input_is_identity() {
        let mut r = rng(9);
        for s in [1, 3, 7] {
            let h = TokenSummaryHead::new("t", 4, s, DType::F64, &mut r).unwrap();
            let x = rand_var(&[1, 4], &mut r);
            let out = h.summarize(&x).unwrap();
            assert_eq!(out.shape(), &[s, 4]);
            for i in 0..s {
                for j in 0..4 {
                    assert!((out.value().at2(i, j) - x.value().at2(0, j)).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn token_summary_zero_weights_give_token_mean() {
        let mut r = rng(10);
        let h = TokenSummaryHead::new("t", 3, 2, DType::F64, &mut r).unwrap();
        h.w_s.set_value(Tensor::zeros(&[3, 2], DType::F64));
        let x = Var::constant(Tensor::new_f64(&[2, 3], vec![1.0, 2.0, 3.0, 5.0, 6.0, 7.0]).unwrap());
        let out = h.summarize(&x).unwrap();
        for i in 0..2 {
            assert!((out.value().at2(i, 0) - 3.0).abs() < 1e-15);
            assert!((out.value().at2(i, 1) - 4.0).abs() < 1e-15);
            assert!((out.value().at2(i, 2) - 5.0).abs() < 1e-15);
        }
    }

    #[test]
    fn token_summary_matches_direct_oracle_and_weights_sum_to_one() {
        let mut r = rng(11);
        let h = TokenSummaryHead::new("t", 4, 3, DType::F64, &mut r).unwrap();
        let x = rand_var(&[6, 4], &mut r);
        let weights = h.summary_weights(&x).unwrap();
        for i in 0..3 {
            let row_sum: f64 = (0..6).map(|j| weights.value().at2(i, j)).sum();
            assert!((row_sum - 1.0).abs() < 1e-6);
        }
        // direct softmax-then-weighted-sum oracle
        let xs = x.value().to_f64_vec();
        let ws = h.w_s.value().to_f64_vec();
        let mut logits = vec![0.0; 6 * 3];
        for i in 0..6 {
            for j in 0..3 {
                for p in 0..4 {
                    logits[i * 3 + j] += xs[i * 4 + p] * ws[p * 3 + j];
                }
            }
        }
        let out = h.summarize(&x).unwrap();
        for j in 0..3 {
            let col: Vec<f64> = (0..6).map(|i| logits[i * 3 + j]).collect();
            let mx = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = col.iter().map(|v| (v - mx).exp()).collect();
            let z: f64 = exps.iter().sum();
            for p in 0..4 {
                let mut acc = 0.0;
                for i in 0..6 {
                    acc += exps[i] / z * xs[i * 4 + p];
                }
                let got = out.value().at2(j, p);
                assert!(
                    (got - acc).abs() <= 1e-12 * acc.abs().max(1.0),
                    "({j},{p}): {got} vs {acc}"
                );
            }
        }
    }

    #[test]
    fn read_and_write_shapes_and_zero_paths() {
        let mut r = rng(12);
        let (k_tokens, t_tokens, d) = (3, 8, 4);
        for kind in [HeadKind::LinearAttention, HeadKind::CrossAttention, HeadKind::TokenSummary] {
            let rh = ReadWriteHead::new(kind, "read", d, 2, 2, k_tokens, false, DType::F64, &mut r).unwrap();
            let wh = ReadWriteHead::new(kind, "write", d, 2, 2, t_tokens, false, DType::F64, &mut r).unwrap();
            let p = rand_var(&[k_tokens, d], &mut r);
            let m = rand_var(&[t_tokens, d], &mut r);
            let rt = read(&rh, &p, &m).unwrap();
            let wt = write(&wh, &p, &m).unwrap();
            assert_eq!(rt.shape(), &[k_tokens, d], "{kind:?}");
            assert_eq!(wt.shape(), &[t_tokens, d], "{kind:?}");
            if kind == HeadKind::LinearAttention {
                zero_weights(&rh);
                zero_weights(&wh);
                assert!(read(&rh, &p, &m).unwrap().value().to_f64_vec().iter().all(|&v| v == 0.0));
                assert!(write(&wh, &p, &m).unwrap().value().to_f64_vec().iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn read_is_attend_with_memory_as_keys() {
        let mut r = rng(13);
        let h = LinearAttentionHead::new("t", 4, 2, false, DType::F64, &mut r).unwrap();
        let p = rand_var(&[2, 4], &mut r);
        let m = rand_var(&[5, 4], &mut r);
        let via_read = read(&ReadWriteHead::Linear(h), &p, &m).unwrap();
        // recompose directly with a fresh head sharing the same weights
        let mut r2 = rng(13);
        let h2 = LinearAttentionHead::new("t", 4, 2, false, DType::F64, &mut r2).unwrap();
        let direct = h2.attend(&m, &p).unwrap();
        assert!(via_read.value().bitwise_eq(direct.value()));
    }
}
