//! Merging read tokens into the process stream and write tokens into
//! memory.
//!
//! Erase replaces the base tokens, Add sums, and Add-Erase takes a
//! per-token convex combination with gate `alpha = sigmoid(W_alpha r_avg)`
//! computed from the mean incoming token (one scalar per token, shared
//! across channels, bias omitted).

use std::rc::Rc;

use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VittmError};
use crate::tensor::{DType, Parameter, Tensor, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionKind {
    Erase,
    Add,
    AddErase,
}

/// One fusion site (process side or memory side). The gate matrix exists
/// only for [`FusionKind::AddErase`].
pub struct FusionGate {
    kind: FusionKind,
    w_alpha: Option<Rc<Parameter>>,
}

impl FusionGate {
    pub fn new(
        kind: FusionKind,
        name: &str,
        tokens: usize,
        d: usize,
        dtype: DType,
        rng: &mut ChaCha20Rng,
    ) -> FusionGate {
        let w_alpha = match kind {
            FusionKind::AddErase => Some(Parameter::new(
                format!("{name}.w_alpha"),
                Tensor::randn(&[tokens, d], 0.02, dtype, rng),
            )),
            _ => None,
        };
        FusionGate { kind, w_alpha }
    }

    pub fn kind(&self) -> FusionKind {
        self.kind
    }

    pub fn params(&self) -> Vec<Rc<Parameter>> {
        self.w_alpha.iter().cloned().collect()
    }

    /// Gate values in (0, 1), one per token (`[n, 1]`).
    pub fn alpha(&self, incoming: &Var) -> Result<Var> {
        let w = self
            .w_alpha
            .as_ref()
            .expect("alpha is only defined for add-erase fusion");
        // r_avg: mean over tokens, as a [d, 1] column
        let r_avg = incoming.transpose()?.mean_lastdim()?;
        w.var().matmul(&r_avg)?.sigmoid()
    }

    /// Merges `incoming` into `base` (both `[n, d]`).
    pub fn fuse(&self, base: &Var, incoming: &Var) -> Result<Var> {
        if base.shape() != incoming.shape() {
            return Err(VittmError::dim("fuse", base.shape(), incoming.shape()));
        }
        match self.kind {
            FusionKind::Erase => Ok(incoming.clone()),
            FusionKind::Add => base.add(incoming),
            FusionKind::AddErase => {
                let w = self.w_alpha.as_ref().expect("add-erase gate missing");
                if w.shape()[0] != base.shape()[0] {
                    return Err(VittmError::dim("fuse", &w.shape(), base.shape()));
                }
                let alpha = self.alpha(incoming)?;
                let keep = alpha.affine(-1.0, 1.0)?; // 1 - alpha
                incoming.scale_rows(&alpha)?.add(&base.scale_rows(&keep)?)
            }
        }
    }
}
