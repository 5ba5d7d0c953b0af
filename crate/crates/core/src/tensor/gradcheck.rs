//! Finite-difference verification of the backward pass.

use std::rc::Rc;

use super::{no_grad, Parameter, Tensor, Var};
use crate::error::{Result, VittmError};

/// Compares analytic gradients of a scalar function against central
/// differences and returns the worst relative error
/// `|analytic - numeric| / max(1, |analytic|, |numeric|)` over every
/// element of every parameter.
///
/// `f` must be deterministic; it is evaluated twice up front and a
/// mismatch is a contract error.
pub fn grad_check<F>(f: F, params: &[Rc<Parameter>], epsilon: f64) -> Result<f64>
where
    F: Fn() -> Result<Var>,
{
    if epsilon <= 0.0 {
        return Err(VittmError::Contract(format!(
            "grad_check epsilon must be positive, got {epsilon}"
        )));
    }
    let probe = no_grad(&f)?;
    if probe.value().numel() != 1 {
        return Err(VittmError::Contract(format!(
            "grad_check target must be scalar, got shape {:?}",
            probe.value().shape()
        )));
    }
    let probe2 = no_grad(&f)?;
    if !probe.value().bitwise_eq(probe2.value()) {
        return Err(VittmError::Contract(
            "non-deterministic function under grad_check: two forward evaluations disagree".into(),
        ));
    }

    for p in params {
        p.zero_grad();
    }
    let loss = f()?;
    loss.backward()?;

    let mut max_err: f64 = 0.0;
    for param in params {
        let analytic = param.grad().to_f64_vec();
        let original = param.value();
        let base = original.to_f64_vec();
        let dtype = original.dtype();
        let shape = param.shape();
        for i in 0..base.len() {
            let mut plus = base.clone();
            plus[i] += epsilon;
            param.set_value(Tensor::new_f64(&shape, plus)?.to_dtype(dtype));
            let up = no_grad(&f)?.scalar();

            let mut minus = base.clone();
            minus[i] -= epsilon;
            param.set_value(Tensor::new_f64(&shape, minus)?.to_dtype(dtype));
            let down = no_grad(&f)?.scalar();

            param.set_value(original.clone());

            let numeric = (up - down) / (2.0 * epsilon);
            let denom = 1f64.max(analytic[i].abs()).max(numeric.abs());
            let err = (analytic[i] - numeric).abs() / denom;
            if err > max_err {
                max_err = err;
            }
        }
    }
    Ok(max_err)
}
