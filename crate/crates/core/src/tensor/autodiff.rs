//! Tape-based reverse-mode differentiation over whole tensors.
//!
//! A [`Var`] wraps a value tensor plus an optional graph node. Nodes hold
//! their parents and a closure that turns the upstream cotangent into one
//! cotangent per parent. [`Parameter`] leaves accumulate gradients
//! (add, not overwrite) so weights shared across layers work.
//!
//! Graphs are per-thread (`Rc`); tensors themselves are freely shareable.

use std::cell::{Cell, RefCell};
use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use super::{DType, Tensor};
use crate::error::{Result, VittmError};

thread_local! {
    static GRAD_ENABLED: Cell<bool> = const { Cell::new(true) };
    static NEXT_ID: Cell<u64> = const { Cell::new(0) };
}

fn next_id() -> u64 {
    NEXT_ID.with(|c| {
        let id = c.get();
        c.set(id + 1);
        id
    })
}

/// True while operations record the backward tape on this thread.
pub fn is_grad_enabled() -> bool {
    GRAD_ENABLED.with(Cell::get)
}

/// Runs `f` with gradient recording disabled (restored on exit, also on
/// panic). Inference and finite-difference probes go through this.
pub fn no_grad<R>(f: impl FnOnce() -> R) -> R {
    struct Restore(bool);
    impl Drop for Restore {
        fn drop(&mut self) {
            GRAD_ENABLED.with(|c| c.set(self.0));
        }
    }
    let _restore = Restore(GRAD_ENABLED.with(|c| c.replace(false)));
    f()
}

type GradFn = Box<dyn Fn(&Tensor) -> Vec<Option<Tensor>>>;

pub(crate) struct Node {
    id: u64,
    parents: Vec<Option<Rc<Node>>>,
    grad_fn: GradFn,
    sink: Option<Rc<Parameter>>,
}

/// A tensor in a differentiable computation.
#[derive(Clone)]
pub struct Var {
    value: Tensor,
    node: Option<Rc<Node>>,
}

impl Var {
    /// Wraps a tensor with no gradient history.
    pub fn constant(value: Tensor) -> Var {
        Var { value, node: None }
    }

    pub fn value(&self) -> &Tensor {
        &self.value
    }

    pub fn shape(&self) -> &[usize] {
        self.value.shape()
    }

    pub fn dtype(&self) -> DType {
        self.value.dtype()
    }

    pub(crate) fn is_tracked(&self) -> bool {
        self.node.is_some()
    }

    pub(crate) fn node(&self) -> Option<Rc<Node>> {
        self.node.clone()
    }

    /// Assembles a tracked result. `parents` must align one-to-one with the
    /// cotangents returned by `grad_fn`; untracked parents may get `None`.
    pub(crate) fn from_op(
        value: Tensor,
        parents: Vec<Option<Rc<Node>>>,
        grad_fn: impl Fn(&Tensor) -> Vec<Option<Tensor>> + 'static,
    ) -> Var {
        if !is_grad_enabled() || parents.iter().all(Option::is_none) {
            return Var::constant(value);
        }
        Var {
            value,
            node: Some(Rc::new(Node {
                id: next_id(),
                parents,
                grad_fn: Box::new(grad_fn),
                sink: None,
            })),
        }
    }

    /// Propagates d(self)/d(leaf) into every reachable [`Parameter`],
    /// accumulating into existing gradients.
    pub fn backward(&self) -> Result<()> {
        backward(self)
    }
}

/// Runs reverse-mode accumulation from a scalar loss.
pub fn backward(loss: &Var) -> Result<()> {
    if loss.value.numel() != 1 {
        return Err(VittmError::Contract(format!(
            "backward requires a scalar loss, got shape {:?}",
            loss.value.shape()
        )));
    }
    let Some(root) = loss.node.clone() else {
        return Err(VittmError::Contract(
            "backward on a constant: no forward graph was recorded".into(),
        ));
    };

    // Iterative post-order DFS; reversed, it is a topological order with
    // every node ahead of all its parents.
    let mut topo: Vec<Rc<Node>> = Vec::new();
    let mut visited: HashSet<u64> = HashSet::new();
    let mut stack: Vec<(Rc<Node>, usize)> = vec![(root.clone(), 0)];
    visited.insert(root.id);
    while let Some((node, pidx)) = stack.pop() {
        let mut advanced = false;
        for i in pidx..node.parents.len() {
            if let Some(p) = &node.parents[i] {
                if visited.insert(p.id) {
                    stack.push((node.clone(), i + 1));
                    stack.push((p.clone(), 0));
                    advanced = true;
                    break;
                }
            }
        }
        if !advanced {
            topo.push(node);
        }
    }

    let mut grads: HashMap<u64, Tensor> = HashMap::new();
    grads.insert(root.id, Tensor::ones(loss.value.shape(), loss.value.dtype()));

    for node in topo.iter().rev() {
        let Some(g) = grads.remove(&node.id) else {
            continue;
        };
        if let Some(param) = &node.sink {
            param.accumulate_grad(&g);
        }
        if node.parents.is_empty() {
            continue;
        }
        let parent_grads = (node.grad_fn)(&g);
        debug_assert_eq!(parent_grads.len(), node.parents.len());
        for (parent, pg) in node.parents.iter().zip(parent_grads) {
            let (Some(parent), Some(pg)) = (parent, pg) else {
                continue;
            };
            match grads.remove(&parent.id) {
                Some(acc) => {
                    let sum = super::ops::tensor_add(&acc, &pg);
                    grads.insert(parent.id, sum);
                }
                None => {
                    grads.insert(parent.id, pg);
                }
            }
        }
    }
    Ok(())
}

/// A trainable weight: a value plus an accumulated gradient of the same
/// shape and a dotted name path such as `block.3.read.w_q`.
pub struct Parameter {
    name: String,
    value: RefCell<Tensor>,
    grad: RefCell<Tensor>,
}

impl Parameter {
    pub fn new(name: impl Into<String>, value: Tensor) -> Rc<Parameter> {
        let grad = Tensor::zeros(value.shape(), value.dtype());
        Rc::new(Parameter {
            name: name.into(),
            value: RefCell::new(value),
            grad: RefCell::new(grad),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> Vec<usize> {
        self.value.borrow().shape().to_vec()
    }

    pub fn numel(&self) -> usize {
        self.value.borrow().numel()
    }

    pub fn dtype(&self) -> DType {
        self.value.borrow().dtype()
    }

    /// Snapshot of the current value (cheap handle clone).
    pub fn value(&self) -> Tensor {
        self.value.borrow().clone()
    }

    /// Snapshot of the accumulated gradient.
    pub fn grad(&self) -> Tensor {
        self.grad.borrow().clone()
    }

    /// Replaces the value; the shape and dtype must not change.
    pub fn set_value(&self, t: Tensor) {
        {
            let cur = self.value.borrow();
            assert_eq!(cur.shape(), t.shape(), "parameter {} shape change", self.name);
            assert_eq!(cur.dtype(), t.dtype(), "parameter {} dtype change", self.name);
        }
        *self.value.borrow_mut() = t;
    }

    pub fn zero_grad(&self) {
        let z = {
            let g = self.grad.borrow();
            Tensor::zeros(g.shape(), g.dtype())
        };
        *self.grad.borrow_mut() = z;
    }

    fn accumulate_grad(&self, g: &Tensor) {
        let sum = {
            let cur = self.grad.borrow();
            assert_eq!(cur.shape(), g.shape(), "gradient shape mismatch for {}", self.name);
            super::ops::tensor_add(&cur, g)
        };
        *self.grad.borrow_mut() = sum;
    }

    /// Enters this parameter into a graph as a leaf.
    pub fn var(self: &Rc<Parameter>) -> Var {
        let value = self.value.borrow().clone();
        if !is_grad_enabled() {
            return Var::constant(value);
        }
        Var {
            value,
            node: Some(Rc::new(Node {
                id: next_id(),
                parents: Vec::new(),
                grad_fn: Box::new(|_| Vec::new()),
                sink: Some(self.clone()),
            })),
        }
    }
}

impl std::fmt::Debug for Var {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Var({:?}, tracked={})", self.value, self.node.is_some())
    }
}

impl std::fmt::Debug for Parameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Parameter({}, {:?})", self.name, self.shape())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_grad_suppresses_tape() {
        let p = Parameter::new("w", Tensor::new_f64(&[2], vec![1.0, 2.0]).unwrap());
        let tracked = p.var();
        assert!(tracked.is_tracked());
        let untracked = no_grad(|| p.var());
        assert!(!untracked.is_tracked());
        assert!(is_grad_enabled());
    }

    #[test]
    fn backward_rejects_non_scalar_and_constants() {
        let p = Parameter::new("w", Tensor::new_f64(&[2], vec![1.0, 2.0]).unwrap());
        let v = p.var();
        assert!(matches!(v.backward(), Err(VittmError::Contract(_))));
        let c = Var::constant(Tensor::new_f64(&[1], vec![3.0]).unwrap());
        assert!(matches!(c.backward(), Err(VittmError::Contract(_))));
    }
}
