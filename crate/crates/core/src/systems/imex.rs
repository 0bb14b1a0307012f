//! Two-way split `y' = f^s(q) + f^f(p, q)`: the slow potential is the only
//! slow part and the whole kinetic energy joins the fast partition.

use super::{Part, PhaseState, SeparableSystem};
use crate::tableau::Matrix;

/// Full phase-space vector fields of a two-way split. The slow field has no
/// `q` component.
pub trait TwoWaySystem {
    fn f_slow(&self, q: &[f64]) -> PhaseState;
    fn f_fast(&self, y: &PhaseState) -> PhaseState;
}

/// A separable system regrouped as `T^s = 0`, `T^f = T^s + T^f`.
#[derive(Clone, Debug)]
pub struct ImexSplit<S> {
    pub inner: S,
}

pub fn imex_split<S: SeparableSystem>(s: S) -> ImexSplit<S> {
    ImexSplit { inner: s }
}

impl<S: SeparableSystem> TwoWaySystem for ImexSplit<S> {
    fn f_slow(&self, q: &[f64]) -> PhaseState {
        let n = q.len();
        let mut p = vec![0.0; n];
        self.inner.gradient(Part::SlowPotential, q, &mut p);
        p.iter_mut().for_each(|v| *v = -*v);
        PhaseState::from_slices(&p, &vec![0.0; n])
    }

    fn f_fast(&self, y: &PhaseState) -> PhaseState {
        let p = -self.grad(Part::FastPotential, &y.q);
        let q = self.grad(Part::FastKinetic, &y.p);
        PhaseState::new(p, q)
    }
}

impl<S: SeparableSystem> SeparableSystem for ImexSplit<S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn energy(&self, part: Part, x: &[f64]) -> f64 {
        match part {
            Part::SlowKinetic => 0.0,
            Part::FastKinetic => {
                self.inner.energy(Part::SlowKinetic, x) + self.inner.energy(Part::FastKinetic, x)
            }
            _ => self.inner.energy(part, x),
        }
    }

    fn gradient(&self, part: Part, x: &[f64], out: &mut [f64]) {
        match part {
            Part::SlowKinetic => out.fill(0.0),
            Part::FastKinetic => {
                self.inner.gradient(Part::SlowKinetic, x, out);
                let mut fast = vec![0.0; x.len()];
                self.inner.gradient(Part::FastKinetic, x, &mut fast);
                out.iter_mut().zip(fast).for_each(|(o, f)| *o += f);
            }
            _ => self.inner.gradient(part, x, out),
        }
    }

    fn hessian(&self, part: Part, x: &[f64]) -> Option<Matrix> {
        match part {
            Part::SlowKinetic => Some(Matrix::zeros(x.len(), x.len())),
            Part::FastKinetic => Some(
                self.inner.hessian(Part::SlowKinetic, x)? + self.inner.hessian(Part::FastKinetic, x)?,
            ),
            _ => self.inner.hessian(part, x),
        }
    }

    fn is_zero(&self, part: Part) -> bool {
        match part {
            Part::SlowKinetic => true,
            Part::FastKinetic => {
                self.inner.is_zero(Part::SlowKinetic) && self.inner.is_zero(Part::FastKinetic)
            }
            _ => self.inner.is_zero(part),
        }
    }
}
