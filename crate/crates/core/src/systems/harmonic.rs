//! Linear oscillator `H = |p|^2/2 + omega^2 |q|^2/2 + slow_omega^2 |q|^2/2`
//! with a closed-form flow.

use super::{Part, PhaseState, SeparableSystem};
use crate::tableau::Matrix;

#[derive(Clone, Debug, PartialEq)]
pub struct Harmonic {
    pub omega: f64,
    /// Frequency of the optional slow potential; zero by default.
    pub slow_omega: f64,
    pub dim: usize,
}

impl Harmonic {
    /// One degree of freedom, all energy in the fast tier.
    pub fn new(omega: f64) -> Self {
        assert!(omega > 0.0, "omega must be positive");
        Harmonic {
            omega,
            slow_omega: 0.0,
            dim: 1,
        }
    }

    pub fn with_slow(mut self, slow_omega: f64) -> Self {
        self.slow_omega = slow_omega;
        self
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    pub fn frequency(&self) -> f64 {
        self.omega.hypot(self.slow_omega)
    }

    /// Exact solution at time `t` from `y0`.
    pub fn flow(&self, y0: &PhaseState, t: f64) -> PhaseState {
        let w = self.frequency();
        let (s, c) = (w * t).sin_cos();
        PhaseState {
            p: &y0.p * c - &y0.q * (w * s),
            q: &y0.q * c + &y0.p * (s / w),
        }
    }

    fn coefficient(&self, part: Part) -> f64 {
        match part {
            Part::SlowKinetic => 0.0,
            Part::FastKinetic => 1.0,
            Part::SlowPotential => self.slow_omega * self.slow_omega,
            Part::FastPotential => self.omega * self.omega,
        }
    }
}

impl SeparableSystem for Harmonic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn energy(&self, part: Part, x: &[f64]) -> f64 {
        0.5 * self.coefficient(part) * x.iter().map(|v| v * v).sum::<f64>()
    }

    fn gradient(&self, part: Part, x: &[f64], out: &mut [f64]) {
        let c = self.coefficient(part);
        out.iter_mut().zip(x).for_each(|(o, v)| *o = c * v);
    }

    fn hessian(&self, part: Part, _x: &[f64]) -> Option<Matrix> {
        Some(Matrix::identity(self.dim, self.dim) * self.coefficient(part))
    }

    fn is_zero(&self, part: Part) -> bool {
        self.coefficient(part) == 0.0
    }
}
