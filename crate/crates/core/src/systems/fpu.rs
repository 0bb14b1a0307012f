//! Fermi-Pasta-Ulam chain: `2m` unit masses joined by alternating soft
//! quartic and stiff linear springs between fixed walls.
//!
//! State vectors interleave the two kinds of variables,
//! `q = (q_{0,1}, q_{1,1}, q_{0,2}, q_{1,2}, ...)` and likewise for `p`.
//! `q_{0,i}` is the displacement and `q_{1,i}` the elongation of stiff
//! spring `i`.

use super::{Part, PhaseState, SeparableSystem};
use crate::tableau::Matrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FpuParams {
    /// Number of stiff springs.
    pub m: usize,
    /// Stiffness of the linear springs.
    pub omega: f64,
}

impl Default for FpuParams {
    fn default() -> Self {
        FpuParams { m: 3, omega: 50.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fpu {
    pub params: FpuParams,
}

/// Index of `x_{0,i}` (`kind = 0`) or `x_{1,i}` (`kind = 1`), `i` 1-based.
pub(crate) fn idx(kind: usize, i: usize) -> usize {
    2 * (i - 1) + kind
}

impl Fpu {
    pub fn new(params: FpuParams) -> Self {
        assert!(params.m >= 1 && params.omega > 0.0, "FPU needs m >= 1 and omega > 0");
        Fpu { params }
    }

    /// `q_{0,1} = p_{0,1} = p_{1,1} = 1`, `q_{1,1} = 1/omega`, everything
    /// else zero.
    pub fn benchmark_initial_state(&self) -> PhaseState {
        let mut y = PhaseState::zeros(2 * self.params.m);
        y.q[idx(0, 1)] = 1.0;
        y.q[idx(1, 1)] = 1.0 / self.params.omega;
        y.p[idx(0, 1)] = 1.0;
        y.p[idx(1, 1)] = 1.0;
        y
    }

    /// Energies `I_j = (p_{1,j}^2 + omega^2 q_{1,j}^2) / 2` of the stiff
    /// springs and their sum `I`.
    pub fn oscillatory_energy(&self, y: &PhaseState) -> (Vec<f64>, f64) {
        let w2 = self.params.omega * self.params.omega;
        let parts: Vec<f64> = (1..=self.params.m)
            .map(|j| {
                let (p, q) = (y.p[idx(1, j)], y.q[idx(1, j)]);
                0.5 * (p * p + w2 * q * q)
            })
            .collect();
        let total = parts.iter().sum();
        (parts, total)
    }

    /// Soft spring elongations `d_0, ..., d_m`.
    fn soft_elongations<'a>(&self, q: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        let m = self.params.m;
        (0..=m).map(move |i| {
            let left = if i < m { q[2 * i] - q[2 * i + 1] } else { 0.0 };
            let right = if i > 0 { q[2 * i - 2] + q[2 * i - 1] } else { 0.0 };
            left - right
        })
    }

    /// Nonzero entries of the gradient of `d_i`.
    fn elongation_gradient(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + Clone {
        let right = (i > 0).then(|| [(2 * i - 2, -1.0), (2 * i - 1, -1.0)]);
        let left = (i < self.params.m).then(|| [(2 * i, 1.0), (2 * i + 1, -1.0)]);
        right.into_iter().flatten().chain(left.into_iter().flatten())
    }
}

impl SeparableSystem for Fpu {
    fn dim(&self) -> usize {
        2 * self.params.m
    }

    fn energy(&self, part: Part, x: &[f64]) -> f64 {
        let kind = |k: usize| x.iter().skip(k).step_by(2);
        match part {
            Part::SlowKinetic => 0.5 * kind(0).map(|v| v * v).sum::<f64>(),
            Part::FastKinetic => 0.5 * kind(1).map(|v| v * v).sum::<f64>(),
            Part::FastPotential => {
                0.5 * self.params.omega.powi(2) * kind(1).map(|v| v * v).sum::<f64>()
            }
            Part::SlowPotential => 0.25 * self.soft_elongations(x).map(|d| d.powi(4)).sum::<f64>(),
        }
    }

    fn gradient(&self, part: Part, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        match part {
            Part::SlowKinetic => (0..x.len()).step_by(2).for_each(|i| out[i] = x[i]),
            Part::FastKinetic => (1..x.len()).step_by(2).for_each(|i| out[i] = x[i]),
            Part::FastPotential => {
                let w2 = self.params.omega.powi(2);
                (1..x.len()).step_by(2).for_each(|i| out[i] = w2 * x[i]);
            }
            Part::SlowPotential => {
                for (i, d) in self.soft_elongations(x).enumerate() {
                    let d3 = d * d * d;
                    for (k, s) in self.elongation_gradient(i) {
                        out[k] += s * d3;
                    }
                }
            }
        }
    }

    fn hessian(&self, part: Part, x: &[f64]) -> Option<Matrix> {
        let n = self.dim();
        let mut h = Matrix::zeros(n, n);
        match part {
            Part::SlowKinetic => (0..n).step_by(2).for_each(|i| h[(i, i)] = 1.0),
            Part::FastKinetic => (1..n).step_by(2).for_each(|i| h[(i, i)] = 1.0),
            Part::FastPotential => {
                let w2 = self.params.omega.powi(2);
                (1..n).step_by(2).for_each(|i| h[(i, i)] = w2);
            }
            Part::SlowPotential => {
                for (i, d) in self.soft_elongations(x).enumerate() {
                    let g = self.elongation_gradient(i);
                    for (j, a) in g.clone() {
                        for (k, b) in g.clone() {
                            h[(j, k)] += 3.0 * d * d * a * b;
                        }
                    }
                }
            }
        }
        Some(h)
    }
}
