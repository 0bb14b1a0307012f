//! Separable Hamiltonian problems `H = T^s(p) + T^f(p) + V^s(q) + V^f(q)`.

mod fpu;
mod harmonic;
mod imex;
mod problem;

pub use fpu::{Fpu, FpuParams};
pub use harmonic::Harmonic;
pub use imex::{imex_split, ImexSplit, TwoWaySystem};
pub use problem::Problem;

use crate::tableau::{Matrix, Vector};

/// A point `(p, q)` of phase space.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseState {
    pub p: Vector,
    pub q: Vector,
}

impl PhaseState {
    pub fn new(p: Vector, q: Vector) -> Self {
        PhaseState { p, q }
    }

    pub fn from_slices(p: &[f64], q: &[f64]) -> Self {
        PhaseState {
            p: Vector::from_column_slice(p),
            q: Vector::from_column_slice(q),
        }
    }

    pub fn zeros(n: usize) -> Self {
        PhaseState {
            p: Vector::zeros(n),
            q: Vector::zeros(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    /// `(p, q)` stacked into one vector.
    pub fn to_vector(&self) -> Vector {
        let n = self.p.len();
        Vector::from_fn(n + self.q.len(), |i, _| if i < n { self.p[i] } else { self.q[i - n] })
    }

    /// Inverse of [`PhaseState::to_vector`] for `n` momenta.
    pub fn from_vector(n: usize, v: &Vector) -> Self {
        PhaseState {
            p: v.rows(0, n).into_owned(),
            q: v.rows(n, v.len() - n).into_owned(),
        }
    }

    /// Max-norm distance to `other`.
    pub fn distance(&self, other: &PhaseState) -> f64 {
        (&self.p - &other.p).amax().max((&self.q - &other.q).amax())
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().chain(self.q.iter()).all(|x| x.is_finite())
    }
}

/// `rho(p, q) = (-p, q)`.
pub fn momentum_reversal(y: &PhaseState) -> PhaseState {
    PhaseState {
        p: -&y.p,
        q: y.q.clone(),
    }
}

/// One of the four additive parts of a separable Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Part {
    SlowKinetic,
    FastKinetic,
    SlowPotential,
    FastPotential,
}

impl Part {
    pub const ALL: [Part; 4] = [
        Part::SlowKinetic,
        Part::FastKinetic,
        Part::SlowPotential,
        Part::FastPotential,
    ];

    /// Kinetic parts depend on `p`, potential parts on `q`.
    pub fn is_kinetic(self) -> bool {
        matches!(self, Part::SlowKinetic | Part::FastKinetic)
    }

    pub fn is_slow(self) -> bool {
        matches!(self, Part::SlowKinetic | Part::SlowPotential)
    }
}

/// A four-way split separable Hamiltonian. Kinetic parts take `p`,
/// potential parts take `q`.
pub trait SeparableSystem: Send + Sync {
    fn dim(&self) -> usize;

    fn energy(&self, part: Part, x: &[f64]) -> f64;

    /// Writes the gradient of `part` at `x` into `out`.
    fn gradient(&self, part: Part, x: &[f64], out: &mut [f64]);

    /// Hessian of `part`, when known in closed form.
    fn hessian(&self, _part: Part, _x: &[f64]) -> Option<Matrix> {
        None
    }

    /// Parts known to vanish identically; steppers may skip them.
    fn is_zero(&self, _part: Part) -> bool {
        false
    }

    fn grad(&self, part: Part, x: &Vector) -> Vector {
        let mut out = Vector::zeros(x.len());
        self.gradient(part, x.as_slice(), out.as_mut_slice());
        out
    }

    fn hamiltonian(&self, y: &PhaseState) -> f64 {
        Part::ALL
            .iter()
            .map(|&part| {
                let x = if part.is_kinetic() { &y.p } else { &y.q };
                self.energy(part, x.as_slice())
            })
            .sum()
    }
}

/// Largest relative deviation between the gradient of `part` at `x` and a
/// central difference of its energy with step `step`.
pub fn gradient_residual<S: SeparableSystem + ?Sized>(sys: &S, part: Part, x: &[f64], step: f64) -> f64 {
    let n = x.len();
    let mut g = vec![0.0; n];
    sys.gradient(part, x, &mut g);
    let scale = g.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut xs = x.to_vec();
    (0..n)
        .map(|i| {
            let h = step * (1.0 + x[i].abs());
            xs[i] = x[i] + h;
            let up = sys.energy(part, &xs);
            xs[i] = x[i] - h;
            let down = sys.energy(part, &xs);
            xs[i] = x[i];
            ((up - down) / (2.0 * h) - g[i]).abs() / scale
        })
        .fold(0.0, f64::max)
}
