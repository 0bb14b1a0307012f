//! Named problems for configuration files and the command line.

use super::{Fpu, FpuParams, Harmonic, Part, PhaseState, SeparableSystem};
use crate::tableau::Matrix;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Problem {
    Fpu(Fpu),
    Harmonic(Harmonic),
}

impl Problem {
    pub const NAMES: [&'static str; 2] = ["fpu", "harmonic"];

    /// `m` is ignored by the harmonic oscillator.
    pub fn from_name(name: &str, m: usize, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::Config(format!("omega must be positive, got {omega}")));
        }
        match name {
            "fpu" if m >= 1 => Ok(Problem::Fpu(Fpu::new(FpuParams { m, omega }))),
            "fpu" => Err(Error::Config("fpu needs m >= 1".into())),
            "harmonic" => Ok(Problem::Harmonic(Harmonic::new(omega))),
            _ => Err(Error::Unknown {
                kind: "problem",
                name: name.into(),
                available: Self::NAMES.join(", "),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Problem::Fpu(_) => "fpu",
            Problem::Harmonic(_) => "harmonic",
        }
    }

    /// The FPU preset of the benchmark, or `(p, q) = (0, 1)` for the
    /// oscillator.
    pub fn benchmark_initial_state(&self) -> PhaseState {
        match self {
            Problem::Fpu(f) => f.benchmark_initial_state(),
            Problem::Harmonic(h) => {
                let mut y = PhaseState::zeros(h.dim);
                y.q.fill(1.0);
                y
            }
        }
    }

    /// Oscillatory energies `(I_1..I_m, I)`; the oscillator reports its
    /// total energy as a single spring.
    pub fn oscillatory_energy(&self, y: &PhaseState) -> (Vec<f64>, f64) {
        match self {
            Problem::Fpu(f) => f.oscillatory_energy(y),
            Problem::Harmonic(h) => {
                let e = h.hamiltonian(y);
                (vec![e], e)
            }
        }
    }

    fn inner(&self) -> &dyn SeparableSystem {
        match self {
            Problem::Fpu(f) => f,
            Problem::Harmonic(h) => h,
        }
    }
}

impl SeparableSystem for Problem {
    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn energy(&self, part: Part, x: &[f64]) -> f64 {
        self.inner().energy(part, x)
    }

    fn gradient(&self, part: Part, x: &[f64], out: &mut [f64]) {
        self.inner().gradient(part, x, out)
    }

    fn hessian(&self, part: Part, x: &[f64]) -> Option<Matrix> {
        self.inner().hessian(part, x)
    }

    fn is_zero(&self, part: Part) -> bool {
        self.inner().is_zero(part)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        let p = Problem::from_name("fpu", 3, 50.0).unwrap();
        assert_eq!(p.dim(), 6);
        assert_eq!(p.oscillatory_energy(&p.benchmark_initial_state()).1, 1.0);
        assert_eq!(Problem::from_name("harmonic", 0, 2.0).unwrap().dim(), 1);
        let err = Problem::from_name("kepler", 3, 1.0).unwrap_err().to_string();
        assert!(err.contains("fpu, harmonic"), "{err}");
    }
}
