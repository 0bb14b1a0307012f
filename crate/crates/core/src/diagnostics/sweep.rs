use rayon::prelude::*;

use super::{fit_slope, reference_solution, steps_for, ComponentMask, ReferenceConfig};
use crate::integrators::{integrate_final, DriveOptions, Stepper};
use crate::systems::{Fpu, FpuParams};
use crate::Result;

/// Stiffness values of the sweep.
pub const SWEEP_OMEGAS: [f64; 4] = [50.0, 500.0, 5000.0, 10000.0];

/// `H = 2^-k` for `k = 5..=13`.
pub fn default_sweep_steps() -> Vec<f64> {
    (5..=13).map(|k| 0.5f64.powi(k)).collect()
}

pub struct SweepScheme {
    pub name: String,
    pub stepper: Box<dyn Stepper>,
}

impl SweepScheme {
    pub fn new(name: impl Into<String>, stepper: impl Stepper + 'static) -> Self {
        SweepScheme {
            name: name.into(),
            stepper: Box::new(stepper),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub scheme: String,
    pub omega: f64,
    pub h: f64,
    /// Slow-component max-norm error at `t_end`; NaN when the cell failed.
    pub error: f64,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepTable {
    /// Ordered by scheme, then omega, then decreasing `H`.
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    /// `scheme,omega,H,error`; failed cells carry their reason in a fifth
    /// column.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("scheme,omega,H,error,reason\n");
        for c in &self.cells {
            s += &format!(
                "{},{:.16e},{:.16e},{:.16e},{}\n",
                c.scheme,
                c.omega,
                c.h,
                c.error,
                c.reason.as_deref().unwrap_or("").replace(',', ";")
            );
        }
        s
    }

    pub fn column(&self, scheme: &str, omega: f64) -> impl Iterator<Item = &SweepCell> {
        let scheme = scheme.to_owned();
        self.cells.iter().filter(move |c| c.scheme == scheme && c.omega == omega)
    }

    /// Least-squares order over the finite cells of one scheme and omega
    /// with step sizes in `[h_min, h_max]`.
    pub fn slope(&self, scheme: &str, omega: f64, h_min: f64, h_max: f64) -> f64 {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .column(scheme, omega)
            .filter(|c| c.error.is_finite() && c.error > 0.0 && (h_min..=h_max).contains(&c.h))
            .map(|c| (c.h.ln(), c.error.ln()))
            .unzip();
        if x.len() < 2 {
            f64::NAN
        } else {
            fit_slope(&x, &y)
        }
    }
}

/// Global slow-component errors at `t_end` on the FPU chain with `m`
/// stiff springs from its benchmark initial state, for every scheme,
/// stiffness and step size. Failures of single cells, including a failed
/// reference, become NaN entries.
pub fn stability_sweep(
    schemes: &[SweepScheme],
    omegas: &[f64],
    step_sizes: &[f64],
    t_end: f64,
    m: usize,
    reference: &ReferenceConfig,
) -> Result<SweepTable> {
    let counts = step_sizes
        .iter()
        .map(|&h| steps_for(t_end, h))
        .collect::<Result<Vec<_>>>()?;
    let systems: Vec<Fpu> = omegas.iter().map(|&omega| Fpu::new(FpuParams { m, omega })).collect();
    let references: Vec<Result<_>> = systems
        .par_iter()
        .map(|sys| {
            let cfg = ReferenceConfig {
                mask: Some(ComponentMask::fpu_slow(sys)),
                ..reference.clone()
            };
            reference_solution(sys, &sys.benchmark_initial_state(), t_end, &cfg)
        })
        .collect();
    let jobs: Vec<(usize, usize, usize)> = (0..schemes.len())
        .flat_map(|s| (0..omegas.len()).flat_map(move |o| (0..step_sizes.len()).map(move |k| (s, o, k))))
        .collect();
    let opts = DriveOptions {
        fuse_kicks: true,
        ..Default::default()
    };
    let cells = jobs
        .par_iter()
        .map(|&(s, o, k)| {
            let sys = &systems[o];
            let outcome = references[o].as_ref().map_err(|e| format!("reference: {e}")).and_then(|reference| {
                let y0 = sys.benchmark_initial_state();
                integrate_final(&schemes[s].stepper, sys, &y0, step_sizes[k], counts[k], &opts)
                    .map(|(y, _)| ComponentMask::fpu_slow(sys).distance(&y, reference))
                    .map_err(|e| e.to_string())
            });
            let (error, reason) = match outcome {
                Ok(e) => (e, None),
                Err(r) => (f64::NAN, Some(r)),
            };
            SweepCell {
                scheme: schemes[s].name.clone(),
                omega: omegas[o],
                h: step_sizes[k],
                error,
                reason,
            }
        })
        .collect();
    Ok(SweepTable { cells })
}
