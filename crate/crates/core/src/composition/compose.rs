use super::CompositionWeights;
use crate::integrators::{KickCache, MicroObserver, StepStats, Stepper};
use crate::systems::{PhaseState, SeparableSystem};
use crate::tableau::{Matrix, MgarkTableau, PartitionedMgarkTableau, RkTableau, Vector};
use crate::Result;

/// Tableaus that can be composed with themselves under step weights.
pub trait Compose: Sized {
    fn compose(&self, w: &CompositionWeights) -> Self;
}

/// The composed scheme as one multirate tableau with `r M` micro-steps.
pub fn compose_tableau<T: Compose>(t: &T, w: &CompositionWeights) -> T {
    t.compose(w)
}

/// Block lower triangular matrix whose diagonal blocks are `g_i A` and
/// whose blocks left of the diagonal are `g_j 1 b^T`.
fn composed_rk(base: &RkTableau, gammas: &[f64]) -> RkTableau {
    let s = base.stages();
    let n = s * gammas.len();
    let mut a = Matrix::zeros(n, n);
    let mut b = Vector::zeros(n);
    let fill = Matrix::from_fn(s, s, |_, j| base.b[j]);
    for (i, gi) in gammas.iter().enumerate() {
        a.view_mut((i * s, i * s), (s, s)).copy_from(&(&base.a * *gi));
        for (j, gj) in gammas.iter().enumerate().take(i) {
            a.view_mut((i * s, j * s), (s, s)).copy_from(&(&fill * *gj));
        }
        b.rows_mut(i * s, s).copy_from(&(&base.b * *gi));
    }
    RkTableau { a, b }
}

impl Compose for MgarkTableau {
    fn compose(&self, w: &CompositionWeights) -> Self {
        let g = w.gammas();
        let r = g.len();
        let m = self.m();
        let ss = self.slow.stages();
        // fast blocks are stored relative to the micro-step, which shrinks by r
        let scale = |i: usize| r as f64 * g[i];
        let mut fast = Vec::with_capacity(r * m);
        let mut sf = Vec::with_capacity(r * m);
        let mut fs = Vec::with_capacity(r * m);
        for i in 0..r {
            for l in 0..m {
                let f = &self.fast[l];
                let sfl = f.stages();
                fast.push(f.scaled(scale(i)));
                let mut to_fast = Matrix::zeros(r * ss, sfl);
                let mut to_slow = Matrix::zeros(sfl, r * ss);
                for j in 0..r {
                    let rows = j * ss;
                    if j == i {
                        to_fast.view_mut((rows, 0), (ss, sfl)).copy_from(&(&self.sf[l] * scale(i)));
                        to_slow.view_mut((0, rows), (sfl, ss)).copy_from(&(&self.fs[l] * g[i]));
                    } else if j > i {
                        let full = Matrix::from_fn(ss, sfl, |_, c| f.b[c] * scale(i));
                        to_fast.view_mut((rows, 0), (ss, sfl)).copy_from(&full);
                    } else {
                        let full = Matrix::from_fn(sfl, ss, |_, c| self.slow.b[c] * g[j]);
                        to_slow.view_mut((0, rows), (sfl, ss)).copy_from(&full);
                    }
                }
                sf.push(to_fast);
                fs.push(to_slow);
            }
        }
        MgarkTableau {
            slow: composed_rk(&self.slow, g),
            fast,
            sf,
            fs,
        }
    }
}

impl Compose for PartitionedMgarkTableau {
    fn compose(&self, w: &CompositionWeights) -> Self {
        PartitionedMgarkTableau {
            bar: self.bar.compose(w),
            tilde: self.tilde.compose(w),
        }
    }
}

/// Monolithic composition of a single Runge–Kutta tableau.
impl Compose for RkTableau {
    fn compose(&self, w: &CompositionWeights) -> Self {
        composed_rk(self, w.gammas())
    }
}

/// Micro-step sizes `sum(b^f_l) H / M` of a multirate tableau.
pub fn micro_step_sizes(t: &MgarkTableau, h: f64) -> Vec<f64> {
    let m = t.m() as f64;
    t.fast.iter().map(|f| f.b.sum() * h / m).collect()
}

/// `Psi_H = Phi_{gamma_r H} o ... o Phi_{gamma_1 H}`. Any stepper can be the
/// base, including another composition.
#[derive(Clone, Debug)]
pub struct ComposedStepper<S> {
    pub base: S,
    pub weights: CompositionWeights,
}

pub fn compose_stepper<S: Stepper>(base: S, weights: CompositionWeights) -> ComposedStepper<S> {
    ComposedStepper { base, weights }
}

impl<S: Stepper> Stepper for ComposedStepper<S> {
    fn name(&self) -> String {
        format!(
            "{}[{} order {}, r={}]",
            self.base.name(),
            self.weights.family(),
            self.weights.order(),
            self.weights.r()
        )
    }

    fn step(&self, sys: &dyn SeparableSystem, y: &PhaseState, h: f64, stats: &mut StepStats) -> Result<PhaseState> {
        self.weights
            .gammas()
            .iter()
            .try_fold(y.clone(), |y, g| self.base.step(sys, &y, g * h, stats))
    }

    /// Adjacent substeps share the kick at their common state.
    fn step_fused(
        &self,
        sys: &dyn SeparableSystem,
        y: &PhaseState,
        h: f64,
        cache: &mut KickCache,
        stats: &mut StepStats,
    ) -> Result<PhaseState> {
        self.weights
            .gammas()
            .iter()
            .try_fold(y.clone(), |y, g| self.base.step_fused(sys, &y, g * h, cache, stats))
    }

    /// Fractions are reported relative to the composed step, so they are not
    /// monotone when some weights are negative.
    fn step_observed(
        &self,
        sys: &dyn SeparableSystem,
        y: &PhaseState,
        h: f64,
        stats: &mut StepStats,
        observer: &mut MicroObserver<'_>,
    ) -> Result<PhaseState> {
        let times = self.weights.substep_times();
        let last = self.weights.r() - 1;
        let mut y = y.clone();
        for (i, g) in self.weights.gammas().iter().enumerate() {
            let start = times[i];
            y = self.base.step_observed(sys, &y, g * h, stats, &mut |f, s| {
                let at = if i == last && f == 1.0 { 1.0 } else { start + g * f };
                observer(at, s)
            })?;
        }
        Ok(y)
    }
}
