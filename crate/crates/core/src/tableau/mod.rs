//! Runge–Kutta and multirate GARK coefficient tables.
//!
//! A multirate tableau is stored per micro-step: one slow base scheme, `M`
//! fast base schemes, and the slow/fast coupling blocks. The monolithic
//! Butcher matrix is only built by [`PartitionedMgarkTableau::flatten`],
//! which exists for checking.

mod format;
mod schemes;

use std::fmt;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub use format::{parse_tableau, write_tableau};
pub use schemes::{implicit_midpoint, leapfrog_pair, mr_imex2, mr_imim2, mr_lpfr};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Entrywise tolerance used when deciding whether two halves are equal.
pub const HALF_EQUALITY_TOL: f64 = 1e-14;

/// Base Runge–Kutta scheme `(A, b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RkTableau {
    pub a: Matrix,
    pub b: Vector,
}

impl RkTableau {
    pub fn new(a: Matrix, b: Vector) -> Result<Self> {
        let t = RkTableau { a, b };
        t.validate()?;
        Ok(t)
    }

    /// Build from row slices, e.g. `from_rows(&[&[0.5]], &[1.0])`.
    pub fn from_rows(rows: &[&[f64]], b: &[f64]) -> Result<Self> {
        let s = b.len();
        if rows.len() != s || rows.iter().any(|r| r.len() != s) {
            return Err(Error::tableau(format!("expected a {s}x{s} stage matrix")));
        }
        let a = Matrix::from_fn(s, s, |i, j| rows[i][j]);
        Self::new(a, Vector::from_column_slice(b))
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.b.len();
        if s == 0 {
            return Err(Error::tableau("a base scheme needs at least one stage"));
        }
        if self.a.shape() != (s, s) {
            return Err(Error::tableau(format!(
                "stage matrix is {:?} but there are {s} weights",
                self.a.shape()
            )));
        }
        if !all_finite(&self.a) || self.b.iter().any(|x| !x.is_finite()) {
            return Err(Error::tableau("non-finite coefficient"));
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        RkTableau {
            a: &self.a * c,
            b: &self.b * c,
        }
    }
}

/// The two halves of a partitioned base scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct RkTableauPair {
    /// Drives the coordinate stages.
    pub bar: RkTableau,
    /// Drives the momentum stages.
    pub tilde: RkTableau,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Half {
    Bar,
    Tilde,
}

impl Half {
    pub fn other(self) -> Half {
        match self {
            Half::Bar => Half::Tilde,
            Half::Tilde => Half::Bar,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Half::Bar => "bar",
            Half::Tilde => "tilde",
        }
    }
}

/// Rate tier of a stage. Micro-step indices are zero based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tier {
    Fast(usize),
    Slow,
}

impl Tier {
    pub fn is_slow(self) -> bool {
        matches!(self, Tier::Slow)
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tier::Slow => write!(f, "slow"),
            Tier::Fast(l) => write!(f, "fast lambda={}", l + 1),
        }
    }
}

/// Multirate GARK tableau with a single coefficient half.
///
/// `sf[l]` couples the slow stages to the fast stages of micro-step `l`
/// (shape `s_slow x s_fast`), `fs[l]` the other way round.
#[derive(Clone, Debug, PartialEq)]
pub struct MgarkTableau {
    pub slow: RkTableau,
    pub fast: Vec<RkTableau>,
    pub sf: Vec<Matrix>,
    pub fs: Vec<Matrix>,
}

impl MgarkTableau {
    pub fn new(slow: RkTableau, fast: Vec<RkTableau>, sf: Vec<Matrix>, fs: Vec<Matrix>) -> Result<Self> {
        let t = MgarkTableau { slow, fast, sf, fs };
        t.validate()?;
        Ok(t)
    }

    /// Multirate factor.
    pub fn m(&self) -> usize {
        self.fast.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.fast.len();
        if m == 0 {
            return Err(Error::tableau("M must be at least 1"));
        }
        if self.sf.len() != m || self.fs.len() != m {
            return Err(Error::tableau(format!(
                "expected {m} coupling blocks per direction, found {} (sf) and {} (fs)",
                self.sf.len(),
                self.fs.len()
            )));
        }
        self.slow.validate()?;
        let ss = self.slow.stages();
        for (l, fast) in self.fast.iter().enumerate() {
            fast.validate()?;
            let sfl = fast.stages();
            if self.sf[l].shape() != (ss, sfl) {
                return Err(Error::tableau(format!(
                    "sf lambda={} has shape {:?}, expected {:?}",
                    l + 1,
                    self.sf[l].shape(),
                    (ss, sfl)
                )));
            }
            if self.fs[l].shape() != (sfl, ss) {
                return Err(Error::tableau(format!(
                    "fs lambda={} has shape {:?}, expected {:?}",
                    l + 1,
                    self.fs[l].shape(),
                    (sfl, ss)
                )));
            }
            if !all_finite(&self.sf[l]) || !all_finite(&self.fs[l]) {
                return Err(Error::tableau("non-finite coupling coefficient"));
            }
        }
        Ok(())
    }

    /// View as a partitioned tableau with two identical halves.
    pub fn partitioned(&self) -> PartitionedMgarkTableau {
        PartitionedMgarkTableau {
            bar: self.clone(),
            tilde: self.clone(),
        }
    }

    /// Every block and weight multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        MgarkTableau {
            slow: self.slow.scaled(c),
            fast: self.fast.iter().map(|t| t.scaled(c)).collect(),
            sf: self.sf.iter().map(|x| x * c).collect(),
            fs: self.fs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn layout(&self) -> StageLayout {
        let mut fast = Vec::with_capacity(self.m());
        let mut at = 0;
        for t in &self.fast {
            fast.push(at..at + t.stages());
            at += t.stages();
        }
        StageLayout {
            fast,
            slow: at..at + self.slow.stages(),
        }
    }

    /// Monolithic Butcher tableau relative to the macro-step: fast stages
    /// of every micro-step first, then the slow stages.
    pub fn flatten(&self) -> RkTableau {
        let layout = self.layout();
        let n = layout.len();
        let inv_m = 1.0 / self.m() as f64;
        let mut a = Matrix::zeros(n, n);
        let mut b = Vector::zeros(n);
        for (l, rows) in layout.fast.iter().enumerate() {
            let fast = &self.fast[l];
            a.view_mut((rows.start, rows.start), (rows.len(), rows.len()))
                .copy_from(&(&fast.a * inv_m));
            for (k, cols) in layout.fast.iter().enumerate().take(l) {
                for i in rows.clone() {
                    for (j, col) in cols.clone().enumerate() {
                        a[(i, col)] = inv_m * self.fast[k].b[j];
                    }
                }
            }
            a.view_mut((rows.start, layout.slow.start), (rows.len(), layout.slow.len()))
                .copy_from(&self.fs[l]);
            a.view_mut((layout.slow.start, rows.start), (layout.slow.len(), rows.len()))
                .copy_from(&(&self.sf[l] * inv_m));
            b.rows_mut(rows.start, rows.len()).copy_from(&(&fast.b * inv_m));
        }
        let s = &layout.slow;
        a.view_mut((s.start, s.start), (s.len(), s.len()))
            .copy_from(&self.slow.a);
        b.rows_mut(s.start, s.len()).copy_from(&self.slow.b);
        RkTableau { a, b }
    }
}

/// Position of every tier's stages inside the monolithic stage vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageLayout {
    pub fast: Vec<Range<usize>>,
    pub slow: Range<usize>,
}

impl StageLayout {
    pub fn len(&self) -> usize {
        self.slow.end
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn fast_stages(&self) -> Range<usize> {
        0..self.slow.start
    }

    pub fn tier_of(&self, stage: usize) -> Tier {
        if self.slow.contains(&stage) {
            return Tier::Slow;
        }
        let l = self
            .fast
            .iter()
            .position(|r| r.contains(&stage))
            .expect("stage index out of range");
        Tier::Fast(l)
    }
}

/// Monolithic form of a partitioned tableau, one Butcher tableau per half.
#[derive(Clone, Debug, PartialEq)]
pub struct Flattened {
    pub bar: RkTableau,
    pub tilde: RkTableau,
    pub layout: StageLayout,
    pub m: usize,
}

impl Flattened {
    pub fn half(&self, h: Half) -> &RkTableau {
        match h {
            Half::Bar => &self.bar,
            Half::Tilde => &self.tilde,
        }
    }
}

/// Partitioned multirate GARK tableau: the bar half advances coordinates,
/// the tilde half advances momenta.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionedMgarkTableau {
    pub bar: MgarkTableau,
    pub tilde: MgarkTableau,
}

impl PartitionedMgarkTableau {
    pub fn new(bar: MgarkTableau, tilde: MgarkTableau) -> Result<Self> {
        let t = PartitionedMgarkTableau { bar, tilde };
        t.validate()?;
        Ok(t)
    }

    pub fn m(&self) -> usize {
        self.bar.m()
    }

    pub fn validate(&self) -> Result<()> {
        self.bar.validate()?;
        self.tilde.validate()?;
        if self.bar.m() != self.tilde.m() {
            return Err(Error::tableau(format!(
                "halves disagree on M ({} vs {})",
                self.bar.m(),
                self.tilde.m()
            )));
        }
        if self.bar.layout() != self.tilde.layout() {
            return Err(Error::tableau("halves have different stage counts"));
        }
        Ok(())
    }

    pub fn half(&self, h: Half) -> &MgarkTableau {
        match h {
            Half::Bar => &self.bar,
            Half::Tilde => &self.tilde,
        }
    }

    pub fn half_mut(&mut self, h: Half) -> &mut MgarkTableau {
        match h {
            Half::Bar => &mut self.bar,
            Half::Tilde => &mut self.tilde,
        }
    }

    pub fn slow_pair(&self) -> RkTableauPair {
        RkTableauPair {
            bar: self.bar.slow.clone(),
            tilde: self.tilde.slow.clone(),
        }
    }

    pub fn fast_pair(&self, lambda: usize) -> RkTableauPair {
        RkTableauPair {
            bar: self.bar.fast[lambda].clone(),
            tilde: self.tilde.fast[lambda].clone(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        PartitionedMgarkTableau {
            bar: self.bar.scaled(c),
            tilde: self.tilde.scaled(c),
        }
    }

    pub fn flatten(&self) -> Flattened {
        Flattened {
            bar: self.bar.flatten(),
            tilde: self.tilde.flatten(),
            layout: self.bar.layout(),
            m: self.m(),
        }
    }

    /// Collapse to a single-half tableau; fails when the halves differ.
    pub fn reduce(&self) -> Result<MgarkTableau> {
        self.validate()?;
        if let Some(block) = first_difference(&self.bar, &self.tilde) {
            return Err(Error::HalvesDiffer(block));
        }
        Ok(self.bar.clone())
    }
}

fn first_difference(x: &MgarkTableau, y: &MgarkTableau) -> Option<String> {
    let differ = |a: &Matrix, b: &Matrix| {
        a.shape() != b.shape() || (a - b).amax() > HALF_EQUALITY_TOL
    };
    let differ_v = |a: &Vector, b: &Vector| {
        a.len() != b.len() || (a - b).amax() > HALF_EQUALITY_TOL
    };
    if differ(&x.slow.a, &y.slow.a) {
        return Some("ss".into());
    }
    if differ_v(&x.slow.b, &y.slow.b) {
        return Some("b.s".into());
    }
    for l in 0..x.m() {
        let k = l + 1;
        if differ(&x.fast[l].a, &y.fast[l].a) {
            return Some(format!("ff lambda={k}"));
        }
        if differ_v(&x.fast[l].b, &y.fast[l].b) {
            return Some(format!("b.f lambda={k}"));
        }
        if differ(&x.sf[l], &y.sf[l]) {
            return Some(format!("sf lambda={k}"));
        }
        if differ(&x.fs[l], &y.fs[l]) {
            return Some(format!("fs lambda={k}"));
        }
    }
    None
}

fn all_finite(m: &Matrix) -> bool {
    m.iter().all(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monolithic_lpfr_has_six_stages_for_two_micro_steps() {
        let f = mr_lpfr(2).unwrap().flatten();
        assert_eq!(f.bar.a.shape(), (6, 6));
        assert_eq!(f.tilde.a.shape(), (6, 6));
        assert_eq!(f.layout.slow, 4..6);
    }

    #[test]
    fn single_micro_step_blocks_are_unscaled() {
        let t = mr_imex2(1).unwrap();
        let f = t.flatten();
        assert_eq!(f.a[(0, 0)], 0.5);
        assert_eq!(f.b[0], 1.0);
        assert_eq!(f.a.view((1, 1), (2, 2)), t.slow.a);
    }

    #[test]
    fn imex2_fill_below_the_fast_diagonal() {
        let f = mr_imex2(2).unwrap().flatten();
        // fast stage of micro-step 2 sees (1/M) 1 b^{f,1}^T
        assert_eq!(f.a[(1, 0)], 0.5);
        assert_eq!(f.a[(0, 1)], 0.0);
        assert_eq!(f.a[(1, 1)], 0.25);
        assert_eq!(f.b.as_slice(), &[0.5, 0.5, 0.5, 0.5]);
    }

    #[test]
    fn reduce_equal_halves_round_trips() {
        let t = mr_imim2(3).unwrap();
        assert_eq!(t.partitioned().reduce().unwrap(), t);
        let single = MgarkTableau::new(
            implicit_midpoint(),
            vec![implicit_midpoint()],
            vec![Matrix::from_element(1, 1, 0.5)],
            vec![Matrix::from_element(1, 1, 0.5)],
        )
        .unwrap();
        let p = single.partitioned();
        let f = p.flatten();
        assert_eq!(f.bar, single.flatten());
        assert_eq!(p.reduce().unwrap().flatten(), f.bar);
    }

    #[test]
    fn reduce_names_the_first_differing_block() {
        match mr_lpfr(2).unwrap().reduce() {
            Err(Error::HalvesDiffer(block)) => assert_eq!(block, "ss"),
            other => panic!("expected an error, got {other:?}"),
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let bad = MgarkTableau::new(
            leapfrog_pair().bar,
            vec![implicit_midpoint()],
            vec![Matrix::zeros(1, 1)],
            vec![Matrix::zeros(1, 2)],
        );
        assert!(matches!(bad, Err(Error::InvalidTableau(_))));
    }

    #[test]
    fn layout_maps_stages_to_tiers() {
        let layout = mr_lpfr(4).unwrap().bar.layout();
        assert_eq!(layout.tier_of(0), Tier::Fast(0));
        assert_eq!(layout.tier_of(7), Tier::Fast(3));
        assert_eq!(layout.tier_of(8), Tier::Slow);
        assert_eq!(layout.len(), 10);
    }
}
