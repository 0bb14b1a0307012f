//! Order conditions up to order three for partitioned multirate schemes.
//!
//! Each row is a pattern over the rate tiers `(q, m, l)`:
//! weight `b_x^q 1`, linear `b_x^q A_y^{qm} 1`, bushy
//! `b_x^q diag(A_y^{qm} 1) A_x^{ql} 1` and chain `b_x^q A_y^{qm} A_x^{ml} 1`,
//! where `x` is the half of the weights and `y` the other one.
//! [`order_report`] evaluates the rows on the blocks with the micro-step
//! sums written out, [`order_report_flattened`] on the monolithic matrices.

use super::{ConditionEntry, ConditionReport};
use crate::tableau::{Flattened, Half, MgarkTableau, PartitionedMgarkTableau, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rate {
    S,
    F,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    Weight,
    Linear,
    Bushy,
    Chain,
}

#[derive(Clone, Copy, Debug)]
struct Row {
    shape: Shape,
    tiers: [Rate; 3],
}

impl Row {
    fn order(&self) -> u8 {
        match self.shape {
            Shape::Weight => 1,
            Shape::Linear => 2,
            Shape::Bushy | Shape::Chain => 3,
        }
    }

    fn used(&self) -> &[Rate] {
        &self.tiers[..self.order() as usize]
    }

    /// Power of M relating block and monolithic residuals.
    fn fast_count(&self) -> i32 {
        self.used().iter().filter(|&&r| r == Rate::F).count() as i32
    }

    fn id(&self, x: Half) -> String {
        let tier = match self.tiers[0] {
            Rate::S => "slow",
            Rate::F => "fast",
        };
        let tiers: String = self
            .used()
            .iter()
            .map(|r| if *r == Rate::S { 's' } else { 'f' })
            .collect();
        let (xn, yn) = (x.name(), x.other().name());
        match self.shape {
            Shape::Weight => format!("p1.{tier}.{xn}"),
            Shape::Linear => format!("p2.{tier}.{xn}-{yn}-{tiers}"),
            Shape::Bushy => format!("p3.{tier}.bushy.{xn}-{yn}-{xn}-{tiers}"),
            Shape::Chain => format!("p3.{tier}.chain.{xn}-{yn}-{xn}-{tiers}"),
        }
    }

    /// Right-hand side of the block form.
    fn block_rhs(&self, m: f64) -> f64 {
        use Rate::*;
        match (self.shape, self.tiers) {
            (Shape::Weight, [S, ..]) => 1.0,
            (Shape::Weight, [F, ..]) => m,
            (Shape::Linear, [S, S, _]) => 0.5,
            (Shape::Linear, _) => m / 2.0,
            (Shape::Bushy, [S, S, S]) => 1.0 / 3.0,
            (Shape::Bushy, [S, S, F]) | (Shape::Bushy, [F, F, F]) | (Shape::Bushy, [F, S, S]) => m / 3.0,
            (Shape::Bushy, _) => m * m / 3.0,
            (Shape::Chain, [S, S, S]) => 1.0 / 6.0,
            (Shape::Chain, [S, S, F]) | (Shape::Chain, [S, F, S]) | (Shape::Chain, [F, F, F]) | (Shape::Chain, [F, S, S]) => {
                m / 6.0
            }
            (Shape::Chain, _) => m * m / 6.0,
        }
    }

    fn mono_rhs(&self) -> f64 {
        match self.shape {
            Shape::Weight => 1.0,
            Shape::Linear => 0.5,
            Shape::Bushy => 1.0 / 3.0,
            Shape::Chain => 1.0 / 6.0,
        }
    }
}

fn rows(p_max: u8) -> Vec<Row> {
    use Rate::*;
    let mut out = Vec::new();
    let mut add = |shape, list: &[[Rate; 3]]| {
        out.extend(list.iter().map(|&tiers| Row { shape, tiers }));
    };
    if p_max >= 1 {
        add(Shape::Weight, &[[S, S, S], [F, F, F]]);
    }
    if p_max >= 2 {
        add(Shape::Linear, &[[S, S, S], [S, F, F], [F, F, F], [F, S, S]]);
    }
    if p_max >= 3 {
        add(
            Shape::Bushy,
            &[[S, S, S], [S, S, F], [S, F, F], [F, F, F], [F, F, S], [F, S, S]],
        );
        add(
            Shape::Chain,
            &[
                [S, S, S],
                [S, S, F],
                [S, F, S],
                [S, F, F],
                [F, F, F],
                [F, F, S],
                [F, S, F],
                [F, S, S],
            ],
        );
    }
    out
}

/// Row sums and micro-step partial sums of one half.
struct Sums<'a> {
    t: &'a MgarkTableau,
    ss1: Vector,
    sf1: Vector,
    ff1: Vec<Vector>,
    fs1: Vec<Vector>,
    /// `sum_{l < lambda} b^{f,l}^T 1`
    prefix: Vec<f64>,
    /// `sum_{mu > lambda} b^{f,mu}^T 1`
    suffix: Vec<f64>,
}

impl<'a> Sums<'a> {
    fn new(t: &'a MgarkTableau) -> Self {
        let ones = |n: usize| Vector::from_element(n, 1.0);
        let ss = t.slow.stages();
        let ss1 = &t.slow.a * ones(ss);
        let sf1 = t
            .sf
            .iter()
            .fold(Vector::zeros(ss), |acc, a| acc + a * ones(a.ncols()));
        let ff1 = t.fast.iter().map(|f| &f.a * ones(f.stages())).collect();
        let fs1 = t.fs.iter().map(|a| a * ones(ss)).collect();
        let totals: Vec<f64> = t.fast.iter().map(|f| f.b.sum()).collect();
        let prefix = (0..totals.len()).map(|l| totals[..l].iter().sum()).collect();
        let suffix = (0..totals.len()).map(|l| totals[l + 1..].iter().sum()).collect();
        Sums {
            t,
            ss1,
            sf1,
            ff1,
            fs1,
            prefix,
            suffix,
        }
    }

    fn m(&self) -> usize {
        self.t.m()
    }
}

/// `sum_i a_i b_i c_i`
fn dot3(a: &Vector, b: &Vector, c: &Vector) -> f64 {
    a.iter().zip(b.iter()).zip(c.iter()).map(|((a, b), c)| a * b * c).sum()
}

fn eval_block(row: &Row, x: &Sums, y: &Sums) -> f64 {
    use Rate::*;
    let lambdas = 0..x.m();
    let bs = &x.t.slow.b;
    let bf = |l: usize| &x.t.fast[l].b;
    match (row.shape, row.tiers) {
        (Shape::Weight, [S, ..]) => bs.sum(),
        (Shape::Weight, [F, ..]) => lambdas.map(|l| bf(l).sum()).sum(),

        (Shape::Linear, [S, S, _]) => bs.dot(&y.ss1),
        (Shape::Linear, [S, F, _]) => bs.dot(&y.sf1),
        (Shape::Linear, [F, F, _]) => lambdas.map(|l| bf(l).dot(&y.ff1[l])).sum(),
        (Shape::Linear, [F, S, _]) => lambdas.map(|l| bf(l).dot(&y.fs1[l])).sum(),

        (Shape::Bushy, [S, S, S]) => dot3(bs, &y.ss1, &x.ss1),
        (Shape::Bushy, [S, S, F]) => dot3(bs, &y.ss1, &x.sf1),
        (Shape::Bushy, [S, F, F]) => dot3(bs, &y.sf1, &x.sf1),
        (Shape::Bushy, [F, F, F]) => lambdas.map(|l| dot3(bf(l), &y.ff1[l], &x.ff1[l])).sum(),
        (Shape::Bushy, [F, F, S]) => lambdas
            .map(|l| dot3(bf(l), &y.ff1[l].add_scalar(y.prefix[l]), &x.fs1[l]))
            .sum(),
        (Shape::Bushy, [F, S, S]) => lambdas.map(|l| dot3(bf(l), &y.fs1[l], &x.fs1[l])).sum(),

        (Shape::Chain, [S, S, S]) => bs.dot(&(&y.t.slow.a * &x.ss1)),
        (Shape::Chain, [S, S, F]) => bs.dot(&(&y.t.slow.a * &x.sf1)),
        (Shape::Chain, [S, F, S]) => lambdas.map(|l| bs.dot(&(&y.t.sf[l] * &x.fs1[l]))).sum(),
        (Shape::Chain, [S, F, F]) => lambdas
            .map(|l| bs.dot(&(&y.t.sf[l] * x.ff1[l].add_scalar(x.prefix[l]))))
            .sum(),
        (Shape::Chain, [F, F, F]) => lambdas.map(|l| bf(l).dot(&(&y.t.fast[l].a * &x.ff1[l]))).sum(),
        (Shape::Chain, [F, F, S]) => lambdas
            .map(|l| bf(l).dot(&(&y.t.fast[l].a * &x.fs1[l] + &x.fs1[l] * x.suffix[l])))
            .sum(),
        (Shape::Chain, [F, S, F]) => lambdas.map(|l| bf(l).dot(&(&y.t.fs[l] * &x.sf1))).sum(),
        (Shape::Chain, [F, S, S]) => lambdas.map(|l| bf(l).dot(&(&y.t.fs[l] * &x.ss1))).sum(),
        _ => unreachable!("row patterns are fixed"),
    }
}

/// True when every micro-step's fast weights sum to one in both halves,
/// the structure the block rows assume when they fold the micro-step shifts
/// into their right-hand sides. Composed tableaus have unequal micro-steps;
/// use [`order_report_flattened`] for them.
pub fn has_unit_micro_steps(t: &PartitionedMgarkTableau, tol: f64) -> bool {
    [&t.bar, &t.tilde]
        .iter()
        .all(|x| x.fast.iter().all(|f| (f.b.sum() - 1.0).abs() <= tol))
}

/// Evaluate every row of order `<= p_max` on the blocks.
pub fn order_report(t: &PartitionedMgarkTableau, p_max: u8, tol: f64) -> ConditionReport {
    let bar = Sums::new(&t.bar);
    let tilde = Sums::new(&t.tilde);
    let m = t.m() as f64;
    let mut report = ConditionReport::new(tol);
    for row in rows(p_max) {
        for x in [Half::Bar, Half::Tilde] {
            let (xs, ys) = match x {
                Half::Bar => (&bar, &tilde),
                Half::Tilde => (&tilde, &bar),
            };
            report.push(ConditionEntry::new(row.id(x), eval_block(&row, xs, ys), row.block_rhs(m)));
        }
    }
    report
}

fn eval_mono(row: &Row, f: &Flattened, x: Half) -> f64 {
    let fast = f.layout.fast_stages();
    let slow = f.layout.slow.clone();
    let range = |r: Rate| match r {
        Rate::S => slow.clone(),
        Rate::F => fast.clone(),
    };
    let (ax, ay) = (&f.half(x).a, &f.half(x.other()).a);
    let [q, m, l] = row.tiers.map(range);
    let bq = f.half(x).b.rows(q.start, q.len()).into_owned();
    let block = |a: &crate::tableau::Matrix, r: &std::ops::Range<usize>, c: &std::ops::Range<usize>| {
        a.view((r.start, c.start), (r.len(), c.len())).into_owned()
    };
    let ones = |n: usize| Vector::from_element(n, 1.0);
    match row.shape {
        Shape::Weight => bq.sum(),
        Shape::Linear => bq.dot(&(block(ay, &q, &m) * ones(m.len()))),
        Shape::Bushy => dot3(
            &bq,
            &(block(ay, &q, &m) * ones(m.len())),
            &(block(ax, &q, &l) * ones(l.len())),
        ),
        Shape::Chain => bq.dot(&(block(ay, &q, &m) * (block(ax, &m, &l) * ones(l.len())))),
    }
}

/// Monolithic evaluation of the same rows.
///
/// `lhs` and `rhs` are the single-rate values; `residual` is rescaled by
/// `M^k` (`k` the number of fast tiers in the row) so that it is directly
/// comparable with [`order_report`].
pub fn order_report_flattened(t: &PartitionedMgarkTableau, p_max: u8, tol: f64) -> ConditionReport {
    let f = t.flatten();
    let m = t.m() as f64;
    let mut report = ConditionReport::new(tol);
    for row in rows(p_max) {
        for x in [Half::Bar, Half::Tilde] {
            let lhs = eval_mono(&row, &f, x);
            let rhs = row.mono_rhs();
            report.push(ConditionEntry {
                id: row.id(x),
                lhs,
                rhs,
                residual: (lhs - rhs) * m.powi(row.fast_count()),
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::DEFAULT_TOL;
    use crate::tableau::{mr_imex2, mr_lpfr};

    #[test]
    fn row_counts() {
        let r = order_report(&mr_lpfr(2).unwrap(), 3, DEFAULT_TOL);
        let count = |p: &str| r.select(p).count();
        assert_eq!(count("p1."), 4);
        assert_eq!(count("p2."), 8);
        assert_eq!(count("p3."), 28);
    }

    #[test]
    fn composed_micro_steps_are_not_unit() {
        use crate::composition::{compose_tableau, CompositionWeights};
        let t = mr_lpfr(2).unwrap();
        assert!(has_unit_micro_steps(&t, 1e-14));
        let c = compose_tableau(&t, &CompositionWeights::triple_jump(2).unwrap());
        assert!(!has_unit_micro_steps(&c, 1e-14));
        assert!(order_report_flattened(&c, 3, DEFAULT_TOL).pass());
    }

    #[test]
    fn ids_are_unique() {
        let r = order_report(&mr_lpfr(2).unwrap(), 3, DEFAULT_TOL);
        let mut ids: Vec<_> = r.entries.iter().map(|e| e.id.clone()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 40);
    }

    #[test]
    fn lpfr_is_second_order() {
        let r = order_report(&mr_lpfr(2).unwrap(), 2, DEFAULT_TOL);
        assert_eq!(r.entries.len(), 12);
        assert!(r.max_residual() <= 1e-13, "{r:?}");
    }

    #[test]
    fn imex2_is_second_order() {
        assert!(order_report(&mr_imex2(5).unwrap().partitioned(), 2, DEFAULT_TOL).pass());
    }

    #[test]
    fn zero_slow_weight_is_invisible_to_second_order_rows() {
        // The tilde row sums A~^{ss} 1 and sum A~^{sf} 1 are constant vectors,
        // so any bar slow weights summing to one satisfy every order-2 row.
        // Third-order and symplecticity rows catch the perturbation.
        let mut t = mr_lpfr(2).unwrap();
        t.bar.slow.b = Vector::from_vec(vec![1.0, 0.0]);
        assert!(order_report(&t, 2, DEFAULT_TOL).pass());
        let r3 = order_report(&t, 3, DEFAULT_TOL);
        let e = r3.get("p3.slow.bushy.bar-tilde-bar-sss").unwrap();
        assert_eq!(e.lhs, 0.0);
        let reference = order_report(&mr_lpfr(2).unwrap(), 3, DEFAULT_TOL);
        assert_eq!(reference.get("p3.slow.bushy.bar-tilde-bar-sss").unwrap().lhs, 0.25);
        assert!(!crate::conditions::is_symplectic(&t, DEFAULT_TOL).pass());
    }
}
