//! Symplecticity, symmetry, explicitness and weight positivity.

use super::{ConditionEntry, ConditionReport};
use crate::tableau::{Half, Matrix, MgarkTableau, PartitionedMgarkTableau, Vector};

/// `X^T diag(v) + diag(w) Y - w v^T` for blocks `X` of the bar half and
/// `Y` of the tilde half.
fn pair_residual(x: &Matrix, v: &Vector, y: &Matrix, w: &Vector) -> f64 {
    let r = x.transpose() * Matrix::from_diagonal(v) + Matrix::from_diagonal(w) * y - w * v.transpose();
    r.amax()
}

/// Symplecticity conditions (a) to (d) on the blocks.
pub fn is_symplectic(t: &PartitionedMgarkTableau, tol: f64) -> ConditionReport {
    let (bar, tilde) = (&t.bar, &t.tilde);
    let mut report = ConditionReport::new(tol);
    let mut push = |id: String, r: f64| report.push(ConditionEntry::new(id, r, 0.0));
    push(
        "symplectic.a".into(),
        pair_residual(&bar.slow.a, &tilde.slow.b, &tilde.slow.a, &bar.slow.b),
    );
    for l in 0..t.m() {
        let k = l + 1;
        let (bf, tf) = (&bar.fast[l], &tilde.fast[l]);
        push(
            format!("symplectic.b.lambda={k}"),
            pair_residual(&bf.a, &tf.b, &tf.a, &bf.b),
        );
        push(
            format!("symplectic.c.lambda={k}"),
            pair_residual(&bar.fs[l], &tf.b, &tilde.sf[l], &bar.slow.b),
        );
        push(
            format!("symplectic.d.lambda={k}"),
            pair_residual(&bar.sf[l], &tilde.slow.b, &tilde.fs[l], &bf.b),
        );
    }
    report
}

/// Stage reversal `P A P` of a block.
fn reversed(a: &Matrix) -> Matrix {
    let (r, c) = a.shape();
    Matrix::from_fn(r, c, |i, j| a[(r - 1 - i, c - 1 - j)])
}

fn reversed_vec(b: &Vector) -> Vector {
    Vector::from_iterator(b.len(), b.iter().rev().copied())
}

/// `max |A + P B P - C|`, infinite when the mirrored blocks differ in shape.
fn mirror_residual(a: &Matrix, b: &Matrix, c: &Matrix) -> f64 {
    if a.shape() != b.shape() || a.shape() != c.shape() {
        return f64::INFINITY;
    }
    (a + reversed(b) - c).amax()
}

fn mirror_residual_vec(a: &Vector, b: &Vector) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    (reversed_vec(b) - a).amax()
}

fn symmetry_entries(x: &MgarkTableau, half: Half, report: &mut ConditionReport) {
    let m = x.m();
    let h = half.name();
    let ones_outer = |n: usize, b: &Vector| Vector::from_element(n, 1.0) * b.transpose();
    let mut push = |id: String, r: f64| report.push(ConditionEntry::new(id, r, 0.0));
    let ss = &x.slow;
    push(
        format!("symmetric.{h}.ss"),
        mirror_residual(&ss.a, &ss.a, &ones_outer(ss.stages(), &ss.b)),
    );
    push(format!("symmetric.{h}.b.s"), mirror_residual_vec(&ss.b, &ss.b));
    for l in 0..m {
        let k = l + 1;
        let mirror = m - 1 - l;
        let (f, g) = (&x.fast[l], &x.fast[mirror]);
        push(
            format!("symmetric.{h}.ff.lambda={k}"),
            mirror_residual(&f.a, &g.a, &ones_outer(f.stages(), &f.b)),
        );
        push(
            format!("symmetric.{h}.b.f.lambda={k}"),
            mirror_residual_vec(&f.b, &g.b),
        );
        push(
            format!("symmetric.{h}.sf.lambda={k}"),
            mirror_residual(&x.sf[l], &x.sf[mirror], &ones_outer(ss.stages(), &f.b)),
        );
        push(
            format!("symmetric.{h}.fs.lambda={k}"),
            mirror_residual(&x.fs[l], &x.fs[mirror], &ones_outer(f.stages(), &ss.b)),
        );
    }
}

/// Symmetry (self-adjointness) of both halves.
///
/// A single-rate scheme is symmetric when `A + P A P = 1 b^T` and
/// `P b = b` for the stage reversal `P`. Reversing a macro-step maps
/// micro-step `l` to `M+1-l`, which gives the block conditions checked here.
pub fn is_symmetric(t: &PartitionedMgarkTableau, tol: f64) -> ConditionReport {
    let mut report = ConditionReport::new(tol);
    symmetry_entries(&t.bar, Half::Bar, &mut report);
    symmetry_entries(&t.tilde, Half::Tilde, &mut report);
    report
}

/// True when the bar and transposed tilde monolithic matrices have
/// disjoint supports, so every stage is explicit.
pub fn is_explicit(t: &PartitionedMgarkTableau) -> bool {
    let f = t.flatten();
    f.bar
        .a
        .iter()
        .zip(f.tilde.a.transpose().iter())
        .all(|(a, b)| a * b == 0.0)
}

pub fn positive_weights(t: &PartitionedMgarkTableau) -> bool {
    [&t.bar, &t.tilde].into_iter().all(|x| {
        x.slow.b.iter().all(|&b| b > 0.0) && x.fast.iter().all(|f| f.b.iter().all(|&b| b > 0.0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::DEFAULT_TOL;
    use crate::tableau::{mr_imex2, mr_imim2, mr_lpfr, RkTableau};

    fn euler() -> PartitionedMgarkTableau {
        let e = RkTableau::from_rows(&[&[0.0]], &[1.0]).unwrap();
        let z = Matrix::zeros(1, 1);
        MgarkTableau::new(e.clone(), vec![e], vec![z.clone()], vec![z])
            .unwrap()
            .partitioned()
    }

    #[test]
    fn lpfr_is_exactly_symplectic() {
        let r = is_symplectic(&mr_lpfr(2).unwrap(), DEFAULT_TOL);
        assert_eq!(r.max_residual(), 0.0);
        assert_eq!(r.entries.len(), 7);
    }

    #[test]
    fn imex2_is_symplectic_and_symmetric() {
        let t = mr_imex2(3).unwrap().partitioned();
        assert!(is_symplectic(&t, DEFAULT_TOL).pass());
        assert!(is_symmetric(&mr_imex2(2).unwrap().partitioned(), DEFAULT_TOL).pass());
        assert_eq!(is_symplectic(&mr_imex2(2).unwrap().partitioned(), DEFAULT_TOL).max_residual(), 0.0);
    }

    #[test]
    fn explicit_euler_is_neither_symplectic_nor_symmetric() {
        let t = euler();
        let r = is_symplectic(&t, DEFAULT_TOL);
        assert_eq!(r.get("symplectic.a").unwrap().residual, 1.0);
        assert!(!is_symmetric(&t, DEFAULT_TOL).pass());
    }

    #[test]
    fn shipped_schemes_are_symmetric() {
        assert!(is_symmetric(&mr_lpfr(4).unwrap(), DEFAULT_TOL).pass());
        assert!(is_symmetric(&mr_lpfr(1).unwrap(), DEFAULT_TOL).pass());
        assert!(is_symmetric(&mr_imim2(5).unwrap().partitioned(), DEFAULT_TOL).pass());
    }

    #[test]
    fn explicitness() {
        assert!(is_explicit(&mr_lpfr(2).unwrap()));
        assert!(is_explicit(&mr_lpfr(1).unwrap()));
        assert!(!is_explicit(&mr_imex2(1).unwrap().partitioned()));
        assert!(is_explicit(&mr_imex2(2).unwrap().partitioned().scaled(0.0)));
    }

    #[test]
    fn weights() {
        assert!(positive_weights(&mr_imex2(3).unwrap().partitioned()));
        assert!(positive_weights(&mr_lpfr(2).unwrap()));
        let mut t = mr_lpfr(2).unwrap();
        t.bar.slow.b = Vector::from_vec(vec![1.0, 0.0]);
        assert!(!positive_weights(&t));
    }
}
