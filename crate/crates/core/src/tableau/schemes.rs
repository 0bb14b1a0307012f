//! Named schemes.

use super::{Matrix, MgarkTableau, PartitionedMgarkTableau, RkTableau, RkTableauPair, Vector};
use crate::{Error, Result};

fn mat(rows: &[&[f64]]) -> Matrix {
    let cols = rows.first().map_or(0, |r| r.len());
    Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

fn rk(rows: &[&[f64]], b: &[f64]) -> RkTableau {
    RkTableau {
        a: mat(rows),
        b: Vector::from_column_slice(b),
    }
}

/// Störmer–Verlet as a partitioned two-stage scheme.
pub fn leapfrog_pair() -> RkTableauPair {
    RkTableauPair {
        bar: rk(&[&[0.0, 0.0], &[0.5, 0.5]], &[0.5, 0.5]),
        tilde: rk(&[&[0.5, 0.0], &[0.5, 0.0]], &[0.5, 0.5]),
    }
}

pub fn implicit_midpoint() -> RkTableau {
    rk(&[&[0.5]], &[1.0])
}

/// Multirate leapfrog.
///
/// For even `M` the blocks follow the kick / fast leapfrog / drift / fast
/// leapfrog / kick sequence: the slow drift happens after micro-step `M/2`
/// and the second slow kick after all micro-steps. `M = 1` is accepted as
/// the single-rate leapfrog applied to the full Hamiltonian.
pub fn mr_lpfr(m: usize) -> Result<PartitionedMgarkTableau> {
    if m == 0 {
        return Err(Error::tableau("M must be at least 1"));
    }
    if m > 1 && m % 2 == 1 {
        return Err(Error::OddMultirate(m));
    }
    let lf = leapfrog_pair();
    let zero = Matrix::zeros(2, 2);
    let halves = Matrix::from_element(2, 2, 0.5);

    let (bar_sf, bar_fs, tilde_sf, tilde_fs): (Vec<_>, Vec<_>, Vec<_>, Vec<_>) = if m == 1 {
        (
            vec![lf.bar.a.clone()],
            vec![lf.bar.a.clone()],
            vec![lf.tilde.a.clone()],
            vec![lf.tilde.a.clone()],
        )
    } else {
        let first_half = |l: usize| l < m / 2;
        (
            (0..m).map(|_| lf.bar.a.clone()).collect(),
            (0..m)
                .map(|l| if first_half(l) { zero.clone() } else { halves.clone() })
                .collect(),
            (0..m)
                .map(|l| if first_half(l) { halves.clone() } else { zero.clone() })
                .collect(),
            (0..m).map(|_| lf.tilde.a.clone()).collect(),
        )
    };

    let bar = MgarkTableau::new(lf.bar.clone(), vec![lf.bar.clone(); m], bar_sf, bar_fs)?;
    let tilde = MgarkTableau::new(lf.tilde.clone(), vec![lf.tilde.clone(); m], tilde_sf, tilde_fs)?;
    PartitionedMgarkTableau::new(bar, tilde)
}

/// Implicit-midpoint fast tier inside a leapfrog-like slow tier. Applied to
/// a two-way split with a slow field depending on positions only, this is
/// an impulse method.
pub fn mr_imex2(m: usize) -> Result<MgarkTableau> {
    if m == 0 {
        return Err(Error::tableau("M must be at least 1"));
    }
    MgarkTableau::new(
        rk(&[&[0.25, 0.0], &[0.5, 0.25]], &[0.5, 0.5]),
        vec![implicit_midpoint(); m],
        vec![mat(&[&[0.0], &[1.0]]); m],
        vec![mat(&[&[0.5, 0.0]]); m],
    )
}

/// Implicit midpoint on both tiers. The slow stage sits at the middle of
/// the macro-step and the fast stage of micro-step `l` (one based) at
/// `(2l-1)/(2M)`, with couplings
/// `sf_l = (2(M-l)+1)/(2M)` and `fs_l = (2l-1)/(2M)`.
pub fn mr_imim2(m: usize) -> Result<MgarkTableau> {
    if m == 0 {
        return Err(Error::tableau("M must be at least 1"));
    }
    let two_m = 2.0 * m as f64;
    let sf = (1..=m)
        .map(|l| Matrix::from_element(1, 1, (2 * (m - l) + 1) as f64 / two_m))
        .collect();
    let fs = (1..=m)
        .map(|l| Matrix::from_element(1, 1, (2 * l - 1) as f64 / two_m))
        .collect();
    MgarkTableau::new(implicit_midpoint(), vec![implicit_midpoint(); m], sf, fs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leapfrog_pair_coefficients() {
        let lf = leapfrog_pair();
        assert_eq!(lf.bar.a, mat(&[&[0.0, 0.0], &[0.5, 0.5]]));
        assert_eq!(lf.tilde.a, mat(&[&[0.5, 0.0], &[0.5, 0.0]]));
        assert_eq!(lf.bar.b.as_slice(), &[0.5, 0.5]);
        assert_eq!(lf.tilde.b.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn leapfrog_pair_is_a_symplectic_pair() {
        let lf = leapfrog_pair();
        let bb = Matrix::from_diagonal(&lf.bar.b);
        let bt = Matrix::from_diagonal(&lf.tilde.b);
        let r = lf.bar.a.transpose() * bt + bb * &lf.tilde.a - &lf.bar.b * lf.tilde.b.transpose();
        assert_eq!(r.amax(), 0.0);
    }

    #[test]
    fn midpoint_coefficients() {
        let t = implicit_midpoint();
        assert_eq!(t.a[(0, 0)], 0.5);
        assert_eq!(t.b[0], 1.0);
        assert!(t.b[0] > 0.0);
        assert_eq!(t.b[0] * t.a[(0, 0)] * 2.0 - t.b[0] * t.b[0], 0.0);
    }

    #[test]
    fn lpfr_two_micro_steps() {
        let t = mr_lpfr(2).unwrap();
        let lf = leapfrog_pair();
        assert_eq!(t.bar.sf[0], lf.bar.a);
        assert_eq!(t.bar.sf[1], lf.bar.a);
        assert_eq!(t.bar.fs[0], Matrix::zeros(2, 2));
        assert_eq!(t.bar.fs[1], Matrix::from_element(2, 2, 0.5));
        assert_eq!(t.tilde.sf[0], Matrix::from_element(2, 2, 0.5));
        assert_eq!(t.tilde.sf[1], Matrix::zeros(2, 2));
        assert_eq!(t.tilde.fs[1], lf.tilde.a);
    }

    #[test]
    fn lpfr_rejects_odd_multirate_factors() {
        let e = mr_lpfr(3).unwrap_err();
        assert!(e.to_string().contains("M must be even"));
        assert!(mr_lpfr(1).is_ok());
        assert!(mr_lpfr(0).is_err());
    }

    #[test]
    fn imex2_blocks() {
        let t = mr_imex2(1).unwrap();
        assert_eq!(t.slow.a, mat(&[&[0.25, 0.0], &[0.5, 0.25]]));
        let t = mr_imex2(4).unwrap();
        assert!(t.fs.iter().all(|x| *x == mat(&[&[0.5, 0.0]])));
        assert!(t.sf.iter().all(|x| *x == mat(&[&[0.0], &[1.0]])));
    }

    #[test]
    fn imim2_couplings_sum_to_the_weights() {
        let t = mr_imim2(5).unwrap();
        for l in 0..5 {
            assert!((t.sf[l][(0, 0)] + t.fs[l][(0, 0)] - 1.0).abs() < 1e-15);
            assert!((t.sf[l][(0, 0)] + t.sf[4 - l][(0, 0)] - 1.0).abs() < 1e-15);
        }
        assert_eq!(t.sf[0][(0, 0)], 0.9);
        assert_eq!(t.fs[0][(0, 0)], 0.1);
    }
}
