//! Order conditions of a symmetric composition of a symmetric base method.
//!
//! The base flow is modelled as `exp(sum_k h^k X_k)` over odd `k` with
//! free non-commuting `X_k`, and the composition is expanded in words over
//! the letters `X_1, X_3, ...`. The composition has order `p` when its
//! coefficient of every word of weight at most `p` matches `exp(h X_1)`.

/// Words and, per word, its splittings into a prefix word and a suffix.
struct Words {
    /// `(prefix index, suffix weight, suffix length)` for every split.
    splits: Vec<Vec<(usize, i32, usize)>>,
    target: Vec<f64>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl Words {
    fn new(order: usize) -> Self {
        let letters: Vec<usize> = (1..order).step_by(2).collect();
        let mut words: Vec<Vec<usize>> = vec![vec![]];
        let mut frontier = vec![vec![]];
        while !frontier.is_empty() {
            let next: Vec<Vec<usize>> = frontier
                .iter()
                .flat_map(|w: &Vec<usize>| {
                    let weight: usize = w.iter().sum();
                    letters.iter().filter(move |&&l| weight + l <= order).map(move |&l| {
                        let mut x = w.clone();
                        x.push(l);
                        x
                    })
                })
                .collect();
            words.extend(next.iter().cloned());
            frontier = next;
        }
        let index = |w: &[usize]| words.iter().position(|x| x == w).expect("prefix of a word is a word");
        let splits = words
            .iter()
            .map(|w| {
                (0..=w.len())
                    .map(|k| (index(&w[..k]), w[k..].iter().sum::<usize>() as i32, w.len() - k))
                    .collect()
            })
            .collect();
        let target = words
            .iter()
            .map(|w| if w.iter().all(|&l| l == 1) { 1.0 / factorial(w.len()) } else { 0.0 })
            .collect();
        Words { splits, target }
    }

    fn coefficients(&self, gammas: &[f64]) -> Vec<f64> {
        let n = self.target.len();
        let mut c = vec![0.0; n];
        c[0] = 1.0;
        let mut next = vec![0.0; n];
        for &g in gammas {
            for (w, splits) in self.splits.iter().enumerate() {
                next[w] = splits
                    .iter()
                    .map(|&(p, weight, len)| c[p] * g.powi(weight) / factorial(len))
                    .sum();
            }
            std::mem::swap(&mut c, &mut next);
        }
        c
    }
}

/// Largest violation of the order-`order` conditions by `gammas`.
pub fn order_residual(gammas: &[f64], order: usize) -> f64 {
    let words = Words::new(order);
    words
        .coefficients(gammas)
        .iter()
        .zip(&words.target)
        .map(|(c, t)| (c - t).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_counts() {
        // compositions of n <= 4 into the parts 1 and 3, including the empty one
        assert_eq!(Words::new(4).target.len(), 1 + 1 + 1 + 2 + 3);
    }

    #[test]
    fn the_base_method_has_order_two_only() {
        assert_eq!(order_residual(&[1.0], 2), 0.0);
        assert!(order_residual(&[1.0], 4) > 0.5);
    }

    #[test]
    fn halving_steps_does_not_raise_the_order() {
        assert!(order_residual(&[0.5, 0.5], 2) < 1e-16);
        assert!((order_residual(&[0.5, 0.5], 4) - 0.25).abs() < 1e-15);
    }
}
