//! Algebraic checks on tableaus.

mod graph;
mod order;
mod structure;

use std::fmt::Write as _;

pub use graph::{dependency_groups, is_decoupled, is_decoupled_partitioned};
pub use order::{has_unit_micro_steps, order_report, order_report_flattened};
pub use structure::{is_explicit, is_symmetric, is_symplectic, positive_weights};

/// Default tolerance of every coefficient check.
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionEntry {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl ConditionEntry {
    pub fn new(id: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        ConditionEntry {
            id: id.into(),
            lhs,
            rhs,
            residual: lhs - rhs,
        }
    }

    /// Pass/fail flag recorded as an entry (`lhs` is 1 when the property holds).
    pub fn flag(id: impl Into<String>, holds: bool) -> Self {
        Self::new(id, if holds { 1.0 } else { 0.0 }, 1.0)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.residual.abs() <= tol
    }
}

/// Named residuals of a group of conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub entries: Vec<ConditionEntry>,
    pub tol: f64,
}

impl ConditionReport {
    pub fn new(tol: f64) -> Self {
        ConditionReport {
            entries: Vec::new(),
            tol,
        }
    }

    pub fn push(&mut self, entry: ConditionEntry) {
        self.entries.push(entry);
    }

    pub fn extend(&mut self, other: ConditionReport) {
        self.entries.extend(other.entries);
    }

    pub fn pass(&self) -> bool {
        self.failing().next().is_none()
    }

    pub fn max_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.residual.abs()).fold(0.0, f64::max)
    }

    pub fn failing(&self) -> impl Iterator<Item = &ConditionEntry> {
        self.entries.iter().filter(move |e| !e.passes(self.tol))
    }

    pub fn get(&self, id: &str) -> Option<&ConditionEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Entries whose id starts with `prefix`.
    pub fn select<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a ConditionEntry> + 'a {
        self.entries.iter().filter(move |e| e.id.starts_with(prefix))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("condition_id,lhs,rhs,residual,pass\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{}",
                e.id,
                e.lhs,
                e.rhs,
                e.residual,
                e.passes(self.tol)
            );
        }
        out
    }
}

/// Residuals of the two composition conditions: `sum(g) - 1` and
/// `sum(g^(p+1))`.
pub fn composition_order_residual(gammas: &[f64], p: u32) -> (f64, f64) {
    let r1 = gammas.iter().sum::<f64>() - 1.0;
    let r2 = gammas.iter().map(|g| g.powi(p as i32 + 1)).sum();
    (r1, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_residual_of_unit_weight() {
        assert_eq!(composition_order_residual(&[1.0], 2), (0.0, 1.0));
    }

    #[test]
    fn report_pass_tracks_tolerance() {
        let mut r = ConditionReport::new(1e-12);
        r.push(ConditionEntry::new("a", 0.5, 0.5));
        assert!(r.pass());
        r.push(ConditionEntry::new("b", 1.0, 0.5));
        assert!(!r.pass());
        assert_eq!(r.failing().map(|e| e.id.as_str()).collect::<Vec<_>>(), ["b"]);
        assert!(r.to_csv().starts_with("condition_id,lhs,rhs,residual,pass\na,"));
    }
}
