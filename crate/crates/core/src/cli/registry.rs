//! Named schemes and their expected tableau properties.

use std::path::Path;

use super::config::SchemeSpec;
use crate::composition::compose_stepper;
use crate::conditions::{
    has_unit_micro_steps, is_decoupled_partitioned, is_explicit, is_symmetric, is_symplectic, order_report, order_report_flattened, positive_weights,
    ConditionEntry, DEFAULT_TOL,
};
use crate::integrators::{ExplicitMidpoint, ForwardEuler, MrImex2, MrImim2, MrLpfr, PmgarkStepper, SolverConfig, Stepper};
use crate::tableau::{mr_imex2, mr_imim2, mr_lpfr, parse_tableau, PartitionedMgarkTableau};
use crate::{Error, Result};

/// sMGARK schemes backed by a tableau.
pub const TABLEAU_SCHEMES: [&str; 3] = ["mr-lpfr", "mr-imex2", "mr-imim2"];
/// Non-symplectic single-rate foils.
pub const FOILS: [&str; 2] = ["forward-euler", "rk2"];

pub fn describe(name: &str) -> &'static str {
    match name {
        "mr-lpfr" => "explicit multirate leapfrog (M even)",
        "mr-imex2" => "slow kicks around implicit-midpoint fast micro-steps",
        "mr-imim2" => "implicit midpoint on both tiers",
        "forward-euler" => "explicit Euler on the full field (foil)",
        "rk2" => "explicit midpoint rule on the full field (foil)",
        _ => "",
    }
}

fn available() -> String {
    TABLEAU_SCHEMES.iter().chain(&FOILS).copied().collect::<Vec<_>>().join(", ") + ", or a tableau file"
}

fn unknown(name: &str) -> Error {
    Error::Unknown {
        kind: "scheme",
        name: name.into(),
        available: available(),
    }
}

/// Tableau of a builtin scheme or of a tableau file.
pub fn tableau(name: &str, m: usize) -> Result<PartitionedMgarkTableau> {
    match name {
        "mr-lpfr" => mr_lpfr(m),
        "mr-imex2" => Ok(mr_imex2(m)?.partitioned()),
        "mr-imim2" => Ok(mr_imim2(m)?.partitioned()),
        _ if Path::new(name).is_file() => parse_tableau(&std::fs::read_to_string(name)?),
        _ => Err(unknown(name)),
    }
}

/// One-step map of `spec` without its composition.
pub fn base_stepper(spec: &SchemeSpec, cfg: SolverConfig) -> Result<Box<dyn Stepper>> {
    let m = spec.m;
    Ok(match spec.name.as_str() {
        "mr-lpfr" => Box::new(MrLpfr::new(m)?),
        "mr-imex2" => Box::new(MrImex2::new(m, cfg)?),
        "mr-imim2" => Box::new(MrImim2::new(m, cfg)?),
        "forward-euler" => Box::new(ForwardEuler),
        "rk2" => Box::new(ExplicitMidpoint),
        other => Box::new(PmgarkStepper::new(tableau(other, m)?, cfg)?.with_name(other)),
    })
}

pub fn stepper(spec: &SchemeSpec, cfg: SolverConfig) -> Result<Box<dyn Stepper>> {
    let base = base_stepper(spec, cfg)?;
    Ok(match spec.compose {
        None => base,
        Some((family, order)) => Box::new(compose_stepper(base, family.weights(order)?)),
    })
}

/// Checks that decide the outcome of `check`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Requirements {
    /// Order conditions up to this order must hold.
    pub order: u8,
    pub symplectic: bool,
    pub symmetric: bool,
    pub explicit: bool,
    pub decoupled: bool,
    pub positive_weights: bool,
}

impl Requirements {
    /// What a builtin is designed to satisfy; files only need order two and
    /// symplecticity.
    pub fn for_scheme(name: &str) -> Self {
        let builtin = TABLEAU_SCHEMES.contains(&name);
        Requirements {
            order: 2,
            symplectic: true,
            symmetric: builtin,
            explicit: name == "mr-lpfr",
            decoupled: name == "mr-lpfr" || name == "mr-imex2",
            positive_weights: builtin,
        }
    }

    /// Adds the comma-separated properties in `list`.
    pub fn require(mut self, list: &str) -> Result<Self> {
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "symplectic" => self.symplectic = true,
                "symmetric" => self.symmetric = true,
                "explicit" => self.explicit = true,
                "decoupled" => self.decoupled = true,
                "positive-weights" => self.positive_weights = true,
                other => {
                    return Err(Error::Unknown {
                        kind: "property",
                        name: other.into(),
                        available: "symplectic, symmetric, explicit, decoupled, positive-weights".into(),
                    })
                }
            }
        }
        Ok(self)
    }
}

/// Every condition with a flag telling whether it is required.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub rows: Vec<(ConditionEntry, bool)>,
    pub tol: f64,
}

impl CheckReport {
    pub fn pass(&self) -> bool {
        self.failing().next().is_none()
    }

    /// Required conditions that do not hold.
    pub fn failing(&self) -> impl Iterator<Item = &ConditionEntry> {
        self.rows
            .iter()
            .filter(|(e, required)| *required && !e.passes(self.tol))
            .map(|(e, _)| e)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("condition_id,lhs,rhs,residual,pass,required\n");
        for (e, required) in &self.rows {
            s += &format!(
                "{},{:.16e},{:.16e},{:.16e},{},{}\n",
                e.id,
                e.lhs,
                e.rhs,
                e.residual,
                e.passes(self.tol),
                required
            );
        }
        s
    }
}

/// Order conditions up to three and the structural checks. Tableaus with
/// unequal micro-steps get the monolithic order conditions.
pub fn check_tableau(t: &PartitionedMgarkTableau, req: &Requirements, tol: f64) -> CheckReport {
    let order_of = |id: &str| id[1..].split('.').next().and_then(|p| p.parse::<u8>().ok()).unwrap_or(u8::MAX);
    let order = if has_unit_micro_steps(t, tol) {
        order_report(t, 3, tol)
    } else {
        order_report_flattened(t, 3, tol)
    };
    let mut rows: Vec<(ConditionEntry, bool)> = order
        .entries
        .into_iter()
        .map(|e| {
            let required = order_of(&e.id) <= req.order;
            (e, required)
        })
        .collect();
    rows.extend(is_symplectic(t, tol).entries.into_iter().map(|e| (e, req.symplectic)));
    rows.extend(is_symmetric(t, tol).entries.into_iter().map(|e| (e, req.symmetric)));
    rows.push((ConditionEntry::flag("explicit", is_explicit(t)), req.explicit));
    rows.push((ConditionEntry::flag("decoupled", is_decoupled_partitioned(t)), req.decoupled));
    rows.push((ConditionEntry::flag("positive_weights", positive_weights(t)), req.positive_weights));
    CheckReport { rows, tol }
}

/// Refuses a builtin whose tableau fails its own checks.
pub fn verify_builtin(name: &str, m: usize) -> Result<()> {
    if !TABLEAU_SCHEMES.contains(&name) {
        return Ok(());
    }
    let report = check_tableau(&tableau(name, m)?, &Requirements::for_scheme(name), DEFAULT_TOL);
    let failing = report.failing().next().map(|e| e.id.clone());
    match failing {
        None => Ok(()),
        Some(id) => Err(Error::InvalidTableau(format!("{name} with M = {m} fails {id}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_pass_their_checks() {
        for name in TABLEAU_SCHEMES {
            for m in [2, 4] {
                verify_builtin(name, m).unwrap();
            }
        }
    }

    #[test]
    fn third_order_rows_are_informational() {
        let r = check_tableau(&mr_lpfr(2).unwrap(), &Requirements::for_scheme("mr-lpfr"), DEFAULT_TOL);
        assert!(r.pass());
        assert!(r.rows.iter().any(|(e, req)| e.id.starts_with("p3") && !req && !e.passes(r.tol)));
    }

    #[test]
    fn imim2_is_not_decoupled() {
        let t = tableau("mr-imim2", 2).unwrap();
        let r = check_tableau(&t, &Requirements::for_scheme("mr-imim2").require("decoupled").unwrap(), DEFAULT_TOL);
        assert_eq!(r.failing().map(|e| e.id.as_str()).collect::<Vec<_>>(), ["decoupled"]);
    }

    #[test]
    fn unknown_names_list_the_schemes() {
        let spec = SchemeSpec {
            name: "rk9".into(),
            m: 1,
            compose: None,
        };
        let e = base_stepper(&spec, SolverConfig::default()).err().unwrap().to_string();
        assert!(e.contains("mr-imex2") && e.contains("rk9"), "{e}");
        assert!(matches!(tableau("mr-lpfr", 3), Err(Error::OddMultirate(3))));
    }
}
