//! Run settings: a flat `key = value` file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::composition::Family;
use crate::diagnostics::{steps_for, ReferenceConfig};
use crate::integrators::{JacobianMode, SolverConfig};
use crate::systems::{PhaseState, Problem, SeparableSystem};
use crate::{Error, Result};

/// Every key understood by configuration files. Flags use the same names
/// with `-` in place of `_`.
pub const KEYS: [&str; 23] = [
    "scheme",
    "M",
    "compose",
    "compose_order",
    "problem",
    "m",
    "omega",
    "initial",
    "p0",
    "q0",
    "H",
    "t_end",
    "newton_rel_tol",
    "newton_abs_tol",
    "max_iters",
    "jacobian",
    "fuse_kicks",
    "micro",
    "steps",
    "omegas",
    "schemes",
    "reference_step",
    "reference_gate",
];

/// Raw key-value pairs; later layers override earlier ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    /// `key = value` lines. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let column = line.len() - line.trim_start().len() + 1;
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                column,
                message: "expected 'key = value'".into(),
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::Parse {
                    line: i + 1,
                    column,
                    message: format!("unknown key '{key}' (known: {})", KEYS.join(", ")),
                });
            }
            map.insert(key.to_owned(), value.trim().to_owned());
        }
        Ok(Settings(map))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Settings(pairs.into_iter().map(|(k, v)| (k.to_owned(), v.to_owned())).collect())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(key.to_owned(), value.into());
    }

    pub fn overlay(mut self, top: &Settings) -> Self {
        self.0.extend(top.0.iter().map(|(k, v)| (k.clone(), v.clone())));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Config(format!("missing setting '{key}'")))
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<T> {
        let v = self.required(key)?;
        v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
    }

    fn real(&self, key: &str) -> Result<f64> {
        parse_real(self.required(key)?).map_err(|e| Error::Config(format!("{key}: {e}")))
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.required(key)? {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            v => Err(Error::Config(format!("{key}: expected true or false, got '{v}'"))),
        }
    }

    /// Comma-separated reals.
    pub fn reals(&self, key: &str) -> Result<Vec<f64>> {
        self.required(key)?
            .split(',')
            .map(|s| parse_real(s.trim()).map_err(|e| Error::Config(format!("{key}: {e}"))))
            .collect()
    }

    pub fn names(&self, key: &str) -> Result<Vec<String>> {
        Ok(self.required(key)?.split(',').map(|s| s.trim().to_owned()).collect())
    }

    pub fn reference(&self) -> Result<ReferenceConfig> {
        let mut cfg = ReferenceConfig::default();
        if self.get("reference_step").is_some() {
            cfg.step = self.real("reference_step")?;
        }
        if self.get("reference_gate").is_some() {
            cfg.gate = self.real("reference_gate")?;
        }
        Ok(cfg)
    }
}

/// A real number, or a power of two written `2^k`.
pub fn parse_real(s: &str) -> std::result::Result<f64, String> {
    if let Some(k) = s.strip_prefix("2^") {
        return k.parse::<i32>().map(|k| 2f64.powi(k)).map_err(|_| format!("bad exponent in '{s}'"));
    }
    s.parse::<f64>().map_err(|_| format!("not a number: '{s}'"))
}

/// Settings shared by every run.
pub fn defaults() -> Settings {
    Settings::from_pairs([
        ("scheme", "mr-imex2"),
        ("M", "1"),
        ("compose", "none"),
        ("compose_order", "4"),
        ("problem", "fpu"),
        ("m", "3"),
        ("omega", "50"),
        ("initial", "benchmark"),
        ("H", "0.1"),
        ("t_end", "1"),
        ("newton_rel_tol", "1e-12"),
        ("newton_abs_tol", "1e-14"),
        ("max_iters", "50"),
        ("jacobian", "analytic"),
        ("fuse_kicks", "true"),
        ("micro", "false"),
    ])
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeSpec {
    /// Builtin name or path of a tableau file.
    pub name: String,
    pub m: usize,
    pub compose: Option<(Family, usize)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    /// The standard start of the chain benchmark.
    Benchmark,
    Explicit { p: Vec<f64>, q: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub m: usize,
    pub omega: f64,
    pub initial: InitialCondition,
}

impl ProblemSpec {
    pub fn build(&self) -> Result<(Problem, PhaseState)> {
        let problem = Problem::from_name(&self.name, self.m, self.omega)?;
        let y0 = match &self.initial {
            InitialCondition::Benchmark => problem.benchmark_initial_state(),
            InitialCondition::Explicit { p, q } => {
                let n = problem.dim();
                if p.len() != n || q.len() != n {
                    return Err(Error::Dimension(format!(
                        "{} needs p0 and q0 of length {n}, got {} and {}",
                        problem.name(),
                        p.len(),
                        q.len()
                    )));
                }
                PhaseState::from_slices(p, q)
            }
        };
        Ok((problem, y0))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scheme: SchemeSpec,
    pub problem: ProblemSpec,
    pub h: f64,
    pub t_end: f64,
    pub solver: SolverConfig,
    pub fuse_kicks: bool,
    pub micro: bool,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// Reads `settings` on top of [`defaults`].
    pub fn from_settings(settings: &Settings) -> Result<Self> {
        let s = defaults().overlay(settings);
        let compose = match s.required("compose")? {
            "none" | "" => None,
            family => Some((family.parse::<Family>()?, s.parsed::<usize>("compose_order")?)),
        };
        let initial = match s.required("initial")? {
            // "paper" is kept as an alias of the benchmark preset
            "benchmark" | "paper" => InitialCondition::Benchmark,
            "explicit" => InitialCondition::Explicit {
                p: s.reals("p0")?,
                q: s.reals("q0")?,
            },
            other => {
                return Err(Error::Unknown {
                    kind: "initial condition",
                    name: other.into(),
                    available: "benchmark, paper, explicit".into(),
                })
            }
        };
        let jacobian_mode = match s.required("jacobian")? {
            "analytic" => JacobianMode::Analytic,
            "fd" | "finite-difference" => JacobianMode::FiniteDifference,
            other => {
                return Err(Error::Unknown {
                    kind: "jacobian mode",
                    name: other.into(),
                    available: "analytic, fd".into(),
                })
            }
        };
        let solver = SolverConfig {
            newton_rel_tol: s.real("newton_rel_tol")?,
            newton_abs_tol: s.real("newton_abs_tol")?,
            max_iters: s.parsed("max_iters")?,
            jacobian_mode,
            ..SolverConfig::default()
        };
        solver.validate()?;
        let cfg = RunConfig {
            scheme: SchemeSpec {
                name: s.required("scheme")?.to_owned(),
                m: s.parsed("M")?,
                compose,
            },
            problem: ProblemSpec {
                name: s.required("problem")?.to_owned(),
                m: s.parsed("m")?,
                omega: s.real("omega")?,
                initial,
            },
            h: s.real("H")?,
            t_end: s.real("t_end")?,
            solver,
            fuse_kicks: s.flag("fuse_kicks")?,
            micro: s.flag("micro")?,
            output: None,
        };
        cfg.steps()?;
        Ok(cfg)
    }

    /// Number of macro-steps; `t_end / H` must be integral.
    pub fn steps(&self) -> Result<usize> {
        steps_for(self.t_end, self.h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_are_overridden_by_flags() {
        let file = Settings::parse("# run\nscheme = mr-lpfr\nM = 4\n\nH = 2^-4 # step\n").unwrap();
        let flags = Settings::from_pairs([("M", "8")]);
        let cfg = RunConfig::from_settings(&file.overlay(&flags)).unwrap();
        assert_eq!(cfg.scheme.name, "mr-lpfr");
        assert_eq!(cfg.scheme.m, 8);
        assert_eq!(cfg.h, 0.0625);
        assert_eq!(cfg.steps().unwrap(), 16);
    }

    #[test]
    fn unknown_keys_report_their_position() {
        let e = Settings::parse("M = 2\n  speed = 3\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, column: 3, .. }), "{e}");
        assert!(Settings::parse("just words").is_err());
    }

    #[test]
    fn non_integral_step_counts_are_rejected() {
        let s = Settings::from_pairs([("H", "0.3")]);
        assert!(matches!(RunConfig::from_settings(&s), Err(Error::NonIntegralSteps(_))));
    }

    #[test]
    fn explicit_initial_conditions() {
        let s = Settings::from_pairs([
            ("problem", "harmonic"),
            ("initial", "explicit"),
            ("p0", "0.5"),
            ("q0", "-1"),
        ]);
        let (_, y) = RunConfig::from_settings(&s).unwrap().problem.build().unwrap();
        assert_eq!(y, PhaseState::from_slices(&[0.5], &[-1.0]));
        let bad = Settings::from_pairs([("initial", "explicit"), ("p0", "1"), ("q0", "1")]);
        assert!(RunConfig::from_settings(&bad).unwrap().problem.build().is_err());
    }

    #[test]
    fn benchmark_preset_aliases() {
        for name in ["benchmark", "paper"] {
            let cfg = RunConfig::from_settings(&Settings::from_pairs([("initial", name)])).unwrap();
            assert_eq!(cfg.problem.initial, InitialCondition::Benchmark);
        }
    }

    #[test]
    fn compositions() {
        let cfg = RunConfig::from_settings(&Settings::from_pairs([("compose", "triple-jump")])).unwrap();
        assert_eq!(cfg.scheme.compose, Some((Family::TripleJump, 4)));
    }
}
