use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use super::series::order_residual;
use crate::conditions::DEFAULT_TOL;
use crate::{Error, Result};

const BUNDLED: &str = include_str!("../../data/composition_weights.txt");

/// Symmetry is checked entrywise to this tolerance.
const SYMMETRY_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    TripleJump,
    Suzuki,
    /// Tabulated sets; `in_window` sets keep every intermediate time inside
    /// the macro-step.
    AdvancedComposition { in_window: bool },
    Custom,
}

impl Family {
    pub const NAMES: [&'static str; 5] = ["tj", "sf", "ac", "ac*", "custom"];

    pub fn name(self) -> &'static str {
        match self {
            Family::TripleJump => "tj",
            Family::Suzuki => "sf",
            Family::AdvancedComposition { in_window: false } => "ac",
            Family::AdvancedComposition { in_window: true } => "ac*",
            Family::Custom => "custom",
        }
    }

    /// Weights of this family raising a base of order 2 to `order`.
    pub fn weights(self, order: usize) -> Result<CompositionWeights> {
        match self {
            Family::TripleJump => CompositionWeights::recursive_triple_jump(order),
            Family::Suzuki => CompositionWeights::recursive_suzuki(order),
            Family::AdvancedComposition { in_window } => advanced_composition(order, in_window),
            Family::Custom => Err(Error::Weights("custom weights must be read from a file".into())),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tj" | "triple-jump" => Ok(Family::TripleJump),
            "sf" | "suzuki" => Ok(Family::Suzuki),
            "ac" => Ok(Family::AdvancedComposition { in_window: false }),
            "ac*" => Ok(Family::AdvancedComposition { in_window: true }),
            "custom" => Ok(Family::Custom),
            _ => Err(Error::Unknown {
                kind: "composition family",
                name: s.into(),
                available: Family::NAMES.join(", "),
            }),
        }
    }
}

/// Symmetric weights `gamma_1..gamma_r` of `Phi_{gamma_r H} o ... o Phi_{gamma_1 H}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositionWeights {
    gammas: Vec<f64>,
    base_order: usize,
    order: usize,
    family: Family,
}

impl CompositionWeights {
    /// Checks symmetry and consistency; the claimed `order` is not verified
    /// here, see [`CompositionWeights::order_residual`].
    pub fn new(gammas: Vec<f64>, base_order: usize, order: usize, family: Family) -> Result<Self> {
        if gammas.is_empty() || gammas.iter().any(|g| !g.is_finite()) {
            return Err(Error::Weights("need at least one finite weight".into()));
        }
        let r = gammas.len();
        if let Some(i) = (0..r / 2).find(|&i| (gammas[i] - gammas[r - 1 - i]).abs() > SYMMETRY_TOL) {
            return Err(Error::Weights(format!(
                "not symmetric: gamma_{} = {} but gamma_{} = {}",
                i + 1,
                gammas[i],
                r - i,
                gammas[r - 1 - i]
            )));
        }
        let sum: f64 = gammas.iter().sum();
        if (sum - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::Weights(format!("weights sum to {sum}, not 1")));
        }
        if order < base_order {
            return Err(Error::Weights(format!("order {order} below the base order {base_order}")));
        }
        Ok(CompositionWeights {
            gammas,
            base_order,
            order,
            family,
        })
    }

    /// `[1]`, the base method itself.
    pub fn identity(base_order: usize) -> Self {
        CompositionWeights {
            gammas: vec![1.0],
            base_order,
            order: base_order,
            family: Family::Custom,
        }
    }

    pub fn triple_jump(p: usize) -> Result<Self> {
        check_base_order(p)?;
        let c = 2f64.powf(1.0 / (p as f64 + 1.0));
        let g = 1.0 / (2.0 - c);
        Self::new(vec![g, -c * g, g], p, p + 2, Family::TripleJump)
    }

    pub fn suzuki(p: usize) -> Result<Self> {
        check_base_order(p)?;
        let c = 4f64.powf(1.0 / (p as f64 + 1.0));
        let g = 1.0 / (4.0 - c);
        Self::new(vec![g, g, -c * g, g, g], p, p + 2, Family::Suzuki)
    }

    /// Triple jumps nested from base order 2 up to `order`.
    pub fn recursive_triple_jump(order: usize) -> Result<Self> {
        Self::nested(order, Self::triple_jump)
    }

    pub fn recursive_suzuki(order: usize) -> Result<Self> {
        Self::nested(order, Self::suzuki)
    }

    fn nested(order: usize, level: fn(usize) -> Result<Self>) -> Result<Self> {
        if order < 4 || order % 2 == 1 {
            return Err(Error::Weights(format!("order {order} is not an even number >= 4")));
        }
        let mut w = level(2)?;
        for p in (4..order).step_by(2) {
            w = w.nest(&level(p)?);
        }
        Ok(w)
    }

    /// Weights of `outer` applied to the composition `self` as its base.
    pub fn nest(&self, outer: &CompositionWeights) -> Self {
        let gammas = outer
            .gammas
            .iter()
            .flat_map(|o| self.gammas.iter().map(move |g| o * g))
            .collect();
        let family = if self.family == outer.family { self.family } else { Family::Custom };
        CompositionWeights {
            gammas,
            base_order: self.base_order,
            order: outer.order,
            family,
        }
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn r(&self) -> usize {
        self.gammas.len()
    }

    pub fn base_order(&self) -> usize {
        self.base_order
    }

    /// Order of the composed method for a symmetric base of `base_order`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Start of every substep relative to the macro-step, then 1.
    pub fn substep_times(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.gammas.iter().scan(0.0, |s, g| {
                *s += g;
                Some(*s)
            }))
            .collect()
    }

    pub fn stays_in_window(&self) -> bool {
        self.substep_times().iter().all(|&t| (-1e-14..=1.0 + 1e-14).contains(&t))
    }

    /// Violation of the order conditions for the claimed order, for a
    /// symmetric base of order 2.
    pub fn order_residual(&self) -> f64 {
        if self.base_order == 2 {
            order_residual(&self.gammas, self.order)
        } else {
            let (a, b) = crate::conditions::composition_order_residual(&self.gammas, self.base_order as u32);
            a.abs().max(b.abs())
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "family={} base_order={} order={} r={}\n",
            self.family,
            self.base_order,
            self.order,
            self.r()
        );
        for g in &self.gammas {
            s += &format!("{g}\n");
        }
        s
    }

    /// Reads exactly one weight set.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut sets = parse_weights(text)?;
        match sets.len() {
            1 => Ok(sets.remove(0)),
            n => Err(Error::Weights(format!("expected one weight set, found {n}"))),
        }
    }
}

fn check_base_order(p: usize) -> Result<()> {
    if p < 2 || p % 2 == 1 {
        return Err(Error::Weights(format!("base order must be even and >= 2, got {p}")));
    }
    Ok(())
}

struct Header {
    family: Family,
    base_order: usize,
    order: usize,
    r: usize,
    line: usize,
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_header(text: &str, line: usize) -> Result<Header> {
    let (mut family, mut base_order, mut order, mut r) = (None, None, None, None);
    let mut offset = 0;
    for token in text.split_whitespace() {
        let column = text[offset..].find(token).map_or(1, |i| offset + i + 1);
        offset = column - 1 + token.len();
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| parse_error(line, column, format!("expected key=value, found '{token}'")))?;
        let number = || {
            value
                .parse::<usize>()
                .map_err(|_| parse_error(line, column + key.len() + 1, format!("'{value}' is not a count")))
        };
        match key {
            "family" => family = Some(value.parse().map_err(|e: Error| parse_error(line, column, e.to_string()))?),
            "base_order" => base_order = Some(number()?),
            "order" => order = Some(number()?),
            "r" => r = Some(number()?),
            _ => return Err(parse_error(line, column, format!("unknown key '{key}'"))),
        }
    }
    let missing = |k: &str| parse_error(line, 1, format!("header lacks '{k}'"));
    Ok(Header {
        family: family.ok_or_else(|| missing("family"))?,
        base_order: base_order.unwrap_or(2),
        order: order.ok_or_else(|| missing("order"))?,
        r: r.ok_or_else(|| missing("r"))?,
        line,
    })
}

/// Reads weight sets: a `key=value` header (`family`, `order`, `r`,
/// optional `base_order`) followed by `r` weights, one per line. `#`
/// starts a comment.
pub fn parse_weights(text: &str) -> Result<Vec<CompositionWeights>> {
    let mut sets = Vec::new();
    let mut current: Option<(Header, Vec<f64>)> = None;
    let finish = |h: Header, g: Vec<f64>, sets: &mut Vec<CompositionWeights>| -> Result<()> {
        if g.len() != h.r {
            return Err(parse_error(h.line, 1, format!("header announces r={} but {} weights follow", h.r, g.len())));
        }
        let w = CompositionWeights::new(g, h.base_order, h.order, h.family)
            .map_err(|e| parse_error(h.line, 1, e.to_string()))?;
        sets.push(w);
        Ok(())
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let column = body.find(trimmed).unwrap_or(0) + 1;
        if trimmed.contains('=') {
            if let Some((h, g)) = current.take() {
                finish(h, g, &mut sets)?;
            }
            current = Some((parse_header(body, line)?, Vec::new()));
            continue;
        }
        let (_, gammas) = current
            .as_mut()
            .ok_or_else(|| parse_error(line, column, "weight before any header"))?;
        let g = trimmed
            .parse::<f64>()
            .map_err(|_| parse_error(line, column, format!("'{trimmed}' is not a number")))?;
        gammas.push(g);
    }
    if let Some((h, g)) = current {
        finish(h, g, &mut sets)?;
    }
    Ok(sets)
}

/// The weight sets shipped with the crate.
pub fn bundled_weights() -> &'static [CompositionWeights] {
    static SETS: OnceLock<Vec<CompositionWeights>> = OnceLock::new();
    SETS.get_or_init(|| parse_weights(BUNDLED).expect("bundled weight file is valid"))
}

/// Tabulated sets for a base of order 2: the fewest substeps for `order`,
/// or with `stay_in_window` the fewest whose substep times stay in `[0, H]`.
pub fn advanced_composition(order: usize, stay_in_window: bool) -> Result<CompositionWeights> {
    let family = Family::AdvancedComposition {
        in_window: stay_in_window,
    };
    bundled_weights()
        .iter()
        .find(|w| w.family == family && w.order == order)
        .cloned()
        .ok_or_else(|| Error::Weights(format!("no {family} weights of order {order} (available: 4, 6, 8, 10)")))
}
