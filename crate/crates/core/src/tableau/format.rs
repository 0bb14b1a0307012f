//! Plain-text tableau files.
//!
//! ```text
//! M = 2
//! [bar.ss]
//! 0 0
//! 0.5 0.5
//! [bar.b.s]
//! 0.5 0.5
//! [bar.ff lambda=1]
//! ...
//! ```
//!
//! Blocks are `ss`, `b.s`, and per micro-step `ff`, `b.f`, `sf`, `fs`, each
//! prefixed by `bar.` or `tilde.`. A file without any `tilde.` block
//! describes a tableau with equal halves. `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Half, Matrix, MgarkTableau, PartitionedMgarkTableau, RkTableau, Vector};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Ss,
    BS,
    Ff,
    BF,
    Sf,
    Fs,
}

impl Kind {
    fn parse(s: &str) -> Option<Kind> {
        Some(match s {
            "ss" => Kind::Ss,
            "b.s" => Kind::BS,
            "ff" => Kind::Ff,
            "b.f" => Kind::BF,
            "sf" => Kind::Sf,
            "fs" => Kind::Fs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Kind::Ss => "ss",
            Kind::BS => "b.s",
            Kind::Ff => "ff",
            Kind::BF => "b.f",
            Kind::Sf => "sf",
            Kind::Fs => "fs",
        }
    }

    fn per_micro_step(self) -> bool {
        matches!(self, Kind::Ff | Kind::BF | Kind::Sf | Kind::Fs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    half: HalfKey,
    kind: Kind,
    lambda: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum HalfKey {
    Bar,
    Tilde,
}

impl Key {
    fn label(&self) -> String {
        let half = match self.half {
            HalfKey::Bar => "bar",
            HalfKey::Tilde => "tilde",
        };
        if self.kind.per_micro_step() {
            format!("{half}.{} lambda={}", self.kind.name(), self.lambda)
        } else {
            format!("{half}.{}", self.kind.name())
        }
    }
}

struct Block {
    line: usize,
    rows: Vec<Vec<f64>>,
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_header(text: &str, line: usize, column: usize) -> Result<Key> {
    let inner = text
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| parse_error(line, column, "unterminated block header"))?;
    let mut parts = inner.split_whitespace();
    let name = parts
        .next()
        .ok_or_else(|| parse_error(line, column, "empty block header"))?;
    let (half, kind) = name
        .split_once('.')
        .ok_or_else(|| parse_error(line, column, format!("unknown block '{name}'")))?;
    let half = match half {
        "bar" => HalfKey::Bar,
        "tilde" => HalfKey::Tilde,
        _ => return Err(parse_error(line, column, format!("unknown half '{half}'"))),
    };
    let kind = Kind::parse(kind)
        .ok_or_else(|| parse_error(line, column, format!("unknown block kind '{kind}'")))?;
    let lambda = match parts.next() {
        Some(arg) => {
            let value = arg
                .strip_prefix("lambda=")
                .ok_or_else(|| parse_error(line, column, format!("expected lambda=k, found '{arg}'")))?;
            let k: usize = value
                .parse()
                .map_err(|_| parse_error(line, column, format!("invalid micro-step index '{value}'")))?;
            if k == 0 {
                return Err(parse_error(line, column, "micro-step indices start at 1"));
            }
            k
        }
        None => 0,
    };
    if parts.next().is_some() {
        return Err(parse_error(line, column, "trailing text in block header"));
    }
    if kind.per_micro_step() != (lambda > 0) {
        return Err(parse_error(
            line,
            column,
            format!("block '{name}' {} a lambda index", if lambda > 0 { "does not take" } else { "needs" }),
        ));
    }
    Ok(Key { half, kind, lambda })
}

/// Parse a tableau file.
pub fn parse_tableau(text: &str) -> Result<PartitionedMgarkTableau> {
    let mut m: Option<usize> = None;
    let mut blocks: BTreeMap<Key, Block> = BTreeMap::new();
    let mut current: Option<Key> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let column = content.len() - content.trim_start().len() + 1;
        if trimmed.starts_with('[') {
            let key = parse_header(trimmed, line, column)?;
            if blocks.contains_key(&key) {
                return Err(parse_error(line, column, format!("duplicate block [{}]", key.label())));
            }
            blocks.insert(key, Block { line, rows: Vec::new() });
            current = Some(key);
            continue;
        }
        if let Some((lhs, rhs)) = trimmed.split_once('=') {
            if lhs.trim() != "M" {
                return Err(parse_error(line, column, format!("unknown setting '{}'", lhs.trim())));
            }
            let value: usize = rhs.trim().parse().map_err(|_| {
                let col = column + trimmed.find('=').unwrap_or(0) + 1;
                parse_error(line, col, format!("invalid multirate factor '{}'", rhs.trim()))
            })?;
            if value == 0 {
                return Err(parse_error(line, column, "M must be at least 1"));
            }
            m = Some(value);
            current = None;
            continue;
        }
        let key = current.ok_or_else(|| parse_error(line, column, "numbers outside of a block"))?;
        let mut row = Vec::new();
        let mut offset = 0;
        for token in content.split_whitespace() {
            let pos = content[offset..].find(token).map_or(offset, |p| p + offset);
            offset = pos + token.len();
            let v: f64 = token
                .parse()
                .map_err(|_| parse_error(line, pos + 1, format!("invalid number '{token}'")))?;
            if !v.is_finite() {
                return Err(parse_error(line, pos + 1, format!("non-finite coefficient '{token}'")));
            }
            row.push(v);
        }
        let block = blocks.get_mut(&key).expect("current block exists");
        if let Some(first) = block.rows.first() {
            let weights = matches!(key.kind, Kind::BS | Kind::BF);
            if !weights && first.len() != row.len() {
                return Err(parse_error(
                    line,
                    column,
                    format!("row has {} entries, expected {}", row.len(), first.len()),
                ));
            }
        }
        block.rows.push(row);
    }

    let m = m.ok_or_else(|| Error::tableau("missing 'M = k' line"))?;
    if let Some((key, block)) = blocks.iter().find(|(k, _)| k.lambda > m) {
        return Err(parse_error(
            block.line,
            1,
            format!("[{}] exceeds M = {m}", key.label()),
        ));
    }
    let has_tilde = blocks.keys().any(|k| k.half == HalfKey::Tilde);
    let bar = assemble(&blocks, HalfKey::Bar, m)?;
    let tilde = if has_tilde {
        assemble(&blocks, HalfKey::Tilde, m)?
    } else {
        bar.clone()
    };
    PartitionedMgarkTableau::new(bar, tilde)
}

fn assemble(blocks: &BTreeMap<Key, Block>, half: HalfKey, m: usize) -> Result<MgarkTableau> {
    let get = |kind: Kind, lambda: usize| -> Result<&Block> {
        let key = Key { half, kind, lambda };
        blocks
            .get(&key)
            .ok_or_else(|| Error::tableau(format!("missing block [{}]", key.label())))
    };
    let matrix = |kind: Kind, lambda: usize| -> Result<Matrix> {
        let block = get(kind, lambda)?;
        let rows = &block.rows;
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.is_empty() || cols == 0 {
            return Err(parse_error(block.line, 1, "empty block"));
        }
        Ok(Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
    };
    let weights = |kind: Kind, lambda: usize| -> Result<Vector> {
        let block = get(kind, lambda)?;
        let values: Vec<f64> = block.rows.iter().flatten().copied().collect();
        if values.is_empty() {
            return Err(parse_error(block.line, 1, "empty weight block"));
        }
        Ok(Vector::from_vec(values))
    };

    let slow = RkTableau::new(matrix(Kind::Ss, 0)?, weights(Kind::BS, 0)?)?;
    let mut fast = Vec::with_capacity(m);
    let mut sf = Vec::with_capacity(m);
    let mut fs = Vec::with_capacity(m);
    for l in 1..=m {
        fast.push(RkTableau::new(matrix(Kind::Ff, l)?, weights(Kind::BF, l)?)?);
        sf.push(matrix(Kind::Sf, l)?);
        fs.push(matrix(Kind::Fs, l)?);
    }
    MgarkTableau::new(slow, fast, sf, fs)
}

fn write_matrix(out: &mut String, header: &str, m: &Matrix) {
    let _ = writeln!(out, "[{header}]");
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|x| format!("{:.16e}", x + 0.0)).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

fn write_weights(out: &mut String, header: &str, b: &Vector) {
    let _ = writeln!(out, "[{header}]");
    let row: Vec<String> = b.iter().map(|x| format!("{:.16e}", x + 0.0)).collect();
    let _ = writeln!(out, "{}", row.join(" "));
}

/// Serialize with 17 significant digits per coefficient.
pub fn write_tableau(t: &PartitionedMgarkTableau) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "M = {}", t.m());
    for half in [Half::Bar, Half::Tilde] {
        let x = t.half(half);
        let h = half.name();
        out.push('\n');
        write_matrix(&mut out, &format!("{h}.ss"), &x.slow.a);
        write_weights(&mut out, &format!("{h}.b.s"), &x.slow.b);
        for l in 0..x.m() {
            let k = l + 1;
            write_matrix(&mut out, &format!("{h}.ff lambda={k}"), &x.fast[l].a);
            write_weights(&mut out, &format!("{h}.b.f lambda={k}"), &x.fast[l].b);
            write_matrix(&mut out, &format!("{h}.sf lambda={k}"), &x.sf[l]);
            write_matrix(&mut out, &format!("{h}.fs lambda={k}"), &x.fs[l]);
        }
    }
    out
}
