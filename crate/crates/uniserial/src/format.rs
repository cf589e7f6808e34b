//! Text formats: presentations (`.alg`), points, grids, multilinear
//! polynomial lists and exponent matrices.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;
use uniserial_core::generators::{ExponentMatrix, GeneratorError, MultilinearSystem};
use uniserial_core::poly::{parse_scalar, Point};
use uniserial_core::presentation::PresentationError;
use uniserial_core::{ArrowId, Path, Presentation, Quiver, Scalar, VarKey};

/// A syntax or validation error at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

fn err<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, column, message: message.into() })
}

/// Whitespace-separated tokens with their 1-based character columns.
fn tokens(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (byte, ch)) in text.char_indices().enumerate() {
        if ch.is_whitespace() {
            if let Some((c, b)) = start.take() {
                out.push((c, &text[b..byte]));
            }
        } else if start.is_none() {
            start = Some((col + 1, byte));
        }
    }
    if let Some((c, b)) = start {
        out.push((c, &text[b..]));
    }
    out
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && !name.contains([':', '*', '#']) && name != "+" && name != "-" && !name.starts_with('-')
}

/// Column just past the directive keyword, for errors on its arguments.
fn rest_column(line: &str, rest: &str) -> usize {
    line[..line.len() - rest.len()].chars().count() + 1
}

struct ArrowDecl {
    line: usize,
    name: String,
    source: String,
    target: String,
}

/// Parses the line-oriented presentation grammar.
pub fn parse_presentation(text: &str) -> Result<Presentation, ParseError> {
    let mut vertices: Option<(usize, Vec<String>)> = None;
    let mut arrows: Vec<ArrowDecl> = Vec::new();
    let mut loewy: Option<usize> = None;
    let mut relation_lines: Vec<(usize, &str)> = Vec::new();
    let mut in_relations = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        if in_relations {
            relation_lines.push((lineno, line));
            continue;
        }
        let trimmed = line.trim_start();
        let indent = line.len() - trimmed.len() + 1;
        if let Some(rest) = trimmed.strip_prefix("vertices:") {
            if vertices.is_some() {
                return err(lineno, indent, "duplicate `vertices:` directive");
            }
            let mut names = Vec::new();
            for (col, t) in tokens(rest) {
                if !valid_name(t) {
                    return err(lineno, rest_column(line, rest) + col - 1, format!("invalid vertex name `{}`", t));
                }
                names.push(t.to_string());
            }
            if names.is_empty() {
                return err(lineno, rest_column(line, rest), "`vertices:` needs at least one name");
            }
            vertices = Some((lineno, names));
        } else if let Some(rest) = trimmed.strip_prefix("arrow ") {
            let Some((name, ends)) = rest.split_once(':') else {
                return err(lineno, rest_column(line, rest), "expected `arrow <name>: <source> -> <target>`");
            };
            let name = name.trim();
            if !valid_name(name) || name.contains(char::is_whitespace) {
                return err(lineno, rest_column(line, rest), format!("invalid arrow name `{}`", name));
            }
            let base = rest_column(line, ends);
            let toks = tokens(ends);
            match toks.as_slice() {
                [(_, s), (_, "->"), (_, t)] => arrows.push(ArrowDecl {
                    line: lineno,
                    name: name.into(),
                    source: s.to_string(),
                    target: t.to_string(),
                }),
                [] => return err(lineno, base, "missing `<source> -> <target>`"),
                _ => {
                    let col = toks.iter().find(|(_, t)| *t != "->").map_or(toks[0].0, |(c, _)| *c);
                    return err(lineno, base + col - 1, "expected `<source> -> <target>`");
                }
            }
        } else if let Some(rest) = trimmed.strip_prefix("loewy:") {
            if loewy.is_some() {
                return err(lineno, indent, "duplicate `loewy:` directive");
            }
            let col = rest_column(line, rest);
            match tokens(rest).as_slice() {
                [(c, t)] => match t.parse::<usize>() {
                    Ok(l) => loewy = Some(l),
                    Err(_) => return err(lineno, col + c - 1, format!("invalid loewy bound `{}`", t)),
                },
                _ => return err(lineno, col, "expected a single integer after `loewy:`"),
            }
        } else if let Some(rest) = trimmed.strip_prefix("relations:") {
            in_relations = true;
            if !rest.trim().is_empty() {
                relation_lines.push((lineno, rest));
            }
        } else {
            return err(lineno, indent, format!("unrecognised line `{}`", trimmed.trim_end()));
        }
    }

    let Some((vline, names)) = vertices else {
        return err(1, 1, "missing `vertices:` directive");
    };
    for a in &arrows {
        for end in [&a.source, &a.target] {
            if !names.contains(end) {
                return err(a.line, 1, format!("arrow `{}` uses undeclared vertex `{}`", a.name, end));
            }
        }
    }
    let decls = arrows.iter().map(|a| (a.name.clone(), a.source.clone(), a.target.clone()));
    let quiver = Quiver::new(names, decls).map_err(|e| {
        let line = match &e {
            uniserial_core::quiver::QuiverError::DuplicateArrow(n) => {
                arrows.iter().filter(|a| &a.name == n).nth(1).map_or(vline, |a| a.line)
            }
            _ => vline,
        };
        ParseError { line, column: 1, message: e.to_string() }
    })?;

    let mut raw = Vec::new();
    for &(lineno, line) in &relation_lines {
        raw.push(parse_relation(&quiver, line, lineno)?);
    }
    Presentation::new(quiver, raw, loewy).map_err(|e| {
        let line = match &e {
            PresentationError::NotParallel { relation, .. } | PresentationError::ShortTerm { relation, .. } => {
                relation_lines[relation - 1].0
            }
            PresentationError::EmptyRelation(r) => relation_lines[r - 1].0,
            _ => relation_lines.first().map_or(vline, |r| r.0),
        };
        ParseError { line, column: 1, message: e.to_string() }
    })
}

/// One relation line: `[-]c*p [+|- c*p ...]` with `p` in composition order.
fn parse_relation(q: &Quiver, line: &str, lineno: usize) -> Result<Vec<(Scalar, Path)>, ParseError> {
    let toks = tokens(line);
    let mut terms = Vec::new();
    let mut i = 0;
    let mut first = true;
    while i < toks.len() {
        let mut negative = false;
        if !first {
            match toks[i].1 {
                "+" => {}
                "-" => negative = true,
                t => return err(lineno, toks[i].0, format!("expected `+` or `-`, found `{}`", t)),
            }
            i += 1;
            if i == toks.len() {
                return err(lineno, toks[i - 1].0, "dangling sign at end of relation");
            }
        }
        first = false;
        let start = toks[i].0;
        let mut head = toks[i].1;
        if let Some(rest) = head.strip_prefix('-') {
            negative = !negative;
            head = rest;
        } else if let Some(rest) = head.strip_prefix('+') {
            head = rest;
        }
        let mut coeff = Scalar::from_integer(1.into());
        let mut names: Vec<(usize, &str)> = Vec::new();
        if let Some((c, rest)) = head.split_once('*') {
            coeff = parse_scalar(c).ok_or_else(|| ParseError {
                line: lineno,
                column: start,
                message: format!("invalid coefficient `{}`", c),
            })?;
            if !rest.is_empty() {
                names.push((start + head.len() - rest.len(), rest));
            }
        } else if !head.is_empty() {
            names.push((start + toks[i].1.len() - head.len(), head));
        }
        i += 1;
        while i < toks.len() && toks[i].1 != "+" && toks[i].1 != "-" {
            names.push(toks[i]);
            i += 1;
        }
        if names.is_empty() {
            return err(lineno, start, "term has no path");
        }
        let mut ids: Vec<ArrowId> = Vec::with_capacity(names.len());
        for &(col, n) in names.iter().rev() {
            match q.arrow_id(n) {
                Some(a) => ids.push(a),
                None => return err(lineno, col, format!("unknown arrow `{}`", n)),
            }
        }
        let path = q.path(&ids).map_err(|e| ParseError { line: lineno, column: start, message: e.to_string() })?;
        if negative {
            coeff = -coeff;
        }
        terms.push((coeff, path));
    }
    if terms.is_empty() {
        return err(lineno, 1, "empty relation");
    }
    Ok(terms)
}

/// Renders a presentation in the grammar accepted by [`parse_presentation`].
pub fn serialize_presentation(p: &Presentation) -> String {
    let q = p.quiver();
    let mut out = String::from("vertices:");
    for v in q.vertex_ids() {
        out.push(' ');
        out.push_str(q.vertex_name(v));
    }
    out.push('\n');
    for a in q.arrow_ids() {
        let arrow = q.arrow(a);
        out += &format!("arrow {}: {} -> {}\n", arrow.name, q.vertex_name(arrow.source), q.vertex_name(arrow.target));
    }
    out += &format!("loewy: {}\n", p.loewy());
    out += "relations:\n";
    for r in p.relations() {
        out += &r.render(q);
        out.push('\n');
    }
    out
}

/// Errors in command-line values and auxiliary input files.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InputError {
    #[error("invalid rational `{0}`")]
    Rational(String),
    #[error("point has {found} coordinates, the mast has {expected} variables")]
    Arity { expected: usize, found: usize },
    #[error("invalid grid `{0}`, expected `lo..hi`")]
    Grid(String),
    #[error("{0}")]
    Syntax(ParseError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
}

/// Comma-separated rationals, assigned to `vars` in order.
pub fn parse_point(text: &str, vars: &[VarKey]) -> Result<Point, InputError> {
    let parts: Vec<&str> = if text.trim().is_empty() { Vec::new() } else { text.split(',').map(str::trim).collect() };
    if parts.len() != vars.len() {
        return Err(InputError::Arity { expected: vars.len(), found: parts.len() });
    }
    let mut pt = BTreeMap::new();
    for (v, s) in vars.iter().zip(parts) {
        pt.insert(*v, parse_scalar(s).ok_or_else(|| InputError::Rational(s.to_string()))?);
    }
    Ok(pt)
}

/// Semicolon-separated points.
pub fn parse_points(text: &str, vars: &[VarKey]) -> Result<Vec<Point>, InputError> {
    text.split(';').map(|s| parse_point(s, vars)).collect()
}

/// `lo..hi`, inclusive.
pub fn parse_grid(text: &str) -> Result<(i64, i64), InputError> {
    let bad = || InputError::Grid(text.to_string());
    let (lo, hi) = text.trim().split_once("..").ok_or_else(bad)?;
    let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// One polynomial per line in `X1..Xm`, e.g. `X1*X2 - 1`. `m` is the
/// largest index used.
pub fn parse_multilinear(text: &str) -> Result<MultilinearSystem, InputError> {
    let mut polys = Vec::new();
    let mut m = 0;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let terms = parse_poly_line(line, lineno).map_err(InputError::Syntax)?;
        for (set, _) in &terms {
            m = m.max(set.iter().copied().max().unwrap_or(0));
        }
        polys.push(terms);
    }
    Ok(MultilinearSystem::new(m, polys)?)
}

/// Terms separated by `+`/`-`; each term is `*`-separated factors, every
/// factor a rational or a variable `X<j>`.
fn parse_poly_line(line: &str, lineno: usize) -> Result<Vec<(Vec<usize>, Scalar)>, ParseError> {
    let mut spaced = String::new();
    for ch in line.chars() {
        let prev = spaced.trim_end().chars().last();
        if matches!(ch, '+' | '-') && prev.is_some_and(|p| p != '*') {
            spaced.push(' ');
            spaced.push(ch);
            spaced.push(' ');
        } else {
            spaced.push(ch);
        }
    }
    let flat: Vec<&str> = spaced.split_whitespace().collect();
    let mut terms = Vec::new();
    let mut sign = 1;
    let mut expect_term = true;
    for tok in flat {
        if !expect_term {
            match tok {
                "+" => sign = 1,
                "-" => sign = -1,
                t => return err(lineno, column_of(line, t), format!("expected `+` or `-`, found `{}`", t)),
            }
            expect_term = true;
            continue;
        }
        let mut coeff = Scalar::from_integer(sign.into());
        let mut set = Vec::new();
        for factor in tok.split('*') {
            let (f, negate) = match factor.strip_prefix('-') {
                Some(rest) => (rest, true),
                None => (factor.strip_prefix('+').unwrap_or(factor), false),
            };
            if negate {
                coeff = -coeff;
            }
            if let Some(j) = f.strip_prefix('X') {
                if j.contains('^') {
                    return err(lineno, column_of(line, factor), "powers are not allowed in a multilinear system");
                }
                match j.parse::<usize>() {
                    Ok(j) if j >= 1 => set.push(j),
                    _ => return err(lineno, column_of(line, factor), format!("invalid variable `{}`", f)),
                }
            } else {
                match parse_scalar(f) {
                    Some(c) => coeff *= c,
                    None => return err(lineno, column_of(line, factor), format!("invalid factor `{}`", f)),
                }
            }
        }
        terms.push((set, coeff));
        expect_term = false;
    }
    if expect_term {
        return err(lineno, line.trim_end().chars().count(), "polynomial ends with a sign");
    }
    Ok(terms)
}

fn column_of(line: &str, needle: &str) -> usize {
    line.find(needle).map_or(1, |b| line[..b].chars().count() + 1)
}

/// Whitespace-separated integer rows.
pub fn parse_exponent_matrix(text: &str) -> Result<ExponentMatrix, InputError> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        let mut row = Vec::new();
        for (col, t) in tokens(line) {
            row.push(t.parse::<u32>().map_err(|_| {
                InputError::Syntax(ParseError {
                    line: idx + 1,
                    column: col,
                    message: format!("invalid matrix entry `{}`", t),
                })
            })?);
        }
        if !row.is_empty() {
            rows.push(row);
        }
    }
    Ok(ExponentMatrix::new(rows)?)
}
