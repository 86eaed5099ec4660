//! LP-file text for the reformulated program, and a reader for it.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::surviv::Sense;

use super::{RefError, ReformulatedILP};

const TERMS_PER_LINE: usize = 8;

fn write_terms(out: &mut String, terms: &[(BigInt, &str)]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (i, (c, v)) in terms.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c.is_negative() { '-' } else { '+' };
        if i == 0 && sign == '+' {
            let _ = write!(out, " {c} {v}");
        } else {
            let _ = write!(out, " {sign} {} {v}", c.abs());
        }
    }
}

/// Objective scaled to integers by the least common denominator, which is
/// recorded in a comment line; rows whose rational form was scaled record
/// their factor the same way.
pub fn export_lp(ilp: &ReformulatedILP) -> String {
    let scale = ilp
        .objective
        .iter()
        .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let mut out = String::new();
    out.push_str("\\ reformulated design program\n");
    let _ = writeln!(out, "\\ objective scale {scale}");
    for r in ilp.rows.iter().filter(|r| r.scale != 1) {
        let _ = writeln!(out, "\\ row {} scale {}", r.name, r.scale);
    }
    out.push_str("Minimize\n obj:");
    let obj: Vec<(BigInt, &str)> = ilp
        .objective
        .iter()
        .zip(&ilp.columns)
        .map(|(w, c)| ((w * &scale).to_integer(), c.as_str()))
        .filter(|(w, _)| !w.is_zero())
        .collect();
    write_terms(&mut out, &obj);
    out.push_str("\nSubject To\n");
    for r in &ilp.rows {
        let _ = write!(out, " {}:", r.name);
        let terms: Vec<(BigInt, &str)> = r
            .coeffs
            .iter()
            .zip(&ilp.columns)
            .filter(|(a, _)| **a != 0)
            .map(|(&a, c)| (BigInt::from(a), c.as_str()))
            .collect();
        write_terms(&mut out, &terms);
        let op = match r.sense {
            Sense::Eq => "=",
            Sense::Le => "<=",
        };
        let _ = writeln!(out, " {op} {}", r.rhs);
    }
    out.push_str("Bounds\n");
    for c in &ilp.columns {
        let _ = writeln!(out, " {c} >= 0");
    }
    out.push_str("Generals\n");
    for chunk in ilp.columns.chunks(TERMS_PER_LINE) {
        let _ = writeln!(out, " {}", chunk.join(" "));
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpRowText {
    pub name: String,
    pub terms: Vec<(String, BigInt)>,
    pub sense: Sense,
    pub rhs: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpFile {
    pub objective_scale: BigInt,
    pub objective: Vec<(String, BigInt)>,
    pub rows: Vec<LpRowText>,
    pub row_scales: Vec<(String, i64)>,
    pub lower_bounds: Vec<(String, BigInt)>,
    pub generals: Vec<String>,
}

struct Tok<'a> {
    text: &'a str,
    line: usize,
}

fn err(line: usize, message: impl Into<String>) -> RefError {
    RefError::LpParse {
        line,
        message: message.into(),
    }
}

fn parse_int(t: &Tok<'_>) -> Result<BigInt, RefError> {
    t.text
        .parse()
        .map_err(|_| err(t.line, format!("expected an integer, found `{}`", t.text)))
}

/// Reads `coef var` terms joined by `+`/`-` until a token that is neither.
fn parse_terms(toks: &[Tok<'_>], pos: &mut usize) -> Result<Vec<(String, BigInt)>, RefError> {
    let mut terms = Vec::new();
    let mut first = true;
    loop {
        let Some(t) = toks.get(*pos) else {
            return Ok(terms);
        };
        let negative = match t.text {
            "+" => false,
            "-" => true,
            _ if first => false,
            _ => return Ok(terms),
        };
        if matches!(t.text, "+" | "-") {
            *pos += 1;
        }
        first = false;
        let c = toks.get(*pos).ok_or_else(|| err(t.line, "dangling sign"))?;
        let mut coef = parse_int(c)?;
        *pos += 1;
        if negative {
            coef = -coef;
        }
        match toks.get(*pos) {
            Some(v) if is_name(v.text) && !v.text.ends_with(':') => {
                terms.push((v.text.to_string(), coef));
                *pos += 1;
            }
            _ if coef.is_zero() && terms.is_empty() => return Ok(terms),
            _ => return Err(err(c.line, "coefficient without a variable")),
        }
    }
}

fn is_name(s: &str) -> bool {
    s.chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
}

pub fn parse_lp(text: &str) -> Result<LpFile, RefError> {
    let mut objective_scale = BigInt::one();
    let mut row_scales = Vec::new();
    let mut sections: Vec<(String, Vec<Tok<'_>>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if let Some(c) = raw.strip_prefix('\\') {
            let words: Vec<&str> = c.split_whitespace().collect();
            match words.as_slice() {
                ["objective", "scale", s] => {
                    objective_scale = s.parse().map_err(|_| err(line, "bad objective scale"))?
                }
                ["row", name, "scale", s] => row_scales.push((
                    name.to_string(),
                    s.parse().map_err(|_| err(line, "bad row scale"))?,
                )),
                _ => {}
            }
            continue;
        }
        let trimmed = raw.trim();
        if matches!(
            trimmed,
            "Minimize" | "Subject To" | "Bounds" | "Generals" | "End"
        ) {
            sections.push((trimmed.to_string(), Vec::new()));
            continue;
        }
        let Some((_, toks)) = sections.last_mut() else {
            if trimmed.is_empty() {
                continue;
            }
            return Err(err(line, "content before the first section"));
        };
        toks.extend(raw.split_whitespace().map(|text| Tok { text, line }));
    }
    let order: Vec<&str> = sections.iter().map(|(s, _)| s.as_str()).collect();
    if order != ["Minimize", "Subject To", "Bounds", "Generals", "End"] {
        return Err(err(
            text.lines().count(),
            format!("unexpected section layout {order:?}"),
        ));
    }
    let take_name = |toks: &[Tok<'_>], pos: &mut usize| -> Result<String, RefError> {
        let t = toks.get(*pos).ok_or_else(|| err(0, "missing row name"))?;
        let name = t
            .text
            .strip_suffix(':')
            .ok_or_else(|| err(t.line, format!("expected `name:`, found `{}`", t.text)))?;
        *pos += 1;
        Ok(name.to_string())
    };

    let obj_toks = &sections[0].1;
    let mut pos = 0;
    take_name(obj_toks, &mut pos)?;
    let objective = parse_terms(obj_toks, &mut pos)?;
    if pos != obj_toks.len() {
        return Err(err(obj_toks[pos].line, "trailing objective tokens"));
    }

    let row_toks = &sections[1].1;
    let mut rows = Vec::new();
    let mut pos = 0;
    while pos < row_toks.len() {
        let name = take_name(row_toks, &mut pos)?;
        let terms = parse_terms(row_toks, &mut pos)?;
        let op = row_toks
            .get(pos)
            .ok_or_else(|| err(0, "missing relation"))?;
        let sense = match op.text {
            "=" => Sense::Eq,
            "<=" => Sense::Le,
            other => return Err(err(op.line, format!("unsupported relation `{other}`"))),
        };
        pos += 1;
        let rhs = parse_int(
            row_toks
                .get(pos)
                .ok_or_else(|| err(op.line, "missing rhs"))?,
        )?;
        pos += 1;
        rows.push(LpRowText {
            name,
            terms,
            sense,
            rhs,
        });
    }

    let bound_toks = &sections[2].1;
    if !bound_toks.len().is_multiple_of(3) {
        return Err(err(
            bound_toks.last().map_or(0, |t| t.line),
            "malformed bound",
        ));
    }
    let mut lower_bounds = Vec::new();
    for b in bound_toks.chunks(3) {
        if b[1].text != ">=" {
            return Err(err(b[1].line, "only lower bounds are written"));
        }
        lower_bounds.push((b[0].text.to_string(), parse_int(&b[2])?));
    }
    let generals = sections[3].1.iter().map(|t| t.text.to_string()).collect();
    Ok(LpFile {
        objective_scale,
        objective,
        rows,
        row_scales,
        lower_bounds,
        generals,
    })
}
