//! Parsers for form literals and series literals.

use std::str::FromStr;

use num::BigRational;

use abhyankar::expr::parse_to_rf;
use abhyankar::form::TopForm;
use abhyankar::group::{GroupElement, OrderedGroupSpec};
use abhyankar::poly::VariableContext;
use abhyankar::series::GenSeries;

/// Parses a form literal `COEFF d(EXPR) ^ d(EXPR) ^ ...`, where the
/// coefficient expression is optional and defaults to `1`.
///
/// The marker `d(` is recognized at the top parenthesis level, so a
/// coefficient like `(1/t)` may freely contain parentheses; `d` is reserved
/// in form literals and cannot be used as a variable name there.
pub fn parse_form(text: &str, ctx: &VariableContext) -> Result<TopForm, String> {
    let bytes: Vec<char> = text.chars().collect();
    let mut depth = 0i32;
    let mut split_at = None;
    for i in 0..bytes.len() {
        match bytes[i] {
            '(' => depth += 1,
            ')' => depth -= 1,
            'd' if depth == 0 => {
                let prev_ok = i == 0
                    || !(bytes[i - 1].is_ascii_alphanumeric() || bytes[i - 1] == '_');
                let next_ok = bytes[i + 1..]
                    .iter()
                    .find(|c| !c.is_whitespace())
                    .map_or(false, |&c| c == '(');
                if prev_ok && next_ok {
                    split_at = Some(i);
                    break;
                }
            }
            _ => {}
        }
    }
    let split_at = split_at.ok_or("form literal needs at least one d(..) factor")?;
    let coeff_text = text[..char_byte_index(text, split_at)].trim();
    let coefficient = if coeff_text.is_empty() {
        parse_to_rf("1", ctx).expect("constant")
    } else {
        parse_to_rf(coeff_text, ctx).map_err(|e| format!("form coefficient: {e}"))?
    };
    let mut basis = Vec::new();
    for (i, factor) in text[char_byte_index(text, split_at)..]
        .split('^')
        .enumerate()
    {
        let factor = factor.trim();
        let inner = factor
            .strip_prefix('d')
            .map(str::trim_start)
            .and_then(|f| f.strip_prefix('('))
            .and_then(|f| f.strip_suffix(')'))
            .ok_or_else(|| format!("factor {} is not of the form d(EXPR): {factor:?}", i + 1))?;
        basis.push(parse_to_rf(inner, ctx).map_err(|e| format!("form basis: {e}"))?);
    }
    TopForm::new(coefficient, basis).map_err(|e| format!("form: {e}"))
}

fn char_byte_index(text: &str, char_index: usize) -> usize {
    text.char_indices()
        .nth(char_index)
        .map(|(b, _)| b)
        .unwrap_or(text.len())
}

/// Parses a series literal `[(0,0): 1, (1,0): -1]`.
pub fn parse_series(text: &str) -> Result<GenSeries, String> {
    let inner = text
        .trim()
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| format!("series literal must be [..], got {text:?}"))?;
    let mut entries = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    for c in inner.chars() {
        match c {
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' => {
                depth -= 1;
                current.push(c);
            }
            ',' if depth == 0 => {
                entries.push(std::mem::take(&mut current));
            }
            _ => current.push(c),
        }
    }
    if !current.trim().is_empty() {
        entries.push(current);
    }
    let mut terms: Vec<(GroupElement, BigRational)> = Vec::new();
    let mut dimension = None;
    for entry in entries.iter().map(|e| e.trim()).filter(|e| !e.is_empty()) {
        let close = entry
            .rfind(')')
            .ok_or_else(|| format!("series entry needs a (..) exponent tuple: {entry:?}"))?;
        let exponent: GroupElement = entry[..=close]
            .parse()
            .map_err(|e| format!("series exponent: {e}"))?;
        let rest = entry[close + 1..].trim();
        let coeff_text = rest
            .strip_prefix(':')
            .ok_or_else(|| format!("series entry needs `tuple: coeff`: {entry:?}"))?
            .trim();
        let coeff = BigRational::from_str(coeff_text)
            .map_err(|e| format!("series coefficient {coeff_text:?}: {e}"))?;
        match dimension {
            None => dimension = Some(exponent.dimension()),
            Some(d) if d == exponent.dimension() => {}
            Some(d) => {
                return Err(format!(
                    "mixed exponent dimensions {d} and {} in series literal",
                    exponent.dimension()
                ))
            }
        }
        terms.push((exponent, coeff));
    }
    let dimension =
        dimension.ok_or("empty series literal: no dimension can be inferred")?;
    GenSeries::from_terms(OrderedGroupSpec::new(dimension), terms)
        .map_err(|e| format!("series: {e}"))
}
