//! Parsers for the valuation spec and pair spec file formats.
//!
//! Both formats are line-oriented `key: value` documents.  The valuation
//! format accepts exactly the fields `variables`, `weights`, `basis`,
//! `residue` and `compose`; the pair format exactly `variables` and
//! `boundary`.  Unknown fields are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num::BigRational;

use abhyankar::expr::parse_to_rf;
use abhyankar::group::GroupElement;
use abhyankar::logpair::{Divisor, LogPair};
use abhyankar::poly::VariableContext;
use abhyankar::valuation::{QuasiMonomialSpec, ValuationSpec};

use crate::place::AnyPlace;

pub type SpecResult<T> = Result<T, String>;

/// Splits a document into `(key, value)` pairs, one per nonempty line.
fn fields(text: &str, allowed: &[&str]) -> SpecResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| format!("line {}: expected `key: value`", lineno + 1))?;
        let key = key.trim();
        if !allowed.contains(&key) {
            return Err(format!(
                "line {}: unknown field {key:?} (allowed: {})",
                lineno + 1,
                allowed.join(", ")
            ));
        }
        if out.iter().any(|(k, _)| k == key) {
            return Err(format!("line {}: duplicate field {key:?}", lineno + 1));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Parses `[a, b, c]` into trimmed items; empty list gives an empty vec.
fn parse_list(value: &str) -> SpecResult<Vec<String>> {
    let inner = value
        .strip_prefix('[')
        .and_then(|v| v.strip_suffix(']'))
        .ok_or_else(|| format!("expected a [..] list, got {value:?}"))?;
    Ok(split_top_level(inner)
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect())
}

/// Splits on commas that are not nested inside brackets, braces or quotes.
fn split_top_level(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut quoted = false;
    let mut current = String::new();
    for c in text.chars() {
        match c {
            '"' => {
                quoted = !quoted;
                current.push(c);
            }
            '[' | '{' | '(' if !quoted => {
                depth += 1;
                current.push(c);
            }
            ']' | '}' | ')' if !quoted => {
                depth -= 1;
                current.push(c);
            }
            ',' if depth == 0 && !quoted => {
                out.push(current.trim().to_string());
                current.clear();
            }
            _ => current.push(c),
        }
    }
    if !current.trim().is_empty() {
        out.push(current.trim().to_string());
    }
    out
}

fn parse_rational(text: &str) -> SpecResult<BigRational> {
    BigRational::from_str(text.trim()).map_err(|e| format!("bad rational {text:?}: {e}"))
}

fn parse_weight(value: &str) -> SpecResult<GroupElement> {
    let items = parse_list(value)?;
    if items.is_empty() {
        return Err("a weight needs at least one coordinate".to_string());
    }
    let coords = items
        .iter()
        .map(|s| parse_rational(s))
        .collect::<SpecResult<Vec<_>>>()?;
    Ok(GroupElement::new(coords))
}

/// Parses `{x: [1, 0], y: [0, 1]}`.
fn parse_weight_map(value: &str) -> SpecResult<BTreeMap<String, GroupElement>> {
    let inner = value
        .strip_prefix('{')
        .and_then(|v| v.strip_suffix('}'))
        .ok_or_else(|| format!("expected a {{..}} map, got {value:?}"))?;
    let mut out = BTreeMap::new();
    for entry in split_top_level(inner) {
        if entry.is_empty() {
            continue;
        }
        let (name, weight) = entry
            .split_once(':')
            .ok_or_else(|| format!("expected `var: [..]` in weights, got {entry:?}"))?;
        out.insert(name.trim().to_string(), parse_weight(weight.trim())?);
    }
    Ok(out)
}

/// Loads a valuation spec file: an adapted spec (with `basis`/`residue`), a
/// quasi-monomial handle (weights only), or a composition of two referenced
/// files.
pub fn load_valuation(path: &Path) -> SpecResult<AnyPlace> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let fields = fields(&text, &["variables", "weights", "basis", "residue", "compose"])?;
    let get = |key: &str| fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());

    if let Some(compose) = get("compose") {
        if fields.len() != 1 {
            return Err("`compose` specs must not carry other fields".to_string());
        }
        let refs = parse_list(compose)?;
        if refs.len() != 2 {
            return Err(format!(
                "`compose` takes [outer-ref, inner-ref], got {} entries",
                refs.len()
            ));
        }
        let dir = path.parent().map(PathBuf::from).unwrap_or_default();
        let outer = load_adapted(&dir.join(&refs[0]))?;
        let inner = load_adapted(&dir.join(&refs[1]))?;
        let composed = ValuationSpec::compose(&outer, &inner)
            .map_err(|e| format!("valuation: {e}"))?;
        return Ok(AnyPlace::Adapted(composed));
    }

    let variables =
        parse_list(get("variables").ok_or("missing field `variables`")?)?;
    if variables.is_empty() {
        return Err("`variables` must not be empty".to_string());
    }
    let ctx = build_context(&variables)?;
    let weights = parse_weight_map(get("weights").ok_or("missing field `weights`")?)?;
    for name in weights.keys() {
        if ctx.index_of(name).is_none() {
            return Err(format!("weight given for undeclared variable {name:?}"));
        }
    }
    match (get("basis"), get("residue")) {
        (Some(basis), Some(residue)) => {
            let spec = ValuationSpec::with_partition(
                ctx,
                weights,
                parse_list(basis)?,
                parse_list(residue)?,
            )
            .map_err(|e| format!("valuation: {e}"))?;
            Ok(AnyPlace::Adapted(spec))
        }
        (None, None) => {
            let spec =
                QuasiMonomialSpec::new(ctx, weights).map_err(|e| format!("valuation: {e}"))?;
            Ok(AnyPlace::Quasi(spec))
        }
        _ => Err("`basis` and `residue` must be given together or not at all".to_string()),
    }
}

fn load_adapted(path: &Path) -> SpecResult<ValuationSpec> {
    match load_valuation(path)? {
        AnyPlace::Adapted(spec) => Ok(spec),
        AnyPlace::Quasi(_) => Err(format!(
            "{}: composition factors must be adapted specs with basis/residue",
            path.display()
        )),
    }
}

fn build_context(names: &[String]) -> SpecResult<VariableContext> {
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(format!("duplicate variable {n:?}"));
        }
        if !n
            .chars()
            .next()
            .map(|c| c.is_ascii_alphabetic())
            .unwrap_or(false)
            || !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            return Err(format!("invalid variable name {n:?}"));
        }
    }
    Ok(VariableContext::new(names.to_vec()))
}

/// Strips optional surrounding double quotes.
fn unquote(text: &str) -> &str {
    text.strip_prefix('"')
        .and_then(|t| t.strip_suffix('"'))
        .unwrap_or(text)
}

/// Loads a pair spec file: `variables` plus a `boundary` list of
/// `{coeff: "p/q", function: "expr"}` records.
pub fn load_pair(path: &Path) -> SpecResult<LogPair> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let fields = fields(&text, &["variables", "boundary"])?;
    let get = |key: &str| fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    let variables =
        parse_list(get("variables").ok_or("missing field `variables`")?)?;
    let ctx = build_context(&variables)?;
    let boundary_text = get("boundary").ok_or("missing field `boundary`")?;
    let entries = parse_list(boundary_text)?;
    let mut components = Vec::new();
    for entry in entries {
        let inner = entry
            .strip_prefix('{')
            .and_then(|v| v.strip_suffix('}'))
            .ok_or_else(|| format!("boundary entries are {{..}} records, got {entry:?}"))?;
        let mut coeff = None;
        let mut function = None;
        for field in split_top_level(inner) {
            let (key, value) = field
                .split_once(':')
                .ok_or_else(|| format!("expected `key: value` in boundary record {entry:?}"))?;
            match key.trim() {
                "coeff" => coeff = Some(parse_rational(unquote(value.trim()))?),
                "function" => {
                    let rf = parse_to_rf(unquote(value.trim()), &ctx)
                        .map_err(|e| format!("boundary function: {e}"))?;
                    function = Some(rf);
                }
                other => return Err(format!("unknown boundary field {other:?}")),
            }
        }
        components.push((
            coeff.ok_or("boundary record missing `coeff`")?,
            function.ok_or("boundary record missing `function`")?,
        ));
    }
    let divisor = Divisor::new(components).map_err(|e| format!("logpair: {e}"))?;
    LogPair::new(ctx, divisor).map_err(|e| format!("logpair: {e}"))
}
