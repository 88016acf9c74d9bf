//! Text form of a delay distribution: `family:key=val[,key=val...]`.
//!
//! ```text
//! dirac:tau=0.3
//! gamma:k=1,lambda=6
//! uniform:a=0,b=0.3
//! truncnormal:m=0.2,sigma=0.1
//! atoms:s=0.1;w=0.5|s=0.4;w=0.5
//! ```

use std::fmt::Write as _;

use delay_decay_core::{DelayDistribution, Family, ParamError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("invalid distribution [{code}]: {0}", code = .0.code())]
    Invalid(ParamError),
}

impl SpecError {
    fn at(offset: usize, message: impl Into<String>) -> Self {
        SpecError::Syntax { offset, message: message.into() }
    }
}

/// A `key=value` token with byte offsets into the original spec.
struct Pair<'a> {
    key: &'a str,
    key_at: usize,
    value: &'a str,
    value_at: usize,
}

fn trimmed(s: &str, at: usize) -> (&str, usize) {
    let lead = s.len() - s.trim_start().len();
    (s.trim(), at + lead)
}

fn split_at_char(s: &str, at: usize, sep: char) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in s.char_indices() {
        if c == sep {
            out.push((&s[start..i], at + start));
            start = i + c.len_utf8();
        }
    }
    out.push((&s[start..], at + start));
    out
}

fn pairs(s: &str, at: usize, sep: char) -> Result<Vec<Pair<'_>>, SpecError> {
    let mut out: Vec<Pair> = Vec::new();
    for (item, item_at) in split_at_char(s, at, sep) {
        let (item, item_at) = trimmed(item, item_at);
        let Some(eq) = item.find('=') else {
            return Err(SpecError::at(item_at, format!("expected key=value, found `{item}`")));
        };
        let (key, key_at) = trimmed(&item[..eq], item_at);
        let (value, value_at) = trimmed(&item[eq + 1..], item_at + eq + 1);
        if key.is_empty() {
            return Err(SpecError::at(item_at, "empty key"));
        }
        if out.iter().any(|p| p.key == key) {
            return Err(SpecError::at(key_at, format!("duplicate key `{key}`")));
        }
        out.push(Pair { key, key_at, value, value_at });
    }
    Ok(out)
}

fn number(p: &Pair) -> Result<f64, SpecError> {
    p.value
        .parse::<f64>()
        .map_err(|_| SpecError::at(p.value_at, format!("`{}` is not a number (key `{}`)", p.value, p.key)))
}

/// Pull the listed keys out of `pairs`, rejecting unknown and missing ones.
fn take<const N: usize>(
    pairs: &[Pair],
    keys: [&str; N],
    family: &str,
    end: usize,
) -> Result<[f64; N], SpecError> {
    if let Some(p) = pairs.iter().find(|p| !keys.contains(&p.key)) {
        return Err(SpecError::at(p.key_at, format!("unknown key `{}` for {family}", p.key)));
    }
    let mut out = [0.0; N];
    for (slot, key) in out.iter_mut().zip(keys) {
        let p = pairs
            .iter()
            .find(|p| p.key == key)
            .ok_or_else(|| SpecError::at(end, format!("missing key `{key}` for {family}")))?;
        *slot = number(p)?;
    }
    Ok(out)
}

pub fn parse_dist_spec(spec: &str) -> Result<DelayDistribution, SpecError> {
    let Some(colon) = spec.find(':') else {
        return Err(SpecError::at(0, "expected `family:key=value,...`"));
    };
    let (family, family_at) = trimmed(&spec[..colon], 0);
    let body = &spec[colon + 1..];
    let body_at = colon + 1;
    let end = spec.len();
    let family = match family {
        "dirac" => {
            let [tau] = take(&pairs(body, body_at, ',')?, ["tau"], family, end)?;
            Family::Dirac { tau }
        }
        "gamma" => {
            let [k, lambda] = take(&pairs(body, body_at, ',')?, ["k", "lambda"], family, end)?;
            Family::Gamma { k, lambda }
        }
        "uniform" => {
            let [a, b] = take(&pairs(body, body_at, ',')?, ["a", "b"], family, end)?;
            Family::Uniform { a, b }
        }
        "truncnormal" => {
            let [m, sigma] = take(&pairs(body, body_at, ',')?, ["m", "sigma"], family, end)?;
            Family::TruncatedNormal { m, sigma }
        }
        "atoms" => {
            let mut atoms = Vec::new();
            for (atom, atom_at) in split_at_char(body, body_at, '|') {
                let (atom, atom_at) = trimmed(atom, atom_at);
                let [s, w] = take(&pairs(atom, atom_at, ';')?, ["s", "w"], "atom", atom_at + atom.len())?;
                atoms.push((s, w));
            }
            Family::FiniteAtoms { atoms }
        }
        other => return Err(SpecError::at(family_at, format!("unknown family `{other}`"))),
    };
    delay_decay_core::distributions::validate(family).map_err(SpecError::Invalid)
}

/// Inverse of [`parse_dist_spec`]; numbers use the shortest representation
/// that parses back to the same `f64`.
pub fn render(dist: &DelayDistribution) -> String {
    match dist.family() {
        Family::Dirac { tau } => format!("dirac:tau={tau}"),
        Family::Gamma { k, lambda } => format!("gamma:k={k},lambda={lambda}"),
        Family::Uniform { a, b } => format!("uniform:a={a},b={b}"),
        Family::TruncatedNormal { m, sigma } => format!("truncnormal:m={m},sigma={sigma}"),
        Family::FiniteAtoms { atoms } => {
            let mut out = String::from("atoms:");
            for (i, (s, w)) in atoms.iter().enumerate() {
                if i > 0 {
                    out.push('|');
                }
                let _ = write!(out, "s={s};w={w}");
            }
            out
        }
    }
}
