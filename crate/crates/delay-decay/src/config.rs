//! `--config PATH` files.
//!
//! One flag per line as `key = value`; `#` starts a comment. A line holding a
//! `family` key describes the distribution instead and stands for `--dist`:
//!
//! ```text
//! # fig 1 recipe
//! family = "gamma", k = 1.0, lambda = 6.0
//! t-end = 50
//! h = 1e-3
//! ```
//!
//! Keys may use `_` or `-`. Flags given on the command line win.

use std::ffi::OsString;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

/// Split on `sep` outside double quotes.
fn split_unquoted(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut quoted = false;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        if c == '"' {
            quoted = !quoted;
        } else if c == sep && !quoted {
            out.push(&s[start..i]);
            start = i + 1;
        }
    }
    out.push(&s[start..]);
    out
}

fn unquote(v: &str) -> &str {
    let v = v.trim();
    v.strip_prefix('"').and_then(|v| v.strip_suffix('"')).unwrap_or(v)
}

/// `(flag, value)` pairs in file order, flags without the leading dashes.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = split_unquoted(raw, '#')[0].trim();
        if content.is_empty() {
            continue;
        }
        let mut items = Vec::new();
        for item in split_unquoted(content, ',') {
            let Some((k, v)) = item.split_once('=') else {
                return Err(ConfigError { line, message: format!("expected key = value, found `{}`", item.trim()) });
            };
            items.push((k.trim().replace('_', "-"), unquote(v).to_string()));
        }
        let (flag, value) = if let Some(pos) = items.iter().position(|(k, _)| k == "family") {
            let family = items.remove(pos).1;
            let params: Vec<String> = items.iter().map(|(k, v)| format!("{k}={v}")).collect();
            ("dist".to_string(), format!("{family}:{}", params.join(",")))
        } else if items.len() == 1 {
            items.pop().unwrap()
        } else {
            return Err(ConfigError { line, message: "one flag per line".to_string() });
        };
        if out.iter().any(|(f, _)| *f == flag) {
            return Err(ConfigError { line, message: format!("`{flag}` set twice") });
        }
        out.push((flag, value));
    }
    Ok(out)
}

fn mentions(args: &[OsString], flag: &str) -> bool {
    let long = format!("--{flag}");
    let with_eq = format!("--{flag}=");
    args.iter().any(|a| a.to_str().is_some_and(|a| a == long || a.starts_with(&with_eq)))
}

/// Append config flags that the command line does not already set.
pub fn merge(mut args: Vec<OsString>, config: &[(String, String)]) -> Vec<OsString> {
    let extra: Vec<OsString> = config
        .iter()
        .filter(|(flag, _)| !mentions(&args, flag))
        .flat_map(|(flag, value)| [OsString::from(format!("--{flag}")), OsString::from(value)])
        .collect();
    args.extend(extra);
    args
}

/// Value of `--config` in `args`, if any.
pub fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        match a.to_str() {
            Some("--config") => return it.next().cloned(),
            Some(s) if s.starts_with("--config=") => return Some(s["--config=".len()..].into()),
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distribution_and_flags() {
        let text = "# recipe\nfamily = \"gamma\", k = 1.0, lambda = 6.0\nt_end = 50\nh = 1e-3  # step\n\n";
        let c = parse_config(text).unwrap();
        assert_eq!(
            c,
            vec![
                ("dist".into(), "gamma:k=1.0,lambda=6.0".into()),
                ("t-end".into(), "50".into()),
                ("h".into(), "1e-3".into()),
            ]
        );
    }

    #[test]
    fn quoted_values_keep_separators() {
        let c = parse_config("dist = \"atoms:s=0.1;w=0.5|s=0.4;w=0.5\"\ns-grid = \"0.1,0.3\"").unwrap();
        assert_eq!(c[0].1, "atoms:s=0.1;w=0.5|s=0.4;w=0.5");
        assert_eq!(c[1].1, "0.1,0.3");
    }

    #[test]
    fn bad_lines() {
        assert_eq!(parse_config("a = 1\nnonsense").unwrap_err().line, 2);
        assert!(parse_config("a = 1, b = 2").is_err());
        assert!(parse_config("h = 1\nh = 2").is_err());
    }

    #[test]
    fn command_line_wins() {
        let args: Vec<OsString> = ["x", "simulate", "--h=0.01", "--config", "f"].iter().map(Into::into).collect();
        assert_eq!(config_path(&args), Some("f".into()));
        let merged = merge(args, &[("h".into(), "1".into()), ("t-end".into(), "5".into())]);
        let tail: Vec<_> = merged[5..].iter().map(|s| s.to_str().unwrap()).collect();
        assert_eq!(tail, ["--t-end", "5"]);
    }
}
