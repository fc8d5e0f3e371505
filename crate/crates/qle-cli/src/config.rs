//! Flat `key = value` configuration files.
//!
//! Each entry becomes `--key value` on the command line unless the flag was
//! given explicitly. Underscores in keys are read as dashes. `true` turns on a
//! boolean flag and `false` leaves it off. Lines starting with `#` are ignored.

use std::fs;
use std::path::Path;

pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value", i + 1))?;
        let k = k.trim().trim_start_matches("--").replace('_', "-");
        if k.is_empty() {
            return Err(format!("config line {}: empty key", i + 1));
        }
        if k == "config" {
            return Err("config files cannot include other config files".into());
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn given(argv: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    argv.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
}

/// Appends the entries of the `--config` file, if any, to `argv`.
pub fn merge(mut argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = fs::read_to_string(Path::new(&path)).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let explicit = argv.clone();
    for (k, v) in parse(&text)? {
        if given(&explicit, &k) {
            continue;
        }
        match v.as_str() {
            "true" => argv.push(format!("--{k}")),
            "false" => {}
            _ => {
                argv.push(format!("--{k}"));
                argv.push(v);
            }
        }
    }
    Ok(argv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_normalizes_keys() {
        let kv = parse("# c\n t_end = 2\n\n--eta=1.5\n").unwrap();
        assert_eq!(kv, vec![("t-end".into(), "2".into()), ("eta".into(), "1.5".into())]);
        assert!(parse("novalue").is_err());
        assert!(parse("config=x").is_err());
    }

    #[test]
    fn explicit_flags_win() {
        let argv: Vec<String> = ["qle", "--eta", "2"].iter().map(|s| s.to_string()).collect();
        assert!(given(&argv, "eta"));
        assert!(!given(&argv, "et"));
        assert_eq!(config_path(&["--config=a.txt".to_string()]), Some("a.txt".into()));
    }
}
