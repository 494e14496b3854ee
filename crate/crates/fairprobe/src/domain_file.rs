//! Domain description files.
//!
//! One block per parameter, blocks separated by blank lines, one `key = value`
//! pair per line. Lines starting with `#` are comments.
//!
//! ```text
//! name = age
//! min = 17
//! max = 90
//! protected = false
//!
//! name = sex
//! min = 0
//! max = 1
//! protected = true
//! ```

use std::fmt::Write as _;
use std::path::Path;

use fairprobe_core::{InputDomain, ParameterSpec};

use crate::error::{Error, Result};

pub fn parse_domain(text: &str) -> Result<InputDomain> {
    let mut params = Vec::new();
    let mut block: Vec<(usize, &str, &str)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            if !block.is_empty() {
                params.push(parse_block(&block)?);
                block.clear();
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("line {}: expected `key = value`", n + 1)))?;
        block.push((n + 1, key.trim(), value.trim()));
    }
    if !block.is_empty() {
        params.push(parse_block(&block)?);
    }
    Ok(InputDomain::new(params)?)
}

fn parse_block(block: &[(usize, &str, &str)]) -> Result<ParameterSpec> {
    let first_line = block[0].0;
    let get = |key: &str| -> Result<&str> {
        let mut hits = block.iter().filter(|(_, k, _)| *k == key);
        let (_, _, v) = hits
            .next()
            .ok_or_else(|| Error::Format(format!("parameter block at line {first_line}: missing `{key}`")))?;
        if hits.next().is_some() {
            return Err(Error::Format(format!(
                "parameter block at line {first_line}: `{key}` given twice"
            )));
        }
        Ok(v)
    };
    if let Some((line, key, _)) = block
        .iter()
        .find(|(_, k, _)| !matches!(*k, "name" | "min" | "max" | "protected"))
    {
        return Err(Error::Format(format!("line {line}: unknown key `{key}`")));
    }
    let int = |key: &str| -> Result<i64> {
        get(key)?.parse().map_err(|_| {
            Error::Format(format!(
                "parameter block at line {first_line}: `{key}` is not an integer"
            ))
        })
    };
    let protected = match get("protected")? {
        "true" => true,
        "false" => false,
        other => {
            return Err(Error::Format(format!(
                "parameter block at line {first_line}: protected must be true or false, got `{other}`"
            )))
        }
    };
    Ok(ParameterSpec::new(get("name")?, int("min")?, int("max")?, protected))
}

/// Canonical text of `domain`; [`parse_domain`] reads it back unchanged.
pub fn render_domain(domain: &InputDomain) -> String {
    let mut out = String::new();
    for (i, p) in domain.params().iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "name = {}\nmin = {}\nmax = {}\nprotected = {}",
            p.name, p.min_value, p.max_value, p.protected
        );
    }
    out
}

pub fn read_domain(path: &Path) -> Result<InputDomain> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_domain(&text)
}

pub fn write_domain(path: &Path, domain: &InputDomain) -> Result<()> {
    std::fs::write(path, render_domain(domain)).map_err(|e| Error::io(path, e))
}
