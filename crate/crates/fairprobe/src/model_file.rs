//! Versioned text serialization of native models.
//!
//! The first line is the format tag, every further line is `key = value`.
//! Floats are written in Rust's shortest round-trip form, so a saved model
//! reloads bit-for-bit.
//!
//! ```text
//! fairprobe-model-v1
//! kind = logistic
//! bounds = 0:99 0:1
//! weights = 1.5 -0.25
//! bias = 0.125
//! ```
//!
//! Trees list their nodes in preorder (`node = split <param> <threshold>` or
//! `node = leaf <label>`); planted models store the protected parameter, the
//! biased value and the region as `param:lo:hi` triples.

use std::fmt::Write as _;
use std::path::Path;

use fairprobe_core::logistic::LogisticModel;
use fairprobe_core::planted::{make_planted, PlantedBiasSpec, Region, RegionBound};
use fairprobe_core::tree::{DecisionTree, TreeNode};
use fairprobe_core::{Alphabet, Classifier, InputDomain, Label, NativeModel};

use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "fairprobe-model-v1";

pub fn render_model(model: &NativeModel) -> String {
    let mut out = format!("{MODEL_FORMAT}\nkind = {}\n", model.kind());
    match model {
        NativeModel::Logistic(m) => {
            let bounds: Vec<String> = m.bounds().iter().map(|(lo, hi)| format!("{lo}:{hi}")).collect();
            let weights: Vec<String> = m.weights().iter().map(|w| format!("{w:?}")).collect();
            let _ = writeln!(out, "bounds = {}", bounds.join(" "));
            let _ = writeln!(out, "weights = {}", weights.join(" "));
            let _ = writeln!(out, "bias = {:?}", m.bias());
        }
        NativeModel::Tree(t) => {
            let labels: Vec<String> = t.alphabet().labels().iter().map(|l| l.0.to_string()).collect();
            let _ = writeln!(out, "arity = {}", t.arity());
            let _ = writeln!(out, "alphabet = {}", labels.join(" "));
            for node in t.preorder() {
                match node {
                    TreeNode::Split { param, threshold } => {
                        let _ = writeln!(out, "node = split {param} {threshold}");
                    }
                    TreeNode::Leaf { label } => {
                        let _ = writeln!(out, "node = leaf {}", label.0);
                    }
                }
            }
        }
        NativeModel::Planted(p) => {
            let spec = p.spec();
            let _ = writeln!(out, "protected = {}", spec.protected_param);
            let _ = writeln!(out, "biased = {}", spec.biased_value);
            match &spec.region {
                Region::Empty => out.push_str("region = empty\n"),
                Region::Box(bounds) => {
                    out.push_str("region = box");
                    for b in bounds {
                        let _ = write!(out, " {}:{}:{}", b.param, b.lo, b.hi);
                    }
                    out.push('\n');
                }
            }
        }
    }
    out
}

struct Fields<'a> {
    entries: Vec<(usize, &'a str, &'a str)>,
}

impl<'a> Fields<'a> {
    fn one(&self, key: &str) -> Result<&'a str> {
        let mut hits = self.all(key);
        let v = hits
            .next()
            .ok_or_else(|| Error::Format(format!("model file lacks `{key}`")))?;
        if hits.next().is_some() {
            return Err(Error::Format(format!("model file repeats `{key}`")));
        }
        Ok(v)
    }

    fn all<'s>(&'s self, key: &'s str) -> impl Iterator<Item = &'a str> + 's {
        self.entries
            .iter()
            .filter(move |(_, k, _)| *k == key)
            .map(|(_, _, v)| *v)
    }

    fn expect_only(&self, keys: &[&str]) -> Result<()> {
        match self.entries.iter().find(|(_, k, _)| !keys.contains(k)) {
            Some((line, key, _)) => Err(Error::Format(format!("line {line}: unexpected key `{key}`"))),
            None => Ok(()),
        }
    }
}

fn num<T: std::str::FromStr>(text: &str, what: &str) -> Result<T> {
    text.parse().map_err(|_| Error::Format(format!("bad {what} `{text}`")))
}

fn range(text: &str) -> Result<(i64, i64)> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| Error::Format(format!("bad bound `{text}`, expected lo:hi")))?;
    Ok((num(lo, "bound")?, num(hi, "bound")?))
}

/// Parses a model and checks that it fits `domain`.
pub fn parse_model(text: &str, domain: &InputDomain) -> Result<NativeModel> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, tag)) if tag.trim() == MODEL_FORMAT => {}
        Some((_, tag)) => return Err(Error::Format(format!("unknown model format `{}`", tag.trim()))),
        None => return Err(Error::Format("empty model file".into())),
    }
    let mut entries = Vec::new();
    for (n, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("line {}: expected `key = value`", n + 1)))?;
        entries.push((n + 1, k.trim(), v.trim()));
    }
    let fields = Fields { entries };

    let model: NativeModel = match fields.one("kind")? {
        "logistic" => {
            fields.expect_only(&["kind", "bounds", "weights", "bias"])?;
            let bounds = fields
                .one("bounds")?
                .split_whitespace()
                .map(range)
                .collect::<Result<Vec<_>>>()?;
            let weights = fields
                .one("weights")?
                .split_whitespace()
                .map(|w| num(w, "weight"))
                .collect::<Result<Vec<f64>>>()?;
            let bias = num(fields.one("bias")?, "bias")?;
            LogisticModel::from_bounds(bounds, weights, bias)?.into()
        }
        "tree" => {
            fields.expect_only(&["kind", "arity", "alphabet", "node"])?;
            let arity = num(fields.one("arity")?, "arity")?;
            let alphabet = Alphabet::new(
                fields
                    .one("alphabet")?
                    .split_whitespace()
                    .map(|l| num(l, "label").map(Label))
                    .collect::<Result<Vec<_>>>()?,
            );
            let nodes = fields.all("node").map(parse_node).collect::<Result<Vec<_>>>()?;
            DecisionTree::from_preorder(arity, &nodes, alphabet)?.into()
        }
        "planted" => {
            fields.expect_only(&["kind", "protected", "biased", "region"])?;
            let region_text = fields.one("region")?;
            let region = match region_text.split_whitespace().collect::<Vec<_>>().as_slice() {
                ["empty"] => Region::Empty,
                ["box", bounds @ ..] => Region::Box(bounds.iter().map(|b| parse_bound(b)).collect::<Result<_>>()?),
                _ => return Err(Error::Format(format!("bad region `{region_text}`"))),
            };
            let spec = PlantedBiasSpec {
                region,
                protected_param: num(fields.one("protected")?, "parameter index")?,
                biased_value: num(fields.one("biased")?, "biased value")?,
            };
            make_planted(domain, spec)?.into()
        }
        other => return Err(Error::Format(format!("unknown model kind `{other}`"))),
    };
    let arity = match &model {
        NativeModel::Logistic(m) => m.bounds().len(),
        NativeModel::Tree(t) => t.arity(),
        NativeModel::Planted(_) => domain.len(),
    };
    if arity != domain.len() {
        return Err(Error::Format(format!(
            "model expects {arity} parameters, domain has {}",
            domain.len()
        )));
    }
    Ok(model)
}

fn parse_node(text: &str) -> Result<TreeNode> {
    match text.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["split", param, threshold] => Ok(TreeNode::Split {
            param: num(param, "split parameter")?,
            threshold: num(threshold, "threshold")?,
        }),
        ["leaf", label] => Ok(TreeNode::Leaf {
            label: Label(num(label, "label")?),
        }),
        _ => Err(Error::Format(format!("bad tree node `{text}`"))),
    }
}

fn parse_bound(text: &str) -> Result<RegionBound> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [p, lo, hi] => Ok(RegionBound::new(
            num(p, "region parameter")?,
            num(lo, "region bound")?,
            num(hi, "region bound")?,
        )),
        _ => Err(Error::Format(format!(
            "bad region bound `{text}`, expected param:lo:hi"
        ))),
    }
}

pub fn read_model(path: &Path, domain: &InputDomain) -> Result<NativeModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text, domain)
}

pub fn write_model(path: &Path, model: &NativeModel) -> Result<()> {
    std::fs::write(path, render_model(model)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use fairprobe_core::ParameterSpec;

    fn domain() -> InputDomain {
        InputDomain::new(vec![
            ParameterSpec::new("a", 0, 9, false),
            ParameterSpec::new("b", -3, 3, false),
            ParameterSpec::new("g", 0, 1, true),
        ])
        .unwrap()
    }

    #[test]
    fn logistic_floats_survive_exactly() {
        let d = domain();
        let w = vec![0.1 + 0.2, -1e-300, f64::MIN_POSITIVE];
        let m: NativeModel = LogisticModel::from_parts(&d, w.clone(), -7.25e12).unwrap().into();
        let text = render_model(&m);
        assert!(text.starts_with("fairprobe-model-v1\n"));
        let back = parse_model(&text, &d).unwrap();
        let NativeModel::Logistic(l) = &back else { panic!() };
        let bits: Vec<u64> = l.weights().iter().map(|x| x.to_bits()).collect();
        assert_eq!(bits, w.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        assert_eq!(back, m);
    }

    #[test]
    fn tree_and_planted_round_trip() {
        let d = domain();
        let nodes = [
            TreeNode::Split {
                param: 1,
                threshold: -1,
            },
            TreeNode::Leaf { label: Label(-1) },
            TreeNode::Leaf { label: Label(1) },
        ];
        let t: NativeModel = DecisionTree::from_preorder(3, &nodes, Alphabet::binary())
            .unwrap()
            .into();
        assert_eq!(parse_model(&render_model(&t), &d).unwrap(), t);

        for region in [
            Region::Empty,
            Region::Box(vec![]),
            Region::Box(vec![RegionBound::new(1, -3, 0)]),
        ] {
            let p: NativeModel = make_planted(&d, PlantedBiasSpec::new(&d, region, 0)).unwrap().into();
            assert_eq!(parse_model(&render_model(&p), &d).unwrap(), p);
        }
    }

    #[test]
    fn rejects_foreign_or_mismatched_files() {
        let d = domain();
        assert!(parse_model("fairprobe-model-v0\nkind = tree\n", &d).is_err());
        assert!(parse_model("fairprobe-model-v1\nkind = svm\n", &d).is_err());
        let narrow = "fairprobe-model-v1\nkind = logistic\nbounds = 0:1\nweights = 1.0\nbias = 0.0\n";
        assert!(parse_model(narrow, &d).unwrap_err().to_string().contains("parameters"));
        let extra = "fairprobe-model-v1\nkind = planted\nprotected = 2\nbiased = 1\nregion = empty\ncolour = red\n";
        assert!(parse_model(extra, &d).is_err());
    }
}
