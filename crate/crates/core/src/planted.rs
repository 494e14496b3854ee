//! Synthetic classifier with a known discriminatory region.
//!
//! The model answers `+1` everywhere except when the input's non-protected
//! projection lies inside a box *and* the designated protected parameter takes
//! the biased value, where it answers `-1`. The fraction of discriminatory
//! inputs is therefore known exactly, which makes the model a ground truth for
//! the search and the estimator.

use alloc::format;
use alloc::vec::Vec;

use crate::domain::{InputDomain, PointInput};
use crate::error::{Error, Result};
use crate::model::{Alphabet, Classifier, Label, ModelError};

/// Inclusive bound on one non-protected parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionBound {
    pub param: usize,
    pub lo: i64,
    pub hi: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Region {
    /// No input is treated unfairly.
    Empty,
    /// Box over the non-protected parameters; unlisted parameters are
    /// unconstrained.
    Box(Vec<RegionBound>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedBiasSpec {
    pub region: Region,
    /// Protected parameter that triggers the flip.
    pub protected_param: usize,
    pub biased_value: i64,
}

impl PlantedBiasSpec {
    /// Bias on the domain's first protected parameter.
    pub fn new(domain: &InputDomain, region: Region, biased_value: i64) -> Self {
        Self {
            region,
            protected_param: domain.protected_params()[0],
            biased_value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedModel {
    spec: PlantedBiasSpec,
    // Effective per-parameter box, full range where unconstrained.
    bounds: Vec<(i64, i64)>,
    arity: usize,
    fraction: f64,
    alphabet: Alphabet,
}

/// Validates `spec` against `domain` and builds the model.
pub fn make_planted(domain: &InputDomain, spec: PlantedBiasSpec) -> Result<PlantedModel> {
    let protected = domain
        .param(spec.protected_param)
        .filter(|p| p.protected)
        .ok_or_else(|| Error::Spec(format!("parameter {} is not protected", spec.protected_param)))?;
    if !protected.contains(spec.biased_value) {
        return Err(Error::Spec(format!(
            "biased value {} outside [{}, {}] of `{}`",
            spec.biased_value, protected.min_value, protected.max_value, protected.name
        )));
    }

    let mut bounds: Vec<(i64, i64)> = domain.params().iter().map(|p| (p.min_value, p.max_value)).collect();
    if let Region::Box(constraints) = &spec.region {
        let mut seen = Vec::new();
        for c in constraints {
            let param = domain
                .param(c.param)
                .ok_or_else(|| Error::Spec(format!("region names unknown parameter {}", c.param)))?;
            if param.protected {
                return Err(Error::Spec(format!("region constrains protected `{}`", param.name)));
            }
            if seen.contains(&c.param) {
                return Err(Error::Spec(format!("region constrains `{}` twice", param.name)));
            }
            seen.push(c.param);
            if c.lo > c.hi || !param.contains(c.lo) || !param.contains(c.hi) {
                return Err(Error::Spec(format!(
                    "region [{}, {}] outside [{}, {}] of `{}`",
                    c.lo, c.hi, param.min_value, param.max_value, param.name
                )));
            }
            bounds[c.param] = (c.lo, c.hi);
        }
    }

    let fraction = match spec.region {
        // A single protected value means there is nothing to flip against.
        _ if protected.range_size() < 2 => 0.0,
        Region::Empty => 0.0,
        Region::Box(_) => domain
            .free_params()
            .iter()
            .map(|&i| {
                let p = &domain.params()[i];
                (bounds[i].1 - bounds[i].0 + 1) as f64 / p.range_size() as f64
            })
            .product(),
    };

    Ok(PlantedModel {
        spec,
        bounds,
        arity: domain.len(),
        fraction,
        alphabet: Alphabet::binary(),
    })
}

impl PlantedModel {
    pub fn spec(&self) -> &PlantedBiasSpec {
        &self.spec
    }

    /// Exact fraction of discriminatory inputs in the domain.
    pub fn discriminatory_fraction(&self) -> f64 {
        self.fraction
    }

    /// Whether the non-protected projection of `input` lies in the region.
    pub fn in_region(&self, input: &PointInput) -> bool {
        if self.spec.region == Region::Empty {
            return false;
        }
        self.bounds
            .iter()
            .zip(input.values())
            .enumerate()
            .all(|(i, (&(lo, hi), &v))| i == self.spec.protected_param || (lo..=hi).contains(&v))
    }
}

impl Classifier for PlantedModel {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn predict(&self, input: &PointInput) -> Result<Label, ModelError> {
        if input.len() != self.arity {
            return Err(ModelError::Protocol(format!(
                "input arity {} != model arity {}",
                input.len(),
                self.arity
            )));
        }
        let biased = input.values()[self.spec.protected_param] == self.spec.biased_value;
        Ok(if biased && self.in_region(input) {
            Label::NEGATIVE
        } else {
            Label::POSITIVE
        })
    }
}

impl core::fmt::Display for Region {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Region::Empty => f.write_str("empty"),
            Region::Box(bounds) => {
                let parts: Vec<_> = bounds
                    .iter()
                    .map(|b| format!("{}:{}..={}", b.param, b.lo, b.hi))
                    .collect();
                f.write_str(&parts.join(" "))
            }
        }
    }
}

impl From<Vec<RegionBound>> for Region {
    fn from(bounds: Vec<RegionBound>) -> Self {
        Region::Box(bounds)
    }
}

impl RegionBound {
    pub fn new(param: usize, lo: i64, hi: i64) -> Self {
        Self { param, lo, hi }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ParameterSpec;
    use alloc::vec;

    fn domain() -> InputDomain {
        InputDomain::new(vec![
            ParameterSpec::new("a", 0, 9, false),
            ParameterSpec::new("b", 0, 9, false),
            ParameterSpec::new("g", 0, 1, true),
        ])
        .unwrap()
    }

    #[test]
    fn full_region_is_fully_discriminatory() {
        let m = make_planted(&domain(), PlantedBiasSpec::new(&domain(), Region::Box(vec![]), 1)).unwrap();
        assert_eq!(m.discriminatory_fraction(), 1.0);
    }

    #[test]
    fn empty_region_is_fair() {
        let m = make_planted(&domain(), PlantedBiasSpec::new(&domain(), Region::Empty, 1)).unwrap();
        assert_eq!(m.discriminatory_fraction(), 0.0);
        assert_eq!(m.predict(&PointInput(vec![0, 0, 1])).unwrap(), Label::POSITIVE);
    }

    #[test]
    fn ten_percent_slice() {
        let spec = PlantedBiasSpec::new(&domain(), Region::Box(vec![RegionBound::new(1, 3, 3)]), 1);
        let m = make_planted(&domain(), spec).unwrap();
        assert!((m.discriminatory_fraction() - 0.10).abs() < 1e-12);
    }

    #[test]
    fn flips_only_inside_region_for_biased_value() {
        let spec = PlantedBiasSpec::new(&domain(), Region::Box(vec![RegionBound::new(0, 0, 4)]), 1);
        let m = make_planted(&domain(), spec).unwrap();
        assert_eq!(m.predict(&PointInput(vec![2, 7, 1])).unwrap(), Label::NEGATIVE);
        assert_eq!(m.predict(&PointInput(vec![2, 7, 0])).unwrap(), Label::POSITIVE);
        assert_eq!(m.predict(&PointInput(vec![8, 7, 1])).unwrap(), Label::POSITIVE);
        assert_eq!(m.predict(&PointInput(vec![8, 7, 0])).unwrap(), Label::POSITIVE);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let d = domain();
        let out_of_range = PlantedBiasSpec::new(&d, Region::Box(vec![RegionBound::new(0, 0, 10)]), 1);
        assert!(matches!(make_planted(&d, out_of_range), Err(Error::Spec(_))));
        let protected = PlantedBiasSpec::new(&d, Region::Box(vec![RegionBound::new(2, 0, 1)]), 1);
        assert!(make_planted(&d, protected).is_err());
        let bad_value = PlantedBiasSpec::new(&d, Region::Empty, 2);
        assert!(make_planted(&d, bad_value).is_err());
        let not_protected = PlantedBiasSpec {
            region: Region::Empty,
            protected_param: 0,
            biased_value: 1,
        };
        assert!(make_planted(&d, not_protected).is_err());
    }
}
