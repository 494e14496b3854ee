//! The discrimination check and single-parameter perturbation.

use alloc::format;
use alloc::string::ToString;

use crate::domain::{InputDomain, PointInput};
use crate::error::{Error, Result};
use crate::model::{Classifier, Label};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscriminationConfig {
    gamma: f64,
}

impl DiscriminationConfig {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must be a finite value >= 0, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Strict comparison: a gap equal to gamma is not discrimination.
    pub fn violates(&self, a: Label, b: Label) -> bool {
        a.gap(b) > self.gamma
    }
}

impl Default for DiscriminationConfig {
    /// `gamma = 0`: any label change counts.
    fn default() -> Self {
        Self { gamma: 0.0 }
    }
}

/// Which search phase produced a finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    Global,
    Local,
    Baseline,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Global => "global",
            Origin::Local => "local",
            Origin::Baseline => "baseline",
        }
    }
}

/// A discriminatory input together with the protected variant that exposes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub input: PointInput,
    pub witness: PointInput,
    pub label_input: Label,
    pub label_witness: Label,
    pub origin: Origin,
    /// Index of the generated input within its run.
    pub step: u64,
}

impl Finding {
    /// Re-evaluates the model on the pair and confirms the label gap.
    pub fn reverify<C: Classifier + ?Sized>(
        &self,
        model: &C,
        domain: &InputDomain,
        cfg: &DiscriminationConfig,
    ) -> Result<bool> {
        let same_free = domain
            .free_params()
            .iter()
            .all(|&i| self.input.values()[i] == self.witness.values()[i]);
        let differs = domain
            .protected_params()
            .iter()
            .any(|&i| self.input.values()[i] != self.witness.values()[i]);
        if !same_free || !differs {
            return Ok(false);
        }
        let a = model.predict(&self.input)?;
        let b = model.predict(&self.witness)?;
        Ok(a == self.label_input && b == self.label_witness && cfg.violates(a, b))
    }
}

/// Evaluates `model` on every protected variant of `input` in one batch.
///
/// Returns a finding for the first variant, in enumeration order, whose label
/// differs from the label of `input` by more than gamma.
pub fn check_discriminatory<C: Classifier + ?Sized>(
    model: &C,
    input: &PointInput,
    domain: &InputDomain,
    cfg: &DiscriminationConfig,
) -> Result<Option<Finding>> {
    let variants = domain.protected_variants(input);
    let labels = model.predict_batch(&variants)?;
    if labels.len() != variants.len() {
        return Err(crate::model::ModelError::Protocol(format!(
            "{} labels for {} inputs",
            labels.len(),
            variants.len()
        ))
        .into());
    }
    let own = variants
        .iter()
        .position(|v| v == input)
        .ok_or_else(|| Error::Contract("input is not among its own variants".to_string()))?;
    let label_input = labels[own];
    Ok(variants
        .iter()
        .zip(&labels)
        .find(|(_, &l)| cfg.violates(label_input, l))
        .map(|(witness, &label_witness)| Finding {
            input: input.clone(),
            witness: witness.clone(),
            label_input,
            label_witness,
            origin: Origin::Global,
            step: 0,
        }))
}

/// Perturbation direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Delta {
    Down,
    Up,
}

impl Delta {
    pub fn value(self) -> i64 {
        match self {
            Delta::Down => -1,
            Delta::Up => 1,
        }
    }

    pub fn from_value(v: i64) -> Option<Self> {
        match v {
            -1 => Some(Delta::Down),
            1 => Some(Delta::Up),
            _ => None,
        }
    }
}

/// Moves one non-protected parameter by `delta`, clamped to its range.
pub fn perturb(input: &PointInput, param_index: usize, delta: Delta, domain: &InputDomain) -> Result<PointInput> {
    let spec = domain
        .param(param_index)
        .ok_or_else(|| Error::Contract(format!("no parameter with index {param_index}")))?;
    if spec.protected {
        return Err(Error::Contract(format!(
            "cannot perturb protected parameter `{}`",
            spec.name
        )));
    }
    let mut out = input.clone();
    let v = &mut out.0[param_index];
    *v = (*v + delta.value()).clamp(spec.min_value, spec.max_value);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ParameterSpec;
    use crate::model::{Alphabet, ModelError};
    use alloc::vec;

    fn domain() -> InputDomain {
        InputDomain::new(vec![
            ParameterSpec::new("a", 0, 9, false),
            ParameterSpec::new("b", 0, 9, false),
            ParameterSpec::new("g", 0, 1, true),
        ])
        .unwrap()
    }

    struct ByProtected(Alphabet);

    impl Classifier for ByProtected {
        fn alphabet(&self) -> &Alphabet {
            &self.0
        }
        fn predict(&self, input: &PointInput) -> core::result::Result<Label, ModelError> {
            Ok(if input.0[2] == 0 { Label(1) } else { Label(-1) })
        }
    }

    struct Constant(Alphabet);

    impl Classifier for Constant {
        fn alphabet(&self) -> &Alphabet {
            &self.0
        }
        fn predict(&self, _: &PointInput) -> core::result::Result<Label, ModelError> {
            Ok(Label(1))
        }
    }

    #[test]
    fn binary_flip_is_a_finding() {
        let f = check_discriminatory(
            &ByProtected(Alphabet::binary()),
            &PointInput(vec![1, 2, 0]),
            &domain(),
            &Default::default(),
        )
        .unwrap()
        .unwrap();
        assert_eq!(f.witness, PointInput(vec![1, 2, 1]));
        assert_eq!((f.label_input, f.label_witness), (Label(1), Label(-1)));
        assert_eq!(f.label_input.gap(f.label_witness), 2.0);
    }

    #[test]
    fn constant_model_never_discriminates() {
        let d = domain();
        for a in 0..10 {
            for g in 0..2 {
                let x = PointInput(vec![a, 9 - a, g]);
                assert!(
                    check_discriminatory(&Constant(Alphabet::binary()), &x, &d, &Default::default())
                        .unwrap()
                        .is_none()
                );
            }
        }
    }

    #[test]
    fn gamma_two_excludes_binary_gap() {
        let cfg = DiscriminationConfig::new(2.0).unwrap();
        let x = PointInput(vec![1, 2, 0]);
        assert!(
            check_discriminatory(&ByProtected(Alphabet::binary()), &x, &domain(), &cfg)
                .unwrap()
                .is_none()
        );
    }

    #[test]
    fn negative_gamma_is_rejected() {
        assert!(DiscriminationConfig::new(-0.5).is_err());
        assert!(DiscriminationConfig::new(f64::NAN).is_err());
    }

    #[test]
    fn perturb_moves_one_coordinate() {
        let d = domain();
        let x = PointInput(vec![3, 7, 0]);
        assert_eq!(perturb(&x, 0, Delta::Up, &d).unwrap(), PointInput(vec![4, 7, 0]));
        let back = perturb(&perturb(&x, 1, Delta::Down, &d).unwrap(), 1, Delta::Up, &d).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn perturb_clamps_at_bounds() {
        let d = domain();
        assert_eq!(
            perturb(&PointInput(vec![9, 0, 1]), 0, Delta::Up, &d).unwrap(),
            PointInput(vec![9, 0, 1])
        );
        assert_eq!(
            perturb(&PointInput(vec![9, 0, 1]), 1, Delta::Down, &d).unwrap(),
            PointInput(vec![9, 0, 1])
        );
    }

    #[test]
    fn perturbing_protected_is_a_contract_error() {
        assert!(matches!(
            perturb(&PointInput(vec![1, 1, 0]), 2, Delta::Up, &domain()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn findings_reverify() {
        let d = domain();
        let cfg = DiscriminationConfig::default();
        let f = check_discriminatory(&ByProtected(Alphabet::binary()), &PointInput(vec![5, 5, 1]), &d, &cfg)
            .unwrap()
            .unwrap();
        assert!(f.reverify(&ByProtected(Alphabet::binary()), &d, &cfg).unwrap());
        assert!(!f.reverify(&Constant(Alphabet::binary()), &d, &cfg).unwrap());
    }
}
