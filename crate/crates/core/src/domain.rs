//! Discrete input domains, concrete inputs and labeled training data.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::Label;

/// One integer-valued input parameter.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParameterSpec {
    pub name: String,
    /// Position in the owning domain; assigned by [`InputDomain::new`].
    pub index: usize,
    pub min_value: i64,
    pub max_value: i64,
    pub protected: bool,
}

impl ParameterSpec {
    pub fn new(name: impl Into<String>, min_value: i64, max_value: i64, protected: bool) -> Self {
        Self {
            name: name.into(),
            index: 0,
            min_value,
            max_value,
            protected,
        }
    }

    /// Number of distinct values in `[min_value, max_value]`.
    pub fn range_size(&self) -> u64 {
        (self.max_value - self.min_value) as u64 + 1
    }

    pub fn contains(&self, value: i64) -> bool {
        (self.min_value..=self.max_value).contains(&value)
    }
}

/// Ordered list of parameters, at least one protected and one free.
///
/// Free parameters are the ones local search may perturb; protected ones are
/// only ever varied together when expanding an input into its variants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InputDomain {
    params: Vec<ParameterSpec>,
    protected: Vec<usize>,
    free: Vec<usize>,
}

impl InputDomain {
    pub fn new(mut params: Vec<ParameterSpec>) -> Result<Self> {
        let mut names = BTreeSet::new();
        for (index, param) in params.iter_mut().enumerate() {
            param.index = index;
            if param.name.trim().is_empty() {
                return Err(Error::Domain(format!("parameter {index} has an empty name")));
            }
            if !names.insert(param.name.clone()) {
                return Err(Error::Domain(format!("duplicate parameter name `{}`", param.name)));
            }
            if param.min_value > param.max_value {
                return Err(Error::Domain(format!(
                    "parameter `{}` has min {} > max {}",
                    param.name, param.min_value, param.max_value
                )));
            }
        }
        let protected: Vec<usize> = params.iter().filter(|p| p.protected).map(|p| p.index).collect();
        let free: Vec<usize> = params.iter().filter(|p| !p.protected).map(|p| p.index).collect();
        if protected.is_empty() {
            return Err(Error::Domain("no protected parameter".to_string()));
        }
        if free.is_empty() {
            return Err(Error::Domain("no non-protected parameter".to_string()));
        }
        Ok(Self {
            params,
            protected,
            free,
        })
    }

    pub fn params(&self) -> &[ParameterSpec] {
        &self.params
    }

    pub fn param(&self, index: usize) -> Option<&ParameterSpec> {
        self.params.get(index)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    /// Indices of protected parameters, ascending.
    pub fn protected_params(&self) -> &[usize] {
        &self.protected
    }

    /// Indices of non-protected parameters, ascending.
    pub fn free_params(&self) -> &[usize] {
        &self.free
    }

    /// Number of points in the domain, `None` on `u128` overflow.
    pub fn cardinality(&self) -> Option<u128> {
        volume(self.params.iter())
    }

    /// Number of distinct projections onto the non-protected parameters.
    pub fn free_volume(&self) -> Option<u128> {
        volume(self.free.iter().map(|&i| &self.params[i]))
    }

    /// Number of protected variants of any input.
    pub fn variant_count(&self) -> Option<u128> {
        volume(self.protected.iter().map(|&i| &self.params[i]))
    }

    /// Checks arity and bounds of `input`.
    pub fn validate(&self, input: &PointInput) -> Result<()> {
        if input.len() != self.len() {
            return Err(Error::Arity {
                expected: self.len(),
                got: input.len(),
            });
        }
        for (param, &value) in self.params.iter().zip(input.values()) {
            if !param.contains(value) {
                return Err(Error::OutOfBounds {
                    param: param.name.clone(),
                    value,
                    min: param.min_value,
                    max: param.max_value,
                });
            }
        }
        Ok(())
    }

    pub fn contains(&self, input: &PointInput) -> bool {
        self.validate(input).is_ok()
    }

    /// Draws every parameter independently and uniformly from its range.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> PointInput {
        PointInput(
            self.params
                .iter()
                .map(|p| rng.gen_range(p.min_value..=p.max_value))
                .collect(),
        )
    }

    /// All inputs that agree with `input` on the non-protected parameters.
    ///
    /// Enumeration is lexicographic: protected parameters in ascending index
    /// order, the lowest index most significant, values ascending.
    pub fn protected_variants(&self, input: &PointInput) -> Vec<PointInput> {
        let mut current = input.clone();
        for &i in &self.protected {
            current.0[i] = self.params[i].min_value;
        }
        let mut out = Vec::new();
        loop {
            out.push(current.clone());
            // Odometer step, least significant digit last.
            let mut carried = true;
            for &i in self.protected.iter().rev() {
                let spec = &self.params[i];
                if current.0[i] < spec.max_value {
                    current.0[i] += 1;
                    carried = false;
                    break;
                }
                current.0[i] = spec.min_value;
            }
            if carried {
                return out;
            }
        }
    }
}

fn volume<'a>(mut params: impl Iterator<Item = &'a ParameterSpec>) -> Option<u128> {
    params.try_fold(1u128, |acc, p| acc.checked_mul(p.range_size() as u128))
}

/// One concrete input: a value per parameter, in index order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointInput(pub Vec<i64>);

impl PointInput {
    pub fn new(values: Vec<i64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<i64> {
        self.0.get(index).copied()
    }
}

impl From<Vec<i64>> for PointInput {
    fn from(values: Vec<i64>) -> Self {
        Self(values)
    }
}

impl fmt::Display for PointInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("]")
    }
}

/// Training rows over a fixed domain.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    domain: InputDomain,
    rows: Vec<(PointInput, Label)>,
    pub source: String,
}

impl LabeledDataset {
    /// Fails on the first row whose input is not in `domain`.
    pub fn new(domain: InputDomain, rows: Vec<(PointInput, Label)>, source: impl Into<String>) -> Result<Self> {
        for (input, _) in &rows {
            domain.validate(input)?;
        }
        Ok(Self {
            domain,
            rows,
            source: source.into(),
        })
    }

    pub fn domain(&self) -> &InputDomain {
        &self.domain
    }

    pub fn rows(&self) -> &[(PointInput, Label)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Appends rows after validating them against the domain.
    pub fn extend(&mut self, rows: impl IntoIterator<Item = (PointInput, Label)>) -> Result<()> {
        for (input, label) in rows {
            self.domain.validate(&input)?;
            self.rows.push((input, label));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(name: &str, min: i64, max: i64, protected: bool) -> ParameterSpec {
        ParameterSpec::new(name, min, max, protected)
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(InputDomain::new(vec![spec("a", 0, 1, false)]).is_err());
        assert!(InputDomain::new(vec![spec("a", 0, 1, true)]).is_err());
        assert!(InputDomain::new(vec![spec("a", 2, 1, false), spec("g", 0, 1, true)]).is_err());
        assert!(InputDomain::new(vec![spec("a", 0, 1, false), spec("a", 0, 1, true)]).is_err());
        assert!(InputDomain::new(vec![spec(" ", 0, 1, false), spec("g", 0, 1, true)]).is_err());
    }

    #[test]
    fn indices_and_cardinality() {
        let d = InputDomain::new(vec![
            spec("a", 0, 9, false),
            spec("g", 0, 1, true),
            spec("b", -2, 2, false),
        ])
        .unwrap();
        assert_eq!(d.params().iter().map(|p| p.index).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(d.cardinality(), Some(100));
        assert_eq!(d.free_volume(), Some(50));
        assert_eq!(d.free_params(), &[0, 2]);
        assert_eq!(d.protected_params(), &[1]);
    }

    #[test]
    fn singleton_range_always_sampled() {
        let d = InputDomain::new(vec![spec("a", 5, 5, false), spec("g", 1, 1, true)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(d.sample_uniform(&mut rng), PointInput(vec![5, 1]));
        }
    }

    #[test]
    fn sampling_is_uniform_on_small_grid() {
        let d = InputDomain::new(vec![spec("a", 0, 1, false), spec("g", 0, 1, true)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0u32; 4];
        let n = 100_000;
        for _ in 0..n {
            let s = d.sample_uniform(&mut rng);
            counts[(s.0[0] * 2 + s.0[1]) as usize] += 1;
        }
        for c in counts {
            let freq = c as f64 / n as f64;
            assert!((freq - 0.25).abs() <= 0.01, "frequency {freq}");
        }
    }

    #[test]
    fn fixed_seed_sampling_is_repeatable() {
        let d = InputDomain::new(vec![spec("a", 0, 1000, false), spec("g", 0, 3, true)]).unwrap();
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            (0..50).map(|_| d.sample_uniform(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn binary_protected_variants() {
        let d = InputDomain::new(vec![spec("a", 0, 9, false), spec("g", 0, 1, true)]).unwrap();
        let v = d.protected_variants(&PointInput(vec![4, 1]));
        assert_eq!(v, vec![PointInput(vec![4, 0]), PointInput(vec![4, 1])]);
    }

    #[test]
    fn product_of_protected_ranges() {
        let d = InputDomain::new(vec![
            spec("r", 0, 2, true),
            spec("a", 0, 9, false),
            spec("g", 0, 1, true),
        ])
        .unwrap();
        let v = d.protected_variants(&PointInput(vec![1, 7, 0]));
        assert_eq!(v.len(), 6);
        assert_eq!(v[0], PointInput(vec![0, 7, 0]));
        assert_eq!(v[1], PointInput(vec![0, 7, 1]));
        assert_eq!(v[5], PointInput(vec![2, 7, 1]));
        assert!(v.iter().all(|x| x.0[1] == 7));
    }

    #[test]
    fn zero_width_protected_alongside_binary() {
        let d = InputDomain::new(vec![
            spec("a", 0, 9, false),
            spec("c", 1, 1, true),
            spec("g", 0, 1, true),
        ])
        .unwrap();
        let v = d.protected_variants(&PointInput(vec![3, 1, 1]));
        assert_eq!(v, vec![PointInput(vec![3, 1, 0]), PointInput(vec![3, 1, 1])]);
    }

    #[test]
    fn dataset_rejects_out_of_bounds_rows() {
        let d = InputDomain::new(vec![spec("a", 0, 9, false), spec("g", 0, 1, true)]).unwrap();
        let rows = vec![(PointInput(vec![10, 0]), Label(1))];
        assert!(matches!(
            LabeledDataset::new(d, rows, "test"),
            Err(Error::OutOfBounds { value: 10, .. })
        ));
    }
}
