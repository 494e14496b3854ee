//! The black-box classifier interface and the native model kinds.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::domain::PointInput;
use crate::logistic::LogisticModel;
use crate::planted::PlantedModel;
use crate::tree::DecisionTree;

/// A classifier output. Labels are integers so that `|f(a) - f(b)|` is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub i64);

impl Label {
    pub const NEGATIVE: Label = Label(-1);
    pub const POSITIVE: Label = Label(1);

    /// Absolute difference of the numeric embeddings.
    pub fn gap(self, other: Label) -> f64 {
        (self.0 - other.0).unsigned_abs() as f64
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The finite set of labels a model may emit, sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet(Vec<Label>);

impl Alphabet {
    pub fn new(labels: impl IntoIterator<Item = Label>) -> Self {
        let mut labels: Vec<Label> = labels.into_iter().collect();
        labels.sort();
        labels.dedup();
        Self(labels)
    }

    /// `{-1, +1}`.
    pub fn binary() -> Self {
        Self(alloc::vec![Label::NEGATIVE, Label::POSITIVE])
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    pub fn contains(&self, label: Label) -> bool {
        self.0.binary_search(&label).is_ok()
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::binary()
    }
}

/// Failure while querying a model. Native models never fail.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    /// The model process went away or an IO call failed; retrying on a fresh
    /// connection may succeed.
    #[error("model transport error: {0}")]
    Transport(String),
    /// The model answered with something that breaks the protocol.
    #[error("model protocol error: {0}")]
    Protocol(String),
}

impl ModelError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, ModelError::Transport(_))
    }
}

/// A classifier under test.
///
/// `predict` must be pure: the same input always yields the same label for the
/// lifetime of the value.
pub trait Classifier {
    fn alphabet(&self) -> &Alphabet;

    fn predict(&self, input: &PointInput) -> Result<Label, ModelError>;

    /// Same semantics as mapping [`Classifier::predict`]; implementations may
    /// override it to amortize per-call overhead.
    fn predict_batch(&self, inputs: &[PointInput]) -> Result<Vec<Label>, ModelError> {
        inputs.iter().map(|input| self.predict(input)).collect()
    }
}

impl<C: Classifier + ?Sized> Classifier for &C {
    fn alphabet(&self) -> &Alphabet {
        (**self).alphabet()
    }

    fn predict(&self, input: &PointInput) -> Result<Label, ModelError> {
        (**self).predict(input)
    }

    fn predict_batch(&self, inputs: &[PointInput]) -> Result<Vec<Label>, ModelError> {
        (**self).predict_batch(inputs)
    }
}

/// Any in-process model.
#[derive(Debug, Clone, PartialEq)]
pub enum NativeModel {
    Logistic(LogisticModel),
    Tree(DecisionTree),
    Planted(PlantedModel),
}

impl NativeModel {
    pub fn kind(&self) -> &'static str {
        match self {
            NativeModel::Logistic(_) => "logistic",
            NativeModel::Tree(_) => "tree",
            NativeModel::Planted(_) => "planted",
        }
    }
}

impl Classifier for NativeModel {
    fn alphabet(&self) -> &Alphabet {
        match self {
            NativeModel::Logistic(m) => m.alphabet(),
            NativeModel::Tree(m) => m.alphabet(),
            NativeModel::Planted(m) => m.alphabet(),
        }
    }

    fn predict(&self, input: &PointInput) -> Result<Label, ModelError> {
        match self {
            NativeModel::Logistic(m) => m.predict(input),
            NativeModel::Tree(m) => m.predict(input),
            NativeModel::Planted(m) => m.predict(input),
        }
    }
}

impl From<LogisticModel> for NativeModel {
    fn from(m: LogisticModel) -> Self {
        NativeModel::Logistic(m)
    }
}

impl From<DecisionTree> for NativeModel {
    fn from(m: DecisionTree) -> Self {
        NativeModel::Tree(m)
    }
}

impl From<PlantedModel> for NativeModel {
    fn from(m: PlantedModel) -> Self {
        NativeModel::Planted(m)
    }
}
