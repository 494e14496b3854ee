//! Black-box individual-fairness testing for classifiers over discrete integer
//! input domains.
//!
//! The crate is `no_std` (it needs `alloc`) and holds the algorithmic part of
//! the toolkit:
//!
//! * [`domain`]: parameter specs, concrete inputs, uniform sampling and
//!   protected-variant expansion.
//! * [`model`], [`logistic`], [`tree`], [`planted`]: the [`Classifier`] trait
//!   and the native models behind it.
//! * [`fairness`]: the discrimination check and single-parameter perturbation.
//! * [`search`]: global sampling plus probabilistic local search with the
//!   random, semi-directed and fully-directed update strategies.
//! * [`estimator`]: Monte Carlo estimation of the discriminatory fraction.
//! * [`retrain`]: augmentation of training data with generated inputs.
//!
//! File formats, reports, external models and the command line live in the
//! `fairprobe` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod domain;
pub mod error;
pub mod estimator;
pub mod fairness;
pub mod logistic;
pub mod model;
pub mod planted;
pub mod retrain;
pub mod search;
pub mod tree;

pub use domain::{InputDomain, LabeledDataset, ParameterSpec, PointInput};
pub use error::{Error, Result};
pub use estimator::{detection_probability, estimate_fraction, EstimationParams, EstimationResult};
pub use fairness::{check_discriminatory, perturb, Delta, DiscriminationConfig, Finding, Origin};
pub use model::{Alphabet, Classifier, Label, ModelError, NativeModel};
pub use search::{
    baseline_random, global_search, local_search, run_audit, run_audit_partial, run_audit_with_clock, Clock, NoClock,
    PhaseCounters, ProbabilityState, SearchConfig, Strategy, Termination, TestSuite,
};
