use std::path::Path;

use fairprobe_core::{Alphabet, Classifier, InputDomain, Label, ModelError, NativeModel, PointInput};
use sha2::{Digest, Sha256};

use crate::domain_file::render_domain;
use crate::error::Result;
use crate::external::{connect_external, ExternalModel};
use crate::model_file::{read_model, render_model};

/// Prefix of a model reference that names a launch command instead of a file.
pub const EXEC_PREFIX: &str = "exec:";

#[derive(Debug)]
pub enum ModelHandle {
    Native(NativeModel),
    External(ExternalModel),
}

impl ModelHandle {
    /// Opens `model_ref`: `exec:<command>` starts an external model, anything
    /// else is read as a model file.
    pub fn open(model_ref: &str, domain: &InputDomain) -> Result<Self> {
        match model_ref.strip_prefix(EXEC_PREFIX) {
            Some(command) => Ok(ModelHandle::External(connect_external(command.trim(), domain)?)),
            None => Ok(ModelHandle::Native(read_model(Path::new(model_ref), domain)?)),
        }
    }

    /// SHA-256 over the canonical model file, or over the launch command and
    /// handshake description for external models.
    pub fn digest(&self) -> String {
        match self {
            ModelHandle::Native(m) => model_digest(m),
            ModelHandle::External(e) => {
                sha256_hex(format!("external\n{}\n{}\n", e.command(), e.description()).as_bytes())
            }
        }
    }
}

impl Classifier for ModelHandle {
    fn alphabet(&self) -> &Alphabet {
        match self {
            ModelHandle::Native(m) => m.alphabet(),
            ModelHandle::External(e) => e.alphabet(),
        }
    }

    fn predict(&self, input: &PointInput) -> Result<Label, ModelError> {
        match self {
            ModelHandle::Native(m) => m.predict(input),
            ModelHandle::External(e) => e.predict(input),
        }
    }

    fn predict_batch(&self, inputs: &[PointInput]) -> Result<Vec<Label>, ModelError> {
        match self {
            ModelHandle::Native(m) => m.predict_batch(inputs),
            ModelHandle::External(e) => e.predict_batch(inputs),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn domain_digest(domain: &InputDomain) -> String {
    sha256_hex(render_domain(domain).as_bytes())
}

pub fn model_digest(model: &NativeModel) -> String {
    sha256_hex(render_model(model).as_bytes())
}
