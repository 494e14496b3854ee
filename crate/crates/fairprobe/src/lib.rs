//! File formats, external models, reports and the command line around
//! [`fairprobe_core`].

pub mod cli;
pub mod dataset;
pub mod domain_file;
pub mod error;
pub mod external;
pub mod handle;
pub mod model_file;
pub mod report;

pub use dataset::{load_csv, read_csv, write_csv};
pub use domain_file::{parse_domain, read_domain, render_domain, write_domain};
pub use error::{Error, Result};
pub use external::{connect_external, ExternalModel};
pub use handle::{domain_digest, model_digest, ModelHandle};
pub use model_file::{parse_model, read_model, render_model, write_model, MODEL_FORMAT};
pub use report::{RunReport, REPORT_FORMAT};
