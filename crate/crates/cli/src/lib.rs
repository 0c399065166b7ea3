//! Library surface of the command-line front end, exposed so the
//! acceptance and integration suites can drive runs in-process.

pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod tasks;

pub use config::{load_config, load_config_str, serialize_config, RunConfig, Task};
pub use error::{CliError, Result};
pub use figures::{reproduce_figure, FigureId};
pub use output::{OutputSession, RunManifest};
pub use tasks::run_task;
