pub mod band;
pub mod cli;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod oracle;
pub mod roots;
pub mod selftest;
pub mod threebody;
pub mod torus;
pub mod twobody;

pub use error::{Error, Result};
