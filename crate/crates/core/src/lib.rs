//! Compatibility analysis of finite-outcome quantum measurements through
//! their Naimark extensions.

pub mod cli;
pub mod compatibility;
pub mod dichotomic;
pub mod error;
pub mod linalg;
pub mod measurements;
pub mod naimark;
pub mod optim;

pub use error::{Error, Result, Violation};
