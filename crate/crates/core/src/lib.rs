//! Worst-case robust linear MIMO transceiver design.

pub mod bench;
pub mod conic;
pub mod design;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod parallel;
pub mod worstcase;

pub use error::{Error, Result};
