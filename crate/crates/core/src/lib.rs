//! Reliable influence maximization for graph active learning.
//!
//! Label queries are chosen to maximize the number of nodes that receive
//! enough quality-weighted k-step influence from the labeled set, where each
//! labeled node's quality estimates the chance that its (noisy) oracle label
//! is right. The chosen labels then train either label propagation or a
//! linear softmax classifier over propagated features.

pub mod error;
pub mod graph;
pub mod harness;
pub mod influence;
pub mod models;
pub mod oracle;
pub mod reliability;
pub mod selection;

pub use error::{Result, RimError};
