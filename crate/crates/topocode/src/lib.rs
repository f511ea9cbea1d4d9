//! Topological coding toolkit: `[0,9]`-string algebra, W-constraint graph
//! labelings, Topcode matrices, every-zero groups and toy key-pair protocols.

pub mod crypto_protocols;
pub mod error;
pub mod graph_core;
pub mod group_algebra;
pub mod labeling_engine;
pub mod par;
pub mod string_algebra;
pub mod tables;
pub mod topcode;

pub use error::{Error, Result};
pub use par::Exec;
