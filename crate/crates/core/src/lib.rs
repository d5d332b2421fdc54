//! Vertex-connectivity oracles built from element-connectivity Gomory-Hu
//! trees, plus the tripartite gadget experiment that shows why such oracles
//! need Ω(kn) bits.

pub mod error;
pub mod ghtree;
pub mod graph;
pub mod isolating;
pub mod lb;
pub mod maxflow;
pub mod oracle;
pub mod terminal_sets;

pub use error::{Error, Result};
pub use graph::{CutSet, EdgeId, Graph, Vertex};
