//! Termination and complexity analysis for vector addition systems with
//! states (VASS).
//!
//! The crate decides termination-for-all-initial-states, emits machine
//! checkable certificates — lexicographic ranking functions for terminating
//! systems, nonnegative cycles for non-terminating ones — and classifies the
//! computational complexity (polynomial order for conservative systems, the
//! exact linear coefficient where the complexity is linear).
//!
//! Entry points:
//! - [`ranking::analyze`] / [`ranking::analyze_connected`] run the engine;
//! - [`verify`] re-checks emitted certificates with integer arithmetic only;
//! - [`complexity`] classifies orders, conservativity and linear bounds;
//! - [`oracle`] provides concrete step semantics and exhaustive longest-trace
//!   search at small scale, as an independent validation layer.

pub mod cert;
pub mod complexity;
pub mod farkas;
pub mod fixtures;
pub mod generate;
pub mod graph;
pub mod json;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod ranking;
pub mod rat;
pub mod verify;

mod par;

pub use model::{LocId, MultiCycle, Path, TransId, Transition, Valuation, Vass, VassState};
pub use rat::{Int, Rat};
