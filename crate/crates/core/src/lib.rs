//! Mixed-state stabilizer simulation of cross-entropy quantum causal influence
//! (XEQCI) in monitored Clifford circuits.

pub mod bgue;
pub mod circuit;
pub mod dual;
pub mod engine;
pub mod gates;
pub mod gf2;
pub mod mipt;
pub mod pauli;
pub mod state;

pub use circuit::{BoundaryConfig, CircuitInstance, CircuitSpec, GateSource, Region};
pub use engine::{estimate_chi, scan_landscape, LandscapeGrid, Method, TrialResult};
pub use gates::CliffordGate;
pub use pauli::PauliOperator;
pub use state::StabilizerState;
