//! Noisy simulation of distributed quantum circuits.
//!
//! Circuits are partitioned over nodes with [`NodeMap`]; every CNOT that
//! crosses a node boundary is replaced by a teleported CNOT using one Bell
//! pair between communication qubits. The engine runs the result exactly
//! (density matrices, one per classical record) or by trajectories.
//!
//! ```
//! use dqsim::{create_distributed_circuit, exact_distribution, Circuit, NodeMap};
//!
//! let mut c = Circuit::new(2, 2);
//! c.h(0).cx(0, 1).measure_all();
//! let nodes = NodeMap::new([("a", vec![0]), ("b", vec![1])]);
//! let d = create_distributed_circuit(&c, &nodes).unwrap();
//! assert_eq!(d.nonlocal_count, 1);
//! let p = exact_distribution(&d.circuit, None).unwrap();
//! assert!((p["00"] - 0.5).abs() < 1e-12 && (p["11"] - 0.5).abs() < 1e-12);
//! ```

pub mod bits;
pub mod circuit;
pub mod density;
pub mod error;
pub mod gates;
pub mod histogram;
mod kernel;
pub mod noise;
pub mod state;
pub mod engine;
pub mod synth;
pub mod dqc;
pub mod link;
pub mod algorithms;
pub mod dynamic;
pub mod ir;
pub mod experiments;

pub use circuit::{Circuit, Condition, Instruction, NoiseTag, Operation};
pub use density::DensityMatrix;
pub use dqc::{count_nonlocal, create_distributed_circuit, DistributedCircuit, GadgetRecord, NodeMap};
pub use engine::{exact_distribution, final_state, run, statevector, Backend, SimConfig, Simulator};
pub use error::{Error, Result};
pub use gates::{Matrix, C64};
pub use histogram::{total_variation, Distribution, Histogram};
pub use link::{LinkParams, LinkStats};
pub use noise::NoiseParams;
pub use state::StateVector;
