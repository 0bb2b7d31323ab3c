//! Construction and verification of capacity-achieving multicast coding
//! schemes for linear deterministic relay networks: exact finite-field
//! linear algebra, cut capacities, per-destination unicast flows, inductive
//! coding-vector assignment (deterministic and randomized), extension-field
//! lifting for multi-round operation, and end-to-end simulation.

pub mod capacity;
pub mod cli;
pub mod flow;
pub mod gf;
pub mod multicast;
pub mod network;
pub mod rounds;
pub mod sim;
