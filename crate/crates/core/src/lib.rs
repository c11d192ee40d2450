//! State-vector simulation of measurement-assisted projection circuits for
//! nuclear-structure Hamiltonians.
pub mod circuit;
pub mod engine;
pub mod fusion;
pub mod hamiltonian;
pub mod linalg;
pub mod lcu;
pub mod projection;
