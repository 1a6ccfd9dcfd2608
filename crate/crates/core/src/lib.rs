pub mod catalog;
pub mod fci;
pub mod fcidump;
pub mod fermionic;
pub mod ml;
pub mod pauli;
pub mod qubit_features;
pub mod synthetic;
