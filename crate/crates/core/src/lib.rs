//! Verification laboratory for the effective Hamiltonian of a tight-binding
//! chain with slowly varying hopping.
//!
//! * [`symexpr`] parses, differentiates, evaluates and canonicalizes scalar
//!   expressions over the coordinate `x`.
//! * [`diffop`] is the algebra of linear differential operators in normal form.
//! * [`hamiltonian`] builds the effective, von Roos and factor-triple forms and
//!   proves their identities exactly.
//! * [`lattice`] and [`spectral`] build the discrete chain and the
//!   discretized continuum operator and diagonalize both.
//! * [`cli`] drives the experiments from config files.

pub mod cli;
pub mod diffop;
pub mod hamiltonian;
pub mod lattice;
pub mod spectral;
pub mod symexpr;
