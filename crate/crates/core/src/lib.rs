//! Complex-weighted multiset automata.
//!
//! A weighted automaton `(λ, μ, ρ)` whose transition matrices commute assigns
//! the same weight to every ordering of its input, so it represents multisets.
//! This crate provides the matrix algebra for such automata, constructions for
//! approximating them by complex diagonal automata, sinusoidal position
//! encodings as diagonal automata, and a small trainable complex-diagonal
//! pooling model with its experiments.

pub mod algebra;
pub mod automaton;
pub mod diagonalize;
pub mod error;
pub mod examples;
pub mod learn;
pub mod linalg;
pub mod posenc;
pub mod seeds;

pub use automaton::{ComplexScalar, DiagonalAutomaton, Kind, Multiset, WeightedAutomaton};
pub use error::{Error, Result};
