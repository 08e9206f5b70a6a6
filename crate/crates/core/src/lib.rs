//! Discrete harmonic analysis on finite weighted graphs.
//!
//! The crate builds reversible Markov kernels from symmetric weights and computes the
//! objects that live on them: gradients, the square root of I − P and Riesz transforms,
//! square functions, maximal functions, Calderón–Zygmund decompositions, K-functionals,
//! and empirical best constants for the standard functional inequalities.

pub mod coefficients;
pub mod czd;
pub mod error;
pub mod functional;
pub mod graph;
pub mod lab;
pub mod operators;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
pub use graph::WeightedGraph;
pub use operators::{EdgeFunction, SpectralDecomposition, VertexFunction};
pub use report::{InequalityReport, Method, Verdict};
