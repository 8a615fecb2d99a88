//! Counterfactual decompositions (sequential, path-independent, Shapley) and
//! their application to changes in the share of educationally homogamous
//! couples.

pub mod cli;
pub mod decomp;
pub mod error;
pub mod ingest;
pub mod market;

pub use decomp::{
    compare_schemes, decompose, evaluate_corner, interaction_term, path_independent_decompose, sequential_decompose,
    shapley_decompose, Assignment, DecompositionResult, FactorScenario, OutcomeFunction, Scheme,
};
pub use error::{Error, Result};
