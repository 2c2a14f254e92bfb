//! Closed-form results for the two-pattern CSBM and bound diagnostics.

pub mod bound;
pub mod posterior;
pub mod separability;

pub use bound::{bound_terms, epsilon_m, estimate_rho, estimate_sigma, term_a, term_b, term_r, BoundParams, BoundReport, SubgroupBound};
pub use posterior::{lemma1_check, lemma1_sweep, posterior, posterior_pair, Lemma1Check, PatternPair, SweepStats};
pub use separability::{misclassification_prob, separability_threshold};
