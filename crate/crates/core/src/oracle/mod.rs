//! Independent brute-force reference and the randomized theorem suites.

pub mod bridge;
pub mod documents;
pub mod generate;
pub mod reference;
pub mod suites;

pub use documents::gen_document;
pub use generate::{gen_disjoint_instance, gen_instance, gen_lemma2, gen_refinement, gen_satisfying_instance, Budget};
pub use suites::{run_suites, Record, Summary, Tally};
