//! Independent reference values: closed forms for the example losses, a
//! semi-infinite dual evaluator, a primal lower bound on a grid, and an exact
//! divergence witness.

pub mod catalog;
mod divergence;
mod fixtures;
mod grid;
mod reference;
mod semi_infinite;

pub use divergence::{divergence_witness, WitnessPoint};
pub use fixtures::{generate_fixtures, FixtureEntry, Fixtures, FIXTURE_TOLERANCE, REFERENCE_RADII};
pub use grid::{grid_primal_lower_bound, GridSearch};
pub use reference::{
    cases_for, golden_section, reference_case, reference_cases, reference_value, ReferenceCase,
    LINE_SEARCH_TOLERANCE,
};
pub use semi_infinite::semi_infinite_dual;
