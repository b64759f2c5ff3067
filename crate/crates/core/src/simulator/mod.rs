//! Direct numerical solvers used to cross-check the Mellin and asymptotic
//! results, plus diagnostics on the computed profiles.

pub mod diagnostics;
pub mod export;
pub mod grid;
pub mod growth_frag;
pub mod operator;
pub mod picard;
pub mod profiles;

pub use diagnostics::{dirac_diagnostics, linear_fit, support_boundaries, DiagnosticsReport, LinearFit};
pub use grid::{simulate_log_grid, GridConfig, LogGridSolution};
pub use growth_frag::growth_frag_transform;
pub use operator::FragmentationOperator;
pub use picard::{picard_solve, PicardGrid, PicardSolution};
pub use profiles::{rescaled_profiles, GridEvaluator, MellinEvaluator, SolutionEvaluator};
