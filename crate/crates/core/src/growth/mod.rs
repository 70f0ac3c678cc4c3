//! Growth functions, submultiplicativity checks and the preorder `σ ⊑ σ′`.

mod compare;
mod function;
mod sampled;

pub use compare::{
    check_precedes, check_submultiplicative, class_key, compare_group_class, fit_almost_submultiplicative,
    search_witness, symbolic_compare, AlmostFit, ClassKey, Comparison, GrowthWitness, SubmultVerdict,
    LOG_TOLERANCE,
};
pub use function::{GrowthFunction, LogGrowth};
pub use sampled::SampledGrowth;
