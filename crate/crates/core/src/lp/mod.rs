//! Linear programming: a simplex core and its polytope applications.

pub mod polytope;
pub mod simplex;

pub use polytope::{
    guessing_probability_bound, local_membership, ns_constraints, ns_optimize, ns_program,
    GuessTarget, GuessingQuery, Membership, OutputFunction, RELAXATION_LABEL,
};
pub use simplex::{lp_solve, Constraint, Direction, LinearProgram, LpOutcome, Relation, VarBounds};
