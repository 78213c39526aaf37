//! Kernel of the Calculus of Algebraic Constructions: terms, rewriting,
//! typing modulo user rules, and checkers for subject reduction, strong
//! normalization and logical consistency.

pub mod conditions;
pub mod reduction;
pub mod rules;
pub mod schema;
pub mod signature;
pub mod syntax;
pub mod term;
pub mod typing;
