//! Exact computation on ordered abelian groups presented as finite
//! lexicographic products of archimedean components.
//!
//! The layers, bottom up: [`group`] (specs, elements, jump operators),
//! [`staircase`] (subgroup normal forms), [`invariants`] (regular jumps,
//! dp-rank), [`solver`] (congruence systems), [`syntax`] (formulas), [`qe`]
//! (quantifier elimination), [`patterns`], [`vcd`] and the brute-force
//! [`oracle`] used to cross-check everything else.

pub mod arith;
pub mod cli;
pub mod crosscheck;
pub mod error;
pub mod ext;
pub mod fuzz;
pub mod group;
pub mod invariants;
pub mod oracle;
pub mod patterns;
pub mod qe;
pub mod solver;
pub mod staircase;
pub mod syntax;
pub mod vcd;

pub use arith::Rational;
pub use error::{OagError, Result};
pub use ext::ExtNat;
pub use group::{
    ArchComponent, ConvexSubgroup, GroupElement, GroupSpec, Jump, PrimeDimProfile,
    RankOneRealization,
};
pub use staircase::StaircaseSubgroup;
