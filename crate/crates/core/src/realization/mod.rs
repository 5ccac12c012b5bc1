//! Isometric realizations of combs and the optimal trade-off network.

pub mod dilation;
pub mod optimal;

pub use dilation::{
    ancilla, ancilla_povm, compose, outcome_kraus, realize, recompose, recompose_with_effect, AncillaPovm,
    IsometryStage, RealizedNetwork,
};
pub use optimal::{kraus_of_outcome, kraus_via_dilation, r1_operators, v1, v2, R1Operators};
