//! Labeled dense linear algebra: layouts, operators, maps, Haar sampling.

pub mod layout;
pub mod linalg;
pub mod operator;
pub mod random;

pub use layout::{Factor, SpaceLayout};
pub use linalg::{
    c, devectorize, ensure_unitary, frobenius, herm_eig, kron, max_abs, psd_power, real, unitarity_defect, vectorize,
    vectorize_rect, CMat, CVec, PsdExponent, PsdSpectrum, C64, RANK_TOL,
};
pub use operator::{
    double_ket, local, max_entangled, teleportation, teleportation_op, LabeledMap, LabeledOperator, LabeledVector,
};
pub use random::{haar_unitary, random_pure_state, seeded_rng, SimRng};

/// Largest square operator side held densely: d⁴ at d = 6.
pub const MAX_DIM: usize = 1296;
