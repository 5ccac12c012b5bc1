//! Quantum combs, their isometric realizations, and the information versus
//! disturbance trade-off for learning an unknown unitary.
//!
//! Operators live on labeled tensor factors ([`tensor`]); combs and the link
//! product are in [`comb`]; [`realization`] turns deterministic combs into
//! chains of isometries; [`tradeoff`] holds the covariant instrument and the
//! optimal curve; [`network`] simulates single runs of the optimal network.

pub mod comb;
pub mod error;
pub mod mc;
pub mod network;
pub mod realization;
pub mod serde_matrix;
pub mod tensor;
pub mod tradeoff;

pub use comb::{check_deterministic_comb, link, ChoiOperator, Comb, Ladder};
pub use error::{Error, Result};
pub use mc::{Estimate, McConfig};
pub use network::{Trajectory, TrajectoryEstimate};
pub use realization::{AncillaPovm, IsometryStage, RealizedNetwork};
pub use tensor::{CMat, CVec, LabeledMap, LabeledOperator, LabeledVector, SpaceLayout, C64};
pub use tradeoff::{CovariantInstrument, CurveBranch, FigureOfMeritOperators, OptimalSeed, TradeoffPoint};
