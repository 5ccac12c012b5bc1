//! Covariant instruments and the optimal information-disturbance curve.

pub mod curve;
pub mod estimate;
pub mod instrument;

pub use curve::{
    analytic_fg, avg_pure_input_fidelity, curve_d_of_i, curve_d_of_i_branch, curve_residual, info_disturbance,
    optimal_seed_for_p, reduced_seed_for_p, weight_for_xy, CurveBranch, OptimalSeed, TradeoffPoint,
};
pub use estimate::{mc_f, mc_g, mc_g_for_input, mc_lambda_f, mc_lambda_g, mc_r_total};
pub use instrument::{
    constraint_residual, gain_fidelity_g, instrument_from_xy, lambda_ops, max_entangled_projector, pairing_a,
    pairing_b, r_total, r_total_matrix, y_of_x, CovariantInstrument, FigureOfMeritOperators,
};
