//! Monte Carlo estimators over the Haar measure.

use super::instrument::{gain_fidelity_g, instrument_from_xy, lambda_ops};
use crate::comb::{outcome_density_rank_one, wire_layout};
use crate::error::{Error, Result};
use crate::mc::{estimate, mean_matrix, Estimate, McConfig};
use crate::tensor::{haar_unitary, kron, max_abs, vectorize, CMat, CVec, LabeledOperator};

/// `|U⟩⟩₃₀|U*⟩⟩₂₁` on wires 3, 2, 1, 0.
fn probe_vector(u: &CMat) -> CVec {
    let d = u.nrows();
    let mut v = CVec::zeros(d.pow(4));
    for i3 in 0..d {
        for i2 in 0..d {
            for i1 in 0..d {
                for i0 in 0..d {
                    v[((i3 * d + i2) * d + i1) * d + i0] = u[(i3, i0)] * u[(i2, i1)].conj();
                }
            }
        }
    }
    v
}

/// `F = ∫dU d⁻² ⟨⟨U|⟨⟨U*| R |U⟩⟩|U*⟩⟩` with `R` held densely.
pub fn mc_f(x: f64, y: f64, d: usize, cfg: &McConfig) -> Result<Estimate> {
    let inst = instrument_from_xy(x, y, d)?;
    let r = inst.r_total()?.into_op();
    let dd = (d * d) as f64;
    Ok(estimate(cfg, |rng| {
        let v = probe_vector(&haar_unitary(d, rng));
        v.dotc(&(r.matrix() * &v)).re / dd
    }))
}

/// `G = ∫dU dÛ p(Û|U) g(Û, U)` with independent Haar `U`, `Û` and the
/// outcome density as importance weight, for the input `ρ = I/d`.
pub fn mc_g(x: f64, y: f64, d: usize, cfg: &McConfig) -> Result<Estimate> {
    let inst = instrument_from_xy(x, y, d)?;
    let rho = CMat::identity(d, d).scale(1.0 / d as f64);
    Ok(estimate(cfg, |rng| {
        let u = haar_unitary(d, rng);
        let uhat = haar_unitary(d, rng);
        let w = outcome_density_rank_one(&inst.chi_uhat(&uhat), &u, &rho).expect("shapes fixed by d");
        w * gain_fidelity_g(&uhat, &u)
    }))
}

/// [`mc_g`] for an explicit input state; only `I/d` is accepted.
pub fn mc_g_for_input(x: f64, y: f64, d: usize, rho: &CMat, cfg: &McConfig) -> Result<Estimate> {
    let mixed = CMat::identity(d, d).scale(1.0 / d as f64);
    if rho.shape() != (d, d) || max_abs(&(rho - mixed)) > 1e-12 {
        return Err(Error::UnsupportedInput);
    }
    mc_g(x, y, d, cfg)
}

/// Sample mean of `R_Û` over Haar `Û`.
pub fn mc_r_total(x: f64, y: f64, d: usize, cfg: &McConfig) -> Result<LabeledOperator> {
    let inst = instrument_from_xy(x, y, d)?;
    let n = d.pow(4);
    let mean = mean_matrix(cfg, n, n, |rng| {
        let chi = inst.chi_uhat(&haar_unitary(d, rng)).into_vector();
        &chi * chi.adjoint()
    });
    LabeledOperator::new(mean, wire_layout(4, d))
}

/// `d⁻² ∫dU |U⟩⟩⟨⟨U|₃₀ ⊗ |U*⟩⟩⟨⟨U*|₂₁`.
pub fn mc_lambda_f(d: usize, cfg: &McConfig) -> Result<LabeledOperator> {
    lambda_ops(d)?;
    let n = d.pow(4);
    let dd = (d * d) as f64;
    let mean = mean_matrix(cfg, n, n, |rng| {
        let v = probe_vector(&haar_unitary(d, rng));
        (&v * v.adjoint()).scale(1.0 / dd)
    });
    LabeledOperator::new(mean, wire_layout(4, d))
}

/// `d⁻³ I₃ ⊗ [∫dW |Tr W|² |W*⟩⟩⟨⟨W*|₂₁] ⊗ I₀`.
pub fn mc_lambda_g(d: usize, cfg: &McConfig) -> Result<LabeledOperator> {
    lambda_ops(d)?;
    let inner = mean_matrix(cfg, d * d, d * d, |rng| {
        let w = haar_unitary(d, rng);
        let v = vectorize(&w.map(|z| z.conj())).expect("square");
        (&v * v.adjoint()).scale(w.trace().norm_sqr())
    });
    let id = CMat::identity(d, d);
    let full = kron(&kron(&id, &inner), &id).scale(1.0 / (d as f64).powi(3));
    LabeledOperator::new(full, wire_layout(4, d))
}
