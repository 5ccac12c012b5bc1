use serde::{Deserialize, Serialize};

use crate::comb::{wire_layout, Comb};
use crate::error::{Error, Result};
use crate::tensor::{kron, real, CMat, CVec, LabeledOperator, LabeledVector, C64};

/// Supported dimensions of the estimated unitary.
pub const MIN_D: usize = 2;
pub const MAX_D: usize = 6;

/// Residuals up to this are rescaled away; larger ones are rejected.
pub const CONSTRAINT_RESCALE: f64 = 1e-6;

pub fn check_dimension(d: usize) -> Result<()> {
    if !(MIN_D..=MAX_D).contains(&d) {
        return Err(Error::OutOfRange { what: "d", value: d as f64 });
    }
    Ok(())
}

/// `x² + y² + 2xy/d - 1`.
pub fn constraint_residual(x: f64, y: f64, d: usize) -> f64 {
    x * x + y * y + 2.0 * x * y / d as f64 - 1.0
}

/// `y ≥ 0` completing `x` on the constraint.
pub fn y_of_x(x: f64, d: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange { what: "x", value: x });
    }
    let b = x / d as f64;
    Ok((b * b - x * x + 1.0).max(0.0).sqrt() - b)
}

/// `|I⟩⟩₃₀|I⟩⟩₂₁` (`pairing_a`) and `|I⟩⟩₃₂|I⟩⟩₁₀` (`pairing_b`) on wires 3, 2, 1, 0.
pub fn pairing_a(d: usize) -> CVec {
    chi_vector(1.0, 0.0, &CMat::identity(d, d))
}

pub fn pairing_b(d: usize) -> CVec {
    chi_vector(0.0, 1.0, &CMat::identity(d, d))
}

/// `x|Û⟩⟩₃₀|Û*⟩⟩₂₁ + y|I⟩⟩₃₂|I⟩⟩₁₀` on wires 3, 2, 1, 0.
fn chi_vector(x: f64, y: f64, uhat: &CMat) -> CVec {
    let d = uhat.nrows();
    let mut v = CVec::zeros(d.pow(4));
    for i3 in 0..d {
        for i2 in 0..d {
            for i1 in 0..d {
                for i0 in 0..d {
                    let mut z = uhat[(i3, i0)] * uhat[(i2, i1)].conj() * x;
                    if i3 == i2 && i1 == i0 {
                        z += y;
                    }
                    v[((i3 * d + i2) * d + i1) * d + i0] = z;
                }
            }
        }
    }
    v
}

/// Covariant instrument generated by the rank-one seed `Ξ = |χ⟩⟨χ|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovariantInstrument {
    pub d: usize,
    pub x: f64,
    pub y: f64,
}

impl CovariantInstrument {
    pub fn chi(&self) -> LabeledVector {
        self.chi_uhat(&CMat::identity(self.d, self.d))
    }

    /// `|χ_Û⟩ = x|Û⟩⟩₃₀|Û*⟩⟩₂₁ + y|I⟩⟩₃₂|I⟩⟩₁₀`.
    pub fn chi_uhat(&self, uhat: &CMat) -> LabeledVector {
        LabeledVector::new(chi_vector(self.x, self.y, uhat), wire_layout(4, self.d))
            .expect("length d⁴ matches the wire layout")
    }

    /// Seed `Ξ`.
    pub fn xi(&self) -> Result<LabeledOperator> {
        LabeledOperator::projector(&self.chi())
    }

    /// `R_Û = |χ_Û⟩⟨χ_Û|`.
    pub fn r_uhat(&self, uhat: &CMat) -> Result<LabeledOperator> {
        LabeledOperator::projector(&self.chi_uhat(uhat))
    }

    pub fn r_total(&self) -> Result<Comb> {
        r_total(self.x, self.y, self.d)
    }
}

/// Validates `(x, y)` and rescales residuals up to [`CONSTRAINT_RESCALE`].
pub fn instrument_from_xy(x: f64, y: f64, d: usize) -> Result<CovariantInstrument> {
    check_dimension(d)?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::OutOfRange { what: "x", value: x });
    }
    if y.is_nan() || y < 0.0 {
        return Err(Error::OutOfRange { what: "y", value: y });
    }
    let residual = constraint_residual(x, y, d);
    if residual.abs() > CONSTRAINT_RESCALE {
        return Err(Error::Constraint { x, y, residual });
    }
    let s = (1.0 + residual).sqrt();
    Ok(CovariantInstrument { d, x: x / s, y: y / s })
}

/// `P = |I⟩⟩⟨⟨I| / d` on two wires.
pub fn max_entangled_projector(d: usize) -> CMat {
    CMat::from_fn(
        d * d,
        d * d,
        |r, c| {
            if r % (d + 1) == 0 && c % (d + 1) == 0 {
                real(1.0 / d as f64)
            } else {
                real(0.0)
            }
        },
    )
}

/// `R = (x+yd)² P₃₂⊗P₁₀ + x²/(d²-1) (I-P)₃₂⊗(I-P)₁₀`.
pub fn r_total_matrix(x: f64, y: f64, d: usize) -> CMat {
    let p = max_entangled_projector(d);
    let q = CMat::identity(d * d, d * d) - &p;
    let df = d as f64;
    let a = (x + y * df).powi(2);
    let b = x * x / (df * df - 1.0);
    kron(&p, &p).scale(a) + kron(&q, &q).scale(b)
}

/// `∫dÛ R_Û`, checked as a deterministic 2-comb.
pub fn r_total(x: f64, y: f64, d: usize) -> Result<Comb> {
    let inst = instrument_from_xy(x, y, d)?;
    let op = LabeledOperator::new(r_total_matrix(inst.x, inst.y, d), wire_layout(4, d))?;
    Comb::deterministic(op, 2, 1e-10)
}

/// `|Tr[Û U†]|² / d²`.
pub fn gain_fidelity_g(uhat: &CMat, u: &CMat) -> f64 {
    let d = u.nrows() as f64;
    // Tr[Û U†] = Σ Û_ij conj(U_ij)
    let t: C64 = uhat.iter().zip(u.iter()).map(|(a, b)| a * b.conj()).sum();
    t.norm_sqr() / (d * d)
}

/// `Λ_F`, `Λ_G` on wires 3, 2, 1, 0 and the projector `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureOfMeritOperators {
    pub lambda_f: LabeledOperator,
    pub lambda_g: LabeledOperator,
    pub p: CMat,
}

pub fn lambda_ops(d: usize) -> Result<FigureOfMeritOperators> {
    check_dimension(d)?;
    let df = d as f64;
    let n = d * d;
    let p = max_entangled_projector(d);
    let id = CMat::identity(n, n);
    let norm = 1.0 / (df * df * (df * df - 1.0));
    let lf = (CMat::identity(n * n, n * n) + kron(&p, &p).scale(df * df) - kron(&p, &id) - kron(&id, &p)).scale(norm);
    let id1 = CMat::identity(d, d);
    let lg = (CMat::identity(n * n, n * n).scale(1.0 - 2.0 / (df * df)) + kron(&kron(&id1, &p), &id1)).scale(norm);
    Ok(FigureOfMeritOperators {
        lambda_f: LabeledOperator::new(lf, wire_layout(4, d))?,
        lambda_g: LabeledOperator::new(lg, wire_layout(4, d))?,
        p,
    })
}
