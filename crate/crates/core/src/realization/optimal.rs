//! Closed-form stages of the optimal two-tooth network.
//!
//! The ancillas are kept in full primed wire space: `A₁ = 1'0'` and
//! `A₂ = 3'2'1'0'`. The second stage is isometric on `H₂ ⊗ Supp(R⁽¹⁾*)`.

use super::dilation::IsometryStage;
use crate::comb::{primed, wire};
use crate::error::{Error, Result};
use crate::tensor::{
    ensure_unitary, psd_power, real, CMat, CVec, LabeledMap, LabeledOperator, PsdExponent, SpaceLayout, RANK_TOL,
};
use crate::tradeoff::{instrument_from_xy, max_entangled_projector, r_total_matrix, CovariantInstrument};

/// `R⁽¹⁾` and its support-restricted square root and inverse square root on
/// wires 1, 0.
#[derive(Clone, Debug, PartialEq)]
pub struct R1Operators {
    pub r1: LabeledOperator,
    pub sqrt: LabeledOperator,
    pub inv_sqrt: LabeledOperator,
}

/// Whether the `x²/d` eigenvalue of `R⁽¹⁾` falls below the rank cutoff.
fn x_vanishes(inst: &CovariantInstrument) -> bool {
    let d = inst.d as f64;
    inst.x * inst.x <= RANK_TOL * (inst.x + d * inst.y).powi(2)
}

fn pair_layout(a: &str, b: &str, d: usize) -> SpaceLayout {
    SpaceLayout::new([(a, d), (b, d)]).expect("distinct labels")
}

/// `R⁽¹⁾ = ((x+dy)²/d) P + (x²/d)(I-P)`,
/// `(R⁽¹⁾)^{1/2} = (ydP + xI)/√d`,
/// `(R⁽¹⁾)^{-1/2} = √d (-yd/(x(x+yd)) P + I/x)`; only `P/(√d y)` survives at `x = 0`.
pub fn r1_operators(x: f64, y: f64, d: usize) -> Result<R1Operators> {
    let inst = instrument_from_xy(x, y, d)?;
    let (x, y) = (inst.x, inst.y);
    let df = d as f64;
    let sd = df.sqrt();
    let p = max_entangled_projector(d);
    let id = CMat::identity(d * d, d * d);
    let q = &id - &p;
    let r1 = p.scale((x + df * y).powi(2) / df) + q.scale(x * x / df);
    let sqrt = (p.scale(y * df) + id.scale(x)).scale(1.0 / sd);
    let inv_sqrt = if x_vanishes(&inst) {
        p.scale(1.0 / (sd * y))
    } else {
        (p.scale(-y * df / (x * (x + y * df))) + id.scale(1.0 / x)).scale(sd)
    };
    let layout = pair_layout("1", "0", d);
    Ok(R1Operators {
        r1: LabeledOperator::new(r1, layout.clone())?,
        sqrt: LabeledOperator::new(sqrt, layout.clone())?,
        inv_sqrt: LabeledOperator::new(inv_sqrt, layout)?,
    })
}

/// `V¹|ψ⟩ = (y/√d)|ψ⟩₁|I⟩⟩_{1'0'} + (x/√d)|I⟩⟩_{11'}|ψ⟩_{0'}`.
pub fn v1(x: f64, y: f64, d: usize) -> Result<IsometryStage> {
    let inst = instrument_from_xy(x, y, d)?;
    let sd = (d as f64).sqrt();
    let mut v = CMat::zeros(d * d * d, d);
    for j in 0..d {
        for a in 0..d {
            // rows (m, 1', 0')
            v[((j * d + a) * d + a, j)] += real(inst.y / sd);
            v[((a * d + a) * d + j, j)] += real(inst.x / sd);
        }
    }
    let ancilla_out = pair_layout(&primed(1), &primed(0), d);
    let map = LabeledMap::new(
        v,
        SpaceLayout::new([(wire(0), d)])?,
        SpaceLayout::new([(wire(1), d), (primed(1), d), (primed(0), d)])?,
    )?;
    Ok(IsometryStage { index: 1, map, ancilla_in: SpaceLayout::empty(), ancilla_out, domain: None, embedding: None })
}

/// `√R` for the averaged comb: `(x+yd) P⊗P + x/√(d²-1) (I-P)⊗(I-P)`.
fn r_total_sqrt(inst: &CovariantInstrument) -> CMat {
    let d = inst.d;
    let df = d as f64;
    let p = max_entangled_projector(d);
    let q = CMat::identity(d * d, d * d) - &p;
    let outer = if x_vanishes(inst) { 0.0 } else { inst.x / (df * df - 1.0).sqrt() };
    p.kronecker(&p).scale(inst.x + inst.y * df) + q.kronecker(&q).scale(outer)
}

/// `V²[(m,q),(j,p)] = M[q,(m,j,p)]` with
/// `M = (R*)^{1/2} (I₃₂ ⊗ (R⁽¹⁾*)^{-1/2})`, on `(2, 1', 0') → (3, 3', 2', 1', 0')`.
pub fn v2(x: f64, y: f64, d: usize) -> Result<IsometryStage> {
    let inst = instrument_from_xy(x, y, d)?;
    let ops = r1_operators(inst.x, inst.y, d)?;
    let n2 = d * d;
    let n4 = n2 * n2;
    let m = r_total_sqrt(&inst) * CMat::identity(n2, n2).kronecker(ops.inv_sqrt.matrix());
    let v = CMat::from_fn(d * n4, d * n2, |r, c| {
        let (mo, q) = (r / n4, r % n4);
        let (j, p) = (c / n2, c % n2);
        m[(q, (mo * d + j) * n2 + p)]
    });
    let support = ops.inv_sqrt.matrix() * ops.r1.matrix() * ops.inv_sqrt.matrix();
    let domain = CMat::identity(d, d).kronecker(&support);
    let ancilla_in = pair_layout(&primed(1), &primed(0), d);
    let ancilla_out = SpaceLayout::new((0..4).rev().map(|k| (primed(k), d)))?;
    let map = LabeledMap::new(
        v,
        SpaceLayout::new([(wire(2), d), (primed(1), d), (primed(0), d)])?,
        SpaceLayout::new([(wire(3), d)])?.concat(&ancilla_out)?,
    )?;
    Ok(IsometryStage { index: 2, map, ancilla_in, ancilla_out, domain: Some(domain), embedding: None })
}

fn check_outcome(uhat: &CMat, d: usize) -> Result<()> {
    if uhat.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!("outcome is {:?}, wires have dimension {d}", uhat.shape())));
    }
    ensure_unitary(uhat, 1e-10)
}

/// `K_Û = √d ⟨⟨Û|_{2,1'} ⊗ Û T_{3←0'}`:
/// `K[i3, (i2, i1', i0')] = √d conj(Û[i2, i1']) Û[i3, i0']`.
pub fn kraus_of_outcome(uhat: &CMat, x: f64, y: f64, d: usize) -> Result<LabeledMap> {
    instrument_from_xy(x, y, d)?;
    check_outcome(uhat, d)?;
    let sd = (d as f64).sqrt();
    let k = CMat::from_fn(d, d * d * d, |i3, c| {
        let (i2, i1, i0) = (c / (d * d), (c / d) % d, c % d);
        uhat[(i2, i1)].conj() * uhat[(i3, i0)] * sd
    });
    LabeledMap::new(
        k,
        SpaceLayout::new([(wire(2), d), (primed(1), d), (primed(0), d)])?,
        SpaceLayout::new([(wire(3), d)])?,
    )
}

/// `K_Û = (I₃ ⊗ ⟨η_Û|) V²` with `|η_Û⟩ = (R*)^{-1/2} |χ*_Û⟩`.
pub fn kraus_via_dilation(uhat: &CMat, x: f64, y: f64, d: usize) -> Result<LabeledMap> {
    let inst = instrument_from_xy(x, y, d)?;
    check_outcome(uhat, d)?;
    let inv = psd_power(&r_total_matrix(inst.x, inst.y, d), PsdExponent::InvSqrt, RANK_TOL)?;
    let chi: CVec = inst.chi_uhat(uhat).into_vector().map(|z| z.conj());
    let eta = inv * chi;
    v2(inst.x, inst.y, d)?.contract_ancilla(&eta)
}
