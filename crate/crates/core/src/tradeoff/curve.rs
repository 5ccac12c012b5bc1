use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use serde::{Deserialize, Serialize};

use super::instrument::{
    check_dimension, constraint_residual, instrument_from_xy, lambda_ops, pairing_a, pairing_b, y_of_x,
};
use crate::error::{Error, Result};
use crate::tensor::herm_eig;

/// `(F, G) = (1 - (d²-2)x²/d², (2-y²)/d²)`.
pub fn analytic_fg(x: f64, y: f64, d: usize) -> (f64, f64) {
    let dd = (d * d) as f64;
    (1.0 - (dd - 2.0) * x * x / dd, (2.0 - y * y) / dd)
}

/// `I = d²G - 1`, `D = (1-F)/(1-2/d²)`.
pub fn info_disturbance(f: f64, g: f64, d: usize) -> Result<(f64, f64)> {
    check_dimension(d)?;
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::OutOfRange { what: "F", value: f });
    }
    if !(0.0..=1.0).contains(&g) {
        return Err(Error::OutOfRange { what: "G", value: g });
    }
    let dd = (d * d) as f64;
    Ok(((g - 1.0 / dd) * dd, (1.0 - f) / (1.0 - 2.0 / dd)))
}

/// `F' = (dF + 1)/(d + 1)`.
pub fn avg_pure_input_fidelity(f: f64, d: usize) -> f64 {
    let df = d as f64;
    (df * f + 1.0) / (df + 1.0)
}

/// Root of `d²(D-I)² = 4D(1-I)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveBranch {
    /// Minimum disturbance; the physically optimal frontier.
    #[default]
    Lower,
    Upper,
}

/// `d²(D-I)² - 4D(1-I)`.
pub fn curve_residual(info: f64, dist: f64, d: usize) -> f64 {
    let dd = (d * d) as f64;
    dd * (dist - info).powi(2) - 4.0 * dist * (1.0 - info)
}

pub fn curve_d_of_i(info: f64, d: usize) -> Result<f64> {
    curve_d_of_i_branch(info, d, CurveBranch::Lower)
}

pub fn curve_d_of_i_branch(info: f64, d: usize, branch: CurveBranch) -> Result<f64> {
    check_dimension(d)?;
    if !(0.0..=1.0).contains(&info) {
        return Err(Error::OutOfRange { what: "I", value: info });
    }
    let dd = (d * d) as f64;
    // d²D² - BD + d²I² = 0 with B = 2d²I + 4 - 4I
    let b = 2.0 * dd * info + 4.0 - 4.0 * info;
    let disc = (b * b - 4.0 * dd * dd * info * info).max(0.0).sqrt();
    Ok(match branch {
        // roots multiply to I²; dividing avoids cancellation in the small one
        CurveBranch::Lower if b + disc > 0.0 => 2.0 * dd * info * info / (b + disc),
        CurveBranch::Lower => 0.0,
        CurveBranch::Upper => (b + disc) / (2.0 * dd),
    })
}

/// One point of the optimal trade-off with every derived quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub d: usize,
    /// Weight of `Λ_G` in the optimized functional, when known.
    pub p: Option<f64>,
    pub x: f64,
    pub y: f64,
    pub f: f64,
    pub g: f64,
    pub info: f64,
    pub disturbance: f64,
}

impl TradeoffPoint {
    pub fn from_xy(x: f64, y: f64, d: usize) -> Result<Self> {
        let inst = instrument_from_xy(x, y, d)?;
        let (x, y) = (inst.x, inst.y);
        let (f, g) = analytic_fg(x, y, d);
        // I = 1 - y² and D = x² follow exactly from the definitions
        Ok(Self { d, p: None, x, y, f, g, info: 1.0 - y * y, disturbance: x * x })
    }

    pub fn from_x(x: f64, d: usize) -> Result<Self> {
        Self::from_xy(x, y_of_x(x, d)?, d)
    }

    /// Point on the lower branch with information `info`.
    pub fn from_info(info: f64, d: usize) -> Result<Self> {
        let dist = curve_d_of_i(info, d)?;
        let (x, y) = (dist.sqrt(), (1.0 - info).max(0.0).sqrt());
        let (f, g) = analytic_fg(x, y, d);
        instrument_from_xy(x, y, d)?;
        Ok(Self { d, p: None, x, y, f, g, info, disturbance: dist })
    }

    /// Maximizer of `pG + (1-p)F` from the reduced two-dimensional problem.
    pub fn from_p(p: f64, d: usize) -> Result<Self> {
        reduced_seed_for_p(p, d)
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    /// Fills in `p` from `(x, y)`.
    pub fn with_inferred_p(self) -> Self {
        let p = weight_for_xy(self.x, self.y, self.d);
        self.with_p(p)
    }

    pub fn curve_residual(&self) -> f64 {
        curve_residual(self.info, self.disturbance, self.d)
    }

    pub fn constraint_residual(&self) -> f64 {
        constraint_residual(self.x, self.y, self.d)
    }
}

/// Quadratic forms of `Λ_F`, `Λ_G` and the Gram matrix on `{|a⟩, |b⟩}`.
struct Reduced {
    h_f: Matrix2<f64>,
    h_g: Matrix2<f64>,
    gram: Matrix2<f64>,
}

impl Reduced {
    fn new(d: usize) -> Self {
        let d = d as f64;
        Self {
            h_f: Matrix2::new(2.0 / (d * d), 1.0 / d, 1.0 / d, 1.0),
            h_g: Matrix2::new(2.0 / (d * d), 2.0 / d.powi(3), 2.0 / d.powi(3), 1.0 / (d * d)),
            gram: Matrix2::new(d * d, d, d, d * d),
        }
    }

    fn h(&self, p: f64) -> Matrix2<f64> {
        self.h_g * p + self.h_f * (1.0 - p)
    }
}

/// Top generalized eigenpair of `H c = λ S c` for symmetric `H` and
/// positive definite `S`.
fn top_generalized(h: &Matrix2<f64>, s: &Matrix2<f64>) -> (f64, Vector2<f64>) {
    let l = s.cholesky().expect("Gram matrix of independent vectors").l();
    let li = l.try_inverse().expect("triangular factor is invertible");
    let c = li * h * li.transpose();
    let c = (c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let k = if eig.eigenvalues[0] >= eig.eigenvalues[1] { 0 } else { 1 };
    let v = li.transpose() * eig.eigenvectors.column(k);
    (eig.eigenvalues[k], v)
}

/// Normalizes `c` to `c·Sc = d²` with nonnegative entries.
fn to_xy(c: Vector2<f64>, gram: &Matrix2<f64>, d: usize) -> Result<(f64, f64)> {
    let mut c = c * ((d * d) as f64 / c.dot(&(gram * c))).sqrt();
    if c[0] + c[1] < 0.0 {
        c = -c;
    }
    let scale = c[0].abs().max(c[1].abs());
    for k in 0..2 {
        if c[k] < 0.0 {
            if c[k] < -1e-9 * scale {
                return Err(Error::OutOfRange { what: if k == 0 { "x" } else { "y" }, value: c[k] });
            }
            c[k] = 0.0;
        }
    }
    Ok((c[0], c[1]))
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange { what: "p", value: p });
    }
    Ok(())
}

/// Maximizer of `p Tr[Λ_G Ξ] + (1-p) Tr[Λ_F Ξ]` over `span{|a⟩, |b⟩}`.
pub fn reduced_seed_for_p(p: f64, d: usize) -> Result<TradeoffPoint> {
    check_dimension(d)?;
    check_p(p)?;
    let red = Reduced::new(d);
    let (_, c) = top_generalized(&red.h(p), &red.gram);
    let (x, y) = to_xy(c, &red.gram, d)?;
    Ok(TradeoffPoint::from_xy(x, y, d)?.with_p(p))
}

/// Weight `p` for which `(x, y)` is the optimal seed: the stationarity
/// condition `H(p)c ∥ Sc` is linear in `p`.
pub fn weight_for_xy(x: f64, y: f64, d: usize) -> f64 {
    let red = Reduced::new(d);
    let c = Vector2::new(x, y);
    let s = red.gram * c;
    let cross = |h: &Matrix2<f64>| {
        let hc = h * c;
        hc[0] * s[1] - hc[1] * s[0]
    };
    let f = cross(&red.h_f);
    let g = cross(&red.h_g);
    (-f / (g - f)).clamp(0.0, 1.0)
}

/// Result of the full `d⁴`-dimensional eigen-optimization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalSeed {
    pub point: TradeoffPoint,
    pub eigenvalue: f64,
    /// Dimension of the top eigenspace.
    pub multiplicity: usize,
    /// Largest weight of a unit span vector inside the top eigenspace.
    pub overlap: f64,
}

/// Eigenvalues within this relative distance of the maximum are degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Minimum accepted overlap between the top eigenspace and the span.
pub const SPAN_TOL: f64 = 1e-10;

/// Top eigenvector of `pΛ_G + (1-p)Λ_F` via the dense eigensolver,
/// located inside `span{|a⟩, |b⟩}`.
pub fn optimal_seed_for_p(p: f64, d: usize) -> Result<OptimalSeed> {
    check_p(p)?;
    let ops = lambda_ops(d)?;
    let m = ops.lambda_g.matrix().scale(p) + ops.lambda_f.matrix().scale(1.0 - p);
    let (values, vectors) = herm_eig(&m)?;
    let top = *values.last().expect("nonempty spectrum");
    let cutoff = top - DEGENERACY_TOL * top.abs().max(f64::MIN_POSITIVE);
    let idx: Vec<usize> = (0..values.len()).filter(|&k| values[k] >= cutoff).collect();
    let basis = [pairing_a(d), pairing_b(d)];
    // ⟨e_i|Π|e_j⟩ with Π the top-eigenspace projector
    let mut w = Matrix2::zeros();
    for &k in &idx {
        let v = vectors.column(k);
        let ov = [v.dotc(&basis[0]), v.dotc(&basis[1])];
        for i in 0..2 {
            for j in 0..2 {
                w[(i, j)] += (ov[i].conj() * ov[j]).re;
            }
        }
    }
    let red = Reduced::new(d);
    let (overlap, c) = top_generalized(&w, &red.gram);
    if overlap < 1.0 - SPAN_TOL {
        return Err(Error::OutsideSpan(overlap));
    }
    let (x, y) = to_xy(c, &red.gram, d)?;
    Ok(OptimalSeed {
        point: TradeoffPoint::from_xy(x, y, d)?.with_p(p),
        eigenvalue: top,
        multiplicity: idx.len(),
        overlap,
    })
}
