//! Trajectory-level simulation of the optimal network: `V¹`, the unknown
//! unitary from wire 1 to wire 2, the Bell measurement and the feed-forward
//! `Û`.
//!
//! For a pure input the unnormalized conditional output is
//! `y U|ψ⟩ + x Tr[Û†U] Û|ψ⟩`, and its squared norm is the outcome density
//! with respect to the Haar measure.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{estimate, estimate_many, map_indexed, Estimate, McConfig};
use crate::realization::{kraus_of_outcome, v1};
use crate::tensor::{
    ensure_unitary, haar_unitary, random_pure_state, seeded_rng, CMat, CVec, LabeledMap, LabeledVector, SimRng,
    SpaceLayout, C64,
};
use crate::tradeoff::{gain_fidelity_g, instrument_from_xy};

fn check_inputs(psi: &CVec, u: &CMat, uhat: Option<&CMat>) -> Result<usize> {
    let d = psi.len();
    if u.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!("U is {:?} for a state of length {d}", u.shape())));
    }
    ensure_unitary(u, 1e-10)?;
    if let Some(uh) = uhat {
        if uh.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!("Û is {:?} for a state of length {d}", uh.shape())));
        }
        ensure_unitary(uh, 1e-10)?;
    }
    Ok(d)
}

/// `Tr[Û†U]`.
fn overlap(uhat: &CMat, u: &CMat) -> C64 {
    uhat.iter().zip(u.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// `y U|ψ⟩ + x Tr[Û†U] Û|ψ⟩`.
pub fn evolve_pure(psi: &CVec, u: &CMat, uhat: &CMat, x: f64, y: f64) -> Result<CVec> {
    let d = check_inputs(psi, u, Some(uhat))?;
    let inst = instrument_from_xy(x, y, d)?;
    Ok(closed_form(psi, u, uhat, inst.x, inst.y))
}

fn closed_form(psi: &CVec, u: &CMat, uhat: &CMat, x: f64, y: f64) -> CVec {
    (u * psi).scale(y) + (uhat * psi) * (overlap(uhat, u) * x)
}

/// State on wires `2, 1', 0'` after `V¹` and `U`.
pub fn joint_state(psi: &CVec, u: &CMat, x: f64, y: f64) -> Result<LabeledVector> {
    let d = check_inputs(psi, u, None)?;
    let stage = v1(x, y, d)?;
    let input = LabeledVector::new(psi.clone(), SpaceLayout::new([("0", d)])?)?;
    let after = stage.map.apply(&input)?;
    let channel = LabeledMap::new(u.clone(), SpaceLayout::new([("1", d)])?, SpaceLayout::new([("2", d)])?)?;
    channel.apply(&after)?.permute(&["2", "1'", "0'"])
}

/// [`evolve_pure`] through the network: `V¹`, then `U` on wire 1 → 2, then
/// `K_Û`.
pub fn evolve_pure_pipeline(psi: &CVec, u: &CMat, uhat: &CMat, x: f64, y: f64) -> Result<CVec> {
    let d = check_inputs(psi, u, Some(uhat))?;
    let state = joint_state(psi, u, x, y)?;
    let k = kraus_of_outcome(uhat, x, y, d)?;
    Ok(k.apply(&state)?.into_vector())
}

/// Rejection envelope `(y + xd)²` of the outcome density.
pub fn envelope(x: f64, y: f64, d: usize) -> f64 {
    (y + x * d as f64).powi(2)
}

/// One accepted outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub uhat: CMat,
    pub density: f64,
    /// Haar proposals drawn, including the accepted one.
    pub proposals: u64,
}

/// Rejection sampler for `Û` with Haar proposals and acceptance
/// `density / M`.
fn rejection<F>(d: usize, m: f64, rng: &mut SimRng, density: F) -> Result<Outcome>
where
    F: Fn(&CMat) -> f64,
{
    let mut proposals = 0;
    loop {
        proposals += 1;
        let uhat = haar_unitary(d, rng);
        let p = density(&uhat);
        if p > m * (1.0 + 1e-12) {
            return Err(Error::OutOfRange { what: "outcome density over envelope", value: p / m });
        }
        if rng.random::<f64>() * m < p {
            return Ok(Outcome { uhat, density: p, proposals });
        }
    }
}

/// Draws `Û` with density `‖y U|ψ⟩ + x Tr[Û†U] Û|ψ⟩‖²` against `dÛ`.
pub fn sample_outcome(psi: &CVec, u: &CMat, x: f64, y: f64, rng: &mut SimRng) -> Result<Outcome> {
    let d = check_inputs(psi, u, None)?;
    let inst = instrument_from_xy(x, y, d)?;
    rejection(d, envelope(inst.x, inst.y, d), rng, |uhat| closed_form(psi, u, uhat, inst.x, inst.y).norm_squared())
}

/// Outcome density for the maximally entangled input (equivalently `ρ = I/d`):
/// `y² + (x² + 2xy/d)|Tr[Û†U]|²`.
pub fn entangled_density(u: &CMat, uhat: &CMat, x: f64, y: f64) -> f64 {
    let d = u.nrows() as f64;
    y * y + (x * x + 2.0 * x * y / d) * overlap(uhat, u).norm_sqr()
}

/// Fidelity of the normalized conditional output with `|U⟩⟩/√d` for the
/// maximally entangled input: `|yd + x|Tr[Û†U]|²|² / (d² p)`.
pub fn entangled_fidelity(u: &CMat, uhat: &CMat, x: f64, y: f64) -> f64 {
    let d = u.nrows() as f64;
    let p = entangled_density(u, uhat, x, y);
    (y * d + x * overlap(uhat, u).norm_sqr()).powi(2) / (d * d * p)
}

/// One simulated run for a random pure input and a random unitary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub d: usize,
    pub x: f64,
    pub y: f64,
    pub seed: u64,
    pub index: usize,
    #[serde(with = "crate::serde_matrix::vector")]
    pub psi: CVec,
    #[serde(with = "crate::serde_matrix")]
    pub u: CMat,
    #[serde(with = "crate::serde_matrix")]
    pub uhat: CMat,
    /// State on wires `2, 1', 0'` before the measurement.
    #[serde(with = "crate::serde_matrix::vector")]
    pub joint_state: CVec,
    /// Unnormalized conditional output on wire 3.
    #[serde(with = "crate::serde_matrix::vector")]
    pub output: CVec,
    pub density: f64,
    pub gain: f64,
    /// `|⟨ψ|U† out⟩|² / ‖out‖²`.
    pub conditional_fidelity: f64,
    pub proposals: u64,
}

impl Trajectory {
    /// `‖output - (y U|ψ⟩ + x Tr[Û†U] Û|ψ⟩)‖`.
    pub fn formula_residual(&self) -> f64 {
        (&self.output - closed_form(&self.psi, &self.u, &self.uhat, self.x, self.y)).norm()
    }
}

fn conditional_fidelity(psi: &CVec, u: &CMat, out: &CVec) -> f64 {
    let ideal = u * psi;
    ideal.dotc(out).norm_sqr() / out.norm_squared()
}

/// Trajectory `index` of the run seeded by `seed`; the output is propagated
/// through the network, not the closed form.
pub fn run_trajectory(x: f64, y: f64, d: usize, seed: u64, index: usize, rng: &mut SimRng) -> Result<Trajectory> {
    let inst = instrument_from_xy(x, y, d)?;
    let psi = random_pure_state(d, rng);
    let u = haar_unitary(d, rng);
    let outcome = sample_outcome(&psi, &u, inst.x, inst.y, rng)?;
    let joint = joint_state(&psi, &u, inst.x, inst.y)?;
    let output = kraus_of_outcome(&outcome.uhat, inst.x, inst.y, d)?.apply(&joint)?.into_vector();
    Ok(Trajectory {
        d,
        x: inst.x,
        y: inst.y,
        seed,
        index,
        gain: gain_fidelity_g(&outcome.uhat, &u),
        conditional_fidelity: conditional_fidelity(&psi, &u, &output),
        density: outcome.density,
        proposals: outcome.proposals,
        joint_state: joint.into_vector(),
        output,
        psi,
        u,
        uhat: outcome.uhat,
    })
}

/// `count` independent trajectories; trajectory `i` uses stream `i` of `seed`.
pub fn trajectories(x: f64, y: f64, d: usize, count: usize, seed: u64) -> Result<Vec<Trajectory>> {
    map_indexed(count, seed, |i, rng| run_trajectory(x, y, d, seed, i, rng)).into_iter().collect()
}

/// Trajectory-level estimates of `F` and `G`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEstimate {
    pub f: Estimate,
    pub g: Estimate,
    /// Accepted outcomes per Haar proposal.
    pub acceptance_rate: f64,
}

/// Samples `U`, draws `Û` from the entangled-input density by rejection, and
/// averages the conditional channel fidelity and the gain.
pub fn estimate_fg_trajectories(x: f64, y: f64, d: usize, cfg: &McConfig) -> Result<TrajectoryEstimate> {
    let inst = instrument_from_xy(x, y, d)?;
    let (x, y) = (inst.x, inst.y);
    let m = envelope(x, y, d);
    let [f, g, n] = estimate_many(cfg, |rng| {
        let u = haar_unitary(d, rng);
        let o = rejection(d, m, rng, |uh| entangled_density(&u, uh, x, y)).expect("density bounded by envelope");
        [entangled_fidelity(&u, &o.uhat, x, y), gain_fidelity_g(&o.uhat, &u), o.proposals as f64]
    });
    Ok(TrajectoryEstimate { f, g, acceptance_rate: 1.0 / n.mean })
}

/// Mean fidelity over random pure inputs, `F′`, from sampled trajectories.
pub fn estimate_pure_fidelity(x: f64, y: f64, d: usize, cfg: &McConfig) -> Result<Estimate> {
    let inst = instrument_from_xy(x, y, d)?;
    let m = envelope(inst.x, inst.y, d);
    Ok(estimate(cfg, |rng| {
        let psi = random_pure_state(d, rng);
        let u = haar_unitary(d, rng);
        let o = rejection(d, m, rng, |uh| closed_form(&psi, &u, uh, inst.x, inst.y).norm_squared())
            .expect("density bounded by envelope");
        let out = closed_form(&psi, &u, &o.uhat, inst.x, inst.y);
        conditional_fidelity(&psi, &u, &out)
    }))
}

/// `∫dÛ ‖y U|ψ⟩ + x Tr[Û†U] Û|ψ⟩‖²` by Monte Carlo; equals 1.
pub fn outcome_normalization(psi: &CVec, u: &CMat, x: f64, y: f64, cfg: &McConfig) -> Result<Estimate> {
    let d = check_inputs(psi, u, None)?;
    let inst = instrument_from_xy(x, y, d)?;
    Ok(estimate(cfg, |rng| closed_form(psi, u, &haar_unitary(d, rng), inst.x, inst.y).norm_squared()))
}

/// Deterministic generator for a single trajectory, for callers outside the
/// batch runner.
pub fn trajectory_rng(seed: u64, index: usize) -> SimRng {
    seeded_rng(seed, index as u64)
}
