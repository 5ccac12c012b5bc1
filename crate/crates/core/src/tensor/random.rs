//! Haar-distributed unitaries and pure states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::FRAC_1_SQRT_2;

use super::linalg::{c, CMat, CVec, C64};

/// Generator used by every sampler in the crate.
pub type SimRng = ChaCha8Rng;

/// Independent, reproducible stream `stream` of the generator seeded by `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// d×d matrix of i.i.d. standard complex Gaussians, E|z|² = 1.
pub fn ginibre<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let mut entries = Vec::with_capacity(d * d);
    for _ in 0..d * d {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        entries.push(c(re, im) * FRAC_1_SQRT_2);
    }
    CMat::from_row_slice(d, d, &entries)
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of `R`'s
/// diagonal moved back into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    assert!(d >= 1, "dimension must be positive");
    let (mut q, r) = ginibre(d, rng).qr().unpack();
    for k in 0..d {
        let rkk = r[(k, k)];
        let phase = if rkk.norm() > 0.0 { rkk / rkk.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// Uniformly distributed pure state: the first column of a Haar unitary.
pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    haar_unitary(d, rng).column(0).into_owned()
}
