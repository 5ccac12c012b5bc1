//! Choi operators, the link product, and comb normalization.
//!
//! Wires carry the labels `"0"`, `"1"`, ...; even wires are inputs and odd
//! wires outputs. Comb operators are stored with wires in descending order.

use crate::error::{Error, Result};
use crate::mc::{mean_matrix, McConfig};
use crate::tensor::{
    double_ket, haar_unitary, herm_eig, kron, max_abs, unitarity_defect, CMat, LabeledOperator, LabeledVector,
    PsdSpectrum, SpaceLayout, C64,
};

pub fn wire(k: usize) -> String {
    k.to_string()
}

/// Primed copy of wire `k`.
pub fn primed(k: usize) -> String {
    format!("{k}'")
}

/// Wires `n-1, ..., 0`, all of dimension `d`.
pub fn wire_layout(n: usize, d: usize) -> SpaceLayout {
    SpaceLayout::new((0..n).rev().map(|k| (wire(k), d))).expect("wire labels are distinct")
}

/// Labels `n-1, ..., 0`.
pub fn wire_labels(n: usize) -> Vec<String> {
    (0..n).rev().map(wire).collect()
}

/// Choi operator of a map from `in_label` to `out_label`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiOperator {
    op: LabeledOperator,
    out_label: String,
    in_label: String,
    channel: bool,
}

impl ChoiOperator {
    /// Checks positivity and sets the channel flag when `Tr_out = I_in`.
    pub fn new(op: LabeledOperator, out_label: &str, in_label: &str, tol: f64) -> Result<Self> {
        let op = op.permute(&[out_label, in_label])?;
        PsdSpectrum::new(op.matrix(), tol)?;
        let reduced = op.partial_trace(&[out_label])?;
        let n = reduced.dim();
        let channel = max_abs(&(reduced.matrix() - CMat::identity(n, n))) <= tol;
        Ok(Self { op, out_label: out_label.into(), in_label: in_label.into(), channel })
    }

    pub fn op(&self) -> &LabeledOperator {
        &self.op
    }

    pub fn into_op(self) -> LabeledOperator {
        self.op
    }

    pub fn out_label(&self) -> &str {
        &self.out_label
    }

    pub fn in_label(&self) -> &str {
        &self.in_label
    }

    pub fn is_channel(&self) -> bool {
        self.channel
    }
}

/// `|U⟩⟩⟨⟨U|` on `(out, in)`.
pub fn choi_of_unitary(u: &CMat, out_label: &str, in_label: &str) -> Result<ChoiOperator> {
    let defect = unitarity_defect(u);
    if defect > 1e-10 {
        return Err(Error::NotUnitary(defect));
    }
    let v = double_ket(u, out_label, in_label)?;
    ChoiOperator::new(LabeledOperator::projector(&v)?, out_label, in_label, 1e-10)
}

/// Link product `A * B = Tr_J[(A ⊗ I_L)(I_K ⊗ B^{T_J})]` over the
/// `connected` labels J. The result lists A's free factors, then B's.
pub fn link<S: AsRef<str>>(a: &LabeledOperator, b: &LabeledOperator, connected: &[S]) -> Result<LabeledOperator> {
    let joined: Vec<&str> = connected.iter().map(AsRef::as_ref).collect();
    for l in &joined {
        let (da, db) = (a.layout().dim_of(l)?, b.layout().dim_of(l)?);
        if da != db {
            return Err(Error::DimensionMismatch(format!("`{l}` is {da} in one operand and {db} in the other")));
        }
    }
    let free_a: Vec<&str> = a.layout().labels().filter(|l| !joined.contains(l)).collect();
    let free_b: Vec<&str> = b.layout().labels().filter(|l| !joined.contains(l)).collect();
    if let Some(l) = free_a.iter().find(|l| free_b.contains(l)) {
        return Err(Error::OverlappingLabel(l.to_string()));
    }
    let a = a.permute(&[free_a.as_slice(), joined.as_slice()].concat())?;
    let b = b.permute(&[joined.as_slice(), free_b.as_slice()].concat())?;
    let j: usize = joined.iter().map(|l| a.layout().dim_of(l).unwrap()).product();
    let k = a.dim() / j;
    let l = b.dim() / j;
    let layout = a
        .layout()
        .select(&(0..free_a.len()).collect::<Vec<_>>())
        .concat(&b.layout().select(&(joined.len()..b.layout().len()).collect::<Vec<_>>()))?;
    // result[(k,l),(k',l')] = Σ_{j,j'} A[(k,j),(k',j')] B[(j,l),(j',l')]
    let am = a.matrix();
    let bm = b.matrix();
    let a_r = CMat::from_fn(k * k, j * j, |r, c| am[((r / k) * j + c / j, (r % k) * j + c % j)]);
    let b_r = CMat::from_fn(j * j, l * l, |r, c| bm[((r / j) * l + c / l, (r % j) * l + c % l)]);
    let prod = a_r * b_r;
    let n = k * l;
    let matrix = CMat::from_fn(n, n, |r, c| {
        let (ka, la) = (r / l, r % l);
        let (kb, lb) = (c / l, c % l);
        prod[(ka * k + kb, la * l + lb)]
    });
    LabeledOperator::new(matrix, layout)
}

/// `Tr_in[C (I_out ⊗ ρᵀ)]`.
pub fn apply_channel(choi: &ChoiOperator, rho: &CMat) -> Result<CMat> {
    let din = choi.op().layout().dim_of(choi.in_label())?;
    if rho.nrows() != din || rho.ncols() != din {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, channel input has dimension {din}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let state = LabeledOperator::new(rho.clone(), SpaceLayout::new([(choi.in_label(), din)])?)?;
    Ok(link(choi.op(), &state, &[choi.in_label()])?.into_matrix())
}

/// Reduced combs `R⁽¹⁾, ..., R⁽ᴺ⁾` of a deterministic comb.
#[derive(Clone, Debug, PartialEq)]
pub struct Ladder {
    /// `levels[k-1] = R⁽ᵏ⁾` on wires `2k-1, ..., 0`.
    pub levels: Vec<LabeledOperator>,
    /// `‖Tr_{2k-1}[R⁽ᵏ⁾] - I_{2k-2} ⊗ R⁽ᵏ⁻¹⁾‖_F`, indexed like `levels`.
    pub residuals: Vec<f64>,
    /// `Tr[R⁽¹⁾] / d_0`.
    pub alpha: f64,
}

impl Ladder {
    pub fn teeth(&self) -> usize {
        self.levels.len()
    }

    /// `R⁽ᵏ⁾` for `1 <= k <= N`.
    pub fn level(&self, k: usize) -> &LabeledOperator {
        &self.levels[k - 1]
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

fn check_wires(op: &LabeledOperator, teeth: usize) -> Result<LabeledOperator> {
    if teeth == 0 || op.layout().len() != 2 * teeth {
        return Err(Error::DimensionMismatch(format!(
            "a {teeth}-tooth comb needs {} wires, got {}",
            2 * teeth,
            op.layout()
        )));
    }
    op.permute(&wire_labels(2 * teeth))
}

/// Walks the normalization ladder from `R⁽ᴺ⁾` down to `R⁽⁰⁾ = 1`. A violated
/// level is reported as [`Error::CombViolation`].
pub fn check_deterministic_comb(op: &LabeledOperator, teeth: usize, tol: f64) -> Result<Ladder> {
    let top = check_wires(op, teeth)?;
    let mut levels = vec![top];
    let mut residuals = vec![0.0; teeth];
    for k in (1..=teeth).rev() {
        let rk = levels.last().unwrap();
        let reduced = rk.partial_trace(&[wire(2 * k - 1)])?;
        let input = wire(2 * k - 2);
        let din = reduced.layout().dim_of(&input)?;
        let lower = if k == 1 {
            LabeledOperator::identity(SpaceLayout::empty())?
        } else {
            reduced.partial_trace(&[&input])?.scale(1.0 / din as f64)
        };
        let expected = LabeledOperator::identity(SpaceLayout::new([(input.as_str(), din)])?)?.kron(&lower)?;
        let residual = reduced.dist(&expected)?;
        residuals[k - 1] = residual;
        if residual.is_nan() || residual > tol {
            return Err(Error::CombViolation { level: k, residual });
        }
        if k > 1 {
            levels.push(lower);
        }
    }
    levels.reverse();
    let d0 = levels[0].layout().dim_of("0")?;
    let alpha = levels[0].trace().re / d0 as f64;
    Ok(Ladder { levels, residuals, alpha })
}

/// Positive operator on wires `2N-1, ..., 0`, with its ladder when known to
/// be deterministic.
#[derive(Clone, Debug, PartialEq)]
pub struct Comb {
    op: LabeledOperator,
    teeth: usize,
    ladder: Option<Ladder>,
}

impl Comb {
    pub fn new(op: LabeledOperator, teeth: usize) -> Result<Self> {
        Ok(Self { op: check_wires(&op, teeth)?, teeth, ladder: None })
    }

    /// Fails with [`Error::CombViolation`] unless the ladder closes within `tol`.
    pub fn deterministic(op: LabeledOperator, teeth: usize, tol: f64) -> Result<Self> {
        let ladder = check_deterministic_comb(&op, teeth, tol)?;
        let op = ladder.level(teeth).clone();
        Ok(Self { op, teeth, ladder: Some(ladder) })
    }

    pub fn op(&self) -> &LabeledOperator {
        &self.op
    }

    pub fn into_op(self) -> LabeledOperator {
        self.op
    }

    pub fn teeth(&self) -> usize {
        self.teeth
    }

    pub fn ladder(&self) -> Option<&Ladder> {
        self.ladder.as_ref()
    }
}

/// Whether `R - S` is positive semidefinite up to `tol` relative to `‖R‖`.
pub fn check_dominated(s: &LabeledOperator, r: &LabeledOperator, tol: f64) -> Result<bool> {
    let s = s.aligned_to(r.layout())?;
    let (values, _) = herm_eig(&(r.matrix() - s.matrix()))?;
    let (top, _) = herm_eig(r.matrix())?;
    let scale = top.last().map_or(1.0, |v| v.abs().max(1.0));
    Ok(values.first().is_none_or(|&min| min >= -tol * scale))
}

fn density_layout(d: usize) -> SpaceLayout {
    wire_layout(4, d)
}

fn check_unitary_pair(u: &CMat, rho: &CMat, d: usize) -> Result<()> {
    if u.shape() != (d, d) || rho.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "U is {:?} and rho {:?} for wires of dimension {d}",
            u.shape(),
            rho.shape()
        )));
    }
    Ok(())
}

/// `Tr[R_Û (I₃ ⊗ |U*⟩⟩⟨⟨U*|₂₁ ⊗ ρ*₀)]`.
pub fn outcome_density(r_uhat: &LabeledOperator, u: &CMat, rho: &CMat) -> Result<f64> {
    let d = r_uhat.layout().dim_of("0")?;
    check_unitary_pair(u, rho, d)?;
    let r = r_uhat.aligned_to(&density_layout(d))?;
    let uc = u.map(|z| z.conj());
    let vu = crate::tensor::vectorize(&uc)?;
    let x = kron(&kron(&CMat::identity(d, d), &(&vu * vu.adjoint())), &rho.map(|z| z.conj()));
    let probe = LabeledOperator::new(x, density_layout(d))?;
    Ok(r.trace_product(&probe)?.re)
}

/// [`outcome_density`] for `R_Û = |χ⟩⟨χ|`, in `O(d⁴)`.
pub fn outcome_density_rank_one(chi: &LabeledVector, u: &CMat, rho: &CMat) -> Result<f64> {
    let d = chi.layout().dim_of("0")?;
    check_unitary_pair(u, rho, d)?;
    let chi = chi.aligned_to(&density_layout(d))?;
    let v = chi.vector();
    // W[i3, i0] = Σ U[i2, i1] χ[i3, i2, i1, i0]
    let mut w = CMat::zeros(d, d);
    for i3 in 0..d {
        for i2 in 0..d {
            for i1 in 0..d {
                let uu = u[(i2, i1)];
                let base = ((i3 * d + i2) * d + i1) * d;
                for i0 in 0..d {
                    w[(i3, i0)] += uu * v[base + i0];
                }
            }
        }
    }
    Ok((&w * rho * w.adjoint()).trace().re)
}

/// Monte Carlo estimate of
/// `∫dV dW (V₃⊗V₂*⊗W₁⊗W₀*) R_{V†ÛW} (V₃⊗V₂*⊗W₁⊗W₀*)†`
/// for a family `R_·` on wires `3, 2, 1, 0` of dimension `d`.
pub fn twirl_comb<F>(family: F, uhat: &CMat, cfg: &McConfig) -> Result<LabeledOperator>
where
    F: Fn(&CMat) -> LabeledOperator + Sync,
{
    let d = uhat.nrows();
    let layout = density_layout(d);
    let probe = family(uhat).aligned_to(&layout)?;
    let n = probe.dim();
    let mean = mean_matrix(cfg, n, n, |rng| {
        let v = haar_unitary(d, rng);
        let w = haar_unitary(d, rng);
        let arg = v.adjoint() * uhat * &w;
        let r = family(&arg).aligned_to(&layout).expect("family keeps its layout");
        let a = kron(&kron(&v, &v.map(|z| z.conj())), &kron(&w, &w.map(|z| z.conj())));
        &a * r.matrix() * a.adjoint()
    });
    LabeledOperator::new(mean, layout)
}

/// Coefficients of `op` on the blocks `X₃₂ ⊗ Y₁₀` with `X, Y ∈ {P, I-P}`
/// (ordered PP, P(I-P), (I-P)P, (I-P)(I-P)) and the residual outside them.
pub fn four_block_projection(op: &LabeledOperator, d: usize) -> Result<([f64; 4], f64)> {
    let op = op.aligned_to(&density_layout(d))?;
    let p = crate::tensor::max_entangled("a", "b", d)?;
    let p = p.vector() * p.vector().adjoint() / C64::new(d as f64, 0.0);
    let q = CMat::identity(d * d, d * d) - &p;
    let blocks = [kron(&p, &p), kron(&p, &q), kron(&q, &p), kron(&q, &q)];
    let mut coeffs = [0.0; 4];
    let mut fit = CMat::zeros(op.dim(), op.dim());
    for (k, b) in blocks.iter().enumerate() {
        let c = (b * op.matrix()).trace().re / b.trace().re;
        coeffs[k] = c;
        fit += b.scale(c);
    }
    Ok((coeffs, crate::tensor::frobenius(&(op.matrix() - fit))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{c, frobenius, max_entangled, random_pure_state, real, seeded_rng, vectorize};
    use rand::Rng;

    fn random_density(d: usize, rng: &mut impl Rng) -> CMat {
        let g = CMat::from_fn(d, d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let rho = &g * g.adjoint();
        let t = rho.trace();
        rho / t
    }

    fn omega2(a: &str, b: &str, d: usize) -> LabeledOperator {
        LabeledOperator::projector(&max_entangled(a, b, d).unwrap()).unwrap()
    }

    #[test]
    fn choi_of_identity() {
        let choi = choi_of_unitary(&CMat::identity(3, 3), "1", "0").unwrap();
        assert_eq!(choi.op(), &omega2("1", "0", 3));
        assert!(choi.is_channel());
        assert_eq!(choi.op().partial_trace(&["1"]).unwrap().matrix(), &CMat::identity(3, 3));
    }

    #[test]
    fn choi_rejects_non_unitary() {
        let m = CMat::identity(2, 2).scale(2.0);
        assert!(matches!(choi_of_unitary(&m, "1", "0"), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn channel_flag_is_cleared_for_non_trace_preserving() {
        let op = omega2("1", "0", 2).scale(0.5);
        assert!(!ChoiOperator::new(op, "1", "0", 1e-10).unwrap().is_channel());
    }

    #[test]
    fn apply_channel_matches_conjugation() {
        let mut rng = seeded_rng(30, 0);
        for k in 0..50 {
            let d = 2 + k % 3;
            let u = haar_unitary(d, &mut rng);
            let rho = random_density(d, &mut rng);
            let out = apply_channel(&choi_of_unitary(&u, "1", "0").unwrap(), &rho).unwrap();
            assert!(max_abs(&(out - &u * &rho * u.adjoint())) <= 1e-12);
        }
    }

    #[test]
    fn apply_channel_basics() {
        let mut rng = seeded_rng(31, 0);
        let rho = random_density(3, &mut rng);
        let id = choi_of_unitary(&CMat::identity(3, 3), "1", "0").unwrap();
        assert!(max_abs(&(apply_channel(&id, &rho).unwrap() - &rho)) < 1e-15);
        let u = haar_unitary(3, &mut rng);
        let out = apply_channel(&choi_of_unitary(&u, "1", "0").unwrap(), &rho).unwrap();
        assert!((out.trace() - real(1.0)).norm() <= 1e-10);
        let (a, _) = herm_eig(&rho).unwrap();
        let (b, _) = herm_eig(&out).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(matches!(apply_channel(&id, &CMat::identity(2, 2)), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn link_composes_channels() {
        let mut rng = seeded_rng(32, 0);
        for d in 2..=3 {
            let e = haar_unitary(d, &mut rng);
            let f = haar_unitary(d, &mut rng);
            let ce = choi_of_unitary(&e, "1", "0").unwrap();
            let cf = choi_of_unitary(&f, "2", "1").unwrap();
            let linked = link(cf.op(), ce.op(), &["1"]).unwrap();
            assert_eq!(linked.layout(), &SpaceLayout::new([("2", d), ("0", d)]).unwrap());
            let expected = choi_of_unitary(&(&f * &e), "2", "0").unwrap();
            assert!(linked.dist(expected.op()).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn link_with_state_applies_channel() {
        let mut rng = seeded_rng(33, 0);
        let u = haar_unitary(2, &mut rng);
        let rho = random_density(2, &mut rng);
        let choi = choi_of_unitary(&u, "1", "0").unwrap();
        let state = LabeledOperator::new(rho.clone(), SpaceLayout::new([("0", 2)]).unwrap()).unwrap();
        let out = link(choi.op(), &state, &["0"]).unwrap();
        assert!(max_abs(&(out.matrix() - &u * rho * u.adjoint())) <= 1e-12);
    }

    #[test]
    fn link_without_connection_is_tensor_product() {
        let a = omega2("1", "0", 2);
        let b = omega2("3", "2", 2);
        assert_eq!(link::<&str>(&a, &b, &[]).unwrap(), a.kron(&b).unwrap());
    }

    #[test]
    fn link_errors() {
        let a = omega2("1", "0", 2);
        let b = omega2("1", "2", 3);
        assert!(matches!(link(&a, &b, &["1"]), Err(Error::DimensionMismatch(_))));
        let c = omega2("1", "5", 2);
        assert_eq!(link(&a, &c, &["5"]), Err(Error::UnknownLabel("5".into())));
        assert_eq!(link::<&str>(&a, &c, &[]), Err(Error::OverlappingLabel("1".into())));
    }

    fn random_psd(labels: &[&str], d: usize, rng: &mut impl Rng) -> LabeledOperator {
        let layout = SpaceLayout::uniform(labels, d).unwrap();
        let n = layout.total_dim();
        let g = CMat::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        LabeledOperator::new(&g * g.adjoint(), layout).unwrap()
    }

    #[test]
    fn link_is_commutative_and_associative() {
        let mut rng = seeded_rng(34, 0);
        for _ in 0..5 {
            let a = random_psd(&["a", "j"], 2, &mut rng);
            let b = random_psd(&["j", "k", "b"], 2, &mut rng);
            let cc = random_psd(&["k", "c"], 2, &mut rng);
            let ab = link(&a, &b, &["j"]).unwrap();
            let ba = link(&b, &a, &["j"]).unwrap();
            assert!(ab.dist(&ba).unwrap() < 1e-12);
            let left = link(&ab, &cc, &["k"]).unwrap();
            let right = link(&a, &link(&b, &cc, &["k"]).unwrap(), &["j"]).unwrap();
            assert!(left.dist(&right).unwrap() < 1e-11);
        }
    }

    #[test]
    fn ladder_of_two_identity_channels() {
        for d in 2..=3 {
            let r = omega2("3", "2", d).kron(&omega2("1", "0", d)).unwrap();
            let ladder = check_deterministic_comb(&r, 2, 1e-10).unwrap();
            assert_eq!(ladder.teeth(), 2);
            assert_eq!(ladder.max_residual(), 0.0);
            // R⁽¹⁾ = Tr_{3,2}[R]/d = |I⟩⟩⟨⟨I|₁₀
            assert!(ladder.level(1).dist(&omega2("1", "0", d)).unwrap() < 1e-14);
            assert!((ladder.alpha - 1.0).abs() < 1e-14);
            assert!((r.trace().re - (d * d) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn unitary_choi_is_a_one_tooth_comb() {
        let mut rng = seeded_rng(35, 0);
        let u = haar_unitary(3, &mut rng);
        let choi = choi_of_unitary(&u, "1", "0").unwrap();
        let comb = Comb::deterministic(choi.into_op(), 1, 1e-10).unwrap();
        assert!(comb.ladder().unwrap().max_residual() <= 1e-10);
        assert!((comb.op().trace().re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ladder_reports_violations() {
        let r = omega2("3", "2", 2).kron(&omega2("1", "0", 2)).unwrap().scale(2.0);
        assert!(matches!(check_deterministic_comb(&r, 2, 1e-10), Err(Error::CombViolation { level: 1, .. })));
        // wrong causal order: output 1 fed from wire 2
        let swapped = omega2("1", "2", 2).kron(&omega2("3", "0", 2)).unwrap();
        assert!(matches!(check_deterministic_comb(&swapped, 2, 1e-10), Err(Error::CombViolation { .. })));
        assert!(matches!(check_deterministic_comb(&r, 1, 1e-10), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn dominance() {
        let r = omega2("3", "2", 2).kron(&omega2("1", "0", 2)).unwrap();
        assert!(check_dominated(&r.scale(0.5), &r, 1e-10).unwrap());
        assert!(!check_dominated(&r.scale(2.0), &r, 1e-10).unwrap());
        let other = omega2("1", "0", 2);
        assert!(matches!(check_dominated(&other, &r, 1e-10), Err(Error::DimensionMismatch(_))));
    }

    fn density_by_link(r: &LabeledOperator, u: &CMat, rho: &CMat) -> f64 {
        let d = u.nrows();
        let cu = LabeledOperator::projector(&double_ket(u, "2", "1").unwrap()).unwrap();
        let state = LabeledOperator::new(rho.clone(), SpaceLayout::new([("0", d)]).unwrap()).unwrap();
        let out = link(&link(r, &cu, &["2", "1"]).unwrap(), &state, &["0"]).unwrap();
        out.trace().re
    }

    #[test]
    fn outcome_density_routes_agree() {
        let mut rng = seeded_rng(36, 0);
        for d in 2usize..=3 {
            for _ in 0..10 {
                let n = d.pow(4);
                let chi = LabeledVector::new(
                    crate::tensor::CVec::from_fn(n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)),
                    wire_layout(4, d),
                )
                .unwrap();
                let r = LabeledOperator::projector(&chi).unwrap();
                let u = haar_unitary(d, &mut rng);
                let psi = random_pure_state(d, &mut rng);
                let rho = &psi * psi.adjoint();
                let dense = outcome_density(&r, &u, &rho).unwrap();
                let fast = outcome_density_rank_one(&chi, &u, &rho).unwrap();
                let oracle = density_by_link(&r, &u, &rho);
                assert!((dense - oracle).abs() < 1e-12 * oracle.abs().max(1.0));
                assert!((fast - oracle).abs() < 1e-12 * oracle.abs().max(1.0));
                // layout order of the operand must not matter
                let shuffled = r.permute(&["1", "3", "0", "2"]).unwrap();
                assert!((outcome_density(&shuffled, &u, &rho).unwrap() - dense).abs() < 1e-12);
            }
        }
    }

    fn seed_xi(d: usize) -> LabeledOperator {
        // |I⟩⟩₃₀|I⟩⟩₂₁ + |I⟩⟩₃₂|I⟩⟩₁₀, invariant under V⊗V*⊗V⊗V*
        let a = max_entangled("3", "0", d).unwrap().kron(&max_entangled("2", "1", d).unwrap()).unwrap();
        let b = max_entangled("3", "2", d).unwrap().kron(&max_entangled("1", "0", d).unwrap()).unwrap();
        let chi = a.add(&b).unwrap().aligned_to(&wire_layout(4, d)).unwrap();
        LabeledOperator::projector(&chi).unwrap()
    }

    fn covariant_family(xi: &LabeledOperator, uhat: &CMat) -> LabeledOperator {
        let d = uhat.nrows();
        let id = CMat::identity(d, d);
        let a = kron(&kron(uhat, &uhat.map(|z| z.conj())), &kron(&id, &id));
        LabeledOperator::new(&a * xi.matrix() * a.adjoint(), xi.layout().clone()).unwrap()
    }

    const TWIRL_N: usize = 20_000;

    #[test]
    fn twirl_fixes_covariant_family() {
        let d = 2;
        let xi = seed_xi(d);
        let uhat = haar_unitary(d, &mut seeded_rng(37, 1));
        let target = covariant_family(&xi, &uhat);
        let tw = twirl_comb(|u| covariant_family(&xi, u), &uhat, &McConfig::new(200, 1)).unwrap();
        // exact for every sample, so the average is exact too
        assert!(tw.dist(&target).unwrap() < 1e-12);
    }

    fn random_rank_one(d: usize, seed: u64) -> LabeledOperator {
        let mut rng = seeded_rng(seed, 0);
        let n = d.pow(4);
        let v = crate::tensor::CVec::from_fn(n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        LabeledOperator::projector(&LabeledVector::new(v, wire_layout(4, d)).unwrap()).unwrap()
    }

    #[test]
    fn twirl_commutes_with_collective_rotation() {
        let d = 2;
        let r0 = random_rank_one(d, 38);
        let mut rng = seeded_rng(38, 1);
        // a genuinely Û-dependent, non-covariant family
        let fam = |u: &CMat| {
            let a = kron(&kron(u, &CMat::identity(d, d)), &CMat::identity(d * d, d * d));
            LabeledOperator::new(&a * r0.matrix() * a.adjoint(), r0.layout().clone()).unwrap()
        };
        let uhat = haar_unitary(d, &mut rng);
        let tw = twirl_comb(fam, &uhat, &McConfig::new(TWIRL_N, 2)).unwrap();
        let norm = frobenius(r0.matrix());
        for _ in 0..5 {
            let v = haar_unitary(d, &mut rng);
            let vc = v.map(|z| z.conj());
            let a = kron(&kron(&v, &vc), &kron(&v, &vc));
            let comm = &a * tw.matrix() - tw.matrix() * &a;
            assert!(frobenius(&comm) <= 20.0 * norm / (TWIRL_N as f64).sqrt(), "{}", frobenius(&comm));
        }
    }

    #[test]
    fn twirl_of_constant_rank_one_is_four_block() {
        let d = 2;
        let r0 = random_rank_one(d, 39);
        let tw = twirl_comb(|_| r0.clone(), &CMat::identity(d, d), &McConfig::new(TWIRL_N, 3)).unwrap();
        let (coeffs, residual) = four_block_projection(&tw, d).unwrap();
        let norm = frobenius(r0.matrix());
        assert!(residual <= 10.0 * norm / (TWIRL_N as f64).sqrt(), "{residual}");
        // coefficients are the block averages of the untwirled operator
        let (exact, _) = four_block_projection(&r0, d).unwrap();
        for k in 0..4 {
            assert!((coeffs[k] - exact[k]).abs() < 1e-10);
        }
        // and the untwirled operator is far from the block form
        assert!(four_block_projection(&r0, d).unwrap().1 > 100.0 * residual);
    }

    #[test]
    fn vectorized_unitary_matches_double_ket() {
        let u = haar_unitary(3, &mut seeded_rng(40, 0));
        assert_eq!(double_ket(&u, "1", "0").unwrap().vector(), &vectorize(&u).unwrap());
    }
}
