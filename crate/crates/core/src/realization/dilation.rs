//! Isometric dilation of deterministic combs and the ancilla measurement of
//! generalized instruments.
//!
//! Stage `k` maps wire `2k-2` and ancilla `A{k-1}` to wire `2k-1` and ancilla
//! `A{k}`, where `A{k}` is the support of `R⁽ᵏ⁾*` written in the eigenbasis of
//! `R⁽ᵏ⁾*` (primed copies of wires `2k-1, ..., 0`). The stage is
//!
//! `W[(m,q),(j,p)] = M[q,(m,j,p)]`,  `M = (R⁽ᵏ⁾*)^{1/2} (I ⊗ I ⊗ R⁽ᵏ⁻¹⁾*)^{-1/2}`
//!
//! compressed to the two supports.

use serde::{Deserialize, Serialize};

use crate::comb::{primed, wire, wire_labels, Comb};
use crate::error::{Error, Result};
use crate::tensor::{
    frobenius, herm_eig, vectorize_rect, CMat, CVec, LabeledMap, LabeledOperator, LabeledVector, PsdExponent,
    PsdSpectrum, SpaceLayout, RANK_TOL,
};

/// Largest `‖V†V - I‖_F` accepted while realizing before reporting
/// [`Error::Singular`].
pub const SINGULAR_TOL: f64 = 1e-6;

/// Tolerance of the final ladder check in [`recompose`].
pub const RECOMPOSE_TOL: f64 = 1e-8;

pub fn ancilla(k: usize) -> String {
    format!("A{k}")
}

/// Primed copies of wires `n-1, ..., 0` with the given dimensions, most
/// significant first.
fn primed_layout(dims: &[usize]) -> SpaceLayout {
    let n = dims.len();
    SpaceLayout::new((0..n).map(|i| (primed(n - 1 - i), dims[i]))).expect("primed labels are distinct")
}

/// One isometric stage of a sequential network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsometryStage {
    /// Position in the chain, starting at 1.
    pub index: usize,
    pub map: LabeledMap,
    pub ancilla_in: SpaceLayout,
    pub ancilla_out: SpaceLayout,
    /// Projector onto the subspace of the input on which the stage is
    /// isometric; the full input when absent.
    #[serde(skip)]
    pub domain: Option<CMat>,
    /// Columns embed `ancilla_out` into primed wire space.
    #[serde(skip)]
    pub embedding: Option<LabeledMap>,
}

impl IsometryStage {
    /// Wraps a map with no ancilla on either side.
    pub fn plain(index: usize, map: LabeledMap) -> Self {
        Self {
            index,
            map,
            ancilla_in: SpaceLayout::empty(),
            ancilla_out: SpaceLayout::empty(),
            domain: None,
            embedding: None,
        }
    }

    pub fn ancilla_dim_in(&self) -> usize {
        self.ancilla_in.total_dim()
    }

    pub fn ancilla_dim_out(&self) -> usize {
        self.ancilla_out.total_dim()
    }

    /// `‖V†V - Q‖_F` with `Q` the domain projector.
    pub fn isometry_residual(&self) -> f64 {
        let v = self.map.matrix();
        let gram = v.adjoint() * v;
        let n = gram.nrows();
        match &self.domain {
            Some(q) => frobenius(&(gram - q)),
            None => frobenius(&(gram - CMat::identity(n, n))),
        }
    }

    /// `(I ⊗ ⟨η|_ancilla_out) V`.
    pub fn contract_ancilla(&self, eta: &CVec) -> Result<LabeledMap> {
        let anc: Vec<&str> = self.ancilla_out.labels().collect();
        let kept: Vec<&str> = self.map.output().labels().filter(|l| !anc.contains(l)).collect();
        let inputs: Vec<&str> = self.map.input().labels().collect();
        let order = [kept.as_slice(), anc.as_slice()].concat();
        let v = self.map.permute(&inputs, &order)?;
        let da = self.ancilla_out.total_dim();
        if eta.len() != da {
            return Err(Error::DimensionMismatch(format!(
                "effect of length {} on ancilla {}",
                eta.len(),
                self.ancilla_out
            )));
        }
        let dk = v.output().total_dim() / da;
        let m = v.matrix();
        let out = CMat::from_fn(dk, m.ncols(), |r, c| (0..da).map(|a| eta[a].conj() * m[(r * da + a, c)]).sum());
        let kept_layout = v.output().select(&(0..kept.len()).collect::<Vec<_>>());
        LabeledMap::new(out, v.input().clone(), kept_layout)
    }
}

/// Stages of a realized deterministic comb.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizedNetwork {
    pub stages: Vec<IsometryStage>,
}

impl RealizedNetwork {
    pub fn teeth(&self) -> usize {
        self.stages.len()
    }

    pub fn ancilla_dims(&self) -> Vec<usize> {
        self.stages.iter().map(IsometryStage::ancilla_dim_out).collect()
    }

    pub fn max_isometry_residual(&self) -> f64 {
        self.stages.iter().map(IsometryStage::isometry_residual).fold(0.0, f64::max)
    }

    pub fn recompose(&self) -> Result<Comb> {
        recompose(&self.stages)
    }
}

/// Realizes a deterministic comb as a chain of isometries.
pub fn realize(r: &Comb) -> Result<RealizedNetwork> {
    let ladder = match r.ladder() {
        Some(l) => l.clone(),
        None => crate::comb::check_deterministic_comb(r.op(), r.teeth(), 1e-8)?,
    };
    let n = r.teeth();
    let dims = r.op().layout().dims();
    // dims are listed for wires 2N-1, ..., 0
    let wire_dim = |w: usize| dims[2 * n - 1 - w];

    let mut prev_spec: Option<PsdSpectrum> = None;
    let mut stages = Vec::with_capacity(n);
    for k in 1..=n {
        let rk = ladder.level(k).matrix().map(|z| z.conj());
        let spec = PsdSpectrum::new(&rk, RANK_TOL)?;
        let ek = spec.support_basis();
        let sqrt_k = spec.power(PsdExponent::Sqrt);
        let (inv_prev, e_prev) = match &prev_spec {
            Some(s) => (s.power(PsdExponent::InvSqrt), s.support_basis()),
            None => (CMat::identity(1, 1), CMat::identity(1, 1)),
        };
        let (dout, din) = (wire_dim(2 * k - 1), wire_dim(2 * k - 2));
        let np = inv_prev.nrows();
        let m = sqrt_k * CMat::identity(dout * din, dout * din).kronecker(&inv_prev);
        let (rk_, rp) = (ek.ncols(), e_prev.ncols());
        let ek_adj = ek.adjoint();
        let mut v = CMat::zeros(dout * rk_, din * rp);
        for mo in 0..dout {
            for j in 0..din {
                let block = m.columns((mo * din + j) * np, np);
                let b = &ek_adj * block * &e_prev;
                v.view_mut((mo * rk_, j * rp), (rk_, rp)).copy_from(&b);
            }
        }
        let mut input = vec![(wire(2 * k - 2), din)];
        if k > 1 {
            input.push((ancilla(k - 1), rp));
        }
        let ancilla_in = if k > 1 { SpaceLayout::new([(ancilla(k - 1), rp)])? } else { SpaceLayout::empty() };
        let ancilla_out = SpaceLayout::new([(ancilla(k), rk_)])?;
        let map = LabeledMap::new(
            v,
            SpaceLayout::new(input)?,
            SpaceLayout::new([(wire(2 * k - 1), dout), (ancilla(k), rk_)])?,
        )?;
        let level_dims: Vec<usize> = (0..2 * k).rev().map(wire_dim).collect();
        let embedding = LabeledMap::new(ek, ancilla_out.clone(), primed_layout(&level_dims))?;
        let stage = IsometryStage { index: k, map, ancilla_in, ancilla_out, domain: None, embedding: Some(embedding) };
        if stage.isometry_residual() > SINGULAR_TOL {
            return Err(Error::Singular(k));
        }
        stages.push(stage);
        prev_spec = Some(spec);
    }
    Ok(RealizedNetwork { stages })
}

/// Chains the stages into one map from the input wires to the output wires
/// and the last ancilla.
pub fn compose(stages: &[IsometryStage]) -> Result<LabeledMap> {
    let mut net: Option<LabeledMap> = None;
    for (pos, s) in stages.iter().enumerate() {
        if s.index != pos + 1 {
            return Err(Error::ChainMismatch(format!("stage {} found at position {}", s.index, pos + 1)));
        }
        let anc: Vec<&str> = s.ancilla_in.labels().collect();
        net = Some(match net {
            None => {
                if !anc.is_empty() {
                    return Err(Error::ChainMismatch(format!("first stage expects ancilla {}", s.ancilla_in)));
                }
                s.map.clone()
            }
            Some(n) => {
                for f in s.ancilla_in.factors() {
                    match n.output().dim_of(&f.label) {
                        Ok(dim) if dim == f.dim => {}
                        _ => {
                            return Err(Error::ChainMismatch(format!(
                                "stage {} expects ancilla `{}` of dimension {}",
                                s.index, f.label, f.dim
                            )))
                        }
                    }
                }
                let fresh: Vec<usize> = s
                    .map
                    .input()
                    .factors()
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| !anc.contains(&f.label.as_str()))
                    .map(|(i, _)| i)
                    .collect();
                let fresh = s.map.input().select(&fresh);
                if let Some(l) = fresh.labels().find(|l| n.input().contains(l) || n.output().contains(l)) {
                    return Err(Error::ChainMismatch(format!("wire `{l}` of stage {} is already in use", s.index)));
                }
                let through: Vec<usize> = n
                    .output()
                    .factors()
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| !anc.contains(&f.label.as_str()))
                    .map(|(i, _)| i)
                    .collect();
                let through = n.output().select(&through);
                n.extend(&fresh)?.then(&s.map.extend(&through)?)?
            }
        });
    }
    net.ok_or_else(|| Error::ChainMismatch("no stages".into()))
}

fn wire_layout_of(net: &LabeledMap, anc: &SpaceLayout) -> Result<SpaceLayout> {
    let factors: Vec<_> = net
        .output()
        .factors()
        .iter()
        .chain(net.input().factors())
        .filter(|f| !anc.contains(&f.label))
        .cloned()
        .collect();
    let layout = SpaceLayout::from_factors(factors)?;
    let order = wire_labels(layout.len());
    Ok(layout.select(&layout.permutation_to(&order)?))
}

fn wire_count(net: &LabeledMap, anc: &SpaceLayout) -> Result<usize> {
    let n = net.input().len() + net.output().len() - anc.len();
    if !n.is_multiple_of(2) {
        return Err(Error::ChainMismatch(format!("{n} open wires")));
    }
    Ok(n / 2)
}

/// Choi operator of the chained stages with the last ancilla traced out.
pub fn recompose(stages: &[IsometryStage]) -> Result<Comb> {
    let net = compose(stages)?;
    let anc = &stages.last().expect("compose rejects an empty chain").ancilla_out;
    let labels: Vec<&str> = anc.labels().collect();
    let teeth = wire_count(&net, anc)?;
    let op = net.choi_traced(&labels)?.permute(&wire_labels(2 * teeth))?;
    Comb::deterministic(op, teeth, RECOMPOSE_TOL)
}

/// `Tr_A[C (I ⊗ P)]` for the network Choi `C` with the last ancilla `A`
/// kept: the probabilistic comb selected by the effect `P` on `A`.
pub fn recompose_with_effect(stages: &[IsometryStage], effect: &LabeledOperator) -> Result<LabeledOperator> {
    let net = compose(stages)?;
    let last = stages.last().expect("compose rejects an empty chain");
    let anc = &last.ancilla_out;
    let effect = effect.aligned_to(anc)?;
    let teeth = wire_count(&net, anc)?;
    let (values, vectors) = herm_eig(effect.matrix())?;
    let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut acc: Option<LabeledOperator> = None;
    for (k, &lambda) in values.iter().enumerate() {
        if lambda.abs() <= RANK_TOL * top {
            continue;
        }
        let f = vectors.column(k).into_owned();
        let tail = IsometryStage { map: net.clone(), ..last.clone() };
        let m = tail.contract_ancilla(&f)?;
        let layout = m.output().concat(m.input())?;
        let v = vectorize_rect(m.matrix());
        let term = LabeledOperator::new((&v * v.adjoint()).scale(lambda), layout)?;
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    match acc {
        Some(a) => a.permute(&wire_labels(2 * teeth)),
        None => LabeledOperator::zeros(wire_layout_of(&net, anc)?),
    }
}

/// Measurement on the last ancilla that splits a deterministic comb into a
/// generalized instrument: `P_i = (R*)^{-1/2} R_i* (R*)^{-1/2}` on `Supp(R*)`,
/// in the basis used by [`realize`].
#[derive(Clone, Debug)]
pub struct AncillaPovm {
    basis: CMat,
    inv_sqrt: CMat,
    support: CMat,
    layout: SpaceLayout,
    wires: Vec<String>,
}

/// Leakage of `R_i` outside `Supp(R)` tolerated relative to `‖R_i‖_F`.
pub const SUPPORT_TOL: f64 = 1e-8;

impl AncillaPovm {
    pub fn new(r_total: &Comb) -> Result<Self> {
        let wires = wire_labels(2 * r_total.teeth());
        let rc = r_total.op().permute(&wires)?.matrix().map(|z| z.conj());
        let spec = PsdSpectrum::new(&rc, RANK_TOL)?;
        let basis = spec.support_basis();
        let layout = SpaceLayout::new([(ancilla(r_total.teeth()), basis.ncols())])?;
        Ok(Self { inv_sqrt: spec.power(PsdExponent::InvSqrt), support: spec.support_projector(), basis, layout, wires })
    }

    /// Ancilla layout the elements act on.
    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    fn conj_checked(&self, m: &CMat) -> Result<CMat> {
        let c = m.map(|z| z.conj());
        let n = c.nrows();
        let leak = frobenius(&((CMat::identity(n, n) - &self.support) * &c));
        if leak > SUPPORT_TOL * frobenius(&c).max(1.0) {
            return Err(Error::SupportViolation(leak));
        }
        Ok(c)
    }

    /// POVM element of the outcome whose comb is `r_i`.
    pub fn element(&self, r_i: &LabeledOperator) -> Result<LabeledOperator> {
        let c = self.conj_checked(r_i.permute(&self.wires)?.matrix())?;
        let p = self.basis.adjoint() * &self.inv_sqrt * c * &self.inv_sqrt * &self.basis;
        LabeledOperator::new(p, self.layout.clone())
    }

    /// `|η⟩` with `|η⟩⟨η|` the element of the rank-one outcome `|χ⟩⟨χ|`.
    pub fn effect_vector(&self, chi: &LabeledVector) -> Result<CVec> {
        let v = chi.permute(&self.wires)?;
        let col = CMat::from_column_slice(v.vector().len(), 1, v.vector().as_slice());
        let chi_conj = self.conj_checked(&col)?;
        Ok((self.basis.adjoint() * (&self.inv_sqrt * chi_conj)).column(0).into_owned())
    }
}

/// Outcome-to-element map of [`AncillaPovm`] for a comb family.
pub fn ancilla_povm<'a, T, F>(family: F, r_total: &Comb) -> Result<impl Fn(&T) -> Result<LabeledOperator> + 'a>
where
    T: ?Sized,
    F: Fn(&T) -> LabeledOperator + 'a,
{
    let povm = AncillaPovm::new(r_total)?;
    Ok(move |outcome: &T| povm.element(&family(outcome)))
}

/// Kraus operator of the rank-one outcome `|χ⟩⟨χ|` on the last tooth of a
/// realized network: `(I ⊗ ⟨η|) V_N`, with the input ancilla re-expressed in
/// primed wire space.
pub fn outcome_kraus(network: &RealizedNetwork, povm: &AncillaPovm, chi: &LabeledVector) -> Result<LabeledMap> {
    let last = network.stages.last().ok_or_else(|| Error::ChainMismatch("no stages".into()))?;
    let k = last.contract_ancilla(&povm.effect_vector(chi)?)?;
    if last.index == 1 {
        return Ok(k);
    }
    let prev = &network.stages[last.index - 2];
    let emb = prev
        .embedding
        .as_ref()
        .ok_or_else(|| Error::ChainMismatch(format!("stage {} has no ancilla embedding", prev.index)))?;
    let wire_in: Vec<usize> = k
        .input()
        .factors()
        .iter()
        .enumerate()
        .filter(|(_, f)| !prev.ancilla_out.contains(&f.label))
        .map(|(i, _)| i)
        .collect();
    let wire_in = k.input().select(&wire_in);
    // V (I ⊗ E†) maps the primed space back onto the support coordinates
    let back = emb.adjoint().extend(&wire_in)?;
    let k = back.then(&k)?;
    let order: Vec<&str> = wire_in.labels().chain(emb.output().labels()).collect();
    let out: Vec<&str> = k.output().labels().collect();
    k.permute(&order, &out)
}
