use std::fmt;

use serde::{Deserialize, Serialize};

use super::layout::SpaceLayout;
use super::linalg::{frobenius, hermiticity_defect, real, CMat, CVec, C64};
use super::MAX_DIM;
use crate::error::{Error, Result};

fn check_labels_exist<S: AsRef<str>>(layout: &SpaceLayout, labels: &[S]) -> Result<Vec<usize>> {
    let positions = layout.positions(labels)?;
    for (k, p) in positions.iter().enumerate() {
        if positions[..k].contains(p) {
            return Err(Error::DuplicateLabel(labels[k].as_ref().to_string()));
        }
    }
    Ok(positions)
}

/// Square matrix acting on a labeled tensor-product space.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledOperator {
    matrix: CMat,
    layout: SpaceLayout,
}

impl LabeledOperator {
    pub fn new(matrix: CMat, layout: SpaceLayout) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        let n = layout.total_dim();
        if n > MAX_DIM {
            return Err(Error::TooLarge(n));
        }
        if matrix.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix side {} but layout {layout} has dimension {n}",
                matrix.nrows()
            )));
        }
        Ok(Self { matrix, layout })
    }

    pub fn identity(layout: SpaceLayout) -> Result<Self> {
        let n = layout.total_dim();
        Self::new(CMat::identity(n, n), layout)
    }

    pub fn zeros(layout: SpaceLayout) -> Result<Self> {
        let n = layout.total_dim();
        Self::new(CMat::zeros(n, n), layout)
    }

    /// Rank-one operator `|v⟩⟨v|`.
    pub fn projector(v: &LabeledVector) -> Result<Self> {
        Self::new(&v.vector * v.vector.adjoint(), v.layout.clone())
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    /// Entrywise complex conjugate in the computational basis.
    pub fn conj(&self) -> Self {
        Self { matrix: self.matrix.map(|z| z.conj()), layout: self.layout.clone() }
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), layout: self.layout.clone() }
    }

    pub fn transpose(&self) -> Self {
        Self { matrix: self.matrix.transpose(), layout: self.layout.clone() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { matrix: self.matrix.scale(s), layout: self.layout.clone() }
    }

    /// Same matrix with labels renamed through `(from, to)` pairs.
    pub fn relabel(&self, pairs: &[(&str, &str)]) -> Result<Self> {
        let factors = self
            .layout
            .factors()
            .iter()
            .map(|f| {
                let mut f = f.clone();
                if let Some((_, to)) = pairs.iter().find(|(from, _)| *from == f.label) {
                    f.label = to.to_string();
                }
                f
            })
            .collect();
        for (from, _) in pairs {
            if !self.layout.contains(from) {
                return Err(Error::UnknownLabel(from.to_string()));
            }
        }
        Ok(Self { matrix: self.matrix.clone(), layout: SpaceLayout::from_factors(factors)? })
    }

    /// `self ⊗ other`; labels must be disjoint.
    pub fn kron(&self, other: &LabeledOperator) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        Self::new(self.matrix.kronecker(&other.matrix), layout)
    }

    /// `self ⊗ I_extra`.
    pub fn extend(&self, extra: &SpaceLayout) -> Result<Self> {
        self.kron(&LabeledOperator::identity(extra.clone())?)
    }

    /// Reorders factors to `order`.
    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        let perm = self.layout.permutation_to(order)?;
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(self.clone());
        }
        let off = self.layout.offsets(&perm);
        let n = off.len();
        let matrix = CMat::from_fn(n, n, |i, j| self.matrix[(off[i], off[j])]);
        Ok(Self { matrix, layout: self.layout.select(&perm) })
    }

    /// Reorders factors to match `layout`, which must carry the same factors.
    pub fn aligned_to(&self, layout: &SpaceLayout) -> Result<Self> {
        if !self.layout.same_factors(layout) {
            return Err(Error::DimensionMismatch(format!("layouts {} and {layout} differ", self.layout)));
        }
        self.permute(&layout.labels().collect::<Vec<_>>())
    }

    pub fn partial_trace<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let traced = check_labels_exist(&self.layout, labels)?;
        let kept = self.layout.complement(&traced);
        let off_k = self.layout.offsets(&kept);
        let off_t = self.layout.offsets(&traced);
        let n = off_k.len();
        let matrix = CMat::from_fn(n, n, |i, j| off_t.iter().map(|&t| self.matrix[(off_k[i] + t, off_k[j] + t)]).sum());
        Ok(Self { matrix, layout: self.layout.select(&kept) })
    }

    pub fn partial_transpose<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let tp = check_labels_exist(&self.layout, labels)?;
        let kept = self.layout.complement(&tp);
        let off_k = self.layout.offsets(&kept);
        let off_t = self.layout.offsets(&tp);
        let mut matrix = CMat::zeros(self.dim(), self.dim());
        for &a in &off_k {
            for &b in &off_k {
                for &s in &off_t {
                    for &t in &off_t {
                        matrix[(a + s, b + t)] = self.matrix[(a + t, b + s)];
                    }
                }
            }
        }
        Ok(Self { matrix, layout: self.layout.clone() })
    }

    /// `self + other`, with `other` aligned to this layout.
    pub fn add(&self, other: &LabeledOperator) -> Result<Self> {
        let other = other.aligned_to(&self.layout)?;
        Ok(Self { matrix: &self.matrix + other.matrix, layout: self.layout.clone() })
    }

    /// Operator product `self · other` after aligning `other`.
    pub fn mul(&self, other: &LabeledOperator) -> Result<Self> {
        let other = other.aligned_to(&self.layout)?;
        Ok(Self { matrix: &self.matrix * other.matrix, layout: self.layout.clone() })
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, u: &LabeledOperator) -> Result<Self> {
        let u = u.aligned_to(&self.layout)?;
        Ok(Self { matrix: &u.matrix * &self.matrix * u.matrix.adjoint(), layout: self.layout.clone() })
    }

    /// Frobenius distance after aligning `other` to this layout.
    pub fn dist(&self, other: &LabeledOperator) -> Result<f64> {
        let other = other.aligned_to(&self.layout)?;
        Ok(frobenius(&(&self.matrix - other.matrix)))
    }

    /// `Tr[self · other]`.
    pub fn trace_product(&self, other: &LabeledOperator) -> Result<C64> {
        let other = other.aligned_to(&self.layout)?;
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix[(i, j)] * other.matrix[(j, i)];
            }
        }
        Ok(acc)
    }
}

impl fmt::Display for LabeledOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "operator on {}", self.layout)
    }
}

/// Vector in a labeled tensor-product space.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledVector {
    vector: CVec,
    layout: SpaceLayout,
}

impl LabeledVector {
    pub fn new(vector: CVec, layout: SpaceLayout) -> Result<Self> {
        if vector.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch(format!("vector of length {} on layout {layout}", vector.len())));
        }
        Ok(Self { vector, layout })
    }

    pub fn vector(&self) -> &CVec {
        &self.vector
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn into_vector(self) -> CVec {
        self.vector
    }

    pub fn norm(&self) -> f64 {
        self.vector.norm()
    }

    pub fn kron(&self, other: &LabeledVector) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        Self::new(self.vector.kronecker(&other.vector), layout)
    }

    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        let perm = self.layout.permutation_to(order)?;
        let off = self.layout.offsets(&perm);
        let vector = CVec::from_fn(off.len(), |i, _| self.vector[off[i]]);
        Ok(Self { vector, layout: self.layout.select(&perm) })
    }

    pub fn aligned_to(&self, layout: &SpaceLayout) -> Result<Self> {
        if !self.layout.same_factors(layout) {
            return Err(Error::DimensionMismatch(format!("layouts {} and {layout} differ", self.layout)));
        }
        self.permute(&layout.labels().collect::<Vec<_>>())
    }

    pub fn add(&self, other: &LabeledVector) -> Result<Self> {
        let other = other.aligned_to(&self.layout)?;
        Ok(Self { vector: &self.vector + other.vector, layout: self.layout.clone() })
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { vector: &self.vector * s, layout: self.layout.clone() }
    }

    pub fn conj(&self) -> Self {
        Self { vector: self.vector.map(|z| z.conj()), layout: self.layout.clone() }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &LabeledVector) -> Result<C64> {
        let other = other.aligned_to(&self.layout)?;
        Ok(self.vector.dotc(&other.vector))
    }
}

/// Rectangular map between two labeled spaces; rows index the output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledMap {
    #[serde(with = "crate::serde_matrix")]
    matrix: CMat,
    input: SpaceLayout,
    output: SpaceLayout,
}

impl LabeledMap {
    pub fn new(matrix: CMat, input: SpaceLayout, output: SpaceLayout) -> Result<Self> {
        if matrix.ncols() != input.total_dim() || matrix.nrows() != output.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for {input} -> {output}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix, input, output })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn input(&self) -> &SpaceLayout {
        &self.input
    }

    pub fn output(&self) -> &SpaceLayout {
        &self.output
    }

    /// `max |M†M - I|` over the input space.
    pub fn isometry_defect(&self) -> f64 {
        let n = self.matrix.ncols();
        (self.matrix.adjoint() * &self.matrix - CMat::identity(n, n)).camax()
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), input: self.output.clone(), output: self.input.clone() }
    }

    /// Reorders input and output factors.
    pub fn permute<S: AsRef<str>, T: AsRef<str>>(&self, input: &[S], output: &[T]) -> Result<Self> {
        let pin = self.input.permutation_to(input)?;
        let pout = self.output.permutation_to(output)?;
        let oin = self.input.offsets(&pin);
        let oout = self.output.offsets(&pout);
        let matrix = CMat::from_fn(oout.len(), oin.len(), |i, j| self.matrix[(oout[i], oin[j])]);
        Ok(Self { matrix, input: self.input.select(&pin), output: self.output.select(&pout) })
    }

    /// `self ⊗ I_extra` on both sides.
    pub fn extend(&self, extra: &SpaceLayout) -> Result<Self> {
        let n = extra.total_dim();
        Self::new(self.matrix.kronecker(&CMat::identity(n, n)), self.input.concat(extra)?, self.output.concat(extra)?)
    }

    /// `after ∘ self`; the output of `self` must match the input of `after`
    /// up to factor order.
    pub fn then(&self, after: &LabeledMap) -> Result<Self> {
        if !self.output.same_factors(&after.input) {
            return Err(Error::ChainMismatch(format!("cannot feed {} into {}", self.output, after.input)));
        }
        let inputs: Vec<&str> = self.output.labels().collect();
        let outputs: Vec<&str> = after.output.labels().collect();
        let after = after.permute(&inputs, &outputs)?;
        Self::new(&after.matrix * &self.matrix, self.input.clone(), after.output)
    }

    /// Applies the map to the factors of `v` named by the map's input; the
    /// result carries the map's output factors followed by the untouched ones.
    pub fn apply(&self, v: &LabeledVector) -> Result<LabeledVector> {
        let inputs: Vec<&str> = self.input.labels().collect();
        for f in self.input.factors() {
            if v.layout().dim_of(&f.label)? != f.dim {
                return Err(Error::DimensionMismatch(format!("factor `{}`", f.label)));
            }
        }
        let in_pos = v.layout().positions(&inputs)?;
        let rest = v.layout().complement(&in_pos);
        let mut order = inputs.clone();
        order.extend(rest.iter().map(|&p| v.layout().factors()[p].label.as_str()));
        let v = v.permute(&order)?;
        let din = self.input.total_dim();
        let drest = v.vector().len() / din;
        let block = CMat::from_row_slice(din, drest, v.vector().as_slice());
        let out = &self.matrix * block;
        let dout = out.nrows();
        let vector = CVec::from_fn(dout * drest, |k, _| out[(k / drest, k % drest)]);
        let rest_layout = v.layout().select(&(self.input.len()..v.layout().len()).collect::<Vec<_>>());
        let layout = self.output.concat(&rest_layout)?;
        LabeledVector::new(vector, layout)
    }

    /// Choi operator `|M⟩⟩⟨⟨M|` on output ⊗ input with the output factors in
    /// `traced` summed out.
    pub fn choi_traced<S: AsRef<str>>(&self, traced: &[S]) -> Result<LabeledOperator> {
        let pos = check_labels_exist(&self.output, traced)?;
        let kept = self.output.complement(&pos);
        let off_k = self.output.offsets(&kept);
        let off_t = self.output.offsets(&pos);
        let din = self.input.total_dim();
        let layout = self.output.select(&kept).concat(&self.input)?;
        let n = off_k.len() * din;
        if n > MAX_DIM {
            return Err(Error::TooLarge(n));
        }
        let mut out = CMat::zeros(n, n);
        for &t in &off_t {
            let v = CVec::from_fn(n, |k, _| self.matrix[(off_k[k / din] + t, k % din)]);
            out += &v * v.adjoint();
        }
        LabeledOperator::new(out, layout)
    }

    pub fn choi(&self) -> Result<LabeledOperator> {
        self.choi_traced::<&str>(&[])
    }
}

/// `T = Σ_k |k⟩_to ⟨k|_from`.
pub fn teleportation_op(from: &SpaceLayout, to: &SpaceLayout) -> Result<LabeledMap> {
    if from.total_dim() != to.total_dim() {
        return Err(Error::DimensionMismatch(format!("cannot teleport {from} onto {to}")));
    }
    let n = from.total_dim();
    LabeledMap::new(CMat::identity(n, n), from.clone(), to.clone())
}

/// Single-factor convenience form of [`teleportation_op`].
pub fn teleportation(from: &str, to: &str, d: usize) -> Result<LabeledMap> {
    teleportation_op(&SpaceLayout::new([(from, d)])?, &SpaceLayout::new([(to, d)])?)
}

/// `|I⟩⟩` on two factors of dimension `d`.
pub fn max_entangled(a: &str, b: &str, d: usize) -> Result<LabeledVector> {
    let mut v = CVec::zeros(d * d);
    for k in 0..d {
        v[k * d + k] = real(1.0);
    }
    LabeledVector::new(v, SpaceLayout::new([(a, d), (b, d)])?)
}

/// `|A⟩⟩` on `(out, in)`.
pub fn double_ket(a: &CMat, out: &str, inp: &str) -> Result<LabeledVector> {
    LabeledVector::new(super::linalg::vectorize_rect(a), SpaceLayout::new([(out, a.nrows()), (inp, a.ncols())])?)
}

/// Single-factor operator.
pub fn local(a: &CMat, label: &str) -> Result<LabeledOperator> {
    LabeledOperator::new(a.clone(), SpaceLayout::new([(label, a.nrows())])?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::linalg::{c, kron, max_abs, vectorize};
    use crate::tensor::random::{haar_unitary, seeded_rng};
    use proptest::prelude::*;
    use rand::Rng;

    fn random_matrix(n: usize, rng: &mut impl Rng) -> CMat {
        CMat::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    fn lay(spec: &[(&str, usize)]) -> SpaceLayout {
        SpaceLayout::new(spec.iter().copied()).unwrap()
    }

    fn omega_op(a: &str, b: &str, d: usize) -> LabeledOperator {
        LabeledOperator::projector(&max_entangled(a, b, d).unwrap()).unwrap()
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(LabeledOperator::new(CMat::zeros(2, 3), lay(&[("a", 2)])), Err(Error::NotSquare { .. })));
        assert!(matches!(LabeledOperator::new(CMat::zeros(3, 3), lay(&[("a", 2)])), Err(Error::DimensionMismatch(_))));
        assert_eq!(
            LabeledOperator::zeros(SpaceLayout::uniform(&["a", "b", "c", "d", "e"], 6).unwrap()),
            Err(Error::TooLarge(7776))
        );
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = seeded_rng(20, 0);
        let a = random_matrix(2, &mut rng);
        let b = random_matrix(3, &mut rng);
        let ab = local(&a, "a").unwrap().kron(&local(&b, "b").unwrap()).unwrap();
        let ta = ab.partial_trace(&["b"]).unwrap();
        assert_eq!(ta.layout(), &lay(&[("a", 2)]));
        assert!(max_abs(&(ta.matrix() - a.clone() * b.trace())) < 1e-14);
        let tb = ab.partial_trace(&["a"]).unwrap();
        assert!(max_abs(&(tb.matrix() - b.clone() * a.trace())) < 1e-14);
        let all = ab.partial_trace(&["b", "a"]).unwrap();
        assert_eq!(all.dim(), 1);
        assert!((all.matrix()[(0, 0)] - ab.trace()).norm() < 1e-14);
    }

    #[test]
    fn partial_trace_of_max_entangled() {
        for d in 2..=4 {
            let t = omega_op("a", "b", d).partial_trace(&["a"]).unwrap();
            assert_eq!(t.layout(), &lay(&[("b", d)]));
            assert_eq!(t.matrix(), &CMat::identity(d, d));
        }
    }

    #[test]
    fn partial_trace_unknown_label() {
        assert_eq!(omega_op("a", "b", 2).partial_trace(&["z"]), Err(Error::UnknownLabel("z".into())));
    }

    #[test]
    fn partial_transpose_cases() {
        let mut rng = seeded_rng(21, 0);
        let m = random_matrix(6, &mut rng);
        let op = LabeledOperator::new(m.clone(), lay(&[("a", 2), ("b", 3)])).unwrap();
        assert_eq!(op.partial_transpose(&["a", "b"]).unwrap().matrix(), &m.transpose());
        assert_eq!(op.partial_transpose(&["b"]).unwrap().partial_transpose(&["b"]).unwrap(), op);
        assert!(matches!(op.partial_transpose(&["q"]), Err(Error::UnknownLabel(_))));
        // |I⟩⟩⟨⟨I|^{T_b} is the swap
        for d in 2..=4 {
            let swap = CMat::from_fn(d * d, d * d, |r, s| {
                let (i, j) = (r / d, r % d);
                let (k, l) = (s / d, s % d);
                if i == l && j == k {
                    real(1.0)
                } else {
                    real(0.0)
                }
            });
            assert_eq!(omega_op("a", "b", d).partial_transpose(&["b"]).unwrap().matrix(), &swap);
        }
    }

    #[test]
    fn permutation_cases() {
        let mut rng = seeded_rng(22, 0);
        let a = random_matrix(2, &mut rng);
        let b = random_matrix(3, &mut rng);
        let ab = local(&a, "a").unwrap().kron(&local(&b, "b").unwrap()).unwrap();
        assert_eq!(ab.permute(&["a", "b"]).unwrap(), ab);
        let ba = ab.permute(&["b", "a"]).unwrap();
        assert_eq!(ba.layout(), &lay(&[("b", 3), ("a", 2)]));
        assert!(max_abs(&(ba.matrix() - kron(&b, &a))) < 1e-15);
        assert_eq!(ab.permute(&["a", "a"]), Err(Error::NotAPermutation));
    }

    #[test]
    fn teleportation_cases() {
        let t = teleportation("b", "a", 3).unwrap();
        assert_eq!(t.isometry_defect(), 0.0);
        for j in 0..3 {
            let mut e = CVec::zeros(3);
            e[j] = real(1.0);
            let out = t.apply(&LabeledVector::new(e.clone(), lay(&[("b", 3)])).unwrap()).unwrap();
            assert_eq!(out.layout(), &lay(&[("a", 3)]));
            assert_eq!(out.vector(), &e);
        }
        let tcb = teleportation("c", "b", 3).unwrap();
        let composed = tcb.then(&t).unwrap();
        assert_eq!(composed, teleportation("c", "a", 3).unwrap());
        assert!(matches!(teleportation_op(&lay(&[("a", 2)]), &lay(&[("b", 3)])), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn map_apply_matches_kron() {
        let mut rng = seeded_rng(23, 0);
        let u = haar_unitary(2, &mut rng);
        let m = LabeledMap::new(u.clone(), lay(&[("b", 2)]), lay(&[("c", 2)])).unwrap();
        let v = CVec::from_fn(8, |_, _| c(rng.random::<f64>(), rng.random::<f64>()));
        let lv = LabeledVector::new(v.clone(), lay(&[("a", 2), ("b", 2), ("z", 2)])).unwrap();
        let out = m.apply(&lv).unwrap();
        assert_eq!(out.layout(), &lay(&[("c", 2), ("a", 2), ("z", 2)]));
        let id = CMat::identity(2, 2);
        let expected = LabeledVector::new(kron(&kron(&id, &u), &id) * v, lay(&[("a", 2), ("c", 2), ("z", 2)])).unwrap();
        let diff = out.aligned_to(expected.layout()).unwrap().vector() - expected.vector();
        assert!(diff.camax() < 1e-14);
    }

    #[test]
    fn choi_of_map_is_double_ket_projector() {
        let mut rng = seeded_rng(24, 0);
        let u = haar_unitary(3, &mut rng);
        let m = LabeledMap::new(u.clone(), lay(&[("in", 3)]), lay(&[("out", 3)])).unwrap();
        let choi = m.choi().unwrap();
        let v = vectorize(&u).unwrap();
        assert!(max_abs(&(choi.matrix() - &v * v.adjoint())) < 1e-14);
        assert_eq!(choi.layout(), &lay(&[("out", 3), ("in", 3)]));
    }

    #[test]
    fn choi_traced_matches_partial_trace() {
        let mut rng = seeded_rng(25, 0);
        let v = haar_unitary(6, &mut rng).columns(0, 2).into_owned();
        let m = LabeledMap::new(v, lay(&[("in", 2)]), lay(&[("out", 2), ("anc", 3)])).unwrap();
        let full = m.choi().unwrap().partial_trace(&["anc"]).unwrap();
        let fast = m.choi_traced(&["anc"]).unwrap();
        assert!(full.dist(&fast).unwrap() < 1e-14);
    }

    fn dims_and_perm() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, u64)> {
        proptest::collection::vec(1usize..=3, 1..=4).prop_flat_map(|dims| {
            let n = dims.len();
            (Just(dims), Just((0..n).collect::<Vec<_>>()).prop_shuffle(), any::<u64>())
        })
    }

    fn random_op(dims: &[usize], seed: u64) -> LabeledOperator {
        let labels: Vec<String> = (0..dims.len()).map(|k| format!("f{k}")).collect();
        let layout = SpaceLayout::new(labels.iter().map(String::as_str).zip(dims.iter().copied())).unwrap();
        let mut rng = seeded_rng(seed, 0);
        LabeledOperator::new(random_matrix(layout.total_dim(), &mut rng), layout).unwrap()
    }

    proptest! {
        #[test]
        fn permutation_round_trip_is_exact((dims, perm, seed) in dims_and_perm()) {
            let op = random_op(&dims, seed);
            let order: Vec<String> = perm.iter().map(|&p| format!("f{p}")).collect();
            let back: Vec<String> = op.layout().labels().map(String::from).collect();
            let there = op.permute(&order).unwrap();
            prop_assert_eq!(there.permute(&back).unwrap(), op);
        }

        #[test]
        fn partial_transpose_is_involutive((dims, perm, seed) in dims_and_perm()) {
            let op = random_op(&dims, seed);
            let k = 1 + (seed as usize) % dims.len();
            let labels: Vec<String> = perm[..k].iter().map(|&p| format!("f{p}")).collect();
            let twice = op.partial_transpose(&labels).unwrap().partial_transpose(&labels).unwrap();
            prop_assert_eq!(twice, op);
        }

        #[test]
        fn trace_commutes_with_permutation((dims, perm, seed) in dims_and_perm()) {
            let op = random_op(&dims, seed);
            let label = format!("f{}", perm[0]);
            let order: Vec<String> = perm.iter().map(|&p| format!("f{p}")).collect();
            let a = op.partial_trace(&[&label]).unwrap();
            let b = op.permute(&order).unwrap().partial_trace(&[&label]).unwrap();
            prop_assert!(a.dist(&b).unwrap() < 1e-12);
        }
    }

    #[test]
    fn permutation_round_trip_on_d4_operators() {
        let mut rng = seeded_rng(26, 0);
        for d in 2..=4 {
            let layout = SpaceLayout::uniform(&["3", "2", "1", "0"], d).unwrap();
            let op = LabeledOperator::new(random_matrix(d.pow(4), &mut rng), layout).unwrap();
            let there = op.permute(&["1", "3", "0", "2"]).unwrap();
            assert_eq!(there.permute(&["3", "2", "1", "0"]).unwrap(), op);
        }
    }
}
