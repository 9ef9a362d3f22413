//! Linear maps `M_n -> M_m`: Kraus, Choi and superoperator forms, the
//! pairing functional between maps and tensors, and structural checks.
//!
//! The Choi matrix is `C = sum_ij E_ij (x) phi(E_ij)` on `C^n (x) C^m`. It is
//! the canonical form: every constructor converts to it eagerly.
//!
//! Superoperators act on row-major vectorizations, `vec(a)[i*n + j] = a[i][j]`,
//! so `S[(k,l),(i,j)] = phi(E_ij)[k][l]`.

use crate::error::{Error, Result};
use crate::matcore::{
    exact_sqrt, herm_eig, svd_nonzero, BipartiteOperator, CMatrix, Factor, C64, ZERO,
};

/// Tolerance for the unitality and trace-preservation checks.
pub const MAP_CHECK_TOL: f64 = 1e-9;

/// Representation a map was built from.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Kraus(Vec<CMatrix>),
    Choi,
    Superop(CMatrix),
}

/// Linear map `phi: M_din -> M_dout`.
#[derive(Debug, Clone, PartialEq)]
pub struct QMap {
    din: usize,
    dout: usize,
    choi: BipartiteOperator,
    source: Representation,
}

/// Outcome of a structural identity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapCheck {
    pub holds: bool,
    /// Max-entry deviation from the identity being tested.
    pub deviation: f64,
}

impl QMap {
    pub fn from_kraus(din: usize, dout: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidArgument("Kraus list must be nonempty".into()));
        }
        if din == 0 || dout == 0 {
            return Err(Error::DimensionMismatch("map dimensions must be positive".into()));
        }
        for (idx, k) in kraus.iter().enumerate() {
            if k.rows() != dout || k.cols() != din {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {idx} is {}x{}, expected {dout}x{din}",
                    k.rows(),
                    k.cols()
                )));
            }
        }
        let dim = din * dout;
        let mut c = CMatrix::zeros(dim, dim);
        for k in &kraus {
            // |K>> = sum_i e_i (x) K e_i
            let v: Vec<C64> = (0..dim).map(|r| k[(r % dout, r / dout)]).collect();
            for r in 0..dim {
                if v[r] == ZERO {
                    continue;
                }
                for s in 0..dim {
                    c[(r, s)] += v[r] * v[s].conj();
                }
            }
        }
        Ok(Self {
            din,
            dout,
            choi: BipartiteOperator::new(c, din, dout)?,
            source: Representation::Kraus(kraus),
        })
    }

    pub fn from_choi(choi: BipartiteOperator) -> Self {
        Self {
            din: choi.d1(),
            dout: choi.d2(),
            choi,
            source: Representation::Choi,
        }
    }

    /// `(m^2) x (n^2)` superoperator; dimensions are read from its shape.
    pub fn from_superop(s: CMatrix) -> Result<Self> {
        let dout = exact_sqrt(s.rows()).ok_or_else(|| {
            Error::DimensionMismatch(format!("superoperator rows {} not a square", s.rows()))
        })?;
        let din = exact_sqrt(s.cols()).ok_or_else(|| {
            Error::DimensionMismatch(format!("superoperator cols {} not a square", s.cols()))
        })?;
        let dim = din * dout;
        let c = CMatrix::from_fn(dim, dim, |r, col| {
            let (i, k) = (r / dout, r % dout);
            let (j, l) = (col / dout, col % dout);
            s[(k * dout + l, i * din + j)]
        });
        Ok(Self {
            din,
            dout,
            choi: BipartiteOperator::new(c, din, dout)?,
            source: Representation::Superop(s),
        })
    }

    /// Builds the Choi matrix by evaluating `f` on matrix units.
    pub fn from_fn(din: usize, dout: usize, f: impl Fn(&CMatrix) -> CMatrix) -> Result<Self> {
        let dim = din * dout;
        let mut c = CMatrix::zeros(dim, dim);
        for i in 0..din {
            for j in 0..din {
                let img = f(&CMatrix::unit(din, i, j));
                if img.rows() != dout || img.cols() != dout {
                    return Err(Error::DimensionMismatch("map image has wrong shape".into()));
                }
                for k in 0..dout {
                    for l in 0..dout {
                        c[(i * dout + k, j * dout + l)] = img[(k, l)];
                    }
                }
            }
        }
        Ok(Self::from_choi(BipartiteOperator::new(c, din, dout)?))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_kraus(n, n, vec![CMatrix::identity(n)]).expect("identity Kraus")
    }

    pub fn transpose(n: usize) -> Self {
        Self::from_fn(n, n, |a| a.transpose()).expect("transpose map")
    }

    /// `a -> Tr(a) I / n`.
    pub fn completely_depolarizing(n: usize) -> Self {
        Self::from_fn(n, n, |a| CMatrix::identity(n).scale(a.trace() / n as f64))
            .expect("depolarizing map")
    }

    /// Reduction map `a -> Tr(a) I - a`: positive, not CP for `n >= 2`.
    pub fn reduction(n: usize) -> Self {
        Self::from_fn(n, n, |a| &CMatrix::identity(n).scale(a.trace()) - a).expect("reduction map")
    }

    pub fn din(&self) -> usize {
        self.din
    }

    pub fn dout(&self) -> usize {
        self.dout
    }

    pub fn choi(&self) -> &BipartiteOperator {
        &self.choi
    }

    pub fn source(&self) -> &Representation {
        &self.source
    }

    pub fn choi_of(&self) -> BipartiteOperator {
        self.choi.clone()
    }

    pub fn superop(&self) -> CMatrix {
        let (din, dout) = (self.din, self.dout);
        CMatrix::from_fn(dout * dout, din * din, |r, col| {
            let (k, l) = (r / dout, r % dout);
            let (i, j) = (col / din, col % din);
            self.choi.at(i, k, j, l)
        })
    }

    /// Kraus operators of a CP map (see [`kraus_from_choi`]).
    pub fn kraus(&self, tol: f64) -> Result<Vec<CMatrix>> {
        match &self.source {
            Representation::Kraus(k) => Ok(k.clone()),
            _ => kraus_from_choi(&self.choi, tol),
        }
    }

    fn check_input(&self, a: &CMatrix) -> Result<()> {
        if a.rows() != self.din || a.cols() != self.din {
            return Err(Error::DimensionMismatch(format!(
                "map input must be {0}x{0}, got {1}x{2}",
                self.din,
                a.rows(),
                a.cols()
            )));
        }
        Ok(())
    }

    /// `phi(a)`, evaluated in the representation the map was built from.
    pub fn apply(&self, a: &CMatrix) -> Result<CMatrix> {
        self.check_input(a)?;
        Ok(match &self.source {
            Representation::Kraus(ks) => {
                let mut out = CMatrix::zeros(self.dout, self.dout);
                for k in ks {
                    out = &out + &(&(k * a) * &k.adjoint());
                }
                out
            }
            Representation::Superop(s) => {
                let v = s.apply(a.data());
                CMatrix::new(self.dout, self.dout, v)?
            }
            Representation::Choi => self.apply_via_choi_unchecked(a),
        })
    }

    /// `phi(a) = Tr_1[C (a^T (x) I)]`.
    pub fn apply_via_choi(&self, a: &CMatrix) -> Result<CMatrix> {
        self.check_input(a)?;
        Ok(self.apply_via_choi_unchecked(a))
    }

    fn apply_via_choi_unchecked(&self, a: &CMatrix) -> CMatrix {
        let (din, dout) = (self.din, self.dout);
        CMatrix::from_fn(dout, dout, |k, l| {
            let mut acc = ZERO;
            for i in 0..din {
                for j in 0..din {
                    let aij = a[(i, j)];
                    if aij != ZERO {
                        acc += aij * self.choi.at(i, k, j, l);
                    }
                }
            }
            acc
        })
    }

    /// Max-entry disagreement between the source representation and the
    /// Choi matrix, measured on all matrix units.
    pub fn representation_gap(&self) -> f64 {
        let mut gap: f64 = 0.0;
        for i in 0..self.din {
            for j in 0..self.din {
                let e = CMatrix::unit(self.din, i, j);
                let lhs = self.apply(&e).expect("unit has input shape");
                let rhs = self.apply_via_choi_unchecked(&e);
                gap = gap.max(lhs.max_diff(&rhs));
            }
        }
        gap
    }

    /// `sum_i Tr(phi(a_i) b_i^T)`.
    pub fn pairing(&self, u: &TensorElement) -> Result<C64> {
        self.check_element(u)?;
        let mut acc = ZERO;
        for (a, b) in u.terms() {
            acc += self.apply(a)?.trace_product(&b.transpose());
        }
        Ok(acc)
    }

    /// Choi route of the pairing: `Tr(C (sum_i a_i (x) b_i)^T)`.
    pub fn pairing_via_choi(&self, u: &TensorElement) -> Result<C64> {
        self.check_element(u)?;
        let flat = u.flatten();
        Ok(self.choi.mat().trace_product(&flat.mat().transpose()))
    }

    fn check_element(&self, u: &TensorElement) -> Result<()> {
        if u.left_dim() != self.din || u.right_dim() != self.dout {
            return Err(Error::DimensionMismatch(format!(
                "tensor element on M_{} (x) M_{} cannot pair with a map M_{} -> M_{}",
                u.left_dim(),
                u.right_dim(),
                self.din,
                self.dout
            )));
        }
        Ok(())
    }

    /// Dual map with `Tr(phi(a) b) = Tr(a phi_adj(b))`.
    pub fn adjoint_map(&self) -> QMap {
        let c = self.choi.swap_factors();
        let mat = c.mat().transpose();
        QMap::from_choi(BipartiteOperator::new(mat, self.dout, self.din).expect("swapped dims"))
    }

    /// `phi o transpose`; its Choi matrix is the first-factor partial
    /// transpose of `C`.
    pub fn compose_transpose(&self) -> QMap {
        QMap::from_choi(self.choi.partial_transpose(Factor::First))
    }

    /// `phi(I) = I`, read from `Tr_1 C`.
    pub fn unitality(&self) -> MapCheck {
        let d = self
            .choi
            .partial_trace(Factor::First)
            .max_diff(&CMatrix::identity(self.dout));
        MapCheck {
            holds: d <= MAP_CHECK_TOL,
            deviation: d,
        }
    }

    /// `Tr phi(a) = Tr a`, read from `Tr_2 C`.
    pub fn trace_preserving(&self) -> MapCheck {
        let d = self
            .choi
            .partial_trace(Factor::Second)
            .max_diff(&CMatrix::identity(self.din));
        MapCheck {
            holds: d <= MAP_CHECK_TOL,
            deviation: d,
        }
    }

    /// Convex (or general linear) combination of maps with equal shapes.
    pub fn combine(terms: &[(f64, &QMap)]) -> Result<QMap> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty combination".into()))?
            .1;
        let (din, dout) = (first.din, first.dout);
        let mut acc = CMatrix::zeros(din * dout, din * dout);
        for (w, m) in terms {
            if m.din != din || m.dout != dout {
                return Err(Error::DimensionMismatch("maps have different shapes".into()));
            }
            acc = &acc + &m.choi.mat().scale_re(*w);
        }
        Ok(QMap::from_choi(BipartiteOperator::new(acc, din, dout)?))
    }

    pub fn scaled(&self, s: f64) -> QMap {
        QMap::from_choi(self.choi.map_mat(|m| m.scale_re(s)))
    }
}

/// Choi matrix of a map.
pub fn choi_of(map: &QMap) -> BipartiteOperator {
    map.choi_of()
}

/// Kraus operators `K[a][i] = sqrt(lambda) v[(i, a)]` from the spectral
/// decomposition of a PSD Choi matrix.
pub fn kraus_from_choi(c: &BipartiteOperator, tol: f64) -> Result<Vec<CMatrix>> {
    let eig = herm_eig(c.mat())?;
    let min_eig = eig.min_eigenvalue();
    if min_eig < -tol {
        return Err(Error::NotCp { min_eig });
    }
    let (din, dout) = (c.d1(), c.d2());
    let mut out = Vec::new();
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let v = eig.vector(k);
        let s = lam.sqrt();
        out.push(CMatrix::from_fn(dout, din, |a, i| v[i * dout + a] * s));
    }
    if out.is_empty() {
        out.push(CMatrix::zeros(dout, din));
    }
    Ok(out)
}

/// Finite sum `sum_i a_i (x) b_i` with `a_i` in `M_n` and `b_i` in `M_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorElement {
    terms: Vec<(CMatrix, CMatrix)>,
}

impl TensorElement {
    pub fn new(terms: Vec<(CMatrix, CMatrix)>) -> Result<Self> {
        let (a0, b0) = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("tensor element needs at least one term".into()))?;
        let (n, m) = (a0.rows(), b0.rows());
        for (a, b) in &terms {
            if !a.is_square() || !b.is_square() || a.rows() != n || b.rows() != m {
                return Err(Error::DimensionMismatch(
                    "tensor terms must be square with consistent sizes".into(),
                ));
            }
        }
        Ok(Self { terms })
    }

    pub fn elementary(a: CMatrix, b: CMatrix) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    /// Operator-Schmidt decomposition of a flat operator on `C^n (x) C^m`:
    /// singular value decomposition of the realigned matrix
    /// `R[(i,k),(j,l)] = U[(i,j),(k,l)]`, so `U = sum_s sigma_s X_s (x) Y_s`
    /// with Frobenius-orthonormal `X_s`, `Y_s`. Zero input yields `0 (x) 0`.
    pub fn from_operator(u: &BipartiteOperator) -> Self {
        let (n, m) = (u.d1(), u.d2());
        let r = CMatrix::from_fn(n * n, m * m, |row, col| {
            let (i, k) = (row / n, row % n);
            let (j, l) = (col / m, col % m);
            u.at(i, j, k, l)
        });
        let triples = svd_nonzero(&r, 1e-13);
        if triples.is_empty() {
            return Self {
                terms: vec![(CMatrix::zeros(n, n), CMatrix::zeros(m, m))],
            };
        }
        let terms = triples
            .into_iter()
            .map(|(s, uvec, vvec)| {
                let x = CMatrix::from_fn(n, n, |i, k| uvec[i * n + k] * s);
                let y = CMatrix::from_fn(m, m, |j, l| vvec[j * m + l].conj());
                (x, y)
            })
            .collect();
        Self { terms }
    }

    pub fn terms(&self) -> &[(CMatrix, CMatrix)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn left_dim(&self) -> usize {
        self.terms[0].0.rows()
    }

    pub fn right_dim(&self) -> usize {
        self.terms[0].1.rows()
    }

    /// `sum_i a_i (x) b_i` as an operator on `C^n (x) C^m`.
    pub fn flatten(&self) -> BipartiteOperator {
        let (n, m) = (self.left_dim(), self.right_dim());
        let mut acc = CMatrix::zeros(n * m, n * m);
        for (a, b) in &self.terms {
            acc = &acc + &a.kron(b);
        }
        BipartiteOperator::new(acc, n, m).expect("consistent term sizes")
    }

    /// `sum_i Tr(x_i y_i)`.
    pub fn trace_functional(&self) -> Result<C64> {
        if self.left_dim() != self.right_dim() {
            return Err(Error::DimensionMismatch(
                "trace functional needs equal factor dimensions".into(),
            ));
        }
        Ok(self.terms.iter().map(|(x, y)| x.trace_product(y)).sum())
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            terms: self.terms.iter().map(|(a, b)| (a.scale(s), b.clone())).collect(),
        }
    }
}

/// `sum_i Tr(x_i y_i)` of a tensor element.
pub fn trace_functional(u: &TensorElement) -> Result<C64> {
    u.trace_functional()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{bell_projector, psd_min_eig, swap_operator};
    use crate::random;

    #[test]
    fn identity_choi_is_bell_projector() {
        let c = QMap::identity(2).choi_of();
        assert_eq!(c, bell_projector(2));
        let eig = herm_eig(c.mat()).unwrap();
        let expect = [2.0, 0.0, 0.0, 0.0];
        for (l, e) in eig.eigenvalues.iter().zip(expect) {
            assert!((l - e).abs() < 1e-14);
        }
    }

    #[test]
    fn transpose_choi_is_swap() {
        assert_eq!(QMap::transpose(2).choi_of(), swap_operator(2));
    }

    #[test]
    fn depolarizing_choi() {
        let c = QMap::completely_depolarizing(2).choi_of();
        assert!(c.mat().max_diff(&CMatrix::identity(4).scale_re(0.5)) < 1e-15);
    }

    #[test]
    fn kraus_from_depolarizing_rebuilds() {
        let c = QMap::completely_depolarizing(2).choi_of();
        let ks = kraus_from_choi(&c, 1e-9).unwrap();
        assert_eq!(ks.len(), 4);
        let rebuilt = QMap::from_kraus(2, 2, ks).unwrap();
        assert!(rebuilt.choi().mat().max_diff(c.mat()) < 1e-9);
    }

    #[test]
    fn kraus_of_identity_is_single_unitary() {
        let ks = kraus_from_choi(&bell_projector(3), 1e-9).unwrap();
        assert_eq!(ks.len(), 1);
        let k = &ks[0];
        let phase = k[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!(k.max_diff(&CMatrix::identity(3).scale(phase)) < 1e-12);
    }

    #[test]
    fn kraus_from_swap_is_not_cp() {
        assert!(matches!(
            kraus_from_choi(&swap_operator(2), 1e-9),
            Err(Error::NotCp { .. })
        ));
    }

    #[test]
    fn apply_cases() {
        let a = CMatrix::from_fn(2, 2, |i, j| C64::new(i as f64 + 0.5, j as f64));
        assert_eq!(QMap::identity(2).apply(&a).unwrap(), a);
        let t = QMap::transpose(2);
        assert_eq!(t.apply(&CMatrix::unit(2, 0, 1)).unwrap(), CMatrix::unit(2, 1, 0));
        assert!(t.apply(&CMatrix::identity(3)).is_err());
    }

    #[test]
    fn kraus_and_choi_paths_agree() {
        let mut rng = random::rng(7);
        let phi = random::random_cp_map(&mut rng, 3, 2, 3);
        let a = random::ginibre(&mut rng, 3, 3);
        let lhs = phi.apply(&a).unwrap();
        let rhs = phi.apply_via_choi(&a).unwrap();
        assert!(lhs.max_diff(&rhs) < 1e-10);
        assert!(phi.representation_gap() < 1e-10);
        let sup = QMap::from_superop(phi.superop()).unwrap();
        assert!(sup.choi().mat().max_diff(phi.choi().mat()) < 1e-14);
        assert!(sup.apply(&a).unwrap().max_diff(&lhs) < 1e-10);
    }

    #[test]
    fn pairing_basic_cases() {
        let e00 = CMatrix::unit(2, 0, 0);
        let u = TensorElement::elementary(e00.clone(), e00).unwrap();
        let v = QMap::identity(2).pairing(&u).unwrap();
        assert!((v - C64::new(1.0, 0.0)).norm() < 1e-15);

        let mut rng = random::rng(3);
        let phi = random::random_cp_map(&mut rng, 2, 2, 2);
        let (a, a2, b) = (
            random::ginibre(&mut rng, 2, 2),
            random::ginibre(&mut rng, 2, 2),
            random::ginibre(&mut rng, 2, 2),
        );
        let joint = TensorElement::elementary(&a + &a2, b.clone()).unwrap();
        let split = TensorElement::new(vec![(a, b.clone()), (a2, b)]).unwrap();
        let p1 = phi.pairing(&joint).unwrap();
        let p2 = phi.pairing(&split).unwrap();
        assert!((p1 - p2).norm() < 1e-12);
        assert!((p1 - phi.pairing_via_choi(&split).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn trace_functional_cases() {
        let u = TensorElement::elementary(CMatrix::identity(2), CMatrix::identity(2)).unwrap();
        assert!((u.trace_functional().unwrap().re - 2.0).abs() < 1e-15);
        let mut rng = random::rng(5);
        let a = random::ginibre(&mut rng, 3, 3);
        let b = random::ginibre(&mut rng, 3, 3);
        let u = TensorElement::elementary(a.clone(), b.clone()).unwrap();
        assert!((u.trace_functional().unwrap() - (&a * &b).trace()).norm() < 1e-13);
        let mixed = TensorElement::elementary(CMatrix::identity(2), CMatrix::identity(3)).unwrap();
        assert!(mixed.trace_functional().is_err());
    }

    #[test]
    fn operator_schmidt_reconstructs() {
        let mut rng = random::rng(8);
        let u = BipartiteOperator::new(random::ginibre(&mut rng, 6, 6), 2, 3).unwrap();
        let el = TensorElement::from_operator(&u);
        assert_eq!(el.len(), 4);
        assert!(el.flatten().mat().max_diff(u.mat()) < 1e-12);
        let one = BipartiteOperator::product(&CMatrix::identity(2), &CMatrix::identity(2)).unwrap();
        assert_eq!(TensorElement::from_operator(&one).len(), 1);
    }

    #[test]
    fn adjoint_and_compose_transpose() {
        let mut rng = random::rng(12);
        let phi = random::random_cp_map(&mut rng, 2, 3, 2);
        let adj = phi.adjoint_map();
        assert_eq!((adj.din(), adj.dout()), (3, 2));
        let a = random::ginibre(&mut rng, 2, 2);
        let b = random::ginibre(&mut rng, 3, 3);
        let lhs = phi.apply(&a).unwrap().trace_product(&b);
        let rhs = a.trace_product(&adj.apply(&b).unwrap());
        assert!((lhs - rhs).norm() < 1e-10);

        let pt = phi.compose_transpose();
        let direct = phi.apply(&a.transpose()).unwrap();
        assert!(pt.apply(&a).unwrap().max_diff(&direct) < 1e-12);
    }

    #[test]
    fn unitality_and_trace_preservation() {
        let id = QMap::identity(2);
        assert!(id.unitality().holds && id.trace_preserving().holds);

        let e00 = CMatrix::unit(2, 0, 0);
        let m = QMap::from_fn(2, 2, |a| e00.scale(a.trace())).unwrap();
        assert!(m.trace_preserving().holds);
        assert!(!m.unitality().holds);
        let tr1 = m.choi().partial_trace(Factor::First);
        assert!(tr1.max_diff(&e00.scale_re(2.0)) < 1e-15);
    }

    #[test]
    fn unital_positive_map_choi_trace_is_n() {
        for n in 2..=3 {
            let c = QMap::reduction(n).scaled(1.0 / (n as f64 - 1.0));
            assert!(c.unitality().holds);
            assert!((c.choi().trace().re - n as f64).abs() < 1e-12);
            assert!(psd_min_eig(c.choi().mat()).unwrap() < 0.0);
        }
    }
}
