//! Entanglement operator and entangling maps of a bipartite state `rho` on
//! `H (x) K`.
//!
//! With `rho = sum_i lambda_i |e_i><e_i|`, the operator
//! `H zeta = sum_i lambda_i^(1/2) (J_HK e_i) (x) (T*_{J_H zeta} e_i)` maps `H`
//! into `H (x) K (x) K`. It yields
//! `phi(b) = (H* (1 (x) b) H)^T = Tr_K((1 (x) b) rho)` and
//! `phi*(a) = Tr_{H (x) K}(H a^T H*) = Tr_H((a (x) 1) rho)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::matrix_value;
use crate::matcore::{
    check_hermitian, herm_eig, BipartiteOperator, CMatrix, ConjugationSpec, Factor, C64, ZERO,
};
use crate::positivity::{is_co_cp, is_cp};
use crate::qmaps::QMap;
use crate::random;
use crate::verdict::{Status, Verdict};

pub const DEFAULT_EIG_TOL: f64 = 1e-12;
/// Trace deviation allowed for a state.
pub const STATE_TRACE_TOL: f64 = 1e-9;

/// `T_zeta eta = zeta (x) eta`, a `(dH dK) x dK` matrix.
pub fn t_operator(zeta: &[C64], d_k: usize) -> Result<CMatrix> {
    if d_k == 0 {
        return Err(Error::InvalidArgument("dK must be at least 1".into()));
    }
    let d_h = zeta.len();
    Ok(CMatrix::from_fn(d_h * d_k, d_k, |r, c| {
        let (h, k) = (r / d_k, r % d_k);
        if k == c {
            zeta[h]
        } else {
            ZERO
        }
    }))
}

/// Checks Hermiticity, unit trace and positivity down to `-eig_tol`.
pub fn check_state(rho: &BipartiteOperator, eig_tol: f64) -> Result<()> {
    check_hermitian(rho.mat()).map_err(|e| Error::NotAState(e.to_string()))?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > STATE_TRACE_TOL || tr.im.abs() > STATE_TRACE_TOL {
        return Err(Error::NotAState(format!("trace is {tr}")));
    }
    let min = herm_eig(rho.mat())?.min_eigenvalue();
    if min < -eig_tol {
        return Err(Error::NotAState(format!("minimum eigenvalue {min:e}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementOperator {
    h: CMatrix,
    source: BipartiteOperator,
    j_hk: ConjugationSpec,
    j_h: ConjugationSpec,
    rank: usize,
}

/// Builds `H` for the state `rho`, keeping eigenvalues above `eig_tol`.
///
/// `conjugations` is `(J_HK, J_H)`; `None` selects coordinate conjugation
/// in the standard bases. `J_HK` may be any conjugation. `J_H` must commute
/// with entrywise conjugation (a real basis), because the transpose in
/// `phi` is taken in the standard basis.
pub fn entanglement_operator(
    rho: &BipartiteOperator,
    conjugations: Option<(ConjugationSpec, ConjugationSpec)>,
    eig_tol: f64,
) -> Result<EntanglementOperator> {
    check_state(rho, eig_tol)?;
    let (d_h, d_k) = (rho.d1(), rho.d2());
    let n = d_h * d_k;
    let (j_hk, j_h) = conjugations
        .unwrap_or_else(|| (ConjugationSpec::standard(n), ConjugationSpec::standard(d_h)));
    if j_hk.dim() != n || j_h.dim() != d_h {
        return Err(Error::DimensionMismatch(format!(
            "conjugations of dimension ({}, {}) for a {d_h}x{d_k} state",
            j_hk.dim(),
            j_h.dim()
        )));
    }
    if !j_h.is_real() {
        return Err(Error::InvalidArgument(
            "J_H must be conjugation in a real orthonormal basis".into(),
        ));
    }

    let eig = herm_eig(&rho.mat().hermitian_part())?;
    let kept: Vec<(f64, Vec<C64>, Vec<C64>)> = (0..n)
        .filter(|&i| eig.eigenvalues[i] > eig_tol)
        .map(|i| {
            let e = eig.vector(i);
            let je = j_hk.apply(&e).expect("dimension checked");
            (eig.eigenvalues[i].sqrt(), e, je)
        })
        .collect();

    let rows = n * d_k;
    let mut h = CMatrix::zeros(rows, d_h);
    for col in 0..d_h {
        // xi = J_H zeta for zeta = e_col; T*_xi e_i = sum_h conj(xi_h) e_i[h, :].
        let xi = j_h.apply(&crate::matcore::basis_vector(d_h, col))?;
        for (s, e, je) in &kept {
            let t: Vec<C64> = (0..d_k)
                .map(|k| (0..d_h).map(|hh| xi[hh].conj() * e[hh * d_k + k]).sum())
                .collect();
            for pq in 0..n {
                let w = je[pq] * *s;
                if w == ZERO {
                    continue;
                }
                for k in 0..d_k {
                    h[(pq * d_k + k, col)] += w * t[k];
                }
            }
        }
    }
    Ok(EntanglementOperator {
        h,
        source: rho.clone(),
        j_hk,
        j_h,
        rank: kept.len(),
    })
}

impl EntanglementOperator {
    /// `(dH dK dK) x dH`.
    pub fn matrix(&self) -> &CMatrix {
        &self.h
    }

    pub fn source(&self) -> &BipartiteOperator {
        &self.source
    }

    pub fn conjugations(&self) -> (&ConjugationSpec, &ConjugationSpec) {
        (&self.j_hk, &self.j_h)
    }

    pub fn d_h(&self) -> usize {
        self.source.d1()
    }

    pub fn d_k(&self) -> usize {
        self.source.d2()
    }

    /// Number of eigenvalues kept in the spectral sum.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `H* (1 (x) b) H` with `b` on the last factor.
    fn sandwich(&self, b: &CMatrix) -> CMatrix {
        let (d_h, d_k) = (self.d_h(), self.d_k());
        let n = d_h * d_k;
        let mut bh = CMatrix::zeros(n * d_k, d_h);
        for pq in 0..n {
            for k in 0..d_k {
                for col in 0..d_h {
                    bh[(pq * d_k + k, col)] = (0..d_k).map(|kp| b[(k, kp)] * self.h[(pq * d_k + kp, col)]).sum();
                }
            }
        }
        &self.h.adjoint() * &bh
    }

    fn check_b(&self, b: &CMatrix) -> Result<()> {
        let d = self.d_k();
        if b.rows() != d || b.cols() != d {
            return Err(Error::DimensionMismatch(format!("b must be {d}x{d}")));
        }
        Ok(())
    }

    fn check_a(&self, a: &CMatrix) -> Result<()> {
        let d = self.d_h();
        if a.rows() != d || a.cols() != d {
            return Err(Error::DimensionMismatch(format!("a must be {d}x{d}")));
        }
        Ok(())
    }

    /// `phi(b) = (H* (1 (x) b) H)^T`.
    pub fn phi_of(&self, b: &CMatrix) -> Result<CMatrix> {
        self.check_b(b)?;
        Ok(self.sandwich(b).transpose())
    }

    /// `phi(b) = J_H H* (1 (x) b)* H J_H`, entrywise conjugation of the
    /// sandwich with `b*`.
    pub fn phi_of_conjugated(&self, b: &CMatrix) -> Result<CMatrix> {
        self.check_b(b)?;
        Ok(self.sandwich(&b.adjoint()).conj())
    }

    /// `phi*(a) = Tr_{H (x) K}(H a^T H*)`.
    pub fn phi_star_of(&self, a: &CMatrix) -> Result<CMatrix> {
        self.check_a(a)?;
        let (d_h, d_k) = (self.d_h(), self.d_k());
        let hat = &self.h * &a.transpose();
        let mut out = CMatrix::zeros(d_k, d_k);
        for pq in 0..d_h * d_k {
            for k in 0..d_k {
                for kp in 0..d_k {
                    let mut acc = ZERO;
                    for col in 0..d_h {
                        acc += hat[(pq * d_k + k, col)] * self.h[(pq * d_k + kp, col)].conj();
                    }
                    out[(k, kp)] += acc;
                }
            }
        }
        Ok(out)
    }

    /// `phi : B(K) -> T(H)` and `phi* : B(H) -> T(K)` as maps.
    pub fn entangling_pair(&self) -> Result<EntanglingPair> {
        let phi = QMap::from_fn(self.d_k(), self.d_h(), |b| self.phi_of(b).expect("dims"))?;
        let phi_star = QMap::from_fn(self.d_h(), self.d_k(), |a| self.phi_star_of(a).expect("dims"))?;
        Ok(EntanglingPair { phi, phi_star })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntanglingPair {
    pub phi: QMap,
    pub phi_star: QMap,
}

/// `Tr_K((1 (x) b) rho)`.
pub fn phi_oracle(rho: &BipartiteOperator, b: &CMatrix) -> CMatrix {
    let id = CMatrix::identity(rho.d1());
    let prod = &id.kron(b) * rho.mat();
    BipartiteOperator::new(prod, rho.d1(), rho.d2())
        .expect("dims")
        .partial_trace(Factor::Second)
}

/// `Tr_H((a (x) 1) rho)`.
pub fn phi_star_oracle(rho: &BipartiteOperator, a: &CMatrix) -> CMatrix {
    let id = CMatrix::identity(rho.d2());
    let prod = &a.kron(&id) * rho.mat();
    BipartiteOperator::new(prod, rho.d1(), rho.d2())
        .expect("dims")
        .partial_trace(Factor::First)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    pub pairs: usize,
    /// `max |Tr(rho (a (x) b)) - Tr(a phi(b))|`.
    pub phi_residual: f64,
    /// `max |Tr(rho (a (x) b)) - Tr(b phi*(a))|`.
    pub phi_star_residual: f64,
    /// Max-entry distance of `phi`, `phi*` from the partial-trace oracles.
    pub oracle_residual: f64,
    /// Max-entry distance between the two formulas for `phi`.
    pub branch_residual: f64,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.phi_residual.max(self.phi_star_residual).max(self.oracle_residual)
    }
}

/// Checks `omega(a (x) b) = Tr(a phi(b)) = Tr(b phi*(a))` on all matrix
/// units plus `samples` random Hermitian pairs.
pub fn verify_identity(e: &EntanglementOperator, samples: usize, seed: u64) -> Result<IdentityReport> {
    let (d_h, d_k) = (e.d_h(), e.d_k());
    let rho = e.source();
    let mut pairs: Vec<(CMatrix, CMatrix)> = Vec::new();
    for i in 0..d_h {
        for j in 0..d_h {
            for k in 0..d_k {
                for l in 0..d_k {
                    pairs.push((CMatrix::unit(d_h, i, j), CMatrix::unit(d_k, k, l)));
                }
            }
        }
    }
    let mut rng = random::rng(seed);
    for _ in 0..samples {
        pairs.push((random::hermitian(&mut rng, d_h), random::hermitian(&mut rng, d_k)));
    }

    let mut report = IdentityReport {
        pairs: pairs.len(),
        phi_residual: 0.0,
        phi_star_residual: 0.0,
        oracle_residual: 0.0,
        branch_residual: 0.0,
    };
    let mut phis: Vec<(CMatrix, CMatrix)> = Vec::new();
    let mut cache = |b: &CMatrix| -> Result<CMatrix> {
        if let Some((_, v)) = phis.iter().find(|(k, _)| k == b) {
            return Ok(v.clone());
        }
        let v = e.phi_of(b)?;
        phis.push((b.clone(), v.clone()));
        Ok(v)
    };
    for (a, b) in &pairs {
        let omega = rho.mat().trace_product(&a.kron(b));
        let pb = cache(b)?;
        let ps = e.phi_star_of(a)?;
        report.phi_residual = report.phi_residual.max((omega - a.trace_product(&pb)).norm());
        report.phi_star_residual = report.phi_star_residual.max((omega - b.trace_product(&ps)).norm());
    }
    for k in 0..d_k {
        for l in 0..d_k {
            let b = CMatrix::unit(d_k, k, l);
            let pb = e.phi_of(&b)?;
            report.oracle_residual = report.oracle_residual.max(pb.max_diff(&phi_oracle(rho, &b)));
            report.branch_residual = report.branch_residual.max(pb.max_diff(&e.phi_of_conjugated(&b)?));
        }
    }
    for i in 0..d_h {
        for j in 0..d_h {
            let a = CMatrix::unit(d_h, i, j);
            report.oracle_residual =
                report.oracle_residual.max(e.phi_star_of(&a)?.max_diff(&phi_star_oracle(rho, &a)));
        }
    }
    Ok(report)
}

/// Both PPT routes for one state.
#[derive(Debug, Clone, PartialEq)]
pub struct PptReport {
    /// Minimum eigenvalue of `rho^{T_K}`.
    pub route_a_min_eig: f64,
    pub route_a: bool,
    /// CP and co-CP verdicts for the Choi matrix of `phi*`.
    pub route_b_cp: Verdict,
    pub route_b_co_cp: Verdict,
    pub route_b: bool,
    pub ppt: bool,
}

/// Route A: `rho^{T_K} >= -tol`. Route B: `phi*` is CP and co-CP, tested on
/// its Choi matrix built through `H`. Disagreement is an error carrying
/// both matrices.
pub fn ppt_check(rho: &BipartiteOperator, tol: f64) -> Result<PptReport> {
    let e = entanglement_operator(rho, None, DEFAULT_EIG_TOL.max(tol))?;
    let pt = rho.partial_transpose(Factor::Second);
    let route_a_min_eig = herm_eig(&pt.mat().hermitian_part())?.min_eigenvalue();
    let route_a = route_a_min_eig >= -tol;

    let (d_h, d_k) = (rho.d1(), rho.d2());
    let mut choi = CMatrix::zeros(d_h * d_k, d_h * d_k);
    for i in 0..d_h {
        for j in 0..d_h {
            let out = e.phi_star_of(&CMatrix::unit(d_h, i, j))?;
            for k in 0..d_k {
                for l in 0..d_k {
                    choi[(i * d_k + k, j * d_k + l)] = out[(k, l)];
                }
            }
        }
    }
    let choi = BipartiteOperator::new(choi.hermitian_part(), d_h, d_k)?;
    let route_b_cp = is_cp(&choi, tol)?;
    let route_b_co_cp = is_co_cp(&choi, tol)?;
    let route_b = route_b_cp.status == Status::CertifiedYes && route_b_co_cp.status == Status::CertifiedYes;

    if route_a != route_b {
        let dump = serde_json::json!({
            "route_a_min_eig": route_a_min_eig,
            "route_b_cp_min_eig": route_b_cp.value,
            "route_b_co_cp_min_eig": route_b_co_cp.value,
            "partial_transpose": matrix_value(pt.mat(), Some((d_h, d_k))),
            "phi_star_choi": matrix_value(choi.mat(), Some((d_h, d_k))),
        });
        return Err(Error::RouteDisagreement(dump.to_string()));
    }
    Ok(PptReport {
        route_a_min_eig,
        route_a,
        route_b_cp,
        route_b_co_cp,
        route_b,
        ppt: route_a,
    })
}

/// Smallest eigenvalue of the partial transpose.
pub fn partial_transpose_min_eig(rho: &BipartiteOperator) -> Result<f64> {
    Ok(herm_eig(&rho.partial_transpose(Factor::Second).mat().hermitian_part())?.min_eigenvalue())
}

/// Bisects `[lo, hi]` for the sign change of the minimum partial-transpose
/// eigenvalue along a family, assuming PPT at `lo` and not at `hi`.
pub fn bisect_ppt_boundary(
    family: impl Fn(f64) -> Result<BipartiteOperator>,
    mut lo: f64,
    mut hi: f64,
    width: f64,
) -> Result<f64> {
    let sign = |p: f64| -> Result<bool> { Ok(partial_transpose_min_eig(&family(p)?)? >= 0.0) };
    if !sign(lo)? || sign(hi)? {
        return Err(Error::InvalidArgument("bracket does not straddle the PPT boundary".into()));
    }
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if sign(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{bell_projector, dot, psd_min_eig};
    use crate::random::{make_random_state, make_separable, werner};

    fn bell_state(n: usize) -> BipartiteOperator {
        bell_projector(n).map_mat(|m| m.scale_re(1.0 / n as f64))
    }

    #[test]
    fn t_operator_properties() {
        let z = [C64::new(1.0, 0.0), ZERO];
        let t = t_operator(&z, 2).unwrap();
        let out = t.apply(&[ZERO, C64::new(1.0, 0.0)]);
        assert_eq!(out[1], C64::new(1.0, 0.0));
        assert_eq!(out.iter().filter(|x| x.norm() > 0.0).count(), 1);

        let mut rng = random::rng(1);
        let zeta = random::gaussian_vector(&mut rng, 3);
        let nz2: f64 = zeta.iter().map(|x| x.norm_sqr()).sum();
        let t = t_operator(&zeta, 2).unwrap();
        assert!((&t.adjoint() * &t).max_diff(&CMatrix::identity(2).scale_re(nz2)) < 1e-12);
        let eta = random::gaussian_vector(&mut rng, 2);
        let xi = random::gaussian_vector(&mut rng, 6);
        let lhs = dot(&t.apply(&eta), &xi);
        let rhs = dot(&eta, &t.adjoint().apply(&xi));
        assert!((lhs - rhs).norm() < 1e-12);
        assert!(t_operator(&zeta, 0).is_err());
    }

    #[test]
    fn normalization_and_shape() {
        let rho = make_random_state(4, 2, 3).unwrap();
        let e = entanglement_operator(&rho, None, DEFAULT_EIG_TOL).unwrap();
        assert_eq!((e.matrix().rows(), e.matrix().cols()), (18, 2));
        let tr = (&e.matrix().adjoint() * e.matrix()).trace();
        assert!((tr - rho.trace()).norm() < 1e-9);
    }

    #[test]
    fn examples() {
        let mut p = CMatrix::zeros(4, 4);
        p[(0, 0)] = C64::new(1.0, 0.0);
        let product = BipartiteOperator::new(p, 2, 2).unwrap();
        let e = entanglement_operator(&product, None, DEFAULT_EIG_TOL).unwrap();
        let mut rng = random::rng(2);
        let a = random::ginibre(&mut rng, 2, 2);
        let expect = CMatrix::unit(2, 0, 0).scale(a[(0, 0)]);
        assert!(e.phi_star_of(&a).unwrap().max_diff(&expect) < 1e-12);

        let mixed = BipartiteOperator::new(CMatrix::identity(4).scale_re(0.25), 2, 2).unwrap();
        let e = entanglement_operator(&mixed, None, DEFAULT_EIG_TOL).unwrap();
        let expect = CMatrix::identity(2).scale(a.trace() * 0.25);
        assert!(e.phi_star_of(&a).unwrap().max_diff(&expect) < 1e-12);

        let e = entanglement_operator(&bell_state(2), None, DEFAULT_EIG_TOL).unwrap();
        assert!(e.phi_star_of(&a).unwrap().max_diff(&a.transpose().scale_re(0.5)) < 1e-12);
        assert!(e.phi_of(&a).unwrap().max_diff(&a.transpose().scale_re(0.5)) < 1e-12);
        assert!(e.phi_of(&CMatrix::identity(2)).unwrap().max_diff(&CMatrix::identity(2).scale_re(0.5)) < 1e-12);
    }

    #[test]
    fn product_state_phi() {
        let mut rng = random::rng(6);
        let s = random::density_matrix(&mut rng, 2);
        let t = random::density_matrix(&mut rng, 3);
        let rho = BipartiteOperator::product(&s, &t).unwrap();
        let e = entanglement_operator(&rho, None, DEFAULT_EIG_TOL).unwrap();
        let b = random::ginibre(&mut rng, 3, 3);
        assert!(e.phi_of(&b).unwrap().max_diff(&s.scale(t.trace_product(&b))) < 1e-12);
    }

    #[test]
    fn identity_holds_on_random_states() {
        for (dh, dk) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
            let rho = make_random_state(7, dh, dk).unwrap();
            let e = entanglement_operator(&rho, None, DEFAULT_EIG_TOL).unwrap();
            let r = verify_identity(&e, 50, 1).unwrap();
            assert!(r.max_residual() < 1e-12, "{r:?}");
            assert!(r.branch_residual < 1e-12);
        }
    }

    #[test]
    fn nonstandard_conjugations() {
        let rho = make_random_state(9, 2, 2).unwrap();
        let mut rng = random::rng(3);
        let jhk = ConjugationSpec::new(random::unitary(&mut rng, 4)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let hadamard = CMatrix::from_real(2, 2, &[s, s, s, -s]).unwrap();
        let jh = ConjugationSpec::new(hadamard).unwrap();
        let e = entanglement_operator(&rho, Some((jhk.clone(), jh)), DEFAULT_EIG_TOL).unwrap();
        assert!(verify_identity(&e, 10, 0).unwrap().max_residual() < 1e-12);

        let complex = ConjugationSpec::new(random::unitary(&mut rng, 2)).unwrap();
        assert!(entanglement_operator(&rho, Some((jhk, complex)), DEFAULT_EIG_TOL).is_err());
    }

    #[test]
    fn positivity_transport_and_hermiticity() {
        let rho = make_random_state(11, 3, 2).unwrap();
        let e = entanglement_operator(&rho, None, DEFAULT_EIG_TOL).unwrap();
        let mut rng = random::rng(4);
        for _ in 0..20 {
            let u = random::unit_vector(&mut rng, 3);
            let out = e.phi_star_of(&CMatrix::outer(&u, &u)).unwrap();
            assert!(psd_min_eig(&out.hermitian_part()).unwrap() >= -1e-10);
            let b = random::ginibre(&mut rng, 2, 2);
            let lhs = e.phi_of(&b.adjoint()).unwrap();
            assert!(lhs.max_diff(&e.phi_of(&b).unwrap().adjoint()) < 1e-12);
        }
        let t = e.phi_star_of(&CMatrix::identity(3)).unwrap().trace();
        assert!((t.re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_states() {
        let not_normalized = BipartiteOperator::new(CMatrix::identity(4), 2, 2).unwrap();
        assert!(matches!(entanglement_operator(&not_normalized, None, 1e-12), Err(Error::NotAState(_))));
        let indefinite = BipartiteOperator::new(CMatrix::diag(&[1.0, 0.5, 0.5, -1.0]), 2, 2).unwrap();
        assert!(matches!(ppt_check(&indefinite, 1e-9), Err(Error::NotAState(_))));
    }

    #[test]
    fn ppt_examples() {
        let r = ppt_check(&bell_state(2), 1e-10).unwrap();
        assert!(!r.ppt && !r.route_b);
        assert!((r.route_a_min_eig + 0.5).abs() < 1e-12);
        for seed in 0..10 {
            let sep = make_separable(seed, 5, 2, 2).unwrap();
            let r = ppt_check(&sep, 1e-10).unwrap();
            assert!(r.ppt && r.route_b);
        }
        let product = make_separable(3, 1, 3, 2).unwrap();
        assert!(ppt_check(&product, 1e-10).unwrap().ppt);
    }

    #[test]
    fn werner_boundary() {
        for p in [0.0, 0.2, 0.5, 0.9] {
            let m = partial_transpose_min_eig(&werner(2, p).unwrap()).unwrap();
            assert!((m - (1.0 - 3.0 * p) / 4.0).abs() < 1e-12);
        }
        let p = bisect_ppt_boundary(|p| werner(2, p), 0.0, 1.0, 1e-9).unwrap();
        assert!((p - 1.0 / 3.0).abs() <= 1e-6);
        assert!(bisect_ppt_boundary(|p| werner(2, p), 0.5, 1.0, 1e-9).is_err());
    }
}
