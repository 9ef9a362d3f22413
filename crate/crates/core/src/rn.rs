//! Radon-Nikodym derivatives of completely positive maps at the level of
//! Choi matrices.
//!
//! `phi` is completely absolutely continuous with respect to `psi` when the
//! range of `C_phi` lies in the range of `C_psi`. The derivative is
//! `D = S^+ C_phi S^+` with `S = C_psi^(1/2)`, so that `C_phi = S D S`.

use crate::error::{Error, Result};
use crate::matcore::{herm_eig, operator_norm, BipartiteOperator, CMatrix, SpectralDecomposition};
use crate::qmaps::QMap;
use crate::verdict::{Status, Verdict, Witness};

/// Shared support cutoff for the projector and the pseudo-inverse.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Relative tolerance of the CP precondition.
const CP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RNDerivative {
    pub d: CMatrix,
    pub support_rank: usize,
    /// `max |C_phi - S D S|`.
    pub reconstruction_residual: f64,
    /// Support projector of `C_psi`.
    pub support: CMatrix,
}

fn check_pair(phi: &QMap, psi: &QMap) -> Result<()> {
    if phi.din() != psi.din() || phi.dout() != psi.dout() {
        return Err(Error::DimensionMismatch(format!(
            "maps act {}->{} and {}->{}",
            phi.din(),
            phi.dout(),
            psi.din(),
            psi.dout()
        )));
    }
    Ok(())
}

fn cp_spectrum(c: &BipartiteOperator) -> Result<SpectralDecomposition> {
    let eig = herm_eig(c.mat())?;
    let min_eig = eig.min_eigenvalue();
    if min_eig < -CP_TOL * c.mat().max_abs().max(1.0) {
        return Err(Error::NotCp { min_eig });
    }
    Ok(eig)
}

/// `||(I - P) C_phi (I - P)||_max` for the support projector `P` of `C_psi`.
fn outside_support(phi: &QMap, psi_eig: &SpectralDecomposition, tol: f64) -> (CMatrix, CMatrix) {
    let p = psi_eig.support_projector(tol);
    let q = &CMatrix::identity(p.rows()) - &p;
    let outside = &(&q * phi.choi().mat()) * &q;
    (p, outside)
}

/// Support inclusion `range(C_phi) <= range(C_psi)`. The verdict value is
/// the part of `C_phi` outside the support of `C_psi`.
pub fn cac_test(phi: &QMap, psi: &QMap, tol: f64) -> Result<Verdict> {
    check_pair(phi, psi)?;
    cp_spectrum(phi.choi())?;
    let psi_eig = cp_spectrum(psi.choi())?;
    let (_, outside) = outside_support(phi, &psi_eig, tol);
    let residual = outside.max_abs();
    let name = "completely-absolutely-continuous";
    Ok(if residual <= tol {
        Verdict::new(name, Status::CertifiedYes, residual)
    } else {
        Verdict::new(name, Status::CertifiedNo, residual).with_witness(Witness::Matrix(outside))
    })
}

pub fn rn_derivative(phi: &QMap, psi: &QMap, tol: f64) -> Result<RNDerivative> {
    check_pair(phi, psi)?;
    cp_spectrum(phi.choi())?;
    let psi_eig = cp_spectrum(psi.choi())?;
    let (support, outside) = outside_support(phi, &psi_eig, tol);
    let residual = outside.max_abs();
    if residual > tol {
        return Err(Error::NotAbsolutelyContinuous { residual });
    }
    let s = psi_eig.functional_calculus(|l| (l > tol).then(|| l.sqrt()));
    let s_inv = psi_eig.functional_calculus(|l| (l > tol).then(|| 1.0 / l.sqrt()));
    let d = (&(&s_inv * phi.choi().mat()) * &s_inv).hermitian_part();
    let rebuilt = &(&s * &d) * &s;
    Ok(RNDerivative {
        reconstruction_residual: phi.choi().mat().max_diff(&rebuilt),
        support_rank: psi_eig.rank(tol),
        d,
        support,
    })
}

/// Smallest `t` with `C_phi <= t C_psi`, or `None` without absolute
/// continuity.
pub fn domination_bound(phi: &QMap, psi: &QMap) -> Option<f64> {
    rn_derivative(phi, psi, DEFAULT_TOL).ok().map(|r| operator_norm(&r.d))
}

/// `S D S` for `S = C_psi^(1/2)`.
pub fn reconstruct(psi: &QMap, d: &CMatrix, tol: f64) -> Result<CMatrix> {
    let eig = cp_spectrum(psi.choi())?;
    let s = eig.functional_calculus(|l| (l > tol).then(|| l.sqrt()));
    Ok(&(&s * d) * &s)
}
