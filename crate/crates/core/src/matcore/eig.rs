//! Cyclic Jacobi eigensolver for Hermitian matrices and the spectral
//! helpers built on it (PSD checks, pseudo square roots, singular values).

use super::matrix::{CMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Max-entry tolerance on `M - M*` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in descending order with matching orthonormal eigenvector
/// columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, i: usize) -> Vec<C64> {
        self.eigenvectors.col(i)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Eigenvector of the smallest eigenvalue (last column of the sorted
    /// output).
    pub fn lowest_vector(&self) -> Vec<C64> {
        self.vector(self.dim() - 1)
    }

    /// `sum_i f(lambda_i) v_i v_i*` over the eigenpairs accepted by `f`.
    pub fn functional_calculus(&self, f: impl Fn(f64) -> Option<f64>) -> CMatrix {
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let Some(w) = f(lam) else { continue };
            if w == 0.0 {
                continue;
            }
            let v = self.vector(k);
            for i in 0..n {
                let vi = v[i] * w;
                for j in 0..n {
                    out[(i, j)] += vi * v[j].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.functional_calculus(Some)
    }

    /// Orthogonal projector onto eigenvectors with eigenvalue `> cutoff`.
    pub fn support_projector(&self, cutoff: f64) -> CMatrix {
        self.functional_calculus(|l| (l > cutoff).then_some(1.0))
    }

    pub fn rank(&self, cutoff: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > cutoff).count()
    }
}

pub fn check_hermitian(m: &CMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// The input is symmetrized before iterating, so deviations below
/// [`HERMITIAN_TOL`] are discarded. Sweeps visit `(p, q)` pairs in row
/// order, and eigenpairs are sorted descending with a stable sort, so the
/// output is a deterministic function of the input.
pub fn herm_eig(m: &CMatrix) -> Result<SpectralDecomposition> {
    check_hermitian(m)?;
    Ok(jacobi(m.hermitian_part()))
}

fn jacobi(mut a: CMatrix) -> SpectralDecomposition {
    let n = a.rows();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius();
    if scale == 0.0 {
        return SpectralDecomposition {
            eigenvalues: vec![0.0; n],
            eigenvectors: v,
        };
    }
    let threshold = (f64::EPSILON * scale).powi(2) * 1e-2;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// Annihilates `a[p][q]` with the unitary `G = diag(1, conj(e)) * R(c, s)`
/// where `e` is the phase of `a[p][q]`; `a <- G* a G`, `v <- v G`.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if g < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let e = apq / g;
    let theta = (aqq - app) / (2.0 * g);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let g00 = C64::new(c, 0.0);
    let g01 = C64::new(s, 0.0);
    let g10 = -e.conj() * s;
    let g11 = e.conj() * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g00 + akq * g10;
        a[(k, q)] = akp * g01 + akq * g11;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g00.conj() * apk + g10.conj() * aqk;
        a[(q, k)] = g01.conj() * apk + g11.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g00 + vkq * g10;
        v[(k, q)] = vkp * g01 + vkq * g11;
    }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn psd_min_eig(m: &CMatrix) -> Result<f64> {
    Ok(herm_eig(m)?.min_eigenvalue())
}

/// PSD square root with eigenvalues `<= rank_tol` dropped.
pub fn pseudo_sqrt(m: &CMatrix, rank_tol: f64) -> Result<CMatrix> {
    let eig = herm_eig(m)?;
    let min_eig = eig.min_eigenvalue();
    if min_eig < -rank_tol {
        return Err(Error::NotPsd { min_eig });
    }
    Ok(eig.functional_calculus(|l| (l > rank_tol).then(|| l.sqrt())))
}

/// Moore-Penrose inverse of [`pseudo_sqrt`] at the same cutoff.
pub fn pseudo_inv_sqrt(m: &CMatrix, rank_tol: f64) -> Result<CMatrix> {
    let eig = herm_eig(m)?;
    let min_eig = eig.min_eigenvalue();
    if min_eig < -rank_tol {
        return Err(Error::NotPsd { min_eig });
    }
    Ok(eig.functional_calculus(|l| (l > rank_tol).then(|| 1.0 / l.sqrt())))
}

/// Singular values in descending order, read off the Hermitian dilation
/// `[[0, M], [M*, 0]]` whose spectrum is `{+-sigma_i}` padded with zeros.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let (r, c) = (m.rows(), m.cols());
    let n = r + c;
    let mut dil = CMatrix::zeros(n, n);
    for i in 0..r {
        for j in 0..c {
            dil[(i, r + j)] = m[(i, j)];
            dil[(r + j, i)] = m[(i, j)].conj();
        }
    }
    let eig = jacobi(dil);
    eig.eigenvalues
        .iter()
        .take(r.min(c))
        .map(|&s| s.max(0.0))
        .collect()
}

pub fn operator_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn trace_norm(m: &CMatrix) -> f64 {
    singular_values(m).iter().sum()
}

/// Top singular triple `(sigma, u, v)` with `M v = sigma u`.
pub fn top_singular_pair(m: &CMatrix) -> (f64, Vec<C64>, Vec<C64>) {
    let (r, c) = (m.rows(), m.cols());
    let n = r + c;
    let mut dil = CMatrix::zeros(n, n);
    for i in 0..r {
        for j in 0..c {
            dil[(i, r + j)] = m[(i, j)];
            dil[(r + j, i)] = m[(i, j)].conj();
        }
    }
    let eig = jacobi(dil);
    let w = eig.vector(0);
    let sigma = eig.eigenvalues[0].max(0.0);
    let mut u: Vec<C64> = w[..r].to_vec();
    let mut v: Vec<C64> = w[r..].to_vec();
    if super::matrix::normalize(&mut u) == 0.0 || super::matrix::normalize(&mut v) == 0.0 {
        u = basis_vector(r, 0);
        v = basis_vector(c, 0);
    }
    (sigma, u, v)
}

/// Unitary factor `W` of the polar decomposition `M = W |M|` for square `M`,
/// so that `Tr(W* M) = ||M||_tr`.
pub fn polar_unitary(m: &CMatrix) -> CMatrix {
    assert!(m.is_square());
    let n = m.rows();
    let mut dil = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            dil[(i, n + j)] = m[(i, j)];
            dil[(n + j, i)] = m[(i, j)].conj();
        }
    }
    // Eigenvectors (u; v)/sqrt2 for +sigma give left/right singular vectors.
    let eig = jacobi(dil);
    let mut us = Vec::with_capacity(n);
    let mut vs = Vec::with_capacity(n);
    let cutoff = eig.eigenvalues[0].max(0.0) * 1e-12;
    for k in 0..n {
        if eig.eigenvalues[k] <= cutoff {
            break;
        }
        let w = eig.vector(k);
        let mut u: Vec<C64> = w[..n].to_vec();
        let mut v: Vec<C64> = w[n..].to_vec();
        let nu = super::matrix::normalize(&mut u);
        let nv = super::matrix::normalize(&mut v);
        if nu < 1e-6 || nv < 1e-6 {
            break;
        }
        us.push(u);
        vs.push(v);
    }
    complete_basis(&mut us, n);
    complete_basis(&mut vs, n);
    let mut w = CMatrix::zeros(n, n);
    for (u, v) in us.iter().zip(&vs) {
        for i in 0..n {
            for j in 0..n {
                w[(i, j)] += u[i] * v[j].conj();
            }
        }
    }
    w
}

/// Singular triples `(sigma, u, v)` with `M v = sigma u` for all singular
/// values above `cutoff * sigma_max`, descending.
pub fn svd_nonzero(m: &CMatrix, cutoff: f64) -> Vec<(f64, Vec<C64>, Vec<C64>)> {
    let (r, c) = (m.rows(), m.cols());
    let n = r + c;
    let mut dil = CMatrix::zeros(n, n);
    for i in 0..r {
        for j in 0..c {
            dil[(i, r + j)] = m[(i, j)];
            dil[(r + j, i)] = m[(i, j)].conj();
        }
    }
    let eig = jacobi(dil);
    let smax = eig.eigenvalues[0].max(0.0);
    let mut out = Vec::new();
    for k in 0..r.min(c) {
        let s = eig.eigenvalues[k];
        if s <= cutoff * smax || s <= 0.0 {
            break;
        }
        let w = eig.vector(k);
        let mut u: Vec<C64> = w[..r].to_vec();
        let mut v: Vec<C64> = w[r..].to_vec();
        super::matrix::normalize(&mut u);
        super::matrix::normalize(&mut v);
        out.push((s, u, v));
    }
    out
}

pub(crate) fn basis_vector(n: usize, i: usize) -> Vec<C64> {
    let mut v = vec![ZERO; n];
    v[i] = ONE;
    v
}

/// Gram-Schmidt the given vectors in place, then append standard basis
/// directions until there are `n` orthonormal vectors.
pub(crate) fn complete_basis(vs: &mut Vec<Vec<C64>>, n: usize) {
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(n);
    let candidates: Vec<Vec<C64>> = vs
        .drain(..)
        .chain((0..n).map(|i| basis_vector(n, i)))
        .collect();
    for mut cand in candidates {
        if out.len() == n {
            break;
        }
        for _ in 0..2 {
            for b in &out {
                let p = super::matrix::dot(b, &cand);
                for (x, y) in cand.iter_mut().zip(b) {
                    *x -= p * y;
                }
            }
        }
        if super::matrix::normalize(&mut cand) > 1e-8 {
            out.push(cand);
        }
    }
    *vs = out;
}
