//! Classifiers for the positivity hierarchy of a Choi matrix `C` on
//! `C^d1 (x) C^d2`.
//!
//! Block positivity and k-positivity are decided by a multi-start local
//! search. The search can only exhibit violations, so a pass is reported as
//! `no-violation-found` unless `C` is PSD.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matcore::{
    check_hermitian, complete_basis, herm_eig, kron_vec, normalize, BipartiteOperator, CMatrix,
    Factor, C64, ZERO,
};
use crate::random::{gaussian_vector, stream_rng};
use crate::tensornorms::{alpha_norm, AlphaParams, NormEstimate};
use crate::verdict::{Status, Verdict, Witness};

pub const DEFAULT_RESTARTS: usize = 64;
pub const DEFAULT_MAX_ITERS: usize = 200;
pub const DEFAULT_CONV_TOL: f64 = 1e-12;

/// Multi-start parameters for the product and Schmidt-rank searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Stop a restart when a sweep improves the value by less than
    /// `conv_tol * max|C_ij|`.
    pub conv_tol: f64,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            restarts: DEFAULT_RESTARTS,
            max_iters: DEFAULT_MAX_ITERS,
            seed: 0,
            conv_tol: DEFAULT_CONV_TOL,
        }
    }
}

impl SearchParams {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Best product vector found by [`min_product_expectation`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSearchResult {
    pub value: f64,
    pub f: Vec<C64>,
    pub g: Vec<C64>,
    pub restarts_used: usize,
    pub converged: bool,
}

/// Best Schmidt-rank-`k` vector found by [`k_positivity_min`]:
/// `vector = sum_j F[:, j] (x) G[:, j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSearchResult {
    pub value: f64,
    pub k: usize,
    pub vector: Vec<C64>,
    pub left: CMatrix,
    pub right: CMatrix,
    pub restarts_used: usize,
    pub converged: bool,
}

/// `<v, C v>` (real part; `C` is Hermitian).
pub fn expectation(c: &CMatrix, v: &[C64]) -> f64 {
    c.quadratic_form(v, v).re
}

pub fn product_expectation(c: &BipartiteOperator, f: &[C64], g: &[C64]) -> f64 {
    expectation(c.mat(), &kron_vec(f, g))
}

/// Minimizes `<f (x) g, C f (x) g>` over unit `f`, `g` by alternating
/// lowest-eigenvector updates.
pub fn min_product_expectation(
    c: &BipartiteOperator,
    params: &SearchParams,
) -> Result<ProductSearchResult> {
    let r = k_positivity_min(c, 1, params)?;
    // Rank one: the single column pair carries the whole vector.
    let mut f = r.left.col(0);
    let mut g = r.right.col(0);
    let nf = normalize(&mut f);
    for z in g.iter_mut() {
        *z *= nf;
    }
    let ng = normalize(&mut g);
    if nf == 0.0 || ng == 0.0 {
        f = crate::matcore::basis_vector(c.d1(), 0);
        g = crate::matcore::basis_vector(c.d2(), 0);
    }
    let value = product_expectation(c, &f, &g);
    Ok(ProductSearchResult {
        value,
        f,
        g,
        restarts_used: r.restarts_used,
        converged: r.converged,
    })
}

/// Minimizes `<v, C v>` over unit vectors of Schmidt rank at most `k`.
///
/// Writing `v = sum_j F[:, j] (x) G[:, j]`, each half-step fixes one factor
/// (with orthonormalized columns) and takes the lowest eigenvector of the
/// compressed `(d k) x (d k)` operator for the other. The value never
/// increases across half-steps.
pub fn k_positivity_min(
    c: &BipartiteOperator,
    k: usize,
    params: &SearchParams,
) -> Result<SchmidtSearchResult> {
    check_hermitian(c.mat())?;
    let (d1, d2) = (c.d1(), c.d2());
    if k == 0 || k > d1.min(d2) {
        return Err(Error::InvalidArgument(format!(
            "Schmidt rank k = {k} outside 1..={}",
            d1.min(d2)
        )));
    }
    let c = c.map_mat(|m| m.hermitian_part());
    let scale = c.mat().max_abs().max(f64::MIN_POSITIVE);
    let restarts = params.restarts.max(1);

    let outcomes: Vec<Restart> = (0..restarts)
        .into_par_iter()
        .map(|idx| run_restart(&c, k, params, scale, idx as u64))
        .collect();

    let best = outcomes
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
        .map(|(_, r)| r)
        .expect("at least one restart");

    let vector = compose(&best.left, &best.right);
    Ok(SchmidtSearchResult {
        value: expectation(c.mat(), &vector),
        k,
        vector,
        left: best.left.clone(),
        right: best.right.clone(),
        restarts_used: restarts,
        converged: best.converged,
    })
}

struct Restart {
    value: f64,
    left: CMatrix,
    right: CMatrix,
    converged: bool,
}

fn run_restart(c: &BipartiteOperator, k: usize, params: &SearchParams, scale: f64, idx: u64) -> Restart {
    let (d1, d2) = (c.d1(), c.d2());
    let mut rng = stream_rng(params.seed, idx);
    let mut right = orthonormal_columns(CMatrix::new(d2, k, gaussian_vector(&mut rng, d2 * k)).expect("shape"));
    let mut left = CMatrix::zeros(d1, k);
    let mut value = f64::INFINITY;
    let mut converged = false;

    for _ in 0..params.max_iters.max(1) {
        let before = value;
        // Update the left factor with the right one fixed.
        let (_, f) = lowest_with_right_fixed(c, &right);
        left = f;
        // With the left span orthonormalized, re-optimize the right factor.
        let q = orthonormal_columns(left.clone());
        let (v, g) = lowest_with_left_fixed(c, &q);
        left = q;
        right = g;
        value = v;
        let q = orthonormal_columns(right.clone());
        left = absorb_left(&left, &right, &q);
        right = q;
        if before.is_finite() && before - value < params.conv_tol * scale {
            converged = true;
            break;
        }
    }
    Restart {
        value,
        left,
        right,
        converged,
    }
}

/// `F` for `v = sum_j F[:,j] (x) G[:,j]` minimizing `<v, C v>` with `G`
/// fixed and orthonormal.
fn lowest_with_right_fixed(c: &BipartiteOperator, g: &CMatrix) -> (f64, CMatrix) {
    let (d1, d2, k) = (c.d1(), c.d2(), g.cols());
    let n = d1 * k;
    let a = CMatrix::from_fn(n, n, |r, s| {
        let (h, j) = (r / k, r % k);
        let (hp, jp) = (s / k, s % k);
        let mut acc = ZERO;
        for l in 0..d2 {
            let gl = g[(l, j)].conj();
            if gl == ZERO {
                continue;
            }
            for lp in 0..d2 {
                acc += gl * c.at(h, l, hp, lp) * g[(lp, jp)];
            }
        }
        acc
    });
    let eig = herm_eig(&a.hermitian_part()).expect("compression is Hermitian");
    let w = eig.lowest_vector();
    (eig.min_eigenvalue(), CMatrix::new(d1, k, w).expect("shape"))
}

fn lowest_with_left_fixed(c: &BipartiteOperator, f: &CMatrix) -> (f64, CMatrix) {
    let (d1, d2, k) = (c.d1(), c.d2(), f.cols());
    let n = d2 * k;
    let b = CMatrix::from_fn(n, n, |r, s| {
        let (l, j) = (r / k, r % k);
        let (lp, jp) = (s / k, s % k);
        let mut acc = ZERO;
        for h in 0..d1 {
            let fh = f[(h, j)].conj();
            if fh == ZERO {
                continue;
            }
            for hp in 0..d1 {
                acc += fh * c.at(h, l, hp, lp) * f[(hp, jp)];
            }
        }
        acc
    });
    let eig = herm_eig(&b.hermitian_part()).expect("compression is Hermitian");
    let w = eig.lowest_vector();
    (eig.min_eigenvalue(), CMatrix::new(d2, k, w).expect("shape"))
}

/// Orthonormal basis of the column span, completed to `cols` columns.
fn orthonormal_columns(m: CMatrix) -> CMatrix {
    let (rows, cols) = (m.rows(), m.cols());
    let mut vs: Vec<Vec<C64>> = (0..cols).map(|j| m.col(j)).collect();
    complete_basis(&mut vs, rows);
    let mut out = CMatrix::zeros(rows, cols);
    for j in 0..cols {
        out.set_col(j, &vs[j]);
    }
    out
}

/// Left factor `F'` with `F G^T = F' Q^T`, for `Q` orthonormal spanning the
/// columns of `G`.
fn absorb_left(f: &CMatrix, g: &CMatrix, q: &CMatrix) -> CMatrix {
    let coeff = &q.adjoint() * g;
    f * &coeff.transpose()
}

fn compose(f: &CMatrix, g: &CMatrix) -> Vec<C64> {
    let (d1, d2, k) = (f.rows(), g.rows(), f.cols());
    let mut v = vec![ZERO; d1 * d2];
    for h in 0..d1 {
        for l in 0..d2 {
            v[h * d2 + l] = (0..k).map(|j| f[(h, j)] * g[(l, j)]).sum();
        }
    }
    v
}

/// Block positivity: `<f (x) g, C f (x) g> >= 0` for all product vectors.
pub fn is_block_positive(c: &BipartiteOperator, tol: f64, params: &SearchParams) -> Result<Verdict> {
    let eig = herm_eig(c.mat())?;
    let min_eig = eig.min_eigenvalue();
    if min_eig >= -tol {
        return Ok(Verdict::new("block-positive", Status::CertifiedYes, min_eig));
    }
    let r = min_product_expectation(c, params)?;
    Ok(if r.value < -tol {
        Verdict::new("block-positive", Status::CertifiedNo, r.value)
            .with_witness(Witness::ProductVector { f: r.f, g: r.g })
    } else {
        Verdict::new("block-positive", Status::NoViolationFound, r.value)
    })
}

/// k-positivity of the map whose Choi matrix is `C`.
pub fn is_k_positive(c: &BipartiteOperator, k: usize, tol: f64, params: &SearchParams) -> Result<Verdict> {
    let name = format!("{k}-positive");
    if k >= c.d1().min(c.d2()) && k >= 1 {
        return Ok(is_cp(c, tol)?.renamed(name));
    }
    let eig = herm_eig(c.mat())?;
    if eig.min_eigenvalue() >= -tol {
        return Ok(Verdict::new(name, Status::CertifiedYes, eig.min_eigenvalue()));
    }
    let r = k_positivity_min(c, k, params)?;
    Ok(if r.value < -tol {
        Verdict::new(name, Status::CertifiedNo, r.value)
            .with_witness(Witness::SchmidtVector { vector: r.vector, k })
    } else {
        Verdict::new(name, Status::NoViolationFound, r.value)
    })
}

/// Complete positivity: `C >= 0`, certified either way.
pub fn is_cp(c: &BipartiteOperator, tol: f64) -> Result<Verdict> {
    psd_verdict("completely-positive", c.mat(), tol)
}

/// Complete co-positivity: `C^Gamma >= 0` (second-factor partial transpose).
pub fn is_co_cp(c: &BipartiteOperator, tol: f64) -> Result<Verdict> {
    check_hermitian(c.mat())?;
    psd_verdict(
        "completely-copositive",
        c.partial_transpose(Factor::Second).mat(),
        tol,
    )
}

fn psd_verdict(name: &str, m: &CMatrix, tol: f64) -> Result<Verdict> {
    let eig = herm_eig(m)?;
    let min_eig = eig.min_eigenvalue();
    Ok(if min_eig >= -tol {
        Verdict::new(name, Status::CertifiedYes, min_eig)
    } else {
        Verdict::new(name, Status::CertifiedNo, min_eig)
            .with_witness(Witness::Eigenvector(eig.lowest_vector()))
    })
}

/// `C = P + Q^Gamma` with `P, Q` PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionCertificate {
    pub p: BipartiteOperator,
    pub q: BipartiteOperator,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecompositionOutcome {
    Certificate(DecompositionCertificate),
    /// Iteration budget exhausted; no claim either way.
    Inconclusive { residual: f64, iterations: usize },
}

impl DecompositionOutcome {
    pub fn certificate(&self) -> Option<&DecompositionCertificate> {
        match self {
            DecompositionOutcome::Certificate(c) => Some(c),
            DecompositionOutcome::Inconclusive { .. } => None,
        }
    }
}

pub fn decomposition_residual(c: &BipartiteOperator, p: &BipartiteOperator, q: &BipartiteOperator) -> f64 {
    let sum = p.mat() + q.partial_transpose(Factor::Second).mat();
    c.mat().max_diff(&sum)
}

/// Searches for `C = P + Q^Gamma` with `P, Q >= 0` by Dykstra's alternating
/// projections between the affine set `{P + Q^Gamma = C}` and the product
/// of PSD cones.
///
/// Succeeds when the PSD iterate satisfies the equation to within `tol`
/// (max-entry). Failure to converge is inconclusive.
pub fn decompose(c: &BipartiteOperator, max_iters: usize, tol: f64) -> Result<DecompositionOutcome> {
    check_hermitian(c.mat())?;
    let (d1, d2) = (c.d1(), c.d2());
    let cm = c.mat().hermitian_part();
    let c = BipartiteOperator::new(cm.clone(), d1, d2)?;
    let n = cm.rows();
    let wrap = |m: CMatrix| BipartiteOperator::new(m, d1, d2).expect("same dims");
    let zero = CMatrix::zeros(n, n);

    if herm_eig(&cm)?.min_eigenvalue() >= -tol {
        return Ok(certificate(&c, wrap(cm.clone()), wrap(zero), 0));
    }
    let ct = c.partial_transpose(Factor::Second);
    if herm_eig(ct.mat())?.min_eigenvalue() >= -tol {
        return Ok(certificate(&c, wrap(zero), ct, 0));
    }

    let gamma = |m: &CMatrix| wrap(m.clone()).partial_transpose(Factor::Second).into_mat();

    // Iterates live in the PSD cone; the affine projection is closed form:
    // with R = C - P - Q^Gamma, (P, Q) <- (P + R/2, Q + R^Gamma/2).
    let mut p = cm.scale_re(0.5);
    let mut q = gamma(&cm).scale_re(0.5);
    let mut inc_p = zero.clone();
    let mut inc_q = zero.clone();
    let mut residual = f64::INFINITY;

    for it in 1..=max_iters {
        let r = &(&cm - &p) - &gamma(&q);
        let half = r.scale_re(0.5);
        let yp = &p + &half;
        let yq = &q + &gamma(&half);

        let tp = &yp + &inc_p;
        let tq = &yq + &inc_q;
        let np = psd_projection(&tp);
        let nq = psd_projection(&tq);
        inc_p = &tp - &np;
        inc_q = &tq - &nq;
        p = np;
        q = nq;

        residual = cm.max_diff(&(&p + &gamma(&q)));
        if residual <= tol {
            return Ok(certificate(&c, wrap(p), wrap(q), it));
        }
    }
    Ok(DecompositionOutcome::Inconclusive {
        residual,
        iterations: max_iters,
    })
}

fn certificate(c: &BipartiteOperator, p: BipartiteOperator, q: BipartiteOperator, iterations: usize) -> DecompositionOutcome {
    let residual = decomposition_residual(c, &p, &q);
    DecompositionOutcome::Certificate(DecompositionCertificate {
        p,
        q,
        residual,
        iterations,
    })
}

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped).
pub fn psd_projection(m: &CMatrix) -> CMatrix {
    let eig = herm_eig(&m.hermitian_part()).expect("symmetrized input");
    eig.functional_calculus(|l| (l > 0.0).then_some(l)).hermitian_part()
}

/// Decomposability verdict: a certificate proves it; a block-positivity
/// violation disproves it; anything else is inconclusive.
pub fn is_decomposable(
    c: &BipartiteOperator,
    max_iters: usize,
    tol: f64,
    bp: Option<&Verdict>,
) -> Result<Verdict> {
    match decompose(c, max_iters, tol)? {
        DecompositionOutcome::Certificate(cert) => {
            Ok(Verdict::new("decomposable", Status::CertifiedYes, cert.residual).with_witness(
                Witness::Decomposition {
                    p: cert.p.into_mat(),
                    q: cert.q.into_mat(),
                },
            ))
        }
        DecompositionOutcome::Inconclusive { residual, .. } => Ok(match bp {
            Some(v) if v.status == Status::CertifiedNo => Verdict {
                property: "decomposable".into(),
                status: Status::CertifiedNo,
                value: v.value,
                witness: v.witness.clone(),
            },
            _ => Verdict::new("decomposable", Status::Inconclusive, residual),
        }),
    }
}

/// Result of a membership test for the normalized block-positive sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub verdict: Verdict,
    pub hermitian_deviation: f64,
    pub block_positive: Verdict,
    pub alpha: NormEstimate,
    pub alpha_status: Status,
    pub trace: f64,
    /// `Tr C <= n alpha(C) + tol`, evaluated with the upper alpha bound.
    pub trace_bound_holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipParams {
    pub bp_tol: f64,
    /// Half-width of the accepted window around `alpha = 1`.
    pub alpha_tol: f64,
    pub trace_tol: f64,
    pub search: SearchParams,
    pub alpha: AlphaParams,
}

impl Default for MembershipParams {
    fn default() -> Self {
        Self {
            bp_tol: 1e-9,
            alpha_tol: 0.05,
            trace_tol: 1e-8,
            search: SearchParams::default(),
            alpha: AlphaParams::default(),
        }
    }
}

/// Membership in the set of Hermitian, block-positive matrices with
/// `alpha(C) = 1`.
pub fn membership_d0(c: &BipartiteOperator, params: &MembershipParams) -> Result<Membership> {
    membership(c, params, false, None)
}

/// Membership in the subset of [`membership_d0`] with `Tr C = n`.
pub fn membership_d(c: &BipartiteOperator, params: &MembershipParams) -> Result<Membership> {
    membership(c, params, true, None)
}

/// Both memberships, sharing one α estimate and one block-positivity search.
pub fn membership_both(c: &BipartiteOperator, params: &MembershipParams) -> Result<(Membership, Membership)> {
    let d0 = membership(c, params, false, None)?;
    let d = membership(c, params, true, Some((d0.alpha.clone(), d0.block_positive.clone())))?;
    Ok((d0, d))
}

fn membership(
    c: &BipartiteOperator,
    params: &MembershipParams,
    normalized: bool,
    shared: Option<(NormEstimate, Verdict)>,
) -> Result<Membership> {
    if c.d1() != c.d2() {
        return Err(Error::DimensionMismatch(format!(
            "membership needs d1 = d2, got {} and {}",
            c.d1(),
            c.d2()
        )));
    }
    let name = if normalized { "member-D" } else { "member-D0" };
    let n = c.d1() as f64;
    let m = c.mat();
    let dev = m.hermitian_deviation();
    let trace = c.trace().re;
    let (alpha, shared_bp) = match shared {
        Some((a, bp)) => (a, Some(bp)),
        None => (alpha_norm(c, &params.alpha)?, None),
    };
    let trace_bound_holds = trace <= n * alpha.upper + params.trace_tol;

    if dev > crate::matcore::HERMITIAN_TOL {
        let (row, col) = worst_hermitian_entry(m);
        let verdict = Verdict::new(name, Status::CertifiedNo, dev)
            .with_witness(Witness::Entry { row, col, deviation: dev });
        return Ok(Membership {
            block_positive: Verdict::new("block-positive", Status::Inconclusive, f64::NAN),
            verdict,
            hermitian_deviation: dev,
            alpha,
            alpha_status: Status::Inconclusive,
            trace,
            trace_bound_holds,
        });
    }

    let bp = match shared_bp {
        Some(bp) => bp,
        None => is_block_positive(c, params.bp_tol, &params.search)?,
    };
    let (lo, hi) = (1.0 - params.alpha_tol, 1.0 + params.alpha_tol);
    let alpha_status = if alpha.lower >= lo && alpha.upper <= hi {
        Status::CertifiedYes
    } else if alpha.upper < lo || alpha.lower > hi {
        Status::CertifiedNo
    } else {
        Status::Inconclusive
    };

    let verdict = if bp.status == Status::CertifiedNo {
        Verdict {
            property: name.into(),
            ..bp.clone()
        }
    } else if normalized && (trace - n).abs() > params.trace_tol {
        Verdict::new(name, Status::CertifiedNo, trace).with_witness(Witness::Trace { trace, expected: n })
    } else if alpha_status == Status::CertifiedNo {
        Verdict::new(name, Status::CertifiedNo, alpha.lower).with_witness(Witness::Interval {
            lower: alpha.lower,
            upper: alpha.upper,
        })
    } else if alpha_status == Status::Inconclusive {
        Verdict::new(name, Status::Inconclusive, alpha.lower).with_witness(Witness::Interval {
            lower: alpha.lower,
            upper: alpha.upper,
        })
    } else {
        let status = if bp.status == Status::CertifiedYes {
            Status::CertifiedYes
        } else {
            Status::NoViolationFound
        };
        Verdict::new(name, status, alpha.lower).with_witness(Witness::Interval {
            lower: alpha.lower,
            upper: alpha.upper,
        })
    };

    Ok(Membership {
        verdict,
        hermitian_deviation: dev,
        block_positive: bp,
        alpha,
        alpha_status,
        trace,
        trace_bound_holds,
    })
}

fn worst_hermitian_entry(m: &CMatrix) -> (usize, usize) {
    let n = m.rows();
    let mut best = (0, 0, -1.0);
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    (best.0, best.1)
}

/// Options for [`classify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub tol: f64,
    pub search: SearchParams,
    /// Largest k for the k-positivity verdicts.
    pub max_k: usize,
    pub decompose_iters: usize,
    pub decompose_tol: f64,
    pub membership: MembershipParams,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            search: SearchParams::default(),
            max_k: 1,
            decompose_iters: 5000,
            decompose_tol: 1e-8,
            membership: MembershipParams::default(),
        }
    }
}

/// Per-property verdicts for one Choi matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub verdicts: Vec<Verdict>,
    pub d0: Option<Membership>,
    pub d: Option<Membership>,
}

impl ClassificationReport {
    pub fn get(&self, property: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.property == property)
    }
}

/// Runs every classifier on a Hermitian Choi matrix. Membership in the
/// normalized sets is only evaluated for `d1 = d2`.
pub fn classify(c: &BipartiteOperator, opts: &ClassifyOptions) -> Result<ClassificationReport> {
    check_hermitian(c.mat())?;
    let mut verdicts = Vec::new();
    let bp = is_block_positive(c, opts.tol, &opts.search)?;
    verdicts.push(bp.clone());
    let kmax = opts.max_k.clamp(1, c.d1().min(c.d2()));
    for k in 1..=kmax {
        verdicts.push(is_k_positive(c, k, opts.tol, &opts.search)?);
    }
    verdicts.push(is_cp(c, opts.tol)?);
    verdicts.push(is_co_cp(c, opts.tol)?);
    verdicts.push(is_decomposable(c, opts.decompose_iters, opts.decompose_tol, Some(&bp))?);

    let (d0, d) = if c.d1() == c.d2() {
        let mut mp = opts.membership;
        mp.search = opts.search;
        let (d0, d) = membership_both(c, &mp)?;
        verdicts.push(d0.verdict.clone());
        verdicts.push(d.verdict.clone());
        (Some(d0), Some(d))
    } else {
        (None, None)
    };
    Ok(ClassificationReport { verdicts, d0, d })
}
