//! Certified intervals for the projective (π) and injective (ε) norms on
//! `M_n (x) M_m`, and for the norm α dual to π.
//!
//! The first factor carries the operator norm and the second the trace
//! norm. The pairing between an operator `rho` and a tensor `u` is
//! `Tr(rho u_flat)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matcore::{
    herm_eig, operator_norm, polar_unitary, top_singular_pair, trace_norm, BipartiteOperator,
    CMatrix, Factor, C64, ZERO,
};
use crate::qmaps::TensorElement;
use crate::random::{gaussian_vector, stream_rng, unit_vector, unitary};

/// Evidence for a lower bound; re-evaluating it reproduces the bound.
#[derive(Debug, Clone, PartialEq)]
pub enum LowerWitness {
    Zero,
    /// `u -> sum_i <a|x_i|b> Tr(V y_i)` with `V` unitary; dual norm one.
    RankOne { a: Vec<C64>, b: Vec<C64>, v: CMatrix },
    /// `u -> sum_i Tr(A x_i B y_i)` (`x_i^T` when `transposed`) with `A`,
    /// `B` unitary; dual norm one.
    Sandwich { a: CMatrix, b: CMatrix, transposed: bool },
    /// `||(I (x) <d|) rho (I (x) |c>)||_tr`.
    SliceVectors { c: Vec<C64>, d: Vec<C64> },
}

/// Evidence for an upper bound.
#[derive(Debug, Clone, PartialEq)]
pub enum UpperWitness {
    Zero,
    /// Exact decomposition with cost `sum ||x_s||_op ||y_s||_tr`.
    Decomposition(TensorElement),
    /// `sqrt(m) * (sum_jl ||Z_jl||_op^2)^(1/2)` over the second-factor
    /// blocks `Z_jl` of `u_flat`.
    BlockBound,
    /// `||rho||_tr`.
    TraceNorm,
    /// Branch and bound over the Bloch sphere with this many cells.
    Cells(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    pub lower: f64,
    pub upper: f64,
    pub lower_witness: LowerWitness,
    pub upper_witness: UpperWitness,
    pub iterations: usize,
}

impl NormEstimate {
    fn zero() -> Self {
        Self {
            lower: 0.0,
            upper: 0.0,
            lower_witness: LowerWitness::Zero,
            upper_witness: UpperWitness::Zero,
            iterations: 0,
        }
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.lower - tol <= x && x <= self.upper + tol
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }
}

impl LowerWitness {
    /// Value of the witness functional on `u` (ε and π estimates).
    pub fn evaluate_tensor(&self, u: &TensorElement) -> f64 {
        let flat = u.flatten();
        match self {
            LowerWitness::Zero => 0.0,
            LowerWitness::RankOne { a, b, v } => rank_one_value(&flat, a, b, v),
            LowerWitness::Sandwich { a, b, transposed } => sandwich_value(&flat, a, b, *transposed),
            LowerWitness::SliceVectors { .. } => f64::NAN,
        }
    }

    /// Value of the witness on `rho` (α estimates).
    pub fn evaluate_state(&self, rho: &BipartiteOperator) -> f64 {
        match self {
            LowerWitness::Zero => 0.0,
            LowerWitness::SliceVectors { c, d } => trace_norm(&rho.second_factor_slice(d, c)),
            _ => f64::NAN,
        }
    }
}

/// `sum_s ||x_s||_op ||y_s||_tr`.
pub fn decomposition_cost(u: &TensorElement) -> f64 {
    u.terms().iter().map(|(x, y)| term_cost(x, y)).sum()
}

fn term_cost(x: &CMatrix, y: &CMatrix) -> f64 {
    let nx = operator_norm(x);
    if nx == 0.0 {
        return 0.0;
    }
    nx * trace_norm(y)
}

/// Multi-start parameters for the ε search and the probe families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormParams {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for NormParams {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iters: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiParams {
    /// Term budget; `None` means `n^2`. Never below the operator-Schmidt
    /// rank, which an exact decomposition needs.
    pub r_max: Option<usize>,
    pub restarts: usize,
    /// Shear sweeps per restart.
    pub sweeps: usize,
    pub seed: u64,
}

impl Default for PiParams {
    fn default() -> Self {
        Self {
            r_max: None,
            restarts: 4,
            sweeps: 30,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaParams {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Branch and bound stops once `upper <= (1 + target_gap) * lower`.
    pub target_gap: f64,
    pub max_cells: usize,
}

impl Default for AlphaParams {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iters: 200,
            seed: 0,
            target_gap: 0.04,
            max_cells: 200_000,
        }
    }
}

const ASCENT_TOL: f64 = 1e-13;
/// Relative gap below which an upper-bound search stops.
const GAP_TOL: f64 = 1e-10;

/// `(<a| (x) I) U (|b> (x) I)` paired with `V`.
fn rank_one_value(u: &BipartiteOperator, a: &[C64], b: &[C64], v: &CMatrix) -> f64 {
    v.trace_product(&u.first_factor_slice(a, b)).norm()
}

/// `X_V = sum_jl U[(i,j),(k,l)] V[l,j]`, i.e. `sum_i Tr(V y_i) x_i`.
fn contract_second(u: &BipartiteOperator, v: &CMatrix) -> CMatrix {
    let (n, m) = (u.d1(), u.d2());
    CMatrix::from_fn(n, n, |i, k| {
        let mut acc = ZERO;
        for j in 0..m {
            for l in 0..m {
                acc += u.at(i, j, k, l) * v[(l, j)];
            }
        }
        acc
    })
}

fn sandwich_value(u: &BipartiteOperator, a: &CMatrix, b: &CMatrix, transposed: bool) -> f64 {
    let u = if transposed {
        u.partial_transpose(Factor::First)
    } else {
        u.clone()
    };
    a.trace_product(&sandwich_w(&u, b)).norm()
}

/// `W_B = sum_i x_i B y_i`.
fn sandwich_w(u: &BipartiteOperator, b: &CMatrix) -> CMatrix {
    let n = u.d1();
    CMatrix::from_fn(n, n, |i, p| {
        let mut acc = ZERO;
        for k in 0..n {
            for j in 0..n {
                acc += u.at(i, j, k, p) * b[(k, j)];
            }
        }
        acc
    })
}

/// `W'_A = sum_i y_i A x_i`.
fn sandwich_w_prime(u: &BipartiteOperator, a: &CMatrix) -> CMatrix {
    let n = u.d1();
    CMatrix::from_fn(n, n, |j, k| {
        let mut acc = ZERO;
        for p in 0..n {
            for i in 0..n {
                acc += u.at(i, j, k, p) * a[(p, i)];
            }
        }
        acc
    })
}

struct EpsCandidate {
    value: f64,
    a: Vec<C64>,
    b: Vec<C64>,
    v: CMatrix,
    iters: usize,
}

/// Alternating ascent of `|<a| X_V |b>|` over unit `a`, `b` and unitary `V`.
fn eps_ascent(u: &BipartiteOperator, mut a: Vec<C64>, mut b: Vec<C64>, max_iters: usize, scale: f64) -> EpsCandidate {
    let mut best = f64::NEG_INFINITY;
    let mut v = CMatrix::identity(u.d2());
    let mut iters = 0;
    for it in 0..max_iters.max(1) {
        iters = it + 1;
        let y = u.first_factor_slice(&a, &b);
        v = polar_unitary(&y).adjoint();
        let x = contract_second(u, &v);
        let (sigma, p, q) = top_singular_pair(&x);
        a = p;
        b = q;
        if sigma - best < ASCENT_TOL * scale {
            break;
        }
        best = sigma;
    }
    let value = rank_one_value(u, &a, &b, &v);
    EpsCandidate { value, a, b, v, iters }
}

fn flat_scale(u: &BipartiteOperator) -> f64 {
    u.mat().max_abs()
}

/// Bits kept by [`canonical`].
const GRID_BITS: i32 = 30;

/// Canonical search input: `u / max|u_ij|` rounded to a `2^-GRID_BITS`
/// grid, with the divisor. `None` for zero. Scaling `u` changes the
/// normalized entries only in the last bits, so the searches see the same
/// grid operator and results are covariant under `u -> lambda u`. Bounds are
/// then transferred back to `u` exactly.
fn canonical(u: &BipartiteOperator) -> Option<(BipartiteOperator, f64)> {
    let s = flat_scale(u);
    if s == 0.0 {
        return None;
    }
    let g = f64::powi(2.0, GRID_BITS);
    let snap = |x: f64| (x / s * g).round() / g;
    Some((u.map_mat(|m| m.map(|z| C64::new(snap(z.re), snap(z.im)))), s))
}

/// Decomposition of the grid residual `u - s q`.
fn residual_terms(u: &BipartiteOperator, q: &BipartiteOperator, s: f64) -> Vec<(CMatrix, CMatrix)> {
    let e = BipartiteOperator::new(u.mat() - &q.mat().scale_re(s), u.d1(), u.d2()).expect("shape");
    if e.mat().max_abs() == 0.0 {
        return Vec::new();
    }
    TensorElement::from_operator(&e).terms().to_vec()
}

/// ε(u) = sup over unit `a`, `b` of `||sum_i <a|x_i|b> y_i||_tr`.
///
/// The lower bound is the best alternating-ascent value; the upper bound is
/// the smaller of π's upper bound and the block bound.
pub fn epsilon_norm(u: &TensorElement, params: &NormParams) -> Result<NormEstimate> {
    let pi = pi_norm(
        u,
        &PiParams {
            seed: params.seed,
            ..PiParams::default()
        },
    )?;
    epsilon_with_pi(u, params, &pi)
}

fn epsilon_with_pi(u: &TensorElement, params: &NormParams, pi: &NormEstimate) -> Result<NormEstimate> {
    let flat = u.flatten();
    let Some((q, _)) = canonical(&flat) else {
        return Ok(NormEstimate::zero());
    };
    let best = eps_search(&q, params, flat_scale(&q));
    let block = block_bound(&flat);
    let (upper, upper_witness) = if block < pi.upper {
        (block, UpperWitness::BlockBound)
    } else {
        (pi.upper, pi.upper_witness.clone())
    };
    let lower_witness = LowerWitness::RankOne {
        a: best.a,
        b: best.b,
        v: best.v,
    };
    Ok(NormEstimate {
        lower: lower_witness.evaluate_tensor(u).min(upper),
        upper,
        lower_witness,
        upper_witness,
        iterations: best.iters,
    })
}

fn eps_search(flat: &BipartiteOperator, params: &NormParams, scale: f64) -> EpsCandidate {
    let n = flat.d1();
    let restarts = params.restarts.max(1);
    let mut cands: Vec<EpsCandidate> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(params.seed, r as u64);
            let a = unit_vector(&mut rng, n);
            let b = unit_vector(&mut rng, n);
            eps_ascent(flat, a, b, params.max_iters, scale)
        })
        .collect();
    // Deterministic starts from the top singular pair of the first block.
    let x0 = contract_second(flat, &CMatrix::identity(flat.d2()));
    let (_, p, q) = top_singular_pair(&x0);
    cands.push(eps_ascent(flat, p, q, params.max_iters, scale));
    let iters = cands.iter().map(|c| c.iters).sum();
    let mut best = pick_max(cands, |c| c.value);
    best.iters = iters;
    best
}

fn pick_max<T>(v: Vec<T>, key: impl Fn(&T) -> f64) -> T {
    let mut best: Option<(f64, T)> = None;
    for x in v {
        let k = key(&x);
        if best.as_ref().map_or(true, |(b, _)| k > *b) {
            best = Some((k, x));
        }
    }
    best.expect("non-empty").1
}

fn block_bound(u: &BipartiteOperator) -> f64 {
    let (n, m) = (u.d1(), u.d2());
    let mut acc = 0.0;
    for j in 0..m {
        for l in 0..m {
            let z = CMatrix::from_fn(n, n, |i, k| u.at(i, j, k, l));
            acc += operator_norm(&z).powi(2);
        }
    }
    (m as f64).sqrt() * acc.sqrt()
}

/// π(u) = inf of `sum ||x_s||_op ||y_s||_tr` over decompositions.
///
/// Upper bound: operator-Schmidt decomposition padded with zero terms,
/// improved by shear moves `x_j += t x_k`, `y_k -= t y_j`, which keep the
/// represented tensor fixed. Lower bound: the best of the rank-one probes
/// and, for `n = m`, the sandwich probes `x -> A x B` and `x -> A x^T B`.
pub fn pi_norm(u: &TensorElement, params: &PiParams) -> Result<NormEstimate> {
    if params.r_max == Some(0) {
        return Err(Error::InvalidArgument("r_max must be at least 1".into()));
    }
    let flat = u.flatten();
    let Some((q, s)) = canonical(&flat) else {
        return Ok(NormEstimate::zero());
    };
    let est = pi_unit(&q, params)?;
    let UpperWitness::Decomposition(dec) = &est.upper_witness else {
        unreachable!("pi upper bounds are decompositions");
    };
    let mut terms: Vec<(CMatrix, CMatrix)> = dec.terms().iter().map(|(x, y)| (x.scale_re(s), y.clone())).collect();
    terms.extend(residual_terms(&flat, &q, s));
    let mut dec = TensorElement::new(terms)?;
    let mut upper = decomposition_cost(&dec);
    // The exact Schmidt form avoids the grid residual when it is already best.
    let schmidt = TensorElement::from_operator(&flat);
    let schmidt_cost = decomposition_cost(&schmidt);
    if schmidt_cost <= upper {
        dec = schmidt;
        upper = schmidt_cost;
    }
    let lower = est.lower_witness.evaluate_tensor(u).min(upper);
    Ok(NormEstimate {
        lower,
        upper,
        lower_witness: est.lower_witness,
        upper_witness: UpperWitness::Decomposition(dec),
        iterations: est.iterations,
    })
}

fn pi_unit(flat: &BipartiteOperator, params: &PiParams) -> Result<NormEstimate> {
    let scale = flat_scale(flat);
    let (n, m) = (flat.d1(), flat.d2());
    let probe = NormParams {
        restarts: 8,
        max_iters: 100,
        seed: params.seed,
    };

    // Lower bound from dual-norm-one probes.
    let eps = eps_search(flat, &probe, scale);
    let mut lower = eps.value;
    let mut lower_witness = LowerWitness::RankOne {
        a: eps.a.clone(),
        b: eps.b.clone(),
        v: eps.v.clone(),
    };
    let mut iterations = eps.iters;
    if n == m {
        for transposed in [false, true] {
            let (val, a, b, it) = sandwich_search(flat, transposed, &probe, scale);
            iterations += it;
            if val > lower {
                lower = val;
                lower_witness = LowerWitness::Sandwich { a, b, transposed };
            }
        }
    }

    // Upper bound from explicit decompositions.
    let schmidt = TensorElement::from_operator(flat);
    let schmidt_cost = decomposition_cost(&schmidt);
    if schmidt_cost - lower <= GAP_TOL * schmidt_cost {
        return Ok(NormEstimate {
            lower: lower.min(schmidt_cost),
            upper: schmidt_cost,
            lower_witness,
            upper_witness: UpperWitness::Decomposition(schmidt),
            iterations,
        });
    }
    let rank = schmidt.len();
    let r = params.r_max.unwrap_or(n * n).max(rank);
    let restarts = params.restarts.max(1);
    let results: Vec<(f64, Vec<(CMatrix, CMatrix)>, usize)> = (0..restarts)
        .into_par_iter()
        .map(|idx| {
            let mut rng = stream_rng(params.seed, idx as u64);
            let mut terms: Vec<(CMatrix, CMatrix)> = schmidt.terms().to_vec();
            while terms.len() < r {
                let y = CMatrix::new(m, m, gaussian_vector(&mut rng, m * m)).expect("shape");
                terms.push((CMatrix::zeros(n, n), y.scale_re(1.0 / y.frobenius())));
            }
            if idx > 0 && r > 1 {
                terms = mix_terms(&terms, &unitary(&mut rng, r));
            }
            rebalance(&mut terms);
            let mut dec = Decomposition::new(terms);
            let sweeps = dec.descend(params.sweeps, lower);
            (dec.cost(), dec.terms, sweeps)
        })
        .collect();
    iterations += results.iter().map(|r| r.2).sum::<usize>();
    let (_, terms, _) = pick_max(results, |r| -r.0);
    let dec = TensorElement::new(terms)?;
    let upper = decomposition_cost(&dec);
    Ok(NormEstimate {
        lower: lower.min(upper),
        upper,
        lower_witness,
        upper_witness: UpperWitness::Decomposition(dec),
        iterations,
    })
}

fn sandwich_search(u: &BipartiteOperator, transposed: bool, params: &NormParams, scale: f64) -> (f64, CMatrix, CMatrix, usize) {
    let u = if transposed {
        u.partial_transpose(Factor::First)
    } else {
        u.clone()
    };
    let n = u.d1();
    let restarts = params.restarts.max(1);
    let runs: Vec<(f64, CMatrix, CMatrix, usize)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let b0 = if r == 0 {
                CMatrix::identity(n)
            } else {
                let mut rng = stream_rng(params.seed ^ 0x5a5a_5a5a, r as u64);
                unitary(&mut rng, n)
            };
            sandwich_ascent(&u, b0, params.max_iters, scale)
        })
        .collect();
    let iters = runs.iter().map(|r| r.3).sum();
    let (v, a, b, _) = pick_max(runs, |r| r.0);
    (v, a, b, iters)
}

fn sandwich_ascent(u: &BipartiteOperator, mut b: CMatrix, max_iters: usize, scale: f64) -> (f64, CMatrix, CMatrix, usize) {
    let n = u.d1();
    let mut a = CMatrix::identity(n);
    let mut best = f64::NEG_INFINITY;
    let mut iters = 0;
    for it in 0..max_iters.max(1) {
        iters = it + 1;
        let w = sandwich_w(u, &b);
        a = polar_unitary(&w).adjoint();
        let wp = sandwich_w_prime(u, &a);
        b = polar_unitary(&wp).adjoint();
        let val = b.trace_product(&wp).norm();
        if val - best < ASCENT_TOL * scale {
            break;
        }
        best = val;
    }
    let value = a.trace_product(&sandwich_w(u, &b)).norm();
    (value, a, b, iters)
}

/// `x'_t = sum_s x_s R[s,t]`, `y'_t = sum_s y_s conj(R[s,t])` for unitary `R`.
fn mix_terms(terms: &[(CMatrix, CMatrix)], r: &CMatrix) -> Vec<(CMatrix, CMatrix)> {
    let k = terms.len();
    (0..k)
        .map(|t| {
            let (n, m) = (terms[0].0.rows(), terms[0].1.rows());
            let mut x = CMatrix::zeros(n, n);
            let mut y = CMatrix::zeros(m, m);
            for (s, (xs, ys)) in terms.iter().enumerate() {
                x = &x + &xs.scale(r[(s, t)]);
                y = &y + &ys.scale(r[(s, t)].conj());
            }
            (x, y)
        })
        .collect()
}

/// Scales each term so its two factor norms agree; costs are unchanged.
fn rebalance(terms: &mut [(CMatrix, CMatrix)]) {
    for (x, y) in terms.iter_mut() {
        let (nx, ny) = (operator_norm(x), trace_norm(y));
        if nx > 0.0 && ny > 0.0 {
            let s = (ny / nx).sqrt();
            *x = x.scale_re(s);
            *y = y.scale_re(1.0 / s);
        }
    }
}

/// Search-time cost from the Gram eigenvalues; the reported bound is
/// recomputed with [`decomposition_cost`].
fn fast_term_cost(x: &CMatrix, y: &CMatrix) -> f64 {
    let gx = herm_eig(&(&x.adjoint() * x).hermitian_part()).expect("Gram matrix");
    let nx = gx.max_eigenvalue().max(0.0).sqrt();
    if nx == 0.0 {
        return 0.0;
    }
    let gy = herm_eig(&(&y.adjoint() * y).hermitian_part()).expect("Gram matrix");
    nx * gy.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum::<f64>()
}

struct Decomposition {
    terms: Vec<(CMatrix, CMatrix)>,
    costs: Vec<f64>,
}

impl Decomposition {
    fn new(terms: Vec<(CMatrix, CMatrix)>) -> Self {
        let costs = terms.iter().map(|(x, y)| fast_term_cost(x, y)).collect();
        Self { terms, costs }
    }

    fn cost(&self) -> f64 {
        self.costs.iter().sum()
    }

    /// Greedy shear descent; returns the number of sweeps used.
    fn descend(&mut self, sweeps: usize, lower: f64) -> usize {
        let r = self.terms.len();
        if r < 2 {
            return 0;
        }
        let dirs = [C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0)];
        let mut step = 0.25;
        for sweep in 0..sweeps {
            if self.cost() - lower <= GAP_TOL * self.cost() || step < 1e-4 {
                return sweep;
            }
            let mut improved = false;
            for j in 0..r {
                for k in 0..r {
                    if j == k || self.costs[k] == 0.0 && self.terms[k].0.max_abs() == 0.0 {
                        continue;
                    }
                    let (xj, yj) = &self.terms[j];
                    let (xk, yk) = &self.terms[k];
                    let ratio = xj.frobenius().max(1e-300) / xk.frobenius().max(1e-300);
                    let ratio = if ratio.is_finite() && xj.max_abs() > 0.0 { ratio } else { 1.0 };
                    let before = self.costs[j] + self.costs[k];
                    let mut best: Option<(f64, f64, CMatrix, CMatrix, CMatrix, CMatrix)> = None;
                    for d in dirs {
                        let t = d * (step * ratio);
                        let nxj = xj + &xk.scale(t);
                        let nyk = yk - &yj.scale(t);
                        let cj = fast_term_cost(&nxj, yj);
                        let ck = fast_term_cost(xk, &nyk);
                        if cj + ck < before * (1.0 - 1e-12)
                            && best.as_ref().map_or(true, |b| cj + ck < b.0 + b.1)
                        {
                            best = Some((cj, ck, nxj, yj.clone(), xk.clone(), nyk));
                        }
                    }
                    if let Some((cj, ck, nxj, nyj, nxk, nyk)) = best {
                        self.terms[j] = (nxj, nyj);
                        self.terms[k] = (nxk, nyk);
                        self.costs[j] = cj;
                        self.costs[k] = ck;
                        improved = true;
                    }
                }
            }
            rebalance(&mut self.terms);
            if !improved {
                step *= 0.5;
            }
        }
        sweeps
    }
}

/// α(rho) = sup over unit `c`, `d` of `||(I (x) <d|) rho (I (x) |c>)||_tr`.
///
/// The lower bound comes from alternating ascent, including the starts
/// `c = d = e_k`, so it is at least `|Tr rho| / n`. For `n = 2` the upper
/// bound is certified by branch and bound over `d`, with the supremum over
/// `c` evaluated in closed form; otherwise it is `||rho||_tr`.
pub fn alpha_norm(rho: &BipartiteOperator, params: &AlphaParams) -> Result<NormEstimate> {
    if rho.d1() != rho.d2() {
        return Err(Error::DimensionMismatch(format!(
            "alpha needs d1 = d2, got {} and {}",
            rho.d1(),
            rho.d2()
        )));
    }
    let Some((q, s)) = canonical(rho) else {
        return Ok(NormEstimate::zero());
    };
    let est = alpha_unit(&q, params);
    // alpha is a norm, so alpha(rho) <= s alpha(q) + ||rho - s q||_tr.
    let tn = trace_norm(rho.mat());
    let (upper, upper_witness) = match est.upper_witness {
        UpperWitness::Cells(n) => {
            let slack = trace_norm(&(rho.mat() - &q.mat().scale_re(s)));
            let bb = s * est.upper + slack;
            if bb < tn {
                (bb, UpperWitness::Cells(n))
            } else {
                (tn, UpperWitness::TraceNorm)
            }
        }
        _ => (tn, UpperWitness::TraceNorm),
    };
    Ok(NormEstimate {
        lower: est.lower_witness.evaluate_state(rho).min(upper),
        upper,
        lower_witness: est.lower_witness,
        upper_witness,
        iterations: est.iterations,
    })
}

fn alpha_unit(rho: &BipartiteOperator, params: &AlphaParams) -> NormEstimate {
    let scale = rho.mat().max_abs();
    let n = rho.d1();
    let restarts = params.restarts.max(1);
    let mut runs: Vec<(f64, Vec<C64>, Vec<C64>, usize)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(params.seed, r as u64);
            let c = unit_vector(&mut rng, n);
            let d = unit_vector(&mut rng, n);
            alpha_ascent(rho, c, d, params.max_iters, scale)
        })
        .collect();
    for k in 0..n {
        let e = crate::matcore::basis_vector(n, k);
        runs.push(alpha_ascent(rho, e.clone(), e, params.max_iters, scale));
    }
    let mut iterations: usize = runs.iter().map(|r| r.3).sum();
    let (lower, mut c, mut d, _) = pick_max(runs, |r| r.0);

    let tn = trace_norm(rho.mat());
    let (mut upper, mut upper_witness) = (tn, UpperWitness::TraceNorm);
    if n == 2 {
        let bb = alpha_branch_and_bound(rho, lower, params);
        iterations += bb.cells;
        if bb.lower > lower {
            c = bb.c;
            d = bb.d;
        }
        if bb.upper < upper {
            upper = bb.upper;
            upper_witness = UpperWitness::Cells(bb.cells);
        }
    }
    let value = trace_norm(&rho.second_factor_slice(&d, &c));
    NormEstimate {
        lower: value.min(upper),
        upper,
        lower_witness: LowerWitness::SliceVectors { c, d },
        upper_witness,
        iterations,
    }
}

fn alpha_ascent(rho: &BipartiteOperator, mut c: Vec<C64>, mut d: Vec<C64>, max_iters: usize, scale: f64) -> (f64, Vec<C64>, Vec<C64>, usize) {
    let n = rho.d1();
    let mut best = f64::NEG_INFINITY;
    let mut iters = 0;
    for it in 0..max_iters.max(1) {
        iters = it + 1;
        let m = rho.second_factor_slice(&d, &c);
        let x = polar_unitary(&m).adjoint();
        // K[j,l] = Tr(X B_jl) with B_jl[i,k] = rho[(i,j),(k,l)].
        let k = CMatrix::from_fn(n, n, |j, l| {
            let mut acc = ZERO;
            for i in 0..n {
                for kk in 0..n {
                    acc += x[(kk, i)] * rho.at(i, j, kk, l);
                }
            }
            acc
        });
        let (sigma, u, v) = top_singular_pair(&k);
        d = u;
        c = v;
        if sigma - best < ASCENT_TOL * scale {
            break;
        }
        best = sigma;
    }
    let value = trace_norm(&rho.second_factor_slice(&d, &c));
    (value, c, d, iters)
}

struct BranchResult {
    lower: f64,
    upper: f64,
    c: Vec<C64>,
    d: Vec<C64>,
    cells: usize,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    bound: f64,
    theta: (f64, f64),
    phi: (f64, f64),
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(other.theta.0.total_cmp(&self.theta.0))
            .then(other.phi.0.total_cmp(&self.phi.0))
    }
}

fn bloch(theta: f64, phi: f64) -> Vec<C64> {
    vec![
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ]
}

/// `sup_c ||M(c, d)||_tr` for `n = 2`, with a maximizing `c`.
///
/// For 2x2 `M`, `||M||_tr^2 = ||M||_F^2 + 2|det M|`. With `M = sum_l c_l N_l`
/// both terms are quadratic in `c`, and the phase of `c` turns `|det|` into
/// `Re det`, so the supremum is the top eigenvalue of a real 4x4 form.
fn slice_sup(rho: &BipartiteOperator, d: &[C64]) -> (f64, Vec<C64>) {
    let nl: Vec<CMatrix> = (0..2)
        .map(|l| {
            CMatrix::from_fn(2, 2, |i, k| {
                (0..2).map(|j| d[j].conj() * rho.at(i, j, k, l)).sum()
            })
        })
        .collect();
    let det = |m: &CMatrix| m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let g = CMatrix::from_fn(2, 2, |l, lp| nl[l].adjoint().trace_product(&nl[lp]));
    let (d1, d2) = (det(&nl[0]), det(&nl[1]));
    let half_cross = (det(&(&nl[0] + &nl[1])) - d1 - d2) * 0.5;
    let s = [[d1, half_cross], [half_cross, d2]];
    let q = CMatrix::from_fn(4, 4, |r, col| {
        let (br, i) = (r / 2, r % 2);
        let (bc, j) = (col / 2, col % 2);
        let (gr, gi) = (g[(i, j)].re, g[(i, j)].im);
        let (a, b) = (s[i][j].re, s[i][j].im);
        let v = match (br, bc) {
            (0, 0) => gr + 2.0 * a,
            (0, 1) => -gi - 2.0 * b,
            (1, 0) => gi - 2.0 * b,
            _ => gr - 2.0 * a,
        };
        C64::new(v, 0.0)
    });
    let eig = herm_eig(&q.hermitian_part()).expect("symmetric form");
    let top = eig.max_eigenvalue().max(0.0);
    let w = eig.vector(0);
    let mut c = vec![C64::new(w[0].re, w[2].re), C64::new(w[1].re, w[3].re)];
    if crate::matcore::normalize(&mut c) == 0.0 {
        c = crate::matcore::basis_vector(2, 0);
    }
    (top.sqrt(), c)
}

fn alpha_branch_and_bound(rho: &BipartiteOperator, seed_lower: f64, params: &AlphaParams) -> BranchResult {
    use std::f64::consts::PI;
    let cap = trace_norm(rho.mat());
    let mut lower = 0.0;
    let mut best_c = crate::matcore::basis_vector(2, 0);
    let mut best_d = best_c.clone();
    let mut cells = 0usize;
    let mut heap = BinaryHeap::new();

    let eval = |theta: (f64, f64), phi: (f64, f64), lower: &mut f64, bc: &mut Vec<C64>, bd: &mut Vec<C64>| -> Cell {
        let (tc, pc) = (0.5 * (theta.0 + theta.1), 0.5 * (phi.0 + phi.1));
        let d = bloch(tc, pc);
        let (h, c) = slice_sup(rho, &d);
        if h > *lower {
            *lower = h;
            *bc = c;
            *bd = d;
        }
        let r = 0.25 * (theta.1 - theta.0) + (theta.1 / 2.0).sin() * 0.5 * (phi.1 - phi.0);
        let bound = if r < 1.0 { (h / (1.0 - r)).min(cap) } else { cap };
        Cell { bound, theta, phi }
    };

    let (nt, np) = (4, 8);
    for a in 0..nt {
        for b in 0..np {
            let theta = (PI * a as f64 / nt as f64, PI * (a + 1) as f64 / nt as f64);
            let phi = (2.0 * PI * b as f64 / np as f64, 2.0 * PI * (b + 1) as f64 / np as f64);
            heap.push(eval(theta, phi, &mut lower, &mut best_c, &mut best_d));
            cells += 1;
        }
    }
    let mut upper = cap;
    while let Some(top) = heap.pop() {
        upper = top.bound;
        let reference = lower.max(seed_lower);
        if upper <= (1.0 + params.target_gap) * reference || cells >= params.max_cells {
            break;
        }
        let (t, p) = (top.theta, top.phi);
        let theta_part = 0.25 * (t.1 - t.0);
        let phi_part = (t.1 / 2.0).sin() * 0.5 * (p.1 - p.0);
        let halves: [((f64, f64), (f64, f64)); 2] = if theta_part >= phi_part {
            let mid = 0.5 * (t.0 + t.1);
            [((t.0, mid), p), ((mid, t.1), p)]
        } else {
            let mid = 0.5 * (p.0 + p.1);
            [(t, (p.0, mid)), (t, (mid, p.1))]
        };
        for (th, ph) in halves {
            heap.push(eval(th, ph, &mut lower, &mut best_c, &mut best_d));
            cells += 1;
        }
        upper = heap.peek().map_or(upper, |c| c.bound.max(lower));
    }
    BranchResult {
        lower,
        upper: upper.max(lower),
        c: best_c,
        d: best_d,
        cells,
    }
}

/// Inequality checks linking α, π and the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    /// `|Tr(rho u_flat)|`.
    pub pairing: f64,
    pub alpha: NormEstimate,
    pub pi: NormEstimate,
    /// `|Tr(rho u)| <= alpha.upper * pi.upper + 1e-6`.
    pub pairing_bound: bool,
    /// `alpha >= |Tr rho| / n - 1e-6`, using the lower α bound.
    pub trace_lower_bound: bool,
    /// `Tr rho <= n alpha + 1e-6`, using the upper α bound.
    pub trace_upper_bound: bool,
}

impl DualityReport {
    pub fn all_hold(&self) -> bool {
        self.pairing_bound && self.trace_lower_bound && self.trace_upper_bound
    }
}

pub fn duality_gap_report(
    rho: &BipartiteOperator,
    u: &TensorElement,
    alpha_params: &AlphaParams,
    pi_params: &PiParams,
) -> Result<DualityReport> {
    let flat = u.flatten();
    if flat.d1() != rho.d1() || flat.d2() != rho.d2() {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, tensor is {}x{}",
            rho.d1(),
            rho.d2(),
            flat.d1(),
            flat.d2()
        )));
    }
    let alpha = alpha_norm(rho, alpha_params)?;
    let pi = pi_norm(u, pi_params)?;
    let pairing = rho.mat().trace_product(flat.mat()).norm();
    let n = rho.d1() as f64;
    let tr = rho.trace();
    Ok(DualityReport {
        pairing,
        pairing_bound: pairing <= alpha.upper * pi.upper + 1e-6,
        trace_lower_bound: alpha.lower >= tr.norm() / n - 1e-6,
        trace_upper_bound: tr.re <= n * alpha.upper + 1e-6,
        alpha,
        pi,
    })
}

/// Norm estimates for one flat operator.
pub fn all_norms(
    u: &TensorElement,
    params: &NormParams,
    pi_params: &PiParams,
) -> Result<(NormEstimate, NormEstimate)> {
    let pi = pi_norm(u, pi_params)?;
    let eps = epsilon_with_pi(u, params, &pi)?;
    Ok((eps, pi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::bell_projector;
    use crate::random;

    fn elem(a: CMatrix, b: CMatrix) -> TensorElement {
        TensorElement::elementary(a, b).unwrap()
    }

    #[test]
    fn zero_is_zero() {
        let z = elem(CMatrix::zeros(2, 2), CMatrix::zeros(2, 2));
        let e = epsilon_norm(&z, &NormParams::default()).unwrap();
        let p = pi_norm(&z, &PiParams::default()).unwrap();
        assert_eq!((e.lower, e.upper, p.lower, p.upper), (0.0, 0.0, 0.0, 0.0));
        let a = alpha_norm(&BipartiteOperator::new(CMatrix::zeros(4, 4), 2, 2).unwrap(), &AlphaParams::default()).unwrap();
        assert_eq!((a.lower, a.upper), (0.0, 0.0));
    }

    #[test]
    fn unit_tensor() {
        for n in [2, 3] {
            let u = elem(CMatrix::identity(n), CMatrix::identity(n));
            let p = pi_norm(&u, &PiParams::default()).unwrap();
            assert!((p.lower - n as f64).abs() < 1e-9 && (p.upper - n as f64).abs() < 1e-9);
            let e = epsilon_norm(&u, &NormParams::default()).unwrap();
            assert!(e.contains(n as f64, 1e-9));
        }
    }

    #[test]
    fn elementary_cross_norm() {
        let mut rng = random::rng(8);
        for _ in 0..10 {
            let x = random::ginibre(&mut rng, 3, 3);
            let y = random::ginibre(&mut rng, 3, 3);
            let target = operator_norm(&x) * trace_norm(&y);
            let u = elem(x, y);
            let p = pi_norm(&u, &PiParams::default()).unwrap();
            let e = epsilon_norm(&u, &NormParams::default()).unwrap();
            assert!((p.upper - target).abs() < 1e-9 * target);
            assert!((e.lower - target).abs() < 1e-8 * target, "{} vs {target}", e.lower);
        }
    }

    #[test]
    fn witnesses_reproduce_bounds() {
        let mut rng = random::rng(17);
        let u = TensorElement::from_operator(&BipartiteOperator::new(random::ginibre(&mut rng, 4, 4), 2, 2).unwrap());
        let p = pi_norm(&u, &PiParams::default()).unwrap();
        assert!((p.lower_witness.evaluate_tensor(&u) - p.lower).abs() < 1e-9);
        let UpperWitness::Decomposition(dec) = &p.upper_witness else {
            panic!("expected a decomposition")
        };
        assert!(dec.flatten().mat().max_diff(u.flatten().mat()) < 1e-12);
        assert!((decomposition_cost(dec) - p.upper).abs() < 1e-12);
        assert!(p.lower <= p.upper);

        let rho = random::make_random_state(2, 2, 2).unwrap();
        let a = alpha_norm(&rho, &AlphaParams::default()).unwrap();
        assert!((a.lower_witness.evaluate_state(&rho) - a.lower).abs() < 1e-12);
    }

    #[test]
    fn shear_descent_never_increases() {
        let mut rng = random::rng(3);
        let u = TensorElement::from_operator(&BipartiteOperator::new(random::ginibre(&mut rng, 4, 4), 2, 2).unwrap());
        let start = decomposition_cost(&u);
        let p = pi_norm(&u, &PiParams { restarts: 1, ..PiParams::default() }).unwrap();
        assert!(p.upper <= start + 1e-12);
    }

    #[test]
    fn alpha_examples() {
        for n in [2, 3] {
            let id = BipartiteOperator::new(CMatrix::identity(n * n), n, n).unwrap();
            let a = alpha_norm(&id, &AlphaParams::default()).unwrap();
            assert!((a.lower - n as f64).abs() < 1e-9);
            let choi = bell_projector(n);
            let a = alpha_norm(&choi, &AlphaParams::default()).unwrap();
            assert!(a.contains(1.0, 1e-9));
            assert!((a.lower - 1.0).abs() < 1e-9);
        }
        let a = alpha_norm(&bell_projector(2), &AlphaParams::default()).unwrap();
        assert!(a.half_width() <= 0.05, "{a:?}");
    }

    #[test]
    fn closed_form_slice_sup_matches_search() {
        // Oracle: dense sampling of c for a fixed d.
        let mut rng = random::rng(5);
        let rho = BipartiteOperator::new(random::ginibre(&mut rng, 4, 4), 2, 2).unwrap();
        let d = random::unit_vector(&mut rng, 2);
        let (h, c) = slice_sup(&rho, &d);
        assert!((trace_norm(&rho.second_factor_slice(&d, &c)) - h).abs() < 1e-10);
        let mut best: f64 = 0.0;
        for _ in 0..20000 {
            let c = random::unit_vector(&mut rng, 2);
            best = best.max(trace_norm(&rho.second_factor_slice(&d, &c)));
        }
        assert!(best <= h + 1e-10 && best > h - 1e-2);
    }

    #[test]
    fn alpha_matches_raw_quotient() {
        // Oracle: the raw quotient |Tr(rho a)| / pi(a) over probes a never
        // exceeds the reduced value by more than the tolerance.
        let mut rng = random::rng(23);
        for _ in 0..3 {
            let rho = BipartiteOperator::new(random::hermitian(&mut rng, 4), 2, 2).unwrap();
            let a = alpha_norm(&rho, &AlphaParams::default()).unwrap();
            for _ in 0..20 {
                let probe = TensorElement::from_operator(&BipartiteOperator::new(random::ginibre(&mut rng, 4, 4), 2, 2).unwrap());
                let p = pi_norm(&probe, &PiParams { restarts: 1, sweeps: 5, ..PiParams::default() }).unwrap();
                let q = rho.mat().trace_product(probe.flatten().mat()).norm() / p.upper;
                assert!(q <= a.lower + 5e-2);
                assert!(q <= a.upper + 1e-9);
            }
        }
    }

    #[test]
    fn duality_examples() {
        let rho = BipartiteOperator::new(CMatrix::identity(4).scale_re(0.5), 2, 2).unwrap();
        let u = elem(CMatrix::identity(2), CMatrix::identity(2));
        let r = duality_gap_report(&rho, &u, &AlphaParams::default(), &PiParams::default()).unwrap();
        assert!((r.pairing - 2.0).abs() < 1e-12);
        assert!(r.all_hold());

        let r = duality_gap_report(&bell_projector(2), &u, &AlphaParams::default(), &PiParams::default()).unwrap();
        assert!(r.all_hold());
        assert!((rho.trace().re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn alpha_requires_square() {
        let rho = BipartiteOperator::new(CMatrix::identity(6), 2, 3).unwrap();
        assert!(alpha_norm(&rho, &AlphaParams::default()).is_err());
        let u = elem(CMatrix::identity(2), CMatrix::identity(2));
        assert!(pi_norm(&u, &PiParams { r_max: Some(0), ..PiParams::default() }).is_err());
    }
}
