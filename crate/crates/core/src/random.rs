//! Seeded random instances: Ginibre states, separable mixtures, Werner
//! states, random CP and unital maps.
//!
//! Every generator draws from a `ChaCha8Rng`, so a seed fixes the output
//! bit for bit across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::matcore::{
    check_hermitian, normalize, pseudo_inv_sqrt, swap_operator, BipartiteOperator, CMatrix, C64,
};
use crate::qmaps::QMap;

pub type InstanceRng = ChaCha8Rng;

pub fn rng(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for restart `index` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, index: u64) -> InstanceRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index.wrapping_add(1));
    r
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

/// Haar-distributed unit vector.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    loop {
        let mut v = gaussian_vector(rng, n);
        if normalize(&mut v) > 1e-12 {
            return v;
        }
    }
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    ginibre(rng, n, n).hermitian_part()
}

/// `G G*` for a Ginibre `G` with `rank` columns.
pub fn psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> CMatrix {
    let g = ginibre(rng, n, rank);
    (&g * &g.adjoint()).hermitian_part()
}

/// Haar unitary via Gram-Schmidt on a Ginibre matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = ginibre(rng, n, n);
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| g.col(j)).collect();
    crate::matcore::complete_basis(&mut cols, n);
    let mut u = CMatrix::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        u.set_col(j, c);
    }
    u
}

/// Density matrix `G G* / Tr(G G*)`.
pub fn density_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let p = psd(rng, n, n);
    let t = p.trace().re;
    p.scale_re(1.0 / t)
}

pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let v = unit_vector(rng, n);
    CMatrix::outer(&v, &v)
}

/// Random full-rank bipartite state.
pub fn make_random_state(seed: u64, d_h: usize, d_k: usize) -> Result<BipartiteOperator> {
    check_dims(d_h, d_k)?;
    let mut r = rng(seed);
    BipartiteOperator::new(density_matrix(&mut r, d_h * d_k), d_h, d_k)
}

/// Convex combination of `n_terms` products of random pure states with
/// flat-Dirichlet weights.
pub fn make_separable(seed: u64, n_terms: usize, d_h: usize, d_k: usize) -> Result<BipartiteOperator> {
    check_dims(d_h, d_k)?;
    if n_terms == 0 {
        return Err(Error::InvalidArgument("separable mixture needs at least one term".into()));
    }
    let mut r = rng(seed);
    let weights: Vec<f64> = (0..n_terms).map(|_| Exp1.sample(&mut r)).collect();
    let total: f64 = weights.iter().sum();
    let dim = d_h * d_k;
    let mut acc = CMatrix::zeros(dim, dim);
    for w in weights {
        let a = pure_state(&mut r, d_h);
        let b = pure_state(&mut r, d_k);
        acc = &acc + &a.kron(&b).scale_re(w / total);
    }
    BipartiteOperator::new(acc.hermitian_part(), d_h, d_k)
}

/// `p * A / Tr A + (1 - p) * I / d^2` with `A` the antisymmetric projector;
/// for `d = 2` this is the singlet Werner family.
pub fn werner(d: usize, p: f64) -> Result<BipartiteOperator> {
    if d < 2 {
        return Err(Error::InvalidArgument("Werner states need d >= 2".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("Werner parameter {p} outside [0, 1]")));
    }
    let n = d * d;
    let id = CMatrix::identity(n);
    let anti = (&id - swap_operator(d).mat()).scale_re(0.5);
    let t = anti.trace().re;
    let rho = &anti.scale_re(p / t) + &id.scale_re((1.0 - p) / n as f64);
    BipartiteOperator::new(rho, d, d)
}

/// CP map with `n_kraus` Ginibre Kraus operators, scaled so `||C||_max ~ 1`.
pub fn random_cp_map<R: Rng + ?Sized>(rng: &mut R, din: usize, dout: usize, n_kraus: usize) -> QMap {
    let kraus: Vec<CMatrix> = (0..n_kraus.max(1)).map(|_| ginibre(rng, dout, din)).collect();
    QMap::from_kraus(din, dout, kraus).expect("Kraus operators have matching shapes")
}

/// Unital CP map: random Kraus operators `K_i` replaced by `S^{-1/2} K_i`
/// with `S = sum K_i K_i*`.
pub fn random_unital_cp<R: Rng + ?Sized>(rng: &mut R, n: usize, n_kraus: usize) -> QMap {
    let kraus: Vec<CMatrix> = (0..n_kraus.max(1)).map(|_| ginibre(rng, n, n)).collect();
    let mut s = CMatrix::zeros(n, n);
    for k in &kraus {
        s = &s + &(k * &k.adjoint());
    }
    let s_inv = pseudo_inv_sqrt(&s.hermitian_part(), 1e-14).expect("Gram matrix is PSD");
    let kraus = kraus.iter().map(|k| &s_inv * k).collect();
    QMap::from_kraus(n, n, kraus).expect("Kraus operators have matching shapes")
}

/// Trace-preserving CP map: `K_i S^{-1/2}` with `S = sum K_i* K_i`.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, din: usize, dout: usize, n_kraus: usize) -> QMap {
    let kraus: Vec<CMatrix> = (0..n_kraus.max(1)).map(|_| ginibre(rng, dout, din)).collect();
    let mut s = CMatrix::zeros(din, din);
    for k in &kraus {
        s = &s + &(&k.adjoint() * k);
    }
    let s_inv = pseudo_inv_sqrt(&s.hermitian_part(), 1e-14).expect("Gram matrix is PSD");
    let kraus = kraus.iter().map(|k| k * &s_inv).collect();
    QMap::from_kraus(din, dout, kraus).expect("Kraus operators have matching shapes")
}

pub fn is_state(rho: &CMatrix, tol: f64) -> bool {
    check_hermitian(rho).is_ok()
        && (rho.trace().re - 1.0).abs() <= 1e-9
        && crate::matcore::psd_min_eig(rho).map(|m| m >= -tol).unwrap_or(false)
}

fn check_dims(d_h: usize, d_k: usize) -> Result<()> {
    if d_h == 0 || d_k == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    Ok(())
}
