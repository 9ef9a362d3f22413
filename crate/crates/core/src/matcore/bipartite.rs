use super::matrix::{CMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Tensor factor selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Factor {
    First,
    Second,
}

impl TryFrom<u32> for Factor {
    type Error = Error;

    fn try_from(v: u32) -> Result<Self> {
        match v {
            1 => Ok(Factor::First),
            2 => Ok(Factor::Second),
            other => Err(Error::InvalidSelector(other)),
        }
    }
}

/// Square operator on `C^d1 (x) C^d2`, flat index `i * d2 + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteOperator {
    mat: CMatrix,
    d1: usize,
    d2: usize,
}

impl BipartiteOperator {
    pub fn new(mat: CMatrix, d1: usize, d2: usize) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::DimensionMismatch("factor dimensions must be positive".into()));
        }
        if !mat.is_square() || mat.rows() != d1 * d2 {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix is not an operator on C^{d1} (x) C^{d2}",
                mat.rows(),
                mat.cols()
            )));
        }
        Ok(Self { mat, d1, d2 })
    }

    /// Splits a square matrix of size `n^2` evenly.
    pub fn square_split(mat: CMatrix) -> Result<Self> {
        let n = exact_sqrt(mat.rows()).ok_or_else(|| {
            Error::DimensionMismatch(format!("{} is not a perfect square", mat.rows()))
        })?;
        Self::new(mat, n, n)
    }

    pub fn product(a: &CMatrix, b: &CMatrix) -> Result<Self> {
        if !a.is_square() || !b.is_square() {
            return Err(Error::DimensionMismatch("tensor factors must be square".into()));
        }
        Self::new(a.kron(b), a.rows(), b.rows())
    }

    #[inline]
    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> CMatrix {
        self.mat
    }

    #[inline]
    pub fn d1(&self) -> usize {
        self.d1
    }

    #[inline]
    pub fn d2(&self) -> usize {
        self.d2
    }

    pub fn dim(&self) -> usize {
        self.d1 * self.d2
    }

    /// Entry `<(i, j)| M |(k, l)>`.
    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.mat[(i * self.d2 + j, k * self.d2 + l)]
    }

    pub fn map_mat(&self, f: impl FnOnce(&CMatrix) -> CMatrix) -> Self {
        Self {
            mat: f(&self.mat),
            d1: self.d1,
            d2: self.d2,
        }
    }

    /// Traces out the selected factor: `First` leaves a `d2 x d2` matrix,
    /// `Second` a `d1 x d1` matrix.
    pub fn partial_trace(&self, which: Factor) -> CMatrix {
        let (d1, d2) = (self.d1, self.d2);
        match which {
            Factor::First => CMatrix::from_fn(d2, d2, |j, l| {
                (0..d1).map(|i| self.at(i, j, i, l)).sum()
            }),
            Factor::Second => CMatrix::from_fn(d1, d1, |i, k| {
                (0..d2).map(|j| self.at(i, j, k, j)).sum()
            }),
        }
    }

    /// Transposes the indices of the selected factor.
    pub fn partial_transpose(&self, which: Factor) -> Self {
        let (d1, d2) = (self.d1, self.d2);
        let mat = CMatrix::from_fn(d1 * d2, d1 * d2, |r, c| {
            let (i, j) = (r / d2, r % d2);
            let (k, l) = (c / d2, c % d2);
            match which {
                Factor::First => self.at(k, j, i, l),
                Factor::Second => self.at(i, l, k, j),
            }
        });
        Self { mat, d1, d2 }
    }

    /// Exchanges the tensor factors: operator on `C^d2 (x) C^d1`.
    pub fn swap_factors(&self) -> Self {
        let (d1, d2) = (self.d1, self.d2);
        let mat = CMatrix::from_fn(d1 * d2, d1 * d2, |r, c| {
            let (j, i) = (r / d1, r % d1);
            let (l, k) = (c / d1, c % d1);
            self.at(i, j, k, l)
        });
        Self { mat, d1: d2, d2: d1 }
    }

    /// `(I (x) <d|) M (I (x) |c>)`, a `d1 x d1` matrix.
    pub fn second_factor_slice(&self, d: &[C64], c: &[C64]) -> CMatrix {
        assert_eq!(d.len(), self.d2);
        assert_eq!(c.len(), self.d2);
        CMatrix::from_fn(self.d1, self.d1, |i, k| {
            let mut acc = ZERO;
            for j in 0..self.d2 {
                let dj = d[j].conj();
                if dj == ZERO {
                    continue;
                }
                for l in 0..self.d2 {
                    acc += dj * self.at(i, j, k, l) * c[l];
                }
            }
            acc
        })
    }

    /// `(<a| (x) I) M (|b> (x) I)`, a `d2 x d2` matrix.
    pub fn first_factor_slice(&self, a: &[C64], b: &[C64]) -> CMatrix {
        assert_eq!(a.len(), self.d1);
        assert_eq!(b.len(), self.d1);
        CMatrix::from_fn(self.d2, self.d2, |j, l| {
            let mut acc = ZERO;
            for i in 0..self.d1 {
                let ai = a[i].conj();
                if ai == ZERO {
                    continue;
                }
                for k in 0..self.d1 {
                    acc += ai * self.at(i, j, k, l) * b[k];
                }
            }
            acc
        })
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }
}

pub fn partial_trace(m: &BipartiteOperator, which: Factor) -> CMatrix {
    m.partial_trace(which)
}

pub fn partial_transpose(m: &BipartiteOperator, which: Factor) -> BipartiteOperator {
    m.partial_transpose(which)
}

/// Unnormalized maximally entangled projector `sum_ij E_ij (x) E_ij`.
pub fn bell_projector(n: usize) -> BipartiteOperator {
    let mat = CMatrix::from_fn(n * n, n * n, |r, c| {
        let (i, j) = (r / n, r % n);
        let (k, l) = (c / n, c % n);
        if i == j && k == l {
            super::matrix::ONE
        } else {
            ZERO
        }
    });
    BipartiteOperator { mat, d1: n, d2: n }
}

/// Flip operator `sum_ij E_ij (x) E_ji`.
pub fn swap_operator(n: usize) -> BipartiteOperator {
    let mat = CMatrix::from_fn(n * n, n * n, |r, c| {
        let (i, j) = (r / n, r % n);
        let (k, l) = (c / n, c % n);
        if i == l && j == k {
            super::matrix::ONE
        } else {
            ZERO
        }
    });
    BipartiteOperator { mat, d1: n, d2: n }
}

pub(crate) fn exact_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n && r > 0).then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, f: impl Fn(usize, usize) -> (f64, f64)) -> CMatrix {
        CMatrix::from_fn(rows, rows, |i, j| {
            let (re, im) = f(i, j);
            C64::new(re, im)
        })
    }

    #[test]
    fn selector_parsing() {
        assert_eq!(Factor::try_from(1).unwrap(), Factor::First);
        assert_eq!(Factor::try_from(2).unwrap(), Factor::Second);
        assert!(matches!(Factor::try_from(3), Err(Error::InvalidSelector(3))));
    }

    #[test]
    fn partial_trace_of_product() {
        let a = m(2, |i, j| (i as f64 + 1.0, j as f64 * 0.5));
        let b = m(3, |i, j| ((i * j) as f64, i as f64 - j as f64));
        let ab = BipartiteOperator::product(&a, &b).unwrap();
        let expect = b.scale(a.trace());
        assert!(ab.partial_trace(Factor::First).max_diff(&expect) < 1e-14);
        let expect = a.scale(b.trace());
        assert!(ab.partial_trace(Factor::Second).max_diff(&expect) < 1e-14);
    }

    #[test]
    fn bell_partial_trace_is_identity() {
        let bell = bell_projector(2);
        assert!(bell.partial_trace(Factor::Second).max_diff(&CMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn swap_partial_transpose_is_bell() {
        let pt = swap_operator(2).partial_transpose(Factor::Second);
        assert_eq!(pt, bell_projector(2));
        let pt = swap_operator(3).partial_transpose(Factor::First);
        assert_eq!(pt, bell_projector(3));
    }

    #[test]
    fn partial_transpose_of_product() {
        let a = m(2, |i, j| (i as f64 - 0.3, j as f64));
        let b = m(2, |i, j| (1.0 + i as f64, 2.0 * j as f64 - i as f64));
        let ab = BipartiteOperator::product(&a, &b).unwrap();
        let expect = a.kron(&b.transpose());
        assert!(ab.partial_transpose(Factor::Second).mat().max_diff(&expect) < 1e-15);
        assert_eq!(
            ab.partial_transpose(Factor::Second).partial_transpose(Factor::Second),
            ab
        );
    }

    #[test]
    fn swap_factors_of_product() {
        let a = m(2, |i, j| (i as f64, j as f64 + 0.5));
        let b = m(3, |i, j| ((i + j) as f64, 0.0));
        let ab = BipartiteOperator::product(&a, &b).unwrap();
        let ba = BipartiteOperator::product(&b, &a).unwrap();
        assert_eq!(ab.swap_factors(), ba);
    }

    #[test]
    fn rejects_wrong_dims() {
        assert!(BipartiteOperator::new(CMatrix::identity(4), 2, 3).is_err());
        assert!(BipartiteOperator::square_split(CMatrix::identity(5)).is_err());
    }
}
