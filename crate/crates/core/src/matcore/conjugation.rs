use super::eig::basis_vector;
use super::matrix::{dot, CMatrix, C64};
use crate::error::{Error, Result};

/// Antilinear conjugation `J f = sum_i conj(<u_i, f>) u_i` in the
/// orthonormal basis formed by the columns of `basis`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugationSpec {
    basis: CMatrix,
    standard: bool,
}

impl ConjugationSpec {
    /// Conjugation of coordinates in the computational basis.
    pub fn standard(n: usize) -> Self {
        Self {
            basis: CMatrix::identity(n),
            standard: true,
        }
    }

    pub fn new(basis: CMatrix) -> Result<Self> {
        if !basis.is_square() {
            return Err(Error::DimensionMismatch("conjugation basis must be square".into()));
        }
        let gram = &basis.adjoint() * &basis;
        let dev = gram.max_diff(&CMatrix::identity(basis.rows()));
        if dev > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "conjugation basis columns are not orthonormal (deviation {dev:e})"
            )));
        }
        let standard = basis == CMatrix::identity(basis.rows());
        Ok(Self { basis, standard })
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn is_standard(&self) -> bool {
        self.standard
    }

    /// Whether `J` agrees with entrywise conjugation, i.e. `U U^T = I`.
    pub fn is_real(&self) -> bool {
        let uut = &self.basis * &self.basis.transpose();
        uut.max_diff(&CMatrix::identity(self.dim())) < 1e-12
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against conjugation of dimension {}",
                v.len(),
                self.dim()
            )));
        }
        if self.standard {
            return Ok(v.iter().map(|z| z.conj()).collect());
        }
        let n = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let u = self.basis.col(i);
            let coeff = dot(&u, v).conj();
            for (o, x) in out.iter_mut().zip(&u) {
                *o += coeff * x;
            }
        }
        Ok(out)
    }

    /// Matrix `J A J` of the linear operator obtained by conjugating `A`.
    pub fn conjugate_operator(&self, a: &CMatrix) -> Result<CMatrix> {
        let n = self.dim();
        if a.rows() != n || a.cols() != n {
            return Err(Error::DimensionMismatch("operator does not match conjugation".into()));
        }
        let mut out = CMatrix::zeros(n, n);
        for j in 0..n {
            let jej = self.apply(&basis_vector(n, j))?;
            let col = self.apply(&a.apply(&jej))?;
            out.set_col(j, &col);
        }
        Ok(out)
    }
}

/// Applies `J` to a column vector.
pub fn conjugate_in_basis(v: &CMatrix, j: &ConjugationSpec) -> Result<CMatrix> {
    if v.cols() != 1 {
        return Err(Error::DimensionMismatch("expected a column vector".into()));
    }
    Ok(CMatrix::column(&j.apply(v.data())?))
}
