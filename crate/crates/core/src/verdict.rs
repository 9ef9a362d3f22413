//! Verdict vocabulary shared by the classifiers.

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::io::{matrix_value, vector_value};
use crate::matcore::{CMatrix, C64};

/// Heuristic passes are never reported as certificates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    CertifiedYes,
    CertifiedNo,
    NoViolationFound,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::CertifiedYes => "certified-yes",
            Status::CertifiedNo => "certified-no",
            Status::NoViolationFound => "no-violation-found",
            Status::Inconclusive => "inconclusive",
        }
    }

    /// Certified-yes or no-violation-found.
    pub fn is_positive(self) -> bool {
        matches!(self, Status::CertifiedYes | Status::NoViolationFound)
    }
}

/// Evidence attached to a verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// Product vector `f (x) g`.
    ProductVector { f: Vec<C64>, g: Vec<C64> },
    /// Vector of Schmidt rank at most `k`.
    SchmidtVector { vector: Vec<C64>, k: usize },
    /// Eigenvector of the offending eigenvalue.
    Eigenvector(Vec<C64>),
    /// `C = P + Q^Gamma`.
    Decomposition { p: CMatrix, q: CMatrix },
    Interval { lower: f64, upper: f64 },
    Trace { trace: f64, expected: f64 },
    Entry { row: usize, col: usize, deviation: f64 },
    Residual { value: f64, tolerance: f64 },
    Matrix(CMatrix),
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        match self {
            Witness::ProductVector { f, g } => {
                m.serialize_entry("kind", "product-vector")?;
                m.serialize_entry("f", &vector_value(f))?;
                m.serialize_entry("g", &vector_value(g))?;
            }
            Witness::SchmidtVector { vector, k } => {
                m.serialize_entry("kind", "schmidt-vector")?;
                m.serialize_entry("k", k)?;
                m.serialize_entry("vector", &vector_value(vector))?;
            }
            Witness::Eigenvector(v) => {
                m.serialize_entry("kind", "eigenvector")?;
                m.serialize_entry("vector", &vector_value(v))?;
            }
            Witness::Decomposition { p, q } => {
                m.serialize_entry("kind", "decomposition")?;
                m.serialize_entry("p", &matrix_value(p, None))?;
                m.serialize_entry("q", &matrix_value(q, None))?;
            }
            Witness::Interval { lower, upper } => {
                m.serialize_entry("kind", "interval")?;
                m.serialize_entry("lower", lower)?;
                m.serialize_entry("upper", upper)?;
            }
            Witness::Trace { trace, expected } => {
                m.serialize_entry("kind", "trace")?;
                m.serialize_entry("trace", trace)?;
                m.serialize_entry("expected", expected)?;
            }
            Witness::Entry { row, col, deviation } => {
                m.serialize_entry("kind", "entry")?;
                m.serialize_entry("row", row)?;
                m.serialize_entry("col", col)?;
                m.serialize_entry("deviation", deviation)?;
            }
            Witness::Residual { value, tolerance } => {
                m.serialize_entry("kind", "residual")?;
                m.serialize_entry("value", value)?;
                m.serialize_entry("tolerance", tolerance)?;
            }
            Witness::Matrix(a) => {
                m.serialize_entry("kind", "matrix")?;
                m.serialize_entry("matrix", &matrix_value(a, None))?;
            }
        }
        m.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub property: String,
    pub status: Status,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Verdict {
    pub fn new(property: impl Into<String>, status: Status, value: f64) -> Self {
        Self {
            property: property.into(),
            status,
            value,
            witness: None,
        }
    }

    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn renamed(mut self, property: impl Into<String>) -> Self {
        self.property = property.into();
        self
    }
}
