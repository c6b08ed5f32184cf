//! Coefficient vectors and displacement/velocity pairs.

use crate::error::{Error, Result};

/// A function in the discrete space, stored as coefficients in the
/// backend's eigenbasis (sine modes or FEM eigenvectors) or as nodal values.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    coeffs: Vec<f64>,
}

impl Field {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().all(|c| c.is_finite()) {
            Ok(Field { coeffs })
        } else {
            Err(Error::NonFinite("field coefficients"))
        }
    }

    pub fn zeros(len: usize) -> Self {
        Field {
            coeffs: vec![0.0; len],
        }
    }

    /// The `index`-th unit vector (0-based).
    pub fn unit(len: usize, index: usize) -> Self {
        let mut f = Field::zeros(len);
        f.coeffs[index] = 1.0;
        f
    }

    pub(crate) fn from_vec_unchecked(coeffs: Vec<f64>) -> Self {
        Field { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Euclidean norm of the coefficient vector.
    pub fn l2(&self) -> f64 {
        crate::linalg::norm2(&self.coeffs)
    }

    pub fn scaled(&self, factor: f64) -> Field {
        Field {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        crate::error::check_len(self.len(), other.len())?;
        Ok(Field {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        crate::error::check_len(self.len(), other.len())?;
        Ok(Field {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    /// Keep the leading `len` coefficients.
    pub fn truncated(&self, len: usize) -> Result<Field> {
        if len > self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: len,
            });
        }
        Ok(Field {
            coeffs: self.coeffs[..len].to_vec(),
        })
    }
}

/// Displacement and velocity `(U, V)`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Field,
    pub v: Field,
}

impl State {
    pub fn new(u: Field, v: Field) -> Result<Self> {
        crate::error::check_len(u.len(), v.len())?;
        if !(u.is_finite() && v.is_finite()) {
            return Err(Error::NonFinite("state"));
        }
        Ok(State { u, v })
    }

    pub fn zeros(len: usize) -> Self {
        State {
            u: Field::zeros(len),
            v: Field::zeros(len),
        }
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }
}
