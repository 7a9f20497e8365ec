//! Dense vectors and sign vectors.
//!
//! `DenseVector` is the universal numeric carrier (points, gradients,
//! momentum buffers). `SignVector` holds entries in {-1, 0, +1} and is the
//! wire unit of 1-bit compression.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector {
    entries: Vec<f64>,
}

impl DenseVector {
    /// Builds a vector, rejecting NaN/Inf entries.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        for (i, &v) in entries.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i, value: v });
            }
        }
        Ok(DenseVector { entries })
    }

    pub fn zeros(dim: usize) -> Self {
        DenseVector {
            entries: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0)
    }

    pub fn norm_l1(&self) -> f64 {
        self.entries.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_linf(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn dot(&self, other: &DenseVector) -> Result<f64> {
        self.check_dim(other.dim())?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// self += a * other
    pub fn axpy(&mut self, a: f64, other: &DenseVector) -> Result<()> {
        self.check_dim(other.dim())?;
        for (s, o) in self.entries.iter_mut().zip(&other.entries) {
            *s += a * o;
        }
        Ok(())
    }

    pub fn scaled(&self, a: f64) -> DenseVector {
        DenseVector {
            entries: self.entries.iter().map(|v| a * v).collect(),
        }
    }

    pub fn sub(&self, other: &DenseVector) -> Result<DenseVector> {
        self.check_dim(other.dim())?;
        Ok(DenseVector {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for DenseVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

/// Entries in {-1, 0, +1}, stored as i8. The bit-accounting layer charges
/// 1 bit per coordinate regardless of in-memory width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignVector {
    entries: Vec<i8>,
}

impl SignVector {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        for (i, &v) in entries.iter().enumerate() {
            if !(-1..=1).contains(&v) {
                return Err(Error::domain(format!(
                    "sign entry {v} at coordinate {i} not in {{-1, 0, 1}}"
                )));
            }
        }
        Ok(SignVector { entries })
    }

    pub fn zeros(dim: usize) -> Self {
        SignVector {
            entries: vec![0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.entries
    }

    pub fn to_dense(&self) -> DenseVector {
        DenseVector {
            entries: self.entries.iter().map(|&v| v as f64).collect(),
        }
    }
}

impl std::ops::Index<usize> for SignVector {
    type Output = i8;
    fn index(&self, i: usize) -> &i8 {
        &self.entries[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert!(DenseVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(DenseVector::new(vec![f64::INFINITY]).is_err());
        assert!(DenseVector::new(vec![1.0, -2.0]).is_ok());
    }

    #[test]
    fn norms() {
        let v = DenseVector::new(vec![3.0, -4.0]).unwrap();
        assert_eq!(v.norm_l1(), 7.0);
        assert_eq!(v.norm_l2(), 5.0);
        assert_eq!(v.norm_linf(), 4.0);
    }

    #[test]
    fn sign_vector_validates_entries() {
        assert!(SignVector::new(vec![-1, 0, 1]).is_ok());
        assert!(SignVector::new(vec![2]).is_err());
    }

    #[test]
    fn dot_dim_mismatch() {
        let a = DenseVector::new(vec![1.0, 2.0]).unwrap();
        let b = DenseVector::new(vec![1.0]).unwrap();
        assert!(a.dot(&b).is_err());
    }
}
