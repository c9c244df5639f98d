use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// An observed bivariate dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSample {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Free-form provenance: scenario record, file name, etc.
    pub source: String,
}

impl PairSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Self::with_source(x, y, String::new())
    }

    pub fn with_source(x: Vec<f64>, y: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidInput(format!(
                "x has {} values but y has {}",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "a pair needs at least 2 observations, got {}",
                x.len()
            )));
        }
        if let Some(i) = x.iter().chain(&y).position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value at position {}",
                i % x.len()
            )));
        }
        Ok(Self {
            x,
            y,
            source: source.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// The same sample with the roles of X and Y exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
            source: self.source.clone(),
        }
    }

    /// Rows at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            x: indices.iter().map(|&i| self.x[i]).collect(),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            source: self.source.clone(),
        }
    }

    /// SHA-256 over the bit patterns of all observations (hex, first 16 bytes).
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.len() as u64).to_le_bytes());
        for (a, b) in self.x.iter().zip(&self.y) {
            h.update(a.to_bits().to_le_bytes());
            h.update(b.to_bits().to_le_bytes());
        }
        h.finalize()[..16]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mismatched_and_non_finite() {
        assert!(matches!(
            PairSample::new(vec![1.0, 2.0], vec![1.0]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            PairSample::new(vec![1.0, f64::NAN], vec![1.0, 2.0]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            PairSample::new(vec![1.0], vec![1.0]),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn checksum_tracks_content() {
        let a = PairSample::new(vec![1.0, 2.0], vec![3.0, 4.0]).unwrap();
        let b = PairSample::new(vec![1.0, 2.0], vec![3.0, 4.0 + 1e-15]).unwrap();
        assert_eq!(a.checksum(), a.clone().checksum());
        assert_ne!(a.checksum(), b.checksum());
        assert_ne!(a.checksum(), a.swapped().checksum());
        assert_eq!(a.checksum().len(), 32);
    }
}
