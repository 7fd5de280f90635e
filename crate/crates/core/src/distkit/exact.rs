//! Exact big-rational lattice distributions, for small `n` and test oracles.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::lattice::union_basis;
use super::{DiscreteDist, DistError};
use crate::dioph::AlphaSpec;

/// Lattice distribution with exact rational weights keyed by coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactLatticeDist {
    pub basis: Vec<AlphaSpec>,
    pub atoms: BTreeMap<Vec<i64>, BigRational>,
}

impl ExactLatticeDist {
    /// Converts a lattice-tagged distribution; its double weights are taken
    /// as exact binary fractions.
    pub fn from_dist(d: &DiscreteDist) -> Option<Self> {
        let l = d.lattice()?;
        let mut atoms = BTreeMap::new();
        for i in 0..d.len() {
            let key: Vec<i64> = l.coords(i).iter().map(|&c| c as i64).collect();
            let w = BigRational::from_float(d.weights()[i])?;
            *atoms.entry(key).or_insert_with(BigRational::zero) += w;
        }
        Some(ExactLatticeDist {
            basis: l.basis().to_vec(),
            atoms,
        })
    }

    pub fn total_mass(&self) -> BigRational {
        self.atoms.values().fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn convolve(&self, other: &Self) -> Self {
        let (basis, ma, mb) = union_basis(&self.basis, &other.basis);
        let dim = basis.len() + 1;
        let lift = |key: &[i64], map: &[usize]| -> Vec<i64> {
            let mut out = vec![0i64; dim];
            for (k, &c) in key.iter().enumerate() {
                out[map[k]] += c;
            }
            out
        };
        let mut atoms = BTreeMap::new();
        for (ka, wa) in &self.atoms {
            let ka = lift(ka, &ma);
            for (kb, wb) in &other.atoms {
                let kb = lift(kb, &mb);
                let key: Vec<i64> = ka.iter().zip(&kb).map(|(a, b)| a + b).collect();
                *atoms.entry(key).or_insert_with(BigRational::zero) += wa * wb;
            }
        }
        ExactLatticeDist { basis, atoms }
    }

    /// `n`-fold convolution power (binary powering).
    pub fn power(&self, n: u64) -> Self {
        let mut result = ExactLatticeDist {
            basis: self.basis.clone(),
            atoms: BTreeMap::from([(vec![0i64; self.basis.len() + 1], BigRational::one())]),
        };
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.convolve(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.convolve(&base);
            }
        }
        result
    }

    /// Weight of the atom with the given coordinates.
    pub fn weight(&self, coords: &[i64]) -> BigRational {
        self.atoms.get(coords).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Double-precision distribution with positions multiplied by `scale`.
    pub fn to_dist(&self, scale: f64) -> Result<DiscreteDist, DistError> {
        let dim = self.basis.len() + 1;
        let mut coords = Vec::with_capacity(self.atoms.len() * dim);
        let mut w = Vec::with_capacity(self.atoms.len());
        for (k, v) in &self.atoms {
            coords.extend(k.iter().map(|&c| c as i32));
            w.push(v.to_f64().unwrap_or(0.0));
        }
        super::lattice::build_lattice_dist(self.basis.clone(), coords, w, scale)
    }
}
