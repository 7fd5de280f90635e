//! Finitely supported distributions, exact n-fold sums and Kolmogorov distances.

mod build;
mod csv;
mod exact;
mod kolmogorov;
mod lattice;

pub use build::{
    bernoulli_lattice, bernoulli_pm, convolve, convolve_with_cap, delta0, mixture, mixture_with_cap, zn_dist,
    zn_dist_with_cap, DEFAULT_ATOM_CAP,
};
pub use exact::ExactLatticeDist;
pub use kolmogorov::{kolmogorov_distance, ComparisonFn, KolmogorovResult, Side};
pub use lattice::Lattice;

use crate::dioph::DiophError;
use crate::numeric::Compensated;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DistError {
    #[error("degenerate scale: Bernoulli scale must be nonzero")]
    DegenerateScale,
    #[error("weights sum to {sum}, expected 1")]
    WeightSumViolation { sum: f64 },
    #[error("invalid weight {weight}: weights must be positive and finite")]
    InvalidWeight { weight: f64 },
    #[error("support overflow: {atoms} atoms exceeds the cap of {cap}")]
    SupportOverflow { atoms: u128, cap: usize },
    #[error("empty distribution")]
    Empty,
    #[error("distribution is degenerate (zero variance)")]
    Degenerate,
    #[error("distribution is not centered: mean {mean}")]
    NotCentered { mean: f64 },
    #[error("n must be at least 1")]
    ZeroN,
    #[error("csv line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error(transparent)]
    Precision(#[from] DiophError),
}

/// Finitely supported probability measure on the line.
///
/// Positions are non-decreasing; they are strictly increasing unless two
/// distinct lattice points round to the same double, in which case the exact
/// order is still the stored order.
#[derive(Debug, Clone)]
pub struct DiscreteDist {
    pos: Vec<f64>,
    w: Vec<f64>,
    cum: Vec<f64>,
    lattice: Option<Lattice>,
}

impl DiscreteDist {
    /// Builds from atoms that are already sorted and merged.
    pub(crate) fn from_sorted(pos: Vec<f64>, w: Vec<f64>, lattice: Option<Lattice>) -> Self {
        debug_assert_eq!(pos.len(), w.len());
        let mut acc = Compensated::new();
        let cum = w
            .iter()
            .map(|&x| {
                acc.add(x);
                acc.value()
            })
            .collect();
        DiscreteDist { pos, w, cum, lattice }
    }

    /// Builds from arbitrary atoms: sorts, merges coincident positions and
    /// checks that the weights are positive and sum to one.
    pub fn from_atoms(atoms: Vec<(f64, f64)>) -> Result<Self, DistError> {
        if atoms.is_empty() {
            return Err(DistError::Empty);
        }
        for &(x, w) in &atoms {
            if !(w > 0.0) || !w.is_finite() {
                return Err(DistError::InvalidWeight { weight: w });
            }
            if !x.is_finite() {
                return Err(DistError::Csv {
                    line: 0,
                    reason: format!("position {x} is not finite"),
                });
            }
        }
        let sum = crate::numeric::compensated_sum(atoms.iter().map(|a| a.1));
        if (sum - 1.0).abs() > 1e-9 {
            return Err(DistError::WeightSumViolation { sum });
        }
        Ok(merge_float_atoms(atoms))
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.pos
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Prefix sums of the weights.
    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }

    pub fn total_mass(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.pos.partition_point(|&p| p <= x);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    /// `P(X < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        let k = self.pos.partition_point(|&p| p < x);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    /// Mass of the atom at exactly `x` (zero if none).
    pub fn mass_at(&self, x: f64) -> f64 {
        let lo = self.pos.partition_point(|&p| p < x);
        let hi = self.pos.partition_point(|&p| p <= x);
        crate::numeric::compensated_sum(self.w[lo..hi].iter().copied())
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.pos.iter().copied().zip(self.w.iter().copied())
    }

    pub fn moments(&self, n: u64) -> Moments {
        moments(self, n)
    }

    /// Serialize as CSV with header `position,weight[,c0,...]`.
    pub fn to_csv(&self) -> String {
        csv::to_csv(self)
    }

    pub fn from_csv(text: &str) -> Result<Self, DistError> {
        csv::from_csv(text)
    }
}

/// Merge float atoms whose positions agree to a few ulps.
pub(crate) fn merge_float_atoms(mut atoms: Vec<(f64, f64)>) -> DiscreteDist {
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pos: Vec<f64> = Vec::with_capacity(atoms.len());
    let mut w: Vec<Compensated> = Vec::with_capacity(atoms.len());
    for (x, m) in atoms {
        if let Some(&last) = pos.last() {
            if x - last <= 8.0 * f64::EPSILON * x.abs().max(last.abs()) {
                w.last_mut().unwrap().add(m);
                continue;
            }
        }
        pos.push(x);
        let mut c = Compensated::new();
        c.add(m);
        w.push(c);
    }
    let w = w.into_iter().map(|c| c.value()).collect();
    DiscreteDist::from_sorted(pos, w, None)
}

/// Moments of a distribution and Lyapunov ratios for a given `n`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Moments {
    pub mean: f64,
    pub sigma2: f64,
    /// `E X^3`
    pub alpha3: f64,
    /// `E |X|^3`
    pub beta3: f64,
    /// `E X^4`
    pub beta4: f64,
    pub n: u64,
    /// `beta3 / sigma^3 * n^(-1/2)`
    pub l3: f64,
    /// `beta4 / sigma^4 * n^(-1)`
    pub l4: f64,
}

impl Moments {
    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }
}

/// Raw moments about zero. The sums of interest are of centered laws; `sigma2`
/// is the central second moment.
pub fn moments(d: &DiscreteDist, n: u64) -> Moments {
    let (mut m1, mut m2, mut m3, mut a3, mut m4) = (
        Compensated::new(),
        Compensated::new(),
        Compensated::new(),
        Compensated::new(),
        Compensated::new(),
    );
    for (x, w) in d.atoms() {
        let x2 = x * x;
        m1.add(w * x);
        m2.add(w * x2);
        m3.add(w * x2 * x);
        a3.add(w * x2 * x.abs());
        m4.add(w * x2 * x2);
    }
    let mean = m1.value();
    let sigma2 = m2.value() - mean * mean;
    let (alpha3, beta3, beta4) = (m3.value(), a3.value(), m4.value());
    let nf = n.max(1) as f64;
    Moments {
        mean,
        sigma2,
        alpha3,
        beta3,
        beta4,
        n,
        l3: beta3 / sigma2.powf(1.5) / nf.sqrt(),
        l4: beta4 / (sigma2 * sigma2) / nf,
    }
}
