//! Convergence-rate experiments: Kolmogorov-distance sweeps over `n`, rate
//! regression, averages over the coupling parameter, and star discrepancy of
//! `{k alpha}`.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::charfn::{CharError, CharSpec};
use crate::dioph::{type_estimate, AlphaSpec, DiophError, FracScanner};
use crate::distkit::{
    bernoulli_lattice, bernoulli_pm, convolve, kolmogorov_distance, zn_dist_with_cap, DiscreteDist, DistError, Side,
    DEFAULT_ATOM_CAP,
};
use crate::edgeworth::{Edgeworth, Normal};
use crate::regress::least_squares;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RatesError {
    #[error("need at least {needed} points for a fit, found {found}")]
    TooFewPoints { found: usize, needed: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("sweep csv line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Char(#[from] CharError),
    #[error(transparent)]
    Precision(#[from] DiophError),
}

/// Minimum number of rows for [`rate_fit`].
pub const MIN_FIT_POINTS: usize = 5;

/// Powers of two `2^4 ..= 2^11`.
pub fn default_n_list() -> Vec<u64> {
    (4..=11).map(|k| 1u64 << k).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: u64,
    /// `sup |F_n - Phi|`
    pub delta_phi: f64,
    /// `sup |F_n - Phi_3|`
    pub delta_phi3: f64,
    /// Location of the supremum against `Phi`.
    pub argmax: f64,
    pub side: Side,
    /// `P(Z_n = 0)`; half of it bounds `delta_phi` from below.
    pub zero_mass: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepMetadata {
    pub sigma2: f64,
    pub alpha3: f64,
    pub beta4: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub base: String,
    pub metadata: SweepMetadata,
    pub rows: Vec<SweepRow>,
}

pub const SWEEP_CSV_HEADER: &str = "n,delta_phi,delta_phi3,argmax,seconds";

impl SweepResult {
    pub fn points(&self) -> Vec<(u64, f64)> {
        self.rows.iter().map(|r| (r.n, r.delta_phi)).collect()
    }

    /// `n,delta_phi,delta_phi3,argmax,seconds` with 17 significant digits.
    /// Without `timing` the seconds column reads `nan`, keeping the output a
    /// pure function of the inputs.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::new();
        out.push_str(SWEEP_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let secs = if timing { fmt17(r.seconds) } else { "nan".into() };
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.n,
                fmt17(r.delta_phi),
                fmt17(r.delta_phi3),
                fmt17(r.argmax),
                secs
            );
        }
        out
    }
}

/// Floating value with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    format!("{x:.16e}")
}

/// Reads `(n, delta_phi)` rows from a sweep table; `#` lines are skipped.
pub fn parse_sweep_csv(text: &str) -> Result<Vec<(u64, f64)>, RatesError> {
    let err = |line: usize, reason: &str| RatesError::Csv {
        line,
        reason: reason.to_string(),
    };
    let mut seen_header = false;
    let mut rows: Vec<(u64, f64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_header {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() < 2 || cols[0] != "n" || cols[1] != "delta_phi" {
                return Err(err(line_no, "expected header starting `n,delta_phi`"));
            }
            seen_header = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() < 2 {
            return Err(err(line_no, "expected at least two fields"));
        }
        let n: u64 = cols[0].parse().map_err(|_| err(line_no, "bad n"))?;
        let d: f64 = cols[1].parse().map_err(|_| err(line_no, "bad delta"))?;
        if n == 0 {
            return Err(err(line_no, "n must be positive"));
        }
        if !(d > 0.0 && d <= 1.0) {
            return Err(err(line_no, "delta must lie in (0, 1]"));
        }
        if rows.last().is_some_and(|&(m, _)| n <= m) {
            return Err(err(line_no, "n must be strictly increasing"));
        }
        rows.push((n, d));
    }
    if !seen_header {
        return Err(err(0, "missing header"));
    }
    Ok(rows)
}

fn check_n_list(n_list: &[u64]) -> Result<(), RatesError> {
    if n_list.is_empty() {
        return Err(RatesError::Domain("n list is empty".into()));
    }
    if n_list[0] == 0 {
        return Err(RatesError::Domain("n must be at least 1".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(RatesError::Domain("n list must be strictly increasing".into()));
    }
    Ok(())
}

/// Exact distances of `Z_n` to `Phi` and `Phi_3` for each `n`.
pub fn delta_sweep(base: &CharSpec, n_list: &[u64]) -> Result<SweepResult, RatesError> {
    delta_sweep_with_cap(base, n_list, DEFAULT_ATOM_CAP)
}

pub fn delta_sweep_with_cap(base: &CharSpec, n_list: &[u64], cap: usize) -> Result<SweepResult, RatesError> {
    let d = base.base_dist()?;
    delta_sweep_dist(&d, &base.to_string(), n_list, cap)
}

pub fn delta_sweep_dist(
    base: &DiscreteDist,
    descriptor: &str,
    n_list: &[u64],
    cap: usize,
) -> Result<SweepResult, RatesError> {
    check_n_list(n_list)?;
    let m = base.moments(1);
    let rows = n_list
        .par_iter()
        .map(|&n| sweep_row(base, n, cap))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepResult {
        base: descriptor.to_string(),
        metadata: SweepMetadata {
            sigma2: m.sigma2,
            alpha3: m.alpha3,
            beta4: m.beta4,
        },
        rows,
    })
}

fn sweep_row(base: &DiscreteDist, n: u64, cap: usize) -> Result<SweepRow, RatesError> {
    let start = Instant::now();
    let z = zn_dist_with_cap(base, n, cap)?;
    let phi = kolmogorov_distance(&z, &Normal);
    let e = Edgeworth::for_sum(&base.moments(n), n);
    let phi3 = if e.a == 0.0 { phi } else { kolmogorov_distance(&z, &e) };
    Ok(SweepRow {
        n,
        delta_phi: phi.delta,
        delta_phi3: phi3.delta,
        argmax: phi.argmax,
        side: phi.side,
        zero_mass: z.mass_at(0.0),
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// A least-squares fit of `log delta = c + exponent log n (+ logpow log log n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub logpow: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    /// Joint fit on `log n` and `log log n`.
    pub exponent: f64,
    pub logpow: f64,
    pub r2: f64,
    pub window: (u64, u64),
    pub points: usize,
    /// Fit on `log n` alone.
    pub power_only: PowerFit,
    /// Exponent pinned to `-1/2 - 1/(2 eta)`, only the log power free.
    pub constrained: Option<PowerFit>,
}

/// Fits `delta_n ~ n^exponent (log n)^logpow` over all points (all `n >= 3`,
/// so that `log log n` is defined).
pub fn rate_fit(points: &[(u64, f64)], eta_hint: Option<f64>) -> Result<RateFit, RatesError> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, d)| *n >= 3 && *d > 0.0)
        .map(|&(n, d)| ((n as f64).ln(), d.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(RatesError::TooFewPoints {
            found: pts.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let x3: Vec<Vec<f64>> = pts.iter().map(|&(l, _)| vec![1.0, l, l.ln()]).collect();
    let x2: Vec<Vec<f64>> = pts.iter().map(|&(l, _)| vec![1.0, l]).collect();
    let degenerate = || RatesError::Domain("rank-deficient design: need distinct n".into());
    let joint = least_squares(&x3, &y).ok_or_else(degenerate)?;
    let power = least_squares(&x2, &y).ok_or_else(degenerate)?;
    let constrained = match eta_hint {
        Some(eta) if eta > 0.0 && eta.is_finite() => {
            let e = -0.5 - 0.5 / eta;
            let yr: Vec<f64> = pts.iter().map(|&(l, v)| v - e * l).collect();
            let xc: Vec<Vec<f64>> = pts.iter().map(|&(l, _)| vec![1.0, l.ln()]).collect();
            least_squares(&xc, &yr).map(|f| PowerFit {
                exponent: e,
                logpow: f.coef[1],
                r2: f.r2,
            })
        }
        _ => None,
    };
    let ns: Vec<u64> = points
        .iter()
        .filter(|(n, d)| *n >= 3 && *d > 0.0)
        .map(|p| p.0)
        .collect();
    Ok(RateFit {
        exponent: joint.coef[1],
        logpow: joint.coef[2],
        r2: joint.r2,
        window: (ns[0], *ns.last().unwrap()),
        points: pts.len(),
        power_only: PowerFit {
            exponent: power.coef[1],
            logpow: 0.0,
            r2: power.r2,
        },
        constrained,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AvgDelta {
    pub n: u64,
    pub grid_size: usize,
    /// Midpoint-rule mean of `delta_n(alpha)` over `alpha in (0, 1)`.
    pub average: f64,
    /// `average * n / log(n + 1)`
    pub ratio: f64,
    /// `(alpha, delta_n(alpha))` at each grid point.
    pub values: Vec<(f64, f64)>,
}

/// `delta_n(alpha)` for the base `+-1 (+) +-alpha` against `Phi`.
pub fn delta_at_alpha(alpha: &AlphaSpec, n: u64, cap: usize) -> Result<f64, RatesError> {
    let base = convolve(&bernoulli_pm(1.0)?, &bernoulli_lattice(alpha)?)?;
    let z = zn_dist_with_cap(&base, n, cap)?;
    Ok(kolmogorov_distance(&z, &Normal).delta)
}

/// Average of `delta_n(alpha)` over the midpoints `(k + 1/2) / grid_size`.
pub fn avg_delta(n: u64, grid_size: usize) -> Result<AvgDelta, RatesError> {
    avg_delta_with_cap(n, grid_size, DEFAULT_ATOM_CAP)
}

pub fn avg_delta_with_cap(n: u64, grid_size: usize, cap: usize) -> Result<AvgDelta, RatesError> {
    if n == 0 || grid_size == 0 {
        return Err(RatesError::Domain("n and grid size must be positive".into()));
    }
    let g = grid_size as i64;
    let values = (0..g)
        .into_par_iter()
        .map(|k| {
            let alpha = AlphaSpec::rational(2 * k + 1, 2 * g)?;
            Ok(((2 * k + 1) as f64 / (2 * g) as f64, delta_at_alpha(&alpha, n, cap)?))
        })
        .collect::<Result<Vec<_>, RatesError>>()?;
    let average = crate::numeric::compensated_sum(values.iter().map(|v| v.1)) / grid_size as f64;
    let nf = n as f64;
    Ok(AvgDelta {
        n,
        grid_size,
        average,
        ratio: average * nf / (nf + 1.0).ln(),
        values,
    })
}

/// `sup_{0<x<1} |(1/n) #{k <= n : {k alpha} <= x} - x|` from the sorted
/// fractional parts, each certified by the precision oracle.
pub fn star_discrepancy(alpha: &AlphaSpec, n: u64) -> Result<f64, RatesError> {
    if n == 0 {
        return Err(RatesError::Domain("n must be at least 1".into()));
    }
    let mut scanner = FracScanner::new(alpha);
    let mut x = (1..=n).map(|k| scanner.frac_u64(k)).collect::<Result<Vec<f64>, _>>()?;
    x.sort_by(f64::total_cmp);
    let nf = n as f64;
    Ok(x.iter()
        .enumerate()
        .map(|(i, &xi)| {
            let i = i as f64;
            ((i + 1.0) / nf - xi).max(xi - i / nf)
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyRow {
    pub n: u64,
    pub dstar: f64,
}

pub fn discrepancy_sweep(alpha: &AlphaSpec, n_list: &[u64]) -> Result<Vec<DiscrepancyRow>, RatesError> {
    check_n_list(n_list)?;
    n_list
        .par_iter()
        .map(|&n| {
            Ok(DiscrepancyRow {
                n,
                dstar: star_discrepancy(alpha, n)?,
            })
        })
        .collect()
}

/// `n,dstar` with 17 significant digits.
pub fn discrepancy_csv(rows: &[DiscrepancyRow]) -> String {
    let mut out = String::from("n,dstar\n");
    for r in rows {
        let _ = writeln!(out, "{},{}", r.n, fmt17(r.dstar));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub n: u64,
    pub delta_n: f64,
    pub dstar: f64,
}

/// Side-by-side rates of the Kolmogorov distance for `+-1 (+) +-alpha` and
/// of the star discrepancy of `{k alpha}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub alpha: String,
    /// Empirical type of `alpha` over the largest `n`.
    pub eta_hat: f64,
    /// `-1/2 - 1/(2 eta)`
    pub delta_target: f64,
    /// `-1 / eta`
    pub dstar_target: f64,
    pub delta_fit: RateFit,
    pub dstar_fit: RateFit,
    pub rows: Vec<CompareRow>,
}

impl CompareReport {
    /// Gap between the two power-only exponents.
    pub fn exponent_gap(&self) -> f64 {
        (self.delta_fit.power_only.exponent - self.dstar_fit.power_only.exponent).abs()
    }
}

pub fn compare_distance_discrepancy(alpha: &AlphaSpec, n_list: &[u64]) -> Result<CompareReport, RatesError> {
    check_n_list(n_list)?;
    let base = CharSpec::product(vec![alpha.clone()]);
    let sweep = delta_sweep(&base, n_list)?;
    let disc = discrepancy_sweep(alpha, n_list)?;
    let n_max = *n_list.last().unwrap();
    let eta = type_estimate(alpha, n_max.max(2))?.eta_hat;
    let rows: Vec<CompareRow> = sweep
        .rows
        .iter()
        .zip(&disc)
        .map(|(s, d)| CompareRow {
            n: s.n,
            delta_n: s.delta_phi,
            dstar: d.dstar,
        })
        .collect();
    let delta_fit = rate_fit(&sweep.points(), Some(eta))?;
    let dstar_pts: Vec<(u64, f64)> = disc.iter().map(|r| (r.n, r.dstar)).collect();
    let dstar_fit = rate_fit(&dstar_pts, None)?;
    Ok(CompareReport {
        alpha: alpha.to_string(),
        eta_hat: eta,
        delta_target: -0.5 - 0.5 / eta,
        dstar_target: -1.0 / eta,
        delta_fit,
        dstar_fit,
        rows,
    })
}
