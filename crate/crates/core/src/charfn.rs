//! Characteristic functions of the product and mixture families built from
//! symmetric Bernoulli laws on `+-1, +-alpha_1, ..., +-alpha_m`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::dioph::{AlphaSpec, DiophError};
use crate::distkit::{bernoulli_lattice, bernoulli_pm, convolve, mixture, DiscreteDist, DistError};
use crate::numeric::two_prod;
use crate::regress::least_squares;

const TWO_PI_HI: f64 = std::f64::consts::TAU;
const TWO_PI_LO: f64 = 2.449_293_598_294_706_4e-16;
const PI_LO: f64 = 1.224_646_799_147_353_2e-16;

/// Tolerance on the mixture weight sum.
pub const WEIGHT_SUM_TOL: f64 = 128.0 * f64::EPSILON; // 2^-45

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CharError {
    #[error("cannot parse characteristic-function spec {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("mixture weights must be positive and sum to 1 (sum = {sum})")]
    InvalidWeights { sum: f64 },
    #[error("found {found} usable peaks, need {needed}")]
    InsufficientPeaks { found: usize, needed: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Precision(#[from] DiophError),
    #[error(transparent)]
    Dist(#[from] DistError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CharForm {
    /// `cos t cos(alpha_1 t) ... cos(alpha_m t)`
    Product,
    /// `p_0 cos t + p_1 cos(alpha_1 t) + ... + p_m cos(alpha_m t)`
    Mixture,
}

/// One of the two families, over `alpha_0 = 1, alpha_1, ..., alpha_m`.
#[derive(Debug, Clone)]
pub struct CharSpec {
    form: CharForm,
    alphas: Vec<AlphaSpec>,
    weights: Vec<f64>,
    dd: Vec<(f64, f64)>,
}

impl PartialEq for CharSpec {
    fn eq(&self, o: &Self) -> bool {
        self.form == o.form && self.alphas == o.alphas && self.weights == o.weights
    }
}

impl CharSpec {
    pub fn product(alphas: Vec<AlphaSpec>) -> Self {
        let dd = Self::phases(&alphas);
        CharSpec {
            form: CharForm::Product,
            alphas,
            weights: Vec::new(),
            dd,
        }
    }

    /// Mixture with weight `p0` on `cos t` and `p_k` on `cos(alpha_k t)`.
    pub fn mixture(p0: f64, items: Vec<(AlphaSpec, f64)>) -> Result<Self, CharError> {
        let mut weights = vec![p0];
        let mut alphas = Vec::with_capacity(items.len());
        for (a, p) in items {
            alphas.push(a);
            weights.push(p);
        }
        let sum = crate::numeric::compensated_sum(weights.iter().copied());
        if weights.iter().any(|p| !(*p > 0.0) || !p.is_finite()) || (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(CharError::InvalidWeights { sum });
        }
        let dd = Self::phases(&alphas);
        Ok(CharSpec {
            form: CharForm::Mixture,
            alphas,
            weights,
            dd,
        })
    }

    fn phases(alphas: &[AlphaSpec]) -> Vec<(f64, f64)> {
        std::iter::once((1.0, 0.0))
            .chain(alphas.iter().map(AlphaSpec::to_dd))
            .collect()
    }

    pub fn parse(input: &str) -> Result<Self, CharError> {
        let text = input.trim();
        let perr = |reason: &str| CharError::Parse {
            input: text.to_string(),
            reason: reason.to_string(),
        };
        if let Some(body) = text.strip_prefix("prod:") {
            let alphas = split_alphas(body)
                .into_iter()
                .map(|s| AlphaSpec::parse(&s).map_err(|e| perr(&e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Self::product(alphas))
        } else if let Some(body) = text.strip_prefix("mix:") {
            let (p0, rest) = body.split_once(':').unwrap_or((body, ""));
            let p0: f64 = p0.trim().parse().map_err(|_| perr("bad weight p0"))?;
            let mut items = Vec::new();
            let mut rest = rest.trim();
            while !rest.is_empty() {
                let (alpha, tail) = rest
                    .split_once('=')
                    .ok_or_else(|| perr("mixture items must read <alpha>=<weight>"))?;
                let (w, tail) = tail.split_once(',').unwrap_or((tail, ""));
                let a = AlphaSpec::parse(alpha).map_err(|e| perr(&e.to_string()))?;
                let w: f64 = w.trim().parse().map_err(|_| perr("bad mixture weight"))?;
                items.push((a, w));
                rest = tail.trim();
            }
            Self::mixture(p0, items)
        } else {
            Err(perr("expected prefix prod: or mix:"))
        }
    }

    /// Same spec with every frequency's precision cap set to `bits`.
    pub fn with_precision_cap(mut self, bits: u32) -> Self {
        self.alphas = self.alphas.into_iter().map(|a| a.with_precision_cap(bits)).collect();
        self
    }

    pub fn form(&self) -> CharForm {
        self.form
    }

    pub fn alphas(&self) -> &[AlphaSpec] {
        &self.alphas
    }

    /// `p_0, ..., p_m` for the mixture form; empty for products.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Every frequency is rational, so `|f|` returns to 1 periodically.
    pub fn is_lattice(&self) -> bool {
        self.alphas.iter().all(|a| a.exact_rational().is_some())
    }

    /// Spacing of the expected peaks of `|f|`: `pi` for products, `2 pi` for mixtures.
    pub fn peak_spacing(&self) -> f64 {
        match self.form {
            CharForm::Product => PI,
            CharForm::Mixture => 2.0 * PI,
        }
    }

    /// The distribution whose characteristic function this is.
    pub fn base_dist(&self) -> Result<DiscreteDist, CharError> {
        let unit = bernoulli_pm(1.0)?;
        match self.form {
            CharForm::Product => {
                let mut d = unit;
                for a in &self.alphas {
                    d = convolve(&d, &bernoulli_lattice(a)?)?;
                }
                Ok(d)
            }
            CharForm::Mixture => {
                let mut parts = vec![(self.weights[0], unit)];
                for (a, p) in self.alphas.iter().zip(&self.weights[1..]) {
                    parts.push((*p, bernoulli_lattice(a)?));
                }
                Ok(mixture(&parts)?)
            }
        }
    }

    /// `f(t)`; each phase `t alpha_k` is reduced modulo `2 pi` in double-double
    /// arithmetic, so the result stays accurate to ~1e-15 for `|t alpha| < 2^50`.
    pub fn eval(&self, t: f64) -> f64 {
        match self.form {
            CharForm::Product => self.dd.iter().map(|&a| reduce_2pi(t, a).cos()).product(),
            CharForm::Mixture => {
                let mut acc = crate::numeric::Compensated::new();
                for (&a, p) in self.dd.iter().zip(&self.weights) {
                    acc.add(p * reduce_2pi(t, a).cos());
                }
                acc.value()
            }
        }
    }

    /// `1 - |f(t)|` without cancellation near the peaks of `|f|`.
    pub fn one_minus_abs(&self, t: f64) -> f64 {
        let phases = self.dd.iter().map(|&a| reduce_2pi(t, a));
        let v = match self.form {
            CharForm::Product => {
                // 1 - prod (1 - u_k) with u_k = 1 - |cos r_k|
                let s: f64 = phases.map(|r| (-half_versine(dist_to_pi_multiple(r))).ln_1p()).sum();
                -s.exp_m1()
            }
            CharForm::Mixture => {
                let r: Vec<f64> = phases.collect();
                let f: f64 = r.iter().zip(&self.weights).map(|(r, p)| p * r.cos()).sum();
                let w = self.weights.iter();
                if f >= 0.0 {
                    w.zip(&r).map(|(p, r)| p * half_versine(r.abs())).sum()
                } else {
                    w.zip(&r).map(|(p, r)| p * half_versine((PI - r.abs()) + PI_LO)).sum()
                }
            }
        };
        v.clamp(0.0, 1.0)
    }
}

/// `1 - cos s = 2 sin^2(s/2)`.
fn half_versine(s: f64) -> f64 {
    let h = (0.5 * s).sin();
    2.0 * h * h
}

/// Distance from `r` in `(-pi, pi]` to the nearest multiple of `pi`.
fn dist_to_pi_multiple(r: f64) -> f64 {
    let a = r.abs();
    if a <= 0.5 * PI {
        a
    } else {
        (PI - a) + PI_LO
    }
}

/// `t alpha mod 2 pi` in `[-pi, pi]`, with `alpha` given as a double-double.
pub(crate) fn reduce_2pi(t: f64, alpha: (f64, f64)) -> f64 {
    let (ph, pl) = two_prod(t, alpha.0);
    let pl = pl + t * alpha.1;
    let k = (ph / TWO_PI_HI).round();
    let (s, e) = two_prod(k, TWO_PI_HI);
    ((ph - s) - e) + (pl - k * TWO_PI_LO)
}

/// `||t alpha||` with `alpha` given as a double-double.
pub(crate) fn dist_to_int(t: f64, alpha: (f64, f64)) -> f64 {
    let (ph, pl) = two_prod(t, alpha.0);
    let pl = pl + t * alpha.1;
    let d = (ph - ph.round()) + pl;
    (d - d.round()).abs()
}

/// Splits a comma-separated alpha list, regrouping fields that belong to a
/// single spec (for example the four integers of `surd:a,b,c,d`).
fn split_alphas(body: &str) -> Vec<String> {
    const KINDS: [&str; 5] = ["surd:", "cf:", "dec:", "rat:", "gen:"];
    let mut out: Vec<String> = Vec::new();
    for field in body.split(',') {
        let f = field.trim();
        if f.is_empty() && out.is_empty() {
            continue;
        }
        match out.last_mut() {
            Some(last) if !KINDS.iter().any(|k| f.starts_with(k)) => {
                last.push(',');
                last.push_str(f);
            }
            _ => out.push(f.to_string()),
        }
    }
    out
}

impl fmt::Display for CharSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.form {
            CharForm::Product => {
                let a: Vec<String> = self.alphas.iter().map(|a| a.to_string()).collect();
                write!(f, "prod:{}", a.join(","))
            }
            CharForm::Mixture => {
                let items: Vec<String> = self
                    .alphas
                    .iter()
                    .zip(&self.weights[1..])
                    .map(|(a, p)| format!("{a}={p}"))
                    .collect();
                write!(f, "mix:{}:{}", self.weights[0], items.join(","))
            }
        }
    }
}

impl FromStr for CharSpec {
    type Err = CharError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// `(t, 1 - |f(t)|)` at each grid point.
pub fn one_minus_abs_profile(spec: &CharSpec, t_grid: &[f64]) -> Vec<(f64, f64)> {
    t_grid.par_iter().map(|&t| (t, spec.one_minus_abs(t))).collect()
}

/// The elementary bounds relating `|cos(pi x)|` to `||x||`, evaluated at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CosineBounds {
    pub x: f64,
    pub dist: f64,
    /// `exp(-pi^2 ||x||^2 / 2) - |cos(pi x)|`
    pub exp_margin: f64,
    /// `1 - |cos(pi x)| - 4 ||x||^2`
    pub lower_margin: f64,
    /// `pi^2 ||x||^2 / 2 - (1 - |cos(pi x)|)`
    pub upper_margin: f64,
    pub pass: bool,
}

pub const COSINE_BOUNDS_SLACK: f64 = 1e-12;

pub fn cosine_bounds_check(x: f64) -> CosineBounds {
    let d = (x - x.round()).abs();
    let abs_cos = (PI * d).cos();
    let one_minus = half_versine(PI * d);
    let exp_margin = (-0.5 * PI * PI * d * d).exp() - abs_cos;
    let lower_margin = one_minus - 4.0 * d * d;
    let upper_margin = 0.5 * PI * PI * d * d - one_minus;
    CosineBounds {
        x,
        dist: d,
        exp_margin,
        lower_margin,
        upper_margin,
        pass: exp_margin >= -COSINE_BOUNDS_SLACK
            && lower_margin >= -COSINE_BOUNDS_SLACK
            && upper_margin >= -COSINE_BOUNDS_SLACK,
    }
}

/// Both sides of `||t||^2 + sum ||t alpha_k||^2 >= c^2 eps(n(t))^2` with
/// `n(t)` the nearest integer to `t` and `1/c = 1 + max |alpha_k|`.
pub fn diophantine_lower_bound<E>(alphas: &[AlphaSpec], t: f64, eps_at: E) -> Result<(f64, f64), CharError>
where
    E: Fn(u64) -> Result<f64, DiophError>,
{
    if !(t >= 1.0) || !t.is_finite() {
        return Err(CharError::Domain("t must be at least 1".into()));
    }
    let n = t.round().max(1.0) as u64;
    let eps = eps_at(n)?;
    if !(eps > 0.0) {
        return Err(CharError::Domain(format!("eps({n}) must be positive")));
    }
    let lhs = std::iter::once((1.0, 0.0))
        .chain(alphas.iter().map(AlphaSpec::to_dd))
        .map(|a| dist_to_int(t, a).powi(2))
        .sum();
    let max_abs = alphas.iter().map(|a| a.to_f64().abs()).fold(0.0, f64::max);
    let c = 1.0 / (1.0 + max_abs);
    Ok((lhs, (c * eps).powi(2)))
}

/// Growth of `1 / (1 - |f(t)|)` along the peaks of `|f|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit {
    /// Fitted power of `t`.
    pub p_hat: f64,
    /// Fitted power of `log t`, when the range is long enough to identify it.
    pub q_hat: Option<f64>,
    /// Slope of the fit without the `log log t` column.
    pub p_hat_power_only: f64,
    /// `(t, 1 - |f(t)|)` at the retained peaks.
    pub sample: Vec<(f64, f64)>,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    /// All frequencies are rational: `|f|` attains 1 and there is no growth law.
    pub degenerate: bool,
}

/// Range threshold above which the `log log t` coefficient is fitted.
pub const LOGLOG_MIN_T: f64 = 1e3;
const PEAK_GRID: usize = 400;

/// Locates the peak of `|f|` within one unit of each `k * spacing <= t_max`,
/// keeps the record peaks (each higher than all earlier ones) with
/// `1 - |f| < 1/2`, and regresses `log(1 / (1 - |f|))` on `log t` (and
/// `log log t`) over the last `n_peaks` records.
pub fn growth_fit(spec: &CharSpec, t_max: f64, n_peaks: usize) -> Result<GrowthFit, CharError> {
    if !(t_max > 10.0) || !t_max.is_finite() {
        return Err(CharError::Domain("t_max must exceed 10".into()));
    }
    if n_peaks < 8 {
        return Err(CharError::Domain("n_peaks must be at least 8".into()));
    }
    if spec.is_lattice() {
        return Ok(GrowthFit {
            p_hat: f64::INFINITY,
            q_hat: None,
            p_hat_power_only: f64::INFINITY,
            sample: Vec::new(),
            residual: 0.0,
            degenerate: true,
        });
    }
    let step = spec.peak_spacing();
    let count = (t_max / step).floor() as usize;
    let peaks: Vec<(f64, f64)> = (1..=count)
        .into_par_iter()
        .map(|k| locate_peak(spec, k as f64 * step, t_max))
        .collect();
    let mut records: Vec<(f64, f64)> = Vec::new();
    for (t, v) in peaks {
        if t < 2.0 || v >= 0.5 || v <= 0.0 {
            continue;
        }
        if records.last().is_none_or(|&(_, best)| v < best) {
            records.push((t, v));
        }
    }
    if records.len() < n_peaks {
        return Err(CharError::InsufficientPeaks {
            found: records.len(),
            needed: n_peaks,
        });
    }
    let sample = records[records.len() - n_peaks..].to_vec();
    let y: Vec<f64> = sample.iter().map(|&(_, v)| -v.ln()).collect();
    let x2: Vec<Vec<f64>> = sample.iter().map(|&(t, _)| vec![1.0, t.ln()]).collect();
    let power = least_squares(&x2, &y).ok_or_else(|| CharError::Domain("degenerate peak sample".into()))?;
    let (p_hat, q_hat, residual) = if t_max >= LOGLOG_MIN_T {
        let x3: Vec<Vec<f64>> = sample.iter().map(|&(t, _)| vec![1.0, t.ln(), t.ln().ln()]).collect();
        match least_squares(&x3, &y) {
            Some(f) => (f.coef[1], Some(f.coef[2]), f.rms),
            None => (power.coef[1], None, power.rms),
        }
    } else {
        (power.coef[1], None, power.rms)
    };
    Ok(GrowthFit {
        p_hat,
        q_hat,
        p_hat_power_only: power.coef[1],
        sample,
        residual,
        degenerate: false,
    })
}

/// Minimizer of `1 - |f|` on `[c - 1, c + 1]`: grid scan, then golden section.
fn locate_peak(spec: &CharSpec, c: f64, t_max: f64) -> (f64, f64) {
    let lo = c - 1.0;
    let hi = (c + 1.0).min(t_max);
    let h = (hi - lo) / PEAK_GRID as f64;
    let mut best = (f64::INFINITY, 0usize);
    for i in 0..=PEAK_GRID {
        let v = spec.one_minus_abs(lo + i as f64 * h);
        if v < best.0 {
            best = (v, i);
        }
    }
    let (mut l, mut r) = (
        lo + best.1.saturating_sub(1) as f64 * h,
        lo + (best.1 + 1).min(PEAK_GRID) as f64 * h,
    );
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut m1 = r - g * (r - l);
    let mut m2 = l + g * (r - l);
    let (mut f1, mut f2) = (spec.one_minus_abs(m1), spec.one_minus_abs(m2));
    for _ in 0..100 {
        if r - l <= 1e-13 * c.abs().max(1.0) {
            break;
        }
        if f1 < f2 {
            r = m2;
            m2 = m1;
            f2 = f1;
            m1 = r - g * (r - l);
            f1 = spec.one_minus_abs(m1);
        } else {
            l = m1;
            m1 = m2;
            f1 = f2;
            m2 = l + g * (r - l);
            f2 = spec.one_minus_abs(m2);
        }
    }
    let t = 0.5 * (l + r);
    let v = spec.one_minus_abs(t);
    if v <= best.0 {
        (t, v)
    } else {
        (lo + best.1 as f64 * h, best.0)
    }
}
