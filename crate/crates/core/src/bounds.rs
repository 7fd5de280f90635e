//! Berry–Esseen smoothing bounds, their explicit right-hand sides for sums of
//! i.i.d. variables, cutoff choices, and the reverse characteristic-function check.

use num_complex::Complex64;
use serde::Serialize;

use crate::charfn::{CharError, CharSpec};
use crate::distkit::{kolmogorov_distance, zn_dist, DiscreteDist, DistError, Moments};
use crate::edgeworth::{fs_transform, Edgeworth, EdgeworthError, CF_DEVIATION_CONST, CF_DEVIATION_CONST_SYMMETRIC};
use crate::quad::{integrate_with_breaks, QuadError, QuadOptions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundsError {
    #[error("quadrature failed: {0}")]
    QuadratureFailure(#[from] QuadError),
    #[error("cutoff T = {t} is below the admissible minimum sigma/sqrt(beta4) = {min}")]
    InadmissibleT { t: f64, min: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Char(#[from] CharError),
    #[error(transparent)]
    Edgeworth(#[from] EdgeworthError),
}

/// Quadrature settings used by every bound in this module.
pub const BOUNDS_QUAD: QuadOptions = QuadOptions {
    abs_tol: 1e-12,
    rel_tol: 1e-10,
    max_evals: 1_000_000,
};

/// `integral_0^T |f - g| / t dt + D / T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothingReport {
    pub integral_term: f64,
    pub dt_term: f64,
    #[serde(rename = "T")]
    pub t_cutoff: f64,
    pub rhs_total: f64,
    pub quadrature_error_estimate: f64,
}

pub fn smoothing_rhs<F, G>(f: F, g: G, t_cutoff: f64, d: f64) -> Result<SmoothingReport, BoundsError>
where
    F: Fn(f64) -> Complex64,
    G: Fn(f64) -> Complex64,
{
    smoothing_rhs_with_breaks(f, g, t_cutoff, d, &[])
}

/// [`smoothing_rhs`] with forced panel boundaries. The quadrature never
/// evaluates `t = 0`, where the integrand has a removable singularity.
pub fn smoothing_rhs_with_breaks<F, G>(
    f: F,
    g: G,
    t_cutoff: f64,
    d: f64,
    breaks: &[f64],
) -> Result<SmoothingReport, BoundsError>
where
    F: Fn(f64) -> Complex64,
    G: Fn(f64) -> Complex64,
{
    if !(t_cutoff > 0.0) || !t_cutoff.is_finite() {
        return Err(BoundsError::Domain("T must be positive".into()));
    }
    if !(d > 0.0) || !d.is_finite() {
        return Err(BoundsError::Domain("D must be positive".into()));
    }
    let opts = QuadOptions {
        abs_tol: 1e-11,
        rel_tol: 1e-10,
        ..BOUNDS_QUAD
    };
    let r = integrate_with_breaks(|t| (f(t) - g(t)).norm() / t, 0.0, t_cutoff, breaks, opts)?;
    let dt_term = d / t_cutoff;
    Ok(SmoothingReport {
        integral_term: r.value,
        dt_term,
        t_cutoff,
        rhs_total: r.value + dt_term,
        quadrature_error_estimate: r.abs_error,
    })
}

/// The law whose characteristic function enters the bound.
#[derive(Debug, Clone, Copy)]
pub enum Base<'a> {
    Char(&'a CharSpec),
    Dist(&'a DiscreteDist),
}

struct Law<'a> {
    base: Base<'a>,
    dist: std::borrow::Cow<'a, DiscreteDist>,
}

impl<'a> Law<'a> {
    fn new(base: Base<'a>) -> Result<Self, BoundsError> {
        let dist = match base {
            Base::Char(c) => std::borrow::Cow::Owned(c.base_dist()?),
            Base::Dist(d) => std::borrow::Cow::Borrowed(d),
        };
        Ok(Law { base, dist })
    }

    /// `1 - |f(t)|`, stable near the peaks for the structured families.
    fn one_minus_abs(&self, t: f64) -> f64 {
        match self.base {
            Base::Char(c) => c.one_minus_abs(t),
            Base::Dist(d) => (1.0 - fs_transform(d, t).norm()).max(0.0),
        }
    }

    /// `|f(t)|^n` as `exp(n log1p(-(1 - |f|)))`.
    fn abs_pow(&self, t: f64, n: u64) -> f64 {
        let u = self.one_minus_abs(t);
        if u >= 1.0 {
            return 0.0;
        }
        (n as f64 * (-u).ln_1p()).exp()
    }

    /// Points in `(lo, hi)` where `|f|` can approach 1.
    fn peaks(&self, lo: f64, hi: f64) -> Vec<f64> {
        let step = match self.base {
            Base::Char(c) => c.peak_spacing(),
            Base::Dist(_) => return Vec::new(),
        };
        let first = (lo / step).floor() as i64 + 1;
        let last = (hi / step).ceil() as i64;
        (first..last)
            .map(|k| k as f64 * step)
            .filter(|t| *t > lo && *t < hi)
            .collect()
    }
}

/// The three terms of the explicit Berry–Esseen bound
/// `beta4 / (sigma^4 n) + 1 / (T sigma sqrt n) + integral_{sigma/sqrt(beta4)}^T |f|^n / t dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothingBound {
    pub n: u64,
    pub moment_term: f64,
    pub cutoff_term: f64,
    pub tail_integral: f64,
    pub rhs_total: f64,
    #[serde(rename = "T")]
    pub t_cutoff: f64,
    /// `sigma^2 sqrt(n) / sqrt(beta4)`
    pub t0: f64,
    /// `sigma / sqrt(beta4)`, the lower end of the tail integral.
    pub t_min: f64,
    /// `T >= sigma / sqrt(beta4)`.
    pub admissible: bool,
    /// `|f|` returns to 1 inside the integration range (lattice case).
    pub non_decaying_tail: bool,
    pub quadrature_error_estimate: f64,
}

/// Threshold on `1 - |f|` that marks a full return of `|f|` to 1.
const RETURN_TOL: f64 = 1e-12;

pub fn smoothing_bound(base: Base<'_>, n: u64, t_cutoff: f64) -> Result<SmoothingBound, BoundsError> {
    let law = Law::new(base)?;
    smoothing_bound_with(&law, &law.dist.moments(n), n, t_cutoff)
}

fn smoothing_bound_with(law: &Law<'_>, m: &Moments, n: u64, t_cutoff: f64) -> Result<SmoothingBound, BoundsError> {
    if n == 0 {
        return Err(BoundsError::Domain("n must be at least 1".into()));
    }
    let sigma = m.sigma();
    if !(sigma > 0.0) {
        return Err(BoundsError::Domain("base variance must be positive".into()));
    }
    let t_min = sigma / m.beta4.sqrt();
    if !(t_cutoff >= t_min) || !t_cutoff.is_finite() {
        return Err(BoundsError::InadmissibleT {
            t: t_cutoff,
            min: t_min,
        });
    }
    let nf = n as f64;
    let moment_term = m.beta4 / (sigma.powi(4) * nf);
    let cutoff_term = 1.0 / (t_cutoff * sigma * nf.sqrt());
    let peaks = law.peaks(t_min, t_cutoff);
    let (tail_integral, err) = if t_cutoff > t_min {
        let r = integrate_with_breaks(|t| law.abs_pow(t, n) / t, t_min, t_cutoff, &peaks, BOUNDS_QUAD)?;
        (r.value, r.abs_error)
    } else {
        (0.0, 0.0)
    };
    let non_decaying_tail = peaks.iter().any(|&t| law.one_minus_abs(t) <= RETURN_TOL);
    Ok(SmoothingBound {
        n,
        moment_term,
        cutoff_term,
        tail_integral,
        rhs_total: moment_term + cutoff_term + tail_integral,
        t_cutoff,
        t0: sigma * sigma * nf.sqrt() / m.beta4.sqrt(),
        t_min,
        admissible: true,
        non_decaying_tail,
        quadrature_error_estimate: err,
    })
}

/// The cutoff `T_n = (b n)^(1/p) (log n)^(-r)` with `r = (q + 1)/p` and `b = a p^q / 3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthCutoff {
    pub t_n: f64,
    pub r: f64,
    pub b: f64,
}

pub fn growth_cutoff(p: f64, q: f64, n: u64, a_const: f64) -> Result<GrowthCutoff, BoundsError> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(BoundsError::Domain("p must be positive".into()));
    }
    if !q.is_finite() {
        return Err(BoundsError::Domain("q must be finite".into()));
    }
    if n < 3 {
        return Err(BoundsError::Domain("n must be at least 3".into()));
    }
    if !(a_const > 0.0) || !a_const.is_finite() {
        return Err(BoundsError::Domain("a must be positive".into()));
    }
    let r = (q + 1.0) / p;
    if r < 0.0 {
        return Err(BoundsError::Domain(format!(
            "q = {q} gives a negative log exponent r = {r}"
        )));
    }
    let b = a_const * p.powf(q) / 3.0;
    let nf = n as f64;
    Ok(GrowthCutoff {
        t_n: (b * nf).powf(1.0 / p) * nf.ln().powf(-r),
        r,
        b,
    })
}

/// One `n` of a bound sweep, with the exact distance it bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsRow {
    #[serde(flatten)]
    pub report: SmoothingBound,
    pub delta_n: f64,
    /// `rhs_total / delta_n`
    pub ratio: f64,
}

/// Runs [`smoothing_bound`] at the cutoff of [`growth_cutoff`] for each `n`
/// (or at `T = sqrt(n)` when `n < 3`) next to the exact distance to the
/// Edgeworth approximant.
pub fn smoothing_bound_sweep(
    base: Base<'_>,
    n_list: &[u64],
    p: f64,
    q: f64,
    a_const: f64,
) -> Result<Vec<BoundsRow>, BoundsError> {
    let law = Law::new(base)?;
    n_list
        .iter()
        .map(|&n| {
            let m = law.dist.moments(n);
            let t = if n >= 3 {
                growth_cutoff(p, q, n, a_const)?.t_n
            } else {
                (n as f64).sqrt()
            };
            let t = t.max(m.sigma() / m.beta4.sqrt());
            let report = smoothing_bound_with(&law, &m, n, t)?;
            let z = zn_dist(&law.dist, n)?;
            let delta_n = kolmogorov_distance(&z, &Edgeworth::for_sum(&m, n)).delta;
            Ok(BoundsRow {
                report,
                delta_n,
                ratio: report.rhs_total / delta_n,
            })
        })
        .collect()
}

/// One `(n, t)` evaluation of the reverse chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReversePoint {
    pub n: u64,
    pub t: f64,
    /// `|f_n(t)| = |f(t / (sigma sqrt n))|^n`
    pub fn_abs: f64,
    /// `1.3 exp(-t^2/8) + C |t| delta_n log^(1/2)(e + 1/delta_n)`
    pub bound: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReverseRow {
    pub n: u64,
    pub delta_n: f64,
    /// `n >= beta4 / sigma^4`
    pub admissible: bool,
    /// `sup_{s >= 1} |f(s/sigma)|^n / (s n^(-1/p) log(n+1)^(q + 1/2))`
    pub growth_constant: f64,
    /// The `s` attaining `growth_constant`.
    pub growth_constant_at: f64,
    pub points: Vec<ReversePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReverseReport {
    pub p: f64,
    pub q: f64,
    /// 24.2 in general; 16.02 when the third moment vanishes.
    pub constant: f64,
    pub rows: Vec<ReverseRow>,
    pub violations: usize,
}

impl ReverseReport {
    /// `max growth_constant / min growth_constant` over the rows.
    pub fn growth_constant_spread(&self) -> f64 {
        let (lo, hi) = self.rows.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), r| {
            (lo.min(r.growth_constant), hi.max(r.growth_constant))
        });
        hi / lo
    }
}

/// Peak search reach, in multiples of `sqrt(n)` on the `|f|` scale.
const REVERSE_PEAK_REACH: f64 = 10.0;

/// Checks `|f_n(t)| <= 1.3 exp(-t^2/8) + C |t| delta_n log^(1/2)(e + 1/delta_n)`
/// at `t = s sqrt(n)` for every `s` in `s_grid` and at every peak of `|f|`,
/// and reports the constant of `|f(s/sigma)|^n <= c s n^(-1/p) log(n+1)^(q+1/2)`
/// for `s >= 1`. Its supremum sits at the peaks of `|f|`, which are scanned
/// out to `|f|`-argument `10 sqrt(n)`.
pub fn reverse_check(
    base: &CharSpec,
    n_list: &[u64],
    p: f64,
    q: f64,
    s_grid: &[f64],
) -> Result<ReverseReport, BoundsError> {
    if !(p > 0.0) || !q.is_finite() {
        return Err(BoundsError::Domain("p must be positive and q finite".into()));
    }
    let law = Law::new(Base::Char(base))?;
    let m = law.dist.moments(1);
    let sigma = m.sigma();
    let constant = if m.alpha3.abs() <= 1e-12 * m.beta3 {
        CF_DEVIATION_CONST_SYMMETRIC
    } else {
        CF_DEVIATION_CONST
    };
    let max_n = n_list.iter().copied().max().unwrap_or(1) as f64;
    let peak_u = peak_locations(base, REVERSE_PEAK_REACH * max_n.sqrt());
    let mut rows = Vec::with_capacity(n_list.len());
    let mut violations = 0;
    for &n in n_list {
        if n == 0 {
            return Err(BoundsError::Domain("n must be at least 1".into()));
        }
        let nf = n as f64;
        let z = zn_dist(&law.dist, n)?;
        let delta_n = kolmogorov_distance(&z, &Edgeworth::for_sum(&law.dist.moments(n), n)).delta;
        let slope = constant * delta_n * (std::f64::consts::E + 1.0 / delta_n).ln().sqrt();
        let scale = 1.0 / (nf.powf(-1.0 / p) * (nf + 1.0).ln().powf(q + 0.5));
        let reach = REVERSE_PEAK_REACH * nf.sqrt();
        let s_values = s_grid
            .iter()
            .copied()
            .chain(peak_u.iter().filter(|u| **u <= reach).map(|u| sigma * u));
        let (mut growth_constant, mut growth_constant_at) = (0.0f64, f64::NAN);
        let mut points = Vec::new();
        for s in s_values {
            let t = s * nf.sqrt();
            let fn_abs = law.abs_pow(t / (sigma * nf.sqrt()), n);
            let bound = 1.3 * (-t * t / 8.0).exp() + slope * t.abs();
            let violation = fn_abs > bound;
            violations += violation as usize;
            points.push(ReversePoint {
                n,
                t,
                fn_abs,
                bound,
                violation,
            });
            if s >= 1.0 {
                let c = fn_abs * scale / s;
                if c > growth_constant {
                    growth_constant = c;
                    growth_constant_at = s;
                }
            }
        }
        rows.push(ReverseRow {
            n,
            delta_n,
            admissible: nf >= m.beta4 / sigma.powi(4),
            growth_constant,
            growth_constant_at,
            points,
        });
    }
    Ok(ReverseReport {
        p,
        q,
        constant,
        rows,
        violations,
    })
}

/// Local maxima of `|f|` near each multiple of the peak spacing up to `u_max`.
fn peak_locations(spec: &CharSpec, u_max: f64) -> Vec<f64> {
    let step = spec.peak_spacing();
    let count = (u_max / step).floor() as usize;
    (1..=count)
        .map(|k| {
            let c = k as f64 * step;
            let h = 2.0 / 400.0;
            let mut best = (f64::INFINITY, c);
            for i in 0..=400 {
                let t = c - 1.0 + i as f64 * h;
                let v = spec.one_minus_abs(t);
                if v < best.0 {
                    best = (v, t);
                }
            }
            refine_peak(spec, best.1 - h, best.1 + h)
        })
        .collect()
}

fn refine_peak(spec: &CharSpec, mut l: f64, mut r: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let m1 = r - g * (r - l);
        let m2 = l + g * (r - l);
        if spec.one_minus_abs(m1) < spec.one_minus_abs(m2) {
            r = m2;
        } else {
            l = m1;
        }
    }
    0.5 * (l + r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dioph::AlphaSpec;
    use crate::edgeworth::phi3_fourier_with;

    fn sqrt2_prod() -> CharSpec {
        CharSpec::product(vec![AlphaSpec::sqrt(2).unwrap()])
    }

    #[test]
    fn smoothing_identical() {
        let g = |t: f64| Complex64::new((-t * t / 2.0).exp(), 0.0);
        let r = smoothing_rhs(g, g, 10.0, 0.4).unwrap();
        assert_eq!(r.integral_term, 0.0);
        assert!((r.rhs_total - 0.04).abs() < 1e-16);
        assert!(smoothing_rhs(g, g, 0.0, 0.4).is_err());
    }

    #[test]
    fn smoothing_against_simpson() {
        let base = sqrt2_prod().base_dist().unwrap();
        let z = zn_dist(&base, 8).unwrap();
        let f = |t: f64| fs_transform(&z, t);
        let g = |t: f64| phi3_fourier_with(t, 0.0);
        let r = smoothing_rhs(f, g, 20.0, crate::edgeworth::std_normal_pdf(0.0)).unwrap();
        // composite Simpson on 10^6 panels; the integrand extends continuously to 0
        let m = 1_000_000usize;
        let h = 20.0 / m as f64;
        let h_at = |t: f64| if t == 0.0 { 0.0 } else { (f(t) - g(t)).norm() / t };
        let mut s = h_at(0.0) + h_at(20.0);
        for i in 1..m {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * h_at(i as f64 * h);
        }
        let simpson = s * h / 3.0;
        assert!(
            (r.integral_term - simpson).abs() <= 1e-8 * simpson,
            "{} {}",
            r.integral_term,
            simpson
        );
        assert!(r.quadrature_error_estimate < 1e-9 * (1.0 + r.integral_term));
    }

    #[test]
    fn smoothing_bound_scaling_and_boundary() {
        let spec = sqrt2_prod();
        let a = smoothing_bound(Base::Char(&spec), 64, 8.0).unwrap();
        let b = smoothing_bound(Base::Char(&spec), 256, 8.0).unwrap();
        assert!((a.moment_term / b.moment_term - 4.0).abs() < 1e-12);
        // sigma^2 = 3, beta4 = 17
        assert!((a.t_min - (3f64 / 17.0).sqrt()).abs() < 1e-14);
        assert!((a.t0 - 3.0 * 8.0 / 17f64.sqrt()).abs() < 1e-12);
        let edge = smoothing_bound(Base::Char(&spec), 16, a.t_min).unwrap();
        assert_eq!(edge.tail_integral, 0.0);
        assert_eq!(edge.rhs_total, edge.moment_term + edge.cutoff_term);
        assert!(matches!(
            smoothing_bound(Base::Char(&spec), 16, 0.1),
            Err(BoundsError::InadmissibleT { .. })
        ));
    }

    #[test]
    fn lattice_tail_flagged() {
        let unit = CharSpec::product(Vec::new());
        let below = smoothing_bound(Base::Char(&unit), 64, 3.0).unwrap();
        assert!(!below.non_decaying_tail);
        let above = smoothing_bound(Base::Char(&unit), 64, 10.0).unwrap();
        assert!(above.non_decaying_tail);
        assert!(above.tail_integral > 0.1);
        let irr = smoothing_bound(Base::Char(&sqrt2_prod()), 64, 10.0).unwrap();
        assert!(!irr.non_decaying_tail);
    }

    #[test]
    fn dist_and_char_bases_agree() {
        let spec = sqrt2_prod();
        let d = spec.base_dist().unwrap();
        let a = smoothing_bound(Base::Char(&spec), 32, 6.0).unwrap();
        let b = smoothing_bound(Base::Dist(&d), 32, 6.0).unwrap();
        assert!((a.tail_integral - b.tail_integral).abs() < 1e-10 * (1.0 + a.tail_integral));
    }

    #[test]
    fn growth_cutoff_examples() {
        let n = 55u64;
        let c = growth_cutoff(2.0, 0.0, n, 1.0).unwrap();
        assert_eq!(c.r, 0.5);
        assert!((c.b - 1.0 / 3.0).abs() < 1e-16);
        let nf = n as f64;
        assert!((c.t_n - (nf / 3.0).sqrt() / nf.ln().sqrt()).abs() < 1e-13);
        assert_eq!(growth_cutoff(2.0, -1.0, n, 1.0).unwrap().r, 0.0);
        assert!(growth_cutoff(2.0, -2.0, n, 1.0).is_err());
        assert!(growth_cutoff(0.0, 0.0, n, 1.0).is_err());
        assert!(growth_cutoff(2.0, 0.0, 2, 1.0).is_err());
    }

    #[test]
    fn reverse_check_at_zero() {
        let r = reverse_check(&sqrt2_prod(), &[16], 2.0, 0.0, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(r.constant, CF_DEVIATION_CONST_SYMMETRIC);
        let p0 = r.rows[0].points[0];
        assert_eq!(p0.fn_abs, 1.0);
        assert!(p0.bound >= 1.3 && !p0.violation);
    }
}
