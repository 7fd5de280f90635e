//! Normal and third-order Edgeworth approximants, their Fourier–Stieltjes
//! transforms, and explicit-constant deviation bounds.

use num_complex::Complex64;
use serde::Serialize;

use crate::distkit::{ComparisonFn, DiscreteDist};
use crate::numeric::CompensatedComplex;
use crate::quad::{integrate_to_inf, integrate_with_breaks, QuadError, QuadOptions};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EdgeworthError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("second moments differ: F has {f}, G has {g}")]
    MomentMismatch { f: f64, g: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// `Phi(x)` via the complementary error function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `1 - Phi(x)` without cancellation.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Parameters `(alpha3, sigma, n)` of the Edgeworth correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeworthParams {
    pub alpha3: f64,
    pub sigma: f64,
    pub n: u64,
    /// `n >= beta4 / sigma^4`, when `beta4` was supplied.
    pub admissible: Option<bool>,
}

impl EdgeworthParams {
    pub fn new(alpha3: f64, sigma: f64, n: u64) -> Result<Self, EdgeworthError> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(EdgeworthError::Domain("sigma must be positive".into()));
        }
        if n == 0 {
            return Err(EdgeworthError::Domain("n must be at least 1".into()));
        }
        if !alpha3.is_finite() {
            return Err(EdgeworthError::Domain("alpha3 must be finite".into()));
        }
        Ok(EdgeworthParams {
            alpha3,
            sigma,
            n,
            admissible: None,
        })
    }

    /// Records the admissibility check `n >= beta4 / sigma^4`.
    pub fn with_beta4(mut self, beta4: f64) -> Self {
        self.admissible = Some(self.n as f64 >= beta4 / self.sigma.powi(4));
        self
    }

    pub fn from_moments(m: &crate::distkit::Moments, n: u64) -> Result<Self, EdgeworthError> {
        Ok(Self::new(m.alpha3, m.sigma(), n)?.with_beta4(m.beta4))
    }

    /// `a = alpha3 / (6 sigma^3 sqrt n)`.
    pub fn coefficient(&self) -> f64 {
        self.alpha3 / (6.0 * self.sigma.powi(3) * (self.n as f64).sqrt())
    }
}

/// `Phi_3(x) = Phi(x) - a (x^2 - 1) phi(x)`.
pub fn phi3(x: f64, p: &EdgeworthParams) -> f64 {
    phi3_with(x, p.coefficient())
}

pub fn phi3_with(x: f64, a: f64) -> f64 {
    if a == 0.0 {
        return std_normal_cdf(x);
    }
    std_normal_cdf(x) - a * (x * x - 1.0) * std_normal_pdf(x)
}

/// Real roots of `1 + a (x^3 - 3x) = 0`, ascending.
pub fn phi3_stationary_points(p: &EdgeworthParams) -> Vec<f64> {
    cubic_stationary_points(p.coefficient())
}

pub(crate) fn cubic_stationary_points(a: f64) -> Vec<f64> {
    if a == 0.0 || !a.is_finite() {
        return Vec::new();
    }
    // x^3 - 3x + q = 0 with q = 1/a; substitute x = 2 cos(phi) or 2 cosh(psi)
    let q = 1.0 / a;
    let mut roots = if q.abs() < 2.0 {
        let theta = (-q / 2.0).acos();
        (0..3)
            .map(|k| 2.0 * ((theta + 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos())
            .collect::<Vec<_>>()
    } else if q.abs() == 2.0 {
        let s = q.signum();
        vec![-2.0 * s, s]
    } else {
        let psi = (q.abs() / 2.0).acosh();
        vec![-q.signum() * 2.0 * (psi / 3.0).cosh()]
    };
    for x in roots.iter_mut() {
        let f = *x * *x * *x - 3.0 * *x + q;
        let df = 3.0 * *x * *x - 3.0;
        if df.abs() > 1e-8 {
            *x -= f / df;
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    roots
}

/// `g3(t) = exp(-t^2/2) (1 + a (it)^3)`.
pub fn phi3_fourier(t: f64, p: &EdgeworthParams) -> Complex64 {
    phi3_fourier_with(t, p.coefficient())
}

pub fn phi3_fourier_with(t: f64, a: f64) -> Complex64 {
    let g = (-0.5 * t * t).exp();
    Complex64::new(g, -a * t * t * t * g)
}

/// `|G(x)| <= A exp(-x^2/B)` on the left half-line and the same for `1 - G` on the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEnvelope {
    pub a: f64,
    pub b: f64,
}

impl TailEnvelope {
    /// The envelope of `Phi`: `(1/2, 2)`.
    pub const NORMAL: TailEnvelope = TailEnvelope { a: 0.5, b: 2.0 };
    /// The envelope of `Phi_3` under admissibility: `(0.57, 4)`.
    pub const EDGEWORTH: TailEnvelope = TailEnvelope { a: 0.57, b: 4.0 };

    pub fn new(a: f64, b: f64) -> Result<Self, EdgeworthError> {
        if !(a >= 0.5) || !a.is_finite() {
            return Err(EdgeworthError::Domain(
                "envelope amplitude A must be at least 1/2".into(),
            ));
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(EdgeworthError::Domain("envelope scale B must be positive".into()));
        }
        Ok(TailEnvelope { a, b })
    }
}

fn check_delta(delta: f64) -> Result<(), EdgeworthError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(EdgeworthError::Domain(format!("delta must lie in (0, 1], got {delta}")));
    }
    Ok(())
}

fn log_e_plus_inv(delta: f64) -> f64 {
    (std::f64::consts::E + 1.0 / delta).ln()
}

/// `13 A B delta log(e + 1/delta)`: bound on `sup x^2 |F - G|`.
pub fn nonuniform_bound(delta: f64, env: &TailEnvelope) -> Result<f64, EdgeworthError> {
    check_delta(delta)?;
    Ok(13.0 * env.a * env.b * delta * log_e_plus_inv(delta))
}

/// `16.02 sqrt(A B) delta log^(1/2)(e + 1/delta)`: bound on `W1(F, G)`.
pub fn w1_bound(delta: f64, env: &TailEnvelope) -> Result<f64, EdgeworthError> {
    check_delta(delta)?;
    Ok(16.02 * (env.a * env.b).sqrt() * delta * log_e_plus_inv(delta).sqrt())
}

/// `4 pi a delta`: the W1 bound when both measures live on `[-a, a]`.
pub fn w1_bound_compact(a: f64, delta: f64) -> Result<f64, EdgeworthError> {
    check_delta(delta)?;
    if !(a > 0.0) {
        return Err(EdgeworthError::Domain("a must be positive".into()));
    }
    Ok(4.0 * std::f64::consts::PI * a * delta)
}

/// Constant of the characteristic-function deviation bound for `G = Phi_3`.
pub const CF_DEVIATION_CONST: f64 = 24.2;
/// The sharper constant available when `G = Phi` (zero third moment).
pub const CF_DEVIATION_CONST_SYMMETRIC: f64 = 16.02;

/// `24.2 |t| delta log^(1/2)(e + 1/delta)`.
pub fn cf_deviation_bound(t: f64, delta: f64) -> Result<f64, EdgeworthError> {
    cf_deviation_bound_with(CF_DEVIATION_CONST, t, delta)
}

pub fn cf_deviation_bound_with(constant: f64, t: f64, delta: f64) -> Result<f64, EdgeworthError> {
    check_delta(delta)?;
    Ok(constant * t.abs() * delta * log_e_plus_inv(delta).sqrt())
}

/// `sum_k w_k exp(i t x_k)` with compensated summation.
pub fn fs_transform(d: &DiscreteDist, t: f64) -> Complex64 {
    let mut acc = CompensatedComplex::default();
    for (x, w) in d.atoms() {
        let (s, c) = (t * x).sin_cos();
        acc.add(w * c, w * s);
    }
    acc.value()
}

/// The standard normal distribution function as a comparison function.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Normal;

impl ComparisonFn for Normal {
    fn eval(&self, x: f64) -> f64 {
        std_normal_cdf(x)
    }
    fn derivative(&self, x: f64) -> f64 {
        std_normal_pdf(x)
    }
    fn stationary_points(&self, _lo: f64, _hi: f64) -> Vec<f64> {
        Vec::new()
    }
    fn second_moment(&self) -> Option<f64> {
        Some(1.0)
    }
    fn tail_second_moment(&self, a: f64) -> Option<f64> {
        Some(gaussian_tail_second_moment(a))
    }
}

/// `integral_{|x| >= a} x^2 dPhi = 2 (a phi(a) + 1 - Phi(a))` for `a >= 0`.
pub fn gaussian_tail_second_moment(a: f64) -> f64 {
    2.0 * (a * std_normal_pdf(a) + std_normal_sf(a))
}

/// `Phi_3` with correction coefficient `a` as a comparison function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edgeworth {
    pub a: f64,
}

impl Edgeworth {
    pub fn new(p: &EdgeworthParams) -> Self {
        Edgeworth { a: p.coefficient() }
    }

    /// The approximant for the normalized sum of `n` copies of a base law
    /// with the given moments.
    pub fn for_sum(m: &crate::distkit::Moments, n: u64) -> Self {
        Edgeworth {
            a: m.alpha3 / (6.0 * m.sigma2.powf(1.5) * (n.max(1) as f64).sqrt()),
        }
    }
}

impl ComparisonFn for Edgeworth {
    fn eval(&self, x: f64) -> f64 {
        phi3_with(x, self.a)
    }
    fn derivative(&self, x: f64) -> f64 {
        std_normal_pdf(x) * (1.0 + self.a * (x * x * x - 3.0 * x))
    }
    fn stationary_points(&self, lo: f64, hi: f64) -> Vec<f64> {
        cubic_stationary_points(self.a)
            .into_iter()
            .filter(|x| *x >= lo && *x <= hi)
            .collect()
    }
    fn second_moment(&self) -> Option<f64> {
        // the correction x^2 (3x - x^3) phi(x) is odd
        Some(1.0)
    }
    fn tail_second_moment(&self, a: f64) -> Option<f64> {
        // odd correction again: the symmetric tails cancel it
        Some(gaussian_tail_second_moment(a))
    }
}

/// The three summands of the non-uniform tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailMomentTerms {
    /// `4 a^2 delta`
    pub jump_term: f64,
    /// `integral_{|x| >= a} x^2 dG`
    pub tail_integral: f64,
    /// `max(sup_{x >= a} x^2 |1 - G|, sup_{x <= -a} x^2 |G|)`
    pub tail_sup: f64,
    pub total: f64,
    /// `G` lives on `[-a, a]`, so only the jump term remains.
    pub compact: bool,
}

/// Right side of the bound on `sup x^2 |F(x) - G(x)|` for a cut level `a`.
pub fn tail_moment_bound<G: ComparisonFn + ?Sized>(
    d: &DiscreteDist,
    g: &G,
    a: f64,
    delta: f64,
) -> Result<TailMomentTerms, EdgeworthError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(EdgeworthError::Domain("a must be positive".into()));
    }
    if !(delta >= 0.0) {
        return Err(EdgeworthError::Domain("delta must be non-negative".into()));
    }
    let f2 = crate::numeric::compensated_sum(d.atoms().map(|(x, w)| w * x * x));
    let g2 = match g.second_moment() {
        Some(v) => v,
        None => return Err(EdgeworthError::Domain("G has no known second moment".into())),
    };
    if (f2 - g2).abs() > 1e-9 * (1.0 + g2.abs()) {
        return Err(EdgeworthError::MomentMismatch { f: f2, g: g2 });
    }
    let jump_term = 4.0 * a * a * delta;
    if let Some((lo, hi)) = g.support() {
        if lo >= -a && hi <= a {
            return Ok(TailMomentTerms {
                jump_term,
                tail_integral: 0.0,
                tail_sup: 0.0,
                total: jump_term,
                compact: true,
            });
        }
    }
    let tail_integral = match g.tail_second_moment(a) {
        Some(v) => v,
        None => tail_second_moment(g, a)?,
    };
    let right = scan_sup(|x| x * x * (1.0 - g.eval(x)).abs(), a);
    let left = scan_sup(|x| x * x * g.eval(-x).abs(), a);
    let tail_sup = right.max(left);
    Ok(TailMomentTerms {
        jump_term,
        tail_integral,
        tail_sup,
        total: jump_term + tail_integral + tail_sup,
        compact: false,
    })
}

/// `integral_{|x| >= a} x^2 dG` via integration by parts:
/// `a^2 (1 - G(a) + G(-a)) + 2 integral_a^inf x (1 - G(x) + G(-x)) dx`.
pub(crate) fn tail_second_moment<G: ComparisonFn + ?Sized>(g: &G, a: f64) -> Result<f64, EdgeworthError> {
    let boundary = a * a * ((1.0 - g.eval(a)) + g.eval_left(-a));
    let opts = QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-12,
        ..QuadOptions::default()
    };
    let tail = |x: f64| 2.0 * x * ((1.0 - g.eval(x)) + g.eval(-x));
    // jumps of G are kinks of the integrand; cover them with a finite panel set
    let breaks: Vec<f64> = g.jumps().into_iter().map(f64::abs).filter(|x| *x > a).collect();
    let edge = breaks.iter().copied().fold(a, f64::max);
    let mut total = integrate_to_inf(tail, edge, opts)?.value;
    if edge > a {
        total += integrate_with_breaks(tail, a, edge, &breaks, opts)?.value;
    }
    Ok(boundary + total)
}

/// `sup_{x >= a} h(x)` for a tail function decaying at infinity: grid scan on
/// `[a, a + 40]` followed by golden-section refinement of the best cell.
fn scan_sup<H: Fn(f64) -> f64>(h: H, a: f64) -> f64 {
    let step = 1e-2;
    let n = 4000;
    let mut best = (h(a), 0usize);
    for i in 1..=n {
        let v = h(a + i as f64 * step);
        if v > best.0 {
            best = (v, i);
        }
    }
    let lo = a + (best.1.saturating_sub(1)) as f64 * step;
    let hi = a + (best.1 + 1).min(n) as f64 * step;
    let (mut l, mut r) = (lo, hi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let m1 = r - g * (r - l);
        let m2 = l + g * (r - l);
        if h(m1) < h(m2) {
            l = m1;
        } else {
            r = m2;
        }
    }
    best.0.max(h(0.5 * (l + r)))
}

/// `integral |F(x) - G(x)| dx` with panel boundaries at atoms, jumps and
/// stationary points of `G`, and at every crossing of `F` by `G`.
pub fn w1_exact<G: ComparisonFn + ?Sized>(d: &DiscreteDist, g: &G) -> Result<f64, EdgeworthError> {
    let mut pts: Vec<f64> = d.positions().to_vec();
    pts.extend(g.jumps());
    pts.extend(g.stationary_points(f64::NEG_INFINITY, f64::INFINITY));
    pts.retain(|x| x.is_finite());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.is_empty() {
        return Err(EdgeworthError::Domain("empty distribution".into()));
    }
    let opts = QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-12,
        max_evals: 100_000,
    };
    let mut acc = crate::numeric::Compensated::new();
    let first = pts[0];
    let left = integrate_to_inf(|u| g.eval_left(first - u).abs(), 0.0, opts)?;
    acc.add(left.value);
    let last = *pts.last().unwrap();
    let right = integrate_to_inf(|u| (1.0 - g.eval(last + u)).abs(), 0.0, opts)?;
    acc.add(right.value);
    for w in pts.windows(2) {
        let (u, v) = (w[0], w[1]);
        let c = d.cdf(u);
        let h = |x: f64| c - g.eval(x);
        let (hu, hv) = (c - g.eval(u), c - g.eval_left(v));
        let mut breaks = Vec::new();
        if hu * hv < 0.0 {
            // G is monotone on (u, v): bisect the crossing
            let (mut l, mut r) = (u, v);
            for _ in 0..200 {
                let m = 0.5 * (l + r);
                if m <= l || m >= r {
                    break;
                }
                if h(m) * hu > 0.0 {
                    l = m;
                } else {
                    r = m;
                }
            }
            breaks.push(0.5 * (l + r));
        }
        let piece = integrate_with_breaks(|x| h(x).abs(), u, v, &breaks, opts)?;
        acc.add(piece.value);
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distkit::{bernoulli_pm, delta0, zn_dist};

    #[test]
    fn normal_values() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert_eq!(std_normal_pdf(0.0), 0.398_942_280_401_432_7);
        assert!((std_normal_cdf(-1.0) - 0.158_655_253_931_457_07).abs() < 1e-16);
        assert!((std_normal_sf(10.0) - 7.619_853_024_160_527e-24).abs() < 1e-36);
    }

    #[test]
    fn phi3_examples() {
        assert!((phi3_with(0.0, 0.1) - 0.539_894_228_040_143_3).abs() < 1e-15);
        for a in [0.0, 0.3, -2.0] {
            assert_eq!(phi3_with(1.0, a), std_normal_cdf(1.0));
            assert_eq!(phi3_with(-1.0, a), std_normal_cdf(-1.0));
        }
        let p = EdgeworthParams::new(0.0, 1.0, 4).unwrap();
        for i in -100..=100 {
            let x = i as f64 / 10.0;
            assert_eq!(phi3(x, &p), std_normal_cdf(x));
        }
    }

    #[test]
    fn stationary_points_examples() {
        assert!(cubic_stationary_points(0.0).is_empty());
        let r = cubic_stationary_points(1.0);
        let want = [-1.879_385_241_571_817, 0.347_296_355_333_860_7, 1.532_088_886_237_956];
        assert_eq!(r.len(), 3);
        for (x, w) in r.iter().zip(want) {
            assert!((x - w).abs() < 1e-13);
        }
        // a = 0.1 still has exactly one real root, on the far left
        let r = cubic_stationary_points(0.1);
        assert_eq!(r.len(), 1);
        let g = Edgeworth { a: 0.1 };
        assert!(g.derivative(r[0]).abs() < 1e-12);
        assert!(r[0] < -2.0);
        for a in [0.5, -0.5, 0.7, -3.0, 1e-4] {
            for x in cubic_stationary_points(a) {
                assert!(Edgeworth { a }.derivative(x).abs() < 1e-12, "a={a} x={x}");
            }
        }
    }

    #[test]
    fn fourier_examples() {
        let p = EdgeworthParams::new(0.5, 1.0, 9).unwrap();
        assert_eq!(phi3_fourier(0.0, &p), Complex64::new(1.0, 0.0));
        let t = 1.7;
        assert_eq!(phi3_fourier(-t, &p), phi3_fourier(t, &p).conj());
        assert!((phi3_fourier_with(1.0, 0.0).re - 0.606_530_659_712_633_4).abs() < 1e-15);
    }

    #[test]
    fn bound_arithmetic() {
        let n = nonuniform_bound(1.0, &TailEnvelope::NORMAL).unwrap();
        assert!((n - 13.0 * (std::f64::consts::E + 1.0).ln()).abs() < 1e-12);
        assert!((n - 17.072_401_937_736_895).abs() < 1e-12);
        let w = w1_bound(0.01, &TailEnvelope::NORMAL).unwrap();
        assert!((w - 0.3448).abs() < 1e-4);
        assert!((w1_bound_compact(1.0, 0.1).unwrap() - 1.256_637_061_435_917).abs() < 1e-14);
        assert_eq!(cf_deviation_bound(0.0, 0.5).unwrap(), 0.0);
        assert!((cf_deviation_bound(1.0, 0.1).unwrap() - 3.859_153_044_726_009).abs() < 1e-12);
        assert!(nonuniform_bound(0.0, &TailEnvelope::NORMAL).is_err());
        assert!(TailEnvelope::new(0.4, 1.0).is_err());
        let mut prev = f64::INFINITY;
        for k in 1..40 {
            let v = w1_bound(2f64.powi(-k), &TailEnvelope::NORMAL).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn fs_transform_examples() {
        let b = bernoulli_pm(1.0).unwrap();
        assert_eq!(fs_transform(&b, 0.0), Complex64::new(1.0, 0.0));
        for t in [0.3, 2.0, 17.5] {
            let v = fs_transform(&b, t);
            assert!((v.re - t.cos()).abs() < 1e-15 && v.im.abs() < 1e-15);
        }
    }

    #[test]
    fn tail_moment_closed_form() {
        let z = zn_dist(&bernoulli_pm(1.0).unwrap(), 4).unwrap();
        let t = tail_moment_bound(&z, &Normal, 3.0, 0.1).unwrap();
        let a = 3.0;
        let want = 2.0 * (a * std_normal_pdf(a) + std_normal_sf(a));
        assert!((t.tail_integral - want).abs() < 1e-12);
        assert!((t.jump_term - 3.6).abs() < 1e-15);
        // sup of x^2 (1 - Phi(x)) over x >= 3 sits at the left end
        assert!((t.tail_sup - 9.0 * std_normal_sf(3.0)).abs() < 1e-15);
        let off = DiscreteDist::from_atoms(vec![(-2.0, 0.5), (2.0, 0.5)]).unwrap();
        assert!(matches!(
            tail_moment_bound(&off, &Normal, 1.0, 0.1),
            Err(EdgeworthError::MomentMismatch { .. })
        ));
        let compact = bernoulli_pm(1.0).unwrap();
        let c = tail_moment_bound(&compact, &compact, 1.0, 0.25).unwrap();
        assert!(c.compact);
        assert_eq!(c.total, 1.0);
    }

    #[test]
    fn tail_moment_closed_form_matches_quadrature() {
        for a in [0.5, 1.0, 2.0, 3.5] {
            for g in [Edgeworth { a: 0.0 }, Edgeworth { a: 0.05 }, Edgeworth { a: -0.1 }] {
                let q = tail_second_moment(&g, a).unwrap();
                let c = g.tail_second_moment(a).unwrap();
                assert!((q - c).abs() < 1e-11, "a={a} {q} {c}");
            }
        }
    }

    #[test]
    fn w1_examples() {
        let b = bernoulli_pm(1.0).unwrap();
        assert_eq!(w1_exact(&b, &b).unwrap(), 0.0);
        let d = delta0();
        assert_eq!(w1_exact(&d, &d).unwrap(), 0.0);
        let c = DiscreteDist::from_atoms(vec![(-2.0, 0.5), (2.0, 0.5)]).unwrap();
        assert!((w1_exact(&c, &b).unwrap() - 1.0).abs() < 1e-14);
    }
}
