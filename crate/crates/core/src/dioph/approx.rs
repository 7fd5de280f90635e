//! Distance to the nearest integer and finite-horizon approximation scans.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use super::{dyadic_to_f64, AlphaSpec, DiophError};

/// Certified `||n alpha||`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntDist {
    /// `||n alpha||`, in `[0, 1/2]`.
    pub value: f64,
    /// Certified bound on `| value - ||n alpha|| |`, below `2^-40`.
    pub error_bound: f64,
    /// The nearest integer to `n alpha` (ties resolve downwards).
    pub nearest: BigInt,
}

/// Certified reduction of `n alpha` modulo 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduced {
    pub floor: BigInt,
    /// Fractional part `{n alpha}` in `[0, 1)`.
    pub frac: f64,
    pub dist: IntDist,
}

/// Reusable evaluator of `n alpha mod 1` that keeps its bit budget across
/// queries so that scans over consecutive `n` avoid repeated doubling.
pub struct FracScanner<'a> {
    alpha: &'a AlphaSpec,
    bits: u32,
    approx: Option<BigInt>,
}

const CERT_BITS: u32 = 40;

impl<'a> FracScanner<'a> {
    pub fn new(alpha: &'a AlphaSpec) -> Self {
        FracScanner {
            alpha,
            bits: 0,
            approx: None,
        }
    }

    /// `||n alpha||` with its nearest integer determined unambiguously.
    pub fn dist(&mut self, n: &BigInt) -> Result<IntDist, DiophError> {
        Ok(self.reduce(n, true)?.dist)
    }

    pub fn dist_u64(&mut self, n: u64) -> Result<IntDist, DiophError> {
        self.dist(&BigInt::from(n))
    }

    /// `{n alpha}` certified away from the wrap point at 0.
    pub fn frac_u64(&mut self, n: u64) -> Result<f64, DiophError> {
        Ok(self.reduce(&BigInt::from(n), false)?.frac)
    }

    /// Reduce `n alpha`. With `half_sep`, also certify the side of the
    /// half-integer tie point.
    pub fn reduce(&mut self, n: &BigInt, half_sep: bool) -> Result<Reduced, DiophError> {
        if let Some(r) = self.alpha.exact_rational() {
            let x = r * n;
            let floor = x.floor().to_integer();
            let frac = &x - x.floor();
            let half = num_rational::BigRational::new(BigInt::one(), BigInt::from(2));
            let (nearest, d) = if frac <= half {
                (floor.clone(), frac.clone())
            } else {
                (&floor + 1, num_rational::BigRational::one() - &frac)
            };
            let value = ratio_f64(&d);
            let fv = ratio_f64(&frac);
            return Ok(Reduced {
                floor,
                frac: fv,
                dist: IntDist {
                    value,
                    error_bound: value * f64::EPSILON,
                    nearest,
                },
            });
        }
        let cap = self.alpha.precision_cap();
        let limit = self.alpha.max_bits();
        let n_abs = n.abs();
        let want = (n_abs.bits() as u32 + 2 * CERT_BITS + 8).max(64);
        if self.bits < want {
            self.bits = want.next_power_of_two().min(cap);
            self.approx = None;
        }
        loop {
            let bits = match limit {
                Some(l) => self.bits.min(l),
                None => self.bits,
            };
            if self.approx.is_none() || bits != self.bits {
                self.approx = Some(self.alpha.approx(bits)?);
            }
            let approx = self.approx.as_ref().unwrap();
            let x = n * approx;
            let one = BigInt::one() << bits as usize;
            let (floor, rem) = x.div_mod_floor(&one);
            let half = BigInt::one() << (bits as usize).saturating_sub(1);
            let (nearest, dnum) = if rem <= half {
                (floor.clone(), rem.clone())
            } else {
                (&floor + 1, &one - &rem)
            };
            // |n alpha - x / 2^bits| < |n| / 2^bits
            let small_err = (&n_abs << CERT_BITS as usize) < one;
            let off_int = dnum > n_abs;
            let off_half = !half_sep || (&half - &dnum) > n_abs;
            if small_err && off_int && off_half {
                return Ok(Reduced {
                    floor,
                    frac: dyadic_to_f64(&rem, bits),
                    dist: IntDist {
                        value: dyadic_to_f64(&dnum, bits),
                        error_bound: dyadic_to_f64(&n_abs, bits),
                        nearest,
                    },
                });
            }
            let exhausted = limit.is_some_and(|l| bits >= l) || self.bits >= cap;
            if exhausted {
                let what = if !small_err {
                    "error bound above 2^-40"
                } else if !off_int {
                    "cannot separate n*alpha from an integer"
                } else {
                    "cannot separate n*alpha from a half-integer"
                };
                return Err(DiophError::PrecisionExhausted {
                    bits,
                    context: format!("n = {n}: {what}"),
                });
            }
            self.bits = (self.bits * 2).min(cap);
            self.approx = None;
        }
    }
}

fn ratio_f64(r: &num_rational::BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `||n alpha||` with a certified error bound below `2^-40`.
pub fn nearest_int_dist(alpha: &AlphaSpec, n: &BigInt) -> Result<IntDist, DiophError> {
    if !n.is_positive() {
        return Err(DiophError::Domain("n must be at least 1".into()));
    }
    FracScanner::new(alpha).dist(n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub n: u64,
    pub dist: f64,
    /// `n^eta_hat * ||n alpha||`
    pub scaled: f64,
}

/// Finite-horizon irrationality-type proxy.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeEstimate {
    /// `max log(1/(2 ||n alpha||)) / log n` over the window; `+inf` when degenerate.
    pub eta_hat: f64,
    /// Running-maximum chain, increasing in `n`; the last entry attains `eta_hat`.
    pub witnesses: Vec<Witness>,
    /// First `n` of the scanned window.
    pub n_min: u64,
    pub n_max: u64,
    /// Smallest `n <= n_max` with `||n alpha|| = 0`, if any.
    pub degenerate: Option<u64>,
}

impl TypeEstimate {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate.is_some()
    }
}

/// Start of the type-estimate window for horizon `n_max`.
pub fn type_window_start(n_max: u64) -> u64 {
    let mut s = (n_max as f64).sqrt().ceil() as u64;
    while s > 1 && (s - 1) * (s - 1) >= n_max {
        s -= 1;
    }
    s.max(2)
}

/// Empirical type of `alpha` on `[ceil(sqrt n_max), n_max]`.
///
/// Small `n` are excluded because the ratio `log(1/(2||n alpha||)) / log n`
/// is dominated by the constant at the start of the range and would pin the
/// maximum there. Exact hits `||n alpha|| = 0` are searched for over `1..=n_max`.
pub fn type_estimate(alpha: &AlphaSpec, n_max: u64) -> Result<TypeEstimate, DiophError> {
    if n_max < 2 {
        return Err(DiophError::Domain("n_max must be at least 2".into()));
    }
    let n_min = type_window_start(n_max);
    if let Some(r) = alpha.exact_rational() {
        let q = r.denom().to_u64();
        if let Some(q) = q.filter(|q| *q <= n_max) {
            return Ok(TypeEstimate {
                eta_hat: f64::INFINITY,
                witnesses: vec![Witness {
                    n: q,
                    dist: 0.0,
                    scaled: 0.0,
                }],
                n_min,
                n_max,
                degenerate: Some(q),
            });
        }
    }
    let mut scanner = FracScanner::new(alpha);
    let mut chain: Vec<(u64, f64, f64)> = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for n in n_min..=n_max {
        let d = scanner.dist_u64(n)?.value;
        let eta = (1.0 / (2.0 * d)).ln() / (n as f64).ln();
        if eta > best {
            best = eta;
            chain.push((n, d, eta));
        }
    }
    let witnesses = chain
        .into_iter()
        .map(|(n, d, _)| Witness {
            n,
            dist: d,
            scaled: (n as f64).powf(best) * d,
        })
        .collect();
    Ok(TypeEstimate {
        eta_hat: best,
        witnesses,
        n_min,
        n_max,
        degenerate: None,
    })
}

/// `eps(n) = max_k ||n alpha_k||` for `n = 1..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsProfile {
    pub eps: Vec<f64>,
    pub error_bound: Vec<f64>,
}

impl EpsProfile {
    /// `eps(n)` for `n >= 1`.
    pub fn at(&self, n: usize) -> f64 {
        self.eps[n - 1]
    }

    /// `n^eta (log(n + 1))^eta_log eps(n)`; the shifted logarithm keeps `n = 1`
    /// finite and positive.
    pub fn diagnostic(&self, eta: f64, eta_log: f64) -> Vec<f64> {
        self.eps
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let n = (i + 1) as f64;
                n.powf(eta) * (n + 1.0).ln().powf(eta_log) * e
            })
            .collect()
    }
}

pub fn eps_profile(alphas: &[AlphaSpec], n_max: u64) -> Result<EpsProfile, DiophError> {
    if alphas.is_empty() {
        return Err(DiophError::Domain("alpha list is empty".into()));
    }
    let len = usize::try_from(n_max).map_err(|_| DiophError::Domain("n_max too large".into()))?;
    let mut eps = vec![0.0f64; len];
    let mut err = vec![0.0f64; len];
    for a in alphas {
        let mut scanner = FracScanner::new(a);
        for n in 1..=n_max {
            let d = scanner.dist_u64(n)?;
            let i = (n - 1) as usize;
            if d.value > eps[i] {
                eps[i] = d.value;
                err[i] = d.error_bound;
            }
        }
    }
    Ok(EpsProfile { eps, error_bound: err })
}

type PsiFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// A positive weight function `psi(n)` on the positive integers.
#[derive(Clone)]
pub struct KhinchinePsi {
    f: PsiFn,
    pub non_increasing: bool,
    pub description: String,
}

impl fmt::Debug for KhinchinePsi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KhinchinePsi({})", self.description)
    }
}

impl KhinchinePsi {
    pub fn new<F>(description: &str, non_increasing: bool, f: F) -> Self
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        KhinchinePsi {
            f: Arc::new(f),
            non_increasing,
            description: description.to_string(),
        }
    }

    /// `psi(n) = c`.
    pub fn constant(c: f64) -> Self {
        Self::new(&format!("{c}"), true, move |_| c)
    }

    /// `psi(n) = 1 / (n log^(1+eps)(n + 1))`.
    pub fn log_power(eps: f64) -> Self {
        Self::new(&format!("1/(n log^(1+{eps})(n+1))"), true, move |n| {
            let n = n as f64;
            1.0 / (n * (n + 1.0).ln().powf(1.0 + eps))
        })
    }

    pub fn eval(&self, n: u64) -> f64 {
        (self.f)(n)
    }

    /// Check positivity (and monotonicity when flagged) on `1..=n_max`.
    pub fn validate(&self, n_max: u64) -> Result<(), DiophError> {
        let mut prev = f64::INFINITY;
        for n in 1..=n_max {
            let v = self.eval(n);
            if !(v > 0.0) || !v.is_finite() {
                return Err(DiophError::Domain(format!(
                    "psi({n}) = {v} is not a positive finite number"
                )));
            }
            if self.non_increasing && v > prev {
                return Err(DiophError::Domain(format!(
                    "psi is flagged non-increasing but psi({n}) > psi({})",
                    n - 1
                )));
            }
            prev = v;
        }
        Ok(())
    }
}

/// Partial infimum of `||n alpha|| / psi(n)` over `1..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct KhinchineInf {
    pub value: f64,
    pub argmin: u64,
    pub n_max: u64,
}

pub fn khinchine_r(alpha: &AlphaSpec, psi: &KhinchinePsi, n_max: u64) -> Result<KhinchineInf, DiophError> {
    if n_max < 1 {
        return Err(DiophError::Domain("n_max must be at least 1".into()));
    }
    psi.validate(n_max)?;
    let mut scanner = FracScanner::new(alpha);
    let mut best = KhinchineInf {
        value: f64::INFINITY,
        argmin: 1,
        n_max,
    };
    for n in 1..=n_max {
        let d = scanner.dist_u64(n)?.value;
        let v = d / psi.eval(n);
        if v < best.value {
            best.value = v;
            best.argmin = n;
            if v == 0.0 {
                break;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dioph::{cf_expand, convergents};

    #[test]
    fn spec_values() {
        let r = AlphaSpec::rational(9, 4).unwrap();
        let d = nearest_int_dist(&r, &BigInt::from(1)).unwrap();
        assert_eq!(d.value, 0.25);
        assert_eq!(d.nearest, BigInt::from(2));
        let s2 = AlphaSpec::sqrt(2).unwrap();
        let d = nearest_int_dist(&s2, &BigInt::from(12)).unwrap();
        // 17 - 12 sqrt 2
        assert!((d.value - 0.029_437_251_522_859_43).abs() < 1e-15);
        assert_eq!(d.nearest, BigInt::from(17));
        assert!(d.error_bound < 2f64.powi(-40));
    }

    #[test]
    fn tie_resolves_down() {
        let r = AlphaSpec::rational(1, 2).unwrap();
        let d = nearest_int_dist(&r, &BigInt::from(3)).unwrap();
        assert_eq!(d.value, 0.5);
        assert_eq!(d.nearest, BigInt::from(1));
    }

    #[test]
    fn convergent_distances_decrease() {
        let s2 = AlphaSpec::sqrt(2).unwrap();
        let cf = cf_expand(&s2, 30).unwrap();
        let conv = convergents(&cf, 29).unwrap();
        let mut prev = f64::INFINITY;
        for w in conv.windows(2) {
            let d = nearest_int_dist(&s2, &w[0].q).unwrap();
            assert_eq!(d.nearest, w[0].p);
            assert!(d.value < prev);
            let q_next = w[1].q.to_f64().unwrap();
            assert!(d.value < 1.0 / q_next);
            prev = d.value;
        }
    }

    #[test]
    fn huge_n_needs_more_bits() {
        let s2 = AlphaSpec::sqrt(2).unwrap();
        let n: BigInt = num_traits::pow(BigInt::from(10), 300);
        let d = nearest_int_dist(&s2, &n).unwrap();
        assert!(d.value > 0.0 && d.value <= 0.5);
        let capped = AlphaSpec::sqrt(2).unwrap().with_precision_cap(512);
        assert!(matches!(
            nearest_int_dist(&capped, &n),
            Err(DiophError::PrecisionExhausted { .. })
        ));
    }

    #[test]
    fn decimal_runs_out() {
        let d = AlphaSpec::decimal("0.3333").unwrap();
        assert!(nearest_int_dist(&d, &BigInt::from(1)).is_err());
        let long = AlphaSpec::decimal("0.33333333333333333333333333").unwrap();
        let r = nearest_int_dist(&long, &BigInt::from(7)).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-12);
        // 3 * 0.333... sits within the digit interval of 1
        assert!(nearest_int_dist(&long, &BigInt::from(3)).is_err());
    }

    #[test]
    fn eps_profile_values() {
        let s2 = AlphaSpec::sqrt(2).unwrap();
        let s3 = AlphaSpec::sqrt(3).unwrap();
        let p = eps_profile(std::slice::from_ref(&s2), 3).unwrap();
        let want = [0.414_213_562_373_095, 0.171_572_875_253_810, 0.242_640_687_119_285];
        for (a, b) in p.eps.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
        let p = eps_profile(&[s2, s3], 2).unwrap();
        assert!((p.eps[0] - 0.414_213_562_373_095).abs() < 1e-14);
        assert!((p.eps[1] - 0.464_101_615_137_754_6).abs() < 1e-14);
        let h = eps_profile(&[AlphaSpec::rational(1, 2).unwrap()], 2).unwrap();
        assert_eq!(h.at(2), 0.0);
    }

    #[test]
    fn type_estimate_sqrt2() {
        let t = type_estimate(&AlphaSpec::sqrt(2).unwrap(), 10_000).unwrap();
        assert!(t.eta_hat >= 1.0 && t.eta_hat <= 1.15, "{}", t.eta_hat);
        assert!(t.witnesses.iter().all(|w| w.n >= t.n_min && w.n <= 10_000));
        assert!(t.witnesses.iter().all(|w| w.dist > 0.0 && w.dist <= 0.5));
        let last = t.witnesses.last().unwrap();
        assert!((last.scaled - 0.5).abs() < 1e-9);
        let r = type_estimate(&AlphaSpec::rational(3, 7).unwrap(), 100).unwrap();
        assert_eq!(r.degenerate, Some(7));
    }

    #[test]
    fn khinchine() {
        let s2 = AlphaSpec::sqrt(2).unwrap();
        let one = khinchine_r(&s2, &KhinchinePsi::constant(1.0), 1).unwrap();
        assert!((one.value - 0.414_213_562_373_095).abs() < 1e-14);
        let k = khinchine_r(&s2, &KhinchinePsi::log_power(0.5), 1000).unwrap();
        assert!(k.value > 0.0);
        let denominators = [1u64, 2, 5, 12, 29, 70, 169, 408, 985];
        assert!(denominators.contains(&k.argmin), "argmin {}", k.argmin);
        let r = khinchine_r(&AlphaSpec::rational(2, 5).unwrap(), &KhinchinePsi::log_power(0.5), 10).unwrap();
        assert_eq!(r.value, 0.0);
        let bad = KhinchinePsi::new("n", true, |n| n as f64);
        assert!(khinchine_r(&s2, &bad, 5).is_err());
    }

    #[test]
    fn window_start() {
        assert_eq!(type_window_start(2), 2);
        assert_eq!(type_window_start(100), 10);
        assert_eq!(type_window_start(101), 11);
        assert_eq!(type_window_start(10_000), 100);
    }
}
