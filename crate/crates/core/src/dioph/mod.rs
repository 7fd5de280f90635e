//! Certified-precision Diophantine toolkit.
//!
//! Every real number enters through an [`AlphaSpec`], which combines a
//! representation (quadratic surd, continued fraction, decimal prefix or exact
//! rational) with a precision oracle: for any bit budget `B` it yields an
//! integer `N` such that `|alpha - N / 2^B| < 2^-B`. All distance-to-integer
//! queries are computed in exact integer arithmetic on top of that oracle, and
//! the budget is doubled until the answer is certified or the cap is reached.

mod approx;
mod cf;

pub use approx::{
    eps_profile, khinchine_r, nearest_int_dist, type_estimate, EpsProfile, FracScanner, IntDist, KhinchineInf,
    KhinchinePsi, TypeEstimate, Witness,
};
pub use cf::{cf_expand, convergents, ContinuedFraction, Period};

use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Default ceiling on the oracle bit budget.
pub const DEFAULT_PRECISION_CAP: u32 = 4096;

/// Environment variable that overrides [`DEFAULT_PRECISION_CAP`] in the CLI.
pub const PRECISION_ENV: &str = "CLT_DIOPH_PRECISION_BITS";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiophError {
    #[error("cannot parse alpha `{input}`: {reason}")]
    Parse { input: String, reason: String },
    #[error("invalid alpha: {0}")]
    Invalid(String),
    #[error("precision exhausted at {bits} bits: {context}")]
    PrecisionExhausted { bits: u32, context: String },
    #[error("precision exhausted: digit budget certifies only {certified} partial quotients")]
    CfPrecisionExhausted { certified: usize },
    #[error("index {index} out of range: {available} partial quotients available")]
    IndexOutOfRange { index: usize, available: usize },
    #[error("domain error: {0}")]
    Domain(String),
}

impl DiophError {
    pub fn is_precision(&self) -> bool {
        matches!(
            self,
            DiophError::PrecisionExhausted { .. } | DiophError::CfPrecisionExhausted { .. }
        )
    }
}

type QuotientFn = Arc<dyn Fn(usize) -> BigInt + Send + Sync>;
type QuotientSource<'a> = (BigInt, Box<dyn Fn(usize) -> BigInt + 'a>);

#[derive(Clone)]
enum Repr {
    /// `(a + b*sqrt(d)) / c`
    Surd {
        a: BigInt,
        b: BigInt,
        c: BigInt,
        d: BigInt,
    },
    /// `[a0; prefix..., (period)...]`; an empty period means a finite expansion.
    Cf {
        a0: BigInt,
        prefix: Vec<BigInt>,
        period: Vec<BigInt>,
    },
    /// Infinite expansion given by a generator for `a_i`, `i >= 1`.
    Generated {
        a0: BigInt,
        quotient: QuotientFn,
        label: String,
    },
    /// Decimal prefix: the value lies in `[lower / 10^digits, (lower + 1) / 10^digits]`.
    Decimal {
        text: String,
        lower: BigInt,
        digits: u32,
    },
    Rational(BigRational),
}

/// A real number with certified-precision access.
#[derive(Clone)]
pub struct AlphaSpec {
    repr: Repr,
    exact: Option<BigRational>,
    cap: u32,
    cache: Arc<RwLock<Option<(u32, BigInt)>>>,
}

impl AlphaSpec {
    fn from_repr(repr: Repr) -> Self {
        let exact = match &repr {
            Repr::Rational(r) => Some(r.clone()),
            Repr::Surd { a, b, c, d } if b.is_zero() || d.is_zero() => Some(BigRational::new(a.clone(), c.clone())),
            Repr::Cf { a0, prefix, period } if period.is_empty() => Some(finite_cf_value(a0, prefix)),
            _ => None,
        };
        AlphaSpec {
            repr,
            exact,
            cap: DEFAULT_PRECISION_CAP,
            cache: Arc::new(RwLock::new(None)),
        }
    }

    /// `(a + b*sqrt(d)) / c`.
    pub fn surd(a: i64, b: i64, c: i64, d: i64) -> Result<Self, DiophError> {
        Self::surd_big(a.into(), b.into(), c.into(), d.into())
    }

    pub fn surd_big(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Result<Self, DiophError> {
        if c.is_zero() {
            return Err(DiophError::Invalid("surd denominator c is zero".into()));
        }
        if d.is_negative() {
            return Err(DiophError::Invalid("surd radicand d is negative".into()));
        }
        if !b.is_zero() && !d.is_zero() {
            let r = d.sqrt();
            if &r * &r == d {
                return Err(DiophError::Invalid(format!(
                    "surd radicand {d} is a perfect square; use rat: instead"
                )));
            }
        }
        Ok(Self::from_repr(Repr::Surd { a, b, c, d }))
    }

    /// `sqrt(d)` for a non-square `d`.
    pub fn sqrt(d: i64) -> Result<Self, DiophError> {
        Self::surd(0, 1, 1, d)
    }

    /// The golden ratio `(1 + sqrt 5) / 2`.
    pub fn golden() -> Self {
        Self::surd(1, 1, 2, 5).expect("valid surd")
    }

    pub fn rational(p: i64, q: i64) -> Result<Self, DiophError> {
        if q == 0 {
            return Err(DiophError::Invalid("zero denominator".into()));
        }
        Ok(Self::from_repr(Repr::Rational(BigRational::new(p.into(), q.into()))))
    }

    pub fn from_ratio(r: BigRational) -> Self {
        Self::from_repr(Repr::Rational(r))
    }

    /// Continued fraction `[a0; prefix, period, period, ...]`. An empty `period`
    /// gives the finite (rational) expansion.
    pub fn continued_fraction(a0: BigInt, prefix: Vec<BigInt>, period: Vec<BigInt>) -> Result<Self, DiophError> {
        if prefix.iter().chain(period.iter()).any(|a| !a.is_positive()) {
            return Err(DiophError::Invalid(
                "partial quotients a1, a2, ... must be positive".into(),
            ));
        }
        Ok(Self::from_repr(Repr::Cf { a0, prefix, period }))
    }

    /// Infinite continued fraction whose partial quotient `a_i` (`i >= 1`) is
    /// `quotient(i)`. The generator must return positive integers.
    pub fn generated<F>(a0: BigInt, label: &str, quotient: F) -> Self
    where
        F: Fn(usize) -> BigInt + Send + Sync + 'static,
    {
        Self::from_repr(Repr::Generated {
            a0,
            quotient: Arc::new(quotient),
            label: label.to_string(),
        })
    }

    /// A decimal digit string, read as the prefix of an otherwise unknown real.
    pub fn decimal(text: &str) -> Result<Self, DiophError> {
        let perr = |reason: &str| DiophError::Parse {
            input: format!("dec:{text}"),
            reason: reason.into(),
        };
        let (neg, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(perr("empty digit string"));
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(perr("expected decimal digits"));
        }
        let digits = u32::try_from(frac_part.len()).map_err(|_| perr("too many digits"))?;
        let joined = format!("{int_part}{frac_part}");
        let magnitude: BigInt = if joined.is_empty() {
            BigInt::zero()
        } else {
            joined.parse().map_err(|_| perr("expected decimal digits"))?
        };
        let lower = if neg { -magnitude - 1 } else { magnitude };
        Ok(Self::from_repr(Repr::Decimal {
            text: text.to_string(),
            lower,
            digits,
        }))
    }

    /// Parse the text grammar `surd:a,b,c,d`, `cf:a0;a1,...[,periodic:b1,...]`,
    /// `dec:<digits>` or `rat:p/q`.
    pub fn parse(input: &str) -> Result<Self, DiophError> {
        let input = input.trim();
        let perr = |reason: &str| DiophError::Parse {
            input: input.to_string(),
            reason: reason.into(),
        };
        let (kind, body) = input
            .split_once(':')
            .ok_or_else(|| perr("missing kind prefix (surd:, cf:, dec:, rat:)"))?;
        match kind {
            "surd" => {
                let parts: Vec<&str> = body.split(',').collect();
                if parts.len() != 4 {
                    return Err(perr("surd needs exactly four integers a,b,c,d"));
                }
                let mut v = Vec::with_capacity(4);
                for p in parts {
                    v.push(parse_int(p.trim()).ok_or_else(|| perr("surd fields must be integers"))?);
                }
                let d = v.pop().unwrap();
                let c = v.pop().unwrap();
                let b = v.pop().unwrap();
                let a = v.pop().unwrap();
                Self::surd_big(a, b, c, d).map_err(|e| perr(&e.to_string()))
            }
            "cf" => {
                let (a0s, rest) = match body.split_once(';') {
                    Some((a, r)) => (a, Some(r)),
                    None => (body, None),
                };
                let a0 = parse_int(a0s.trim()).ok_or_else(|| perr("a0 must be an integer"))?;
                let (pre, per) = match rest {
                    None => ("", None),
                    Some(r) => match r.split_once("periodic:") {
                        Some((p, q)) => (p, Some(q)),
                        None => (r, None),
                    },
                };
                let prefix = parse_quotients(pre.trim().trim_end_matches(',').trim_end_matches(';'))
                    .ok_or_else(|| perr("partial quotients must be integers"))?;
                let period = match per {
                    Some(p) => {
                        let v = parse_quotients(p.trim()).ok_or_else(|| perr("periodic quotients must be integers"))?;
                        if v.is_empty() {
                            return Err(perr("empty periodic block"));
                        }
                        v
                    }
                    None => Vec::new(),
                };
                Self::continued_fraction(a0, prefix, period).map_err(|e| perr(&e.to_string()))
            }
            "dec" => Self::decimal(body.trim()),
            "rat" => {
                let (p, q) = body.split_once('/').unwrap_or((body, "1"));
                let p = parse_int(p.trim()).ok_or_else(|| perr("numerator must be an integer"))?;
                let q = parse_int(q.trim()).ok_or_else(|| perr("denominator must be an integer"))?;
                if q.is_zero() {
                    return Err(perr("zero denominator"));
                }
                Ok(Self::from_ratio(BigRational::new(p, q)))
            }
            _ => Err(perr("unknown kind (expected surd, cf, dec or rat)")),
        }
    }

    /// Same value with a different precision cap.
    pub fn with_precision_cap(mut self, bits: u32) -> Self {
        self.cap = bits.max(64);
        self
    }

    pub fn precision_cap(&self) -> u32 {
        self.cap
    }

    /// `Some(r)` when the value is known exactly as a rational.
    pub fn exact_rational(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn is_decimal(&self) -> bool {
        matches!(self.repr, Repr::Decimal { .. })
    }

    /// Largest bit budget the representation can certify, if limited.
    pub fn max_bits(&self) -> Option<u32> {
        match &self.repr {
            Repr::Decimal { digits, .. } => {
                if *digits == 0 {
                    return Some(0);
                }
                let ten_pow = num_traits::pow(BigInt::from(10u32), *digits as usize);
                // largest B with 2^B < 10^digits
                Some((ten_pow.bits() - 1) as u32)
            }
            _ => None,
        }
    }

    /// Integer `N` with `|alpha - N / 2^bits| < 2^-bits`.
    pub fn approx(&self, bits: u32) -> Result<BigInt, DiophError> {
        if let Some(r) = &self.exact {
            return Ok(round_div(&(r.numer() << bits as usize), r.denom()));
        }
        if let Some(max) = self.max_bits() {
            if bits > max {
                return Err(DiophError::PrecisionExhausted {
                    bits,
                    context: format!("decimal digit budget certifies at most {max} bits"),
                });
            }
        }
        if let Some((cb, cn)) = self.cache.read().expect("oracle cache poisoned").as_ref() {
            if *cb == bits {
                return Ok(cn.clone());
            }
            if *cb > bits {
                let shift = (*cb - bits) as usize;
                return Ok(round_div(cn, &(BigInt::one() << shift)));
            }
        }
        let n = self.compute_approx(bits);
        let mut guard = self.cache.write().expect("oracle cache poisoned");
        if guard.as_ref().is_none_or(|(cb, _)| *cb < bits) {
            *guard = Some((bits, n.clone()));
        }
        Ok(n)
    }

    fn compute_approx(&self, bits: u32) -> BigInt {
        let b = bits as usize;
        match &self.repr {
            Repr::Surd { a, b: sb, c, d } => {
                // |sb| sqrt(d) 2^(B+2) in [s, s+1)
                let rad: BigInt = (sb * sb * d) << (2 * (b + 2));
                let s = rad.sqrt();
                let y: BigInt = if sb.is_negative() {
                    (a << (b + 2)) - s
                } else {
                    (a << (b + 2)) + s
                };
                round_div(&y, &(c * 4))
            }
            Repr::Cf { a0, prefix, period } => {
                let prefix = prefix.clone();
                let period = period.clone();
                cf_dyadic(a0, bits, move |i| periodic_quotient(&prefix, &period, i))
            }
            Repr::Generated { a0, quotient, .. } => cf_dyadic(a0, bits, |i| quotient(i)),
            Repr::Decimal { lower, digits, .. } => {
                let ten_pow = num_traits::pow(BigInt::from(10u32), *digits as usize);
                // midpoint (2 lower + 1) / (2 * 10^digits)
                round_div(&((lower * 2 + 1) << b), &(ten_pow * 2))
            }
            Repr::Rational(_) => unreachable!("rationals take the exact path"),
        }
    }

    /// Nearest double (error below 2^-60 relative to the oracle bound).
    pub fn to_f64(&self) -> f64 {
        let bits = self.max_bits().map_or(128, |m| m.min(128));
        match self.approx(bits) {
            Ok(n) => dyadic_to_f64(&n, bits),
            Err(_) => f64::NAN,
        }
    }

    /// Double-double `(hi, lo)` with `hi + lo` within about 2^-120 of the value.
    pub fn to_dd(&self) -> (f64, f64) {
        let bits = self.max_bits().map_or(160, |m| m.min(160));
        let n = match self.approx(bits) {
            Ok(n) => n,
            Err(_) => return (f64::NAN, 0.0),
        };
        let hi = dyadic_to_f64(&n, bits);
        let rest = n - f64_to_scaled_int(hi, bits);
        (hi, dyadic_to_f64(&rest, bits))
    }

    /// Exact sign of `c0 + sum_k coeffs[k] * alphas[k]`, certified with the oracle.
    pub fn lattice_sign(c0: i64, coeffs: &[i64], alphas: &[AlphaSpec]) -> Result<std::cmp::Ordering, DiophError> {
        use std::cmp::Ordering;
        debug_assert_eq!(coeffs.len(), alphas.len());
        if alphas
            .iter()
            .zip(coeffs)
            .all(|(a, c)| *c == 0 || a.exact_rational().is_some())
        {
            let mut acc = BigRational::from_integer(c0.into());
            for (a, c) in alphas.iter().zip(coeffs) {
                if *c != 0 {
                    acc += a.exact_rational().unwrap() * BigInt::from(*c);
                }
            }
            return Ok(acc.numer().sign().cmp_zero());
        }
        let cap = alphas.iter().map(|a| a.cap).min().unwrap_or(DEFAULT_PRECISION_CAP);
        let limit = alphas.iter().filter_map(|a| a.max_bits()).min();
        let weight: i64 = coeffs.iter().map(|c| c.abs()).sum();
        let mut bits = 64u32;
        loop {
            let use_bits = match limit {
                Some(l) => bits.min(l),
                None => bits,
            };
            let mut acc = BigInt::from(c0) << use_bits as usize;
            for (a, c) in alphas.iter().zip(coeffs) {
                if *c != 0 {
                    acc += a.approx(use_bits)? * BigInt::from(*c);
                }
            }
            // error < weight * 2^-bits in units of 2^-bits
            if acc.abs() > BigInt::from(weight) {
                return Ok(if acc.is_positive() {
                    Ordering::Greater
                } else {
                    Ordering::Less
                });
            }
            let exhausted = limit.is_some_and(|l| use_bits >= l) || bits >= cap;
            if exhausted {
                return Err(DiophError::PrecisionExhausted {
                    bits: use_bits,
                    context: "cannot order lattice points".into(),
                });
            }
            bits = (bits * 2).min(cap);
        }
    }

    fn quotient_source(&self) -> Option<QuotientSource<'_>> {
        match &self.repr {
            Repr::Cf { a0, prefix, period } if !period.is_empty() => {
                Some((a0.clone(), Box::new(move |i| periodic_quotient(prefix, period, i))))
            }
            Repr::Generated { a0, quotient, .. } => Some((a0.clone(), Box::new(move |i| quotient(i)))),
            _ => None,
        }
    }
}

trait SignExt {
    fn cmp_zero(self) -> std::cmp::Ordering;
}

impl SignExt for num_bigint::Sign {
    fn cmp_zero(self) -> std::cmp::Ordering {
        match self {
            num_bigint::Sign::Minus => std::cmp::Ordering::Less,
            num_bigint::Sign::NoSign => std::cmp::Ordering::Equal,
            num_bigint::Sign::Plus => std::cmp::Ordering::Greater,
        }
    }
}

impl fmt::Display for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Surd { a, b, c, d } => write!(f, "surd:{a},{b},{c},{d}"),
            Repr::Cf { a0, prefix, period } => {
                write!(f, "cf:{a0}")?;
                if prefix.is_empty() && period.is_empty() {
                    return Ok(());
                }
                f.write_str(";")?;
                let pre: Vec<String> = prefix.iter().map(|a| a.to_string()).collect();
                f.write_str(&pre.join(","))?;
                if !period.is_empty() {
                    if !prefix.is_empty() {
                        f.write_str(",")?;
                    }
                    let per: Vec<String> = period.iter().map(|a| a.to_string()).collect();
                    write!(f, "periodic:{}", per.join(","))?;
                }
                Ok(())
            }
            Repr::Generated { label, .. } => write!(f, "gen:{label}"),
            Repr::Decimal { text, .. } => write!(f, "dec:{text}"),
            Repr::Rational(r) => write!(f, "rat:{}/{}", r.numer(), r.denom()),
        }
    }
}

impl fmt::Debug for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlphaSpec({self})")
    }
}

impl PartialEq for AlphaSpec {
    fn eq(&self, other: &Self) -> bool {
        self.to_string() == other.to_string()
    }
}

impl Eq for AlphaSpec {}

impl std::str::FromStr for AlphaSpec {
    type Err = DiophError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AlphaSpec::parse(s)
    }
}

fn parse_int(s: &str) -> Option<BigInt> {
    if s.is_empty() || s.len() > 4096 {
        return None;
    }
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn parse_quotients(s: &str) -> Option<Vec<BigInt>> {
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|t| parse_int(t.trim())).collect()
}

fn periodic_quotient(prefix: &[BigInt], period: &[BigInt], i: usize) -> BigInt {
    debug_assert!(i >= 1);
    if i <= prefix.len() {
        prefix[i - 1].clone()
    } else {
        period[(i - 1 - prefix.len()) % period.len()].clone()
    }
}

fn finite_cf_value(a0: &BigInt, prefix: &[BigInt]) -> BigRational {
    let mut acc: Option<BigRational> = None;
    for a in prefix.iter().rev() {
        let term = BigRational::from_integer(a.clone());
        acc = Some(match acc {
            None => term,
            Some(t) => term + t.recip(),
        });
    }
    let base = BigRational::from_integer(a0.clone());
    match acc {
        None => base,
        Some(t) => base + t.recip(),
    }
}

/// Dyadic approximation of an infinite continued fraction from its convergents.
fn cf_dyadic<F: Fn(usize) -> BigInt>(a0: &BigInt, bits: u32, quotient: F) -> BigInt {
    let target = BigInt::one() << (bits as usize + 1);
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p, mut q) = (a0.clone(), BigInt::one());
    let mut i = 1usize;
    loop {
        let a = quotient(i);
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        // |alpha - p/q| < 1 / (q q_next)
        if &q * &q_next >= target {
            return round_div(&(&p << bits as usize), &q);
        }
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        i += 1;
    }
}

/// `round(num / den)` with ties rounded up.
pub(crate) fn round_div(num: &BigInt, den: &BigInt) -> BigInt {
    let (num, den) = if den.is_negative() {
        (-num, -den)
    } else {
        (num.clone(), den.clone())
    };
    let twice: BigInt = num * 2 + &den;
    twice.div_floor(&(den * 2))
}

/// `n / 2^bits` as the nearest double (up to one rounding).
pub(crate) fn dyadic_to_f64(n: &BigInt, bits: u32) -> f64 {
    let nbits = n.bits();
    let (top, shift) = if nbits > 62 {
        let s = nbits - 62;
        (n >> s as usize, s as i64)
    } else {
        (n.clone(), 0)
    };
    let mant = top.to_f64().unwrap_or(f64::NAN);
    let exp = shift - bits as i64;
    scale_pow2(mant, exp)
}

fn scale_pow2(x: f64, exp: i64) -> f64 {
    let mut x = x;
    let mut e = exp;
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Exact integer `x * 2^bits` for a finite double `x` (truncated if `x` has
/// bits below 2^-bits).
pub(crate) fn f64_to_scaled_int(x: f64, bits: u32) -> BigInt {
    if x == 0.0 || !x.is_finite() {
        return BigInt::zero();
    }
    let r = BigRational::from_float(x).expect("finite");
    (r.numer() << bits as usize).div_floor(r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_grammar() {
        let s = AlphaSpec::parse("surd:0,1,1,2").unwrap();
        assert!((s.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-16);
        let g = AlphaSpec::parse("cf:1;periodic:1").unwrap();
        assert!((g.to_f64() - 1.618_033_988_749_895).abs() < 1e-15);
        let c = AlphaSpec::parse("cf:1;2,periodic:1,2").unwrap();
        assert_eq!(c.to_string(), "cf:1;2,periodic:1,2");
        let r = AlphaSpec::parse("rat:10/4").unwrap();
        assert_eq!(r.to_string(), "rat:5/2");
        let f = AlphaSpec::parse("cf:1;1,2").unwrap();
        assert_eq!(f.exact_rational().unwrap(), &BigRational::new(5.into(), 3.into()));
        let d = AlphaSpec::parse("dec:1.4142135623730950488").unwrap();
        assert!((d.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn parse_rejects() {
        for bad in [
            "",
            "sqrt:2",
            "surd:1,2,3",
            "surd:0,1,0,2",
            "surd:0,1,1,4",
            "surd:0,1,1,-2",
            "cf:1;0,2",
            "cf:x",
            "cf:1;periodic:",
            "rat:1/0",
            "dec:1.2.3",
            "dec:",
            "rat:a/b",
        ] {
            assert!(AlphaSpec::parse(bad).is_err(), "{bad} should fail");
        }
    }

    #[test]
    fn oracle_error_bound_holds() {
        // sqrt(2) to 60 digits
        let reference: BigRational = BigRational::new(
            "1414213562373095048801688724209698078569671875376948073176679"
                .parse()
                .unwrap(),
            num_traits::pow(BigInt::from(10), 60),
        );
        let a = AlphaSpec::sqrt(2).unwrap();
        for bits in [8u32, 31, 64, 100, 190] {
            let n = a.approx(bits).unwrap();
            let approx = BigRational::new(n, BigInt::one() << bits as usize);
            let err = (approx - &reference).abs();
            let bound = BigRational::new(BigInt::one(), BigInt::one() << bits as usize);
            assert!(err < bound, "bits {bits}");
        }
    }

    #[test]
    fn negative_surd_and_cache_monotone() {
        let a = AlphaSpec::surd(1, -1, 2, 5).unwrap(); // (1 - sqrt5)/2
        assert!((a.to_f64() + 0.618_033_988_749_895).abs() < 1e-15);
        let hi = a.approx(300).unwrap();
        let lo = a.approx(100).unwrap();
        let direct = AlphaSpec::surd(1, -1, 2, 5).unwrap().approx(100).unwrap();
        assert!((lo - direct).abs() <= BigInt::one());
        assert!(hi.bits() > 250);
    }

    #[test]
    fn decimal_budget() {
        let d = AlphaSpec::decimal("0.123").unwrap();
        assert_eq!(d.max_bits(), Some(9)); // 2^9 = 512 < 1000 < 1024
        assert!(d.approx(9).is_ok());
        assert!(matches!(d.approx(10), Err(DiophError::PrecisionExhausted { .. })));
    }

    #[test]
    fn lattice_sign_exact_and_certified() {
        use std::cmp::Ordering::*;
        let s2 = AlphaSpec::sqrt(2).unwrap();
        assert_eq!(
            AlphaSpec::lattice_sign(-17, &[12], std::slice::from_ref(&s2)).unwrap(),
            Less
        );
        assert_eq!(
            AlphaSpec::lattice_sign(-16, &[12], std::slice::from_ref(&s2)).unwrap(),
            Greater
        );
        let half = AlphaSpec::rational(1, 2).unwrap();
        assert_eq!(AlphaSpec::lattice_sign(-1, &[2], &[half]).unwrap(), Equal);
    }

    #[test]
    fn dd_split() {
        let (hi, lo) = AlphaSpec::sqrt(2).unwrap().to_dd();
        assert_eq!(hi, std::f64::consts::SQRT_2);
        // sqrt2 - fl(sqrt2) ~ -9.667e-17
        assert!((lo + 9.667_293_313_452_913e-17).abs() < 1e-30);
    }
}
