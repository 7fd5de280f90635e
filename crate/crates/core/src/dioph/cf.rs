//! Continued fraction expansion and convergents.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{AlphaSpec, DiophError, Repr};

/// Repeating block of a periodic expansion: `a_i = block[(i - start) % len]`
/// for `i >= start`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Period {
    pub start: usize,
    pub block: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuedFraction {
    pub a0: BigInt,
    /// `a_1, a_2, ...`
    pub quotients: Vec<BigInt>,
    /// The value is rational and `quotients` is its complete expansion.
    pub terminated: bool,
    /// Detected or declared period, when the expansion is eventually periodic.
    pub period: Option<Period>,
}

/// A convergent `p / q` (always in lowest terms, `q > 0`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergent {
    pub p: BigInt,
    pub q: BigInt,
}

impl Convergent {
    pub fn to_ratio(&self) -> BigRational {
        BigRational::new(self.p.clone(), self.q.clone())
    }
}

impl ContinuedFraction {
    pub fn new(a0: BigInt, quotients: Vec<BigInt>) -> Self {
        ContinuedFraction {
            a0,
            quotients,
            terminated: false,
            period: None,
        }
    }

    /// Number of terms including `a0`.
    pub fn len(&self) -> usize {
        self.quotients.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `a_i` for `i >= 0`, extending through the period when known.
    pub fn term(&self, i: usize) -> Option<BigInt> {
        if i == 0 {
            return Some(self.a0.clone());
        }
        if i <= self.quotients.len() {
            return Some(self.quotients[i - 1].clone());
        }
        let p = self.period.as_ref()?;
        Some(p.block[(i - p.start) % p.block.len()].clone())
    }

    /// Largest partial quotient `a_i`, `i >= 1`, over all indices when a period
    /// is known, else over the computed prefix. `None` for an empty tail.
    pub fn max_partial_quotient(&self) -> Option<BigInt> {
        let head = self.quotients.iter();
        match &self.period {
            Some(p) => head.chain(p.block.iter()).max().cloned(),
            None => head.max().cloned(),
        }
    }

    /// `true` when a period is known, which makes the partial quotients bounded.
    pub fn is_badly_approximable(&self) -> bool {
        self.period.is_some()
    }

    /// Convergents `p_i / q_i` for `0 <= i <= k`.
    pub fn convergents(&self, k: usize) -> Result<Vec<Convergent>, DiophError> {
        convergents(self, k)
    }
}

/// Convergents `p_i / q_i` for `0 <= i <= k` via the three-term recurrence.
pub fn convergents(cf: &ContinuedFraction, k: usize) -> Result<Vec<Convergent>, DiophError> {
    if k > cf.quotients.len() {
        return Err(DiophError::IndexOutOfRange {
            index: k,
            available: cf.quotients.len(),
        });
    }
    let mut out = Vec::with_capacity(k + 1);
    let (mut p2, mut q2) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    for i in 0..=k {
        let a = if i == 0 { &cf.a0 } else { &cf.quotients[i - 1] };
        let p = a * &p1 + &p2;
        let q = a * &q1 + &q2;
        p2 = std::mem::replace(&mut p1, p.clone());
        q2 = std::mem::replace(&mut q1, q.clone());
        out.push(Convergent { p, q });
    }
    Ok(out)
}

/// First `depth` terms (`a0` included) of the continued fraction of `alpha`.
///
/// Rationals with a shorter expansion return the complete expansion with
/// `terminated` set. Decimal inputs fail with `CfPrecisionExhausted` when the
/// digit budget certifies fewer than `depth` terms; see [`cf_expand_certified`].
pub fn cf_expand(alpha: &AlphaSpec, depth: usize) -> Result<ContinuedFraction, DiophError> {
    if depth == 0 {
        return Err(DiophError::Domain("depth must be at least 1".into()));
    }
    if let Some(r) = alpha.exact_rational() {
        return Ok(rational_cf(r, depth));
    }
    match &alpha.repr {
        Repr::Surd { a, b, c, d } => Ok(surd_cf(a, b, c, d, depth)),
        Repr::Decimal { .. } => {
            let cf = cf_expand_certified(alpha, depth)?;
            if cf.len() < depth && !cf.terminated {
                return Err(DiophError::CfPrecisionExhausted { certified: cf.len() });
            }
            Ok(cf)
        }
        Repr::Cf { prefix, period, .. } => {
            let (a0, q) = alpha.quotient_source().expect("periodic cf");
            let mut cf = ContinuedFraction::new(a0, (1..depth).map(q).collect());
            cf.period = Some(Period {
                start: prefix.len() + 1,
                block: period.clone(),
            });
            Ok(cf)
        }
        Repr::Generated { .. } => {
            let (a0, q) = alpha.quotient_source().expect("generated cf");
            Ok(ContinuedFraction::new(a0, (1..depth).map(q).collect()))
        }
        Repr::Rational(_) => unreachable!("rationals take the exact path"),
    }
}

/// Like [`cf_expand`], but for decimal inputs returns however many terms
/// (at most `depth`) the digit interval certifies.
pub fn cf_expand_certified(alpha: &AlphaSpec, depth: usize) -> Result<ContinuedFraction, DiophError> {
    let Repr::Decimal { lower, digits, .. } = &alpha.repr else {
        return cf_expand(alpha, depth);
    };
    let scale = num_traits::pow(BigInt::from(10u32), *digits as usize);
    let mut lo = BigRational::new(lower.clone(), scale.clone());
    let mut hi = BigRational::new(lower + 1, scale);
    let mut terms = Vec::new();
    while terms.len() < depth {
        let m = lo.floor();
        if hi.floor() != m || hi == m {
            break;
        }
        terms.push(m.to_integer());
        let lo_frac = &lo - &m;
        if lo_frac.is_zero() {
            break;
        }
        let hi_frac = &hi - &m;
        lo = hi_frac.recip();
        hi = lo_frac.recip();
    }
    if terms.is_empty() {
        return Err(DiophError::CfPrecisionExhausted { certified: 0 });
    }
    let a0 = terms.remove(0);
    Ok(ContinuedFraction::new(a0, terms))
}

fn rational_cf(r: &BigRational, depth: usize) -> ContinuedFraction {
    let (mut num, mut den) = (r.numer().clone(), r.denom().clone());
    let mut terms = Vec::new();
    while !den.is_zero() && terms.len() < depth {
        let (q, rem) = num.div_mod_floor(&den);
        terms.push(q);
        num = std::mem::replace(&mut den, rem);
    }
    let terminated = den.is_zero();
    let a0 = terms.remove(0);
    ContinuedFraction {
        a0,
        quotients: terms,
        terminated,
        period: None,
    }
}

/// Cap on the number of steps spent looking for the period beyond `depth`.
const PERIOD_SEARCH_LIMIT: usize = 100_000;

fn surd_cf(a: &BigInt, b: &BigInt, c: &BigInt, d: &BigInt, depth: usize) -> ContinuedFraction {
    // Normalise to (p + sqrt(dd)) / q with q | dd - p^2.
    let (mut p, bb, mut q) = if b.is_negative() {
        (-a, -b, -c)
    } else {
        (a.clone(), b.clone(), c.clone())
    };
    let mut dd = &bb * &bb * d;
    if !(&dd - &p * &p).is_multiple_of(&q) {
        let qa = q.abs();
        p *= &qa;
        dd = dd * &q * &q;
        q *= &qa;
    }
    let r = dd.sqrt();
    let mut terms: Vec<BigInt> = Vec::new();
    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut period = None;
    let limit = depth + PERIOD_SEARCH_LIMIT;
    while terms.len() < limit {
        let idx = terms.len();
        if idx >= 1 {
            if let Some(&start) = seen.get(&(p.clone(), q.clone())) {
                period = Some(Period {
                    start,
                    block: terms[start..idx].to_vec(),
                });
                break;
            }
            seen.insert((p.clone(), q.clone()), idx);
        }
        let num = if q.is_positive() { &p + &r } else { &p + &r + 1 };
        let ak = num.div_floor(&q);
        let p_next = &ak * &q - &p;
        q = (&dd - &p_next * &p_next) / &q;
        p = p_next;
        terms.push(ak);
    }
    let mut cf = ContinuedFraction::new(terms[0].clone(), Vec::new());
    cf.period = period;
    cf.quotients = (1..depth)
        .map(|i| {
            if i < terms.len() {
                terms[i].clone()
            } else {
                cf.term(i).expect("period covers the tail")
            }
        })
        .collect();
    cf
}
