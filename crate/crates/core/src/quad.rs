//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_evals: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("quadrature did not reach tolerance after {evals} evaluations (value {value}, error estimate {abs_error})")]
pub struct QuadError {
    pub value: f64,
    pub abs_error: f64,
    pub evals: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// `integral_a^b f` over finite `[a, b]`, with panel boundaries forced at the
/// given breakpoints (those outside `(a, b)` are ignored).
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult, QuadError> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evals: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| *x > lo && *x < hi).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut edges = vec![lo];
    edges.extend(pts);
    edges.push(hi);

    let mut heap = BinaryHeap::new();
    let mut evals = 0usize;
    let (mut total, mut err) = (0.0, 0.0);
    for w in edges.windows(2) {
        let (v, e) = gk15(&mut f, w[0], w[1]);
        evals += 15;
        total += v;
        err += e;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            err: e,
        });
    }
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= target {
            break;
        }
        if evals + 30 > opts.max_evals {
            return Err(QuadError {
                value: sign * total,
                abs_error: err,
                evals,
            });
        }
        let p = heap.pop().expect("at least one panel");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            // panel cannot be split further; keep its estimate
            heap.push(Panel { err: 0.0, ..p });
            err -= p.err;
            continue;
        }
        let (v1, e1) = gk15(&mut f, p.a, m);
        let (v2, e2) = gk15(&mut f, m, p.b);
        evals += 30;
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.err;
        heap.push(Panel {
            a: p.a,
            b: m,
            value: v1,
            err: e1,
        });
        heap.push(Panel {
            a: m,
            b: p.b,
            value: v2,
            err: e2,
        });
    }
    // re-sum for a stable total
    let mut acc = crate::numeric::Compensated::new();
    let mut e = 0.0;
    for p in heap.iter() {
        acc.add(p.value);
        e += p.err;
    }
    Ok(QuadResult {
        value: sign * acc.value(),
        abs_error: e,
        evals,
    })
}

pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult, QuadError> {
    integrate_with_breaks(f, a, b, &[], opts)
}

/// `integral_a^inf f` via the substitution `x = a + u / (1 - u)`.
pub fn integrate_to_inf<F: FnMut(f64) -> f64>(mut f: F, a: f64, opts: QuadOptions) -> Result<QuadResult, QuadError> {
    integrate(
        |u| {
            if u >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - u;
            let v = f(a + u / s);
            if v == 0.0 {
                0.0
            } else {
                v / (s * s)
            }
        },
        0.0,
        1.0,
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, QuadOptions::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-13);
    }

    #[test]
    fn kink_with_breakpoint() {
        let r = integrate_with_breaks(|x: f64| x.abs(), -1.0, 3.0, &[0.0], QuadOptions::default()).unwrap();
        assert!((r.value - 5.0).abs() < 1e-14);
        assert_eq!(r.evals, 30);
    }

    #[test]
    fn gaussian_tail() {
        let r = integrate_to_inf(|x: f64| (-x * x / 2.0).exp(), 0.0, QuadOptions::default()).unwrap();
        assert!((r.value - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn reversed_bounds() {
        let r = integrate(|x| x, 1.0, 0.0, QuadOptions::default()).unwrap();
        assert!((r.value + 0.5).abs() < 1e-15);
    }
}
