//! Exact Kolmogorov distance between a step distribution function and a
//! comparison function.

use rayon::prelude::*;
use serde::Serialize;

use super::DiscreteDist;

/// A distribution-like function `G` of bounded variation with `G(-inf) = 0`
/// and `G(+inf) = 1`.
pub trait ComparisonFn: Sync {
    fn eval(&self, x: f64) -> f64;

    /// `G(x-)`; differs from [`eval`](Self::eval) only at jumps.
    fn eval_left(&self, x: f64) -> f64 {
        self.eval(x)
    }

    fn derivative(&self, x: f64) -> f64;

    /// Zeros of `G'` in `[lo, hi]` where `G` has a local extremum, ascending.
    fn stationary_points(&self, lo: f64, hi: f64) -> Vec<f64>;

    /// Jump locations, ascending.
    fn jumps(&self) -> Vec<f64> {
        Vec::new()
    }

    /// `integral x^2 dG`, when known in closed form.
    fn second_moment(&self) -> Option<f64> {
        None
    }

    /// `integral_{|x| >= a} x^2 dG`, when known in closed form.
    fn tail_second_moment(&self, _a: f64) -> Option<f64> {
        None
    }

    /// Smallest interval carrying all the mass, when bounded.
    fn support(&self) -> Option<(f64, f64)> {
        None
    }
}

impl ComparisonFn for DiscreteDist {
    fn eval(&self, x: f64) -> f64 {
        self.cdf(x)
    }

    fn eval_left(&self, x: f64) -> f64 {
        self.cdf_left(x)
    }

    fn derivative(&self, _x: f64) -> f64 {
        0.0
    }

    fn stationary_points(&self, _lo: f64, _hi: f64) -> Vec<f64> {
        Vec::new()
    }

    fn jumps(&self) -> Vec<f64> {
        self.positions().to_vec()
    }

    fn second_moment(&self) -> Option<f64> {
        Some(crate::numeric::compensated_sum(self.atoms().map(|(x, w)| w * x * x)))
    }

    fn support(&self) -> Option<(f64, f64)> {
        Some((*self.positions().first()?, *self.positions().last()?))
    }
}

/// Which one-sided limit of `F` attains the supremum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KolmogorovResult {
    pub delta: f64,
    pub argmax: f64,
    pub side: Side,
}

#[derive(Clone, Copy)]
struct Cand {
    v: f64,
    x: f64,
    side: Side,
}

impl Cand {
    fn better(self, o: Cand) -> Cand {
        if o.v > self.v || (o.v == self.v && (o.x, o.side as u8) < (self.x, self.side as u8)) {
            o
        } else {
            self
        }
    }
}

/// `sup_x |F(x) - G(x)|` over the complete candidate set: both one-sided
/// limits at every atom of `F`, every jump of `G`, and every stationary point
/// of `G` (where `F` is constant on the enclosing gap). Between these points
/// `F - G` is monotone, so the supremum is attained (as a limit) on the set.
pub fn kolmogorov_distance<G: ComparisonFn + ?Sized>(d: &DiscreteDist, g: &G) -> KolmogorovResult {
    let pos = d.positions();
    let cum = d.cumulative();
    let init = Cand {
        v: 0.0,
        x: f64::NEG_INFINITY,
        side: Side::Left,
    };
    let best = (0..pos.len())
        .into_par_iter()
        .with_min_len(4096)
        .map(|k| {
            let x = pos[k];
            let before = if k == 0 { 0.0 } else { cum[k - 1] };
            let right = Cand {
                v: (cum[k] - g.eval(x)).abs(),
                x,
                side: Side::Right,
            };
            let left = Cand {
                v: (before - g.eval_left(x)).abs(),
                x,
                side: Side::Left,
            };
            right.better(left)
        })
        .reduce(|| init, Cand::better);

    let mut extra = g.stationary_points(f64::NEG_INFINITY, f64::INFINITY);
    extra.extend(g.jumps());
    extra
        .into_iter()
        .filter(|x| x.is_finite())
        .map(|x| {
            let right = Cand {
                v: (d.cdf(x) - g.eval(x)).abs(),
                x,
                side: Side::Right,
            };
            let left = Cand {
                v: (d.cdf_left(x) - g.eval_left(x)).abs(),
                x,
                side: Side::Left,
            };
            right.better(left)
        })
        .fold(best, Cand::better)
        .into()
}

impl From<Cand> for KolmogorovResult {
    fn from(c: Cand) -> Self {
        KolmogorovResult {
            delta: c.v,
            argmax: c.x,
            side: c.side,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distkit::{bernoulli_pm, convolve};

    #[test]
    fn identical_steps_give_zero() {
        let b = bernoulli_pm(1.0).unwrap();
        let r = kolmogorov_distance(&b, &b);
        assert_eq!(r.delta, 0.0);
    }

    #[test]
    fn step_versus_step() {
        let b = bernoulli_pm(1.0).unwrap();
        let c = convolve(&b, &b).unwrap(); // -2, 0, 2
        let r = kolmogorov_distance(&c, &b);
        // on [-1, 0): F_c = 1/4, F_b = 1/2
        assert_eq!(r.delta, 0.25);
    }
}
