//! Lattice-tagged supports: atoms at `scale * (c0 + c1 alpha_1 + ... + cm alpha_m)`
//! with exact integer coordinates, ordered with certified comparisons.

use std::cmp::Ordering;

use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::{DiscreteDist, DistError};
use crate::dioph::AlphaSpec;
use crate::numeric::Compensated;

/// Integer coordinates of every atom over the basis `(1, alpha_1, ..., alpha_m)`.
#[derive(Debug, Clone)]
pub struct Lattice {
    basis: Vec<AlphaSpec>,
    coords: Vec<i32>,
    scale: f64,
}

impl Lattice {
    pub(crate) fn new(basis: Vec<AlphaSpec>, coords: Vec<i32>, scale: f64) -> Self {
        Lattice { basis, coords, scale }
    }

    /// `alpha_1, ..., alpha_m` (the unit coefficient is implicit).
    pub fn basis(&self) -> &[AlphaSpec] {
        &self.basis
    }

    /// Coordinates per atom, `m + 1`.
    pub fn dim(&self) -> usize {
        self.basis.len() + 1
    }

    pub fn coords(&self, i: usize) -> &[i32] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub(crate) fn all_coords(&self) -> &[i32] {
        &self.coords
    }

    /// Positive factor applied to every lattice value.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Certified comparison of the positions of atoms `i` and `j`.
    pub fn cmp_atoms(&self, i: usize, j: usize) -> Result<Ordering, DistError> {
        cmp_coords(&self.basis, self.coords(i), self.coords(j))
    }
}

fn cmp_coords(basis: &[AlphaSpec], a: &[i32], b: &[i32]) -> Result<Ordering, DistError> {
    let diff: Vec<i64> = a.iter().zip(b).map(|(x, y)| *x as i64 - *y as i64).collect();
    Ok(AlphaSpec::lattice_sign(diff[0], &diff[1..], basis)?)
}

/// Merge the bases of two lattices; returns the union and, for each input, the
/// new axis index of each of its axes (axis 0 is the unit).
pub(crate) fn union_basis(a: &[AlphaSpec], b: &[AlphaSpec]) -> (Vec<AlphaSpec>, Vec<usize>, Vec<usize>) {
    let mut basis: Vec<AlphaSpec> = a.to_vec();
    let map_a = (0..=a.len()).collect();
    let mut map_b = vec![0usize];
    for alpha in b {
        match basis.iter().position(|x| x == alpha) {
            Some(k) => map_b.push(k + 1),
            None => {
                basis.push(alpha.clone());
                map_b.push(basis.len());
            }
        }
    }
    (basis, map_a, map_b)
}

/// Re-express coordinates over a larger basis.
pub(crate) fn remap(coords: &[i32], old_dim: usize, map: &[usize], new_dim: usize) -> Vec<i32> {
    let n = coords.len() / old_dim;
    let mut out = vec![0i32; n * new_dim];
    for i in 0..n {
        for k in 0..old_dim {
            out[i * new_dim + map[k]] += coords[i * old_dim + k];
        }
    }
    out
}

/// Merge atoms with identical coordinate tuples (weights add).
pub(crate) fn merge_equal_coords(dim: usize, coords: Vec<i32>, w: Vec<f64>) -> (Vec<i32>, Vec<f64>) {
    let n = w.len();
    let mut idx: Vec<u32> = (0..n as u32).collect();
    idx.par_sort_unstable_by(|&i, &j| {
        let (i, j) = (i as usize, j as usize);
        coords[i * dim..(i + 1) * dim].cmp(&coords[j * dim..(j + 1) * dim])
    });
    let mut out_c = Vec::with_capacity(coords.len());
    let mut out_w: Vec<Compensated> = Vec::with_capacity(n);
    let mut last: Option<usize> = None;
    for &i in &idx {
        let i = i as usize;
        let c = &coords[i * dim..(i + 1) * dim];
        if let Some(l) = last {
            if &coords[l * dim..(l + 1) * dim] == c {
                out_w.last_mut().unwrap().add(w[i]);
                continue;
            }
        }
        out_c.extend_from_slice(c);
        let mut acc = Compensated::new();
        acc.add(w[i]);
        out_w.push(acc);
        last = Some(i);
    }
    (out_c, out_w.into_iter().map(|c| c.value()).collect())
}

/// Exact common-denominator representation of an all-rational basis.
fn rational_keys(basis: &[AlphaSpec]) -> Option<(i128, Vec<i128>)> {
    let mut den: i128 = 1;
    for a in basis {
        let r = a.exact_rational()?;
        let q = r.denom().to_i128()?;
        den = den.lcm(&q);
        if den > 1 << 40 {
            return None;
        }
    }
    let mut nums = Vec::with_capacity(basis.len());
    for a in basis {
        let r = a.exact_rational()?;
        let p = r.numer().to_i128()?;
        let q = r.denom().to_i128()?;
        let v = p.checked_mul(den / q)?;
        if v.abs() > 1 << 60 {
            return None;
        }
        nums.push(v);
    }
    Some((den, nums))
}

/// Sort lattice atoms by exact position, merge exact coincidences (possible
/// only for rational bases) and build the distribution. Coordinate tuples must
/// be distinct; zero weights are dropped.
pub(crate) fn build_lattice_dist(
    basis: Vec<AlphaSpec>,
    coords: Vec<i32>,
    w: Vec<f64>,
    scale: f64,
) -> Result<DiscreteDist, DistError> {
    let dim = basis.len() + 1;
    let keep: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
    if keep.is_empty() {
        return Err(DistError::Empty);
    }
    let at = |i: usize| &coords[i * dim..(i + 1) * dim];

    if let Some((den, nums)) = rational_keys(&basis) {
        let key = |i: usize| -> i128 {
            let c = at(i);
            let mut k = c[0] as i128 * den;
            for (x, v) in c[1..].iter().zip(&nums) {
                k += *x as i128 * v;
            }
            k
        };
        let mut order: Vec<(i128, u32)> = keep.iter().map(|&i| (key(i), i as u32)).collect();
        order.par_sort_unstable_by(|a, b| a.0.cmp(&b.0).then_with(|| at(a.1 as usize).cmp(at(b.1 as usize))));
        let mut pos = Vec::with_capacity(order.len());
        let mut out_w: Vec<Compensated> = Vec::with_capacity(order.len());
        let mut out_c = Vec::with_capacity(order.len() * dim);
        let mut last_key: Option<i128> = None;
        for (k, i) in order {
            if last_key == Some(k) {
                out_w.last_mut().unwrap().add(w[i as usize]);
                continue;
            }
            last_key = Some(k);
            pos.push(k as f64 / den as f64 * scale);
            let mut acc = Compensated::new();
            acc.add(w[i as usize]);
            out_w.push(acc);
            out_c.extend_from_slice(at(i as usize));
        }
        let w = out_w.into_iter().map(|c| c.value()).collect();
        return Ok(DiscreteDist::from_sorted(
            pos,
            w,
            Some(Lattice::new(basis, out_c, scale)),
        ));
    }

    let split: Vec<(f64, f64)> = basis.iter().map(|a| a.to_dd()).collect();
    let value = |i: usize| -> f64 {
        let c = at(i);
        let mut hi = c[0] as f64;
        let mut lo = 0.0;
        for (x, (ah, al)) in c[1..].iter().zip(&split) {
            let (p, e) = crate::numeric::two_prod(*x as f64, *ah);
            let (s, e2) = crate::numeric::two_sum(hi, p);
            hi = s;
            lo += e + e2 + *x as f64 * al;
        }
        hi + lo
    };
    let mut order: Vec<(f64, u32)> = keep.par_iter().map(|&i| (value(i), i as u32)).collect();
    order.par_sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then_with(|| at(a.1 as usize).cmp(at(b.1 as usize))));

    // Bound on the float error of any value.
    let mag = keep
        .par_iter()
        .map(|&i| {
            let c = at(i);
            (c[0] as f64).abs()
                + c[1..]
                    .iter()
                    .zip(&split)
                    .map(|(x, (ah, _))| (*x as f64 * ah).abs())
                    .sum::<f64>()
        })
        .reduce(|| 0.0, f64::max);
    // each value is the rounded sum hi + lo, off by at most eps * mag
    let tol = 4.0 * f64::EPSILON * mag + f64::MIN_POSITIVE;

    // Exact resolution inside clusters whose float gaps are below the error bound.
    let mut groups: Vec<Vec<u32>> = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && order[end].0 - order[end - 1].0 <= tol {
            end += 1;
        }
        let members: Vec<u32> = order[start..end].iter().map(|x| x.1).collect();
        if members.len() == 1 {
            groups.push(members);
        } else {
            // insertion sort with certified comparisons, merging exact ties
            let mut sorted: Vec<Vec<u32>> = Vec::new();
            for m in members {
                let mut placed = false;
                let mut insert_at = sorted.len();
                for (gi, g) in sorted.iter().enumerate() {
                    match cmp_coords(&basis, at(m as usize), at(g[0] as usize))? {
                        Ordering::Equal => {
                            insert_at = gi;
                            placed = true;
                            break;
                        }
                        Ordering::Less => {
                            insert_at = gi;
                            break;
                        }
                        Ordering::Greater => {}
                    }
                }
                if placed {
                    sorted[insert_at].push(m);
                } else {
                    sorted.insert(insert_at, vec![m]);
                }
            }
            groups.extend(sorted);
        }
        start = end;
    }

    let mut pos = Vec::with_capacity(groups.len());
    let mut out_w = Vec::with_capacity(groups.len());
    let mut out_c = Vec::with_capacity(groups.len() * dim);
    let mut prev = f64::NEG_INFINITY;
    for g in groups {
        let rep = *g.iter().min_by(|a, b| at(**a as usize).cmp(at(**b as usize))).unwrap() as usize;
        let mut x = value(rep) * scale;
        if x < prev {
            x = prev;
        }
        prev = x;
        pos.push(x);
        let mut acc = Compensated::new();
        for i in &g {
            acc.add(w[*i as usize]);
        }
        out_w.push(acc.value());
        out_c.extend_from_slice(at(rep));
    }
    Ok(DiscreteDist::from_sorted(
        pos,
        out_w,
        Some(Lattice::new(basis, out_c, scale)),
    ))
}
