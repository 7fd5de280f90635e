//! Constructors, convolution and normalized n-fold sums.

use super::lattice::{build_lattice_dist, merge_equal_coords, remap, union_basis, Lattice};
use super::{merge_float_atoms, moments, DiscreteDist, DistError};
use crate::dioph::AlphaSpec;
use crate::numeric::compensated_sum;

/// Default cap on the number of atoms of any constructed distribution.
pub const DEFAULT_ATOM_CAP: usize = 30_000_000;

/// `+-scale` with probability 1/2 each (tagged as a scaled unit lattice).
pub fn bernoulli_pm(scale: f64) -> Result<DiscreteDist, DistError> {
    if scale == 0.0 || !scale.is_finite() {
        return Err(DistError::DegenerateScale);
    }
    let s = scale.abs();
    Ok(DiscreteDist::from_sorted(
        vec![-s, s],
        vec![0.5, 0.5],
        Some(Lattice::new(Vec::new(), vec![-1, 1], s)),
    ))
}

/// `+-alpha` with probability 1/2 each, tagged with the basis `(1, alpha)`.
pub fn bernoulli_lattice(alpha: &AlphaSpec) -> Result<DiscreteDist, DistError> {
    if alpha.exact_rational().is_some_and(num_traits::Zero::is_zero) {
        return Err(DistError::DegenerateScale);
    }
    build_lattice_dist(vec![alpha.clone()], vec![0, -1, 0, 1], vec![0.5, 0.5], 1.0)
}

/// Point mass at zero.
pub fn delta0() -> DiscreteDist {
    DiscreteDist::from_sorted(vec![0.0], vec![1.0], Some(Lattice::new(Vec::new(), vec![0], 1.0)))
}

fn common_lattice<'a>(ds: impl Iterator<Item = &'a DiscreteDist>) -> Option<f64> {
    let mut scale = None;
    for d in ds {
        let l = d.lattice()?;
        match scale {
            None => scale = Some(l.scale()),
            Some(s) if s == l.scale() => {}
            Some(_) => return None,
        }
    }
    scale
}

pub fn mixture(components: &[(f64, DiscreteDist)]) -> Result<DiscreteDist, DistError> {
    mixture_with_cap(components, DEFAULT_ATOM_CAP)
}

/// Weighted union of distributions; coincident atoms merge.
pub fn mixture_with_cap(components: &[(f64, DiscreteDist)], cap: usize) -> Result<DiscreteDist, DistError> {
    if components.is_empty() {
        return Err(DistError::Empty);
    }
    for (p, _) in components {
        if !(*p > 0.0) || !p.is_finite() {
            return Err(DistError::InvalidWeight { weight: *p });
        }
    }
    let sum = compensated_sum(components.iter().map(|c| c.0));
    if (sum - 1.0).abs() > 1e-12 {
        return Err(DistError::WeightSumViolation { sum });
    }
    let total: usize = components.iter().map(|c| c.1.len()).sum();
    if total > cap {
        return Err(DistError::SupportOverflow {
            atoms: total as u128,
            cap,
        });
    }
    if let Some(scale) = common_lattice(components.iter().map(|c| &c.1)) {
        let mut basis: Vec<AlphaSpec> = Vec::new();
        for (_, d) in components {
            basis = union_basis(&basis, d.lattice().unwrap().basis()).0;
        }
        let dim = basis.len() + 1;
        let mut coords = Vec::with_capacity(total * dim);
        let mut w = Vec::with_capacity(total);
        for (p, d) in components {
            let l = d.lattice().unwrap();
            let (_, _, map) = union_basis(&basis, l.basis());
            coords.extend(remap(l.all_coords(), l.dim(), &map, dim));
            w.extend(d.weights().iter().map(|x| p * x));
        }
        let (coords, w) = merge_equal_coords(dim, coords, w);
        return build_lattice_dist(basis, coords, w, scale);
    }
    let atoms = components
        .iter()
        .flat_map(|(p, d)| d.atoms().map(move |(x, w)| (x, p * w)))
        .collect();
    Ok(merge_float_atoms(atoms))
}

pub fn convolve(d1: &DiscreteDist, d2: &DiscreteDist) -> Result<DiscreteDist, DistError> {
    convolve_with_cap(d1, d2, DEFAULT_ATOM_CAP)
}

/// Lattice box volume spanned by the sums of two coordinate sets.
fn sum_box_volume(dim: usize, a: &[i32], b: &[i32]) -> u128 {
    let range = |c: &[i32], k: usize| {
        let it = c.iter().skip(k).step_by(dim);
        let lo = it.clone().min().copied().unwrap_or(0) as i64;
        let hi = it.max().copied().unwrap_or(0) as i64;
        (lo, hi)
    };
    let mut vol: u128 = 1;
    for k in 0..dim {
        let (alo, ahi) = range(a, k);
        let (blo, bhi) = range(b, k);
        vol = vol.saturating_mul(((ahi + bhi) - (alo + blo) + 1) as u128);
    }
    vol
}

/// Distribution of the sum of independent draws from `d1` and `d2`.
pub fn convolve_with_cap(d1: &DiscreteDist, d2: &DiscreteDist, cap: usize) -> Result<DiscreteDist, DistError> {
    if d1.is_empty() || d2.is_empty() {
        return Err(DistError::Empty);
    }
    let pairs = d1.len() as u128 * d2.len() as u128;
    if let Some(scale) = common_lattice([d1, d2].into_iter()) {
        let (l1, l2) = (d1.lattice().unwrap(), d2.lattice().unwrap());
        let (basis, m1, m2) = union_basis(l1.basis(), l2.basis());
        let dim = basis.len() + 1;
        let c1 = remap(l1.all_coords(), l1.dim(), &m1, dim);
        let c2 = remap(l2.all_coords(), l2.dim(), &m2, dim);
        let atoms = pairs.min(sum_box_volume(dim, &c1, &c2));
        if atoms > cap as u128 {
            return Err(DistError::SupportOverflow { atoms, cap });
        }
        let mut coords = Vec::with_capacity(pairs as usize * dim);
        let mut w = Vec::with_capacity(pairs as usize);
        for i in 0..d1.len() {
            for j in 0..d2.len() {
                for k in 0..dim {
                    coords.push(c1[i * dim + k] + c2[j * dim + k]);
                }
                w.push(d1.weights()[i] * d2.weights()[j]);
            }
        }
        let (coords, w) = merge_equal_coords(dim, coords, w);
        return build_lattice_dist(basis, coords, w, scale);
    }
    if pairs > cap as u128 {
        return Err(DistError::SupportOverflow { atoms: pairs, cap });
    }
    let mut atoms = Vec::with_capacity(pairs as usize);
    for (x, p) in d1.atoms() {
        for (y, q) in d2.atoms() {
            atoms.push((x + y, p * q));
        }
    }
    Ok(merge_float_atoms(atoms))
}

pub fn zn_dist(base: &DiscreteDist, n: u64) -> Result<DiscreteDist, DistError> {
    zn_dist_with_cap(base, n, DEFAULT_ATOM_CAP)
}

/// Distribution of `Z_n = (X_1 + ... + X_n) / (sigma sqrt n)` for i.i.d.
/// copies of a centered `base`.
pub fn zn_dist_with_cap(base: &DiscreteDist, n: u64, cap: usize) -> Result<DiscreteDist, DistError> {
    if n == 0 {
        return Err(DistError::ZeroN);
    }
    if base.is_empty() {
        return Err(DistError::Empty);
    }
    let m = moments(base, 1);
    let second = m.sigma2 + m.mean * m.mean;
    if !(m.sigma2 > 0.0) {
        return Err(DistError::Degenerate);
    }
    if m.mean.abs() > 1e-9 * second.sqrt() {
        return Err(DistError::NotCentered { mean: m.mean });
    }
    let norm = 1.0 / (m.sigma2.sqrt() * (n as f64).sqrt());
    if let Some(l) = base.lattice() {
        if let Some(axes) = pm_product_axes(base, l) {
            return pm_product_power(l, &axes, n, norm, cap);
        }
        return lattice_power(base, l, n, norm, cap);
    }
    let mut cur = base.clone();
    for _ in 1..n {
        cur = convolve_with_cap(&cur, base, cap)?;
    }
    let atoms = cur.atoms().map(|(x, w)| (x * norm, w)).collect::<Vec<_>>();
    let (pos, w): (Vec<f64>, Vec<f64>) = atoms.into_iter().unzip();
    Ok(DiscreteDist::from_sorted(pos, w, None))
}

/// Axes `S` such that `base` is the product of independent `+-1` signs on `S`.
fn pm_product_axes(base: &DiscreteDist, l: &Lattice) -> Option<Vec<usize>> {
    let dim = l.dim();
    let axes: Vec<usize> = (0..dim).filter(|&k| l.coords(0)[k] != 0).collect();
    let r = axes.len();
    if r == 0 || r > 20 || base.len() != 1 << r {
        return None;
    }
    let expect = 1.0 / (1u64 << r) as f64;
    for i in 0..base.len() {
        let c = l.coords(i);
        for (k, &ck) in c.iter().enumerate().take(dim) {
            let on = axes.contains(&k);
            if (on && ck.abs() != 1) || (!on && ck != 0) {
                return None;
            }
        }
        if (base.weights()[i] - expect).abs() > 1e-15 * expect {
            return None;
        }
    }
    Some(axes)
}

/// `P(Bin(n, 1/2) = j)` for `j = 0..=n`, built from the mode outwards by the
/// ratio recurrence and normalized; entries below the double range are zero.
pub(crate) fn binomial_half_pmf(n: u64) -> Vec<f64> {
    let n = n as usize;
    let mut v = vec![0.0f64; n + 1];
    let mode = n / 2;
    v[mode] = 1.0;
    for j in mode..n {
        v[j + 1] = v[j] * (n - j) as f64 / (j + 1) as f64;
        if v[j + 1] == 0.0 {
            break;
        }
    }
    for j in (1..=mode).rev() {
        v[j - 1] = v[j] * j as f64 / (n - j + 1) as f64;
        if v[j - 1] == 0.0 {
            break;
        }
    }
    let total = compensated_sum(v.iter().copied());
    for x in &mut v {
        *x /= total;
    }
    v
}

fn pm_product_power(l: &Lattice, axes: &[usize], n: u64, norm: f64, cap: usize) -> Result<DiscreteDist, DistError> {
    let r = axes.len() as u32;
    let atoms = (n as u128 + 1).saturating_pow(r);
    if atoms > cap as u128 {
        return Err(DistError::SupportOverflow { atoms, cap });
    }
    let pmf = binomial_half_pmf(n);
    let nz: Vec<usize> = (0..pmf.len()).filter(|&j| pmf[j] > 0.0).collect();
    let dim = l.dim();
    let count = nz.len().pow(r);
    let mut coords = Vec::with_capacity(count * dim);
    let mut w = Vec::with_capacity(count);
    let mut odo = vec![0usize; axes.len()];
    loop {
        let mut weight = 1.0;
        let mut c = vec![0i32; dim];
        for (slot, &axis) in axes.iter().enumerate() {
            let j = nz[odo[slot]];
            weight *= pmf[j];
            c[axis] = 2 * j as i32 - n as i32;
        }
        if weight > 0.0 {
            coords.extend_from_slice(&c);
            w.push(weight);
        }
        let mut slot = 0;
        loop {
            if slot == odo.len() {
                return build_lattice_dist(l.basis().to_vec(), coords, w, l.scale() * norm);
            }
            odo[slot] += 1;
            if odo[slot] < nz.len() {
                break;
            }
            odo[slot] = 0;
            slot += 1;
        }
    }
}

/// n-fold lattice convolution on a dense coordinate box, touching only
/// occupied cells.
fn lattice_power(base: &DiscreteDist, l: &Lattice, n: u64, norm: f64, cap: usize) -> Result<DiscreteDist, DistError> {
    let dim = l.dim();
    let mut lo = vec![i64::MAX; dim];
    let mut hi = vec![i64::MIN; dim];
    for i in 0..base.len() {
        for (k, &c) in l.coords(i).iter().enumerate() {
            lo[k] = lo[k].min(c as i64);
            hi[k] = hi[k].max(c as i64);
        }
    }
    let n_i = n as i64;
    let mut extent = vec![0usize; dim];
    let mut volume: u128 = 1;
    for k in 0..dim {
        let e = (n_i * (hi[k] - lo[k]) + 1) as u128;
        volume = volume.saturating_mul(e);
        extent[k] = e as usize;
    }
    let support_bound = volume.min((base.len() as u128).saturating_pow(n.min(64) as u32));
    if support_bound > cap as u128 || volume > 4 * cap as u128 {
        return Err(DistError::SupportOverflow {
            atoms: support_bound,
            cap,
        });
    }
    let volume = volume as usize;
    let mut stride = vec![1usize; dim];
    for k in (0..dim.saturating_sub(1)).rev() {
        stride[k] = stride[k + 1] * extent[k + 1];
    }
    let index_of = |c: &[i64]| -> usize { (0..dim).map(|k| (c[k] - n_i * lo[k]) as usize * stride[k]).sum() };
    let offsets: Vec<isize> = (0..base.len())
        .map(|i| (0..dim).map(|k| l.coords(i)[k] as isize * stride[k] as isize).sum())
        .collect();
    let bw = base.weights();
    let mut cur = vec![0.0f64; volume];
    let mut next = vec![0.0f64; volume];
    let mut mark = vec![0u32; volume];
    let origin = index_of(&vec![0i64; dim]);
    cur[origin] = 1.0;
    let mut active = vec![origin];
    for step in 1..=n as u32 {
        let mut next_active = Vec::with_capacity(active.len() * 2);
        for &i in &active {
            let x = cur[i];
            for (off, p) in offsets.iter().zip(bw) {
                let j = (i as isize + off) as usize;
                if mark[j] != step {
                    mark[j] = step;
                    next_active.push(j);
                }
                next[j] += x * p;
            }
            cur[i] = 0.0;
        }
        std::mem::swap(&mut cur, &mut next);
        active = next_active;
        active.sort_unstable();
    }
    let mut coords = Vec::with_capacity(active.len() * dim);
    let mut w = Vec::with_capacity(active.len());
    for &i in &active {
        let mut rem = i;
        for k in 0..dim {
            let q = rem / stride[k];
            rem %= stride[k];
            coords.push((q as i64 + n_i * lo[k]) as i32);
        }
        w.push(cur[i]);
    }
    build_lattice_dist(l.basis().to_vec(), coords, w, l.scale() * norm)
}

/// Renormalization-free total mass check used by tests.
#[cfg(test)]
pub(crate) fn mass(d: &DiscreteDist) -> f64 {
    compensated_sum(d.weights().iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s2() -> AlphaSpec {
        AlphaSpec::sqrt(2).unwrap()
    }

    #[test]
    fn bernoulli_examples() {
        let b = bernoulli_pm(-1.0).unwrap();
        assert_eq!(b.positions(), &[-1.0, 1.0]);
        assert_eq!(b.weights(), &[0.5, 0.5]);
        assert_eq!(bernoulli_pm(0.0).unwrap_err(), DistError::DegenerateScale);
        let r = bernoulli_lattice(&s2()).unwrap();
        assert_eq!(r.positions(), &[-std::f64::consts::SQRT_2, std::f64::consts::SQRT_2]);
    }

    #[test]
    fn convolve_examples() {
        let b1 = bernoulli_pm(1.0).unwrap();
        let c = convolve(&b1, &b1).unwrap();
        assert_eq!(c.positions(), &[-2.0, 0.0, 2.0]);
        assert_eq!(c.weights(), &[0.25, 0.5, 0.25]);
        let p = convolve(&b1, &bernoulli_lattice(&s2()).unwrap()).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.weights().iter().all(|&w| w == 0.25));
        assert_eq!(p.cdf(0.0), 0.5);
        let id = convolve(&delta0(), &p).unwrap();
        assert_eq!(id.positions(), p.positions());
    }

    #[test]
    fn mixture_examples() {
        let b1 = bernoulli_pm(1.0).unwrap();
        let same = mixture(&[(1.0, b1.clone())]).unwrap();
        assert_eq!(same.positions(), b1.positions());
        let m = mixture(&[(0.5, b1.clone()), (0.5, bernoulli_lattice(&s2()).unwrap())]).unwrap();
        assert_eq!(m.len(), 4);
        assert!(m.weights().iter().all(|&w| w == 0.25));
        let r2 = std::f64::consts::SQRT_2;
        assert_eq!(m.positions(), &[-r2, -1.0, 1.0, r2]);
        let twice = mixture(&[(0.5, b1.clone()), (0.5, b1.clone())]).unwrap();
        assert_eq!(twice.weights(), b1.weights());
        assert!(matches!(
            mixture(&[(0.5, b1.clone()), (0.4, b1)]),
            Err(DistError::WeightSumViolation { .. })
        ));
    }

    #[test]
    fn zn_examples() {
        let b1 = bernoulli_pm(1.0).unwrap();
        assert_eq!(zn_dist(&b1, 1).unwrap().positions(), &[-1.0, 1.0]);
        let z4 = zn_dist(&b1, 4).unwrap();
        assert_eq!(z4.positions(), &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        let want = [1.0, 4.0, 6.0, 4.0, 1.0].map(|x| x / 16.0);
        for (a, b) in z4.weights().iter().zip(want) {
            assert!((a - b).abs() < 1e-16);
        }
        let base = convolve(&b1, &bernoulli_lattice(&s2()).unwrap()).unwrap();
        let z2 = zn_dist(&base, 2).unwrap();
        assert_eq!(z2.len(), 9);
        assert!((z2.mass_at(0.0) - 0.25).abs() < 1e-16);
    }

    #[test]
    fn binomial_pmf_accuracy() {
        let v = binomial_half_pmf(10);
        assert!((v[5] - 252.0 / 1024.0).abs() < 1e-16);
        let big = binomial_half_pmf(2048);
        assert!((compensated_sum(big.iter().copied()) - 1.0).abs() < 1e-15);
        assert_eq!(big[0], 0.0);
    }

    #[test]
    fn non_product_lattice_power_matches_convolution() {
        let b1 = bernoulli_pm(1.0).unwrap();
        let mix = mixture(&[(0.5, b1.clone()), (0.5, bernoulli_lattice(&s2()).unwrap())]).unwrap();
        let z = zn_dist(&mix, 5).unwrap();
        let mut it = mix.clone();
        for _ in 1..5 {
            it = convolve(&it, &mix).unwrap();
        }
        assert_eq!(z.len(), it.len());
        let sigma = mix.moments(1).sigma2.sqrt() * 5f64.sqrt();
        for ((x, w), (y, v)) in z.atoms().zip(it.atoms()) {
            assert!((x - y / sigma).abs() < 1e-14);
            assert!((w - v).abs() < 1e-15);
        }
        assert!((mass(&z) - 1.0).abs() < 2f64.powi(-45));
    }

    #[test]
    fn support_cap_enforced() {
        let b1 = bernoulli_pm(1.0).unwrap();
        let base = convolve(&b1, &bernoulli_lattice(&s2()).unwrap()).unwrap();
        assert!(matches!(
            zn_dist_with_cap(&base, 100, 1000),
            Err(DistError::SupportOverflow { .. })
        ));
    }

    #[test]
    fn uncentered_rejected() {
        let d = DiscreteDist::from_atoms(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap();
        assert!(matches!(zn_dist(&d, 2), Err(DistError::NotCentered { .. })));
    }
}
