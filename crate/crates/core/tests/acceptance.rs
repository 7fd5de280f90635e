//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use cltdioph::bounds::reverse_check;
use cltdioph::charfn::{cosine_bounds_check, growth_fit, CharSpec};
use cltdioph::dioph::AlphaSpec;
use cltdioph::distkit::{
    convolve, kolmogorov_distance, zn_dist, ComparisonFn, DiscreteDist, ExactLatticeDist, Moments,
};
use cltdioph::edgeworth::{
    fs_transform, nonuniform_bound, phi3_fourier_with, tail_moment_bound, w1_bound, w1_exact, Edgeworth, Normal,
    TailEnvelope, CF_DEVIATION_CONST, CF_DEVIATION_CONST_SYMMETRIC,
};
use cltdioph::rates::{
    avg_delta, compare_distance_discrepancy, default_n_list, delta_sweep, discrepancy_sweep, rate_fit,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

const EXACTNESS_TOL: f64 = 1e-12;
const CLOSED_FORM_TOL: f64 = 1e-12;
/// `1/2 - Phi(-1)`, 30-digit reference.
const DELTA1_B1: f64 = 0.341_344_746_068_542_948_585_232_545_632;
const COSINE_SAMPLES: usize = 100_000;
const POWER_IDENTITY_TOL: f64 = 1e-10;
const SQRT2_EXPONENT: (f64, f64) = (-1.15, -0.85);
const SQRT2_R2: f64 = 0.98;
const SQRT2_LOGPOW: (f64, f64) = (0.0, 1.5);
const LATTICE_EXPONENT: (f64, f64) = (-0.6, -0.4);
const GROWTH_P: (f64, f64) = (1.7, 2.3);
const AVG_RATIO_SPREAD: f64 = 4.0;
const DSTAR_EXPONENT: (f64, f64) = (-1.1, -0.85);
const COMPARE_GAP: f64 = 0.3;
const PARITY_GAP: f64 = 0.3;
const REVERSE_SPREAD: f64 = 3.0;

type BaseCase<'a> = (&'a str, &'a CharSpec, Vec<((i32, i32), f64)>);
type Criterion = (u32, &'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(x: f64, (lo, hi): (f64, f64)) -> bool {
    x >= lo && x <= hi
}

fn sqrt2() -> AlphaSpec {
    AlphaSpec::sqrt(2).unwrap()
}

fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Atoms of `Z_n` for steps on the coordinates `(a, b) -> a + b sqrt 2`,
/// accumulated by a coordinate-keyed table (no shared code with the library).
fn brute_zn(steps: &[((i32, i32), f64)], n: u64) -> Vec<(f64, f64)> {
    let mut cur: HashMap<(i32, i32), f64> = HashMap::from([((0, 0), 1.0)]);
    for _ in 0..n {
        let mut next = HashMap::new();
        for (&(a, b), &w) in &cur {
            for &((da, db), p) in steps {
                *next.entry((a + da, b + db)).or_insert(0.0) += w * p;
            }
        }
        cur = next;
    }
    let s2 = 2f64.sqrt();
    let var: f64 = steps
        .iter()
        .map(|&((a, b), p)| p * (a as f64 + b as f64 * s2).powi(2))
        .sum();
    let scale = 1.0 / (var * n as f64).sqrt();
    let mut atoms: Vec<(f64, f64)> = cur
        .into_iter()
        .map(|((a, b), w)| ((a as f64 + b as f64 * s2) * scale, w))
        .collect();
    atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
    atoms
}

/// Two-sided supremum over all atoms plus a dense grid.
fn brute_delta(atoms: &[(f64, f64)]) -> f64 {
    let mut best = 0.0f64;
    let mut cum = 0.0;
    for &(x, w) in atoms {
        let g = phi(x);
        best = best.max((cum - g).abs());
        cum += w;
        best = best.max((cum - g).abs());
    }
    let pos: Vec<f64> = atoms.iter().map(|a| a.0).collect();
    let mut cums = Vec::with_capacity(atoms.len());
    let mut c = 0.0;
    for a in atoms {
        c += a.1;
        cums.push(c);
    }
    for i in 0..=200_000 {
        let x = -8.0 + 16.0 * i as f64 / 200_000.0;
        let k = pos.partition_point(|p| *p <= x);
        let f = if k == 0 { 0.0 } else { cums[k - 1] };
        best = best.max((f - phi(x)).abs());
    }
    best
}

fn criterion_1() -> Outcome {
    let prod = CharSpec::product(vec![sqrt2()]);
    let mix = CharSpec::parse("mix:0.5:surd:0,1,1,2=0.5").unwrap();
    let unit = CharSpec::product(Vec::new());
    let cases: [BaseCase; 3] = [
        ("B1", &unit, vec![((1, 0), 0.5), ((-1, 0), 0.5)]),
        (
            "B1*B_sqrt2",
            &prod,
            vec![((1, 1), 0.25), ((1, -1), 0.25), ((-1, 1), 0.25), ((-1, -1), 0.25)],
        ),
        (
            "mix(1/2,1/2)",
            &mix,
            vec![((1, 0), 0.25), ((-1, 0), 0.25), ((0, 1), 0.25), ((0, -1), 0.25)],
        ),
    ];
    let mut worst = 0.0f64;
    for (_, spec, steps) in &cases {
        let base = spec.base_dist().unwrap();
        for n in [1u64, 2, 4, 8] {
            let z = zn_dist(&base, n).unwrap();
            let got = kolmogorov_distance(&z, &Normal).delta;
            let want = brute_delta(&brute_zn(steps, n));
            worst = worst.max((got - want).abs());
        }
    }
    outcome(
        worst <= EXACTNESS_TOL,
        format!("max |library - brute force| = {worst:.3e}"),
    )
}

fn criterion_2() -> Outcome {
    let s = delta_sweep(&CharSpec::product(Vec::new()), &[1]).unwrap();
    let err = (s.rows[0].delta_phi - DELTA1_B1).abs();
    outcome(
        err <= CLOSED_FORM_TOL,
        format!("delta_1 = {:.17}, error {err:.3e}", s.rows[0].delta_phi),
    )
}

/// Centered two-point law: `hi` with probability `p`, `lo` otherwise.
fn skewed(lo: f64, hi: f64, p: f64) -> DiscreteDist {
    DiscreteDist::from_atoms(vec![(lo, 1.0 - p), (hi, p)]).unwrap()
}

fn x2_sup<G: ComparisonFn>(z: &DiscreteDist, g: &G) -> f64 {
    let mut best = 0.0f64;
    let pos = z.positions();
    let cum = z.cumulative();
    for (k, &x) in pos.iter().enumerate() {
        let before = if k == 0 { 0.0 } else { cum[k - 1] };
        best = best.max(x * x * (cum[k] - g.eval(x)).abs());
        best = best.max(x * x * (before - g.eval(x)).abs());
    }
    for i in 0..=20_000 {
        let x = -12.0 + 24.0 * i as f64 / 20_000.0;
        best = best.max(x * x * (z.cdf(x) - g.eval(x)).abs());
    }
    best
}

fn admissible(m: &Moments, n: u64) -> bool {
    n as f64 >= m.beta4 / (m.sigma2 * m.sigma2)
}

fn criterion_3() -> Outcome {
    let mut failures: Vec<String> = Vec::new();
    let mut checks = 0usize;

    let mut rng = rand::rngs::StdRng::seed_from_u64(0x005e_ed61);
    for _ in 0..COSINE_SAMPLES {
        let x: f64 = rng.gen_range(-10.0..10.0);
        checks += 1;
        if !cosine_bounds_check(x).pass {
            failures.push(format!("cosine bounds at x = {x}"));
        }
    }

    let bases: Vec<(&str, DiscreteDist)> = vec![
        ("B1*B_sqrt2", CharSpec::product(vec![sqrt2()]).base_dist().unwrap()),
        (
            "mix(1/2,1/2)",
            CharSpec::parse("mix:0.5:surd:0,1,1,2=0.5")
                .unwrap()
                .base_dist()
                .unwrap(),
        ),
        (
            "B1*B_golden",
            CharSpec::product(vec![AlphaSpec::golden()]).base_dist().unwrap(),
        ),
        ("skew(2|-1)", skewed(-1.0, 2.0, 1.0 / 3.0)),
        (
            "skew(sqrt2)*B1",
            convolve(
                &skewed(-(2f64.sqrt()) / 2.0, 2f64.sqrt(), 1.0 / 3.0),
                &cltdioph::distkit::bernoulli_pm(1.0).unwrap(),
            )
            .unwrap(),
        ),
    ];

    let log_grid: Vec<f64> = std::iter::once(0.0)
        .chain((0..=400).map(|i| 10f64.powf(-3.0 + 4.7 * i as f64 / 400.0)))
        .collect();
    let cf_grid: Vec<f64> = (-600..=600).map(|i| i as f64 * 0.05).collect();

    for (name, base) in &bases {
        let m1 = base.moments(1);
        for n in [16u64, 64, 256] {
            let m = base.moments(n);
            let g = Edgeworth::for_sum(&m, n);
            let adm = admissible(&m, n);
            if adm {
                for &t in &log_grid {
                    checks += 1;
                    if phi3_fourier_with(t, g.a).norm() > 1.3 * (-t * t / 8.0).exp() {
                        failures.push(format!("g3 envelope {name} n={n} t={t}"));
                    }
                }
            }
            let z = zn_dist(base, n).unwrap();
            let delta = kolmogorov_distance(&z, &g).delta;

            // non-uniform bounds: Phi_3 under admissibility, and Phi for symmetric laws
            let sup3 = x2_sup(&z, &g);
            checks += 1;
            if adm && sup3 > nonuniform_bound(delta, &TailEnvelope::EDGEWORTH).unwrap() {
                failures.push(format!("nonuniform Phi3 {name} n={n}"));
            }
            for a in [0.5, 1.0, 2.0, 3.0] {
                let l = tail_moment_bound(&z, &g, a, delta).unwrap();
                checks += 1;
                if sup3 > l.total {
                    failures.push(format!("tail moment bound {name} n={n} a={a}: {sup3} > {}", l.total));
                }
            }
            let symmetric = m1.alpha3.abs() <= 1e-12;
            if symmetric {
                let d0 = kolmogorov_distance(&z, &Normal).delta;
                checks += 1;
                if x2_sup(&z, &Normal) > nonuniform_bound(d0, &TailEnvelope::NORMAL).unwrap() {
                    failures.push(format!("nonuniform Phi {name} n={n}"));
                }
                checks += 1;
                if w1_exact(&z, &Normal).unwrap() > w1_bound(d0, &TailEnvelope::NORMAL).unwrap() {
                    failures.push(format!("w1 Phi {name} n={n}"));
                }
            }
            if adm {
                checks += 1;
                if w1_exact(&z, &g).unwrap() > w1_bound(delta, &TailEnvelope::EDGEWORTH).unwrap() {
                    failures.push(format!("w1 Phi3 {name} n={n}"));
                }
                let c = if symmetric {
                    CF_DEVIATION_CONST_SYMMETRIC
                } else {
                    CF_DEVIATION_CONST
                };
                let slope = c * delta * (std::f64::consts::E + 1.0 / delta).ln().sqrt();
                // rounding floor: the transform at 0 is the stored total mass
                let floor = 2.0 * (z.total_mass() - 1.0).abs() + 1e-14;
                for &t in &cf_grid {
                    checks += 1;
                    let diff = fs_transform(&z, t) - phi3_fourier_with(t, g.a);
                    if diff.norm() > slope * t.abs() + floor {
                        failures.push(format!("cf deviation {name} n={n} t={t}"));
                    }
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{checks} checks, {} violations{}",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

fn criterion_4() -> Outcome {
    let s = delta_sweep(&CharSpec::product(vec![sqrt2()]), &default_n_list()).unwrap();
    let f = rate_fit(&s.points(), Some(1.0)).unwrap();
    let c = f.constrained.unwrap();
    outcome(
        within(f.exponent, SQRT2_EXPONENT) && f.r2 >= SQRT2_R2 && within(c.logpow, SQRT2_LOGPOW),
        format!(
            "exponent {:.4}, r2 {:.4}, constrained log-power {:.4} (power-only exponent {:.4})",
            f.exponent, f.r2, c.logpow, f.power_only.exponent
        ),
    )
}

fn criterion_5() -> Outcome {
    let s = delta_sweep(&CharSpec::product(Vec::new()), &default_n_list()).unwrap();
    let f = rate_fit(&s.points(), None).unwrap();
    outcome(
        within(f.exponent, LATTICE_EXPONENT),
        format!(
            "exponent {:.4}, r2 {:.4} (power-only {:.4})",
            f.exponent, f.r2, f.power_only.exponent
        ),
    )
}

fn criterion_6() -> Outcome {
    let g = growth_fit(&CharSpec::product(vec![sqrt2()]), 1e4, 8).unwrap();
    outcome(
        within(g.p_hat, GROWTH_P),
        format!("p_hat {:.4}, q_hat {:?}", g.p_hat, g.q_hat),
    )
}

fn criterion_7() -> Outcome {
    let ratios: Vec<f64> = [64u64, 128, 256, 512]
        .iter()
        .map(|&n| avg_delta(n, 256).unwrap().ratio)
        .collect();
    let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        spread < AVG_RATIO_SPREAD,
        format!("ratios {ratios:.4?}, max/min {spread:.4}"),
    )
}

fn criterion_8() -> Outcome {
    let ns: Vec<u64> = (4..=14).map(|k| 1u64 << k).collect();
    let rows = discrepancy_sweep(&sqrt2(), &ns).unwrap();
    let pts: Vec<(u64, f64)> = rows.iter().map(|r| (r.n, r.dstar)).collect();
    let f = rate_fit(&pts, None).unwrap();
    let cmp = compare_distance_discrepancy(&sqrt2(), &default_n_list()).unwrap();
    outcome(
        within(f.power_only.exponent, DSTAR_EXPONENT) && cmp.exponent_gap() <= COMPARE_GAP,
        format!(
            "D* exponent {:.4}; delta exponent {:.4} vs D* exponent {:.4} on 2^4..2^11, gap {:.4}",
            f.power_only.exponent,
            cmp.delta_fit.power_only.exponent,
            cmp.dstar_fit.power_only.exponent,
            cmp.exponent_gap()
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut gaps = Vec::new();
    for alpha in [sqrt2(), AlphaSpec::golden(), AlphaSpec::sqrt(3).unwrap()] {
        let p = growth_fit(&CharSpec::product(vec![alpha.clone()]), 1e4, 8)
            .unwrap()
            .p_hat;
        for w in [0.5, 0.2, 0.8] {
            let m = CharSpec::mixture(w, vec![(alpha.clone(), 1.0 - w)]).unwrap();
            let q = growth_fit(&m, 1e4, 8).unwrap().p_hat;
            gaps.push((p - q).abs());
        }
    }
    let worst = gaps.iter().cloned().fold(0.0, f64::max);
    outcome(
        worst <= PARITY_GAP,
        format!("max |p_prod - p_mix| = {worst:.4} over {} pairs", gaps.len()),
    )
}

fn criterion_10() -> Outcome {
    let mut worst_cf = 0.0f64;
    let mut worst_mass = 0.0f64;
    let bases = [
        CharSpec::product(vec![sqrt2()]).base_dist().unwrap(),
        CharSpec::parse("mix:0.3:surd:0,1,1,2=0.7")
            .unwrap()
            .base_dist()
            .unwrap(),
        skewed(-1.0, 2.0, 1.0 / 3.0),
    ];
    for base in &bases {
        let sigma = base.moments(1).sigma();
        for n in [1u64, 2, 3, 8, 17, 32, 64] {
            let z = zn_dist(base, n).unwrap();
            worst_mass = worst_mass.max((z.total_mass() - 1.0).abs());
            for i in 0..=60 {
                let t = -6.0 + 0.2 * i as f64;
                let lhs = fs_transform(&z, t);
                let rhs: Complex64 = fs_transform(base, t / (sigma * (n as f64).sqrt())).powu(n as u32);
                worst_cf = worst_cf.max((lhs - rhs).norm());
            }
        }
    }
    // fast path against exact rational powers
    let base = CharSpec::product(vec![sqrt2()]).base_dist().unwrap();
    let exact = ExactLatticeDist::from_dist(&base).unwrap();
    let mut worst_fast = 0.0f64;
    let sigma = base.moments(1).sigma();
    for n in 1..=10u64 {
        let z = zn_dist(&base, n).unwrap();
        let e = exact.power(n).to_dist(1.0 / (sigma * (n as f64).sqrt())).unwrap();
        if z.len() != e.len() {
            worst_fast = f64::INFINITY;
            continue;
        }
        for (a, b) in z.atoms().zip(e.atoms()) {
            worst_fast = worst_fast.max((a.0 - b.0).abs()).max((a.1 - b.1).abs());
        }
    }
    outcome(
        worst_cf <= POWER_IDENTITY_TOL && worst_mass <= 1e-12 && worst_fast <= 1e-12,
        format!("cf identity {worst_cf:.3e}, mass {worst_mass:.3e}, fast path vs exact {worst_fast:.3e}"),
    )
}

fn criterion_11() -> Outcome {
    let s_grid: Vec<f64> = (0..=60).map(|i| 1.0 + 0.05 * i as f64).collect();
    let r = reverse_check(&CharSpec::product(vec![sqrt2()]), &[64, 256, 1024], 2.0, 0.0, &s_grid).unwrap();
    let cs: Vec<f64> = r.rows.iter().map(|row| row.growth_constant).collect();
    outcome(
        r.violations == 0 && r.growth_constant_spread() <= REVERSE_SPREAD,
        format!(
            "violations {}, growth_constant {cs:.4?}, spread {:.3}",
            r.violations,
            r.growth_constant_spread()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "exactness oracle", criterion_1, Duration::from_secs(10)),
        (2, "closed-form spot check", criterion_2, Duration::from_secs(10)),
        (3, "inequality suites", criterion_3, Duration::from_secs(120)),
        (4, "rate for sqrt 2", criterion_4, Duration::from_secs(300)),
        (5, "lattice contrast", criterion_5, Duration::from_secs(300)),
        (6, "growth exponent", criterion_6, Duration::from_secs(300)),
        (7, "average over alpha", criterion_7, Duration::from_secs(1200)),
        (8, "discrepancy comparison", criterion_8, Duration::from_secs(60)),
        (9, "product/mixture parity", criterion_9, Duration::from_secs(300)),
        (
            10,
            "power identity and fast path",
            criterion_10,
            Duration::from_secs(300),
        ),
        (11, "reverse inequality check", criterion_11, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (id, name, run, budget) in criteria {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let pass = o.pass && elapsed <= budget;
        failed += (!pass) as u32;
        println!(
            "criterion {id:>2} [{name}]: {} ({}; {:.1}s of {}s budget)",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
