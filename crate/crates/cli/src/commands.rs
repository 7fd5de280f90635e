use std::fmt::Write as _;

use cltdioph::bounds::{reverse_check, smoothing_bound_sweep, Base, BoundsRow, ReverseReport};
use cltdioph::charfn::{cosine_bounds_check, growth_fit, CharSpec, GrowthFit};
use cltdioph::dioph::AlphaSpec;
use cltdioph::distkit::{kolmogorov_distance, zn_dist_with_cap, KolmogorovResult};
use cltdioph::edgeworth::{Edgeworth, Normal};
use cltdioph::rates::{
    avg_delta_with_cap, compare_distance_discrepancy, default_n_list, delta_sweep_with_cap, discrepancy_csv,
    discrepancy_sweep, fmt17, parse_sweep_csv, rate_fit, AvgDelta, CompareReport, DiscrepancyRow,
};
use serde::Serialize;

use crate::args::{Command, Common, Target};
use crate::error::CliError;
use crate::output::Sink;

/// Inputs resolved before dispatch.
pub struct Context<'a> {
    pub common: &'a Common,
    pub precision_bits: Option<u32>,
    /// Contents of `--in`, read up front so that it enters the config hash.
    pub input: Option<String>,
}

impl Context<'_> {
    fn char_spec(&self, text: &str) -> Result<CharSpec, CliError> {
        let spec = CharSpec::parse(text)?;
        Ok(match self.precision_bits {
            Some(b) => spec.with_precision_cap(b),
            None => spec,
        })
    }

    fn alpha(&self, text: &str) -> Result<AlphaSpec, CliError> {
        let a = AlphaSpec::parse(text)?;
        Ok(match self.precision_bits {
            Some(b) => a.with_precision_cap(b),
            None => a,
        })
    }
}

fn n_list_or(n: &[u64], default: Vec<u64>) -> Vec<u64> {
    if n.is_empty() {
        default
    } else {
        n.to_vec()
    }
}

/// Runs one command and returns the text for stdout (after the header block).
pub fn dispatch(cmd: &Command, ctx: &Context<'_>, sink: &Sink<'_>) -> Result<String, CliError> {
    match cmd {
        Command::Delta { base, n, target } => delta(ctx, sink, base, *n, *target),
        Command::Sweep { base, n } => sweep(ctx, sink, base, &n_list_or(n, default_n_list())),
        Command::Fit { eta, .. } => fit(ctx, sink, *eta),
        Command::Avg { n, grid } => avg(ctx, sink, n, *grid),
        Command::Disc { alpha, n, compare } => disc(
            ctx,
            sink,
            alpha,
            &n_list_or(n, (4..=14).map(|k| 1u64 << k).collect()),
            *compare,
        ),
        Command::Cf {
            base,
            t_max,
            peaks,
            grid,
        } => cf(ctx, sink, base, *t_max, *peaks, *grid),
        Command::Bounds {
            base,
            n,
            p,
            q,
            a_const,
            reverse,
        } => bounds(ctx, sink, base, n, *p, *q, *a_const, *reverse),
    }
}

#[derive(Serialize)]
struct DeltaResult {
    base: String,
    n: u64,
    target: Target,
    #[serde(flatten)]
    result: KolmogorovResult,
}

fn delta(ctx: &Context<'_>, sink: &Sink<'_>, base: &str, n: u64, target: Target) -> Result<String, CliError> {
    if n == 0 {
        return Err(CliError::Config("--n must be at least 1".into()));
    }
    let spec = ctx.char_spec(base)?;
    let dist = spec.base_dist()?;
    let z = zn_dist_with_cap(&dist, n, ctx.common.atom_cap)?;
    let result = match target {
        Target::Phi => kolmogorov_distance(&z, &Normal),
        Target::Phi3 => kolmogorov_distance(&z, &Edgeworth::for_sum(&dist.moments(n), n)),
    };
    sink.write_json(
        "delta",
        &DeltaResult {
            base: spec.to_string(),
            n,
            target,
            result,
        },
    )?;
    Ok(format!(
        "n delta argmax side\n{n} {} {} {}\n",
        fmt17(result.delta),
        fmt17(result.argmax),
        result.side
    ))
}

fn sweep(ctx: &Context<'_>, sink: &Sink<'_>, base: &str, n: &[u64]) -> Result<String, CliError> {
    let spec = ctx.char_spec(base)?;
    let mut result = delta_sweep_with_cap(&spec, n, ctx.common.atom_cap)?;
    let csv = result.to_csv(ctx.common.timing);
    if !ctx.common.timing {
        // serialized as null
        result.rows.iter_mut().for_each(|r| r.seconds = f64::NAN);
    }
    sink.write_csv("sweep", &csv)?;
    sink.write_json("sweep", &result)?;
    Ok(csv)
}

fn fit(ctx: &Context<'_>, sink: &Sink<'_>, eta: Option<f64>) -> Result<String, CliError> {
    if eta.is_some_and(|e| !(e > 0.0 && e.is_finite())) {
        return Err(CliError::Config("--eta must be positive and finite".into()));
    }
    let text = ctx.input.as_deref().unwrap_or_default();
    let points = parse_sweep_csv(text)?;
    let f = rate_fit(&points, eta)?;
    sink.write_json("fit", &f)?;
    let mut s = String::new();
    let _ = writeln!(s, "points {} window {}..{}", f.points, f.window.0, f.window.1);
    let _ = writeln!(s, "exponent {}", fmt17(f.exponent));
    let _ = writeln!(s, "logpow {}", fmt17(f.logpow));
    let _ = writeln!(s, "r2 {}", fmt17(f.r2));
    let _ = writeln!(s, "power_only_exponent {}", fmt17(f.power_only.exponent));
    if let Some(c) = f.constrained {
        let _ = writeln!(s, "constrained_exponent {}", fmt17(c.exponent));
        let _ = writeln!(s, "constrained_logpow {}", fmt17(c.logpow));
    }
    Ok(s)
}

fn avg(ctx: &Context<'_>, sink: &Sink<'_>, n: &[u64], grid: usize) -> Result<String, CliError> {
    if n.is_empty() || n.contains(&0) {
        return Err(CliError::Config("--n must list values of at least 1".into()));
    }
    if grid == 0 {
        return Err(CliError::Config("--grid must be at least 1".into()));
    }
    let rows: Vec<AvgDelta> = n
        .iter()
        .map(|&k| avg_delta_with_cap(k, grid, ctx.common.atom_cap))
        .collect::<Result<_, _>>()?;
    let mut csv = String::from("n,grid_size,average,ratio\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{}", r.n, r.grid_size, fmt17(r.average), fmt17(r.ratio));
    }
    sink.write_csv("avg", &csv)?;
    sink.write_json("avg", &rows)?;
    Ok(csv)
}

#[derive(Serialize)]
struct DiscResult {
    alpha: String,
    rows: Vec<DiscrepancyRow>,
    compare: Option<CompareReport>,
}

fn disc(ctx: &Context<'_>, sink: &Sink<'_>, alpha: &str, n: &[u64], compare: bool) -> Result<String, CliError> {
    let a = ctx.alpha(alpha)?;
    let rows = discrepancy_sweep(&a, n)?;
    let compare = if compare {
        Some(compare_distance_discrepancy(&a, n)?)
    } else {
        None
    };
    let csv = discrepancy_csv(&rows);
    sink.write_csv("disc", &csv)?;
    let mut out = csv;
    if let Some(c) = &compare {
        let _ = writeln!(out, "# eta_hat {}", fmt17(c.eta_hat));
        let _ = writeln!(
            out,
            "# delta exponent {} (target {})",
            fmt17(c.delta_fit.power_only.exponent),
            fmt17(c.delta_target)
        );
        let _ = writeln!(
            out,
            "# dstar exponent {} (target {})",
            fmt17(c.dstar_fit.power_only.exponent),
            fmt17(c.dstar_target)
        );
        let _ = writeln!(out, "# exponent gap {}", fmt17(c.exponent_gap()));
    }
    sink.write_json(
        "disc",
        &DiscResult {
            alpha: a.to_string(),
            rows,
            compare,
        },
    )?;
    Ok(out)
}

#[derive(Serialize)]
struct IneqSummary {
    points: usize,
    violations: usize,
    min_exp_margin: f64,
    min_lower_margin: f64,
    min_upper_margin: f64,
}

#[derive(Serialize)]
struct CfResult {
    base: String,
    growth: GrowthFit,
    inequalities: IneqSummary,
}

fn cf(
    ctx: &Context<'_>,
    sink: &Sink<'_>,
    base: &str,
    t_max: f64,
    peaks: usize,
    grid: usize,
) -> Result<String, CliError> {
    if grid < 2 {
        return Err(CliError::Config("--grid must be at least 2".into()));
    }
    let spec = ctx.char_spec(base)?;
    let growth = growth_fit(&spec, t_max, peaks)?;
    let mut ineq = IneqSummary {
        points: grid,
        violations: 0,
        min_exp_margin: f64::INFINITY,
        min_lower_margin: f64::INFINITY,
        min_upper_margin: f64::INFINITY,
    };
    for i in 0..grid {
        let x = -10.0 + 20.0 * i as f64 / (grid - 1) as f64;
        let r = cosine_bounds_check(x);
        ineq.violations += !r.pass as usize;
        ineq.min_exp_margin = ineq.min_exp_margin.min(r.exp_margin);
        ineq.min_lower_margin = ineq.min_lower_margin.min(r.lower_margin);
        ineq.min_upper_margin = ineq.min_upper_margin.min(r.upper_margin);
    }
    let mut s = String::new();
    if growth.degenerate {
        let _ = writeln!(s, "growth degenerate (lattice: |f| returns to 1)");
    } else {
        let _ = writeln!(s, "p_hat {}", fmt17(growth.p_hat));
        if let Some(q) = growth.q_hat {
            let _ = writeln!(s, "q_hat {}", fmt17(q));
        }
        let _ = writeln!(s, "p_hat_power_only {}", fmt17(growth.p_hat_power_only));
        let _ = writeln!(s, "residual {}", fmt17(growth.residual));
    }
    let _ = writeln!(s, "inequality points {} violations {}", ineq.points, ineq.violations);
    sink.write_json(
        "cf",
        &CfResult {
            base: spec.to_string(),
            growth,
            inequalities: ineq,
        },
    )?;
    Ok(s)
}

#[derive(Serialize)]
struct BoundsResult {
    base: String,
    rows: Vec<BoundsRow>,
    reverse: Option<ReverseReport>,
}

#[allow(clippy::too_many_arguments)]
fn bounds(
    ctx: &Context<'_>,
    sink: &Sink<'_>,
    base: &str,
    n: &[u64],
    p: f64,
    q: f64,
    a_const: f64,
    reverse: bool,
) -> Result<String, CliError> {
    if n.is_empty() || n.contains(&0) {
        return Err(CliError::Config("--n must list values of at least 1".into()));
    }
    let spec = ctx.char_spec(base)?;
    // the bound sweep builds each Z_n itself; check the support size first
    let dist = spec.base_dist()?;
    for &k in n {
        zn_dist_with_cap(&dist, k, ctx.common.atom_cap)?;
    }
    let rows = smoothing_bound_sweep(Base::Char(&spec), n, p, q, a_const)?;
    let reverse = if reverse {
        let s_grid: Vec<f64> = (0..=12).map(|i| 1.0 + 0.25 * i as f64).collect();
        Some(reverse_check(&spec, n, p, q, &s_grid)?)
    } else {
        None
    };
    let mut csv = String::from(
        "n,T,moment_term,cutoff_term,tail_integral,rhs_total,delta_n,ratio,admissible,non_decaying_tail\n",
    );
    for r in &rows {
        let m = &r.report;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            m.n,
            fmt17(m.t_cutoff),
            fmt17(m.moment_term),
            fmt17(m.cutoff_term),
            fmt17(m.tail_integral),
            fmt17(m.rhs_total),
            fmt17(r.delta_n),
            fmt17(r.ratio),
            m.admissible,
            m.non_decaying_tail
        );
    }
    sink.write_csv("bounds", &csv)?;
    let mut out = csv;
    if let Some(r) = &reverse {
        let _ = writeln!(out, "# reverse check: violations {}", r.violations);
        for row in &r.rows {
            let _ = writeln!(
                out,
                "# n {} growth_constant {} at s {}",
                row.n,
                fmt17(row.growth_constant),
                fmt17(row.growth_constant_at)
            );
        }
    }
    sink.write_json(
        "bounds",
        &BoundsResult {
            base: spec.to_string(),
            rows,
            reverse,
        },
    )?;
    Ok(out)
}
