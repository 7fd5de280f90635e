//! CSV serialization: `position,weight[,c0,c1,...]`.
//!
//! Lattice-tagged distributions also carry `# lattice-basis=` and
//! `# lattice-scale=` comment lines so that the coordinates can be restored.

use std::fmt::Write as _;

use super::lattice::Lattice;
use super::{DiscreteDist, DistError};
use crate::dioph::AlphaSpec;

pub(crate) fn to_csv(d: &DiscreteDist) -> String {
    let mut out = String::new();
    let lattice = d.lattice();
    if let Some(l) = lattice {
        let basis: Vec<String> = l.basis().iter().map(|a| a.to_string()).collect();
        let _ = writeln!(out, "# lattice-basis={}", basis.join(";"));
        let _ = writeln!(out, "# lattice-scale={:.16e}", l.scale());
    }
    out.push_str("position,weight");
    if let Some(l) = lattice {
        for k in 0..l.dim() {
            let _ = write!(out, ",c{k}");
        }
    }
    out.push('\n');
    for i in 0..d.len() {
        let _ = write!(out, "{:.16e},{:.16e}", d.positions()[i], d.weights()[i]);
        if let Some(l) = lattice {
            for c in l.coords(i) {
                let _ = write!(out, ",{c}");
            }
        }
        out.push('\n');
    }
    out
}

pub(crate) fn from_csv(text: &str) -> Result<DiscreteDist, DistError> {
    let err = |line: usize, reason: &str| DistError::Csv {
        line,
        reason: reason.to_string(),
    };
    let mut basis: Option<Vec<AlphaSpec>> = None;
    let mut scale: Option<f64> = None;
    let mut header: Option<usize> = None;
    let mut pos = Vec::new();
    let mut w = Vec::new();
    let mut coords: Vec<i32> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(b) = comment.strip_prefix("lattice-basis=") {
                let parsed: Result<Vec<AlphaSpec>, _> = if b.trim().is_empty() {
                    Ok(Vec::new())
                } else {
                    b.split(';').map(AlphaSpec::parse).collect()
                };
                basis = Some(parsed.map_err(|e| err(line_no, &e.to_string()))?);
            } else if let Some(s) = comment.strip_prefix("lattice-scale=") {
                let v: f64 = s.trim().parse().map_err(|_| err(line_no, "bad lattice scale"))?;
                if !(v > 0.0) || !v.is_finite() {
                    return Err(err(line_no, "lattice scale must be positive"));
                }
                scale = Some(v);
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let Some(ncols) = header else {
            if fields.len() < 2 || fields[0] != "position" || fields[1] != "weight" {
                return Err(err(line_no, "expected header `position,weight[,c0,...]`"));
            }
            for (k, f) in fields[2..].iter().enumerate() {
                if *f != format!("c{k}") {
                    return Err(err(line_no, "coordinate columns must be named c0, c1, ..."));
                }
            }
            header = Some(fields.len());
            continue;
        };
        if fields.len() != ncols {
            return Err(err(
                line_no,
                &format!("expected {ncols} fields, found {}", fields.len()),
            ));
        }
        let x: f64 = fields[0].parse().map_err(|_| err(line_no, "bad position"))?;
        let p: f64 = fields[1].parse().map_err(|_| err(line_no, "bad weight"))?;
        if !x.is_finite() {
            return Err(err(line_no, "position must be finite"));
        }
        if !(p > 0.0) || !p.is_finite() {
            return Err(err(line_no, "weight must be positive and finite"));
        }
        if let Some(&last) = pos.last() {
            if x < last {
                return Err(err(line_no, "positions must be non-decreasing"));
            }
        }
        for f in &fields[2..] {
            coords.push(f.parse().map_err(|_| err(line_no, "bad coordinate"))?);
        }
        pos.push(x);
        w.push(p);
    }
    let ncols = header.ok_or_else(|| err(0, "missing header"))?;
    if pos.is_empty() {
        return Err(DistError::Empty);
    }
    let sum = crate::numeric::compensated_sum(w.iter().copied());
    if (sum - 1.0).abs() > 1e-9 {
        return Err(DistError::WeightSumViolation { sum });
    }
    let lattice = if ncols > 2 {
        let basis = basis.ok_or_else(|| err(0, "coordinate columns need a `# lattice-basis=` line"))?;
        if basis.len() + 1 != ncols - 2 {
            return Err(err(0, "coordinate column count does not match the lattice basis"));
        }
        Some(Lattice::new(basis, coords, scale.unwrap_or(1.0)))
    } else {
        None
    };
    if lattice.is_none() && pos.windows(2).any(|p| p[0] == p[1]) {
        return Err(err(0, "positions must be strictly increasing"));
    }
    Ok(DiscreteDist::from_sorted(pos, w, lattice))
}
