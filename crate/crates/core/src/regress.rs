//! Ordinary least squares for the small design matrices used by the fits.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearFit {
    /// One coefficient per design column, intercept first when present.
    pub coef: Vec<f64>,
    pub r2: f64,
    /// RMS of the residuals.
    pub rms: f64,
}

/// Least squares of `y` on the columns of `x` (row-major, one row per
/// observation) via modified Gram-Schmidt QR. `None` for rank-deficient or
/// underdetermined systems.
pub fn least_squares(x: &[Vec<f64>], y: &[f64]) -> Option<LinearFit> {
    let m = y.len();
    let k = x.first()?.len();
    if m < k || x.len() != m || k == 0 {
        return None;
    }
    let mut q: Vec<Vec<f64>> = (0..k).map(|j| x.iter().map(|r| r[j]).collect()).collect();
    let mut r = vec![vec![0.0; k]; k];
    for j in 0..k {
        for i in 0..j {
            let d: f64 = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
            r[i][j] = d;
            let qi = q[i].clone();
            for (v, w) in q[j].iter_mut().zip(&qi) {
                *v -= d * w;
            }
        }
        let norm = q[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = x.iter().map(|row| row[j] * row[j]).sum::<f64>().sqrt();
        if !(norm > 1e-10 * scale) {
            return None;
        }
        r[j][j] = norm;
        for v in q[j].iter_mut() {
            *v /= norm;
        }
    }
    let qty: Vec<f64> = q.iter().map(|c| c.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
    let mut coef = vec![0.0; k];
    for j in (0..k).rev() {
        let s: f64 = (j + 1..k).map(|i| r[j][i] * coef[i]).sum();
        coef[j] = (qty[j] - s) / r[j][j];
    }
    let mean = y.iter().sum::<f64>() / m as f64;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for (row, &yi) in x.iter().zip(y) {
        let pred: f64 = row.iter().zip(&coef).map(|(a, b)| a * b).sum();
        ss_res += (yi - pred).powi(2);
        ss_tot += (yi - mean).powi(2);
    }
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Some(LinearFit {
        coef,
        r2,
        rms: (ss_res / m as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_planted_plane() {
        let x: Vec<Vec<f64>> = (1..20).map(|i| vec![1.0, i as f64, (i as f64).ln()]).collect();
        let y: Vec<f64> = x.iter().map(|r| 0.5 - 2.0 * r[1] + 0.25 * r[2]).collect();
        let f = least_squares(&x, &y).unwrap();
        assert!((f.coef[0] - 0.5).abs() < 1e-10);
        assert!((f.coef[1] + 2.0).abs() < 1e-12);
        assert!((f.coef[2] - 0.25).abs() < 1e-10);
        assert!(f.r2 > 1.0 - 1e-12);
    }

    #[test]
    fn noisy_line_matches_closed_form() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ys = [1.1, 1.9, 3.2, 3.9, 5.1];
        let x: Vec<Vec<f64>> = xs.iter().map(|&v| vec![1.0, v]).collect();
        let f = least_squares(&x, &ys).unwrap();
        // slope = Sxy / Sxx with centred sums
        let (mx, my) = (3.0, ys.iter().sum::<f64>() / 5.0);
        let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = xs.iter().map(|a| (a - mx) * (a - mx)).sum();
        assert!((f.coef[1] - sxy / sxx).abs() < 1e-13);
    }

    #[test]
    fn rank_deficient() {
        let x = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        assert!(least_squares(&x, &[1.0, 2.0, 3.0]).is_none());
        assert!(least_squares(&[vec![1.0, 2.0]], &[1.0]).is_none());
    }
}
